//! Operation counts per protocol phase.
//!
//! [`Instrumented`] wraps a backend and counts pairings, scalar multiplications
//! and target-group exponentiations as they happen. Scalar multiplications in
//! either source group are reported together as `g1muls`, since both groups
//! stand in for the single source group of the symmetric setting. Work inside
//! hash-to-curve is not counted.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Instant;

use rand::RngCore;

use crate::backend::{BackendError, BackendKind, GroupDescriptor, PairingBackend};
use crate::idmpms::{self, Round1Bases};
use crate::liuxiao;
use crate::session::{self, Scheme, WarrantTemplate, DEFAULT_NOW};

#[derive(Debug, Default)]
struct Counters {
    pairings: AtomicU64,
    muls: AtomicU64,
    gt_exps: AtomicU64,
}

/// A backend that counts the expensive group operations it performs.
///
/// Clones share one set of counters.
#[derive(Debug, Clone)]
pub struct Instrumented<B> {
    inner: B,
    counters: Arc<Counters>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounts {
    pub pairings: u64,
    pub g1_muls: u64,
    pub gt_exps: u64,
}

impl OpCounts {
    pub const fn new(pairings: u64, g1_muls: u64, gt_exps: u64) -> Self {
        OpCounts {
            pairings,
            g1_muls,
            gt_exps,
        }
    }
}

impl<B: PairingBackend> Instrumented<B> {
    pub fn new(inner: B) -> Self {
        Instrumented {
            inner,
            counters: Arc::default(),
        }
    }

    pub fn inner(&self) -> &B {
        &self.inner
    }

    pub fn counts(&self) -> OpCounts {
        OpCounts {
            pairings: self.counters.pairings.load(Ordering::Relaxed),
            g1_muls: self.counters.muls.load(Ordering::Relaxed),
            gt_exps: self.counters.gt_exps.load(Ordering::Relaxed),
        }
    }

    pub fn reset(&self) {
        self.counters.pairings.store(0, Ordering::Relaxed);
        self.counters.muls.store(0, Ordering::Relaxed);
        self.counters.gt_exps.store(0, Ordering::Relaxed);
    }
}

fn bump(c: &AtomicU64) {
    c.fetch_add(1, Ordering::Relaxed);
}

impl<B: PairingBackend> PairingBackend for Instrumented<B> {
    type Scalar = B::Scalar;
    type G1 = B::G1;
    type G2 = B::G2;
    type Gt = B::Gt;

    fn kind(&self) -> BackendKind {
        self.inner.kind()
    }
    fn descriptor(&self) -> GroupDescriptor {
        self.inner.descriptor()
    }
    fn g1_generator(&self) -> B::G1 {
        self.inner.g1_generator()
    }
    fn g2_generator(&self) -> B::G2 {
        self.inner.g2_generator()
    }
    fn g1_identity(&self) -> B::G1 {
        self.inner.g1_identity()
    }
    fn g2_identity(&self) -> B::G2 {
        self.inner.g2_identity()
    }
    fn gt_identity(&self) -> B::Gt {
        self.inner.gt_identity()
    }
    fn scalar_from_u64(&self, v: u64) -> B::Scalar {
        self.inner.scalar_from_u64(v)
    }
    fn scalar_is_zero(&self, k: &B::Scalar) -> bool {
        self.inner.scalar_is_zero(k)
    }
    fn scalar_inverse(&self, k: &B::Scalar) -> Option<B::Scalar> {
        self.inner.scalar_inverse(k)
    }

    fn g1_mul(&self, p: &B::G1, k: &B::Scalar) -> B::G1 {
        bump(&self.counters.muls);
        self.inner.g1_mul(p, k)
    }
    fn g2_mul(&self, p: &B::G2, k: &B::Scalar) -> B::G2 {
        bump(&self.counters.muls);
        self.inner.g2_mul(p, k)
    }
    fn pair(&self, a: &B::G1, b: &B::G2) -> B::Gt {
        bump(&self.counters.pairings);
        self.inner.pair(a, b)
    }
    fn gt_exp(&self, x: &B::Gt, k: &B::Scalar) -> B::Gt {
        bump(&self.counters.gt_exps);
        self.inner.gt_exp(x, k)
    }

    fn hash_to_g1(&self, domain_tag: &[u8], msg: &[u8]) -> B::G1 {
        self.inner.hash_to_g1(domain_tag, msg)
    }
    fn hash_to_g2(&self, domain_tag: &[u8], msg: &[u8]) -> B::G2 {
        self.inner.hash_to_g2(domain_tag, msg)
    }
    fn hash_to_scalar(&self, domain_tag: &[u8], msg: &[u8]) -> B::Scalar {
        self.inner.hash_to_scalar(domain_tag, msg)
    }
    fn random_scalar<R: RngCore + ?Sized>(&self, rng: &mut R) -> B::Scalar {
        self.inner.random_scalar(rng)
    }

    fn scalar_len(&self) -> usize {
        self.inner.scalar_len()
    }
    fn g1_len(&self) -> usize {
        self.inner.g1_len()
    }
    fn g2_len(&self) -> usize {
        self.inner.g2_len()
    }
    fn gt_len(&self) -> usize {
        self.inner.gt_len()
    }
    fn encode_scalar(&self, k: &B::Scalar) -> Vec<u8> {
        self.inner.encode_scalar(k)
    }
    fn decode_scalar(&self, bytes: &[u8]) -> Result<B::Scalar, BackendError> {
        self.inner.decode_scalar(bytes)
    }
    fn encode_g1(&self, p: &B::G1) -> Vec<u8> {
        self.inner.encode_g1(p)
    }
    fn decode_g1(&self, bytes: &[u8]) -> Result<B::G1, BackendError> {
        self.inner.decode_g1(bytes)
    }
    fn encode_g2(&self, p: &B::G2) -> Vec<u8> {
        self.inner.encode_g2(p)
    }
    fn decode_g2(&self, bytes: &[u8]) -> Result<B::G2, BackendError> {
        self.inner.decode_g2(bytes)
    }
    fn encode_gt(&self, x: &B::Gt) -> Vec<u8> {
        self.inner.encode_gt(x)
    }
    fn decode_gt(&self, bytes: &[u8]) -> Result<B::Gt, BackendError> {
        self.inner.decode_gt(bytes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phase {
    DelegationVerifyPerShare,
    PublicVerify,
    UnsigncryptK2,
    PartialVerify,
    Round1PerProxy,
    /// Round 1 with the pairing bases computed once in advance.
    Round1PerProxyCached,
}

impl Phase {
    /// The phases whose counts follow directly from the scheme equations.
    pub const CORE: [Phase; 5] = [
        Phase::DelegationVerifyPerShare,
        Phase::PublicVerify,
        Phase::UnsigncryptK2,
        Phase::PartialVerify,
        Phase::Round1PerProxy,
    ];

    pub const ALL: [Phase; 6] = [
        Phase::DelegationVerifyPerShare,
        Phase::PublicVerify,
        Phase::UnsigncryptK2,
        Phase::PartialVerify,
        Phase::Round1PerProxy,
        Phase::Round1PerProxyCached,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::DelegationVerifyPerShare => "delegation-verify-per-share",
            Phase::PublicVerify => "public-verify",
            Phase::UnsigncryptK2 => "unsigncrypt-k2",
            Phase::PartialVerify => "partial-verify",
            Phase::Round1PerProxy => "round1-per-proxy",
            Phase::Round1PerProxyCached => "round1-per-proxy-cached",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Phase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Phase::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown phase {s:?}"))
    }
}

/// Counts read off the equations, independent of `n` and `l`. `None` where
/// the scheme has no such phase.
///
/// - delegation check `e(S_Ai, P) = e(Q_Ai, P_pub)^h_w`: 2 pairings, 1 exponentiation;
///   baseline `e(S_ai, P) = e(H2(m_w), y_ai)`: 2 pairings.
/// - public verification `e(u_p, P) e(S, P)^r_p e(P_pub, sum Q_pj)^(h_w r_p)` plus the
///   origin check `e(P_pub, sum Q_Ai)^(l h_w) = e(S, P)`, sharing `e(S, P)`:
///   4 pairings, 3 exponentiations.
/// - receiver `e(u_p, Q_C) e(S, Q_C)^r_p e(h_w sum Q_pj, S_C)^r_p`: 3 pairings,
///   2 exponentiations, 1 multiplication; baseline `e(u_p, y_c) e(S, y_c)^r_p
///   e(H2(m_w), sum y_pj)^(r_p x_c)`: 3 pairings, 2 exponentiations.
/// - clerk check `e(u_pj, P) e(S_A, P)^r_p e(P_pub, Q_pj)^(h_w r_p) = k1j`:
///   3 pairings, 2 exponentiations.
/// - round 1 `e(P, P_pub)^t`, `e(P_pub, Q_C)^t`: 2 pairings, 2 exponentiations;
///   baseline `e(P, y_c)^t`: 1 and 1. Cached bases remove the pairings.
pub fn analytic(scheme: Scheme, phase: Phase) -> Option<OpCounts> {
    use Phase::*;
    match (scheme, phase) {
        (Scheme::Idmpms, DelegationVerifyPerShare) => Some(OpCounts::new(2, 0, 1)),
        (Scheme::Idmpms, PublicVerify) => Some(OpCounts::new(4, 0, 3)),
        (Scheme::Idmpms, UnsigncryptK2) => Some(OpCounts::new(3, 1, 2)),
        (Scheme::Idmpms, PartialVerify) => Some(OpCounts::new(3, 0, 2)),
        (Scheme::Idmpms, Round1PerProxy) => Some(OpCounts::new(2, 0, 2)),
        (Scheme::Idmpms, Round1PerProxyCached) => Some(OpCounts::new(0, 0, 2)),
        (Scheme::Liuxiao, DelegationVerifyPerShare) => Some(OpCounts::new(2, 0, 0)),
        (Scheme::Liuxiao, PublicVerify | PartialVerify) => None,
        (Scheme::Liuxiao, UnsigncryptK2) => Some(OpCounts::new(3, 0, 2)),
        (Scheme::Liuxiao, Round1PerProxy) => Some(OpCounts::new(1, 0, 1)),
        (Scheme::Liuxiao, Round1PerProxyCached) => Some(OpCounts::new(0, 0, 1)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseReport {
    pub scheme: Scheme,
    pub phase: Phase,
    pub n: usize,
    pub l: usize,
    pub counts: OpCounts,
    pub nanos: u128,
}

impl PhaseReport {
    /// `scheme,phase,n,l,pairings,g1muls,gtexps,nanos`
    pub fn line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.scheme,
            self.phase,
            self.n,
            self.l,
            self.counts.pairings,
            self.counts.g1_muls,
            self.counts.gt_exps,
            self.nanos
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OpCountReport {
    pub rows: Vec<PhaseReport>,
}

impl OpCountReport {
    pub fn to_lines(&self) -> String {
        let mut out = String::from("scheme,phase,n,l,pairings,g1muls,gtexps,nanos\n");
        for r in &self.rows {
            out.push_str(&r.line());
            out.push('\n');
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:<8} {:<28} {:>3} {:>3} {:>9} {:>7} {:>7} {:>12}\n",
            "scheme", "phase", "n", "l", "pairings", "g1muls", "gtexps", "micros"
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{:<8} {:<28} {:>3} {:>3} {:>9} {:>7} {:>7} {:>12.1}\n",
                r.scheme.as_str(),
                r.phase.as_str(),
                r.n,
                r.l,
                r.counts.pairings,
                r.counts.g1_muls,
                r.counts.gt_exps,
                r.nanos as f64 / 1000.0
            ));
        }
        out
    }
}

const BENCH_SEED: u64 = 0xbe9c;
const BENCH_MESSAGE: &[u8] = b"operation count benchmark";

/// Runs one execution of `phase` after an honest setup with `n` originals and
/// `l` proxies, counting only the phase itself. `None` if the scheme has no
/// such phase.
pub fn count_phase<B: PairingBackend>(backend: &B, scheme: Scheme, phase: Phase, n: usize, l: usize) -> Option<PhaseReport> {
    count_phase_with_message(backend, scheme, phase, n, l, BENCH_MESSAGE)
}

pub fn count_phase_with_message<B: PairingBackend>(
    backend: &B,
    scheme: Scheme,
    phase: Phase,
    n: usize,
    l: usize,
    m: &[u8],
) -> Option<PhaseReport> {
    analytic(scheme, phase)?;
    let be = Instrumented::new(backend.clone());
    let (counts, nanos) = match scheme {
        Scheme::Idmpms => measure_idmpms(&be, phase, n, l, m),
        Scheme::Liuxiao => measure_liuxiao(&be, phase, n, l, m),
    };
    Some(PhaseReport {
        scheme,
        phase,
        n,
        l,
        counts,
        nanos,
    })
}

fn timed<B: PairingBackend, T>(be: &Instrumented<B>, f: impl FnOnce() -> T) -> (OpCounts, u128) {
    be.reset();
    let start = Instant::now();
    std::hint::black_box(f());
    let nanos = start.elapsed().as_nanos();
    (be.counts(), nanos)
}

fn measure_idmpms<B: PairingBackend>(be: &Instrumented<B>, phase: Phase, n: usize, l: usize, m: &[u8]) -> (OpCounts, u128) {
    let tpl = WarrantTemplate::standard(n, l);
    let now = DEFAULT_NOW;
    let pkg = idmpms::setup(be.clone(), &mut crate::seeds::role_rng(BENCH_SEED, crate::seeds::SETUP, b""));
    let params = pkg.params();
    let w = tpl.instantiate(BENCH_SEED).expect("standard template");
    let shares: Vec<_> = tpl
        .originals
        .iter()
        .map(|id| idmpms::delegation_share(params, &pkg.extract(id), &w, now).expect("member"))
        .collect();
    if phase == Phase::DelegationVerifyPerShare {
        return timed(be, || idmpms::verify_delegation_share(params, &shares[0], &w, now));
    }
    let s_a = idmpms::aggregate_delegation(params, &shares, &w, now).expect("honest shares");
    let proxy_keys: Vec<_> = tpl
        .proxies
        .iter()
        .map(|id| idmpms::derive_proxy_key(params, &pkg.extract(id), &s_a, &w).expect("member"))
        .collect();
    let secrets: Vec<_> = tpl
        .proxies
        .iter()
        .map(|id| session::round1_secret(be, BENCH_SEED, id))
        .collect();
    match phase {
        Phase::Round1PerProxy => {
            return timed(be, || {
                idmpms::round1_with_secret(params, &tpl.proxies[0], &tpl.receiver, &secrets[0])
            })
        }
        Phase::Round1PerProxyCached => {
            let bases = Round1Bases::compute(params, &tpl.receiver);
            return timed(be, || idmpms::round1_with_bases(params, &bases, &tpl.proxies[0], &secrets[0]));
        }
        _ => {}
    }
    let bcasts: Vec<_> = tpl
        .proxies
        .iter()
        .zip(&secrets)
        .map(|(id, t)| idmpms::round1_with_secret(params, id, &tpl.receiver, t))
        .collect();
    let keys = idmpms::derive_session_keys(params, &bcasts, &w).expect("all broadcasts");
    let (c, r_p) = idmpms::encrypt_and_commit(params, m, &keys);
    let parts: Vec<_> = proxy_keys
        .iter()
        .zip(&secrets)
        .map(|(pk, t)| idmpms::partial_sign(params, pk, t, &r_p))
        .collect();
    if phase == Phase::PartialVerify {
        return timed(be, || {
            idmpms::verify_partial(params, &parts[0], &bcasts[0], &s_a, &w, &r_p, now)
        });
    }
    let sc = idmpms::combine(params, &parts, &bcasts, &s_a, &w, c, r_p, now).expect("honest partials");
    match phase {
        Phase::PublicVerify => timed(be, || idmpms::public_verify(params, &sc, now)),
        Phase::UnsigncryptK2 => {
            let receiver = pkg.extract(&tpl.receiver);
            timed(be, || idmpms::recover_k2_preimage(params, &sc, &receiver))
        }
        _ => unreachable!("every phase handled above"),
    }
}

fn measure_liuxiao<B: PairingBackend>(be: &Instrumented<B>, phase: Phase, n: usize, l: usize, m: &[u8]) -> (OpCounts, u128) {
    let tpl = WarrantTemplate::standard(n, l);
    let now = DEFAULT_NOW;
    let originals: Vec<_> = tpl.originals.iter().map(|id| session::lx_key(be, BENCH_SEED, id)).collect();
    let proxies: Vec<_> = tpl.proxies.iter().map(|id| session::lx_key(be, BENCH_SEED, id)).collect();
    let receiver = session::lx_key(be, BENCH_SEED, &tpl.receiver);
    let original_pubs: Vec<_> = originals.iter().map(|k| k.public().clone()).collect();
    let proxy_pubs: Vec<_> = proxies.iter().map(|k| k.public().clone()).collect();
    let w = tpl.instantiate(BENCH_SEED).expect("standard template");
    let shares: Vec<_> = originals
        .iter()
        .map(|k| liuxiao::lx_delegation_share(be, k, &w, now).expect("member"))
        .collect();
    if phase == Phase::DelegationVerifyPerShare {
        return timed(be, || {
            liuxiao::lx_verify_delegation_share(be, &shares[0], &original_pubs[0], &w, now)
        });
    }
    let s_a = liuxiao::lx_aggregate_delegation(be, &shares, &original_pubs, &w, now).expect("honest shares");
    let proxy_keys: Vec<_> = proxies
        .iter()
        .map(|k| liuxiao::lx_derive_proxy_key(be, k, &s_a, &w).expect("member"))
        .collect();
    let secrets: Vec<_> = tpl
        .proxies
        .iter()
        .map(|id| session::lx_round1_secret(be, BENCH_SEED, id))
        .collect();
    match phase {
        Phase::Round1PerProxy => {
            return timed(be, || {
                liuxiao::lx_round1_with_secret(be, &tpl.proxies[0], receiver.public(), &secrets[0])
            })
        }
        Phase::Round1PerProxyCached => {
            let base = liuxiao::lx_round1_base(be, receiver.public());
            return timed(be, || liuxiao::lx_round1_with_base(be, &base, &tpl.proxies[0], &secrets[0]));
        }
        _ => {}
    }
    let bcasts: Vec<_> = tpl
        .proxies
        .iter()
        .zip(&secrets)
        .map(|(id, t)| liuxiao::lx_round1_with_secret(be, id, receiver.public(), t))
        .collect();
    let k = liuxiao::lx_session_key(be, &bcasts, &w).expect("all broadcasts");
    let (c, r_p) = liuxiao::lx_encrypt_and_commit(be, m, &k);
    let parts: Vec<_> = proxy_keys
        .iter()
        .zip(&secrets)
        .map(|(pk, t)| liuxiao::lx_partial_sign(be, pk, t, &r_p))
        .collect();
    let sc = liuxiao::lx_combine(be, &parts, &s_a, &w, c, r_p).expect("all partials");
    match phase {
        Phase::UnsigncryptK2 => timed(be, || liuxiao::lx_recover_product(be, &sc, &receiver, &proxy_pubs)),
        _ => unreachable!("phases without a baseline counterpart are filtered out"),
    }
}

/// Every phase of both schemes for each `(n, l)` in `sizes x sizes`.
pub fn full_report<B: PairingBackend>(backend: &B, sizes: &[usize]) -> OpCountReport {
    let mut rows = Vec::new();
    for scheme in Scheme::ALL {
        for phase in Phase::ALL {
            for &n in sizes {
                for &l in sizes {
                    rows.extend(count_phase(backend, scheme, phase, n, l));
                }
            }
        }
    }
    OpCountReport { rows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{Bls12Backend, MockBackend};

    #[test]
    fn wrapper_counts_exactly() {
        let be = Instrumented::new(MockBackend::wide());
        let g = be.g1_generator();
        let k = be.scalar_from_u64(3);
        let x = be.pair(&g, &be.g2_generator());
        be.g1_mul(&g, &k);
        be.g2_mul(&be.g2_generator(), &k);
        be.gt_exp(&x, &k);
        be.hash_to_g1(b"t", b"m");
        assert_eq!(be.counts(), OpCounts::new(1, 2, 1));
        let clone = be.clone();
        clone.pair(&g, &be.g2_generator());
        assert_eq!(be.counts().pairings, 2);
        be.reset();
        assert_eq!(be.counts(), OpCounts::default());
    }

    #[test]
    fn measured_counts_match_analytic_on_mock() {
        let be = MockBackend::wide();
        for scheme in Scheme::ALL {
            for phase in Phase::ALL {
                for n in [1, 4, 8] {
                    for l in [1, 4, 8] {
                        let row = count_phase(&be, scheme, phase, n, l);
                        assert_eq!(row.as_ref().map(|r| r.counts), analytic(scheme, phase), "{scheme} {phase} {n} {l}");
                    }
                }
            }
        }
    }

    #[test]
    fn measured_counts_match_analytic_on_production() {
        for scheme in Scheme::ALL {
            for phase in Phase::ALL {
                let row = count_phase(&Bls12Backend, scheme, phase, 2, 3);
                assert_eq!(row.map(|r| r.counts), analytic(scheme, phase), "{scheme} {phase}");
            }
        }
    }

    #[test]
    fn counts_do_not_depend_on_message_length() {
        let be = MockBackend::wide();
        for scheme in Scheme::ALL {
            for phase in Phase::ALL {
                let counts: Vec<_> = [0usize, 1, 4096]
                    .iter()
                    .map(|len| count_phase_with_message(&be, scheme, phase, 2, 2, &vec![0x5a; *len]).map(|r| r.counts))
                    .collect();
                assert!(counts.windows(2).all(|w| w[0] == w[1]), "{scheme} {phase}");
            }
        }
    }

    #[test]
    fn report_formats() {
        let report = full_report(&MockBackend::wide(), &[1]);
        // 6 idmpms phases and 4 baseline phases.
        assert_eq!(report.rows.len(), 10);
        let lines = report.to_lines();
        assert!(lines.starts_with("scheme,phase,n,l,pairings,g1muls,gtexps,nanos\n"));
        assert!(lines.contains("\nidmpms,public-verify,1,1,4,0,3,"));
        assert!(lines.lines().skip(1).all(|l| l.split(',').count() == 8));
        let table = report.to_table();
        assert_eq!(table.lines().count(), 11);
        assert_eq!("round1-per-proxy".parse::<Phase>(), Ok(Phase::Round1PerProxy));
    }
}
