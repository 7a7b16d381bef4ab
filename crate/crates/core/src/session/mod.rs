//! Deterministic in-memory runs of the whole protocol, with at most one
//! misbehaving participant, recorded as an auditable transcript.
//!
//! Players talk over a synchronous, ordered bus. Every random value comes from
//! a [`crate::seeds`] stream, so a configuration always produces the same
//! transcript. The clerk is the first proxy.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::backend::{BackendKind, PairingBackend};
use crate::envelope::{self, Kind};
use crate::idmpms::{self, IdmpmsError, Signcryption};
use crate::liuxiao::{self, LxError, LxSigncryption, LxUserKey};
use crate::seeds;
use crate::warrant::{Identity, Warrant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Idmpms,
    Liuxiao,
}

impl Scheme {
    pub const ALL: [Scheme; 2] = [Scheme::Idmpms, Scheme::Liuxiao];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Idmpms => "idmpms",
            Scheme::Liuxiao => "liuxiao",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "idmpms" => Ok(Scheme::Idmpms),
            "liuxiao" => Ok(Scheme::Liuxiao),
            other => Err(format!("unknown scheme {other:?} (expected idmpms or liuxiao)")),
        }
    }
}

/// Protocol stages in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stage {
    Setup,
    Extract,
    Warrant,
    Delegation,
    ProxyKey,
    Round1,
    Commit,
    Partial,
    Combine,
    Deliver,
    PublicVerify,
    Unsigncrypt,
    Verdict,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Setup => "setup",
            Stage::Extract => "extract",
            Stage::Warrant => "warrant",
            Stage::Delegation => "delegation",
            Stage::ProxyKey => "proxy-key",
            Stage::Round1 => "round1",
            Stage::Commit => "commit",
            Stage::Partial => "partial",
            Stage::Combine => "combine",
            Stage::Deliver => "deliver",
            Stage::PublicVerify => "public-verify",
            Stage::Unsigncrypt => "unsigncrypt",
            Stage::Verdict => "verdict",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A participant. Indices are zero-based; labels are one-based (`A1`, `P1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Original(usize),
    Proxy(usize),
    /// The link from the clerk to the receiver.
    Channel,
}

impl Role {
    pub fn label(self) -> String {
        match self {
            Role::Original(i) => format!("A{}", i + 1),
            Role::Proxy(j) => format!("P{}", j + 1),
            Role::Channel => "channel".into(),
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Behavior {
    Honest,
    /// Posts a delegation share that is not `h_w * S_ID`.
    BadDelegationShare,
    /// Posts a round-1 broadcast inconsistent with its nonce.
    BadRound1,
    /// Posts a partial signcryption that is not `t P_pub - r_p S_pj`.
    BadPartial,
    /// Never posts its partial signcryption.
    WithholdPartial,
    /// Flips one ciphertext bit in transit.
    TamperCiphertext,
    /// Posts two different round-1 broadcasts.
    Equivocate,
}

impl Behavior {
    pub const ALL: [Behavior; 7] = [
        Behavior::Honest,
        Behavior::BadDelegationShare,
        Behavior::BadRound1,
        Behavior::BadPartial,
        Behavior::WithholdPartial,
        Behavior::TamperCiphertext,
        Behavior::Equivocate,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Behavior::Honest => "honest",
            Behavior::BadDelegationShare => "bad-delegation-share",
            Behavior::BadRound1 => "bad-round1",
            Behavior::BadPartial => "bad-partial",
            Behavior::WithholdPartial => "withhold-partial",
            Behavior::TamperCiphertext => "tamper-ciphertext",
            Behavior::Equivocate => "equivocate",
        }
    }

    /// Whether a player in `role` can exhibit this behavior.
    pub fn fits(self, role: Role) -> bool {
        match self {
            Behavior::Honest => true,
            Behavior::BadDelegationShare => matches!(role, Role::Original(_)),
            Behavior::BadRound1 | Behavior::BadPartial | Behavior::WithholdPartial | Behavior::Equivocate => {
                matches!(role, Role::Proxy(_))
            }
            Behavior::TamperCiphertext => role == Role::Channel,
        }
    }

    /// The role used for this behavior in matrix runs.
    pub fn default_role(self, n: usize, l: usize, seed: u64) -> Role {
        match self {
            Behavior::BadDelegationShare => Role::Original(seed as usize % n),
            Behavior::TamperCiphertext => Role::Channel,
            _ => Role::Proxy(seed as usize % l),
        }
    }
}

impl fmt::Display for Behavior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Behavior {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Behavior::ALL
            .into_iter()
            .find(|b| b.as_str() == s)
            .ok_or_else(|| format!("unknown behavior {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Adversary {
    pub role: Role,
    pub behavior: Behavior,
}

/// Everything in the warrant except its serial, which is drawn from the seed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WarrantTemplate {
    pub originals: Vec<Identity>,
    pub proxies: Vec<Identity>,
    pub receiver: Identity,
    pub scope: Vec<u8>,
    pub valid_from: u64,
    pub valid_to: u64,
}

pub const DEFAULT_SCOPE: &[u8] = b"signcrypt messages on behalf of the original group";
pub const DEFAULT_VALID_FROM: u64 = 1_767_225_600;
pub const DEFAULT_VALID_TO: u64 = 4_102_444_800;
pub const DEFAULT_NOW: u64 = 1_790_000_000;
pub const DEFAULT_MESSAGE: &[u8] = b"The quarterly report is approved.";

pub fn original_name(i: usize) -> String {
    format!("a{}@pairmps.test", i + 1)
}

pub fn proxy_name(j: usize) -> String {
    format!("p{}@pairmps.test", j + 1)
}

pub const RECEIVER_NAME: &str = "c@pairmps.test";

impl WarrantTemplate {
    pub fn standard(n: usize, l: usize) -> Self {
        let ids = |f: fn(usize) -> String, k| (0..k).map(|i| Identity::new(f(i)).expect("short ascii name")).collect();
        WarrantTemplate {
            originals: ids(original_name, n),
            proxies: ids(proxy_name, l),
            receiver: Identity::new(RECEIVER_NAME).expect("short ascii name"),
            scope: DEFAULT_SCOPE.to_vec(),
            valid_from: DEFAULT_VALID_FROM,
            valid_to: DEFAULT_VALID_TO,
        }
    }

    pub fn instantiate(&self, seed: u64) -> Result<Warrant, SessionError> {
        let serial = seeds::role_rng(seed, seeds::WARRANT_SERIAL, b"").gen();
        Warrant::new(
            self.originals.clone(),
            self.proxies.clone(),
            self.scope.clone(),
            self.valid_from,
            self.valid_to,
            serial,
        )
        .map_err(|e| SessionError::InvalidConfig(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionConfig {
    pub scheme: Scheme,
    pub n: usize,
    pub l: usize,
    pub template: WarrantTemplate,
    pub message: Vec<u8>,
    pub seed: u64,
    pub now: u64,
    pub adversary: Option<Adversary>,
}

impl SessionConfig {
    /// Standard identities and message, everyone honest.
    pub fn new(scheme: Scheme, n: usize, l: usize, seed: u64) -> Self {
        SessionConfig {
            scheme,
            n,
            l,
            template: WarrantTemplate::standard(n, l),
            message: DEFAULT_MESSAGE.to_vec(),
            seed,
            now: DEFAULT_NOW,
            adversary: None,
        }
    }

    pub fn with_adversary(mut self, role: Role, behavior: Behavior) -> Self {
        self.adversary = Some(Adversary { role, behavior });
        self
    }

    pub fn validate(&self) -> Result<(), SessionError> {
        let bad = |msg: String| Err(SessionError::InvalidConfig(msg));
        if self.n == 0 || self.l == 0 {
            return bad("n and l must be at least 1".into());
        }
        if self.template.originals.len() != self.n || self.template.proxies.len() != self.l {
            return bad("warrant template does not list n originals and l proxies".into());
        }
        if self.template.originals.contains(&self.template.receiver)
            || self.template.proxies.contains(&self.template.receiver)
        {
            return bad("receiver must not be a signer".into());
        }
        if let Some(adv) = self.adversary {
            let in_range = match adv.role {
                Role::Original(i) => i < self.n,
                Role::Proxy(j) => j < self.l,
                Role::Channel => true,
            };
            if !in_range {
                return bad(format!("adversary {} is out of range", adv.role));
            }
            if !adv.behavior.fits(adv.role) {
                return bad(format!("{} cannot be played by {}", adv.behavior, adv.role));
            }
        }
        self.template.instantiate(self.seed).map(|_| ())
    }

    fn misbehaves(&self, role: Role, behavior: Behavior) -> bool {
        self.adversary == Some(Adversary { role, behavior })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error("invalid session configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub stage: Stage,
    pub actor: String,
    pub digest: [u8; 32],
    pub outcome: String,
}

impl Event {
    pub fn line(&self) -> String {
        format!("{} | {} | {} | {}", self.stage, self.actor, hex::encode(self.digest), self.outcome)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject {
        stage: Stage,
        culprit: Option<String>,
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionTranscript {
    pub config: SessionConfig,
    pub backend: BackendKind,
    pub events: Vec<Event>,
    pub verdict: Verdict,
    /// Wire form of the final signcryption, when one was produced.
    pub signcryption: Option<Vec<u8>>,
    pub plaintext: Option<Vec<u8>>,
}

impl SessionTranscript {
    /// One line per event: `stage | actor | digest-hex | outcome`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&e.line());
            out.push('\n');
        }
        out
    }

    pub fn accepted(&self) -> bool {
        self.verdict == Verdict::Accept
    }

    pub fn signcryption_envelope(&self) -> Option<String> {
        let kind = match self.config.scheme {
            Scheme::Idmpms => Kind::Sc,
            Scheme::Liuxiao => Kind::Lxsc,
        };
        self.signcryption.as_deref().map(|sc| envelope::armor(kind, sc))
    }
}

fn digest(bytes: &[u8]) -> [u8; 32] {
    Sha256::digest(bytes).into()
}

struct Rejection {
    stage: Stage,
    culprit: Option<String>,
    reason: String,
}

impl Rejection {
    fn new(stage: Stage, culprit: Option<String>, reason: impl fmt::Display) -> Self {
        Rejection {
            stage,
            culprit,
            reason: reason.to_string(),
        }
    }
}

/// Event log plus the broadcast bus.
#[derive(Default)]
struct Recorder {
    events: Vec<Event>,
    posts: HashMap<(Stage, String), [u8; 32]>,
}

impl Recorder {
    fn emit(&mut self, stage: Stage, actor: &str, payload: &[u8], outcome: &str) {
        self.events.push(Event {
            stage,
            actor: actor.to_string(),
            digest: digest(payload),
            outcome: outcome.to_string(),
        });
    }

    /// Posts to the bus. A second, different post from the same sender in the
    /// same stage is equivocation.
    fn post(&mut self, stage: Stage, actor: &str, payload: &[u8]) -> Result<(), Rejection> {
        let d = digest(payload);
        match self.posts.get(&(stage, actor.to_string())) {
            Some(prev) if *prev != d => {
                self.emit(stage, actor, payload, "conflicting post");
                Err(Rejection::new(stage, Some(actor.to_string()), "equivocation"))
            }
            Some(_) => Ok(()),
            None => {
                self.posts.insert((stage, actor.to_string()), d);
                self.emit(stage, actor, payload, "posted");
                Ok(())
            }
        }
    }
}

/// The misbehaving player's random nonzero perturbation.
fn adversary_delta<B: PairingBackend>(be: &B, seed: u64) -> B::Scalar {
    be.random_scalar(&mut seeds::role_rng(seed, seeds::ADVERSARY, b""))
}

fn flip_random_bit(c: &mut [u8], seed: u64) {
    let bit = seeds::role_rng(seed, seeds::ADVERSARY, b"tamper").gen_range(0..c.len() * 8);
    c[bit / 8] ^= 1 << (bit % 8);
}

fn proxy_label(w: &Warrant, id: &Identity) -> Option<String> {
    w.proxy_index(id).map(|j| Role::Proxy(j).label())
}

fn original_label(w: &Warrant, id: &Identity) -> Option<String> {
    w.original_index(id).map(|i| Role::Original(i).label())
}

/// Runs one session end to end.
pub fn run_session<B: PairingBackend>(backend: &B, cfg: &SessionConfig) -> Result<SessionTranscript, SessionError> {
    cfg.validate()?;
    let mut rec = Recorder::default();
    let outcome = match cfg.scheme {
        Scheme::Idmpms => run_idmpms(backend, cfg, &mut rec),
        Scheme::Liuxiao => run_liuxiao(backend, cfg, &mut rec),
    };
    let (verdict, signcryption, plaintext) = match outcome {
        Ok((sc, m)) => {
            rec.emit(Stage::Verdict, "-", &sc, "accept");
            (Verdict::Accept, Some(sc), Some(m))
        }
        Err((rej, sc)) => {
            let culprit = rej.culprit.clone().unwrap_or_else(|| "unattributed".into());
            let outcome = format!("reject at {}: {} ({})", rej.stage, culprit, rej.reason);
            rec.emit(Stage::Verdict, "-", sc.as_deref().unwrap_or_default(), &outcome);
            let verdict = Verdict::Reject {
                stage: rej.stage,
                culprit: rej.culprit,
                reason: rej.reason,
            };
            (verdict, sc, None)
        }
    };
    Ok(SessionTranscript {
        config: cfg.clone(),
        backend: backend.kind(),
        events: rec.events,
        verdict,
        signcryption,
        plaintext,
    })
}

type Flow = Result<(Vec<u8>, Vec<u8>), (Rejection, Option<Vec<u8>>)>;

fn early(r: Rejection) -> (Rejection, Option<Vec<u8>>) {
    (r, None)
}

fn run_idmpms<B: PairingBackend>(be: &B, cfg: &SessionConfig, rec: &mut Recorder) -> Flow {
    let tpl = &cfg.template;
    let pkg = idmpms::setup(be.clone(), &mut seeds::role_rng(cfg.seed, seeds::SETUP, b""));
    let params = pkg.params();
    rec.emit(Stage::Setup, "PKG", &params.encode(), "published");

    let originals: Vec<_> = tpl.originals.iter().map(|id| pkg.extract(id)).collect();
    let proxies: Vec<_> = tpl.proxies.iter().map(|id| pkg.extract(id)).collect();
    let receiver = pkg.extract(&tpl.receiver);
    let labelled = originals
        .iter()
        .enumerate()
        .map(|(i, k)| (Role::Original(i).label(), k))
        .chain(proxies.iter().enumerate().map(|(j, k)| (Role::Proxy(j).label(), k)))
        .chain(std::iter::once(("C".to_string(), &receiver)));
    for (label, key) in labelled {
        rec.emit(Stage::Extract, &label, key.id().as_bytes(), "key issued");
    }

    let w = tpl.instantiate(cfg.seed).expect("validated");
    rec.post(Stage::Warrant, "A1", &w.encode()).map_err(early)?;

    let delta = adversary_delta(be, cfg.seed);
    let mut shares = Vec::with_capacity(cfg.n);
    for (i, key) in originals.iter().enumerate() {
        let mut share = idmpms::delegation_share(params, key, &w, cfg.now)
            .map_err(|e| early(Rejection::new(Stage::Delegation, Some(Role::Original(i).label()), e)))?;
        if cfg.misbehaves(Role::Original(i), Behavior::BadDelegationShare) {
            share.s_ai = share.s_ai + be.g1_mul(&be.g1_generator(), &delta);
        }
        rec.post(Stage::Delegation, &Role::Original(i).label(), &share.encode(be))
            .map_err(early)?;
        shares.push(share);
    }
    for (i, share) in shares.iter().enumerate() {
        let ok = idmpms::verify_delegation_share(params, share, &w, cfg.now).unwrap_or(false);
        let label = Role::Original(i).label();
        rec.emit(Stage::Delegation, &label, &share.encode(be), if ok { "verified" } else { "invalid" });
        if !ok {
            return Err(early(Rejection::new(
                Stage::Delegation,
                Some(label),
                "delegation share failed verification",
            )));
        }
    }
    let s_a = idmpms::aggregate_delegation(params, &shares, &w, cfg.now).map_err(|e| {
        let culprit = match &e {
            IdmpmsError::InvalidShare { signer, .. } => original_label(&w, signer),
            _ => None,
        };
        early(Rejection::new(Stage::Delegation, culprit, e))
    })?;

    let mut proxy_keys = Vec::with_capacity(cfg.l);
    for (j, key) in proxies.iter().enumerate() {
        let pk = idmpms::derive_proxy_key(params, key, &s_a, &w)
            .map_err(|e| early(Rejection::new(Stage::ProxyKey, Some(Role::Proxy(j).label()), e)))?;
        rec.emit(Stage::ProxyKey, &Role::Proxy(j).label(), &be.encode_g1(&pk.s_a), "derived");
        proxy_keys.push(pk);
    }

    let mut secrets = Vec::with_capacity(cfg.l);
    let mut bcasts = Vec::with_capacity(cfg.l);
    for (j, pk) in proxy_keys.iter().enumerate() {
        let label = Role::Proxy(j).label();
        let t = round1_secret(be, cfg.seed, &pk.proxy_id);
        let honest = idmpms::round1_with_secret(params, &pk.proxy_id, &tpl.receiver, &t);
        let skew = be.gt_exp(&be.pair(&be.g1_generator(), &be.g2_generator()), &delta);
        let mut posted = honest.clone();
        if cfg.misbehaves(Role::Proxy(j), Behavior::BadRound1) {
            posted.k1j = posted.k1j * skew.clone();
        }
        rec.post(Stage::Round1, &label, &posted.encode(be)).map_err(early)?;
        if cfg.misbehaves(Role::Proxy(j), Behavior::Equivocate) {
            let other = idmpms::Round1Broadcast {
                k1j: honest.k1j.clone() * skew,
                ..honest.clone()
            };
            rec.post(Stage::Round1, &label, &other.encode(be)).map_err(early)?;
        }
        secrets.push(t);
        bcasts.push(posted);
    }

    let keys = idmpms::derive_session_keys(params, &bcasts, &w)
        .map_err(|e| early(Rejection::new(Stage::Commit, None, e)))?;
    let (c, r_p) = idmpms::encrypt_and_commit(params, &cfg.message, &keys);
    let mut commit = c.clone();
    commit.extend_from_slice(&be.encode_scalar(&r_p));
    rec.emit(Stage::Commit, "proxies", &commit, "c and r_p computed");

    let mut parts = Vec::with_capacity(cfg.l);
    for (j, (pk, t)) in proxy_keys.iter().zip(&secrets).enumerate() {
        let label = Role::Proxy(j).label();
        let mut part = idmpms::partial_sign(params, pk, t, &r_p);
        if cfg.misbehaves(Role::Proxy(j), Behavior::WithholdPartial) {
            rec.emit(Stage::Partial, &label, &[], "withheld");
            continue;
        }
        if cfg.misbehaves(Role::Proxy(j), Behavior::BadPartial) {
            part.u_pj = part.u_pj + be.g1_mul(&be.g1_generator(), &delta);
        }
        rec.post(Stage::Partial, &label, &part.encode(be)).map_err(early)?;
        parts.push(part);
    }

    let sc = idmpms::combine(params, &parts, &bcasts, &s_a, &w, c, r_p, cfg.now).map_err(|e| {
        let culprit = match &e {
            IdmpmsError::InvalidPartial { proxy, .. } | IdmpmsError::MissingPartial(proxy) => proxy_label(&w, proxy),
            _ => None,
        };
        rec.emit(Stage::Combine, "P1", &[], "rejected");
        early(Rejection::new(Stage::Combine, culprit, e))
    })?;
    let mut wire = sc.encode(be);
    rec.emit(Stage::Combine, "P1", &wire, "combined");

    deliver(cfg, rec, &mut wire, |w| {
        let mut sc = Signcryption::<B>::decode(be, w).expect("own encoding");
        flip_random_bit(&mut sc.c, cfg.seed);
        sc.encode(be)
    });

    let received = Signcryption::decode(be, &wire)
        .map_err(|e| (Rejection::new(Stage::PublicVerify, None, e), Some(wire.clone())))?;
    let valid = idmpms::public_verify(params, &received, cfg.now);
    rec.emit(Stage::PublicVerify, "verifier", &wire, if valid { "valid" } else { "invalid" });
    if !valid {
        return Err((
            Rejection::new(Stage::PublicVerify, None, IdmpmsError::VerifyFailed),
            Some(wire),
        ));
    }

    match idmpms::unsigncrypt(params, &received, &receiver, cfg.now) {
        Ok(m) if m == cfg.message => {
            rec.emit(Stage::Unsigncrypt, "C", &m, "recovered");
            Ok((wire, m))
        }
        Ok(m) => {
            rec.emit(Stage::Unsigncrypt, "C", &m, "wrong plaintext");
            Err((Rejection::new(Stage::Unsigncrypt, None, "recovered a different message"), Some(wire)))
        }
        Err(e) => {
            rec.emit(Stage::Unsigncrypt, "C", &[], "failed");
            Err((Rejection::new(Stage::Unsigncrypt, None, e), Some(wire)))
        }
    }
}

/// The clerk's transmission to the receiver, possibly through a tampering channel.
fn deliver(cfg: &SessionConfig, rec: &mut Recorder, wire: &mut Vec<u8>, tamper: impl FnOnce(&[u8]) -> Vec<u8>) {
    if cfg.misbehaves(Role::Channel, Behavior::TamperCiphertext) {
        *wire = tamper(wire);
        rec.emit(Stage::Deliver, "channel", wire, "delivered");
    } else {
        rec.emit(Stage::Deliver, "P1", wire, "delivered");
    }
}

/// `t_j` for a proxy, drawn from its own seed stream.
pub fn round1_secret<B: PairingBackend>(be: &B, seed: u64, proxy: &Identity) -> idmpms::Round1Secret<B> {
    let t = be.random_scalar(&mut seeds::role_rng(seed, seeds::ROUND1, proxy.as_bytes()));
    idmpms::Round1Secret::new(be, t).expect("sampled scalars are nonzero")
}

pub fn lx_round1_secret<B: PairingBackend>(be: &B, seed: u64, proxy: &Identity) -> liuxiao::LxRound1Secret<B> {
    let t = be.random_scalar(&mut seeds::role_rng(seed, seeds::ROUND1, proxy.as_bytes()));
    liuxiao::LxRound1Secret::new(be, t).expect("sampled scalars are nonzero")
}

/// A baseline participant's key pair, drawn from its own seed stream.
pub fn lx_key<B: PairingBackend>(be: &B, seed: u64, id: &Identity) -> LxUserKey<B> {
    LxUserKey::generate(be, id.clone(), &mut seeds::role_rng(seed, seeds::LX_KEY, id.as_bytes()))
}

fn run_liuxiao<B: PairingBackend>(be: &B, cfg: &SessionConfig, rec: &mut Recorder) -> Flow {
    let tpl = &cfg.template;
    let originals: Vec<_> = tpl.originals.iter().map(|id| lx_key(be, cfg.seed, id)).collect();
    let proxies: Vec<_> = tpl.proxies.iter().map(|id| lx_key(be, cfg.seed, id)).collect();
    let receiver = lx_key(be, cfg.seed, &tpl.receiver);
    let labelled = originals
        .iter()
        .enumerate()
        .map(|(i, k)| (Role::Original(i).label(), k))
        .chain(proxies.iter().enumerate().map(|(j, k)| (Role::Proxy(j).label(), k)))
        .chain(std::iter::once(("C".to_string(), &receiver)));
    for (label, key) in labelled {
        rec.emit(Stage::Extract, &label, &key.public().encode(be), "key published");
    }
    let original_pubs: Vec<_> = originals.iter().map(|k| k.public().clone()).collect();
    let proxy_pubs: Vec<_> = proxies.iter().map(|k| k.public().clone()).collect();

    let w = tpl.instantiate(cfg.seed).expect("validated");
    rec.post(Stage::Warrant, "A1", &w.encode()).map_err(early)?;

    let delta = adversary_delta(be, cfg.seed);
    let mut shares = Vec::with_capacity(cfg.n);
    for (i, key) in originals.iter().enumerate() {
        let mut share = liuxiao::lx_delegation_share(be, key, &w, cfg.now)
            .map_err(|e| early(Rejection::new(Stage::Delegation, Some(Role::Original(i).label()), e)))?;
        if cfg.misbehaves(Role::Original(i), Behavior::BadDelegationShare) {
            share.s_ai = share.s_ai + be.g1_mul(&be.g1_generator(), &delta);
        }
        rec.post(Stage::Delegation, &Role::Original(i).label(), &share.encode(be))
            .map_err(early)?;
        shares.push(share);
    }
    for (i, share) in shares.iter().enumerate() {
        let ok = liuxiao::lx_verify_delegation_share(be, share, &original_pubs[i], &w, cfg.now).unwrap_or(false);
        let label = Role::Original(i).label();
        rec.emit(Stage::Delegation, &label, &share.encode(be), if ok { "verified" } else { "invalid" });
        if !ok {
            return Err(early(Rejection::new(
                Stage::Delegation,
                Some(label),
                "delegation share failed verification",
            )));
        }
    }
    let s_a = liuxiao::lx_aggregate_delegation(be, &shares, &original_pubs, &w, cfg.now).map_err(|e| {
        let culprit = match &e {
            LxError::InvalidShare { signer, .. } => original_label(&w, signer),
            _ => None,
        };
        early(Rejection::new(Stage::Delegation, culprit, e))
    })?;

    let mut proxy_keys = Vec::with_capacity(cfg.l);
    for (j, key) in proxies.iter().enumerate() {
        let pk = liuxiao::lx_derive_proxy_key(be, key, &s_a, &w)
            .map_err(|e| early(Rejection::new(Stage::ProxyKey, Some(Role::Proxy(j).label()), e)))?;
        rec.emit(Stage::ProxyKey, &Role::Proxy(j).label(), &be.encode_g1(&pk.s_a), "derived");
        proxy_keys.push(pk);
    }

    let mut secrets = Vec::with_capacity(cfg.l);
    let mut bcasts = Vec::with_capacity(cfg.l);
    for (j, pk) in proxy_keys.iter().enumerate() {
        let label = Role::Proxy(j).label();
        let t = lx_round1_secret(be, cfg.seed, &pk.proxy_id);
        let honest = liuxiao::lx_round1_with_secret(be, &pk.proxy_id, receiver.public(), &t);
        let skew = be.gt_exp(&be.pair(&be.g1_generator(), &be.g2_generator()), &delta);
        let mut posted = honest.clone();
        if cfg.misbehaves(Role::Proxy(j), Behavior::BadRound1) {
            posted.r_pj = posted.r_pj * skew.clone();
        }
        rec.post(Stage::Round1, &label, &posted.encode(be)).map_err(early)?;
        if cfg.misbehaves(Role::Proxy(j), Behavior::Equivocate) {
            let other = liuxiao::LxRound1Broadcast {
                r_pj: honest.r_pj.clone() * skew,
                ..honest.clone()
            };
            rec.post(Stage::Round1, &label, &other.encode(be)).map_err(early)?;
        }
        secrets.push(t);
        bcasts.push(posted);
    }

    let k = liuxiao::lx_session_key(be, &bcasts, &w).map_err(|e| early(Rejection::new(Stage::Commit, None, e)))?;
    let (c, r_p) = liuxiao::lx_encrypt_and_commit(be, &cfg.message, &k);
    let mut commit = c.clone();
    commit.extend_from_slice(&be.encode_scalar(&r_p));
    rec.emit(Stage::Commit, "proxies", &commit, "c and r_p computed");

    let mut parts = Vec::with_capacity(cfg.l);
    for (j, (pk, t)) in proxy_keys.iter().zip(&secrets).enumerate() {
        let label = Role::Proxy(j).label();
        let mut part = liuxiao::lx_partial_sign(be, pk, t, &r_p);
        if cfg.misbehaves(Role::Proxy(j), Behavior::WithholdPartial) {
            rec.emit(Stage::Partial, &label, &[], "withheld");
            continue;
        }
        if cfg.misbehaves(Role::Proxy(j), Behavior::BadPartial) {
            part.u_pj = part.u_pj + be.g1_mul(&be.g1_generator(), &delta);
        }
        rec.post(Stage::Partial, &label, &part.encode(be)).map_err(early)?;
        parts.push(part);
    }

    let sc = liuxiao::lx_combine(be, &parts, &s_a, &w, c, r_p).map_err(|e| {
        let culprit = match &e {
            LxError::MissingPartial(proxy) => proxy_label(&w, proxy),
            _ => None,
        };
        rec.emit(Stage::Combine, "P1", &[], "rejected");
        early(Rejection::new(Stage::Combine, culprit, e))
    })?;
    let mut wire = sc.encode(be);
    rec.emit(Stage::Combine, "P1", &wire, "combined");

    deliver(cfg, rec, &mut wire, |w| {
        let mut sc = LxSigncryption::<B>::decode(be, w).expect("own encoding");
        flip_random_bit(&mut sc.c, cfg.seed);
        sc.encode(be)
    });

    let result = LxSigncryption::decode(be, &wire)
        .and_then(|sc| liuxiao::lx_unsigncrypt(be, &sc, &receiver, &proxy_pubs, cfg.now));
    match result {
        Ok(m) if m == cfg.message => {
            rec.emit(Stage::Unsigncrypt, "C", &m, "recovered");
            Ok((wire, m))
        }
        Ok(m) => {
            rec.emit(Stage::Unsigncrypt, "C", &m, "wrong plaintext");
            Err((Rejection::new(Stage::Unsigncrypt, None, "recovered a different message"), Some(wire)))
        }
        Err(e) => {
            rec.emit(Stage::Unsigncrypt, "C", &[], "failed");
            Err((Rejection::new(Stage::Unsigncrypt, None, e), Some(wire)))
        }
    }
}

/// Reruns a transcript's configuration and checks the outcome is reproduced exactly.
pub fn replay<B: PairingBackend>(backend: &B, transcript: &SessionTranscript) -> bool {
    match run_session(backend, &transcript.config) {
        Ok(again) => again == *transcript,
        Err(_) => false,
    }
}

/// The culprit a correct run must name, if the protocol can attribute one.
pub fn expected_culprit(scheme: Scheme, adv: Adversary) -> Option<String> {
    match (scheme, adv.behavior) {
        (_, Behavior::Honest | Behavior::TamperCiphertext) => None,
        (_, Behavior::BadDelegationShare | Behavior::WithholdPartial | Behavior::Equivocate) => Some(adv.role.label()),
        (Scheme::Idmpms, Behavior::BadRound1 | Behavior::BadPartial) => Some(adv.role.label()),
        // The baseline clerk cannot check partials or round-1 values.
        (Scheme::Liuxiao, Behavior::BadRound1 | Behavior::BadPartial) => None,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MatrixRow {
    pub runs: usize,
    pub passed: usize,
    /// Stage at which each run ended.
    pub stages: BTreeMap<Stage, usize>,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MatrixSummary {
    pub rows: BTreeMap<Behavior, MatrixRow>,
}

impl MatrixSummary {
    pub fn all_passed(&self) -> bool {
        self.rows.values().all(|r| r.passed == r.runs && r.runs > 0)
    }

    pub fn to_table(&self) -> String {
        let mut out = format!("{:<22} {:>6} {:>6}  stages\n", "scenario", "runs", "pass");
        for (b, row) in &self.rows {
            let stages: Vec<_> = row.stages.iter().map(|(s, k)| format!("{s}={k}")).collect();
            out.push_str(&format!("{:<22} {:>6} {:>6}  {}\n", b.as_str(), row.runs, row.passed, stages.join(" ")));
        }
        out
    }
}

/// Checks one run against what its scenario requires: honest runs accept and
/// recover the message; adversarial runs are rejected, naming the right
/// culprit where the protocol can attribute one.
pub fn judge(t: &SessionTranscript) -> Result<(), String> {
    let behavior = t.config.adversary.map_or(Behavior::Honest, |a| a.behavior);
    match (&t.verdict, t.config.adversary) {
        (Verdict::Accept, None) | (Verdict::Accept, Some(Adversary { behavior: Behavior::Honest, .. })) => {
            if t.plaintext.as_deref() == Some(&t.config.message[..]) {
                Ok(())
            } else {
                Err("accepted with the wrong plaintext".into())
            }
        }
        (Verdict::Accept, Some(_)) => Err(format!("{behavior} went undetected")),
        (Verdict::Reject { stage, reason, .. }, None) => Err(format!("honest run rejected at {stage}: {reason}")),
        (Verdict::Reject { stage, culprit, .. }, Some(adv)) => {
            if adv.behavior == Behavior::Honest {
                return Err(format!("honest run rejected at {stage}"));
            }
            let expected = expected_culprit(t.config.scheme, adv);
            if *culprit != expected {
                return Err(format!("culprit {culprit:?}, expected {expected:?}"));
            }
            Ok(())
        }
    }
}

/// Honest and every single-adversary scenario over `sizes x sizes x seeds`.
pub fn run_matrix<B: PairingBackend>(backend: &B, scheme: Scheme, seeds: &[u64], sizes: &[usize]) -> MatrixSummary {
    let mut summary = MatrixSummary::default();
    for behavior in Behavior::ALL {
        let row = summary.rows.entry(behavior).or_default();
        for &n in sizes {
            for &l in sizes {
                for &seed in seeds {
                    let mut cfg = SessionConfig::new(scheme, n, l, seed);
                    if behavior != Behavior::Honest {
                        cfg = cfg.with_adversary(behavior.default_role(n, l, seed), behavior);
                    }
                    row.runs += 1;
                    let t = run_session(backend, &cfg).expect("matrix configurations are valid");
                    let end = match &t.verdict {
                        Verdict::Accept => Stage::Verdict,
                        Verdict::Reject { stage, .. } => *stage,
                    };
                    *row.stages.entry(end).or_default() += 1;
                    match judge(&t) {
                        Ok(()) => row.passed += 1,
                        Err(e) => row.failures.push(format!("n={n} l={l} seed={seed}: {e}")),
                    }
                }
            }
        }
    }
    summary
}
