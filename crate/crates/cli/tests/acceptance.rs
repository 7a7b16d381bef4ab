//! Acceptance suite: one line per criterion, nonzero exit if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use pairmps::backend::{Bls12Backend, MockBackend, PairingBackend};
use pairmps::bench::{self, Phase};
use pairmps::idmpms::{self, PublicParams, Round1Broadcast, Round1Secret, Signcryption, UserKey};
use pairmps::liuxiao::{self, LxError, LxPublicKey, LxSigncryption, LxUserKey};
use pairmps::session::{self, Scheme, SessionConfig, DEFAULT_MESSAGE};
use pairmps::warrant::{Identity, Warrant, SERIAL_LEN};

use common::Flow;

type Outcome = Result<String, String>;

const NOW: u64 = 1_000;

fn id(s: &str) -> Identity {
    Identity::new(s).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

struct Honest<B: PairingBackend> {
    params: PublicParams<B>,
    receiver: UserKey<B>,
    bcasts: Vec<Round1Broadcast<B>>,
    sc: Signcryption<B>,
}

fn honest<B: PairingBackend>(be: B, n: usize, l: usize, m: &[u8], seed: u64) -> Honest<B> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let pkg = idmpms::setup(be, &mut rng);
    let params = pkg.params().clone();
    let originals: Vec<_> = (0..n).map(|i| id(&format!("a{i}.{seed}@acceptance.test"))).collect();
    let proxies: Vec<_> = (0..l).map(|j| id(&format!("p{j}.{seed}@acceptance.test"))).collect();
    let w = Warrant::new(originals.clone(), proxies.clone(), b"acceptance".to_vec(), 0, 10_000, rng.gen()).unwrap();
    let receiver = pkg.extract(&id("c@acceptance.test"));
    let shares: Vec<_> = originals
        .iter()
        .map(|a| idmpms::delegation_share(&params, &pkg.extract(a), &w, NOW).unwrap())
        .collect();
    let s_a = idmpms::aggregate_delegation(&params, &shares, &w, NOW).unwrap();
    let keys: Vec<_> = proxies
        .iter()
        .map(|p| idmpms::derive_proxy_key(&params, &pkg.extract(p), &s_a, &w).unwrap())
        .collect();
    let (secrets, bcasts): (Vec<_>, Vec<_>) = keys
        .iter()
        .map(|k| idmpms::round1(&params, k, receiver.id(), &mut rng))
        .unzip();
    let session = idmpms::derive_session_keys(&params, &bcasts, &w).unwrap();
    let (c, r_p) = idmpms::encrypt_and_commit(&params, m, &session);
    let parts: Vec<_> = keys
        .iter()
        .zip(&secrets)
        .map(|(k, t)| idmpms::partial_sign(&params, k, t, &r_p))
        .collect();
    let sc = idmpms::combine(&params, &parts, &bcasts, &s_a, &w, c, r_p, NOW).unwrap();
    Honest {
        params,
        receiver,
        bcasts,
        sc,
    }
}

fn honest_correctness() -> Outcome {
    let be = Bls12Backend::new();
    let mut rng = ChaCha20Rng::seed_from_u64(0xacce);
    let start = Instant::now();
    for trial in 0..100 {
        let (n, l) = (rng.gen_range(1..=8), rng.gen_range(1..=8));
        let mut m = vec![0u8; rng.gen_range(0..=4096)];
        rng.fill(&mut m[..]);
        let run = honest(be, n, l, &m, rng.gen());
        ensure(idmpms::public_verify(&run.params, &run.sc, NOW), || {
            format!("trial {trial} (n={n}, l={l}): public_verify rejected")
        })?;
        let got = idmpms::unsigncrypt(&run.params, &run.sc, &run.receiver, NOW)
            .map_err(|e| format!("trial {trial} (n={n}, l={l}): {e}"))?;
        ensure(got == m, || format!("trial {trial}: wrong plaintext"))?;
    }
    Ok(format!("100/100 production configs in {:.1}s", start.elapsed().as_secs_f64()))
}

fn identities_hold<B: PairingBackend>(be: B, trials: u64, salt: u64) -> Result<(), String> {
    let mut rng = ChaCha20Rng::seed_from_u64(salt);
    for trial in 0..trials {
        let (n, l) = (rng.gen_range(1..=8), rng.gen_range(1..=8));
        let mut m = vec![0u8; rng.gen_range(0..512)];
        rng.fill(&mut m[..]);
        let run = honest(be.clone(), n, l, &m, rng.gen());
        let k1 = run.bcasts.iter().fold(be.gt_identity(), |acc, b| acc * b.k1j.clone());
        let k2 = run.bcasts.iter().fold(be.gt_identity(), |acc, b| acc * b.k2j.clone());
        ensure(idmpms::recompute_k1(&run.params, &run.sc) == k1, || {
            format!("{:?} trial {trial}: recomputed k1 differs", be.kind())
        })?;
        ensure(idmpms::recover_k2_preimage(&run.params, &run.sc, &run.receiver) == k2, || {
            format!("{:?} trial {trial}: recomputed k2 pre-image differs", be.kind())
        })?;
    }
    Ok(())
}

fn verifiability_identities() -> Outcome {
    identities_hold(MockBackend::wide(), 100, 2)?;
    identities_hold(Bls12Backend::new(), 20, 3)?;
    Ok("k1 and k2 pre-image identities hold in 100 mock and 20 production runs".into())
}

// Desk walkthrough over Z_23. The identity strings hash (big-endian value
// mod 23) to Q_A = {3, 4}, Q_P = {6, 9}, Q_C = 8.
const DESK_Q: u64 = 23;
const DESK_A: [&str; 2] = ["alice18@desk.test", "bob48@desk.test"];
const DESK_P: [&str; 2] = ["carol6@desk.test", "dave4@desk.test"];
const DESK_C: &str = "erin14@desk.test";

fn bignum_mod(bytes: &[u8]) -> u64 {
    let r = BigUint::from_bytes_be(bytes) % BigUint::from(DESK_Q);
    r.to_u64_digits().first().copied().unwrap_or(0)
}

#[derive(Debug, PartialEq, Eq)]
struct Desk {
    s_a: u64,
    s_p: [u64; 2],
    k1: u64,
    k2_pre: u64,
    u_p: u64,
    s: u64,
    k1_check: u64,
    origin: (u64, u64),
    k2_check: u64,
}

/// The walkthrough in plain integer arithmetic. Pairings of `a` and `b` are `a * b`.
fn desk_oracle() -> Desk {
    let q = DESK_Q;
    let (s, qa, qp, qc, h, t, rp, l) = (5u64, [3u64, 4], [6u64, 9], 8u64, 2u64, [3u64, 4], 6u64, 2u64);
    let sub = |a: u64, b: u64| (a % q + q - b % q) % q;
    let s_a = (h * s * qa[0] + h * s * qa[1]) % q;
    let s_p = [(s_a + h * s * qp[0]) % q, (s_a + h * s * qp[1]) % q];
    let k1 = (s * t[0] + s * t[1]) % q;
    let k2_pre = (t[0] * s * qc + t[1] * s * qc) % q;
    let u_p = (sub(t[0] * s, rp * s_p[0]) + sub(t[1] * s, rp * s_p[1])) % q;
    let big_s = l * s_a % q;
    Desk {
        s_a,
        s_p,
        k1,
        k2_pre,
        u_p,
        s: big_s,
        k1_check: (u_p + big_s * rp + s * (qp[0] + qp[1]) % q * h % q * rp) % q,
        origin: (s * (qa[0] + qa[1]) % q * (l * h) % q, big_s),
        k2_check: (u_p * qc + big_s * qc % q * rp + h * (qp[0] + qp[1]) % q * (s * qc % q) % q * rp) % q,
    }
}

fn desk_example() -> Outcome {
    let expected = Desk {
        s_a: 1,
        s_p: [15, 22],
        k1: 12,
        k2_pre: 4,
        u_p: 20,
        s: 2,
        k1_check: 12,
        origin: (2, 2),
        k2_check: 4,
    };
    let oracle = desk_oracle();
    ensure(oracle == expected, || format!("oracle disagrees with the walkthrough: {oracle:?}"))?;
    for (name, want) in [(DESK_A[0], 3), (DESK_A[1], 4), (DESK_P[0], 6), (DESK_P[1], 9), (DESK_C, 8)] {
        ensure(bignum_mod(name.as_bytes()) == want, || format!("{name} does not hash to {want}"))?;
    }

    let be = MockBackend::desk();
    let e = |v: u64| be.elem(v);
    let pkg = idmpms::Pkg::from_master_secret(be, e(5)).map_err(|x| x.to_string())?;
    let params = pkg.params();
    let originals: Vec<_> = DESK_A.iter().map(|s| id(s)).collect();
    let proxies: Vec<_> = DESK_P.iter().map(|s| id(s)).collect();
    // First serial whose warrant hashes to h_w = 2.
    let w = (0u64..)
        .map(|i| {
            let mut serial = [0u8; SERIAL_LEN];
            serial[..8].copy_from_slice(&i.to_be_bytes());
            Warrant::new(originals.clone(), proxies.clone(), b"desk".to_vec(), 0, 10_000, serial).unwrap()
        })
        .find(|w| bignum_mod(&w.encode()) == 2)
        .unwrap();
    ensure(pairmps::warrant::warrant_scalar(&be, &w) == e(2), || "h_w != 2".into())?;

    let shares: Vec<_> = originals
        .iter()
        .map(|a| idmpms::delegation_share(params, &pkg.extract(a), &w, NOW).unwrap())
        .collect();
    let s_a = idmpms::aggregate_delegation(params, &shares, &w, NOW).map_err(|x| x.to_string())?;
    let keys: Vec<_> = proxies
        .iter()
        .map(|p| idmpms::derive_proxy_key(params, &pkg.extract(p), &s_a, &w).unwrap())
        .collect();
    let receiver = pkg.extract(&id(DESK_C));
    let t: Vec<_> = [3, 4].iter().map(|v| Round1Secret::new(&be, e(*v)).unwrap()).collect();
    let bcasts: Vec<_> = keys
        .iter()
        .zip(&t)
        .map(|(k, t)| idmpms::round1_with_secret(params, &k.proxy_id, receiver.id(), t))
        .collect();
    let session = idmpms::derive_session_keys(params, &bcasts, &w).map_err(|x| x.to_string())?;
    // First message whose commitment is r_p = 6.
    let (m, c, r_p) = (0u32..)
        .map(|i| {
            let m = format!("desk message {i}").into_bytes();
            let (c, r_p) = idmpms::encrypt_and_commit(params, &m, &session);
            (m, c, r_p)
        })
        .find(|x| x.2 == e(6))
        .unwrap();
    let parts: Vec<_> = keys.iter().zip(&t).map(|(k, t)| idmpms::partial_sign(params, k, t, &r_p)).collect();
    let sc = idmpms::combine(params, &parts, &bcasts, &s_a, &w, c, r_p, NOW).map_err(|x| x.to_string())?;

    let q_a = be.hash_to_g2(pairmps::tags::IDENTITY, DESK_A[0].as_bytes())
        + be.hash_to_g2(pairmps::tags::IDENTITY, DESK_A[1].as_bytes());
    let origin_lhs = be.gt_exp(&be.pair(params.p_pub_g1(), &q_a), &e(2 * 2)); // e(P_pub, sum Q_A)^(l h_w)
    let origin_rhs = be.pair(&sc.s, &be.g2_generator());
    let got = Desk {
        s_a: s_a.value(),
        s_p: [keys[0].s_pj.value(), keys[1].s_pj.value()],
        k1: gt_value(&session.k1),
        k2_pre: gt_value(&session.k2_preimage),
        u_p: sc.u_p.value(),
        s: sc.s.value(),
        k1_check: gt_value(&idmpms::recompute_k1(params, &sc)),
        origin: (gt_value(&origin_lhs), gt_value(&origin_rhs)),
        k2_check: gt_value(&idmpms::recover_k2_preimage(params, &sc, &receiver)),
    };
    ensure(got == oracle, || format!("implementation gives {got:?}"))?;
    ensure(idmpms::public_verify(params, &sc, NOW), || "public_verify rejected".into())?;
    let plain = idmpms::unsigncrypt(params, &sc, &receiver, NOW).map_err(|x| x.to_string())?;
    ensure(plain == m, || "wrong plaintext".into())?;
    Ok("oracle and implementation agree: S_A=1 S_p={15,22} k1=12 k2pre=4 u_p=20 S=2, both checks balance".into())
}

fn gt_value(x: &<MockBackend as PairingBackend>::Gt) -> u64 {
    let be = MockBackend::desk();
    let bytes = be.encode_gt(x);
    bytes.iter().fold(0, |acc, b| (acc << 8) | u64::from(*b))
}

fn tamper_suite() -> Outcome {
    let be = Bls12Backend::new();
    let mut rng = ChaCha20Rng::seed_from_u64(0x7a3);
    let (mut total, mut by_verify) = (0, 0);
    for trial in 0..20 {
        let (n, l) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
        let mut m = vec![0u8; rng.gen_range(1..=512)];
        rng.fill(&mut m[..]);
        let run = honest(be, n, l, &m, rng.gen());
        let sc = &run.sc;
        let nonzero = |rng: &mut ChaCha20Rng| be.random_scalar(rng);
        let mut c = sc.c.clone();
        let bit = rng.gen_range(0..c.len() * 8);
        c[bit / 8] ^= 1 << (bit % 8);
        let w = &sc.warrant;
        let mut serial = *w.serial();
        let bit = rng.gen_range(0..SERIAL_LEN * 8);
        serial[bit / 8] ^= 1 << (bit % 8);
        let w2 = Warrant::new(
            w.original_ids().to_vec(),
            w.proxy_ids().to_vec(),
            w.scope().to_vec(),
            w.valid_from(),
            w.valid_to(),
            serial,
        )
        .unwrap();
        let variants = [
            ("S", Signcryption { s: sc.s + be.g1_mul(&be.g1_generator(), &nonzero(&mut rng)), ..sc.clone() }),
            ("c", Signcryption { c, ..sc.clone() }),
            ("r_p", Signcryption { r_p: sc.r_p + nonzero(&mut rng), ..sc.clone() }),
            ("u_p", Signcryption { u_p: sc.u_p + be.g1_mul(&be.g1_generator(), &nonzero(&mut rng)), ..sc.clone() }),
            ("warrant", Signcryption { warrant: w2, ..sc.clone() }),
        ];
        for (field, v) in variants {
            // Through the wire form, as a receiver would see it.
            let v = Signcryption::decode(&be, &v.encode(&be)).map_err(|e| e.to_string())?;
            let verified = idmpms::public_verify(&run.params, &v, NOW);
            let decrypted = idmpms::unsigncrypt(&run.params, &v, &run.receiver, NOW).is_ok();
            ensure(!verified || !decrypted, || format!("trial {trial}: perturbed {field} accepted"))?;
            total += 1;
            by_verify += usize::from(!verified);
        }
    }
    Ok(format!("{total}/100 perturbations rejected ({by_verify} by public_verify)"))
}

fn adversary_matrix() -> Outcome {
    let seeds: Vec<u64> = (0..5).collect();
    let sizes = [1, 2, 4, 8];
    let mut notes = Vec::new();
    let start = Instant::now();
    for scheme in Scheme::ALL {
        for (name, summary) in [
            ("desk", session::run_matrix(&MockBackend::desk(), scheme, &seeds, &sizes)),
            ("production", session::run_matrix(&Bls12Backend::new(), scheme, &seeds, &sizes)),
        ] {
            if !summary.all_passed() {
                return Err(format!("{scheme} on {name}:\n{}", summary.to_table()));
            }
            let runs: usize = summary.rows.values().map(|r| r.runs).sum();
            notes.push(format!("{scheme}/{name} {runs}"));
        }
    }
    Ok(format!(
        "all behaviors detected and attributed [{}] in {:.0}s",
        notes.join(", "),
        start.elapsed().as_secs_f64()
    ))
}

fn public_verifiability() -> Outcome {
    type B = Bls12Backend;
    // Interface shape: the public check takes parameters and the signcryption only;
    // the baseline's only check is unsigncryption, which takes the receiver's key pair.
    let _: fn(&PublicParams<B>, &Signcryption<B>, u64) -> bool = idmpms::public_verify::<B>;
    let _: fn(&B, &LxSigncryption<B>, &LxUserKey<B>, &[LxPublicKey<B>], u64) -> Result<Vec<u8>, LxError> =
        liuxiao::lx_unsigncrypt::<B>;

    // In memory, from public bytes alone.
    let be = Bls12Backend::new();
    let (params_bytes, sc_bytes) = {
        let run = honest(be, 3, 2, b"public check", 5);
        (run.params.encode(), run.sc.encode(&be))
    };
    let params = PublicParams::decode(Bls12Backend::new(), &params_bytes).map_err(|e| e.to_string())?;
    let sc = Signcryption::decode(&be, &sc_bytes).map_err(|e| e.to_string())?;
    ensure(idmpms::public_verify(&params, &sc, NOW), || "decoded public data did not verify".into())?;

    // In a separate process with no keystore and no passphrase.
    let f = Flow::new("idmpms", "production");
    let (_, sc_file) = f.session(2, 2, 21, b"verify me");
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_pairmps"))
        .current_dir(f.dir.path())
        .env_remove("PAIRMPS_PASSPHRASE")
        .args(["--params", "ks/params.env", "--now", &session::DEFAULT_NOW.to_string()])
        .args(["verify", "--sc", sc_file])
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("verify without a keystore failed: {}", String::from_utf8_lossy(&out.stderr))
    })?;

    // The baseline: nothing verifies without x_c, and a wrong x_c fails.
    let lx = Flow::new("liuxiao", "production");
    let (t, lx_sc) = lx.session(2, 2, 21, b"verify me");
    ensure(lx.fails(&["verify", "--sc", lx_sc]).0 == 4, || "liuxiao verify did not refuse".into())?;
    let bytes = pairmps::envelope::dearmor_kind(
        &std::fs::read_to_string(lx.path(lx_sc)).unwrap(),
        pairmps::envelope::Kind::Lxsc,
    )
    .map_err(|e| e.to_string())?;
    let lx_sc = LxSigncryption::decode(&be, &bytes).map_err(|e| e.to_string())?;
    let proxies: Vec<_> = t.proxies.iter().map(|p| session::lx_key(&be, 21, p).public().clone()).collect();
    let real = session::lx_key(&be, 21, &t.receiver);
    let plain = liuxiao::lx_unsigncrypt(&be, &lx_sc, &real, &proxies, session::DEFAULT_NOW).map_err(|e| e.to_string())?;
    ensure(plain == b"verify me", || "baseline receiver could not open".into())?;
    let impostor = LxUserKey::generate(&be, t.receiver.clone(), &mut ChaCha20Rng::seed_from_u64(1));
    ensure(
        liuxiao::lx_unsigncrypt(&be, &lx_sc, &impostor, &proxies, session::DEFAULT_NOW).is_err(),
        || "baseline accepted without the receiver's secret".into(),
    )?;
    Ok("idmpms verifies from public bytes in a keyless process; liuxiao needs x_c".into())
}

fn operation_counts() -> Outcome {
    let mut checked = 0;
    let mock = MockBackend::wide();
    let production = Bls12Backend::new();
    for scheme in Scheme::ALL {
        for phase in Phase::ALL {
            let analytic = bench::analytic(scheme, phase);
            for n in [1, 2, 4, 8] {
                for l in [1, 2, 4, 8] {
                    let measured = bench::count_phase(&mock, scheme, phase, n, l).map(|r| r.counts);
                    ensure(measured == analytic, || {
                        format!("{scheme} {phase} n={n} l={l}: measured {measured:?}, analytic {analytic:?}")
                    })?;
                    checked += 1;
                }
            }
            for (n, l) in [(1, 1), (3, 2)] {
                let measured = bench::count_phase(&production, scheme, phase, n, l).map(|r| r.counts);
                ensure(measured == analytic, || {
                    format!("production {scheme} {phase} n={n} l={l}: measured {measured:?}, analytic {analytic:?}")
                })?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (scheme, phase, n, l) cells match exactly"))
}

fn cli_equivalence() -> Outcome {
    let be = Bls12Backend::new();
    let mut lines = Vec::new();
    for (scheme, name) in [(Scheme::Idmpms, "idmpms"), (Scheme::Liuxiao, "liuxiao")] {
        let f = Flow::new(name, "production");
        let (_, sc) = f.session(2, 2, 7, DEFAULT_MESSAGE);
        let cli = std::fs::read_to_string(f.path(sc)).map_err(|e| e.to_string())?;
        let harness = session::run_session(&be, &SessionConfig::new(scheme, 2, 2, 7))
            .map_err(|e| e.to_string())?
            .signcryption_envelope()
            .ok_or("harness produced no signcryption")?;
        ensure(cli == harness, || format!("{name}: CLI and harness envelopes differ"))?;
        lines.push(format!("{name} {} bytes", cli.len()));
    }
    Ok(format!("seed 7 envelopes byte-identical ({})", lines.join(", ")))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("honest correctness", honest_correctness),
        ("verifiability identities", verifiability_identities),
        ("desk example oracle", desk_example),
        ("tamper suite", tamper_suite),
        ("adversary matrix", adversary_matrix),
        ("public verifiability contrast", public_verifiability),
        ("operation counts", operation_counts),
        ("cli equivalence", cli_equivalence),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("[PASS] {} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {} {name}: {detail}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
