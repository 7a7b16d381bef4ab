use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::*;
use crate::backend::{Bls12Backend, MockBackend};
use crate::warrant::SERIAL_LEN;

const NOW: u64 = 1_000;
const LARGE_Q: u64 = (1 << 61) - 1;

fn id(s: &str) -> Identity {
    Identity::new(s).unwrap()
}

struct Run<B: PairingBackend> {
    w: Warrant,
    originals: Vec<LxUserKey<B>>,
    proxies: Vec<LxUserKey<B>>,
    proxy_keys: Vec<LxProxyKey<B>>,
    receiver: LxUserKey<B>,
    secrets: Vec<LxRound1Secret<B>>,
    bcasts: Vec<LxRound1Broadcast<B>>,
    sc: LxSigncryption<B>,
}

impl<B: PairingBackend> Run<B> {
    fn proxy_publics(&self) -> Vec<LxPublicKey<B>> {
        self.proxies.iter().map(|k| k.public().clone()).collect()
    }
}

fn honest_run<B: PairingBackend>(be: &B, n: usize, l: usize, m: &[u8], seed: u64) -> Run<B> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let originals: Vec<_> = (0..n)
        .map(|i| LxUserKey::generate(be, id(&format!("orig{i}@example.org")), &mut rng))
        .collect();
    let proxies: Vec<_> = (0..l)
        .map(|j| LxUserKey::generate(be, id(&format!("proxy{j}@example.org")), &mut rng))
        .collect();
    let receiver = LxUserKey::generate(be, id("receiver@example.org"), &mut rng);
    let w = Warrant::new(
        originals.iter().map(|k| k.id().clone()).collect(),
        proxies.iter().map(|k| k.id().clone()).collect(),
        b"scope".to_vec(),
        0,
        10_000,
        rng.gen(),
    )
    .unwrap();
    let shares: Vec<_> = originals
        .iter()
        .map(|k| lx_delegation_share(be, k, &w, NOW).unwrap())
        .collect();
    let publics: Vec<_> = originals.iter().map(|k| k.public().clone()).collect();
    let s_a = lx_aggregate_delegation(be, &shares, &publics, &w, NOW).unwrap();
    let proxy_keys: Vec<_> = proxies
        .iter()
        .map(|k| lx_derive_proxy_key(be, k, &s_a, &w).unwrap())
        .collect();
    let (secrets, bcasts): (Vec<_>, Vec<_>) = proxy_keys
        .iter()
        .map(|p| lx_round1(be, p, receiver.public(), &mut rng))
        .unzip();
    let k = lx_session_key(be, &bcasts, &w).unwrap();
    let (c, r_p) = lx_encrypt_and_commit(be, m, &k);
    let parts: Vec<_> = proxy_keys
        .iter()
        .zip(&secrets)
        .map(|(p, t)| lx_partial_sign(be, p, t, &r_p))
        .collect();
    let sc = lx_combine(be, &parts, &s_a, &w, c, r_p).unwrap();
    Run {
        w,
        originals,
        proxies,
        proxy_keys,
        receiver,
        secrets,
        bcasts,
        sc,
    }
}

#[test]
fn desk_delegation_example() {
    // Find a warrant whose H2 lands on 3 in the order-23 mock group.
    let be = MockBackend::desk();
    let signer = LxUserKey::from_secret(&be, id("a1@desk.test"), be.elem(2)).unwrap();
    assert_eq!(signer.public().y, be.elem(2));
    let w = (0u64..)
        .map(|i| {
            let mut serial = [0u8; SERIAL_LEN];
            serial[..8].copy_from_slice(&i.to_be_bytes());
            Warrant::new(vec![signer.id().clone()], vec![id("p1@desk.test")], vec![], 0, 10_000, serial).unwrap()
        })
        .find(|w| BigUint::from_bytes_be(&w.encode()) % 23u32 == BigUint::from(3u32))
        .unwrap();
    assert_eq!(warrant_point(&be, &w), be.elem(3));
    let share = lx_delegation_share(&be, &signer, &w, NOW).unwrap();
    assert_eq!(share.s_ai, be.elem(6));
    assert_eq!(be.pair(&share.s_ai, &be.g2_generator()), be.gt(6));
    assert_eq!(be.pair(&warrant_point(&be, &w), &signer.public().y), be.gt(6));
    assert!(lx_verify_delegation_share(&be, &share, signer.public(), &w, NOW).unwrap());

    let bad = LxDelegationShare {
        s_ai: be.elem(7),
        ..share.clone()
    };
    assert!(!lx_verify_delegation_share(&be, &bad, signer.public(), &w, NOW).unwrap());
}

fn round_trips<B: PairingBackend>(be: &B, trials: u64) {
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    for trial in 0..trials {
        let n = rng.gen_range(1..=8);
        let l = rng.gen_range(1..=8);
        let mut m = vec![0u8; rng.gen_range(0..512)];
        rng.fill(&mut m[..]);
        let run = honest_run(be, n, l, &m, trial);
        let product = run.bcasts.iter().fold(be.gt_identity(), |acc, b| acc * b.r_pj.clone());
        assert_eq!(
            lx_recover_product(be, &run.sc, &run.receiver, &run.proxy_publics()).unwrap(),
            product
        );
        assert_eq!(
            lx_unsigncrypt(be, &run.sc, &run.receiver, &run.proxy_publics(), NOW).unwrap(),
            m
        );
    }
}

#[test]
fn round_trips_mock() {
    round_trips(&MockBackend::insecure_for_testing(LARGE_Q).unwrap(), 100);
    round_trips(&MockBackend::desk(), 100);
}

#[test]
fn round_trips_production() {
    round_trips(&Bls12Backend, 6);
}

#[test]
fn mock_closed_form_round1_product() {
    let be = MockBackend::insecure_for_testing(LARGE_Q).unwrap();
    for seed in 0..50 {
        let run = honest_run(&be, 3, 1 + (seed as usize % 8), b"x", seed);
        let t_sum = run.secrets.iter().fold(be.elem(0), |acc, t| acc + *t.scalar());
        let base = be.pair(&be.g1_generator(), &run.receiver.public().y);
        let product = run.bcasts.iter().fold(be.gt_identity(), |acc, b| acc * b.r_pj);
        assert_eq!(product, be.gt_exp(&base, &t_sum));
    }
}

#[test]
fn single_proxy_degenerate() {
    let be = MockBackend::insecure_for_testing(LARGE_Q).unwrap();
    let run = honest_run(&be, 2, 1, b"one", 1);
    let t = &run.secrets[0];
    let expected = be.g1_mul(&be.g1_generator(), t.scalar()) - be.g1_mul(&run.proxy_keys[0].s_pj, &run.sc.r_p);
    assert_eq!(run.sc.u_p, expected);
    assert_eq!(run.sc.s, run.proxy_keys[0].s_a);
}

#[test]
fn wrong_receiver_secret_fails() {
    let be = Bls12Backend;
    let run = honest_run(&be, 2, 2, b"secret", 2);
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    // Same identity, unrelated secret.
    let impostor = LxUserKey::generate(&be, run.receiver.id().clone(), &mut rng);
    let err = lx_unsigncrypt(&be, &run.sc, &impostor, &run.proxy_publics(), NOW).unwrap_err();
    assert!(matches!(err, LxError::VerifyFailed | LxError::DecryptFailed));
}

#[test]
fn tampering_is_caught_by_the_receiver() {
    let be = Bls12Backend;
    let run = honest_run(&be, 2, 2, b"tamper me", 4);
    let sc = &run.sc;
    let mut c = sc.c.clone();
    c[0] ^= 1;
    let variants = [
        LxSigncryption { s: sc.s + be.g1_generator(), ..sc.clone() },
        LxSigncryption { u_p: sc.u_p + be.g1_generator(), ..sc.clone() },
        LxSigncryption { r_p: sc.r_p + be.scalar_from_u64(1), ..sc.clone() },
        LxSigncryption { c, ..sc.clone() },
    ];
    for v in &variants {
        assert!(lx_unsigncrypt(&be, v, &run.receiver, &run.proxy_publics(), NOW).is_err());
    }
}

#[test]
fn errors() {
    let be = MockBackend::insecure_for_testing(LARGE_Q).unwrap();
    let run = honest_run(&be, 2, 3, b"m", 5);
    let outsider = LxUserKey::from_secret(&be, id("mallory@example.org"), be.elem(9)).unwrap();
    assert_eq!(
        lx_delegation_share(&be, &outsider, &run.w, NOW),
        Err(LxError::SignerNotInWarrant(outsider.id().clone()))
    );
    assert!(matches!(
        lx_derive_proxy_key(&be, &outsider, &run.sc.s, &run.w),
        Err(LxError::ProxyNotInWarrant(_))
    ));
    assert_eq!(
        lx_delegation_share(&be, &run.originals[0], &run.w, 10_000),
        Err(LxError::WarrantExpired { now: 10_000 })
    );
    assert_eq!(
        LxUserKey::from_secret(&be, id("z@example.org"), be.elem(0)),
        Err(LxError::ZeroScalar)
    );
    assert_eq!(
        lx_session_key(&be, &run.bcasts[..2], &run.w),
        Err(LxError::MissingBroadcast(run.w.proxy_ids()[2].clone()))
    );
    let parts: Vec<_> = run
        .proxy_keys
        .iter()
        .zip(&run.secrets)
        .map(|(p, t)| lx_partial_sign(&be, p, t, &run.sc.r_p))
        .collect();
    assert_eq!(
        lx_combine(&be, &parts[1..], &run.proxy_keys[0].s_a, &run.w, vec![], run.sc.r_p),
        Err(LxError::MissingPartial(run.w.proxy_ids()[0].clone()))
    );
    assert_eq!(
        lx_unsigncrypt(&be, &run.sc, &run.receiver, &run.proxy_publics()[1..], NOW),
        Err(LxError::MissingPublicKey(run.w.proxy_ids()[0].clone()))
    );
}

#[test]
fn convenience_round_matches_receiver() {
    let be = Bls12Backend;
    let run = honest_run(&be, 1, 3, b"", 6);
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    let sc = lx_signcrypt_round(&be, &run.proxy_keys, run.receiver.public(), &run.w, b"again", &mut rng).unwrap();
    assert_eq!(
        lx_unsigncrypt(&be, &sc, &run.receiver, &run.proxy_publics(), NOW).unwrap(),
        b"again"
    );
}

#[test]
fn wire_round_trip() {
    let be = Bls12Backend;
    let run = honest_run(&be, 2, 2, b"wire", 7);
    let bytes = run.sc.encode(&be);
    assert!(bytes.starts_with(LXSC_HEADER.as_bytes()));
    assert_eq!(LxSigncryption::decode(&be, &bytes).unwrap(), run.sc);
    assert_eq!(
        LxRound1Broadcast::decode(&be, &run.bcasts[0].encode(&be)).unwrap(),
        run.bcasts[0]
    );
    let pk = run.receiver.public();
    assert_eq!(&LxPublicKey::decode(&be, &pk.encode(&be)).unwrap(), pk);
    let share = lx_delegation_share(&be, &run.originals[0], &run.w, NOW).unwrap();
    assert_eq!(LxDelegationShare::decode(&be, &share.encode(&be)).unwrap(), share);
}
