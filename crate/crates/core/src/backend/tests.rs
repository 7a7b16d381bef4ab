use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::*;

const LARGE_MOCK_Q: u64 = (1 << 61) - 1;

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn bilinearity<B: PairingBackend>(be: &B, trials: usize) {
    let mut rng = rng(1);
    let p1 = be.g1_generator();
    let p2 = be.g2_generator();
    let base = be.pair(&p1, &p2);
    for _ in 0..trials {
        let a = be.random_scalar(&mut rng);
        let b = be.random_scalar(&mut rng);
        let lhs = be.pair(&be.g1_mul(&p1, &a), &be.g2_mul(&p2, &b));
        assert_eq!(lhs, be.gt_exp(&base, &(a * b)));
    }
}

fn pairing_identities<B: PairingBackend>(be: &B) {
    let p1 = be.g1_generator();
    let p2 = be.g2_generator();
    let base = be.pair(&p1, &p2);
    assert!(be.is_non_degenerate());
    let zero = be.scalar_from_u64(0);
    let q = be.hash_to_g2(b"T", b"any point");
    assert_eq!(be.pair(&be.g1_mul(&p1, &zero), &q), be.gt_identity());
    let two = be.scalar_from_u64(2);
    let three = be.scalar_from_u64(3);
    assert_eq!(
        be.pair(&be.g1_mul(&p1, &two), &be.g2_mul(&p2, &three)),
        be.gt_exp(&base, &be.scalar_from_u64(6))
    );
    assert_eq!(be.gt_exp(&base, &zero), be.gt_identity());
    assert_eq!(be.gt_exp(&base, &be.scalar_from_u64(1)), base);
    assert_eq!(base.clone() * be.gt_identity(), base);
}

fn hashing<B: PairingBackend>(be: &B) {
    assert_eq!(be.hash_to_g1(b"T", b"m"), be.hash_to_g1(b"T", b"m"));
    assert_eq!(be.hash_to_g2(b"T", b"m"), be.hash_to_g2(b"T", b"m"));
    assert_eq!(be.hash_to_scalar(b"T", b"m"), be.hash_to_scalar(b"T", b"m"));
    // Totality on the empty message.
    let h = be.hash_to_g1(b"T", b"");
    assert_eq!(be.decode_g1(&be.encode_g1(&h)).unwrap(), h);

    let mut rng = rng(2);
    for _ in 0..1000 {
        let mut msg = vec![0u8; (rng.next_u32() % 64) as usize];
        rng.fill_bytes(&mut msg);
        assert!(!be.scalar_is_zero(&be.hash_to_scalar(b"T", &msg)));
    }
}

fn sampling<B: PairingBackend>(be: &B, draws: usize) {
    let mut a = rng(3);
    let mut b = rng(3);
    for _ in 0..draws {
        let x = be.random_scalar(&mut a);
        assert!(!be.scalar_is_zero(&x));
        assert_eq!(x, be.random_scalar(&mut b));
    }
}

fn encodings<B: PairingBackend>(be: &B) {
    let mut rng = rng(4);
    let k = be.random_scalar(&mut rng);
    let p1 = be.g1_mul(&be.g1_generator(), &k);
    let p2 = be.g2_mul(&be.g2_generator(), &k);
    let gt = be.pair(&p1, &p2);

    assert_eq!(be.decode_scalar(&be.encode_scalar(&k)).unwrap(), k);
    assert_eq!(be.decode_g1(&be.encode_g1(&be.g1_generator())).unwrap(), be.g1_generator());
    assert_eq!(be.decode_g1(&be.encode_g1(&p1)).unwrap(), p1);
    assert_eq!(be.decode_g2(&be.encode_g2(&p2)).unwrap(), p2);
    assert_eq!(be.decode_gt(&be.encode_gt(&gt)).unwrap(), gt);

    assert_eq!(be.encode_g1(&p1).len(), be.g1_len());
    assert_eq!(be.encode_g2(&p2).len(), be.g2_len());
    assert_eq!(be.encode_gt(&gt).len(), be.gt_len());
    assert_eq!(be.encode_scalar(&k).len(), be.scalar_len());

    for len in [0, be.g1_len() - 1, be.g1_len() + 1] {
        let zeros = vec![0u8; len];
        assert!(matches!(be.decode_g1(&zeros), Err(BackendError::MalformedEncoding { .. })));
    }
    assert!(be.decode_gt(&vec![0u8; be.gt_len() + 1]).is_err());
    assert!(be.decode_g2(&[]).is_err());
    assert!(be.decode_scalar(&vec![0xff; be.scalar_len()]).is_err());
}

fn inverses<B: PairingBackend>(be: &B) {
    let mut rng = rng(5);
    for _ in 0..20 {
        let k = be.random_scalar(&mut rng);
        let inv = be.scalar_inverse(&k).unwrap();
        assert_eq!(k * inv, be.scalar_from_u64(1));
    }
    assert!(be.scalar_inverse(&be.scalar_from_u64(0)).is_none());
}

fn full_suite<B: PairingBackend>(be: &B, sample_draws: usize) {
    bilinearity(be, 200);
    pairing_identities(be);
    hashing(be);
    sampling(be, sample_draws);
    encodings(be);
    inverses(be);
}

#[test]
fn mock_desk_backend_passes_suite() {
    full_suite(&MockBackend::desk(), 10_000);
}

#[test]
fn mock_large_backend_passes_suite() {
    full_suite(&MockBackend::insecure_for_testing(LARGE_MOCK_Q).unwrap(), 10_000);
}

#[test]
fn production_backend_passes_suite() {
    full_suite(&Bls12Backend, 10_000);
}

#[test]
fn descriptors() {
    let d = MockBackend::desk().descriptor();
    assert_eq!(d.kind, BackendKind::Mock);
    assert_eq!(d.order, vec![23]);
    let d = Bls12Backend.descriptor();
    assert_eq!(d.kind, BackendKind::Production);
    assert_eq!(d.order.len(), 32);
    assert_eq!(d.g1_generator.len(), 48);
}
