//! BLS12-381 backend built on arkworks.
//!
//! Signature side is G1 (48-byte compressed points), key side is G2 (96-byte
//! compressed points), `Gt` is the order-q subgroup of `Fq12` (576 bytes).

use std::fmt;
use std::ops::Mul;

use ark_bls12_381::{g1, g2, Bls12_381, Fq12, Fr, G1Affine, G1Projective, G2Affine, G2Projective};
use ark_ec::hashing::curve_maps::wb::WBMap;
use ark_ec::hashing::map_to_curve_hasher::MapToCurveBasedHasher;
use ark_ec::hashing::HashToCurve;
use ark_ec::pairing::{Pairing, PairingOutput};
use ark_ec::{CurveGroup, PrimeGroup};
use ark_ff::field_hashers::{DefaultFieldHasher, HashToField};
use ark_ff::{BigInteger, Field, PrimeField, UniformRand, Zero};
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize};
use rand::RngCore;
use sha2::Sha256;

use super::{check_len, BackendError, BackendKind, GroupDescriptor, PairingBackend};

type G1Hasher = MapToCurveBasedHasher<G1Projective, DefaultFieldHasher<Sha256, 128>, WBMap<g1::Config>>;
type G2Hasher = MapToCurveBasedHasher<G2Projective, DefaultFieldHasher<Sha256, 128>, WBMap<g2::Config>>;

const SCALAR_LEN: usize = 32;
const G1_LEN: usize = 48;
const G2_LEN: usize = 96;
const GT_LEN: usize = 576;

/// Element of the BLS12-381 target group.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct Bls12Gt(pub PairingOutput<Bls12_381>);

impl fmt::Debug for Bls12Gt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut bytes = Vec::new();
        self.0
            .serialize_compressed(&mut bytes)
            .expect("serializing into a Vec cannot fail");
        write!(f, "Gt({}..)", hex::encode(&bytes[..8]))
    }
}

impl Mul for Bls12Gt {
    type Output = Bls12Gt;
    // arkworks writes the target group additively.
    fn mul(self, rhs: Bls12Gt) -> Bls12Gt {
        Bls12Gt(self.0 + rhs.0)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Bls12Backend;

impl Bls12Backend {
    pub fn new() -> Self {
        Bls12Backend
    }
}

fn serialize<T: CanonicalSerialize>(value: &T) -> Vec<u8> {
    let mut out = Vec::with_capacity(value.compressed_size());
    value
        .serialize_compressed(&mut out)
        .expect("serializing into a Vec cannot fail");
    out
}

impl PairingBackend for Bls12Backend {
    type Scalar = Fr;
    type G1 = G1Projective;
    type G2 = G2Projective;
    type Gt = Bls12Gt;

    fn kind(&self) -> BackendKind {
        BackendKind::Production
    }

    fn descriptor(&self) -> GroupDescriptor {
        GroupDescriptor {
            kind: BackendKind::Production,
            order: Fr::MODULUS.to_bytes_be(),
            g1_generator: self.encode_g1(&self.g1_generator()),
            g2_generator: self.encode_g2(&self.g2_generator()),
        }
    }

    fn g1_generator(&self) -> G1Projective {
        G1Projective::generator()
    }

    fn g2_generator(&self) -> G2Projective {
        G2Projective::generator()
    }

    fn g1_identity(&self) -> G1Projective {
        G1Projective::zero()
    }

    fn g2_identity(&self) -> G2Projective {
        G2Projective::zero()
    }

    fn gt_identity(&self) -> Bls12Gt {
        Bls12Gt(PairingOutput::zero())
    }

    fn scalar_from_u64(&self, v: u64) -> Fr {
        Fr::from(v)
    }

    fn scalar_is_zero(&self, k: &Fr) -> bool {
        k.is_zero()
    }

    fn scalar_inverse(&self, k: &Fr) -> Option<Fr> {
        k.inverse()
    }

    fn g1_mul(&self, p: &G1Projective, k: &Fr) -> G1Projective {
        *p * k
    }

    fn g2_mul(&self, p: &G2Projective, k: &Fr) -> G2Projective {
        *p * k
    }

    fn pair(&self, a: &G1Projective, b: &G2Projective) -> Bls12Gt {
        Bls12Gt(Bls12_381::pairing(*a, *b))
    }

    fn gt_exp(&self, x: &Bls12Gt, k: &Fr) -> Bls12Gt {
        Bls12Gt(x.0.mul_bigint(k.into_bigint()))
    }

    fn hash_to_g1(&self, domain_tag: &[u8], msg: &[u8]) -> G1Projective {
        let hasher = G1Hasher::new(domain_tag).expect("WB parameters for G1 are valid");
        hasher
            .hash(msg)
            .expect("hash to G1 is total for BLS12-381")
            .into()
    }

    fn hash_to_g2(&self, domain_tag: &[u8], msg: &[u8]) -> G2Projective {
        let hasher = G2Hasher::new(domain_tag).expect("WB parameters for G2 are valid");
        hasher
            .hash(msg)
            .expect("hash to G2 is total for BLS12-381")
            .into()
    }

    /// Hash-to-field over Fr; a zero output is resampled with a counter suffix.
    fn hash_to_scalar(&self, domain_tag: &[u8], msg: &[u8]) -> Fr {
        let hasher = <DefaultFieldHasher<Sha256, 128> as HashToField<Fr>>::new(domain_tag);
        let [out]: [Fr; 1] = hasher.hash_to_field::<1>(msg);
        if !out.is_zero() {
            return out;
        }
        let mut extended = msg.to_vec();
        for ctr in 0u8..=u8::MAX {
            extended.push(ctr);
            let [out]: [Fr; 1] = hasher.hash_to_field::<1>(&extended);
            if !out.is_zero() {
                return out;
            }
            extended.pop();
        }
        unreachable!("256 consecutive zero hash outputs")
    }

    fn random_scalar<R: RngCore + ?Sized>(&self, rng: &mut R) -> Fr {
        let mut rng = RngAdapter(rng);
        loop {
            let k = Fr::rand(&mut rng);
            if !k.is_zero() {
                return k;
            }
        }
    }

    fn scalar_len(&self) -> usize {
        SCALAR_LEN
    }

    fn g1_len(&self) -> usize {
        G1_LEN
    }

    fn g2_len(&self) -> usize {
        G2_LEN
    }

    fn gt_len(&self) -> usize {
        GT_LEN
    }

    fn encode_scalar(&self, k: &Fr) -> Vec<u8> {
        serialize(k)
    }

    fn decode_scalar(&self, bytes: &[u8]) -> Result<Fr, BackendError> {
        check_len("scalar", bytes, SCALAR_LEN)?;
        Fr::deserialize_compressed(bytes).map_err(|e| BackendError::malformed("scalar", e.to_string()))
    }

    fn encode_g1(&self, p: &G1Projective) -> Vec<u8> {
        serialize(&p.into_affine())
    }

    /// Checks curve membership and the order-q subgroup.
    fn decode_g1(&self, bytes: &[u8]) -> Result<G1Projective, BackendError> {
        check_len("G1", bytes, G1_LEN)?;
        G1Affine::deserialize_compressed(bytes)
            .map(Into::into)
            .map_err(|e| BackendError::malformed("G1", e.to_string()))
    }

    fn encode_g2(&self, p: &G2Projective) -> Vec<u8> {
        serialize(&p.into_affine())
    }

    fn decode_g2(&self, bytes: &[u8]) -> Result<G2Projective, BackendError> {
        check_len("G2", bytes, G2_LEN)?;
        G2Affine::deserialize_compressed(bytes)
            .map(Into::into)
            .map_err(|e| BackendError::malformed("G2", e.to_string()))
    }

    fn encode_gt(&self, x: &Bls12Gt) -> Vec<u8> {
        serialize(&x.0 .0)
    }

    fn decode_gt(&self, bytes: &[u8]) -> Result<Bls12Gt, BackendError> {
        check_len("Gt", bytes, GT_LEN)?;
        let f = Fq12::deserialize_compressed(bytes).map_err(|e| BackendError::malformed("Gt", e.to_string()))?;
        if f.is_zero() {
            return Err(BackendError::malformed("Gt", "zero is not a group element"));
        }
        let x = PairingOutput::<Bls12_381>(f);
        if !x.mul_bigint(Fr::MODULUS).is_zero() {
            return Err(BackendError::malformed("Gt", "not in the order-q subgroup"));
        }
        Ok(Bls12Gt(x))
    }
}

/// Bridges a possibly unsized `RngCore` to arkworks' sized rng bound.
struct RngAdapter<'a, R: RngCore + ?Sized>(&'a mut R);

impl<R: RngCore + ?Sized> RngCore for RngAdapter<'_, R> {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.0.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.0.try_fill_bytes(dest)
    }
}
