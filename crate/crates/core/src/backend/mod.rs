//! Bilinear group abstraction.
//!
//! The protocols are written for a symmetric pairing `e: G x G -> Gt`. Real
//! pairing-friendly curves are asymmetric, so every protocol element is given a
//! fixed side:
//!
//! * the *signature side* ([`PairingBackend::G1`]) carries signer identity
//!   hashes and keys, delegation shares, proxy keys, partial signcryptions and
//!   the aggregate values `S` and `u_p`;
//! * the *key side* ([`PairingBackend::G2`]) carries receiver identity hashes
//!   and keys, and public keys of the baseline scheme.
//!
//! The generator `P` and the master public key `P_pub` exist on both sides with
//! the same discrete logarithm. Every pairing in the crate takes one element
//! from each side, which makes all verification equations hold exactly as they
//! do in the symmetric setting.
//!
//! Two implementations exist: [`Bls12Backend`] for real use and [`MockBackend`],
//! a transparent `Z_q` model that exists only for hand-checkable tests.

mod bls12;
mod mock;

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use rand::RngCore;
use thiserror::Error;

pub use bls12::Bls12Backend;
pub use mock::{MockBackend, ModQ};

/// Errors raised while decoding group elements or scalars.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BackendError {
    #[error("malformed {what} encoding: {reason}")]
    MalformedEncoding { what: &'static str, reason: String },
    #[error("mock modulus {0} is not a prime >= 3")]
    InvalidModulus(u64),
}

impl BackendError {
    pub(crate) fn malformed(what: &'static str, reason: impl Into<String>) -> Self {
        BackendError::MalformedEncoding {
            what,
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BackendKind {
    Production,
    Mock,
}

impl BackendKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BackendKind::Production => "production",
            BackendKind::Mock => "mock",
        }
    }
}

impl std::str::FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "production" => Ok(BackendKind::Production),
            "mock" => Ok(BackendKind::Mock),
            other => Err(format!("unknown backend {other:?}")),
        }
    }
}

/// Public description of a bilinear group instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupDescriptor {
    pub kind: BackendKind,
    /// Prime group order, big-endian without leading zeros.
    pub order: Vec<u8>,
    pub g1_generator: Vec<u8>,
    pub g2_generator: Vec<u8>,
}

/// A bilinear group `(G1, G2, Gt, e)` of prime order `q`.
///
/// Additions and negations go through the element types' operator impls.
/// Scalar multiplications, pairings and `Gt` exponentiations go through the
/// backend so that an instrumented wrapper can count them.
pub trait PairingBackend: Clone + Debug + Send + Sync + 'static {
    type Scalar: Clone
        + Debug
        + PartialEq
        + Eq
        + Send
        + Sync
        + Add<Output = Self::Scalar>
        + Sub<Output = Self::Scalar>
        + Mul<Output = Self::Scalar>
        + Neg<Output = Self::Scalar>;
    /// Signature side.
    type G1: Clone
        + Debug
        + PartialEq
        + Eq
        + Send
        + Sync
        + Add<Output = Self::G1>
        + Sub<Output = Self::G1>
        + Neg<Output = Self::G1>;
    /// Key side.
    type G2: Clone
        + Debug
        + PartialEq
        + Eq
        + Send
        + Sync
        + Add<Output = Self::G2>
        + Sub<Output = Self::G2>
        + Neg<Output = Self::G2>;
    /// Target group, written multiplicatively.
    type Gt: Clone + Debug + PartialEq + Eq + Send + Sync + Mul<Output = Self::Gt>;

    fn kind(&self) -> BackendKind;
    fn descriptor(&self) -> GroupDescriptor;

    fn g1_generator(&self) -> Self::G1;
    fn g2_generator(&self) -> Self::G2;
    fn g1_identity(&self) -> Self::G1;
    fn g2_identity(&self) -> Self::G2;
    fn gt_identity(&self) -> Self::Gt;

    fn scalar_from_u64(&self, v: u64) -> Self::Scalar;
    fn scalar_is_zero(&self, k: &Self::Scalar) -> bool;
    fn scalar_inverse(&self, k: &Self::Scalar) -> Option<Self::Scalar>;

    fn g1_mul(&self, p: &Self::G1, k: &Self::Scalar) -> Self::G1;
    fn g2_mul(&self, p: &Self::G2, k: &Self::Scalar) -> Self::G2;
    fn pair(&self, a: &Self::G1, b: &Self::G2) -> Self::Gt;
    fn gt_exp(&self, x: &Self::Gt, k: &Self::Scalar) -> Self::Gt;

    fn hash_to_g1(&self, domain_tag: &[u8], msg: &[u8]) -> Self::G1;
    fn hash_to_g2(&self, domain_tag: &[u8], msg: &[u8]) -> Self::G2;
    /// Hashes into `Z_q^*`; never returns zero.
    fn hash_to_scalar(&self, domain_tag: &[u8], msg: &[u8]) -> Self::Scalar;
    /// Uniform over `[1, q)`.
    fn random_scalar<R: RngCore + ?Sized>(&self, rng: &mut R) -> Self::Scalar;

    fn scalar_len(&self) -> usize;
    fn g1_len(&self) -> usize;
    fn g2_len(&self) -> usize;
    fn gt_len(&self) -> usize;

    fn encode_scalar(&self, k: &Self::Scalar) -> Vec<u8>;
    fn decode_scalar(&self, bytes: &[u8]) -> Result<Self::Scalar, BackendError>;
    fn encode_g1(&self, p: &Self::G1) -> Vec<u8>;
    fn decode_g1(&self, bytes: &[u8]) -> Result<Self::G1, BackendError>;
    fn encode_g2(&self, p: &Self::G2) -> Vec<u8>;
    fn decode_g2(&self, bytes: &[u8]) -> Result<Self::G2, BackendError>;
    fn encode_gt(&self, x: &Self::Gt) -> Vec<u8>;
    fn decode_gt(&self, bytes: &[u8]) -> Result<Self::Gt, BackendError>;

    /// `e(P, P) != 1`.
    fn is_non_degenerate(&self) -> bool {
        self.pair(&self.g1_generator(), &self.g2_generator()) != self.gt_identity()
    }
}

pub(crate) fn check_len(what: &'static str, bytes: &[u8], expected: usize) -> Result<(), BackendError> {
    if bytes.len() != expected {
        return Err(BackendError::malformed(
            what,
            format!("expected {expected} bytes, got {}", bytes.len()),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests;
