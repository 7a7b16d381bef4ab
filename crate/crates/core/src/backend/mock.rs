//! Transparent `Z_q` model of a bilinear group.
//!
//! `G1 = G2 = (Z_q, +)` with generator `1`, `Gt = (Z_q, +)` written
//! multiplicatively, and `e(a, b) = a * b mod q`. Every protocol value is a
//! small integer, so whole protocol runs can be checked by hand. Discrete logs
//! are trivial here: this backend has no security whatsoever.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rand::{Rng, RngCore};

use super::{check_len, BackendError, BackendKind, GroupDescriptor, PairingBackend};

const ENCODED_LEN: usize = 8;

/// Residue modulo a prime. Carries its modulus so operators need no context.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModQ {
    value: u64,
    modulus: u64,
}

impl ModQ {
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    fn new(value: u128, modulus: u64) -> Self {
        ModQ {
            value: (value % modulus as u128) as u64,
            modulus,
        }
    }

    fn same_modulus(&self, other: &Self) {
        assert_eq!(self.modulus, other.modulus, "mixed mock moduli");
    }
}

impl fmt::Debug for ModQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.modulus)
    }
}

impl Add for ModQ {
    type Output = ModQ;
    fn add(self, rhs: ModQ) -> ModQ {
        self.same_modulus(&rhs);
        ModQ::new(self.value as u128 + rhs.value as u128, self.modulus)
    }
}

impl Sub for ModQ {
    type Output = ModQ;
    fn sub(self, rhs: ModQ) -> ModQ {
        self + (-rhs)
    }
}

impl Neg for ModQ {
    type Output = ModQ;
    fn neg(self) -> ModQ {
        ModQ::new((self.modulus - self.value) as u128, self.modulus)
    }
}

impl Mul for ModQ {
    type Output = ModQ;
    fn mul(self, rhs: ModQ) -> ModQ {
        self.same_modulus(&rhs);
        ModQ::new(self.value as u128 * rhs.value as u128, self.modulus)
    }
}

/// Mock target-group element. The group law is addition mod q.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct MockGt(pub ModQ);

impl fmt::Debug for MockGt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gt({:?})", self.0)
    }
}

impl Mul for MockGt {
    type Output = MockGt;
    fn mul(self, rhs: MockGt) -> MockGt {
        MockGt(self.0 + rhs.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MockBackend {
    modulus: u64,
}

/// Modulus used by the hand-worked examples.
pub const DESK_MODULUS: u64 = 23;

/// Mersenne prime `2^61 - 1`, large enough that random collisions are negligible.
pub const WIDE_MODULUS: u64 = (1 << 61) - 1;

impl MockBackend {
    /// Builds the insecure mock group of prime order `modulus`.
    ///
    /// Only for tests and demonstrations.
    pub fn insecure_for_testing(modulus: u64) -> Result<Self, BackendError> {
        if !(3..1 << 63).contains(&modulus) || !is_prime(modulus) {
            return Err(BackendError::InvalidModulus(modulus));
        }
        Ok(MockBackend { modulus })
    }

    pub fn desk() -> Self {
        MockBackend {
            modulus: DESK_MODULUS,
        }
    }

    pub fn wide() -> Self {
        MockBackend {
            modulus: WIDE_MODULUS,
        }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn elem(&self, v: u64) -> ModQ {
        ModQ::new(v as u128, self.modulus)
    }

    pub fn gt(&self, v: u64) -> MockGt {
        MockGt(self.elem(v))
    }

    /// Big-endian integer value of `msg`, reduced mod q.
    fn reduce_be(&self, msg: &[u8]) -> ModQ {
        let q = self.modulus as u128;
        let v = msg.iter().fold(0u128, |acc, b| (acc * 256 + *b as u128) % q);
        ModQ::new(v, self.modulus)
    }

    fn decode(&self, what: &'static str, bytes: &[u8]) -> Result<ModQ, BackendError> {
        check_len(what, bytes, ENCODED_LEN)?;
        let v = u64::from_be_bytes(bytes.try_into().expect("length checked"));
        if v >= self.modulus {
            return Err(BackendError::malformed(what, format!("{v} is not reduced mod {}", self.modulus)));
        }
        Ok(self.elem(v))
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    // Deterministic Miller-Rabin for 64-bit inputs.
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let pow = |mut b: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mul(r, b);
            }
            b = mul(b, b);
            e >>= 1;
        }
        r
    };
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if a % n == 0 {
            continue;
        }
        let mut x = pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

impl PairingBackend for MockBackend {
    type Scalar = ModQ;
    type G1 = ModQ;
    type G2 = ModQ;
    type Gt = MockGt;

    fn kind(&self) -> BackendKind {
        BackendKind::Mock
    }

    fn descriptor(&self) -> GroupDescriptor {
        let order = self.modulus.to_be_bytes();
        let first = order.iter().position(|b| *b != 0).unwrap_or(order.len() - 1);
        GroupDescriptor {
            kind: BackendKind::Mock,
            order: order[first..].to_vec(),
            g1_generator: self.encode_g1(&self.g1_generator()),
            g2_generator: self.encode_g2(&self.g2_generator()),
        }
    }

    fn g1_generator(&self) -> ModQ {
        self.elem(1)
    }

    fn g2_generator(&self) -> ModQ {
        self.elem(1)
    }

    fn g1_identity(&self) -> ModQ {
        self.elem(0)
    }

    fn g2_identity(&self) -> ModQ {
        self.elem(0)
    }

    fn gt_identity(&self) -> MockGt {
        self.gt(0)
    }

    fn scalar_from_u64(&self, v: u64) -> ModQ {
        self.elem(v)
    }

    fn scalar_is_zero(&self, k: &ModQ) -> bool {
        k.value == 0
    }

    fn scalar_inverse(&self, k: &ModQ) -> Option<ModQ> {
        if k.value == 0 {
            return None;
        }
        // Fermat: k^(q-2)
        let mut result = self.elem(1);
        let mut base = *k;
        let mut e = self.modulus - 2;
        while e > 0 {
            if e & 1 == 1 {
                result = result * base;
            }
            base = base * base;
            e >>= 1;
        }
        Some(result)
    }

    fn g1_mul(&self, p: &ModQ, k: &ModQ) -> ModQ {
        *p * *k
    }

    fn g2_mul(&self, p: &ModQ, k: &ModQ) -> ModQ {
        *p * *k
    }

    fn pair(&self, a: &ModQ, b: &ModQ) -> MockGt {
        MockGt(*a * *b)
    }

    fn gt_exp(&self, x: &MockGt, k: &ModQ) -> MockGt {
        MockGt(x.0 * *k)
    }

    /// Ignores the tag: `(BE(msg) mod q) * P`.
    fn hash_to_g1(&self, _domain_tag: &[u8], msg: &[u8]) -> ModQ {
        self.reduce_be(msg)
    }

    fn hash_to_g2(&self, _domain_tag: &[u8], msg: &[u8]) -> ModQ {
        self.reduce_be(msg)
    }

    /// `BE(msg) mod q`, with 0 remapped to 1.
    fn hash_to_scalar(&self, _domain_tag: &[u8], msg: &[u8]) -> ModQ {
        let v = self.reduce_be(msg);
        if v.value == 0 {
            self.elem(1)
        } else {
            v
        }
    }

    fn random_scalar<R: RngCore + ?Sized>(&self, rng: &mut R) -> ModQ {
        self.elem(rng.gen_range(1..self.modulus))
    }

    fn scalar_len(&self) -> usize {
        ENCODED_LEN
    }

    fn g1_len(&self) -> usize {
        ENCODED_LEN
    }

    fn g2_len(&self) -> usize {
        ENCODED_LEN
    }

    fn gt_len(&self) -> usize {
        ENCODED_LEN
    }

    fn encode_scalar(&self, k: &ModQ) -> Vec<u8> {
        k.value.to_be_bytes().to_vec()
    }

    fn decode_scalar(&self, bytes: &[u8]) -> Result<ModQ, BackendError> {
        self.decode("scalar", bytes)
    }

    fn encode_g1(&self, p: &ModQ) -> Vec<u8> {
        p.value.to_be_bytes().to_vec()
    }

    fn decode_g1(&self, bytes: &[u8]) -> Result<ModQ, BackendError> {
        self.decode("G1", bytes)
    }

    fn encode_g2(&self, p: &ModQ) -> Vec<u8> {
        p.value.to_be_bytes().to_vec()
    }

    fn decode_g2(&self, bytes: &[u8]) -> Result<ModQ, BackendError> {
        self.decode("G2", bytes)
    }

    fn encode_gt(&self, x: &MockGt) -> Vec<u8> {
        x.0.value.to_be_bytes().to_vec()
    }

    fn decode_gt(&self, bytes: &[u8]) -> Result<MockGt, BackendError> {
        self.decode("Gt", bytes).map(MockGt)
    }
}
