//! Deterministic authenticated encryption keyed by a pairing-derived secret.
//!
//! Every proxy encrypts the same message under the same session secret and must
//! arrive at the same ciphertext, so key and nonce are both expanded from the
//! secret with HKDF-SHA256 under distinct labels. The secret is fresh per
//! session, which keeps the fixed nonce single-use.

use chacha20poly1305::aead::{Aead, KeyInit};
use chacha20poly1305::{ChaCha20Poly1305, Key, Nonce};
use hkdf::Hkdf;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::backend::PairingBackend;

pub const KEY_MATERIAL_LEN: usize = 32;
const NONCE_LEN: usize = 12;

/// Identifier recorded in public parameters.
pub const CIPHER_SUITE: &str = "CHACHA20POLY1305-HKDF-SHA256";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("authenticated decryption failed")]
pub struct AuthenticationFailed;

/// Labels used to expand key material into an AEAD key and nonce.
#[derive(Debug, Clone, Copy)]
pub struct KdfLabels {
    pub enc_key: &'static [u8],
    pub nonce: &'static [u8],
}

/// Symmetric key material (`k_2` in the protocol).
#[derive(Clone, PartialEq, Eq)]
pub struct KeyMaterial(pub [u8; KEY_MATERIAL_LEN]);

impl std::fmt::Debug for KeyMaterial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("KeyMaterial(..)")
    }
}

/// Hashes a target-group element to key material: `SHA-256(tag || encode_gt(x))`.
pub fn hash_gt<B: PairingBackend>(backend: &B, tag: &[u8], x: &B::Gt) -> KeyMaterial {
    let mut h = Sha256::new();
    h.update(tag);
    h.update(backend.encode_gt(x));
    KeyMaterial(h.finalize().into())
}

fn expand(key: &KeyMaterial, labels: &KdfLabels) -> (ChaCha20Poly1305, [u8; NONCE_LEN]) {
    let hk = Hkdf::<Sha256>::new(None, &key.0);
    let mut enc_key = [0u8; 32];
    let mut nonce = [0u8; NONCE_LEN];
    hk.expand(labels.enc_key, &mut enc_key)
        .expect("32 bytes is a valid HKDF-SHA256 output length");
    hk.expand(labels.nonce, &mut nonce)
        .expect("12 bytes is a valid HKDF-SHA256 output length");
    (ChaCha20Poly1305::new(Key::from_slice(&enc_key)), nonce)
}

pub fn seal(key: &KeyMaterial, labels: &KdfLabels, plaintext: &[u8]) -> Vec<u8> {
    let (cipher, nonce) = expand(key, labels);
    cipher
        .encrypt(Nonce::from_slice(&nonce), plaintext)
        .expect("ChaCha20-Poly1305 encryption is infallible for in-memory buffers")
}

pub fn open(key: &KeyMaterial, labels: &KdfLabels, ciphertext: &[u8]) -> Result<Vec<u8>, AuthenticationFailed> {
    let (cipher, nonce) = expand(key, labels);
    cipher
        .decrypt(Nonce::from_slice(&nonce), ciphertext)
        .map_err(|_| AuthenticationFailed)
}

#[cfg(test)]
mod tests {
    use super::*;

    const LABELS: KdfLabels = KdfLabels {
        enc_key: b"test/enc-key",
        nonce: b"test/nonce",
    };

    #[test]
    fn deterministic_round_trip() {
        let key = KeyMaterial([7; 32]);
        let c1 = seal(&key, &LABELS, b"hello");
        let c2 = seal(&key, &LABELS, b"hello");
        assert_eq!(c1, c2);
        assert_eq!(c1.len(), 5 + 16);
        assert_eq!(open(&key, &LABELS, &c1).unwrap(), b"hello");
    }

    #[test]
    fn every_bit_flip_is_rejected() {
        let key = KeyMaterial([9; 32]);
        let c = seal(&key, &LABELS, b"abc");
        for i in 0..c.len() * 8 {
            let mut t = c.clone();
            t[i / 8] ^= 1 << (i % 8);
            assert_eq!(open(&key, &LABELS, &t), Err(AuthenticationFailed));
        }
    }

    #[test]
    fn wrong_key_or_labels_rejected() {
        let c = seal(&KeyMaterial([1; 32]), &LABELS, b"abc");
        assert!(open(&KeyMaterial([2; 32]), &LABELS, &c).is_err());
        let other = KdfLabels {
            enc_key: b"other",
            nonce: LABELS.nonce,
        };
        assert!(open(&KeyMaterial([1; 32]), &other, &c).is_err());
    }
}
