//! Per-role random streams derived from one 64-bit seed.
//!
//! The in-memory harness and the command-line tool draw every random value
//! from a stream keyed by `(seed, role, who)`, so the same seed yields the same
//! artifacts no matter how the protocol steps are split across processes.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use crate::codec::Writer;

const TAG: &[u8] = b"PAIRMPS/seed/v1";

pub const SETUP: &str = "setup";
pub const WARRANT_SERIAL: &str = "warrant-serial";
pub const ROUND1: &str = "round1";
pub const LX_KEY: &str = "lx-key";
pub const ADVERSARY: &str = "adversary";

pub fn role_rng(seed: u64, role: &str, who: &[u8]) -> ChaCha20Rng {
    let mut w = Writer::new();
    w.u64_field(seed).field(role.as_bytes()).field(who);
    let mut h = Sha256::new();
    h.update(TAG);
    h.update(w.finish());
    ChaCha20Rng::from_seed(h.finalize().into())
}
