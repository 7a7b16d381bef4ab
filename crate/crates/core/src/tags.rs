//! Domain-separation tags and KDF labels.

use crate::symmetric::KdfLabels;

pub const IDENTITY: &[u8] = b"PAIRMPS/ID/v1";
pub const WARRANT: &[u8] = b"PAIRMPS/WAR/v1";
pub const H3: &[u8] = b"PAIRMPS/H3/v1";
pub const K2: &[u8] = b"PAIRMPS/K2/v1";

pub const IDMPMS_KDF: KdfLabels = KdfLabels {
    enc_key: b"PAIRMPS/enc-key/v1",
    nonce: b"PAIRMPS/nonce/v1",
};

pub const LX_WARRANT: &[u8] = b"PAIRMPS/LX/WAR/v1";
pub const LX_H1: &[u8] = b"PAIRMPS/LX/H1/v1";
pub const LX_H3: &[u8] = b"PAIRMPS/LX/H3/v1";

pub const LX_KDF: KdfLabels = KdfLabels {
    enc_key: b"PAIRMPS/LX/enc-key/v1",
    nonce: b"PAIRMPS/LX/nonce/v1",
};
