//! Delegation warrants.
//!
//! A warrant names the original signers and the proxy group, describes the
//! delegated scope and carries a validity window and a serial number. Its
//! canonical encoding is hashed to the warrant scalar `h_w` that binds every
//! delegation share and proxy key to this specific warrant.

use std::collections::HashSet;
use std::fmt;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::backend::PairingBackend;
use crate::codec::{CodecError, Reader, Writer};
use crate::tags;

pub const MAX_IDENTITY_LEN: usize = 256;
pub const SERIAL_LEN: usize = 16;
pub const ARMOR_HEADER: &str = "PAIRMPS-WARRANT-V1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WarrantError {
    #[error("invalid identity: {0}")]
    InvalidIdentity(String),
    #[error("invalid warrant: {0}")]
    InvalidWarrant(String),
    #[error("malformed warrant encoding: {0}")]
    Malformed(#[from] CodecError),
}

/// A participant identity, e.g. an email address. Compared byte-for-byte.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Identity(String);

impl Identity {
    pub fn new(id: impl Into<String>) -> Result<Self, WarrantError> {
        let id = id.into();
        if id.is_empty() {
            return Err(WarrantError::InvalidIdentity("empty identity".into()));
        }
        if id.len() > MAX_IDENTITY_LEN {
            return Err(WarrantError::InvalidIdentity(format!(
                "{} bytes exceeds the {MAX_IDENTITY_LEN}-byte limit",
                id.len()
            )));
        }
        Ok(Identity(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn as_bytes(&self) -> &[u8] {
        self.0.as_bytes()
    }
}

impl fmt::Debug for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::str::FromStr for Identity {
    type Err = WarrantError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Identity::new(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Warrant {
    original_ids: Vec<Identity>,
    proxy_ids: Vec<Identity>,
    scope: Vec<u8>,
    valid_from: u64,
    valid_to: u64,
    serial: [u8; SERIAL_LEN],
}

fn check_group(name: &str, ids: &[Identity]) -> Result<(), WarrantError> {
    if ids.is_empty() {
        return Err(WarrantError::InvalidWarrant(format!("{name} group is empty")));
    }
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(WarrantError::InvalidWarrant(format!("duplicate {name} identity {id}")));
        }
    }
    Ok(())
}

impl Warrant {
    pub fn new(
        original_ids: Vec<Identity>,
        proxy_ids: Vec<Identity>,
        scope: Vec<u8>,
        valid_from: u64,
        valid_to: u64,
        serial: [u8; SERIAL_LEN],
    ) -> Result<Self, WarrantError> {
        check_group("original", &original_ids)?;
        check_group("proxy", &proxy_ids)?;
        if valid_from >= valid_to {
            return Err(WarrantError::InvalidWarrant(format!(
                "empty validity window [{valid_from}, {valid_to})"
            )));
        }
        Ok(Warrant {
            original_ids,
            proxy_ids,
            scope,
            valid_from,
            valid_to,
            serial,
        })
    }

    pub fn original_ids(&self) -> &[Identity] {
        &self.original_ids
    }

    pub fn proxy_ids(&self) -> &[Identity] {
        &self.proxy_ids
    }

    pub fn scope(&self) -> &[u8] {
        &self.scope
    }

    pub fn valid_from(&self) -> u64 {
        self.valid_from
    }

    pub fn valid_to(&self) -> u64 {
        self.valid_to
    }

    pub fn serial(&self) -> &[u8; SERIAL_LEN] {
        &self.serial
    }

    pub fn original_index(&self, id: &Identity) -> Option<usize> {
        self.original_ids.iter().position(|x| x == id)
    }

    pub fn proxy_index(&self, id: &Identity) -> Option<usize> {
        self.proxy_ids.iter().position(|x| x == id)
    }

    /// Canonical encoding; fields in declaration order, each length-prefixed.
    pub fn encode(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.count(self.original_ids.len());
        for id in &self.original_ids {
            w.field(id.as_bytes());
        }
        w.count(self.proxy_ids.len());
        for id in &self.proxy_ids {
            w.field(id.as_bytes());
        }
        w.field(&self.scope)
            .u64_field(self.valid_from)
            .u64_field(self.valid_to)
            .field(&self.serial);
        w.finish()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, WarrantError> {
        let mut r = Reader::new(bytes);
        let read_ids =|r: &mut Reader<'_>| -> Result<Vec<Identity>, WarrantError> {
            let n = r.count()?;
            let mut ids = Vec::with_capacity(n.min(1024));
            for _ in 0..n {
                ids.push(Identity::new(r.utf8("identity")?)?);
            }
            Ok(ids)
        };
        let original_ids = read_ids(&mut r)?;
        let proxy_ids = read_ids(&mut r)?;
        let scope = r.field()?.to_vec();
        let valid_from = r.u64_field("valid_from")?;
        let valid_to = r.u64_field("valid_to")?;
        let serial = r.fixed::<SERIAL_LEN>("serial")?;
        r.finish()?;
        Warrant::new(original_ids, proxy_ids, scope, valid_from, valid_to, serial)
    }

    /// SHA-256 of the canonical encoding.
    pub fn digest(&self) -> [u8; 32] {
        Sha256::digest(self.encode()).into()
    }

    /// `valid_from <= now < valid_to`.
    pub fn check_validity(&self, now: u64) -> bool {
        self.valid_from <= now && now < self.valid_to
    }

    /// Text form: a header line followed by the hex encoding.
    pub fn to_armored(&self) -> String {
        format!("{ARMOR_HEADER}\n{}\n", hex::encode(self.encode()))
    }

    pub fn from_armored(text: &str) -> Result<Self, WarrantError> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(ARMOR_HEADER) {
            return Err(CodecError::BadHeader {
                expected: ARMOR_HEADER.into(),
            }
            .into());
        }
        let body: String = lines.flat_map(|l| l.split_whitespace()).collect();
        let bytes = hex::decode(body).map_err(|e| CodecError::InvalidField {
            field: "hex body",
            reason: e.to_string(),
        })?;
        Warrant::decode(&bytes)
    }
}

/// The warrant scalar `h_w = H(tag_WAR, encode(w))`, never zero.
pub fn warrant_scalar<B: PairingBackend>(backend: &B, w: &Warrant) -> B::Scalar {
    backend.hash_to_scalar(tags::WARRANT, &w.encode())
}

/// Indexes per-participant contributions by sender, rejecting strangers and repeats.
pub(crate) fn index_by_sender<'a, T, E>(
    items: &'a [T],
    sender: impl Fn(&T) -> &Identity,
    members: &[Identity],
    stranger: impl Fn(Identity) -> E,
    duplicate: impl Fn(Identity) -> E,
) -> Result<std::collections::HashMap<&'a Identity, &'a T>, E> {
    let mut map = std::collections::HashMap::with_capacity(items.len());
    for item in items {
        let id = sender(item);
        if !members.contains(id) {
            return Err(stranger(id.clone()));
        }
        if map.insert(id, item).is_some() {
            return Err(duplicate(id.clone()));
        }
    }
    Ok(map)
}
