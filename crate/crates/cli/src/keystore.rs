//! Passphrase-encrypted key records, one file per record.
//!
//! A record is keyed by `(kind, identity, scope)`, where the scope is a
//! warrant digest for per-warrant secrets. The secret part is sealed with
//! ChaCha20-Poly1305 under a PBKDF2-HMAC-SHA256 key; everything else in the
//! record is bound as associated data.

use std::path::{Path, PathBuf};

use chacha20poly1305::aead::{Aead, KeyInit, Payload};
use chacha20poly1305::{ChaCha20Poly1305, Key, Nonce};
use rand::RngCore;
use sha2::Sha256;

use pairmps::codec::{Reader, Writer};
use pairmps::warrant::Identity;

use crate::error::{CliError, Result};
use crate::files;

const HEADER: &str = "PAIRMPS-KEYSTORE-V1";
const PBKDF2_ROUNDS: u32 = 100_000;
const SALT_LEN: usize = 16;

pub const PASSPHRASE_ENV: &str = "PAIRMPS_PASSPHRASE";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordKind {
    /// PKG master secret.
    Master,
    /// Identity key `S_ID`.
    Identity,
    /// Baseline key pair secret `x`.
    LxKey,
    /// Proxy signing key `S_pj` for one warrant.
    Proxy,
    /// Round-1 nonce `t_j` for one warrant, deleted once used.
    Nonce,
}

impl RecordKind {
    fn as_str(self) -> &'static str {
        match self {
            RecordKind::Master => "master",
            RecordKind::Identity => "identity",
            RecordKind::LxKey => "lxkey",
            RecordKind::Proxy => "proxy",
            RecordKind::Nonce => "nonce",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub params_digest: [u8; 32],
    pub public: Vec<u8>,
    pub secret: Vec<u8>,
}

#[derive(Debug)]
pub struct KeyStore {
    dir: PathBuf,
    passphrase: Vec<u8>,
}

impl KeyStore {
    pub fn open(dir: &Path, passphrase: &[u8]) -> Result<Self> {
        if passphrase.is_empty() {
            return Err(CliError::missing("empty keystore passphrase"));
        }
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(KeyStore {
            dir: dir.to_path_buf(),
            passphrase: passphrase.to_vec(),
        })
    }

    /// Unlocks with the passphrase from `PAIRMPS_PASSPHRASE`.
    pub fn open_from_env(dir: &Path) -> Result<Self> {
        let pass = std::env::var(PASSPHRASE_ENV)
            .map_err(|_| CliError::missing(format!("set {PASSPHRASE_ENV} to unlock the keystore")))?;
        Self::open(dir, pass.as_bytes())
    }

    fn path(&self, kind: RecordKind, id: &Identity, scope: &[u8]) -> PathBuf {
        let mut name = format!("{}-{}", kind.as_str(), hex::encode(id.as_bytes()));
        if !scope.is_empty() {
            name.push('-');
            name.push_str(&hex::encode(&scope[..scope.len().min(8)]));
        }
        name.push_str(".rec");
        self.dir.join(name)
    }

    fn key(&self, salt: &[u8]) -> ChaCha20Poly1305 {
        let mut key = [0u8; 32];
        pbkdf2::pbkdf2_hmac::<Sha256>(&self.passphrase, salt, PBKDF2_ROUNDS, &mut key);
        ChaCha20Poly1305::new(Key::from_slice(&key))
    }

    fn metadata(kind: RecordKind, id: &Identity, scope: &[u8], params_digest: &[u8; 32], public: &[u8]) -> Writer {
        let mut w = Writer::with_header(HEADER);
        w.field(kind.as_str().as_bytes())
            .field(id.as_bytes())
            .field(scope)
            .field(params_digest)
            .field(public);
        w
    }

    pub fn put(&self, kind: RecordKind, id: &Identity, scope: &[u8], record: &Record) -> Result<()> {
        let mut salt = [0u8; SALT_LEN];
        let mut nonce = [0u8; 12];
        rand::rngs::OsRng.fill_bytes(&mut salt);
        rand::rngs::OsRng.fill_bytes(&mut nonce);
        let meta = Self::metadata(kind, id, scope, &record.params_digest, &record.public);
        let aad = meta.clone().finish();
        let sealed = self
            .key(&salt)
            .encrypt(
                Nonce::from_slice(&nonce),
                Payload {
                    msg: &record.secret,
                    aad: &aad,
                },
            )
            .expect("in-memory encryption cannot fail");
        let mut w = meta;
        w.field(&salt).field(&nonce).field(&sealed);
        files::write_atomic(&self.path(kind, id, scope), &w.finish())
    }

    pub fn get(&self, kind: RecordKind, id: &Identity, scope: &[u8]) -> Result<Record> {
        let path = self.path(kind, id, scope);
        let bytes = std::fs::read(&path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => CliError::missing(format!("no {} record for {id} in the keystore", kind.as_str())),
            _ => CliError::io(&path, e),
        })?;
        let bad = |e: pairmps::codec::CodecError| CliError::malformed(format!("{}: {e}", path.display()));
        let mut r = Reader::with_header(&bytes, HEADER).map_err(bad)?;
        let stored_kind = r.field().map_err(bad)?;
        let stored_id = r.field().map_err(bad)?;
        let stored_scope = r.field().map_err(bad)?;
        let params_digest = r.fixed::<32>("params digest").map_err(bad)?;
        let public = r.field().map_err(bad)?.to_vec();
        let salt = r.field().map_err(bad)?;
        let nonce = r.fixed::<12>("nonce").map_err(bad)?;
        let sealed = r.field().map_err(bad)?;
        r.finish().map_err(bad)?;
        if stored_kind != kind.as_str().as_bytes() || stored_id != id.as_bytes() || stored_scope != scope {
            return Err(CliError::malformed(format!("{}: record does not match its name", path.display())));
        }
        let aad = Self::metadata(kind, id, scope, &params_digest, &public).finish();
        let secret = self
            .key(salt)
            .decrypt(Nonce::from_slice(&nonce), Payload { msg: sealed, aad: &aad })
            .map_err(|_| CliError::missing(format!("cannot unlock the {} record for {id}: wrong passphrase?", kind.as_str())))?;
        Ok(Record {
            params_digest,
            public,
            secret,
        })
    }

    pub fn remove(&self, kind: RecordKind, id: &Identity, scope: &[u8]) -> Result<()> {
        let path = self.path(kind, id, scope);
        std::fs::remove_file(&path).map_err(|e| CliError::io(&path, e))
    }
}
