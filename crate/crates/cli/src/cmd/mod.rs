pub mod idmpms;
pub mod lx;

use std::path::{Path, PathBuf};

use rand::{Rng, RngCore};

use pairmps::backend::PairingBackend;
use pairmps::codec::{Reader, Writer};
use pairmps::envelope::Kind;
use pairmps::seeds;
use pairmps::warrant::{Identity, Warrant};

use crate::error::{CliError, Result};
use crate::files;
use crate::keystore::KeyStore;

pub const PARAMS_FILE: &str = "params.env";

/// Flags shared by every command.
#[derive(Debug, Clone)]
pub struct Ctx<B> {
    pub be: B,
    pub keystore: Option<PathBuf>,
    pub params: Option<PathBuf>,
    pub warrant: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub now: u64,
}

impl<B: PairingBackend> Ctx<B> {
    pub fn keystore(&self) -> Result<KeyStore> {
        let dir = self
            .keystore
            .as_deref()
            .ok_or_else(|| CliError::missing("--keystore is required"))?;
        KeyStore::open_from_env(dir)
    }

    pub fn params_path(&self) -> Result<PathBuf> {
        match (&self.params, &self.keystore) {
            (Some(p), _) => Ok(p.clone()),
            (None, Some(ks)) => Ok(ks.join(PARAMS_FILE)),
            (None, None) => Err(CliError::missing("--params or --keystore is required")),
        }
    }

    pub fn warrant(&self) -> Result<Warrant> {
        let path = self
            .warrant
            .as_deref()
            .ok_or_else(|| CliError::missing("--warrant is required"))?;
        files::read_warrant(path)
    }

    /// Seeded per-role stream when `--seed` is given, system entropy otherwise.
    pub fn rng(&self, role: &str, who: &[u8]) -> Box<dyn RngCore> {
        match self.seed {
            Some(seed) => Box::new(seeds::role_rng(seed, role, who)),
            None => Box::new(rand::rngs::OsRng),
        }
    }

    pub fn emit(&self, kind: Kind, payload: &[u8]) -> Result<()> {
        files::emit_envelope(self.out.as_deref(), kind, payload)
    }
}

pub fn identity(s: &str) -> Result<Identity> {
    Identity::new(s).map_err(CliError::from)
}

pub struct WarrantArgs {
    pub originals: Vec<String>,
    pub proxies: Vec<String>,
    pub scope: String,
    pub valid_from: u64,
    pub valid_to: u64,
}

pub fn warrant<B: PairingBackend>(ctx: &Ctx<B>, args: &WarrantArgs) -> Result<()> {
    let ids = |v: &[String]| v.iter().map(|s| identity(s)).collect::<Result<Vec<_>>>();
    let serial = ctx.rng(seeds::WARRANT_SERIAL, b"").gen();
    let w = Warrant::new(
        ids(&args.originals)?,
        ids(&args.proxies)?,
        args.scope.as_bytes().to_vec(),
        args.valid_from,
        args.valid_to,
        serial,
    )?;
    ctx.emit(Kind::Warrant, &w.encode())
}

/// Public half of a proxy key: `(proxy, S_A, warrant digest)`.
pub fn encode_proxy_key<B: PairingBackend>(be: &B, proxy_id: &Identity, s_a: &B::G1, digest: &[u8; 32]) -> Vec<u8> {
    let mut w = Writer::new();
    w.field(proxy_id.as_bytes()).field(&be.encode_g1(s_a)).field(digest);
    w.finish()
}

/// Returns the `S_A` carried by a proxy key file.
pub fn read_proxy_key<B: PairingBackend>(be: &B, path: &Path, w: &Warrant) -> Result<B::G1> {
    let bytes = files::read_envelope(path, Kind::ProxyKey)?;
    let mut r = Reader::new(&bytes);
    Identity::new(r.utf8("proxy")?)?;
    let s_a = be.decode_g1(r.field()?)?;
    let warrant_digest = r.fixed::<32>("warrant digest")?;
    r.finish()?;
    check_digest(&warrant_digest, w, path)?;
    Ok(s_a)
}

/// The proxies' common output after round 1: `(warrant digest, c, r_p)`.
pub fn encode_commit<B: PairingBackend>(be: &B, digest: &[u8; 32], c: &[u8], r_p: &B::Scalar) -> Vec<u8> {
    let mut w = Writer::new();
    w.field(digest).field(c).field(&be.encode_scalar(r_p));
    w.finish()
}

pub fn read_commit<B: PairingBackend>(be: &B, path: &Path, w: &Warrant) -> Result<(Vec<u8>, B::Scalar)> {
    let bytes = files::read_envelope(path, Kind::Commit)?;
    let mut r = Reader::new(&bytes);
    let digest = r.fixed::<32>("warrant digest")?;
    let c = r.field()?.to_vec();
    let r_p = be.decode_scalar(r.field()?)?;
    r.finish()?;
    check_digest(&digest, w, path)?;
    Ok((c, r_p))
}

pub fn check_digest(digest: &[u8; 32], w: &Warrant, path: &Path) -> Result<()> {
    if *digest != w.digest() {
        return Err(CliError::malformed(format!("{}: made for a different warrant", path.display())));
    }
    Ok(())
}

pub fn read_all<T>(paths: &[PathBuf], kind: Kind, decode: impl Fn(&[u8]) -> Result<T>) -> Result<Vec<T>> {
    paths
        .iter()
        .map(|p| {
            let bytes = files::read_envelope(p, kind)?;
            decode(&bytes).map_err(|e| e.context(p.display()))
        })
        .collect()
}

/// Writes raw output bytes, or prints them.
pub fn emit_raw(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => files::write_atomic(path, bytes),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(bytes)
                .map_err(|e| CliError::malformed(e.to_string()))
        }
    }
}
