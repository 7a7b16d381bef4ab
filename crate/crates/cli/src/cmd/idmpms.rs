use std::path::{Path, PathBuf};

use pairmps::backend::PairingBackend;
use pairmps::codec::{Reader, Writer};
use pairmps::envelope::Kind;
use pairmps::idmpms::{self, DelegationShare, PartialSigncryption, ProxyKey, PublicParams, Round1Broadcast, Round1Secret, Signcryption, UserKey};
use pairmps::seeds;
use pairmps::warrant::{Identity, Warrant};

use super::{check_digest, emit_raw, encode_commit, encode_proxy_key, identity, read_all, read_commit, read_proxy_key, Ctx};
use crate::error::{CliError, Result};
use crate::files;
use crate::keystore::{KeyStore, Record, RecordKind};

const PKG_ID: &str = "pkg";

pub fn load_params<B: PairingBackend>(ctx: &Ctx<B>) -> Result<PublicParams<B>> {
    let path = ctx.params_path()?;
    let bytes = files::read_envelope(&path, Kind::Params)?;
    PublicParams::decode(ctx.be.clone(), &bytes).map_err(|e| CliError::from(e).context(path.display()))
}

fn load_key<B: PairingBackend>(ks: &KeyStore, params: &PublicParams<B>, id: &Identity) -> Result<UserKey<B>> {
    let be = params.backend();
    let rec = ks.get(RecordKind::Identity, id, &[])?;
    if rec.params_digest != params.digest() {
        return Err(CliError::malformed(format!("the key for {id} was extracted under other parameters")));
    }
    let mut r = Reader::new(&rec.secret);
    let s_sig = be.decode_g1(r.field()?)?;
    let s_recv = be.decode_g2(r.field()?)?;
    r.finish()?;
    Ok(UserKey::from_parts(params, id.clone(), s_sig, s_recv)?)
}

pub fn setup<B: PairingBackend>(ctx: &Ctx<B>) -> Result<()> {
    let ks = ctx.keystore()?;
    let pkg = idmpms::setup(ctx.be.clone(), &mut ctx.rng(seeds::SETUP, b""));
    let params = pkg.params();
    let encoded = params.encode();
    ks.put(
        RecordKind::Master,
        &identity(PKG_ID)?,
        &[],
        &Record {
            params_digest: params.digest(),
            public: encoded.clone(),
            secret: ctx.be.encode_scalar(pkg.master_secret()),
        },
    )?;
    let path = ctx.params_path()?;
    files::emit_envelope(Some(&path), Kind::Params, &encoded)?;
    if ctx.out.is_some() {
        ctx.emit(Kind::Params, &encoded)?;
    }
    eprintln!("public parameters written to {}", path.display());
    Ok(())
}

pub fn extract<B: PairingBackend>(ctx: &Ctx<B>, id: &str) -> Result<()> {
    let ks = ctx.keystore()?;
    let params = load_params(ctx)?;
    let master = ks.get(RecordKind::Master, &identity(PKG_ID)?, &[])?;
    let s = ctx.be.decode_scalar(&master.secret)?;
    let pkg = idmpms::Pkg::from_master_secret(ctx.be.clone(), s)?;
    if pkg.params().digest() != params.digest() {
        return Err(CliError::malformed("the master key does not belong to these parameters"));
    }
    let id = identity(id)?;
    let key = pkg.extract(&id);
    let mut secret = Writer::new();
    secret.field(&ctx.be.encode_g1(key.s_sig())).field(&ctx.be.encode_g2(key.s_recv()));
    ks.put(
        RecordKind::Identity,
        &id,
        &[],
        &Record {
            params_digest: params.digest(),
            public: Vec::new(),
            secret: secret.finish(),
        },
    )?;
    eprintln!("extracted the key for {id}");
    Ok(())
}

pub fn delegate<B: PairingBackend>(ctx: &Ctx<B>, id: &str) -> Result<()> {
    let ks = ctx.keystore()?;
    let params = load_params(ctx)?;
    let w = ctx.warrant()?;
    let key = load_key(&ks, &params, &identity(id)?)?;
    let share = idmpms::delegation_share(&params, &key, &w, ctx.now)?;
    ctx.emit(Kind::Dshare, &share.encode(&ctx.be))
}

fn read_shares<B: PairingBackend>(be: &B, paths: &[PathBuf]) -> Result<Vec<DelegationShare<B>>> {
    read_all(paths, Kind::Dshare, |b| Ok(DelegationShare::decode(be, b)?))
}

pub fn verify_delegation<B: PairingBackend>(ctx: &Ctx<B>, shares: &[PathBuf]) -> Result<()> {
    let params = load_params(ctx)?;
    let w = ctx.warrant()?;
    for share in read_shares(&ctx.be, shares)? {
        if !idmpms::verify_delegation_share(&params, &share, &w, ctx.now)? {
            return Err(CliError::verify(format!("delegation share from {} is invalid", share.signer_id)));
        }
        println!("ok {}", share.signer_id);
    }
    Ok(())
}

pub fn proxy_key<B: PairingBackend>(ctx: &Ctx<B>, id: &str, shares: &[PathBuf]) -> Result<()> {
    let ks = ctx.keystore()?;
    let params = load_params(ctx)?;
    let w = ctx.warrant()?;
    let shares = read_shares(&ctx.be, shares)?;
    let s_a = idmpms::aggregate_delegation(&params, &shares, &w, ctx.now)?;
    let key = load_key(&ks, &params, &identity(id)?)?;
    let pk = idmpms::derive_proxy_key(&params, &key, &s_a, &w)?;
    ks.put(
        RecordKind::Proxy,
        &pk.proxy_id,
        &pk.warrant_digest,
        &Record {
            params_digest: params.digest(),
            public: ctx.be.encode_g1(&pk.s_a),
            secret: ctx.be.encode_g1(&pk.s_pj),
        },
    )?;
    ctx.emit(
        Kind::ProxyKey,
        &encode_proxy_key(&ctx.be, &pk.proxy_id, &pk.s_a, &pk.warrant_digest),
    )
}

/// Refuses to overwrite a live nonce: reusing `t_j` under two commitments leaks `S_pj`.
pub fn store_nonce(ks: &KeyStore, id: &Identity, w: &Warrant, params_digest: [u8; 32], t: Vec<u8>) -> Result<()> {
    if ks.get(RecordKind::Nonce, id, &w.digest()).is_ok() {
        return Err(CliError::malformed(format!(
            "{id} already holds an unused round-1 nonce for this warrant"
        )));
    }
    ks.put(
        RecordKind::Nonce,
        id,
        &w.digest(),
        &Record {
            params_digest,
            public: Vec::new(),
            secret: t,
        },
    )
}

pub fn round1<B: PairingBackend>(ctx: &Ctx<B>, id: &str, receiver: &str) -> Result<()> {
    let ks = ctx.keystore()?;
    let params = load_params(ctx)?;
    let w = ctx.warrant()?;
    let id = identity(id)?;
    if w.proxy_index(&id).is_none() {
        return Err(CliError::malformed(format!("{id} is not a proxy in the warrant")));
    }
    ks.get(RecordKind::Proxy, &id, &w.digest())?;
    let t = ctx.be.random_scalar(&mut ctx.rng(seeds::ROUND1, id.as_bytes()));
    let secret = Round1Secret::new(&ctx.be, t.clone())?;
    let bcast = idmpms::round1_with_secret(&params, &id, &identity(receiver)?, &secret);
    store_nonce(&ks, &id, &w, params.digest(), ctx.be.encode_scalar(&t))?;
    ctx.emit(Kind::R1, &bcast.encode(&ctx.be))
}

fn read_broadcasts<B: PairingBackend>(be: &B, paths: &[PathBuf]) -> Result<Vec<Round1Broadcast<B>>> {
    read_all(paths, Kind::R1, |b| Ok(Round1Broadcast::decode(be, b)?))
}

pub fn commit<B: PairingBackend>(ctx: &Ctx<B>, r1: &[PathBuf], message: &Path) -> Result<()> {
    let params = load_params(ctx)?;
    let w = ctx.warrant()?;
    let m = files::read(message)?;
    let keys = idmpms::derive_session_keys(&params, &read_broadcasts(&ctx.be, r1)?, &w)?;
    let (c, r_p) = idmpms::encrypt_and_commit(&params, &m, &keys);
    ctx.emit(Kind::Commit, &encode_commit(&ctx.be, &w.digest(), &c, &r_p))
}

pub fn partial<B: PairingBackend>(ctx: &Ctx<B>, id: &str, commit: &Path) -> Result<()> {
    let ks = ctx.keystore()?;
    let params = load_params(ctx)?;
    let w = ctx.warrant()?;
    let id = identity(id)?;
    let (_, r_p) = read_commit(&ctx.be, commit, &w)?;
    let rec = ks.get(RecordKind::Proxy, &id, &w.digest())?;
    let pk = ProxyKey {
        proxy_id: id.clone(),
        s_a: ctx.be.decode_g1(&rec.public)?,
        s_pj: ctx.be.decode_g1(&rec.secret)?,
        warrant_digest: w.digest(),
    };
    let nonce = ks.get(RecordKind::Nonce, &id, &w.digest())?;
    let t = Round1Secret::new(&ctx.be, ctx.be.decode_scalar(&nonce.secret)?)?;
    let part = idmpms::partial_sign(&params, &pk, &t, &r_p);
    ctx.emit(Kind::Partial, &part.encode(&ctx.be))?;
    ks.remove(RecordKind::Nonce, &id, &w.digest())
}

pub fn combine<B: PairingBackend>(
    ctx: &Ctx<B>,
    proxy_key: &Path,
    r1: &[PathBuf],
    partials: &[PathBuf],
    commit: &Path,
) -> Result<()> {
    let params = load_params(ctx)?;
    let w = ctx.warrant()?;
    let s_a = read_proxy_key(&ctx.be, proxy_key, &w)?;
    let (c, r_p) = read_commit(&ctx.be, commit, &w)?;
    let bcasts = read_broadcasts(&ctx.be, r1)?;
    let parts = read_all(partials, Kind::Partial, |b| Ok(PartialSigncryption::decode(&ctx.be, b)?))?;
    let sc = idmpms::combine(&params, &parts, &bcasts, &s_a, &w, c, r_p, ctx.now)?;
    ctx.emit(Kind::Sc, &sc.encode(&ctx.be))
}

pub fn read_sc<B: PairingBackend>(be: &B, path: &Path) -> Result<Signcryption<B>> {
    let bytes = files::read_envelope(path, Kind::Sc)?;
    Signcryption::decode(be, &bytes).map_err(|e| CliError::from(e).context(path.display()))
}

pub fn verify<B: PairingBackend>(ctx: &Ctx<B>, sc: &Path) -> Result<()> {
    let params = load_params(ctx)?;
    let sc = read_sc(&ctx.be, sc)?;
    if !idmpms::public_verify(&params, &sc, ctx.now) {
        return Err(CliError::verify("signcryption failed public verification"));
    }
    println!("valid");
    Ok(())
}

pub fn unsigncrypt<B: PairingBackend>(ctx: &Ctx<B>, id: &str, sc: &Path) -> Result<()> {
    let ks = ctx.keystore()?;
    let params = load_params(ctx)?;
    let sc = read_sc(&ctx.be, sc)?;
    if let Some(w) = ctx.warrant.as_deref() {
        check_digest(&sc.warrant.digest(), &ctx.warrant()?, w)?;
    }
    let key = load_key(&ks, &params, &identity(id)?)?;
    let m = idmpms::unsigncrypt(&params, &sc, &key, ctx.now)?;
    emit_raw(ctx.out.as_deref(), &m)
}
