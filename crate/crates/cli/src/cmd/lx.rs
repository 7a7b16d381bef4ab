use std::path::{Path, PathBuf};

use pairmps::backend::PairingBackend;
use pairmps::envelope::Kind;
use pairmps::liuxiao::{self, LxDelegationShare, LxPartial, LxProxyKey, LxPublicKey, LxRound1Broadcast, LxRound1Secret, LxSigncryption, LxUserKey};
use pairmps::seeds;
use pairmps::warrant::Identity;

use super::idmpms::store_nonce;
use super::{check_digest, emit_raw, encode_commit, encode_proxy_key, identity, read_all, read_commit, read_proxy_key, Ctx};
use crate::error::{CliError, Result};
use crate::files;
use crate::keystore::{KeyStore, Record, RecordKind};

/// The baseline has no parameter file; records carry a zero digest.
const NO_PARAMS: [u8; 32] = [0; 32];

fn load_key<B: PairingBackend>(ks: &KeyStore, be: &B, id: &Identity) -> Result<LxUserKey<B>> {
    let rec = ks.get(RecordKind::LxKey, id, &[])?;
    let key = LxUserKey::from_secret(be, id.clone(), be.decode_scalar(&rec.secret)?)?;
    if key.public().encode(be) != rec.public {
        return Err(CliError::verify(format!("stored key pair for {id} is inconsistent")));
    }
    Ok(key)
}

fn read_pubkeys<B: PairingBackend>(be: &B, paths: &[PathBuf]) -> Result<Vec<LxPublicKey<B>>> {
    read_all(paths, Kind::Lxpub, |b| Ok(LxPublicKey::decode(be, b)?))
}

fn read_shares<B: PairingBackend>(be: &B, paths: &[PathBuf]) -> Result<Vec<LxDelegationShare<B>>> {
    read_all(paths, Kind::Dshare, |b| Ok(LxDelegationShare::decode(be, b)?))
}

pub fn setup() -> Result<()> {
    Err(CliError::malformed(
        "the liuxiao scheme has no key generation center; create key pairs with extract",
    ))
}

pub fn extract<B: PairingBackend>(ctx: &Ctx<B>, id: &str) -> Result<()> {
    let ks = ctx.keystore()?;
    let id = identity(id)?;
    let key = LxUserKey::generate(&ctx.be, id.clone(), &mut ctx.rng(seeds::LX_KEY, id.as_bytes()));
    let public = key.public().encode(&ctx.be);
    ks.put(
        RecordKind::LxKey,
        &id,
        &[],
        &Record {
            params_digest: NO_PARAMS,
            public: public.clone(),
            secret: ctx.be.encode_scalar(key.secret()),
        },
    )?;
    ctx.emit(Kind::Lxpub, &public)
}

pub fn delegate<B: PairingBackend>(ctx: &Ctx<B>, id: &str) -> Result<()> {
    let ks = ctx.keystore()?;
    let w = ctx.warrant()?;
    let key = load_key(&ks, &ctx.be, &identity(id)?)?;
    let share = liuxiao::lx_delegation_share(&ctx.be, &key, &w, ctx.now)?;
    ctx.emit(Kind::Dshare, &share.encode(&ctx.be))
}

pub fn verify_delegation<B: PairingBackend>(ctx: &Ctx<B>, shares: &[PathBuf], pubkeys: &[PathBuf]) -> Result<()> {
    let w = ctx.warrant()?;
    let pks = read_pubkeys(&ctx.be, pubkeys)?;
    for share in read_shares(&ctx.be, shares)? {
        let pk = pks
            .iter()
            .find(|pk| pk.id == share.signer_id)
            .ok_or_else(|| CliError::missing(format!("no public key given for {}", share.signer_id)))?;
        if !liuxiao::lx_verify_delegation_share(&ctx.be, &share, pk, &w, ctx.now)? {
            return Err(CliError::verify(format!("delegation share from {} is invalid", share.signer_id)));
        }
        println!("ok {}", share.signer_id);
    }
    Ok(())
}

pub fn proxy_key<B: PairingBackend>(ctx: &Ctx<B>, id: &str, shares: &[PathBuf], pubkeys: &[PathBuf]) -> Result<()> {
    let ks = ctx.keystore()?;
    let w = ctx.warrant()?;
    let shares = read_shares(&ctx.be, shares)?;
    let s_a = liuxiao::lx_aggregate_delegation(&ctx.be, &shares, &read_pubkeys(&ctx.be, pubkeys)?, &w, ctx.now)?;
    let key = load_key(&ks, &ctx.be, &identity(id)?)?;
    let pk = liuxiao::lx_derive_proxy_key(&ctx.be, &key, &s_a, &w)?;
    ks.put(
        RecordKind::Proxy,
        &pk.proxy_id,
        &pk.warrant_digest,
        &Record {
            params_digest: NO_PARAMS,
            public: ctx.be.encode_g1(&pk.s_a),
            secret: ctx.be.encode_g1(&pk.s_pj),
        },
    )?;
    ctx.emit(
        Kind::ProxyKey,
        &encode_proxy_key(&ctx.be, &pk.proxy_id, &pk.s_a, &pk.warrant_digest),
    )
}

pub fn round1<B: PairingBackend>(ctx: &Ctx<B>, id: &str, receiver_pubkey: &Path) -> Result<()> {
    let ks = ctx.keystore()?;
    let w = ctx.warrant()?;
    let id = identity(id)?;
    if w.proxy_index(&id).is_none() {
        return Err(CliError::malformed(format!("{id} is not a proxy in the warrant")));
    }
    ks.get(RecordKind::Proxy, &id, &w.digest())?;
    let receiver = read_pubkeys(&ctx.be, &[receiver_pubkey.to_path_buf()])?.remove(0);
    let t = ctx.be.random_scalar(&mut ctx.rng(seeds::ROUND1, id.as_bytes()));
    let secret = LxRound1Secret::new(&ctx.be, t.clone())?;
    let bcast = liuxiao::lx_round1_with_secret(&ctx.be, &id, &receiver, &secret);
    store_nonce(&ks, &id, &w, NO_PARAMS, ctx.be.encode_scalar(&t))?;
    ctx.emit(Kind::R1, &bcast.encode(&ctx.be))
}

pub fn commit<B: PairingBackend>(ctx: &Ctx<B>, r1: &[PathBuf], message: &Path) -> Result<()> {
    let w = ctx.warrant()?;
    let m = files::read(message)?;
    let bcasts = read_all(r1, Kind::R1, |b| Ok(LxRound1Broadcast::decode(&ctx.be, b)?))?;
    let k = liuxiao::lx_session_key(&ctx.be, &bcasts, &w)?;
    let (c, r_p) = liuxiao::lx_encrypt_and_commit(&ctx.be, &m, &k);
    ctx.emit(Kind::Commit, &encode_commit(&ctx.be, &w.digest(), &c, &r_p))
}

pub fn partial<B: PairingBackend>(ctx: &Ctx<B>, id: &str, commit: &Path) -> Result<()> {
    let ks = ctx.keystore()?;
    let w = ctx.warrant()?;
    let id = identity(id)?;
    let (_, r_p) = read_commit(&ctx.be, commit, &w)?;
    let rec = ks.get(RecordKind::Proxy, &id, &w.digest())?;
    let pk = LxProxyKey {
        proxy_id: id.clone(),
        s_a: ctx.be.decode_g1(&rec.public)?,
        s_pj: ctx.be.decode_g1(&rec.secret)?,
        warrant_digest: w.digest(),
    };
    let nonce = ks.get(RecordKind::Nonce, &id, &w.digest())?;
    let t = LxRound1Secret::new(&ctx.be, ctx.be.decode_scalar(&nonce.secret)?)?;
    let part = liuxiao::lx_partial_sign(&ctx.be, &pk, &t, &r_p);
    ctx.emit(Kind::Partial, &part.encode(&ctx.be))?;
    ks.remove(RecordKind::Nonce, &id, &w.digest())
}

pub fn combine<B: PairingBackend>(ctx: &Ctx<B>, proxy_key: &Path, partials: &[PathBuf], commit: &Path) -> Result<()> {
    let w = ctx.warrant()?;
    let s_a = read_proxy_key(&ctx.be, proxy_key, &w)?;
    let (c, r_p) = read_commit(&ctx.be, commit, &w)?;
    let parts = read_all(partials, Kind::Partial, |b| Ok(LxPartial::decode(&ctx.be, b)?))?;
    let sc = liuxiao::lx_combine(&ctx.be, &parts, &s_a, &w, c, r_p)?;
    ctx.emit(Kind::Lxsc, &sc.encode(&ctx.be))
}

pub fn verify() -> Result<()> {
    Err(CliError::missing(
        "the liuxiao scheme has no public verification; only the receiver can check a signcryption, with unsigncrypt",
    ))
}

pub fn unsigncrypt<B: PairingBackend>(ctx: &Ctx<B>, id: &str, sc: &Path, pubkeys: &[PathBuf]) -> Result<()> {
    let ks = ctx.keystore()?;
    let bytes = files::read_envelope(sc, Kind::Lxsc)?;
    let sc_parsed = LxSigncryption::decode(&ctx.be, &bytes).map_err(|e| CliError::from(e).context(sc.display()))?;
    if let Some(w) = ctx.warrant.as_deref() {
        check_digest(&sc_parsed.warrant.digest(), &ctx.warrant()?, w)?;
    }
    let key = load_key(&ks, &ctx.be, &identity(id)?)?;
    let m = liuxiao::lx_unsigncrypt(&ctx.be, &sc_parsed, &key, &read_pubkeys(&ctx.be, pubkeys)?, ctx.now)?;
    emit_raw(ctx.out.as_deref(), &m)
}
