//! Liu–Xiao multi-proxy multi-signcryption, the certificate-style baseline.
//!
//! Every participant holds a key pair `(x, y = x * P)`; public keys are handed
//! around directly. With `H = H2(m_w)` a point:
//!
//! ```text
//! S_ai = x_ai * H                          S_A = sum_i S_ai
//! S_pj = S_A + x_pj * H                    S   = l * S_A
//! r_pj = e(P, y_c)^t_j                     k   = H3(prod_j r_pj)
//! r_p  = H1(c || k)                        u_pj = t_j * P - r_p * S_pj
//! k'   = H3(e(u_p, y_c) e(S, y_c)^r_p e(H, sum_j y_pj)^(r_p x_c))
//! ```
//!
//! The receiver's check needs `x_c`. There is no public verification.

use std::fmt;

use rand::RngCore;
use thiserror::Error;

use crate::backend::{BackendError, PairingBackend};
use crate::codec::{CodecError, Reader, Writer};
use crate::symmetric::{self, KeyMaterial};
use crate::tags;
use crate::warrant::{index_by_sender, Identity, Warrant, WarrantError};

pub const LXSC_HEADER: &str = "PAIRMPS-LXSC-V1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LxError {
    #[error(transparent)]
    Warrant(#[from] WarrantError),
    #[error("warrant is not valid at time {now}")]
    WarrantExpired { now: u64 },
    #[error("{0} is not an original signer in the warrant")]
    SignerNotInWarrant(Identity),
    #[error("{0} is not a proxy in the warrant")]
    ProxyNotInWarrant(Identity),
    #[error("{0} contributed more than once")]
    DuplicateContribution(Identity),
    #[error("no public key for {0}")]
    MissingPublicKey(Identity),
    #[error("missing delegation share from {0}")]
    MissingShare(Identity),
    #[error("delegation share {index} from {signer} failed verification")]
    InvalidShare { index: usize, signer: Identity },
    #[error("missing round-1 broadcast from {0}")]
    MissingBroadcast(Identity),
    #[error("missing partial signcryption from {0}")]
    MissingPartial(Identity),
    #[error("secret scalar must be nonzero")]
    ZeroScalar,
    #[error("signcryption failed verification")]
    VerifyFailed,
    #[error("authenticated decryption failed")]
    DecryptFailed,
    #[error(transparent)]
    Encoding(#[from] BackendError),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

pub type Result<T, E = LxError> = std::result::Result<T, E>;

/// `H2(m_w)` as a point on the signature side.
pub fn warrant_point<B: PairingBackend>(backend: &B, w: &Warrant) -> B::G1 {
    backend.hash_to_g1(tags::LX_WARRANT, &w.encode())
}

fn check_window(w: &Warrant, now: u64) -> Result<()> {
    if w.check_validity(now) {
        Ok(())
    } else {
        Err(LxError::WarrantExpired { now })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LxPublicKey<B: PairingBackend> {
    pub id: Identity,
    pub y: B::G2,
}

impl<B: PairingBackend> LxPublicKey<B> {
    pub fn encode(&self, backend: &B) -> Vec<u8> {
        let mut w = Writer::new();
        w.field(self.id.as_bytes()).field(&backend.encode_g2(&self.y));
        w.finish()
    }

    pub fn decode(backend: &B, bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let id = Identity::new(r.utf8("id")?)?;
        let y = backend.decode_g2(r.field()?)?;
        r.finish()?;
        Ok(LxPublicKey { id, y })
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct LxUserKey<B: PairingBackend> {
    public: LxPublicKey<B>,
    x: B::Scalar,
}

impl<B: PairingBackend> fmt::Debug for LxUserKey<B> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LxUserKey")
            .field("public", &self.public)
            .finish_non_exhaustive()
    }
}

impl<B: PairingBackend> LxUserKey<B> {
    pub fn generate<R: RngCore + ?Sized>(backend: &B, id: Identity, rng: &mut R) -> Self {
        let x = backend.random_scalar(rng);
        Self::from_secret(backend, id, x).expect("sampled scalars are nonzero")
    }

    /// `y = x * P`.
    pub fn from_secret(backend: &B, id: Identity, x: B::Scalar) -> Result<Self> {
        if backend.scalar_is_zero(&x) {
            return Err(LxError::ZeroScalar);
        }
        let y = backend.g2_mul(&backend.g2_generator(), &x);
        Ok(LxUserKey {
            public: LxPublicKey { id, y },
            x,
        })
    }

    pub fn id(&self) -> &Identity {
        &self.public.id
    }

    pub fn public(&self) -> &LxPublicKey<B> {
        &self.public
    }

    pub fn secret(&self) -> &B::Scalar {
        &self.x
    }
}

fn lookup<'a, B: PairingBackend>(keys: &'a [LxPublicKey<B>], id: &Identity) -> Result<&'a LxPublicKey<B>> {
    keys.iter()
        .find(|k| &k.id == id)
        .ok_or_else(|| LxError::MissingPublicKey(id.clone()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LxDelegationShare<B: PairingBackend> {
    pub signer_id: Identity,
    pub s_ai: B::G1,
    pub warrant_digest: [u8; 32],
}

impl<B: PairingBackend> LxDelegationShare<B> {
    pub fn encode(&self, backend: &B) -> Vec<u8> {
        let mut w = Writer::new();
        w.field(self.signer_id.as_bytes())
            .field(&backend.encode_g1(&self.s_ai))
            .field(&self.warrant_digest);
        w.finish()
    }

    pub fn decode(backend: &B, bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let signer_id = Identity::new(r.utf8("signer")?)?;
        let s_ai = backend.decode_g1(r.field()?)?;
        let warrant_digest = r.fixed::<32>("warrant digest")?;
        r.finish()?;
        Ok(LxDelegationShare {
            signer_id,
            s_ai,
            warrant_digest,
        })
    }
}

/// `S_ai = x_ai * H2(m_w)`.
pub fn lx_delegation_share<B: PairingBackend>(
    backend: &B,
    signer: &LxUserKey<B>,
    w: &Warrant,
    now: u64,
) -> Result<LxDelegationShare<B>> {
    if w.original_index(signer.id()).is_none() {
        return Err(LxError::SignerNotInWarrant(signer.id().clone()));
    }
    check_window(w, now)?;
    Ok(LxDelegationShare {
        signer_id: signer.id().clone(),
        s_ai: backend.g1_mul(&warrant_point(backend, w), &signer.x),
        warrant_digest: w.digest(),
    })
}

/// `e(S_ai, P) = e(H2(m_w), y_ai)`.
pub fn lx_verify_delegation_share<B: PairingBackend>(
    backend: &B,
    share: &LxDelegationShare<B>,
    signer: &LxPublicKey<B>,
    w: &Warrant,
    now: u64,
) -> Result<bool> {
    if w.original_index(&share.signer_id).is_none() {
        return Err(LxError::SignerNotInWarrant(share.signer_id.clone()));
    }
    if share.signer_id != signer.id || share.warrant_digest != w.digest() || !w.check_validity(now) {
        return Ok(false);
    }
    let lhs = backend.pair(&share.s_ai, &backend.g2_generator());
    let rhs = backend.pair(&warrant_point(backend, w), &signer.y);
    Ok(lhs == rhs)
}

/// Verifies every share against its signer's public key, then returns `S_A`.
pub fn lx_aggregate_delegation<B: PairingBackend>(
    backend: &B,
    shares: &[LxDelegationShare<B>],
    signers: &[LxPublicKey<B>],
    w: &Warrant,
    now: u64,
) -> Result<B::G1> {
    check_window(w, now)?;
    let by_signer = index_by_sender(
        shares,
        |s| &s.signer_id,
        w.original_ids(),
        LxError::SignerNotInWarrant,
        LxError::DuplicateContribution,
    )?;
    let mut s_a = backend.g1_identity();
    for (index, id) in w.original_ids().iter().enumerate() {
        let share = by_signer.get(id).ok_or_else(|| LxError::MissingShare(id.clone()))?;
        if !lx_verify_delegation_share(backend, share, lookup(signers, id)?, w, now)? {
            return Err(LxError::InvalidShare {
                index,
                signer: id.clone(),
            });
        }
        s_a = s_a + share.s_ai.clone();
    }
    Ok(s_a)
}

#[derive(Clone, PartialEq, Eq)]
pub struct LxProxyKey<B: PairingBackend> {
    pub proxy_id: Identity,
    pub s_a: B::G1,
    pub s_pj: B::G1,
    pub warrant_digest: [u8; 32],
}

impl<B: PairingBackend> fmt::Debug for LxProxyKey<B> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LxProxyKey")
            .field("proxy_id", &self.proxy_id)
            .field("s_a", &self.s_a)
            .finish_non_exhaustive()
    }
}

/// `S_pj = S_A + x_pj * H2(m_w)`.
pub fn lx_derive_proxy_key<B: PairingBackend>(
    backend: &B,
    proxy: &LxUserKey<B>,
    s_a: &B::G1,
    w: &Warrant,
) -> Result<LxProxyKey<B>> {
    if w.proxy_index(proxy.id()).is_none() {
        return Err(LxError::ProxyNotInWarrant(proxy.id().clone()));
    }
    Ok(LxProxyKey {
        proxy_id: proxy.id().clone(),
        s_a: s_a.clone(),
        s_pj: s_a.clone() + backend.g1_mul(&warrant_point(backend, w), &proxy.x),
        warrant_digest: w.digest(),
    })
}

#[derive(Clone, PartialEq, Eq)]
pub struct LxRound1Secret<B: PairingBackend>(B::Scalar);

impl<B: PairingBackend> fmt::Debug for LxRound1Secret<B> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("LxRound1Secret(..)")
    }
}

impl<B: PairingBackend> LxRound1Secret<B> {
    pub fn new(backend: &B, t: B::Scalar) -> Result<Self> {
        if backend.scalar_is_zero(&t) {
            return Err(LxError::ZeroScalar);
        }
        Ok(LxRound1Secret(t))
    }

    pub fn scalar(&self) -> &B::Scalar {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LxRound1Broadcast<B: PairingBackend> {
    pub proxy_id: Identity,
    pub r_pj: B::Gt,
}

impl<B: PairingBackend> LxRound1Broadcast<B> {
    pub fn encode(&self, backend: &B) -> Vec<u8> {
        let mut w = Writer::new();
        w.field(self.proxy_id.as_bytes()).field(&backend.encode_gt(&self.r_pj));
        w.finish()
    }

    pub fn decode(backend: &B, bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let proxy_id = Identity::new(r.utf8("proxy")?)?;
        let r_pj = backend.decode_gt(r.field()?)?;
        r.finish()?;
        Ok(LxRound1Broadcast { proxy_id, r_pj })
    }
}

/// `e(P, y_c)`, reusable across proxies and sessions for the same receiver.
pub fn lx_round1_base<B: PairingBackend>(backend: &B, receiver: &LxPublicKey<B>) -> B::Gt {
    backend.pair(&backend.g1_generator(), &receiver.y)
}

pub fn lx_round1_with_base<B: PairingBackend>(
    backend: &B,
    base: &B::Gt,
    proxy_id: &Identity,
    t: &LxRound1Secret<B>,
) -> LxRound1Broadcast<B> {
    LxRound1Broadcast {
        proxy_id: proxy_id.clone(),
        r_pj: backend.gt_exp(base, t.scalar()),
    }
}

/// `r_pj = e(P, y_c)^t_j`.
pub fn lx_round1_with_secret<B: PairingBackend>(
    backend: &B,
    proxy_id: &Identity,
    receiver: &LxPublicKey<B>,
    t: &LxRound1Secret<B>,
) -> LxRound1Broadcast<B> {
    lx_round1_with_base(backend, &lx_round1_base(backend, receiver), proxy_id, t)
}

pub fn lx_round1<B: PairingBackend, R: RngCore + ?Sized>(
    backend: &B,
    proxy: &LxProxyKey<B>,
    receiver: &LxPublicKey<B>,
    rng: &mut R,
) -> (LxRound1Secret<B>, LxRound1Broadcast<B>) {
    let t = LxRound1Secret(backend.random_scalar(rng));
    let b = lx_round1_with_secret(backend, &proxy.proxy_id, receiver, &t);
    (t, b)
}

/// `k = H3(prod_j r_pj)`, one broadcast per proxy required.
pub fn lx_session_key<B: PairingBackend>(
    backend: &B,
    broadcasts: &[LxRound1Broadcast<B>],
    w: &Warrant,
) -> Result<KeyMaterial> {
    let by_proxy = index_by_sender(
        broadcasts,
        |b| &b.proxy_id,
        w.proxy_ids(),
        LxError::ProxyNotInWarrant,
        LxError::DuplicateContribution,
    )?;
    let mut product = backend.gt_identity();
    for id in w.proxy_ids() {
        let b = by_proxy.get(id).ok_or_else(|| LxError::MissingBroadcast(id.clone()))?;
        product = product * b.r_pj.clone();
    }
    Ok(symmetric::hash_gt(backend, tags::LX_H3, &product))
}

/// `r_p = H1(c || k)` over `len(c) as u64 LE || c || k`.
pub fn lx_commitment_scalar<B: PairingBackend>(backend: &B, c: &[u8], k: &KeyMaterial) -> B::Scalar {
    let mut input = Vec::with_capacity(8 + c.len() + k.0.len());
    input.extend_from_slice(&(c.len() as u64).to_le_bytes());
    input.extend_from_slice(c);
    input.extend_from_slice(&k.0);
    backend.hash_to_scalar(tags::LX_H1, &input)
}

pub fn lx_encrypt_and_commit<B: PairingBackend>(backend: &B, m: &[u8], k: &KeyMaterial) -> (Vec<u8>, B::Scalar) {
    let c = symmetric::seal(k, &tags::LX_KDF, m);
    let r_p = lx_commitment_scalar(backend, &c, k);
    (c, r_p)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LxPartial<B: PairingBackend> {
    pub proxy_id: Identity,
    pub u_pj: B::G1,
}

impl<B: PairingBackend> LxPartial<B> {
    pub fn encode(&self, backend: &B) -> Vec<u8> {
        let mut w = Writer::new();
        w.field(self.proxy_id.as_bytes()).field(&backend.encode_g1(&self.u_pj));
        w.finish()
    }

    pub fn decode(backend: &B, bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let proxy_id = Identity::new(r.utf8("proxy")?)?;
        let u_pj = backend.decode_g1(r.field()?)?;
        r.finish()?;
        Ok(LxPartial { proxy_id, u_pj })
    }
}

/// `u_pj = t_j * P - r_p * S_pj`.
pub fn lx_partial_sign<B: PairingBackend>(
    backend: &B,
    proxy: &LxProxyKey<B>,
    t: &LxRound1Secret<B>,
    r_p: &B::Scalar,
) -> LxPartial<B> {
    LxPartial {
        proxy_id: proxy.proxy_id.clone(),
        u_pj: backend.g1_mul(&backend.g1_generator(), t.scalar()) - backend.g1_mul(&proxy.s_pj, r_p),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LxSigncryption<B: PairingBackend> {
    pub warrant: Warrant,
    pub s: B::G1,
    pub c: Vec<u8>,
    pub r_p: B::Scalar,
    pub u_p: B::G1,
}

impl<B: PairingBackend> LxSigncryption<B> {
    pub fn encode(&self, backend: &B) -> Vec<u8> {
        let mut w = Writer::with_header(LXSC_HEADER);
        w.field(&self.warrant.encode())
            .field(&backend.encode_g1(&self.s))
            .field(&self.c)
            .field(&backend.encode_scalar(&self.r_p))
            .field(&backend.encode_g1(&self.u_p));
        w.finish()
    }

    pub fn decode(backend: &B, bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::with_header(bytes, LXSC_HEADER)?;
        let warrant = Warrant::decode(r.field()?)?;
        let s = backend.decode_g1(r.field()?)?;
        let c = r.field()?.to_vec();
        let r_p = backend.decode_scalar(r.field()?)?;
        let u_p = backend.decode_g1(r.field()?)?;
        r.finish()?;
        Ok(LxSigncryption {
            warrant,
            s,
            c,
            r_p,
            u_p,
        })
    }
}

/// Clerk: `u_p = sum_j u_pj`, `S = l * S_A`. Partials cannot be checked here.
pub fn lx_combine<B: PairingBackend>(
    backend: &B,
    parts: &[LxPartial<B>],
    s_a: &B::G1,
    w: &Warrant,
    c: Vec<u8>,
    r_p: B::Scalar,
) -> Result<LxSigncryption<B>> {
    let by_proxy = index_by_sender(
        parts,
        |p| &p.proxy_id,
        w.proxy_ids(),
        LxError::ProxyNotInWarrant,
        LxError::DuplicateContribution,
    )?;
    let mut u_p = backend.g1_identity();
    for id in w.proxy_ids() {
        let part = by_proxy.get(id).ok_or_else(|| LxError::MissingPartial(id.clone()))?;
        u_p = u_p + part.u_pj.clone();
    }
    let l = backend.scalar_from_u64(w.proxy_ids().len() as u64);
    Ok(LxSigncryption {
        warrant: w.clone(),
        s: backend.g1_mul(s_a, &l),
        c,
        r_p,
        u_p,
    })
}

/// Both rounds for a set of proxies that already hold their keys.
pub fn lx_signcrypt_round<B: PairingBackend, R: RngCore + ?Sized>(
    backend: &B,
    proxies: &[LxProxyKey<B>],
    receiver: &LxPublicKey<B>,
    w: &Warrant,
    m: &[u8],
    rng: &mut R,
) -> Result<LxSigncryption<B>> {
    let Some(first) = proxies.first() else {
        return Err(LxError::MissingBroadcast(w.proxy_ids()[0].clone()));
    };
    let (secrets, bcasts): (Vec<_>, Vec<_>) = proxies
        .iter()
        .map(|p| lx_round1(backend, p, receiver, rng))
        .unzip();
    let k = lx_session_key(backend, &bcasts, w)?;
    let (c, r_p) = lx_encrypt_and_commit(backend, m, &k);
    let parts: Vec<_> = proxies
        .iter()
        .zip(&secrets)
        .map(|(p, t)| lx_partial_sign(backend, p, t, &r_p))
        .collect();
    lx_combine(backend, &parts, &first.s_a, w, c, r_p)
}

/// Receiver-side `prod_j r_pj`:
/// `e(u_p, y_c) e(S, y_c)^r_p e(H2(m_w), sum_j y_pj)^(r_p x_c)`.
pub fn lx_recover_product<B: PairingBackend>(
    backend: &B,
    sc: &LxSigncryption<B>,
    receiver: &LxUserKey<B>,
    proxies: &[LxPublicKey<B>],
) -> Result<B::Gt> {
    let mut sum_y = backend.g2_identity();
    for id in sc.warrant.proxy_ids() {
        sum_y = sum_y + lookup(proxies, id)?.y.clone();
    }
    let y_c = &receiver.public.y;
    let h = warrant_point(backend, &sc.warrant);
    Ok(backend.pair(&sc.u_p, y_c)
        * backend.gt_exp(&backend.pair(&sc.s, y_c), &sc.r_p)
        * backend.gt_exp(&backend.pair(&h, &sum_y), &(sc.r_p.clone() * receiver.x.clone())))
}

/// Accepts iff `r_p = H1(c || k')`, then decrypts. Requires the receiver's secret.
pub fn lx_unsigncrypt<B: PairingBackend>(
    backend: &B,
    sc: &LxSigncryption<B>,
    receiver: &LxUserKey<B>,
    proxies: &[LxPublicKey<B>],
    now: u64,
) -> Result<Vec<u8>> {
    if !sc.warrant.check_validity(now) {
        return Err(LxError::VerifyFailed);
    }
    let k = symmetric::hash_gt(backend, tags::LX_H3, &lx_recover_product(backend, sc, receiver, proxies)?);
    if lx_commitment_scalar(backend, &sc.c, &k) != sc.r_p {
        return Err(LxError::VerifyFailed);
    }
    symmetric::open(&k, &tags::LX_KDF, &sc.c).map_err(|_| LxError::DecryptFailed)
}

#[cfg(test)]
mod tests;
