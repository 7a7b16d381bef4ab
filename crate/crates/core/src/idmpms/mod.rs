//! Identity-based multi-proxy multi-signcryption.
//!
//! A private key generator (PKG) issues identity keys. The `n` original signers
//! jointly delegate to `l` proxies through a warrant: each original signer
//! broadcasts a delegation share, the proxies check and aggregate the shares
//! and derive per-proxy keys. The proxies then signcrypt a message in two
//! rounds, a clerk (the first proxy) combines their partial signcryptions, and
//! anyone can verify the result from public data. Only the receiver can
//! decrypt it.
//!
//! The warrant hash enters every equation as the scalar `h_w` (see
//! [`crate::warrant::warrant_scalar`]):
//!
//! ```text
//! S_Ai  = h_w * S_ID_Ai                      S_A = sum_i S_Ai
//! S_pj  = S_A + h_w * S_ID_pj                S   = l * S_A
//! k1j   = e(P, P_pub)^t_j                    k2j = e(P_pub, Q_C)^t_j
//! u_pj  = t_j * P_pub - r_p * S_pj           u_p = sum_j u_pj
//! k1    = e(u_p, P) e(S, P)^r_p e(P_pub, sum_j Q_pj)^(h_w r_p)
//! k2    = H2(e(u_p, Q_C) e(S, Q_C)^r_p e(h_w sum_j Q_pj, S_C)^r_p)
//! ```

use std::collections::HashMap;
use std::fmt;

use rand::RngCore;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::backend::{BackendError, BackendKind, PairingBackend};
use crate::codec::{CodecError, Reader, Writer};
use crate::symmetric::{self, KeyMaterial, CIPHER_SUITE};
use crate::tags;
use crate::warrant::{warrant_scalar, Identity, Warrant, WarrantError};

pub const PARAMS_HEADER: &str = "PAIRMPS-PARAMS-V1";
pub const SC_HEADER: &str = "PAIRMPS-SC-V1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdmpmsError {
    #[error(transparent)]
    Warrant(#[from] WarrantError),
    #[error("warrant is not valid at time {now}")]
    WarrantExpired { now: u64 },
    #[error("{0} is not an original signer in the warrant")]
    SignerNotInWarrant(Identity),
    #[error("{0} is not a proxy in the warrant")]
    ProxyNotInWarrant(Identity),
    #[error("message was produced for a different warrant")]
    WarrantMismatch,
    #[error("{0} contributed more than once")]
    DuplicateContribution(Identity),
    #[error("missing delegation share from {0}")]
    MissingShare(Identity),
    #[error("delegation share {index} from {signer} failed verification")]
    InvalidShare { index: usize, signer: Identity },
    #[error("missing round-1 broadcast from {0}")]
    MissingBroadcast(Identity),
    #[error("missing partial signcryption from {0}")]
    MissingPartial(Identity),
    #[error("partial signcryption {index} from {proxy} failed verification")]
    InvalidPartial { index: usize, proxy: Identity },
    #[error("secret scalar must be nonzero")]
    ZeroScalar,
    #[error("identity key for {0} does not match the public parameters")]
    InvalidKey(Identity),
    #[error("public parameters are inconsistent: {0}")]
    InvalidParams(String),
    #[error("signcryption failed public verification")]
    VerifyFailed,
    #[error("authenticated decryption failed")]
    DecryptFailed,
    #[error(transparent)]
    Encoding(#[from] BackendError),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

pub type Result<T, E = IdmpmsError> = std::result::Result<T, E>;

/// System parameters published by the PKG. Contains no secret.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicParams<B: PairingBackend> {
    backend: B,
    p_pub_g1: B::G1,
    p_pub_g2: B::G2,
}

impl<B: PairingBackend> PublicParams<B> {
    pub fn backend(&self) -> &B {
        &self.backend
    }

    /// `P_pub` on the signature side.
    pub fn p_pub_g1(&self) -> &B::G1 {
        &self.p_pub_g1
    }

    /// `P_pub` on the key side.
    pub fn p_pub_g2(&self) -> &B::G2 {
        &self.p_pub_g2
    }

    pub fn encode(&self) -> Vec<u8> {
        let be = &self.backend;
        let d = be.descriptor();
        let mut w = Writer::with_header(PARAMS_HEADER);
        w.field(d.kind.as_str().as_bytes())
            .field(&d.order)
            .field(&d.g1_generator)
            .field(&d.g2_generator)
            .field(&be.encode_g1(&self.p_pub_g1))
            .field(&be.encode_g2(&self.p_pub_g2))
            .field(CIPHER_SUITE.as_bytes());
        w.finish()
    }

    /// Reads the backend kind and group order without decoding any element.
    pub fn peek_backend(bytes: &[u8]) -> Result<(BackendKind, Vec<u8>)> {
        let mut r = Reader::with_header(bytes, PARAMS_HEADER)?;
        let kind = r
            .utf8("backend")?
            .parse::<BackendKind>()
            .map_err(IdmpmsError::InvalidParams)?;
        Ok((kind, r.field()?.to_vec()))
    }

    pub fn decode(backend: B, bytes: &[u8]) -> Result<Self> {
        let d = backend.descriptor();
        let mut r = Reader::with_header(bytes, PARAMS_HEADER)?;
        if r.field()? != d.kind.as_str().as_bytes() {
            return Err(IdmpmsError::InvalidParams("backend kind mismatch".into()));
        }
        if r.field()? != d.order.as_slice() {
            return Err(IdmpmsError::InvalidParams("group order mismatch".into()));
        }
        if r.field()? != d.g1_generator.as_slice() || r.field()? != d.g2_generator.as_slice() {
            return Err(IdmpmsError::InvalidParams("generator mismatch".into()));
        }
        let p_pub_g1 = backend.decode_g1(r.field()?)?;
        let p_pub_g2 = backend.decode_g2(r.field()?)?;
        if r.field()? != CIPHER_SUITE.as_bytes() {
            return Err(IdmpmsError::InvalidParams("unsupported cipher suite".into()));
        }
        r.finish()?;
        Self::from_parts(backend, p_pub_g1, p_pub_g2)
    }

    /// Checks that both copies of `P_pub` share a nonzero discrete log.
    pub fn from_parts(backend: B, p_pub_g1: B::G1, p_pub_g2: B::G2) -> Result<Self> {
        if p_pub_g1 == backend.g1_identity() {
            return Err(IdmpmsError::InvalidParams("P_pub is the identity".into()));
        }
        let lhs = backend.pair(&p_pub_g1, &backend.g2_generator());
        let rhs = backend.pair(&backend.g1_generator(), &p_pub_g2);
        if lhs != rhs {
            return Err(IdmpmsError::InvalidParams("P_pub copies disagree".into()));
        }
        Ok(PublicParams {
            backend,
            p_pub_g1,
            p_pub_g2,
        })
    }

    pub fn digest(&self) -> [u8; 32] {
        Sha256::digest(self.encode()).into()
    }

    /// Public identity key `Q_ID` on both sides.
    pub fn identity_key(&self, id: &Identity) -> PublicIdentity<B> {
        PublicIdentity {
            id: id.clone(),
            q_sig: self.backend.hash_to_g1(tags::IDENTITY, id.as_bytes()),
            q_recv: self.backend.hash_to_g2(tags::IDENTITY, id.as_bytes()),
        }
    }

    fn sum_q_sig(&self, ids: &[Identity]) -> B::G1 {
        ids.iter().fold(self.backend.g1_identity(), |acc, id| {
            acc + self.backend.hash_to_g1(tags::IDENTITY, id.as_bytes())
        })
    }

    fn check_window(&self, w: &Warrant, now: u64) -> Result<()> {
        if w.check_validity(now) {
            Ok(())
        } else {
            Err(IdmpmsError::WarrantExpired { now })
        }
    }
}

/// The PKG: public parameters plus the master secret `s`.
#[derive(Clone)]
pub struct Pkg<B: PairingBackend> {
    params: PublicParams<B>,
    master_secret: B::Scalar,
}

impl<B: PairingBackend> fmt::Debug for Pkg<B> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Pkg").field("params", &self.params).finish_non_exhaustive()
    }
}

/// Samples a master secret and publishes `P_pub = s * P`.
pub fn setup<B: PairingBackend, R: RngCore + ?Sized>(backend: B, rng: &mut R) -> Pkg<B> {
    let s = backend.random_scalar(rng);
    Pkg::from_master_secret(backend, s).expect("random_scalar never returns zero")
}

impl<B: PairingBackend> Pkg<B> {
    pub fn from_master_secret(backend: B, s: B::Scalar) -> Result<Self> {
        if backend.scalar_is_zero(&s) {
            return Err(IdmpmsError::ZeroScalar);
        }
        let p_pub_g1 = backend.g1_mul(&backend.g1_generator(), &s);
        let p_pub_g2 = backend.g2_mul(&backend.g2_generator(), &s);
        Ok(Pkg {
            params: PublicParams {
                backend,
                p_pub_g1,
                p_pub_g2,
            },
            master_secret: s,
        })
    }

    pub fn params(&self) -> &PublicParams<B> {
        &self.params
    }

    pub fn master_secret(&self) -> &B::Scalar {
        &self.master_secret
    }

    /// `S_ID = s * Q_ID`.
    pub fn extract(&self, id: &Identity) -> UserKey<B> {
        let be = self.params.backend();
        let public = self.params.identity_key(id);
        UserKey {
            s_sig: be.g1_mul(&public.q_sig, &self.master_secret),
            s_recv: be.g2_mul(&public.q_recv, &self.master_secret),
            public,
        }
    }
}

/// `Q_ID` for an identity, on the signature side and on the key side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicIdentity<B: PairingBackend> {
    pub id: Identity,
    pub q_sig: B::G1,
    pub q_recv: B::G2,
}

/// An extracted identity key.
#[derive(Clone, PartialEq, Eq)]
pub struct UserKey<B: PairingBackend> {
    public: PublicIdentity<B>,
    s_sig: B::G1,
    s_recv: B::G2,
}

impl<B: PairingBackend> fmt::Debug for UserKey<B> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UserKey").field("id", &self.public.id).finish_non_exhaustive()
    }
}

impl<B: PairingBackend> UserKey<B> {
    /// Rebuilds a stored key, rejecting it unless it matches `params`.
    pub fn from_parts(params: &PublicParams<B>, id: Identity, s_sig: B::G1, s_recv: B::G2) -> Result<Self> {
        let key = UserKey {
            public: params.identity_key(&id),
            s_sig,
            s_recv,
        };
        if !key.is_valid(params) {
            return Err(IdmpmsError::InvalidKey(id));
        }
        Ok(key)
    }

    pub fn id(&self) -> &Identity {
        &self.public.id
    }

    pub fn public(&self) -> &PublicIdentity<B> {
        &self.public
    }

    pub fn s_sig(&self) -> &B::G1 {
        &self.s_sig
    }

    pub fn s_recv(&self) -> &B::G2 {
        &self.s_recv
    }

    /// `e(S_ID, P) = e(Q_ID, P_pub)` on both sides.
    pub fn is_valid(&self, params: &PublicParams<B>) -> bool {
        let be = params.backend();
        be.pair(&self.s_sig, &be.g2_generator()) == be.pair(&self.public.q_sig, params.p_pub_g2())
            && be.pair(&be.g1_generator(), &self.s_recv) == be.pair(params.p_pub_g1(), &self.public.q_recv)
    }
}

/// `S_Ai`, an original signer's contribution to the delegation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DelegationShare<B: PairingBackend> {
    pub signer_id: Identity,
    pub s_ai: B::G1,
    pub warrant_digest: [u8; 32],
}

impl<B: PairingBackend> DelegationShare<B> {
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
        Ok(DelegationShare {
            signer_id,
            s_ai,
            warrant_digest,
        })
    }
}

pub fn delegation_share<B: PairingBackend>(
    params: &PublicParams<B>,
    signer: &UserKey<B>,
    w: &Warrant,
    now: u64,
) -> Result<DelegationShare<B>> {
    if w.original_index(signer.id()).is_none() {
        return Err(IdmpmsError::SignerNotInWarrant(signer.id().clone()));
    }
    params.check_window(w, now)?;
    let be = params.backend();
    let h_w = warrant_scalar(be, w);
    Ok(DelegationShare {
        signer_id: signer.id().clone(),
        s_ai: be.g1_mul(signer.s_sig(), &h_w),
        warrant_digest: w.digest(),
    })
}

/// `e(S_Ai, P) = e(Q_Ai, P_pub)^h_w`. Needs no secret.
pub fn verify_delegation_share<B: PairingBackend>(
    params: &PublicParams<B>,
    share: &DelegationShare<B>,
    w: &Warrant,
    now: u64,
) -> Result<bool> {
    if w.original_index(&share.signer_id).is_none() {
        return Err(IdmpmsError::SignerNotInWarrant(share.signer_id.clone()));
    }
    if share.warrant_digest != w.digest() || !w.check_validity(now) {
        return Ok(false);
    }
    let be = params.backend();
    let h_w = warrant_scalar(be, w);
    let q = be.hash_to_g1(tags::IDENTITY, share.signer_id.as_bytes());
    let lhs = be.pair(&share.s_ai, &be.g2_generator());
    let rhs = be.gt_exp(&be.pair(&q, params.p_pub_g2()), &h_w);
    Ok(lhs == rhs)
}

fn index_by_sender<'a, T>(
    items: &'a [T],
    sender: impl Fn(&T) -> &Identity,
    members: &[Identity],
    stranger: impl Fn(Identity) -> IdmpmsError,
) -> Result<HashMap<&'a Identity, &'a T>> {
    crate::warrant::index_by_sender(items, sender, members, stranger, IdmpmsError::DuplicateContribution)
}

/// Verifies every share, then returns `S_A = sum_i S_Ai`.
pub fn aggregate_delegation<B: PairingBackend>(
    params: &PublicParams<B>,
    shares: &[DelegationShare<B>],
    w: &Warrant,
    now: u64,
) -> Result<B::G1> {
    params.check_window(w, now)?;
    let by_signer = index_by_sender(
        shares,
        |s| &s.signer_id,
        w.original_ids(),
        IdmpmsError::SignerNotInWarrant,
    )?;
    let mut s_a = params.backend().g1_identity();
    for (index, id) in w.original_ids().iter().enumerate() {
        let share = by_signer
            .get(id)
            .ok_or_else(|| IdmpmsError::MissingShare(id.clone()))?;
        if !verify_delegation_share(params, share, w, now)? {
            return Err(IdmpmsError::InvalidShare {
                index,
                signer: id.clone(),
            });
        }
        s_a = s_a + share.s_ai.clone();
    }
    Ok(s_a)
}

/// A proxy's signing key for one warrant.
#[derive(Clone, PartialEq, Eq)]
pub struct ProxyKey<B: PairingBackend> {
    pub proxy_id: Identity,
    /// Aggregate delegation `S_A` (public).
    pub s_a: B::G1,
    /// `S_pj` (secret).
    pub s_pj: B::G1,
    pub warrant_digest: [u8; 32],
}

impl<B: PairingBackend> fmt::Debug for ProxyKey<B> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProxyKey")
            .field("proxy_id", &self.proxy_id)
            .field("s_a", &self.s_a)
            .finish_non_exhaustive()
    }
}

/// `S_pj = S_A + h_w * S_ID_pj`.
pub fn derive_proxy_key<B: PairingBackend>(
    params: &PublicParams<B>,
    proxy: &UserKey<B>,
    s_a: &B::G1,
    w: &Warrant,
) -> Result<ProxyKey<B>> {
    if w.proxy_index(proxy.id()).is_none() {
        return Err(IdmpmsError::ProxyNotInWarrant(proxy.id().clone()));
    }
    let be = params.backend();
    let h_w = warrant_scalar(be, w);
    Ok(ProxyKey {
        proxy_id: proxy.id().clone(),
        s_a: s_a.clone(),
        s_pj: s_a.clone() + be.g1_mul(proxy.s_sig(), &h_w),
        warrant_digest: w.digest(),
    })
}

/// A proxy's one-time signcryption nonce `t_j`.
#[derive(Clone, PartialEq, Eq)]
pub struct Round1Secret<B: PairingBackend>(B::Scalar);

impl<B: PairingBackend> fmt::Debug for Round1Secret<B> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Round1Secret(..)")
    }
}

impl<B: PairingBackend> Round1Secret<B> {
    pub fn new(backend: &B, t: B::Scalar) -> Result<Self> {
        if backend.scalar_is_zero(&t) {
            return Err(IdmpmsError::ZeroScalar);
        }
        Ok(Round1Secret(t))
    }

    pub fn scalar(&self) -> &B::Scalar {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Round1Broadcast<B: PairingBackend> {
    pub proxy_id: Identity,
    pub k1j: B::Gt,
    pub k2j: B::Gt,
}

impl<B: PairingBackend> Round1Broadcast<B> {
    pub fn encode(&self, backend: &B) -> Vec<u8> {
        let mut w = Writer::new();
        w.field(self.proxy_id.as_bytes())
            .field(&backend.encode_gt(&self.k1j))
            .field(&backend.encode_gt(&self.k2j));
        w.finish()
    }

    pub fn decode(backend: &B, bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let proxy_id = Identity::new(r.utf8("proxy")?)?;
        let k1j = backend.decode_gt(r.field()?)?;
        let k2j = backend.decode_gt(r.field()?)?;
        r.finish()?;
        Ok(Round1Broadcast { proxy_id, k1j, k2j })
    }
}

/// The two pairing bases of round 1: `e(P, P_pub)` and `e(P_pub, Q_C)`.
///
/// [`round1`] recomputes them on every call. Callers that run several proxies
/// against the same receiver can compute them once and use
/// [`round1_with_bases`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Round1Bases<B: PairingBackend> {
    pub k1_base: B::Gt,
    pub k2_base: B::Gt,
}

impl<B: PairingBackend> Round1Bases<B> {
    pub fn compute(params: &PublicParams<B>, receiver: &Identity) -> Self {
        let be = params.backend();
        let q_c = be.hash_to_g2(tags::IDENTITY, receiver.as_bytes());
        Round1Bases {
            k1_base: be.pair(&be.g1_generator(), params.p_pub_g2()),
            k2_base: be.pair(params.p_pub_g1(), &q_c),
        }
    }
}

pub fn round1_with_bases<B: PairingBackend>(
    params: &PublicParams<B>,
    bases: &Round1Bases<B>,
    proxy_id: &Identity,
    t: &Round1Secret<B>,
) -> Round1Broadcast<B> {
    let be = params.backend();
    Round1Broadcast {
        proxy_id: proxy_id.clone(),
        k1j: be.gt_exp(&bases.k1_base, t.scalar()),
        k2j: be.gt_exp(&bases.k2_base, t.scalar()),
    }
}

/// Round-1 broadcast for a given nonce.
pub fn round1_with_secret<B: PairingBackend>(
    params: &PublicParams<B>,
    proxy_id: &Identity,
    receiver: &Identity,
    t: &Round1Secret<B>,
) -> Round1Broadcast<B> {
    round1_with_bases(params, &Round1Bases::compute(params, receiver), proxy_id, t)
}

/// Samples `t_j` and computes `k1j = e(P, P_pub)^t_j`, `k2j = e(P_pub, Q_C)^t_j`.
pub fn round1<B: PairingBackend, R: RngCore + ?Sized>(
    params: &PublicParams<B>,
    proxy: &ProxyKey<B>,
    receiver: &Identity,
    rng: &mut R,
) -> (Round1Secret<B>, Round1Broadcast<B>) {
    let t = Round1Secret(params.backend().random_scalar(rng));
    let bcast = round1_with_secret(params, &proxy.proxy_id, receiver, &t);
    (t, bcast)
}

/// Session secrets shared by the proxies after round 1.
#[derive(Clone, PartialEq, Eq)]
pub struct SessionKeys<B: PairingBackend> {
    pub k1: B::Gt,
    /// `prod_j k2j`, the input of `H2`.
    pub k2_preimage: B::Gt,
    pub k2: KeyMaterial,
}

impl<B: PairingBackend> fmt::Debug for SessionKeys<B> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SessionKeys").field("k1", &self.k1).finish_non_exhaustive()
    }
}

/// `k1 = prod_j k1j`, `k2 = H2(prod_j k2j)`; one broadcast per proxy required.
pub fn derive_session_keys<B: PairingBackend>(
    params: &PublicParams<B>,
    broadcasts: &[Round1Broadcast<B>],
    w: &Warrant,
) -> Result<SessionKeys<B>> {
    let be = params.backend();
    let by_proxy = index_by_sender(
        broadcasts,
        |b| &b.proxy_id,
        w.proxy_ids(),
        IdmpmsError::ProxyNotInWarrant,
    )?;
    let mut k1 = be.gt_identity();
    let mut k2_preimage = be.gt_identity();
    for id in w.proxy_ids() {
        let b = by_proxy
            .get(id)
            .ok_or_else(|| IdmpmsError::MissingBroadcast(id.clone()))?;
        k1 = k1 * b.k1j.clone();
        k2_preimage = k2_preimage * b.k2j.clone();
    }
    let k2 = symmetric::hash_gt(be, tags::K2, &k2_preimage);
    Ok(SessionKeys { k1, k2_preimage, k2 })
}

/// `r_p = H3(c, k1)` over `len(c) as u64 LE || c || encode_gt(k1)`.
pub fn commitment_scalar<B: PairingBackend>(backend: &B, c: &[u8], k1: &B::Gt) -> B::Scalar {
    let mut input = Vec::with_capacity(8 + c.len() + backend.gt_len());
    input.extend_from_slice(&(c.len() as u64).to_le_bytes());
    input.extend_from_slice(c);
    input.extend_from_slice(&backend.encode_gt(k1));
    backend.hash_to_scalar(tags::H3, &input)
}

/// `c = E_k2(m)`, `r_p = H3(c, k1)`. Deterministic, so all proxies agree.
pub fn encrypt_and_commit<B: PairingBackend>(
    params: &PublicParams<B>,
    m: &[u8],
    keys: &SessionKeys<B>,
) -> (Vec<u8>, B::Scalar) {
    let c = symmetric::seal(&keys.k2, &tags::IDMPMS_KDF, m);
    let r_p = commitment_scalar(params.backend(), &c, &keys.k1);
    (c, r_p)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialSigncryption<B: PairingBackend> {
    pub proxy_id: Identity,
    pub u_pj: B::G1,
}

impl<B: PairingBackend> PartialSigncryption<B> {
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
        Ok(PartialSigncryption { proxy_id, u_pj })
    }
}

/// `u_pj = t_j * P_pub - r_p * S_pj`.
pub fn partial_sign<B: PairingBackend>(
    params: &PublicParams<B>,
    proxy: &ProxyKey<B>,
    t: &Round1Secret<B>,
    r_p: &B::Scalar,
) -> PartialSigncryption<B> {
    let be = params.backend();
    PartialSigncryption {
        proxy_id: proxy.proxy_id.clone(),
        u_pj: be.g1_mul(params.p_pub_g1(), t.scalar()) - be.g1_mul(&proxy.s_pj, r_p),
    }
}

/// Clerk-side check of one partial against its sender's round-1 broadcast:
/// `e(u_pj, P) e(S_A, P)^r_p e(P_pub, Q_pj)^(h_w r_p) = k1j`.
pub fn verify_partial<B: PairingBackend>(
    params: &PublicParams<B>,
    part: &PartialSigncryption<B>,
    bcast: &Round1Broadcast<B>,
    s_a: &B::G1,
    w: &Warrant,
    r_p: &B::Scalar,
    now: u64,
) -> bool {
    if part.proxy_id != bcast.proxy_id || w.proxy_index(&part.proxy_id).is_none() || !w.check_validity(now) {
        return false;
    }
    let be = params.backend();
    let h_w = warrant_scalar(be, w);
    let p2 = be.g2_generator();
    let q_pj = be.hash_to_g1(tags::IDENTITY, part.proxy_id.as_bytes());
    let k1j = be.pair(&part.u_pj, &p2)
        * be.gt_exp(&be.pair(s_a, &p2), r_p)
        * be.gt_exp(&be.pair(&q_pj, params.p_pub_g2()), &(h_w * r_p.clone()));
    k1j == bcast.k1j
}

/// The multi-proxy multi-signcryption `(m_w, S, c, r_p, u_p)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signcryption<B: PairingBackend> {
    pub warrant: Warrant,
    pub s: B::G1,
    pub c: Vec<u8>,
    pub r_p: B::Scalar,
    pub u_p: B::G1,
}

impl<B: PairingBackend> Signcryption<B> {
    /// Wire form: header, then warrant, `S`, `c`, `r_p`, `u_p` as length-prefixed fields.
    pub fn encode(&self, backend: &B) -> Vec<u8> {
        let mut w = Writer::with_header(SC_HEADER);
        w.field(&self.warrant.encode())
            .field(&backend.encode_g1(&self.s))
            .field(&self.c)
            .field(&backend.encode_scalar(&self.r_p))
            .field(&backend.encode_g1(&self.u_p));
        w.finish()
    }

    pub fn decode(backend: &B, bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::with_header(bytes, SC_HEADER)?;
        let warrant = Warrant::decode(r.field()?)?;
        let s = backend.decode_g1(r.field()?)?;
        let c = r.field()?.to_vec();
        let r_p = backend.decode_scalar(r.field()?)?;
        let u_p = backend.decode_g1(r.field()?)?;
        r.finish()?;
        Ok(Signcryption {
            warrant,
            s,
            c,
            r_p,
            u_p,
        })
    }
}

/// Clerk: verifies one partial per proxy, then `u_p = sum_j u_pj`, `S = l * S_A`.
#[allow(clippy::too_many_arguments)]
pub fn combine<B: PairingBackend>(
    params: &PublicParams<B>,
    parts: &[PartialSigncryption<B>],
    broadcasts: &[Round1Broadcast<B>],
    s_a: &B::G1,
    w: &Warrant,
    c: Vec<u8>,
    r_p: B::Scalar,
    now: u64,
) -> Result<Signcryption<B>> {
    params.check_window(w, now)?;
    let be = params.backend();
    let parts_by = index_by_sender(parts, |p| &p.proxy_id, w.proxy_ids(), IdmpmsError::ProxyNotInWarrant)?;
    let bcasts_by = index_by_sender(
        broadcasts,
        |b| &b.proxy_id,
        w.proxy_ids(),
        IdmpmsError::ProxyNotInWarrant,
    )?;
    let mut u_p = be.g1_identity();
    for (index, id) in w.proxy_ids().iter().enumerate() {
        let part = parts_by
            .get(id)
            .ok_or_else(|| IdmpmsError::MissingPartial(id.clone()))?;
        let bcast = bcasts_by
            .get(id)
            .ok_or_else(|| IdmpmsError::MissingBroadcast(id.clone()))?;
        if !verify_partial(params, part, bcast, s_a, w, &r_p, now) {
            return Err(IdmpmsError::InvalidPartial {
                index,
                proxy: id.clone(),
            });
        }
        u_p = u_p + part.u_pj.clone();
    }
    let l = be.scalar_from_u64(w.proxy_ids().len() as u64);
    Ok(Signcryption {
        warrant: w.clone(),
        s: be.g1_mul(s_a, &l),
        c,
        r_p,
        u_p,
    })
}

/// Recomputes `k1 = e(u_p, P) e(S, P)^r_p e(P_pub, sum_j Q_pj)^(h_w r_p)` from public data.
pub fn recompute_k1<B: PairingBackend>(params: &PublicParams<B>, sc: &Signcryption<B>) -> B::Gt {
    public_check(params, sc).0
}

/// Returns `(k1', origin check result)`, sharing the `e(S, P)` pairing.
fn public_check<B: PairingBackend>(params: &PublicParams<B>, sc: &Signcryption<B>) -> (B::Gt, bool) {
    let be = params.backend();
    let w = &sc.warrant;
    let h_w = warrant_scalar(be, w);
    let p2 = be.g2_generator();
    let pair_s = be.pair(&sc.s, &p2);
    let sum_qp = params.sum_q_sig(w.proxy_ids());
    let k1 = be.pair(&sc.u_p, &p2)
        * be.gt_exp(&pair_s, &sc.r_p)
        * be.gt_exp(&be.pair(&sum_qp, params.p_pub_g2()), &(h_w.clone() * sc.r_p.clone()));
    // S must be l times the aggregate delegation of exactly the listed signers.
    let sum_qa = params.sum_q_sig(w.original_ids());
    let l_h = be.scalar_from_u64(w.proxy_ids().len() as u64) * h_w;
    let origin_ok = be.gt_exp(&be.pair(&sum_qa, params.p_pub_g2()), &l_h) == pair_s;
    (k1, origin_ok)
}

/// Public verification: needs only the public parameters.
pub fn public_verify<B: PairingBackend>(params: &PublicParams<B>, sc: &Signcryption<B>, now: u64) -> bool {
    if !sc.warrant.check_validity(now) {
        return false;
    }
    let (k1, origin_ok) = public_check(params, sc);
    origin_ok && sc.r_p == commitment_scalar(params.backend(), &sc.c, &k1)
}

/// Receiver-side `prod_j k2j`:
/// `e(u_p, Q_C) e(S, Q_C)^r_p e(h_w sum_j Q_pj, S_C)^r_p`.
pub fn recover_k2_preimage<B: PairingBackend>(
    params: &PublicParams<B>,
    sc: &Signcryption<B>,
    receiver: &UserKey<B>,
) -> B::Gt {
    let be = params.backend();
    let w = &sc.warrant;
    let h_w = warrant_scalar(be, w);
    let q_c = &receiver.public().q_recv;
    let sum_qp = be.g1_mul(&params.sum_q_sig(w.proxy_ids()), &h_w);
    be.pair(&sc.u_p, q_c)
        * be.gt_exp(&be.pair(&sc.s, q_c), &sc.r_p)
        * be.gt_exp(&be.pair(&sum_qp, receiver.s_recv()), &sc.r_p)
}

/// Publicly verifies, then decrypts with the receiver's recovered `k2`.
pub fn unsigncrypt<B: PairingBackend>(
    params: &PublicParams<B>,
    sc: &Signcryption<B>,
    receiver: &UserKey<B>,
    now: u64,
) -> Result<Vec<u8>> {
    if !public_verify(params, sc, now) {
        return Err(IdmpmsError::VerifyFailed);
    }
    let preimage = recover_k2_preimage(params, sc, receiver);
    let k2 = symmetric::hash_gt(params.backend(), tags::K2, &preimage);
    symmetric::open(&k2, &tags::IDMPMS_KDF, &sc.c).map_err(|_| IdmpmsError::DecryptFailed)
}
