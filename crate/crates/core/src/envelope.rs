//! Text envelopes for protocol messages exchanged as files.
//!
//! ```text
//! PAIRMPS <KIND> V1
//! <hex payload, 64 characters per line>
//! ```

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

const LINE: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Warrant,
    Dshare,
    ProxyKey,
    R1,
    Commit,
    Partial,
    Sc,
    Lxsc,
    Params,
    Lxpub,
}

impl Kind {
    pub const ALL: [Kind; 10] = [
        Kind::Warrant,
        Kind::Dshare,
        Kind::ProxyKey,
        Kind::R1,
        Kind::Commit,
        Kind::Partial,
        Kind::Sc,
        Kind::Lxsc,
        Kind::Params,
        Kind::Lxpub,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Warrant => "WARRANT",
            Kind::Dshare => "DSHARE",
            Kind::ProxyKey => "PROXYKEY",
            Kind::R1 => "R1",
            Kind::Commit => "COMMIT",
            Kind::Partial => "PARTIAL",
            Kind::Sc => "SC",
            Kind::Lxsc => "LXSC",
            Kind::Params => "PARAMS",
            Kind::Lxpub => "LXPUB",
        }
    }

    pub fn header(self) -> String {
        format!("PAIRMPS {} V1", self.as_str())
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Kind {
    type Err = EnvelopeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Kind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| EnvelopeError::UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvelopeError {
    #[error("not an envelope: bad header line")]
    BadHeader,
    #[error("unknown envelope kind {0:?}")]
    UnknownKind(String),
    #[error("expected a {expected} envelope, found {found}")]
    WrongKind { expected: Kind, found: Kind },
    #[error("bad hex payload: {0}")]
    BadHex(String),
}

pub fn armor(kind: Kind, payload: &[u8]) -> String {
    let hex = hex::encode(payload);
    let mut out = kind.header();
    out.push('\n');
    for chunk in hex.as_bytes().chunks(LINE) {
        out.push_str(std::str::from_utf8(chunk).expect("hex is ascii"));
        out.push('\n');
    }
    out
}

pub fn dearmor(text: &str) -> Result<(Kind, Vec<u8>), EnvelopeError> {
    let mut lines = text.lines();
    let header = lines.next().ok_or(EnvelopeError::BadHeader)?.trim_end();
    let mut parts = header.split(' ');
    let (Some("PAIRMPS"), Some(kind), Some("V1"), None) = (parts.next(), parts.next(), parts.next(), parts.next())
    else {
        return Err(EnvelopeError::BadHeader);
    };
    let kind = kind.parse()?;
    let hex: String = lines.map(str::trim).collect();
    let payload = hex::decode(hex).map_err(|e| EnvelopeError::BadHex(e.to_string()))?;
    Ok((kind, payload))
}

pub fn dearmor_kind(text: &str, expected: Kind) -> Result<Vec<u8>, EnvelopeError> {
    let (found, payload) = dearmor(text)?;
    if found != expected {
        return Err(EnvelopeError::WrongKind { expected, found });
    }
    Ok(payload)
}
