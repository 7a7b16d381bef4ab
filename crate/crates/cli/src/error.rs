use std::fmt;
use std::io;
use std::path::Path;

use pairmps::backend::BackendError;
use pairmps::codec::CodecError;
use pairmps::envelope::EnvelopeError;
use pairmps::idmpms::IdmpmsError;
use pairmps::liuxiao::LxError;
use pairmps::warrant::WarrantError;

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    VerifyFailed = 2,
    Malformed = 3,
    Missing = 4,
}

#[derive(Debug)]
pub struct CliError {
    pub exit: Exit,
    pub msg: String,
}

impl CliError {
    pub fn verify(msg: impl Into<String>) -> Self {
        CliError {
            exit: Exit::VerifyFailed,
            msg: msg.into(),
        }
    }

    pub fn malformed(msg: impl Into<String>) -> Self {
        CliError {
            exit: Exit::Malformed,
            msg: msg.into(),
        }
    }

    pub fn missing(msg: impl Into<String>) -> Self {
        CliError {
            exit: Exit::Missing,
            msg: msg.into(),
        }
    }

    pub fn io(path: &Path, e: io::Error) -> Self {
        let msg = format!("{}: {e}", path.display());
        match e.kind() {
            io::ErrorKind::NotFound => CliError::missing(msg),
            _ => CliError::malformed(msg),
        }
    }

    pub fn context(self, what: impl fmt::Display) -> Self {
        CliError {
            msg: format!("{what}: {}", self.msg),
            ..self
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.msg)
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

impl From<IdmpmsError> for CliError {
    fn from(e: IdmpmsError) -> Self {
        use IdmpmsError::*;
        let msg = e.to_string();
        match e {
            VerifyFailed | DecryptFailed | InvalidShare { .. } | InvalidPartial { .. } | InvalidKey(_)
            | WarrantExpired { .. } | WarrantMismatch => CliError::verify(msg),
            MissingShare(_) | MissingBroadcast(_) | MissingPartial(_) => CliError::missing(msg),
            Warrant(_) | Encoding(_) | Codec(_) | InvalidParams(_) | ZeroScalar | SignerNotInWarrant(_)
            | ProxyNotInWarrant(_) | DuplicateContribution(_) => CliError::malformed(msg),
        }
    }
}

impl From<LxError> for CliError {
    fn from(e: LxError) -> Self {
        use LxError::*;
        let msg = e.to_string();
        match e {
            VerifyFailed | DecryptFailed | InvalidShare { .. } | WarrantExpired { .. } => CliError::verify(msg),
            MissingShare(_) | MissingBroadcast(_) | MissingPartial(_) | MissingPublicKey(_) => CliError::missing(msg),
            Warrant(_) | Encoding(_) | Codec(_) | ZeroScalar | SignerNotInWarrant(_) | ProxyNotInWarrant(_)
            | DuplicateContribution(_) => CliError::malformed(msg),
        }
    }
}

macro_rules! malformed_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::malformed(e.to_string())
            }
        }
    )*};
}

malformed_from!(EnvelopeError, CodecError, BackendError, WarrantError);
