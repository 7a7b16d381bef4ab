use std::io::Write;
use std::path::Path;

use pairmps::envelope::{self, Kind};
use pairmps::warrant::Warrant;

use crate::error::{CliError, Result};

pub fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    let bytes = read(path)?;
    String::from_utf8(bytes).map_err(|_| CliError::malformed(format!("{}: not utf-8 text", path.display())))
}

pub fn read_envelope(path: &Path, kind: Kind) -> Result<Vec<u8>> {
    envelope::dearmor_kind(&read_text(path)?, kind).map_err(|e| CliError::from(e).context(path.display()))
}

/// Accepts both the envelope form and the standalone warrant file form.
pub fn read_warrant(path: &Path) -> Result<Warrant> {
    let text = read_text(path)?;
    let parsed = match envelope::dearmor_kind(&text, Kind::Warrant) {
        Ok(payload) => Warrant::decode(&payload),
        Err(_) => Warrant::from_armored(&text),
    };
    parsed.map_err(|e| CliError::from(e).context(path.display()))
}

/// Write-temp-then-rename in the destination directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// Writes an envelope to `out`, or prints it when no path is given.
pub fn emit_envelope(out: Option<&Path>, kind: Kind, payload: &[u8]) -> Result<()> {
    let text = envelope::armor(kind, payload);
    match out {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_and_leaves_no_temp_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.env");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn missing_file_is_a_missing_prerequisite() {
        let err = read(Path::new("/nonexistent/pairmps")).unwrap_err();
        assert_eq!(err.exit, crate::error::Exit::Missing);
    }
}
