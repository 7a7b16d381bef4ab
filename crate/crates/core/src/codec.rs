//! Length-prefixed binary framing shared by every wire format in the crate.
//!
//! A field is a `u32` little-endian byte length followed by the bytes. A
//! sequence is a `u32` little-endian element count followed by its fields.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("truncated input: needed {needed} more bytes at offset {offset}")]
    Truncated { offset: usize, needed: usize },
    #[error("{0} trailing bytes after the last field")]
    TrailingBytes(usize),
    #[error("bad header: expected {expected:?}")]
    BadHeader { expected: String },
    #[error("field {field}: {reason}")]
    InvalidField { field: &'static str, reason: String },
}

#[derive(Debug, Default, Clone)]
pub struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Starts the buffer with an unframed ascii header.
    pub fn with_header(header: &str) -> Self {
        Writer {
            buf: header.as_bytes().to_vec(),
        }
    }

    pub fn field(&mut self, bytes: &[u8]) -> &mut Self {
        let len = u32::try_from(bytes.len()).expect("field longer than 4 GiB");
        self.buf.extend_from_slice(&len.to_le_bytes());
        self.buf.extend_from_slice(bytes);
        self
    }

    pub fn count(&mut self, n: usize) -> &mut Self {
        let n = u32::try_from(n).expect("sequence longer than u32::MAX");
        self.buf.extend_from_slice(&n.to_le_bytes());
        self
    }

    pub fn u64_field(&mut self, v: u64) -> &mut Self {
        self.field(&v.to_le_bytes())
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

#[derive(Debug)]
pub struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        Reader { data, pos: 0 }
    }

    pub fn with_header(data: &'a [u8], header: &str) -> Result<Self, CodecError> {
        if !data.starts_with(header.as_bytes()) {
            return Err(CodecError::BadHeader {
                expected: header.to_string(),
            });
        }
        Ok(Reader {
            data,
            pos: header.len(),
        })
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        let remaining = self.data.len() - self.pos;
        if remaining < n {
            return Err(CodecError::Truncated {
                offset: self.pos,
                needed: n - remaining,
            });
        }
        let out = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32, CodecError> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes(b.try_into().expect("took 4 bytes")))
    }

    pub fn field(&mut self) -> Result<&'a [u8], CodecError> {
        let len = self.u32()? as usize;
        self.take(len)
    }

    pub fn count(&mut self) -> Result<usize, CodecError> {
        Ok(self.u32()? as usize)
    }

    pub fn u64_field(&mut self, name: &'static str) -> Result<u64, CodecError> {
        let b = self.field()?;
        let arr: [u8; 8] = b.try_into().map_err(|_| CodecError::InvalidField {
            field: name,
            reason: format!("expected 8 bytes, got {}", b.len()),
        })?;
        Ok(u64::from_le_bytes(arr))
    }

    pub fn fixed<const N: usize>(&mut self, name: &'static str) -> Result<[u8; N], CodecError> {
        let b = self.field()?;
        b.try_into().map_err(|_| CodecError::InvalidField {
            field: name,
            reason: format!("expected {N} bytes, got {}", b.len()),
        })
    }

    pub fn utf8(&mut self, name: &'static str) -> Result<&'a str, CodecError> {
        let b = self.field()?;
        std::str::from_utf8(b).map_err(|e| CodecError::InvalidField {
            field: name,
            reason: e.to_string(),
        })
    }

    pub fn finish(self) -> Result<(), CodecError> {
        match self.data.len() - self.pos {
            0 => Ok(()),
            n => Err(CodecError::TrailingBytes(n)),
        }
    }
}
