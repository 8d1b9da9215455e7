//! Canonical binary encoding shared by every message, state and proof file.
//!
//! All integers are big-endian. Variable-length byte strings carry a 4-byte
//! length prefix. Framed records start with [`MAGIC`], a version byte and a
//! record-kind byte so files are self-describing.

use thiserror::Error;

use crate::groups::{G2Element, GroupElement, Scalar};

pub const MAGIC: [u8; 4] = *b"ENYM";
pub const FORMAT_VERSION: u8 = 1;

/// Upper bound on any single length-prefixed field. Keeps a corrupted length
/// from triggering a huge allocation.
const MAX_FIELD_LEN: usize = 1 << 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error("unexpected end of input while reading {0}")]
    Truncated(&'static str),
    #[error("{0} trailing bytes after record")]
    TrailingBytes(usize),
    #[error("bad magic bytes")]
    BadMagic,
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u8),
    #[error("expected record kind {expected:#04x}, found {found:#04x}")]
    WrongKind { expected: u8, found: u8 },
    #[error("invalid scalar encoding (not reduced modulo the group order)")]
    InvalidScalar,
    #[error("invalid group element encoding (off curve or outside the prime-order subgroup)")]
    InvalidPoint,
    #[error("invalid {0}")]
    Invalid(&'static str),
    #[error("field length {0} exceeds limit")]
    Oversize(usize),
}

/// Record kinds for framed files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum RecordKind {
    IssuerState = 0x01,
    WalletState = 0x02,
    RelyingPartyState = 0x03,
    IssuerPublic = 0x04,
    RelyingPartyInfo = 0x05,
    EnrollmentRequest = 0x10,
    EnrollmentResponse = 0x11,
    Credential = 0x12,
    Presentation = 0x13,
    TransferPackage = 0x20,
    BackupBlob = 0x21,
    TransferPublicKey = 0x22,
    TransferSecretKey = 0x23,
}

#[derive(Default)]
pub struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn u8(&mut self, v: u8) -> &mut Self {
        self.buf.push(v);
        self
    }

    pub fn u32(&mut self, v: u32) -> &mut Self {
        self.buf.extend_from_slice(&v.to_be_bytes());
        self
    }

    pub fn u64(&mut self, v: u64) -> &mut Self {
        self.buf.extend_from_slice(&v.to_be_bytes());
        self
    }

    pub fn raw(&mut self, bytes: &[u8]) -> &mut Self {
        self.buf.extend_from_slice(bytes);
        self
    }

    /// Length-prefixed byte string.
    pub fn bytes(&mut self, bytes: &[u8]) -> &mut Self {
        self.u32(bytes.len() as u32);
        self.raw(bytes)
    }

    pub fn str(&mut self, s: &str) -> &mut Self {
        self.bytes(s.as_bytes())
    }

    pub fn scalar(&mut self, s: &Scalar) -> &mut Self {
        self.raw(&s.to_bytes())
    }

    pub fn point(&mut self, p: &GroupElement) -> &mut Self {
        self.raw(&p.to_bytes())
    }

    pub fn g2(&mut self, p: &G2Element) -> &mut Self {
        self.raw(&p.to_bytes())
    }

    pub fn len_of(&mut self, n: usize) -> &mut Self {
        self.u32(n as u32)
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

pub struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0 }
    }

    pub fn remaining(&self) -> usize {
        self.data.len() - self.pos
    }

    pub fn take(&mut self, n: usize, what: &'static str) -> Result<&'a [u8], DecodeError> {
        if self.remaining() < n {
            return Err(DecodeError::Truncated(what));
        }
        let out = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    pub fn array<const N: usize>(&mut self, what: &'static str) -> Result<[u8; N], DecodeError> {
        let mut out = [0u8; N];
        out.copy_from_slice(self.take(N, what)?);
        Ok(out)
    }

    pub fn u8(&mut self, what: &'static str) -> Result<u8, DecodeError> {
        Ok(self.take(1, what)?[0])
    }

    pub fn u32(&mut self, what: &'static str) -> Result<u32, DecodeError> {
        Ok(u32::from_be_bytes(self.array(what)?))
    }

    pub fn u64(&mut self, what: &'static str) -> Result<u64, DecodeError> {
        Ok(u64::from_be_bytes(self.array(what)?))
    }

    pub fn bytes(&mut self, what: &'static str) -> Result<&'a [u8], DecodeError> {
        let len = self.len(what)?;
        self.take(len, what)
    }

    pub fn string(&mut self, what: &'static str) -> Result<String, DecodeError> {
        let raw = self.bytes(what)?;
        String::from_utf8(raw.to_vec()).map_err(|_| DecodeError::Invalid(what))
    }

    /// A count or length prefix, bounded so corrupt input cannot allocate wildly.
    pub fn len(&mut self, what: &'static str) -> Result<usize, DecodeError> {
        let n = self.u32(what)? as usize;
        if n > MAX_FIELD_LEN {
            return Err(DecodeError::Oversize(n));
        }
        Ok(n)
    }

    pub fn scalar(&mut self) -> Result<Scalar, DecodeError> {
        Scalar::from_bytes(&self.array("scalar")?)
    }

    pub fn point(&mut self) -> Result<GroupElement, DecodeError> {
        GroupElement::from_bytes(&self.array("group element")?)
    }

    pub fn g2(&mut self) -> Result<G2Element, DecodeError> {
        G2Element::from_bytes(&self.array("G2 element")?)
    }

    pub fn finish(self) -> Result<(), DecodeError> {
        match self.remaining() {
            0 => Ok(()),
            n => Err(DecodeError::TrailingBytes(n)),
        }
    }
}

/// Types with a canonical byte encoding.
pub trait Encode {
    fn encode(&self, w: &mut Writer);

    fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        self.encode(&mut w);
        w.finish()
    }
}

pub trait Decode: Sized {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError>;

    fn from_bytes(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut r = Reader::new(bytes);
        let v = Self::decode(&mut r)?;
        r.finish()?;
        Ok(v)
    }
}

/// Wrap a body in the `magic || version || kind || length || body` frame.
pub fn frame(kind: RecordKind, body: &[u8]) -> Vec<u8> {
    let mut w = Writer::new();
    w.raw(&MAGIC).u8(FORMAT_VERSION).u8(kind as u8).bytes(body);
    w.finish()
}

pub fn unframe(kind: RecordKind, data: &[u8]) -> Result<&[u8], DecodeError> {
    let mut r = Reader::new(data);
    if r.take(4, "magic")? != MAGIC {
        return Err(DecodeError::BadMagic);
    }
    let version = r.u8("version")?;
    if version != FORMAT_VERSION {
        return Err(DecodeError::UnsupportedVersion(version));
    }
    let found = r.u8("record kind")?;
    if found != kind as u8 {
        return Err(DecodeError::WrongKind { expected: kind as u8, found });
    }
    let body = r.bytes("record body")?;
    r.finish()?;
    Ok(body)
}

/// Framed file helpers for any encodable type.
pub trait Record: Encode + Decode {
    const KIND: RecordKind;

    fn to_record(&self) -> Vec<u8> {
        frame(Self::KIND, &self.to_bytes())
    }

    fn from_record(data: &[u8]) -> Result<Self, DecodeError> {
        Self::from_bytes(unframe(Self::KIND, data)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_round_trip_and_rejections() {
        let framed = frame(RecordKind::Credential, b"body");
        assert_eq!(unframe(RecordKind::Credential, &framed).unwrap(), b"body");
        assert!(matches!(
            unframe(RecordKind::Presentation, &framed),
            Err(DecodeError::WrongKind { .. })
        ));
        let mut bad = framed.clone();
        bad[0] ^= 1;
        assert_eq!(unframe(RecordKind::Credential, &bad), Err(DecodeError::BadMagic));
        let mut future = framed.clone();
        future[4] = 9;
        assert_eq!(
            unframe(RecordKind::Credential, &future),
            Err(DecodeError::UnsupportedVersion(9))
        );
        assert!(unframe(RecordKind::Credential, &framed[..framed.len() - 1]).is_err());
    }

    #[test]
    fn oversized_length_is_rejected_without_allocating() {
        let mut w = Writer::new();
        w.u32(u32::MAX);
        let data = w.finish();
        let mut r = Reader::new(&data);
        assert!(matches!(r.bytes("x"), Err(DecodeError::Oversize(_))));
    }
}
