//! Binary framing shared by every serialized object.
//!
//! Layout: `"AIBE" ‖ version ‖ object byte [‖ 'S' for secret objects] ‖ fields`, where each
//! field is a big-endian `u16` length followed by that many bytes.

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"AIBE";
pub const VERSION: u8 = 0x01;
/// Marker byte following the object byte of master-secret and recovery-manager objects.
pub const SECRET_MARKER: u8 = b'S';

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum ObjectKind {
    CurveParams = 0x00,
    WatersPublicKey = 0x10,
    WatersMasterKey = 0x11,
    WatersUserKey = 0x12,
    WatersCiphertext = 0x13,
    AnonPublicKey = 0x20,
    AnonMasterKey = 0x21,
    AnonUserKey = 0x22,
    AnonCiphertext = 0x23,
    AibeirCiphertext = 0x30,
    AibeirPublicKey = 0x31,
    AibeirMasterKey = 0x32,
    AibeirUserKey = 0x33,
    IrmKey = 0x34,
}

impl ObjectKind {
    pub fn from_byte(b: u8) -> Option<Self> {
        use ObjectKind::*;
        Some(match b {
            0x00 => CurveParams,
            0x10 => WatersPublicKey,
            0x11 => WatersMasterKey,
            0x12 => WatersUserKey,
            0x13 => WatersCiphertext,
            0x20 => AnonPublicKey,
            0x21 => AnonMasterKey,
            0x22 => AnonUserKey,
            0x23 => AnonCiphertext,
            0x30 => AibeirCiphertext,
            0x31 => AibeirPublicKey,
            0x32 => AibeirMasterKey,
            0x33 => AibeirUserKey,
            0x34 => IrmKey,
            _ => return None,
        })
    }

    pub fn is_secret(self) -> bool {
        use ObjectKind::*;
        matches!(
            self,
            WatersMasterKey | AnonMasterKey | AibeirMasterKey | IrmKey
        )
    }

    pub fn name(self) -> &'static str {
        use ObjectKind::*;
        match self {
            CurveParams => "params",
            WatersPublicKey => "testable-public-key",
            WatersMasterKey => "testable-master-key",
            WatersUserKey => "testable-user-key",
            WatersCiphertext => "testable-ciphertext",
            AnonPublicKey => "anonymous-public-key",
            AnonMasterKey => "anonymous-master-key",
            AnonUserKey => "anonymous-user-key",
            AnonCiphertext => "anonymous-ciphertext",
            AibeirCiphertext => "ciphertext",
            AibeirPublicKey => "mpk",
            AibeirMasterKey => "msk",
            AibeirUserKey => "user-key",
            IrmKey => "irm-key",
        }
    }

    pub(crate) fn header_len(self) -> usize {
        6 + usize::from(self.is_secret())
    }
}

/// Reads the object kind from a framed buffer, checking magic, version and secret marker.
pub fn peek_kind(bytes: &[u8]) -> Result<ObjectKind> {
    if bytes.len() < 6 {
        return Err(Error::framing("truncated header"));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::framing("bad magic"));
    }
    if bytes[4] != VERSION {
        return Err(Error::framing(format!(
            "unsupported version 0x{:02x}",
            bytes[4]
        )));
    }
    let kind = ObjectKind::from_byte(bytes[5])
        .ok_or_else(|| Error::framing(format!("unknown object byte 0x{:02x}", bytes[5])))?;
    if kind.is_secret() && bytes.get(6) != Some(&SECRET_MARKER) {
        return Err(Error::framing("secret object without marker"));
    }
    Ok(kind)
}

pub struct Writer {
    buf: Vec<u8>,
    overflow: bool,
}

impl Writer {
    pub fn new(kind: ObjectKind) -> Self {
        let mut buf = Vec::with_capacity(64);
        buf.extend_from_slice(MAGIC);
        buf.push(VERSION);
        buf.push(kind as u8);
        if kind.is_secret() {
            buf.push(SECRET_MARKER);
        }
        Writer {
            buf,
            overflow: false,
        }
    }

    /// Appends a `u16`-length-prefixed field.
    pub fn field(&mut self, bytes: &[u8]) {
        match u16::try_from(bytes.len()) {
            Ok(len) => {
                self.buf.extend_from_slice(&len.to_be_bytes());
                self.buf.extend_from_slice(bytes);
            }
            Err(_) => self.overflow = true,
        }
    }

    /// Appends bytes without a length prefix (self-delimiting encodings).
    pub fn raw(&mut self, bytes: &[u8]) {
        self.buf.extend_from_slice(bytes);
    }

    pub fn finish(self) -> Result<Vec<u8>> {
        if self.overflow {
            return Err(Error::framing("field longer than 65535 bytes"));
        }
        Ok(self.buf)
    }
}

pub struct Reader<'a> {
    rest: &'a [u8],
}

impl<'a> Reader<'a> {
    pub fn new(bytes: &'a [u8], expected: ObjectKind) -> Result<Self> {
        let kind = peek_kind(bytes)?;
        if kind != expected {
            return Err(Error::framing(format!(
                "expected object 0x{:02x}, found 0x{:02x}",
                expected as u8, kind as u8
            )));
        }
        Ok(Reader {
            rest: &bytes[kind.header_len()..],
        })
    }

    /// Reader over an unframed byte string.
    pub fn bare(bytes: &'a [u8]) -> Self {
        Reader { rest: bytes }
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.rest.len() < n {
            return Err(Error::framing(format!(
                "truncated: need {n} bytes, have {}",
                self.rest.len()
            )));
        }
        let (head, tail) = self.rest.split_at(n);
        self.rest = tail;
        Ok(head)
    }

    pub fn peek_u8(&self) -> Result<u8> {
        self.rest
            .first()
            .copied()
            .ok_or_else(|| Error::framing("truncated"))
    }

    pub fn u16(&mut self) -> Result<u16> {
        let b = self.take(2)?;
        Ok(u16::from_be_bytes([b[0], b[1]]))
    }

    pub fn field(&mut self) -> Result<&'a [u8]> {
        let len = self.u16()? as usize;
        self.take(len)
    }

    pub fn remaining(&self) -> usize {
        self.rest.len()
    }

    pub fn finish(self) -> Result<()> {
        if self.rest.is_empty() {
            Ok(())
        } else {
            Err(Error::framing(format!(
                "{} trailing bytes",
                self.rest.len()
            )))
        }
    }
}

/// Segment lengths of a framed object, for inspection without parameters.
pub fn field_lengths(bytes: &[u8]) -> Result<(ObjectKind, Vec<usize>)> {
    let kind = peek_kind(bytes)?;
    let mut r = Reader::bare(&bytes[kind.header_len()..]);
    let mut lens = Vec::new();
    while r.remaining() > 0 {
        lens.push(r.field()?.len());
    }
    Ok((kind, lens))
}
