//! Binary (P5) and ASCII (P2) PGM with maxval 255.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{Dims, Image};
use crate::error::{Error, PgmError, Result};

const MAXVAL: u32 = 255;

#[derive(Clone, Copy, PartialEq)]
enum Encoding {
    Ascii,
    Binary,
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.buf.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.buf.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32, PgmError> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.buf.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(PgmError::MalformedHeader(format!("expected {what}")));
        }
        std::str::from_utf8(&self.buf[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| PgmError::MalformedHeader(format!("{what} out of range")))
    }
}

/// Decodes a PGM byte stream.
pub fn decode_pgm(bytes: &[u8]) -> Result<Image, PgmError> {
    let encoding = match bytes.get(..2) {
        Some(b"P5") => Encoding::Binary,
        Some(b"P2") => Encoding::Ascii,
        _ => return Err(PgmError::MalformedHeader("missing P2/P5 magic".into())),
    };
    let mut cur = Cursor { buf: bytes, pos: 2 };
    if !cur.buf.get(2).is_some_and(|b| b.is_ascii_whitespace() || *b == b'#') {
        return Err(PgmError::MalformedHeader("missing separator after magic".into()));
    }
    let width = cur.number("width")? as usize;
    let height = cur.number("height")? as usize;
    if width == 0 || height == 0 {
        return Err(PgmError::MalformedHeader(format!("zero dimension {width}x{height}")));
    }
    let maxval = cur.number("maxval")?;
    if maxval != MAXVAL {
        return Err(PgmError::UnsupportedMaxval(maxval));
    }
    let n = width.checked_mul(height).ok_or_else(|| PgmError::MalformedHeader("dimensions overflow".into()))?;

    let samples: Vec<f64> = match encoding {
        Encoding::Binary => {
            // exactly one whitespace byte separates the header from the raster
            if !cur.buf.get(cur.pos).is_some_and(u8::is_ascii_whitespace) {
                return Err(PgmError::MalformedHeader("missing separator before raster".into()));
            }
            let raster = &cur.buf[cur.pos + 1..];
            if raster.len() < n {
                return Err(PgmError::TruncatedPayload { expected: n, found: raster.len() });
            }
            raster[..n].iter().map(|&b| f64::from(b)).collect()
        }
        Encoding::Ascii => {
            let mut out = Vec::with_capacity(n);
            for _ in 0..n {
                cur.skip_space_and_comments();
                if cur.pos >= cur.buf.len() {
                    return Err(PgmError::TruncatedPayload { expected: n, found: out.len() });
                }
                let v = cur.number("sample")?;
                if v > MAXVAL {
                    return Err(PgmError::SampleOutOfRange(v));
                }
                out.push(f64::from(v));
            }
            out
        }
    };
    Ok(Image::from_raw(Dims::new(width, height), samples))
}

/// Encodes as binary P5. Samples are clamped to `[0, 255]` and rounded.
pub fn encode_pgm(x: &Image) -> Vec<u8> {
    let header = format!("P5\n{} {}\n{MAXVAL}\n", x.width(), x.height());
    let mut out = Vec::with_capacity(header.len() + x.data().len());
    out.extend_from_slice(header.as_bytes());
    out.extend(x.data().iter().map(|&v| v.clamp(0.0, 255.0).round() as u8));
    out
}

pub fn load_pgm(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(decode_pgm(&bytes)?)
}

pub fn save_pgm(path: impl AsRef<Path>, x: &Image) -> Result<()> {
    let path = path.as_ref();
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&encode_pgm(x)).map_err(|e| Error::io(path, e))
}
