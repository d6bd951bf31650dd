//! Reading and writing PGM (portable graymap) files.
//!
//! Input accepts binary `P5` and ASCII `P2` with `maxval <= 65535`; output is
//! always ASCII `P2`, one image row per line.

use crate::error::{Error, Result};
use crate::image::{BoundaryMask, GrayImage};

/// Raw graymap samples before quantization to detector colors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub data: Vec<u16>,
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u64> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Parse(format!("PGM: expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Parse(format!("PGM: {what} out of range")))
    }
}

impl Pgm {
    pub fn parse(bytes: &[u8]) -> Result<Self> {
        let binary = match bytes.get(..2) {
            Some(b"P5") => true,
            Some(b"P2") => false,
            _ => return Err(Error::Parse("PGM: missing P2/P5 magic number".into())),
        };
        let mut h = Header { bytes, pos: 2 };
        let width = h.number("width")? as usize;
        let height = h.number("height")? as usize;
        let maxval = h.number("maxval")?;
        if width == 0 || height == 0 {
            return Err(Error::Parse(format!("PGM: empty image {width}x{height}")));
        }
        if maxval == 0 || maxval > 65535 {
            return Err(Error::Parse(format!(
                "PGM: maxval {maxval} not in 1..=65535"
            )));
        }
        let count = width
            .checked_mul(height)
            .ok_or_else(|| Error::Parse("PGM: dimensions overflow".into()))?;
        let data = if binary {
            // Exactly one whitespace byte separates the header from the raster.
            if !bytes.get(h.pos).is_some_and(u8::is_ascii_whitespace) {
                return Err(Error::Parse("PGM: missing whitespace before raster".into()));
            }
            let raster = &bytes[h.pos + 1..];
            let sample_bytes = if maxval > 255 { 2 } else { 1 };
            if raster.len() < count * sample_bytes {
                return Err(Error::Parse(format!(
                    "PGM: raster truncated, need {} bytes, have {}",
                    count * sample_bytes,
                    raster.len()
                )));
            }
            if sample_bytes == 1 {
                raster[..count].iter().map(|&b| b as u16).collect()
            } else {
                raster[..2 * count]
                    .chunks_exact(2)
                    .map(|c| u16::from_be_bytes([c[0], c[1]]))
                    .collect()
            }
        } else {
            let mut data = Vec::with_capacity(count);
            for _ in 0..count {
                let v = h.number("sample")?;
                data.push(v as u16);
            }
            data
        };
        if let Some(&v) = data.iter().find(|&&v| v as u64 > maxval) {
            return Err(Error::Parse(format!(
                "PGM: sample {v} exceeds maxval {maxval}"
            )));
        }
        Ok(Self {
            width,
            height,
            maxval: maxval as u16,
            data,
        })
    }

    /// Maps source levels to `num_colors` detector colors by
    /// `floor(level * N / (maxval + 1))`.
    pub fn quantize(&self, num_colors: usize) -> Result<GrayImage> {
        let scale = self.maxval as u64 + 1;
        let pixels = self
            .data
            .iter()
            .map(|&v| (v as u64 * num_colors as u64 / scale) as u16)
            .collect();
        GrayImage::new(self.width, self.height, num_colors, pixels)
    }

    /// Graymap with `maxval = N - 1`, so quantizing back to `N` colors is the identity.
    pub fn from_image(img: &GrayImage) -> Self {
        Self {
            width: img.width(),
            height: img.height(),
            maxval: (img.num_colors().max(2) - 1) as u16,
            data: img.pixels().to_vec(),
        }
    }

    /// Mask as 0/255.
    pub fn from_mask(mask: &BoundaryMask) -> Self {
        Self {
            width: mask.width(),
            height: mask.height(),
            maxval: 255,
            data: mask
                .bits()
                .iter()
                .map(|&b| if b { 255 } else { 0 })
                .collect(),
        }
    }

    /// ASCII `P2` encoding.
    pub fn to_p2(&self) -> Vec<u8> {
        let mut out = format!("P2\n{} {}\n{}\n", self.width, self.height, self.maxval);
        for row in self.data.chunks(self.width) {
            let cells: Vec<String> = row.iter().map(u16::to_string).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out.into_bytes()
    }
}
