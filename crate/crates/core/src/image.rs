//! Gray-level images, detector windows and boundary masks.

use crate::error::{Error, Result};

/// Row-major image of gray-level indices in `[0, num_colors)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    num_colors: usize,
    pixels: Vec<u16>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, num_colors: usize, pixels: Vec<u16>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidGeometry(format!(
                "image must be non-empty, got {width}x{height}"
            )));
        }
        if num_colors == 0 || num_colors > u16::MAX as usize + 1 {
            return Err(Error::InvalidConfig(format!(
                "unsupported color count {num_colors}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::LengthMismatch {
                expected: width * height,
                got: pixels.len(),
            });
        }
        if let Some(&p) = pixels.iter().find(|&&p| p as usize >= num_colors) {
            return Err(Error::ColorOutOfRange {
                color: p as usize,
                num_colors,
            });
        }
        Ok(Self {
            width,
            height,
            num_colors,
            pixels,
        })
    }

    /// Constant image.
    pub fn filled(width: usize, height: usize, num_colors: usize, color: u16) -> Result<Self> {
        Self::new(width, height, num_colors, vec![color; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn num_colors(&self) -> usize {
        self.num_colors
    }

    pub fn pixels(&self) -> &[u16] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u16 {
        self.pixels[y * self.width + x]
    }

    pub(crate) fn set(&mut self, x: usize, y: usize, value: u16) {
        self.pixels[y * self.width + x] = value;
    }

    /// The `size x size` window centred on `(x, y)`, or `None` when it does
    /// not fit inside the image.
    pub fn window(&self, x: usize, y: usize, size: usize) -> Option<Window> {
        let r = size / 2;
        if size.is_multiple_of(2) || x < r || y < r || x + r >= self.width || y + r >= self.height {
            return None;
        }
        let mut values = Vec::with_capacity(size * size);
        for wy in y - r..=y + r {
            values
                .extend_from_slice(&self.pixels[wy * self.width + x - r..=wy * self.width + x + r]);
        }
        Some(Window {
            size,
            values,
            center: (x, y),
        })
    }
}

/// A `k x k` excerpt of an image, `k` odd.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    size: usize,
    values: Vec<u16>,
    center: (usize, usize),
}

impl Window {
    /// Window from row-major values; the center coordinate defaults to `(0, 0)`.
    pub fn new(size: usize, values: Vec<u16>) -> Result<Self> {
        if size == 0 || size.is_multiple_of(2) {
            return Err(Error::InvalidWindowSize(size));
        }
        if values.len() != size * size {
            return Err(Error::LengthMismatch {
                expected: size * size,
                got: values.len(),
            });
        }
        Ok(Self {
            size,
            values,
            center: (0, 0),
        })
    }

    pub fn with_center(mut self, x: usize, y: usize) -> Self {
        self.center = (x, y);
        self
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn values(&self) -> &[u16] {
        &self.values
    }

    pub fn center(&self) -> (usize, usize) {
        self.center
    }

    /// Values in ascending order. The detectors only depend on this, which
    /// makes them independent of pixel arrangement down to the last bit.
    pub fn sorted_values(&self) -> Vec<u16> {
        let mut v = self.values.clone();
        v.sort_unstable();
        v
    }
}

/// Per-pixel boolean ground truth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BoundaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::LengthMismatch {
                expected: width * height,
                got: bits.len(),
            });
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    /// Marks pixels with a 4-neighbour of a different color.
    pub fn from_color_changes(img: &GrayImage) -> Self {
        let (w, h) = (img.width(), img.height());
        let mut bits = vec![false; w * h];
        for y in 0..h {
            for x in 0..w {
                let c = img.get(x, y);
                let differs = (x > 0 && img.get(x - 1, y) != c)
                    || (x + 1 < w && img.get(x + 1, y) != c)
                    || (y > 0 && img.get(x, y - 1) != c)
                    || (y + 1 < h && img.get(x, y + 1) != c);
                bits[y * w + x] = differs;
            }
        }
        Self {
            width: w,
            height: h,
            bits,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }
}
