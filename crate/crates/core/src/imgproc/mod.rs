//! Image decoding, color-space conversion and the filter kernels the
//! feature extractors are built on.
//!
//! Everything here works on [`Plane`]s of `f64`, row-major. Values keep the
//! scale they were produced in (`0..=255`, `0..=1` or hue degrees); the
//! [`ScaleTag`] on each [`Raster`] channel records which.

mod color;
mod dct;
mod filters;
mod lbp;
mod nlm;

pub use color::{rgb_to_hsv, rgb_to_ycrcb, to_grayscale};
pub use dct::{dct8x8, idct8x8, BLOCK_LEN};
pub use filters::{
    canny, gaussian_blur, gaussian_kernel, laplacian, sobel_xy, CannyThresholds,
    CANNY_GAUSSIAN_SIGMA,
};
pub use lbp::lbp_codes;
pub use nlm::{nlm_denoise, NlmParams};

use image::{DynamicImage, ImageFormat};

/// Smallest accepted width or height of a decoded image.
pub const MIN_DIM: usize = 16;

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum ImageError {
    #[error("unsupported image format (only PNG and JPEG are accepted)")]
    UnsupportedFormat,
    #[error("image is {width}x{height}, both dimensions must be at least {MIN_DIM}")]
    TooSmall { width: usize, height: usize },
    #[error("corrupt image data: {0}")]
    CorruptData(String),
    #[error("invalid canny thresholds: low {low} must be below high {high}")]
    InvalidThresholds { low: f64, high: f64 },
    #[error("invalid non-local means window: {0}")]
    InvalidWindow(String),
    #[error("expected an 8x8 block (64 values), got {0} values")]
    WrongBlockSize(usize),
    #[error("plane values must be finite")]
    NonFinite,
    #[error("plane data length {len} does not match {width}x{height}")]
    ShapeMismatch { width: usize, height: usize, len: usize },
}

pub type Result<T> = std::result::Result<T, ImageError>;

/// A single-channel grid of finite values, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(ImageError::ShapeMismatch { width, height, len: data.len() });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(ImageError::NonFinite);
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        assert!(value.is_finite());
        Self { width, height, data: vec![value; width * height] }
    }

    /// Builds a plane by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        debug_assert!(data.iter().all(|v| v.is_finite()));
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn into_values(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Value at `(x, y)` with coordinates clamped into the plane (replicate border).
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.data[cy * self.width + cx]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Plane {
        Plane { width: self.width, height: self.height, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    /// Row-major copy with rows and columns swapped.
    pub fn transpose(&self) -> Plane {
        Plane::from_fn(self.height, self.width, |x, y| self.get(y, x))
    }
}

/// Value range of one raster channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleTag {
    /// `0..=255`
    U8,
    /// `0..=1`
    Unit,
    /// `0..360` degrees
    HueDeg,
}

impl ScaleTag {
    pub fn range(self) -> (f64, f64) {
        match self {
            ScaleTag::U8 => (0.0, 255.0),
            ScaleTag::Unit => (0.0, 1.0),
            ScaleTag::HueDeg => (0.0, 360.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColorSpace {
    Rgb,
    Hsv,
    YCrCb,
}

/// A decoded image: equally sized channel planes plus the scale of each channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    space: ColorSpace,
    channels: Vec<Plane>,
    scales: Vec<ScaleTag>,
}

impl Raster {
    pub(crate) fn from_parts(space: ColorSpace, channels: Vec<Plane>, scales: Vec<ScaleTag>) -> Self {
        debug_assert_eq!(channels.len(), scales.len());
        debug_assert!(channels
            .iter()
            .all(|c| c.width == channels[0].width && c.height == channels[0].height));
        Self { space, channels, scales }
    }

    /// RGB raster from interleaved 8-bit samples.
    pub fn from_rgb8(width: usize, height: usize, rgb: &[u8]) -> Result<Self> {
        check_size(width, height)?;
        if rgb.len() != width * height * 3 {
            return Err(ImageError::ShapeMismatch { width, height, len: rgb.len() / 3 });
        }
        let channel = |c: usize| Plane {
            width,
            height,
            data: rgb.iter().skip(c).step_by(3).map(|&v| f64::from(v)).collect(),
        };
        Ok(Self::from_parts(
            ColorSpace::Rgb,
            vec![channel(0), channel(1), channel(2)],
            vec![ScaleTag::U8; 3],
        ))
    }

    /// RGB raster from three U8-scale planes. Values are checked against `0..=255`.
    pub fn from_rgb_planes(r: Plane, g: Plane, b: Plane) -> Result<Self> {
        check_size(r.width, r.height)?;
        for p in [&g, &b] {
            if p.width != r.width || p.height != r.height {
                return Err(ImageError::ShapeMismatch { width: r.width, height: r.height, len: p.len() });
            }
        }
        if [&r, &g, &b].iter().any(|p| p.data.iter().any(|&v| !(0.0..=255.0).contains(&v))) {
            return Err(ImageError::CorruptData("RGB value outside 0..=255".into()));
        }
        Ok(Self::from_parts(ColorSpace::Rgb, vec![r, g, b], vec![ScaleTag::U8; 3]))
    }

    pub fn width(&self) -> usize {
        self.channels[0].width
    }

    pub fn height(&self) -> usize {
        self.channels[0].height
    }

    pub fn space(&self) -> ColorSpace {
        self.space
    }

    pub fn channels(&self) -> &[Plane] {
        &self.channels
    }

    pub fn channel(&self, i: usize) -> &Plane {
        &self.channels[i]
    }

    pub fn scale(&self, i: usize) -> ScaleTag {
        self.scales[i]
    }

    /// Rotates every channel by 90 degrees clockwise.
    pub fn rotate90(&self) -> Raster {
        let channels = self
            .channels
            .iter()
            .map(|p| Plane::from_fn(p.height, p.width, |x, y| p.get(y, p.height - 1 - x)))
            .collect();
        Raster { space: self.space, channels, scales: self.scales.clone() }
    }
}

fn check_size(width: usize, height: usize) -> Result<()> {
    if width < MIN_DIM || height < MIN_DIM {
        Err(ImageError::TooSmall { width, height })
    } else {
        Ok(())
    }
}

/// Decodes a PNG or JPEG byte stream into an RGB raster on the U8 scale.
///
/// Alpha is dropped and grayscale sources are replicated to three channels.
pub fn decode_image(bytes: &[u8]) -> Result<Raster> {
    let format = image::guess_format(bytes).map_err(|_| ImageError::UnsupportedFormat)?;
    if !matches!(format, ImageFormat::Png | ImageFormat::Jpeg) {
        return Err(ImageError::UnsupportedFormat);
    }
    let decoded: DynamicImage = image::load_from_memory_with_format(bytes, format)
        .map_err(|e| ImageError::CorruptData(e.to_string()))?;
    let rgb = decoded.to_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    Raster::from_rgb8(w, h, rgb.as_raw())
}
