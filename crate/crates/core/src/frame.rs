//! Depth frame and sequence containers.

use crate::error::{Error, Result};

/// Only 8-bit depth planes are supported.
pub const SUPPORTED_BIT_DEPTH: u8 = 8;

/// Smallest frame edge the rate-control pipeline accepts.
pub const MIN_CODABLE_DIM: usize = 8;

pub const DEFAULT_FPS: f64 = 30.0;

/// Geometry and timing of a depth sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct SequenceMeta {
    pub width: usize,
    pub height: usize,
    /// Number of frames; `0` on input means "all available".
    pub frame_count: usize,
    pub fps: f64,
    pub bit_depth: u8,
}

impl SequenceMeta {
    pub fn new(width: usize, height: usize) -> Self {
        SequenceMeta {
            width,
            height,
            frame_count: 0,
            fps: DEFAULT_FPS,
            bit_depth: SUPPORTED_BIT_DEPTH,
        }
    }

    pub fn with_frames(mut self, frame_count: usize) -> Self {
        self.frame_count = frame_count;
        self
    }

    pub fn with_fps(mut self, fps: f64) -> Self {
        self.fps = fps;
        self
    }

    #[inline]
    pub fn pixels_per_frame(&self) -> usize {
        self.width * self.height
    }

    /// Checks that the geometry describes some readable sequence.
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::validation(format!(
                "frame dimensions must be positive, got {}x{}",
                self.width, self.height
            )));
        }
        if self.bit_depth != SUPPORTED_BIT_DEPTH {
            return Err(Error::validation(format!(
                "bit depth {} unsupported (only 8)",
                self.bit_depth
            )));
        }
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return Err(Error::validation(format!("fps must be positive, got {}", self.fps)));
        }
        Ok(())
    }

    /// Stricter check used by the codec and rate-control paths: at least
    /// 8x8 pixels and two frames.
    pub fn require_codable(&self) -> Result<()> {
        self.validate()?;
        if self.width < MIN_CODABLE_DIM || self.height < MIN_CODABLE_DIM {
            return Err(Error::validation(format!(
                "frames must be at least {MIN_CODABLE_DIM}x{MIN_CODABLE_DIM}, got {}x{}",
                self.width, self.height
            )));
        }
        if self.frame_count < 2 {
            return Err(Error::validation(format!(
                "at least 2 frames required, got {}",
                self.frame_count
            )));
        }
        Ok(())
    }
}

/// One grayscale depth plane with 8-bit samples.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DepthFrame {
    width: usize,
    height: usize,
    bit_depth: u8,
    pixels: Vec<u8>,
}

impl DepthFrame {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::validation(format!(
                "frame dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::validation(format!(
                "frame {width}x{height} needs {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(DepthFrame {
            width,
            height,
            bit_depth: SUPPORTED_BIT_DEPTH,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn bit_depth(&self) -> u8 {
        self.bit_depth
    }

    /// Largest representable sample, `2^bit_depth - 1`.
    #[inline]
    pub fn max_value(&self) -> u32 {
        (1u32 << self.bit_depth) - 1
    }

    #[inline]
    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn same_shape(&self, other: &DepthFrame) -> bool {
        self.width == other.width && self.height == other.height && self.bit_depth == other.bit_depth
    }

    pub(crate) fn ensure_same_shape(&self, other: &DepthFrame, what: &str) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::validation(format!(
                "{what}: dimension mismatch {}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )))
        }
    }
}

/// Ordered frames sharing one geometry.
#[derive(Clone, Debug, PartialEq)]
pub struct DepthSequence {
    meta: SequenceMeta,
    frames: Vec<DepthFrame>,
}

impl DepthSequence {
    pub fn new(frames: Vec<DepthFrame>, fps: f64) -> Result<Self> {
        let first = frames
            .first()
            .ok_or_else(|| Error::validation("sequence must contain at least one frame"))?;
        for (i, f) in frames.iter().enumerate().skip(1) {
            if !f.same_shape(first) {
                return Err(Error::validation(format!(
                    "frame {i} is {}x{}, expected {}x{}",
                    f.width(),
                    f.height(),
                    first.width(),
                    first.height()
                )));
            }
        }
        let meta = SequenceMeta {
            width: first.width(),
            height: first.height(),
            frame_count: frames.len(),
            fps,
            bit_depth: first.bit_depth(),
        };
        meta.validate()?;
        Ok(DepthSequence { meta, frames })
    }

    #[inline]
    pub fn meta(&self) -> &SequenceMeta {
        &self.meta
    }

    #[inline]
    pub fn frames(&self) -> &[DepthFrame] {
        &self.frames
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    #[inline]
    pub fn fps(&self) -> f64 {
        self.meta.fps
    }

    pub fn into_frames(self) -> Vec<DepthFrame> {
        self.frames
    }

    pub(crate) fn ensure_comparable(&self, other: &DepthSequence, what: &str) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::validation(format!(
                "{what}: frame count mismatch {} vs {}",
                self.len(),
                other.len()
            )));
        }
        self.frames[0].ensure_same_shape(&other.frames[0], what)
    }
}
