//! Intra-only block-DCT stand-in codec with an H.264-style QP scale, plus a
//! provider that replays externally encoded sequences.
//!
//! Both satisfy [`CodecBackend`], the single-method contract the rate
//! controllers are written against.

mod dct;
mod entropy;
mod precoded;

use std::fmt;
use std::marker::PhantomData;

pub use dct::{Dct8, BLOCK, BLOCK_AREA};
pub use entropy::zero_order_bits;
pub use precoded::{
    precoded_frame_name, precoded_provider, qp_dir_name, PrecodedProvider, MANIFEST_NAME, PRECODED_FRAME_PATTERN,
};

use crate::error::{Error, Result};
use crate::frame::{DepthFrame, DepthSequence};
use crate::scalar::Scalar;

pub const QP_MAX: u8 = 51;

/// Quantization parameter in `[0, 51]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QuantParam(u8);

impl QuantParam {
    pub fn new(qp: i32) -> Result<Self> {
        if (0..=QP_MAX as i32).contains(&qp) {
            Ok(QuantParam(qp as u8))
        } else {
            Err(Error::validation(format!("QP {qp} outside [0, {QP_MAX}]")))
        }
    }

    #[inline]
    pub fn get(self) -> u8 {
        self.0
    }
}

impl fmt::Display for QuantParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Quantizer step `2^((qp - 4) / 6)`: doubles every 6 QP, 1.0 at QP 4.
pub fn qstep<T: Scalar>(qp: QuantParam) -> T {
    T::lit(2.0).powf(T::lit((qp.0 as f64 - 4.0) / 6.0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct EncodedFrame {
    pub reconstruction: DepthFrame,
    pub estimated_bits: f64,
    pub qp_used: QuantParam,
}

/// Aggregate rate of an encoded sequence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateReport {
    pub total_bits: f64,
    pub frame_count: usize,
    pub fps: f64,
    pub kbits_per_sec: f64,
}

impl RateReport {
    pub fn new(total_bits: f64, frame_count: usize, fps: f64) -> Self {
        let kbits_per_sec = if frame_count == 0 {
            0.0
        } else {
            total_bits * fps / frame_count as f64 / 1000.0
        };
        RateReport {
            total_bits,
            frame_count,
            fps,
            kbits_per_sec,
        }
    }

    /// Sums per-frame bits in order.
    pub fn from_frame_bits(bits: &[f64], fps: f64) -> Self {
        Self::new(bits.iter().sum(), bits.len(), fps)
    }
}

/// Anything that can turn `(frame index, frame, qp)` into a reconstruction
/// and a bit count.
pub trait CodecBackend: Sync {
    fn encode_frame(&self, frame_index: usize, frame: &DepthFrame, qp: QuantParam) -> Result<EncodedFrame>;
}

/// Per-frame header cost added to every estimate.
pub const HEADER_BITS: f64 = 32.0;

/// 8x8 orthonormal DCT, uniform quantization with `round(c / Qstep)`
/// (half away from zero), dequantization, inverse DCT, round and clamp.
/// Bits are the zero-order entropy of all quantized levels of the frame
/// plus [`HEADER_BITS`].
#[derive(Clone, Debug)]
pub struct ToyCodec<T = f64> {
    dct: Dct8<T>,
    _scalar: PhantomData<T>,
}

impl<T: Scalar> Default for ToyCodec<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> ToyCodec<T> {
    pub fn new() -> Self {
        ToyCodec {
            dct: Dct8::new(),
            _scalar: PhantomData,
        }
    }

    pub fn encode(&self, src: &DepthFrame, qp: QuantParam) -> EncodedFrame {
        let (w, h) = (src.width(), src.height());
        let pw = w.div_ceil(BLOCK) * BLOCK;
        let ph = h.div_ceil(BLOCK) * BLOCK;
        // replication padding
        let padded = |x: usize, y: usize| src.get(x.min(w - 1), y.min(h - 1));
        let step = qstep::<T>(qp);
        let mut levels = Vec::with_capacity(pw * ph);
        let mut recon = vec![0u8; pw * ph];
        let mut block = [T::zero(); BLOCK_AREA];
        for by in (0..ph).step_by(BLOCK) {
            for bx in (0..pw).step_by(BLOCK) {
                for y in 0..BLOCK {
                    for x in 0..BLOCK {
                        block[y * BLOCK + x] = T::from_u8(padded(bx + x, by + y)).expect("u8 representable");
                    }
                }
                let mut coeffs = self.dct.forward(&block);
                for c in coeffs.iter_mut() {
                    let level = (*c / step).round();
                    levels.push(level.to_i32().expect("quantized level fits in i32"));
                    *c = level * step;
                }
                let px = self.dct.inverse(&coeffs);
                for y in 0..BLOCK {
                    for x in 0..BLOCK {
                        let v = px[y * BLOCK + x].round().max(T::zero()).min(T::lit(255.0));
                        recon[(by + y) * pw + bx + x] = v.to_u8().expect("clamped to u8 range");
                    }
                }
            }
        }
        let cropped: Vec<u8> = (0..h).flat_map(|y| recon[y * pw..y * pw + w].iter().copied()).collect();
        EncodedFrame {
            reconstruction: DepthFrame::new(w, h, cropped).expect("source dimensions are valid"),
            estimated_bits: zero_order_bits(levels) + HEADER_BITS,
            qp_used: qp,
        }
    }
}

impl<T: Scalar> CodecBackend for ToyCodec<T> {
    fn encode_frame(&self, _frame_index: usize, frame: &DepthFrame, qp: QuantParam) -> Result<EncodedFrame> {
        Ok(self.encode(frame, qp))
    }
}

/// Per-frame output of [`encode_sequence_frames`].
#[derive(Clone, Debug)]
pub struct EncodedSequence {
    pub frames: Vec<EncodedFrame>,
    pub fps: f64,
}

impl EncodedSequence {
    pub fn reconstruction(&self) -> Result<DepthSequence> {
        DepthSequence::new(self.frames.iter().map(|f| f.reconstruction.clone()).collect(), self.fps)
    }

    pub fn frame_bits(&self) -> Vec<f64> {
        self.frames.iter().map(|f| f.estimated_bits).collect()
    }

    pub fn rate(&self) -> RateReport {
        RateReport::from_frame_bits(&self.frame_bits(), self.fps)
    }
}

pub fn encode_sequence_frames(
    codec: &dyn CodecBackend,
    seq: &DepthSequence,
    qp_schedule: &[QuantParam],
) -> Result<EncodedSequence> {
    if qp_schedule.len() != seq.len() {
        return Err(Error::validation(format!(
            "QP schedule has {} entries for {} frames",
            qp_schedule.len(),
            seq.len()
        )));
    }
    seq.meta().require_codable()?;
    let frames = seq
        .frames()
        .iter()
        .zip(qp_schedule)
        .enumerate()
        .map(|(i, (f, &qp))| {
            let enc = codec.encode_frame(i, f, qp)?;
            if !enc.reconstruction.same_shape(f) {
                return Err(Error::validation(format!(
                    "codec returned wrong dimensions for frame {i}"
                )));
            }
            Ok(enc)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EncodedSequence { frames, fps: seq.fps() })
}

/// Encodes every frame independently under its scheduled QP.
pub fn encode_sequence(
    codec: &dyn CodecBackend,
    seq: &DepthSequence,
    qp_schedule: &[QuantParam],
) -> Result<(DepthSequence, RateReport)> {
    let enc = encode_sequence_frames(codec, seq, qp_schedule)?;
    Ok((enc.reconstruction()?, enc.rate()))
}

pub fn constant_schedule(qp: QuantParam, frames: usize) -> Vec<QuantParam> {
    vec![qp; frames]
}
