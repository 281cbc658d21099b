//! Deterministic synthetic depth content for tests, demos and the CLI.
//!
//! Nothing here uses an RNG: texture comes from an integer hash of the
//! pixel coordinates, so every generator is reproducible without seeds.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::frame::{DepthFrame, DepthSequence, DEFAULT_FPS};

/// splitmix64 finalizer over packed coordinates, mapped to [-1, 1].
pub fn hash_noise(x: usize, y: usize, t: usize, seed: u64) -> f64 {
    let mut z = seed
        ^ (x as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (y as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F)
        ^ (t as u64).wrapping_mul(0x1656_67B1_9E37_79F9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 52) as f64 - 1.0
}

fn to_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// `(x + y + t) mod 256`.
pub fn diagonal_ramp(width: usize, height: usize, frames: usize) -> Result<DepthSequence> {
    let frames = (0..frames)
        .map(|t| DepthFrame::from_fn(width, height, |x, y| ((x + y + t) % 256) as u8))
        .collect::<Result<Vec<_>>>()?;
    DepthSequence::new(frames, DEFAULT_FPS)
}

pub fn constant(width: usize, height: usize, frames: usize, value: u8) -> Result<DepthSequence> {
    let frame = DepthFrame::filled(width, height, value)?;
    DepthSequence::new(vec![frame; frames], DEFAULT_FPS)
}

/// Smooth sinusoidal depth gradient drifting 2 px/frame with a static
/// fine-grained texture on top.
pub fn moving_gradient_texture(width: usize, height: usize, frames: usize) -> Result<DepthSequence> {
    use std::f64::consts::TAU;
    let frames = (0..frames)
        .map(|t| {
            DepthFrame::from_fn(width, height, |x, y| {
                let u = (x as f64 + 2.0 * t as f64) / 48.0;
                let v = y as f64 / 64.0;
                let base = 128.0 + 70.0 * (TAU * u).sin() * (0.6 + 0.4 * (TAU * v).cos());
                to_u8(base + 12.0 * hash_noise(x, y, 0, 7))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    DepthSequence::new(frames, DEFAULT_FPS)
}

/// Spatio-temporal complexity presets of depth-like scenes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Complexity {
    Low,
    Medium,
    High,
}

impl FromStr for Complexity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "low" => Ok(Complexity::Low),
            "medium" => Ok(Complexity::Medium),
            "high" => Ok(Complexity::High),
            other => Err(Error::validation(format!("unknown complexity {other:?}"))),
        }
    }
}

struct Blob {
    cx: f64,
    cy: f64,
    rx: f64,
    ry: f64,
    depth: f64,
    vx: f64,
    vy: f64,
}

/// Layered depth scene: a tilted background plane with elliptical
/// foreground objects moving across it. Higher complexity means more
/// objects, faster motion and more (time-varying) sensor noise.
pub fn depth_scene(width: usize, height: usize, frames: usize, complexity: Complexity) -> Result<DepthSequence> {
    let (w, h) = (width as f64, height as f64);
    let (blobs, noise, flicker) = match complexity {
        Complexity::Low => (
            vec![Blob {
                cx: 0.3 * w,
                cy: 0.5 * h,
                rx: 0.2 * w,
                ry: 0.25 * h,
                depth: 170.0,
                vx: 0.5,
                vy: 0.0,
            }],
            2.0,
            true,
        ),
        Complexity::Medium => (
            vec![
                Blob {
                    cx: 0.3 * w,
                    cy: 0.4 * h,
                    rx: 0.18 * w,
                    ry: 0.22 * h,
                    depth: 190.0,
                    vx: 1.5,
                    vy: 0.3,
                },
                Blob {
                    cx: 0.7 * w,
                    cy: 0.7 * h,
                    rx: 0.12 * w,
                    ry: 0.1 * h,
                    depth: 140.0,
                    vx: -1.0,
                    vy: 0.0,
                },
            ],
            4.0,
            true,
        ),
        Complexity::High => (
            vec![
                Blob {
                    cx: 0.2 * w,
                    cy: 0.3 * h,
                    rx: 0.15 * w,
                    ry: 0.2 * h,
                    depth: 220.0,
                    vx: 3.0,
                    vy: 1.0,
                },
                Blob {
                    cx: 0.6 * w,
                    cy: 0.6 * h,
                    rx: 0.14 * w,
                    ry: 0.12 * h,
                    depth: 160.0,
                    vx: -2.5,
                    vy: 0.5,
                },
                Blob {
                    cx: 0.5 * w,
                    cy: 0.2 * h,
                    rx: 0.08 * w,
                    ry: 0.08 * h,
                    depth: 250.0,
                    vx: 1.5,
                    vy: -2.0,
                },
            ],
            8.0,
            true,
        ),
    };
    let frames = (0..frames)
        .map(|t| {
            let tf = t as f64;
            DepthFrame::from_fn(width, height, |x, y| {
                let (xf, yf) = (x as f64, y as f64);
                let mut d = 40.0 + 60.0 * yf / h + 10.0 * xf / w;
                for b in &blobs {
                    let cx = (b.cx + b.vx * tf).rem_euclid(w);
                    let cy = (b.cy + b.vy * tf).rem_euclid(h);
                    let nx = (xf - cx) / b.rx;
                    let ny = (yf - cy) / b.ry;
                    let r2 = nx * nx + ny * ny;
                    if r2 <= 1.0 {
                        // slightly rounded object surface
                        d = b.depth - 20.0 * r2;
                    }
                }
                let nt = if flicker { t } else { 0 };
                to_u8(d + noise * hash_noise(x, y, nt, 11))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    DepthSequence::new(frames, DEFAULT_FPS)
}
