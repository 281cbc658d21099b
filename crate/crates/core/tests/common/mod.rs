//! Helpers shared by the integration tests.
#![allow(dead_code)]

use depth_discomfort::{DepthFrame, DepthSequence};

/// Straightforward reference implementations, written without sharing any
/// helper with the library.
pub mod naive {
    use depth_discomfort::DepthFrame;

    pub fn std(v: &[f64]) -> f64 {
        let n = v.len() as f64;
        let mu = v.iter().sum::<f64>() / n;
        (v.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / n).sqrt()
    }

    fn unit(f: &DepthFrame) -> Vec<f64> {
        f.pixels().iter().map(|&p| p as f64 / 255.0).collect()
    }

    pub fn error_map(g: &DepthFrame, p: &DepthFrame) -> Vec<f64> {
        unit(g).iter().zip(unit(p)).map(|(a, b)| (a - b).abs()).collect()
    }

    pub fn so(g1: &DepthFrame, p1: &DepthFrame) -> f64 {
        std(&error_map(g1, p1))
    }

    pub fn to(g0: &DepthFrame, g1: &DepthFrame, p0: &DepthFrame, p1: &DepthFrame) -> f64 {
        let e0 = error_map(g0, p0);
        let e1 = error_map(g1, p1);
        std(&e1.iter().zip(&e0).map(|(a, b)| a - b).collect::<Vec<_>>())
    }

    pub fn ti(p0: &DepthFrame, p1: &DepthFrame) -> f64 {
        std(&unit(p1).iter().zip(unit(p0)).map(|(a, b)| a - b).collect::<Vec<_>>())
    }

    pub fn mad(a: &DepthFrame, b: &DepthFrame) -> f64 {
        let n = a.pixels().len() as f64;
        a.pixels()
            .iter()
            .zip(b.pixels())
            .map(|(&x, &y)| (x as f64 - y as f64).abs())
            .sum::<f64>()
            / n
    }

    pub fn mse(a: &DepthFrame, b: &DepthFrame) -> f64 {
        let n = a.pixels().len() as f64;
        a.pixels()
            .iter()
            .zip(b.pixels())
            .map(|(&x, &y)| (x as f64 - y as f64).powi(2))
            .sum::<f64>()
            / n
    }

    const KX: [[f64; 3]; 3] = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]];
    const KY: [[f64; 3]; 3] = [[-1.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 1.0]];

    pub fn spatial_info(frames: &[DepthFrame]) -> f64 {
        let mut best: f64 = 0.0;
        for f in frames {
            let mut mags = Vec::new();
            for y in 1..f.height() - 1 {
                for x in 1..f.width() - 1 {
                    let (mut gx, mut gy) = (0.0, 0.0);
                    for (j, (rx, ry)) in KX.iter().zip(&KY).enumerate() {
                        for i in 0..3 {
                            let v = f.get(x + i - 1, y + j - 1) as f64;
                            gx += rx[i] * v;
                            gy += ry[i] * v;
                        }
                    }
                    mags.push(gx.hypot(gy));
                }
            }
            best = best.max(std(&mags));
        }
        best
    }

    pub fn temporal_info(frames: &[DepthFrame]) -> f64 {
        let mut best: f64 = 0.0;
        for t in 1..frames.len() {
            let d: Vec<f64> = frames[t]
                .pixels()
                .iter()
                .zip(frames[t - 1].pixels())
                .map(|(&a, &b)| a as f64 - b as f64)
                .collect();
            best = best.max(std(&d));
        }
        best
    }
}

pub fn sequence(frames: Vec<DepthFrame>) -> DepthSequence {
    DepthSequence::new(frames, 30.0).unwrap()
}
