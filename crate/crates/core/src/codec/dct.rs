//! Orthonormal 8x8 type-II DCT.

use crate::scalar::Scalar;

pub const BLOCK: usize = 8;
pub const BLOCK_AREA: usize = BLOCK * BLOCK;

/// Separable transform with a precomputed basis `C[k][n] = s(k) cos((2n+1) k pi / 16)`.
#[derive(Clone, Debug)]
pub struct Dct8<T> {
    basis: [[T; BLOCK]; BLOCK],
}

impl<T: Scalar> Default for Dct8<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> Dct8<T> {
    pub fn new() -> Self {
        let mut basis = [[T::zero(); BLOCK]; BLOCK];
        for (k, row) in basis.iter_mut().enumerate() {
            let scale = if k == 0 {
                (1.0 / BLOCK as f64).sqrt()
            } else {
                (2.0 / BLOCK as f64).sqrt()
            };
            for (n, c) in row.iter_mut().enumerate() {
                let angle = (2 * n + 1) as f64 * k as f64 * std::f64::consts::PI / (2 * BLOCK) as f64;
                *c = T::lit(scale * angle.cos());
            }
        }
        Dct8 { basis }
    }

    /// `C X C^T` on a row-major block.
    pub fn forward(&self, block: &[T; BLOCK_AREA]) -> [T; BLOCK_AREA] {
        let mut tmp = [T::zero(); BLOCK_AREA];
        // rows
        for y in 0..BLOCK {
            for k in 0..BLOCK {
                tmp[y * BLOCK + k] = (0..BLOCK).map(|n| self.basis[k][n] * block[y * BLOCK + n]).sum();
            }
        }
        let mut out = [T::zero(); BLOCK_AREA];
        // columns
        for x in 0..BLOCK {
            for k in 0..BLOCK {
                out[k * BLOCK + x] = (0..BLOCK).map(|n| self.basis[k][n] * tmp[n * BLOCK + x]).sum();
            }
        }
        out
    }

    /// `C^T Y C`.
    pub fn inverse(&self, coeffs: &[T; BLOCK_AREA]) -> [T; BLOCK_AREA] {
        let mut tmp = [T::zero(); BLOCK_AREA];
        for x in 0..BLOCK {
            for n in 0..BLOCK {
                tmp[n * BLOCK + x] = (0..BLOCK).map(|k| self.basis[k][n] * coeffs[k * BLOCK + x]).sum();
            }
        }
        let mut out = [T::zero(); BLOCK_AREA];
        for y in 0..BLOCK {
            for n in 0..BLOCK {
                out[y * BLOCK + n] = (0..BLOCK).map(|k| self.basis[k][n] * tmp[y * BLOCK + k]).sum();
            }
        }
        out
    }
}
