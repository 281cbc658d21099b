//! Pixel-fidelity baselines on the 8-bit scale: MAD, MSE, PSNR and SSIM.

use crate::error::{Error, Result};
use crate::frame::DepthFrame;
use crate::plane::Plane;
use crate::scalar::Scalar;

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FidelityScores<T> {
    pub mad: T,
    pub mse: T,
    /// `+inf` when the frames are identical.
    pub psnr_db: T,
    pub ssim: T,
}

fn sample<T: Scalar>(v: u8) -> T {
    T::from_u8(v).expect("u8 representable")
}

pub fn mad<T: Scalar>(a: &DepthFrame, b: &DepthFrame) -> Result<T> {
    a.ensure_same_shape(b, "mad")?;
    let sum: T = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(&x, &y)| sample::<T>(x.abs_diff(y)))
        .sum();
    Ok(sum / T::from_count(a.pixels().len()))
}

pub fn mse<T: Scalar>(a: &DepthFrame, b: &DepthFrame) -> Result<T> {
    a.ensure_same_shape(b, "mse")?;
    let sum: T = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(&x, &y)| {
            let d = sample::<T>(x.abs_diff(y));
            d * d
        })
        .sum();
    Ok(sum / T::from_count(a.pixels().len()))
}

/// `10 log10(peak^2 / MSE)`, or `+inf` for identical frames.
pub fn psnr<T: Scalar>(a: &DepthFrame, b: &DepthFrame) -> Result<T> {
    let mse = mse::<T>(a, b)?;
    Ok(psnr_from_mse(
        mse,
        T::from_u32(a.max_value()).expect("peak representable"),
    ))
}

pub fn psnr_from_mse<T: Scalar>(mse: T, peak: T) -> T {
    if mse == T::zero() {
        T::infinity()
    } else {
        T::lit(10.0) * (peak * peak / mse).log10()
    }
}

/// Divides each value by the largest finite one, for co-plotting PSNR with
/// unit-range metrics. Infinite entries are passed through unchanged.
pub fn normalized_psnr<T: Scalar>(psnr_values: &[T]) -> Result<Vec<T>> {
    if psnr_values.is_empty() {
        return Err(Error::validation("normalized PSNR of an empty list"));
    }
    let max = psnr_values
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .fold(None, |m: Option<T>, v| Some(m.map_or(v, |m| m.max(v))))
        .ok_or_else(|| Error::validation("normalized PSNR needs at least one finite value"))?;
    if max <= T::zero() {
        return Err(Error::validation(format!(
            "normalized PSNR needs a positive maximum, got {max}"
        )));
    }
    Ok(psnr_values
        .iter()
        .map(|&v| if v.is_finite() { v / max } else { v })
        .collect())
}

fn gaussian_kernel<T: Scalar>() -> Vec<T> {
    let half = (SSIM_WINDOW / 2) as f64;
    let raw: Vec<f64> = (0..SSIM_WINDOW)
        .map(|i| {
            let d = i as f64 - half;
            (-(d * d) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp()
        })
        .collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|v| T::lit(v / sum)).collect()
}

/// Valid-window separable filtering: output is `(w-10) x (h-10)`.
fn filter_valid<T: Scalar>(src: &Plane<T>, kernel: &[T]) -> Plane<T> {
    let n = kernel.len();
    let (w, h) = (src.width(), src.height());
    let ow = w - n + 1;
    let oh = h - n + 1;
    let horiz = Plane::from_fn(ow, h, |x, y| (0..n).map(|i| kernel[i] * src.get(x + i, y)).sum());
    Plane::from_fn(ow, oh, |x, y| (0..n).map(|i| kernel[i] * horiz.get(x, y + i)).sum())
}

/// Mean local SSIM over every 11x11 Gaussian (sigma 1.5) window that fits
/// inside the frame, with stride 1.
pub fn ssim<T: Scalar>(a: &DepthFrame, b: &DepthFrame) -> Result<T> {
    a.ensure_same_shape(b, "ssim")?;
    if a.width() < SSIM_WINDOW || a.height() < SSIM_WINDOW {
        return Err(Error::validation(format!(
            "SSIM needs frames of at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {}x{}",
            a.width(),
            a.height()
        )));
    }
    let (w, h) = (a.width(), a.height());
    let peak = T::from_u32(a.max_value()).expect("peak representable");
    let c1 = (T::lit(SSIM_K1) * peak).powi(2);
    let c2 = (T::lit(SSIM_K2) * peak).powi(2);
    let x = Plane::from_fn(w, h, |i, j| sample::<T>(a.get(i, j)));
    let y = Plane::from_fn(w, h, |i, j| sample::<T>(b.get(i, j)));
    let xx = Plane::from_fn(w, h, |i, j| x.get(i, j) * x.get(i, j));
    let yy = Plane::from_fn(w, h, |i, j| y.get(i, j) * y.get(i, j));
    let xy = Plane::from_fn(w, h, |i, j| x.get(i, j) * y.get(i, j));

    let k = gaussian_kernel::<T>();
    let mu_x = filter_valid(&x, &k);
    let mu_y = filter_valid(&y, &k);
    let e_xx = filter_valid(&xx, &k);
    let e_yy = filter_valid(&yy, &k);
    let e_xy = filter_valid(&xy, &k);

    let two = T::lit(2.0);
    let mut total = T::zero();
    for i in 0..mu_x.len() {
        let (mx, my) = (mu_x.data()[i], mu_y.data()[i]);
        let var_x = e_xx.data()[i] - mx * mx;
        let var_y = e_yy.data()[i] - my * my;
        let cov = e_xy.data()[i] - mx * my;
        let num = (two * mx * my + c1) * (two * cov + c2);
        let den = (mx * mx + my * my + c1) * (var_x + var_y + c2);
        total = total + num / den;
    }
    Ok(total / T::from_count(mu_x.len()))
}

pub fn fidelity_scores<T: Scalar>(a: &DepthFrame, b: &DepthFrame) -> Result<FidelityScores<T>> {
    let mse = mse::<T>(a, b)?;
    Ok(FidelityScores {
        mad: mad(a, b)?,
        mse,
        psnr_db: psnr_from_mse(mse, T::from_u32(a.max_value()).expect("peak representable")),
        ssim: ssim(a, b)?,
    })
}
