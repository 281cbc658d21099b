//! Depth-error discomfort indexes and their pooling into VDM and 3VQM.
//!
//! Error maps, SO, TO and TI are computed on planes normalized to [0,1];
//! the content indexes (spatial/temporal information) use the 8-bit scale.
//! Every standard deviation here is the population one (divide by N).
//!
//! Note that VDM is blind to a uniform depth bias: a constant error map has
//! zero spread, so SO and TO both vanish and the score stays at `K`.

use crate::error::{Error, Result};
use crate::frame::{DepthFrame, DepthSequence};
use crate::frame_io::normalize;
use crate::plane::Plane;
use crate::scalar::{mean, population_std, Scalar};

/// Per-pixel absolute depth error between ground truth and a processed frame.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorMap<T>(Plane<T>);

impl<T: Scalar> ErrorMap<T> {
    /// Wraps a plane of precomputed absolute errors.
    pub fn from_plane(plane: Plane<T>) -> Result<Self> {
        if plane.data().iter().any(|&v| !(v >= T::zero() && v <= T::one())) {
            return Err(Error::validation("error map values must lie in [0,1]"));
        }
        Ok(ErrorMap(plane))
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        self.0.data()
    }

    #[inline]
    pub fn plane(&self) -> &Plane<T> {
        &self.0
    }

    fn ensure_same_shape(&self, other: &ErrorMap<T>) -> Result<()> {
        if self.0.same_shape(&other.0) {
            Ok(())
        } else {
            Err(Error::validation(format!(
                "error map dimension mismatch {}x{} vs {}x{}",
                self.0.width(),
                self.0.height(),
                other.0.width(),
                other.0.height()
            )))
        }
    }
}

/// `|Z_gt - Z_processed|` on the normalized scale.
pub fn delta_z<T: Scalar>(gt: &DepthFrame, processed: &DepthFrame) -> Result<ErrorMap<T>> {
    gt.ensure_same_shape(processed, "delta_z")?;
    let max = T::from_u32(gt.max_value()).expect("max value representable");
    let data = gt
        .pixels()
        .iter()
        .zip(processed.pixels())
        .map(|(&a, &b)| T::from_u8(a.abs_diff(b)).expect("u8 representable") / max)
        .collect();
    Ok(ErrorMap(Plane::new(gt.width(), gt.height(), data)?))
}

/// SO: spread of the error map.
pub fn spatial_outliers<T: Scalar>(err: &ErrorMap<T>) -> T {
    population_std(err.values())
}

fn signed_difference<T: Scalar>(from: &[T], to: &[T]) -> Vec<T> {
    from.iter().zip(to).map(|(&a, &b)| b - a).collect()
}

/// TO: spread of the frame-to-frame change of the error map.
pub fn temporal_outliers<T: Scalar>(err_t: &ErrorMap<T>, err_t1: &ErrorMap<T>) -> Result<T> {
    err_t.ensure_same_shape(err_t1)?;
    Ok(population_std(&signed_difference(err_t.values(), err_t1.values())))
}

/// TI: spread of the change between consecutive processed frames.
pub fn temporal_inconsistency<T: Scalar>(z_t: &DepthFrame, z_t1: &DepthFrame) -> Result<T> {
    z_t.ensure_same_shape(z_t1, "temporal_inconsistency")?;
    let a = normalize::<T>(z_t);
    let b = normalize::<T>(z_t1);
    Ok(population_std(&signed_difference(a.data(), b.data())))
}

/// 3x3 Sobel gradient magnitude on the 8-bit scale, interior pixels only
/// (the output is `(w-2) x (h-2)`).
pub fn sobel_magnitude<T: Scalar>(frame: &DepthFrame) -> Result<Plane<T>> {
    let (w, h) = (frame.width(), frame.height());
    if w < 3 || h < 3 {
        return Err(Error::validation(format!(
            "Sobel needs frames of at least 3x3, got {w}x{h}"
        )));
    }
    let px = |x: usize, y: usize| T::from_u8(frame.get(x, y)).expect("u8 representable");
    let two = T::lit(2.0);
    Ok(Plane::from_fn(w - 2, h - 2, |ix, iy| {
        let (x, y) = (ix + 1, iy + 1);
        let gx = (px(x + 1, y - 1) + two * px(x + 1, y) + px(x + 1, y + 1))
            - (px(x - 1, y - 1) + two * px(x - 1, y) + px(x - 1, y + 1));
        let gy = (px(x - 1, y + 1) + two * px(x, y + 1) + px(x + 1, y + 1))
            - (px(x - 1, y - 1) + two * px(x, y - 1) + px(x + 1, y - 1));
        (gx * gx + gy * gy).sqrt()
    }))
}

/// Pre-root spatial information: max over frames of the Sobel-magnitude spread.
pub fn spatial_info<T: Scalar>(seq: &DepthSequence) -> Result<T> {
    let mut best = T::zero();
    for f in seq.frames() {
        let s = population_std(sobel_magnitude::<T>(f)?.data());
        best = best.max(s);
    }
    Ok(best)
}

/// Pre-root temporal information: max over consecutive pairs of the spread
/// of the signed 8-bit frame difference.
pub fn temporal_info<T: Scalar>(seq: &DepthSequence) -> Result<T> {
    if seq.len() < 2 {
        return Err(Error::validation(format!(
            "temporal information needs at least 2 frames, got {}",
            seq.len()
        )));
    }
    let mut best = T::zero();
    for pair in seq.frames().windows(2) {
        let diff: Vec<T> = pair[0]
            .pixels()
            .iter()
            .zip(pair[1].pixels())
            .map(|(&a, &b)| T::from_i16(b as i16 - a as i16).expect("i16 representable"))
            .collect();
        best = best.max(population_std(&diff));
    }
    Ok(best)
}

/// Content-complexity indexes of a sequence; the cube roots drive the VDM
/// exponents.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContentIndexes<T> {
    pub spatial_info: T,
    pub temporal_info: T,
    pub s_inf: T,
    pub t_inf: T,
}

pub fn content_indexes<T: Scalar>(seq: &DepthSequence) -> Result<ContentIndexes<T>> {
    let spatial_info = spatial_info::<T>(seq)?;
    let temporal_info = temporal_info::<T>(seq)?;
    Ok(ContentIndexes {
        spatial_info,
        temporal_info,
        s_inf: spatial_info.cbrt(),
        t_inf: temporal_info.cbrt(),
    })
}

/// SO, TO and TI of one frame pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscomfortIndexes<T> {
    pub so: T,
    pub to: T,
    pub ti: T,
}

impl<T: Scalar> DiscomfortIndexes<T> {
    pub fn new(so: T, to: T, ti: T) -> Self {
        DiscomfortIndexes { so, to, ti }
    }

    pub fn clamped(&self) -> Self {
        let c = |v: T| v.max(T::zero()).min(T::one());
        DiscomfortIndexes {
            so: c(self.so),
            to: c(self.to),
            ti: c(self.ti),
        }
    }
}

/// Scale and exponents of the pooling formulas.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VdmParams<T> {
    pub k: T,
    pub a: T,
    pub b: T,
    pub c: T,
    /// Clamp SO/TO/TI into [0,1] before pooling.
    pub clamp_indexes: bool,
}

impl<T: Scalar> VdmParams<T> {
    /// Exponents must be non-negative; `a = 0` or `b = 0` happens for
    /// static or flat content, where the matching index is zero anyway.
    pub fn new(k: T, a: T, b: T, c: T) -> Result<Self> {
        if !(k > T::zero() && k.is_finite()) {
            return Err(Error::validation(format!("K must be positive, got {k}")));
        }
        if !(a >= T::zero() && a.is_finite() && b >= T::zero() && b.is_finite()) {
            return Err(Error::validation(format!(
                "exponents a and b must be non-negative, got a={a}, b={b}"
            )));
        }
        if !c.is_finite() {
            return Err(Error::validation(format!("exponent c must be finite, got {c}")));
        }
        Ok(VdmParams {
            k,
            a,
            b,
            c,
            clamp_indexes: true,
        })
    }

    /// VDM defaults: `K = 1`, `a = S_Inf`, `b = T_Inf`, `c = 0`.
    pub fn vdm(content: &ContentIndexes<T>) -> Self {
        VdmParams {
            k: T::one(),
            a: content.s_inf,
            b: content.t_inf,
            c: T::zero(),
            clamp_indexes: true,
        }
    }

    /// 3VQM defaults: `K = 5`, `a = 8`, `b = 8`, `c = 6`.
    pub fn vqm3() -> Self {
        VdmParams {
            k: T::lit(5.0),
            a: T::lit(8.0),
            b: T::lit(8.0),
            c: T::lit(6.0),
            clamp_indexes: true,
        }
    }
}

/// `x^e` with a zero index contributing no discomfort for any exponent
/// (so `0^0` is taken as 0 rather than 1).
#[inline]
fn discomfort_power<T: Scalar>(x: T, e: T) -> T {
    if x == T::zero() {
        T::zero()
    } else {
        x.powf(e)
    }
}

/// `K (1 - SO^a)(1 - TO^b)(1 - TI)^c`.
pub fn vdm_frame<T: Scalar>(idx: &DiscomfortIndexes<T>, params: &VdmParams<T>) -> T {
    let idx = if params.clamp_indexes { idx.clamped() } else { *idx };
    let one = T::one();
    params.k
        * (one - discomfort_power(idx.so, params.a))
        * (one - discomfort_power(idx.to, params.b))
        * (one - idx.ti).powf(params.c)
}

/// `K (1 - SO_masked)^a (1 - TO)^b (1 - TI)^c`.
pub fn vqm3_frame<T: Scalar>(idx: &DiscomfortIndexes<T>, masked_so: T, params: &VdmParams<T>) -> T {
    let (idx, masked_so) = if params.clamp_indexes {
        (idx.clamped(), masked_so.max(T::zero()).min(T::one()))
    } else {
        (*idx, masked_so)
    };
    let one = T::one();
    params.k * (one - masked_so).powf(params.a) * (one - idx.to).powf(params.b) * (one - idx.ti).powf(params.c)
}

/// Outlier threshold for the SO/TO mask: `mean + sigma * std` of the
/// respective absolute map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OutlierRule<T> {
    pub sigma: T,
}

impl<T: Scalar> Default for OutlierRule<T> {
    fn default() -> Self {
        OutlierRule { sigma: T::one() }
    }
}

fn outlier_mask<T: Scalar>(abs_values: &[T], rule: &OutlierRule<T>) -> Vec<bool> {
    let threshold = mean(abs_values) + rule.sigma * population_std(abs_values);
    abs_values.iter().map(|&v| v > threshold).collect()
}

/// Spread of `err_t1` restricted to pixels that are both spatial outliers
/// (of `err_t1`) and temporal outliers (of `err_t1 - err_t`).
pub fn so_to_mask_with<T: Scalar>(err_t: &ErrorMap<T>, err_t1: &ErrorMap<T>, rule: &OutlierRule<T>) -> Result<T> {
    err_t.ensure_same_shape(err_t1)?;
    let spatial = outlier_mask(err_t1.values(), rule);
    let temporal_abs: Vec<T> = signed_difference(err_t.values(), err_t1.values())
        .into_iter()
        .map(|d| d.abs())
        .collect();
    let temporal = outlier_mask(&temporal_abs, rule);
    let selected: Vec<T> = err_t1
        .values()
        .iter()
        .zip(spatial.iter().zip(&temporal))
        .filter(|(_, (&s, &t))| s && t)
        .map(|(&v, _)| v)
        .collect();
    Ok(population_std(&selected))
}

pub fn so_to_mask<T: Scalar>(err_t: &ErrorMap<T>, err_t1: &ErrorMap<T>) -> Result<T> {
    so_to_mask_with(err_t, err_t1, &OutlierRule::default())
}

/// Scores of the frame pair `(t, t+1)`, attributed to frame `t+1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameScore<T> {
    pub frame_index: usize,
    pub indexes: DiscomfortIndexes<T>,
    pub masked_so: T,
    pub vdm: T,
    pub vqm3: Option<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SequenceScore<T> {
    pub frames: Vec<FrameScore<T>>,
    pub mean_vdm: T,
    pub mean_vqm3: Option<T>,
}

/// Pairs VDM parameters with the optional 3VQM pooling and the outlier rule.
#[derive(Clone, Debug, PartialEq)]
pub struct Scorer<T> {
    pub vdm: VdmParams<T>,
    pub vqm3: Option<VdmParams<T>>,
    pub outliers: OutlierRule<T>,
}

impl<T: Scalar> Scorer<T> {
    /// VDM with the given parameters plus 3VQM at its defaults.
    pub fn new(vdm: VdmParams<T>) -> Self {
        Scorer {
            vdm,
            vqm3: Some(VdmParams::vqm3()),
            outliers: OutlierRule::default(),
        }
    }

    pub fn vdm_only(vdm: VdmParams<T>) -> Self {
        Scorer {
            vdm,
            vqm3: None,
            outliers: OutlierRule::default(),
        }
    }

    /// Scores one pair. Passing the same frame for `t` and `t+1` gives the
    /// degenerate single-frame pair (TO = TI = 0).
    pub fn score_pair(
        &self,
        frame_index: usize,
        gt_t: &DepthFrame,
        gt_t1: &DepthFrame,
        proc_t: &DepthFrame,
        proc_t1: &DepthFrame,
    ) -> Result<FrameScore<T>> {
        let err_t = delta_z::<T>(gt_t, proc_t)?;
        let err_t1 = delta_z::<T>(gt_t1, proc_t1)?;
        let indexes = DiscomfortIndexes {
            so: spatial_outliers(&err_t1),
            to: temporal_outliers(&err_t, &err_t1)?,
            ti: temporal_inconsistency(proc_t, proc_t1)?,
        };
        let vdm = vdm_frame(&indexes, &self.vdm);
        let (masked_so, vqm3) = match &self.vqm3 {
            Some(p) => {
                let m = so_to_mask_with(&err_t, &err_t1, &self.outliers)?;
                (m, Some(vqm3_frame(&indexes, m, p)))
            }
            None => (T::zero(), None),
        };
        Ok(FrameScore {
            frame_index,
            indexes,
            masked_so,
            vdm,
            vqm3,
        })
    }

    /// One score per consecutive pair (`frame_count - 1` in total); the
    /// sequence score is their arithmetic mean.
    pub fn score_sequence(&self, gt: &DepthSequence, proc: &DepthSequence) -> Result<SequenceScore<T>> {
        gt.ensure_comparable(proc, "score_sequence")?;
        if gt.len() < 2 {
            return Err(Error::validation(format!(
                "scoring needs at least 2 frames, got {}",
                gt.len()
            )));
        }
        let (g, p) = (gt.frames(), proc.frames());
        let frames = (0..g.len() - 1)
            .map(|t| self.score_pair(t + 1, &g[t], &g[t + 1], &p[t], &p[t + 1]))
            .collect::<Result<Vec<_>>>()?;
        let vdms: Vec<T> = frames.iter().map(|f| f.vdm).collect();
        let mean_vqm3 = self.vqm3.as_ref().map(|_| {
            let v: Vec<T> = frames.iter().filter_map(|f| f.vqm3).collect();
            mean(&v)
        });
        Ok(SequenceScore {
            mean_vdm: mean(&vdms),
            mean_vqm3,
            frames,
        })
    }
}

/// VDM (and default 3VQM) of every frame pair.
pub fn score_sequence<T: Scalar>(
    gt: &DepthSequence,
    proc: &DepthSequence,
    params: &VdmParams<T>,
) -> Result<SequenceScore<T>> {
    Scorer::new(*params).score_sequence(gt, proc)
}
