//! QP policies over any [`CodecBackend`]: constant QP (WRDO), MAD feedback
//! (SRDO) and VDM feedback with a calibrated quality floor (VDM-RDO).
//!
//! The feedback loops are sequential: the QP for frame `t+1` is decided
//! from the frames decoded up to `t`, so control always lags one frame.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::codec::{constant_schedule, encode_sequence_frames, CodecBackend, QuantParam, RateReport};
use crate::discomfort::{Scorer, VdmParams};
use crate::error::{Error, Result};
use crate::fidelity::{mad, psnr, ssim, SSIM_WINDOW};
use crate::frame::DepthSequence;

pub const CALIBRATION_QP_MIN: u8 = 30;
pub const CALIBRATION_QP_MAX: u8 = 49;
pub const RDO_QP_MIN: u8 = 30;
pub const RDO_QP_MAX: u8 = 50;
pub const DEFAULT_INITIAL_QP: u8 = 40;

fn qp(v: u8) -> QuantParam {
    QuantParam::new(v as i32).expect("constant QP in range")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Policy {
    #[serde(rename = "WRDO")]
    Wrdo,
    #[serde(rename = "SRDO")]
    Srdo,
    #[serde(rename = "VDM_RDO")]
    VdmRdo,
}

impl Policy {
    pub const ALL: [Policy; 3] = [Policy::Wrdo, Policy::Srdo, Policy::VdmRdo];

    pub fn label(self) -> &'static str {
        match self {
            Policy::Wrdo => "WRDO",
            Policy::Srdo => "SRDO",
            Policy::VdmRdo => "VDM_RDO",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "wrdo" => Ok(Policy::Wrdo),
            "srdo" => Ok(Policy::Srdo),
            "vdm_rdo" | "vdmrdo" | "vdm" => Ok(Policy::VdmRdo),
            other => Err(Error::validation(format!("unknown policy {other:?}"))),
        }
    }
}

/// Mean VDM of the whole sequence encoded at each constant QP in 30..=49.
#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationTable {
    entries: BTreeMap<QuantParam, f64>,
}

impl CalibrationTable {
    pub fn new(entries: BTreeMap<QuantParam, f64>) -> Result<Self> {
        for q in CALIBRATION_QP_MIN..=CALIBRATION_QP_MAX {
            if !entries.contains_key(&qp(q)) {
                return Err(Error::validation(format!("calibration table lacks QP {q}")));
            }
        }
        if let Some((q, v)) = entries.iter().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::validation(format!(
                "calibration entry for QP {q} is invalid: {v}"
            )));
        }
        Ok(CalibrationTable { entries })
    }

    pub fn entries(&self) -> &BTreeMap<QuantParam, f64> {
        &self.entries
    }

    pub fn get(&self, q: QuantParam) -> Option<f64> {
        self.entries.get(&q).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn calibrate(gt: &DepthSequence, codec: &dyn CodecBackend, params: &VdmParams<f64>) -> Result<CalibrationTable> {
    gt.meta().require_codable()?;
    let scorer = Scorer::vdm_only(*params);
    let entries = (CALIBRATION_QP_MIN..=CALIBRATION_QP_MAX)
        .into_par_iter()
        .map(|q| {
            let enc = encode_sequence_frames(codec, gt, &constant_schedule(qp(q), gt.len()))?;
            let score = scorer.score_sequence(gt, &enc.reconstruction()?)?;
            Ok((qp(q), score.mean_vdm))
        })
        .collect::<Result<BTreeMap<_, _>>>()?;
    CalibrationTable::new(entries)
}

/// How the VDM floor is read off a calibration table.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum ThresholdRule {
    /// Arithmetic mean of all entries.
    #[default]
    Mean,
    /// The entry of one QP.
    AtQp(QuantParam),
    /// Linear-interpolated percentile (0..=100) of the entries.
    Percentile(f64),
}

impl FromStr for ThresholdRule {
    type Err = Error;

    /// `mean`, `qp:<N>` or `pct:<P>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::validation(format!("bad threshold rule {s:?} (want mean, qp:<N> or pct:<P>)"));
        let s = s.trim();
        if s.eq_ignore_ascii_case("mean") {
            return Ok(ThresholdRule::Mean);
        }
        if let Some(v) = s.strip_prefix("qp:") {
            let n: i32 = v.trim().parse().map_err(|_| bad())?;
            return Ok(ThresholdRule::AtQp(QuantParam::new(n)?));
        }
        if let Some(v) = s.strip_prefix("pct:") {
            let p: f64 = v.trim().parse().map_err(|_| bad())?;
            return Ok(ThresholdRule::Percentile(p));
        }
        Err(bad())
    }
}

impl fmt::Display for ThresholdRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThresholdRule::Mean => f.write_str("mean"),
            ThresholdRule::AtQp(q) => write!(f, "qp:{q}"),
            ThresholdRule::Percentile(p) => write!(f, "pct:{p}"),
        }
    }
}

pub fn select_threshold(table: &CalibrationTable, rule: ThresholdRule) -> Result<f64> {
    let values: Vec<f64> = table.entries.values().copied().collect();
    match rule {
        ThresholdRule::Mean => Ok(values.iter().sum::<f64>() / values.len() as f64),
        ThresholdRule::AtQp(q) => table
            .get(q)
            .ok_or_else(|| Error::validation(format!("calibration table has no entry for QP {q}"))),
        ThresholdRule::Percentile(p) => {
            if !(0.0..=100.0).contains(&p) {
                return Err(Error::validation(format!("percentile {p} outside [0, 100]")));
            }
            let mut sorted = values;
            sorted.sort_by(f64::total_cmp);
            let pos = p / 100.0 * (sorted.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            Ok(sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RdoConfig {
    pub policy: Policy,
    pub initial_qp: QuantParam,
    pub qp_min: QuantParam,
    pub qp_max: QuantParam,
    pub step: u8,
    /// VDM floor (VDM-RDO) or MAD ceiling (SRDO); unused by WRDO.
    pub threshold: Option<f64>,
}

impl Default for RdoConfig {
    fn default() -> Self {
        RdoConfig {
            policy: Policy::VdmRdo,
            initial_qp: qp(DEFAULT_INITIAL_QP),
            qp_min: qp(RDO_QP_MIN),
            qp_max: qp(RDO_QP_MAX),
            step: 1,
            threshold: None,
        }
    }
}

impl RdoConfig {
    pub fn with_policy(policy: Policy) -> Self {
        RdoConfig {
            policy,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.qp_min <= self.initial_qp && self.initial_qp <= self.qp_max) {
            return Err(Error::validation(format!(
                "initial QP {} outside [{}, {}]",
                self.initial_qp, self.qp_min, self.qp_max
            )));
        }
        if self.step == 0 {
            return Err(Error::validation("QP step must be positive"));
        }
        if let Some(t) = self.threshold {
            if !t.is_finite() {
                return Err(Error::validation(format!("threshold must be finite, got {t}")));
            }
        }
        Ok(())
    }

    fn raise(&self, q: QuantParam) -> QuantParam {
        let v = (q.get() as u16 + self.step as u16).min(self.qp_max.get() as u16);
        qp(v as u8)
    }

    fn lower(&self, q: QuantParam) -> QuantParam {
        let v = q.get().saturating_sub(self.step).max(self.qp_min.get());
        qp(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RdoRecord {
    pub frame_index: usize,
    #[serde(serialize_with = "ser_qp")]
    pub qp: QuantParam,
    /// VDM for WRDO and VDM-RDO, MAD for SRDO.
    pub metric_value: f64,
    pub bits: f64,
}

fn ser_qp<S: serde::Serializer>(q: &QuantParam, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_u8(q.get())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RdoTrace {
    pub policy: Policy,
    pub records: Vec<RdoRecord>,
}

impl RdoTrace {
    pub fn qps(&self) -> Vec<QuantParam> {
        self.records.iter().map(|r| r.qp).collect()
    }

    pub fn bits(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.bits).collect()
    }

    pub fn mean_qp(&self) -> f64 {
        self.records.iter().map(|r| r.qp.get() as f64).sum::<f64>() / self.records.len() as f64
    }
}

/// One row of a rate-distortion comparison.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RdoSummary {
    pub kbits_per_sec: f64,
    /// Mean over frames with finite PSNR; `+inf` if every frame is lossless.
    pub mean_psnr_db: f64,
    pub infinite_psnr_frames: usize,
    /// NaN when frames are smaller than the SSIM window.
    pub mean_ssim: f64,
    pub mean_vdm: f64,
    pub mean_qp: f64,
}

/// Running sums shared by the incremental and the recomputed summaries so
/// both accumulate in the same order.
#[derive(Default)]
struct SummaryAccumulator {
    bits: Vec<f64>,
    psnr_sum: f64,
    psnr_finite: usize,
    psnr_infinite: usize,
    ssim_sum: f64,
    ssim_ok: bool,
    vdm_sum: f64,
    vdm_count: usize,
    qp_sum: f64,
}

impl SummaryAccumulator {
    fn new(ssim_ok: bool) -> Self {
        SummaryAccumulator {
            ssim_ok,
            ..Default::default()
        }
    }

    fn push_frame(&mut self, psnr_db: f64, ssim: Option<f64>, bits: f64, qp: QuantParam) {
        if psnr_db.is_finite() {
            self.psnr_sum += psnr_db;
            self.psnr_finite += 1;
        } else {
            self.psnr_infinite += 1;
        }
        if let Some(s) = ssim {
            self.ssim_sum += s;
        }
        self.bits.push(bits);
        self.qp_sum += qp.get() as f64;
    }

    fn push_pair_vdm(&mut self, vdm: f64) {
        self.vdm_sum += vdm;
        self.vdm_count += 1;
    }

    fn finish(&self, fps: f64) -> RdoSummary {
        let n = self.bits.len() as f64;
        RdoSummary {
            kbits_per_sec: RateReport::from_frame_bits(&self.bits, fps).kbits_per_sec,
            mean_psnr_db: if self.psnr_finite == 0 {
                f64::INFINITY
            } else {
                self.psnr_sum / self.psnr_finite as f64
            },
            infinite_psnr_frames: self.psnr_infinite,
            mean_ssim: if self.ssim_ok { self.ssim_sum / n } else { f64::NAN },
            mean_vdm: if self.vdm_count == 0 {
                f64::NAN
            } else {
                self.vdm_sum / self.vdm_count as f64
            },
            mean_qp: self.qp_sum / n,
        }
    }
}

fn ssim_applicable(seq: &DepthSequence) -> bool {
    seq.meta().width >= SSIM_WINDOW && seq.meta().height >= SSIM_WINDOW
}

/// Summary of a decoded sequence given per-frame bits and QPs.
pub fn summary_of(
    gt: &DepthSequence,
    proc: &DepthSequence,
    bits: &[f64],
    qps: &[QuantParam],
    fps: f64,
    params: &VdmParams<f64>,
) -> Result<RdoSummary> {
    gt.ensure_comparable(proc, "summary")?;
    if bits.len() != gt.len() || qps.len() != gt.len() {
        return Err(Error::validation(format!(
            "summary: {} frames but {} bit counts and {} QPs",
            gt.len(),
            bits.len(),
            qps.len()
        )));
    }
    let ssim_ok = ssim_applicable(gt);
    let mut acc = SummaryAccumulator::new(ssim_ok);
    for (t, (g, p)) in gt.frames().iter().zip(proc.frames()).enumerate() {
        let s = if ssim_ok { Some(ssim::<f64>(g, p)?) } else { None };
        acc.push_frame(psnr::<f64>(g, p)?, s, bits[t], qps[t]);
    }
    let score = Scorer::vdm_only(*params).score_sequence(gt, proc)?;
    for f in &score.frames {
        acc.push_pair_vdm(f.vdm);
    }
    Ok(acc.finish(fps))
}

pub fn summarize(
    trace: &RdoTrace,
    gt: &DepthSequence,
    proc: &DepthSequence,
    fps: f64,
    params: &VdmParams<f64>,
) -> Result<RdoSummary> {
    if trace.records.len() != gt.len() {
        return Err(Error::validation(format!(
            "trace has {} records for {} frames",
            trace.records.len(),
            gt.len()
        )));
    }
    summary_of(gt, proc, &trace.bits(), &trace.qps(), fps, params)
}

/// Result of one policy run.
#[derive(Clone, Debug)]
pub struct RdoRun {
    pub trace: RdoTrace,
    pub processed: DepthSequence,
    /// Summary accumulated frame by frame during the run.
    pub running_summary: RdoSummary,
}

/// Mean per-frame MAD of the sequence encoded at the constant initial QP.
pub fn srdo_threshold(gt: &DepthSequence, codec: &dyn CodecBackend, initial_qp: QuantParam) -> Result<f64> {
    let enc = encode_sequence_frames(codec, gt, &constant_schedule(initial_qp, gt.len()))?;
    let mut total = 0.0;
    for (g, e) in gt.frames().iter().zip(&enc.frames) {
        total += mad::<f64>(g, &e.reconstruction)?;
    }
    Ok(total / gt.len() as f64)
}

/// The configured threshold, or the calibrated default for the policy.
pub fn resolve_threshold(
    gt: &DepthSequence,
    codec: &dyn CodecBackend,
    cfg: &RdoConfig,
    params: &VdmParams<f64>,
    rule: ThresholdRule,
) -> Result<Option<f64>> {
    if cfg.threshold.is_some() {
        return Ok(cfg.threshold);
    }
    match cfg.policy {
        Policy::Wrdo => Ok(None),
        Policy::Srdo => srdo_threshold(gt, codec, cfg.initial_qp).map(Some),
        Policy::VdmRdo => select_threshold(&calibrate(gt, codec, params)?, rule).map(Some),
    }
}

pub fn run_policy(
    gt: &DepthSequence,
    codec: &dyn CodecBackend,
    cfg: &RdoConfig,
    params: &VdmParams<f64>,
) -> Result<RdoRun> {
    cfg.validate()?;
    gt.meta().require_codable()?;
    let threshold = match (cfg.policy, cfg.threshold) {
        (Policy::Wrdo, _) => f64::NAN,
        (_, Some(t)) => t,
        (p, None) => return Err(Error::validation(format!("{p} needs a threshold"))),
    };
    let scorer = Scorer::vdm_only(*params);
    let frames = gt.frames();
    let ssim_ok = ssim_applicable(gt);
    let mut acc = SummaryAccumulator::new(ssim_ok);
    let mut recon = Vec::with_capacity(frames.len());
    let mut records = Vec::with_capacity(frames.len());
    let mut q = cfg.initial_qp;

    for (t, src) in frames.iter().enumerate() {
        let enc = codec.encode_frame(t, src, q)?;
        if !enc.reconstruction.same_shape(src) {
            return Err(Error::validation(format!(
                "codec returned wrong dimensions for frame {t}"
            )));
        }
        recon.push(enc.reconstruction);
        let cur = &recon[t];
        // frame 0 has no predecessor: score the degenerate pair (0, 0)
        let (gt_prev, rec_prev) = if t == 0 {
            (src, cur)
        } else {
            (&frames[t - 1], &recon[t - 1])
        };
        let vdm = scorer.score_pair(t, gt_prev, src, rec_prev, cur)?.vdm;
        let frame_mad = mad::<f64>(src, cur)?;

        let s = if ssim_ok { Some(ssim::<f64>(src, cur)?) } else { None };
        acc.push_frame(psnr::<f64>(src, cur)?, s, enc.estimated_bits, q);
        if t > 0 {
            acc.push_pair_vdm(vdm);
        }

        let metric_value = match cfg.policy {
            Policy::Srdo => frame_mad,
            Policy::Wrdo | Policy::VdmRdo => vdm,
        };
        records.push(RdoRecord {
            frame_index: t,
            qp: q,
            metric_value,
            bits: enc.estimated_bits,
        });

        q = match cfg.policy {
            Policy::Wrdo => q,
            Policy::VdmRdo if vdm > threshold => cfg.raise(q),
            Policy::VdmRdo => cfg.lower(q),
            Policy::Srdo if frame_mad < threshold => cfg.raise(q),
            Policy::Srdo => cfg.lower(q),
        };
    }

    Ok(RdoRun {
        trace: RdoTrace {
            policy: cfg.policy,
            records,
        },
        processed: DepthSequence::new(recon, gt.fps())?,
        running_summary: acc.finish(gt.fps()),
    })
}
