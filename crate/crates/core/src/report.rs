//! Tables produced by the command-line tool.
//!
//! CSV output rounds reals to 6 significant digits; JSON keeps full
//! precision. Infinite values serialize as `inf` in both (a JSON string),
//! NaN as `nan` in CSV and `null` in JSON.

use std::str::FromStr;

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::codec::{constant_schedule, encode_sequence_frames, CodecBackend, QuantParam};
use crate::discomfort::{content_indexes, ContentIndexes, Scorer, VdmParams};
use crate::error::{Error, Result};
use crate::fidelity::{mad, normalized_psnr, psnr, ssim, SSIM_WINDOW};
use crate::frame::DepthSequence;
use crate::rate_control::{
    calibrate, resolve_threshold, run_policy, select_threshold, summarize, summary_of, Policy, RdoConfig, RdoSummary,
    RdoTrace, ThresholdRule,
};

/// Default constant-QP sweep grid.
pub const SWEEP_QPS: [u8; 5] = [30, 35, 40, 45, 49];

pub const AVERAGE_ROW: &str = "AVERAGE";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::validation(format!("unknown output format {other:?}"))),
        }
    }
}

/// A real rounded to 6 significant digits, in shortest form.
pub fn fmt_sig6(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{x:.5e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

/// Parses a value written by [`fmt_sig6`].
pub fn parse_real(s: &str) -> Option<f64> {
    match s.trim() {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        "nan" => Some(f64::NAN),
        other => other.parse().ok(),
    }
}

pub fn json_real(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        Value::Null
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn csv_line(fields: &[String]) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(fields).expect("in-memory CSV write");
    String::from_utf8(w.into_inner().expect("in-memory CSV flush")).expect("CSV output is UTF-8")
}

/// Something that renders as both a CSV table and a JSON document.
pub trait Report {
    fn to_csv(&self) -> String;
    fn to_json(&self) -> Value;

    fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json()).expect("JSON value serializes");
                s.push('\n');
                s
            }
        }
    }
}

/// User overrides for `k,a,b,c`; unset exponents default to the content
/// indexes of the ground truth.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ParamOverrides {
    pub k: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub c: Option<f64>,
}

impl FromStr for ParamOverrides {
    type Err = Error;

    /// `k,a,b,c`; any entry may be empty or `auto`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(Error::validation(format!("--params wants k,a,b,c, got {s:?}")));
        }
        let field = |v: &str| -> Result<Option<f64>> {
            if v.is_empty() || v.eq_ignore_ascii_case("auto") {
                Ok(None)
            } else {
                v.parse()
                    .map(Some)
                    .map_err(|_| Error::validation(format!("bad number {v:?} in --params")))
            }
        };
        Ok(ParamOverrides {
            k: field(parts[0])?,
            a: field(parts[1])?,
            b: field(parts[2])?,
            c: field(parts[3])?,
        })
    }
}

impl ParamOverrides {
    pub fn resolve(&self, gt: &DepthSequence) -> Result<VdmParams<f64>> {
        let content = content_indexes::<f64>(gt)?;
        self.resolve_with(&content)
    }

    pub fn resolve_with(&self, content: &ContentIndexes<f64>) -> Result<VdmParams<f64>> {
        let d = VdmParams::vdm(content);
        VdmParams::new(
            self.k.unwrap_or(d.k),
            self.a.unwrap_or(d.a),
            self.b.unwrap_or(d.b),
            self.c.unwrap_or(d.c),
        )
    }
}

fn mean_finite_or_inf(values: &[f64]) -> f64 {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        f64::INFINITY
    } else {
        finite.iter().sum::<f64>() / finite.len() as f64
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricsRow {
    pub frame: usize,
    pub so: f64,
    pub to: f64,
    pub ti: f64,
    pub vdm: f64,
    pub vqm3: f64,
    pub psnr_db: f64,
    pub ssim: f64,
    pub mad: f64,
}

impl MetricsRow {
    fn values(&self) -> [f64; 8] {
        [
            self.so,
            self.to,
            self.ti,
            self.vdm,
            self.vqm3,
            self.psnr_db,
            self.ssim,
            self.mad,
        ]
    }
}

/// Per-frame discomfort and fidelity metrics. Pair metrics for `(t, t+1)`
/// share a row with the fidelity metrics of frame `t+1`.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    pub params: VdmParams<f64>,
    pub rows: Vec<MetricsRow>,
    /// Column means; PSNR averages finite rows only.
    pub mean: MetricsRow,
}

pub const METRICS_HEADER: [&str; 9] = ["frame", "so", "to", "ti", "vdm", "vqm3", "psnr_db", "ssim", "mad"];

pub fn metrics_report(gt: &DepthSequence, proc: &DepthSequence, params: &VdmParams<f64>) -> Result<MetricsReport> {
    let score = Scorer::new(*params).score_sequence(gt, proc)?;
    let ssim_ok = gt.meta().width >= SSIM_WINDOW && gt.meta().height >= SSIM_WINDOW;
    let rows = score
        .frames
        .par_iter()
        .map(|f| {
            let (g, p) = (&gt.frames()[f.frame_index], &proc.frames()[f.frame_index]);
            Ok(MetricsRow {
                frame: f.frame_index,
                so: f.indexes.so,
                to: f.indexes.to,
                ti: f.indexes.ti,
                vdm: f.vdm,
                vqm3: f.vqm3.unwrap_or(f64::NAN),
                psnr_db: psnr(g, p)?,
                ssim: if ssim_ok { ssim(g, p)? } else { f64::NAN },
                mad: mad(g, p)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let col = |f: fn(&MetricsRow) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    let mean_row = MetricsRow {
        frame: rows.len(),
        so: mean(&col(|r| r.so)),
        to: mean(&col(|r| r.to)),
        ti: mean(&col(|r| r.ti)),
        vdm: mean(&col(|r| r.vdm)),
        vqm3: mean(&col(|r| r.vqm3)),
        psnr_db: mean_finite_or_inf(&col(|r| r.psnr_db)),
        ssim: mean(&col(|r| r.ssim)),
        mad: mean(&col(|r| r.mad)),
    };
    Ok(MetricsReport {
        params: *params,
        rows,
        mean: mean_row,
    })
}

fn metrics_json(r: &MetricsRow) -> Map<String, Value> {
    let mut m = Map::new();
    for (name, v) in METRICS_HEADER[1..].iter().zip(r.values()) {
        m.insert((*name).to_string(), json_real(v));
    }
    m
}

fn params_json(p: &VdmParams<f64>) -> Value {
    json!({ "k": json_real(p.k), "a": json_real(p.a), "b": json_real(p.b), "c": json_real(p.c) })
}

impl Report for MetricsReport {
    fn to_csv(&self) -> String {
        let mut out = csv_line(&METRICS_HEADER.map(String::from));
        let line = |label: String, r: &MetricsRow| {
            let mut fields = vec![label];
            fields.extend(r.values().iter().map(|&v| fmt_sig6(v)));
            csv_line(&fields)
        };
        for r in &self.rows {
            out.push_str(&line(r.frame.to_string(), r));
        }
        out.push_str(&line("mean".into(), &self.mean));
        out
    }

    fn to_json(&self) -> Value {
        let frames: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut m = metrics_json(r);
                m.insert("frame".into(), json!(r.frame));
                Value::Object(m)
            })
            .collect();
        json!({
            "params": params_json(&self.params),
            "frames": frames,
            "mean": Value::Object(metrics_json(&self.mean)),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SitiReport(pub ContentIndexes<f64>);

pub const SITI_HEADER: [&str; 4] = ["si", "ti_info", "s_inf", "t_inf"];

pub fn siti_report(seq: &DepthSequence) -> Result<SitiReport> {
    Ok(SitiReport(content_indexes::<f64>(seq)?))
}

impl SitiReport {
    fn values(&self) -> [f64; 4] {
        [self.0.spatial_info, self.0.temporal_info, self.0.s_inf, self.0.t_inf]
    }
}

impl Report for SitiReport {
    fn to_csv(&self) -> String {
        let mut out = csv_line(&SITI_HEADER.map(String::from));
        out.push_str(&csv_line(&self.values().map(fmt_sig6)));
        out
    }

    fn to_json(&self) -> Value {
        let mut m = Map::new();
        for (name, v) in SITI_HEADER.iter().zip(self.values()) {
            m.insert((*name).to_string(), json_real(v));
        }
        Value::Object(m)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub qp: QuantParam,
    pub summary: RdoSummary,
    /// `None` when no QP produced a finite PSNR.
    pub normalized_psnr: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub params: VdmParams<f64>,
    pub rows: Vec<SweepRow>,
}

pub const SWEEP_HEADER: [&str; 6] = [
    "qp",
    "mean_vdm",
    "mean_ssim",
    "mean_psnr_db",
    "normalized_psnr",
    "kbits_per_sec",
];

pub fn default_sweep_qps() -> Vec<QuantParam> {
    SWEEP_QPS
        .iter()
        .map(|&q| QuantParam::new(q as i32).expect("sweep QP in range"))
        .collect()
}

/// Constant-QP encode and score of `gt` at every QP in `qps`.
pub fn sweep_report(
    gt: &DepthSequence,
    codec: &dyn CodecBackend,
    qps: &[QuantParam],
    params: &VdmParams<f64>,
) -> Result<SweepReport> {
    if qps.is_empty() {
        return Err(Error::validation("sweep needs at least one QP"));
    }
    let summaries = qps
        .par_iter()
        .map(|&q| {
            let schedule = constant_schedule(q, gt.len());
            let enc = encode_sequence_frames(codec, gt, &schedule)?;
            summary_of(
                gt,
                &enc.reconstruction()?,
                &enc.frame_bits(),
                &schedule,
                gt.fps(),
                params,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let psnrs: Vec<f64> = summaries.iter().map(|s| s.mean_psnr_db).collect();
    let normalized = normalized_psnr(&psnrs).ok();
    let rows = qps
        .iter()
        .zip(summaries)
        .enumerate()
        .map(|(i, (&qp, summary))| SweepRow {
            qp,
            summary,
            normalized_psnr: normalized.as_ref().map(|n| n[i]),
        })
        .collect();
    Ok(SweepReport { params: *params, rows })
}

impl SweepRow {
    fn values(&self) -> [f64; 5] {
        [
            self.summary.mean_vdm,
            self.summary.mean_ssim,
            self.summary.mean_psnr_db,
            self.normalized_psnr.unwrap_or(f64::NAN),
            self.summary.kbits_per_sec,
        ]
    }
}

impl Report for SweepReport {
    fn to_csv(&self) -> String {
        let mut out = csv_line(&SWEEP_HEADER.map(String::from));
        for r in &self.rows {
            let mut fields = vec![r.qp.to_string()];
            fields.extend(r.values().iter().map(|&v| fmt_sig6(v)));
            out.push_str(&csv_line(&fields));
        }
        out
    }

    fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut m = Map::new();
                m.insert("qp".into(), json!(r.qp.get()));
                for (name, v) in SWEEP_HEADER[1..].iter().zip(r.values()) {
                    m.insert((*name).to_string(), json_real(v));
                }
                Value::Object(m)
            })
            .collect();
        json!({ "params": params_json(&self.params), "rows": rows })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationReport {
    pub rule: ThresholdRule,
    pub threshold: f64,
    pub entries: Vec<(QuantParam, f64)>,
}

pub const CALIBRATION_HEADER: [&str; 2] = ["qp", "mean_vdm"];

pub fn calibration_report(
    gt: &DepthSequence,
    codec: &dyn CodecBackend,
    params: &VdmParams<f64>,
    rule: ThresholdRule,
) -> Result<CalibrationReport> {
    let table = calibrate(gt, codec, params)?;
    Ok(CalibrationReport {
        rule,
        threshold: select_threshold(&table, rule)?,
        entries: table.entries().iter().map(|(&q, &v)| (q, v)).collect(),
    })
}

impl Report for CalibrationReport {
    /// Table rows followed by a `threshold` row.
    fn to_csv(&self) -> String {
        let mut out = csv_line(&CALIBRATION_HEADER.map(String::from));
        for (q, v) in &self.entries {
            out.push_str(&csv_line(&[q.to_string(), fmt_sig6(*v)]));
        }
        out.push_str(&csv_line(&["threshold".into(), fmt_sig6(self.threshold)]));
        out
    }

    fn to_json(&self) -> Value {
        let entries: Vec<Value> = self
            .entries
            .iter()
            .map(|(q, v)| json!({ "qp": q.get(), "mean_vdm": json_real(*v) }))
            .collect();
        json!({ "rule": self.rule.to_string(), "threshold": json_real(self.threshold), "entries": entries })
    }
}

/// One policy applied to one sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyOutcome {
    pub policy: Policy,
    pub threshold: Option<f64>,
    pub summary: RdoSummary,
    pub trace: RdoTrace,
}

/// Resolves the threshold, runs the policy and summarizes the result.
pub fn run_outcome(
    gt: &DepthSequence,
    codec: &dyn CodecBackend,
    cfg: &RdoConfig,
    params: &VdmParams<f64>,
    rule: ThresholdRule,
) -> Result<(PolicyOutcome, DepthSequence)> {
    let threshold = resolve_threshold(gt, codec, cfg, params, rule)?;
    let cfg = RdoConfig { threshold, ..*cfg };
    let run = run_policy(gt, codec, &cfg, params)?;
    let summary = summarize(&run.trace, gt, &run.processed, gt.fps(), params)?;
    Ok((
        PolicyOutcome {
            policy: cfg.policy,
            threshold,
            summary,
            trace: run.trace,
        },
        run.processed,
    ))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SequenceOutcomes {
    pub name: String,
    pub params: VdmParams<f64>,
    pub outcomes: Vec<PolicyOutcome>,
}

/// Rate-distortion comparison: one row per sequence, one column per policy,
/// in sections for bitrate, PSNR, SSIM and VDM, plus an AVERAGE row.
#[derive(Clone, Debug, PartialEq)]
pub struct CompareReport {
    pub policies: Vec<Policy>,
    pub sequences: Vec<SequenceOutcomes>,
}

pub const COMPARE_SECTIONS: [&str; 4] = ["bitrate_kbps", "psnr_db", "ssim", "vdm"];

fn section_value(s: &RdoSummary, section: usize) -> f64 {
    match section {
        0 => s.kbits_per_sec,
        1 => s.mean_psnr_db,
        2 => s.mean_ssim,
        _ => s.mean_vdm,
    }
}

pub fn compare_report(
    sequences: &[(String, DepthSequence)],
    codec: &dyn CodecBackend,
    base: &RdoConfig,
    policies: &[Policy],
    overrides: &ParamOverrides,
    rule: ThresholdRule,
) -> Result<CompareReport> {
    if sequences.is_empty() || policies.is_empty() {
        return Err(Error::validation("compare needs at least one sequence and one policy"));
    }
    let mut out = Vec::with_capacity(sequences.len());
    for (name, gt) in sequences {
        let params = overrides.resolve(gt)?;
        let outcomes = policies
            .iter()
            .map(|&policy| {
                let cfg = RdoConfig { policy, ..*base };
                run_outcome(gt, codec, &cfg, &params, rule).map(|(o, _)| o)
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(SequenceOutcomes {
            name: name.clone(),
            params,
            outcomes,
        });
    }
    Ok(CompareReport {
        policies: policies.to_vec(),
        sequences: out,
    })
}

impl CompareReport {
    pub fn summary(&self, sequence: usize, policy: Policy) -> Option<&RdoSummary> {
        let idx = self.policies.iter().position(|&p| p == policy)?;
        self.sequences.get(sequence).map(|s| &s.outcomes[idx].summary)
    }

    /// Arithmetic mean over sequences of one section for one policy column.
    pub fn average(&self, section: usize, column: usize) -> f64 {
        let v: Vec<f64> = self
            .sequences
            .iter()
            .map(|s| section_value(&s.outcomes[column].summary, section))
            .collect();
        mean(&v)
    }
}

impl Report for CompareReport {
    fn to_csv(&self) -> String {
        let mut header = vec!["section".to_string(), "sequence".to_string()];
        header.extend(self.policies.iter().map(|p| p.label().to_string()));
        let mut out = csv_line(&header);
        for (si, section) in COMPARE_SECTIONS.iter().enumerate() {
            for s in &self.sequences {
                let mut fields = vec![section.to_string(), s.name.clone()];
                fields.extend(s.outcomes.iter().map(|o| fmt_sig6(section_value(&o.summary, si))));
                out.push_str(&csv_line(&fields));
            }
            let mut fields = vec![section.to_string(), AVERAGE_ROW.to_string()];
            fields.extend((0..self.policies.len()).map(|c| fmt_sig6(self.average(si, c))));
            out.push_str(&csv_line(&fields));
        }
        out
    }

    fn to_json(&self) -> Value {
        let summary_json = |s: &RdoSummary| {
            json!({
                "kbits_per_sec": json_real(s.kbits_per_sec),
                "mean_psnr_db": json_real(s.mean_psnr_db),
                "infinite_psnr_frames": s.infinite_psnr_frames,
                "mean_ssim": json_real(s.mean_ssim),
                "mean_vdm": json_real(s.mean_vdm),
                "mean_qp": json_real(s.mean_qp),
            })
        };
        let sequences: Vec<Value> = self
            .sequences
            .iter()
            .map(|s| {
                let mut results = Map::new();
                for o in &s.outcomes {
                    let mut v = summary_json(&o.summary);
                    v["threshold"] = o.threshold.map_or(Value::Null, json_real);
                    results.insert(o.policy.label().into(), v);
                }
                json!({ "name": s.name, "params": params_json(&s.params), "results": results })
            })
            .collect();
        let mut average = Map::new();
        for (c, p) in self.policies.iter().enumerate() {
            let mut m = Map::new();
            for (si, section) in COMPARE_SECTIONS.iter().enumerate() {
                m.insert((*section).to_string(), json_real(self.average(si, c)));
            }
            average.insert(p.label().into(), Value::Object(m));
        }
        json!({
            "policies": self.policies.iter().map(|p| p.label()).collect::<Vec<_>>(),
            "sequences": sequences,
            "average": average,
        })
    }
}

pub const TRACE_HEADER: [&str; 4] = ["frame", "qp", "metric", "bits"];

/// Per-frame trace as CSV.
pub fn trace_csv(trace: &RdoTrace) -> String {
    let mut out = csv_line(&TRACE_HEADER.map(String::from));
    for r in &trace.records {
        out.push_str(&csv_line(&[
            r.frame_index.to_string(),
            r.qp.to_string(),
            fmt_sig6(r.metric_value),
            fmt_sig6(r.bits),
        ]));
    }
    out
}
