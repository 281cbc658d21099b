//! Acceptance criteria for the metric library, codec and rate controllers.
//!
//! Runs as a plain binary (`harness = false`) so that every criterion prints
//! exactly one PASS/FAIL line, even when an earlier one fails.

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use depth_discomfort::discomfort::{spatial_info, temporal_info};
use depth_discomfort::rate_control::{run_policy, CALIBRATION_QP_MAX, CALIBRATION_QP_MIN};
use depth_discomfort::report::{
    compare_report, default_sweep_qps, fmt_sig6, parse_real, run_outcome, sweep_report, ParamOverrides, Report,
    COMPARE_SECTIONS, SWEEP_HEADER,
};
use depth_discomfort::synthetic::{self, Complexity};
use depth_discomfort::{
    calibrate, delta_z, mad, mse, psnr, spatial_outliers, ssim, temporal_inconsistency, temporal_outliers, DepthFrame,
    DepthSequence, Policy, QuantParam, RdoConfig, Scorer, ThresholdRule, ToyCodec64,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

mod common;
use common::naive;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);
type QpRamp = (f64, fn(usize) -> usize);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(started: Instant, budget: Duration) -> Result<(), String> {
    let spent = started.elapsed();
    ensure(spent < budget, || format!("took {spent:.2?}, budget {budget:.0?}"))
}

fn qp(v: u8) -> QuantParam {
    QuantParam::new(v as i32).unwrap()
}

fn random_sequence(rng: &mut ChaCha8Rng, w: usize, h: usize, frames: usize) -> DepthSequence {
    let gx: f64 = rng.gen_range(-2.0..2.0);
    let gy: f64 = rng.gen_range(-2.0..2.0);
    let vt: f64 = rng.gen_range(-3.0..3.0);
    let base: f64 = rng.gen_range(40.0..200.0);
    let noise: f64 = rng.gen_range(0.0..40.0);
    let frames = (0..frames)
        .map(|t| {
            DepthFrame::from_fn(w, h, |x, y| {
                let v = base + gx * x as f64 + gy * y as f64 + vt * t as f64 + noise * rng.gen_range(-1.0..1.0);
                v.round().clamp(0.0, 255.0) as u8
            })
            .unwrap()
        })
        .collect();
    DepthSequence::new(frames, 30.0).unwrap()
}

fn acceptance_scenes() -> Vec<(String, DepthSequence)> {
    [Complexity::Low, Complexity::Medium, Complexity::High]
        .into_iter()
        .map(|c| {
            (
                format!("{c:?}").to_lowercase(),
                synthetic::depth_scene(64, 64, 30, c).unwrap(),
            )
        })
        .collect()
}

fn lossless_identity() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x1d_e471);
    for i in 0..5 {
        let gt = random_sequence(&mut rng, 64, 64, 10);
        let params = ParamOverrides::default().resolve(&gt).map_err(|e| e.to_string())?;
        let score = Scorer::new(params)
            .score_sequence(&gt, &gt)
            .map_err(|e| e.to_string())?;
        ensure((score.mean_vdm - 1.0).abs() <= 1e-12, || {
            format!("sequence {i}: mean VDM {}", score.mean_vdm)
        })?;
        for f in &score.frames {
            ensure((f.vdm - 1.0).abs() <= 1e-12, || {
                format!("sequence {i} frame {}: VDM {}", f.frame_index, f.vdm)
            })?;
        }
        for (t, f) in gt.frames().iter().enumerate() {
            let s = ssim::<f64>(f, f).unwrap();
            let m = mad::<f64>(f, f).unwrap();
            ensure(s == 1.0 && m == 0.0, || {
                format!("sequence {i} frame {t}: SSIM {s}, MAD {m}")
            })?;
        }
    }
    within_budget(started, Duration::from_secs(1))?;
    Ok(format!(
        "5 sequences, VDM = SSIM = 1 and MAD = 0 in {:.2?}",
        started.elapsed()
    ))
}

fn oracle_equivalence() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x0ac1e);
    let mut worst: f64 = 0.0;
    let mut check = |what: &str, case: usize, lib: f64, reference: f64| -> Result<(), String> {
        let d = (lib - reference).abs();
        worst = worst.max(d);
        ensure(d <= 1e-9, || {
            format!("case {case}: {what} library {lib} vs reference {reference}")
        })
    };
    for case in 0..50 {
        let gt = random_sequence(&mut rng, 16, 16, 4);
        let spread: i32 = rng.gen_range(1..60);
        let proc_frames: Vec<DepthFrame> = gt
            .frames()
            .iter()
            .map(|f| {
                let px = f
                    .pixels()
                    .iter()
                    .map(|&p| (p as i32 + rng.gen_range(-spread..=spread)).clamp(0, 255) as u8)
                    .collect();
                DepthFrame::new(16, 16, px).unwrap()
            })
            .collect();
        let proc = DepthSequence::new(proc_frames, 30.0).unwrap();
        let (g, p) = (gt.frames(), proc.frames());
        for t in 0..g.len() {
            check("MAD", case, mad::<f64>(&g[t], &p[t]).unwrap(), naive::mad(&g[t], &p[t]))?;
            check("MSE", case, mse::<f64>(&g[t], &p[t]).unwrap(), naive::mse(&g[t], &p[t]))?;
        }
        for t in 0..g.len() - 1 {
            let e0 = delta_z::<f64>(&g[t], &p[t]).unwrap();
            let e1 = delta_z::<f64>(&g[t + 1], &p[t + 1]).unwrap();
            check("SO", case, spatial_outliers(&e1), naive::so(&g[t + 1], &p[t + 1]))?;
            check(
                "TO",
                case,
                temporal_outliers(&e0, &e1).unwrap(),
                naive::to(&g[t], &g[t + 1], &p[t], &p[t + 1]),
            )?;
            check(
                "TI",
                case,
                temporal_inconsistency::<f64>(&p[t], &p[t + 1]).unwrap(),
                naive::ti(&p[t], &p[t + 1]),
            )?;
        }
        check("SI", case, spatial_info::<f64>(&gt).unwrap(), naive::spatial_info(g))?;
        check(
            "TI_info",
            case,
            temporal_info::<f64>(&gt).unwrap(),
            naive::temporal_info(g),
        )?;
    }
    within_budget(started, Duration::from_secs(5))?;
    Ok(format!("50 instances, worst deviation {worst:.1e}"))
}

fn codec_monotonicity() -> Outcome {
    let started = Instant::now();
    let gt = synthetic::moving_gradient_texture(64, 64, 30).unwrap();
    let codec = ToyCodec64::new();
    let params = ParamOverrides::default().resolve(&gt).map_err(|e| e.to_string())?;
    let sweep = sweep_report(&gt, &codec, &default_sweep_qps(), &params).map_err(|e| e.to_string())?;
    for w in sweep.rows.windows(2) {
        let (a, b) = (&w[0].summary, &w[1].summary);
        let (qa, qb) = (w[0].qp, w[1].qp);
        ensure(b.mean_psnr_db < a.mean_psnr_db, || {
            format!("PSNR QP {qa} {} -> QP {qb} {}", a.mean_psnr_db, b.mean_psnr_db)
        })?;
        ensure(b.kbits_per_sec < a.kbits_per_sec, || {
            format!("bitrate QP {qa} {} -> QP {qb} {}", a.kbits_per_sec, b.kbits_per_sec)
        })?;
        ensure(b.mean_vdm <= a.mean_vdm, || {
            format!("VDM QP {qa} {} -> QP {qb} {}", a.mean_vdm, b.mean_vdm)
        })?;
    }
    within_budget(started, Duration::from_secs(10))?;
    let psnr: Vec<String> = sweep
        .rows
        .iter()
        .map(|r| format!("{:.2}", r.summary.mean_psnr_db))
        .collect();
    Ok(format!("PSNR {} dB over QP 30..49", psnr.join(" > ")))
}

fn closed_form_fidelity() -> Outcome {
    let gt = DepthFrame::filled(64, 64, 100).unwrap();
    let shifted = DepthFrame::filled(64, 64, 116).unwrap();
    let p = psnr::<f64>(&gt, &shifted).unwrap();
    let black = DepthFrame::filled(64, 64, 0).unwrap();
    let white = DepthFrame::filled(64, 64, 255).unwrap();
    let s = ssim::<f64>(&black, &white).unwrap();
    let mut failures = Vec::new();
    if (p - 24.0654).abs() > 1e-3 {
        failures.push(format!("PSNR {p:.4} dB, expected 24.0654 +- 1e-3"));
    }
    if (s - 0.0002).abs() > 1e-4 {
        failures.push(format!("SSIM {s:.6e}, expected 0.0002 +- 1e-4"));
    }
    if failures.is_empty() {
        Ok(format!("PSNR {p:.4} dB, SSIM {s:.6e}"))
    } else {
        Err(failures.join("; "))
    }
}

fn rate_control_bounds() -> Outcome {
    let codec = ToyCodec64::new();
    let mut content = acceptance_scenes();
    content.push((
        "gradient".into(),
        synthetic::moving_gradient_texture(64, 64, 30).unwrap(),
    ));
    let mut runs = 0;
    for (name, gt) in &content {
        let params = ParamOverrides::default().resolve(gt).map_err(|e| e.to_string())?;
        for policy in Policy::ALL {
            let cfg = RdoConfig::with_policy(policy);
            let (outcome, _) =
                run_outcome(gt, &codec, &cfg, &params, ThresholdRule::Mean).map_err(|e| e.to_string())?;
            let qps: Vec<u8> = outcome.trace.qps().iter().map(|q| q.get()).collect();
            ensure(qps.iter().all(|q| (30..=50).contains(q)), || {
                format!("{name} {policy}: QP out of range {qps:?}")
            })?;
            ensure(qps.windows(2).all(|w| w[0].abs_diff(w[1]) <= 1), || {
                format!("{name} {policy}: step > 1 {qps:?}")
            })?;
            runs += 1;
        }
    }

    let lossless = synthetic::constant(64, 64, 16, 0).unwrap();
    let params = ParamOverrides::default()
        .resolve(&lossless)
        .map_err(|e| e.to_string())?;
    let ramps: [QpRamp; 2] = [
        (0.0, |t| (40 + t).min(50)),
        (1.5, |t| 40usize.saturating_sub(t).max(30)),
    ];
    for (threshold, expect) in ramps {
        let cfg = RdoConfig {
            threshold: Some(threshold),
            ..RdoConfig::with_policy(Policy::VdmRdo)
        };
        let run = run_policy(&lossless, &codec, &cfg, &params).map_err(|e| e.to_string())?;
        let qps: Vec<usize> = run.trace.qps().iter().map(|q| q.get() as usize).collect();
        let want: Vec<usize> = (0..qps.len()).map(expect).collect();
        ensure(qps == want, || {
            format!("threshold {threshold}: trace {qps:?}, expected {want:?}")
        })?;
    }
    Ok(format!(
        "{runs} policy runs within bounds; thresholds 0.0 and 1.5 saturate at 50 and 30 on frame 10"
    ))
}

fn directional_savings() -> Outcome {
    let started = Instant::now();
    let codec = ToyCodec64::new();
    let scenes = acceptance_scenes();
    let report = compare_report(
        &scenes,
        &codec,
        &RdoConfig::default(),
        &[Policy::Wrdo, Policy::VdmRdo],
        &ParamOverrides::default(),
        ThresholdRule::Mean,
    )
    .map_err(|e| e.to_string())?;
    let mut lines = Vec::new();
    let mut failed = false;
    for (i, s) in report.sequences.iter().enumerate() {
        let wrdo = report.summary(i, Policy::Wrdo).unwrap();
        let vdm = &s.outcomes[1];
        let threshold = vdm.threshold.unwrap();
        let saves = vdm.summary.kbits_per_sec <= wrdo.kbits_per_sec;
        let floor = vdm.summary.mean_vdm >= threshold - 0.02;
        failed |= !(saves && floor);
        lines.push(format!(
            "{}: VDM_RDO {:.3} vs WRDO {:.3} kbps{}, mean VDM {:.6} (threshold {:.6})",
            s.name,
            vdm.summary.kbits_per_sec,
            wrdo.kbits_per_sec,
            if saves { "" } else { " [more bits]" },
            vdm.summary.mean_vdm,
            threshold
        ));
    }
    let budget = within_budget(started, Duration::from_secs(30));
    let detail = lines.join("; ");
    match (failed, budget) {
        (false, Ok(())) => Ok(detail),
        (true, _) => Err(detail),
        (false, Err(e)) => Err(e),
    }
}

fn calibration_shape() -> Outcome {
    let codec = ToyCodec64::new();
    let mut content = vec![(
        "gradient".to_string(),
        synthetic::moving_gradient_texture(64, 64, 30).unwrap(),
    )];
    content.extend(acceptance_scenes());
    let mut problems = Vec::new();
    for (name, gt) in &content {
        let params = ParamOverrides::default().resolve(gt).map_err(|e| e.to_string())?;
        let table = calibrate(gt, &codec, &params).map_err(|e| e.to_string())?;
        let qps: Vec<u8> = table.entries().keys().map(|q| q.get()).collect();
        let want: Vec<u8> = (CALIBRATION_QP_MIN..=CALIBRATION_QP_MAX).collect();
        ensure(qps == want, || format!("{name}: table covers {qps:?}"))?;
        let values: Vec<(u8, f64)> = table.entries().iter().map(|(q, &v)| (q.get(), v)).collect();
        for w in values.windows(2) {
            if w[1].1 > w[0].1 {
                problems.push(format!(
                    "{name}: QP {} {:.7} -> QP {} {:.7}",
                    w[0].0, w[0].1, w[1].0, w[1].1
                ));
            }
        }
    }
    if problems.is_empty() {
        Ok(format!("{} tables, 20 entries each, non-increasing", content.len()))
    } else {
        Err(format!("VDM rises with QP: {}", problems.join("; ")))
    }
}

fn json_number(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => parse_real(s),
        Value::Null => Some(f64::NAN),
        _ => None,
    }
}

fn same_at_csv_precision(csv_field: &str, json: &Value) -> bool {
    match json_number(json) {
        Some(x) => fmt_sig6(x) == csv_field,
        None => false,
    }
}

fn cross_command_consistency() -> Outcome {
    let codec = ToyCodec64::new();
    let gt = synthetic::moving_gradient_texture(64, 64, 30).unwrap();
    let params = ParamOverrides::default().resolve(&gt).map_err(|e| e.to_string())?;
    let sweep = sweep_report(&gt, &codec, &[qp(40)], &params).map_err(|e| e.to_string())?;
    let compare = compare_report(
        &[("gradient".into(), gt.clone())],
        &codec,
        &RdoConfig::default(),
        &[Policy::Wrdo, Policy::VdmRdo],
        &ParamOverrides::default(),
        ThresholdRule::Mean,
    )
    .map_err(|e| e.to_string())?;
    let s = &sweep.rows[0].summary;
    let c = compare.summary(0, Policy::Wrdo).unwrap();
    ensure(
        s.kbits_per_sec.to_bits() == c.kbits_per_sec.to_bits()
            && s.mean_psnr_db.to_bits() == c.mean_psnr_db.to_bits()
            && s.mean_ssim.to_bits() == c.mean_ssim.to_bits()
            && s.mean_vdm.to_bits() == c.mean_vdm.to_bits(),
        || format!("sweep QP 40 {s:?} vs compare WRDO {c:?}"),
    )?;

    let mut checked = 0;
    let json = compare.to_json();
    let keys = ["kbits_per_sec", "mean_psnr_db", "mean_ssim", "mean_vdm"];
    for line in compare.to_csv().lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let section = COMPARE_SECTIONS
            .iter()
            .position(|&s| s == fields[0])
            .ok_or("unknown section")?;
        for (col, label) in ["WRDO", "VDM_RDO"].iter().enumerate() {
            let value = if fields[1] == "AVERAGE" {
                &json["average"][label][COMPARE_SECTIONS[section]]
            } else {
                &json["sequences"][0]["results"][label][keys[section]]
            };
            ensure(same_at_csv_precision(fields[2 + col], value), || {
                format!("compare {line}: JSON {value}")
            })?;
            checked += 1;
        }
    }
    let sweep_json = sweep.to_json();
    for (r, line) in sweep.to_csv().lines().skip(1).enumerate() {
        for (k, field) in line.split(',').enumerate().skip(1) {
            let value = &sweep_json["rows"][r][SWEEP_HEADER[k]];
            ensure(same_at_csv_precision(field, value), || {
                format!("sweep {line}: JSON {value}")
            })?;
            checked += 1;
        }
    }
    Ok(format!(
        "WRDO equals the QP-40 sweep row bit-for-bit; {checked} CSV/JSON fields agree"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("lossless identity", lossless_identity),
        ("oracle equivalence", oracle_equivalence),
        ("codec monotonicity", codec_monotonicity),
        ("closed-form fidelity", closed_form_fidelity),
        ("rate-control bounds and dynamics", rate_control_bounds),
        ("directional bitrate savings", directional_savings),
        ("calibration shape", calibration_shape),
        ("cross-command consistency", cross_command_consistency),
    ];
    let started = Instant::now();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {}. {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {}. {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.2?}",
        criteria.len() - failed,
        started.elapsed()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
