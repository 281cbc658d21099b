use std::fs;
use std::path::Path;

use depth_discomfort::codec::{precoded_frame_name, qp_dir_name, CodecBackend, MANIFEST_NAME};
use depth_discomfort::frame_io::write_pgm;
use depth_discomfort::rate_control::{resolve_threshold, RdoRun};
use depth_discomfort::report::{compare_report, run_outcome, sweep_report, ParamOverrides};
use depth_discomfort::synthetic::{self, Complexity};
use depth_discomfort::{
    calibrate, run_policy, select_threshold, summarize, DepthSequence, Policy, PrecodedProvider, QuantParam,
    RateReport, RdoConfig, ThresholdRule, ToyCodec64, VdmParams64,
};
use proptest::prelude::*;
use tempfile::tempdir;

fn qp(v: u8) -> QuantParam {
    QuantParam::new(v as i32).unwrap()
}

fn params(gt: &DepthSequence) -> VdmParams64 {
    ParamOverrides::default().resolve(gt).unwrap()
}

fn run(gt: &DepthSequence, cfg: RdoConfig) -> RdoRun {
    let codec = ToyCodec64::new();
    let p = params(gt);
    let threshold = resolve_threshold(gt, &codec, &cfg, &p, ThresholdRule::Mean).unwrap();
    run_policy(gt, &codec, &RdoConfig { threshold, ..cfg }, &p).unwrap()
}

#[test]
fn policy_runs_are_deterministic() {
    let gt = synthetic::depth_scene(32, 32, 16, Complexity::High).unwrap();
    for policy in Policy::ALL {
        let a = run(&gt, RdoConfig::with_policy(policy));
        let b = run(&gt, RdoConfig::with_policy(policy));
        assert_eq!(a.trace, b.trace, "{policy}");
        assert_eq!(a.processed, b.processed);
    }
}

#[test]
fn running_summary_matches_recomputation() {
    let gt = synthetic::depth_scene(32, 32, 16, Complexity::Medium).unwrap();
    for policy in Policy::ALL {
        let r = run(&gt, RdoConfig::with_policy(policy));
        let s = summarize(&r.trace, &gt, &r.processed, gt.fps(), &params(&gt)).unwrap();
        let live = r.running_summary;
        for (a, b) in [
            (s.kbits_per_sec, live.kbits_per_sec),
            (s.mean_psnr_db, live.mean_psnr_db),
            (s.mean_ssim, live.mean_ssim),
            (s.mean_vdm, live.mean_vdm),
            (s.mean_qp, live.mean_qp),
        ] {
            assert!((a - b).abs() <= 1e-9, "{policy}: {a} vs {b}");
        }
        assert_eq!(s.infinite_psnr_frames, live.infinite_psnr_frames);
    }
}

#[test]
fn stricter_floor_never_raises_mean_qp() {
    let codec = ToyCodec64::new();
    for complexity in [Complexity::Medium, Complexity::High] {
        let gt = synthetic::depth_scene(64, 64, 30, complexity).unwrap();
        let p = params(&gt);
        let table = calibrate(&gt, &codec, &p).unwrap();
        let mut previous = f64::INFINITY;
        for pct in [10.0, 50.0, 90.0] {
            let threshold = select_threshold(&table, ThresholdRule::Percentile(pct)).unwrap();
            let cfg = RdoConfig {
                threshold: Some(threshold),
                ..RdoConfig::with_policy(Policy::VdmRdo)
            };
            let mean_qp = run_policy(&gt, &codec, &cfg, &p).unwrap().trace.mean_qp();
            assert!(
                mean_qp <= previous,
                "{complexity:?} pct {pct}: mean QP {mean_qp} after {previous}"
            );
            previous = mean_qp;
        }
    }
}

/// When the calibrated floor sits at or below the QP-40 quality, the
/// controller has room to raise QP and must not spend more than WRDO.
#[test]
fn savings_whenever_floor_is_below_constant_qp_quality() {
    let codec = ToyCodec64::new();
    let mut content: Vec<DepthSequence> = [Complexity::Low, Complexity::Medium, Complexity::High]
        .into_iter()
        .map(|c| synthetic::depth_scene(64, 64, 30, c).unwrap())
        .collect();
    content.push(synthetic::moving_gradient_texture(64, 64, 30).unwrap());
    let mut applicable = 0;
    for gt in &content {
        let p = params(gt);
        let table = calibrate(gt, &codec, &p).unwrap();
        let threshold = select_threshold(&table, ThresholdRule::Mean).unwrap();
        if threshold > table.get(qp(40)).unwrap() {
            continue;
        }
        applicable += 1;
        let wrdo = run_outcome(
            gt,
            &codec,
            &RdoConfig::with_policy(Policy::Wrdo),
            &p,
            ThresholdRule::Mean,
        )
        .unwrap()
        .0;
        let vdm = run_outcome(
            gt,
            &codec,
            &RdoConfig::with_policy(Policy::VdmRdo),
            &p,
            ThresholdRule::Mean,
        )
        .unwrap()
        .0;
        assert!(
            vdm.summary.kbits_per_sec <= wrdo.summary.kbits_per_sec,
            "{} > {}",
            vdm.summary.kbits_per_sec,
            wrdo.summary.kbits_per_sec
        );
    }
    assert!(applicable >= 2, "only {applicable} sequences met the precondition");
}

#[test]
fn compare_columns_equal_single_policy_runs() {
    let codec = ToyCodec64::new();
    let seqs = vec![
        (
            "a".to_string(),
            synthetic::depth_scene(32, 32, 12, Complexity::Low).unwrap(),
        ),
        ("b".to_string(), synthetic::moving_gradient_texture(32, 32, 12).unwrap()),
    ];
    let report = compare_report(
        &seqs,
        &codec,
        &RdoConfig::default(),
        &Policy::ALL,
        &ParamOverrides::default(),
        ThresholdRule::Mean,
    )
    .unwrap();
    for (i, (_, gt)) in seqs.iter().enumerate() {
        for (j, &policy) in Policy::ALL.iter().enumerate() {
            let (single, _) = run_outcome(
                gt,
                &codec,
                &RdoConfig::with_policy(policy),
                &params(gt),
                ThresholdRule::Mean,
            )
            .unwrap();
            assert_eq!(report.sequences[i].outcomes[j], single);
        }
    }
}

fn write_precoded(root: &Path, gt: &DepthSequence, qps: &[QuantParam]) {
    let codec = ToyCodec64::new();
    for &q in qps {
        let dir = root.join(qp_dir_name(q));
        fs::create_dir_all(&dir).unwrap();
        let mut manifest = String::from("frame,bits\n");
        for (t, f) in gt.frames().iter().enumerate() {
            let enc = codec.encode_frame(t, f, q).unwrap();
            write_pgm(&enc.reconstruction, dir.join(precoded_frame_name(t))).unwrap();
            manifest.push_str(&format!("{t},{}\n", enc.estimated_bits.ceil()));
        }
        fs::write(dir.join(MANIFEST_NAME), manifest).unwrap();
    }
}

#[test]
fn precoded_sweep_reproduces_manifest_totals() {
    let gt = synthetic::depth_scene(32, 24, 10, Complexity::Medium).unwrap();
    let qps = [qp(30), qp(40), qp(49)];
    let root = tempdir().unwrap();
    write_precoded(root.path(), &gt, &qps);
    let provider = PrecodedProvider::discover(root.path()).unwrap();
    let sweep = sweep_report(&gt, &provider, &qps, &params(&gt)).unwrap();
    for row in &sweep.rows {
        let total = provider.total_bits(row.qp).unwrap();
        let expected = RateReport::new(total, gt.len(), gt.fps()).kbits_per_sec;
        assert_eq!(row.summary.kbits_per_sec, expected, "QP {}", row.qp);
    }
    // the provider serves the toy codec's reconstructions, so quality matches
    let toy = sweep_report(&gt, &ToyCodec64::new(), &qps, &params(&gt)).unwrap();
    for (a, b) in sweep.rows.iter().zip(&toy.rows) {
        assert_eq!(a.summary.mean_psnr_db, b.summary.mean_psnr_db);
        assert_eq!(a.summary.mean_vdm, b.summary.mean_vdm);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn traces_respect_bounds_and_step(
        step in 1u8..5,
        lo in 20u8..40,
        span in 0u8..12,
        threshold in 0.99f64..1.01,
        srdo in any::<bool>(),
    ) {
        let gt = synthetic::depth_scene(16, 16, 14, Complexity::High).unwrap();
        let hi = lo + span;
        let cfg = RdoConfig {
            policy: if srdo { Policy::Srdo } else { Policy::VdmRdo },
            initial_qp: qp(lo + span / 2),
            qp_min: qp(lo),
            qp_max: qp(hi),
            step,
            threshold: Some(if srdo { (threshold - 0.99) * 300.0 } else { threshold }),
        };
        let r = run_policy(&gt, &ToyCodec64::new(), &cfg, &params(&gt)).unwrap();
        let qps: Vec<u8> = r.trace.qps().iter().map(|q| q.get()).collect();
        prop_assert_eq!(qps[0], lo + span / 2);
        prop_assert!(qps.iter().all(|q| (lo..=hi).contains(q)), "{:?}", qps);
        prop_assert!(qps.windows(2).all(|w| w[0].abs_diff(w[1]) <= step), "{:?}", qps);
    }
}
