//! `vdmtool`: depth-video discomfort metrics, constant-QP sweeps, VDM-RDO
//! calibration and rate-control comparisons from the command line.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use depth_discomfort::codec::{CodecBackend, PrecodedProvider};
use depth_discomfort::frame_io::{write_pgm_sequence, write_raw_y};
use depth_discomfort::report::{
    calibration_report, compare_report, metrics_report, run_outcome, siti_report, sweep_report, trace_csv,
    CompareReport, OutputFormat, ParamOverrides, Report, SequenceOutcomes, SWEEP_QPS,
};
use depth_discomfort::synthetic::{self, Complexity};
use depth_discomfort::{
    read_pgm_sequence, read_raw_y, DepthSequence, Error, Policy, QuantParam, RawLayout, RdoConfig, Result,
    SequenceMeta, ThresholdRule, ToyCodec64,
};

#[derive(Parser)]
#[command(
    name = "vdmtool",
    version,
    about = "Depth-video discomfort metrics and QP rate control"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-frame SO, TO, TI, VDM, 3VQM, PSNR, SSIM and MAD of a processed sequence.
    Metrics {
        #[command(flatten)]
        input: Input,
        /// Processed (decoded) sequence, same geometry as --gt.
        #[arg(long)]
        proc: PathBuf,
        #[command(flatten)]
        model: Model,
        #[command(flatten)]
        output: Output,
    },
    /// Spatial and temporal information indexes of a sequence.
    Siti {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        output: Output,
    },
    /// Constant-QP encodes over a QP grid.
    Sweep {
        #[command(flatten)]
        input: Input,
        /// QPs to encode at.
        #[arg(long, value_delimiter = ',', default_values_t = SWEEP_QPS.to_vec())]
        qp: Vec<u8>,
        #[command(flatten)]
        model: Model,
        #[command(flatten)]
        codec: CodecArg,
        #[command(flatten)]
        output: Output,
    },
    /// Mean VDM at every constant QP in 30..=49 and the derived threshold.
    Calibrate {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value = "mean")]
        threshold_rule: ThresholdRule,
        #[command(flatten)]
        model: Model,
        #[command(flatten)]
        codec: CodecArg,
        #[command(flatten)]
        output: Output,
    },
    /// Encodes one sequence under one rate-control policy.
    Rdo {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value = "VDM_RDO")]
        policy: Policy,
        #[command(flatten)]
        control: Control,
        #[command(flatten)]
        model: Model,
        #[command(flatten)]
        codec: CodecArg,
        /// Also write the per-frame QP trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Also write the reconstruction as a PGM directory.
        #[arg(long)]
        recon: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Runs several policies on one or more sequences side by side.
    Compare {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_delimiter = ',', default_values = ["WRDO", "SRDO", "VDM_RDO"])]
        policy: Vec<Policy>,
        #[command(flatten)]
        control: Control,
        #[command(flatten)]
        model: Model,
        #[command(flatten)]
        codec: CodecArg,
        #[command(flatten)]
        output: Output,
    },
    /// Writes a synthetic test sequence.
    Synth {
        /// ramp, gradient, low, medium, high or constant:<value>
        #[arg(long)]
        kind: SynthKind,
        #[arg(long, default_value_t = 64)]
        width: usize,
        #[arg(long, default_value_t = 64)]
        height: usize,
        #[arg(long, default_value_t = 30)]
        frames: usize,
        /// Raw Y file, or a directory when --pgm is given.
        #[arg(long)]
        out: PathBuf,
        /// Write a PGM directory (`frame_0000.pgm`, ...) instead of raw Y.
        #[arg(long)]
        pgm: bool,
    },
}

/// Where the ground truth comes from. A directory is read as a PGM
/// sequence; anything else as raw 8-bit luma of the given geometry.
#[derive(Args)]
struct Input {
    /// Ground-truth sequence (repeat for compare).
    #[arg(long, required = true)]
    gt: Vec<PathBuf>,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    /// Frames to read from raw input; 0 reads all.
    #[arg(long, default_value_t = 0)]
    frames: usize,
    #[arg(long, default_value_t = 30.0)]
    fps: f64,
    /// Raw input is YUV 4:2:0; chroma planes are skipped.
    #[arg(long)]
    yuv420: bool,
    /// File pattern inside PGM directories (`*` or `%0Nd` marks the index).
    #[arg(long, default_value = "*.pgm")]
    pattern: String,
}

#[derive(Args)]
struct Model {
    /// VDM `k,a,b,c`; empty or `auto` entries use the content defaults.
    #[arg(long, default_value = ",,,")]
    params: ParamOverrides,
}

#[derive(Args)]
struct CodecArg {
    /// `toy` or `precoded:<dir>`.
    #[arg(long, default_value = "toy")]
    codec: CodecSpec,
}

#[derive(Args)]
struct Control {
    /// Initial QP.
    #[arg(long, default_value_t = 40)]
    qp: u8,
    #[arg(long, default_value_t = 30)]
    qp_min: u8,
    #[arg(long, default_value_t = 50)]
    qp_max: u8,
    #[arg(long, default_value_t = 1)]
    step: u8,
    /// Fixed threshold; calibrated from the content when omitted.
    #[arg(long)]
    threshold: Option<f64>,
    /// `mean`, `qp:<N>` or `pct:<P>` over the calibration table.
    #[arg(long, default_value = "mean")]
    threshold_rule: ThresholdRule,
}

#[derive(Args)]
struct Output {
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
}

#[derive(Clone)]
enum CodecSpec {
    Toy,
    Precoded(PathBuf),
}

impl FromStr for CodecSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None if s == "toy" => Ok(CodecSpec::Toy),
            Some(("precoded", dir)) if !dir.is_empty() => Ok(CodecSpec::Precoded(dir.into())),
            _ => Err(Error::Validation(format!(
                "unknown codec {s:?} (toy or precoded:<dir>)"
            ))),
        }
    }
}

#[derive(Clone, Copy)]
enum SynthKind {
    Ramp,
    Gradient,
    Constant(u8),
    Scene(Complexity),
}

impl FromStr for SynthKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ramp" => Ok(SynthKind::Ramp),
            "gradient" => Ok(SynthKind::Gradient),
            _ => {
                if let Some(v) = s.strip_prefix("constant:") {
                    return v
                        .parse()
                        .map(SynthKind::Constant)
                        .map_err(|_| Error::Validation(format!("bad constant value {v:?}")));
                }
                s.parse().map(SynthKind::Scene)
            }
        }
    }
}

fn load(path: &Path, input: &Input) -> Result<DepthSequence> {
    if path.is_dir() {
        return read_pgm_sequence(path, &input.pattern, input.fps);
    }
    let (Some(w), Some(h)) = (input.width, input.height) else {
        return Err(Error::Validation(format!(
            "{} is a raw file: --width and --height are required",
            path.display()
        )));
    };
    let meta = SequenceMeta::new(w, h).with_frames(input.frames).with_fps(input.fps);
    let layout = if input.yuv420 {
        RawLayout::Yuv420
    } else {
        RawLayout::Luma
    };
    read_raw_y(path, &meta, layout)
}

fn load_single(input: &Input) -> Result<DepthSequence> {
    match input.gt.as_slice() {
        [one] => load(one, input),
        _ => Err(Error::Validation("this command takes exactly one --gt".into())),
    }
}

fn codec(spec: &CodecSpec) -> Result<Box<dyn CodecBackend>> {
    Ok(match spec {
        CodecSpec::Toy => Box::new(ToyCodec64::new()),
        CodecSpec::Precoded(dir) => Box::new(PrecodedProvider::discover(dir)?),
    })
}

fn quant(v: u8) -> Result<QuantParam> {
    QuantParam::new(v as i32)
}

fn config(policy: Policy, c: &Control) -> Result<RdoConfig> {
    let cfg = RdoConfig {
        policy,
        initial_qp: quant(c.qp)?,
        qp_min: quant(c.qp_min)?,
        qp_max: quant(c.qp_max)?,
        step: c.step,
        threshold: c.threshold,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn sequence_name(path: &Path) -> String {
    path.file_stem()
        .or_else(|| path.file_name())
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| Error::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

fn emit_report(report: &dyn Report, output: &Output) -> Result<()> {
    emit(&report.render(output.format), output.out.as_deref())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Metrics {
            input,
            proc,
            model,
            output,
        } => {
            let gt = load_single(&input)?;
            let processed = load(&proc, &input)?;
            let params = model.params.resolve(&gt)?;
            emit_report(&metrics_report(&gt, &processed, &params)?, &output)
        }
        Command::Siti { input, output } => emit_report(&siti_report(&load_single(&input)?)?, &output),
        Command::Sweep {
            input,
            qp,
            model,
            codec: c,
            output,
        } => {
            let gt = load_single(&input)?;
            let qps = qp.into_iter().map(quant).collect::<Result<Vec<_>>>()?;
            let params = model.params.resolve(&gt)?;
            emit_report(&sweep_report(&gt, codec(&c.codec)?.as_ref(), &qps, &params)?, &output)
        }
        Command::Calibrate {
            input,
            threshold_rule,
            model,
            codec: c,
            output,
        } => {
            let gt = load_single(&input)?;
            let params = model.params.resolve(&gt)?;
            let report = calibration_report(&gt, codec(&c.codec)?.as_ref(), &params, threshold_rule)?;
            emit_report(&report, &output)
        }
        Command::Rdo {
            input,
            policy,
            control,
            model,
            codec: c,
            trace,
            recon,
            output,
        } => {
            let gt = load_single(&input)?;
            let params = model.params.resolve(&gt)?;
            let cfg = config(policy, &control)?;
            let backend = codec(&c.codec)?;
            let (outcome, processed) = run_outcome(&gt, backend.as_ref(), &cfg, &params, control.threshold_rule)?;
            if let Some(path) = trace {
                emit(&trace_csv(&outcome.trace), Some(&path))?;
            }
            if let Some(dir) = recon {
                fs::create_dir_all(&dir).map_err(|source| Error::Io {
                    path: dir.clone(),
                    source,
                })?;
                write_pgm_sequence(&processed, &dir, "frame_%04d.pgm")?;
            }
            let report = CompareReport {
                policies: vec![policy],
                sequences: vec![SequenceOutcomes {
                    name: sequence_name(&input.gt[0]),
                    params,
                    outcomes: vec![outcome],
                }],
            };
            emit_report(&report, &output)
        }
        Command::Compare {
            input,
            policy,
            control,
            model,
            codec: c,
            output,
        } => {
            let sequences = input
                .gt
                .iter()
                .map(|p| Ok((sequence_name(p), load(p, &input)?)))
                .collect::<Result<Vec<_>>>()?;
            let base = config(Policy::Wrdo, &control)?;
            let report = compare_report(
                &sequences,
                codec(&c.codec)?.as_ref(),
                &base,
                &policy,
                &model.params,
                control.threshold_rule,
            )?;
            emit_report(&report, &output)
        }
        Command::Synth {
            kind,
            width,
            height,
            frames,
            out,
            pgm,
        } => {
            let seq = match kind {
                SynthKind::Ramp => synthetic::diagonal_ramp(width, height, frames)?,
                SynthKind::Gradient => synthetic::moving_gradient_texture(width, height, frames)?,
                SynthKind::Constant(v) => synthetic::constant(width, height, frames, v)?,
                SynthKind::Scene(c) => synthetic::depth_scene(width, height, frames, c)?,
            };
            if pgm {
                fs::create_dir_all(&out).map_err(|source| Error::Io {
                    path: out.clone(),
                    source,
                })?;
                write_pgm_sequence(&seq, &out, "frame_%04d.pgm")
            } else {
                write_raw_y(&seq, &out)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("vdmtool: {e}");
            ExitCode::from(if e.is_io() { 3 } else { 2 })
        }
    }
}
