use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dort_cli::{read_toml, CliError, CliResult, Command, EvalParams, GenerateParams, RunParams, TrainParams};
use dort_core::eval::CostModel;
use dort_core::pipeline::{DetectorNoise, Mode, PipelineConfig};
use dort_core::scheduler::{SchedulerConfig, TrainConfig};
use dort_core::synthdata::{DatasetConfig, SuiteConfig};

#[derive(Parser)]
#[command(name = "dort", version, about = "Detect-or-track experiments on synthetic video")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Render a synthetic suite: <out>/<seq>/frames/*.ppm and gt.csv.
    Generate {
        /// TOML suite spec; defaults apply to omitted keys.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Label frame pairs of a dataset and train the scheduler.
    Train {
        #[arg(long)]
        data: PathBuf,
        /// Checkpoint path.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 40)]
        epochs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sampled frame pairs per sequence.
        #[arg(long, default_value_t = 40)]
        pairs: usize,
        /// Largest frame gap of a sampled pair.
        #[arg(long, default_value_t = 10)]
        tau_max: u32,
        #[arg(long, default_value_t = 0.97)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        extractor_seed: u64,
    },
    /// Run the detect-or-track pipeline over every sequence of a dataset.
    Run {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_parser = parse_mode)]
        mode: Mode,
        #[arg(long, default_value_t = 10)]
        sigma: u32,
        #[arg(long, default_value_t = 0.97)]
        delta: f64,
        /// Scheduler checkpoint; required with --mode dort.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        detector_seed: u64,
        /// TOML detector noise spec.
        #[arg(long)]
        noise: Option<PathBuf>,
        /// Directory of <sequence>.csv detection caches.
        #[arg(long)]
        detections: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        extractor_seed: u64,
    },
    /// Score run outputs against groundtruth, or sweep sigma over modes.
    Eval {
        #[arg(long)]
        pred: Option<PathBuf>,
        #[arg(long)]
        gt: PathBuf,
        /// Output directory; defaults to --pred.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated sigma list; runs the pipeline for every mode.
        #[arg(long, value_delimiter = ',')]
        sweep: Option<Vec<u32>>,
        /// Modes of a sweep; default fixed,oracle plus dort when --model is given.
        #[arg(long, value_delimiter = ',', value_parser = parse_mode)]
        modes: Option<Vec<Mode>>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value_t = 0.97)]
        delta: f64,
        #[arg(long)]
        noise: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        detector_seed: u64,
        #[arg(long, default_value_t = 0)]
        extractor_seed: u64,
    },
    /// Re-execute a command from its manifest.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
        /// Write outputs here instead of the recorded location.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: dort_core::Error| e.to_string())
}

/// Absolute form of `p`, so manifests replay from any working directory.
fn absolute(p: &Path) -> CliResult<PathBuf> {
    std::path::absolute(p).map_err(|e| CliError::Usage(format!("{}: {}", p.display(), e)))
}

fn noise_spec(path: Option<&Path>) -> CliResult<DetectorNoise> {
    path.map_or_else(|| Ok(DetectorNoise::default()), read_toml)
}

fn resolve(cmd: Cmd) -> CliResult<Option<Command>> {
    Ok(Some(match cmd {
        Cmd::Generate { spec, out, seed } => {
            let suite: SuiteConfig = spec.as_deref().map_or_else(|| Ok(SuiteConfig::default()), read_toml)?;
            Command::Generate(GenerateParams { suite, seed, out: absolute(&out)? })
        }
        Cmd::Train { data, out, epochs, seed, pairs, tau_max, delta, extractor_seed } => Command::Train(TrainParams {
            data: absolute(&data)?,
            out: absolute(&out)?,
            seed,
            extractor_seed,
            dataset: DatasetConfig { tau_max, pairs_per_sequence: Some(pairs), seed },
            train: TrainConfig { epochs, seed, ..TrainConfig::default() },
            scheduler: SchedulerConfig { delta, ..SchedulerConfig::default() },
        }),
        Cmd::Run { data, mode, sigma, delta, model, out, detector_seed, noise, detections, extractor_seed } => {
            Command::Run(RunParams {
                data: absolute(&data)?,
                out: absolute(&out)?,
                model: model.as_deref().map(absolute).transpose()?,
                pipeline: PipelineConfig { sigma, delta, mode, ..PipelineConfig::default() },
                noise: noise_spec(noise.as_deref())?,
                detector_seed,
                detections: detections.as_deref().map(absolute).transpose()?,
                extractor_seed,
            })
        }
        Cmd::Eval { pred, gt, out, sweep, modes, model, delta, noise, detector_seed, extractor_seed } => {
            let out = out.or_else(|| pred.clone()).ok_or_else(|| CliError::Usage("eval needs --out or --pred".into()))?;
            let modes = modes.unwrap_or_else(|| {
                let mut m = vec![Mode::Fixed, Mode::Oracle];
                if model.is_some() {
                    m.push(Mode::Dort);
                }
                m
            });
            Command::Eval(EvalParams {
                pred: pred.as_deref().map(absolute).transpose()?,
                gt: absolute(&gt)?,
                out: absolute(&out)?,
                sweep,
                modes,
                model: model.as_deref().map(absolute).transpose()?,
                pipeline: PipelineConfig { delta, ..PipelineConfig::default() },
                noise: noise_spec(noise.as_deref())?,
                detector_seed,
                extractor_seed,
                cost: CostModel::default(),
                box_iou: 0.5,
                tracklet_iou: 0.5,
            })
        }
        Cmd::Replay { manifest, out } => {
            let out = out.as_deref().map(absolute).transpose()?;
            dort_cli::replay(&manifest, out)?;
            return Ok(None);
        }
    }))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = resolve(cli.command).and_then(|cmd| cmd.map_or(Ok(()), |c| c.execute().map(|_| ())));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(e.exit_code())
        }
    }
}
