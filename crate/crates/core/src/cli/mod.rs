//! Command-line surface: argument parsing, config loading, thread setup and
//! JSON error reporting. Every subcommand is also callable as a function.

mod jobs;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

pub use jobs::{
    cluster_job, eval_job, lift2d_job, load_dataset_bodies, match_job, noise_job, occlusion_job,
    pseudo_label_job, split_job, synth_job, ClusterJobConfig, EvalInput, Lift2dConfig, SplitJobConfig,
    SynthJobConfig,
};

use crate::clustering::ClusterError;
use crate::evaluation::EvalError;
use crate::geometry::GeometryError;
use crate::io::IoError;
use crate::labeling::LabelError;
use crate::matching::MatchError;
use crate::synthesis::SynthError;

/// Environment variable capping the worker pool size.
pub const THREADS_ENV: &str = "HCK_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config {path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("{THREADS_ENV}: {0}")]
    Threads(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Label(#[from] LabelError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Match(#[from] MatchError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// Stable machine-readable kind.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config { .. } => "config",
            CliError::Threads(_) => "threads",
            CliError::Geometry(_) => "geometry",
            CliError::Label(_) => "labeling",
            CliError::Synth(_) => "synthesis",
            CliError::Cluster(_) => "clustering",
            CliError::Match(_) => "matching",
            CliError::Eval(_) => "evaluation",
            CliError::Io(_) => "io",
            CliError::File { .. } => "file",
            CliError::Json(_) => "json",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self.kind(), "message": self.to_string() }).to_string()
    }
}

#[derive(Debug, Parser)]
#[command(name = "hck", version, about = "Labeled human point clouds: synthesis, labeling, clustering, matching, evaluation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON config; missing fields take their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic labeled dataset.
    Synth {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 20)]
        scenes: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Relabel a dataset's clouds from its fitted body meshes.
    PseudoLabel {
        #[command(flatten)]
        common: Common,
        /// Dataset directory holding a manifest.
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Apply depth sensor noise to a depth dump.
    Noise {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        depth: PathBuf,
        /// Camera JSON.
        #[arg(long)]
        camera: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Cluster a cloud's human points into instances.
    Cluster {
        #[command(flatten)]
        common: Common,
        /// Cloud file (.hck or .ply).
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        min_samples: Option<usize>,
        #[arg(long)]
        min_cluster_size: Option<usize>,
    },
    /// Two-stage matching of query predictions to ground truth.
    Match {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        preds: PathBuf,
        #[arg(long)]
        gt: PathBuf,
    },
    /// Compare candidate labels with reference labels.
    Eval {
        #[command(flatten)]
        common: Common,
        /// Candidate cloud file or dataset directory.
        #[arg(long)]
        pred: PathBuf,
        /// Reference cloud file or dataset directory.
        #[arg(long)]
        gt: PathBuf,
        /// Also write human-class PR samples at the AP50 threshold.
        #[arg(long)]
        pr_curve: bool,
    },
    /// Occlusion level of every scene in a dataset.
    Occlusion {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Subject-disjoint train/val/test split.
    Split {
        #[command(flatten)]
        common: Common,
        /// JSON list of sequence records.
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Lift a 2D instance mask onto a cloud.
    Lift2d {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        mask: PathBuf,
        #[arg(long)]
        depth: PathBuf,
        #[arg(long)]
        camera: PathBuf,
        #[arg(long)]
        cloud: PathBuf,
    },
}

/// Reads a JSON config, or the defaults when no path is given.
pub fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, CliError> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Config {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub(crate) fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = read_file(path)?;
    Ok(serde_json::from_slice(&text)?)
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|source| CliError::File {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        create_dir(dir)?;
    }
    std::fs::write(path, bytes).map_err(|source| CliError::File {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    write_file(path, serde_json::to_string_pretty(value)? + "\n")
}

pub(crate) fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::File {
        path: dir.to_path_buf(),
        source,
    })
}

/// Worker count requested through `HCK_THREADS`, if any.
pub fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(CliError::Threads(e.to_string())),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Threads(format!("expected a positive integer, got {v:?}"))),
        },
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Synth { common, scenes, seed } => {
            let cfg: SynthJobConfig = load_config(common.config.as_deref())?;
            synth_job(&cfg, scenes, seed, &common.out).map(drop)
        }
        Command::PseudoLabel { common, dataset } => {
            pseudo_label_job(&load_config(common.config.as_deref())?, &dataset, &common.out)
        }
        Command::Noise { common, depth, camera, seed } => noise_job(
            &load_config(common.config.as_deref())?,
            &depth,
            &camera,
            seed,
            &common.out,
        ),
        Command::Cluster { common, input, min_samples, min_cluster_size } => {
            let mut cfg: ClusterJobConfig = load_config(common.config.as_deref())?;
            if let Some(m) = min_samples {
                cfg.params.min_samples = m;
            }
            if let Some(m) = min_cluster_size {
                cfg.params.min_cluster_size = m;
            }
            cluster_job(&cfg, &input, &common.out).map(drop)
        }
        Command::Match { common, preds, gt } => {
            match_job(&load_config(common.config.as_deref())?, &preds, &gt, &common.out).map(drop)
        }
        Command::Eval { common, pred, gt, pr_curve } => eval_job(
            &load_config(common.config.as_deref())?,
            &EvalInput::detect(&pred),
            &EvalInput::detect(&gt),
            pr_curve,
            &common.out,
        )
        .map(drop),
        Command::Occlusion { common, dataset } => {
            occlusion_job(&load_config(common.config.as_deref())?, &dataset, &common.out).map(drop)
        }
        Command::Split { common, input } => {
            split_job(&load_config(common.config.as_deref())?, &input, &common.out).map(drop)
        }
        Command::Lift2d { common, mask, depth, camera, cloud } => lift2d_job(
            &load_config(common.config.as_deref())?,
            &mask,
            &depth,
            &camera,
            &cloud,
            &common.out,
        )
        .map(drop),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
/// Failures are reported on stderr as one JSON object.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            let err = CliError::Usage(e.render().to_string().trim().to_string());
            eprintln!("{}", err.to_json());
            return err.exit_code();
        }
    };
    let result = threads_from_env().and_then(|threads| match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Threads(e.to_string()))?
            .install(|| run(cli)),
        None => run(cli),
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}
