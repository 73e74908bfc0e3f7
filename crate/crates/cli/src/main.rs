use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use qgk_core::cache::{cache_path, features_with_cache};
use qgk_core::classify::stratified_cv;
use qgk_core::gram::{gram_with_features, render_gram};
use qgk_core::io::load_dataset;
use qgk_core::kernels::{DEFAULT_LEVELS, DEFAULT_SEED};
use qgk_core::selftest::{run_selftest, SelftestOptions};
use qgk_core::{Dataset, Error, ErrorKind, ExportFormat, GramMatrix, KernelConfig, KernelKind};

/// Quantum-walk graph kernels: features, Gram matrices and cross-validation.
#[derive(Debug, Parser)]
#[command(name = "qgk", version)]
struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute and cache per-graph features.
    Features {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = DEFAULT_LEVELS)]
        levels: usize,
    },
    /// Compute and export a Gram matrix.
    Kernel {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long, default_value = "csv")]
        format: ExportFormat,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stratified cross-validation of kernel nearest-neighbour classification.
    Classify {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[arg(long, default_value_t = 1)]
        neighbors: usize,
        /// Also write the report as key=value lines to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the built-in oracle checks.
    Selftest {
        /// Accepted for symmetry with other commands; the checks use fixed seeds.
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, hide = true)]
        perturb_q: Option<f64>,
    },
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Directory holding <NAME>_A.txt, <NAME>_graph_indicator.txt and <NAME>_graph_labels.txt.
    #[arg(long)]
    dataset: PathBuf,
    /// Dataset name (default: last component of --dataset).
    #[arg(long)]
    name: Option<String>,
    /// Feature cache directory.
    #[arg(long, env = "QGK_CACHE_DIR")]
    cache_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct KernelArgs {
    #[arg(long, default_value = "aerk")]
    kernel: KernelKind,
    #[arg(long, default_value_t = DEFAULT_LEVELS)]
    levels: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Scale to unit diagonal.
    #[arg(long)]
    normalize: bool,
}

impl KernelArgs {
    fn config(&self) -> KernelConfig {
        KernelConfig {
            kind: self.kernel,
            levels: self.levels,
            seed: self.seed,
            normalize: self.normalize,
        }
    }
}

impl DataArgs {
    fn name(&self) -> Result<String, Error> {
        if let Some(n) = &self.name {
            return Ok(n.clone());
        }
        let dir = self.dataset.canonicalize().unwrap_or_else(|_| self.dataset.clone());
        dir.file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "cannot infer a dataset name from {}; pass --name",
                    self.dataset.display()
                ))
            })
    }

    fn load(&self) -> Result<Dataset, Error> {
        load_dataset(&self.dataset, &self.name()?)
    }

    fn cache_file(&self, d: &Dataset) -> Option<PathBuf> {
        self.cache_dir.as_deref().map(|dir| cache_path(dir, d.name()))
    }
}

fn build_gram(data: &DataArgs, cfg: &KernelConfig) -> Result<GramMatrix, Error> {
    cfg.validate()?;
    let d = data.load()?;
    let features = if cfg.kind.needs_features() {
        let (f, stats) = features_with_cache(&d, cfg.levels, data.cache_file(&d).as_deref())?;
        log::info!("cache hits={} misses={} corrupted={}", stats.hits, stats.misses, stats.corrupted);
        f
    } else {
        Vec::new()
    };
    gram_with_features(&d, &features, cfg)
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io { path: p.to_path_buf(), source: e }),
        None => match std::io::stdout().write_all(text.as_bytes()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                Err(Error::Io { path: "<stdout>".into(), source: e })
            }
            _ => Ok(()),
        },
    }
}

fn run(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Features { data, levels } => {
            if levels == 0 {
                return Err(Error::InvalidArgument("--levels must be at least 1".into()));
            }
            let start = Instant::now();
            let d = data.load()?;
            let dir = data.cache_dir.clone().unwrap_or_else(|| data.dataset.clone());
            let path = cache_path(&dir, d.name());
            let (_, stats) = features_with_cache(&d, levels, Some(&path))?;
            println!("dataset={}", d.name());
            println!("graphs={}", d.len());
            println!("H={levels}");
            println!("cache={}", path.display());
            println!("hits={}", stats.hits);
            println!("recomputed={}", stats.misses);
            println!("corrupted={}", stats.corrupted);
            println!("elapsed_s={}", start.elapsed().as_secs_f64());
        }
        Command::Kernel { data, kernel, format, out } => {
            let g = build_gram(&data, &kernel.config())?;
            write_output(out.as_deref(), &render_gram(&g, format))?;
        }
        Command::Classify { data, kernel, folds, neighbors, out } => {
            let cfg = kernel.config();
            let g = build_gram(&data, &cfg)?;
            let report = stratified_cv(&g, g.labels(), folds, neighbors, kernel.seed)?
                .with_kernel(cfg)
                .with_dataset(g.dataset_name());
            print!("{report}");
            if let Some(p) = out {
                write_output(Some(&p), &report.to_key_values())?;
            }
        }
        Command::Selftest { seed: _, perturb_q } => {
            let report = run_selftest(&SelftestOptions { perturb_q, ..SelftestOptions::standard() });
            print!("{report}");
            if !report.passed() {
                return Ok(ExitCode::from(3));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Usage => 1,
        ErrorKind::Data => 2,
        ErrorKind::Numerical => 3,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(1);
        }
    };
    match pool.install(|| run(cli.command)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.kind()))
        }
    }
}
