//! Command-line runner for the anisolab experiments.
//!
//! Each subcommand reads an optional TOML file, runs one experiment and writes
//! `<out>/<experiment>.csv` (or `.json`) together with a gnuplot script.
//!
//! # Config file
//!
//! All sections and keys are optional; unknown keys are errors.
//!
//! ```toml
//! [grid]       # d, d_s, box_length, support_radius, n
//! [norm]       # r, ps, ts, product_p, product_s, and [[norm.tuples]] with p, s, t
//! [cone]       # theta_deg
//! [leaves]     # affine, sinusoidal, quadratic, translations_per_side, translation_step,
//!              # slope_fraction, max_harmonic, c_f, bands,
//!              # and [[leaves.explicit]] with name, kind, coefficients
//! [indicator]  # normal, shape = "half_space" | "strip", offset, width, epsilon_cells
//! [corpus]     # kinds, count, seed
//! [sweep]      # ns, margin, checks
//! ```
//!
//! `[leaves]` doubles as the leaf family description: the counts and translation grid define the
//! sampled family, `[[leaves.explicit]]` lists closed-form leaves by kind and coefficients, and the
//! family seed is the run seed. `width` is a fraction of `support_radius`; `epsilon_cells` is in
//! lattice cells.
//!
//! Exit codes: 0 when every pass/fail record passes, 2 when one fails, 3 on a config error and
//! 1 on any other error.

pub mod config;
pub mod output;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use anisolab::lab::{
    make_corpus, run_kernel_decay, run_lemma_suite, run_multiplier_scan, run_strichartz_scan, CorpusContext,
    ResultRecord, Verdict, BOUNDED_SLOPE, DIVERGENT_SLOPE,
};

pub use config::FileConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Run(#[from] anisolab::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 3,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Experiment {
    /// Half-space multiplier on isotropic Bessel potential spaces, 1D.
    Strichartz,
    /// Indicator multiplier on the anisotropic space, 2D.
    Multiplier,
    /// Spectral foundations and lemma probes.
    Lemmas,
    /// Leafwise convolution kernels.
    KernelDecay,
    /// Write the test-function corpus as binary grid files.
    Corpus,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Strichartz => "strichartz",
            Experiment::Multiplier => "multiplier",
            Experiment::Lemmas => "lemmas",
            Experiment::KernelDecay => "kernel_decay",
            Experiment::Corpus => "corpus",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "anisolab", version, about = "Numerical experiments on anisotropic Besov spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub experiment: Experiment,
    /// TOML config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Seed, overriding the config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

/// Records of one experiment, followed by the slope thresholds used for the verdicts.
pub fn run_experiment(
    experiment: Experiment,
    cfg: &FileConfig,
    seed: Option<u64>,
    out: Option<&Path>,
) -> Result<Vec<ResultRecord>, CliError> {
    let (mut records, seed) = match experiment {
        Experiment::Strichartz => {
            let c = cfg.strichartz(seed)?;
            (run_strichartz_scan(&c)?, c.seed)
        }
        Experiment::Multiplier => {
            let c = cfg.multiplier(seed)?;
            (run_multiplier_scan(&c)?, c.seed)
        }
        Experiment::Lemmas => {
            let c = cfg.lemmas(seed)?;
            (run_lemma_suite(&c)?, c.seed)
        }
        Experiment::KernelDecay => {
            let c = cfg.kernel(seed)?;
            (run_kernel_decay(&c)?, c.seed)
        }
        Experiment::Corpus => corpus_records(cfg, seed, out)?,
    };
    let tag = format!("{}/thresholds", experiment.name());
    records.push(ResultRecord::new(&tag, "threshold_bounded_slope", BOUNDED_SLOPE, Verdict::Measured, seed));
    records.push(ResultRecord::new(&tag, "threshold_divergent_slope", DIVERGENT_SLOPE, Verdict::Measured, seed));
    Ok(records)
}

fn corpus_records(cfg: &FileConfig, seed: Option<u64>, out: Option<&Path>) -> Result<(Vec<ResultRecord>, u64), CliError> {
    let grid = cfg.corpus_grid()?;
    let (spec, seed) = cfg.corpus_spec(seed)?;
    let indicator = cfg.corpus_indicator(grid.d(), grid.support_radius())?;
    indicator.validate(&grid).map_err(|e| CliError::Config(e.to_string()))?;
    let ctx = CorpusContext { cone_axis: None, boundary: Some((indicator.normal.clone(), indicator.boundaries())) };
    let members = make_corpus(&spec, &grid, seed, &ctx).map_err(|e| CliError::Config(e.to_string()))?;
    let dir = out.map(|o| o.join("corpus"));
    if let Some(dir) = &dir {
        fs::create_dir_all(dir)?;
    }
    let mut records = Vec::new();
    for m in &members {
        let name = format!("{}_{}", m.kind.name(), m.index);
        if let Some(dir) = &dir {
            let file = fs::File::create(dir.join(format!("{name}.grd")))?;
            m.function.write_to(std::io::BufWriter::new(file))?;
        }
        let sup = m.function.sup_norm();
        let outside = m.function.support_leak();
        let exp = format!("corpus/{name}");
        let leak = if sup > 0.0 { outside / sup } else { 0.0 };
        records.push(ResultRecord::new(&exp, "sup_norm", sup, Verdict::Measured, seed).with_n(grid.n()));
        records.push(ResultRecord::new(&exp, "support_leak", leak, Verdict::Measured, seed).with_n(grid.n()));
    }
    Ok((records, seed))
}

/// Any pass/fail record that failed.
pub fn any_failure(records: &[ResultRecord]) -> bool {
    records.iter().any(ResultRecord::is_failure)
}

pub fn write_outputs(experiment: Experiment, records: &[ResultRecord], out: &Path, format: Format) -> Result<PathBuf, CliError> {
    fs::create_dir_all(out)?;
    let stem = experiment.name();
    let path = match format {
        Format::Csv => {
            let path = out.join(format!("{stem}.csv"));
            output::write_csv(records, fs::File::create(&path)?).map_err(|e| CliError::Output(e.to_string()))?;
            let gp = output::gnuplot_script(records, &format!("{stem}.csv"), stem);
            fs::write(out.join(format!("{stem}.gp")), gp)?;
            path
        }
        Format::Json => {
            let path = out.join(format!("{stem}.json"));
            output::write_json(records, fs::File::create(&path)?).map_err(|e| CliError::Output(e.to_string()))?;
            path
        }
    };
    Ok(path)
}

/// Run the parsed command line and return the process exit code.
pub fn run(cli: &Cli) -> Result<i32, CliError> {
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(CliError::Config("--workers must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(w).build_global().map_err(|e| CliError::Output(e.to_string()))?;
    }
    let cfg = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let records = run_experiment(cli.experiment, &cfg, cli.seed, Some(&cli.out))?;
    let path = write_outputs(cli.experiment, &records, &cli.out, cli.format)?;
    let failed = records.iter().filter(|r| r.is_failure()).count();
    eprintln!("{}: {} records, {} failed -> {}", cli.experiment.name(), records.len(), failed, path.display());
    for r in records.iter().filter(|r| r.is_failure()) {
        eprintln!("  fail {} {} = {}", r.experiment, r.quantity, r.value);
    }
    Ok(if failed > 0 { 2 } else { 0 })
}
