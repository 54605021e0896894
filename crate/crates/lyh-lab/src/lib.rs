//! Reproducible verification suites over `lyh-core`.
//!
//! A run reads an [`config::ExperimentConfig`], executes one suite, and writes
//! `manifest.json` plus CSV tables to the output directory. Exit codes:
//! 0 when every assertion held, 1 on an assertion failure, 2 on an invalid
//! configuration, 3 when more verdicts were Inconclusive than the quota allows.

pub mod config;
pub mod criteria;
pub mod oracles;
pub mod report;
pub mod suites;

use clap::{Parser, Subcommand};
use config::{ConfigError, ExperimentConfig, Suite};
use report::{Manifest, Outcome};
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ASSERTION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "lyh-lab", version, about = "Batch verification suites for lyh-core")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML experiment configuration.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Assertion tolerance; overrides `tolerances.assert`.
    #[arg(long, global = true, value_name = "X")]
    pub tol: Option<f64>,
    /// Worker threads.
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
    /// Stamp the manifest and CSV files with the generation time.
    #[arg(long, global = true)]
    pub timestamps: bool,
}

#[derive(Clone, Copy, Debug, Subcommand)]
pub enum Command {
    /// Cone membership verdicts with witnesses.
    ConeCheck,
    /// Curvature ODE trajectories with snapshot verdicts.
    EvolveOde,
    /// Flat-torus heat flow and the paired Harnack quantity.
    HeatRun,
    /// Minimum of the Harnack quadratic form on homogeneous data.
    VerifyLyh,
    /// Battery of every oracle check at the scale set by `oracle.scale`.
    OracleSuite,
    /// Kähler identities, duality and extension residuals on random inputs.
    Identities,
}

impl Command {
    pub fn suite(self) -> Suite {
        match self {
            Command::ConeCheck => Suite::ConeCheck,
            Command::EvolveOde => Suite::EvolveOde,
            Command::HeatRun => Suite::HeatRun,
            Command::VerifyLyh => Suite::VerifyLyh,
            Command::OracleSuite => Suite::OracleSuite,
            Command::Identities => Suite::Identities,
        }
    }
}

/// Loads the configuration and applies command-line overrides.
pub fn resolve_config(cli: &Cli) -> Result<ExperimentConfig, ConfigError> {
    let suite = cli.command.suite();
    let (mut cfg, label) = match &cli.config {
        Some(p) => (ExperimentConfig::load(p)?, p.display().to_string()),
        None => (ExperimentConfig::default(), "<defaults>".to_string()),
    };
    if let Some(s) = cfg.suite {
        if s != suite {
            return Err(ConfigError::Invalid {
                path: label,
                position: None,
                field: "suite".into(),
                message: format!("config is for {}, not {}", s.name(), suite.name()),
            });
        }
    }
    cfg.suite = Some(suite);
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.output.dir = o.clone();
    }
    if let Some(t) = cli.tol {
        cfg.tolerances.assert = t;
    }
    if cli.timestamps {
        cfg.output.timestamps = true;
    }
    if cli.jobs == Some(0) {
        return Err(ConfigError::Invalid {
            path: "--jobs".into(),
            position: None,
            field: "jobs".into(),
            message: "must be at least 1".into(),
        });
    }
    cfg.validate(None, "command line")?;
    Ok(cfg)
}

/// Runs the command and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let cfg = match resolve_config(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let suite = cli.command.suite();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        pool = pool.num_threads(j);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return EXIT_CONFIG;
        }
    };
    let output = pool.install(|| suites::run_suite(suite, &cfg));
    let tally = &output.tally;
    let exit_code = if !tally.failures.is_empty() {
        EXIT_ASSERTION
    } else if tally.inconclusive > cfg.budgets.inconclusive_quota {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    };
    let outcome = Outcome {
        exit_code,
        assertions: tally.assertions,
        failures: tally.failures.clone(),
        inconclusive: tally.inconclusive,
        inconclusive_quota: cfg.budgets.inconclusive_quota,
    };
    let stamp = cfg
        .output
        .timestamps
        .then(|| SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0));
    let dir = &cfg.output.dir;
    let written = (|| -> std::io::Result<Vec<String>> {
        std::fs::create_dir_all(dir)?;
        let mut names = Vec::new();
        for t in &output.tables {
            t.write(dir, stamp)?;
            names.push(format!("{}.csv", t.name));
        }
        for (name, body) in &output.files {
            let path = dir.join(name);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(path, body)?;
            names.push(name.clone());
        }
        let manifest = Manifest {
            suite: suite.name(),
            version: lyh_core::VERSION,
            rng: report::RNG_ALGORITHM,
            seed: cfg.seed,
            cell_seeds: &output.cell_seeds,
            jobs: cli.jobs,
            config: &cfg,
            outputs: names.clone(),
            outcome: &outcome,
            generated_unix: stamp,
        };
        manifest.write(dir)?;
        Ok(names)
    })();
    if let Err(e) = written {
        eprintln!("error: writing {}: {e}", dir.display());
        return EXIT_CONFIG;
    }
    for f in &tally.failures {
        eprintln!("FAIL {f}");
    }
    println!(
        "{}: {} assertions, {} failed, {} inconclusive (quota {}) -> exit {exit_code}",
        suite.name(),
        tally.assertions,
        tally.failures.len(),
        tally.inconclusive,
        cfg.budgets.inconclusive_quota
    );
    exit_code
}
