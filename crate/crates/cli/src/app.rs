//! Argument parsing and the run lifecycle: validate, stage, commit or fail.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use crate::config::{self, Config, ConfigError, Overrides, Pipeline};
use crate::manifest::{self, Manifest, Staging, Status, Timestamps};
use crate::pipelines::{self, Ctx};

pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_INVALID_CONFIG: u8 = 2;
pub const EXIT_MISSING_FIXTURE: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "lbd", version, about = "Literature-based discovery pipelines")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load a snapshot and write corpus statistics and the vocabulary
    Ingest(RunArgs),
    /// Closed discovery: common terms and gold b-term recovery
    Closed(RunArgs),
    /// Concept-based open discovery over MeSH headings
    Open(RunArgs),
    /// Ensemble ranking of bridging terms with ROC evaluation
    Crossbee(RunArgs),
    /// Outlier documents via PCA and k-means
    Outlier(RunArgs),
    /// RaJoLink open discovery with recorded or interactive choices
    Rajolink(RunArgs),
    /// Time-sliced link prediction on the citation network
    Linkpred(RunArgs),
    /// Report every problem in a configuration without running anything
    Validate(RunArgs),
}

#[derive(Clone, Debug, Default, Args)]
pub struct RunArgs {
    /// TOML configuration file
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// rs-dfo, mig-mg or aut-can
    #[arg(long)]
    pub dataset: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores)
    #[arg(long)]
    pub threads: Option<usize>,
    /// Recorded choice file for open or rajolink
    #[arg(long)]
    pub choices: Option<PathBuf>,
    /// Prompt for choices on the terminal
    #[arg(long)]
    pub interactive: bool,
}

impl RunArgs {
    fn overrides(&self, pipeline: Option<Pipeline>) -> Overrides {
        Overrides {
            pipeline,
            dataset: self.dataset.clone(),
            out: self.out.clone(),
            seed: self.seed,
            threads: self.threads,
            choices: self.choices.clone(),
            interactive: self.interactive,
        }
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Hash of everything that can influence the data artifacts.
pub fn config_hash(cfg: &Config) -> String {
    let canon = serde_json::to_string(cfg).expect("config serializes");
    lbd_core::util::sha256_bytes(canon.as_bytes())
}

fn print_findings(err: &ConfigError) {
    eprint!("{err}");
}

/// True when the error chain holds a missing snapshot or fixture.
fn is_missing_fixture(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        matches!(
            e.downcast_ref::<lbd_core::Error>(),
            Some(lbd_core::Error::MissingFixture { .. })
        )
    })
}

pub fn validate(args: &RunArgs) -> ExitCode {
    let mut findings = Vec::new();
    let table = config::load_table(args.config.as_deref(), std::env::vars(), &mut findings);
    if let Some(cfg) = config::resolve(&table, &args.overrides(None), &mut findings) {
        cfg.check_files(&mut findings);
    }
    if findings.is_empty() {
        println!("configuration is valid");
        ExitCode::SUCCESS
    } else {
        for f in &findings {
            println!("{f}");
        }
        ExitCode::from(EXIT_INVALID_CONFIG)
    }
}

pub fn run_pipeline(pipeline: Pipeline, args: &RunArgs) -> ExitCode {
    let started = now();
    let clock = Instant::now();
    let mut findings = Vec::new();
    let table = config::load_table(args.config.as_deref(), std::env::vars(), &mut findings);
    let Some(cfg) = config::resolve(&table, &args.overrides(Some(pipeline)), &mut findings) else {
        print_findings(&ConfigError { findings });
        return ExitCode::from(EXIT_INVALID_CONFIG);
    };
    cfg.check_files(&mut findings);

    let mut manifest = Manifest {
        status: Status::Failed,
        command: pipeline.name().to_owned(),
        version: env!("CARGO_PKG_VERSION").to_owned(),
        dataset: Some(cfg.dataset.slug().to_owned()),
        seed: Some(cfg.seed),
        config_hash: Some(config_hash(&cfg)),
        inputs: Default::default(),
        artifacts: Default::default(),
        summary: Value::Null,
        error: None,
        timestamps: Timestamps {
            started,
            finished: String::new(),
            elapsed_ms: 0,
        },
    };
    let finish = |m: &mut Manifest| {
        m.timestamps.finished = now();
        m.timestamps.elapsed_ms = clock.elapsed().as_millis() as u64;
    };

    if !findings.is_empty() {
        let err = ConfigError { findings };
        print_findings(&err);
        if !err.only_missing_files() {
            return ExitCode::from(EXIT_INVALID_CONFIG);
        }
        manifest.error = Some(err.to_string().trim_end().to_owned());
        finish(&mut manifest);
        if let Err(e) = manifest::write_failed(&cfg.out, &manifest) {
            eprintln!("error: {e:#}");
        }
        return ExitCode::from(EXIT_MISSING_FIXTURE);
    }

    if cfg.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global() {
            log::warn!("thread pool already initialised: {e}");
        }
    }

    let outcome = Staging::new(&cfg.out).map_err(|e| (e, None)).and_then(|mut staging| {
        let mut ctx = Ctx {
            cfg: &cfg,
            staging: &mut staging,
            inputs: Default::default(),
        };
        match pipelines::run(pipeline, &mut ctx) {
            Ok(summary) => {
                let inputs = std::mem::take(&mut ctx.inputs);
                Ok((staging, inputs, summary))
            }
            Err(e) => {
                let inputs = std::mem::take(&mut ctx.inputs);
                staging.abort();
                Err((e, Some(inputs)))
            }
        }
    });

    match outcome {
        Ok((staging, inputs, summary)) => {
            manifest.status = Status::Succeeded;
            manifest.inputs = inputs;
            manifest.artifacts = staging.artifacts().clone();
            manifest.summary = summary;
            finish(&mut manifest);
            match staging.commit(&manifest) {
                Ok(()) => {
                    log::info!("{} artifacts written to {}", manifest.artifacts.len(), cfg.out.display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(EXIT_FAILURE)
                }
            }
        }
        Err((e, inputs)) => {
            eprintln!("error: {e:#}");
            manifest.inputs = inputs.unwrap_or_default();
            manifest.error = Some(format!("{e:#}"));
            finish(&mut manifest);
            if let Err(w) = manifest::write_failed(&cfg.out, &manifest) {
                eprintln!("error: {w:#}");
            }
            if is_missing_fixture(&e) {
                ExitCode::from(EXIT_MISSING_FIXTURE)
            } else {
                ExitCode::from(EXIT_FAILURE)
            }
        }
    }
}

pub fn main_with(cli: Cli) -> ExitCode {
    let (pipeline, args) = match &cli.command {
        Command::Ingest(a) => (Pipeline::Ingest, a),
        Command::Closed(a) => (Pipeline::Closed, a),
        Command::Open(a) => (Pipeline::Open, a),
        Command::Crossbee(a) => (Pipeline::Crossbee, a),
        Command::Outlier(a) => (Pipeline::Outlier, a),
        Command::Rajolink(a) => (Pipeline::Rajolink, a),
        Command::Linkpred(a) => (Pipeline::Linkpred, a),
        Command::Validate(a) => return validate(a),
    };
    run_pipeline(pipeline, args)
}
