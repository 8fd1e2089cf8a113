//! Command-line driver for the collective-motion topology pipeline.

mod config;
mod experiments;
mod features;
mod plot;
mod report;
mod simulate;
mod store;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::{BettiChoice, ExperimentConfig, Overrides, PcaChoice};
use features::FeatureKind;

#[derive(Parser)]
#[command(
    name = "swarmtopo",
    version,
    about = "Simulate swarming agents, summarize them topologically, and run the \
             clustering and classification experiments"
)]
struct Cli {
    /// TOML experiment configuration; defaults cover the full study.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Store directory (pipeline commands) or output file (plot).
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Master seed; overrides the config file.
    #[arg(long, global = true, value_name = "S")]
    seed: Option<u64>,
    /// Runs per parameter combination; overrides the config file.
    #[arg(long, global = true, value_name = "N")]
    runs: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BettiArg {
    #[value(name = "0")]
    B0,
    #[value(name = "1")]
    B1,
    Both,
}

impl From<BettiArg> for BettiChoice {
    fn from(b: BettiArg) -> BettiChoice {
        match b {
            BettiArg::B0 => BettiChoice::B0,
            BettiArg::B1 => BettiChoice::B1,
            BettiArg::Both => BettiChoice::Both,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PcaArg {
    None,
    #[value(name = "87")]
    Dims87,
    #[value(name = "3")]
    Dims3,
}

impl From<PcaArg> for PcaChoice {
    fn from(p: PcaArg) -> PcaChoice {
        match p {
            PcaArg::None => PcaChoice::None,
            PcaArg::Dims87 => PcaChoice::Dims(87),
            PcaArg::Dims3 => PcaChoice::Dims(3),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    OrderParams,
    Crocker,
}

#[derive(Subcommand)]
enum Command {
    /// Generate or incrementally complete the run library.
    Simulate,
    /// Build feature tables (and, for crockers, the per-run matrices).
    Features {
        /// Which feature family to build.
        kind: KindArg,
        /// Restrict crocker sets to one Betti selection.
        #[arg(long)]
        betti: Option<BettiArg>,
        /// Restrict crocker sets to the time-delayed route.
        #[arg(long)]
        delay: bool,
    },
    /// Unsupervised k-medoids over every configured feature set.
    Cluster {
        /// Number of medoids; overrides the config file.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Supervised one-vs-one linear SVM with stratified CV.
    Classify {
        /// Fold count; overrides the config file.
        #[arg(long)]
        folds: Option<usize>,
        /// Restrict to one PCA treatment.
        #[arg(long)]
        pca: Option<PcaArg>,
    },
    /// Combine cluster and classify outputs into the final report.
    Report,
    /// Render a trajectory or crocker file as an SVG.
    Plot {
        /// A trajectory or crocker file from the store.
        input: PathBuf,
        /// Plot the six projections of the delayed cloud instead of
        /// the final-frame snapshot (trajectory inputs only).
        #[arg(long)]
        delay: bool,
        /// Saturation cap for crocker contours (default 150 for b0,
        /// 2 for b1).
        #[arg(long)]
        cap: Option<u32>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut over = Overrides {
        out: cli.out.clone(),
        seed: cli.seed,
        runs: cli.runs,
        jobs: cli.jobs,
        ..Overrides::default()
    };

    // Plot needs no store; handle it before config resolution so it
    // works on bare files.
    if let Command::Plot { input, delay, cap } = &cli.command {
        let delay_steps = if cli.config.is_some() {
            ExperimentConfig::load(cli.config.as_deref(), &Overrides::default())
                .map(|c| c.delay)
                .unwrap_or(swarmtopo::tda::DELAY_STEPS)
        } else {
            swarmtopo::tda::DELAY_STEPS
        };
        return plot::cmd_plot(input, cli.out.as_deref(), *delay, *cap, delay_steps);
    }

    if let Command::Cluster { k } = &cli.command {
        over.k = *k;
    }
    if let Command::Classify { folds, .. } = &cli.command {
        over.folds = *folds;
    }

    let config = ExperimentConfig::load(cli.config.as_deref(), &over)?;
    config.install_thread_pool()?;

    match cli.command {
        Command::Simulate => simulate::cmd_simulate(&config),
        Command::Features { kind, betti, delay } => features::cmd_features(
            &config,
            match kind {
                KindArg::OrderParams => FeatureKind::OrderParams,
                KindArg::Crocker => FeatureKind::Crocker,
            },
            betti.map(BettiChoice::from),
            delay,
        ),
        Command::Cluster { .. } => experiments::cmd_cluster(&config),
        Command::Classify { pca, .. } => {
            experiments::cmd_classify(&config, pca.map(PcaChoice::from))
        }
        Command::Report => report::cmd_report(&config),
        Command::Plot { .. } => unreachable!("handled above"),
    }
}
