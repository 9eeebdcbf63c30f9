//! The `rtd` command-line tool.
//!
//! Exit status is 0 on success, 1 when a computation or file operation
//! fails and 2 for bad arguments or an invalid config.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod plot;

pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "rtd", version, about = "Representation Topology Divergence experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlotKind {
    /// Barcode CSVs (header `dim,birth,death`) become barcode diagrams,
    /// anything else a scatter plot.
    Auto,
    Scatter,
    Barcode,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Vietoris-Rips barcode of a point cloud CSV.
    Barcode {
        input: PathBuf,
        /// Degree to report; repeat for several. Defaults to 0 and 1.
        #[arg(long = "dim")]
        dims: Vec<usize>,
        /// Leave out simplices above this value.
        #[arg(long)]
        max_value: Option<f64>,
        /// Output CSV; standard output when absent.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// RTD between two clouds with matching rows.
    Rtd {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value = "min")]
        variant: rtd_core::Variant,
        /// Write the subgradient with respect to the first cloud.
        #[arg(long)]
        grad: Option<PathBuf>,
        /// Write the subgradient with respect to the second cloud.
        #[arg(long)]
        grad_tilde: Option<PathBuf>,
        /// Use minimum bypassing for the subgradients.
        #[arg(long)]
        bypass: bool,
        /// Also print the topological term of the TopoAE loss.
        #[arg(long)]
        topoae: bool,
    },
    /// Train autoencoders as described by an experiment config.
    Train {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run these seeds instead of the configured ones.
        #[arg(long = "seed")]
        seeds: Vec<u64>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Encode a cloud with a trained checkpoint.
    Reduce {
        checkpoint: PathBuf,
        input: PathBuf,
        out: PathBuf,
    },
    /// Compare a cloud with its embedding and write a JSON report.
    Eval {
        x: PathBuf,
        z: PathBuf,
        report: PathBuf,
        #[arg(long)]
        triplets: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Include the degree-1 Wasserstein distance.
        #[arg(long)]
        h1: bool,
        /// Evaluate on random subsets of this size.
        #[arg(long)]
        sample_size: Option<usize>,
        #[arg(long, default_value_t = 5)]
        resamples: usize,
    },
    /// Generate a dataset. SPEC is a JSON dataset spec file or a dataset name.
    Gen {
        spec: String,
        out: PathBuf,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Move a cloud towards the topology of a target by descending RTD.
    Morph {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long = "seed")]
        seeds: Vec<u64>,
        #[arg(long)]
        steps: Option<usize>,
        /// Constant learning rate replacing the configured schedule.
        #[arg(long)]
        lr: Option<f64>,
    },
    /// Draw a cloud or barcode CSV as SVG.
    Plot {
        input: PathBuf,
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = PlotKind::Auto)]
        kind: PlotKind,
        /// One integer label per row, used as point colour.
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long, default_value = "")]
        title: String,
    },
}

/// Runs one parsed command, writing results to `stdout`.
pub fn run(cli: Cli, stdout: &mut dyn std::io::Write) -> CliResult<()> {
    commands::dispatch(cli.command, stdout)
}
