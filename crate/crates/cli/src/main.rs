use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use consensus_cli::diffuse::{diffuse, diffuse_csv, parse_projector, DiffuseConfig};
use consensus_cli::inspect::inspect;
use consensus_cli::report::{self, csv_path, json_path};
use consensus_cli::run::{parse_laplacian, parse_normalization};
use consensus_cli::{run, Algorithm, GraphSource, InitSource, RunConfig};
use consensus_core::diffusion::ProjectorKind;
use consensus_core::iterative::{NagParams, Normalization};
use consensus_core::LaplacianKind;

#[derive(Parser)]
#[command(name = "consensus", about = "Average-consensus experiments on graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Graph utilities.
    Graph {
        #[command(subcommand)]
        command: GraphCommand,
    },
    /// Run one algorithm and write PREFIX.csv and PREFIX.json.
    Run {
        #[arg(long, short)]
        algorithm: Algorithm,
        #[command(flatten)]
        common: Common,
    },
    /// Run several algorithms on the same input and merge their output.
    Compare {
        /// Comma-separated algorithm names.
        #[arg(long, short, value_delimiter = ',', required = true)]
        algorithms: Vec<Algorithm>,
        #[command(flatten)]
        common: Common,
    },
    /// Diffusion LMS with exact per-coordinate network averaging.
    Diffuse {
        #[arg(long, short)]
        graph: GraphSource,
        #[arg(long, default_value_t = 4)]
        m: usize,
        #[arg(long, default_value_t = 0.05)]
        mu: f64,
        #[arg(long, default_value_t = 500)]
        steps: usize,
        #[arg(long, default_value_t = 0.0)]
        noise_var: f64,
        #[arg(long, default_value_t = 1.0)]
        regressor_var: f64,
        /// backsub, additions or dense.
        #[arg(long, default_value = "additions", value_parser = parse_projector)]
        projector: ProjectorKind,
        #[arg(long)]
        seed: u64,
        #[arg(long, short)]
        output: PathBuf,
    },
}

#[derive(Subcommand)]
enum GraphCommand {
    /// Print connectivity, degrees, spectrum and RCM bandwidth as JSON.
    Inspect {
        #[arg(long, short)]
        graph: GraphSource,
    },
}

#[derive(Args)]
struct Common {
    /// Graph file, or random:N:P:SEED.
    #[arg(long, short)]
    graph: GraphSource,
    /// random:SEED, const:VALUE, values:a,b,c or file:PATH.
    #[arg(long, short)]
    init: InitSource,
    /// Output prefix; .csv and .json are appended.
    #[arg(long, short)]
    output: PathBuf,
    /// unnormalized, weighted, sym or rw.
    #[arg(long, default_value = "unnormalized", value_parser = parse_laplacian)]
    laplacian: LaplacianKind,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long, default_value_t = 0.15)]
    nag_alpha: f64,
    #[arg(long, default_value_t = 0.85)]
    nag_beta: f64,
    #[arg(long, default_value_t = 0.85)]
    nag_sigma: f64,
    /// none, inf or l2.
    #[arg(long, default_value = "l2", value_parser = parse_normalization)]
    normalization: Normalization,
    /// Cut the graph-filter degree at the nilpotency index.
    #[arg(long)]
    truncate: bool,
    #[arg(long, default_value_t = consensus_core::spectral::DEFAULT_GROUP_TOL)]
    group_tol: f64,
}

impl Common {
    fn config(&self) -> RunConfig {
        let mut cfg = RunConfig::new(self.graph.clone(), self.init.clone());
        cfg.laplacian = self.laplacian;
        cfg.iters = self.iters;
        cfg.mu = self.mu;
        cfg.nag = NagParams {
            alpha: self.nag_alpha,
            beta: self.nag_beta,
            sigma: self.nag_sigma,
            iters: 0,
        };
        cfg.normalization = self.normalization;
        cfg.truncate = self.truncate;
        cfg.group_tol = self.group_tol;
        cfg
    }
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Graph {
            command: GraphCommand::Inspect { graph },
        } => {
            let g = graph.load()?;
            let bytes = report::to_json(&inspect(&g)?)?;
            print!("{}", String::from_utf8(bytes)?);
        }
        Command::Run { algorithm, common } => {
            let out = run(algorithm, &common.config())?;
            report::write_run(&common.output, &out)?;
            println!(
                "{algorithm}: {} iterations, final error {:.2} dB",
                out.sidecar.iterations, out.sidecar.final_error_db
            );
        }
        Command::Compare { algorithms, common } => {
            let results = report::compare(&algorithms, &common.config())?;
            report::write_compare(&common.output, &results)?;
            for (a, out) in &results {
                println!("{a}: final error {:.2} dB", out.sidecar.final_error_db);
            }
        }
        Command::Diffuse {
            graph,
            m,
            mu,
            steps,
            noise_var,
            regressor_var,
            projector,
            seed,
            output,
        } => {
            let cfg = DiffuseConfig {
                graph,
                m,
                mu,
                steps,
                noise_var,
                regressor_var,
                projector,
                seed,
            };
            let out = diffuse(&cfg)?;
            report::write_bytes(&csv_path(&output), &diffuse_csv(&out)?)?;
            report::write_bytes(&json_path(&output), &report::to_json(&out.summary)?)?;
            println!(
                "final MSD {:.2} dB{}",
                out.summary.final_msd_db,
                if out.summary.diverged {
                    " (diverged)"
                } else {
                    ""
                }
            );
        }
    }
    Ok(())
}
