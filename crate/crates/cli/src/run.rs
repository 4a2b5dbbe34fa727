//! Single-algorithm runs and their CSV / JSON records.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use anyhow::{bail, ensure, Result};
use consensus_core::exact::{
    build_lower_factor, exact_ac_additions, exact_ac_backsub, graph_filter_factored, OpCounters,
    Weighting,
};
use consensus_core::graph::rcm_order;
use consensus_core::iterative::{
    consensus_target, eigenstep_run, error_db, fixed_step_bounds, nag_run, power_ac, run_linear,
    EigenstepMode, EigenstepOptions, Metadata, NagParams, Normalization, Operators, Trajectory,
    Warning,
};
use consensus_core::spectral::DEFAULT_GROUP_TOL;
use consensus_core::{eig_decompose, group_eigenvalues, DenseMatrix, Graph, LaplacianKind};
use serde::Serialize;

use crate::source::{GraphSource, InitSource};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Fixed,
    Eigenstep,
    EigenstepDirected,
    Power,
    Nag,
    ExactBacksub,
    ExactAdditions,
    GraphFilter,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::Fixed,
        Algorithm::Eigenstep,
        Algorithm::EigenstepDirected,
        Algorithm::Power,
        Algorithm::Nag,
        Algorithm::ExactBacksub,
        Algorithm::ExactAdditions,
        Algorithm::GraphFilter,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Fixed => "fixed",
            Algorithm::Eigenstep => "eigenstep",
            Algorithm::EigenstepDirected => "eigenstep-directed",
            Algorithm::Power => "power",
            Algorithm::Nag => "nag",
            Algorithm::ExactBacksub => "exact-backsub",
            Algorithm::ExactAdditions => "exact-additions",
            Algorithm::GraphFilter => "graph-filter",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Algorithm::ALL.iter().map(|a| a.name()).collect();
                anyhow::anyhow!(
                    "unknown algorithm {s:?}; expected one of {}",
                    names.join(", ")
                )
            })
    }
}

pub fn parse_laplacian(s: &str) -> Result<LaplacianKind> {
    Ok(match s {
        "unnormalized" => LaplacianKind::UnnormalizedConstant,
        "weighted" => LaplacianKind::GeneralWeighted,
        "sym" => LaplacianKind::NormalizedSymmetric,
        "rw" => LaplacianKind::NormalizedRandomWalk,
        _ => bail!("unknown Laplacian {s:?}; expected unnormalized, weighted, sym or rw"),
    })
}

pub fn parse_normalization(s: &str) -> Result<Normalization> {
    Ok(match s {
        "none" => Normalization::None,
        "inf" => Normalization::Infinity,
        "l2" => Normalization::Euclidean,
        _ => bail!("unknown normalization {s:?}; expected none, inf or l2"),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub graph: GraphSource,
    pub init: InitSource,
    pub laplacian: LaplacianKind,
    /// Defaults to `2 N` for the iterative algorithms.
    pub iters: Option<usize>,
    /// Fixed step size; defaults to the optimal constant step.
    pub mu: Option<f64>,
    pub nag: NagParams,
    pub normalization: Normalization,
    pub truncate: bool,
    pub group_tol: f64,
}

impl RunConfig {
    pub fn new(graph: GraphSource, init: InitSource) -> Self {
        RunConfig {
            graph,
            init,
            laplacian: LaplacianKind::UnnormalizedConstant,
            iters: None,
            mu: None,
            nag: NagParams::tuned(0),
            normalization: Normalization::Euclidean,
            truncate: false,
            group_tol: DEFAULT_GROUP_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Row {
    pub iteration: usize,
    pub error_db: f64,
    pub wallclock_ns: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct EigenSummary {
    pub matrix: String,
    pub n: usize,
    pub distinct: usize,
    pub min_modulus: f64,
    pub max_modulus: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_opt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sidecar {
    pub algorithm: Algorithm,
    pub graph: String,
    pub n: usize,
    pub iterations: usize,
    pub final_error_db: f64,
    pub metadata: Metadata,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counters: Option<OpCounters>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigen: Option<EigenSummary>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub rows: Vec<Row>,
    pub sidecar: Sidecar,
}

fn summarize(
    label: &str,
    m: &DenseMatrix,
    symmetric: bool,
    group_tol: f64,
) -> Result<EigenSummary> {
    let s = eig_decompose(m, symmetric)?;
    let groups = group_eigenvalues(&s.values, group_tol)?;
    let mut out = EigenSummary {
        matrix: label.to_string(),
        n: s.n(),
        distinct: groups.groups.len(),
        min_modulus: s
            .values
            .iter()
            .map(|v| v.norm())
            .fold(f64::INFINITY, f64::min),
        max_modulus: s.max_modulus(),
        ..Default::default()
    };
    if label == "laplacian" {
        if let Ok(b) = fixed_step_bounds(&s) {
            out.lambda_2 = Some(b.lambda_2);
            out.mu_opt = Some(b.mu_opt);
            out.mu_max = Some(b.mu_max);
        }
    }
    Ok(out)
}

fn trajectory_rows(t: &Trajectory) -> Vec<Row> {
    t.errors_db
        .iter()
        .zip(&t.elapsed_ns)
        .enumerate()
        .map(|(i, (&e, &ns))| Row {
            iteration: i,
            error_db: e,
            wallclock_ns: ns,
        })
        .collect()
}

fn symmetric_laplacian(g: &Graph, kind: LaplacianKind) -> Result<DenseMatrix> {
    ensure!(!g.is_directed(), "this algorithm needs an undirected graph");
    ensure!(
        kind != LaplacianKind::NormalizedRandomWalk,
        "this algorithm needs a symmetric Laplacian"
    );
    Ok(g.laplacian(kind)?)
}

/// `A_o` for a directed graph; `I - mu_opt L` for an undirected one.
fn system_matrix(g: &Graph, cfg: &RunConfig) -> Result<(DenseMatrix, &'static str)> {
    if g.is_directed() {
        return Ok((g.weight_matrix(), "weights"));
    }
    let l = g.laplacian(cfg.laplacian)?;
    let b = fixed_step_bounds(&eig_decompose(
        &l,
        cfg.laplacian != LaplacianKind::NormalizedRandomWalk,
    )?)?;
    let mu = cfg.mu.unwrap_or(b.mu_opt);
    Ok((
        DenseMatrix::identity(g.n(), g.n()) - l * mu,
        "shifted_laplacian",
    ))
}

/// Runs one algorithm. Everything except the `wallclock_ns` column is a
/// pure function of the configuration.
pub fn run(algorithm: Algorithm, cfg: &RunConfig) -> Result<RunOutput> {
    let g = cfg.graph.load()?;
    let n = g.n();
    let w0 = cfg.init.vector(n)?;
    let iters = cfg.iters.unwrap_or(2 * n);
    let target = consensus_target(&w0);
    let opts = EigenstepOptions {
        group_tol: cfg.group_tol,
        ..Default::default()
    };

    let (t, eigen) = match algorithm {
        Algorithm::Fixed => {
            let l = g.laplacian(cfg.laplacian)?;
            let symmetric =
                cfg.laplacian != LaplacianKind::NormalizedRandomWalk && !g.is_directed();
            let b = fixed_step_bounds(&eig_decompose(&l, symmetric)?)?;
            let mu = cfg.mu.unwrap_or(b.mu_opt);
            let a = DenseMatrix::identity(n, n) - &l * mu;
            let mut t = run_linear(Operators::Fixed(&a), &w0, iters, &target)?;
            t.metadata.algorithm = "fixed".into();
            t.metadata.params.insert("mu".into(), mu);
            let amp = (1.0 - mu * b.lambda_max)
                .abs()
                .max((1.0 - mu * b.lambda_2).abs());
            if amp >= 1.0 {
                t.metadata.warnings.push(Warning::Instability {
                    max_amplification: amp,
                });
            }
            (t, summarize("laplacian", &l, symmetric, cfg.group_tol)?)
        }
        Algorithm::Eigenstep => {
            let l = symmetric_laplacian(&g, cfg.laplacian)?;
            let t = eigenstep_run(&l, &w0, EigenstepMode::Laplacian, &opts)?;
            (t, summarize("laplacian", &l, true, cfg.group_tol)?)
        }
        Algorithm::EigenstepDirected => {
            let (a, label) = system_matrix(&g, cfg)?;
            let t = eigenstep_run(&a, &w0, EigenstepMode::DirectedNormalized, &opts)?;
            (t, summarize(label, &a, false, cfg.group_tol)?)
        }
        Algorithm::Power => {
            let (a, label) = system_matrix(&g, cfg)?;
            let r = power_ac(&a, &w0, iters, cfg.normalization)?;
            (r.trajectory, summarize(label, &a, false, cfg.group_tol)?)
        }
        Algorithm::Nag => {
            let l = symmetric_laplacian(&g, cfg.laplacian)?;
            let params = NagParams { iters, ..cfg.nag };
            let t = nag_run(&l, &w0, params, &target)?;
            (t, summarize("laplacian", &l, true, cfg.group_tol)?)
        }
        Algorithm::ExactBacksub | Algorithm::ExactAdditions | Algorithm::GraphFilter => {
            return run_exact(algorithm, cfg, &g, &w0);
        }
    };

    Ok(RunOutput {
        rows: trajectory_rows(&t),
        sidecar: Sidecar {
            algorithm,
            graph: cfg.graph.to_string(),
            n,
            iterations: t.iterations(),
            final_error_db: t.final_error_db(),
            metadata: t.metadata,
            counters: None,
            eigen: Some(eigen),
        },
    })
}

fn run_exact(algorithm: Algorithm, cfg: &RunConfig, g: &Graph, w0: &[f64]) -> Result<RunOutput> {
    ensure!(
        !g.is_directed(),
        "exact algorithms need an undirected graph"
    );
    let n = g.n();
    let order = rcm_order(g)?;
    let h = g.relabel(&order)?;
    let weighting = match algorithm {
        Algorithm::ExactBacksub => Weighting::ColumnNormalized,
        _ => Weighting::UnitPm1,
    };
    let f = build_lower_factor(&h, weighting)?;
    let local = order.apply(w0);
    let target = consensus_target(w0);

    let start = Instant::now();
    let mut meta = Metadata::new(algorithm.name());
    let (w, counters, steps) = match algorithm {
        Algorithm::ExactBacksub => {
            let r = exact_ac_backsub(&f, &local)?;
            (r.w, Some(r.counters), r.counters.steps)
        }
        Algorithm::ExactAdditions => {
            let r = exact_ac_additions(&f, &local)?;
            (r.w, Some(r.counters), r.counters.steps)
        }
        _ => {
            let r = graph_filter_factored(&f, &local, cfg.truncate)?;
            meta = meta
                .param("degree", r.degree as f64)
                .param("imaginary_residue", r.imaginary_residue);
            if r.imaginary_residue > 1e-12 {
                meta.warnings.push(Warning::ImaginaryResidue {
                    magnitude: r.imaginary_residue,
                });
            }
            (r.w, None, r.matrix_iterations)
        }
    };
    let ns = u64::try_from(start.elapsed().as_nanos()).unwrap_or(u64::MAX);
    let w = order.unapply(&w);
    let final_db = error_db(&w, &target);
    meta = meta.param("steps", steps as f64);
    meta.residual = Some(10f64.powf(final_db / 20.0));

    let l = g.laplacian(LaplacianKind::UnnormalizedConstant)?;
    Ok(RunOutput {
        rows: vec![
            Row {
                iteration: 0,
                error_db: error_db(w0, &target),
                wallclock_ns: 0,
            },
            Row {
                iteration: steps,
                error_db: final_db,
                wallclock_ns: ns,
            },
        ],
        sidecar: Sidecar {
            algorithm,
            graph: cfg.graph.to_string(),
            n,
            iterations: steps,
            final_error_db: final_db,
            metadata: meta,
            counters,
            eigen: Some(summarize("laplacian", &l, true, cfg.group_tol)?),
        },
    })
}
