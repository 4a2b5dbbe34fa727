use anyhow::Result;
use consensus_core::diffusion::{run_diffusion, NetworkModel, ProjectorKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::source::GraphSource;

pub fn parse_projector(s: &str) -> Result<ProjectorKind> {
    Ok(match s {
        "backsub" => ProjectorKind::BackSub,
        "additions" => ProjectorKind::Additions,
        "dense" => ProjectorKind::DenseOracle,
        _ => anyhow::bail!("unknown projector {s:?}; expected backsub, additions or dense"),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffuseConfig {
    pub graph: GraphSource,
    pub m: usize,
    pub mu: f64,
    pub steps: usize,
    pub noise_var: f64,
    pub regressor_var: f64,
    pub projector: ProjectorKind,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffuseSummary {
    pub config: DiffuseConfig,
    pub n: usize,
    pub w_true: Vec<f64>,
    pub steps_run: usize,
    pub final_msd_db: f64,
    pub min_msd_db: f64,
    pub max_spread: f64,
    pub diverged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiffuseOutput {
    pub msd_db: Vec<f64>,
    pub summary: DiffuseSummary,
}

/// Common parameter vector drawn uniformly on `[-1, 1)` from `seed`; the
/// data stream uses `seed + 1`.
pub fn diffuse(cfg: &DiffuseConfig) -> Result<DiffuseOutput> {
    let g = cfg.graph.load()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let w: Vec<f64> = (0..cfg.m).map(|_| rng.random_range(-1.0..1.0)).collect();
    let model = NetworkModel::common(g.n(), w.clone(), cfg.noise_var, cfg.regressor_var);
    let r = run_diffusion(
        &model,
        &g,
        cfg.mu,
        cfg.steps,
        cfg.projector,
        cfg.seed.wrapping_add(1),
    )?;
    let summary = DiffuseSummary {
        config: cfg.clone(),
        n: g.n(),
        w_true: w,
        steps_run: r.msd_db.len() - 1,
        final_msd_db: *r.msd_db.last().expect("initial MSD recorded"),
        min_msd_db: r.msd_db.iter().copied().fold(f64::INFINITY, f64::min),
        max_spread: r.max_spread,
        diverged: r.diverged,
    };
    Ok(DiffuseOutput {
        msd_db: r.msd_db,
        summary,
    })
}

pub fn diffuse_csv(out: &DiffuseOutput) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["step", "msd_db"])?;
    for (i, x) in out.msd_db.iter().enumerate() {
        w.write_record([i.to_string(), format!("{x}")])?;
    }
    Ok(w.into_inner()?)
}
