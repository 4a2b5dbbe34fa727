//! Iterative consensus engines.

mod eigenstep;
mod nag;
mod power;

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{ensure_len, ensure_square, euclidean, mat_vec, mean, DenseMatrix};
use crate::spectral::Spectrum;

pub use eigenstep::{
    eigenstep_run, eigenstep_schedule, mode_amplification, EigenstepMode, EigenstepOptions,
    OrderingPolicy, StepSchedule, INSTABILITY_THRESHOLD, MACHINE_EPS,
};
pub use nag::{nag_run, NagParams};
pub use power::{power_ac, Normalization, PowerRun};

/// Errors below this level are reported as the floor (exact hits would be `-inf`).
pub const ERROR_FLOOR_DB: f64 = -400.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    /// Mode amplification at or above [`INSTABILITY_THRESHOLD`].
    Instability { max_amplification: f64 },
    /// Imaginary part dropped from a complex-arithmetic result.
    ImaginaryResidue { magnitude: f64 },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Metadata {
    pub algorithm: String,
    pub params: BTreeMap<String, f64>,
    /// Relative distance of the final state from the closed-form oracle.
    pub residual: Option<f64>,
    pub warnings: Vec<Warning>,
}

impl Metadata {
    pub fn new(algorithm: &str) -> Self {
        Metadata {
            algorithm: algorithm.to_string(),
            ..Default::default()
        }
    }

    pub fn param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    /// `states[0]` is the initial vector.
    pub states: Vec<Vec<f64>>,
    pub errors_db: Vec<f64>,
    pub target: Vec<f64>,
    pub metadata: Metadata,
    /// Nanoseconds since the trajectory was created, per state.
    pub elapsed_ns: Vec<u64>,
    #[serde(skip)]
    started: Option<Instant>,
}

impl Trajectory {
    pub fn new(w0: Vec<f64>, target: Vec<f64>, metadata: Metadata) -> Self {
        let e = error_db(&w0, &target);
        Trajectory {
            states: vec![w0],
            errors_db: vec![e],
            target,
            metadata,
            elapsed_ns: vec![0],
            started: Some(Instant::now()),
        }
    }

    pub fn push(&mut self, w: Vec<f64>) {
        self.errors_db.push(error_db(&w, &self.target));
        self.states.push(w);
        let ns = self.started.map_or(0, |t| {
            u64::try_from(t.elapsed().as_nanos()).unwrap_or(u64::MAX)
        });
        self.elapsed_ns.push(ns);
    }

    pub fn iterations(&self) -> usize {
        self.states.len() - 1
    }

    pub fn final_state(&self) -> &[f64] {
        self.states
            .last()
            .expect("trajectory holds at least the initial state")
    }

    pub fn final_error_db(&self) -> f64 {
        *self.errors_db.last().expect("non-empty")
    }
}

/// `20 log10(||w - target|| / ||target||)`, absolute when the target is zero.
pub fn error_db(w: &[f64], target: &[f64]) -> f64 {
    let diff: Vec<f64> = w.iter().zip(target).map(|(a, b)| a - b).collect();
    let num = euclidean(&diff);
    let den = euclidean(target);
    let ratio = if den > 0.0 { num / den } else { num };
    if ratio == 0.0 {
        return ERROR_FLOOR_DB;
    }
    (20.0 * ratio.log10()).max(ERROR_FLOOR_DB)
}

/// `mean(w0) * 1`.
pub fn consensus_target(w0: &[f64]) -> Vec<f64> {
    vec![mean(w0); w0.len()]
}

/// One fixed operator or a per-iteration sequence.
#[derive(Debug, Clone, Copy)]
pub enum Operators<'a> {
    Fixed(&'a DenseMatrix),
    Schedule(&'a [DenseMatrix]),
}

/// Plain recursion `w_i = A_i w_{i-1}`.
pub fn run_linear(
    ops: Operators<'_>,
    w0: &[f64],
    iters: usize,
    target: &[f64],
) -> Result<Trajectory> {
    let n = w0.len();
    ensure_len(n, target.len())?;
    let check = |a: &DenseMatrix| -> Result<()> { ensure_len(n, ensure_square(a)?) };
    match ops {
        Operators::Fixed(a) => check(a)?,
        Operators::Schedule(list) => {
            if list.len() < iters {
                return Err(Error::SizeMismatch {
                    expected: iters,
                    found: list.len(),
                });
            }
            list.iter().try_for_each(check)?;
        }
    }
    let mut t = Trajectory::new(
        w0.to_vec(),
        target.to_vec(),
        Metadata::new("linear").param("iters", iters as f64),
    );
    let mut w = w0.to_vec();
    for i in 0..iters {
        let a = match ops {
            Operators::Fixed(a) => a,
            Operators::Schedule(list) => &list[i],
        };
        w = mat_vec(a, &w);
        t.push(w.clone());
    }
    Ok(t)
}

/// Step-size constants for `w_i = (I - mu L) w_{i-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepBounds {
    /// `2 / lambda_max`: stability limit.
    pub mu_max: f64,
    /// `2 / (lambda_2 + lambda_max)`: fastest fixed step.
    pub mu_opt: f64,
    pub lambda_2: f64,
    pub lambda_max: f64,
}

pub fn fixed_step_bounds(spectrum: &Spectrum) -> Result<StepBounds> {
    let vals = spectrum
        .real_values()
        .ok_or_else(|| Error::NotLaplacianSpectrum("complex eigenvalues".into()))?;
    let lambda_max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lambda_max.is_nan() || lambda_max <= 0.0 {
        return Err(Error::NotLaplacianSpectrum("no positive eigenvalue".into()));
    }
    let tol = 1e-9 * lambda_max;
    if vals.iter().any(|&v| v < -tol) {
        return Err(Error::NotLaplacianSpectrum("negative eigenvalue".into()));
    }
    let zeros = vals.iter().filter(|v| v.abs() <= tol).count();
    if zeros != 1 {
        return Err(Error::NotLaplacianSpectrum(format!(
            "expected a simple zero eigenvalue, found {zeros}"
        )));
    }
    let lambda_2 = vals
        .iter()
        .copied()
        .filter(|v| v.abs() > tol)
        .fold(f64::INFINITY, f64::min);
    Ok(StepBounds {
        mu_max: 2.0 / lambda_max,
        mu_opt: 2.0 / (lambda_2 + lambda_max),
        lambda_2,
        lambda_max,
    })
}
