use num_complex::Complex64;
use serde::Serialize;

use super::{consensus_target, Metadata, Trajectory, Warning};
use crate::error::{Error, Result};
use crate::matrix::{ensure_len, ensure_square, euclidean, imaginary_residue, DenseMatrix};
use crate::spectral::{eig_decompose, group_eigenvalues, EigenGroups, DEFAULT_GROUP_TOL};

/// Unit roundoff of IEEE double precision, `2^-52`.
pub const MACHINE_EPS: f64 = f64::EPSILON;
/// Amplification level at which a run is flagged as numerically unreliable.
pub const INSTABILITY_THRESHOLD: f64 = 1e-3;
/// Largest imaginary part (relative) that may be dropped from a complex run.
pub const IMAGINARY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderingPolicy {
    #[default]
    Ascending,
    Descending,
    /// `order[i]` is the position, in ascending order, of the `i`-th step.
    Custom(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepSchedule {
    /// Eigenvalue cancelled at each step.
    pub eigenvalues: Vec<Complex64>,
    /// `1 / eigenvalues[i]`.
    pub steps: Vec<Complex64>,
    pub policy: OrderingPolicy,
}

impl StepSchedule {
    /// Builds a schedule from distinct eigenvalues in any order.
    pub fn from_values(values: &[Complex64], policy: OrderingPolicy) -> Result<Self> {
        if values.iter().any(|v| v.norm() == 0.0) {
            return Err(Error::ZeroEigenvalueStep);
        }
        let eigenvalues = arrange(values, &policy)?;
        let steps = eigenvalues.iter().map(|v| v.inv()).collect();
        Ok(StepSchedule {
            eigenvalues,
            steps,
            policy,
        })
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

fn arrange(values: &[Complex64], policy: &OrderingPolicy) -> Result<Vec<Complex64>> {
    let mut asc = values.to_vec();
    asc.sort_by(|a, b| {
        a.norm()
            .total_cmp(&b.norm())
            .then_with(|| a.arg().total_cmp(&b.arg()))
    });
    Ok(match policy {
        OrderingPolicy::Ascending => asc,
        OrderingPolicy::Descending => asc.into_iter().rev().collect(),
        OrderingPolicy::Custom(order) => {
            let mut seen = vec![false; asc.len()];
            if order.len() != asc.len() {
                return Err(Error::SizeMismatch {
                    expected: asc.len(),
                    found: order.len(),
                });
            }
            for &o in order {
                if o >= asc.len() || std::mem::replace(&mut seen[o], true) {
                    return Err(Error::InvalidParameter(
                        "custom ordering is not a permutation".into(),
                    ));
                }
            }
            order.iter().map(|&o| asc[o]).collect()
        }
    })
}

fn cancelled_values(groups: &EigenGroups, surviving: Option<usize>) -> Result<Vec<Complex64>> {
    if let Some(s) = surviving {
        if s >= groups.groups.len() {
            return Err(Error::InvalidParameter(format!(
                "surviving group {s} out of range (have {})",
                groups.groups.len()
            )));
        }
    }
    Ok(groups
        .groups
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != surviving)
        .map(|(_, g)| g.value)
        .collect())
}

/// One step `1/lambda` per group other than the surviving one (by default
/// the zero group), ordered per `policy`.
pub fn eigenstep_schedule(
    groups: &EigenGroups,
    policy: OrderingPolicy,
    surviving_group: Option<usize>,
) -> Result<StepSchedule> {
    let surviving = surviving_group.or(groups.zero_index);
    if groups.zero_index.is_some() && groups.zero_index != surviving {
        return Err(Error::ZeroEigenvalueStep);
    }
    StepSchedule::from_values(&cancelled_values(groups, surviving)?, policy)
}

/// Residual factor `eps_m * prod_k (1 - lambda_m mu_k)` for each mode, the
/// product running over every scheduled step except the one cancelling `m`.
///
/// `eps` holds either one value for all modes or one per eigenvalue.
pub fn mode_amplification(
    eigenvalues: &[f64],
    schedule: &StepSchedule,
    eps: &[f64],
) -> Result<Vec<f64>> {
    let eps_of = |m: usize| -> Result<f64> {
        match eps.len() {
            1 => Ok(eps[0]),
            n if n == eigenvalues.len() => Ok(eps[m]),
            n => Err(Error::SizeMismatch {
                expected: eigenvalues.len(),
                found: n,
            }),
        }
    };
    let lams: Vec<f64> = schedule.eigenvalues.iter().map(|z| z.re).collect();
    if lams.contains(&0.0) {
        return Err(Error::DivisionByZeroEigenvalue);
    }
    eigenvalues
        .iter()
        .enumerate()
        .map(|(m, &lm)| {
            let mut prod = eps_of(m)?;
            for &lk in &lams {
                if (lk - lm).abs() <= 1e-12 * lk.abs() {
                    continue;
                }
                prod *= 1.0 - lm / lk;
            }
            Ok(prod)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenstepMode {
    /// `A_i = I - L / lambda_i` on a symmetric Laplacian.
    Laplacian,
    /// `A_i = (lambda_i I - A) / (lambda_i - lambda_N)` on a general matrix,
    /// with the dominant mode surviving and rescaled to the average.
    DirectedNormalized,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenstepOptions {
    pub policy: OrderingPolicy,
    pub group_tol: f64,
    /// Group index whose eigenvector survives; `None` picks the zero group
    /// (Laplacian mode) or the dominant group (directed mode).
    pub surviving_group: Option<usize>,
}

impl Default for EigenstepOptions {
    fn default() -> Self {
        EigenstepOptions {
            policy: OrderingPolicy::Ascending,
            group_tol: DEFAULT_GROUP_TOL,
            surviving_group: None,
        }
    }
}

pub fn eigenstep_run(
    system: &DenseMatrix,
    w0: &[f64],
    mode: EigenstepMode,
    opts: &EigenstepOptions,
) -> Result<Trajectory> {
    ensure_len(ensure_square(system)?, w0.len())?;
    match mode {
        EigenstepMode::Laplacian => run_laplacian(system, w0, opts),
        EigenstepMode::DirectedNormalized => run_directed(system, w0, opts),
    }
}

fn relative_gap(a: &[f64], b: &[f64]) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let den = euclidean(b);
    if den > 0.0 {
        euclidean(&diff) / den
    } else {
        euclidean(&diff)
    }
}

fn run_laplacian(l: &DenseMatrix, w0: &[f64], opts: &EigenstepOptions) -> Result<Trajectory> {
    let n = w0.len();
    let spectrum = eig_decompose(l, true)?;
    let groups = group_eigenvalues(&spectrum.values, opts.group_tol)?;
    let zero = groups
        .zero_index
        .filter(|&z| groups.groups[z].multiplicity == 1)
        .ok_or_else(|| Error::NotLaplacianSpectrum("zero eigenvalue missing or repeated".into()))?;
    let surviving = opts.surviving_group.unwrap_or(zero);
    let schedule = eigenstep_schedule(&groups, opts.policy.clone(), Some(surviving))?;

    let lams: Vec<f64> = schedule.eigenvalues.iter().map(|z| z.re).collect();
    let amp = mode_amplification(&lams, &schedule, &[MACHINE_EPS])?;
    let max_amp = amp.iter().fold(0.0_f64, |m, a| m.max(a.abs()));

    let target = if surviving == zero {
        consensus_target(w0)
    } else {
        let keep: Vec<bool> = (0..n)
            .map(|k| groups.groups[surviving].members.contains(&k))
            .collect();
        let p = spectrum.mode_projector(&keep);
        (0..n)
            .map(|i| (0..n).map(|j| p[(i, j)].re * w0[j]).sum())
            .collect()
    };

    let mut meta = Metadata::new("eigenstep")
        .param("k", schedule.len() as f64)
        .param("group_tol", opts.group_tol)
        .param("max_amplification", max_amp);
    if max_amp >= INSTABILITY_THRESHOLD {
        meta.warnings.push(Warning::Instability {
            max_amplification: max_amp,
        });
    }
    let mut t = Trajectory::new(w0.to_vec(), target, meta);
    let mut w = w0.to_vec();
    for mu in &schedule.steps {
        let lw = crate::matrix::mat_vec(l, &w);
        for (wi, li) in w.iter_mut().zip(&lw) {
            *wi -= mu.re * li;
        }
        t.push(w.clone());
    }
    t.metadata.residual = Some(relative_gap(&w, &t.target));
    Ok(t)
}

fn run_directed(a: &DenseMatrix, w0: &[f64], opts: &EigenstepOptions) -> Result<Trajectory> {
    let n = w0.len();
    let spectrum = eig_decompose(a, false)?;
    let groups = group_eigenvalues(&spectrum.values, opts.group_tol)?;
    let surviving = opts.surviving_group.unwrap_or(groups.groups.len() - 1);
    let cancelled = arrange(&cancelled_values(&groups, Some(surviving))?, &opts.policy)?;
    let sg = &groups.groups[surviving];
    if sg.multiplicity != 1 {
        return Err(Error::InvalidParameter(
            "surviving eigenvalue must be simple".into(),
        ));
    }
    let lam_n = sg.value;
    let v = spectrum.right(sg.members[0]);
    let u = spectrum.left(sg.members[0]);
    for vec in [&v, &u] {
        let scale = vec.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
        if let Some(k) = vec.iter().position(|z| z.norm() <= 1e-12 * scale) {
            return Err(Error::ZeroEigenvectorEntry { index: k + 1 });
        }
    }
    let scale = spectrum.max_modulus().max(f64::MIN_POSITIVE);
    if cancelled
        .iter()
        .any(|l| (l - lam_n).norm() <= opts.group_tol * scale)
    {
        return Err(Error::DegenerateNormalizer);
    }

    let max_amp = cancelled
        .iter()
        .map(|&lm| {
            cancelled
                .iter()
                .filter(|&&lk| lk != lm)
                .fold(MACHINE_EPS, |p, &lk| p * ((lk - lm) / (lk - lam_n)).norm())
        })
        .fold(0.0_f64, f64::max);

    let recover = |w: &[Complex64]| -> Vec<Complex64> {
        w.iter()
            .zip(&v)
            .map(|(wi, vi)| wi / vi / n as f64)
            .collect()
    };

    let w0p: Vec<Complex64> = w0.iter().zip(&u).map(|(x, ui)| x / ui).collect();
    let keep: Vec<bool> = (0..n).map(|k| k == sg.members[0]).collect();
    let proj = spectrum.mode_projector(&keep);
    let oracle_raw: Vec<Complex64> = (0..n)
        .map(|i| (0..n).map(|j| proj[(i, j)] * w0p[j]).sum())
        .collect();
    let oracle: Vec<f64> = recover(&oracle_raw).iter().map(|z| z.re).collect();

    let mut meta = Metadata::new("eigenstep_directed")
        .param("k", cancelled.len() as f64)
        .param("group_tol", opts.group_tol)
        .param("max_amplification", max_amp)
        .param("dominant_re", lam_n.re)
        .param("dominant_im", lam_n.im);
    if max_amp >= INSTABILITY_THRESHOLD {
        meta.warnings.push(Warning::Instability {
            max_amplification: max_amp,
        });
    }
    let mut t = Trajectory::new(w0.to_vec(), consensus_target(w0), meta);

    let mut w = w0p;
    let mut est = Vec::new();
    for &lam in &cancelled {
        let denom = lam - lam_n;
        let aw: Vec<Complex64> = (0..n)
            .map(|i| (0..n).map(|j| w[j] * a[(i, j)]).sum())
            .collect();
        w = w
            .iter()
            .zip(&aw)
            .map(|(wi, awi)| (lam * wi - awi) / denom)
            .collect();
        est = recover(&w);
        t.push(est.iter().map(|z| z.re).collect());
    }
    if cancelled.is_empty() {
        est = recover(&w);
        t.push(est.iter().map(|z| z.re).collect());
    }
    let residue = imaginary_residue(&est);
    if residue > IMAGINARY_TOL {
        return Err(Error::ImaginaryResidue { magnitude: residue });
    }
    t.metadata
        .params
        .insert("imaginary_residue".into(), residue);
    if residue > 1e-12 {
        t.metadata
            .warnings
            .push(Warning::ImaginaryResidue { magnitude: residue });
    }
    let fin = t.final_state().to_vec();
    t.metadata.residual = Some(relative_gap(&fin, &oracle));
    Ok(t)
}
