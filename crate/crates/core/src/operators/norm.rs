use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::OperatorMatrix;
use crate::analysis::holder_norm;
use crate::space::FiniteSpace;
use crate::{Error, PointSet, Result};

const POWER_TOL: f64 = 1e-9;
const POWER_CAP: usize = 20_000;

/// `(Σ |f|^p w)^{1/p}`, or `max |f|` for `p = ∞`.
pub fn lp_norm(f: &[f64], w: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return f.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    }
    f.iter().zip(w).map(|(f, w)| f.abs().powf(p) * w).sum::<f64>().powf(1.0 / p)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerIteration {
    pub norm: f64,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub p: f64,
    pub q: f64,
    pub trials: usize,
    pub monte_carlo_lower_bound: f64,
    /// Present when `p = q = 2`.
    pub exact_p2: Option<PowerIteration>,
}

impl NormEstimate {
    pub fn exact_p2_norm(&self) -> Option<f64> {
        self.exact_p2.map(|e| e.norm)
    }
}

/// Seeded test function for trial `t`: Gaussian for even `t`, Rademacher for
/// odd `t`.
pub(crate) fn trial_function(m: usize, seed: u64, t: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(t as u64);
    if t % 2 == 0 {
        (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
    } else {
        (0..m).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect()
    }
}

/// Monte-Carlo lower bound for `‖T‖_{L^p → L^q}` and, for `p = q = 2`, the
/// exact norm by power iteration.
pub fn estimate_operator_norm(op: &OperatorMatrix, p: f64, q: f64, trials: usize, seed: u64) -> Result<NormEstimate> {
    if !(p > 1.0 && q > 1.0) {
        return Err(Error::input(format!("p and q must lie in (1, ∞], got {p}, {q}")));
    }
    if trials == 0 {
        return Err(Error::input("at least one trial is needed"));
    }
    let m = op.dim();
    let monte_carlo_lower_bound = (0..trials)
        .into_par_iter()
        .map(|t| {
            let f = trial_function(m, seed, t);
            let nf = lp_norm(&f, &op.weights, p);
            if nf > 0.0 {
                lp_norm(&op.apply_local(&f), &op.weights, q) / nf
            } else {
                0.0
            }
        })
        .reduce(|| 0.0, f64::max);
    let exact_p2 = (p == 2.0 && q == 2.0).then(|| exact_p2_norm(op, seed));
    Ok(NormEstimate { p, q, trials, monte_carlo_lower_bound, exact_p2 })
}

/// `‖W^{1/2} E W^{1/2}‖₂` by power iteration on its Gram matrix, stopped when
/// the residual is below `1e-9` of the Rayleigh quotient.
pub fn exact_p2_norm(op: &OperatorMatrix, seed: u64) -> PowerIteration {
    let m = op.dim();
    if m == 0 {
        return PowerIteration { norm: 0.0, converged: true, iterations: 0 };
    }
    let sw: Vec<f64> = op.weights.iter().map(|w| w.sqrt()).collect();
    let mat: Vec<f64> = (0..m * m).map(|k| sw[k / m] * op.entries[k] * sw[k % m]).collect();
    let mut transposed = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            transposed[j * m + i] = mat[i * m + j];
        }
    }
    let matvec = |a: &[f64], v: &[f64]| -> Vec<f64> {
        a.par_chunks(m).map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut v: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    normalize(&mut v);
    let mut lambda = 0.0;
    for it in 1..=POWER_CAP {
        let z = matvec(&transposed, &matvec(&mat, &v));
        lambda = dot(&v, &z);
        if lambda <= 0.0 {
            // `v` lies in the kernel; for a random start the matrix is zero.
            let zero = mat.iter().all(|v| *v == 0.0);
            return PowerIteration { norm: 0.0, converged: zero, iterations: it };
        }
        let residual: f64 = z.iter().zip(&v).map(|(z, v)| (z - lambda * v).powi(2)).sum::<f64>().sqrt();
        v = z;
        normalize(&mut v);
        if residual <= POWER_TOL * lambda {
            return PowerIteration { norm: lambda.sqrt(), converged: true, iterations: it };
        }
    }
    PowerIteration { norm: lambda.sqrt(), converged: false, iterations: POWER_CAP }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(a, b)| a * b).sum()
}

fn normalize(v: &mut [f64]) {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakReport {
    /// `(t, t μ{|Tf| > t} / ‖f‖₁)` per grid value.
    pub ratios: Vec<(f64, f64)>,
    pub constant: f64,
}

/// `t μ{|Tf| > t} / ‖f‖₁` over `t_grid`; `f` is indexed by position.
pub fn weak11_check(op: &OperatorMatrix, f: &[f64], t_grid: &[f64]) -> Result<WeakReport> {
    if t_grid.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::input("t grid must be positive"));
    }
    let tf = op.apply_local(f);
    let l1 = lp_norm(f, &op.weights, 1.0);
    let ratios: Vec<(f64, f64)> = t_grid
        .iter()
        .map(|&t| {
            let level: f64 = tf.iter().zip(&op.weights).filter(|(v, _)| v.abs() > t).map(|(_, w)| w).sum();
            (t, if l1 > 0.0 { t * level / l1 } else { 0.0 })
        })
        .collect();
    let constant = ratios.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(WeakReport { ratios, constant })
}

/// `sup_{t > 0} t μ{|Tf| > t} / ‖f‖₁`, attained as `t` increases to a value
/// of `|Tf|`.
pub fn weak11_exact(op: &OperatorMatrix, f: &[f64]) -> f64 {
    let tf = op.apply_local(f);
    let l1 = lp_norm(f, &op.weights, 1.0);
    if l1 == 0.0 {
        return 0.0;
    }
    let mut vals: Vec<(f64, f64)> = tf.iter().map(|v| v.abs()).zip(op.weights.iter().copied()).collect();
    vals.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = 0.0f64;
    let mut mass = 0.0;
    let mut i = 0;
    while i < vals.len() {
        let v = vals[i].0;
        while i < vals.len() && vals[i].0 == v {
            mass += vals[i].1;
            i += 1;
        }
        best = best.max(v * mass);
    }
    best / l1
}

/// `‖Tf‖_{C^η(inner)} / ‖f‖_{C^η(outer)}`; `f` is indexed by point id.
pub fn holder_ratio(space: &FiniteSpace, op: &OperatorMatrix, f: &[f64], eta: f64, inner: &PointSet, outer: &PointSet) -> f64 {
    let tf = op.apply(f);
    let den = holder_norm(space, f, eta, outer);
    if den > 0.0 {
        holder_norm(space, &tf, eta, inner) / den
    } else {
        0.0
    }
}
