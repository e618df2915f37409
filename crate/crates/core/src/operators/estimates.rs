use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{KernelMatrix, LocalizedKernel, RhoPrime};
use crate::analysis::holder_seminorm_supported;
use crate::space::{FiniteSpace, PointId, SortedRow};
use crate::{Error, PointSet, Result};

/// Smallest constants in the size and smoothness estimates over a region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StandardEstimates {
    #[serde(rename = "A")]
    pub a: f64,
    pub a_witness: Option<(PointId, PointId)>,
    #[serde(rename = "B")]
    pub b: f64,
    pub b_witness: Option<(PointId, PointId, PointId)>,
    pub nu: f64,
    pub beta: f64,
    #[serde(rename = "M")]
    pub m: f64,
}

/// Exhaustive minimal `A` in `|K(x,y)| ≤ A ρ(x,y)^ν / μ(B(x,ρ(x,y)))` and
/// minimal `B` in the smoothness bound over triples with
/// `ρ(x₀,y) > M ρ(x₀,x)`.
pub fn check_standard_estimates(
    space: &FiniteSpace,
    k: &(dyn Fn(PointId, PointId) -> f64 + Sync),
    region: &PointSet,
    nu: f64,
    beta: f64,
    m: f64,
) -> StandardEstimates {
    let ids = region.as_slice();
    let rows: Vec<SortedRow> = ids.par_iter().map(|&x| SortedRow::new(space, x)).collect();
    let ball = |i: usize, r: f64| rows[i].measure_below(r);

    type Best<W> = (f64, Option<W>);
    fn pick<W>(a: Best<W>, b: Best<W>) -> Best<W> {
        if b.0 > a.0 {
            b
        } else {
            a
        }
    }

    let (a, a_witness) = (0..ids.len())
        .into_par_iter()
        .map(|i| {
            let x = ids[i];
            let mut best: Best<(PointId, PointId)> = (0.0, None);
            for &y in ids {
                if x != y {
                    let r = space.rho(x, y);
                    let v = k(x, y).abs() * ball(i, r) / r.powf(nu);
                    best = pick(best, (v, Some((x, y))));
                }
            }
            best
        })
        .reduce(|| (0.0, None), pick);

    let (b, b_witness) = (0..ids.len())
        .into_par_iter()
        .map(|i| {
            let x0 = ids[i];
            let mut best: Best<(PointId, PointId, PointId)> = (0.0, None);
            for &y in ids {
                if y == x0 {
                    continue;
                }
                let r0y = space.rho(x0, y);
                let scale = ball(i, r0y) / r0y.powf(nu);
                let (k0y, ky0) = (k(x0, y), k(y, x0));
                for &x in ids {
                    if x == x0 {
                        continue;
                    }
                    let r0x = space.rho(x0, x);
                    if !(r0y > m * r0x) {
                        continue;
                    }
                    let num = (k0y - k(x, y)).abs() + (ky0 - k(y, x)).abs();
                    if num > 0.0 {
                        let v = num * scale / (r0x / r0y).powf(beta);
                        best = pick(best, (v, Some((x0, x, y))));
                    }
                }
            }
            best
        })
        .reduce(|| (0.0, None), pick);

    StandardEstimates { a, a_witness, b, b_witness, nu, beta, m }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CancellationReport {
    pub x: PointId,
    pub max: f64,
    pub witness: Option<(f64, f64)>,
}

/// Largest `|Σ_{ε₁<ρ′(x,y)<ε₂} K(x,y)μ(y)| + |Σ_{ε₁<ρ′(x,z)<ε₂} K(z,x)μ(z)|`
/// over shell pairs from `shells`, summing over `over`.
pub fn check_cancellation(
    space: &FiniteSpace,
    k: &(dyn Fn(PointId, PointId) -> f64 + Sync),
    x: PointId,
    shells: &[f64],
    rho_prime: &RhoPrime,
    over: &PointSet,
) -> Result<CancellationReport> {
    space.check_point(x)?;
    if shells.iter().any(|e| !(*e > 0.0)) || shells.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::input("shell radii must be positive and increasing"));
    }
    let terms: Vec<(f64, f64, f64)> = over
        .iter()
        .filter(|&y| y != x)
        .map(|y| (rho_prime.eval(space, x, y), k(x, y) * space.weight(y), k(y, x) * space.weight(y)))
        .collect();
    let mut best = (0.0f64, None);
    for (i, &e1) in shells.iter().enumerate() {
        for &e2 in &shells[i + 1..] {
            let (mut s1, mut s2) = (0.0, 0.0);
            for &(r, a, b) in &terms {
                if e1 < r && r < e2 {
                    s1 += a;
                    s2 += b;
                }
            }
            let v = s1.abs() + s2.abs();
            if v > best.0 {
                best = (v, Some((e1, e2)));
            }
        }
    }
    Ok(CancellationReport { x, max: best.0, witness: best.1 })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub x: PointId,
    pub eps: Vec<f64>,
    pub partial_sums: Vec<f64>,
    /// `h̃(x)`.
    pub limit: f64,
    /// First index from which every partial sum equals the limit.
    pub stable_from: usize,
    /// First index with `ε` below the smallest positive `ρ′(x, ·)`.
    pub exact_from: usize,
}

/// Partial sums `Σ_{y ∈ Ω_{n+1}, ρ′(x,y) > ε} K̃(x,y) μ(y)` along a decreasing
/// grid.
pub fn convergence_check(
    space: &FiniteSpace,
    loc: &LocalizedKernel,
    rho_prime: &RhoPrime,
    x: PointId,
    eps_grid: &[f64],
) -> Result<ConvergenceReport> {
    space.check_point(x)?;
    if eps_grid.iter().any(|e| !(*e > 0.0)) || eps_grid.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::input("eps grid must be positive and strictly decreasing"));
    }
    let omega = space.omega(loc.n + 1);
    let min_pos = omega
        .iter()
        .filter(|&y| y != x)
        .map(|y| rho_prime.eval(space, x, y))
        .fold(f64::INFINITY, f64::min);
    let exact_from = eps_grid
        .iter()
        .position(|&e| e < min_pos)
        .ok_or_else(|| Error::input(format!("eps grid must reach below {min_pos}")))?;
    let terms: Vec<(f64, f64)> = loc
        .domain()
        .iter()
        .filter(|&y| y != x && omega.contains(y))
        .map(|y| (rho_prime.eval(space, x, y), loc.eval(x, y) * space.weight(y)))
        .collect();
    let partial_sums: Vec<f64> = eps_grid
        .iter()
        .map(|&e| terms.iter().filter(|t| t.0 > e).map(|t| t.1).sum())
        .collect();
    let limit = partial_sums[exact_from];
    let stable_from = partial_sums.iter().rposition(|s| *s != limit).map_or(0, |i| i + 1);
    Ok(ConvergenceReport { x, eps: eps_grid.to_vec(), partial_sums, limit, stable_from, exact_from })
}

/// `h̃(x) = Σ_{y ≠ x} K̃(x,y) μ(y)` for every point, indexed by point id.
pub fn h_tilde(space: &FiniteSpace, loc: &LocalizedKernel) -> Vec<f64> {
    let mut ones = vec![0.0; space.len()];
    let omega = space.omega(loc.n + 1);
    for y in omega.iter() {
        ones[y] = 1.0;
    }
    loc.operator(space).apply(&ones)
}

/// Hölder-`γ` seminorm of `h̃` over `Ω_{n+1}`.
pub fn h_tilde_seminorm(space: &FiniteSpace, loc: &LocalizedKernel, gamma: f64) -> f64 {
    let h = h_tilde(space, loc);
    holder_seminorm_supported(space, &h, gamma, loc.domain(), &space.omega(loc.n + 1))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferReport {
    /// Constants of `K` on `B(x̄, R₀)`.
    pub base: StandardEstimates,
    /// Constants of `K̃` on `Ω_{n+1}`.
    pub localized: StandardEstimates,
    pub a_inflation: f64,
    pub b_inflation: f64,
}

/// Standard-estimate constants before and after localization.
pub fn localization_transfer(space: &FiniteSpace, loc: &LocalizedKernel, beta: f64, m: f64) -> Result<TransferReport> {
    let region = space.ball(loc.center, loc.r0)?;
    let base_k = KernelMatrix::assemble(space, &loc.base, &region)?;
    let nu = loc.base.nu;
    let base_fn = |x: PointId, y: PointId| base_k.get_or_zero(x, y);
    let base = check_standard_estimates(space, &base_fn, &region, nu, beta, m);
    let loc_fn = |x: PointId, y: PointId| loc.eval(x, y);
    let localized = check_standard_estimates(space, &loc_fn, &space.omega(loc.n + 1), nu, beta, m);
    let ratio = |after: f64, before: f64| if before > 0.0 { after / before } else if after > 0.0 { f64::INFINITY } else { 1.0 };
    Ok(TransferReport {
        a_inflation: ratio(localized.a, base.a),
        b_inflation: ratio(localized.b, base.b),
        base,
        localized,
    })
}
