//! Mean-oscillation moduli, the local-to-envelope bridge, and commutators.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dyadic::Envelope;
use crate::operators::{
    check_len, check_nonnegative, estimate_operator_norm, localize, KernelSpec, LocalizeOptions, LocalizedKernel,
    OperatorMatrix,
};
use crate::report::within_factor;
use crate::space::{ConstantsTable, FiniteSpace, PointId, SortedRow};
use crate::{Error, PointSet, Result};

/// Weighted mean oscillation `(1/μ(B)) Σ_B |u − u_B| μ` of `u` over `ids`.
pub fn mean_oscillation(space: &FiniteSpace, u: &[f64], ids: &[PointId]) -> f64 {
    let mass: f64 = ids.iter().map(|&y| space.weight(y)).sum();
    if mass == 0.0 {
        return 0.0;
    }
    let mean = ids.iter().map(|&y| u[y] * space.weight(y)).sum::<f64>() / mass;
    ids.iter().map(|&y| (u[y] - mean).abs() * space.weight(y)).sum::<f64>() / mass
}

/// `min_τ (1/μ(B)) Σ_B |u − τ| μ`, attained at a weighted median.
pub fn oscillation_about_median(space: &FiniteSpace, u: &[f64], ids: &[PointId]) -> f64 {
    let mass: f64 = ids.iter().map(|&y| space.weight(y)).sum();
    if mass == 0.0 {
        return 0.0;
    }
    let mut vals: Vec<(f64, f64)> = ids.iter().map(|&y| (u[y], space.weight(y))).collect();
    vals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut acc = 0.0;
    let mut tau = vals[0].0;
    for &(v, w) in &vals {
        acc += w;
        if acc >= mass / 2.0 {
            tau = v;
            break;
        }
    }
    vals.iter().map(|(v, w)| (v - tau).abs() * w).sum::<f64>() / mass
}

/// One ball of a sweep. It equals `B(x₀, t)` for every `t > reach` up to
/// the next distance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallOscillation {
    pub center: PointId,
    /// Largest `ρ(x₀, y)` inside the ball.
    pub reach: f64,
    pub oscillation: f64,
    /// Oscillation about the best constant.
    pub about_median: f64,
}

/// Every distinct ball `B(x₀, t) ∩ domain` with `x₀ ∈ centers`, `t ≤ cap`.
fn sweep(space: &FiniteSpace, u: &[f64], centers: &PointSet, domain: Option<&PointSet>, cap: f64) -> Vec<BallOscillation> {
    let mut out: Vec<BallOscillation> = centers
        .as_slice()
        .par_iter()
        .flat_map_iter(|&x| {
            let row = match domain {
                Some(d) => SortedRow::within(space, x, d),
                None => SortedRow::new(space, x),
            };
            let mut balls = Vec::new();
            let mut last = usize::MAX;
            for t in row.radii_up_to(cap) {
                let k = row.count_below(t);
                if k == last || k == 0 {
                    continue;
                }
                last = k;
                let ids = &row.ids[..k];
                balls.push(BallOscillation {
                    center: x,
                    reach: row.dist[k - 1],
                    oscillation: mean_oscillation(space, u, ids),
                    about_median: oscillation_about_median(space, u, ids),
                });
            }
            balls
        })
        .collect();
    out.sort_by(|a, b| a.reach.total_cmp(&b.reach).then(a.center.cmp(&b.center)));
    out
}

/// `η*(r)` on a radius grid, with the supremum over the whole grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BmoModulus {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub norm: f64,
    /// Largest `oscillation / about_median` over the swept balls; at most 2.
    pub median_factor: f64,
}

fn modulus_from(balls: &[BallOscillation], radii: &[f64]) -> BmoModulus {
    let values: Vec<f64> = radii
        .iter()
        .map(|&r| balls.iter().filter(|b| b.reach < r).map(|b| b.oscillation).fold(0.0, f64::max))
        .collect();
    let median_factor = balls
        .iter()
        .filter(|b| b.oscillation > 0.0)
        .map(|b| b.oscillation / b.about_median)
        .fold(0.0, f64::max);
    BmoModulus { radii: radii.to_vec(), norm: values.iter().copied().fold(0.0, f64::max), values, median_factor }
}

/// `η*_{u,Ω_n,Ω_{n+1}}(r)`: largest mean oscillation over balls centered in
/// `Ω_n` with radius at most `r ≤ ε_n`.
pub fn bmo_loc_modulus(space: &FiniteSpace, table: &ConstantsTable, u: &[f64], n: u32, r: f64) -> Result<f64> {
    Ok(bmo_loc_table(space, table, u, n, &[r])?.values[0])
}

/// [`bmo_loc_modulus`] at every radius of `radii`.
pub fn bmo_loc_table(space: &FiniteSpace, table: &ConstantsTable, u: &[f64], n: u32, radii: &[f64]) -> Result<BmoModulus> {
    check_len(space, u)?;
    let eps = table.get(n)?.eps;
    if let Some(r) = radii.iter().find(|r| !(**r > 0.0 && **r <= eps)) {
        return Err(Error::Range(format!("radius {r} must lie in (0, eps_{n} = {eps}]")));
    }
    let cap = radii.iter().copied().fold(0.0, f64::max);
    Ok(modulus_from(&sweep(space, u, &space.omega(n), None, cap), radii))
}

/// `η_{u,S}(r)` with balls centered in `S` and intersected with `S`;
/// `r = ∞` gives `‖u‖_{BMO(S)}`.
pub fn bmo_subset_modulus(space: &FiniteSpace, s: &PointSet, u: &[f64], r: f64) -> Result<f64> {
    check_len(space, u)?;
    if s.is_empty() {
        return Err(Error::input("subset must be nonempty"));
    }
    let balls = sweep(space, u, s, Some(s), r);
    Ok(modulus_from(&balls, &[r]).values[0])
}

pub fn bmo_norm(space: &FiniteSpace, s: &PointSet, u: &[f64]) -> Result<f64> {
    bmo_subset_modulus(space, s, u, f64::INFINITY)
}

/// Both sides of `‖u‖_{BMO(F)} ≤ c η*_{u,Ω_{n+2},Ω_{n+3}}(c_n R)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BridgeReport {
    pub radius: f64,
    pub lhs: f64,
    /// `max(j_n, 1)`.
    pub c_n: f64,
    /// Radius at which the modulus is taken: `c_n R`, clipped to `ε_{n+2}`.
    pub modulus_radius: f64,
    pub clipped: bool,
    pub modulus: f64,
    /// `lhs / modulus`; zero when both vanish, infinite on a violation.
    pub constant: f64,
}

impl BridgeReport {
    pub fn violated(&self) -> bool {
        self.constant.is_infinite()
    }
}

pub fn verify_bmo_bridge(space: &FiniteSpace, table: &ConstantsTable, env: &Envelope, u: &[f64]) -> Result<BridgeReport> {
    check_len(space, u)?;
    let n = env.n;
    let lhs = bmo_norm(space, &env.f, u)?;
    let c_n = env.measured.dilation.max(1.0);
    let eps = table.get(n + 2)?.eps;
    let want = c_n * env.radius;
    let modulus_radius = want.min(eps);
    let modulus = bmo_loc_modulus(space, table, u, n + 2, modulus_radius)?;
    let constant = if modulus > 0.0 {
        lhs / modulus
    } else if lhs > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    Ok(BridgeReport { radius: env.radius, lhs, c_n, modulus_radius, clipped: want > eps, modulus, constant })
}

/// Bridge constants over several envelopes, stable within `factor`.
pub fn bridge_stability(reports: &[BridgeReport], factor: f64) -> bool {
    let cs: Vec<f64> = reports.iter().map(|r| r.constant).collect();
    within_factor(&cs, factor)
}

/// `C_a f = T(af) − a Tf`.
pub fn commutator_apply(t: impl Fn(&[f64]) -> Vec<f64>, a: &[f64], f: &[f64]) -> Vec<f64> {
    let af: Vec<f64> = a.iter().zip(f).map(|(a, f)| a * f).collect();
    let taf = t(&af);
    let tf = t(f);
    taf.iter().zip(&tf).zip(a).map(|((x, y), a)| x - a * y).collect()
}

/// `Σ_y K̃(x,y) |a(x) − a(y)| f(y) μ(y)` for a nonnegative kernel.
pub fn positive_commutator_apply(space: &FiniteSpace, loc: &LocalizedKernel, a: &[f64], f: &[f64]) -> Result<Vec<f64>> {
    check_len(space, a)?;
    check_len(space, f)?;
    check_nonnegative(&loc.kernel)?;
    let ids = loc.domain().as_slice();
    let m = ids.len();
    let mut out = vec![0.0; space.len()];
    for (i, &x) in ids.iter().enumerate() {
        let mut sum = 0.0;
        for (j, &y) in ids.iter().enumerate() {
            sum += loc.kernel.entries[i * m + j] * (a[x] - a[y]).abs() * f[y] * space.weight(y);
        }
        out[x] = sum;
    }
    Ok(out)
}

/// Matrix of `C_a` on the operator's points: `E(x,y) (a(y) − a(x))`.
pub fn commutator_matrix(op: &OperatorMatrix, a: &[f64]) -> OperatorMatrix {
    let ids = op.points.as_slice();
    let m = ids.len();
    let mut entries = op.entries.clone();
    for i in 0..m {
        for j in 0..m {
            entries[i * m + j] *= a[ids[j]] - a[ids[i]];
        }
    }
    OperatorMatrix { points: op.points.clone(), weights: op.weights.clone(), entries }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VmoRow {
    pub r: f64,
    pub monte_carlo: f64,
    pub exact_p2: f64,
    pub converged: bool,
    pub modulus_radius: f64,
    pub modulus: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VmoReport {
    pub c_n: f64,
    pub rows: Vec<VmoRow>,
    /// `max norm(r) / η*(c_n r)` over the grid.
    pub constant: f64,
    /// Largest `norm(r_{i+1}) / norm(r_i)` along the decreasing grid.
    pub max_growth: f64,
}

impl VmoReport {
    pub fn dominated(&self) -> bool {
        self.constant.is_finite()
    }
}

pub struct VmoSetup<'a> {
    pub n: u32,
    pub base: &'a KernelSpec,
    pub center: PointId,
    pub c_n: f64,
    pub opts: LocalizeOptions,
    pub trials: usize,
    pub seed: u64,
}

/// Commutator norms of `T_r` on `B(x̄, r)` along a decreasing radius grid,
/// against `η*_{a,Ω_{n+2},Ω_{n+3}}(c_n r)`.
pub fn vmo_smallness_experiment(
    space: &FiniteSpace,
    table: &ConstantsTable,
    setup: &VmoSetup,
    a: &[f64],
    radii: &[f64],
) -> Result<VmoReport> {
    check_len(space, a)?;
    if radii.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::input("radii must be strictly decreasing"));
    }
    let eps = table.get(setup.n + 2)?.eps;
    let mut rows = Vec::with_capacity(radii.len());
    for &r in radii {
        let loc = localize(space, table, setup.n, setup.base, setup.center, r, &setup.opts)?;
        let comm = commutator_matrix(&loc.operator(space), a);
        let est = estimate_operator_norm(&comm, 2.0, 2.0, setup.trials, setup.seed)?;
        let exact = est.exact_p2.expect("p = q = 2");
        let modulus_radius = (setup.c_n * r).min(eps);
        let modulus = bmo_loc_modulus(space, table, a, setup.n + 2, modulus_radius)?;
        rows.push(VmoRow {
            r,
            monte_carlo: est.monte_carlo_lower_bound,
            exact_p2: exact.norm,
            converged: exact.converged,
            modulus_radius,
            modulus,
        });
    }
    let constant = rows
        .iter()
        .map(|r| {
            if r.modulus > 0.0 {
                r.exact_p2 / r.modulus
            } else if r.exact_p2 > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max);
    let max_growth = rows
        .windows(2)
        .filter(|w| w[0].exact_p2 > 0.0)
        .map(|w| w[1].exact_p2 / w[0].exact_p2)
        .fold(0.0, f64::max);
    Ok(VmoReport { c_n: setup.c_n, rows, constant, max_growth })
}
