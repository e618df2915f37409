//! Order-α quasidistance, Hölder cutoff functions and Hölder seminorms.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::space::{FiniteSpace, PointId};
use crate::{Error, PointSet, Result};

/// Largest `|Ω_n|` for the all-pairs chain computation.
pub const CHAIN_CAP: usize = 1500;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum AlphaChoice {
    /// `α = 1 / log₂(3 B_n²)`.
    #[default]
    Formula,
    /// `α = 1`, exact for genuine metrics.
    Metric,
    Explicit(f64),
}

impl AlphaChoice {
    pub fn alpha(self, b_n: f64) -> f64 {
        match self {
            AlphaChoice::Formula => 1.0 / (3.0 * b_n * b_n).log2(),
            AlphaChoice::Metric => 1.0,
            AlphaChoice::Explicit(a) => a,
        }
    }
}

/// `d = m^{1/α}` where `m` is the cheapest chain cost with edge weights `ρ^α`
/// inside `Ω_n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderAlphaDistance {
    pub n: u32,
    pub alpha: f64,
    pub members: PointSet,
    /// Chain cost `m`, row-major over `members`.
    pub chain: Vec<f64>,
    /// `d = m^{1/α}`, row-major over `members`.
    pub matrix: Vec<f64>,
    pub c_low: f64,
    pub c_high: f64,
    pub order_constant: f64,
}

pub fn order_alpha_distance(space: &FiniteSpace, n: u32, b_n: f64, choice: AlphaChoice) -> Result<OrderAlphaDistance> {
    if !space.is_symmetric() {
        return Err(Error::input("order-alpha distance needs a symmetric quasidistance"));
    }
    let alpha = choice.alpha(b_n);
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::input(format!("alpha must lie in (0,1], got {alpha}")));
    }
    let members = space.omega(n);
    let m = members.len();
    if m > CHAIN_CAP {
        return Err(Error::SizeCap { what: "chain distance domain", size: m, cap: CHAIN_CAP });
    }
    let ids = members.as_slice();
    let rho = space.dense_matrix(&members);
    let mut chain: Vec<f64> = rho.iter().map(|v| v.powf(alpha)).collect();
    // Floyd–Warshall, then relaxation sweeps until no entry changes, so the
    // triangle inequality holds exactly in floating point.
    for k in 0..m {
        let row_k: Vec<f64> = chain[k * m..(k + 1) * m].to_vec();
        chain.par_chunks_mut(m).for_each(|row| {
            let ik = row[k];
            for j in 0..m {
                let via = ik + row_k[j];
                if via < row[j] {
                    row[j] = via;
                }
            }
        });
    }
    loop {
        let snapshot = chain.clone();
        let changed: usize = chain
            .par_chunks_mut(m)
            .map(|row| {
                let mut changed = 0;
                for k in 0..m {
                    let ik = row[k];
                    for j in 0..m {
                        let via = ik + snapshot[k * m + j];
                        if via < row[j] {
                            row[j] = via;
                            changed += 1;
                        }
                    }
                }
                changed
            })
            .sum();
        if changed == 0 {
            break;
        }
    }
    snap_to_rho(choice, &mut chain, &rho);
    let matrix: Vec<f64> = chain.iter().map(|v| v.powf(1.0 / alpha)).collect();

    let mut c_low = f64::INFINITY;
    let mut c_high = 0.0f64;
    for i in 0..m {
        for j in 0..m {
            if i != j {
                let r = matrix[i * m + j] / space.rho(ids[i], ids[j]);
                c_low = c_low.min(r);
                c_high = c_high.max(r);
            }
        }
    }
    if m < 2 {
        c_low = 1.0;
        c_high = 1.0;
    }
    let order_constant = order_constant(&matrix, m, alpha);
    Ok(OrderAlphaDistance { n, alpha, members, chain, matrix, c_low, c_high, order_constant })
}

/// Best `c` in `|d(x₁,y) − d(x₂,y)| ≤ c d(x₁,x₂)^α (d(x₁,y)^{1−α} + d(x₂,y)^{1−α})`.
fn order_constant(d: &[f64], m: usize, alpha: f64) -> f64 {
    (0..m)
        .into_par_iter()
        .map(|i| {
            let mut best = 0.0f64;
            for j in 0..m {
                if i == j {
                    continue;
                }
                let lead = d[i * m + j].powf(alpha);
                for y in 0..m {
                    let (a, b) = (d[i * m + y], d[j * m + y]);
                    let num = (a - b).abs();
                    if num > 0.0 {
                        best = best.max(num / (lead * (a.powf(1.0 - alpha) + b.powf(1.0 - alpha))));
                    }
                }
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

impl OrderAlphaDistance {
    pub fn d(&self, x: PointId, y: PointId) -> Option<f64> {
        let (i, j) = (self.members.index_of(x)?, self.members.index_of(y)?);
        Some(self.matrix[i * self.members.len() + j])
    }

    /// Largest violation of `m(x,z) ≤ m(x,y) + m(y,z)`, as `(x, y, z)`.
    pub fn chain_triangle_violation(&self) -> Option<(PointId, PointId, PointId)> {
        let m = self.members.len();
        let ids = self.members.as_slice();
        let c = &self.chain;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    if c[i * m + k] > c[i * m + j] + c[j * m + k] {
                        return Some((ids[i], ids[j], ids[k]));
                    }
                }
            }
        }
        None
    }

    /// Full `N × N` matrix: `d` inside `Ω_n`, `ρ` for pairs leaving it.
    pub fn extended_matrix(&self, space: &FiniteSpace) -> Vec<f64> {
        let n = space.len();
        let mut out = vec![0.0; n * n];
        for x in 0..n {
            for y in 0..n {
                out[x * n + y] = self.d(x, y).unwrap_or_else(|| space.rho(x, y));
            }
        }
        out
    }
}

/// With `α = 1` on a genuine metric a chain undercuts `ρ` only by rounding
/// in the sums; then the chain costs are replaced by `ρ` itself.
fn snap_to_rho(choice: AlphaChoice, cost: &mut [f64], rho: &[f64]) {
    if matches!(choice, AlphaChoice::Metric) && cost.iter().zip(rho).all(|(c, r)| *c >= r * (1.0 - 1e-12)) {
        cost.copy_from_slice(rho);
    }
}

/// `ψ(t) = 1` on `[0, r]`, `2 − t/r` on `[r, 2r]`, `0` beyond.
pub fn psi(t: f64, r: f64) -> f64 {
    if t <= r {
        1.0
    } else if t <= 2.0 * r {
        2.0 - t / r
    } else {
        0.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffFunction {
    pub center: PointId,
    /// Radius `r` of the plateau in the `d` metric.
    pub r: f64,
    /// `c₁ = 1 / c_high`: `φ = 1` on `B(x₀, c₁ r)`.
    pub c1: f64,
    /// `c₂ = 2 / c_low`: `φ = 0` off `B(x₀, c₂ r)`.
    pub c2: f64,
    pub alpha: f64,
    /// `φ(x)` for every point of the space.
    pub values: Vec<f64>,
    /// Best `c` in `|φ(x₁) − φ(x₂)| ≤ c (ρ(x₁,x₂)/r)^α` over `Ω_n`.
    pub holder_constant: f64,
}

impl CutoffFunction {
    pub fn inner_radius(&self) -> f64 {
        self.c1 * self.r
    }

    pub fn outer_radius(&self) -> f64 {
        self.c2 * self.r
    }

    /// Points where `φ > 0`.
    pub fn support(&self) -> PointSet {
        PointSet::from_sorted((0..self.values.len()).filter(|&x| self.values[x] > 0.0).collect())
    }
}

/// Chain distances from one center, computed by Dijkstra on the complete
/// graph over `Ω_n`; no size cap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaRow {
    pub n: u32,
    pub alpha: f64,
    pub center: PointId,
    pub members: PointSet,
    /// `d(x₀, x)` for every point of the space, `+∞` off `Ω_n`.
    pub dist: Vec<f64>,
    /// Equivalence constants of `d(x₀, ·)` against `ρ(x₀, ·)`.
    pub c_low: f64,
    pub c_high: f64,
}

pub fn order_alpha_row(space: &FiniteSpace, n: u32, b_n: f64, choice: AlphaChoice, x0: PointId) -> Result<AlphaRow> {
    space.check_point(x0)?;
    if !space.is_symmetric() {
        return Err(Error::input("order-alpha distance needs a symmetric quasidistance"));
    }
    let alpha = choice.alpha(b_n);
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::input(format!("alpha must lie in (0,1], got {alpha}")));
    }
    let members = space.omega(n);
    let s = members
        .index_of(x0)
        .ok_or_else(|| Error::input(format!("center {x0} is not in Ω_{n}")))?;
    let ids = members.as_slice();
    let m = ids.len();
    let mut cost = vec![f64::INFINITY; m];
    let mut done = vec![false; m];
    cost[s] = 0.0;
    for _ in 0..m {
        let mut u = usize::MAX;
        for i in 0..m {
            if !done[i] && (u == usize::MAX || cost[i] < cost[u]) {
                u = i;
            }
        }
        done[u] = true;
        let (cu, xu) = (cost[u], ids[u]);
        for v in 0..m {
            if !done[v] {
                let c = cu + space.rho(xu, ids[v]).powf(alpha);
                if c < cost[v] {
                    cost[v] = c;
                }
            }
        }
    }
    let rho: Vec<f64> = ids.iter().map(|&y| space.rho(x0, y)).collect();
    snap_to_rho(choice, &mut cost, &rho);
    let mut dist = vec![f64::INFINITY; space.len()];
    let (mut c_low, mut c_high) = (f64::INFINITY, 0.0f64);
    for (i, &y) in ids.iter().enumerate() {
        let d = if i == s { 0.0 } else { cost[i].powf(1.0 / alpha) };
        dist[y] = d;
        if i != s {
            let ratio = d / space.rho(x0, y);
            c_low = c_low.min(ratio);
            c_high = c_high.max(ratio);
        }
    }
    if m == 1 {
        (c_low, c_high) = (1.0, 1.0);
    }
    Ok(AlphaRow { n, alpha, center: x0, members, dist, c_low, c_high })
}

impl OrderAlphaDistance {
    /// Row of `x₀` carrying the global equivalence constants.
    pub fn row(&self, space: &FiniteSpace, x0: PointId) -> Result<AlphaRow> {
        let i = self
            .members
            .index_of(x0)
            .ok_or_else(|| Error::input(format!("center {x0} is not in Ω_{}", self.n)))?;
        let m = self.members.len();
        let mut dist = vec![f64::INFINITY; space.len()];
        for (j, y) in self.members.iter().enumerate() {
            dist[y] = self.matrix[i * m + j];
        }
        Ok(AlphaRow {
            n: self.n,
            alpha: self.alpha,
            center: x0,
            members: self.members.clone(),
            dist,
            c_low: self.c_low,
            c_high: self.c_high,
        })
    }
}

/// `φ(x) = ψ(d(x, x₀))`; requires `B(x₀, c₂ r) ⊆ Ω_n` for the `ρ`-ball.
pub fn cutoff(space: &FiniteSpace, d: &OrderAlphaDistance, x0: PointId, r: f64) -> Result<CutoffFunction> {
    space.check_point(x0)?;
    cutoff_from_row(space, &d.row(space, x0)?, r)
}

/// Same as [`cutoff`] with `c₁, c₂` taken from the row's equivalence
/// constants.
pub fn cutoff_from_row(space: &FiniteSpace, row: &AlphaRow, r: f64) -> Result<CutoffFunction> {
    let x0 = row.center;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::input(format!("radius must be positive, got {r}")));
    }
    let c1 = 1.0 / row.c_high;
    let c2 = 2.0 / row.c_low;
    let outer = space.ball_unchecked(x0, c2 * r);
    if let Some(x) = outer.first_outside(&row.members) {
        return Err(Error::Range(format!(
            "support ball B({x0}, {}) leaves Ω_{} at point {x}",
            c2 * r,
            row.n
        )));
    }
    let values: Vec<f64> = row.dist.iter().map(|&t| if t.is_finite() { psi(t, r) } else { 0.0 }).collect();
    let support = PointSet::from_sorted((0..values.len()).filter(|&x| values[x] > 0.0).collect());
    let holder_constant = holder_seminorm_supported(space, &values, row.alpha, &support, &row.members) * r.powf(row.alpha);
    Ok(CutoffFunction { center: x0, r, c1, c2, alpha: row.alpha, values, holder_constant })
}

/// [`holder_seminorm`] over `s` for an `f` vanishing on `s` off `support`.
pub fn holder_seminorm_supported(space: &FiniteSpace, f: &[f64], eta: f64, support: &PointSet, s: &PointSet) -> f64 {
    let ids = s.as_slice();
    support
        .as_slice()
        .par_iter()
        .filter(|&&x| s.contains(x))
        .map(|&x| {
            let mut best = 0.0f64;
            for &y in ids {
                if x != y {
                    let diff = (f[x] - f[y]).abs();
                    if diff > 0.0 {
                        let r = space.rho(x, y).min(space.rho(y, x));
                        best = best.max(diff / r.powf(eta));
                    }
                }
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

/// `max_{x ≠ y ∈ s} |f(x) − f(y)| / ρ(x, y)^η`; `f` is indexed by point id.
pub fn holder_seminorm(space: &FiniteSpace, f: &[f64], eta: f64, s: &PointSet) -> f64 {
    let ids = s.as_slice();
    ids.par_iter()
        .map(|&x| {
            let mut best = 0.0f64;
            for &y in ids {
                if x != y {
                    let diff = (f[x] - f[y]).abs();
                    if diff > 0.0 {
                        best = best.max(diff / space.rho(x, y).powf(eta));
                    }
                }
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

/// Seminorm plus `max_s |f|`.
pub fn holder_norm(space: &FiniteSpace, f: &[f64], eta: f64, s: &PointSet) -> f64 {
    holder_seminorm(space, f, eta, s) + s.iter().map(|x| f[x].abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests;
