//! Finite quasi-metric measure spaces with an exhaustion `Ω_1 ⊆ Ω_2 ⊆ …`.
//!
//! A point belongs to `Ω_n` iff its level is at most `n`. Balls are open:
//! `B(x, r) = { y : ρ(x, y) < r }` with exact float comparison.

mod constants;
mod file;
mod generate;
mod rows;

pub use constants::{estimate_constants, ConstantEstimate, ConstantsTable, LevelConstants};
pub use file::{MetricFile, PointRecord, SpaceFile};
pub use generate::{generate, Generator};
pub use rows::SortedRow;

use crate::{Error, PointSet, Result};

pub type PointId = usize;

/// Largest point count accepted for an explicit distance matrix.
pub const MATRIX_CAP: usize = 4096;

/// How `ρ(x, y)` is evaluated.
#[derive(Clone, Debug, PartialEq)]
pub enum Metric {
    /// Row-major `N × N` matrix.
    Matrix(Vec<f64>),
    Euclidean,
    /// Korányi gauge of `q⁻¹ ∘ p` on coordinates `(x, y, t)`.
    Heisenberg,
    /// `max(|x − x'|, |t − t'|^{1/2})`; the last coordinate is time.
    Parabolic,
    /// `|x − y|` when `x ≤ y`, `skew · |x − y|` otherwise.
    Asymmetric { skew: f64 },
    /// `ρ(x, y) + ρ(y, x)` for the wrapped rule.
    Symmetrized(Box<Metric>),
}

impl Metric {
    fn name(&self) -> &'static str {
        match self {
            Metric::Matrix(_) => "matrix",
            Metric::Euclidean => "euclidean",
            Metric::Heisenberg => "heisenberg",
            Metric::Parabolic => "parabolic",
            Metric::Asymmetric { .. } => "asymmetric",
            Metric::Symmetrized(_) => "symmetrized",
        }
    }

    fn eval(&self, n: usize, coords: &[Vec<f64>], x: PointId, y: PointId) -> f64 {
        match self {
            Metric::Matrix(m) => m[x * n + y],
            Metric::Euclidean => {
                let (p, q) = (&coords[x], &coords[y]);
                p.iter()
                    .zip(q)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            }
            Metric::Heisenberg => {
                let (p, q) = (&coords[x], &coords[y]);
                let gx = p[0] - q[0];
                let gy = p[1] - q[1];
                let gt = p[2] - q[2] + 2.0 * (q[0] * p[1] - p[0] * q[1]);
                let s = gx * gx + gy * gy;
                (s * s + gt * gt).sqrt().sqrt()
            }
            Metric::Parabolic => {
                let (p, q) = (&coords[x], &coords[y]);
                let d = p.len() - 1;
                let space = p[..d]
                    .iter()
                    .zip(&q[..d])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                space.max((p[d] - q[d]).abs().sqrt())
            }
            Metric::Asymmetric { skew } => {
                let (a, b) = (coords[x][0], coords[y][0]);
                if a <= b {
                    b - a
                } else {
                    skew * (a - b)
                }
            }
            Metric::Symmetrized(inner) => inner.eval(n, coords, x, y) + inner.eval(n, coords, y, x),
        }
    }

    fn known_symmetric(&self) -> Option<bool> {
        match self {
            Metric::Matrix(_) => None,
            Metric::Asymmetric { skew } => Some(*skew == 1.0),
            _ => Some(true),
        }
    }

    fn skew(&self) -> Option<f64> {
        match self {
            Metric::Asymmetric { skew } => Some(*skew),
            Metric::Symmetrized(inner) => inner.skew(),
            _ => None,
        }
    }

    fn coord_dim_ok(&self, d: usize) -> bool {
        match self {
            Metric::Matrix(_) => true,
            Metric::Euclidean => d >= 1,
            Metric::Heisenberg => d == 3,
            Metric::Parabolic => d >= 2,
            Metric::Asymmetric { .. } => d == 1,
            Metric::Symmetrized(inner) => inner.coord_dim_ok(d),
        }
    }
}

/// A finite locally homogeneous space. Immutable after construction.
#[derive(Clone, Debug)]
pub struct FiniteSpace {
    metric: Metric,
    coords: Vec<Vec<f64>>,
    weights: Vec<f64>,
    levels: Vec<u32>,
    symmetric: bool,
    declared: Vec<LevelConstants>,
}

impl FiniteSpace {
    /// Validates sizes, weights, levels and `ρ(x, y) = 0 ⇔ x = y`.
    pub fn new(metric: Metric, coords: Vec<Vec<f64>>, weights: Vec<f64>, levels: Vec<u32>) -> Result<Self> {
        let n = weights.len();
        if n == 0 {
            return Err(Error::input("space has no points"));
        }
        if levels.len() != n {
            return Err(Error::input(format!("{} weights but {} levels", n, levels.len())));
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::input(format!("weight of point {i} must be positive and finite")));
        }
        if let Some(i) = levels.iter().position(|&l| l == 0) {
            return Err(Error::input(format!("level of point {i} must be at least 1")));
        }
        let symmetric = match &metric {
            Metric::Matrix(m) => {
                if n > MATRIX_CAP {
                    return Err(Error::SizeCap { what: "distance matrix", size: n, cap: MATRIX_CAP });
                }
                if m.len() != n * n {
                    return Err(Error::input(format!("matrix has {} entries, expected {}", m.len(), n * n)));
                }
                check_matrix(m, n)?
            }
            other => {
                if coords.len() != n {
                    return Err(Error::input(format!("{} coordinate rows for {} points", coords.len(), n)));
                }
                let d = coords[0].len();
                if !other.coord_dim_ok(d) || coords.iter().any(|c| c.len() != d) {
                    return Err(Error::input(format!("bad coordinate dimension for {} metric", other.name())));
                }
                if coords.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(Error::input("coordinates must be finite"));
                }
                if let Some(skew) = other.skew() {
                    if !(skew.is_finite() && skew >= 1.0) {
                        return Err(Error::input(format!("skew must be at least 1, got {skew}")));
                    }
                }
                check_distinct_coords(&coords)?;
                other.known_symmetric().unwrap_or(true)
            }
        };
        Ok(FiniteSpace { metric, coords, weights, levels, symmetric, declared: Vec::new() })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn points(&self) -> std::ops::Range<PointId> {
        0..self.len()
    }

    /// `ρ(x, y)`; ids must be valid.
    #[inline]
    pub fn rho(&self, x: PointId, y: PointId) -> f64 {
        self.metric.eval(self.len(), &self.coords, x, y)
    }

    pub fn try_rho(&self, x: PointId, y: PointId) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        Ok(self.rho(x, y))
    }

    pub fn check_point(&self, x: PointId) -> Result<()> {
        if x < self.len() {
            Ok(())
        } else {
            Err(Error::UnknownPoint(x))
        }
    }

    pub fn weight(&self, x: PointId) -> f64 {
        self.weights[x]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn level(&self, x: PointId) -> u32 {
        self.levels[x]
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    pub fn max_level(&self) -> u32 {
        self.levels.iter().copied().max().unwrap_or(1)
    }

    pub fn coords(&self, x: PointId) -> Option<&[f64]> {
        self.coords.get(x).map(|c| c.as_slice())
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn declared_constants(&self) -> &[LevelConstants] {
        &self.declared
    }

    pub fn with_declared_constants(mut self, c: Vec<LevelConstants>) -> Self {
        self.declared = c;
        self
    }

    pub fn in_omega(&self, x: PointId, n: u32) -> bool {
        self.levels[x] <= n
    }

    /// `Ω_n`.
    pub fn omega(&self, n: u32) -> PointSet {
        PointSet::from_sorted(self.points().filter(|&x| self.levels[x] <= n).collect())
    }

    pub fn measure(&self, s: &PointSet) -> f64 {
        s.iter().map(|x| self.weights[x]).sum()
    }

    pub fn total_measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `{ y : ρ(x, y) < r }`.
    pub fn ball(&self, x: PointId, r: f64) -> Result<PointSet> {
        self.check_point(x)?;
        check_radius(r)?;
        Ok(self.ball_unchecked(x, r))
    }

    /// `{ y : ρ(y, x) < r }`.
    pub fn coball(&self, x: PointId, r: f64) -> Result<PointSet> {
        self.check_point(x)?;
        check_radius(r)?;
        Ok(PointSet::from_sorted(self.points().filter(|&y| self.rho(y, x) < r).collect()))
    }

    pub(crate) fn ball_unchecked(&self, x: PointId, r: f64) -> PointSet {
        PointSet::from_sorted(self.points().filter(|&y| self.rho(x, y) < r).collect())
    }

    /// `{ y ∈ s : ρ(x, y) < r }`.
    pub fn ball_within(&self, x: PointId, r: f64, s: &PointSet) -> PointSet {
        PointSet::from_sorted(s.iter().filter(|&y| self.rho(x, y) < r).collect())
    }

    /// Largest `ρ(x, y)` over ordered pairs in `s`.
    pub fn diameter(&self, s: &PointSet) -> f64 {
        let mut d = 0.0f64;
        for x in s.iter() {
            for y in s.iter() {
                d = d.max(self.rho(x, y));
            }
        }
        d
    }

    /// Smallest positive `ρ(x, y)` over ordered pairs in `s`, if `|s| ≥ 2`.
    pub fn min_distance(&self, s: &PointSet) -> Option<f64> {
        let mut d = f64::INFINITY;
        for x in s.iter() {
            for y in s.iter() {
                if x != y {
                    d = d.min(self.rho(x, y));
                }
            }
        }
        d.is_finite().then_some(d)
    }

    /// `ρ*(x, y) = ρ(x, y) + ρ(y, x)` with identical weights and levels.
    pub fn symmetrize(&self) -> FiniteSpace {
        let n = self.len();
        let metric = match &self.metric {
            Metric::Matrix(m) => {
                let mut s = vec![0.0; n * n];
                for x in 0..n {
                    for y in 0..n {
                        s[x * n + y] = m[x * n + y] + m[y * n + x];
                    }
                }
                Metric::Matrix(s)
            }
            other => Metric::Symmetrized(Box::new(other.clone())),
        };
        FiniteSpace {
            metric,
            coords: self.coords.clone(),
            weights: self.weights.clone(),
            levels: self.levels.clone(),
            symmetric: true,
            declared: Vec::new(),
        }
    }

    /// Dense `ρ` restricted to `s`, row-major in the order of `s`.
    pub(crate) fn dense_matrix(&self, s: &PointSet) -> Vec<f64> {
        let ids = s.as_slice();
        let mut m = vec![0.0; ids.len() * ids.len()];
        for (i, &x) in ids.iter().enumerate() {
            for (j, &y) in ids.iter().enumerate() {
                m[i * ids.len() + j] = self.rho(x, y);
            }
        }
        m
    }

    /// Checks `ρ(x, y) = ρ(y, x)` exhaustively; returns a violating pair.
    pub fn symmetry_violation(&self) -> Option<(PointId, PointId)> {
        for x in self.points() {
            for y in 0..x {
                if self.rho(x, y) != self.rho(y, x) {
                    return Some((x, y));
                }
            }
        }
        None
    }

    /// Checks `ρ(x, y) = 0 ⇔ x = y` exhaustively.
    pub fn check_separation(&self) -> Result<()> {
        for x in self.points() {
            for y in self.points() {
                let d = self.rho(x, y);
                if (x == y) != (d == 0.0) || !(d >= 0.0) {
                    return Err(h1a(x, y, d));
                }
            }
        }
        Ok(())
    }
}

fn h1a(x: PointId, y: PointId, d: f64) -> Error {
    Error::Axiom {
        axiom: "(H1)(a)",
        detail: format!("rho({x},{y}) = {d}"),
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && !r.is_nan() {
        Ok(())
    } else {
        Err(Error::input(format!("radius must be positive, got {r}")))
    }
}

/// Returns whether the matrix is exactly symmetric.
fn check_matrix(m: &[f64], n: usize) -> Result<bool> {
    let mut symmetric = true;
    for x in 0..n {
        for y in 0..n {
            let d = m[x * n + y];
            if !d.is_finite() || d < 0.0 {
                return Err(Error::input(format!("matrix entry ({x},{y}) = {d} is not a finite nonnegative number")));
            }
            if (x == y) != (d == 0.0) {
                return Err(h1a(x, y, d));
            }
            symmetric &= d == m[y * n + x];
        }
    }
    Ok(symmetric)
}

/// The closed-form rules vanish exactly on equal coordinates.
fn check_distinct_coords(coords: &[Vec<f64>]) -> Result<()> {
    let mut idx: Vec<usize> = (0..coords.len()).collect();
    idx.sort_by(|&a, &b| {
        coords[a]
            .iter()
            .zip(&coords[b])
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    for w in idx.windows(2) {
        if coords[w[0]] == coords[w[1]] {
            let (x, y) = (w[0].min(w[1]), w[0].max(w[1]));
            return Err(h1a(x, y, 0.0));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests;
