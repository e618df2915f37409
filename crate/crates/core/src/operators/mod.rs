//! Kernels, their localization `K̃ = a K b`, and the finite truncated and
//! fractional integrals they define.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{cutoff_from_row, order_alpha_row, AlphaChoice, CutoffFunction};
use crate::space::{ConstantsTable, FiniteSpace, PointId, SortedRow};
use crate::{Error, PointSet, Result};

mod estimates;
mod norm;

pub use estimates::{
    check_cancellation, check_standard_estimates, convergence_check, h_tilde, h_tilde_seminorm, localization_transfer,
    CancellationReport, ConvergenceReport, StandardEstimates, TransferReport,
};
pub use norm::{
    estimate_operator_norm, exact_p2_norm, holder_ratio, lp_norm, weak11_check, weak11_exact, NormEstimate, PowerIteration,
    WeakReport,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    /// Explicit `N × N` values.
    Matrix,
    /// `μ(B(x, ρ(x,y)))^{ν−1}`.
    RieszModel,
    /// `s(x,y) μ(B(x, ρ(x,y)))^{ν−1}` with `s` the sign of the first nonzero
    /// coordinate of `y − x` (of `y − x` as ids on matrix spaces).
    AntisymmetricModel,
}

/// A kernel rule with its declared constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    #[serde(rename = "type")]
    pub kind: KernelKind,
    #[serde(default)]
    pub nu: f64,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    /// Alternative quasidistance for truncation; `ρ` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_prime: Option<Vec<Vec<f64>>>,
}

impl KernelSpec {
    fn plain(kind: KernelKind, nu: f64) -> Self {
        KernelSpec { kind, nu, a: None, b: None, beta: None, m: None, matrix: None, rho_prime: None }
    }

    pub fn riesz(nu: f64) -> Self {
        Self::plain(KernelKind::RieszModel, nu)
    }

    pub fn antisymmetric(nu: f64) -> Self {
        Self::plain(KernelKind::AntisymmetricModel, nu)
    }

    pub fn from_matrix(rows: Vec<Vec<f64>>, nu: f64) -> Self {
        KernelSpec { matrix: Some(rows), ..Self::plain(KernelKind::Matrix, nu) }
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn validate(&self, space: &FiniteSpace) -> Result<()> {
        if !(0.0..1.0).contains(&self.nu) {
            return Err(Error::input(format!("nu must lie in [0,1), got {}", self.nu)));
        }
        let n = space.len();
        let square = |rows: &Vec<Vec<f64>>, what: &str| -> Result<()> {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(Error::input(format!("{what} must be {n}×{n}")));
            }
            if rows.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::input(format!("{what} has a non-finite entry")));
            }
            Ok(())
        };
        match (&self.kind, &self.matrix) {
            (KernelKind::Matrix, Some(rows)) => square(rows, "kernel matrix")?,
            (KernelKind::Matrix, None) => return Err(Error::input("matrix kernel needs `matrix`")),
            (_, Some(_)) => return Err(Error::input("`matrix` is only allowed for matrix kernels")),
            _ => {}
        }
        if let Some(rows) = &self.rho_prime {
            square(rows, "rho_prime")?;
        }
        for (name, v) in [("A", self.a), ("B", self.b), ("beta", self.beta), ("M", self.m)] {
            if matches!(v, Some(v) if !(v > 0.0 && v.is_finite())) {
                return Err(Error::input(format!("{name} must be positive")));
            }
        }
        Ok(())
    }

    pub fn truncation(&self) -> RhoPrime {
        match &self.rho_prime {
            Some(rows) => RhoPrime::Matrix(rows.concat()),
            None => RhoPrime::Rho,
        }
    }
}

/// Quasidistance used in truncations and shells.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum RhoPrime {
    #[default]
    Rho,
    /// Row-major `N × N`.
    Matrix(Vec<f64>),
}

impl RhoPrime {
    #[inline]
    pub fn eval(&self, space: &FiniteSpace, x: PointId, y: PointId) -> f64 {
        match self {
            RhoPrime::Rho => space.rho(x, y),
            RhoPrime::Matrix(m) => m[x * space.len() + y],
        }
    }

    /// `(min, max)` of `ρ′/ρ` over distinct pairs of `s`; a config error
    /// unless both lie in `(0, ∞)`.
    pub fn equivalence(&self, space: &FiniteSpace, s: &PointSet) -> Result<(f64, f64)> {
        if let RhoPrime::Matrix(m) = self {
            if m.len() != space.len() * space.len() {
                return Err(Error::input("rho_prime has the wrong size"));
            }
        }
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for x in s.iter() {
            for y in s.iter() {
                if x != y {
                    let r = self.eval(space, x, y) / space.rho(x, y);
                    lo = lo.min(r);
                    hi = hi.max(r);
                }
            }
        }
        if s.len() < 2 {
            return Ok((1.0, 1.0));
        }
        if !(lo > 0.0 && hi.is_finite()) {
            return Err(Error::config(
                "rho_prime equivalence",
                format!("rho_prime / rho ranges over [{lo}, {hi}]"),
            ));
        }
        Ok((lo, hi))
    }
}

/// Sign of the first nonzero coordinate of `y − x`, or of `y − x` as ids.
pub fn sign(space: &FiniteSpace, x: PointId, y: PointId) -> f64 {
    match (space.coords(x), space.coords(y)) {
        (Some(p), Some(q)) => p
            .iter()
            .zip(q)
            .map(|(a, b)| b - a)
            .find(|d| *d != 0.0)
            .map_or(0.0, f64::signum),
        _ => (y as f64 - x as f64).signum(),
    }
}

/// Kernel values on `points × points`, zero on the diagonal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelMatrix {
    pub points: PointSet,
    pub entries: Vec<f64>,
}

impl KernelMatrix {
    pub fn assemble(space: &FiniteSpace, spec: &KernelSpec, points: &PointSet) -> Result<Self> {
        spec.validate(space)?;
        for x in points.iter() {
            space.check_point(x)?;
        }
        let ids = points.as_slice();
        let m = ids.len();
        let mut entries = vec![0.0; m * m];
        entries.par_chunks_mut(m.max(1)).enumerate().for_each(|(i, out)| {
            let x = ids[i];
            let row = match spec.kind {
                KernelKind::Matrix => None,
                _ => Some(SortedRow::new(space, x)),
            };
            for (j, &y) in ids.iter().enumerate() {
                if x == y {
                    continue;
                }
                out[j] = match spec.kind {
                    KernelKind::Matrix => spec.matrix.as_ref().map_or(0.0, |rows| rows[x][y]),
                    KernelKind::RieszModel | KernelKind::AntisymmetricModel => {
                        let mu = row.as_ref().map_or(1.0, |r| r.measure_below(space.rho(x, y)));
                        let v = mu.powf(spec.nu - 1.0);
                        if spec.kind == KernelKind::AntisymmetricModel {
                            sign(space, x, y) * v
                        } else {
                            v
                        }
                    }
                };
            }
        });
        Ok(KernelMatrix { points: points.clone(), entries })
    }

    pub fn get(&self, x: PointId, y: PointId) -> Option<f64> {
        let (i, j) = (self.points.index_of(x)?, self.points.index_of(y)?);
        Some(self.entries[i * self.points.len() + j])
    }

    /// The kernel extended by zero off `points`.
    pub fn get_or_zero(&self, x: PointId, y: PointId) -> f64 {
        self.get(x, y).unwrap_or(0.0)
    }

    pub fn operator(&self, space: &FiniteSpace) -> OperatorMatrix {
        OperatorMatrix {
            points: self.points.clone(),
            weights: self.points.iter().map(|x| space.weight(x)).collect(),
            entries: self.entries.clone(),
        }
    }
}

/// `(Tf)(x) = Σ_y entries(x,y) f(y) μ(y)` over `points`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorMatrix {
    pub points: PointSet,
    pub weights: Vec<f64>,
    pub entries: Vec<f64>,
}

impl OperatorMatrix {
    pub fn dim(&self) -> usize {
        self.points.len()
    }

    /// `f` and the result are indexed by position in `points`.
    pub fn apply_local(&self, f: &[f64]) -> Vec<f64> {
        let m = self.dim();
        let g: Vec<f64> = f.iter().zip(&self.weights).map(|(f, w)| f * w).collect();
        (0..m)
            .into_par_iter()
            .map(|i| self.entries[i * m..(i + 1) * m].iter().zip(&g).map(|(k, g)| k * g).sum())
            .collect()
    }

    /// `f` and the result are indexed by point id; zero off `points`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let local: Vec<f64> = self.points.iter().map(|y| f[y]).collect();
        let mut out = vec![0.0; f.len()];
        for (x, v) in self.points.iter().zip(self.apply_local(&local)) {
            out[x] = v;
        }
        out
    }

    /// Restriction of `f` to `points`.
    pub fn restrict(&self, f: &[f64]) -> Vec<f64> {
        self.points.iter().map(|y| f[y]).collect()
    }

    /// Entries with `ρ′(x,y) ≤ eps` set to zero.
    pub fn truncated(&self, space: &FiniteSpace, rho_prime: &RhoPrime, eps: f64) -> OperatorMatrix {
        let ids = self.points.as_slice();
        let m = ids.len();
        let mut entries = self.entries.clone();
        for i in 0..m {
            for j in 0..m {
                if !(rho_prime.eval(space, ids[i], ids[j]) > eps) {
                    entries[i * m + j] = 0.0;
                }
            }
        }
        OperatorMatrix { points: self.points.clone(), weights: self.weights.clone(), entries }
    }

    pub fn scaled(&self, factor: f64) -> OperatorMatrix {
        OperatorMatrix {
            points: self.points.clone(),
            weights: self.weights.clone(),
            entries: self.entries.iter().map(|v| v * factor).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LocalizeOptions {
    /// Defaults to `4 B_{n+1}`.
    pub c: Option<f64>,
    /// Defaults to `c R`.
    pub r0: Option<f64>,
    pub alpha: AlphaChoice,
}

/// `K̃(x,y) = a(x) K(x,y) b(y)` for `a = b`, a cutoff around `x̄` supported in
/// `B(x̄, 0.9 R)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LocalizedKernel {
    pub n: u32,
    pub center: PointId,
    pub radius: f64,
    pub r0: f64,
    pub c: f64,
    pub b_next: f64,
    pub base: KernelSpec,
    pub a: CutoffFunction,
    pub b: CutoffFunction,
    /// `K̃` on `support(a) ∪ support(b)`.
    pub kernel: KernelMatrix,
}

pub fn localize(
    space: &FiniteSpace,
    table: &ConstantsTable,
    n: u32,
    base: &KernelSpec,
    center: PointId,
    radius: f64,
    opts: &LocalizeOptions,
) -> Result<LocalizedKernel> {
    space.check_point(center)?;
    base.validate(space)?;
    let cn = table.get(n)?;
    let b_next = table.get(n + 1)?.b;
    if !space.in_omega(center, n) {
        return Err(Error::input(format!("center {center} is not in Ω_{n}")));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::input(format!("radius must be positive, got {radius}")));
    }
    let c = opts.c.unwrap_or(4.0 * b_next);
    if !(c > 2.0 * b_next) {
        return Err(Error::Range(format!("c = {c} must exceed 2B_{} = {}", n + 1, 2.0 * b_next)));
    }
    let r0 = opts.r0.unwrap_or(c * radius);
    if !(r0 < 2.0 * cn.eps) {
        return Err(Error::Range(format!(
            "R0 = {r0} must be below 2eps_{n} = {}; with c = {c} the radius must stay below {}",
            2.0 * cn.eps,
            2.0 * cn.eps / c
        )));
    }
    if c * radius > r0 {
        return Err(Error::Range(format!(
            "cR = {} exceeds R0 = {r0}; R must be at most R0/c = {} (c > 2B_{} = {} required)",
            c * radius,
            r0 / c,
            n + 1,
            2.0 * b_next
        )));
    }
    if let Some(m) = base.m {
        if m < 2.0 * b_next {
            return Err(Error::config("(standard 2) M", format!("M = {m} is below 2B_{} = {}", n + 1, 2.0 * b_next)));
        }
    }
    let row = order_alpha_row(space, n + 1, b_next, opts.alpha, center)?;
    let a = cutoff_from_row(space, &row, 0.45 * row.c_low * radius)?;
    let b = a.clone();
    let domain = a.support().union(&b.support());
    let mut kernel = KernelMatrix::assemble(space, base, &domain)?;
    let m = domain.len();
    for (i, x) in domain.iter().enumerate() {
        for (j, y) in domain.iter().enumerate() {
            kernel.entries[i * m + j] *= a.values[x] * b.values[y];
        }
    }
    Ok(LocalizedKernel { n, center, radius, r0, c, b_next, base: base.clone(), a, b, kernel })
}

impl LocalizedKernel {
    pub fn eval(&self, x: PointId, y: PointId) -> f64 {
        self.kernel.get_or_zero(x, y)
    }

    pub fn operator(&self, space: &FiniteSpace) -> OperatorMatrix {
        self.kernel.operator(space)
    }

    pub fn domain(&self) -> &PointSet {
        &self.kernel.points
    }
}

/// `(T_ε f)(x) = Σ_{ρ′(x,y) > ε} K̃(x,y) f(y) μ(y)`, indexed by point id.
pub fn apply_truncated(
    space: &FiniteSpace,
    loc: &LocalizedKernel,
    rho_prime: &RhoPrime,
    f: &[f64],
    eps: f64,
) -> Result<Vec<f64>> {
    if !(eps > 0.0) {
        return Err(Error::input(format!("truncation must be positive, got {eps}")));
    }
    check_len(space, f)?;
    Ok(loc.operator(space).truncated(space, rho_prime, eps).apply(f))
}

/// The untruncated sum, which is the `ε → 0` limit on a finite space.
pub fn apply_singular(space: &FiniteSpace, loc: &LocalizedKernel, f: &[f64]) -> Result<Vec<f64>> {
    check_len(space, f)?;
    Ok(loc.operator(space).apply(f))
}

/// `I_ν f(x) = Σ_{y ∈ B(x̄,R)} K̃(x,y) f(y) μ(y)` for a nonnegative kernel.
pub fn apply_fractional(space: &FiniteSpace, loc: &LocalizedKernel, f: &[f64]) -> Result<Vec<f64>> {
    check_len(space, f)?;
    if !(loc.base.nu > 0.0 && loc.base.nu < 1.0) {
        return Err(Error::input(format!("fractional integral needs nu in (0,1), got {}", loc.base.nu)));
    }
    check_nonnegative(&loc.kernel)?;
    let ball = space.ball(loc.center, loc.radius)?;
    let mut g = f.to_vec();
    for (y, v) in g.iter_mut().enumerate() {
        if !ball.contains(y) {
            *v = 0.0;
        }
    }
    Ok(loc.operator(space).apply(&g))
}

pub(crate) fn check_nonnegative(k: &KernelMatrix) -> Result<()> {
    if let Some(pos) = k.entries.iter().position(|v| *v < 0.0) {
        let m = k.points.len();
        let (x, y) = (k.points.as_slice()[pos / m], k.points.as_slice()[pos % m]);
        return Err(Error::input(format!("kernel is negative at ({x}, {y}): {}", k.entries[pos])));
    }
    Ok(())
}

pub(crate) fn check_len(space: &FiniteSpace, f: &[f64]) -> Result<()> {
    if f.len() != space.len() {
        return Err(Error::input(format!("function has {} values for {} points", f.len(), space.len())));
    }
    Ok(())
}

#[cfg(test)]
mod tests;
