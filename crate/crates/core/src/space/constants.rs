use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{FiniteSpace, PointId, SortedRow};
use crate::{Error, PointSet, Result};

/// Engulfing radius, quasitriangle, doubling and quasisymmetry constants of
/// one level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelConstants {
    pub n: u32,
    pub eps: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "A")]
    pub a: f64,
}

/// Raw constants of one level with the points that attain them.
#[derive(Clone, Debug, Serialize)]
pub struct ConstantEstimate {
    pub constants: LevelConstants,
    /// Unfloored quasitriangle constant.
    pub b_raw: f64,
    pub b_witness: Option<(PointId, PointId, PointId)>,
    pub a_witness: Option<(PointId, PointId)>,
    pub c_witness: Option<(PointId, f64)>,
    /// Closest pair across the engulfing boundary; `None` when `Ω_{n+1} = Ω`.
    pub eps_witness: Option<(PointId, PointId)>,
}

/// Measures the constants of `Ω_n` directly from the definitions.
///
/// `ε_n` is the largest value for which every point within `2ε_n` of `Ω_n`
/// (in either argument order) lies in `Ω_{n+1}`. When `Ω_{n+1}` is the whole
/// space nothing constrains it and it is set to half the diameter, or `1/2`
/// on a one-point space.
pub fn estimate_constants(space: &FiniteSpace, n: u32) -> Result<ConstantEstimate> {
    let omega = space.omega(n);
    if omega.is_empty() {
        return Err(Error::input(format!("Ω_{n} is empty")));
    }
    let outside = space.omega(n + 1);
    let outside: Vec<PointId> = space.points().filter(|&x| !outside.contains(x)).collect();

    let (eps, eps_witness) = if outside.is_empty() {
        let diam = space.diameter(&space.points().collect());
        (if diam > 0.0 { diam / 2.0 } else { 0.5 }, None)
    } else {
        let mut best = (f64::INFINITY, (0, 0));
        for y in omega.iter() {
            for &x in &outside {
                let d = space.rho(x, y).min(space.rho(y, x));
                if d < best.0 {
                    best = (d, (x, y));
                }
            }
        }
        if !(best.0 > 0.0) {
            return Err(Error::Axiom {
                axiom: "(Hp 1)",
                detail: format!("no positive engulfing radius for Ω_{n}: rho{:?} = {}", best.1, best.0),
            });
        }
        (best.0 / 2.0, Some(best.1))
    };

    let (b_raw, b_witness) = quasitriangle(space, &omega);
    let (a, a_witness) = quasisymmetry(space, &omega);
    let (c, c_witness) = doubling(space, &omega, eps);

    Ok(ConstantEstimate {
        constants: LevelConstants { n, eps, b: b_raw.max(2.0), c, a },
        b_raw,
        b_witness,
        a_witness,
        c_witness,
        eps_witness,
    })
}

/// `max ρ(x,y) / (ρ(x,z) + ρ(z,y))` over triples in `s` with `x ≠ y`.
fn quasitriangle(space: &FiniteSpace, s: &PointSet) -> (f64, Option<(PointId, PointId, PointId)>) {
    let ids = s.as_slice();
    if matches!(space.metric(), super::Metric::Euclidean) {
        // Euclidean distance is a metric: z = x attains the ratio 1.
        return match ids {
            [x, y, ..] => (1.0, Some((*x, *y, *x))),
            _ => (0.0, None),
        };
    }
    let m = ids.len();
    let d = space.dense_matrix(s);
    let best = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut best = (0.0f64, None);
            for j in 0..m {
                if i == j {
                    continue;
                }
                let mut min_sum = f64::INFINITY;
                let mut arg = 0;
                for k in 0..m {
                    let v = d[i * m + k] + d[k * m + j];
                    if v < min_sum {
                        min_sum = v;
                        arg = k;
                    }
                }
                let ratio = d[i * m + j] / min_sum;
                if ratio > best.0 {
                    best = (ratio, Some((ids[i], ids[j], ids[arg])));
                }
            }
            best
        })
        .reduce(|| (0.0, None), |a, b| if b.0 > a.0 { b } else { a });
    best
}

fn quasisymmetry(space: &FiniteSpace, s: &PointSet) -> (f64, Option<(PointId, PointId)>) {
    if space.is_symmetric() {
        return (1.0, None);
    }
    let mut best = (1.0f64, None);
    for x in s.iter() {
        for y in s.iter() {
            if x != y {
                let r = space.rho(x, y) / space.rho(y, x);
                if r > best.0 {
                    best = (r, Some((x, y)));
                }
            }
        }
    }
    best
}

/// `max μ(B(x,2r)) / μ(B(x,r))` over `x ∈ s` and every ball family with
/// `0 < r ≤ eps`.
fn doubling(space: &FiniteSpace, s: &PointSet, eps: f64) -> (f64, Option<(PointId, f64)>) {
    s.as_slice()
        .par_iter()
        .map(|&x| {
            let row = SortedRow::new(space, x);
            let mut best = (1.0f64, None);
            for r in row.radii_up_to(eps) {
                let ratio = row.measure_below(2.0 * r) / row.measure_below(r);
                if ratio > best.0 {
                    best = (ratio, Some((x, r)));
                }
            }
            best
        })
        .reduce(|| (1.0, None), |a, b| if b.0 > a.0 { b } else { a })
}

/// Normalized constants for levels `1..=top`: `ε_n` nonincreasing, `B_n`,
/// `C_n`, `A_n` nondecreasing.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstantsTable {
    levels: Vec<LevelConstants>,
}

impl ConstantsTable {
    /// Measures every level; declared constants from the space file replace
    /// the measured ones after they are checked against them.
    pub fn estimate(space: &FiniteSpace, top: u32) -> Result<Self> {
        let mut measured = Vec::with_capacity(top as usize);
        for n in 1..=top {
            measured.push(estimate_constants(space, n)?.constants);
        }
        let measured = Self::normalize(measured);
        let table = ConstantsTable { levels: measured };
        table.check_declared(space)?;
        let mut levels = table.levels;
        for d in space.declared_constants() {
            if let Some(slot) = levels.get_mut((d.n as usize).wrapping_sub(1)) {
                *slot = *d;
            }
        }
        Ok(ConstantsTable { levels: Self::normalize(levels) })
    }

    fn normalize(raw: Vec<LevelConstants>) -> Vec<LevelConstants> {
        let mut levels: Vec<LevelConstants> = Vec::with_capacity(raw.len());
        for raw in raw {
            let next = match levels.last() {
                None => raw,
                Some(prev) => LevelConstants {
                    n: raw.n,
                    eps: raw.eps.min(prev.eps),
                    b: raw.b.max(prev.b),
                    c: raw.c.max(prev.c),
                    a: raw.a.max(prev.a),
                },
            };
            levels.push(next);
        }
        levels
    }

    /// Builds a table from given values after checking monotonicity.
    pub fn from_levels(levels: Vec<LevelConstants>) -> Result<Self> {
        for (i, l) in levels.iter().enumerate() {
            if l.n as usize != i + 1 {
                return Err(Error::input("constants must be listed for n = 1, 2, … in order"));
            }
            if !(l.eps > 0.0 && l.b >= 2.0 && l.c >= 1.0 && l.a >= 1.0) {
                return Err(Error::input(format!("constants for level {} out of range", l.n)));
            }
        }
        for w in levels.windows(2) {
            if w[1].eps > w[0].eps || w[1].b < w[0].b || w[1].c < w[0].c || w[1].a < w[0].a {
                return Err(Error::input(format!("constants for levels {} and {} are not monotone", w[0].n, w[1].n)));
            }
        }
        Ok(ConstantsTable { levels })
    }

    /// Declared constants must be valid: ε no larger than measured, the
    /// others no smaller.
    fn check_declared(&self, space: &FiniteSpace) -> Result<()> {
        for d in space.declared_constants() {
            let Some(m) = self.levels.get((d.n as usize).wrapping_sub(1)) else {
                continue;
            };
            let bad = if d.eps > m.eps {
                Some(("(Hp 1)", "eps", d.eps, m.eps))
            } else if d.b < m.b {
                Some(("(Hp 2)", "B", d.b, m.b))
            } else if d.c < m.c {
                Some(("(Hp 3)", "C", d.c, m.c))
            } else if d.a < m.a {
                Some(("(K5)", "A", d.a, m.a))
            } else {
                None
            };
            if let Some((axiom, name, declared, measured)) = bad {
                return Err(Error::Axiom {
                    axiom,
                    detail: format!("declared {name}_{} = {declared} but measured {measured}", d.n),
                });
            }
        }
        Ok(())
    }

    pub fn top(&self) -> u32 {
        self.levels.len() as u32
    }

    /// Constants of level `n`, which must lie in `1..=top`.
    pub fn get(&self, n: u32) -> Result<LevelConstants> {
        self.levels
            .get((n as usize).wrapping_sub(1))
            .copied()
            .ok_or_else(|| Error::input(format!("no constants for level {n} (table has {})", self.levels.len())))
    }

    pub fn levels(&self) -> &[LevelConstants] {
        &self.levels
    }
}
