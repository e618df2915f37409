//! Local maximal operator and Vitali selection.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::operators::{check_len, lp_norm};
use crate::report::within_factor;
use crate::space::{ConstantsTable, FiniteSpace, PointId, SortedRow};
use crate::{Error, PointSet, Result};

/// `r_n = 2ε_n / (2B_n + 3B_n²)`.
pub fn maximal_radius(table: &ConstantsTable, n: u32) -> Result<f64> {
    let c = table.get(n)?;
    Ok(2.0 * c.eps / (2.0 * c.b + 3.0 * c.b * c.b))
}

/// Dilation `K = 2B_n + 3B_n²` of the covering lemma.
pub fn vitali_dilation(table: &ConstantsTable, n: u32) -> Result<f64> {
    let b = table.get(n)?.b;
    Ok(2.0 * b + 3.0 * b * b)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaximalFunction {
    pub n: u32,
    pub r_n: f64,
    /// `Mf(x)` for `x ∈ Ω_n`, zero elsewhere; indexed by point id.
    pub values: Vec<f64>,
    /// Radius attaining `Mf(x)`, indexed like `values`.
    pub argmax: Vec<f64>,
}

/// `Mf(x) = max_{r ≤ r_n} (1/μ(B(x,r))) Σ_{B(x,r)} |f| μ` for `x ∈ Ω_n`.
pub fn local_maximal(space: &FiniteSpace, table: &ConstantsTable, n: u32, f: &[f64]) -> Result<MaximalFunction> {
    check_len(space, f)?;
    let r_n = maximal_radius(table, n)?;
    let omega = space.omega(n);
    let per_point: Vec<(PointId, f64, f64)> = omega
        .as_slice()
        .par_iter()
        .map(|&x| {
            let row = SortedRow::new(space, x);
            let mut best = (0.0f64, r_n);
            let mut k = 0;
            let mut sum = 0.0;
            for r in row.radii_up_to(r_n) {
                let upto = row.count_below(r);
                while k < upto {
                    sum += f[row.ids[k]].abs() * space.weight(row.ids[k]);
                    k += 1;
                }
                let avg = sum / row.cum[k];
                if avg > best.0 {
                    best = (avg, r);
                }
            }
            (x, best.0, best.1)
        })
        .collect();
    let mut values = vec![0.0; space.len()];
    let mut argmax = vec![0.0; space.len()];
    for (x, v, r) in per_point {
        values[x] = v;
        argmax[x] = r;
    }
    Ok(MaximalFunction { n, r_n, values, argmax })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyBall {
    pub center: PointId,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VitaliReport {
    /// Indices into the family, in selection order.
    pub selected: Vec<usize>,
    #[serde(rename = "K")]
    pub k: f64,
    pub disjoint: bool,
    pub covered: bool,
    /// A point of the union outside every dilated kept ball.
    pub witness: Option<PointId>,
    pub selected_measure: f64,
    pub union_measure: f64,
    /// `selected_measure / union_measure`.
    pub c: f64,
}

/// Greedy selection by decreasing radius, ties by lowest center id: a ball is
/// kept when it misses every kept ball.
pub fn vitali_select(space: &FiniteSpace, table: &ConstantsTable, n: u32, family: &[FamilyBall]) -> Result<VitaliReport> {
    let r_n = maximal_radius(table, n)?;
    for b in family {
        space.check_point(b.center)?;
        if !space.in_omega(b.center, n) {
            return Err(Error::input(format!("ball center {} is not in Ω_{n}", b.center)));
        }
        if !(b.radius > 0.0 && b.radius <= r_n) {
            return Err(Error::input(format!("radius {} must lie in (0, r_{n} = {r_n}]", b.radius)));
        }
    }
    let k = vitali_dilation(table, n)?;
    let balls: Vec<PointSet> = family.iter().map(|b| space.ball(b.center, b.radius)).collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..family.len()).collect();
    order.sort_by(|&i, &j| {
        family[j]
            .radius
            .total_cmp(&family[i].radius)
            .then(family[i].center.cmp(&family[j].center))
            .then(i.cmp(&j))
    });
    let mut selected = Vec::new();
    let mut taken = PointSet::new();
    for i in order {
        if balls[i].is_disjoint(&taken) {
            taken = taken.union(&balls[i]);
            selected.push(i);
        }
    }
    let disjoint = selected
        .iter()
        .enumerate()
        .all(|(a, &i)| selected[a + 1..].iter().all(|&j| balls[i].is_disjoint(&balls[j])));
    let union = balls.iter().fold(PointSet::new(), |acc, b| acc.union(b));
    let mut dilated = PointSet::new();
    for &i in &selected {
        dilated = dilated.union(&space.ball(family[i].center, k * family[i].radius)?);
    }
    let witness = union.first_outside(&dilated);
    let selected_measure: f64 = selected.iter().map(|&i| space.measure(&balls[i])).sum();
    let union_measure = space.measure(&union);
    Ok(VitaliReport {
        selected,
        k,
        disjoint,
        covered: witness.is_none(),
        witness,
        selected_measure,
        union_measure,
        c: if union_measure > 0.0 { selected_measure / union_measure } else { 1.0 },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaximalChecks {
    /// `Mf` finite everywhere on `Ω_n` for every battery function.
    pub finite: bool,
    /// `max_{f,t} t μ{x ∈ Ω_n : Mf > t} / ‖f‖_{L¹(Ω_{n+1})}` over the t grid.
    pub weak_constant: f64,
    /// Per function, the same ratio maximized over all `t > 0`.
    pub weak_per_function: Vec<f64>,
    pub weak_stable: bool,
    /// `(p, max_f ‖Mf‖_{L^p(Ω_n)} / ‖f‖_{L^p(Ω_{n+1})})`.
    pub lp_ratios: Vec<(f64, f64)>,
}

pub fn maximal_checks(
    space: &FiniteSpace,
    table: &ConstantsTable,
    n: u32,
    battery: &[Vec<f64>],
    ps: &[f64],
    t_grid: &[f64],
) -> Result<MaximalChecks> {
    if battery.is_empty() {
        return Err(Error::input("battery must be nonempty"));
    }
    if t_grid.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::input("t grid must be positive"));
    }
    let inner = space.omega(n);
    let outer = space.omega(n + 1);
    let w_in: Vec<f64> = inner.iter().map(|x| space.weight(x)).collect();
    let w_out: Vec<f64> = outer.iter().map(|x| space.weight(x)).collect();
    let mut finite = true;
    let mut weak_constant = 0.0f64;
    let mut weak_per_function = Vec::new();
    let mut lp = vec![0.0f64; ps.len()];
    for f in battery {
        let mf = local_maximal(space, table, n, f)?;
        let m_in: Vec<f64> = inner.iter().map(|x| mf.values[x]).collect();
        let f_out: Vec<f64> = outer.iter().map(|x| f[x]).collect();
        finite &= m_in.iter().all(|v| v.is_finite());
        let l1 = lp_norm(&f_out, &w_out, 1.0);
        if l1 > 0.0 {
            for &t in t_grid {
                let level: f64 = m_in.iter().zip(&w_in).filter(|(v, _)| **v > t).map(|(_, w)| w).sum();
                weak_constant = weak_constant.max(t * level / l1);
            }
            weak_per_function.push(sup_weak(&m_in, &w_in) / l1);
        }
        for (i, &p) in ps.iter().enumerate() {
            let den = lp_norm(&f_out, &w_out, p);
            if den > 0.0 {
                lp[i] = lp[i].max(lp_norm(&m_in, &w_in, p) / den);
            }
        }
    }
    let weak_stable = within_factor(&weak_per_function, 4.0);
    Ok(MaximalChecks { finite, weak_constant, weak_stable, weak_per_function, lp_ratios: ps.iter().copied().zip(lp).collect() })
}

/// `sup_t t μ{v > t}`, approached as `t` increases to a value of `v`.
fn sup_weak(v: &[f64], w: &[f64]) -> f64 {
    let mut pairs: Vec<(f64, f64)> = v.iter().copied().zip(w.iter().copied()).collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (mut best, mut mass, mut i) = (0.0f64, 0.0, 0);
    while i < pairs.len() {
        let t = pairs[i].0;
        while i < pairs.len() && pairs[i].0 == t {
            mass += pairs[i].1;
            i += 1;
        }
        best = best.max(t * mass);
    }
    best
}

#[cfg(test)]
mod tests;
