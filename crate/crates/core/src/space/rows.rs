use super::{FiniteSpace, PointId};
use crate::PointSet;

/// The points of a domain sorted by `ρ(x, ·)`, with prefix sums of weight.
///
/// `B(x, r) ∩ domain` is the prefix of entries with distance `< r`.
#[derive(Clone, Debug)]
pub struct SortedRow {
    pub center: PointId,
    pub ids: Vec<PointId>,
    pub dist: Vec<f64>,
    /// `cum[i]` is the weight of the first `i` entries.
    pub cum: Vec<f64>,
}

impl SortedRow {
    /// Row over the whole space.
    pub fn new(space: &FiniteSpace, x: PointId) -> Self {
        Self::build(space, x, space.points())
    }

    /// Row over `domain` only.
    pub fn within(space: &FiniteSpace, x: PointId, domain: &PointSet) -> Self {
        Self::build(space, x, domain.iter())
    }

    fn build(space: &FiniteSpace, x: PointId, domain: impl Iterator<Item = PointId>) -> Self {
        let mut pairs: Vec<(f64, PointId)> = domain.map(|y| (space.rho(x, y), y)).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut cum = Vec::with_capacity(pairs.len() + 1);
        cum.push(0.0);
        let mut acc = 0.0;
        for &(_, y) in &pairs {
            acc += space.weight(y);
            cum.push(acc);
        }
        SortedRow {
            center: x,
            ids: pairs.iter().map(|p| p.1).collect(),
            dist: pairs.iter().map(|p| p.0).collect(),
            cum,
        }
    }

    /// Number of entries with distance `< r`.
    pub fn count_below(&self, r: f64) -> usize {
        self.dist.partition_point(|&d| d < r)
    }

    /// Number of entries with distance `≤ r`.
    pub fn count_at_most(&self, r: f64) -> usize {
        self.dist.partition_point(|&d| d <= r)
    }

    /// `μ(B(x, r) ∩ domain)`.
    pub fn measure_below(&self, r: f64) -> f64 {
        self.cum[self.count_below(r)]
    }

    /// Distinct positive distances `≤ cap`, ascending, followed by `cap`
    /// itself when it is finite and not already present.
    ///
    /// Every ball family `{B(x, r) : 0 < r ≤ cap}` is represented: the
    /// sets are constant on `(d_i, d_{i+1}]`, so right endpoints suffice.
    pub fn radii_up_to(&self, cap: f64) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for &d in &self.dist {
            if d > 0.0 && d <= cap && out.last() != Some(&d) {
                out.push(d);
            }
        }
        if cap.is_finite() && cap > 0.0 && out.last() != Some(&cap) {
            out.push(cap);
        }
        out
    }
}
