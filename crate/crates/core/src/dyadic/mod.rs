//! Local dyadic cubes for one level `n` of the exhaustion.
//!
//! Nets `{z_α^k}` are greedy maximal `δ^k`-separated subsets of the layer sets
//! `E_k` (with `E_1 = Ω_n`, `E_{k+1} = ⋃_α B(z_α^k, δ^k)`), the tree links each
//! center to its nearest center one scale up, and the cube `Q_α^k` is the
//! union of `B(z_β^l, a₀δ^l)` over all descendants `(l, β)` of `(k, α)`.

mod envelope;
mod verify;

pub use envelope::{build_envelope, envelope_radius, envelope_stability, verify_envelope, Envelope, EnvelopeMeasured};
pub use verify::{subset_doubling, verify_properties, MeasuredConstants};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::space::{ConstantsTable, FiniteSpace, LevelConstants, PointId};
use crate::{Error, PointSet, Result};

/// `δ^k`, computed the same way everywhere so comparisons are reproducible.
#[inline]
pub fn scale(delta: f64, k: u32) -> f64 {
    delta.powi(k as i32)
}

/// One inequality of the parameter system, evaluated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub strict: bool,
    pub holds: bool,
}

impl Constraint {
    fn lt(name: &str, lhs: f64, rhs: f64) -> Self {
        Constraint { name: name.into(), lhs, rhs, strict: true, holds: lhs < rhs }
    }

    fn le(name: &str, lhs: f64, rhs: f64) -> Self {
        Constraint { name: name.into(), lhs, rhs, strict: false, holds: lhs <= rhs }
    }
}

/// Every inequality the construction needs from `δ` and `a₀`, given the
/// constants of levels `n`, `n+1`, `n+2`.
pub fn delta_constraints(delta: f64, a0: f64, c: &[LevelConstants; 3]) -> Vec<Constraint> {
    let [cn, cn1, cn2] = *c;
    let c1 = c1_constant(cn1.b);
    vec![
        Constraint::lt("delta 1", delta, 2.0 * cn.eps),
        Constraint::lt("delta 2", delta * delta, 2.0 * cn1.eps),
        Constraint::le("delta 3", cn2.b * (delta * delta + delta), 2.0 * cn.eps),
        Constraint::lt("delta 4", delta, cn.eps / cn2.b),
        Constraint::lt("delta 5", delta, 1.0 / (2.0 * cn2.b)),
        Constraint::lt("delta 5'", delta, 1.0 / (2.0 * cn.b)),
        Constraint::lt("delta 6", delta * (2.0 * cn2.b * cn2.b + a0 * cn2.b), 2.0 * cn.eps),
        Constraint::lt("delta 8", c1 * delta, 1.0),
        Constraint::le("delta 9", 2.0 * cn1.b * c1 * delta, 1.0),
        Constraint::le("delta 10", (2.0 * cn1.b + 1.0) * a0 * delta, 2.0 * cn.eps),
        Constraint::lt("azero 1", a0 * delta, cn1.eps),
        Constraint::lt("azero 2", delta + a0, (2.0 * cn1.b).powi(-3)),
    ]
}

/// `c₁ = 7 B_{n+1}⁴`.
pub fn c1_constant(b_next: f64) -> f64 {
    7.0 * b_next.powi(4)
}

/// `δ = ½ min(ε_{n+1}, ε_n / (4 B_{n+2}²), 1 / (14 B_{n+1}⁵))`.
pub fn remark_delta(c: &[LevelConstants; 3]) -> f64 {
    let [cn, cn1, cn2] = *c;
    0.5 * cn1.eps.min(cn.eps / (4.0 * cn2.b * cn2.b)).min(1.0 / (14.0 * cn1.b.powi(5)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaParams {
    pub n: u32,
    pub delta: f64,
    pub a0: f64,
    pub k_max: u32,
    pub c1: f64,
    /// Constants of levels `n`, `n+1`, `n+2`.
    pub constants: [LevelConstants; 3],
    pub constraints: Vec<Constraint>,
}

impl DeltaParams {
    pub fn b_n(&self) -> f64 {
        self.constants[0].b
    }
}

fn three_levels(table: &ConstantsTable, n: u32) -> Result<[LevelConstants; 3]> {
    Ok([table.get(n)?, table.get(n + 1)?, table.get(n + 2)?])
}

/// Parameters from the closed-form choice of `δ`, re-validated.
///
/// `min_distance` is the smallest positive distance in `Ω_{n+1}` (`None` on a
/// single point); `K_max` is the first `K` with `δ^K` below it.
pub fn choose_delta(table: &ConstantsTable, n: u32, min_distance: Option<f64>) -> Result<DeltaParams> {
    let c = three_levels(table, n)?;
    params_for(remark_delta(&c), c, n, min_distance)
}

/// Parameters for a caller-supplied `δ`, validated against the same system.
pub fn with_delta(table: &ConstantsTable, n: u32, delta: f64, min_distance: Option<f64>) -> Result<DeltaParams> {
    params_for(delta, three_levels(table, n)?, n, min_distance)
}

fn params_for(delta: f64, constants: [LevelConstants; 3], n: u32, min_distance: Option<f64>) -> Result<DeltaParams> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::config("delta in (0,1)", format!("delta = {delta}")));
    }
    let a0 = delta;
    let constraints = delta_constraints(delta, a0, &constants);
    if let Some(bad) = constraints.iter().find(|c| !c.holds) {
        return Err(Error::config(
            bad.name.clone(),
            format!("{} {} {} is false for delta = {delta}", bad.lhs, if bad.strict { "<" } else { "<=" }, bad.rhs),
        ));
    }
    let mut k_max = 1;
    if let Some(md) = min_distance {
        while scale(delta, k_max) >= md {
            k_max += 1;
        }
    }
    Ok(DeltaParams { n, delta, a0, k_max, c1: c1_constant(constants[1].b), constants, constraints })
}

/// Greedy maximal `r`-net of `e`, sweeping in ascending id.
pub fn maximal_net(space: &FiniteSpace, e: &PointSet, r: f64) -> Vec<PointId> {
    maximal_net_in_order(space, e, r, e.iter())
}

/// Greedy maximal `r`-net of `e`, sweeping `order` (points outside `e` are
/// skipped). A point is kept iff it is at distance `≥ r` from every kept one.
pub fn maximal_net_in_order(
    space: &FiniteSpace,
    e: &PointSet,
    r: f64,
    order: impl IntoIterator<Item = PointId>,
) -> Vec<PointId> {
    let mut centers: Vec<PointId> = Vec::new();
    for p in order {
        if e.contains(p) && centers.iter().all(|&z| space.rho(z, p) >= r && space.rho(p, z) >= r) {
            centers.push(p);
        }
    }
    centers
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetLayer {
    pub k: u32,
    pub centers: Vec<PointId>,
    pub layer_set: PointSet,
}

fn union_of_balls(space: &FiniteSpace, centers: &[PointId], r: f64) -> PointSet {
    let mut mask = vec![false; space.len()];
    for &z in centers {
        for y in space.points() {
            if !mask[y] && space.rho(z, y) < r {
                mask[y] = true;
            }
        }
    }
    PointSet::from_sorted(space.points().filter(|&y| mask[y]).collect())
}

/// Net layers for `k = 1..=K_max`; every `E_k` (and `E_{K_max+1}`) must stay
/// inside `Ω_{n+1}`.
pub fn build_layers(space: &FiniteSpace, params: &DeltaParams, order: Option<&[PointId]>) -> Result<Vec<NetLayer>> {
    let n = params.n;
    let next = space.omega(n + 1);
    let mut e = space.omega(n);
    if e.is_empty() {
        return Err(Error::input(format!("Ω_{n} is empty")));
    }
    let mut layers = Vec::with_capacity(params.k_max as usize);
    for k in 1..=params.k_max + 1 {
        if let Some(x) = e.first_outside(&next) {
            return Err(Error::Construction(format!(
                "E_{k} contains point {x} outside Ω_{}; re-examine delta 1 to delta 4",
                n + 1
            )));
        }
        if k > params.k_max {
            break;
        }
        let r = scale(params.delta, k);
        let centers = match order {
            Some(o) => maximal_net_in_order(space, &e, r, o.iter().copied()),
            None => maximal_net(space, &e, r),
        };
        let following = union_of_balls(space, &centers, r);
        layers.push(NetLayer { k, centers, layer_set: e });
        e = following;
    }
    Ok(layers)
}

/// `parent[k-1][α]` is the index in layer `k−1` of the parent of `(k, α)`;
/// `parent[0]` is empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub parent: Vec<Vec<usize>>,
}

impl Tree {
    pub fn parent(&self, k: u32, alpha: usize) -> Option<usize> {
        if k < 2 {
            return None;
        }
        self.parent.get(k as usize - 1)?.get(alpha).copied()
    }

    /// Children of `(k, α)` at scale `k+1`.
    pub fn children(&self, k: u32, alpha: usize) -> Vec<usize> {
        match self.parent.get(k as usize) {
            Some(p) => p.iter().enumerate().filter(|(_, &b)| b == alpha).map(|(g, _)| g).collect(),
            None => Vec::new(),
        }
    }
}

/// Links each center to the nearest center one scale up (ties by lowest
/// id), then checks that it lies within `δ^{k−1}` and that the only center
/// closer than `δ^{k−1} / (2B_n)`, if any, is the parent.
pub fn build_tree(space: &FiniteSpace, layers: &[NetLayer], b_n: f64, delta: f64) -> Result<Tree> {
    let mut parent = vec![Vec::new()];
    for w in layers.windows(2) {
        let (up, down) = (&w[0], &w[1]);
        let r = scale(delta, up.k);
        let forced_radius = r / (2.0 * b_n);
        let mut links = Vec::with_capacity(down.centers.len());
        for (alpha, &z) in down.centers.iter().enumerate() {
            let mut best: Option<(f64, PointId, usize)> = None;
            let mut forced = Vec::new();
            for (beta, &y) in up.centers.iter().enumerate() {
                let d = space.rho(z, y);
                if best.is_none_or(|(bd, by, _)| d < bd || (d == bd && y < by)) {
                    best = Some((d, y, beta));
                }
                if d < forced_radius {
                    forced.push(beta);
                }
            }
            let (d, _, beta) = best.ok_or_else(|| Error::Construction(format!("scale {} has no centers", up.k)))?;
            if !(d < r) {
                return Err(Error::Construction(format!(
                    "no admissible parent for center {z} at scale {}: nearest is at {d} >= delta^{} = {r}",
                    down.k, up.k
                )));
            }
            if forced.len() > 1 || (forced.len() == 1 && forced[0] != beta) {
                return Err(Error::Construction(format!(
                    "(T4) fails at scale {} center {z} (alpha {alpha}): forced candidates {forced:?}, parent {beta}",
                    down.k
                )));
            }
            links.push(beta);
        }
        parent.push(links);
    }
    Ok(Tree { parent })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cube {
    pub k: u32,
    pub alpha: usize,
    pub center: PointId,
    pub members: PointSet,
    pub measured_diam: f64,
    pub measure: f64,
}

/// Cubes for every scale, built bottom-up as unions of the children's
/// cubes with the center's own ball.
pub fn build_cubes(space: &FiniteSpace, layers: &[NetLayer], tree: &Tree, params: &DeltaParams) -> Vec<Vec<Cube>> {
    let kmax = layers.len();
    let mut sets: Vec<Vec<PointSet>> = vec![Vec::new(); kmax];
    for ki in (0..kmax).rev() {
        let layer = &layers[ki];
        let r = params.a0 * scale(params.delta, layer.k);
        let mut own: Vec<PointSet> = layer.centers.iter().map(|&z| space.ball_unchecked(z, r)).collect();
        if ki + 1 < kmax {
            for (gamma, &beta) in tree.parent[ki + 1].iter().enumerate() {
                own[beta] = own[beta].union(&sets[ki + 1][gamma]);
            }
        }
        sets[ki] = own;
    }
    sets.into_iter()
        .zip(layers)
        .map(|(level, layer)| {
            level
                .into_iter()
                .enumerate()
                .map(|(alpha, members)| Cube {
                    k: layer.k,
                    alpha,
                    center: layer.centers[alpha],
                    measured_diam: space.diameter(&members),
                    measure: space.measure(&members),
                    members,
                })
                .collect()
        })
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BuildOptions {
    /// Overrides the closed-form `δ`; still validated.
    pub delta: Option<f64>,
    /// Sweeps the nets in a seeded random id order instead of ascending.
    pub order_seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadicSystem {
    pub params: DeltaParams,
    pub layers: Vec<NetLayer>,
    pub tree: Tree,
    pub cubes: Vec<Vec<Cube>>,
    pub measured: MeasuredConstants,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order_seed: Option<u64>,
}

impl DyadicSystem {
    /// Builds the system for level `n`; `table` must reach level `n + 2`.
    pub fn build(space: &FiniteSpace, table: &ConstantsTable, n: u32, opts: &BuildOptions) -> Result<Self> {
        if !space.is_symmetric() {
            return Err(Error::input("dyadic cubes need a symmetric quasidistance; symmetrize the space first"));
        }
        let md = space.min_distance(&space.omega(n + 1));
        let params = match opts.delta {
            Some(d) => with_delta(table, n, d, md)?,
            None => choose_delta(table, n, md)?,
        };
        let order = opts.order_seed.map(|seed| {
            let mut o: Vec<PointId> = space.points().collect();
            o.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            o
        });
        let layers = build_layers(space, &params, order.as_deref())?;
        let tree = build_tree(space, &layers, params.b_n(), params.delta)?;
        let cubes = build_cubes(space, &layers, &tree, &params);
        let measured = verify::measure(space, &params, &cubes);
        Ok(DyadicSystem { params, layers, tree, cubes, measured, order_seed: opts.order_seed })
    }

    /// Convenience: estimates constants up to `n + 2` and builds.
    pub fn for_space(space: &FiniteSpace, n: u32, opts: &BuildOptions) -> Result<Self> {
        let table = ConstantsTable::estimate(space, n + 2)?;
        Self::build(space, &table, n, opts)
    }

    pub fn n(&self) -> u32 {
        self.params.n
    }

    pub fn k_max(&self) -> u32 {
        self.params.k_max
    }

    /// Cubes of scale `k ≥ 1`; scales past `K_max` repeat the finest family,
    /// which consists of singletons.
    pub fn cubes_at(&self, k: u32) -> &[Cube] {
        let k = k.clamp(1, self.k_max());
        &self.cubes[k as usize - 1]
    }

    pub fn cube(&self, k: u32, alpha: usize) -> Option<&Cube> {
        self.cubes_at(k).get(alpha)
    }

    /// Index of the scale-`k` cube containing `x`.
    pub fn locate(&self, k: u32, x: PointId) -> Option<usize> {
        self.cubes_at(k).iter().position(|q| q.members.contains(x))
    }

    pub fn layer(&self, k: u32) -> Option<&NetLayer> {
        self.layers.get((k as usize).wrapping_sub(1))
    }
}
