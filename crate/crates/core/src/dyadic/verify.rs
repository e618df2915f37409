use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{scale, Cube, DeltaParams, DyadicSystem};
use crate::report::VerificationReport;
use crate::space::{FiniteSpace, PointId, SortedRow};
use crate::PointSet;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MeasuredConstants {
    /// Best constant in the two-branch lower bound for `μ(B(x,r) ∩ Q)`.
    pub c0: f64,
    /// `(k, α, x, r)` attaining `c0`.
    pub c0_witness: Option<(u32, usize, PointId, f64)>,
    /// Largest doubling constant of a cube viewed as a space.
    pub c2: f64,
    pub c2_witness: Option<(u32, usize, PointId, f64)>,
    /// `min_{z ∈ Ω_n} μ(B(z, a₀δ^k))` per scale.
    pub c_nk: Vec<f64>,
    /// Number of cubes per scale.
    pub index_counts: Vec<usize>,
}

/// Doubling constant of `s` with the inherited `ρ` and `μ`:
/// `max μ(B(x,2r) ∩ s) / μ(B(x,r) ∩ s)` over `x ∈ s`, `r > 0`.
///
/// Only the distinct positive distances inside `s` need to be tried. A
/// singleton has constant 1.
pub fn subset_doubling(space: &FiniteSpace, s: &PointSet) -> (f64, Option<(PointId, f64)>) {
    s.as_slice()
        .par_iter()
        .map(|&x| {
            let row = SortedRow::within(space, x, s);
            let mut best = (1.0f64, None);
            for r in row.radii_up_to(f64::INFINITY) {
                let ratio = row.measure_below(2.0 * r) / row.measure_below(r);
                if ratio > best.0 {
                    best = (ratio, Some((x, r)));
                }
            }
            best
        })
        .reduce(|| (1.0, None), |a, b| if b.0 > a.0 { b } else { a })
}

struct CubeConstants {
    c0: (f64, Option<(PointId, f64)>),
    c2: (f64, Option<(PointId, f64)>),
}

fn cube_constants(space: &FiniteSpace, q: &Cube, side: f64) -> CubeConstants {
    let mut c0 = (f64::INFINITY, None);
    for x in q.members.iter() {
        let full = SortedRow::new(space, x);
        let inside = SortedRow::within(space, x, &q.members);
        for r in full.radii_up_to(side) {
            let ratio = inside.measure_below(r) / full.measure_below(r);
            if ratio < c0.0 {
                c0 = (ratio, Some((x, r)));
            }
        }
        // For r > δ^k the infimum is approached as r ↓ δ^k: the closed ball.
        let closed = inside.cum[inside.count_at_most(side)] / q.measure;
        if closed < c0.0 {
            c0 = (closed, Some((x, side)));
        }
    }
    CubeConstants { c0, c2: subset_doubling(space, &q.members) }
}

pub(super) fn measure(space: &FiniteSpace, params: &DeltaParams, cubes: &[Vec<Cube>]) -> MeasuredConstants {
    let flat: Vec<&Cube> = cubes.iter().flatten().collect();
    let per: Vec<CubeConstants> = flat
        .par_iter()
        .map(|q| cube_constants(space, q, scale(params.delta, q.k)))
        .collect();
    let mut m = MeasuredConstants { c0: f64::INFINITY, c2: 1.0, ..Default::default() };
    for (q, cc) in flat.iter().zip(&per) {
        if cc.c0.0 < m.c0 {
            m.c0 = cc.c0.0;
            m.c0_witness = cc.c0.1.map(|(x, r)| (q.k, q.alpha, x, r));
        }
        if cc.c2.0 > m.c2 {
            m.c2 = cc.c2.0;
            m.c2_witness = cc.c2.1.map(|(x, r)| (q.k, q.alpha, x, r));
        }
    }
    let omega = space.omega(params.n);
    m.c_nk = (1..=params.k_max)
        .map(|k| {
            let r = params.a0 * scale(params.delta, k);
            omega
                .iter()
                .map(|z| space.measure(&space.ball_unchecked(z, r)))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    m.index_counts = cubes.iter().map(|c| c.len()).collect();
    m
}

/// Exhaustive check of nets, tree axioms, the cube definition and
/// properties (a)–(h). On a finite space the exceptional set is empty, so
/// coverage is checked for every point.
pub fn verify_properties(system: &DyadicSystem, space: &FiniteSpace) -> VerificationReport {
    let mut rep = VerificationReport::new();
    let p = &system.params;
    let n = p.n;
    let delta = p.delta;
    let omega_n = space.omega(n);
    let omega_n1 = space.omega(n + 1);

    for c in &p.constraints {
        rep.exact(
            &format!("parameters: {}", c.name),
            &format!("Main Thm: {}", c.name),
            c.holds,
            Some(json!({"lhs": c.lhs, "rhs": c.rhs, "strict": c.strict})),
        );
    }

    // Nets.
    let mut sep = None;
    let mut maxi = None;
    for layer in &system.layers {
        let r = scale(delta, layer.k);
        'pairs: for (i, &a) in layer.centers.iter().enumerate() {
            for &b in &layer.centers[i + 1..] {
                if space.rho(a, b) < r || space.rho(b, a) < r {
                    sep = Some(json!({"k": layer.k, "z": [a, b]}));
                    break 'pairs;
                }
            }
        }
        if let Some(x) = layer.layer_set.iter().find(|&x| !layer.centers.iter().any(|&z| space.rho(z, x) < r)) {
            maxi.get_or_insert(json!({"k": layer.k, "x": x}));
        }
        if let Some(z) = layer.centers.iter().find(|&&z| !layer.layer_set.contains(z)) {
            maxi.get_or_insert(json!({"k": layer.k, "center_outside_layer": z}));
        }
    }
    rep.exact("net separation", "Main Thm proof: alfa not beta", sep.is_none(), sep);
    rep.exact("net maximality", "Main Thm proof: maximal collection", maxi.is_none(), maxi);

    let mut recursion = None;
    if system.layers.first().map(|l| &l.layer_set) != Some(&omega_n) {
        recursion = Some(json!({"k": 1}));
    }
    for w in system.layers.windows(2) {
        let r = scale(delta, w[0].k);
        let mut expect = PointSet::new();
        for &z in &w[0].centers {
            expect = expect.union(&space.ball_unchecked(z, r));
        }
        if expect != w[1].layer_set && recursion.is_none() {
            recursion = Some(json!({"k": w[1].k, "diff": expect.difference(&w[1].layer_set).as_slice().first()}));
        }
    }
    rep.exact("layer recursion", "Main Thm proof: E_2", recursion.is_none(), recursion);
    let escape = system
        .layers
        .iter()
        .find_map(|l| l.layer_set.first_outside(&omega_n1).map(|x| json!({"k": l.k, "x": x})));
    rep.exact("layers inside Omega_{n+1}", "Union E_k", escape.is_none(), escape);

    // Tree.
    let shape_ok = system.tree.parent.len() == system.layers.len()
        && system.tree.parent.first().is_some_and(|v| v.is_empty())
        && system.layers.windows(2).zip(&system.tree.parent[1..]).all(|(w, links)| {
            links.len() == w[1].centers.len() && links.iter().all(|&b| b < w[0].centers.len())
        });
    let shape_witness = (!shape_ok).then(|| json!({"parent_levels": system.tree.parent.len()}));
    rep.exact("tree (T1)", "Definition tree (T1)", shape_ok, shape_witness.clone());
    rep.exact("tree (T2)", "Definition tree (T2)", shape_ok, shape_witness);
    let mut t3 = None;
    let mut t4 = None;
    if shape_ok {
        for w in system.layers.windows(2) {
            let (up, down) = (&w[0], &w[1]);
            let r = scale(delta, up.k);
            for (alpha, &z) in down.centers.iter().enumerate() {
                let beta = system.tree.parent[down.k as usize - 1][alpha];
                if !(space.rho(z, up.centers[beta]) < r) {
                    t3.get_or_insert(json!({"k": down.k, "alpha": alpha, "parent": beta}));
                }
                for (b, &y) in up.centers.iter().enumerate() {
                    if space.rho(z, y) < r / (2.0 * p.b_n()) && b != beta {
                        t4.get_or_insert(json!({"k": down.k, "alpha": alpha, "forced": b, "parent": beta}));
                    }
                }
            }
        }
    }
    rep.exact("tree (T3)", "Definition tree (T3)", shape_ok && t3.is_none(), t3.or(Some(json!("bad shape"))));
    rep.exact("tree (T4)", "Definition tree (T4)", shape_ok && t4.is_none(), t4.or(Some(json!("bad shape"))));
    if !shape_ok {
        return rep;
    }

    // Cube definition, recomputed top-down over explicit descendants.
    let kmax = system.layers.len();
    let mut def = None;
    for (ki, level) in system.cubes.iter().enumerate() {
        for q in level {
            let mut expect = PointSet::new();
            let mut frontier = vec![q.alpha];
            for l in ki..kmax {
                let r = p.a0 * scale(delta, l as u32 + 1);
                for &b in &frontier {
                    expect = expect.union(&space.ball_unchecked(system.layers[l].centers[b], r));
                }
                if l + 1 < kmax {
                    frontier = system.tree.parent[l + 1]
                        .iter()
                        .enumerate()
                        .filter(|(_, b)| frontier.contains(b))
                        .map(|(g, _)| g)
                        .collect();
                }
            }
            if expect != q.members {
                def.get_or_insert(json!({"k": q.k, "alpha": q.alpha}));
            }
        }
    }
    rep.exact("cube definition", "Def dyadic", def.is_none(), def);

    let mut a = None;
    let mut b = None;
    let mut d = None;
    for q in system.cubes.iter().flatten() {
        let side = scale(delta, q.k);
        let ball = space.ball_unchecked(q.center, p.a0 * side);
        if let Some(x) = ball.first_outside(&q.members) {
            a.get_or_insert(json!({"k": q.k, "alpha": q.alpha, "x": x}));
        }
        if let Some(x) = q.members.first_outside(&omega_n1) {
            b.get_or_insert(json!({"k": q.k, "alpha": q.alpha, "x": x}));
        }
        let bound = p.c1 * side;
        let diam = space.diameter(&q.members);
        let far = q.members.iter().find(|&y| !(space.rho(q.center, y) < bound));
        if !(diam < bound) || far.is_some() || diam != q.measured_diam {
            d.get_or_insert(json!({"k": q.k, "alpha": q.alpha, "diam": diam, "bound": bound, "x": far}));
        }
    }
    rep.exact("(a) contains ball", "Main Thm (a)", a.is_none(), a);
    rep.exact("(b) inside Omega_{n+1}", "Main Thm (b)", b.is_none(), b);
    rep.exact("(d) diameter", "Main Thm (d)", d.is_none(), d)
        .with("c1", p.c1);

    // Owner maps give same-scale disjointness; (e) then reduces to every
    // finer cube having a single owner (or none) at each coarser scale.
    let mut owners: Vec<Vec<Option<usize>>> = Vec::with_capacity(kmax);
    let mut disjoint = None;
    for level in &system.cubes {
        let mut own = vec![None; space.len()];
        for q in level {
            for x in q.members.iter() {
                if let Some(prev) = own[x] {
                    disjoint.get_or_insert(json!({"k": q.k, "alpha": [prev, q.alpha], "x": x}));
                }
                own[x] = Some(q.alpha);
            }
        }
        owners.push(own);
    }
    rep.exact("same-scale disjoint", "Main Thm proof: disjoint", disjoint.is_none(), disjoint);

    let mut nested = None;
    let mut ancestor = None;
    for (li, level) in system.cubes.iter().enumerate() {
        for q in level {
            for ki in 0..=li {
                let first = owners[ki][q.members.as_slice()[0]];
                let uniform = q.members.iter().all(|x| owners[ki][x] == first);
                let touches = q.members.iter().any(|x| owners[ki][x].is_some());
                if touches && !uniform {
                    nested.get_or_insert(json!({"l": q.k, "beta": q.alpha, "k": ki + 1}));
                }
                if first.is_none() || !uniform {
                    ancestor.get_or_insert(json!({"k": q.k, "alpha": q.alpha, "l": ki + 1}));
                }
            }
        }
    }
    let mut mono = None;
    for li in 1..kmax {
        for (alpha, &beta) in system.tree.parent[li].iter().enumerate() {
            if !system.cubes[li][alpha].members.is_subset(&system.cubes[li - 1][beta].members) {
                mono.get_or_insert(json!({"k": li + 1, "alpha": alpha, "parent": beta}));
            }
        }
    }
    rep.exact("(c) ancestors", "Main Thm (c)", ancestor.is_none(), ancestor);
    rep.exact("(e) nested or disjoint", "Main Thm (e)", nested.is_none(), nested);
    rep.exact("monotone", "Main Thm proof: monotone", mono.is_none(), mono);

    let mut f = None;
    let mut g = None;
    for (ki, own) in owners.iter().enumerate() {
        if let Some(x) = omega_n.iter().find(|&x| own[x].is_none()) {
            f.get_or_insert(json!({"k": ki + 1, "x": x}));
        }
        for x in space.points().filter(|&x| own[x].is_some()) {
            if let Some(j) = owners.iter().position(|o| o[x].is_none()) {
                g.get_or_insert(json!({"k": ki + 1, "x": x, "j": j + 1}));
            }
        }
    }
    rep.exact("(f) coverage", "Main Thm (f)", f.is_none(), f);
    rep.exact("(g) every scale", "Main Thm (g)", g.is_none(), g);

    let m = &system.measured;
    let h_ok = m.c0 > 0.0 && m.c2.is_finite();
    rep.exact("(h) c0 and c2", "Main Thm (h), lower bounds cubes", h_ok, Some(json!({"c0": m.c0, "c2": m.c2})))
        .with("c0", m.c0)
        .with("c2", m.c2);
    let pos = m.c_nk.iter().all(|&c| c > 0.0);
    let rec = rep.exact("positive measure of small balls", "Lemma pos meas", pos, Some(json!({"c_nk": m.c_nk})));
    for (k, c) in m.c_nk.iter().enumerate() {
        rec.with(&format!("c_n{}", k + 1), *c);
    }
    let rec = rep.measured("finite index sets", "Prop: the family is finite", &[]);
    for (k, c) in m.index_counts.iter().enumerate() {
        rec.with(&format!("I_{}", k + 1), *c as f64);
    }
    rep
}
