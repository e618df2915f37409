use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{scale, subset_doubling, DyadicSystem};
use crate::report::{within_factor, VerificationReport};
use crate::space::{FiniteSpace, PointId};
use crate::{Error, PointSet, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeMeasured {
    pub doubling: f64,
    pub doubling_witness: Option<(PointId, f64)>,
    /// `diam(F) / R`.
    pub diam_ratio: f64,
    /// `μ(F) / μ(B(x̄, R))`.
    pub measure_ratio: f64,
    /// `max_{y ∈ F} ρ(x̄, y) / R`.
    pub dilation: f64,
}

/// A union of level-`(n+1)` cubes around `B(x̄, R)` that is a space of
/// homogeneous type with constants independent of `R`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub n: u32,
    pub center: PointId,
    pub radius: f64,
    /// Scale with `δ^{k+1} < R ≤ δ^k`.
    pub k: u32,
    pub k0: u32,
    /// Largest admissible radius `δ^{k₀}`.
    pub r_n: f64,
    /// `h_n = B_{n+1}(1 + c₁)`.
    pub h_n: f64,
    /// Level-`n` cube at scale `k` containing `x̄`.
    pub anchor_cube: usize,
    pub anchor_center: PointId,
    pub f: PointSet,
    /// Indices of the level-`(n+1)` scale-`k` cubes forming `F`.
    pub source_cubes: Vec<usize>,
    pub measured: EnvelopeMeasured,
}

/// `h_n`, `k₀` and `R_n` for a level-`n` system.
pub fn envelope_radius(sys_n: &DyadicSystem) -> (f64, u32, f64) {
    let p = &sys_n.params;
    let h = p.constants[1].b * (1.0 + p.c1);
    let two_eps = 2.0 * p.constants[0].eps;
    let mut k0 = 1;
    while !(h * scale(p.delta, k0) <= two_eps && scale(p.delta, k0) <= two_eps) {
        k0 += 1;
    }
    (h, k0, scale(p.delta, k0))
}

pub fn build_envelope(
    space: &FiniteSpace,
    sys_n: &DyadicSystem,
    sys_next: &DyadicSystem,
    center: PointId,
    radius: f64,
) -> Result<Envelope> {
    let n = sys_n.n();
    space.check_point(center)?;
    if sys_next.n() != n + 1 {
        return Err(Error::input(format!("second system must be for level {}, got {}", n + 1, sys_next.n())));
    }
    if !space.in_omega(center, n) {
        return Err(Error::input(format!("center {center} is not in Ω_{n}")));
    }
    if !(radius > 0.0) {
        return Err(Error::input(format!("radius must be positive, got {radius}")));
    }
    let delta = sys_n.params.delta;
    if sys_next.params.delta > delta {
        return Err(Error::config(
            "delta nonincreasing in n",
            format!("delta_{} = {} > delta_{n} = {delta}", n + 1, sys_next.params.delta),
        ));
    }
    let (h_n, k0, r_n) = envelope_radius(sys_n);
    if radius > r_n {
        return Err(Error::Range(format!("R = {radius} exceeds R_{n} = {r_n} (k0 = {k0})")));
    }
    let mut k = k0;
    while scale(delta, k + 1) >= radius {
        k += 1;
    }
    let anchor_cube = sys_n
        .locate(k, center)
        .ok_or_else(|| Error::Construction(format!("no level-{n} cube of scale {k} contains {center}")))?;
    let anchor_center = sys_n.cube(k, anchor_cube).expect("located cube").center;
    let reach = space.ball_unchecked(anchor_center, h_n * scale(delta, k));
    let mut f = PointSet::new();
    let mut source_cubes = Vec::new();
    for q in sys_next.cubes_at(k) {
        if !q.members.is_disjoint(&reach) {
            f = f.union(&q.members);
            source_cubes.push(q.alpha);
        }
    }
    let (doubling, doubling_witness) = subset_doubling(space, &f);
    let ball = space.ball_unchecked(center, radius);
    let dilation = f.iter().map(|y| space.rho(center, y)).fold(0.0, f64::max) / radius;
    let measured = EnvelopeMeasured {
        doubling,
        doubling_witness,
        diam_ratio: space.diameter(&f) / radius,
        measure_ratio: space.measure(&f) / space.measure(&ball),
        dilation,
    };
    Ok(Envelope {
        n,
        center,
        radius,
        k,
        k0,
        r_n,
        h_n,
        anchor_cube,
        anchor_center,
        f,
        source_cubes,
        measured,
    })
}

/// Inclusions (ii)–(iii) exactly and the measured constants of (i), (iv), (v).
pub fn verify_envelope(env: &Envelope, space: &FiniteSpace) -> VerificationReport {
    let mut rep = VerificationReport::new();
    let ball = space.ball_unchecked(env.center, env.radius);
    let top = space.omega(env.n + 2);
    let missing = ball.first_outside(&env.f);
    let escape = env.f.first_outside(&top);
    rep.exact(
        "envelope (ii) ball in F in Omega_{n+2}",
        "Thm F (ii)",
        missing.is_none() && escape.is_none(),
        Some(json!({"ball_point_missing": missing, "point_outside_Omega_n2": escape})),
    );
    // Finite sets are closed.
    rep.exact("envelope (iii) ball in closure of F", "Thm F (iii)", missing.is_none(), Some(json!({"x": missing})));
    let m = &env.measured;
    rep.exact(
        "envelope (i) doubling",
        "Thm F (i)",
        m.doubling.is_finite(),
        Some(json!({"doubling": m.doubling})),
    )
    .with("doubling", m.doubling);
    rep.measured("envelope (iv) diameter", "Thm F (iv)", &[("diam_over_R", m.diam_ratio)]);
    rep.measured("envelope (v) measure", "Thm F (v)", &[("mu_F_over_mu_ball", m.measure_ratio)]);
    rep.measured("envelope dilation j_n", "Thm F proof: j_n", &[("j_n", m.dilation)]);
    rep
}

/// Checks that each measured envelope constant varies by at most `factor`
/// across the given envelopes (typically one center, several radii).
pub fn envelope_stability(envs: &[Envelope], factor: f64) -> VerificationReport {
    let mut rep = VerificationReport::new();
    let series: [(&str, &str, fn(&EnvelopeMeasured) -> f64); 3] = [
        ("envelope doubling stable in R", "Thm F (i)", |m| m.doubling),
        ("envelope diameter ratio stable in R", "Thm F (iv)", |m| m.diam_ratio),
        ("envelope measure ratio stable in R", "Thm F (v)", |m| m.measure_ratio),
    ];
    for (name, anchor, get) in series {
        let values: Vec<f64> = envs.iter().map(|e| get(&e.measured)).collect();
        let radii: Vec<f64> = envs.iter().map(|e| e.radius).collect();
        let ok = within_factor(&values, factor);
        let max = values.iter().copied().fold(0.0, f64::max);
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        rep.exact(name, anchor, ok, Some(json!({"radii": radii, "values": values})))
            .with("max", max)
            .with("min", min);
    }
    rep
}
