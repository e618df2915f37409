//! Acceptance battery on generated spaces.
//!
//! Each criterion returns a [`VerificationReport`] of named checks plus the
//! wall time of its pieces. Reports are deterministic for a fixed seed;
//! timings are kept outside the report.

use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::analysis::{cutoff, holder_seminorm, order_alpha_distance, AlphaChoice};
use crate::bmo::{
    bridge_stability, commutator_apply, commutator_matrix, positive_commutator_apply, verify_bmo_bridge,
    vmo_smallness_experiment, VmoSetup,
};
use crate::dyadic::{
    build_envelope, envelope_radius, envelope_stability, maximal_net, verify_envelope, verify_properties, BuildOptions,
    DyadicSystem,
};
use crate::maximal::{local_maximal, maximal_checks, maximal_radius, vitali_select, FamilyBall};
use crate::operators::{
    apply_singular, estimate_operator_norm, exact_p2_norm, localize, weak11_check, weak11_exact, KernelMatrix,
    KernelSpec, LocalizeOptions,
};
use crate::report::{within_factor, VerificationReport};
use crate::space::{generate, ConstantsTable, Generator, Metric};
use crate::{FiniteSpace, PointId, PointSet, Result};

pub const CRITERIA: [&str; 11] = [
    "dyadic structure exactness",
    "tree axioms",
    "envelope stability",
    "order-alpha distance",
    "cutoff",
    "operator suite",
    "fractional Lp-Lq",
    "commutators",
    "maximal operator",
    "quasisymmetric transfer",
    "oracle equivalence",
];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SuiteOptions {
    /// Smaller probe spaces for the operator criteria.
    pub quick: bool,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Budget {
    PerItem(Duration),
    Total(Duration),
}

#[derive(Clone, Debug)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: &'static str,
    pub report: VerificationReport,
    pub summary: String,
    pub elapsed: Duration,
    /// Wall time of each timed piece, e.g. one space.
    pub timings: Vec<(String, Duration)>,
    pub budget: Option<Budget>,
}

impl CriterionOutcome {
    pub fn checks_passed(&self) -> bool {
        self.report.passed()
    }

    pub fn runtime_ok(&self) -> bool {
        match self.budget {
            None => true,
            Some(Budget::Total(b)) => self.elapsed <= b,
            Some(Budget::PerItem(b)) => self.timings.iter().all(|(_, t)| *t <= b),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks_passed() && self.runtime_ok()
    }

    /// One line: `criterion N (title): PASS|FAIL [time] summary`.
    pub fn line(&self) -> String {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        let mut extra = String::new();
        if !self.checks_passed() {
            let names: Vec<&str> = self.report.failures().map(|c| c.name.as_str()).take(3).collect();
            extra = format!("; failing: {}", names.join(", "));
        }
        if !self.runtime_ok() {
            extra.push_str(&format!("; over time budget {:?}", self.budget));
        }
        format!(
            "criterion {:>2} ({}): {status} [{:.1}s] {}{extra}",
            self.id,
            self.title,
            self.elapsed.as_secs_f64(),
            self.summary
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Flavor {
    Plain,
    /// Every space replaced by a symmetrized asymmetric line.
    Symmetrized,
}

const SKEW: f64 = 3.0;

struct Run {
    opts: SuiteOptions,
    flavor: Flavor,
    rep: VerificationReport,
    timings: Vec<(String, Duration)>,
    summary: Vec<String>,
}

impl Run {
    fn new(opts: SuiteOptions, flavor: Flavor) -> Self {
        Run { opts, flavor, rep: VerificationReport::new(), timings: Vec::new(), summary: Vec::new() }
    }

    fn rng(&self, tag: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed);
        rng.set_stream(tag);
        rng
    }

    fn absorb(&mut self, label: &str, other: VerificationReport) {
        for mut c in other.checks {
            c.name = format!("{label}: {}", c.name);
            self.rep.checks.push(c);
        }
    }

    fn exact(&mut self, name: String, anchor: &str, ok: bool, witness: serde_json::Value) {
        self.rep.exact(&name, anchor, ok, Some(witness));
    }

    fn measured(&mut self, name: String, anchor: &str, values: &[(&str, f64)]) {
        self.rep.measured(&name, anchor, values);
    }

    fn note(&mut self, s: String) {
        self.summary.push(s);
    }

    fn timed<T>(&mut self, label: &str, f: impl FnOnce(&mut Self) -> T) -> T {
        let t0 = Instant::now();
        let out = f(self);
        self.timings.push((label.to_string(), t0.elapsed()));
        out
    }

    /// Runs `f`, turning an error into a failing check.
    fn guard(&mut self, label: &str, f: impl FnOnce(&mut Self) -> Result<()>) {
        if let Err(e) = f(self) {
            let msg = e.to_string();
            self.rep.exact(&format!("{label}: completed"), "construction", false, Some(json!(msg)));
        }
    }

    fn line(&self, side: usize, levels: u32, spacing: f64) -> Result<(String, FiniteSpace)> {
        match self.flavor {
            Flavor::Plain => Ok((
                format!("line N={side} L={levels}"),
                generate(&Generator::EuclideanGrid { dim: 1, side, levels, spacing })?,
            )),
            Flavor::Symmetrized => Ok((
                format!("symmetrized line N={side} L={levels}"),
                generate(&Generator::AsymmetricGrid { side, skew: SKEW, levels, spacing })?.symmetrize(),
            )),
        }
    }

    /// A 2D grid, or a symmetrized line of `line_side` points.
    fn square(&self, side: usize, levels: u32, line_side: usize) -> Result<(String, FiniteSpace)> {
        match self.flavor {
            Flavor::Plain => Ok((
                format!("grid {side}x{side} L={levels}"),
                generate(&Generator::EuclideanGrid { dim: 2, side, levels, spacing: 1.0 })?,
            )),
            Flavor::Symmetrized => self.line(line_side, levels, 1.0),
        }
    }

    /// Spacing under which the symmetrized line has the geometry of a
    /// Euclidean line with spacing `h`.
    fn matched_spacing(&self, h: f64) -> f64 {
        match self.flavor {
            Flavor::Plain => h,
            Flavor::Symmetrized => h / (1.0 + SKEW),
        }
    }

    fn finish(self, id: u8, elapsed: Duration, budget: Option<Budget>) -> CriterionOutcome {
        CriterionOutcome {
            id,
            title: CRITERIA[id as usize - 1],
            report: self.rep,
            summary: self.summary.join(", "),
            elapsed,
            timings: self.timings,
            budget,
        }
    }
}

struct DyadicCase {
    label: String,
    space: FiniteSpace,
    delta: Option<f64>,
}

fn dyadic_cases(run: &Run) -> Result<Vec<DyadicCase>> {
    let mut out = Vec::new();
    let (label, space) = run.line(20, 3, 1.0)?;
    out.push(DyadicCase { label, space, delta: None });
    let (label, space) = run.square(15, 3, 225)?;
    out.push(DyadicCase { label, space, delta: None });
    let asym = generate(&Generator::AsymmetricGrid { side: 20, skew: SKEW, levels: 3, spacing: 1.0 })?;
    out.push(DyadicCase { label: "asymmetric N=20 symmetrized".into(), space: asym.symmetrize(), delta: None });
    let (label, space) = run.line(200, 3, run.matched_spacing(1e-3))?;
    out.push(DyadicCase { label: format!("fine {label}"), space, delta: Some(2.2e-3) });
    Ok(out)
}

fn middle_of(space: &FiniteSpace, n: u32) -> PointId {
    let omega = space.omega(n);
    omega.as_slice()[omega.len() / 2]
}

/// Largest `R` accepted by `localize` with the default `c`, shrunk by one
/// part in `2²⁰` so that `cR < 2ε_n` survives rounding.
fn max_radius(table: &ConstantsTable, n: u32) -> Result<f64> {
    let eps = table.get(n)?.eps;
    let c = 4.0 * table.get(n + 1)?.b;
    Ok(2.0 * eps / c * (1.0 - 2f64.powi(-20)))
}

fn witness_or_null<T: serde::Serialize>(w: Option<T>) -> serde_json::Value {
    w.map_or(serde_json::Value::Null, |w| json!(w))
}

// 1 ----------------------------------------------------------------------

fn dyadic_exactness(run: &mut Run) {
    let cases = match dyadic_cases(run) {
        Ok(c) => c,
        Err(e) => return run.guard("spaces", |_| Err(e)),
    };
    let mut c0_min = f64::INFINITY;
    for case in cases {
        let label = case.label.clone();
        run.timed(&label, |run| {
            run.guard(&label, |run| {
                let opts = BuildOptions { delta: case.delta, order_seed: None };
                let sys = DyadicSystem::for_space(&case.space, 1, &opts)?;
                let rep = verify_properties(&sys, &case.space);
                c0_min = c0_min.min(sys.measured.c0);
                run.absorb(&label, rep);
                run.measured(format!("{label}: c0 c2"), "Main Thm (h)", &[("c0", sys.measured.c0), ("c2", sys.measured.c2)]);
                Ok(())
            })
        });
    }
    run.note(format!("min c0 = {c0_min:.3e}"));
}

// 2 ----------------------------------------------------------------------

fn tree_axioms(run: &mut Run) {
    run.guard("tree spaces", |run| {
        let mut cases = dyadic_cases(run)?;
        if run.flavor == Flavor::Plain {
            let h = generate(&Generator::HeisenbergGrid { side: 5, levels: 3, spacing: 1.0 })?;
            cases.push(DyadicCase { label: "heisenberg 5^3 L=3".into(), space: h, delta: None });
            let p = generate(&Generator::ParabolicGrid { side: 10, levels: 3, spacing: 1.0 })?;
            cases.push(DyadicCase { label: "parabolic 10x10 L=3".into(), space: p, delta: None });
        }
        let mut systems = 0;
        for case in &cases {
            let table = ConstantsTable::estimate(&case.space, 3)?;
            let base = run.opts.seed.wrapping_mul(1000);
            let orders = std::iter::once(None).chain((0..10).map(|i| Some(base.wrapping_add(i))));
            for order_seed in orders {
                let sys = DyadicSystem::build(&case.space, &table, 1, &BuildOptions { delta: case.delta, order_seed })?;
                let rep = verify_properties(&sys, &case.space);
                let label = match order_seed {
                    None => case.label.clone(),
                    Some(s) => format!("{} order {s}", case.label),
                };
                let mut kept = VerificationReport::new();
                kept.checks = rep.checks.into_iter().filter(|c| c.name.starts_with("tree") || c.name.starts_with("net")).collect();
                run.absorb(&label, kept);
                systems += 1;
            }
        }
        run.note(format!("{systems} trees"));
        Ok(())
    });
}

// 3 ----------------------------------------------------------------------

fn envelopes(run: &mut Run) {
    run.guard("envelope spaces", |run| {
        let cases = dyadic_cases(run)?;
        let mut worst = 1.0f64;
        for case in &cases {
            let table = ConstantsTable::estimate(&case.space, 4)?;
            let opts = BuildOptions { delta: case.delta, order_seed: None };
            let s1 = DyadicSystem::build(&case.space, &table, 1, &opts)?;
            let s2 = DyadicSystem::build(&case.space, &table, 2, &opts)?;
            let (_, _, r_n) = envelope_radius(&s1);
            let x = middle_of(&case.space, 1);
            let mut envs = Vec::new();
            for (i, r) in [r_n, r_n / 2.0, r_n / 4.0].into_iter().enumerate() {
                let env = build_envelope(&case.space, &s1, &s2, x, r)?;
                run.absorb(&format!("{} R_n/{}", case.label, 1 << i), verify_envelope(&env, &case.space));
                envs.push(env);
            }
            let stab = envelope_stability(&envs, 4.0);
            for c in &stab.checks {
                if let (Some(max), Some(min)) = (c.measured.get("max"), c.measured.get("min")) {
                    if *min > 0.0 {
                        worst = worst.max(max / min);
                    }
                }
            }
            run.absorb(&case.label, stab);
        }
        run.note(format!("largest spread {worst:.3}"));
        Ok(())
    });
}

// 4 ----------------------------------------------------------------------

fn order_alpha(run: &mut Run) {
    run.guard("order-alpha", |run| {
        let spaces = [run.line(20, 3, 1.0)?, run.square(15, 3, 225)?];
        let mut spread = (f64::INFINITY, 0.0f64);
        for (label, s) in &spaces {
            let table = ConstantsTable::estimate(s, 2)?;
            let b = table.get(2)?.b;
            let d = order_alpha_distance(s, 2, b, AlphaChoice::Formula)?;
            let v = d.chain_triangle_violation();
            run.exact(format!("{label}: triangle inequality for m"), "Prop order alpha", v.is_none(), witness_or_null(v));
            let ok = d.c_low >= 0.125 && d.c_high <= 8.0;
            run.exact(
                format!("{label}: equivalence in [1/8, 8]"),
                "Prop order alpha",
                ok,
                json!({"c_low": d.c_low, "c_high": d.c_high}),
            );
            run.exact(
                format!("{label}: order constant finite"),
                "Prop order alpha",
                d.order_constant.is_finite(),
                json!(d.order_constant),
            );
            spread = (spread.0.min(d.c_low), spread.1.max(d.c_high));

            let m = order_alpha_distance(s, 2, b, AlphaChoice::Metric)?;
            let ids = m.members.as_slice();
            let mut bad = None;
            'outer: for (i, &x) in ids.iter().enumerate() {
                for (j, &y) in ids.iter().enumerate() {
                    if m.matrix[i * ids.len() + j] != s.rho(x, y) {
                        bad = Some((x, y));
                        break 'outer;
                    }
                }
            }
            run.exact(format!("{label}: alpha = 1 gives d = rho"), "Prop order alpha", bad.is_none(), witness_or_null(bad));
            run.exact(
                format!("{label}: alpha = 1 equivalence constants 1"),
                "Prop order alpha",
                m.c_low == 1.0 && m.c_high == 1.0,
                json!({"c_low": m.c_low, "c_high": m.c_high}),
            );
        }
        run.note(format!("d/rho in [{:.4}, {:.4}]", spread.0, spread.1));
        Ok(())
    });
}

// 5 ----------------------------------------------------------------------

fn cutoffs(run: &mut Run) {
    run.guard("cutoff", |run| {
        let spaces = [run.line(61, 2, 1.0)?, run.square(31, 2, 241)?];
        let mut worst = 1.0f64;
        for (label, s) in &spaces {
            let table = ConstantsTable::estimate(s, 1)?;
            let d = order_alpha_distance(s, 1, table.get(1)?.b, AlphaChoice::Formula)?;
            let x0 = middle_of(s, 1);
            let gap = s.points().filter(|&y| !d.members.contains(y)).map(|y| s.rho(x0, y)).fold(f64::INFINITY, f64::min);
            let c2 = 2.0 / d.c_low;
            let r0 = gap / c2 * (1.0 - f64::EPSILON);
            let mut constants = Vec::new();
            for r in [r0, r0 / 2.0, r0 / 4.0] {
                let phi = cutoff(s, &d, x0, r)?;
                let mut bad = None;
                for y in s.points() {
                    let v = phi.values[y];
                    let t = s.rho(x0, y);
                    let wrong = !(0.0..=1.0).contains(&v)
                        || (t < phi.inner_radius() && v != 1.0)
                        || (t >= phi.outer_radius() && v != 0.0);
                    if wrong {
                        bad = Some(json!({"y": y, "rho": t, "phi": v}));
                        break;
                    }
                }
                run.exact(format!("{label} r={r:.4}: plateau and support"), "Prop cutoff", bad.is_none(), bad.unwrap_or_default());
                constants.push(phi.holder_constant);
            }
            let ok = within_factor(&constants, 4.0);
            let spread = constants.iter().copied().fold(0.0, f64::max) / constants.iter().copied().fold(f64::INFINITY, f64::min);
            worst = worst.max(spread);
            run.exact(format!("{label}: Holder constant stable"), "Prop cutoff", ok, json!(constants));
        }
        run.note(format!("Holder spread {worst:.3}"));
        Ok(())
    });
}

// 6 ----------------------------------------------------------------------

fn operator_suite(run: &mut Run) {
    run.guard("operator suite", |run| {
        let side = if run.opts.quick { 241 } else { 601 };
        let (label, s) = run.line(side, 2, 1.0)?;
        let table = ConstantsTable::estimate(&s, 2)?;
        let x = middle_of(&s, 1);
        let r = max_radius(&table, 1)? * 0.9;
        let spec = KernelSpec::antisymmetric(0.0);
        let mut norms = Vec::new();
        let mut loc0 = None;
        for k in 0..3 {
            let loc = localize(&s, &table, 1, &spec, x, r / f64::from(1 << k), &LocalizeOptions::default())?;
            let p = exact_p2_norm(&loc.operator(&s), run.opts.seed);
            run.exact(format!("{label}: power iteration converged at R/{}", 1 << k), "Theorem L^p C^eta", p.converged, json!(p.iterations));
            norms.push(p.norm);
            if k == 0 {
                loc0 = Some(loc);
            }
        }
        run.exact(format!("{label}: p=2 norms within factor 4 over R"), "Theorem L^p C^eta", within_factor(&norms, 4.0), json!(norms));
        let loc = loc0.expect("first radius");

        let mut rng = run.rng(6);
        let mut worst_lin = 0.0f64;
        for _ in 0..20 {
            let f: Vec<f64> = (0..s.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let g: Vec<f64> = (0..s.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let (a, b) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let h: Vec<f64> = f.iter().zip(&g).map(|(f, g)| a * f + b * g).collect();
            let (tf, tg, th) = (apply_singular(&s, &loc, &f)?, apply_singular(&s, &loc, &g)?, apply_singular(&s, &loc, &h)?);
            let scale = tf.iter().chain(&tg).fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE) * (a.abs() + b.abs());
            for y in s.points() {
                worst_lin = worst_lin.max((th[y] - (a * tf[y] + b * tg[y])).abs() / scale);
            }
        }
        run.exact(format!("{label}: linearity 1e-12"), "Theorem L^p C^eta", worst_lin <= 1e-12, json!(worst_lin));

        let op = loc.operator(&s);
        let mut weak_max = 0.0f64;
        let mut bad = None;
        for i in 0..100 {
            let f: Vec<f64> = (0..op.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let f2: Vec<f64> = f.iter().map(|v| 2.0 * v).collect();
            let (w, w2) = (weak11_exact(&op, &f), weak11_exact(&op, &f2));
            let grid = [0.01, 0.1, 1.0];
            let grid2 = [0.02, 0.2, 2.0];
            let (c, c2) = (weak11_check(&op, &f, &grid)?.constant, weak11_check(&op, &f2, &grid2)?.constant);
            if !(w.is_finite() && w == w2 && c == c2) && bad.is_none() {
                bad = Some(json!({"trial": i, "weak": [w, w2], "grid": [c, c2]}));
            }
            weak_max = weak_max.max(w);
        }
        run.exact(format!("{label}: weak (1,1) finite and scale invariant"), "Theorem L^p C^eta", bad.is_none(), bad.unwrap_or_default());
        run.measured(format!("{label}: weak (1,1) constant"), "Theorem L^p C^eta", &[("max", weak_max)]);
        run.note(format!("norms {:.3}/{:.3}/{:.3}, weak {weak_max:.3}", norms[0], norms[1], norms[2]));
        Ok(())
    });
}

// 7 ----------------------------------------------------------------------

fn fractional(run: &mut Run) {
    run.guard("fractional", |run| {
        let (label, s) = if run.opts.quick { run.square(61, 2, 241)? } else { run.square(85, 2, 601)? };
        let table = ConstantsTable::estimate(&s, 2)?;
        let x = middle_of(&s, 1);
        let r0 = max_radius(&table, 1)?;
        let spec = KernelSpec::riesz(0.25);
        let mut ratios = Vec::new();
        for k in [2, 4, 8] {
            let loc = localize(&s, &table, 1, &spec, x, r0 / f64::from(k), &LocalizeOptions::default())?;
            let est = estimate_operator_norm(&loc.operator(&s), 2.0, 4.0, 200, run.opts.seed)?;
            ratios.push(est.monte_carlo_lower_bound);
            run.measured(
                format!("{label}: R0/{k}"),
                "Theorem frac lp-lq",
                &[("ratio", est.monte_carlo_lower_bound), ("points", loc.domain().len() as f64)],
            );
        }
        let ok = ratios.iter().all(|r| r.is_finite() && *r > 0.0) && within_factor(&ratios, 4.0);
        run.exact(format!("{label}: L2-L4 ratio finite and stable"), "Theorem frac lp-lq", ok, json!(ratios));
        run.note(format!("ratios {:.4}/{:.4}/{:.4}", ratios[0], ratios[1], ratios[2]));
        Ok(())
    });
}

// 8 ----------------------------------------------------------------------

fn commutators(run: &mut Run) {
    run.guard("commutators", |run| {
        let side = if run.opts.quick { 241 } else { 601 };
        let (label, s) = run.line(side, 2, 1.0)?;
        let table = ConstantsTable::estimate(&s, 4)?;
        let x = middle_of(&s, 1);
        let r0 = max_radius(&table, 1)? * 0.9;
        let anti = KernelSpec::antisymmetric(0.0);
        let loc = localize(&s, &table, 1, &anti, x, r0, &LocalizeOptions::default())?;
        let pos = localize(&s, &table, 1, &KernelSpec::riesz(0.3), x, r0, &LocalizeOptions::default())?;
        let op = loc.operator(&s);
        let mut rng = run.rng(8);
        let mut closure_residual = 0.0f64;
        let mut bad = None;
        for c in [0.0, 1.0, -2.5, 7.0] {
            let konst = vec![c; s.len()];
            let f: Vec<f64> = (0..s.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let m = commutator_matrix(&op, &konst).apply(&f);
            let p = positive_commutator_apply(&s, &pos, &konst, &f)?;
            if (m.iter().chain(&p).any(|v| *v != 0.0)) && bad.is_none() {
                bad = Some(json!({"a": c}));
            }
            let t = |g: &[f64]| apply_singular(&s, &loc, g).expect("length checked");
            closure_residual = commutator_apply(t, &konst, &f).iter().fold(closure_residual, |m, v| m.max(v.abs()));
        }
        run.exact(format!("{label}: commutator with constant a vanishes"), "Thm commutator", bad.is_none(), bad.unwrap_or_default());
        run.measured(format!("{label}: closure form residual"), "Thm commutator", &[("max_abs", closure_residual)]);

        // c_n from the envelope dilation at the same center.
        let s1 = DyadicSystem::build(&s, &table, 1, &BuildOptions::default())?;
        let s2 = DyadicSystem::build(&s, &table, 2, &BuildOptions::default())?;
        let (_, _, r_n) = envelope_radius(&s1);
        let c_n = build_envelope(&s, &s1, &s2, x, r_n)?.measured.dilation.max(1.0);
        let a: Vec<f64> = (0..s.len()).map(|y| s.rho(y, x).sqrt()).collect();
        let setup = VmoSetup { n: 1, base: &anti, center: x, c_n, opts: LocalizeOptions::default(), trials: 16, seed: run.opts.seed };
        let radii = [r0, r0 / 2.0, r0 / 4.0, r0 / 8.0];
        let vmo = vmo_smallness_experiment(&s, &table, &setup, &a, &radii)?;
        let norms: Vec<f64> = vmo.rows.iter().map(|r| r.exact_p2).collect();
        run.exact(
            format!("{label}: commutator norms dominated by c eta*(c_n r)"),
            "Thm commutator, comm last",
            vmo.dominated() && vmo.rows.iter().all(|r| r.converged),
            json!({"norms": norms, "moduli": vmo.rows.iter().map(|r| r.modulus).collect::<Vec<_>>()}),
        );
        run.measured(format!("{label}: VMO constant"), "Thm commutator", &[("c", vmo.constant), ("c_n", c_n), ("max_growth", vmo.max_growth)]);

        // Bridge on the fine line, where envelopes contain several points.
        let (fine_label, fine) = run.line(301, 2, run.matched_spacing(1.0 / 600.0))?;
        let ft = ConstantsTable::estimate(&fine, 4)?;
        let opts = BuildOptions { delta: Some(2.2e-3), order_seed: None };
        let f1 = DyadicSystem::build(&fine, &ft, 1, &opts)?;
        let f2 = DyadicSystem::build(&fine, &ft, 2, &opts)?;
        let (_, _, fr) = envelope_radius(&f1);
        let xc = middle_of(&fine, 1);
        let u: Vec<f64> = (0..fine.len()).map(|y| fine.rho(y, xc).sqrt()).collect();
        let mut reports = Vec::new();
        for k in 0..3 {
            let env = build_envelope(&fine, &f1, &f2, xc, fr / f64::from(1 << k))?;
            let b = verify_bmo_bridge(&fine, &ft, &env, &u)?;
            run.exact(
                format!("{fine_label}: bridge holds at R_n/{}", 1 << k),
                "Prop BMO loc BMO",
                !b.violated(),
                json!({"lhs": b.lhs, "modulus": b.modulus}),
            );
            reports.push(b);
        }
        let cs: Vec<f64> = reports.iter().map(|b| b.constant).collect();
        run.exact(format!("{fine_label}: bridge constant stable"), "Prop BMO loc BMO", bridge_stability(&reports, 4.0), json!(cs));
        run.note(format!("VMO c = {:.3}, bridge c = {:.3}..{:.3}", vmo.constant, cs.iter().copied().fold(f64::INFINITY, f64::min), cs.iter().copied().fold(0.0, f64::max)));
        Ok(())
    });
}

// 9 ----------------------------------------------------------------------

fn maximal(run: &mut Run) {
    run.guard("maximal", |run| {
        let mut spaces: Vec<(String, FiniteSpace)> = dyadic_cases(run)?.into_iter().map(|c| (c.label, c.space)).collect();
        spaces.push(run.line(121, 2, 1.0)?);
        let mut rng = run.rng(9);
        for (label, s) in &spaces {
            let table = ConstantsTable::estimate(s, 2)?;
            let r_n = maximal_radius(&table, 1)?;
            let battery: Vec<Vec<f64>> = (0..50).map(|_| (0..s.len()).map(|_| rng.random_range(-4.0..4.0)).collect()).collect();
            let omega = s.omega(1);
            let maxes: Vec<Vec<f64>> = battery.iter().map(|f| local_maximal(s, &table, 1, f).map(|m| m.values)).collect::<Result<_>>()?;

            let mut dom = None;
            for (f, m) in battery.iter().zip(&maxes) {
                if let Some(x) = omega.iter().find(|&x| !(m[x] >= f[x].abs())) {
                    dom = Some(json!({"x": x, "Mf": m[x], "f": f[x]}));
                    break;
                }
            }
            run.exact(format!("{label}: Mf >= |f|"), "Thm maximal", dom.is_none(), dom.unwrap_or_default());

            let singleton = omega.iter().all(|x| s.ball_unchecked(x, r_n).len() == 1);
            let mut sub = (None, 0.0f64);
            let mut hom = None;
            for i in 0..battery.len() {
                let j = (i + 1) % battery.len();
                let sum: Vec<f64> = battery[i].iter().zip(&battery[j]).map(|(a, b)| a + b).collect();
                let msum = local_maximal(s, &table, 1, &sum)?.values;
                for x in omega.iter() {
                    let bound = maxes[i][x] + maxes[j][x];
                    let excess = (msum[x] - bound) / bound.max(f64::MIN_POSITIVE);
                    sub.1 = sub.1.max(excess);
                    if excess > 0.0 && sub.0.is_none() {
                        sub.0 = Some(json!({"pair": [i, j], "x": x, "excess": excess}));
                    }
                }
                let lambda = if i % 2 == 0 { 2f64.powi(i as i32 % 7 - 3) } else { -(2f64.powi(i as i32 % 5 - 2)) };
                let scaled: Vec<f64> = battery[i].iter().map(|v| lambda * v).collect();
                let ms = local_maximal(s, &table, 1, &scaled)?.values;
                if let Some(x) = s.points().find(|&x| ms[x] != lambda.abs() * maxes[i][x]) {
                    hom.get_or_insert(json!({"f": i, "x": x, "lambda": lambda}));
                }
            }
            if singleton {
                run.exact(format!("{label}: sublinearity exact"), "Thm maximal", sub.0.is_none(), sub.0.unwrap_or_default());
            } else {
                // Averages over balls with several points round.
                run.exact(
                    format!("{label}: sublinearity to rounding (1e-14)"),
                    "Thm maximal",
                    sub.1 <= 1e-14,
                    json!(sub.1),
                );
                run.measured(format!("{label}: sublinearity excess"), "Thm maximal", &[("relative", sub.1)]);
            }
            run.exact(format!("{label}: homogeneity exact"), "Thm maximal", hom.is_none(), hom.unwrap_or_default());
        }

        // Vitali on spaces where r_n exceeds the grid spacing.
        let vit_spaces = [run.line(121, 2, 1.0)?, run.square(31, 2, 241)?];
        let mut c_min = f64::INFINITY;
        for (label, s) in &vit_spaces {
            let table = ConstantsTable::estimate(s, 2)?;
            let r_n = maximal_radius(&table, 1)?;
            let omega = s.omega(1);
            let mut bad = None;
            for fam in 0..20 {
                let family: Vec<FamilyBall> = (0..rng.random_range(1..40))
                    .map(|_| FamilyBall {
                        center: omega.as_slice()[rng.random_range(0..omega.len())],
                        radius: rng.random_range(0.01..=1.0) * r_n,
                    })
                    .collect();
                let v = vitali_select(s, &table, 1, &family)?;
                c_min = c_min.min(v.c);
                if !(v.disjoint && v.covered && v.c > 0.0) && bad.is_none() {
                    bad = Some(json!({"family": fam, "witness": v.witness}));
                }
            }
            run.exact(format!("{label}: Vitali disjoint and K-covering on 20 families"), "Lemma Vitali cover lemma", bad.is_none(), bad.unwrap_or_default());

            let mut battery: Vec<Vec<f64>> = Vec::new();
            let inner = omega.as_slice();
            for k in 0..12 {
                let f: Vec<f64> = match k % 3 {
                    0 => (0..s.len()).map(|y| if omega.contains(y) { rng.random_range(-1.0..1.0) } else { 0.0 }).collect(),
                    1 => {
                        let c = inner[rng.random_range(0..inner.len())];
                        (0..s.len()).map(|y| if y == c { 1.0 } else { 0.0 }).collect()
                    }
                    _ => {
                        let c = inner[rng.random_range(0..inner.len())];
                        (0..s.len()).map(|y| if s.rho(c, y) < 3.0 { 3.0 } else { 0.0 }).collect()
                    }
                };
                battery.push(f);
            }
            let mc = maximal_checks(s, &table, 1, &battery, &[1.5, 2.0, 4.0], &[0.01, 0.1, 0.5, 1.0])?;
            run.exact(format!("{label}: Mf finite"), "Thm maximal (a)", mc.finite, json!(false));
            run.exact(
                format!("{label}: weak constant stable over battery"),
                "Thm maximal (b)",
                mc.weak_stable,
                json!(mc.weak_per_function),
            );
            let mut vals = vec![("weak", mc.weak_constant)];
            let names = ["Lp_1.5", "Lp_2", "Lp_4"];
            for (name, (_, r)) in names.iter().zip(&mc.lp_ratios) {
                vals.push((name, *r));
            }
            run.measured(format!("{label}: maximal constants"), "Thm maximal (b), (c)", &vals);
        }
        run.note(format!("Vitali c >= {c_min:.3}"));
        Ok(())
    });
}

// 10 ---------------------------------------------------------------------

fn transfer(run: &mut Run) {
    run.guard("transfer", |run| {
        let asym = generate(&Generator::AsymmetricGrid { side: 40, skew: SKEW, levels: 3, spacing: 1.0 })?;
        let sym = asym.symmetrize();
        let v = sym.symmetry_violation();
        run.exact("rho* symmetric".into(), "rho star", v.is_none(), witness_or_null(v));
        let mut bad = None;
        'outer: for x in asym.points() {
            for y in asym.points() {
                let (r, rs) = (asym.rho(x, y), sym.rho(x, y));
                if !(r <= rs && rs <= 4.0 * r) {
                    bad = Some(json!({"x": x, "y": y, "rho": r, "rho_star": rs}));
                    break 'outer;
                }
            }
        }
        run.exact("rho <= rho* <= 4 rho".into(), "rho star", bad.is_none(), bad.unwrap_or_default());
        Ok(())
    });
    let mut failed = Vec::new();
    for id in 1..=9u8 {
        let mut inner = Run::new(run.opts, Flavor::Symmetrized);
        dispatch(id, &mut inner);
        if !inner.rep.passed() {
            failed.push(id);
        }
        run.timings.extend(inner.timings.into_iter().map(|(l, t)| (format!("({id}) {l}"), t)));
        let mut rep = VerificationReport::new();
        rep.checks = inner.rep.checks;
        run.absorb(&format!("symmetrized ({id})"), rep);
    }
    run.note(if failed.is_empty() { "criteria 1-9 pass on rho*".into() } else { format!("failing on rho*: {failed:?}") });
}

// 11 ---------------------------------------------------------------------

fn random_cloud(rng: &mut ChaCha8Rng, n: usize) -> Result<FiniteSpace> {
    let coords: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)]).collect();
    let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
    FiniteSpace::new(Metric::Euclidean, coords, weights, vec![1; n])
}

fn oracles(run: &mut Run) {
    run.guard("oracles", |run| {
        let mut rng = run.rng(11);
        let mut net_bad = None;
        let mut holder_err = 0.0f64;
        let mut norm_err = 0.0f64;
        for inst in 0..20 {
            let n = rng.random_range(8..=64);
            let s = random_cloud(&mut rng, n)?;
            let e: PointSet = s.points().filter(|_| rng.random_bool(0.7)).collect();
            let r = rng.random_range(0.2..6.0);
            let centers = maximal_net(&s, &e, r);
            // Brute force: greedy reference, separation, maximality.
            let mut greedy: Vec<PointId> = Vec::new();
            for x in e.iter() {
                if greedy.iter().all(|&z| s.rho(z, x) >= r && s.rho(x, z) >= r) {
                    greedy.push(x);
                }
            }
            let separated = centers.iter().all(|&a| centers.iter().all(|&b| a == b || s.rho(a, b) >= r));
            let maximal = e.iter().all(|x| centers.iter().any(|&z| s.rho(z, x) < r));
            if !(centers == greedy && separated && maximal) && net_bad.is_none() {
                net_bad = Some(json!({"instance": inst}));
            }

            let f: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let eta = rng.random_range(0.1..=1.0);
            let all: PointSet = s.points().collect();
            let got = holder_seminorm(&s, &f, eta, &all);
            let mut want = 0.0f64;
            for x in 0..n {
                for y in 0..n {
                    if x != y {
                        want = want.max((f[x] - f[y]).abs() / s.rho(x, y).powf(eta));
                    }
                }
            }
            holder_err = holder_err.max((got - want).abs() / want.max(f64::MIN_POSITIVE));

            let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { rng.random_range(-1.0..1.0) }).collect()).collect();
            let op = KernelMatrix::assemble(&s, &KernelSpec::from_matrix(rows, 0.0), &all)?.operator(&s);
            let p = exact_p2_norm(&op, run.opts.seed ^ inst);
            let mat = DMatrix::from_fn(n, n, |i, j| op.weights[i].sqrt() * op.entries[i * n + j] * op.weights[j].sqrt());
            let dense = (mat.transpose() * &mat).symmetric_eigenvalues().max().sqrt();
            norm_err = norm_err.max((p.norm - dense).abs() / dense);
        }
        run.exact("maximal_net vs brute force (20 instances)".into(), "Main Thm proof: maximal collection", net_bad.is_none(), net_bad.unwrap_or_default());
        run.exact("holder_seminorm vs all-pairs sweep (20 instances)".into(), "Holder seminorm", holder_err <= 1e-9, json!(holder_err));
        run.exact("p=2 norm vs dense eigenvalues (20 instances)".into(), "Theorem L^p C^eta", norm_err <= 1e-9, json!(norm_err));
        run.note(format!("holder err {holder_err:.1e}, norm err {norm_err:.1e}"));
        Ok(())
    });
}

fn dispatch(id: u8, run: &mut Run) {
    match id {
        1 => dyadic_exactness(run),
        2 => tree_axioms(run),
        3 => envelopes(run),
        4 => order_alpha(run),
        5 => cutoffs(run),
        6 => operator_suite(run),
        7 => fractional(run),
        8 => commutators(run),
        9 => maximal(run),
        10 => transfer(run),
        11 => oracles(run),
        _ => unreachable!("criterion ids are 1..=11"),
    }
}

fn budget(id: u8) -> Option<Budget> {
    match id {
        1 => Some(Budget::PerItem(Duration::from_secs(60))),
        2 => Some(Budget::Total(Duration::from_secs(30))),
        6 => Some(Budget::Total(Duration::from_secs(120))),
        _ => None,
    }
}

/// Runs one criterion, `1..=11`.
pub fn run_criterion(id: u8, opts: SuiteOptions) -> Result<CriterionOutcome> {
    if !(1..=11).contains(&id) {
        return Err(crate::Error::input(format!("criterion must be in 1..=11, got {id}")));
    }
    let t0 = Instant::now();
    let mut run = Run::new(opts, Flavor::Plain);
    dispatch(id, &mut run);
    Ok(run.finish(id, t0.elapsed(), budget(id)))
}

pub fn run_suite(opts: SuiteOptions) -> Vec<CriterionOutcome> {
    (1..=11).map(|id| run_criterion(id, opts).expect("valid id")).collect()
}

/// All checks in one report, names prefixed by criterion.
pub fn combined_report(outcomes: &[CriterionOutcome]) -> VerificationReport {
    let mut rep = VerificationReport::new();
    for o in outcomes {
        for c in &o.report.checks {
            let mut c = c.clone();
            c.name = format!("criterion {}: {}", o.id, c.name);
            rep.checks.push(c);
        }
    }
    rep
}
