use super::*;
use crate::space::{generate, Generator, Metric};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn line(side: usize, levels: u32) -> FiniteSpace {
    generate(&Generator::EuclideanGrid { dim: 1, side, levels, spacing: 1.0 }).unwrap()
}

fn probe() -> (FiniteSpace, ConstantsTable) {
    let s = line(121, 2);
    let t = ConstantsTable::estimate(&s, 2).unwrap();
    (s, t)
}

fn swap_space() -> FiniteSpace {
    FiniteSpace::new(Metric::Matrix(vec![0.0, 1.0, 1.0, 0.0]), vec![], vec![1.0; 2], vec![1; 2]).unwrap()
}

fn all(s: &FiniteSpace) -> PointSet {
    s.points().collect()
}

#[test]
fn localized_kernel_is_a_k_b() {
    let (s, t) = probe();
    let base = KernelSpec::antisymmetric(0.0);
    let loc = localize(&s, &t, 1, &base, 60, 10.0, &LocalizeOptions::default()).unwrap();
    let full = KernelMatrix::assemble(&s, &base, &all(&s)).unwrap();
    let (supp_a, supp_b) = (loc.a.support(), loc.b.support());
    assert!(supp_a.len() > 5);
    for x in s.points() {
        for y in s.points() {
            let want = if x == y { 0.0 } else { full.get(x, y).unwrap() * (loc.a.values[x] * loc.b.values[y]) };
            assert_eq!(loc.eval(x, y), want);
            if !supp_a.contains(x) || !supp_b.contains(y) {
                assert_eq!(loc.eval(x, y), 0.0);
            }
            if loc.a.values[x] == 1.0 && loc.b.values[y] == 1.0 && x != y {
                assert_eq!(loc.eval(x, y), full.get(x, y).unwrap());
            }
        }
    }
    assert!(supp_a.is_subset(&s.ball(60, 0.9 * 10.0 + 1e-9).unwrap()));
}

#[test]
fn localize_radius_errors() {
    let (s, t) = probe();
    let base = KernelSpec::riesz(0.0);
    let opts = LocalizeOptions::default();
    // 2eps_1 = 120, c = 8: R must stay below 15.
    let err = localize(&s, &t, 1, &base, 60, 16.0, &opts).unwrap_err();
    assert!(matches!(&err, Error::Range(m) if m.contains("15")), "{err}");
    let low_c = LocalizeOptions { c: Some(4.0), ..opts };
    assert!(matches!(localize(&s, &t, 1, &base, 60, 5.0, &low_c), Err(Error::Range(_))));
    let tight = LocalizeOptions { r0: Some(40.0), ..opts };
    assert!(matches!(localize(&s, &t, 1, &base, 60, 6.0, &tight), Err(Error::Range(_))));
    assert!(localize(&s, &t, 1, &base, 60, 5.0, &tight).is_ok());
    let small_m = KernelSpec { m: Some(3.0), ..base.clone() };
    assert!(matches!(localize(&s, &t, 1, &small_m, 60, 5.0, &opts), Err(Error::Config { .. })));
    assert!(matches!(localize(&s, &t, 1, &base, 5, 5.0, &opts), Err(Error::Input(_))));
}

#[test]
fn kernel_file_round_trip() {
    let text = r#"{"type":"riesz-model","nu":0.25,"A":2.0,"M":4.0}"#;
    let k: KernelSpec = serde_json::from_str(text).unwrap();
    assert_eq!(k.kind, KernelKind::RieszModel);
    assert_eq!((k.nu, k.a, k.m), (0.25, Some(2.0), Some(4.0)));
    assert!(serde_json::from_str::<KernelSpec>(r#"{"type":"riesz-model","bogus":1}"#).is_err());
    let s = line(5, 1);
    assert!(KernelSpec::riesz(1.0).validate(&s).is_err());
    assert!(KernelSpec::from_matrix(vec![vec![0.0; 4]; 4], 0.0).validate(&s).is_err());
}

#[test]
fn riesz_kernel_attains_a_equal_one() {
    let s = line(15, 1);
    let k = KernelMatrix::assemble(&s, &KernelSpec::riesz(0.0), &all(&s)).unwrap();
    let f = |x, y| k.get_or_zero(x, y);
    let est = check_standard_estimates(&s, &f, &all(&s), 0.0, 1.0, 4.0);
    assert!((est.a - 1.0).abs() < 1e-15, "{}", est.a);
    let zero = |_: PointId, _: PointId| 0.0;
    let z = check_standard_estimates(&s, &zero, &all(&s), 0.0, 1.0, 4.0);
    assert_eq!((z.a, z.b), (0.0, 0.0));
}

#[test]
fn sign_kernel_estimates_match_brute_force() {
    let s = generate(&Generator::EuclideanGrid { dim: 2, side: 6, levels: 1, spacing: 1.0 }).unwrap();
    let k = KernelMatrix::assemble(&s, &KernelSpec::antisymmetric(0.2), &all(&s)).unwrap();
    let f = |x, y| k.get_or_zero(x, y);
    let (nu, beta, m) = (0.2, 0.5, 4.0);
    let est = check_standard_estimates(&s, &f, &all(&s), nu, beta, m);
    let mu = |x: PointId, r: f64| s.points().filter(|&y| s.rho(x, y) < r).map(|y| s.weight(y)).sum::<f64>();
    let (mut a, mut b) = (0.0f64, 0.0f64);
    for x0 in s.points() {
        for y in s.points() {
            if y == x0 {
                continue;
            }
            let r = s.rho(x0, y);
            a = a.max(f(x0, y).abs() * mu(x0, r) / r.powf(nu));
            for x in s.points() {
                let rx = s.rho(x0, x);
                if x != x0 && r > m * rx {
                    let num = (f(x0, y) - f(x, y)).abs() + (f(y, x0) - f(y, x)).abs();
                    b = b.max(num * mu(x0, r) / r.powf(nu) / (rx / r).powf(beta));
                }
            }
        }
    }
    assert!(a.is_finite() && b.is_finite() && b > 0.0);
    assert!((est.a - a).abs() <= 1e-12 * a);
    assert!((est.b - b).abs() <= 1e-12 * b);
}

#[test]
fn cancellation_examples() {
    let s = line(21, 1);
    let everything = all(&s);
    let shells = [0.5, 1.5, 3.0, 6.0, 12.0];
    let anti = KernelMatrix::assemble(&s, &KernelSpec::antisymmetric(0.0), &everything).unwrap();
    let f = |x, y| anti.get_or_zero(x, y);
    let c = check_cancellation(&s, &f, 10, &shells, &RhoPrime::Rho, &everything).unwrap();
    assert!(c.max < 1e-12, "{}", c.max);
    let zero = |_: PointId, _: PointId| 0.0;
    assert_eq!(check_cancellation(&s, &zero, 3, &shells, &RhoPrime::Rho, &everything).unwrap().max, 0.0);

    let riesz = KernelMatrix::assemble(&s, &KernelSpec::riesz(0.0), &everything).unwrap();
    let g = |x, y| riesz.get_or_zero(x, y);
    let x = 4;
    let c = check_cancellation(&s, &g, x, &shells, &RhoPrime::Rho, &everything).unwrap();
    let mu = |x: PointId, r: f64| s.points().filter(|&y| s.rho(x, y) < r).count() as f64;
    let mut direct = 0.0f64;
    for (i, &e1) in shells.iter().enumerate() {
        for &e2 in &shells[i + 1..] {
            let shell = s.points().filter(|&y| y != x && e1 < s.rho(x, y) && s.rho(x, y) < e2);
            let (s1, s2) = shell.fold((0.0, 0.0), |(a, b), y| (a + 1.0 / mu(x, s.rho(x, y)), b + 1.0 / mu(y, s.rho(y, x))));
            direct = direct.max(s1 + s2);
        }
    }
    assert!((c.max - direct).abs() <= 1e-12 * direct);
    assert!(check_cancellation(&s, &g, x, &[1.0, 1.0], &RhoPrime::Rho, &everything).is_err());
}

#[test]
fn swap_operator() {
    let s = swap_space();
    let k = KernelMatrix::assemble(&s, &KernelSpec::from_matrix(vec![vec![0.0, 1.0], vec![1.0, 0.0]], 0.0), &all(&s)).unwrap();
    let op = k.operator(&s);
    assert_eq!(op.apply(&[3.0, -2.0]), vec![-2.0, 3.0]);
    assert_eq!(op.truncated(&s, &RhoPrime::Rho, 2.0).apply(&[3.0, -2.0]), vec![0.0, 0.0]);
    let est = estimate_operator_norm(&op, 2.0, 2.0, 16, 0).unwrap();
    assert!((est.exact_p2_norm().unwrap() - 1.0).abs() < 1e-12);
    assert!(est.monte_carlo_lower_bound <= est.exact_p2_norm().unwrap() * (1.0 + 1e-12));

    let single = FiniteSpace::new(Metric::Matrix(vec![0.0]), vec![], vec![1.0], vec![1]).unwrap();
    let op1 = KernelMatrix::assemble(&single, &KernelSpec::riesz(0.0), &all(&single)).unwrap().operator(&single);
    assert_eq!(op1.apply(&[5.0]), vec![0.0]);
}

#[test]
fn truncation_and_limit() {
    let (s, t) = probe();
    let loc = localize(&s, &t, 1, &KernelSpec::antisymmetric(0.0), 60, 10.0, &LocalizeOptions::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let f: Vec<f64> = (0..s.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    assert!(apply_truncated(&s, &loc, &RhoPrime::Rho, &f, 500.0).unwrap().iter().all(|v| *v == 0.0));
    assert_eq!(apply_truncated(&s, &loc, &RhoPrime::Rho, &f, 0.5).unwrap(), apply_singular(&s, &loc, &f).unwrap());
    assert!(apply_truncated(&s, &loc, &RhoPrime::Rho, &f, 0.0).is_err());
}

#[test]
fn fractional_examples() {
    let (s, t) = probe();
    let nu = 0.25;
    let loc = localize(&s, &t, 1, &KernelSpec::riesz(nu), 60, 12.0, &LocalizeOptions::default()).unwrap();
    assert!(apply_fractional(&s, &loc, &vec![0.0; s.len()]).unwrap().iter().all(|v| *v == 0.0));
    let mut ind = vec![0.0; s.len()];
    ind[62] = 1.0;
    let out = apply_fractional(&s, &loc, &ind).unwrap();
    for x in s.points() {
        assert_eq!(out[x], loc.eval(x, 62) * s.weight(62));
    }
    // Direct summation oracle for K = μ(B(x, ρ))^{ν−1}.
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let f: Vec<f64> = (0..s.len()).map(|_| rng.random_range(0.0..1.0)).collect();
    let got = apply_fractional(&s, &loc, &f).unwrap();
    for x in s.points() {
        let mut sum = 0.0;
        for y in s.points() {
            if y != x && s.rho(60, y) < 12.0 {
                let mu = s.points().filter(|&z| s.rho(x, z) < s.rho(x, y)).count() as f64;
                sum += loc.a.values[x] * mu.powf(nu - 1.0) * loc.b.values[y] * f[y];
            }
        }
        assert!((got[x] - sum).abs() <= 1e-12 * sum.max(1e-300), "{x}: {} vs {sum}", got[x]);
        assert!(got[x] >= 0.0);
    }
    let signed = localize(&s, &t, 1, &KernelSpec::antisymmetric(nu), 60, 12.0, &LocalizeOptions::default()).unwrap();
    assert!(matches!(apply_fractional(&s, &signed, &f), Err(Error::Input(_))));
    let singular = localize(&s, &t, 1, &KernelSpec::riesz(0.0), 60, 12.0, &LocalizeOptions::default()).unwrap();
    assert!(apply_fractional(&s, &singular, &f).is_err());
}

#[test]
fn norm_estimates() {
    let s = line(8, 1);
    let zero = KernelMatrix::assemble(&s, &KernelSpec::from_matrix(vec![vec![0.0; 8]; 8], 0.0), &all(&s)).unwrap();
    let est = estimate_operator_norm(&zero.operator(&s), 2.0, 2.0, 10, 3).unwrap();
    assert_eq!((est.monte_carlo_lower_bound, est.exact_p2_norm()), (0.0, Some(0.0)));
    assert!(estimate_operator_norm(&zero.operator(&s), 1.0, 2.0, 10, 3).is_err());
    assert!(estimate_operator_norm(&zero.operator(&s), 2.0, 2.0, 0, 3).is_err());
}

/// Dense singular value oracle for `W^{1/2} E W^{1/2}`.
fn dense_norm(op: &OperatorMatrix) -> f64 {
    let m = op.dim();
    let mat = DMatrix::from_fn(m, m, |i, j| op.weights[i].sqrt() * op.entries[i * m + j] * op.weights[j].sqrt());
    let gram = mat.transpose() * &mat;
    gram.symmetric_eigenvalues().max().sqrt()
}

#[test]
fn power_iteration_matches_dense_eigen() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..8 {
        let n = rng.random_range(2..24);
        let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
        let s = FiniteSpace::new(Metric::Euclidean, (0..n).map(|i| vec![i as f64]).collect(), weights, vec![1; n]).unwrap();
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0.0 } else { rng.random_range(-1.0..1.0) }).collect())
            .collect();
        let op = KernelMatrix::assemble(&s, &KernelSpec::from_matrix(rows, 0.0), &all(&s)).unwrap().operator(&s);
        let est = estimate_operator_norm(&op, 2.0, 2.0, 20, trial).unwrap();
        let exact = est.exact_p2.unwrap();
        assert!(exact.converged);
        let oracle = dense_norm(&op);
        assert!((exact.norm - oracle).abs() <= 1e-9 * oracle, "{} vs {oracle}", exact.norm);
        assert!(est.monte_carlo_lower_bound <= exact.norm * (1.0 + 1e-12));
    }
}

#[test]
fn weak_type_examples() {
    let s = line(6, 1);
    let id: Vec<Vec<f64>> = (0..6).map(|i| (0..6).map(|j| if j == (i + 1) % 6 { 1.0 } else { 0.0 }).collect()).collect();
    let op = KernelMatrix::assemble(&s, &KernelSpec::from_matrix(id, 0.0), &all(&s)).unwrap().operator(&s);
    let mut f = vec![0.0; 6];
    f[2] = 1.0;
    // Tf = indicator of {1}; at t = 0.5 the level set has measure 1.
    let r = weak11_check(&op, &f, &[0.5]).unwrap();
    assert_eq!(r.constant, 0.5);
    assert_eq!(weak11_exact(&op, &f), 1.0);
    assert_eq!(weak11_check(&op, &[0.0; 6], &[0.5]).unwrap().constant, 0.0);
    assert_eq!(weak11_exact(&op, &[0.0; 6]), 0.0);
    assert!(weak11_check(&op, &f, &[0.0]).is_err());
}

#[test]
fn convergence_examples() {
    let (s, t) = probe();
    let anti = localize(&s, &t, 1, &KernelSpec::antisymmetric(0.0), 60, 10.0, &LocalizeOptions::default()).unwrap();
    let grid = [8.0, 4.0, 2.0, 1.5, 0.75, 0.5];
    let rep = convergence_check(&s, &anti, &RhoPrime::Rho, 60, &grid).unwrap();
    assert!(rep.limit.abs() < 1e-12);
    assert_eq!(rep.exact_from, 4);
    let off = convergence_check(&s, &anti, &RhoPrime::Rho, 57, &grid).unwrap();
    assert_eq!(off.stable_from, off.exact_from);
    assert_eq!(h_tilde(&s, &anti)[57], off.limit);
    assert!(convergence_check(&s, &anti, &RhoPrime::Rho, 60, &[8.0, 2.0]).is_err());
    assert!(h_tilde_seminorm(&s, &anti, 0.5).is_finite());

    let zero_spec = KernelSpec::from_matrix(vec![vec![0.0; s.len()]; s.len()], 0.0);
    let zero = localize(&s, &t, 1, &zero_spec, 60, 10.0, &LocalizeOptions::default()).unwrap();
    assert!(h_tilde(&s, &zero).iter().all(|v| *v == 0.0));
    assert_eq!(h_tilde_seminorm(&s, &zero, 0.5), 0.0);
}

#[test]
fn localization_keeps_constants_finite() {
    let s = line(61, 2);
    let t = ConstantsTable::estimate(&s, 2).unwrap();
    let loc = localize(&s, &t, 1, &KernelSpec::antisymmetric(0.0), 30, 6.0, &LocalizeOptions::default()).unwrap();
    let m = 2.0 * t.get(2).unwrap().b;
    let rep = localization_transfer(&s, &loc, 0.2, m).unwrap();
    assert!(rep.base.a.is_finite() && rep.base.b.is_finite());
    assert!(rep.localized.a.is_finite() && rep.localized.b.is_finite());
    assert!(rep.localized.a <= rep.base.a);
}

#[test]
fn rho_prime_equivalence() {
    let s = line(6, 1);
    let n = s.len();
    let doubled: Vec<f64> = (0..n * n).map(|k| 2.0 * s.rho(k / n, k % n)).collect();
    assert_eq!(RhoPrime::Matrix(doubled).equivalence(&s, &all(&s)).unwrap(), (2.0, 2.0));
    let mut bad = vec![0.0; n * n];
    bad[1] = 1.0;
    assert!(matches!(RhoPrime::Matrix(bad).equivalence(&s, &all(&s)), Err(Error::Config { .. })));
}

#[test]
fn r_independence_probe() {
    let s = line(241, 2);
    let t = ConstantsTable::estimate(&s, 2).unwrap();
    let norms: Vec<f64> = [24.0, 12.0, 6.0]
        .iter()
        .map(|&r| {
            let loc = localize(&s, &t, 1, &KernelSpec::antisymmetric(0.0), 120, r, &LocalizeOptions::default()).unwrap();
            exact_p2_norm(&loc.operator(&s), 0).norm
        })
        .collect();
    assert!(crate::report::within_factor(&norms, 4.0), "{norms:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn truncated_apply_is_linear(
        seed in 0u64..1000,
        alpha in -3.0f64..3.0,
        beta in -3.0f64..3.0,
        eps in 0.5f64..6.0,
    ) {
        let (s, t) = probe();
        let loc = localize(&s, &t, 1, &KernelSpec::antisymmetric(0.0), 60, 10.0, &LocalizeOptions::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f: Vec<f64> = (0..s.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let g: Vec<f64> = (0..s.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let h: Vec<f64> = f.iter().zip(&g).map(|(f, g)| alpha * f + beta * g).collect();
        let (tf, tg, th) = (
            apply_truncated(&s, &loc, &RhoPrime::Rho, &f, eps).unwrap(),
            apply_truncated(&s, &loc, &RhoPrime::Rho, &g, eps).unwrap(),
            apply_truncated(&s, &loc, &RhoPrime::Rho, &h, eps).unwrap(),
        );
        let scale = tf.iter().chain(&tg).fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
        for x in s.points() {
            prop_assert!((th[x] - (alpha * tf[x] + beta * tg[x])).abs() <= 1e-12 * (alpha.abs() + beta.abs()) * scale);
        }
    }

    #[test]
    fn fractional_is_positive(seed in 0u64..1000) {
        let (s, t) = probe();
        let loc = localize(&s, &t, 1, &KernelSpec::riesz(0.3), 60, 10.0, &LocalizeOptions::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f: Vec<f64> = (0..s.len()).map(|_| if rng.random::<bool>() { rng.random_range(0.0..1.0) } else { 0.0 }).collect();
        prop_assert!(apply_fractional(&s, &loc, &f).unwrap().iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn weak_constant_is_scale_invariant(seed in 0u64..1000) {
        let (s, t) = probe();
        let loc = localize(&s, &t, 1, &KernelSpec::antisymmetric(0.0), 60, 10.0, &LocalizeOptions::default()).unwrap();
        let op = loc.operator(&s);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f: Vec<f64> = (0..op.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let f2: Vec<f64> = f.iter().map(|v| 2.0 * v).collect();
        prop_assert_eq!(weak11_exact(&op, &f), weak11_exact(&op, &f2));
        let grid = [0.01, 0.1, 0.5];
        let grid2 = [0.02, 0.2, 1.0];
        prop_assert_eq!(weak11_check(&op, &f, &grid).unwrap().constant, weak11_check(&op, &f2, &grid2).unwrap().constant);
    }
}
