use super::*;
use crate::space::{generate, Generator};
use crate::LevelConstants;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn line(side: usize, levels: u32) -> (FiniteSpace, ConstantsTable) {
    let s = generate(&Generator::EuclideanGrid { dim: 1, side, levels, spacing: 1.0 }).unwrap();
    let t = ConstantsTable::estimate(&s, levels + 1).unwrap();
    (s, t)
}

/// Brute force: every open ball `B(x, r)` for `r` a distance or `r_n`.
fn oracle_maximal(s: &FiniteSpace, r_n: f64, n: u32, f: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; s.len()];
    for x in s.omega(n).iter() {
        let mut radii: Vec<f64> = s.points().map(|y| s.rho(x, y)).filter(|d| *d > 0.0 && *d <= r_n).collect();
        radii.push(r_n);
        for r in radii {
            let ball = s.ball(x, r).unwrap();
            let num: f64 = ball.iter().map(|y| f[y].abs() * s.weight(y)).sum();
            out[x] = f64::max(out[x], num / s.measure(&ball));
        }
    }
    out
}

#[test]
fn radius_formula() {
    let t = ConstantsTable::from_levels(vec![LevelConstants { n: 1, eps: 1.0, b: 2.0, c: 1.0, a: 1.0 }]).unwrap();
    assert_eq!(maximal_radius(&t, 1).unwrap(), 0.125);
    assert_eq!(vitali_dilation(&t, 1).unwrap(), 16.0);
}

#[test]
fn maximal_examples() {
    let (s, t) = line(10, 1);
    let konst = vec![-2.5; 10];
    let m = local_maximal(&s, &t, 1, &konst).unwrap();
    assert!(m.values.iter().all(|v| *v == 2.5));

    assert!(maximal_radius(&t, 1).unwrap() < 1.0);
    let ind: Vec<f64> = (0..10).map(|x| if x == 5 { 1.0 } else { 0.0 }).collect();
    let m = local_maximal(&s, &t, 1, &ind).unwrap();
    assert_eq!(m.values, oracle_maximal(&s, m.r_n, 1, &ind));
    assert_eq!(m.values[5], 1.0);
    assert_eq!(m.values, ind);

    let checks = maximal_checks(&s, &t, 1, &[ind.clone()], &[2.0], &[0.5]).unwrap();
    assert_eq!(checks.weak_constant, 0.5);
    assert_eq!(checks.weak_per_function, vec![1.0]);
    assert_eq!(checks.lp_ratios, vec![(2.0, 1.0)]);
}

#[test]
fn matches_oracle_on_wide_line() {
    let (s, t) = line(121, 2);
    let r_n = maximal_radius(&t, 1).unwrap();
    assert!(r_n > 5.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let f: Vec<f64> = (0..s.len()).map(|_| rng.random_range(-3.0..3.0)).collect();
        let m = local_maximal(&s, &t, 1, &f).unwrap();
        let o = oracle_maximal(&s, r_n, 1, &f);
        for x in s.points() {
            assert!((m.values[x] - o[x]).abs() <= 1e-12 * o[x].max(1.0));
            if s.in_omega(x, 1) {
                assert!(m.values[x] >= f[x].abs());
            } else {
                assert_eq!(m.values[x], 0.0);
            }
        }
    }
}

#[test]
fn zero_battery_and_scaling() {
    let (s, t) = line(121, 2);
    let zero = vec![0.0; s.len()];
    let c = maximal_checks(&s, &t, 1, &[zero], &[1.5, 2.0], &[0.1, 1.0]).unwrap();
    assert!(c.finite);
    assert_eq!(c.weak_constant, 0.0);
    assert!(c.lp_ratios.iter().all(|(_, r)| *r == 0.0));

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let f: Vec<f64> = (0..s.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let f2: Vec<f64> = f.iter().map(|v| 2.0 * v).collect();
    let (m, m2) = (local_maximal(&s, &t, 1, &f).unwrap(), local_maximal(&s, &t, 1, &f2).unwrap());
    assert!(m.values.iter().zip(&m2.values).all(|(a, b)| 2.0 * a == *b));
    let a = maximal_checks(&s, &t, 1, &[f.clone()], &[2.0], &[0.25]).unwrap();
    let b = maximal_checks(&s, &t, 1, &[f2], &[2.0], &[0.5]).unwrap();
    assert_eq!(a.weak_constant, b.weak_constant);
    assert_eq!(a.weak_per_function, b.weak_per_function);
}

#[test]
fn weak_constant_is_stable() {
    let (s, t) = line(241, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut battery = Vec::new();
    for k in 0..12 {
        let f: Vec<f64> = match k % 3 {
            0 => (0..s.len()).map(|_| rng.random_range(-1.0..1.0)).collect(),
            1 => {
                let c = rng.random_range(80..160);
                (0..s.len()).map(|x| if x == c { 1.0 } else { 0.0 }).collect()
            }
            _ => {
                let c = rng.random_range(80..150);
                (0..s.len()).map(|x| if (c..c + 7).contains(&x) { 3.0 } else { 0.0 }).collect()
            }
        };
        battery.push(f);
    }
    let c = maximal_checks(&s, &t, 1, &battery, &[1.5, 2.0, 4.0], &[0.01, 0.1, 0.5, 1.0]).unwrap();
    assert!(c.finite);
    assert!(c.weak_stable, "{:?}", c.weak_per_function);
    assert!(c.lp_ratios.iter().all(|(_, r)| r.is_finite() && *r >= 1.0));
}

#[test]
fn vitali_examples() {
    let (s, t) = line(41, 1);
    assert!(maximal_radius(&t, 1).unwrap() >= 2.0);
    let fam = |centers: &[PointId], r: f64| centers.iter().map(|&center| FamilyBall { center, radius: r }).collect::<Vec<_>>();

    // Open unit balls on the integer line are singletons.
    let rep = vitali_select(&s, &t, 1, &fam(&[0, 1, 5], 1.0)).unwrap();
    assert_eq!(rep.selected, vec![0, 1, 2]);

    let rep = vitali_select(&s, &t, 1, &fam(&[0, 1, 5], 1.5)).unwrap();
    assert_eq!(rep.selected, vec![0, 2]);
    assert!(rep.disjoint && rep.covered);
    assert_eq!((rep.selected_measure, rep.union_measure), (5.0, 6.0));

    let rep = vitali_select(&s, &t, 1, &fam(&[5, 1, 0], 1.5)).unwrap();
    assert_eq!(rep.selected, vec![2, 0]);

    let rep = vitali_select(&s, &t, 1, &fam(&[3, 9, 20], 2.0)).unwrap();
    assert_eq!(rep.selected.len(), 3);
    assert_eq!(rep.c, 1.0);

    let rep = vitali_select(&s, &t, 1, &fam(&[7], 2.0)).unwrap();
    assert_eq!(rep.selected, vec![0]);
    assert!(rep.covered);

    let mixed = vec![FamilyBall { center: 10, radius: 1.0 }, FamilyBall { center: 11, radius: 2.0 }];
    assert_eq!(vitali_select(&s, &t, 1, &mixed).unwrap().selected, vec![1]);
}

#[test]
fn vitali_rejects_invalid_families() {
    let (s, t) = line(41, 2);
    let r_n = maximal_radius(&t, 1).unwrap();
    let bad = |center, radius| vitali_select(&s, &t, 1, &[FamilyBall { center, radius }]);
    assert!(matches!(bad(20, r_n * 1.01), Err(Error::Input(_))));
    assert!(matches!(bad(20, 0.0), Err(Error::Input(_))));
    assert!(matches!(bad(0, r_n), Err(Error::Input(_))));
    assert!(matches!(bad(99, r_n), Err(Error::UnknownPoint(99))));
    assert!(bad(20, r_n).is_ok());
}

#[test]
fn vitali_random_families() {
    let (s, t) = line(121, 2);
    let r_n = maximal_radius(&t, 1).unwrap();
    let omega = s.omega(1);
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let family: Vec<FamilyBall> = (0..rng.random_range(1..40))
            .map(|_| FamilyBall {
                center: omega.as_slice()[rng.random_range(0..omega.len())],
                radius: rng.random_range(0.01..=1.0) * r_n,
            })
            .collect();
        let rep = vitali_select(&s, &t, 1, &family).unwrap();
        assert!(rep.disjoint && rep.covered, "seed {seed}: {:?}", rep.witness);
        assert!(rep.c > 0.0 && rep.c <= 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn domination_sublinearity_homogeneity(
        f in proptest::collection::vec(-4.0f64..4.0, 41),
        g in proptest::collection::vec(-4.0f64..4.0, 41),
        k in -3i32..4,
        neg in any::<bool>(),
    ) {
        let (s, t) = line(41, 1);
        let mf = local_maximal(&s, &t, 1, &f).unwrap().values;
        let mg = local_maximal(&s, &t, 1, &g).unwrap().values;
        let sum: Vec<f64> = f.iter().zip(&g).map(|(a, b)| a + b).collect();
        let msum = local_maximal(&s, &t, 1, &sum).unwrap().values;
        let lambda = if neg { -(2f64.powi(k)) } else { 2f64.powi(k) };
        let scaled: Vec<f64> = f.iter().map(|v| lambda * v).collect();
        let mscaled = local_maximal(&s, &t, 1, &scaled).unwrap().values;
        for x in s.points() {
            prop_assert!(mf[x] >= f[x].abs());
            prop_assert!(msum[x] <= (mf[x] + mg[x]) * (1.0 + 4.0 * f64::EPSILON));
            prop_assert_eq!(mscaled[x], lambda.abs() * mf[x]);
        }
    }
}
