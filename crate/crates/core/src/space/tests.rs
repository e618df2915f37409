use super::*;
use proptest::prelude::*;

fn line(n: usize, levels: Vec<u32>) -> FiniteSpace {
    FiniteSpace::new(Metric::Euclidean, (0..n).map(|i| vec![i as f64]).collect(), vec![1.0; n], levels).unwrap()
}

fn two_point(a: f64, b: f64) -> FiniteSpace {
    FiniteSpace::new(Metric::Matrix(vec![0.0, a, b, 0.0]), vec![], vec![1.0; 2], vec![1; 2]).unwrap()
}

#[test]
fn ball_examples() {
    let s = line(10, vec![1; 10]);
    assert_eq!(s.ball(5, 2.5).unwrap().as_slice(), &[3, 4, 5, 6, 7]);
    assert_eq!(s.ball(5, 1.0).unwrap().as_slice(), &[5]);
    assert_eq!(s.ball(0, 100.0).unwrap().len(), 10);
    assert_eq!(s.coball(5, 2.5).unwrap(), s.ball(5, 2.5).unwrap());
    assert!(matches!(s.ball(10, 1.0), Err(Error::UnknownPoint(10))));
    assert!(s.ball(1, 0.0).is_err());
}

#[test]
fn coball_reverses_arguments() {
    let s = two_point(1.0, 3.0);
    assert!(!s.is_symmetric());
    assert_eq!(s.coball(1, 2.0).unwrap().as_slice(), &[0, 1]);
    assert_eq!(s.ball(1, 2.0).unwrap().as_slice(), &[1]);
}

#[test]
fn estimate_constants_examples() {
    let levels = (0..10).map(|i| if (3..=6).contains(&i) { 1 } else { 2 }).collect();
    let s = line(10, levels);
    let e = estimate_constants(&s, 1).unwrap();
    assert_eq!(e.b_raw, 1.0);
    assert_eq!(e.constants.b, 2.0);
    assert_eq!(e.constants.a, 1.0);

    let s = two_point(1.0, 3.0);
    assert_eq!(estimate_constants(&s, 1).unwrap().constants.a, 3.0);
}

/// Doubling constant on the grid 0..9 with `Ω_1 = {4,5}`, by sweeping every
/// radius on a fine rational grid instead of the distinct distances.
#[test]
fn doubling_constant_matches_fine_sweep() {
    let levels = (0..10).map(|i| if i == 4 || i == 5 { 1 } else { 2 }).collect();
    let s = line(10, levels);
    let e = estimate_constants(&s, 1).unwrap().constants;
    // Ω_2 is everything, so ε_1 = diam / 2 = 4.5.
    assert_eq!(e.eps, 4.5);
    let mut best = 1.0f64;
    for x in [4usize, 5] {
        for step in 1..=4500 {
            let r = step as f64 / 1000.0;
            let count = |rad: f64| (0..10).filter(|&y| (x as f64 - y as f64).abs() < rad).count() as f64;
            best = best.max(count(2.0 * r) / count(r));
        }
    }
    // At x = 4, r just above 1: B(4,r) has 3 points, B(4,2r) has 5. At r = 1: 1 vs 3.
    assert_eq!(best, 3.0);
    assert_eq!(e.c, best);
}

#[test]
fn engulfing_radius_is_half_the_gap() {
    // Ω_1 = {7..12}, Ω_2 = {4..15}: nearest outside point is 3 steps from 7... 7 - 3 = 4.
    let s = generate(&Generator::EuclideanGrid { dim: 1, side: 20, levels: 3, spacing: 1.0 }).unwrap();
    assert_eq!(s.omega(1).as_slice(), &(7..=12).collect::<Vec<_>>()[..]);
    assert_eq!(s.omega(2).as_slice(), &(4..=15).collect::<Vec<_>>()[..]);
    let e = estimate_constants(&s, 1).unwrap();
    assert_eq!(e.constants.eps, 2.0);
    for x in s.omega(1).iter() {
        assert!(s.ball(x, 2.0 * e.constants.eps).unwrap().is_subset(&s.omega(2)));
    }
}

#[test]
fn symmetrize_examples() {
    let s = two_point(2.0, 1.0).symmetrize();
    assert!(s.is_symmetric());
    assert_eq!(s.rho(0, 1), 3.0);
    assert_eq!(s.rho(1, 0), 3.0);
    assert_eq!(s.rho(0, 0), 0.0);
    let g = line(6, vec![1; 6]);
    let gs = g.symmetrize();
    for x in g.points() {
        for y in g.points() {
            assert_eq!(gs.rho(x, y), 2.0 * g.rho(x, y));
        }
    }
}

#[test]
fn separation_violation_is_named() {
    let err = FiniteSpace::new(Metric::Matrix(vec![0.0, 0.0, 1.0, 0.0]), vec![], vec![1.0; 2], vec![1; 2]).unwrap_err();
    assert!(matches!(err, Error::Axiom { axiom: "(H1)(a)", .. }), "{err}");
    let err = FiniteSpace::new(Metric::Euclidean, vec![vec![1.0], vec![1.0]], vec![1.0; 2], vec![1; 2]).unwrap_err();
    assert!(matches!(err, Error::Axiom { axiom: "(H1)(a)", .. }));
}

#[test]
fn generators() {
    let s = generate(&"euclidean-grid:dim=1,side=10,levels=3".parse().unwrap()).unwrap();
    assert_eq!(s.len(), 10);
    assert!(s.omega(1).len() < s.omega(2).len() && s.omega(2).len() < s.omega(3).len());
    assert_eq!(s.omega(3).len(), 10);

    let a = generate(&Generator::AsymmetricGrid { side: 10, skew: 3.0, levels: 2, spacing: 1.0 }).unwrap();
    assert_eq!(estimate_constants(&a, 1).unwrap().constants.a, 3.0);
    assert!(generate(&Generator::AsymmetricGrid { side: 10, skew: 0.5, levels: 2, spacing: 1.0 }).is_err());

    let h = generate(&Generator::HeisenbergGrid { side: 5, levels: 2, spacing: 1.0 }).unwrap();
    assert_eq!(h.len(), 125);
    assert!(h.symmetry_violation().is_none());
    let b = estimate_constants(&h, 2).unwrap();
    assert!(b.constants.b.is_finite() && b.b_raw >= 1.0);

    let p = generate(&"parabolic-grid:side=6,levels=2".parse().unwrap()).unwrap();
    assert_eq!(p.rho(0, 6), 1.0);
}

#[test]
fn space_file_round_trip() {
    let a = generate(&Generator::AsymmetricGrid { side: 8, skew: 2.0, levels: 2, spacing: 1.0 }).unwrap();
    for s in [a.clone(), a.symmetrize(), two_point(1.0, 3.0)] {
        let json = serde_json::to_string(&SpaceFile::from_space(&s)).unwrap();
        let back: SpaceFile = serde_json::from_str(&json).unwrap();
        let back = back.into_space().unwrap();
        for x in s.points() {
            for y in s.points() {
                assert_eq!(s.rho(x, y), back.rho(x, y));
            }
        }
        assert_eq!(s.levels(), back.levels());
    }
}

#[test]
fn declared_constants_are_checked() {
    let s = generate(&Generator::EuclideanGrid { dim: 1, side: 20, levels: 3, spacing: 1.0 }).unwrap();
    let bad = vec![LevelConstants { n: 1, eps: 5.0, b: 2.0, c: 3.0, a: 1.0 }];
    let err = ConstantsTable::estimate(&s.clone().with_declared_constants(bad), 2).unwrap_err();
    assert!(matches!(err, Error::Axiom { axiom: "(Hp 1)", .. }));
    let good = vec![LevelConstants { n: 1, eps: 1.0, b: 4.0, c: 10.0, a: 1.0 }];
    let t = ConstantsTable::estimate(&s.with_declared_constants(good), 2).unwrap();
    assert_eq!(t.get(1).unwrap().b, 4.0);
    assert_eq!(t.get(2).unwrap().b, 4.0);
}

fn random_space() -> impl Strategy<Value = FiniteSpace> {
    (2usize..9).prop_flat_map(|n| {
        (
            proptest::collection::vec(0.1f64..10.0, n * n),
            proptest::collection::vec(0.5f64..3.0, n),
            proptest::collection::vec(1u32..4, n),
        )
            .prop_map(move |(mut m, w, mut l)| {
                l[0] = 1;
                for i in 0..n {
                    m[i * n + i] = 0.0;
                }
                FiniteSpace::new(Metric::Matrix(m), vec![], w, l).unwrap()
            })
    })
}

proptest! {
    #[test]
    fn ball_monotone(s in random_space(), r1 in 0.01f64..12.0, dr in 0.0f64..5.0) {
        for x in s.points() {
            prop_assert!(s.ball(x, r1).unwrap().is_subset(&s.ball(x, r1 + dr).unwrap()));
            prop_assert!(s.ball(x, r1).unwrap().contains(x));
        }
    }

    #[test]
    fn quasitriangle_is_tight(s in random_space()) {
        let top = s.max_level();
        let e = estimate_constants(&s, top).unwrap();
        let om = s.omega(top);
        for x in om.iter() { for y in om.iter() { for z in om.iter() {
            if x != y {
                prop_assert!(s.rho(x, y) <= e.b_raw * (s.rho(x, z) + s.rho(z, y)) * (1.0 + 1e-12));
            }
        }}}
        if let Some((x, y, z)) = e.b_witness {
            let r = s.rho(x, y) / (s.rho(x, z) + s.rho(z, y));
            prop_assert!((r - e.b_raw).abs() <= 1e-12 * e.b_raw);
        }
    }

    #[test]
    fn symmetrized_sandwich(s in random_space()) {
        let sy = s.symmetrize();
        prop_assert!(sy.symmetry_violation().is_none());
        let top = s.max_level();
        for n in 1..=top {
            let a = estimate_constants(&s, n).unwrap().constants.a;
            let om = s.omega(n);
            for x in om.iter() { for y in om.iter() {
                prop_assert!(s.rho(x, y) <= sy.rho(x, y));
                prop_assert!(sy.rho(x, y) <= (1.0 + a) * s.rho(x, y) * (1.0 + 1e-12));
            }}
        }
    }

    #[test]
    fn engulfing_and_doubling_hold(s in random_space()) {
        let top = s.max_level();
        let table = ConstantsTable::estimate(&s, top).unwrap();
        for n in 1..top {
            let c = table.get(n).unwrap();
            let next = s.omega(n + 1);
            for x in s.omega(n).iter() {
                prop_assert!(s.ball(x, 2.0 * c.eps).unwrap().is_subset(&next));
                prop_assert!(s.coball(x, 2.0 * c.eps).unwrap().is_subset(&next));
                for k in 1..=50 {
                    let r = (c.eps * k as f64 / 50.0).min(c.eps);
                    let big = s.measure(&s.ball(x, 2.0 * r).unwrap());
                    let small = s.measure(&s.ball(x, r).unwrap());
                    prop_assert!(big <= c.c * small * (1.0 + 1e-12));
                }
            }
        }
        for w in table.levels().windows(2) {
            prop_assert!(w[1].eps <= w[0].eps && w[1].b >= w[0].b && w[1].c >= w[0].c);
        }
    }
}
