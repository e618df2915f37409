use super::*;
use crate::space::{generate, ConstantsTable, Generator, Metric};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid(dim: usize, side: usize) -> FiniteSpace {
    generate(&Generator::EuclideanGrid { dim, side, levels: 3, spacing: 1.0 }).unwrap()
}

/// Dijkstra on the complete graph with weights `ρ^α` over `Ω_n`: an
/// independent chain-cost oracle.
fn dijkstra_chain(space: &FiniteSpace, members: &PointSet, alpha: f64, src: PointId) -> Vec<f64> {
    let ids = members.as_slice();
    let m = ids.len();
    let s = members.index_of(src).unwrap();
    let mut dist = vec![f64::INFINITY; m];
    let mut done = vec![false; m];
    dist[s] = 0.0;
    for _ in 0..m {
        let u = (0..m).filter(|&i| !done[i]).min_by(|&a, &b| dist[a].total_cmp(&dist[b])).unwrap();
        done[u] = true;
        for v in 0..m {
            let w = space.rho(ids[u], ids[v]).powf(alpha);
            if dist[u] + w < dist[v] {
                dist[v] = dist[u] + w;
            }
        }
    }
    dist
}

#[test]
fn two_point_chain() {
    let s = FiniteSpace::new(Metric::Matrix(vec![0.0, 4.0, 4.0, 0.0]), vec![], vec![1.0; 2], vec![1; 2]).unwrap();
    let d = order_alpha_distance(&s, 1, 2.0, AlphaChoice::Formula).unwrap();
    assert_eq!(d.chain[1], 4f64.powf(d.alpha));
    assert!((d.d(0, 1).unwrap() - 4.0).abs() < 1e-12);
}

#[test]
fn formula_alpha() {
    let a = AlphaChoice::Formula.alpha(2.0);
    assert!((a - 0.27894).abs() < 5e-6, "{a}");
    assert_eq!(AlphaChoice::Metric.alpha(2.0), 1.0);
}

#[test]
fn chain_matches_dijkstra_and_is_equivalent() {
    for s in [grid(1, 20), grid(2, 15)] {
        let t = ConstantsTable::estimate(&s, 3).unwrap();
        for n in [1u32, 2] {
            let b = t.get(n).unwrap().b;
            let d = order_alpha_distance(&s, n, b, AlphaChoice::Formula).unwrap();
            let m = d.members.len();
            for (i, x) in d.members.iter().enumerate().step_by(3) {
                let oracle = dijkstra_chain(&s, &d.members, d.alpha, x);
                for j in 0..m {
                    let got = d.chain[i * m + j];
                    assert!((got - oracle[j]).abs() <= 1e-12 * oracle[j].max(1.0));
                }
            }
            assert!(d.chain_triangle_violation().is_none());
            assert!(d.c_low >= 0.25 && d.c_high <= 4.0, "{} {}", d.c_low, d.c_high);
            assert!(d.order_constant.is_finite());
        }
    }
}

#[test]
fn metric_flag_reproduces_rho_on_line() {
    let s = grid(1, 20);
    let d = order_alpha_distance(&s, 3, 2.0, AlphaChoice::Metric).unwrap();
    for x in d.members.iter() {
        for y in d.members.iter() {
            assert_eq!(d.d(x, y).unwrap(), s.rho(x, y));
        }
    }
    assert_eq!((d.c_low, d.c_high), (1.0, 1.0));
}

#[test]
fn heisenberg_chain_is_a_quasidistance() {
    let s = generate(&Generator::HeisenbergGrid { side: 4, levels: 2, spacing: 1.0 }).unwrap();
    let t = ConstantsTable::estimate(&s, 2).unwrap();
    let d = order_alpha_distance(&s, 2, t.get(2).unwrap().b, AlphaChoice::Formula).unwrap();
    assert!(d.chain_triangle_violation().is_none());
    assert!(d.c_low > 0.0 && d.c_high <= 1.0 + 1e-12);
    assert!(d.order_constant.is_finite());
}

#[test]
fn cutoff_examples() {
    let s = grid(1, 40);
    let d = order_alpha_distance(&s, 3, 2.0, AlphaChoice::Metric).unwrap();
    let phi = cutoff(&s, &d, 20, 4.0).unwrap();
    assert_eq!(phi.values[20], 1.0);
    // d(26, 20) = 6 = 1.5 r.
    assert_eq!(phi.values[26], 0.5);
    assert_eq!(psi(6.0, 4.0), 0.5);
    for x in s.points() {
        let v = phi.values[x];
        assert!((0.0..=1.0).contains(&v));
        if s.rho(20, x) < phi.inner_radius() {
            assert_eq!(v, 1.0);
        }
        if !(s.rho(20, x) < phi.outer_radius()) {
            assert_eq!(v, 0.0);
        }
    }
    let d1 = order_alpha_distance(&s, 1, 2.0, AlphaChoice::Metric).unwrap();
    assert!(cutoff(&s, &d1, 20, 1.0).is_ok());
    assert!(matches!(cutoff(&s, &d1, 20, 10.0), Err(Error::Range(_))));
}

#[test]
fn cutoff_holder_constant_is_stable() {
    let s = grid(1, 60);
    let t = ConstantsTable::estimate(&s, 3).unwrap();
    let d = order_alpha_distance(&s, 2, t.get(2).unwrap().b, AlphaChoice::Formula).unwrap();
    let cs: Vec<f64> = [8.0, 4.0, 2.0].iter().map(|&r| cutoff(&s, &d, 30, r).unwrap().holder_constant).collect();
    assert!(crate::report::within_factor(&cs, 4.0), "{cs:?}");
}

#[test]
fn holder_examples() {
    let s = grid(1, 10);
    let all: PointSet = s.points().collect();
    assert_eq!(holder_seminorm(&s, &[3.0; 10], 0.5, &all), 0.0);
    let mut f = vec![0.0; 10];
    f[9] = 1.0;
    let near: PointSet = [8, 9].into_iter().collect();
    assert_eq!(holder_seminorm(&s, &f, 1.0, &near), 1.0);

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let f: Vec<f64> = (0..10).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut brute = 0.0f64;
    for x in 0..10 {
        for y in 0..10 {
            if x != y {
                brute = brute.max((f[x] - f[y]).abs() / s.rho(x, y).powf(0.3));
            }
        }
    }
    assert_eq!(holder_seminorm(&s, &f, 0.3, &all), brute);
    assert_eq!(holder_norm(&s, &f, 0.3, &all), brute + f.iter().fold(0.0f64, |a, v| a.max(v.abs())));
}

proptest! {
    #[test]
    fn seminorm_subadditive_and_homogeneous(
        f in proptest::collection::vec(-5.0f64..5.0, 12),
        g in proptest::collection::vec(-5.0f64..5.0, 12),
        lambda in -3.0f64..3.0,
        eta in 0.1f64..1.0,
    ) {
        let s = grid(1, 12);
        let all: PointSet = s.points().collect();
        let sum: Vec<f64> = f.iter().zip(&g).map(|(a, b)| a + b).collect();
        let hf = holder_seminorm(&s, &f, eta, &all);
        let hg = holder_seminorm(&s, &g, eta, &all);
        prop_assert!(holder_seminorm(&s, &sum, eta, &all) <= (hf + hg) * (1.0 + 1e-12));
        let scaled: Vec<f64> = f.iter().map(|v| lambda * v).collect();
        let hs = holder_seminorm(&s, &scaled, eta, &all);
        prop_assert!((hs - lambda.abs() * hf).abs() <= 1e-12 * hf.max(1.0));
    }
}

#[test]
fn single_source_row_matches_all_pairs() {
    let s = grid(2, 12);
    let t = ConstantsTable::estimate(&s, 3).unwrap();
    let b = t.get(2).unwrap().b;
    let full = order_alpha_distance(&s, 2, b, AlphaChoice::Formula).unwrap();
    for x0 in [65, 66, 78] {
        let row = order_alpha_row(&s, 2, b, AlphaChoice::Formula, x0).unwrap();
        for y in full.members.iter() {
            let want = full.d(x0, y).unwrap();
            assert!((row.dist[y] - want).abs() <= 1e-12 * want.max(1.0));
        }
        assert!(row.c_low >= full.c_low * (1.0 - 1e-12) && row.c_high <= full.c_high * (1.0 + 1e-12));
        let a = cutoff(&s, &full, x0, 0.5).unwrap();
        let brute = holder_seminorm(&s, &a.values, a.alpha, &full.members) * 0.5f64.powf(a.alpha);
        assert!((a.holder_constant - brute).abs() <= 1e-12 * brute.max(1.0));
    }
}
