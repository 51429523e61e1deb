mod common;

use approx::assert_relative_eq;
use common::*;
use lbp::accuracy::*;
use lbp::bp::{run_synchronous, Init, RunStatus};
use lbp::{Error, Mrf, Strengths};
use proptest::prelude::*;

#[test]
fn oracle_examples() {
    let mut m = Mrf::binary(1);
    m.set_node_potential(0, vec![2.0, 6.0]).unwrap();
    let p = exact_marginals(&m).unwrap();
    assert_relative_eq!(p[0][0], 0.25, epsilon = 1e-15);
    assert_relative_eq!(p[0][1], 0.75, epsilon = 1e-15);
    let mut m = build("chain:2", 0.7);
    m.set_node_potential(0, vec![2.0, 1.0]).unwrap();
    // x1 = 0: 2·0.7 + 1·0.3; x1 = 1: 2·0.3 + 1·0.7
    let p = exact_marginals(&m).unwrap();
    assert_relative_eq!(p[1][0], 1.7 / 3.0, epsilon = 1e-15);
    assert_relative_eq!(p[0][0], 2.0 / 3.0, epsilon = 1e-15);
}

#[test]
fn oracle_matches_plain_enumeration() {
    let mut r = rng(31);
    for _ in 0..20 {
        let m = random_model(&mut r, 6, 3, 0.6, 3.0);
        let a = exact_marginals(&m).unwrap();
        let b = brute_marginals(&m);
        for (x, y) in a.iter().zip(&b) {
            for (p, q) in x.iter().zip(y) {
                assert!((p - q).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn oracle_is_log_stable() {
    // plain products overflow here
    let base = build("complete:8", 0.5);
    let mut m = Mrf::binary(8);
    for &(i, j) in base.edges() {
        m.add_edge(i, j, lbp::Matrix::from_rows(&[&[1e200, 1e-200], &[1e-200, 1e200]])).unwrap();
    }
    let p = exact_marginals(&m).unwrap();
    assert!(p.iter().flatten().all(|x| x.is_finite()));
    assert_relative_eq!(p[0][0], 0.5, epsilon = 1e-12);
}

#[test]
fn oracle_refuses_large_state_spaces() {
    assert!(matches!(exact_marginals(&build("grid:5x5", 0.6)), Err(Error::StateSpaceTooLarge(_))));
}

#[test]
fn interval_examples() {
    let b = [0.5, 0.5];
    let a = accuracy_bound(&b, 2f64.sqrt(), 1.3).unwrap();
    assert_relative_eq!(a.lower[0], 0.5 / 1.3, epsilon = 1e-12);
    assert!((a.lower[0] - 0.3846).abs() < 1e-4);
    assert_relative_eq!(a.upper[0], 0.65, epsilon = 1e-12);
    let exact = accuracy_bound(&[0.3, 0.7], 1.0, 1.0).unwrap();
    assert_eq!(exact.lower, vec![0.3, 0.7]);
    assert_eq!(exact.upper, vec![0.3, 0.7]);
    assert!(accuracy_bound(&b, 0.5, 2.0).is_err());
    assert!(accuracy_bound(&[0.5, 0.6], 2.0, 2.0).is_err());
}

#[test]
fn tree_bounds_collapse() {
    let m = random_tree(&mut rng(6), 8, 3, 2.0);
    let s = Strengths::from_model(&m).unwrap();
    let run = run_synchronous(&m, Init::Uniform, 100, 1e-13).unwrap();
    let exact = exact_marginals(&m).unwrap();
    for v in 0..8 {
        assert_eq!(saw_error_bounds(&m, &s, v).unwrap(), (0.0, 0.0));
        let a = saw_accuracy(&m, &s, v, &run.beliefs[v]).unwrap();
        assert_eq!((a.delta, a.epsilon), (1.0, 1.0));
        for (p, q) in run.beliefs[v].iter().zip(&exact[v]) {
            assert!((p - q).abs() < 1e-10);
        }
    }
}

fn containment(m: &Mrf, slack: f64) -> usize {
    let s = Strengths::from_model(m).unwrap();
    let run = run_synchronous(m, Init::Uniform, 5000, 1e-12).unwrap();
    if run.status != RunStatus::Converged {
        return 0;
    }
    let exact = exact_marginals(m).unwrap();
    (0..m.num_nodes()).filter(|&v| !saw_accuracy(m, &s, v, &run.beliefs[v]).unwrap().contains(&exact[v], slack)).count()
}

#[test]
fn grid_intervals_contain_exact_marginals() {
    let mut m = build("grid:3x3", 0.6);
    assert_eq!(containment(&m, 0.0), 0);
    for v in 0..9 {
        m.set_node_potential(v, vec![1.0 + 0.1 * v as f64, 1.0]).unwrap();
    }
    assert_eq!(containment(&m, 0.0), 0);
}

#[test]
fn random_model_containment() {
    let mut r = rng(77);
    for _ in 0..200 {
        let m = random_model(&mut r, 5, 3, 0.6, 1.5);
        assert_eq!(containment(&m, 1e-9), 0);
    }
}

#[test]
fn csv_rows() {
    let a = accuracy_bound(&[0.25, 0.75], 1.0, 1.0).unwrap();
    assert_eq!(accuracy_csv_rows(3, &a, Some(&[0.25, 0.75])), "3,0,0.25,0.25,0.25,0.25\n3,1,0.75,0.75,0.75,0.75\n");
    assert_eq!(accuracy_csv_rows(0, &a, None).lines().next().unwrap(), "0,0,0.25,,0.25,0.25");
    assert_eq!(ACCURACY_CSV_HEADER, "node,state,belief,exact,lower,upper");
}

fn belief() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, 2..5).prop_map(|v| {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    })
}

proptest! {
    #[test]
    fn interval_invariants(b in belief(), log_delta in 0.0f64..3.0, log_eps in 0.0f64..3.0) {
        let (delta, eps) = (log_delta.exp(), log_eps.exp());
        let a = accuracy_bound(&b, delta, eps).unwrap();
        let only_delta = accuracy_bound(&b, delta, 1e150).unwrap();
        let only_eps = accuracy_bound(&b, 1e150, eps).unwrap();
        for x in 0..b.len() {
            prop_assert!(a.lower[x] > 0.0 && a.upper[x] <= eps * b[x] + 1e-12);
            prop_assert!(a.lower[x] <= b[x] && b[x] <= a.upper[x]);
            prop_assert!(only_delta.upper[x] < 1.0);
            for c in [&only_delta, &only_eps] {
                prop_assert!(a.lower[x] >= c.lower[x] - 1e-15 && a.upper[x] <= c.upper[x] + 1e-15);
            }
        }
        prop_assert!(only_delta.lower.iter().sum::<f64>() <= 1.0 + 1e-12);
        prop_assert!(only_delta.upper.iter().sum::<f64>() >= 1.0 - 1e-12);
        prop_assert!(a.lower.iter().sum::<f64>() <= 1.0 + 1e-12);
        prop_assert!(a.upper.iter().sum::<f64>() >= 1.0 - 1e-12);
    }
}
