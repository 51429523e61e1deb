mod common;

use approx::assert_relative_eq;
use common::*;
use lbp::convergence::*;
use lbp::strength::{interaction_weight, mooij_strength};
use lbp::{DirectedEdge, Strengths};
use proptest::prelude::*;

const D: f64 = 1.5275252316519468; // sqrt(7/3)

fn verdict(g: &str, eta: f64, c: Condition) -> lbp::Verdict {
    let m = build(g, eta);
    let s = Strengths::from_model(&m).unwrap();
    evaluate(&m, &s, c).unwrap()
}

#[test]
fn uniform_condition_examples() {
    let v = verdict("complete:4", 0.7, Condition::Uniform);
    assert_relative_eq!(v.statistic, 2.0 * (D - 1.0) / (D + 1.0), epsilon = 1e-14);
    assert!((v.statistic - 0.4174).abs() < 1e-4);
    assert!(v.holds);
    let v = verdict("torus:3x3", 0.7, Condition::Uniform);
    assert!((v.statistic - 0.626).abs() < 1e-3);
    assert!(!v.holds);
    assert!(matches!(v.witness, Some(Witness::Edge(_))));
    for c in [Condition::Uniform, Condition::IhlerUniform, Condition::Bethe { depth: None }, Condition::SelfAvoiding, Condition::WalkSum] {
        let v = verdict("grid:3x3", 0.5, c);
        assert_eq!(v.statistic, 0.0, "{c}");
        assert!(v.holds);
    }
}

#[test]
fn regular_graph_closed_forms() {
    for (g, deg) in [("complete:4", 3.0), ("torus:3x3", 4.0), ("cycle:6", 2.0)] {
        for eta in [0.55, 0.65, 0.8] {
            let m = build(g, eta);
            let s = Strengths::from_model(&m).unwrap();
            let w = interaction_weight((eta / (1.0 - eta)).sqrt());
            let walk = walk_summability(&m, &s);
            assert_relative_eq!(walk.statistic, (deg - 1.0) * w, max_relative = 1e-8);
            for n in [1, 3, 8] {
                let b = nonuniform_condition(&m, &s, Condition::Bethe { depth: Some(n) }).unwrap();
                assert_relative_eq!(b.statistic, (w * (deg - 1.0)).powi(n as i32), max_relative = 1e-12);
                assert_eq!(b.holds, w * (deg - 1.0) < 1.0);
            }
        }
    }
}

#[test]
fn spectral_radius_matches_dense_power_iteration() {
    let m = random_model(&mut rng(9), 6, 2, 0.6, 1.0);
    let s = Strengths::from_model(&m).unwrap();
    let a = InteractionMatrix::new(&m, &s);
    let dense = a.to_dense();
    for (i, row) in dense.iter().enumerate() {
        assert_eq!(row[i], 0.0);
        assert!(row.iter().all(|&x| x >= 0.0));
    }
    // Gelfand: ||A^k||^(1/k) with the row-sum norm
    let n = dense.len();
    let mut p = dense.clone();
    let k = 512;
    let mut log_scale = 0.0;
    for _ in 1..k {
        let mut q = vec![vec![0.0; n]; n];
        for i in 0..n {
            for l in 0..n {
                if p[i][l] != 0.0 {
                    for j in 0..n {
                        q[i][j] += p[i][l] * dense[l][j];
                    }
                }
            }
        }
        let norm = q.iter().map(|r| r.iter().sum::<f64>()).fold(0.0, f64::max);
        log_scale += norm.ln();
        p = q.into_iter().map(|r| r.into_iter().map(|x| x / norm).collect()).collect();
    }
    let gelfand = (log_scale / k as f64).exp();
    assert_relative_eq!(a.spectral_radius(), gelfand, max_relative = 1e-2);
}

#[test]
fn critical_values() {
    let tol = 1e-4f64;
    assert_relative_eq!(critical_eta(&topo("complete:4"), Condition::Uniform, tol).unwrap(), 25.0 / 34.0, epsilon = tol);
    assert_relative_eq!(critical_eta(&topo("torus:3x3"), Condition::Uniform, tol).unwrap(), 49.0 / 74.0, epsilon = tol);
    assert_relative_eq!(critical_eta(&topo("complete:4"), Condition::IhlerUniform, tol).unwrap(), 0.75, epsilon = tol);
    assert_relative_eq!(critical_eta(&topo("torus:3x3"), Condition::WalkSum, tol).unwrap(), 2.0 / 3.0, epsilon = tol);
    assert!((critical_eta(&topo("k4minus"), Condition::SelfAvoiding, tol).unwrap() - 0.78).abs() < 0.01);
    assert!((critical_eta(&topo("grid:3x3"), Condition::SelfAvoiding, tol).unwrap() - 0.77).abs() < 0.01);
}

#[test]
fn bisection_edge_cases() {
    assert_eq!(bisect_threshold(0.0, 1.0, 1e-3, |_| Ok(true)).unwrap(), 1.0);
    assert_eq!(bisect_threshold(0.0, 1.0, 1e-3, |_| Ok(false)).unwrap(), 0.0);
    assert!((bisect_threshold(0.0f64, 1.0, 1e-6, |x| Ok(x < 0.3)).unwrap() - 0.3).abs() < 1e-6);
}

#[test]
fn ordering_report() {
    let m = build("torus:3x3", 0.66);
    let s = Strengths::from_model(&m).unwrap();
    let r = condition_ordering_report(&m, &s, 18).unwrap();
    assert!(r.verdicts[..3].iter().all(|v| v.holds));
    // the self-avoiding statistic counts cycle closures at full weight and is stricter here
    assert!(!r.verdicts[3].holds);
    assert!(r.violations.is_empty());
    // just above the finite walk-sum threshold of the non-regular graph, below its spectral one
    let m = build("k4minus", 0.825);
    let s = Strengths::from_model(&m).unwrap();
    let r = condition_ordering_report(&m, &s, 8).unwrap();
    assert_eq!(r.violations, vec![Violation { premise: Condition::WalkSum, conclusion: Condition::Bethe { depth: Some(8) } }]);
    for i in 0..=45 {
        let m = build("complete:4", 0.5 + 0.01 * i as f64);
        let s = Strengths::from_model(&m).unwrap();
        assert!(condition_ordering_report(&m, &s, 8).unwrap().violations.is_empty());
    }
}

#[test]
fn partial_graph_ordering() {
    let r = partial_graph_ordering_check(&topo("k4minus"), &topo("complete:4"), Condition::SelfAvoiding, 1e-3).unwrap();
    assert!(r.holds && r.big_critical < r.small_critical);
    let r = partial_graph_ordering_check(&topo("grid:3x3"), &topo("torus:3x3"), Condition::WalkSum, 1e-3).unwrap();
    assert!(r.holds);
    let r = partial_graph_ordering_check(&topo("grid:3x3"), &topo("grid:3x3"), Condition::SelfAvoiding, 1e-3).unwrap();
    assert_eq!(r.small_critical, r.big_critical);
    assert!(partial_graph_ordering_check(&topo("complete:4"), &topo("k4minus"), Condition::WalkSum, 1e-3).is_err());
}

#[test]
fn rate_metric_examples() {
    let m = build("torus:3x3", 0.6);
    let s = Strengths::from_model(&m).unwrap();
    assert_relative_eq!(rate_metric(&m, &s, DirectedEdge::new(0, 1)).unwrap(), 0.4, epsilon = 1e-12);
    let flat = build("grid:3x3", 0.5);
    let s = Strengths::from_model(&flat).unwrap();
    assert_eq!(rate_metric(&flat, &s, DirectedEdge::new(0, 1)).unwrap(), 1.0);
    let m = build("complete:4", 0.75);
    let s = Strengths::from_model(&m).unwrap();
    assert!(rate_metric(&m, &s, DirectedEdge::new(0, 1)).unwrap() < 1e-12);
    assert!(rate_metric(&m, &s, DirectedEdge::new(0, 0)).is_err());
}

#[test]
fn empirical_convergence() {
    let cfg = EmpiricalConfig { runs: 6, ..EmpiricalConfig::default() };
    assert!(converges_uniquely(&build("complete:4", 0.7), &cfg).unwrap());
    assert!(!converges_uniquely(&build("complete:4", 0.8), &cfg).unwrap());
    assert!(!converges_uniquely(&build("torus:3x3", 0.3), &cfg).unwrap());
}

#[test]
fn condition_names() {
    for s in ["uniform", "ihler-uniform", "nonuniform-bethe", "nonuniform-bethe:7", "nonuniform-saw", "walksum"] {
        assert_eq!(s.parse::<Condition>().unwrap().to_string(), s);
    }
    assert!("bethe".parse::<Condition>().is_err());
    assert!("nonuniform-bethe:x".parse::<Condition>().is_err());
    let m = build("cycle:4", 0.6);
    let s = Strengths::from_model(&m).unwrap();
    assert!(nonuniform_condition(&m, &s, Condition::Bethe { depth: Some(0) }).is_err());
    assert!(nonuniform_condition(&m, &s, Condition::Uniform).is_err());
    let v = evaluate(&m, &s, Condition::Bethe { depth: None }).unwrap();
    assert_eq!(v.condition, Condition::Bethe { depth: Some(8) });
}

proptest! {
    #[test]
    fn interaction_weight_is_mooij_strength(v in prop::collection::vec(-3.0f64..3.0, 4)) {
        let p = lbp::Matrix::from_vec(2, 2, v.into_iter().map(f64::exp).collect()).unwrap();
        let d = lbp::strength::potential_strength(&p).unwrap();
        prop_assert!((interaction_weight(d) - mooij_strength(&p).unwrap()).abs() < 1e-12);
    }
}
