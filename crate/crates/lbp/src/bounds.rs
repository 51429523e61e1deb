use std::fmt::Write as _;

use crate::bp::{run_synchronous, Init, RunStatus, Wiring};
use crate::error::{Error, Result};
use crate::mrf::PairwiseMrf;
use crate::report::fmt_g;
use crate::scalar::{log_contraction, Scalar};
use crate::strength::{MessageStrength, StrengthTable};

fn check_at_least_one<F: Scalar>(name: &str, x: F) -> Result<()> {
    if x >= F::one() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {x} must be at least 1")))
    }
}

/// Maximum-error contraction `((d·d★·dE + 1)/(d·d★ + dE))²`.
///
/// `d` is the strength of the pairwise potential in the maximum-error sense and `d_star` that of
/// its marginal at the sender; `d_e` is the dynamic range of the incoming error product.
pub fn delta1<F: Scalar>(d: F, d_star: F, d_e: F) -> Result<F> {
    check_at_least_one("d", d)?;
    check_at_least_one("d_star", d_star)?;
    check_at_least_one("dE", d_e)?;
    let k = d * d_star;
    let r = (k * d_e + F::one()) / (k + d_e);
    Ok(r * r)
}

/// Dynamic-range contraction squared: `((d²·dE + 1)/(d² + dE))²`.
pub fn delta2<F: Scalar>(d: F, d_e: F) -> Result<F> {
    check_at_least_one("d", d)?;
    check_at_least_one("dE", d_e)?;
    let d2 = d * d;
    let r = (d2 * d_e + F::one()) / (d2 + d_e);
    Ok(r * r)
}

/// Bound-variation function families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariationKind {
    /// Maximum-error contraction with doubled log terms.
    Outer,
    /// Dynamic-range contraction with doubled log terms.
    Ihler,
    /// Dynamic-range contraction with single log terms.
    IhlerDynamic,
}

impl VariationKind {
    fn term<F: Scalar>(self, s: &MessageStrength<F>, z: F) -> F {
        let two = F::lit(2.0);
        match self {
            VariationKind::Outer => two * log_contraction(s.max_error(), z),
            VariationKind::Ihler => two * log_contraction(s.dynamic_range(), z),
            VariationKind::IhlerDynamic => log_contraction(s.dynamic_range(), z),
        }
    }

    fn slope_at_zero<F: Scalar>(self, s: &MessageStrength<F>) -> F {
        let (d, c) = match self {
            VariationKind::Outer => (s.max_error(), F::lit(2.0)),
            VariationKind::Ihler => (s.dynamic_range(), F::lit(2.0)),
            VariationKind::IhlerDynamic => (s.dynamic_range(), F::one()),
        };
        c * (d - F::one()) / (d + F::one())
    }

    fn saturation<F: Scalar>(self, s: &MessageStrength<F>) -> F {
        self.term(s, F::infinity())
    }
}

/// `Σ_t term(strength_t, log ε) − log ε` over the messages `t -> s` feeding `s -> p`.
pub fn bound_variation<F: Scalar>(kind: VariationKind, strengths: &[MessageStrength<F>], log_eps: F) -> Result<F> {
    if !(log_eps >= F::zero()) {
        return Err(Error::Domain(format!("log epsilon = {log_eps} must be non-negative")));
    }
    Ok(strengths.iter().map(|s| kind.term(s, log_eps)).sum::<F>() - log_eps)
}

/// Tolerance and iteration cap of the fixed-point solves.
pub const FIXED_POINT_TOL: f64 = 1e-12;
pub const FIXED_POINT_CAP: usize = 100_000;

/// Largest fixed point of `z ← max_(s→p) Σ_{t∈Γ_s∖p} term(t→s, z)`.
///
/// Every per-edge map is concave with value 0 at 0, so zero is the only fixed point exactly when
/// the largest slope at 0 is at most 1. Otherwise the iteration from the saturated value
/// decreases monotonically onto the nonzero crossing.
pub fn uniform_log_epsilon<F: Scalar>(model: &PairwiseMrf<F>, strengths: &StrengthTable<F>, kind: VariationKind) -> F {
    let wiring = Wiring::new(model);
    let max_over_edges = |f: &dyn Fn(&MessageStrength<F>) -> F| -> F {
        wiring
            .inputs
            .iter()
            .map(|(_, ins)| ins.iter().map(|&j| f(&strengths.message(j))).sum::<F>())
            .fold(F::zero(), F::max)
    };
    let slope = max_over_edges(&|s| kind.slope_at_zero(s));
    if slope <= F::one() {
        return F::zero();
    }
    let mut z = max_over_edges(&|s| kind.saturation(s));
    let tol = F::lit(FIXED_POINT_TOL);
    for _ in 0..FIXED_POINT_CAP {
        let next = max_over_edges(&|s| kind.term(s, z));
        let done = (z - next).abs() < tol;
        z = next;
        if done {
            break;
        }
    }
    z
}

/// Per-node bound from a common log ε: `Σ_{t∈Γ_s} term(t→s, log ε)`.
fn node_bounds<F: Scalar>(model: &PairwiseMrf<F>, strengths: &StrengthTable<F>, node_kind: VariationKind, z: F) -> Vec<F> {
    let wiring = Wiring::new(model);
    wiring
        .into_node
        .iter()
        .map(|ins| ins.iter().map(|&j| node_kind.term(&strengths.message(j), z)).sum())
        .collect()
}

/// Uniform bound on the log distance between any two fixed-point beliefs, per node, together
/// with the log ε it was assembled from.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformBound<F> {
    pub log_eps: F,
    pub per_node: Vec<F>,
}

/// Maximum-error recursion and maximum-error node bound.
pub fn uniform_distance_bound<F: Scalar>(model: &PairwiseMrf<F>, strengths: &StrengthTable<F>) -> UniformBound<F> {
    let z = uniform_log_epsilon(model, strengths, VariationKind::Outer);
    UniformBound { log_eps: z, per_node: node_bounds(model, strengths, VariationKind::Outer, z) }
}

/// Dynamic-range recursion, maximum-error node bound.
pub fn improved_uniform_distance_bound<F: Scalar>(model: &PairwiseMrf<F>, strengths: &StrengthTable<F>) -> UniformBound<F> {
    let z = uniform_log_epsilon(model, strengths, VariationKind::IhlerDynamic);
    UniformBound { log_eps: z, per_node: node_bounds(model, strengths, VariationKind::Outer, z) }
}

/// Dynamic-range recursion and dynamic-range node bound.
pub fn ihler_uniform_distance_bound<F: Scalar>(model: &PairwiseMrf<F>, strengths: &StrengthTable<F>) -> UniformBound<F> {
    let z = uniform_log_epsilon(model, strengths, VariationKind::IhlerDynamic);
    UniformBound { log_eps: z, per_node: node_bounds(model, strengths, VariationKind::Ihler, z) }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NonUniformVariant {
    /// Maximum-error recursion, maximum-error node bound.
    Plain,
    /// Dynamic-range recursion, maximum-error node bound.
    Improved,
    /// Dynamic-range recursion, dynamic-range node bound.
    Ihler,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonUniformBound<F> {
    /// Log ε after the last iteration, per directed edge.
    pub log_eps: Vec<F>,
    pub per_node: Vec<F>,
}

/// Per-edge log ε after `n ≥ 1` iterations from the saturated initialization.
pub fn nonuniform_log_epsilon<F: Scalar>(
    model: &PairwiseMrf<F>,
    strengths: &StrengthTable<F>,
    n: usize,
    kind: VariationKind,
) -> Result<Vec<F>> {
    if n == 0 {
        return Err(Error::Domain("the non-uniform bound needs at least one iteration".into()));
    }
    let wiring = Wiring::new(model);
    let mut z: Vec<F> = wiring
        .inputs
        .iter()
        .map(|(_, ins)| ins.iter().map(|&j| kind.saturation(&strengths.message(j))).sum())
        .collect();
    for _ in 1..n {
        z = wiring.inputs.iter().map(|(_, ins)| ins.iter().map(|&j| kind.term(&strengths.message(j), z[j])).sum()).collect();
    }
    Ok(z)
}

pub fn nonuniform_distance_bound<F: Scalar>(
    model: &PairwiseMrf<F>,
    strengths: &StrengthTable<F>,
    n: usize,
    variant: NonUniformVariant,
) -> Result<NonUniformBound<F>> {
    let (eps_kind, node_kind) = match variant {
        NonUniformVariant::Plain => (VariationKind::Outer, VariationKind::Outer),
        NonUniformVariant::Improved => (VariationKind::IhlerDynamic, VariationKind::Outer),
        NonUniformVariant::Ihler => (VariationKind::IhlerDynamic, VariationKind::Ihler),
    };
    let z = nonuniform_log_epsilon(model, strengths, n, eps_kind)?;
    let wiring = Wiring::new(model);
    let per_node = wiring
        .into_node
        .iter()
        .map(|ins| ins.iter().map(|&j| node_kind.term(&strengths.message(j), z[j])).sum())
        .collect();
    Ok(NonUniformBound { log_eps: z, per_node })
}

/// Outcome of the multi-start search for distinct fixed points.
#[derive(Debug, Clone, PartialEq)]
pub struct TrueDistance<F> {
    /// Largest `|log B(x) − log B'(x)|` over pairs of distinct fixed points, per node.
    pub per_node: Vec<F>,
    /// Belief sets of the distinct fixed points found.
    pub fixed_points: Vec<Vec<Vec<F>>>,
    pub converged_runs: usize,
    pub total_runs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig<F> {
    pub max_iters: usize,
    pub tol: F,
    /// Belief sets closer than this in max-abs-log distance count as the same fixed point.
    pub dedupe_tol: F,
}

impl<F: Scalar> Default for SearchConfig<F> {
    fn default() -> Self {
        Self { max_iters: 5000, tol: F::lit(1e-10), dedupe_tol: F::lit(1e-5) }
    }
}

pub(crate) fn belief_log_distance<F: Scalar>(a: &[Vec<F>], b: &[Vec<F>]) -> F {
    a.iter().zip(b).map(|(x, y)| crate::bp::max_log_ratio(x, y)).fold(F::zero(), F::max)
}

/// Runs synchronous BP from a seeded random initialization per seed and compares the distinct
/// fixed points reached.
pub fn true_distance<F: Scalar>(model: &PairwiseMrf<F>, seeds: &[u64], config: SearchConfig<F>) -> Result<TrueDistance<F>> {
    if seeds.len() < 2 {
        return Err(Error::Domain("the fixed-point search needs at least two runs".into()));
    }
    let mut found: Vec<Vec<Vec<F>>> = Vec::new();
    let mut converged = 0;
    for &seed in seeds {
        let run = run_synchronous(model, Init::Random(seed), config.max_iters, config.tol)?;
        if run.status != RunStatus::Converged {
            continue;
        }
        converged += 1;
        if !found.iter().any(|b| belief_log_distance(b, &run.beliefs) < config.dedupe_tol) {
            found.push(run.beliefs);
        }
    }
    if converged == 0 {
        return Err(Error::Unavailable(format!("none of {} runs converged", seeds.len())));
    }
    let mut per_node = vec![F::zero(); model.num_nodes()];
    for (i, a) in found.iter().enumerate() {
        for b in &found[i + 1..] {
            for (v, d) in per_node.iter_mut().enumerate() {
                *d = d.max(crate::bp::max_log_ratio(&a[v], &b[v]));
            }
        }
    }
    Ok(TrueDistance { per_node, fixed_points: found, converged_runs: converged, total_runs: seeds.len() })
}

/// All six distance bounds of one model.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport<F> {
    pub iterations: usize,
    pub udb: UniformBound<F>,
    pub improved_udb: UniformBound<F>,
    pub ihler_udb: UniformBound<F>,
    pub nudb: NonUniformBound<F>,
    pub improved_nudb: NonUniformBound<F>,
    pub ihler_nudb: NonUniformBound<F>,
    pub true_distance: Option<Vec<F>>,
}

pub const BOUND_CSV_HEADER: &str = "eta,node,true_distance,udb,improved_udb,ihler_udb,nudb,improved_nudb,ihler_nudb";

impl<F: Scalar> BoundReport<F> {
    /// `n` is the iteration count of the non-uniform bounds.
    pub fn compute(model: &PairwiseMrf<F>, strengths: &StrengthTable<F>, n: usize) -> Result<Self> {
        Ok(Self {
            iterations: n,
            udb: uniform_distance_bound(model, strengths),
            improved_udb: improved_uniform_distance_bound(model, strengths),
            ihler_udb: ihler_uniform_distance_bound(model, strengths),
            nudb: nonuniform_distance_bound(model, strengths, n, NonUniformVariant::Plain)?,
            improved_nudb: nonuniform_distance_bound(model, strengths, n, NonUniformVariant::Improved)?,
            ihler_nudb: nonuniform_distance_bound(model, strengths, n, NonUniformVariant::Ihler)?,
            true_distance: None,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.udb.per_node.len()
    }

    /// CSV rows (without header) labelled with `eta`.
    pub fn csv_rows(&self, eta: f64) -> String {
        let mut s = String::new();
        for v in 0..self.num_nodes() {
            let td = self.true_distance.as_ref().map(|t| fmt_g(t[v].as_f64())).unwrap_or_default();
            let cols = [
                self.udb.per_node[v],
                self.improved_udb.per_node[v],
                self.ihler_udb.per_node[v],
                self.nudb.per_node[v],
                self.improved_nudb.per_node[v],
                self.ihler_nudb.per_node[v],
            ]
            .map(|x| fmt_g(x.as_f64()));
            let _ = writeln!(s, "{},{v},{td},{}", fmt_g(eta), cols.join(","));
        }
        s
    }
}
