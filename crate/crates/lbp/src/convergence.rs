use std::fmt;
use std::str::FromStr;

use crate::bounds::belief_log_distance;
use crate::bp::{run_synchronous, Init, RunStatus, Wiring};
use crate::error::{Error, Result};
use crate::mrf::{DirectedEdge, PairwiseMrf, Topology};
use crate::scalar::Scalar;
use crate::strength::{interaction_weight, StrengthTable};
use crate::trees::saw_tree;

/// The five convergence certificates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    /// Maximum-error contraction: `max Σ (D−1)/(D+1) < 1/2` with `D = d_plain·d★`.
    Uniform,
    /// Dynamic-range contraction: `max Σ (d²−1)/(d²+1) < 1`.
    IhlerUniform,
    /// Weighted non-backtracking walk sums of length `depth`; `None` means `2·|V|`.
    Bethe { depth: Option<usize> },
    /// Weighted walk sums over the self-avoiding walk tree of every node.
    SelfAvoiding,
    /// Spectral radius of the weighted non-backtracking matrix below 1.
    WalkSum,
}

impl Condition {
    pub const ALL_NAMES: [&'static str; 5] = ["uniform", "ihler-uniform", "nonuniform-bethe", "nonuniform-saw", "walksum"];

    fn bethe_depth<F: Scalar>(self, model: &PairwiseMrf<F>) -> Option<usize> {
        match self {
            Condition::Bethe { depth } => Some(depth.unwrap_or(2 * model.num_nodes())),
            _ => None,
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Uniform => write!(f, "uniform"),
            Condition::IhlerUniform => write!(f, "ihler-uniform"),
            Condition::Bethe { depth: None } => write!(f, "nonuniform-bethe"),
            Condition::Bethe { depth: Some(n) } => write!(f, "nonuniform-bethe:{n}"),
            Condition::SelfAvoiding => write!(f, "nonuniform-saw"),
            Condition::WalkSum => write!(f, "walksum"),
        }
    }
}

impl FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::InvalidSpec(format!("unknown condition '{s}' (expected one of {})", Self::ALL_NAMES.join(", ")));
        Ok(match s {
            "uniform" => Condition::Uniform,
            "ihler-uniform" => Condition::IhlerUniform,
            "nonuniform-bethe" => Condition::Bethe { depth: None },
            "nonuniform-saw" => Condition::SelfAvoiding,
            "walksum" => Condition::WalkSum,
            _ => match s.strip_prefix("nonuniform-bethe:") {
                Some(n) => Condition::Bethe { depth: Some(n.parse().map_err(|_| unknown())?) },
                None => return Err(unknown()),
            },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Witness {
    Edge(DirectedEdge),
    Node(usize),
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Edge(e) => write!(f, "{e}"),
            Witness::Node(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceVerdict<F> {
    pub condition: Condition,
    pub statistic: F,
    pub threshold: F,
    pub holds: bool,
    pub witness: Option<Witness>,
}

impl<F: Scalar> ConvergenceVerdict<F> {
    fn new(condition: Condition, statistic: F, threshold: F, witness: Option<Witness>) -> Self {
        Self { condition, statistic, threshold, holds: statistic < threshold, witness }
    }
}

/// Largest per-directed-edge sum of `f` over the inputs of each message, with its edge.
fn max_input_sum<F: Scalar>(model: &PairwiseMrf<F>, f: impl Fn(usize) -> F) -> (F, Option<Witness>) {
    let wiring = Wiring::new(model);
    let mut best = (F::zero(), None);
    for (i, (_, ins)) in wiring.inputs.iter().enumerate() {
        let s: F = ins.iter().map(|&j| f(j)).sum();
        if best.1.is_none() || s > best.0 {
            best = (s, Some(Witness::Edge(model.directed_edge(i))));
        }
    }
    best
}

pub fn uniform_condition<F: Scalar>(model: &PairwiseMrf<F>, strengths: &StrengthTable<F>) -> ConvergenceVerdict<F> {
    let (stat, witness) = max_input_sum(model, |j| {
        let d = strengths.message(j).max_error();
        (d - F::one()) / (d + F::one())
    });
    ConvergenceVerdict::new(Condition::Uniform, stat, F::lit(0.5), witness)
}

pub fn ihler_uniform_condition<F: Scalar>(model: &PairwiseMrf<F>, strengths: &StrengthTable<F>) -> ConvergenceVerdict<F> {
    let (stat, witness) = max_input_sum(model, |j| strengths.message(j).weight());
    ConvergenceVerdict::new(Condition::IhlerUniform, stat, F::one(), witness)
}

/// Walk sums of length `depth` per directed edge: row sums of the `depth`-th power of the
/// interaction matrix.
pub fn bethe_walk_sums<F: Scalar>(model: &PairwiseMrf<F>, strengths: &StrengthTable<F>, depth: usize) -> Vec<F> {
    let wiring = Wiring::new(model);
    let mut h = vec![F::one(); model.num_directed()];
    for _ in 0..depth {
        h = wiring.inputs.iter().map(|(_, ins)| ins.iter().map(|&j| strengths.message(j).weight() * h[j]).sum()).collect();
    }
    h
}

/// Walk sum over the self-avoiding walk tree rooted at `v`.
///
/// Each tree edge carries its interaction weight. Steps that close a cycle count as leaves of
/// value 1; nodes without any continuation (degree-one nodes) contribute 0.
pub fn saw_walk_sum<F: Scalar>(model: &PairwiseMrf<F>, strengths: &StrengthTable<F>, v: usize) -> Result<F> {
    let tree = saw_tree(model, v)?;
    let w = |e: usize| interaction_weight(strengths.edge(e).d_pair);
    let mut h = vec![F::zero(); tree.len()];
    for i in (0..tree.len()).rev() {
        let n = tree.node(i);
        let closing: F = n.closing.iter().map(|&(_, e)| w(e)).sum();
        let inner: F = n.children.iter().map(|&c| w(tree.node(c).edge.expect("child edge")) * h[c]).sum();
        h[i] = closing + inner;
    }
    Ok(h[0])
}

pub fn nonuniform_condition<F: Scalar>(
    model: &PairwiseMrf<F>,
    strengths: &StrengthTable<F>,
    condition: Condition,
) -> Result<ConvergenceVerdict<F>> {
    match condition {
        Condition::Bethe { .. } => {
            let depth = condition.bethe_depth(model).expect("bethe condition");
            if depth == 0 {
                return Err(Error::Domain("walk-sum depth must be at least 1".into()));
            }
            let h = bethe_walk_sums(model, strengths, depth);
            let (mut stat, mut witness) = (F::zero(), None);
            for (i, &x) in h.iter().enumerate() {
                if witness.is_none() || x > stat {
                    stat = x;
                    witness = Some(Witness::Edge(model.directed_edge(i)));
                }
            }
            Ok(ConvergenceVerdict::new(Condition::Bethe { depth: Some(depth) }, stat, F::one(), witness))
        }
        Condition::SelfAvoiding => {
            let (mut stat, mut witness) = (F::zero(), None);
            for v in 0..model.num_nodes() {
                let x = saw_walk_sum(model, strengths, v)?;
                if witness.is_none() || x > stat {
                    stat = x;
                    witness = Some(Witness::Node(v));
                }
            }
            Ok(ConvergenceVerdict::new(condition, stat, F::one(), witness))
        }
        other => Err(Error::Domain(format!("{other} is not a tree-based condition"))),
    }
}

/// Weighted non-backtracking matrix over directed edges, stored by rows.
///
/// Row `i -> j` has entry `w(p, i)` in column `p -> i` for every `p ∈ Γ_i ∖ j`.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionMatrix<F> {
    pub edges: Vec<DirectedEdge>,
    rows: Vec<Vec<(usize, F)>>,
}

/// Relative tolerance and step cap of the spectral-radius iteration.
pub const SPECTRAL_TOL: f64 = 1e-10;
pub const SPECTRAL_CAP: usize = 100_000;

impl<F: Scalar> InteractionMatrix<F> {
    pub fn new(model: &PairwiseMrf<F>, strengths: &StrengthTable<F>) -> Self {
        let wiring = Wiring::new(model);
        let rows = wiring.inputs.iter().map(|(_, ins)| ins.iter().map(|&j| (j, strengths.message(j).weight())).collect()).collect();
        Self { edges: model.directed_edges().collect(), rows }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[(usize, F)] {
        &self.rows[i]
    }

    pub fn to_dense(&self) -> Vec<Vec<F>> {
        let mut m = vec![vec![F::zero(); self.dim()]; self.dim()];
        for (i, r) in self.rows.iter().enumerate() {
            for &(j, w) in r {
                m[i][j] = w;
            }
        }
        m
    }

    /// Spectral radius.
    ///
    /// The matrix is split into strongly connected blocks (zero weights count as absent); the
    /// radius is the largest block radius. Each block is iterated as `A + I` from the all-ones
    /// vector, which removes periodicity, until the Collatz–Wielandt bounds agree.
    pub fn spectral_radius(&self) -> F {
        let n = self.dim();
        let adj: Vec<Vec<usize>> =
            self.rows.iter().map(|r| r.iter().filter(|(_, w)| *w > F::zero()).map(|&(j, _)| j).collect()).collect();
        let mut best = F::zero();
        for comp in strongly_connected(n, &adj) {
            if comp.len() < 2 {
                continue;
            }
            let mut pos = vec![usize::MAX; n];
            for (k, &i) in comp.iter().enumerate() {
                pos[i] = k;
            }
            let mut x = vec![F::one(); comp.len()];
            let mut estimate = F::zero();
            for _ in 0..SPECTRAL_CAP {
                let y: Vec<F> = comp
                    .iter()
                    .enumerate()
                    .map(|(k, &i)| {
                        x[k] + self.rows[i].iter().filter(|&&(j, _)| pos[j] != usize::MAX).map(|&(j, w)| w * x[pos[j]]).sum::<F>()
                    })
                    .collect();
                let (mut lo, mut hi) = (F::infinity(), F::zero());
                for (a, b) in y.iter().zip(&x) {
                    let r = *a / *b;
                    lo = lo.min(r);
                    hi = hi.max(r);
                }
                estimate = (lo + hi) / F::lit(2.0) - F::one();
                let scale = y.iter().copied().fold(F::zero(), F::max);
                x = y.into_iter().map(|v| v / scale).collect();
                if hi - lo <= F::lit(SPECTRAL_TOL) * (hi - F::one()).max(F::lit(1e-30)) {
                    break;
                }
            }
            best = best.max(estimate);
        }
        best
    }
}

/// Tarjan's algorithm, iterative.
fn strongly_connected(n: usize, adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut next = 0;
    for start in 0..n {
        if index[start] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(start, 0)];
        index[start] = next;
        low[start] = next;
        next += 1;
        stack.push(start);
        on_stack[start] = true;
        while let Some(&mut (v, ref mut k)) = call.last_mut() {
            if *k < adj[v].len() {
                let u = adj[v][*k];
                *k += 1;
                if index[u] == usize::MAX {
                    index[u] = next;
                    low[u] = next;
                    next += 1;
                    stack.push(u);
                    on_stack[u] = true;
                    call.push((u, 0));
                } else if on_stack[u] {
                    low[v] = low[v].min(index[u]);
                }
            } else {
                call.pop();
                if let Some(&(p, _)) = call.last() {
                    low[p] = low[p].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("component member");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    out.push(comp);
                }
            }
        }
    }
    out
}

pub fn walk_summability<F: Scalar>(model: &PairwiseMrf<F>, strengths: &StrengthTable<F>) -> ConvergenceVerdict<F> {
    let rho = InteractionMatrix::new(model, strengths).spectral_radius();
    ConvergenceVerdict::new(Condition::WalkSum, rho, F::one(), None)
}

pub fn evaluate<F: Scalar>(model: &PairwiseMrf<F>, strengths: &StrengthTable<F>, condition: Condition) -> Result<ConvergenceVerdict<F>> {
    Ok(match condition {
        Condition::Uniform => uniform_condition(model, strengths),
        Condition::IhlerUniform => ihler_uniform_condition(model, strengths),
        Condition::WalkSum => walk_summability(model, strengths),
        Condition::Bethe { .. } | Condition::SelfAvoiding => nonuniform_condition(model, strengths, condition)?,
    })
}

/// A broken implication `premise ⇒ conclusion`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub premise: Condition,
    pub conclusion: Condition,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderingReport<F> {
    /// Walk-sum, walk sums of length `N`, of length `2N`, self-avoiding, in that order.
    pub verdicts: Vec<ConvergenceVerdict<F>>,
    pub violations: Vec<Violation>,
}

/// Evaluates walk-summability, finite walk sums of length `n` and `2n`, and the self-avoiding
/// condition, and checks `walksum ⇒ bethe(n)`, `bethe(n) ⇒ bethe(2n)` and `saw ⇒ bethe(n)`.
///
/// Only the last two are guaranteed. On graphs that are not regular, finite-length walk sums
/// from all-ones leaves can exceed one while the spectral radius is still below one, so the
/// first implication can fail close to the walk-sum threshold; such points are reported here.
pub fn condition_ordering_report<F: Scalar>(model: &PairwiseMrf<F>, strengths: &StrengthTable<F>, n: usize) -> Result<OrderingReport<F>> {
    let walk = walk_summability(model, strengths);
    let bn = nonuniform_condition(model, strengths, Condition::Bethe { depth: Some(n) })?;
    let b2n = nonuniform_condition(model, strengths, Condition::Bethe { depth: Some(2 * n) })?;
    let saw = nonuniform_condition(model, strengths, Condition::SelfAvoiding)?;
    let mut violations = Vec::new();
    for (p, c) in [(&walk, &bn), (&bn, &b2n), (&saw, &bn)] {
        if p.holds && !c.holds {
            violations.push(Violation { premise: p.condition, conclusion: c.condition });
        }
    }
    Ok(OrderingReport { verdicts: vec![walk, bn, b2n, saw], violations })
}

/// Bisection for the boundary where `holds` switches from true (at `lo`) to false (at `hi`).
///
/// Returns `hi` when the predicate already holds there and `lo` when it fails there.
pub fn bisect_threshold<F: Scalar>(mut lo: F, mut hi: F, tol: F, mut holds: impl FnMut(F) -> Result<bool>) -> Result<F> {
    if holds(hi)? {
        return Ok(hi);
    }
    if !holds(lo)? {
        return Ok(lo);
    }
    while hi - lo > tol {
        let mid = (lo + hi) / F::lit(2.0);
        if holds(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) / F::lit(2.0))
}

/// Upper end of the η range in `(1/2, 1)` on which `condition` certifies convergence for
/// the potentials `[[η, 1−η], [1−η, η]]` on `topology`.
pub fn critical_eta<F: Scalar>(topology: &Topology, condition: Condition, tol: F) -> Result<F> {
    bisect_threshold(F::lit(0.5), F::one() - F::lit(1e-9), tol, |eta| {
        let m = topology.build(eta)?;
        let s = StrengthTable::from_model(&m)?;
        Ok(evaluate(&m, &s, condition)?.holds)
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartialOrdering<F> {
    pub small_critical: F,
    pub big_critical: F,
    /// `big_critical ≤ small_critical` (within the bisection tolerance).
    pub holds: bool,
}

/// Compares critical values of a graph and an edge-superset of it with the same potentials.
pub fn partial_graph_ordering_check<F: Scalar>(small: &Topology, big: &Topology, condition: Condition, tol: F) -> Result<PartialOrdering<F>> {
    let probe = F::lit(0.7);
    let (ms, mb) = (small.build::<F>(probe)?, big.build::<F>(probe)?);
    if !ms.edges_subset_of(&mb) {
        return Err(Error::Domain(format!("{small} is not an edge subset of {big}")));
    }
    let small_critical = critical_eta(small, condition, tol)?;
    let big_critical = critical_eta(big, condition, tol)?;
    Ok(PartialOrdering { small_critical, big_critical, holds: big_critical <= small_critical + tol })
}

/// `|Σ_{t∈Γ_s∖p} (d²−1)/(d²+1) − 1|` for the directed edge `s -> p`.
pub fn rate_metric<F: Scalar>(model: &PairwiseMrf<F>, strengths: &StrengthTable<F>, edge: DirectedEdge) -> Result<F> {
    let i = model.directed_index(edge)?;
    let wiring = Wiring::new(model);
    let s: F = wiring.inputs[i].1.iter().map(|&j| strengths.message(j).weight()).sum();
    Ok((s - F::one()).abs())
}

/// Multi-start test used to locate empirical convergence thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalConfig<F> {
    pub runs: usize,
    pub max_iters: usize,
    pub tol: F,
    /// Belief sets within this max-abs-log distance are the same fixed point.
    pub dedupe_tol: F,
    pub bisection_tol: F,
}

impl<F: Scalar> Default for EmpiricalConfig<F> {
    fn default() -> Self {
        Self { runs: 20, max_iters: 5000, tol: F::lit(1e-8), dedupe_tol: F::lit(1e-4), bisection_tol: F::lit(1e-3) }
    }
}

/// True iff every seeded random start converges and all of them reach the same fixed point.
pub fn converges_uniquely<F: Scalar>(model: &PairwiseMrf<F>, config: &EmpiricalConfig<F>) -> Result<bool> {
    let mut reference: Option<Vec<Vec<F>>> = None;
    for seed in 0..config.runs as u64 {
        let run = run_synchronous(model, Init::Random(seed), config.max_iters, config.tol)?;
        if run.status != RunStatus::Converged {
            return Ok(false);
        }
        match &reference {
            None => reference = Some(run.beliefs),
            Some(b) => {
                if belief_log_distance(b, &run.beliefs) >= config.dedupe_tol {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Bisection on η for the largest value at which [`converges_uniquely`] holds.
pub fn empirical_critical_eta<F: Scalar>(topology: &Topology, config: &EmpiricalConfig<F>) -> Result<F> {
    bisect_threshold(F::lit(0.5), F::lit(0.99), config.bisection_tol, |eta| converges_uniquely(&topology.build(eta)?, config))
}
