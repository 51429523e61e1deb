use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::mrf::PairwiseMrf;
use crate::report::fmt_g;
use crate::scalar::{log_contraction, Scalar};
use crate::strength::StrengthTable;
use crate::trees::saw_tree;

/// Largest joint state space [`exact_marginals`] will enumerate.
pub const MAX_CONFIGURATIONS: u128 = 1 << 20;

/// Exact node marginals by enumerating every joint configuration.
///
/// Weights are accumulated in log space against a running maximum so long products neither
/// overflow nor underflow.
pub fn exact_marginals<F: Scalar>(model: &PairwiseMrf<F>) -> Result<Vec<Vec<F>>> {
    let card = model.cardinalities();
    let total: u128 = card.iter().map(|&k| k as u128).product();
    if total > MAX_CONFIGURATIONS {
        return Err(Error::StateSpaceTooLarge(total));
    }
    let log_node: Vec<Vec<F>> = (0..model.num_nodes()).map(|v| model.node_potential(v).iter().map(|x| x.ln()).collect()).collect();
    let log_edge: Vec<Vec<F>> = (0..model.num_edges()).map(|e| model.edge_potential(e).as_slice().iter().map(|x| x.ln()).collect()).collect();
    let mut sums: Vec<Vec<F>> = card.iter().map(|&k| vec![F::zero(); k]).collect();
    let mut shift = F::neg_infinity();
    let mut x = vec![0usize; card.len()];
    for _ in 0..total {
        let mut lw: F = x.iter().enumerate().map(|(v, &s)| log_node[v][s]).sum();
        for (e, &(a, b)) in model.edges().iter().enumerate() {
            lw = lw + log_edge[e][x[a] * card[b] + x[b]];
        }
        if lw > shift {
            let r = (shift - lw).exp();
            for s in sums.iter_mut().flatten() {
                *s = *s * r;
            }
            shift = lw;
        }
        let w = (lw - shift).exp();
        for (v, &s) in x.iter().enumerate() {
            sums[v][s] = sums[v][s] + w;
        }
        for (v, xv) in x.iter_mut().enumerate() {
            *xv += 1;
            if *xv < card[v] {
                break;
            }
            *xv = 0;
        }
    }
    for s in &mut sums {
        let z: F = s.iter().copied().sum();
        s.iter_mut().for_each(|p| *p = *p / z);
    }
    Ok(sums)
}

/// Per-state interval for the true marginal around a belief.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyBound<F> {
    pub belief: Vec<F>,
    pub lower: Vec<F>,
    pub upper: Vec<F>,
    /// Dynamic-range bound on the belief error.
    pub delta: F,
    /// Maximum-error bound on the belief error.
    pub epsilon: F,
}

impl<F: Scalar> AccuracyBound<F> {
    /// True if every `p(x)` lies in `[lower − slack, upper + slack]`.
    pub fn contains(&self, p: &[F], slack: F) -> bool {
        p.iter().zip(self.lower.iter().zip(&self.upper)).all(|(&x, (&lo, &hi))| lo - slack <= x && x <= hi + slack)
    }
}

/// Intersection of the dynamic-range interval
/// `b / (δ² + (1−δ²)b) ≤ p ≤ δ²b / (1 − (1−δ²)b)` and the maximum-error interval `b/ε ≤ p ≤ εb`.
pub fn accuracy_bound<F: Scalar>(belief: &[F], delta: F, epsilon: F) -> Result<AccuracyBound<F>> {
    if !(delta >= F::one()) || !(epsilon >= F::one()) {
        return Err(Error::Domain(format!("delta = {delta} and epsilon = {epsilon} must be at least 1")));
    }
    let total: F = belief.iter().copied().sum();
    if belief.iter().any(|&b| !(b > F::zero())) || (total - F::one()).abs() > F::lit(1e-6) {
        return Err(Error::Domain("belief must be positive and sum to 1".into()));
    }
    let d2 = delta * delta;
    let lower = belief.iter().map(|&b| (b / epsilon).max(b / (d2 + (F::one() - d2) * b))).collect();
    let upper = belief.iter().map(|&b| (epsilon * b).min(d2 * b / (F::one() - (F::one() - d2) * b))).collect();
    Ok(AccuracyBound { belief: belief.to_vec(), lower, upper, delta, epsilon })
}

/// Log error bounds at the root of the self-avoiding walk tree of `node`: `(log δ, log ε)`.
///
/// A step that closes a cycle stands for an input whose value is unknown and contributes the
/// saturated error of its edge. Degree-one ends contribute no error.
pub fn saw_error_bounds<F: Scalar>(model: &PairwiseMrf<F>, strengths: &StrengthTable<F>, node: usize) -> Result<(F, F)> {
    let tree = saw_tree(model, node)?;
    let two = F::lit(2.0);
    // z[i]: log dynamic range of the incoming error product at tree node i
    let mut z = vec![F::zero(); tree.len()];
    for i in (0..tree.len()).rev() {
        let n = tree.node(i);
        let closing: F = n.closing.iter().map(|&(_, e)| two * strengths.edge(e).d_pair.ln()).sum();
        let inner: F = n
            .children
            .iter()
            .map(|&c| {
                let d = strengths.edge(tree.node(c).edge.expect("child edge")).d_pair;
                log_contraction(d * d, z[c])
            })
            .sum();
        z[i] = closing + inner;
    }
    let root = tree.root();
    let mut log_eps = F::zero();
    for &c in &root.children {
        let child = tree.node(c);
        let e = child.edge.expect("child edge");
        let ms = strengths.message(model.directed_index_of(e, child.label));
        log_eps = log_eps + two * log_contraction(ms.max_error(), z[c]);
    }
    Ok((z[0], log_eps))
}

/// Accuracy interval for `belief` at `node` from error bounds on its self-avoiding walk tree.
pub fn saw_accuracy<F: Scalar>(model: &PairwiseMrf<F>, strengths: &StrengthTable<F>, node: usize, belief: &[F]) -> Result<AccuracyBound<F>> {
    let (log_delta, log_eps) = saw_error_bounds(model, strengths, node)?;
    accuracy_bound(belief, log_delta.exp(), log_eps.exp())
}

pub const ACCURACY_CSV_HEADER: &str = "node,state,belief,exact,lower,upper";

/// CSV rows (without header) for one node, with the exact marginal when known.
pub fn accuracy_csv_rows<F: Scalar>(node: usize, bound: &AccuracyBound<F>, exact: Option<&[F]>) -> String {
    let mut s = String::new();
    for x in 0..bound.belief.len() {
        let ex = exact.map(|e| fmt_g(e[x].as_f64())).unwrap_or_default();
        let _ = writeln!(
            s,
            "{node},{x},{},{ex},{},{}",
            fmt_g(bound.belief[x].as_f64()),
            fmt_g(bound.lower[x].as_f64()),
            fmt_g(bound.upper[x].as_f64())
        );
    }
    s
}
