use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::mrf::{DirectedEdge, PairwiseMrf};
use crate::scalar::Scalar;

/// Which variable of an edge potential is summed out when forming its marginal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumOut {
    /// Sum over the column variable, leaving a function of the row variable.
    Columns,
    /// Sum over the row variable, leaving a function of the column variable.
    Rows,
}

fn require_positive<F: Scalar>(m: &Matrix<F>) -> Result<()> {
    match m.as_slice().iter().position(|&v| !(v > F::zero()) || !v.is_finite()) {
        None => Ok(()),
        Some(k) => Err(Error::NonPositive {
            location: format!("entry ({}, {})", k / m.cols(), k % m.cols()),
            value: m.as_slice()[k].as_f64(),
        }),
    }
}

/// Largest cross-ratio `ψ(a,c)ψ(b,d) / (ψ(b,c)ψ(a,d))` over all index quadruples.
fn max_cross_ratio<F: Scalar>(m: &Matrix<F>) -> Result<F> {
    require_positive(m)?;
    let mut best = F::one();
    for a in 0..m.rows() {
        for b in 0..m.rows() {
            for c in 0..m.cols() {
                for d in 0..m.cols() {
                    let r = m.get(a, c) * m.get(b, d) / (m.get(b, c) * m.get(a, d));
                    best = best.max(r);
                }
            }
        }
    }
    Ok(best)
}

/// Scale-invariant strength `d(ψ)`: fourth root of the largest cross-ratio.
///
/// Row and column rescalings leave it unchanged. Used by every dynamic-range recursion.
pub fn potential_strength<F: Scalar>(m: &Matrix<F>) -> Result<F> {
    Ok(max_cross_ratio(m)?.sqrt().sqrt())
}

/// Unminimized strength `sqrt(max ψ / min ψ)`.
pub fn plain_strength<F: Scalar>(m: &Matrix<F>) -> Result<F> {
    require_positive(m)?;
    Ok((m.max() / m.min()).sqrt())
}

/// Strength of the edge marginal: `sqrt(max / min)` of the summed potential.
pub fn marginal_strength<F: Scalar>(m: &Matrix<F>, sum_out: SumOut) -> Result<F> {
    require_positive(m)?;
    let sums = match sum_out {
        SumOut::Columns => m.row_sums(),
        SumOut::Rows => m.transpose().row_sums(),
    };
    let hi = sums.iter().copied().fold(F::neg_infinity(), F::max);
    let lo = sums.iter().copied().fold(F::infinity(), F::min);
    Ok((hi / lo).sqrt())
}

/// `σ = 1 − 1 / (largest cross-ratio)`, in `[0, 1)`.
pub fn heskes_strength<F: Scalar>(m: &Matrix<F>) -> Result<F> {
    Ok(F::one() - max_cross_ratio(m)?.recip())
}

/// `N(ψ) = (1 − sqrt(1 − σ)) / (1 + sqrt(1 − σ))`, in `[0, 1)`.
pub fn mooij_strength<F: Scalar>(m: &Matrix<F>) -> Result<F> {
    let r = (F::one() - heskes_strength(m)?).sqrt();
    Ok((F::one() - r) / (F::one() + r))
}

/// Interaction weight `(d² − 1) / (d² + 1)` of an edge with strength `d`.
pub fn interaction_weight<F: Scalar>(d: F) -> F {
    let d2 = d * d;
    (d2 - F::one()) / (d2 + F::one())
}

/// All strength measures of one undirected edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeStrength<F> {
    pub d_pair: F,
    pub d_plain: F,
    /// Marginal strength for messages leaving the lower endpoint (row sums).
    pub d_star_row: F,
    /// Marginal strength for messages leaving the higher endpoint (column sums).
    pub d_star_col: F,
    pub sigma: F,
    pub n_strength: F,
}

impl<F: Scalar> EdgeStrength<F> {
    pub fn of(m: &Matrix<F>) -> Result<Self> {
        Ok(Self {
            d_pair: potential_strength(m)?,
            d_plain: plain_strength(m)?,
            d_star_row: marginal_strength(m, SumOut::Columns)?,
            d_star_col: marginal_strength(m, SumOut::Rows)?,
            sigma: heskes_strength(m)?,
            n_strength: mooij_strength(m)?,
        })
    }
}

/// Strengths seen by a single message direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MessageStrength<F> {
    pub d_pair: F,
    pub d_plain: F,
    pub d_star: F,
}

impl<F: Scalar> MessageStrength<F> {
    /// Strength entering the maximum-error contraction: `d_plain · d_star`.
    pub fn max_error(&self) -> F {
        self.d_plain * self.d_star
    }

    /// Squared scale-invariant strength entering the dynamic-range contraction.
    pub fn dynamic_range(&self) -> F {
        self.d_pair * self.d_pair
    }

    pub fn weight(&self) -> F {
        interaction_weight(self.d_pair)
    }
}

/// Per-edge strengths of a whole model.
#[derive(Debug, Clone, PartialEq)]
pub struct StrengthTable<F> {
    edges: Vec<EdgeStrength<F>>,
}

impl<F: Scalar> StrengthTable<F> {
    pub fn from_model(model: &PairwiseMrf<F>) -> Result<Self> {
        let edges = (0..model.num_edges()).map(|e| EdgeStrength::of(model.edge_potential(e))).collect::<Result<_>>()?;
        Ok(Self { edges })
    }

    pub fn edge(&self, e: usize) -> &EdgeStrength<F> {
        &self.edges[e]
    }

    pub fn edges(&self) -> &[EdgeStrength<F>] {
        &self.edges
    }

    /// Strengths for the message with directed index `i` (see [`PairwiseMrf`]).
    pub fn message(&self, i: usize) -> MessageStrength<F> {
        let s = &self.edges[i / 2];
        MessageStrength { d_pair: s.d_pair, d_plain: s.d_plain, d_star: if i.is_multiple_of(2) { s.d_star_row } else { s.d_star_col } }
    }

    pub fn message_for(&self, model: &PairwiseMrf<F>, de: DirectedEdge) -> Result<MessageStrength<F>> {
        Ok(self.message(model.directed_index(de)?))
    }
}
