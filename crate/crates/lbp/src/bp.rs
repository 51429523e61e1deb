use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::mrf::{DirectedEdge, PairwiseMrf};
use crate::scalar::Scalar;

/// One normalized message per directed edge, indexed like [`PairwiseMrf::directed_edge`].
#[derive(Debug, Clone, PartialEq)]
pub struct MessageSet<F> {
    msgs: Vec<Vec<F>>,
}

fn normalize<F: Scalar>(v: &mut [F]) -> bool {
    let s: F = v.iter().copied().sum();
    if !(s > F::zero()) || !s.is_finite() {
        return false;
    }
    for x in v.iter_mut() {
        *x = *x / s;
    }
    v.iter().all(|&x| x > F::zero())
}

impl<F: Scalar> MessageSet<F> {
    pub fn uniform(model: &PairwiseMrf<F>) -> Self {
        let msgs = model
            .directed_edges()
            .map(|de| {
                let k = model.cardinality(de.to);
                vec![F::one() / F::lit(k as f64); k]
            })
            .collect();
        Self { msgs }
    }

    /// Entries drawn uniformly from (0, 1) and normalized; reproducible for a given seed.
    pub fn random(model: &PairwiseMrf<F>, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let msgs = model
            .directed_edges()
            .map(|de| {
                let mut v: Vec<F> =
                    (0..model.cardinality(de.to)).map(|_| F::lit(rng.sample::<f64, _>(Open01))).collect();
                normalize(&mut v);
                v
            })
            .collect();
        Self { msgs }
    }

    /// Validates shapes and positivity, then normalizes each vector.
    pub fn from_vecs(model: &PairwiseMrf<F>, mut msgs: Vec<Vec<F>>) -> Result<Self> {
        if msgs.len() != model.num_directed() {
            return Err(Error::Dimension(format!("{} messages for {} directed edges", msgs.len(), model.num_directed())));
        }
        for (i, m) in msgs.iter_mut().enumerate() {
            let de = model.directed_edge(i);
            if m.len() != model.cardinality(de.to) {
                return Err(Error::Dimension(format!("message {de} has {} entries", m.len())));
            }
            if m.iter().any(|&x| !(x > F::zero())) || !normalize(m) {
                return Err(Error::NonPositive { location: format!("message {de}"), value: 0.0 });
            }
        }
        Ok(Self { msgs })
    }

    pub fn get(&self, i: usize) -> &[F] {
        &self.msgs[i]
    }

    pub fn len(&self) -> usize {
        self.msgs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.msgs.is_empty()
    }

    pub fn as_vecs(&self) -> &[Vec<F>] {
        &self.msgs
    }

    pub(crate) fn set(&mut self, i: usize, v: Vec<F>) {
        self.msgs[i] = v;
    }

    /// `max_i max_x |log m_i(x) − log m'_i(x)|`.
    pub fn max_log_distance(&self, other: &Self) -> F {
        self.msgs
            .iter()
            .zip(&other.msgs)
            .map(|(a, b)| max_log_ratio(a, b))
            .fold(F::zero(), F::max)
    }
}

pub(crate) fn max_log_ratio<F: Scalar>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).map(|(&x, &y)| (x.ln() - y.ln()).abs()).fold(F::zero(), F::max)
}

/// Precomputed message dependencies.
#[derive(Debug, Clone)]
pub(crate) struct Wiring {
    /// For directed edge `t -> s`: undirected edge index and the directed indices `u -> t`, `u ≠ s`.
    pub(crate) inputs: Vec<(usize, Vec<usize>)>,
    /// For node `v`: directed indices of all messages into `v`.
    pub(crate) into_node: Vec<Vec<usize>>,
}

impl Wiring {
    pub(crate) fn new<F: Scalar>(model: &PairwiseMrf<F>) -> Self {
        let into_node: Vec<Vec<usize>> = (0..model.num_nodes())
            .map(|v| model.incident(v).iter().map(|&(u, e)| model.directed_index_of(e, u)).collect())
            .collect();
        let inputs = model
            .directed_edges()
            .map(|de| {
                let e = model.edge_index(de.from, de.to).expect("directed edge exists");
                let ins = model
                    .incident(de.from)
                    .iter()
                    .filter(|&&(u, _)| u != de.to)
                    .map(|&(u, f)| model.directed_index_of(f, u))
                    .collect();
                (e, ins)
            })
            .collect();
        Self { inputs, into_node }
    }
}

pub(crate) fn update_with<F: Scalar>(
    model: &PairwiseMrf<F>,
    wiring: &Wiring,
    messages: &MessageSet<F>,
    i: usize,
) -> Result<Vec<F>> {
    let de = model.directed_edge(i);
    let (e, ref ins) = wiring.inputs[i];
    let mut pre: Vec<F> = model.node_potential(de.from).to_vec();
    for &j in ins {
        for (p, &m) in pre.iter_mut().zip(messages.get(j)) {
            *p = *p * m;
        }
    }
    let ks = model.cardinality(de.to);
    let mut out = vec![F::zero(); ks];
    for (xs, o) in out.iter_mut().enumerate() {
        *o = pre.iter().enumerate().map(|(xt, &p)| p * model.potential_entry(e, de.from, xt, xs)).sum();
    }
    if normalize(&mut out) {
        Ok(out)
    } else {
        Err(Error::NumericDegeneracy { from: de.from, to: de.to })
    }
}

/// Sum-product update of message `t -> s` from the current messages into `t`.
pub fn update_message<F: Scalar>(model: &PairwiseMrf<F>, messages: &MessageSet<F>, edge: DirectedEdge) -> Result<Vec<F>> {
    let i = model.directed_index(edge)?;
    update_with(model, &Wiring::new(model), messages, i)
}

/// Normalized node beliefs: node potential times all incoming messages.
pub fn compute_beliefs<F: Scalar>(model: &PairwiseMrf<F>, messages: &MessageSet<F>) -> Vec<Vec<F>> {
    let wiring = Wiring::new(model);
    beliefs_with(model, &wiring, messages)
}

pub(crate) fn beliefs_with<F: Scalar>(model: &PairwiseMrf<F>, wiring: &Wiring, messages: &MessageSet<F>) -> Vec<Vec<F>> {
    (0..model.num_nodes())
        .map(|v| {
            let mut b = model.node_potential(v).to_vec();
            for &j in &wiring.into_node[v] {
                for (x, &m) in b.iter_mut().zip(messages.get(j)) {
                    *x = *x * m;
                }
            }
            normalize(&mut b);
            b
        })
        .collect()
}

/// Normalized pairwise beliefs per undirected edge, rows indexed by the lower endpoint.
pub fn compute_pairwise_beliefs<F: Scalar>(model: &PairwiseMrf<F>, messages: &MessageSet<F>) -> Vec<Matrix<F>> {
    let wiring = Wiring::new(model);
    // cavity product at `from`, excluding the message coming from `to`
    let cavity = |from: usize, to: usize| -> Vec<F> {
        let i = model.directed_index(DirectedEdge::new(from, to)).expect("edge exists");
        let mut c = model.node_potential(from).to_vec();
        for &j in &wiring.inputs[i].1 {
            for (x, &m) in c.iter_mut().zip(messages.get(j)) {
                *x = *x * m;
            }
        }
        c
    };
    model
        .edges()
        .iter()
        .enumerate()
        .map(|(e, &(lo, hi))| {
            let (cl, ch) = (cavity(lo, hi), cavity(hi, lo));
            let pot = model.edge_potential(e);
            let mut out = Matrix::filled(pot.rows(), pot.cols(), F::zero());
            let mut total = F::zero();
            for (a, &x) in cl.iter().enumerate() {
                for (b, &y) in ch.iter().enumerate() {
                    let v = pot.get(a, b) * x * y;
                    out.set(a, b, v);
                    total = total + v;
                }
            }
            for a in 0..pot.rows() {
                for b in 0..pot.cols() {
                    out.set(a, b, out.get(a, b) / total);
                }
            }
            out
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunStatus {
    Converged,
    Oscillating { period: usize },
    MaxIters,
}

#[derive(Debug, Clone)]
pub enum Init<F> {
    Uniform,
    Random(u64),
    Given(MessageSet<F>),
}

impl<F: Scalar> Init<F> {
    pub(crate) fn messages(&self, model: &PairwiseMrf<F>) -> MessageSet<F> {
        match self {
            Init::Uniform => MessageSet::uniform(model),
            Init::Random(seed) => MessageSet::random(model, *seed),
            Init::Given(m) => m.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult<F> {
    pub status: RunStatus,
    /// Number of sweeps (synchronous) or single-message updates (residual) performed.
    pub iterations: usize,
    pub messages: MessageSet<F>,
    /// Largest absolute log change of any message entry, one value per sweep or update.
    pub history: Vec<F>,
    pub beliefs: Vec<Vec<F>>,
}

/// Synchronous (flooding) sum-product; every message of a sweep reads the previous sweep.
///
/// Stops as converged when a sweep changes no log-message entry by `tol` or more. A period-2
/// cycle is reported when the state matches the one two sweeps back within `tol` while the
/// lag-1 change stays above `sqrt(tol)`, which keeps slowly damped alternation from being
/// mistaken for a cycle.
pub fn run_synchronous<F: Scalar>(model: &PairwiseMrf<F>, init: Init<F>, max_iters: usize, tol: F) -> Result<RunResult<F>> {
    let wiring = Wiring::new(model);
    let mut cur = init.messages(model);
    if cur.len() != model.num_directed() {
        return Err(Error::Dimension("initial message set does not match the model".into()));
    }
    let mut prev: Option<MessageSet<F>> = None;
    let mut history = Vec::new();
    let mut status = RunStatus::MaxIters;
    let mut iterations = 0;
    while iterations < max_iters {
        let next = MessageSet {
            msgs: (0..model.num_directed()).map(|i| update_with(model, &wiring, &cur, i)).collect::<Result<_>>()?,
        };
        iterations += 1;
        let lag1 = next.max_log_distance(&cur);
        history.push(lag1);
        let lag2 = prev.as_ref().map(|p| next.max_log_distance(p));
        prev = Some(std::mem::replace(&mut cur, next));
        if lag1 < tol {
            status = RunStatus::Converged;
            break;
        }
        if let Some(l2) = lag2 {
            if l2 < tol && lag1 > tol.sqrt() {
                status = RunStatus::Oscillating { period: 2 };
                break;
            }
        }
    }
    let beliefs = beliefs_with(model, &wiring, &cur);
    Ok(RunResult { status, iterations, messages: cur, history, beliefs })
}
