use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use crate::bp::{beliefs_with, max_log_ratio, update_with, Init, RunResult, RunStatus, Wiring};
use crate::error::{Error, Result};
use crate::mrf::{DirectedEdge, PairwiseMrf};
use crate::report::fmt_g;
use crate::scalar::{log_contraction, Scalar};
use crate::strength::{MessageStrength, StrengthTable};

/// Upper bound on the log max-error of recomputing a message whose inputs have drifted.
///
/// `incoming` holds, per input message, an upper bound on its accumulated log change since the
/// message was last computed. Their sum bounds the log dynamic range of the incoming error
/// product; the result is `2·ln((D·Ê + 1)/(D + Ê))` with `D = d_plain·d_star`.
pub fn residual_priority<F: Scalar>(strength: &MessageStrength<F>, incoming: &[F]) -> Result<F> {
    if let Some(x) = incoming.iter().find(|x| !(**x >= F::zero())) {
        return Err(Error::Domain(format!("residual estimate {x} is negative")));
    }
    let total: F = incoming.iter().copied().sum();
    Ok(F::lit(2.0) * log_contraction(strength.max_error(), total))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry<F> {
    pub step: usize,
    pub edge: DirectedEdge,
    pub priority: F,
    pub residual: F,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleTrace<F> {
    pub entries: Vec<TraceEntry<F>>,
    /// Message computations including the initial sweep.
    pub total_updates: usize,
}

impl<F: Scalar> ScheduleTrace<F> {
    /// Entries whose realized residual exceeds the logged priority by more than `slack`.
    pub fn bound_violations(&self, slack: F) -> Vec<&TraceEntry<F>> {
        self.entries.iter().filter(|e| e.residual > e.priority + slack).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("step,edge,priority,residual\n");
        for e in &self.entries {
            let _ = writeln!(s, "{},{},{},{}", e.step, e.edge, fmt_g(e.priority.as_f64()), fmt_g(e.residual.as_f64()));
        }
        s
    }
}

struct Pending<F> {
    priority: F,
    index: usize,
    version: u64,
}

impl<F: Scalar> PartialEq for Pending<F> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<F: Scalar> Eq for Pending<F> {}
impl<F: Scalar> PartialOrd for Pending<F> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<F: Scalar> Ord for Pending<F> {
    // max-heap on priority, ties go to the lower edge index
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority
            .partial_cmp(&other.priority)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.index.cmp(&self.index))
            .then_with(|| self.version.cmp(&other.version))
    }
}

/// Residual-scheduled asynchronous sum-product with bound-based priorities.
///
/// All messages are computed once from `init`. Afterwards each step pops the message with the
/// largest priority, recomputes it and records the realized residual. Every message keeps, per
/// input, the summed realized residuals of that input since its own last computation; its
/// priority is [`residual_priority`] of those sums. Stops when the top priority drops below
/// `tol` (converged) or after `max_updates` pops.
pub fn run_residual_scheduled<F: Scalar>(
    model: &PairwiseMrf<F>,
    strengths: &StrengthTable<F>,
    init: Init<F>,
    max_updates: usize,
    tol: F,
) -> Result<(RunResult<F>, ScheduleTrace<F>)> {
    let wiring = Wiring::new(model);
    let n = model.num_directed();
    let start = init.messages(model);
    if start.len() != n {
        return Err(Error::Dimension("initial message set does not match the model".into()));
    }
    // dependents[i] = (j, slot): message i is input `slot` of message j
    let mut dependents: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (j, (_, ins)) in wiring.inputs.iter().enumerate() {
        for (slot, &i) in ins.iter().enumerate() {
            dependents[i].push((j, slot));
        }
    }
    let mut stale: Vec<Vec<F>> = wiring.inputs.iter().map(|(_, ins)| vec![F::zero(); ins.len()]).collect();

    let mut messages = start.clone();
    let mut history = Vec::new();
    for i in 0..n {
        let v = update_with(model, &wiring, &start, i)?;
        let r = max_log_ratio(&v, start.get(i));
        history.push(r);
        messages.set(i, v);
        for &(j, slot) in &dependents[i] {
            stale[j][slot] = stale[j][slot] + r;
        }
    }

    let mut version = vec![0u64; n];
    let mut priority = vec![F::zero(); n];
    let mut heap = BinaryHeap::new();
    for j in 0..n {
        priority[j] = residual_priority(&strengths.message(j), &stale[j])?;
        heap.push(Pending { priority: priority[j], index: j, version: 0 });
    }

    let mut entries = Vec::new();
    let mut status = RunStatus::MaxIters;
    let mut pops = 0;
    while let Some(top) = heap.pop() {
        if top.version != version[top.index] {
            continue;
        }
        if top.priority < tol {
            status = RunStatus::Converged;
            break;
        }
        if pops >= max_updates {
            break;
        }
        let i = top.index;
        let v = update_with(model, &wiring, &messages, i)?;
        let r = max_log_ratio(&v, messages.get(i));
        messages.set(i, v);
        pops += 1;
        history.push(r);
        entries.push(TraceEntry { step: pops, edge: model.directed_edge(i), priority: top.priority, residual: r });

        stale[i].iter_mut().for_each(|x| *x = F::zero());
        version[i] += 1;
        priority[i] = F::zero();
        heap.push(Pending { priority: F::zero(), index: i, version: version[i] });
        for &(j, slot) in &dependents[i] {
            stale[j][slot] = stale[j][slot] + r;
            priority[j] = residual_priority(&strengths.message(j), &stale[j])?;
            version[j] += 1;
            heap.push(Pending { priority: priority[j], index: j, version: version[j] });
        }
    }
    if heap.is_empty() && n == 0 {
        status = RunStatus::Converged;
    }
    let beliefs = beliefs_with(model, &wiring, &messages);
    let result = RunResult { status, iterations: n + pops, messages, history, beliefs };
    Ok((result, ScheduleTrace { entries, total_updates: n + pops }))
}
