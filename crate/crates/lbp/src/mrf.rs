use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Message direction `from -> to` along an existing edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DirectedEdge {
    pub from: usize,
    pub to: usize,
}

impl DirectedEdge {
    pub fn new(from: usize, to: usize) -> Self {
        Self { from, to }
    }

    pub fn reversed(self) -> Self {
        Self { from: self.to, to: self.from }
    }
}

impl fmt::Display for DirectedEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.from, self.to)
    }
}

/// Discrete pairwise Markov random field with strictly positive potentials.
///
/// Edge potentials are stored with the lower node index as the row variable. Directed edge
/// indices are `2e` for `lo -> hi` and `2e + 1` for `hi -> lo` where `e` is the undirected index.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseMrf<F> {
    cardinality: Vec<usize>,
    node_potentials: Vec<Vec<F>>,
    edges: Vec<(usize, usize)>,
    edge_potentials: Vec<Matrix<F>>,
    // sorted by neighbor id: (neighbor, undirected edge index)
    adjacency: Vec<Vec<(usize, usize)>>,
}

fn check_positive<F: Scalar>(values: &[F], location: impl Fn(usize) -> String) -> Result<()> {
    for (i, &v) in values.iter().enumerate() {
        if !(v > F::zero()) || !v.is_finite() {
            return Err(Error::NonPositive { location: location(i), value: v.as_f64() });
        }
    }
    Ok(())
}

impl<F: Scalar> PairwiseMrf<F> {
    /// Creates an edgeless model with unit node potentials.
    pub fn new(cardinality: Vec<usize>) -> Result<Self> {
        if let Some(i) = cardinality.iter().position(|&k| k < 2) {
            return Err(Error::Dimension(format!("node {i} needs at least 2 states")));
        }
        let n = cardinality.len();
        Ok(Self {
            node_potentials: cardinality.iter().map(|&k| vec![F::one(); k]).collect(),
            cardinality,
            edges: Vec::new(),
            edge_potentials: Vec::new(),
            adjacency: vec![Vec::new(); n],
        })
    }

    pub fn binary(num_nodes: usize) -> Self {
        Self::new(vec![2; num_nodes]).expect("binary cardinalities are valid")
    }

    fn check_node(&self, v: usize) -> Result<()> {
        if v < self.num_nodes() {
            Ok(())
        } else {
            Err(Error::InvalidNode(v))
        }
    }

    pub fn set_node_potential(&mut self, v: usize, potential: Vec<F>) -> Result<()> {
        self.check_node(v)?;
        if potential.len() != self.cardinality[v] {
            return Err(Error::Dimension(format!(
                "node {v} potential has {} entries, cardinality is {}",
                potential.len(),
                self.cardinality[v]
            )));
        }
        check_positive(&potential, |i| format!("node {v} state {i}"))?;
        self.node_potentials[v] = potential;
        Ok(())
    }

    /// Adds edge `(i, j)` with `potential[x_i][x_j]`; returns the undirected edge index.
    pub fn add_edge(&mut self, i: usize, j: usize, potential: Matrix<F>) -> Result<usize> {
        self.check_node(i)?;
        self.check_node(j)?;
        if i == j {
            return Err(Error::SelfLoop(i));
        }
        if self.edge_index(i, j).is_some() {
            return Err(Error::DuplicateEdge(i.min(j), i.max(j)));
        }
        if potential.rows() != self.cardinality[i] || potential.cols() != self.cardinality[j] {
            return Err(Error::Dimension(format!(
                "edge ({i}, {j}) potential is {}x{}, expected {}x{}",
                potential.rows(),
                potential.cols(),
                self.cardinality[i],
                self.cardinality[j]
            )));
        }
        let cols = potential.cols();
        check_positive(potential.as_slice(), |k| format!("edge ({i}, {j}) entry ({}, {})", k / cols, k % cols))?;
        let (lo, hi, stored) = if i < j { (i, j, potential) } else { (j, i, potential.transpose()) };
        let e = self.edges.len();
        self.edges.push((lo, hi));
        self.edge_potentials.push(stored);
        for (a, b) in [(lo, hi), (hi, lo)] {
            let adj = &mut self.adjacency[a];
            let pos = adj.partition_point(|&(u, _)| u < b);
            adj.insert(pos, (b, e));
        }
        Ok(e)
    }

    pub fn num_nodes(&self) -> usize {
        self.cardinality.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn cardinality(&self, v: usize) -> usize {
        self.cardinality[v]
    }

    pub fn cardinalities(&self) -> &[usize] {
        &self.cardinality
    }

    pub fn node_potential(&self, v: usize) -> &[F] {
        &self.node_potentials[v]
    }

    /// Undirected edges as `(lo, hi)` pairs in insertion order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Stored potential of edge `e`, rows indexed by the lower endpoint.
    pub fn edge_potential(&self, e: usize) -> &Matrix<F> {
        &self.edge_potentials[e]
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        let adj = self.adjacency.get(a)?;
        adj.binary_search_by_key(&b, |&(u, _)| u).ok().map(|p| adj[p].1)
    }

    /// Neighbors of `v` in ascending id order.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[v].iter().map(|&(u, _)| u)
    }

    /// `(neighbor, undirected edge index)` pairs of `v` in ascending neighbor order.
    pub fn incident(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn num_directed(&self) -> usize {
        2 * self.edges.len()
    }

    pub fn directed_edge(&self, index: usize) -> DirectedEdge {
        let (lo, hi) = self.edges[index / 2];
        if index.is_multiple_of(2) {
            DirectedEdge::new(lo, hi)
        } else {
            DirectedEdge::new(hi, lo)
        }
    }

    pub fn directed_index(&self, de: DirectedEdge) -> Result<usize> {
        let e = self.edge_index(de.from, de.to).ok_or(Error::MissingEdge(de.from, de.to))?;
        Ok(self.directed_index_of(e, de.from))
    }

    /// Index of the directed edge leaving `from` along undirected edge `e`.
    pub fn directed_index_of(&self, e: usize, from: usize) -> usize {
        if self.edges[e].0 == from {
            2 * e
        } else {
            2 * e + 1
        }
    }

    pub fn directed_edges(&self) -> impl Iterator<Item = DirectedEdge> + '_ {
        (0..self.num_directed()).map(|i| self.directed_edge(i))
    }

    /// Potential of `from -- to` with `from`'s states as rows.
    pub fn oriented_potential(&self, from: usize, to: usize) -> Result<Matrix<F>> {
        let e = self.edge_index(from, to).ok_or(Error::MissingEdge(from, to))?;
        Ok(if from < to { self.edge_potentials[e].clone() } else { self.edge_potentials[e].transpose() })
    }

    /// Entry `ψ(x_from, x_to)` of the edge potential along undirected edge `e`.
    pub fn potential_entry(&self, e: usize, from: usize, x_from: usize, x_to: usize) -> F {
        if self.edges[e].0 == from {
            self.edge_potentials[e].get(x_from, x_to)
        } else {
            self.edge_potentials[e].get(x_to, x_from)
        }
    }

    /// True if the graph has no cycles.
    pub fn is_forest(&self) -> bool {
        let mut parent: Vec<usize> = (0..self.num_nodes()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &(a, b) in &self.edges {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra == rb {
                return false;
            }
            parent[ra] = rb;
        }
        true
    }

    /// True if every edge of `self` is an edge of `other` (same node count).
    pub fn edges_subset_of(&self, other: &Self) -> bool {
        self.num_nodes() == other.num_nodes()
            && self.edges.iter().all(|&(a, b)| other.edge_index(a, b).is_some())
    }
}

/// Named graph families used in the experiments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Topology {
    Complete(usize),
    /// Complete graph with the edge between the two highest-numbered nodes removed.
    CompleteMinusEdge(usize),
    Grid(usize, usize),
    Torus(usize, usize),
    Cycle(usize),
    Chain(usize),
    Star(usize),
    /// `parents[i]` is the parent of node `i + 1`; node 0 is the root.
    Tree(Vec<usize>),
}

impl Topology {
    pub fn num_nodes(&self) -> usize {
        match *self {
            Topology::Complete(n) | Topology::CompleteMinusEdge(n) => n,
            Topology::Grid(r, c) | Topology::Torus(r, c) => r * c,
            Topology::Cycle(n) | Topology::Chain(n) | Topology::Star(n) => n,
            Topology::Tree(ref p) => p.len() + 1,
        }
    }

    pub fn edge_list(&self) -> Result<Vec<(usize, usize)>> {
        let bad = |msg: &str| Err(Error::Dimension(format!("{self}: {msg}")));
        let mut out = Vec::new();
        match *self {
            Topology::Complete(n) => {
                if n < 2 {
                    return bad("needs at least 2 nodes");
                }
                for i in 0..n {
                    for j in i + 1..n {
                        out.push((i, j));
                    }
                }
            }
            Topology::CompleteMinusEdge(n) => {
                if n < 3 {
                    return bad("needs at least 3 nodes");
                }
                for i in 0..n {
                    for j in i + 1..n {
                        if (i, j) != (n - 2, n - 1) {
                            out.push((i, j));
                        }
                    }
                }
            }
            Topology::Grid(r, c) => {
                if r == 0 || c == 0 || r * c < 2 {
                    return bad("needs at least 2 cells");
                }
                for i in 0..r {
                    for j in 0..c {
                        let v = i * c + j;
                        if j + 1 < c {
                            out.push((v, v + 1));
                        }
                        if i + 1 < r {
                            out.push((v, v + c));
                        }
                    }
                }
            }
            Topology::Torus(r, c) => {
                if r < 3 || c < 3 {
                    return bad("both dimensions must be at least 3");
                }
                for i in 0..r {
                    for j in 0..c {
                        let v = i * c + j;
                        let right = i * c + (j + 1) % c;
                        let down = ((i + 1) % r) * c + j;
                        out.push((v.min(right), v.max(right)));
                        out.push((v.min(down), v.max(down)));
                    }
                }
            }
            Topology::Cycle(n) => {
                if n < 3 {
                    return bad("needs at least 3 nodes");
                }
                for i in 0..n {
                    let j = (i + 1) % n;
                    out.push((i.min(j), i.max(j)));
                }
            }
            Topology::Chain(n) => {
                if n < 2 {
                    return bad("needs at least 2 nodes");
                }
                out.extend((0..n - 1).map(|i| (i, i + 1)));
            }
            Topology::Star(n) => {
                if n < 2 {
                    return bad("needs at least 2 nodes");
                }
                out.extend((1..n).map(|i| (0, i)));
            }
            Topology::Tree(ref parents) => {
                if parents.is_empty() {
                    return bad("needs at least 2 nodes");
                }
                for (i, &p) in parents.iter().enumerate() {
                    if p > i {
                        return bad("parent ids must precede their children");
                    }
                    out.push((p, i + 1));
                }
            }
        }
        Ok(out)
    }

    /// Binary model on this topology with edge potentials `[[η, 1−η], [1−η, η]]` and unit node
    /// potentials.
    pub fn build<F: Scalar>(&self, eta: F) -> Result<PairwiseMrf<F>> {
        if !(eta > F::zero() && eta < F::one()) {
            return Err(Error::Domain(format!("eta = {eta} must lie in (0, 1)")));
        }
        let pot = Matrix::from_vec(2, 2, vec![eta, F::one() - eta, F::one() - eta, eta]).expect("2x2");
        let mut m = PairwiseMrf::binary(self.num_nodes());
        for (a, b) in self.edge_list()? {
            m.add_edge(a, b, pot.clone())?;
        }
        Ok(m)
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Topology::Complete(n) => write!(f, "complete:{n}"),
            Topology::CompleteMinusEdge(4) => write!(f, "k4minus"),
            Topology::CompleteMinusEdge(n) => write!(f, "complete-minus-edge:{n}"),
            Topology::Grid(r, c) => write!(f, "grid:{r}x{c}"),
            Topology::Torus(r, c) => write!(f, "torus:{r}x{c}"),
            Topology::Cycle(n) => write!(f, "cycle:{n}"),
            Topology::Chain(n) => write!(f, "chain:{n}"),
            Topology::Star(n) => write!(f, "star:{n}"),
            Topology::Tree(p) => {
                let s: Vec<String> = p.iter().map(|x| x.to_string()).collect();
                write!(f, "tree:{}", s.join(","))
            }
        }
    }
}

impl FromStr for Topology {
    type Err = Error;

    /// Accepts `complete:N`, `k4minus`, `complete-minus-edge:N`, `grid:RxC`, `torus:RxC`,
    /// `cycle:N`, `chain:N`, `star:N` and `tree:P1,P2,...` (parent of nodes 1, 2, ...).
    fn from_str(s: &str) -> Result<Self> {
        let err = Error::InvalidSpec;
        let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
        let count = || arg.parse::<usize>().map_err(|_| err(format!("bad node count in '{s}'")));
        let dims = || -> Result<(usize, usize)> {
            let (r, c) = arg.split_once('x').ok_or_else(|| err(format!("expected RxC in '{s}'")))?;
            let p = |x: &str| x.parse::<usize>().map_err(|_| err(format!("bad dimension in '{s}'")));
            Ok((p(r)?, p(c)?))
        };
        Ok(match kind {
            "complete" => Topology::Complete(count()?),
            "k4minus" if arg.is_empty() => Topology::CompleteMinusEdge(4),
            "complete-minus-edge" => Topology::CompleteMinusEdge(count()?),
            "grid" => {
                let (r, c) = dims()?;
                Topology::Grid(r, c)
            }
            "torus" => {
                let (r, c) = dims()?;
                Topology::Torus(r, c)
            }
            "cycle" => Topology::Cycle(count()?),
            "chain" => Topology::Chain(count()?),
            "star" => Topology::Star(count()?),
            "tree" => Topology::Tree(
                arg.split(',')
                    .map(|x| x.trim().parse::<usize>().map_err(|_| err(format!("bad parent list in '{s}'"))))
                    .collect::<Result<_>>()?,
            ),
            _ => return Err(err(format!("unknown generator '{s}'"))),
        })
    }
}

/// Parses the line-oriented graph format.
///
/// ```text
/// # comment
/// nodes 3
/// card 2 3
/// node 0 1.0 2.0
/// edge 0 1 0.7 0.3 0.3 0.7
/// ```
///
/// `card` lines must precede any `node` or `edge` line mentioning that node. Edge entries are
/// row-major with rows indexed by the state of the first node listed.
pub fn parse_model<F: Scalar>(text: &str) -> Result<PairwiseMrf<F>> {
    let mut n: Option<usize> = None;
    let mut card: Vec<usize> = Vec::new();
    let mut model: Option<PairwiseMrf<F>> = None;
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let perr = |msg: String| Error::Parse { line, msg };
        let mut toks = content.split_whitespace();
        let key = toks.next().unwrap_or_default();
        let rest: Vec<&str> = toks.collect();
        let idx = |t: &str| t.parse::<usize>().map_err(|_| perr(format!("expected a node index, got '{t}'")));
        let num = |t: &str| -> Result<F> {
            t.parse::<f64>().map(F::lit).map_err(|_| perr(format!("expected a number, got '{t}'")))
        };
        let located = |e: Error| match e {
            Error::Parse { .. } => e,
            other => perr(other.to_string()),
        };
        match key {
            "nodes" => {
                if n.is_some() {
                    return Err(perr("duplicate 'nodes' line".into()));
                }
                if rest.len() != 1 {
                    return Err(perr("'nodes' takes one argument".into()));
                }
                let count = idx(rest[0])?;
                n = Some(count);
                card = vec![2; count];
            }
            "card" => {
                let count = n.ok_or_else(|| perr("'card' before 'nodes'".into()))?;
                if model.is_some() {
                    return Err(perr("'card' after node or edge lines".into()));
                }
                if rest.len() != 2 {
                    return Err(perr("'card' takes a node and a state count".into()));
                }
                let v = idx(rest[0])?;
                if v >= count {
                    return Err(perr(format!("node {v} is out of range")));
                }
                card[v] = idx(rest[1])?;
            }
            "node" | "edge" => {
                if n.is_none() {
                    return Err(perr(format!("'{key}' before 'nodes'")));
                }
                if model.is_none() {
                    model = Some(PairwiseMrf::new(card.clone()).map_err(located)?);
                }
                let m = model.as_mut().expect("initialized above");
                if key == "node" {
                    let (first, vals) = rest.split_first().ok_or_else(|| perr("'node' needs an index".into()))?;
                    let v = idx(first)?;
                    let pot = vals.iter().map(|t| num(t)).collect::<Result<Vec<F>>>()?;
                    m.set_node_potential(v, pot).map_err(located)?;
                } else {
                    if rest.len() < 2 {
                        return Err(perr("'edge' needs two node indices".into()));
                    }
                    let (i, j) = (idx(rest[0])?, idx(rest[1])?);
                    let vals = rest[2..].iter().map(|t| num(t)).collect::<Result<Vec<F>>>()?;
                    let (ci, cj) = (
                        *card.get(i).ok_or_else(|| perr(format!("node {i} is out of range")))?,
                        *card.get(j).ok_or_else(|| perr(format!("node {j} is out of range")))?,
                    );
                    let pot = Matrix::from_vec(ci, cj, vals)
                        .ok_or_else(|| perr(format!("edge ({i}, {j}) needs {} entries", ci * cj)))?;
                    m.add_edge(i, j, pot).map_err(located)?;
                }
            }
            other => return Err(perr(format!("unknown directive '{other}'"))),
        }
    }
    match model {
        Some(m) => Ok(m),
        None => {
            let count = n.ok_or(Error::Parse { line: 0, msg: "missing 'nodes' line".into() })?;
            PairwiseMrf::new(card).map_err(|e| Error::Parse { line: 0, msg: format!("{e} ({count} nodes)") })
        }
    }
}

/// Writes a model in the format read by [`parse_model`].
pub fn write_model<F: Scalar>(model: &PairwiseMrf<F>) -> String {
    let mut s = format!("nodes {}\n", model.num_nodes());
    for v in 0..model.num_nodes() {
        if model.cardinality(v) != 2 {
            s += &format!("card {v} {}\n", model.cardinality(v));
        }
    }
    for v in 0..model.num_nodes() {
        let p: Vec<String> = model.node_potential(v).iter().map(|x| format!("{:e}", x.as_f64())).collect();
        s += &format!("node {v} {}\n", p.join(" "));
    }
    for (e, &(a, b)) in model.edges().iter().enumerate() {
        let p: Vec<String> = model.edge_potential(e).as_slice().iter().map(|x| format!("{:e}", x.as_f64())).collect();
        s += &format!("edge {a} {b} {}\n", p.join(" "));
    }
    s
}
