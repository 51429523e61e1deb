use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::mrf::PairwiseMrf;
use crate::scalar::Scalar;

/// Construction aborts beyond this many nodes.
pub const MAX_TREE_NODES: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeKind {
    Bethe { depth: usize },
    SelfAvoiding,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeNode {
    /// Original node id.
    pub label: usize,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub depth: usize,
    /// Undirected edge of the original model joining this node to its parent.
    pub edge: Option<usize>,
    /// Self-avoiding trees only: neighbors (other than the parent) already on the root path.
    /// Each is a step that would close a cycle; they are kept as `(label, edge)` pairs.
    pub closing: Vec<(usize, usize)>,
}

/// Unrolled computation tree of a graph rooted at one node. Node 0 is the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComputationTree {
    pub kind: TreeKind,
    nodes: Vec<TreeNode>,
}

impl ComputationTree {
    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &TreeNode {
        &self.nodes[i]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn max_depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    /// Labels on the path from node `i` up to the root, starting at `i`.
    pub fn path_labels(&self, mut i: usize) -> Vec<usize> {
        let mut out = vec![self.nodes[i].label];
        while let Some(p) = self.nodes[i].parent {
            out.push(self.nodes[p].label);
            i = p;
        }
        out
    }

    /// Indented dump, one node per line; closing steps are shown in brackets.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            let n = &self.nodes[i];
            let _ = write!(s, "{}{}", "  ".repeat(n.depth), n.label);
            for (u, _) in &n.closing {
                let _ = write!(s, " [{u}]");
            }
            s.push('\n');
            stack.extend(n.children.iter().rev());
        }
        s
    }

    /// Exact marginal of the root when the tree is read as a tree-structured model carrying the
    /// original node and edge potentials. Closing steps are ignored.
    pub fn root_marginal<F: Scalar>(&self, model: &PairwiseMrf<F>) -> Vec<F> {
        // children always have larger indices than their parents
        let mut up: Vec<Vec<F>> = vec![Vec::new(); self.nodes.len()];
        for i in (0..self.nodes.len()).rev() {
            let n = &self.nodes[i];
            let mut b = model.node_potential(n.label).to_vec();
            for &c in &n.children {
                let (cl, e) = (self.nodes[c].label, self.nodes[c].edge.expect("child has an edge"));
                let cu = &up[c];
                for (x, bx) in b.iter_mut().enumerate() {
                    let m: F = cu.iter().enumerate().map(|(y, &v)| v * model.potential_entry(e, cl, y, x)).sum();
                    *bx = *bx * m;
                }
            }
            let s: F = b.iter().copied().sum();
            up[i] = b.into_iter().map(|x| x / s).collect();
        }
        std::mem::take(&mut up[0])
    }
}

fn push(nodes: &mut Vec<TreeNode>, parent: usize, label: usize, edge: usize) -> Result<usize> {
    if nodes.len() >= MAX_TREE_NODES {
        return Err(Error::TreeTooLarge(MAX_TREE_NODES));
    }
    let i = nodes.len();
    let depth = nodes[parent].depth + 1;
    nodes.push(TreeNode { label, parent: Some(parent), children: Vec::new(), depth, edge: Some(edge), closing: Vec::new() });
    nodes[parent].children.push(i);
    Ok(i)
}

fn root_node(v: usize) -> TreeNode {
    TreeNode { label: v, parent: None, children: Vec::new(), depth: 0, edge: None, closing: Vec::new() }
}

/// All non-backtracking walks of length at most `depth` from `v`, children in ascending id order.
pub fn bethe_tree<F: Scalar>(model: &PairwiseMrf<F>, v: usize, depth: usize) -> Result<ComputationTree> {
    if v >= model.num_nodes() {
        return Err(Error::InvalidNode(v));
    }
    let mut nodes = vec![root_node(v)];
    let mut i = 0;
    while i < nodes.len() {
        if nodes[i].depth < depth {
            let label = nodes[i].label;
            let back = nodes[i].parent.map(|p| nodes[p].label);
            for &(u, e) in model.incident(label) {
                if Some(u) != back {
                    push(&mut nodes, i, u, e)?;
                }
            }
        }
        i += 1;
    }
    Ok(ComputationTree { kind: TreeKind::Bethe { depth }, nodes })
}

/// All self-avoiding walks from `v`. A step onto a node already on the path becomes a
/// closing entry of the current node instead of a child.
pub fn saw_tree<F: Scalar>(model: &PairwiseMrf<F>, v: usize) -> Result<ComputationTree> {
    if v >= model.num_nodes() {
        return Err(Error::InvalidNode(v));
    }
    let mut nodes = vec![root_node(v)];
    let mut on_path = vec![false; model.num_nodes()];
    build_saw(model, &mut nodes, &mut on_path, 0)?;
    Ok(ComputationTree { kind: TreeKind::SelfAvoiding, nodes })
}

fn build_saw<F: Scalar>(model: &PairwiseMrf<F>, nodes: &mut Vec<TreeNode>, on_path: &mut [bool], i: usize) -> Result<()> {
    let label = nodes[i].label;
    let back = nodes[i].parent.map(|p| nodes[p].label);
    on_path[label] = true;
    for &(u, e) in model.incident(label) {
        if Some(u) == back {
            continue;
        }
        if on_path[u] {
            nodes[i].closing.push((u, e));
        } else {
            let c = push(nodes, i, u, e)?;
            build_saw(model, nodes, on_path, c)?;
        }
    }
    on_path[label] = false;
    Ok(())
}
