#![allow(dead_code)]

use lbp::{Matrix, Mrf, Topology};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn topo(s: &str) -> Topology {
    s.parse().expect("valid generator")
}

pub fn build(s: &str, eta: f64) -> Mrf {
    topo(s).build(eta).expect("valid model")
}

pub const REFERENCE_GRAPHS: [&str; 4] = ["complete:4", "k4minus", "torus:3x3", "grid:3x3"];

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, spread: f64) -> Matrix {
    Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| rng.gen_range(-spread..spread).exp()).collect()).unwrap()
}

/// Random model on `n` nodes: each pair is an edge with probability `p`.
pub fn random_model(rng: &mut ChaCha8Rng, n: usize, max_card: usize, p: f64, spread: f64) -> Mrf {
    let mut m = Mrf::new((0..n).map(|_| rng.gen_range(2..=max_card)).collect()).unwrap();
    for v in 0..n {
        let k = m.cardinality(v);
        m.set_node_potential(v, (0..k).map(|_| rng.gen_range(-1.5f64..1.5).exp()).collect()).unwrap();
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                let pot = random_matrix(rng, m.cardinality(i), m.cardinality(j), spread);
                m.add_edge(i, j, pot).unwrap();
            }
        }
    }
    m
}

/// Random tree on `n` nodes with random potentials.
pub fn random_tree(rng: &mut ChaCha8Rng, n: usize, max_card: usize, spread: f64) -> Mrf {
    let mut m = Mrf::new((0..n).map(|_| rng.gen_range(2..=max_card)).collect()).unwrap();
    for v in 0..n {
        let k = m.cardinality(v);
        m.set_node_potential(v, (0..k).map(|_| rng.gen_range(-1.5f64..1.5).exp()).collect()).unwrap();
    }
    for v in 1..n {
        let p = rng.gen_range(0..v);
        let pot = random_matrix(rng, m.cardinality(p), m.cardinality(v), spread);
        m.add_edge(p, v, pot).unwrap();
    }
    m
}

/// Exact marginals by direct enumeration with plain products; small models only.
pub fn brute_marginals(m: &Mrf) -> Vec<Vec<f64>> {
    let card = m.cardinalities().to_vec();
    let total: usize = card.iter().product();
    let mut sums: Vec<Vec<f64>> = card.iter().map(|&k| vec![0.0; k]).collect();
    for idx in 0..total {
        let mut x = Vec::with_capacity(card.len());
        let mut r = idx;
        for &k in &card {
            x.push(r % k);
            r /= k;
        }
        let mut w = 1.0;
        for (v, &s) in x.iter().enumerate() {
            w *= m.node_potential(v)[s];
        }
        for (e, &(a, b)) in m.edges().iter().enumerate() {
            w *= m.edge_potential(e).get(x[a], x[b]);
        }
        for (v, &s) in x.iter().enumerate() {
            sums[v][s] += w;
        }
    }
    for s in &mut sums {
        let z: f64 = s.iter().sum();
        s.iter_mut().for_each(|p| *p /= z);
    }
    sums
}
