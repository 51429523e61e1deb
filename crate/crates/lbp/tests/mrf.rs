mod common;

use common::*;
use lbp::mrf::PairwiseMrf;
use lbp::{parse_model, write_model, DirectedEdge, Error, Matrix, Mrf, Strengths, Topology};

#[test]
fn generator_examples() {
    let k4 = build("complete:4", 0.7);
    assert_eq!((k4.num_nodes(), k4.num_edges()), (4, 6));
    let s = Strengths::from_model(&k4).unwrap();
    for e in s.edges() {
        assert!((e.d_pair - (7.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }
    let c3 = build("cycle:3", 0.5);
    for e in Strengths::from_model(&c3).unwrap().edges() {
        assert!((e.d_pair - 1.0).abs() < 1e-12);
    }
    let torus = build("torus:3x3", 0.42);
    assert_eq!((torus.num_nodes(), torus.num_edges()), (9, 18));
    assert!((0..9).all(|v| torus.degree(v) == 4));
    let k4e = build("k4minus", 0.7);
    assert_eq!(k4e.num_edges(), 5);
    assert!(k4e.edges_subset_of(&k4));
    let grid = build("grid:3x3", 0.7);
    assert_eq!(grid.num_edges(), 12);
    assert!(grid.edges_subset_of(&torus));
}

#[test]
fn generator_errors() {
    assert!(matches!(topo("torus:2x3").build(0.7f64), Err(Error::Dimension(_))));
    assert!(matches!(topo("cycle:2").build(0.7f64), Err(Error::Dimension(_))));
    assert!(matches!(topo("complete:4").build(1.0f64), Err(Error::Domain(_))));
    assert!(matches!("hexagon:3".parse::<Topology>(), Err(Error::InvalidSpec(_))));
    assert!(matches!("grid:3".parse::<Topology>(), Err(Error::InvalidSpec(_))));
    assert!(matches!(topo("tree:0,5").build(0.7f64), Err(Error::Dimension(_))));
}

#[test]
fn topology_names_round_trip() {
    for s in ["complete:5", "k4minus", "complete-minus-edge:5", "grid:2x4", "torus:3x4", "cycle:6", "chain:3", "star:4", "tree:0,0,1"] {
        assert_eq!(topo(s).to_string(), s);
    }
}

#[test]
fn structural_invariants() {
    let mut m = Mrf::binary(3);
    let p = Matrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
    assert_eq!(m.add_edge(0, 0, p.clone()), Err(Error::SelfLoop(0)));
    m.add_edge(2, 0, p.clone()).unwrap();
    assert_eq!(m.add_edge(0, 2, p.clone()), Err(Error::DuplicateEdge(0, 2)));
    assert!(matches!(m.add_edge(0, 1, Matrix::from_rows(&[&[1.0, 2.0, 3.0], &[1.0, 1.0, 1.0]])), Err(Error::Dimension(_))));
    assert!(matches!(m.add_edge(0, 1, Matrix::from_rows(&[&[1.0, 0.0], &[1.0, 1.0]])), Err(Error::NonPositive { .. })));
    assert_eq!(m.add_edge(0, 7, p.clone()), Err(Error::InvalidNode(7)));
    assert!(matches!(m.set_node_potential(1, vec![1.0, -2.0]), Err(Error::NonPositive { .. })));
    // stored with the lower node as rows
    assert_eq!(m.edge_potential(0).get(0, 1), 3.0);
    assert_eq!(m.oriented_potential(2, 0).unwrap(), p);
    assert_eq!(m.potential_entry(0, 2, 1, 0), 3.0);
    assert_eq!(m.directed_index(DirectedEdge::new(1, 2)), Err(Error::MissingEdge(1, 2)));
    assert!(PairwiseMrf::<f64>::new(vec![2, 1]).is_err());
}

#[test]
fn directed_indexing() {
    let m = build("complete:4", 0.6);
    for (i, de) in m.directed_edges().enumerate() {
        assert_eq!(m.directed_index(de).unwrap(), i);
        assert_eq!(m.directed_index(de.reversed()).unwrap(), i ^ 1);
    }
}

#[test]
fn forest_detection() {
    assert!(build("chain:5", 0.7).is_forest());
    assert!(build("tree:0,0,1,1", 0.7).is_forest());
    assert!(!build("cycle:4", 0.7).is_forest());
}

#[test]
fn graph_file_round_trip() {
    let text = "# demo\nnodes 3\ncard 2 3\nnode 0 1 2\nedge 0 1 0.7 0.3 0.3 0.7\nedge 2 1 1 2 3 4 5 6\n";
    let m: Mrf = parse_model(text).unwrap();
    assert_eq!(m.cardinalities(), &[2, 2, 3]);
    assert_eq!(m.node_potential(0), &[1.0, 2.0]);
    // rows of the file matrix are states of node 2; stored with node 1 as rows
    assert_eq!(m.edge_potential(1).get(1, 2), 6.0);
    assert_eq!(m.edge_potential(1).get(0, 2), 5.0);
    let again: Mrf = parse_model(&write_model(&m)).unwrap();
    assert_eq!(again, m);
}

#[test]
fn graph_file_errors_carry_line_numbers() {
    let cases = [
        ("nodes 2\nedge 0 1 1 1 1\n", 2),
        ("nodes 2\n\nedge 0 1 1 1 1 -1\n", 3),
        ("edge 0 1 1 1 1 1\n", 1),
        ("nodes 2\nnode 0 1 x\n", 2),
        ("nodes 2\nfoo\n", 2),
        ("nodes 2\nedge 0 0 1 1 1 1\n", 2),
        ("nodes 2\nedge 0 1 1 1 1 1\ncard 0 3\n", 3),
    ];
    for (text, line) in cases {
        match parse_model::<f64>(text) {
            Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
            other => panic!("expected parse error for {text:?}, got {other:?}"),
        }
    }
    assert!(matches!(parse_model::<f64>("# nothing\n"), Err(Error::Parse { .. })));
    let empty: Mrf = parse_model("nodes 2\n").unwrap();
    assert_eq!(empty.num_edges(), 0);
}
