//! Graph rewrites against the statevector oracle.

use perconet::graph::{measure, measure_x, Basis, GraphState, Vertex};
use perconet::oracle::{build_graph_state, check_stabilizers, connected_graphs, verify_rewrite};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_graph(rng: &mut ChaCha8Rng, n: u32, p: f64) -> GraphState {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random::<f64>() < p {
                edges.push([a, b]);
            }
        }
    }
    GraphState::from_edges(0..n, &edges).unwrap()
}

#[test]
fn z_and_y_rules_on_all_small_connected_graphs() {
    let mut cases = 0;
    for n in 1..=6 {
        for g in connected_graphs(n) {
            for v in 0..n {
                for basis in [Basis::Z, Basis::Y] {
                    let h = measure(&g, v, basis).unwrap();
                    assert!(verify_rewrite(&g, v, basis, &h), "{basis:?} on {v} of {:?}", g.edges());
                    cases += 1;
                }
            }
        }
    }
    assert_eq!(cases, 2 * (1 + 2 + 2 * 3 + 6 * 4 + 21 * 5 + 112 * 6));
}

#[test]
fn x_rule_for_every_pivot() {
    for n in 2..=6 {
        for g in connected_graphs(n) {
            for v in 0..n {
                for &b0 in g.neighbors(v).unwrap() {
                    let h = measure_x(&g, v, Some(b0)).unwrap();
                    assert!(verify_rewrite(&g, v, Basis::X, &h), "X on {v} pivot {b0} of {:?}", g.edges());
                }
            }
        }
    }
}

#[test]
fn random_seven_vertex_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..40 {
        let g = random_graph(&mut rng, 7, 0.45);
        let v = rng.random_range(0..7);
        for basis in [Basis::X, Basis::Y, Basis::Z] {
            let h = measure(&g, v, basis).unwrap();
            assert!(verify_rewrite(&g, v, basis, &h), "{basis:?} on {v} of {:?}", g.edges());
        }
    }
}

#[test]
fn swapped_rules_are_refuted() {
    // on the 4-path, Z on vertex 1 disconnects the graph while Y keeps a
    // connected 3-path, so the two results are not locally equivalent
    let g = GraphState::path(4);
    let wrong = measure(&g, 1, Basis::Z).unwrap();
    assert!(!verify_rewrite(&g, 1, Basis::Y, &wrong));
    let wrong = measure(&g, 1, Basis::Y).unwrap();
    assert!(!verify_rewrite(&g, 1, Basis::Z, &wrong));
}

#[test]
fn stabilizers_of_random_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..300 {
        let n = rng.random_range(1..=10);
        let density = rng.random::<f64>();
        let g = random_graph(&mut rng, n, density);
        let psi = build_graph_state(&g).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-10);
        assert!(check_stabilizers(&g, &psi), "graph {i}: {:?}", g.edges());
    }
}

#[test]
fn stabilizers_detect_a_wrong_graph() {
    let g = GraphState::path(4);
    let psi = build_graph_state(&g).unwrap();
    let mut h = g.clone();
    h.toggle_edge(0 as Vertex, 3);
    assert!(!check_stabilizers(&h, &psi));
}
