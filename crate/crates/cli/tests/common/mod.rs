#![allow(dead_code)]

use std::path::{Path, PathBuf};

use kpart_cli::serialize_graph;
use kpart_core::graph::{families, Graph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Named {
    pub name: String,
    pub graph: Graph,
}

fn named(name: impl Into<String>, graph: Graph) -> Named {
    Named { name: name.into(), graph }
}

/// Connected random graph: a random spanning tree plus independent extra edges.
pub fn random_graph(n: usize, p: f64, weighted: bool, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    let mut present = vec![vec![false; n]; n];
    let weight = |rng: &mut ChaCha8Rng| if weighted { rng.random_range(1..=4) as f64 * 0.5 } else { 1.0 };
    for v in 1..n {
        let u = rng.random_range(0..v);
        present[u][v] = true;
        edges.push((u, v, weight(&mut rng)));
    }
    for u in 0..n {
        for v in u + 1..n {
            if !present[u][v] && rng.random_bool(p) {
                edges.push((u, v, weight(&mut rng)));
            }
        }
    }
    Graph::with_degree_weights(n, edges).unwrap()
}

/// Desk-scale corpus: every graph has n ≤ 10, degree weights and no isolated vertex.
pub fn corpus() -> Vec<Named> {
    let mut c = Vec::new();
    for n in [3, 4, 5, 6, 8, 10] {
        c.push(named(format!("path{n}"), families::path(n).unwrap()));
    }
    for n in [4, 5, 6, 8, 10] {
        c.push(named(format!("cycle{n}"), families::cycle(n).unwrap()));
    }
    for n in [3, 4, 5, 6] {
        c.push(named(format!("clique{n}"), families::clique(n).unwrap()));
    }
    for sizes in [&[3, 3][..], &[2, 2, 2], &[3, 3, 3], &[4, 4], &[2, 3, 4], &[5, 5]] {
        let name = sizes.iter().map(|s| s.to_string()).collect::<Vec<_>>().join("+");
        c.push(named(format!("cliques{name}"), families::clique_union(sizes).unwrap()));
    }
    for (m, b) in [(3, 0), (3, 1), (4, 0), (4, 2)] {
        c.push(named(format!("barbell{m}_{b}"), families::barbell(m, b).unwrap()));
    }
    for (i, (n, p)) in [(6, 0.3), (7, 0.3), (8, 0.25), (9, 0.2), (10, 0.2), (10, 0.4)].into_iter().enumerate() {
        c.push(named(format!("gnp{n}_{i}"), random_graph(n, p, false, 1000 + i as u64)));
    }
    for (i, n) in [7, 9].into_iter().enumerate() {
        c.push(named(format!("weighted{n}_{i}"), random_graph(n, 0.3, true, 2000 + i as u64)));
    }
    c
}

pub fn write_graph(dir: &Path, name: &str, g: &Graph) -> PathBuf {
    let path = dir.join(format!("{name}.graph"));
    std::fs::write(&path, serialize_graph(g)).unwrap();
    path
}

pub fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("data").join(name)
}

pub fn schema() -> serde_json::Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema").join("report.schema.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}
