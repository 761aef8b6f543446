mod common;

use common::*;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tdnet_core::centrality::{cross_betweenness, cross_closeness, weighted_cross_betweenness};
use tdnet_core::graph::{bfs_sssp, UNREACHED};
use tdnet_core::{VertexId, WeightedSourceSet};

#[test]
fn sssp_matches_floyd_warshall_and_path_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let n = rng.gen_range(10..=40);
        let g = random_two_layer(&mut rng, n);
        let d = floyd_warshall(&g);
        let mut adj = vec![Vec::new(); n];
        for e in g.edges() {
            adj[e.u.index()].push(e.v.index());
            adj[e.v.index()].push(e.u.index());
        }
        for s in g.vertices() {
            let sp = bfs_sssp(&g, s).unwrap();
            for v in g.vertices() {
                let want = d[s.index()][v.index()];
                let got = sp.dist[v.index()];
                assert_eq!(got == UNREACHED, want == INF);
                if want != INF {
                    assert_eq!(got, want);
                    let paths = shortest_paths(&adj, &d, s.index(), v.index());
                    assert_eq!(sp.sigma[v.index()], paths.len() as u128);
                }
            }
        }
    }
}

#[test]
fn closeness_matches_oracle_for_arbitrary_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for case in 0..60 {
        let n = rng.gen_range(10..=50);
        let g = random_two_layer(&mut rng, n);
        let all: Vec<VertexId> = g.vertices().collect();
        let from = random_subset(&mut rng, &all, n / 2);
        let rest: Vec<VertexId> = all.iter().copied().filter(|v| !from.contains(v)).collect();
        let to = random_subset(&mut rng, &rest, n);
        let t = cross_closeness(&g, &from, &to).unwrap();
        let want = oracle_closeness(&g, &from, &to);
        assert_eq!(t.values.len(), from.len());
        for (p, w) in from.iter().zip(&want) {
            assert_close(t.get(*p).unwrap(), w, 1e-12, &format!("case {case} vertex {p}"));
        }
    }
}

#[test]
fn betweenness_matches_oracle_for_arbitrary_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for case in 0..60 {
        let n = rng.gen_range(10..=50);
        let g = random_two_layer(&mut rng, n);
        let all: Vec<VertexId> = g.vertices().collect();
        let sources = random_subset(&mut rng, &all, n / 2);
        let rest: Vec<VertexId> = all.iter().copied().filter(|v| !sources.contains(v)).collect();
        let targets = random_subset(&mut rng, &rest, n);
        let t = cross_betweenness(&g, &sources, &targets).unwrap();
        let unit: Vec<(VertexId, i64)> = sources.iter().map(|&p| (p, 1)).collect();
        let want = oracle_betweenness(&g, &unit, &targets);
        for v in g.vertices() {
            assert_close(t.get(v).unwrap(), &want[v.index()], 1e-12, &format!("case {case} vertex {v}"));
        }
    }
}

#[test]
fn weighted_betweenness_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for case in 0..60 {
        let n = rng.gen_range(10..=50);
        let g = random_two_layer(&mut rng, n);
        let t_side = layer_vertices(&g, true);
        let d_side = layer_vertices(&g, false);
        let sources = random_subset(&mut rng, &t_side, 8);
        let targets = random_subset(&mut rng, &d_side, n);
        // integer kW ratings, as for generators and inverters
        let weighted: Vec<(VertexId, i64)> = sources
            .iter()
            .map(|&p| (p, rng.gen_range(1..=2_000_000)))
            .collect();
        let set = WeightedSourceSet::new(weighted.iter().map(|&(p, w)| (p, w as f64)).collect()).unwrap();
        let t = weighted_cross_betweenness(&g, &set, &targets).unwrap();
        let want = oracle_betweenness(&g, &weighted, &targets);
        for v in g.vertices() {
            assert_close(t.get(v).unwrap(), &want[v.index()], 1e-12, &format!("case {case} vertex {v}"));
        }
    }
}

/// Every shortest p-q path has d(p,q) - 1 interior vertices, so the total
/// betweenness mass is the sum of d - 1 over reachable pairs.
#[test]
fn betweenness_mass_equals_interior_path_length() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let mut nonzero = 0;
    for _ in 0..60 {
        let n = rng.gen_range(10..=60);
        let g = random_two_layer(&mut rng, n);
        let sources = random_subset(&mut rng, &layer_vertices(&g, true), n);
        let targets = random_subset(&mut rng, &layer_vertices(&g, false), n);
        let t = cross_betweenness(&g, &sources, &targets).unwrap();
        let d = floyd_warshall(&g);
        let mut mass = BigRational::zero();
        for p in &sources {
            for q in &targets {
                let x = d[p.index()][q.index()];
                if x != INF {
                    mass += rational(x as i64 - 1);
                }
            }
        }
        let got: f64 = t.values.values().sum();
        if mass.is_zero() {
            assert_eq!(got, 0.0);
        } else {
            nonzero += 1;
            assert_close(got, &mass, 1e-12, "mass");
        }
    }
    assert!(nonzero > 30, "only {nonzero} cases had connected pairs");
}
