#![allow(dead_code)]

//! Brute-force references for the centrality code: Floyd-Warshall
//! distances and explicit enumeration of every shortest path, with exact
//! rational arithmetic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use tdnet_core::{LayerId, MultilayerGraph, VertexId, VertexMeta};

pub const INF: u32 = u32::MAX;

pub fn floyd_warshall(g: &MultilayerGraph) -> Vec<Vec<u32>> {
    let n = g.vertex_count();
    let mut d = vec![vec![INF; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for e in g.edges() {
        d[e.u.index()][e.v.index()] = 1;
        d[e.v.index()][e.u.index()] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            if d[i][k] == INF {
                continue;
            }
            for j in 0..n {
                if d[k][j] != INF && d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

fn adjacency(g: &MultilayerGraph) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); g.vertex_count()];
    for e in g.edges() {
        adj[e.u.index()].push(e.v.index());
        adj[e.v.index()].push(e.u.index());
    }
    adj
}

/// Every shortest path from `p` to `q`, as vertex sequences.
pub fn shortest_paths(adj: &[Vec<usize>], d: &[Vec<u32>], p: usize, q: usize) -> Vec<Vec<usize>> {
    fn walk(
        adj: &[Vec<usize>],
        d: &[Vec<u32>],
        q: usize,
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let u = *path.last().unwrap();
        if u == q {
            out.push(path.clone());
            return;
        }
        for &w in &adj[u] {
            if d[w][q] != INF && d[w][q] + 1 == d[u][q] {
                path.push(w);
                walk(adj, d, q, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    if d[p][q] != INF {
        walk(adj, d, q, &mut vec![p], &mut out);
    }
    out
}

pub fn rational(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `N_j / Σ_q d(p,q)` with `N_i + N_j - 1` for unreachable pairs.
pub fn oracle_closeness(g: &MultilayerGraph, from: &[VertexId], to: &[VertexId]) -> Vec<BigRational> {
    let d = floyd_warshall(g);
    let bound = (from.len() + to.len() - 1) as i64;
    from.iter()
        .map(|p| {
            let total: i64 = to
                .iter()
                .map(|q| match d[p.index()][q.index()] {
                    INF => bound,
                    x => x as i64,
                })
                .sum();
            BigRational::new(BigInt::from(to.len()), BigInt::from(total))
        })
        .collect()
}

/// `Σ_p w_p Σ_q σ_pq(v) / σ_pq` over interior vertices of each path.
pub fn oracle_betweenness(
    g: &MultilayerGraph,
    sources: &[(VertexId, i64)],
    targets: &[VertexId],
) -> Vec<BigRational> {
    let d = floyd_warshall(g);
    let adj = adjacency(g);
    let mut b = vec![BigRational::zero(); g.vertex_count()];
    for &(p, w) in sources {
        for &q in targets {
            if p == q {
                continue;
            }
            let paths = shortest_paths(&adj, &d, p.index(), q.index());
            if paths.is_empty() {
                continue;
            }
            let mut through = vec![0i64; g.vertex_count()];
            for path in &paths {
                for &v in &path[1..path.len() - 1] {
                    through[v] += 1;
                }
            }
            let sigma = paths.len() as i64;
            for (v, &c) in through.iter().enumerate() {
                if c > 0 {
                    b[v] += BigRational::new(BigInt::from(c * w), BigInt::from(sigma));
                }
            }
        }
    }
    b
}

pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap()
}

/// Relative error check; an exact zero must be matched exactly.
pub fn assert_close(got: f64, want: &BigRational, tol: f64, what: &str) {
    let w = to_f64(want);
    if w == 0.0 {
        assert_eq!(got, 0.0, "{what}: expected 0, got {got}");
    } else {
        let rel = ((got - w) / w).abs();
        assert!(rel <= tol, "{what}: got {got}, oracle {w}, relative error {rel:e}");
    }
}

/// A random two-layer graph with `n` vertices: a T part and a D part with
/// sparse random internal edges and a few random interlayer edges
/// (possibly none, leaving the layers disconnected).
pub fn random_two_layer<R: Rng>(rng: &mut R, n: usize) -> MultilayerGraph {
    let n_t = rng.gen_range(3..=n - 3);
    let mut g = MultilayerGraph::new();
    for i in 0..n {
        let layer = if i < n_t {
            LayerId::TRANSMISSION
        } else {
            LayerId::distribution(0)
        };
        g.add_vertex(layer, VertexMeta::junction(format!("v{i}"))).unwrap();
    }
    let mut add_random = |g: &mut MultilayerGraph, lo: usize, hi: usize, count: usize| {
        for _ in 0..count {
            let a = rng.gen_range(lo..hi);
            let b = rng.gen_range(lo..hi);
            if a != b && !g.has_edge(VertexId(a as u32), VertexId(b as u32)) {
                g.add_edge(VertexId(a as u32), VertexId(b as u32), 1.0).unwrap();
            }
        }
    };
    let n_d = n - n_t;
    add_random(&mut g, 0, n_t, n_t * 5 / 4);
    add_random(&mut g, n_t, n, n_d * 5 / 4);
    let inter = rng.gen_range(0..=4);
    for _ in 0..inter {
        let a = rng.gen_range(0..n_t);
        let b = rng.gen_range(n_t..n);
        if !g.has_edge(VertexId(a as u32), VertexId(b as u32)) {
            g.add_edge(VertexId(a as u32), VertexId(b as u32), 1.0).unwrap();
        }
    }
    g.finalize();
    g
}

/// Random nonempty subset of `pool` (at most `max` elements), ascending.
pub fn random_subset<R: Rng>(rng: &mut R, pool: &[VertexId], max: usize) -> Vec<VertexId> {
    let k = rng.gen_range(1..=pool.len().min(max));
    let mut v: Vec<VertexId> = pool.choose_multiple(rng, k).copied().collect();
    v.sort();
    v
}

pub fn layer_vertices(g: &MultilayerGraph, transmission: bool) -> Vec<VertexId> {
    g.vertices()
        .filter(|&v| g.layer(v).is_transmission() == transmission)
        .collect()
}
