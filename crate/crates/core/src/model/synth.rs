//! Seeded synthetic stand-ins for the transmission model and the
//! distribution test feeder, matched to their published size and degree
//! statistics.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{LayerId, MultilayerGraph};
use crate::model::{
    VertexKind, VertexMeta, FEEDER_SUBSTATION_NAME, GENERATOR_RATING_MW, IBR_RATING_KW,
};

/// Independent random streams split off the single user seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedStream {
    Transmission = 1,
    Feeder = 2,
    LoadBuses = 3,
}

/// Derive a sub-seed with SplitMix64 so that each (stream, index) pair gets
/// its own sequence regardless of how many other streams are drawn.
pub fn derive_seed(seed: u64, stream: SeedStream, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add((stream as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    for _ in 0..2 {
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

// Degree profile of the reference feeder: modal degree 2 at 52.2 %.
const FEEDER_DEGREE2_SHARE: f64 = 0.522;
const FEEDER_MAX_DEGREE: usize = 5;
const FEEDER_LOOPS: usize = 2;

// Degree profile of the reference transmission model.
const TRANSMISSION_LEAF_SHARE: f64 = 0.416;
const TRANSMISSION_MAX_DEGREE: usize = 10;

/// Counts of vertices per degree (index = degree, 1..=5) for a feeder with
/// `loops` independent cycles and at least `min_leaves` leaves.
fn feeder_degree_plan(n: usize, loops: usize, min_leaves: usize) -> Option<[usize; 6]> {
    let n = n as i64;
    let excess = 2 * loops as i64 - 2;
    let target2 = (FEEDER_DEGREE2_SHARE * n as f64).round() as i64;
    let n4 = n / 100;
    for n5 in n / 500..=n {
        for n2 in (0..=target2).rev() {
            let rest = n - n2 - n4 - n5;
            let e = excess - 2 * n4 - 3 * n5;
            if rest < 0 || (rest + e).rem_euclid(2) != 0 {
                continue;
            }
            let n3 = (rest + e) / 2;
            let n1 = rest - n3;
            if n3 < 0 || n1 < min_leaves as i64 {
                continue;
            }
            if n2 + n3 + n4 + n5 < 2 * loops as i64 {
                continue;
            }
            return Some([0, n1, n2, n3, n4, n5].map(|c| c as usize));
        }
    }
    None
}

/// Random labelled tree with the given degree sequence (all entries >= 1,
/// summing to 2(n-1)), decoded from a shuffled Prüfer sequence.
fn prufer_tree(degrees: &[usize], rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let n = degrees.len();
    if n == 2 {
        return vec![(0, 1)];
    }
    let mut seq: Vec<usize> = degrees
        .iter()
        .enumerate()
        .flat_map(|(v, &d)| std::iter::repeat_n(v, d - 1))
        .collect();
    seq.shuffle(rng);
    let mut remaining = degrees.to_vec();
    let mut leaves: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&v| remaining[v] == 1).map(Reverse).collect();
    let mut edges = Vec::with_capacity(n - 1);
    for x in seq {
        let Reverse(leaf) = leaves.pop().expect("prufer sequence leaves");
        edges.push((leaf, x));
        remaining[leaf] = 0;
        remaining[x] -= 1;
        if remaining[x] == 1 {
            leaves.push(Reverse(x));
        }
    }
    let Reverse(a) = leaves.pop().expect("two final leaves");
    let Reverse(b) = leaves.pop().expect("two final leaves");
    edges.push((a, b));
    edges
}

/// Relabel a connected graph in breadth-first order from `root`. Returns the
/// old-to-new map and the edges (BFS tree edges first, parent before child,
/// then the remaining edges sorted), all in new labels.
fn bfs_relabel(n: usize, edges: &[(usize, usize)], root: usize) -> (Vec<usize>, Vec<(usize, usize)>) {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    let mut new_id = vec![usize::MAX; n];
    let mut tree = Vec::with_capacity(n.saturating_sub(1));
    let mut tree_set = HashSet::new();
    let mut queue = VecDeque::from([root]);
    new_id[root] = 0;
    let mut next = 1;
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if new_id[w] == usize::MAX {
                new_id[w] = next;
                next += 1;
                tree.push((new_id[v], new_id[w]));
                tree_set.insert((v.min(w), v.max(w)));
                queue.push_back(w);
            }
        }
    }
    assert_eq!(next, n, "synthesized graph must be connected");
    let mut rest: Vec<(usize, usize)> = edges
        .iter()
        .filter(|&&(a, b)| !tree_set.contains(&(a.min(b), a.max(b))))
        .map(|&(a, b)| {
            let (x, y) = (new_id[a], new_id[b]);
            (x.min(y), x.max(y))
        })
        .collect();
    rest.sort_unstable();
    tree.extend(rest);
    (new_id, tree)
}

/// Synthesize a near-radial distribution feeder.
///
/// The result has exactly one [`VertexKind::Substation`] (vertex 0, itself
/// a leaf of the feeder), `n_nodes` vertices and `n_nodes + 1` edges (a
/// spanning tree plus two loops) once `n_nodes >= 8`; smaller feeders are
/// trees. The degree distribution peaks at 2 and never exceeds 5. Grid-forming
/// and grid-following inverters occupy randomly chosen leaves, alternating
/// along the vertex order. Vertices are numbered breadth-first from the
/// substation and tagged with layer `D0`.
pub fn synthesize_feeder(n_nodes: usize, n_gfm: usize, n_gfl: usize, seed: u64) -> Result<MultilayerGraph> {
    let n_ibr = n_gfm + n_gfl;
    if n_nodes < 2 {
        return Err(Error::Infeasible(format!("a feeder needs at least 2 nodes, got {n_nodes}")));
    }
    if n_ibr >= n_nodes {
        return Err(Error::Infeasible(format!(
            "{n_ibr} inverters do not fit in a {n_nodes}-node feeder"
        )));
    }
    let loops = if n_nodes >= 8 { FEEDER_LOOPS } else { 0 };
    let counts = feeder_degree_plan(n_nodes, loops, n_ibr + 1).ok_or_else(|| {
        Error::Infeasible(format!(
            "no degree sequence with max degree {FEEDER_MAX_DEGREE} gives {} leaves in {n_nodes} nodes",
            n_ibr + 1
        ))
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut degrees: Vec<usize> = counts
        .iter()
        .enumerate()
        .flat_map(|(d, &c)| std::iter::repeat_n(d, c))
        .collect();
    degrees.shuffle(&mut rng);

    let branch: Vec<usize> = (0..n_nodes).filter(|&v| degrees[v] >= 2).collect();
    let mut edges = None;
    for _ in 0..256 {
        let ends: Vec<usize> = branch.choose_multiple(&mut rng, 2 * loops).copied().collect();
        let mut tree_deg = degrees.clone();
        for &v in &ends {
            tree_deg[v] -= 1;
        }
        let tree = prufer_tree(&tree_deg, &mut rng);
        let present: HashSet<(usize, usize)> =
            tree.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        let extra: Vec<(usize, usize)> = ends.chunks(2).map(|c| (c[0], c[1])).collect();
        if extra.iter().all(|&(a, b)| !present.contains(&(a.min(b), a.max(b)))) {
            let mut all = tree;
            all.extend(extra);
            edges = Some(all);
            break;
        }
    }
    let edges = edges.ok_or_else(|| Error::Infeasible("could not place feeder loops".into()))?;

    let mut leaves: Vec<usize> = (0..n_nodes).filter(|&v| degrees[v] == 1).collect();
    leaves.shuffle(&mut rng);
    let root = leaves[0];
    let (new_id, edges) = bfs_relabel(n_nodes, &edges, root);

    let mut kinds = vec![VertexKind::Junction; n_nodes];
    kinds[0] = VertexKind::Substation;
    let mut ibr: Vec<usize> = leaves[1..=n_ibr].iter().map(|&v| new_id[v]).collect();
    ibr.sort_unstable();
    let (mut gfm_left, mut gfl_left) = (n_gfm, n_gfl);
    for (i, v) in ibr.into_iter().enumerate() {
        let gfm = gfl_left == 0 || (gfm_left > 0 && i % 2 == 0);
        if gfm {
            gfm_left -= 1;
            kinds[v] = VertexKind::GfmInverter;
        } else {
            gfl_left -= 1;
            kinds[v] = VertexKind::GflInverter;
        }
    }

    let mut g = MultilayerGraph::new();
    let (mut n_gfm_named, mut n_gfl_named) = (0, 0);
    for (v, kind) in kinds.into_iter().enumerate() {
        let meta = match kind {
            VertexKind::Substation => VertexMeta::new(FEEDER_SUBSTATION_NAME, kind),
            VertexKind::GfmInverter => {
                n_gfm_named += 1;
                VertexMeta::new(format!("GFM-{n_gfm_named}"), kind)
                    .with_capacity_kw(IBR_RATING_KW)
                    .with_black_start(true)
            }
            VertexKind::GflInverter => {
                n_gfl_named += 1;
                VertexMeta::new(format!("GFL-{n_gfl_named}"), kind).with_capacity_kw(IBR_RATING_KW)
            }
            _ => VertexMeta::junction(format!("N{v}")),
        };
        g.add_vertex(LayerId::distribution(0), meta)?;
    }
    add_edges(&mut g, &edges)?;
    Ok(g)
}

fn add_edges(g: &mut MultilayerGraph, edges: &[(usize, usize)]) -> Result<()> {
    for &(a, b) in edges {
        g.add_edge(
            crate::graph::VertexId(a as u32),
            crate::graph::VertexId(b as u32),
            1.0,
        )?;
    }
    Ok(())
}

fn weighted_pick(weights: &[f64], rng: &mut ChaCha8Rng) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let mut x = rng.gen::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            if x < w {
                return Some(i);
            }
            x -= w;
        }
    }
    weights.iter().rposition(|&w| w > 0.0)
}

/// Degree sequence for the transmission stand-in: about 41.6 % leaves, one
/// hub at the maximum degree, remaining stubs spread preferentially.
fn transmission_degrees(n: usize, l: usize, rng: &mut ChaCha8Rng) -> Option<Vec<usize>> {
    let total = 2 * l;
    let cap_hard = n - 1;
    let feasible = |n1: usize| {
        let m = n - n1;
        if m == 0 {
            return n1 == total;
        }
        total >= n1 + 2 * m && total - n1 <= m * cap_hard
    };
    let target = (TRANSMISSION_LEAF_SHARE * n as f64).round() as usize;
    let n1 = (0..=n)
        .filter(|&k| feasible(k))
        .min_by_key(|&k| k.abs_diff(target))?;
    let m = n - n1;
    let mut degrees = vec![1usize; n1];
    if m > 0 {
        let mut hubs = vec![2usize; m];
        let mut extra = total - n1 - 2 * m;
        let soft_cap = if (total - n1) <= m * TRANSMISSION_MAX_DEGREE.min(cap_hard) {
            TRANSMISSION_MAX_DEGREE.min(cap_hard)
        } else {
            cap_hard
        };
        let first = extra.min(soft_cap - 2);
        hubs[0] += first;
        extra -= first;
        for _ in 0..extra {
            let w: Vec<f64> = hubs
                .iter()
                .map(|&d| if d < soft_cap { (d - 1) as f64 } else { 0.0 })
                .collect();
            let i = weighted_pick(&w, rng)?;
            hubs[i] += 1;
        }
        degrees.extend(hubs);
    }
    degrees.shuffle(rng);
    Some(degrees)
}

/// Synthesize a connected transmission layer with exactly `n` buses and `l`
/// branches, `n_gen` of them synchronous generators.
///
/// Generators prefer leaf buses and are named `G1..` in vertex order; the
/// other buses are numbered `1..`. Generator ratings are drawn uniformly in
/// whole megawatts from 100 to 2000 MW and stored in kW.
pub fn synthesize_transmission(n: usize, l: usize, n_gen: usize, seed: u64) -> Result<MultilayerGraph> {
    if n < 2 || l + 1 < n || l > n * (n - 1) / 2 {
        return Err(Error::Infeasible(format!(
            "no connected simple graph has {n} vertices and {l} edges"
        )));
    }
    if n_gen >= n {
        return Err(Error::Infeasible(format!(
            "{n_gen} generators need more than {n} buses"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let degrees = transmission_degrees(n, l, &mut rng)
        .ok_or_else(|| Error::Infeasible(format!("no degree sequence for n={n}, l={l}")))?;

    // Spanning tree degrees: strip cycle stubs from non-leaves.
    let mut tree_deg = degrees.clone();
    for _ in 0..(2 * l - 2 * (n - 1)) {
        let w: Vec<f64> = tree_deg.iter().map(|&d| (d - 1) as f64).collect();
        let i = weighted_pick(&w, &mut rng).expect("tree degrees exceed one");
        tree_deg[i] -= 1;
    }
    let tree = prufer_tree(&tree_deg, &mut rng);
    let mut present: HashSet<(usize, usize)> =
        tree.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    let mut edges = tree;

    let stubs: Vec<usize> = (0..n)
        .flat_map(|v| std::iter::repeat_n(v, degrees[v] - tree_deg[v]))
        .collect();
    let mut best: Vec<(usize, usize)> = Vec::new();
    for _ in 0..200 {
        let mut s = stubs.clone();
        s.shuffle(&mut rng);
        let mut seen = HashSet::new();
        let pairs: Vec<(usize, usize)> = s
            .chunks(2)
            .map(|c| (c[0].min(c[1]), c[0].max(c[1])))
            .filter(|&(a, b)| a != b && !present.contains(&(a, b)) && seen.insert((a, b)))
            .collect();
        if pairs.len() > best.len() {
            best = pairs;
        }
        if 2 * best.len() == stubs.len() {
            break;
        }
    }
    for &e in &best {
        present.insert(e);
    }
    edges.extend(best);
    // Fall back to random non-leaf chords when stub matching came up short.
    let branch: Vec<usize> = (0..n).filter(|&v| degrees[v] >= 2).collect();
    let pool = if branch.len() >= 2 { branch } else { (0..n).collect() };
    while edges.len() < l {
        let (a, b) = (*pool.choose(&mut rng).unwrap(), *pool.choose(&mut rng).unwrap());
        let key = (a.min(b), a.max(b));
        if a != b && present.insert(key) {
            edges.push(key);
        } else if present.len() >= pool.len() * (pool.len() - 1) / 2 {
            let all: Vec<usize> = (0..n).collect();
            let (a, b) = (*all.choose(&mut rng).unwrap(), *all.choose(&mut rng).unwrap());
            let key = (a.min(b), a.max(b));
            if a != b && present.insert(key) {
                edges.push(key);
            }
        }
    }

    let root = (0..n).max_by_key(|&v| (degrees[v], Reverse(v))).unwrap();
    let (new_id, edges) = bfs_relabel(n, &edges, root);

    let mut leaves: Vec<usize> = (0..n).filter(|&v| degrees[v] == 1).collect();
    let mut others: Vec<usize> = (0..n).filter(|&v| degrees[v] != 1).collect();
    leaves.shuffle(&mut rng);
    others.shuffle(&mut rng);
    let mut is_gen = vec![false; n];
    for v in leaves.into_iter().chain(others).take(n_gen) {
        is_gen[new_id[v]] = true;
    }

    let mut g = MultilayerGraph::new();
    let (mut gens, mut buses) = (0, 0);
    for gen in is_gen {
        let meta = if gen {
            gens += 1;
            let mw = rng.gen_range(GENERATOR_RATING_MW.0 as u32..=GENERATOR_RATING_MW.1 as u32);
            VertexMeta::new(format!("G{gens}"), VertexKind::SynchronousGenerator)
                .with_capacity_kw(mw as f64 * 1000.0)
        } else {
            buses += 1;
            VertexMeta::junction(format!("{buses}"))
        };
        g.add_vertex(LayerId::TRANSMISSION, meta)?;
    }
    add_edges(&mut g, &edges)?;
    Ok(g)
}
