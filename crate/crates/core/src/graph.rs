//! Undirected multilayer graph storage and unit-length single-source
//! shortest paths with path counting.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::VertexMeta;

/// Dense vertex identifier, `0..N` in insertion order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LayerKind {
    Transmission,
    Distribution,
}

/// Layer tag. The transmission layer is unique (replica 0); each attached
/// distribution feeder is its own replica.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LayerId {
    kind: LayerKind,
    replica: u32,
}

impl LayerId {
    pub const TRANSMISSION: LayerId = LayerId {
        kind: LayerKind::Transmission,
        replica: 0,
    };

    pub fn distribution(replica: u32) -> Self {
        LayerId {
            kind: LayerKind::Distribution,
            replica,
        }
    }

    pub fn kind(self) -> LayerKind {
        self.kind
    }

    pub fn replica(self) -> u32 {
        self.replica
    }

    pub fn is_transmission(self) -> bool {
        self.kind == LayerKind::Transmission
    }

    pub fn is_distribution(self) -> bool {
        self.kind == LayerKind::Distribution
    }
}

impl fmt::Display for LayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            LayerKind::Transmission => f.write_str("T"),
            LayerKind::Distribution => write!(f, "D{}", self.replica),
        }
    }
}

impl FromStr for LayerId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        if s == "T" {
            return Ok(LayerId::TRANSMISSION);
        }
        match s.strip_prefix('D').map(str::parse::<u32>) {
            Some(Ok(k)) => Ok(LayerId::distribution(k)),
            _ => Err(format!("invalid layer `{s}` (expected `T` or `D<k>`)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub weight: f64,
}

/// Undirected graph whose vertices carry a layer tag and metadata.
///
/// Built single-threaded through [`add_vertex`](Self::add_vertex) and
/// [`add_edge`](Self::add_edge), then frozen with
/// [`finalize`](Self::finalize). Edges keep their insertion order, which is
/// also the order they are serialized in.
#[derive(Debug, Clone, Default)]
pub struct MultilayerGraph {
    layers: Vec<LayerId>,
    meta: Vec<VertexMeta>,
    adjacency: Vec<Vec<(VertexId, f64)>>,
    edges: Vec<Edge>,
    by_name: HashMap<String, VertexId>,
    finalized: bool,
}

impl MultilayerGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, layer: LayerId, mut meta: VertexMeta) -> Result<VertexId> {
        if self.finalized {
            return Err(Error::Finalized);
        }
        let id = VertexId(self.layers.len() as u32);
        if meta.name.is_empty() {
            meta.name = format!("v{}", id.0);
        }
        if self.by_name.contains_key(&meta.name) {
            return Err(Error::DuplicateName(meta.name));
        }
        self.by_name.insert(meta.name.clone(), id);
        self.layers.push(layer);
        self.meta.push(meta);
        self.adjacency.push(Vec::new());
        Ok(id)
    }

    pub fn add_edge(&mut self, u: VertexId, v: VertexId, weight: f64) -> Result<()> {
        if self.finalized {
            return Err(Error::Finalized);
        }
        self.check(u)?;
        self.check(v)?;
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::InvalidWeight(weight));
        }
        if self.has_edge(u, v) {
            return Err(Error::DuplicateEdge(u, v));
        }
        self.adjacency[u.index()].push((v, weight));
        self.adjacency[v.index()].push((u, weight));
        self.edges.push(Edge { u, v, weight });
        Ok(())
    }

    /// Freeze the graph. Further structural changes fail with
    /// [`Error::Finalized`].
    pub fn finalize(&mut self) {
        self.finalized = true;
    }

    pub fn is_finalized(&self) -> bool {
        self.finalized
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        let (a, b) = if self.adjacency[u.index()].len() <= self.adjacency[v.index()].len() {
            (u, v)
        } else {
            (v, u)
        };
        self.adjacency[a.index()].iter().any(|&(w, _)| w == b)
    }

    pub fn vertex_count(&self) -> usize {
        self.layers.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.layers.len() as u32).map(VertexId)
    }

    /// Edges in insertion order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn is_interlayer(&self, e: &Edge) -> bool {
        self.layers[e.u.index()] != self.layers[e.v.index()]
    }

    pub fn contains(&self, v: VertexId) -> bool {
        v.index() < self.layers.len()
    }

    fn check(&self, v: VertexId) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::UnknownVertex(v))
        }
    }

    /// Neighbors with edge weights.
    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, f64)] {
        &self.adjacency[v.index()]
    }

    pub fn degree(&self, v: VertexId) -> Result<usize> {
        self.check(v)?;
        Ok(self.adjacency[v.index()].len())
    }

    pub fn layer(&self, v: VertexId) -> LayerId {
        self.layers[v.index()]
    }

    pub fn meta(&self, v: VertexId) -> &VertexMeta {
        &self.meta[v.index()]
    }

    pub fn name(&self, v: VertexId) -> &str {
        &self.meta[v.index()].name
    }

    pub fn find(&self, name: &str) -> Option<VertexId> {
        self.by_name.get(name).copied()
    }

    pub fn find_or_err(&self, name: &str) -> Result<VertexId> {
        self.find(name).ok_or_else(|| Error::UnknownName(name.to_string()))
    }

    /// Replace a vertex's metadata (renaming it if the name changed).
    pub fn set_meta(&mut self, v: VertexId, meta: VertexMeta) -> Result<()> {
        if self.finalized {
            return Err(Error::Finalized);
        }
        self.check(v)?;
        let old = &self.meta[v.index()].name;
        if *old != meta.name {
            if meta.name.is_empty() || self.by_name.contains_key(&meta.name) {
                return Err(Error::DuplicateName(meta.name));
            }
            self.by_name.remove(old);
            self.by_name.insert(meta.name.clone(), v);
        }
        self.meta[v.index()] = meta;
        Ok(())
    }

    pub(crate) fn thaw(&mut self) {
        self.finalized = false;
    }

    pub fn vertices_in<'a>(
        &'a self,
        pred: impl Fn(LayerId) -> bool + 'a,
    ) -> impl Iterator<Item = VertexId> + 'a {
        self.vertices().filter(move |&v| pred(self.layer(v)))
    }

    /// Number of distribution replicas present (max replica index + 1).
    pub fn replica_count(&self) -> usize {
        self.layers
            .iter()
            .filter(|l| l.is_distribution())
            .map(|l| l.replica() as usize + 1)
            .max()
            .unwrap_or(0)
    }
}

/// Marker for vertices not reached from the source.
pub const UNREACHED: u32 = u32::MAX;

/// Hop distances from `source`; unreachable vertices hold [`UNREACHED`].
/// Also returns the visit order (non-decreasing distance).
pub fn bfs_distances(g: &MultilayerGraph, source: VertexId) -> Result<(Vec<u32>, Vec<VertexId>)> {
    g.check(source)?;
    let n = g.vertex_count();
    let mut dist = vec![UNREACHED; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    dist[source.index()] = 0;
    queue.push_back(source);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        let next = dist[v.index()] + 1;
        for &(w, _) in g.neighbors(v) {
            if dist[w.index()] == UNREACHED {
                dist[w.index()] = next;
                queue.push_back(w);
            }
        }
    }
    Ok((dist, order))
}

/// Shortest-path DAG from a single source.
#[derive(Debug, Clone)]
pub struct SsspResult {
    pub source: VertexId,
    /// Hop counts; [`UNREACHED`] when disconnected from `source`.
    pub dist: Vec<u32>,
    /// Number of distinct shortest paths from `source`.
    pub sigma: Vec<u128>,
    /// Reached vertices in non-decreasing distance order.
    pub order: Vec<VertexId>,
    pred_range: Vec<(u32, u32)>,
    pred_list: Vec<VertexId>,
}

impl SsspResult {
    /// Predecessors of `v` on shortest paths from the source.
    pub fn preds(&self, v: VertexId) -> &[VertexId] {
        let (a, b) = self.pred_range[v.index()];
        &self.pred_list[a as usize..b as usize]
    }

    pub fn reached(&self, v: VertexId) -> bool {
        self.dist[v.index()] != UNREACHED
    }
}

/// Breadth-first single-source shortest paths. Edge weights are ignored:
/// every edge has unit length.
pub fn bfs_sssp(g: &MultilayerGraph, source: VertexId) -> Result<SsspResult> {
    let (dist, order) = bfs_distances(g, source)?;
    let n = g.vertex_count();
    let mut sigma = vec![0u128; n];
    let mut pred_range = vec![(0u32, 0u32); n];
    let mut pred_list = Vec::with_capacity(order.len());
    sigma[source.index()] = 1;
    // Predecessors sit one level up, so they are final before `w` is visited.
    for &w in &order[1..] {
        let start = pred_list.len() as u32;
        let dw = dist[w.index()];
        let mut count: u128 = 0;
        for &(v, _) in g.neighbors(w) {
            if dist[v.index()] != UNREACHED && dist[v.index()] + 1 == dw {
                pred_list.push(v);
                count = count
                    .checked_add(sigma[v.index()])
                    .ok_or(Error::PathCountOverflow(source))?;
            }
        }
        sigma[w.index()] = count;
        pred_range[w.index()] = (start, pred_list.len() as u32);
    }
    Ok(SsspResult {
        source,
        dist,
        sigma,
        order,
        pred_range,
        pred_list,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(names: &[&str]) -> MultilayerGraph {
        let mut g = MultilayerGraph::new();
        let ids: Vec<_> = names
            .iter()
            .map(|n| {
                g.add_vertex(LayerId::TRANSMISSION, VertexMeta::junction(*n))
                    .unwrap()
            })
            .collect();
        for w in ids.windows(2) {
            g.add_edge(w[0], w[1], 1.0).unwrap();
        }
        g
    }

    #[test]
    fn dense_ids() {
        let mut g = MultilayerGraph::new();
        let a = g.add_vertex(LayerId::TRANSMISSION, VertexMeta::junction("a")).unwrap();
        let b = g.add_vertex(LayerId::TRANSMISSION, VertexMeta::junction("b")).unwrap();
        assert_eq!((a, b), (VertexId(0), VertexId(1)));
    }

    #[test]
    fn transmission_layer_of_142() {
        let mut g = MultilayerGraph::new();
        for i in 0..142 {
            let id = g
                .add_vertex(LayerId::TRANSMISSION, VertexMeta::junction(format!("{i}")))
                .unwrap();
            assert_eq!(id, VertexId(i));
        }
        assert!(g.vertices().all(|v| g.layer(v).is_transmission()));
    }

    #[test]
    fn edge_errors() {
        let mut g = path(&["a", "b"]);
        assert!(g.neighbors(VertexId(1)).iter().any(|&(w, _)| w == VertexId(0)));
        assert!(matches!(g.add_edge(VertexId(0), VertexId(0), 1.0), Err(Error::SelfLoop(_))));
        assert!(matches!(
            g.add_edge(VertexId(1), VertexId(0), 1.0),
            Err(Error::DuplicateEdge(..))
        ));
        assert!(matches!(
            g.add_edge(VertexId(0), VertexId(7), 1.0),
            Err(Error::UnknownVertex(_))
        ));
        assert!(g.add_edge(VertexId(0), VertexId(1), 0.0).is_err());
        g.finalize();
        assert!(matches!(
            g.add_vertex(LayerId::TRANSMISSION, VertexMeta::junction("c")),
            Err(Error::Finalized)
        ));
        assert!(matches!(g.degree(VertexId(9)), Err(Error::UnknownVertex(_))));
    }

    #[test]
    fn interlayer_flag() {
        let mut g = MultilayerGraph::new();
        let bus = g.add_vertex(LayerId::TRANSMISSION, VertexMeta::new("1008", crate::VertexKind::LoadBus)).unwrap();
        let sub = g.add_vertex(LayerId::distribution(0), VertexMeta::new("sub", crate::VertexKind::Substation)).unwrap();
        g.add_edge(bus, sub, 1.0).unwrap();
        assert!(g.is_interlayer(&g.edges()[0]));
    }

    #[test]
    fn degrees() {
        let mut g = MultilayerGraph::new();
        let c = g.add_vertex(LayerId::TRANSMISSION, VertexMeta::junction("c")).unwrap();
        let lone = g.add_vertex(LayerId::TRANSMISSION, VertexMeta::junction("lone")).unwrap();
        for i in 0..4 {
            let leaf = g
                .add_vertex(LayerId::TRANSMISSION, VertexMeta::junction(format!("l{i}")))
                .unwrap();
            g.add_edge(c, leaf, 1.0).unwrap();
        }
        assert_eq!(g.degree(c).unwrap(), 4);
        assert_eq!(g.degree(lone).unwrap(), 0);
    }

    #[test]
    fn sssp_on_path() {
        let g = path(&["a", "b", "c"]);
        let r = bfs_sssp(&g, VertexId(0)).unwrap();
        assert_eq!(r.dist, vec![0, 1, 2]);
        assert_eq!(r.sigma, vec![1, 1, 1]);
    }

    #[test]
    fn sssp_on_diamond() {
        let mut g = MultilayerGraph::new();
        let [p, a, b, q] = ["p", "a", "b", "q"]
            .map(|n| g.add_vertex(LayerId::TRANSMISSION, VertexMeta::junction(n)).unwrap());
        for (x, y) in [(p, a), (p, b), (a, q), (b, q)] {
            g.add_edge(x, y, 1.0).unwrap();
        }
        let r = bfs_sssp(&g, p).unwrap();
        assert_eq!(r.sigma[q.index()], 2);
        let mut preds = r.preds(q).to_vec();
        preds.sort();
        assert_eq!(preds, vec![a, b]);
    }

    #[test]
    fn sssp_disconnected() {
        let mut g = path(&["a", "b"]);
        let c = g.add_vertex(LayerId::TRANSMISSION, VertexMeta::junction("c")).unwrap();
        let d = g.add_vertex(LayerId::TRANSMISSION, VertexMeta::junction("d")).unwrap();
        g.add_edge(c, d, 1.0).unwrap();
        let r = bfs_sssp(&g, VertexId(0)).unwrap();
        assert_eq!(r.dist[c.index()], UNREACHED);
        assert_eq!(r.dist[d.index()], UNREACHED);
        assert_eq!(r.sigma[d.index()], 0);
        assert!(matches!(bfs_sssp(&g, VertexId(99)), Err(Error::UnknownVertex(_))));
    }

    #[test]
    fn sigma_overflow_is_reported() {
        // A chain of 130 diamonds doubles the path count at every stage.
        let mut g = MultilayerGraph::new();
        let mut prev = g.add_vertex(LayerId::TRANSMISSION, VertexMeta::junction("s")).unwrap();
        for i in 0..130 {
            let [a, b, j] = ["a", "b", "j"].map(|n| {
                g.add_vertex(LayerId::TRANSMISSION, VertexMeta::junction(format!("{n}{i}")))
                    .unwrap()
            });
            for (x, y) in [(prev, a), (prev, b), (a, j), (b, j)] {
                g.add_edge(x, y, 1.0).unwrap();
            }
            prev = j;
        }
        assert!(matches!(bfs_sssp(&g, VertexId(0)), Err(Error::PathCountOverflow(_))));
    }

    #[test]
    fn layer_parse() {
        assert_eq!("T".parse::<LayerId>().unwrap(), LayerId::TRANSMISSION);
        assert_eq!("D12".parse::<LayerId>().unwrap(), LayerId::distribution(12));
        assert!("X".parse::<LayerId>().is_err());
        assert_eq!(LayerId::distribution(3).to_string(), "D3");
    }
}
