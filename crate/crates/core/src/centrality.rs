//! Cross-layer closeness and betweenness.
//!
//! Both metrics are driven by one breadth-first search per source vertex.
//! Per-source partial results are independent and are always folded into
//! the final table in ascending source order, so the output is bitwise
//! identical for any degree of parallelism (and identical to merging the
//! per-source shards written by [`crate::runner`]).

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{bfs_distances, bfs_sssp, MultilayerGraph, VertexId, UNREACHED};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    CrossCloseness,
    CrossBetweenness,
    WeightedCrossBetweenness,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::CrossCloseness => "closeness",
            Metric::CrossBetweenness => "betweenness",
            Metric::WeightedCrossBetweenness => "weighted_betweenness",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Metric values keyed by vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralityTable {
    pub metric: Metric,
    pub values: BTreeMap<VertexId, f64>,
    pub normalized: bool,
    pub sources: String,
    pub targets: String,
}

impl CentralityTable {
    pub fn get(&self, v: VertexId) -> Option<f64> {
        self.values.get(&v).copied()
    }

    pub fn max_value(&self) -> f64 {
        self.values.values().copied().fold(0.0, f64::max)
    }
}

/// A vertex subset with O(1) membership.
#[derive(Debug, Clone)]
pub struct VertexSet {
    members: Vec<VertexId>,
    mask: Vec<bool>,
}

impl VertexSet {
    /// Sorted, deduplicated set over a graph of `n` vertices.
    pub fn new(g: &MultilayerGraph, vertices: impl IntoIterator<Item = VertexId>) -> Result<Self> {
        let mut members: Vec<VertexId> = vertices.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        let mut mask = vec![false; g.vertex_count()];
        for &v in &members {
            if !g.contains(v) {
                return Err(Error::UnknownVertex(v));
            }
            mask[v.index()] = true;
        }
        Ok(VertexSet { members, mask })
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.mask.get(v.index()).copied().unwrap_or(false)
    }

    pub fn members(&self) -> &[VertexId] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Source vertices with positive weights (kW for capacity weighting).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSourceSet {
    entries: Vec<(VertexId, f64)>,
}

impl WeightedSourceSet {
    pub fn new(mut entries: Vec<(VertexId, f64)>) -> Result<Self> {
        entries.sort_by_key(|&(v, _)| v);
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::Scenario(format!("source {} listed twice", w[0].0)));
            }
        }
        if let Some(&(_, w)) = entries.iter().find(|&&(_, w)| !(w.is_finite() && w > 0.0)) {
            return Err(Error::InvalidWeight(w));
        }
        Ok(WeightedSourceSet { entries })
    }

    pub fn uniform(vertices: impl IntoIterator<Item = VertexId>, weight: f64) -> Result<Self> {
        Self::new(vertices.into_iter().map(|v| (v, weight)).collect())
    }

    /// Entries in ascending vertex order.
    pub fn entries(&self) -> &[(VertexId, f64)] {
        &self.entries
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.entries.iter().map(|&(v, _)| v)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.entries.iter().map(|&(v, w)| (v, w * factor)).collect())
    }

    pub fn union(&self, other: &WeightedSourceSet) -> Result<Self> {
        Self::new(self.entries.iter().chain(&other.entries).copied().collect())
    }
}

fn check_disjoint(sources: &VertexSet, targets: &VertexSet) -> Result<()> {
    if sources.is_empty() {
        return Err(Error::EmptySet("source set".into()));
    }
    if targets.is_empty() {
        return Err(Error::EmptySet("target set".into()));
    }
    match sources.members().iter().find(|&&v| targets.contains(v)) {
        Some(&v) => Err(Error::OverlappingSets(v)),
        None => Ok(()),
    }
}

/// Distance sums from one source to every target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClosenessPartial {
    /// Sum of hop counts over reachable targets.
    pub reachable_sum: u64,
    /// Targets with no path from the source.
    pub unreachable: u64,
}

impl ClosenessPartial {
    /// `N_j / Σ d`, substituting `N_i + N_j - 1` for every unreachable pair.
    pub fn value(&self, n_sources: usize, n_targets: usize) -> f64 {
        let bound = (n_sources + n_targets - 1) as u64;
        let total = self.reachable_sum + self.unreachable * bound;
        n_targets as f64 / total as f64
    }
}

pub fn closeness_partial(
    g: &MultilayerGraph,
    source: VertexId,
    targets: &VertexSet,
) -> Result<ClosenessPartial> {
    let (dist, _) = bfs_distances(g, source)?;
    let mut p = ClosenessPartial {
        reachable_sum: 0,
        unreachable: 0,
    };
    for &q in targets.members() {
        match dist[q.index()] {
            UNREACHED => p.unreachable += 1,
            d => p.reachable_sum += d as u64,
        }
    }
    Ok(p)
}

/// Weighted dependency of every vertex on paths from `source` to the
/// targets, as `(vertex, weight * δ)` pairs in ascending vertex order.
/// The source itself and zero entries are omitted.
pub fn source_dependencies(
    g: &MultilayerGraph,
    source: VertexId,
    targets: &VertexSet,
    weight: f64,
) -> Result<Vec<(VertexId, f64)>> {
    let sp = bfs_sssp(g, source)?;
    let mut delta = vec![0.0f64; g.vertex_count()];
    for &w in sp.order.iter().rev() {
        let sigma_w = sp.sigma[w.index()] as f64;
        let carried = delta[w.index()] + if targets.contains(w) { 1.0 } else { 0.0 };
        if carried == 0.0 {
            continue;
        }
        for &v in sp.preds(w) {
            delta[v.index()] += (sp.sigma[v.index()] as f64 / sigma_w) * carried;
        }
    }
    delta[source.index()] = 0.0;
    Ok(delta
        .into_iter()
        .enumerate()
        .filter(|&(_, d)| d != 0.0)
        .map(|(i, d)| (VertexId(i as u32), weight * d))
        .collect())
}

fn chunk_len() -> usize {
    4 * rayon::current_num_threads().max(1)
}

/// Cross-closeness of every vertex in `from` towards `to`.
pub fn cross_closeness(
    g: &MultilayerGraph,
    from: &[VertexId],
    to: &[VertexId],
) -> Result<CentralityTable> {
    let from = VertexSet::new(g, from.iter().copied())?;
    let to = VertexSet::new(g, to.iter().copied())?;
    check_disjoint(&from, &to)?;
    let partials: Vec<ClosenessPartial> = from
        .members()
        .par_iter()
        .map(|&p| closeness_partial(g, p, &to))
        .collect::<Result<_>>()?;
    let values = from
        .members()
        .iter()
        .zip(partials)
        .map(|(&p, part)| (p, part.value(from.len(), to.len())))
        .collect();
    Ok(CentralityTable {
        metric: Metric::CrossCloseness,
        values,
        normalized: false,
        sources: format!("{} vertices", from.len()),
        targets: format!("{} vertices", to.len()),
    })
}

pub(crate) fn accumulate_betweenness(
    g: &MultilayerGraph,
    sources: &[(VertexId, f64)],
    targets: &VertexSet,
) -> Result<Vec<f64>> {
    let mut acc = vec![0.0f64; g.vertex_count()];
    for chunk in sources.chunks(chunk_len()) {
        let parts: Vec<Vec<(VertexId, f64)>> = chunk
            .par_iter()
            .map(|&(p, w)| source_dependencies(g, p, targets, w))
            .collect::<Result<_>>()?;
        for part in parts {
            for (v, x) in part {
                acc[v.index()] += x;
            }
        }
    }
    Ok(acc)
}

fn betweenness_table(metric: Metric, acc: Vec<f64>, n_sources: usize, n_targets: usize) -> CentralityTable {
    CentralityTable {
        metric,
        values: acc
            .into_iter()
            .enumerate()
            .map(|(i, x)| (VertexId(i as u32), x))
            .collect(),
        normalized: false,
        sources: format!("{n_sources} vertices"),
        targets: format!("{n_targets} vertices"),
    }
}

/// Cross-betweenness of every vertex for shortest paths from `sources` to
/// `targets`. Disconnected pairs contribute nothing.
pub fn cross_betweenness(
    g: &MultilayerGraph,
    sources: &[VertexId],
    targets: &[VertexId],
) -> Result<CentralityTable> {
    let src = VertexSet::new(g, sources.iter().copied())?;
    let tgt = VertexSet::new(g, targets.iter().copied())?;
    check_disjoint(&src, &tgt)?;
    let weighted: Vec<(VertexId, f64)> = src.members().iter().map(|&v| (v, 1.0)).collect();
    let acc = accumulate_betweenness(g, &weighted, &tgt)?;
    Ok(betweenness_table(Metric::CrossBetweenness, acc, src.len(), tgt.len()))
}

/// Cross-betweenness with each source's path fractions scaled by its weight.
pub fn weighted_cross_betweenness(
    g: &MultilayerGraph,
    sources: &WeightedSourceSet,
    targets: &[VertexId],
) -> Result<CentralityTable> {
    let src = VertexSet::new(g, sources.vertices())?;
    let tgt = VertexSet::new(g, targets.iter().copied())?;
    check_disjoint(&src, &tgt)?;
    let acc = accumulate_betweenness(g, sources.entries(), &tgt)?;
    Ok(betweenness_table(
        Metric::WeightedCrossBetweenness,
        acc,
        src.len(),
        tgt.len(),
    ))
}

/// Divide every value by the table maximum.
pub fn normalize_max(t: &CentralityTable) -> Result<CentralityTable> {
    let max = t.max_value();
    if max <= 0.0 {
        return Err(Error::AllZero);
    }
    let mut out = t.clone();
    for x in out.values.values_mut() {
        *x /= max;
    }
    out.normalized = true;
    Ok(out)
}

/// Top `k` entries by descending value, ties by ascending vertex id,
/// optionally restricted to vertices accepted by `restrict_to`.
pub fn rank_top_k(
    t: &CentralityTable,
    k: usize,
    restrict_to: Option<&dyn Fn(VertexId) -> bool>,
) -> Vec<(VertexId, f64)> {
    let mut rows: Vec<(VertexId, f64)> = t
        .values
        .iter()
        .filter(|(v, _)| restrict_to.is_none_or(|f| f(**v)))
        .map(|(&v, &x)| (v, x))
        .collect();
    rows.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    rows.truncate(k);
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::LayerId;
    use crate::model::VertexMeta;

    fn graph(n: usize, edges: &[(u32, u32)]) -> MultilayerGraph {
        let mut g = MultilayerGraph::new();
        for i in 0..n {
            g.add_vertex(LayerId::TRANSMISSION, VertexMeta::junction(format!("{i}")))
                .unwrap();
        }
        for &(a, b) in edges {
            g.add_edge(VertexId(a), VertexId(b), 1.0).unwrap();
        }
        g
    }

    fn ids(v: &[u32]) -> Vec<VertexId> {
        v.iter().map(|&i| VertexId(i)).collect()
    }

    #[test]
    fn closeness_single_edge() {
        let g = graph(2, &[(0, 1)]);
        let t = cross_closeness(&g, &ids(&[0]), &ids(&[1])).unwrap();
        assert_eq!(t.get(VertexId(0)), Some(1.0));
    }

    #[test]
    fn closeness_isolated_source() {
        let g = graph(4, &[(1, 2), (2, 3)]);
        let t = cross_closeness(&g, &ids(&[0]), &ids(&[1, 2, 3])).unwrap();
        assert_eq!(t.get(VertexId(0)), Some(1.0 / 3.0));
    }

    #[test]
    fn closeness_on_path() {
        // p - a - q1 - q2
        let g = graph(4, &[(0, 1), (1, 2), (2, 3)]);
        let t = cross_closeness(&g, &ids(&[0, 1]), &ids(&[2, 3])).unwrap();
        assert_eq!(t.get(VertexId(0)), Some(0.4));
        assert_eq!(t.get(VertexId(1)), Some(2.0 / 3.0));
    }

    #[test]
    fn betweenness_chain_and_edge() {
        let g = graph(3, &[(0, 1), (1, 2)]);
        let t = cross_betweenness(&g, &ids(&[0]), &ids(&[2])).unwrap();
        assert_eq!(t.get(VertexId(1)), Some(1.0));
        assert_eq!(t.get(VertexId(0)), Some(0.0));
        assert_eq!(t.get(VertexId(2)), Some(0.0));

        let g = graph(3, &[(0, 1)]);
        let t = cross_betweenness(&g, &ids(&[0]), &ids(&[1])).unwrap();
        assert!(t.values.values().all(|&x| x == 0.0));
    }

    #[test]
    fn betweenness_diamond() {
        // p=0, a=1, b=2, q=3
        let g = graph(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]);
        let t = cross_betweenness(&g, &ids(&[0]), &ids(&[3])).unwrap();
        assert_eq!(t.get(VertexId(1)), Some(0.5));
        assert_eq!(t.get(VertexId(2)), Some(0.5));
    }

    #[test]
    fn weighted_sources() {
        // 0 - 2 - 3 - 4(target), 1 - 2
        let g = graph(5, &[(0, 2), (1, 2), (2, 3), (3, 4)]);
        let targets = ids(&[4]);
        let single = cross_betweenness(&g, &ids(&[0]), &targets).unwrap();
        let w = WeightedSourceSet::uniform(ids(&[0]), 7.5).unwrap();
        let weighted = weighted_cross_betweenness(&g, &w, &targets).unwrap();
        for (v, x) in &single.values {
            assert_eq!(weighted.values[v], 7.5 * x);
        }

        let w = WeightedSourceSet::new(vec![(VertexId(0), 2.0), (VertexId(1), 3.0)]).unwrap();
        let t = weighted_cross_betweenness(&g, &w, &targets).unwrap();
        let d0 = cross_betweenness(&g, &ids(&[0]), &targets).unwrap();
        let d1 = cross_betweenness(&g, &ids(&[1]), &targets).unwrap();
        for v in g.vertices() {
            assert_eq!(t.values[&v], 2.0 * d0.values[&v] + 3.0 * d1.values[&v]);
        }
        assert!(WeightedSourceSet::new(vec![(VertexId(0), 0.0)]).is_err());
        assert!(WeightedSourceSet::new(vec![(VertexId(0), 1.0), (VertexId(0), 2.0)]).is_err());
    }

    #[test]
    fn set_errors() {
        let g = graph(3, &[(0, 1), (1, 2)]);
        assert!(matches!(
            cross_betweenness(&g, &[], &ids(&[1])),
            Err(Error::EmptySet(_))
        ));
        assert!(matches!(
            cross_closeness(&g, &ids(&[0, 1]), &ids(&[1])),
            Err(Error::OverlappingSets(_))
        ));
        assert!(matches!(
            cross_closeness(&g, &ids(&[0]), &ids(&[9])),
            Err(Error::UnknownVertex(_))
        ));
    }

    fn table(vals: &[(u32, f64)]) -> CentralityTable {
        CentralityTable {
            metric: Metric::CrossBetweenness,
            values: vals.iter().map(|&(v, x)| (VertexId(v), x)).collect(),
            normalized: false,
            sources: String::new(),
            targets: String::new(),
        }
    }

    #[test]
    fn normalization() {
        let t = normalize_max(&table(&[(0, 2.0), (1, 4.0)])).unwrap();
        assert_eq!(t.get(VertexId(0)), Some(0.5));
        assert_eq!(t.get(VertexId(1)), Some(1.0));
        assert!(t.normalized);
        assert_eq!(normalize_max(&table(&[(0, 7.0)])).unwrap().get(VertexId(0)), Some(1.0));
        assert!(matches!(normalize_max(&table(&[(0, 0.0)])), Err(Error::AllZero)));
        let a = normalize_max(&table(&[(0, 0.3), (1, 0.7), (2, 0.1)])).unwrap();
        let b = normalize_max(&table(&[(0, 3.0), (1, 7.0), (2, 1.0)])).unwrap();
        for v in 0..3 {
            assert!((a.values[&VertexId(v)] - b.values[&VertexId(v)]).abs() < 1e-15);
        }
    }

    #[test]
    fn ranking() {
        let t = table(&[(0, 1.0), (1, 3.0), (2, 2.0)]);
        assert_eq!(rank_top_k(&t, 2, None), vec![(VertexId(1), 3.0), (VertexId(2), 2.0)]);
        let t = table(&[(0, 5.0), (1, 5.0)]);
        assert_eq!(rank_top_k(&t, 1, None), vec![(VertexId(0), 5.0)]);
        let only_odd = |v: VertexId| v.0 % 2 == 1;
        assert_eq!(rank_top_k(&t, 5, Some(&only_odd)), vec![(VertexId(1), 5.0)]);
        assert_eq!(rank_top_k(&t, 10, None).len(), 2);
    }
}
