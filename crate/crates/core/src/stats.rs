//! Degree statistics and kernel density estimates.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::graph::{LayerId, MultilayerGraph};

#[derive(Debug, Clone, PartialEq)]
pub struct DegreeStats {
    pub n: usize,
    pub l: usize,
    pub mean_degree: f64,
    pub k_max: usize,
    /// Degree to fraction of vertices.
    pub histogram: BTreeMap<usize, f64>,
}

impl DegreeStats {
    /// Most frequent degree; the smallest one on ties.
    pub fn modal_degree(&self) -> usize {
        let mut best = (0, f64::NEG_INFINITY);
        for (&k, &p) in &self.histogram {
            if p > best.1 {
                best = (k, p);
            }
        }
        best.0
    }

    pub fn fraction(&self, degree: usize) -> f64 {
        self.histogram.get(&degree).copied().unwrap_or(0.0)
    }
}

pub fn degree_stats(g: &MultilayerGraph) -> Result<DegreeStats> {
    layer_degree_stats(g, |_| true)
}

/// Statistics of the subgraph induced by the vertices whose layer passes
/// `keep`.
pub fn layer_degree_stats(g: &MultilayerGraph, keep: impl Fn(LayerId) -> bool) -> Result<DegreeStats> {
    let inside: Vec<bool> = g.vertices().map(|v| keep(g.layer(v))).collect();
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    let mut n = 0;
    let mut ends = 0;
    for v in g.vertices().filter(|v| inside[v.index()]) {
        let k = g
            .neighbors(v)
            .iter()
            .filter(|(u, _)| inside[u.index()])
            .count();
        *counts.entry(k).or_default() += 1;
        n += 1;
        ends += k;
    }
    if n == 0 {
        return Err(Error::EmptySet("graph has no vertices".into()));
    }
    let l = ends / 2;
    Ok(DegreeStats {
        n,
        l,
        mean_degree: (2 * l) as f64 / n as f64,
        k_max: counts.keys().next_back().copied().unwrap_or(0),
        histogram: counts
            .into_iter()
            .map(|(k, c)| (k, c as f64 / n as f64))
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct KdeCurve {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
    /// The input sample, sorted.
    pub sample: Vec<f64>,
}

/// Sample quantile with linear interpolation between order statistics.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn sorted_sample(values: &[f64]) -> Result<Vec<f64>> {
    if let Some(&x) = values.iter().find(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-finite sample value {x}")));
    }
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    if s.is_empty() || s[0] == s[s.len() - 1] {
        return Err(Error::TooFewDistinct);
    }
    Ok(s)
}

fn silverman(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    let sd = (sorted.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let iqr = quantile(sorted, 0.75) - quantile(sorted, 0.25);
    // A sample with most mass on one value has IQR 0; fall back to sd.
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    0.9 * spread * n.powf(-0.2)
}

/// Silverman's rule-of-thumb bandwidth.
pub fn silverman_bandwidth(values: &[f64]) -> Result<f64> {
    Ok(silverman(&sorted_sample(values)?))
}

/// Gaussian KDE of `values` evaluated at `x`.
pub fn density_at(sorted: &[f64], bandwidth: f64, x: f64) -> f64 {
    let norm = 1.0 / (sorted.len() as f64 * bandwidth * (2.0 * PI).sqrt());
    norm * sorted
        .iter()
        .map(|&v| {
            let z = (x - v) / bandwidth;
            (-0.5 * z * z).exp()
        })
        .sum::<f64>()
}

/// Gaussian KDE on `grid_points` equally spaced points spanning four
/// bandwidths beyond the data range.
pub fn kde(values: &[f64], grid_points: usize) -> Result<KdeCurve> {
    if grid_points < 2 {
        return Err(Error::InvalidArgument("a KDE grid needs at least 2 points".into()));
    }
    let sample = sorted_sample(values)?;
    let h = silverman(&sample);
    let lo = sample[0] - 4.0 * h;
    let hi = sample[sample.len() - 1] + 4.0 * h;
    let step = (hi - lo) / (grid_points - 1) as f64;
    let grid: Vec<f64> = (0..grid_points)
        .map(|i| if i + 1 == grid_points { hi } else { lo + i as f64 * step })
        .collect();
    let density = grid.iter().map(|&x| density_at(&sample, h, x)).collect();
    Ok(KdeCurve {
        grid,
        density,
        bandwidth: h,
        sample,
    })
}

impl KdeCurve {
    /// Trapezoidal integral of the density over the whole grid.
    pub fn integral(&self) -> f64 {
        self.mass_between(f64::NEG_INFINITY, f64::INFINITY)
    }

    /// Trapezoidal mass over `[a, b]` clipped to the grid, treating the
    /// density as piecewise linear.
    pub fn mass_between(&self, a: f64, b: f64) -> f64 {
        let mut total = 0.0;
        for i in 1..self.grid.len() {
            let (x0, x1) = (self.grid[i - 1], self.grid[i]);
            let lo = x0.max(a);
            let hi = x1.min(b);
            if hi <= lo {
                continue;
            }
            let f = |x: f64| {
                let t = (x - x0) / (x1 - x0);
                self.density[i - 1] + t * (self.density[i] - self.density[i - 1])
            };
            total += 0.5 * (f(lo) + f(hi)) * (hi - lo);
        }
        total
    }

    pub fn mass_above(&self, threshold: f64) -> f64 {
        self.mass_between(threshold, f64::INFINITY)
    }

    pub fn mass_below(&self, threshold: f64) -> f64 {
        self.mass_between(f64::NEG_INFINITY, threshold)
    }

    /// Raw sample values strictly above `threshold`.
    pub fn count_above(&self, threshold: f64) -> usize {
        self.sample.len() - self.sample.partition_point(|&v| v <= threshold)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveSummary {
    pub mass_above: f64,
    pub mass_below: f64,
    pub count_above: usize,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub threshold: f64,
    pub a: CurveSummary,
    pub b: CurveSummary,
}

pub fn compare_distributions(a: &KdeCurve, b: &KdeCurve, threshold: f64) -> Comparison {
    let summary = |c: &KdeCurve| CurveSummary {
        mass_above: c.mass_above(threshold),
        mass_below: c.mass_below(threshold),
        count_above: c.count_above(threshold),
        n: c.sample.len(),
    };
    Comparison {
        threshold,
        a: summary(a),
        b: summary(b),
    }
}
