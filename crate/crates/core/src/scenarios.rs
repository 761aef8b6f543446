//! Experiment definitions: which vertices act as sources and targets, how
//! sources are weighted, and how results are reported.

use std::fmt;
use std::str::FromStr;

use crate::centrality::{
    cross_betweenness, cross_closeness, normalize_max, weighted_cross_betweenness,
    CentralityTable, Metric, VertexSet, WeightedSourceSet,
};
use crate::error::{Error, Result};
use crate::graph::{LayerKind, MultilayerGraph, VertexId};
use crate::model::{VertexKind, IBR_RATING_KW};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectorKeyword {
    Generators,
    BlackStartGenerators,
    NonBlackStartGenerators,
    GfmInverters,
    DAll,
    TAll,
}

impl SelectorKeyword {
    const ALL: [SelectorKeyword; 6] = [
        SelectorKeyword::Generators,
        SelectorKeyword::BlackStartGenerators,
        SelectorKeyword::NonBlackStartGenerators,
        SelectorKeyword::GfmInverters,
        SelectorKeyword::DAll,
        SelectorKeyword::TAll,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SelectorKeyword::Generators => "generators",
            SelectorKeyword::BlackStartGenerators => "black_start_generators",
            SelectorKeyword::NonBlackStartGenerators => "non_black_start_generators",
            SelectorKeyword::GfmInverters => "gfm_inverters",
            SelectorKeyword::DAll => "d_all",
            SelectorKeyword::TAll => "t_all",
        }
    }

    fn matches(self, g: &MultilayerGraph, v: VertexId) -> bool {
        let m = g.meta(v);
        let gen = m.kind == VertexKind::SynchronousGenerator;
        match self {
            SelectorKeyword::Generators => gen,
            SelectorKeyword::BlackStartGenerators => gen && m.black_start,
            SelectorKeyword::NonBlackStartGenerators => gen && !m.black_start,
            SelectorKeyword::GfmInverters => m.kind == VertexKind::GfmInverter,
            SelectorKeyword::DAll => g.layer(v).is_distribution(),
            SelectorKeyword::TAll => g.layer(v).is_transmission(),
        }
    }
}

impl FromStr for SelectorKeyword {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SelectorKeyword::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Scenario(format!("unknown selector `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Keyword(SelectorKeyword),
    Name(String),
}

impl FromStr for Term {
    type Err = Error;

    /// A selector keyword, or `name:<vertex>` for a single vertex.
    fn from_str(s: &str) -> Result<Self> {
        match s.strip_prefix("name:") {
            Some(name) => Ok(Term::Name(name.to_string())),
            None => s.parse().map(Term::Keyword),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Keyword(k) => f.write_str(k.as_str()),
            Term::Name(n) => write!(f, "name:{n}"),
        }
    }
}

/// Union of `include` terms minus the union of `exclude` terms.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Selector {
    pub include: Vec<Term>,
    pub exclude: Vec<Term>,
}

impl Selector {
    pub fn keyword(k: SelectorKeyword) -> Self {
        Selector {
            include: vec![Term::Keyword(k)],
            exclude: Vec::new(),
        }
    }

    pub fn names<S: AsRef<str>>(names: &[S]) -> Self {
        Selector {
            include: names.iter().map(|n| Term::Name(n.as_ref().to_string())).collect(),
            exclude: Vec::new(),
        }
    }

    pub fn or(mut self, term: Term) -> Self {
        self.include.push(term);
        self
    }

    pub fn except(mut self, terms: impl IntoIterator<Item = Term>) -> Self {
        self.exclude.extend(terms);
        self
    }

    fn term_members(g: &MultilayerGraph, term: &Term) -> Result<Vec<VertexId>> {
        match term {
            Term::Keyword(k) => Ok(g.vertices().filter(|&v| k.matches(g, v)).collect()),
            Term::Name(n) => Ok(vec![g.find_or_err(n)?]),
        }
    }

    /// Matching vertices in ascending order.
    pub fn resolve(&self, g: &MultilayerGraph) -> Result<Vec<VertexId>> {
        let mut keep = vec![false; g.vertex_count()];
        for t in &self.include {
            for v in Self::term_members(g, t)? {
                keep[v.index()] = true;
            }
        }
        for t in &self.exclude {
            for v in Self::term_members(g, t)? {
                keep[v.index()] = false;
            }
        }
        Ok(g.vertices().filter(|v| keep[v.index()]).collect())
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let inc: Vec<String> = self.include.iter().map(Term::to_string).collect();
        f.write_str(&inc.join("+"))?;
        for t in &self.exclude {
            write!(f, " -{t}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weighting {
    Unweighted,
    /// Source weight is the vertex capacity in kW; grid-forming inverters
    /// use `gfm_kw` instead when set.
    ByCapacity { gfm_kw: Option<f64> },
}

/// Which centrality a scenario computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioMetric {
    Closeness,
    Betweenness,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub name: String,
    pub metric: ScenarioMetric,
    pub sources: Selector,
    pub targets: Selector,
    pub weighting: Weighting,
    pub normalize: bool,
    pub report_layer: Option<LayerKind>,
}

/// A scenario bound to concrete vertices of one graph.
#[derive(Debug, Clone)]
pub struct ResolvedScenario {
    pub metric: Metric,
    pub sources: WeightedSourceSet,
    pub targets: VertexSet,
    pub normalize: bool,
}

impl ScenarioSpec {
    pub fn resolve(&self, g: &MultilayerGraph) -> Result<ResolvedScenario> {
        let sources = self.sources.resolve(g)?;
        let targets = self.targets.resolve(g)?;
        if sources.is_empty() {
            return Err(Error::EmptySet(format!("{}: sources `{}`", self.name, self.sources)));
        }
        if targets.is_empty() {
            return Err(Error::EmptySet(format!("{}: targets `{}`", self.name, self.targets)));
        }
        let targets = VertexSet::new(g, targets)?;
        if let Some(&v) = sources.iter().find(|&&v| targets.contains(v)) {
            return Err(Error::OverlappingSets(v));
        }
        let (metric, weighted) = match (self.metric, self.weighting) {
            (ScenarioMetric::Closeness, _) => (Metric::CrossCloseness, None),
            (ScenarioMetric::Betweenness, Weighting::Unweighted) => (Metric::CrossBetweenness, None),
            (ScenarioMetric::Betweenness, Weighting::ByCapacity { gfm_kw }) => {
                (Metric::WeightedCrossBetweenness, Some(gfm_kw))
            }
        };
        let entries = sources
            .into_iter()
            .map(|v| {
                let w = match weighted {
                    None => 1.0,
                    Some(gfm_kw) => {
                        let m = g.meta(v);
                        match gfm_kw {
                            Some(kw) if m.kind == VertexKind::GfmInverter => kw,
                            _ => m.capacity_kw,
                        }
                    }
                };
                if w.is_nan() || w <= 0.0 {
                    return Err(Error::Scenario(format!(
                        "{}: source `{}` has no positive capacity",
                        self.name,
                        g.name(v)
                    )));
                }
                Ok((v, w))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ResolvedScenario {
            metric,
            sources: WeightedSourceSet::new(entries)?,
            targets,
            normalize: self.normalize,
        })
    }

    /// Whether `v` belongs to the layer results are reported for.
    pub fn reports(&self, g: &MultilayerGraph, v: VertexId) -> bool {
        self.report_layer.is_none_or(|k| g.layer(v).kind() == k)
    }
}

/// Compute a scenario in-process.
pub fn run_spec(spec: &ScenarioSpec, g: &MultilayerGraph) -> Result<CentralityTable> {
    let r = spec.resolve(g)?;
    let targets = r.targets.members();
    let sources: Vec<VertexId> = r.sources.vertices().collect();
    let mut table = match r.metric {
        Metric::CrossCloseness => cross_closeness(g, &sources, targets)?,
        Metric::CrossBetweenness => cross_betweenness(g, &sources, targets)?,
        Metric::WeightedCrossBetweenness => weighted_cross_betweenness(g, &r.sources, targets)?,
    };
    if r.normalize {
        table = normalize_max(&table)?;
    }
    table.sources = spec.sources.to_string();
    table.targets = spec.targets.to_string();
    Ok(table)
}

pub const CASE1_CLOSENESS: &str = "case1_closeness";
pub const CASE1_BETWEENNESS: &str = "case1_betweenness";
pub const CASE2_SCENARIO1: &str = "case2_scenario1";
pub const CASE2_SCENARIO2: &str = "case2_scenario2";

/// Energy exchange between the transmission layer (or its generators) and
/// every distribution vertex. Values are reported unnormalized.
pub fn case1_specs() -> [ScenarioSpec; 2] {
    [
        ScenarioSpec {
            name: CASE1_CLOSENESS.into(),
            metric: ScenarioMetric::Closeness,
            sources: Selector::keyword(SelectorKeyword::TAll),
            targets: Selector::keyword(SelectorKeyword::DAll),
            weighting: Weighting::Unweighted,
            normalize: false,
            report_layer: Some(LayerKind::Transmission),
        },
        ScenarioSpec {
            name: CASE1_BETWEENNESS.into(),
            metric: ScenarioMetric::Betweenness,
            sources: Selector::keyword(SelectorKeyword::Generators),
            targets: Selector::keyword(SelectorKeyword::DAll),
            weighting: Weighting::Unweighted,
            normalize: false,
            report_layer: Some(LayerKind::Transmission),
        },
    ]
}

/// Black-start restoration: the named generators (scenario 1), plus every
/// grid-forming inverter at `gfm_kw` (scenario 2), energize the remaining
/// generators. Both tables are capacity weighted and max-normalized.
pub fn case2_specs<S: AsRef<str>>(black_start: &[S], gfm_kw: f64) -> [ScenarioSpec; 2] {
    let named: Vec<Term> = black_start
        .iter()
        .map(|n| Term::Name(n.as_ref().to_string()))
        .collect();
    let targets = Selector::keyword(SelectorKeyword::Generators).except(named);
    let s1 = ScenarioSpec {
        name: CASE2_SCENARIO1.into(),
        metric: ScenarioMetric::Betweenness,
        sources: Selector::names(black_start),
        targets,
        weighting: Weighting::ByCapacity {
            gfm_kw: Some(gfm_kw),
        },
        normalize: true,
        report_layer: Some(LayerKind::Transmission),
    };
    let s2 = ScenarioSpec {
        name: CASE2_SCENARIO2.into(),
        sources: s1
            .sources
            .clone()
            .or(Term::Keyword(SelectorKeyword::GfmInverters)),
        ..s1.clone()
    };
    [s1, s2]
}

/// Case 1: cross-closeness of transmission vertices to the distribution
/// layer, and cross-betweenness of generator-to-distribution paths.
pub fn run_case1(g: &MultilayerGraph) -> Result<(CentralityTable, CentralityTable)> {
    let [c, b] = case1_specs();
    Ok((run_spec(&c, g)?, run_spec(&b, g)?))
}

/// Source sets of the restoration study, resolved and validated.
#[derive(Debug, Clone)]
pub struct Case2Setup {
    pub black_start: WeightedSourceSet,
    pub gfm: WeightedSourceSet,
    pub targets: Vec<VertexId>,
}

impl Case2Setup {
    pub fn scenario2_sources(&self) -> Result<WeightedSourceSet> {
        self.black_start.union(&self.gfm)
    }
}

pub fn case2_setup<S: AsRef<str>>(
    g: &MultilayerGraph,
    black_start: &[S],
    gfm_kw: f64,
) -> Result<Case2Setup> {
    if black_start.is_empty() {
        return Err(Error::EmptySet("black-start generators".into()));
    }
    for name in black_start {
        let v = g.find_or_err(name.as_ref())?;
        let m = g.meta(v);
        if m.kind != VertexKind::SynchronousGenerator || !m.black_start {
            return Err(Error::Scenario(format!(
                "`{}` is not a black-start capable generator",
                m.name
            )));
        }
    }
    let [s1, s2] = case2_specs(black_start, gfm_kw);
    let r1 = s1.resolve(g)?;
    let r2 = s2.resolve(g)?;
    let gfm = WeightedSourceSet::new(
        r2.sources
            .entries()
            .iter()
            .filter(|&&(v, _)| g.meta(v).kind == VertexKind::GfmInverter)
            .copied()
            .collect(),
    )?;
    if gfm.is_empty() {
        return Err(Error::EmptySet("grid-forming inverters".into()));
    }
    Ok(Case2Setup {
        black_start: r1.sources,
        gfm,
        targets: r1.targets.members().to_vec(),
    })
}

/// Case 2: normalized capacity-weighted betweenness without (scenario 1)
/// and with (scenario 2) grid-forming inverters as black-start sources.
pub fn run_case2<S: AsRef<str>>(
    g: &MultilayerGraph,
    black_start: &[S],
) -> Result<(CentralityTable, CentralityTable)> {
    case2_setup(g, black_start, IBR_RATING_KW)?;
    let [s1, s2] = case2_specs(black_start, IBR_RATING_KW);
    Ok((run_spec(&s1, g)?, run_spec(&s2, g)?))
}

/// Built-in scenarios by name.
pub fn builtin<S: AsRef<str>>(name: &str, black_start: &[S]) -> Option<ScenarioSpec> {
    let [c, b] = case1_specs();
    let [s1, s2] = case2_specs(black_start, IBR_RATING_KW);
    [c, b, s1, s2].into_iter().find(|s| s.name == name)
}
