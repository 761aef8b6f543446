mod common;

use common::*;
use tdnet_core::centrality::rank_top_k;
use tdnet_core::scenarios::{case2_setup, run_case1, run_case2};
use tdnet_core::{Error, LayerId, MultilayerGraph, VertexId, VertexKind, VertexMeta};

struct Toy {
    g: MultilayerGraph,
}

impl Toy {
    fn new() -> Self {
        Toy {
            g: MultilayerGraph::new(),
        }
    }

    fn t(&mut self, name: &str, kind: VertexKind) -> VertexId {
        self.g.add_vertex(LayerId::TRANSMISSION, VertexMeta::new(name, kind)).unwrap()
    }

    fn gen(&mut self, name: &str, mw: f64, black_start: bool) -> VertexId {
        let meta = VertexMeta::new(name, VertexKind::SynchronousGenerator)
            .with_capacity_kw(mw * 1e3)
            .with_black_start(black_start);
        self.g.add_vertex(LayerId::TRANSMISSION, meta).unwrap()
    }

    fn d(&mut self, name: &str, kind: VertexKind) -> VertexId {
        let meta = VertexMeta::new(name, kind);
        let meta = if kind == VertexKind::GfmInverter {
            meta.with_capacity_kw(250.0).with_black_start(true)
        } else {
            meta
        };
        self.g.add_vertex(LayerId::distribution(0), meta).unwrap()
    }

    fn link(&mut self, pairs: &[(VertexId, VertexId)]) {
        for &(a, b) in pairs {
            self.g.add_edge(a, b, 1.0).unwrap();
        }
    }

    fn done(mut self) -> MultilayerGraph {
        self.g.finalize();
        self.g
    }
}

fn top_where(t: &tdnet_core::CentralityTable, f: &dyn Fn(VertexId) -> bool) -> VertexId {
    rank_top_k(t, 1, Some(f))[0].0
}

#[test]
fn substation_tops_the_feeder_side() {
    let mut toy = Toy::new();
    let g1 = toy.gen("G1", 100.0, false);
    let lb = toy.t("LB", VertexKind::LoadBus);
    let sub = toy.d("SUB", VertexKind::Substation);
    let a = toy.d("a", VertexKind::Junction);
    let b = toy.d("b", VertexKind::Junction);
    toy.link(&[(g1, lb), (lb, sub), (sub, a), (sub, b)]);
    let g = toy.done();
    let (_, between) = run_case1(&g).unwrap();
    let d_side = |v: VertexId| g.layer(v).is_distribution();
    assert_eq!(top_where(&between, &d_side), sub);

    let targets = layer_vertices(&g, false);
    let want = oracle_betweenness(&g, &[(g1, 1)], &targets);
    for v in g.vertices() {
        assert_close(between.get(v).unwrap(), &want[v.index()], 1e-12, g.name(v));
    }
}

#[test]
fn generator_next_to_the_only_load_bus() {
    let mut toy = Toy::new();
    let g1 = toy.gen("G1", 100.0, false);
    let g2 = toy.gen("G2", 100.0, false);
    let x = toy.t("X", VertexKind::Junction);
    let y = toy.t("Y", VertexKind::Junction);
    let lb = toy.t("LB", VertexKind::LoadBus);
    let sub = toy.d("SUB", VertexKind::Substation);
    let f = toy.d("f", VertexKind::Junction);
    toy.link(&[(g1, lb), (g2, x), (x, y), (y, lb), (lb, sub), (sub, f)]);
    let g = toy.done();
    let (close, between) = run_case1(&g).unwrap();
    let t_side = |v: VertexId| g.layer(v).is_transmission();
    assert_eq!(top_where(&between, &t_side), lb);
    assert_eq!(top_where(&close, &t_side), lb);
}

#[test]
fn single_bridge_normalizes_to_one() {
    let mut toy = Toy::new();
    let g1 = toy.gen("G1", 100.0, true);
    let bridge = toy.t("B", VertexKind::Junction);
    let g2 = toy.gen("G2", 300.0, false);
    let lb = toy.t("LB", VertexKind::LoadBus);
    let sub = toy.d("SUB", VertexKind::Substation);
    let gfm = toy.d("GFM-1", VertexKind::GfmInverter);
    toy.link(&[(g1, bridge), (bridge, g2), (g1, lb), (lb, sub), (sub, gfm)]);
    let g = toy.done();
    let (s1, s2) = run_case2(&g, &["G1"]).unwrap();
    for t in [&s1, &s2] {
        assert_eq!(t.get(bridge), Some(1.0));
        assert_eq!(t.max_value(), 1.0);
        assert!(t.normalized);
    }
    // only the inverter's paths cross the load bus
    assert_eq!(s1.get(lb), Some(0.0));
    assert_eq!(s2.get(lb), Some(250.0 / (100e3 + 250.0)));
}

#[test]
fn corridors_split_by_capacity() {
    let mut toy = Toy::new();
    let big = toy.gen("G1", 200.0, true);
    let small = toy.gen("G2", 100.0, true);
    let a = toy.t("a", VertexKind::Junction);
    let b = toy.t("b", VertexKind::Junction);
    let target = toy.gen("G3", 500.0, false);
    let lb = toy.t("LB", VertexKind::LoadBus);
    let sub = toy.d("SUB", VertexKind::Substation);
    let gfm = toy.d("GFM-1", VertexKind::GfmInverter);
    toy.link(&[(big, a), (a, target), (small, b), (b, target), (target, lb), (lb, sub), (sub, gfm)]);
    let g = toy.done();
    let (s1, _) = run_case2(&g, &["G1", "G2"]).unwrap();
    assert_eq!(s1.get(a), Some(1.0));
    assert_eq!(s1.get(b), Some(0.5));
    let want = oracle_betweenness(&g, &[(big, 200_000), (small, 100_000)], &[target]);
    assert_eq!(to_f64(&want[a.index()]) / to_f64(&want[b.index()]), 2.0);
}

#[test]
fn case2_rejects_bad_sets() {
    let mut toy = Toy::new();
    let g1 = toy.gen("G1", 100.0, true);
    let g2 = toy.gen("G2", 100.0, false);
    let lb = toy.t("LB", VertexKind::LoadBus);
    let sub = toy.d("SUB", VertexKind::Substation);
    toy.link(&[(g1, lb), (lb, g2), (lb, sub)]);
    let g = toy.done();
    assert!(matches!(run_case2(&g, &["G9"]), Err(Error::UnknownName(_))));
    assert!(matches!(run_case2(&g, &["G2"]), Err(Error::Scenario(_))));
    assert!(matches!(run_case2(&g, &["LB"]), Err(Error::Scenario(_))));
    // no grid-forming inverters
    assert!(matches!(case2_setup(&g, &["G1"], 250.0), Err(Error::EmptySet(_))));

    let mut toy = Toy::new();
    let g1 = toy.gen("G1", 100.0, true);
    let lb = toy.t("LB", VertexKind::LoadBus);
    let sub = toy.d("SUB", VertexKind::Substation);
    let gfm = toy.d("GFM-1", VertexKind::GfmInverter);
    toy.link(&[(g1, lb), (lb, sub), (sub, gfm)]);
    let g = toy.done();
    // every generator is a source, so nothing is left to energize
    assert!(matches!(run_case2(&g, &["G1"]), Err(Error::EmptySet(_))));
}
