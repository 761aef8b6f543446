use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{LayerId, MultilayerGraph, VertexId};
use crate::model::{
    derive_seed, synthesize_feeder, synthesize_transmission, AttachmentPlan, SeedStream, VertexKind,
    VertexMeta, REFERENCE_BLACK_START_ORDINALS,
};

/// Tag the plan's load buses in a transmission layer.
///
/// A name that already exists must be a junction or load bus and is tagged
/// in place. Missing names are given to randomly chosen junctions whose own
/// names are not in the plan (the bus is renamed).
pub fn designate_load_buses<'a>(
    t: &mut MultilayerGraph,
    names: impl IntoIterator<Item = &'a str>,
    seed: u64,
) -> Result<()> {
    let names: Vec<&str> = names.into_iter().collect();
    let wanted: HashSet<&str> = names.iter().copied().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spare: Vec<VertexId> = t
        .vertices()
        .filter(|&v| t.meta(v).kind == VertexKind::Junction && !wanted.contains(t.name(v)))
        .collect();
    spare.shuffle(&mut rng);
    let mut spare = spare.into_iter();
    for name in names {
        let v = match t.find(name) {
            Some(v) => v,
            None => spare.next().ok_or_else(|| {
                Error::Plan(format!("no junction bus left to host load bus `{name}`"))
            })?,
        };
        let meta = t.meta(v);
        if !matches!(meta.kind, VertexKind::Junction | VertexKind::LoadBus) {
            return Err(Error::Plan(format!(
                "`{name}` is a {} and cannot be a load bus",
                meta.kind
            )));
        }
        let meta = VertexMeta {
            name: name.to_string(),
            kind: VertexKind::LoadBus,
            ..meta.clone()
        };
        t.set_meta(v, meta)?;
    }
    Ok(())
}

/// Flag the named synchronous generators as black-start capable.
pub fn mark_black_start<'a>(
    g: &mut MultilayerGraph,
    names: impl IntoIterator<Item = &'a str>,
) -> Result<()> {
    for name in names {
        let v = g.find_or_err(name)?;
        let meta = g.meta(v).clone().with_black_start(true);
        if meta.kind != VertexKind::SynchronousGenerator {
            return Err(Error::InvalidMeta {
                name: name.to_string(),
                message: format!("a {} cannot be marked as a black-start generator", meta.kind),
            });
        }
        g.set_meta(v, meta)?;
    }
    Ok(())
}

/// Join feeders to their load buses and freeze the integrated graph.
///
/// `feeders[k]` becomes distribution replica `k` and is attached, through
/// its single substation, to the load bus the plan assigns to replica `k`.
/// Feeder vertices are renamed `D<k>.<name>`. Transmission vertices keep
/// their ids; each feeder follows in replica order. A junction named as a
/// load bus is promoted to [`VertexKind::LoadBus`].
pub fn attach_feeders(
    t: &MultilayerGraph,
    feeders: &[MultilayerGraph],
    plan: &AttachmentPlan,
) -> Result<MultilayerGraph> {
    if plan.len() != feeders.len() {
        return Err(Error::Plan(format!(
            "plan has {} entries for {} feeders",
            plan.len(),
            feeders.len()
        )));
    }
    let mut bus_of = vec![None; feeders.len()];
    for (bus, k) in plan.entries() {
        let slot = bus_of.get_mut(*k as usize).ok_or_else(|| {
            Error::Plan(format!("replica {k} out of range for {} feeders", feeders.len()))
        })?;
        *slot = Some(bus.as_str());
    }
    if let Some(v) = t.vertices().find(|&v| !t.layer(v).is_transmission()) {
        return Err(Error::Plan(format!(
            "transmission input holds non-transmission vertex `{}`",
            t.name(v)
        )));
    }

    let mut g = t.clone();
    g.thaw();
    for (k, (feeder, bus)) in feeders.iter().zip(bus_of).enumerate() {
        let bus = bus.expect("plan covers every replica");
        let bus_id = t
            .find(bus)
            .ok_or_else(|| Error::Plan(format!("load bus `{bus}` not in the transmission layer")))?;
        let kind = t.meta(bus_id).kind;
        if !matches!(kind, VertexKind::LoadBus | VertexKind::Junction) {
            return Err(Error::Plan(format!("`{bus}` is a {kind}, not a load bus")));
        }
        if kind == VertexKind::Junction {
            let meta = VertexMeta {
                kind: VertexKind::LoadBus,
                ..t.meta(bus_id).clone()
            };
            g.set_meta(bus_id, meta)?;
        }

        let subs: Vec<VertexId> = feeder
            .vertices()
            .filter(|&v| feeder.meta(v).kind == VertexKind::Substation)
            .collect();
        let [sub] = subs[..] else {
            return Err(Error::Plan(format!(
                "feeder {k} must have exactly one substation, found {}",
                subs.len()
            )));
        };

        let layer = LayerId::distribution(k as u32);
        let offset = g.vertex_count() as u32;
        for v in feeder.vertices() {
            let mut meta = feeder.meta(v).clone();
            meta.name = format!("D{k}.{}", meta.name);
            g.add_vertex(layer, meta)?;
        }
        let shift = |v: VertexId| VertexId(v.0 + offset);
        g.add_edge(bus_id, shift(sub), 1.0)?;
        for e in feeder.edges() {
            g.add_edge(shift(e.u), shift(e.v), e.weight)?;
        }
    }
    g.finalize();
    Ok(g)
}

/// Sizes and seed of a fully synthetic integrated model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthParams {
    /// Transmission buses, lines and generators.
    pub transmission: (usize, usize, usize),
    /// Feeder nodes, GFM inverters and GFL inverters.
    pub feeder: (usize, usize, usize),
    pub replicas: usize,
    pub seed: u64,
}

impl SynthParams {
    /// Full-size model: 142/174/41 transmission, 21 feeders of 4877 nodes
    /// carrying 275 GFM and 275 GFL inverters each.
    pub fn reference(seed: u64) -> Self {
        SynthParams {
            transmission: (142, 174, 41),
            feeder: (4877, 275, 275),
            replicas: 21,
            seed,
        }
    }
}

/// Synthesize both layers, flag the reference black-start generators,
/// designate the reference load buses and attach identical feeder replicas.
pub fn synthesize_integrated(p: &SynthParams) -> Result<(MultilayerGraph, AttachmentPlan)> {
    let (n, l, gens) = p.transmission;
    let mut t = synthesize_transmission(n, l, gens, derive_seed(p.seed, SeedStream::Transmission, 0))?;
    let names: Vec<String> = REFERENCE_BLACK_START_ORDINALS
        .iter()
        .filter(|&&j| j <= gens)
        .map(|j| format!("G{j}"))
        .collect();
    mark_black_start(&mut t, names.iter().map(String::as_str))?;
    let plan = AttachmentPlan::reference(p.replicas)?;
    designate_load_buses(&mut t, plan.load_buses(), derive_seed(p.seed, SeedStream::LoadBuses, 0))?;
    let (fn_, gfm, gfl) = p.feeder;
    let feeder = synthesize_feeder(fn_, gfm, gfl, derive_seed(p.seed, SeedStream::Feeder, 0))?;
    let g = attach_feeders(&t, &vec![feeder; plan.len()], &plan)?;
    Ok((g, plan))
}
