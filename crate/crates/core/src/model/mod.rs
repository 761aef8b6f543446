//! Building the integrated T&D graph: metadata, CSV ingestion, synthetic
//! stand-ins for the transmission and feeder models, and feeder attachment.

mod attach;
mod io;
mod synth;

use std::fmt;
use std::str::FromStr;

pub use attach::{
    attach_feeders, designate_load_buses, mark_black_start, synthesize_integrated, SynthParams,
};
pub use io::{
    ingest_edges, ingest_vertex_meta, read_plan, write_edges, write_plan, write_vertex_meta,
};
pub use synth::{derive_seed, synthesize_feeder, synthesize_transmission, SeedStream};

/// Rated power of every inverter-based resource, in kW.
pub const IBR_RATING_KW: f64 = 250.0;

/// Range of synthetic generator ratings, in MW.
pub const GENERATOR_RATING_MW: (f64, f64) = (100.0, 2000.0);

/// Name given to the substation root of synthesized feeders.
pub const FEEDER_SUBSTATION_NAME: &str = "_HVMV_Sub_LSB";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VertexKind {
    SynchronousGenerator,
    LoadBus,
    Substation,
    GfmInverter,
    GflInverter,
    Junction,
}

impl VertexKind {
    pub const ALL: [VertexKind; 6] = [
        VertexKind::SynchronousGenerator,
        VertexKind::LoadBus,
        VertexKind::Substation,
        VertexKind::GfmInverter,
        VertexKind::GflInverter,
        VertexKind::Junction,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            VertexKind::SynchronousGenerator => "SynchronousGenerator",
            VertexKind::LoadBus => "LoadBus",
            VertexKind::Substation => "Substation",
            VertexKind::GfmInverter => "GfmInverter",
            VertexKind::GflInverter => "GflInverter",
            VertexKind::Junction => "Junction",
        }
    }

    /// Kinds able to energize a dead network on their own.
    pub fn can_black_start(self) -> bool {
        matches!(self, VertexKind::SynchronousGenerator | VertexKind::GfmInverter)
    }

    pub fn is_ibr(self) -> bool {
        matches!(self, VertexKind::GfmInverter | VertexKind::GflInverter)
    }
}

impl fmt::Display for VertexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VertexKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        VertexKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown vertex kind `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VertexMeta {
    pub name: String,
    pub kind: VertexKind,
    /// Rated capacity in kW; zero for vertices that are not sources.
    pub capacity_kw: f64,
    pub black_start: bool,
}

impl VertexMeta {
    pub fn new(name: impl Into<String>, kind: VertexKind) -> Self {
        VertexMeta {
            name: name.into(),
            kind,
            capacity_kw: 0.0,
            black_start: false,
        }
    }

    pub fn junction(name: impl Into<String>) -> Self {
        Self::new(name, VertexKind::Junction)
    }

    pub fn with_capacity_kw(mut self, kw: f64) -> Self {
        self.capacity_kw = kw;
        self
    }

    pub fn with_black_start(mut self, black_start: bool) -> Self {
        self.black_start = black_start;
        self
    }

    pub fn validate(&self) -> crate::Result<()> {
        let bad = |message: &str| {
            Err(crate::Error::InvalidMeta {
                name: self.name.clone(),
                message: message.to_string(),
            })
        };
        if !(self.capacity_kw.is_finite() && self.capacity_kw >= 0.0) {
            return bad("capacity must be a non-negative number");
        }
        if self.black_start && !self.kind.can_black_start() {
            return bad("only synchronous generators and grid-forming inverters can black start");
        }
        Ok(())
    }
}

/// Which load bus each feeder replica hangs off.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttachmentPlan {
    entries: Vec<(String, u32)>,
}

/// Interconnection bus numbers for the 21 feeders of the reference system.
/// Bus 1120 shares its physical bus with 1036 but is kept as a
/// separate vertex.
pub const REFERENCE_LOAD_BUSES: [&str; 21] = [
    "24", "69", "1008", "1011", "1016", "1021", "1026", "1029", "1036", "1043", "1050", "1055",
    "1056", "1064", "1070", "1073", "1078", "1095", "1109", "1112", "1120",
];

/// Ordinals (1-based, among generators in vertex order) of the generators
/// treated as black-start capable in the reference restoration study.
pub const REFERENCE_BLACK_START_ORDINALS: [usize; 8] = [2, 10, 13, 15, 18, 22, 28, 33];

impl AttachmentPlan {
    pub fn new(entries: Vec<(String, u32)>) -> crate::Result<Self> {
        let mut buses = std::collections::HashSet::new();
        let mut replicas = std::collections::HashSet::new();
        for (bus, replica) in &entries {
            if !buses.insert(bus.as_str()) {
                return Err(crate::Error::Plan(format!("load bus `{bus}` used twice")));
            }
            if !replicas.insert(*replica) {
                return Err(crate::Error::Plan(format!("feeder replica {replica} used twice")));
            }
        }
        Ok(AttachmentPlan { entries })
    }

    /// The reference plan, truncated to the first `replicas` buses.
    pub fn reference(replicas: usize) -> crate::Result<Self> {
        if replicas > REFERENCE_LOAD_BUSES.len() {
            return Err(crate::Error::Plan(format!(
                "the reference plan has {} buses, {replicas} requested",
                REFERENCE_LOAD_BUSES.len()
            )));
        }
        Self::new(
            REFERENCE_LOAD_BUSES[..replicas]
                .iter()
                .enumerate()
                .map(|(k, b)| (b.to_string(), k as u32))
                .collect(),
        )
    }

    pub fn entries(&self) -> &[(String, u32)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn load_buses(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(b, _)| b.as_str())
    }
}
