use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{LayerId, MultilayerGraph};
use crate::model::{AttachmentPlan, VertexKind, VertexMeta};

const EDGE_HEADER: [&str; 5] = ["src", "dst", "src_layer", "dst_layer", "weight"];
const META_HEADER_KW: [&str; 4] = ["name", "kind", "capacity_kw", "black_start"];
const META_HEADER_MW: [&str; 4] = ["name", "kind", "capacity_mw", "black_start"];
const PLAN_HEADER: [&str; 2] = ["load_bus", "replica"];

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(r)
}

fn writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(f)))
}

fn parse_err(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    parse_err(path, line, e.to_string())
}

fn write_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::io(path, std::io::Error::other(format!("{other:?}"))),
    }
}

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, path: &Path, expected: &[&str]) -> Result<()> {
    let header = rdr.headers().map_err(|e| csv_err(path, e))?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(parse_err(
            path,
            1,
            format!("expected header `{}`", expected.join(",")),
        ));
    }
    Ok(())
}

/// Read an edge list. Vertices are registered on first mention with
/// default (junction) metadata; the returned graph is not finalized.
pub fn ingest_edges(path: &Path) -> Result<MultilayerGraph> {
    ingest_edges_from(open(path)?, path)
}

pub(crate) fn ingest_edges_from<R: Read>(input: R, path: &Path) -> Result<MultilayerGraph> {
    let mut rdr = reader(input);
    check_header(&mut rdr, path, &EDGE_HEADER)?;
    let mut g = MultilayerGraph::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != EDGE_HEADER.len() {
            return Err(parse_err(
                path,
                line,
                format!("expected {} fields, found {}", EDGE_HEADER.len(), record.len()),
            ));
        }
        let layer = |i: usize| {
            record[i]
                .parse::<LayerId>()
                .map_err(|m| parse_err(path, line, m))
        };
        let (src_layer, dst_layer) = (layer(2)?, layer(3)?);
        let weight = if record[4].is_empty() {
            1.0
        } else {
            record[4]
                .parse::<f64>()
                .map_err(|_| parse_err(path, line, format!("invalid weight `{}`", &record[4])))?
        };
        let mut endpoint = |name: &str, layer: LayerId| -> Result<_> {
            if name.is_empty() {
                return Err(parse_err(path, line, "empty vertex name"));
            }
            match g.find(name) {
                Some(v) if g.layer(v) != layer => Err(parse_err(
                    path,
                    line,
                    format!(
                        "vertex `{name}` appears in layer {layer} but was first seen in {}",
                        g.layer(v)
                    ),
                )),
                Some(v) => Ok(v),
                None => g.add_vertex(layer, VertexMeta::junction(name)),
            }
        };
        let u = endpoint(&record[0], src_layer)?;
        let v = endpoint(&record[1], dst_layer)?;
        g.add_edge(u, v, weight)
            .map_err(|e| parse_err(path, line, e.to_string()))?;
    }
    Ok(g)
}

/// Attach metadata rows to vertices of `g`. Capacities given in a
/// `capacity_mw` column are converted to kW. With a trailing `layer`
/// column, rows naming vertices absent from the edge list add them as
/// isolated vertices.
pub fn ingest_vertex_meta(path: &Path, g: &mut MultilayerGraph) -> Result<()> {
    ingest_vertex_meta_from(open(path)?, path, g)
}

pub(crate) fn ingest_vertex_meta_from<R: Read>(
    input: R,
    path: &Path,
    g: &mut MultilayerGraph,
) -> Result<()> {
    let mut rdr = reader(input);
    let header = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    let with_layer = header.len() == 5 && &header[4] == "layer";
    let base = header.iter().take(4);
    let scale = if header.len() > 5 || (header.len() == 5 && !with_layer) {
        None
    } else if base.clone().eq(META_HEADER_KW) {
        Some(1.0)
    } else if base.eq(META_HEADER_MW) {
        Some(1000.0)
    } else {
        None
    };
    let Some(scale) = scale else {
        return Err(parse_err(
            path,
            1,
            format!("expected header `{}[,layer]`", META_HEADER_KW.join(",")),
        ));
    };
    let width = header.len();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != width {
            return Err(parse_err(
                path,
                line,
                format!("expected {width} fields, found {}", record.len()),
            ));
        }
        let name = &record[0];
        let kind = record[1]
            .parse::<VertexKind>()
            .map_err(|m| parse_err(path, line, m))?;
        let capacity = record[2]
            .parse::<f64>()
            .map_err(|_| parse_err(path, line, format!("invalid capacity `{}`", &record[2])))?;
        let black_start = match &record[3] {
            "true" => true,
            "false" => false,
            other => {
                return Err(parse_err(path, line, format!("invalid boolean `{other}`")));
            }
        };
        let meta = VertexMeta {
            name: name.to_string(),
            kind,
            capacity_kw: capacity * scale,
            black_start,
        };
        meta.validate()
            .map_err(|e| parse_err(path, line, e.to_string()))?;
        let layer = if with_layer {
            Some(
                record[4]
                    .parse::<LayerId>()
                    .map_err(|m| parse_err(path, line, m))?,
            )
        } else {
            None
        };
        match (g.find(name), layer) {
            (Some(v), Some(l)) if g.layer(v) != l => {
                return Err(parse_err(
                    path,
                    line,
                    format!("`{name}` is in layer {} in the edge list, not {l}", g.layer(v)),
                ));
            }
            (Some(v), _) => g.set_meta(v, meta)?,
            (None, Some(l)) => {
                g.add_vertex(l, meta)?;
            }
            (None, None) => {
                return Err(parse_err(path, line, format!("unknown vertex `{name}`")));
            }
        }
    }
    Ok(())
}

/// Write every edge in insertion order. Reading the file back registers
/// vertices in the same order, so a second round trip is byte-identical.
pub fn write_edges(g: &MultilayerGraph, path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(EDGE_HEADER).map_err(|e| write_err(path, e))?;
    for e in g.edges() {
        w.write_record([
            g.name(e.u),
            g.name(e.v),
            &g.layer(e.u).to_string(),
            &g.layer(e.v).to_string(),
            &e.weight.to_string(),
        ])
        .map_err(|e| write_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_vertex_meta(g: &MultilayerGraph, path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    let mut header = META_HEADER_KW.to_vec();
    header.push("layer");
    w.write_record(header).map_err(|e| write_err(path, e))?;
    for v in g.vertices() {
        let m = g.meta(v);
        w.write_record([
            m.name.as_str(),
            m.kind.as_str(),
            &m.capacity_kw.to_string(),
            if m.black_start { "true" } else { "false" },
            &g.layer(v).to_string(),
        ])
        .map_err(|e| write_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_plan(path: &Path) -> Result<AttachmentPlan> {
    let mut rdr = reader(open(path)?);
    check_header(&mut rdr, path, &PLAN_HEADER)?;
    let mut entries = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 2 {
            return Err(parse_err(path, line, "expected 2 fields"));
        }
        let replica = record[1]
            .parse::<u32>()
            .map_err(|_| parse_err(path, line, format!("invalid replica `{}`", &record[1])))?;
        entries.push((record[0].to_string(), replica));
    }
    AttachmentPlan::new(entries)
}

pub fn write_plan(plan: &AttachmentPlan, path: &Path) -> Result<()> {
    let mut f = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    let mut out = String::from("load_bus,replica\n");
    for (bus, k) in plan.entries() {
        out.push_str(&format!("{bus},{k}\n"));
    }
    f.write_all(out.as_bytes())
        .and_then(|_| f.flush())
        .map_err(|e| Error::io(path, e))
}
