use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use tdnet_core::stats::{DegreeStats, KdeCurve};
use tdnet_core::{CentralityTable, Error, MultilayerGraph, VertexId};

use crate::CliResult;

fn csv_writer(path: &Path) -> CliResult<csv::Writer<BufWriter<File>>> {
    let f = File::create(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(f)))
}

fn io_err(path: &Path, e: impl Into<std::io::Error>) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source: e.into(),
    }
}

fn csv_io(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| io_err(path, std::io::Error::other(e))
}

fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> CliResult<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(csv_io(path))?;
    for r in rows {
        w.write_record(r).map_err(csv_io(path))?;
    }
    w.flush().map_err(|e| io_err(path, e))?;
    Ok(())
}

/// `vertex,layer,value`, one row per table entry in vertex id order.
pub fn write_table(g: &MultilayerGraph, t: &CentralityTable, path: &Path) -> CliResult<()> {
    write_rows(
        path,
        &["vertex", "layer", "value"],
        t.values
            .iter()
            .map(|(&v, x)| [g.name(v).to_string(), g.layer(v).to_string(), x.to_string()]),
    )
}

pub fn write_kde(c: &KdeCurve, path: &Path) -> CliResult<()> {
    write_rows(
        path,
        &["x", "density"],
        c.grid
            .iter()
            .zip(&c.density)
            .map(|(x, d)| [x.to_string(), d.to_string()]),
    )
}

/// Long format `network,statistic,value`.
pub fn write_degree_stats(stats: &[(String, DegreeStats)], path: &Path) -> CliResult<()> {
    let mut rows = Vec::new();
    for (name, s) in stats {
        let mut push = |stat: String, value: String| rows.push([name.clone(), stat, value]);
        push("N".into(), s.n.to_string());
        push("L".into(), s.l.to_string());
        push("mean_degree".into(), s.mean_degree.to_string());
        push("k_max".into(), s.k_max.to_string());
        push("modal_degree".into(), s.modal_degree().to_string());
        for (k, p) in &s.histogram {
            push(format!("p_k={k}"), p.to_string());
        }
    }
    write_rows(path, &["network", "statistic", "value"], rows)
}

/// A ranked column for the console / `top_k_*.txt` tables.
pub struct Ranked<'a> {
    pub title: String,
    pub rows: &'a [(VertexId, f64)],
}

/// Columns side by side: rank, then (vertex, value) per column.
pub fn format_ranking(g: &MultilayerGraph, cols: &[Ranked]) -> String {
    let mut s = String::new();
    write!(s, "{:>4}", "rank").unwrap();
    for c in cols {
        write!(s, "  {:<24} {:>22}", c.title, "value").unwrap();
    }
    s.push('\n');
    let depth = cols.iter().map(|c| c.rows.len()).max().unwrap_or(0);
    for i in 0..depth {
        write!(s, "{:>4}", i + 1).unwrap();
        for c in cols {
            match c.rows.get(i) {
                Some(&(v, x)) => write!(s, "  {:<24} {:>22}", g.name(v), format!("{x:.6e}")).unwrap(),
                None => write!(s, "  {:<24} {:>22}", "", "").unwrap(),
            }
        }
        s.push('\n');
    }
    s
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    let mut f = File::create(path).map_err(|e| io_err(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| io_err(path, e))?;
    Ok(())
}
