//! Shard-per-source execution.
//!
//! A scenario is split into one task per source vertex. Workers pull tasks
//! from a shared counter and write one CSV shard each; nothing is exchanged
//! between tasks. Merging reads the shards back in ascending source order,
//! which reproduces the in-process fold exactly.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use crate::centrality::{
    closeness_partial, normalize_max, source_dependencies, CentralityTable, ClosenessPartial,
    Metric, VertexSet,
};
use crate::error::{Error, Result};
use crate::graph::{MultilayerGraph, VertexId};
use crate::scenarios::ScenarioSpec;

const HEADER: &str = "vertex,value";
const UNREACHABLE_TAG: &str = "# unreachable=";

#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub source: VertexId,
    /// Source weight; 1.0 for unweighted metrics.
    pub weight: f64,
    pub shard: String,
}

/// Every task of one scenario, in ascending source order.
#[derive(Debug, Clone)]
pub struct TaskPlan {
    pub name: String,
    pub metric: Metric,
    pub tasks: Vec<Task>,
    pub targets: VertexSet,
    pub normalize: bool,
    sources_desc: String,
    targets_desc: String,
}

impl TaskPlan {
    pub fn shard_path(&self, dir: &Path, task: usize) -> PathBuf {
        dir.join(&self.tasks[task].shard)
    }
}

/// Replace every character outside `[A-Za-z0-9._-]` with `_`.
pub fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

pub fn shard_name(metric: Metric, vertex_name: &str) -> String {
    format!("{}_{}.csv", metric.as_str(), sanitize(vertex_name))
}

pub fn plan_tasks(spec: &ScenarioSpec, g: &MultilayerGraph) -> Result<TaskPlan> {
    let r = spec.resolve(g)?;
    let mut seen: HashMap<String, VertexId> = HashMap::new();
    let mut tasks = Vec::with_capacity(r.sources.len());
    for &(source, weight) in r.sources.entries() {
        let shard = shard_name(r.metric, g.name(source));
        if let Some(prev) = seen.insert(shard.clone(), source) {
            return Err(Error::Scenario(format!(
                "vertices `{}` and `{}` map to the same shard file {shard}",
                g.name(prev),
                g.name(source)
            )));
        }
        tasks.push(Task {
            source,
            weight,
            shard,
        });
    }
    Ok(TaskPlan {
        name: spec.name.clone(),
        metric: r.metric,
        tasks,
        targets: r.targets,
        normalize: r.normalize,
        sources_desc: spec.sources.to_string(),
        targets_desc: spec.targets.to_string(),
    })
}

fn format_value(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_atomic(path: &Path, body: &str) -> Result<()> {
    let tmp = path.with_extension("csv.tmp");
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(body.as_bytes()).map_err(|e| Error::io(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn push_row(body: &mut String, name: &str, value: &str) {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record([name, value]).expect("in-memory write");
    body.push_str(std::str::from_utf8(&w.into_inner().expect("in-memory flush")).expect("utf-8"));
}

/// Execute one task and write its shard. Returns the number of rows.
pub fn run_task(plan: &TaskPlan, g: &MultilayerGraph, task: usize, dir: &Path) -> Result<usize> {
    let t = &plan.tasks[task];
    let mut body = String::new();
    let rows = match plan.metric {
        Metric::CrossCloseness => {
            let p = closeness_partial(g, t.source, &plan.targets)?;
            writeln!(body, "{UNREACHABLE_TAG}{}", p.unreachable).unwrap();
            body.push_str(HEADER);
            body.push('\n');
            push_row(&mut body, g.name(t.source), &p.reachable_sum.to_string());
            1
        }
        Metric::CrossBetweenness | Metric::WeightedCrossBetweenness => {
            let deps = source_dependencies(g, t.source, &plan.targets, t.weight)?;
            body.push_str(HEADER);
            body.push('\n');
            for &(v, x) in &deps {
                push_row(&mut body, g.name(v), &format_value(x));
            }
            deps.len()
        }
    };
    write_atomic(&plan.shard_path(dir, task), &body)?;
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct TaskOutcome {
    pub task: usize,
    pub source: VertexId,
    pub seconds: f64,
    pub rows: usize,
    pub attempts: u32,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub scenario: String,
    pub workers: usize,
    pub wall_seconds: f64,
    /// One entry per executed task, ordered by task index.
    pub outcomes: Vec<TaskOutcome>,
}

impl RunReport {
    pub fn failed(&self) -> impl Iterator<Item = &TaskOutcome> {
        self.outcomes.iter().filter(|o| o.error.is_some())
    }

    pub fn summary(&self) -> String {
        let busy: f64 = self.outcomes.iter().map(|o| o.seconds).sum();
        let rows: usize = self.outcomes.iter().map(|o| o.rows).sum();
        let failed = self.failed().count();
        let mut s = format!(
            "{}: {} tasks on {} workers, {} rows, {:.3} s wall, {:.3} s task time, {} failed\n",
            self.scenario,
            self.outcomes.len(),
            self.workers,
            rows,
            self.wall_seconds,
            busy,
            failed
        );
        for o in self.failed() {
            writeln!(s, "  task {} (source {}): {}", o.task, o.source, o.error.as_deref().unwrap_or("")).unwrap();
        }
        s
    }

    /// Machine-readable `task,source,seconds,rows`.
    pub fn write_csv(&self, g: &MultilayerGraph, path: &Path) -> Result<()> {
        let mut body = String::from("task,source,seconds,rows\n");
        for o in &self.outcomes {
            let mut line = String::new();
            push_row(&mut line, &o.task.to_string(), g.name(o.source));
            let line = line.trim_end();
            writeln!(body, "{line},{:.6},{}", o.seconds, o.rows).unwrap();
        }
        write_atomic(path, &body)
    }
}

/// Run every task of `plan` on `workers` threads.
pub fn run_pool(plan: &TaskPlan, g: &MultilayerGraph, workers: usize, dir: &Path) -> Result<RunReport> {
    let all: Vec<usize> = (0..plan.tasks.len()).collect();
    run_subset(plan, g, &all, workers, dir)
}

/// Run the given task indices. A task whose shard cannot be written is
/// retried once; a second failure is recorded in the report and the
/// remaining tasks still run.
pub fn run_subset(
    plan: &TaskPlan,
    g: &MultilayerGraph,
    tasks: &[usize],
    workers: usize,
    dir: &Path,
) -> Result<RunReport> {
    if workers == 0 {
        return Err(Error::InvalidArgument("workers must be at least 1".into()));
    }
    if let Some(&t) = tasks.iter().find(|&&t| t >= plan.tasks.len()) {
        return Err(Error::InvalidArgument(format!("task index {t} out of range")));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let start = Instant::now();
    let next = AtomicUsize::new(0);
    let done = Mutex::new(Vec::with_capacity(tasks.len()));
    std::thread::scope(|scope| {
        for _ in 0..workers.min(tasks.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&task) = tasks.get(i) else { break };
                let t0 = Instant::now();
                let mut attempts = 1;
                let mut res = run_task(plan, g, task, dir);
                if matches!(res, Err(Error::Io { .. })) {
                    attempts += 1;
                    res = run_task(plan, g, task, dir);
                }
                let outcome = TaskOutcome {
                    task,
                    source: plan.tasks[task].source,
                    seconds: t0.elapsed().as_secs_f64(),
                    rows: *res.as_ref().unwrap_or(&0),
                    attempts,
                    error: res.err().map(|e| e.to_string()),
                };
                done.lock().unwrap().push(outcome);
            });
        }
    });
    let mut outcomes = done.into_inner().unwrap();
    outcomes.sort_by_key(|o| o.task);
    Ok(RunReport {
        scenario: plan.name.clone(),
        workers,
        wall_seconds: start.elapsed().as_secs_f64(),
        outcomes,
    })
}

/// Parsed shard contents.
#[derive(Debug, Clone, PartialEq)]
pub struct Shard {
    pub unreachable: Option<u64>,
    pub rows: Vec<(String, String)>,
}

pub fn read_shard(path: &Path) -> Result<Shard> {
    let bad = |message: String| Error::MalformedShard {
        path: path.to_path_buf(),
        message,
    };
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut first = String::new();
    reader.read_line(&mut first).map_err(|e| Error::io(path, e))?;
    let mut unreachable = None;
    let mut header = first.trim_end_matches('\n').to_string();
    if let Some(k) = header.strip_prefix(UNREACHABLE_TAG) {
        unreachable = Some(k.parse::<u64>().map_err(|e| bad(format!("unreachable count: {e}")))?);
        header.clear();
        reader.read_line(&mut header).map_err(|e| Error::io(path, e))?;
        header = header.trim_end_matches('\n').to_string();
    }
    if header != HEADER {
        return Err(bad(format!("expected header `{HEADER}`, found `{header}`")));
    }
    let mut rd = csv::ReaderBuilder::new().has_headers(false).from_reader(reader);
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.len() != 2 {
            return Err(bad(format!("expected 2 fields, found {}", rec.len())));
        }
        rows.push((rec[0].to_string(), rec[1].to_string()));
    }
    Ok(Shard { unreachable, rows })
}

/// Fold the plan's shards into one table.
///
/// Betweenness rows are summed per vertex in ascending source order over a
/// zero table covering every vertex. Closeness shards carry each source's
/// distance sum; the ratio is formed once here.
pub fn merge_shards(
    g: &MultilayerGraph,
    plan: &TaskPlan,
    dir: &Path,
    normalize: bool,
) -> Result<CentralityTable> {
    let missing: Vec<String> = plan
        .tasks
        .iter()
        .filter(|t| !dir.join(&t.shard).is_file())
        .map(|t| t.shard.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingShards(missing));
    }

    let values: BTreeMap<VertexId, f64> = match plan.metric {
        Metric::CrossCloseness => {
            let mut values = BTreeMap::new();
            for t in &plan.tasks {
                let path = dir.join(&t.shard);
                let shard = read_shard(&path)?;
                let bad = |message: String| Error::MalformedShard {
                    path: path.clone(),
                    message,
                };
                let unreachable = shard
                    .unreachable
                    .ok_or_else(|| bad("missing unreachable count".into()))?;
                let [(name, sum)] = &shard.rows[..] else {
                    return Err(bad(format!("expected 1 row, found {}", shard.rows.len())));
                };
                if name != g.name(t.source) {
                    return Err(bad(format!("row names `{name}`, expected `{}`", g.name(t.source))));
                }
                let reachable_sum = sum.parse::<u64>().map_err(|e| bad(format!("`{sum}`: {e}")))?;
                let p = ClosenessPartial {
                    reachable_sum,
                    unreachable,
                };
                values.insert(t.source, p.value(plan.tasks.len(), plan.targets.len()));
            }
            values
        }
        Metric::CrossBetweenness | Metric::WeightedCrossBetweenness => {
            let mut acc = vec![0.0f64; g.vertex_count()];
            let mut seen = vec![usize::MAX; g.vertex_count()];
            for (i, t) in plan.tasks.iter().enumerate() {
                let path = dir.join(&t.shard);
                let shard = read_shard(&path)?;
                let bad = |message: String| Error::MalformedShard {
                    path: path.clone(),
                    message,
                };
                if shard.unreachable.is_some() {
                    return Err(bad("closeness shard in a betweenness plan".into()));
                }
                for (name, value) in &shard.rows {
                    let v = g
                        .find(name)
                        .ok_or_else(|| bad(format!("unknown vertex `{name}`")))?;
                    if seen[v.index()] == i {
                        return Err(bad(format!("vertex `{name}` listed twice")));
                    }
                    seen[v.index()] = i;
                    let x = value
                        .parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| bad(format!("bad value `{value}` for `{name}`")))?;
                    acc[v.index()] += x;
                }
            }
            acc.into_iter()
                .enumerate()
                .map(|(i, x)| (VertexId(i as u32), x))
                .collect()
        }
    };
    let table = CentralityTable {
        metric: plan.metric,
        values,
        normalized: false,
        sources: plan.sources_desc.clone(),
        targets: plan.targets_desc.clone(),
    };
    if normalize {
        normalize_max(&table)
    } else {
        Ok(table)
    }
}
