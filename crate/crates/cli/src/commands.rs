use std::fs;
use std::path::Path;

use tdnet_core::centrality::{normalize_max, rank_top_k};
use tdnet_core::model::{
    attach_feeders, derive_seed, designate_load_buses, ingest_edges, ingest_vertex_meta,
    mark_black_start, read_plan, synthesize_feeder, synthesize_transmission, write_edges,
    write_plan, write_vertex_meta, SeedStream, REFERENCE_BLACK_START_ORDINALS,
};
use tdnet_core::runner::{merge_shards, plan_tasks, run_pool};
use tdnet_core::scenarios::{self, ScenarioSpec, CASE2_SCENARIO1, CASE2_SCENARIO2};
use tdnet_core::stats::{compare_distributions, degree_stats, kde, layer_degree_stats};
use tdnet_core::{
    AttachmentPlan, CentralityTable, Error, LayerId, MultilayerGraph, VertexId,
    VertexKind,
};

use crate::output::{self, Ranked};
use crate::{
    BuildArgs, Case2Args, CaseArgs, CliError, CliResult, ExecArgs, GraphArgs, MergeArgs, RunArgs,
    ScenarioArgs, StatsArgs, Triple,
};

const DEFAULT_REPLICAS: usize = 21;

fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| {
        CliError::Core(Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })
    })
}

fn load_graph(args: &GraphArgs) -> CliResult<MultilayerGraph> {
    let mut g = ingest_edges(&args.edges)?;
    if let Some(v) = &args.vertices {
        ingest_vertex_meta(v, &mut g)?;
    }
    g.finalize();
    Ok(g)
}

fn build_transmission(a: &BuildArgs) -> CliResult<MultilayerGraph> {
    if let Some(Triple(n, l, gens)) = a.synth_t {
        let seed = a.seed.expect("seed checked");
        let mut t = synthesize_transmission(n, l, gens, derive_seed(seed, SeedStream::Transmission, 0))?;
        if a.black_start.is_none() {
            let names: Vec<String> = REFERENCE_BLACK_START_ORDINALS
                .iter()
                .filter(|&&j| j <= gens)
                .map(|j| format!("G{j}"))
                .collect();
            mark_black_start(&mut t, names.iter().map(String::as_str))?;
        }
        return Ok(t);
    }
    let path = a.edges.as_ref().expect("clap requires a transmission source");
    let mut t = ingest_edges(path)?;
    if let Some(v) = &a.vertices {
        ingest_vertex_meta(v, &mut t)?;
    }
    Ok(t)
}

pub fn build(a: &BuildArgs) -> CliResult<()> {
    let synth = a.synth_t.is_some() || a.synth_feeder.is_some();
    if synth && a.seed.is_none() {
        return Err(CliError::Usage("--seed is required with --synth-t or --synth-feeder".into()));
    }
    let has_feeder = a.synth_feeder.is_some() || a.feeder_edges.is_some();
    if !has_feeder && (a.replicas.is_some() || a.plan.is_some()) {
        return Err(CliError::Usage("--replicas and --plan need a feeder source".into()));
    }
    if a.replicas == Some(0) {
        return Err(CliError::Usage("--replicas must be at least 1".into()));
    }

    let mut t = build_transmission(a)?;
    if let Some(names) = &a.black_start {
        mark_black_start(&mut t, names.iter().map(String::as_str))?;
    }

    let mut plan = None;
    let g = if has_feeder {
        let feeder = match (a.synth_feeder, &a.feeder_edges) {
            (Some(Triple(n, gfm, gfl)), _) => {
                let seed = a.seed.expect("seed checked");
                synthesize_feeder(n, gfm, gfl, derive_seed(seed, SeedStream::Feeder, 0))?
            }
            (None, Some(path)) => {
                let mut f = ingest_edges(path)?;
                if let Some(v) = &a.feeder_vertices {
                    ingest_vertex_meta(v, &mut f)?;
                }
                f
            }
            (None, None) => unreachable!(),
        };
        let p = match &a.plan {
            Some(path) => {
                let p = read_plan(path)?;
                if a.replicas.is_some_and(|k| k != p.len()) {
                    return Err(CliError::Usage(format!(
                        "--replicas {} disagrees with the {} plan entries",
                        a.replicas.unwrap(),
                        p.len()
                    )));
                }
                p
            }
            None => AttachmentPlan::reference(a.replicas.unwrap_or(DEFAULT_REPLICAS))?,
        };
        if let (Some(_), Some(seed)) = (a.synth_t, a.seed) {
            designate_load_buses(&mut t, p.load_buses(), derive_seed(seed, SeedStream::LoadBuses, 0))?;
        }
        let feeders = vec![feeder; p.len()];
        let g = attach_feeders(&t, &feeders, &p)?;
        plan = Some(p);
        g
    } else {
        t.finalize();
        t
    };

    create_dir(&a.out)?;
    write_edges(&g, &a.out.join("edges.csv"))?;
    write_vertex_meta(&g, &a.out.join("vertices.csv"))?;
    if let Some(p) = &plan {
        write_plan(p, &a.out.join("plan.csv"))?;
    }
    print!("{}", summary(&g));
    Ok(())
}

fn summary(g: &MultilayerGraph) -> String {
    let count = |f: &dyn Fn(VertexId) -> bool| g.vertices().filter(|&v| f(v)).count();
    let kind = |k: VertexKind| count(&|v| g.meta(v).kind == k);
    let n_t = count(&|v| g.layer(v).is_transmission());
    let inter = g.edges().iter().filter(|e| g.is_interlayer(e)).count();
    let gfm = kind(VertexKind::GfmInverter);
    let gfl = kind(VertexKind::GflInverter);
    format!(
        "N = {}\nL = {}\nT vertices = {}\nD vertices = {} in {} replicas\ninterlayer edges = {}\n\
         generators = {} ({} black start)\nIBRs = {} ({} GFM, {} GFL)\n",
        g.vertex_count(),
        g.edge_count(),
        n_t,
        g.vertex_count() - n_t,
        g.replica_count(),
        inter,
        kind(VertexKind::SynchronousGenerator),
        count(&|v| g.meta(v).kind == VertexKind::SynchronousGenerator && g.meta(v).black_start),
        gfm + gfl,
        gfm,
        gfl
    )
}

pub fn stats(a: &StatsArgs) -> CliResult<()> {
    let g = load_graph(&a.graph)?;
    let mut all = vec![("integrated".to_string(), degree_stats(&g)?)];
    if g.vertices().any(|v| g.layer(v).is_transmission()) {
        all.push(("T".into(), layer_degree_stats(&g, LayerId::is_transmission)?));
    }
    if g.replica_count() > 0 {
        all.push(("D".into(), layer_degree_stats(&g, LayerId::is_distribution)?));
        let d0 = LayerId::distribution(0);
        if g.vertices().any(|v| g.layer(v) == d0) {
            all.push(("D0".into(), layer_degree_stats(&g, |l| l == d0)?));
        }
    }
    create_dir(&a.out)?;
    output::write_degree_stats(&all, &a.out.join("degree_stats.csv"))?;
    println!("{:<12} {:>8} {:>8} {:>12} {:>6} {:>6} {:>8}", "network", "N", "L", "<k>", "k_max", "mode", "P(mode)");
    for (name, s) in &all {
        let m = s.modal_degree();
        println!(
            "{:<12} {:>8} {:>8} {:>12.4} {:>6} {:>6} {:>8.4}",
            name, s.n, s.l, s.mean_degree, s.k_max, m, s.fraction(m)
        );
    }
    Ok(())
}

fn thread_pool(workers: u64) -> CliResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers as usize)
        .build()
        .map_err(|e| CliError::Failed(format!("thread pool: {e}")))
}

/// Run a scenario in-process or, with a shard directory, through the pool.
fn execute(spec: &ScenarioSpec, g: &MultilayerGraph, exec: &ExecArgs) -> CliResult<CentralityTable> {
    match &exec.shard_dir {
        None => Ok(thread_pool(exec.workers)?.install(|| scenarios::run_spec(spec, g))?),
        Some(root) => {
            let dir = root.join(&spec.name);
            let plan = plan_tasks(spec, g)?;
            let report = run_pool(&plan, g, exec.workers as usize, &dir)?;
            eprint!("{}", report.summary());
            report.write_csv(g, &dir.join("run_report.csv"))?;
            if report.failed().next().is_some() {
                return Err(CliError::Failed(format!("{}: some tasks failed", spec.name)));
            }
            Ok(merge_shards(g, &plan, &dir, spec.normalize)?)
        }
    }
}

fn top(spec: &ScenarioSpec, g: &MultilayerGraph, t: &CentralityTable, k: usize) -> Vec<(VertexId, f64)> {
    let keep = |v: VertexId| spec.reports(g, v);
    rank_top_k(t, k, Some(&keep))
}

pub fn case1(a: &CaseArgs) -> CliResult<()> {
    let g = load_graph(&a.graph)?;
    create_dir(&a.out)?;
    let mut ranked = Vec::new();
    for spec in scenarios::case1_specs() {
        let mut t = execute(&spec, &g, &a.exec)?;
        if a.normalize && !t.normalized {
            t = normalize_max(&t)?;
        }
        output::write_table(&g, &t, &a.out.join(format!("{}.csv", spec.name)))?;
        let rows = top(&spec, &g, &t, a.top_k);
        let text = output::format_ranking(
            &g,
            &[Ranked {
                title: t.metric.as_str().into(),
                rows: &rows,
            }],
        );
        output::write_text(&a.out.join(format!("top_k_{}.txt", t.metric.as_str())), &text)?;
        ranked.push((t.metric.as_str().to_string(), rows));
    }
    let cols: Vec<Ranked> = ranked
        .iter()
        .map(|(title, rows)| Ranked {
            title: title.clone(),
            rows,
        })
        .collect();
    print!("{}", output::format_ranking(&g, &cols));
    Ok(())
}

fn black_start_names(g: &MultilayerGraph, given: &Option<Vec<String>>) -> Vec<String> {
    match given {
        Some(names) => names.clone(),
        None => g
            .vertices()
            .filter(|&v| g.meta(v).kind == VertexKind::SynchronousGenerator && g.meta(v).black_start)
            .map(|v| g.name(v).to_string())
            .collect(),
    }
}

pub fn case2(a: &Case2Args) -> CliResult<()> {
    let g = load_graph(&a.graph)?;
    let names = black_start_names(&g, &a.black_start);
    // Validates the black-start set before any work is done.
    scenarios::case2_setup(&g, &names, tdnet_core::model::IBR_RATING_KW)?;
    create_dir(&a.out)?;

    let mut tables = Vec::new();
    let mut curves = Vec::new();
    for (i, spec) in scenarios::case2_specs(&names, tdnet_core::model::IBR_RATING_KW)
        .into_iter()
        .enumerate()
    {
        let t = execute(&spec, &g, &a.exec)?;
        output::write_table(&g, &t, &a.out.join(format!("{}.csv", spec.name)))?;
        let reported: Vec<f64> = t
            .values
            .iter()
            .filter(|&(&v, &x)| x != 0.0 && spec.reports(&g, v))
            .map(|(_, &x)| x)
            .collect();
        let zeros = t.values.keys().filter(|&&v| spec.reports(&g, v)).count() - reported.len();
        let curve = kde(&reported, a.grid_points)?;
        output::write_kde(&curve, &a.out.join(format!("kde_scenario{}.csv", i + 1)))?;
        println!(
            "{}: max = {}, {} nonzero and {} zero transmission values, bandwidth {:.4e}",
            spec.name,
            t.max_value(),
            reported.len(),
            zeros,
            curve.bandwidth
        );
        tables.push((spec.clone(), top(&spec, &g, &t, a.top_k)));
        curves.push(curve);
    }

    let cmp = compare_distributions(&curves[0], &curves[1], a.threshold);
    println!(
        "above {}: {} {} buses (KDE mass {:.4}), {} {} buses (KDE mass {:.4})",
        cmp.threshold,
        CASE2_SCENARIO1,
        cmp.a.count_above,
        cmp.a.mass_above,
        CASE2_SCENARIO2,
        cmp.b.count_above,
        cmp.b.mass_above
    );
    let cols: Vec<Ranked> = tables
        .iter()
        .map(|(spec, rows)| Ranked {
            title: spec.name.clone(),
            rows,
        })
        .collect();
    let text = output::format_ranking(&g, &cols);
    output::write_text(&a.out.join("top_k_weighted_betweenness.txt"), &text)?;
    print!("{text}");
    Ok(())
}

fn resolve_scenario(args: &ScenarioArgs, g: &MultilayerGraph) -> CliResult<ScenarioSpec> {
    if let Some(path) = &args.config {
        let specs = crate::config::load_scenarios(path)?;
        if let Some(s) = specs.into_iter().find(|s| s.name == args.scenario) {
            return Ok(s);
        }
    }
    let names = black_start_names(g, &args.black_start);
    scenarios::builtin(&args.scenario, &names)
        .ok_or_else(|| CliError::Usage(format!("unknown scenario `{}`", args.scenario)))
}

pub fn run(a: &RunArgs) -> CliResult<()> {
    let g = load_graph(&a.graph)?;
    let spec = resolve_scenario(&a.scenario, &g)?;
    let dir = a.shard_dir.join(&spec.name);
    let plan = plan_tasks(&spec, &g)?;
    let report = run_pool(&plan, &g, a.workers as usize, &dir)?;
    report.write_csv(&g, &dir.join("run_report.csv"))?;
    print!("{}", report.summary());
    if report.failed().next().is_some() {
        return Err(CliError::Failed(format!("{}: some tasks failed", spec.name)));
    }
    Ok(())
}

pub fn merge(a: &MergeArgs) -> CliResult<()> {
    let g = load_graph(&a.graph)?;
    let spec = resolve_scenario(&a.scenario, &g)?;
    let plan = plan_tasks(&spec, &g)?;
    let table = merge_shards(&g, &plan, &a.shard_dir.join(&spec.name), spec.normalize || a.normalize)?;
    create_dir(&a.out)?;
    output::write_table(&g, &table, &a.out.join(format!("{}.csv", spec.name)))?;
    let keep = |v: VertexId| spec.reports(&g, v);
    let rows = rank_top_k(&table, 10, Some(&keep));
    print!(
        "{}",
        output::format_ranking(
            &g,
            &[Ranked {
                title: spec.name.clone(),
                rows: &rows,
            }]
        )
    );
    Ok(())
}
