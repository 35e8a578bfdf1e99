use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use thetaforge::construct::{
    build_even_construction, build_even_with_h, build_odd_construction, estimate_t,
    random_algebraic_graph_with, resolve_degree, Caps, ConstructionParams, EstimateOptions,
    DEFAULT_QUANTILE,
};
use thetaforge::explore::regularize::regularize_degrees;
use thetaforge::explore::{run_certifier, CertifierOptions, EmbedPolicy, RootPolicy};
use thetaforge::ffield::Field;
use thetaforge::graph::{
    read_edge_list, write_edge_list, BipartiteGraph, Host, PairScope, SimpleGraph,
};
use thetaforge::stats::{
    dichotomy_scan, estimate_bad_pair_expectation, estimate_moments, non_increasing_within_noise,
    DEFAULT_MOMENT_PAIRS,
};
use thetaforge::theta::{contains_theta, ThetaOptions, DEFAULT_CANDIDATE_CAP, DEFAULT_NODE_BUDGET};

#[derive(Parser)]
#[command(
    name = "thetaforge",
    version,
    about = "Theta-free graphs from random algebraic constructions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one random algebraic graph over F_q.
    Generate(GenerateArgs),
    /// Odd-ell construction: blowup of a graph with few short paths.
    BuildOdd(BuildArgs),
    /// Even-ell construction: union of independent samples.
    BuildEven(BuildEvenArgs),
    /// Empirical bad-pair threshold T.
    EstimateT(EstimateArgs),
    /// Exact search for a theta subgraph.
    VerifyTheta(VerifyArgs),
    /// Layered exploration certificate.
    Explore(ExploreArgs),
    /// Monte Carlo experiments.
    Stats(StatsArgs),
    /// Density ratios of both constructions over a grid of t.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Scope {
    All,
    Cross,
}

impl From<Scope> for PairScope {
    fn from(s: Scope) -> Self {
        match s {
            Scope::All => PairScope::All,
            Scope::Cross => PairScope::CrossSide,
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    ell: u32,
    #[arg(long)]
    q: u64,
    /// Polynomial degree; defaults to 2 ell^2 for ell <= 3.
    #[arg(long)]
    dpoly: Option<u32>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Edge list destination; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// JSON graph report.
    #[arg(long)]
    report: Option<PathBuf>,
    /// JSON polynomial system, enough to regenerate the graph.
    #[arg(long)]
    sidecar: Option<PathBuf>,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    ell: u32,
    #[arg(long)]
    t: u64,
    /// Vertex budget.
    #[arg(long)]
    n: u64,
    /// Bad-pair threshold, e.g. from estimate-t.
    #[arg(long = "T")]
    t_eff: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    dpoly: Option<u32>,
    #[arg(long, value_enum, default_value = "all")]
    scope: Scope,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct BuildEvenArgs {
    #[command(flatten)]
    base: BuildArgs,
    /// Number of samples in the union; derived from t and T when omitted.
    #[arg(long)]
    h: Option<u64>,
    /// Count bad pairs in the simplified union instead of the multigraph.
    #[arg(long)]
    count_in_simple: bool,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    ell: u32,
    #[arg(long)]
    q: u64,
    #[arg(long)]
    dpoly: Option<u32>,
    #[arg(long, default_value_t = 30)]
    seeds: usize,
    #[arg(long, default_value_t = 0)]
    first_seed: u64,
    #[arg(long, default_value_t = DEFAULT_QUANTILE)]
    quantile: f64,
    /// Leave out pairs with more than q/2 paths.
    #[arg(long)]
    exclude_large: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    ell: usize,
    #[arg(long)]
    t: usize,
    /// Edge list; without a sides header it is read as a plain graph.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_CANDIDATE_CAP)]
    candidate_cap: usize,
    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
    node_budget: u64,
    /// Keep scanning after the first witness.
    #[arg(long)]
    all_pairs: bool,
}

#[derive(Args)]
struct ExploreArgs {
    #[arg(long)]
    ell: usize,
    #[arg(long)]
    t: usize,
    #[arg(long)]
    input: PathBuf,
    /// `auto` for a vertex of maximum degree, or a vertex id.
    #[arg(long, default_value = "auto")]
    root: String,
    /// Minimum degree to assume; defaults to the minimum degree of the root's
    /// component.
    #[arg(long)]
    d: Option<u64>,
    #[arg(long)]
    no_embed: bool,
    /// Regularize degrees first with this density constant.
    #[arg(long)]
    regularize: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Experiment {
    Badpairs,
    Dichotomy,
    Moments,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long, value_enum)]
    experiment: Experiment,
    /// `ELL:Q1,Q2,...`; repeatable.
    #[arg(long, required = true)]
    grid: Vec<String>,
    /// Union sizes to scan.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    h: Vec<usize>,
    #[arg(long, default_value_t = 30)]
    seeds: usize,
    #[arg(long, default_value_t = 0)]
    first_seed: u64,
    /// Bad-pair threshold; estimated per grid point when omitted.
    #[arg(long = "T")]
    t_eff: Option<u64>,
    /// Upper end of the small branch in the dichotomy scan.
    #[arg(long, default_value_t = 3)]
    t_probe: u128,
    /// Sampled pairs per seed for moments.
    #[arg(long, default_value_t = DEFAULT_MOMENT_PAIRS)]
    pairs: usize,
    #[arg(long)]
    dpoly: Option<u32>,
    /// CSV rows for plotting.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    ell: u32,
    #[arg(long, value_delimiter = ',', required = true)]
    t: Vec<u64>,
    #[arg(long)]
    n: u64,
    #[arg(long = "T")]
    t_eff: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    dpoly: Option<u32>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn emit_json(value: &impl serde::Serialize, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = create(p)?;
            serde_json::to_writer_pretty(&mut w, value)?;
            writeln!(w)?;
            w.flush()?;
        }
        None => println!("{}", serde_json::to_string_pretty(value)?),
    }
    Ok(())
}

fn emit_graph(g: &BipartiteGraph, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = create(p)?;
            write_edge_list(g, &mut w)?;
            w.flush()?;
        }
        None => write_edge_list(g, std::io::stdout().lock())?,
    }
    Ok(())
}

/// Graph written to the edge list while the report goes to `--report`, or
/// to stdout when no edge list file is given.
fn emit_build(
    g: &BipartiteGraph,
    report: &impl serde::Serialize,
    output: Option<&Path>,
    report_path: Option<&Path>,
) -> Result<()> {
    emit_graph(g, output)?;
    match (report_path, output) {
        (Some(p), _) => emit_json(report, Some(p)),
        (None, Some(_)) => emit_json(report, None),
        (None, None) => Ok(()),
    }
}

enum Loaded {
    Bipartite(BipartiteGraph),
    Simple(SimpleGraph),
}

fn load(path: &Path) -> Result<Loaded> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let parsed = read_edge_list(BufReader::new(file))
        .with_context(|| format!("parsing {}", path.display()))?;
    Ok(if parsed.header.sides.is_some() {
        Loaded::Bipartite(parsed.into_bipartite()?)
    } else {
        Loaded::Simple(parsed.into_simple()?)
    })
}

fn generate(a: GenerateArgs) -> Result<()> {
    let field = Field::new(a.q)?;
    let d = resolve_degree(a.ell, a.dpoly)?;
    let (g, system) = random_algebraic_graph_with(a.ell, &field, d, a.seed, 0, Caps::default())?;
    emit_graph(&g, a.output.as_deref())?;
    if let Some(p) = &a.report {
        emit_json(&g.report(), Some(p))?;
    }
    if let Some(p) = &a.sidecar {
        emit_json(&system.to_sidecar(), Some(p))?;
    }
    Ok(())
}

fn params(a: &BuildArgs) -> ConstructionParams {
    let mut p = ConstructionParams::new(a.ell, a.t, a.n, a.t_eff, a.seed);
    p.d_poly = a.dpoly;
    p.scope = a.scope.into();
    p
}

fn build_odd(a: BuildArgs) -> Result<()> {
    let (g, report) = build_odd_construction(&params(&a))?;
    emit_build(&g, &report, a.output.as_deref(), a.report.as_deref())
}

fn build_even(a: BuildEvenArgs) -> Result<()> {
    let mut p = params(&a.base);
    p.count_in_simple = a.count_in_simple;
    let (g, report) = match a.h {
        Some(h) => build_even_with_h(&p, h)?,
        None => build_even_construction(&p)?,
    };
    emit_build(
        &g,
        &report,
        a.base.output.as_deref(),
        a.base.report.as_deref(),
    )
}

fn estimate(a: EstimateArgs) -> Result<()> {
    let opts = EstimateOptions {
        quantile: a.quantile,
        first_seed: a.first_seed,
        exclude_large: a.exclude_large,
    };
    let est = estimate_t(a.ell, a.q, a.dpoly, a.seeds, opts)?;
    emit_json(&est, a.output.as_deref())
}

fn verify(a: VerifyArgs) -> Result<()> {
    let opts = ThetaOptions {
        candidate_cap: a.candidate_cap,
        node_budget: a.node_budget,
        stop_at_witness: !a.all_pairs,
        full_histogram: true,
    };
    let cert = match load(&a.input)? {
        Loaded::Bipartite(g) => contains_theta(&g, a.ell, a.t, &opts)?,
        Loaded::Simple(g) => contains_theta(&g, a.ell, a.t, &opts)?,
    };
    eprintln!("verdict: {:?} (exact: {})", cert.verdict, cert.exact);
    emit_json(&cert, a.output.as_deref())
}

fn explore(a: ExploreArgs) -> Result<()> {
    let root = match a.root.as_str() {
        "auto" => RootPolicy::MaxDegree,
        id => RootPolicy::Vertex(id.parse().with_context(|| format!("bad root {id:?}"))?),
    };
    let opts = CertifierOptions {
        root,
        d: a.d,
        embed: EmbedPolicy {
            enabled: !a.no_embed,
            ..EmbedPolicy::default()
        },
    };
    let loaded = load(&a.input)?;
    if let Some(c) = a.regularize {
        let reg = match &loaded {
            Loaded::Bipartite(g) => regularize_degrees(g, a.ell, c, None),
            Loaded::Simple(g) => regularize_degrees(g, a.ell, c, None),
        };
        if let Some(f) = &reg.report.failure {
            bail!("regularization failed: {f}");
        }
        let cert = run_certifier(&reg.graph, a.ell, a.t, &opts)?;
        eprintln!("verdict: {:?}", cert.comparison.verdict);
        return emit_json(
            &json!({ "regularization": reg.report, "original_ids": reg.original_ids, "certificate": cert }),
            a.output.as_deref(),
        );
    }
    let cert = match &loaded {
        Loaded::Bipartite(g) => run_certifier(g, a.ell, a.t, &opts)?,
        Loaded::Simple(g) => run_certifier(g, a.ell, a.t, &opts)?,
    };
    eprintln!("verdict: {:?}", cert.comparison.verdict);
    emit_json(&cert, a.output.as_deref())
}

fn parse_grid(entries: &[String]) -> Result<Vec<(u32, Vec<u64>)>> {
    entries
        .iter()
        .map(|e| {
            let (ell, qs) = e
                .split_once(':')
                .with_context(|| format!("grid entry {e:?} is not ELL:Q1,Q2,..."))?;
            let ell: u32 = ell
                .trim()
                .parse()
                .with_context(|| format!("bad ell in {e:?}"))?;
            let qs = qs
                .split(',')
                .map(|q| {
                    q.trim()
                        .parse::<u64>()
                        .with_context(|| format!("bad q in {e:?}"))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((ell, qs))
        })
        .collect()
}

fn write_csv<I, R>(path: &Path, rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: serde::Serialize,
{
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn stats(a: StatsArgs) -> Result<()> {
    let grid = parse_grid(&a.grid)?;
    let seeds: Vec<u64> = (a.first_seed..a.first_seed + a.seeds as u64).collect();
    match a.experiment {
        Experiment::Badpairs => {
            let mut results = Vec::new();
            for (ell, qs) in &grid {
                for &h in &a.h {
                    let mut trend = Vec::new();
                    for &q in qs {
                        let t_eff = match a.t_eff {
                            Some(t) => t,
                            None => {
                                let opts = EstimateOptions {
                                    first_seed: a.first_seed,
                                    ..EstimateOptions::default()
                                };
                                let est = estimate_t(*ell, q, a.dpoly, a.seeds, opts)?;
                                u64::try_from(est.t_eff).unwrap_or(u64::MAX).max(1)
                            }
                        };
                        let r = estimate_bad_pair_expectation(
                            *ell,
                            q,
                            h,
                            t_eff,
                            a.seeds,
                            a.first_seed,
                            a.dpoly,
                        )?;
                        eprintln!(
                            "ell={ell} q={q} h={h} T={t_eff}: mean {:.3} +- {:.3}",
                            r.mean, r.stderr
                        );
                        trend.push((r.mean, r.stderr));
                        results.push(r);
                    }
                    eprintln!(
                        "ell={ell} h={h}: non-increasing in q within noise: {}",
                        non_increasing_within_noise(&trend)
                    );
                }
            }
            if let Some(p) = &a.csv {
                write_csv(p, results.iter().flat_map(|r| r.rows.iter()))?;
            }
            emit_json(&results, a.output.as_deref())
        }
        Experiment::Dichotomy => {
            let mut scans = Vec::new();
            for (ell, qs) in &grid {
                for &q in qs {
                    let s = dichotomy_scan(*ell, q, &seeds, a.t_probe, a.dpoly)?;
                    for b in &s.bands {
                        eprintln!(
                            "ell={ell} q={q} type {}: middle fraction {:.5} ({} of {})",
                            b.path_type, b.middle_fraction, b.middle, b.pairs
                        );
                    }
                    scans.push(s);
                }
            }
            if let Some(p) = &a.csv {
                let rows = scans.iter().flat_map(|s| {
                    s.bands.iter().flat_map(move |b| {
                        b.histogram.iter().map(move |(&count, &pairs)| {
                            (s.ell, s.q, b.path_type.len(), count.to_string(), pairs)
                        })
                    })
                });
                let mut w = csv::Writer::from_path(p)?;
                w.write_record(["ell", "q", "r", "count", "pairs"])?;
                for row in rows {
                    w.serialize(row)?;
                }
                w.flush()?;
            }
            emit_json(&scans, a.output.as_deref())
        }
        Experiment::Moments => {
            let mut reports = Vec::new();
            for (ell, qs) in &grid {
                for &h in &a.h {
                    for &q in qs {
                        let r = estimate_moments(*ell, q, h, &seeds, a.pairs, a.dpoly)?;
                        for e in &r.estimates {
                            eprintln!(
                                "ell={ell} q={q} h={h} type {}: E|S|^{} = {:.3} +- {:.3} (bound {}, within: {})",
                                e.path_type, e.power, e.mean, e.stderr, e.bound, e.within_bound
                            );
                        }
                        reports.push(r);
                    }
                }
            }
            if let Some(p) = &a.csv {
                let mut w = csv::Writer::from_path(p)?;
                w.write_record([
                    "ell",
                    "q",
                    "h",
                    "type",
                    "power",
                    "mean",
                    "stderr",
                    "bound",
                    "within_bound",
                    "samples",
                ])?;
                for r in &reports {
                    for e in &r.estimates {
                        w.serialize((
                            r.ell,
                            r.q,
                            r.h,
                            e.path_type.to_string(),
                            e.power,
                            e.mean,
                            e.stderr,
                            e.bound,
                            e.within_bound,
                            e.samples,
                        ))?;
                    }
                }
                w.flush()?;
            }
            emit_json(&reports, a.output.as_deref())
        }
    }
}

#[derive(serde::Serialize)]
struct BenchRow {
    ell: u32,
    t: u64,
    t_eff: u64,
    construction: &'static str,
    vertices: usize,
    edges: usize,
    /// `edges / (t^(1-1/ell) n^(1+1/ell))`
    ratio_upper: f64,
    /// `edges / (t^(1/ell) n^(1+1/ell))`
    ratio_lower: f64,
    error: Option<String>,
}

fn bench(a: BenchArgs) -> Result<()> {
    let ell = a.ell;
    let mut rows = Vec::new();
    for &t in &a.t {
        let mut p = ConstructionParams::new(ell, t, a.n, a.t_eff, a.seed);
        p.d_poly = a.dpoly;
        let (construction, built) = if ell % 2 == 1 {
            ("odd", build_odd_construction(&p).map(|(g, _)| g))
        } else {
            ("even", build_even_construction(&p).map(|(g, _)| g))
        };
        let row = match built {
            Ok(g) => {
                let (v, e) = (g.vertex_count(), g.edge_count());
                let base = (v as f64).powf(1.0 + 1.0 / ell as f64);
                BenchRow {
                    ell,
                    t,
                    t_eff: a.t_eff,
                    construction,
                    vertices: v,
                    edges: e,
                    ratio_upper: e as f64 / ((t as f64).powf(1.0 - 1.0 / ell as f64) * base),
                    ratio_lower: e as f64 / ((t as f64).powf(1.0 / ell as f64) * base),
                    error: None,
                }
            }
            Err(err) => BenchRow {
                ell,
                t,
                t_eff: a.t_eff,
                construction,
                vertices: 0,
                edges: 0,
                ratio_upper: 0.0,
                ratio_lower: 0.0,
                error: Some(err.to_string()),
            },
        };
        eprintln!(
            "t={t}: {} vertices, {} edges, ratio vs t^(1-1/l): {:.4}, vs t^(1/l): {:.4}",
            row.vertices, row.edges, row.ratio_upper, row.ratio_lower
        );
        rows.push(row);
    }
    if let Some(p) = &a.csv {
        write_csv(p, &rows)?;
    }
    emit_json(&rows, a.output.as_deref())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Generate(a) => generate(a),
        Command::BuildOdd(a) => build_odd(a),
        Command::BuildEven(a) => build_even(a),
        Command::EstimateT(a) => estimate(a),
        Command::VerifyTheta(a) => verify(a),
        Command::Explore(a) => explore(a),
        Command::Stats(a) => stats(a),
        Command::Bench(a) => bench(a),
    }
}
