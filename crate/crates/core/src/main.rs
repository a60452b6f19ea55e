use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use becurv::{
    check_with_profile, curvature_profile, diameter_under, huang_metric, intrinsic_check,
    load_graph, resistance_metric, resistance_table, rho_distance_to_set,
    scaled_combinatorial_metric, spectral_decompose, verify_gradient_bound, verify_pt1,
    verify_refined_gradient_bound, CheckOptions, CurvatureProfile, Dimension, Error, Family,
    GraphFormat, MeasureMode, MetricKind, MetricTable, Residual, ResistanceOptions, VertexSet,
    WeightedGraph, DEFAULT_TAU_CD,
};

#[derive(Parser)]
#[command(
    name = "becurv",
    version,
    about = "Bakry-Émery curvature and distance bounds on weighted graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Curvature at every vertex.
    Curvature(CurvatureArgs),
    /// Intrinsic or resistance distance tables.
    Metrics(MetricsArgs),
    /// Sampled residuals of the semigroup gradient estimates.
    Verify(VerifyArgs),
    /// Certificates for the diameter and tube-radius bounds.
    Bounds(BoundsArgs),
}

#[derive(Args)]
struct GraphArgs {
    /// Edge list (`u v [w]` per line) or JSON graph.
    #[arg(long, conflicts_with = "gen")]
    input: Option<PathBuf>,
    /// Input format; guessed from the extension when omitted.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// explicit, normalized or counting. Defaults to explicit for files, counting for generators.
    #[arg(long)]
    measure: Option<String>,
    /// Built-in family, e.g. `path:3`, `hypercube:3`, `bridge:2,3`.
    #[arg(long)]
    gen: Option<String>,
    /// Dimension parameter, a positive number or `inf`.
    #[arg(long = "N", default_value = "inf")]
    dimension: String,
    #[arg(long, default_value_t = DEFAULT_TAU_CD)]
    tau_cd: f64,
    /// Write to this file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    EdgeList,
    Json,
}

#[derive(Args)]
struct CurvatureArgs {
    #[command(flatten)]
    graph: GraphArgs,
}

#[derive(Args)]
struct MetricsArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long, default_value = "huang")]
    kind: String,
    /// Distance table for `--kind custom`.
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long)]
    check_intrinsic: bool,
    /// Restrict output to pairs `u,v` (repeatable).
    #[arg(long = "pairs")]
    pairs: Vec<String>,
    /// Duality-gap tolerance for the resistance metric.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Check {
    Lmp16,
    Sgc,
    Pt1,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long, value_enum)]
    check: Check,
    #[arg(long, default_value_t = 20)]
    samples: usize,
    /// Horizon: fixed for sgc (default 1/K), upper end of sampled times otherwise (default 1).
    #[arg(long = "T")]
    horizon: Option<f64>,
    /// Distance radius for pt1; defaults to ρ(x, W) at each sampled x.
    #[arg(long = "R")]
    radius: Option<f64>,
    /// Comma-separated target set W for pt1; defaults to V₀.
    #[arg(long)]
    target: Option<String>,
    /// Intrinsic metric used by pt1.
    #[arg(long, default_value = "huang")]
    metric: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long, default_value = "scaled-combinatorial")]
    metric: String,
    /// Distance table for `--metric custom`.
    #[arg(long)]
    table: Option<PathBuf>,
    /// Use the rounded constant in the tube case for N = inf.
    #[arg(long)]
    corollary: bool,
    /// Record a sweep over (T, R) of the finite-N tube radius.
    #[arg(long)]
    sweep: bool,
    /// Also write per-vertex slack as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// A failure together with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. } | Error::Json(_) | Error::InvalidParameter(_) => 2,
            Error::InvalidWeight { .. }
            | Error::ConflictingEdge { .. }
            | Error::SelfLoop(_)
            | Error::NonPositiveMeasure { .. }
            | Error::UnknownVertex(_)
            | Error::EmptyGraph
            | Error::EdgelessGraph
            | Error::Disconnected
            | Error::EmptySet => 3,
            Error::Hypothesis(_) | Error::Precondition(_) => 4,
            Error::NonConvergence { .. } | Error::NotPositiveDefinite(_) => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure {
        code: 2,
        message: format!("{}: {e}", path.display()),
    }
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = std::env::var("CURV_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        // a second initialisation can only fail if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build_global();
    }
    let outcome = match &cli.command {
        Command::Curvature(a) => cmd_curvature(a),
        Command::Metrics(a) => cmd_metrics(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Bounds(a) => cmd_bounds(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

struct Loaded {
    graph: WeightedGraph,
    name: String,
    dimension: Dimension,
}

fn load(args: &GraphArgs) -> Result<Loaded, Failure> {
    let dimension: Dimension = args.dimension.parse()?;
    if args.tau_cd.is_nan() || args.tau_cd <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "tau-cd must be positive, got {}",
            args.tau_cd
        ))
        .into());
    }
    let measure = args
        .measure
        .as_deref()
        .map(str::parse::<MeasureMode>)
        .transpose()?;
    match (&args.input, &args.gen) {
        (Some(path), None) => {
            let format = match args.format {
                Some(FormatArg::Json) => GraphFormat::Json,
                Some(FormatArg::EdgeList) => GraphFormat::EdgeList,
                None if path.extension().is_some_and(|e| e == "json") => GraphFormat::Json,
                None => GraphFormat::EdgeList,
            };
            let file = File::open(path).map_err(|e| io_failure(path, e))?;
            let graph = load_graph(file, format, measure.unwrap_or(MeasureMode::Explicit))?;
            Ok(Loaded {
                graph,
                name: path.display().to_string(),
                dimension,
            })
        }
        (None, Some(spec)) => {
            let family: Family = spec.parse()?;
            let graph = becurv::generate(family, measure.unwrap_or(MeasureMode::Counting))?;
            Ok(Loaded {
                graph,
                name: family.to_string(),
                dimension,
            })
        }
        _ => Err(Error::InvalidParameter("give exactly one of --input or --gen".into()).into()),
    }
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), Failure> {
    match output {
        Some(path) => std::fs::write(path, text).map_err(|e| io_failure(path, e)),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure {
                    code: 1,
                    message: e.to_string(),
                })
        }
    }
}

fn emit_json(output: Option<&Path>, doc: &Value) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(doc).expect("json serialises");
    text.push('\n');
    emit(output, &text)
}

fn cmd_curvature(args: &CurvatureArgs) -> Outcome {
    let loaded = load(&args.graph)?;
    let profile = curvature_profile(&loaded.graph, loaded.dimension, args.graph.tau_cd)?;
    let mut doc = profile.to_json(&loaded.graph);
    doc["graph"] = json!(loaded.name);
    emit_json(args.graph.output.as_deref(), &doc)?;
    Ok(true)
}

fn read_table(g: &WeightedGraph, path: Option<&Path>) -> Result<MetricTable, Failure> {
    let path = path.ok_or_else(|| Error::InvalidParameter("custom metric needs --table".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    Ok(MetricTable::from_json(g, &text)?)
}

fn parse_pair(g: &WeightedGraph, spec: &str) -> Result<(usize, usize), Failure> {
    let (u, v) = spec
        .split_once(',')
        .ok_or_else(|| Error::InvalidParameter(format!("pair must look like u,v, got {spec:?}")))?;
    Ok((g.index_of(u.trim())?, g.index_of(v.trim())?))
}

fn cmd_metrics(args: &MetricsArgs) -> Outcome {
    let loaded = load(&args.graph)?;
    let g = &loaded.graph;
    g.require_connected()?;
    let kind: MetricKind = args.kind.parse()?;
    let opts = ResistanceOptions {
        tol: args.tol,
        ..ResistanceOptions::default()
    };
    let pairs: Vec<(usize, usize)> = args
        .pairs
        .iter()
        .map(|p| parse_pair(g, p))
        .collect::<Result<_, _>>()?;

    if kind == MetricKind::Resistance && !pairs.is_empty() {
        let mut rows = Vec::new();
        for &(u, v) in &pairs {
            let est = resistance_metric(g, u, v, opts)?;
            rows.push(json!({
                "u": g.id(u), "v": g.id(v), "d": est.value, "upper": est.upper, "iterations": est.iterations,
            }));
        }
        let doc = json!({"graph": loaded.name, "kind": kind, "tol": args.tol, "pairs": rows});
        emit_json(args.graph.output.as_deref(), &doc)?;
        return Ok(true);
    }

    let mut table = match kind {
        MetricKind::Huang => huang_metric(g)?,
        MetricKind::ScaledCombinatorial => scaled_combinatorial_metric(g)?,
        MetricKind::Resistance => resistance_table(g, opts)?,
        MetricKind::Custom => read_table(g, args.table.as_deref())?,
    };
    let mut intrinsic = true;
    if args.check_intrinsic || kind != MetricKind::Custom {
        intrinsic_check(g, &mut table)?;
        intrinsic = kind == MetricKind::Resistance || table.is_intrinsic();
    }
    let mut doc = table.to_json(g);
    doc["graph"] = json!(loaded.name);
    doc["diameter"] = json!(diameter_under(g, &table)?);
    if args.check_intrinsic {
        doc["intrinsic"] = json!(table.is_intrinsic());
    }
    if !pairs.is_empty() {
        let rows: Vec<Value> = pairs
            .iter()
            .map(|&(u, v)| json!({"u": g.id(u), "v": g.id(v), "d": table.dist(u, v)}))
            .collect();
        doc["pairs"] = json!(rows);
    }
    emit_json(args.graph.output.as_deref(), &doc)?;
    Ok(!args.check_intrinsic || intrinsic)
}

fn parse_set(g: &WeightedGraph, spec: &str) -> Result<VertexSet, Failure> {
    let ids = spec
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| g.index_of(s))
        .collect::<becurv::Result<Vec<_>>>()?;
    Ok(VertexSet::from_indices(ids))
}

fn random_function(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

// t uniform on (0, horizon]
fn random_time(rng: &mut ChaCha8Rng, horizon: f64) -> f64 {
    horizon * (1.0 - rng.random::<f64>())
}

fn positive_horizon(value: f64) -> Result<f64, Failure> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter(format!("T must be positive and finite, got {value}")).into())
    }
}

fn cmd_verify(args: &VerifyArgs) -> Outcome {
    let loaded = load(&args.graph)?;
    let g = &loaded.graph;
    let profile = curvature_profile(g, loaded.dimension, args.graph.tau_cd)?;
    let sd = spectral_decompose(g)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let n = g.len();
    let mut rows: Vec<Residual> = Vec::with_capacity(args.samples);
    let mut decisions = json!({});

    match args.check {
        Check::Lmp16 => {
            let k = profile.min_value().as_f64();
            if !k.is_finite() {
                return Err(Error::EdgelessGraph.into());
            }
            let horizon = positive_horizon(args.horizon.unwrap_or(1.0))?;
            decisions["K"] = json!(k);
            decisions["t_range"] = json!([0.0, horizon]);
            for _ in 0..args.samples {
                let f = random_function(&mut rng, n);
                let t = random_time(&mut rng, horizon);
                let x = rng.random_range(0..n);
                rows.push(verify_gradient_bound(g, &sd, &profile, k, &f, t, x)?);
            }
        }
        Check::Sgc => {
            let (k, k0) = sgc_constants(&profile)?;
            let horizon = positive_horizon(args.horizon.unwrap_or(1.0 / k))?;
            decisions["K"] = json!(k);
            decisions["K0"] = json!(k0);
            decisions["T"] = json!(horizon);
            for _ in 0..args.samples {
                let f = random_function(&mut rng, n);
                let x = rng.random_range(0..n);
                rows.push(verify_refined_gradient_bound(
                    g, &sd, &profile, k, k0, &f, horizon, x,
                )?);
            }
        }
        Check::Pt1 => {
            let kind: MetricKind = args.metric.parse()?;
            let mut table = match kind {
                MetricKind::Huang => huang_metric(g)?,
                MetricKind::ScaledCombinatorial => scaled_combinatorial_metric(g)?,
                _ => {
                    return Err(Error::InvalidParameter(
                        "pt1 takes --metric huang or scaled-combinatorial".into(),
                    )
                    .into())
                }
            };
            intrinsic_check(g, &mut table)?;
            let target = match &args.target {
                Some(spec) => parse_set(g, spec)?,
                None => profile.v0.clone(),
            };
            if target.is_empty() {
                return Err(Error::Precondition(
                    "target set W is empty (V0 is empty; pass --target)".into(),
                )
                .into());
            }
            let outside: Vec<usize> = (0..n).filter(|&x| !target.contains(x)).collect();
            if outside.is_empty() {
                return Err(Error::Precondition("target set W covers every vertex".into()).into());
            }
            let k0 = profile.k_neg;
            let horizon = positive_horizon(args.horizon.unwrap_or(1.0))?;
            decisions["K0"] = json!(k0);
            decisions["W"] = json!(target.names(g));
            decisions["metric"] = json!(kind);
            decisions["t_range"] = json!([0.0, horizon]);
            for _ in 0..args.samples {
                let x = outside[rng.random_range(0..outside.len())];
                let t = random_time(&mut rng, horizon);
                let radius = match args.radius {
                    Some(r) => r,
                    None => rho_distance_to_set(g, &table, x, &target)?,
                };
                rows.push(verify_pt1(
                    g, &sd, &profile, k0, &target, x, t, radius, &table,
                )?);
            }
        }
    }

    let pass = rows.iter().all(|r| r.pass);
    let worst = rows
        .iter()
        .map(|r| r.residual + r.tolerance)
        .fold(f64::INFINITY, f64::min);
    let doc = json!({
        "graph": loaded.name,
        "check": check_name(args.check),
        "N": profile.dimension,
        "seed": args.seed,
        "samples": args.samples,
        "decisions": decisions,
        "pass": pass,
        "worst_margin": if rows.is_empty() { Value::Null } else { json!(worst) },
        "rows": rows,
    });
    emit_json(args.graph.output.as_deref(), &doc)?;
    Ok(pass)
}

fn check_name(c: Check) -> &'static str {
    match c {
        Check::Lmp16 => "lmp16",
        Check::Sgc => "sgc",
        Check::Pt1 => "pt1",
    }
}

fn sgc_constants(profile: &CurvatureProfile) -> Result<(f64, f64), Failure> {
    let k = profile
        .k_pos
        .and_then(|k| k.finite())
        .ok_or_else(|| Error::Hypothesis("no positively curved vertex to take K from".into()))?;
    Ok((k, profile.k_neg))
}

fn cmd_bounds(args: &BoundsArgs) -> Outcome {
    let loaded = load(&args.graph)?;
    let g = &loaded.graph;
    let kind: MetricKind = args.metric.parse()?;
    let custom_table = match kind {
        MetricKind::Custom => Some(read_table(g, args.table.as_deref())?),
        _ => None,
    };
    let opts = CheckOptions {
        tau_cd: args.graph.tau_cd,
        corollary: args.corollary,
        custom_table,
        sweep: args.sweep,
    };
    let profile = curvature_profile(g, loaded.dimension, opts.tau_cd)?;
    let cert = check_with_profile(g, &loaded.name, &profile, kind, &opts)?;
    if let Some(path) = &args.csv {
        std::fs::write(path, cert.slack_csv()).map_err(|e| io_failure(path, e))?;
    }
    let doc = serde_json::to_value(&cert).expect("certificate serialises");
    emit_json(args.graph.output.as_deref(), &doc)?;
    Ok(cert.pass)
}
