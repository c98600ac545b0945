//! Command-line front end.
//!
//! Subcommands: `estimate`, `simulate`, `structure`, `sample`, `bound`.
//! Each accepts a JSON config document and/or flags; flags win. Exit codes:
//! 0 success, 1 usage or validation error, 2 numerical non-convergence.
//! Environment overrides: `SYMCOV_OUT_DIR` (output directory for simulate)
//! and `SYMCOV_WORKERS` (worker count).

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use symcov::analysis::{
    evaluate_bound, run_experiment_streaming, BoundInputs, ExperimentSpec, SampleLaw, TruthMode,
};
use symcov::estimation::{
    styler_estimate, tyler_estimate, ConvergenceStatus, EstimatorConfig, Init,
};
use symcov::io::{GeneratorsJson, ReportJson, SampleSetJson, ShapeJson, StructureJson};
use symcov::matgroup::{builtin_group, close_group_dim, UnitaryMatrix};
use symcov::sampling::{
    random_invariant_shape, sample_cae, sample_elliptical, ShapeMatrix, Texture,
};
use symcov::structure::{builtin_structure, discover_structure, StructureInfo};
use symcov::{Group, GroupKind, Samples, Shape};

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_NO_CONVERGENCE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "symcov",
    about = "Group-symmetric robust covariance estimation",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run Tyler or the group-symmetric (STyler) estimator on a sample file.
    Estimate(EstimateArgs),
    /// Run a Monte Carlo experiment and write trial/summary CSVs.
    Simulate(SimulateArgs),
    /// Compute the commutant block structure of a symmetry group.
    Structure(StructureArgs),
    /// Draw synthetic samples and write them as JSON.
    Sample(SampleArgs),
    /// Evaluate the high-probability error bound for given parameters.
    Bound(BoundArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.cmd {
        Cmd::Estimate(a) => cmd_estimate(a),
        Cmd::Simulate(a) => cmd_simulate(a),
        Cmd::Structure(a) => cmd_structure(a),
        Cmd::Sample(a) => cmd_sample(a),
        Cmd::Bound(a) => cmd_bound(a),
    };
    match code {
        Ok(c) => ExitCode::from(c),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

type CliResult = Result<u8, String>;

fn read_json<D: serde::de::DeserializeOwned>(path: &Path) -> Result<D, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("cannot parse {}: {e}", path.display()))
}

fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<(), String> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| format!("serialize {}: {e}", path.display()))?;
    std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn parse_group_kind(s: &str) -> Result<GroupKind, String> {
    let norm = s.trim().to_lowercase().replace('-', "_");
    let (name, param) = match norm.split_once(':') {
        Some((a, b)) => (a.to_string(), Some(b.to_string())),
        None => (norm, None),
    };
    let need = |p: &Option<String>, what: &str| -> Result<usize, String> {
        p.as_deref()
            .ok_or(format!(
                "group kind '{name}' needs a parameter, e.g. {name}:{what}"
            ))?
            .parse::<usize>()
            .map_err(|e| format!("bad parameter for '{name}': {e}"))
    };
    match name.as_str() {
        "trivial" => Ok(GroupKind::Trivial),
        "circulant" => Ok(GroupKind::Circulant),
        "block_circulant" => Ok(GroupKind::BlockCirculant {
            d: need(&param, "2")?,
        }),
        "permutation" => Ok(GroupKind::Permutation),
        "perhermitian" => Ok(GroupKind::Perhermitian),
        "proper_quaternion" => Ok(GroupKind::ProperQuaternion),
        "equicorrelation" => Ok(GroupKind::Equicorrelation {
            k: need(&param, "3")?,
        }),
        other => Err(format!(
            "unknown group kind '{other}' (expected trivial, circulant, block_circulant:d, permutation, perhermitian, proper_quaternion, equicorrelation:k)"
        )),
    }
}

fn parse_texture(s: &str) -> Result<SampleLaw, String> {
    let norm = s.trim().to_lowercase().replace('-', "_");
    let (name, param) = match norm.split_once(':') {
        Some((a, b)) => (a.to_string(), Some(b.to_string())),
        None => (norm, None),
    };
    let needf = |p: &Option<String>| -> Result<f64, String> {
        p.as_deref()
            .ok_or_else(|| format!("texture '{name}' needs a parameter"))?
            .parse::<f64>()
            .map_err(|e| format!("bad texture parameter: {e}"))
    };
    match name.as_str() {
        "cae" => Ok(SampleLaw::Cae),
        "gaussian" => Ok(SampleLaw::Gaussian),
        "student_t" => Ok(SampleLaw::StudentT { nu: needf(&param)? }),
        "k_dist" => Ok(SampleLaw::KDist {
            shape: needf(&param)?,
        }),
        other => Err(format!(
            "unknown texture '{other}' (expected cae, gaussian, student_t:nu, k_dist:shape)"
        )),
    }
}

/// Resolves a symmetry group from either a built-in kind or a generator
/// file, together with its structure (analytic for built-ins, discovered
/// numerically for generator files).
fn resolve_group(
    group: &Option<String>,
    generators: &Option<PathBuf>,
    p: Option<usize>,
    seed: u64,
    tol: f64,
    force_discover: bool,
) -> Result<(Group, StructureInfo<f64>, String), String> {
    match (group, generators) {
        (Some(kind_str), None) => {
            let kind = parse_group_kind(kind_str)?;
            let p = p.ok_or("missing --p for built-in group")?;
            let g = builtin_group::<f64>(kind, p).map_err(|e| e.to_string())?;
            let s = if force_discover {
                discover_structure(&g, seed, tol).map_err(|e| {
                    format!("{e}; structure discovery can be retried with a different --seed")
                })?
            } else {
                builtin_structure::<f64>(kind, p).map_err(|e| e.to_string())?
            };
            Ok((g, s, kind.name()))
        }
        (None, Some(path)) => {
            let doc: GeneratorsJson = read_json(path)?;
            let gens: Vec<UnitaryMatrix<f64>> = doc
                .generators
                .iter()
                .map(|m| {
                    m.to_mat::<f64>()
                        .and_then(UnitaryMatrix::with_default_tol)
                        .map_err(|e| e.to_string())
                })
                .collect::<Result<_, _>>()?;
            let g = close_group_dim(doc.dim, &gens, symcov::matgroup::DEFAULT_MAX_ORDER)
                .map_err(|e| e.to_string())?;
            let s = discover_structure(&g, seed, tol).map_err(|e| {
                format!("{e}; structure discovery can be retried with a different --seed")
            })?;
            Ok((g, s, format!("generators({})", path.display())))
        }
        (Some(_), Some(_)) => Err("give either --group or --generators, not both".into()),
        (None, None) => Err("missing group: pass --group KIND or --generators FILE".into()),
    }
}

fn workers_from(flag: Option<usize>) -> Option<usize> {
    flag.or_else(|| {
        std::env::var("SYMCOV_WORKERS")
            .ok()
            .and_then(|v| v.parse().ok())
    })
}

// ---------------------------------------------------------------------------
// estimate

#[derive(Args)]
struct EstimateArgs {
    /// JSON config document; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in group kind (e.g. circulant, block_circulant:2).
    #[arg(long)]
    group: Option<String>,
    /// Generator matrices JSON (alternative to --group).
    #[arg(long)]
    generators: Option<PathBuf>,
    /// Ambient dimension (required with --group).
    #[arg(long)]
    p: Option<usize>,
    /// Input SampleSet JSON.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Which estimator to run: tyler or styler.
    #[arg(long)]
    estimator: Option<String>,
    /// Relative step tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Iteration budget.
    #[arg(long)]
    max_iter: Option<usize>,
    /// Report output path (default: report.json).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Emit a per-iteration CSV (iter, step_norm, objective, residual).
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Seed used when the structure must be discovered numerically.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct EstimateDoc {
    group: Option<String>,
    generators: Option<PathBuf>,
    p: Option<usize>,
    input: Option<PathBuf>,
    estimator: Option<String>,
    tol: Option<f64>,
    max_iter: Option<usize>,
    output: Option<PathBuf>,
    trace: Option<PathBuf>,
    seed: Option<u64>,
}

/// Resolved estimate configuration, echoed into the report file.
#[derive(Clone, Serialize)]
struct EstimateResolved {
    estimator: String,
    group: Option<String>,
    generators: Option<PathBuf>,
    p: usize,
    input: PathBuf,
    tol: f64,
    max_iter: usize,
    seed: u64,
}

#[derive(Serialize)]
struct EstimateOutput {
    config: EstimateResolved,
    report: ReportJson,
}

fn cmd_estimate(args: EstimateArgs) -> CliResult {
    let mut doc: EstimateDoc = match &args.config {
        Some(path) => read_json(path)?,
        None => EstimateDoc::default(),
    };
    // Flags win over the config document.
    doc.group = args.group.or(doc.group);
    doc.generators = args.generators.or(doc.generators);
    doc.p = args.p.or(doc.p);
    doc.input = args.input.or(doc.input);
    doc.estimator = args.estimator.or(doc.estimator);
    doc.tol = args.tol.or(doc.tol);
    doc.max_iter = args.max_iter.or(doc.max_iter);
    doc.output = args.output.or(doc.output);
    doc.trace = args.trace.or(doc.trace);
    doc.seed = args.seed.or(doc.seed);

    let estimator = doc.estimator.unwrap_or_else(|| "styler".into());
    let input = doc.input.ok_or("missing --input SampleSet file")?;
    if !input.exists() {
        return Err(format!("input file does not exist: {}", input.display()));
    }
    let samples_json: SampleSetJson = read_json(&input)?;
    let samples: Samples = samples_json.to_samples().map_err(|e| e.to_string())?;
    let seed = doc.seed.unwrap_or(0);

    let cfg = EstimatorConfig::<f64> {
        tol: doc.tol.unwrap_or(1e-10),
        max_iter: doc.max_iter.unwrap_or(1000),
        init: Init::Identity,
    };

    let (report, group_label, p) = match estimator.as_str() {
        "tyler" => {
            let rep = tyler_estimate(&samples, &cfg).map_err(|e| e.to_string())?;
            (rep, None, samples.dim())
        }
        "styler" => {
            let (g, s, label) = resolve_group(
                &doc.group,
                &doc.generators,
                doc.p.or(Some(samples.dim())),
                seed,
                1e-6,
                false,
            )?;
            if g.dim() != samples.dim() {
                return Err(format!(
                    "group dimension {} does not match sample dimension {}",
                    g.dim(),
                    samples.dim()
                ));
            }
            let rep = styler_estimate(&samples, &g, &s, &cfg).map_err(|e| e.to_string())?;
            (rep, Some(label), samples.dim())
        }
        other => {
            return Err(format!(
                "unknown estimator '{other}' (expected tyler or styler)"
            ))
        }
    };

    let resolved = EstimateResolved {
        estimator,
        group: group_label,
        generators: doc.generators.clone(),
        p,
        input: input.clone(),
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        seed,
    };
    let out_path = doc.output.unwrap_or_else(|| PathBuf::from("report.json"));
    let output = EstimateOutput {
        config: resolved,
        report: ReportJson::from_report(&report),
    };
    write_json(&out_path, &output)?;

    if let Some(trace_path) = &doc.trace {
        let mut csv = String::from("iter,step_norm,objective,residual\n");
        let iters = report.iterations;
        for j in 0..=iters {
            let step = if j == 0 {
                0.0
            } else {
                report.step_norms.get(j - 1).copied().unwrap_or(f64::NAN)
            };
            let objective = report
                .objective_values
                .get(j)
                .copied()
                .map(|v| format!("{v}"))
                .unwrap_or_default();
            let residual = if j < iters {
                report.step_norms.get(j).copied().unwrap_or(f64::NAN)
            } else {
                report.fixed_point_residual
            };
            csv.push_str(&format!("{j},{step},{objective},{residual}\n"));
        }
        std::fs::write(trace_path, csv)
            .map_err(|e| format!("cannot write {}: {e}", trace_path.display()))?;
    }

    match report.status {
        ConvergenceStatus::Converged => Ok(EXIT_OK),
        ConvergenceStatus::MaxIter | ConvergenceStatus::Diverged => {
            eprintln!("estimator did not converge: {:?}", report.status);
            Ok(EXIT_NO_CONVERGENCE)
        }
    }
}

// ---------------------------------------------------------------------------
// simulate

#[derive(Args)]
struct SimulateArgs {
    /// ExperimentSpec JSON; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    group: Option<String>,
    #[arg(long)]
    p: Option<usize>,
    /// Comma-separated ascending sample counts, e.g. 2,4,8,16.
    #[arg(long)]
    n_grid: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated estimators: tyler,styler,scm,scm_reynolds.
    #[arg(long)]
    estimators: Option<String>,
    /// Sampling law: cae, gaussian, student_t:nu, k_dist:shape.
    #[arg(long)]
    texture: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Condition-number target of the random ground truth.
    #[arg(long)]
    cond: Option<f64>,
    /// fixed_per_n (default) or per_trial ground truth redraws.
    #[arg(long)]
    truth_mode: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Output directory (default: current directory).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Worker thread count (default: rayon's choice).
    #[arg(long)]
    workers: Option<usize>,
    /// Also emit a spreadsheet-ready wide summary CSV.
    #[arg(long)]
    wide: bool,
}

#[derive(Serialize)]
struct Manifest<'a> {
    status: &'a str,
    files: Vec<String>,
}

fn cmd_simulate(args: SimulateArgs) -> CliResult {
    let mut spec: Option<ExperimentSpec> = match &args.config {
        Some(path) => Some(read_json(path)?),
        None => None,
    };

    // Flag overrides (flags win).
    let parse_grid = |s: &str| -> Result<Vec<usize>, String> {
        s.split(',')
            .map(|v| {
                v.trim()
                    .parse::<usize>()
                    .map_err(|e| format!("bad n_grid entry '{v}': {e}"))
            })
            .collect()
    };
    let parse_estimators = |s: &str| -> Result<Vec<symcov::analysis::EstimatorKind>, String> {
        use symcov::analysis::EstimatorKind::*;
        s.split(',')
            .map(
                |v| match v.trim().to_lowercase().replace('-', "_").as_str() {
                    "tyler" => Ok(Tyler),
                    "styler" => Ok(Styler),
                    "scm" => Ok(Scm),
                    "scm_reynolds" => Ok(ScmReynolds),
                    other => Err(format!("unknown estimator '{other}'")),
                },
            )
            .collect()
    };

    if spec.is_none() {
        let group = parse_group_kind(args.group.as_deref().ok_or("missing --group")?)?;
        let p = args.p.ok_or("missing --p")?;
        let n_grid = parse_grid(args.n_grid.as_deref().ok_or("missing --n-grid")?)?;
        let master_seed = args.seed.ok_or("missing --seed")?;
        spec = Some(ExperimentSpec {
            group,
            p,
            n_grid,
            trials: 200,
            estimators: vec![
                symcov::analysis::EstimatorKind::Tyler,
                symcov::analysis::EstimatorKind::Styler,
                symcov::analysis::EstimatorKind::Scm,
                symcov::analysis::EstimatorKind::ScmReynolds,
            ],
            texture: SampleLaw::Cae,
            master_seed,
            cond_target: 10.0,
            truth_mode: TruthMode::FixedPerN,
            tol: 1e-10,
            max_iter: 4000,
        });
    }
    let mut spec = spec.expect("spec constructed above");
    if let Some(g) = &args.group {
        spec.group = parse_group_kind(g)?;
    }
    if let Some(p) = args.p {
        spec.p = p;
    }
    if let Some(grid) = &args.n_grid {
        spec.n_grid = parse_grid(grid)?;
    }
    if let Some(t) = args.trials {
        spec.trials = t;
    }
    if let Some(e) = &args.estimators {
        spec.estimators = parse_estimators(e)?;
    }
    if let Some(t) = &args.texture {
        spec.texture = parse_texture(t)?;
    }
    if let Some(s) = args.seed {
        spec.master_seed = s;
    }
    if let Some(c) = args.cond {
        spec.cond_target = c;
    }
    if let Some(tm) = &args.truth_mode {
        spec.truth_mode = match tm.trim().to_lowercase().replace('-', "_").as_str() {
            "fixed_per_n" => TruthMode::FixedPerN,
            "per_trial" => TruthMode::PerTrial,
            other => return Err(format!("unknown truth mode '{other}'")),
        };
    }
    if let Some(t) = args.tol {
        spec.tol = t;
    }
    if let Some(m) = args.max_iter {
        spec.max_iter = m;
    }
    spec.validate().map_err(|e| e.to_string())?;

    let out_dir = args
        .out_dir
        .or_else(|| std::env::var("SYMCOV_OUT_DIR").ok().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| format!("cannot create {}: {e}", out_dir.display()))?;

    let manifest_path = out_dir.join("MANIFEST.json");
    write_json(
        &manifest_path,
        &Manifest {
            status: "running",
            files: vec![],
        },
    )?;

    // Trial rows are flushed per grid point, so an interrupted run leaves
    // usable partial results behind a "running" manifest.
    let trials_path = out_dir.join("trials.csv");
    {
        use std::io::Write;
        let mut file = std::fs::File::create(&trials_path)
            .map_err(|e| format!("cannot create {}: {e}", trials_path.display()))?;
        writeln!(file, "{}", symcov::analysis::TrialRecord::CSV_HEADER)
            .map_err(|e| format!("cannot write {}: {e}", trials_path.display()))?;
        let workers = workers_from(args.workers);
        let spec_for_run = spec.clone();
        let result = run_experiment_streaming::<f64, _>(&spec_for_run, workers, |_, batch| {
            for rec in batch {
                writeln!(file, "{}", rec.csv_row()).map_err(|e| {
                    symcov::Error::InvalidParameter(format!(
                        "cannot write {}: {e}",
                        trials_path.display()
                    ))
                })?;
            }
            file.flush().map_err(|e| {
                symcov::Error::InvalidParameter(format!(
                    "cannot flush {}: {e}",
                    trials_path.display()
                ))
            })
        })
        .map_err(|e| e.to_string())?;

        let summary_path = out_dir.join("summary.csv");
        let sidecar_path = out_dir.join("spec.json");
        std::fs::write(&summary_path, result.summary_csv())
            .map_err(|e| format!("cannot write {}: {e}", summary_path.display()))?;
        write_json(&sidecar_path, &result.spec)?;
        let mut files = vec![
            "trials.csv".to_string(),
            "summary.csv".to_string(),
            "spec.json".to_string(),
        ];
        if args.wide {
            let wide_path = out_dir.join("wide.csv");
            std::fs::write(&wide_path, result.wide_summary_csv())
                .map_err(|e| format!("cannot write {}: {e}", wide_path.display()))?;
            files.push("wide.csv".to_string());
        }
        write_json(
            &manifest_path,
            &Manifest {
                status: "complete",
                files,
            },
        )?;
    }
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// structure

#[derive(Args)]
struct StructureArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    group: Option<String>,
    #[arg(long)]
    generators: Option<PathBuf>,
    #[arg(long)]
    p: Option<usize>,
    /// Seed for numerical discovery.
    #[arg(long)]
    seed: Option<u64>,
    /// Eigenvalue clustering tolerance for numerical discovery.
    #[arg(long)]
    tol: Option<f64>,
    /// Force numerical discovery even for built-ins.
    #[arg(long)]
    discover: bool,
    /// StructureInfo JSON output path (default: structure.json).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct StructureDoc {
    group: Option<String>,
    generators: Option<PathBuf>,
    p: Option<usize>,
    seed: Option<u64>,
    tol: Option<f64>,
    discover: Option<bool>,
    output: Option<PathBuf>,
}

#[derive(Serialize)]
struct StructureOutput {
    config: StructureDoc,
    group_order: usize,
    min_samples: usize,
    structure: StructureJson,
}

fn cmd_structure(args: StructureArgs) -> CliResult {
    let mut doc: StructureDoc = match &args.config {
        Some(path) => read_json(path)?,
        None => StructureDoc::default(),
    };
    doc.group = args.group.or(doc.group);
    doc.generators = args.generators.or(doc.generators);
    doc.p = args.p.or(doc.p);
    doc.seed = args.seed.or(doc.seed);
    doc.tol = args.tol.or(doc.tol);
    if args.discover {
        doc.discover = Some(true);
    }
    doc.output = args.output.or(doc.output);

    let seed = doc.seed.unwrap_or(0);
    let tol = doc.tol.unwrap_or(1e-6);
    let (group, structure, label) = resolve_group(
        &doc.group,
        &doc.generators,
        doc.p,
        seed,
        tol,
        doc.discover.unwrap_or(false),
    )?;

    println!(
        "group: {label} (order {}, dim {})",
        group.order(),
        group.dim()
    );
    println!("  i    p_i    s_i");
    for (i, c) in structure.components().iter().enumerate() {
        println!("{:>3} {:>6} {:>6}", i + 1, c.multiplicity, c.block_size);
    }
    println!("rho = {}", structure.rho());
    println!("delta = {}", structure.delta());
    println!("min_samples = {}", structure.min_samples());

    let out_path = doc
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from("structure.json"));
    let output = StructureOutput {
        config: doc,
        group_order: group.order(),
        min_samples: structure.min_samples(),
        structure: StructureJson::from_structure(&structure),
    };
    write_json(&out_path, &output)?;
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// sample

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    group: Option<String>,
    #[arg(long)]
    generators: Option<PathBuf>,
    #[arg(long)]
    p: Option<usize>,
    /// Number of samples to draw.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Shape source: identity, random, or a ShapeMatrix JSON path.
    #[arg(long)]
    shape: Option<String>,
    /// Condition target when --shape random.
    #[arg(long)]
    cond: Option<f64>,
    /// Sampling law: cae (default), gaussian, student_t:nu, k_dist:shape.
    #[arg(long)]
    texture: Option<String>,
    /// SampleSet JSON output path (default: samples.json).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SampleDoc {
    group: Option<String>,
    generators: Option<PathBuf>,
    p: Option<usize>,
    n: Option<usize>,
    seed: Option<u64>,
    shape: Option<String>,
    cond: Option<f64>,
    texture: Option<String>,
    output: Option<PathBuf>,
}

fn cmd_sample(args: SampleArgs) -> CliResult {
    let mut doc: SampleDoc = match &args.config {
        Some(path) => read_json(path)?,
        None => SampleDoc::default(),
    };
    doc.group = args.group.or(doc.group);
    doc.generators = args.generators.or(doc.generators);
    doc.p = args.p.or(doc.p);
    doc.n = args.n.or(doc.n);
    doc.seed = args.seed.or(doc.seed);
    doc.shape = args.shape.or(doc.shape);
    doc.cond = args.cond.or(doc.cond);
    doc.texture = args.texture.or(doc.texture);
    doc.output = args.output.or(doc.output);

    let n = doc.n.ok_or("missing --n")?;
    let seed = doc.seed.ok_or("missing --seed")?;
    let shape_src = doc.shape.unwrap_or_else(|| "identity".into());
    let law = parse_texture(doc.texture.as_deref().unwrap_or("cae"))?;

    let shape: Shape = match shape_src.as_str() {
        "identity" => {
            let p = doc.p.ok_or("missing --p for identity shape")?;
            ShapeMatrix::raw(symcov::Mat::identity(p)).map_err(|e| e.to_string())?
        }
        "random" => {
            let (_, structure, _) =
                resolve_group(&doc.group, &doc.generators, doc.p, seed, 1e-6, false)?;
            random_invariant_shape(&structure, doc.cond.unwrap_or(10.0), seed)
                .map_err(|e| e.to_string())?
        }
        path => {
            let file = PathBuf::from(path);
            if !file.exists() {
                return Err(format!("shape file does not exist: {}", file.display()));
            }
            let sj: ShapeJson = read_json(&file)?;
            sj.to_shape().map_err(|e| e.to_string())?
        }
    };

    let samples = match law {
        SampleLaw::Cae => sample_cae(&shape, n, seed),
        SampleLaw::Gaussian => sample_elliptical(&shape, Texture::Gaussian, n, seed),
        SampleLaw::StudentT { nu } => sample_elliptical(&shape, Texture::StudentT { nu }, n, seed),
        SampleLaw::KDist { shape: sh } => {
            sample_elliptical(&shape, Texture::KDist { shape: sh }, n, seed)
        }
    }
    .map_err(|e| e.to_string())?;

    let out_path = doc.output.unwrap_or_else(|| PathBuf::from("samples.json"));
    write_json(&out_path, &SampleSetJson::from_samples(&samples))?;
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// bound

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dimension (identity shape assumed unless --shape is given).
    #[arg(long)]
    p: Option<usize>,
    /// ShapeMatrix JSON path for the true shape.
    #[arg(long)]
    shape: Option<PathBuf>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    /// Tail parameter θ.
    #[arg(long)]
    theta: Option<f64>,
    /// Optional JSON output path; stdout otherwise.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct BoundDoc {
    p: Option<usize>,
    shape: Option<PathBuf>,
    rho: Option<f64>,
    delta: Option<f64>,
    n: Option<usize>,
    theta: Option<f64>,
    output: Option<PathBuf>,
}

#[derive(Serialize)]
struct BoundOutput {
    config: BoundDoc,
    lambda_min: f64,
    cos_phi0: f64,
    error_bound: f64,
    failure_prob: f64,
}

fn cmd_bound(args: BoundArgs) -> CliResult {
    let mut doc: BoundDoc = match &args.config {
        Some(path) => read_json(path)?,
        None => BoundDoc::default(),
    };
    doc.p = args.p.or(doc.p);
    doc.shape = args.shape.or(doc.shape);
    doc.rho = args.rho.or(doc.rho);
    doc.delta = args.delta.or(doc.delta);
    doc.n = args.n.or(doc.n);
    doc.theta = args.theta.or(doc.theta);
    doc.output = args.output.or(doc.output);

    let theta0: Shape = match &doc.shape {
        Some(path) => {
            let sj: ShapeJson = read_json(path)?;
            sj.to_shape().map_err(|e| e.to_string())?
        }
        None => {
            let p = doc.p.ok_or("missing --p (or --shape FILE)")?;
            ShapeMatrix::raw(symcov::Mat::identity(p)).map_err(|e| e.to_string())?
        }
    };
    let inputs = BoundInputs {
        theta0,
        rho: doc.rho.ok_or("missing --rho")?,
        delta: doc.delta.ok_or("missing --delta")?,
        n: doc.n.ok_or("missing --n")?,
        theta_param: doc.theta.ok_or("missing --theta")?,
    };
    let (lambda_min, cos_phi0) = inputs.derived().map_err(|e| e.to_string())?;
    let (error_bound, failure_prob) = evaluate_bound(&inputs).map_err(|e| e.to_string())?;
    let out = BoundOutput {
        config: doc.clone(),
        lambda_min,
        cos_phi0,
        error_bound,
        failure_prob,
    };
    match &doc.output {
        Some(path) => write_json(path, &out)?,
        None => println!(
            "{}",
            serde_json::to_string_pretty(&out).map_err(|e| e.to_string())?
        ),
    }
    Ok(EXIT_OK)
}
