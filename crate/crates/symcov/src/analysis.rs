//! Error metrics, high-probability error bounds, and the Monte Carlo
//! experiment harness.
//!
//! The harness draws group-invariant ground truths, samples from them, runs
//! the configured estimators, and records per-trial errors. Trials use
//! derived RNG streams keyed on (master seed, grid index, trial index), so
//! results are byte-identical regardless of how many worker threads execute
//! them.

use crate::error::{Error, Result};
use crate::estimation::{
    styler_estimate, tyler_estimate, ConvergenceStatus, EstimatorConfig, Init,
};
use crate::linalg::{pd_inverse, CMat};
use crate::matgroup::{builtin_group, GroupKind, GroupSpec};
use crate::sampling::{
    derive_seed, random_invariant_shape, sample_cae, sample_elliptical, SampleSet, ShapeMatrix,
    Texture,
};
use crate::scalar::{r, Scalar};
use crate::structure::{builtin_structure, reynolds_project, StructureInfo};
use serde::{Deserialize, Serialize};

/// Inputs of the high-probability error bound.
#[derive(Clone, Debug)]
pub struct BoundInputs<T> {
    pub theta0: ShapeMatrix<T>,
    /// Sparsity factor of the symmetry group.
    pub rho: T,
    /// Degrees-of-freedom factor of the symmetry group.
    pub delta: T,
    /// Sample count.
    pub n: usize,
    /// Tail parameter θ ≥ 0.
    pub theta_param: T,
}

impl<T: Scalar> BoundInputs<T> {
    /// Derived quantities: `λ_min(Θ₀)` and
    /// `cos φ₀ = Tr(Ω₀) / (√p ‖Ω₀‖_F)` with `Ω₀ = Θ₀⁻¹`.
    pub fn derived(&self) -> Result<(T, T)> {
        let omega = pd_inverse(self.theta0.matrix())?;
        let p = r::<T>(self.theta0.dim() as f64);
        let cos_phi0 = omega.trace_re() / (p.sqrt() * omega.frob_norm());
        let eig = crate::linalg::hermitian_eig(self.theta0.matrix());
        Ok((eig.min_value(), cos_phi0))
    }
}

/// Evaluates the inverse-Frobenius error bound and the complement of its
/// probability guarantee (clamped to [0, 1]).
pub fn evaluate_bound<T: Scalar>(b: &BoundInputs<T>) -> Result<(T, T)> {
    if b.theta_param < T::zero() {
        return Err(Error::InvalidParameter("theta_param must be >= 0".into()));
    }
    let p = b.theta0.dim();
    let pf = r::<T>(p as f64);
    let nf = r::<T>(b.n as f64);
    if nf <= b.delta * pf {
        return Err(Error::InsufficientSamples {
            n: b.n,
            threshold: (b.delta * pf).to_f64().unwrap_or(f64::NAN),
            estimator: "bound".into(),
        });
    }
    let (lambda_min, cos_phi0) = b.derived()?;
    let theta = b.theta_param;

    let error_bound = b.rho.sqrt() * r::<T>(10.0) * theta / (lambda_min * cos_phi0 * cos_phi0)
        * (pf + T::one())
        / nf.sqrt();

    let term1 = {
        let denom = T::one() + r::<T>(1.7) * theta / (b.rho * nf).sqrt();
        r::<T>(2.0) * (-(theta * theta) / (r::<T>(2.0) * denom)).exp()
    };
    let term2 = {
        let one_plus = T::one() + T::one() / pf;
        let ln7p = (r::<T>(7.0) * pf).ln();
        let exp_arg = -(nf * cos_phi0 * cos_phi0) / (r::<T>(80.0) * ln7p * one_plus);
        let tail = T::one() + r::<T>(8e3) * one_plus.powi(4) / (nf * cos_phi0.powi(8));
        r::<T>(2.0) * pf * pf * exp_arg.exp() * tail
    };
    let failure = (term1 + term2).min(T::one()).max(T::zero());
    Ok((error_bound, failure))
}

/// Smallest θ for which the θ-dependent tail term
/// `2 exp(−θ²/(2(1+1.7θ/√(ρn))))` is at most `target`. Bisection; the term
/// is monotone decreasing in θ.
pub fn theta_for_tail_prob(rho: f64, n: usize, target: f64) -> f64 {
    let tail = |theta: f64| {
        let denom = 1.0 + 1.7 * theta / (rho * n as f64).sqrt();
        2.0 * (-(theta * theta) / (2.0 * denom)).exp()
    };
    if tail(0.0) <= target {
        return 0.0;
    }
    let mut hi = 1.0;
    while tail(hi) > target {
        hi *= 2.0;
        if hi > 1e6 {
            return hi;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if tail(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Frobenius error between inverses after matching inverse traces:
/// the estimate is rescaled so `Tr(est⁻¹) = Tr(truth⁻¹)`.
pub fn frob_error_inverse<T: Scalar>(
    estimate: &ShapeMatrix<T>,
    truth: &ShapeMatrix<T>,
) -> Result<T> {
    if estimate.dim() != truth.dim() {
        return Err(Error::DimMismatch {
            expected: truth.dim(),
            actual: estimate.dim(),
        });
    }
    let est_inv = pd_inverse(estimate.matrix())?;
    let truth_inv = pd_inverse(truth.matrix())?;
    let scale = truth_inv.trace_re() / est_inv.trace_re();
    Ok(est_inv.scale(scale).frob_dist(&truth_inv))
}

/// Squared Frobenius distance between unit-trace normalizations.
pub fn mse_error<T: Scalar>(estimate: &ShapeMatrix<T>, truth: &ShapeMatrix<T>) -> Result<T> {
    if estimate.dim() != truth.dim() {
        return Err(Error::DimMismatch {
            expected: truth.dim(),
            actual: estimate.dim(),
        });
    }
    for m in [estimate, truth] {
        crate::linalg::pd_eig(m.matrix())?;
    }
    let a = estimate
        .matrix()
        .scale(T::one() / estimate.matrix().trace_re());
    let b = truth.matrix().scale(T::one() / truth.matrix().trace_re());
    let d = a.frob_dist(&b);
    Ok(d * d)
}

/// Reynolds-averaged sample covariance `Π_G((1/n) Σ x xᴴ)`.
pub fn group_sample_covariance<T: Scalar>(
    x: &SampleSet<T>,
    group: &GroupSpec<T>,
) -> Result<CMat<T>> {
    if x.n() == 0 {
        return Err(Error::InvalidParameter("empty sample set".into()));
    }
    reynolds_project(&x.sample_covariance(), group)
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let lx = x.ln();
        let ly = y.ln();
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Which estimators an experiment runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Tyler,
    Styler,
    Scm,
    ScmReynolds,
}

impl EstimatorKind {
    pub fn label(&self) -> &'static str {
        match self {
            EstimatorKind::Tyler => "tyler",
            EstimatorKind::Styler => "styler",
            EstimatorKind::Scm => "scm",
            EstimatorKind::ScmReynolds => "scm_reynolds",
        }
    }
}

/// Sampling law for the synthetic data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
#[derive(Default)]
pub enum SampleLaw {
    /// Unit-norm complex angular elliptical draws (the default).
    #[default]
    Cae,
    Gaussian,
    StudentT {
        nu: f64,
    },
    KDist {
        shape: f64,
    },
}

/// Whether the ground truth is redrawn per trial or fixed per grid point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[derive(Default)]
pub enum TruthMode {
    #[default]
    FixedPerN,
    PerTrial,
}

fn default_trials() -> usize {
    200
}
fn default_cond_target() -> f64 {
    10.0
}
fn default_tol() -> f64 {
    1e-10
}
fn default_max_iter() -> usize {
    4000
}
fn default_estimators() -> Vec<EstimatorKind> {
    vec![
        EstimatorKind::Tyler,
        EstimatorKind::Styler,
        EstimatorKind::Scm,
        EstimatorKind::ScmReynolds,
    ]
}

/// Full description of a Monte Carlo experiment. Serializable so every
/// result artifact can echo the exact configuration that produced it.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub group: GroupKind,
    pub p: usize,
    pub n_grid: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_estimators")]
    pub estimators: Vec<EstimatorKind>,
    #[serde(default)]
    pub texture: SampleLaw,
    pub master_seed: u64,
    #[serde(default = "default_cond_target")]
    pub cond_target: f64,
    #[serde(default)]
    pub truth_mode: TruthMode,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::InvalidParameter("p must be positive".into()));
        }
        if self.n_grid.is_empty() {
            return Err(Error::InvalidParameter("n_grid must be nonempty".into()));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "n_grid must be strictly ascending".into(),
            ));
        }
        if self.trials < 1 {
            return Err(Error::InvalidParameter("trials must be >= 1".into()));
        }
        if self.estimators.is_empty() {
            return Err(Error::InvalidParameter(
                "at least one estimator required".into(),
            ));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter("tol must be positive".into()));
        }
        if self.max_iter < 1 {
            return Err(Error::InvalidParameter("max_iter must be >= 1".into()));
        }
        Ok(())
    }
}

/// Outcome of a single (estimator, n, trial) cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStatus {
    Ok,
    /// The existence gate excluded this estimator at this n.
    Infeasible,
    MaxIter,
    Diverged,
    /// The estimator or a metric failed with an error.
    Error,
}

impl TrialStatus {
    pub fn label(&self) -> &'static str {
        match self {
            TrialStatus::Ok => "ok",
            TrialStatus::Infeasible => "infeasible",
            TrialStatus::MaxIter => "max_iter",
            TrialStatus::Diverged => "diverged",
            TrialStatus::Error => "error",
        }
    }
}

/// One row of the trial table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrialRecord {
    pub group: String,
    pub p: usize,
    pub n: usize,
    pub estimator: EstimatorKind,
    pub trial: usize,
    pub seed: u64,
    pub status: TrialStatus,
    pub mse: Option<f64>,
    pub frob_inv_err: Option<f64>,
    pub iterations: Option<usize>,
}

/// One row of the summary table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub group: String,
    pub p: usize,
    pub n: usize,
    pub estimator: EstimatorKind,
    pub median_mse: Option<f64>,
    pub mean_mse: Option<f64>,
    pub fail_count: usize,
}

/// Results of a full experiment: the spec echo plus trial and summary rows.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    pub records: Vec<TrialRecord>,
    pub summaries: Vec<SummaryRecord>,
}

fn fmt_opt_f64(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

fn fmt_opt_usize(v: Option<usize>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

impl TrialRecord {
    /// Header of the per-trial CSV.
    pub const CSV_HEADER: &'static str =
        "group,p,n,estimator,trial,seed,status,mse,frob_inv_err,iterations";

    /// One CSV row (no trailing newline).
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.group,
            self.p,
            self.n,
            self.estimator.label(),
            self.trial,
            self.seed,
            self.status.label(),
            fmt_opt_f64(self.mse),
            fmt_opt_f64(self.frob_inv_err),
            fmt_opt_usize(self.iterations),
        )
    }
}

impl ExperimentResult {
    /// Per-trial CSV: `group,p,n,estimator,trial,seed,status,mse,frob_inv_err,iterations`.
    pub fn trial_csv(&self) -> String {
        let mut out = String::from(TrialRecord::CSV_HEADER);
        out.push('\n');
        for rec in &self.records {
            out.push_str(&rec.csv_row());
            out.push('\n');
        }
        out
    }

    /// Summary CSV: `group,p,n,estimator,median_mse,mean_mse,fail_count`.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("group,p,n,estimator,median_mse,mean_mse,fail_count\n");
        for rec in &self.summaries {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                rec.group,
                rec.p,
                rec.n,
                rec.estimator.label(),
                fmt_opt_f64(rec.median_mse),
                fmt_opt_f64(rec.mean_mse),
                rec.fail_count,
            ));
        }
        out
    }

    /// Wide summary: one row per n, one median-MSE column per estimator.
    pub fn wide_summary_csv(&self) -> String {
        let estimators = &self.spec.estimators;
        let mut out = String::from("group,p,n");
        for e in estimators {
            out.push_str(&format!(",median_mse_{}", e.label()));
        }
        out.push('\n');
        for &n in &self.spec.n_grid {
            out.push_str(&format!("{},{},{n}", self.spec.group.name(), self.spec.p));
            for e in estimators {
                let v = self
                    .summaries
                    .iter()
                    .find(|s| s.n == n && s.estimator == *e)
                    .and_then(|s| s.median_mse);
                out.push(',');
                out.push_str(&fmt_opt_f64(v));
            }
            out.push('\n');
        }
        out
    }

    /// Median MSE of an estimator at a grid point, when any trial succeeded.
    pub fn median_mse(&self, estimator: EstimatorKind, n: usize) -> Option<f64> {
        self.summaries
            .iter()
            .find(|s| s.estimator == estimator && s.n == n)
            .and_then(|s| s.median_mse)
    }

    /// Convergence failures (non-ok, non-infeasible rows) for a cell.
    pub fn failure_count(&self, estimator: EstimatorKind, n: usize) -> usize {
        self.records
            .iter()
            .filter(|t| {
                t.estimator == estimator
                    && t.n == n
                    && !matches!(t.status, TrialStatus::Ok | TrialStatus::Infeasible)
            })
            .count()
    }
}

fn median(sorted: &[f64]) -> f64 {
    let k = sorted.len();
    if k % 2 == 1 {
        sorted[k / 2]
    } else {
        0.5 * (sorted[k / 2 - 1] + sorted[k / 2])
    }
}

struct ExperimentContext<T> {
    group: GroupSpec<T>,
    structure: StructureInfo<T>,
}

fn run_one_trial<T: Scalar>(
    spec: &ExperimentSpec,
    ctx: &ExperimentContext<T>,
    n_idx: usize,
    trial: usize,
) -> Vec<TrialRecord> {
    let n = spec.n_grid[n_idx];
    let truth_seed = match spec.truth_mode {
        TruthMode::FixedPerN => derive_seed(spec.master_seed, &[1, n_idx as u64]),
        TruthMode::PerTrial => derive_seed(spec.master_seed, &[1, n_idx as u64, trial as u64]),
    };
    let sample_seed = derive_seed(spec.master_seed, &[2, n_idx as u64, trial as u64]);
    let group_name = spec.group.name();

    let make_record = |estimator: EstimatorKind,
                       status: TrialStatus,
                       mse: Option<f64>,
                       frob: Option<f64>,
                       iterations: Option<usize>| TrialRecord {
        group: group_name.clone(),
        p: spec.p,
        n,
        estimator,
        trial,
        seed: sample_seed,
        status,
        mse,
        frob_inv_err: frob,
        iterations,
    };

    // Truth and samples; a failure here poisons every estimator row.
    let drawn = random_invariant_shape::<T>(&ctx.structure, spec.cond_target, truth_seed).and_then(
        |truth| {
            let samples = match spec.texture {
                SampleLaw::Cae => sample_cae(&truth, n, sample_seed),
                SampleLaw::Gaussian => sample_elliptical(&truth, Texture::Gaussian, n, sample_seed),
                SampleLaw::StudentT { nu } => {
                    sample_elliptical(&truth, Texture::StudentT { nu }, n, sample_seed)
                }
                SampleLaw::KDist { shape } => {
                    sample_elliptical(&truth, Texture::KDist { shape }, n, sample_seed)
                }
            }?;
            Ok((truth, samples))
        },
    );
    let (truth, samples) = match drawn {
        Ok(v) => v,
        Err(_) => {
            return spec
                .estimators
                .iter()
                .map(|&e| make_record(e, TrialStatus::Error, None, None, None))
                .collect()
        }
    };

    let cfg = EstimatorConfig::<T> {
        tol: r::<T>(spec.tol),
        max_iter: spec.max_iter,
        init: Init::Identity,
    };

    spec.estimators
        .iter()
        .map(|&estimator| {
            // Existence gates, evaluated before running.
            let feasible = match estimator {
                EstimatorKind::Tyler => n > spec.p,
                EstimatorKind::Styler => n >= ctx.structure.min_samples(),
                EstimatorKind::Scm | EstimatorKind::ScmReynolds => true,
            };
            if !feasible {
                return make_record(estimator, TrialStatus::Infeasible, None, None, None);
            }
            let outcome: Result<(ShapeMatrix<T>, TrialStatus, Option<usize>)> = match estimator {
                EstimatorKind::Tyler => tyler_estimate(&samples, &cfg).map(|rep| {
                    let st = match rep.status {
                        ConvergenceStatus::Converged => TrialStatus::Ok,
                        ConvergenceStatus::MaxIter => TrialStatus::MaxIter,
                        ConvergenceStatus::Diverged => TrialStatus::Diverged,
                    };
                    (rep.estimate, st, Some(rep.iterations))
                }),
                EstimatorKind::Styler => {
                    styler_estimate(&samples, &ctx.group, &ctx.structure, &cfg).map(|rep| {
                        let st = match rep.status {
                            ConvergenceStatus::Converged => TrialStatus::Ok,
                            ConvergenceStatus::MaxIter => TrialStatus::MaxIter,
                            ConvergenceStatus::Diverged => TrialStatus::Diverged,
                        };
                        (rep.estimate, st, Some(rep.iterations))
                    })
                }
                EstimatorKind::Scm => ShapeMatrix::unit_trace(samples.sample_covariance())
                    .map(|s| (s, TrialStatus::Ok, Some(0))),
                EstimatorKind::ScmReynolds => group_sample_covariance(&samples, &ctx.group)
                    .and_then(ShapeMatrix::unit_trace)
                    .map(|s| (s, TrialStatus::Ok, Some(0))),
            };
            match outcome {
                Ok((estimate, status, iterations)) => {
                    if status == TrialStatus::Ok {
                        let mse = mse_error(&estimate, &truth).ok().and_then(|v| v.to_f64());
                        let frob = frob_error_inverse(&estimate, &truth)
                            .ok()
                            .and_then(|v| v.to_f64());
                        make_record(estimator, status, mse, frob, iterations)
                    } else {
                        make_record(estimator, status, None, None, iterations)
                    }
                }
                Err(_) => make_record(estimator, TrialStatus::Error, None, None, None),
            }
        })
        .collect()
}

/// Runs a Monte Carlo experiment. `workers` bounds the rayon pool size
/// (`None` uses the default); the output does not depend on it.
pub fn run_experiment<T: Scalar>(
    spec: &ExperimentSpec,
    workers: Option<usize>,
) -> Result<ExperimentResult> {
    run_experiment_streaming::<T, _>(spec, workers, |_, _| Ok(()))
}

/// Like [`run_experiment`], but hands each completed grid point's records to
/// `on_batch` before moving on, so callers can flush partial results. Trial
/// seeds depend only on (master seed, grid index, trial), so the streamed
/// batches are identical to the corresponding slice of a monolithic run.
pub fn run_experiment_streaming<T, F>(
    spec: &ExperimentSpec,
    workers: Option<usize>,
    mut on_batch: F,
) -> Result<ExperimentResult>
where
    T: Scalar,
    F: FnMut(usize, &[TrialRecord]) -> Result<()>,
{
    spec.validate()?;
    let group = builtin_group::<T>(spec.group, spec.p)?;
    let structure = builtin_structure::<T>(spec.group, spec.p)?;
    let ctx = ExperimentContext { group, structure };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;

    let mut records: Vec<TrialRecord> = Vec::new();
    for n_idx in 0..spec.n_grid.len() {
        let nested: Vec<Vec<TrialRecord>> = pool.install(|| {
            use rayon::prelude::*;
            (0..spec.trials)
                .into_par_iter()
                .map(|trial| run_one_trial(spec, &ctx, n_idx, trial))
                .collect()
        });
        let batch: Vec<TrialRecord> = nested.into_iter().flatten().collect();
        on_batch(n_idx, &batch)?;
        records.extend(batch);
    }

    // Summaries in (n, estimator) order.
    let mut summaries = Vec::new();
    for &n in &spec.n_grid {
        for &estimator in &spec.estimators {
            let mut values: Vec<f64> = records
                .iter()
                .filter(|t| t.n == n && t.estimator == estimator && t.status == TrialStatus::Ok)
                .filter_map(|t| t.mse)
                .collect();
            values.sort_by(|a, b| a.partial_cmp(b).expect("NaN mse"));
            let fail_count = records
                .iter()
                .filter(|t| t.n == n && t.estimator == estimator && t.status != TrialStatus::Ok)
                .count();
            let (median_mse, mean_mse) = if values.is_empty() {
                (None, None)
            } else {
                (
                    Some(median(&values)),
                    Some(values.iter().sum::<f64>() / values.len() as f64),
                )
            };
            summaries.push(SummaryRecord {
                group: spec.group.name(),
                p: spec.p,
                n,
                estimator,
                median_mse,
                mean_mse,
                fail_count,
            });
        }
    }

    Ok(ExperimentResult {
        spec: spec.clone(),
        records,
        summaries,
    })
}
