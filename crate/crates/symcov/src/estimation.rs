//! Tyler and STyler fixed-point shape estimators.
//!
//! Tyler's estimator solves `Θ = (p/n) Σ x xᴴ / (xᴴΘ⁻¹x)`; the symmetric
//! variant applies the same equation to the group orbit of the sample set,
//! which collapses to a per-sample Reynolds-projected outer product when the
//! iterate is G-invariant. Both run the trace-normalized iteration and share
//! one core loop, so the trivial group reproduces Tyler iterate for iterate.
//!
//! Existence gates: Tyler needs `n > p`; the symmetric estimator only
//! `n > δ(G)·p`, which for heavily structured groups is as small as two
//! samples.

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, vdot, vnorm, CMat, HermEig};
use crate::matgroup::{builtin_group, invariance_deviation, GroupKind, GroupSpec};
use crate::sampling::{SampleSet, ShapeMatrix};
use crate::scalar::{r, Scalar, Tolerances, C};
use crate::structure::StructureInfo;

/// Initial iterate for the fixed-point loop.
#[derive(Clone, Debug)]
pub enum Init<T> {
    /// Identity scaled to unit trace. Basis-neutral default.
    Identity,
    /// Caller-supplied positive definite matrix (normalized internally).
    Custom(CMat<T>),
}

/// Fixed-point iteration controls.
#[derive(Clone, Debug)]
pub struct EstimatorConfig<T> {
    /// Relative Frobenius step tolerance on the unit-trace iterates.
    pub tol: T,
    /// Iteration budget.
    pub max_iter: usize,
    /// Starting point.
    pub init: Init<T>,
}

impl<T: Scalar> Default for EstimatorConfig<T> {
    fn default() -> Self {
        EstimatorConfig {
            tol: r::<T>(1e-10).max(T::epsilon() * r::<T>(100.0)),
            max_iter: 1000,
            init: Init::Identity,
        }
    }
}

impl<T: Scalar> EstimatorConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.tol <= T::zero() {
            return Err(Error::InvalidParameter("tol must be positive".into()));
        }
        if self.max_iter < 1 {
            return Err(Error::InvalidParameter("max_iter must be >= 1".into()));
        }
        Ok(())
    }

    pub fn with_tol(mut self, tol: T) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_init(mut self, init: Init<T>) -> Self {
        self.init = init;
        self
    }
}

/// Terminal state of a fixed-point run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceStatus {
    Converged,
    MaxIter,
    Diverged,
}

/// Outcome of an estimation run: the unit-trace estimate plus the full
/// iteration trajectory.
#[derive(Clone, Debug)]
pub struct EstimatorReport<T> {
    pub estimate: ShapeMatrix<T>,
    pub iterations: usize,
    /// `‖Θ_{j+1} − Θ_j‖_F` per update step.
    pub step_norms: Vec<T>,
    /// Objective values along the iterates (one per visited iterate).
    pub objective_values: Vec<T>,
    /// `‖Θ̂ − RHS(Θ̂)‖_F` with the RHS trace-normalized.
    pub fixed_point_residual: T,
    pub status: ConvergenceStatus,
}

impl<T: Scalar> EstimatorReport<T> {
    pub fn converged(&self) -> bool {
        self.status == ConvergenceStatus::Converged
    }
}

/// Sample atoms the shared loop iterates over.
enum Atoms<T> {
    /// G-invariant path: per-sample Reynolds-projected outer products, with
    /// the original vectors for the (shared) quadratic forms.
    Projected {
        mats: Vec<CMat<T>>,
        vecs: Vec<Vec<C<T>>>,
    },
    /// General path: orbit-expanded vectors, one atom per `K x_i`.
    Expanded { vecs: Vec<Vec<C<T>>> },
}

impl<T: Scalar> Atoms<T> {
    fn len(&self) -> usize {
        match self {
            Atoms::Projected { vecs, .. } => vecs.len(),
            Atoms::Expanded { vecs } => vecs.len(),
        }
    }

    fn vectors(&self) -> &[Vec<C<T>>] {
        match self {
            Atoms::Projected { vecs, .. } => vecs,
            Atoms::Expanded { vecs } => vecs,
        }
    }

    fn accumulate(&self, weights: &[T], out: &mut CMat<T>) {
        match self {
            Atoms::Projected { mats, .. } => {
                for (m, &w) in mats.iter().zip(weights.iter()) {
                    out.add_scaled(w, m);
                }
            }
            Atoms::Expanded { vecs } => {
                for (v, &w) in vecs.iter().zip(weights.iter()) {
                    out.add_scaled_outer(w, v);
                }
            }
        }
    }
}

fn check_no_zero_vectors<T: Scalar>(x: &SampleSet<T>) -> Result<()> {
    for (i, v) in x.vectors().iter().enumerate() {
        if vnorm(v) <= T::zero() {
            return Err(Error::ZeroVector { index: i });
        }
    }
    Ok(())
}

struct Inverse<T> {
    inv: CMat<T>,
    log_det: T,
}

fn invert_iterate<T: Scalar>(theta: &CMat<T>) -> Option<Inverse<T>> {
    let eig = hermitian_eig(theta);
    if eig.min_value() <= crate::linalg::pd_floor(&eig).max(T::zero()) {
        return None;
    }
    let log_det = eig
        .values
        .iter()
        .map(|&v| v.ln())
        .fold(T::zero(), |a, b| a + b);
    Some(Inverse {
        inv: eig.apply_fn(|v| T::one() / v),
        log_det,
    })
}

fn unit_trace_normalize<T: Scalar>(m: &CMat<T>) -> Option<CMat<T>> {
    let tr = m.trace_re();
    if !(tr > T::zero()) || !tr.is_finite() {
        return None;
    }
    Some(m.scale(T::one() / tr))
}

/// Shared trace-normalized fixed-point loop.
fn run_fixed_point<T: Scalar>(
    atoms: &Atoms<T>,
    p: usize,
    cfg: &EstimatorConfig<T>,
) -> Result<EstimatorReport<T>> {
    cfg.validate()?;
    let count = atoms.len();
    let obj_factor = r::<T>(p as f64) / r::<T>(count as f64);
    let breakdown_floor = r::<T>(1e-300).max(T::zero());

    let mut theta = match &cfg.init {
        Init::Identity => CMat::<T>::identity(p).scale(T::one() / r::<T>(p as f64)),
        Init::Custom(m) => {
            if m.rows() != p || m.cols() != p {
                return Err(Error::DimMismatch {
                    expected: p,
                    actual: m.rows(),
                });
            }
            crate::linalg::pd_eig(m)?;
            unit_trace_normalize(m).ok_or(Error::NotPositiveDefinite {
                min_eigenvalue: 0.0,
            })?
        }
    };

    let mut step_norms: Vec<T> = Vec::new();
    let mut objective_values: Vec<T> = Vec::new();
    let mut weights = vec![T::zero(); count];
    let mut last_pd = theta.clone();
    let mut status = ConvergenceStatus::MaxIter;
    let mut iterations = 0;

    // One evaluation pass: quadratic forms, objective, next iterate.
    let evaluate = |theta: &CMat<T>,
                    weights: &mut [T],
                    iteration: usize|
     -> std::result::Result<(CMat<T>, T), Error> {
        let inverse = invert_iterate(theta).ok_or(Error::NumericalBreakdown {
            iteration,
            value: 0.0,
        })?;
        let mut log_sum = T::zero();
        for (slot, v) in weights.iter_mut().zip(atoms.vectors().iter()) {
            let q = vdot(v, &inverse.inv.matvec(v)).re;
            if !(q > breakdown_floor) || !q.is_finite() {
                return Err(Error::NumericalBreakdown {
                    iteration,
                    value: q.to_f64().unwrap_or(f64::NAN),
                });
            }
            log_sum += q.ln();
            *slot = T::one() / q;
        }
        let objective = obj_factor * log_sum + inverse.log_det;
        let mut psi = CMat::<T>::zeros(p, p);
        atoms.accumulate(weights, &mut psi);
        let next = unit_trace_normalize(&psi.hermitize()).ok_or(Error::NumericalBreakdown {
            iteration,
            value: f64::NAN,
        })?;
        Ok((next, objective))
    };

    for j in 0..cfg.max_iter {
        match evaluate(&theta, &mut weights, j) {
            Ok((next, objective)) => {
                objective_values.push(objective);
                last_pd = theta.clone();
                let step = next.frob_dist(&theta);
                step_norms.push(step);
                iterations = j + 1;
                let converged = step <= cfg.tol * next.frob_norm();
                theta = next;
                if converged {
                    status = ConvergenceStatus::Converged;
                    break;
                }
            }
            Err(Error::NumericalBreakdown { .. }) | Err(Error::NotPositiveDefinite { .. }) => {
                status = ConvergenceStatus::Diverged;
                theta = last_pd.clone();
                break;
            }
            Err(e) => return Err(e),
        }
    }

    // Final residual (and objective) at the returned point.
    let mut fixed_point_residual = T::infinity();
    if status != ConvergenceStatus::Diverged {
        match evaluate(&theta, &mut weights, iterations) {
            Ok((rhs, objective)) => {
                objective_values.push(objective);
                fixed_point_residual = theta.frob_dist(&rhs);
            }
            Err(_) => {
                status = ConvergenceStatus::Diverged;
                theta = last_pd.clone();
            }
        }
    }

    let estimate = ShapeMatrix::unit_trace(theta.clone()).or_else(|_| {
        status = ConvergenceStatus::Diverged;
        ShapeMatrix::unit_trace(last_pd.clone())
    });
    let estimate = estimate?;

    Ok(EstimatorReport {
        estimate,
        iterations,
        step_norms,
        objective_values,
        fixed_point_residual,
        status,
    })
}

/// Builds the per-sample Reynolds-projected outer products
/// `Π_G(x xᴴ) = (1/|G|) Σ_K (Kx)(Kx)ᴴ`.
fn projected_atoms<T: Scalar>(x: &SampleSet<T>, group: &GroupSpec<T>) -> Atoms<T> {
    let p = x.dim();
    let w = T::one() / r::<T>(group.order() as f64);
    let mats: Vec<CMat<T>> = x
        .vectors()
        .iter()
        .map(|v| {
            let mut acc = CMat::<T>::zeros(p, p);
            for k in group.elements() {
                let y = k.matrix().matvec(v);
                acc.add_scaled_outer(w, &y);
            }
            acc
        })
        .collect();
    Atoms::Projected {
        mats,
        vecs: x.vectors().to_vec(),
    }
}

/// Expands the sample set over the group orbit: `{K x_i}` in sample-major
/// order.
fn expanded_atoms<T: Scalar>(x: &SampleSet<T>, group: &GroupSpec<T>) -> Atoms<T> {
    let mut vecs = Vec::with_capacity(x.n() * group.order());
    for v in x.vectors() {
        for k in group.elements() {
            vecs.push(k.matrix().matvec(v));
        }
    }
    Atoms::Expanded { vecs }
}

fn trivial_group<T: Scalar>(p: usize) -> GroupSpec<T> {
    builtin_group::<T>(GroupKind::Trivial, p).expect("trivial group always constructible")
}

/// Tyler's estimator. Requires `n > p` samples in general position.
pub fn tyler_estimate<T: Scalar>(
    x: &SampleSet<T>,
    cfg: &EstimatorConfig<T>,
) -> Result<EstimatorReport<T>> {
    let p = x.dim();
    if x.n() <= p {
        return Err(Error::InsufficientSamples {
            n: x.n(),
            threshold: p as f64,
            estimator: "tyler".into(),
        });
    }
    check_no_zero_vectors(x)?;
    let group = trivial_group::<T>(p);
    run_group_fixed_point(x, &group, cfg)
}

/// The group-symmetric Tyler estimator. Requires `n > δ(G)·p`.
pub fn styler_estimate<T: Scalar>(
    x: &SampleSet<T>,
    group: &GroupSpec<T>,
    structure: &StructureInfo<T>,
    cfg: &EstimatorConfig<T>,
) -> Result<EstimatorReport<T>> {
    if x.dim() != group.dim() || x.dim() != structure.dim() {
        return Err(Error::DimMismatch {
            expected: group.dim(),
            actual: x.dim(),
        });
    }
    if x.n() < structure.min_samples() {
        let delta_p = structure.delta().to_f64().unwrap_or(f64::NAN) * structure.dim() as f64;
        return Err(Error::InsufficientSamples {
            n: x.n(),
            threshold: delta_p,
            estimator: "styler".into(),
        });
    }
    check_no_zero_vectors(x)?;
    run_group_fixed_point(x, group, cfg)
}

/// Ungated core used by both public estimators (and, in tests, for probing
/// behavior below the existence threshold).
pub(crate) fn run_group_fixed_point<T: Scalar>(
    x: &SampleSet<T>,
    group: &GroupSpec<T>,
    cfg: &EstimatorConfig<T>,
) -> Result<EstimatorReport<T>> {
    let tol_struct = Tolerances::<T>::default().structure;
    let invariant_init = match &cfg.init {
        Init::Identity => true,
        Init::Custom(m) => {
            invariance_deviation(m, group)? <= tol_struct * m.frob_norm().max(T::one())
        }
    };
    let atoms = if invariant_init {
        // G-invariant iterates keep all |G| quadratic forms equal; the
        // orbit sum collapses to projected per-sample atoms.
        projected_atoms(x, group)
    } else {
        expanded_atoms(x, group)
    };
    run_fixed_point(&atoms, x.dim(), cfg)
}

/// Residual of the fixed-point equation at `theta`: the Frobenius distance
/// between the unit-trace `theta` and the trace-normalized orbit sum
/// evaluated at it. Computes the full double sum; no invariance assumption.
pub fn fixed_point_residual<T: Scalar>(
    theta: &CMat<T>,
    x: &SampleSet<T>,
    group: &GroupSpec<T>,
) -> Result<T> {
    if theta.rows() != x.dim() || !theta.is_square() {
        return Err(Error::DimMismatch {
            expected: x.dim(),
            actual: theta.rows(),
        });
    }
    check_no_zero_vectors(x)?;
    let normalized = unit_trace_normalize(theta).ok_or(Error::NotPositiveDefinite {
        min_eigenvalue: theta.trace_re().to_f64().unwrap_or(f64::NAN),
    })?;
    let inverse = invert_iterate(&normalized).ok_or(Error::NotPositiveDefinite {
        min_eigenvalue: 0.0,
    })?;
    let p = x.dim();
    let mut psi = CMat::<T>::zeros(p, p);
    for v in x.vectors() {
        for k in group.elements() {
            let y = k.matrix().matvec(v);
            let q = vdot(&y, &inverse.inv.matvec(&y)).re;
            if !(q > T::zero()) {
                return Err(Error::NumericalBreakdown {
                    iteration: 0,
                    value: q.to_f64().unwrap_or(f64::NAN),
                });
            }
            psi.add_scaled_outer(T::one() / q, &y);
        }
    }
    let rhs = unit_trace_normalize(&psi.hermitize()).ok_or(Error::NumericalBreakdown {
        iteration: 0,
        value: f64::NAN,
    })?;
    Ok(normalized.frob_dist(&rhs))
}

/// The negative log-likelihood style objective
/// `F(Θ) = (p/n) Σ log(xᴴΘ⁻¹x) + log det Θ`.
pub fn objective_f<T: Scalar>(theta: &CMat<T>, x: &SampleSet<T>) -> Result<T> {
    if theta.rows() != x.dim() || !theta.is_square() {
        return Err(Error::DimMismatch {
            expected: x.dim(),
            actual: theta.rows(),
        });
    }
    check_no_zero_vectors(x)?;
    let eig = crate::linalg::pd_eig(theta)?;
    Ok(objective_from_eig(&eig, x.vectors(), x.dim()))
}

fn objective_from_eig<T: Scalar>(eig: &HermEig<T>, vecs: &[Vec<C<T>>], p: usize) -> T {
    let inv = eig.apply_fn(|v| T::one() / v);
    let log_det = eig
        .values
        .iter()
        .map(|&v| v.ln())
        .fold(T::zero(), |a, b| a + b);
    let mut log_sum = T::zero();
    for v in vecs {
        let q = vdot(v, &inv.matvec(v)).re;
        log_sum += q.ln();
    }
    r::<T>(p as f64) / r::<T>(vecs.len() as f64) * log_sum + log_det
}

/// The group-symmetric objective
/// `F^G(Θ) = (p/(n|G|)) Σ_i Σ_K log(xᴴKᴴΘ⁻¹Kx) + log det Θ`, defined on
/// G-invariant positive definite matrices (where it coincides with `F`).
pub fn objective_fg<T: Scalar>(
    theta: &CMat<T>,
    x: &SampleSet<T>,
    group: &GroupSpec<T>,
) -> Result<T> {
    if theta.rows() != x.dim() || !theta.is_square() {
        return Err(Error::DimMismatch {
            expected: x.dim(),
            actual: theta.rows(),
        });
    }
    let tol = Tolerances::<T>::default().structure;
    let dev = invariance_deviation(theta, group)?;
    if dev > tol * theta.frob_norm().max(T::one()) {
        return Err(Error::NotInvariant {
            deviation: dev.to_f64().unwrap_or(f64::NAN),
            tolerance: tol.to_f64().unwrap_or(f64::NAN),
        });
    }
    check_no_zero_vectors(x)?;
    let eig = crate::linalg::pd_eig(theta)?;
    let expanded: Vec<Vec<C<T>>> = x
        .vectors()
        .iter()
        .flat_map(|v| group.elements().iter().map(move |k| k.matrix().matvec(v)))
        .collect();
    Ok(objective_from_eig(&eig, &expanded, x.dim()))
}

/// Least number of samples for which the symmetric estimator exists:
/// the smallest integer `n > δ(G)·p`.
pub fn min_samples<T: Scalar>(structure: &StructureInfo<T>) -> usize {
    structure.min_samples()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matgroup::is_invariant;
    use crate::sampling::{sample_cae, ShapeMatrix};
    use crate::structure::builtin_structure;
    use num_complex::Complex;

    fn identity_shape(p: usize) -> ShapeMatrix<f64> {
        ShapeMatrix::raw(CMat::identity(p)).unwrap()
    }

    fn basis_sample_set(p: usize) -> SampleSet<f64> {
        let vectors: Vec<Vec<Complex<f64>>> = (0..p)
            .map(|i| {
                (0..p)
                    .map(|j| {
                        if i == j {
                            Complex::new(1.0, 0.0)
                        } else {
                            Complex::new(0.0, 0.0)
                        }
                    })
                    .collect()
            })
            .collect();
        SampleSet::new(
            p,
            vectors,
            crate::sampling::Provenance {
                distribution: crate::sampling::DistributionTag::External,
                seed: 0,
                true_shape: None,
            },
        )
        .unwrap()
    }

    #[test]
    fn standard_basis_identity_is_a_fixed_point() {
        // n = p, so the estimator gate rejects it; the residual of the
        // candidate Θ = I/p is checked through the ungated residual function.
        let p = 4;
        let x = basis_sample_set(p);
        let g = trivial_group::<f64>(p);
        let theta = CMat::<f64>::identity(p).scale(1.0 / p as f64);
        let res = fixed_point_residual(&theta, &x, &g).unwrap();
        assert!(res < 1e-14, "residual {res}");
    }

    #[test]
    fn tyler_gate_rejects_n_le_p() {
        let p = 4;
        let x = basis_sample_set(p);
        let err = tyler_estimate(&x, &EstimatorConfig::default()).unwrap_err();
        assert!(matches!(err, Error::InsufficientSamples { .. }));
    }

    #[test]
    fn tyler_recovers_identity_shape() {
        let p = 4;
        let theta = identity_shape(p);
        let x = sample_cae(&theta, 4096, 21).unwrap();
        let report = tyler_estimate(&x, &EstimatorConfig::default()).unwrap();
        assert!(report.converged());
        let expected = CMat::<f64>::identity(p).scale(0.25);
        let dist = report.estimate.matrix().frob_dist(&expected);
        assert!(dist < 0.08, "dist {dist}");
        assert!(report.fixed_point_residual < 10.0 * 1e-10 * report.estimate.matrix().frob_norm());
    }

    #[test]
    fn styler_trivial_group_matches_tyler_iterate_for_iterate() {
        let p = 3;
        let theta = identity_shape(p);
        let x = sample_cae(&theta, 16, 5).unwrap();
        let g = trivial_group::<f64>(p);
        let s = builtin_structure::<f64>(GroupKind::Trivial, p).unwrap();
        let cfg = EstimatorConfig::default();
        let a = tyler_estimate(&x, &cfg).unwrap();
        let b = styler_estimate(&x, &g, &s, &cfg).unwrap();
        assert_eq!(a.iterations, b.iterations);
        assert_eq!(a.step_norms, b.step_norms);
        assert_eq!(
            a.estimate.matrix().frob_dist(b.estimate.matrix()),
            0.0,
            "identical paths must produce identical iterates"
        );
    }

    #[test]
    fn styler_two_samples_suffice_for_circulant() {
        let p = 8;
        let kind = GroupKind::Circulant;
        let g = builtin_group::<f64>(kind, p).unwrap();
        let s = builtin_structure::<f64>(kind, p).unwrap();
        let truth = crate::sampling::random_invariant_shape(&s, 10.0, 3).unwrap();
        let x = sample_cae(&truth, 2, 9).unwrap();
        let cfg = EstimatorConfig::default().with_max_iter(20000);
        let report = styler_estimate(&x, &g, &s, &cfg).unwrap();
        assert!(report.converged(), "status {:?}", report.status);
        assert!(is_invariant(report.estimate.matrix(), &g, 1e-8).unwrap());
    }

    #[test]
    fn styler_gate_uses_delta_threshold() {
        let p = 8;
        let kind = GroupKind::ProperQuaternion;
        let g = builtin_group::<f64>(kind, p).unwrap();
        let s = builtin_structure::<f64>(kind, p).unwrap();
        let truth = identity_shape(p);
        let x = sample_cae(&truth, 4, 2).unwrap();
        let err = styler_estimate(&x, &g, &s, &EstimatorConfig::default()).unwrap_err();
        assert!(matches!(err, Error::InsufficientSamples { .. }));
    }

    #[test]
    fn below_threshold_runs_report_non_convergence() {
        // Two samples in dimension three (trivial group) cannot span the
        // space: the objective is unbounded below and the ungated core must
        // surface max_iter/diverged rather than asserting a limit.
        let p = 3;
        let g = trivial_group::<f64>(p);
        let truth = identity_shape(p);
        let x = sample_cae(&truth, 2, 11).unwrap();
        let cfg = EstimatorConfig {
            tol: 1e-12,
            max_iter: 200,
            init: Init::Identity,
        };
        let report = run_group_fixed_point(&x, &g, &cfg).unwrap();
        assert_ne!(report.status, ConvergenceStatus::Converged);
    }

    #[test]
    fn zero_vector_rejected() {
        let p = 3;
        let mut vectors = basis_sample_set(p).vectors().to_vec();
        vectors.push(vec![Complex::new(0.0, 0.0); p]);
        let x = SampleSet::new(
            p,
            vectors,
            crate::sampling::Provenance {
                distribution: crate::sampling::DistributionTag::External,
                seed: 0,
                true_shape: None,
            },
        )
        .unwrap();
        let err = tyler_estimate(&x, &EstimatorConfig::default()).unwrap_err();
        assert!(matches!(err, Error::ZeroVector { .. }));
    }

    #[test]
    fn objective_scale_invariance() {
        let p = 3;
        let theta = identity_shape(p);
        let x = sample_cae(&theta, 20, 33).unwrap();
        let m = {
            let mut rngmat = CMat::<f64>::identity(p);
            rngmat[(0, 1)] = Complex::new(0.2, 0.1);
            rngmat[(1, 0)] = Complex::new(0.2, -0.1);
            rngmat
        };
        let base = objective_f(&m, &x).unwrap();
        for c in [0.1, 10.0] {
            let scaled = objective_f(&m.scale(c), &x).unwrap();
            assert!((scaled - base).abs() < 1e-9, "c={c}: {scaled} vs {base}");
        }
    }

    #[test]
    fn objective_zero_on_basis_set_with_identity() {
        let p = 4;
        let x = basis_sample_set(p);
        let v = objective_f(&CMat::identity(p), &x).unwrap();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn objective_fg_matches_f_on_invariant_input() {
        let p = 4;
        let kind = GroupKind::Circulant;
        let g = builtin_group::<f64>(kind, p).unwrap();
        let s = builtin_structure::<f64>(kind, p).unwrap();
        let truth = crate::sampling::random_invariant_shape(&s, 4.0, 8).unwrap();
        let x = sample_cae(&truth, 10, 14).unwrap();
        let f = objective_f(truth.matrix(), &x).unwrap();
        let fg = objective_fg(truth.matrix(), &x, &g).unwrap();
        assert!((f - fg).abs() < 1e-9, "{f} vs {fg}");
    }

    #[test]
    fn objective_fg_trivial_group_equals_f_exactly() {
        let p = 3;
        let theta_shape = identity_shape(p);
        let x = sample_cae(&theta_shape, 8, 4).unwrap();
        let g = trivial_group::<f64>(p);
        let mut m = CMat::<f64>::identity(p);
        m[(0, 0)] = Complex::new(2.0, 0.0);
        let f = objective_f(&m, &x).unwrap();
        let fg = objective_fg(&m, &x, &g).unwrap();
        assert_eq!(f, fg);
    }

    #[test]
    fn objective_fg_rejects_non_invariant() {
        let p = 4;
        let g = builtin_group::<f64>(GroupKind::Circulant, p).unwrap();
        let theta = identity_shape(p);
        let x = sample_cae(&theta, 10, 14).unwrap();
        let mut m = CMat::<f64>::identity(p);
        m[(0, 0)] = Complex::new(5.0, 0.0);
        assert!(matches!(
            objective_fg(&m, &x, &g),
            Err(Error::NotInvariant { .. })
        ));
    }

    #[test]
    fn min_samples_matches_paper_examples() {
        let circ = builtin_structure::<f64>(GroupKind::Circulant, 8).unwrap();
        assert_eq!(min_samples(&circ), 2);
        let quat = builtin_structure::<f64>(GroupKind::ProperQuaternion, 8).unwrap();
        assert_eq!(min_samples(&quat), 5);
        let triv = builtin_structure::<f64>(GroupKind::Trivial, 6).unwrap();
        assert_eq!(min_samples(&triv), 7);
    }

    #[test]
    fn monotone_objective_along_iterates() {
        let p = 6;
        let kind = GroupKind::Perhermitian;
        let g = builtin_group::<f64>(kind, p).unwrap();
        let s = builtin_structure::<f64>(kind, p).unwrap();
        let truth = crate::sampling::random_invariant_shape(&s, 6.0, 41).unwrap();
        let x = sample_cae(&truth, 12, 42).unwrap();
        let report = styler_estimate(&x, &g, &s, &EstimatorConfig::default()).unwrap();
        for w in report.objective_values.windows(2) {
            assert!(
                w[1] <= w[0] + 1e-9,
                "objective increased: {} -> {}",
                w[0],
                w[1]
            );
        }
    }
}
