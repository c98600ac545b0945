//! Seeded samplers for spherical and elliptical populations, and random
//! group-invariant ground-truth shape matrices.
//!
//! The complex angular elliptical (CAE) law is the distribution of a
//! centered complex Gaussian vector divided by its norm; it is what every
//! generalized elliptical vector becomes after normalization, which is why
//! the estimators in this crate are distribution-free within that family.
//! All samplers are pure functions of their parameters and a seed.

use crate::error::{Error, Result};
use crate::linalg::{herm_pow, hermitian_eig, vnorm, CMat};
use crate::scalar::{r, Scalar, C};
use crate::structure::StructureInfo;
use num_complex::Complex;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, Gamma, StandardNormal};

/// Scale convention a shape matrix is stored under.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "convention", rename_all = "snake_case")]
pub enum ScaleConvention {
    /// Trace normalized to one.
    UnitTrace,
    /// Scaled so that `Tr(M⁻¹)` matches a reference value.
    InverseTraceMatched { reference: f64 },
    /// No normalization applied.
    Raw,
}

/// Hermitian positive definite matrix with a declared scale convention.
#[derive(Clone, Debug)]
pub struct ShapeMatrix<T> {
    mat: CMat<T>,
    convention: ScaleConvention,
}

impl<T: Scalar> ShapeMatrix<T> {
    /// Validates Hermitian-ness and positive definiteness, then stores the
    /// matrix under the given convention (no rescaling applied here).
    pub fn new(mat: CMat<T>, convention: ScaleConvention) -> Result<Self> {
        let herm_tol = r::<T>(1e-12).max(T::epsilon() * r::<T>(100.0));
        let scale = mat.frob_norm().max(T::one());
        if !mat.is_square() {
            return Err(Error::DimMismatch {
                expected: mat.rows(),
                actual: mat.cols(),
            });
        }
        if mat.hermitian_deviation() > herm_tol * scale {
            return Err(Error::InvalidParameter(
                "shape matrix is not Hermitian".into(),
            ));
        }
        crate::linalg::pd_eig(&mat)?;
        if convention == ScaleConvention::UnitTrace {
            let trace_tol = r::<T>(1e-10).max(T::epsilon() * r::<T>(1e3));
            if (mat.trace_re() - T::one()).abs() > trace_tol {
                return Err(Error::InvalidParameter(format!(
                    "unit_trace shape matrix has trace {}",
                    mat.trace_re()
                )));
            }
        }
        Ok(ShapeMatrix { mat, convention })
    }

    /// Normalizes to unit trace and validates.
    pub fn unit_trace(mat: CMat<T>) -> Result<Self> {
        let tr = mat.trace_re();
        if tr <= T::zero() {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: tr.to_f64().unwrap_or(f64::NAN),
            });
        }
        Self::new(mat.scale(T::one() / tr), ScaleConvention::UnitTrace)
    }

    /// Stores the matrix as-is.
    pub fn raw(mat: CMat<T>) -> Result<Self> {
        Self::new(mat, ScaleConvention::Raw)
    }

    pub fn matrix(&self) -> &CMat<T> {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn convention(&self) -> ScaleConvention {
        self.convention
    }
}

/// Which law generated a sample set.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DistributionTag {
    /// Complex angular elliptical (unit-norm) law.
    Cae,
    /// Circular complex Gaussian.
    Gaussian,
    /// Complex multivariate Student t with `nu` degrees of freedom.
    StudentT { nu: f64 },
    /// Compound Gaussian with Gamma texture of the given shape.
    KDist { shape: f64 },
    /// Loaded from disk or otherwise unknown.
    External,
}

/// Provenance metadata carried by a sample set.
#[derive(Clone, Debug)]
pub struct Provenance<T> {
    pub distribution: DistributionTag,
    pub seed: u64,
    pub true_shape: Option<ShapeMatrix<T>>,
}

/// A set of n complex p-vectors plus provenance.
#[derive(Clone, Debug)]
pub struct SampleSet<T> {
    dim: usize,
    vectors: Vec<Vec<C<T>>>,
    provenance: Provenance<T>,
}

impl<T: Scalar> SampleSet<T> {
    pub fn new(dim: usize, vectors: Vec<Vec<C<T>>>, provenance: Provenance<T>) -> Result<Self> {
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    actual: v.len(),
                });
            }
            if provenance.distribution == DistributionTag::Cae {
                let norm_tol = r::<T>(1e-12).max(T::epsilon() * r::<T>(100.0));
                if (vnorm(v) - T::one()).abs() > norm_tol {
                    return Err(Error::NotUnitNorm {
                        norm: vnorm(v).to_f64().unwrap_or(f64::NAN),
                    });
                }
            }
            let _ = i;
        }
        Ok(SampleSet {
            dim,
            vectors,
            provenance,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[Vec<C<T>>] {
        &self.vectors
    }

    pub fn provenance(&self) -> &Provenance<T> {
        &self.provenance
    }

    /// Plain sample covariance `(1/n) Σ x xᴴ`.
    pub fn sample_covariance(&self) -> CMat<T> {
        let mut acc = CMat::<T>::zeros(self.dim, self.dim);
        let w = T::one() / r::<T>(self.n() as f64);
        for v in &self.vectors {
            acc.add_scaled_outer(w, v);
        }
        acc
    }
}

fn normal<T: Scalar>(rng: &mut ChaCha8Rng) -> T {
    let v: f64 = StandardNormal.sample(rng);
    r::<T>(v)
}

/// Draws a circular complex Gaussian vector with identity covariance:
/// each entry `(N + iN)/√2`.
fn standard_complex_gaussian<T: Scalar>(p: usize, rng: &mut ChaCha8Rng) -> Vec<C<T>> {
    let inv_sqrt2 = T::one() / r::<T>(2.0).sqrt();
    (0..p)
        .map(|_| {
            let re: T = normal(rng);
            let im: T = normal(rng);
            Complex::new(re * inv_sqrt2, im * inv_sqrt2)
        })
        .collect()
}

/// Samples `n` unit-norm vectors from the complex angular elliptical law
/// with the given shape matrix: `x = z/‖z‖`, `z ~ CN(0, Θ₀)`.
pub fn sample_cae<T: Scalar>(theta0: &ShapeMatrix<T>, n: usize, seed: u64) -> Result<SampleSet<T>> {
    let p = theta0.dim();
    let factor = herm_pow(theta0.matrix(), r::<T>(0.5))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vectors = Vec::with_capacity(n);
    for _ in 0..n {
        let g = standard_complex_gaussian::<T>(p, &mut rng);
        let z = factor.matvec(&g);
        let norm = vnorm(&z);
        if norm <= T::zero() {
            return Err(Error::ZeroVector {
                index: vectors.len(),
            });
        }
        vectors.push(z.iter().map(|v| v.unscale(norm)).collect());
    }
    SampleSet::new(
        p,
        vectors,
        Provenance {
            distribution: DistributionTag::Cae,
            seed,
            true_shape: Some(theta0.clone()),
        },
    )
}

/// Texture laws for elliptical sampling.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "texture", rename_all = "snake_case")]
pub enum Texture {
    Gaussian,
    StudentT { nu: f64 },
    KDist { shape: f64 },
}

/// Samples from an elliptical population `z = √τ · CN(0, Θ₀)` with the given
/// texture law.
pub fn sample_elliptical<T: Scalar>(
    theta0: &ShapeMatrix<T>,
    texture: Texture,
    n: usize,
    seed: u64,
) -> Result<SampleSet<T>> {
    let p = theta0.dim();
    match texture {
        Texture::StudentT { nu } if nu <= 0.0 => {
            return Err(Error::InvalidParameter(format!(
                "student_t requires nu > 0, got {nu}"
            )))
        }
        Texture::KDist { shape } if shape <= 0.0 => {
            return Err(Error::InvalidParameter(format!(
                "k_dist requires shape > 0, got {shape}"
            )))
        }
        _ => {}
    }
    let factor = herm_pow(theta0.matrix(), r::<T>(0.5))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vectors = Vec::with_capacity(n);
    for _ in 0..n {
        let g = standard_complex_gaussian::<T>(p, &mut rng);
        let tau: f64 = match texture {
            Texture::Gaussian => 1.0,
            Texture::StudentT { nu } => {
                let chi = ChiSquared::new(nu)
                    .map_err(|e| Error::InvalidParameter(format!("student_t: {e}")))?;
                let u: f64 = chi.sample(&mut rng);
                nu / u
            }
            Texture::KDist { shape } => {
                let gamma = Gamma::new(shape, 1.0 / shape)
                    .map_err(|e| Error::InvalidParameter(format!("k_dist: {e}")))?;
                gamma.sample(&mut rng)
            }
        };
        let scale = r::<T>(tau.sqrt());
        let z: Vec<C<T>> = factor.matvec(&g).iter().map(|v| v.scale(scale)).collect();
        vectors.push(z);
    }
    let tag = match texture {
        Texture::Gaussian => DistributionTag::Gaussian,
        Texture::StudentT { nu } => DistributionTag::StudentT { nu },
        Texture::KDist { shape } => DistributionTag::KDist { shape },
    };
    SampleSet::new(
        p,
        vectors,
        Provenance {
            distribution: tag,
            seed,
            true_shape: Some(theta0.clone()),
        },
    )
}

/// Log density of the CAE law at a unit-norm point:
/// `log (p−1)! − p log π − log det Θ₀ − p log(xᴴ Θ₀⁻¹ x)`.
pub fn cae_log_density<T: Scalar>(x: &[C<T>], theta0: &ShapeMatrix<T>) -> Result<T> {
    let p = theta0.dim();
    if x.len() != p {
        return Err(Error::DimMismatch {
            expected: p,
            actual: x.len(),
        });
    }
    let norm = vnorm(x);
    let norm_tol = r::<T>(1e-9).max(T::epsilon() * r::<T>(1e3));
    if (norm - T::one()).abs() > norm_tol {
        return Err(Error::NotUnitNorm {
            norm: norm.to_f64().unwrap_or(f64::NAN),
        });
    }
    let eig = crate::linalg::pd_eig(theta0.matrix())?;
    let log_det = eig
        .values
        .iter()
        .map(|&v| v.ln())
        .fold(T::zero(), |a, b| a + b);
    // xᴴ Θ⁻¹ x through the eigendecomposition.
    let mut quad = T::zero();
    for k in 0..p {
        let col = eig.vectors.col(k);
        let proj = crate::linalg::vdot(&col, x).norm_sqr();
        quad += proj / eig.values[k];
    }
    let log_fact = (1..p)
        .map(|k| r::<T>(k as f64).ln())
        .fold(T::zero(), |a, b| a + b);
    let pi = T::PI();
    let pf = r::<T>(p as f64);
    Ok(log_fact - pf * pi.ln() - log_det - pf * quad.ln())
}

/// Draws a random G-invariant positive definite shape matrix with spectrum
/// mapped onto `[1, cond_target]`, normalized to unit trace.
pub fn random_invariant_shape<T: Scalar>(
    s: &StructureInfo<T>,
    cond_target: f64,
    seed: u64,
) -> Result<ShapeMatrix<T>> {
    if !(cond_target >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "cond_target must be >= 1, got {cond_target}"
        )));
    }
    let p = s.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Random Hermitian blocks, replicated per multiplicity in Q coordinates.
    let mut d = CMat::<T>::zeros(p, p);
    for (c, offset) in s.components().iter().zip(s.component_offsets()) {
        let sz = c.block_size;
        let block = {
            let raw = CMat::from_fn(sz, sz, |_, _| {
                Complex::new(normal::<T>(&mut rng), normal::<T>(&mut rng))
            });
            raw.hermitize()
        };
        for copy in 0..c.multiplicity {
            let base = offset + copy * sz;
            for i in 0..sz {
                for j in 0..sz {
                    d[(base + i, base + j)] = block[(i, j)];
                }
            }
        }
    }

    let eig = hermitian_eig(&d);
    let (lo, hi) = (eig.min_value(), eig.max_value());
    let spread = hi - lo;
    let mapped = if spread <= r::<T>(1e-9) {
        // Spectrum is (numerically) a point; the only invariant matrices are
        // multiples of the identity and the condition target is unreachable.
        CMat::<T>::identity(p)
    } else {
        // Affine map of the spectrum onto [1, cond_target].
        let a = r::<T>(cond_target - 1.0) / spread;
        let b = T::one() - a * lo;
        let mut m = d.scale(a);
        for i in 0..p {
            m[(i, i)] += Complex::new(b, T::zero());
        }
        m
    };
    let q = s.basis_q();
    let full = q.matmul(&mapped).matmul(&q.adjoint()).hermitize();
    ShapeMatrix::unit_trace(full)
}

/// Derives a child RNG seed from a master seed and a stream of tags
/// (splitmix64 finalization per step). Used for per-trial streams so that
/// parallel and serial runs agree.
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }
    let mut state = mix(master ^ 0x9E3779B97F4A7C15);
    for &t in tags {
        state = mix(state.wrapping_add(0x9E3779B97F4A7C15).wrapping_add(t));
    }
    state
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matgroup::{builtin_group, is_invariant, GroupKind};
    use crate::structure::{builtin_structure, reynolds_project};

    fn identity_shape(p: usize) -> ShapeMatrix<f64> {
        ShapeMatrix::raw(CMat::identity(p)).unwrap()
    }

    #[test]
    fn cae_vectors_are_unit_norm() {
        let theta = identity_shape(5);
        let s = sample_cae(&theta, 50, 7).unwrap();
        for v in s.vectors() {
            assert!((vnorm(v) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cae_second_moment_is_isotropic_for_identity() {
        let p = 2;
        let theta = identity_shape(p);
        let s = sample_cae(&theta, 100_000, 42).unwrap();
        let m = s.sample_covariance();
        let expected = CMat::<f64>::identity(p).scale(1.0 / p as f64);
        assert!(
            m.frob_dist(&expected) < 0.01,
            "dist {}",
            m.frob_dist(&expected)
        );
    }

    #[test]
    fn cae_moment_invariant_under_group_when_shape_invariant() {
        let p = 4;
        let kind = GroupKind::Circulant;
        let g = builtin_group::<f64>(kind, p).unwrap();
        let st = builtin_structure::<f64>(kind, p).unwrap();
        let theta = random_invariant_shape(&st, 5.0, 3).unwrap();
        let s = sample_cae(&theta, 100_000, 11).unwrap();
        let m = s.sample_covariance();
        let projected = reynolds_project(&m, &g).unwrap();
        assert!(
            m.frob_dist(&projected) < 0.02,
            "dist {}",
            m.frob_dist(&projected)
        );
    }

    #[test]
    fn cae_reproducible_and_scale_free() {
        let p = 3;
        let theta = identity_shape(p);
        let a = sample_cae(&theta, 10, 99).unwrap();
        let b = sample_cae(&theta, 10, 99).unwrap();
        for (x, y) in a.vectors().iter().zip(b.vectors().iter()) {
            assert_eq!(x, y);
        }
        let scaled = ShapeMatrix::raw(CMat::identity(p).scale(7.5)).unwrap();
        let c = sample_cae(&scaled, 10, 99).unwrap();
        for (x, y) in a.vectors().iter().zip(c.vectors().iter()) {
            let err: f64 = x
                .iter()
                .zip(y.iter())
                .map(|(u, v)| (*u - *v).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(err < 1e-12);
        }
    }

    #[test]
    fn cae_log_density_identity_cases() {
        // p = 2, Theta = I: density is 1/π² everywhere on the sphere.
        let theta = identity_shape(2);
        let x = vec![Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)];
        let ld = cae_log_density(&x, &theta).unwrap();
        assert!((ld - (-2.0 * std::f64::consts::PI.ln())).abs() < 1e-12);

        // p = 1: log(0!/π) = −log π.
        let theta1 = identity_shape(1);
        let x1 = vec![Complex::new(1.0, 0.0)];
        let ld1 = cae_log_density(&x1, &theta1).unwrap();
        assert!((ld1 - (-std::f64::consts::PI.ln())).abs() < 1e-12);
    }

    #[test]
    fn cae_log_density_diagonal_oracle() {
        // p=3, Θ=diag(1,2,3), x=e1: value checked against an independent
        // high-precision evaluation of log 2 − 3 log π − log 6.
        let mat = CMat::from_fn(3, 3, |i, j| {
            if i == j {
                Complex::new((i + 1) as f64, 0.0)
            } else {
                Complex::new(0.0, 0.0)
            }
        });
        let theta = ShapeMatrix::raw(mat).unwrap();
        let x = vec![
            Complex::new(1.0, 0.0),
            Complex::new(0.0, 0.0),
            Complex::new(0.0, 0.0),
        ];
        let ld = cae_log_density(&x, &theta).unwrap();
        assert!((ld - (-4.532_801_946_216_31)).abs() < 1e-12, "got {ld}");
    }

    #[test]
    fn cae_log_density_rejects_off_sphere_points() {
        let theta = identity_shape(2);
        let x = vec![Complex::new(2.0, 0.0), Complex::new(0.0, 0.0)];
        assert!(matches!(
            cae_log_density(&x, &theta),
            Err(Error::NotUnitNorm { .. })
        ));
    }

    #[test]
    fn cae_density_integrates_to_one_on_p2() {
        // Importance sampling with the uniform sphere law (CAE with identity
        // shape) as proposal: E_unif[p_Θ(x) / p_I(x)] = ∫ p_Θ dμ = 1, with
        // both densities taken against the same dominating measure.
        let p = 2;
        let mat = CMat::from_fn(p, p, |i, j| {
            if i == j {
                Complex::new((i + 1) as f64, 0.0)
            } else {
                Complex::new(0.0, 0.0)
            }
        });
        let theta = ShapeMatrix::raw(mat).unwrap();
        let uniform = identity_shape(p);
        let draws = sample_cae(&uniform, 1_000_000, 5).unwrap();
        let mut acc = 0.0;
        for v in draws.vectors() {
            let num = cae_log_density(v, &theta).unwrap();
            let den = cae_log_density(v, &uniform).unwrap();
            acc += (num - den).exp();
        }
        let integral = acc / draws.n() as f64;
        assert!((integral - 1.0).abs() < 0.01, "integral {integral}");
    }

    #[test]
    fn elliptical_normalized_moments_match_cae() {
        let p = 3;
        let theta = identity_shape(p);
        let gauss = sample_elliptical(&theta, Texture::Gaussian, 100_000, 8).unwrap();
        let cae = sample_cae(&theta, 100_000, 8).unwrap();
        // Normalize the Gaussian draws onto the sphere and compare moments.
        let mut acc = CMat::<f64>::zeros(p, p);
        for v in gauss.vectors() {
            let nv = vnorm(v);
            let unit: Vec<_> = v.iter().map(|z| z.unscale(nv)).collect();
            acc.add_scaled_outer(1.0 / gauss.n() as f64, &unit);
        }
        let diff = acc.frob_dist(&cae.sample_covariance());
        assert!(diff < 0.02, "diff {diff}");
    }

    #[test]
    fn student_t_large_nu_approaches_gaussian() {
        let p = 2;
        let theta = identity_shape(p);
        let t = sample_elliptical(&theta, Texture::StudentT { nu: 1e6 }, 100_000, 13).unwrap();
        let g = sample_elliptical(&theta, Texture::Gaussian, 100_000, 13).unwrap();
        let diff = t.sample_covariance().frob_dist(&g.sample_covariance());
        assert!(diff < 0.02, "diff {diff}");
    }

    #[test]
    fn invalid_texture_parameters_rejected() {
        let theta = identity_shape(2);
        assert!(sample_elliptical(&theta, Texture::StudentT { nu: -1.0 }, 5, 1).is_err());
        assert!(sample_elliptical(&theta, Texture::KDist { shape: 0.0 }, 5, 1).is_err());
    }

    #[test]
    fn random_invariant_shape_contract() {
        for kind in [
            GroupKind::Circulant,
            GroupKind::ProperQuaternion,
            GroupKind::Trivial,
        ] {
            let p = 8;
            let g = builtin_group::<f64>(kind, p).unwrap();
            let st = builtin_structure::<f64>(kind, p).unwrap();
            let shape = random_invariant_shape(&st, 10.0, 77).unwrap();
            assert!((shape.matrix().trace_re() - 1.0).abs() < 1e-10);
            assert!(is_invariant(shape.matrix(), &g, 1e-8).unwrap());
            let eig = hermitian_eig(shape.matrix());
            assert!(eig.min_value() > 0.0);
            // Condition number within a factor 2 of the target.
            let cond = eig.max_value() / eig.min_value();
            assert!(cond > 5.0 && cond < 20.0, "cond {cond}");
        }
    }

    #[test]
    fn circulant_truth_has_circulant_pattern() {
        let p = 8;
        let st = builtin_structure::<f64>(GroupKind::Circulant, p).unwrap();
        let shape = random_invariant_shape(&st, 10.0, 5).unwrap();
        let m = shape.matrix();
        // Every row is the previous row shifted by one.
        for i in 1..p {
            for j in 0..p {
                let diff = (m[(i, j)] - m[(i - 1, (j + p - 1) % p)]).norm();
                assert!(diff < 1e-10);
            }
        }
        // Hermitian circulant coefficient symmetry c_m = conj(c_{p−m}).
        for mth in 1..p {
            let diff = (m[(0, mth)] - m[(0, p - mth)].conj()).norm();
            assert!(diff < 1e-10);
        }
    }

    #[test]
    fn derive_seed_is_stable_and_spreads() {
        let a = derive_seed(42, &[1, 2]);
        let b = derive_seed(42, &[1, 2]);
        let c = derive_seed(42, &[2, 1]);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
