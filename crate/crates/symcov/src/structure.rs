//! Commutant structure of a finite unitary group.
//!
//! Every matrix commuting with a finite unitary group is, in a suitable
//! orthonormal basis, block diagonal with blocks of the form `I_{p_i} ⊗ B_i`.
//! This module computes that basis and the component parameters `(p_i, s_i)`
//! — analytically for the built-in symmetry classes, numerically for
//! arbitrary groups — together with the derived sparsity factor
//! `ρ = Σ p_i s_i² / p²` and degrees-of-freedom factor
//! `δ = max_i (s_i/p_i) / p`. It also houses the Reynolds averaging
//! projection onto the commutant and geodesics of the positive definite
//! cone, which the estimation module relies on for its convexity
//! guarantees.

use crate::error::{Error, Result};
use crate::linalg::{herm_pow, hermitian_eig, hermitian_rank, CMat};
use crate::matgroup::{GroupKind, GroupSpec};
use crate::sampling::SampleSet;
use crate::scalar::{r, Scalar, Tolerances, C};
use num_complex::Complex;
use num_traits::Zero;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One isotypic component: `multiplicity` copies of a free Hermitian block
/// of size `block_size` (the `(p_i, s_i)` pair).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Component {
    /// Number of identical copies of the block (`p_i`).
    pub multiplicity: usize,
    /// Side length of the free Hermitian block (`s_i`).
    pub block_size: usize,
}

impl Component {
    pub fn new(multiplicity: usize, block_size: usize) -> Self {
        Component {
            multiplicity,
            block_size,
        }
    }

    /// Total dimension `p_i · s_i` this component occupies.
    pub fn span(&self) -> usize {
        self.multiplicity * self.block_size
    }
}

/// The commutant decomposition of a group: basis, components, factors, mask.
#[derive(Clone, Debug)]
pub struct StructureInfo<T> {
    dim: usize,
    components: Vec<Component>,
    basis_q: CMat<T>,
    rho: T,
    delta: T,
    mask: Vec<bool>,
}

impl<T: Scalar> StructureInfo<T> {
    /// Assembles a structure from components and a basis, checking the
    /// dimension bookkeeping and unitarity of the basis.
    pub fn new(dim: usize, components: Vec<Component>, basis_q: CMat<T>) -> Result<Self> {
        let total: usize = components.iter().map(|c| c.span()).sum();
        if total != dim {
            return Err(Error::InvalidParameter(format!(
                "component spans sum to {total}, expected {dim}"
            )));
        }
        if basis_q.rows() != dim || basis_q.cols() != dim {
            return Err(Error::DimMismatch {
                expected: dim,
                actual: basis_q.rows(),
            });
        }
        let tol_unit = Tolerances::<T>::default().unit;
        let dev = basis_q.unitary_deviation();
        if dev > tol_unit {
            return Err(Error::NotUnitary {
                deviation: dev.to_f64().unwrap_or(f64::NAN),
                tolerance: tol_unit.to_f64().unwrap_or(f64::NAN),
            });
        }
        let mask = build_mask(dim, &components);
        let rho = components
            .iter()
            .map(|c| r::<T>((c.multiplicity * c.block_size * c.block_size) as f64))
            .fold(T::zero(), |a, b| a + b)
            / r::<T>((dim * dim) as f64);
        let delta = components
            .iter()
            .map(|c| r::<T>(c.block_size as f64) / r::<T>(c.multiplicity as f64))
            .fold(T::zero(), |a, b| if b > a { b } else { a })
            / r::<T>(dim as f64);
        Ok(StructureInfo {
            dim,
            components,
            basis_q,
            rho,
            delta,
            mask,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of isotypic components `m`.
    pub fn m(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn basis_q(&self) -> &CMat<T> {
        &self.basis_q
    }

    /// Sparsity factor `ρ(G) = Σ p_i s_i² / p²`.
    pub fn rho(&self) -> T {
        self.rho
    }

    /// Degrees-of-freedom factor `δ(G) = max_i(s_i/p_i) / p`.
    pub fn delta(&self) -> T {
        self.delta
    }

    /// Block-diagonal sparsity pattern in `basis_q` coordinates.
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn mask_at(&self, i: usize, j: usize) -> bool {
        self.mask[i * self.dim + j]
    }

    /// Least `n` with `n > δ(G)·p`, computed in exact integer arithmetic
    /// (`δ(G)·p = max_i s_i/p_i` is rational).
    pub fn min_samples(&self) -> usize {
        self.components
            .iter()
            .map(|c| c.block_size / c.multiplicity + 1)
            .max()
            .unwrap_or(1)
    }

    /// Start offset of each component in the basis ordering.
    pub fn component_offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(self.components.len());
        let mut acc = 0;
        for c in &self.components {
            offsets.push(acc);
            acc += c.span();
        }
        offsets
    }

    /// Sorted multiset of `(p_i, s_i)` pairs, for structure comparison.
    pub fn component_multiset(&self) -> Vec<(usize, usize)> {
        let mut v: Vec<(usize, usize)> = self
            .components
            .iter()
            .map(|c| (c.multiplicity, c.block_size))
            .collect();
        v.sort_unstable();
        v
    }

    /// Measures how well a Hermitian matrix fits the replicated block shape in this
    /// basis: returns `(off_mask, block_spread)` where `off_mask` is the
    /// Frobenius mass outside the mask and `block_spread` the worst
    /// deviation between the repeated copies of a component block.
    pub fn structure_deviation(&self, m: &CMat<T>) -> Result<(T, T)> {
        if m.rows() != self.dim || m.cols() != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                actual: m.rows(),
            });
        }
        let b = self.basis_q.adjoint().matmul(m).matmul(&self.basis_q);
        let mut off = T::zero();
        for i in 0..self.dim {
            for j in 0..self.dim {
                if !self.mask_at(i, j) {
                    off += b[(i, j)].norm_sqr();
                }
            }
        }
        let mut spread = T::zero();
        for (c, offset) in self.components.iter().zip(self.component_offsets()) {
            let s = c.block_size;
            for copy in 1..c.multiplicity {
                let base = offset;
                let other = offset + copy * s;
                for bi in 0..s {
                    for bj in 0..s {
                        let diff = b[(base + bi, base + bj)] - b[(other + bi, other + bj)];
                        let d = diff.norm();
                        if d > spread {
                            spread = d;
                        }
                    }
                }
            }
        }
        Ok((off.sqrt(), spread))
    }
}

fn build_mask(dim: usize, components: &[Component]) -> Vec<bool> {
    let mut mask = vec![false; dim * dim];
    let mut offset = 0;
    for c in components {
        for copy in 0..c.multiplicity {
            let base = offset + copy * c.block_size;
            for i in 0..c.block_size {
                for j in 0..c.block_size {
                    mask[(base + i) * dim + (base + j)] = true;
                }
            }
        }
        offset += c.span();
    }
    mask
}

/// Reynolds operator: orthogonal projection of `M` onto the commutant,
/// realized as the average of conjugates over the group.
pub fn reynolds_project<T: Scalar>(m: &CMat<T>, group: &GroupSpec<T>) -> Result<CMat<T>> {
    if !m.is_square() || m.rows() != group.dim() {
        return Err(Error::DimMismatch {
            expected: group.dim(),
            actual: m.rows(),
        });
    }
    let p = group.dim();
    let mut acc = CMat::<T>::zeros(p, p);
    for k in group.elements() {
        acc = acc.add(&m.conjugate_by(k.matrix()));
    }
    Ok(acc.scale(T::one() / r::<T>(group.order() as f64)))
}

/// The normalized FFT matrix `Q[r][c] = e^{2πi·rc/p} / √p`.
pub fn fft_matrix<T: Scalar>(p: usize) -> CMat<T> {
    let inv_sqrt = T::one() / r::<T>(p as f64).sqrt();
    let two_pi = T::PI() + T::PI();
    CMat::from_fn(p, p, |row, col| {
        let k = (row * col) % p;
        let angle = two_pi * r::<T>(k as f64) / r::<T>(p as f64);
        Complex::from_polar(inv_sqrt, angle)
    })
}

/// Analytic structure for the built-in symmetry classes.
pub fn builtin_structure<T: Scalar>(kind: GroupKind, p: usize) -> Result<StructureInfo<T>> {
    if p == 0 {
        return Err(Error::UnsupportedSize {
            kind: kind.name(),
            p,
            detail: " (p must be positive)".into(),
        });
    }
    let (components, q) = match kind {
        GroupKind::Trivial => (vec![Component::new(1, p)], CMat::<T>::identity(p)),
        GroupKind::Circulant => (vec![Component::new(1, 1); p], fft_matrix::<T>(p)),
        GroupKind::BlockCirculant { d } => {
            if d == 0 || !p.is_multiple_of(d) {
                return Err(Error::UnsupportedSize {
                    kind: kind.name(),
                    p,
                    detail: format!(" (d = {d} must divide p)"),
                });
            }
            let blocks = p / d;
            (
                vec![Component::new(1, d); blocks],
                fft_matrix::<T>(blocks).kron(&CMat::identity(d)),
            )
        }
        GroupKind::Permutation => {
            // Same practicality cap as the group construction.
            let mut acc: usize = 1;
            for k in 2..=p {
                acc = match acc.checked_mul(k) {
                    Some(v) if v <= crate::matgroup::DEFAULT_MAX_ORDER => v,
                    _ => {
                        return Err(Error::ClosureOverflow {
                            max_order: crate::matgroup::DEFAULT_MAX_ORDER,
                        })
                    }
                };
            }
            let mut comps = vec![Component::new(1, 1)];
            if p > 1 {
                comps.push(Component::new(p - 1, 1));
            }
            // e/√p followed by the non-constant FFT columns (all ⊥ e).
            let fft = fft_matrix::<T>(p);
            (comps, fft)
        }
        GroupKind::Perhermitian => {
            if !p.is_multiple_of(2) {
                return Err(Error::UnsupportedSize {
                    kind: kind.name(),
                    p,
                    detail: " (block form requires even p)".into(),
                });
            }
            let h = p / 2;
            let inv_sqrt2 = T::one() / r::<T>(2.0).sqrt();
            // Q_p = 1/√2 [[I, I], [J, −J]]: columns are the ±1 eigenvectors
            // of the exchange matrix.
            let q = CMat::from_fn(p, p, |row, col| {
                let plus = col < h;
                let c = col % h;
                if row < h {
                    if row == c {
                        Complex::new(inv_sqrt2, T::zero())
                    } else {
                        C::<T>::zero()
                    }
                } else {
                    // Lower block: J on the first half, −J on the second.
                    let rr = row - h;
                    if rr == h - 1 - c {
                        let sign = if plus { inv_sqrt2 } else { -inv_sqrt2 };
                        Complex::new(sign, T::zero())
                    } else {
                        C::<T>::zero()
                    }
                }
            });
            (vec![Component::new(1, h), Component::new(1, h)], q)
        }
        GroupKind::ProperQuaternion => {
            if !p.is_multiple_of(2) {
                return Err(Error::UnsupportedSize {
                    kind: kind.name(),
                    p,
                    detail: " (requires even p)".into(),
                });
            }
            let h = p / 2;
            let inv_sqrt2 = T::one() / r::<T>(2.0).sqrt();
            let corner = CMat::from_fn(2, 2, |i, j| match (i, j) {
                (0, 0) => Complex::new(inv_sqrt2, T::zero()),
                (0, 1) => Complex::new(-inv_sqrt2, T::zero()),
                _ => Complex::new(T::zero(), inv_sqrt2),
            });
            let q = corner.kron(&CMat::identity(h));
            (vec![Component::new(1, h), Component::new(1, h)], q)
        }
        GroupKind::Equicorrelation { k } => {
            if k < 2 || k > p {
                return Err(Error::UnsupportedSize {
                    kind: kind.name(),
                    p,
                    detail: format!(" (k = {k} must satisfy 2 <= k <= p)"),
                });
            }
            let fft_k = fft_matrix::<T>(k);
            let q = CMat::from_fn(p, p, |row, col| {
                if col < k {
                    if row < k {
                        fft_k[(row, col)]
                    } else {
                        C::<T>::zero()
                    }
                } else if row == col {
                    Complex::new(T::one(), T::zero())
                } else {
                    C::<T>::zero()
                }
            });
            let mut comps = vec![Component::new(1, 1)];
            if k > 1 {
                comps.push(Component::new(k - 1, 1));
            }
            for _ in k..p {
                comps.push(Component::new(1, 1));
            }
            (comps, q)
        }
    };
    StructureInfo::new(p, components, q)
}

/// Transforms into the structure basis, zeroes the off-mask entries, and
/// transforms back. Idempotent; leaves G-invariant matrices unchanged.
pub fn mask_project<T: Scalar>(m: &CMat<T>, s: &StructureInfo<T>) -> Result<CMat<T>> {
    if m.rows() != s.dim() || m.cols() != s.dim() {
        return Err(Error::DimMismatch {
            expected: s.dim(),
            actual: m.rows(),
        });
    }
    let q = s.basis_q();
    let mut b = q.adjoint().matmul(m).matmul(q);
    for i in 0..s.dim() {
        for j in 0..s.dim() {
            if !s.mask_at(i, j) {
                b[(i, j)] = C::<T>::zero();
            }
        }
    }
    Ok(q.matmul(&b).matmul(&q.adjoint()))
}

/// Geodesic `M_t = M0^{1/2} (M0^{-1/2} M1 M0^{-1/2})^t M0^{1/2}` of the
/// positive definite cone.
pub fn geodesic<T: Scalar>(m0: &CMat<T>, m1: &CMat<T>, t: T) -> Result<CMat<T>> {
    if m0.rows() != m1.rows() || m0.cols() != m1.cols() || !m0.is_square() {
        return Err(Error::DimMismatch {
            expected: m0.rows(),
            actual: m1.rows(),
        });
    }
    if t < T::zero() || t > T::one() {
        return Err(Error::InvalidParameter(format!(
            "geodesic parameter t = {t} outside [0, 1]"
        )));
    }
    let half = r::<T>(0.5);
    let root = herm_pow(m0, half)?;
    let inv_root = herm_pow(m0, -half)?;
    let inner = inv_root.matmul(m1).matmul(&inv_root).hermitize();
    let powered = herm_pow(&inner, t)?;
    Ok(root.matmul(&powered).matmul(&root).hermitize())
}

/// Numeric rank of the Reynolds-averaged sample covariance, per component
/// and in total.
pub fn orbit_span_rank<T: Scalar>(
    x: &SampleSet<T>,
    group: &GroupSpec<T>,
    s: &StructureInfo<T>,
) -> Result<(Vec<usize>, usize)> {
    if x.n() == 0 {
        return Err(Error::InvalidParameter("empty sample set".into()));
    }
    if x.dim() != group.dim() || x.dim() != s.dim() {
        return Err(Error::DimMismatch {
            expected: group.dim(),
            actual: x.dim(),
        });
    }
    let tol = Tolerances::<T>::default().rank;
    let scm = x.sample_covariance();
    let projected = reynolds_project(&scm, group)?;
    let total = hermitian_rank(&projected, tol);

    let q = s.basis_q();
    let b = q.adjoint().matmul(&projected).matmul(q);
    let mut per_component = Vec::with_capacity(s.m());
    for (c, offset) in s.components().iter().zip(s.component_offsets()) {
        let span = c.span();
        let block = CMat::from_fn(span, span, |i, j| b[(offset + i, offset + j)]);
        per_component.push(hermitian_rank(&block, tol));
    }
    Ok((per_component, total))
}

/// Expected rank of the Reynolds-averaged sample covariance for `n` generic
/// samples: `Σ p_i · min(s_i, n·p_i)`.
pub fn expected_orbit_rank<T: Scalar>(s: &StructureInfo<T>, n: usize) -> usize {
    s.components()
        .iter()
        .map(|c| c.multiplicity * c.block_size.min(n * c.multiplicity))
        .sum()
}

/// Numerical commutant discovery from two seeded Reynolds projections.
///
/// Eigenvalues of the first projection cluster into eigenspaces (gap > tol);
/// the second projection links eigenspaces of the same isotypic component;
/// its action also aligns bases across linked eigenspaces so invariant
/// matrices take the `I_{p_i} ⊗ B_i` form in the returned basis.
pub fn discover_structure<T: Scalar>(
    group: &GroupSpec<T>,
    seed: u64,
    tol: T,
) -> Result<StructureInfo<T>> {
    if tol <= T::zero() {
        return Err(Error::InvalidParameter("tol must be positive".into()));
    }
    let p = group.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random_herm = |rng: &mut ChaCha8Rng| {
        let raw = CMat::from_fn(p, p, |_, _| {
            Complex::new(
                r::<T>(rng.gen::<f64>() * 2.0 - 1.0),
                r::<T>(rng.gen::<f64>() * 2.0 - 1.0),
            )
        });
        raw.hermitize()
    };
    let r1 = reynolds_project(&random_herm(&mut rng), group)?.hermitize();
    let r2 = reynolds_project(&random_herm(&mut rng), group)?.hermitize();

    let eig = hermitian_eig(&r1);

    // Cluster eigenvalues by gaps.
    let mut clusters: Vec<Vec<usize>> = vec![vec![0]];
    for i in 1..p {
        let gap = eig.values[i] - eig.values[i - 1];
        if gap > tol {
            clusters.push(vec![i]);
        } else {
            if gap > tol / r::<T>(10.0) {
                return Err(Error::DegenerateSpectrum {
                    gap: gap.to_f64().unwrap_or(f64::NAN),
                    tolerance: tol.to_f64().unwrap_or(f64::NAN),
                });
            }
            clusters.last_mut().unwrap().push(i);
        }
    }
    let n_clusters = clusters.len();

    // Link clusters through the second projection.
    let c2 = eig.vectors.adjoint().matmul(&r2).matmul(&eig.vectors);
    let linked = |a: &Vec<usize>, b: &Vec<usize>| -> bool {
        let mut mass = T::zero();
        for &i in a {
            for &j in b {
                mass += c2[(i, j)].norm_sqr();
            }
        }
        mass.sqrt() > tol
    };
    let mut component_of: Vec<Option<usize>> = vec![None; n_clusters];
    let mut component_clusters: Vec<Vec<usize>> = Vec::new();
    for start in 0..n_clusters {
        if component_of[start].is_some() {
            continue;
        }
        let comp_id = component_clusters.len();
        let mut members = vec![start];
        component_of[start] = Some(comp_id);
        let mut frontier = vec![start];
        while let Some(cur) = frontier.pop() {
            for other in 0..n_clusters {
                if component_of[other].is_none() && linked(&clusters[cur], &clusters[other]) {
                    component_of[other] = Some(comp_id);
                    members.push(other);
                    frontier.push(other);
                }
            }
        }
        members.sort_unstable();
        component_clusters.push(members);
    }

    // Validate multiplicities and align bases within each component.
    let mut basis = eig.vectors.clone();
    let mut components = Vec::with_capacity(component_clusters.len());
    let mut ordered_columns: Vec<usize> = Vec::with_capacity(p);
    for members in &component_clusters {
        let dims: Vec<usize> = members.iter().map(|&c| clusters[c].len()).collect();
        let mult = dims[0];
        if dims.iter().any(|&d| d != mult) {
            return Err(Error::InconsistentMultiplicity { found: dims });
        }
        let s_i = members.len();
        components.push(Component::new(mult, s_i));

        // Align each cluster's basis to the first cluster along a BFS tree
        // of the link graph, using the unitary polar factor of the cross
        // operator under R2.
        if mult > 1 && s_i > 1 {
            let mut aligned = vec![false; s_i];
            aligned[0] = true;
            let mut frontier = vec![0usize];
            while let Some(cur) = frontier.pop() {
                for next in 0..s_i {
                    if aligned[next] || !linked(&clusters[members[cur]], &clusters[members[next]]) {
                        continue;
                    }
                    let cross = cross_operator(
                        &basis,
                        &r2,
                        &clusters[members[cur]],
                        &clusters[members[next]],
                    );
                    let u = unitary_polar_factor(&cross, tol)?;
                    apply_alignment(&mut basis, &clusters[members[next]], &u);
                    aligned[next] = true;
                    frontier.push(next);
                }
            }
            if aligned.iter().any(|a| !a) {
                // Link graph should connect a component by construction.
                return Err(Error::DegenerateSpectrum {
                    gap: 0.0,
                    tolerance: tol.to_f64().unwrap_or(f64::NAN),
                });
            }
        }

        // Basis columns ordered as p_i groups of s_i: group g takes the g-th
        // vector of every cluster, giving the I_{p_i} ⊗ B_i layout.
        for g in 0..mult {
            for &cl in members {
                ordered_columns.push(clusters[cl][g]);
            }
        }
    }

    let mut q = CMat::<T>::zeros(p, p);
    for (dst, &src) in ordered_columns.iter().enumerate() {
        let col = basis.col(src);
        q.set_col(dst, &col);
    }
    let info = StructureInfo::new(p, components, q)?;

    // Self-check against a third projected random matrix; an ambiguous
    // clustering that slipped through shows up here.
    let r3 = reynolds_project(&random_herm(&mut rng), group)?.hermitize();
    let (off, spread) = info.structure_deviation(&r3)?;
    let scale = r3.frob_norm().max(T::one());
    let budget = Tolerances::<T>::default().structure;
    if off > budget * scale || spread > budget * scale {
        return Err(Error::DegenerateSpectrum {
            gap: off.to_f64().unwrap_or(f64::NAN),
            tolerance: budget.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(info)
}

/// `V_aᴴ R V_b` restricted to two eigenvalue clusters.
fn cross_operator<T: Scalar>(
    basis: &CMat<T>,
    op: &CMat<T>,
    rows: &[usize],
    cols: &[usize],
) -> CMat<T> {
    let m = rows.len();
    let n = cols.len();
    let full = basis.adjoint().matmul(op).matmul(basis);
    CMat::from_fn(m, n, |i, j| full[(rows[i], cols[j])])
}

/// Unitary polar factor `U = T (TᴴT)^{-1/2}`.
fn unitary_polar_factor<T: Scalar>(t: &CMat<T>, tol: T) -> Result<CMat<T>> {
    let gram = t.adjoint().matmul(t).hermitize();
    let eig = hermitian_eig(&gram);
    if eig.min_value() <= tol * tol {
        return Err(Error::DegenerateSpectrum {
            gap: eig.min_value().to_f64().unwrap_or(f64::NAN),
            tolerance: (tol * tol).to_f64().unwrap_or(f64::NAN),
        });
    }
    let inv_sqrt = eig.apply_fn(|x| T::one() / x.sqrt());
    Ok(t.matmul(&inv_sqrt))
}

/// Replaces the cluster's columns `V_b` by `V_b · Uᴴ`.
fn apply_alignment<T: Scalar>(basis: &mut CMat<T>, cols: &[usize], u: &CMat<T>) {
    let p = basis.rows();
    let k = cols.len();
    let old: Vec<Vec<C<T>>> = cols.iter().map(|&c| basis.col(c)).collect();
    for (new_idx, &dst) in cols.iter().enumerate() {
        // new column new_idx = Σ_m old_m · (Uᴴ)[m, new_idx] = Σ_m old_m · conj(U[new_idx, m])
        let mut col = vec![C::<T>::zero(); p];
        for (m, old_col) in old.iter().enumerate().take(k) {
            let w = u[(new_idx, m)].conj();
            if w.is_zero() {
                continue;
            }
            for (dstv, &src) in col.iter_mut().zip(old_col.iter()) {
                *dstv += src * w;
            }
        }
        basis.set_col(dst, &col);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matgroup::builtin_group;

    fn random_hermitian(p: usize, seed: u64) -> CMat<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CMat::from_fn(p, p, |_, _| {
            Complex::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        })
        .hermitize()
    }

    #[test]
    fn reynolds_identity_is_fixed() {
        let g = builtin_group::<f64>(GroupKind::Circulant, 5).unwrap();
        let eye = CMat::<f64>::identity(5);
        let proj = reynolds_project(&eye, &g).unwrap();
        assert!(proj.frob_dist(&eye) < 1e-14);
    }

    #[test]
    fn reynolds_trivial_group_is_identity_map() {
        let g = builtin_group::<f64>(GroupKind::Trivial, 4).unwrap();
        let m = random_hermitian(4, 1);
        let proj = reynolds_project(&m, &g).unwrap();
        assert_eq!(proj.frob_dist(&m), 0.0);
    }

    #[test]
    fn reynolds_rank_one_circulant_average() {
        // e1 e1ᴴ averaged over the cyclic shifts visits every coordinate:
        // the result is I/p.
        let p = 4;
        let g = builtin_group::<f64>(GroupKind::Circulant, p).unwrap();
        let mut m = CMat::<f64>::zeros(p, p);
        m[(0, 0)] = Complex::new(1.0, 0.0);
        let proj = reynolds_project(&m, &g).unwrap();
        let expected = CMat::<f64>::identity(p).scale(0.25);
        assert!(proj.frob_dist(&expected) < 1e-14);
    }

    #[test]
    fn reynolds_is_idempotent_and_self_adjoint() {
        let p = 6;
        let g = builtin_group::<f64>(GroupKind::Perhermitian, p).unwrap();
        let a = random_hermitian(p, 2);
        let b = random_hermitian(p, 3);
        let pa = reynolds_project(&a, &g).unwrap();
        let ppa = reynolds_project(&pa, &g).unwrap();
        assert!(pa.frob_dist(&ppa) < 1e-12);
        // Tr(A·Π(B)) = Tr(Π(A)·B)
        let pb = reynolds_project(&b, &g).unwrap();
        let lhs = a.matmul(&pb).trace_re();
        let rhs = pa.matmul(&b).trace_re();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn builtin_structure_factors_match_contract() {
        let s = builtin_structure::<f64>(GroupKind::Circulant, 8).unwrap();
        assert_eq!(s.m(), 8);
        assert!((s.rho() - 0.125).abs() < 1e-15);
        assert!((s.delta() - 0.125).abs() < 1e-15);

        let s = builtin_structure::<f64>(GroupKind::Perhermitian, 8).unwrap();
        assert_eq!(s.m(), 2);
        assert!((s.rho() - 0.5).abs() < 1e-15);
        assert!((s.delta() - 0.5).abs() < 1e-15);

        let s = builtin_structure::<f64>(GroupKind::BlockCirculant { d: 2 }, 8).unwrap();
        assert!((s.rho() - 0.25).abs() < 1e-15);
        assert!((s.delta() - 0.25).abs() < 1e-15);

        let s = builtin_structure::<f64>(GroupKind::ProperQuaternion, 8).unwrap();
        assert_eq!(s.m(), 2);
        assert!((s.rho() - 0.5).abs() < 1e-15);
        assert!((s.delta() - 0.5).abs() < 1e-15);

        let s = builtin_structure::<f64>(GroupKind::Permutation, 6).unwrap();
        assert_eq!(s.m(), 2);
        assert!((s.rho() - 1.0 / 6.0).abs() < 1e-15);
        assert!((s.delta() - 1.0 / 6.0).abs() < 1e-15);

        let s = builtin_structure::<f64>(GroupKind::Trivial, 3).unwrap();
        assert_eq!(s.m(), 1);
        assert_eq!(s.rho(), 1.0);
        assert_eq!(s.delta(), 1.0);
    }

    #[test]
    fn builtin_structures_block_diagonalize_invariant_matrices() {
        for (kind, p) in [
            (GroupKind::Trivial, 5),
            (GroupKind::Circulant, 6),
            (GroupKind::BlockCirculant { d: 2 }, 6),
            (GroupKind::Permutation, 5),
            (GroupKind::Perhermitian, 6),
            (GroupKind::ProperQuaternion, 6),
            (GroupKind::Equicorrelation { k: 3 }, 6),
        ] {
            let g = builtin_group::<f64>(kind, p).unwrap();
            let s = builtin_structure::<f64>(kind, p).unwrap();
            for seed in 0..3u64 {
                let m = random_hermitian(p, seed);
                let proj = reynolds_project(&m, &g).unwrap();
                let (off, spread) = s.structure_deviation(&proj).unwrap();
                assert!(
                    off < 1e-10 && spread < 1e-10,
                    "{} p={p} seed={seed}: off={off:e} spread={spread:e}",
                    kind.name()
                );
            }
        }
    }

    #[test]
    fn min_samples_exact_arithmetic() {
        let s = builtin_structure::<f64>(GroupKind::Circulant, 8).unwrap();
        assert_eq!(s.min_samples(), 2);
        let s = builtin_structure::<f64>(GroupKind::ProperQuaternion, 8).unwrap();
        assert_eq!(s.min_samples(), 5);
        let s = builtin_structure::<f64>(GroupKind::Trivial, 7).unwrap();
        assert_eq!(s.min_samples(), 8);
    }

    #[test]
    fn discovery_matches_builtin_parameters() {
        for (kind, p) in [
            (GroupKind::Circulant, 4),
            (GroupKind::Trivial, 3),
            (GroupKind::Perhermitian, 4),
            (GroupKind::ProperQuaternion, 6),
            (GroupKind::BlockCirculant { d: 2 }, 6),
            (GroupKind::Permutation, 4),
            (GroupKind::Equicorrelation { k: 2 }, 5),
        ] {
            let g = builtin_group::<f64>(kind, p).unwrap();
            let b = builtin_structure::<f64>(kind, p).unwrap();
            let d = discover_structure(&g, 17, 1e-6).unwrap();
            assert_eq!(d.m(), b.m(), "{} p={p}", kind.name());
            assert_eq!(
                d.component_multiset(),
                b.component_multiset(),
                "{} p={p}",
                kind.name()
            );
            assert_eq!(d.rho(), b.rho());
            assert_eq!(d.delta(), b.delta());
        }
    }

    #[test]
    fn discovered_basis_block_diagonalizes() {
        let g = builtin_group::<f64>(GroupKind::Perhermitian, 6).unwrap();
        let s = discover_structure(&g, 5, 1e-6).unwrap();
        let m = random_hermitian(6, 33);
        let proj = reynolds_project(&m, &g).unwrap();
        let (off, spread) = s.structure_deviation(&proj).unwrap();
        assert!(
            off < 1e-10 && spread < 1e-10,
            "off={off:e} spread={spread:e}"
        );
    }

    #[test]
    fn mask_project_is_idempotent_and_fixes_invariants() {
        let p = 4;
        let g = builtin_group::<f64>(GroupKind::Circulant, p).unwrap();
        let s = builtin_structure::<f64>(GroupKind::Circulant, p).unwrap();
        let m = random_hermitian(p, 9);
        let once = mask_project(&m, &s).unwrap();
        let twice = mask_project(&once, &s).unwrap();
        assert!(once.frob_dist(&twice) < 1e-12);

        let invariant = reynolds_project(&m, &g).unwrap();
        let projected = mask_project(&invariant, &s).unwrap();
        assert!(projected.frob_dist(&invariant) < 1e-10);
    }

    #[test]
    fn trivial_mask_is_identity_map() {
        let p = 4;
        let s = builtin_structure::<f64>(GroupKind::Trivial, p).unwrap();
        assert!(s.mask().iter().all(|&b| b));
        let m = random_hermitian(p, 44);
        let projected = mask_project(&m, &s).unwrap();
        assert!(m.frob_dist(&projected) < 1e-12);
    }

    #[test]
    fn mask_project_oracle_entrywise_fft() {
        // M = e1 e2ᴴ + e2 e1ᴴ with circulant structure: compare against a
        // direct entrywise computation in the FFT basis.
        let p = 4;
        let s = builtin_structure::<f64>(GroupKind::Circulant, p).unwrap();
        let mut m = CMat::<f64>::zeros(p, p);
        m[(0, 1)] = Complex::new(1.0, 0.0);
        m[(1, 0)] = Complex::new(1.0, 0.0);
        let got = mask_project(&m, &s).unwrap();

        // Oracle: B = QᴴMQ entrywise, keep the diagonal, transform back.
        let q = fft_matrix::<f64>(p);
        let mut b = CMat::<f64>::zeros(p, p);
        for i in 0..p {
            for j in 0..p {
                let mut acc = Complex::new(0.0, 0.0);
                for a in 0..p {
                    for c in 0..p {
                        acc += q[(a, i)].conj() * m[(a, c)] * q[(c, j)];
                    }
                }
                if i == j {
                    b[(i, j)] = acc;
                }
            }
        }
        let mut expected = CMat::<f64>::zeros(p, p);
        for i in 0..p {
            for j in 0..p {
                let mut acc = Complex::new(0.0, 0.0);
                for a in 0..p {
                    acc += q[(i, a)] * b[(a, a)] * q[(j, a)].conj();
                }
                expected[(i, j)] = acc;
            }
        }
        assert!(got.frob_dist(&expected) < 1e-12);
    }

    #[test]
    fn geodesic_endpoints_and_commuting_case() {
        let p = 3;
        let m = random_hermitian(p, 21).add(&CMat::identity(p).scale(5.0));
        let g0 = geodesic(&m, &m, 0.5).unwrap();
        assert!(g0.frob_dist(&m) < 1e-12);

        // Commuting case: geodesic from I to diagonal D is D^t elementwise.
        let d = CMat::from_fn(p, p, |i, j| {
            if i == j {
                Complex::new((i + 1) as f64, 0.0)
            } else {
                Complex::new(0.0, 0.0)
            }
        });
        let eye = CMat::<f64>::identity(p);
        let gt = geodesic(&eye, &d, 0.3).unwrap();
        for i in 0..p {
            let expected = ((i + 1) as f64).powf(0.3);
            assert!((gt[(i, i)].re - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn geodesic_rejects_indefinite_input() {
        let mut d = CMat::<f64>::identity(3);
        d[(0, 0)] = Complex::new(-2.0, 0.0);
        let eye = CMat::<f64>::identity(3);
        assert!(matches!(
            geodesic(&d, &eye, 0.5),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn expected_rank_formula() {
        let s = builtin_structure::<f64>(GroupKind::Perhermitian, 4).unwrap();
        // components: two (1, 2): rank = Σ 1·min(2, n·1)
        assert_eq!(expected_orbit_rank(&s, 1), 2);
        assert_eq!(expected_orbit_rank(&s, 2), 4);
        let s = builtin_structure::<f64>(GroupKind::Circulant, 4).unwrap();
        assert_eq!(expected_orbit_rank(&s, 1), 4);
    }
}
