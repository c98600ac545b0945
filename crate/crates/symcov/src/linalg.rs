//! Dense complex linear algebra for small Hermitian problems.
//!
//! The toolkit works with p ≤ a few dozen, so everything here is a
//! straightforward dense implementation: row-major storage, textbook
//! matrix products, and a cyclic complex Jacobi eigensolver for Hermitian
//! matrices. Jacobi is slower than tridiagonalization but is simple,
//! deterministic, and accurate to machine precision at these sizes, which
//! is what the structure-discovery and fixed-point code needs.

use crate::error::{Error, Result};
use crate::scalar::{r, Scalar, C};
use num_traits::{One, Zero};
use std::ops::{Index, IndexMut};

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat<T> {
    rows: usize,
    cols: usize,
    data: Vec<C<T>>,
}

impl<T: Scalar> CMat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            rows,
            cols,
            data: vec![C::<T>::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C::<T>::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds a matrix from rows of `[re, im]` pairs.
    pub fn from_rows(rows: &[Vec<[f64; 2]>]) -> Self {
        let nr = rows.len();
        let nc = if nr == 0 { 0 } else { rows[0].len() };
        Self::from_fn(nr, nc, |i, j| C::new(r(rows[i][j][0]), r(rows[i][j][1])))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Dimension of a square matrix.
    pub fn dim(&self) -> usize {
        debug_assert_eq!(self.rows, self.cols);
        self.rows
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C<T>] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<C<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_col(&mut self, j: usize, v: &[C<T>]) {
        debug_assert_eq!(v.len(), self.rows);
        for i in 0..self.rows {
            self[(i, j)] = v[i];
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].conj())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a += *b;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a -= *b;
        }
        out
    }

    pub fn scale(&self, s: T) -> Self {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a = a.scale(s);
        }
        out
    }

    pub fn scale_c(&self, s: C<T>) -> Self {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= s;
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                let row_k = other.row(k);
                let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, b) in out_row.iter_mut().zip(row_k.iter()) {
                    *o += a * *b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[C<T>]) -> Vec<C<T>> {
        assert_eq!(self.cols, x.len(), "matvec dimension mismatch");
        (0..self.rows)
            .map(|i| {
                let mut acc = C::<T>::zero();
                for (a, b) in self.row(i).iter().zip(x.iter()) {
                    acc += *a * *b;
                }
                acc
            })
            .collect()
    }

    pub fn trace(&self) -> C<T> {
        let mut acc = C::<T>::zero();
        for i in 0..self.rows.min(self.cols) {
            acc += self[(i, i)];
        }
        acc
    }

    pub fn frob_norm(&self) -> T {
        self.data
            .iter()
            .map(|z| z.norm_sqr())
            .fold(T::zero(), |a, b| a + b)
            .sqrt()
    }

    pub fn frob_dist(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (*a - *b).norm_sqr())
            .fold(T::zero(), |a, b| a + b)
            .sqrt()
    }

    /// Frobenius inner product `Tr(selfᴴ · other)`.
    pub fn frob_inner(&self, other: &Self) -> C<T> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut acc = C::<T>::zero();
        for (a, b) in self.data.iter().zip(other.data.iter()) {
            acc += a.conj() * *b;
        }
        acc
    }

    /// Hermitian part `(A + Aᴴ)/2`.
    pub fn hermitize(&self) -> Self {
        assert!(self.is_square());
        let half = r::<T>(0.5);
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()).scale(half)
        })
    }

    pub fn hermitian_deviation(&self) -> T {
        self.frob_dist(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.is_square() && self.hermitian_deviation() <= tol
    }

    /// Deviation from unitarity `‖AᴴA − I‖_F`.
    pub fn unitary_deviation(&self) -> T {
        let gram = self.adjoint().matmul(self);
        gram.frob_dist(&Self::identity(self.cols))
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (ra, ca) = (self.rows, self.cols);
        let (rb, cb) = (other.rows, other.cols);
        Self::from_fn(ra * rb, ca * cb, |i, j| {
            self[(i / rb, j / cb)] * other[(i % rb, j % cb)]
        })
    }

    /// Conjugation `K · self · Kᴴ`.
    pub fn conjugate_by(&self, k: &Self) -> Self {
        k.matmul(self).matmul(&k.adjoint())
    }

    pub fn max_abs_entry(&self) -> T {
        self.data
            .iter()
            .map(|z| z.norm())
            .fold(T::zero(), |a, b| if b > a { b } else { a })
    }

    /// Real part of the trace; Hermitian matrices have real trace.
    pub fn trace_re(&self) -> T {
        self.trace().re
    }

    /// Accumulates `w · x xᴴ` into `self`.
    pub fn add_scaled_outer(&mut self, w: T, x: &[C<T>]) {
        debug_assert_eq!(self.rows, x.len());
        for i in 0..self.rows {
            let xi = x[i];
            let row = &mut self.data[i * self.cols..(i + 1) * self.cols];
            for (o, xj) in row.iter_mut().zip(x.iter()) {
                *o += (xi * xj.conj()).scale(w);
            }
        }
    }

    /// Accumulates `w · other` into `self`.
    pub fn add_scaled(&mut self, w: T, other: &Self) {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += b.scale(w);
        }
    }
}

impl<T: Scalar> Index<(usize, usize)> for CMat<T> {
    type Output = C<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T: Scalar> IndexMut<(usize, usize)> for CMat<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<T> {
        &mut self.data[i * self.cols + j]
    }
}

/// Vector helpers.
pub fn vdot<T: Scalar>(x: &[C<T>], y: &[C<T>]) -> C<T> {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = C::<T>::zero();
    for (a, b) in x.iter().zip(y.iter()) {
        acc += a.conj() * *b;
    }
    acc
}

pub fn vnorm<T: Scalar>(x: &[C<T>]) -> T {
    x.iter()
        .map(|z| z.norm_sqr())
        .fold(T::zero(), |a, b| a + b)
        .sqrt()
}

/// Outer product `x xᴴ`.
pub fn outer<T: Scalar>(x: &[C<T>]) -> CMat<T> {
    let n = x.len();
    CMat::from_fn(n, n, |i, j| x[i] * x[j].conj())
}

/// Eigendecomposition of a Hermitian matrix: `A = V diag(values) Vᴴ`,
/// eigenvalues ascending, eigenvectors in the columns of `vectors`.
#[derive(Clone, Debug)]
pub struct HermEig<T> {
    pub values: Vec<T>,
    pub vectors: CMat<T>,
}

/// Cyclic complex Jacobi eigensolver for Hermitian matrices.
///
/// The input is symmetrized first, so slight Hermitian deviations are
/// tolerated. Deterministic: fixed sweep order, fixed tie-breaking.
pub fn hermitian_eig<T: Scalar>(m: &CMat<T>) -> HermEig<T> {
    assert!(m.is_square(), "hermitian_eig requires a square matrix");
    let n = m.dim();
    let mut a = m.hermitize();
    let mut v = CMat::<T>::identity(n);

    if n <= 1 {
        return HermEig {
            values: (0..n).map(|i| a[(i, i)].re).collect(),
            vectors: v,
        };
    }

    let scale = a.frob_norm();
    if scale.is_zero() {
        return HermEig {
            values: vec![T::zero(); n],
            vectors: v,
        };
    }
    let stop = T::epsilon() * scale * r::<T>(n as f64);
    let max_sweeps = 60;

    for _ in 0..max_sweeps {
        // Off-diagonal mass.
        let mut off = T::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[(i, j)].norm_sqr();
            }
        }
        if off.sqrt() <= stop {
            break;
        }
        for i in 0..n - 1 {
            for j in (i + 1)..n {
                let g = a[(i, j)];
                let gn = g.norm();
                if gn <= T::epsilon() * scale {
                    continue;
                }
                let alpha = a[(i, i)].re;
                let beta = a[(j, j)].re;
                // Phase that makes the pivot real: u = g/|g|.
                let u = g.unscale(gn);
                // Real Jacobi angle for [[alpha, |g|], [|g|, beta]].
                let zeta = (beta - alpha) / (gn + gn);
                let t = {
                    let denom = zeta.abs() + (T::one() + zeta * zeta).sqrt();
                    let tt = T::one() / denom;
                    if zeta >= T::zero() {
                        tt
                    } else {
                        -tt
                    }
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;

                // Column update A <- A R, with R[:,i] = u c e_i - s e_j,
                // R[:,j] = u s e_i + c e_j.
                let uc = u.scale(c);
                let us = u.scale(s);
                for kr in 0..n {
                    let aki = a[(kr, i)];
                    let akj = a[(kr, j)];
                    a[(kr, i)] = aki * uc - akj.scale(s);
                    a[(kr, j)] = aki * us + akj.scale(c);
                }
                // Row update A <- Rᴴ A.
                let ucc = uc.conj();
                let usc = us.conj();
                for kc in 0..n {
                    let aik = a[(i, kc)];
                    let ajk = a[(j, kc)];
                    a[(i, kc)] = aik * ucc - ajk.scale(s);
                    a[(j, kc)] = aik * usc + ajk.scale(c);
                }
                // Accumulate eigenvectors V <- V R.
                for kr in 0..n {
                    let vki = v[(kr, i)];
                    let vkj = v[(kr, j)];
                    v[(kr, i)] = vki * uc - vkj.scale(s);
                    v[(kr, j)] = vki * us + vkj.scale(c);
                }
                // Clean the eliminated entries.
                a[(i, j)] = C::<T>::zero();
                a[(j, i)] = C::<T>::zero();
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<T> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&x, &y| diag[x].partial_cmp(&diag[y]).expect("NaN eigenvalue"));

    let values: Vec<T> = order.iter().map(|&k| diag[k]).collect();
    let mut vectors = CMat::<T>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for row in 0..n {
            vectors[(row, dst)] = v[(row, src)];
        }
    }
    HermEig { values, vectors }
}

impl<T: Scalar> HermEig<T> {
    /// Reassembles `V f(Λ) Vᴴ`.
    pub fn apply_fn(&self, f: impl Fn(T) -> T) -> CMat<T> {
        let n = self.values.len();
        let mut out = CMat::<T>::zeros(n, n);
        for k in 0..n {
            let w = f(self.values[k]);
            if w.is_zero() {
                continue;
            }
            let col = self.vectors.col(k);
            out.add_scaled_outer(w, &col);
        }
        out.hermitize()
    }

    pub fn min_value(&self) -> T {
        self.values[0]
    }

    pub fn max_value(&self) -> T {
        *self.values.last().expect("empty spectrum")
    }
}

/// Matrix function of a Hermitian matrix through its eigendecomposition.
pub fn herm_fn<T: Scalar>(m: &CMat<T>, f: impl Fn(T) -> T) -> CMat<T> {
    hermitian_eig(m).apply_fn(f)
}

/// Inverse of a Hermitian positive definite matrix.
///
/// Fails with `NotPositiveDefinite` when the spectrum is not strictly
/// positive relative to the largest eigenvalue.
pub fn pd_inverse<T: Scalar>(m: &CMat<T>) -> Result<CMat<T>> {
    let eig = hermitian_eig(m);
    check_pd(&eig)?;
    Ok(eig.apply_fn(|x| T::one() / x))
}

/// Spectral floor below which eigenvalues count as numerically zero:
/// `λ_max · max(1e-14, dim·ε)`. Rank-deficient matrices land under it no
/// matter which way their noise eigenvalues round.
pub fn pd_floor<T: Scalar>(eig: &HermEig<T>) -> T {
    let dim_eps = T::epsilon() * r::<T>(eig.values.len() as f64);
    eig.max_value() * r::<T>(1e-14).max(dim_eps)
}

/// Returns Err unless the spectrum is strictly positive (relative floor).
pub fn check_pd<T: Scalar>(eig: &HermEig<T>) -> Result<()> {
    if eig.min_value() <= pd_floor(eig).max(T::zero()) {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: eig.min_value().to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

/// Eigendecomposition gated on positive definiteness.
pub fn pd_eig<T: Scalar>(m: &CMat<T>) -> Result<HermEig<T>> {
    let eig = hermitian_eig(m);
    check_pd(&eig)?;
    Ok(eig)
}

/// Fractional power `M^t` of a Hermitian PD matrix, with eigenvalues clamped
/// at `1e-14` relative to the top of the spectrum so near-singular inputs do
/// not produce NaN.
pub fn herm_pow<T: Scalar>(m: &CMat<T>, t: T) -> Result<CMat<T>> {
    let eig = hermitian_eig(m);
    check_pd(&eig)?;
    let clamp = eig.max_value() * r::<T>(1e-14);
    Ok(eig.apply_fn(|x| if x < clamp { clamp } else { x }.powf(t)))
}

/// log(det M) of a Hermitian PD matrix.
pub fn pd_log_det<T: Scalar>(m: &CMat<T>) -> Result<T> {
    let eig = hermitian_eig(m);
    check_pd(&eig)?;
    Ok(eig
        .values
        .iter()
        .map(|&x| x.ln())
        .fold(T::zero(), |a, b| a + b))
}

/// Numeric rank of a Hermitian matrix: eigenvalues above
/// `rel_tol · max |eigenvalue|`.
pub fn hermitian_rank<T: Scalar>(m: &CMat<T>, rel_tol: T) -> usize {
    let eig = hermitian_eig(m);
    let top = eig
        .values
        .iter()
        .map(|x| x.abs())
        .fold(T::zero(), |a, b| if b > a { b } else { a });
    if top.is_zero() {
        return 0;
    }
    let cut = top * rel_tol;
    eig.values.iter().filter(|x| x.abs() > cut).count()
}
