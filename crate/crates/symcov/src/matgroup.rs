//! Finite unitary matrix groups.
//!
//! Groups are stored as explicit element lists because the symmetric
//! estimator and the Reynolds operator sum over every element. Element
//! identity is taken modulo a global unit phase: two unitaries that differ
//! by `e^{iφ}` act identically under conjugation, so they count as the same
//! group element. This keeps the proper-quaternion generator `Y` (with
//! `Y² = −I`) a two-element group, matching its conjugation action.

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::scalar::{Scalar, Tolerances, C};
use num_complex::Complex;
use num_traits::Zero;
use std::collections::HashMap;

/// Default cap on group order for closures and the permutation built-in.
pub const DEFAULT_MAX_ORDER: usize = 5040;

/// A p×p unitary matrix, validated at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix<T> {
    mat: CMat<T>,
}

impl<T: Scalar> UnitaryMatrix<T> {
    /// Validates unitarity within `tol` (Frobenius norm of `UᴴU − I`).
    pub fn new(mat: CMat<T>, tol: T) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::DimMismatch {
                expected: mat.rows(),
                actual: mat.cols(),
            });
        }
        let dev = mat.unitary_deviation();
        if dev > tol {
            return Err(Error::NotUnitary {
                deviation: dev.to_f64().unwrap_or(f64::NAN),
                tolerance: tol.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(UnitaryMatrix { mat })
    }

    pub fn with_default_tol(mat: CMat<T>) -> Result<Self> {
        Self::new(mat, Tolerances::<T>::default().unit)
    }

    pub fn identity(p: usize) -> Self {
        UnitaryMatrix {
            mat: CMat::identity(p),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn matrix(&self) -> &CMat<T> {
        &self.mat
    }

    pub fn inverse(&self) -> Self {
        UnitaryMatrix {
            mat: self.mat.adjoint(),
        }
    }

    pub fn product(&self, other: &Self) -> Self {
        UnitaryMatrix {
            mat: self.mat.matmul(&other.mat),
        }
    }
}

/// Frobenius distance between `a` and the closest unit-phase multiple of `b`.
///
/// The minimizing phase is `ζ = s/|s|` with `s = Tr(bᴴa)`; the difference is
/// formed entrywise so near-zero distances are not lost to cancellation.
pub fn phase_aligned_dist<T: Scalar>(a: &CMat<T>, b: &CMat<T>) -> T {
    debug_assert_eq!((a.rows(), a.cols()), (b.rows(), b.cols()));
    let s = b.frob_inner(a);
    let zeta = if s.norm() > T::epsilon() {
        s.unscale(s.norm())
    } else {
        Complex::new(T::one(), T::zero())
    };
    let mut acc = T::zero();
    for (x, y) in a.data().iter().zip(b.data().iter()) {
        acc += (*x - zeta * *y).norm_sqr();
    }
    acc.sqrt()
}

/// Phase-invariant signature used to bucket elements before exact matching:
/// entry moduli quantized on a coarse grid.
fn modulus_signature<T: Scalar>(m: &CMat<T>) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for z in m.data() {
        let q = (z.norm().to_f64().unwrap_or(0.0) * 1e3).round() as i64;
        h ^= q as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Element store with phase-aware deduplication.
struct ElementSet<T> {
    elems: Vec<UnitaryMatrix<T>>,
    buckets: HashMap<u64, Vec<usize>>,
    tol: T,
}

impl<T: Scalar> ElementSet<T> {
    fn new(tol: T) -> Self {
        ElementSet {
            elems: Vec::new(),
            buckets: HashMap::new(),
            tol,
        }
    }

    fn find(&self, m: &CMat<T>) -> Option<usize> {
        let sig = modulus_signature(m);
        if let Some(bucket) = self.buckets.get(&sig) {
            for &idx in bucket {
                if phase_aligned_dist(m, self.elems[idx].matrix()) <= self.tol {
                    return Some(idx);
                }
            }
        }
        None
    }

    /// Inserts unless an equivalent element exists; returns true when new.
    fn insert(&mut self, u: UnitaryMatrix<T>) -> bool {
        if self.find(u.matrix()).is_some() {
            return false;
        }
        let sig = modulus_signature(u.matrix());
        let idx = self.elems.len();
        self.elems.push(u);
        self.buckets.entry(sig).or_default().push(idx);
        true
    }
}

/// Which built-in symmetry group to construct.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupKind {
    /// `{I}`; no constraint.
    Trivial,
    /// Cyclic group of order p generated by the coordinate shift.
    Circulant,
    /// Powers of the d-step shift; commutant is block-circulant with d×d blocks.
    BlockCirculant { d: usize },
    /// All p! permutation matrices.
    Permutation,
    /// `{I, J}` with J the exchange (anti-diagonal) matrix.
    Perhermitian,
    /// Order-two conjugation symmetry of proper quaternion covariances.
    ProperQuaternion,
    /// Permutations of the first k coordinates plus sign flips on the rest.
    Equicorrelation { k: usize },
}

impl GroupKind {
    pub fn name(&self) -> String {
        match self {
            GroupKind::Trivial => "trivial".into(),
            GroupKind::Circulant => "circulant".into(),
            GroupKind::BlockCirculant { d } => format!("block_circulant(d={d})"),
            GroupKind::Permutation => "permutation".into(),
            GroupKind::Perhermitian => "perhermitian".into(),
            GroupKind::ProperQuaternion => "proper_quaternion".into(),
            GroupKind::Equicorrelation { k } => format!("equicorrelation(k={k})"),
        }
    }
}

/// A finite unitary matrix group given by its explicit element list.
#[derive(Clone, Debug)]
pub struct GroupSpec<T> {
    dim: usize,
    elements: Vec<UnitaryMatrix<T>>,
    name: Option<String>,
    generators: Option<Vec<UnitaryMatrix<T>>>,
}

impl<T: Scalar> GroupSpec<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[UnitaryMatrix<T>] {
        &self.elements
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn generators(&self) -> Option<&[UnitaryMatrix<T>]> {
        self.generators.as_deref()
    }

    pub fn is_trivial(&self) -> bool {
        self.elements.len() == 1
    }

    /// Builds a group from an already-closed element list, verifying the
    /// group axioms (identity membership, closure, inverse closure, no
    /// duplicates — all modulo unit phase).
    pub fn from_elements(
        dim: usize,
        elements: Vec<UnitaryMatrix<T>>,
        name: Option<String>,
    ) -> Result<Self> {
        let g = GroupSpec {
            dim,
            elements,
            name,
            generators: None,
        };
        g.verify(Tolerances::<T>::default().group)?;
        Ok(g)
    }

    /// Exhaustive group-axiom check at tolerance `tol`.
    pub fn verify(&self, tol: T) -> Result<()> {
        for e in &self.elements {
            if e.dim() != self.dim {
                return Err(Error::DimMismatch {
                    expected: self.dim,
                    actual: e.dim(),
                });
            }
        }
        let set = {
            let mut s = ElementSet::new(tol);
            for e in &self.elements {
                if !s.insert(e.clone()) {
                    return Err(Error::InvalidParameter(
                        "duplicate group elements (modulo phase)".into(),
                    ));
                }
            }
            s
        };
        let identity = CMat::<T>::identity(self.dim);
        if set.find(&identity).is_none() {
            return Err(Error::InvalidParameter(
                "group does not contain the identity".into(),
            ));
        }
        for a in &self.elements {
            if set.find(a.inverse().matrix()).is_none() {
                return Err(Error::InvalidParameter(
                    "group is not closed under inverses".into(),
                ));
            }
            for b in &self.elements {
                if set.find(a.product(b).matrix()).is_none() {
                    return Err(Error::InvalidParameter(
                        "group is not closed under products".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Closes a generating set into a full group.
///
/// Returns the smallest phase-deduplicated set containing the identity and
/// the generators that is closed under products and inverses.
pub fn close_group<T: Scalar>(
    generators: &[UnitaryMatrix<T>],
    max_order: usize,
) -> Result<GroupSpec<T>> {
    if max_order < 1 {
        return Err(Error::InvalidParameter("max_order must be >= 1".into()));
    }
    let dim = match generators.first() {
        Some(g) => g.dim(),
        None => {
            return Err(Error::InvalidParameter(
                "close_group with no generators needs an explicit dimension; use GroupSpec::from_elements or builtin_group(Trivial)".into(),
            ))
        }
    };
    close_group_dim(dim, generators, max_order)
}

/// Closure with an explicit dimension, allowing an empty generator list
/// (which yields the trivial group).
pub fn close_group_dim<T: Scalar>(
    dim: usize,
    generators: &[UnitaryMatrix<T>],
    max_order: usize,
) -> Result<GroupSpec<T>> {
    let tols = Tolerances::<T>::default();
    for g in generators {
        if g.dim() != dim {
            return Err(Error::DimMismatch {
                expected: dim,
                actual: g.dim(),
            });
        }
        // Re-check unitarity: callers may have built matrices directly.
        UnitaryMatrix::new(g.matrix().clone(), tols.unit)?;
    }

    let mut set = ElementSet::new(tols.group);
    set.insert(UnitaryMatrix::identity(dim));
    let mut queue: Vec<usize> = vec![0];
    for g in generators {
        if set.insert(g.clone()) {
            queue.push(set.elems.len() - 1);
        }
    }

    let mut cursor = 0;
    while cursor < queue.len() {
        let idx = queue[cursor];
        cursor += 1;

        let fresh = set.elems[idx].clone();
        let inv = fresh.inverse();
        if set.insert(inv) {
            queue.push(set.elems.len() - 1);
            if set.elems.len() > max_order {
                return Err(Error::ClosureOverflow { max_order });
            }
        }
        // Multiply against everything known so far, both orders.
        let mut k = 0;
        while k < set.elems.len() {
            let known = set.elems[k].clone();
            for prod in [fresh.product(&known), known.product(&fresh)] {
                if set.insert(prod) {
                    queue.push(set.elems.len() - 1);
                    if set.elems.len() > max_order {
                        return Err(Error::ClosureOverflow { max_order });
                    }
                }
            }
            k += 1;
        }
    }

    Ok(GroupSpec {
        dim,
        elements: set.elems,
        name: None,
        generators: if generators.is_empty() {
            None
        } else {
            Some(generators.to_vec())
        },
    })
}

/// The p×p cyclic shift matrix: `(Πx)_r = x_{r+1 mod p}`.
pub fn shift_matrix<T: Scalar>(p: usize) -> CMat<T> {
    CMat::from_fn(p, p, |i, j| {
        if j == (i + 1) % p {
            Complex::new(T::one(), T::zero())
        } else {
            C::<T>::zero()
        }
    })
}

/// The p×p exchange matrix (ones on the anti-diagonal).
pub fn exchange_matrix<T: Scalar>(p: usize) -> CMat<T> {
    CMat::from_fn(p, p, |i, j| {
        if i + j == p - 1 {
            Complex::new(T::one(), T::zero())
        } else {
            C::<T>::zero()
        }
    })
}

/// The proper-quaternion symmetry generator `[[0,−1],[1,0]] ⊗ I_{p/2}`.
pub fn quaternion_generator<T: Scalar>(p: usize) -> Result<CMat<T>> {
    if !p.is_multiple_of(2) || p == 0 {
        return Err(Error::UnsupportedSize {
            kind: "proper_quaternion".into(),
            p,
            detail: " (requires even p)".into(),
        });
    }
    let y2 = CMat::from_rows(&[vec![[0.0, 0.0], [-1.0, 0.0]], vec![[1.0, 0.0], [0.0, 0.0]]]);
    Ok(y2.kron(&CMat::identity(p / 2)))
}

fn permutation_matrix<T: Scalar>(p: usize, perm: &[usize]) -> CMat<T> {
    // Column j of the matrix sends e_j to e_{perm[j]}.
    CMat::from_fn(p, p, |i, j| {
        if perm[j] == i {
            Complex::new(T::one(), T::zero())
        } else {
            C::<T>::zero()
        }
    })
}

fn all_permutations(k: usize) -> Vec<Vec<usize>> {
    // Heap's algorithm, iterative.
    let mut out = Vec::new();
    let mut a: Vec<usize> = (0..k).collect();
    let mut c = vec![0usize; k];
    out.push(a.clone());
    let mut i = 0;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            out.push(a.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

fn factorial_capped(n: usize, cap: usize) -> Option<usize> {
    let mut acc: usize = 1;
    for k in 2..=n {
        acc = acc.checked_mul(k)?;
        if acc > cap {
            return None;
        }
    }
    Some(acc)
}

/// Constructs one of the built-in symmetry groups.
pub fn builtin_group<T: Scalar>(kind: GroupKind, p: usize) -> Result<GroupSpec<T>> {
    builtin_group_capped(kind, p, DEFAULT_MAX_ORDER)
}

/// Built-in construction with an explicit element cap.
pub fn builtin_group_capped<T: Scalar>(
    kind: GroupKind,
    p: usize,
    max_order: usize,
) -> Result<GroupSpec<T>> {
    if p == 0 {
        return Err(Error::UnsupportedSize {
            kind: kind.name(),
            p,
            detail: " (p must be positive)".into(),
        });
    }
    let name = kind.name();
    let elements: Vec<UnitaryMatrix<T>> = match kind {
        GroupKind::Trivial => vec![UnitaryMatrix::identity(p)],
        GroupKind::Circulant => {
            let shift = shift_matrix::<T>(p);
            let mut elems = Vec::with_capacity(p);
            let mut cur = CMat::<T>::identity(p);
            for _ in 0..p {
                elems.push(UnitaryMatrix { mat: cur.clone() });
                cur = cur.matmul(&shift);
            }
            elems
        }
        GroupKind::BlockCirculant { d } => {
            if d == 0 || !p.is_multiple_of(d) {
                return Err(Error::UnsupportedSize {
                    kind: name,
                    p,
                    detail: format!(" (d = {d} must divide p)"),
                });
            }
            let step = {
                let shift = shift_matrix::<T>(p);
                let mut acc = CMat::<T>::identity(p);
                for _ in 0..d {
                    acc = acc.matmul(&shift);
                }
                acc
            };
            let order = p / d;
            let mut elems = Vec::with_capacity(order);
            let mut cur = CMat::<T>::identity(p);
            for _ in 0..order {
                elems.push(UnitaryMatrix { mat: cur.clone() });
                cur = cur.matmul(&step);
            }
            elems
        }
        GroupKind::Permutation => {
            if factorial_capped(p, max_order).is_none() {
                return Err(Error::ClosureOverflow { max_order });
            }
            all_permutations(p)
                .into_iter()
                .map(|perm| UnitaryMatrix {
                    mat: permutation_matrix::<T>(p, &perm),
                })
                .collect()
        }
        GroupKind::Perhermitian => {
            if p == 1 {
                // The exchange matrix is the identity in dimension one.
                vec![UnitaryMatrix::identity(p)]
            } else {
                vec![
                    UnitaryMatrix::identity(p),
                    UnitaryMatrix {
                        mat: exchange_matrix::<T>(p),
                    },
                ]
            }
        }
        GroupKind::ProperQuaternion => {
            let y = quaternion_generator::<T>(p)?;
            vec![UnitaryMatrix::identity(p), UnitaryMatrix { mat: y }]
        }
        GroupKind::Equicorrelation { k } => {
            if k < 2 || k > p {
                return Err(Error::UnsupportedSize {
                    kind: name,
                    p,
                    detail: format!(" (k = {k} must satisfy 2 <= k <= p)"),
                });
            }
            let tail = p - k;
            let fits = factorial_capped(k, max_order)
                .map(|fk| tail < 64 && (fk as u128) << tail <= max_order as u128)
                .unwrap_or(false);
            if !fits {
                return Err(Error::ClosureOverflow { max_order });
            }
            let perms = all_permutations(k);
            let mut elems = Vec::new();
            for perm in &perms {
                // Extend the permutation of the first k coordinates by the
                // identity, then apply every sign pattern on the tail.
                let mut full: Vec<usize> = perm.clone();
                full.extend(k..p);
                let base = permutation_matrix::<T>(p, &full);
                for signs in 0..(1usize << tail) {
                    let mut m = base.clone();
                    for (bit, coord) in (k..p).enumerate() {
                        if signs >> bit & 1 == 1 {
                            m[(coord, coord)] = -m[(coord, coord)];
                        }
                    }
                    elems.push(UnitaryMatrix { mat: m });
                }
            }
            elems
        }
    };

    if elements.len() > max_order {
        return Err(Error::ClosureOverflow { max_order });
    }
    Ok(GroupSpec {
        dim: p,
        elements,
        name: Some(name),
        generators: None,
    })
}

/// Whether a Hermitian matrix is fixed by conjugation with every group
/// element: `max_K ‖Kᴴ M K − M‖_F ≤ tol`.
pub fn is_invariant<T: Scalar>(m: &CMat<T>, group: &GroupSpec<T>, tol: T) -> Result<bool> {
    Ok(invariance_deviation(m, group)? <= tol)
}

/// Worst conjugation deviation over the group.
pub fn invariance_deviation<T: Scalar>(m: &CMat<T>, group: &GroupSpec<T>) -> Result<T> {
    if !m.is_square() || m.rows() != group.dim() {
        return Err(Error::DimMismatch {
            expected: group.dim(),
            actual: m.rows(),
        });
    }
    let mut worst = T::zero();
    for k in group.elements() {
        let conj = m.conjugate_by(&k.matrix().adjoint());
        let dev = conj.frob_dist(m);
        if dev > worst {
            worst = dev;
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMat;
    use num_complex::Complex;

    #[test]
    fn circulant_closure_from_shift() {
        let shift = UnitaryMatrix::with_default_tol(shift_matrix::<f64>(4)).unwrap();
        let g = close_group(&[shift], 100).unwrap();
        assert_eq!(g.order(), 4);
        g.verify(1e-8).unwrap();
    }

    #[test]
    fn empty_generators_give_trivial_group() {
        let g = close_group_dim::<f64>(3, &[], 10).unwrap();
        assert_eq!(g.order(), 1);
        g.verify(1e-8).unwrap();
    }

    #[test]
    fn exchange_matrix_closure_has_two_elements() {
        let j = UnitaryMatrix::with_default_tol(exchange_matrix::<f64>(4)).unwrap();
        let g = close_group(&[j], 10).unwrap();
        assert_eq!(g.order(), 2);
        g.verify(1e-8).unwrap();
    }

    #[test]
    fn quaternion_generator_closes_to_two_elements_modulo_phase() {
        let y = UnitaryMatrix::with_default_tol(quaternion_generator::<f64>(8).unwrap()).unwrap();
        let g = close_group(&[y], 10).unwrap();
        // Y² = −I matches the identity up to phase.
        assert_eq!(g.order(), 2);
        g.verify(1e-8).unwrap();
    }

    #[test]
    fn closure_overflow_is_reported() {
        let shift = UnitaryMatrix::with_default_tol(shift_matrix::<f64>(6)).unwrap();
        let err = close_group(&[shift], 3).unwrap_err();
        assert!(matches!(err, Error::ClosureOverflow { max_order: 3 }));
    }

    #[test]
    fn non_unitary_generator_rejected() {
        let m = CMat::<f64>::identity(3).scale(2.0);
        assert!(matches!(
            UnitaryMatrix::with_default_tol(m.clone()),
            Err(Error::NotUnitary { .. })
        ));
        let err = close_group_dim(3, &[UnitaryMatrix { mat: m }], 10).unwrap_err();
        assert!(matches!(err, Error::NotUnitary { .. }));
    }

    #[test]
    fn builtin_orders_match_contract() {
        assert_eq!(
            builtin_group::<f64>(GroupKind::Circulant, 8)
                .unwrap()
                .order(),
            8
        );
        assert_eq!(
            builtin_group::<f64>(GroupKind::ProperQuaternion, 8)
                .unwrap()
                .order(),
            2
        );
        assert_eq!(
            builtin_group::<f64>(GroupKind::Trivial, 5).unwrap().order(),
            1
        );
        assert_eq!(
            builtin_group::<f64>(GroupKind::Permutation, 4)
                .unwrap()
                .order(),
            24
        );
        assert_eq!(
            builtin_group::<f64>(GroupKind::BlockCirculant { d: 2 }, 8)
                .unwrap()
                .order(),
            4
        );
        assert_eq!(
            builtin_group::<f64>(GroupKind::Equicorrelation { k: 2 }, 4)
                .unwrap()
                .order(),
            8
        );
    }

    #[test]
    fn permutation_group_rejects_large_p() {
        let err = builtin_group::<f64>(GroupKind::Permutation, 8).unwrap_err();
        assert!(matches!(err, Error::ClosureOverflow { .. }));
    }

    #[test]
    fn builtin_groups_satisfy_axioms() {
        for (kind, p) in [
            (GroupKind::Trivial, 3),
            (GroupKind::Circulant, 6),
            (GroupKind::BlockCirculant { d: 2 }, 6),
            (GroupKind::Permutation, 4),
            (GroupKind::Perhermitian, 5),
            (GroupKind::ProperQuaternion, 6),
            (GroupKind::Equicorrelation { k: 3 }, 5),
        ] {
            let g = builtin_group::<f64>(kind, p).unwrap();
            g.verify(1e-8)
                .unwrap_or_else(|e| panic!("{} p={p}: {e}", kind.name()));
        }
    }

    #[test]
    fn identity_is_invariant_under_everything() {
        let g = builtin_group::<f64>(GroupKind::Permutation, 5).unwrap();
        let eye = CMat::<f64>::identity(5);
        assert!(is_invariant(&eye, &g, 1e-10).unwrap());
    }

    #[test]
    fn equicorrelation_matrix_invariant_under_permutations() {
        let p = 5;
        let g = builtin_group::<f64>(GroupKind::Permutation, p).unwrap();
        let m = CMat::from_fn(p, p, |i, j| {
            if i == j {
                Complex::new(2.0, 0.0)
            } else {
                Complex::new(0.3, 0.0)
            }
        });
        assert!(is_invariant(&m, &g, 1e-10).unwrap());
    }

    #[test]
    fn generic_diagonal_not_circulant_invariant() {
        let p = 4;
        let g = builtin_group::<f64>(GroupKind::Circulant, p).unwrap();
        let m = CMat::from_fn(p, p, |i, j| {
            if i == j {
                Complex::new((i + 1) as f64, 0.0)
            } else {
                Complex::new(0.0, 0.0)
            }
        });
        assert!(!is_invariant(&m, &g, 1e-10).unwrap());
    }

    #[test]
    fn invariance_shared_with_inverse_for_pd() {
        use crate::linalg::pd_inverse;
        let p = 4;
        let g = builtin_group::<f64>(GroupKind::Circulant, p).unwrap();
        // A circulant Hermitian PD matrix.
        let c = [3.0, 0.5, 0.2, 0.5];
        let m = CMat::from_fn(p, p, |i, j| Complex::new(c[(j + p - i) % p], 0.0));
        assert!(is_invariant(&m, &g, 1e-10).unwrap());
        let inv = pd_inverse(&m).unwrap();
        assert!(is_invariant(&inv, &g, 1e-10).unwrap());
    }

    #[test]
    fn dim_mismatch_detected() {
        let g = builtin_group::<f64>(GroupKind::Trivial, 3).unwrap();
        let m = CMat::<f64>::identity(4);
        assert!(matches!(
            is_invariant(&m, &g, 1e-10),
            Err(Error::DimMismatch { .. })
        ));
    }
}
