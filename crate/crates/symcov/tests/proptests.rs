//! Property-based invariants over randomized inputs.

use num_complex::Complex;
use proptest::prelude::*;
use symcov::io::MatrixJson;
use symcov::linalg::CMat;
use symcov::matgroup::{builtin_group, is_invariant, GroupKind};
use symcov::structure::{geodesic, reynolds_project};

type Mat = CMat<f64>;

fn finite_entry() -> impl Strategy<Value = [f64; 2]> {
    let f = -1e6..1e6f64;
    (f.clone(), f).prop_map(|(re, im)| [re, im])
}

fn arb_matrix(max_dim: usize) -> impl Strategy<Value = Mat> {
    (1..=max_dim).prop_flat_map(move |n| {
        proptest::collection::vec(finite_entry(), n * n).prop_map(move |cells| {
            Mat::from_fn(n, n, |i, j| {
                let [re, im] = cells[i * n + j];
                Complex::new(re, im)
            })
        })
    })
}

fn arb_hermitian(max_dim: usize) -> impl Strategy<Value = Mat> {
    arb_matrix(max_dim).prop_map(|m| m.hermitize())
}

fn arb_pd(max_dim: usize) -> impl Strategy<Value = (Mat, Mat)> {
    (2..=max_dim).prop_flat_map(move |n| {
        let herm = proptest::collection::vec(-1.0..1.0f64, 2 * n * n).prop_map(move |cells| {
            Mat::from_fn(n, n, |i, j| {
                Complex::new(cells[2 * (i * n + j)], cells[2 * (i * n + j) + 1])
            })
            .hermitize()
        });
        (herm.clone(), herm).prop_map(move |(a, b)| {
            let shift = Mat::identity(n).scale(2.0 + n as f64);
            (a.add(&shift), b.add(&shift))
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matrix_json_roundtrip_is_exact(m in arb_matrix(6)) {
        let j = MatrixJson::from_mat(&m);
        let text = serde_json::to_string(&j).unwrap();
        let back: MatrixJson = serde_json::from_str(&text).unwrap();
        let m2: Mat = back.to_mat().unwrap();
        prop_assert_eq!(m.frob_dist(&m2), 0.0);
    }

    #[test]
    fn reynolds_image_is_invariant_and_idempotent(h in arb_hermitian(6), kind_idx in 0usize..4) {
        let p = h.dim();
        let kind = match kind_idx {
            0 => GroupKind::Trivial,
            1 => GroupKind::Circulant,
            2 => GroupKind::Perhermitian,
            _ => GroupKind::Permutation,
        };
        let g = builtin_group::<f64>(kind, p).unwrap();
        let proj = reynolds_project(&h, &g).unwrap();
        let scale = proj.frob_norm().max(1.0);
        prop_assert!(is_invariant(&proj, &g, 1e-9 * scale).unwrap());
        let twice = reynolds_project(&proj, &g).unwrap();
        prop_assert!(proj.frob_dist(&twice) <= 1e-10 * scale);
    }

    #[test]
    fn geodesic_recovers_endpoints((m0, m1) in arb_pd(5)) {
        let g0 = geodesic(&m0, &m1, 0.0).unwrap();
        let g1 = geodesic(&m0, &m1, 1.0).unwrap();
        let s0 = m0.frob_norm().max(1.0);
        let s1 = m1.frob_norm().max(1.0);
        prop_assert!(g0.frob_dist(&m0) <= 1e-10 * s0);
        prop_assert!(g1.frob_dist(&m1) <= 1e-10 * s1);
    }
}
