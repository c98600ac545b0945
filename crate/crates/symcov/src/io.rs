//! JSON wire formats.
//!
//! Matrices serialize as `{"rows": r, "cols": c, "data": [[re, im], ...]}`
//! in row-major order; the other documents are built from that. The wire
//! structs are concrete (`f64`) regardless of the working scalar, so files
//! are portable across precisions.

use crate::error::{Error, Result};
use crate::estimation::{ConvergenceStatus, EstimatorReport};
use crate::linalg::CMat;
use crate::matgroup::{GroupSpec, UnitaryMatrix};
use crate::sampling::{DistributionTag, Provenance, SampleSet, ScaleConvention, ShapeMatrix};
use crate::scalar::{r, Scalar};
use crate::structure::{Component, StructureInfo};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

/// `{"rows": r, "cols": c, "data": [[re, im], ...]}`, row-major.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn from_mat<T: Scalar>(m: &CMat<T>) -> Self {
        MatrixJson {
            rows: m.rows(),
            cols: m.cols(),
            data: m
                .data()
                .iter()
                .map(|z| {
                    [
                        z.re.to_f64().unwrap_or(f64::NAN),
                        z.im.to_f64().unwrap_or(f64::NAN),
                    ]
                })
                .collect(),
        }
    }

    pub fn to_mat<T: Scalar>(&self) -> Result<CMat<T>> {
        if self.data.len() != self.rows * self.cols {
            return Err(Error::InvalidParameter(format!(
                "matrix data length {} does not match {}x{}",
                self.data.len(),
                self.rows,
                self.cols
            )));
        }
        let mut m = CMat::<T>::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let [re, im] = self.data[i * self.cols + j];
                m[(i, j)] = Complex::new(r::<T>(re), r::<T>(im));
            }
        }
        Ok(m)
    }
}

/// `{"dim": p, "name": ..., "elements": [matrix, ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupJson {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub elements: Vec<MatrixJson>,
}

impl GroupJson {
    pub fn from_group<T: Scalar>(g: &GroupSpec<T>) -> Self {
        GroupJson {
            dim: g.dim(),
            name: g.name().map(|s| s.to_string()),
            elements: g
                .elements()
                .iter()
                .map(|u| MatrixJson::from_mat(u.matrix()))
                .collect(),
        }
    }

    /// Rebuilds and re-verifies the group axioms.
    pub fn to_group<T: Scalar>(&self) -> Result<GroupSpec<T>> {
        let elements: Vec<UnitaryMatrix<T>> = self
            .elements
            .iter()
            .map(|m| UnitaryMatrix::with_default_tol(m.to_mat()?))
            .collect::<Result<_>>()?;
        GroupSpec::from_elements(self.dim, elements, self.name.clone())
    }
}

/// A list of generator matrices (input format of `close_group`).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorsJson {
    pub dim: usize,
    pub generators: Vec<MatrixJson>,
}

/// `{dim, m, components: [[p_i, s_i], ...], rho, delta, basis}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureJson {
    pub dim: usize,
    pub m: usize,
    pub components: Vec<[usize; 2]>,
    pub rho: f64,
    pub delta: f64,
    pub basis: MatrixJson,
}

impl StructureJson {
    pub fn from_structure<T: Scalar>(s: &StructureInfo<T>) -> Self {
        StructureJson {
            dim: s.dim(),
            m: s.m(),
            components: s
                .components()
                .iter()
                .map(|c| [c.multiplicity, c.block_size])
                .collect(),
            rho: s.rho().to_f64().unwrap_or(f64::NAN),
            delta: s.delta().to_f64().unwrap_or(f64::NAN),
            basis: MatrixJson::from_mat(s.basis_q()),
        }
    }

    pub fn to_structure<T: Scalar>(&self) -> Result<StructureInfo<T>> {
        let components = self
            .components
            .iter()
            .map(|&[p_i, s_i]| Component::new(p_i, s_i))
            .collect();
        StructureInfo::new(self.dim, components, self.basis.to_mat()?)
    }
}

/// Shape matrix with its scale convention.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShapeJson {
    #[serde(flatten)]
    pub convention: ScaleConvention,
    pub matrix: MatrixJson,
}

impl ShapeJson {
    pub fn from_shape<T: Scalar>(s: &ShapeMatrix<T>) -> Self {
        ShapeJson {
            convention: s.convention(),
            matrix: MatrixJson::from_mat(s.matrix()),
        }
    }

    pub fn to_shape<T: Scalar>(&self) -> Result<ShapeMatrix<T>> {
        ShapeMatrix::new(self.matrix.to_mat()?, self.convention)
    }
}

/// Provenance of a sample set.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProvenanceJson {
    #[serde(flatten)]
    pub distribution: DistributionTag,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_shape: Option<ShapeJson>,
}

/// `{dim, n, vectors: [[[re, im], ...], ...], provenance}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSetJson {
    pub dim: usize,
    pub n: usize,
    pub vectors: Vec<Vec<[f64; 2]>>,
    pub provenance: ProvenanceJson,
}

impl SampleSetJson {
    pub fn from_samples<T: Scalar>(s: &SampleSet<T>) -> Self {
        SampleSetJson {
            dim: s.dim(),
            n: s.n(),
            vectors: s
                .vectors()
                .iter()
                .map(|v| {
                    v.iter()
                        .map(|z| {
                            [
                                z.re.to_f64().unwrap_or(f64::NAN),
                                z.im.to_f64().unwrap_or(f64::NAN),
                            ]
                        })
                        .collect()
                })
                .collect(),
            provenance: ProvenanceJson {
                distribution: s.provenance().distribution.clone(),
                seed: s.provenance().seed,
                true_shape: s
                    .provenance()
                    .true_shape
                    .as_ref()
                    .map(ShapeJson::from_shape),
            },
        }
    }

    pub fn to_samples<T: Scalar>(&self) -> Result<SampleSet<T>> {
        if self.vectors.len() != self.n {
            return Err(Error::InvalidParameter(format!(
                "sample set declares n = {} but carries {} vectors",
                self.n,
                self.vectors.len()
            )));
        }
        let vectors = self
            .vectors
            .iter()
            .map(|v| {
                v.iter()
                    .map(|&[re, im]| Complex::new(r::<T>(re), r::<T>(im)))
                    .collect()
            })
            .collect();
        let true_shape = match &self.provenance.true_shape {
            Some(s) => Some(s.to_shape()?),
            None => None,
        };
        SampleSet::new(
            self.dim,
            vectors,
            Provenance {
                distribution: self.provenance.distribution.clone(),
                seed: self.provenance.seed,
                true_shape,
            },
        )
    }
}

/// Estimator report with full trajectories.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportJson {
    pub estimate: ShapeJson,
    pub iterations: usize,
    pub step_norms: Vec<f64>,
    pub objective_values: Vec<f64>,
    pub fixed_point_residual: f64,
    pub status: ConvergenceStatus,
}

impl ReportJson {
    pub fn from_report<T: Scalar>(rep: &EstimatorReport<T>) -> Self {
        ReportJson {
            estimate: ShapeJson::from_shape(&rep.estimate),
            iterations: rep.iterations,
            step_norms: rep
                .step_norms
                .iter()
                .map(|v| v.to_f64().unwrap_or(f64::NAN))
                .collect(),
            objective_values: rep
                .objective_values
                .iter()
                .map(|v| v.to_f64().unwrap_or(f64::NAN))
                .collect(),
            fixed_point_residual: rep.fixed_point_residual.to_f64().unwrap_or(f64::NAN),
            status: rep.status,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matgroup::{builtin_group, GroupKind};
    use crate::sampling::sample_cae;
    use crate::structure::builtin_structure;

    #[test]
    fn matrix_roundtrip() {
        let m =
            CMat::<f64>::from_rows(&[vec![[1.0, 2.0], [3.0, -4.0]], vec![[0.5, 0.0], [0.0, 1.5]]]);
        let j = MatrixJson::from_mat(&m);
        let text = serde_json::to_string(&j).unwrap();
        let back: MatrixJson = serde_json::from_str(&text).unwrap();
        let m2: CMat<f64> = back.to_mat().unwrap();
        assert_eq!(m.frob_dist(&m2), 0.0);
    }

    #[test]
    fn group_roundtrip_reverifies() {
        let g = builtin_group::<f64>(GroupKind::Circulant, 4).unwrap();
        let j = GroupJson::from_group(&g);
        let text = serde_json::to_string(&j).unwrap();
        let back: GroupJson = serde_json::from_str(&text).unwrap();
        let g2 = back.to_group::<f64>().unwrap();
        assert_eq!(g2.order(), 4);
    }

    #[test]
    fn samples_roundtrip_bitwise() {
        let theta = ShapeMatrix::raw(CMat::<f64>::identity(3)).unwrap();
        let s = sample_cae(&theta, 5, 123).unwrap();
        let j = SampleSetJson::from_samples(&s);
        let text = serde_json::to_string(&j).unwrap();
        let back: SampleSetJson = serde_json::from_str(&text).unwrap();
        let s2 = back.to_samples::<f64>().unwrap();
        assert_eq!(s.vectors(), s2.vectors());
        assert_eq!(s.provenance().seed, s2.provenance().seed);
    }

    #[test]
    fn structure_roundtrip() {
        let s = builtin_structure::<f64>(GroupKind::Perhermitian, 6).unwrap();
        let j = StructureJson::from_structure(&s);
        let text = serde_json::to_string(&j).unwrap();
        let back: StructureJson = serde_json::from_str(&text).unwrap();
        let s2 = back.to_structure::<f64>().unwrap();
        assert_eq!(s2.m(), 2);
        assert_eq!(s2.component_multiset(), s.component_multiset());
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = r#"{"rows": 1, "cols": 1, "data": [[1.0, 0.0]], "extra": 3}"#;
        assert!(serde_json::from_str::<MatrixJson>(text).is_err());
    }
}
