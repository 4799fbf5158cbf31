use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{DbsEigenpair, SpectralBasis};
use crate::error::{Error, Result};
use crate::mesh::mesh_hash;
use crate::solver::{BoundaryField, FemSpace, InteriorField};

/// On-disk form of a [`SpectralBasis`]. Field order is part of the format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisFile {
    pub domain: String,
    pub boundary_length: f64,
    #[serde(rename = "M")]
    pub m: usize,
    pub q: Vec<f64>,
    pub b: Vec<Vec<f64>>,
    pub h: Vec<Vec<f64>>,
    pub w: Vec<Vec<f64>>,
    pub mesh_hash: String,
}

impl BasisFile {
    pub fn from_basis(basis: &SpectralBasis, domain: &str) -> Self {
        let pairs = basis.pairs();
        BasisFile {
            domain: domain.to_string(),
            boundary_length: basis.boundary_length(),
            m: pairs.len(),
            q: pairs.iter().map(|p| p.q).collect(),
            b: pairs.iter().map(|p| p.b.0.clone()).collect(),
            h: pairs.iter().map(|p| p.h.0.clone()).collect(),
            w: pairs.iter().map(|p| p.w.0.clone()).collect(),
            mesh_hash: mesh_hash(basis.space().mesh()),
        }
    }

    /// Rebuilds the basis on `space`, whose mesh must hash to [`Self::mesh_hash`].
    pub fn into_basis(self, space: Arc<FemSpace>) -> Result<SpectralBasis> {
        let actual = mesh_hash(space.mesh());
        if actual != self.mesh_hash {
            return Err(Error::Basis(format!(
                "mesh hash mismatch: file has {}, mesh has {actual}",
                self.mesh_hash
            )));
        }
        let m = self.m;
        if [self.q.len(), self.b.len(), self.h.len(), self.w.len()].iter().any(|&n| n != m) {
            return Err(Error::Basis(format!("inconsistent mode count, expected {m}")));
        }
        let pairs = self
            .q
            .into_iter()
            .zip(self.b)
            .zip(self.h)
            .zip(self.w)
            .map(|(((q, b), h), w)| DbsEigenpair {
                q,
                b: InteriorField(b),
                h: InteriorField(h),
                w: BoundaryField(w),
            })
            .collect();
        SpectralBasis::from_pairs(space, pairs)
    }

    pub fn to_json(&self) -> Result<String> {
        crate::json::to_string(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
