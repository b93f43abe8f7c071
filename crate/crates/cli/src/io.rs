//! JSON state and basis documents.
//!
//! A state document looks like
//!
//! ```json
//! { "dims": [2, 2], "labels": ["A", "B"],
//!   "amplitudes": [[0, 0], [0.7071067811865476, 0], [-0.7071067811865476, 0], [0, 0]] }
//! ```
//!
//! Amplitudes are `[re, im]` pairs, flattened row-major over the factors in
//! label order. `labels` may be omitted, in which case the factors are named
//! "0", "1", ….

use std::path::Path;

use hcrep::{CVector, Factorization, MeasurementBasis, StateVector, C64};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Largest accepted deviation of the amplitude norm from 1.
pub const NORM_ACCEPT_TOL: f64 = 1e-6;
/// Explicit bases must be orthonormal within this before re-orthonormalization.
pub const BASIS_ACCEPT_TOL: f64 = 1e-8;

#[derive(Debug, Serialize, Deserialize)]
pub struct StateDocument {
    pub dims: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub amplitudes: Vec<[f64; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BasisDocument {
    pub vectors: Vec<Vec<[f64; 2]>>,
}

pub fn to_pair(c: C64) -> [f64; 2] {
    [c.re, c.im]
}

fn from_pairs(pairs: &[[f64; 2]]) -> CVector {
    CVector::from_iterator(pairs.len(), pairs.iter().map(|&[re, im]| C64::new(re, im)))
}

pub fn parse_state_str(text: &str) -> Result<StateVector, CliError> {
    let doc: StateDocument = serde_json::from_str(text)?;
    let factorization = match doc.labels {
        Some(labels) => Factorization::new(doc.dims, labels)?,
        None => Factorization::with_default_labels(doc.dims)?,
    };
    let expected = factorization.total_dim();
    if doc.amplitudes.len() != expected {
        return Err(CliError::LengthMismatch {
            expected,
            found: doc.amplitudes.len(),
        });
    }
    let amplitudes = from_pairs(&doc.amplitudes);
    let norm = amplitudes.norm();
    if !norm.is_finite() || (norm - 1.0).abs() > NORM_ACCEPT_TOL {
        return Err(CliError::NormViolation(norm));
    }
    // vectors already normalized to rounding are kept bit for bit
    if (norm - 1.0).abs() > 1e-15 {
        Ok(StateVector::normalized(amplitudes, factorization)?)
    } else {
        Ok(StateVector::new(amplitudes, factorization)?)
    }
}

pub fn parse_state_file(path: &Path) -> Result<StateVector, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_state_str(&text)
}

pub fn state_document(psi: &StateVector) -> StateDocument {
    let f = psi.factorization();
    StateDocument {
        dims: f.dims().to_vec(),
        labels: Some(f.labels().to_vec()),
        amplitudes: psi.amplitudes().iter().map(|&c| to_pair(c)).collect(),
    }
}

pub fn serialize_state(psi: &StateVector) -> String {
    serde_json::to_string_pretty(&state_document(psi)).expect("state document serializes")
}

pub fn parse_basis_str(entity: &str, text: &str) -> Result<MeasurementBasis, CliError> {
    let doc: BasisDocument = serde_json::from_str(text)?;
    let vectors = doc.vectors.iter().map(|v| from_pairs(v)).collect();
    Ok(MeasurementBasis::orthonormalized(
        entity,
        vectors,
        BASIS_ACCEPT_TOL,
    )?)
}

/// Resolves a basis argument: a preset name or the path of a basis document.
pub fn resolve_basis(entity: &str, dim: usize, spec: &str) -> Result<MeasurementBasis, CliError> {
    let basis = match spec {
        "computational" => MeasurementBasis::computational(entity, dim),
        "hadamard" | "fourier" => MeasurementBasis::fourier(entity, dim),
        path => {
            let path = Path::new(path);
            if !path.exists() {
                return Err(CliError::UnknownBasis(spec.to_string()));
            }
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            parse_basis_str(entity, &text)?
        }
    };
    if basis.dim() != dim {
        return Err(hcrep::Error::DimensionMismatch {
            expected: dim,
            found: basis.dim(),
        }
        .into());
    }
    Ok(basis)
}
