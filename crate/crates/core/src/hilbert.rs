//! Finite-dimensional tensor-product arithmetic.
//!
//! States live in `H_1 ⊗ … ⊗ H_n` and are stored densely. Amplitudes are
//! flattened row-major over the factor indices in label order, so the last
//! factor varies fastest.

use std::cmp::Ordering;
use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CVector = DVector<C64>;
pub type CMatrix = DMatrix<C64>;

/// Tolerance on unit norm, orthonormality and density-matrix invariants.
pub const NORM_TOL: f64 = 1e-10;
/// Singular values at or below this are treated as absent Schmidt terms.
pub const DROP_TOL: f64 = 1e-12;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Ordered list of tensor factors with their entity labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    dims: Vec<usize>,
    labels: Vec<String>,
}

impl Factorization {
    pub fn new<S: Into<String>>(dims: Vec<usize>, labels: Vec<S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if dims.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: dims.len(),
                found: labels.len(),
            });
        }
        if dims.contains(&0) {
            return Err(Error::InvalidDimension);
        }
        for (i, label) in labels.iter().enumerate() {
            if labels[..i].contains(label) {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }
        Ok(Factorization { dims, labels })
    }

    /// Factors labelled "0", "1", … in order.
    pub fn with_default_labels(dims: Vec<usize>) -> Result<Self> {
        let labels = (0..dims.len()).map(|i| i.to_string()).collect();
        Factorization::new(dims, labels)
    }

    /// Single factor.
    pub fn single(label: &str, dim: usize) -> Result<Self> {
        Factorization::new(vec![dim], vec![label])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    /// Dimension of the whole product space. The empty product is 1.
    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn factor_dim(&self, label: &str) -> Result<usize> {
        Ok(self.dims[self.position(label)?])
    }

    /// The factorization with `label` removed, remaining order preserved.
    pub fn without(&self, label: &str) -> Result<Self> {
        let pos = self.position(label)?;
        let mut dims = self.dims.clone();
        let mut labels = self.labels.clone();
        dims.remove(pos);
        labels.remove(pos);
        Ok(Factorization { dims, labels })
    }

    pub fn concat(&self, other: &Factorization) -> Result<Self> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        Factorization::new(dims, labels)
    }

    /// Sizes `(before, focus, after)` of the flat index split around `label`.
    pub(crate) fn split(&self, label: &str) -> Result<(usize, usize, usize)> {
        let pos = self.position(label)?;
        let before = self.dims[..pos].iter().product();
        let after = self.dims[pos + 1..].iter().product();
        Ok((before, self.dims[pos], after))
    }
}

/// Normalized amplitude vector over a factorized space.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: CVector,
    factorization: Factorization,
}

impl StateVector {
    /// Wraps amplitudes that must already have unit norm within [`NORM_TOL`].
    pub fn new(amplitudes: CVector, factorization: Factorization) -> Result<Self> {
        check_len(&amplitudes, &factorization)?;
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(StateVector {
            amplitudes,
            factorization,
        })
    }

    /// Rescales `amplitudes` to unit norm. Fails on the zero vector.
    pub fn normalized(amplitudes: CVector, factorization: Factorization) -> Result<Self> {
        check_len(&amplitudes, &factorization)?;
        let norm = amplitudes.norm();
        if norm <= DROP_TOL || !norm.is_finite() {
            return Err(Error::NotNormalized(norm));
        }
        Ok(StateVector {
            amplitudes: amplitudes / C64::from(norm),
            factorization,
        })
    }

    pub fn from_slice(amplitudes: &[C64], factorization: Factorization) -> Result<Self> {
        StateVector::new(CVector::from_column_slice(amplitudes), factorization)
    }

    /// Computational basis state with flat index `index`.
    pub fn basis(factorization: Factorization, index: usize) -> Result<Self> {
        let dim = factorization.total_dim();
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: index,
            });
        }
        let mut amplitudes = CVector::zeros(dim);
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(StateVector {
            amplitudes,
            factorization,
        })
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn factorization(&self) -> &Factorization {
        &self.factorization
    }

    pub fn into_parts(self) -> (CVector, Factorization) {
        (self.amplitudes, self.factorization)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// Rank-1 projector `|ψ⟩⟨ψ|` on the whole space.
    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix::pure(&self.amplitudes)
    }
}

fn check_len(amplitudes: &CVector, factorization: &Factorization) -> Result<()> {
    let expected = factorization.total_dim();
    if amplitudes.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: amplitudes.len(),
        });
    }
    Ok(())
}

/// Kronecker product of two states; the factorizations are concatenated.
pub fn tensor_product(a: &StateVector, b: &StateVector) -> Result<StateVector> {
    let factorization = a.factorization.concat(&b.factorization)?;
    Ok(StateVector {
        amplitudes: a.amplitudes.kronecker(&b.amplitudes),
        factorization,
    })
}

/// Reshapes `psi` into a `d_focus × d_rest` matrix. Rows index the focus
/// factor; columns run lexicographically over the other factors in their
/// original order.
pub fn bipartition_matrix(psi: &StateVector, focus: &str) -> Result<CMatrix> {
    let (before, d, after) = psi.factorization.split(focus)?;
    let amps = &psi.amplitudes;
    Ok(CMatrix::from_fn(d, before * after, |row, col| {
        let (a, b) = (col / after, col % after);
        amps[(a * d + row) * after + b]
    }))
}

/// Inverse of [`bipartition_matrix`].
pub(crate) fn flatten_bipartition(
    matrix: &CMatrix,
    factorization: &Factorization,
    focus: &str,
) -> Result<CVector> {
    let (before, d, after) = factorization.split(focus)?;
    if matrix.nrows() != d || matrix.ncols() != before * after {
        return Err(Error::DimensionMismatch {
            expected: factorization.total_dim(),
            found: matrix.len(),
        });
    }
    let mut out = CVector::zeros(factorization.total_dim());
    for a in 0..before {
        for row in 0..d {
            for b in 0..after {
                out[(a * d + row) * after + b] = matrix[(row, a * after + b)];
            }
        }
    }
    Ok(out)
}

/// Schmidt decomposition `Σ a_i ψ_i ⊗ ψ̃_i` across the cut focus | rest.
#[derive(Clone, Debug, PartialEq)]
pub struct BiorthogonalDecomposition {
    coefficients: Vec<C64>,
    left: Vec<CVector>,
    right: Vec<CVector>,
    focus: String,
    source: Factorization,
}

impl BiorthogonalDecomposition {
    pub fn coefficients(&self) -> &[C64] {
        &self.coefficients
    }

    /// Orthonormal vectors `ψ_i` in the focus factor.
    pub fn left_vectors(&self) -> &[CVector] {
        &self.left
    }

    /// Orthonormal vectors `ψ̃_i` in the complementary factors.
    pub fn right_vectors(&self) -> &[CVector] {
        &self.right
    }

    pub fn focus(&self) -> &str {
        &self.focus
    }

    /// Factorization of the decomposed state.
    pub fn source(&self) -> &Factorization {
        &self.source
    }

    /// Factorization of the complementary space the right vectors live in.
    pub fn rest(&self) -> Factorization {
        self.source
            .without(&self.focus)
            .expect("focus belongs to source factorization")
    }

    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }

    /// Rebuilds the decomposed vector in the source flattening order.
    pub fn reconstruct(&self) -> CVector {
        let (before, d, after) = self.source.split(&self.focus).expect("focus is valid");
        let mut m = CMatrix::zeros(d, before * after);
        for ((a, l), r) in self.coefficients.iter().zip(&self.left).zip(&self.right) {
            m += (l * r.transpose()) * *a;
        }
        flatten_bipartition(&m, &self.source, &self.focus).expect("shape matches source")
    }

    /// `Σ |a_i|² |ψ_i⟩⟨ψ_i|`, the reduced state of the focus factor.
    pub fn reduced_density(&self) -> DensityMatrix {
        let d = self.source.factor_dim(&self.focus).expect("focus is valid");
        let mut m = CMatrix::zeros(d, d);
        for (a, l) in self.coefficients.iter().zip(&self.left) {
            m += (l * l.adjoint()) * C64::from(a.norm_sqr());
        }
        DensityMatrix::from_raw(m)
    }

    /// Index ranges of terms whose coefficient magnitudes agree within `tol`.
    /// Only ranges of length two or more are returned.
    pub fn degenerate_blocks(&self, tol: f64) -> Vec<Range<usize>> {
        let mut blocks = Vec::new();
        let mut start = 0;
        for i in 1..=self.coefficients.len() {
            let split = i == self.coefficients.len()
                || (self.coefficients[i].norm() - self.coefficients[start].norm()).abs() > tol;
            if split {
                if i - start > 1 {
                    blocks.push(start..i);
                }
                start = i;
            }
        }
        blocks
    }

    /// Another valid decomposition of the same vector: within a block of equal
    /// coefficient magnitude the left vectors are mixed by `unitary` and the
    /// right vectors by its conjugate, `ψ'_j = Σ_i U_ij ψ_i`, `ψ̃'_j = Σ_i U*_ij ψ̃_i`.
    ///
    /// Coefficients in the block are replaced by their common magnitude; the
    /// phase of each term is carried into the right vector first.
    pub fn rotate_block(&self, block: Range<usize>, unitary: &CMatrix) -> Result<Self> {
        let k = block.len();
        if unitary.nrows() != k || unitary.ncols() != k || block.end > self.rank() {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: unitary.nrows(),
            });
        }
        let mut out = self.clone();
        let magnitude = self.coefficients[block.start].norm();
        let phased_right: Vec<CVector> = block
            .clone()
            .map(|i| &self.right[i] * (self.coefficients[i] / C64::from(magnitude)))
            .collect();
        for j in 0..k {
            let mut l = CVector::zeros(self.left[0].len());
            let mut r = CVector::zeros(self.right[0].len());
            for i in 0..k {
                l += &self.left[block.start + i] * unitary[(i, j)];
                r += &phased_right[i] * unitary[(i, j)].conj();
            }
            out.left[block.start + j] = l;
            out.right[block.start + j] = r;
            out.coefficients[block.start + j] = C64::from(magnitude);
        }
        Ok(out)
    }
}

/// Canonical Schmidt decomposition of `psi` across `focus | rest`.
///
/// Terms with singular value `<= DROP_TOL` are dropped. The rest are sorted
/// by decreasing coefficient; exact ties fall back to lexicographic order of
/// the left vectors. Each left vector is rotated so that its largest component
/// is real and positive, with the opposite phase absorbed by its right vector.
/// Coefficients are therefore real and positive.
pub fn biorthogonal_decompose(psi: &StateVector, focus: &str) -> Result<BiorthogonalDecomposition> {
    let norm = psi.amplitudes.norm();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(norm));
    }
    let m = bipartition_matrix(psi, focus)?;
    let svd = m
        .try_svd(true, true, f64::EPSILON, 0)
        .ok_or(Error::SvdFailed)?;
    let u = svd.u.as_ref().ok_or(Error::SvdFailed)?;
    let v_t = svd.v_t.as_ref().ok_or(Error::SvdFailed)?;

    let mut terms: Vec<(f64, CVector, CVector)> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > DROP_TOL)
        .map(|(i, &s)| {
            let mut left: CVector = u.column(i).into_owned();
            let mut right: CVector = v_t.row(i).transpose();
            let phase = left[pivot_index(&left)].arg();
            left *= C64::from_polar(1.0, -phase);
            right *= C64::from_polar(1.0, phase);
            (s, left, right)
        })
        .collect();

    terms.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(Ordering::Equal)
            .then_with(|| lex_cmp(&a.1, &b.1))
    });

    let mut coefficients = Vec::with_capacity(terms.len());
    let mut left = Vec::with_capacity(terms.len());
    let mut right = Vec::with_capacity(terms.len());
    for (s, l, r) in terms {
        coefficients.push(C64::from(s));
        left.push(l);
        right.push(r);
    }
    Ok(BiorthogonalDecomposition {
        coefficients,
        left,
        right,
        focus: focus.to_string(),
        source: psi.factorization.clone(),
    })
}

/// First component whose magnitude is maximal up to rounding.
fn pivot_index(v: &CVector) -> usize {
    let max = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    v.iter().position(|c| c.norm() >= max - 1e-12).unwrap_or(0)
}

fn lex_cmp(a: &CVector, b: &CVector) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        let ord =
            x.re.partial_cmp(&y.re)
                .unwrap_or(Ordering::Equal)
                .then(x.im.partial_cmp(&y.im).unwrap_or(Ordering::Equal));
        if ord != Ordering::Equal {
            return ord;
        }
    }
    Ordering::Equal
}

/// `Tr_{ν≠keep} |ψ⟩⟨ψ|` by direct index contraction.
pub fn partial_trace(psi: &StateVector, keep: &str) -> Result<DensityMatrix> {
    let (before, d, after) = psi.factorization.split(keep)?;
    let amps = &psi.amplitudes;
    let mut rho = CMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let mut acc = ZERO;
            for a in 0..before {
                for b in 0..after {
                    acc += amps[(a * d + i) * after + b] * amps[(a * d + j) * after + b].conj();
                }
            }
            rho[(i, j)] = acc;
        }
    }
    Ok(DensityMatrix::from_raw(rho))
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    entries: CMatrix,
}

impl DensityMatrix {
    /// Validates the density-matrix invariants within [`NORM_TOL`].
    pub fn new(entries: CMatrix) -> Result<Self> {
        if !entries.is_square() || entries.nrows() == 0 {
            return Err(Error::InvalidDensityMatrix("matrix is not square".into()));
        }
        let herm_dev = (&entries - entries.adjoint()).camax();
        if herm_dev > NORM_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "not Hermitian (deviation {herm_dev:e})"
            )));
        }
        let trace = entries.trace();
        if (trace - C64::new(1.0, 0.0)).norm() > NORM_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace is {trace}")));
        }
        let rho = DensityMatrix { entries };
        let min = rho
            .eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min < -NORM_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {min:e}"
            )));
        }
        Ok(rho)
    }

    pub(crate) fn from_raw(entries: CMatrix) -> Self {
        DensityMatrix { entries }
    }

    /// `|v⟩⟨v| / ⟨v|v⟩`.
    pub fn pure(v: &CVector) -> Self {
        let n = v.norm_squared();
        DensityMatrix::from_raw((v * v.adjoint()) / C64::from(n))
    }

    /// `I / d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix::from_raw(CMatrix::identity(dim, dim) / C64::from(dim as f64))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let d = CVector::from_iterator(diag.len(), diag.iter().map(|&x| C64::from(x)));
        DensityMatrix::new(CMatrix::from_diagonal(&d))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (&self.entries + self.entries.adjoint()) * C64::from(0.5);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().cloned().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
        ev
    }

    /// `⟨φ|ρ|φ⟩`, real part.
    pub fn expectation(&self, phi: &CVector) -> Result<f64> {
        if phi.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: phi.len(),
            });
        }
        Ok(phi.dotc(&(&self.entries * phi)).re)
    }

    /// Spectral norm of `self - other`.
    pub fn distance(&self, other: &DensityMatrix) -> f64 {
        let diff = &self.entries - &other.entries;
        diff.singular_values().iter().cloned().fold(0.0, f64::max)
    }
}
