//! Proper states of individual entities and the sequential measurement
//! cascade that updates them.
//!
//! Every entity of a compound system described by `Ψ` carries a proper state:
//! the density matrix that is diagonal in its Schmidt basis across the cut
//! entity | rest. Measuring one entity with outcome `φ` replaces the joint
//! remainder by `T(φ) = (1/N(φ)) Σ_i a_i ⟨φ|ψ_i⟩ ψ̃_i`, from which the proper
//! states of all entities not yet measured are recomputed. The composed update
//! `f = R ∘ T` is the hidden correlation.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::hilbert::{
    biorthogonal_decompose, BiorthogonalDecomposition, CMatrix, CVector, DensityMatrix,
    StateVector, C64, NORM_TOL,
};

/// Outcomes with probability at or below this cannot be conditioned on.
pub const ZERO_PROBABILITY: f64 = 1e-12;
/// Enumeration stops refining a branch once its probability drops below this.
pub const BRANCH_CUTOFF: f64 = 1e-15;

/// Source of biorthogonal decompositions used by the cascade.
///
/// The canonical choice is [`biorthogonal_decompose`]; any other valid
/// decomposition of the same vector must give the same probabilities.
pub trait Decomposer {
    fn decompose(&self, psi: &StateVector, focus: &str) -> Result<BiorthogonalDecomposition>;
}

impl<F> Decomposer for F
where
    F: Fn(&StateVector, &str) -> Result<BiorthogonalDecomposition>,
{
    fn decompose(&self, psi: &StateVector, focus: &str) -> Result<BiorthogonalDecomposition> {
        self(psi, focus)
    }
}

/// Density matrix carried by one entity.
#[derive(Clone, Debug, PartialEq)]
pub struct ProperState {
    matrix: DensityMatrix,
    entity: String,
}

impl ProperState {
    pub fn new(entity: &str, matrix: DensityMatrix) -> Self {
        ProperState {
            matrix,
            entity: entity.to_string(),
        }
    }

    pub fn matrix(&self) -> &DensityMatrix {
        &self.matrix
    }

    pub fn entity(&self) -> &str {
        &self.entity
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// Non-degenerate observable on one entity, given by its eigenbasis.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementBasis {
    entity: String,
    vectors: Vec<CVector>,
}

impl MeasurementBasis {
    /// The vectors must form an orthonormal basis within [`NORM_TOL`].
    pub fn new(entity: &str, vectors: Vec<CVector>) -> Result<Self> {
        let deviation = orthonormality_deviation(&vectors)?;
        if deviation > NORM_TOL {
            return Err(Error::NotOrthonormal {
                entity: entity.to_string(),
                deviation,
            });
        }
        Ok(MeasurementBasis {
            entity: entity.to_string(),
            vectors,
        })
    }

    /// Accepts vectors orthonormal within `tol`, then re-orthonormalizes them
    /// by modified Gram-Schmidt.
    pub fn orthonormalized(entity: &str, vectors: Vec<CVector>, tol: f64) -> Result<Self> {
        let deviation = orthonormality_deviation(&vectors)?;
        if deviation > tol {
            return Err(Error::NotOrthonormal {
                entity: entity.to_string(),
                deviation,
            });
        }
        let mut out: Vec<CVector> = Vec::with_capacity(vectors.len());
        for v in vectors {
            let mut w = v;
            for q in &out {
                let proj = q.dotc(&w);
                w -= q * proj;
            }
            let n = w.norm();
            out.push(w / C64::from(n));
        }
        MeasurementBasis::new(entity, out)
    }

    pub fn computational(entity: &str, dim: usize) -> Self {
        let vectors = (0..dim)
            .map(|i| {
                let mut v = CVector::zeros(dim);
                v[i] = C64::new(1.0, 0.0);
                v
            })
            .collect();
        MeasurementBasis {
            entity: entity.to_string(),
            vectors,
        }
    }

    /// Discrete Fourier basis; for `dim == 2` this is `{|+⟩, |−⟩}`.
    pub fn fourier(entity: &str, dim: usize) -> Self {
        let scale = 1.0 / (dim as f64).sqrt();
        let vectors = (0..dim)
            .map(|k| {
                CVector::from_fn(dim, |j, _| {
                    let angle = 2.0 * std::f64::consts::PI * (j * k) as f64 / dim as f64;
                    C64::from_polar(scale, angle)
                })
            })
            .collect();
        MeasurementBasis {
            entity: entity.to_string(),
            vectors,
        }
    }

    /// Columns of a unitary matrix.
    pub fn from_unitary(entity: &str, unitary: &CMatrix) -> Result<Self> {
        let vectors = unitary.column_iter().map(|c| c.into_owned()).collect();
        MeasurementBasis::new(entity, vectors)
    }

    pub fn entity(&self) -> &str {
        &self.entity
    }

    pub fn vectors(&self) -> &[CVector] {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }
}

fn orthonormality_deviation(vectors: &[CVector]) -> Result<f64> {
    let n = vectors.len();
    if n == 0 {
        return Err(Error::InvalidDimension);
    }
    let mut worst: f64 = 0.0;
    for (i, v) in vectors.iter().enumerate() {
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: v.len(),
            });
        }
        for (j, w) in vectors.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((v.dotc(w) - C64::from(target)).norm());
        }
    }
    Ok(worst)
}

/// One completed measurement in a cascade.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasuredOutcome {
    pub entity: String,
    pub index: usize,
    pub vector: CVector,
}

/// Progress of a sequential measurement: the joint remainder over the
/// entities not yet measured and the outcomes recorded so far.
#[derive(Clone, Debug, PartialEq)]
pub struct CascadeState {
    remainder: StateVector,
    measured: Vec<MeasuredOutcome>,
    remaining: Vec<String>,
}

impl CascadeState {
    /// Nothing measured yet; the remainder is `Ψ` itself.
    pub fn new(psi: StateVector) -> Self {
        let remaining = psi.factorization().labels().to_vec();
        CascadeState {
            remainder: psi,
            measured: Vec::new(),
            remaining,
        }
    }

    pub fn remainder(&self) -> &StateVector {
        &self.remainder
    }

    pub fn measured(&self) -> &[MeasuredOutcome] {
        &self.measured
    }

    pub fn remaining(&self) -> &[String] {
        &self.remaining
    }

    pub fn is_complete(&self) -> bool {
        self.remaining.is_empty()
    }

    /// Indices obtained so far, in measurement order.
    pub fn outcome_indices(&self) -> Vec<usize> {
        self.measured.iter().map(|m| m.index).collect()
    }

    fn require_remaining(&self, entity: &str) -> Result<()> {
        if self.remaining.iter().any(|e| e == entity) {
            Ok(())
        } else if self.measured.iter().any(|m| m.entity == entity) {
            Err(Error::AlreadyMeasured(entity.to_string()))
        } else {
            Err(Error::UnknownLabel(entity.to_string()))
        }
    }

    fn record(&self, entity: &str, index: usize, phi: &CVector, remainder: StateVector) -> Self {
        let mut measured = self.measured.clone();
        measured.push(MeasuredOutcome {
            entity: entity.to_string(),
            index,
            vector: phi.clone(),
        });
        CascadeState {
            remaining: remainder.factorization().labels().to_vec(),
            remainder,
            measured,
        }
    }
}

/// Probabilities indexed by outcome tuples, one index per entity listed in
/// `entities`.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeDistribution {
    entities: Vec<String>,
    probabilities: BTreeMap<Vec<usize>, f64>,
}

impl OutcomeDistribution {
    pub fn new(entities: Vec<String>, probabilities: BTreeMap<Vec<usize>, f64>) -> Result<Self> {
        for key in probabilities.keys() {
            if key.len() != entities.len() {
                return Err(Error::DimensionMismatch {
                    expected: entities.len(),
                    found: key.len(),
                });
            }
        }
        Ok(OutcomeDistribution {
            entities,
            probabilities,
        })
    }

    pub fn entities(&self) -> &[String] {
        &self.entities
    }

    /// Probability of `tuple`; absent tuples have probability zero.
    pub fn get(&self, tuple: &[usize]) -> f64 {
        self.probabilities.get(tuple).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<usize>, &f64)> {
        self.probabilities.iter()
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probabilities.values().sum()
    }

    /// The same distribution with tuples rewritten so their components
    /// follow `order`.
    pub fn reindexed<S: AsRef<str>>(&self, order: &[S]) -> Result<Self> {
        let positions = permutation_positions(&self.entities, order)?;
        let probabilities = self
            .probabilities
            .iter()
            .map(|(k, &p)| (positions.iter().map(|&i| k[i]).collect(), p))
            .collect();
        Ok(OutcomeDistribution {
            entities: order.iter().map(|s| s.as_ref().to_string()).collect(),
            probabilities,
        })
    }

    /// Distribution of a single entity's outcome.
    pub fn marginal(&self, entity: &str) -> Result<BTreeMap<usize, f64>> {
        let pos = self
            .entities
            .iter()
            .position(|e| e == entity)
            .ok_or_else(|| Error::UnknownLabel(entity.to_string()))?;
        let mut out = BTreeMap::new();
        for (k, p) in &self.probabilities {
            *out.entry(k[pos]).or_insert(0.0) += p;
        }
        Ok(out)
    }
}

/// For each label in `order`, its position in `entities`.
pub(crate) fn permutation_positions<S: AsRef<str>>(
    entities: &[String],
    order: &[S],
) -> Result<Vec<usize>> {
    if order.len() != entities.len() {
        return Err(Error::InvalidOrder);
    }
    let mut seen = vec![false; entities.len()];
    order
        .iter()
        .map(|label| {
            let pos = entities
                .iter()
                .position(|e| e == label.as_ref())
                .ok_or(Error::InvalidOrder)?;
            if std::mem::replace(&mut seen[pos], true) {
                return Err(Error::InvalidOrder);
            }
            Ok(pos)
        })
        .collect()
}

/// Proper state of `entity` given the cascade so far.
pub fn proper_state(c: &CascadeState, entity: &str) -> Result<ProperState> {
    proper_state_with(c, entity, &biorthogonal_decompose)
}

pub fn proper_state_with<D: Decomposer + ?Sized>(
    c: &CascadeState,
    entity: &str,
    decomposer: &D,
) -> Result<ProperState> {
    c.require_remaining(entity)?;
    if c.remaining.len() == 1 {
        return Ok(ProperState::new(entity, c.remainder.projector()));
    }
    let decomposition = decomposer.decompose(&c.remainder, entity)?;
    Ok(ProperState::new(entity, decomposition.reduced_density()))
}

/// `⟨φ|ω|φ⟩`, clamped to `[0, 1]`.
pub fn outcome_probability(omega: &ProperState, phi: &CVector) -> Result<f64> {
    let n = phi.norm();
    if phi.len() == omega.dim() && (n - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(n));
    }
    let p = omega.matrix.expectation(phi)?;
    Ok(p.clamp(0.0, 1.0))
}

/// Outcome probabilities for every vector of `basis`, in basis order.
pub fn outcome_probabilities(omega: &ProperState, basis: &MeasurementBasis) -> Result<Vec<f64>> {
    basis
        .vectors
        .iter()
        .map(|phi| outcome_probability(omega, phi))
        .collect()
}

/// Remainder over the other unmeasured entities once `entity` is found in `φ`.
pub fn conditional_remainder(c: &CascadeState, entity: &str, phi: &CVector) -> Result<StateVector> {
    conditional_remainder_with(c, entity, phi, &biorthogonal_decompose)
}

pub fn conditional_remainder_with<D: Decomposer + ?Sized>(
    c: &CascadeState,
    entity: &str,
    phi: &CVector,
    decomposer: &D,
) -> Result<StateVector> {
    c.require_remaining(entity)?;
    let decomposition = decomposer.decompose(&c.remainder, entity)?;
    remainder_from_decomposition(&decomposition, phi)
}

/// `T(φ)` evaluated on an explicit decomposition.
pub fn remainder_from_decomposition(
    decomposition: &BiorthogonalDecomposition,
    phi: &CVector,
) -> Result<StateVector> {
    let dim = decomposition.source().factor_dim(decomposition.focus())?;
    if phi.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: phi.len(),
        });
    }
    let rest = decomposition.rest();
    let mut out = CVector::zeros(rest.total_dim());
    let mut norm_sqr = 0.0;
    for ((a, left), right) in decomposition
        .coefficients()
        .iter()
        .zip(decomposition.left_vectors())
        .zip(decomposition.right_vectors())
    {
        let weight = a * phi.dotc(left);
        norm_sqr += weight.norm_sqr();
        out += right * weight;
    }
    if norm_sqr <= ZERO_PROBABILITY {
        return Err(Error::ZeroProbabilityOutcome(norm_sqr));
    }
    out /= C64::from(norm_sqr.sqrt());
    StateVector::normalized(out, rest)
}

/// New proper state of `target` after `measured_entity` is found in `φ`.
pub fn hidden_correlation_map(
    c: &CascadeState,
    measured_entity: &str,
    phi: &CVector,
    target: &str,
) -> Result<ProperState> {
    c.require_remaining(measured_entity)?;
    c.require_remaining(target)?;
    if measured_entity == target {
        return Err(Error::AlreadyMeasured(target.to_string()));
    }
    let remainder = conditional_remainder(c, measured_entity, phi)?;
    let next = c.record(measured_entity, usize::MAX, phi, remainder);
    proper_state(&next, target)
}

/// Cascade after `entity` is found in the basis vector with index `index`.
pub fn advance(c: &CascadeState, basis: &MeasurementBasis, index: usize) -> Result<CascadeState> {
    advance_with(c, basis, index, &biorthogonal_decompose)
}

pub fn advance_with<D: Decomposer + ?Sized>(
    c: &CascadeState,
    basis: &MeasurementBasis,
    index: usize,
    decomposer: &D,
) -> Result<CascadeState> {
    let phi = basis.vectors.get(index).ok_or(Error::DimensionMismatch {
        expected: basis.dim(),
        found: index,
    })?;
    let remainder = conditional_remainder_with(c, &basis.entity, phi, decomposer)?;
    Ok(c.record(&basis.entity, index, phi, remainder))
}

/// First index `i` with `u < Σ_{j≤i} p_j`, skipping entries `<= ZERO_PROBABILITY`.
/// If rounding leaves `u` beyond the last threshold, the last admissible
/// index is returned. `None` only when no entry is admissible.
pub(crate) fn threshold_index(probabilities: &[f64], u: f64) -> Option<usize> {
    let mut cumulative = 0.0;
    let mut last = None;
    for (i, &p) in probabilities.iter().enumerate() {
        if p <= ZERO_PROBABILITY {
            continue;
        }
        cumulative += p;
        last = Some(i);
        if u < cumulative {
            return Some(i);
        }
    }
    last
}

/// Measures `basis.entity`, picking the outcome whose cumulative probability
/// interval contains `u`.
pub fn measure_step(
    c: &CascadeState,
    basis: &MeasurementBasis,
    u: f64,
) -> Result<(usize, CascadeState)> {
    let omega = proper_state(c, &basis.entity)?;
    let probabilities = outcome_probabilities(&omega, basis)?;
    let index = threshold_index(&probabilities, u)
        .ok_or(Error::ZeroProbabilityOutcome(probabilities.iter().sum()))?;
    Ok((index, advance(c, basis, index)?))
}

/// Checks that `order` is a permutation of the labels of `psi` and returns
/// the bases rearranged to follow it.
pub(crate) fn bases_in_order<'a, S: AsRef<str>>(
    psi: &StateVector,
    order: &[S],
    bases: &'a [MeasurementBasis],
) -> Result<Vec<&'a MeasurementBasis>> {
    let factorization = psi.factorization();
    permutation_positions(factorization.labels(), order)?;
    order
        .iter()
        .map(|label| {
            let label = label.as_ref();
            let basis = bases
                .iter()
                .find(|b| b.entity == label)
                .ok_or_else(|| Error::MissingBasis(label.to_string()))?;
            let dim = factorization.factor_dim(label)?;
            if basis.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: basis.dim(),
                });
            }
            Ok(basis)
        })
        .collect()
}

/// Joint outcome distribution of measuring every entity of `psi` in `order`.
/// Tuples list outcome indices in measurement order.
pub fn cascade_distribution<S: AsRef<str>>(
    psi: &StateVector,
    order: &[S],
    bases: &[MeasurementBasis],
) -> Result<OutcomeDistribution> {
    cascade_distribution_with(psi, order, bases, &biorthogonal_decompose)
}

pub fn cascade_distribution_with<S: AsRef<str>, D: Decomposer + ?Sized>(
    psi: &StateVector,
    order: &[S],
    bases: &[MeasurementBasis],
    decomposer: &D,
) -> Result<OutcomeDistribution> {
    let ordered = bases_in_order(psi, order, bases)?;
    let mut probabilities = BTreeMap::new();
    let start = CascadeState::new(psi.clone());
    enumerate(&start, &ordered, 1.0, decomposer, &mut probabilities)?;
    OutcomeDistribution::new(
        order.iter().map(|s| s.as_ref().to_string()).collect(),
        probabilities,
    )
}

fn enumerate<D: Decomposer + ?Sized>(
    state: &CascadeState,
    bases: &[&MeasurementBasis],
    running: f64,
    decomposer: &D,
    out: &mut BTreeMap<Vec<usize>, f64>,
) -> Result<()> {
    let depth = state.measured.len();
    if depth == bases.len() {
        out.insert(state.outcome_indices(), running);
        return Ok(());
    }
    let basis = bases[depth];
    let omega = proper_state_with(state, &basis.entity, decomposer)?;
    for (i, p) in outcome_probabilities(&omega, basis)?
        .into_iter()
        .enumerate()
    {
        let product = running * p;
        if p <= ZERO_PROBABILITY || product < BRANCH_CUTOFF {
            let mut prefix = state.outcome_indices();
            prefix.push(i);
            fill_completions(&mut prefix, &bases[depth + 1..], product, out);
            continue;
        }
        let next = advance_with(state, basis, i, decomposer)?;
        enumerate(&next, bases, product, decomposer, out)?;
    }
    Ok(())
}

fn fill_completions(
    prefix: &mut Vec<usize>,
    rest: &[&MeasurementBasis],
    value: f64,
    out: &mut BTreeMap<Vec<usize>, f64>,
) {
    match rest.split_first() {
        None => {
            out.insert(prefix.clone(), value);
        }
        Some((basis, tail)) => {
            for i in 0..basis.dim() {
                prefix.push(i);
                fill_completions(prefix, tail, value, out);
                prefix.pop();
            }
        }
    }
}
