//! Standard quantum-mechanical reference values.
//!
//! Everything here works from inner products on the full space and never
//! goes through a Schmidt decomposition, so it can serve as an independent
//! check on the cascade.

use std::collections::BTreeMap;

use crate::correlations::{
    bases_in_order, permutation_positions, MeasurementBasis, OutcomeDistribution,
};
use crate::error::{Error, Result};
use crate::hilbert::{CVector, StateVector, C64};

/// Outcome of [`compare_distributions`].
#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport {
    pub max_abs_error: f64,
    /// First tuple (in the key order of `a`) whose error exceeds the tolerance.
    pub offending_tuple: Option<Vec<usize>>,
    pub total_variation: f64,
}

impl ComparisonReport {
    pub fn passed(&self) -> bool {
        self.offending_tuple.is_none()
    }
}

/// `|⟨Ψ|φ_1 ⊗ … ⊗ φ_n⟩|²` with one outcome vector per factor, in the
/// factorization order of `psi`.
pub fn born_joint_probability(psi: &StateVector, outcomes: &[CVector]) -> Result<f64> {
    let dims = psi.factorization().dims();
    if outcomes.len() != dims.len() {
        return Err(Error::DimensionMismatch {
            expected: dims.len(),
            found: outcomes.len(),
        });
    }
    let mut product = CVector::from_element(1, C64::new(1.0, 0.0));
    for (phi, &d) in outcomes.iter().zip(dims) {
        if phi.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: phi.len(),
            });
        }
        product = product.kronecker(phi);
    }
    Ok(psi.amplitudes().dotc(&product).norm_sqr())
}

/// Born probabilities of every outcome tuple. Tuples follow the
/// factorization order of `psi`.
pub fn oracle_distribution(
    psi: &StateVector,
    bases: &[MeasurementBasis],
) -> Result<OutcomeDistribution> {
    let labels = psi.factorization().labels().to_vec();
    let ordered = bases_in_order(psi, &labels, bases)?;
    let mut probabilities = BTreeMap::new();
    let mut tuple = vec![0usize; ordered.len()];
    loop {
        let outcomes: Vec<CVector> = tuple
            .iter()
            .zip(&ordered)
            .map(|(&i, b)| b.vectors()[i].clone())
            .collect();
        probabilities.insert(tuple.clone(), born_joint_probability(psi, &outcomes)?);
        // odometer increment, last factor fastest
        let mut pos = tuple.len();
        loop {
            if pos == 0 {
                return OutcomeDistribution::new(labels, probabilities);
            }
            pos -= 1;
            tuple[pos] += 1;
            if tuple[pos] < ordered[pos].dim() {
                break;
            }
            tuple[pos] = 0;
        }
    }
}

/// `(⟨φ| ⊗ 1)Ψ` normalized: the state of the other factors once `entity`
/// is projected onto `φ`.
pub fn project_entity(psi: &StateVector, entity: &str, phi: &CVector) -> Result<StateVector> {
    let f = psi.factorization();
    let pos = f.position(entity)?;
    let dims = f.dims();
    let d = dims[pos];
    if phi.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: phi.len(),
        });
    }
    let before: usize = dims[..pos].iter().product();
    let after: usize = dims[pos + 1..].iter().product();
    let amps = psi.amplitudes();
    let mut out = CVector::zeros(before * after);
    for a in 0..before {
        for b in 0..after {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..d {
                acc += phi[i].conj() * amps[(a * d + i) * after + b];
            }
            out[a * after + b] = acc;
        }
    }
    let norm_sqr = out.norm_squared();
    if norm_sqr <= crate::correlations::ZERO_PROBABILITY {
        return Err(Error::ZeroProbabilityOutcome(norm_sqr));
    }
    StateVector::normalized(out, f.without(entity)?)
}

/// Pointwise and total-variation comparison. `b` is reindexed to the entity
/// order of `a` first; the key sets must then agree.
pub fn compare_distributions(
    a: &OutcomeDistribution,
    b: &OutcomeDistribution,
    tol: f64,
) -> Result<ComparisonReport> {
    permutation_positions(b.entities(), a.entities()).map_err(|_| Error::KeySetMismatch)?;
    let b = b.reindexed(a.entities())?;
    if a.len() != b.len() || a.iter().zip(b.iter()).any(|((ka, _), (kb, _))| ka != kb) {
        return Err(Error::KeySetMismatch);
    }
    let mut max_abs_error: f64 = 0.0;
    let mut offending_tuple = None;
    let mut l1 = 0.0;
    for ((key, pa), (_, pb)) in a.iter().zip(b.iter()) {
        let err = (pa - pb).abs();
        l1 += err;
        max_abs_error = max_abs_error.max(err);
        if err > tol && offending_tuple.is_none() {
            offending_tuple = Some(key.clone());
        }
    }
    Ok(ComparisonReport {
        max_abs_error,
        offending_tuple,
        total_variation: (0.5 * l1).min(1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::Factorization;
    use approx::assert_abs_diff_eq;

    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn v(amps: &[C64]) -> CVector {
        CVector::from_column_slice(amps)
    }

    fn qubits(n: usize) -> Factorization {
        Factorization::with_default_labels(vec![2; n]).unwrap()
    }

    fn ghz() -> StateVector {
        let mut a = vec![c(0., 0.); 8];
        a[0] = c(H, 0.);
        a[7] = c(H, 0.);
        StateVector::from_slice(&a, qubits(3)).unwrap()
    }

    fn singlet() -> StateVector {
        StateVector::from_slice(&[c(0., 0.), c(H, 0.), c(-H, 0.), c(0., 0.)], qubits(2)).unwrap()
    }

    fn computational(n: usize) -> Vec<MeasurementBasis> {
        (0..n)
            .map(|i| MeasurementBasis::computational(&i.to_string(), 2))
            .collect()
    }

    fn dist(entries: &[(usize, f64)]) -> OutcomeDistribution {
        OutcomeDistribution::new(
            vec!["a".into()],
            entries.iter().map(|&(k, p)| (vec![k], p)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn born_examples() {
        let k0 = v(&[c(1., 0.), c(0., 0.)]);
        let k1 = v(&[c(0., 0.), c(1., 0.)]);
        let plus = v(&[c(H, 0.), c(H, 0.)]);
        let minus = v(&[c(H, 0.), c(-H, 0.)]);
        let g = ghz();
        assert_abs_diff_eq!(
            born_joint_probability(&g, &[k0.clone(), k0.clone(), k0.clone()]).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            born_joint_probability(&g, &[k0.clone(), k0.clone(), k1]).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            born_joint_probability(&singlet(), &[plus, minus]).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        assert!(born_joint_probability(&g, &[k0.clone(), k0]).is_err());
    }

    #[test]
    fn oracle_examples() {
        let d = oracle_distribution(&ghz(), &computational(3)).unwrap();
        assert_eq!(d.len(), 8);
        assert_abs_diff_eq!(d.get(&[0, 0, 0]), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d.get(&[1, 1, 1]), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d.total(), 1.0, epsilon = 1e-15);

        let zz = StateVector::basis(qubits(2), 0).unwrap();
        let d = oracle_distribution(&zz, &computational(2)).unwrap();
        assert_eq!(d.get(&[0, 0]), 1.0);
        assert_eq!(d.total(), 1.0);

        let d = oracle_distribution(&singlet(), &computational(2)).unwrap();
        assert_abs_diff_eq!(d.get(&[0, 1]), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d.get(&[1, 0]), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn oracle_on_mixed_dimensions() {
        let f = Factorization::new(vec![3, 2], vec!["a", "b"]).unwrap();
        let psi = StateVector::basis(f, 3).unwrap(); // |1⟩|1⟩
        let bases = vec![
            MeasurementBasis::computational("b", 2),
            MeasurementBasis::computational("a", 3),
        ];
        let d = oracle_distribution(&psi, &bases).unwrap();
        assert_eq!(d.len(), 6);
        assert_eq!(d.get(&[1, 1]), 1.0);
    }

    #[test]
    fn projection_examples() {
        let k0 = v(&[c(1., 0.), c(0., 0.)]);
        let r = project_entity(&singlet(), "0", &k0).unwrap();
        assert_eq!(r.factorization().labels(), &["1"]);
        assert_abs_diff_eq!((r.amplitudes()[1] - c(1., 0.)).norm(), 0.0, epsilon = 1e-15);
        let plus = v(&[c(H, 0.), c(H, 0.)]);
        let r = project_entity(&ghz(), "1", &plus).unwrap();
        assert_abs_diff_eq!(r.amplitudes()[0].re, H, epsilon = 1e-15);
        assert_abs_diff_eq!(r.amplitudes()[3].re, H, epsilon = 1e-15);
        let zz = StateVector::basis(qubits(2), 0).unwrap();
        assert!(matches!(
            project_entity(&zz, "0", &v(&[c(0., 0.), c(1., 0.)])),
            Err(Error::ZeroProbabilityOutcome(_))
        ));
    }

    #[test]
    fn comparison_examples() {
        let a = dist(&[(0, 0.5), (1, 0.5)]);
        let r = compare_distributions(&a, &a, 1e-9).unwrap();
        assert_eq!(r.max_abs_error, 0.0);
        assert_eq!(r.offending_tuple, None);
        assert_eq!(r.total_variation, 0.0);

        let b = dist(&[(0, 0.6), (1, 0.4)]);
        let r = compare_distributions(&a, &b, 1e-9).unwrap();
        assert_abs_diff_eq!(r.max_abs_error, 0.1, epsilon = 1e-15);
        assert_eq!(r.offending_tuple, Some(vec![0]));
        assert_abs_diff_eq!(r.total_variation, 0.1, epsilon = 1e-15);
        assert!(!r.passed());

        let c3 = dist(&[(0, 0.5), (2, 0.5)]);
        assert_eq!(
            compare_distributions(&a, &c3, 1e-9),
            Err(Error::KeySetMismatch)
        );
        let other = OutcomeDistribution::new(
            vec!["z".into()],
            a.iter().map(|(k, p)| (k.clone(), *p)).collect(),
        )
        .unwrap();
        assert_eq!(
            compare_distributions(&a, &other, 1e-9),
            Err(Error::KeySetMismatch)
        );
    }

    #[test]
    fn comparison_reindexes_entities() {
        let g = ghz();
        let a = oracle_distribution(&g, &computational(3)).unwrap();
        let b = a.reindexed(&["2", "0", "1"]).unwrap();
        let r = compare_distributions(&a, &b, 1e-12).unwrap();
        assert!(r.passed());
        assert_eq!(r.max_abs_error, 0.0);
    }
}
