//! Seeded random states, unitaries and bases for property tests and
//! experiments.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::correlations::MeasurementBasis;
use crate::error::Result;
use crate::hilbert::{CMatrix, CVector, Factorization, StateVector, C64};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random pure state on `factorization`.
pub fn random_state<R: Rng + ?Sized>(factorization: Factorization, rng: &mut R) -> StateVector {
    let v = CVector::from_fn(factorization.total_dim(), |_, _| gaussian(rng));
    StateVector::normalized(v, factorization).expect("gaussian vector is nonzero")
}

/// Haar-random unitary: QR of a complex Ginibre matrix with the phases of
/// `R`'s diagonal moved into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = DVector::from_fn(dim, |i, _| {
        let d = r[(i, i)];
        if d.norm() > 0.0 {
            d / C64::from(d.norm())
        } else {
            C64::new(1.0, 0.0)
        }
    });
    q * CMatrix::from_diagonal(&phases)
}

pub fn random_basis<R: Rng + ?Sized>(
    entity: &str,
    dim: usize,
    rng: &mut R,
) -> Result<MeasurementBasis> {
    MeasurementBasis::from_unitary(entity, &random_unitary(dim, rng))
}

/// One random basis per factor, in factorization order.
pub fn random_bases<R: Rng + ?Sized>(
    factorization: &Factorization,
    rng: &mut R,
) -> Result<Vec<MeasurementBasis>> {
    factorization
        .labels()
        .iter()
        .zip(factorization.dims())
        .map(|(l, &d)| random_basis(l, d, rng))
        .collect()
}

/// Random state that is a product across `entity | rest`; the rest is an
/// arbitrary (generally entangled) random state.
pub fn random_split_state<R: Rng + ?Sized>(
    factorization: &Factorization,
    entity: &str,
    rng: &mut R,
) -> Result<StateVector> {
    let single = Factorization::single(entity, factorization.factor_dim(entity)?)?;
    let rest = factorization.without(entity)?;
    let a = random_state(single, rng);
    let b = random_state(rest, rng);
    // place the entity's factor at its original position
    let (before, d, after) = factorization.split(entity)?;
    let mut amps = CVector::zeros(factorization.total_dim());
    for x in 0..before {
        for i in 0..d {
            for y in 0..after {
                amps[(x * d + i) * after + y] = a.amplitudes()[i] * b.amplitudes()[x * after + y];
            }
        }
    }
    StateVector::normalized(amps, factorization.clone())
}
