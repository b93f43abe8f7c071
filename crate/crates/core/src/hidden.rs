//! Hidden-measurement layer.
//!
//! Each entity gets a parameter `λ ∈ [0, 1)` with uniform measure. For a fixed
//! `λ` the measurement is a deterministic classical observable: the outcome is
//! the basis index whose cumulative-probability interval contains `λ`, so the
//! set of `λ` producing outcome `i` has measure `p_i = ⟨φ_i|ω|φ_i⟩`. Composing
//! these observables with the hidden-correlation updates gives a deterministic
//! map from `(λ_1, …, λ_n)` to outcome tuples for the compound system.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::correlations::{
    advance, bases_in_order, outcome_probabilities, proper_state, threshold_index, CascadeState,
    MeasurementBasis, OutcomeDistribution, ProperState, ZERO_PROBABILITY,
};
use crate::error::{Error, Result};
use crate::hilbert::StateVector;

/// Samples per generator stream in [`monte_carlo_distribution`].
const CHUNK: usize = 4096;

/// Hidden-measurement representation of one entity's observable.
#[derive(Clone, Debug, PartialEq)]
pub struct HiddenMeasurementRep {
    basis: MeasurementBasis,
}

/// Half-open interval `[lower, upper)` of `λ` mapped to `index`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaCell {
    pub index: usize,
    pub lower: f64,
    pub upper: f64,
}

impl LambdaCell {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, lambda: f64) -> bool {
        self.lower <= lambda && lambda < self.upper
    }
}

impl HiddenMeasurementRep {
    pub fn new(basis: MeasurementBasis) -> Self {
        HiddenMeasurementRep { basis }
    }

    pub fn entity(&self) -> &str {
        self.basis.entity()
    }

    pub fn basis(&self) -> &MeasurementBasis {
        &self.basis
    }

    /// Partition of `[0, 1)` into the outcome cells for proper state `omega`.
    /// Outcomes with probability `<= ZERO_PROBABILITY` get no cell; the last
    /// cell is closed off at 1.
    pub fn cells(&self, omega: &ProperState) -> Result<Vec<LambdaCell>> {
        check_dim(&self.basis, omega)?;
        let probabilities = outcome_probabilities(omega, &self.basis)?;
        let mut cells = Vec::new();
        let mut cumulative = 0.0;
        for (index, p) in probabilities.into_iter().enumerate() {
            if p <= ZERO_PROBABILITY {
                continue;
            }
            let lower = cumulative;
            cumulative += p;
            cells.push(LambdaCell {
                index,
                lower,
                upper: cumulative,
            });
        }
        match cells.last_mut() {
            Some(last) => last.upper = 1.0,
            None => return Err(Error::ZeroProbabilityOutcome(cumulative)),
        }
        Ok(cells)
    }
}

fn check_dim(basis: &MeasurementBasis, omega: &ProperState) -> Result<()> {
    if basis.dim() != omega.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: omega.dim(),
        });
    }
    Ok(())
}

/// One `λ` per entity, in the factorization order of the state it is used with.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaVector(Vec<f64>);

impl LambdaVector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = components.iter().find(|l| !(0.0..1.0).contains(*l)) {
            return Err(Error::InvalidLambda(bad));
        }
        Ok(LambdaVector(components))
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn sample<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        LambdaVector((0..len).map(|_| rng.random::<f64>()).collect())
    }
}

/// Outcome of the classical observable `φ_λ` on proper state `omega`.
pub fn classical_observable(
    rep: &HiddenMeasurementRep,
    omega: &ProperState,
    lambda: f64,
) -> Result<usize> {
    check_dim(&rep.basis, omega)?;
    let probabilities = outcome_probabilities(omega, &rep.basis)?;
    threshold_index(&probabilities, lambda)
        .ok_or(Error::ZeroProbabilityOutcome(probabilities.iter().sum()))
}

/// Memoized cascade walk: for each prefix of outcomes, the cascade state and
/// the proper state of the next entity to be measured.
struct Walker<'a> {
    order: Vec<&'a HiddenMeasurementRep>,
    lambda_slot: Vec<usize>,
    nodes: HashMap<Vec<usize>, (CascadeState, ProperState)>,
    root: CascadeState,
}

impl<'a> Walker<'a> {
    fn new<S: AsRef<str>>(
        psi: &StateVector,
        order: &[S],
        reps: &'a [HiddenMeasurementRep],
    ) -> Result<Self> {
        let bases: Vec<MeasurementBasis> = reps.iter().map(|r| r.basis.clone()).collect();
        bases_in_order(psi, order, &bases)?;
        let labels = psi.factorization().labels();
        let order_reps = order
            .iter()
            .map(|label| {
                reps.iter()
                    .find(|r| r.entity() == label.as_ref())
                    .expect("bases_in_order checked presence")
            })
            .collect();
        let lambda_slot = order
            .iter()
            .map(|label| {
                labels
                    .iter()
                    .position(|l| l == label.as_ref())
                    .expect("checked")
            })
            .collect();
        Ok(Walker {
            order: order_reps,
            lambda_slot,
            nodes: HashMap::new(),
            root: CascadeState::new(psi.clone()),
        })
    }

    fn node(&mut self, prefix: &[usize]) -> Result<(CascadeState, ProperState)> {
        if let Some(n) = self.nodes.get(prefix) {
            return Ok(n.clone());
        }
        let state = match prefix.split_last() {
            None => self.root.clone(),
            Some((&last, head)) => {
                let (parent, _) = self.node(head)?;
                advance(&parent, self.order[head.len()].basis(), last)?
            }
        };
        let omega = proper_state(&state, self.order[prefix.len()].entity())?;
        self.nodes
            .insert(prefix.to_vec(), (state.clone(), omega.clone()));
        Ok((state, omega))
    }

    /// Outcome tuple in measurement order.
    fn run(&mut self, lambda: &LambdaVector) -> Result<Vec<usize>> {
        if lambda.0.len() != self.order.len() {
            return Err(Error::DimensionMismatch {
                expected: self.order.len(),
                found: lambda.0.len(),
            });
        }
        let mut outcome = Vec::with_capacity(self.order.len());
        for step in 0..self.order.len() {
            let (_, omega) = self.node(&outcome)?;
            let l = lambda.0[self.lambda_slot[step]];
            outcome.push(classical_observable(self.order[step], &omega, l)?);
        }
        Ok(outcome)
    }
}

/// Deterministic outcome tuple (measurement order) of the compound hidden
/// measurement selected by `lambda`.
pub fn combined_hidden_measurement<S: AsRef<str>>(
    psi: &StateVector,
    order: &[S],
    reps: &[HiddenMeasurementRep],
    lambda: &LambdaVector,
) -> Result<Vec<usize>> {
    Walker::new(psi, order, reps)?.run(lambda)
}

/// Region of `λ` space mapped to one outcome tuple: a product of intervals.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaBox {
    /// Outcome tuple in measurement order.
    pub outcome: Vec<usize>,
    /// Interval per entity, in factorization order.
    pub intervals: Vec<(f64, f64)>,
}

impl LambdaBox {
    pub fn volume(&self) -> f64 {
        self.intervals.iter().map(|(lo, hi)| hi - lo).product()
    }

    pub fn midpoint(&self) -> LambdaVector {
        LambdaVector(
            self.intervals
                .iter()
                .map(|(lo, hi)| 0.5 * (lo + hi))
                .collect(),
        )
    }

    pub fn lower_corner(&self) -> LambdaVector {
        LambdaVector(self.intervals.iter().map(|(lo, _)| *lo).collect())
    }
}

/// Exact partition of `[0,1)^n` into the boxes on which
/// [`combined_hidden_measurement`] is constant.
pub fn lambda_boxes<S: AsRef<str>>(
    psi: &StateVector,
    order: &[S],
    reps: &[HiddenMeasurementRep],
) -> Result<Vec<LambdaBox>> {
    let mut walker = Walker::new(psi, order, reps)?;
    let mut out = Vec::new();
    let mut intervals = vec![(0.0, 1.0); walker.order.len()];
    collect_boxes(&mut walker, &mut Vec::new(), &mut intervals, &mut out)?;
    Ok(out)
}

fn collect_boxes(
    walker: &mut Walker<'_>,
    prefix: &mut Vec<usize>,
    intervals: &mut Vec<(f64, f64)>,
    out: &mut Vec<LambdaBox>,
) -> Result<()> {
    let step = prefix.len();
    if step == walker.order.len() {
        out.push(LambdaBox {
            outcome: prefix.clone(),
            intervals: intervals.clone(),
        });
        return Ok(());
    }
    let (_, omega) = walker.node(prefix)?;
    let rep = walker.order[step];
    let slot = walker.lambda_slot[step];
    for cell in rep.cells(&omega)? {
        intervals[slot] = (cell.lower, cell.upper);
        prefix.push(cell.index);
        collect_boxes(walker, prefix, intervals, out)?;
        prefix.pop();
    }
    intervals[slot] = (0.0, 1.0);
    Ok(())
}

/// Law of [`combined_hidden_measurement`] under the uniform product measure,
/// computed from box volumes. Tuples follow `order`; every tuple is present.
pub fn pushforward_distribution<S: AsRef<str>>(
    psi: &StateVector,
    order: &[S],
    reps: &[HiddenMeasurementRep],
) -> Result<OutcomeDistribution> {
    let mut probabilities = all_tuples(psi, order, reps)?;
    for b in lambda_boxes(psi, order, reps)? {
        *probabilities.get_mut(&b.outcome).expect("outcome in range") += b.volume();
    }
    OutcomeDistribution::new(labels_of(order), probabilities)
}

/// Empirical outcome frequencies over `n` i.i.d. uniform `λ` vectors.
///
/// Samples are split into fixed-size chunks; chunk `k` draws from a ChaCha
/// stream keyed by `(seed, k)`, so the result does not depend on how chunks
/// are scheduled across threads.
pub fn monte_carlo_distribution<S: AsRef<str> + Sync>(
    psi: &StateVector,
    order: &[S],
    reps: &[HiddenMeasurementRep],
    n: usize,
    seed: u64,
) -> Result<OutcomeDistribution> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let entities = psi.factorization().len();
    let chunks = n.div_ceil(CHUNK);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut walker = Walker::new(psi, order, reps)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
            for _ in 0..CHUNK.min(n - k * CHUNK) {
                let lambda = LambdaVector::sample(entities, &mut rng);
                *counts.entry(walker.run(&lambda)?).or_default() += 1;
            }
            Ok(counts)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut probabilities = all_tuples(psi, order, reps)?;
    for chunk in counts {
        for (tuple, count) in chunk {
            *probabilities.get_mut(&tuple).expect("outcome in range") += count as f64;
        }
    }
    for p in probabilities.values_mut() {
        *p /= n as f64;
    }
    OutcomeDistribution::new(labels_of(order), probabilities)
}

fn labels_of<S: AsRef<str>>(order: &[S]) -> Vec<String> {
    order.iter().map(|s| s.as_ref().to_string()).collect()
}

fn all_tuples<S: AsRef<str>>(
    psi: &StateVector,
    order: &[S],
    reps: &[HiddenMeasurementRep],
) -> Result<BTreeMap<Vec<usize>, f64>> {
    let f = psi.factorization();
    let dims = order
        .iter()
        .map(|l| f.factor_dim(l.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    if reps.len() < dims.len() {
        return Err(Error::InvalidOrder);
    }
    let mut tuples = vec![Vec::new()];
    for d in dims {
        tuples = tuples
            .into_iter()
            .flat_map(|t| {
                (0..d).map(move |i| {
                    let mut t = t.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
    }
    Ok(tuples.into_iter().map(|t| (t, 0.0)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlations::cascade_distribution;
    use crate::hilbert::{DensityMatrix, Factorization, C64};
    use approx::assert_abs_diff_eq;

    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
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

    fn reps(n: usize) -> Vec<HiddenMeasurementRep> {
        (0..n)
            .map(|i| HiddenMeasurementRep::new(MeasurementBasis::computational(&i.to_string(), 2)))
            .collect()
    }

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| i.to_string()).collect()
    }

    fn lam(v: &[f64]) -> LambdaVector {
        LambdaVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn classical_observable_examples() {
        let rep = &reps(1)[0];
        let omega = ProperState::new("0", DensityMatrix::from_diagonal(&[0.25, 0.75]).unwrap());
        assert_eq!(classical_observable(rep, &omega, 0.1).unwrap(), 0);
        assert_eq!(classical_observable(rep, &omega, 0.5).unwrap(), 1);
        let pure = ProperState::new("0", DensityMatrix::from_diagonal(&[1.0, 0.0]).unwrap());
        for l in [0.0, 0.4, 0.999_999_9] {
            assert_eq!(classical_observable(rep, &pure, l).unwrap(), 0);
        }
        let wrong = ProperState::new("0", DensityMatrix::maximally_mixed(3));
        assert!(classical_observable(rep, &wrong, 0.2).is_err());
    }

    #[test]
    fn cells_partition_unit_interval() {
        let rep = &reps(1)[0];
        let omega = ProperState::new("0", DensityMatrix::from_diagonal(&[0.25, 0.75]).unwrap());
        let cells = rep.cells(&omega).unwrap();
        assert_eq!(cells.len(), 2);
        assert_eq!(cells[0].lower, 0.0);
        assert_eq!(cells[0].upper, cells[1].lower);
        assert_eq!(cells[1].upper, 1.0);
        assert_abs_diff_eq!(cells[0].width(), 0.25, epsilon = 1e-15);
        let pure = ProperState::new("0", DensityMatrix::from_diagonal(&[0.0, 1.0]).unwrap());
        let cells = rep.cells(&pure).unwrap();
        assert_eq!(
            cells,
            vec![LambdaCell {
                index: 1,
                lower: 0.0,
                upper: 1.0
            }]
        );
    }

    #[test]
    fn lambda_vector_domain() {
        assert!(LambdaVector::new(vec![0.0, 0.5]).is_ok());
        assert!(matches!(
            LambdaVector::new(vec![1.0]),
            Err(Error::InvalidLambda(_))
        ));
        assert!(LambdaVector::new(vec![-0.1]).is_err());
    }

    #[test]
    fn combined_examples() {
        let g = ghz();
        assert_eq!(
            combined_hidden_measurement(&g, &labels(3), &reps(3), &lam(&[0.3, 0.9, 0.9])).unwrap(),
            vec![0, 0, 0]
        );
        let p = StateVector::basis(qubits(2), 1).unwrap();
        for l in [[0.0, 0.0], [0.5, 0.99], [0.99, 0.3]] {
            assert_eq!(
                combined_hidden_measurement(&p, &labels(2), &reps(2), &lam(&l)).unwrap(),
                vec![0, 1]
            );
        }
        for second in [0.0, 0.5, 0.99] {
            assert_eq!(
                combined_hidden_measurement(&singlet(), &labels(2), &reps(2), &lam(&[0.6, second]))
                    .unwrap(),
                vec![1, 0]
            );
        }
    }

    #[test]
    fn lambda_follows_entity_not_measurement_order() {
        // measuring entity 2 first still reads its own λ component
        let g = ghz();
        let out =
            combined_hidden_measurement(&g, &["2", "0", "1"], &reps(3), &lam(&[0.1, 0.1, 0.8]))
                .unwrap();
        assert_eq!(out, vec![1, 1, 1]);
    }

    #[test]
    fn pushforward_matches_cascade() {
        for psi in [ghz(), singlet()] {
            let n = psi.factorization().len();
            let push = pushforward_distribution(&psi, &labels(n), &reps(n)).unwrap();
            let cascade = cascade_distribution(
                &psi,
                &labels(n),
                &reps(n)
                    .iter()
                    .map(|r| r.basis().clone())
                    .collect::<Vec<_>>(),
            )
            .unwrap();
            for (k, p) in cascade.iter() {
                assert_abs_diff_eq!(push.get(k), *p, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn monte_carlo_is_seeded() {
        let g = ghz();
        let a = monte_carlo_distribution(&g, &labels(3), &reps(3), 10_000, 7).unwrap();
        let b = monte_carlo_distribution(&g, &labels(3), &reps(3), 10_000, 7).unwrap();
        let other = monte_carlo_distribution(&g, &labels(3), &reps(3), 10_000, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, other);
        assert_eq!(a.len(), 8);
        assert_abs_diff_eq!(a.total(), 1.0, epsilon = 1e-12);
        assert_eq!(a.get(&[0, 1, 0]), 0.0);
    }

    #[test]
    fn monte_carlo_examples() {
        let zz = StateVector::basis(qubits(2), 0).unwrap();
        for n in [1, 17, 5000] {
            let d = monte_carlo_distribution(&zz, &labels(2), &reps(2), n, 3).unwrap();
            assert_eq!(d.get(&[0, 0]), 1.0);
        }
        let d = monte_carlo_distribution(&singlet(), &labels(2), &reps(2), 100_000, 11).unwrap();
        assert_eq!(d.get(&[0, 0]), 0.0);
        assert_eq!(d.get(&[1, 1]), 0.0);
        assert_eq!(
            monte_carlo_distribution(&zz, &labels(2), &reps(2), 0, 3),
            Err(Error::EmptySample)
        );
    }
}
