//! Experiment description and report generation for the batch front end.

use hcrep::{
    biorthogonal_decompose, cascade_distribution, compare_distributions, monte_carlo_distribution,
    oracle_distribution, proper_state, CascadeState, ComparisonReport, DensityMatrix,
    HiddenMeasurementRep, MeasurementBasis, OutcomeDistribution, StateVector,
};
use serde::ser::Error as _;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::error::CliError;
use crate::io::{resolve_basis, to_pair};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Distribution,
    Sample,
    Compare,
    Decompose,
    ProperStates,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Distribution => "distribution",
            Mode::Sample => "sample",
            Mode::Compare => "compare",
            Mode::Decompose => "decompose",
            Mode::ProperStates => "proper-states",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub state: StateVector,
    /// Measurement order; every label of `state` exactly once.
    pub order: Vec<String>,
    /// One basis per entity.
    pub bases: Vec<MeasurementBasis>,
    pub mode: Mode,
    pub n: usize,
    pub seed: u64,
    pub tol: f64,
    /// Whether a violated tolerance makes the run fail in `sample` mode.
    pub enforce_sample_tol: bool,
    /// Restricts `decompose` to one focus entity.
    pub focus: Option<String>,
}

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_SAMPLES: usize = 100_000;

impl ExperimentSpec {
    /// Defaults: factorization order, computational bases, `n = 100000`,
    /// `seed = 0`, `tol = 1e-9`.
    pub fn new(state: StateVector, mode: Mode) -> Self {
        let f = state.factorization();
        let order = f.labels().to_vec();
        let bases = f
            .labels()
            .iter()
            .zip(f.dims())
            .map(|(l, &d)| MeasurementBasis::computational(l, d))
            .collect();
        ExperimentSpec {
            state,
            order,
            bases,
            mode,
            n: DEFAULT_SAMPLES,
            seed: 0,
            tol: DEFAULT_TOL,
            enforce_sample_tol: false,
            focus: None,
        }
    }

    /// Replaces the basis of `entity` by a preset or a basis document.
    pub fn set_basis(&mut self, entity: &str, spec: &str) -> Result<(), CliError> {
        let dim = self.state.factorization().factor_dim(entity)?;
        let basis = resolve_basis(entity, dim, spec)?;
        let slot = self
            .bases
            .iter_mut()
            .find(|b| b.entity() == entity)
            .expect("one basis per entity");
        *slot = basis;
        Ok(())
    }
}

/// Serialized report plus whether a tolerance was violated.
#[derive(Debug)]
pub struct RunOutput {
    pub report: String,
    pub violation: bool,
}

/// Real number printed with 17 significant digits.
#[derive(Clone, Copy, Debug)]
pub struct Precise(pub f64);

impl Serialize for Precise {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return serializer.serialize_none();
        }
        let raw = RawValue::from_string(format!("{:.16e}", self.0)).map_err(S::Error::custom)?;
        raw.serialize(serializer)
    }
}

#[derive(Serialize)]
struct TupleProbability {
    outcome: Vec<usize>,
    probability: Precise,
}

#[derive(Serialize)]
struct DistributionBody {
    entities: Vec<String>,
    probabilities: Vec<TupleProbability>,
}

impl From<&OutcomeDistribution> for DistributionBody {
    fn from(d: &OutcomeDistribution) -> Self {
        DistributionBody {
            entities: d.entities().to_vec(),
            probabilities: d
                .iter()
                .map(|(k, &p)| TupleProbability {
                    outcome: k.clone(),
                    probability: Precise(p),
                })
                .collect(),
        }
    }
}

#[derive(Serialize)]
struct ComparisonBody {
    max_abs_error: Precise,
    offending_tuple: Option<Vec<usize>>,
    total_variation: Precise,
    tol: Precise,
    passed: bool,
}

impl ComparisonBody {
    fn new(r: &ComparisonReport, tol: f64) -> Self {
        ComparisonBody {
            max_abs_error: Precise(r.max_abs_error),
            offending_tuple: r.offending_tuple.clone(),
            total_variation: Precise(r.total_variation),
            tol: Precise(tol),
            passed: r.max_abs_error <= tol,
        }
    }
}

#[derive(Serialize)]
struct DecompositionBody {
    focus: String,
    rest: Vec<String>,
    coefficients: Vec<[f64; 2]>,
    left_vectors: Vec<Vec<[f64; 2]>>,
    right_vectors: Vec<Vec<[f64; 2]>>,
}

#[derive(Serialize)]
struct ProperStateBody {
    entity: String,
    matrix: Vec<Vec<[f64; 2]>>,
}

fn matrix_rows(rho: &DensityMatrix) -> Vec<Vec<[f64; 2]>> {
    let m = rho.entries();
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| to_pair(m[(i, j)])).collect())
        .collect()
}

#[derive(Serialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
enum Report {
    Distribution {
        order: Vec<String>,
        distribution: DistributionBody,
    },
    Compare {
        order: Vec<String>,
        cascade: DistributionBody,
        oracle: DistributionBody,
        comparison: ComparisonBody,
    },
    Sample {
        order: Vec<String>,
        n: usize,
        seed: u64,
        empirical: DistributionBody,
        oracle: DistributionBody,
        comparison: ComparisonBody,
    },
    Decompose {
        decompositions: Vec<DecompositionBody>,
    },
    ProperStates {
        proper_states: Vec<ProperStateBody>,
    },
}

pub fn run(spec: &ExperimentSpec) -> Result<RunOutput, CliError> {
    let psi = &spec.state;
    let mut violation = false;
    let report = match spec.mode {
        Mode::Distribution => {
            let d = cascade_distribution(psi, &spec.order, &spec.bases)?;
            Report::Distribution {
                order: spec.order.clone(),
                distribution: (&d).into(),
            }
        }
        Mode::Compare => {
            let cascade = cascade_distribution(psi, &spec.order, &spec.bases)?;
            let oracle = oracle_distribution(psi, &spec.bases)?.reindexed(&spec.order)?;
            let r = compare_distributions(&cascade, &oracle, spec.tol)?;
            violation = r.max_abs_error > spec.tol;
            Report::Compare {
                order: spec.order.clone(),
                cascade: (&cascade).into(),
                oracle: (&oracle).into(),
                comparison: ComparisonBody::new(&r, spec.tol),
            }
        }
        Mode::Sample => {
            let reps: Vec<HiddenMeasurementRep> = spec
                .bases
                .iter()
                .cloned()
                .map(HiddenMeasurementRep::new)
                .collect();
            let empirical = monte_carlo_distribution(psi, &spec.order, &reps, spec.n, spec.seed)?;
            let oracle = oracle_distribution(psi, &spec.bases)?.reindexed(&spec.order)?;
            let r = compare_distributions(&empirical, &oracle, spec.tol)?;
            violation = spec.enforce_sample_tol && r.max_abs_error > spec.tol;
            Report::Sample {
                order: spec.order.clone(),
                n: spec.n,
                seed: spec.seed,
                empirical: (&empirical).into(),
                oracle: (&oracle).into(),
                comparison: ComparisonBody::new(&r, spec.tol),
            }
        }
        Mode::Decompose => {
            let labels: Vec<String> = match &spec.focus {
                Some(focus) => {
                    psi.factorization().position(focus)?;
                    vec![focus.clone()]
                }
                None => psi.factorization().labels().to_vec(),
            };
            let decompositions = labels
                .iter()
                .map(|label| {
                    let d = biorthogonal_decompose(psi, label)?;
                    let pairs = |vs: &[hcrep::CVector]| -> Vec<Vec<[f64; 2]>> {
                        vs.iter()
                            .map(|v| v.iter().map(|&c| to_pair(c)).collect())
                            .collect()
                    };
                    Ok(DecompositionBody {
                        focus: label.clone(),
                        rest: d.rest().labels().to_vec(),
                        coefficients: d.coefficients().iter().map(|&c| to_pair(c)).collect(),
                        left_vectors: pairs(d.left_vectors()),
                        right_vectors: pairs(d.right_vectors()),
                    })
                })
                .collect::<Result<Vec<_>, hcrep::Error>>()?;
            Report::Decompose { decompositions }
        }
        Mode::ProperStates => {
            let cascade = CascadeState::new(psi.clone());
            let proper_states = psi
                .factorization()
                .labels()
                .iter()
                .map(|label| {
                    let omega = proper_state(&cascade, label)?;
                    Ok(ProperStateBody {
                        entity: label.clone(),
                        matrix: matrix_rows(omega.matrix()),
                    })
                })
                .collect::<Result<Vec<_>, hcrep::Error>>()?;
            Report::ProperStates { proper_states }
        }
    };
    let report = serde_json::to_string_pretty(&report)?;
    Ok(RunOutput { report, violation })
}
