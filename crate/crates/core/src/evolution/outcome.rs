use std::collections::BTreeMap;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::state::{BasisKet, JointState, PathId};

/// Probabilities of the four joint detector outcomes and of each radiation label.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutcomeDistribution<T: Scalar> {
    pub p_ee: T,
    pub p_ef: T,
    pub p_fe: T,
    pub p_ff: T,
    pub p_gamma: BTreeMap<String, T>,
}

impl<T: Scalar> OutcomeDistribution<T> {
    pub fn gamma_total(&self) -> T {
        self.p_gamma.values().fold(T::zero(), |a, &b| a + b)
    }

    pub fn total(&self) -> T {
        self.p_ee + self.p_ef + self.p_fe + self.p_ff + self.gamma_total()
    }

    /// Probability of both particles being detected, on `(minus, plus)` paths.
    pub fn detection(&self, minus: PathId, plus: PathId) -> T {
        match (minus, plus) {
            (PathId::E, PathId::E) => self.p_ee,
            (PathId::E, PathId::F) => self.p_ef,
            (PathId::F, PathId::E) => self.p_fe,
            (PathId::F, PathId::F) => self.p_ff,
            _ => T::zero(),
        }
    }
}

/// Squared magnitudes of a final-stage state.
pub fn outcome_distribution<T: Scalar>(state: &JointState<T>) -> Result<OutcomeDistribution<T>> {
    let mut d = OutcomeDistribution {
        p_ee: T::zero(),
        p_ef: T::zero(),
        p_fe: T::zero(),
        p_ff: T::zero(),
        p_gamma: BTreeMap::new(),
    };
    for (ket, amp) in state.terms() {
        let p = amp.norm_sqr();
        match ket {
            BasisKet::Gamma(label) => {
                *d.p_gamma.entry(label.clone()).or_insert_with(T::zero) += p;
            }
            &BasisKet::Pair { minus, plus } => match (minus, plus) {
                (PathId::E, PathId::E) => d.p_ee = p,
                (PathId::E, PathId::F) => d.p_ef = p,
                (PathId::F, PathId::E) => d.p_fe = p,
                (PathId::F, PathId::F) => d.p_ff = p,
                _ => {
                    return Err(Error::StageMismatch {
                        expected: 3,
                        minus,
                        plus,
                    })
                }
            },
        }
    }
    Ok(d)
}

/// Drops gamma terms and renormalizes the particle sector to unit norm.
/// The global phase is left as is.
pub fn postselect_survivors<T: Scalar>(state: &JointState<T>) -> Result<JointState<T>> {
    let survivors = state.particle_sector();
    let norm_sq = survivors.norm_squared();
    if survivors.is_empty() || norm_sq <= T::zero() {
        return Err(Error::NoSurvivors);
    }
    Ok(survivors.scaled(Complex::new(T::one() / norm_sq.sqrt(), T::zero())))
}
