//! Stage-by-stage propagation of the joint state through a scheme.
//!
//! The pipeline is fixed: stage 1, annihilation, stage 2, stage 3, starting
//! from `|IN,IN>`. Gamma kets are absorbing: once a pair annihilates, later
//! stages leave its amplitude untouched.

mod bell;
mod oracle;
mod outcome;

pub use bell::{bell_overlap, bell_state, BellKind};
pub use oracle::dense_oracle;
pub use outcome::{outcome_distribution, postselect_survivors, OutcomeDistribution};

use num_complex::Complex;

use crate::circuit::{Scheme, WingCircuit};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::state::{BasisKet, JointState, PathId, Wing};

type Branches<T> = [(PathId, Complex<T>); 2];

fn unit_phase<T: Scalar>(phi: T) -> Complex<T> {
    Complex::from_polar(T::one(), phi)
}

/// Where one path of a wing goes in the given stage (1..=3), with amplitudes.
fn local_branches<T: Scalar>(circuit: &WingCircuit<T>, stage: u8, path: PathId) -> Branches<T> {
    let bs = circuit.splitter(stage as usize);
    let t = Complex::new(bs.t, T::zero());
    let ir = Complex::new(T::zero(), bs.r);
    match (stage, path) {
        (1, PathId::In) => {
            let ab = unit_phase(circuit.phases.ab());
            [(PathId::A, t), (PathId::B, ir * ab)]
        }
        (2, PathId::A) => {
            let cd = unit_phase(circuit.phases.cd());
            [(PathId::C, t), (PathId::D, ir * cd)]
        }
        (2, PathId::B) => {
            let cd = unit_phase(circuit.phases.cd());
            [(PathId::C, ir), (PathId::D, t * cd)]
        }
        (3, PathId::C) => [(PathId::E, t), (PathId::F, ir)],
        (3, PathId::D) => [(PathId::E, ir), (PathId::F, t)],
        _ => unreachable!("stage {stage} has no input {path:?}"),
    }
}

fn apply_stage<T: Scalar>(
    state: &JointState<T>,
    scheme: &Scheme<T>,
    stage: u8,
) -> Result<JointState<T>> {
    let input_stage = stage - 1;
    let mut out = JointState::empty(state.tolerance());
    for (ket, amp) in state.terms() {
        match ket {
            BasisKet::Gamma(_) => out.accumulate(ket.clone(), *amp),
            &BasisKet::Pair { minus, plus } => {
                if minus.stage() != input_stage || plus.stage() != input_stage {
                    return Err(Error::StageMismatch {
                        expected: input_stage,
                        minus,
                        plus,
                    });
                }
                let m_out = local_branches(scheme.wing(Wing::Minus), stage, minus);
                let p_out = local_branches(scheme.wing(Wing::Plus), stage, plus);
                for (m_path, m_amp) in m_out {
                    for (p_path, p_amp) in p_out {
                        out.accumulate(
                            BasisKet::Pair {
                                minus: m_path,
                                plus: p_path,
                            },
                            *amp * m_amp * p_amp,
                        );
                    }
                }
            }
        }
    }
    out.prune();
    Ok(out)
}

/// First splitter of each wing, then the `ab` phase on path `B`.
pub fn apply_stage1<T: Scalar>(state: &JointState<T>, scheme: &Scheme<T>) -> Result<JointState<T>> {
    apply_stage(state, scheme, 1)
}

/// Second splitter of each wing, then the `cd` phase on path `D`.
pub fn apply_stage2<T: Scalar>(state: &JointState<T>, scheme: &Scheme<T>) -> Result<JointState<T>> {
    apply_stage(state, scheme, 2)
}

pub fn apply_stage3<T: Scalar>(state: &JointState<T>, scheme: &Scheme<T>) -> Result<JointState<T>> {
    apply_stage(state, scheme, 3)
}

/// Relabels every pair term matched by an annihilation rule as the rule's
/// gamma ket, keeping the amplitude. Other terms are untouched.
pub fn apply_annihilation<T: Scalar>(state: &JointState<T>, scheme: &Scheme<T>) -> JointState<T> {
    let mut out = JointState::empty(state.tolerance());
    for (ket, amp) in state.terms() {
        let target = match ket {
            &BasisKet::Pair { minus, plus } => scheme
                .rules
                .iter()
                .find(|r| r.minus == minus && r.plus == plus)
                .map_or_else(|| ket.clone(), |r| BasisKet::Gamma(r.label.clone())),
            BasisKet::Gamma(_) => ket.clone(),
        };
        out.accumulate(target, *amp);
    }
    out
}

/// `|IN,IN>` with unit amplitude.
pub fn initial_state<T: Scalar>(tolerance: T) -> JointState<T> {
    let mut s = JointState::empty(tolerance);
    s.insert_raw(
        BasisKet::Pair {
            minus: PathId::In,
            plus: PathId::In,
        },
        Complex::new(T::one(), T::zero()),
    );
    s
}

/// Final state of a validated scheme at the default tolerance.
pub fn evolve<T: Scalar>(scheme: &Scheme<T>) -> Result<JointState<T>> {
    evolve_with_tolerance(scheme, T::default_tolerance())
}

pub fn evolve_with_tolerance<T: Scalar>(scheme: &Scheme<T>, tolerance: T) -> Result<JointState<T>> {
    evolve_from(&initial_state(tolerance), scheme)
}

/// Runs the full pipeline from an arbitrary stage-0 state.
pub fn evolve_from<T: Scalar>(
    initial: &JointState<T>,
    scheme: &Scheme<T>,
) -> Result<JointState<T>> {
    scheme.validate().map_err(Error::InvalidScheme)?;
    let s1 = apply_stage1(initial, scheme)?;
    let s1 = apply_annihilation(&s1, scheme);
    let s2 = apply_stage2(&s1, scheme)?;
    apply_stage3(&s2, scheme)
}
