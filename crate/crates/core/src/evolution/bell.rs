use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::state::{BasisKet, JointState, PathId};

/// The four Bell states over the final paths `E`/`F` of both wings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BellKind {
    /// `(|E,F> + |F,E>)/sqrt2`
    PsiPlus,
    /// `(|E,F> - |F,E>)/sqrt2`
    PsiMinus,
    /// `(|E,E> + |F,F>)/sqrt2`
    PhiPlus,
    /// `(|E,E> - |F,F>)/sqrt2`
    PhiMinus,
}

impl BellKind {
    pub const ALL: [BellKind; 4] = [
        BellKind::PsiPlus,
        BellKind::PsiMinus,
        BellKind::PhiPlus,
        BellKind::PhiMinus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BellKind::PsiPlus => "psiPlus",
            BellKind::PsiMinus => "psiMinus",
            BellKind::PhiPlus => "phiPlus",
            BellKind::PhiMinus => "phiMinus",
        }
    }
}

pub fn bell_state<T: Scalar>(kind: BellKind) -> JointState<T> {
    let h = Complex::new(T::FRAC_1_SQRT_2(), T::zero());
    let (first, second, sign) = match kind {
        BellKind::PsiPlus => ((PathId::E, PathId::F), (PathId::F, PathId::E), T::one()),
        BellKind::PsiMinus => ((PathId::E, PathId::F), (PathId::F, PathId::E), -T::one()),
        BellKind::PhiPlus => ((PathId::E, PathId::E), (PathId::F, PathId::F), T::one()),
        BellKind::PhiMinus => ((PathId::E, PathId::E), (PathId::F, PathId::F), -T::one()),
    };
    JointState::from_terms_with_tolerance(
        [
            (
                BasisKet::Pair {
                    minus: first.0,
                    plus: first.1,
                },
                h,
            ),
            (
                BasisKet::Pair {
                    minus: second.0,
                    plus: second.1,
                },
                h * sign,
            ),
        ],
        T::zero(),
    )
    .expect("final-stage Bell kets")
}

/// `|<Bell|state>|^2` for a normalized final-stage particle state.
pub fn bell_overlap<T: Scalar>(state: &JointState<T>, kind: BellKind) -> Result<T> {
    for (ket, _) in state.terms() {
        match ket {
            BasisKet::Gamma(label) => return Err(Error::UnexpectedGamma(label.clone())),
            &BasisKet::Pair { minus, plus } if minus.stage() != 3 || plus.stage() != 3 => {
                return Err(Error::StageMismatch {
                    expected: 3,
                    minus,
                    plus,
                })
            }
            _ => {}
        }
    }
    let norm_sq = state.norm_squared();
    if (norm_sq - T::one()).abs() > T::lit(1e-9) {
        return Err(Error::NotNormalized(norm_sq.to_f64().unwrap_or(f64::NAN)));
    }
    let overlap = bell_state::<T>(kind).inner_product(state).norm_sqr();
    Ok(overlap.min(T::one()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_scheme_a, build_scheme_b};
    use crate::evolution::{evolve, postselect_survivors};
    use num_complex::Complex64;

    #[test]
    fn scheme_a_survivors_are_psi_plus() {
        let s = postselect_survivors(&evolve(&build_scheme_a()).unwrap()).unwrap();
        assert!((bell_overlap(&s, BellKind::PsiPlus).unwrap() - 1.0).abs() < 1e-12);
        assert!(bell_overlap(&s, BellKind::PhiMinus).unwrap() < 1e-12);
        assert!(bell_overlap(&s, BellKind::PsiMinus).unwrap() < 1e-12);
    }

    #[test]
    fn scheme_b_survivors_are_phi_minus() {
        let s = postselect_survivors(&evolve(&build_scheme_b()).unwrap()).unwrap();
        assert!((bell_overlap(&s, BellKind::PhiMinus).unwrap() - 1.0).abs() < 1e-12);
        assert!(bell_overlap(&s, BellKind::PsiPlus).unwrap() < 1e-12);
    }

    #[test]
    fn overlap_ignores_global_phase() {
        let s = bell_state::<f64>(BellKind::PsiMinus).scaled(Complex64::from_polar(1.0, 0.7));
        assert!((bell_overlap(&s, BellKind::PsiMinus).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn overlap_rejects_bad_input() {
        let half = bell_state::<f64>(BellKind::PhiPlus).scaled(Complex64::new(0.5, 0.0));
        assert!(matches!(
            bell_overlap(&half, BellKind::PhiPlus),
            Err(Error::NotNormalized(_))
        ));
        let with_gamma = evolve(&build_scheme_a()).unwrap();
        assert!(matches!(
            bell_overlap(&with_gamma, BellKind::PsiPlus),
            Err(Error::UnexpectedGamma(_))
        ));
    }
}
