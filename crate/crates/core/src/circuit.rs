//! Interferometer wings and annihilation geometry.
//!
//! Each wing is a fixed three-stage network `IN -> (A,B) -> (C,D) -> (E,F)`.
//! Every splitter uses the symmetric convention with a factor `i` on
//! reflection:
//!
//! ```text
//! in1 -> t*out1 + i*r*out2
//! in2 -> i*r*out1 + t*out2
//! ```
//!
//! where `(in1, in2, out1, out2)` is `(IN, -, A, B)` for stage 1,
//! `(A, B, C, D)` for stage 2 and `(C, D, E, F)` for stage 3. The convention is
//! not configurable. Relative phases multiply the `B` path by `e^{i*ab}` right
//! after stage 1 and the `D` path by `e^{i*cd}` right after stage 2.
//!
//! Annihilation rules only ever act on the stage-1 paths `A` and `B`.

use std::collections::HashSet;
use std::fmt;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::state::{PathId, Wing};

/// Lossless splitter described by its amplitude reflectance `r` and
/// transmittance `t = sqrt(1 - r^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSplitter<T: Scalar> {
    pub r: T,
    pub t: T,
}

impl<T: Scalar> BeamSplitter<T> {
    pub fn new(r: T) -> Result<Self> {
        if !r.is_finite() || r < T::zero() || r > T::one() {
            return Err(Error::InvalidSplitter(format!(
                "reflectance amplitude {r} outside [0,1]"
            )));
        }
        if r == T::FRAC_1_SQRT_2() {
            return Ok(Self::fifty_fifty());
        }
        let t = ((T::one() - r) * (T::one() + r)).sqrt();
        Ok(BeamSplitter { r, t })
    }

    /// Splitter from intensity reflectance `R = r^2`.
    pub fn from_intensity(reflectance: T) -> Result<Self> {
        if !reflectance.is_finite() || reflectance < T::zero() || reflectance > T::one() {
            return Err(Error::InvalidSplitter(format!(
                "intensity reflectance {reflectance} outside [0,1]"
            )));
        }
        Self::new(reflectance.sqrt())
    }

    pub fn fifty_fifty() -> Self {
        BeamSplitter {
            r: T::FRAC_1_SQRT_2(),
            t: T::FRAC_1_SQRT_2(),
        }
    }

    /// Coefficient table `table[input][output]` for the two input and two
    /// output ports of the splitter.
    pub fn coefficients(&self) -> [[Complex<T>; 2]; 2] {
        let t = Complex::new(self.t, T::zero());
        let ir = Complex::new(T::zero(), self.r);
        [[t, ir], [ir, t]]
    }

    pub fn is_lossless(&self, tolerance: T) -> bool {
        (self.r * self.r + self.t * self.t - T::one()).abs() <= tolerance
    }
}

impl<T: Scalar> Default for BeamSplitter<T> {
    fn default() -> Self {
        Self::fifty_fifty()
    }
}

/// Relative phases `(ab, cd)` of one wing, stored modulo `2*pi`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhaseSettings<T: Scalar> {
    ab: T,
    cd: T,
}

impl<T: Scalar> PhaseSettings<T> {
    pub fn new(ab: T, cd: T) -> Self {
        PhaseSettings {
            ab: normalize_phase(ab),
            cd: normalize_phase(cd),
        }
    }

    pub fn zero() -> Self {
        PhaseSettings {
            ab: T::zero(),
            cd: T::zero(),
        }
    }

    pub fn ab(&self) -> T {
        self.ab
    }

    pub fn cd(&self) -> T {
        self.cd
    }

    pub fn with_ab(self, ab: T) -> Self {
        Self::new(ab, self.cd)
    }

    pub fn with_cd(self, cd: T) -> Self {
        Self::new(self.ab, cd)
    }
}

/// Reduces `phi` into `[0, 2*pi)`.
pub fn normalize_phase<T: Scalar>(phi: T) -> T {
    let two_pi = T::two_pi();
    let mut x = phi % two_pi;
    if x < T::zero() {
        x += two_pi;
    }
    if x >= two_pi {
        x -= two_pi;
    }
    // -0.0 and tiny negatives that round to 2*pi both land on 0
    if x == T::zero() || x >= two_pi {
        T::zero()
    } else {
        x
    }
}

/// One interferometer: three splitters plus its relative phases.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WingCircuit<T: Scalar> {
    pub splitters: [BeamSplitter<T>; 3],
    pub phases: PhaseSettings<T>,
}

impl<T: Scalar> WingCircuit<T> {
    /// All splitters 50/50, zero phases.
    pub fn balanced() -> Self {
        WingCircuit {
            splitters: [BeamSplitter::fifty_fifty(); 3],
            phases: PhaseSettings::zero(),
        }
    }

    /// Splitter of stage `1..=3`.
    pub fn splitter(&self, stage: usize) -> &BeamSplitter<T> {
        &self.splitters[stage - 1]
    }
}

/// Joint stage-1 path combination that annihilates the pair into radiation
/// labelled `label`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AnnihilationRule {
    pub minus: PathId,
    pub plus: PathId,
    pub label: String,
}

impl AnnihilationRule {
    pub fn new(minus: PathId, plus: PathId, label: impl Into<String>) -> Self {
        AnnihilationRule {
            minus,
            plus,
            label: label.into(),
        }
    }
}

/// A full experimental context: both wings and the annihilation geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct Scheme<T: Scalar> {
    pub name: String,
    pub minus: WingCircuit<T>,
    pub plus: WingCircuit<T>,
    pub rules: Vec<AnnihilationRule>,
}

pub const MAX_RULES: usize = 4;

impl<T: Scalar> Scheme<T> {
    pub fn wing(&self, wing: Wing) -> &WingCircuit<T> {
        match wing {
            Wing::Minus => &self.minus,
            Wing::Plus => &self.plus,
        }
    }

    pub fn wing_mut(&mut self, wing: Wing) -> &mut WingCircuit<T> {
        match wing {
            Wing::Minus => &mut self.minus,
            Wing::Plus => &mut self.plus,
        }
    }

    /// Intersections on `{a-, a+}` (point P) and `{b-, b+}` (point Q).
    pub fn builtin_a() -> Self {
        Scheme {
            name: "a".to_string(),
            minus: WingCircuit::balanced(),
            plus: WingCircuit::balanced(),
            rules: vec![
                AnnihilationRule::new(PathId::A, PathId::A, "P"),
                AnnihilationRule::new(PathId::B, PathId::B, "Q"),
            ],
        }
    }

    /// Same wings as [`Scheme::builtin_a`]; intersections on `{a-, b+}` (R)
    /// and `{b-, a+}` (S).
    pub fn builtin_b() -> Self {
        Scheme {
            name: "b".to_string(),
            minus: WingCircuit::balanced(),
            plus: WingCircuit::balanced(),
            rules: vec![
                AnnihilationRule::new(PathId::A, PathId::B, "R"),
                AnnihilationRule::new(PathId::B, PathId::A, "S"),
            ],
        }
    }

    /// Gamma labels in lexicographic order.
    pub fn gamma_labels(&self) -> Vec<String> {
        let mut labels: Vec<String> = self.rules.iter().map(|r| r.label.clone()).collect();
        labels.sort();
        labels.dedup();
        labels
    }

    /// Checks the structural invariants, collecting every violation.
    pub fn validate(&self) -> std::result::Result<(), Vec<Violation>> {
        let mut violations = Vec::new();
        let tol = T::lit(1e-12).max(T::epsilon() * T::lit(4.0));
        for wing in [Wing::Minus, Wing::Plus] {
            let circuit = self.wing(wing);
            for (i, bs) in circuit.splitters.iter().enumerate() {
                let stage = i + 1;
                if !(T::zero()..=T::one()).contains(&bs.r) || bs.t.is_nan() || bs.t < T::zero() {
                    violations.push(Violation::ReflectanceOutOfRange { wing, stage });
                } else if !bs.is_lossless(tol) {
                    violations.push(Violation::SplitterNotLossless { wing, stage });
                }
            }
            if !circuit.phases.ab().is_finite() || !circuit.phases.cd().is_finite() {
                violations.push(Violation::NonFinitePhase { wing });
            }
        }
        if self.rules.len() > MAX_RULES {
            violations.push(Violation::TooManyRules(self.rules.len()));
        }
        let mut labels = HashSet::new();
        let mut pairs = HashSet::new();
        for (index, rule) in self.rules.iter().enumerate() {
            if rule.minus.stage() != 1 || rule.plus.stage() != 1 {
                violations.push(Violation::RuleOutsideStageOne { index });
            }
            if !labels.insert(rule.label.as_str()) {
                violations.push(Violation::DuplicateGammaLabel {
                    label: rule.label.clone(),
                });
            }
            if !pairs.insert((rule.minus, rule.plus)) {
                violations.push(Violation::DuplicateRulePair {
                    minus: rule.minus,
                    plus: rule.plus,
                });
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(violations)
        }
    }

    pub fn validated(self) -> Result<Self> {
        self.validate().map_err(Error::InvalidScheme)?;
        Ok(self)
    }

    /// The scheme with its two wing circuits exchanged.
    pub fn with_wings_swapped(&self) -> Self {
        Scheme {
            name: self.name.clone(),
            minus: self.plus,
            plus: self.minus,
            rules: self
                .rules
                .iter()
                .map(|r| AnnihilationRule::new(r.plus, r.minus, r.label.clone()))
                .collect(),
        }
    }
}

/// Built-in scheme (a) in double precision.
pub fn build_scheme_a() -> Scheme<f64> {
    Scheme::builtin_a()
}

/// Built-in scheme (b) in double precision.
pub fn build_scheme_b() -> Scheme<f64> {
    Scheme::builtin_b()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    ReflectanceOutOfRange { wing: Wing, stage: usize },
    SplitterNotLossless { wing: Wing, stage: usize },
    NonFinitePhase { wing: Wing },
    RuleOutsideStageOne { index: usize },
    DuplicateGammaLabel { label: String },
    DuplicateRulePair { minus: PathId, plus: PathId },
    TooManyRules(usize),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ReflectanceOutOfRange { wing, stage } => write!(
                f,
                "reflectance outside [0,1] (wing {}, splitter {stage})",
                wing.name()
            ),
            Violation::SplitterNotLossless { wing, stage } => write!(
                f,
                "splitter not lossless, r^2 + t^2 != 1 (wing {}, splitter {stage})",
                wing.name()
            ),
            Violation::NonFinitePhase { wing } => {
                write!(f, "non-finite phase (wing {})", wing.name())
            }
            Violation::RuleOutsideStageOne { index } => {
                write!(f, "annihilation rule outside stage-1 paths (rule {index})")
            }
            Violation::DuplicateGammaLabel { label } => {
                write!(f, "duplicate gamma label '{label}'")
            }
            Violation::DuplicateRulePair { minus, plus } => write!(
                f,
                "duplicate annihilation path pair ({}-, {}+)",
                minus.letter(),
                plus.letter()
            ),
            Violation::TooManyRules(n) => {
                write!(f, "too many annihilation rules ({n} > {MAX_RULES})")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn unitarity_defect(table: [[Complex64; 2]; 2]) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let dot: Complex64 = (0..2).map(|k| table[i][k] * table[j][k].conj()).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - expected).norm());
            }
        }
        worst
    }

    #[test]
    fn balanced_splitter_matches_first_stage_transform() {
        let table = BeamSplitter::<f64>::fifty_fifty().coefficients();
        assert_eq!(table[0][0], Complex64::new(FRAC_1_SQRT_2, 0.0));
        assert_eq!(table[0][1], Complex64::new(0.0, FRAC_1_SQRT_2));
        assert_eq!(table[1][0], Complex64::new(0.0, FRAC_1_SQRT_2));
        assert_eq!(table[1][1], Complex64::new(FRAC_1_SQRT_2, 0.0));
    }

    #[test]
    fn extreme_splitters() {
        let id = BeamSplitter::<f64>::new(0.0).unwrap().coefficients();
        assert_eq!(id[0][0], Complex64::new(1.0, 0.0));
        assert_eq!(id[0][1], Complex64::new(0.0, 0.0));
        assert_eq!(id[1][1], Complex64::new(1.0, 0.0));

        let mirror = BeamSplitter::<f64>::new(1.0).unwrap().coefficients();
        assert_eq!(mirror[0][0], Complex64::new(0.0, 0.0));
        assert_eq!(mirror[0][1], Complex64::new(0.0, 1.0));
        assert_eq!(mirror[1][0], Complex64::new(0.0, 1.0));
    }

    #[test]
    fn splitter_rejects_out_of_range() {
        assert!(BeamSplitter::<f64>::new(1.5).is_err());
        assert!(BeamSplitter::<f64>::new(-0.1).is_err());
        assert!(BeamSplitter::<f64>::new(f64::NAN).is_err());
        let bs = BeamSplitter::<f64>::from_intensity(0.5).unwrap();
        assert!((bs.r - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn phases_are_stored_modulo_two_pi() {
        let tau = std::f64::consts::TAU;
        let p = PhaseSettings::new(tau + 1.0, -1.0);
        assert!((p.ab() - 1.0).abs() < 1e-12);
        assert!((p.cd() - (tau - 1.0)).abs() < 1e-12);
        assert_eq!(PhaseSettings::new(tau, -0.0).ab(), 0.0);
        assert_eq!(PhaseSettings::new(0.0, -0.0).cd(), 0.0);
    }

    #[test]
    fn builtin_schemes() {
        let a = build_scheme_a();
        assert_eq!(a.rules.len(), 2);
        assert_eq!(a.gamma_labels(), vec!["P", "Q"]);
        assert_eq!(a, build_scheme_a());
        assert!(a.validate().is_ok());

        let b = build_scheme_b();
        assert_eq!(
            b.rules,
            vec![
                AnnihilationRule::new(PathId::A, PathId::B, "R"),
                AnnihilationRule::new(PathId::B, PathId::A, "S"),
            ]
        );
        assert!(b.validate().is_ok());
    }

    #[test]
    fn schemes_differ_only_in_rules() {
        let a = build_scheme_a();
        let b = build_scheme_b();
        assert_eq!(a.minus, b.minus);
        assert_eq!(a.plus, b.plus);
        assert_ne!(a.rules, b.rules);
    }

    #[test]
    fn validate_reports_duplicate_label() {
        let mut s = build_scheme_a();
        s.rules[1].label = "P".into();
        let v = s.validate().unwrap_err();
        assert!(v
            .iter()
            .any(|x| x.to_string().starts_with("duplicate gamma label")));
    }

    #[test]
    fn validate_reports_rule_outside_stage_one() {
        let mut s = build_scheme_a();
        s.rules
            .push(AnnihilationRule::new(PathId::C, PathId::A, "X"));
        let v = s.validate().unwrap_err();
        assert_eq!(v, vec![Violation::RuleOutsideStageOne { index: 2 }]);
        assert!(v[0]
            .to_string()
            .starts_with("annihilation rule outside stage-1 paths"));
    }

    #[test]
    fn validate_collects_several_violations() {
        let mut s = build_scheme_b();
        s.minus.splitters[0] = BeamSplitter { r: 0.6, t: 0.6 };
        s.rules
            .push(AnnihilationRule::new(PathId::A, PathId::B, "R"));
        let v = s.validate().unwrap_err();
        assert_eq!(v.len(), 3);
        assert!(s.clone().validated().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn splitter_table_is_unitary(r in 0.0f64..=1.0) {
            let bs = BeamSplitter::new(r).unwrap();
            prop_assert!(unitarity_defect(bs.coefficients()) < 1e-12);
            prop_assert!(bs.is_lossless(1e-12));
        }
    }
}
