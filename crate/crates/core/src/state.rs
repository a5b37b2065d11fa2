//! Sparse two-particle joint states.
//!
//! A state maps basis kets to complex amplitudes. Particle kets pair one path
//! of the minus wing with one path of the plus wing at the same stage depth;
//! gamma kets flag radiation produced by annihilation at a labelled point.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::numfmt;
use crate::scalar::Scalar;

/// Path a particle may occupy inside one wing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PathId {
    In,
    A,
    B,
    C,
    D,
    E,
    F,
}

impl PathId {
    pub const ALL: [PathId; 7] = [
        PathId::In,
        PathId::A,
        PathId::B,
        PathId::C,
        PathId::D,
        PathId::E,
        PathId::F,
    ];

    /// Depth of the path: `IN` is 0, `A/B` 1, `C/D` 2, `E/F` 3.
    pub fn stage(self) -> u8 {
        match self {
            PathId::In => 0,
            PathId::A | PathId::B => 1,
            PathId::C | PathId::D => 2,
            PathId::E | PathId::F => 3,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            PathId::In => "IN",
            PathId::A => "A",
            PathId::B => "B",
            PathId::C => "C",
            PathId::D => "D",
            PathId::E => "E",
            PathId::F => "F",
        }
    }

    /// Lower-case letter used by the scheme text format (`in` for the input port).
    pub fn letter(self) -> &'static str {
        match self {
            PathId::In => "in",
            PathId::A => "a",
            PathId::B => "b",
            PathId::C => "c",
            PathId::D => "d",
            PathId::E => "e",
            PathId::F => "f",
        }
    }
}

impl fmt::Display for PathId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Wing {
    Minus,
    Plus,
}

impl Wing {
    pub fn name(self) -> &'static str {
        match self {
            Wing::Minus => "minus",
            Wing::Plus => "plus",
        }
    }
}

/// A basis ket of the joint space. Particle kets sort before gamma kets.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BasisKet {
    Pair { minus: PathId, plus: PathId },
    Gamma(String),
}

impl BasisKet {
    /// Particle ket; both paths must sit at the same stage.
    pub fn pair(minus: PathId, plus: PathId) -> Result<Self> {
        if minus.stage() != plus.stage() {
            return Err(Error::MixedStage { minus, plus });
        }
        Ok(BasisKet::Pair { minus, plus })
    }

    pub fn gamma(label: impl Into<String>) -> Self {
        BasisKet::Gamma(label.into())
    }

    pub fn is_gamma(&self) -> bool {
        matches!(self, BasisKet::Gamma(_))
    }

    /// Stage of a particle ket, `None` for gamma kets.
    pub fn stage(&self) -> Option<u8> {
        match self {
            BasisKet::Pair { minus, .. } => Some(minus.stage()),
            BasisKet::Gamma(_) => None,
        }
    }

    fn check(&self) -> Result<()> {
        match *self {
            BasisKet::Pair { minus, plus } if minus.stage() != plus.stage() => {
                Err(Error::MixedStage { minus, plus })
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for BasisKet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisKet::Pair { minus, plus } => write!(f, "|{minus},{plus}>"),
            BasisKet::Gamma(label) => write!(f, "|gamma:{label}>"),
        }
    }
}

/// Sparse joint state. Terms with magnitude below `tolerance` are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState<T: Scalar> {
    terms: BTreeMap<BasisKet, Complex<T>>,
    tolerance: T,
}

impl<T: Scalar> Default for JointState<T> {
    fn default() -> Self {
        Self::empty(T::default_tolerance())
    }
}

impl<T: Scalar> JointState<T> {
    pub fn empty(tolerance: T) -> Self {
        JointState {
            terms: BTreeMap::new(),
            tolerance,
        }
    }

    /// Builds a state from `(ket, amplitude)` entries at the default tolerance.
    /// Duplicate kets are summed, then sub-tolerance terms are pruned.
    pub fn from_terms<I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (BasisKet, Complex<T>)>,
    {
        Self::from_terms_with_tolerance(entries, T::default_tolerance())
    }

    pub fn from_terms_with_tolerance<I>(entries: I, tolerance: T) -> Result<Self>
    where
        I: IntoIterator<Item = (BasisKet, Complex<T>)>,
    {
        let mut state = Self::empty(tolerance);
        for (ket, amp) in entries {
            ket.check()?;
            if !amp.re.is_finite() || !amp.im.is_finite() {
                return Err(Error::NonFinite);
            }
            state.accumulate(ket, amp);
        }
        state.prune();
        Ok(state)
    }

    /// Single basis ket with unit amplitude.
    pub fn basis(ket: BasisKet) -> Result<Self> {
        Self::from_terms([(ket, Complex::new(T::one(), T::zero()))])
    }

    pub fn tolerance(&self) -> T {
        self.tolerance
    }

    pub fn with_tolerance(mut self, tolerance: T) -> Self {
        self.tolerance = tolerance;
        self.prune();
        self
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&BasisKet, &Complex<T>)> {
        self.terms.iter()
    }

    /// Amplitude of `ket`, zero when absent.
    pub fn amplitude(&self, ket: &BasisKet) -> Complex<T> {
        self.terms.get(ket).copied().unwrap_or_else(Complex::zero)
    }

    pub fn pair_amplitude(&self, minus: PathId, plus: PathId) -> Complex<T> {
        self.amplitude(&BasisKet::Pair { minus, plus })
    }

    pub fn gamma_amplitude(&self, label: &str) -> Complex<T> {
        self.amplitude(&BasisKet::Gamma(label.to_string()))
    }

    pub fn norm_squared(&self) -> T {
        self.terms
            .values()
            .fold(T::zero(), |acc, a| acc + a.norm_sqr())
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner_product(&self, other: &Self) -> Complex<T> {
        let (small, large, conj_small) = if self.len() <= other.len() {
            (self, other, true)
        } else {
            (other, self, false)
        };
        small
            .terms
            .iter()
            .filter_map(|(ket, a)| large.terms.get(ket).map(|b| (a, b)))
            .fold(Complex::zero(), |acc, (a, b)| {
                if conj_small {
                    acc + a.conj() * b
                } else {
                    acc + b.conj() * a
                }
            })
    }

    /// `self + factor * source`, pruned at `self`'s tolerance.
    pub fn scale_add(&self, source: &Self, factor: Complex<T>) -> Self {
        let mut out = self.clone();
        if !factor.is_zero() {
            for (ket, amp) in &source.terms {
                out.accumulate(ket.clone(), *amp * factor);
            }
        }
        out.prune();
        out
    }

    /// Multiplies every amplitude by `factor`.
    pub fn scaled(&self, factor: Complex<T>) -> Self {
        let mut out = Self::empty(self.tolerance);
        for (ket, amp) in &self.terms {
            out.accumulate(ket.clone(), *amp * factor);
        }
        out.prune();
        out
    }

    /// Particle-sector part of the state (gamma kets dropped, no renormalization).
    pub fn particle_sector(&self) -> Self {
        JointState {
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| !k.is_gamma())
                .map(|(k, a)| (k.clone(), *a))
                .collect(),
            tolerance: self.tolerance,
        }
    }

    /// Drops every term whose magnitude is below the tolerance.
    pub fn prune(&mut self) {
        let tol = self.tolerance;
        self.terms.retain(|_, a| a.norm() >= tol);
    }

    pub(crate) fn accumulate(&mut self, ket: BasisKet, amp: Complex<T>) {
        *self.terms.entry(ket).or_insert_with(Complex::zero) += amp;
    }

    pub(crate) fn insert_raw(&mut self, ket: BasisKet, amp: Complex<T>) {
        self.terms.insert(ket, amp);
    }

    /// Canonical text rendering: one `ket : amplitude` line per term in
    /// canonical order, amplitudes as `re±im i` at 12 significant digits.
    /// Components below the tolerance print as `0`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (ket, amp) in &self.terms {
            out.push_str(&format!("{ket} : {}\n", self.render_amplitude(*amp)));
        }
        out
    }

    pub fn render_amplitude(&self, amp: Complex<T>) -> String {
        render_amplitude(amp, self.tolerance)
    }
}

/// Renders `amp` as `re±im i` at 12 significant digits, snapping components
/// smaller than `tolerance` to zero.
pub fn render_amplitude<T: Scalar>(amp: Complex<T>, tolerance: T) -> String {
    let snap = |x: T| {
        if x.abs() < tolerance {
            0.0
        } else {
            x.to_f64().unwrap_or(f64::NAN)
        }
    };
    let re = snap(amp.re);
    let im = snap(amp.im);
    let im_txt = numfmt::sig(im, 12);
    if im_txt.starts_with('-') {
        format!("{}{}i", numfmt::sig(re, 12), im_txt)
    } else {
        format!("{}+{}i", numfmt::sig(re, 12), im_txt)
    }
}

impl<T: Scalar> fmt::Display for JointState<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}
