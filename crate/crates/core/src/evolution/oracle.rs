//! Dense brute-force evolution used to cross-check the sparse pipeline.
//!
//! Each stage of each wing is an explicit 7x7 matrix over all paths, the joint
//! stage operator is their 49x49 Kronecker product, and annihilation is a
//! routing matrix on the extended `49 + rules` space that moves matched pair
//! coordinates into gamma coordinates.

use num_complex::Complex;
use num_traits::Zero;

use crate::circuit::{Scheme, WingCircuit};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::state::{BasisKet, JointState, PathId};

const PATHS: usize = 7;
const PAIRS: usize = PATHS * PATHS;

struct Dense<T: Scalar> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Scalar> Dense<T> {
    fn zeros(rows: usize, cols: usize) -> Self {
        Dense {
            rows,
            cols,
            data: vec![Complex::zero(); rows * cols],
        }
    }

    fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex::new(T::one(), T::zero()));
        }
        m
    }

    fn get(&self, r: usize, c: usize) -> Complex<T> {
        self.data[r * self.cols + c]
    }

    fn set(&mut self, r: usize, c: usize, v: Complex<T>) {
        self.data[r * self.cols + c] = v;
    }

    fn kron(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.is_zero() {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out.set(i * other.rows + k, j * other.cols + l, a * other.get(k, l));
                    }
                }
            }
        }
        out
    }

    /// Block-diagonal `self ⊕ I_extra`.
    fn extend(&self, extra: usize) -> Self {
        let mut out = Self::zeros(self.rows + extra, self.cols + extra);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j));
            }
        }
        for k in 0..extra {
            out.set(
                self.rows + k,
                self.cols + k,
                Complex::new(T::one(), T::zero()),
            );
        }
        out
    }

    fn apply(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        (0..self.rows)
            .map(|i| (0..self.cols).fold(Complex::zero(), |acc, j| acc + self.get(i, j) * v[j]))
            .collect()
    }
}

/// Single-wing operator of stage `1..=3`, zero on paths that are not inputs
/// of that stage. Entry `(out, in)`.
fn wing_matrix<T: Scalar>(circuit: &WingCircuit<T>, stage: usize) -> Dense<T> {
    let bs = circuit.splitters[stage - 1];
    let mut m = Dense::zeros(PATHS, PATHS);
    let phase = |phi: T| Complex::new(phi.cos(), phi.sin());
    let t = Complex::new(bs.t, T::zero());
    let ir = Complex::new(T::zero(), bs.r);
    use PathId::*;
    match stage {
        1 => {
            let p = phase(circuit.phases.ab());
            m.set(A.index(), In.index(), t);
            m.set(B.index(), In.index(), ir * p);
        }
        2 => {
            let p = phase(circuit.phases.cd());
            m.set(C.index(), A.index(), t);
            m.set(D.index(), A.index(), ir * p);
            m.set(C.index(), B.index(), ir);
            m.set(D.index(), B.index(), t * p);
        }
        3 => {
            m.set(E.index(), C.index(), t);
            m.set(F.index(), C.index(), ir);
            m.set(E.index(), D.index(), ir);
            m.set(F.index(), D.index(), t);
        }
        _ => unreachable!(),
    }
    m
}

fn pair_index(minus: PathId, plus: PathId) -> usize {
    minus.index() * PATHS + plus.index()
}

/// Brute-force counterpart of [`super::evolve`].
pub fn dense_oracle<T: Scalar>(scheme: &Scheme<T>) -> Result<JointState<T>> {
    scheme.validate().map_err(Error::InvalidScheme)?;
    let extra = scheme.rules.len();
    let dim = PAIRS + extra;

    let stage_op = |stage: usize| {
        wing_matrix(&scheme.minus, stage)
            .kron(&wing_matrix(&scheme.plus, stage))
            .extend(extra)
    };

    let mut routing = Dense::identity(dim);
    for (g, rule) in scheme.rules.iter().enumerate() {
        let p = pair_index(rule.minus, rule.plus);
        routing.set(p, p, Complex::zero());
        routing.set(PAIRS + g, p, Complex::new(T::one(), T::zero()));
    }

    let mut v = vec![Complex::zero(); dim];
    v[pair_index(PathId::In, PathId::In)] = Complex::new(T::one(), T::zero());
    let v = stage_op(1).apply(&v);
    let v = routing.apply(&v);
    let v = stage_op(2).apply(&v);
    let v = stage_op(3).apply(&v);

    let mut entries = Vec::new();
    for m in PathId::ALL {
        for p in PathId::ALL {
            let amp = v[pair_index(m, p)];
            if !amp.is_zero() {
                entries.push((BasisKet::Pair { minus: m, plus: p }, amp));
            }
        }
    }
    for (g, rule) in scheme.rules.iter().enumerate() {
        entries.push((BasisKet::Gamma(rule.label.clone()), v[PAIRS + g]));
    }
    JointState::from_terms_with_tolerance(entries, T::default_tolerance())
}
