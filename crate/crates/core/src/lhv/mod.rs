//! Local-hidden-variable analysis of two measurement contexts.
//!
//! Model: each wing's outcome (detection on `E`, on `F`, or no detection)
//! is fixed in advance by hidden variables and depends only on that wing's
//! intrinsic settings, which are identical in both contexts. No detection
//! stands for the pair having annihilated; treating it as a locally
//! predetermined value is the modelling assumption here, not a derived fact.
//!
//! Whatever the cardinality of the hidden-variable sets, every such model is a
//! probability mixture of the 9 deterministic strategies `{E, F, _}^2`: a
//! hidden-variable value induces one outcome per wing, and grouping values by
//! the outcome pair they induce gives the mixture weights. The strategy
//! simplex is therefore the complete model space, and feasibility is a
//! 9-column LP. Joint distributions over both wings' variables are allowed;
//! [`lhv_feasible_product_form`] adds the independent-sources restriction.
//!
//! Since a strategy's behavior carries no context parameter, the LP's columns
//! are linearly independent and a feasible weight vector is unique (so it is
//! trivially the minimum-norm one).

mod simplex;

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::OutcomeDistribution;
use crate::scalar::Scalar;

pub use simplex::{feasibility, LpOutcome, Tolerances};

/// Tolerance of the floating-point LP path and of behavior normalization.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

/// Cells with mass at or below this are treated as forbidden.
pub const ZERO_CELL_TOLERANCE: f64 = 1e-12;

/// Grid quantum applied to probabilities derived from amplitudes (2^-40).
pub const QUANTUM: f64 = 1.0 / 1_099_511_627_776.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LocalOutcome {
    DetectE,
    DetectF,
    NoDetect,
}

impl LocalOutcome {
    pub const ALL: [LocalOutcome; 3] = [
        LocalOutcome::DetectE,
        LocalOutcome::DetectF,
        LocalOutcome::NoDetect,
    ];

    pub fn symbol(self) -> char {
        match self {
            LocalOutcome::DetectE => 'E',
            LocalOutcome::DetectF => 'F',
            LocalOutcome::NoDetect => '_',
        }
    }

    pub fn is_detection(self) -> bool {
        self != LocalOutcome::NoDetect
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// One joint outcome cell `(minus, plus)`; also the deterministic strategy
/// that always produces it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DeterministicStrategy {
    pub minus: LocalOutcome,
    pub plus: LocalOutcome,
}

/// Joint outcome cell; same shape as a strategy.
pub type Cell = DeterministicStrategy;

impl DeterministicStrategy {
    pub fn new(minus: LocalOutcome, plus: LocalOutcome) -> Self {
        DeterministicStrategy { minus, plus }
    }

    pub fn index(self) -> usize {
        self.minus.index() * 3 + self.plus.index()
    }

    pub fn from_index(i: usize) -> Self {
        DeterministicStrategy::new(LocalOutcome::ALL[i / 3], LocalOutcome::ALL[i % 3])
    }

    /// Two-character key such as `EF` or `__`.
    pub fn key(self) -> String {
        format!("{}{}", self.minus.symbol(), self.plus.symbol())
    }

    pub fn both_detect(self) -> bool {
        self.minus.is_detection() && self.plus.is_detection()
    }
}

impl fmt::Display for DeterministicStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.minus.symbol(), self.plus.symbol())
    }
}

/// The 9 strategies in index order: `EE, EF, E_, FE, FF, F_, _E, _F, __`.
pub fn enumerate_strategies() -> Vec<DeterministicStrategy> {
    (0..9).map(DeterministicStrategy::from_index).collect()
}

/// Joint distribution over the 9 outcome cells of one context.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Behavior {
    cells: [f64; 9],
}

impl Behavior {
    /// Validated behavior: finite, non-negative entries summing to 1 within 1e-9.
    pub fn new(cells: [f64; 9]) -> Result<Self> {
        if let Some(bad) = cells.iter().find(|p| !p.is_finite()) {
            return Err(Error::MalformedBehavior(format!("non-finite mass {bad}")));
        }
        if let Some(neg) = cells.iter().find(|&&p| p < 0.0) {
            return Err(Error::MalformedBehavior(format!("negative mass {neg}")));
        }
        let total: f64 = cells.iter().sum();
        if (total - 1.0).abs() > FLOAT_TOLERANCE {
            return Err(Error::MalformedBehavior(format!(
                "masses sum to {total}, expected 1"
            )));
        }
        Ok(Behavior { cells })
    }

    pub fn from_cells<I: IntoIterator<Item = (Cell, f64)>>(entries: I) -> Result<Self> {
        let mut cells = [0.0; 9];
        for (cell, p) in entries {
            cells[cell.index()] += p;
        }
        Self::new(cells)
    }

    pub fn get(&self, cell: Cell) -> f64 {
        self.cells[cell.index()]
    }

    pub fn cells(&self) -> &[f64; 9] {
        &self.cells
    }

    pub fn iter(&self) -> impl Iterator<Item = (Cell, f64)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .map(|(i, &p)| (Cell::from_index(i), p))
    }

    /// Largest cell-wise difference.
    pub fn distance(&self, other: &Behavior) -> f64 {
        self.cells
            .iter()
            .zip(&other.cells)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    fn exact_cells(&self) -> Vec<BigRational> {
        self.cells.iter().map(|&p| exact(p)).collect()
    }

    /// Whether the entries, read as exact rationals, sum to exactly 1.
    pub fn is_exactly_normalized(&self) -> bool {
        let total: BigRational = self.exact_cells().into_iter().sum();
        total == BigRational::from_integer(BigInt::from(1))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&BehaviorFile::from(*self)).expect("serializable")
    }

    /// Parses the fixed-key JSON format; every key must be present.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: BehaviorFile =
            serde_json::from_str(text).map_err(|e| Error::MalformedBehavior(e.to_string()))?;
        Behavior::new(file.into())
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BehaviorFile {
    #[serde(rename = "EE")]
    ee: f64,
    #[serde(rename = "EF")]
    ef: f64,
    #[serde(rename = "FE")]
    fe: f64,
    #[serde(rename = "FF")]
    ff: f64,
    #[serde(rename = "E_")]
    e_: f64,
    #[serde(rename = "F_")]
    f_: f64,
    #[serde(rename = "_E")]
    _e: f64,
    #[serde(rename = "_F")]
    _f: f64,
    #[serde(rename = "__")]
    __: f64,
}

impl From<Behavior> for BehaviorFile {
    fn from(b: Behavior) -> Self {
        let c = b.cells;
        BehaviorFile {
            ee: c[0],
            ef: c[1],
            e_: c[2],
            fe: c[3],
            ff: c[4],
            f_: c[5],
            _e: c[6],
            _f: c[7],
            __: c[8],
        }
    }
}

impl From<BehaviorFile> for [f64; 9] {
    fn from(f: BehaviorFile) -> Self {
        [f.ee, f.ef, f.e_, f.fe, f.ff, f.f_, f._e, f._f, f.__]
    }
}

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap_or_else(BigRational::zero)
}

fn quantize(p: f64) -> f64 {
    (p / QUANTUM).round() * QUANTUM
}

/// Maps detector statistics into outcome cells: pair detections go to the
/// matching `(E|F, E|F)` cell, all radiation mass to `(_,_)`.
///
/// Probabilities are rounded to multiples of 2^-40, far below the 1e-12
/// accuracy of the amplitudes, so dyadic predictions such as 1/4 come out
/// exact and can take the exact-rational LP path.
pub fn behavior_from_quantum<T: Scalar>(d: &OutcomeDistribution<T>) -> Result<Behavior> {
    use LocalOutcome::*;
    let f = |x: T| quantize(x.to_f64().unwrap_or(f64::NAN));
    Behavior::from_cells([
        (Cell::new(DetectE, DetectE), f(d.p_ee)),
        (Cell::new(DetectE, DetectF), f(d.p_ef)),
        (Cell::new(DetectF, DetectE), f(d.p_fe)),
        (Cell::new(DetectF, DetectF), f(d.p_ff)),
        (Cell::new(NoDetect, NoDetect), f(d.gamma_total())),
    ])
}

/// Point mass on the strategy's own cell, whatever the context.
pub fn strategy_behavior(s: DeterministicStrategy) -> Behavior {
    let mut cells = [0.0; 9];
    cells[s.index()] = 1.0;
    Behavior { cells }
}

/// Farkas multipliers over the LP rows: 9 cell rows per context plus the
/// normalization row `sum(q) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FarkasCertificate {
    pub context_a: [f64; 9],
    pub context_b: [f64; 9],
    pub normalization: f64,
}

impl FarkasCertificate {
    pub fn zero() -> Self {
        FarkasCertificate {
            context_a: [0.0; 9],
            context_b: [0.0; 9],
            normalization: 0.0,
        }
    }

    pub fn rows(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(19);
        v.extend_from_slice(&self.context_a);
        v.extend_from_slice(&self.context_b);
        v.push(self.normalization);
        v
    }

    fn from_rows(rows: &[f64]) -> Self {
        let mut c = Self::zero();
        c.context_a.copy_from_slice(&rows[..9]);
        c.context_b.copy_from_slice(&rows[9..18]);
        c.normalization = rows[18];
        c
    }

    /// Cells whose rows carry a nonzero multiplier, per context.
    pub fn support(&self) -> (Vec<Cell>, Vec<Cell>) {
        let pick = |rows: &[f64; 9]| {
            rows.iter()
                .enumerate()
                .filter(|(_, y)| **y != 0.0)
                .map(|(i, _)| Cell::from_index(i))
                .collect()
        };
        (pick(&self.context_a), pick(&self.context_b))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeasibilityResult {
    /// Nonzero mixture weights reproducing both behaviors.
    Feasible(BTreeMap<DeterministicStrategy, f64>),
    Infeasible(FarkasCertificate),
}

impl FeasibilityResult {
    pub fn is_feasible(&self) -> bool {
        matches!(self, FeasibilityResult::Feasible(_))
    }
}

/// Behavior generated by a strategy mixture.
pub fn mixture_behavior(weights: &BTreeMap<DeterministicStrategy, f64>) -> [f64; 9] {
    let mut cells = [0.0; 9];
    for (&s, &w) in weights {
        for (c, p) in strategy_behavior(s).cells.iter().enumerate() {
            cells[c] += w * p;
        }
    }
    cells
}

/// Constraint matrix: rows `(context, cell)` then normalization, columns strategies.
fn constraint_rows() -> Vec<[f64; 9]> {
    let strategies = enumerate_strategies();
    let mut rows = Vec::with_capacity(19);
    for _context in 0..2 {
        for cell in 0..9 {
            let mut row = [0.0; 9];
            for (j, &s) in strategies.iter().enumerate() {
                row[j] = strategy_behavior(s).cells[cell];
            }
            rows.push(row);
        }
    }
    rows.push([1.0; 9]);
    rows
}

fn rhs(a: &Behavior, b: &Behavior) -> Vec<f64> {
    let mut v = Vec::with_capacity(19);
    v.extend_from_slice(&a.cells);
    v.extend_from_slice(&b.cells);
    v.push(1.0);
    v
}

/// Is there one strategy mixture reproducing behavior `a` in context (a) and
/// behavior `b` in context (b)?
///
/// Exactly normalized inputs (e.g. dyadic probabilities) are solved over exact
/// rationals; anything else in `f64` at tolerance 1e-9. The returned witness
/// is always re-verified.
pub fn lhv_feasible(a: &Behavior, b: &Behavior) -> Result<FeasibilityResult> {
    let a = Behavior::new(a.cells)?;
    let b = Behavior::new(b.cells)?;
    let rows = constraint_rows();
    let rhs = rhs(&a, &b);
    let exact_path = a.is_exactly_normalized() && b.is_exactly_normalized();

    let outcome: LpOutcome<f64> = if exact_path {
        let ma: Vec<Vec<BigRational>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| exact(x)).collect())
            .collect();
        let mb: Vec<BigRational> = rhs.iter().map(|&x| exact(x)).collect();
        match feasibility(&ma, &mb, &Tolerances::exact()) {
            LpOutcome::Feasible(x) => LpOutcome::Feasible(to_f64(&x)),
            LpOutcome::Infeasible(y) => LpOutcome::Infeasible(to_f64(&y)),
        }
    } else {
        let ma: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        feasibility(
            &ma,
            &rhs,
            &Tolerances {
                pivot: 1e-12,
                feasibility: FLOAT_TOLERANCE,
            },
        )
    };

    let result = match outcome {
        LpOutcome::Feasible(x) => FeasibilityResult::Feasible(
            x.iter()
                .enumerate()
                .filter(|(_, &w)| w > 0.0)
                .map(|(j, &w)| (DeterministicStrategy::from_index(j), w))
                .collect(),
        ),
        LpOutcome::Infeasible(y) => FeasibilityResult::Infeasible(
            cell_pair_certificate(&a, &b).unwrap_or_else(|| FarkasCertificate::from_rows(&y)),
        ),
    };
    match &result {
        FeasibilityResult::Feasible(w) => {
            let reproduced = mixture_behavior(w);
            let close = |target: &[f64; 9]| {
                reproduced
                    .iter()
                    .zip(target)
                    .all(|(x, y)| (x - y).abs() <= FLOAT_TOLERANCE)
            };
            let ok = close(&a.cells) && close(&b.cells);
            debug_assert!(ok, "LP weights fail to reproduce the behaviors");
        }
        FeasibilityResult::Infeasible(cert) => {
            debug_assert!(
                verify_certificate(cert, &a, &b),
                "LP certificate fails verification"
            );
        }
    }
    Ok(result)
}

/// Two-row certificate `+1` on the larger and `-1` on the smaller entry of
/// the cell where the behaviors differ most (first such cell in index order).
/// Every strategy column sums to zero against it, so it is valid whenever
/// that difference is positive; returned only if it verifies.
fn cell_pair_certificate(a: &Behavior, b: &Behavior) -> Option<FarkasCertificate> {
    let (cell, _) = a
        .cells
        .iter()
        .zip(&b.cells)
        .map(|(x, y)| (x - y).abs())
        .enumerate()
        .fold(
            (0, 0.0),
            |best, (i, d)| if d > best.1 { (i, d) } else { best },
        );
    let mut cert = FarkasCertificate::zero();
    let sign = if b.cells[cell] > a.cells[cell] {
        1.0
    } else {
        -1.0
    };
    cert.context_b[cell] = sign;
    cert.context_a[cell] = -sign;
    verify_certificate(&cert, a, b).then_some(cert)
}

fn to_f64(v: &[BigRational]) -> Vec<f64> {
    v.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect()
}

/// Re-checks the Farkas conditions from scratch: for every strategy column
/// `y^T A <= 0`, and `y^T b > 0`. Evaluated over exact rationals; when the
/// behaviors are not exactly normalized a slack of `1e-9 * max|y|` applies.
pub fn verify_certificate(cert: &FarkasCertificate, a: &Behavior, b: &Behavior) -> bool {
    let y: Vec<BigRational> = cert.rows().iter().map(|&v| exact(v)).collect();
    if y.iter().all(Zero::is_zero) {
        return false;
    }
    let slack = if a.is_exactly_normalized() && b.is_exactly_normalized() {
        BigRational::zero()
    } else {
        let max = y
            .iter()
            .map(Signed::abs)
            .max()
            .unwrap_or_else(BigRational::zero);
        max * exact(FLOAT_TOLERANCE)
    };
    for s in enumerate_strategies() {
        let column = strategy_behavior(s);
        let mut total = y[18].clone();
        for (cell, &p) in column.cells.iter().enumerate() {
            let p = exact(p);
            total += &y[cell] * &p + &y[9 + cell] * &p;
        }
        if total > slack {
            return false;
        }
    }
    let mut yb = y[18].clone();
    for cell in 0..9 {
        yb += &y[cell] * exact(a.cells[cell]) + &y[9 + cell] * exact(b.cells[cell]);
    }
    yb > slack
}

/// Mass that `b` puts on both-detect cells that `a` forbids (mass at most 1e-12).
pub fn contradiction_fraction(a: &Behavior, b: &Behavior) -> f64 {
    a.iter()
        .filter(|(cell, p)| cell.both_detect() && *p <= ZERO_CELL_TOLERANCE)
        .map(|(cell, _)| b.get(cell))
        .sum()
}

/// Independent-sources variant: feasibility with weights restricted to a
/// product `q(m, p) = u(m) v(p)`.
#[derive(Debug, Clone, PartialEq)]
pub enum ProductFormResult {
    Feasible {
        weights: BTreeMap<DeterministicStrategy, f64>,
        minus_marginal: [f64; 3],
        plus_marginal: [f64; 3],
    },
    /// The unconstrained mixture exists but is not of product form.
    NotProductForm(BTreeMap<DeterministicStrategy, f64>),
    Infeasible(FarkasCertificate),
}

/// Nonnegative rank-1 decomposition of a 3x3 weight table, if one exists
/// within `tol` per entry.
pub fn product_form_decomposition(
    weights: &BTreeMap<DeterministicStrategy, f64>,
    tol: f64,
) -> Option<([f64; 3], [f64; 3])> {
    let mut table = [[0.0; 3]; 3];
    for (s, &w) in weights {
        table[s.minus.index()][s.plus.index()] = w;
    }
    let u: [f64; 3] = std::array::from_fn(|i| table[i].iter().sum());
    let v: [f64; 3] = std::array::from_fn(|j| table.iter().map(|row| row[j]).sum());
    let fits = (0..3).all(|i| (0..3).all(|j| (table[i][j] - u[i] * v[j]).abs() <= tol));
    fits.then_some((u, v))
}

pub fn lhv_feasible_product_form(a: &Behavior, b: &Behavior) -> Result<ProductFormResult> {
    Ok(match lhv_feasible(a, b)? {
        FeasibilityResult::Infeasible(c) => ProductFormResult::Infeasible(c),
        FeasibilityResult::Feasible(weights) => {
            match product_form_decomposition(&weights, FLOAT_TOLERANCE) {
                Some((minus_marginal, plus_marginal)) => ProductFormResult::Feasible {
                    weights,
                    minus_marginal,
                    plus_marginal,
                },
                None => ProductFormResult::NotProductForm(weights),
            }
        }
    })
}
