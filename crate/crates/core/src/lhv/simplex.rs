//! Phase-I simplex for `A x = b, x >= 0`, generic over an ordered field.
//!
//! Runs unchanged on `f64` (with tolerances) and on exact big rationals (with
//! zero tolerances). When the system is infeasible the phase-I duals give a
//! Farkas certificate `y` with `y^T A <= 0` column-wise and `y^T b > 0`.

use num_traits::{Num, Signed};

/// Outcome of [`feasibility`].
#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome<F> {
    Feasible(Vec<F>),
    Infeasible(Vec<F>),
}

/// Tolerances: `pivot` bounds admissible pivot elements and negative reduced
/// costs, `feasibility` is the largest phase-I optimum still accepted as
/// feasible. Both are zero for exact arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances<F> {
    pub pivot: F,
    pub feasibility: F,
}

impl<F: Num> Tolerances<F> {
    pub fn exact() -> Self {
        Tolerances {
            pivot: F::zero(),
            feasibility: F::zero(),
        }
    }
}

/// Decides feasibility of `A x = b, x >= 0` with Bland's rule.
///
/// `a` is row-major with `b.len()` rows of equal length.
pub fn feasibility<F>(a: &[Vec<F>], b: &[F], tol: &Tolerances<F>) -> LpOutcome<F>
where
    F: Clone + PartialOrd + Num + Signed,
{
    let m = b.len();
    let n = a.first().map_or(0, Vec::len);
    let width = n + m + 1;
    let rhs = n + m;

    // Rows with negative right-hand side are negated so artificials start feasible.
    let signs: Vec<F> = b
        .iter()
        .map(|bi| {
            if bi.is_negative() {
                -F::one()
            } else {
                F::one()
            }
        })
        .collect();

    let mut tableau: Vec<Vec<F>> = (0..m)
        .map(|i| {
            let mut row = vec![F::zero(); width];
            for j in 0..n {
                row[j] = signs[i].clone() * a[i][j].clone();
            }
            row[n + i] = F::one();
            row[rhs] = signs[i].clone() * b[i].clone();
            row
        })
        .collect();
    let mut basis: Vec<usize> = (n..n + m).collect();

    // Reduced costs of the phase-I objective sum(artificials); last entry is -objective.
    let mut cost = vec![F::zero(); width];
    for row in &tableau {
        for j in 0..n {
            cost[j] = cost[j].clone() - row[j].clone();
        }
        cost[rhs] = cost[rhs].clone() - row[rhs].clone();
    }

    let neg_pivot = -tol.pivot.clone();
    while let Some(enter) = (0..n + m).find(|&j| cost[j] < neg_pivot) {
        let mut leave: Option<(usize, F)> = None;
        for (i, row) in tableau.iter().enumerate() {
            if row[enter] > tol.pivot {
                let ratio = row[rhs].clone() / row[enter].clone();
                let better = match &leave {
                    None => true,
                    Some((li, best)) => ratio < *best || (ratio == *best && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        // The phase-I objective is bounded below by zero, so a ratio always exists.
        let Some((pivot_row, _)) = leave else { break };
        pivot(&mut tableau, &mut cost, pivot_row, enter);
        basis[pivot_row] = enter;
    }

    let objective = -cost[rhs].clone();
    if objective > tol.feasibility {
        let y = (0..m)
            .map(|i| signs[i].clone() * (F::one() - cost[n + i].clone()))
            .collect();
        return LpOutcome::Infeasible(y);
    }
    let mut x = vec![F::zero(); n];
    for (i, &var) in basis.iter().enumerate() {
        if var < n {
            let v = tableau[i][rhs].clone();
            x[var] = if v.is_negative() { F::zero() } else { v };
        }
    }
    LpOutcome::Feasible(x)
}

fn pivot<F>(tableau: &mut [Vec<F>], cost: &mut [F], row: usize, col: usize)
where
    F: Clone + Num,
{
    let p = tableau[row][col].clone();
    for v in tableau[row].iter_mut() {
        *v = v.clone() / p.clone();
    }
    let pivot_row = tableau[row].clone();
    for (i, r) in tableau.iter_mut().enumerate() {
        if i == row || r[col].is_zero() {
            continue;
        }
        let factor = r[col].clone();
        for (v, pv) in r.iter_mut().zip(&pivot_row) {
            *v = v.clone() - factor.clone() * pv.clone();
        }
    }
    if !cost[col].is_zero() {
        let factor = cost[col].clone();
        for (v, pv) in cost.iter_mut().zip(&pivot_row) {
            *v = v.clone() - factor.clone() * pv.clone();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn check_certificate(a: &[Vec<BigRational>], b: &[BigRational], y: &[BigRational]) {
        for j in 0..a[0].len() {
            let s: BigRational = a.iter().zip(y).map(|(row, yi)| yi * &row[j]).sum();
            assert!(s <= q(0, 1), "column {j}: {s}");
        }
        let yb: BigRational = y.iter().zip(b).map(|(u, v)| u * v).sum();
        assert!(yb > q(0, 1));
    }

    #[test]
    fn exact_feasible_system() {
        // x0 + x1 = 1, x0 - x1 = 1/2
        let a = vec![vec![q(1, 1), q(1, 1)], vec![q(1, 1), q(-1, 1)]];
        let b = vec![q(1, 1), q(1, 2)];
        match feasibility(&a, &b, &Tolerances::exact()) {
            LpOutcome::Feasible(x) => assert_eq!(x, vec![q(3, 4), q(1, 4)]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn exact_infeasible_system_has_certificate() {
        // x0 = 0 and x0 = 1/4
        let a = vec![vec![q(1, 1)], vec![q(1, 1)]];
        let b = vec![q(0, 1), q(1, 4)];
        match feasibility(&a, &b, &Tolerances::exact()) {
            LpOutcome::Infeasible(y) => check_certificate(&a, &b, &y),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_rhs_rows() {
        // -x0 = -2 is feasible with x0 = 2; x0 + x1 = -1 is not.
        let a = vec![vec![q(-1, 1), q(0, 1)], vec![q(1, 1), q(1, 1)]];
        let b = vec![q(-2, 1), q(-1, 1)];
        match feasibility(&a, &b, &Tolerances::exact()) {
            LpOutcome::Infeasible(y) => check_certificate(&a, &b, &y),
            other => panic!("{other:?}"),
        }
        let b = vec![q(-2, 1), q(3, 1)];
        assert!(matches!(
            feasibility(&a, &b, &Tolerances::exact()),
            LpOutcome::Feasible(_)
        ));
    }

    #[test]
    fn redundant_rows_in_floating_point() {
        let a = vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0]];
        let b = vec![0.3, 0.3, 1.0];
        let tol = Tolerances {
            pivot: 1e-12,
            feasibility: 1e-9,
        };
        match feasibility(&a, &b, &tol) {
            LpOutcome::Feasible(x) => {
                assert!((x[0] - 0.3).abs() < 1e-12);
                assert!((x[1] - 0.7).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }
}
