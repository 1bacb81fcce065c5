//! Exact rational linear programming, just enough for cone membership and
//! chamber feasibility: a phase-1 simplex over `BigRational` with Bland's
//! rule, so it terminates and is deterministic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Find `x >= 0` with `a * x = b`, exactly, or report infeasibility.
///
/// `a` is given as rows. Feasibility is decided by minimizing the sum of
/// artificial variables; the returned point is a basic feasible solution.
pub fn nonneg_solution(a: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
    let m = a.len();
    assert_eq!(b.len(), m, "rhs length must match row count");
    let n = a.first().map_or(0, |row| row.len());
    if m == 0 {
        return Some(vec![]);
    }

    // tableau: n structural + m artificial columns, rhs last; flip rows so b >= 0
    let width = n + m + 1;
    let mut tab: Vec<Vec<BigRational>> = Vec::with_capacity(m);
    for i in 0..m {
        let mut row: Vec<BigRational> = Vec::with_capacity(width);
        let flip = b[i].is_negative();
        for j in 0..n {
            row.push(if flip { -a[i][j].clone() } else { a[i][j].clone() });
        }
        for j in 0..m {
            row.push(if j == i { BigRational::one() } else { BigRational::zero() });
        }
        row.push(if flip { -b[i].clone() } else { b[i].clone() });
        tab.push(row);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // reduced costs for the phase-1 objective (artificials cost 1)
    let mut cost: Vec<BigRational> = vec![BigRational::zero(); width];
    for row in &tab {
        for (c, e) in cost.iter_mut().zip(row.iter()) {
            *c += e;
        }
    }
    for j in n..n + m {
        cost[j] -= BigRational::one();
    }

    loop {
        // Bland: entering = lowest index with positive reduced cost
        let entering = (0..n + m).find(|&j| cost[j].is_positive());
        let Some(e) = entering else { break };
        // ratio test, ties broken by lowest basis variable index
        let mut leave: Option<usize> = None;
        let mut best: Option<BigRational> = None;
        for (i, row) in tab.iter().enumerate() {
            if !row[e].is_positive() {
                continue;
            }
            let ratio = &row[width - 1] / &row[e];
            let better = match &best {
                None => true,
                Some(r) => {
                    ratio < *r || (ratio == *r && basis[i] < basis[leave.unwrap()])
                }
            };
            if better {
                best = Some(ratio);
                leave = Some(i);
            }
        }
        let l = leave?; // unbounded phase-1 cannot happen, but stay safe
        // pivot on (l, e)
        let piv = tab[l][e].clone();
        for x in tab[l].iter_mut() {
            *x /= &piv;
        }
        for i in 0..m {
            if i == l || tab[i][e].is_zero() {
                continue;
            }
            let factor = tab[i][e].clone();
            for j in 0..width {
                let t = &factor * &tab[l][j];
                tab[i][j] -= t;
            }
        }
        if !cost[e].is_zero() {
            let factor = cost[e].clone();
            for j in 0..width {
                let t = &factor * &tab[l][j];
                cost[j] -= t;
            }
        }
        basis[l] = e;
    }

    // feasible iff no artificial carries value
    for (i, &bv) in basis.iter().enumerate() {
        if bv >= n && !tab[i][width - 1].is_zero() {
            return None;
        }
    }
    let mut x = vec![BigRational::zero(); n];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            x[bv] = tab[i][width - 1].clone();
        }
    }
    Some(x)
}

/// Find a free vector `x` with `rows[i] . x >= rhs[i]` for every constraint,
/// or report infeasibility. Used with `rhs = 1` to find strict interior
/// points of open polyhedral cones.
pub fn feasible_point(
    rows: &[Vec<BigRational>],
    rhs: &[BigRational],
) -> Option<Vec<BigRational>> {
    let m = rows.len();
    assert_eq!(rhs.len(), m);
    let k = rows.first().map_or(0, |r| r.len());
    // x = u - w with u, w >= 0; slack s >= 0 turns >= into equality
    let mut eq: Vec<Vec<BigRational>> = Vec::with_capacity(m);
    for (i, row) in rows.iter().enumerate() {
        let mut r: Vec<BigRational> = Vec::with_capacity(2 * k + m);
        for e in row {
            r.push(e.clone());
        }
        for e in row {
            r.push(-e.clone());
        }
        for j in 0..m {
            r.push(if j == i { -BigRational::one() } else { BigRational::zero() });
        }
        eq.push(r);
    }
    let sol = nonneg_solution(&eq, rhs)?;
    Some((0..k).map(|j| &sol[j] - &sol[k + j]).collect())
}

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn from_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn to_rational(v: &[BigInt]) -> Vec<BigRational> {
    v.iter().map(|e| BigRational::from_integer(e.clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feasible_system() {
        // x1 + x2 = 2, x1 - x2 = 0 -> x = (1, 1)
        let a = vec![
            vec![from_int(1), from_int(1)],
            vec![from_int(1), from_int(-1)],
        ];
        let b = vec![from_int(2), from_int(0)];
        let x = nonneg_solution(&a, &b).unwrap();
        assert_eq!(x, vec![from_int(1), from_int(1)]);
    }

    #[test]
    fn infeasible_by_sign() {
        // x1 + x2 = -1 with x >= 0
        let a = vec![vec![from_int(1), from_int(1)]];
        let b = vec![from_int(-1)];
        assert!(nonneg_solution(&a, &b).is_none());
    }

    #[test]
    fn infeasible_mixed() {
        // x1 - x2 = 1 and x2 - x1 = 1 cannot both hold
        let a = vec![
            vec![from_int(1), from_int(-1)],
            vec![from_int(-1), from_int(1)],
        ];
        let b = vec![from_int(1), from_int(1)];
        assert!(nonneg_solution(&a, &b).is_none());
    }

    #[test]
    fn rational_solution() {
        // 2x = 1 -> x = 1/2
        let a = vec![vec![from_int(2)]];
        let b = vec![from_int(1)];
        let x = nonneg_solution(&a, &b).unwrap();
        assert_eq!(x[0], ratio(1, 2));
    }

    #[test]
    fn strict_point_in_quadrant() {
        let rows = vec![
            vec![from_int(1), from_int(0)],
            vec![from_int(0), from_int(1)],
        ];
        let rhs = vec![from_int(1), from_int(1)];
        let x = feasible_point(&rows, &rhs).unwrap();
        assert!(x[0] >= from_int(1));
        assert!(x[1] >= from_int(1));
    }

    #[test]
    fn strict_point_infeasible() {
        // x >= 1 and -x >= 1
        let rows = vec![vec![from_int(1)], vec![from_int(-1)]];
        let rhs = vec![from_int(1), from_int(1)];
        assert!(feasible_point(&rows, &rhs).is_none());
    }
}
