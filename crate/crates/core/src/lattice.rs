//! Exact integer linear algebra: Hermite and Smith normal forms with
//! transformation matrices, integer kernels, and integer linear solves.
//!
//! Intermediate entries can swell well past machine word size, so all
//! entries are arbitrary-precision integers. Pivot selection breaks ties by
//! lowest index, which makes every normal form deterministic for a fixed
//! input.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use thiserror::Error;

/// Vector of exact rationals. `BigRational` keeps the canonical reduced
/// form (gcd(num, den) = 1, den > 0) on its own.
pub type RationalVector = Vec<BigRational>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LatticeError {
    #[error("no integer solution: {0}")]
    NoIntegerSolution(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Dense row-major matrix over the integers. Dimensions are fixed at
/// construction; entries are arbitrary precision.
#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<BigInt>) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count must match shape");
        IntMatrix { rows, cols, entries }
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        IntMatrix::new(rows, cols, vec![BigInt::zero(); rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zero(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<BigInt>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        IntMatrix::new(r, c, rows.concat())
    }

    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Self {
        let big: Vec<Vec<BigInt>> = rows
            .iter()
            .map(|row| row.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        IntMatrix::from_rows(&big)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = IntMatrix::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "incompatible shapes for product");
        let mut out = IntMatrix::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = &self[(i, l)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let term = a * &other[(l, j)];
                    out[(i, j)] += term;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len(), "incompatible shapes for product");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut m: Vec<Vec<BigInt>> = self.row_vecs();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for p in 0..n - 1 {
            if m[p][p].is_zero() {
                let swap = (p + 1..n).find(|&r| !m[r][p].is_zero());
                match swap {
                    Some(r) => {
                        m.swap(p, r);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in p + 1..n {
                for j in p + 1..n {
                    let num = &m[p][p] * &m[i][j] - &m[i][p] * &m[p][j];
                    m[i][j] = &num / &prev;
                }
                m[i][p] = BigInt::zero();
            }
            prev = m[p][p].clone();
        }
        sign * m[n - 1][n - 1].clone()
    }

    /// Rank over the rationals, read off the Hermite form.
    pub fn rank(&self) -> usize {
        let (h, _) = hermite_normal_form(self);
        (0..h.rows)
            .filter(|&i| h.row(i).iter().any(|e| !e.is_zero()))
            .count()
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -std::mem::take(&mut self[(i, j)]);
            self[(i, j)] = v;
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            let tmp = self[(a, j)].clone();
            self[(a, j)] = self[(b, j)].clone();
            self[(b, j)] = tmp;
        }
    }

    /// row(dst) -= q * row(src)
    fn row_submul(&mut self, dst: usize, src: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let t = q * &self[(src, j)];
            self[(dst, j)] -= t;
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            let tmp = self[(i, a)].clone();
            self[(i, a)] = self[(i, b)].clone();
            self[(i, b)] = tmp;
        }
    }

    /// col(dst) -= q * col(src)
    fn col_submul(&mut self, dst: usize, src: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let t = q * &self[(i, src)];
            self[(i, dst)] -= t;
        }
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.entries[i * self.cols + j]
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|e| e.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Row-style Hermite normal form: returns `(h, u)` with `u` unimodular,
/// `u * a = h`, `h` in row echelon form with positive pivots and the entries
/// above each pivot reduced into `[0, pivot)`.
pub fn hermite_normal_form(a: &IntMatrix) -> (IntMatrix, IntMatrix) {
    let mut h = a.clone();
    let mut u = IntMatrix::identity(a.rows);
    let mut pivot_row = 0usize;
    for col in 0..h.cols {
        if pivot_row == h.rows {
            break;
        }
        loop {
            // smallest nonzero |entry| at or below the pivot row, lowest index on ties
            let best = (pivot_row..h.rows)
                .filter(|&r| !h[(r, col)].is_zero())
                .min_by(|&r, &s| h[(r, col)].abs().cmp(&h[(s, col)].abs()).then(r.cmp(&s)));
            let Some(best) = best else { break };
            h.swap_rows(best, pivot_row);
            u.swap_rows(best, pivot_row);
            let mut clean = true;
            for r in pivot_row + 1..h.rows {
                if h[(r, col)].is_zero() {
                    continue;
                }
                let q = &h[(r, col)] / &h[(pivot_row, col)];
                h.row_submul(r, pivot_row, &q);
                u.row_submul(r, pivot_row, &q);
                if !h[(r, col)].is_zero() {
                    clean = false;
                }
            }
            if clean {
                if h[(pivot_row, col)].is_negative() {
                    h.negate_row(pivot_row);
                    u.negate_row(pivot_row);
                }
                for r in 0..pivot_row {
                    let q = h[(r, col)].div_floor(&h[(pivot_row, col)]);
                    h.row_submul(r, pivot_row, &q);
                    u.row_submul(r, pivot_row, &q);
                }
                pivot_row += 1;
                break;
            }
        }
    }
    (h, u)
}

/// Smith normal form: returns `(d, u, v)` with `u`, `v` unimodular,
/// `u * a * v = d` diagonal, invariant factors nonnegative and each dividing
/// the next.
pub fn smith_normal_form(a: &IntMatrix) -> (IntMatrix, IntMatrix, IntMatrix) {
    let mut d = a.clone();
    let mut u = IntMatrix::identity(a.rows);
    let mut v = IntMatrix::identity(a.cols);
    let limit = d.rows.min(d.cols);
    let mut t = 0usize;
    while t < limit {
        // smallest nonzero |entry| in the trailing submatrix
        let mut best: Option<(usize, usize)> = None;
        for i in t..d.rows {
            for j in t..d.cols {
                if d[(i, j)].is_zero() {
                    continue;
                }
                match best {
                    Some((bi, bj)) if d[(bi, bj)].abs() <= d[(i, j)].abs() => {}
                    _ => best = Some((i, j)),
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        d.swap_rows(bi, t);
        u.swap_rows(bi, t);
        d.swap_cols(bj, t);
        v.swap_cols(bj, t);
        loop {
            let mut dirty = false;
            for i in t + 1..d.rows {
                if d[(i, t)].is_zero() {
                    continue;
                }
                let q = &d[(i, t)] / &d[(t, t)];
                d.row_submul(i, t, &q);
                u.row_submul(i, t, &q);
                if !d[(i, t)].is_zero() {
                    // remainder is smaller than the pivot; promote it
                    d.swap_rows(i, t);
                    u.swap_rows(i, t);
                    dirty = true;
                }
            }
            for j in t + 1..d.cols {
                if d[(t, j)].is_zero() {
                    continue;
                }
                let q = &d[(t, j)] / &d[(t, t)];
                d.col_submul(j, t, &q);
                v.col_submul(j, t, &q);
                if !d[(t, j)].is_zero() {
                    d.swap_cols(j, t);
                    v.swap_cols(j, t);
                    dirty = true;
                }
            }
            if dirty {
                continue;
            }
            // pivot must divide every trailing entry; if not, fold the
            // offending row in and keep reducing
            let mut offender = None;
            'scan: for i in t + 1..d.rows {
                for j in t + 1..d.cols {
                    if !d[(i, j)].is_multiple_of(&d[(t, t)]) {
                        offender = Some(i);
                        break 'scan;
                    }
                }
            }
            match offender {
                Some(i) => {
                    let minus_one = -BigInt::one();
                    d.row_submul(t, i, &minus_one);
                    u.row_submul(t, i, &minus_one);
                }
                None => break,
            }
        }
        if d[(t, t)].is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
        t += 1;
    }
    (d, u, v)
}

/// Basis of the right kernel `{x : a * x = 0}` as a list of integer vectors.
/// The basis is primitive: it extends to a basis of the full lattice.
pub fn kernel_basis(a: &IntMatrix) -> Vec<Vec<BigInt>> {
    let (h, u) = hermite_normal_form(&a.transpose());
    // zero rows of h correspond to rows of u annihilating a^T
    (0..h.rows)
        .filter(|&i| h.row(i).iter().all(Zero::is_zero))
        .map(|i| u.row(i).to_vec())
        .collect()
}

/// Some integer solution of `a * x = b`, if one exists. Solutions are not
/// unique in general; this one comes from the Smith form and is
/// deterministic for a fixed input.
pub fn solve_linear_integer(a: &IntMatrix, b: &[BigInt]) -> Result<Vec<BigInt>, LatticeError> {
    if b.len() != a.rows {
        return Err(LatticeError::DimensionMismatch(format!(
            "rhs has {} entries, matrix has {} rows",
            b.len(),
            a.rows
        )));
    }
    let (d, u, v) = smith_normal_form(a);
    let c = u.mul_vec(b);
    let mut y = vec![BigInt::zero(); a.cols];
    for i in 0..a.rows {
        let di = if i < a.cols { d[(i, i)].clone() } else { BigInt::zero() };
        if di.is_zero() {
            if !c[i].is_zero() {
                return Err(LatticeError::NoIntegerSolution(format!(
                    "rhs component {} not in the image",
                    i
                )));
            }
        } else {
            let (q, r) = c[i].div_rem(&di);
            if !r.is_zero() {
                return Err(LatticeError::NoIntegerSolution(format!(
                    "invariant factor {} does not divide rhs component {}",
                    di, c[i]
                )));
            }
            y[i] = q;
        }
    }
    Ok(v.mul_vec(&y))
}

/// Divide out the gcd of the entries, normalizing the sign so the first
/// nonzero entry is positive. Zero vectors pass through unchanged.
pub fn primitive_part(v: &[BigInt]) -> Vec<BigInt> {
    let mut g = BigInt::zero();
    for e in v {
        g = g.gcd(e);
    }
    if g.is_zero() {
        return v.to_vec();
    }
    let mut out: Vec<BigInt> = v.iter().map(|e| e / &g).collect();
    if let Some(first) = out.iter().find(|e| !e.is_zero()) {
        if first.is_negative() {
            for e in &mut out {
                *e = -std::mem::take(e);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bi(n: i64) -> BigInt {
        BigInt::from(n)
    }

    fn is_unimodular(m: &IntMatrix) -> bool {
        m.rows == m.cols && m.determinant().abs() == BigInt::one()
    }

    #[test]
    fn hnf_reproduces_input_and_is_reduced() {
        let a = IntMatrix::from_i64_rows(&[vec![2, 4], vec![1, 3]]);
        let (h, u) = hermite_normal_form(&a);
        assert_eq!(u.mul(&a), h);
        assert!(is_unimodular(&u));
        // fully reduced form of this input
        assert_eq!(h, IntMatrix::from_i64_rows(&[vec![1, 1], vec![0, 2]]));
    }

    #[test]
    fn hnf_identity_and_zero() {
        let id = IntMatrix::identity(3);
        let (h, u) = hermite_normal_form(&id);
        assert_eq!(h, id);
        assert_eq!(u, id);

        let z = IntMatrix::zero(2, 2);
        let (h, u) = hermite_normal_form(&z);
        assert_eq!(h, z);
        assert_eq!(u, IntMatrix::identity(2));
    }

    #[test]
    fn snf_divisibility_chain() {
        let a = IntMatrix::from_i64_rows(&[vec![2, 0], vec![0, 3]]);
        let (d, u, v) = smith_normal_form(&a);
        assert_eq!(u.mul(&a).mul(&v), d);
        assert!(is_unimodular(&u));
        assert!(is_unimodular(&v));
        assert_eq!(d[(0, 0)], bi(1));
        assert_eq!(d[(1, 1)], bi(6));
    }

    #[test]
    fn snf_trivial_cases() {
        let id = IntMatrix::identity(2);
        let (d, _, _) = smith_normal_form(&id);
        assert_eq!(d, id);

        let a = IntMatrix::from_i64_rows(&[vec![5]]);
        let (d, _, _) = smith_normal_form(&a);
        assert_eq!(d[(0, 0)], bi(5));
    }

    #[test]
    fn kernel_of_quintic_charge_row() {
        let a = IntMatrix::from_i64_rows(&[vec![1, 1, 1, 1, 1, -5]]);
        let basis = kernel_basis(&a);
        assert_eq!(basis.len(), 5);
        for v in &basis {
            let img = a.mul_vec(v);
            assert!(img.iter().all(Zero::is_zero));
        }
        // primitive lattice basis: all invariant factors are 1
        let m = IntMatrix::from_rows(&basis);
        let (d, _, _) = smith_normal_form(&m);
        for i in 0..5 {
            assert_eq!(d[(i, i)], bi(1));
        }
    }

    #[test]
    fn kernel_trivial_cases() {
        let a = IntMatrix::from_i64_rows(&[vec![1, 2], vec![3, 7]]);
        assert!(kernel_basis(&a).is_empty());

        let z = IntMatrix::zero(1, 3);
        let basis = kernel_basis(&z);
        assert_eq!(basis.len(), 3);
        let m = IntMatrix::from_rows(&basis);
        assert!(is_unimodular(&m));
    }

    #[test]
    fn solve_quintic_weights() {
        let a = IntMatrix::from_i64_rows(&[vec![1, 1, 1, 1, 1]]);
        let x = solve_linear_integer(&a, &[bi(5)]).unwrap();
        let sum: BigInt = x.iter().sum();
        assert_eq!(sum, bi(5));
    }

    #[test]
    fn solve_parity_obstruction() {
        let a = IntMatrix::from_i64_rows(&[vec![2]]);
        assert!(matches!(
            solve_linear_integer(&a, &[bi(1)]),
            Err(LatticeError::NoIntegerSolution(_))
        ));
    }

    #[test]
    fn solve_identity() {
        let a = IntMatrix::identity(3);
        let b = vec![bi(7), bi(-2), bi(0)];
        assert_eq!(solve_linear_integer(&a, &b).unwrap(), b);
    }

    #[test]
    fn determinant_small() {
        let a = IntMatrix::from_i64_rows(&[vec![2, 1], vec![7, 4]]);
        assert_eq!(a.determinant(), bi(1));
        let b = IntMatrix::from_i64_rows(&[vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 10]]);
        assert_eq!(b.determinant(), bi(-3));
    }

    #[test]
    fn primitive_part_normalizes_sign() {
        let v = vec![bi(-2), bi(4), bi(-6)];
        assert_eq!(primitive_part(&v), vec![bi(1), bi(-2), bi(3)]);
    }
}
