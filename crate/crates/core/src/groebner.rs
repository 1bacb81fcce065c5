//! Buchberger's algorithm over the rationals, with division that tracks
//! cofactors so every positive membership answer carries a certificate that
//! re-expands to the tested element.

use crate::laurent::{LaurentElement, TermOrder};
use num_rational::BigRational;
use num_traits::One;
use std::collections::VecDeque;

fn divides(divisor: &[i64], dividend: &[i64]) -> bool {
    divisor.iter().zip(dividend).all(|(a, b)| a <= b)
}

fn exp_sub(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn exp_lcm(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| *x.max(y)).collect()
}

/// Result of dividing `f` by a list of polynomials:
/// `f = sum(cofactors[i] * basis[i]) + remainder` with no remainder term
/// divisible by any leading term of the basis.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub cofactors: Vec<LaurentElement>,
    pub remainder: LaurentElement,
}

impl Reduction {
    /// Exact re-expansion check of the division identity.
    pub fn verify(&self, f: &LaurentElement, basis: &[LaurentElement]) -> bool {
        let mut acc = self.remainder.clone();
        for (c, g) in self.cofactors.iter().zip(basis) {
            acc = acc.add(&c.mul(g));
        }
        acc == *f
    }
}

/// Multivariate division with remainder. All inputs must be honest
/// polynomials (nonnegative exponents).
pub fn reduce(f: &LaurentElement, basis: &[LaurentElement], order: TermOrder) -> Reduction {
    f.expect_polynomial();
    for g in basis {
        g.expect_polynomial();
    }
    let nvars = f.nvars();
    let mut p = f.clone();
    let mut remainder = LaurentElement::zero(nvars);
    let mut cofactors = vec![LaurentElement::zero(nvars); basis.len()];
    while !p.is_zero() {
        let (lt_e, lt_c) = {
            let (e, c) = p.leading_term(order).unwrap();
            (e.clone(), c.clone())
        };
        let divisor = basis
            .iter()
            .position(|g| !g.is_zero() && divides(g.leading_term(order).unwrap().0, &lt_e));
        match divisor {
            Some(i) => {
                let (ge, gc) = {
                    let (e, c) = basis[i].leading_term(order).unwrap();
                    (e.clone(), c.clone())
                };
                let q = LaurentElement::monomial(nvars, &exp_sub(&lt_e, &ge), &lt_c / &gc);
                p = p.sub(&q.mul(&basis[i]));
                cofactors[i] = cofactors[i].add(&q);
            }
            None => {
                let mono = LaurentElement::monomial(nvars, &lt_e, lt_c);
                remainder = remainder.add(&mono);
                p = p.sub(&mono);
            }
        }
    }
    Reduction { cofactors, remainder }
}

fn monic(f: &LaurentElement, order: TermOrder) -> LaurentElement {
    match f.leading_term(order) {
        Some((_, c)) => {
            let inv = BigRational::one() / c;
            f.scale(&inv)
        }
        None => f.clone(),
    }
}

fn s_polynomial(f: &LaurentElement, g: &LaurentElement, order: TermOrder) -> LaurentElement {
    let nvars = f.nvars();
    let (fe, fc) = f.leading_term(order).unwrap();
    let (ge, gc) = g.leading_term(order).unwrap();
    let lcm = exp_lcm(fe, ge);
    let mf = LaurentElement::monomial(nvars, &exp_sub(&lcm, fe), BigRational::one() / fc);
    let mg = LaurentElement::monomial(nvars, &exp_sub(&lcm, ge), BigRational::one() / gc);
    mf.mul(f).sub(&mg.mul(g))
}

/// Reduced Groebner basis of the ideal generated by `gens`, deterministic
/// for a fixed order. Output polynomials are scaled to coprime integer
/// coefficients with positive leading coefficient and sorted by leading
/// monomial.
pub fn buchberger(gens: &[LaurentElement], order: TermOrder) -> Vec<LaurentElement> {
    if gens.is_empty() {
        return vec![];
    }
    let mut basis: Vec<LaurentElement> = gens
        .iter()
        .filter(|g| !g.is_zero())
        .map(|g| monic(g, order))
        .collect();
    if basis.is_empty() {
        return vec![];
    }
    let mut pairs: VecDeque<(usize, usize)> = VecDeque::new();
    for i in 0..basis.len() {
        for j in i + 1..basis.len() {
            pairs.push_back((i, j));
        }
    }
    while let Some((i, j)) = pairs.pop_front() {
        let (fe, _) = basis[i].leading_term(order).unwrap();
        let (ge, _) = basis[j].leading_term(order).unwrap();
        // coprime leading monomials reduce to zero
        if fe.iter().zip(ge).all(|(a, b)| *a == 0 || *b == 0) {
            continue;
        }
        let s = s_polynomial(&basis[i], &basis[j], order);
        let r = reduce(&s, &basis, order).remainder;
        if !r.is_zero() {
            let r = monic(&r, order);
            for l in 0..basis.len() {
                pairs.push_back((l, basis.len()));
            }
            basis.push(r);
        }
    }
    // minimalize: drop elements whose leading term another one divides
    let mut keep = vec![true; basis.len()];
    for i in 0..basis.len() {
        if !keep[i] {
            continue;
        }
        let lt_i = basis[i].leading_term(order).unwrap().0.clone();
        for j in 0..basis.len() {
            if i == j || !keep[j] {
                continue;
            }
            let lt_j = basis[j].leading_term(order).unwrap().0;
            if divides(&lt_j.clone(), &lt_i) && (lt_j != &lt_i || j < i) {
                keep[i] = false;
                break;
            }
        }
    }
    let minimal: Vec<LaurentElement> = basis
        .into_iter()
        .zip(keep)
        .filter_map(|(g, k)| k.then_some(g))
        .collect();
    // inter-reduce for the unique reduced basis
    let mut reduced: Vec<LaurentElement> = Vec::with_capacity(minimal.len());
    for i in 0..minimal.len() {
        let others: Vec<LaurentElement> = minimal
            .iter()
            .enumerate()
            .filter_map(|(j, g)| (j != i).then(|| g.clone()))
            .collect();
        let r = reduce(&minimal[i], &others, order).remainder;
        if !r.is_zero() {
            reduced.push(monic(&r, order));
        }
    }
    let mut out: Vec<LaurentElement> = reduced.iter().map(|g| g.primitive_integer_scale()).collect();
    out.sort_by(|a, b| {
        let ea = a.leading_term(order).unwrap().0;
        let eb = b.leading_term(order).unwrap().0;
        order.cmp(ea, eb)
    });
    debug_assert!(out.iter().all(|g| !g.has_negative_exponent()));
    out
}

/// Count of monomials outside the leading-term ideal of a Groebner basis,
/// or `None` when they are unbounded.
pub fn standard_monomial_count(gb: &[LaurentElement], order: TermOrder) -> Option<usize> {
    if gb.is_empty() {
        return None;
    }
    let nvars = gb[0].nvars();
    let lts: Vec<Vec<i64>> = gb
        .iter()
        .map(|g| g.leading_term(order).unwrap().0.clone())
        .collect();
    if lts.iter().any(|e| e.iter().all(|&x| x == 0)) {
        return Some(0); // unit ideal
    }
    // bounded iff every variable has a pure power among the leading terms
    let mut bounds = vec![0i64; nvars];
    for j in 0..nvars {
        let bound = lts
            .iter()
            .filter(|e| e.iter().enumerate().all(|(l, &x)| l == j || x == 0))
            .map(|e| e[j])
            .min()?;
        bounds[j] = bound;
    }
    let mut count = 0usize;
    let mut cursor = vec![0i64; nvars];
    loop {
        if !lts.iter().any(|lt| divides(lt, &cursor)) {
            count += 1;
        }
        let mut j = 0;
        loop {
            if j == nvars {
                return Some(count);
            }
            cursor[j] += 1;
            if cursor[j] < bounds[j] {
                break;
            }
            cursor[j] = 0;
            j += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn t_minus_one_pow(n: u32) -> LaurentElement {
        let t = LaurentElement::var(1, 0);
        t.sub(&LaurentElement::one(1)).pow(n)
    }

    fn t_pow_minus_one(n: i64) -> LaurentElement {
        LaurentElement::monomial(1, &[n], BigRational::one()).sub(&LaurentElement::one(1))
    }

    #[test]
    fn principal_ideal_is_its_own_basis() {
        let g = t_minus_one_pow(4);
        let gb = buchberger(&[g.clone()], TermOrder::GradedLex);
        assert_eq!(gb, vec![g.normalize()]);
    }

    #[test]
    fn univariate_pair_reduces_to_gcd() {
        // (t-1)^3 (t^2-1) and (t-1)^3 (t^5-1) generate <(t-1)^4>
        let a = t_minus_one_pow(3).mul(&t_pow_minus_one(2));
        let b = t_minus_one_pow(3).mul(&t_pow_minus_one(5));
        let gb = buchberger(&[a, b], TermOrder::GradedLex);
        assert_eq!(gb, vec![t_minus_one_pow(4).normalize()]);
    }

    #[test]
    fn empty_input_empty_basis() {
        assert!(buchberger(&[], TermOrder::GradedLex).is_empty());
    }

    #[test]
    fn division_identity_verifies() {
        let f = t_pow_minus_one(6);
        let basis = vec![t_minus_one_pow(2)];
        let red = reduce(&f, &basis, TermOrder::GradedLex);
        assert!(red.verify(&f, &basis));
    }

    #[test]
    fn normal_form_of_t6_mod_square_of_cubic_relation() {
        let g = t_pow_minus_one(3).pow(2);
        let gb = buchberger(&[g], TermOrder::GradedLex);
        let f = LaurentElement::monomial(1, &[6], BigRational::one());
        let red = reduce(&f, &gb, TermOrder::GradedLex);
        // t^6 = (t^3-1)^2 + 2t^3 - 1
        let expected = LaurentElement::monomial(1, &[3], BigRational::from_integer(BigInt::from(2)))
            .sub(&LaurentElement::one(1));
        assert_eq!(red.remainder, expected);
        assert!(red.verify(&f, &gb));
    }

    #[test]
    fn standard_monomials_of_unipotent_ideal() {
        let gb = buchberger(&[t_minus_one_pow(4)], TermOrder::GradedLex);
        assert_eq!(standard_monomial_count(&gb, TermOrder::GradedLex), Some(4));
        let gb5 = buchberger(&[t_pow_minus_one(5)], TermOrder::GradedLex);
        assert_eq!(standard_monomial_count(&gb5, TermOrder::GradedLex), Some(5));
        assert_eq!(standard_monomial_count(&[], TermOrder::GradedLex), None);
    }

    #[test]
    fn two_variable_elimination() {
        // <t1 - t2^2, t2^3> contains t1 t2, quotient has finite rank
        let t1 = LaurentElement::var(2, 0);
        let t2 = LaurentElement::var(2, 1);
        let gens = vec![t1.sub(&t2.pow(2)), t2.pow(3)];
        let gb = buchberger(&gens, TermOrder::GradedLex);
        let f = t1.mul(&t2);
        let red = reduce(&f, &gb, TermOrder::GradedLex);
        assert!(red.remainder.is_zero());
        assert!(red.verify(&f, &gb));
        // standard monomials: 1, t2, t2^2, t1, t1 t2... t1 = t2^2 so: 1, t2, t2^2 -> 3
        assert_eq!(standard_monomial_count(&gb, TermOrder::GradedLex), Some(3));
    }
}
