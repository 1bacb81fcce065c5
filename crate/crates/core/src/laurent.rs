//! Elements of the rational group ring of the Picard lattice: Laurent
//! polynomials in k variables with exact rational coefficients. The
//! normalized form clears monomial units and rational content, which makes
//! equality up to units a plain structural comparison.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// Monomial orders on exponent vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TermOrder {
    /// Total degree first, then lexicographic. The default.
    #[default]
    GradedLex,
    Lex,
}

impl TermOrder {
    pub fn cmp(self, a: &[i64], b: &[i64]) -> std::cmp::Ordering {
        match self {
            TermOrder::GradedLex => {
                let da: i64 = a.iter().sum();
                let db: i64 = b.iter().sum();
                da.cmp(&db).then_with(|| a.cmp(b))
            }
            TermOrder::Lex => a.cmp(b),
        }
    }
}

/// Laurent polynomial with exact rational coefficients. Zero coefficients
/// are never stored.
#[derive(Clone, PartialEq, Eq)]
pub struct LaurentElement {
    nvars: usize,
    terms: BTreeMap<Vec<i64>, BigRational>,
}

impl LaurentElement {
    pub fn zero(nvars: usize) -> Self {
        LaurentElement { nvars, terms: BTreeMap::new() }
    }

    pub fn one(nvars: usize) -> Self {
        LaurentElement::monomial(nvars, &vec![0; nvars], BigRational::one())
    }

    pub fn monomial(nvars: usize, exps: &[i64], coeff: BigRational) -> Self {
        assert_eq!(exps.len(), nvars);
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(exps.to_vec(), coeff);
        }
        LaurentElement { nvars, terms }
    }

    /// The variable t_i.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut exps = vec![0i64; nvars];
        exps[i] = 1;
        LaurentElement::monomial(nvars, &exps, BigRational::one())
    }

    pub fn constant(nvars: usize, c: BigRational) -> Self {
        LaurentElement::monomial(nvars, &vec![0; nvars], c)
    }

    pub fn from_int(nvars: usize, c: i64) -> Self {
        LaurentElement::constant(nvars, BigRational::from_integer(BigInt::from(c)))
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    fn insert(&mut self, exps: Vec<i64>, coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        LaurentElement {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = LaurentElement::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let exps: Vec<i64> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.insert(exps, ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return LaurentElement::zero(self.nvars);
        }
        LaurentElement {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, k)| (e.clone(), k * c)).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = LaurentElement::one(self.nvars);
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Value at t = (1, ..., 1): the sum of the coefficients.
    pub fn augmentation(&self) -> BigRational {
        self.terms.values().sum()
    }

    pub fn leading_term(&self, order: TermOrder) -> Option<(&Vec<i64>, &BigRational)> {
        self.terms.iter().max_by(|(a, _), (b, _)| order.cmp(a, b))
    }

    pub fn min_exponents(&self) -> Option<Vec<i64>> {
        if self.terms.is_empty() {
            return None;
        }
        let mut mins = vec![i64::MAX; self.nvars];
        for e in self.terms.keys() {
            for (m, &x) in mins.iter_mut().zip(e) {
                *m = (*m).min(x);
            }
        }
        Some(mins)
    }

    pub fn has_negative_exponent(&self) -> bool {
        self.terms.keys().any(|e| e.iter().any(|&x| x < 0))
    }

    /// Scale so the coefficients are coprime integers and the graded-lex
    /// leading coefficient is positive. Exponents are untouched.
    pub fn primitive_integer_scale(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut den_lcm = BigInt::one();
        for c in self.terms.values() {
            den_lcm = den_lcm.lcm(c.denom());
        }
        let mut num_gcd = BigInt::zero();
        for c in self.terms.values() {
            let scaled = c.numer() * (&den_lcm / c.denom());
            num_gcd = num_gcd.gcd(&scaled);
        }
        let factor = BigRational::new(den_lcm, num_gcd);
        let mut out = self.scale(&factor);
        if let Some((_, c)) = out.leading_term(TermOrder::GradedLex) {
            if c.is_negative() {
                out = out.neg();
            }
        }
        out
    }

    /// Canonical form up to monomial units: shift every variable so its
    /// minimal exponent is zero, then scale so the coefficients are coprime
    /// integers and the leading coefficient (graded-lex) is positive.
    pub fn normalize(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mins = self.min_exponents().unwrap();
        let mut shifted = LaurentElement::zero(self.nvars);
        for (e, c) in &self.terms {
            let exps: Vec<i64> = e.iter().zip(&mins).map(|(a, m)| a - m).collect();
            shifted.terms.insert(exps, c.clone());
        }
        shifted.primitive_integer_scale()
    }

    /// Restrict to nonnegative exponents, panicking otherwise. Used where a
    /// Laurent element must already be an honest polynomial.
    pub fn expect_polynomial(&self) -> &Self {
        assert!(!self.has_negative_exponent(), "expected a polynomial, found negative exponents");
        self
    }

    /// Append fresh variables (exponent zero) at the end.
    pub fn extend_vars(&self, extra: usize) -> Self {
        let nvars = self.nvars + extra;
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| {
                let mut exps = e.clone();
                exps.extend(std::iter::repeat(0).take(extra));
                (exps, c.clone())
            })
            .collect();
        LaurentElement { nvars, terms }
    }
}

fn format_monomial(exps: &[i64], nvars: usize) -> String {
    let mut parts = Vec::new();
    for (i, &e) in exps.iter().enumerate() {
        if e == 0 {
            continue;
        }
        let name = if nvars == 1 { "t".to_string() } else { format!("t{}", i + 1) };
        if e == 1 {
            parts.push(name);
        } else {
            parts.push(format!("{}^{}", name, e));
        }
    }
    parts.join("*")
}

impl fmt::Display for LaurentElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        // descending graded-lex reads naturally
        let mut keys: Vec<&Vec<i64>> = self.terms.keys().collect();
        keys.sort_by(|a, b| TermOrder::GradedLex.cmp(b, a));
        let mut first = true;
        for e in keys {
            let c = &self.terms[e];
            let mono = format_monomial(e, self.nvars);
            let abs = c.abs();
            let coeff_str = if abs.is_one() && !mono.is_empty() {
                String::new()
            } else if abs.is_integer() {
                abs.numer().to_string()
            } else {
                format!("{}/{}", abs.numer(), abs.denom())
            };
            let body = match (coeff_str.is_empty(), mono.is_empty()) {
                (true, false) => mono,
                (false, true) => coeff_str,
                (false, false) => format!("{}{}", coeff_str, mono),
                (true, true) => "1".to_string(),
            };
            if first {
                if c.is_negative() {
                    write!(f, "-{}", body)?;
                } else {
                    write!(f, "{}", body)?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - {}", body)?;
            } else {
                write!(f, " + {}", body)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for LaurentElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t_pow(e: i64) -> LaurentElement {
        LaurentElement::monomial(1, &[e], BigRational::one())
    }

    #[test]
    fn arithmetic_cancels_exactly() {
        let f = t_pow(2).sub(&LaurentElement::one(1));
        let g = f.sub(&f.clone());
        assert!(g.is_zero());
    }

    #[test]
    fn normalization_clears_units_and_content() {
        // -2 t^-5 + 2  ->  t^5 - 1
        let f = t_pow(-5).scale(&BigRational::from_integer(BigInt::from(-2)))
            .add(&LaurentElement::from_int(1, 2));
        let n = f.normalize();
        let expected = t_pow(5).sub(&LaurentElement::one(1));
        assert_eq!(n, expected);
    }

    #[test]
    fn augmentation_of_relation_factor() {
        let f = t_pow(3).sub(&LaurentElement::one(1));
        assert!(f.augmentation().is_zero());
    }

    #[test]
    fn display_reads_descending() {
        let f = t_pow(6)
            .sub(&t_pow(3).scale(&BigRational::from_integer(BigInt::from(2))))
            .add(&LaurentElement::one(1));
        assert_eq!(f.to_string(), "t^6 - 2t^3 + 1");
    }

    #[test]
    fn graded_lex_leading_term() {
        let two_vars = LaurentElement::monomial(2, &[1, 1], BigRational::one())
            .add(&LaurentElement::monomial(2, &[2, 0], BigRational::one()));
        let (lead, _) = two_vars.leading_term(TermOrder::GradedLex).unwrap();
        assert_eq!(lead, &vec![2, 0]);
    }
}
