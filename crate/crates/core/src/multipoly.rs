//! Polynomials in the homogeneous coordinates (base and fiber) with exact
//! rational coefficients, graded by the Picard charges and the even R-grade.

use crate::toric::GLSMModel;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// Per-coordinate degree data: Picard charge vector and R-grade. Models
/// provide one; toys may declare their own.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoordGrading {
    pub k: usize,
    pub charges: Vec<Vec<i64>>,
    pub rgrades: Vec<i64>,
    pub names: Vec<String>,
}

impl CoordGrading {
    pub fn from_model(model: &GLSMModel) -> Self {
        let charges = model
            .charge_rows()
            .iter()
            .map(|row| row.iter().map(|e| i64::try_from(e).expect("desk-scale charge")).collect())
            .collect();
        CoordGrading {
            k: model.k,
            charges,
            rgrades: model.rgrades.clone(),
            names: model.names.clone(),
        }
    }

    pub fn n_coords(&self) -> usize {
        self.charges.len()
    }

    pub fn degree_of_monomial(&self, exps: &[u32]) -> (Vec<i64>, i64) {
        let mut q = vec![0i64; self.k];
        let mut r = 0i64;
        for (i, &e) in exps.iter().enumerate() {
            if e == 0 {
                continue;
            }
            for (qj, cj) in q.iter_mut().zip(&self.charges[i]) {
                *qj += cj * e as i64;
            }
            r += self.rgrades[i] * e as i64;
        }
        (q, r)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Homogeneity {
    Zero,
    Homogeneous(Vec<i64>, i64),
    Inhomogeneous,
}

/// Multivariate polynomial over the coordinates of a model. Zero
/// coefficients are never stored.
#[derive(Clone, PartialEq, Eq)]
pub struct MultiPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, BigRational>,
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn one(nvars: usize) -> Self {
        MultiPoly::constant(nvars, BigRational::one())
    }

    pub fn constant(nvars: usize, c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(vec![0; nvars], c);
        }
        MultiPoly { nvars, terms }
    }

    pub fn from_int(nvars: usize, c: i64) -> Self {
        MultiPoly::constant(nvars, BigRational::from_integer(BigInt::from(c)))
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut exps = vec![0u32; nvars];
        exps[i] = 1;
        MultiPoly::monomial(nvars, &exps, BigRational::one())
    }

    pub fn monomial(nvars: usize, exps: &[u32], coeff: BigRational) -> Self {
        assert_eq!(exps.len(), nvars);
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(exps.to_vec(), coeff);
        }
        MultiPoly { nvars, terms }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &BigRational)> {
        self.terms.iter()
    }

    fn insert(&mut self, exps: Vec<u32>, coeff: BigRational) {
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
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = MultiPoly::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let exps: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.insert(exps, ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return MultiPoly::zero(self.nvars);
        }
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, k)| (e.clone(), k * c)).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = MultiPoly::one(self.nvars);
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Degree and R-grade when homogeneous, checked term by term.
    pub fn homogeneity(&self, grading: &CoordGrading) -> Homogeneity {
        let mut found: Option<(Vec<i64>, i64)> = None;
        for exps in self.terms.keys() {
            let deg = grading.degree_of_monomial(exps);
            match &found {
                None => found = Some(deg),
                Some(d) if *d == deg => {}
                Some(_) => return Homogeneity::Inhomogeneous,
            }
        }
        match found {
            None => Homogeneity::Zero,
            Some((q, r)) => Homogeneity::Homogeneous(q, r),
        }
    }

    pub fn render(&self, names: &[String]) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut keys: Vec<&Vec<u32>> = self.terms.keys().collect();
        keys.sort_by(|a, b| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            db.cmp(&da).then_with(|| b.cmp(a))
        });
        let mut out = String::new();
        for (idx, e) in keys.iter().enumerate() {
            let c = &self.terms[*e];
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &x)| x > 0)
                .map(|(i, &x)| {
                    if x == 1 {
                        names[i].clone()
                    } else {
                        format!("{}^{}", names[i], x)
                    }
                })
                .collect();
            let mono = mono.join("*");
            let abs = c.abs();
            let coeff = if abs.is_one() && !mono.is_empty() {
                String::new()
            } else if abs.is_integer() {
                abs.numer().to_string()
            } else {
                format!("{}/{}", abs.numer(), abs.denom())
            };
            let body = match (coeff.is_empty(), mono.is_empty()) {
                (true, false) => mono,
                (false, true) => coeff,
                (false, false) => format!("{}*{}", coeff, mono),
                (true, true) => "1".to_string(),
            };
            if idx == 0 {
                if c.is_negative() {
                    out.push('-');
                }
                out.push_str(&body);
            } else if c.is_negative() {
                out.push_str(&format!(" - {}", body));
            } else {
                out.push_str(&format!(" + {}", body));
            }
        }
        out
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..self.nvars).map(|i| format!("v{}", i)).collect();
        write!(f, "{}", self.render(&names))
    }
}

/// All exponent patterns over the listed coordinates whose weighted degree
/// equals the target. Weights must be positive so the search terminates.
pub fn monomials_of_degree(
    nvars: usize,
    coords: &[(usize, i64)],
    target: i64,
) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    if target < 0 {
        return out;
    }
    let mut exps = vec![0u32; nvars];
    fn rec(
        coords: &[(usize, i64)],
        pos: usize,
        remaining: i64,
        exps: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
    ) {
        if pos == coords.len() {
            if remaining == 0 {
                out.push(exps.clone());
            }
            return;
        }
        let (var, w) = coords[pos];
        debug_assert!(w > 0, "monomial enumeration needs positive weights");
        let max = remaining / w;
        for e in 0..=max {
            exps[var] = e as u32;
            rec(coords, pos + 1, remaining - e * w, exps, out);
        }
        exps[var] = 0;
    }
    rec(coords, 0, target, &mut exps, &mut out);
    out
}
