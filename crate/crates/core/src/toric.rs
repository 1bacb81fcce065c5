//! Toric data in two faces: the geometric one (a fan with rays and maximal
//! cones) and the algebraic one (a gauged linear sigma model charge matrix
//! with its auxiliary fiber coordinates and R-grades). The two are tied
//! together by the exact sequence presenting the Picard lattice as the
//! cokernel of the ray map.

use crate::lattice::{
    hermite_normal_form, kernel_basis, primitive_part, smith_normal_form, solve_linear_integer,
    IntMatrix, LatticeError,
};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ToricError {
    #[error("not Calabi-Yau: coordinate charges sum to {got}, expected {expected}")]
    NotCalabiYau { got: String, expected: String },
    #[error("rank deficient: charges span rank {got} < {expected}")]
    RankDeficient { got: usize, expected: usize },
    #[error("fan is not smooth: {0}")]
    NotSmooth(String),
    #[error("fan is not complete: {0}")]
    NotComplete(String),
    #[error("Picard group has torsion (invariant factor {0})")]
    TorsionPicard(String),
    #[error("bad shape: {0}")]
    BadShape(String),
    #[error("no base rays available: model was built from charges only")]
    NoBaseRays,
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// A fan given by its rays and maximal cones (as index sets into the rays).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FanData {
    pub lattice_rank: usize,
    pub rays: Vec<Vec<BigInt>>,
    pub max_cones: Vec<BTreeSet<usize>>,
}

impl FanData {
    pub fn new(lattice_rank: usize, rays: Vec<Vec<BigInt>>, max_cones: Vec<Vec<usize>>) -> Self {
        assert!(rays.iter().all(|r| r.len() == lattice_rank), "ray dimension mismatch");
        let max_cones: Vec<BTreeSet<usize>> = max_cones
            .into_iter()
            .map(|c| {
                let set: BTreeSet<usize> = c.into_iter().collect();
                assert!(set.iter().all(|&i| i < rays.len()), "cone indexes missing ray");
                set
            })
            .collect();
        FanData { lattice_rank, rays, max_cones }
    }

    pub fn from_i64(lattice_rank: usize, rays: &[Vec<i64>], max_cones: Vec<Vec<usize>>) -> Self {
        let rays = rays
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        FanData::new(lattice_rank, rays, max_cones)
    }

    pub fn n_rays(&self) -> usize {
        self.rays.len()
    }

    pub fn rays_primitive(&self) -> bool {
        self.rays.iter().all(|r| {
            let mut g = BigInt::zero();
            for e in r {
                g = g.gcd(e);
            }
            g.is_one()
        })
    }

    /// Every maximal cone has linearly independent generators.
    pub fn is_simplicial(&self) -> bool {
        self.max_cones.iter().all(|c| {
            let m = IntMatrix::from_rows(&c.iter().map(|&i| self.rays[i].clone()).collect::<Vec<_>>());
            m.rank() == c.len()
        })
    }

    /// Rays are primitive and every full-dimensional maximal cone is
    /// unimodular.
    pub fn is_smooth(&self) -> bool {
        if !self.rays_primitive() || !self.is_simplicial() {
            return false;
        }
        self.max_cones.iter().all(|c| {
            if c.len() != self.lattice_rank {
                // lower-dimensional cones must extend to a lattice basis
                let m = IntMatrix::from_rows(
                    &c.iter().map(|&i| self.rays[i].clone()).collect::<Vec<_>>(),
                );
                let (d, _, _) = smith_normal_form(&m);
                (0..c.len()).all(|i| d[(i, i)].is_one())
            } else {
                let m = IntMatrix::from_rows(
                    &c.iter().map(|&i| self.rays[i].clone()).collect::<Vec<_>>(),
                );
                m.determinant().abs().is_one()
            }
        })
    }

    /// Support covers the whole space. Checked by facet pairing (every facet
    /// of a maximal cone is shared with exactly one other maximal cone) plus
    /// exact cone membership for a deterministic sample of points.
    pub fn is_complete(&self) -> bool {
        if self.max_cones.is_empty() {
            return self.lattice_rank == 0;
        }
        if self.max_cones.iter().any(|c| c.len() != self.lattice_rank) {
            return false;
        }
        let mut facet_counts: std::collections::BTreeMap<Vec<usize>, usize> =
            std::collections::BTreeMap::new();
        for cone in &self.max_cones {
            for drop in cone {
                let facet: Vec<usize> = cone.iter().copied().filter(|i| i != drop).collect();
                *facet_counts.entry(facet).or_insert(0) += 1;
            }
        }
        if facet_counts.values().any(|&c| c != 2) {
            return false;
        }
        // belt and suspenders: sample points must land in some cone
        let mut samples: Vec<Vec<BigInt>> = Vec::new();
        for s in 0..self.lattice_rank {
            let mut plus = vec![BigInt::zero(); self.lattice_rank];
            plus[s] = BigInt::one();
            samples.push(plus.clone());
            plus[s] = -BigInt::one();
            samples.push(plus);
        }
        let sum: Vec<BigInt> = (0..self.lattice_rank)
            .map(|j| self.rays.iter().map(|r| &r[j]).sum())
            .collect();
        samples.push(sum.iter().map(|e| -e).collect());
        samples.push(sum);
        samples.into_iter().all(|p| {
            let q = crate::linprog::to_rational(&p);
            self.max_cones.iter().any(|c| {
                let gens: Vec<Vec<BigInt>> = c.iter().map(|&i| self.rays[i].clone()).collect();
                crate::secondary::cone_contains(&gens, &q)
            })
        })
    }

    fn contains_as_face(&self, set: &BTreeSet<usize>) -> bool {
        self.max_cones.iter().any(|c| set.is_subset(c))
    }
}

/// Square-free monomial ideal given by the supports of its generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialIdeal {
    pub num_vars: usize,
    pub generators: Vec<BTreeSet<usize>>,
}

impl MonomialIdeal {
    /// Keep only inclusion-minimal supports and sort canonically.
    pub fn from_supports(num_vars: usize, supports: Vec<BTreeSet<usize>>) -> Self {
        let mut minimal: Vec<BTreeSet<usize>> = Vec::new();
        for s in &supports {
            if supports.iter().any(|t| t.is_subset(s) && t != s) {
                continue;
            }
            if !minimal.contains(s) {
                minimal.push(s.clone());
            }
        }
        minimal.sort_by_key(|s| (s.len(), s.iter().copied().collect::<Vec<_>>()));
        MonomialIdeal { num_vars, generators: minimal }
    }

    /// 0/1 exponent vectors of the generators.
    pub fn exponent_vectors(&self) -> Vec<Vec<u32>> {
        self.generators
            .iter()
            .map(|s| (0..self.num_vars).map(|i| u32::from(s.contains(&i))).collect())
            .collect()
    }

    pub fn render(&self, names: &[String]) -> String {
        if self.generators.is_empty() {
            return "<0>".to_string();
        }
        let gens: Vec<String> = self
            .generators
            .iter()
            .map(|s| s.iter().map(|&i| names[i].as_str()).collect::<Vec<_>>().join("*"))
            .collect();
        format!("<{}>", gens.join(", "))
    }
}

/// Gauged linear sigma model data for a Calabi-Yau complete intersection:
/// `n` base coordinates with charges `w_i`, `ell` fiber coordinates with
/// charges `-d_a`, R-grades 0 on the base and 2 on the fiber.
#[derive(Debug, Clone)]
pub struct GLSMModel {
    pub n: usize,
    pub ell: usize,
    pub k: usize,
    /// (n + ell) x k charge matrix; row n + a is -d_a.
    pub charges: IntMatrix,
    pub rgrades: Vec<i64>,
    pub names: Vec<String>,
    /// Base rays when the model came from a fan.
    pub base_rays: Option<Vec<Vec<BigInt>>>,
}

impl GLSMModel {
    /// Dimension of the complete intersection, `n - k - ell`.
    pub fn dim_x(&self) -> i64 {
        self.n as i64 - self.k as i64 - self.ell as i64
    }

    pub fn n_coords(&self) -> usize {
        self.n + self.ell
    }

    pub fn charge_row(&self, i: usize) -> &[BigInt] {
        self.charges.row(i)
    }

    pub fn is_fiber_index(&self, i: usize) -> bool {
        i >= self.n
    }

    /// Degrees d_a of the defining polynomials (negated fiber charges).
    pub fn degree(&self, a: usize) -> Vec<BigInt> {
        self.charge_row(self.n + a).iter().map(|e| -e).collect()
    }

    pub fn charge_rows(&self) -> Vec<Vec<BigInt>> {
        self.charges.row_vecs()
    }
}

fn default_names(n: usize, ell: usize) -> Vec<String> {
    let mut names: Vec<String> = (1..=n).map(|i| format!("x{}", i)).collect();
    names.extend((1..=ell).map(|a| format!("p{}", a)));
    names
}

/// Build a model from coordinate charges and defining degrees, verifying the
/// Calabi-Yau balance and that the charges span the Picard lattice.
pub fn build_from_charges(
    weights: &IntMatrix,
    degrees: &IntMatrix,
    names: Option<Vec<String>>,
) -> Result<GLSMModel, ToricError> {
    let n = weights.rows();
    let ell = degrees.rows();
    let k = weights.cols();
    if k == 0 || n < k + 1 {
        return Err(ToricError::BadShape(format!(
            "need k >= 1 and n >= k + 1, got n = {}, k = {}",
            n, k
        )));
    }
    if ell > 0 && degrees.cols() != k {
        return Err(ToricError::BadShape(format!(
            "degrees have {} columns, charges have {}",
            degrees.cols(),
            k
        )));
    }
    let weight_sum: Vec<BigInt> = (0..k)
        .map(|j| (0..n).map(|i| weights[(i, j)].clone()).sum())
        .collect();
    let degree_sum: Vec<BigInt> = (0..k)
        .map(|j| (0..ell).map(|a| degrees[(a, j)].clone()).sum())
        .collect();
    if weight_sum != degree_sum {
        return Err(ToricError::NotCalabiYau {
            got: format!("{:?}", weight_sum.iter().map(|e| e.to_string()).collect::<Vec<_>>()),
            expected: format!(
                "{:?}",
                degree_sum.iter().map(|e| e.to_string()).collect::<Vec<_>>()
            ),
        });
    }
    let mut rows = weights.row_vecs();
    for a in 0..ell {
        rows.push(degrees.row(a).iter().map(|e| -e).collect());
    }
    let charges = IntMatrix::from_rows(&rows);
    let rank = charges.rank();
    if rank != k {
        return Err(ToricError::RankDeficient { got: rank, expected: k });
    }
    let names = match names {
        Some(names) => {
            if names.len() != n + ell {
                return Err(ToricError::BadShape(format!(
                    "{} names for {} coordinates",
                    names.len(),
                    n + ell
                )));
            }
            names
        }
        None => default_names(n, ell),
    };
    let mut rgrades = vec![0i64; n];
    rgrades.extend(std::iter::repeat(2).take(ell));
    Ok(GLSMModel { n, ell, k, charges, rgrades, names, base_rays: None })
}

pub fn build_from_charges_i64(
    weights: &[Vec<i64>],
    degrees: &[Vec<i64>],
    names: Option<Vec<String>>,
) -> Result<GLSMModel, ToricError> {
    let k = weights.first().map_or(0, |r| r.len());
    let w = IntMatrix::from_i64_rows(weights);
    let d = if degrees.is_empty() {
        IntMatrix::zero(0, k)
    } else {
        IntMatrix::from_i64_rows(degrees)
    };
    build_from_charges(&w, &d, names)
}

/// Build a model from a complete smooth fan: the charge matrix is a
/// presentation of the Picard lattice as the cokernel of the ray map,
/// normalized by the Hermite form so the output basis is canonical.
pub fn build_from_fan(fan: &FanData, degrees: &IntMatrix) -> Result<GLSMModel, ToricError> {
    if !fan.rays_primitive() {
        return Err(ToricError::NotSmooth("some ray is not primitive".into()));
    }
    if !fan.is_smooth() {
        return Err(ToricError::NotSmooth("some maximal cone is not unimodular".into()));
    }
    if !fan.is_complete() {
        return Err(ToricError::NotComplete("cone facets do not pair up".into()));
    }
    let n = fan.n_rays();
    let r = fan.lattice_rank;
    if n <= r {
        return Err(ToricError::BadShape(format!("{} rays cannot span rank {}", n, r)));
    }
    // ray map Z^r -> Z^n, columns are the coordinates of the rays
    let a = IntMatrix::from_rows(&fan.rays);
    let (d, u, _) = smith_normal_form(&a);
    for i in 0..r {
        if d[(i, i)].is_zero() {
            return Err(ToricError::BadShape("rays do not span the lattice".into()));
        }
        if !d[(i, i)].is_one() {
            return Err(ToricError::TorsionPicard(d[(i, i)].to_string()));
        }
    }
    let k = n - r;
    // free part of the cokernel: the last k rows of u, made canonical
    let coker = IntMatrix::from_rows(&(r..n).map(|i| u.row(i).to_vec()).collect::<Vec<_>>());
    let (h, _) = hermite_normal_form(&coker);
    let weight_rows: Vec<Vec<BigInt>> =
        (0..n).map(|i| (0..k).map(|j| h[(j, i)].clone()).collect()).collect();
    let weights = IntMatrix::from_rows(&weight_rows);
    let mut model = build_from_charges(&weights, degrees, None)?;
    model.base_rays = Some(fan.rays.clone());
    Ok(model)
}

/// For scalar charges with positive weights, a nonnegative solution of
/// `sum w_i u_i = d` found greedily; coordinates are consumed in order.
fn greedy_nonneg_solution(weights: &[BigInt], d: &BigInt) -> Option<Vec<BigInt>> {
    if weights.iter().any(|w| !w.is_positive()) || d.is_negative() {
        return None;
    }
    let mut rest = d.clone();
    let mut u = vec![BigInt::zero(); weights.len()];
    for (i, w) in weights.iter().enumerate() {
        let q = rest.div_floor(w);
        if q.is_positive() {
            u[i] = q.clone();
            rest -= q * w;
        }
    }
    if rest.is_zero() {
        Some(u)
    } else {
        None
    }
}

/// Rays of the enhanced fan: each base ray gains one fiber coordinate per
/// defining polynomial, chosen so the charges annihilate the rays, and one
/// new unit ray appears per fiber coordinate.
pub fn enhanced_rays(model: &GLSMModel) -> Result<Vec<Vec<BigInt>>, ToricError> {
    let base = base_rays(model)?;
    let r = base.first().map_or(0, |v| v.len());
    if model.ell == 0 {
        return Ok(base);
    }
    // one u-column per degree: sum_i w_i u_i^a = d_a
    let wt = IntMatrix::from_rows(
        &(0..model.n).map(|i| model.charge_row(i).to_vec()).collect::<Vec<_>>(),
    )
    .transpose();
    let mut u_cols: Vec<Vec<BigInt>> = Vec::with_capacity(model.ell);
    for a in 0..model.ell {
        let d_a = model.degree(a);
        let u = if model.k == 1 {
            let scalar_weights: Vec<BigInt> =
                (0..model.n).map(|i| model.charge_row(i)[0].clone()).collect();
            match greedy_nonneg_solution(&scalar_weights, &d_a[0]) {
                Some(u) => u,
                None => solve_linear_integer(&wt, &d_a)?,
            }
        } else {
            solve_linear_integer(&wt, &d_a)?
        };
        u_cols.push(u);
    }
    let mut rays: Vec<Vec<BigInt>> = Vec::with_capacity(model.n + model.ell);
    for (i, b) in base.iter().enumerate() {
        let mut v = b.clone();
        for u in &u_cols {
            v.push(u[i].clone());
        }
        rays.push(v);
    }
    for a in 0..model.ell {
        let mut v = vec![BigInt::zero(); r + model.ell];
        v[r + a] = BigInt::one();
        rays.push(v);
    }
    // the charge rows must annihilate the enhanced ray matrix
    debug_assert!({
        let m = IntMatrix::from_rows(&rays);
        (0..model.k).all(|j| {
            let col: Vec<BigInt> = (0..model.n_coords()).map(|i| model.charges[(i, j)].clone()).collect();
            m.transpose().mul_vec(&col).iter().all(Zero::is_zero)
        })
    });
    Ok(rays)
}

/// Base rays: the stored ones if the model came from a fan, otherwise a
/// deterministic kernel basis of the weight map.
pub fn base_rays(model: &GLSMModel) -> Result<Vec<Vec<BigInt>>, ToricError> {
    if let Some(rays) = &model.base_rays {
        return Ok(rays.clone());
    }
    let wt = IntMatrix::from_rows(
        &(0..model.n).map(|i| model.charge_row(i).to_vec()).collect::<Vec<_>>(),
    )
    .transpose();
    let basis = kernel_basis(&wt);
    let r = basis.len();
    if r != model.n - model.k {
        return Err(ToricError::BadShape(format!(
            "kernel rank {} does not match n - k = {}",
            r,
            model.n - model.k
        )));
    }
    Ok((0..model.n)
        .map(|i| (0..r).map(|j| basis[j][i].clone()).collect())
        .collect())
}

/// All minimal sets of rays spanning no cone of the fan: every proper
/// subset of a returned set generates a cone, the set itself does not.
/// The fan must be simplicial for this face test to be subset-closed.
pub fn primitive_collections(fan: &FanData) -> Vec<BTreeSet<usize>> {
    let n = fan.n_rays();
    let mut found: Vec<BTreeSet<usize>> = Vec::new();
    for size in 1..=n {
        for subset in crate::combinat::combinations(n, size) {
            let set: BTreeSet<usize> = subset.iter().copied().collect();
            let dominated = found.iter().any(|f| f.is_subset(&set));
            if !dominated && !fan.contains_as_face(&set) {
                found.push(set);
            }
        }
    }
    found.sort_by_key(|s| (s.len(), s.iter().copied().collect::<Vec<_>>()));
    found
}

/// The irrelevant ideal of the fan, computed as the Alexander dual of the
/// ideal with one generator per maximal cone (the product of the coordinates
/// outside the cone): its minimal generators are the minimal transversals of
/// the cone complements.
pub fn cox_ideal(fan: &FanData) -> MonomialIdeal {
    let n = fan.n_rays();
    let complements: Vec<BTreeSet<usize>> = fan
        .max_cones
        .iter()
        .map(|c| (0..n).filter(|i| !c.contains(i)).collect())
        .collect();
    if complements.is_empty() {
        return MonomialIdeal::from_supports(n, vec![]);
    }
    if complements.iter().any(|c| c.is_empty()) {
        // a cone uses every ray: its complement can never be hit, so the
        // only "transversal" is the empty product and the ideal is the unit
        return MonomialIdeal::from_supports(n, vec![BTreeSet::new()]);
    }
    let mut transversals: Vec<BTreeSet<usize>> = Vec::new();
    for size in 1..=n {
        for subset in crate::combinat::combinations(n, size) {
            let set: BTreeSet<usize> = subset.iter().copied().collect();
            let dominated = transversals.iter().any(|t| t.is_subset(&set));
            if !dominated && complements.iter().all(|c| !c.is_disjoint(&set)) {
                transversals.push(set);
            }
        }
    }
    MonomialIdeal::from_supports(n, transversals)
}

/// Charges of the anticanonical class: the sum of all coordinate charges.
/// Zero exactly when the model is Calabi-Yau.
pub fn total_charge(model: &GLSMModel) -> Vec<BigInt> {
    (0..model.k)
        .map(|j| (0..model.n_coords()).map(|i| model.charges[(i, j)].clone()).sum())
        .collect()
}

pub fn primitive_normal(vectors: &[Vec<BigInt>]) -> Vec<BigInt> {
    primitive_part(&vectors.concat())
}
