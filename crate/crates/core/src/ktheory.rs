//! K-theory shadows of the phase relations. Each relation projects to an
//! element of the group ring of the Picard lattice, every twist cone
//! becoming a factor t^w - 1 (homological shifts are even, so they act
//! trivially on classes). Membership questions are settled by exact
//! Groebner reduction with re-expandable certificates.

use crate::groebner::{buchberger, reduce, standard_monomial_count, Reduction};
use crate::laurent::{LaurentElement, TermOrder};
use crate::relations::{phase_relations, refined_geometric_relations, RelationDescriptor};
use crate::secondary::Phase;
use crate::toric::GLSMModel;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KtheoryError {
    #[error("relations from phases {0} and {1} cannot share an ideal")]
    MixedPhases(usize, usize),
    #[error("normal forms need a polynomial input, got negative exponents")]
    NotPolynomial,
}

/// Ideal of K-theory relations for a single phase. Generators are
/// normalized Laurent elements: honest polynomials, coprime integer
/// coefficients, positive leading coefficient.
#[derive(Debug, Clone)]
pub struct RelationIdeal {
    pub phase_id: usize,
    pub k: usize,
    pub generators: Vec<LaurentElement>,
    pub order: TermOrder,
}

/// The K-theory image of a relation: the product over its factors of
/// `(-1)^r t^w - 1`, normalized. R-grades are even, so every factor is
/// `t^w - 1`.
pub fn relation_to_ktheory(r: &RelationDescriptor, k: usize) -> LaurentElement {
    let one = LaurentElement::one(k);
    let mut out = one.clone();
    for f in &r.factors {
        let exps: Vec<i64> = f
            .degree
            .iter()
            .map(|e| i64::try_from(e).expect("charges stay desk scale"))
            .collect();
        let sign = if f.rgrade.rem_euclid(2) == 0 { 1i64 } else { -1i64 };
        let factor = LaurentElement::monomial(
            k,
            &exps,
            BigRational::from_integer(sign.into()),
        )
        .sub(&one);
        out = out.mul(&factor);
    }
    out.normalize()
}

impl RelationIdeal {
    /// Collect the K-theory images of a phase's relations. All relations
    /// must belong to the same phase; ideals are never merged across
    /// phases.
    pub fn new(
        relations: &[RelationDescriptor],
        k: usize,
        order: TermOrder,
    ) -> Result<Self, KtheoryError> {
        let phase_id = relations.first().map(|r| r.phase_id).unwrap_or(0);
        for r in relations {
            if r.phase_id != phase_id {
                return Err(KtheoryError::MixedPhases(phase_id, r.phase_id));
            }
        }
        let mut generators: Vec<LaurentElement> = Vec::new();
        for r in relations {
            let g = relation_to_ktheory(r, k);
            debug_assert!(g.augmentation().is_zero(), "generators vanish at t = 1");
            if !g.is_zero() && !generators.contains(&g) {
                generators.push(g);
            }
        }
        Ok(RelationIdeal { phase_id, k, generators, order })
    }

    pub fn from_elements(
        phase_id: usize,
        elements: &[LaurentElement],
        k: usize,
        order: TermOrder,
    ) -> Self {
        let mut generators = Vec::new();
        for e in elements {
            let g = e.normalize();
            if !g.is_zero() && !generators.contains(&g) {
                generators.push(g);
            }
        }
        RelationIdeal { phase_id, k, generators, order }
    }

    /// Working polynomial ring. In rank one the normalized generators are
    /// already saturated with respect to t; beyond rank one a variable s
    /// with t_1 ... t_k s = 1 localizes away the coordinate monomials.
    pub fn groebner(&self) -> GroebnerContext {
        let saturate = self.k >= 2 && !self.generators.is_empty();
        let nvars = if saturate { self.k + 1 } else { self.k };
        let mut gens: Vec<LaurentElement> = self
            .generators
            .iter()
            .map(|g| if saturate { g.extend_vars(1) } else { g.clone() })
            .collect();
        if saturate {
            let mut exps = vec![1i64; self.k];
            exps.push(1);
            let unit = LaurentElement::monomial(nvars, &exps, BigRational::one())
                .sub(&LaurentElement::one(nvars));
            gens.push(unit);
        }
        GroebnerContext {
            k: self.k,
            saturated: saturate,
            order: self.order,
            basis: buchberger(&gens, self.order),
        }
    }
}

/// A reduced Groebner basis in the working ring, remembering whether a
/// saturation variable was appended.
#[derive(Debug, Clone)]
pub struct GroebnerContext {
    pub k: usize,
    pub saturated: bool,
    pub order: TermOrder,
    pub basis: Vec<LaurentElement>,
}

impl GroebnerContext {
    fn embed(&self, f: &LaurentElement) -> LaurentElement {
        if self.saturated {
            f.extend_vars(1)
        } else {
            f.clone()
        }
    }
}

/// Positive membership comes with the division data; `certificate.verify`
/// re-expands it against the stored basis, exactly.
#[derive(Debug, Clone)]
pub struct MembershipCertificate {
    pub element: LaurentElement,
    pub basis: Vec<LaurentElement>,
    pub cofactors: Vec<LaurentElement>,
}

impl MembershipCertificate {
    pub fn verify(&self) -> bool {
        let red = Reduction {
            cofactors: self.cofactors.clone(),
            remainder: LaurentElement::zero(
                self.basis.first().map_or(self.element.nvars(), |b| b.nvars()),
            ),
        };
        red.verify(&self.element, &self.basis)
    }
}

/// Is `f` in the ideal (as an ideal of the Laurent ring)? Monomial units do
/// not change membership, so `f` is normalized before reduction.
pub fn ideal_member(f: &LaurentElement, ideal: &RelationIdeal) -> (bool, Option<MembershipCertificate>) {
    if f.is_zero() {
        return (true, Some(MembershipCertificate {
            element: LaurentElement::zero(ideal.k),
            basis: vec![],
            cofactors: vec![],
        }));
    }
    let ctx = ideal.groebner();
    if ctx.basis.is_empty() {
        return (false, None);
    }
    let fe = ctx.embed(&f.normalize());
    let red = reduce(&fe, &ctx.basis, ctx.order);
    if red.remainder.is_zero() {
        let cert = MembershipCertificate {
            element: fe,
            basis: ctx.basis.clone(),
            cofactors: red.cofactors,
        };
        debug_assert!(cert.verify());
        (true, Some(cert))
    } else {
        (false, None)
    }
}

/// Normal form of a polynomial modulo the ideal's reduced Groebner basis.
pub fn normal_form(f: &LaurentElement, ideal: &RelationIdeal) -> Result<LaurentElement, KtheoryError> {
    if f.has_negative_exponent() {
        return Err(KtheoryError::NotPolynomial);
    }
    let ctx = ideal.groebner();
    if ctx.basis.is_empty() {
        return Ok(ctx.embed(f));
    }
    let fe = ctx.embed(f);
    Ok(reduce(&fe, &ctx.basis, ctx.order).remainder)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuotientRank {
    Finite(usize),
    Infinite,
}

/// Dimension of the quotient ring as a rational vector space, via standard
/// monomials under the Groebner basis.
pub fn quotient_rank(ideal: &RelationIdeal) -> QuotientRank {
    let ctx = ideal.groebner();
    match standard_monomial_count(&ctx.basis, ctx.order) {
        Some(n) => QuotientRank::Finite(n),
        None => QuotientRank::Infinite,
    }
}

/// For each Picard generator e_j, whether `(t^{e_j} - 1)^bound` lies in the
/// phase ideal. The geometric phase uses its refined relations, any other
/// phase its plain ones.
pub fn unipotence_check(model: &GLSMModel, phase: &Phase, bound: u32) -> Vec<bool> {
    let relations = refined_geometric_relations(model, phase)
        .unwrap_or_else(|_| phase_relations(model, phase));
    let ideal = RelationIdeal::new(&relations, model.k, TermOrder::GradedLex)
        .expect("relations of a single phase");
    (0..model.k)
        .map(|j| {
            let f = LaurentElement::var(model.k, j)
                .sub(&LaurentElement::one(model.k))
                .pow(bound);
            ideal_member(&f, &ideal).0
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::secondary::enumerate_phases;
    use crate::toric::build_from_charges_i64;

    fn t_pow_minus_one(n: i64) -> LaurentElement {
        LaurentElement::monomial(1, &[n], BigRational::one()).sub(&LaurentElement::one(1))
    }

    fn t_minus_one_pow(n: u32) -> LaurentElement {
        t_pow_minus_one(1).pow(n)
    }

    fn model_phases(weights: &[Vec<i64>], degrees: &[Vec<i64>]) -> (GLSMModel, Vec<Phase>) {
        let m = build_from_charges_i64(weights, degrees, None).unwrap();
        let phases = enumerate_phases(&m).unwrap();
        (m, phases)
    }

    #[test]
    fn quintic_geometric_projects_to_fifth_power() {
        let (m, phases) = model_phases(&vec![vec![1]; 5], &[vec![5]]);
        let rels = phase_relations(&m, &phases[0]);
        let g = relation_to_ktheory(&rels[0], 1);
        assert_eq!(g, t_minus_one_pow(5).normalize());
    }

    #[test]
    fn quintic_lg_projects_to_root_of_unity_relation() {
        let (m, phases) = model_phases(&vec![vec![1]; 5], &[vec![5]]);
        let rels = phase_relations(&m, &phases[1]);
        let g = relation_to_ktheory(&rels[0], 1);
        assert_eq!(g, t_pow_minus_one(5));
    }

    #[test]
    fn x33_lg_relation() {
        let (m, phases) = model_phases(&vec![vec![1]; 6], &[vec![3], vec![3]]);
        let rels = phase_relations(&m, &phases[1]);
        let ideal = RelationIdeal::new(&rels, 1, TermOrder::GradedLex).unwrap();
        assert_eq!(ideal.generators, vec![t_pow_minus_one(3).pow(2).normalize()]);
    }

    #[test]
    fn x10_refined_membership_with_certificate() {
        let (m, phases) = model_phases(&[vec![1], vec![1], vec![1], vec![2], vec![5]], &[vec![10]]);
        let rels = refined_geometric_relations(&m, &phases[0]).unwrap();
        let ideal = RelationIdeal::new(&rels, 1, TermOrder::GradedLex).unwrap();
        let (member, cert) = ideal_member(&t_minus_one_pow(4), &ideal);
        assert!(member);
        assert!(cert.unwrap().verify());
        let (member3, cert3) = ideal_member(&t_minus_one_pow(3), &ideal);
        assert!(!member3);
        assert!(cert3.is_none());
    }

    #[test]
    fn zero_is_always_a_member() {
        let ideal = RelationIdeal::from_elements(0, &[], 1, TermOrder::GradedLex);
        let (member, _) = ideal_member(&LaurentElement::zero(1), &ideal);
        assert!(member);
    }

    #[test]
    fn quotient_ranks() {
        let i4 = RelationIdeal::from_elements(0, &[t_minus_one_pow(4)], 1, TermOrder::GradedLex);
        assert_eq!(quotient_rank(&i4), QuotientRank::Finite(4));
        let i5 = RelationIdeal::from_elements(0, &[t_pow_minus_one(5)], 1, TermOrder::GradedLex);
        assert_eq!(quotient_rank(&i5), QuotientRank::Finite(5));
        let empty = RelationIdeal::from_elements(0, &[], 1, TermOrder::GradedLex);
        assert_eq!(quotient_rank(&empty), QuotientRank::Infinite);
    }

    #[test]
    fn x33_triangle_shadow() {
        let (m, phases) = model_phases(&vec![vec![1]; 6], &[vec![3], vec![3]]);
        let rels = phase_relations(&m, &phases[1]);
        let ideal = RelationIdeal::new(&rels, 1, TermOrder::GradedLex).unwrap();
        let t6 = LaurentElement::monomial(1, &[6], BigRational::one());
        let nf = normal_form(&t6, &ideal).unwrap();
        let expected = LaurentElement::monomial(
            1,
            &[3],
            BigRational::from_integer(2.into()),
        )
        .sub(&LaurentElement::one(1));
        assert_eq!(nf, expected);
    }

    #[test]
    fn quintic_unipotence_bounds() {
        let (m, phases) = model_phases(&vec![vec![1]; 5], &[vec![5]]);
        assert_eq!(unipotence_check(&m, &phases[0], 4), vec![true]);
        assert_eq!(unipotence_check(&m, &phases[0], 3), vec![false]);
        // the LG ideal has roots away from 1, so no power of t - 1 enters
        for bound in 1..=6 {
            assert_eq!(unipotence_check(&m, &phases[1], bound), vec![false]);
        }
    }

    #[test]
    fn mixed_phases_rejected() {
        let (m, phases) = model_phases(&vec![vec![1]; 5], &[vec![5]]);
        let mut rels = phase_relations(&m, &phases[0]);
        rels.extend(phase_relations(&m, &phases[1]));
        let err = RelationIdeal::new(&rels, 1, TermOrder::GradedLex).unwrap_err();
        assert!(matches!(err, KtheoryError::MixedPhases(0, 1)));
    }

    #[test]
    fn saturated_membership_in_rank_two() {
        // ideal <t1 - 1, t2 - 1> in the Laurent ring: t1^-1 - 1 is a member
        let gens = vec![t2_minus_one(0), t2_minus_one(1)];
        let ideal = RelationIdeal::from_elements(0, &gens, 2, TermOrder::GradedLex);
        let inv = LaurentElement::monomial(2, &[-1, 0], BigRational::one())
            .sub(&LaurentElement::one(2));
        let (member, cert) = ideal_member(&inv, &ideal);
        assert!(member);
        assert!(cert.unwrap().verify());
    }

    fn t2_minus_one(j: usize) -> LaurentElement {
        LaurentElement::var(2, j).sub(&LaurentElement::one(2))
    }
}
