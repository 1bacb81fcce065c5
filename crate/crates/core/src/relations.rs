//! Autoequivalence relations attached to a phase. Every minimal exceptional
//! set of the phase yields one relation: a vanishing composite of twist
//! cones when the set has two or more elements, and a single-ray
//! equivalence identifying a twist with a shift when the set is a
//! singleton. In the geometric phase a finer family is available, one
//! relation per regular subsequence of each primitive collection.

use crate::secondary::Phase;
use crate::toric::GLSMModel;
use num_bigint::BigInt;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RelationError {
    #[error("phase {0} is not the geometric phase")]
    NotGeometricPhase(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelationKind {
    /// The ordered composite of twist cones over the factors vanishes.
    CompositeVanishing,
    /// A single twist is isomorphic to a homological shift.
    RayEquivalence,
}

/// One factor of a relation: a coordinate with its charge and R-grade.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationFactor {
    pub index: usize,
    pub name: String,
    pub degree: Vec<BigInt>,
    pub rgrade: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    MinimalExceptionalSet(BTreeSet<usize>),
    RefinedRegularSequence {
        collection: BTreeSet<usize>,
        subset: BTreeSet<usize>,
        multiplicity: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationDescriptor {
    pub phase_id: usize,
    pub kind: RelationKind,
    pub factors: Vec<RelationFactor>,
    pub provenance: Provenance,
    /// Refined relations assume the defining sections are generic.
    pub genericity_assumed: bool,
}

fn factor(model: &GLSMModel, i: usize) -> RelationFactor {
    RelationFactor {
        index: i,
        name: model.names[i].clone(),
        degree: model.charge_row(i).to_vec(),
        rgrade: model.rgrades[i],
    }
}

/// One relation per minimal exceptional set of the phase, in deterministic
/// order: composites for sets of size two or more, ray equivalences for
/// singletons.
pub fn phase_relations(model: &GLSMModel, phase: &Phase) -> Vec<RelationDescriptor> {
    phase
        .minimal_exceptional_sets
        .iter()
        .map(|set| {
            let factors: Vec<RelationFactor> = set.iter().map(|&i| factor(model, i)).collect();
            let kind = if factors.len() >= 2 {
                RelationKind::CompositeVanishing
            } else {
                RelationKind::RayEquivalence
            };
            RelationDescriptor {
                phase_id: phase.id,
                kind,
                factors,
                provenance: Provenance::MinimalExceptionalSet(set.clone()),
                genericity_assumed: false,
            }
        })
        .collect()
}

/// The refined relations of the geometric phase: for generic sections,
/// every subset of a primitive collection with dim X + 1 elements is a
/// regular sequence on the complete intersection, so its twist composite
/// already vanishes. Subsets are deduplicated by degree multiset, with the
/// multiplicity recorded.
pub fn refined_geometric_relations(
    model: &GLSMModel,
    phase: &Phase,
) -> Result<Vec<RelationDescriptor>, RelationError> {
    let geometric = phase
        .minimal_exceptional_sets
        .iter()
        .all(|s| s.iter().all(|&i| !model.is_fiber_index(i)));
    if !geometric {
        return Err(RelationError::NotGeometricPhase(phase.id));
    }
    let target = model.dim_x() + 1;
    let target = usize::try_from(target.max(1)).expect("complete intersections have dim >= 0");
    let mut out = Vec::new();
    for collection in &phase.minimal_exceptional_sets {
        let members: Vec<usize> = collection.iter().copied().collect();
        if members.len() <= target {
            let factors: Vec<RelationFactor> = members.iter().map(|&i| factor(model, i)).collect();
            out.push(RelationDescriptor {
                phase_id: phase.id,
                kind: if factors.len() >= 2 {
                    RelationKind::CompositeVanishing
                } else {
                    RelationKind::RayEquivalence
                },
                factors,
                provenance: Provenance::RefinedRegularSequence {
                    collection: collection.clone(),
                    subset: collection.clone(),
                    multiplicity: 1,
                },
                genericity_assumed: true,
            });
            continue;
        }
        // all target-size subsets, deduplicated by degree multiset
        let mut by_multiset: BTreeMap<Vec<Vec<BigInt>>, (BTreeSet<usize>, usize)> = BTreeMap::new();
        for subset in crate::combinat::combinations(members.len(), target) {
            let chosen: BTreeSet<usize> = subset.iter().map(|&i| members[i]).collect();
            let mut multiset: Vec<Vec<BigInt>> =
                chosen.iter().map(|&i| model.charge_row(i).to_vec()).collect();
            multiset.sort();
            by_multiset
                .entry(multiset)
                .and_modify(|(_, count)| *count += 1)
                .or_insert((chosen, 1));
        }
        for (_, (chosen, multiplicity)) in by_multiset {
            let factors: Vec<RelationFactor> = chosen.iter().map(|&i| factor(model, i)).collect();
            out.push(RelationDescriptor {
                phase_id: phase.id,
                kind: RelationKind::CompositeVanishing,
                factors,
                provenance: Provenance::RefinedRegularSequence {
                    collection: collection.clone(),
                    subset: chosen,
                    multiplicity,
                },
                genericity_assumed: true,
            });
        }
    }
    Ok(out)
}

fn exponent_string(v: &[BigInt]) -> String {
    let body = if v.len() == 1 {
        v[0].to_string()
    } else {
        format!(
            "({})",
            v.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(",")
        )
    };
    if body.len() == 1 {
        body
    } else {
        format!("{{{}}}", body)
    }
}

/// Human-readable form of a relation. Ray equivalences print the twist
/// identity in both orientations; composites list the cone factors.
pub fn render_relation(r: &RelationDescriptor) -> String {
    match r.kind {
        RelationKind::RayEquivalence => {
            let f = &r.factors[0];
            let w = exponent_string(&f.degree);
            let neg: Vec<BigInt> = f.degree.iter().map(|e| -e).collect();
            let wneg = exponent_string(&neg);
            format!(
                "M^{} ≅ [{}]  (equivalently M^{} ≅ [{}])",
                w,
                -f.rgrade,
                wneg,
                f.rgrade
            )
        }
        RelationKind::CompositeVanishing => {
            let cones: Vec<String> = r.factors.iter().map(|f| format!("N({})", f.name)).collect();
            let degrees: Vec<String> =
                r.factors.iter().map(|f| exponent_string(&f.degree)).collect();
            format!("{} ≅ 0  (degrees {})", cones.join(" ∘ "), degrees.join(","))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::secondary::enumerate_phases;
    use crate::toric::build_from_charges_i64;

    fn quintic_phases() -> (GLSMModel, Vec<Phase>) {
        let m = build_from_charges_i64(&vec![vec![1]; 5], &[vec![5]], None).unwrap();
        let phases = enumerate_phases(&m).unwrap();
        (m, phases)
    }

    #[test]
    fn quintic_geometric_relation() {
        let (m, phases) = quintic_phases();
        let rels = phase_relations(&m, &phases[0]);
        assert_eq!(rels.len(), 1);
        assert_eq!(rels[0].kind, RelationKind::CompositeVanishing);
        assert_eq!(rels[0].factors.len(), 5);
        for f in &rels[0].factors {
            assert_eq!(f.degree, vec![BigInt::from(1)]);
            assert_eq!(f.rgrade, 0);
        }
    }

    #[test]
    fn quintic_lg_relation_renders_kontsevich_identity() {
        let (m, phases) = quintic_phases();
        let rels = phase_relations(&m, &phases[1]);
        assert_eq!(rels.len(), 1);
        assert_eq!(rels[0].kind, RelationKind::RayEquivalence);
        let text = render_relation(&rels[0]);
        assert_eq!(text, "M^{-5} ≅ [-2]  (equivalently M^5 ≅ [2])");
        assert!(text.contains("M^5 ≅ [2]"));
    }

    #[test]
    fn x24_lg_relation_factors() {
        let m = build_from_charges_i64(&vec![vec![1]; 6], &[vec![2], vec![4]], None).unwrap();
        let phases = enumerate_phases(&m).unwrap();
        let rels = phase_relations(&m, &phases[1]);
        assert_eq!(rels.len(), 1);
        assert_eq!(rels[0].kind, RelationKind::CompositeVanishing);
        let charges: Vec<i64> = rels[0]
            .factors
            .iter()
            .map(|f| i64::try_from(&f.degree[0]).unwrap())
            .collect();
        assert_eq!(charges, vec![-2, -4]);
        assert!(rels[0].factors.iter().all(|f| f.rgrade == 2));
    }

    #[test]
    fn x10_refined_multisets() {
        let m = build_from_charges_i64(
            &[vec![1], vec![1], vec![1], vec![2], vec![5]],
            &[vec![10]],
            None,
        )
        .unwrap();
        let phases = enumerate_phases(&m).unwrap();
        let rels = refined_geometric_relations(&m, &phases[0]).unwrap();
        assert_eq!(rels.len(), 3);
        let mut multisets: Vec<Vec<i64>> = rels
            .iter()
            .map(|r| {
                r.factors.iter().map(|f| i64::try_from(&f.degree[0]).unwrap()).collect::<Vec<_>>()
            })
            .collect();
        multisets.iter_mut().for_each(|m| m.sort());
        multisets.sort();
        assert_eq!(multisets, vec![vec![1, 1, 1, 2], vec![1, 1, 1, 5], vec![1, 1, 2, 5]]);
        assert!(rels.iter().all(|r| r.genericity_assumed));
    }

    #[test]
    fn quintic_refined_single_multiset() {
        let (m, phases) = quintic_phases();
        let rels = refined_geometric_relations(&m, &phases[0]).unwrap();
        assert_eq!(rels.len(), 1);
        assert_eq!(rels[0].factors.len(), 4);
        match &rels[0].provenance {
            Provenance::RefinedRegularSequence { multiplicity, .. } => assert_eq!(*multiplicity, 5),
            _ => panic!("expected refined provenance"),
        }
    }

    #[test]
    fn x2222_refined_single_multiset() {
        let m = build_from_charges_i64(&vec![vec![1]; 8], &vec![vec![2]; 4], None).unwrap();
        let phases = enumerate_phases(&m).unwrap();
        let rels = refined_geometric_relations(&m, &phases[0]).unwrap();
        assert_eq!(rels.len(), 1);
        assert_eq!(rels[0].factors.len(), 4);
    }

    #[test]
    fn refined_rejects_lg_phase() {
        let (m, phases) = quintic_phases();
        let err = refined_geometric_relations(&m, &phases[1]).unwrap_err();
        assert_eq!(err, RelationError::NotGeometricPhase(1));
    }

    #[test]
    fn composite_render_lists_degrees() {
        let (m, phases) = quintic_phases();
        let rels = phase_relations(&m, &phases[0]);
        let text = render_relation(&rels[0]);
        assert_eq!(
            text,
            "N(x1) ∘ N(x2) ∘ N(x3) ∘ N(x4) ∘ N(x5) ≅ 0  (degrees 1,1,1,1,1)"
        );
    }
}
