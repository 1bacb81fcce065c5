//! Phases of the secondary fan. Chambers are the full-dimensional regions
//! cut out of the Picard lattice (tensored with the rationals) by the
//! hyperplanes spanned by (k-1)-subsets of the coordinate charges. Every
//! chamber is represented by an exact rational interior point, and all
//! downstream questions reduce to exact cone-membership queries.

use crate::lattice::{kernel_basis, primitive_part, solve_linear_integer, IntMatrix, RationalVector};
use crate::linprog::{feasible_point, nonneg_solution, to_rational};
use crate::toric::{GLSMModel, MonomialIdeal};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SecondaryError {
    #[error("degenerate charges: they span rank {got} < {expected}")]
    DegenerateCharges { got: usize, expected: usize },
    #[error("point lies on a wall of the secondary fan")]
    OnWall,
    #[error("phases {0} and {1} do not share a facet")]
    NotAdjacent(usize, usize),
    #[error("no phase has all exceptional sets among the base coordinates")]
    NoGeometricPhase,
}

/// A maximal cone of the secondary fan, with its interior witness point and
/// the combinatorics of the associated quotient.
#[derive(Debug, Clone)]
pub struct Phase {
    pub id: usize,
    /// Exact interior point of the chamber.
    pub eta: RationalVector,
    /// Sign of each arrangement normal on the chamber.
    pub sign_vector: Vec<i8>,
    /// Rays of the enhanced fan that survive in this phase.
    pub kept_rays: Vec<usize>,
    /// Rays dropped in this phase: the singleton minimal exceptional sets.
    pub removed_rays: Vec<usize>,
    /// All inclusion-minimal coordinate sets whose complementary charges
    /// fail to span the interior point.
    pub minimal_exceptional_sets: Vec<BTreeSet<usize>>,
    /// One square-free generator per minimal exceptional set.
    pub irrelevant_ideal: MonomialIdeal,
}

/// Data of the wall between two adjacent phases: the primitive covector
/// vanishing on the shared facet, the grade width sigma, and the coordinate
/// sets collapsing on either side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WallData {
    pub phase_pair: (usize, usize),
    /// Primitive covector, zero on the facet, positive on the first phase.
    pub t: Vec<BigInt>,
    pub sigma: BigInt,
    pub zplus: Vec<usize>,
    pub zminus: Vec<usize>,
    /// Integer vector with t(g) = 1, used to pick window representatives.
    g: Vec<BigInt>,
}

impl WallData {
    /// Degrees q with m <= t(q) < m + sigma, one representative per value of
    /// t modulo the kernel of t. For a rank-one Picard lattice these are
    /// exactly sigma consecutive integers.
    pub fn window(&self, m: i64) -> Vec<Vec<BigInt>> {
        let sigma = i64::try_from(&self.sigma).expect("window width fits in i64 at desk scale");
        (m..m + sigma)
            .map(|t| self.g.iter().map(|e| e * BigInt::from(t)).collect())
            .collect()
    }

    pub fn apply_t(&self, q: &[BigInt]) -> BigInt {
        self.t.iter().zip(q).map(|(a, b)| a * b).sum()
    }
}

/// Exact membership of a rational point in the cone nonnegatively spanned
/// by integer generators. Decided by sign inspection in rank one and by an
/// exact phase-1 simplex otherwise.
pub fn cone_contains(generators: &[Vec<BigInt>], point: &[BigRational]) -> bool {
    let k = point.len();
    if point.iter().all(Zero::is_zero) {
        return true;
    }
    if k == 1 {
        let q = &point[0];
        if q.is_positive() {
            return generators.iter().any(|g| g[0].is_positive());
        }
        return generators.iter().any(|g| g[0].is_negative());
    }
    let rows: Vec<Vec<BigRational>> = (0..k)
        .map(|j| generators.iter().map(|g| BigRational::from_integer(g[j].clone())).collect())
        .collect();
    nonneg_solution(&rows, point).is_some()
}

/// Primitive normals of all hyperplanes spanned by (k-1)-subsets of the
/// charge rows, deduplicated and canonically ordered. For k = 1 this is the
/// single hyperplane at the origin.
pub fn arrangement_normals(model: &GLSMModel) -> Vec<Vec<BigInt>> {
    let k = model.k;
    let charges = model.charge_rows();
    let mut normals: BTreeSet<Vec<BigInt>> = BTreeSet::new();
    for subset in crate::combinat::combinations(charges.len(), k - 1) {
        let rows: Vec<Vec<BigInt>> = subset.iter().map(|&i| charges[i].clone()).collect();
        let mat = if rows.is_empty() { IntMatrix::zero(0, k) } else { IntMatrix::from_rows(&rows) };
        if rows.is_empty() || mat.rank() == k - 1 {
            let kern = kernel_basis(&mat);
            if kern.len() == 1 {
                normals.insert(primitive_part(&kern[0]));
            }
        }
    }
    normals.into_iter().collect()
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn dot_rat(a: &[BigInt], b: &[BigRational]) -> BigRational {
    a.iter()
        .zip(b)
        .map(|(x, y)| BigRational::from_integer(x.clone()) * y)
        .sum()
}

fn signs_feasible(normals: &[Vec<BigInt>], signs: &[i8]) -> Option<Vec<BigRational>> {
    let rows: Vec<Vec<BigRational>> = normals
        .iter()
        .zip(signs)
        .map(|(t, &s)| {
            t.iter()
                .map(|e| BigRational::from_integer(if s > 0 { e.clone() } else { -e }))
                .collect()
        })
        .collect();
    let rhs = vec![BigRational::one(); rows.len()];
    feasible_point(&rows, &rhs)
}

/// Rays of the arrangement: primitive generators of the one-dimensional
/// intersections of (k-2)... of (k-1) of the hyperplanes, both orientations.
fn arrangement_rays(normals: &[Vec<BigInt>], k: usize) -> Vec<Vec<BigInt>> {
    let mut rays: BTreeSet<Vec<BigInt>> = BTreeSet::new();
    for subset in crate::combinat::combinations(normals.len(), k - 1) {
        let rows: Vec<Vec<BigInt>> = subset.iter().map(|&i| normals[i].clone()).collect();
        let mat = if rows.is_empty() { IntMatrix::zero(0, k) } else { IntMatrix::from_rows(&rows) };
        if rows.is_empty() || mat.rank() == k - 1 {
            let kern = kernel_basis(&mat);
            if kern.len() == 1 {
                let r = primitive_part(&kern[0]);
                rays.insert(r.iter().map(|e| -e).collect());
                rays.insert(r);
            }
        }
    }
    rays.into_iter().collect()
}

/// Interior point of a chamber: the sum of the arrangement rays lying in the
/// chamber closure. For pointed chambers those are exactly the extreme rays,
/// so the sum is interior and integral.
fn interior_point(
    normals: &[Vec<BigInt>],
    signs: &[i8],
    rays: &[Vec<BigInt>],
    k: usize,
) -> Option<Vec<BigInt>> {
    let consistent: Vec<&Vec<BigInt>> = rays
        .iter()
        .filter(|r| {
            normals.iter().zip(signs).all(|(t, &s)| {
                let v = dot(t, r);
                if s > 0 {
                    !v.is_negative()
                } else {
                    !v.is_positive()
                }
            })
        })
        .collect();
    if consistent.is_empty() {
        return None;
    }
    let sum: Vec<BigInt> = (0..k)
        .map(|j| consistent.iter().map(|r| r[j].clone()).sum())
        .collect();
    let strict = normals.iter().zip(signs).all(|(t, &s)| {
        let v = dot(t, &sum);
        if s > 0 {
            v.is_positive()
        } else {
            v.is_negative()
        }
    });
    strict.then_some(sum)
}

/// Enumerate the maximal cones of the secondary fan, one phase per chamber,
/// in deterministic sign-vector order with positive signs first.
pub fn enumerate_phases(model: &GLSMModel) -> Result<Vec<Phase>, SecondaryError> {
    let k = model.k;
    let charges = IntMatrix::from_rows(&model.charge_rows());
    let rank = charges.rank();
    if rank != k {
        return Err(SecondaryError::DegenerateCharges { got: rank, expected: k });
    }
    let normals = arrangement_normals(model);
    let rays = arrangement_rays(&normals, k);

    let mut chambers: Vec<(Vec<i8>, Vec<BigRational>)> = vec![(vec![], vec![])];
    for t in 0..normals.len() {
        let mut next = Vec::new();
        for (signs, _) in &chambers {
            for s in [1i8, -1i8] {
                let mut cand = signs.clone();
                cand.push(s);
                if let Some(witness) = signs_feasible(&normals[..=t], &cand) {
                    next.push((cand, witness));
                }
            }
        }
        chambers = next;
    }

    let mut phases = Vec::with_capacity(chambers.len());
    for (id, (signs, witness)) in chambers.into_iter().enumerate() {
        let eta: RationalVector = match interior_point(&normals, &signs, &rays, k) {
            Some(point) => to_rational(&point),
            None => witness,
        };
        let sets = minimal_exceptional_sets(model, &eta)?;
        let removed: Vec<usize> = sets
            .iter()
            .filter(|s| s.len() == 1)
            .flat_map(|s| s.iter().copied())
            .collect();
        let kept: Vec<usize> = (0..model.n_coords()).filter(|i| !removed.contains(i)).collect();
        let irrelevant_ideal = MonomialIdeal::from_supports(model.n_coords(), sets.clone());
        phases.push(Phase {
            id,
            eta,
            sign_vector: signs,
            kept_rays: kept,
            removed_rays: removed,
            minimal_exceptional_sets: sets,
            irrelevant_ideal,
        });
    }
    Ok(phases)
}

/// All inclusion-minimal coordinate sets S such that the interior point is
/// outside the cone of the complementary charges. Enumerated by increasing
/// size with superset pruning.
pub fn minimal_exceptional_sets(
    model: &GLSMModel,
    eta: &[BigRational],
) -> Result<Vec<BTreeSet<usize>>, SecondaryError> {
    let normals = arrangement_normals(model);
    if normals.iter().any(|t| dot_rat(t, eta).is_zero()) {
        return Err(SecondaryError::OnWall);
    }
    let n = model.n_coords();
    let charges = model.charge_rows();
    let mut found: Vec<BTreeSet<usize>> = Vec::new();
    for size in 1..=n {
        for subset in crate::combinat::combinations(n, size) {
            let set: BTreeSet<usize> = subset.iter().copied().collect();
            let dominated = found.iter().any(|f| f.is_subset(&set));
            if !dominated {
                let rest: Vec<Vec<BigInt>> = (0..n)
                    .filter(|i| !set.contains(i))
                    .map(|i| charges[i].clone())
                    .collect();
                if !cone_contains(&rest, eta) {
                    found.push(set);
                }
            }
        }
    }
    found.sort_by_key(|s| (s.len(), s.iter().copied().collect::<Vec<_>>()));
    Ok(found)
}

/// The phase whose minimal exceptional sets avoid every fiber coordinate:
/// the quotient there is the complete intersection itself. With several
/// candidates (flop chambers) the lowest id wins.
pub fn identify_geometric_phase(model: &GLSMModel, phases: &[Phase]) -> Result<usize, SecondaryError> {
    phases
        .iter()
        .find(|p| {
            p.minimal_exceptional_sets
                .iter()
                .all(|s| s.iter().all(|&i| !model.is_fiber_index(i)))
        })
        .map(|p| p.id)
        .ok_or(SecondaryError::NoGeometricPhase)
}

/// Wall data for two adjacent phases: the primitive covector on the shared
/// facet oriented toward the first phase, the window width sigma, and the
/// coordinates collapsing on each side.
pub fn wall_data(
    model: &GLSMModel,
    phase1: &Phase,
    phase2: &Phase,
) -> Result<WallData, SecondaryError> {
    if phase1.id == phase2.id {
        return Err(SecondaryError::NotAdjacent(phase1.id, phase2.id));
    }
    let normals = arrangement_normals(model);
    let diff: Vec<usize> = (0..normals.len())
        .filter(|&j| phase1.sign_vector[j] != phase2.sign_vector[j])
        .collect();
    let [j] = diff.as_slice() else {
        return Err(SecondaryError::NotAdjacent(phase1.id, phase2.id));
    };
    let j = *j;
    if model.k >= 2 {
        // the shared face must be a genuine facet: relative interior point
        // with the wall normal pinned to zero
        let mut rows: Vec<Vec<BigRational>> = Vec::new();
        let mut rhs: Vec<BigRational> = Vec::new();
        for (i, t) in normals.iter().enumerate() {
            if i == j {
                rows.push(to_rational(t));
                rhs.push(BigRational::zero());
                rows.push(to_rational(t).iter().map(|e| -e).collect());
                rhs.push(BigRational::zero());
            } else {
                let s = phase1.sign_vector[i];
                rows.push(
                    t.iter()
                        .map(|e| BigRational::from_integer(if s > 0 { e.clone() } else { -e }))
                        .collect(),
                );
                rhs.push(BigRational::one());
            }
        }
        if feasible_point(&rows, &rhs).is_none() {
            return Err(SecondaryError::NotAdjacent(phase1.id, phase2.id));
        }
    }
    let t: Vec<BigInt> = if phase1.sign_vector[j] > 0 {
        normals[j].clone()
    } else {
        normals[j].iter().map(|e| -e).collect()
    };
    debug_assert!(dot_rat(&t, &phase1.eta).is_positive());
    let mut sigma = BigInt::zero();
    let mut neg = BigInt::zero();
    let mut zplus = Vec::new();
    let mut zminus = Vec::new();
    for i in 0..model.n_coords() {
        let v = dot(&t, model.charge_row(i));
        if v.is_positive() {
            sigma += &v;
            zplus.push(i);
        } else if v.is_negative() {
            neg -= &v;
            zminus.push(i);
        }
    }
    debug_assert_eq!(sigma, neg, "window width must balance on a Calabi-Yau");
    let t_mat = IntMatrix::from_rows(&[t.clone()]);
    let g = solve_linear_integer(&t_mat, &[BigInt::one()])
        .expect("a primitive covector takes the value one");
    Ok(WallData { phase_pair: (phase1.id, phase2.id), t, sigma, zplus, zminus, g })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linprog::from_int;
    use crate::toric::build_from_charges_i64;

    fn quintic() -> GLSMModel {
        build_from_charges_i64(&vec![vec![1]; 5], &[vec![5]], None).unwrap()
    }

    fn rat_vec(v: &[i64]) -> Vec<BigRational> {
        v.iter().map(|&x| from_int(x)).collect()
    }

    fn big_vecs(v: &[Vec<i64>]) -> Vec<Vec<BigInt>> {
        v.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    #[test]
    fn cone_membership_basics() {
        let gens = big_vecs(&[vec![1, 0], vec![0, 1]]);
        assert!(cone_contains(&gens, &rat_vec(&[1, 1])));
        assert!(!cone_contains(&gens, &rat_vec(&[-1, 0])));
        let quintic_gens = big_vecs(&[vec![1], vec![-5]]);
        assert!(cone_contains(&quintic_gens, &rat_vec(&[1])));
    }

    #[test]
    fn quintic_has_two_phases() {
        let m = quintic();
        let phases = enumerate_phases(&m).unwrap();
        assert_eq!(phases.len(), 2);
        assert_eq!(phases[0].eta, rat_vec(&[1]));
        assert_eq!(phases[1].eta, rat_vec(&[-1]));
    }

    #[test]
    fn quintic_exceptional_sets() {
        let m = quintic();
        let geometric = minimal_exceptional_sets(&m, &rat_vec(&[1])).unwrap();
        assert_eq!(geometric, vec![BTreeSet::from([0, 1, 2, 3, 4])]);
        let lg = minimal_exceptional_sets(&m, &rat_vec(&[-1])).unwrap();
        assert_eq!(lg, vec![BTreeSet::from([5])]);
    }

    #[test]
    fn x223_lg_set_is_all_fibers() {
        let m = build_from_charges_i64(&vec![vec![1]; 7], &[vec![2], vec![2], vec![3]], None).unwrap();
        let lg = minimal_exceptional_sets(&m, &rat_vec(&[-1])).unwrap();
        assert_eq!(lg, vec![BTreeSet::from([7, 8, 9])]);
    }

    #[test]
    fn wall_point_rejected() {
        let m = quintic();
        let err = minimal_exceptional_sets(&m, &rat_vec(&[0])).unwrap_err();
        assert_eq!(err, SecondaryError::OnWall);
    }

    #[test]
    fn geometric_phase_of_quintic() {
        let m = quintic();
        let phases = enumerate_phases(&m).unwrap();
        let id = identify_geometric_phase(&m, &phases).unwrap();
        assert_eq!(id, 0);
        assert_eq!(phases[id].eta, rat_vec(&[1]));
        assert!(phases[1].removed_rays == vec![5]);
    }

    #[test]
    fn no_geometric_phase_for_non_nef_degrees() {
        // charges (3, -2 | -2, 1): both chambers touch a fiber coordinate
        let m = build_from_charges_i64(&[vec![3], vec![-2]], &[vec![2], vec![-1]], None).unwrap();
        let phases = enumerate_phases(&m).unwrap();
        assert_eq!(phases.len(), 2);
        let err = identify_geometric_phase(&m, &phases).unwrap_err();
        assert_eq!(err, SecondaryError::NoGeometricPhase);
    }

    #[test]
    fn quintic_wall_data() {
        let m = quintic();
        let phases = enumerate_phases(&m).unwrap();
        let wall = wall_data(&m, &phases[0], &phases[1]).unwrap();
        assert_eq!(wall.t, vec![BigInt::from(1)]);
        assert_eq!(wall.sigma, BigInt::from(5));
        assert_eq!(wall.zplus, vec![0, 1, 2, 3, 4]);
        assert_eq!(wall.zminus, vec![5]);
        let window: Vec<BigInt> = wall.window(0).into_iter().map(|q| q[0].clone()).collect();
        assert_eq!(window, (0..5).map(BigInt::from).collect::<Vec<_>>());
    }

    #[test]
    fn x212_wall_width() {
        let m = build_from_charges_i64(
            &[vec![1], vec![1], vec![1], vec![1], vec![4], vec![6]],
            &[vec![2], vec![12]],
            None,
        )
        .unwrap();
        let phases = enumerate_phases(&m).unwrap();
        let wall = wall_data(&m, &phases[0], &phases[1]).unwrap();
        assert_eq!(wall.sigma, BigInt::from(14));
    }

    #[test]
    fn k2_toy_chamber_count_matches_grid_oracle() {
        // rows (1,0), (1,0), (0,1), (0,1), (-2,-2)
        let m = build_from_charges_i64(
            &[vec![1, 0], vec![1, 0], vec![0, 1], vec![0, 1]],
            &[vec![2, 2]],
            None,
        )
        .unwrap();
        let phases = enumerate_phases(&m).unwrap();
        // oracle: distinct sign vectors over a rational grid
        let normals = arrangement_normals(&m);
        let mut seen: BTreeSet<Vec<i8>> = BTreeSet::new();
        for num in -40i64..=40 {
            for den in -40i64..=40 {
                let p = rat_vec(&[num, den]);
                let signs: Option<Vec<i8>> = normals
                    .iter()
                    .map(|t| {
                        let v = dot_rat(t, &p);
                        if v.is_positive() {
                            Some(1)
                        } else if v.is_negative() {
                            Some(-1)
                        } else {
                            None
                        }
                    })
                    .collect();
                if let Some(s) = signs {
                    seen.insert(s);
                }
            }
        }
        assert_eq!(phases.len(), seen.len());
        let ours: BTreeSet<Vec<i8>> = phases.iter().map(|p| p.sign_vector.clone()).collect();
        assert_eq!(ours, seen);
    }

    #[test]
    fn k2_interior_points_are_interior() {
        let m = build_from_charges_i64(
            &[vec![1, 0], vec![1, 0], vec![0, 1], vec![0, 1]],
            &[vec![2, 2]],
            None,
        )
        .unwrap();
        let normals = arrangement_normals(&m);
        for phase in enumerate_phases(&m).unwrap() {
            for (t, &s) in normals.iter().zip(&phase.sign_vector) {
                let v = dot_rat(t, &phase.eta);
                if s > 0 {
                    assert!(v.is_positive());
                } else {
                    assert!(v.is_negative());
                }
            }
        }
    }

    #[test]
    fn nonadjacent_same_phase_rejected() {
        let m = quintic();
        let phases = enumerate_phases(&m).unwrap();
        assert!(matches!(
            wall_data(&m, &phases[0], &phases[0]),
            Err(SecondaryError::NotAdjacent(_, _))
        ));
    }
}
