//! Graded matrix factorizations of the superpotential and the higher
//! homotopies that assemble a finite free resolution into one.
//!
//! A factorization is a pair of square matrices f, g over the coordinate
//! ring with f g = g f = W id. Rows and columns carry degree tags (Picard
//! charge and R-grade); `f` preserves gradings, `g` raises the R-grade by
//! two, matching a superpotential of degree zero and R-grade two.

use crate::laurent::LaurentElement;
use crate::multipoly::{monomials_of_degree, CoordGrading, Homogeneity, MultiPoly};
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MfError {
    #[error("inhomogeneous input: {0}")]
    InhomogeneousInput(String),
    #[error("grading mismatch between factors")]
    GradingMismatch,
    #[error("no solution for the homotopy at order {0:?}")]
    NoSolutionAtOrder(Vec<u32>),
    #[error("homotopy family is not finitely supported: {0}")]
    NotFinitelySupported(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

/// Degree tag of one module generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegTag {
    pub q: Vec<i64>,
    pub r: i64,
}

pub type PolyMatrix = Vec<Vec<MultiPoly>>;

fn mat_mul(a: &PolyMatrix, b: &PolyMatrix, nvars: usize) -> PolyMatrix {
    let rows = a.len();
    let inner = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    let mut out = vec![vec![MultiPoly::zero(nvars); cols]; rows];
    for i in 0..rows {
        for l in 0..inner {
            if a[i][l].is_zero() {
                continue;
            }
            for j in 0..cols {
                if b[l][j].is_zero() {
                    continue;
                }
                out[i][j] = out[i][j].add(&a[i][l].mul(&b[l][j]));
            }
        }
    }
    out
}

fn scalar_matrix(n: usize, w: &MultiPoly, nvars: usize) -> PolyMatrix {
    let mut out = vec![vec![MultiPoly::zero(nvars); n]; n];
    for (i, row) in out.iter_mut().enumerate() {
        row[i] = w.clone();
    }
    out
}

/// A graded matrix factorization: `f` maps the odd summand to the even one,
/// `g` maps back, and both compose to `W` times the identity.
#[derive(Debug, Clone)]
pub struct GradedMF {
    pub grading: CoordGrading,
    pub p0_tags: Vec<DegTag>,
    pub p1_tags: Vec<DegTag>,
    /// p0 x p1 block: component from the j-th odd generator to the i-th
    /// even generator.
    pub f: PolyMatrix,
    /// p1 x p0 block.
    pub g: PolyMatrix,
}

impl GradedMF {
    pub fn rank(&self) -> usize {
        self.p0_tags.len()
    }

    /// The potential this pair factors, read off the composite.
    pub fn potential(&self) -> MultiPoly {
        let nvars = self.grading.n_coords();
        if self.rank() == 0 {
            return MultiPoly::zero(nvars);
        }
        mat_mul(&self.f, &self.g, nvars)[0][0].clone()
    }
}

fn homogeneous_degree(
    poly: &MultiPoly,
    grading: &CoordGrading,
    what: &str,
) -> Result<(Vec<i64>, i64), MfError> {
    match poly.homogeneity(grading) {
        Homogeneity::Homogeneous(q, r) => Ok((q, r)),
        Homogeneity::Zero => Err(MfError::InhomogeneousInput(format!("{} is zero", what))),
        Homogeneity::Inhomogeneous => {
            Err(MfError::InhomogeneousInput(format!("{} is not homogeneous", what)))
        }
    }
}

fn rank_one(
    grading: &CoordGrading,
    a: &MultiPoly,
    b: &MultiPoly,
    index: usize,
) -> Result<GradedMF, MfError> {
    let (qa, ra) = homogeneous_degree(a, grading, &format!("pair {} first entry", index))?;
    let (qb, rb) = homogeneous_degree(b, grading, &format!("pair {} second entry", index))?;
    let sum_q: Vec<i64> = qa.iter().zip(&qb).map(|(x, y)| x + y).collect();
    if sum_q.iter().any(|&x| x != 0) || ra + rb != 2 {
        return Err(MfError::InhomogeneousInput(format!(
            "pair {} multiplies to degree {:?} R-grade {}, need degree 0 R-grade 2",
            index,
            sum_q,
            ra + rb
        )));
    }
    Ok(GradedMF {
        grading: grading.clone(),
        p0_tags: vec![DegTag { q: qa, r: ra - 2 }],
        p1_tags: vec![DegTag { q: vec![0; grading.k], r: 0 }],
        f: vec![vec![b.clone()]],
        g: vec![vec![a.clone()]],
    })
}

/// Koszul factorization of `W = sum a_j b_j` as the tensor product of the
/// rank-one factorizations of the pairs. Rank is 2^(m-1) for m pairs.
pub fn koszul_mf(
    grading: &CoordGrading,
    pairs: &[(MultiPoly, MultiPoly)],
) -> Result<GradedMF, MfError> {
    let Some(((a0, b0), rest)) = pairs.split_first() else {
        return Err(MfError::InhomogeneousInput("no pairs given".into()));
    };
    let mut mf = rank_one(grading, a0, b0, 0)?;
    for (i, (a, b)) in rest.iter().enumerate() {
        let next = rank_one(grading, a, b, i + 1)?;
        mf = tensor_mf(&mf, &next)?;
    }
    Ok(mf)
}

fn tag_add(a: &DegTag, b: &DegTag, r_shift: i64) -> DegTag {
    DegTag {
        q: a.q.iter().zip(&b.q).map(|(x, y)| x + y).collect(),
        r: a.r + b.r + r_shift,
    }
}

/// Tensor product of factorizations with the usual Koszul signs; the
/// potentials add. The odd-odd summand carries an R-shift of -2, one full
/// period.
pub fn tensor_mf(a: &GradedMF, b: &GradedMF) -> Result<GradedMF, MfError> {
    if a.grading != b.grading {
        return Err(MfError::GradingMismatch);
    }
    let grading = a.grading.clone();
    let nvars = grading.n_coords();
    let (ra0, ra1) = (a.p0_tags.len(), a.p1_tags.len());
    let (rb0, rb1) = (b.p0_tags.len(), b.p1_tags.len());

    // even summand: A0 (x) B0 ++ A1 (x) B1 {-2}
    let mut p0_tags: Vec<DegTag> = Vec::with_capacity(ra0 * rb0 + ra1 * rb1);
    for ta in &a.p0_tags {
        for tb in &b.p0_tags {
            p0_tags.push(tag_add(ta, tb, 0));
        }
    }
    for ta in &a.p1_tags {
        for tb in &b.p1_tags {
            p0_tags.push(tag_add(ta, tb, -2));
        }
    }
    // odd summand: A1 (x) B0 ++ A0 (x) B1
    let mut p1_tags: Vec<DegTag> = Vec::with_capacity(ra1 * rb0 + ra0 * rb1);
    for ta in &a.p1_tags {
        for tb in &b.p0_tags {
            p1_tags.push(tag_add(ta, tb, 0));
        }
    }
    for ta in &a.p0_tags {
        for tb in &b.p1_tags {
            p1_tags.push(tag_add(ta, tb, 0));
        }
    }

    let rank0 = p0_tags.len();
    let rank1 = p1_tags.len();
    let mut f = vec![vec![MultiPoly::zero(nvars); rank1]; rank0];
    let mut g = vec![vec![MultiPoly::zero(nvars); rank0]; rank1];

    // block offsets
    let f_row_a0b0 = 0; // A0 (x) B0
    let f_row_a1b1 = ra0 * rb0; // A1 (x) B1
    let f_col_a1b0 = 0; // A1 (x) B0
    let f_col_a0b1 = ra1 * rb0; // A0 (x) B1

    // f_A (x) I : A1 B0 -> A0 B0
    for i in 0..ra0 {
        for j in 0..ra1 {
            for l in 0..rb0 {
                f[f_row_a0b0 + i * rb0 + l][f_col_a1b0 + j * rb0 + l] = a.f[i][j].clone();
            }
        }
    }
    // I (x) f_B : A0 B1 -> A0 B0
    for l in 0..ra0 {
        for i in 0..rb0 {
            for j in 0..rb1 {
                f[f_row_a0b0 + l * rb0 + i][f_col_a0b1 + l * rb1 + j] = b.f[i][j].clone();
            }
        }
    }
    // -I (x) g_B : A1 B0 -> A1 B1
    for l in 0..ra1 {
        for i in 0..rb1 {
            for j in 0..rb0 {
                f[f_row_a1b1 + l * rb1 + i][f_col_a1b0 + l * rb0 + j] = b.g[i][j].neg();
            }
        }
    }
    // g_A (x) I : A0 B1 -> A1 B1
    for i in 0..ra1 {
        for j in 0..ra0 {
            for l in 0..rb1 {
                f[f_row_a1b1 + i * rb1 + l][f_col_a0b1 + j * rb1 + l] = a.g[i][j].clone();
            }
        }
    }

    // g_A (x) I : A0 B0 -> A1 B0
    for i in 0..ra1 {
        for j in 0..ra0 {
            for l in 0..rb0 {
                g[f_col_a1b0 + i * rb0 + l][f_row_a0b0 + j * rb0 + l] = a.g[i][j].clone();
            }
        }
    }
    // -I (x) f_B : A1 B1 -> A1 B0
    for l in 0..ra1 {
        for i in 0..rb0 {
            for j in 0..rb1 {
                g[f_col_a1b0 + l * rb0 + i][f_row_a1b1 + l * rb1 + j] = b.f[i][j].neg();
            }
        }
    }
    // I (x) g_B : A0 B0 -> A0 B1
    for l in 0..ra0 {
        for i in 0..rb1 {
            for j in 0..rb0 {
                g[f_col_a0b1 + l * rb1 + i][f_row_a0b0 + l * rb0 + j] = b.g[i][j].clone();
            }
        }
    }
    // f_A (x) I : A1 B1 -> A0 B1
    for i in 0..ra0 {
        for j in 0..ra1 {
            for l in 0..rb1 {
                g[f_col_a0b1 + i * rb1 + l][f_row_a1b1 + j * rb1 + l] = a.f[i][j].clone();
            }
        }
    }

    let out = GradedMF { grading, p0_tags, p1_tags, f, g };
    debug_assert!({
        let w = out.potential();
        let expect = a.potential().add(&b.potential());
        w == expect
    });
    Ok(out)
}

/// One located failure of the defining identity or the grading rules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MfFailure {
    pub place: String,
    pub row: usize,
    pub col: usize,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct MfReport {
    pub ok: bool,
    pub rank: usize,
    pub failures: Vec<MfFailure>,
}

/// Check `f g = g f = W id` and that every entry is homogeneous of the
/// degree its row and column tags force. Failures are collected, not
/// raised.
pub fn verify_mf(mf: &GradedMF, w: &MultiPoly) -> MfReport {
    let nvars = mf.grading.n_coords();
    let mut failures = Vec::new();
    let rank0 = mf.p0_tags.len();
    let rank1 = mf.p1_tags.len();

    let fg = mat_mul(&mf.f, &mf.g, nvars);
    let want_fg = scalar_matrix(rank0, w, nvars);
    for i in 0..rank0 {
        for j in 0..rank0 {
            if fg[i][j] != want_fg[i][j] {
                failures.push(MfFailure {
                    place: "f.g".into(),
                    row: i,
                    col: j,
                    detail: format!(
                        "got {}, want {}",
                        fg[i][j].render(&mf.grading.names),
                        want_fg[i][j].render(&mf.grading.names)
                    ),
                });
            }
        }
    }
    let gf = mat_mul(&mf.g, &mf.f, nvars);
    let want_gf = scalar_matrix(rank1, w, nvars);
    for i in 0..rank1 {
        for j in 0..rank1 {
            if gf[i][j] != want_gf[i][j] {
                failures.push(MfFailure {
                    place: "g.f".into(),
                    row: i,
                    col: j,
                    detail: format!(
                        "got {}, want {}",
                        gf[i][j].render(&mf.grading.names),
                        want_gf[i][j].render(&mf.grading.names)
                    ),
                });
            }
        }
    }

    // grading rules: f preserves, g raises the R-grade by two
    for i in 0..rank0 {
        for j in 0..rank1 {
            check_entry(
                &mf.f[i][j],
                &mf.p1_tags[j],
                &mf.p0_tags[i],
                0,
                &mf.grading,
                "f",
                i,
                j,
                &mut failures,
            );
        }
    }
    for i in 0..rank1 {
        for j in 0..rank0 {
            check_entry(
                &mf.g[i][j],
                &mf.p0_tags[j],
                &mf.p1_tags[i],
                2,
                &mf.grading,
                "g",
                i,
                j,
                &mut failures,
            );
        }
    }
    MfReport { ok: failures.is_empty(), rank: rank0, failures }
}

#[allow(clippy::too_many_arguments)]
fn check_entry(
    entry: &MultiPoly,
    src: &DegTag,
    tgt: &DegTag,
    r_shift: i64,
    grading: &CoordGrading,
    place: &str,
    row: usize,
    col: usize,
    failures: &mut Vec<MfFailure>,
) {
    if entry.is_zero() {
        return;
    }
    let want_q: Vec<i64> = src.q.iter().zip(&tgt.q).map(|(s, t)| s - t).collect();
    let want_r = src.r - tgt.r + r_shift;
    match entry.homogeneity(grading) {
        Homogeneity::Homogeneous(q, r) if q == want_q && r == want_r => {}
        Homogeneity::Homogeneous(q, r) => failures.push(MfFailure {
            place: place.into(),
            row,
            col,
            detail: format!(
                "entry degree ({:?}, {}) does not match tags ({:?}, {})",
                q, r, want_q, want_r
            ),
        }),
        _ => failures.push(MfFailure {
            place: place.into(),
            row,
            col,
            detail: "entry is not homogeneous".into(),
        }),
    }
}

/// Class of the factorization in the group ring of the Picard lattice:
/// signed sum of t^q over the generator tags, even summand minus odd one,
/// each weighted by the parity of its R-shift.
pub fn k_class(mf: &GradedMF) -> LaurentElement {
    let k = mf.grading.k;
    let mut out = LaurentElement::zero(k);
    for t in &mf.p0_tags {
        let sign = if t.r.rem_euclid(2) == 0 { 1i64 } else { -1 };
        out = out.add(&LaurentElement::monomial(
            k,
            &t.q,
            BigRational::from_integer(sign.into()),
        ));
    }
    for t in &mf.p1_tags {
        let sign = if t.r.rem_euclid(2) == 0 { -1i64 } else { 1 };
        out = out.add(&LaurentElement::monomial(
            k,
            &t.q,
            BigRational::from_integer(sign.into()),
        ));
    }
    out
}

/// A finite free resolution over the coordinate ring, presented by its
/// graded pieces and differential blocks. Generators carry scalar degrees
/// against a rank-one grading.
#[derive(Debug, Clone)]
pub struct Resolution {
    /// Generator degrees per homological position, innermost per generator.
    pub gen_degrees: Vec<Vec<i64>>,
    /// d0[i] maps position i+1 to position i.
    pub d0: Vec<PolyMatrix>,
}

impl Resolution {
    pub fn positions(&self) -> usize {
        self.gen_degrees.len()
    }

    pub fn rank(&self, i: usize) -> usize {
        self.gen_degrees[i].len()
    }

    fn total_rank(&self) -> usize {
        self.gen_degrees.iter().map(|g| g.len()).sum()
    }

    fn offset(&self, i: usize) -> usize {
        self.gen_degrees[..i].iter().map(|g| g.len()).sum()
    }

    /// d0 as one square matrix over the total module.
    fn total_d0(&self, nvars: usize) -> PolyMatrix {
        let n = self.total_rank();
        let mut m = vec![vec![MultiPoly::zero(nvars); n]; n];
        for (i, block) in self.d0.iter().enumerate() {
            let ro = self.offset(i);
            let co = self.offset(i + 1);
            for (r, row) in block.iter().enumerate() {
                for (c, e) in row.iter().enumerate() {
                    m[ro + r][co + c] = e.clone();
                }
            }
        }
        m
    }
}

/// The family of operators d_n indexed by fiber multi-indices, stored as
/// total matrices. d_0 is the resolution differential.
#[derive(Debug, Clone)]
pub struct HomotopyFamily {
    pub grading: CoordGrading,
    pub resolution: Resolution,
    pub sections: Vec<MultiPoly>,
    pub section_degrees: Vec<i64>,
    pub degree_bound: usize,
    /// Nonzero total matrices, keyed by the multi-index n.
    pub components: BTreeMap<Vec<u32>, PolyMatrix>,
}

fn multi_indices(ell: usize, total: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; ell];
    fn rec(ell: usize, pos: usize, left: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if pos == ell {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for e in 0..=left {
            cur[pos] = e as u32;
            rec(ell, pos + 1, left - e, cur, out);
        }
        cur[pos] = 0;
    }
    if ell == 0 {
        return out;
    }
    rec(ell, 0, total, &mut cur, &mut out);
    out
}

fn mat_add_into(acc: &mut PolyMatrix, m: &PolyMatrix) {
    for (ar, mr) in acc.iter_mut().zip(m) {
        for (a, e) in ar.iter_mut().zip(mr) {
            *a = a.add(e);
        }
    }
}

impl HomotopyFamily {
    fn component(&self, n: &[u32]) -> Option<&PolyMatrix> {
        self.components.get(n)
    }

    /// sum over m + m' = n of d_m d_m', minus G_a id when n is a unit
    /// index. Identically zero for a solved family.
    pub fn residual(&self, n: &[u32]) -> PolyMatrix {
        let nvars = self.grading.n_coords();
        let total = self.resolution.total_rank();
        let mut acc = vec![vec![MultiPoly::zero(nvars); total]; total];
        let weight: usize = n.iter().map(|&e| e as usize).sum();
        for m in (0..=weight).flat_map(|w| multi_indices(n.len(), w)) {
            if m.iter().zip(n).any(|(a, b)| a > b) {
                continue;
            }
            let rest: Vec<u32> = n.iter().zip(&m).map(|(a, b)| a - b).collect();
            let (Some(dm), Some(dr)) = (self.component(&m), self.component(&rest)) else {
                continue;
            };
            let prod = mat_mul(dm, dr, nvars);
            mat_add_into(&mut acc, &prod);
        }
        if weight == 1 {
            let a = n.iter().position(|&e| e == 1).unwrap();
            for (i, row) in acc.iter_mut().enumerate() {
                row[i] = row[i].sub(&self.sections[a]);
            }
        }
        acc
    }

    pub fn residual_is_zero(&self, n: &[u32]) -> bool {
        self.residual(n).iter().all(|row| row.iter().all(MultiPoly::is_zero))
    }

    /// All residuals up to the given total order vanish.
    pub fn residuals_vanish(&self, up_to: usize) -> bool {
        (1..=up_to)
            .flat_map(|w| multi_indices(self.sections.len(), w))
            .all(|n| self.residual_is_zero(&n))
    }
}

/// Solve the recursive homotopy equations order by order: at a unit index,
/// the anticommutator of d_0 with the unknown equals the section times the
/// identity; at higher orders the convolution of the family vanishes. The
/// unknowns are matrix entries of forced degree, solved exactly.
pub fn higher_homotopies(
    grading: &CoordGrading,
    resolution: &Resolution,
    sections: &[MultiPoly],
    degree_bound: usize,
) -> Result<HomotopyFamily, MfError> {
    if grading.k != 1 {
        return Err(MfError::Unsupported(
            "homotopy solving works against a rank-one grading".into(),
        ));
    }
    let nvars = grading.n_coords();
    let base_coords: Vec<(usize, i64)> = grading
        .rgrades
        .iter()
        .enumerate()
        .filter(|(_, &r)| r == 0)
        .map(|(i, _)| (i, grading.charges[i][0]))
        .collect();
    if base_coords.iter().any(|&(_, w)| w <= 0) {
        return Err(MfError::Unsupported(
            "homotopy solving needs positive base charges".into(),
        ));
    }
    let mut section_degrees = Vec::with_capacity(sections.len());
    for (a, g) in sections.iter().enumerate() {
        match g.homogeneity(grading) {
            Homogeneity::Homogeneous(q, r) => {
                if r != 0 {
                    return Err(MfError::InhomogeneousInput(format!(
                        "section {} has R-grade {}, want 0",
                        a, r
                    )));
                }
                section_degrees.push(q[0]);
            }
            Homogeneity::Zero => section_degrees.push(0),
            Homogeneity::Inhomogeneous => {
                return Err(MfError::InhomogeneousInput(format!(
                    "section {} is not homogeneous",
                    a
                )))
            }
        }
    }

    let total = resolution.total_rank();
    let mut family = HomotopyFamily {
        grading: grading.clone(),
        resolution: resolution.clone(),
        sections: sections.to_vec(),
        section_degrees: section_degrees.clone(),
        degree_bound,
        components: BTreeMap::new(),
    };
    let d0_total = resolution.total_d0(nvars);
    family.components.insert(vec![0; sections.len()], d0_total.clone());

    // flattened degree tags of the total module, with homological positions
    let mut gen_pos: Vec<usize> = Vec::with_capacity(total);
    let mut gen_deg: Vec<i64> = Vec::with_capacity(total);
    for (i, degs) in resolution.gen_degrees.iter().enumerate() {
        for &d in degs {
            gen_pos.push(i);
            gen_deg.push(d);
        }
    }

    for order in 1..=degree_bound {
        for n in multi_indices(sections.len(), order) {
            // rhs = G_a id (order one) minus the crossterms of lower orders
            let mut rhs = {
                let mut m = vec![vec![MultiPoly::zero(nvars); total]; total];
                if order == 1 {
                    let a = n.iter().position(|&e| e == 1).unwrap();
                    for (i, row) in m.iter_mut().enumerate() {
                        row[i] = sections[a].clone();
                    }
                }
                m
            };
            for m_idx in (1..order).flat_map(|w| multi_indices(sections.len(), w)) {
                if m_idx.iter().zip(&n).any(|(a, b)| a > b) {
                    continue;
                }
                let rest: Vec<u32> = n.iter().zip(&m_idx).map(|(a, b)| a - b).collect();
                let (Some(dm), Some(dr)) = (family.component(&m_idx), family.component(&rest))
                else {
                    continue;
                };
                let prod = mat_mul(dm, dr, nvars);
                for (r, row) in rhs.iter_mut().enumerate() {
                    for (c, e) in row.iter_mut().enumerate() {
                        *e = e.sub(&prod[r][c]);
                    }
                }
            }

            // unknown X in blocks position i -> i + 2|n| - 1, entry degrees
            // forced by the section degrees and the generator tags
            let shift = 2 * order - 1;
            let delta: i64 = n
                .iter()
                .zip(&section_degrees)
                .map(|(&e, &d)| e as i64 * d)
                .sum();
            let mut unknown_slots: Vec<(usize, usize, Vec<Vec<u32>>)> = Vec::new();
            for s in 0..total {
                for t in 0..total {
                    if gen_pos[t] != gen_pos[s] + shift {
                        continue;
                    }
                    let need = delta + gen_deg[s] - gen_deg[t];
                    let monos = monomials_of_degree(nvars, &base_coords, need);
                    if !monos.is_empty() {
                        unknown_slots.push((t, s, monos));
                    }
                }
            }
            let mut slot_offsets = Vec::with_capacity(unknown_slots.len());
            let mut n_unknowns = 0usize;
            for (_, _, monos) in &unknown_slots {
                slot_offsets.push(n_unknowns);
                n_unknowns += monos.len();
            }

            // linear system: coefficients of d0 X + X d0 - rhs must vanish
            let mut rows: BTreeMap<(usize, usize, Vec<u32>), Vec<(usize, BigRational)>> =
                BTreeMap::new();
            let mut consts: BTreeMap<(usize, usize, Vec<u32>), BigRational> = BTreeMap::new();
            for (slot, &(t, s, ref monos)) in unknown_slots.iter().enumerate() {
                for (mi, mono) in monos.iter().enumerate() {
                    let var = slot_offsets[slot] + mi;
                    // d0 X: (d0)_{r,t} X_{t,s} lands at (r, s)
                    for r in 0..total {
                        for (de, dc) in d0_total[r][t].terms() {
                            let exps: Vec<u32> = de.iter().zip(mono).map(|(a, b)| a + b).collect();
                            rows.entry((r, s, exps)).or_default().push((var, dc.clone()));
                        }
                    }
                    // X d0: X_{t,s} (d0)_{s,c} lands at (t, c)
                    for c in 0..total {
                        for (de, dc) in d0_total[s][c].terms() {
                            let exps: Vec<u32> = de.iter().zip(mono).map(|(a, b)| a + b).collect();
                            rows.entry((t, c, exps)).or_default().push((var, dc.clone()));
                        }
                    }
                }
            }
            for (r, row) in rhs.iter().enumerate() {
                for (c, e) in row.iter().enumerate() {
                    for (exps, coeff) in e.terms() {
                        *consts.entry((r, c, exps.clone())).or_insert_with(BigRational::zero) +=
                            coeff.clone();
                    }
                }
            }
            let mut keys: BTreeSetLike = rows.keys().cloned().collect();
            for k in consts.keys() {
                if !keys.contains(k) {
                    keys.push(k.clone());
                }
            }
            let mut a_rows: Vec<Vec<BigRational>> = Vec::with_capacity(keys.len());
            let mut b_vec: Vec<BigRational> = Vec::with_capacity(keys.len());
            for key in &keys {
                let mut row = vec![BigRational::zero(); n_unknowns];
                if let Some(entries) = rows.get(key) {
                    for (var, c) in entries {
                        row[*var] += c.clone();
                    }
                }
                a_rows.push(row);
                b_vec.push(consts.get(key).cloned().unwrap_or_else(BigRational::zero));
            }
            let solution = solve_rational(&mut a_rows, &mut b_vec, n_unknowns)
                .ok_or_else(|| MfError::NoSolutionAtOrder(n.clone()))?;

            let mut x = vec![vec![MultiPoly::zero(nvars); total]; total];
            for (slot, &(t, s, ref monos)) in unknown_slots.iter().enumerate() {
                let mut entry = MultiPoly::zero(nvars);
                for (mi, mono) in monos.iter().enumerate() {
                    let c = &solution[slot_offsets[slot] + mi];
                    if !c.is_zero() {
                        entry = entry.add(&MultiPoly::monomial(nvars, mono, c.clone()));
                    }
                }
                x[t][s] = entry;
            }
            if x.iter().any(|row| row.iter().any(|e| !e.is_zero())) {
                family.components.insert(n.clone(), x);
            }
            if !family.residual_is_zero(&n) {
                return Err(MfError::NoSolutionAtOrder(n));
            }
        }
    }
    Ok(family)
}

type BTreeSetLike = Vec<(usize, usize, Vec<u32>)>;

/// Gaussian elimination over the rationals; free variables are set to zero
/// so the solution is deterministic. Returns `None` on inconsistency.
fn solve_rational(
    a: &mut [Vec<BigRational>],
    b: &mut [BigRational],
    n_unknowns: usize,
) -> Option<Vec<BigRational>> {
    let m = a.len();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; n_unknowns];
    let mut row = 0usize;
    for col in 0..n_unknowns {
        let Some(p) = (row..m).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(row, p);
        b.swap(row, p);
        let inv = BigRational::one() / a[row][col].clone();
        for x in a[row].iter_mut() {
            *x *= &inv;
        }
        b[row] *= &inv;
        for r in 0..m {
            if r == row || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for c2 in 0..n_unknowns {
                let t = &factor * &a[row][c2];
                a[r][c2] -= t;
            }
            let t = &factor * &b[row];
            b[r] -= t;
        }
        pivot_of_col[col] = Some(row);
        row += 1;
        if row == m {
            break;
        }
    }
    // rows past the last pivot are all zero in the coefficients by now
    for r in row..m {
        if !b[r].is_zero() {
            return None;
        }
    }
    let mut x = vec![BigRational::zero(); n_unknowns];
    for col in 0..n_unknowns {
        if let Some(r) = pivot_of_col[col] {
            x[col] = b[r].clone();
        }
    }
    Some(x)
}

/// Fold a solved family two-periodically into a matrix factorization of
/// `W = sum p_a G_a` over the full coordinate ring. R-tags drop by two per
/// period; fiber exponents multiply in as p^n.
pub fn assemble_mf(
    family: &HomotopyFamily,
    allow_zero_fiber: bool,
) -> Result<GradedMF, MfError> {
    let grading = &family.grading;
    if grading.k != 1 {
        return Err(MfError::Unsupported("assembly works against a rank-one grading".into()));
    }
    let ell = family.sections.len();
    if ell == 0 && !allow_zero_fiber {
        return Err(MfError::NotFinitelySupported(
            "no fiber coordinates: the fold would be a bare complex".into(),
        ));
    }
    // the solved orders must close: convolutions above the bound involve
    // only stored components and have to cancel
    for order in family.degree_bound + 1..=2 * family.degree_bound {
        for n in multi_indices(ell, order) {
            if !family.residual_is_zero(&n) {
                return Err(MfError::NotFinitelySupported(format!(
                    "nonzero convolution at order {:?}",
                    n
                )));
            }
        }
    }
    let fiber_coords: Vec<usize> = grading
        .rgrades
        .iter()
        .enumerate()
        .filter(|(_, &r)| r != 0)
        .map(|(i, _)| i)
        .collect();
    if fiber_coords.len() != ell {
        return Err(MfError::Unsupported(format!(
            "{} fiber coordinates in the grading, {} sections",
            fiber_coords.len(),
            ell
        )));
    }
    let nvars = grading.n_coords();
    let res = &family.resolution;
    let total = res.total_rank();
    let mut gen_pos = Vec::with_capacity(total);
    let mut gen_deg = Vec::with_capacity(total);
    for (i, degs) in res.gen_degrees.iter().enumerate() {
        for &d in degs {
            gen_pos.push(i);
            gen_deg.push(d);
        }
    }
    let mut even_ids = Vec::new();
    let mut odd_ids = Vec::new();
    for (id, &pos) in gen_pos.iter().enumerate() {
        if pos % 2 == 0 {
            even_ids.push(id);
        } else {
            odd_ids.push(id);
        }
    }
    let tag = |id: usize| DegTag {
        q: vec![gen_deg[id]],
        r: -2 * (gen_pos[id] as i64 / 2),
    };
    let p0_tags: Vec<DegTag> = even_ids.iter().map(|&i| tag(i)).collect();
    let p1_tags: Vec<DegTag> = odd_ids.iter().map(|&i| tag(i)).collect();

    // total folded differential D = sum p^n d_n
    let mut d_total = vec![vec![MultiPoly::zero(nvars); total]; total];
    for (n, mat) in &family.components {
        let mut p_exps = vec![0u32; nvars];
        for (a, &e) in n.iter().enumerate() {
            p_exps[fiber_coords[a]] = e;
        }
        let p_mono = MultiPoly::monomial(nvars, &p_exps, BigRational::one());
        for (r, row) in mat.iter().enumerate() {
            for (c, e) in row.iter().enumerate() {
                if !e.is_zero() {
                    d_total[r][c] = d_total[r][c].add(&p_mono.mul(e));
                }
            }
        }
    }
    let f: PolyMatrix = even_ids
        .iter()
        .map(|&r| odd_ids.iter().map(|&c| d_total[r][c].clone()).collect())
        .collect();
    let g: PolyMatrix = odd_ids
        .iter()
        .map(|&r| even_ids.iter().map(|&c| d_total[r][c].clone()).collect())
        .collect();
    Ok(GradedMF { grading: grading.clone(), p0_tags, p1_tags, f, g })
}

/// The superpotential of a family: sum of p_a G_a over the fiber
/// coordinates of the grading.
pub fn family_potential(family: &HomotopyFamily) -> MultiPoly {
    let grading = &family.grading;
    let nvars = grading.n_coords();
    let fiber_coords: Vec<usize> = grading
        .rgrades
        .iter()
        .enumerate()
        .filter(|(_, &r)| r != 0)
        .map(|(i, _)| i)
        .collect();
    let mut w = MultiPoly::zero(nvars);
    for (a, g) in family.sections.iter().enumerate() {
        w = w.add(&MultiPoly::var(nvars, fiber_coords[a]).mul(g));
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toric::build_from_charges_i64;

    fn quintic_grading() -> CoordGrading {
        let m = build_from_charges_i64(&vec![vec![1]; 5], &[vec![5]], None).unwrap();
        CoordGrading::from_model(&m)
    }

    fn fermat(nvars: usize, vars: &[usize], power: u32) -> MultiPoly {
        let mut f = MultiPoly::zero(nvars);
        for &v in vars {
            f = f.add(&MultiPoly::var(nvars, v).pow(power));
        }
        f
    }

    #[test]
    fn rank_one_koszul_of_quintic() {
        let g = quintic_grading();
        let p = MultiPoly::var(6, 5);
        let w5 = fermat(6, &[0, 1, 2, 3, 4], 5);
        let mf = koszul_mf(&g, &[(p.clone(), w5.clone())]).unwrap();
        assert_eq!(mf.rank(), 1);
        let w = p.mul(&w5);
        let report = verify_mf(&mf, &w);
        assert!(report.ok, "failures: {:?}", report.failures);
        assert_eq!(mf.p0_tags, vec![DegTag { q: vec![-5], r: 0 }]);
    }

    #[test]
    fn toy_square_factorization() {
        // x with charge 0 and R-grade 1, so x.x has degree 0 and R-grade 2
        let g = CoordGrading {
            k: 1,
            charges: vec![vec![0]],
            rgrades: vec![1],
            names: vec!["x".into()],
        };
        let x = MultiPoly::var(1, 0);
        let mf = koszul_mf(&g, &[(x.clone(), x.clone())]).unwrap();
        assert_eq!(mf.rank(), 1);
        let report = verify_mf(&mf, &x.pow(2));
        assert!(report.ok, "failures: {:?}", report.failures);
    }

    #[test]
    fn zero_pair_rejected() {
        let g = quintic_grading();
        let err = koszul_mf(&g, &[(MultiPoly::one(6), MultiPoly::zero(6))]).unwrap_err();
        assert!(matches!(err, MfError::InhomogeneousInput(_)));
    }

    #[test]
    fn x33_two_factor_koszul() {
        let m = build_from_charges_i64(&vec![vec![1]; 6], &[vec![3], vec![3]], None).unwrap();
        let g = CoordGrading::from_model(&m);
        let g1 = fermat(8, &[0, 1, 2], 3);
        let g2 = fermat(8, &[3, 4, 5], 3);
        let p1 = MultiPoly::var(8, 6);
        let p2 = MultiPoly::var(8, 7);
        let mf = koszul_mf(&g, &[(p1.clone(), g1.clone()), (p2.clone(), g2.clone())]).unwrap();
        assert_eq!(mf.rank(), 2);
        let w = p1.mul(&g1).add(&p2.mul(&g2));
        let report = verify_mf(&mf, &w);
        assert!(report.ok, "failures: {:?}", report.failures);
        // K-class is (t^-3 - 1)^2 on the nose
        let t = LaurentElement::monomial(1, &[-3], BigRational::one())
            .sub(&LaurentElement::one(1));
        assert_eq!(k_class(&mf), t.pow(2));
    }

    #[test]
    fn perturbed_entry_is_located() {
        let g = quintic_grading();
        let p = MultiPoly::var(6, 5);
        let w5 = fermat(6, &[0, 1, 2, 3, 4], 5);
        let mut mf = koszul_mf(&g, &[(p.clone(), w5.clone())]).unwrap();
        mf.f[0][0] = mf.f[0][0].add(&MultiPoly::one(6));
        let report = verify_mf(&mf, &p.mul(&w5));
        assert!(!report.ok);
        assert!(report.failures.iter().any(|f| f.place == "f.g" && f.row == 0 && f.col == 0));
        assert!(report.failures.iter().any(|f| f.place == "f"));
    }

    #[test]
    fn tensor_matches_koszul_up_to_permutation() {
        let m = build_from_charges_i64(&vec![vec![1]; 6], &[vec![2], vec![4]], None).unwrap();
        let g = CoordGrading::from_model(&m);
        let g1 = fermat(8, &[0, 1, 2], 2);
        let g2 = fermat(8, &[3, 4, 5], 4);
        let p1 = MultiPoly::var(8, 6);
        let p2 = MultiPoly::var(8, 7);
        let a = koszul_mf(&g, &[(p1.clone(), g1.clone())]).unwrap();
        let b = koszul_mf(&g, &[(p2.clone(), g2.clone())]).unwrap();
        let t = tensor_mf(&a, &b).unwrap();
        let k = koszul_mf(&g, &[(p1.clone(), g1.clone()), (p2.clone(), g2.clone())]).unwrap();
        assert_eq!(t.p0_tags, k.p0_tags);
        assert_eq!(t.f, k.f);
        assert_eq!(t.g, k.g);
    }

    #[test]
    fn k_class_multiplicative_under_tensor() {
        let m = build_from_charges_i64(&vec![vec![1]; 6], &[vec![3], vec![3]], None).unwrap();
        let g = CoordGrading::from_model(&m);
        let a = koszul_mf(&g, &[(MultiPoly::var(8, 6), fermat(8, &[0, 1], 3))]).unwrap();
        let b = koszul_mf(&g, &[(MultiPoly::var(8, 7), fermat(8, &[2, 3], 3))]).unwrap();
        let t = tensor_mf(&a, &b).unwrap();
        assert_eq!(k_class(&t), k_class(&a).mul(&k_class(&b)));
    }

    fn line_resolution(grading: &CoordGrading) -> Resolution {
        // R <- R(-1) presented by multiplication with x
        let nvars = grading.n_coords();
        Resolution {
            gen_degrees: vec![vec![0], vec![1]],
            d0: vec![vec![vec![MultiPoly::var(nvars, 0)]]],
        }
    }

    #[test]
    fn homotopy_for_square_of_a_line() {
        // R = Q[x], G = (x^2), two-term resolution of R/(x)
        let m = build_from_charges_i64(&[vec![1], vec![1]], &[vec![2]], None).unwrap();
        let grading = CoordGrading::from_model(&m);
        let res = line_resolution(&grading);
        let g = MultiPoly::var(3, 0).pow(2);
        let family = higher_homotopies(&grading, &res, &[g], 2).unwrap();
        assert!(family.residuals_vanish(2));
        let s = family.component(&[1]).unwrap();
        // d_{e_1} = [x] as the block from position 0 to position 1
        assert_eq!(s[1][0], MultiPoly::var(3, 0));
        let mf = assemble_mf(&family, false).unwrap();
        let w = family_potential(&family);
        let report = verify_mf(&mf, &w);
        assert!(report.ok, "failures: {:?}", report.failures);
        assert_eq!(mf.f, vec![vec![MultiPoly::var(3, 0)]]);
    }

    #[test]
    fn zero_section_gives_bare_family() {
        let m = build_from_charges_i64(&[vec![1], vec![1]], &[vec![2]], None).unwrap();
        let grading = CoordGrading::from_model(&m);
        let res = line_resolution(&grading);
        let family = higher_homotopies(&grading, &res, &[MultiPoly::zero(3)], 2).unwrap();
        assert_eq!(family.components.len(), 1);
        assert!(family.residuals_vanish(2));
    }

    fn koszul_xy_resolution(nvars: usize) -> Resolution {
        let x = MultiPoly::var(nvars, 0);
        let y = MultiPoly::var(nvars, 1);
        Resolution {
            gen_degrees: vec![vec![0], vec![1, 1], vec![2]],
            d0: vec![
                vec![vec![x.clone(), y.clone()]],
                vec![vec![y.neg()], vec![x.clone()]],
            ],
        }
    }

    #[test]
    fn homotopy_for_plane_koszul() {
        // R = Q[x, y], G = x^2 + y^2 on the Koszul resolution of R/(x, y)
        let m = build_from_charges_i64(&[vec![1], vec![1]], &[vec![2]], None).unwrap();
        let grading = CoordGrading::from_model(&m);
        let res = koszul_xy_resolution(3);
        let g = MultiPoly::var(3, 0).pow(2).add(&MultiPoly::var(3, 1).pow(2));
        let family = higher_homotopies(&grading, &res, &[g], 3).unwrap();
        assert!(family.residuals_vanish(3));
        let mf = assemble_mf(&family, false).unwrap();
        let w = family_potential(&family);
        let report = verify_mf(&mf, &w);
        assert!(report.ok, "failures: {:?}", report.failures);
        assert_eq!(mf.rank(), 2);
    }

    #[test]
    fn zero_fiber_assembly_rejected_by_default() {
        let m = build_from_charges_i64(&[vec![1], vec![1]], &[vec![2]], None).unwrap();
        let grading = CoordGrading::from_model(&m);
        // no sections at all
        let res = line_resolution(&grading);
        let family = higher_homotopies(&grading, &res, &[], 1).unwrap();
        let err = assemble_mf(&family, false).unwrap_err();
        assert!(matches!(err, MfError::NotFinitelySupported(_)));
    }
}
