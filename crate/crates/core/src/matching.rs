//! Configurations of pairs of building blocks: the block Gram
//! P = [[N+, D], [D^T, N-]], its derived sublattices, the finite search
//! over gluing blocks D, ample-cone feasibility, and the arithmetic
//! genericity checklists that certify a configuration is realized by an
//! actual matching.

use crate::blocks::{BuildingBlock, FamilyKind};
use crate::enumerate::{exists_violating_vector, EnumError, VectorConstraint};
use crate::lattice::{gd, IntegerLattice};
use crate::mat::IntMat;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MatchError {
    #[error("gluing block shape must be rank(N+) x rank(N-)")]
    ShapeMismatch,
    #[error("configuration lattice P is degenerate")]
    DegenerateP,
    #[error("configuration lattice P must have signature (2, rank-2), got ({0}, {1})")]
    BadSignature(usize, usize),
    #[error("shared sublattice does not embed isometrically and primitively in both sides")]
    BadSharedSublattice,
    #[error("orthogonal pushout form is not integral")]
    NotIntegral,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ConfigKind {
    Perpendicular,
    Orthogonal,
    Skew,
}

/// A pair of blocks with a gluing block D, encoding the pair of primitive
/// embeddings N+- into the K3 lattice via P = [[N+, D], [D^T, N-]].
#[derive(Clone, Debug)]
pub struct Configuration {
    pub plus: BuildingBlock,
    pub minus: BuildingBlock,
    pub d: IntMat,
    pub p: IntegerLattice,
    pub kind: ConfigKind,
    pub n0_rank: usize,
}

impl Configuration {
    pub fn rank_p(&self) -> usize {
        self.p.rank()
    }

    /// Basis columns of N+ inside P (the leading coordinate block).
    pub fn n_plus_cols(&self) -> IntMat {
        let rp = self.plus.rank_n();
        IntMat::from_fn(self.rank_p(), rp, |i, j| {
            if i == j { BigInt::one() } else { BigInt::zero() }
        })
    }

    pub fn n_minus_cols(&self) -> IntMat {
        let rp = self.plus.rank_n();
        let rm = self.minus.rank_n();
        IntMat::from_fn(self.rank_p(), rm, |i, j| {
            if i == rp + j { BigInt::one() } else { BigInt::zero() }
        })
    }

    /// The same configuration seen from the other side: blocks exchanged
    /// and D transposed.
    pub fn swapped(&self) -> Configuration {
        assemble_configuration(self.minus.clone(), self.plus.clone(), self.d.transpose())
            .expect("swap of a valid configuration is valid")
    }
}

/// Build P from two blocks and a gluing block D, checking nondegeneracy and
/// signature (2, rank-2). With trivial intersection lattice enforced by the
/// block form, D = 0 is the perpendicular case and anything else is skew;
/// orthogonal configurations with nonzero intersection go through
/// [`orthogonal_pushout`].
pub fn assemble_configuration(
    plus: BuildingBlock,
    minus: BuildingBlock,
    d: IntMat,
) -> Result<Configuration, MatchError> {
    let (rp, rm) = (plus.rank_n(), minus.rank_n());
    if d.rows() != rp || d.cols() != rm {
        return Err(MatchError::ShapeMismatch);
    }
    let p_gram = IntMat::block2(plus.n.gram(), &d, &d.transpose(), minus.n.gram());
    let p = IntegerLattice::new(p_gram);
    if !p.is_nondegenerate() {
        return Err(MatchError::DegenerateP);
    }
    let (sp, sm, _) = p.signature();
    if sp != 2 || sm != p.rank() - 2 {
        return Err(MatchError::BadSignature(sp, sm));
    }
    let kind = if d.is_zero() { ConfigKind::Perpendicular } else { ConfigKind::Skew };
    let cfg = Configuration { plus, minus, d, p, kind, n0_rank: 0 };
    // the coordinate blocks are primitive in P by construction; overlattice
    // refinements of P never arise here
    debug_assert!(crate::lattice::LatticeEmbedding::sublattice(&cfg.p, &cfg.n_plus_cols())
        .is_primitive());
    Ok(cfg)
}

/// Orthogonal gluing with a shared sublattice N0: P = (N+ (+) N-) / N0 with
/// the pairing between the two sides factoring through orthogonal
/// projection to N0. The embeddings j+- : N0 -> N+- must be isometric and
/// primitive, and the induced cross pairings must be integral.
pub fn orthogonal_pushout(
    plus: BuildingBlock,
    minus: BuildingBlock,
    n0: &IntegerLattice,
    j_plus: &IntMat,
    j_minus: &IntMat,
) -> Result<Configuration, MatchError> {
    let r0 = n0.rank();
    let (rp, rm) = (plus.rank_n(), minus.rank_n());
    if j_plus.rows() != rp || j_plus.cols() != r0 || j_minus.rows() != rm || j_minus.cols() != r0 {
        return Err(MatchError::ShapeMismatch);
    }
    let emb_p = crate::lattice::LatticeEmbedding::new(n0.clone(), plus.n.clone(), j_plus.clone())
        .map_err(|_| MatchError::BadSharedSublattice)?;
    let emb_m = crate::lattice::LatticeEmbedding::new(n0.clone(), minus.n.clone(), j_minus.clone())
        .map_err(|_| MatchError::BadSharedSublattice)?;
    if !emb_p.is_primitive() || !emb_m.is_primitive() || !n0.is_nondegenerate() {
        return Err(MatchError::BadSharedSublattice);
    }
    // basis of P: all of N+, then a complement of j-(N0) in N-.
    // cross pairing <x+, y-> := <proj_{N0}(x+), y->_{N-}.
    let compl = complement_columns(j_minus, rm);
    let k = compl.cols();
    // proj_{N0}(x) in N0-coordinates: solve (j+^T G+ j+) t = j+^T G+ x
    let gram_n0 = n0.gram().clone();
    let mut d = IntMat::zeros(rp, k);
    for a in 0..rp {
        let mut e = vec![BigInt::zero(); rp];
        e[a] = BigInt::one();
        let rhs = {
            let gp_x = plus.n.gram().mul_vec(&e);
            (0..r0)
                .map(|i| (0..rp).map(|r| &j_plus[(r, i)] * &gp_x[r]).sum::<BigInt>())
                .collect::<Vec<_>>()
        };
        let t = crate::mat::solve_rational(&gram_n0, &rhs).ok_or(MatchError::NotIntegral)?;
        // <proj(x), y> = sum_i t_i <j-(n0_i), y>_{N-}
        for b in 0..k {
            let y = compl.column(b);
            let gm_y = minus.n.gram().mul_vec(&y);
            let mut val = BigRational::zero();
            for i in 0..r0 {
                let pair_i: BigInt =
                    (0..rm).map(|r| &j_minus[(r, i)] * &gm_y[r]).sum();
                val += &t[i] * BigRational::from(pair_i);
            }
            if !val.is_integer() {
                return Err(MatchError::NotIntegral);
            }
            d[(a, b)] = val.to_integer();
        }
    }
    let compl_gram = &(&compl.transpose() * minus.n.gram()) * &compl;
    let p_gram = IntMat::block2(plus.n.gram(), &d, &d.transpose(), &compl_gram);
    let p = IntegerLattice::new(p_gram);
    if !p.is_nondegenerate() {
        return Err(MatchError::DegenerateP);
    }
    let (sp, sm, _) = p.signature();
    if sp != 2 || sm != p.rank() - 2 {
        return Err(MatchError::BadSignature(sp, sm));
    }
    let kind = if r0 == 0 && d.is_zero() {
        ConfigKind::Perpendicular
    } else {
        ConfigKind::Orthogonal
    };
    Ok(Configuration { plus, minus, d, p, kind, n0_rank: r0 })
}

/// Integral column complement: extend the (primitive, full-column-rank)
/// columns of `j` to a basis of Z^n and return the added columns.
fn complement_columns(j: &IntMat, n: usize) -> IntMat {
    let snf = crate::mat::smith_normal_form(j);
    let r = snf.rank();
    // j = u^-1 s v^-1; u^-1's columns r.. complete the image's saturation
    let mut u_inv_cols = Vec::new();
    for idx in r..n {
        let mut e = vec![BigInt::zero(); n];
        e[idx] = BigInt::one();
        let x = crate::mat::solve_rational(&snf.u, &e).expect("unimodular");
        u_inv_cols.push(x.into_iter().map(|q| q.to_integer()).collect::<Vec<_>>());
    }
    IntMat::from_fn(n, n - r, |i, c| u_inv_cols[c][i].clone())
}

/// The derived sublattices of a configuration, with basis choices that make
/// the report reproducible: P+- = N+- \cap N-+^perp is returned by its
/// basis inside the respective coordinate block (saturated, leading entry
/// positive), and Lambda+- = P-+^{perp_P} is presented on the basis
/// (N+- standard basis, complement generators), so the N+- Gram appears as
/// the upper-left block.
#[derive(Clone, Debug)]
pub struct DerivedLattices {
    pub p_plus: IntMat,
    pub p_minus: IntMat,
    pub lambda_plus: IntegerLattice,
    pub lambda_minus: IntegerLattice,
    /// basis of Lambda+- in P coordinates
    pub lambda_plus_basis: IntMat,
    pub lambda_minus_basis: IntMat,
    /// rank(N- \cap T+) = rank(P-), rank(N+ \cap T-) = rank(P+)
    pub rank_nminus_cap_tplus: usize,
    pub rank_nplus_cap_tminus: usize,
}

pub fn derived_lattices(cfg: &Configuration) -> DerivedLattices {
    assert_eq!(cfg.n0_rank, 0, "derived lattices are defined for block configurations");
    let rp = cfg.plus.rank_n();
    let rm = cfg.minus.rank_n();
    // v in N+ pairs with the N- basis through D^T v; kernels are saturated
    let p_plus = cfg.d.transpose().kernel();
    let p_minus = cfg.d.kernel();

    // Lambda+ = (P-)^perp_P; since P- is orthogonal to N+ by construction,
    // this splits coordinatewise as N+ (+) {w in N- : <w, P->_{N-} = 0}
    let dim = cfg.rank_p();
    let lambda = |own_off: usize, own_rank: usize, other_off: usize, other: &IntegerLattice, p_other: &IntMat| {
        let pair_rows = &p_other.transpose() * other.gram();
        let w = pair_rows.kernel();
        let basis = IntMat::from_fn(dim, own_rank + w.cols(), |i, j| {
            if j < own_rank {
                if i == own_off + j { BigInt::one() } else { BigInt::zero() }
            } else {
                let c = j - own_rank;
                if i >= other_off && i < other_off + w.rows() {
                    w[(i - other_off, c)].clone()
                } else {
                    BigInt::zero()
                }
            }
        });
        let gram = &(&basis.transpose() * cfg.p.gram()) * &basis;
        (IntegerLattice::new(gram), basis)
    };
    let (lambda_plus, lambda_plus_basis) = lambda(0, rp, rp, &cfg.minus.n, &p_minus);
    let (lambda_minus, lambda_minus_basis) = lambda(rp, rm, 0, &cfg.plus.n, &p_plus);

    DerivedLattices {
        rank_nminus_cap_tplus: p_minus.cols(),
        rank_nplus_cap_tminus: p_plus.cols(),
        p_plus,
        p_minus,
        lambda_plus,
        lambda_minus,
        lambda_plus_basis,
        lambda_minus_basis,
    }
}

/// Does some nonzero vector of P+- lie in the open ample cone of the
/// respective family? Exact rational feasibility; for a rank-1 P+- this
/// tests the generator and its negation.
pub fn cone_check(cfg: &Configuration) -> (bool, bool) {
    let der = derived_lattices(cfg);
    let plus = subspace_meets_open_cone(&der.p_plus, &cfg.plus.ample_cone);
    let minus = subspace_meets_open_cone(&der.p_minus, &cfg.minus.ample_cone);
    (plus, minus)
}

/// Whether the span of `basis` (columns, in N coordinates) contains a point
/// of the open cone {sum lambda_i g_i : lambda_i > 0}.
fn subspace_meets_open_cone(basis: &IntMat, cone: &[Vec<BigInt>]) -> bool {
    if basis.cols() == 0 {
        return false;
    }
    let n = basis.rows();
    // square case: solve g lambda = v for each candidate +-v over the basis
    // columns and combinations; in general run exact Fourier-Motzkin on
    // the system expressing v in cone coordinates with all > 0.
    if cone.len() == n {
        let g = IntMat::from_fn(n, n, |i, j| cone[j][i].clone());
        if g.det().is_zero() {
            return false;
        }
        // candidates: for rank 1, the generator and its negation; higher
        // rank reduces to feasibility of a strict linear system
        if basis.cols() == 1 {
            for sign in [1i64, -1] {
                let v: Vec<BigInt> =
                    basis.column(0).iter().map(|x| x * BigInt::from(sign)).collect();
                if let Some(sol) = crate::mat::solve_rational(&g, &v) {
                    if sol.iter().all(|x| x.is_positive()) {
                        return true;
                    }
                }
            }
            return false;
        }
    }
    // general: find rational y with cone-coordinates of (basis . y) all > 0,
    // i.e. strict feasibility of M y > 0 where M = G^-1 basis (G square) or
    // of the homogeneous system via Fourier-Motzkin on half-spaces.
    let m = cone_coordinates(basis, cone);
    match m {
        Some(m) => fourier_motzkin_strict(&m),
        None => false,
    }
}

/// Rows of the constraint system: for y in Q^k, the i-th cone coordinate of
/// basis.y must be positive. Only available when the cone generators form a
/// basis of the rational span; otherwise None.
fn cone_coordinates(basis: &IntMat, cone: &[Vec<BigInt>]) -> Option<Vec<Vec<BigRational>>> {
    let n = basis.rows();
    if cone.len() != n {
        return None;
    }
    let g = IntMat::from_fn(n, n, |i, j| cone[j][i].clone());
    if g.det().is_zero() {
        return None;
    }
    let mut rows = Vec::new();
    for i in 0..n {
        // i-th row of G^-1 * basis
        let mut e = vec![BigInt::zero(); n];
        e[i] = BigInt::one();
        // solve G^T x = e_i; then row = x^T basis
        let x = crate::mat::solve_rational(&g.transpose(), &e)?;
        let row: Vec<BigRational> = (0..basis.cols())
            .map(|j| {
                (0..n)
                    .map(|r| &x[r] * &BigRational::from(basis[(r, j)].clone()))
                    .sum()
            })
            .collect();
        rows.push(row);
    }
    Some(rows)
}

/// Strict feasibility of {y : row . y > 0 for all rows} by Fourier-Motzkin
/// elimination over exact rationals.
fn fourier_motzkin_strict(rows: &[Vec<BigRational>]) -> bool {
    if rows.is_empty() {
        return true;
    }
    let k = rows[0].len();
    let mut system: Vec<Vec<BigRational>> = rows.to_vec();
    for var in (0..k).rev() {
        let mut lower = Vec::new(); // rows with positive coefficient on var
        let mut upper = Vec::new();
        let mut rest = Vec::new();
        for r in system {
            match r[var].cmp(&BigRational::zero()) {
                std::cmp::Ordering::Greater => lower.push(r),
                std::cmp::Ordering::Less => upper.push(r),
                std::cmp::Ordering::Equal => rest.push(r),
            }
        }
        // rows with positive coefficient impose lower bounds only: always
        // satisfiable by a large value, so they drop; pairs (lower, upper)
        // combine into var-free constraints
        for lo in &lower {
            for up in &upper {
                // lo: a y_var + f(y') > 0, up: -b y_var + g(y') > 0 with a,b > 0
                // => b f + a g > 0
                let a = lo[var].clone();
                let b = -up[var].clone();
                let mut combined = vec![BigRational::zero(); k];
                for j in 0..k {
                    if j == var {
                        continue;
                    }
                    combined[j] = &b * &lo[j] + &a * &up[j];
                }
                rest.push(combined);
            }
        }
        // upper rows with no lower partner: satisfiable by very negative var
        system = rest;
        // drop identically-zero rows, fail on rows that are all zero except
        // nothing (0 > 0)
        let mut next = Vec::new();
        for r in system {
            if r.iter().all(|x| x.is_zero()) {
                return false; // 0 > 0 unsatisfiable
            }
            next.push(r);
        }
        system = next;
    }
    true
}

/// A report entry from the gluing-block search.
#[derive(Clone, Debug)]
pub struct SearchHit {
    pub d: IntMat,
    pub config: Configuration,
}

/// All gluing blocks D with |D_ij| <= bound whose configuration assembles
/// (nondegenerate P of signature (2, rank-2)) and passes the cone check on
/// both sides, in lexicographic order of the entries of D. Completeness is
/// relative to the bound; callers must surface the bound used.
pub fn search_gluings(
    plus: &BuildingBlock,
    minus: &BuildingBlock,
    bound: i64,
) -> Vec<Configuration> {
    assert!(bound >= 0);
    let cells = plus.rank_n() * minus.rank_n();
    let mut out = Vec::new();
    let mut entries = vec![-bound; cells];
    loop {
        let d = IntMat::from_fn(plus.rank_n(), minus.rank_n(), |i, j| {
            BigInt::from(entries[i * minus.rank_n() + j])
        });
        if let Ok(cfg) = assemble_configuration(plus.clone(), minus.clone(), d) {
            let (cp, cm) = cone_check(&cfg);
            if cp && cm {
                out.push(cfg);
            }
        }
        // odometer
        let mut i = cells;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if entries[i] < bound {
                entries[i] += 1;
                for e in entries.iter_mut().skip(i + 1) {
                    *e = -bound;
                }
                break;
            }
        }
    }
}

/// Marked vectors of a family inside a Lambda lattice (coordinates in the
/// Lambda basis, which starts with the N basis).
#[derive(Clone, Debug)]
pub struct MarkedVectors {
    pub h: Vec<BigInt>,
    pub e: Option<Vec<BigInt>>,
    pub g: Option<Vec<BigInt>>,
}

impl MarkedVectors {
    /// Marked vectors of a family kind, padded to `dim` coordinates; the
    /// first two coordinates are the (G, H) basis of N for rank-2 kinds.
    pub fn for_kind(kind: &FamilyKind, dim: usize) -> Option<MarkedVectors> {
        let pad = |mut v: Vec<BigInt>| {
            v.resize(dim, BigInt::zero());
            v
        };
        match kind {
            FamilyKind::Rank1 => Some(MarkedVectors {
                h: pad(vec![BigInt::one()]),
                e: None,
                g: None,
            }),
            FamilyKind::BlowupOfRank1 { cut_k, .. } => Some(MarkedVectors {
                h: pad(vec![BigInt::zero(), BigInt::one()]),
                // E = kH - G
                e: Some(pad(vec![-BigInt::one(), BigInt::from(*cut_k)])),
                g: Some(pad(vec![BigInt::one(), BigInt::zero()])),
            }),
            FamilyKind::ProductP1P2 => Some(MarkedVectors {
                h: pad(vec![BigInt::zero(), BigInt::one()]),
                e: None,
                g: Some(pad(vec![BigInt::one(), BigInt::zero()])),
            }),
            FamilyKind::Unknown => None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HypothesisResult {
    pub rule: String,
    pub constraints: Vec<String>,
    pub passed: bool,
    pub witness: Option<Vec<i64>>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GenericityReport {
    pub family_id: String,
    pub side: String,
    pub rule_set: String,
    pub hypotheses: Vec<HypothesisResult>,
    pub passed: bool,
    pub notes: Vec<String>,
}

fn witness_to_i64(w: &[BigInt]) -> Vec<i64> {
    w.iter().map(|x| i64::try_from(x).expect("witness coordinates fit i64")).collect()
}

/// Evaluate the genericity checklist of a family over a Lambda lattice
/// carrying its marked vectors. An orthogonal configuration (Lambda equal
/// to N itself) short-circuits to a pass under the Beauville rule, which
/// covers every semi-Fano family.
pub fn genericity_check(
    block: &BuildingBlock,
    lambda: &IntegerLattice,
    family_id: &str,
    side: &str,
) -> GenericityReport {
    let mut notes = Vec::new();
    if lambda.rank() == block.n.rank() {
        // Lambda = N (the basis construction puts N first), so the
        // deformation family is (N, C)-generic outright
        debug_assert_eq!(lambda.gram(), block.n.gram());
        return GenericityReport {
            family_id: family_id.into(),
            side: side.into(),
            rule_set: "beauville".into(),
            hypotheses: vec![HypothesisResult {
                rule: "beauville".into(),
                constraints: vec![],
                passed: true,
                note: Some("orthogonal configuration: Lambda is the Picard lattice itself".into()),
                witness: None,
            }],
            passed: true,
            notes,
        };
    }
    let dim = lambda.rank();
    let marked = match &block.kind {
        // beyond the orthogonal case handled above, no checklist exists
        // for rank-1 families or unrecognized records
        FamilyKind::Rank1 | FamilyKind::Unknown => None,
        k => MarkedVectors::for_kind(k, dim),
    };
    let Some(marked) = marked else {
        return GenericityReport {
            family_id: family_id.into(),
            side: side.into(),
            rule_set: "none".into(),
            hypotheses: vec![HypothesisResult {
                rule: "no-applicable-rule".into(),
                constraints: vec![],
                passed: false,
                witness: None,
                note: Some(
                    "no genericity checklist is available for this family kind in a skew configuration"
                        .into(),
                ),
            }],
            passed: false,
            notes,
        };
    };
    let (sp, sm, sz) = lambda.signature();
    if !(sp == 1 && sz == 0 && sm == dim - 1) {
        return GenericityReport {
            family_id: family_id.into(),
            side: side.into(),
            rule_set: "structural".into(),
            hypotheses: vec![HypothesisResult {
                rule: "lambda-signature".into(),
                constraints: vec![],
                passed: false,
                witness: None,
                note: Some(format!("Lambda has signature ({sp}, {sm}, {sz}), need (1, rank-1)")),
            }],
            passed: false,
            notes,
        };
    }

    let mut hyps: Vec<(String, Vec<VectorConstraint>, Option<String>)> = Vec::new();
    let minus_two = BigInt::from(-2);
    match &block.kind {
        FamilyKind::BlowupOfRank1 { index, curve_d, .. } => {
            let h = marked.h.clone();
            let e = marked.e.clone().expect("blowup kinds carry E");
            let h_e = BigInt::from(*curve_d); // H.E = d
            debug_assert_eq!(lambda.pair(&h, &e), h_e);
            hyps.push((
                "very-ample-no-degree-2-isotropic".into(),
                vec![
                    VectorConstraint::PairingEquals { with: h.clone(), value: BigInt::from(2) },
                    VectorConstraint::NormEquals(BigInt::zero()),
                ],
                None,
            ));
            hyps.push((
                "very-ample-no-orthogonal-root".into(),
                vec![
                    VectorConstraint::PairingEquals { with: h.clone(), value: BigInt::zero() },
                    VectorConstraint::NormEquals(minus_two.clone()),
                ],
                None,
            ));
            if *index == 3 {
                // image must land on a quadric: no degree-3 elliptic pencil
                hyps.push((
                    "quadric-no-degree-3-isotropic".into(),
                    vec![
                        VectorConstraint::PairingEquals { with: h.clone(), value: BigInt::from(3) },
                        VectorConstraint::NormEquals(BigInt::zero()),
                    ],
                    None,
                ));
            }
            // exceptional class: irreducible (E^2 = -2) or nef (E^2 >= 0);
            // either way no root may meet E negatively among curves of
            // H-degree below H.E
            hyps.push((
                "exceptional-class-effective-obstruction".into(),
                vec![
                    VectorConstraint::PairingRange {
                        with: h.clone(),
                        lower: BigInt::zero(),
                        upper: h_e.clone(),
                    },
                    VectorConstraint::NormEquals(minus_two.clone()),
                    VectorConstraint::PairingLessThan { with: e.clone(), bound: BigInt::zero() },
                ],
                Some(
                    "adopted reading: E.D < 0 bounded by 0 < H.D < H.E (degree bound of a \
                     component of an effective class)"
                        .into(),
                ),
            ));
            let e2 = lambda.norm(&e);
            if e2 >= BigInt::from(2) {
                // not monogonal: no root with E.D = E^2/2 - 1; for such a
                // witness (E - D)^2 = 0 automatically, verified below
                hyps.push((
                    "exceptional-class-not-monogonal".into(),
                    vec![
                        VectorConstraint::NormEquals(minus_two.clone()),
                        VectorConstraint::PairingEquals {
                            with: e.clone(),
                            value: &e2 / BigInt::from(2) - BigInt::one(),
                        },
                    ],
                    None,
                ));
            }
        }
        FamilyKind::ProductP1P2 => {
            let g = marked.g.clone().expect("product kind carries G");
            let h = marked.h.clone();
            let gh: Vec<BigInt> = g.iter().zip(h.iter()).map(|(a, b)| a + b).collect();
            hyps.push((
                "very-ample-no-degree-2-isotropic".into(),
                vec![
                    VectorConstraint::PairingEquals { with: gh.clone(), value: BigInt::from(2) },
                    VectorConstraint::NormEquals(BigInt::zero()),
                ],
                None,
            ));
            hyps.push((
                "very-ample-no-orthogonal-root".into(),
                vec![
                    VectorConstraint::PairingEquals { with: gh.clone(), value: BigInt::zero() },
                    VectorConstraint::NormEquals(minus_two.clone()),
                ],
                None,
            ));
            hyps.push((
                "pencil-factor-nef".into(),
                vec![
                    VectorConstraint::PairingRange {
                        with: gh.clone(),
                        lower: BigInt::zero(),
                        upper: BigInt::from(3),
                    },
                    VectorConstraint::NormEquals(minus_two.clone()),
                    VectorConstraint::PairingLessThan { with: g.clone(), bound: BigInt::zero() },
                ],
                None,
            ));
            hyps.push((
                "plane-factor-nef".into(),
                vec![
                    VectorConstraint::PairingRange {
                        with: gh.clone(),
                        lower: BigInt::zero(),
                        upper: BigInt::from(5),
                    },
                    VectorConstraint::NormEquals(minus_two.clone()),
                    VectorConstraint::PairingLessThan { with: h.clone(), bound: BigInt::zero() },
                ],
                None,
            ));
        }
        FamilyKind::Rank1 | FamilyKind::Unknown => unreachable!("handled above"),
    }

    let mut results = Vec::new();
    let mut all_pass = true;
    for (rule, constraints, note) in hyps {
        let texts: Vec<String> = constraints.iter().map(|c| c.to_string()).collect();
        let (passed, witness, mut hyp_note) = match exists_violating_vector(lambda, &constraints) {
            Ok(None) => (true, None, None),
            Ok(Some(w)) => {
                if rule == "exceptional-class-not-monogonal" {
                    // (E - D)^2 = E^2 - 2 E.D + D^2 = 0 for any witness here
                    let e = marked.e.as_ref().unwrap();
                    let ed: Vec<BigInt> =
                        e.iter().zip(w.iter()).map(|(a, b)| a - b).collect();
                    assert!(lambda.norm(&ed).is_zero(), "monogonality witness must satisfy (E-D)^2 = 0");
                }
                (false, Some(witness_to_i64(&w)), None)
            }
            Err(e) => (false, None, Some(format!("search failed: {e}"))),
        };
        if let Some(n) = note {
            hyp_note = Some(match hyp_note {
                Some(existing) => format!("{existing}; {n}"),
                None => n,
            });
        }
        all_pass &= passed;
        results.push(HypothesisResult { rule, constraints: texts, passed, witness, note: hyp_note });
    }
    if matches!(block.kind, FamilyKind::BlowupOfRank1 { .. }) {
        notes.push(
            "the source checklist leaves the bound in the nefness condition blank; this report \
             uses E.D < 0 over 0 < H.D < H.E"
                .into(),
        );
    }
    GenericityReport {
        family_id: family_id.into(),
        side: side.into(),
        rule_set: format!("{:?}", block.kind),
        hypotheses: results,
        passed: all_pass,
        notes,
    }
}

/// Very-ampleness of a nef and big class H on a Lambda-polarized K3:
/// H^2 >= 4, H primitive, no isotropic class of H-degree 2, no root
/// orthogonal to H.
pub fn very_ample(lambda: &IntegerLattice, h: &[BigInt]) -> Result<bool, EnumError> {
    let h2 = lambda.norm(h);
    if h2 < BigInt::from(4) {
        return Ok(false);
    }
    if gd(h) != BigInt::one() {
        return Ok(false);
    }
    if lambda.rank() == 1 {
        // D = t * generator: H.D = t H^2 never 2 for H^2 >= 4; no roots
        return Ok(true);
    }
    let iso = exists_violating_vector(
        lambda,
        &[
            VectorConstraint::PairingEquals { with: h.to_vec(), value: BigInt::from(2) },
            VectorConstraint::NormEquals(BigInt::zero()),
        ],
    )?;
    if iso.is_some() {
        return Ok(false);
    }
    let root = exists_violating_vector(
        lambda,
        &[
            VectorConstraint::PairingEquals { with: h.to_vec(), value: BigInt::zero() },
            VectorConstraint::NormEquals(BigInt::from(-2)),
        ],
    )?;
    Ok(root.is_none())
}

/// Whether a class E with E.H > 0 is represented by a smooth curve, given
/// H very ample; dispatches on the sign of E^2.
pub fn smooth_representative(
    lambda: &IntegerLattice,
    e: &[BigInt],
    h: &[BigInt],
) -> Result<bool, EnumError> {
    let e2 = lambda.norm(e);
    let eh = lambda.pair(e, h);
    if !eh.is_positive() {
        return Ok(false);
    }
    let component_obstruction = exists_violating_vector(
        lambda,
        &[
            VectorConstraint::PairingRange {
                with: h.to_vec(),
                lower: BigInt::zero(),
                upper: eh.clone(),
            },
            VectorConstraint::NormEquals(BigInt::from(-2)),
            VectorConstraint::PairingLessThan { with: e.to_vec(), bound: BigInt::zero() },
        ],
    )?;
    if component_obstruction.is_some() {
        return Ok(false);
    }
    if e2 >= BigInt::from(2) {
        // monogonality: a root D with E.D = E^2/2 - 1 forces (E-D)^2 = 0
        let mono = exists_violating_vector(
            lambda,
            &[
                VectorConstraint::NormEquals(BigInt::from(-2)),
                VectorConstraint::PairingEquals {
                    with: e.to_vec(),
                    value: &e2 / BigInt::from(2) - BigInt::one(),
                },
            ],
        )?;
        if let Some(w) = &mono {
            let diff: Vec<BigInt> = e.iter().zip(w.iter()).map(|(a, b)| a - b).collect();
            assert!(lambda.norm(&diff).is_zero());
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::derive_block;
    use crate::report::shipped_catalog;

    pub(crate) fn block(id: &str) -> BuildingBlock {
        let f = shipped_catalog().into_iter().find(|f| f.id == id).unwrap();
        derive_block(&f)
    }

    fn d_mat(rows: &[Vec<i64>]) -> IntMat {
        IntMat::from_rows(rows)
    }

    #[test]
    fn perpendicular_row_one() {
        let cfg =
            assemble_configuration(block("Y5"), block("Y5"), d_mat(&[vec![0]])).unwrap();
        assert_eq!(cfg.kind, ConfigKind::Perpendicular);
        assert_eq!(
            cfg.p.gram(),
            &IntMat::from_rows(&[vec![18, 0], vec![0, 18]])
        );
        let der = derived_lattices(&cfg);
        assert_eq!(der.lambda_plus.gram(), &IntMat::from_rows(&[vec![18]]));
        assert_eq!(der.rank_nminus_cap_tplus, 1);
        assert_eq!(der.rank_nplus_cap_tminus, 1);
        assert_eq!(cone_check(&cfg), (true, true));
    }

    #[test]
    fn skew_row_three() {
        let d = d_mat(&[vec![1, -1], vec![-1, 1]]);
        let cfg = assemble_configuration(block("Y3"), block("Y3"), d).unwrap();
        assert_eq!(cfg.kind, ConfigKind::Skew);
        assert_eq!(
            cfg.p.gram(),
            &IntMat::from_rows(&[
                vec![2, 5, 1, -1],
                vec![5, 4, -1, 1],
                vec![1, -1, 2, 5],
                vec![-1, 1, 5, 4],
            ])
        );
        let der = derived_lattices(&cfg);
        assert_eq!(der.p_plus.column(0), vec![BigInt::from(1), BigInt::from(1)]);
        assert_eq!(der.p_minus.column(0), vec![BigInt::from(1), BigInt::from(1)]);
        assert_eq!(
            der.lambda_plus.gram(),
            &IntMat::from_rows(&[vec![2, 5, 16], vec![5, 4, -16], vec![16, -16, -272]])
        );
        assert_eq!(cone_check(&cfg), (true, true));
    }

    #[test]
    fn row_two_lambdas() {
        let d = d_mat(&[vec![1, -1], vec![-1, 1]]);
        let cfg = assemble_configuration(block("Y1"), block("Y3"), d).unwrap();
        let der = derived_lattices(&cfg);
        assert_eq!(
            der.lambda_plus.gram(),
            &IntMat::from_rows(&[vec![16, 12, 16], vec![12, 6, -16], vec![16, -16, -272]])
        );
        assert_eq!(
            der.lambda_minus.gram(),
            &IntMat::from_rows(&[vec![2, 5, 23], vec![5, 4, -23], vec![23, -23, -552]])
        );
    }

    #[test]
    fn row_four_derived_generators() {
        let d = d_mat(&[vec![2, -2], vec![-1, 1]]);
        let cfg = assemble_configuration(block("Y4"), block("Y2"), d).unwrap();
        let der = derived_lattices(&cfg);
        assert_eq!(der.p_plus.column(0), vec![BigInt::from(1), BigInt::from(2)]);
        assert_eq!(der.p_minus.column(0), vec![BigInt::from(1), BigInt::from(1)]);
        assert_eq!(
            der.lambda_plus.gram(),
            &IntMat::from_rows(&[vec![0, 3, 22], vec![3, 2, -11], vec![22, -11, -308]])
        );
        assert_eq!(
            der.lambda_minus.gram(),
            &IntMat::from_rows(&[vec![2, 8, 20], vec![8, 4, -20], vec![20, -20, -180]])
        );
        assert_eq!(cone_check(&cfg), (true, true));
    }

    #[test]
    fn degenerate_p_rejected() {
        // D = [[18, 0], [0, 0]]-style making P singular: for rank-1 blocks
        // D = [[18]] gives P = [[18, 18], [18, 18]]
        let err = assemble_configuration(block("Y5"), block("Y5"), d_mat(&[vec![18]]));
        assert!(matches!(err, Err(MatchError::DegenerateP)));
    }

    #[test]
    fn cone_rejects_negatives_and_zero() {
        // A = -G is outside the cone spanned by (G, H)
        let cone: Vec<Vec<BigInt>> =
            vec![vec![BigInt::one(), BigInt::zero()], vec![BigInt::zero(), BigInt::one()]];
        let neg = IntMat::from_rows(&[vec![-1], vec![0]]);
        // -(-G) = G is on the boundary (coefficient 0 on H), not interior
        assert!(!subspace_meets_open_cone(&neg, &cone));
        let zero = IntMat::zeros(2, 0);
        assert!(!subspace_meets_open_cone(&zero, &cone));
        let interior = IntMat::from_rows(&[vec![1], vec![2]]);
        assert!(subspace_meets_open_cone(&interior, &cone));
    }

    #[test]
    fn search_finds_the_table_gluings() {
        let hits = search_gluings(&block("Y5"), &block("Y5"), 3);
        assert!(hits.iter().any(|c| c.d.is_zero()));
        // only D = 0 passes the cone check for a pair of rank-1 blocks
        assert_eq!(hits.len(), 1);

        let hits = search_gluings(&block("Y3"), &block("Y3"), 2);
        let want = d_mat(&[vec![1, -1], vec![-1, 1]]);
        assert!(hits.iter().any(|c| c.d == want));

        let hits = search_gluings(&block("Y5"), &block("Y5"), 0);
        assert_eq!(hits.len(), 1);
    }

    #[test]
    fn genericity_passes_on_all_table_lambdas() {
        let configs = [
            ("Y5", "Y5", vec![vec![0]]),
            ("Y1", "Y3", vec![vec![1, -1], vec![-1, 1]]),
            ("Y3", "Y3", vec![vec![1, -1], vec![-1, 1]]),
            ("Y4", "Y2", vec![vec![2, -2], vec![-1, 1]]),
        ];
        for (p, m, d) in configs {
            let cfg = assemble_configuration(block(p), block(m), d_mat(&d)).unwrap();
            let der = derived_lattices(&cfg);
            let rp = genericity_check(&cfg.plus, &der.lambda_plus, p, "plus");
            assert!(rp.passed, "{p}/{m} plus side: {rp:?}");
            let rm = genericity_check(&cfg.minus, &der.lambda_minus, m, "minus");
            assert!(rm.passed, "{p}/{m} minus side: {rm:?}");
        }
    }

    #[test]
    fn beauville_shortcut_for_orthogonal() {
        let cfg = assemble_configuration(block("Y5"), block("Y5"), d_mat(&[vec![0]])).unwrap();
        let der = derived_lattices(&cfg);
        let rep = genericity_check(&cfg.plus, &der.lambda_plus, "Y5", "plus");
        assert!(rep.passed);
        assert_eq!(rep.rule_set, "beauville");
    }

    #[test]
    fn genericity_fails_with_witness() {
        // Lambda containing a root orthogonal to H: diag(4, -2) with marked
        // H = (1, 0) for the rank-1 kind is caught by the structural check;
        // use very_ample directly instead
        let lam = IntegerLattice::from_rows(&[vec![4, 0], vec![0, -2]]);
        let h = vec![BigInt::one(), BigInt::zero()];
        assert!(!very_ample(&lam, &h).unwrap());
    }

    #[test]
    fn very_ample_cases() {
        let lam = IntegerLattice::from_rows(&[vec![18]]);
        assert!(very_ample(&lam, &[BigInt::one()]).unwrap());
        let lam4 = IntegerLattice::from_rows(&[vec![4]]);
        assert!(!very_ample(&lam4, &[BigInt::from(2)]).unwrap());
    }

    #[test]
    fn smooth_representative_cases() {
        // diag(6, -2): roots are (0, +-1) and (+-1, +-2), all with H-degree
        // in {0, +-6}, so nothing obstructs inside 0 < H.D < 6
        let lam = IntegerLattice::from_rows(&[vec![6, 0], vec![0, -2]]);
        let h = vec![BigInt::one(), BigInt::zero()];
        // E^2 = 4 > 0: E.D over the roots takes values {+-2, +-10}, never
        // E^2/2 - 1 = 1, so E is nef and not monogonal
        let e = vec![BigInt::one(), BigInt::one()];
        assert_eq!(lam.norm(&e), BigInt::from(4));
        assert!(smooth_representative(&lam, &e, &h).unwrap());
        // a root with positive H-degree is irreducible here
        let root = vec![BigInt::one(), BigInt::from(2)];
        assert_eq!(lam.norm(&root), BigInt::from(-2));
        assert!(smooth_representative(&lam, &root, &h).unwrap());
        // E.H <= 0 is rejected outright
        let bad = vec![BigInt::zero(), BigInt::one()];
        assert!(!smooth_representative(&lam, &bad, &h).unwrap());
    }

    #[test]
    fn orthogonal_pushout_small_example() {
        // N+ = N- = diag(2, -2), shared N0 = [-2] embedded as the second
        // basis vector on both sides: P = diag(2, -2, 2), signature (2, 1)
        let mut zp = block("Y5");
        zp.n = IntegerLattice::from_rows(&[vec![2, 0], vec![0, -2]]);
        zp.anti_k = vec![BigInt::one(), BigInt::zero()];
        let zm = zp.clone();
        let n0 = IntegerLattice::from_rows(&[vec![-2]]);
        let j = IntMat::from_rows(&[vec![0], vec![1]]);
        let cfg = orthogonal_pushout(zp, zm, &n0, &j, &j).unwrap();
        assert_eq!(cfg.kind, ConfigKind::Orthogonal);
        assert_eq!(cfg.n0_rank, 1);
        assert_eq!(cfg.rank_p(), 3);
        assert_eq!(cfg.p.signature(), (2, 1, 0));
    }
}
