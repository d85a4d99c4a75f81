//! The K3 lattice L = U^3 + E8(-1)^2 in a fixed basis, primitive embeddings
//! of small even lattices into it, and orthogonal complements taken inside
//! it. The basis order is normative: three hyperbolic planes (e_i, f_i)
//! followed by two copies of E8(-1) in the root basis below, so embedding
//! matrices are reproducible bit for bit.

use crate::enumerate::definite_vectors_of_norm;
use crate::lattice::{IntegerLattice, LatticeEmbedding};
use crate::mat::{gcd_all, hnf_col, IntMat};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EmbedError {
    #[error("lattice is not even")]
    OddLattice,
    #[error("lattice is degenerate")]
    Degenerate,
    #[error(transparent)]
    Lattice(#[from] crate::lattice::LatticeError),
    #[error("rank {0} not supported (constructions cover rank <= 4)")]
    RankUnsupported(usize),
    #[error("lattice signature is not (2, rank-2)")]
    BadSignature,
    #[error("no primitive isometric embedding found by the vector search")]
    NoEmbeddingFound,
}

/// E8 Cartan matrix, Bourbaki node order (node 2 is the branch node).
pub(crate) fn e8_cartan_rows() -> Vec<Vec<i64>> {
    vec![
        vec![2, 0, -1, 0, 0, 0, 0, 0],
        vec![0, 2, 0, -1, 0, 0, 0, 0],
        vec![-1, 0, 2, -1, 0, 0, 0, 0],
        vec![0, -1, -1, 2, -1, 0, 0, 0],
        vec![0, 0, 0, -1, 2, -1, 0, 0],
        vec![0, 0, 0, 0, -1, 2, -1, 0],
        vec![0, 0, 0, 0, 0, -1, 2, -1],
        vec![0, 0, 0, 0, 0, 0, -1, 2],
    ]
}

pub fn e8_minus_gram() -> IntegerLattice {
    let rows: Vec<Vec<i64>> = e8_cartan_rows()
        .iter()
        .map(|r| r.iter().map(|x| -x).collect())
        .collect();
    IntegerLattice::from_rows(&rows)
}

/// The fixed 22x22 Gram of L = U^3 + E8(-1)^2.
pub fn k3_lattice() -> &'static IntegerLattice {
    static L: OnceLock<IntegerLattice> = OnceLock::new();
    L.get_or_init(|| {
        let mut g = IntMat::zeros(22, 22);
        for b in 0..3 {
            g[(2 * b, 2 * b + 1)] = BigInt::one();
            g[(2 * b + 1, 2 * b)] = BigInt::one();
        }
        let e8 = e8_cartan_rows();
        for b in 0..2 {
            let off = 6 + 8 * b;
            for i in 0..8 {
                for j in 0..8 {
                    g[(off + i, off + j)] = BigInt::from(-e8[i][j]);
                }
            }
        }
        let l = IntegerLattice::new(g);
        debug_assert!(l.is_even());
        debug_assert_eq!(l.det().abs(), BigInt::one());
        debug_assert_eq!(l.signature(), (3, 19, 0));
        l
    })
}

/// Nikulin's sufficient criterion for a primitive embedding of an even
/// nondegenerate lattice P into L: p+- <= (3,19) and either 2 rank(P) <= 22
/// or rank(P) + m(P) < 22, where m(P) counts minimal generators of P*/P.
/// `false` means the criterion is inconclusive, not that no embedding exists.
pub fn nikulin_embedding_exists(p: &IntegerLattice) -> Result<bool, EmbedError> {
    if !p.is_even() {
        return Err(EmbedError::OddLattice);
    }
    if !p.is_nondegenerate() {
        return Err(EmbedError::Degenerate);
    }
    let (pp, pm, _) = p.signature();
    if pp > 3 || pm > 19 {
        return Ok(false);
    }
    if 2 * p.rank() <= 22 {
        return Ok(true);
    }
    let m = p.discriminant_group()?.min_generators();
    Ok(p.rank() + m < 22)
}

/// A verified primitive isometric embedding of an even nondegenerate P of
/// rank <= 4 and signature (2, rank-2) into L.
///
/// Rank <= 3: basis vector b_i maps to e_i + sum_j a_ij f_j across the
/// hyperbolic planes with a_ii = G_ii/2, a_ij = G_ij for i < j, a_ji = 0;
/// the identity minor on the e-coordinates makes primitivity automatic.
/// Rank 4: after a basis change putting a vector of negative (even) norm
/// last, the first three embed as above carrying the fourth's pairings on
/// their f-coordinates, and the fourth lands in f-span + w for a primitive
/// w of the right norm found in E8(-1) by definite enumeration.
pub fn embed_primitively(p: &IntegerLattice) -> Result<LatticeEmbedding, EmbedError> {
    if !p.is_even() {
        return Err(EmbedError::OddLattice);
    }
    if !p.is_nondegenerate() {
        return Err(EmbedError::Degenerate);
    }
    let r = p.rank();
    if r > 4 {
        return Err(EmbedError::RankUnsupported(r));
    }
    if r >= 2 && p.signature() != (2, r - 2, 0) {
        return Err(EmbedError::BadSignature);
    }
    if r <= 1 && p.signature() != (r, 0, 0) {
        return Err(EmbedError::BadSignature);
    }
    let l = k3_lattice();
    if r <= 3 {
        let emb = gram_trick_matrix(p.gram(), r);
        let emb = LatticeEmbedding::new(p.clone(), l.clone(), emb)
            .expect("gram-trick embedding is isometric by construction");
        debug_assert!(emb.is_primitive());
        return Ok(emb);
    }

    // rank 4: move a negative-norm vector into the last basis slot
    let change = basis_change_negative_last(p).ok_or(EmbedError::NoEmbeddingFound)?;
    let g2 = &(&change.transpose() * p.gram()) * &change;
    let target = g2[(3, 3)].clone();
    debug_assert!(target.is_negative() && target.is_even());

    let e8m = e8_minus_gram();
    let candidates = definite_vectors_of_norm(&e8m, &target)
        .expect("E8(-1) is negative definite");
    for w in candidates.iter().filter(|w| gcd_all(w.iter()).is_one()) {
        let mut m = gram_trick_matrix(&g2, 3);
        // fourth column: pairings via f-coordinates, norm via w in the first E8(-1) block
        for j in 0..3 {
            m[(2 * j + 1, 3)] = g2[(j, 3)].clone();
        }
        for (i, wi) in w.iter().enumerate() {
            m[(6 + i, 3)] = wi.clone();
        }
        let back = invert_via_adjugate(&change);
        let emb_matrix = &m * &back;
        if let Ok(emb) = LatticeEmbedding::new(p.clone(), l.clone(), emb_matrix) {
            if emb.is_primitive() {
                return Ok(emb);
            }
        }
    }
    Err(EmbedError::NoEmbeddingFound)
}

/// Images of the first `r` basis vectors under the hyperbolic-plane trick,
/// as the first r columns of a 22 x max(r,3+use) matrix sized r (or 4 for
/// the hybrid construction, where the caller fills column 3).
fn gram_trick_matrix(gram: &IntMat, r: usize) -> IntMat {
    let cols = gram.rows();
    let mut m = IntMat::zeros(22, cols);
    for i in 0..r {
        m[(2 * i, i)] = BigInt::one();
        for j in 0..r {
            let a_ij = if i == j {
                gram[(i, i)].clone() / BigInt::from(2)
            } else if i < j {
                gram[(i, j)].clone()
            } else {
                BigInt::zero()
            };
            m[(2 * j + 1, i)] = a_ij;
        }
    }
    m
}

/// A unimodular basis change whose last column is a primitive vector of
/// negative norm, chosen with minimal |norm| over a growing coefficient box
/// (ties by lexicographic order) for determinism.
fn basis_change_negative_last(p: &IntegerLattice) -> Option<IntMat> {
    let r = p.rank();
    for radius in 1..=6i64 {
        let mut best: Option<(BigInt, Vec<BigInt>)> = None;
        let mut v = vec![0i64; r];
        enumerate_box(&mut v, 0, radius, &mut |coords: &[i64]| {
            let vec: Vec<BigInt> = coords.iter().map(|&x| BigInt::from(x)).collect();
            if gcd_all(vec.iter()) != BigInt::one() {
                return;
            }
            let norm = p.norm(&vec);
            if norm.is_negative() {
                let better = match &best {
                    None => true,
                    Some((bn, bv)) => norm.abs() < bn.abs() || (norm.abs() == bn.abs() && vec < *bv),
                };
                if better {
                    best = Some((norm.clone(), vec));
                }
            }
        });
        if let Some((_, v)) = best {
            return Some(extend_to_basis_last(&v));
        }
    }
    None
}

fn enumerate_box(v: &mut Vec<i64>, i: usize, radius: i64, f: &mut impl FnMut(&[i64])) {
    if i == v.len() {
        f(v);
        return;
    }
    for x in -radius..=radius {
        v[i] = x;
        enumerate_box(v, i + 1, radius, f);
    }
}

/// Unimodular matrix whose last column is the given primitive vector.
fn extend_to_basis_last(v: &[BigInt]) -> IntMat {
    let r = v.len();
    let col = IntMat::col_vector(v);
    // SNF of the column: u * col * v' = e_1 (primitive), so u^-1 e_1 = col
    let snf = crate::mat::smith_normal_form(&col);
    debug_assert!(snf.s[(0, 0)].is_one());
    let u_inv = invert_via_adjugate(&snf.u);
    // basis: v first, then the remaining columns of u^-1; rotate v to the back
    let mut b = IntMat::zeros(r, r);
    for i in 0..r {
        b[(i, r - 1)] = v[i].clone();
        for j in 1..r {
            b[(i, j - 1)] = u_inv[(i, j)].clone();
        }
    }
    debug_assert_eq!(b.det().abs(), BigInt::one());
    b
}

fn invert_via_adjugate(m: &IntMat) -> IntMat {
    let n = m.rows();
    let det = m.det();
    assert!(det.abs().is_one(), "matrix must be unimodular");
    let mut adj = IntMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut sub = IntMat::zeros(n - 1, n - 1);
            for (si, ri) in (0..n).filter(|&r| r != i).enumerate() {
                for (sj, cj) in (0..n).filter(|&c| c != j).enumerate() {
                    sub[(si, sj)] = m[(ri, cj)].clone();
                }
            }
            let sign = if (i + j) % 2 == 0 { BigInt::one() } else { -BigInt::one() };
            adj[(j, i)] = sign * sub.det();
        }
    }
    if det.is_negative() {
        adj.neg()
    } else {
        adj
    }
}

/// Orthogonal complement in L of the image of a sublattice of P (given by
/// basis columns in P-coordinates) under an embedding P -> L. Primitive by
/// construction.
pub fn transcendental(emb_p: &LatticeEmbedding, n_side: &IntMat) -> LatticeEmbedding {
    let image = emb_p.matrix() * n_side;
    let sub = LatticeEmbedding::sublattice(emb_p.codomain(), &hnf_col(&image));
    sub.orthogonal_complement()
}
