//! Integer lattices: a free abelian group with an integer symmetric bilinear
//! form, plus embeddings, orthogonal complements, quotients, saturation and
//! primitivity. Signatures are computed by exact symmetric reduction over
//! the rationals, never by floating-point eigenvalues.

use crate::mat::{gcd_all, hnf_col, smith_normal_form, IntMat};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LatticeError {
    #[error("gram matrix of a degenerate lattice (det = 0)")]
    DegenerateLattice,
    #[error("embedding matrix incompatible with the two gram matrices")]
    IncompatibleGram,
    #[error("embeddings do not share a codomain")]
    CodomainMismatch,
}

/// A finitely generated free abelian group with an integer-valued symmetric
/// bilinear form given by its Gram matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct IntegerLattice {
    gram: IntMat,
    labels: Option<Vec<String>>,
}

impl IntegerLattice {
    pub fn new(gram: IntMat) -> Self {
        assert!(gram.is_symmetric(), "gram matrix must be symmetric");
        IntegerLattice { gram, labels: None }
    }

    pub fn with_labels(gram: IntMat, labels: Vec<String>) -> Self {
        assert_eq!(gram.rows(), labels.len());
        let mut l = Self::new(gram);
        l.labels = Some(labels);
        l
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        Self::new(IntMat::from_rows(rows))
    }

    pub fn gram(&self) -> &IntMat {
        &self.gram
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn rank(&self) -> usize {
        self.gram.rows()
    }

    pub fn det(&self) -> BigInt {
        self.gram.det()
    }

    pub fn is_nondegenerate(&self) -> bool {
        !self.det().is_zero()
    }

    /// Even <=> every diagonal entry is even.
    pub fn is_even(&self) -> bool {
        (0..self.rank()).all(|i| self.gram[(i, i)].is_even())
    }

    /// Pairing of two vectors in basis coordinates.
    pub fn pair(&self, a: &[BigInt], b: &[BigInt]) -> BigInt {
        let gb = self.gram.mul_vec(b);
        a.iter().zip(gb.iter()).map(|(x, y)| x * y).sum()
    }

    pub fn norm(&self, a: &[BigInt]) -> BigInt {
        self.pair(a, a)
    }

    /// (p+, p-, p0): counts of positive, negative and zero diagonal entries
    /// after exact symmetric Gaussian reduction over Q, with hyperbolic 2x2
    /// pivots when the diagonal vanishes.
    pub fn signature(&self) -> (usize, usize, usize) {
        let mut m = self.gram.to_rational();
        let mut alive: Vec<usize> = (0..self.rank()).collect();
        let (mut p, mut n, mut z) = (0usize, 0usize, 0usize);
        while !alive.is_empty() {
            if let Some(pos) = alive.iter().position(|&i| !m[i][i].is_zero()) {
                let k = alive[pos];
                if m[k][k].is_positive() {
                    p += 1;
                } else {
                    n += 1;
                }
                alive.remove(pos);
                let d = m[k][k].clone();
                for &i in &alive {
                    for &j in &alive {
                        let t = &m[i][k] * &m[k][j] / &d;
                        m[i][j] = &m[i][j] - &t;
                    }
                }
                continue;
            }
            // all diagonal entries zero; a nonzero pair spans a hyperbolic plane
            let mut pair = None;
            'outer: for (ai, &i) in alive.iter().enumerate() {
                for (aj, &j) in alive.iter().enumerate().skip(ai + 1) {
                    if !m[i][j].is_zero() {
                        pair = Some((ai, aj, i, j));
                        break 'outer;
                    }
                }
            }
            let Some((ai, aj, i, j)) = pair else {
                z += alive.len();
                break;
            };
            p += 1;
            n += 1;
            alive.remove(aj);
            alive.remove(ai);
            let a = m[i][j].clone();
            let coef: Vec<(usize, BigRational, BigRational)> = alive
                .iter()
                .map(|&k| (k, &m[k][j] / &a, &m[k][i] / &a))
                .collect();
            for &(k, ref alpha_k, ref beta_k) in &coef {
                for &(l, ref alpha_l, ref beta_l) in &coef {
                    let mut t = m[k][l].clone();
                    t = t - alpha_l * &m[k][i] - beta_l * &m[k][j];
                    t = t - alpha_k * &m[i][l] - beta_k * &m[j][l];
                    t = t + (alpha_k * beta_l + beta_k * alpha_l) * &a;
                    m[k][l] = t;
                }
            }
        }
        (p, n, z)
    }

    /// Invariant factors of coker(gram); its order is |det|.
    pub fn discriminant_group(&self) -> Result<FinAbGroup, LatticeError> {
        if !self.is_nondegenerate() {
            return Err(LatticeError::DegenerateLattice);
        }
        let snf = smith_normal_form(&self.gram);
        Ok(FinAbGroup::new(snf.factors(), 0))
    }

    /// Direct orthogonal sum.
    pub fn direct_sum(&self, other: &IntegerLattice) -> IntegerLattice {
        let za = IntMat::zeros(self.rank(), other.rank());
        let zb = IntMat::zeros(other.rank(), self.rank());
        IntegerLattice::new(IntMat::block2(&self.gram, &za, &zb, &other.gram))
    }
}

impl std::fmt::Debug for IntegerLattice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "IntegerLattice{:?}", self.gram)
    }
}

/// An isometric map of lattices: `matrix` sends domain basis vectors to
/// codomain coordinates, and pulls the codomain form back to the domain form.
#[derive(Clone, PartialEq, Eq)]
pub struct LatticeEmbedding {
    domain: IntegerLattice,
    codomain: IntegerLattice,
    matrix: IntMat,
}

impl LatticeEmbedding {
    pub fn new(
        domain: IntegerLattice,
        codomain: IntegerLattice,
        matrix: IntMat,
    ) -> Result<Self, LatticeError> {
        if matrix.rows() != codomain.rank() || matrix.cols() != domain.rank() {
            return Err(LatticeError::IncompatibleGram);
        }
        let pulled = &(&matrix.transpose() * codomain.gram()) * &matrix;
        if &pulled != domain.gram() {
            return Err(LatticeError::IncompatibleGram);
        }
        if domain.is_nondegenerate() && matrix.rank() != domain.rank() {
            return Err(LatticeError::IncompatibleGram);
        }
        Ok(LatticeEmbedding { domain, codomain, matrix })
    }

    /// Sublattice of `codomain` spanned by the given coordinate columns,
    /// with the induced form.
    pub fn sublattice(codomain: &IntegerLattice, basis: &IntMat) -> Self {
        assert_eq!(basis.rows(), codomain.rank());
        let gram = &(&basis.transpose() * codomain.gram()) * basis;
        LatticeEmbedding {
            domain: IntegerLattice::new(gram),
            codomain: codomain.clone(),
            matrix: basis.clone(),
        }
    }

    pub fn domain(&self) -> &IntegerLattice {
        &self.domain
    }

    pub fn codomain(&self) -> &IntegerLattice {
        &self.codomain
    }

    pub fn matrix(&self) -> &IntMat {
        &self.matrix
    }

    /// Saturated sublattice orthogonal to the image, with induced form;
    /// always primitive in the codomain.
    pub fn orthogonal_complement(&self) -> LatticeEmbedding {
        // {x : (image basis)^T G x = 0}
        let pairings = &self.matrix.transpose() * self.codomain.gram();
        let kernel = pairings.kernel();
        LatticeEmbedding::sublattice(&self.codomain, &kernel)
    }

    /// Free rank and torsion of codomain-group / image.
    pub fn quotient(&self) -> (usize, FinAbGroup) {
        let snf = smith_normal_form(&self.matrix);
        let free = self.codomain.rank() - snf.rank();
        (free, FinAbGroup::new(snf.factors(), 0))
    }

    /// True iff the quotient by the image is torsion-free.
    pub fn is_primitive(&self) -> bool {
        self.quotient().1.is_trivial()
    }

    /// Primitive closure of the image: same rational span, saturated.
    pub fn saturation(&self) -> LatticeEmbedding {
        let snf = smith_normal_form(&self.matrix);
        let r = snf.rank();
        // matrix = u^-1 s v^-1, so the saturation is spanned by the first r
        // columns of u^-1; obtain u^-1 as the kernel-free solve u * x = e_i
        let u_inv = invert_unimodular(&snf.u);
        let basis = u_inv.submatrix(0..u_inv.rows(), 0..r);
        LatticeEmbedding::sublattice(&self.codomain, &hnf_col(&basis))
    }
}

impl std::fmt::Debug for LatticeEmbedding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "LatticeEmbedding{:?}", self.matrix)
    }
}

/// Sublattice generated by both images; basis canonicalized by column HNF.
pub fn sublattice_sum(
    a: &LatticeEmbedding,
    b: &LatticeEmbedding,
) -> Result<LatticeEmbedding, LatticeError> {
    if a.codomain() != b.codomain() {
        return Err(LatticeError::CodomainMismatch);
    }
    let joined = a.matrix().hcat(b.matrix());
    Ok(LatticeEmbedding::sublattice(a.codomain(), &hnf_col(&joined)))
}

fn invert_unimodular(u: &IntMat) -> IntMat {
    let n = u.rows();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![BigInt::zero(); n];
        e[j] = BigInt::one();
        let x = crate::mat::solve_rational(u, &e).expect("unimodular matrix is invertible");
        cols.push(
            x.into_iter()
                .map(|r| {
                    assert!(r.is_integer());
                    r.to_integer()
                })
                .collect::<Vec<_>>(),
        );
    }
    IntMat::from_fn(n, n, |i, j| cols[j][i].clone())
}

/// A finitely generated abelian group in invariant-factor form
/// d1 | d2 | ... (factors equal to 1 omitted) plus a free rank.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FinAbGroup {
    invariant_factors: Vec<BigInt>,
    free_rank: usize,
}

impl FinAbGroup {
    pub fn new(factors: Vec<BigInt>, free_rank: usize) -> Self {
        let invariant_factors: Vec<BigInt> =
            factors.into_iter().filter(|d| !d.is_one()).collect();
        for w in invariant_factors.windows(2) {
            assert!((&w[1] % &w[0]).is_zero(), "invariant factors must form a chain");
        }
        FinAbGroup { invariant_factors, free_rank }
    }

    pub fn trivial() -> Self {
        FinAbGroup { invariant_factors: vec![], free_rank: 0 }
    }

    pub fn invariant_factors(&self) -> &[BigInt] {
        &self.invariant_factors
    }

    pub fn free_rank(&self) -> usize {
        self.free_rank
    }

    pub fn is_trivial(&self) -> bool {
        self.invariant_factors.is_empty() && self.free_rank == 0
    }

    /// Order of the torsion part.
    pub fn torsion_order(&self) -> BigInt {
        self.invariant_factors.iter().product()
    }

    /// Minimal number of generators of the torsion part (factors > 1).
    pub fn min_generators(&self) -> usize {
        self.invariant_factors.len()
    }
}

impl std::fmt::Display for FinAbGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts: Vec<String> =
            self.invariant_factors.iter().map(|d| format!("Z/{d}")).collect();
        if self.free_rank > 0 {
            parts.push(format!("Z^{}", self.free_rank));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Greatest divisor: gcd of the coordinates, 0 for the zero vector.
pub fn gd(v: &[BigInt]) -> BigInt {
    gcd_all(v.iter())
}


/// Rank and torsion of the quotient of one sublattice by another contained
/// in it: coordinates of `sub`'s basis in `ambient_sub`'s basis are solved
/// exactly, then reduced by Smith normal form.
pub fn mat_quotient_of(
    ambient_sub: &LatticeEmbedding,
    sub: &LatticeEmbedding,
) -> (usize, FinAbGroup) {
    let cols = (0..sub.matrix().cols())
        .map(|j| {
            let col = sub.matrix().column(j);
            let x = crate::mat::solve_rational(ambient_sub.matrix(), &col)
                .expect("sub must be contained in ambient_sub");
            x.into_iter()
                .map(|r| {
                    assert!(r.is_integer(), "sub must be contained in ambient_sub over Z");
                    r.to_integer()
                })
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>();
    let coords = IntMat::from_fn(ambient_sub.matrix().cols(), cols.len(), |i, j| cols[j][i].clone());
    let snf = smith_normal_form(&coords);
    let free = coords.rows() - snf.rank();
    (free, FinAbGroup::new(snf.factors(), 0))
}
