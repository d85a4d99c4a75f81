//! Complete enumeration of lattice vectors under norm and pairing
//! constraints. The engine is an exact Fincke-Pohst walk: completion of
//! squares over the rationals with integer ceiling/floor bounds at every
//! level, so there are no floating-point false negatives and completeness
//! is unconditional.

use crate::lattice::IntegerLattice;
use crate::mat::{gcd_all, smith_normal_form, solve_rational, IntMat};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EnumError {
    #[error("lattice is neither positive nor negative definite")]
    IndefiniteLattice,
    #[error("lattice signature is not (1, rank-1)")]
    BadSignature,
    #[error("axis vector has nonpositive norm")]
    NonpositiveAxis,
    #[error("no pairing constraint against a positive-norm vector; search region is infinite")]
    UnboundedSearch,
    #[error("malformed constraint set: {0}")]
    BadConstraints(&'static str),
}

/// All v in the lattice with v.v = n, for a definite lattice (positive
/// definite with n >= 0, or negative definite with n <= 0). The output is
/// closed under negation and sorted lexicographically.
pub fn definite_vectors_of_norm(
    lat: &IntegerLattice,
    n: &BigInt,
) -> Result<Vec<Vec<BigInt>>, EnumError> {
    let r = lat.rank();
    if r == 0 {
        return Ok(if n.is_zero() { vec![vec![]] } else { vec![] });
    }
    let (p, m, z) = lat.signature();
    let (form, target) = if p == r && z == 0 {
        if n.is_negative() {
            return Ok(vec![]);
        }
        (lat.gram().clone(), n.clone())
    } else if m == r && z == 0 {
        if n.is_positive() {
            return Ok(vec![]);
        }
        (lat.gram().neg(), -n.clone())
    } else {
        return Err(EnumError::IndefiniteLattice);
    };
    let a = form.to_rational();
    let center = vec![BigRational::zero(); r];
    let mut out = ellipsoid_points(&a, &center, &BigRational::from(target));
    out.sort();
    Ok(out)
}

/// All D with v.D = c and D.D = n in a lattice of signature (1, rank-1)
/// with v.v > 0: the solutions of the linear Diophantine equation form an
/// affine sublattice D0 + ker, ker = v-perp is negative definite, and the
/// remaining quadratic condition cuts out a finite ellipsoid.
pub fn solve_pairing_norm(
    lat: &IntegerLattice,
    v: &[BigInt],
    c: &BigInt,
    n: &BigInt,
) -> Result<Vec<Vec<BigInt>>, EnumError> {
    let r = lat.rank();
    assert_eq!(v.len(), r);
    if lat.signature() != (1, r - 1, 0) {
        return Err(EnumError::BadSignature);
    }
    if !lat.norm(v).is_positive() {
        return Err(EnumError::NonpositiveAxis);
    }
    let w = lat.gram().mul_vec(v);
    let g = gcd_all(w.iter());
    if !(c % &g).is_zero() {
        return Ok(vec![]);
    }
    // particular solution of w.x = c via the SNF of w as a 1 x r matrix
    let w_row = IntMat::from_fn(1, r, |_, j| w[j].clone());
    let snf = smith_normal_form(&w_row);
    debug_assert_eq!(snf.s[(0, 0)], g);
    let scale = (c / &g) * if snf.u[(0, 0)].is_negative() { -BigInt::one() } else { BigInt::one() };
    let d0: Vec<BigInt> = (0..r).map(|i| &snf.v[(i, 0)] * &scale).collect();
    debug_assert_eq!(
        w.iter().zip(d0.iter()).map(|(a, b)| a * b).sum::<BigInt>(),
        c.clone()
    );
    let kernel = w_row.kernel();
    let k = kernel.cols();
    let d0_norm = lat.norm(&d0);
    if k == 0 {
        return Ok(if d0_norm == *n { vec![d0] } else { vec![] });
    }
    // (d0 + K y)^T G (d0 + K y) = n, with K^T G K negative definite
    let a_neg = &(&kernel.transpose() * lat.gram()) * &kernel;
    let a_pos = a_neg.neg();
    let g_d0 = lat.gram().mul_vec(&d0);
    let b: Vec<BigInt> = (0..k)
        .map(|i| -(0..r).map(|j| &kernel[(j, i)] * &g_d0[j]).sum::<BigInt>())
        .collect();
    // y^T A' y + 2 b^T y = d0_norm - n with A' = -K^T G K positive definite;
    // completing the square centers the ellipsoid at -A'^-1 b
    let x = solve_rational(&a_pos, &b).expect("definite form is invertible");
    let radius2: BigRational = b
        .iter()
        .zip(x.iter())
        .map(|(bi, xi)| BigRational::from(bi.clone()) * xi)
        .sum::<BigRational>()
        + BigRational::from(&d0_norm - n);
    if radius2.is_negative() {
        return Ok(vec![]);
    }
    let center: Vec<BigRational> = x.iter().map(|r| -r.clone()).collect();
    let mut out: Vec<Vec<BigInt>> = ellipsoid_points(&a_pos.to_rational(), &center, &radius2)
        .into_iter()
        .map(|y| {
            (0..r)
                .map(|i| &d0[i] + (0..k).map(|j| &kernel[(i, j)] * &y[j]).sum::<BigInt>())
                .collect()
        })
        .collect();
    for d in &out {
        debug_assert_eq!(lat.pair(v, d), *c);
        debug_assert_eq!(lat.norm(d), *n);
    }
    out.sort();
    Ok(out)
}

/// One atom of a genericity hypothesis over a lattice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VectorConstraint {
    NormEquals(BigInt),
    PairingEquals { with: Vec<BigInt>, value: BigInt },
    /// lower < pairing < upper (both strict)
    PairingRange { with: Vec<BigInt>, lower: BigInt, upper: BigInt },
    PairingLessThan { with: Vec<BigInt>, bound: BigInt },
    PairingGreaterThan { with: Vec<BigInt>, bound: BigInt },
}

impl VectorConstraint {
    fn holds(&self, lat: &IntegerLattice, d: &[BigInt]) -> bool {
        match self {
            VectorConstraint::NormEquals(n) => lat.norm(d) == *n,
            VectorConstraint::PairingEquals { with, value } => lat.pair(with, d) == *value,
            VectorConstraint::PairingRange { with, lower, upper } => {
                let p = lat.pair(with, d);
                *lower < p && p < *upper
            }
            VectorConstraint::PairingLessThan { with, bound } => lat.pair(with, d) < *bound,
            VectorConstraint::PairingGreaterThan { with, bound } => lat.pair(with, d) > *bound,
        }
    }
}

impl std::fmt::Display for VectorConstraint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let vec = |v: &[BigInt]| {
            let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            format!("({})", parts.join(","))
        };
        match self {
            VectorConstraint::NormEquals(n) => write!(f, "D^2 = {n}"),
            VectorConstraint::PairingEquals { with, value } => {
                write!(f, "{}.D = {value}", vec(with))
            }
            VectorConstraint::PairingRange { with, lower, upper } => {
                write!(f, "{lower} < {}.D < {upper}", vec(with))
            }
            VectorConstraint::PairingLessThan { with, bound } => {
                write!(f, "{}.D < {bound}", vec(with))
            }
            VectorConstraint::PairingGreaterThan { with, bound } => {
                write!(f, "{}.D > {bound}", vec(with))
            }
        }
    }
}

/// Search for a witness D satisfying all constraints. The bounding
/// constraint is the first pairing equality or range against a vector of
/// positive norm; all other atoms act as filters. Returns the first witness
/// in deterministic order, or None when the (finite, complete) search is
/// empty.
pub fn exists_violating_vector(
    lat: &IntegerLattice,
    constraints: &[VectorConstraint],
) -> Result<Option<Vec<BigInt>>, EnumError> {
    let norms: Vec<&BigInt> = constraints
        .iter()
        .filter_map(|c| match c {
            VectorConstraint::NormEquals(n) => Some(n),
            _ => None,
        })
        .collect();
    if norms.len() != 1 {
        return Err(EnumError::BadConstraints("exactly one norm_equals atom is required"));
    }
    let n = norms[0];
    let bounding = constraints.iter().enumerate().find_map(|(i, c)| match c {
        VectorConstraint::PairingEquals { with, .. }
        | VectorConstraint::PairingRange { with, .. }
            if lat.norm(with).is_positive() =>
        {
            Some((i, c))
        }
        _ => None,
    });
    let Some((bi, bounding)) = bounding else {
        return Err(EnumError::UnboundedSearch);
    };
    let (axis, values): (&Vec<BigInt>, Vec<BigInt>) = match bounding {
        VectorConstraint::PairingEquals { with, value } => (with, vec![value.clone()]),
        VectorConstraint::PairingRange { with, lower, upper } => {
            let mut vals = Vec::new();
            let mut t = lower + BigInt::one();
            while t < *upper {
                vals.push(t.clone());
                t += BigInt::one();
            }
            (with, vals)
        }
        _ => unreachable!(),
    };
    for t in values {
        for d in solve_pairing_norm(lat, axis, &t, n)? {
            let ok = constraints
                .iter()
                .enumerate()
                .all(|(i, c)| i == bi || c.holds(lat, &d));
            if ok {
                return Ok(Some(d));
            }
        }
    }
    Ok(None)
}

/// All integer points y with (y - center)^T A (y - center) = target, for A
/// positive definite with rational entries. Exact completion of squares;
/// bounds at each level come from integer square roots of rationals.
fn ellipsoid_points(
    a: &[Vec<BigRational>],
    center: &[BigRational],
    target: &BigRational,
) -> Vec<Vec<BigInt>> {
    let n = a.len();
    if target.is_negative() {
        return vec![];
    }
    // Q(x) = sum_i d[i] * (x_i + sum_{j>i} l[i][j] x_j)^2
    let mut q: Vec<Vec<BigRational>> = a.to_vec();
    let mut d = vec![BigRational::zero(); n];
    let mut l = vec![vec![BigRational::zero(); n]; n];
    for i in 0..n {
        d[i] = q[i][i].clone();
        assert!(d[i].is_positive(), "form must be positive definite");
        for j in i + 1..n {
            l[i][j] = &q[i][j] / &d[i];
        }
        for r in i + 1..n {
            for c in i + 1..n {
                let t = &q[r][i] * &q[i][c] / &d[i];
                q[r][c] = &q[r][c] - &t;
            }
        }
    }
    let mut out = Vec::new();
    let mut x = vec![BigInt::zero(); n];
    walk(n, &d, &l, center, target.clone(), &mut x, &mut out);
    out
}

fn walk(
    level: usize,
    d: &[BigRational],
    l: &[Vec<BigRational>],
    center: &[BigRational],
    budget: BigRational,
    x: &mut [BigInt],
    out: &mut Vec<Vec<BigInt>>,
) {
    if budget.is_negative() {
        return;
    }
    if level == 0 {
        if budget.is_zero() {
            out.push(x.to_vec());
        }
        return;
    }
    let i = level - 1;
    // offset o = -c_i + sum_{j>i} l_ij (x_j - c_j); then d_i (x_i + o)^2 <= budget
    let mut o = -center[i].clone();
    for j in level..x.len() {
        o = o + &l[i][j] * (BigRational::from(x[j].clone()) - &center[j]);
    }
    let alpha = &budget / &d[i];
    let lo = ceil_minus_sqrt(&o, &alpha);
    let hi = floor_plus_sqrt(&o, &alpha);
    let mut xi = lo;
    while xi <= hi {
        let term = {
            let s = BigRational::from(xi.clone()) + &o;
            &s * &s * &d[i]
        };
        x[i] = xi.clone();
        walk(i, d, l, center, &budget - term, x, out);
        xi += BigInt::one();
    }
}

/// Largest integer k with k <= -o + sqrt(alpha), alpha >= 0.
fn floor_plus_sqrt(o: &BigRational, alpha: &BigRational) -> BigInt {
    let pred = |k: &BigInt| {
        let s = BigRational::from(k.clone()) + o;
        !s.is_positive() || &(&s * &s) <= alpha
    };
    let mut k = (-o + sqrt_upper(alpha)).floor().to_integer() + 1;
    while !pred(&k) {
        k -= 1;
    }
    k
}

/// Smallest integer k with k >= -o - sqrt(alpha), alpha >= 0.
fn ceil_minus_sqrt(o: &BigRational, alpha: &BigRational) -> BigInt {
    let pred = |k: &BigInt| {
        let s = BigRational::from(k.clone()) + o;
        !s.is_negative() || &(&s * &s) <= alpha
    };
    let mut k = (-o - sqrt_upper(alpha)).ceil().to_integer() - 1;
    while !pred(&k) {
        k += 1;
    }
    k
}

/// A rational upper bound for sqrt(alpha): sqrt(p/q) <= (isqrt(p*q) + 1)/q.
fn sqrt_upper(alpha: &BigRational) -> BigRational {
    debug_assert!(!alpha.is_negative());
    let p = alpha.numer();
    let q = alpha.denom();
    let s = (p * q).sqrt() + BigInt::one();
    BigRational::new(s, q.clone())
}
