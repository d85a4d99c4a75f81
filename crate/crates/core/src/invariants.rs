//! The homotopy invariants of a twisted connected sum built from a
//! configuration of two building blocks: Betti numbers, torsion flags, the
//! divisibility m of the second Chern class, the boundary-defect residues
//! nu (mod 48) and xi (mod 3 lcm(m,4)), and the generalized Eells-Kuiper
//! invariant mu = (xi - 7 nu)/12.
//!
//! The coboundary W glues the two blocks over the K3 fiber, so
//! chi(W) = chi(Z+) + chi(Z-) - 24, sigma(W) = 0, c1(W) c3(W) =
//! chi(Z+) + chi(Z-), c1(W)^2 c2(W) = 48 and c1(W)^4 = 0. The only term
//! that needs real work is the relative self-pairing of
//! u = c2(W) - m sigma, computed through the pairing
//! flat_{+-} = restriction of the P-form mapping N_{+-} into the dual of
//! the other side; m itself is gcd(m+, m-) with m_{+-} the divisibility of
//! c2(Z_{+-}) modulo the image of flat.

use crate::k3::{embed_primitively, transcendental, EmbedError};
use crate::lattice::{sublattice_sum, FinAbGroup, LatticeEmbedding};
use crate::mat::{gcd_all, smith_normal_form, solve_rational, IntMat};
use crate::matching::{derived_lattices, Configuration};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InvariantError {
    #[error("rational residue {0} is not congruent to an integer mod {1}")]
    NonIntegralResidue(String, String),
    #[error("inconsistent residues: {0}")]
    Inconsistent(String),
    #[error("no integral lift exists: {0}")]
    LiftNotFound(String),
    #[error("the flat pairing cannot express the reduced class: {0}")]
    SingularPairing(String),
    #[error("outside the supported scope: {0}")]
    ScopeError(String),
    #[error(transparent)]
    Embed(#[from] EmbedError),
}

/// A residue class value mod modulus, normalized into [0, modulus).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Residue {
    value: BigInt,
    modulus: BigInt,
}

impl Residue {
    pub fn new(value: BigInt, modulus: BigInt) -> Self {
        assert!(modulus >= BigInt::one());
        Residue { value: value.mod_floor(&modulus), modulus }
    }

    pub fn value(&self) -> &BigInt {
        &self.value
    }

    pub fn modulus(&self) -> &BigInt {
        &self.modulus
    }

    /// The modulus-1 case: every value is congruent.
    pub fn is_vacuous(&self) -> bool {
        self.modulus.is_one()
    }

    pub fn negated(&self) -> Residue {
        Residue::new(-self.value.clone(), self.modulus.clone())
    }
}

impl std::fmt::Display for Residue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_vacuous() {
            write!(f, "vacuous")
        } else {
            write!(f, "{} (mod {})", self.value, self.modulus)
        }
    }
}

/// Full invariant record of one twisted connected sum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TcsInvariants {
    pub b2: usize,
    pub b3: BigInt,
    pub torsion_free: bool,
    /// greatest divisor of c2(M); an even divisor of 24 here
    pub m: BigInt,
    pub m_tilde: BigInt,
    pub m_hat: BigInt,
    pub nu: Residue,
    pub xi: Residue,
    pub mu: Residue,
    pub chi_w: BigInt,
    pub sigma_w: BigInt,
}

/// (b2, b3): b2 counts the shared polarization directions; b3 adds the
/// lattice terms 22 - rank(P) + rank(N- cap T+) + rank(N+ cap T-) to the
/// blocks' odd cohomology and the one surviving fiber-kernel direction.
pub fn betti(cfg: &Configuration) -> (usize, BigInt) {
    let der = derived_lattices(cfg);
    let lattice_part = BigInt::from(22 - cfg.rank_p() as i64)
        + BigInt::from(der.rank_nminus_cap_tplus as i64)
        + BigInt::from(der.rank_nplus_cap_tminus as i64);
    let kernel_part = BigInt::from((cfg.plus.k_rank + cfg.minus.k_rank) as i64 - 1);
    let b3 = lattice_part + &cfg.plus.b3_z + &cfg.minus.b3_z + kernel_part;
    (cfg.n0_rank, b3)
}

#[derive(Clone, Debug)]
pub struct TorsionFlags {
    pub tor_l_mod_p: FinAbGroup,
    pub tor_l_mod_nplus_tminus: FinAbGroup,
    pub tor_l_mod_nminus_tplus: FinAbGroup,
    pub th3_plus_trivial: bool,
    pub th3_minus_trivial: bool,
    pub torsion_free: bool,
}

/// Torsion of H^3 and H^4 of the glued manifold through an explicit
/// primitive embedding of P into the K3 lattice: Tor(L/P) (trivial by the
/// primitive choice) and Tor(L/(N+- + T-+)) via saturated sums, plus the
/// blocks' own H^3 torsion flags.
pub fn torsion_check(cfg: &Configuration, emb_p: &LatticeEmbedding) -> TorsionFlags {
    let (_, tor_l_mod_p) = emb_p.quotient();
    let l = emb_p.codomain();
    let n_plus_image = emb_p.matrix() * &cfg.n_plus_cols();
    let n_minus_image = emb_p.matrix() * &cfg.n_minus_cols();
    let t_plus = transcendental(emb_p, &cfg.n_plus_cols());
    let t_minus = transcendental(emb_p, &cfg.n_minus_cols());
    let sum_pm = sublattice_sum(
        &LatticeEmbedding::sublattice(l, &n_plus_image),
        &t_minus,
    )
    .expect("shared codomain");
    let sum_mp = sublattice_sum(
        &LatticeEmbedding::sublattice(l, &n_minus_image),
        &t_plus,
    )
    .expect("shared codomain");
    let (_, tor_pm) = sum_pm.quotient();
    let (_, tor_mp) = sum_mp.quotient();
    let torsion_free = tor_l_mod_p.is_trivial()
        && tor_pm.is_trivial()
        && tor_mp.is_trivial()
        && cfg.plus.h3_torsion_free
        && cfg.minus.h3_torsion_free;
    TorsionFlags {
        tor_l_mod_p,
        tor_l_mod_nplus_tminus: tor_pm,
        tor_l_mod_nminus_tplus: tor_mp,
        th3_plus_trivial: cfg.plus.h3_torsion_free,
        th3_minus_trivial: cfg.minus.h3_torsion_free,
        torsion_free,
    }
}

/// Rows of the flat-image functionals on the `own` side: the functional of
/// the b-th basis vector of the other side takes value pair[a][b] on the
/// a-th basis lift and <antiK_own, other_b> on zeta, hence kills the fiber
/// kernel direction (antiK lift - zeta).
fn flat_rows(own_anti_k: &[BigInt], pair: &IntMat) -> IntMat {
    let own_rank = pair.rows();
    let other_rank = pair.cols();
    IntMat::from_fn(other_rank, own_rank + 1, |b, a| {
        if a < own_rank {
            pair[(a, b)].clone()
        } else {
            (0..own_rank).map(|i| &own_anti_k[i] * &pair[(i, b)]).sum()
        }
    })
}

/// Divisibility of a class modulo the row span of `rows`, computed modulo
/// torsion: transform by the Smith V and take the gcd of the free
/// coordinates. Zero means the class is torsion in the quotient.
fn gd_modulo_rows(class: &[BigInt], rows: &IntMat) -> BigInt {
    let snf = smith_normal_form(rows);
    let rank = snf.rank();
    let n = rows.cols();
    let transformed: Vec<BigInt> = (0..n)
        .map(|j| (0..n).map(|i| &class[i] * &snf.v[(i, j)]).sum())
        .collect();
    gcd_all(transformed[rank..].iter())
}

/// (m, m+, m-): m+- is the greatest divisor of c2(Z+-) in the quotient of
/// H^2(Z+-)^* by the flat image of the other side's polarization lattice,
/// and m = gcd(m+, m-) is the greatest divisor of c2 of the glued manifold.
pub fn divisibility_m(cfg: &Configuration) -> (BigInt, BigInt, BigInt) {
    let rows_plus = flat_rows(&cfg.plus.anti_k, &cfg.d);
    let rows_minus = flat_rows(&cfg.minus.anti_k, &cfg.d.transpose());
    let m_plus = gd_modulo_rows(&cfg.plus.c2z, &rows_plus);
    let m_minus = gd_modulo_rows(&cfg.minus.c2z, &rows_minus);
    (m_plus.gcd(&m_minus), m_plus, m_minus)
}

/// chi(W) = chi(Z+) + chi(Z-) - 24 and sigma(W) = 0.
pub fn chi_sigma_w(cfg: &Configuration) -> (BigInt, BigInt) {
    (&cfg.plus.chi_z + &cfg.minus.chi_z - BigInt::from(24), BigInt::zero())
}

/// chi(W) - 3 sigma(W) - int c1 c3, reduced mod 48.
pub fn nu_general(chi: &BigInt, sigma: &BigInt, c1c3: &BigInt) -> Residue {
    Residue::new(chi - BigInt::from(3) * sigma - c1c3, BigInt::from(48))
}

/// 7 chi - 45 sigma/2 - int(7 c1c3 - 2 c1^2 c2 + c1^4/2) + int 3 u^2/2,
/// reduced mod 3 lcm(m, 4); the rational total must be an integer.
#[allow(clippy::too_many_arguments)]
pub fn xi_general(
    chi: &BigInt,
    sigma: &BigInt,
    c1c3: &BigInt,
    c1sq_c2: &BigRational,
    c1_4: &BigRational,
    u_sq: &BigRational,
    m: &BigInt,
) -> Result<Residue, InvariantError> {
    let modulus = BigInt::from(3) * m.lcm(&BigInt::from(4));
    let two = BigRational::from(BigInt::from(2));
    let total = BigRational::from(BigInt::from(7) * chi)
        - BigRational::from(BigInt::from(45) * sigma) / &two
        - BigRational::from(BigInt::from(7) * c1c3)
        + &two * c1sq_c2
        - c1_4 / &two
        + BigRational::from(BigInt::from(3)) * u_sq / &two;
    if !total.is_integer() {
        return Err(InvariantError::NonIntegralResidue(total.to_string(), modulus.to_string()));
    }
    Ok(Residue::new(total.to_integer(), modulus))
}

/// nu of any twisted connected sum is 24 mod 48; recomputed through the
/// general formula with chi(W), sigma(W) = 0 and c1 c3 = chi(Z+) + chi(Z-)
/// as a consistency check.
pub fn nu_tcs(cfg: &Configuration) -> Residue {
    let (chi_w, sigma_w) = chi_sigma_w(cfg);
    let c1c3 = &cfg.plus.chi_z + &cfg.minus.chi_z;
    let recomputed = nu_general(&chi_w, &sigma_w, &c1c3);
    let constant = Residue::new(BigInt::from(24), BigInt::from(48));
    assert_eq!(recomputed, constant, "nu recomputation must give 24 mod 48");
    constant
}

/// Valid choices in the xi computation that must not affect the residue:
/// the torsion coordinates of the integral lift, a shift of the rational
/// solution of the flat system along its kernel, and the zeta-component of
/// the preimage used for the relative pairing.
struct XiChoices<'a> {
    rng: Option<&'a mut dyn rand::RngCore>,
}

impl XiChoices<'_> {
    fn small(&mut self) -> BigInt {
        match &mut self.rng {
            Some(r) => BigInt::from(r.gen_range(-4i64..=4)),
            None => BigInt::zero(),
        }
    }
}

/// One side of the xi computation: the integral reduction
/// u = c2(Z) - m sigma lying in the rational span of the flat image, and a
/// rational preimage n_other with flat(n_other) = u.
fn xi_side(
    anti_k: &[BigInt],
    c2z: &[BigInt],
    pair: &IntMat,
    m: &BigInt,
    choices: &mut XiChoices<'_>,
) -> Result<(Vec<BigInt>, Vec<BigRational>), InvariantError> {
    let rows = flat_rows(anti_k, pair);
    let n = rows.cols();
    let snf = smith_normal_form(&rows);
    let rank = snf.rank();
    let transformed: Vec<BigInt> = (0..n)
        .map(|j| (0..n).map(|i| &c2z[i] * &snf.v[(i, j)]).sum())
        .collect();
    // sigma in V-coordinates: free part forced to c'/m, torsion part free
    let mut sigma_v = vec![BigInt::zero(); n];
    for j in rank..n {
        let (q, r) = transformed[j].div_rem(m);
        if !r.is_zero() {
            return Err(InvariantError::LiftNotFound(format!(
                "m = {m} does not divide the reduced class coordinate {}",
                transformed[j]
            )));
        }
        sigma_v[j] = q;
    }
    for item in sigma_v.iter_mut().take(rank) {
        *item = choices.small();
    }
    // sigma = sigma_v . V^{ -1 }: solve x V = sigma_v, i.e. V^T x^T = sigma_v^T
    let sigma = {
        let x = solve_rational(&snf.v.transpose(), &sigma_v).expect("V is unimodular");
        x.into_iter().map(|q| q.to_integer()).collect::<Vec<BigInt>>()
    };
    let u: Vec<BigInt> = (0..n).map(|i| &c2z[i] - m * &sigma[i]).collect();
    // u kills the fiber kernel direction (antiK lift, -1)
    let on_kernel: BigInt = (0..n - 1).map(|i| &anti_k[i] * &u[i]).sum::<BigInt>() - &u[n - 1];
    assert!(on_kernel.is_zero(), "u must vanish on the fiber kernel");
    // solve rows^T y = u over Q
    let mut y = solve_rational(&rows.transpose(), &u).ok_or_else(|| {
        InvariantError::SingularPairing(
            "the reduced class is not in the rational span of the flat image".into(),
        )
    })?;
    if choices.rng.is_some() {
        let kernel = rows.transpose().kernel();
        for c in 0..kernel.cols() {
            let t = BigRational::from(choices.small());
            for (i, yi) in y.iter_mut().enumerate() {
                *yi += &t * BigRational::from(kernel[(i, c)].clone());
            }
        }
    }
    Ok((u, y))
}

/// xi = (3/2) int_W u^2 mod 3 lcm(m, 4), with int u^2 evaluated as the
/// relative pairing u+(n+~) + u-(n-~) for preimages n+~ of the solutions of
/// the flat systems.
pub fn xi_tcs(cfg: &Configuration, m: &BigInt) -> Result<Residue, InvariantError> {
    xi_tcs_inner(cfg, m, &mut XiChoices { rng: None })
}

/// Same residue computed with randomized valid choices; exposed so callers
/// can demonstrate choice independence.
pub fn xi_tcs_randomized(
    cfg: &Configuration,
    m: &BigInt,
    rng: &mut impl Rng,
) -> Result<Residue, InvariantError> {
    xi_tcs_inner(cfg, m, &mut XiChoices { rng: Some(rng) })
}

fn xi_tcs_inner(
    cfg: &Configuration,
    m: &BigInt,
    choices: &mut XiChoices<'_>,
) -> Result<Residue, InvariantError> {
    let (u_plus, n_minus) =
        xi_side(&cfg.plus.anti_k, &cfg.plus.c2z, &cfg.d, m, choices)?;
    let (u_minus, n_plus) =
        xi_side(&cfg.minus.anti_k, &cfg.minus.c2z, &cfg.d.transpose(), m, choices)?;
    // preimage of n in H^2(Z) tensor Q: (n, t) for any t, since u kills the
    // kernel direction; t = 0 deterministically
    let mut pair_with = |u: &[BigInt], n: &[BigRational], anti_k: &[BigInt]| -> BigRational {
        let rank = u.len() - 1;
        let t = BigRational::from(choices.small());
        // (n + t * antiK, -t): dot with u
        let mut acc = BigRational::zero();
        for i in 0..rank {
            let coord = &n[i] + &t * BigRational::from(anti_k[i].clone());
            acc += coord * BigRational::from(u[i].clone());
        }
        acc -= &t * BigRational::from(u[rank].clone());
        acc
    };
    let int_u_sq = pair_with(&u_plus, &n_plus, &cfg.plus.anti_k)
        + pair_with(&u_minus, &n_minus, &cfg.minus.anti_k);
    let modulus = BigInt::from(3) * m.lcm(&BigInt::from(4));
    let xi = BigRational::from(BigInt::from(3)) * int_u_sq / BigRational::from(BigInt::from(2));
    if !xi.is_integer() {
        return Err(InvariantError::NonIntegralResidue(xi.to_string(), modulus.to_string()));
    }
    Ok(Residue::new(xi.to_integer(), modulus))
}

/// mu = (xi - 7 nu) / 12 mod gcd(28, m_tilde / 4). The difference must be
/// divisible by 12 for some choice of representatives, which reduces to the
/// canonical ones since 12 divides both moduli involved.
pub fn mu_from(nu: &Residue, xi: &Residue, m_tilde: &BigInt) -> Result<Residue, InvariantError> {
    let g = BigInt::from(28).gcd(&(m_tilde / BigInt::from(4)));
    let diff = xi.value() - BigInt::from(7) * nu.value();
    let (q, r) = diff.div_rem(&BigInt::from(12));
    if !r.is_zero() {
        return Err(InvariantError::Inconsistent(format!(
            "xi - 7 nu = {diff} is not divisible by 12"
        )));
    }
    Ok(Residue::new(q, g.max(BigInt::one())))
}

/// Compute the whole invariant record. The primitive embedding of P into
/// the K3 lattice is constructed internally unless one is supplied.
pub fn compute_invariants(
    cfg: &Configuration,
    emb_p: Option<&LatticeEmbedding>,
) -> Result<TcsInvariants, InvariantError> {
    if cfg.plus.k_rank != 1 || cfg.minus.k_rank != 1 {
        return Err(InvariantError::ScopeError(
            "only semi-Fano type blocks (fiber kernel rank 1) are supported".into(),
        ));
    }
    if cfg.n0_rank != 0 {
        return Err(InvariantError::ScopeError(
            "invariants are computed for configurations with trivial intersection lattice".into(),
        ));
    }
    let (b2, b3) = betti(cfg);
    let owned;
    let emb = match emb_p {
        Some(e) => e,
        None => {
            owned = embed_primitively(&cfg.p)?;
            &owned
        }
    };
    let torsion = torsion_check(cfg, emb);
    if !torsion.torsion_free {
        return Err(InvariantError::ScopeError(
            "xi for torsion cohomology is out of scope; this configuration has torsion".into(),
        ));
    }
    let (m, _, _) = divisibility_m(cfg);
    if !m.is_even() || !(BigInt::from(24) % &m).is_zero() {
        return Err(InvariantError::Inconsistent(format!(
            "m = {m} must be an even divisor of 24"
        )));
    }
    let m_tilde = m.lcm(&BigInt::from(4));
    let m_hat = BigInt::from(28).gcd(BigRational::new(m.clone(), BigInt::from(4)).numer());
    let (chi_w, sigma_w) = chi_sigma_w(cfg);
    let nu = nu_tcs(cfg);
    let xi = xi_tcs(cfg, &m)?;
    let mu = mu_from(&nu, &xi, &m_tilde)?;
    Ok(TcsInvariants {
        b2,
        b3,
        torsion_free: torsion.torsion_free,
        m,
        m_tilde,
        m_hat,
        nu,
        xi,
        mu,
        chi_w,
        sigma_w,
    })
}

/// Relation between two invariant records in the same diffeomorphism group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum PairVerdict {
    /// same (b3, m, mu) but xi1 differs from both xi2 and -xi2: the
    /// underlying manifolds are diffeomorphic with non-homotopic structures
    DistinctStructures,
    /// xi1 = -xi2 only: an orientation-reversing identification may relate
    /// the structures
    OrientationInconclusive,
    /// xi agrees on the nose
    Indistinguishable,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct ClassifiedPair {
    pub first: String,
    pub second: String,
    pub verdict: PairVerdict,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct ClassifyGroup {
    pub b3: i64,
    pub m: i64,
    /// None when the mu modulus is 1 (vacuous)
    pub mu: Option<i64>,
    pub members: Vec<String>,
    pub pairs: Vec<ClassifiedPair>,
}

/// Group records by (b3, m, mu) - the diffeomorphism classification data of
/// a 2-connected torsion-free example - and compare xi within each group.
pub fn classify(items: &[(String, TcsInvariants)]) -> Result<Vec<ClassifyGroup>, InvariantError> {
    for (id, inv) in items {
        if !inv.torsion_free || inv.b2 != 0 {
            return Err(InvariantError::ScopeError(format!(
                "{id}: classification requires torsion-free cohomology and b2 = 0"
            )));
        }
    }
    let mut groups: std::collections::BTreeMap<(i64, i64, Option<i64>), Vec<usize>> =
        Default::default();
    for (idx, (_, inv)) in items.iter().enumerate() {
        let key = (
            i64::try_from(&inv.b3).expect("b3 fits i64"),
            i64::try_from(&inv.m).expect("m fits i64"),
            if inv.mu.is_vacuous() {
                None
            } else {
                Some(i64::try_from(inv.mu.value()).expect("mu fits i64"))
            },
        );
        groups.entry(key).or_default().push(idx);
    }
    let mut out = Vec::new();
    for ((b3, m, mu), members) in groups {
        let mut pairs = Vec::new();
        for (i, &a) in members.iter().enumerate() {
            for &b in members.iter().skip(i + 1) {
                let (xa, xb) = (&items[a].1.xi, &items[b].1.xi);
                assert_eq!(xa.modulus(), xb.modulus(), "same m implies same xi modulus");
                let verdict = if xa == xb {
                    PairVerdict::Indistinguishable
                } else if *xa == xb.negated() {
                    PairVerdict::OrientationInconclusive
                } else {
                    PairVerdict::DistinctStructures
                };
                pairs.push(ClassifiedPair {
                    first: items[a].0.clone(),
                    second: items[b].0.clone(),
                    verdict,
                });
            }
        }
        out.push(ClassifyGroup {
            b3,
            m,
            mu,
            members: members.iter().map(|&i| items[i].0.clone()).collect(),
            pairs,
        });
    }
    Ok(out)
}
