//! Semi-Fano catalog records and the blowup Chern calculus that turns them
//! into building-block cohomological profiles.
//!
//! A catalog record stores the Picard lattice of a semi-Fano threefold Y
//! under the anticanonically contracted triple product a.b := (-K_Y).a.b,
//! the c2(Y) pairings, and the literature values of chi(Y) and b3(Y). The
//! building block Z is the blowup of Y along the base locus of a generic
//! anticanonical pencil, a smooth canonical curve of genus g with
//! (-K_Y)^3 = 2g - 2; its profile follows from the standard blowup formulas
//!   c1(Z) = pi* c1(Y) - zeta,
//!   pi*(a).c2(Z) = a.c2(Y) + int_C a,      zeta.c2(Z) = int_C c1(Y).

use crate::lattice::{gd, IntegerLattice};
use crate::mat::IntMat;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("catalog parse error: {0}")]
    Parse(String),
    #[error("catalog validation failed:\n{}", .0.join("\n"))]
    Validation(Vec<String>),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BlowupError {
    #[error("index does not divide the base data: {0}")]
    NonIntegralDegree(String),
    #[error("derived data is not weak Fano: {0}")]
    NotWeakFano(String),
}

/// Catalog record of a deformation family of semi-Fano threefolds.
///
/// Field names are normative for the JSON catalog format; unknown fields
/// are rejected.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct SemiFanoFamily {
    pub id: String,
    pub name: String,
    /// Gram of H^2(Y) under a.b := (-K_Y).a.b
    pub picard: Vec<Vec<i64>>,
    pub basis_labels: Vec<String>,
    /// generators spanning the closed ample cone, in the picard basis
    pub ample_cone: Vec<Vec<i64>>,
    /// coordinates of -K_Y
    #[serde(rename = "antiK")]
    pub anti_k: Vec<i64>,
    /// values c2(Y).basis_i
    pub c2_pairings: Vec<i64>,
    /// topological Euler characteristic of Y
    pub chi: i64,
    pub b3: i64,
    pub h3_torsion_free: bool,
    pub provenance: String,
}

impl SemiFanoFamily {
    pub fn rank(&self) -> usize {
        self.picard.len()
    }

    pub fn picard_lattice(&self) -> IntegerLattice {
        IntegerLattice::with_labels(IntMat::from_rows(&self.picard), self.basis_labels.clone())
    }

    pub fn anti_k_big(&self) -> Vec<BigInt> {
        self.anti_k.iter().map(|&x| BigInt::from(x)).collect()
    }

    /// (-K_Y)^3 under the contracted product.
    pub fn degree(&self) -> BigInt {
        self.picard_lattice().norm(&self.anti_k_big())
    }

    /// genus g with (-K_Y)^3 = 2g - 2.
    pub fn genus(&self) -> BigInt {
        (self.degree() + BigInt::from(2)) / BigInt::from(2)
    }

    /// Violated record invariants, as rule-tagged messages.
    pub fn validation_errors(&self) -> Vec<String> {
        let mut errs = Vec::new();
        let r = self.rank();
        let mut shape_ok = true;
        if self.picard.iter().any(|row| row.len() != r) || r == 0 {
            errs.push(format!("[{}] picard-square: Gram matrix must be square and nonempty", self.id));
            shape_ok = false;
        }
        if self.basis_labels.len() != r {
            errs.push(format!("[{}] basis-labels: expected {r} labels", self.id));
        }
        if self.anti_k.len() != r || self.c2_pairings.len() != r {
            errs.push(format!("[{}] field-lengths: antiK and c2_pairings must have length {r}", self.id));
            shape_ok = false;
        }
        if self.ample_cone.is_empty() || self.ample_cone.iter().any(|v| v.len() != r) {
            errs.push(format!("[{}] ample-cone: need at least one generator of length {r}", self.id));
        }
        if !shape_ok {
            return errs;
        }
        let gram = IntMat::from_rows(&self.picard);
        if !gram.is_symmetric() {
            errs.push(format!("[{}] picard-symmetric: Gram matrix must be symmetric", self.id));
            return errs;
        }
        let lat = self.picard_lattice();
        if !lat.is_even() {
            errs.push(format!("[{}] picard-even: diagonal entries must be even (sublattice of the K3 lattice)", self.id));
        }
        if !lat.is_nondegenerate() {
            errs.push(format!("[{}] semi-fano-nondegenerate: the contracted form must be nondegenerate", self.id));
        }
        let anti_k = self.anti_k_big();
        if gd(&anti_k) != BigInt::one() {
            errs.push(format!("[{}] antiK-primitive: gd(-K) must be 1", self.id));
        }
        let c1c2: i64 = self.anti_k.iter().zip(self.c2_pairings.iter()).map(|(a, c)| a * c).sum();
        if c1c2 != 24 {
            errs.push(format!("[{}] c1.c2 = 24: got {c1c2}", self.id));
        }
        let deg = lat.norm(&anti_k);
        if !deg.is_even() || deg < BigInt::from(2) {
            errs.push(format!(
                "[{}] degree-genus: (-K)^3 = {deg} must be even and >= 2 (genus >= 2)",
                self.id
            ));
        }
        if self.b3 < 0 || !self.b3.is_even() {
            errs.push(format!("[{}] b3-even: b3 = {} must be a nonnegative even integer", self.id, self.b3));
        }
        if self.chi != 2 + 2 * (r as i64) - self.b3 {
            errs.push(format!(
                "[{}] chi-consistency: chi must equal 2 + 2 rank - b3 = {}",
                self.id,
                2 + 2 * (r as i64) - self.b3
            ));
        }
        errs
    }
}

/// Inputs for assembling a rank-2 record from a blowup of a Picard rank 1
/// Fano of index `index` and anticanonical degree `base_degree` along a
/// smooth curve of degree `curve_d` and genus `curve_g`, cut out by
/// sections of |kH| with `cut_k` minimal.
#[derive(Clone, Debug)]
pub struct BlowupData {
    pub id: String,
    pub name: String,
    pub provenance: String,
    pub base_degree: i64,
    pub index: i64,
    pub base_b3: i64,
    pub curve_d: i64,
    pub curve_g: i64,
    pub cut_k: i64,
}

/// Record of the blowup Y -> Y' in the (G, H) basis, G = kH - E.
///
/// The (H, E) products are H^2 = base_degree / index^2, E.H = curve_d,
/// E^2 = 2 curve_g - 2; the c2(Y) pairings are H.c2 = 24/index + curve_d
/// and E.c2 = index * curve_d.
pub fn blowup_rank1(data: &BlowupData) -> Result<SemiFanoFamily, BlowupError> {
    let r = data.index;
    if r <= 0 || data.base_degree % (r * r) != 0 {
        return Err(BlowupError::NonIntegralDegree(format!(
            "index^2 = {} must divide the base degree {}",
            r * r,
            data.base_degree
        )));
    }
    if 24 % r != 0 {
        return Err(BlowupError::NonIntegralDegree(format!("index {r} must divide 24")));
    }
    if data.curve_d <= 0 {
        return Err(BlowupError::NotWeakFano(format!(
            "curve degree {} must be positive",
            data.curve_d
        )));
    }
    if data.curve_g < 0 || data.cut_k <= 0 {
        return Err(BlowupError::NotWeakFano(
            "curve genus and cutting degree must be nonnegative".into(),
        ));
    }
    let h2 = data.base_degree / (r * r);
    let (d, g, k) = (data.curve_d, data.curve_g, data.cut_k);
    // basis change from (H, E) to (G, H) with G = kH - E
    let gg = k * k * h2 - 2 * k * d + (2 * g - 2);
    let gh = k * h2 - d;
    let picard = vec![vec![gg, gh], vec![gh, h2]];
    let h_c2 = 24 / r + d;
    let e_c2 = r * d;
    let c2 = vec![k * h_c2 - e_c2, h_c2];
    // -K = rH - E = G + (r - k) H
    let anti_k = vec![1, r - k];
    let deg_y = {
        let lat = IntegerLattice::new(IntMat::from_rows(&picard));
        let ak: Vec<BigInt> = anti_k.iter().map(|&x| BigInt::from(x)).collect();
        lat.norm(&ak)
    };
    if deg_y <= BigInt::zero() {
        return Err(BlowupError::NotWeakFano(format!("(-K_Y)^3 = {deg_y} must be positive")));
    }
    Ok(SemiFanoFamily {
        id: data.id.clone(),
        name: data.name.clone(),
        picard,
        basis_labels: vec!["G".into(), "H".into()],
        ample_cone: vec![vec![1, 0], vec![0, 1]],
        anti_k,
        c2_pairings: c2,
        chi: (4 - data.base_b3) + 2 - 2 * g,
        b3: data.base_b3 + 2 * g,
        h3_torsion_free: true,
        provenance: data.provenance.clone(),
    })
}

/// Which genericity machinery applies to a family. Reconstructed from the
/// record itself: for rank-2 blowup families the parameters (index, curve
/// degree/genus, cutting degree) are recovered by inverting the blowup
/// formulas, and accepted only when the solution is unique and fully
/// consistent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum FamilyKind {
    Rank1,
    BlowupOfRank1 { index: i64, curve_d: i64, curve_g: i64, cut_k: i64 },
    ProductP1P2,
    Unknown,
}

pub fn classify_family(f: &SemiFanoFamily) -> FamilyKind {
    if f.rank() == 1 {
        return FamilyKind::Rank1;
    }
    if f.rank() != 2 {
        return FamilyKind::Unknown;
    }
    if f.picard == vec![vec![0, 3], vec![3, 2]] && f.anti_k == vec![2, 3] {
        return FamilyKind::ProductP1P2;
    }
    // invert the blowup formulas in the (G, H) basis:
    //   r (k h2 - gh) = k c2H - c2G,   c2H = 24/r + d,   d = k h2 - gh
    let gh = f.picard[0][1];
    let h2 = f.picard[1][1];
    let c2g = f.c2_pairings[0];
    let c2h = f.c2_pairings[1];
    let mut found = Vec::new();
    for r in 1..=4i64 {
        if 24 % r != 0 {
            continue;
        }
        let denom = r * h2 - c2h;
        if denom == 0 {
            continue;
        }
        let numer = r * gh - c2g;
        if numer % denom != 0 {
            continue;
        }
        let k = numer / denom;
        if k <= 0 {
            continue;
        }
        let d = k * h2 - gh;
        if d <= 0 || c2h != 24 / r + d {
            continue;
        }
        // E = kH - G, so E^2 = k^2 h2 - 2k gh + G^2 must equal 2g - 2
        let e2 = k * k * h2 - 2 * k * gh + f.picard[0][0];
        if e2 < -2 || !e2.is_even() {
            continue;
        }
        let g = (e2 + 2) / 2;
        if f.anti_k != vec![1, r - k] {
            continue;
        }
        found.push(FamilyKind::BlowupOfRank1 { index: r, curve_d: d, curve_g: g, cut_k: k });
    }
    match found.as_slice() {
        [one] => one.clone(),
        _ => FamilyKind::Unknown,
    }
}

/// Derived cohomological profile of the building block Z over a family Y:
/// the K3-fibered threefold obtained by blowing up the anticanonical base
/// locus. c2(Z) is stored as a functional on H^2(Z) in the basis
/// (lifts of the picard basis, zeta).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BuildingBlock {
    pub family_id: String,
    /// polarization lattice N = picard Gram
    pub n: IntegerLattice,
    pub ample_cone: Vec<Vec<BigInt>>,
    pub anti_k: Vec<BigInt>,
    /// c2(Z) pairings on (picard basis lifts, zeta); length rank(N) + 1
    pub c2z: Vec<BigInt>,
    pub chi_z: BigInt,
    pub b3_z: BigInt,
    pub genus: BigInt,
    /// rank of K = ker(H^2(Z) -> H^2(Sigma)); 1 for semi-Fano type
    pub k_rank: usize,
    pub h3_torsion_free: bool,
    pub kind: FamilyKind,
}

impl BuildingBlock {
    pub fn rank_n(&self) -> usize {
        self.n.rank()
    }

    /// c2(Z) evaluated on c1(Z) = (anti-K lift) - zeta; always 24.
    pub fn c1_c2(&self) -> BigInt {
        let on_anti_k: BigInt = self
            .anti_k
            .iter()
            .zip(self.c2z.iter())
            .map(|(a, c)| a * c)
            .sum();
        on_anti_k - &self.c2z[self.rank_n()]
    }
}

pub fn derive_block(f: &SemiFanoFamily) -> BuildingBlock {
    let lat = f.picard_lattice();
    let anti_k = f.anti_k_big();
    let deg = lat.norm(&anti_k);
    let genus = (&deg + BigInt::from(2)) / BigInt::from(2);
    let r = f.rank();
    // c2(Z) on a lift of a: a.c2(Y) + int_C a = a.c2(Y) + (-K).a; on zeta: (-K)^3
    let paired = lat.gram().mul_vec(&anti_k);
    let mut c2z: Vec<BigInt> = (0..r)
        .map(|i| BigInt::from(f.c2_pairings[i]) + &paired[i])
        .collect();
    c2z.push(deg.clone());
    let two = BigInt::from(2);
    BuildingBlock {
        family_id: f.id.clone(),
        n: lat,
        ample_cone: f
            .ample_cone
            .iter()
            .map(|v| v.iter().map(|&x| BigInt::from(x)).collect())
            .collect(),
        anti_k,
        c2z,
        chi_z: BigInt::from(f.chi) + &two - &two * &genus,
        b3_z: BigInt::from(f.b3) + &two * &genus,
        genus,
        k_rank: 1,
        h3_torsion_free: f.h3_torsion_free,
        kind: classify_family(f),
    }
}

/// Parse a catalog document. An empty (or whitespace-only) file is an empty
/// catalog; the flag reports that a warning should be surfaced.
pub fn parse_catalog(text: &str) -> Result<(Vec<SemiFanoFamily>, bool), CatalogError> {
    if text.trim().is_empty() {
        return Ok((vec![], true));
    }
    let families: Vec<SemiFanoFamily> =
        serde_json::from_str(text).map_err(|e| CatalogError::Parse(e.to_string()))?;
    Ok((families, false))
}

/// Parse and validate; any violated invariant or duplicate id aggregates
/// into a single validation error.
pub fn load_catalog(text: &str) -> Result<Vec<SemiFanoFamily>, CatalogError> {
    let (families, _) = parse_catalog(text)?;
    let errors = validate_catalog(&families);
    if errors.is_empty() {
        Ok(families)
    } else {
        Err(CatalogError::Validation(errors))
    }
}

pub fn validate_catalog(families: &[SemiFanoFamily]) -> Vec<String> {
    let mut errors = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for f in families {
        if !seen.insert(f.id.clone()) {
            errors.push(format!("[{}] duplicate-id", f.id));
        }
        errors.extend(f.validation_errors());
    }
    errors
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::shipped_catalog;

    fn family(id: &str) -> SemiFanoFamily {
        shipped_catalog().into_iter().find(|f| f.id == id).unwrap()
    }

    #[test]
    fn shipped_catalog_is_valid() {
        let cat = shipped_catalog();
        assert_eq!(cat.len(), 5);
        assert!(validate_catalog(&cat).is_empty());
    }

    #[test]
    fn blowup_reproduces_catalog_grams() {
        // quadric threefold: index 3, degree 54, b3 = 0; curve (6, 0), k = 3
        let y1 = blowup_rank1(&BlowupData {
            id: "Y1".into(),
            name: String::new(),
            provenance: String::new(),
            base_degree: 54,
            index: 3,
            base_b3: 0,
            curve_d: 6,
            curve_g: 0,
            cut_k: 3,
        })
        .unwrap();
        assert_eq!(y1.picard, vec![vec![16, 12], vec![12, 6]]);
        assert_eq!(y1.c2_pairings, family("Y1").c2_pairings);
        assert_eq!(y1.chi, family("Y1").chi);
        assert_eq!(y1.b3, family("Y1").b3);

        // P^3: index 4, degree 64, b3 = 0
        let y2 = blowup_rank1(&BlowupData {
            id: "Y2".into(),
            name: String::new(),
            provenance: String::new(),
            base_degree: 64,
            index: 4,
            base_b3: 0,
            curve_d: 8,
            curve_g: 2,
            cut_k: 4,
        })
        .unwrap();
        assert_eq!(y2.picard, vec![vec![2, 8], vec![8, 4]]);
        assert_eq!(y2.chi, 2);
        assert_eq!(y2.b3, 4);

        let y3 = blowup_rank1(&BlowupData {
            id: "Y3".into(),
            name: String::new(),
            provenance: String::new(),
            base_degree: 64,
            index: 4,
            base_b3: 0,
            curve_d: 11,
            curve_g: 14,
            cut_k: 4,
        })
        .unwrap();
        assert_eq!(y3.picard, vec![vec![2, 5], vec![5, 4]]);
        assert_eq!(y3.c2_pairings, vec![24, 17]);
        assert_eq!(y3.chi, -22);
        assert_eq!(y3.b3, 28);
    }

    #[test]
    fn blowup_guards() {
        let mut data = BlowupData {
            id: "X".into(),
            name: String::new(),
            provenance: String::new(),
            base_degree: 54,
            index: 3,
            base_b3: 0,
            curve_d: 0,
            curve_g: 0,
            cut_k: 3,
        };
        assert!(matches!(blowup_rank1(&data), Err(BlowupError::NotWeakFano(_))));
        data.curve_d = 6;
        data.base_degree = 55;
        assert!(matches!(blowup_rank1(&data), Err(BlowupError::NonIntegralDegree(_))));
    }

    #[test]
    fn derived_blocks_match_hand_values() {
        let z5 = derive_block(&family("Y5"));
        assert_eq!(z5.c2z, vec![BigInt::from(42), BigInt::from(18)]);
        assert_eq!(z5.b3_z, BigInt::from(24));
        assert_eq!(z5.chi_z, BigInt::from(-18));
        assert_eq!(z5.genus, BigInt::from(10));

        let z3 = derive_block(&family("Y3"));
        assert_eq!(z3.c2z, vec![BigInt::from(26), BigInt::from(22), BigInt::from(2)]);
        assert_eq!(z3.chi_z, BigInt::from(-24));
        assert_eq!(z3.b3_z, BigInt::from(32));
        assert_eq!(z3.genus, BigInt::from(2));
        assert_eq!(z3.c1_c2(), BigInt::from(24));
    }

    #[test]
    fn block_invariants_hold_for_whole_catalog() {
        for f in shipped_catalog() {
            let z = derive_block(&f);
            assert_eq!(z.c1_c2(), BigInt::from(24), "{}", f.id);
            let g = gd(&z.c2z);
            assert!((&BigInt::from(24) % &g).is_zero(), "gd(c2Z) divides 24 for {}", f.id);
            assert!(g.is_even(), "2 | gd(c2Z) for {} since c1(Z)^2 = 0", f.id);
            assert!(z.b3_z.is_even());
        }
    }

    #[test]
    fn family_kinds_are_recovered_from_records() {
        assert_eq!(
            classify_family(&family("Y1")),
            FamilyKind::BlowupOfRank1 { index: 3, curve_d: 6, curve_g: 0, cut_k: 3 }
        );
        assert_eq!(
            classify_family(&family("Y2")),
            FamilyKind::BlowupOfRank1 { index: 4, curve_d: 8, curve_g: 2, cut_k: 4 }
        );
        assert_eq!(
            classify_family(&family("Y3")),
            FamilyKind::BlowupOfRank1 { index: 4, curve_d: 11, curve_g: 14, cut_k: 4 }
        );
        assert_eq!(classify_family(&family("Y4")), FamilyKind::ProductP1P2);
        assert_eq!(classify_family(&family("Y5")), FamilyKind::Rank1);
    }

    #[test]
    fn validation_catches_broken_records() {
        let mut f = family("Y3");
        f.c2_pairings = vec![26, 17];
        let errs = f.validation_errors();
        assert!(errs.iter().any(|e| e.contains("c1.c2 = 24")), "{errs:?}");

        let (empty, warned) = parse_catalog("   ").unwrap();
        assert!(empty.is_empty() && warned);

        let mut cat = shipped_catalog();
        cat.push(family("Y1"));
        assert!(validate_catalog(&cat).iter().any(|e| e.contains("duplicate-id")));
    }
}
