//! Closed 3-manifold invariants from framed surgery presentations.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::cyclotomic::{gauss_sum, CycFrac, CycInt, Valuation};
use crate::error::{Error, Result};
use crate::ideal_lattice::{bigint_json, fnv64};
use crate::link_diagram::LinkDiagram;
use crate::skein_eval::{omega_bracket, BracketParams, Theory};

/// A framed link in S³; each component carries an integer framing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurgeryPresentation {
    pub diagram: LinkDiagram,
    pub framings: Vec<i64>,
}

impl SurgeryPresentation {
    pub fn new(diagram: LinkDiagram, framings: Vec<i64>) -> Result<Self> {
        if framings.len() != diagram.num_components() {
            return Err(Error::InvalidPd(format!(
                "{} framings for {} components",
                framings.len(),
                diagram.num_components()
            )));
        }
        Ok(SurgeryPresentation { diagram, framings })
    }

    /// S³.
    pub fn empty() -> Self {
        SurgeryPresentation {
            diagram: LinkDiagram::empty(),
            framings: Vec::new(),
        }
    }

    /// The `k`-framed unknot: S¹×S² for `k = 0`, the lens space L(k,1) otherwise.
    pub fn unknot(k: i64) -> Self {
        SurgeryPresentation {
            diagram: LinkDiagram::unknot(),
            framings: vec![k],
        }
    }

    pub fn disjoint_union(&self, other: &SurgeryPresentation) -> Self {
        let mut framings = self.framings.clone();
        framings.extend(&other.framings);
        SurgeryPresentation {
            diagram: self.diagram.disjoint_union(&other.diagram),
            framings,
        }
    }

    /// Adds a split `k`-framed unknot.
    pub fn with_split_unknot(&self, k: i64) -> Self {
        self.disjoint_union(&Self::unknot(k))
    }

    /// Orientation reversal of the surgered manifold.
    pub fn mirror(&self) -> Self {
        SurgeryPresentation {
            diagram: self.diagram.mirror(),
            framings: self.framings.iter().map(|k| -k).collect(),
        }
    }

    pub fn linking_matrix(&self) -> Result<LinkingMatrix> {
        Ok(LinkingMatrix(self.diagram.linking_matrix(&self.framings)?))
    }

    pub fn hash(&self) -> String {
        fnv64(format!("{}@{:?}", self.diagram.cache_key(), self.framings).as_bytes())
    }
}

/// Framings on the diagonal, linking numbers off it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkingMatrix(pub Vec<Vec<i64>>);

impl LinkingMatrix {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `det(xI - B)`, lowest degree first (Faddeev–LeVerrier, exact in integers).
    pub fn characteristic_polynomial(&self) -> Vec<BigInt> {
        let n = self.dim();
        let b: Vec<Vec<BigInt>> = self
            .0
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        let mut c = vec![BigInt::zero(); n + 1];
        c[n] = BigInt::from(1);
        let mut m = vec![vec![BigInt::zero(); n]; n];
        for k in 1..=n {
            // M_k = B M_{k-1} + c_{n-k+1} I
            let mut next = vec![vec![BigInt::zero(); n]; n];
            for i in 0..n {
                for j in 0..n {
                    let mut s = BigInt::zero();
                    for l in 0..n {
                        s += &b[i][l] * &m[l][j];
                    }
                    if i == j {
                        s += &c[n - k + 1];
                    }
                    next[i][j] = s;
                }
            }
            m = next;
            let mut tr = BigInt::zero();
            for i in 0..n {
                for l in 0..n {
                    tr += &b[i][l] * &m[l][i];
                }
            }
            c[n - k] = -tr / BigInt::from(k);
        }
        c
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SignatureData {
    pub b_plus: usize,
    pub b_minus: usize,
    pub nullity: usize,
}

fn sign_changes<'a>(coeffs: impl Iterator<Item = (usize, &'a BigInt)>, flip_odd: bool) -> usize {
    let mut last: Option<bool> = None;
    let mut changes = 0;
    for (i, c) in coeffs {
        if c.is_zero() {
            continue;
        }
        let mut pos = c.is_positive();
        if flip_odd && i % 2 == 1 {
            pos = !pos;
        }
        if last.is_some_and(|l| l != pos) {
            changes += 1;
        }
        last = Some(pos);
    }
    changes
}

/// Exact inertia of a symmetric integer matrix: the characteristic polynomial
/// has only real roots, so Descartes' rule of signs counts them exactly.
pub fn signature_data(b: &LinkingMatrix) -> SignatureData {
    let c = b.characteristic_polynomial();
    let nullity = c.iter().take_while(|x| x.is_zero()).count();
    SignatureData {
        b_plus: sign_changes(c.iter().enumerate(), false),
        b_minus: sign_changes(c.iter().enumerate(), true),
        nullity,
    }
}

/// A computed invariant with its ring and theory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantValue {
    pub theory: Theory,
    pub value: CycInt,
    pub presentation: String,
}

/// JSON form of an invariant.
#[derive(Clone, Debug, Serialize)]
pub struct InvariantJson {
    pub theory: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<u32>,
    pub value: String,
    pub conductor: u32,
    pub nu_h: Option<String>,
    pub is_unit: bool,
    pub norm: serde_json::Value,
}

impl InvariantValue {
    pub fn conductor(&self) -> u32 {
        self.value.conductor()
    }

    /// The parts in `Z[ζ_p]` of a value: itself, or its `(re, im)` halves in conductor `4p`.
    pub fn parts(&self) -> Result<Vec<CycInt>> {
        match self.theory {
            Theory::So3 { p } if self.conductor() == 4 * p => {
                let (re, im) = self.value.i_decompose()?;
                Ok(vec![re, im])
            }
            _ => Ok(vec![self.value.clone()]),
        }
    }

    /// `ν_h` with `h = 1 - ζ_p`; `None` for the SU(2) theory.
    pub fn nu_h(&self) -> Option<Valuation> {
        match self.theory {
            Theory::So3 { .. } => self.parts().ok()?.iter().map(|x| x.nu_h()).min(),
            Theory::Su2 { .. } => None,
        }
    }

    pub fn is_unit(&self) -> bool {
        self.value.is_unit()
    }

    pub fn norm(&self) -> BigInt {
        self.value.norm()
    }

    pub fn json(&self) -> InvariantJson {
        let (p, r) = match self.theory {
            Theory::So3 { p } => (Some(p), None),
            Theory::Su2 { r } => (None, Some(r)),
        };
        InvariantJson {
            theory: self.theory.to_string(),
            p,
            r,
            value: self.value.to_string(),
            conductor: self.conductor(),
            nu_h: self.nu_h().map(|v| v.to_string()),
            is_unit: self.is_unit(),
            norm: bigint_json(&self.norm()),
        }
    }
}

impl fmt::Display for InvariantValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (n={})", self.value, self.conductor())
    }
}

/// `⟨L(ω_u)⟩ ⟨U₊(ω_u)⟩^{-b₊} ⟨U₋(ω_u)⟩^{-b₋}` together with the inertia of `B`.
pub fn normalized_bracket(
    s: &SurgeryPresentation,
    params: &BracketParams,
) -> Result<(CycFrac, SignatureData)> {
    let sig = signature_data(&s.linking_matrix()?);
    let mut v = omega_bracket(&s.diagram, &s.framings, params)?;
    let u_plus = omega_bracket(&LinkDiagram::unknot(), &[1], params)?;
    let u_minus = omega_bracket(&LinkDiagram::unknot(), &[-1], params)?;
    let inv = |x: &CycFrac| {
        x.inv()
            .ok_or_else(|| Error::NonIntegral("framed unknot bracket vanishes".into()))
    };
    let (ip, im) = (inv(&u_plus)?, inv(&u_minus)?);
    for _ in 0..sig.b_plus {
        v = &v * &ip;
    }
    for _ in 0..sig.b_minus {
        v = &v * &im;
    }
    Ok((v, sig))
}

/// `η^ν` with `η = (ζ_p - ζ_p^{-1}) / √-p`, in conductor `p` for even `ν`
/// and in the conductor of `√-p` for odd `ν`.
pub fn eta_power(p: u32, nu: usize) -> Result<CycFrac> {
    let zz =
        CycInt::from_coeffs(p, vec![BigInt::zero(), BigInt::from(1)]) - CycInt::zeta_pow(p, -1);
    let eta_sq = CycFrac::new(-(&zz * &zz), BigInt::from(p));
    let mut acc = eta_sq.pow((nu / 2) as i32).expect("nonzero");
    if nu % 2 == 1 {
        let s = gauss_sum(p)?.sqrt_minus_p;
        let n = s.conductor();
        // 1/√-p = -√-p / p
        let eta = CycFrac::new(-(&zz.lift(n)? * &s), BigInt::from(p));
        acc = &acc.lift(n)? * &eta;
    }
    Ok(acc)
}

/// `√2 = ζ_8 + ζ_8^{-1}` in conductor 24.
pub fn sqrt2_24() -> CycInt {
    CycInt::zeta_pow(24, 3) + CycInt::zeta_pow(24, -3)
}

/// `η^ν` for the SU(2) theory at `r = 3`, with `η = 1/√2`.
fn eta_power_tau3(nu: usize) -> CycFrac {
    let half = CycFrac::new(CycInt::one(24), BigInt::from(2));
    let mut acc = half.pow((nu / 2) as i32).expect("nonzero");
    if nu % 2 == 1 {
        acc = &acc * &CycFrac::new(sqrt2_24(), BigInt::from(2));
    }
    acc
}

/// The SO(3) invariant `I_p`, normalized so that `I_p(S³) = 1`.
pub fn invariant_ip(s: &SurgeryPresentation, params: &BracketParams) -> Result<InvariantValue> {
    let Theory::So3 { p } = params.theory else {
        return Err(Error::UnsupportedTheory(format!(
            "{} for I_p",
            params.theory
        )));
    };
    let (v, sig) = normalized_bracket(s, params)?;
    let eta = eta_power(p, sig.nullity)?;
    let v = &v.lift(eta.conductor())? * &eta;
    let value = v
        .to_cycint()
        .ok_or_else(|| Error::NonIntegral(format!("I_{p} = {v}")))?;
    Ok(InvariantValue {
        theory: params.theory,
        value,
        presentation: s.hash(),
    })
}

/// `I_p` with the standard choice of `A`.
pub fn invariant_ip_at(s: &SurgeryPresentation, p: u32) -> Result<InvariantValue> {
    invariant_ip(s, &BracketParams::standard_a(p)?)
}

/// The SU(2) invariant `τ₃`, valued in `Z[ζ₈]`.
pub fn invariant_tau3(s: &SurgeryPresentation) -> Result<InvariantValue> {
    invariant_tau3_with(s, &BracketParams::su2(3)?)
}

pub fn invariant_tau3_with(
    s: &SurgeryPresentation,
    params: &BracketParams,
) -> Result<InvariantValue> {
    let (v, sig) = normalized_bracket(s, params)?;
    let v = &v * &eta_power_tau3(sig.nullity);
    let value = v
        .to_cycint()
        .ok_or_else(|| Error::NonIntegral(format!("tau_3 = {v}")))?;
    // Q(ζ_8) is the fixed field of ζ_24 ↦ ζ_24^17
    let value = match value.galois(17)? == value {
        true => value.descend(8),
        false => None,
    }
    .ok_or_else(|| Error::NonIntegral(format!("tau_3 = {value} is not in Z[ζ_8]")))?;
    Ok(InvariantValue {
        theory: params.theory,
        value,
        presentation: s.hash(),
    })
}

/// `TV₃ = τ₃ · conj(τ₃)`, valued in `Z[√2]`.
pub fn invariant_tv3(s: &SurgeryPresentation) -> Result<InvariantValue> {
    let t = invariant_tau3(s)?;
    let value = &t.value * &t.value.conj();
    Ok(InvariantValue { value, ..t })
}

#[cfg(test)]
mod tests {
    use super::*;

    const HOPF: &str = "PD[X[1,3,2,4], X[3,1,4,2]]";

    fn lm(rows: &[&[i64]]) -> LinkingMatrix {
        LinkingMatrix(rows.iter().map(|r| r.to_vec()).collect())
    }

    #[test]
    fn signatures() {
        let sd = |b_plus, b_minus, nullity| SignatureData {
            b_plus,
            b_minus,
            nullity,
        };
        assert_eq!(signature_data(&lm(&[&[1]])), sd(1, 0, 0));
        assert_eq!(signature_data(&lm(&[&[0]])), sd(0, 0, 1));
        assert_eq!(signature_data(&lm(&[&[-3]])), sd(0, 1, 0));
        assert_eq!(signature_data(&lm(&[&[1, 2], &[2, 1]])), sd(1, 1, 0));
        assert_eq!(signature_data(&lm(&[&[0, 0], &[0, 0]])), sd(0, 0, 2));
        assert_eq!(signature_data(&lm(&[&[2, 1], &[1, 2]])), sd(2, 0, 0));
        assert_eq!(signature_data(&lm(&[&[1, 1], &[1, 1]])), sd(1, 0, 1));
        assert_eq!(signature_data(&lm(&[])), sd(0, 0, 0));
    }

    #[test]
    fn characteristic_polynomial_of_2x2() {
        // x^2 - (a+d)x + (ad - bc)
        let c = lm(&[&[3, 2], &[2, -5]]).characteristic_polynomial();
        assert_eq!(c, vec![BigInt::from(-19), BigInt::from(2), BigInt::from(1)]);
    }

    #[test]
    fn sphere_is_one() {
        for p in [5, 7, 11] {
            assert!(invariant_ip_at(&SurgeryPresentation::empty(), p)
                .unwrap()
                .value
                .is_one());
        }
        assert!(invariant_tau3(&SurgeryPresentation::empty())
            .unwrap()
            .value
            .is_one());
    }

    #[test]
    fn eta_squared_inverts_the_zero_framed_unknot() {
        for p in [5, 7, 11, 13] {
            let bp = BracketParams::standard_a(p).unwrap();
            let u0 = omega_bracket(&LinkDiagram::unknot(), &[0], &bp).unwrap();
            let mut sum = CycInt::zero(p);
            for i in 1..=(p as i64 - 1) / 2 {
                let q = bp.qint(i);
                sum = &sum + &(&q * &q);
            }
            assert_eq!(u0, CycFrac::from(sum));
            assert_eq!(&u0 * &eta_power(p, 2).unwrap(), CycFrac::one(p));
            let e1 = eta_power(p, 1).unwrap();
            assert_eq!(
                &e1 * &e1,
                eta_power(p, 2).unwrap().lift(e1.conductor()).unwrap()
            );
        }
        let su = BracketParams::su2(3).unwrap();
        let u0 = omega_bracket(&LinkDiagram::unknot(), &[0], &su).unwrap();
        assert_eq!(u0, CycFrac::from(CycInt::from_int(24, 2)));
    }

    #[test]
    fn framed_unknots_pair_up() {
        // η² ⟨U₊⟩⟨U₋⟩ = 1
        for p in [5, 7, 11] {
            let bp = BracketParams::standard_a(p).unwrap();
            let up = omega_bracket(&LinkDiagram::unknot(), &[1], &bp).unwrap();
            let um = omega_bracket(&LinkDiagram::unknot(), &[-1], &bp).unwrap();
            assert_eq!(&(&up * &um) * &eta_power(p, 2).unwrap(), CycFrac::one(p));
        }
    }

    #[test]
    fn blow_down_of_hopf() {
        let hopf = LinkDiagram::parse(HOPF).unwrap();
        for p in [5, 7] {
            for k in -3..=3 {
                for e in [1i64, -1] {
                    let s = SurgeryPresentation::new(hopf.clone(), vec![k, e]).unwrap();
                    let lhs = invariant_ip_at(&s, p).unwrap();
                    let rhs = invariant_ip_at(&SurgeryPresentation::unknot(k - e), p).unwrap();
                    assert_eq!(lhs.value, rhs.value, "p={p} k={k} e={e}");
                }
            }
        }
    }

    #[test]
    fn lens_spaces_are_units() {
        for p in [5, 7] {
            for k in 1..p as i64 {
                for kk in [k, -k] {
                    let v = invariant_ip_at(&SurgeryPresentation::unknot(kk), p).unwrap();
                    assert!(v.is_unit(), "p={p} k={kk}: {v}");
                }
            }
        }
    }

    #[test]
    fn s1_x_s2() {
        for p in [5u32, 7, 11, 13] {
            let v = invariant_ip_at(&SurgeryPresentation::unknot(0), p).unwrap();
            assert_eq!(v.nu_h(), Some(Valuation::Finite((p - 3) / 2)), "p={p}");
        }
    }

    #[test]
    fn stabilization_and_multiplicativity() {
        let hopf = LinkDiagram::parse(HOPF).unwrap();
        let s = SurgeryPresentation::new(hopf, vec![2, 3]).unwrap();
        let base = invariant_ip_at(&s, 7).unwrap();
        for e in [1, -1] {
            assert_eq!(
                invariant_ip_at(&s.with_split_unknot(e), 7).unwrap().value,
                base.value
            );
        }
        let l = SurgeryPresentation::unknot(3);
        let prod = &base.value * &invariant_ip_at(&l, 7).unwrap().value;
        assert_eq!(
            invariant_ip_at(&s.disjoint_union(&l), 7).unwrap().value,
            prod
        );
    }

    #[test]
    fn tau3_of_lens_spaces() {
        // 2-framed unknot: the bracket vanishes since μ₁² = -1
        let v = invariant_tau3(&SurgeryPresentation::unknot(2)).unwrap();
        assert!(v.value.is_zero());
        for k in [1, -1, 3, 4] {
            let v = invariant_tau3(&SurgeryPresentation::unknot(k)).unwrap();
            assert_eq!(v.conductor(), 8);
        }
        let tv = invariant_tv3(&SurgeryPresentation::unknot(0)).unwrap();
        // τ₃(S¹×S²) = √2 up to a unit, so TV₃ = 2 up to a unit
        assert_eq!(tv.norm(), BigInt::from(16));
    }
}
