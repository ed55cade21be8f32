//! Ideals of `Z[ζ_p]` as full-rank integer lattices in Hermite normal form.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::cyclotomic::{CycInt, Valuation};
use crate::error::{Error, Result};

/// Row-style Hermite normal form: echelon rows, positive pivots, entries above
/// each pivot reduced into `[0, pivot)`. Zero rows are dropped.
pub fn hermite_normal_form(rows: Vec<Vec<BigInt>>, ncols: usize) -> Vec<Vec<BigInt>> {
    let mut a: Vec<Vec<BigInt>> = rows
        .into_iter()
        .filter(|r| r.iter().any(|c| !c.is_zero()))
        .collect();
    let m = a.len();
    let mut r = 0;
    for col in 0..ncols {
        if r == m {
            break;
        }
        loop {
            let best = (r..m)
                .filter(|&i| !a[i][col].is_zero())
                .min_by(|&i, &j| a[i][col].abs().cmp(&a[j][col].abs()));
            let Some(best) = best else { break };
            a.swap(r, best);
            let mut done = true;
            for i in r + 1..m {
                if a[i][col].is_zero() {
                    continue;
                }
                let q = a[i][col].div_floor(&a[r][col]);
                sub_multiple(&mut a, i, r, &q);
                if !a[i][col].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if a[r][col].is_zero() {
            continue;
        }
        if a[r][col].is_negative() {
            a[r].iter_mut().for_each(|c| *c = -&*c);
        }
        for i in 0..r {
            let q = a[i][col].div_floor(&a[r][col]);
            if !q.is_zero() {
                sub_multiple(&mut a, i, r, &q);
            }
        }
        r += 1;
    }
    a.truncate(r);
    a
}

fn sub_multiple(a: &mut [Vec<BigInt>], target: usize, src: usize, q: &BigInt) {
    let (t, s) = if target < src {
        let (lo, hi) = a.split_at_mut(src);
        (&mut lo[target], &hi[0])
    } else {
        let (lo, hi) = a.split_at_mut(target);
        (&mut hi[0], &lo[src])
    };
    for (x, y) in t.iter_mut().zip(s.iter()) {
        *x -= q * y;
    }
}

/// An ideal of `Z[ζ_p]`, stored as the HNF of a `Z`-basis in the power basis.
/// The zero ideal has an empty basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IdealLattice {
    p: u32,
    basis: Vec<Vec<BigInt>>,
}

impl IdealLattice {
    fn rank(p: u32) -> usize {
        (p - 1) as usize
    }

    pub fn zero(p: u32) -> Self {
        IdealLattice {
            p,
            basis: Vec::new(),
        }
    }

    pub fn unit(p: u32) -> Self {
        Self::from_generators(p, &[CycInt::one(p)]).expect("conductor matches")
    }

    /// The ideal generated by `gens`: the lattice spanned by all `ζ^j g`.
    pub fn from_generators(p: u32, gens: &[CycInt]) -> Result<Self> {
        let n = Self::rank(p);
        let mut rows = Vec::with_capacity(gens.len() * n);
        for g in gens {
            if g.conductor() != p {
                return Err(Error::ConductorMismatch(g.conductor(), p));
            }
            if g.is_zero() {
                continue;
            }
            let mut x = g.clone();
            for _ in 0..n {
                rows.push(x.coeffs().to_vec());
                x = x.mul_zeta_pow(1);
            }
        }
        Self::from_rows(p, rows)
    }

    fn from_rows(p: u32, rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let n = Self::rank(p);
        let basis = hermite_normal_form(rows, n);
        if !basis.is_empty() && basis.len() != n {
            return Err(Error::Parse(format!(
                "lattice of rank {} is not an ideal of Z[zeta_{p}]",
                basis.len()
            )));
        }
        let ideal = IdealLattice { p, basis };
        if !ideal.is_zeta_closed() {
            return Err(Error::Parse(
                "lattice is not closed under multiplication by zeta".into(),
            ));
        }
        Ok(ideal)
    }

    /// Builds an ideal from an explicit `Z`-basis, checking closure under `ζ`.
    pub fn from_basis(p: u32, rows: Vec<Vec<BigInt>>) -> Result<Self> {
        if rows.iter().any(|r| r.len() != Self::rank(p)) {
            return Err(Error::Parse("basis rows must have length p - 1".into()));
        }
        Self::from_rows(p, rows)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn hnf(&self) -> &[Vec<BigInt>] {
        &self.basis
    }

    pub fn basis_elements(&self) -> Vec<CycInt> {
        self.basis
            .iter()
            .map(|r| CycInt::from_coeffs(self.p, r.clone()))
            .collect()
    }

    fn is_zeta_closed(&self) -> bool {
        self.basis_elements()
            .iter()
            .all(|b| self.contains(&b.mul_zeta_pow(1)))
    }

    /// `|det(basis)|`, zero for the zero ideal.
    pub fn norm(&self) -> BigInt {
        if self.is_zero() {
            return BigInt::zero();
        }
        (0..self.basis.len())
            .map(|i| self.basis[i][i].clone())
            .product()
    }

    pub fn contains(&self, x: &CycInt) -> bool {
        if x.conductor() != self.p {
            return false;
        }
        if self.is_zero() {
            return x.is_zero();
        }
        let mut v: Vec<BigInt> = x.coeffs().to_vec();
        for (i, row) in self.basis.iter().enumerate() {
            if v[i].is_zero() {
                continue;
            }
            let (q, r) = v[i].div_rem(&row[i]);
            if !r.is_zero() {
                return false;
            }
            for (a, b) in v.iter_mut().zip(row) {
                *a -= &q * b;
            }
        }
        v.iter().all(Zero::is_zero)
    }

    /// `other ⊆ self`.
    pub fn contains_ideal(&self, other: &IdealLattice) -> bool {
        self.p == other.p && other.basis_elements().iter().all(|b| self.contains(b))
    }

    pub fn mul(&self, other: &IdealLattice) -> Result<IdealLattice> {
        if self.p != other.p {
            return Err(Error::ConductorMismatch(self.p, other.p));
        }
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(self.p));
        }
        let a = self.basis_elements();
        let b = other.basis_elements();
        let rows = a
            .iter()
            .flat_map(|x| b.iter().map(move |y| (x * y).coeffs().to_vec()))
            .collect();
        Self::from_rows(self.p, rows)
    }

    /// Exponent of `(h)`, `h = 1 - ζ_p`, in the factorization.
    pub fn nu_h(&self) -> Valuation {
        self.basis_elements()
            .iter()
            .map(CycInt::nu_h)
            .min()
            .unwrap_or(Valuation::Infinite)
    }

    /// The ideal with its full `(h)`-part removed: `{x : h^ν x ∈ I}`.
    pub fn breve(&self) -> IdealLattice {
        let Valuation::Finite(nu) = self.nu_h() else {
            return Self::zero(self.p);
        };
        // multiplication by h^{-ν} maps a Z-basis of I onto a Z-basis of the colon ideal
        let rows = self
            .basis_elements()
            .into_iter()
            .map(|mut b| {
                for _ in 0..nu {
                    b = b.div_h().expect("every basis element has valuation >= nu");
                }
                b.coeffs().to_vec()
            })
            .collect();
        Self::from_rows(self.p, rows).expect("colon of an ideal is an ideal")
    }

    /// `I = (g)` as ideals.
    pub fn matches_principal(&self, g: &CycInt) -> bool {
        match Self::from_generators(self.p, std::slice::from_ref(g)) {
            Ok(j) => *self == j,
            Err(_) => false,
        }
    }

    /// Image of the ideal under `ζ ↦ ζ^t`.
    pub fn galois(&self, t: i64) -> Result<IdealLattice> {
        let gens = self
            .basis_elements()
            .iter()
            .map(|b| b.galois(t))
            .collect::<Result<Vec<_>>>()?;
        Self::from_generators(self.p, &gens)
    }

    /// Stable 64-bit FNV-1a digest of the HNF, for compact tabular output.
    pub fn hnf_hash(&self) -> String {
        fnv64(self.to_string().as_bytes())
    }

    /// True for the unit ideal `(1)`.
    pub fn is_unit(&self) -> bool {
        !self.is_zero() && self.norm().is_one()
    }

    pub fn report(&self, principal_match: Option<&CycInt>) -> IdealReport {
        IdealReport {
            p: self.p,
            hnf: self
                .basis
                .iter()
                .map(|r| r.iter().map(bigint_json).collect())
                .collect(),
            norm: bigint_json(&self.norm()),
            nu_h: self.nu_h().to_string(),
            principal_match: principal_match.map(|g| g.to_string()),
        }
    }
}

impl fmt::Display for IdealLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "(0)");
        }
        let rows: Vec<String> = self
            .basis
            .iter()
            .map(|r| {
                let cells: Vec<String> = r.iter().map(|c| c.to_string()).collect();
                format!("[{}]", cells.join(", "))
            })
            .collect();
        write!(f, "[{}]", rows.join(", "))
    }
}

/// JSON rendering of an ideal.
#[derive(Clone, Debug, Serialize)]
pub struct IdealReport {
    pub p: u32,
    pub hnf: Vec<Vec<serde_json::Value>>,
    pub norm: serde_json::Value,
    pub nu_h: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub principal_match: Option<String>,
}

pub(crate) fn bigint_json(x: &BigInt) -> serde_json::Value {
    match x.to_i64() {
        Some(v) => serde_json::Value::from(v),
        None => serde_json::Value::from(x.to_string()),
    }
}

/// `(h^k)` in `Z[ζ_p]`.
pub fn h_power_ideal(p: u32, k: u32) -> IdealLattice {
    let h = CycInt::from_i64s(p, &[1, -1]);
    IdealLattice::from_generators(p, &[h.pow(k)]).expect("conductor matches")
}

/// 64-bit FNV-1a digest, hex encoded.
pub(crate) fn fnv64(bytes: &[u8]) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}
