//! Exact arithmetic in cyclotomic rings `Z[ζ_n]` and their fraction fields.
//!
//! Elements are stored in the power basis `1, ζ, …, ζ^{φ(n)-1}` and are always
//! reduced modulo the n-th cyclotomic polynomial, so equality is coefficient
//! equality.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

struct RingData {
    phi: usize,
    prime: bool,
    /// `x^j mod Φ_n` for `0 <= j < n`.
    powers: Vec<Vec<i64>>,
    /// Monic `Φ_n`, low degree first.
    poly: Vec<i64>,
}

fn ring_cache() -> &'static RwLock<HashMap<u32, Arc<RingData>>> {
    static CACHE: OnceLock<RwLock<HashMap<u32, Arc<RingData>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

fn ring(n: u32) -> Arc<RingData> {
    assert!(n >= 1, "conductor must be positive");
    if let Some(r) = ring_cache().read().unwrap().get(&n) {
        return r.clone();
    }
    let poly = cyclotomic_poly(n);
    let phi = poly.len() - 1;
    let mut powers = Vec::with_capacity(n as usize);
    let mut cur = vec![0i64; phi];
    if phi > 0 {
        cur[0] = 1;
    }
    for _ in 0..n {
        powers.push(cur.clone());
        // multiply by x and reduce the overflow term with the monic polynomial
        let top = if phi > 0 { cur[phi - 1] } else { 0 };
        for j in (1..phi).rev() {
            cur[j] = cur[j - 1];
        }
        if phi > 0 {
            cur[0] = 0;
        }
        for j in 0..phi {
            cur[j] -= top * poly[j];
        }
    }
    let data = Arc::new(RingData {
        phi,
        prime: is_prime(n),
        powers,
        poly,
    });
    ring_cache().write().unwrap().insert(n, data.clone());
    data
}

/// Coefficients of `Φ_n`, low degree first.
pub fn cyclotomic_poly(n: u32) -> Vec<i64> {
    // Φ_n = (x^n - 1) / prod_{d | n, d < n} Φ_d
    let mut num = vec![0i64; n as usize + 1];
    num[0] = -1;
    num[n as usize] = 1;
    for d in 1..n {
        if n.is_multiple_of(d) {
            num = poly_div_exact(&num, &cyclotomic_poly(d));
        }
    }
    num
}

fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let lead = den[dd];
    let mut q = vec![0i64; rem.len() - dd];
    for i in (0..q.len()).rev() {
        let c = rem[i + dd] / lead;
        q[i] = c;
        for j in 0..=dd {
            rem[i + j] -= c * den[j];
        }
    }
    debug_assert!(rem.iter().all(|&c| c == 0));
    q
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub fn euler_phi(n: u32) -> usize {
    (1..=n).filter(|&k| k.gcd(&n) == 1).count()
}

/// `h`-adic valuation; `Infinite` only for zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Valuation {
    Finite(u32),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<u32> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }
}

impl std::ops::Add for Valuation {
    type Output = Valuation;
    fn add(self, rhs: Valuation) -> Valuation {
        match (self, rhs) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Infinite,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

/// An element of `Z[ζ_n]`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct CycInt {
    n: u32,
    coeffs: Vec<BigInt>,
}

/// Reduce a length-`n` vector indexed by powers of ζ into canonical form.
fn reduce_cyclic(n: u32, buf: Vec<BigInt>) -> Vec<BigInt> {
    let r = ring(n);
    debug_assert_eq!(buf.len(), n as usize);
    if r.prime {
        // Φ_p = 1 + x + ... + x^{p-1}
        let top = buf[r.phi].clone();
        if top.is_zero() {
            let mut buf = buf;
            buf.truncate(r.phi);
            return buf;
        }
        return buf[..r.phi].iter().map(|c| c - &top).collect();
    }
    let mut out = vec![BigInt::zero(); r.phi];
    for (j, c) in buf.into_iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        if j < r.phi {
            out[j] += c;
        } else {
            for (o, &t) in out.iter_mut().zip(&r.powers[j]) {
                if t != 0 {
                    *o += &c * t;
                }
            }
        }
    }
    out
}

impl CycInt {
    /// Builds an element from coefficients of powers of ζ_n (any length; index taken mod n).
    pub fn from_coeffs(n: u32, coeffs: Vec<BigInt>) -> Self {
        let mut buf = vec![BigInt::zero(); n as usize];
        for (j, c) in coeffs.into_iter().enumerate() {
            buf[j % n as usize] += c;
        }
        CycInt {
            n,
            coeffs: reduce_cyclic(n, buf),
        }
    }

    pub fn from_i64s(n: u32, coeffs: &[i64]) -> Self {
        Self::from_coeffs(n, coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero(n: u32) -> Self {
        CycInt {
            n,
            coeffs: vec![BigInt::zero(); ring(n).phi],
        }
    }

    pub fn from_int(n: u32, c: impl Into<BigInt>) -> Self {
        let mut z = Self::zero(n);
        z.coeffs[0] = c.into();
        z
    }

    pub fn one(n: u32) -> Self {
        Self::from_int(n, 1)
    }

    /// `ζ_n^k` for any integer `k`.
    pub fn zeta_pow(n: u32, k: i64) -> Self {
        let mut buf = vec![BigInt::zero(); n as usize];
        buf[k.rem_euclid(n as i64) as usize] = BigInt::one();
        CycInt {
            n,
            coeffs: reduce_cyclic(n, buf),
        }
    }

    pub fn conductor(&self) -> u32 {
        self.n
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(Zero::is_zero)
    }

    /// The rational integer this element equals, if it lies in `Z`.
    pub fn as_integer(&self) -> Option<&BigInt> {
        if self.coeffs[1..].iter().all(Zero::is_zero) {
            Some(&self.coeffs[0])
        } else {
            None
        }
    }

    fn check(&self, other: &CycInt) -> Result<()> {
        if self.n != other.n {
            Err(Error::ConductorMismatch(self.n, other.n))
        } else {
            Ok(())
        }
    }

    pub fn try_add(&self, other: &CycInt) -> Result<CycInt> {
        self.check(other)?;
        Ok(CycInt {
            n: self.n,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn try_sub(&self, other: &CycInt) -> Result<CycInt> {
        self.check(other)?;
        Ok(CycInt {
            n: self.n,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn try_mul(&self, other: &CycInt) -> Result<CycInt> {
        self.check(other)?;
        let n = self.n as usize;
        let mut buf = vec![BigInt::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    buf[(i + j) % n] += a * b;
                }
            }
        }
        Ok(CycInt {
            n: self.n,
            coeffs: reduce_cyclic(self.n, buf),
        })
    }

    /// In-place `self += other`; panics on conductor mismatch.
    pub fn add_assign_ref(&mut self, other: &CycInt) {
        assert_eq!(self.n, other.n, "conductor mismatch");
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
    }

    pub fn scale(&self, c: &BigInt) -> CycInt {
        CycInt {
            n: self.n,
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// Multiplies by `ζ_n^k`.
    pub fn mul_zeta_pow(&self, k: i64) -> CycInt {
        let n = self.n as i64;
        let shift = k.rem_euclid(n) as usize;
        let mut buf = vec![BigInt::zero(); n as usize];
        for (j, c) in self.coeffs.iter().enumerate() {
            buf[(j + shift) % n as usize] = c.clone();
        }
        CycInt {
            n: self.n,
            coeffs: reduce_cyclic(self.n, buf),
        }
    }

    pub fn pow(&self, e: u32) -> CycInt {
        let mut acc = CycInt::one(self.n);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// The ring automorphism `ζ ↦ ζ^t`.
    pub fn galois(&self, t: i64) -> Result<CycInt> {
        let n = self.n as i64;
        if t.rem_euclid(n).gcd(&n) != 1 && n > 1 {
            return Err(Error::NotCoprime { t, n: self.n });
        }
        let mut buf = vec![BigInt::zero(); n as usize];
        for (j, c) in self.coeffs.iter().enumerate() {
            buf[((j as i64) * t).rem_euclid(n) as usize] += c;
        }
        Ok(CycInt {
            n: self.n,
            coeffs: reduce_cyclic(self.n, buf),
        })
    }

    /// Complex conjugation `ζ ↦ ζ^{-1}`.
    pub fn conj(&self) -> CycInt {
        self.galois(-1).expect("-1 is always a unit")
    }

    /// Units of `Z/n`, i.e. the exponents indexing the Galois group.
    pub fn galois_exponents(n: u32) -> Vec<i64> {
        (1..n.max(2) as i64)
            .filter(|t| t.gcd(&(n as i64)) == 1)
            .collect()
    }

    /// Absolute norm, computed as the resultant of `Φ_n` and the representing polynomial.
    pub fn norm(&self) -> BigInt {
        let r = ring(self.n);
        let deg = match self.coeffs.iter().rposition(|c| !c.is_zero()) {
            None => return BigInt::zero(),
            Some(d) => d,
        };
        if deg == 0 {
            return Pow::pow(self.coeffs[0].abs(), r.phi as u32);
        }
        let phi_poly: Vec<BigInt> = r.poly.iter().map(|&c| BigInt::from(c)).collect();
        resultant(&phi_poly, &self.coeffs[..=deg]).abs()
    }

    /// Absolute norm as the product of all Galois conjugates (independent cross-check of [`norm`]).
    ///
    /// [`norm`]: CycInt::norm
    pub fn norm_by_galois(&self) -> BigInt {
        let mut acc = CycInt::one(self.n);
        for t in Self::galois_exponents(self.n) {
            acc = &acc * &self.galois(t).unwrap();
        }
        acc.as_integer()
            .expect("product of all conjugates is rational")
            .abs()
    }

    pub fn is_unit(&self) -> bool {
        self.norm().is_one()
    }

    /// Sum of coefficients, i.e. the image under `ζ ↦ 1`.
    pub fn augmentation(&self) -> BigInt {
        self.coeffs.iter().sum()
    }

    /// Exact division by `h = 1 - ζ_p` when the conductor is the prime `p`.
    pub fn div_h(&self) -> Option<CycInt> {
        let p = self.n;
        assert!(is_prime(p), "div_h needs prime conductor");
        let aug = self.augmentation();
        let pb = BigInt::from(p);
        if !aug.is_multiple_of(&pb) {
            return None;
        }
        // shift the representative by a multiple of Φ_p so that it vanishes at 1
        let c = -(aug / &pb);
        let mut acc = BigInt::zero();
        let coeffs = self
            .coeffs
            .iter()
            .map(|x| {
                acc += x + &c;
                acc.clone()
            })
            .collect();
        Some(CycInt { n: p, coeffs })
    }

    /// Largest `k` with `h^k | self`, `h = 1 - ζ_p`.
    pub fn nu_h(&self) -> Valuation {
        if self.is_zero() {
            return Valuation::Infinite;
        }
        let mut x = self.clone();
        let mut k = 0;
        while let Some(y) = x.div_h() {
            x = y;
            k += 1;
        }
        Valuation::Finite(k)
    }

    /// Embeds into `Z[ζ_m]` for a multiple `m` of the conductor.
    pub fn lift(&self, m: u32) -> Result<CycInt> {
        if !m.is_multiple_of(self.n) {
            return Err(Error::ConductorMismatch(self.n, m));
        }
        let step = (m / self.n) as usize;
        let mut buf = vec![BigInt::zero(); m as usize];
        for (j, c) in self.coeffs.iter().enumerate() {
            buf[j * step] = c.clone();
        }
        Ok(CycInt {
            n: m,
            coeffs: reduce_cyclic(m, buf),
        })
    }

    /// Inverse of [`lift`]: the element of `Z[ζ_m]` mapping to `self`, if any.
    ///
    /// [`lift`]: CycInt::lift
    pub fn descend(&self, m: u32) -> Option<CycInt> {
        if !self.n.is_multiple_of(m) {
            return None;
        }
        let target_phi = ring(m).phi;
        let cols: Vec<Vec<BigInt>> = (0..target_phi)
            .map(|j| CycInt::zeta_pow(m, j as i64).lift(self.n).unwrap().coeffs)
            .collect();
        let rows = self.coeffs.len();
        // augmented system rows x (target_phi + 1)
        let mut a: Vec<Vec<BigRational>> = (0..rows)
            .map(|i| {
                let mut row: Vec<BigRational> = cols
                    .iter()
                    .map(|c| BigRational::from(c[i].clone()))
                    .collect();
                row.push(BigRational::from(self.coeffs[i].clone()));
                row
            })
            .collect();
        let mut pivot_row = 0;
        let mut pivots = Vec::new();
        for col in 0..target_phi {
            let Some(r) = (pivot_row..rows).find(|&r| !a[r][col].is_zero()) else {
                continue;
            };
            a.swap(pivot_row, r);
            let inv = a[pivot_row][col].recip();
            for v in a[pivot_row].iter_mut() {
                *v *= &inv;
            }
            for r in 0..rows {
                if r != pivot_row && !a[r][col].is_zero() {
                    let f = a[r][col].clone();
                    for c in 0..=target_phi {
                        let d = &a[pivot_row][c] * &f;
                        a[r][c] -= d;
                    }
                }
            }
            pivots.push(col);
            pivot_row += 1;
        }
        if a[pivot_row..].iter().any(|row| !row[target_phi].is_zero()) {
            return None;
        }
        let mut out = vec![BigInt::zero(); target_phi];
        for (r, &col) in pivots.iter().enumerate() {
            let v = &a[r][target_phi];
            if !v.is_integer() {
                return None;
            }
            out[col] = v.to_integer();
        }
        Some(CycInt { n: m, coeffs: out })
    }

    /// Splits an element of `Z[ζ_{4m}]` (m odd) as `re + i·im` with `re, im ∈ Z[ζ_m]`.
    pub fn i_decompose(&self) -> Result<(CycInt, CycInt)> {
        let n = self.n;
        if !n.is_multiple_of(4) || (n / 4).is_multiple_of(2) {
            return Err(Error::ConductorMismatch(n, 4));
        }
        let m = n / 4;
        let m_inv4 = (m % 4) as i64; // odd m is its own inverse mod 4
        let inv4_m = mod_inverse(4, m as i64);
        let mut re = vec![BigInt::zero(); m as usize];
        let mut im = vec![BigInt::zero(); m as usize];
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let j = j as i64;
            let alpha = (j * m_inv4).rem_euclid(4);
            let beta = (j * inv4_m).rem_euclid(m as i64) as usize;
            match alpha {
                0 => re[beta] += c,
                1 => im[beta] += c,
                2 => re[beta] -= c,
                _ => im[beta] -= c,
            }
        }
        Ok((
            CycInt {
                n: m,
                coeffs: reduce_cyclic(m, re),
            },
            CycInt {
                n: m,
                coeffs: reduce_cyclic(m, im),
            },
        ))
    }

    /// `re + i·im` in `Z[ζ_{4m}]`.
    pub fn i_compose(re: &CycInt, im: &CycInt) -> Result<CycInt> {
        re.check(im)?;
        let n = 4 * re.n;
        let i = CycInt::zeta_pow(n, re.n as i64);
        re.lift(n)?.try_add(&(&i * &im.lift(n)?))
    }

    /// Parses the polynomial grammar produced by `Display`, e.g. `1 - 2*z^2`.
    pub fn parse(n: u32, text: &str) -> Result<CycInt> {
        let chars: Vec<char> = text.chars().collect();
        for w in chars.windows(3) {
            if w[1].is_whitespace() && w[0].is_alphanumeric() && w[2].is_alphanumeric() {
                return Err(Error::Parse(format!("missing operator in {text:?}")));
            }
        }
        let s: String = chars.into_iter().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        let mut buf = vec![BigInt::zero(); n as usize];
        let bytes = s.as_bytes();
        let mut i = 0;
        let bad = |msg: &str| Error::Parse(format!("{msg} in {text:?}"));
        while i < bytes.len() {
            let mut sign = BigInt::one();
            if bytes[i] == b'+' || bytes[i] == b'-' {
                if bytes[i] == b'-' {
                    sign = -sign;
                }
                i += 1;
            } else if i > 0 {
                return Err(bad("expected sign"));
            }
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let coef = if i > start {
                s[start..i]
                    .parse::<BigInt>()
                    .map_err(|_| bad("bad integer"))?
            } else {
                BigInt::one()
            };
            let had_digits = i > start;
            if i < bytes.len() && bytes[i] == b'*' {
                i += 1;
                if i >= bytes.len() || bytes[i] != b'z' {
                    return Err(bad("expected z after *"));
                }
            }
            let mut exp: i64 = 0;
            if i < bytes.len() && bytes[i] == b'z' {
                i += 1;
                exp = 1;
                if i < bytes.len() && bytes[i] == b'^' {
                    i += 1;
                    let es = i;
                    if i < bytes.len() && bytes[i] == b'-' {
                        i += 1;
                    }
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    exp = s[es..i].parse().map_err(|_| bad("bad exponent"))?;
                }
            } else if !had_digits {
                return Err(bad("empty term"));
            }
            buf[exp.rem_euclid(n as i64) as usize] += sign * coef;
        }
        Ok(CycInt {
            n,
            coeffs: reduce_cyclic(n, buf),
        })
    }

    /// Parses `poly (n=N)` as printed by [`render`].
    ///
    /// [`render`]: CycInt::render
    pub fn parse_rendered(text: &str) -> Result<CycInt> {
        let t = text.trim();
        let open = t
            .rfind("(n=")
            .ok_or_else(|| Error::Parse(format!("missing conductor in {text:?}")))?;
        let n: u32 = t[open + 3..]
            .trim_end_matches(')')
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad conductor in {text:?}")))?;
        Self::parse(n, &t[..open])
    }

    /// Polynomial with the conductor alongside, e.g. `1 - 2*z^2 (n=5)`.
    pub fn render(&self) -> String {
        format!("{self} (n={})", self.n)
    }
}

use num_traits::Pow;

impl fmt::Display for CycInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            first = false;
            match (j, mag.is_one()) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => write!(f, "z")?,
                (1, false) => write!(f, "{mag}*z")?,
                (_, true) => write!(f, "z^{j}")?,
                (_, false) => write!(f, "{mag}*z^{j}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl std::ops::$tr<&CycInt> for &CycInt {
            type Output = CycInt;
            /// Panics on conductor mismatch; use the `try_` form to get an error instead.
            fn $m(self, rhs: &CycInt) -> CycInt {
                self.$f(rhs).expect("cyclotomic conductor mismatch")
            }
        }
        impl std::ops::$tr<CycInt> for CycInt {
            type Output = CycInt;
            fn $m(self, rhs: CycInt) -> CycInt {
                self.$f(&rhs).expect("cyclotomic conductor mismatch")
            }
        }
    };
}
binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);

impl std::ops::Neg for &CycInt {
    type Output = CycInt;
    fn neg(self) -> CycInt {
        CycInt {
            n: self.n,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl std::ops::Neg for CycInt {
    type Output = CycInt;
    fn neg(self) -> CycInt {
        -&self
    }
}

fn mod_inverse(a: i64, m: i64) -> i64 {
    let e = a.extended_gcd(&m);
    assert_eq!(e.gcd.abs(), 1, "{a} not invertible mod {m}");
    e.x.rem_euclid(m)
}

/// Resultant of two integer polynomials (low degree first) via the Sylvester
/// matrix and fraction-free elimination.
pub fn resultant(f: &[BigInt], g: &[BigInt]) -> BigInt {
    let m = f.len() - 1;
    let n = g.len() - 1;
    let size = m + n;
    if size == 0 {
        return BigInt::one();
    }
    let mut mat = vec![vec![BigInt::zero(); size]; size];
    for i in 0..n {
        for (j, c) in f.iter().rev().enumerate() {
            mat[i][i + j] = c.clone();
        }
    }
    for i in 0..m {
        for (j, c) in g.iter().rev().enumerate() {
            mat[n + i][i + j] = c.clone();
        }
    }
    bareiss_det(mat)
}

/// Determinant by Bareiss fraction-free Gaussian elimination.
pub fn bareiss_det(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

/// An element of `Q(ζ_n)` as a cyclotomic numerator over a positive integer.
#[derive(Clone, Debug)]
pub struct CycFrac {
    num: CycInt,
    den: BigInt,
}

impl CycFrac {
    pub fn new(num: CycInt, den: BigInt) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let (mut num, mut den) = if den.is_negative() {
            (-num, -den)
        } else {
            (num, den)
        };
        if num.is_zero() {
            return CycFrac {
                num,
                den: BigInt::one(),
            };
        }
        let mut g = den.clone();
        for c in &num.coeffs {
            if g.is_one() {
                break;
            }
            g = g.gcd(c);
        }
        if !g.is_one() {
            num.coeffs.iter_mut().for_each(|c| *c /= &g);
            den /= &g;
        }
        CycFrac { num, den }
    }

    pub fn from_int(x: CycInt) -> Self {
        CycFrac {
            num: x,
            den: BigInt::one(),
        }
    }

    pub fn zero(n: u32) -> Self {
        Self::from_int(CycInt::zero(n))
    }

    pub fn one(n: u32) -> Self {
        Self::from_int(CycInt::one(n))
    }

    pub fn num(&self) -> &CycInt {
        &self.num
    }

    pub fn den(&self) -> &BigInt {
        &self.den
    }

    pub fn conductor(&self) -> u32 {
        self.num.n
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_integral(&self) -> bool {
        self.den.is_one()
    }

    pub fn to_cycint(&self) -> Option<CycInt> {
        self.is_integral().then(|| self.num.clone())
    }

    pub fn try_add(&self, o: &CycFrac) -> Result<CycFrac> {
        let a = self.num.scale(&o.den);
        let b = o.num.scale(&self.den);
        Ok(CycFrac::new(a.try_add(&b)?, &self.den * &o.den))
    }

    pub fn try_sub(&self, o: &CycFrac) -> Result<CycFrac> {
        self.try_add(&-o)
    }

    pub fn try_mul(&self, o: &CycFrac) -> Result<CycFrac> {
        Ok(CycFrac::new(self.num.try_mul(&o.num)?, &self.den * &o.den))
    }

    /// `1/x = (product of the nontrivial conjugates of x) / Norm(x)`; `None` for zero.
    pub fn inv(&self) -> Option<CycFrac> {
        if self.is_zero() {
            return None;
        }
        let n = self.num.n;
        let mut others = CycInt::one(n);
        for t in CycInt::galois_exponents(n).into_iter().filter(|&t| t != 1) {
            others = &others * &self.num.galois(t).unwrap();
        }
        let norm = (&self.num * &others)
            .as_integer()
            .expect("x times its conjugates is rational")
            .clone();
        Some(CycFrac::new(others.scale(&self.den), norm))
    }

    pub fn pow(&self, e: i32) -> Option<CycFrac> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut acc = CycFrac::one(self.conductor());
        for _ in 0..e.unsigned_abs() {
            acc = &acc * &base;
        }
        Some(acc)
    }

    pub fn galois(&self, t: i64) -> Result<CycFrac> {
        Ok(CycFrac {
            num: self.num.galois(t)?,
            den: self.den.clone(),
        })
    }

    pub fn lift(&self, m: u32) -> Result<CycFrac> {
        Ok(CycFrac {
            num: self.num.lift(m)?,
            den: self.den.clone(),
        })
    }
}

impl PartialEq for CycFrac {
    fn eq(&self, other: &Self) -> bool {
        self.num.n == other.num.n && self.num.scale(&other.den) == other.num.scale(&self.den)
    }
}

impl Eq for CycFrac {}

impl fmt::Display for CycFrac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / {}", self.num, self.den)
        }
    }
}

impl std::ops::Neg for &CycFrac {
    type Output = CycFrac;
    fn neg(self) -> CycFrac {
        CycFrac {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl std::ops::Add<&CycFrac> for &CycFrac {
    type Output = CycFrac;
    fn add(self, rhs: &CycFrac) -> CycFrac {
        self.try_add(rhs).expect("cyclotomic conductor mismatch")
    }
}

impl std::ops::Sub<&CycFrac> for &CycFrac {
    type Output = CycFrac;
    fn sub(self, rhs: &CycFrac) -> CycFrac {
        self.try_sub(rhs).expect("cyclotomic conductor mismatch")
    }
}

impl std::ops::Mul<&CycFrac> for &CycFrac {
    type Output = CycFrac;
    fn mul(self, rhs: &CycFrac) -> CycFrac {
        self.try_mul(rhs).expect("cyclotomic conductor mismatch")
    }
}

impl From<CycInt> for CycFrac {
    fn from(x: CycInt) -> Self {
        CycFrac::from_int(x)
    }
}

/// `[m] = (q^m - q^{-m}) / (q - q^{-1})` at `q = ζ_n^e`, expanded as
/// `sum_{j<m} q^{m-1-2j}`.
pub fn quantum_int_at(n: u32, e: i64, m: i64) -> CycInt {
    let mut buf = vec![BigInt::zero(); n as usize];
    let (sign, m_abs) = if m < 0 { (-1, -m) } else { (1, m) };
    for j in 0..m_abs {
        let k = ((m_abs - 1 - 2 * j) * e).rem_euclid(n as i64) as usize;
        buf[k] += sign;
    }
    CycInt {
        n,
        coeffs: reduce_cyclic(n, buf),
    }
}

/// The quantum integer `[m]` at `q = ζ_p`.
pub fn quantum_int(p: u32, m: i64) -> CycInt {
    quantum_int_at(p, 1, m)
}

/// Which square root of `-p` was chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SqrtConvention {
    /// `p ≡ 3 (mod 4)`: the quadratic Gauss sum itself.
    GaussSum,
    /// `p ≡ 1 (mod 4)`: `i` times the Gauss sum, with `i = ζ_{4p}^p`.
    ITimesGaussSum,
}

#[derive(Clone, Debug)]
pub struct GaussPair {
    /// `g = sum_{a=0}^{p-1} ζ_p^{a^2}`.
    pub g: CycInt,
    /// A square root of `-p`, in conductor `p` or `4p`.
    pub sqrt_minus_p: CycInt,
    pub convention: SqrtConvention,
}

pub fn gauss_sum(p: u32) -> Result<GaussPair> {
    if !is_prime(p) || p < 3 {
        return Err(Error::BadPrime(p));
    }
    let mut buf = vec![BigInt::zero(); p as usize];
    for a in 0..p as u64 {
        buf[((a * a) % p as u64) as usize] += 1;
    }
    let g = CycInt {
        n: p,
        coeffs: reduce_cyclic(p, buf),
    };
    if p % 4 == 3 {
        Ok(GaussPair {
            sqrt_minus_p: g.clone(),
            g,
            convention: SqrtConvention::GaussSum,
        })
    } else {
        let i = CycInt::zeta_pow(4 * p, p as i64);
        let s = &i * &g.lift(4 * p)?;
        Ok(GaussPair {
            g,
            sqrt_minus_p: s,
            convention: SqrtConvention::ITimesGaussSum,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(n: u32, c: &[i64]) -> CycInt {
        CycInt::from_i64s(n, c)
    }

    #[test]
    fn phi_polys() {
        assert_eq!(cyclotomic_poly(5), vec![1, 1, 1, 1, 1]);
        assert_eq!(cyclotomic_poly(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic_poly(24), vec![1, 0, 0, 0, -1, 0, 0, 0, 1]);
        assert_eq!(cyclotomic_poly(20), vec![1, 0, -1, 0, 1, 0, -1, 0, 1]);
        assert_eq!(euler_phi(24), 8);
    }

    #[test]
    fn basic_identities() {
        let h = z(5, &[1, -1]);
        let s = z(5, &[1, 1, 1, 1, 1]);
        assert!((&h * &s).is_zero());
        assert!((&CycInt::zeta_pow(5, 1) * &CycInt::zeta_pow(5, 4)).is_one());
        let a = z(5, &[1, 0, -2]);
        let b = z(5, &[0, 0, 2]);
        assert!((&a + &b).is_one());
    }

    #[test]
    fn conductor_mismatch_is_an_error() {
        let a = CycInt::one(5);
        let b = CycInt::one(7);
        assert!(matches!(a.try_add(&b), Err(Error::ConductorMismatch(5, 7))));
        assert!(a.try_mul(&b).is_err());
    }

    #[test]
    fn galois_examples() {
        assert_eq!(
            CycInt::zeta_pow(5, 1).galois(2).unwrap(),
            CycInt::zeta_pow(5, 2)
        );
        let a = z(5, &[1, 0, -2]);
        assert_eq!(a.galois(3).unwrap(), z(5, &[1, -2]));
        assert!(a.galois(5).is_err());
        assert!(a.galois(10).is_err());
    }

    #[test]
    fn norms_from_the_table() {
        assert_eq!(z(5, &[1, 0, -2]).norm(), BigInt::from(31));
        assert_eq!(z(5, &[1, 0, 2]).norm(), BigInt::from(11));
        // Φ_5(1) = 5
        assert_eq!(z(5, &[1, -1]).norm(), BigInt::from(5));
        assert_eq!(z(5, &[1, -1]).norm_by_galois(), BigInt::from(5));
        assert_eq!(CycInt::zero(5).norm(), BigInt::zero());
        assert_eq!(CycInt::from_int(5, 3).norm(), BigInt::from(81));
    }

    #[test]
    fn units() {
        assert!(CycInt::zeta_pow(5, 3).is_unit());
        assert!(!z(5, &[1, -1]).is_unit());
        assert!(!CycInt::zero(5).is_unit());
        // 1 + ζ is a unit (cyclotomic unit)
        assert!(z(7, &[1, 1]).is_unit());
    }

    #[test]
    fn nu_h_examples() {
        for p in [5u32, 7, 11, 13] {
            assert_eq!(CycInt::from_int(p, p).nu_h(), Valuation::Finite(p - 1));
            assert_eq!(CycInt::one(p).nu_h(), Valuation::Finite(0));
            assert_eq!(CycInt::zero(p).nu_h(), Valuation::Infinite);
            // h^{p-1} / p is a unit
            let h = z(p, &[1, -1]);
            let hp = h.pow(p - 1);
            let q: Vec<BigInt> = hp
                .coeffs()
                .iter()
                .map(|c| {
                    assert!((c % BigInt::from(p)).is_zero());
                    c / BigInt::from(p)
                })
                .collect();
            assert!(CycInt::from_coeffs(p, q).is_unit());
        }
    }

    #[test]
    fn quantum_integers() {
        assert_eq!(quantum_int(5, 2), z(5, &[0, 1, 0, 0, 1]));
        for p in [5u32, 7, 11] {
            assert!(quantum_int(p, 1).is_one());
            assert!(quantum_int(p, 0).is_zero());
            assert!(quantum_int(p, p as i64).is_zero());
            assert_eq!(quantum_int(p, -3), -quantum_int(p, 3));
        }
    }

    #[test]
    fn quantum_integer_closed_form() {
        // [m](ζ - ζ^{-1}) = ζ^m - ζ^{-m}
        let p = 7;
        let d = &CycInt::zeta_pow(p, 1) - &CycInt::zeta_pow(p, -1);
        for m in 0..10 {
            let lhs = &quantum_int(p, m) * &d;
            let rhs = &CycInt::zeta_pow(p, m) - &CycInt::zeta_pow(p, -m);
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn gauss_sums() {
        let gp = gauss_sum(5).unwrap();
        assert_eq!(gp.g, z(5, &[1, 2, 0, 0, 2]));
        assert_eq!(gp.convention, SqrtConvention::ITimesGaussSum);
        for p in [5u32, 7, 11, 13] {
            let gp = gauss_sum(p).unwrap();
            let s = &gp.sqrt_minus_p;
            assert_eq!(s * s, CycInt::from_int(s.conductor(), -(p as i64)));
        }
        let (re, im) = gauss_sum(5).unwrap().sqrt_minus_p.i_decompose().unwrap();
        assert!(re.is_zero());
        assert_eq!(im.nu_h(), Valuation::Finite(2));
        assert_eq!(
            gauss_sum(7).unwrap().sqrt_minus_p.nu_h(),
            Valuation::Finite(3)
        );
    }

    #[test]
    fn i_decomposition() {
        let p = 5;
        let x = z(p, &[1, 0, -2, 7]);
        let i = CycInt::zeta_pow(4 * p, p as i64);
        let ix = &i * &x.lift(4 * p).unwrap();
        assert_eq!(ix.i_decompose().unwrap(), (CycInt::zero(p), x.clone()));
        assert_eq!(
            x.lift(4 * p).unwrap().i_decompose().unwrap(),
            (x.clone(), CycInt::zero(p))
        );
        let y = z(p, &[0, 3, 1]);
        let w = CycInt::i_compose(&x, &y).unwrap();
        assert_eq!(w.i_decompose().unwrap(), (x, y));
    }

    #[test]
    fn descend_inverts_lift() {
        let x = z(8, &[1, 2, -1, 3]);
        let up = x.lift(24).unwrap();
        assert_eq!(up.descend(8).unwrap(), x);
        assert!(CycInt::zeta_pow(24, 1).descend(8).is_none());
    }

    #[test]
    fn render_and_parse() {
        let a = z(5, &[1, 0, -2]);
        assert_eq!(a.to_string(), "1 - 2*z^2");
        assert_eq!(a.render(), "1 - 2*z^2 (n=5)");
        assert_eq!(CycInt::parse(5, "1 - 2*z^2").unwrap(), a);
        assert_eq!(CycInt::parse(5, "-2z^2+1").unwrap(), a);
        assert_eq!(CycInt::parse_rendered("1 - 2*z^2 (n=5)").unwrap(), a);
        assert_eq!(CycInt::parse(5, "z^5").unwrap(), CycInt::one(5));
        assert_eq!(CycInt::parse(5, "z^-1").unwrap(), CycInt::zeta_pow(5, 4));
        assert_eq!(CycInt::zero(5).to_string(), "0");
        assert_eq!(z(5, &[0, -1, 0, 1]).to_string(), "-z + z^3");
        assert!(CycInt::parse(5, "1 -").is_err());
        assert!(CycInt::parse(5, "").is_err());
        assert!(CycInt::parse(5, "1 2").is_err());
    }

    #[test]
    fn frac_inverse() {
        let x = CycFrac::new(z(7, &[3, -1, 4]), BigInt::from(5));
        let y = x.inv().unwrap();
        assert_eq!(&x * &y, CycFrac::one(7));
        assert!(CycFrac::zero(7).inv().is_none());
        let half = CycFrac::new(CycInt::from_int(5, 2), BigInt::from(4));
        assert_eq!(half.den(), &BigInt::from(2));
    }
}
