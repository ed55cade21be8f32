//! Exact Kauffman bracket evaluation at roots of unity.
//!
//! Cabled diagrams are swept vertex by vertex while carrying a linear
//! combination of pairings of the open edges. Colors enter through
//! Jones–Wenzl projectors expanded in the Temperley–Lieb basis.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::Serialize;

use crate::cyclotomic::{is_prime, quantum_int_at, CycFrac, CycInt};
use crate::error::{Error, Result};
use crate::link_diagram::{CabledDiagram, LinkDiagram};

pub const DEFAULT_FRONTIER_CAP: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Theory {
    /// SO(3) theory at an odd prime `p`.
    So3 { p: u32 },
    /// SU(2) theory at level `r`.
    Su2 { r: u32 },
}

impl fmt::Display for Theory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Theory::So3 { p } => write!(f, "SO3-{p}"),
            Theory::Su2 { r } => write!(f, "SU2-{r}"),
        }
    }
}

/// The skein variable `A = sign * ζ_n^exp` and loop value `δ = -A^2 - A^-2`.
#[derive(Clone, Debug)]
pub struct BracketParams {
    pub theory: Theory,
    n: u32,
    a_sign: i64,
    a_exp: i64,
    delta: CycInt,
    frontier_cap: usize,
}

impl BracketParams {
    fn build(theory: Theory, n: u32, a_sign: i64, a_exp: i64) -> Self {
        let mut bp = BracketParams {
            theory,
            n,
            a_sign,
            a_exp,
            delta: CycInt::zero(n),
            frontier_cap: DEFAULT_FRONTIER_CAP,
        };
        bp.delta = -(&bp.a_pow(2) + &bp.a_pow(-2));
        bp
    }

    /// `A = -ζ_p^{(p+1)/2}`, so `A^2 = ζ_p`.
    pub fn standard_a(p: u32) -> Result<Self> {
        if p < 5 || !is_prime(p) {
            return Err(Error::BadPrime(p));
        }
        Ok(Self::build(Theory::So3 { p }, p, -1, (p as i64 + 1) / 2))
    }

    /// `A = ζ_12`, written in conductor 24. Only `r = 3` is supported.
    pub fn su2(r: u32) -> Result<Self> {
        if r != 3 {
            return Err(Error::UnsupportedTheory(format!("SU(2) at r = {r}")));
        }
        Ok(Self::build(Theory::Su2 { r }, 24, 1, 2))
    }

    pub fn with_frontier_cap(mut self, cap: usize) -> Self {
        self.frontier_cap = cap;
        self
    }

    pub fn frontier_cap(&self) -> usize {
        self.frontier_cap
    }

    pub fn conductor(&self) -> u32 {
        self.n
    }

    pub fn a_pow(&self, k: i64) -> CycInt {
        let z = CycInt::zeta_pow(self.n, k * self.a_exp);
        if self.a_sign < 0 && k.rem_euclid(2) == 1 {
            -z
        } else {
            z
        }
    }

    pub fn a(&self) -> CycInt {
        self.a_pow(1)
    }

    pub fn delta(&self) -> &CycInt {
        &self.delta
    }

    /// Human-readable description of `A`, for output metadata.
    pub fn a_description(&self) -> String {
        let sign = if self.a_sign < 0 { "-" } else { "" };
        format!("A = {sign}z^{} (n={})", self.a_exp, self.n)
    }

    /// `[m]` at `q = A^2`.
    pub fn qint(&self, m: i64) -> CycInt {
        quantum_int_at(self.n, 2 * self.a_exp, m)
    }

    /// `Δ_m = (-1)^m [m+1]`, the value of the `m`-colored unknot.
    pub fn chebyshev(&self, m: i64) -> CycInt {
        let q = self.qint(m + 1);
        if m % 2 == 0 {
            q
        } else {
            -q
        }
    }

    /// Largest admissible color.
    pub fn max_color(&self) -> usize {
        match self.theory {
            Theory::So3 { p } => (p as usize - 3) / 2,
            Theory::Su2 { r } => r as usize - 2,
        }
    }

    /// `μ_c^k` where `μ_c = (-1)^c A^{c^2 + 2c}` is the twist eigenvalue of color `c`.
    pub fn twist_pow(&self, c: usize, k: i64) -> CycInt {
        let c = c as i64;
        let m = self.a_pow(k * (c * c + 2 * c));
        if (c * k).rem_euclid(2) == 1 {
            -m
        } else {
            m
        }
    }

    /// Weight `(-1)^c [c+1]` of color `c` in the surgery element.
    pub fn omega_weight(&self, c: usize) -> CycInt {
        self.chebyshev(c as i64)
    }

    fn cache_tag(&self) -> String {
        format!("{}:{}:{}:{}", self.theory, self.n, self.a_sign, self.a_exp)
    }
}

/// A planar matching on `2c` points: bottom `0..c`, top `c..2c`, each
/// numbered left to right. Stored as a partner array.
pub type Matching = Vec<u8>;

fn identity_matching(c: usize) -> Matching {
    (0..2 * c).map(|i| ((i + c) % (2 * c)) as u8).collect()
}

/// Stacks `top` over `bottom`; returns the matching and the number of closed loops.
fn compose_matchings(top: &[u8], bottom: &[u8], c: usize) -> (Matching, usize) {
    // nodes 0..2c are bottom-diagram points, 2c..4c top-diagram points
    let glue = |node: usize| -> Option<usize> {
        if (c..2 * c).contains(&node) {
            Some(2 * c + (node - c))
        } else if (2 * c..3 * c).contains(&node) {
            Some(c + (node - 2 * c))
        } else {
            None
        }
    };
    let inner = |node: usize| -> usize {
        if node < 2 * c {
            bottom[node] as usize
        } else {
            2 * c + top[node - 2 * c] as usize
        }
    };
    let external = |node: usize| -> Option<usize> {
        if node < c {
            Some(node)
        } else if node >= 3 * c {
            Some(node - 2 * c)
        } else {
            None
        }
    };
    let mut out = vec![0u8; 2 * c];
    let mut seen = vec![false; 4 * c];
    for start in (0..c).chain(3 * c..4 * c) {
        if seen[start] {
            continue;
        }
        let mut node = start;
        loop {
            seen[node] = true;
            let other = inner(node);
            seen[other] = true;
            if let Some(e) = external(other) {
                let s = external(start).unwrap();
                out[s] = e as u8;
                out[e] = s as u8;
                break;
            }
            node = glue(other).unwrap();
        }
    }
    let mut loops = 0;
    for start in c..2 * c {
        if seen[start] {
            continue;
        }
        loops += 1;
        let mut node = start;
        while !seen[node] {
            seen[node] = true;
            let other = inner(node);
            seen[other] = true;
            node = glue(other).unwrap();
        }
    }
    (out, loops)
}

/// A linear combination of Temperley–Lieb basis diagrams on `c` strands.
#[derive(Clone, Debug)]
pub struct TlElement {
    strands: usize,
    n: u32,
    terms: BTreeMap<Matching, CycFrac>,
}

impl PartialEq for TlElement {
    fn eq(&self, other: &Self) -> bool {
        self.strands == other.strands && self.terms == other.terms
    }
}

impl TlElement {
    pub fn identity(c: usize, n: u32) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(identity_matching(c), CycFrac::one(n));
        TlElement {
            strands: c,
            n,
            terms,
        }
    }

    /// `e_i` for `1 <= i < c`: a cap on bottom points `i-1, i` and a cup on top.
    pub fn generator(c: usize, i: usize, n: u32) -> Self {
        assert!(i >= 1 && i < c);
        let mut m = identity_matching(c);
        m[i - 1] = i as u8;
        m[i] = (i - 1) as u8;
        m[c + i - 1] = (c + i) as u8;
        m[c + i] = (c + i - 1) as u8;
        let mut terms = BTreeMap::new();
        terms.insert(m, CycFrac::one(n));
        TlElement {
            strands: c,
            n,
            terms,
        }
    }

    pub fn strands(&self) -> usize {
        self.strands
    }

    pub fn terms(&self) -> &BTreeMap<Matching, CycFrac> {
        &self.terms
    }

    fn insert(&mut self, m: Matching, v: CycFrac) {
        let zero = {
            let e = self
                .terms
                .entry(m.clone())
                .or_insert_with(|| CycFrac::zero(v.conductor()));
            *e = &*e + &v;
            e.is_zero()
        };
        if zero {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, other: &TlElement) -> TlElement {
        let mut out = self.clone();
        for (m, v) in &other.terms {
            out.insert(m.clone(), v.clone());
        }
        out
    }

    pub fn scale(&self, s: &CycFrac) -> TlElement {
        let mut out = TlElement {
            strands: self.strands,
            n: self.n,
            terms: BTreeMap::new(),
        };
        if s.is_zero() {
            return out;
        }
        for (m, v) in &self.terms {
            out.terms.insert(m.clone(), v * s);
        }
        out
    }

    /// `self` stacked on top of `below`.
    pub fn compose(&self, below: &TlElement, params: &BracketParams) -> TlElement {
        assert_eq!(self.strands, below.strands);
        let c = self.strands;
        let mut out = TlElement {
            strands: c,
            n: self.n,
            terms: BTreeMap::new(),
        };
        let delta = CycFrac::from(params.delta().clone());
        for (mt, vt) in &self.terms {
            for (mb, vb) in &below.terms {
                let (m, loops) = compose_matchings(mt, mb, c);
                let mut v = vt * vb;
                for _ in 0..loops {
                    v = &v * &delta;
                }
                out.insert(m, v);
            }
        }
        out
    }

    /// `self ⊗ 1`: one extra straight strand on the right.
    pub fn tensor_id(&self) -> TlElement {
        let c = self.strands;
        let map = |i: u8| -> u8 {
            let i = i as usize;
            (if i < c { i } else { i + 1 }) as u8
        };
        let terms = self
            .terms
            .iter()
            .map(|(m, v)| {
                let mut nm = vec![0u8; 2 * c + 2];
                for (i, &j) in m.iter().enumerate() {
                    nm[map(i as u8) as usize] = map(j);
                }
                nm[c] = (2 * c + 1) as u8;
                nm[2 * c + 1] = c as u8;
                (nm, v.clone())
            })
            .collect();
        TlElement {
            strands: c + 1,
            n: self.n,
            terms,
        }
    }

    /// Closes the strands of the left side (trace) and returns its bracket.
    pub fn trace(&self, params: &BracketParams) -> CycFrac {
        let c = self.strands;
        let mut total = CycFrac::zero(self.n);
        for (m, v) in &self.terms {
            // identify bottom i with top c+i
            let mut seen = vec![false; 2 * c];
            let mut loops = 0u32;
            for s in 0..2 * c {
                if seen[s] {
                    continue;
                }
                loops += 1;
                let mut node = s;
                while !seen[node] {
                    seen[node] = true;
                    let other = m[node] as usize;
                    seen[other] = true;
                    node = if other < c { other + c } else { other - c };
                }
            }
            let dl = CycFrac::from(params.delta().pow(loops));
            total = &total + &(v * &dl);
        }
        total
    }

    /// Scales by the least common integer denominator; returns integral terms and that denominator.
    fn integral(&self) -> (Vec<(Matching, CycInt)>, BigInt) {
        let mut l = BigInt::one();
        for v in self.terms.values() {
            l = l.lcm(v.den());
        }
        let terms = self
            .terms
            .iter()
            .map(|(m, v)| (m.clone(), v.num().scale(&(&l / v.den()))))
            .collect();
        (terms, l)
    }
}

/// The Jones–Wenzl projector `f_c` via the Wenzl recursion
/// `f_c = f_{c-1}⊗1 - (Δ_{c-2}/Δ_{c-1}) (f_{c-1}⊗1) e_{c-1} (f_{c-1}⊗1)`.
pub fn jones_wenzl(c: usize, params: &BracketParams) -> Result<TlElement> {
    let n = params.conductor();
    let mut f = TlElement::identity(0, n);
    if c == 0 {
        return Ok(f);
    }
    f = TlElement::identity(1, n);
    for k in 2..=c {
        let denom = params.chebyshev(k as i64 - 1);
        if denom.is_zero() {
            return Err(Error::VanishingQuantumInteger(k as i64));
        }
        let ratio = &CycFrac::from(params.chebyshev(k as i64 - 2))
            * &CycFrac::from(denom).inv().expect("nonzero");
        let g = f.tensor_id();
        let e = TlElement::generator(k, k - 1, n);
        let geg = g.compose(&e, params).compose(&g, params);
        f = g.add(&geg.scale(&-&ratio));
    }
    Ok(f)
}

struct Vertex {
    edges: Vec<u32>,
    terms: Vec<(Matching, CycInt)>,
}

/// Diagnostics from one sweep.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct SweepStats {
    pub vertices: usize,
    pub max_frontier: usize,
    pub max_states: usize,
}

fn network(
    cable: &CabledDiagram,
    insertions: &[TlElement],
    params: &BracketParams,
) -> Result<(Vec<Vertex>, BigInt)> {
    if insertions.len() != cable.projectors.len() {
        return Err(Error::InvalidPd(format!(
            "{} insertions for {} projector sites",
            insertions.len(),
            cable.projectors.len()
        )));
    }
    let a = params.a_pow(1);
    let ai = params.a_pow(-1);
    let mut vs: Vec<Vertex> = cable
        .crossings
        .iter()
        .map(|x| Vertex {
            edges: x.iter().map(|&e| e as u32).collect(),
            terms: vec![
                (vec![1, 0, 3, 2], a.clone()),
                (vec![3, 2, 1, 0], ai.clone()),
            ],
        })
        .collect();
    let mut den = BigInt::one();
    for (site, ins) in cable.projectors.iter().zip(insertions) {
        if ins.strands() != site.inputs.len() {
            return Err(Error::InvalidPd(format!(
                "insertion on {} strands at a site of width {}",
                ins.strands(),
                site.inputs.len()
            )));
        }
        let (terms, d) = ins.integral();
        den *= d;
        let edges = site
            .inputs
            .iter()
            .chain(&site.outputs)
            .map(|&e| e as u32)
            .collect();
        vs.push(Vertex { edges, terms });
    }
    Ok((vs, den))
}

fn greedy_order(vs: &[Vertex]) -> Vec<usize> {
    let mut done = vec![false; vs.len()];
    let mut open: HashSet<u32> = HashSet::new();
    let mut order = Vec::with_capacity(vs.len());
    for _ in 0..vs.len() {
        let mut best: Option<(i64, usize)> = None;
        for (i, v) in vs.iter().enumerate() {
            if done[i] {
                continue;
            }
            let mut score = 0i64;
            for (s, e) in v.edges.iter().enumerate() {
                let twice = v.edges.iter().enumerate().any(|(t, f)| t != s && f == e);
                if twice {
                    continue;
                }
                score += if open.contains(e) { 1 } else { -1 };
            }
            if best.is_none_or(|(b, _)| score > b) {
                best = Some((score, i));
            }
        }
        let (_, i) = best.unwrap();
        done[i] = true;
        for e in &vs[i].edges {
            if !open.remove(e) {
                open.insert(*e);
            }
        }
        order.push(i);
    }
    order
}

type State = Vec<(u32, u32)>;

#[derive(Clone, Copy)]
enum Outer {
    Slot(usize),
    Term(u32),
}

fn sweep(vs: &[Vertex], order: &[usize], params: &BracketParams) -> Result<(CycInt, SweepStats)> {
    let n = params.conductor();
    let mut stats = SweepStats {
        vertices: vs.len(),
        ..Default::default()
    };
    let mut delta_pows = vec![CycInt::one(n)];
    let mut vec: HashMap<State, CycInt> = HashMap::new();
    vec.insert(Vec::new(), CycInt::one(n));
    let mut open: HashSet<u32> = HashSet::new();
    for &vi in order {
        let v = &vs[vi];
        let k = v.edges.len();
        let slot_of = |e: u32, not: usize| {
            v.edges
                .iter()
                .enumerate()
                .position(|(t, &f)| f == e && t != not)
        };
        let closing: Vec<bool> = v.edges.iter().map(|e| open.contains(e)).collect();
        let closing_set: HashSet<u32> = v
            .edges
            .iter()
            .zip(&closing)
            .filter(|(_, &c)| c)
            .map(|(e, _)| *e)
            .collect();
        let mut next: HashMap<State, CycInt> = HashMap::new();
        for (state, coeff) in &vec {
            let mut partner: HashMap<u32, u32> = HashMap::new();
            for &(a, b) in state {
                if closing_set.contains(&a) || closing_set.contains(&b) {
                    partner.insert(a, b);
                    partner.insert(b, a);
                }
            }
            let outer: Vec<Outer> = (0..k)
                .map(|s| {
                    let e = v.edges[s];
                    if let Some(t) = slot_of(e, s) {
                        Outer::Slot(t)
                    } else if closing[s] {
                        let f = partner[&e];
                        match closing_set
                            .contains(&f)
                            .then(|| slot_of(f, usize::MAX))
                            .flatten()
                        {
                            Some(t) => Outer::Slot(t),
                            None => Outer::Term(f),
                        }
                    } else {
                        Outer::Term(e)
                    }
                })
                .collect();
            let kept: Vec<(u32, u32)> = state
                .iter()
                .copied()
                .filter(|(a, b)| !closing_set.contains(a) && !closing_set.contains(b))
                .collect();
            for (local, tcoeff) in &v.terms {
                let mut seen = vec![false; k];
                let mut pairs = kept.clone();
                for s in 0..k {
                    let Outer::Term(t0) = outer[s] else { continue };
                    if seen[s] {
                        continue;
                    }
                    let mut cur = s;
                    loop {
                        seen[cur] = true;
                        let l = local[cur] as usize;
                        seen[l] = true;
                        match outer[l] {
                            Outer::Term(t1) => {
                                pairs.push((t0.min(t1), t0.max(t1)));
                                break;
                            }
                            Outer::Slot(t) => cur = t,
                        }
                    }
                }
                let mut loops = 0usize;
                for s in 0..k {
                    if seen[s] {
                        continue;
                    }
                    loops += 1;
                    let mut cur = s;
                    while !seen[cur] {
                        seen[cur] = true;
                        let l = local[cur] as usize;
                        seen[l] = true;
                        match outer[l] {
                            Outer::Slot(t) => cur = t,
                            Outer::Term(_) => unreachable!("terminals were traced"),
                        }
                    }
                }
                while delta_pows.len() <= loops {
                    let last = delta_pows.last().unwrap() * params.delta();
                    delta_pows.push(last);
                }
                let mut val = coeff * tcoeff;
                if loops > 0 {
                    val = &val * &delta_pows[loops];
                }
                if val.is_zero() {
                    continue;
                }
                pairs.sort_unstable();
                match next.get_mut(&pairs) {
                    Some(x) => x.add_assign_ref(&val),
                    None => {
                        next.insert(pairs, val);
                    }
                }
            }
        }
        next.retain(|_, x| !x.is_zero());
        for (s, e) in v.edges.iter().enumerate() {
            if slot_of(*e, s).is_some() {
                continue;
            }
            if closing[s] {
                open.remove(e);
            } else {
                open.insert(*e);
            }
        }
        if open.len() > params.frontier_cap {
            return Err(Error::FrontierCap {
                width: open.len(),
                cap: params.frontier_cap,
            });
        }
        stats.max_frontier = stats.max_frontier.max(open.len());
        stats.max_states = stats.max_states.max(next.len());
        vec = next;
    }
    let total = vec.remove(&Vec::new()).unwrap_or_else(|| CycInt::zero(n));
    Ok((total, stats))
}

/// Kauffman bracket of a cabled diagram with one TL insertion per projector site.
pub fn bracket(
    cable: &CabledDiagram,
    insertions: &[TlElement],
    params: &BracketParams,
) -> Result<CycFrac> {
    bracket_with_order(cable, insertions, params, None).map(|(v, _)| v)
}

/// As [`bracket`], sweeping vertices in the given order (crossings first,
/// then projector sites) instead of the greedy one.
pub fn bracket_with_order(
    cable: &CabledDiagram,
    insertions: &[TlElement],
    params: &BracketParams,
    order: Option<&[usize]>,
) -> Result<(CycFrac, SweepStats)> {
    let (vs, den) = network(cable, insertions, params)?;
    let order = match order {
        Some(o) => {
            let mut check = o.to_vec();
            check.sort_unstable();
            if check != (0..vs.len()).collect::<Vec<_>>() {
                return Err(Error::InvalidPd("sweep order is not a permutation".into()));
            }
            o.to_vec()
        }
        None => greedy_order(&vs),
    };
    let (v, stats) = sweep(&vs, &order, params)?;
    let v = &v * &params.delta().pow(cable.free_loops as u32);
    Ok((CycFrac::new(v, den), stats))
}

fn cache() -> &'static Mutex<HashMap<String, CycFrac>> {
    static CACHE: OnceLock<Mutex<HashMap<String, CycFrac>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Drops all memoized cabled brackets.
pub fn clear_cache() {
    if let Ok(mut c) = cache().lock() {
        c.clear();
    }
}

/// Number of memoized cabled brackets.
pub fn cache_len() -> usize {
    cache().lock().map(|c| c.len()).unwrap_or(0)
}

fn check_colors(colors: &[usize], params: &BracketParams) -> Result<()> {
    let max = params.max_color();
    match colors.iter().find(|&&c| c > max) {
        Some(&c) => Err(Error::ColorOutOfRange { color: c, max }),
        None => Ok(()),
    }
}

/// Bracket of the blackboard cable with `f_c` inserted on each component (no framing correction).
pub fn cabled_bracket(
    l: &LinkDiagram,
    colors: &[usize],
    params: &BracketParams,
) -> Result<CycFrac> {
    check_colors(colors, params)?;
    let key = format!("{}#{}#{:?}", params.cache_tag(), l.cache_key(), colors);
    if let Some(v) = cache().lock().ok().and_then(|c| c.get(&key).cloned()) {
        return Ok(v);
    }
    let cable = l.cable(colors)?;
    let insertions = cable
        .projectors
        .iter()
        .map(|s| jones_wenzl(colors[s.component], params))
        .collect::<Result<Vec<_>>>()?;
    let v = bracket(&cable, &insertions, params)?;
    if let Ok(mut c) = cache().lock() {
        c.insert(key, v.clone());
    }
    Ok(v)
}

/// Colored bracket at the given framings, corrected from the blackboard
/// framing by twist eigenvalues.
pub fn colored_bracket(
    l: &LinkDiagram,
    colors: &[usize],
    framings: &[i64],
    params: &BracketParams,
) -> Result<CycFrac> {
    let m = l.num_components();
    if colors.len() != m || framings.len() != m {
        return Err(Error::InvalidPd(format!(
            "{} colors and {} framings for {m} components",
            colors.len(),
            framings.len()
        )));
    }
    let mut v = cabled_bracket(l, colors, params)?;
    for (i, (&c, &f)) in colors.iter().zip(framings).enumerate() {
        if c == 0 {
            continue;
        }
        let t = params.twist_pow(c, f - l.self_writhe(i)?);
        v = &v * &CycFrac::from(t);
    }
    Ok(v)
}

fn color_tuples(m: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..m {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..=max).map(move |c| {
                    let mut t = t.clone();
                    t.push(c);
                    t
                })
            })
            .collect();
    }
    out
}

/// Bracket with every component colored by `ω_u = Σ (-1)^c [c+1] f_c`.
pub fn omega_bracket(l: &LinkDiagram, framings: &[i64], params: &BracketParams) -> Result<CycFrac> {
    let m = l.num_components();
    if framings.len() != m {
        return Err(Error::InvalidPd(format!(
            "{} framings for {m} components",
            framings.len()
        )));
    }
    let groups = l.split_groups();
    if groups.len() > 1 {
        let mut acc = CycFrac::one(params.conductor());
        for g in groups {
            let sub = l.sublink(&g)?;
            let fr: Vec<i64> = g.iter().map(|&i| framings[i]).collect();
            acc = &acc * &omega_bracket(&sub, &fr, params)?;
        }
        return Ok(acc);
    }
    let tuples = color_tuples(m, params.max_color());
    let weights: Vec<CycFrac> = (0..=params.max_color())
        .map(|c| CycFrac::from(params.omega_weight(c)))
        .collect();
    let term = |t: &Vec<usize>| -> Result<CycFrac> {
        let mut v = colored_bracket(l, t, framings, params)?;
        for &c in t {
            v = &v * &weights[c];
        }
        Ok(v)
    };
    #[cfg(feature = "parallel")]
    let terms: Vec<CycFrac> = tuples.par_iter().map(term).collect::<Result<_>>()?;
    #[cfg(not(feature = "parallel"))]
    let terms: Vec<CycFrac> = tuples.iter().map(term).collect::<Result<_>>()?;
    let mut acc = CycFrac::zero(params.conductor());
    for t in &terms {
        acc = &acc + t;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HOPF: &str = "PD[X[1,3,2,4], X[3,1,4,2]]";
    const TREFOIL: &str = "PD[X[1,4,2,5], X[3,6,4,1], X[5,2,6,3]]";

    fn frac(x: CycInt) -> CycFrac {
        CycFrac::from(x)
    }

    #[test]
    fn params() {
        for p in [5u32, 7, 11] {
            let bp = BracketParams::standard_a(p).unwrap();
            assert_eq!(bp.a_pow(2), CycInt::zeta_pow(p, 1));
            assert!(bp.a_pow(2 * p as i64).is_one());
            assert!(!bp.a_pow(p as i64).is_one());
            assert_eq!(bp.max_color(), (p as usize - 3) / 2);
        }
        let su = BracketParams::su2(3).unwrap();
        assert_eq!(su.delta(), &CycInt::from_int(24, -1));
        assert!(su.a_pow(12).is_one());
        assert!(BracketParams::standard_a(3).is_err());
        assert!(BracketParams::su2(4).is_err());
    }

    #[test]
    fn small_projectors() {
        let bp = BracketParams::standard_a(7).unwrap();
        let f0 = jones_wenzl(0, &bp).unwrap();
        assert_eq!(f0.terms().len(), 1);
        let f1 = jones_wenzl(1, &bp).unwrap();
        assert_eq!(f1, TlElement::identity(1, 7));
        // f_2 = 1 - e_1 / δ
        let f2 = jones_wenzl(2, &bp).unwrap();
        let inv_delta = frac(bp.delta().clone()).inv().unwrap();
        let want =
            TlElement::identity(2, 7).add(&TlElement::generator(2, 1, 7).scale(&-&inv_delta));
        assert_eq!(f2, want);
    }

    #[test]
    fn projectors_are_idempotent_and_killed_by_turnbacks() {
        let bp = BracketParams::standard_a(11).unwrap();
        for c in 1..=4 {
            let f = jones_wenzl(c, &bp).unwrap();
            assert_eq!(f.compose(&f, &bp), f, "c = {c}");
            for i in 1..c {
                let e = TlElement::generator(c, i, 11);
                assert!(e.compose(&f, &bp).terms().is_empty());
                assert!(f.compose(&e, &bp).terms().is_empty());
            }
            assert_eq!(f.trace(&bp), frac(bp.chebyshev(c as i64)));
        }
    }

    #[test]
    fn out_of_range_projector_fails() {
        let bp = BracketParams::standard_a(5).unwrap();
        assert!(matches!(
            jones_wenzl(5, &bp),
            Err(Error::VanishingQuantumInteger(5))
        ));
        let l = LinkDiagram::unknot();
        assert!(matches!(
            colored_bracket(&l, &[2], &[0], &bp),
            Err(Error::ColorOutOfRange { color: 2, max: 1 })
        ));
    }

    #[test]
    fn unknot_and_kink() {
        let bp = BracketParams::standard_a(5).unwrap();
        let u = LinkDiagram::unknot();
        assert_eq!(
            cabled_bracket(&u, &[1], &bp).unwrap(),
            frac(bp.delta().clone())
        );
        // positive kink: -A^3 δ
        let kink = LinkDiagram::parse("PD[X[1,1,2,2]]").unwrap();
        let want = -(&bp.a_pow(3) * bp.delta());
        assert_eq!(kink.self_writhe(0).unwrap(), 1);
        assert_eq!(cabled_bracket(&kink, &[1], &bp).unwrap(), frac(want));
        // framing 1 through the twist eigenvalue agrees with the explicit kink
        assert_eq!(
            colored_bracket(&u, &[1], &[1], &bp).unwrap(),
            colored_bracket(&kink, &[1], &[1], &bp).unwrap()
        );
        assert_eq!(
            colored_bracket(&u, &[1], &[1], &bp).unwrap(),
            frac(&bp.a_pow(5) + &bp.a_pow(1))
        );
    }

    #[test]
    fn hopf_bracket() {
        let bp = BracketParams::standard_a(7).unwrap();
        let h = LinkDiagram::parse(HOPF).unwrap();
        let v = cabled_bracket(&h, &[1, 1], &bp).unwrap();
        // -A^4 - A^-4 per unknot, times δ for the empty-diagram normalization
        let want = -(&(&bp.a_pow(4) + &bp.a_pow(-4)) * bp.delta());
        assert_eq!(v, frac(want));
        assert_eq!(v, frac(bp.qint(4)));
    }

    #[test]
    fn all_zero_colors_give_one() {
        let bp = BracketParams::standard_a(7).unwrap();
        let t = LinkDiagram::parse(TREFOIL).unwrap();
        assert_eq!(
            colored_bracket(&t, &[0], &[5], &bp).unwrap(),
            CycFrac::one(7)
        );
    }

    /// PD code of a braid closure; generator `i` (1-based) is positive, `-i` its inverse.
    fn braid_closure(strands: u32, word: &[i32]) -> LinkDiagram {
        let mut cur: Vec<u32> = (1..=strands).collect();
        let mut next = strands + 1;
        let mut xs: Vec<[u32; 4]> = Vec::new();
        for &g in word {
            let i = g.unsigned_abs() as usize - 1;
            let (a, b) = (cur[i], cur[i + 1]);
            let (c, d) = (next, next + 1);
            next += 2;
            xs.push(if g > 0 { [a, b, d, c] } else { [b, d, c, a] });
            cur[i] = c;
            cur[i + 1] = d;
        }
        let fin: HashMap<u32, u32> = cur.iter().zip(1..=strands).map(|(&f, s)| (f, s)).collect();
        let xs: Vec<[u32; 4]> = xs
            .into_iter()
            .map(|x| x.map(|l| *fin.get(&l).unwrap_or(&l)))
            .collect();
        LinkDiagram::from_pd(&crate::link_diagram::PdCode {
            crossings: xs,
            unknots: 0,
        })
        .unwrap()
    }

    #[test]
    fn reidemeister_two() {
        let bp = BracketParams::standard_a(7).unwrap();
        let r2 = braid_closure(2, &[1, -1]);
        assert_eq!(r2.num_components(), 2);
        let unlink = LinkDiagram::parse(r#"{"pd": [], "unknots": 2}"#).unwrap();
        for c in [[1, 1], [2, 1], [1, 2], [2, 2]] {
            let a = colored_bracket(&r2, &c, &[0, 0], &bp).unwrap();
            let b = colored_bracket(&unlink, &c, &[0, 0], &bp).unwrap();
            assert_eq!(a, b, "{c:?}");
        }
    }

    #[test]
    fn reidemeister_three() {
        let bp = BracketParams::standard_a(7).unwrap();
        for (w1, w2) in [([1, 2, 1], [2, 1, 2]), ([-1, -2, -1], [-2, -1, -2])] {
            let mut a = w1.to_vec();
            let mut b = w2.to_vec();
            // close into a knot
            a.push(1);
            b.push(1);
            let da = braid_closure(3, &a);
            let db = braid_closure(3, &b);
            assert_eq!(da.num_components(), db.num_components());
            let m = da.num_components();
            for c in 1..=2 {
                assert_eq!(
                    cabled_bracket(&da, &vec![c; m], &bp).unwrap(),
                    cabled_bracket(&db, &vec![c; m], &bp).unwrap(),
                    "{w1:?} color {c}"
                );
            }
        }
    }

    #[test]
    fn sweep_order_does_not_matter() {
        let bp = BracketParams::standard_a(7).unwrap().with_frontier_cap(64);
        let t = LinkDiagram::parse(TREFOIL).unwrap();
        let cable = t.cable(&[2]).unwrap();
        let ins = vec![jones_wenzl(2, &bp).unwrap()];
        let nv = cable.crossings.len() + 1;
        let fwd: Vec<usize> = (0..nv).collect();
        let rev: Vec<usize> = (0..nv).rev().collect();
        let a = bracket_with_order(&cable, &ins, &bp, Some(&fwd)).unwrap().0;
        let b = bracket_with_order(&cable, &ins, &bp, Some(&rev)).unwrap().0;
        let c = bracket(&cable, &ins, &bp).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn frontier_cap_is_enforced() {
        let bp = BracketParams::standard_a(7).unwrap().with_frontier_cap(2);
        let t = LinkDiagram::parse(TREFOIL).unwrap();
        assert!(matches!(
            cabled_bracket(&t, &[2], &bp),
            Err(Error::FrontierCap { cap: 2, .. })
        ));
    }
}
