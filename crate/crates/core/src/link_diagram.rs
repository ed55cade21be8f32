//! Oriented link diagrams from PD codes, and their blackboard cables.
//!
//! PD convention: each crossing `X[a,b,c,d]` lists edge labels counterclockwise
//! starting from the incoming under-strand.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Raw PD data as read from text.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PdCode {
    #[serde(alias = "pd")]
    pub crossings: Vec<[u32; 4]>,
    /// Split unknotted components with no crossings.
    #[serde(default)]
    pub unknots: usize,
}

impl PdCode {
    fn validate(&self) -> Result<()> {
        if self.crossings.is_empty() && self.unknots == 0 {
            return Err(Error::InvalidPd(
                "empty PD code needs an explicit unknots count".into(),
            ));
        }
        let mut count: HashMap<u32, usize> = HashMap::new();
        for x in &self.crossings {
            for &l in x {
                if l == 0 {
                    return Err(Error::InvalidPd("edge labels must be positive".into()));
                }
                *count.entry(l).or_default() += 1;
            }
        }
        if let Some((l, c)) = count.iter().find(|(_, &c)| c != 2) {
            return Err(Error::InvalidPd(format!("edge {l} occurs {c} times")));
        }
        Ok(())
    }
}

/// Parses `PD[X[a,b,c,d], ...]`, a JSON list of 4-tuples, or a JSON object
/// `{"pd": [...], "unknots": m}`.
pub fn parse_pd(text: &str) -> Result<PdCode> {
    let t = text.trim();
    let pd = if t.starts_with('{') {
        serde_json::from_str::<PdCode>(t).map_err(|e| Error::Parse(e.to_string()))?
    } else if t.starts_with('[') {
        let crossings: Vec<[u32; 4]> =
            serde_json::from_str(t).map_err(|e| Error::Parse(e.to_string()))?;
        PdCode {
            crossings,
            unknots: 0,
        }
    } else {
        parse_mathematica_pd(t)?
    };
    pd.validate()?;
    Ok(pd)
}

fn parse_mathematica_pd(t: &str) -> Result<PdCode> {
    let s: String = t.chars().filter(|c| !c.is_whitespace()).collect();
    let body = s
        .strip_prefix("PD[")
        .and_then(|b| b.strip_suffix(']'))
        .ok_or_else(|| Error::Parse(format!("expected PD[...], got {t:?}")))?;
    let mut crossings = Vec::new();
    let mut rest = body;
    while !rest.is_empty() {
        let inner = rest
            .strip_prefix("X[")
            .ok_or_else(|| Error::Parse(format!("expected X[ at {rest:?}")))?;
        let close = inner
            .find(']')
            .ok_or_else(|| Error::Parse("unterminated X[".into()))?;
        let labels: Vec<u32> = inner[..close]
            .split(',')
            .map(|v| v.parse::<u32>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Parse(format!("bad crossing X[{}]", &inner[..close])))?;
        let labels: [u32; 4] = labels
            .try_into()
            .map_err(|_| Error::Parse(format!("crossing X[{}] needs 4 labels", &inner[..close])))?;
        crossings.push(labels);
        rest = &inner[close + 1..];
        if let Some(r) = rest.strip_prefix(',') {
            if r.is_empty() {
                return Err(Error::Parse("trailing comma".into()));
            }
            rest = r;
        } else if !rest.is_empty() {
            return Err(Error::Parse(format!("expected , at {rest:?}")));
        }
    }
    Ok(PdCode {
        crossings,
        unknots: 0,
    })
}

/// A crossing with resolved over/under and orientation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Crossing {
    /// Edge labels counterclockwise from the incoming under-strand.
    pub slots: [u32; 4],
    /// The over-strand runs from slot 3 to slot 1.
    pub over_forward: bool,
}

impl Crossing {
    pub fn sign(&self) -> i64 {
        if self.over_forward {
            1
        } else {
            -1
        }
    }

    fn is_head(&self, slot: usize) -> bool {
        slot == 0 || (slot == 3 && self.over_forward) || (slot == 1 && !self.over_forward)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Component {
    /// Edge labels in traversal order; empty for a crossingless circle.
    pub edges: Vec<u32>,
    pub name: Option<String>,
}

/// Position of an edge end: `(crossing index, slot)`.
pub type End = (usize, usize);

#[derive(Clone, Debug)]
pub struct LinkDiagram {
    crossings: Vec<Crossing>,
    components: Vec<Component>,
    edge_comp: HashMap<u32, usize>,
    /// label -> (tail, head)
    edge_ends: HashMap<u32, (End, End)>,
}

impl PartialEq for LinkDiagram {
    fn eq(&self, other: &Self) -> bool {
        self.crossings == other.crossings && self.components == other.components
    }
}

impl Eq for LinkDiagram {}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn add(&mut self) -> usize {
        self.0.push(self.0.len());
        self.0.len() - 1
    }
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a] = b;
        }
    }
}

impl LinkDiagram {
    pub fn empty() -> Self {
        Self::from_parts(Vec::new(), Vec::new()).expect("empty diagram is valid")
    }

    /// The crossingless unknot.
    pub fn unknot() -> Self {
        Self::from_parts(
            Vec::new(),
            vec![Component {
                edges: Vec::new(),
                name: None,
            }],
        )
        .expect("unknot is valid")
    }

    /// Builds a diagram from oriented crossings and component edge cycles,
    /// checking that the incidences are consistent and planar.
    pub fn from_parts(crossings: Vec<Crossing>, components: Vec<Component>) -> Result<Self> {
        let mut tails: HashMap<u32, End> = HashMap::new();
        let mut heads: HashMap<u32, End> = HashMap::new();
        for (xi, x) in crossings.iter().enumerate() {
            for (s, &l) in x.slots.iter().enumerate() {
                let map = if x.is_head(s) { &mut heads } else { &mut tails };
                if map.insert(l, (xi, s)).is_some() {
                    return Err(Error::InvalidPd(format!(
                        "edge {l} has inconsistent orientation"
                    )));
                }
            }
        }
        let mut edge_ends = HashMap::new();
        for (&l, &t) in &tails {
            let h = heads
                .get(&l)
                .ok_or_else(|| Error::InvalidPd(format!("edge {l} has no head")))?;
            edge_ends.insert(l, (t, *h));
        }
        if heads.len() != tails.len() {
            return Err(Error::InvalidPd("edge without a tail".into()));
        }
        let mut edge_comp = HashMap::new();
        for (ci, c) in components.iter().enumerate() {
            for (i, &e) in c.edges.iter().enumerate() {
                let Some(&(_, (hx, hs))) = edge_ends.get(&e) else {
                    return Err(Error::InvalidPd(format!(
                        "component edge {e} not in any crossing"
                    )));
                };
                if edge_comp.insert(e, ci).is_some() {
                    return Err(Error::InvalidPd(format!("edge {e} listed twice")));
                }
                let next = crossings[hx].slots[(hs + 2) % 4];
                let expected = c.edges[(i + 1) % c.edges.len()];
                if next != expected {
                    return Err(Error::InvalidPd(format!(
                        "component does not follow the strand after edge {e}"
                    )));
                }
            }
        }
        if edge_comp.len() != edge_ends.len() {
            return Err(Error::InvalidPd("edge not covered by a component".into()));
        }
        let d = LinkDiagram {
            crossings,
            components,
            edge_comp,
            edge_ends,
        };
        d.check_planar()?;
        Ok(d)
    }

    /// Orients a PD code: components are directed by their under-passes
    /// (slot 0 in, slot 2 out); a component that only passes over is directed
    /// so that its labels increase.
    pub fn from_pd(pd: &PdCode) -> Result<Self> {
        pd.validate()?;
        let xs = &pd.crossings;
        let mut occ: BTreeMap<u32, Vec<End>> = BTreeMap::new();
        for (xi, x) in xs.iter().enumerate() {
            for (s, &l) in x.iter().enumerate() {
                occ.entry(l).or_default().push((xi, s));
            }
        }
        let other = |l: u32, o: End| -> End {
            let v = &occ[&l];
            if v[0] == o {
                v[1]
            } else {
                v[0]
            }
        };
        let mut seen: HashMap<u32, ()> = HashMap::new();
        let mut comps: Vec<Vec<(u32, End, End)>> = Vec::new();
        for (&start, v) in &occ {
            if seen.contains_key(&start) {
                continue;
            }
            // walk: edge e runs from `from` to `to`
            let mut walk = Vec::new();
            let (mut e, mut to) = (start, v[0]);
            loop {
                let from = other(e, to);
                seen.insert(e, ());
                walk.push((e, from, to));
                let through = (to.0, (to.1 + 2) % 4);
                let next = xs[through.0][through.1];
                e = next;
                to = other(next, through);
                if e == start {
                    break;
                }
            }
            comps.push(walk);
        }
        let mut components = Vec::new();
        let mut head_of: HashMap<u32, End> = HashMap::new();
        for walk in comps {
            let mut fwd = false;
            let mut rev = false;
            for &(_, from, to) in &walk {
                if to.1 == 0 || from.1 == 2 {
                    fwd = true;
                }
                if to.1 == 2 || from.1 == 0 {
                    rev = true;
                }
            }
            if fwd && rev {
                return Err(Error::InvalidPd(
                    "under-strands give contradictory orientations".into(),
                ));
            }
            let mut edges: Vec<u32> = walk.iter().map(|w| w.0).collect();
            let reverse = if fwd || rev {
                rev
            } else {
                let pairs = || edges.iter().zip(edges.iter().cycle().skip(1));
                let up = pairs().filter(|(a, b)| **b == **a + 1).count();
                let down = pairs().filter(|(a, b)| **a == **b + 1).count();
                down > up
            };
            for &(e, from, to) in &walk {
                head_of.insert(e, if reverse { from } else { to });
            }
            if reverse {
                edges.reverse();
            }
            let min_pos = edges
                .iter()
                .enumerate()
                .min_by_key(|(_, &l)| l)
                .map(|(i, _)| i)
                .unwrap();
            edges.rotate_left(min_pos);
            components.push(edges);
        }
        let crossings = xs
            .iter()
            .enumerate()
            .map(|(xi, x)| {
                let over_forward = head_of[&x[3]] == (xi, 3);
                Crossing {
                    slots: *x,
                    over_forward,
                }
            })
            .collect();
        let mut comps: Vec<Component> = components
            .into_iter()
            .map(|edges| Component { edges, name: None })
            .collect();
        for _ in 0..pd.unknots {
            comps.push(Component {
                edges: Vec::new(),
                name: None,
            });
        }
        Self::from_parts(crossings, comps)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_pd(&parse_pd(text)?)
    }

    fn check_planar(&self) -> Result<()> {
        let n = self.crossings.len();
        if n == 0 {
            return Ok(());
        }
        let other = |l: u32, o: End| -> End {
            let (t, h) = self.edge_ends[&l];
            if t == o {
                h
            } else {
                t
            }
        };
        let mut uf = UnionFind::new(n);
        for &(t, h) in self.edge_ends.values() {
            uf.union(t.0, h.0);
        }
        let pieces = (0..n).filter(|&i| uf.find(i) == i).count();
        let mut visited = vec![[false; 4]; n];
        let mut faces = 0;
        for x in 0..n {
            for s in 0..4 {
                if visited[x][s] {
                    continue;
                }
                faces += 1;
                let (mut cx, mut cs) = (x, s);
                while !visited[cx][cs] {
                    visited[cx][cs] = true;
                    let (ox, os) = other(self.crossings[cx].slots[cs], (cx, cs));
                    cx = ox;
                    cs = (os + 1) % 4;
                }
            }
        }
        if faces != n + 2 * pieces {
            return Err(Error::InvalidPd(format!(
                "incidences are not planar ({faces} faces for {n} crossings)"
            )));
        }
        Ok(())
    }

    pub fn crossings(&self) -> &[Crossing] {
        &self.crossings
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn num_components(&self) -> usize {
        self.components.len()
    }

    pub fn num_crossings(&self) -> usize {
        self.crossings.len()
    }

    pub fn edge_component(&self, label: u32) -> usize {
        self.edge_comp[&label]
    }

    /// `(tail, head)` of an edge.
    pub fn edge_ends(&self, label: u32) -> (End, End) {
        self.edge_ends[&label]
    }

    /// `(under component, over component)` at a crossing.
    pub fn crossing_components(&self, x: usize) -> (usize, usize) {
        let c = &self.crossings[x];
        (self.edge_comp[&c.slots[0]], self.edge_comp[&c.slots[1]])
    }

    pub fn set_name(&mut self, component: usize, name: &str) {
        self.components[component].name = Some(name.to_string());
    }

    pub fn component_index(&self, name: &str) -> Result<usize> {
        self.components
            .iter()
            .position(|c| c.name.as_deref() == Some(name))
            .or_else(|| {
                name.parse::<usize>()
                    .ok()
                    .filter(|&i| i < self.components.len())
            })
            .ok_or_else(|| Error::UnknownComponent(name.to_string()))
    }

    fn check_component(&self, c: usize) -> Result<()> {
        if c >= self.components.len() {
            Err(Error::UnknownComponent(c.to_string()))
        } else {
            Ok(())
        }
    }

    /// Half the signed count of crossings between two distinct components.
    pub fn linking_number(&self, c1: usize, c2: usize) -> Result<i64> {
        self.check_component(c1)?;
        self.check_component(c2)?;
        if c1 == c2 {
            return Err(Error::UnknownComponent(format!(
                "linking number needs two distinct components, got {c1} twice"
            )));
        }
        let total: i64 = (0..self.crossings.len())
            .filter(|&x| {
                let (u, o) = self.crossing_components(x);
                (u == c1 && o == c2) || (u == c2 && o == c1)
            })
            .map(|x| self.crossings[x].sign())
            .sum();
        debug_assert!(total % 2 == 0);
        Ok(total / 2)
    }

    /// Sum of signs of the self-crossings of a component (its blackboard framing).
    pub fn self_writhe(&self, c: usize) -> Result<i64> {
        self.check_component(c)?;
        Ok((0..self.crossings.len())
            .filter(|&x| self.crossing_components(x) == (c, c))
            .map(|x| self.crossings[x].sign())
            .sum())
    }

    /// Symmetric matrix with the framings on the diagonal and linking numbers off it.
    pub fn linking_matrix(&self, framings: &[i64]) -> Result<Vec<Vec<i64>>> {
        let m = self.num_components();
        if framings.len() != m {
            return Err(Error::InvalidPd(format!(
                "{} framings for {m} components",
                framings.len()
            )));
        }
        let mut b = vec![vec![0; m]; m];
        for x in 0..self.crossings.len() {
            let (u, o) = self.crossing_components(x);
            if u != o {
                b[u][o] += self.crossings[x].sign();
                b[o][u] += self.crossings[x].sign();
            }
        }
        for i in 0..m {
            for j in 0..m {
                b[i][j] /= 2;
            }
            b[i][i] = framings[i];
        }
        Ok(b)
    }

    /// The diagram restricted to `keep` (component indices, in the order given);
    /// crossings touching removed components are dropped and their edges spliced.
    pub fn sublink(&self, keep: &[usize]) -> Result<LinkDiagram> {
        for &c in keep {
            self.check_component(c)?;
        }
        let kept_x: Vec<bool> = (0..self.crossings.len())
            .map(|x| {
                let (u, o) = self.crossing_components(x);
                keep.contains(&u) && keep.contains(&o)
            })
            .collect();
        let mut relabel: HashMap<u32, u32> = HashMap::new();
        let mut next_label = 1u32;
        let mut comps = Vec::new();
        for &c in keep {
            let comp = &self.components[c];
            let es = &comp.edges;
            let start = es.iter().position(|&e| kept_x[self.edge_ends[&e].0 .0]);
            let mut new_edges = Vec::new();
            if let Some(start) = start {
                let mut label = next_label;
                next_label += 1;
                new_edges.push(label);
                for i in 0..es.len() {
                    let e = es[(start + i) % es.len()];
                    relabel.insert(e, label);
                    let head_x = self.edge_ends[&e].1 .0;
                    if kept_x[head_x] && i + 1 < es.len() {
                        label = next_label;
                        next_label += 1;
                        new_edges.push(label);
                    }
                }
            }
            comps.push(Component {
                edges: new_edges,
                name: comp.name.clone(),
            });
        }
        let crossings = self
            .crossings
            .iter()
            .zip(&kept_x)
            .filter(|(_, &k)| k)
            .map(|(x, _)| Crossing {
                slots: x.slots.map(|l| relabel[&l]),
                over_forward: x.over_forward,
            })
            .collect();
        LinkDiagram::from_parts(crossings, comps)
    }

    /// Swaps over and under at every crossing.
    pub fn mirror(&self) -> LinkDiagram {
        let crossings = self
            .crossings
            .iter()
            .map(|x| {
                let [a, b, c, d] = x.slots;
                if x.over_forward {
                    Crossing {
                        slots: [d, a, b, c],
                        over_forward: false,
                    }
                } else {
                    Crossing {
                        slots: [b, c, d, a],
                        over_forward: true,
                    }
                }
            })
            .collect();
        LinkDiagram::from_parts(crossings, self.components.clone()).expect("mirror is valid")
    }

    pub fn disjoint_union(&self, other: &LinkDiagram) -> LinkDiagram {
        let offset = self.edge_ends.keys().copied().max().unwrap_or(0);
        let mut crossings = self.crossings.clone();
        crossings.extend(other.crossings.iter().map(|x| Crossing {
            slots: x.slots.map(|l| l + offset),
            over_forward: x.over_forward,
        }));
        let mut comps = self.components.clone();
        comps.extend(other.components.iter().map(|c| Component {
            edges: c.edges.iter().map(|l| l + offset).collect(),
            name: c.name.clone(),
        }));
        LinkDiagram::from_parts(crossings, comps).expect("disjoint union is valid")
    }

    /// Applies a relabeling of edge labels.
    pub fn relabel(&self, map: &HashMap<u32, u32>) -> Result<LinkDiagram> {
        let crossings = self
            .crossings
            .iter()
            .map(|x| Crossing {
                slots: x.slots.map(|l| map[&l]),
                over_forward: x.over_forward,
            })
            .collect();
        let comps = self
            .components
            .iter()
            .map(|c| Component {
                edges: c.edges.iter().map(|l| map[l]).collect(),
                name: c.name.clone(),
            })
            .collect();
        LinkDiagram::from_parts(crossings, comps)
    }

    pub fn to_pd_code(&self) -> PdCode {
        PdCode {
            crossings: self.crossings.iter().map(|x| x.slots).collect(),
            unknots: self
                .components
                .iter()
                .filter(|c| c.edges.is_empty())
                .count(),
        }
    }

    /// Groups of components that share no crossings, i.e. the split pieces of the diagram.
    pub fn split_groups(&self) -> Vec<Vec<usize>> {
        let m = self.num_components();
        let mut uf = UnionFind::new(m);
        for x in 0..self.crossings.len() {
            let (u, o) = self.crossing_components(x);
            uf.union(u, o);
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for c in 0..m {
            let r = uf.find(c);
            groups.entry(r).or_default().push(c);
        }
        let mut out: Vec<Vec<usize>> = groups.into_values().collect();
        out.sort();
        out
    }

    /// Stable structural key, used for memoizing evaluations.
    pub fn cache_key(&self) -> String {
        let mut s = String::new();
        for x in &self.crossings {
            s.push_str(&format!(
                "{:?}{}",
                x.slots,
                if x.over_forward { '+' } else { '-' }
            ));
        }
        for c in &self.components {
            s.push_str(&format!("|{:?}", c.edges));
        }
        s
    }

    /// Blackboard-parallel cable with `mult[c]` copies of component `c`, and a
    /// projector site on the first edge of every component with at least two copies.
    pub fn cable(&self, mult: &[usize]) -> Result<CabledDiagram> {
        if mult.len() != self.num_components() {
            return Err(Error::InvalidPd(format!(
                "{} multiplicities for {} components",
                mult.len(),
                self.num_components()
            )));
        }
        let mut uf = UnionFind::new(0);
        let mut tail_ids: HashMap<u32, Vec<usize>> = HashMap::new();
        let mut head_ids: HashMap<u32, Vec<usize>> = HashMap::new();
        let mut raw_projectors = Vec::new();
        for (ci, comp) in self.components.iter().enumerate() {
            let m = mult[ci];
            if m == 0 {
                continue;
            }
            if comp.edges.is_empty() {
                let ins: Vec<usize> = (0..m).map(|_| uf.add()).collect();
                if m >= 2 {
                    raw_projectors.push((ci, ins.clone(), ins));
                }
                continue;
            }
            for (i, &e) in comp.edges.iter().enumerate() {
                let t: Vec<usize> = (0..m).map(|_| uf.add()).collect();
                let h: Vec<usize> = (0..m).map(|_| uf.add()).collect();
                if i == 0 && m >= 2 {
                    raw_projectors.push((ci, t.clone(), h.clone()));
                } else {
                    for k in 0..m {
                        uf.union(t[k], h[k]);
                    }
                }
                tail_ids.insert(e, t);
                head_ids.insert(e, h);
            }
        }
        let mut raw_crossings: Vec<[usize; 4]> = Vec::new();
        for (xi, x) in self.crossings.iter().enumerate() {
            let (cu, co) = self.crossing_components(xi);
            let (mu, mo) = (mult[cu], mult[co]);
            let [a, b, c, d] = x.slots;
            if mu == 0 && mo == 0 {
                continue;
            }
            let (over_in, over_out) = if x.over_forward { (d, b) } else { (b, d) };
            if mu == 0 {
                for k in 0..mo {
                    uf.union(head_ids[&over_in][k], tail_ids[&over_out][k]);
                }
                continue;
            }
            if mo == 0 {
                for k in 0..mu {
                    uf.union(head_ids[&a][k], tail_ids[&c][k]);
                }
                continue;
            }
            // Local frame: under-strand runs upward (bottom a, top c), slot b on the
            // right, slot d on the left. Copies are indexed left-of-travel first.
            let copy_at_row = |j: usize| if x.over_forward { mo - 1 - j } else { j };
            let left = |j: usize| {
                let k = copy_at_row(j);
                if x.over_forward {
                    head_ids[&d][k]
                } else {
                    tail_ids[&d][k]
                }
            };
            let right = |j: usize| {
                let k = copy_at_row(j);
                if x.over_forward {
                    tail_ids[&b][k]
                } else {
                    head_ids[&b][k]
                }
            };
            let mut vert = vec![vec![0usize; mo + 1]; mu];
            for i in 0..mu {
                vert[i][0] = head_ids[&a][i];
                vert[i][mo] = tail_ids[&c][i];
                for j in 1..mo {
                    vert[i][j] = uf.add();
                }
            }
            let mut horiz = vec![vec![0usize; mo]; mu + 1];
            for j in 0..mo {
                horiz[0][j] = left(j);
                horiz[mu][j] = right(j);
                for i in 1..mu {
                    horiz[i][j] = uf.add();
                }
            }
            for i in 0..mu {
                for j in 0..mo {
                    raw_crossings.push([vert[i][j], horiz[i + 1][j], vert[i][j + 1], horiz[i][j]]);
                }
            }
        }
        // canonical edge ids for referenced classes; unreferenced classes are free loops
        let mut ids: HashMap<usize, usize> = HashMap::new();
        let mut refs: Vec<usize> = Vec::new();
        let mut canon = |uf: &mut UnionFind, raw: usize| -> usize {
            let r = uf.find(raw);
            let next = ids.len();
            let id = *ids.entry(r).or_insert(next);
            if id == refs.len() {
                refs.push(0);
            }
            refs[id] += 1;
            id
        };
        let crossings: Vec<[usize; 4]> = raw_crossings
            .iter()
            .map(|x| x.map(|r| canon(&mut uf, r)))
            .collect();
        let projectors: Vec<ProjectorSite> = raw_projectors
            .iter()
            .map(|(ci, ins, outs)| ProjectorSite {
                component: *ci,
                inputs: ins.iter().map(|&r| canon(&mut uf, r)).collect(),
                outputs: outs.iter().map(|&r| canon(&mut uf, r)).collect(),
            })
            .collect();
        debug_assert!(refs.iter().all(|&c| c == 2));
        let total = uf.0.len();
        let mut roots: Vec<usize> = (0..total).map(|i| uf.find(i)).collect();
        roots.sort_unstable();
        roots.dedup();
        let free_loops = roots.iter().filter(|r| !ids.contains_key(r)).count();
        Ok(CabledDiagram {
            multiplicities: mult.to_vec(),
            crossings,
            projectors,
            free_loops,
            num_edges: ids.len(),
        })
    }
}

impl fmt::Display for LinkDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let xs: Vec<String> = self
            .crossings
            .iter()
            .map(|x| {
                format!(
                    "X[{}, {}, {}, {}]",
                    x.slots[0], x.slots[1], x.slots[2], x.slots[3]
                )
            })
            .collect();
        write!(f, "PD[{}]", xs.join(", "))
    }
}

/// Where a Jones–Wenzl projector sits in a cable: `c` input strands and `c`
/// output strands, both ordered left-to-right relative to the direction of travel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjectorSite {
    pub component: usize,
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
}

/// A cabled diagram as a planar network: crossings are listed by network edge
/// ids counterclockwise starting from an under-strand end.
#[derive(Clone, Debug)]
pub struct CabledDiagram {
    pub multiplicities: Vec<usize>,
    pub crossings: Vec<[usize; 4]>,
    pub projectors: Vec<ProjectorSite>,
    /// Closed circles that meet no crossing and no projector.
    pub free_loops: usize,
    pub num_edges: usize,
}

impl CabledDiagram {
    pub fn num_crossings(&self) -> usize {
        self.crossings.len()
    }
}
