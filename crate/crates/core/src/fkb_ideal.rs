//! FKB ideals of knot exteriors surgered along a second component.
//!
//! For a two-component link `K ∪ J`, `L_k` is `k`-surgery on `K` with `J`
//! left as a torus boundary, and `L_{k,s}` is the closed manifold obtained by
//! also doing `s`-surgery on `J`.

use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_integer::Integer;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog;
use crate::cyclotomic::{CycInt, Valuation};
use crate::error::{Error, Result};
use crate::ideal_lattice::{bigint_json, h_power_ideal, IdealLattice};
use crate::link_diagram::LinkDiagram;
use crate::quantum_invariant::{invariant_ip, InvariantValue, SurgeryPresentation};
use crate::skein_eval::{omega_bracket, BracketParams, Theory};

/// Overrides the location of the checked-in table.
pub const TABLE_ENV: &str = "FKB_TABLE";

#[derive(Clone, Debug)]
pub struct FkbInput {
    pub diagram: LinkDiagram,
    pub k_comp: usize,
    pub j_comp: usize,
    pub k: i64,
    pub p: u32,
}

impl FkbInput {
    /// Resolves the components named `K` and `J`.
    pub fn new(diagram: LinkDiagram, k: i64, p: u32) -> Result<Self> {
        let k_comp = diagram.component_index("K")?;
        let j_comp = diagram.component_index("J")?;
        Self::with_components(diagram, k_comp, j_comp, k, p)
    }

    pub fn with_components(
        diagram: LinkDiagram,
        k_comp: usize,
        j_comp: usize,
        k: i64,
        p: u32,
    ) -> Result<Self> {
        if diagram.num_components() != 2 {
            return Err(Error::InvalidPd(format!(
                "need a two-component link, got {} components",
                diagram.num_components()
            )));
        }
        if k_comp == j_comp || k_comp > 1 || j_comp > 1 {
            return Err(Error::UnknownComponent(format!(
                "K = {k_comp}, J = {j_comp}"
            )));
        }
        if p < 5 || !crate::cyclotomic::is_prime(p) {
            return Err(Error::BadPrime(p));
        }
        Ok(FkbInput {
            diagram,
            k_comp,
            j_comp,
            k,
            p,
        })
    }

    pub fn from_catalog(name: &str, k: i64, p: u32) -> Result<Self> {
        Self::new(catalog::load(name)?.diagram()?, k, p)
    }

    pub fn with_k(&self, k: i64) -> Self {
        FkbInput { k, ..self.clone() }
    }

    pub fn d(&self) -> u32 {
        (self.p - 1) / 2
    }

    pub fn linking_number(&self) -> i64 {
        self.diagram
            .linking_number(self.k_comp, self.j_comp)
            .expect("components validated")
    }

    /// `L_{k,s}`.
    pub fn presentation(&self, s: i64) -> SurgeryPresentation {
        let mut framings = vec![0; 2];
        framings[self.k_comp] = self.k;
        framings[self.j_comp] = s;
        SurgeryPresentation::new(self.diagram.clone(), framings).expect("two framings")
    }

    /// `K(k)`: surgery on `K` alone.
    pub fn knot_surgery(&self) -> Result<SurgeryPresentation> {
        SurgeryPresentation::new(self.diagram.sublink(&[self.k_comp])?, vec![self.k])
    }
}

/// `I_p(L_{k,s})` for `s = 0..d-1`.
pub fn fkb_generators(input: &FkbInput, params: &BracketParams) -> Result<Vec<InvariantValue>> {
    check_params(input, params)?;
    let ss: Vec<i64> = (0..input.d() as i64).collect();
    let eval = |&s: &i64| invariant_ip(&input.presentation(s), params);
    #[cfg(feature = "parallel")]
    let out = ss.par_iter().map(eval).collect();
    #[cfg(not(feature = "parallel"))]
    let out = ss.iter().map(eval).collect();
    out
}

fn check_params(input: &FkbInput, params: &BracketParams) -> Result<()> {
    match params.theory {
        Theory::So3 { p } if p == input.p => Ok(()),
        t => Err(Error::UnsupportedTheory(format!(
            "{t} for an ideal at p = {}",
            input.p
        ))),
    }
}

/// Projects one invariant into `Z[ζ_p]`: values in conductor `4p` must lie in
/// `Z[ζ_p]` or `iZ[ζ_p]`; the nonzero part is kept.
pub fn normalize_value(v: &InvariantValue) -> Result<CycInt> {
    let Theory::So3 { p } = v.theory else {
        return Err(Error::UnsupportedTheory(v.theory.to_string()));
    };
    if v.conductor() == p {
        return Ok(v.value.clone());
    }
    let (re, im) = v.value.i_decompose()?;
    match (re.is_zero(), im.is_zero()) {
        (_, true) => Ok(re),
        (true, false) => Ok(im),
        (false, false) => Err(Error::MixedGenerator(v.to_string())),
    }
}

pub fn normalize_generators(gens: &[InvariantValue]) -> Result<Vec<CycInt>> {
    gens.iter().map(normalize_value).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Homology {
    /// Always 1: the free part `Z` of `H₁(L_k)`.
    pub rank: u32,
    /// `gcd(k, |lk|)`, with 0 meaning a free summand `Z`.
    pub torsion: u64,
}

impl Homology {
    pub fn is_homology_circle(&self) -> bool {
        self.torsion == 1
    }
}

pub fn homology_lk(input: &FkbInput) -> Homology {
    let t = input.k.gcd(&input.linking_number()).unsigned_abs();
    Homology {
        rank: 1,
        torsion: t,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Classification {
    Large,
    Small,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Classification::Large => "large",
            Classification::Small => "small",
        })
    }
}

/// Large iff the ideal is `(1)` when `p ∤ gcd(k, lk)`, or `(h^{d-1})` when `p | gcd(k, lk)`.
pub fn classify(input: &FkbInput, ideal: &IdealLattice) -> Classification {
    let g = homology_lk(input).torsion;
    let large = if !g.is_multiple_of(input.p as u64) {
        ideal.is_unit()
    } else {
        *ideal == h_power_ideal(input.p, input.d() - 1)
    };
    if large {
        Classification::Large
    } else {
        Classification::Small
    }
}

#[derive(Clone, Debug)]
pub struct FkbResult {
    pub p: u32,
    pub k: i64,
    pub ideal: IdealLattice,
    pub generators: Vec<InvariantValue>,
    pub normalized: Vec<CycInt>,
    pub homology: Homology,
    pub classification: Classification,
    /// The first supplied candidate generating the ideal.
    pub principal_match: Option<CycInt>,
}

impl FkbResult {
    pub fn nu_h(&self) -> Valuation {
        self.ideal.nu_h()
    }

    pub fn norm(&self) -> BigInt {
        self.ideal.norm()
    }

    pub fn json(&self) -> FkbJson {
        FkbJson {
            p: self.p,
            k: self.k,
            generators: self.generators.iter().map(|g| g.to_string()).collect(),
            normalized: self.normalized.iter().map(|g| g.to_string()).collect(),
            ideal: self.ideal.report(self.principal_match.as_ref()),
            hnf_hash: self.ideal.hnf_hash(),
            norm: bigint_json(&self.norm()),
            nu_h: self.nu_h().to_string(),
            homology: self.homology,
            homology_circle: self.homology.is_homology_circle(),
            classification: self.classification,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FkbJson {
    pub p: u32,
    pub k: i64,
    pub generators: Vec<String>,
    pub normalized: Vec<String>,
    pub ideal: crate::ideal_lattice::IdealReport,
    pub hnf_hash: String,
    pub norm: serde_json::Value,
    pub nu_h: String,
    pub homology: Homology,
    pub homology_circle: bool,
    pub classification: Classification,
}

pub fn fkb_ideal(
    input: &FkbInput,
    params: &BracketParams,
    candidates: &[CycInt],
) -> Result<FkbResult> {
    let generators = fkb_generators(input, params)?;
    let normalized = normalize_generators(&generators)?;
    let ideal = IdealLattice::from_generators(input.p, &normalized)?;
    let principal_match = candidates
        .iter()
        .find(|c| ideal.matches_principal(c))
        .cloned();
    Ok(FkbResult {
        p: input.p,
        k: input.k,
        classification: classify(input, &ideal),
        homology: homology_lk(input),
        ideal,
        generators,
        normalized,
        principal_match,
    })
}

/// The ideal generated by the unnormalized brackets `⟨L_{k,s}(ω_u)⟩`, `s = 0..d-1`.
pub fn omega_bracket_ideal(input: &FkbInput, params: &BracketParams) -> Result<IdealLattice> {
    check_params(input, params)?;
    let mut gens = Vec::new();
    for s in 0..input.d() as i64 {
        let pres = input.presentation(s);
        let v = omega_bracket(&pres.diagram, &pres.framings, params)?;
        gens.push(
            v.to_cycint()
                .ok_or_else(|| Error::NonIntegral(format!("<L_(k,{s})(ω)> = {v}")))?,
        );
    }
    IdealLattice::from_generators(input.p, &gens)
}

#[derive(Clone, Debug, Serialize)]
pub struct NuHReport {
    /// `p` divides both `k` and `lk`.
    pub p_divides_gcd: bool,
    pub nu_h: String,
    pub consistent: bool,
}

/// `ν_h ≥ d-1` ⇔ `ν_h > 0` ⇔ `p | gcd(k, lk)`.
pub fn nu_h_bound_check(input: &FkbInput, result: &FkbResult) -> NuHReport {
    let d = input.d();
    let p = input.p as i64;
    let divides = input.k % p == 0 && input.linking_number() % p == 0;
    let nu = result.nu_h();
    let positive = nu > Valuation::Finite(0);
    let big = nu >= Valuation::Finite(d - 1);
    NuHReport {
        p_divides_gcd: divides,
        nu_h: nu.to_string(),
        consistent: positive == divides && big == positive,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MonotonicityReport {
    /// `(s, I_p(L_{k,s}) ∈ ideal)`.
    pub checks: Vec<(i64, bool)>,
    pub ok: bool,
}

/// Checks `I_p(L_{k,s}) ∈ I_p(L_k)` for every `s` in the range.
pub fn embedding_monotonicity_check(
    input: &FkbInput,
    result: &FkbResult,
    params: &BracketParams,
    s_range: std::ops::RangeInclusive<i64>,
) -> Result<MonotonicityReport> {
    let ss: Vec<i64> = s_range.collect();
    let eval = |&s: &i64| -> Result<(i64, bool)> {
        let v = invariant_ip(&input.presentation(s), params)?;
        Ok((s, result.ideal.contains(&normalize_value(&v)?)))
    };
    #[cfg(feature = "parallel")]
    let checks: Vec<(i64, bool)> = ss.par_iter().map(eval).collect::<Result<_>>()?;
    #[cfg(not(feature = "parallel"))]
    let checks: Vec<(i64, bool)> = ss.iter().map(eval).collect::<Result<_>>()?;
    let ok = checks.iter().all(|c| c.1);
    Ok(MonotonicityReport { checks, ok })
}

pub const CSV_HEADER: &str =
    "link,K,k,ideal_hnf_hash,norm,nu_h,classification,principal_match,homology_circle";

pub fn csv_row(link: &str, knot: &str, r: &FkbResult) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{}",
        link,
        knot,
        r.k,
        r.ideal.hnf_hash(),
        r.norm(),
        r.nu_h(),
        r.classification,
        r.principal_match
            .as_ref()
            .map(|g| g.to_string())
            .unwrap_or_default(),
        r.homology.is_homology_circle()
    )
}

/// When `L_{5n + residue}` is a homology circle, as printed in the table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CircleRule {
    NMod { modulus: i64, residues: Vec<i64> },
    NEquals(i64),
    Never,
}

impl CircleRule {
    pub fn holds(&self, n: i64) -> bool {
        match self {
            CircleRule::NMod { modulus, residues } => residues.contains(&n.rem_euclid(*modulus)),
            CircleRule::NEquals(m) => n == *m,
            CircleRule::Never => false,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TableRow {
    pub link: String,
    pub knot: String,
    pub k_residue: i64,
    pub generator: String,
    pub norm: u64,
    pub linking: i64,
    pub homology_circle: String,
    pub circle_rule: CircleRule,
}

impl TableRow {
    pub fn k(&self, p: u32, n: i64) -> i64 {
        p as i64 * n + self.k_residue
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CalibrationTarget {
    pub link: String,
    pub k: i64,
    pub generator: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Table {
    pub p: u32,
    pub calibration: CalibrationTarget,
    pub rows: Vec<TableRow>,
    pub source: String,
}

pub fn default_table_path() -> PathBuf {
    match std::env::var_os(TABLE_ENV) {
        Some(p) => PathBuf::from(p),
        None => Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("data")
            .join("table_i5.json"),
    }
}

pub fn load_table(path: &Path) -> Result<Table> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Catalog(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

/// A global identification of the computed ideals with the printed ones:
/// optionally mirror every diagram, then apply `ζ ↦ ζ^galois`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Calibration {
    pub mirror: bool,
    pub galois: i64,
}

impl Calibration {
    pub const IDENTITY: Calibration = Calibration {
        mirror: false,
        galois: 1,
    };

    pub fn input(&self, input: &FkbInput) -> FkbInput {
        if self.mirror {
            FkbInput {
                diagram: input.diagram.mirror(),
                ..input.clone()
            }
        } else {
            input.clone()
        }
    }

    pub fn ideal(&self, ideal: &IdealLattice) -> Result<IdealLattice> {
        ideal.galois(self.galois)
    }

    pub fn describe(&self) -> String {
        let m = if self.mirror { "mirror, then " } else { "" };
        format!("{m}z -> z^{}", self.galois)
    }
}

fn table_input(link: &str, k: i64, p: u32, premirror: bool) -> Result<FkbInput> {
    let mut input = FkbInput::from_catalog(link, k, p)?;
    if premirror {
        input.diagram = input.diagram.mirror();
    }
    Ok(input)
}

/// Finds a calibration (identity first, mirrors last) that maps the computed
/// ideal of the calibration link onto the printed generator. When several
/// do, the first one that also reproduces every row at `n = 0` wins.
/// `premirror` mirrors every catalog diagram beforehand.
pub fn calibrate(
    table: &Table,
    params: &BracketParams,
    premirror: bool,
) -> Result<Option<Calibration>> {
    let p = table.p;
    let target = CycInt::parse(p, &table.calibration.generator)?;
    let base = table_input(&table.calibration.link, table.calibration.k, p, premirror)?;
    let mut found = Vec::new();
    for mirror in [false, true] {
        let cal0 = Calibration { mirror, galois: 1 };
        let ideal = fkb_ideal(&cal0.input(&base), params, &[])?.ideal;
        for t in 1..p as i64 {
            let cal = Calibration { mirror, galois: t };
            if cal.ideal(&ideal)?.matches_principal(&target) {
                found.push(cal);
            }
        }
    }
    if found.len() > 1 {
        for &cal in &found {
            if reproduces_rows(table, params, cal, premirror)? {
                return Ok(Some(cal));
            }
        }
    }
    Ok(found.first().copied())
}

fn reproduces_rows(
    table: &Table,
    params: &BracketParams,
    cal: Calibration,
    premirror: bool,
) -> Result<bool> {
    for row in &table.rows {
        let input = cal.input(&table_input(&row.link, row.k_residue, table.p, premirror)?);
        let ideal = cal.ideal(&fkb_ideal(&input, params, &[])?.ideal)?;
        if !ideal.matches_principal(&CycInt::parse(table.p, &row.generator)?) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, Serialize)]
pub struct RowCheck {
    pub link: String,
    pub knot: String,
    pub n: i64,
    pub k: i64,
    pub expected_generator: String,
    pub expected_norm: u64,
    pub norm: serde_json::Value,
    pub hnf_hash: String,
    pub generator_match: bool,
    pub norm_match: bool,
    pub expected_circle: bool,
    pub homology_circle: bool,
    pub classification: Classification,
}

impl RowCheck {
    pub fn ok(&self) -> bool {
        self.generator_match && self.norm_match && self.expected_circle == self.homology_circle
    }
}

pub fn check_row(
    row: &TableRow,
    n: i64,
    p: u32,
    cal: Calibration,
    params: &BracketParams,
    premirror: bool,
) -> Result<RowCheck> {
    let k = row.k(p, n);
    let input = cal.input(&table_input(&row.link, k, p, premirror)?);
    let res = fkb_ideal(&input, params, &[])?;
    let ideal = cal.ideal(&res.ideal)?;
    let g = CycInt::parse(p, &row.generator)?;
    Ok(RowCheck {
        link: row.link.clone(),
        knot: row.knot.clone(),
        n,
        k,
        expected_generator: row.generator.clone(),
        expected_norm: row.norm,
        norm: bigint_json(&ideal.norm()),
        hnf_hash: ideal.hnf_hash(),
        generator_match: ideal.matches_principal(&g),
        norm_match: ideal.norm() == BigInt::from(row.norm),
        expected_circle: row.circle_rule.holds(n),
        homology_circle: res.homology.is_homology_circle(),
        classification: res.classification,
    })
}

/// `I_p(L_k) = (1)` expected away from the table residue.
#[derive(Clone, Debug, Serialize)]
pub struct OffResidueCheck {
    pub link: String,
    pub k: i64,
    pub trivial: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TableReport {
    pub p: u32,
    pub calibration: Option<Calibration>,
    pub rows: Vec<RowCheck>,
    pub off_residue: Vec<OffResidueCheck>,
}

impl TableReport {
    pub fn ok(&self) -> bool {
        self.calibration.is_some()
            && self.rows.iter().all(RowCheck::ok)
            && self.off_residue.iter().all(|c| c.trivial)
    }
}

/// Calibrates, then checks every row at each `n` and the calibration link at
/// the off-residue framings `k = 1..p-1`.
pub fn reproduce_table(
    table: &Table,
    params: &BracketParams,
    ns: &[i64],
    premirror: bool,
) -> Result<TableReport> {
    let p = table.p;
    let Some(cal) = calibrate(table, params, premirror)? else {
        return Ok(TableReport {
            p,
            calibration: None,
            rows: Vec::new(),
            off_residue: Vec::new(),
        });
    };
    let jobs: Vec<(&TableRow, i64)> = table
        .rows
        .iter()
        .flat_map(|r| ns.iter().map(move |&n| (r, n)))
        .collect();
    let run = |&(r, n): &(&TableRow, i64)| check_row(r, n, p, cal, params, premirror);
    #[cfg(feature = "parallel")]
    let rows: Vec<RowCheck> = jobs.par_iter().map(run).collect::<Result<_>>()?;
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<RowCheck> = jobs.iter().map(run).collect::<Result<_>>()?;
    let residue = table.calibration.k.rem_euclid(p as i64);
    let mut off_residue = Vec::new();
    for k in (0..p as i64).filter(|&k| k != residue) {
        let input = cal.input(&table_input(&table.calibration.link, k, p, premirror)?);
        let ideal = fkb_ideal(&input, params, &[])?.ideal;
        off_residue.push(OffResidueCheck {
            link: table.calibration.link.clone(),
            k,
            trivial: ideal.is_unit(),
        });
    }
    Ok(TableReport {
        p,
        calibration: Some(cal),
        rows,
        off_residue,
    })
}
