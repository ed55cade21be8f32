use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use fkb_core::catalog;
use fkb_core::cyclotomic::{gauss_sum, CycInt, SqrtConvention};
use fkb_core::fkb_ideal::{
    csv_row, default_table_path, fkb_ideal, load_table, reproduce_table, FkbInput, FkbResult,
    TableReport, CSV_HEADER,
};
use fkb_core::link_diagram::LinkDiagram;
use fkb_core::quantum_invariant::{
    invariant_ip, invariant_tau3_with, invariant_tv3, InvariantValue, SurgeryPresentation,
};
use fkb_core::skein_eval::{BracketParams, DEFAULT_FRONTIER_CAP};

#[derive(Parser)]
#[command(
    name = "fkb",
    version,
    about = "Exact quantum invariants of 3-manifolds and FKB ideals of link exteriors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Largest number of open strands allowed during a bracket sweep.
    #[arg(long, global = true, default_value_t = DEFAULT_FRONTIER_CAP)]
    frontier_cap: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Pretty)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Pretty,
}

#[derive(Subcommand)]
enum Command {
    /// Invariant of the closed 3-manifold obtained by framed surgery.
    Invariant(InvariantArgs),
    /// FKB ideal of L_k: k-surgery on one component, the other left as boundary.
    Ideal(IdealArgs),
    /// Recompute the bundled table of small ideals and diff against it.
    ReproduceTable(TableArgs),
    /// List catalog entries, or show one.
    Catalog { name: Option<String> },
}

#[derive(Args)]
struct Source {
    /// Inline PD code: `PD[X[1,4,2,5], ...]`, a JSON tuple list, or `{"pd": [...], "unknots": m}`.
    #[arg(long, conflicts_with_all = ["pd_file", "catalog"])]
    pd: Option<String>,
    /// File holding a PD code in any accepted form.
    #[arg(long, conflicts_with = "catalog")]
    pd_file: Option<PathBuf>,
    /// Catalog entry name, e.g. L9a6 or T4-2.
    #[arg(long)]
    catalog: Option<String>,
}

#[derive(Args)]
struct InvariantArgs {
    /// SO(3) invariant I_p at this prime.
    #[arg(long, conflicts_with_all = ["tau3", "tv3"])]
    p: Option<u32>,
    /// SU(2) invariant tau_3.
    #[arg(long, conflicts_with = "tv3")]
    tau3: bool,
    /// tau_3 times its complex conjugate.
    #[arg(long)]
    tv3: bool,
    #[command(flatten)]
    source: Source,
    /// One framing per component, in component order.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    framings: Vec<i64>,
    /// Surgery on a single unknot with this framing.
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["pd", "pd_file", "catalog", "framings"])]
    unknot_framing: Option<i64>,
}

#[derive(Args)]
struct IdealArgs {
    #[arg(long)]
    p: u32,
    #[command(flatten)]
    source: Source,
    /// Component receiving the k-surgery (name or index); defaults to K, else 0.
    #[arg(long)]
    surgery_component: Option<String>,
    /// The framing k.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "scan_k")]
    framing: Option<i64>,
    /// Inclusive range of framings, `A..B`.
    #[arg(long, allow_hyphen_values = true)]
    scan_k: Option<String>,
    /// Candidate principal generator, e.g. "1 - 2*z^2"; repeatable.
    #[arg(long)]
    candidate: Vec<String>,
    /// Also compare each ideal with the one at k + p.
    #[arg(long)]
    check_period: bool,
}

#[derive(Args)]
struct TableArgs {
    /// Table file; defaults to the bundled one.
    #[arg(long)]
    table: Option<PathBuf>,
    /// Mirror every catalog diagram before calibrating.
    #[arg(long)]
    mirror: bool,
    /// Values of n in k = p*n + residue.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        default_value = "0,1"
    )]
    n: Vec<i64>,
}

#[derive(Debug, thiserror::Error)]
enum Failure {
    #[error(transparent)]
    Core(#[from] fkb_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Check(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        use fkb_core::Error as E;
        match self {
            Failure::Usage(_) => 2,
            Failure::Check(_) => 5,
            Failure::Core(e) => match e {
                E::Parse(_) | E::InvalidPd(_) | E::UnknownComponent(_) | E::Json(_) => 2,
                E::ColorOutOfRange { .. }
                | E::BadPrime(_)
                | E::VanishingQuantumInteger(_)
                | E::FrontierCap { .. }
                | E::UnsupportedTheory(_)
                | E::ConductorMismatch(..)
                | E::NotCoprime { .. } => 3,
                E::NonIntegral(_) | E::MixedGenerator(_) => 4,
                E::Catalog(_) | E::Io(_) => 1,
            },
        }
    }
}

type Out = Result<String, Failure>;

#[derive(Serialize)]
struct Conventions {
    a: String,
    root: String,
    calibration: String,
    frontier_cap: usize,
}

fn conventions(params: &BracketParams, calibration: &str) -> Result<Conventions, Failure> {
    let root = match params.theory {
        fkb_core::skein_eval::Theory::So3 { p } => match gauss_sum(p)?.convention {
            SqrtConvention::GaussSum => "sqrt(-p) = sum_a z^(a^2) (n=p)".to_string(),
            SqrtConvention::ITimesGaussSum => {
                format!("sqrt(-p) = i * sum_a z^(4a^2) with i = z^{p} (n={})", 4 * p)
            }
        },
        fkb_core::skein_eval::Theory::Su2 { .. } => {
            "eta = 1/sqrt(2), sqrt(2) = z^3 + z^-3 (n=24)".into()
        }
    };
    Ok(Conventions {
        a: params.a_description(),
        root,
        calibration: calibration.to_string(),
        frontier_cap: params.frontier_cap(),
    })
}

fn load_source(src: &Source) -> Result<(String, LinkDiagram), Failure> {
    let from_text = |text: &str| -> Result<LinkDiagram, Failure> {
        if text
            .chars()
            .filter(|c| !c.is_whitespace())
            .collect::<String>()
            == "PD[]"
        {
            return Ok(LinkDiagram::empty());
        }
        Ok(LinkDiagram::parse(text)?)
    };
    if let Some(text) = &src.pd {
        return Ok(("pd".into(), from_text(text)?));
    }
    if let Some(path) = &src.pd_file {
        let text = std::fs::read_to_string(path).map_err(fkb_core::Error::from)?;
        return Ok((path.display().to_string(), from_text(&text)?));
    }
    if let Some(name) = &src.catalog {
        return Ok((name.clone(), catalog::load(name)?.diagram()?));
    }
    Err(Failure::Usage(
        "give one of --pd, --pd-file or --catalog".into(),
    ))
}

fn json<T: Serialize>(v: &T) -> Out {
    serde_json::to_string_pretty(v)
        .map(|s| s + "\n")
        .map_err(|e| Failure::Core(e.into()))
}

#[derive(Serialize)]
struct Tagged<'a, T: Serialize> {
    conventions: &'a Conventions,
    #[serde(flatten)]
    result: T,
}

fn cmd_invariant(a: &InvariantArgs, cap: usize, format: Format) -> Out {
    let pres = match a.unknot_framing {
        Some(k) => SurgeryPresentation::unknot(k),
        None => {
            let (_, d) = load_source(&a.source)?;
            SurgeryPresentation::new(d, a.framings.clone())?
        }
    };
    let (value, params): (InvariantValue, BracketParams) = if a.tau3 || a.tv3 {
        let bp = BracketParams::su2(3)?.with_frontier_cap(cap);
        let v = if a.tv3 {
            invariant_tv3(&pres)?
        } else {
            invariant_tau3_with(&pres, &bp)?
        };
        (v, bp)
    } else {
        let p =
            a.p.ok_or_else(|| Failure::Usage("give --p, --tau3 or --tv3".into()))?;
        let bp = BracketParams::standard_a(p)?.with_frontier_cap(cap);
        (invariant_ip(&pres, &bp)?, bp)
    };
    let conv = conventions(&params, "none")?;
    let j = value.json();
    let name = if a.tv3 {
        "TV3".to_string()
    } else {
        j.theory.clone()
    };
    match format {
        Format::Json => json(&Tagged {
            conventions: &conv,
            result: &j,
        }),
        Format::Csv => Ok(format!(
            "theory,p,value,conductor,nu_h,is_unit,norm\n{},{},{},{},{},{},{}\n",
            name,
            j.p.or(j.r).unwrap_or_default(),
            j.value,
            j.conductor,
            j.nu_h.clone().unwrap_or_default(),
            j.is_unit,
            j.norm
        )),
        Format::Pretty => {
            let mut s = String::new();
            writeln!(s, "{name} = {} (n={})", j.value, j.conductor).unwrap();
            if let Some(nu) = &j.nu_h {
                writeln!(s, "nu_h: {nu}").unwrap();
            }
            writeln!(s, "norm: {}", j.norm).unwrap();
            writeln!(s, "unit: {}", j.is_unit).unwrap();
            write_conventions(&mut s, &conv);
            Ok(s)
        }
    }
}

fn write_conventions(s: &mut String, c: &Conventions) {
    writeln!(
        s,
        "conventions: {}; {}; calibration {}; frontier cap {}",
        c.a, c.root, c.calibration, c.frontier_cap
    )
    .unwrap();
}

fn parse_range(text: &str) -> Result<(i64, i64), Failure> {
    let bad = || Failure::Usage(format!("expected A..B, got {text:?}"));
    let (a, b) = text.split_once("..").ok_or_else(bad)?;
    let a: i64 = a.trim().parse().map_err(|_| bad())?;
    let b: i64 = b.trim().parse().map_err(|_| bad())?;
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

#[derive(Serialize)]
struct PeriodCheck {
    k: i64,
    k_plus_p: i64,
    equal: bool,
}

fn cmd_ideal(a: &IdealArgs, cap: usize, format: Format) -> Out {
    let (label, d) = load_source(&a.source)?;
    let params = BracketParams::standard_a(a.p)?.with_frontier_cap(cap);
    let comp = match &a.surgery_component {
        Some(c) => d.component_index(c)?,
        None => d.component_index("K").unwrap_or(0),
    };
    if d.num_components() != 2 {
        return Err(Failure::Usage(format!(
            "ideal needs a two-component link, got {}",
            d.num_components()
        )));
    }
    let knot_name = d.components()[comp]
        .name
        .clone()
        .unwrap_or_else(|| comp.to_string());
    let base = FkbInput::with_components(d, comp, 1 - comp, 0, a.p)?;
    let candidates = a
        .candidate
        .iter()
        .map(|c| CycInt::parse(a.p, c))
        .collect::<Result<Vec<_>, _>>()?;
    let ks: Vec<i64> = match (&a.scan_k, a.framing) {
        (Some(r), _) => {
            let (lo, hi) = parse_range(r)?;
            (lo..=hi).collect()
        }
        (None, Some(k)) => vec![k],
        (None, None) => return Err(Failure::Usage("give --framing or --scan-k".into())),
    };
    let results: Vec<FkbResult> = ks
        .iter()
        .map(|&k| fkb_ideal(&base.with_k(k), &params, &candidates))
        .collect::<Result<_, _>>()?;
    let mut periods = Vec::new();
    if a.check_period {
        for r in &results {
            let shifted = fkb_ideal(&base.with_k(r.k + a.p as i64), &params, &[])?;
            periods.push(PeriodCheck {
                k: r.k,
                k_plus_p: shifted.k,
                equal: shifted.ideal == r.ideal,
            });
        }
    }
    let conv = conventions(&params, "none")?;
    let mut out = match format {
        Format::Json => {
            #[derive(Serialize)]
            struct IdealOut<'a> {
                link: &'a str,
                surgery_component: &'a str,
                results: Vec<fkb_core::fkb_ideal::FkbJson>,
                #[serde(skip_serializing_if = "<[PeriodCheck]>::is_empty")]
                period: &'a [PeriodCheck],
            }
            json(&Tagged {
                conventions: &conv,
                result: IdealOut {
                    link: &label,
                    surgery_component: &knot_name,
                    results: results.iter().map(FkbResult::json).collect(),
                    period: &periods,
                },
            })?
        }
        Format::Csv => {
            let mut s = format!("{CSV_HEADER}\n");
            for r in &results {
                writeln!(s, "{}", csv_row(&label, &knot_name, r)).unwrap();
            }
            s
        }
        Format::Pretty => {
            let mut s = String::new();
            for r in &results {
                writeln!(
                    s,
                    "{label} ({knot_name} surgered), p = {}, k = {}",
                    r.p, r.k
                )
                .unwrap();
                for (i, g) in r.generators.iter().enumerate() {
                    writeln!(s, "  I_p(L_(k,{i})) = {g}").unwrap();
                }
                writeln!(s, "  ideal HNF: {}", r.ideal).unwrap();
                writeln!(
                    s,
                    "  norm: {}  nu_h: {}  {}",
                    r.norm(),
                    r.nu_h(),
                    r.classification
                )
                .unwrap();
                writeln!(
                    s,
                    "  H_1 = Z + Z/{}  homology circle: {}",
                    r.homology.torsion,
                    r.homology.is_homology_circle()
                )
                .unwrap();
                if !candidates.is_empty() {
                    let m = r.principal_match.as_ref().map(|g| g.to_string());
                    writeln!(s, "  principal match: {}", m.as_deref().unwrap_or("none")).unwrap();
                }
            }
            for c in &periods {
                writeln!(
                    s,
                    "period k={} vs k={}: {}",
                    c.k,
                    c.k_plus_p,
                    if c.equal { "equal" } else { "DIFFERENT" }
                )
                .unwrap();
            }
            write_conventions(&mut s, &conv);
            s
        }
    };
    if periods.iter().any(|c| !c.equal) {
        out.push_str("period check failed\n");
        return Err(Failure::Check(out));
    }
    Ok(out)
}

fn render_table(report: &TableReport, format: Format, conv: &Conventions) -> Out {
    match format {
        Format::Json => json(&Tagged {
            conventions: conv,
            result: report,
        }),
        Format::Csv => {
            let mut s = String::from(
                "link,K,n,k,expected_generator,expected_norm,norm,hnf_hash,generator_match,homology_circle,expected_circle,classification\n",
            );
            for r in &report.rows {
                writeln!(
                    s,
                    "{},{},{},{},{},{},{},{},{},{},{},{}",
                    r.link,
                    r.knot,
                    r.n,
                    r.k,
                    r.expected_generator,
                    r.expected_norm,
                    r.norm,
                    r.hnf_hash,
                    r.generator_match,
                    r.homology_circle,
                    r.expected_circle,
                    r.classification
                )
                .unwrap();
            }
            Ok(s)
        }
        Format::Pretty => {
            let mut s = String::new();
            match report.calibration {
                Some(c) => writeln!(s, "calibration: {}", c.describe()).unwrap(),
                None => writeln!(
                    s,
                    "calibration: no automorphism matches the calibration row"
                )
                .unwrap(),
            }
            for r in &report.rows {
                let tag = if r.ok() { " " } else { "-" };
                writeln!(
                    s,
                    "{tag} {:<6} {:<4} k={:<3} ({}, norm {})  circle {}",
                    r.link, r.knot, r.k, r.expected_generator, r.expected_norm, r.expected_circle
                )
                .unwrap();
                if !r.ok() {
                    writeln!(
                        s,
                        "+ {:<6} {:<4} k={:<3} (hnf {}, norm {})  circle {}",
                        r.link, r.knot, r.k, r.hnf_hash, r.norm, r.homology_circle
                    )
                    .unwrap();
                }
            }
            for c in &report.off_residue {
                let tag = if c.trivial { " " } else { "-" };
                writeln!(s, "{tag} {:<6} k={:<3} trivial ideal", c.link, c.k).unwrap();
            }
            let bad = report.rows.iter().filter(|r| !r.ok()).count()
                + report.off_residue.iter().filter(|c| !c.trivial).count();
            writeln!(
                s,
                "{} checks, {} mismatches",
                report.rows.len() + report.off_residue.len(),
                bad
            )
            .unwrap();
            write_conventions(&mut s, conv);
            Ok(s)
        }
    }
}

fn cmd_reproduce_table(a: &TableArgs, cap: usize, format: Format) -> Out {
    let path = a.table.clone().unwrap_or_else(default_table_path);
    let table = load_table(&path)?;
    let params = BracketParams::standard_a(table.p)?.with_frontier_cap(cap);
    let report = reproduce_table(&table, &params, &a.n, a.mirror)?;
    let cal = report
        .calibration
        .map(|c| c.describe())
        .unwrap_or_else(|| "unresolved".into());
    let out = render_table(&report, format, &conventions(&params, &cal)?)?;
    if report.ok() {
        Ok(out)
    } else {
        Err(Failure::Check(out))
    }
}

fn cmd_catalog(name: &Option<String>, format: Format) -> Out {
    match name {
        None => {
            let names = catalog::list(&catalog::default_dir())?;
            match format {
                Format::Json => json(&names),
                _ => Ok(names.join("\n") + "\n"),
            }
        }
        Some(n) => {
            let e = catalog::load(n)?;
            let d = e.diagram()?;
            match format {
                Format::Json => json(&e),
                _ => {
                    let mut s = format!("{}: {}\n", e.name, d);
                    for (i, c) in d.components().iter().enumerate() {
                        writeln!(
                            s,
                            "  component {i} ({}): {} edges, self-writhe {}",
                            c.name.as_deref().unwrap_or("-"),
                            c.edges.len(),
                            d.self_writhe(i)?
                        )
                        .unwrap();
                    }
                    writeln!(s, "  source: {}", e.source).unwrap();
                    Ok(s)
                }
            }
        }
    }
}

fn run(cli: &Cli) -> Out {
    #[cfg(feature = "parallel")]
    if let Some(j) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    match &cli.command {
        Command::Invariant(a) => cmd_invariant(a, cli.frontier_cap, cli.format),
        Command::Ideal(a) => cmd_ideal(a, cli.frontier_cap, cli.format),
        Command::ReproduceTable(a) => cmd_reproduce_table(a, cli.frontier_cap, cli.format),
        Command::Catalog { name } => cmd_catalog(name, cli.format),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(s) => {
            print!("{s}");
            ExitCode::SUCCESS
        }
        Err(Failure::Check(s)) => {
            print!("{s}");
            ExitCode::from(5)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
