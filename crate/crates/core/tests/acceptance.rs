use std::error::Error as StdError;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;

use fkb_core::catalog;
use fkb_core::cyclotomic::{CycFrac, CycInt, Valuation};
use fkb_core::fkb_ideal::{
    default_table_path, embedding_monotonicity_check, fkb_ideal, homology_lk, load_table,
    normalize_value, nu_h_bound_check, omega_bracket_ideal, reproduce_table, Classification,
    FkbInput, FkbResult, Table,
};
use fkb_core::ideal_lattice::IdealLattice;
use fkb_core::link_diagram::LinkDiagram;
use fkb_core::quantum_invariant::{
    invariant_ip, invariant_ip_at, invariant_tau3, invariant_tv3, SurgeryPresentation,
};
use fkb_core::skein_eval::{
    bracket, bracket_with_order, cabled_bracket, colored_bracket, jones_wenzl, BracketParams,
    TlElement,
};

type Check = Result<String, Box<dyn StdError>>;
type Criterion = (&'static str, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)*) => {
        if !$cond {
            return Err(format!($($msg)*).into());
        }
    };
}

const PRIMES: [u32; 2] = [5, 7];

fn table() -> Result<Table, Box<dyn StdError>> {
    Ok(load_table(&default_table_path())?)
}

fn two_component_links() -> Result<Vec<String>, Box<dyn StdError>> {
    let mut out = Vec::new();
    for name in catalog::list(&catalog::default_dir())? {
        if catalog::load(&name)?.diagram()?.num_components() == 2 {
            out.push(name);
        }
    }
    Ok(out)
}

/// Brings two values to a common conductor.
fn common(a: &CycInt, b: &CycInt) -> Result<(CycInt, CycInt), Box<dyn StdError>> {
    let (m, n) = (a.conductor(), b.conductor());
    let l = m / gcd(m, n) * n;
    Ok((a.lift(l)?, b.lift(l)?))
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn same(a: &CycInt, b: &CycInt) -> Result<bool, Box<dyn StdError>> {
    let (a, b) = common(a, b)?;
    Ok(a == b)
}

/// `[m]` at `q = ζ_p`, summed directly.
fn qint_oracle(p: u32, m: i64) -> CycInt {
    let mut s = CycInt::zero(p);
    for j in 0..m {
        s.add_assign_ref(&CycInt::zeta_pow(p, m - 1 - 2 * j));
    }
    s
}

fn criterion_1() -> Check {
    let table = table()?;
    let params = BracketParams::standard_a(table.p)?;
    let report = reproduce_table(&table, &params, &[0, 1], false)?;
    let cal = report
        .calibration
        .ok_or("no automorphism maps the calibration ideal onto its printed generator")?;
    ensure!(
        report.rows.len() == 2 * table.rows.len(),
        "{} row checks",
        report.rows.len()
    );
    let bad: Vec<String> = report
        .rows
        .iter()
        .filter(|r| !(r.generator_match && r.norm_match))
        .map(|r| format!("{} k={} norm {}", r.link, r.k, r.norm))
        .collect();
    ensure!(bad.is_empty(), "mismatched: {}", bad.join("; "));

    let flipped = reproduce_table(&table, &params, &[0, 1], true)?;
    let fcal = flipped
        .calibration
        .ok_or("mirrored diagrams do not calibrate")?;
    ensure!(
        fcal.mirror,
        "mirrored diagrams calibrated without a mirror: {}",
        fcal.describe()
    );
    ensure!(
        flipped
            .rows
            .iter()
            .all(|r| r.generator_match && r.norm_match),
        "mirrored diagrams do not reproduce the table under {}",
        fcal.describe()
    );
    Ok(format!(
        "calibration {}; {} rows x n in {{0,1}} match; mirrored input recalibrates to {}",
        cal.describe(),
        table.rows.len(),
        fcal.describe()
    ))
}

fn criterion_2() -> Check {
    let params = BracketParams::standard_a(5)?;
    for k in 1..=4 {
        let r = fkb_ideal(&FkbInput::from_catalog("L9a6", k, 5)?, &params, &[])?;
        ensure!(r.ideal.is_unit(), "L9a6 k={k}: norm {}", r.norm());
    }
    Ok("L9a6 at k = 1..4 gives (1)".into())
}

fn criterion_3() -> Check {
    let table = table()?;
    let mut n_checks = 0;
    for row in &table.rows {
        let lk = FkbInput::from_catalog(&row.link, 0, table.p)?.linking_number();
        ensure!(
            lk.abs() == row.linking,
            "{}: linking number {lk}, table {}",
            row.link,
            row.linking
        );
        for n in -3..=6 {
            let input = FkbInput::from_catalog(&row.link, row.k(table.p, n), table.p)?;
            let got = homology_lk(&input).is_homology_circle();
            ensure!(
                got == row.circle_rule.holds(n),
                "{} k={}: homology circle {got}, table says \"{}\"",
                row.link,
                input.k,
                row.homology_circle
            );
            n_checks += 1;
        }
    }
    let pick = |link: &str, res: i64| {
        table
            .rows
            .iter()
            .find(|r| r.link == link && r.k_residue == res)
            .ok_or(format!("no row {link}"))
    };
    let r6 = pick("L9a6", 0)?;
    ensure!(
        (-3..=6).all(|n| r6.circle_rule.holds(n) == (n % 2 != 0)),
        "L9a6 rule"
    );
    let r17 = pick("L9a17", 3)?;
    ensure!((-3..=6).all(|n| !r17.circle_rule.holds(n)), "L9a17 rule");
    let r23 = pick("L9a23", 3)?;
    ensure!(
        (-3..=6).all(|n| r23.circle_rule.holds(n) == (n % 3 != 0)),
        "L9a23 rule"
    );
    Ok(format!("{n_checks} (row, n) samples agree"))
}

fn criterion_4() -> Check {
    for p in PRIMES {
        let d = (p - 1) / 2;
        let s3 = invariant_ip_at(&SurgeryPresentation::empty(), p)?;
        ensure!(s3.value.is_one(), "I_{p}(S^3) = {}", s3.value);

        let v = normalize_value(&invariant_ip_at(&SurgeryPresentation::unknot(0), p)?)?;
        ensure!(
            v.nu_h() == Valuation::Finite(d - 1),
            "nu_h(I_{p}(S1xS2)) = {}",
            v.nu_h()
        );
        let breve = IdealLattice::from_generators(p, &[v])?.breve();
        ensure!(
            breve.is_unit(),
            "breve part of I_{p}(S1xS2) has norm {}",
            breve.norm()
        );

        for k in 1..p as i64 {
            let l = invariant_ip_at(&SurgeryPresentation::unknot(k), p)?;
            ensure!(l.is_unit(), "I_{p}(L({k},1)) = {} is not a unit", l.value);
        }
    }
    Ok("S^3, S^1xS^2 and L(k,1) at p = 5, 7".into())
}

fn criterion_5() -> Check {
    let links = two_component_links()?;
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut evaluated = 0usize;
    for p in PRIMES {
        let params = BracketParams::standard_a(p)?;
        let pi = p as i64;
        let mut closed = Vec::new();
        for link in &links {
            let base = FkbInput::from_catalog(link, 0, p)?;
            let mut results: Vec<FkbResult> = Vec::new();
            for k in 0..pi {
                let r = fkb_ideal(&base.with_k(k), &params, &[])?;
                let shifted = fkb_ideal(&base.with_k(k + pi), &params, &[])?;
                ensure!(
                    r.ideal == shifted.ideal,
                    "{link} p={p}: k={k} and k={} differ",
                    k + pi
                );
                let nu = nu_h_bound_check(&base.with_k(k), &r);
                ensure!(
                    nu.consistent,
                    "{link} p={p} k={k}: nu_h {} vs p | gcd {}",
                    nu.nu_h,
                    nu.p_divides_gcd
                );
                evaluated += r.generators.len() + shifted.generators.len();
                results.push(r);
            }

            for (k, s) in [(1, 0), (0, 1), (2, -1)] {
                let pres = base.with_k(k).presentation(s);
                let v = invariant_ip(&pres, &params)?;
                for e in [1, -1] {
                    let w = invariant_ip(&pres.with_split_unknot(e), &params)?;
                    ensure!(
                        same(&v.value, &w.value)?,
                        "{link} p={p} (k,s)=({k},{s}): blow-up by {e} changes I_p"
                    );
                }
                closed.push(pres);
                evaluated += 3;
            }

            for k in [0, 1] {
                let input = base.with_k(k);
                let m =
                    embedding_monotonicity_check(&input, &results[k as usize], &params, -10..=10)?;
                let bad: Vec<i64> = m.checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
                ensure!(
                    m.ok,
                    "{link} p={p} k={k}: I_p(L_(k,s)) outside the ideal for s in {bad:?}"
                );
                evaluated += m.checks.len();
            }
        }

        closed.shuffle(&mut rng);
        for pair in closed.chunks(2).take(3) {
            let (a, b) = (&pair[0], &pair[1]);
            let va = invariant_ip(a, &params)?.value;
            let vb = invariant_ip(b, &params)?.value;
            let vab = invariant_ip(&a.disjoint_union(b), &params)?.value;
            let (x, y) = common(&va, &vb)?;
            ensure!(
                same(&vab, &(&x * &y))?,
                "p={p}: I_p not multiplicative on {} + {}",
                a.hash(),
                b.hash()
            );
            evaluated += 3;
        }
    }
    Ok(format!(
        "{} links at p = 5, 7; {evaluated} integral invariants; periodicity, blow-up, multiplicativity, nu_h, monotonicity",
        links.len()
    ))
}

fn criterion_6() -> Check {
    for p in PRIMES {
        let params = BracketParams::standard_a(p)?;
        ensure!(params.a_pow(2) == CycInt::zeta_pow(p, 1), "A^2 != z");
        let d = (p as usize - 1) / 2;
        let sign = |c: usize| if c.is_multiple_of(2) { 1 } else { -1 };
        let unknot = LinkDiagram::unknot();
        let hopf = catalog::load("Hopf")?.diagram()?;
        for c1 in 0..d {
            let want = qint_oracle(p, c1 as i64 + 1).scale(&sign(c1).into());
            let got = colored_bracket(&unknot, &[c1], &[0], &params)?;
            ensure!(
                got == CycFrac::from(want.clone()),
                "p={p}: unknot colored {c1} gives {got}"
            );
            for c2 in 0..d {
                let m = ((c1 + 1) * (c2 + 1)) as i64;
                let want = qint_oracle(p, m).scale(&sign(c1 + c2).into());
                let got = cabled_bracket(&hopf, &[c1, c2], &params)?;
                ensure!(
                    got == CycFrac::from(want),
                    "p={p}: Hopf colored ({c1},{c2}) gives {got}"
                );
            }
            let f = jones_wenzl(c1, &params)?;
            ensure!(
                f.compose(&f, &params) == f,
                "p={p}: f_{c1} is not idempotent"
            );
            for i in 1..c1 {
                let e = TlElement::generator(c1, i, p);
                ensure!(
                    e.compose(&f, &params).terms().is_empty(),
                    "p={p}: e_{i} f_{c1} != 0"
                );
            }
        }
    }

    let mut rng = StdRng::seed_from_u64(7);
    let params = BracketParams::standard_a(7)?.with_frontier_cap(64);
    let mut orders = 0;
    for (name, colors) in [
        ("T4-2", vec![2, 1]),
        ("L5a1", vec![1, 2]),
        ("L9a6", vec![1, 1]),
        ("5_2", vec![2]),
    ] {
        let cable = catalog::load(name)?.diagram()?.cable(&colors)?;
        let ins = cable
            .projectors
            .iter()
            .map(|s| jones_wenzl(colors[s.component], &params))
            .collect::<Result<Vec<_>, _>>()?;
        let want = bracket(&cable, &ins, &params)?;
        let nv = cable.crossings.len() + cable.projectors.len();
        let mut order: Vec<usize> = (0..nv).collect();
        for _ in 0..3 {
            order.shuffle(&mut rng);
            let got = bracket_with_order(&cable, &ins, &params, Some(&order))?.0;
            ensure!(
                got == want,
                "{name} {colors:?}: sweep order {order:?} changes the bracket"
            );
            orders += 1;
        }
    }
    Ok(format!("colors up to d-1 at p = 5, 7; JW idempotent and turnback-free; {orders} random sweep orders agree"))
}

fn criterion_7() -> Check {
    let unknotted_k = ["Hopf", "T4-2", "L5a1", "L6a1", "L6a2", "L6a3"];
    for p in PRIMES {
        let params = BracketParams::standard_a(p)?;
        for link in unknotted_k {
            for k in 0..p as i64 {
                let input = FkbInput::from_catalog(link, k, p)?;
                let r = fkb_ideal(&input, &params, &[])?;
                ensure!(
                    r.classification == Classification::Large,
                    "{link} p={p} k={k}: small (norm {}, nu_h {})",
                    r.norm(),
                    r.nu_h()
                );
            }
        }
    }

    let table = table()?;
    let params = BracketParams::standard_a(table.p)?;
    let mut small = 0;
    for row in &table.rows {
        for n in [0, 1] {
            let input = FkbInput::from_catalog(&row.link, row.k(table.p, n), table.p)?;
            let r = fkb_ideal(&input, &params, &[])?;
            if r.classification != Classification::Small {
                continue;
            }
            small += 1;
            let v = invariant_ip(&input.knot_surgery()?, &params)?;
            ensure!(
                !v.is_unit(),
                "{} k={}: I_5(K({})) = {} is a unit",
                row.link,
                input.k,
                input.k,
                v.value
            );
        }
    }
    ensure!(small > 0, "no small table rows");
    Ok(format!(
        "{} K-unknotted links large at p = 5, 7; {small} small table samples have non-unit I_5(K(k))",
        unknotted_k.len()
    ))
}

fn t42(k: i64, s: i64) -> Result<SurgeryPresentation, Box<dyn StdError>> {
    let d = catalog::load("T4-2")?.diagram()?;
    let kc = d.component_index("K")?;
    let mut framings = vec![s; 2];
    framings[kc] = k;
    Ok(SurgeryPresentation::new(d, framings)?)
}

fn criterion_8() -> Check {
    let s3 = invariant_tau3(&SurgeryPresentation::empty())?;
    ensure!(
        s3.value.is_one() && s3.conductor() == 8,
        "tau_3(S^3) = {}",
        s3.value
    );

    let sqrt2 = &CycInt::zeta_pow(8, 1) + &CycInt::zeta_pow(8, -1);
    let even = |x: &CycInt| x.coeffs().iter().all(|c| c % 2 == 0.into());
    let as_z8 = |x: &CycInt| {
        x.lift(8).or_else(|_| {
            x.descend(8)
                .ok_or(Box::<dyn StdError>::from("not in Z[z_8]"))
        })
    };

    for k in [2, 6, -2] {
        for s in [0, 2, 4, -2] {
            let t = invariant_tau3(&t42(k, s)?)?;
            ensure!(t.value.is_zero(), "tau_3(T(4,2) k={k} s={s}) = {}", t.value);
        }
    }
    let mut achieved = Vec::new();
    for k in [0, 4, -4] {
        for s in [0, 2, 4, -2, 1] {
            let pres = t42(k, s)?;
            let t = as_z8(&invariant_tau3(&pres)?.value)?;
            let half = &t * &sqrt2;
            ensure!(
                even(&half),
                "tau_3(T(4,2) k={k} s={s}) = {t} is not in (sqrt 2)"
            );
            let tv = as_z8(&invariant_tv3(&pres)?.value)?;
            ensure!(even(&tv), "TV_3(T(4,2) k={k} s={s}) = {tv} is not in (2)");
            let unit = |x: &CycInt| {
                let h = CycInt::from_coeffs(8, x.coeffs().iter().map(|c| c / 2).collect());
                h.is_unit()
            };
            if unit(&half) {
                ensure!(
                    unit(&tv),
                    "TV_3 of the sqrt 2 witness is not an associate of 2"
                );
                achieved.push((k, s));
            }
        }
    }
    ensure!(!achieved.is_empty(), "no sample is an associate of sqrt 2");
    Ok(format!("zero at k = 2 mod 4; (sqrt 2) containment at k = 0 mod 4, achieved at (k,s) in {achieved:?}"))
}

fn criterion_9() -> Check {
    let table = table()?;
    let params = BracketParams::standard_a(table.p)?;
    let mut n_checks = 0;
    for row in &table.rows {
        for n in [0, 1] {
            let input = FkbInput::from_catalog(&row.link, row.k(table.p, n), table.p)?;
            let a = fkb_ideal(&input, &params, &[])?.ideal.breve();
            let b = omega_bracket_ideal(&input, &params)?.breve();
            ensure!(
                a == b,
                "{} k={}: breve ideals differ (norms {} vs {})",
                row.link,
                input.k,
                a.norm(),
                b.norm()
            );
            n_checks += 1;
        }
    }
    Ok(format!("{n_checks} table samples"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("table reproduction", criterion_1),
        ("off-residue triviality", criterion_2),
        ("homology column", criterion_3),
        ("closed-manifold anchors", criterion_4),
        ("structural properties", criterion_5),
        ("engine oracles", criterion_6),
        ("large/small consistency", criterion_7),
        ("tau_3 on T(4,2)", criterion_8),
        ("breve cross-check", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = run();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail}) [{secs:.1}s]", i + 1),
            Err(e) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({e}) [{secs:.1}s]", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
