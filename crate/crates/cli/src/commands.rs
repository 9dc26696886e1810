use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::process::ExitCode;

use serde::Serialize;

use ffdef_core::eval::{InterpretationJson, Transcript};
use ffdef_core::factor::{count_irreducibles, enumerate_irreducibles, irreducibles};
use ffdef_core::field::is_prime;
use ffdef_core::lower::{PrenexSystem, SinglePolynomial};
use ffdef_core::orbit::{checked_m_bound, orbit_criterion_detail, Direction};
use ffdef_core::pheidas::{
    eval_nat, parse_pheidas, round_trip, to_dnf, translate_sentence, unnest, NatVerdict, RoundTripReport,
    UnnestedSentence,
};
use ffdef_core::sweep::{run_sweep, write_csv, Sample, SweepSpec};
use ffdef_core::text::parse_formula;
use ffdef_core::{
    artin_schreier_solve, build_phi, build_pi, build_pi_root, direct_orbit, eval_pe, single_polynomial, to_system,
    AsOutcome, CriterionConfig, Field, Interpretation, Obstruction, PheidasSentence, RatFunc, RingFormula,
    SearchBounds,
};

use crate::output::{read_arg, CliError, Sink, OUT_DIR_ENV};
use crate::{Builder, EvalArgs, FieldArgs, Format, LowerTarget, PheidasAction, SweepArgs};

type Outcome = Result<ExitCode, CliError>;

impl FieldArgs {
    fn field(&self) -> Result<Field, CliError> {
        Field::new(self.p, self.k).map_err(CliError::domain)
    }
}

fn ratfunc(field: &Field, text: &str) -> Result<RatFunc, CliError> {
    RatFunc::parse(field, text).map_err(|e| CliError::usage(format!("cannot parse `{text}`: {e}")))
}

fn formula_arg(arg: &str) -> Result<RingFormula, CliError> {
    let text = read_arg(arg)?;
    if text.trim_start().starts_with('{') {
        let bad = |e: serde_json::Error| CliError::usage(format!("bad formula JSON: {e}"));
        let mut value: serde_json::Value = serde_json::from_str(&text).map_err(bad)?;
        // Accept the reports written by `build-formula` and `pheidas translate`.
        if value.get("kind").is_none() {
            if let Some(inner) = value.get_mut("formula") {
                value = inner.take();
            }
        }
        serde_json::from_value(value).map_err(bad)
    } else {
        parse_formula(&text).map_err(CliError::usage)
    }
}

fn criterion_config(field: &FieldArgs, genus: u64, d: Option<u32>) -> Result<CriterionConfig, CliError> {
    let p = u32::try_from(field.p).map_err(CliError::usage)?;
    match d {
        Some(d) => CriterionConfig::with_degree(genus, p, field.k, d),
        None => CriterionConfig::choose(genus, p, field.k),
    }
    .map_err(CliError::domain)
}

#[derive(Serialize)]
struct IrrPolysReport {
    field: String,
    d: usize,
    count: usize,
    necklace_count: u128,
    polys: Vec<String>,
}

pub fn irr_polys(sink: &Sink, args: &FieldArgs, d: usize, count: Option<usize>) -> Outcome {
    let field = args.field()?;
    if d == 0 {
        return Err(CliError::usage("--d must be at least 1"));
    }
    let polys = match count {
        Some(m) => enumerate_irreducibles(&field, d, m).map_err(CliError::domain)?,
        None => irreducibles(&field, d).collect(),
    };
    let report = IrrPolysReport {
        field: field.descriptor(),
        d,
        count: polys.len(),
        necklace_count: count_irreducibles(d as u32, field.q() as u64),
        polys: polys.iter().map(|f| f.format_with("X")).collect(),
    };
    sink.emit(
        || {
            let mut s = format!(
                "{} monic irreducible polynomials of degree {d} over F_{} (necklace count {})\n",
                report.count,
                field.q(),
                report.necklace_count
            );
            for f in &report.polys {
                s.push_str(f);
                s.push('\n');
            }
            s
        },
        &report,
    )?;
    Ok(ExitCode::SUCCESS)
}

fn parse_range(flag: &str, s: &str) -> Result<RangeInclusive<u64>, CliError> {
    let bad = || CliError::usage(format!("--{flag} expects a number or a range `a..b`, got `{s}`"));
    let num = |t: &str| t.trim().parse::<u64>().map_err(|_| bad());
    let range = match s.split_once("..") {
        Some((a, b)) => num(a)?..=num(b.trim_start_matches('='))?,
        None => num(s)?..=num(s)?,
    };
    if range.is_empty() {
        return Err(bad());
    }
    Ok(range)
}

#[derive(Serialize)]
struct MBoundRow {
    genus: u64,
    d: u64,
    p: u64,
    m: u128,
}

#[derive(Serialize)]
struct MBoundReport {
    rows: Vec<MBoundRow>,
}

pub fn m_bound(sink: &Sink, genus: &str, d: &str, p: &str) -> Outcome {
    let (genus, ds, ps) = (parse_range("genus", genus)?, parse_range("d", d)?, parse_range("p", p)?);
    let primes: Vec<u64> = ps.filter(|&p| is_prime(p)).collect();
    if primes.is_empty() {
        return Err(CliError::usage("--p must include a prime"));
    }
    let mut rows = Vec::new();
    for g in genus {
        for d in ds.clone().filter(|&d| d >= 1) {
            for &p in &primes {
                let m = checked_m_bound(g, d, p)
                    .ok_or_else(|| CliError::Domain(format!("M({g}, {d}, {p}) overflows")))?;
                rows.push(MBoundRow { genus: g, d, p, m });
            }
        }
    }
    if rows.is_empty() {
        return Err(CliError::usage("--d must include a degree of at least 1"));
    }
    let report = MBoundReport { rows };
    sink.emit(
        || match report.rows.as_slice() {
            [one] => one.m.to_string(),
            rows => {
                let mut s = String::from("genus\td\tp\tM\n");
                for r in rows {
                    s.push_str(&format!("{}\t{}\t{}\t{}\n", r.genus, r.d, r.p, r.m));
                }
                s
            }
        },
        &report,
    )?;
    Ok(ExitCode::SUCCESS)
}

pub fn config(sink: &Sink, args: &FieldArgs, genus: u64, d: Option<u32>) -> Outcome {
    let cfg = criterion_config(args, genus, d)?;
    sink.emit(
        || {
            let mut s = format!(
                "genus <= {}, F_{}^{}: d = {}, M = {}\n",
                cfg.genus_bound, cfg.p, cfg.k, cfg.d, cfg.m
            );
            for (j, f) in cfg.polys.iter().enumerate() {
                s.push_str(&format!("F_{} = {}\n", j + 1, f.format_with("X")));
            }
            s
        },
        &cfg,
    )?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct AsReport {
    field: String,
    c: String,
    solvable: bool,
    witness: Option<String>,
    obstruction: Option<Obstruction>,
}

pub fn as_solve(sink: &Sink, args: &FieldArgs, c: &str) -> Outcome {
    let field = args.field()?;
    let c = ratfunc(&field, c)?;
    let outcome = artin_schreier_solve(&c).map_err(CliError::domain)?;
    let (witness, obstruction) = match outcome {
        AsOutcome::Solvable(h) => (Some(h.to_string()), None),
        AsOutcome::Unsolvable(o) => (None, Some(o)),
    };
    let report =
        AsReport { field: field.descriptor(), c: c.to_string(), solvable: witness.is_some(), witness, obstruction };
    sink.emit(
        || match (&report.witness, &report.obstruction) {
            (Some(h), _) => format!("solvable: h = {h}"),
            (None, Some(Obstruction::OddPole { place, order })) => {
                format!("unsolvable: pole of odd order {order} at {place}")
            }
            (None, Some(Obstruction::NonzeroTrace { constant })) => {
                format!("unsolvable: residual constant {constant} has trace 1")
            }
            (None, None) => unreachable!("an unsolvable outcome carries an obstruction"),
        },
        &report,
    )?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SquareReport {
    field: String,
    f: String,
    square: bool,
    root: Option<String>,
}

pub fn square(sink: &Sink, args: &FieldArgs, f: &str) -> Outcome {
    let field = args.field()?;
    let f = ratfunc(&field, f)?;
    let root = f.sqrt().map(|r| r.to_string());
    let report = SquareReport { field: field.descriptor(), f: f.to_string(), square: root.is_some(), root };
    sink.emit(
        || match &report.root {
            Some(r) => format!("square: root = {r}"),
            None => "not a square".into(),
        },
        &report,
    )?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct OrbitReport {
    field: String,
    f: String,
    g: String,
    d: u32,
    m: usize,
    criterion: bool,
    oracle: bool,
    agree: bool,
    direction: Option<Direction>,
    s: Option<u32>,
    /// 1-based indices `j` whose condition fails.
    failing_j: Vec<usize>,
}

pub fn orbit_check(sink: &Sink, args: &FieldArgs, f: &str, g: &str, genus: u64, d: Option<u32>) -> Outcome {
    let field = args.field()?;
    let (f, g) = (ratfunc(&field, f)?, ratfunc(&field, g)?);
    let cfg = criterion_config(args, genus, d)?;
    let detail = orbit_criterion_detail(&f, &g, &cfg).map_err(CliError::domain)?;
    let oracle = direct_orbit(&f, &g);
    let criterion = detail.iter().all(|&b| b);
    let report = OrbitReport {
        field: field.descriptor(),
        f: f.to_string(),
        g: g.to_string(),
        d: cfg.d,
        m: cfg.m,
        criterion,
        oracle: oracle.in_orbit,
        agree: criterion == oracle.in_orbit,
        direction: oracle.direction,
        s: oracle.s,
        failing_j: detail.iter().enumerate().filter(|(_, &b)| !b).map(|(j, _)| j + 1).collect(),
    };
    sink.emit(
        || {
            let mut s = format!(
                "criterion {}, oracle {}, {}",
                report.criterion,
                report.oracle,
                if report.agree { "agree" } else { "DISAGREE" }
            );
            match (report.direction, report.s) {
                (Some(Direction::FIsPowerOfG), Some(e)) => s.push_str(&format!(" (f = g^(p^{e}))")),
                (Some(Direction::GIsPowerOfF), Some(e)) => s.push_str(&format!(" (g = f^(p^{e}))")),
                _ => {}
            }
            s
        },
        &report,
    )?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SweepSummary {
    field: String,
    genus: u64,
    d: u32,
    m: usize,
    max_degree: usize,
    sample: Option<Sample>,
    pairs: usize,
    disagreements: usize,
    csv: Option<String>,
}

pub fn sweep(sink: &Sink, args: &SweepArgs) -> Outcome {
    let field = args.field.field()?;
    let config = criterion_config(&args.field, args.genus, args.d)?;
    let spec = SweepSpec {
        config: config.clone(),
        max_degree: args.max_degree,
        sample: args.sample.map(|pairs| Sample { pairs, seed: args.seed }),
    };
    let csv_path: Option<PathBuf> = sink.out.clone().or_else(|| {
        std::env::var_os(OUT_DIR_ENV).map(|dir| {
            PathBuf::from(dir).join(format!("sweep-p{}-k{}-deg{}.csv", field.p(), field.k(), args.max_degree))
        })
    });
    let checkpoint = csv_path.as_ref().map(|p| {
        let mut s = p.clone().into_os_string();
        s.push(".checkpoint.jsonl");
        PathBuf::from(s)
    });
    if let Some(parent) = checkpoint.as_ref().and_then(|c| c.parent()).filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let outcome = run_sweep(&spec, args.workers, checkpoint.as_deref())?;
    if outcome.resumed_blocks > 0 {
        eprintln!("resumed {} blocks from checkpoint", outcome.resumed_blocks);
    }
    let mut csv = Vec::new();
    write_csv(&outcome.rows, &mut csv)?;
    let summary = SweepSummary {
        field: field.descriptor(),
        genus: args.genus,
        d: config.d,
        m: config.m,
        max_degree: args.max_degree,
        sample: spec.sample,
        pairs: outcome.rows.len(),
        disagreements: outcome.disagreements,
        csv: csv_path.as_ref().map(|p| p.display().to_string()),
    };
    match &csv_path {
        Some(path) => {
            fs::File::create(path)?.write_all(&csv)?;
            if let Some(c) = &checkpoint {
                fs::remove_file(c)?;
            }
        }
        None if sink.format == Format::Csv => sink.write_raw(&csv)?,
        None => {}
    }
    if csv_path.is_some() || sink.format != Format::Csv {
        let summary_sink = Sink { format: sink.format_or_text(), out: None };
        summary_sink.emit(
            || {
                format!(
                    "{} pairs over F_{} (d = {}, M = {}), {} disagreements",
                    summary.pairs,
                    field.q(),
                    summary.d,
                    summary.m,
                    summary.disagreements
                )
            },
            &summary,
        )?;
    }
    Ok(if outcome.disagreements == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

impl Sink {
    fn format_or_text(&self) -> Format {
        if self.format == Format::Csv {
            Format::Text
        } else {
            self.format
        }
    }
}

#[derive(Serialize)]
struct FormulaReport<'a> {
    builder: &'a str,
    genus: u64,
    free_vars: Vec<String>,
    exists: usize,
    atoms: usize,
    formula: &'a RingFormula,
}

impl<'a> FormulaReport<'a> {
    fn new(builder: &'a str, genus: u64, formula: &'a RingFormula) -> Self {
        FormulaReport {
            builder,
            genus,
            free_vars: formula.free_vars().iter().map(|v| v.to_string()).collect(),
            exists: formula.count_exists(),
            atoms: formula.count_atoms(),
            formula,
        }
    }
}

pub fn build_formula(sink: &Sink, which: Builder, genus: u64, p: u64, m: u32) -> Outcome {
    let (name, formula) = match which {
        Builder::Phi => ("phi", build_phi(genus).map_err(CliError::domain)?.0),
        Builder::Pi => ("pi", (*build_pi(genus).map_err(CliError::domain)?).clone()),
        Builder::PiRoot => {
            if !is_prime(p) {
                return Err(CliError::usage(format!("--p {p} is not prime")));
            }
            ("pi-root", build_pi_root(genus, p, m).map_err(CliError::domain)?)
        }
    };
    sink.emit(|| formula.to_string(), &FormulaReport::new(name, genus, &formula))?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SystemReport<'a> {
    equations: usize,
    #[serde(flatten)]
    system: &'a PrenexSystem,
}

pub fn lower(sink: &Sink, target: LowerTarget, formula: &str, p: u64) -> Outcome {
    let f = formula_arg(formula)?;
    match target {
        LowerTarget::System => {
            let system = to_system(&f).map_err(CliError::domain)?;
            let report = SystemReport { equations: system.body.count_equations(), system: &system };
            sink.emit(|| system.to_string(), &report)?;
        }
        LowerTarget::Single => {
            if !is_prime(p) {
                return Err(CliError::usage(format!("--p {p} is not prime")));
            }
            let single: SinglePolynomial = single_polynomial(&f, p).map_err(CliError::domain)?;
            sink.emit(
                || {
                    let prefix: String = single.vars.iter().map(|v| format!("E {v} . ")).collect();
                    format!("{prefix}{} = 0", single.poly)
                },
                &single,
            )?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct ParseReport {
    p: u64,
    sentence: String,
    free_vars: Vec<String>,
    disjuncts: Vec<UnnestedSentence>,
}

#[derive(Serialize)]
struct NatReport {
    p: u64,
    sentence: String,
    bound: u64,
    verdict: &'static str,
    witness: Option<BTreeMap<String, u64>>,
}

#[derive(Serialize)]
struct TranslateReport<'a> {
    p: u64,
    sentence: String,
    #[serde(flatten)]
    formula: FormulaReport<'a>,
}

fn witness_text(w: &BTreeMap<String, u64>) -> String {
    w.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(", ")
}

pub fn pheidas(sink: &Sink, action: PheidasAction, sentence: &str, p: u64, bound: u64, genus: u64) -> Outcome {
    if !is_prime(p) {
        return Err(CliError::usage(format!("--p {p} is not prime")));
    }
    let text = read_arg(sentence)?;
    let formula = parse_pheidas(&text).map_err(CliError::usage)?;
    let sentence = PheidasSentence { p, formula };
    let canonical = sentence.formula.to_string();
    match action {
        PheidasAction::Parse => {
            let report = ParseReport {
                p,
                sentence: canonical.clone(),
                free_vars: sentence.formula.free_vars().iter().map(|v| v.to_string()).collect(),
                disjuncts: to_dnf(&sentence.formula).iter().map(unnest).collect(),
            };
            sink.emit(
                || {
                    let mut s = format!("{canonical}\n");
                    for u in &report.disjuncts {
                        s.push_str(&format!("unnested: {}\n", u.to_formula()));
                    }
                    s
                },
                &report,
            )?;
        }
        PheidasAction::Eval => {
            let verdict = eval_nat(&sentence, bound).map_err(CliError::domain)?;
            let (name, witness) = match &verdict {
                NatVerdict::True(w) => ("true", Some(w.iter().map(|(k, v)| (k.to_string(), *v)).collect())),
                NatVerdict::False => ("false", None),
                NatVerdict::Unknown => ("unknown", None),
            };
            let report = NatReport { p, sentence: canonical, bound, verdict: name, witness };
            sink.emit(
                || match &report.witness {
                    Some(w) => format!("true ({})", witness_text(w)),
                    None if report.verdict == "unknown" => format!("unknown (no witness up to {bound})"),
                    None => report.verdict.to_string(),
                },
                &report,
            )?;
        }
        PheidasAction::Translate => {
            let ring = translate_sentence(&sentence, genus, 1).map_err(CliError::domain)?;
            let report = TranslateReport { p, sentence: canonical, formula: FormulaReport::new("pheidas", genus, &ring) };
            sink.emit(|| ring.to_string(), &report)?;
        }
        PheidasAction::Roundtrip => {
            let field = Field::prime(p).map_err(CliError::domain)?;
            let report: RoundTripReport =
                round_trip(&sentence, bound, genus, &Interpretation::new(&field)).map_err(CliError::domain)?;
            sink.emit(
                || match (&report.witness, &report.lifted_check) {
                    (Some(w), Some(c)) => format!(
                        "nat true ({}), lifted witness {}, report {}",
                        witness_text(w),
                        if c.ok { "verifies" } else { "fails" },
                        if c.ok { "OK" } else { "FAILED" }
                    ),
                    _ => format!("nat {} (no witness up to {bound}), nothing to lift", report.nat_verdict),
                },
                &report,
            )?;
            if report.witness.is_some() && !report.ok() {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

pub fn eval(sink: &Sink, args: &EvalArgs) -> Outcome {
    let f = formula_arg(&args.formula)?;
    let json: InterpretationJson = serde_json::from_str(&read_arg(&args.interp)?)
        .map_err(|e| CliError::usage(format!("bad interpretation JSON: {e}")))?;
    let interp = Interpretation::from_json(&json).map_err(CliError::usage)?;
    let bounds = SearchBounds { max_num_deg: args.max_num_deg, max_den_deg: args.max_den_deg, hint_depth: args.hint_depth };
    let result = eval_pe(&f, &interp, bounds).map_err(CliError::domain)?;
    let transcript = Transcript::new(&f, &interp, &result, bounds);
    sink.emit(
        || {
            let method = serde_json::to_value(transcript.method).expect("method serializes");
            let mut s = format!("{} ({})\n", transcript.verdict, method.as_str().unwrap_or_default());
            for (k, v) in transcript.witness.iter().flatten() {
                s.push_str(&format!("  {k} = {v}\n"));
            }
            s
        },
        &transcript,
    )?;
    Ok(ExitCode::SUCCESS)
}
