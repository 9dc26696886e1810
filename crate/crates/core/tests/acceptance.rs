//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ffdef_core::artin::{artin_schreier_solve, wp};
use ffdef_core::builders::build_pi;
use ffdef_core::corpus::{pheidas_corpus, random_ring_sentence};
use ffdef_core::eval::{eval_bounded, eval_pe, verify_witness, Interpretation, SearchBounds, Verdict};
use ffdef_core::factor::{count_irreducibles, irreducibles, MonicPolys};
use ffdef_core::lower::{single_polynomial, to_system};
use ffdef_core::orbit::{m_bound, CriterionConfig, Direction};
use ffdef_core::pheidas::{round_trip, to_dnf, translate, unnest, UnnestedAtom};
use ffdef_core::sweep::{enumerate_bounded, run_sweep, Sample, SweepSpec};
use ffdef_core::{direct_orbit, Field, Place, Poly, RatFunc};

type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// Independent count: brute-force irreducibility by trial division.
fn trial_division_irreducible(f: &Poly) -> bool {
    let field = f.field();
    let d = f.deg0();
    (1..=d / 2).all(|e| MonicPolys::new(field, e).all(|g| !g.divides(f)))
}

fn mobius(n: u32) -> i128 {
    let (mut n, mut sign, mut d) = (n, 1i128, 2);
    while d * d <= n {
        if n % d == 0 {
            n /= d;
            if n % d == 0 {
                return 0;
            }
            sign = -sign;
        }
        d += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

fn necklace(d: u32, q: u64) -> i128 {
    (1..=d).filter(|&e| d.is_multiple_of(e)).map(|e| mobius(e) * (q as i128).pow(d / e)).sum::<i128>() / d as i128
}

fn c1_irreducible_counts() -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    for (d, p, expected) in [(7u32, 2u64, 18u128), (11, 2, 186), (5, 3, 48)] {
        let field = Field::new(p, 1).unwrap();
        let listed = irreducibles(&field, d as usize).count() as u128;
        let exhaustive = MonicPolys::new(&field, d as usize).filter(trial_division_irreducible).count() as u128;
        let formula = count_irreducibles(d, p);
        let ok = listed == expected && exhaustive == expected && formula == expected && necklace(d, p) == expected as i128;
        pass &= ok;
        details.push(format!("deg {d} over F_{p}: {listed}"));
    }
    outcome(pass, details.join(", "))
}

fn c2_m_bounds() -> Outcome {
    let linear: Vec<u128> = (0..=2).map(|g| m_bound(g, 1, 2)).collect();
    let pass = linear == [12, 16, 20] && m_bound(0, 7, 2) == 18 && m_bound(0, 5, 3) == 22;
    outcome(pass, format!("M(g,1,p) = {linear:?}, M(0,7,2) = {}, M(0,5,3) = {}", m_bound(0, 7, 2), m_bound(0, 5, 3)))
}

fn sweep(p: u32, degree: usize, sample: Option<Sample>) -> (usize, usize) {
    let config = CriterionConfig::choose(0, p, 1).unwrap();
    let out = run_sweep(&SweepSpec { config, max_degree: degree, sample }, Some(1), None).unwrap();
    (out.rows.len(), out.disagreements)
}

fn c3_char2_sweep() -> Outcome {
    let cfg = CriterionConfig::choose(0, 2, 1).unwrap();
    let shape_ok = cfg.d == 7 && cfg.m == 18 && cfg.polys.len() == 18;
    let (rows, bad) = sweep(2, 2, None);
    outcome(shape_ok && bad == 0 && rows > 0, format!("cfg d={} M={}; {rows} pairs, {bad} disagreements", cfg.d, cfg.m))
}

fn c4_char3_sweep() -> Outcome {
    let cfg = CriterionConfig::choose(0, 3, 1).unwrap();
    let shape_ok = cfg.d == 5 && cfg.m == 22;
    let full1 = sweep(3, 1, None);
    let sampled = sweep(3, 2, Some(Sample { pairs: 10_000, seed: 1 }));
    let full2 = sweep(3, 2, None);
    let pass = shape_ok && full1.1 == 0 && sampled.1 == 0 && full2.1 == 0 && sampled.0 >= 10_000;
    outcome(
        pass,
        format!(
            "cfg d={} M={}; deg<=1 {} pairs, deg-2 sample {} pairs, full deg<=2 {} pairs; disagreements {}",
            cfg.d,
            cfg.m,
            full1.0,
            sampled.0,
            full2.0,
            full1.1 + sampled.1 + full2.1
        ),
    )
}

fn random_ratfunc(rng: &mut ChaCha8Rng, field: &Field, max_deg: usize) -> RatFunc {
    loop {
        let coeffs = |rng: &mut ChaCha8Rng| {
            let n = rng.gen_range(0..=max_deg);
            (0..=n).map(|_| rng.gen_range(0..field.q())).collect::<Vec<u32>>()
        };
        let num = Poly::new(field, coeffs(rng));
        let den = Poly::new(field, coeffs(rng));
        if !den.is_zero() {
            return RatFunc::new(num, den).unwrap();
        }
    }
}

fn solvable_with_check(x: &RatFunc) -> Option<bool> {
    let out = artin_schreier_solve(x).ok()?;
    match out.witness() {
        Some(h) => (&wp(h) == x).then_some(true),
        None => Some(false),
    }
}

fn c5_as_laws() -> Outcome {
    const CASES: usize = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let fields = [Field::new(2, 1).unwrap(), Field::new(2, 2).unwrap()];
    let mut failures = [0usize; 4];
    let mut witness_failures = 0usize;
    let mut counted = [0usize; 4];
    for i in 0..CASES {
        let field = &fields[i % 2];
        // (a)
        let h = random_ratfunc(&mut rng, field, 3);
        match solvable_with_check(&wp(&h)) {
            Some(true) => {}
            Some(false) => failures[0] += 1,
            None => witness_failures += 1,
        }
        counted[0] += 1;
        // (b): a mix of Artin-Schreier images and arbitrary elements.
        let pick = |rng: &mut ChaCha8Rng| {
            let r = random_ratfunc(rng, field, 2);
            if rng.gen_bool(0.5) { wp(&r) } else { r }
        };
        loop {
            let (x, y) = (pick(&mut rng), pick(&mut rng));
            if solvable_with_check(&x) == Some(true) && solvable_with_check(&y) == Some(true) {
                if solvable_with_check(&x.add(&y)) != Some(true) {
                    failures[1] += 1;
                }
                counted[1] += 1;
                break;
            }
        }
        // (c)
        let x = pick(&mut rng);
        let (a, b) = (solvable_with_check(&x), solvable_with_check(&x.square()));
        if a.is_none() || b.is_none() {
            witness_failures += 1;
        } else if a != b {
            failures[2] += 1;
        }
        counted[2] += 1;
        // (d)
        let x = loop {
            let x = pick(&mut rng);
            if solvable_with_check(&x) == Some(true) {
                break x;
            }
        };
        let mut places: Vec<Place> = x.divisor().into_iter().map(|(pl, _)| pl).collect();
        places.push(Place::t_adic(field));
        if places.iter().any(|pl| x.valuation(pl).finite().is_some_and(|v| v < 0 && v % 2 != 0)) {
            failures[3] += 1;
        }
        counted[3] += 1;
    }
    let pass = failures.iter().all(|&f| f == 0) && witness_failures == 0 && counted.iter().all(|&c| c >= CASES);
    outcome(pass, format!("{counted:?} cases for (a)-(d), failures {failures:?}, bad witnesses {witness_failures}"))
}

fn c6_as_oracle() -> Outcome {
    let f2 = Field::new(2, 1).unwrap();
    let inputs = enumerate_bounded(&f2, 2, 2);
    let pool = enumerate_bounded(&f2, 4, 4);
    let images: BTreeSet<RatFunc> = pool.iter().map(wp).collect();
    let mut bad = 0;
    for c in &inputs {
        let solver = solvable_with_check(c);
        let oracle = images.contains(c);
        if solver != Some(oracle) {
            bad += 1;
        }
    }
    let solvable = inputs.iter().filter(|c| images.contains(*c)).count();
    outcome(bad == 0, format!("{} inputs ({solvable} solvable) vs {} candidate witnesses; {bad} disagreements", inputs.len(), pool.len()))
}

fn c7_pi_completeness() -> Outcome {
    let f2 = Field::new(2, 1).unwrap();
    let pi = build_pi(0).unwrap();
    let universe = enumerate_bounded(&f2, 2, 2);
    let bounds = SearchBounds::default();
    let (mut positives, mut negatives, mut unknown, mut refuted, mut violations) = (0, 0, 0, 0, 0);
    for f in &universe {
        for g in &universe {
            if f.is_constant() && g.is_constant() {
                continue;
            }
            let answer = direct_orbit(f, g);
            let (x, y) = match answer.direction {
                Some(Direction::GIsPowerOfF) => (g, f),
                _ => (f, g),
            };
            let interp = Interpretation::new(&f2)
                .assign("x", x.clone())
                .assign("y", y.clone())
                .assign("z", RatFunc::t(&f2));
            let res = eval_pe(&pi, &interp, bounds).unwrap();
            if answer.in_orbit {
                positives += 1;
                let verified = match &res.verdict {
                    Verdict::True(w) => verify_witness(&pi, &interp, w).unwrap(),
                    _ => false,
                };
                if !verified {
                    violations += 1;
                }
            } else {
                negatives += 1;
                match res.verdict {
                    Verdict::True(_) => violations += 1,
                    Verdict::Unknown => unknown += 1,
                    Verdict::False => refuted += 1,
                }
            }
        }
    }
    outcome(
        violations == 0 && positives > 0,
        format!(
            "{positives} in-orbit pairs all True; {negatives} out-of-orbit pairs never True \
             ({unknown} Unknown, {refuted} exactly False); {violations} violations"
        ),
    )
}

fn c8_pheidas_round_trip() -> Outcome {
    let corpus = pheidas_corpus();
    let (mut ok, mut counts_ok) = (0, true);
    for s in &corpus {
        let field = Field::new(s.p, 1).unwrap();
        let interp = Interpretation::new(&field);
        if round_trip(s, 32, 0, &interp).unwrap().ok() {
            ok += 1;
        }
        for disjunct in to_dnf(&s.formula) {
            let u = unnest(&disjunct);
            let tr = translate(&u, s.p, 0, 1).unwrap();
            let l = u.vars.len();
            let expected_atoms: usize = u
                .atoms
                .iter()
                .map(|a| match a {
                    UnnestedAtom::Zero { .. } => 1,
                    UnnestedAtom::Div { .. } => 3,
                    _ => 2,
                })
                .sum::<usize>()
                + 1
                + 2 * l;
            counts_ok &= tr.scaffold_var_count() == 2 * l + 1 + 2 * u.div_count();
            counts_ok &= tr.atoms.len() == expected_atoms && tr.outer_vars.len() == 2 * l + 1;
        }
    }
    outcome(
        ok == corpus.len() && corpus.len() >= 20 && counts_ok,
        format!("{ok}/{} sentences lift and check; scaffold counts {}", corpus.len(), if counts_ok { "match" } else { "differ" }),
    )
}

fn c9_lowering() -> Outcome {
    let f2 = Field::new(2, 1).unwrap();
    let domain = enumerate_bounded(&f2, 1, 1);
    let interp = Interpretation::new(&f2);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut disagreements, mut satisfiable) = (0, 0);
    for _ in 0..50 {
        let f = random_ring_sentence(&mut rng);
        let direct = eval_bounded(&f, &interp, &domain).unwrap().is_some();
        let system = to_system(&f).unwrap().satisfiable_in(&interp, &domain).unwrap().is_some();
        let single = single_polynomial(&f, 2).unwrap().satisfiable_in(&interp, &domain).unwrap().is_some();
        if direct != system || system != single {
            disagreements += 1;
        }
        satisfiable += usize::from(direct);
    }
    outcome(disagreements == 0, format!("50 sentences ({satisfiable} satisfiable within bounds); {disagreements} disagreements"))
}

fn main() -> ExitCode {
    let secs = |s: u64| Some(Duration::from_secs(s));
    let criteria: [Criterion; 9] = [
        ("irreducible counts", c1_irreducible_counts, secs(5)),
        ("M-bound spot checks", c2_m_bounds, secs(1)),
        ("char-2 equivalence sweep", c3_char2_sweep, secs(15 * 60)),
        ("char-3 equivalence sweep", c4_char3_sweep, secs(30 * 60)),
        ("Artin-Schreier laws", c5_as_laws, secs(60)),
        ("Artin-Schreier solver vs oracle", c6_as_oracle, secs(10 * 60)),
        ("pi-formula positive completeness", c7_pi_completeness, None),
        ("Pheidas round trip", c8_pheidas_round_trip, secs(60)),
        ("lowering equivalence", c9_lowering, None),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let Outcome { pass, detail } = run();
        let elapsed = start.elapsed();
        let pass = pass && limit.is_none_or(|l| elapsed <= l);
        failed += usize::from(!pass);
        let limit = limit.map_or(String::new(), |l| format!(", limit {}s", l.as_secs()));
        println!(
            "criterion {}: {} - {name}: {detail} [{:.2}s{limit}]",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
