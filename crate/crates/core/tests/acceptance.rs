//! Acceptance criteria, one line per criterion. Exits nonzero if any fails.

use std::time::{Duration, Instant};

use bsdkit::domains::DomainSpec;
use bsdkit::invariants::DEFAULT_TOL;
use bsdkit::polymaps::{catalog, CatalogId, CatalogParams, Monomial, PolyMap};
use bsdkit::verify::{
    check_coefficient_lemma_all, check_composition_rule, check_factorization, check_family_separation,
    check_ft_linear_spectrum, check_fu_lemma, check_isotropy_consistency, check_pfaffian, check_properness,
    composition_pairs, desk_maps, grid, run_suite, VerificationReport, SEPARATION_GAP,
};
use bsdkit::C64;

const SEED: u64 = 42;

struct Outcome {
    pass: bool,
    detail: String,
}

fn spec(text: &str) -> DomainSpec {
    text.parse().unwrap()
}

fn map(id: CatalogId, dims: &[usize]) -> PolyMap {
    catalog(id, &CatalogParams::with_dims(dims)).unwrap()
}

fn summarize(reports: &[VerificationReport]) -> Outcome {
    let failed: Vec<String> = reports
        .iter()
        .filter(|r| !r.pass)
        .map(|r| format!("{} {:?} residual {:.3e}", r.check_id, r.specs.iter().map(|s| s.to_string()).collect::<Vec<_>>(), r.max_residual))
        .collect();
    let worst = reports.iter().map(|r| r.max_residual).fold(0.0, f64::max);
    if failed.is_empty() {
        Outcome { pass: true, detail: format!("{} reports, worst residual {worst:.3e}", reports.len()) }
    } else {
        Outcome { pass: false, detail: format!("failing: {}", failed.join("; ")) }
    }
}

fn within(outcome: Outcome, elapsed: Duration, budget: Duration) -> Outcome {
    let fast = elapsed <= budget;
    Outcome {
        pass: outcome.pass && fast,
        detail: format!("{}; {:.2}s (budget {:.0}s)", outcome.detail, elapsed.as_secs_f64(), budget.as_secs_f64()),
    }
}

fn timed(f: impl FnOnce() -> Outcome, budget: Duration) -> Outcome {
    let start = Instant::now();
    let out = f();
    within(out, start.elapsed(), budget)
}

fn criterion_1() -> Outcome {
    timed(
        || {
            let reports: Vec<_> = ["I:2,2", "I:2,3", "III:2", "III:3"]
                .iter()
                .map(|s| check_fu_lemma(spec(s), 200, 1e-9, SEED).unwrap())
                .collect();
            summarize(&reports)
        },
        Duration::from_secs(5),
    )
}

fn criterion_2() -> Outcome {
    let mut reports: Vec<_> = ["II:3", "II:4", "II:5"]
        .iter()
        .map(|s| check_fu_lemma(spec(s), 200, 1e-9, SEED).unwrap())
        .collect();
    reports.push(check_pfaffian(100, 1e-10, SEED).unwrap());
    summarize(&reports)
}

fn criterion_3() -> Outcome {
    let reports: Vec<_> = ["IV:3", "IV:4"]
        .iter()
        .map(|s| check_fu_lemma(spec(s), 200, 1e-9, SEED).unwrap())
        .collect();
    let mut out = summarize(&reports);
    for r in &reports {
        out.detail.push_str(&format!(" | {}: {}", r.specs[0], r.notes.join(", ")));
    }
    out
}

fn criterion_4() -> Outcome {
    timed(
        || {
            let reports: Vec<_> = ["I:2,2", "I:2,3", "I:3,3", "II:4", "II:5", "III:2", "III:3"]
                .iter()
                .map(|s| check_coefficient_lemma_all(spec(s), 20, 1e-6, SEED).unwrap())
                .collect();
            summarize(&reports)
        },
        Duration::from_secs(10),
    )
}

fn criterion_5() -> Outcome {
    let reports: Vec<_> = composition_pairs()
        .unwrap()
        .iter()
        .map(|(_, f, g)| check_composition_rule(f, g, 100, 1e-8, SEED).unwrap())
        .collect();
    summarize(&reports)
}

fn criterion_6() -> Outcome {
    let reports: Vec<_> = desk_maps()
        .unwrap()
        .iter()
        .map(|(label, f)| {
            let mut r = check_properness(f, 500, 1e-7, SEED).unwrap();
            r.check_id = label.clone();
            r
        })
        .collect();
    summarize(&reports)
}

/// Coefficient errors of a fit against an explicit list of nonzero terms.
fn fit_error(f: &PolyMap, degree: u32, expected: &[(Vec<u32>, Vec<u32>, f64)]) -> (bool, f64) {
    let unknowns = Monomial::all_of_degree(2 * f.nvars() + 1, degree).len();
    let (report, fit) = check_factorization(f, degree, 3 * unknowns, 1e-8, SEED).unwrap();
    let mut worst = 0.0f64;
    for c in &fit.coefficients {
        let want = expected
            .iter()
            .find(|(z, w, _)| *z == c.z && *w == c.wbar)
            .map_or(0.0, |(_, _, v)| *v);
        worst = worst.max((c.value - C64::new(want, 0.0)).norm());
    }
    (report.pass, worst)
}

fn criterion_7() -> Outcome {
    let whitney = map(CatalogId::WhitneyBall, &[2]);
    let (fit_ok, whitney_err) = fit_error(
        &whitney,
        2,
        &[(vec![0, 0], vec![0, 0], 1.0), (vec![0, 1], vec![0, 1], 1.0)],
    );
    let standard = map(CatalogId::Standard, &[2, 2, 3, 3]);
    let (std_ok, std_err) = fit_error(&standard, 2, &[(vec![0; 4], vec![0; 4], 1.0)]);
    Outcome {
        pass: fit_ok && std_ok && whitney_err <= 1e-8 && std_err <= 1e-10,
        detail: format!("whitney-ball(2) coefficient error {whitney_err:.3e}; standard embedding {std_err:.3e}"),
    }
}

fn criterion_8() -> Outcome {
    let coarse = grid(0.0, 1.0, 0.1).unwrap();
    let reports = vec![
        check_family_separation(CatalogId::FamilyF, &coarse, &[], SEPARATION_GAP, DEFAULT_TOL).unwrap(),
        check_family_separation(CatalogId::FamilyBigG, &coarse, &[2, 2], SEPARATION_GAP, DEFAULT_TOL).unwrap(),
        check_family_separation(CatalogId::FamilyH, &coarse, &[], 0.0, DEFAULT_TOL).unwrap(),
        check_ft_linear_spectrum(&coarse, 1e-12).unwrap(),
    ];
    let mut out = summarize(&reports);
    for r in &reports[..3] {
        out.detail.push_str(&format!(" | {}: {}", r.check_id, r.notes[0]));
    }
    out
}

fn criterion_9() -> Outcome {
    let ft = catalog(CatalogId::FamilyF, &CatalogParams::with_t(0.3)).unwrap();
    let gw = map(CatalogId::GenWhitney, &[2, 2]);
    let reports = vec![
        check_isotropy_consistency(&ft, 100, 1e-10, SEED).unwrap(),
        check_isotropy_consistency(&gw, 100, 1e-10, SEED).unwrap(),
    ];
    summarize(&reports)
}

fn criterion_10() -> Outcome {
    let start = Instant::now();
    let first = serde_json::to_string(&run_suite(SEED)).unwrap();
    let elapsed = start.elapsed();
    let second = serde_json::to_string(&run_suite(SEED)).unwrap();
    let identical = first == second;
    within(
        Outcome { pass: identical, detail: format!("byte-identical: {identical} ({} bytes)", first.len()) },
        elapsed,
        Duration::from_secs(60),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("automorphy factor, types I and III", criterion_1),
        ("squared automorphy factor for type II, Pfaffian identity", criterion_2),
        ("type IV constant adjudication", criterion_3),
        ("coefficient lemma against minors", criterion_4),
        ("composition rule", criterion_5),
        ("properness of catalog maps", criterion_6),
        ("factorization fits", criterion_7),
        ("family separation and f_t linear spectrum", criterion_8),
        ("isotropy invariance of spectra", criterion_9),
        ("suite determinism and runtime", criterion_10),
    ];
    let mut failures = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let out = run();
        if !out.pass {
            failures += 1;
        }
        println!("criterion {:>2} [{}] {name}: {}", k + 1, if out.pass { "PASS" } else { "FAIL" }, out.detail);
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
