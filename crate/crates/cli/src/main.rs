use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use bsdkit::autgroups::{act, AutElement};
use bsdkit::domains::{classify_point, point_from_entries, sample_point, sample_point_with, DomainSpec, Point, Region, BOUNDARY_TOL};
use bsdkit::invariants::{distinguish, invariant_spectrum, DEFAULT_TOL};
use bsdkit::polymaps::{parse_selector, CatalogId, CatalogParams, Monomial, PolyMap};
use bsdkit::verify::{self, SuiteReport, VerificationReport};
use bsdkit::{Error, C64};

mod output;

use output::{Format, Table};

#[derive(Debug, Parser)]
#[command(name = "bsdkit", version, about = "Classical domains, proper polynomial maps, and their numerical checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Options,
}

#[derive(Debug, clap::Args)]
struct Options {
    /// Domain, e.g. `I:2,3`, `II:4`, `III:2`, `IV:3`.
    #[arg(long, global = true)]
    domain: Option<DomainSpec>,
    /// Map selector `name[:param]` or a map JSON file.
    #[arg(long, global = true)]
    map_a: Option<String>,
    #[arg(long, global = true)]
    map_b: Option<String>,
    #[arg(long, global = true)]
    family: Option<CatalogId>,
    /// Parameter grid `lo:hi:step`.
    #[arg(long, global = true)]
    grid: Option<String>,
    #[arg(long, global = true)]
    t: Option<f64>,
    #[arg(long, global = true)]
    theta: Option<f64>,
    /// Comma-separated dimensions, e.g. `2,3`.
    #[arg(long, global = true, value_delimiter = ',')]
    dims: Vec<usize>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true, env = "BSDKIT_SEED", default_value_t = 42)]
    seed: u64,
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, global = true)]
    no_timestamp: bool,
    /// Automorphism JSON file applied by `eval`.
    #[arg(long, global = true)]
    aut_file: Option<PathBuf>,
    /// Point as JSON `[[re, im], ...]` row-major; for `verify coeff`, an
    /// entry `i,j` (1-based).
    #[arg(long, global = true)]
    point: Option<String>,
    /// Degree bound for `verify factorization`.
    #[arg(long, global = true)]
    degree: Option<u32>,
    #[arg(long, global = true, default_value = "interior")]
    region: Region,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run verification checks.
    Verify { check: Check },
    /// Per-degree singular spectra of a map.
    Invariants,
    /// Compare the spectra of `--map-a` and `--map-b`.
    Distinguish,
    /// Pairwise spectral distances over a family grid.
    Sweep,
    /// Draw points of a domain.
    Sample,
    /// Evaluate a map or an automorphism at a point.
    Eval,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Check {
    All,
    Fu,
    Composition,
    Coeff,
    Properness,
    Factorization,
}

/// What a command produced: the artifact, and whether its checks passed.
struct Outcome {
    body: Value,
    table: Table,
    pass: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => match output::emit(&cli.opts, out.body, &out.table) {
            Ok(()) => ExitCode::from(if out.pass { 0 } else { 1 }),
            Err(e) => {
                eprintln!("bsdkit: {e}");
                ExitCode::from(2)
            }
        },
        Err(e) => {
            eprintln!("bsdkit: {e}");
            ExitCode::from(2)
        }
    }
}

fn params(opts: &Options) -> CatalogParams {
    CatalogParams { t: opts.t, theta: opts.theta, dims: opts.dims.clone() }
}

fn load_map(selector: &str, opts: &Options) -> Result<PolyMap, Error> {
    if selector.ends_with(".json") {
        let text = std::fs::read_to_string(selector).map_err(|e| Error::Configuration(format!("{selector}: {e}")))?;
        return serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{selector}: {e}")));
    }
    parse_selector(selector, &params(opts))
}

fn required<'a>(value: &'a Option<String>, flag: &str) -> Result<&'a str, Error> {
    value.as_deref().ok_or_else(|| Error::Configuration(format!("missing {flag}")))
}

fn run(cli: &Cli) -> Result<Outcome, Error> {
    let opts = &cli.opts;
    match &cli.command {
        Command::Verify { check } => run_verify(*check, opts),
        Command::Invariants => {
            let f = load_map(required(&opts.map_a, "--map-a")?, opts)?;
            let spectrum = invariant_spectrum(&f)?;
            let mut table = Table::new(&["degree", "index", "value"]);
            for (d, values) in &spectrum.degrees {
                for (k, v) in values.iter().enumerate() {
                    table.push(vec![d.to_string(), k.to_string(), output::num(*v)]);
                }
            }
            Ok(Outcome { body: serde_json::to_value(&spectrum).unwrap(), table, pass: true })
        }
        Command::Distinguish => {
            let f = load_map(required(&opts.map_a, "--map-a")?, opts)?;
            let g = load_map(required(&opts.map_b, "--map-b")?, opts)?;
            let d = distinguish(&f, &g, opts.tol.unwrap_or(DEFAULT_TOL))?;
            let mut table = Table::new(&["degree", "distance", "length_mismatch"]);
            for x in &d.distances {
                table.push(vec![x.degree.to_string(), output::num(x.distance), x.length_mismatch.to_string()]);
            }
            Ok(Outcome { body: serde_json::to_value(&d).unwrap(), table, pass: true })
        }
        Command::Sweep => {
            let family = opts.family.ok_or_else(|| Error::Configuration("missing --family".into()))?;
            let grid = parse_grid(opts.grid.as_deref().unwrap_or("0:1:0.1"))?;
            let matrix = verify::sweep(family, &grid, &opts.dims)?;
            let mut header = vec!["t".to_string()];
            header.extend(grid.iter().map(|t| output::num(*t)));
            let mut table = Table::with_header(header);
            for (t, row) in grid.iter().zip(&matrix) {
                let mut line = vec![output::num(*t)];
                line.extend(row.iter().map(|v| output::num(*v)));
                table.push(line);
            }
            let body = json!({ "family": family.name(), "grid": grid, "distances": matrix });
            Ok(Outcome { body, table, pass: true })
        }
        Command::Sample => {
            let spec = opts.domain.ok_or_else(|| Error::Configuration("missing --domain".into()))?;
            let n = opts.samples.unwrap_or(1);
            let mut table = Table::new(&["sample", "row", "col", "re", "im"]);
            let mut points = Vec::new();
            for k in 0..n {
                let mut rng = bsdkit::rng::stream(opts.seed, "cli-sample", k as u64);
                let z = sample_point_with(spec, opts.region, &mut rng)?;
                push_point(&mut table, Some(k), &z);
                let class = classify_point(&z, BOUNDARY_TOL)?;
                points.push(json!({ "value": entries_json(&z), "region": class.region, "margin": class.margin }));
            }
            Ok(Outcome { body: json!({ "spec": spec, "points": points }), table, pass: true })
        }
        Command::Eval => run_eval(opts),
    }
}

fn entries_json(z: &Point) -> Vec<[f64; 2]> {
    z.value().to_row_major().iter().map(|c| [c.re, c.im]).collect()
}

fn push_point(table: &mut Table, sample: Option<usize>, z: &Point) {
    let (rows, cols) = z.value().shape();
    for i in 0..rows {
        for j in 0..cols {
            let c = z.value()[(i, j)];
            let mut line = Vec::new();
            if let Some(k) = sample {
                line.push(k.to_string());
            }
            line.extend([(i + 1).to_string(), (j + 1).to_string(), output::num(c.re), output::num(c.im)]);
            table.push(line);
        }
    }
}

fn parse_point(spec: DomainSpec, text: &str) -> Result<Point, Error> {
    let pairs: Vec<[f64; 2]> = serde_json::from_str(text).map_err(|e| Error::Parse(format!("--point: {e}")))?;
    point_from_entries(spec, pairs.iter().map(|[re, im]| C64::new(*re, *im)).collect())
}

fn run_eval(opts: &Options) -> Result<Outcome, Error> {
    let (spec, apply): (DomainSpec, Box<dyn Fn(&Point) -> Result<Point, Error>>) = if let Some(path) = &opts.aut_file {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Configuration(format!("{}: {e}", path.display())))?;
        let e: AutElement = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        (e.spec(), Box::new(move |z| act(&e, z)))
    } else {
        let f = load_map(required(&opts.map_a, "--map-a or --aut-file")?, opts)?;
        (f.source(), Box::new(move |z| f.eval(z)))
    };
    let z = match &opts.point {
        Some(text) => parse_point(spec, text)?,
        None => sample_point(spec, opts.region, opts.seed)?,
    };
    let image = apply(&z)?;
    let mut table = Table::new(&["row", "col", "re", "im"]);
    push_point(&mut table, None, &image);
    let class = classify_point(&image, BOUNDARY_TOL)?;
    let body = json!({
        "point": { "spec": spec, "value": entries_json(&z) },
        "image": { "spec": image.spec(), "value": entries_json(&image) },
        "region": class.region,
        "margin": class.margin,
    });
    Ok(Outcome { body, table, pass: true })
}

fn parse_grid(text: &str) -> Result<Vec<f64>, Error> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || Error::Parameter(format!("grid `{text}` is not lo:hi:step"));
    let [lo, hi, step] = parts.as_slice() else { return Err(bad()) };
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    verify::grid(num(lo)?, num(hi)?, num(step)?)
}

fn parse_entry(text: &str) -> Result<(usize, usize), Error> {
    let bad = || Error::Parameter(format!("entry `{text}` is not i,j (1-based)"));
    let (i, j) = text.split_once(',').ok_or_else(bad)?;
    let i: usize = i.trim().parse().map_err(|_| bad())?;
    let j: usize = j.trim().parse().map_err(|_| bad())?;
    Ok((i.checked_sub(1).ok_or_else(bad)?, j.checked_sub(1).ok_or_else(bad)?))
}

fn report_table(reports: &[VerificationReport]) -> Table {
    let mut table = Table::new(&["check_id", "specs", "samples", "seed", "max_residual", "tolerance", "pass"]);
    for r in reports {
        table.push(vec![
            r.check_id.clone(),
            r.specs.iter().map(ToString::to_string).collect::<Vec<_>>().join(" "),
            r.samples.to_string(),
            r.seed.to_string(),
            output::num(r.max_residual),
            output::num(r.tolerance),
            r.pass.to_string(),
        ]);
    }
    table
}

fn suite_outcome(reports: Vec<VerificationReport>) -> Outcome {
    let table = report_table(&reports);
    let suite = SuiteReport::from_reports(reports);
    let pass = suite.summary.failed == 0;
    Outcome { body: serde_json::to_value(&suite).unwrap(), table, pass }
}

fn single_outcome(report: VerificationReport) -> Outcome {
    let table = report_table(std::slice::from_ref(&report));
    let pass = report.pass;
    Outcome { body: serde_json::to_value(&report).unwrap(), table, pass }
}

fn run_verify(check: Check, opts: &Options) -> Result<Outcome, Error> {
    let seed = opts.seed;
    match check {
        Check::All => {
            let suite = verify::run_suite(seed);
            let table = report_table(&suite.reports);
            let pass = suite.summary.failed == 0;
            Ok(Outcome { body: serde_json::to_value(&suite).unwrap(), table, pass })
        }
        Check::Fu => {
            let spec = opts.domain.unwrap_or(DomainSpec::TypeI { r: 2, s: 2 });
            let r = verify::check_fu_lemma(spec, opts.samples.unwrap_or(200), opts.tol.unwrap_or(1e-9), seed)?;
            Ok(single_outcome(r))
        }
        Check::Composition => {
            let tol = opts.tol.unwrap_or(1e-8);
            let n = opts.samples.unwrap_or(100);
            match (&opts.map_a, &opts.map_b) {
                (Some(a), Some(b)) => {
                    let (f, g) = (load_map(a, opts)?, load_map(b, opts)?);
                    Ok(single_outcome(verify::check_composition_rule(&f, &g, n, tol, seed)?))
                }
                (None, None) => {
                    let reports = verify::composition_pairs()?
                        .iter()
                        .map(|(label, f, g)| {
                            let mut r = verify::check_composition_rule(f, g, n, tol, seed)?;
                            r.check_id = format!("composition:{label}");
                            Ok(r)
                        })
                        .collect::<Result<Vec<_>, Error>>()?;
                    Ok(suite_outcome(reports))
                }
                _ => Err(Error::Configuration("composition needs both --map-a (outer) and --map-b (inner)".into())),
            }
        }
        Check::Coeff => {
            let spec = opts.domain.unwrap_or(DomainSpec::TypeI { r: 2, s: 2 });
            let n = opts.samples.unwrap_or(20);
            let tol = opts.tol.unwrap_or(1e-6);
            let r = match &opts.point {
                Some(text) => {
                    let (i, j) = parse_entry(text)?;
                    verify::check_coefficient_lemma(spec, i, j, n, tol, seed)?
                }
                None => verify::check_coefficient_lemma_all(spec, n, tol, seed)?,
            };
            Ok(single_outcome(r))
        }
        Check::Properness => {
            let tol = opts.tol.unwrap_or(1e-7);
            let n = opts.samples.unwrap_or(500);
            match &opts.map_a {
                Some(a) => Ok(single_outcome(verify::check_properness(&load_map(a, opts)?, n, tol, seed)?)),
                None => {
                    let reports = verify::desk_maps()?
                        .iter()
                        .map(|(label, f)| {
                            let mut r = verify::check_properness(f, n, tol, seed)?;
                            r.check_id = format!("properness:{label}");
                            Ok(r)
                        })
                        .collect::<Result<Vec<_>, Error>>()?;
                    Ok(suite_outcome(reports))
                }
            }
        }
        Check::Factorization => {
            let f = load_map(opts.map_a.as_deref().unwrap_or("whitney-ball"), opts)?;
            let top = f.degrees().last().copied().unwrap_or(1);
            let degree = opts.degree.unwrap_or(2 * top);
            let unknowns = Monomial::all_of_degree(2 * f.nvars() + 1, degree).len();
            let grid = opts.samples.unwrap_or(3 * unknowns);
            let (report, fit) = verify::check_factorization(&f, degree, grid, opts.tol.unwrap_or(1e-7), seed)?;
            let pass = report.pass;
            let table = report_table(std::slice::from_ref(&report));
            let mut body = serde_json::to_value(&report).unwrap();
            body["fit"] = serde_json::to_value(fit.terms(verify::FIT_REPORT_THRESHOLD)).unwrap();
            Ok(Outcome { body, table, pass })
        }
    }
}
