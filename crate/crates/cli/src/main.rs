//! Command-line front end: inversion of the orthant map, annulus spectra,
//! state evaluation, Gram positivity, boundary-measure reconstruction, and a
//! deterministic verification suite with JSON reports.
//!
//! Exit codes: 0 on success, 1 when a verification check fails, 2 for
//! configuration or usage errors, 3 when a numerical search does not
//! converge.

mod checks;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use freestate_core::boundary::{integrate_p, measure_from};
use freestate_core::eigenstate::{
    b_minus_x1, gram_direct, gram_recursive, outer_boundary_state, phi_eval, psd_report,
    reduced_spectrum, universal_spectrum, State,
};
use freestate_core::smap::{invert_s, TargetPoint};
use freestate_core::words::{alphabet, enumerate_words, Letter, ReducedWord};
use freestate_core::Error as CoreError;

use checks::Job;
use config::{load_file, resolve, FileConfig, JobConfig, Overrides};
use report::VerificationReport;

/// A terminating failure with its process exit code.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn usage(message: String) -> Self {
        Failure { code: 2, message }
    }

    pub fn config(message: String) -> Self {
        Failure { code: 2, message }
    }

    pub fn code(&self) -> u8 {
        self.code
    }

    pub fn message(&self) -> &str {
        &self.message
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        let code = match e {
            CoreError::NoConvergence { .. } => 3,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

const USAGE: &str = "\
usage: freestate <command> [options] [arguments]

commands:
  invert-s <s1> <s2> [...]   invert the orthant map at the given target
  spectrum [--universal] <c1> <c2> [...]
                             annulus radii for sum c_i u_i (default: reduced)
  state [--outer] [word ...] evaluate phi on words (default: all |s| <= 2)
  gram [--k K]               Gram matrices: recursion error, min eigenvalue
  boundary [word ...]        measure tables and exact integrals of P(s, .)
  verify                     run the full identity suite, report pass/fail

options:
  --config <file>    TOML configuration file
  --n <int>          rank (number of generators)
  --c <float>        one coefficient; repeat the flag for each entry
  --lambda <float>   eigenvalue
  --max-len <int>    word-length bound for sweeps (default 5, cap 8)
  --seed <int>       seed for randomized checks and sampling
  --out <file>       write the verification report (JSON) here
  --tol.<name> <v>   override the tolerance of one named check
  -h, --help         print this message

The word format is whitespace-separated signed generator indices:
\"1 -2 1\" means u1 u2^-1 u1, and the empty string is the identity.
Numbers print with 15 significant digits.";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match run(&args) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

/// Parsed command-line flags and positional arguments.
#[derive(Debug, Default)]
struct Flags {
    config: Option<PathBuf>,
    over: Overrides,
    out: Option<PathBuf>,
    outer: bool,
    universal: bool,
    k: Option<usize>,
    positionals: Vec<String>,
}

fn parse_flags(args: &[String]) -> Result<Flags, Failure> {
    let mut flags = Flags::default();
    let mut iter = args.iter().peekable();
    let value_of = |name: &str,
                        inline: Option<&str>,
                        iter: &mut std::iter::Peekable<std::slice::Iter<String>>|
     -> Result<String, Failure> {
        if let Some(v) = inline {
            return Ok(v.to_string());
        }
        iter.next()
            .map(|s| s.to_string())
            .ok_or_else(|| Failure::usage(format!("flag {name} expects a value")))
    };
    while let Some(arg) = iter.next() {
        let (name, inline) = match arg.split_once('=') {
            Some((n, v)) => (n, Some(v)),
            None => (arg.as_str(), None),
        };
        match name {
            "-h" | "--help" => {
                flags.positionals.push("--help".into());
            }
            "--config" => {
                flags.config = Some(PathBuf::from(value_of(name, inline, &mut iter)?));
            }
            "--n" => {
                flags.over.n = Some(parse_number(name, &value_of(name, inline, &mut iter)?)?);
            }
            "--c" => {
                flags.over.c.push(parse_float(name, &value_of(name, inline, &mut iter)?)?);
            }
            "--lambda" => {
                flags.over.lambda =
                    Some(parse_float(name, &value_of(name, inline, &mut iter)?)?);
            }
            "--max-len" => {
                flags.over.max_len =
                    Some(parse_number(name, &value_of(name, inline, &mut iter)?)?);
            }
            "--seed" => {
                flags.over.seed =
                    Some(parse_number(name, &value_of(name, inline, &mut iter)?)? as u64);
            }
            "--out" => {
                flags.out = Some(PathBuf::from(value_of(name, inline, &mut iter)?));
            }
            "--outer" => {
                flags.outer = true;
            }
            "--universal" => {
                flags.universal = true;
            }
            "--reduced" => {
                flags.universal = false;
            }
            "--k" => {
                flags.k = Some(parse_number(name, &value_of(name, inline, &mut iter)?)?);
            }
            _ if name.starts_with("--tol.") => {
                let tol_name = name.trim_start_matches("--tol.").to_string();
                if tol_name.is_empty() {
                    return Err(Failure::usage("--tol.<name> needs a check name".into()));
                }
                let value = parse_float(name, &value_of(name, inline, &mut iter)?)?;
                flags.over.tols.push((tol_name, value));
            }
            _ if name.starts_with("--") => {
                return Err(Failure::usage(format!("unknown flag {name}")));
            }
            _ => {
                flags.positionals.push(arg.clone());
            }
        }
    }
    Ok(flags)
}

fn parse_number(flag: &str, text: &str) -> Result<usize, Failure> {
    text.parse()
        .map_err(|_| Failure::usage(format!("flag {flag}: `{text}` is not a nonnegative integer")))
}

fn parse_float(flag: &str, text: &str) -> Result<f64, Failure> {
    let v: f64 = text
        .parse()
        .map_err(|_| Failure::usage(format!("flag {flag}: `{text}` is not a number")))?;
    if !v.is_finite() {
        return Err(Failure::usage(format!("flag {flag}: value must be finite")));
    }
    Ok(v)
}

fn load_config(flags: &Flags) -> Result<JobConfig, Failure> {
    let file = match &flags.config {
        Some(path) => load_file(path)?,
        None => FileConfig::default(),
    };
    resolve(file, &flags.over)
}

/// 15 significant digits.
fn num(x: f64) -> String {
    format!("{x:.14e}")
}

fn vector(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| num(*v)).collect();
    format!("({})", parts.join(", "))
}

fn letter_name(l: Letter) -> String {
    if l.is_positive() {
        format!("u{}", l.index)
    } else {
        format!("u{}^-1", l.index)
    }
}

fn word_display(w: &ReducedWord) -> String {
    if w.is_identity() {
        "e".into()
    } else {
        format!("\"{}\"", w.tokens())
    }
}

fn run(args: &[String]) -> Result<u8, Failure> {
    let Some(command) = args.first() else {
        eprintln!("{USAGE}");
        return Err(Failure::usage("missing command".into()));
    };
    if command == "-h" || command == "--help" {
        println!("{USAGE}");
        return Ok(0);
    }
    let flags = parse_flags(&args[1..])?;
    if flags.positionals.iter().any(|p| p == "--help") {
        println!("{USAGE}");
        return Ok(0);
    }
    match command.as_str() {
        "invert-s" => cmd_invert_s(&flags),
        "spectrum" => cmd_spectrum(&flags),
        "state" => cmd_state(&flags),
        "gram" => cmd_gram(&flags),
        "boundary" => cmd_boundary(&flags),
        "verify" => cmd_verify(&flags),
        other => {
            eprintln!("{USAGE}");
            Err(Failure::usage(format!("unknown command `{other}`")))
        }
    }
}

fn cmd_invert_s(flags: &Flags) -> Result<u8, Failure> {
    if flags.positionals.len() < 2 {
        return Err(Failure::usage(
            "invert-s needs at least two target coordinates".into(),
        ));
    }
    let s: Vec<f64> = flags
        .positionals
        .iter()
        .map(|p| parse_float("invert-s", p))
        .collect::<Result<_, _>>()?;
    let target = TargetPoint::new(s)?;
    let tol = flags
        .over
        .tols
        .iter()
        .find(|(name, _)| name == "map_residual")
        .map(|(_, v)| *v)
        .unwrap_or(1e-10);
    let p = invert_s(&target, tol)?;
    let back = freestate_core::smap::apply_s(&p);
    let residual = back
        .values()
        .iter()
        .zip(target.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    println!("s = {}", vector(target.values()));
    println!("x = {}", vector(p.x()));
    println!("t = {}", num(p.t()));
    println!("residual = {residual:.2e}");
    Ok(0)
}

fn cmd_spectrum(flags: &Flags) -> Result<u8, Failure> {
    if flags.positionals.is_empty() {
        return Err(Failure::usage("spectrum needs coefficients".into()));
    }
    let c: Vec<f64> = flags
        .positionals
        .iter()
        .map(|p| parse_float("spectrum", p))
        .collect::<Result<_, _>>()?;
    let (kind, annulus) = if flags.universal {
        ("universal", universal_spectrum(&c)?)
    } else {
        ("reduced", reduced_spectrum(&c)?)
    };
    println!("{kind} spectrum of sum c_i u_i, c = {}", vector(&c));
    println!("inner radius = {}", num(annulus.inner_radius));
    println!("outer radius = {}", num(annulus.outer_radius));
    Ok(0)
}

fn parse_words(positionals: &[String], rank: usize, default_len: usize) -> Result<Vec<ReducedWord>, Failure> {
    if positionals.is_empty() {
        return Ok(enumerate_words(rank, default_len)?);
    }
    positionals
        .iter()
        .map(|text| ReducedWord::parse(text, rank).map_err(Failure::from))
        .collect()
}

fn cmd_state(flags: &Flags) -> Result<u8, Failure> {
    let config = if flags.outer {
        // the boundary state fixes lambda = ||c|| itself; a configured
        // eigenvalue is not needed and not used
        let file = match &flags.config {
            Some(path) => load_file(path)?,
            None => FileConfig::default(),
        };
        let mut over = flags.over.clone();
        over.lambda = Some(over.lambda.unwrap_or(1.0));
        resolve(file, &over)?
    } else {
        load_config(flags)?
    };
    let words = parse_words(&flags.positionals, config.n, 2)?;
    if flags.outer {
        let outer = outer_boundary_state(config.c.clone())?;
        println!(
            "boundary state: n = {}, c = {}, lambda = ||c|| = {}",
            config.n,
            vector(&config.c),
            num(outer.lambda()),
        );
        for w in &words {
            println!("phi({}) = {}", word_display(w), num(phi_eval(&outer, w)?));
        }
        return Ok(0);
    }
    let job = Job::new(config)?;
    let state = &job.canonical;
    println!(
        "eigenstate: n = {}, c = {}, lambda = {}",
        job.config.n,
        vector(state.coefficients()),
        num(state.lambda()),
    );
    println!("x = {}", vector(state.x().x()));
    println!("t = {}", num(state.x().t()));
    println!("a = {}", vector(state.a()));
    for w in &words {
        println!("phi({}) = {}", word_display(w), num(phi_eval(state, w)?));
    }
    Ok(0)
}

fn cmd_gram(flags: &Flags) -> Result<u8, Failure> {
    let config = load_config(flags)?;
    let job = Job::new(config)?;
    let k_max = flags.k.unwrap_or(3);
    let psd_tol = job.config.tol("eigenstate.gram_psd", 1e-9);

    let b_report = psd_report(&b_minus_x1(job.canonical.as_general()), psd_tol)?;
    println!(
        "B - a a^T: min eigenvalue = {}, {}",
        num(b_report.min_eigenvalue),
        verdict(b_report.pass),
    );
    for k in 1..=k_max {
        let direct = gram_direct(&job.canonical, k)?;
        let recursive = gram_recursive(job.canonical.as_general(), k)?;
        let diff = (direct.clone() - recursive).abs().max();
        let report = psd_report(&direct, psd_tol)?;
        println!(
            "A_{k}: size {size}x{size}, max |direct - recursive| = {diff:.2e}, \
             min eigenvalue = {eig}, {verdict}",
            size = direct.nrows(),
            diff = diff,
            eig = num(report.min_eigenvalue),
            verdict = verdict(report.pass),
        );
    }
    Ok(0)
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "positive semidefinite"
    } else {
        "NOT positive semidefinite"
    }
}

fn cmd_boundary(flags: &Flags) -> Result<u8, Failure> {
    let config = load_config(flags)?;
    let job = Job::new(config)?;
    let measure = measure_from(&job.canonical);
    println!(
        "boundary measure: n = {}, c = {}, lambda = {}, t = {}",
        job.config.n,
        vector(job.canonical.coefficients()),
        num(job.canonical.lambda()),
        num(measure.t()),
    );
    let letters = alphabet(job.config.n);
    for &v in &letters {
        println!("beta({}) = {}", letter_name(v), num(measure.beta(v)));
    }
    for &prev in &letters {
        for &next in &letters {
            if next == prev.inverse() {
                continue;
            }
            println!(
                "alpha({}, {}) = {}",
                letter_name(prev),
                letter_name(next),
                num(measure.alpha(prev, next)),
            );
        }
    }
    let words = parse_words(&flags.positionals, job.config.n, 2)?;
    for s in &words {
        let mu = measure.mu_hat(s)?;
        let phi = phi_eval(&job.canonical, s)?;
        let integral = integrate_p(&job.canonical, &measure, s)?;
        println!(
            "word {}: mu = {}, phi = {}, integral P = {}, |difference| = {:.2e}",
            word_display(s),
            num(mu),
            num(phi),
            num(integral),
            (integral - phi).abs(),
        );
    }
    Ok(0)
}

fn cmd_verify(flags: &Flags) -> Result<u8, Failure> {
    let config = load_config(flags)?;
    let job = Job::new(config)?;
    let records = checks::run_all(&job)?;
    let report = VerificationReport::new(job.config.clone(), records);

    for record in &report.checks {
        let mark = if record.pass { "[ok]  " } else { "[FAIL]" };
        println!(
            "{mark} {name:<32} max residual {residual:.3e} vs tolerance {tol:.1e}  :: {identity}",
            name = record.name,
            residual = record.max_residual,
            tol = record.tolerance,
            identity = record.identity,
        );
    }
    let passed = report.checks.iter().filter(|r| r.pass).count();
    println!(
        "overall: {} ({passed}/{} checks)",
        if report.overall_pass { "PASS" } else { "FAIL" },
        report.checks.len(),
    );
    if !report.overall_pass {
        let failing: Vec<String> = report
            .checks
            .iter()
            .filter(|r| !r.pass)
            .map(|r| format!("{} ({})", r.name, r.identity))
            .collect();
        eprintln!("failing checks: {}", failing.join("; "));
    }
    if let Some(path) = &flags.out {
        std::fs::write(path, report.to_json())
            .map_err(|e| Failure::config(format!("cannot write {}: {e}", path.display())))?;
        println!("report written to {}", path.display());
    }
    Ok(if report.overall_pass { 0 } else { 1 })
}
