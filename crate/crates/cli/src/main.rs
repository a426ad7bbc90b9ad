mod eval;
mod parse;
mod report;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use ellhyp::suites::{run_checks, tally};
use ellhyp::{CheckRecord, EllipticContext, Suite, SuiteOptions, C64};

use eval::{evaluate, usage, EvalError};
use parse::{fmt_complex, parse_complex, read_config};
use report::{to_json, SuiteSummary, Summary};

const EXIT_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_EVAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "ellhyp",
    version,
    about = "Elliptic hypergeometric functions: evaluation and identity checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one function.
    #[command(after_help = usage())]
    Eval {
        #[command(flatten)]
        common: Common,
        function: String,
        /// Arguments, positional or name=value. Negative complex values need
        /// the name=value form or a preceding `--`.
        #[arg(allow_negative_numbers = true)]
        args: Vec<String>,
    },
    /// Run an identity suite, or `all`.
    Check {
        #[command(flatten)]
        common: Common,
        suite: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Trials per check (default: each check's own count).
        #[arg(long)]
        trials: Option<usize>,
        /// Write the JSON report here (`-` for stdout).
        #[arg(long)]
        json: Option<PathBuf>,
        /// Omit wall time so identical runs give identical reports.
        #[arg(long)]
        no_timestamp: bool,
        #[arg(long)]
        threads: Option<usize>,
    },
}

#[derive(Args)]
struct Common {
    /// Elliptic nome, e.g. 0.2+0.1i or 0.2,0.1.
    #[arg(long, allow_hyphen_values = true)]
    p: Option<String>,
    /// Base, same forms as --p.
    #[arg(long, allow_hyphen_values = true)]
    q: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    /// File of key=value lines mirroring the flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Flag values falling back to the config file.
struct Settings {
    file: BTreeMap<String, String>,
}

impl Settings {
    fn load(path: Option<&PathBuf>, known: &[&str]) -> Result<Self, String> {
        let file = match path {
            Some(p) => read_config(p)?,
            None => BTreeMap::new(),
        };
        if let Some(k) = file.keys().find(|k| !known.contains(&k.as_str())) {
            return Err(format!("unknown config key {k:?}"));
        }
        Ok(Settings { file })
    }

    fn get<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, String> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.file
            .get(key)
            .map(|v| v.parse().map_err(|_| format!("config {key}: bad value {v:?}")))
            .transpose()
    }

    fn complex(&self, flag: Option<String>, key: &str) -> Result<Option<C64>, String> {
        self.get(flag, key)?.map(|s: String| parse_complex(&s)).transpose()
    }

    fn switch(&self, flag: bool, key: &str) -> Result<bool, String> {
        Ok(flag || self.get(None, key)?.unwrap_or(false))
    }

    fn context(&self, common: Common) -> Result<(EllipticContext, Option<f64>), String> {
        let d = EllipticContext::default();
        let p = self.complex(common.p, "p")?.unwrap_or(d.p);
        let q = self.complex(common.q, "q")?.unwrap_or(d.q);
        let tol = self.get(common.tol, "tol")?;
        let mut ctx = d.with_pq(p, q).map_err(|e| e.to_string())?;
        if let Some(t) = tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err("tol must be positive".into());
            }
            ctx = ctx.with_tol(t);
        }
        Ok((ctx, tol))
    }
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("ellhyp: {msg}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match cli.command {
        Command::Eval { common, function, args } => run_eval(common, &function, &args),
        Command::Check {
            common,
            suite,
            seed,
            trials,
            json,
            no_timestamp,
            threads,
        } => {
            let known = ["p", "q", "tol", "seed", "trials", "json", "no-timestamp", "threads"];
            let run = || -> Result<_, String> {
                let s = Settings::load(common.config.as_ref(), &known)?;
                let (ctx, tol) = s.context(common)?;
                let seed = s.get(seed, "seed")?.unwrap_or(0);
                let opts = SuiteOptions {
                    trials: s.get(trials, "trials")?,
                    tol,
                    threads: s.get(threads, "threads")?,
                };
                let json = s.get(json, "json")?;
                let stamp = !s.switch(no_timestamp, "no-timestamp")?;
                Ok((ctx.with_seed(seed), opts, json, stamp))
            };
            match run() {
                Ok((ctx, opts, json, stamp)) => run_check(&suite, &ctx, opts, json, stamp),
                Err(e) => fail(EXIT_USAGE, e),
            }
        }
    }
}

fn run_eval(common: Common, function: &str, args: &[String]) -> ExitCode {
    let ctx = Settings::load(common.config.as_ref(), &["p", "q", "tol"]).and_then(|s| s.context(common));
    let ctx = match ctx {
        Ok((ctx, _)) => ctx,
        Err(e) => return fail(EXIT_USAGE, e),
    };
    match evaluate(function, args, &ctx) {
        Ok(z) => {
            println!("{}", fmt_complex(z));
            ExitCode::SUCCESS
        }
        Err(EvalError::Usage(m)) => fail(EXIT_USAGE, format!("{m}\n\n{}", usage())),
        Err(EvalError::Eval(e)) => fail(EXIT_EVAL, e),
    }
}

fn run_check(name: &str, ctx: &EllipticContext, opts: SuiteOptions, json: Option<PathBuf>, stamp: bool) -> ExitCode {
    let suites: Vec<Suite> = if name == "all" {
        Suite::ALL.to_vec()
    } else {
        match Suite::from_name(name) {
            Some(s) => vec![s],
            None => {
                let names: Vec<_> = Suite::ALL.iter().map(|s| s.name()).collect();
                return fail(
                    EXIT_USAGE,
                    format!("unknown suite {name:?}; expected all, {}", names.join(", ")),
                );
            }
        }
    };
    let start = Instant::now();
    let mut text = String::new();
    let mut records: Vec<CheckRecord> = Vec::new();
    let mut per_suite = Vec::new();
    for s in &suites {
        let recs = run_checks(&s.checks(), ctx, opts);
        let (passed, failed) = tally(&recs);
        let _ = writeln!(text, "{:<15} {passed:>5} passed {failed:>5} failed", s.name());
        for r in recs.iter().filter(|r| !r.pass) {
            match &r.error {
                Some(e) => writeln!(text, "  FAIL {} trial {}: {e}", r.id, r.trial),
                None => writeln!(
                    text,
                    "  FAIL {} trial {}: residual {:e} scale {:e}",
                    r.id, r.trial, r.residual, r.scale
                ),
            }
            .expect("writing to a String");
        }
        per_suite.push(SuiteSummary {
            name: s.name(),
            summary: Summary::of(&recs),
        });
        records.extend(recs);
    }
    records.sort_by(|a, b| a.id.cmp(&b.id).then(a.trial.cmp(&b.trial)));
    let wall_ms = stamp.then(|| start.elapsed().as_millis() as u64);
    let total = Summary::of(&records);
    let _ = writeln!(
        text,
        "total           {:>5} passed {:>5} failed",
        total.passed, total.failed
    );
    // keep stdout pure JSON when the report goes there
    let to_stdout = json.as_ref().is_some_and(|p| p.as_os_str() == "-");
    if to_stdout {
        eprint!("{text}");
    } else {
        print!("{text}");
    }
    if let Some(path) = json {
        let report = to_json(name, ctx, opts.tol, &records, &per_suite, wall_ms);
        if to_stdout {
            print!("{report}");
        } else if let Err(e) = std::fs::write(&path, report) {
            return fail(EXIT_EVAL, format!("cannot write {}: {e}", path.display()));
        }
    }
    if total.failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAILED)
    }
}
