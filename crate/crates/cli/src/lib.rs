//! The `watkins` command-line tool.
//!
//! Exit codes: 0 certified (or success), 1 inconclusive, 2 usage or data
//! error, 3 inapplicable.

pub mod input;
pub mod output;
pub mod scan;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_traits::One;
use thiserror::Error;
use watkins_core::arith::{ArithError, FundamentalDiscriminant, SignFilter};
use watkins_core::data::{Cache, CurveDataRow, CurveQuery, DataError, Resolver, ResolverOptions};
use watkins_core::ecq::{a_p, CurveRecord, EcqError, ReductionKind};
use watkins_core::watkins::{
    count_omega_at_most, density_ratio, is_minimal_twist, minimal_twist_candidates, twist_record, watkins_threshold,
    ManinPolicy, Verdict, Verifier, WatkinsError, KAPPA_RULE,
};

pub use input::{resolve_curve, CurveInput};
pub use output::{Format, Record};
pub use scan::{scan_with, summary_json, ScanConfig, ScanCounts};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INCONCLUSIVE: i32 = 1;
pub const EXIT_ERROR: i32 = 2;
pub const EXIT_INAPPLICABLE: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Watkins(#[from] WatkinsError),
    #[error(transparent)]
    Ecq(#[from] EcqError),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Parser)]
#[command(name = "watkins", version, about = "Certify Watkins' conjecture for quadratic twists of curves with rational 2-torsion")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Never contact the LMFDB; use the cache and built-in fixtures only.
    #[arg(long, global = true)]
    pub offline: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct CurveArgs {
    /// Five a-invariants `a1,a2,a3,a4,a6`.
    #[arg(long, allow_hyphen_values = true)]
    pub curve: Option<String>,
    /// Cremona (`17a1`) or LMFDB (`17.a2`) label.
    #[arg(long)]
    pub label: Option<String>,
}

impl CurveArgs {
    pub fn input(&self) -> Result<CurveInput, CliError> {
        match (&self.curve, &self.label) {
            (Some(c), _) => c.parse(),
            (None, Some(l)) => Ok(CurveInput::Label(l.clone())),
            (None, None) => Err(CliError::Usage("one of --curve or --label is required".into())),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Sign {
    #[default]
    Both,
    Positive,
    Negative,
}

impl From<Sign> for SignFilter {
    fn from(s: Sign) -> Self {
        match s {
            Sign::Both => SignFilter::Both,
            Sign::Positive => SignFilter::Positive,
            Sign::Negative => SignFilter::Negative,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Report t, kappa and the inputs they depend on.
    Threshold {
        #[command(flatten)]
        curve: CurveArgs,
        /// Take c_E = 1 when the Manin constant is unknown.
        #[arg(long)]
        assume_manin: bool,
    },
    /// Certify one twist. Exit 0 certified, 1 inconclusive, 3 inapplicable.
    Verify {
        #[command(flatten)]
        curve: CurveArgs,
        /// Fundamental discriminant.
        #[arg(long, allow_negative_numbers = true)]
        d: String,
        #[arg(long)]
        assume_manin: bool,
    },
    /// Verify every fundamental discriminant with |D| <= d-bound.
    Scan {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long)]
        d_bound: u64,
        /// Only discriminants with at least this many prime factors.
        #[arg(long, default_value_t = 0)]
        min_omega: usize,
        #[arg(long, value_enum, default_value_t = Sign::Both)]
        sign: Sign,
        #[arg(long)]
        assume_manin: bool,
        /// Worker threads (default: available parallelism).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Traces of Frobenius.
    Ap {
        #[command(flatten)]
        curve: CurveArgs,
        /// A prime (repeatable).
        #[arg(long)]
        p: Vec<u64>,
        /// Every prime up to this bound.
        #[arg(long)]
        up_to: Option<u64>,
    },
    /// Minimal model, conductor and local reduction data.
    Conductor {
        #[command(flatten)]
        curve: CurveArgs,
    },
    /// Whether the curve has the least conductor among its quadratic twists.
    MinimalTwist {
        #[command(flatten)]
        curve: CurveArgs,
    },
    /// Count n <= x with omega(n) <= a.
    Density {
        #[arg(long)]
        x: u64,
        #[arg(long)]
        a: u32,
    },
    /// Fetch rows into the cache, or compact it.
    Fetch {
        #[arg(long)]
        label: Option<String>,
        /// A conductor `N` or an inclusive range `LO-HI`.
        #[arg(long)]
        conductor: Option<String>,
        /// Rewrite the cache keeping the newest row per label.
        #[arg(long)]
        compact: bool,
    },
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    let result = match &cli.out {
        Some(path) => File::create(path).map_err(CliError::from).and_then(|f| {
            let mut w = BufWriter::new(f);
            let code = execute(&cli, &mut w, stderr)?;
            w.flush()?;
            Ok(code)
        }),
        None => execute(&cli, stdout, stderr),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn resolver(cli: &Cli) -> Result<Resolver, CliError> {
    Ok(Resolver::new(&ResolverOptions {
        offline: cli.offline,
        ..ResolverOptions::default()
    })?)
}

fn policy(assume_manin: bool) -> ManinPolicy {
    if assume_manin {
        ManinPolicy::AssumeOne
    } else {
        ManinPolicy::Require
    }
}

fn curve_name(c: &CurveRecord) -> String {
    c.label.clone().unwrap_or_else(|| c.minimal_model.to_string())
}

fn ainvs_csv(c: &CurveRecord) -> String {
    c.minimal_model.ainvs().iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",")
}

fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::Certified => EXIT_OK,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
        Verdict::Inapplicable(_) => EXIT_INAPPLICABLE,
    }
}

fn parse_discriminant(s: &str) -> Result<FundamentalDiscriminant, CliError> {
    let d: BigInt = s.trim().parse().map_err(|_| CliError::Usage(format!("--d: `{s}` is not an integer")))?;
    if d.is_one() {
        return Err(CliError::Usage("--d: the twist by 1 is the curve itself".into()));
    }
    FundamentalDiscriminant::new(&d).map_err(|e| CliError::Usage(format!("--d: {e}")))
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    match &cli.command {
        Command::Threshold { curve, assume_manin } => {
            let c = resolve_curve(&curve.input()?, &resolver(cli)?)?;
            let report = watkins_threshold(&c, policy(*assume_manin)).map_err(|e| match e {
                WatkinsError::MissingInvariant("Manin constant") => {
                    CliError::Usage(format!("{e} for {} (pass --assume-manin to take c_E = 1)", curve_name(&c)))
                }
                WatkinsError::MissingInvariant(_) => CliError::Usage(format!("{e} for {}", curve_name(&c))),
                e => e.into(),
            })?;
            let i = &report.inputs;
            let r = Record::new()
                .opt("curve_label", c.label.as_ref())
                .field("curve_ainvs", ainvs_csv(&c))
                .field("conductor", c.conductor.value())
                .field("omega_n", report.omega_n)
                .field("moddeg", &i.moddeg.value)
                .field("moddeg_provenance", i.moddeg.provenance.tag())
                .opt("moddeg_fetched_at", i.moddeg.fetched_at.as_ref())
                .field("manin", &i.manin.value)
                .field("manin_provenance", i.manin.provenance.tag())
                .opt("manin_fetched_at", i.manin.fetched_at.as_ref())
                .field("v2_moddeg", i.v2_moddeg)
                .field("v2_manin", i.v2_manin)
                .field("v2_ratio", i.v2_ratio())
                .field("t", report.t)
                .field("kappa", report.kappa)
                .field("kappa_rule", KAPPA_RULE)
                .field("assumptions", i.assumptions.iter().map(|a| a.tag()).collect::<Vec<_>>().join(";"));
            output::write_records(out, cli.format, &[r])?;
            Ok(EXIT_OK)
        }
        Command::Verify { curve, d, assume_manin } => {
            let d = parse_discriminant(d)?;
            let c = resolve_curve(&curve.input()?, &resolver(cli)?)?;
            let cert = Verifier::new(c, policy(*assume_manin)).verify(&d);
            let mut w = output::CertificateWriter::new(out, cli.format)?;
            w.write(&cert)?;
            w.finish()?;
            Ok(verdict_code(cert.verdict))
        }
        Command::Scan {
            curve,
            d_bound,
            min_omega,
            sign,
            assume_manin,
            jobs,
        } => {
            let config = ScanConfig {
                curve_input: curve.input()?,
                d_bound: *d_bound,
                min_omega: *min_omega,
                sign_filter: (*sign).into(),
                assume_manin: *assume_manin,
                offline: cli.offline,
                output_format: cli.format,
                parallelism: jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
                output_path: cli.out.clone(),
            };
            config.validate()?;
            let c = resolve_curve(&config.curve_input, &resolver(cli)?)?;
            let verifier = Verifier::new(c, policy(config.assume_manin));
            let mut w = output::CertificateWriter::new(out, config.output_format)?;
            let counts = scan_with(&verifier, &config, |cert| w.write(cert))?;
            w.finish()?;
            let summary = summary_json(&verifier, &config, &counts);
            match config.output_format {
                Format::Json => writeln!(out, "{summary}")?,
                Format::Csv => writeln!(err, "{summary}")?,
            }
            Ok(EXIT_OK)
        }
        Command::Ap { curve, p, up_to } => {
            let c = resolve_curve(&curve.input()?, &resolver(cli)?)?;
            let mut primes = p.clone();
            if let Some(bound) = up_to {
                let bound = usize::try_from(*bound).map_err(|_| CliError::Usage("--up-to is too large".into()))?;
                primes.extend(watkins_core::arith::primes_up_to(bound).into_iter().map(u64::from));
            }
            if primes.is_empty() {
                return Err(CliError::Usage("give --p or --up-to".into()));
            }
            let mut rows = Vec::with_capacity(primes.len());
            for p in primes {
                let (reduction, ap) = trace(&c, p)?;
                rows.push(Record::new().field("p", p).field("reduction", reduction).field("a_p", ap));
            }
            output::write_records(out, cli.format, &rows)?;
            Ok(EXIT_OK)
        }
        Command::Conductor { curve } => {
            let c = resolve_curve(&curve.input()?, &resolver(cli)?)?;
            let local: Vec<String> = c
                .local
                .iter()
                .map(|l| format!("{}:{}:{}:{}", l.p, l.kodaira, l.f_p, kind_tag(l.kind)))
                .collect();
            let r = Record::new()
                .opt("curve_label", c.label.as_ref())
                .field("curve_ainvs", ainvs_csv(&c))
                .field("conductor", c.conductor.value())
                .field("conductor_factors", factors(&c.conductor))
                .field("min_disc", c.min_disc.value())
                .field("min_disc_factors", factors(&c.min_disc))
                .field("j", c.minimal_model.j())
                .field("two_torsion_rank", c.two_torsion_rank)
                .field("local", local.join(";"));
            output::write_records(out, cli.format, &[r])?;
            Ok(EXIT_OK)
        }
        Command::MinimalTwist { curve } => {
            let c = resolve_curve(&curve.input()?, &resolver(cli)?)?;
            let (minimal, witness) = is_minimal_twist(&c)?;
            let witness_record = witness.as_ref().map(|d| twist_record(&c, d)).transpose()?;
            let r = Record::new()
                .opt("curve_label", c.label.as_ref())
                .field("curve_ainvs", ainvs_csv(&c))
                .field("conductor", c.conductor.value())
                .field("candidates", minimal_twist_candidates(&c.conductor).len())
                .field("minimal_twist", minimal)
                .opt("witness_d", witness.as_ref())
                .opt("witness_conductor", witness_record.as_ref().map(|w| w.conductor.value()))
                .opt("witness_ainvs", witness_record.as_ref().map(ainvs_csv));
            output::write_records(out, cli.format, &[r])?;
            Ok(EXIT_OK)
        }
        Command::Density { x, a } => {
            let count = count_omega_at_most(*x, *a)?;
            let r = Record::new()
                .field("x", x)
                .field("a", a)
                .field("count", count)
                .opt("ratio", density_ratio(count, *x, *a));
            output::write_records(out, cli.format, &[r])?;
            Ok(EXIT_OK)
        }
        Command::Fetch { label, conductor, compact } => {
            let res = resolver(cli)?;
            let mut rows = Vec::new();
            if let Some(l) = label {
                rows.extend(res.fetch(&CurveQuery::Label(l.clone()))?);
            }
            if let Some(n) = conductor {
                let (lo, hi) = parse_range(n)?;
                rows.extend(res.fetch(&CurveQuery::ConductorRange(lo, hi))?);
            }
            let records: Vec<Record> = rows.iter().map(row_record).collect();
            output::write_records(out, cli.format, &records)?;
            if *compact {
                let cache = res.cache().cloned().map_or_else(Cache::open_default, Ok)?;
                let kept = cache.compact()?;
                writeln!(err, "compacted {}: {kept} rows", cache.path().display())?;
            } else if label.is_none() && conductor.is_none() {
                return Err(CliError::Usage("give --label, --conductor or --compact".into()));
            }
            Ok(EXIT_OK)
        }
    }
}

/// `a_p` at good primes by point counting; at bad primes 1, -1 or 0 for
/// split, non-split and additive reduction.
fn trace(c: &CurveRecord, p: u64) -> Result<(&'static str, i64), CliError> {
    match c.local_at(&BigInt::from(p)) {
        Some(l) if l.kind != ReductionKind::Good => {
            let ap = match (l.kind, l.split) {
                (ReductionKind::Multiplicative, Some(true)) => 1,
                (ReductionKind::Multiplicative, _) => -1,
                _ => 0,
            };
            Ok((kind_tag(l.kind), ap))
        }
        _ => Ok(("good", a_p(&c.minimal_model, p)?)),
    }
}

fn kind_tag(k: ReductionKind) -> &'static str {
    match k {
        ReductionKind::Good => "good",
        ReductionKind::Multiplicative => "multiplicative",
        ReductionKind::Additive => "additive",
    }
}

fn factors(f: &watkins_core::arith::Factorization) -> String {
    f.factors().iter().map(|(p, e)| format!("{p}^{e}")).collect::<Vec<_>>().join(";")
}

fn parse_range(s: &str) -> Result<(u64, u64), CliError> {
    let bad = || CliError::Usage(format!("--conductor: expected N or LO-HI, got `{s}`"));
    let (lo, hi) = match s.split_once('-') {
        Some((lo, hi)) => (lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?),
        None => {
            let n = s.trim().parse().map_err(|_| bad())?;
            (n, n)
        }
    };
    if lo == 0 || lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn row_record(r: &CurveDataRow) -> Record {
    Record::new()
        .field("label", &r.label)
        .field("ainvs", r.ainvs.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(","))
        .field("conductor", &r.conductor)
        .opt("moddeg", r.moddeg.as_ref())
        .opt("manin", r.manin.as_ref())
        .opt("rank", r.rank)
        .opt(
            "torsion_structure",
            r.torsion_structure.as_ref().map(|t| t.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",")),
        )
        .field("source", serde_json::to_value(r.source).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default())
        .field("fetched_at", &r.fetched_at)
}
