//! Twist census over fundamental discriminants.

use std::io;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;
use watkins_core::arith::{enumerate_fundamental_discriminants, FundamentalDiscriminant, SignFilter};
use watkins_core::watkins::{density_ratio, InapplicableReason, TwistCertificate, Verdict, Verifier, KAPPA_RULE};

use crate::input::CurveInput;
use crate::output::{Format, Record};
use crate::CliError;

/// Discriminants verified per parallel batch. Output is written batch by
/// batch in enumeration order.
const BATCH: usize = 512;

#[derive(Clone, Debug)]
pub struct ScanConfig {
    pub curve_input: CurveInput,
    pub d_bound: u64,
    pub min_omega: usize,
    pub sign_filter: SignFilter,
    pub assume_manin: bool,
    pub offline: bool,
    pub output_format: Format,
    pub parallelism: usize,
    pub output_path: Option<PathBuf>,
}

impl ScanConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.parallelism == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        if self.d_bound < 3 {
            return Err(CliError::Usage("--d-bound must be at least 3".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ScanCounts {
    pub discriminants: u64,
    pub certified: u64,
    pub inconclusive: u64,
    /// Indexed like [`InapplicableReason::ALL`].
    pub inapplicable: [u64; 5],
}

impl ScanCounts {
    fn add(&mut self, verdict: Verdict) {
        self.discriminants += 1;
        match verdict {
            Verdict::Certified => self.certified += 1,
            Verdict::Inconclusive => self.inconclusive += 1,
            Verdict::Inapplicable(r) => {
                let i = InapplicableReason::ALL.iter().position(|x| *x == r).expect("listed");
                self.inapplicable[i] += 1;
            }
        }
    }

    pub fn inapplicable_total(&self) -> u64 {
        self.inapplicable.iter().sum()
    }
}

/// Verifies every enumerated discriminant on a pool of `parallelism`
/// threads, handing certificates to `sink` in canonical order.
pub fn scan_with(
    verifier: &Verifier,
    config: &ScanConfig,
    mut sink: impl FnMut(&TwistCertificate) -> io::Result<()>,
) -> Result<ScanCounts, CliError> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.parallelism)
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    let mut ds = enumerate_fundamental_discriminants(config.d_bound, config.min_omega, config.sign_filter);
    let mut counts = ScanCounts::default();
    loop {
        let batch: Vec<FundamentalDiscriminant> = ds.by_ref().take(BATCH).collect();
        if batch.is_empty() {
            break;
        }
        let certs: Vec<TwistCertificate> = pool.install(|| batch.par_iter().map(|d| verifier.verify(d)).collect());
        for cert in &certs {
            counts.add(cert.verdict);
            sink(cert)?;
        }
    }
    Ok(counts)
}

#[derive(Serialize)]
struct SummaryJson {
    curve: String,
    d_bound: String,
    min_omega: String,
    discriminants: String,
    certified: String,
    inconclusive: String,
    inapplicable: String,
    inapplicable_by_reason: Record,
    threshold: Option<String>,
    kappa: Option<String>,
    kappa_rule: &'static str,
    not_certified: String,
    bound_shape: Option<String>,
    not_certified_over_shape: Option<String>,
}

#[derive(Serialize)]
struct SummaryLine {
    summary: SummaryJson,
}

/// Trailing summary: verdict counts and the count of uncertified `D`
/// against `x / log x * (log log x)^(kappa - 1)` at `x = d_bound`.
pub fn summary_json(verifier: &Verifier, config: &ScanConfig, counts: &ScanCounts) -> String {
    let threshold = verifier.threshold().ok();
    let not_certified = counts.inconclusive + counts.inapplicable_total();
    let kappa = threshold.map(|t| t.kappa);
    let shape = kappa.and_then(|k| u32::try_from(k).ok()).and_then(|k| density_ratio(1, config.d_bound, k).map(|r| 1.0 / r));
    let ratio = kappa
        .and_then(|k| u32::try_from(k).ok())
        .and_then(|k| density_ratio(not_certified, config.d_bound, k));
    let mut by_reason = Record::new();
    for (r, n) in InapplicableReason::ALL.iter().zip(counts.inapplicable) {
        by_reason = by_reason.field(r.tag(), n);
    }
    let line = SummaryLine {
        summary: SummaryJson {
            curve: verifier.curve().label.clone().unwrap_or_else(|| verifier.curve().minimal_model.to_string()),
            d_bound: config.d_bound.to_string(),
            min_omega: config.min_omega.to_string(),
            discriminants: counts.discriminants.to_string(),
            certified: counts.certified.to_string(),
            inconclusive: counts.inconclusive.to_string(),
            inapplicable: counts.inapplicable_total().to_string(),
            inapplicable_by_reason: by_reason,
            threshold: threshold.map(|t| t.t.to_string()),
            kappa: kappa.map(|k| k.to_string()),
            kappa_rule: KAPPA_RULE,
            not_certified: not_certified.to_string(),
            bound_shape: shape.map(|s| s.to_string()),
            not_certified_over_shape: ratio.map(|r| r.to_string()),
        },
    };
    serde_json::to_string(&line).expect("summary serializes")
}
