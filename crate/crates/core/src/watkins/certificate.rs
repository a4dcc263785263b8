//! Per-twist verification and its certificate.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use crate::arith::{Factorization, FundamentalDiscriminant, Trust};
use crate::ecq::{CurveRecord, Provenance, Sourced, WeierstrassModel};

use super::bounds::{
    faltings_delta_v2, lower_bound_exact, lower_bound_torsion, prime_contributions, rational_string, twist_rank_upper,
    PrimeContribution,
};
use super::minimal_twist::{conductor_divides, is_minimal_twist, twist_record};
use super::threshold::{watkins_threshold, Assumption, ManinPolicy, ThresholdReport};
use super::WatkinsError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InapplicableReason {
    NoTwoTorsion,
    NotMinimalTwist,
    ConductorDivisibility,
    MissingInvariant,
    ComputationError,
}

impl InapplicableReason {
    pub const ALL: [InapplicableReason; 5] = [
        InapplicableReason::NoTwoTorsion,
        InapplicableReason::NotMinimalTwist,
        InapplicableReason::ConductorDivisibility,
        InapplicableReason::MissingInvariant,
        InapplicableReason::ComputationError,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            InapplicableReason::NoTwoTorsion => "no_two_torsion",
            InapplicableReason::NotMinimalTwist => "not_minimal_twist",
            InapplicableReason::ConductorDivisibility => "conductor_divisibility",
            InapplicableReason::MissingInvariant => "missing_invariant",
            InapplicableReason::ComputationError => "computation_error",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Certified,
    Inconclusive,
    Inapplicable(InapplicableReason),
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Certified => f.write_str("CERTIFIED"),
            Verdict::Inconclusive => f.write_str("INCONCLUSIVE"),
            Verdict::Inapplicable(r) => write!(f, "INAPPLICABLE({})", r.tag()),
        }
    }
}

/// Which comparison certified a twist.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CertifiedBy {
    /// `2 ω(N^(D)) - 1 <= lower_bound_exact`.
    DirectComparison,
    /// `ω(D) >= t`.
    Threshold,
}

impl CertifiedBy {
    pub fn tag(self) -> &'static str {
        match self {
            CertifiedBy::DirectComparison => "direct_comparison",
            CertifiedBy::Threshold => "threshold",
        }
    }
}

/// Everything computed while checking one pair `(E, D)`. Quantities that
/// could not be computed are `None`; the reason is in `detail`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwistCertificate {
    pub curve: Arc<CurveRecord>,
    pub d: FundamentalDiscriminant,
    pub twist_conductor: Option<Factorization>,
    pub prime_set: Option<Vec<PrimeContribution>>,
    pub lower_bound_exact: Option<i64>,
    pub lower_bound_torsion: Option<i64>,
    pub rank_upper_exact: Option<i64>,
    pub rank_upper_coarse: Option<i64>,
    pub threshold: Option<i64>,
    pub verdict: Verdict,
    pub certified_by: Option<CertifiedBy>,
    pub assumptions: Vec<Assumption>,
    pub twist_model: Option<WeierstrassModel>,
    pub faltings_delta_v2: Option<(BigRational, bool)>,
    pub detail: Option<String>,
}

/// Verifies twists of one curve, sharing the per-curve work
/// (minimal-twist check, threshold) across discriminants.
#[derive(Clone, Debug)]
pub struct Verifier {
    curve: Arc<CurveRecord>,
    minimal: Result<(bool, Option<FundamentalDiscriminant>), WatkinsError>,
    threshold: Result<ThresholdReport, WatkinsError>,
}

impl Verifier {
    pub fn new(curve: CurveRecord, policy: ManinPolicy) -> Self {
        let minimal = is_minimal_twist(&curve);
        let threshold = watkins_threshold(&curve, policy);
        Self {
            curve: Arc::new(curve),
            minimal,
            threshold,
        }
    }

    pub fn curve(&self) -> &CurveRecord {
        &self.curve
    }

    pub fn threshold(&self) -> Result<&ThresholdReport, &WatkinsError> {
        self.threshold.as_ref()
    }

    pub fn minimal_twist(&self) -> Result<&(bool, Option<FundamentalDiscriminant>), &WatkinsError> {
        self.minimal.as_ref()
    }

    pub fn verify(&self, d: &FundamentalDiscriminant) -> TwistCertificate {
        let curve = &*self.curve;
        let mut errors: Vec<String> = Vec::new();
        let mut note = |e: &WatkinsError| errors.push(e.to_string());

        let mut assumptions = match &self.threshold {
            Ok(report) => report.inputs.assumptions.clone(),
            Err(_) => Vec::new(),
        };
        let v2_ratio = self.threshold.as_ref().ok().map(|r| r.inputs.v2_ratio());

        let twist = twist_record(curve, d).inspect_err(&mut note).ok();
        let primes = prime_contributions(curve, d).inspect_err(&mut note).ok();
        let exact = match (v2_ratio, &primes) {
            (Some(v), Some(ps)) => Some(lower_bound_exact(v, ps)),
            _ => None,
        };
        let torsion = match v2_ratio {
            Some(v) if curve.two_torsion_rank > 0 => Some(lower_bound_torsion(d.omega(), v, curve.conductor.omega())),
            _ => None,
        };
        let rank_bounds = match &twist {
            Some(tw) if curve.two_torsion_rank > 0 => twist_rank_upper(curve, d, &tw.conductor).ok(),
            _ => None,
        };
        let faltings = twist.as_ref().and_then(|tw| faltings_delta_v2(curve, tw).ok());
        debug_assert!(faltings.as_ref().is_none_or(|(_, ok)| *ok), "twist discriminant bound violated");

        let probabilistic = [Some(&curve.conductor), Some(&curve.min_disc), Some(d.factorization()), twist.as_ref().map(|t| &t.conductor)]
            .into_iter()
            .flatten()
            .any(|f| f.trust() == Trust::Probabilistic);
        if probabilistic {
            assumptions.push(Assumption::ProbabilisticPrime);
        }
        assumptions.sort();
        assumptions.dedup();

        let threshold = self.threshold.as_ref().ok().map(|r| r.t);
        let mut detail = None;
        let mut inapplicable = |reason, why: String| {
            detail = Some(why);
            Verdict::Inapplicable(reason)
        };
        let mut certified_by = None;
        let verdict = if curve.two_torsion_rank == 0 {
            inapplicable(InapplicableReason::NoTwoTorsion, "E(Q)[2] is trivial".into())
        } else if let Err(e) = &self.minimal {
            inapplicable(InapplicableReason::ComputationError, format!("minimal twist check: {e}"))
        } else if let Ok((false, witness)) = &self.minimal {
            let w = witness.as_ref().map(|w| w.to_string()).unwrap_or_default();
            inapplicable(InapplicableReason::NotMinimalTwist, format!("the twist by {w} has smaller conductor"))
        } else if let Err(e) = &self.threshold {
            let reason = match e {
                WatkinsError::MissingInvariant(_) => InapplicableReason::MissingInvariant,
                _ => InapplicableReason::ComputationError,
            };
            inapplicable(reason, e.to_string())
        } else if !errors.is_empty() {
            inapplicable(InapplicableReason::ComputationError, errors.join("; "))
        } else {
            let tw = twist.as_ref().expect("no errors recorded");
            let (upper, _) = rank_bounds.expect("2-torsion present");
            let lower = exact.expect("no errors recorded");
            let t = threshold.expect("threshold computed");
            if !conductor_divides(&curve.conductor, &tw.conductor) {
                inapplicable(
                    InapplicableReason::ConductorDivisibility,
                    format!("{} does not divide {}", curve.conductor.value(), tw.conductor.value()),
                )
            } else if upper <= lower {
                certified_by = Some(CertifiedBy::DirectComparison);
                Verdict::Certified
            } else if d.omega() as i64 >= t {
                certified_by = Some(CertifiedBy::Threshold);
                Verdict::Certified
            } else {
                Verdict::Inconclusive
            }
        };

        TwistCertificate {
            curve: Arc::clone(&self.curve),
            d: d.clone(),
            twist_conductor: twist.as_ref().map(|t| t.conductor.clone()),
            prime_set: primes,
            lower_bound_exact: exact,
            lower_bound_torsion: torsion,
            rank_upper_exact: rank_bounds.map(|b| b.0),
            rank_upper_coarse: rank_bounds.map(|b| b.1),
            threshold,
            verdict,
            certified_by,
            assumptions,
            twist_model: twist.map(|t| t.minimal_model),
            faltings_delta_v2: faltings,
            detail,
        }
    }
}

/// Checks one twist; see [`Verifier`] for batches.
pub fn verify_twist(curve: &CurveRecord, d: &FundamentalDiscriminant, policy: ManinPolicy) -> TwistCertificate {
    Verifier::new(curve.clone(), policy).verify(d)
}

#[derive(Serialize)]
struct SourcedJson<'a> {
    value: String,
    provenance: &'a Provenance,
    fetched_at: &'a Option<String>,
}

fn sourced_json<T: fmt::Display>(s: &Option<Sourced<T>>) -> Option<SourcedJson<'_>> {
    s.as_ref().map(|s| SourcedJson {
        value: s.value.to_string(),
        provenance: &s.provenance,
        fetched_at: &s.fetched_at,
    })
}

#[derive(Serialize)]
struct CurveJson<'a> {
    label: &'a Option<String>,
    ainvs: [String; 5],
    conductor: String,
    two_torsion_rank: String,
    moddeg: Option<SourcedJson<'a>>,
    manin: Option<SourcedJson<'a>>,
}

#[derive(Serialize)]
struct FactorizationJson {
    value: String,
    factors: Vec<[String; 2]>,
}

fn factorization_json(f: &Factorization) -> FactorizationJson {
    FactorizationJson {
        value: f.value().to_string(),
        factors: f.factors().iter().map(|(p, e)| [p.to_string(), e.to_string()]).collect(),
    }
}

#[derive(Serialize)]
struct PrimeJson {
    p: String,
    a_p: String,
    contribution_v2: String,
}

#[derive(Serialize)]
struct CertificateJson<'a> {
    curve: CurveJson<'a>,
    d: String,
    twist_conductor: Option<FactorizationJson>,
    prime_set: Option<Vec<PrimeJson>>,
    lower_bound_exact: Option<String>,
    lower_bound_torsion: Option<String>,
    rank_upper_exact: Option<String>,
    rank_upper_coarse: Option<String>,
    threshold: Option<String>,
    verdict: String,
    assumptions: &'a [Assumption],
    certified_by: Option<&'static str>,
    twist_model: Option<[String; 5]>,
    faltings_delta_v2: Option<String>,
    faltings_bound_ok: Option<bool>,
    detail: &'a Option<String>,
}

fn ainvs_strings(m: &WeierstrassModel) -> [String; 5] {
    m.ainvs().clone().map(|a| a.to_string())
}

fn opt_string(v: Option<i64>) -> Option<String> {
    v.map(|v| v.to_string())
}

impl TwistCertificate {
    fn json_view(&self) -> CertificateJson<'_> {
        let c = &*self.curve;
        CertificateJson {
            curve: CurveJson {
                label: &c.label,
                ainvs: ainvs_strings(&c.minimal_model),
                conductor: c.conductor.value().to_string(),
                two_torsion_rank: c.two_torsion_rank.to_string(),
                moddeg: sourced_json(&c.moddeg),
                manin: sourced_json(&c.manin),
            },
            d: self.d.value().to_string(),
            twist_conductor: self.twist_conductor.as_ref().map(factorization_json),
            prime_set: self.prime_set.as_ref().map(|ps| {
                ps.iter()
                    .map(|c| PrimeJson {
                        p: c.p.to_string(),
                        a_p: c.a_p.to_string(),
                        contribution_v2: c.contribution_v2.to_string(),
                    })
                    .collect()
            }),
            lower_bound_exact: opt_string(self.lower_bound_exact),
            lower_bound_torsion: opt_string(self.lower_bound_torsion),
            rank_upper_exact: opt_string(self.rank_upper_exact),
            rank_upper_coarse: opt_string(self.rank_upper_coarse),
            threshold: opt_string(self.threshold),
            verdict: self.verdict.to_string(),
            assumptions: &self.assumptions,
            certified_by: self.certified_by.map(CertifiedBy::tag),
            twist_model: self.twist_model.as_ref().map(ainvs_strings),
            faltings_delta_v2: self.faltings_delta_v2.as_ref().map(|(q, _)| rational_string(q)),
            faltings_bound_ok: self.faltings_delta_v2.as_ref().map(|(_, ok)| *ok),
            detail: &self.detail,
        }
    }

    /// Canonical single-line JSON: fixed key order, integers as decimal strings.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.json_view()).expect("certificate serializes")
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self.json_view()).expect("certificate serializes")
    }

    /// Column names of [`TwistCertificate::csv_record`], one per JSON leaf.
    pub const CSV_HEADER: [&'static str; 26] = [
        "curve_label",
        "curve_ainvs",
        "curve_conductor",
        "curve_two_torsion_rank",
        "moddeg",
        "moddeg_provenance",
        "moddeg_fetched_at",
        "manin",
        "manin_provenance",
        "manin_fetched_at",
        "d",
        "twist_conductor",
        "twist_conductor_factors",
        "prime_set",
        "lower_bound_exact",
        "lower_bound_torsion",
        "rank_upper_exact",
        "rank_upper_coarse",
        "threshold",
        "verdict",
        "assumptions",
        "certified_by",
        "twist_model",
        "faltings_delta_v2",
        "faltings_bound_ok",
        "detail",
    ];

    /// Flat row with the same data as [`TwistCertificate::to_json`]. Lists
    /// are `;`-joined (a-invariants `,`-joined, factors `p^e`, primes
    /// `p:a_p:v2`); absent values are empty.
    pub fn csv_record(&self) -> Vec<String> {
        let c = &*self.curve;
        let s = |v: Option<i64>| v.map(|v| v.to_string()).unwrap_or_default();
        let ainvs = |m: &WeierstrassModel| ainvs_strings(m).join(",");
        let sourced = |v: &Option<Sourced<BigInt>>| -> [String; 3] {
            match v {
                Some(v) => [v.value.to_string(), v.provenance.tag().to_string(), v.fetched_at.clone().unwrap_or_default()],
                None => Default::default(),
            }
        };
        let [moddeg, moddeg_prov, moddeg_at] = sourced(&c.moddeg);
        let [manin, manin_prov, manin_at] = sourced(&c.manin);
        vec![
            c.label.clone().unwrap_or_default(),
            ainvs(&c.minimal_model),
            c.conductor.value().to_string(),
            c.two_torsion_rank.to_string(),
            moddeg,
            moddeg_prov,
            moddeg_at,
            manin,
            manin_prov,
            manin_at,
            self.d.value().to_string(),
            self.twist_conductor.as_ref().map(|f| f.value().to_string()).unwrap_or_default(),
            self.twist_conductor
                .as_ref()
                .map(|f| f.factors().iter().map(|(p, e)| format!("{p}^{e}")).collect::<Vec<_>>().join(";"))
                .unwrap_or_default(),
            self.prime_set
                .as_ref()
                .map(|ps| ps.iter().map(|c| format!("{}:{}:{}", c.p, c.a_p, c.contribution_v2)).collect::<Vec<_>>().join(";"))
                .unwrap_or_default(),
            s(self.lower_bound_exact),
            s(self.lower_bound_torsion),
            s(self.rank_upper_exact),
            s(self.rank_upper_coarse),
            s(self.threshold),
            self.verdict.to_string(),
            self.assumptions.iter().map(|a| a.tag()).collect::<Vec<_>>().join(";"),
            self.certified_by.map(|c| c.tag().to_string()).unwrap_or_default(),
            self.twist_model.as_ref().map(ainvs).unwrap_or_default(),
            self.faltings_delta_v2.as_ref().map(|(q, _)| rational_string(q)).unwrap_or_default(),
            self.faltings_delta_v2.as_ref().map(|(_, ok)| ok.to_string()).unwrap_or_default(),
            self.detail.clone().unwrap_or_default(),
        ]
    }
}

