//! The registered bounds on factorial-style sums: each one a first-class
//! claim `sum_{k=1..n} summand(k) <= (or >=) rhs(n)` carrying the full chain
//! that produced it, so every step — not just the final statement — can be
//! re-derived and checked.
//!
//! Printed and corrected variants are separate claims. Refuting a printed
//! form is a deliberate output, never an error, and the report points to the
//! corrected sibling.

use std::time::Instant;

use serde::Serialize;

use crate::chebyshev::{derive_bound, Alignment, DeriveError, Relation};
use crate::expr::{self, Bindings, Expr};
use crate::identity::Identity;
use crate::numeric::Rat;
use crate::report::{summarize, RangeReport, ReportStatus, SubjectKind, Verdict};
use crate::sequence::{SequenceDef, TermError};

/// Whether a claim transcribes the printed statement, corrects it to match
/// its own derivation, or came from a user claim file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClaimVariant {
    Printed,
    Corrected,
    User,
}

/// An index-shift step: the derived bound applies to the shifted sum, and the
/// stated claim adds the leading term back. Concretely
/// `rhs(n) = addedTerm + derivedRhs(n - shift)` for `n > shift`.
#[derive(Debug, Clone)]
pub struct Reindex {
    pub shift: u64,
    pub added_term: Expr,
}

/// How a claim's right-hand side was produced.
#[derive(Debug, Clone)]
pub enum Derivation {
    /// Mean-inequality derivation: weight x against summand y, the closed
    /// form of `sum x*y`, and the closed form of `sum x`.
    Chebyshev {
        x: String,
        y: String,
        xy_identity: String,
        x_power_sum: String,
        alignment: Alignment,
        reindex: Option<Reindex>,
    },
    /// `sum 1/a >= n^2 / sum a`, chained through an upper bound on `sum a`.
    ReciprocalChain { base: String },
}

/// A bound claim over finite partial sums.
#[derive(Debug, Clone)]
pub struct BoundClaim {
    pub id: String,
    pub summand: SequenceDef,
    pub relation: Relation,
    pub rhs: Expr,
    pub variant: ClaimVariant,
    pub derivation: Option<Derivation>,
    pub corrected_sibling: Option<String>,
    /// False when the printed rhs differs from what the recorded derivation
    /// yields; the disagreement is part of the registry, not an error.
    pub rhs_matches_derivation: bool,
    pub note: Option<String>,
}

/// Serializable registry entry (expressions as source text).
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ClaimDoc {
    pub id: String,
    pub summand: String,
    pub relation: Relation,
    pub rhs: String,
    pub variant: ClaimVariant,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub derivation: Option<DerivationDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corrected_sibling: Option<String>,
    pub rhs_matches_derivation: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum DerivationDoc {
    #[serde(rename = "chebyshev", rename_all = "camelCase")]
    Chebyshev {
        x: String,
        y: String,
        xy_identity: String,
        x_power_sum: String,
        alignment: Alignment,
        #[serde(skip_serializing_if = "Option::is_none")]
        reindex: Option<ReindexDoc>,
    },
    #[serde(rename = "reciprocal-chain", rename_all = "camelCase")]
    ReciprocalChain { base: String },
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ReindexDoc {
    pub shift: u64,
    pub added_term: String,
}

impl BoundClaim {
    pub fn doc(&self) -> ClaimDoc {
        ClaimDoc {
            id: self.id.clone(),
            summand: self.summand.term.to_string(),
            relation: self.relation,
            rhs: self.rhs.to_string(),
            variant: self.variant,
            derivation: self.derivation.as_ref().map(|d| match d {
                Derivation::Chebyshev { x, y, xy_identity, x_power_sum, alignment, reindex } => {
                    DerivationDoc::Chebyshev {
                        x: x.clone(),
                        y: y.clone(),
                        xy_identity: xy_identity.clone(),
                        x_power_sum: x_power_sum.clone(),
                        alignment: *alignment,
                        reindex: reindex.as_ref().map(|r| ReindexDoc {
                            shift: r.shift,
                            added_term: r.added_term.to_string(),
                        }),
                    }
                }
                Derivation::ReciprocalChain { base } => {
                    DerivationDoc::ReciprocalChain { base: base.clone() }
                }
            }),
            corrected_sibling: self.corrected_sibling.clone(),
            rhs_matches_derivation: self.rhs_matches_derivation,
            note: self.note.clone(),
        }
    }

    fn status_for(&self, all_hold: bool, errored: bool) -> ReportStatus {
        if errored {
            ReportStatus::Errored
        } else if all_hold {
            ReportStatus::Pass
        } else if self.variant == ClaimVariant::Printed && self.corrected_sibling.is_some() {
            ReportStatus::RefutedAsPrinted
        } else {
            ReportStatus::Refuted
        }
    }
}

/// Exact verdicts for every n in `n_min..=n_max`, aggregated into a report
/// with counterexamples, equality points, and the tightest point.
pub fn verify_claim(claim: &BoundClaim, n_min: u64, n_max: u64) -> RangeReport {
    let start = Instant::now();
    let mut verdicts = Vec::new();
    let mut error = None;
    let mut lhs = Rat::zero();
    for n in 1..=n_max {
        match claim.summand.eval_term(n) {
            Ok(term) => lhs = &lhs + &term,
            Err(e) => {
                error = Some(e.to_string());
                break;
            }
        }
        if n < n_min {
            continue;
        }
        let rhs = match claim.rhs.eval(&Bindings::n(n)) {
            Ok(v) => v,
            Err(e) => {
                error = Some(TermError::at_n(n, e).to_string());
                break;
            }
        };
        let holds = claim.relation.holds(&lhs, &rhs);
        let equality = lhs == rhs;
        let tightness = match claim.relation {
            Relation::Le => lhs.checked_div(&rhs).ok(),
            Relation::Ge => rhs.checked_div(&lhs).ok(),
        };
        verdicts.push(Verdict { n, lhs: lhs.clone(), rhs, holds, equality, tightness });
    }
    let summary = summarize(&verdicts);
    let all_hold = summary.all_hold && error.is_none();
    RangeReport {
        subject_id: claim.id.clone(),
        subject_kind: SubjectKind::Claim,
        n_min,
        n_max,
        all_hold,
        status: claim.status_for(all_hold, error.is_some()),
        counterexamples: summary.counterexamples,
        equality_points: summary.equality_points,
        min_tightness: summary.min_tightness,
        corrected_sibling: claim.corrected_sibling.clone(),
        error,
        runtime_millis: start.elapsed().as_millis() as u64,
        verdicts,
    }
}

/// `(n, exact ratio, 12-digit decimal)` for each n, 1 meaning the bound is
/// attained. Ratios above 1 flag indices where the claim fails.
pub fn tightness_sweep(claim: &BoundClaim, n_max: u64) -> Vec<(u64, Rat, String)> {
    verify_claim(claim, 1, n_max)
        .verdicts
        .into_iter()
        .filter_map(|v| v.tightness.map(|t| (v.n, t.clone(), t.decimal())))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DerivationError {
    #[error("unknown sequence {0}")]
    UnknownSequence(String),
    #[error("unknown identity {0}")]
    UnknownIdentity(String),
    #[error("unknown base claim {0}")]
    UnknownClaim(String),
    #[error("base claim {0} must be an upper bound to chain through")]
    BaseNotUpperBound(String),
    #[error("summand times base summand at k={k} is {product}, expected 1")]
    NotReciprocal { k: u64, product: Rat },
    #[error(transparent)]
    Derive(#[from] DeriveError),
    #[error("{0}")]
    Eval(#[from] TermError),
    #[error("chained denominator is zero at n={0}")]
    ZeroDenominator(u64),
}

/// Re-derives the claim's right-hand side from its recorded chain and
/// evaluates it at n. `Ok(None)` means the chain does not produce a value at
/// this n (a reindexed bound below its shift). For claims where
/// `rhs_matches_derivation` is false, the returned value is the chain's rhs,
/// which deliberately differs from the claim's own.
pub fn derivation_rhs(
    claim: &BoundClaim,
    sequences: &[SequenceDef],
    identities: &[Identity],
    claims: &[BoundClaim],
    n: u64,
) -> Result<Option<Rat>, DerivationError> {
    let Some(derivation) = &claim.derivation else {
        return Ok(None);
    };
    match derivation {
        Derivation::Chebyshev { x, y, xy_identity, x_power_sum, alignment, reindex } => {
            let x = find_sequence(sequences, x)?;
            let y = find_sequence(sequences, y)?;
            let xy = find_identity(identities, xy_identity)?;
            let xsum = find_identity(identities, x_power_sum)?;
            let bound = derive_bound(x, y, xy, xsum, *alignment)?;
            match reindex {
                None => Ok(Some(eval_rhs(&bound.rhs, n)?)),
                Some(r) if n > r.shift => {
                    let shifted = eval_rhs(&bound.rhs, n - r.shift)?;
                    let added = eval_rhs(&r.added_term, n)?;
                    Ok(Some(&added + &shifted))
                }
                Some(_) => Ok(None),
            }
        }
        Derivation::ReciprocalChain { base } => {
            let base = claims
                .iter()
                .find(|c| c.id == *base)
                .ok_or_else(|| DerivationError::UnknownClaim(base.clone()))?;
            if base.relation != Relation::Le {
                return Err(DerivationError::BaseNotUpperBound(base.id.clone()));
            }
            for k in 1..=20 {
                let product = &claim.summand.eval_term(k)? * &base.summand.eval_term(k)?;
                if product != Rat::one() {
                    return Err(DerivationError::NotReciprocal { k, product });
                }
            }
            let base_rhs = eval_rhs(&base.rhs, n)?;
            let floor = Rat::from_int(n).pow(2);
            floor
                .checked_div(&base_rhs)
                .map(Some)
                .map_err(|_| DerivationError::ZeroDenominator(n))
        }
    }
}

fn eval_rhs(rhs: &Expr, n: u64) -> Result<Rat, TermError> {
    rhs.eval(&Bindings::n(n)).map_err(|e| TermError::at_n(n, e))
}

fn find_sequence<'a>(
    sequences: &'a [SequenceDef],
    id: &str,
) -> Result<&'a SequenceDef, DerivationError> {
    sequences
        .iter()
        .find(|s| s.id == id)
        .ok_or_else(|| DerivationError::UnknownSequence(id.to_string()))
}

fn find_identity<'a>(
    identities: &'a [Identity],
    id: &str,
) -> Result<&'a Identity, DerivationError> {
    identities
        .iter()
        .find(|i| i.id == id)
        .ok_or_else(|| DerivationError::UnknownIdentity(id.to_string()))
}

struct Entry {
    id: &'static str,
    summand: &'static str,
    relation: Relation,
    rhs: &'static str,
    variant: ClaimVariant,
    derivation: DerivationEntry,
    corrected_sibling: Option<&'static str>,
    rhs_matches_derivation: bool,
    note: Option<&'static str>,
}

enum DerivationEntry {
    Chebyshev {
        x: &'static str,
        y: &'static str,
        xy: &'static str,
        xsum: &'static str,
        alignment: Alignment,
        reindex: Option<(u64, &'static str)>,
    },
    Chain {
        base: &'static str,
    },
}

/// Every registered bound, in registry order. Ids are stable public API.
pub fn builtin_claims() -> Vec<BoundClaim> {
    use Alignment::{Opposite, Same};
    use ClaimVariant::{Corrected, Printed};
    use Relation::{Ge, Le};
    let entries = [
        Entry {
            id: "app1",
            summand: "k!",
            relation: Le,
            rhs: "2*((n+1)!-1)/(n+1)",
            variant: Printed,
            derivation: DerivationEntry::Chebyshev {
                x: "x.k",
                y: "y.fact",
                xy: "I1",
                xsum: "P1",
                alignment: Same,
                reindex: None,
            },
            corrected_sibling: None,
            rhs_matches_derivation: true,
            note: None,
        },
        Entry {
            id: "app2-printed",
            summand: "k!",
            relation: Le,
            rhs: "3*(n+1)*(n+1)!/(n^2+3*n+5)",
            variant: Printed,
            derivation: DerivationEntry::Chebyshev {
                x: "x.k2k1",
                y: "y.fact",
                xy: "I2p",
                xsum: "P3",
                alignment: Same,
                reindex: None,
            },
            corrected_sibling: Some("app2-corrected"),
            rhs_matches_derivation: true,
            note: Some("rests on the refuted I2p; the bound itself holds because that closed form only overestimates"),
        },
        Entry {
            id: "app2-corrected",
            summand: "k!",
            relation: Le,
            rhs: "3*((n+1)*(n+1)!-1)/(n^2+3*n+5)",
            variant: Corrected,
            derivation: DerivationEntry::Chebyshev {
                x: "x.k2k1",
                y: "y.fact",
                xy: "I2c",
                xsum: "P3",
                alignment: Same,
                reindex: None,
            },
            corrected_sibling: None,
            rhs_matches_derivation: true,
            note: None,
        },
        Entry {
            id: "app3",
            summand: "1/k!",
            relation: Ge,
            rhs: "n^2*(n+1)/(2*((n+1)!-1))",
            variant: Printed,
            derivation: DerivationEntry::Chain { base: "app1" },
            corrected_sibling: None,
            rhs_matches_derivation: true,
            note: None,
        },
        Entry {
            id: "app4",
            summand: "1/k!",
            relation: Ge,
            rhs: "n^2*(n^2+3*n+5)/(3*(n+1)*(n+1)!)",
            variant: Printed,
            derivation: DerivationEntry::Chain { base: "app2-printed" },
            corrected_sibling: None,
            rhs_matches_derivation: true,
            note: Some("chains through app2-printed as stated; the final bound is checked independently of that chain"),
        },
        Entry {
            id: "app5",
            summand: "1/k!",
            relation: Ge,
            rhs: "1+(2/n)*(1-1/n!)",
            variant: Printed,
            derivation: DerivationEntry::Chebyshev {
                x: "x.k",
                y: "y.invfact_shift",
                xy: "I3",
                xsum: "P1",
                alignment: Opposite,
                reindex: Some((1, "1")),
            },
            corrected_sibling: None,
            rhs_matches_derivation: true,
            note: Some("derived for the shifted sum of 1/(k+1)!, then restated by adding the leading term 1/1!"),
        },
        Entry {
            id: "app6-printed",
            summand: "1/((k+2)^2*k!)",
            relation: Ge,
            rhs: "(2/(n+5))*(1-1/(n+2)!)",
            variant: Printed,
            derivation: DerivationEntry::Chebyshev {
                x: "x.kplus2",
                y: "y.app6",
                xy: "I4c",
                xsum: "P4",
                alignment: Opposite,
                reindex: None,
            },
            corrected_sibling: Some("app6-corrected"),
            rhs_matches_derivation: false,
            note: Some("printed rhs uses 1 - 1/(n+2)! where the product sum telescopes to 1/2 - 1/(n+2)!"),
        },
        Entry {
            id: "app6-corrected",
            summand: "1/((k+2)^2*k!)",
            relation: Ge,
            rhs: "(2/(n+5))*(1/2-1/(n+2)!)",
            variant: Corrected,
            derivation: DerivationEntry::Chebyshev {
                x: "x.kplus2",
                y: "y.app6",
                xy: "I4c",
                xsum: "P4",
                alignment: Opposite,
                reindex: None,
            },
            corrected_sibling: None,
            rhs_matches_derivation: true,
            note: None,
        },
        Entry {
            id: "app7-printed",
            summand: "1/(k*(k+1)*(k+2)!)",
            relation: Ge,
            rhs: "(6/(2*n^2+9*n+1))*(1/2-1/((n+1)*(n+2)!))",
            variant: Printed,
            derivation: DerivationEntry::Chebyshev {
                x: "x.k2_2k_2",
                y: "y.app7",
                xy: "I5",
                xsum: "P5",
                alignment: Opposite,
                reindex: None,
            },
            corrected_sibling: Some("app7-corrected"),
            rhs_matches_derivation: false,
            note: Some("printed denominator 2n^2+9n+1 differs from the weight power sum's 2n^2+9n+19"),
        },
        Entry {
            id: "app7-corrected",
            summand: "1/(k*(k+1)*(k+2)!)",
            relation: Ge,
            rhs: "(6/(2*n^2+9*n+19))*(1/2-1/((n+1)*(n+2)!))",
            variant: Corrected,
            derivation: DerivationEntry::Chebyshev {
                x: "x.k2_2k_2",
                y: "y.app7",
                xy: "I5",
                xsum: "P5",
                alignment: Opposite,
                reindex: None,
            },
            corrected_sibling: None,
            rhs_matches_derivation: true,
            note: None,
        },
        Entry {
            id: "app8",
            summand: "1/(4*k^4+1)",
            relation: Ge,
            rhs: "n/(2*n^2+2*n+1)",
            variant: Printed,
            derivation: DerivationEntry::Chebyshev {
                x: "x.4k",
                y: "y.app8",
                xy: "I6",
                xsum: "P6",
                alignment: Opposite,
                reindex: None,
            },
            corrected_sibling: None,
            rhs_matches_derivation: true,
            note: None,
        },
        Entry {
            id: "app9-printed",
            summand: "1/(4*k^4-1)",
            relation: Ge,
            rhs: "3*n/(2*n+1)^2",
            variant: Printed,
            derivation: DerivationEntry::Chebyshev {
                x: "x.k2",
                y: "y.app9",
                xy: "I7p",
                xsum: "P2",
                alignment: Opposite,
                reindex: None,
            },
            corrected_sibling: Some("app9-corrected"),
            rhs_matches_derivation: true,
            note: Some("rests on the refuted I7p; the bound itself holds, and app9-corrected carries the summand its closed form matches"),
        },
        Entry {
            id: "app9-corrected",
            summand: "1/(4*k^2-1)",
            relation: Ge,
            rhs: "3*n/(2*n+1)^2",
            variant: Corrected,
            derivation: DerivationEntry::Chebyshev {
                x: "x.k2",
                y: "y.app9c",
                xy: "I7c",
                xsum: "P2",
                alignment: Opposite,
                reindex: None,
            },
            corrected_sibling: None,
            rhs_matches_derivation: true,
            note: None,
        },
    ];
    entries.iter().map(build).collect()
}

fn build(e: &Entry) -> BoundClaim {
    let summand = SequenceDef::parse(e.id, e.summand, "").expect("builtin claim summand");
    let rhs = expr::parse(e.rhs).expect("builtin claim rhs");
    let derivation = match &e.derivation {
        DerivationEntry::Chebyshev { x, y, xy, xsum, alignment, reindex } => {
            Derivation::Chebyshev {
                x: x.to_string(),
                y: y.to_string(),
                xy_identity: xy.to_string(),
                x_power_sum: xsum.to_string(),
                alignment: *alignment,
                reindex: reindex.map(|(shift, term)| Reindex {
                    shift,
                    added_term: expr::parse(term).expect("builtin reindex term"),
                }),
            }
        }
        DerivationEntry::Chain { base } => Derivation::ReciprocalChain { base: base.to_string() },
    };
    BoundClaim {
        id: e.id.to_string(),
        summand,
        relation: e.relation,
        rhs,
        variant: e.variant,
        derivation: Some(derivation),
        corrected_sibling: e.corrected_sibling.map(str::to_string),
        rhs_matches_derivation: e.rhs_matches_derivation,
        note: e.note.map(str::to_string),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::identity::builtin_identities;
    use crate::numeric::BigInt;
    use crate::sequence::builtin_sequences;

    fn rat(n: i64, d: i64) -> Rat {
        Rat::new(BigInt::from(n), BigInt::from(d)).unwrap()
    }

    fn by_id<'a>(claims: &'a [BoundClaim], id: &str) -> &'a BoundClaim {
        claims.iter().find(|c| c.id == id).unwrap_or_else(|| panic!("no claim {id}"))
    }

    #[test]
    fn registry_order_and_variants() {
        let claims = builtin_claims();
        let ids: Vec<&str> = claims.iter().map(|c| c.id.as_str()).collect();
        assert_eq!(
            ids,
            [
                "app1",
                "app2-printed",
                "app2-corrected",
                "app3",
                "app4",
                "app5",
                "app6-printed",
                "app6-corrected",
                "app7-printed",
                "app7-corrected",
                "app8",
                "app9-printed",
                "app9-corrected",
            ]
        );
        for claim in &claims {
            assert!(claim.derivation.is_some(), "{} has no derivation", claim.id);
            if claim.id.ends_with("-printed") {
                assert_eq!(claim.variant, ClaimVariant::Printed, "{}", claim.id);
                assert!(claim.corrected_sibling.is_some(), "{}", claim.id);
            }
            if claim.id.ends_with("-corrected") {
                assert_eq!(claim.variant, ClaimVariant::Corrected, "{}", claim.id);
            }
        }
    }

    #[test]
    fn factorial_sum_bound_verdicts() {
        let claims = builtin_claims();
        let report = verify_claim(by_id(&claims, "app1"), 1, 10);
        assert!(report.all_hold);
        assert_eq!(report.equality_points, vec![1]);
        let v3 = &report.verdicts[2];
        assert_eq!(v3.lhs, rat(9, 1));
        assert_eq!(v3.rhs, rat(23, 2));
        assert_eq!(v3.tightness.as_ref().unwrap(), &rat(18, 23));
    }

    #[test]
    fn printed_lower_bounds_fail_at_one() {
        let claims = builtin_claims();
        let app6 = verify_claim(by_id(&claims, "app6-printed"), 1, 10);
        assert_eq!(app6.status, ReportStatus::RefutedAsPrinted);
        assert_eq!(app6.corrected_sibling.as_deref(), Some("app6-corrected"));
        let first = &app6.counterexamples[0];
        assert_eq!((first.n, &first.lhs, &first.rhs), (1, &rat(1, 9), &rat(5, 18)));

        let app7 = verify_claim(by_id(&claims, "app7-printed"), 1, 10);
        let first = &app7.counterexamples[0];
        assert_eq!((first.n, &first.lhs, &first.rhs), (1, &rat(1, 12), &rat(5, 24)));
    }

    #[test]
    fn shifted_reciprocal_bound_has_two_equality_points() {
        let claims = builtin_claims();
        let report = verify_claim(by_id(&claims, "app5"), 1, 10);
        assert!(report.all_hold);
        assert_eq!(report.equality_points, vec![1, 2]);
        assert_eq!(report.verdicts[1].lhs, rat(3, 2));
        assert_eq!(report.verdicts[1].rhs, rat(3, 2));
    }

    #[test]
    fn full_sweep_matches_expected_outcomes() {
        let claims = builtin_claims();
        for claim in &claims {
            let report = verify_claim(claim, 1, 200);
            match claim.id.as_str() {
                "app6-printed" | "app7-printed" => {
                    assert!(!report.all_hold, "{}", claim.id);
                    assert_eq!(report.counterexamples[0].n, 1, "{}", claim.id);
                }
                _ => assert!(report.all_hold, "{} should hold", claim.id),
            }
        }
    }

    #[test]
    fn equality_points_over_full_sweep() {
        let claims = builtin_claims();
        let expected: &[(&str, &[u64])] = &[
            ("app1", &[1]),
            ("app2-printed", &[]),
            ("app2-corrected", &[1]),
            ("app3", &[1]),
            ("app4", &[]),
            ("app5", &[1, 2]),
            ("app6-printed", &[]),
            ("app6-corrected", &[1]),
            ("app7-printed", &[]),
            ("app7-corrected", &[1]),
            ("app8", &[1]),
            ("app9-printed", &[1]),
            ("app9-corrected", &[1]),
        ];
        for (id, points) in expected {
            let report = verify_claim(by_id(&claims, id), 1, 200);
            assert_eq!(report.equality_points, *points, "{id}");
        }
    }

    #[test]
    fn tightness_examples() {
        let claims = builtin_claims();
        let app1 = tightness_sweep(by_id(&claims, "app1"), 3);
        assert_eq!(app1[2], (3, rat(18, 23), "0.782608695652".to_string()));
        let app8 = tightness_sweep(by_id(&claims, "app8"), 2);
        assert_eq!(app8[0].1, rat(1, 1));
        let app3 = tightness_sweep(by_id(&claims, "app3"), 2);
        assert_eq!(app3[1].1, rat(4, 5), "rhs 6/5 over lhs 3/2");
    }

    #[test]
    fn chains_reproduce_registered_rhs() {
        let claims = builtin_claims();
        let sequences = builtin_sequences();
        let identities = builtin_identities();
        for claim in &claims {
            for n in 1..=50u64 {
                let derived = derivation_rhs(claim, &sequences, &identities, &claims, n)
                    .unwrap_or_else(|e| panic!("{} n={n}: {e}", claim.id));
                let Some(derived) = derived else {
                    assert_eq!(claim.id, "app5", "only the reindexed claim skips n={n}");
                    assert_eq!(n, 1);
                    continue;
                };
                let stated = claim.rhs.eval(&Bindings::n(n)).unwrap();
                if claim.rhs_matches_derivation {
                    assert_eq!(derived, stated, "{} at n={n}", claim.id);
                } else {
                    assert_ne!(derived, stated, "{} at n={n} should disagree", claim.id);
                }
            }
        }
    }

    #[test]
    fn reciprocal_chain_rhs_is_square_over_base() {
        let claims = builtin_claims();
        let app1 = by_id(&claims, "app1");
        let app3 = by_id(&claims, "app3");
        for n in 1..=50u64 {
            let b = Bindings::n(n);
            let base = app1.rhs.eval(&b).unwrap();
            let expected = Rat::from_int(n).pow(2).checked_div(&base).unwrap();
            assert_eq!(app3.rhs.eval(&b).unwrap(), expected, "n={n}");
        }
    }

    #[test]
    fn reciprocal_sums_are_nondecreasing_in_n() {
        let claims = builtin_claims();
        for id in ["app3", "app4"] {
            let report = verify_claim(by_id(&claims, id), 1, 200);
            for pair in report.verdicts.windows(2) {
                assert!(pair[0].lhs <= pair[1].lhs, "{id} lhs dipped at n={}", pair[1].n);
            }
        }
    }

    #[test]
    fn user_claim_refutation_is_not_exempt() {
        let claim = BoundClaim {
            id: "user.bad".into(),
            summand: SequenceDef::parse("user.bad", "k!", "").unwrap(),
            relation: Relation::Ge,
            rhs: expr::parse("(n+1)!").unwrap(),
            variant: ClaimVariant::User,
            derivation: None,
            corrected_sibling: None,
            rhs_matches_derivation: true,
            note: None,
        };
        let report = verify_claim(&claim, 1, 5);
        assert_eq!(report.status, ReportStatus::Refuted);
        assert_eq!(report.counterexamples[0].n, 1);
    }

    #[test]
    fn claim_doc_serializes_derivation() {
        let claims = builtin_claims();
        let json = serde_json::to_string(&by_id(&claims, "app5").doc()).unwrap();
        assert!(json.contains("\"kind\":\"chebyshev\""));
        assert!(json.contains("\"xyIdentity\":\"I3\""));
        assert!(json.contains("\"reindex\":{\"shift\":1,\"addedTerm\":\"1\"}"));
        let json = serde_json::to_string(&by_id(&claims, "app3").doc()).unwrap();
        assert!(json.contains("\"kind\":\"reciprocal-chain\""));
        assert!(json.contains("\"base\":\"app1\""));
        assert!(json.contains("\"relation\":\">=\""));
    }
}
