//! Report structures shared by every verification sweep, plus JSON, CSV,
//! and plain-table rendering.
//!
//! JSON is the canonical machine output; the CSV is a flattened projection
//! with one row per `(subject, n)` comparison. Everything serialized must be
//! byte-identical across runs and worker counts, so wall-clock timing and
//! the bulky per-index rows are kept out of the JSON.

use std::fmt::Write as _;

use serde::Serialize;

use crate::numeric::Rat;

/// What a report covers. `Telescope` reports range over the term index of a
/// per-term witness check rather than over sum lengths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SubjectKind {
    Identity,
    Claim,
    Telescope,
}

impl SubjectKind {
    pub fn label(self) -> &'static str {
        match self {
            SubjectKind::Identity => "identity",
            SubjectKind::Claim => "claim",
            SubjectKind::Telescope => "telescope",
        }
    }
}

/// Outcome category. A refuted printed variant that has a corrected sibling
/// registered is `RefutedAsPrinted`: a documented discrepancy rather than a
/// build failure, unless strict mode says otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportStatus {
    Pass,
    Refuted,
    RefutedAsPrinted,
    Errored,
}

impl ReportStatus {
    /// Whether this status should make the whole run fail.
    pub fn fails_run(self, strict_printed: bool) -> bool {
        match self {
            ReportStatus::Pass => false,
            ReportStatus::RefutedAsPrinted => strict_printed,
            ReportStatus::Refuted | ReportStatus::Errored => true,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ReportStatus::Pass => "pass",
            ReportStatus::Refuted => "refuted",
            ReportStatus::RefutedAsPrinted => "refuted-as-printed",
            ReportStatus::Errored => "errored",
        }
    }
}

/// One exact comparison at one index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub n: u64,
    pub lhs: Rat,
    pub rhs: Rat,
    pub holds: bool,
    pub equality: bool,
    /// Slack normalized so that 1 means the bound is attained and smaller
    /// values mean more slack; `None` for equality subjects.
    pub tightness: Option<Rat>,
}

/// An index where the subject fails, with both exact sides.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub n: u64,
    pub lhs: Rat,
    pub rhs: Rat,
}

/// The tightest point of a bound over the swept range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinTightness {
    pub n: u64,
    pub ratio: Rat,
}

/// Result of sweeping one subject over a contiguous index range.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RangeReport {
    pub subject_id: String,
    pub subject_kind: SubjectKind,
    pub n_min: u64,
    pub n_max: u64,
    pub all_hold: bool,
    pub status: ReportStatus,
    pub counterexamples: Vec<Counterexample>,
    /// Indices where an inequality is exactly attained; only populated for
    /// claim subjects (for identity and telescope subjects holding *is*
    /// equality, so the list would just repeat the passing range).
    pub equality_points: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_tightness: Option<MinTightness>,
    /// For printed variants: the id of the corrected sibling subject.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corrected_sibling: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Wall-clock cost; excluded from JSON so output is run-to-run stable.
    #[serde(skip)]
    pub runtime_millis: u64,
    /// Per-index rows backing the CSV projection; excluded from JSON.
    #[serde(skip)]
    pub verdicts: Vec<Verdict>,
}

/// Aggregates a verdict list into the summary fields of a report.
pub struct Summary {
    pub all_hold: bool,
    pub counterexamples: Vec<Counterexample>,
    pub equality_points: Vec<u64>,
    pub min_tightness: Option<MinTightness>,
}

pub fn summarize(verdicts: &[Verdict]) -> Summary {
    let mut counterexamples = Vec::new();
    let mut equality_points = Vec::new();
    let mut min_tightness: Option<MinTightness> = None;
    for v in verdicts {
        if !v.holds {
            counterexamples.push(Counterexample {
                n: v.n,
                lhs: v.lhs.clone(),
                rhs: v.rhs.clone(),
            });
        }
        if v.equality {
            equality_points.push(v.n);
        }
        if let Some(ratio) = &v.tightness {
            let tighter = match &min_tightness {
                Some(current) => *ratio < current.ratio,
                None => true,
            };
            if tighter {
                min_tightness = Some(MinTightness {
                    n: v.n,
                    ratio: ratio.clone(),
                });
            }
        }
    }
    Summary {
        all_hold: counterexamples.is_empty(),
        counterexamples,
        equality_points,
        min_tightness,
    }
}

/// Top-level JSON document for a verification run.
#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VerifyDocument {
    pub n_min: u64,
    pub n_max: u64,
    pub reports: Vec<RangeReport>,
}

impl VerifyDocument {
    pub fn to_json_pretty(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serialization");
        text.push('\n');
        text
    }
}

/// One row per `(subject, index)` comparison, exact values alongside decimal
/// approximations for spreadsheet use. Cells never contain commas, so no
/// quoting is needed.
pub fn to_csv(reports: &[RangeReport]) -> String {
    let mut out =
        String::from("subjectId,kind,n,lhs,lhsDec,rhs,rhsDec,holds,equality,tightness,tightnessDec\n");
    for report in reports {
        for v in &report.verdicts {
            let (ratio, ratio_dec) = match &v.tightness {
                Some(r) => (r.to_string(), r.decimal()),
                None => (String::new(), String::new()),
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                report.subject_id,
                report.subject_kind.label(),
                v.n,
                v.lhs,
                v.lhs.decimal(),
                v.rhs,
                v.rhs.decimal(),
                v.holds,
                v.equality,
                ratio,
                ratio_dec,
            );
        }
    }
    out
}

/// Human-readable summary, one line per report plus a totals line.
pub fn render_table(reports: &[RangeReport]) -> String {
    let mut out = format!(
        "{:<16} {:<10} {:<9} {:<19} {:>5} {:>6} {:>4} {:<22} {:>6}\n",
        "subject", "kind", "range", "status", "fails", "first", "eq", "min-tightness", "ms"
    );
    let mut totals = [0usize; 4];
    for r in reports {
        let idx = match r.status {
            ReportStatus::Pass => 0,
            ReportStatus::RefutedAsPrinted => 1,
            ReportStatus::Refuted => 2,
            ReportStatus::Errored => 3,
        };
        totals[idx] += 1;
        let first = r
            .counterexamples
            .first()
            .map(|c| c.n.to_string())
            .unwrap_or_else(|| "-".to_string());
        let tightness = r
            .min_tightness
            .as_ref()
            .map(|mt| format!("{}@n={}", mt.ratio.decimal(), mt.n))
            .unwrap_or_else(|| "-".to_string());
        let _ = writeln!(
            out,
            "{:<16} {:<10} {:<9} {:<19} {:>5} {:>6} {:>4} {:<22} {:>6}",
            r.subject_id,
            r.subject_kind.label(),
            format!("{}..{}", r.n_min, r.n_max),
            r.status.label(),
            r.counterexamples.len(),
            first,
            r.equality_points.len(),
            tightness,
            r.runtime_millis,
        );
        if let Some(err) = &r.error {
            let _ = writeln!(out, "    error: {err}");
        }
    }
    let _ = writeln!(
        out,
        "{} subjects: {} pass, {} refuted-as-printed, {} refuted, {} errored",
        reports.len(),
        totals[0],
        totals[1],
        totals[2],
        totals[3],
    );
    out
}
