//! Batch verification over the whole registry: parallel sweeps with
//! deterministic aggregation, first-counterexample search, user claim files,
//! and the process exit-code policy.

use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::chebyshev::Relation;
use crate::claims::{builtin_claims, verify_claim, BoundClaim, ClaimVariant};
use crate::expr::{self, Expr};
use crate::identity::{builtin_identities, verify_identity, verify_telescope, Identity};
use crate::numeric::Rat;
use crate::report::{Counterexample, RangeReport};
use crate::sequence::{builtin_sequences, SequenceDef};

/// Everything verifiable: sequences, identities, claims. Immutable after
/// construction apart from loading user claims.
pub struct Registry {
    pub sequences: Vec<SequenceDef>,
    pub identities: Vec<Identity>,
    pub claims: Vec<BoundClaim>,
}

impl Registry {
    pub fn builtin() -> Registry {
        Registry {
            sequences: builtin_sequences(),
            identities: builtin_identities(),
            claims: builtin_claims(),
        }
    }

    /// A registry holding only the given user claims (used by `check`).
    pub fn from_user_claims(claims: Vec<BoundClaim>) -> Registry {
        Registry { sequences: Vec::new(), identities: Vec::new(), claims }
    }

    pub fn identity(&self, id: &str) -> Option<&Identity> {
        self.identities.iter().find(|i| i.id == id)
    }

    pub fn claim(&self, id: &str) -> Option<&BoundClaim> {
        self.claims.iter().find(|c| c.id == id)
    }
}

/// Sweep configuration. `workers: None` leaves the thread count to the
/// global pool.
#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub n_min: u64,
    pub n_max: u64,
    pub workers: Option<usize>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { n_min: 1, n_max: 200, workers: None }
    }
}

enum Task<'a> {
    Identity(&'a Identity),
    Telescope(&'a Identity),
    Claim(&'a BoundClaim),
}

impl Task<'_> {
    fn run(&self, opts: &RunOptions) -> Option<RangeReport> {
        match self {
            Task::Identity(identity) => Some(verify_identity(identity, opts.n_min, opts.n_max)),
            Task::Telescope(identity) => verify_telescope(identity, opts.n_min, opts.n_max),
            Task::Claim(claim) => Some(verify_claim(claim, opts.n_min, opts.n_max)),
        }
    }
}

/// Verifies every registry subject: each identity against its closed form,
/// each telescoping witness, and each claim. A subject that errors yields an
/// errored report rather than aborting the run. Reports come back sorted by
/// (subject id, kind) regardless of how the work was scheduled.
pub fn run_all(registry: &Registry, opts: &RunOptions) -> Vec<RangeReport> {
    let mut tasks = Vec::new();
    for identity in &registry.identities {
        tasks.push(Task::Identity(identity));
        if identity.witness.is_some() {
            tasks.push(Task::Telescope(identity));
        }
    }
    for claim in &registry.claims {
        tasks.push(Task::Claim(claim));
    }

    let run = || -> Vec<RangeReport> {
        tasks.par_iter().filter_map(|task| task.run(opts)).collect()
    };
    let mut reports = match opts.workers {
        Some(workers) => rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("worker pool")
            .install(run),
        None => run(),
    };
    reports.sort_by(|a, b| {
        a.subject_id
            .cmp(&b.subject_id)
            .then(a.subject_kind.cmp(&b.subject_kind))
    });
    reports
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown subject id `{0}` (not a registered identity or claim)")]
pub struct UnknownSubject(pub String);

/// Scans n = 1, 2, ... and returns the first index where the subject fails,
/// with both exact sides; `None` when it holds through `n_max`. Stops at the
/// first violation rather than completing the sweep.
pub fn search_counterexample(
    registry: &Registry,
    subject_id: &str,
    n_max: u64,
) -> Result<Option<Counterexample>, UnknownSubject> {
    if let Some(identity) = registry.identity(subject_id) {
        let mut sum = Rat::zero();
        for n in 1..=n_max {
            let Ok(term) = identity.summand.eval_term(n) else { return Ok(None) };
            sum = &sum + &term;
            let Ok(closed) = identity.closed_form.eval(&expr::Bindings::n(n)) else {
                return Ok(None);
            };
            if sum != closed {
                return Ok(Some(Counterexample { n, lhs: sum, rhs: closed }));
            }
        }
        return Ok(None);
    }
    if let Some(claim) = registry.claim(subject_id) {
        let mut sum = Rat::zero();
        for n in 1..=n_max {
            let Ok(term) = claim.summand.eval_term(n) else { return Ok(None) };
            sum = &sum + &term;
            let Ok(rhs) = claim.rhs.eval(&expr::Bindings::n(n)) else { return Ok(None) };
            if !claim.relation.holds(&sum, &rhs) {
                return Ok(Some(Counterexample { n, lhs: sum, rhs }));
            }
        }
        return Ok(None);
    }
    Err(UnknownSubject(subject_id.to_string()))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClaimFileError {
    #[error("{path}:{line}: {message}")]
    Malformed { path: String, line: usize, message: String },
    #[error("{path}:{line}: expression error at offset {offset}: {message}")]
    Expr { path: String, line: usize, offset: usize, message: String },
    #[error("{path}:{line}: duplicate claim name `{name}`")]
    Duplicate { path: String, line: usize, name: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

/// Parses a line-oriented claim file. Grammar per line:
/// `claim <name> : sum <expr-in-k> (<=|>=) <expr-in-n>`; `#` starts a
/// comment; blank lines are ignored. Claims are registered as
/// `user.<name>` and names must be unique within the file.
pub fn load_claim_file(path: &Path) -> Result<Vec<BoundClaim>, ClaimFileError> {
    let display = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| ClaimFileError::Io {
        path: display.clone(),
        message: e.to_string(),
    })?;
    parse_claim_file(&display, &text)
}

pub fn parse_claim_file(path: &str, text: &str) -> Result<Vec<BoundClaim>, ClaimFileError> {
    let mut claims: Vec<BoundClaim> = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let malformed = |message: String| ClaimFileError::Malformed {
            path: path.to_string(),
            line: line_no,
            message,
        };
        let rest = line
            .strip_prefix("claim")
            .filter(|r| r.starts_with(char::is_whitespace))
            .ok_or_else(|| malformed("expected line to start with `claim <name> :`".into()))?;
        let (name, rest) = match rest.split_once(':') {
            Some((name, rest)) => (name.trim(), rest),
            None => return Err(malformed("missing `:` after the claim name".into())),
        };
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        {
            return Err(malformed(format!(
                "claim name `{name}` must be nonempty alphanumeric/underscore/dash"
            )));
        }
        let (relation, lhs_text, rhs_text) = if let Some(pos) = rest.find("<=") {
            (Relation::Le, &rest[..pos], &rest[pos + 2..])
        } else if let Some(pos) = rest.find(">=") {
            (Relation::Ge, &rest[..pos], &rest[pos + 2..])
        } else {
            return Err(malformed("missing relation token (`<=` or `>=`)".into()));
        };
        let summand_text = lhs_text
            .trim()
            .strip_prefix("sum")
            .filter(|r| r.starts_with(char::is_whitespace))
            .ok_or_else(|| malformed("left side must be `sum <expr-in-k>`".into()))?;
        let id = format!("user.{name}");
        if claims.iter().any(|c| c.id == id) {
            return Err(ClaimFileError::Duplicate {
                path: path.to_string(),
                line: line_no,
                name: name.to_string(),
            });
        }
        let summand = parse_side(path, line_no, summand_text, Side::Summand)?;
        let rhs = parse_side(path, line_no, rhs_text, Side::Bound)?;
        let summand = SequenceDef { id: id.clone(), term: summand, description: String::new() };
        claims.push(BoundClaim {
            id,
            summand,
            relation,
            rhs,
            variant: ClaimVariant::User,
            derivation: None,
            corrected_sibling: None,
            rhs_matches_derivation: true,
            note: None,
        });
    }
    Ok(claims)
}

enum Side {
    Summand,
    Bound,
}

fn parse_side(path: &str, line: usize, text: &str, side: Side) -> Result<Expr, ClaimFileError> {
    let expr = expr::parse(text).map_err(|e| ClaimFileError::Expr {
        path: path.to_string(),
        line,
        offset: e.offset(),
        message: e.to_string(),
    })?;
    let (uses_k, uses_n) = expr.variables();
    let violation = match side {
        Side::Summand if uses_n => Some("the summand must be an expression in k only"),
        Side::Bound if uses_k => Some("the bound must be an expression in n only"),
        _ => None,
    };
    match violation {
        Some(message) => Err(ClaimFileError::Expr {
            path: path.to_string(),
            line,
            offset: 0,
            message: message.to_string(),
        }),
        None => Ok(expr),
    }
}

/// Exit-code policy: 0 when every subject holds (refuted printed variants
/// with a corrected sibling are exempt unless strict mode), 1 when any
/// subject is refuted or errored. Usage and parse errors exit 2 upstream.
pub fn exit_code(reports: &[RangeReport], strict_printed: bool) -> i32 {
    if reports.iter().any(|r| r.status.fails_run(strict_printed)) {
        1
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::BigInt;
    use crate::report::{ReportStatus, SubjectKind};

    fn rat(n: i64, d: i64) -> Rat {
        Rat::new(BigInt::from(n), BigInt::from(d)).unwrap()
    }

    #[test]
    fn run_all_produces_sorted_complete_reports() {
        let registry = Registry::builtin();
        let opts = RunOptions { n_min: 1, n_max: 30, workers: Some(2) };
        let reports = run_all(&registry, &opts);
        // 16 identities + 13 telescoping witnesses + 13 claims.
        assert_eq!(reports.len(), 42);
        let keys: Vec<(String, SubjectKind)> = reports
            .iter()
            .map(|r| (r.subject_id.clone(), r.subject_kind))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert!(reports.iter().all(|r| r.n_max == 30));
    }

    #[test]
    fn worker_counts_do_not_change_serialized_output() {
        let registry = Registry::builtin();
        let serialize = |workers| {
            let opts = RunOptions { n_min: 1, n_max: 25, workers: Some(workers) };
            serde_json::to_string(&run_all(&registry, &opts)).unwrap()
        };
        let single = serialize(1);
        assert_eq!(single, serialize(3));
        assert_eq!(single, serialize(8));
    }

    #[test]
    fn search_finds_known_first_failures() {
        let registry = Registry::builtin();
        let hit = search_counterexample(&registry, "I2p", 50).unwrap().unwrap();
        assert_eq!((hit.n, &hit.lhs, &hit.rhs), (1, &rat(3, 1), &rat(4, 1)));
        let hit = search_counterexample(&registry, "I7p", 50).unwrap().unwrap();
        assert_eq!((hit.n, &hit.lhs, &hit.rhs), (2, &rat(25, 63), &rat(3, 5)));
        assert!(search_counterexample(&registry, "app1", 200).unwrap().is_none());
        let err = search_counterexample(&registry, "nope", 10).unwrap_err();
        assert_eq!(err, UnknownSubject("nope".into()));
    }

    #[test]
    fn claim_file_round_trip() {
        let text = "\
# factorial bound
claim myapp1 : sum k! <= 2*((n+1)!-1)/(n+1)
claim bad : sum k! >= (n+1)!
";
        let claims = parse_claim_file("test.ineq", text).unwrap();
        assert_eq!(claims.len(), 2);
        assert_eq!(claims[0].id, "user.myapp1");
        assert_eq!(claims[0].variant, ClaimVariant::User);
        let good = verify_claim(&claims[0], 1, 50);
        assert!(good.all_hold);
        let bad = verify_claim(&claims[1], 1, 5);
        assert_eq!(bad.status, ReportStatus::Refuted);
        assert_eq!(bad.counterexamples[0].n, 1);
        assert_eq!(bad.counterexamples[0].lhs, rat(1, 1));
        assert_eq!(bad.counterexamples[0].rhs, rat(2, 1));
    }

    #[test]
    fn loaded_claims_are_searchable() {
        let claims = parse_claim_file("f", "claim droop : sum k! >= (n+1)!\n").unwrap();
        let registry = Registry::from_user_claims(claims);
        let hit = search_counterexample(&registry, "user.droop", 10).unwrap().unwrap();
        assert_eq!((hit.n, &hit.lhs, &hit.rhs), (1, &rat(1, 1), &rat(2, 1)));
    }

    #[test]
    fn claim_file_reports_missing_relation() {
        let err = parse_claim_file("test.ineq", "claim x : k!\n").unwrap_err();
        match err {
            ClaimFileError::Malformed { line, message, .. } => {
                assert_eq!(line, 1);
                assert!(message.contains("relation token"), "{message}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn claim_file_rejects_duplicates_and_bad_expressions() {
        let dup = "claim a : sum k <= n\nclaim a : sum k <= n\n";
        assert!(matches!(
            parse_claim_file("f", dup).unwrap_err(),
            ClaimFileError::Duplicate { line: 2, .. }
        ));
        let syntax = "claim a : sum (k <= n\n";
        match parse_claim_file("f", syntax).unwrap_err() {
            ClaimFileError::Expr { line: 1, .. } => {}
            other => panic!("unexpected error {other:?}"),
        }
        let wrong_var = "claim a : sum n <= n\n";
        match parse_claim_file("f", wrong_var).unwrap_err() {
            ClaimFileError::Expr { message, .. } => {
                assert!(message.contains("in k only"), "{message}");
            }
            other => panic!("unexpected error {other:?}"),
        }
        let wrong_bound = "claim a : sum k <= k\n";
        match parse_claim_file("f", wrong_bound).unwrap_err() {
            ClaimFileError::Expr { message, .. } => {
                assert!(message.contains("in n only"), "{message}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn exit_codes_follow_strictness_policy() {
        let registry = Registry::builtin();
        let reports = run_all(&registry, &RunOptions { n_min: 1, n_max: 20, workers: Some(2) });
        let statuses: Vec<ReportStatus> = reports.iter().map(|r| r.status).collect();
        assert!(statuses.contains(&ReportStatus::RefutedAsPrinted));
        assert!(!statuses.contains(&ReportStatus::Refuted));
        assert!(!statuses.contains(&ReportStatus::Errored));
        assert_eq!(exit_code(&reports, false), 0);
        assert_eq!(exit_code(&reports, true), 1);
    }

    #[test]
    fn refuted_printed_subjects_are_exactly_the_known_errata() {
        let registry = Registry::builtin();
        let reports = run_all(&registry, &RunOptions { n_min: 1, n_max: 20, workers: None });
        let mut refuted: Vec<(&str, &str)> = reports
            .iter()
            .filter(|r| r.status == ReportStatus::RefutedAsPrinted)
            .map(|r| (r.subject_id.as_str(), r.subject_kind.label()))
            .collect();
        refuted.sort();
        assert_eq!(
            refuted,
            [
                ("I2p", "identity"),
                ("I4p", "identity"),
                ("I7p", "identity"),
                ("app6-printed", "claim"),
                ("app7-printed", "claim"),
            ]
        );
    }
}
