//! The sum-ordering inequality at the core of every registered bound, in both
//! monotonicity directions: for positive sequences ordered the same way over
//! 1..n, (mean x)(mean y) <= mean(xy); ordered opposite ways, the inequality
//! reverses. Also the mechanical bound-derivation rule built on it, and the
//! product bound (sum a)(sum 1/a) >= n^2 used by the reciprocal chains.

use serde::Serialize;

use crate::expr::{Expr, Var};
use crate::identity::Identity;
use crate::numeric::Rat;
use crate::sequence::{MonotonicityClass, SequenceDef, TermError};

/// Relative ordering of two sequences over the checked range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Alignment {
    /// Both nondecreasing or both nonincreasing (constant counts as both).
    Same,
    /// One nondecreasing, the other nonincreasing.
    Opposite,
    /// At least one sequence is not monotone over the range.
    Indeterminate,
}

/// Which way the mean inequality must go for a given alignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpectedRelation {
    ProductLeMean,
    ProductGeMean,
    /// A constant sequence forces exact equality in both directions.
    Equal,
}

/// One exact check of the mean inequality at a fixed n.
///
/// `satisfied` is `None` when the alignment is indeterminate: a non-monotone
/// input makes neither direction expected, but the means are still reported.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ChebyshevCheck {
    pub x_id: String,
    pub y_id: String,
    pub n: u64,
    pub mean_x: Rat,
    pub mean_y: Rat,
    pub mean_xy: Rat,
    pub x_class: MonotonicityClassTag,
    pub y_class: MonotonicityClassTag,
    /// Whether every term of x (resp. y) is strictly positive over 1..n.
    /// Recorded, not enforced: the inequality itself needs only monotonicity.
    pub x_positive: bool,
    pub y_positive: bool,
    pub alignment: Alignment,
    pub expected: Option<ExpectedRelation>,
    pub satisfied: Option<bool>,
    pub equality: bool,
}

/// Serializable mirror of [`MonotonicityClass`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MonotonicityClassTag {
    Constant,
    Nondecreasing,
    Nonincreasing,
    None,
}

impl From<MonotonicityClass> for MonotonicityClassTag {
    fn from(class: MonotonicityClass) -> Self {
        match class {
            MonotonicityClass::Constant => MonotonicityClassTag::Constant,
            MonotonicityClass::Nondecreasing => MonotonicityClassTag::Nondecreasing,
            MonotonicityClass::Nonincreasing => MonotonicityClassTag::Nonincreasing,
            MonotonicityClass::Mixed => MonotonicityClassTag::None,
        }
    }
}

/// Determines alignment and the expected relation from two classifications.
/// Order matters: non-monotone first, then the constant (equality) case.
fn align(x: MonotonicityClass, y: MonotonicityClass) -> (Alignment, Option<ExpectedRelation>) {
    use MonotonicityClass::{Constant, Mixed};
    if x == Mixed || y == Mixed {
        return (Alignment::Indeterminate, None);
    }
    if x == Constant || y == Constant {
        return (Alignment::Same, Some(ExpectedRelation::Equal));
    }
    if x == y {
        (Alignment::Same, Some(ExpectedRelation::ProductLeMean))
    } else {
        (Alignment::Opposite, Some(ExpectedRelation::ProductGeMean))
    }
}

/// Incremental per-sequence state for a sweep: running sum, cumulative
/// monotonicity flags, and positivity.
struct Tracker {
    sum: Rat,
    prev: Option<Rat>,
    rose: bool,
    fell: bool,
    positive: bool,
}

impl Tracker {
    fn new() -> Tracker {
        Tracker {
            sum: Rat::zero(),
            prev: None,
            rose: false,
            fell: false,
            positive: true,
        }
    }

    fn push(&mut self, term: Rat) {
        self.sum = &self.sum + &term;
        if !term.is_positive() {
            self.positive = false;
        }
        if let Some(prev) = &self.prev {
            match prev.cmp(&term) {
                std::cmp::Ordering::Less => self.rose = true,
                std::cmp::Ordering::Greater => self.fell = true,
                std::cmp::Ordering::Equal => {}
            }
        }
        self.prev = Some(term);
    }

    fn class(&self) -> MonotonicityClass {
        match (self.rose, self.fell) {
            (false, false) => MonotonicityClass::Constant,
            (true, false) => MonotonicityClass::Nondecreasing,
            (false, true) => MonotonicityClass::Nonincreasing,
            (true, true) => MonotonicityClass::Mixed,
        }
    }
}

fn build_check(
    x_id: &str,
    y_id: &str,
    n: u64,
    x: &Tracker,
    y: &Tracker,
    sum_xy: &Rat,
) -> ChebyshevCheck {
    let count = Rat::from_int(n);
    let mean_x = &x.sum / &count;
    let mean_y = &y.sum / &count;
    let mean_xy = sum_xy / &count;
    let product = &mean_x * &mean_y;
    let (alignment, expected) = align(x.class(), y.class());
    let satisfied = expected.map(|e| match e {
        ExpectedRelation::ProductLeMean => product <= mean_xy,
        ExpectedRelation::ProductGeMean => product >= mean_xy,
        ExpectedRelation::Equal => product == mean_xy,
    });
    let equality = product == mean_xy;
    ChebyshevCheck {
        x_id: x_id.to_string(),
        y_id: y_id.to_string(),
        n,
        mean_x,
        mean_y,
        mean_xy,
        x_class: x.class().into(),
        y_class: y.class().into(),
        x_positive: x.positive,
        y_positive: y.positive,
        alignment,
        expected,
        satisfied,
        equality,
    }
}

/// Exact check at a single n. Evaluation errors carry the failing index.
pub fn check_chebyshev(
    x: &SequenceDef,
    y: &SequenceDef,
    n: u64,
) -> Result<ChebyshevCheck, TermError> {
    let mut checks = chebyshev_sweep(x, y, n, n)?;
    Ok(checks.pop().expect("sweep over a nonempty range"))
}

/// Checks every n in `n_min..=n_max` in one pass (terms are evaluated once).
pub fn chebyshev_sweep(
    x: &SequenceDef,
    y: &SequenceDef,
    n_min: u64,
    n_max: u64,
) -> Result<Vec<ChebyshevCheck>, TermError> {
    let mut tx = Tracker::new();
    let mut ty = Tracker::new();
    let mut sum_xy = Rat::zero();
    let mut checks = Vec::new();
    for k in 1..=n_max {
        let term_x = x.eval_term(k)?;
        let term_y = y.eval_term(k)?;
        sum_xy = &sum_xy + &(&term_x * &term_y);
        tx.push(term_x);
        ty.push(term_y);
        if k >= n_min {
            checks.push(build_check(&x.id, &y.id, k, &tx, &ty, &sum_xy));
        }
    }
    Ok(checks)
}

/// Check directly on explicit term lists (used by randomized suites).
/// Both slices must be nonempty and of equal length.
pub fn check_chebyshev_terms(x_terms: &[Rat], y_terms: &[Rat]) -> ChebyshevCheck {
    assert!(!x_terms.is_empty(), "term lists must be nonempty");
    assert_eq!(x_terms.len(), y_terms.len(), "term lists must have equal length");
    let mut tx = Tracker::new();
    let mut ty = Tracker::new();
    let mut sum_xy = Rat::zero();
    for (a, b) in x_terms.iter().zip(y_terms) {
        sum_xy = &sum_xy + &(a * b);
        tx.push(a.clone());
        ty.push(b.clone());
    }
    build_check("x", "y", x_terms.len() as u64, &tx, &ty, &sum_xy)
}

/// Direction of a derived bound on the plain sum of y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
}

impl Relation {
    pub fn token(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
        }
    }

    pub fn holds(self, lhs: &Rat, rhs: &Rat) -> bool {
        match self {
            Relation::Le => lhs <= rhs,
            Relation::Ge => lhs >= rhs,
        }
    }
}

impl std::fmt::Display for Relation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.token())
    }
}

/// A bound on `sum y` produced mechanically from the mean inequality:
/// clearing denominators in (sum x / n)(sum y / n) vs (sum xy / n) gives
/// `sum y  <=|>=  n * closed(sum xy) / closed(sum x)`.
#[derive(Debug, Clone)]
pub struct DerivedBound {
    pub x_id: String,
    pub y_id: String,
    pub xy_identity_id: String,
    pub x_power_sum_id: String,
    pub relation: Relation,
    pub rhs: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DeriveError {
    #[error("identity {identity}: summand at k={k} is {found}, expected {expected}")]
    SummandMismatch {
        identity: String,
        k: u64,
        expected: Rat,
        found: Rat,
    },
    #[error("weight {x_id} is not strictly positive at k={k}; dividing by its sum would not preserve direction")]
    NonpositiveWeight { x_id: String, k: u64 },
    #[error("alignment must be same or opposite to fix a direction")]
    IndeterminateAlignment,
    #[error("{0}")]
    Eval(#[from] TermError),
}

/// How many leading terms the summand-compatibility spot-check evaluates.
const DERIVE_SPOT_CHECK: u64 = 20;

/// Builds the bound `sum y <= (or >=) n * closed(xy) / closed(x)`.
///
/// `xy_identity` must sum the termwise product x*y and `x_power_sum` must sum
/// x itself; both are validated by exact evaluation at k <= 20 rather than
/// symbolically. The direction is <= for same alignment and >= for opposite.
pub fn derive_bound(
    x: &SequenceDef,
    y: &SequenceDef,
    xy_identity: &Identity,
    x_power_sum: &Identity,
    alignment: Alignment,
) -> Result<DerivedBound, DeriveError> {
    let relation = match alignment {
        Alignment::Same => Relation::Le,
        Alignment::Opposite => Relation::Ge,
        Alignment::Indeterminate => return Err(DeriveError::IndeterminateAlignment),
    };
    for k in 1..=DERIVE_SPOT_CHECK {
        let xk = x.eval_term(k)?;
        let yk = y.eval_term(k)?;
        if !xk.is_positive() {
            return Err(DeriveError::NonpositiveWeight { x_id: x.id.clone(), k });
        }
        let product = &xk * &yk;
        let xy_term = xy_identity.summand.eval_term(k)?;
        if xy_term != product {
            return Err(DeriveError::SummandMismatch {
                identity: xy_identity.id.clone(),
                k,
                expected: product,
                found: xy_term,
            });
        }
        let x_term = x_power_sum.summand.eval_term(k)?;
        if x_term != xk {
            return Err(DeriveError::SummandMismatch {
                identity: x_power_sum.id.clone(),
                k,
                expected: xk,
                found: x_term,
            });
        }
    }
    let rhs = Expr::Div(
        Box::new(Expr::Mul(
            Box::new(Expr::Var(Var::N)),
            Box::new(xy_identity.closed_form.clone()),
        )),
        Box::new(x_power_sum.closed_form.clone()),
    );
    Ok(DerivedBound {
        x_id: x.id.clone(),
        y_id: y.id.clone(),
        xy_identity_id: xy_identity.id.clone(),
        x_power_sum_id: x_power_sum.id.clone(),
        relation,
        rhs,
    })
}

/// Exact check of `(sum a)(sum 1/a) >= n^2` for strictly positive a.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ReciprocalCheck {
    pub n: u64,
    pub sum: Rat,
    pub sum_recip: Rat,
    pub product: Rat,
    pub satisfied: bool,
    pub equality: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReciprocalError {
    #[error("term at k={k} is {value}, but the product bound needs strictly positive terms")]
    NonpositiveTerm { k: u64, value: Rat },
    #[error("{0}")]
    Eval(#[from] TermError),
}

pub fn reciprocal_bound(a: &SequenceDef, n: u64) -> Result<ReciprocalCheck, ReciprocalError> {
    let mut sum = Rat::zero();
    let mut sum_recip = Rat::zero();
    for k in 1..=n {
        let term = a.eval_term(k)?;
        if !term.is_positive() {
            return Err(ReciprocalError::NonpositiveTerm { k, value: term });
        }
        sum_recip = &sum_recip + &term.recip().expect("positive term");
        sum = &sum + &term;
    }
    let product = &sum * &sum_recip;
    let floor = Rat::from_int(n * n);
    Ok(ReciprocalCheck {
        n,
        satisfied: product >= floor,
        equality: product == floor,
        sum,
        sum_recip,
        product,
    })
}
