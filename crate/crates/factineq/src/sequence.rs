//! Sequences `k -> rational` with exact partial sums and empirical
//! monotonicity classification over a finite range.

use std::fmt;

use crate::expr::{self, Bindings, EvalError, Expr, ParseError};
use crate::numeric::Rat;

/// A named term rule in the variable `k` (`n` must not occur).
#[derive(Debug, Clone)]
pub struct SequenceDef {
    pub id: String,
    pub term: Expr,
    pub description: String,
}

/// An evaluation failure pinned to the index where it happened.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("at {var}={at}: {source}")]
pub struct TermError {
    pub var: char,
    pub at: u64,
    pub source: EvalError,
}

impl TermError {
    pub fn at_k(at: u64, source: EvalError) -> Self {
        TermError { var: 'k', at, source }
    }

    pub fn at_n(at: u64, source: EvalError) -> Self {
        TermError { var: 'n', at, source }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SequenceError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("sequence term must use only `k`, but references `n`")]
    UsesN,
}

impl SequenceDef {
    /// Parses a term rule, rejecting references to `n`.
    pub fn parse(id: &str, term: &str, description: &str) -> Result<SequenceDef, SequenceError> {
        let term = expr::parse(term)?;
        let (_, uses_n) = term.variables();
        if uses_n {
            return Err(SequenceError::UsesN);
        }
        Ok(SequenceDef {
            id: id.to_string(),
            term,
            description: description.to_string(),
        })
    }

    /// Exact value of the term at index `k >= 1`.
    pub fn eval_term(&self, k: u64) -> Result<Rat, TermError> {
        self.term
            .eval(&Bindings::k(k))
            .map_err(|source| TermError::at_k(k, source))
    }

    /// Checks the term evaluates everywhere on `1..=k_max`.
    pub fn validate(&self, k_max: u64) -> Result<(), TermError> {
        for k in 1..=k_max {
            self.eval_term(k)?;
        }
        Ok(())
    }

    /// First index in `1..=k_max` with a nonpositive term, if any.
    pub fn first_nonpositive(&self, k_max: u64) -> Result<Option<u64>, TermError> {
        for k in 1..=k_max {
            if !self.eval_term(k)?.is_positive() {
                return Ok(Some(k));
            }
        }
        Ok(None)
    }
}

/// Exact prefix sums `[S_1, ..., S_n_max]` with `S_n = sum of term(1..=n)`.
///
/// One pass over the terms; this vector is the per-sweep memo that downstream
/// sweeps index into.
pub fn partial_sums(seq: &SequenceDef, n_max: u64) -> Result<Vec<Rat>, TermError> {
    let mut sums = Vec::with_capacity(n_max as usize);
    let mut acc = Rat::zero();
    for k in 1..=n_max {
        acc = &acc + &seq.eval_term(k)?;
        sums.push(acc.clone());
    }
    Ok(sums)
}

/// Exact `sum of term(k) for k in 1..=n`.
pub fn partial_sum(seq: &SequenceDef, n: u64) -> Result<Rat, TermError> {
    let mut acc = Rat::zero();
    for k in 1..=n {
        acc = &acc + &seq.eval_term(k)?;
    }
    Ok(acc)
}

/// Monotonicity over an explicit finite range, by exact comparison of
/// consecutive terms. `Constant` is the most specific label and implies both
/// monotone directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonotonicityClass {
    Constant,
    Nondecreasing,
    Nonincreasing,
    Mixed,
}

impl MonotonicityClass {
    pub fn is_nondecreasing(self) -> bool {
        matches!(self, MonotonicityClass::Constant | MonotonicityClass::Nondecreasing)
    }

    pub fn is_nonincreasing(self) -> bool {
        matches!(self, MonotonicityClass::Constant | MonotonicityClass::Nonincreasing)
    }
}

impl fmt::Display for MonotonicityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            MonotonicityClass::Constant => "constant",
            MonotonicityClass::Nondecreasing => "nondecreasing",
            MonotonicityClass::Nonincreasing => "nonincreasing",
            MonotonicityClass::Mixed => "none",
        };
        f.write_str(s)
    }
}

/// Classifies a term list; a single term (or none) counts as constant.
pub fn classify_terms(terms: &[Rat]) -> MonotonicityClass {
    let mut rose = false;
    let mut fell = false;
    for pair in terms.windows(2) {
        match pair[0].cmp(&pair[1]) {
            std::cmp::Ordering::Less => rose = true,
            std::cmp::Ordering::Greater => fell = true,
            std::cmp::Ordering::Equal => {}
        }
    }
    match (rose, fell) {
        (false, false) => MonotonicityClass::Constant,
        (true, false) => MonotonicityClass::Nondecreasing,
        (false, true) => MonotonicityClass::Nonincreasing,
        (true, true) => MonotonicityClass::Mixed,
    }
}

/// Classification of `seq` over `1..=n` by exact pairwise comparison.
pub fn classify_monotonicity(
    seq: &SequenceDef,
    n: u64,
) -> Result<MonotonicityClass, TermError> {
    let mut terms = Vec::with_capacity(n as usize);
    for k in 1..=n {
        terms.push(seq.eval_term(k)?);
    }
    Ok(classify_terms(&terms))
}

/// The built-in sequences: the weights and summands every registered identity
/// and claim draws from. Ids are stable; reports and the CLI use them.
pub fn builtin_sequences() -> Vec<SequenceDef> {
    let defs: &[(&str, &str, &str)] = &[
        ("x.k", "k", "identity weight k"),
        ("x.k2k1", "k^2 + k + 1", "quadratic weight k^2+k+1"),
        ("x.kplus2", "k + 2", "shifted weight k+2"),
        ("x.k2_2k_2", "k^2 + 2*k + 2", "quadratic weight k^2+2k+2"),
        ("x.4k", "4*k", "scaled weight 4k"),
        ("x.k2", "k^2", "square weight k^2"),
        ("y.fact", "k!", "factorial terms"),
        ("y.invfact", "1/k!", "factorial reciprocals"),
        ("y.invfact_shift", "1/(k+1)!", "shifted factorial reciprocals"),
        ("y.app6", "1/((k+2)^2*k!)", "weighted factorial reciprocals"),
        ("y.app7", "1/(k*(k+1)*(k+2)!)", "product-weighted factorial reciprocals"),
        ("y.app8", "1/(4*k^4+1)", "quartic reciprocals, Sophie Germain split"),
        ("y.app9", "1/(4*k^4-1)", "quartic-minus-one reciprocals"),
        ("y.app9c", "1/(4*k^2-1)", "odd-product reciprocals"),
    ];
    defs.iter()
        .map(|(id, term, desc)| SequenceDef::parse(id, term, desc).expect("builtin sequence"))
        .collect()
}
