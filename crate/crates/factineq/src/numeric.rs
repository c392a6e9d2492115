//! Exact integer and rational arithmetic.
//!
//! Every verdict-relevant value in this crate is a [`Rat`]: a reduced fraction
//! over arbitrary-precision integers. Floating point never enters a
//! computation; decimals exist only as rounded display strings.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{OnceLock, RwLock};

use num_bigint::Sign;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

pub use num_bigint::BigInt;

/// Default bound on factorial arguments; override with `FACTINEQ_FACTORIAL_CAP`.
pub const DEFAULT_FACTORIAL_CAP: u64 = 10_000;

/// Environment variable that overrides the factorial cap.
pub const FACTORIAL_CAP_ENV: &str = "FACTINEQ_FACTORIAL_CAP";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NumericError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("factorial cap exceeded: {m}! is beyond the configured cap {cap} (set {FACTORIAL_CAP_ENV} to raise it)")]
    FactorialCap { m: u64, cap: u64 },
}

/// Append-only table of `m!` values, grown on demand up to a hard cap.
///
/// Safe to share across workers: reads take a shared lock, growth takes the
/// write lock, and entries are never mutated once pushed.
pub struct FactorialCache {
    cap: u64,
    table: RwLock<Vec<BigInt>>,
}

impl FactorialCache {
    pub fn with_cap(cap: u64) -> Self {
        FactorialCache {
            cap,
            table: RwLock::new(vec![BigInt::one()]),
        }
    }

    fn from_env() -> Self {
        let cap = std::env::var(FACTORIAL_CAP_ENV)
            .ok()
            .and_then(|v| v.parse::<u64>().ok())
            .unwrap_or(DEFAULT_FACTORIAL_CAP);
        FactorialCache::with_cap(cap)
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    /// Largest `m` whose factorial is currently cached.
    pub fn high_water(&self) -> u64 {
        (self.table.read().unwrap().len() - 1) as u64
    }

    /// Exact `m!`.
    pub fn get(&self, m: u64) -> Result<BigInt, NumericError> {
        if m > self.cap {
            return Err(NumericError::FactorialCap { m, cap: self.cap });
        }
        let idx = m as usize;
        {
            let table = self.table.read().unwrap();
            if idx < table.len() {
                return Ok(table[idx].clone());
            }
        }
        let mut table = self.table.write().unwrap();
        while table.len() <= idx {
            let next = table.last().unwrap() * BigInt::from(table.len() as u64);
            table.push(next);
        }
        Ok(table[idx].clone())
    }
}

/// Process-wide factorial cache; the cap is read from the environment once.
pub fn global_factorials() -> &'static FactorialCache {
    static CACHE: OnceLock<FactorialCache> = OnceLock::new();
    CACHE.get_or_init(FactorialCache::from_env)
}

/// Exact `m!` from the process-wide cache.
pub fn factorial(m: u64) -> Result<BigInt, NumericError> {
    global_factorials().get(m)
}

/// A reduced rational: `gcd(|num|, den) = 1`, `den > 0`, zero is `0/1`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rat(BigRational);

impl Rat {
    /// Normalizes `num/den` to reduced form with a positive denominator.
    pub fn new(num: BigInt, den: BigInt) -> Result<Rat, NumericError> {
        if den.is_zero() {
            return Err(NumericError::DivisionByZero);
        }
        let r = Rat(BigRational::new(num, den));
        r.debug_check();
        Ok(r)
    }

    pub fn from_int<T: Into<BigInt>>(value: T) -> Rat {
        Rat(BigRational::from_integer(value.into()))
    }

    pub fn zero() -> Rat {
        Rat(BigRational::zero())
    }

    pub fn one() -> Rat {
        Rat(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    /// The integer value, if the denominator is 1.
    pub fn to_integer(&self) -> Option<BigInt> {
        self.is_integer().then(|| self.0.numer().clone())
    }

    pub fn checked_div(&self, rhs: &Rat) -> Result<Rat, NumericError> {
        if rhs.is_zero() {
            return Err(NumericError::DivisionByZero);
        }
        Ok(Rat(&self.0 / &rhs.0))
    }

    pub fn recip(&self) -> Result<Rat, NumericError> {
        if self.is_zero() {
            return Err(NumericError::DivisionByZero);
        }
        Ok(Rat(self.0.recip()))
    }

    /// Nonnegative integer power. `0^0 = 1`.
    pub fn pow(&self, exp: u32) -> Rat {
        // gcd(a, b) = 1 implies gcd(a^e, b^e) = 1, so no re-reduction needed.
        Rat(BigRational::new_raw(
            self.0.numer().pow(exp),
            self.0.denom().pow(exp),
        ))
    }

    fn debug_check(&self) {
        #[cfg(debug_assertions)]
        {
            use num_integer::Integer;
            debug_assert!(self.0.denom().is_positive(), "denominator must be positive");
            let g = self.0.numer().abs().gcd(self.0.denom());
            debug_assert!(
                g.is_one() || self.0.numer().is_zero() && self.0.denom().is_one(),
                "fraction must be reduced"
            );
        }
    }

    /// Rounded decimal rendering: 12 significant digits, ties to even.
    ///
    /// This is a display convenience only; it never feeds back into a verdict.
    pub fn decimal(&self) -> String {
        const SIG: u64 = 12;
        if self.is_zero() {
            return "0".to_string();
        }
        let negative = self.0.numer().sign() == Sign::Minus;
        let a = self.0.numer().abs();
        let q = self.0.denom().clone();

        // Exponent e with 10^e <= |value| < 10^(e+1), by exact comparison.
        let ten = BigInt::from(10);
        let value_lt_pow10 = |e: i64| -> bool {
            // |value| < 10^e  <=>  a < q * 10^e
            if e >= 0 {
                a < &q * ten.pow(e as u32)
            } else {
                &a * ten.pow((-e) as u32) < q
            }
        };
        let mut e = a.to_string().len() as i64 - q.to_string().len() as i64;
        while !value_lt_pow10(e + 1) {
            e += 1;
        }
        while value_lt_pow10(e) {
            e -= 1;
        }

        // Scale so the first SIG digits survive, then round half-to-even.
        let shift = SIG as i64 - 1 - e;
        let (num, den) = if shift >= 0 {
            (&a * ten.pow(shift as u32), q)
        } else {
            (a, &q * ten.pow((-shift) as u32))
        };
        use num_integer::Integer;
        let (mut digits, rem) = num.div_rem(&den);
        let twice = &rem * BigInt::from(2);
        match twice.cmp(&den) {
            Ordering::Greater => digits += 1,
            Ordering::Equal => {
                if digits.is_odd() {
                    digits += 1;
                }
            }
            Ordering::Less => {}
        }
        let mut s = digits.to_string();
        if s.len() as u64 > SIG {
            // 999... rounded up to 1000...: drop the extra zero, bump the exponent.
            s.truncate(SIG as usize);
            e += 1;
        }

        let rendered = if (-4..SIG as i64).contains(&e) {
            if e >= 0 {
                let split = (e + 1) as usize;
                let (int_part, frac_part) = s.split_at(split);
                let frac = frac_part.trim_end_matches('0');
                if frac.is_empty() {
                    int_part.to_string()
                } else {
                    format!("{int_part}.{frac}")
                }
            } else {
                let frac = s.trim_end_matches('0');
                format!("0.{}{}", "0".repeat((-e - 1) as usize), frac)
            }
        } else {
            let (first, rest) = s.split_at(1);
            let mantissa = rest.trim_end_matches('0');
            if mantissa.is_empty() {
                format!("{first}e{e}")
            } else {
                format!("{first}.{mantissa}e{e}")
            }
        };
        if negative {
            format!("-{rendered}")
        } else {
            rendered
        }
    }
}

impl From<BigInt> for Rat {
    fn from(value: BigInt) -> Self {
        Rat::from_int(value)
    }
}

impl From<u64> for Rat {
    fn from(value: u64) -> Self {
        Rat::from_int(value)
    }
}

impl From<i64> for Rat {
    fn from(value: i64) -> Self {
        Rat::from_int(value)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&Rat> for &Rat {
            type Output = Rat;
            fn $method(self, rhs: &Rat) -> Rat {
                Rat($trait::$method(&self.0, &rhs.0))
            }
        }
        impl $trait<Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat($trait::$method(self.0, rhs.0))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);

// Panics on a zero divisor, like the underlying type; fallible callers use
// `checked_div`.
binop!(Div, div);

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-&self.0)
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Serializes as `{"num": "...", "den": "...", "dec": "..."}` so arbitrary
/// precision survives JSON; `dec` is the rounded display string.
impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Rat", 3)?;
        s.serialize_field("num", &self.numer().to_string())?;
        s.serialize_field("den", &self.denom().to_string())?;
        s.serialize_field("dec", &self.decimal())?;
        s.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rat(n: i64, d: i64) -> Rat {
        Rat::new(BigInt::from(n), BigInt::from(d)).unwrap()
    }

    #[test]
    fn factorial_small_values() {
        assert_eq!(factorial(0).unwrap(), BigInt::from(1));
        assert_eq!(factorial(5).unwrap(), BigInt::from(120));
        assert_eq!(factorial(12).unwrap(), BigInt::from(479_001_600u64));
        // 12! = 12 * 11!
        assert_eq!(
            factorial(12).unwrap(),
            BigInt::from(12) * factorial(11).unwrap()
        );
    }

    #[test]
    fn factorial_recurrence_holds() {
        let cache = FactorialCache::with_cap(300);
        for m in 1..=300u64 {
            assert_eq!(
                cache.get(m).unwrap(),
                BigInt::from(m) * cache.get(m - 1).unwrap(),
                "recurrence failed at m={m}"
            );
        }
        assert!(cache.high_water() >= 300);
    }

    #[test]
    fn factorial_cap_is_enforced() {
        let cache = FactorialCache::with_cap(10);
        assert_eq!(cache.get(10).unwrap(), BigInt::from(3_628_800u64));
        let err = cache.get(11).unwrap_err();
        assert_eq!(err, NumericError::FactorialCap { m: 11, cap: 10 });
        let msg = err.to_string();
        assert!(msg.contains("11") && msg.contains("10"), "{msg}");
    }

    #[test]
    fn normalize_reduces_and_fixes_sign() {
        let r = Rat::new(BigInt::from(4), BigInt::from(-6)).unwrap();
        assert_eq!(r, rat(-2, 3));
        assert_eq!(r.numer(), &BigInt::from(-2));
        assert_eq!(r.denom(), &BigInt::from(3));

        let z = Rat::new(BigInt::from(0), BigInt::from(7)).unwrap();
        assert_eq!(z, Rat::zero());
        assert_eq!(z.denom(), &BigInt::from(1));

        assert!(rat(23, 2) > rat(9, 1));
    }

    #[test]
    fn zero_denominator_is_an_error() {
        assert_eq!(
            Rat::new(BigInt::from(1), BigInt::from(0)),
            Err(NumericError::DivisionByZero)
        );
    }

    #[test]
    fn arithmetic_examples() {
        assert_eq!(&rat(1, 2) + &rat(1, 3), rat(5, 6));
        assert_eq!(&rat(5, 6) * &Rat::zero(), Rat::zero());
        assert_eq!(&rat(1, 2) - &rat(1, 6), rat(1, 3));
        assert_eq!(rat(1, 2).checked_div(&rat(3, 4)).unwrap(), rat(2, 3));
        assert_eq!(
            rat(1, 2).checked_div(&Rat::zero()),
            Err(NumericError::DivisionByZero)
        );
    }

    #[test]
    fn pow_examples() {
        assert_eq!(rat(2, 3).pow(3), rat(8, 27));
        assert_eq!(rat(-2, 1).pow(2), rat(4, 1));
        assert_eq!(Rat::zero().pow(0), Rat::one());
        assert_eq!(rat(7, 5).pow(0), Rat::one());
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(Rat::zero().decimal(), "0");
        assert_eq!(rat(1, 2).decimal(), "0.5");
        assert_eq!(rat(-9, 2).decimal(), "-4.5");
        assert_eq!(rat(1, 3).decimal(), "0.333333333333");
        assert_eq!(rat(2, 3).decimal(), "0.666666666667");
        assert_eq!(rat(23, 3).decimal(), "7.66666666667");
        assert_eq!(rat(120, 1).decimal(), "120");
        assert_eq!(rat(1, 10_000).decimal(), "0.0001");
        assert_eq!(rat(1, 100_000).decimal(), "1e-5");
        assert_eq!(rat(999_999_999_999_999i64, 1).decimal(), "1e15");
    }

    #[test]
    fn decimal_rounds_half_to_even() {
        // 13th significant digit is an exact 5: round to the even neighbor.
        let tie_down = Rat::new(BigInt::from(1_234_567_890_125i64), BigInt::from(10).pow(13))
            .unwrap();
        assert_eq!(tie_down.decimal(), "0.123456789012");
        let tie_up = Rat::new(BigInt::from(1_234_567_890_135i64), BigInt::from(10).pow(13))
            .unwrap();
        assert_eq!(tie_up.decimal(), "0.123456789014");
    }

    #[test]
    fn decimal_of_large_factorial() {
        let f100 = Rat::from_int(factorial(100).unwrap());
        assert_eq!(f100.decimal(), "9.33262154439e157");
    }

    #[test]
    fn display_format() {
        assert_eq!(rat(-2, 3).to_string(), "-2/3");
        assert_eq!(rat(7, 1).to_string(), "7");
        assert_eq!(Rat::zero().to_string(), "0");
    }

    #[test]
    fn json_shape() {
        let j = serde_json::to_value(rat(-2, 3)).unwrap();
        assert_eq!(j["num"], "-2");
        assert_eq!(j["den"], "3");
        assert_eq!(j["dec"], "-0.666666666667");
    }

    fn arb_rat() -> impl Strategy<Value = Rat> {
        (-1000i64..1000, 1i64..1000).prop_map(|(n, d)| rat(n, d))
    }

    proptest! {
        #[test]
        fn add_commutes(a in arb_rat(), b in arb_rat()) {
            prop_assert_eq!(&a + &b, &b + &a);
        }

        #[test]
        fn add_associates(a in arb_rat(), b in arb_rat(), c in arb_rat()) {
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        }

        #[test]
        fn mul_commutes(a in arb_rat(), b in arb_rat()) {
            prop_assert_eq!(&a * &b, &b * &a);
        }

        #[test]
        fn invariants_after_arithmetic(a in arb_rat(), b in arb_rat()) {
            use num_integer::Integer;
            for r in [&a + &b, &a - &b, &a * &b] {
                prop_assert!(r.denom() > &BigInt::from(0));
                let g = r.numer().abs().gcd(r.denom());
                prop_assert!(g == BigInt::from(1));
            }
        }

        #[test]
        fn normalize_round_trips_common_factors(a in arb_rat(), x in 1i64..500) {
            for sign in [1i64, -1] {
                let scale = BigInt::from(sign * x);
                let again = Rat::new(a.numer() * &scale, a.denom() * &scale).unwrap();
                prop_assert_eq!(&again, &a);
            }
        }
    }
}
