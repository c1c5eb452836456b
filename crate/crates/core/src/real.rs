//! Multiprecision reals.
//!
//! [`BigReal`] is an MPFR float: every value carries its own precision in bits
//! and the elementary functions (`sqrt`, `cos`, `ln`, `exp`, roots) are
//! correctly rounded, i.e. within half an ulp.

use rug::float::{Constant, Round};
use rug::ops::Pow;
use rug::{Float, Integer};

use crate::error::{Error, Result};

pub type BigReal = Float;

/// Minimum working precision accepted by the numerical routines.
pub const MIN_PRECISION: u32 = 64;

/// Extra bits carried by accumulators and reduced arguments.
pub const GUARD_BITS: u32 = 64;

pub fn check_precision(bits: u32) -> Result<()> {
    if bits < MIN_PRECISION {
        return Err(Error::PrecisionTooLow { bits });
    }
    Ok(())
}

pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

/// `cos(2π t)` at precision `prec`.
///
/// The integer part of `t` is removed at `t`'s own precision, so callers
/// should hand in `t` computed with about twice the working precision when
/// `|t|` is large.
pub fn cos_turns(t: &Float, prec: u32) -> Float {
    let frac = Float::with_val(t.prec(), t - t.clone().floor());
    let angle = Float::with_val(prec + 8, &frac * pi(prec + 8));
    let angle = angle * 2u32;
    Float::with_val(prec, angle.cos_ref())
}

/// `sin(2π t)`, same reduction as [`cos_turns`].
pub fn sin_turns(t: &Float, prec: u32) -> Float {
    let frac = Float::with_val(t.prec(), t - t.clone().floor());
    let angle = Float::with_val(prec + 8, &frac * pi(prec + 8));
    let angle = angle * 2u32;
    Float::with_val(prec, angle.sin_ref())
}

/// `n^(num/den)` for a positive integer `n` and positive `den`, computed as a
/// single correctly rounded root of the exact integer power (negative `num`
/// gives the reciprocal).
pub fn int_pow_ratio(n: u64, num: i64, den: u32, prec: u32) -> Float {
    let p = Integer::from(n).pow(num.unsigned_abs() as u32);
    let root = Float::with_val(prec + 8, &p).root(den);
    if num < 0 {
        Float::with_val(prec, root.recip())
    } else {
        Float::with_val(prec, root)
    }
}

/// Formats `x` in scientific notation with `digits` significant decimal
/// digits, rounding to nearest.
pub fn to_decimal(x: &Float, digits: usize) -> String {
    x.to_string_radix_round(10, Some(digits.max(1)), Round::Nearest)
}

/// Decimal digits used for reports at a given working precision.
pub fn report_digits(prec: u32) -> usize {
    (prec / 3) as usize
}

/// Summation at `prec + GUARD_BITS` that also keeps `Σ|t|`, from which an a
/// posteriori bound on the accumulated rounding error follows.
#[derive(Clone, Debug)]
pub struct Accumulator {
    sum: Float,
    abs_sum: Float,
    terms: u64,
}

impl Accumulator {
    pub fn new(prec: u32) -> Self {
        Accumulator {
            sum: Float::new(prec + GUARD_BITS),
            abs_sum: Float::new(64),
            terms: 0,
        }
    }

    pub fn add(&mut self, term: &Float) {
        self.sum += term;
        self.abs_sum += Float::with_val(64, term.abs_ref());
        self.terms += 1;
    }

    pub fn merge(&mut self, other: &Accumulator) {
        self.sum += &other.sum;
        self.abs_sum += &other.abs_sum;
        self.terms += other.terms;
    }

    pub fn sum(&self) -> &Float {
        &self.sum
    }

    pub fn terms(&self) -> u64 {
        self.terms
    }

    /// Bound on `|computed − exact|` given that every term carried at most
    /// `term_ulps` ulps of relative error at precision `prec`.
    pub fn error_bound(&self, prec: u32, term_ulps: u32) -> Float {
        let per_term = Float::with_val(64, Float::i_exp(1, -(prec as i32))) * term_ulps;
        let rounding =
            Float::with_val(64, Float::i_exp(1, -((self.sum.prec()) as i32))) * (self.terms + 1);
        Float::with_val(64, &self.abs_sum * (per_term + rounding))
    }

    /// True when the error bound is at most `2^(−prec/2) |sum|`.
    pub fn meets_half_precision(&self, prec: u32, term_ulps: u32) -> bool {
        let bound = self.error_bound(prec, term_ulps);
        let target =
            Float::with_val(64, self.sum.abs_ref()) * Float::with_val(64, Float::i_exp(1, -((prec / 2) as i32)));
        bound <= target
    }

    pub fn into_value(self, prec: u32) -> Float {
        Float::with_val(prec, self.sum)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cos_turns_reduces_large_arguments() {
        // t = 10^12 + 1/8 at high precision: cos(2π t) = cos(π/4).
        let t = Float::with_val(256, 1_000_000_000_000u64) + Float::with_val(256, 0.125);
        let c = cos_turns(&t, 128);
        let want = Float::with_val(128, 0.5).sqrt();
        let diff = Float::with_val(128, &c - &want).abs();
        assert!(diff < Float::with_val(128, Float::i_exp(1, -120)));
    }

    #[test]
    fn int_pow_ratio_matches_exact_cases() {
        assert_eq!(int_pow_ratio(16, 3, 4, 64), 8);
        assert_eq!(int_pow_ratio(16, -3, 4, 64), 0.125);
        let r = int_pow_ratio(2, 3, 2, 128);
        let want = Float::with_val(128, 8).sqrt();
        assert_eq!(r, want);
    }

    #[test]
    fn decimal_formatting_rounds_to_nearest() {
        let x = Float::with_val(64, 2) / 3u32;
        assert_eq!(to_decimal(&x, 5), "6.6667e-1");
    }

    #[test]
    fn precision_floor() {
        assert!(check_precision(63).is_err());
        assert!(check_precision(64).is_ok());
    }
}
