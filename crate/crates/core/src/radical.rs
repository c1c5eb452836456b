//! Exact decisions for `Σ cᵢ √nᵢ + r` with integer `cᵢ`, positive `nᵢ` and
//! rational `r`.
//!
//! Zero testing uses the linear independence of square roots of distinct
//! squarefree integers over ℚ: writing `nᵢ = aᵢ² qᵢ`, the sum vanishes iff
//! the rational part `r + Σ_{qᵢ=1} cᵢaᵢ` is zero and `Σ_{qᵢ=q} cᵢaᵢ = 0` for
//! every kernel `q > 1`. A nonzero sum has its sign settled by interval
//! evaluation with directed rounding, doubling the precision until the
//! interval excludes zero.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use rug::float::Round;
use rug::ops::AddAssignRound;
use rug::{Float, Integer, Rational};

use crate::arith::squarefree_split;

/// One signed radical term `coefficient · √radicand`.
pub type Term = (i64, u64);

pub fn is_zero(terms: &[Term], offset: &Rational) -> bool {
    let mut by_kernel: BTreeMap<u64, Integer> = BTreeMap::new();
    for &(c, n) in terms {
        assert!(n >= 1, "radicand must be positive");
        let (a, q) = squarefree_split(n);
        *by_kernel.entry(q).or_default() += Integer::from(c) * a;
    }
    let rational_part = Rational::from(by_kernel.remove(&1).unwrap_or_default()) + offset;
    rational_part.is_zero() && by_kernel.values().all(|v| v.is_zero())
}

/// Interval `[lo, hi]` containing the exact value, at `prec` bits.
pub fn enclose(terms: &[Term], offset: &Rational, prec: u32) -> (Float, Float) {
    let (mut lo, _) = Float::with_val_round(prec, offset, Round::Down);
    let (mut hi, _) = Float::with_val_round(prec, offset, Round::Up);
    for &(c, n) in terms {
        let (mut s_lo, _) = Float::with_val_round(prec, n, Round::Down);
        s_lo.sqrt_round(Round::Down);
        let (mut s_hi, _) = Float::with_val_round(prec, n, Round::Up);
        s_hi.sqrt_round(Round::Up);
        let (small, large) = if c >= 0 { (&s_lo, &s_hi) } else { (&s_hi, &s_lo) };
        let (t_lo, _) = Float::with_val_round(prec, small * c, Round::Down);
        let (t_hi, _) = Float::with_val_round(prec, large * c, Round::Up);
        lo.add_assign_round(t_lo, Round::Down);
        hi.add_assign_round(t_hi, Round::Up);
    }
    (lo, hi)
}

/// Exact sign of `Σ cᵢ √nᵢ + r`.
pub fn sign(terms: &[Term], offset: &Rational) -> Ordering {
    if is_zero(terms, offset) {
        return Ordering::Equal;
    }
    let mut prec = 64;
    loop {
        let (lo, hi) = enclose(terms, offset, prec);
        if lo > 0 {
            return Ordering::Greater;
        }
        if hi < 0 {
            return Ordering::Less;
        }
        prec *= 2;
    }
}

/// Exact comparison of `Σ cᵢ √nᵢ` with the binary64 value `x`.
pub fn compare_with_f64(terms: &[Term], x: f64) -> Ordering {
    let offset = -Rational::from_f64(x).expect("finite threshold");
    sign(terms, &offset)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_tests() {
        let zero = Rational::new();
        // 1 + 3 = 2 + 2
        assert!(is_zero(&[(1, 1), (1, 9), (-1, 4), (-1, 4)], &zero));
        // √2 + 3√2 = 2√2 + 2√2
        assert!(is_zero(&[(1, 2), (1, 18), (-1, 8), (-1, 8)], &zero));
        assert!(!is_zero(&[(1, 2), (1, 3), (-1, 1), (-1, 8)], &zero));
        // √4 + √1 − √1 − √1 − 1 = 0
        assert!(is_zero(&[(1, 4), (1, 1), (-1, 1), (-1, 1)], &Rational::from(-1)));
        assert!(is_zero(&[], &zero));
    }

    #[test]
    fn signs() {
        let zero = Rational::new();
        // √2 + 2 − 2√3 ≈ −0.0499
        assert_eq!(sign(&[(1, 2), (1, 4), (-2, 3)], &zero), Ordering::Less);
        assert_eq!(sign(&[(1, 2), (-1, 1)], &zero), Ordering::Greater);
        assert_eq!(compare_with_f64(&[(1, 4)], 2.0), Ordering::Equal);
        // the binary64 SQRT_2 lies just above √2
        assert_eq!(compare_with_f64(&[(1, 2)], std::f64::consts::SQRT_2), Ordering::Less);
    }

    #[test]
    fn nearly_cancelling_sum_needs_refinement() {
        // √(10^12+1) − 10^6 ≈ 5·10^-7 and the sign is decided despite the
        // magnitudes involved
        let n = 1_000_000_000_001u64;
        assert_eq!(sign(&[(1, n), (-1_000_000, 1)], &Rational::new()), Ordering::Greater);
        let (lo, hi) = enclose(&[(1, 2)], &Rational::new(), 64);
        assert!(lo < hi);
        assert!(lo < Float::with_val(200, 2).sqrt() && hi > Float::with_val(200, 2).sqrt());
    }
}
