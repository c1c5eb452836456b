//! Exact truncated power series over ℤ and the q-expansions built from them.

mod ntt;

pub use ntt::{primes_needed, MIN_PRIMES};

use rug::Integer;

use crate::arith::divisor_power_sums;
use crate::error::{Error, Result};

/// Below this length products are computed directly.
const SCHOOLBOOK_CUTOFF: usize = 48;

/// A q-expansion prefix: `coeffs[n]` is the coefficient of qⁿ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QSeries {
    coeffs: Vec<Integer>,
}

impl QSeries {
    pub fn new(coeffs: Vec<Integer>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::EmptySeries);
        }
        Ok(QSeries { coeffs })
    }

    pub fn from_i64(coeffs: &[i64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| Integer::from(c)).collect())
    }

    pub fn zero(len: usize) -> Result<Self> {
        Self::new(vec![Integer::new(); len])
    }

    pub fn one(len: usize) -> Result<Self> {
        let mut s = Self::zero(len)?;
        s.coeffs[0] = Integer::from(1);
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coeff(&self, n: usize) -> &Integer {
        &self.coeffs[n]
    }

    pub fn coeffs(&self) -> &[Integer] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Integer> {
        self.coeffs
    }

    fn check_same_len(a: &QSeries, b: &QSeries) -> Result<()> {
        if a.len() != b.len() {
            return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
        }
        Ok(())
    }

    pub fn sub(&self, other: &QSeries) -> Result<QSeries> {
        Self::check_same_len(self, other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| Integer::from(a - b))
            .collect();
        QSeries::new(coeffs)
    }
}

/// Exact truncated product. Long series go through the multi-prime
/// transform; the result is identical to [`schoolbook_multiply`].
pub fn multiply(a: &QSeries, b: &QSeries) -> Result<QSeries> {
    QSeries::check_same_len(a, b)?;
    if a.len() <= SCHOOLBOOK_CUTOFF {
        return schoolbook_multiply(a, b);
    }
    let coeffs = if std::ptr::eq(a, b) {
        ntt::convolve(&a.coeffs, &a.coeffs)
    } else {
        ntt::convolve(&a.coeffs, &b.coeffs)
    };
    QSeries::new(coeffs)
}

/// Quadratic-time reference product.
pub fn schoolbook_multiply(a: &QSeries, b: &QSeries) -> Result<QSeries> {
    QSeries::check_same_len(a, b)?;
    let len = a.len();
    let mut out = vec![Integer::new(); len];
    for (i, x) in a.coeffs.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.coeffs[..len - i].iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    QSeries::new(out)
}

/// `a^e` by binary exponentiation.
pub fn power(a: &QSeries, e: u32) -> Result<QSeries> {
    if e == 0 {
        return Err(Error::ZeroExponent);
    }
    let mut result: Option<QSeries> = None;
    let mut base = a.clone();
    let mut e = e;
    loop {
        if e & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => multiply(&r, &base)?,
            });
        }
        e >>= 1;
        if e == 0 {
            break;
        }
        base = multiply(&base, &base)?;
    }
    Ok(result.expect("e >= 1"))
}

/// Weights with a normalized level-one Eisenstein series handled here, with
/// the constant `−2k / B_k`.
const EISENSTEIN: [(u32, i64); 5] = [(4, 240), (6, -504), (8, 480), (10, -264), (14, -24)];

/// `E_k = 1 + c_k Σ σ_{k−1}(n) qⁿ`, truncated to `n_max` coefficients.
pub fn eisenstein(weight: u32, n_max: usize) -> Result<QSeries> {
    let c = EISENSTEIN
        .iter()
        .find(|(w, _)| *w == weight)
        .map(|&(_, c)| c)
        .ok_or(Error::UnsupportedWeight {
            weight,
            reason: "Eisenstein series available for weights 4, 6, 8, 10, 14",
        })?;
    if n_max == 0 {
        return Err(Error::EmptySeries);
    }
    let mut coeffs = divisor_power_sums(weight - 1, n_max - 1);
    coeffs[0] = Integer::from(1);
    for x in coeffs.iter_mut().skip(1) {
        *x *= c;
    }
    QSeries::new(coeffs)
}

/// `q ∏_{n≥1} (1 − qⁿ)^24` from Euler's pentagonal expansion of `∏(1 − qⁿ)`.
pub fn eta_product_24(n_max: usize) -> Result<QSeries> {
    if n_max == 0 {
        return Err(Error::EmptySeries);
    }
    let mut out = vec![Integer::new(); n_max];
    if n_max == 1 {
        return QSeries::new(out);
    }
    let len = n_max - 1;
    let mut euler = vec![Integer::new(); len];
    // Σ_{k∈ℤ} (−1)^k q^{k(3k−1)/2}
    for k in 0i64.. {
        let mut touched = false;
        for j in [k, -k] {
            if k == 0 && j < 0 {
                continue;
            }
            let e = j * (3 * j - 1) / 2;
            if (e as usize) < len {
                euler[e as usize] = Integer::from(if k % 2 == 0 { 1 } else { -1 });
                touched = true;
            }
        }
        if !touched {
            break;
        }
    }
    let p24 = power(&QSeries::new(euler)?, 24)?;
    for (dst, src) in out[1..].iter_mut().zip(p24.into_coeffs()) {
        *dst = src;
    }
    QSeries::new(out)
}

/// The discriminant form `Δ = (E₄³ − E₆²) / 1728`.
pub fn delta(n_max: usize) -> Result<QSeries> {
    let e4 = eisenstein(4, n_max)?;
    let e6 = eisenstein(6, n_max)?;
    let e4_cubed = multiply(&multiply(&e4, &e4)?, &e4)?;
    let e6_squared = multiply(&e6, &e6)?;
    let mut coeffs = e4_cubed.sub(&e6_squared)?.into_coeffs();
    for (index, c) in coeffs.iter_mut().enumerate() {
        if !c.is_divisible_u(1728) {
            return Err(Error::NotDivisible { index, divisor: 1728 });
        }
        c.div_exact_u_mut(1728);
    }
    QSeries::new(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(s: &QSeries) -> Vec<i64> {
        s.coeffs().iter().map(|c| c.to_i64().unwrap()).collect()
    }

    #[test]
    fn eisenstein_examples() {
        assert_eq!(ints(&eisenstein(4, 3).unwrap()), vec![1, 240, 2160]);
        assert_eq!(ints(&eisenstein(6, 2).unwrap()), vec![1, -504]);
        assert_eq!(ints(&eisenstein(4, 1).unwrap()), vec![1]);
        assert!(matches!(eisenstein(12, 5), Err(Error::UnsupportedWeight { .. })));
        assert!(matches!(eisenstein(4, 0), Err(Error::EmptySeries)));
    }

    #[test]
    fn multiply_examples() {
        let a = QSeries::from_i64(&[1, 1]).unwrap();
        assert_eq!(ints(&multiply(&a, &a).unwrap()), vec![1, 2]);
        let one = QSeries::from_i64(&[1, 0, 0]).unwrap();
        let q = QSeries::from_i64(&[0, 1, 0]).unwrap();
        assert_eq!(ints(&multiply(&one, &q).unwrap()), vec![0, 1, 0]);
        let e = multiply(&eisenstein(4, 5).unwrap(), &eisenstein(6, 5).unwrap()).unwrap();
        assert_eq!(*e.coeff(1), -264);
        assert!(matches!(multiply(&a, &one), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn power_examples() {
        let a = QSeries::from_i64(&[1, 1]).unwrap();
        assert_eq!(ints(&power(&a, 2).unwrap()), vec![1, 2]);
        let b = QSeries::from_i64(&[1, -1, 0]).unwrap();
        assert_eq!(ints(&power(&b, 3).unwrap()), vec![1, -3, 3]);
        assert_eq!(power(&b, 1).unwrap(), b);
        assert!(matches!(power(&b, 0), Err(Error::ZeroExponent)));
    }

    #[test]
    fn discriminant_two_routes() {
        let eta = eta_product_24(8).unwrap();
        assert_eq!(ints(&eta), vec![0, 1, -24, 252, -1472, 4830, -6048, -16744]);
        assert_eq!(delta(8).unwrap(), eta);
        assert_eq!(ints(&eta_product_24(1).unwrap()), vec![0]);
        assert_eq!(ints(&delta(1).unwrap()), vec![0]);
    }

    #[test]
    fn long_products_use_transform_and_agree() {
        let e4 = eisenstein(4, 300).unwrap();
        let e6 = eisenstein(6, 300).unwrap();
        assert_eq!(multiply(&e4, &e6).unwrap(), schoolbook_multiply(&e4, &e6).unwrap());
        assert_eq!(multiply(&e4, &e4).unwrap(), schoolbook_multiply(&e4, &e4).unwrap());
    }
}
