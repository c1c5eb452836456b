//! Exact power moments `∫₁ᵀ A(x)^k dx` and their main terms.
//!
//! `A` is constant on `[n, n+1)`, so for integer `T` the moment is the
//! integer `Σ_{n<T} A(n)^k`; a fractional endpoint adds `{T}·A(⌊T⌋)^k`.
//! The main term is `C_k(y) T^{1+k(2κ−1)/4}` with the constant from
//! [`crate::resonance::constant_ck`].

use rayon::prelude::*;
use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::cuspform::CoefficientTable;
use crate::error::{Error, Result};
use crate::fit::{fit_loglog, LineFit};
use crate::real::{check_precision, int_pow_ratio, to_decimal, report_digits, GUARD_BITS};
use crate::resonance::{check_dyadic, MomentConstant};

pub const MIN_ORDER: u32 = 2;
pub const MAX_ORDER: u32 = 8;

/// Endpoints below this are ignored by the exponent fit.
pub const WARM_UP: u64 = 1 << 8;

const CHUNK: u64 = 1 << 12;

fn check_order(k: u32) -> Result<()> {
    if !(MIN_ORDER..=MAX_ORDER).contains(&k) {
        return Err(Error::UnsupportedOrder { k, allowed: "2 through 8" });
    }
    Ok(())
}

/// `Σ_{lo ≤ n < hi} A(n)^k`.
fn power_sum(table: &CoefficientTable, k: u32, lo: u64, hi: u64) -> Integer {
    if lo >= hi {
        return Integer::new();
    }
    let chunks: Vec<(u64, u64)> = (lo..hi).step_by(CHUNK as usize).map(|s| (s, (s + CHUNK).min(hi))).collect();
    chunks
        .par_iter()
        .map(|&(s, e)| {
            let mut acc = Integer::new();
            for n in s..e {
                acc += Integer::from(table.big_a(n).pow(k));
            }
            acc
        })
        .reduce(Integer::new, |a, b| a + b)
}

fn check_endpoint(table: &CoefficientTable, floor_t: u64) -> Result<()> {
    if floor_t < 2 {
        return Err(Error::invalid("T must be at least 2"));
    }
    table.require_n(floor_t, "T")
}

/// `∫₁ᵀ A(x)^k dx` for integer `T`.
pub fn moment_exact_int(table: &CoefficientTable, k: u32, t: u64) -> Result<Integer> {
    check_order(k)?;
    check_endpoint(table, t)?;
    Ok(power_sum(table, k, 1, t))
}

/// `∫₁ᵀ A(x)^k dx` for rational `T`, as an exact rational.
pub fn moment_exact(table: &CoefficientTable, k: u32, t: &Rational) -> Result<Rational> {
    check_order(k)?;
    let floor_t = t.clone().floor().numer().to_u64().ok_or_else(|| Error::invalid("T out of range"))?;
    check_endpoint(table, floor_t)?;
    let whole = power_sum(table, k, 1, floor_t);
    let frac = t - Rational::from(floor_t);
    let tail = frac * Integer::from(table.big_a(floor_t).pow(k));
    Ok(tail + whole)
}

/// Moments at every (sorted, distinct) integer endpoint in one pass.
pub fn moment_series(table: &CoefficientTable, k: u32, ts: &[u64]) -> Result<Vec<Integer>> {
    check_order(k)?;
    if ts.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("endpoints must be strictly increasing"));
    }
    let mut out = Vec::with_capacity(ts.len());
    let mut total = Integer::new();
    let mut prev = 1;
    for &t in ts {
        check_endpoint(table, t)?;
        total += power_sum(table, k, prev, t);
        out.push(total.clone());
        prev = t;
    }
    Ok(out)
}

/// `1 + k(2κ−1)/4`.
pub fn main_exponent(weight: u32, k: u32) -> Rational {
    Rational::from((4 + k as i64 * (2 * weight as i64 - 1), 4))
}

/// `C_k(y)·T^{1+k(2κ−1)/4}`.
pub fn main_term(constant: &MomentConstant, t: u64, prec: u32) -> Result<Float> {
    check_precision(prec)?;
    let (kappa, k) = (constant.weight, constant.k);
    let e = main_exponent(kappa, k);
    assert_eq!(main_exponent(kappa, 4), Rational::from(2 * kappa), "fourth-moment exponent");
    assert_eq!(main_exponent(kappa, 2), Rational::from((2 * kappa as i64 + 1, 2)), "second-moment exponent");
    if t == 0 {
        return Err(Error::invalid("T must be positive"));
    }
    let wp = prec + GUARD_BITS;
    let num = e.numer().to_i64().expect("small exponent");
    let den = e.denom().to_u32().expect("small exponent");
    let power = int_pow_ratio(t, num, den, wp);
    Ok(Float::with_val(prec, power * &constant.value))
}

#[derive(Clone, Debug)]
pub struct MomentRow {
    pub t: u64,
    pub exact: Integer,
    pub main: Float,
    pub error: Float,
    pub ratio: Float,
}

/// `∫_T^{2T}` against the difference of main terms.
#[derive(Clone, Debug)]
pub struct WindowRow {
    pub t: u64,
    pub exact: Integer,
    pub main: Float,
    pub ratio: Float,
}

#[derive(Clone, Debug)]
pub struct MomentReport {
    pub weight: u32,
    pub k: u32,
    /// truncation of the series behind `C_k`
    pub y: u64,
    pub precision_bits: u32,
    pub exponent: Rational,
    pub rows: Vec<MomentRow>,
    pub windows: Vec<WindowRow>,
    /// endpoints where the error vanished, left out of the fit
    pub zero_errors: Vec<u64>,
    /// fit of `ln|error|` against `ln T` over `T ≥ WARM_UP`; empirical only
    pub fit: Option<LineFit>,
    /// `exponent − slope`, the observed saving
    pub delta_hat: Option<f64>,
    /// `exponent − log₂(|E(2T)|/|E(T)|)` between consecutive endpoints
    pub local_delta: Vec<(u64, f64)>,
}

impl MomentReport {
    pub fn slope(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }

    pub fn ratio_f64(&self, i: usize) -> f64 {
        self.rows[i].ratio.to_f64()
    }

    pub const CSV_HEADER: &'static str = "k,T,exact_moment,main_term,error,ratio";

    pub fn csv(&self) -> String {
        let d = report_digits(self.precision_bits);
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                self.k,
                r.t,
                r.exact,
                to_decimal(&r.main, d),
                to_decimal(&r.error, d),
                to_decimal(&r.ratio, d)
            ));
        }
        out
    }
}

/// Exact moments, main terms, errors and the fitted error exponent over a
/// dyadic list of endpoints.
pub fn error_exponent_fit(
    table: &CoefficientTable,
    constant: &MomentConstant,
    t_list: &[u64],
    prec: u32,
) -> Result<MomentReport> {
    check_dyadic(t_list, 5, "moment fit")?;
    moment_report(table, constant, t_list, prec)
}

/// As [`error_exponent_fit`] without the list-shape requirements; the fit is
/// attempted whenever two usable points exist.
pub fn moment_report(
    table: &CoefficientTable,
    constant: &MomentConstant,
    t_list: &[u64],
    prec: u32,
) -> Result<MomentReport> {
    check_precision(prec)?;
    if constant.weight != table.weight() {
        return Err(Error::invalid(format!(
            "constant is for weight {} but the table has weight {}",
            constant.weight,
            table.weight()
        )));
    }
    let k = constant.k;
    let exact = moment_series(table, k, t_list)?;
    let wp = prec + GUARD_BITS;
    let mut rows = Vec::with_capacity(t_list.len());
    for (&t, m) in t_list.iter().zip(exact) {
        let main = main_term(constant, t, wp)?;
        let error = Float::with_val(wp, &m - &main);
        let ratio = Float::with_val(wp, &m / &main);
        rows.push(MomentRow { t, exact: m, main, error, ratio });
    }

    let windows = rows
        .windows(2)
        .filter(|w| w[1].t == 2 * w[0].t)
        .map(|w| {
            let exact = Integer::from(&w[1].exact - &w[0].exact);
            let main = Float::with_val(wp, &w[1].main - &w[0].main);
            let ratio = Float::with_val(wp, &exact / &main);
            WindowRow { t: w[0].t, exact, main: Float::with_val(prec, main), ratio: Float::with_val(prec, ratio) }
        })
        .collect();

    let zero_errors: Vec<u64> = rows.iter().filter(|r| r.error.is_zero()).map(|r| r.t).collect();
    let usable: Vec<&MomentRow> = rows.iter().filter(|r| r.t >= WARM_UP && !r.error.is_zero()).collect();
    let xs: Vec<f64> = usable.iter().map(|r| r.t as f64).collect();
    let ys: Vec<f64> = usable.iter().map(|r| r.error.to_f64().abs()).collect();
    let fit = fit_loglog(&xs, &ys);
    let exponent = main_exponent(table.weight(), k);
    let e = exponent.to_f64();
    let delta_hat = fit.map(|f| e - f.slope);
    let local_delta = usable
        .windows(2)
        .filter(|w| w[1].t == 2 * w[0].t)
        .map(|w| {
            let growth = (w[1].error.to_f64().abs() / w[0].error.to_f64().abs()).log2();
            (w[1].t, e - growth)
        })
        .collect();

    let rows = rows
        .into_iter()
        .map(|r| MomentRow {
            t: r.t,
            exact: r.exact,
            main: Float::with_val(prec, r.main),
            error: Float::with_val(prec, r.error),
            ratio: Float::with_val(prec, r.ratio),
        })
        .collect();
    Ok(MomentReport {
        weight: table.weight(),
        k,
        y: constant.series.y,
        precision_bits: prec,
        exponent,
        rows,
        windows,
        zero_errors,
        fit,
        delta_hat,
        local_delta,
    })
}

/// `∫_T^{2T} t^α cos(A√t + B) dt` and the ratio `|value|·|A| / T^{1/2+α}`.
#[derive(Clone, Debug)]
pub struct OscillatoryReport {
    pub alpha: f64,
    pub a: f64,
    pub b: f64,
    pub t: f64,
    pub precision_bits: u32,
    pub value: Float,
    /// closed-form value when `2α + 1` is a nonnegative integer
    pub closed_form: Option<Float>,
    pub ratio: f64,
}

impl OscillatoryReport {
    /// Relative difference between quadrature and closed form.
    pub fn agreement(&self) -> Option<f64> {
        self.closed_form.as_ref().map(|c| {
            let d = Float::with_val(self.precision_bits, &self.value - c).abs();
            (d / Float::with_val(self.precision_bits, c.abs_ref())).to_f64()
        })
    }
}

/// Gauss–Legendre nodes and weights on `[−1, 1]` by Newton iteration.
fn gauss_legendre(n: usize, prec: u32) -> Vec<(Float, Float)> {
    let pi = Float::with_val(prec, Constant::Pi);
    let mut out = Vec::with_capacity(n);
    for i in 1..=n {
        let guess = (Float::with_val(prec, &pi * (i as f64 - 0.25)) / (n as f64 + 0.5)).cos();
        let mut x = guess;
        let mut dp = Float::new(prec);
        for _ in 0..200 {
            // P_n(x) and P_n'(x) by the three-term recurrence
            let mut p0 = Float::with_val(prec, 1);
            let mut p1 = x.clone();
            for j in 2..=n {
                let jf = j as u32;
                let p2 = (Float::with_val(prec, &x * &p1) * (2 * jf - 1) - Float::with_val(prec, &p0 * (jf - 1))) / jf;
                p0 = p1;
                p1 = p2;
            }
            let one_minus = Float::with_val(prec, 1) - Float::with_val(prec, x.square_ref());
            dp = Float::with_val(prec, &p0 - Float::with_val(prec, &x * &p1)) * n as u32 / one_minus;
            let step = Float::with_val(prec, &p1 / &dp);
            x -= &step;
            if step.is_zero() || step.get_exp().is_none_or(|e| e < -(prec as i32) + 4) {
                break;
            }
        }
        let one_minus = Float::with_val(prec, 1) - Float::with_val(prec, x.square_ref());
        let w = Float::with_val(prec, 2) / (one_minus * Float::with_val(prec, dp.square_ref()));
        out.push((x, w));
    }
    out
}

const GL_ORDER: usize = 20;

struct Integrand {
    power: Float,
    a: Float,
    b: Float,
    prec: u32,
}

impl Integrand {
    /// `2 u^{2α+1} cos(Au + B)`
    fn eval(&self, u: &Float) -> Float {
        let p = self.prec;
        let arg = Float::with_val(p, &self.a * u) + &self.b;
        let amp = Float::with_val(p, u.pow(&self.power)) * 2u32;
        amp * arg.cos()
    }
}

fn panel(f: &Integrand, rule: &[(Float, Float)], lo: &Float, hi: &Float) -> Float {
    let p = f.prec;
    let half = Float::with_val(p, hi - lo) / 2u32;
    let mid = Float::with_val(p, hi + lo) / 2u32;
    let mut s = Float::new(p);
    for (x, w) in rule {
        let u = Float::with_val(p, &half * x) + &mid;
        s += Float::with_val(p, w * f.eval(&u));
    }
    s * half
}

fn adaptive(f: &Integrand, rule: &[(Float, Float)], lo: &Float, hi: &Float, whole: Float, tol: &Float, depth: u32) -> Float {
    let p = f.prec;
    let mid = Float::with_val(p, hi + lo) / 2u32;
    let left = panel(f, rule, lo, &mid);
    let right = panel(f, rule, &mid, hi);
    let split = Float::with_val(p, &left + &right);
    let diff = Float::with_val(p, &split - &whole).abs();
    if depth == 0 || diff <= *tol {
        return split;
    }
    let half_tol = Float::with_val(p, tol / 2u32);
    adaptive(f, rule, lo, &mid, left, &half_tol, depth - 1) + adaptive(f, rule, &mid, hi, right, &half_tol, depth - 1)
}

/// Antiderivative of `2u^n cos(Au + B)`:
/// `2 Σ_j (−1)^j n!/(n−j)! u^{n−j} A^{−(j+1)} c_j` with
/// `c_j = sin θ, −cos θ, −sin θ, cos θ, …`.
fn closed_antiderivative(n: u32, a: &Float, b: &Float, u: &Float, prec: u32) -> Float {
    let theta = Float::with_val(prec, a * u) + b;
    let (sin, cos) = theta.sin_cos(Float::new(prec));
    let mut total = Float::new(prec);
    let mut falling = Integer::from(1);
    for j in 0..=n {
        if j > 0 {
            falling *= n - j + 1;
        }
        let c = match j % 4 {
            0 => sin.clone(),
            1 => Float::with_val(prec, -&cos),
            2 => Float::with_val(prec, -&sin),
            _ => cos.clone(),
        };
        let upow = Float::with_val(prec, u.pow(n - j));
        let apow = Float::with_val(prec, a.pow(j + 1));
        let mut term = Float::with_val(prec, &upow * &falling) * c / apow;
        if j % 2 == 1 {
            term = -term;
        }
        total += term;
    }
    total * 2u32
}

pub fn oscillatory_check(alpha: f64, a: f64, b: f64, t: f64, prec: u32) -> Result<OscillatoryReport> {
    check_precision(prec)?;
    if a == 0.0 || !a.is_finite() {
        return Err(Error::invalid("A must be a nonzero finite real"));
    }
    if !(t > 0.0) || !t.is_finite() || !alpha.is_finite() || !b.is_finite() {
        return Err(Error::invalid("T must be positive and all parameters finite"));
    }
    let wp = prec + GUARD_BITS;
    let f = Integrand {
        power: Float::with_val(wp, 2.0 * alpha + 1.0),
        a: Float::with_val(wp, a),
        b: Float::with_val(wp, b),
        prec: wp,
    };
    let u0 = Float::with_val(wp, t).sqrt();
    let u1 = Float::with_val(wp, 2.0 * t).sqrt();
    // panels of about a quarter period
    let span = Float::with_val(wp, &u1 - &u0);
    let periods = (span.to_f64() * a.abs() / (2.0 * std::f64::consts::PI)).ceil() as usize;
    let panels = 4 * periods.max(1);
    let rule = gauss_legendre(GL_ORDER, wp);
    let edges: Vec<Float> = (0..=panels)
        .map(|i| Float::with_val(wp, &span * i as u32) / panels as u32 + &u0)
        .collect();
    let tol = Float::with_val(wp, Float::i_exp(1, -(prec as i32))) / panels as u32;
    let parts: Vec<Float> = (0..panels)
        .into_par_iter()
        .map(|i| {
            let (lo, hi) = (&edges[i], &edges[i + 1]);
            let whole = panel(&f, &rule, lo, hi);
            let scale = Float::with_val(wp, whole.abs_ref()).max(&Float::with_val(wp, 1e-300));
            let abs_tol = Float::with_val(wp, &tol * &scale);
            adaptive(&f, &rule, lo, hi, whole, &abs_tol, 12)
        })
        .collect();
    let mut value = Float::new(wp);
    for p in &parts {
        value += p;
    }

    let n = 2.0 * alpha + 1.0;
    let closed_form = (n >= 0.0 && n.fract() == 0.0 && n <= 64.0).then(|| {
        let n = n as u32;
        let hi = closed_antiderivative(n, &f.a, &f.b, &u1, wp);
        let lo = closed_antiderivative(n, &f.a, &f.b, &u0, wp);
        Float::with_val(prec, hi - lo)
    });
    let scale = t.powf(0.5 + alpha);
    let ratio = value.to_f64().abs() * a.abs() / scale;
    Ok(OscillatoryReport {
        alpha,
        a,
        b,
        t,
        precision_bits: prec,
        value: Float::with_val(prec, value),
        closed_form,
        ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_moment(table: &CoefficientTable, k: u32, t: u64) -> Integer {
        let mut a = Integer::new();
        let mut total = Integer::new();
        for n in 1..t {
            a += table.a(n);
            total += Integer::from((&a).pow(k));
        }
        total
    }

    #[test]
    fn moment_examples() {
        let t = CoefficientTable::new(12, 100).unwrap();
        assert_eq!(moment_exact_int(&t, 2, 3).unwrap(), 530);
        assert_eq!(moment_exact_int(&t, 4, 3).unwrap(), 279_842);
        for k in 2..=8 {
            assert_eq!(moment_exact_int(&t, k, 2).unwrap(), 1);
        }
        assert!(moment_exact_int(&t, 9, 3).is_err());
        assert!(moment_exact_int(&t, 1, 3).is_err());
        assert!(moment_exact_int(&t, 2, 101).is_err());
        let half = moment_exact(&t, 2, &Rational::from((5, 2))).unwrap();
        assert_eq!(half, Rational::from(1) + Rational::from((529, 2)));
    }

    #[test]
    fn moment_matches_naive_sum() {
        let t = CoefficientTable::new(18, 10_000).unwrap();
        for k in [2, 3, 4] {
            let ts = [2, 17, 1000, 9_999, 10_000];
            let series = moment_series(&t, k, &ts).unwrap();
            for (&x, m) in ts.iter().zip(&series) {
                assert_eq!(*m, naive_moment(&t, k, x), "k={k} T={x}");
            }
        }
    }

    #[test]
    fn exponents() {
        assert_eq!(main_exponent(12, 4), 24);
        assert_eq!(main_exponent(12, 2), Rational::from((25, 2)));
        assert_eq!(main_exponent(12, 3), Rational::from((73, 4)));
    }

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let rule = gauss_legendre(GL_ORDER, 128);
        let mut s = Float::new(128);
        for (x, w) in &rule {
            s += Float::with_val(128, w * Float::with_val(128, x.pow(38u32)));
        }
        let want = Float::with_val(128, 2) / 39u32;
        assert!(Float::with_val(128, &s - &want).abs() < 1e-35);
    }

    #[test]
    fn oscillatory_example() {
        let r = oscillatory_check(0.0, 2.0 * std::f64::consts::PI, 0.0, 1.0, 128).unwrap();
        assert!((r.value.to_f64() - 0.136_922_627_729_658_3).abs() < 1e-14);
        assert!(r.agreement().unwrap() < 1e-30);
        let shifted = oscillatory_check(0.0, 2.0 * std::f64::consts::PI, 2.0 * std::f64::consts::PI, 1.0, 128).unwrap();
        assert!((shifted.value.to_f64() - r.value.to_f64()).abs() < 1e-14);
        assert!(oscillatory_check(0.0, 0.0, 0.0, 1.0, 128).is_err());
    }

    #[test]
    fn non_integer_power_has_no_closed_form() {
        let r = oscillatory_check(0.25, 3.0, 1.0, 10.0, 64).unwrap();
        assert!(r.closed_form.is_none());
        assert!(r.ratio.is_finite());
    }
}
