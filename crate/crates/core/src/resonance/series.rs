//! Truncated singular series `s_{k;ℓ}(f; y)` and the moment constants.
//!
//! With `h(n) = f(n) n^{−3/4}` and `u_q(a) = h(a² q)`, the sums collapse per
//! kernel `q`:
//!
//! * (2,1): `Σ_n h(n)²`
//! * (3,2): `Σ_q Σ_{a,b} u_q(a) u_q(b) u_q(a+b)`
//! * (4,2): `Σ_q Σ_s P_{q,s}²` with `P_{q,s} = Σ_{a+b=s} u_q(a) u_q(b)`, plus
//!   the cross-kernel part `2[(Σ_q D_q)² − Σ_q D_q²]`, `D_q = Σ_a u_q(a)²`.
//!
//! The work is `O(y log y)` multiplications, against `O(y²)` solutions.

use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Assign, Float};

use super::{enumerate_solutions, Shape};
use crate::arith::{isqrt_u64, KernelTable};
use crate::cuspform::CoefficientTable;
use crate::error::{Error, Result};
use crate::fit::{fit_loglog, LineFit};
use crate::real::{check_precision, int_pow_ratio, pi, Accumulator, GUARD_BITS};

/// Guard bits are doubled up to this many before giving up.
const MAX_GUARD_BITS: u32 = 1024;

#[derive(Clone, Debug)]
pub struct SeriesValue {
    pub shape: Shape,
    pub y: u64,
    pub precision_bits: u32,
    pub value: Float,
    /// A posteriori bound on the rounding error of `value`.
    pub error_bound: f64,
}

impl SeriesValue {
    pub fn k(&self) -> u32 {
        self.shape.k()
    }

    pub fn l(&self) -> u32 {
        self.shape.l()
    }
}

struct Partial {
    value: Float,
    mass: f64,
    // the (4,2) cross-kernel term needs D_q
    diag: Float,
    diag_abs: f64,
    ops: u64,
}

fn kernel_sum(shape: Shape, q: u64, y: u64, h: &[Float], h_abs: &[f64], wp: u32) -> Partial {
    let top = isqrt_u64(y / q) as usize;
    let idx = |a: usize| (a * a) as u64 * q;
    let u: Vec<&Float> = (1..=top).map(|a| &h[idx(a) as usize]).collect();
    let ua: Vec<f64> = (1..=top).map(|a| h_abs[idx(a) as usize]).collect();
    let mut value = Float::new(wp);
    let mut tmp = Float::new(wp);
    let mut mass = 0.0;
    let mut ops = 0u64;
    let mut diag = Float::new(wp);
    let mut diag_abs = 0.0;
    for (x, xa) in u.iter().zip(&ua) {
        tmp.assign(x.square_ref());
        diag += &tmp;
        diag_abs += xa * xa;
    }
    match shape {
        Shape::TwoOne => {
            value.assign(&diag);
            mass = diag_abs;
            ops = top as u64;
        }
        Shape::ThreeTwo => {
            for a in 0..top {
                for b in 0..top - a - 1 {
                    let c = a + b + 1;
                    tmp.assign(u[a] * u[b]);
                    tmp *= u[c];
                    value += &tmp;
                    mass += ua[a] * ua[b] * ua[c];
                    ops += 1;
                }
            }
        }
        Shape::FourTwo => {
            let mut p = Float::new(wp);
            // s = i + j with 0-based i, j
            for s in 0..=2 * top.saturating_sub(1) {
                p.assign(0);
                let mut pa = 0.0;
                let lo = s.saturating_sub(top - 1);
                let mid = s / 2;
                for i in lo..=mid {
                    let j = s - i;
                    tmp.assign(u[i] * u[j]);
                    let w = if i == j { 1.0 } else { 2.0 };
                    if i != j {
                        tmp <<= 1;
                    }
                    p += &tmp;
                    pa += w * ua[i] * ua[j];
                    ops += 1;
                }
                tmp.assign(p.square_ref());
                value += &tmp;
                mass += pa * pa;
            }
        }
    }
    Partial { value, mass, diag, diag_abs, ops }
}

fn family_grouped(shape: Shape, y: u64, h: &[Float], wp: u32) -> (Float, f64, u64) {
    let h_abs: Vec<f64> = h.iter().map(|x| x.to_f64().abs()).collect();
    let kernels = KernelTable::new(y);
    let qs: Vec<u64> = kernels.kernels().collect();
    let parts: Vec<Partial> = qs
        .par_iter()
        .map(|&q| kernel_sum(shape, q, y, h, &h_abs, wp))
        .collect();
    let mut value = Float::new(wp);
    let mut mass = 0.0;
    let mut ops = 0u64;
    let mut diag_total = Float::new(wp);
    let mut diag_sq = Float::new(wp);
    let mut diag_abs_total = 0.0;
    for p in &parts {
        value += &p.value;
        mass += p.mass;
        ops += p.ops + 1;
        diag_total += &p.diag;
        diag_sq += Float::with_val(wp, p.diag.square_ref());
        diag_abs_total += p.diag_abs;
    }
    if shape == Shape::FourTwo {
        let cross = Float::with_val(wp, diag_total.square_ref()) - diag_sq;
        value += cross * 2u32;
        mass += 2.0 * diag_abs_total * diag_abs_total;
        ops += parts.len() as u64;
    }
    (value, mass, ops)
}

/// Rounding-error bound for a family-grouped sum of depth `ops` over
/// weights with a few ulps of error each.
fn rounding_bound(mass: f64, ops: u64, wp: u32) -> f64 {
    mass * (16.0 + ops as f64) * 2f64.powi(-(wp as i32))
}

fn evaluate(
    shape: Shape,
    y: u64,
    prec: u32,
    weights: impl Fn(u32) -> Vec<Float>,
) -> Result<SeriesValue> {
    check_precision(prec)?;
    let mut guard = GUARD_BITS;
    loop {
        let wp = prec + guard;
        let h = weights(wp);
        let (value, mass, ops) = family_grouped(shape, y, &h, wp);
        let bound = rounding_bound(mass, ops, wp);
        let target = value.to_f64().abs() * 2f64.powi(-((prec / 2) as i32));
        if bound <= target || mass == 0.0 {
            return Ok(SeriesValue {
                shape,
                y,
                precision_bits: prec,
                value: Float::with_val(prec, value),
                error_bound: bound,
            });
        }
        if guard >= MAX_GUARD_BITS {
            return Err(Error::Validation {
                check: "series accuracy",
                witness: format!("{shape} y={y}"),
                detail: format!("cancellation exceeds {MAX_GUARD_BITS} guard bits"),
            });
        }
        guard *= 2;
    }
}

fn table_weights(table: &CoefficientTable, y: u64, wp: u32) -> Vec<Float> {
    (0..=y)
        .into_par_iter()
        .map(|n| if n == 0 { Float::new(wp) } else { table.resonance_weight(n, wp) })
        .collect()
}

/// `s_{k;ℓ}(ã; y)` for the table's form.
pub fn s_trunc(table: &CoefficientTable, shape: Shape, y: u64, prec: u32) -> Result<SeriesValue> {
    if y == 0 {
        return Err(Error::invalid("y must be at least 1"));
    }
    table.require_n(y, "y")?;
    evaluate(shape, y, prec, |wp| table_weights(table, y, wp))
}

/// `s_{k;ℓ}(f; y)` for an arbitrary weight `f(n, prec)`.
pub fn s_trunc_with<F>(f: F, shape: Shape, y: u64, prec: u32) -> Result<SeriesValue>
where
    F: Fn(u64, u32) -> Float + Sync,
{
    if y == 0 {
        return Err(Error::invalid("y must be at least 1"));
    }
    evaluate(shape, y, prec, |wp| {
        (0..=y)
            .into_par_iter()
            .map(|n| {
                if n == 0 {
                    return Float::new(wp);
                }
                let scale = int_pow_ratio(n, -3, 4, wp);
                Float::with_val(wp, f(n, wp) * scale)
            })
            .collect()
    })
}

/// The same series summed tuple by tuple over [`enumerate_solutions`].
/// Quadratic in `y`; meant as a cross-check.
pub fn s_trunc_enumerated(table: &CoefficientTable, shape: Shape, y: u64, prec: u32) -> Result<SeriesValue> {
    check_precision(prec)?;
    table.require_n(y, "y")?;
    let wp = prec + GUARD_BITS;
    let h = table_weights(table, y, wp);
    let mut acc = Accumulator::new(prec);
    let mut term = Float::new(wp);
    for t in enumerate_solutions(shape, y)? {
        term.assign(&h[t[0] as usize]);
        for &n in &t[1..] {
            term *= &h[n as usize];
        }
        acc.add(&term);
    }
    let bound = acc.error_bound(wp, 4 * shape.k()).to_f64();
    Ok(SeriesValue { shape, y, precision_bits: prec, value: acc.into_value(prec), error_bound: bound })
}

/// `C_k(y) = prefactor · s(y)` for k = 2, 3, 4.
#[derive(Clone, Debug)]
pub struct MomentConstant {
    pub weight: u32,
    pub k: u32,
    pub series: SeriesValue,
    pub value: Float,
}

pub(crate) fn shape_for_order(k: u32) -> Result<Shape> {
    match k {
        2 => Ok(Shape::TwoOne),
        3 => Ok(Shape::ThreeTwo),
        4 => Ok(Shape::FourTwo),
        _ => Err(Error::UnsupportedOrder { k, allowed: "2, 3 or 4" }),
    }
}

/// `1/((4κ+2)π²)`, `3/(4(6κ+1)π³)` and `3/(64κπ⁴)` for k = 2, 3, 4.
pub fn constant_prefactor(weight: u32, k: u32, prec: u32) -> Result<Float> {
    let wp = prec + 16;
    let (num, den, pow) = match k {
        2 => (1u32, 4 * weight + 2, 2u32),
        3 => (3, 4 * (6 * weight + 1), 3),
        4 => (3, 64 * weight, 4),
        _ => return Err(Error::UnsupportedOrder { k, allowed: "2, 3 or 4" }),
    };
    let pi_pow = Float::with_val(wp, pi(wp).pow(pow)) * den;
    Ok(Float::with_val(prec, Float::with_val(wp, num) / pi_pow))
}

pub fn constant_ck(table: &CoefficientTable, k: u32, y: u64, prec: u32) -> Result<MomentConstant> {
    let shape = shape_for_order(k)?;
    let series = s_trunc(table, shape, y, prec)?;
    let value = Float::with_val(prec, &series.value * constant_prefactor(table.weight(), k, prec)?);
    Ok(MomentConstant { weight: table.weight(), k, series, value })
}

/// Dyadic convergence report for `s(y)`.
///
/// `differences[i] = |s(y_{i+1}) − s(y_i)|` is attached to `y_i`. The limit
/// is extrapolated geometrically from the fitted ratio `r = 2^slope`:
/// `s_last + (s_last − s_prev)·r/(1−r)`, and `heuristic_error` is the size of
/// that correction. Neither is a rigorous bound.
#[derive(Clone, Debug)]
pub struct TailFit {
    pub shape: Shape,
    pub values: Vec<SeriesValue>,
    pub differences: Vec<(u64, f64)>,
    pub fit: Option<LineFit>,
    pub extrapolated: Option<Float>,
    pub heuristic_error: Option<f64>,
}

impl TailFit {
    pub fn slope(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }
}

pub fn check_dyadic(list: &[u64], min_len: usize, what: &str) -> Result<()> {
    if list.len() < min_len {
        return Err(Error::invalid(format!("{what} needs at least {min_len} dyadic points, got {}", list.len())));
    }
    if list[0] == 0 || list.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(Error::invalid(format!("{what} must be dyadic (each entry twice the previous)")));
    }
    Ok(())
}

pub fn tail_fit(table: &CoefficientTable, shape: Shape, y_list: &[u64], prec: u32) -> Result<TailFit> {
    check_dyadic(y_list, 4, "tail fit")?;
    let values = y_list
        .iter()
        .map(|&y| s_trunc(table, shape, y, prec))
        .collect::<Result<Vec<_>>>()?;
    Ok(tail_fit_from(shape, values))
}

pub(crate) fn tail_fit_from(shape: Shape, values: Vec<SeriesValue>) -> TailFit {
    let prec = values[0].precision_bits;
    let differences: Vec<(u64, f64)> = values
        .windows(2)
        .map(|w| (w[0].y, Float::with_val(prec, &w[1].value - &w[0].value).abs().to_f64()))
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        differences.iter().filter(|d| d.1 > 0.0).map(|&(y, d)| (y as f64, d)).unzip();
    let fit = fit_loglog(&xs, &ys);
    let mut extrapolated = None;
    let mut heuristic_error = None;
    if let Some(f) = fit {
        let r = 2f64.powf(f.slope);
        if r < 1.0 {
            let n = values.len();
            let last = Float::with_val(prec, &values[n - 1].value - &values[n - 2].value);
            let correction = last * (r / (1.0 - r));
            heuristic_error = Some(correction.to_f64().abs());
            extrapolated = Some(Float::with_val(prec, &values[n - 1].value + &correction));
        }
    }
    TailFit { shape, values, differences, fit, extrapolated, heuristic_error }
}
