//! The truncated Voronoi sum for `A(x)`.
//!
//! ```text
//! R(x) = x^{κ/2−1/4} Σ_{n≤y} a(n) n^{−κ/2−1/4} cos(4π√(nx) − π/4)
//! A(x) ≈ R(x) / (√2 π)
//! ```
//!
//! With `w_n = a(n) n^{−κ/2−1/4}`, `W = Σ w_n e^{4πi√(nx)}` and `X = x^{2κ−1}`,
//! expanding the product of four cosines splits `R⁴` by sign pattern:
//!
//! ```text
//! S₁ = (3/8) X s_{4;2}(ã; y)                  two plus, two minus, resonant
//! S₂ = (3/8) X (|W|⁴ − s_{4;2}(ã; y))         two plus, two minus, the rest
//! S₃ = (1/2) X |W|² Im(W²)                    three and one
//! S₄ = −(1/8) X Re(W⁴)                         all four equal
//! ```
//!
//! [`decompose_s`] computes `S₂` from the pair sums `√n + √m` grouped by exact
//! value, not from the series, so `R⁴ = S₁ + S₂ + S₃ + S₄` is a genuine check.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rug::ops::Pow;
use rug::Float;
use serde::Serialize;

use crate::arith::KernelTable;
use crate::cuspform::CoefficientTable;
use crate::error::{Error, Result};
use crate::fit::{fit_loglog, LineFit};
use crate::real::{check_precision, cos_turns, pi, sin_turns, Accumulator, GUARD_BITS};
use crate::resonance::{exact_equal, s_trunc, Shape};

/// Largest `y` accepted by [`decompose_s`].
pub const DECOMPOSE_MAX_Y: u64 = 2000;

const MAX_GUARD_BITS: u32 = 1024;

fn check_x(x: f64) -> Result<()> {
    if !x.is_finite() || x < 2.0 {
        return Err(Error::invalid(format!("x must be a finite real >= 2, got {x}")));
    }
    Ok(())
}

/// `2√(nx)` at precision `2·wp`, the phase of the n-th term in turns
/// (before the `−1/8` shift).
fn phase(sqrt_x: &Float, n: u64, wp: u32) -> Float {
    let sqrt_n = Float::with_val(2 * wp, n).sqrt();
    Float::with_val(2 * wp, sqrt_n * sqrt_x) * 2u32
}

fn x_power(x: f64, num: i64, den: u32, prec: u32) -> Float {
    let e = Float::with_val(64, num) / den;
    Float::with_val(prec, Float::with_val(prec + 8, x).pow(e))
}

/// `Σ_{n≤N} w_n cos(4π√(nx) − π/4)`, reporting the running value at every
/// entry of the sorted `stops`.
fn cosine_sums(
    weights: &[Float],
    x: f64,
    stops: &[u64],
    prec: u32,
    guard: u32,
) -> (Vec<Float>, bool) {
    let wp = prec + guard;
    let sqrt_x = Float::with_val(2 * wp, x).sqrt();
    let eighth = Float::with_val(8, 0.125);
    let mut acc = Accumulator::new(wp);
    let mut out = Vec::with_capacity(stops.len());
    let mut ok = true;
    let mut n = 0u64;
    for &stop in stops {
        while n < stop {
            n += 1;
            let t = phase(&sqrt_x, n, wp) - &eighth;
            let c = cos_turns(&t, wp);
            acc.add(&Float::with_val(wp, &weights[n as usize] * c));
        }
        ok &= acc.meets_half_precision(wp - guard / 2, 8);
        out.push(Float::with_val(wp, acc.sum()));
    }
    (out, ok)
}

fn voronoi_weights(table: &CoefficientTable, y: u64, wp: u32) -> Vec<Float> {
    (0..=y)
        .into_par_iter()
        .map(|n| if n == 0 { Float::new(wp) } else { table.resonance_weight(n, wp) })
        .collect()
}

/// `R(x)` truncated at `y`, then rescaled by `1/(√2π)` when `as_a` is set.
fn resonance_eval(table: &CoefficientTable, x: f64, y: u64, prec: u32, as_a: bool) -> Result<Float> {
    check_precision(prec)?;
    check_x(x)?;
    if y == 0 {
        return Err(Error::invalid("the truncation length must be at least 1"));
    }
    table.require_n(y, "N")?;
    let mut guard = GUARD_BITS;
    loop {
        let wp = prec + guard;
        let w = voronoi_weights(table, y, wp);
        let (sums, ok) = cosine_sums(&w, x, &[y], prec, guard);
        if ok || guard >= MAX_GUARD_BITS {
            let kappa = table.weight() as i64;
            let mut r = Float::with_val(wp, &sums[0] * x_power(x, 2 * kappa - 1, 4, wp));
            if as_a {
                r /= Float::with_val(wp, 2).sqrt() * pi(wp);
            }
            return Ok(Float::with_val(prec, r));
        }
        guard *= 2;
    }
}

/// `R(x) = x^{κ/2−1/4} Σ_{n≤y} a(n) n^{−κ/2−1/4} cos(4π√(nx) − π/4)`.
pub fn resonance_sum_r(table: &CoefficientTable, x: f64, y: u64, prec: u32) -> Result<Float> {
    resonance_eval(table, x, y, prec, false)
}

/// Main term of the truncated formula, `R(x)/(√2π)` with `y = N`;
/// requires `1 ≤ N ≤ x`.
pub fn truncated_a(table: &CoefficientTable, x: f64, n: u64, prec: u32) -> Result<Float> {
    truncated_a_with_ratio(table, x, n, prec, 1.0)
}

/// As [`truncated_a`] with the constraint relaxed to `N ≤ c·x`.
pub fn truncated_a_with_ratio(table: &CoefficientTable, x: f64, n: u64, prec: u32, c: f64) -> Result<Float> {
    check_x(x)?;
    if n as f64 > c * x {
        return Err(Error::invalid(format!("N = {n} exceeds {c}·x for x = {x}")));
    }
    resonance_eval(table, x, n, prec, true)
}

/// The four pieces of `R⁴(x)`, with `R⁴` itself and the relative residual.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub x: f64,
    pub y: u64,
    pub precision_bits: u32,
    pub s: [Float; 4],
    pub r: Float,
    pub r4: Float,
    /// `|R⁴ − Σ Sᵢ| / |R⁴|`.
    pub residual: Float,
}

/// Exact key of `√n + √m`: a common kernel gives `(a + b)√q`, distinct
/// kernels leave the unordered pair itself.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum PairValue {
    Same { kernel: u64, multiplier: u64 },
    Cross(u64, u64),
}

fn pair_value(kernels: &KernelTable, n: u64, m: u64) -> PairValue {
    let (q, p) = (kernels.kernel(n), kernels.kernel(m));
    if q == p {
        PairValue::Same { kernel: q, multiplier: kernels.multiplier(n) + kernels.multiplier(m) }
    } else {
        PairValue::Cross(n.min(m), n.max(m))
    }
}

/// `Σ_v P_v²` where `P_v` sums `w_n w_m` over pairs with `√n + √m = v`.
fn resonant_mass(w: &[Float], y: u64, wp: u32) -> Float {
    let kernels = KernelTable::new(y);
    let mut index: HashMap<PairValue, usize> = HashMap::new();
    let mut sums: Vec<Float> = Vec::new();
    for n in 1..=y {
        for m in 1..=y {
            let key = pair_value(&kernels, n, m);
            let slot = *index.entry(key).or_insert_with(|| {
                sums.push(Float::new(wp));
                sums.len() - 1
            });
            sums[slot] += Float::with_val(wp, &w[n as usize] * &w[m as usize]);
        }
    }
    let mut g = Float::new(wp);
    for p in &sums {
        g += Float::with_val(wp, p.square_ref());
    }
    g
}

fn check_decompose_args(table: &CoefficientTable, x: f64, y: u64, prec: u32) -> Result<()> {
    check_precision(prec)?;
    check_x(x)?;
    if y == 0 {
        return Err(Error::invalid("y must be at least 1"));
    }
    if y > DECOMPOSE_MAX_Y {
        return Err(Error::invalid(format!(
            "y = {y} exceeds {DECOMPOSE_MAX_Y}; the pair grouping is quadratic in y, use a smaller y"
        )));
    }
    table.require_n(y, "y")
}

fn finish(x: f64, y: u64, prec: u32, wp: u32, s: [Float; 4], r: Float) -> Decomposition {
    let r4 = Float::with_val(wp, (&r).pow(4u32));
    let mut total = Float::new(wp);
    for p in &s {
        total += p;
    }
    let residual = Float::with_val(wp, &r4 - &total).abs() / Float::with_val(wp, r4.abs_ref());
    Decomposition {
        x,
        y,
        precision_bits: prec,
        s: s.map(|p| Float::with_val(prec, p)),
        r: Float::with_val(prec, r),
        r4: Float::with_val(prec, r4),
        residual: Float::with_val(prec, residual),
    }
}

/// `S₁ … S₄` through the factorized sums above; `y ≤ 2000`.
pub fn decompose_s(table: &CoefficientTable, x: f64, y: u64, prec: u32) -> Result<Decomposition> {
    check_decompose_args(table, x, y, prec)?;
    let wp = prec + GUARD_BITS;
    let w = voronoi_weights(table, y, wp);
    let sqrt_x = Float::with_val(2 * wp, x).sqrt();
    let eighth = Float::with_val(8, 0.125);
    let (mut re, mut im, mut r) = (Float::new(wp), Float::new(wp), Float::new(wp));
    for n in 1..=y {
        let t = phase(&sqrt_x, n, wp);
        re += Float::with_val(wp, &w[n as usize] * cos_turns(&t, wp));
        im += Float::with_val(wp, &w[n as usize] * sin_turns(&t, wp));
        let shifted = t - &eighth;
        r += Float::with_val(wp, &w[n as usize] * cos_turns(&shifted, wp));
    }
    let kappa = table.weight() as i64;
    let big_x = x_power(x, 2 * kappa - 1, 1, wp);
    r *= x_power(x, 2 * kappa - 1, 4, wp);

    let norm2 = Float::with_val(wp, re.square_ref()) + Float::with_val(wp, im.square_ref());
    // W² = (re² − im²) + 2i·re·im
    let w2_re = Float::with_val(wp, re.square_ref()) - Float::with_val(wp, im.square_ref());
    let w2_im = Float::with_val(wp, &re * &im) * 2u32;
    let w4_re = Float::with_val(wp, w2_re.square_ref()) - Float::with_val(wp, w2_im.square_ref());

    let s42 = s_trunc(table, Shape::FourTwo, y, wp)?.value;
    let g = resonant_mass(&w, y, wp);
    let three_eighths = Float::with_val(wp, 3) / 8u32;
    let s1 = Float::with_val(wp, &three_eighths * &s42) * &big_x;
    let s2 = (Float::with_val(wp, norm2.square_ref()) - g) * &three_eighths * &big_x;
    let s3 = Float::with_val(wp, &norm2 * &w2_im) * &big_x / 2u32;
    let s4 = -Float::with_val(wp, &w4_re * &big_x) / 8u32;
    Ok(finish(x, y, prec, wp, [s1, s2, s3, s4], r))
}

/// The same pieces by direct summation over all `y⁴` quadruples, grouped by
/// sign pattern with [`exact_equal`] separating `S₁` from `S₂`.
pub fn decompose_s_direct(table: &CoefficientTable, x: f64, y: u64, prec: u32) -> Result<Decomposition> {
    check_decompose_args(table, x, y, prec)?;
    let wp = prec + GUARD_BITS;
    let w = voronoi_weights(table, y, wp);
    let sqrt_x = Float::with_val(2 * wp, x).sqrt();
    let eighth = Float::with_val(8, 0.125);
    let phases: Vec<Float> = (0..=y).map(|n| if n == 0 { Float::new(2 * wp) } else { phase(&sqrt_x, n, wp) }).collect();
    let mut s: [Float; 4] = std::array::from_fn(|_| Float::new(wp));
    let mut r = Float::new(wp);
    for n in 1..=y {
        let shifted = Float::with_val(2 * wp, &phases[n as usize] - &eighth);
        r += Float::with_val(wp, &w[n as usize] * cos_turns(&shifted, wp));
    }
    let idx = |i: u64| i as usize;
    for n in 1..=y {
        for m in 1..=y {
            for k in 1..=y {
                for l in 1..=y {
                    let weight = Float::with_val(wp, &w[idx(n)] * &w[idx(m)]) * &w[idx(k)] * &w[idx(l)];
                    let (pn, pm, pk, pl) = (&phases[idx(n)], &phases[idx(m)], &phases[idx(k)], &phases[idx(l)]);
                    // two plus, two minus: three pairings, each (1/8) cos(θn + θm − θk − θl)
                    let t = Float::with_val(2 * wp, pn + pm) - pk - pl;
                    let c = Float::with_val(wp, &weight * cos_turns(&t, wp)) * 3u32 / 8u32;
                    if exact_equal(n, m, k, l)? {
                        s[0] += c;
                    } else {
                        s[1] += c;
                    }
                    // three and one: four placements of the odd sign, phase shifted by −π/2
                    let t = Float::with_val(2 * wp, pn + pm) + pk - pl - 0.25f64;
                    s[2] += Float::with_val(wp, &weight * cos_turns(&t, wp)) / 2u32;
                    // all equal: phase shifted by −π
                    let t = Float::with_val(2 * wp, pn + pm) + pk + pl - 0.5f64;
                    s[3] += Float::with_val(wp, &weight * cos_turns(&t, wp)) / 8u32;
                }
            }
        }
    }
    let kappa = table.weight() as i64;
    let big_x = x_power(x, 2 * kappa - 1, 1, wp);
    for p in s.iter_mut() {
        *p *= &big_x;
    }
    r *= x_power(x, 2 * kappa - 1, 4, wp);
    Ok(finish(x, y, prec, wp, s, r))
}

/// Half-integer points `n + 1/2` with a seeded offset in `[−0.4, 0.4]`,
/// one per distinct integer part, spread over `[lo, hi)`.
pub fn sample_grid(lo: f64, hi: f64, size: usize, seed: u64) -> Result<Vec<f64>> {
    check_x(lo)?;
    if !(hi > lo) || !hi.is_finite() {
        return Err(Error::invalid(format!("empty x range [{lo}, {hi}]")));
    }
    let (a, b) = (lo.ceil() as u64, hi.floor() as u64);
    let span = b.saturating_sub(a);
    if size == 0 || size as u64 > span {
        return Err(Error::invalid(format!("grid size {size} does not fit {span} unit intervals in [{lo}, {hi}]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..size as u64)
        .map(|i| {
            let n = a + i * span / size as u64;
            n as f64 + 0.5 + rng.gen_range(-0.4..=0.4)
        })
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct ProfileRow {
    pub n: u64,
    /// max over the grid of `|A(x) − truncated_A(x, N)| / x^{κ/2}`
    pub max_rel_error: f64,
    pub argmax_x: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TruncationProfile {
    pub weight: u32,
    pub x_lo: f64,
    pub x_hi: f64,
    pub grid: Vec<f64>,
    pub rows: Vec<ProfileRow>,
    pub fit: Option<LineFit>,
}

impl TruncationProfile {
    pub fn slope(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }

    /// Number of consecutive N pairs where the larger N has the smaller error.
    pub fn decreasing_steps(&self) -> usize {
        self.rows.windows(2).filter(|w| w[1].max_rel_error < w[0].max_rel_error).count()
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("N,max_rel_error\n");
        for r in &self.rows {
            out.push_str(&format!("{},{:e}\n", r.n, r.max_rel_error));
        }
        out
    }
}

/// Empirical truncation error of [`truncated_a`] for each `N` in `n_list`,
/// maximized over a seeded grid in `[x_lo, x_hi]`, and the log-log slope.
pub fn truncation_error_profile(
    table: &CoefficientTable,
    x_range: (f64, f64),
    n_list: &[u64],
    grid_size: usize,
    seed: u64,
    prec: u32,
) -> Result<TruncationProfile> {
    check_precision(prec)?;
    let (x_lo, x_hi) = x_range;
    let grid = sample_grid(x_lo, x_hi, grid_size, seed)?;
    if n_list.is_empty() || n_list.windows(2).any(|w| w[1] <= w[0]) || n_list[0] == 0 {
        return Err(Error::invalid("N list must be nonempty, positive and strictly increasing"));
    }
    let n_top = *n_list.last().unwrap();
    table.require_n(n_top, "N")?;
    table.require_n(x_hi.floor() as u64, "x")?;
    if n_top as f64 > grid[0] {
        return Err(Error::invalid(format!("N = {n_top} exceeds the smallest grid point {}", grid[0])));
    }
    let kappa = table.weight() as i64;
    let wp = prec + GUARD_BITS;
    let w = voronoi_weights(table, n_top, wp);
    let scale = Float::with_val(wp, 2).sqrt() * pi(wp);

    let per_x: Vec<Vec<f64>> = grid
        .par_iter()
        .map(|&x| {
            let (sums, _) = cosine_sums(&w, x, n_list, prec, GUARD_BITS);
            let exact = table.partial_sum(x).expect("grid inside table");
            let amp = x_power(x, 2 * kappa - 1, 4, wp);
            let norm = x_power(x, kappa, 2, wp);
            sums.iter()
                .map(|s| {
                    let approx = Float::with_val(wp, s * &amp) / &scale;
                    let err = Float::with_val(wp, &exact - approx).abs();
                    Float::with_val(wp, err / &norm).to_f64()
                })
                .collect()
        })
        .collect();

    let rows: Vec<ProfileRow> = n_list
        .iter()
        .enumerate()
        .map(|(j, &n)| {
            let (i, e) = per_x
                .iter()
                .enumerate()
                .map(|(i, errs)| (i, errs[j]))
                .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
            ProfileRow { n, max_rel_error: e, argmax_x: grid[i] }
        })
        .collect();
    let xs: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.max_rel_error).collect();
    let fit = if ys.iter().all(|&e| e > 0.0) { fit_loglog(&xs, &ys) } else { None };
    Ok(TruncationProfile { weight: table.weight(), x_lo, x_hi, grid, rows, fit })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: &Float, b: &Float) -> f64 {
        let d = Float::with_val(a.prec(), a - b).abs();
        (d / Float::with_val(a.prec(), b.abs_ref())).to_f64()
    }

    #[test]
    fn single_term() {
        let t = CoefficientTable::new(12, 10).unwrap();
        let x = 1234.5;
        let r = resonance_sum_r(&t, x, 1, 128).unwrap();
        let want = x.powf(5.75) * (4.0 * std::f64::consts::PI * x.sqrt() - std::f64::consts::FRAC_PI_4).cos();
        assert!((r.to_f64() - want).abs() < 1e-9 * x.powf(5.75));
        assert!(truncated_a(&t, x, 0, 128).is_err());
        assert!(truncated_a(&t, x, 11, 128).is_err());
        assert!(truncated_a(&t, x, 1, 32).is_err());
    }

    #[test]
    fn truncated_a_is_rescaled_r() {
        let t = CoefficientTable::new(12, 500).unwrap();
        let r = resonance_sum_r(&t, 10_000.0, 500, 128).unwrap();
        let a = truncated_a(&t, 10_000.0, 500, 128).unwrap();
        let back = Float::with_val(128, &a * (Float::with_val(128, 2).sqrt() * pi(128)));
        assert!(rel(&back, &r) < 2f64.powi(-64));
        let hi = resonance_sum_r(&t, 10_000.0, 500, 256).unwrap();
        assert!(rel(&r, &hi) < 1e-30);
    }

    #[test]
    fn decomposition_identity_and_direct_oracle() {
        let t = CoefficientTable::new(12, 40).unwrap();
        for (x, y) in [(10_000.5, 1), (5_321.25, 6), (12_345.7, 10)] {
            let fast = decompose_s(&t, x, y, 128).unwrap();
            assert!(fast.residual < 1e-30, "residual {}", fast.residual);
            let direct = decompose_s_direct(&t, x, y, 128).unwrap();
            for i in 0..4 {
                let scale = Float::with_val(128, fast.r4.abs_ref()) + Float::with_val(128, fast.s[0].abs_ref());
                let d = Float::with_val(128, &fast.s[i] - &direct.s[i]).abs();
                assert!(d < scale * 1e-25, "S{} at x={x} y={y}", i + 1);
            }
        }
    }

    #[test]
    fn one_term_decomposition() {
        let t = CoefficientTable::new(12, 4).unwrap();
        let x = 2_000.3;
        let d = decompose_s(&t, x, 1, 128).unwrap();
        let big_x = x.powi(23);
        assert!((d.s[0].to_f64() / big_x - 0.375).abs() < 1e-12);
        assert!(d.s[1].to_f64().abs() < 1e-20 * big_x);
        let theta = 8.0 * std::f64::consts::PI * x.sqrt();
        assert!((d.s[2].to_f64() / big_x - 0.5 * (theta - std::f64::consts::FRAC_PI_2).cos()).abs() < 1e-9);
        assert!((d.s[3].to_f64() / big_x - 0.125 * (2.0 * theta - std::f64::consts::PI).cos()).abs() < 1e-9);
    }

    #[test]
    fn grid_is_strictly_increasing() {
        let g = sample_grid(10_000.0, 20_000.0, 100, 7).unwrap();
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(g.iter().all(|&x| (10_000.0..20_000.0).contains(&x)));
        assert_eq!(g, sample_grid(10_000.0, 20_000.0, 100, 7).unwrap());
        assert!(sample_grid(10.0, 12.0, 5, 0).is_err());
    }

    #[test]
    fn decompose_cap() {
        let t = CoefficientTable::new(12, 2001).unwrap();
        assert!(decompose_s(&t, 1e4, 2001, 128).is_err());
    }
}
