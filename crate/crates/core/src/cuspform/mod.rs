//! The normalized cusp forms of the weights whose cusp space is one-dimensional,
//! their coefficient tables and exact validators.

mod cache;

pub use cache::{cache_file_name, read_cache, write_cache, CACHE_MAGIC};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Float, Integer};
use serde::Serialize;

use crate::arith::{divisor_counts, gcd, primes_up_to};
use crate::error::{Error, Result};
use crate::real::{int_pow_ratio, BigReal};
use crate::series::{delta, eisenstein, multiply, QSeries};

/// Weights κ with dim S_κ(SL₂(ℤ)) = 1.
pub const SUPPORTED_WEIGHTS: [u32; 6] = [12, 16, 18, 20, 22, 26];

pub fn check_weight(weight: u32) -> Result<()> {
    if SUPPORTED_WEIGHTS.contains(&weight) {
        return Ok(());
    }
    let reason = if weight % 2 == 1 {
        "odd weight: no level-one forms"
    } else if weight < 12 || weight == 14 {
        "the cusp space has dimension 0"
    } else {
        "the cusp space has dimension greater than 1"
    };
    Err(Error::UnsupportedWeight { weight, reason })
}

#[derive(Clone, Debug)]
pub struct CuspForm {
    weight: u32,
    series: QSeries,
}

impl CuspForm {
    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn series(&self) -> &QSeries {
        &self.series
    }
}

/// `Δ · E_{κ−12}` (with `E₀ = 1`), truncated to `n_max` coefficients `q⁰ … q^{n_max−1}`.
pub fn build_form(weight: u32, n_max: usize) -> Result<CuspForm> {
    check_weight(weight)?;
    let d = delta(n_max)?;
    let series = if weight == 12 {
        d
    } else {
        multiply(&d, &eisenstein(weight - 12, n_max)?)?
    };
    Ok(CuspForm { weight, series })
}

/// Exact coefficients `a(1..=n_max)` and prefix sums `A(n) = Σ_{m≤n} a(m)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientTable {
    weight: u32,
    // index 0 holds a(0) = 0 and A(0) = 0
    a: Vec<Integer>,
    prefix: Vec<Integer>,
}

impl CoefficientTable {
    /// Builds the form with `n_max + 1` coefficients and tabulates it.
    pub fn new(weight: u32, n_max: u64) -> Result<Self> {
        let form = build_form(weight, n_max as usize + 1)?;
        Ok(build_table(&form))
    }

    /// Table from `a(1..=n_max)` given as `coeffs[0..n_max]`.
    pub fn from_coefficients(weight: u32, coeffs: Vec<Integer>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::invalid("coefficient table needs n_max >= 1"));
        }
        let mut a = Vec::with_capacity(coeffs.len() + 1);
        a.push(Integer::new());
        a.extend(coeffs);
        let prefix = prefix_sums(&a);
        Ok(CoefficientTable { weight, a, prefix })
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn n_max(&self) -> u64 {
        (self.a.len() - 1) as u64
    }

    /// a(n) for 1 ≤ n ≤ n_max.
    pub fn a(&self, n: u64) -> &Integer {
        assert!(n >= 1 && n <= self.n_max(), "a({n}) outside table");
        &self.a[n as usize]
    }

    /// A(n) for 0 ≤ n ≤ n_max.
    pub fn big_a(&self, n: u64) -> &Integer {
        &self.prefix[n as usize]
    }

    pub fn coefficients(&self) -> &[Integer] {
        &self.a[1..]
    }

    pub fn prefix_sums(&self) -> &[Integer] {
        &self.prefix[1..]
    }

    fn require(&self, n: u64, what: impl FnOnce() -> String) -> Result<()> {
        if n > self.n_max() {
            return Err(Error::TableTooShort { requested: what(), n_max: self.n_max() });
        }
        Ok(())
    }

    pub(crate) fn require_n(&self, n: u64, name: &str) -> Result<()> {
        self.require(n, || format!("{name} = {n}"))
    }

    /// `A(x) = A(⌊x⌋)`, and 0 for `x < 1`.
    pub fn partial_sum(&self, x: f64) -> Result<Integer> {
        if !(x >= 0.0) || !x.is_finite() {
            return Err(Error::invalid(format!("A(x) needs a finite x >= 0, got {x}")));
        }
        let n = x.floor() as u64;
        self.require(n, || format!("x = {x}"))?;
        Ok(self.prefix[n as usize].clone())
    }

    /// ã(n) = a(n) n^{−(κ−1)/2}.
    pub fn normalized(&self, n: u64, prec: u32) -> NormalizedCoefficient {
        let scale = int_pow_ratio(n, -(self.weight as i64 - 1), 2, prec + 8);
        let value = Float::with_val(prec, self.a(n) * scale);
        NormalizedCoefficient { n, value }
    }

    /// ã(n) / n^{3/4} = a(n) n^{−(2κ+1)/4}: the per-index weight of the
    /// Voronoi sum and of the singular series.
    pub fn resonance_weight(&self, n: u64, prec: u32) -> Float {
        let scale = int_pow_ratio(n, -(2 * self.weight as i64 + 1), 4, prec + 8);
        Float::with_val(prec, self.a(n) * scale)
    }

    /// Checks `|a(n)| ≤ d(n) n^{(κ−1)/2}` for every stored n by the exact
    /// comparison `a(n)² ≤ d(n)² n^{κ−1}`.
    pub fn check_deligne(&self) -> Result<DeligneReport> {
        let n_max = self.n_max() as usize;
        let d = divisor_counts(n_max);
        let weight = self.weight;
        let chunk = 4096;
        let partials: Vec<std::result::Result<(f64, u64), u64>> = (1..=n_max)
            .collect::<Vec<_>>()
            .par_chunks(chunk)
            .map(|ns| {
                let mut best = (f64::NEG_INFINITY, 0u64);
                for &n in ns {
                    let a = &self.a[n];
                    let lhs = Integer::from(a.square_ref());
                    let n_pow = Integer::from(n).pow(weight - 1);
                    let rhs = Integer::from(d[n]).pow(2) * &n_pow;
                    if lhs > rhs {
                        return Err(n as u64);
                    }
                    let ratio = Float::with_val(64, a).abs()
                        / (Float::with_val(64, d[n]) * Float::with_val(64, &n_pow).sqrt());
                    let ratio = ratio.to_f64();
                    if ratio > best.0 {
                        best = (ratio, n as u64);
                    }
                }
                Ok(best)
            })
            .collect();
        let mut best = (f64::NEG_INFINITY, 0u64);
        for p in partials {
            match p {
                Err(n) => {
                    return Err(Error::Validation {
                        check: "Deligne bound",
                        witness: n.to_string(),
                        detail: format!("|a({n})| > d({n}) {n}^(({weight}-1)/2)"),
                    })
                }
                Ok((r, n)) if r > best.0 => best = (r, n),
                Ok(_) => {}
            }
        }
        Ok(DeligneReport { weight, checked: n_max as u64, max_ratio: best.0, argmax: best.1 })
    }

    /// Random exact checks of `a(mn) = a(m)a(n)` for coprime `m, n` and
    /// `a(p²) = a(p)² − p^{κ−1}` for primes `p`.
    pub fn check_hecke(&self, pairs: usize, prime_squares: usize, seed: u64) -> Result<HeckeReport> {
        let n_max = self.n_max();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pairs_checked = 0;
        if n_max >= 6 {
            let mut attempts = 0;
            while pairs_checked < pairs && attempts < 100 * pairs.max(1) {
                attempts += 1;
                let m = rng.gen_range(2..=n_max / 2);
                if n_max / m < 2 {
                    continue;
                }
                let n = rng.gen_range(2..=n_max / m);
                if gcd(m, n) != 1 {
                    continue;
                }
                let product = Integer::from(self.a(m) * self.a(n));
                if *self.a(m * n) != product {
                    return Err(Error::Validation {
                        check: "Hecke multiplicativity",
                        witness: format!("({m}, {n})"),
                        detail: format!("a({}) = {} but a({m})a({n}) = {product}", m * n, self.a(m * n)),
                    });
                }
                pairs_checked += 1;
            }
        }
        let primes = primes_up_to(crate::arith::isqrt_u64(n_max));
        let mut squares_checked = 0;
        if !primes.is_empty() {
            for _ in 0..prime_squares {
                let p = primes[rng.gen_range(0..primes.len())];
                let want = Integer::from(self.a(p).square_ref()) - Integer::from(p).pow(self.weight - 1);
                if *self.a(p * p) != want {
                    return Err(Error::Validation {
                        check: "Hecke prime-square relation",
                        witness: p.to_string(),
                        detail: format!("a({}) = {} but a(p)² − p^(κ−1) = {want}", p * p, self.a(p * p)),
                    });
                }
                squares_checked += 1;
            }
        }
        Ok(HeckeReport { weight: self.weight, pairs_checked, prime_squares_checked: squares_checked })
    }
}

fn prefix_sums(a: &[Integer]) -> Vec<Integer> {
    let mut prefix = Vec::with_capacity(a.len());
    let mut acc = Integer::new();
    for x in a {
        acc += x;
        prefix.push(acc.clone());
    }
    prefix
}

/// Tabulates a(n) and exact prefix sums for `n = 1 .. series.len() − 1`.
pub fn build_table(form: &CuspForm) -> CoefficientTable {
    let a = form.series.coeffs().to_vec();
    let prefix = prefix_sums(&a);
    CoefficientTable { weight: form.weight, a, prefix }
}

#[derive(Clone, Debug)]
pub struct NormalizedCoefficient {
    pub n: u64,
    pub value: BigReal,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeligneReport {
    pub weight: u32,
    pub checked: u64,
    /// max |a(n)| / (d(n) n^{(κ−1)/2})
    pub max_ratio: f64,
    pub argmax: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct HeckeReport {
    pub weight: u32,
    pub pairs_checked: usize,
    pub prime_squares_checked: usize,
}
