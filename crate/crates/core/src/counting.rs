//! Counts of near-solutions `0 < |√n₁ + √n₂ ± √n₃ − √n₄| < Δ` over dyadic
//! boxes, and the minimum nonzero gap.
//!
//! The fast counter splits `η = left − right` with `left = √n₁ + √n₂` and
//! `right = √n₄ ∓ √n₃`, sorts the right values in binary64 and counts each
//! window `(left − Δ, left + Δ)` by binary search. Every candidate whose
//! floating value lies within the error radius of `0` or `±Δ` is settled by
//! the exact predicates in [`crate::radical`].

use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::radical::{self, Term};

/// `n ∼ N` means `N < n ≤ 2N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct DyadicBox {
    pub n: u64,
    pub m: u64,
    pub k: u64,
    pub l: u64,
}

impl DyadicBox {
    pub fn new(n: u64, m: u64, k: u64, l: u64) -> Result<Self> {
        if [n, m, k, l].contains(&0) {
            return Err(Error::invalid("box sides must be at least 1"));
        }
        if [n, m, k, l].iter().any(|&s| s > 1 << 24) {
            return Err(Error::invalid("box sides above 2^24 are not supported"));
        }
        Ok(DyadicBox { n, m, k, l })
    }

    pub fn sides(&self) -> [u64; 4] {
        [self.n, self.m, self.k, self.l]
    }
}

impl fmt::Display for DyadicBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.n, self.m, self.k, self.l)
    }
}

/// The sign in front of `√n₃`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }

    fn coefficient(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Lemma {
    /// `√n + √m − √k − √ℓ` with the bound `ΔL^{1/2}NMK + NKL^{1/2}`
    A1,
    /// `√n₁ + √n₂ ± √n₃ − √n₄` with the bound `∏(Δ^{1/4}N_j^{7/8} + N_j^{1/2})`
    Apm(Sign),
}

impl Lemma {
    pub fn sign(self) -> Sign {
        match self {
            Lemma::A1 => Sign::Minus,
            Lemma::Apm(s) => s,
        }
    }
}

/// Whether the hypotheses of the `A1` bound hold for a box; `M ≍ L` is read
/// as `1/2 ≤ M/L ≤ 2` and `Δ ≪ L^{1/2}` as `Δ ≤ L^{1/2}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct A1Hypotheses {
    pub n_le_m: bool,
    pub k_le_l: bool,
    pub n_le_k: bool,
    pub m_comparable_l: bool,
    pub delta_small: bool,
    /// `ΔL^{1/2} ≥ 1`, where the first term of the bound dominates
    pub delta_large_clause: bool,
}

impl A1Hypotheses {
    pub fn new(b: &DyadicBox, delta: f64) -> Self {
        let (m, l) = (b.m as f64, b.l as f64);
        A1Hypotheses {
            n_le_m: b.n <= b.m,
            k_le_l: b.k <= b.l,
            n_le_k: b.n <= b.k,
            m_comparable_l: (0.5..=2.0).contains(&(m / l)),
            delta_small: delta <= l.sqrt(),
            delta_large_clause: delta * l.sqrt() >= 1.0,
        }
    }

    pub fn all(&self) -> bool {
        self.n_le_m && self.k_le_l && self.n_le_k && self.m_comparable_l && self.delta_small
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CountReport {
    pub lemma: Lemma,
    pub boxes: DyadicBox,
    pub delta: f64,
    pub count: u64,
    pub bound: f64,
    pub ratio: f64,
    pub hypotheses: Option<A1Hypotheses>,
}

impl CountReport {
    pub fn sign(&self) -> Sign {
        self.lemma.sign()
    }

    pub const CSV_HEADER: &'static str = "N,M,K,L,delta,sign,count,bound,ratio";

    pub fn csv_row(&self) -> String {
        let b = &self.boxes;
        format!(
            "{},{},{},{},{:e},{},{},{:e},{:e}",
            b.n,
            b.m,
            b.k,
            b.l,
            self.delta,
            self.sign().symbol(),
            self.count,
            self.bound,
            self.ratio
        )
    }
}

pub fn a1_bound(b: &DyadicBox, delta: f64) -> f64 {
    let (n, m, k, l) = (b.n as f64, b.m as f64, b.k as f64, b.l as f64);
    delta * l.sqrt() * n * m * k + n * k * l.sqrt()
}

pub fn apm_bound(b: &DyadicBox, delta: f64) -> f64 {
    b.sides()
        .iter()
        .map(|&s| {
            let s = s as f64;
            delta.powf(0.25) * s.powf(0.875) + s.sqrt()
        })
        .product()
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::invalid(format!("delta must be a positive finite real, got {delta}")));
    }
    Ok(())
}

fn terms(q: [u64; 4], sign: Sign) -> [Term; 4] {
    [(1, q[0]), (1, q[1]), (sign.coefficient(), q[2]), (-1, q[3])]
}

/// Exact `η = 0`.
pub fn gap_is_zero(q: [u64; 4], sign: Sign) -> bool {
    radical::is_zero(&terms(q, sign), &Rational::new())
}

/// Exact `0 < |η| < Δ`.
pub fn gap_within(q: [u64; 4], sign: Sign, delta: f64) -> bool {
    let t = terms(q, sign);
    if radical::is_zero(&t, &Rational::new()) {
        return false;
    }
    let d = Rational::from_f64(delta).expect("finite delta");
    radical::sign(&t, &-d.clone()) == Ordering::Less && radical::sign(&t, &d) == Ordering::Greater
}

/// Error radius for binary64 sums of four square roots of size ≤ `scale`.
fn radius(scale: f64) -> f64 {
    16.0 * f64::EPSILON * scale.max(1.0)
}

fn dyadic_range(side: u64) -> std::ops::RangeInclusive<u64> {
    side + 1..=2 * side
}

/// Window counter for one box and sign, reusable across many `Δ`.
pub struct Counter {
    sign: Sign,
    left: Vec<(f64, u64, u64)>,
    right: Vec<(f64, u64, u64)>,
    eps: f64,
}

impl Counter {
    pub fn new(b: &DyadicBox, sign: Sign) -> Self {
        let sq = |n: u64| (n as f64).sqrt();
        let mut left = Vec::new();
        for n1 in dyadic_range(b.n) {
            for n2 in dyadic_range(b.m) {
                left.push((sq(n1) + sq(n2), n1, n2));
            }
        }
        let mut right = Vec::new();
        for n3 in dyadic_range(b.k) {
            for n4 in dyadic_range(b.l) {
                let v = match sign {
                    Sign::Minus => sq(n3) + sq(n4),
                    Sign::Plus => sq(n4) - sq(n3),
                };
                right.push((v, n3, n4));
            }
        }
        right.sort_by(|a, b| a.0.total_cmp(&b.0));
        let scale = 4.0 * (2 * b.sides().into_iter().max().unwrap()) as f64;
        Counter { sign, left, right, eps: radius(scale.sqrt() * 2.0) }
    }

    fn lower(&self, v: f64) -> usize {
        self.right.partition_point(|r| r.0 < v)
    }

    fn upper(&self, v: f64) -> usize {
        self.right.partition_point(|r| r.0 <= v)
    }

    pub fn count(&self, delta: f64) -> Result<u64> {
        check_delta(delta)?;
        let eps = self.eps;
        Ok(self
            .left
            .par_iter()
            .map(|&(s, n1, n2)| {
                let exact = |range: std::ops::Range<usize>| -> u64 {
                    self.right[range]
                        .iter()
                        .filter(|&&(_, n3, n4)| gap_within([n1, n2, n3, n4], self.sign, delta))
                        .count() as u64
                };
                // certain: ε < |s − v| < Δ − ε
                let mut total = 0u64;
                if delta > 2.0 * eps {
                    total += (self.lower(s - eps) - self.upper(s - delta + eps)) as u64;
                    total += (self.lower(s + delta - eps) - self.upper(s + eps)) as u64;
                }
                // uncertain bands around 0 and ±Δ, clipped to the window
                let mut bands = [
                    (self.lower(s - delta - eps), self.upper(s - delta + eps)),
                    (self.lower(s - eps), self.upper(s + eps)),
                    (self.lower(s + delta - eps), self.upper(s + delta + eps)),
                ];
                if delta <= 2.0 * eps {
                    bands = [(self.lower(s - delta - eps), self.upper(s + delta + eps)), (0, 0), (0, 0)];
                }
                let mut last_end = 0;
                for (lo, hi) in bands {
                    let lo = lo.max(last_end);
                    if lo < hi {
                        total += exact(lo..hi);
                        last_end = hi;
                    }
                }
                total
            })
            .sum())
    }
}

pub fn count_a1(b: &DyadicBox, delta: f64) -> Result<CountReport> {
    let count = Counter::new(b, Sign::Minus).count(delta)?;
    Ok(report(Lemma::A1, b, delta, count))
}

pub fn count_apm(b: &DyadicBox, delta: f64, sign: Sign) -> Result<CountReport> {
    let count = Counter::new(b, sign).count(delta)?;
    Ok(report(Lemma::Apm(sign), b, delta, count))
}

fn report(lemma: Lemma, b: &DyadicBox, delta: f64, count: u64) -> CountReport {
    let (bound, hypotheses) = match lemma {
        Lemma::A1 => (a1_bound(b, delta), Some(A1Hypotheses::new(b, delta))),
        Lemma::Apm(_) => (apm_bound(b, delta), None),
    };
    CountReport { lemma, boxes: *b, delta, count, bound, ratio: count as f64 / bound, hypotheses }
}

/// Reference counts by scanning every quadruple in the box once; the sorted
/// nonzero gaps then answer any number of `Δ`.
pub struct BruteForce {
    sign: Sign,
    gaps: Vec<(f64, [u64; 4])>,
    eps: f64,
}

impl BruteForce {
    pub fn new(b: &DyadicBox, sign: Sign) -> Self {
        let eps = radius(2.0 * (2 * b.sides().into_iter().max().unwrap()) as f64);
        let mut gaps = Vec::new();
        for n1 in dyadic_range(b.n) {
            for n2 in dyadic_range(b.m) {
                for n3 in dyadic_range(b.k) {
                    for n4 in dyadic_range(b.l) {
                        let q = [n1, n2, n3, n4];
                        let s3 = (n3 as f64).sqrt() * sign.coefficient() as f64;
                        let eta = (n1 as f64).sqrt() + (n2 as f64).sqrt() + s3 - (n4 as f64).sqrt();
                        if eta.abs() <= eps && gap_is_zero(q, sign) {
                            continue;
                        }
                        gaps.push((eta.abs(), q));
                    }
                }
            }
        }
        gaps.sort_by(|a, b| a.0.total_cmp(&b.0));
        BruteForce { sign, gaps, eps }
    }

    pub fn count(&self, delta: f64) -> Result<u64> {
        check_delta(delta)?;
        let sure = self.gaps.partition_point(|g| g.0 < delta - self.eps);
        let end = self.gaps.partition_point(|g| g.0 <= delta + self.eps);
        let unsure = self.gaps[sure..end].iter().filter(|g| gap_within(g.1, self.sign, delta)).count();
        Ok((sure + unsure) as u64)
    }
}

/// Minimum of `|η|` and of `|η|·(nmkℓ)^{1/2}·max^{3/2}` over nonzero gaps.
#[derive(Clone, Debug, Serialize)]
pub struct GapReport {
    pub max_value: u64,
    pub normalized_min: f64,
    pub normalized_witness: [u64; 4],
    pub normalized_sign: Sign,
    pub raw_min: f64,
    pub raw_witness: [u64; 4],
    pub raw_sign: Sign,
    /// sign of `η` at the raw witness
    pub raw_eta_negative: bool,
    pub quadruples_scanned: u64,
}

pub const MIN_GAP_MAX_VALUE: u64 = 300;

#[derive(Clone, Copy)]
struct Candidate {
    value: f64,
    quad: [u64; 4],
    sign: Sign,
}

/// Candidates within a relative slack of the running minimum, so that the
/// final choice can be made from accurately recomputed values.
#[derive(Clone, Default)]
struct Shortlist {
    best: f64,
    items: Vec<Candidate>,
}

const SLACK: f64 = 1e-3;

impl Shortlist {
    fn new() -> Self {
        Shortlist { best: f64::INFINITY, items: Vec::new() }
    }

    fn offer(&mut self, c: Candidate) {
        if c.value > self.best * (1.0 + SLACK) {
            return;
        }
        if c.value < self.best {
            self.best = c.value;
            if self.items.len() > 64 {
                let cut = self.best * (1.0 + SLACK);
                self.items.retain(|x| x.value <= cut);
            }
        }
        self.items.push(c);
    }

    fn merge(mut self, other: Shortlist) -> Shortlist {
        for c in other.items {
            self.offer(c);
        }
        self
    }
}

struct GapAcc {
    raw: Shortlist,
    normalized: Shortlist,
    scanned: u64,
}

impl GapAcc {
    fn new() -> Self {
        GapAcc { raw: Shortlist::new(), normalized: Shortlist::new(), scanned: 0 }
    }

    fn merge(self, other: GapAcc) -> GapAcc {
        GapAcc {
            raw: self.raw.merge(other.raw),
            normalized: self.normalized.merge(other.normalized),
            scanned: self.scanned + other.scanned,
        }
    }
}

/// `η` at 256 bits from an interval enclosure.
fn accurate_eta(q: [u64; 4], sign: Sign) -> Float {
    let (lo, hi) = radical::enclose(&terms(q, sign), &Rational::new(), 256);
    Float::with_val(256, lo + hi) / 2u32
}

fn normalization(q: [u64; 4]) -> Float {
    let prod = q.iter().fold(Integer::from(1), |acc, &v| acc * v);
    let max = *q.iter().max().unwrap();
    Float::with_val(256, prod).sqrt() * Float::with_val(256, max).pow(1.5f64)
}


fn finalize(list: &Shortlist, normalized: bool) -> (f64, [u64; 4], Sign, bool) {
    // ties go to the minus pattern, then to the smaller quadruple
    let rank = |s: Sign| if s == Sign::Minus { 0 } else { 1 };
    let mut best: Option<(Float, [u64; 4], Sign, bool)> = None;
    for c in &list.items {
        let eta = accurate_eta(c.quad, c.sign);
        let negative = eta < 0;
        let mut v = eta.abs();
        if normalized {
            v *= normalization(c.quad);
        }
        let better = match &best {
            None => true,
            Some((bv, bq, bs, _)) => match v.partial_cmp(bv).unwrap() {
                Ordering::Less => true,
                Ordering::Equal => (rank(c.sign), c.quad) < (rank(*bs), *bq),
                Ordering::Greater => false,
            },
        };
        if better {
            best = Some((v, c.quad, c.sign, negative));
        }
    }
    let (v, q, s, neg) = best.expect("at least one nonzero gap");
    (v.to_f64(), q, s, neg)
}

/// Scans all quadruples with entries ≤ `max_value` for both sign patterns.
///
/// Only one representative per symmetry class is visited: for the minus
/// pattern `n ≤ m`, `k ≤ ℓ` and `(n, m) ≤ (k, ℓ)`, for the plus pattern
/// `n ≤ m ≤ k`. These are the lexicographically smallest images, and they
/// are what the witnesses report.
pub fn min_gap_scan(max_value: u64) -> Result<GapReport> {
    if max_value < 2 {
        return Err(Error::invalid("max_value must be at least 2"));
    }
    if max_value > MIN_GAP_MAX_VALUE {
        return Err(Error::invalid(format!(
            "max_value {max_value} exceeds {MIN_GAP_MAX_VALUE}; the scan is quartic"
        )));
    }
    let v = max_value as usize;
    let sq: Vec<f64> = (0..=v).map(|i| (i as f64).sqrt()).collect();
    let eps = radius(4.0 * sq[v]);

    let visit = |acc: &mut GapAcc, q: [u64; 4], sign: Sign| {
        acc.scanned += 1;
        let [n, m, k, l] = q.map(|x| x as usize);
        let eta = match sign {
            Sign::Minus => (sq[n] + sq[m]) - (sq[k] + sq[l]),
            Sign::Plus => (sq[n] + sq[m] + sq[k]) - sq[l],
        };
        let mut a = eta.abs();
        if a <= eps {
            if gap_is_zero(q, sign) {
                return;
            }
            a = accurate_eta(q, sign).abs().to_f64();
        }
        let max = n.max(m).max(k).max(l);
        let norm = a * (sq[n] * sq[m] * sq[k] * sq[l]) * (max as f64 * sq[max]);
        acc.raw.offer(Candidate { value: a, quad: q, sign });
        acc.normalized.offer(Candidate { value: norm, quad: q, sign });
    };

    let minus = (1..=max_value)
        .into_par_iter()
        .fold(GapAcc::new, |mut acc, n| {
            for m in n..=max_value {
                for k in n..=max_value {
                    let l_start = if k == n { m } else { k };
                    for l in l_start..=max_value {
                        visit(&mut acc, [n, m, k, l], Sign::Minus);
                    }
                }
            }
            acc
        })
        .reduce(GapAcc::new, GapAcc::merge);
    let plus = (1..=max_value)
        .into_par_iter()
        .fold(GapAcc::new, |mut acc, n| {
            for m in n..=max_value {
                for k in m..=max_value {
                    for l in 1..=max_value {
                        visit(&mut acc, [n, m, k, l], Sign::Plus);
                    }
                }
            }
            acc
        })
        .reduce(GapAcc::new, GapAcc::merge);
    let all = minus.merge(plus);

    let (raw_min, raw_witness, raw_sign, raw_eta_negative) = finalize(&all.raw, false);
    let (normalized_min, normalized_witness, normalized_sign, _) = finalize(&all.normalized, true);
    Ok(GapReport {
        max_value,
        normalized_min,
        normalized_witness,
        normalized_sign,
        raw_min,
        raw_witness,
        raw_sign,
        raw_eta_negative,
        quadruples_scanned: all.scanned,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub alarm_threshold: f64,
    pub rows: Vec<CountReport>,
    /// indices into `rows` whose ratio exceeds the alarm threshold
    pub alarms: Vec<usize>,
}

impl SweepReport {
    pub fn csv(&self) -> String {
        let mut out = format!("{}\n", CountReport::CSV_HEADER);
        for r in &self.rows {
            out.push_str(&r.csv_row());
            out.push('\n');
        }
        out
    }
}

pub const DEFAULT_ALARM: f64 = 10.0;

/// Count/bound ratios for every box and `Δ`. A ratio above `alarm` points
/// at a counter bug rather than at the bound.
pub fn lemma_ratio_sweep(lemma: Lemma, boxes: &[DyadicBox], deltas: &[f64], alarm: f64) -> Result<SweepReport> {
    for &d in deltas {
        check_delta(d)?;
    }
    let per_box: Vec<Vec<CountReport>> = boxes
        .par_iter()
        .map(|b| {
            let counter = Counter::new(b, lemma.sign());
            deltas
                .iter()
                .map(|&d| counter.count(d).map(|c| report(lemma, b, d, c)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<CountReport> = per_box.into_iter().flatten().collect();
    let alarms = rows.iter().enumerate().filter(|(_, r)| r.ratio > alarm).map(|(i, _)| i).collect();
    Ok(SweepReport { alarm_threshold: alarm, rows, alarms })
}
