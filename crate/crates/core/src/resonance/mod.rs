//! Exact solutions of `√n₁ + … + √n_ℓ = √n_{ℓ+1} + … + √n_k` and the
//! truncated singular series built on them.
//!
//! Enumeration rests on the squarefree-kernel classification: with
//! `n = a² q`, every solution of the supported shapes is either a family of
//! common kernel `q` whose multipliers balance (`a + b = c + d` for (4,2),
//! `a + b = c` for (3,2)) or, for (4,2), a pair of distinct kernels on the
//! left repeated as a multiset on the right.

mod series;

pub use series::{
    check_dyadic, constant_ck, constant_prefactor, s_trunc, s_trunc_enumerated, s_trunc_with, tail_fit,
    MomentConstant, SeriesValue, TailFit,
};

use std::fmt;

use serde::Serialize;

use crate::arith::{exact_sqrt_u128, isqrt_u64, KernelTable};
use crate::error::{Error, Result};

/// Largest argument accepted by the exact predicates (products stay in i128).
pub const EXACT_ARG_MAX: u64 = 1 << 40;

/// The supported `(k, ℓ)` pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Shape {
    /// √n₁ = √n₂
    TwoOne,
    /// √n₁ + √n₂ = √n₃
    ThreeTwo,
    /// √n₁ + √n₂ = √n₃ + √n₄
    FourTwo,
}

impl Shape {
    pub const ALL: [Shape; 3] = [Shape::TwoOne, Shape::ThreeTwo, Shape::FourTwo];

    pub fn new(k: u32, l: u32) -> Result<Self> {
        match (k, l) {
            (2, 1) => Ok(Shape::TwoOne),
            (3, 2) => Ok(Shape::ThreeTwo),
            (4, 2) => Ok(Shape::FourTwo),
            _ => Err(Error::UnsupportedShape { k, l }),
        }
    }

    pub fn k(self) -> u32 {
        match self {
            Shape::TwoOne => 2,
            Shape::ThreeTwo => 3,
            Shape::FourTwo => 4,
        }
    }

    pub fn l(self) -> u32 {
        match self {
            Shape::TwoOne => 1,
            Shape::ThreeTwo | Shape::FourTwo => 2,
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.k(), self.l())
    }
}

fn check_args(args: &[u64]) -> Result<()> {
    for &n in args {
        if n == 0 {
            return Err(Error::invalid("square-root arguments must be positive integers"));
        }
        if n > EXACT_ARG_MAX {
            return Err(Error::invalid(format!("argument {n} exceeds 2^40")));
        }
    }
    Ok(())
}

/// Decides `√n + √m = √k + √l` in integer arithmetic.
///
/// With `D = n + m − k − l` the equation is equivalent to
/// `2√(kl) − 2√(nm) = D`: for `D = 0` this means `nm = kl`, otherwise `nm`
/// must be a square `s²` with `4Ds = 4kl − 4nm − D²`, confirmed by
/// substituting back (`D + 2s ≥ 0`, `(D + 2s)² = 4kl`).
pub fn exact_equal(n: u64, m: u64, k: u64, l: u64) -> Result<bool> {
    check_args(&[n, m, k, l])?;
    Ok(exact_equal_unchecked(n, m, k, l))
}

pub(crate) fn exact_equal_unchecked(n: u64, m: u64, k: u64, l: u64) -> bool {
    let (n, m, k, l) = (n as i128, m as i128, k as i128, l as i128);
    let d = n + m - k - l;
    if d == 0 {
        return n * m == k * l;
    }
    let Some(s) = exact_sqrt_u128((n * m) as u128) else {
        return false;
    };
    let s = s as i128;
    if 4 * d * s != 4 * k * l - 4 * n * m - d * d {
        return false;
    }
    let t = d + 2 * s;
    t >= 0 && t * t == 4 * k * l
}

/// Decides `√n₁ + √n₂ = √n₃`: `n₁n₂ = s²` and `n₁ + n₂ + 2s = n₃`.
pub fn exact_equal_three(n1: u64, n2: u64, n3: u64) -> Result<bool> {
    check_args(&[n1, n2, n3])?;
    Ok(exact_equal_three_unchecked(n1, n2, n3))
}

fn exact_equal_three_unchecked(n1: u64, n2: u64, n3: u64) -> bool {
    match exact_sqrt_u128(n1 as u128 * n2 as u128) {
        Some(s) => n1 as u128 + n2 as u128 + 2 * s == n3 as u128,
        None => false,
    }
}

/// A common-kernel solution `(a²q, b²q, …)`; `left` and `right` hold the
/// multipliers of the two sides, which have equal sums.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct KernelFamily {
    pub kernel: u64,
    pub left: Vec<u64>,
    pub right: Vec<u64>,
}

impl KernelFamily {
    pub fn tuple(&self) -> Vec<u64> {
        self.left
            .iter()
            .chain(&self.right)
            .map(|a| a * a * self.kernel)
            .collect()
    }

    pub fn is_balanced(&self) -> bool {
        self.left.iter().sum::<u64>() == self.right.iter().sum::<u64>()
    }
}

/// Common-kernel families with every entry ≤ y, ordered by (kernel, multipliers).
pub fn kernel_families(shape: Shape, y: u64) -> Result<Vec<KernelFamily>> {
    if y == 0 {
        return Err(Error::invalid("y must be at least 1"));
    }
    let kernels = KernelTable::new(y);
    let mut out = Vec::new();
    for q in kernels.kernels() {
        let top = isqrt_u64(y / q);
        match shape {
            Shape::TwoOne => {
                for a in 1..=top {
                    out.push(KernelFamily { kernel: q, left: vec![a], right: vec![a] });
                }
            }
            Shape::ThreeTwo => {
                for a in 1..top {
                    for b in 1..=top - a {
                        out.push(KernelFamily { kernel: q, left: vec![a, b], right: vec![a + b] });
                    }
                }
            }
            Shape::FourTwo => {
                for a in 1..=top {
                    for b in 1..=top {
                        let s = a + b;
                        for c in s.saturating_sub(top).max(1)..=(s - 1).min(top) {
                            out.push(KernelFamily { kernel: q, left: vec![a, b], right: vec![c, s - c] });
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Every ordered tuple with entries ≤ y solving the shape's equation,
/// sorted lexicographically.
pub fn enumerate_solutions(shape: Shape, y: u64) -> Result<Vec<Vec<u64>>> {
    let mut out: Vec<Vec<u64>> = kernel_families(shape, y)?.iter().map(KernelFamily::tuple).collect();
    if shape == Shape::FourTwo {
        let kernels = KernelTable::new(y);
        for n in 1..=y {
            for m in 1..=y {
                if kernels.kernel(n) != kernels.kernel(m) {
                    out.push(vec![n, m, n, m]);
                    out.push(vec![n, m, m, n]);
                }
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Reference enumeration: scans every tuple ≤ y with the integer predicates
/// [`exact_equal`] and [`exact_equal_three`].
pub fn brute_force_solutions(shape: Shape, y: u64) -> Result<Vec<Vec<u64>>> {
    if y == 0 {
        return Err(Error::invalid("y must be at least 1"));
    }
    check_args(&[y])?;
    let mut out = Vec::new();
    match shape {
        Shape::TwoOne => {
            for n1 in 1..=y {
                for n2 in 1..=y {
                    if exact_equal_unchecked(n1, 1, n2, 1) {
                        out.push(vec![n1, n2]);
                    }
                }
            }
        }
        Shape::ThreeTwo => {
            for n1 in 1..=y {
                for n2 in 1..=y {
                    for n3 in 1..=y {
                        if exact_equal_three_unchecked(n1, n2, n3) {
                            out.push(vec![n1, n2, n3]);
                        }
                    }
                }
            }
        }
        Shape::FourTwo => {
            use rayon::prelude::*;
            let rows: Vec<Vec<Vec<u64>>> = (1..=y)
                .into_par_iter()
                .map(|n| {
                    let mut row = Vec::new();
                    for m in 1..=y {
                        for k in 1..=y {
                            for l in 1..=y {
                                if exact_equal_unchecked(n, m, k, l) {
                                    row.push(vec![n, m, k, l]);
                                }
                            }
                        }
                    }
                    row
                })
                .collect();
            out = rows.into_iter().flatten().collect();
        }
    }
    Ok(out)
}
