//! Integer sieves and small number-theoretic helpers.

use rug::ops::Pow;
use rug::Integer;

pub fn isqrt_u64(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).is_none_or(|sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    r
}

pub fn isqrt_u128(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut r = (n as f64).sqrt() as u128;
    while r.checked_mul(r).is_none_or(|sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    r
}

/// Square root of `n` when it is a perfect square.
pub fn exact_sqrt_u128(n: u128) -> Option<u128> {
    let r = isqrt_u128(n);
    (r * r == n).then_some(r)
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

/// d(m) for m = 0..=n (entry 0 is 0).
pub fn divisor_counts(n: usize) -> Vec<u32> {
    let mut d = vec![0u32; n + 1];
    for i in 1..=n {
        for j in (i..=n).step_by(i) {
            d[j] += 1;
        }
    }
    d
}

/// σ_j(m) = Σ_{d | m} d^j for m = 0..=n (entry 0 is 0), by a divisor sieve.
pub fn divisor_power_sums(j: u32, n: usize) -> Vec<Integer> {
    let mut sigma: Vec<Integer> = vec![Integer::new(); n + 1];
    for d in 1..=n {
        let power = Integer::from(d).pow(j);
        for m in (d..=n).step_by(d) {
            sigma[m] += &power;
        }
    }
    sigma
}

/// Writes `n = a² q` with `q` squarefree; returns `(a, q)`.
pub fn squarefree_split(n: u64) -> (u64, u64) {
    assert!(n >= 1, "squarefree_split(0)");
    let mut rest = n;
    let mut a = 1u64;
    let mut q = 1u64;
    let mut p = 2u64;
    while p * p <= rest {
        if rest.is_multiple_of(p) {
            let mut e = 0;
            while rest.is_multiple_of(p) {
                rest /= p;
                e += 1;
            }
            a *= p.pow(e / 2);
            if e % 2 == 1 {
                q *= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    q *= rest;
    (a, q)
}

/// Squarefree kernels for every n ≤ limit: `n = multiplier(n)² · kernel(n)`.
#[derive(Clone, Debug)]
pub struct KernelTable {
    kernel: Vec<u64>,
    multiplier: Vec<u64>,
}

impl KernelTable {
    pub fn new(limit: u64) -> Self {
        let n = limit as usize;
        let mut kernel: Vec<u64> = (0..=limit).collect();
        let mut multiplier = vec![1u64; n + 1];
        for p in primes_up_to(isqrt_u64(limit)) {
            let sq = (p * p) as usize;
            let mut m = sq;
            while m <= n {
                while kernel[m].is_multiple_of(p * p) {
                    kernel[m] /= p * p;
                    multiplier[m] *= p;
                }
                m += sq;
            }
        }
        KernelTable { kernel, multiplier }
    }

    pub fn limit(&self) -> u64 {
        (self.kernel.len() - 1) as u64
    }

    pub fn kernel(&self, n: u64) -> u64 {
        self.kernel[n as usize]
    }

    pub fn multiplier(&self, n: u64) -> u64 {
        self.multiplier[n as usize]
    }

    /// Squarefree q ≤ limit in increasing order.
    pub fn kernels(&self) -> impl Iterator<Item = u64> + '_ {
        (1..=self.limit()).filter(move |&q| self.kernel[q as usize] == q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isqrt_edges() {
        assert_eq!(isqrt_u64(0), 0);
        assert_eq!(isqrt_u64(15), 3);
        assert_eq!(isqrt_u64(16), 4);
        assert_eq!(isqrt_u64(u64::MAX), 4294967295);
        assert_eq!(isqrt_u128(u128::MAX), u64::MAX as u128);
        assert_eq!(exact_sqrt_u128(144), Some(12));
        assert_eq!(exact_sqrt_u128(145), None);
    }

    #[test]
    fn sigma_small() {
        let s3 = divisor_power_sums(3, 6);
        let want = [0u32, 1, 9, 28, 73, 126, 252];
        for (m, w) in want.iter().enumerate() {
            assert_eq!(s3[m], *w);
        }
        let d = divisor_counts(12);
        assert_eq!(&d[1..], &[1, 2, 2, 3, 2, 4, 2, 4, 3, 4, 2, 6]);
    }

    #[test]
    fn kernels_agree_with_trial_division() {
        let t = KernelTable::new(2000);
        for n in 1..=2000u64 {
            let (a, q) = squarefree_split(n);
            assert_eq!((t.multiplier(n), t.kernel(n)), (a, q), "n = {n}");
            assert_eq!(a * a * q, n);
        }
        assert_eq!(t.kernels().take(6).collect::<Vec<_>>(), vec![1, 2, 3, 5, 6, 7]);
    }
}
