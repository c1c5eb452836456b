//! Exact integer convolution through number-theoretic transforms.
//!
//! Inputs are reduced modulo several primes `p = c·2^30 + 1 < 2^62`, each
//! convolution is carried out with a radix-2 transform in Montgomery form,
//! and the coefficients are lifted back to ℤ with Garner's mixed-radix CRT.
//! The number of primes is chosen per call so that their product exceeds
//! twice the worst-case coefficient `len · max|a| · max|b|`.

use std::sync::OnceLock;

use rayon::prelude::*;
use rug::Integer;

/// Fewest primes used by any exact convolution.
pub const MIN_PRIMES: usize = 4;

const TWO_ADICITY: u32 = 30;
/// Every prime in the pool exceeds 2^PRIME_FLOOR_BITS.
const PRIME_FLOOR_BITS: u32 = 61;
const POOL_SIZE: usize = 48;

#[derive(Clone, Copy, Debug)]
struct Mont {
    p: u64,
    /// −p⁻¹ mod 2⁶⁴
    neg_inv: u64,
    /// 2¹²⁸ mod p
    r2: u64,
}

impl Mont {
    fn new(p: u64) -> Self {
        let mut inv = p;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(p.wrapping_mul(inv)));
        }
        debug_assert_eq!(p.wrapping_mul(inv), 1);
        let r = ((1u128 << 64) % p as u128) as u64;
        let r2 = ((r as u128 * r as u128) % p as u128) as u64;
        Mont { p, neg_inv: inv.wrapping_neg(), r2 }
    }

    #[inline(always)]
    fn redc(&self, t: u128) -> u64 {
        let m = (t as u64).wrapping_mul(self.neg_inv);
        let u = ((t + m as u128 * self.p as u128) >> 64) as u64;
        if u >= self.p {
            u - self.p
        } else {
            u
        }
    }

    #[inline(always)]
    fn mul(&self, a: u64, b: u64) -> u64 {
        self.redc(a as u128 * b as u128)
    }

    #[inline(always)]
    fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline(always)]
    fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    fn to_mont(&self, a: u64) -> u64 {
        self.mul(a % self.p, self.r2)
    }

    fn from_mont(&self, a: u64) -> u64 {
        self.redc(a as u128)
    }

    /// Montgomery-form power of a Montgomery-form base.
    fn pow(&self, base: u64, mut e: u64) -> u64 {
        let mut acc = self.to_mont(1);
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        acc
    }

    /// Standard-form residue of an arbitrary integer.
    fn reduce(&self, x: &Integer) -> u64 {
        let mut r = 0u64;
        for &limb in x.as_limbs().iter().rev() {
            // r·2⁶⁴ + limb
            r = self.add(self.mul(r, self.r2), limb % self.p);
        }
        if x.is_negative() && r != 0 {
            self.p - r
        } else {
            r
        }
    }
}

#[derive(Clone, Debug)]
struct NttPrime {
    mont: Mont,
    /// Montgomery form of a primitive 2^TWO_ADICITY-th root of unity.
    root: u64,
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        acc
    };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn pool() -> &'static [NttPrime] {
    static POOL: OnceLock<Vec<NttPrime>> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut primes = Vec::with_capacity(POOL_SIZE);
        let mut c = ((1u64 << 62) - 1) >> TWO_ADICITY;
        while primes.len() < POOL_SIZE {
            let p = (c << TWO_ADICITY) + 1;
            c -= 1;
            if p <= 1u64 << PRIME_FLOOR_BITS || !is_prime_u64(p) {
                continue;
            }
            let mont = Mont::new(p);
            let mut factors = prime_factors(c + 1);
            factors.push(2);
            let generator = (2u64..)
                .find(|&g| {
                    let gm = mont.to_mont(g);
                    factors
                        .iter()
                        .all(|&f| mont.from_mont(mont.pow(gm, (p - 1) / f)) != 1)
                })
                .expect("a primitive root exists");
            let root = mont.pow(mont.to_mont(generator), (p - 1) >> TWO_ADICITY);
            primes.push(NttPrime { mont, root });
        }
        primes
    })
}

fn inverse_mod(a: u64, p: u64) -> u64 {
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (p as i128, a as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    debug_assert_eq!(r, 1);
    t.rem_euclid(p as i128) as u64
}

fn transform(a: &mut [u64], prime: &NttPrime, inverse: bool) {
    let n = a.len();
    let m = &prime.mont;
    let log_n = n.trailing_zeros();
    assert!(log_n <= TWO_ADICITY, "transform length exceeds 2^{TWO_ADICITY}");

    let mut j = 0;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            a.swap(i, j);
        }
    }

    let mut w_n = m.pow(prime.root, 1u64 << (TWO_ADICITY - log_n));
    if inverse {
        w_n = m.pow(w_n, (n as u64).saturating_sub(1));
    }
    let mut twiddles = Vec::with_capacity(n / 2);
    let mut w = m.to_mont(1);
    for _ in 0..n / 2 {
        twiddles.push(w);
        w = m.mul(w, w_n);
    }

    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let stride = n / len;
        for block in a.chunks_exact_mut(len) {
            let (lo, hi) = block.split_at_mut(half);
            for k in 0..half {
                let v = m.mul(hi[k], twiddles[k * stride]);
                let u = lo[k];
                lo[k] = m.add(u, v);
                hi[k] = m.sub(u, v);
            }
        }
        len <<= 1;
    }

    if inverse {
        let n_inv = m.to_mont(inverse_mod(n as u64 % m.p, m.p));
        for x in a.iter_mut() {
            *x = m.mul(*x, n_inv);
        }
    }
}

/// Truncated product modulo one prime, in standard form.
fn convolve_mod(a: &[Integer], b: &[Integer], len: usize, square: bool, prime: &NttPrime) -> Vec<u64> {
    let size = (2 * len - 1).next_power_of_two();
    let m = &prime.mont;
    let load = |src: &[Integer]| {
        let mut buf = vec![0u64; size];
        for (dst, x) in buf.iter_mut().zip(src) {
            *dst = m.to_mont(m.reduce(x));
        }
        buf
    };
    let mut fa = load(a);
    transform(&mut fa, prime, false);
    if square {
        for x in fa.iter_mut() {
            *x = m.mul(*x, *x);
        }
    } else {
        let mut fb = load(b);
        transform(&mut fb, prime, false);
        for (x, y) in fa.iter_mut().zip(&fb) {
            *x = m.mul(*x, *y);
        }
    }
    transform(&mut fa, prime, true);
    fa.truncate(len);
    for x in fa.iter_mut() {
        *x = m.from_mont(*x);
    }
    fa
}

/// Number of primes needed so that the CRT modulus exceeds `2 · 2^bound_bits`.
pub fn primes_needed(bound_bits: u64) -> usize {
    let need = (bound_bits + 2).div_ceil(PRIME_FLOOR_BITS as u64) as usize;
    need.max(MIN_PRIMES)
}

/// Exact truncated Cauchy product of two equal-length integer sequences.
pub fn convolve(a: &[Integer], b: &[Integer]) -> Vec<Integer> {
    let len = a.len();
    assert_eq!(len, b.len());
    if len == 0 {
        return Vec::new();
    }
    let bits = |s: &[Integer]| s.iter().map(|x| x.significant_bits()).max().unwrap_or(0) as u64;
    let (bits_a, bits_b) = (bits(a), bits(b));
    if bits_a == 0 || bits_b == 0 {
        return vec![Integer::new(); len];
    }
    let log_len = u64::from(usize::BITS - len.leading_zeros());
    let count = primes_needed(bits_a + bits_b + log_len);
    let primes = pool();
    assert!(count <= primes.len(), "coefficients too large for the prime pool");
    let primes = &primes[..count];
    let square = std::ptr::eq(a, b);

    let residues: Vec<Vec<u64>> = primes
        .par_iter()
        .map(|p| convolve_mod(a, b, len, square, p))
        .collect();

    let crt = Garner::new(primes);
    (0..len)
        .into_par_iter()
        .with_min_len(1024)
        .map(|i| {
            let r: Vec<u64> = residues.iter().map(|v| v[i]).collect();
            crt.lift(&r)
        })
        .collect()
}

struct Garner<'a> {
    primes: &'a [NttPrime],
    /// prefix[i][j] = (p_0 ⋯ p_{j−1}) mod p_i in Montgomery form, j < i
    prefix: Vec<Vec<u64>>,
    /// (p_0 ⋯ p_{i−1})⁻¹ mod p_i in Montgomery form
    inv: Vec<u64>,
    modulus: Integer,
    half: Integer,
}

impl<'a> Garner<'a> {
    fn new(primes: &'a [NttPrime]) -> Self {
        let mut prefix = Vec::with_capacity(primes.len());
        let mut inv = Vec::with_capacity(primes.len());
        for (i, pi) in primes.iter().enumerate() {
            let m = &pi.mont;
            let mut row = Vec::with_capacity(i);
            let mut acc = 1u64;
            for pj in &primes[..i] {
                row.push(m.to_mont(acc));
                acc = ((acc as u128 * (pj.mont.p % m.p) as u128) % m.p as u128) as u64;
            }
            inv.push(m.to_mont(inverse_mod(acc, m.p)));
            prefix.push(row);
        }
        let modulus = primes
            .iter()
            .fold(Integer::from(1), |acc, p| acc * p.mont.p);
        let half = Integer::from(&modulus >> 1);
        Garner { primes, prefix, inv, modulus, half }
    }

    fn lift(&self, residues: &[u64]) -> Integer {
        let t = self.primes.len();
        let mut digits = [0u64; 64];
        for i in 0..t {
            let m = &self.primes[i].mont;
            let mut x = 0u64;
            for j in 0..i {
                x = m.add(x, m.mul(digits[j] % m.p, self.prefix[i][j]));
            }
            digits[i] = m.mul(m.sub(residues[i], x), self.inv[i]);
        }
        let mut acc = Integer::from(digits[t - 1]);
        for i in (0..t - 1).rev() {
            acc *= self.primes[i].mont.p;
            acc += digits[i];
        }
        if acc > self.half {
            acc -= &self.modulus;
        }
        acc
    }
}
