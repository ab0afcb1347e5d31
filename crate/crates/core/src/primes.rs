//! Segmented prime sieve, prime counts in progressions, Ramanujan sums and the
//! prime exponential sum `S_P(θ) = Σ_{p≤N} e(pθ)`.

use crate::arith::{gcd, is_prime_u64, small_primes};
use crate::error::{Error, Result};
use crate::numeric::{e_mul, e_ratio, ComplexKahan};
use num_complex::Complex64;
use rayon::prelude::*;

/// Largest supported sieve limit.
pub const MAX_LIMIT: u64 = 1 << 40;
/// Segment length in integers.
pub const SEGMENT: u64 = 1 << 20;
/// Tables up to this limit keep the odd-number bitset resident; above it
/// segments are re-sieved on demand.
pub const RESIDENT_LIMIT: u64 = 1 << 32;

/// Primality table for `n ≤ limit`.
#[derive(Debug, Clone)]
pub struct PrimeTable {
    limit: u64,
    base: Vec<u64>,
    // bit i set ⇔ 2i+1 is prime; empty when not resident
    odd_bits: Vec<u64>,
    count: Option<u64>,
}

/// Sieve `[lo, hi]` with the given base primes; returns the primes in order.
fn sieve_segment(lo: u64, hi: u64, base: &[u64]) -> Vec<u64> {
    if hi < 2 || lo > hi {
        return Vec::new();
    }
    let lo = lo.max(2);
    let len = (hi - lo + 1) as usize;
    let mut composite = vec![false; len];
    for &p in base {
        if p * p > hi {
            break;
        }
        let start = (p * p).max(lo.div_ceil(p) * p);
        let mut m = start;
        while m <= hi {
            composite[(m - lo) as usize] = true;
            m += p;
        }
    }
    composite
        .iter()
        .enumerate()
        .filter(|(_, &c)| !c)
        .map(|(i, _)| lo + i as u64)
        .collect()
}

/// Builds a table answering primality for every `n ≤ n_max`.
pub fn sieve_primes(n_max: u64) -> Result<PrimeTable> {
    if n_max > MAX_LIMIT {
        return Err(Error::LimitExceeded(n_max));
    }
    if n_max < 2 {
        return Err(Error::InvalidInput(format!(
            "sieve limit must be at least 2, got {n_max}"
        )));
    }
    let root = (n_max as f64).sqrt() as u64 + 2;
    let base = small_primes(root as usize);
    let mut table = PrimeTable {
        limit: n_max,
        base,
        odd_bits: Vec::new(),
        count: None,
    };
    if n_max <= RESIDENT_LIMIT {
        let words = (n_max / 2 + 1).div_ceil(64) as usize;
        let mut bits = vec![0u64; words];
        let segments = n_max.div_ceil(SEGMENT) + 1;
        let chunks: Vec<Vec<u64>> = (0..segments)
            .into_par_iter()
            .map(|s| {
                let lo = s * SEGMENT;
                let hi = (lo + SEGMENT - 1).min(n_max);
                sieve_segment(lo, hi, &table.base)
            })
            .collect();
        let mut count = 0;
        for primes in chunks {
            for p in primes {
                count += 1;
                if p != 2 {
                    let i = (p / 2) as usize;
                    bits[i / 64] |= 1 << (i % 64);
                }
            }
        }
        table.odd_bits = bits;
        table.count = Some(count);
    }
    Ok(table)
}

impl PrimeTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn is_resident(&self) -> bool {
        !self.odd_bits.is_empty()
    }

    pub fn is_prime(&self, n: u64) -> bool {
        if n > self.limit || n < 2 {
            return n > self.limit && is_prime_u64(n);
        }
        if n == 2 {
            return true;
        }
        if n.is_multiple_of(2) {
            return false;
        }
        if self.is_resident() {
            let i = (n / 2) as usize;
            self.odd_bits[i / 64] >> (i % 64) & 1 == 1
        } else {
            is_prime_u64(n)
        }
    }

    pub(crate) fn check(&self, x: u64) -> Result<()> {
        if x > self.limit {
            Err(Error::OutOfRange {
                value: x,
                limit: self.limit,
            })
        } else {
            Ok(())
        }
    }

    /// Primes in `[lo, hi]` (clamped to the table) in increasing order.
    pub fn primes_in(&self, lo: u64, hi: u64) -> Vec<u64> {
        let hi = hi.min(self.limit);
        if lo > hi {
            return Vec::new();
        }
        if !self.is_resident() {
            return sieve_segment(lo, hi, &self.base);
        }
        let mut out = Vec::new();
        if lo <= 2 && hi >= 2 {
            out.push(2);
        }
        let mut n = lo.max(3) | 1;
        // walk words of the bitset
        while n <= hi {
            let i = (n / 2) as usize;
            let word = self.odd_bits[i / 64] >> (i % 64);
            if word == 0 {
                n += 2 * (64 - (i % 64)) as u64;
                continue;
            }
            let skip = word.trailing_zeros() as u64;
            n += 2 * skip;
            if n <= hi {
                out.push(n);
            }
            n += 2;
        }
        out
    }

    /// All primes up to `x` in increasing order.
    pub fn primes_upto(&self, x: u64) -> Vec<u64> {
        self.primes_in(0, x)
    }

    /// Segment ranges `[lo, hi]` covering `[0, x]`.
    fn segments(&self, x: u64) -> Vec<(u64, u64)> {
        let x = x.min(self.limit);
        (0..=x / SEGMENT)
            .map(|s| (s * SEGMENT, (s * SEGMENT + SEGMENT - 1).min(x)))
            .collect()
    }

    /// Parallel fold over primes `≤ x` by segment, merged in segment order.
    pub fn fold_primes<T, F, G>(&self, x: u64, init: impl Fn() -> T + Sync, fold: F, merge: G) -> T
    where
        T: Send,
        F: Fn(&mut T, u64) + Sync,
        G: Fn(&mut T, T),
    {
        let parts: Vec<T> = self
            .segments(x)
            .into_par_iter()
            .map(|(lo, hi)| {
                let mut acc = init();
                for p in self.primes_in(lo, hi) {
                    fold(&mut acc, p);
                }
                acc
            })
            .collect();
        let mut total = init();
        for p in parts {
            merge(&mut total, p);
        }
        total
    }

    /// `π(x)`.
    pub fn pi(&self, x: u64) -> Result<u64> {
        self.check(x)?;
        if x == self.limit {
            if let Some(c) = self.count {
                return Ok(c);
            }
        }
        Ok(self.fold_primes(x, || 0u64, |c, _| *c += 1, |a, b| *a += b))
    }
}

/// `π(x; q, a) = #{p ≤ x : p ≡ a (mod q)}`.
pub fn count_primes_ap(table: &PrimeTable, x: u64, q: u64, a: u64) -> Result<u64> {
    table.check(x)?;
    if q == 0 || a >= q {
        return Err(Error::InvalidInput(format!(
            "need q ≥ 1 and 0 ≤ a < q, got q={q}, a={a}"
        )));
    }
    Ok(table.fold_primes(
        x,
        || 0u64,
        |c, p| {
            if p % q == a {
                *c += 1
            }
        },
        |a, b| *a += b,
    ))
}

/// `Σ_{1≤b≤s, (b,s)=1} e(b/s)`, which equals `μ(s)`.
pub fn ramanujan_sum(s: u64) -> Complex64 {
    let mut acc = ComplexKahan::new();
    for b in 1..=s {
        if gcd(b, s) == 1 {
            acc.add(e_ratio(b as i128, s as u128));
        }
    }
    acc.value()
}

/// `S_P(θ) = Σ_{p≤N} e(pθ)` by direct compensated summation.
pub fn prime_exp_sum(table: &PrimeTable, n: u64, theta: f64) -> Result<Complex64> {
    table.check(n)?;
    Ok(table
        .fold_primes(
            n,
            ComplexKahan::new,
            |acc, p| acc.add(e_mul(p, theta)),
            |a, b| a.merge(&b),
        )
        .value())
}

/// `S_P(j/M) = Σ_{p≤N} e(pj/M)` with the phase reduced exactly in integers.
pub fn prime_exp_sum_ratio(table: &PrimeTable, n: u64, j: i128, m: u64) -> Result<Complex64> {
    table.check(n)?;
    let m = m as u128;
    Ok(table
        .fold_primes(
            n,
            ComplexKahan::new,
            |acc, p| acc.add(e_ratio(j * p as i128, m)),
            |a, b| a.merge(&b),
        )
        .value())
}

/// Reference shape `(N^{4/5} + N/(B·S)^{1/2})·(log N)^4` of the minor-arc
/// bound for prime exponential sums, with implied constant 1 (not certified).
pub fn vinogradov_reference(n: f64, s: f64, b: f64) -> f64 {
    (n.powf(0.8) + n / (b * s).sqrt()) * n.ln().powi(4)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::mobius;

    fn trial(n: u64) -> bool {
        n >= 2
            && (2..)
                .take_while(|d| d * d <= n)
                .all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn table_agrees_with_trial_division() {
        let t = sieve_primes(10_000).unwrap();
        for n in 0..=10_000 {
            assert_eq!(t.is_prime(n), trial(n), "n={n}");
        }
        assert_eq!(t.pi(100).unwrap(), 25);
        assert_eq!(t.primes_upto(30), vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
    }

    #[test]
    fn smallest_table() {
        let t = sieve_primes(2).unwrap();
        assert_eq!(t.primes_upto(2), vec![2]);
        assert_eq!(t.pi(2).unwrap(), 1);
        assert!(sieve_primes(1).is_err());
        assert!(matches!(
            sieve_primes(MAX_LIMIT + 1),
            Err(Error::LimitExceeded(_))
        ));
    }

    #[test]
    fn pi_million() {
        let t = sieve_primes(1_000_000).unwrap();
        assert_eq!(t.pi(1_000_000).unwrap(), 78_498);
        // independent oracle: plain sieve
        assert_eq!(small_primes(1_000_000).len(), 78_498);
        // segment-walk path agrees with the cached count
        assert_eq!(t.primes_upto(999_999).len(), 78_498);
    }

    #[test]
    fn progressions() {
        let t = sieve_primes(1000).unwrap();
        let oracle =
            |q: u64, a: u64| (2..=100u64).filter(|&p| trial(p) && p % q == a).count() as u64;
        assert_eq!(count_primes_ap(&t, 100, 4, 1).unwrap(), 11);
        assert_eq!(oracle(4, 1), 11);
        assert_eq!(count_primes_ap(&t, 100, 4, 0).unwrap(), 0);
        assert_eq!(count_primes_ap(&t, 100, 2, 0).unwrap(), 1);
        for q in 1..30 {
            let total: u64 = (0..q)
                .map(|a| count_primes_ap(&t, 1000, q, a).unwrap())
                .sum();
            assert_eq!(total, t.pi(1000).unwrap());
        }
        assert!(matches!(
            count_primes_ap(&t, 1001, 4, 1),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn ramanujan_sums_are_mobius() {
        assert!((ramanujan_sum(1) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(ramanujan_sum(4).norm() < 1e-12);
        assert!((ramanujan_sum(6) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        for s in 1..=500 {
            let z = ramanujan_sum(s);
            assert!(z.im.abs() < 1e-9, "s={s}");
            assert_eq!(z.re.round() as i32, mobius(s), "s={s}");
        }
    }

    #[test]
    fn exp_sum_examples() {
        let t = sieve_primes(1_000_000).unwrap();
        let z = prime_exp_sum(&t, 100, 0.0).unwrap();
        assert!((z - Complex64::new(25.0, 0.0)).norm() < 1e-12);
        let z = prime_exp_sum(&t, 100, 0.5).unwrap();
        assert!((z - Complex64::new(-23.0, 0.0)).norm() < 1e-9);
        let pi = t.pi(1_000_000).unwrap() as f64;
        let z = prime_exp_sum(&t, 1_000_000, 1.0 / 3.0).unwrap();
        let target = -pi / 2.0;
        assert!(((z.re - target) / target).abs() < 0.05, "{z}");
        assert!(z.norm() <= pi);
    }

    #[test]
    fn exp_sum_symmetries() {
        let t = sieve_primes(100_000).unwrap();
        // dyadic θ so that θ+1 is exactly representable
        for &theta in &[0.125, 0.3701171875, 271_828.0 / 1_048_576.0, 0.9990234375] {
            let a = prime_exp_sum(&t, 100_000, theta).unwrap();
            let b = prime_exp_sum(&t, 100_000, theta + 1.0).unwrap();
            let c = prime_exp_sum(&t, 100_000, -theta).unwrap();
            assert!((a - b).norm() < 1e-9, "{a} {b}");
            assert!((a.conj() - c).norm() < 1e-9);
        }
    }

    #[test]
    fn ratio_form_matches_float_form() {
        let t = sieve_primes(10_000).unwrap();
        let a = prime_exp_sum_ratio(&t, 10_000, 3, 7).unwrap();
        let b = prime_exp_sum(&t, 10_000, 3.0 / 7.0).unwrap();
        assert!((a - b).norm() < 1e-9);
    }

    #[test]
    fn vinogradov_shape() {
        let l4 = 1e6f64.ln().powi(4);
        assert!((vinogradov_reference(1e6, 1.0, 1.0) - (10f64.powf(4.8) + 1e6) * l4).abs() < 1e-3);
        assert!(
            (vinogradov_reference(1e6, 1e3, 1e3) - (10f64.powf(4.8) + 1e3) * l4).abs() / l4 < 1e-6
        );
        let mut last = f64::INFINITY;
        for bs in [1.0, 10.0, 100.0, 1e4, 1e8] {
            let v = vinogradov_reference(1e6, bs, 1.0);
            assert!(v <= last);
            last = v;
        }
    }
}
