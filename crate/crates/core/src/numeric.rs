//! Phase reduction, compensated accumulation and upward-slack sums shared by
//! the exponential-sum and bound modules.

use num_complex::Complex64;
use std::f64::consts::TAU;

/// Per-term slack floor used by certified accumulations.
pub const TERM_SLACK: f64 = 1e-12;

/// `x mod 1` in `[0, 1)`.
#[inline]
pub fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Distance to the nearest integer, `‖x‖`.
#[inline]
pub fn dist_to_int(x: f64) -> f64 {
    let f = frac(x);
    f.min(1.0 - f)
}

/// `e(x) = exp(2πix)`, reducing `x` to `[-1/2, 1/2]` first.
#[inline]
pub fn e(x: f64) -> Complex64 {
    let mut r = frac(x);
    if r > 0.5 {
        r -= 1.0;
    }
    let (s, c) = (TAU * r).sin_cos();
    Complex64::new(c, s)
}

/// `e(nθ)` with the product `nθ` reduced mod 1 in double-double precision.
///
/// The product is split as `p + err` with `err` recovered exactly by a fused
/// multiply-add, so the phase keeps full precision even when `nθ` is large.
/// Requires `n < 2^53`.
#[inline]
pub fn e_mul(n: u64, theta: f64) -> Complex64 {
    let nf = n as f64;
    let p = nf * theta;
    if p.abs() < (1u64 << 26) as f64 {
        return e(p);
    }
    let err = nf.mul_add(theta, -p);
    let hi = p - p.floor();
    e(hi + err)
}

/// `e(num/den)` with the reduction done in integers.
#[inline]
pub fn e_ratio(num: i128, den: u128) -> Complex64 {
    let d = den as i128;
    let r = num.rem_euclid(d);
    // map to (-den/2, den/2] for a symmetric argument
    let r = if 2 * r > d { r - d } else { r };
    let (s, c) = (TAU * (r as f64 / den as f64)).sin_cos();
    Complex64::new(c, s)
}

/// Neumaier-compensated real sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &KahanSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = KahanSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Compensated complex sum (independent compensation of both parts).
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexKahan {
    re: KahanSum,
    im: KahanSum,
}

impl ComplexKahan {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn merge(&mut self, other: &ComplexKahan) {
        self.re.merge(&other.re);
        self.im.merge(&other.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Accumulator whose result is an upper bound for the exact sum of its
/// (nonnegative, individually over-estimated) terms.
///
/// Every addition is padded by `max(TERM_SLACK, 4ε(|acc| + |term|))`, which
/// dominates the rounding of the addition itself and of a term evaluated to
/// within a few ulps.
#[derive(Debug, Clone, Copy, Default)]
pub struct UpwardSum {
    acc: f64,
    terms: u64,
}

impl UpwardSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let slack = TERM_SLACK.max(4.0 * f64::EPSILON * (self.acc.abs() + x.abs()));
        self.acc += x + slack;
        self.terms += 1;
    }

    pub fn merge(&mut self, other: &UpwardSum) {
        self.add(other.acc);
        self.terms += other.terms;
    }

    pub fn value(&self) -> f64 {
        self.acc
    }

    pub fn terms(&self) -> u64 {
        self.terms
    }
}

/// Fixed chunk length used for deterministic parallel reductions.
pub const CHUNK: usize = 1 << 14;

/// Reduce `0..n` in fixed-size chunks in parallel and combine the partial
/// results left to right, so the floating-point result does not depend on the
/// thread count.
pub fn chunked_reduce<T, F, G>(n: usize, init: impl Fn() -> T + Sync, fold: F, merge: G) -> T
where
    T: Send,
    F: Fn(&mut T, usize) + Sync,
    G: Fn(&mut T, T),
{
    use rayon::prelude::*;
    let chunks = n.div_ceil(CHUNK);
    let partials: Vec<T> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = init();
            let hi = ((c + 1) * CHUNK).min(n);
            for i in c * CHUNK..hi {
                fold(&mut acc, i);
            }
            acc
        })
        .collect();
    let mut total = init();
    for p in partials {
        merge(&mut total, p);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn e_mul_matches_integer_reduction() {
        // θ = 1/3 is not exact in binary, compare against the f64 value scaled exactly
        let theta = 0.123456789;
        for &n in &[1u64, 1000, 1 << 27, 999_999_937, (1 << 40) + 17] {
            let z = e_mul(n, theta);
            // reference: split θ = a + b with a having few bits so n*a is exact
            let a = (theta * 1024.0).floor() / 1024.0;
            let b = theta - a;
            let phase = frac(frac(n as f64 * a) + frac(n as f64 * b));
            let w = e(phase);
            assert!((z - w).norm() < 1e-6, "n={n}: {z} vs {w}");
        }
    }

    #[test]
    fn e_ratio_quarter_turns() {
        assert!((e_ratio(1, 4) - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!((e_ratio(-1, 2) - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        assert!((e_ratio(7, 7) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn kahan_recovers_small_terms() {
        let mut s = KahanSum::new();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 1000.0);
    }

    #[test]
    fn upward_sum_dominates_exact() {
        let mut u = UpwardSum::new();
        for i in 1..=1000 {
            u.add(1.0 / i as f64);
        }
        let exact: KahanSum = (1..=1000).map(|i| 1.0 / i as f64).collect();
        assert!(u.value() > exact.value());
        assert!(u.value() - exact.value() < 1e-8);
    }

    #[test]
    fn chunked_reduce_is_order_stable() {
        let n = 100_000;
        let a = chunked_reduce(
            n,
            KahanSum::new,
            |s, i| s.add((i as f64).sqrt()),
            |s, p| s.merge(&p),
        );
        let b = chunked_reduce(
            n,
            KahanSum::new,
            |s, i| s.add((i as f64).sqrt()),
            |s, p| s.merge(&p),
        );
        assert_eq!(a.value().to_bits(), b.value().to_bits());
    }
}
