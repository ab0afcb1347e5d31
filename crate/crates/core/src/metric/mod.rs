//! Metric Diophantine approximation: `ψ`-series, exact measures of the
//! events `E_q`, `E*_q` and their overlaps, the Duffin–Schaefer
//! counterexample, and a few classical approximation utilities.

pub mod ds;
pub mod events;
pub mod intervals;
pub mod psi;

pub use ds::{ds_counterexample, DsReport};
pub use events::{
    event_union, pair_overlap, quasi_independence_ratio, select_r, truncated_limsup_measure,
    PairOverlap,
};
pub use intervals::{ExactRational, IntervalUnion};
pub use psi::PsiFunction;

use crate::arith::phi_table;
use crate::error::{Error, Result};
use crate::farey::FareyPoint;
use crate::numeric::KahanSum;
use crate::primes::sieve_primes;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

/// Largest `x` for the anatomy count.
pub const ANATOMY_CAP: u64 = 100_000_000;
/// Largest `Q` for the series partial sums.
pub const SERIES_CAP: u64 = 100_000_000;

/// A target for rational approximation.
#[derive(Debug, Clone, PartialEq)]
pub enum Alpha {
    Rational(BigRational),
    /// Taken as the exact rational value of the float.
    Real(f64),
}

impl Alpha {
    fn exact(&self) -> Result<BigRational> {
        match self {
            Alpha::Rational(r) => Ok(r.clone()),
            Alpha::Real(x) => BigRational::from_float(*x)
                .ok_or_else(|| Error::InvalidInput(format!("{x} is not finite"))),
        }
    }
}

/// The last continued-fraction convergent `m/n` of `α ∈ [0, 1]` with
/// `n ≤ N`; it satisfies `|α − m/n| < 1/(nN)` (or equals `α`).
pub fn dirichlet_approx(alpha: &Alpha, n_max: u64) -> Result<FareyPoint> {
    if n_max == 0 {
        return Err(Error::InvalidInput("N must be at least 1".into()));
    }
    let a = alpha.exact()?;
    if a.is_negative() || a > BigRational::from_integer(1.into()) {
        return Err(Error::InvalidInput("alpha must lie in [0, 1]".into()));
    }
    let (mut p0, mut q0, mut p1, mut q1) = (
        BigInt::zero(),
        BigInt::from(1),
        BigInt::from(1),
        BigInt::zero(),
    );
    let (mut num, mut den) = (a.numer().clone(), a.denom().clone());
    let limit = BigInt::from(n_max);
    let mut best = (BigInt::zero(), BigInt::from(1));
    loop {
        let (t, r) = num.div_mod_floor(&den);
        let p2 = &t * &p1 + &p0;
        let q2 = &t * &q1 + &q0;
        if q2 > limit {
            break;
        }
        best = (p2.clone(), q2.clone());
        if r.is_zero() {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        (num, den) = (den, r);
    }
    let (m, n) = (
        best.0.to_u64().expect("m ≤ n ≤ N"),
        best.1.to_u64().expect("n ≤ N"),
    );
    Ok(FareyPoint {
        r: m,
        s: n,
        width: 1.0 / (n as f64 * n_max as f64),
    })
}

/// `F_n` for `n ≤ 186`.
pub fn fibonacci(n: u32) -> u128 {
    let (mut a, mut b) = (0u128, 1u128);
    for _ in 0..n {
        (a, b) = (b, a + b);
    }
    a
}

/// `√5 F_n² |φ − F_{n+1}/F_n|`, evaluated as `√5 F_n φ^−n`, which avoids the
/// cancellation in the difference.
pub fn golden_gap(n: u32) -> Result<f64> {
    if !(2..=80).contains(&n) {
        return Err(Error::InvalidInput(format!(
            "n must lie in 2..=80, got {n}"
        )));
    }
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    Ok(5f64.sqrt() * fibonacci(n) as f64 * phi.powi(-(n as i32)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SeriesPartial {
    /// `Σ_{n≤Q} ψ(n)/n`.
    pub khinchin_sum: f64,
    /// `Σ_{n≤Q} φ(n)ψ(n)/n²`.
    pub ds_sum: f64,
}

pub fn series_partial(psi: &PsiFunction, q_max: u64) -> Result<SeriesPartial> {
    if q_max == 0 {
        return Err(Error::InvalidInput("Q must be at least 1".into()));
    }
    if q_max > SERIES_CAP {
        return Err(Error::cap("series length", q_max, SERIES_CAP));
    }
    let phi = phi_table(q_max as usize);
    let mut k = KahanSum::new();
    let mut d = KahanSum::new();
    for n in 1..=q_max {
        let v = psi.eval(n);
        if v == 0.0 {
            continue;
        }
        let nf = n as f64;
        k.add(v / nf);
        d.add(phi[n as usize] as f64 * v / (nf * nf));
    }
    Ok(SeriesPartial {
        khinchin_sum: k.value(),
        ds_sum: d.value(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnatomyReport {
    pub x: u64,
    pub y: f64,
    pub count: u64,
    /// `count / (e^−y x)`.
    pub ratio: f64,
}

/// `#{n ≤ x : Σ_{p | n, p > y} 1/p ≥ 1}` with the ratio against `e^−y x`.
pub fn anatomy_tail(x: u64, y: f64) -> Result<AnatomyReport> {
    let count = anatomy_tail_count(x, y)?;
    let reference = (-y).exp() * x as f64;
    Ok(AnatomyReport {
        x,
        y,
        count,
        ratio: if reference > 0.0 {
            count as f64 / reference
        } else {
            0.0
        },
    })
}

/// `#{n ≤ x : Σ_{p | n, p > y} 1/p ≥ 1}`.
pub fn anatomy_tail_count(x: u64, y: f64) -> Result<u64> {
    if !(y >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "y must be nonnegative, got {y}"
        )));
    }
    if x > ANATOMY_CAP {
        return Err(Error::cap("anatomy bound x", x, ANATOMY_CAP));
    }
    if x < 2 {
        return Ok(0);
    }
    let table = sieve_primes(x)?;
    let start = if y < 2.0 { 2 } else { y.floor() as u64 + 1 };
    let primes = table.primes_in(start, x);
    // a qualifying n is divisible by a set of primes above y whose
    // reciprocals sum to 1; the least product of such a set comes from the
    // smallest primes, so if that already exceeds x nothing qualifies
    let mut recip = 0.0f64;
    let mut prod = 1u128;
    let mut reachable = false;
    for &p in &primes {
        recip += 1.0 / p as f64;
        prod *= p as u128;
        if prod > x as u128 {
            break;
        }
        if recip >= 1.0 - 1e-12 {
            reachable = true;
            break;
        }
    }
    if !reachable {
        return Ok(0);
    }
    // segmented accumulation of Σ 1/p over prime divisors above y
    const SEG: u64 = 1 << 20;
    let mut count = 0u64;
    let mut sums = vec![0.0f64; SEG as usize];
    let mut lo = 1u64;
    while lo <= x {
        let hi = (lo + SEG).min(x + 1);
        sums[..(hi - lo) as usize].iter_mut().for_each(|s| *s = 0.0);
        for &p in &primes {
            if p >= hi {
                break;
            }
            let mut m = lo.div_ceil(p) * p;
            let inv = 1.0 / p as f64;
            while m < hi {
                sums[(m - lo) as usize] += inv;
                m += p;
            }
        }
        for (i, &s) in sums[..(hi - lo) as usize].iter().enumerate() {
            if s >= 1.0 - 1e-12 && exact_tail_check(lo + i as u64, &primes, start) {
                count += 1;
            }
        }
        lo = hi;
    }
    Ok(count)
}

/// Recheck a candidate with exact rational arithmetic.
fn exact_tail_check(n: u64, _primes: &[u64], start: u64) -> bool {
    let mut acc = BigRational::zero();
    for (p, _) in crate::arith::factor_small(n) {
        if p >= start {
            acc += BigRational::new(1.into(), BigInt::from(p));
        }
    }
    acc >= BigRational::from_integer(1.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct HausdorffReport {
    /// `2/(2+a)`.
    pub exponent: f64,
    /// Log-log slope of the partial sums of `Σ φ(n)(ψ(n)/n²)^β` between
    /// `10^4` and `10^5` at `β = exponent − 0.05`.
    pub slope_below: f64,
    /// Same at `β = exponent + 0.05`.
    pub slope_above: f64,
}

/// Convergence exponent of `Σ φ(n)(ψ(n)/n²)^β` for `ψ(n) = n^−a`.
pub fn hausdorff_exponent(psi: &PsiFunction) -> Result<HausdorffReport> {
    let a = match psi {
        PsiFunction::Power(a) if *a > 0.0 => *a,
        other => {
            return Err(Error::Unsupported(format!(
                "hausdorff exponent is only classified for power families, got {other}"
            )))
        }
    };
    let exponent = 2.0 / (2.0 + a);
    let (q1, q2) = (10_000usize, 100_000usize);
    let phi = phi_table(q2);
    let slope = |beta: f64| {
        let mut acc = KahanSum::new();
        let mut at_q1 = 0.0;
        for n in 1..=q2 {
            let nf = n as f64;
            acc.add(phi[n] as f64 * nf.powf(-(2.0 + a) * beta));
            if n == q1 {
                at_q1 = acc.value();
            }
        }
        (acc.value() / at_q1).ln() / ((q2 as f64) / (q1 as f64)).ln()
    };
    Ok(HausdorffReport {
        exponent,
        slope_below: slope(exponent - 0.05),
        slope_above: slope(exponent + 0.05),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dirichlet_examples() {
        let half = Alpha::Rational(BigRational::new(1.into(), 2.into()));
        let p = dirichlet_approx(&half, 10).unwrap();
        assert_eq!((p.r, p.s), (1, 2));
        let p = dirichlet_approx(&Alpha::Real(std::f64::consts::PI - 3.0), 100).unwrap();
        assert_eq!((p.r, p.s), (1, 7));
        assert!(((std::f64::consts::PI - 3.0) - 1.0 / 7.0).abs() < 1.0 / 700.0);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for k in 3..30u32 {
            let f = fibonacci(k) as u64;
            let p = dirichlet_approx(&Alpha::Real(g), f).unwrap();
            assert_eq!(
                (p.r as u128, p.s as u128),
                (fibonacci(k - 1), fibonacci(k)),
                "k={k}"
            );
        }
    }

    #[test]
    fn golden_examples() {
        assert!(
            (golden_gap(2).unwrap() - 5f64.sqrt() * (2.0 - (1.0 + 5f64.sqrt()) / 2.0)).abs()
                < 1e-12
        );
        assert!((golden_gap(10).unwrap() - 0.99993).abs() < 1e-5);
        assert!((golden_gap(20).unwrap() - 1.0).abs() < 1e-3);
        assert!(golden_gap(1).is_err());
    }

    #[test]
    fn series_examples() {
        let s = series_partial(&PsiFunction::Constant(1.0), 1_000_000).unwrap();
        assert!((s.khinchin_sum - 14.392726722864).abs() < 1e-9);
        let s = series_partial(&PsiFunction::Power(1.0), 1_000_000).unwrap();
        assert!((s.khinchin_sum - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-5);
    }

    #[test]
    fn anatomy_small() {
        assert_eq!(anatomy_tail_count(100, 200.0).unwrap(), 0);
        // y = 1: n divisible by 2·3·5, 2·3·7, … ; brute force
        let brute = (1..=3000u64)
            .filter(|&n| {
                let s: f64 = crate::arith::factor_small(n.max(1))
                    .iter()
                    .map(|&(p, _)| 1.0 / p as f64)
                    .sum();
                n > 1 && s >= 1.0
            })
            .count() as u64;
        assert_eq!(anatomy_tail_count(3000, 1.0).unwrap(), brute);
        assert_eq!(anatomy_tail_count(1_000_000, 3.0).unwrap(), 0);
        let r = anatomy_tail(1000, 1.0).unwrap();
        assert!(
            r.count > 0
                && (r.ratio - r.count as f64 / (1000.0 / std::f64::consts::E)).abs() < 1e-12
        );
    }

    #[test]
    fn hausdorff() {
        let r = hausdorff_exponent(&PsiFunction::Power(2.0)).unwrap();
        assert_eq!(r.exponent, 0.5);
        assert!(r.slope_below > r.slope_above);
        assert!(
            (hausdorff_exponent(&PsiFunction::Power(1.0))
                .unwrap()
                .exponent
                - 2.0 / 3.0)
                .abs()
                < 1e-15
        );
        assert!(
            hausdorff_exponent(&PsiFunction::Power(1e-9))
                .unwrap()
                .exponent
                > 0.999
        );
        assert!(matches!(
            hausdorff_exponent(&PsiFunction::DsBase),
            Err(Error::Unsupported(_))
        ));
    }
}
