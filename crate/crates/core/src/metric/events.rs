//! The approximation events `E_q` and `E*_q` and their exact measures.

use super::intervals::{to_f64, ExactRational, IntervalUnion};
use super::psi::PsiFunction;
use crate::arith::{euler_phi, factorize_full, gcd};
use crate::error::{Error, Result};
use crate::numeric::KahanSum;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

/// Largest total number of windows built by one call.
pub const WINDOW_CAP: u64 = 10_000_000;
/// Largest `R − Q` for the pairwise ratio.
pub const PAIR_SPAN_CAP: u64 = 2000;

/// Centers `a/q` of the windows of `E_q` (`reduced = false`, all
/// `0 ≤ a ≤ q`) or `E*_q` (`gcd(a, q) = 1`, with `a = 0` only when `q = 1`).
pub fn centers(q: u64, reduced: bool) -> Vec<u64> {
    (0..=q).filter(|&a| !reduced || gcd(a, q) == 1).collect()
}

/// `⋃_a [a/q − ψ(q)/q², a/q + ψ(q)/q²] ∩ [0, 1]`.
pub fn event_union(q: u64, psi: &PsiFunction, reduced: bool) -> Result<IntervalUnion> {
    if q == 0 {
        return Err(Error::InvalidInput("q must be at least 1".into()));
    }
    if q + 1 > WINDOW_CAP {
        return Err(Error::cap("event windows", q + 1, WINDOW_CAP));
    }
    let radius = psi.eval_exact(q) / BigRational::from_integer(BigInt::from(q) * BigInt::from(q));
    if radius.is_zero() {
        return Ok(IntervalUnion::empty());
    }
    let qb = BigInt::from(q);
    let windows = centers(q, reduced).into_iter().map(|a| {
        let c = BigRational::new(BigInt::from(a), qb.clone());
        (&c - &radius, c + &radius)
    });
    Ok(IntervalUnion::from_intervals(windows))
}

/// Exact measure of `⋃_{Q≤q<R} E(*)_q`.
pub fn truncated_limsup_measure(
    psi: &PsiFunction,
    q_lo: u64,
    r: u64,
    reduced: bool,
) -> Result<BigRational> {
    Ok(truncated_limsup_union(psi, q_lo, r, reduced)?.measure())
}

pub fn truncated_limsup_union(
    psi: &PsiFunction,
    q_lo: u64,
    r: u64,
    reduced: bool,
) -> Result<IntervalUnion> {
    if q_lo == 0 || q_lo > r {
        return Err(Error::InvalidInput(format!(
            "need 1 <= Q <= R, got Q={q_lo}, R={r}"
        )));
    }
    let windows: u64 = (q_lo..r).map(|q| q + 1).sum();
    if windows > WINDOW_CAP {
        return Err(Error::cap("event windows", windows, WINDOW_CAP));
    }
    let unions: Vec<IntervalUnion> = (q_lo..r)
        .into_par_iter()
        .map(|q| event_union(q, psi, reduced))
        .collect::<Result<_>>()?;
    // pairwise tree merge keeps the work near-linear
    let mut layer = unions;
    while layer.len() > 1 {
        layer = layer
            .par_chunks(2)
            .map(|c| {
                if c.len() == 2 {
                    c[0].union(&c[1])
                } else {
                    c[0].clone()
                }
            })
            .collect();
    }
    Ok(layer.pop().unwrap_or_default())
}

/// Minimal `R > Q` with `Σ_{Q≤q<R} μ(E*_q) ≥ 1`.
pub fn select_r(psi: &PsiFunction, q_lo: u64, cap: u64) -> Result<u64> {
    if q_lo == 0 {
        return Err(Error::InvalidInput("Q must be at least 1".into()));
    }
    let mut approx = KahanSum::new();
    let mut exact: Option<BigRational> = None;
    let one = BigRational::one();
    for q in q_lo..cap {
        let m = event_union(q, psi, true)?.measure();
        approx.add(to_f64(&m));
        // switch to exact accumulation only near the crossing
        if let Some(e) = exact.as_mut() {
            *e += &m;
        } else if approx.value() >= 1.0 - 1e-6 {
            let mut e = BigRational::zero();
            for p in q_lo..=q {
                e += event_union(p, psi, true)?.measure();
            }
            exact = Some(e);
        }
        if exact.as_ref().is_some_and(|e| *e >= one) {
            return Ok(q + 1);
        }
    }
    Err(Error::NotReached(cap))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PairOverlap {
    pub exact: ExactRational,
    pub exact_f64: f64,
    /// `μ(E*_q) μ(E*_r) exp(Σ_{p | qr/(q,r)², p > Δqr} 1/p)`, constant 1.
    pub pv_bound: f64,
}

/// `μ(E*_q ∩ E*_r)` and the small-sieve comparison value.
pub fn pair_overlap(q: u64, r: u64, psi: &PsiFunction) -> Result<PairOverlap> {
    if q == r {
        return Err(Error::InvalidInput("pair overlap needs q != r".into()));
    }
    let eq = event_union(q, psi, true)?;
    let er = event_union(r, psi, true)?;
    let exact = eq.intersection_measure(&er);
    let delta = (psi.eval(q) / (q as f64).powi(2)).max(psi.eval(r) / (r as f64).powi(2));
    let g = gcd(q, r);
    let m = (q / g) as u128 * (r / g) as u128;
    let cut = delta * q as f64 * r as f64;
    let tail: f64 = prime_divisors(q / g)
        .into_iter()
        .chain(prime_divisors(r / g))
        .filter(|&p| m.is_multiple_of(p as u128) && p as f64 > cut)
        .collect::<std::collections::BTreeSet<u64>>()
        .into_iter()
        .map(|p| 1.0 / p as f64)
        .sum();
    let pv_bound = to_f64(&eq.measure()) * to_f64(&er.measure()) * tail.exp();
    Ok(PairOverlap {
        exact_f64: to_f64(&exact),
        exact: ExactRational(exact),
        pv_bound,
    })
}

fn prime_divisors(n: u64) -> Vec<u64> {
    factorize_full(n).into_iter().map(|(p, _)| p).collect()
}

/// `Σ_{Q≤q≠r<R} μ(E*_q ∩ E*_r) / (10^6 (Σ_{Q≤q<R} μ(E*_q))²)` over ordered
/// pairs. Zero when there are no pairs or no mass.
pub fn quasi_independence_ratio(psi: &PsiFunction, q_lo: u64, r: u64) -> Result<f64> {
    if q_lo == 0 || q_lo > r {
        return Err(Error::InvalidInput(format!(
            "need 1 <= Q <= R, got Q={q_lo}, R={r}"
        )));
    }
    if r - q_lo > PAIR_SPAN_CAP {
        return Err(Error::cap("pair span R-Q", r - q_lo, PAIR_SPAN_CAP));
    }
    let unions: Vec<IntervalUnion> = (q_lo..r)
        .into_par_iter()
        .map(|q| event_union(q, psi, true))
        .collect::<Result<_>>()?;
    let total = unions
        .iter()
        .fold(BigRational::zero(), |acc, u| acc + u.measure());
    if total.is_zero() {
        return Ok(0.0);
    }
    let n = unions.len();
    let pairs: BigRational = (0..n)
        .into_par_iter()
        .map(|i| {
            ((i + 1)..n).fold(BigRational::zero(), |acc, j| {
                acc + unions[i].intersection_measure(&unions[j])
            })
        })
        .reduce(BigRational::zero, |a, b| a + b);
    let lhs = pairs * BigRational::from_integer(2.into());
    let rhs = BigRational::from_integer(1_000_000.into()) * &total * &total;
    Ok(to_f64(&(lhs / rhs)))
}

/// `2φ(q)ψ(q)/q²`, the measure of `E*_q` when its windows are disjoint and
/// interior.
pub fn heuristic_measure(q: u64, psi: &PsiFunction) -> BigRational {
    psi.eval_exact(q)
        * BigRational::new(
            BigInt::from(2 * euler_phi(q)),
            BigInt::from(q) * BigInt::from(q),
        )
}

#[cfg(test)]
mod tests {
    use super::super::intervals::ratio;
    use super::*;

    fn half() -> PsiFunction {
        PsiFunction::Constant(0.5)
    }

    #[test]
    fn event_examples() {
        let u = event_union(2, &half(), true).unwrap();
        assert_eq!(u.parts(), &[(ratio(3, 8), ratio(5, 8))]);
        assert_eq!(u.measure(), ratio(1, 4));
        assert_eq!(
            event_union(6, &half(), true).unwrap().measure(),
            ratio(1, 18)
        );
        let wide = PsiFunction::Constant(3.5);
        assert_eq!(event_union(7, &wide, false).unwrap().measure(), ratio(1, 1));
        assert_eq!(
            event_union(1, &half(), true).unwrap().measure(),
            ratio(1, 1)
        );
    }

    #[test]
    fn limsup_examples() {
        assert_eq!(
            truncated_limsup_measure(&half(), 5, 5, true).unwrap(),
            BigRational::zero()
        );
        let m = truncated_limsup_measure(&half(), 2, 4, true).unwrap();
        assert!(m >= ratio(1, 4));
        let sum = event_union(2, &half(), true).unwrap().measure()
            + event_union(3, &half(), true).unwrap().measure();
        assert!(m <= sum);
    }

    #[test]
    fn select_r_examples() {
        assert_eq!(select_r(&PsiFunction::Constant(1.0), 2, 100).unwrap(), 5);
        assert_eq!(
            select_r(&PsiFunction::Constant(0.0), 2, 50),
            Err(Error::NotReached(50))
        );
    }

    #[test]
    fn overlaps() {
        let a = pair_overlap(2, 3, &half()).unwrap();
        let b = pair_overlap(3, 2, &half()).unwrap();
        assert_eq!(a.exact, b.exact);
        // windows [3/8,5/8] and [1/3±1/18]: overlap [3/8, 7/18] and [11/18, 5/8]
        assert_eq!(a.exact.0, ratio(1, 36));
        let tiny = PsiFunction::Constant(1e-6);
        assert!(pair_overlap(5, 7, &tiny).unwrap().exact.0.is_zero());
        assert!(pair_overlap(3, 6, &half()).unwrap().exact_f64 >= 0.0);
        assert!(pair_overlap(3, 3, &half()).is_err());
    }

    #[test]
    fn quasi_independence() {
        assert_eq!(quasi_independence_ratio(&half(), 10, 11).unwrap(), 0.0);
        let r = quasi_independence_ratio(&half(), 2, 50).unwrap();
        assert!(r > 0.0 && r.is_finite());
    }
}
