//! Certified bound sums for one-missing-digit windows and their
//! generalizations to arbitrary digit sets.

use super::maxima::{certified_max, CertifiedMax, MaxSettings};
use super::{DigitWindow, DEFAULT_TAU};
use crate::digits::DigitSystem;
use crate::error::{Error, Result};
use crate::numeric::{dist_to_int, UpwardSum};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// Published value of the typical-θ growth constant `exp(4G/π)`.
pub const C_REFERENCE: f64 = 3.209912300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    SinBoundSum,
    RefinedSum,
    PairwiseSum,
    Margin,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundReport {
    pub kind: BoundKind,
    pub q: u32,
    /// Upward-rounded value of the bound sum.
    pub value: f64,
    pub threshold: f64,
    pub passes: bool,
    /// Asymptotic or analytic comparison value, when one applies.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<f64>,
    /// Per-missing-digit sums for the refined bound.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_digit: Option<Vec<f64>>,
    /// Margin extras: `(q−1)r + q log q` for `r` removed digits.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub removed_reference: Option<f64>,
    /// Margin extras: `(q/r)(q−r) log r` when `D = {0,…,r−1}`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub consecutive_reference: Option<f64>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub degenerate: bool,
}

impl BoundReport {
    fn new(kind: BoundKind, q: u32, value: f64, threshold: f64) -> Self {
        Self {
            kind,
            q,
            value,
            threshold,
            passes: value < threshold,
            reference: None,
            per_digit: None,
            removed_reference: None,
            consecutive_reference: None,
            degenerate: false,
        }
    }
}

/// `(q−1)·q^τ`.
pub fn digit_threshold(q: u32) -> f64 {
    (q as f64 - 1.0) * (q as f64).powf(DEFAULT_TAU)
}

/// `min{q−1, 1 + 1/sin(π‖φ‖)}` for a one-missing-digit system.
pub fn sin_bound(sys: &DigitSystem, phi: f64) -> Result<f64> {
    if sys.missing_digit().is_none() {
        return Err(Error::WrongShape {
            q: sys.q(),
            got: sys.len(),
        });
    }
    Ok(sin_bound_value(sys.q(), dist_to_int(phi)))
}

fn sin_bound_value(q: u32, dist: f64) -> f64 {
    let cap = q as f64 - 1.0;
    if dist == 0.0 {
        return cap;
    }
    cap.min(1.0 + 1.0 / (PI * dist).sin())
}

/// The sine bound evaluated at the point of the cell `[t/q, (t+1)/q]`
/// nearest an integer, hence an upper bound for `F_D` on the whole cell.
pub fn cell_sin_bound(q: u32, t: u32) -> f64 {
    let m = t.min(q - 1 - t);
    sin_bound_value(q, m as f64 / q as f64)
}

/// `3q−4 + 2Σ_{1≤t<(q−1)/2} 1/sin(πt/q) + [q odd]/sin(π(q−1)/(2q))`.
pub fn sin_bound_sum(q: u32) -> BoundReport {
    let qf = q as f64;
    let mut acc = UpwardSum::new();
    acc.add(3.0 * qf - 4.0);
    let mut t = 1u32;
    while 2 * t + 1 < q {
        acc.add(2.0 / (PI * t as f64 / qf).sin());
        t += 1;
    }
    if q % 2 == 1 {
        acc.add(1.0 / (PI * (qf - 1.0) / (2.0 * qf)).sin());
    }
    let mut r = BoundReport::new(BoundKind::SinBoundSum, q, acc.value(), digit_threshold(q));
    r.reference = Some(2.0 / PI * qf * qf.ln());
    r
}

/// Certified `max F_D` over the cell `[t/q, (t+1)/q]`.
pub fn cell_refined_max(
    window: &DigitWindow,
    q: u32,
    t: u32,
    settings: MaxSettings,
) -> CertifiedMax {
    let lo = t as f64 / q as f64;
    let hi = (t + 1) as f64 / q as f64;
    certified_max(|x| window.norm_sqr(x), lo, hi, window.curvature(), settings)
}

fn cell_sum(sys: &DigitSystem, settings: MaxSettings) -> f64 {
    let window = DigitWindow::new(sys);
    let q = sys.q();
    let uppers: Vec<f64> = (0..q)
        .into_par_iter()
        .map(|t| cell_refined_max(&window, q, t, settings).upper)
        .collect();
    let mut acc = UpwardSum::new();
    for u in uppers {
        acc.add(u);
    }
    acc.value()
}

/// `max_b Σ_t max_{0≤η<1} F_{D_b}((t+η)/q)` with `D_b = {0,…,q−1}∖{b}`.
pub fn refined_digit_sum(q: u32) -> BoundReport {
    refined_digit_sum_with(q, MaxSettings::default())
}

pub fn refined_digit_sum_with(q: u32, settings: MaxSettings) -> BoundReport {
    let per_digit: Vec<f64> = (0..q)
        .map(|b| {
            let sys = DigitSystem::excluding(q, &[b]).expect("b < q");
            cell_sum(&sys, settings)
        })
        .collect();
    let value = per_digit.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut r = BoundReport::new(BoundKind::RefinedSum, q, value, digit_threshold(q));
    r.per_digit = Some(per_digit);
    r
}

/// The pairwise bound `(3q−4)² + (2Σ 1/sin(πt/q) + …)(6q−8 + 2Σ sin(πu/q) + …)`
/// against `(q−1)² q^(2/5)`.
pub fn pairwise_bound_sum(q: u32) -> BoundReport {
    let qf = q as f64;
    let odd = q % 2 == 1;
    let mut a = UpwardSum::new();
    let mut t = 1u32;
    while 2 * t + 1 < q {
        a.add(2.0 / (PI * t as f64 / qf).sin());
        t += 1;
    }
    if odd {
        a.add(1.0 / (PI * (qf - 1.0) / (2.0 * qf)).sin());
    }
    let mut b = UpwardSum::new();
    b.add(6.0 * qf - 8.0);
    for u in 2..=q / 2 {
        b.add(2.0 * (PI * u as f64 / qf).sin());
    }
    if odd {
        b.add((PI * (qf + 1.0) / (2.0 * qf)).sin());
    }
    let head = (3.0 * qf - 4.0) * (3.0 * qf - 4.0);
    let value = (head + a.value() * b.value()) * (1.0 + 8.0 * f64::EPSILON);
    let threshold = (qf - 1.0) * (qf - 1.0) * qf.powf(0.4);
    BoundReport::new(BoundKind::PairwiseSum, q, value, threshold)
}

/// `Σ_t max_{0≤η<1/q} F_D(t/q + η)` against `(q−|D|)·q^(1/5)`.
pub fn generalized_margin(sys: &DigitSystem) -> BoundReport {
    generalized_margin_with(sys, MaxSettings::default())
}

pub fn generalized_margin_with(sys: &DigitSystem, settings: MaxSettings) -> BoundReport {
    let q = sys.q();
    let qf = q as f64;
    let removed = q as usize - sys.len();
    let value = cell_sum(sys, settings);
    let threshold = removed as f64 * qf.powf(0.2);
    let mut r = BoundReport::new(BoundKind::Margin, q, value, threshold);
    r.degenerate = removed == 0;
    r.passes = r.passes && !r.degenerate;
    r.removed_reference = Some((qf - 1.0) * removed as f64 + qf * qf.ln());
    let d = sys.digits();
    let len = d.len() as u32;
    if len >= 2 && d[0] == 0 && d[d.len() - 1] == len - 1 {
        let rr = len as f64;
        r.consecutive_reference = Some(qf / rr * (qf - rr) * rr.ln());
    }
    r
}

/// Catalan's constant from the rapidly convergent series
/// `G = (π/8) log(2+√3) + (3/8) Σ_{n≥0} (n!)² / ((2n)! (2n+1)²)`.
pub fn catalan() -> f64 {
    let mut term_ratio = 1.0f64; // (n!)²/(2n)!
    let mut sum = 0.0f64;
    for n in 0..60u32 {
        let t = term_ratio / ((2 * n + 1) as f64).powi(2);
        sum += t;
        if t < 1e-20 {
            break;
        }
        let n1 = (n + 1) as f64;
        term_ratio *= n1 * n1 / ((2.0 * n1 - 1.0) * (2.0 * n1));
    }
    PI / 8.0 * (2.0 + 3f64.sqrt()).ln() + 3.0 / 8.0 * sum
}

/// `C = exp(4G/π)`.
pub fn growth_constant() -> f64 {
    (4.0 * catalan() / PI).exp()
}

/// Report for each `q` in the iterator.
pub fn scan(kind: BoundKind, qs: impl Iterator<Item = u32>) -> impl Iterator<Item = BoundReport> {
    qs.map(move |q| match kind {
        BoundKind::SinBoundSum => sin_bound_sum(q),
        BoundKind::RefinedSum => refined_digit_sum(q),
        BoundKind::PairwiseSum => pairwise_bound_sum(q),
        BoundKind::Margin => generalized_margin(&DigitSystem::excluding(q, &[0]).expect("q ≥ 2")),
    })
}

/// The first `q` in `lo..=hi` whose report passes.
pub fn first_passing(kind: BoundKind, lo: u32, hi: u32) -> Option<u32> {
    scan(kind, lo..=hi).find(|r| r.passes).map(|r| r.q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::digit_window_sum;

    #[test]
    fn sin_bound_examples() {
        let sys = DigitSystem::excluding(10, &[3]).unwrap();
        assert_eq!(sin_bound(&sys, 0.5).unwrap(), 2.0);
        assert_eq!(sin_bound(&sys, 0.0).unwrap(), 9.0);
        let v = sin_bound(&sys, 0.1).unwrap();
        assert!((v - 4.2360679775).abs() < 1e-9);
        for b in 0..10 {
            let s = DigitSystem::excluding(10, &[b]).unwrap();
            assert!(digit_window_sum(&s, 0.1) <= v);
        }
        let full = DigitSystem::full(10).unwrap();
        assert!(matches!(
            sin_bound(&full, 0.1),
            Err(Error::WrongShape { .. })
        ));
    }

    #[test]
    fn sin_bound_sum_q101() {
        let r = sin_bound_sum(101);
        assert!((r.value - 602.8228123).abs() < 1e-6, "{}", r.value);
        assert!(!r.passes);
        assert!(!sin_bound_sum(10).passes);
    }

    #[test]
    fn sin_bound_sum_equals_cell_bound_sum() {
        // the cap q−1 binds in the interior cells for very small q
        for q in [10u32, 11, 101, 256] {
            let cells: f64 = (0..q).map(|t| cell_sin_bound(q, t)).sum();
            assert!(
                (cells - sin_bound_sum(q).value).abs() < 1e-8 * q as f64,
                "q={q}"
            );
        }
    }

    #[test]
    fn pairwise_threshold_crossing() {
        assert!(pairwise_bound_sum(18647).passes);
        assert!(!pairwise_bound_sum(18646).passes);
        assert!(pairwise_bound_sum(20000).passes);
        assert!(!pairwise_bound_sum(1000).passes);
    }

    #[test]
    fn refined_is_below_sin_bound_sum() {
        let r = refined_digit_sum(10);
        let per = r.per_digit.as_ref().unwrap();
        assert!(per.iter().any(|&v| (v - per[0]).abs() > 1e-3));
        assert!(r.value <= sin_bound_sum(10).value + 1e-6);
        assert!((r.value - 33.27).abs() < 0.05, "{}", r.value);
    }

    #[test]
    fn catalan_series() {
        // slowly convergent alternating series, averaged partial sums
        let mut s = 0.0f64;
        let mut prev = 0.0;
        for n in 0..200_000u64 {
            prev = s;
            let t = 1.0 / ((2 * n + 1) as f64).powi(2);
            s += if n % 2 == 0 { t } else { -t };
        }
        let g = 0.5 * (s + prev);
        assert!((catalan() - g).abs() < 1e-11);
        assert!((growth_constant() - C_REFERENCE).abs() < 1e-6);
    }

    #[test]
    fn margin_degenerate_and_references() {
        let full = DigitSystem::full(12).unwrap();
        let r = generalized_margin(&full);
        assert!(r.degenerate && !r.passes && r.threshold == 0.0);
        let cons = DigitSystem::new(20, 0..8).unwrap();
        let r = generalized_margin(&cons);
        assert!(r.consecutive_reference.is_some());
    }
}
