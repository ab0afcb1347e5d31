//! Farey fractions, continued-fraction convergents and the simplest rational
//! in an interval, all in exact integer arithmetic.

use crate::arith::gcd;
use crate::error::{Error, Result};
use serde::Serialize;

/// Largest order accepted by [`dirichlet_cover`].
pub const COVER_CAP: u64 = 100_000;

/// A reduced fraction `r/s` in `[0, 1]` with the half-width of its window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FareyPoint {
    pub r: u64,
    pub s: u64,
    pub width: f64,
}

impl FareyPoint {
    pub fn value(&self) -> f64 {
        self.r as f64 / self.s as f64
    }
}

/// Reduced fractions in `[0, 1]` with denominator at most `m`, in increasing
/// order, each with window half-width `1/(sM)`.
pub fn dirichlet_cover(m: u64) -> Result<Vec<FareyPoint>> {
    if m == 0 {
        return Err(Error::InvalidInput("order must be at least 1".into()));
    }
    if m > COVER_CAP {
        return Err(Error::cap("Farey order", m, COVER_CAP));
    }
    let mut out = Vec::new();
    let (mut a, mut b, mut c, mut d) = (0u64, 1u64, 1u64, m);
    out.push(point(a, b, m));
    while c <= d {
        out.push(point(c, d, m));
        let k = (m + b) / d;
        (a, b, c, d) = (c, d, k * c - a, k * d - b);
    }
    Ok(out)
}

fn point(r: u64, s: u64, m: u64) -> FareyPoint {
    FareyPoint {
        r,
        s,
        width: 1.0 / (s as f64 * m as f64),
    }
}

/// Whether consecutive windows of an ordered cover of order `m` overlap,
/// checked exactly: `a/b`, `c/d` neighbours need `1/(bM) + 1/(dM) ≥ c/d − a/b`.
pub fn cover_is_gapless(points: &[FareyPoint], m: u64) -> bool {
    let ends =
        points.first().is_some_and(|p| p.r == 0) && points.last().is_some_and(|p| p.r == p.s);
    ends && points.windows(2).all(|w| {
        let (a, b, c, d) = (
            w[0].r as u128,
            w[0].s as u128,
            w[1].r as u128,
            w[1].s as u128,
        );
        // (b + d)·b·d ≥ (cb − ad)·b·d·M  ⇔  b + d ≥ (cb − ad)·M
        b + d >= (c * b - a * d) * m as u128
    })
}

/// Continued-fraction convergents `p/q` of `num/den` (`den > 0`).
pub fn convergents(num: i128, den: i128) -> Vec<(i128, i128)> {
    assert!(den > 0, "denominator must be positive");
    let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
    let (mut n, mut d) = (num, den);
    let mut out = Vec::new();
    loop {
        let a = n.div_euclid(d);
        let (p2, q2) = (a * p1 + p0, a * q1 + q0);
        out.push((p2, q2));
        let r = n - a * d;
        if r == 0 {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        (n, d) = (d, r);
    }
    out
}

/// The last convergent of `num/den` whose denominator is at most `m`.
/// It satisfies `|num/den − p/q| < 1/(qM)`.
pub fn best_convergent(num: i128, den: i128, m: i128) -> (i128, i128) {
    let cs = convergents(num, den);
    cs.iter()
        .copied()
        .take_while(|&(_, q)| q <= m)
        .last()
        .unwrap_or(cs[0])
}

fn floor_div(a: i128, b: i128) -> i128 {
    a.div_euclid(b)
}

fn ceil_div(a: i128, b: i128) -> i128 {
    -((-a).div_euclid(b))
}

/// The fraction with the smallest denominator in the closed interval
/// `[ln/ld, hn/hd]` (positive denominators, `ln/ld ≤ hn/hd`). Among several
/// with that denominator it returns the smallest one; see
/// [`min_denominator_fractions`] for all of them.
pub fn simplest_in_interval(ln: i128, ld: i128, hn: i128, hd: i128) -> (i128, i128) {
    let c = ceil_div(ln, ld);
    if c * hd <= hn {
        return (c, 1);
    }
    let f = floor_div(ln, ld);
    // x = f + 1/y with y ∈ [hd/(hn − f hd), ld/(ln − f ld)]
    let (p, q) = simplest_in_interval(hd, hn - f * hd, ld, ln - f * ld);
    (f * p + q, p)
}

/// All fractions `r/s` in `[ln/ld, hn/hd]` with the minimal denominator.
pub fn min_denominator_fractions(ln: i128, ld: i128, hn: i128, hd: i128) -> Vec<(i128, i128)> {
    let (_, s) = simplest_in_interval(ln, ld, hn, hd);
    let lo = ceil_div(ln * s, ld);
    let hi = floor_div(hn * s, hd);
    (lo..=hi)
        .filter(|&r| gcd(r.unsigned_abs(), s as u128) == 1)
        .map(|r| (r, s))
        .collect()
}
