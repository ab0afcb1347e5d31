//! Sums of `|S_A|` over the grid `j/q^k`, derivative means, Farey-point maxima
//! and the moment tail count.

use super::maxima::{certified_max, MaxSettings};
use super::{restricted_exp_sum, restricted_exp_sum_derivative_ratio, DigitWindow, FourierProfile};
use crate::arith::gcd;
use crate::error::{Error, Result};
use crate::numeric::{chunked_reduce, KahanSum};
use serde::Serialize;
use std::f64::consts::PI;

/// Largest grid `q^k` scanned by the sum routines.
pub const MEAN_CAP: u128 = 100_000_000;
/// Largest grid for the moment tail count.
pub const MOMENT_CAP: u128 = 10_000_000;
// levels with q^l up to this size get a lookup table
const TABLE_LIMIT: u128 = 1 << 20;

/// `|S_A(j/q^k)| = Π_{l=1}^{k} |W((j mod q^l)/q^l)|`, with small levels
/// tabulated.
struct GridAbs<'a> {
    window: &'a DigitWindow,
    q: u64,
    k: u32,
    tables: Vec<Vec<f64>>,
}

impl<'a> GridAbs<'a> {
    fn new(profile: &'a FourierProfile) -> Self {
        let q = profile.q() as u64;
        let window = profile.window();
        let mut tables = Vec::new();
        let mut size = q as u128;
        for _ in 1..=profile.k {
            if size > TABLE_LIMIT {
                break;
            }
            let m = size as u64;
            tables.push(
                (0..m)
                    .map(|r| window.eval(r as f64 / m as f64).norm())
                    .collect(),
            );
            size *= q as u128;
        }
        Self {
            window,
            q,
            k: profile.k,
            tables,
        }
    }

    fn abs(&self, j: u64) -> f64 {
        let mut prod = 1.0f64;
        let mut m = 1u64;
        for l in 1..=self.k as usize {
            m *= self.q;
            let r = j % m;
            prod *= match self.tables.get(l - 1) {
                Some(t) => t[r as usize],
                None => self.window.eval(r as f64 / m as f64).norm(),
            };
            if prod == 0.0 {
                break;
            }
        }
        prod
    }
}

fn grid_size(profile: &FourierProfile, cap: u128) -> Result<u64> {
    match profile.modulus() {
        Some(n) if n <= cap => Ok(n as u64),
        Some(n) => Err(Error::cap("grid size q^k", n, cap)),
        None => Err(Error::cap("grid size q^k", u128::MAX, cap)),
    }
}

/// `Σ_{j<q^k} |S_A(j/q^k)|^σ`.
pub fn power_sum(profile: &FourierProfile, sigma: f64) -> Result<f64> {
    let n = grid_size(profile, MEAN_CAP)?;
    let grid = GridAbs::new(profile);
    let sum = chunked_reduce(
        n as usize,
        KahanSum::new,
        |acc, j| {
            let a = grid.abs(j as u64);
            acc.add(if sigma == 1.0 {
                a
            } else if sigma == 2.0 {
                a * a
            } else {
                a.powf(sigma)
            });
        },
        |a, b| a.merge(&b),
    );
    Ok(sum.value())
}

/// `Σ_{j<q^k} |S_A(j/q^k)|`.
pub fn mean_l1(profile: &FourierProfile) -> Result<f64> {
    power_sum(profile, 1.0)
}

/// `(1/q^k) Σ_{j<q^k} |S_A'(j/q^k)|`.
pub fn mean_l1_derivative(profile: &FourierProfile) -> Result<f64> {
    let n = grid_size(profile, MEAN_CAP)?;
    let sum = chunked_reduce(
        n as usize,
        KahanSum::new,
        |acc, j| acc.add(restricted_exp_sum_derivative_ratio(profile, j as i128, n as u128).norm()),
        |a, b| a.merge(&b),
    );
    Ok(sum.value() / n as f64)
}

/// Reference for the derivative mean, `2π(q−1)^k q^(kτ)`.
pub fn derivative_reference(profile: &FourierProfile) -> f64 {
    2.0 * PI * profile.l1_reference()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FareyMaxReport {
    /// Certified upper bound for the sum of maxima.
    pub value: f64,
    /// Sum of the largest sampled values.
    pub sampled: f64,
    /// `(2S²q^−k + π)(q−1)^k q^(kτ)`.
    pub bound: f64,
    pub fractions: usize,
    pub evaluations: usize,
}

/// `Σ_{0≤r<s≤S, (r,s)=1} max_{|η|≤1/(4S²)} |S_A(r/s + ξ + η)|`.
pub fn farey_max_sum(profile: &FourierProfile, s_max: u64, xi: f64) -> Result<FareyMaxReport> {
    farey_max_sum_with(profile, s_max, xi, MaxSettings::default())
}

pub fn farey_max_sum_with(
    profile: &FourierProfile,
    s_max: u64,
    xi: f64,
    settings: MaxSettings,
) -> Result<FareyMaxReport> {
    let n = profile.modulus().unwrap_or(u128::MAX);
    let s2 = (s_max as u128) * (s_max as u128);
    if s_max == 0 || s2 > n {
        return Err(Error::cap("S^2 against q^k", s2, n));
    }
    let half = 1.0 / (4.0 * s2 as f64);
    let curvature = profile.curvature();
    let mut centers = Vec::new();
    for s in 1..=s_max {
        for r in 0..s {
            if gcd(r, s) == 1 {
                centers.push(r as f64 / s as f64 + xi);
            }
        }
    }
    let mut value = KahanSum::new();
    let mut sampled = KahanSum::new();
    let mut evaluations = 0;
    for c in &centers {
        let m = certified_max(
            |x| restricted_exp_sum(profile, x).norm_sqr(),
            c - half,
            c + half,
            curvature,
            settings,
        );
        value.add(m.upper);
        sampled.add(m.sampled);
        evaluations += m.evaluations;
    }
    let bound = (2.0 * s2 as f64 / n as f64 + PI) * profile.l1_reference();
    Ok(FareyMaxReport {
        value: value.value() * (1.0 + 1e-12),
        sampled: sampled.value(),
        bound,
        fractions: centers.len(),
        evaluations,
    })
}

/// Exceedance count `#{j : |S_A(j/q^k)| ≥ |A|/T}` and the moment bound
/// `(T/|A|)^σ Σ_j |S_A(j/q^k)|^σ`.
pub fn moment_tail(profile: &FourierProfile, sigma: f64, t: f64) -> Result<(u64, f64)> {
    if !(sigma > 0.0) || !(t >= 1.0) {
        return Err(Error::InvalidInput(format!(
            "need sigma > 0 and T >= 1, got {sigma}, {t}"
        )));
    }
    let n = grid_size(profile, MOMENT_CAP)?;
    let size = profile.set_size();
    let level = size / t;
    let grid = GridAbs::new(profile);
    let (count, sum) = chunked_reduce(
        n as usize,
        || (0u64, KahanSum::new()),
        |acc, j| {
            let a = grid.abs(j as u64);
            if a >= level {
                acc.0 += 1;
            }
            acc.1.add(a.powf(sigma));
        },
        |a, b| {
            a.0 += b.0;
            a.1.merge(&b.1);
        },
    );
    Ok((count, (t / size).powf(sigma) * sum.value()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digits::DigitSystem;
    use crate::fourier::restricted_exp_sum_ratio;

    #[test]
    fn grid_abs_matches_product_formula() {
        let sys = DigitSystem::excluding(7, &[2]).unwrap();
        let p = FourierProfile::new(sys, 4).unwrap();
        let g = GridAbs::new(&p);
        for j in (0..2401u64).step_by(37) {
            let z = restricted_exp_sum_ratio(&p, j as i128, 2401);
            assert!((g.abs(j) - z.norm()).abs() < 1e-9);
        }
    }

    #[test]
    fn k1_full_set_orthogonality() {
        let p = FourierProfile::new(DigitSystem::full(10).unwrap(), 1).unwrap();
        assert!((mean_l1(&p).unwrap() - 10.0).abs() < 1e-9);
    }

    #[test]
    fn l1_matches_brute_force_and_cell_bound() {
        let sys = DigitSystem::excluding(10, &[0]).unwrap();
        let p = FourierProfile::new(sys.clone(), 2).unwrap();
        let members: Vec<u64> = (11..100u64).filter(|n| n % 10 != 0).collect();
        let brute: f64 = (0..100u64)
            .map(|j| {
                members
                    .iter()
                    .map(|&n| crate::numeric::e_ratio((n * j) as i128, 100))
                    .sum::<num_complex::Complex64>()
                    .norm()
            })
            .sum();
        let v = mean_l1(&p).unwrap();
        assert!((v - brute).abs() < 1e-9);
        let cells = crate::fourier::bounds::refined_digit_sum(10)
            .per_digit
            .unwrap()[0];
        assert!(v <= cells * cells);
    }

    #[test]
    fn moment_tail_t1_and_parseval() {
        let p = FourierProfile::new(DigitSystem::excluding(10, &[0]).unwrap(), 3).unwrap();
        let (count, bound) = moment_tail(&p, 1.0, 1.0).unwrap();
        assert_eq!(count, 1);
        assert!(bound >= 1.0);
        let (_, b2) = moment_tail(&p, 2.0, 3.0).unwrap();
        let a = p.set_size();
        assert!((b2 - 9.0 / (a * a) * 1000.0 * a).abs() / b2 < 1e-9);
    }

    #[test]
    fn caps() {
        let p = FourierProfile::new(DigitSystem::excluding(10, &[0]).unwrap(), 9).unwrap();
        assert!(matches!(mean_l1(&p), Err(Error::CapExceeded { .. })));
        assert!(matches!(
            moment_tail(&p, 1.0, 2.0),
            Err(Error::CapExceeded { .. })
        ));
    }
}
