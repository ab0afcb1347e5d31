//! The product formula for `S_A(θ) = Σ_{n∈A} e(nθ)` over digit-restricted
//! sets and the hierarchy of upper bounds for the digit window `F_D`.
//!
//! With `A` the integers in `[0, q^k)` whose `k` padded digits lie in `D`,
//!
//! ```text
//! S_A(θ) = Π_{i<k} Σ_{a∈D} e(a q^i θ).
//! ```

pub mod bounds;
pub mod maxima;
pub mod means;

pub use bounds::{
    catalan, cell_refined_max, cell_sin_bound, digit_threshold, first_passing, generalized_margin,
    generalized_margin_with, growth_constant, pairwise_bound_sum, refined_digit_sum,
    refined_digit_sum_with, scan, sin_bound, sin_bound_sum, BoundKind, BoundReport, C_REFERENCE,
};
pub use maxima::{certified_max, CertifiedMax, MaxSettings};
pub use means::{
    derivative_reference, farey_max_sum, farey_max_sum_with, mean_l1, mean_l1_derivative,
    moment_tail, power_sum, FareyMaxReport,
};

use crate::digits::DigitSystem;
use crate::error::{Error, Result};
use crate::numeric::{e, e_mul, frac, ComplexKahan};
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

/// The exponent `τ = 1/5 − 10^−9`.
pub const DEFAULT_TAU: f64 = 0.2 - 1e-9;

/// `F_D(φ) = |Σ_{a∈D} e(aφ)|` by direct summation.
pub fn digit_window_sum(sys: &DigitSystem, phi: f64) -> f64 {
    let mut acc = ComplexKahan::new();
    for &a in sys.digits() {
        acc.add(e_mul(a as u64, phi));
    }
    acc.value().norm()
}

/// Fast evaluator for `W(φ) = Σ_{a∈D} e(aφ)`, summing each run of consecutive
/// digits as a geometric series.
#[derive(Debug, Clone)]
pub struct DigitWindow {
    runs: Vec<(u32, u32)>,
    size: usize,
    digits: Vec<u32>,
    // Σ_{a<a'} (a − a')²
    spread: f64,
}

impl DigitWindow {
    pub fn new(sys: &DigitSystem) -> Self {
        let d = sys.digits();
        let mut runs: Vec<(u32, u32)> = Vec::new();
        for &a in d {
            match runs.last_mut() {
                Some((s, len)) if *s + *len == a => *len += 1,
                _ => runs.push((a, 1)),
            }
        }
        let n = d.len() as u128;
        let s1: u128 = d.iter().map(|&a| a as u128).sum();
        let s2: u128 = d.iter().map(|&a| (a as u128) * (a as u128)).sum();
        Self {
            runs,
            size: d.len(),
            digits: d.to_vec(),
            spread: (n * s2 - s1 * s1) as f64,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// `W(φ)`.
    pub fn eval(&self, phi: f64) -> Complex64 {
        let mut r = frac(phi);
        if r > 0.5 {
            r -= 1.0;
        }
        self.eval_reduced(r)
    }

    /// `W(r)` for `r ∈ [−1/2, 1/2]`.
    pub fn eval_reduced(&self, r: f64) -> Complex64 {
        if r == 0.0 {
            return Complex64::new(self.size as f64, 0.0);
        }
        let den = (PI * r).sin();
        let mut acc = Complex64::new(0.0, 0.0);
        for &(s, m) in &self.runs {
            if m == 1 {
                acc += e(s as f64 * r);
                continue;
            }
            let ratio = (PI * m as f64 * r).sin() / den;
            let phase = (2.0 * s as f64 + m as f64 - 1.0) * 0.5 * r;
            acc += e(phase) * ratio;
        }
        acc
    }

    /// `|W(φ)|²`.
    pub fn norm_sqr(&self, phi: f64) -> f64 {
        self.eval(phi).norm_sqr()
    }

    /// `W'(φ) = 2πi Σ_{a∈D} a e(aφ)`.
    pub fn derivative(&self, phi: f64) -> Complex64 {
        let mut acc = ComplexKahan::new();
        for &a in &self.digits {
            acc.add(e_mul(a as u64, phi) * a as f64);
        }
        acc.value() * Complex64::new(0.0, TAU)
    }

    /// Bound for `|d²/dφ² |W(φ)|²|`, namely `4π² Σ_{a,a'∈D} (a − a')²`.
    pub fn curvature(&self) -> f64 {
        8.0 * PI * PI * self.spread
    }

    /// Variance of a uniformly chosen allowed digit.
    pub fn digit_variance(&self) -> f64 {
        let n = self.size as f64;
        self.spread / (n * n)
    }
}

/// A digit system together with a digit count `k` (so `N = q^k`) and the
/// exponent `τ`.
#[derive(Debug, Clone)]
pub struct FourierProfile {
    pub sys: DigitSystem,
    pub k: u32,
    pub tau: f64,
    window: DigitWindow,
}

impl FourierProfile {
    pub fn new(sys: DigitSystem, k: u32) -> Result<Self> {
        Self::with_tau(sys, k, DEFAULT_TAU)
    }

    pub fn with_tau(sys: DigitSystem, k: u32, tau: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInput(
                "digit count k must be at least 1".into(),
            ));
        }
        if !(tau < 0.2) {
            return Err(Error::InvalidInput(format!(
                "tau must be below 1/5, got {tau}"
            )));
        }
        let window = DigitWindow::new(&sys);
        Ok(Self {
            sys,
            k,
            tau,
            window,
        })
    }

    pub fn window(&self) -> &DigitWindow {
        &self.window
    }

    pub fn q(&self) -> u32 {
        self.sys.q()
    }

    /// `N = q^k`, when it fits in 128 bits.
    pub fn modulus(&self) -> Option<u128> {
        (self.sys.q() as u128).checked_pow(self.k)
    }

    /// `|A(N)| = |D|^k` as a float.
    pub fn set_size(&self) -> f64 {
        (self.sys.len() as f64).powi(self.k as i32)
    }

    /// The trivial-per-digit reference `(q−1)^k q^(kτ)`.
    pub fn l1_reference(&self) -> f64 {
        let q = self.q() as f64;
        ((q - 1.0) * q.powf(self.tau)).powi(self.k as i32)
    }

    /// `Σ_{n,m∈A} (n − m)²` scaled by `4π²`: a bound for `|d²/dθ² |S_A(θ)|²|`.
    pub fn curvature(&self) -> f64 {
        let q2 = (self.q() as f64).powi(2);
        let geometric: f64 = (0..self.k).map(|i| q2.powi(i as i32)).sum();
        let a = self.set_size();
        8.0 * PI * PI * a * a * geometric * self.window.digit_variance()
    }

    /// Phases `q^i θ mod 1` for `i < k`, carried in double-double precision.
    pub fn phases(&self, theta: f64) -> Vec<f64> {
        let qf = self.q() as f64;
        let mut hi = frac(theta);
        let mut lo = 0.0f64;
        let mut out = Vec::with_capacity(self.k as usize);
        for _ in 0..self.k {
            out.push(frac(hi + lo));
            let p = qf * hi;
            let err = qf.mul_add(hi, -p);
            let ph = p - p.floor();
            let l = err + qf * lo;
            let s = ph + l;
            lo = l - (s - ph);
            hi = s - s.floor();
        }
        out
    }

    /// Phases `q^i j / m mod 1` computed exactly in integers.
    pub fn phases_ratio(&self, j: i128, m: u128) -> Vec<f64> {
        let m_i = m as i128;
        let q = self.q() as u128;
        let mut r = j.rem_euclid(m_i) as u128;
        let mut out = Vec::with_capacity(self.k as usize);
        for _ in 0..self.k {
            let c = if 2 * r > m {
                r as f64 / m as f64 - 1.0
            } else {
                r as f64 / m as f64
            };
            out.push(c);
            r = (r * q) % m;
        }
        out
    }
}

fn product(window: &DigitWindow, phases: &[f64]) -> Complex64 {
    phases
        .iter()
        .fold(Complex64::new(1.0, 0.0), |acc, &p| acc * window.eval(p))
}

fn product_derivative(window: &DigitWindow, q: u32, phases: &[f64]) -> Complex64 {
    let vals: Vec<Complex64> = phases.iter().map(|&p| window.eval(p)).collect();
    let k = vals.len();
    let mut suffix = vec![Complex64::new(1.0, 0.0); k + 1];
    for i in (0..k).rev() {
        suffix[i] = suffix[i + 1] * vals[i];
    }
    let mut prefix = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut scale = 1.0f64;
    for i in 0..k {
        acc += prefix * window.derivative(phases[i]) * scale * suffix[i + 1];
        prefix *= vals[i];
        scale *= q as f64;
    }
    acc
}

/// `S_A(θ)` over the `k`-digit padded set by the product formula.
pub fn restricted_exp_sum(profile: &FourierProfile, theta: f64) -> Complex64 {
    product(&profile.window, &profile.phases(theta))
}

/// `S_A(j/m)` with exact phase reduction.
pub fn restricted_exp_sum_ratio(profile: &FourierProfile, j: i128, m: u128) -> Complex64 {
    product(&profile.window, &profile.phases_ratio(j, m))
}

/// `S_A'(θ)` by the product rule.
pub fn restricted_exp_sum_derivative(profile: &FourierProfile, theta: f64) -> Complex64 {
    product_derivative(&profile.window, profile.q(), &profile.phases(theta))
}

/// `S_A'(j/m)` with exact phase reduction.
pub fn restricted_exp_sum_derivative_ratio(
    profile: &FourierProfile,
    j: i128,
    m: u128,
) -> Complex64 {
    product_derivative(&profile.window, profile.q(), &profile.phases_ratio(j, m))
}
