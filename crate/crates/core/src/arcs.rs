//! Major/minor arc dissection of the points `j/N`, `N = q^k`, and the exact
//! discrete counting identity
//!
//! ```text
//! (1/N) Σ_{j<N} S_P(j/N) S_A(−j/N) = #{p ∈ A(N)}.
//! ```

use crate::arith::gcd;
use crate::digits::DigitSystem;
use crate::error::{Error, Result};
use crate::farey::{best_convergent, min_denominator_fractions, FareyPoint};
use crate::fourier::{restricted_exp_sum_ratio, FourierProfile};
use crate::numeric::{ComplexKahan, KahanSum};
use crate::primes::{prime_exp_sum_ratio, PrimeTable};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

/// Default exponent in the window size `(log N)^A`.
pub const DEFAULT_A: f64 = 51.0;
/// Largest `N` for full scans.
pub const SCAN_CAP: u128 = 10_000_000;
// binary digits kept when rationalizing the window size
const WINDOW_BITS: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ArcKind {
    PrimaryMajor,
    SmoothMajor,
    NonSmoothMajor,
    Minor,
}

impl ArcKind {
    pub const ALL: [ArcKind; 4] = [
        ArcKind::PrimaryMajor,
        ArcKind::SmoothMajor,
        ArcKind::NonSmoothMajor,
        ArcKind::Minor,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ArcKind::PrimaryMajor => "PrimaryMajor",
            ArcKind::SmoothMajor => "SmoothMajor",
            ArcKind::NonSmoothMajor => "NonSmoothMajor",
            ArcKind::Minor => "Minor",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArcClass {
    pub class: ArcKind,
    pub witness: FareyPoint,
    /// Distance scale `q^ℓ` with `q^ℓ ≤ max(1, |j − rN/s|) < q^(ℓ+1)`.
    #[serde(rename = "B")]
    pub b: f64,
    /// Denominator scale `q^i` with `q^i ≤ s < q^(i+1)`.
    #[serde(rename = "S")]
    pub s: f64,
    /// `|j − rN/s|`.
    pub error: f64,
}

/// Window size `(log N)^A` rounded down to a multiple of `2^−20`, as a
/// numerator over `2^20`.
fn window_numerator(n: u128, a: f64) -> i128 {
    let l = (n as f64).ln().powf(a);
    let scaled = (l * (1u64 << WINDOW_BITS) as f64).floor();
    if scaled >= 1e36 {
        i128::MAX / 4
    } else {
        scaled as i128
    }
}

fn scale(q: u32, x: f64) -> f64 {
    let q = q as f64;
    let mut s = 1.0;
    while s * q <= x {
        s *= q;
    }
    s
}

fn kind_for(q: u32, s: u64) -> ArcKind {
    if (q as u64).is_multiple_of(s) {
        ArcKind::PrimaryMajor
    } else if is_smooth_over(q as u64, s) {
        ArcKind::SmoothMajor
    } else {
        ArcKind::NonSmoothMajor
    }
}

/// Precomputed quantities for classifying many points at fixed `(q, k, A)`.
#[derive(Debug, Clone)]
pub struct Classifier {
    q: u32,
    n: u128,
    l_num: i128,
    sqrt_n: i128,
}

impl Classifier {
    pub fn new(q: u32, k: u32, a: f64) -> Result<Self> {
        let n = (q as u128)
            .checked_pow(k)
            .filter(|&n| n <= 1u128 << 64)
            .ok_or(Error::Overflow("q^k beyond 2^64"))?;
        Ok(Self {
            q,
            n,
            l_num: window_numerator(n, a),
            sqrt_n: (n as f64).sqrt().floor() as i128,
        })
    }

    pub fn modulus(&self) -> u128 {
        self.n
    }

    /// Window size `L` as used (after rationalizing).
    pub fn window(&self) -> f64 {
        self.l_num as f64 / (1u64 << WINDOW_BITS) as f64
    }

    pub fn classify(&self, j: u128) -> ArcClass {
        let n = self.n as i128;
        let j = j as i128;
        let den = n << WINDOW_BITS;
        let center = j << WINDOW_BITS;
        // window [j − L, j + L]/N clipped to [0, 1]
        let lo = (center - self.l_num).max(0);
        let hi = (center + self.l_num).min(den);
        let cands = min_denominator_fractions(lo, den, hi, den);
        let err = |r: i128, s: i128| ((j * s - r * n).abs() as f64) / s as f64;
        let (r, s) = cands
            .iter()
            .copied()
            .min_by(|a, b| err(a.0, a.1).total_cmp(&err(b.0, b.1)))
            .expect("clipped window is nonempty");
        let l = self.window();
        if (s as f64) <= l {
            let e = err(r, s);
            return ArcClass {
                class: kind_for(self.q, s as u64),
                witness: FareyPoint {
                    r: r as u64,
                    s: s as u64,
                    width: l / self.n as f64,
                },
                b: scale(self.q, e.max(1.0)),
                s: scale(self.q, s as f64),
                error: e,
            };
        }
        let m = self.sqrt_n.max(1);
        let (r, s) = best_convergent(j, n, m);
        let e = err(r, s);
        ArcClass {
            class: ArcKind::Minor,
            witness: FareyPoint {
                r: r as u64,
                s: s as u64,
                width: 1.0 / (s as f64 * m as f64),
            },
            b: scale(self.q, e.max(1.0)),
            s: scale(self.q, s as f64),
            error: e,
        }
    }
}

/// Classify `j/N`, `N = q^k`, against windows `|j − (r/s)N| ≤ (log N)^A`
/// with `s ≤ (log N)^A`.
pub fn classify_point(j: u128, sys: &DigitSystem, k: u32, a: f64) -> Result<ArcClass> {
    let c = Classifier::new(sys.q(), k, a)?;
    if j >= c.n {
        return Err(Error::InvalidInput(format!(
            "j = {j} is not below N = {}",
            c.n
        )));
    }
    Ok(c.classify(j))
}

fn scan_size(sys: &DigitSystem, k: u32) -> Result<usize> {
    let n = (sys.q() as u128).checked_pow(k).unwrap_or(u128::MAX);
    if n > SCAN_CAP {
        return Err(Error::cap("scan size q^k", n, SCAN_CAP));
    }
    Ok(n as usize)
}

/// `S_P(j/N)` for every `j < N` by one inverse FFT of the prime indicator.
pub fn prime_sums_all(table: &PrimeTable, n: usize) -> Result<Vec<Complex64>> {
    table.check(n as u64 - 1)?;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for p in table.primes_upto(n as u64 - 1) {
        buf[p as usize] = Complex64::new(1.0, 0.0);
    }
    // rustfft's inverse transform carries e(+nj/N) and no normalization
    FftPlanner::<f64>::new()
        .plan_fft_inverse(n)
        .process(&mut buf);
    Ok(buf)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MainTermReport {
    /// Primes below `N` whose `k` padded digits lie in `D`.
    pub exact_count: u64,
    /// `(1/N) Σ_j S_P(j/N) S_A(−j/N)` over all `j`.
    pub identity_sum: f64,
    /// Real part of `q^−k Σ_{ℓ<q} S_P(ℓ/q) S_A(−ℓ/q)`.
    pub primary_term: f64,
    /// `c(D) |A(N)| / log N`.
    pub prediction: f64,
}

/// Exact count, the full identity sum, the primary-arc term and the
/// prediction at `N = q^k`.
pub fn main_term_assembly(sys: &DigitSystem, k: u32, table: &PrimeTable) -> Result<MainTermReport> {
    let n = scan_size(sys, k)?;
    let profile = FourierProfile::new(sys.clone(), k)?;
    let q = sys.q() as u64;
    let padded = |mut p: u64| {
        (0..k).all(|_| {
            let ok = sys.contains((p % q) as u32);
            p /= q;
            ok
        })
    };
    let exact_count = table
        .primes_upto(n as u64 - 1)
        .into_iter()
        .filter(|&p| padded(p))
        .count() as u64;
    let sp = prime_sums_all(table, n)?;
    let mut acc = ComplexKahan::new();
    let terms: Vec<Complex64> = (0..n)
        .into_par_iter()
        .with_min_len(1 << 12)
        .map(|j| sp[j] * restricted_exp_sum_ratio(&profile, j as i128, n as u128).conj())
        .collect();
    for t in terms {
        acc.add(t);
    }
    let identity_sum = acc.value().re / n as f64;
    let mut prim = ComplexKahan::new();
    for l in 0..q {
        let s_p = prime_exp_sum_ratio(table, n as u64 - 1, l as i128, q)?;
        let s_a = restricted_exp_sum_ratio(&profile, -(l as i128), q as u128);
        prim.add(s_p * s_a);
    }
    let primary_term = prim.value().re / n as f64;
    let prediction = sys.prediction_constant() * profile.set_size() / (n as f64).ln();
    Ok(MainTermReport {
        exact_count,
        identity_sum,
        primary_term,
        prediction,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ClassTally {
    pub class: ArcKind,
    pub count: u64,
    /// `(1/N) Σ |S_P(j/N)| |S_A(j/N)|` over the class.
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MinorMassReport {
    /// Mass over every class except the primary major arcs.
    pub mass: f64,
    /// `|A(N)| / (log N)^A`.
    pub reference: f64,
    /// The `j = 0` term `|A(N)| π(N) / N`.
    pub zero_term: f64,
    pub classes: Vec<ClassTally>,
}

/// `(1/N) Σ |S_P(j/N)|·|S_A(−j/N)|` over the `j` that are not on primary
/// major arcs, with per-class tallies.
pub fn minor_arc_mass(
    sys: &DigitSystem,
    k: u32,
    table: &PrimeTable,
    a: f64,
) -> Result<MinorMassReport> {
    let n = scan_size(sys, k)?;
    let profile = FourierProfile::new(sys.clone(), k)?;
    let classifier = Classifier::new(sys.q(), k, a)?;
    let sp = prime_sums_all(table, n)?;
    const CHUNK: usize = 1 << 14;
    let partials: Vec<[(u64, KahanSum); 4]> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc: [(u64, KahanSum); 4] = Default::default();
            for j in c * CHUNK..((c + 1) * CHUNK).min(n) {
                let cls = classifier.classify(j as u128).class as usize;
                let w =
                    sp[j].norm() * restricted_exp_sum_ratio(&profile, j as i128, n as u128).norm();
                acc[cls].0 += 1;
                acc[cls].1.add(w);
            }
            acc
        })
        .collect();
    let mut total: [(u64, KahanSum); 4] = Default::default();
    for p in &partials {
        for (t, x) in total.iter_mut().zip(p) {
            t.0 += x.0;
            t.1.merge(&x.1);
        }
    }
    let nf = n as f64;
    let classes: Vec<ClassTally> = ArcKind::ALL
        .iter()
        .zip(&total)
        .map(|(&class, (count, m))| ClassTally {
            class,
            count: *count,
            mass: m.value() / nf,
        })
        .collect();
    let mass = classes
        .iter()
        .filter(|c| c.class != ArcKind::PrimaryMajor)
        .map(|c| c.mass)
        .sum();
    let size = profile.set_size();
    let pi = table.pi(n as u64 - 1)? as f64;
    Ok(MinorMassReport {
        mass,
        reference: size / nf.ln().powf(a),
        zero_term: size * pi / nf,
        classes,
    })
}

/// Whether `s` has only prime factors dividing `q`.
pub fn is_smooth_over(q: u64, s: u64) -> bool {
    let mut s = s;
    loop {
        let g = gcd(s, q);
        if g == 1 {
            return s == 1;
        }
        while s.is_multiple_of(g) {
            s /= g;
        }
    }
}
