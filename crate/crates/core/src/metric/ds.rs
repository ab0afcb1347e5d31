//! The Duffin–Schaefer counterexample: `ψ₀` lives on primorials, `ψ` spreads
//! the same windows over all squarefree divisors, so every `ψ`-window sits
//! inside a `ψ₀`-window while `Σ ψ(q)/q` diverges and `Σ ψ₀(q)/q` converges.

use super::psi::{ds_scale, primorial, PsiFunction};
use crate::arith::small_primes;
use crate::error::{Error, Result};
use crate::numeric::KahanSum;
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

/// Largest prime bound for the block series.
pub const DS_CAP: u64 = 100_000_000;
/// Largest prime used for the exact containment checks.
pub const CONTAINMENT_LIMIT: u64 = 200;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DsCheckpoint {
    pub ell: u64,
    pub psi0_series: f64,
    pub psi_series: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DsReport {
    pub ell_max: u64,
    /// `Σ_{ℓ≤ℓmax} 1/(ℓ log ℓ)` over primes: `Σ ψ₀(q)/q` by blocks.
    pub psi0_series: f64,
    /// `Σ_{ℓ≤ℓmax} Π_{p<ℓ}(1+1/p)/(ℓ log ℓ)`: `Σ ψ(q)/q` by blocks.
    pub psi_series: f64,
    /// `Σ_{ℓ≤ℓmax} (1−1/ℓ)/(ℓ log ℓ)`: `Σ φ(q)ψ(q)/q²` by blocks.
    pub psi_ds_series: f64,
    /// Series values at each power of ten up to `ℓmax`.
    pub checkpoints: Vec<DsCheckpoint>,
    /// `ψ`-series increment over the last decade.
    pub last_decade_growth: f64,
    pub containment_checks: u64,
    pub containment_holds: bool,
}

/// Block series for both functions over primes `ℓ ≤ ℓmax`, plus exact
/// containment checks for `ℓ ≤ min(ℓmax, 200)`.
pub fn ds_counterexample(ell_max: u64) -> Result<(PsiFunction, PsiFunction, DsReport)> {
    if ell_max < 2 {
        return Err(Error::InvalidInput("ell_max must be at least 2".into()));
    }
    if ell_max > DS_CAP {
        return Err(Error::cap("counterexample prime bound", ell_max, DS_CAP));
    }
    let primes = small_primes(ell_max as usize);
    let mut s0 = KahanSum::new();
    let mut s1 = KahanSum::new();
    let mut s2 = KahanSum::new();
    let mut mertens = 1.0f64; // Π_{p<ℓ} (1 + 1/p)
    let mut checkpoints = Vec::new();
    let mut next = 10u64;
    for &l in &primes {
        while l > next {
            checkpoints.push(DsCheckpoint {
                ell: next,
                psi0_series: s0.value(),
                psi_series: s1.value(),
            });
            next *= 10;
        }
        let lf = l as f64;
        let w = 1.0 / (lf * lf.ln());
        s0.add(w);
        s1.add(mertens * w);
        s2.add((1.0 - 1.0 / lf) * w);
        mertens *= 1.0 + 1.0 / lf;
    }
    while next <= ell_max {
        checkpoints.push(DsCheckpoint {
            ell: next,
            psi0_series: s0.value(),
            psi_series: s1.value(),
        });
        next *= 10;
    }
    let last_decade_growth = match checkpoints.len() {
        0 => s1.value(),
        1 => s1.value() - checkpoints[0].psi_series,
        k => checkpoints[k - 1].psi_series - checkpoints[k - 2].psi_series,
    };
    let (checks, holds) = containment(ell_max.min(CONTAINMENT_LIMIT));
    Ok((
        PsiFunction::DsBase,
        PsiFunction::DsSpread,
        DsReport {
            ell_max,
            psi0_series: s0.value(),
            psi_series: s1.value(),
            psi_ds_series: s2.value(),
            checkpoints,
            last_decade_growth,
            containment_checks: checks,
            containment_holds: holds,
        },
    ))
}

/// For sample squarefree `q | q_ℓ` with `ℓ | q` and sample `a`, check that
/// `[a/q ± ψ(q)/q²] ⊆ [A/q_ℓ ± ψ₀(q_ℓ)/q_ℓ²]` with `A = a q_ℓ/q`.
fn containment(limit: u64) -> (u64, bool) {
    let psi0 = PsiFunction::DsBase;
    let psi = PsiFunction::DsSpread;
    let mut checks = 0u64;
    let mut holds = true;
    for l in small_primes(limit as usize) {
        let ql = primorial(l);
        let below = small_primes(l as usize - 1);
        // q = ℓ, ℓ·2, ℓ·(all smaller primes), ℓ·(every other smaller prime)
        let mut qs: Vec<BigInt> = vec![BigInt::from(l), ql.clone()];
        if l > 2 {
            qs.push(BigInt::from(2 * l));
            let alt = below
                .iter()
                .step_by(2)
                .fold(BigInt::from(l), |acc, &p| acc * p);
            qs.push(alt);
        }
        let r0 = psi0_radius(&psi0, l, &ql);
        for q in qs {
            let rq = psi_radius(&psi, l, &q, &ql);
            for a in sample_numerators(&q) {
                let big_a = &a * &ql / &q;
                let c = BigRational::new(a.clone(), q.clone());
                let c0 = BigRational::new(big_a, ql.clone());
                let inside = &c0 - &r0 <= &c - &rq && &c + &rq <= &c0 + &r0;
                holds &= inside;
                checks += 1;
            }
        }
    }
    (checks, holds)
}

fn psi0_radius(psi0: &PsiFunction, l: u64, ql: &BigInt) -> BigRational {
    match u64::try_from(ql) {
        Ok(q) => psi0.eval_exact(q) / BigRational::from_integer(ql * ql),
        // ψ₀(q_ℓ)/q_ℓ² = 1/(q_ℓ ℓ log ℓ)
        Err(_) => {
            BigRational::from_integer(1.into())
                / (BigRational::from_integer(ql.clone()) * ds_scale(l))
        }
    }
}

fn psi_radius(psi: &PsiFunction, l: u64, q: &BigInt, ql: &BigInt) -> BigRational {
    match u64::try_from(q) {
        Ok(qq) => psi.eval_exact(qq) / BigRational::from_integer(q * q),
        Err(_) => {
            BigRational::from_integer(1.into())
                / (BigRational::from_integer(ql.clone()) * ds_scale(l))
        }
    }
}

fn sample_numerators(q: &BigInt) -> Vec<BigInt> {
    let mut out = Vec::new();
    for a in [1i64, 2, 3, 5, 7, 11] {
        let ab = BigInt::from(a);
        if &ab < q && num_integer::Integer::gcd(&ab, q) == BigInt::from(1) {
            out.push(ab);
        }
    }
    let last = q - 1;
    if last > BigInt::from(0) {
        out.push(last);
    }
    out
}

/// `ψ₀(6)` and `ψ(3)` as a sanity pair: `6/(3 log 3)` and `9/(6·3 log 3)`.
pub fn small_instance() -> (f64, f64) {
    (PsiFunction::DsBase.eval(6), PsiFunction::DsSpread.eval(3))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instance_values() {
        let (a, b) = small_instance();
        let l3 = 3.0 * 3f64.ln();
        assert!((a - 6.0 / l3).abs() < 1e-12);
        assert!((b - 9.0 / (6.0 * l3)).abs() < 1e-12);
    }

    #[test]
    fn third_maps_into_two_sixths() {
        let (_, _, r) = ds_counterexample(3).unwrap();
        assert!(r.containment_holds);
        let rq = psi_radius(
            &PsiFunction::DsSpread,
            3,
            &BigInt::from(3),
            &BigInt::from(6),
        );
        let r6 = psi0_radius(&PsiFunction::DsBase, 3, &BigInt::from(6));
        assert_eq!(rq, r6);
    }

    #[test]
    fn series_shapes() {
        let (_, _, r) = ds_counterexample(100_000).unwrap();
        assert!(r.psi0_series < 3.0);
        assert!(r.psi_series > 1.5 * r.psi0_series);
        assert!(r.last_decade_growth > 0.0);
        assert!(r.psi_ds_series < r.psi0_series);
        assert!(r.containment_holds && r.containment_checks > 100);
    }
}
