//! Approximation functions `ψ: Z≥1 → R≥0`.

use crate::arith::{factorize_full, small_primes};
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

// θ(ℓ) = Σ_{p≤ℓ} log p is tabulated up to this bound
const THETA_LIMIT: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq)]
pub enum PsiFunction {
    /// `ψ(n) = n^−a`.
    Power(f64),
    /// `ψ(n) = (log n)^−(1+ε)` for `n ≥ 2`, `ψ(1) = 0`; `Σ ψ(n)/n` converges
    /// exactly when `ε > 0`.
    KhinchinThreshold(f64),
    /// `ψ₀(q_ℓ) = q_ℓ/(ℓ log ℓ)` on primorials `q_ℓ`, zero elsewhere.
    DsBase,
    /// `ψ(q) = q²/(q_ℓ ℓ log ℓ)` for squarefree `q` with largest prime factor
    /// `ℓ`, zero elsewhere.
    DsSpread,
    /// Listed values, zero off the table.
    Table(BTreeMap<u64, f64>),
    Constant(f64),
}

fn theta_table() -> &'static (Vec<u64>, Vec<f64>) {
    static T: OnceLock<(Vec<u64>, Vec<f64>)> = OnceLock::new();
    T.get_or_init(|| {
        let primes = small_primes(THETA_LIMIT);
        let mut acc = 0.0f64;
        let theta = primes
            .iter()
            .map(|&p| {
                acc += (p as f64).ln();
                acc
            })
            .collect();
        (primes, theta)
    })
}

/// `θ(ℓ) = Σ_{p≤ℓ} log p`, or `None` beyond the tabulated range.
pub fn chebyshev_theta(l: u64) -> Option<f64> {
    let (primes, theta) = theta_table();
    if l as usize > THETA_LIMIT {
        return None;
    }
    let i = primes.partition_point(|&p| p <= l);
    Some(if i == 0 { 0.0 } else { theta[i - 1] })
}

/// The primorial `q_ℓ = Π_{p≤ℓ} p`.
pub fn primorial(l: u64) -> BigInt {
    small_primes(l as usize)
        .into_iter()
        .fold(BigInt::one(), |acc, p| acc * BigInt::from(p))
}

/// `ℓ log ℓ` as the exact rational value of its float evaluation, shared by
/// both counterexample families so their window radii agree exactly.
pub fn ds_scale(l: u64) -> BigRational {
    let v = l as f64 * (l as f64).ln();
    BigRational::from_float(v).expect("finite")
}

/// Largest prime factor of a squarefree `n ≥ 2`, `None` otherwise.
fn squarefree_top(n: u64) -> Option<(u64, Vec<(u64, u32)>)> {
    if n < 2 {
        return None;
    }
    let f = factorize_full(n);
    if f.iter().any(|&(_, e)| e > 1) {
        return None;
    }
    Some((f.last().expect("n ≥ 2").0, f))
}

fn is_primorial(n: u64) -> Option<u64> {
    let (l, f) = squarefree_top(n)?;
    let (primes, _) = theta_table();
    let count = if l as usize <= THETA_LIMIT {
        primes.partition_point(|&p| p <= l)
    } else {
        small_primes(l as usize).len()
    };
    (count == f.len()).then_some(l)
}

fn exact_float(v: f64) -> BigRational {
    BigRational::from_float(v).unwrap_or_else(BigRational::zero)
}

impl PsiFunction {
    pub fn eval(&self, n: u64) -> f64 {
        if n == 0 {
            return 0.0;
        }
        match self {
            PsiFunction::Power(a) => (n as f64).powf(-a),
            PsiFunction::KhinchinThreshold(eps) => {
                if n < 2 {
                    0.0
                } else {
                    (n as f64).ln().powf(-(1.0 + eps))
                }
            }
            PsiFunction::DsBase => match is_primorial(n) {
                Some(l) => n as f64 / (l as f64 * (l as f64).ln()),
                None => 0.0,
            },
            PsiFunction::DsSpread => match squarefree_top(n) {
                Some((l, _)) => match chebyshev_theta(l) {
                    Some(theta) => {
                        (2.0 * (n as f64).ln() - theta - (l as f64 * (l as f64).ln()).ln()).exp()
                    }
                    None => 0.0,
                },
                None => 0.0,
            },
            PsiFunction::Table(t) => t.get(&n).copied().unwrap_or(0.0),
            PsiFunction::Constant(c) => *c,
        }
    }

    /// `ψ(n)` as an exact rational. Irrational values are taken as the exact
    /// value of their float evaluation.
    pub fn eval_exact(&self, n: u64) -> BigRational {
        if n == 0 {
            return BigRational::zero();
        }
        match self {
            PsiFunction::Power(a) if *a >= 0.0 && a.fract() == 0.0 && *a <= 64.0 => {
                BigRational::new(BigInt::one(), BigInt::from(n).pow(*a as u32))
            }
            PsiFunction::DsBase => match is_primorial(n) {
                Some(l) => BigRational::from_integer(BigInt::from(n)) / ds_scale(l),
                None => BigRational::zero(),
            },
            PsiFunction::DsSpread => match squarefree_top(n) {
                Some((l, _)) => {
                    let n2 = BigInt::from(n) * BigInt::from(n);
                    BigRational::from_integer(n2)
                        / (BigRational::from_integer(primorial(l)) * ds_scale(l))
                }
                None => BigRational::zero(),
            },
            _ => exact_float(self.eval(n)),
        }
    }

    /// Parse a table from `n,psi` lines; a header line is skipped.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut t = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split(',');
            let (a, b) = (it.next().unwrap_or(""), it.next().unwrap_or(""));
            match (a.trim().parse::<u64>(), b.trim().parse::<f64>()) {
                (Ok(n), Ok(v)) if v >= 0.0 && v.is_finite() => {
                    t.insert(n, v);
                }
                _ if i == 0 => continue,
                _ => {
                    return Err(Error::InvalidInput(format!(
                        "bad table line {}: {line}",
                        i + 1
                    )))
                }
            }
        }
        Ok(PsiFunction::Table(t))
    }
}

impl FromStr for PsiFunction {
    type Err = Error;

    /// `power:a`, `khinchin:eps`, `ds_base`, `ds_spread`, `constant:c`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        let num = |a: Option<&str>| -> Result<f64> {
            let a = a.ok_or_else(|| {
                Error::InvalidInput(format!("psi family {name} needs a parameter"))
            })?;
            if let Some((p, q)) = a.split_once('/') {
                let p: f64 = p
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("bad number {a}")))?;
                let q: f64 = q
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("bad number {a}")))?;
                return Ok(p / q);
            }
            a.parse()
                .map_err(|_| Error::InvalidInput(format!("bad number {a}")))
        };
        let f = match name {
            "power" => PsiFunction::Power(num(arg)?),
            "khinchin" | "khinchin_threshold" => PsiFunction::KhinchinThreshold(num(arg)?),
            "ds_base" => PsiFunction::DsBase,
            "ds_spread" => PsiFunction::DsSpread,
            "constant" => PsiFunction::Constant(num(arg)?),
            _ => return Err(Error::InvalidInput(format!("unknown psi family {s}"))),
        };
        match &f {
            PsiFunction::Power(a) if !(*a > 0.0) => Err(Error::InvalidInput(
                "power exponent must be positive".into(),
            )),
            PsiFunction::Constant(c) if !(*c >= 0.0) => {
                Err(Error::InvalidInput("constant must be nonnegative".into()))
            }
            _ => Ok(f),
        }
    }
}

impl fmt::Display for PsiFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PsiFunction::Power(a) => write!(f, "power:{a}"),
            PsiFunction::KhinchinThreshold(e) => write!(f, "khinchin:{e}"),
            PsiFunction::DsBase => write!(f, "ds_base"),
            PsiFunction::DsSpread => write!(f, "ds_spread"),
            PsiFunction::Table(t) => write!(f, "table[{}]", t.len()),
            PsiFunction::Constant(c) => write!(f, "constant:{c}"),
        }
    }
}
