//! Digit-restricted sets: integers whose base-`q` expansion uses only digits
//! from a fixed set `D`.

use crate::arith::{euler_phi, gcd, is_prime_u64};
use crate::error::{Error, Result};
use serde::ser::{Serialize, SerializeStruct, Serializer};
use std::fmt;
use std::str::FromStr;

/// Default cap on the number of members `enumerate_restricted` will produce.
pub const ENUMERATION_CAP: u64 = 100_000_000;

/// A base `q ≥ 2` together with a nonempty allowed digit set `D ⊆ {0,…,q−1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitSystem {
    q: u32,
    digits: Vec<u32>,
    // bitmask membership for q ≤ 64, table otherwise
    mask: u64,
    table: Vec<bool>,
}

impl DigitSystem {
    pub fn new(q: u32, digits: impl IntoIterator<Item = u32>) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidInput(format!(
                "base must be at least 2, got {q}"
            )));
        }
        let mut digits: Vec<u32> = digits.into_iter().collect();
        digits.sort_unstable();
        digits.dedup();
        if digits.is_empty() {
            return Err(Error::InvalidInput("digit set is empty".into()));
        }
        if let Some(&d) = digits.iter().find(|&&d| d >= q) {
            return Err(Error::InvalidInput(format!(
                "digit {d} is not below the base {q}"
            )));
        }
        let (mask, table) = if q <= 64 {
            (
                digits.iter().fold(0u64, |m, &d| m | (1u64 << d)),
                Vec::new(),
            )
        } else {
            let mut t = vec![false; q as usize];
            for &d in &digits {
                t[d as usize] = true;
            }
            (0, t)
        };
        Ok(Self {
            q,
            digits,
            mask,
            table,
        })
    }

    pub fn full(q: u32) -> Result<Self> {
        Self::new(q, 0..q)
    }

    /// All digits except those in `removed`.
    pub fn excluding(q: u32, removed: &[u32]) -> Result<Self> {
        if let Some(&d) = removed.iter().find(|&&d| d >= q) {
            return Err(Error::InvalidInput(format!(
                "digit {d} is not below the base {q}"
            )));
        }
        Self::new(q, (0..q).filter(|d| !removed.contains(d)))
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.q
    }

    #[inline]
    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    #[inline]
    pub fn contains(&self, d: u32) -> bool {
        if self.q <= 64 {
            d < self.q && self.mask >> d & 1 == 1
        } else {
            (d as usize) < self.table.len() && self.table[d as usize]
        }
    }

    pub fn is_full(&self) -> bool {
        self.digits.len() == self.q as usize
    }

    /// The single excluded digit, when `|D| = q − 1`.
    pub fn missing_digit(&self) -> Option<u32> {
        if self.digits.len() + 1 != self.q as usize {
            return None;
        }
        (0..self.q).find(|&d| !self.contains(d))
    }

    /// `D_q`: the allowed digits coprime to `q`.
    pub fn coprime_digits(&self) -> Vec<u32> {
        self.digits
            .iter()
            .copied()
            .filter(|&d| gcd(d, self.q) == 1)
            .collect()
    }

    /// Density exponent `α = log|D| / log q`.
    pub fn alpha(&self) -> f64 {
        (self.len() as f64).ln() / (self.q as f64).ln()
    }

    /// `δ` with `|D| = q^(1−2δ)`.
    pub fn delta(&self) -> f64 {
        (1.0 - self.alpha()) / 2.0
    }

    /// `(|D_q|/|D|) / (φ(q)/q)`; zero when no allowed digit is coprime to `q`.
    pub fn prediction_constant(&self) -> f64 {
        let dq = self.coprime_digits().len();
        if dq == 0 {
            return 0.0;
        }
        // one rounding: exact whenever the ratio is representable
        let num = dq as u64 * self.q as u64;
        let den = self.len() as u64 * euler_phi(self.q as u64);
        num as f64 / den as f64
    }

    /// Whether every base-`q` digit of `n` lies in `D` (`0` has the empty
    /// expansion and is a member iff `0 ∈ D`).
    pub fn is_member(&self, mut n: u128) -> bool {
        if n == 0 {
            return self.contains(0);
        }
        let q = self.q as u128;
        while n > 0 {
            if !self.contains((n % q) as u32) {
                return false;
            }
            n /= q;
        }
        true
    }

    /// Sum of the allowed digits.
    pub fn digit_sum(&self) -> u64 {
        self.digits.iter().map(|&d| d as u64).sum()
    }
}

impl fmt::Display for DigitSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q={},D=", self.q)?;
        // compress runs into a-b ranges joined by dots
        let mut first = true;
        let mut i = 0;
        while i < self.digits.len() {
            let start = self.digits[i];
            let mut end = start;
            while i + 1 < self.digits.len() && self.digits[i + 1] == end + 1 {
                i += 1;
                end += 1;
            }
            if !first {
                f.write_str(".")?;
            }
            first = false;
            if start == end {
                write!(f, "{start}")?;
            } else {
                write!(f, "{start}-{end}")?;
            }
            i += 1;
        }
        Ok(())
    }
}

fn parse_digit_list(s: &str) -> Result<Vec<u32>> {
    let mut out = Vec::new();
    for part in s.split('.').filter(|p| !p.is_empty()) {
        let bad = || Error::InvalidInput(format!("malformed digit list element '{part}'"));
        if let Some((a, b)) = part.split_once('-') {
            let a: u32 = a.trim().parse().map_err(|_| bad())?;
            let b: u32 = b.trim().parse().map_err(|_| bad())?;
            if a > b {
                return Err(bad());
            }
            out.extend(a..=b);
        } else {
            out.push(part.trim().parse().map_err(|_| bad())?);
        }
    }
    Ok(out)
}

impl FromStr for DigitSystem {
    type Err = Error;

    /// Parses `q=10,D=0-6.8-9` or `q=10,exclude=7` (exclusions dot-separated).
    fn from_str(s: &str) -> Result<Self> {
        let mut q = None;
        let mut allowed = None;
        let mut excluded = None;
        for field in s.split(',').map(str::trim).filter(|f| !f.is_empty()) {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("expected key=value, got '{field}'")))?;
            match key.trim() {
                "q" => {
                    q =
                        Some(value.trim().parse::<u32>().map_err(|_| {
                            Error::InvalidInput(format!("malformed base '{value}'"))
                        })?)
                }
                "D" => allowed = Some(parse_digit_list(value)?),
                "exclude" => excluded = Some(parse_digit_list(value)?),
                other => return Err(Error::InvalidInput(format!("unknown key '{other}'"))),
            }
        }
        let q = q.ok_or_else(|| Error::InvalidInput("missing q=".into()))?;
        match (allowed, excluded) {
            (Some(d), None) => DigitSystem::new(q, d),
            (None, Some(r)) => DigitSystem::excluding(q, &r),
            (None, None) => DigitSystem::full(q),
            (Some(_), Some(_)) => Err(Error::InvalidInput(
                "give either D= or exclude=, not both".into(),
            )),
        }
    }
}

impl Serialize for DigitSystem {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("DigitSystem", 4)?;
        st.serialize_field("q", &self.q)?;
        st.serialize_field("D", &self.digits)?;
        st.serialize_field("Dq", &self.coprime_digits())?;
        st.serialize_field("alpha", &self.alpha())?;
        st.end()
    }
}

fn base_digits(mut x: u128, q: u128) -> Vec<u32> {
    let mut out = Vec::new();
    while x > 0 {
        out.push((x % q) as u32);
        x /= q;
    }
    out.reverse();
    out
}

/// `#{0 ≤ n ≤ x : every base-q digit of n lies in D}`.
pub fn count_restricted(sys: &DigitSystem, x: u128) -> u128 {
    let q = sys.q() as u128;
    let size = sys.len() as u128;
    let nonzero = sys.digits().iter().filter(|&&d| d != 0).count() as u128;
    let mut count: u128 = u128::from(sys.contains(0));
    if x == 0 {
        return count;
    }
    let xd = base_digits(x, q);
    let len = xd.len();
    // strictly shorter expansions
    let mut pow = 1u128;
    for _ in 1..len {
        count = count.saturating_add(nonzero.saturating_mul(pow));
        pow = pow.saturating_mul(size);
    }
    // same length, lexicographically ≤ x
    let mut powers = vec![1u128; len];
    for i in (0..len.saturating_sub(1)).rev() {
        powers[i] = powers[i + 1].saturating_mul(size);
    }
    for (i, &xi) in xd.iter().enumerate() {
        let below = sys
            .digits()
            .iter()
            .filter(|&&d| d < xi && (i > 0 || d != 0))
            .count() as u128;
        count = count.saturating_add(below.saturating_mul(powers[i]));
        if !sys.contains(xi) {
            return count;
        }
    }
    count.saturating_add(1)
}

/// All members of `A(x)` in increasing order.
pub fn enumerate_restricted(sys: &DigitSystem, x: u64) -> Result<Vec<u64>> {
    enumerate_restricted_capped(sys, x, ENUMERATION_CAP)
}

pub fn enumerate_restricted_capped(sys: &DigitSystem, x: u64, cap: u64) -> Result<Vec<u64>> {
    let n = count_restricted(sys, x as u128);
    if n > cap as u128 {
        return Err(Error::cap("enumerate_restricted count", n, cap));
    }
    let q = sys.q() as u64;
    let mut out = Vec::with_capacity(n as usize);
    if sys.contains(0) {
        out.push(0);
    }
    let mut layer: Vec<u64> = sys
        .digits()
        .iter()
        .filter(|&&d| d != 0)
        .map(|&d| d as u64)
        .collect();
    while !layer.is_empty() {
        out.extend(layer.iter().copied().filter(|&v| v <= x));
        let mut next = Vec::with_capacity(layer.len() * sys.len());
        'grow: for &v in &layer {
            let Some(base) = v.checked_mul(q) else { break };
            if base > x {
                break;
            }
            for &d in sys.digits() {
                let w = base + d as u64;
                if w > x {
                    continue 'grow;
                }
                next.push(w);
            }
        }
        layer = next;
    }
    Ok(out)
}

/// Exact census of a digit-restricted set against the heuristic prediction.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CensusReport {
    pub x: u64,
    #[serde(rename = "countA")]
    pub count_a: u64,
    #[serde(rename = "countPrimesA")]
    pub count_primes_a: u64,
    pub predicted: f64,
    pub ratio: f64,
    pub constant: f64,
    pub note: String,
}

/// Counts `A(x)` and the primes in it, and compares with
/// `c · |A(x)| / log x` for the prediction constant `c`.
pub fn census(sys: &DigitSystem, x: u64) -> Result<CensusReport> {
    let members = enumerate_restricted(sys, x)?;
    let count_a = members.len() as u64;
    let count_primes_a = {
        use rayon::prelude::*;
        members.par_iter().filter(|&&n| is_prime_u64(n)).count() as u64
    };
    let constant = sys.prediction_constant();
    let predicted = if x >= 2 {
        constant * count_a as f64 / (x as f64).ln()
    } else {
        0.0
    };
    let ratio = if predicted > 0.0 {
        count_primes_a as f64 / predicted
    } else {
        0.0
    };
    let note = if sys.contains(0) {
        "A(x) counts 0 and all n <= x with every digit in D".to_string()
    } else {
        "0 not in D: A(x) is the exact sum over lengths of |D|^j, no leading-zero padding"
            .to_string()
    };
    Ok(CensusReport {
        x,
        count_a,
        count_primes_a,
        predicted,
        ratio,
        constant,
        note,
    })
}
