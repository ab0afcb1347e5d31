//! Finite unions of closed subintervals of `[0, 1]` with exact rational
//! endpoints.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::ser::{Serialize, SerializeStruct, Serializer};
use std::cmp::Ordering;

/// A rational serialized as `{"num": "…", "den": "…"}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ExactRational(pub BigRational);

impl Serialize for ExactRational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Rational", 2)?;
        st.serialize_field("num", &self.0.numer().to_string())?;
        st.serialize_field("den", &self.0.denom().to_string())?;
        st.end()
    }
}

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// Sorted, pairwise disjoint closed intervals inside `[0, 1]`; touching
/// intervals are merged.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IntervalUnion {
    parts: Vec<(BigRational, BigRational)>,
}

impl IntervalUnion {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Normalize arbitrary intervals: clip to `[0, 1]`, drop empty ones,
    /// sort and merge overlapping or touching pieces.
    pub fn from_intervals(items: impl IntoIterator<Item = (BigRational, BigRational)>) -> Self {
        let zero = BigRational::zero();
        let one = BigRational::one();
        let mut v: Vec<(BigRational, BigRational)> = items
            .into_iter()
            .filter_map(|(a, b)| {
                let a = if a < zero { zero.clone() } else { a };
                let b = if b > one { one.clone() } else { b };
                (a <= b).then_some((a, b))
            })
            .collect();
        v.sort_by(|x, y| x.0.cmp(&y.0));
        Self::from_sorted(v)
    }

    /// Merge intervals already sorted by left endpoint and inside `[0, 1]`.
    fn from_sorted(v: Vec<(BigRational, BigRational)>) -> Self {
        let mut parts: Vec<(BigRational, BigRational)> = Vec::with_capacity(v.len());
        for (a, b) in v {
            match parts.last_mut() {
                Some(last) if a <= last.1 => {
                    if b > last.1 {
                        last.1 = b;
                    }
                }
                _ => parts.push((a, b)),
            }
        }
        Self { parts }
    }

    pub fn parts(&self) -> &[(BigRational, BigRational)] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn measure(&self) -> BigRational {
        self.parts
            .iter()
            .fold(BigRational::zero(), |acc, (a, b)| acc + (b - a))
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        let i = self.parts.partition_point(|(_, b)| b < x);
        i < self.parts.len() && &self.parts[i].0 <= x
    }

    /// Whether a float lies in the union, comparing against rounded
    /// endpoints.
    pub fn contains_f64(&self, x: f64) -> bool {
        let i = self.parts.partition_point(|(_, b)| to_f64(b) < x);
        i < self.parts.len() && to_f64(&self.parts[i].0) <= x
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut v: Vec<(BigRational, BigRational)> = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.parts.len() || j < other.parts.len() {
            let take_left = j >= other.parts.len()
                || (i < self.parts.len()
                    && self.parts[i].0.cmp(&other.parts[j].0) != Ordering::Greater);
            if take_left {
                v.push(self.parts[i].clone());
                i += 1;
            } else {
                v.push(other.parts[j].clone());
                j += 1;
            }
        }
        Self::from_sorted(v)
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.parts.len() && j < other.parts.len() {
            let (a1, b1) = &self.parts[i];
            let (a2, b2) = &other.parts[j];
            let lo = if a1 > a2 { a1 } else { a2 };
            let hi = if b1 < b2 { b1 } else { b2 };
            if lo <= hi {
                out.push((lo.clone(), hi.clone()));
            }
            if b1 < b2 {
                i += 1;
            } else {
                j += 1;
            }
        }
        // pieces may touch at single points; merge them
        Self::from_sorted(out)
    }

    /// `μ(self ∩ other)` without materializing the intersection.
    pub fn intersection_measure(&self, other: &Self) -> BigRational {
        let mut acc = BigRational::zero();
        let (mut i, mut j) = (0, 0);
        while i < self.parts.len() && j < other.parts.len() {
            let (a1, b1) = &self.parts[i];
            let (a2, b2) = &other.parts[j];
            let lo = if a1 > a2 { a1 } else { a2 };
            let hi = if b1 < b2 { b1 } else { b2 };
            if lo < hi {
                acc += hi - lo;
            }
            if b1 < b2 {
                i += 1;
            } else {
                j += 1;
            }
        }
        acc
    }
}
