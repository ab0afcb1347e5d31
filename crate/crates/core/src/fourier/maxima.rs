//! Certified maxima of trigonometric polynomials over short intervals.
//!
//! For `P = |f|²` with `|P''| ≤ c` on `[a, b]`, linear interpolation gives
//! `P(x) ≤ max(P(a), P(b)) + c(b−a)²/8`. A uniform grid seeds the cells and a
//! best-first refinement splits the cell with the largest such bound until it
//! is within a relative tolerance of the best sampled value.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Result of a certified maximization of `|f|` over an interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifiedMax {
    /// Largest sampled `|f|`.
    pub sampled: f64,
    /// Rigorous upper bound for `max |f|` on the interval.
    pub upper: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct MaxSettings {
    pub grid: usize,
    pub rel_tol: f64,
    pub max_evals: usize,
}

impl Default for MaxSettings {
    fn default() -> Self {
        Self {
            grid: 256,
            rel_tol: 1e-3,
            max_evals: 200_000,
        }
    }
}

impl MaxSettings {
    pub fn with_grid(grid: usize) -> Self {
        Self {
            grid: grid.max(1),
            ..Self::default()
        }
    }
}

struct Cell {
    ub: f64,
    a: f64,
    b: f64,
    pa: f64,
    pb: f64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.ub.total_cmp(&other.ub) == Ordering::Equal
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ub.total_cmp(&other.ub)
    }
}

/// Upper bound for `max_{x∈[lo,hi]} sqrt(p(x))` where `p ≥ 0` and
/// `|p''| ≤ curvature` on the interval.
pub fn certified_max<P>(
    p: P,
    lo: f64,
    hi: f64,
    curvature: f64,
    settings: MaxSettings,
) -> CertifiedMax
where
    P: Fn(f64) -> f64,
{
    let g = settings.grid.max(1);
    let step = (hi - lo) / g as f64;
    let values: Vec<f64> = (0..=g)
        .map(|i| {
            if i == g {
                p(hi)
            } else {
                p(lo + step * i as f64)
            }
        })
        .collect();
    let mut evals = g + 1;
    let mut best = values.iter().copied().fold(0.0f64, f64::max);
    let bound = |a: f64, b: f64, pa: f64, pb: f64| pa.max(pb) + curvature * (b - a) * (b - a) / 8.0;
    let mut heap: BinaryHeap<Cell> = (0..g)
        .map(|i| {
            let a = lo + step * i as f64;
            let b = if i + 1 == g {
                hi
            } else {
                lo + step * (i + 1) as f64
            };
            Cell {
                ub: bound(a, b, values[i], values[i + 1]),
                a,
                b,
                pa: values[i],
                pb: values[i + 1],
            }
        })
        .collect();
    let target = |best: f64| {
        let t = best.sqrt() * (1.0 + settings.rel_tol) + 1e-12;
        t * t
    };
    while let Some(top) = heap.peek() {
        if top.ub <= target(best) || evals >= settings.max_evals {
            break;
        }
        let c = heap.pop().expect("peeked");
        let m = 0.5 * (c.a + c.b);
        let pm = p(m);
        evals += 1;
        best = best.max(pm);
        heap.push(Cell {
            ub: bound(c.a, m, c.pa, pm),
            a: c.a,
            b: m,
            pa: c.pa,
            pb: pm,
        });
        heap.push(Cell {
            ub: bound(m, c.b, pm, c.pb),
            a: m,
            b: c.b,
            pa: pm,
            pb: c.pb,
        });
    }
    let top = heap.peek().map_or(best, |c| c.ub).max(best);
    // slack for rounding in the evaluation of p
    let upper = top.sqrt() * (1.0 + 1e-12) + 1e-12;
    CertifiedMax {
        sampled: best.sqrt(),
        upper,
        evaluations: evals,
    }
}
