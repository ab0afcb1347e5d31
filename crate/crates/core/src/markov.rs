//! Transition matrices `M^(ℓ,σ)` indexed by digit blocks and certified bounds
//! on their Perron roots.
//!
//! Entry `(I, J)` with `I = (t_1,…,t_ℓ)`, `J = (t_2,…,t_{ℓ+1})` is
//! `G(t_1,…,t_{ℓ+1})^σ`, where `G` is the maximum of `F_D/|D|` over
//! `[θ, θ + q^−(ℓ+1)]` and `θ = Σ t_i q^−i`.

use crate::digits::DigitSystem;
use crate::error::{Error, Result};
use crate::fourier::bounds::sin_bound_sum;
use crate::fourier::maxima::{certified_max, MaxSettings};
use crate::fourier::DigitWindow;
use crate::numeric::UpwardSum;
use rayon::prelude::*;
use serde::Serialize;

/// Largest number of stored entries `q^(ℓ+1)` that `build_matrix` accepts.
pub const MATRIX_CAP: u128 = 10_000_000;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 100_000;
const GRID: usize = 64;
const ROWS_PER_TASK: usize = 1 << 10;

/// A square nonnegative matrix that can multiply vectors from both sides.
pub trait NonnegMatrix: Sync {
    fn dim(&self) -> usize;
    /// `y = M x`.
    fn matvec(&self, x: &[f64], y: &mut [f64]);
    /// Row `i` of `M x` for nonnegative `x`, rounded upward.
    fn row_dot_upper(&self, i: usize, x: &[f64]) -> f64;
    /// Upward-rounded sum of row `i`.
    fn row_sum(&self, i: usize) -> f64;
    /// Upward-rounded column sums.
    fn column_sums(&self) -> Vec<f64>;
}

/// Upper bound for the exact value of a float sum of `n` nonnegative
/// products: each product and each addition contributes relative error `ε`.
fn nonneg_upper(s: f64, n: usize) -> f64 {
    s * (1.0 + 2.0 * (n as f64 + 1.0) * f64::EPSILON)
}

/// Dense test fixture.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("matrix must be square".into()));
        }
        if rows.iter().flatten().any(|&v| !(v >= 0.0)) {
            return Err(Error::InvalidInput(
                "matrix entries must be nonnegative".into(),
            ));
        }
        Ok(Self {
            n,
            data: rows.concat(),
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self { n, data }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }
}

impl NonnegMatrix for DenseMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.data[i * self.n..(i + 1) * self.n]
                .iter()
                .zip(x)
                .map(|(a, b)| a * b)
                .sum();
        }
    }

    fn row_dot_upper(&self, i: usize, x: &[f64]) -> f64 {
        let s: f64 = self.data[i * self.n..(i + 1) * self.n]
            .iter()
            .zip(x)
            .map(|(a, b)| a * b)
            .sum();
        nonneg_upper(s, self.n)
    }

    fn row_sum(&self, i: usize) -> f64 {
        let mut acc = UpwardSum::new();
        for &a in &self.data[i * self.n..(i + 1) * self.n] {
            acc.add(a);
        }
        acc.value()
    }

    fn column_sums(&self) -> Vec<f64> {
        (0..self.n)
            .map(|j| {
                let mut acc = UpwardSum::new();
                for i in 0..self.n {
                    acc.add(self.get(i, j));
                }
                acc.value()
            })
            .collect()
    }
}

/// `M^(ℓ,σ)` for a digit system, stored as its `q^(ℓ+1)` entries in
/// block order: entry `e` sits at row `e / q`, column `e mod q^ℓ`.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    pub q: u32,
    pub ell: u32,
    pub sigma: f64,
    dim: usize,
    entries: Vec<f64>,
}

impl TransitionMatrix {
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Entry for the block `(t_1,…,t_{ℓ+1})` given as its base-`q` index.
    pub fn entry(&self, block: usize) -> f64 {
        self.entries[block]
    }

    /// Stored `(row, column, value)` triples of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let q = self.q as usize;
        (0..q).map(move |u| {
            let e = i * q + u;
            (e % self.dim, self.entries[e])
        })
    }

    pub fn nnz(&self) -> usize {
        self.entries.iter().filter(|&&v| v != 0.0).count()
    }
}

impl NonnegMatrix for TransitionMatrix {
    fn dim(&self) -> usize {
        self.dim
    }

    fn matvec(&self, x: &[f64], y: &mut [f64]) {
        let q = self.q as usize;
        let dim = self.dim;
        y.par_chunks_mut(ROWS_PER_TASK)
            .enumerate()
            .for_each(|(c, chunk)| {
                for (off, yi) in chunk.iter_mut().enumerate() {
                    let i = c * ROWS_PER_TASK + off;
                    let base = i * q;
                    let mut s = 0.0;
                    for u in 0..q {
                        s += self.entries[base + u] * x[(base + u) % dim];
                    }
                    *yi = s;
                }
            });
    }

    fn row_dot_upper(&self, i: usize, x: &[f64]) -> f64 {
        let s: f64 = self.row(i).map(|(j, v)| v * x[j]).sum();
        nonneg_upper(s, self.q as usize)
    }

    fn row_sum(&self, i: usize) -> f64 {
        let mut acc = UpwardSum::new();
        for (_, v) in self.row(i) {
            acc.add(v);
        }
        acc.value()
    }

    fn column_sums(&self) -> Vec<f64> {
        let q = self.q as usize;
        (0..self.dim)
            .into_par_iter()
            .with_min_len(ROWS_PER_TASK)
            .map(|j| {
                let mut acc = UpwardSum::new();
                for t in 0..q {
                    acc.add(self.entries[t * self.dim + j]);
                }
                acc.value()
            })
            .collect()
    }
}

/// Build `M^(ℓ,σ)`. Each entry is a certified upper bound for `G`, raised to
/// `σ`. For `ℓ = 1` the row `t_1 = 0` is set to 1.
pub fn build_matrix(sys: &DigitSystem, ell: u32, sigma: f64) -> Result<TransitionMatrix> {
    if ell == 0 {
        return Err(Error::InvalidInput(
            "block length must be at least 1".into(),
        ));
    }
    if !(sigma > 0.0) {
        return Err(Error::InvalidInput(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    let q = sys.q() as u128;
    let total = q
        .checked_pow(ell + 1)
        .filter(|&n| n <= MATRIX_CAP)
        .ok_or_else(|| {
            Error::cap(
                "matrix entries q^(l+1)",
                q.saturating_pow(ell + 1),
                MATRIX_CAP,
            )
        })?;
    let total = total as usize;
    let dim = total / q as usize;
    let window = DigitWindow::new(sys);
    let size = sys.len() as f64;
    let width = 1.0 / total as f64;
    let curvature = window.curvature();
    let settings = MaxSettings {
        grid: GRID,
        rel_tol: 1e-9,
        max_evals: 4 * GRID,
    };
    let mut entries = vec![0.0f64; total];
    entries
        .par_chunks_mut(ROWS_PER_TASK)
        .enumerate()
        .for_each(|(c, chunk)| {
            for (off, v) in chunk.iter_mut().enumerate() {
                let e = c * ROWS_PER_TASK + off;
                let g = if ell == 1 && e < q as usize {
                    1.0
                } else {
                    let lo = e as f64 * width;
                    let m =
                        certified_max(|x| window.norm_sqr(x), lo, lo + width, curvature, settings);
                    m.upper / size
                };
                *v = if sigma == 1.0 { g } else { g.powf(sigma) };
            }
        });
    Ok(TransitionMatrix {
        q: sys.q(),
        ell,
        sigma,
        dim,
        entries,
    })
}

/// Largest upward-rounded row sum.
pub fn row_sum_bound<M: NonnegMatrix + ?Sized>(m: &M) -> f64 {
    (0..m.dim())
        .into_par_iter()
        .with_min_len(ROWS_PER_TASK)
        .map(|i| m.row_sum(i))
        .reduce(|| 0.0, f64::max)
}

/// Largest upward-rounded column sum.
pub fn column_sum_bound<M: NonnegMatrix + ?Sized>(m: &M) -> f64 {
    m.column_sums().into_iter().fold(0.0, f64::max)
}

/// `max_i (Mx)_i / x_i` for a positive vector `x`: an upper bound for the
/// Perron root of any nonnegative `M`. Infinite if some `x_i` is zero.
pub fn collatz_wielandt_bound<M: NonnegMatrix + ?Sized>(m: &M, x: &[f64]) -> f64 {
    (0..m.dim())
        .into_par_iter()
        .with_min_len(ROWS_PER_TASK)
        .map(|i| {
            if !(x[i] > 0.0) {
                return f64::INFINITY;
            }
            let r = m.row_dot_upper(i, x) / x[i];
            r * (1.0 + 4.0 * f64::EPSILON)
        })
        .reduce(|| 0.0, f64::max)
}

/// Power iteration from the all-ones vector, normalized in the max norm.
///
/// Stops once the Collatz–Wielandt bracket `min_i (Mx)_i/x_i ≤ ρ ≤
/// max_i (Mx)_i/x_i` is narrower than `tol`. Returns the estimate `‖Mx‖∞`,
/// the final vector and the step count.
pub fn power_iteration<M: NonnegMatrix + ?Sized>(
    m: &M,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, Vec<f64>, usize)> {
    let n = m.dim();
    let mut x = vec![1.0f64; n];
    let mut y = vec![0.0f64; n];
    let mut est = f64::NAN;
    for it in 1..=max_iter.max(1) {
        m.matvec(&x, &mut y);
        let (lo, hi) = x
            .iter()
            .zip(&y)
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), (&xi, &yi)| {
                if xi > 0.0 {
                    (lo.min(yi / xi), hi.max(yi / xi))
                } else if yi > 0.0 {
                    (lo, f64::INFINITY)
                } else {
                    (lo, hi)
                }
            });
        est = y.iter().copied().fold(0.0, f64::max);
        if est == 0.0 {
            return Ok((0.0, x, it));
        }
        if hi - lo < tol {
            return Ok((est, x, it));
        }
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / est;
        }
    }
    Err(Error::NotConverged {
        estimate: est,
        iterations: max_iter,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EigenCertificate {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell: Option<u32>,
    pub sigma: f64,
    /// Certified upper bound for the Perron root: the least of the largest
    /// row sum, the largest column sum and the Collatz–Wielandt bound.
    pub row_sum_bound: f64,
    pub max_row_sum: f64,
    pub max_column_sum: f64,
    pub collatz_wielandt: f64,
    pub power_estimate: f64,
    pub iterations: usize,
    pub converged: bool,
    pub threshold: f64,
    pub certified: bool,
    /// Set when the bound comes from the closed-form column majorant rather
    /// than a built matrix.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub analytic: bool,
}

/// Power iteration plus the three certified bounds.
pub fn power_eigenvalue<M: NonnegMatrix + ?Sized>(
    m: &M,
    tol: f64,
    max_iter: usize,
    threshold: f64,
) -> EigenCertificate {
    let (estimate, x, iterations, converged) = match power_iteration(m, tol, max_iter) {
        Ok((est, x, it)) => (est, x, it, true),
        Err(Error::NotConverged {
            estimate,
            iterations,
        }) => {
            // any positive vector still gives a valid bound; use the ones vector
            (estimate, vec![1.0; m.dim()], iterations, false)
        }
        Err(e) => unreachable!("power iteration only fails to converge: {e}"),
    };
    let max_row_sum = row_sum_bound(m);
    let max_column_sum = column_sum_bound(m);
    let cw = collatz_wielandt_bound(m, &x);
    let bound = max_row_sum.min(max_column_sum).min(cw);
    EigenCertificate {
        q: None,
        ell: None,
        sigma: 1.0,
        row_sum_bound: bound,
        max_row_sum,
        max_column_sum,
        collatz_wielandt: cw,
        power_estimate: estimate,
        iterations,
        converged,
        threshold,
        certified: bound < threshold,
        analytic: false,
    }
}

/// Certificate for a built transition matrix.
pub fn certify_matrix(m: &TransitionMatrix, threshold: f64) -> EigenCertificate {
    let mut c = power_eigenvalue(m, DEFAULT_TOL, DEFAULT_MAX_ITER, threshold);
    c.q = Some(m.q);
    c.ell = Some(m.ell);
    c.sigma = m.sigma;
    c
}

/// Default certification threshold `q^(1/5)`.
pub fn default_threshold(q: u32) -> f64 {
    (q as f64).powf(0.2)
}

/// Try `ℓ = 1..=ell_max` and return the first certificate below `q^(1/5)`,
/// or the one with the smallest bound.
pub fn certify_base(sys: &DigitSystem, ell_max: u32) -> Result<EigenCertificate> {
    certify_base_with(sys, ell_max, 1.0, default_threshold(sys.q()))
}

pub fn certify_base_with(
    sys: &DigitSystem,
    ell_max: u32,
    sigma: f64,
    threshold: f64,
) -> Result<EigenCertificate> {
    let mut best: Option<EigenCertificate> = None;
    for ell in 1..=ell_max.max(1) {
        let cert = match build_matrix(sys, ell, sigma) {
            Ok(m) => certify_matrix(&m, threshold),
            Err(Error::CapExceeded { .. })
                if ell == 1 && sigma == 1.0 && sys.missing_digit().is_some() =>
            {
                analytic_certificate(sys, threshold)
            }
            Err(Error::CapExceeded {
                what,
                requested,
                cap,
            }) => match best {
                Some(b) => return Ok(b),
                None => {
                    return Err(Error::CapExceeded {
                        what,
                        requested,
                        cap,
                    })
                }
            },
            Err(e) => return Err(e),
        };
        if cert.certified {
            return Ok(cert);
        }
        if best
            .as_ref()
            .is_none_or(|b| cert.row_sum_bound < b.row_sum_bound)
        {
            best = Some(cert);
        }
    }
    Ok(best.expect("at least one block length is tried"))
}

/// For one missing digit and `ℓ = 1`, every column of `M^(1)` sums to at most
/// `Σ_t min{q−1, 1 + 1/sin(π‖t/q‖)} / (q−1)`, the sine-bound sum over `q−1`.
fn analytic_certificate(sys: &DigitSystem, threshold: f64) -> EigenCertificate {
    let q = sys.q();
    let col = sin_bound_sum(q).value / (q as f64 - 1.0) * (1.0 + 4.0 * f64::EPSILON);
    EigenCertificate {
        q: Some(q),
        ell: Some(1),
        sigma: 1.0,
        row_sum_bound: col,
        max_row_sum: q as f64,
        max_column_sum: col,
        collatz_wielandt: f64::INFINITY,
        power_estimate: f64::NAN,
        iterations: 0,
        converged: false,
        threshold,
        certified: col < threshold,
        analytic: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures() {
        let m = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        assert!((row_sum_bound(&m) - 3.0).abs() < 1e-9);
        let c = power_eigenvalue(&m, 1e-12, 1000, 4.0);
        assert!((c.power_estimate - 3.0).abs() < 1e-10);
        assert!(c.certified);
        let id = DenseMatrix::identity(5);
        let (est, _, it) = power_iteration(&id, 1e-10, 10).unwrap();
        assert_eq!(est, 1.0);
        assert!(it <= 2);
    }

    #[test]
    fn not_converged_is_non_fatal() {
        let m = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![4.0, 0.0]]).unwrap();
        let c = power_eigenvalue(&m, 1e-12, 50, 10.0);
        assert!(!c.converged);
        assert!(c.row_sum_bound >= 2.0);
    }

    #[test]
    fn shape_and_leading_row() {
        let sys = DigitSystem::excluding(10, &[7]).unwrap();
        let m = build_matrix(&sys, 1, 1.0).unwrap();
        assert_eq!(m.entries().len(), 100);
        assert_eq!(m.dim(), 10);
        for u in 0..10 {
            assert_eq!(m.entry(u), 1.0);
        }
        assert!(m.entries().iter().all(|&v| v <= 1.0 + 1e-9));
        let cols: Vec<usize> = m.row(3).map(|(j, _)| j).collect();
        assert_eq!(cols, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn analytic_route_is_consistent() {
        let sys = DigitSystem::excluding(600, &[0]).unwrap();
        let c = analytic_certificate(&sys, 1e9);
        let m = build_matrix(&sys, 1, 1.0).unwrap();
        assert!(column_sum_bound(&m) <= c.max_column_sum + 1e-9);
    }

    #[test]
    fn cap() {
        let sys = DigitSystem::excluding(10, &[7]).unwrap();
        assert!(matches!(
            build_matrix(&sys, 7, 1.0),
            Err(Error::CapExceeded { .. })
        ));
    }
}
