use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::Vector;
use crate::scalar::Scalar;

/// Dense bounded linear map ℝⁿ → ℝᵐ, stored row-major.
///
/// The adjoint is the transpose.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearOp<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

/// Result of a spectral-norm estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormEstimate<T> {
    pub value: T,
    pub iterations: usize,
    /// Set when the operator is identically zero.
    pub zero: bool,
}

impl<T: Scalar> LinearOp<T> {
    /// Builds a matrix from its rows. Rows must be nonempty, of equal length,
    /// and finite.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if m == 0 || n == 0 {
            return Err(Error::InvalidParameter {
                name: "matrix",
                reason: "matrix must have at least one row and one column".into(),
            });
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                context: "matrix row length",
                left: n,
                right: bad.len(),
            });
        }
        let data: Vec<T> = rows.into_iter().flatten().collect();
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            rows: m,
            cols: n,
            data,
        })
    }

    pub fn from_f64_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| T::lit(v)).collect())
                .collect(),
        )
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![T::one(); n.max(1)])
    }

    pub fn diagonal(diag: &[T]) -> Self {
        let n = diag.len().max(1);
        let mut data = vec![T::zero(); n * n];
        for (i, &d) in diag.iter().enumerate() {
            data[i * n + i] = d;
        }
        Self {
            rows: n,
            cols: n,
            data,
        }
    }

    /// The 1×1 map x ↦ c·x.
    pub fn scalar(c: T) -> Self {
        Self {
            rows: 1,
            cols: 1,
            data: vec![c],
        }
    }

    /// Output dimension (number of rows).
    pub fn dim_out(&self) -> usize {
        self.rows
    }

    /// Input dimension (number of columns).
    pub fn dim_in(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entry(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.entry(i, j));
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    /// A·x.
    pub fn apply(&self, x: &Vector<T>) -> Result<Vector<T>> {
        if x.dim() != self.cols {
            return Err(Error::DimensionMismatch {
                context: "linear operator input",
                left: self.cols,
                right: x.dim(),
            });
        }
        let out = (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x.coords())
                    .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect();
        Ok(Vector::from_raw(out))
    }

    /// A*·y, i.e. Aᵀ·y.
    pub fn apply_adjoint(&self, y: &Vector<T>) -> Result<Vector<T>> {
        if y.dim() != self.rows {
            return Err(Error::DimensionMismatch {
                context: "adjoint input",
                left: self.rows,
                right: y.dim(),
            });
        }
        let mut out = vec![T::zero(); self.cols];
        for (i, &yi) in y.coords().iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a * yi;
            }
        }
        Ok(Vector::from_raw(out))
    }

    /// ⟨Mx, x⟩ for square M.
    pub fn quadratic_form(&self, x: &Vector<T>) -> Result<T> {
        self.apply(x)?.inner(x)
    }

    /// Solves (I + λ·self)·z = b by Gaussian elimination with partial pivoting.
    pub(crate) fn solve_shifted(&self, lambda: T, b: &Vector<T>) -> Result<Vector<T>> {
        let n = self.rows;
        if !self.is_square() {
            return Err(Error::DimensionMismatch {
                context: "shifted solve requires a square matrix",
                left: self.rows,
                right: self.cols,
            });
        }
        if b.dim() != n {
            return Err(Error::DimensionMismatch {
                context: "shifted solve right-hand side",
                left: n,
                right: b.dim(),
            });
        }
        let mut a: Vec<T> = self.data.iter().map(|&v| lambda * v).collect();
        for i in 0..n {
            a[i * n + i] += T::one();
        }
        let mut rhs = b.coords().to_vec();
        for k in 0..n {
            let pivot = (k..n)
                .max_by(|&p, &q| {
                    a[p * n + k]
                        .abs()
                        .partial_cmp(&a[q * n + k].abs())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap_or(k);
            if a[pivot * n + k].abs() <= T::min_positive_value() {
                return Err(Error::SingularSystem);
            }
            if pivot != k {
                for j in 0..n {
                    a.swap(k * n + j, pivot * n + j);
                }
                rhs.swap(k, pivot);
            }
            let p = a[k * n + k];
            for i in (k + 1)..n {
                let f = a[i * n + k] / p;
                if f.is_zero() {
                    continue;
                }
                for j in k..n {
                    let akj = a[k * n + j];
                    a[i * n + j] -= f * akj;
                }
                let rk = rhs[k];
                rhs[i] -= f * rk;
            }
        }
        let mut z = vec![T::zero(); n];
        for i in (0..n).rev() {
            let mut s = rhs[i];
            for j in (i + 1)..n {
                s -= a[i * n + j] * z[j];
            }
            z[i] = s / a[i * n + i];
        }
        Ok(Vector::from_raw(z))
    }

    /// Estimates the spectral norm ‖A‖ by power iteration on A*A.
    ///
    /// The start vector is the normalized all-ones vector; if it lies in the
    /// kernel of A, an alternating ramp and then the standard basis are tried.
    /// Convergence is declared when successive Rayleigh quotients of A*A agree
    /// to relative `tol`.
    pub fn operator_norm(&self, tol: T, max_iter: usize) -> Result<NormEstimate<T>> {
        if !(tol > T::zero()) {
            return Err(Error::InvalidParameter {
                name: "tol",
                reason: "tolerance must be positive".into(),
            });
        }
        if self.is_zero() {
            return Ok(NormEstimate {
                value: T::zero(),
                iterations: 0,
                zero: true,
            });
        }
        let n = self.cols;
        let gram = |v: &Vector<T>| -> Vector<T> {
            let av = self.apply(v).expect("dims fixed");
            self.apply_adjoint(&av).expect("dims fixed")
        };

        let ramp = Vector::from_raw(
            (0..n)
                .map(|i| {
                    let s = if i % 2 == 0 { T::one() } else { -T::one() };
                    s * T::lit((i + 1) as f64)
                })
                .collect(),
        );
        let basis = (0..n).map(|j| {
            let mut e = vec![T::zero(); n];
            e[j] = T::one();
            Vector::from_raw(e)
        });
        let mut v = std::iter::once(Vector::filled(n, T::one()))
            .chain(std::iter::once(ramp))
            .chain(basis)
            .map(|c| {
                let nc = c.norm();
                c.scale(T::one() / nc)
            })
            .find(|c| gram(c).norm() > T::zero())
            .expect("a nonzero operator moves some basis vector");

        let mut last = T::zero();
        for k in 1..=max_iter {
            let z = gram(&v);
            let rayleigh = v.inner(&z)?;
            let nz = z.norm();
            if k > 1 && (rayleigh - last).abs() <= tol * rayleigh.abs() {
                return Ok(NormEstimate {
                    value: rayleigh.max(T::zero()).sqrt(),
                    iterations: k,
                    zero: false,
                });
            }
            last = rayleigh;
            v = z.scale(T::one() / nz);
        }
        Err(Error::NormNotConverged {
            iterations: max_iter,
            last_estimate: last.max(T::zero()).sqrt().to_f64_lossy(),
        })
    }
}
