//! Small dense linear algebra for period matrices.
//!
//! Dimensions here are the genus (1 or 2, occasionally 3) or twice the genus,
//! so plain row-major storage with Gauss-Jordan elimination and cyclic Jacobi
//! rotations is all that is needed.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{bail, Result};

/// Square matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    n: usize,
    data: Vec<T>,
}

pub type CMatrix = Matrix<Complex64>;
pub type RMatrix = Matrix<f64>;
pub type IMatrix = Matrix<i64>;

impl<T: Copy> Matrix<T> {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Matrix { n, data }
    }

    /// Builds from row-major data; `data.len()` must be a perfect square.
    pub fn from_row_major(data: Vec<T>) -> Result<Self> {
        let n = isqrt(data.len());
        if n * n != data.len() {
            bail!(Domain, "{} entries do not form a square matrix", data.len());
        }
        Ok(Matrix { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    /// Extracts the `size × size` block starting at `(row, col)`.
    pub fn block(&self, row: usize, col: usize, size: usize) -> Self {
        Self::from_fn(size, |i, j| self[(row + i, col + j)])
    }

    pub fn map<U: Copy>(&self, f: impl Fn(T) -> U) -> Matrix<U> {
        Matrix { n: self.n, data: self.data.iter().map(|&x| f(x)).collect() }
    }
}

fn isqrt(len: usize) -> usize {
    let mut n = 0;
    while (n + 1) * (n + 1) <= len {
        n += 1;
    }
    n
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

macro_rules! ring_ops {
    ($t:ty, $zero:expr, $one:expr) => {
        impl Matrix<$t> {
            pub fn zeros(n: usize) -> Self {
                Matrix { n, data: vec![$zero; n * n] }
            }

            pub fn identity(n: usize) -> Self {
                Self::from_fn(n, |i, j| if i == j { $one } else { $zero })
            }

            pub fn matmul(&self, other: &Self) -> Self {
                assert_eq!(self.n, other.n, "dimension mismatch");
                Self::from_fn(self.n, |i, j| {
                    let mut acc = $zero;
                    for k in 0..self.n {
                        acc += self[(i, k)] * other[(k, j)];
                    }
                    acc
                })
            }

            pub fn add(&self, other: &Self) -> Self {
                assert_eq!(self.n, other.n, "dimension mismatch");
                Self::from_fn(self.n, |i, j| self[(i, j)] + other[(i, j)])
            }

            pub fn mul_vec(&self, v: &[$t]) -> Vec<$t> {
                assert_eq!(self.n, v.len(), "dimension mismatch");
                (0..self.n)
                    .map(|i| {
                        let mut acc = $zero;
                        for k in 0..self.n {
                            acc += self[(i, k)] * v[k];
                        }
                        acc
                    })
                    .collect()
            }

            pub fn diag(&self) -> Vec<$t> {
                (0..self.n).map(|i| self[(i, i)]).collect()
            }
        }
    };
}

ring_ops!(Complex64, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
ring_ops!(f64, 0.0, 1.0);
ring_ops!(i64, 0, 1);

impl IMatrix {
    /// Assembles a `2n × 2n` matrix from its four `n × n` blocks.
    pub fn from_blocks(a: &Self, b: &Self, c: &Self, d: &Self) -> Self {
        let n = a.n;
        Self::from_fn(2 * n, |i, j| match (i < n, j < n) {
            (true, true) => a[(i, j)],
            (true, false) => b[(i, j - n)],
            (false, true) => c[(i - n, j)],
            (false, false) => d[(i - n, j - n)],
        })
    }

    pub fn to_complex(&self) -> CMatrix {
        self.map(|x| Complex64::new(x as f64, 0.0))
    }
}

impl CMatrix {
    pub fn re(&self) -> RMatrix {
        self.map(|z| z.re)
    }

    pub fn im(&self) -> RMatrix {
        self.map(|z| z.im)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map(|z| z * s)
    }

    /// `max |M_ij − M_ji|`.
    pub fn symmetry_defect(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..i {
                d = d.max((self[(i, j)] - self[(j, i)]).norm());
            }
        }
        d
    }

    pub fn symmetrized(&self) -> Self {
        Self::from_fn(self.n, |i, j| (self[(i, j)] + self[(j, i)]) * 0.5)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Gauss-Jordan inverse with partial pivoting.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.n;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for col in 0..n {
            let pivot = (col..n).max_by(|&x, &y| a[(x, col)].norm().total_cmp(&a[(y, col)].norm())).unwrap_or(col);
            if a[(pivot, col)].norm() <= 1e-14 * scale {
                bail!(Domain, "matrix is numerically singular");
            }
            if pivot != col {
                for j in 0..n {
                    a.data.swap(pivot * n + j, col * n + j);
                    inv.data.swap(pivot * n + j, col * n + j);
                }
            }
            let p = a[(col, col)].inv();
            for j in 0..n {
                a[(col, j)] *= p;
                inv[(col, j)] *= p;
            }
            for row in 0..n {
                if row == col {
                    continue;
                }
                let f = a[(row, col)];
                if f == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    let (aj, ij) = (a[(col, j)], inv[(col, j)]);
                    a[(row, j)] -= f * aj;
                    inv[(row, j)] -= f * ij;
                }
            }
        }
        Ok(inv)
    }

    /// Determinant by LU elimination with partial pivoting.
    pub fn det(&self) -> Complex64 {
        let n = self.n;
        let mut a = self.clone();
        let mut det = Complex64::new(1.0, 0.0);
        for col in 0..n {
            let pivot = (col..n).max_by(|&x, &y| a[(x, col)].norm().total_cmp(&a[(y, col)].norm())).unwrap_or(col);
            if a[(pivot, col)] == Complex64::new(0.0, 0.0) {
                return Complex64::new(0.0, 0.0);
            }
            if pivot != col {
                for j in 0..n {
                    a.data.swap(pivot * n + j, col * n + j);
                }
                det = -det;
            }
            let p = a[(col, col)];
            det *= p;
            for row in col + 1..n {
                let f = a[(row, col)] / p;
                for j in col..n {
                    let v = a[(col, j)];
                    a[(row, j)] -= f * v;
                }
            }
        }
        det
    }
}

impl RMatrix {
    pub fn inverse(&self) -> Result<Self> {
        let c = self.map(|x| Complex64::new(x, 0.0)).inverse()?;
        Ok(c.re())
    }

    /// Eigenvalues of a symmetric matrix (cyclic Jacobi), ascending.
    pub fn symmetric_eigenvalues(&self) -> Vec<f64> {
        let n = self.n;
        let mut a = Self::from_fn(n, |i, j| 0.5 * (self[(i, j)] + self[(j, i)]));
        for _sweep in 0..100 {
            let mut off = 0.0;
            for i in 0..n {
                for j in 0..i {
                    off += a[(i, j)] * a[(i, j)];
                }
            }
            if off <= 1e-30 * (1.0 + a.data.iter().map(|x| x * x).sum::<f64>()) {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[(p, q)];
                    if apq == 0.0 {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let (akp, akq) = (a[(k, p)], a[(k, q)]);
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut ev = a.diag();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

pub fn vadd(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vsub(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vneg(a: &[Complex64]) -> Vec<Complex64> {
    a.iter().map(|x| -x).collect()
}

pub fn vscale(a: &[Complex64], s: Complex64) -> Vec<Complex64> {
    a.iter().map(|x| x * s).collect()
}

/// Bilinear (non-conjugating) dot product.
pub fn vdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn vnorm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}
