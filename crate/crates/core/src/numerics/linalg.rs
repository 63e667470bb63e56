use core::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
#[allow(unused_imports)] // redundant when std is in the build graph
use num_traits::Float;

/// Dense 3×3 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3(pub [[Complex64; 3]; 3]);

impl Mat3 {
    pub fn zero() -> Self {
        Mat3([[Complex64::new(0.0, 0.0); 3]; 3])
    }

    /// `u ⊗ v` (no conjugation).
    pub fn outer(u: &[Complex64; 3], v: &[Complex64; 3]) -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = u[i] * v[j];
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = self.0[j][i];
            }
        }
        m
    }

    pub fn conj(&self) -> Self {
        let mut m = *self;
        for row in m.0.iter_mut() {
            for x in row.iter_mut() {
                *x = x.conj();
            }
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        self.transpose().conj()
    }

    pub fn matmul(&self, other: &Mat3) -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = (0..3).map(|k| self.0[i][k] * other.0[k][j]).sum();
            }
        }
        m
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut m = *self;
        for row in m.0.iter_mut() {
            for x in row.iter_mut() {
                *x *= c;
            }
        }
        m
    }

    /// `uᵀ·M·v` without conjugation.
    pub fn bilinear(&self, u: &[f64; 3], v: &[f64; 3]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..3 {
            for j in 0..3 {
                acc += self.0[i][j] * (u[i] * v[j]);
            }
        }
        acc
    }

    pub fn frobenius(&self) -> f64 {
        self.0.iter().flatten().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }
}

impl Index<(usize, usize)> for Mat3 {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for Mat3 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.0[i][j]
    }
}

impl Add for Mat3 {
    type Output = Mat3;
    fn add(mut self, rhs: Mat3) -> Mat3 {
        for i in 0..3 {
            for j in 0..3 {
                self.0[i][j] += rhs.0[i][j];
            }
        }
        self
    }
}

impl Sub for Mat3 {
    type Output = Mat3;
    fn sub(mut self, rhs: Mat3) -> Mat3 {
        for i in 0..3 {
            for j in 0..3 {
                self.0[i][j] -= rhs.0[i][j];
            }
        }
        self
    }
}

impl Mul<f64> for Mat3 {
    type Output = Mat3;
    fn mul(mut self, rhs: f64) -> Mat3 {
        for row in self.0.iter_mut() {
            for x in row.iter_mut() {
                *x *= rhs;
            }
        }
        self
    }
}

/// Solves `A x = b` in place (`a` is `n×n` row-major, `b` becomes `x`).
/// Returns `false` for a singular matrix.
pub fn solve_complex(a: &mut [Complex64], b: &mut [Complex64], n: usize) -> bool {
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i * n + col].norm().total_cmp(&a[j * n + col].norm())).unwrap_or(col);
        if a[pivot * n + col].norm() == 0.0 {
            return false;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
            }
            b.swap(pivot, col);
        }
        let inv = a[col * n + col].inv();
        for row in col + 1..n {
            let factor = a[row * n + col] * inv;
            if factor.norm() == 0.0 {
                continue;
            }
            for k in col..n {
                let v = a[col * n + k];
                a[row * n + k] -= factor * v;
            }
            let v = b[col];
            b[row] -= factor * v;
        }
    }
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row * n + k] * b[k];
        }
        b[row] = acc / a[row * n + row];
    }
    true
}

/// Real counterpart of [`solve_complex`].
pub fn solve_real(a: &mut [f64], b: &mut [f64], n: usize) -> bool {
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs())).unwrap_or(col);
        if a[pivot * n + col] == 0.0 {
            return false;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
            }
            b.swap(pivot, col);
        }
        for row in col + 1..n {
            let factor = a[row * n + col] / a[col * n + col];
            for k in col..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            b[row] -= factor * b[col];
        }
    }
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row * n + k] * b[k];
        }
        b[row] = acc / a[row * n + row];
    }
    true
}
