//! Small dense complex matrices and Gaussian elimination with partial pivoting.

use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.n + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[row * self.n + col] = value;
    }

    pub fn add(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[row * self.n + col] += value;
    }

    pub fn row(&self, row: usize) -> &[Complex64] {
        &self.data[row * self.n..(row + 1) * self.n]
    }

    /// Largest entry magnitude.
    pub fn max_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|r| self.row(r).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (0..self.n)
            .all(|r| (0..self.n).all(|c| (self.get(r, c) - self.get(c, r).conj()).norm() <= tol))
    }
}

/// Pivot that fell below the singularity threshold during elimination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularPivot {
    pub column: usize,
    pub pivot: f64,
}

/// Solves `A x = b` by elimination with partial pivoting.
///
/// A pivot whose magnitude is below `pivot_tol * max|A|` is reported rather
/// than regularized.
pub fn solve(
    a: &DenseMatrix,
    b: &[Complex64],
    pivot_tol: f64,
) -> Result<Vec<Complex64>, SingularPivot> {
    let n = a.dim();
    assert_eq!(b.len(), n, "rhs length must match matrix dimension");
    let threshold = pivot_tol * a.max_norm().max(f64::MIN_POSITIVE);
    let mut m = a.data.clone();
    let mut x = b.to_vec();

    for col in 0..n {
        let (pivot_row, pivot_mag) =
            (col..n)
                .map(|r| (r, m[r * n + col].norm()))
                .fold(
                    (col, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
        if pivot_mag < threshold {
            return Err(SingularPivot {
                column: col,
                pivot: pivot_mag,
            });
        }
        if pivot_row != col {
            for c in 0..n {
                m.swap(col * n + c, pivot_row * n + c);
            }
            x.swap(col, pivot_row);
        }
        let pivot = m[col * n + col];
        for r in col + 1..n {
            let factor = m[r * n + col] / pivot;
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            m[r * n + col] = Complex64::new(0.0, 0.0);
            for c in col + 1..n {
                let v = m[col * n + c];
                m[r * n + c] -= factor * v;
            }
            let v = x[col];
            x[r] -= factor * v;
        }
    }

    for row in (0..n).rev() {
        let mut acc = x[row];
        for c in row + 1..n {
            acc -= m[row * n + c] * x[c];
        }
        x[row] = acc / m[row * n + row];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn solves_small_complex_system() {
        let mut a = DenseMatrix::zeros(2);
        a.set(0, 0, c(1.0, 1.0));
        a.set(0, 1, c(2.0, 0.0));
        a.set(1, 0, c(0.0, 1.0));
        a.set(1, 1, c(3.0, -1.0));
        let b = [c(5.0, 1.0), c(4.0, 2.0)];
        let x = solve(&a, &b, 1e-14).unwrap();
        let ax = a.mul_vec(&x);
        for (l, r) in ax.iter().zip(&b) {
            assert!((l - r).norm() < 1e-13);
        }
    }

    #[test]
    fn needs_pivoting() {
        // zero on the leading diagonal entry
        let mut a = DenseMatrix::zeros(3);
        a.set(0, 1, c(1.0, 0.0));
        a.set(1, 0, c(2.0, 0.0));
        a.set(1, 2, c(0.0, 1.0));
        a.set(2, 2, c(4.0, 0.0));
        a.set(2, 0, c(1.0, -1.0));
        let b = [c(1.0, 0.0), c(0.0, 2.0), c(3.0, 0.0)];
        let x = solve(&a, &b, 1e-14).unwrap();
        for (l, r) in a.mul_vec(&x).iter().zip(&b) {
            assert!((l - r).norm() < 1e-13);
        }
    }

    #[test]
    fn reports_singular_matrix() {
        let mut a = DenseMatrix::zeros(2);
        a.set(0, 0, c(1.0, 0.0));
        a.set(0, 1, c(2.0, 0.0));
        a.set(1, 0, c(2.0, 0.0));
        a.set(1, 1, c(4.0, 0.0));
        let err = solve(&a, &[c(1.0, 0.0), c(0.0, 0.0)], 1e-14).unwrap_err();
        assert_eq!(err.column, 1);
    }

    #[test]
    fn random_systems_have_small_residual() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in [1, 5, 20, 60] {
            let mut a = DenseMatrix::zeros(n);
            for r in 0..n {
                for col in 0..n {
                    a.set(
                        r,
                        col,
                        c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                    );
                }
            }
            let b: Vec<_> = (0..n).map(|_| c(rng.gen_range(-1.0..1.0), 0.0)).collect();
            let x = solve(&a, &b, 1e-14).unwrap();
            let res = a
                .mul_vec(&x)
                .iter()
                .zip(&b)
                .map(|(l, r)| (l - r).norm())
                .fold(0.0, f64::max);
            assert!(res < 1e-11, "n = {n}: residual {res}");
        }
    }
}
