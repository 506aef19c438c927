//! Dense complex matrices and an LU solver with partial pivoting.

use num_complex::Complex64;

use super::NumericsError;

/// Relative pivot threshold below which a matrix is reported as singular.
const SINGULAR_PIVOT_RATIO: f64 = 1e-14;

/// Dense complex vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector(Vec<Complex64>);

impl ComplexVector {
    pub fn new(values: Vec<Complex64>) -> Self {
        Self(values)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.0
    }

    /// Maximum modulus of the entries (zero for an empty vector).
    pub fn norm_inf(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl std::ops::Index<usize> for ComplexVector {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl std::ops::IndexMut<usize> for ComplexVector {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.0[i]
    }
}

/// Dense square complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    /// Builds a matrix from rows, rejecting ragged or non-finite input.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self, NumericsError> {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(NumericsError::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            for (j, &z) in row.iter().enumerate() {
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(NumericsError::NonFinite(format!("entry ({i},{j})")));
                }
                m.set(i, j, z);
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, z: Complex64) {
        self.data[i * self.n + j] = z;
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn mul_vec(&self, x: &ComplexVector) -> Result<ComplexVector, NumericsError> {
        if x.len() != self.n {
            return Err(NumericsError::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(ComplexVector::new(
            (0..self.n)
                .map(|i| self.row(i).iter().zip(x.as_slice()).map(|(a, b)| a * b).sum())
                .collect(),
        ))
    }
}

/// Solves `a x = b` by LU factorisation with partial pivoting.
///
/// A pivot whose modulus falls below `1e-14 * ||a||_inf` is reported as
/// [`NumericsError::Singular`].
pub fn solve_complex_linear(a: &ComplexMatrix, b: &ComplexVector) -> Result<ComplexVector, NumericsError> {
    let n = a.dim();
    if b.len() != n {
        return Err(NumericsError::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    if let Some(i) = b
        .as_slice()
        .iter()
        .position(|z| !(z.re.is_finite() && z.im.is_finite()))
    {
        return Err(NumericsError::NonFinite(format!("right-hand side entry {i}")));
    }
    if n == 0 {
        return Ok(ComplexVector::zeros(0));
    }
    let threshold = SINGULAR_PIVOT_RATIO * a.norm_inf();
    let mut lu = a.data.clone();
    let mut x = b.as_slice().to_vec();
    for col in 0..n {
        let (piv_row, piv_abs) = (col..n)
            .map(|r| (r, lu[r * n + col].norm()))
            .fold((col, -1.0), |best, cand| if cand.1 > best.1 { cand } else { best });
        if piv_abs.is_nan() || piv_abs <= threshold {
            return Err(NumericsError::Singular {
                pivot: piv_abs,
                threshold,
            });
        }
        if piv_row != col {
            for j in 0..n {
                lu.swap(col * n + j, piv_row * n + j);
            }
            x.swap(col, piv_row);
        }
        let pivot = lu[col * n + col];
        for r in col + 1..n {
            let factor = lu[r * n + col] / pivot;
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in col + 1..n {
                let v = lu[col * n + j];
                lu[r * n + j] -= factor * v;
            }
            let xc = x[col];
            x[r] -= factor * xc;
        }
    }
    for i in (0..n).rev() {
        let mut acc = x[i];
        for j in i + 1..n {
            acc -= lu[i * n + j] * x[j];
        }
        x[i] = acc / lu[i * n + i];
    }
    Ok(ComplexVector::new(x))
}
