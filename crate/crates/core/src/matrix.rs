//! Dense complex matrices.
//!
//! Entries are stored row-major with 0-based indices: `data[k * cols + l]`
//! holds the entry the documentation writes as `A(k+1, l+1)`.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A dense complex `rows x cols` matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl Matrix {
    /// Builds a matrix from row-major entries, rejecting empty shapes and
    /// non-finite values.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::InvalidShape {
                rows,
                cols,
                len: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|z| !z.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / cols,
                col: pos % cols,
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::new(
            rows,
            cols,
            data.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    /// Builds from nested real rows; all rows must have the same length.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Precondition("ragged rows".into()));
        }
        let flat: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self::from_real(rows.len(), cols, &flat)
    }

    /// Panics on an empty shape; callers pass validated dimensions.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix shape {rows}x{cols}");
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for k in 0..rows {
            for l in 0..cols {
                m.data[k * cols + l] = f(k, l);
            }
        }
        debug_assert!(m.data.iter().all(|z| z.is_finite()));
        m
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |k, l| {
            Complex64::new(if k == l { 1.0 } else { 0.0 }, 0.0)
        })
    }

    pub fn ones(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| Complex64::new(1.0, 0.0))
    }

    /// The matrix unit with a single 1 at 0-based position `(k, l)`.
    pub fn unit(rows: usize, cols: usize, k: usize, l: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        m.data[k * cols + l] = Complex64::new(1.0, 0.0);
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |k, l| {
            Complex64::new(if k == l { values[k] } else { 0.0 }, 0.0)
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, k: usize, l: usize) -> Complex64 {
        self.data[k * self.cols + l]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, k: usize) -> &[Complex64] {
        &self.data[k * self.cols..(k + 1) * self.cols]
    }

    pub fn map(&self, mut f: impl FnMut(Complex64) -> Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |k, l| self.get(l, k).conj())
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_complex(&self, s: Complex64) -> Self {
        self.map(|z| z * s)
    }

    fn check_same_shape(&self, other: &Matrix, op: &'static str) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch {
                op,
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(())
    }

    fn zip_with(
        &self,
        other: &Matrix,
        op: &'static str,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        self.check_same_shape(other, op)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Matrix) -> Result<Self> {
        self.zip_with(other, "add", |a, b| a + b)
    }

    pub fn sub(&self, other: &Matrix) -> Result<Self> {
        self.zip_with(other, "sub", |a, b| a - b)
    }

    /// Entrywise (Schur) product.
    pub fn schur(&self, other: &Matrix) -> Result<Self> {
        self.zip_with(other, "schur_product", |a, b| a * b)
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                op: "matmul",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for k in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(k, j);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let src = other.row(j);
                let dst = &mut out.data[k * other.cols..(k + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Matrix) -> Result<f64> {
        self.check_same_shape(other, "max_abs_diff")?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    /// First index with a nonzero diagonal entry, if any (exact comparison).
    pub fn first_nonzero_diagonal(&self) -> Option<usize> {
        (0..self.rows.min(self.cols)).find(|&i| {
            let z = self.get(i, i);
            z.re != 0.0 || z.im != 0.0
        })
    }

    /// True when every entry off the main diagonal is exactly zero.
    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|k| {
            (0..self.cols).all(|l| {
                let z = self.get(k, l);
                k == l || (z.re == 0.0 && z.im == 0.0)
            })
        })
    }

    /// Euclidean norm of row `k`.
    pub fn row_norm(&self, k: usize) -> f64 {
        self.row(k).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Euclidean norm of column `l`.
    pub fn col_norm(&self, l: usize) -> f64 {
        (0..self.rows)
            .map(|k| self.get(k, l).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// The submatrix on the given row and column index lists.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |k, l| self.get(rows[k], cols[l]))
    }

    /// Appends zero rows and columns up to `rows x cols`.
    pub fn pad_to(&self, rows: usize, cols: usize) -> Self {
        assert!(rows >= self.rows && cols >= self.cols);
        Self::from_fn(rows, cols, |k, l| {
            if k < self.rows && l < self.cols {
                self.get(k, l)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub(crate) fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub(crate) fn to_faer(&self) -> faer::Mat<Complex64> {
        faer::Mat::from_fn(self.rows, self.cols, |k, l| self.get(k, l))
    }

    pub(crate) fn from_faer(m: faer::MatRef<'_, Complex64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |k, l| m[(k, l)])
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("matrix serialization is infallible")
    }
}

/// On-disk layout: `{"rows": m, "cols": n, "re": [[..]], "im": [[..]]}`.
#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    im: Option<Vec<Vec<f64>>>,
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let re = (0..self.rows)
            .map(|k| self.row(k).iter().map(|z| z.re).collect())
            .collect();
        let im = if self.data.iter().any(|z| z.im != 0.0) {
            Some(
                (0..self.rows)
                    .map(|k| self.row(k).iter().map(|z| z.im).collect())
                    .collect(),
            )
        } else {
            None
        };
        MatrixJson {
            rows: self.rows,
            cols: self.cols,
            re,
            im,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = MatrixJson::deserialize(deserializer)?;
        let check = |name: &str, arr: &Vec<Vec<f64>>| {
            if arr.len() != raw.rows || arr.iter().any(|r| r.len() != raw.cols) {
                Err(D::Error::custom(format!(
                    "\"{name}\" must be a {}x{} array",
                    raw.rows, raw.cols
                )))
            } else {
                Ok(())
            }
        };
        check("re", &raw.re)?;
        if let Some(im) = &raw.im {
            check("im", im)?;
        }
        let mut data = Vec::with_capacity(raw.rows * raw.cols);
        for k in 0..raw.rows {
            for l in 0..raw.cols {
                let im = raw.im.as_ref().map_or(0.0, |im| im[k][l]);
                data.push(Complex64::new(raw.re[k][l], im));
            }
        }
        Matrix::new(raw.rows, raw.cols, data).map_err(D::Error::custom)
    }
}

/// Entrywise product of two equally shaped matrices.
pub fn schur_product(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    a.schur(b)
}

/// `Tr(B* A)`, the duality pairing between `C_p` and `C_{p/(p-1)}`.
pub fn trace_pairing(a: &Matrix, b: &Matrix) -> Result<Complex64> {
    a.check_same_shape(b, "trace_pairing")?;
    Ok(a.data
        .iter()
        .zip(&b.data)
        .map(|(&x, &y)| y.conj() * x)
        .sum())
}
