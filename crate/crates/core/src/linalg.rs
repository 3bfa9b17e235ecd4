//! Dense complex matrix helpers shared by the numerical modules.

use nalgebra::{ColPivQR, DMatrix, DVector, Schur};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Cx = Complex64;
pub type CMatrix = DMatrix<Cx>;
pub type CVector = DVector<Cx>;

pub const ZERO: Cx = Cx::new(0.0, 0.0);
pub const ONE: Cx = Cx::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> Cx {
    Cx::new(re, im)
}

/// Frobenius norm.
pub fn fro(m: &CMatrix) -> f64 {
    m.norm()
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// `m^n` by repeated squaring. `n = 0` gives the identity.
pub fn mat_pow(m: &CMatrix, mut n: usize) -> CMatrix {
    let mut result = identity(m.nrows());
    let mut base = m.clone();
    while n > 0 {
        if n & 1 == 1 {
            result = &result * &base;
        }
        n >>= 1;
        if n > 0 {
            base = &base * &base;
        }
    }
    result
}

pub fn inverse(m: &CMatrix) -> Result<CMatrix> {
    m.clone().lu().try_inverse().ok_or_else(|| Error::Singular("matrix is not invertible".into()))
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// 2-norm condition number; infinite when singular.
pub fn condition_number(m: &CMatrix) -> f64 {
    let sv = singular_values(m);
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Number of singular values strictly above `threshold`.
pub fn numerical_rank(m: &CMatrix, threshold: f64) -> usize {
    singular_values(m).into_iter().filter(|&s| s > threshold).count()
}

/// Eigenvalues via the complex Schur form.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<Cx>> {
    if m.is_empty() {
        return Ok(Vec::new());
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Singular("Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

/// Orthonormal basis of the column space, from a column-pivoted QR.
///
/// Columns whose pivot falls below `rel_tol * |R_00|` are treated as numerically dependent.
pub fn orthonormal_range(m: &CMatrix, rel_tol: f64) -> CMatrix {
    let n = m.nrows();
    if m.is_empty() || fro(m) == 0.0 {
        return CMatrix::zeros(n, 0);
    }
    let qr = ColPivQR::new(m.clone());
    let r = qr.r();
    let lead = r[(0, 0)].norm();
    let rank = (0..r.nrows().min(r.ncols())).take_while(|&k| r[(k, k)].norm() > rel_tol * lead).count();
    qr.q().columns(0, rank).into_owned()
}

/// First `rank` columns of the pivoted-QR `Q` factor of `m`.
pub fn leading_range(m: &CMatrix, rank: usize) -> CMatrix {
    if rank == 0 {
        return CMatrix::zeros(m.nrows(), 0);
    }
    ColPivQR::new(m.clone()).q().columns(0, rank).into_owned()
}

/// Seeded matrix with entries uniform in the unit square `[-1,1] + i[-1,1]`.
pub fn random_complex(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| c(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)))
}

/// Seeded unitary matrix (Q factor of a random complex matrix).
pub fn random_unitary(n: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = random_complex(n, n, &mut rng);
    g.qr().q()
}

/// Distance from `m^H m` to the identity.
pub fn unitarity_defect(m: &CMatrix) -> f64 {
    fro(&(m.adjoint() * m - identity(m.ncols())))
}

/// Row-major complex matrix as `[re, im]` pairs, the JSON interchange layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl From<&CMatrix> for MatrixJson {
    fn from(m: &CMatrix) -> Self {
        let mut data = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                data.push([z.re, z.im]);
            }
        }
        MatrixJson { rows: m.nrows(), cols: m.ncols(), data }
    }
}

impl MatrixJson {
    pub fn to_matrix(&self) -> Result<CMatrix> {
        if self.data.len() != self.rows * self.cols {
            return Err(Error::InvalidArgument(format!(
                "matrix payload has {} entries, expected {}x{}",
                self.data.len(),
                self.rows,
                self.cols
            )));
        }
        Ok(CMatrix::from_row_iterator(self.rows, self.cols, self.data.iter().map(|&[re, im]| c(re, im))))
    }
}

/// Serde adapter storing a [`CMatrix`] as [`MatrixJson`].
pub mod matrix_serde {
    use super::{CMatrix, MatrixJson};
    use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CMatrix, D::Error> {
        MatrixJson::deserialize(d)?.to_matrix().map_err(D::Error::custom)
    }
}

pub(crate) fn complex_pairs(v: &CVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}
