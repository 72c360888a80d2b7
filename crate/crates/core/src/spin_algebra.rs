//! Dense complex matrices and angular-momentum representations.
//!
//! Matrices here are tiny (dimension 2j + 1), so everything is dense and
//! allocated on the heap through nalgebra's `DMatrix`. Basis ordering follows
//! the J₃ eigenbasis from the top: index 0 is m = j, the last index is m = −j.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector, Vector3};
use num_complex::Complex64;

use crate::error::{FiberError, Result};

pub type ComplexVector = DVector<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Square dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(dim: usize, entries: &[Complex64]) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(FiberError::InvalidArgument(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Ok(Self(DMatrix::from_row_slice(dim, dim, entries)))
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        Self(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn to_row_major(&self) -> Vec<Complex64> {
        let n = self.dim();
        (0..n)
            .flat_map(|r| (0..n).map(move |c| (r, c)))
            .map(|(r, c)| self.0[(r, c)])
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self(&self.0 * factor)
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        Self(&self.0 * Complex64::new(factor, 0.0))
    }

    pub fn mul_vec(&self, v: &ComplexVector) -> ComplexVector {
        &self.0 * v
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// AB − BA.
    pub fn commutator(a: &Self, b: &Self) -> Self {
        Self(&a.0 * &b.0 - &b.0 * &a.0)
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> f64 {
        self.0
            .column_iter()
            .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// max |M − M†|
    pub fn hermiticity_defect(&self) -> f64 {
        (self - &self.adjoint()).max_abs()
    }

    /// max |M + M†|
    pub fn anti_hermiticity_defect(&self) -> f64 {
        (self + &self.adjoint()).max_abs()
    }

    /// max |M†M − I|
    pub fn unitarity_defect(&self) -> f64 {
        (&(&self.adjoint() * self) - &Self::identity(self.dim())).max_abs()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn is_anti_hermitian(&self, tol: f64) -> bool {
        self.anti_hermiticity_defect() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    /// ⟨u|M|v⟩
    pub fn sandwich(&self, u: &ComplexVector, v: &ComplexVector) -> Complex64 {
        u.dotc(&(&self.0 * v))
    }
}

impl From<DMatrix<Complex64>> for ComplexMatrix {
    fn from(m: DMatrix<Complex64>) -> Self {
        assert!(m.is_square(), "ComplexMatrix must be square");
        Self(m)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

/// Spin label j, stored as the integer 2j.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Spin {
    twice_j: u32,
}

impl Spin {
    pub const HALF: Spin = Spin { twice_j: 1 };
    pub const ONE: Spin = Spin { twice_j: 2 };

    pub fn new(j: f64) -> Result<Self> {
        let twice = 2.0 * j;
        if !twice.is_finite() || twice < 1.0 || (twice - twice.round()).abs() > 1e-12 || twice > 200.0 {
            return Err(FiberError::InvalidSpin(j));
        }
        Ok(Self { twice_j: twice.round() as u32 })
    }

    pub fn j(self) -> f64 {
        self.twice_j as f64 / 2.0
    }

    pub fn dim(self) -> usize {
        self.twice_j as usize + 1
    }

    /// J₃ eigenvalue carried by basis index `index`.
    pub fn sigma(self, index: usize) -> f64 {
        self.j() - index as f64
    }

    pub fn index_of(self, sigma: f64) -> Result<usize> {
        let offset = self.j() - sigma;
        let idx = offset.round();
        if (offset - idx).abs() > 1e-12 || idx < 0.0 || idx as usize >= self.dim() {
            return Err(FiberError::InvalidSigma { sigma, j: self.j() });
        }
        Ok(idx as usize)
    }

    /// All J₃ eigenvalues j, j−1, …, −j in basis order.
    pub fn sigmas(self) -> impl Iterator<Item = f64> {
        (0..self.dim()).map(move |i| self.sigma(i))
    }
}

impl Default for Spin {
    fn default() -> Self {
        Spin::ONE
    }
}

/// Matrices of J₁, J₂, J₃, J₊, J₋ for one spin j, in units of ħ.
#[derive(Debug, Clone)]
pub struct AngularMomentumRep {
    pub spin: Spin,
    pub j1: ComplexMatrix,
    pub j2: ComplexMatrix,
    pub j3: ComplexMatrix,
    pub jplus: ComplexMatrix,
    pub jminus: ComplexMatrix,
}

/// Ladder construction in the J₃ eigenbasis with Condon-Shortley phases
/// (all ladder coefficients real and non-negative).
pub fn build_rep(j: f64) -> Result<AngularMomentumRep> {
    Ok(AngularMomentumRep::new(Spin::new(j)?))
}

impl AngularMomentumRep {
    pub fn new(spin: Spin) -> Self {
        let n = spin.dim();
        let j = spin.j();
        let mut jplus = DMatrix::<Complex64>::zeros(n, n);
        // J₊|m⟩ = √(j(j+1) − m(m+1)) |m+1⟩; |m+1⟩ sits one index above |m⟩.
        for col in 1..n {
            let m = spin.sigma(col);
            jplus[(col - 1, col)] = Complex64::new((j * (j + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
        }
        let jminus = jplus.adjoint();
        let half = Complex64::new(0.5, 0.0);
        let j1 = (&jplus + &jminus) * half;
        let j2 = (&jplus - &jminus) * (half / I);
        let j3 = DMatrix::from_fn(n, n, |r, c| {
            if r == c {
                Complex64::new(spin.sigma(r), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Self {
            spin,
            j1: ComplexMatrix(j1),
            j2: ComplexMatrix(j2),
            j3: ComplexMatrix(j3),
            jplus: ComplexMatrix(jplus),
            jminus: ComplexMatrix(jminus),
        }
    }

    pub fn dim(&self) -> usize {
        self.spin.dim()
    }

    pub fn j(&self) -> f64 {
        self.spin.j()
    }

    /// v·J for an arbitrary real 3-vector (no normalization check).
    pub fn dot(&self, v: &Vector3<f64>) -> ComplexMatrix {
        let m = self.j1.as_dmatrix() * Complex64::new(v.x, 0.0)
            + self.j2.as_dmatrix() * Complex64::new(v.y, 0.0)
            + self.j3.as_dmatrix() * Complex64::new(v.z, 0.0);
        ComplexMatrix(m)
    }

    /// |σ⟩ as a column vector in the J₃ eigenbasis.
    pub fn basis_state(&self, sigma: f64) -> Result<ComplexVector> {
        let idx = self.spin.index_of(sigma)?;
        let mut v = ComplexVector::zeros(self.dim());
        v[idx] = Complex64::new(1.0, 0.0);
        Ok(v)
    }

    /// exp(−iφJ₃), evaluated entrywise on the diagonal.
    pub fn j3_phase(&self, phi: f64) -> ComplexMatrix {
        let diag: Vec<Complex64> = self
            .spin
            .sigmas()
            .map(|s| Complex64::from_polar(1.0, -phi * s))
            .collect();
        ComplexMatrix::from_diagonal(&diag)
    }

    /// max |J₁² + J₂² + J₃² − j(j+1)I|
    pub fn casimir_defect(&self) -> f64 {
        let c = &(&(&self.j1 * &self.j1) + &(&self.j2 * &self.j2)) + &(&self.j3 * &self.j3);
        let j = self.j();
        (&c - &ComplexMatrix::identity(self.dim()).scale_real(j * (j + 1.0))).max_abs()
    }

    /// Largest deviation among [J₃, J±] = ±J± and [J₊, J₋] = 2J₃.
    pub fn commutator_defect(&self) -> f64 {
        let a = (&ComplexMatrix::commutator(&self.j3, &self.jplus) - &self.jplus).max_abs();
        let b = (&ComplexMatrix::commutator(&self.j3, &self.jminus) + &self.jminus).max_abs();
        let c = (&ComplexMatrix::commutator(&self.jplus, &self.jminus) - &self.j3.scale_real(2.0)).max_abs();
        a.max(b).max(c)
    }
}

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
pub fn mat_exp(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !m.is_finite() {
        return Err(FiberError::NumericDomain("mat_exp input"));
    }
    let n = m.dim();
    let norm = m.one_norm();
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scaled = m.as_dmatrix() * Complex64::new(2f64.powi(-squarings), 0.0);

    let mut sum = DMatrix::<Complex64>::identity(n, n);
    let mut term = DMatrix::<Complex64>::identity(n, n);
    for k in 1..=40 {
        term = (&term * &scaled) / Complex64::new(k as f64, 0.0);
        sum += &term;
        let term_size = term.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if term_size <= f64::EPSILON * 1e-2 {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    let out = ComplexMatrix(sum);
    if !out.is_finite() {
        return Err(FiberError::NumericDomain("mat_exp result"));
    }
    Ok(out)
}

/// Invariant-diagonalizing unitary V = exp(βJ₊ − β*J₋) with β = −(λ/2)e^{−iγ}.
///
/// V rotates J₃ onto k̂·J where k̂ = (sinλ cosγ, sinλ sinγ, cosλ), so that
/// V†(k̂·J)V = J₃.
pub fn build_v(rep: &AngularMomentumRep, lambda: f64, gamma: f64) -> Result<ComplexMatrix> {
    if !lambda.is_finite() || !gamma.is_finite() {
        return Err(FiberError::NumericDomain("build_v angles"));
    }
    let beta = Complex64::from_polar(-lambda / 2.0, -gamma);
    let generator = &rep.jplus.scale(beta) - &rep.jminus.scale(beta.conj());
    mat_exp(&generator)
}

/// n̂·J for a unit vector n̂.
pub fn direction_operator(rep: &AngularMomentumRep, unit: &Vector3<f64>) -> Result<ComplexMatrix> {
    direction_operator_with_tol(rep, unit, 1e-9)
}

pub fn direction_operator_with_tol(
    rep: &AngularMomentumRep,
    unit: &Vector3<f64>,
    tol: f64,
) -> Result<ComplexMatrix> {
    let norm = unit.norm();
    if !norm.is_finite() || (norm - 1.0).abs() > tol {
        return Err(FiberError::NotNormalized { norm, tolerance: tol });
    }
    Ok(rep.dot(unit))
}

/// Polar and azimuthal angles of a unit vector, with λ = arccos(n_z) computed
/// through atan2 for accuracy near the poles.
pub fn spherical_angles(unit: &Vector3<f64>) -> (f64, f64) {
    let rho = unit.x.hypot(unit.y);
    (rho.atan2(unit.z), unit.y.atan2(unit.x))
}
