//! Curved-fiber helicity (1/K) K·J and helicity inversion.
//!
//! K = k(sinλ cosγ, sinλ sinγ, cosλ − (γ̇/k)(1 − cosλ)), |K| = ςk. In a
//! straight or slowly wound fiber K̂ → k̂ and the usual helicity returns; for
//! tight winding (γ̇/k large, λ small) the expectation in |σ⟩ tends to −σ.

use serde::{Deserialize, Serialize};

use crate::error::{FiberError, Result};
use crate::geometry::{helix_frequency, helix_pitch_angle, OmegaConvention, Vec3};
use crate::spin_algebra::{direction_operator, AngularMomentumRep, ComplexVector};

/// 1 − cosλ without cancellation for small λ.
fn one_minus_cos(lambda: f64) -> f64 {
    let s = (0.5 * lambda).sin();
    2.0 * s * s
}

fn check_wavenumber(k: f64) -> Result<()> {
    if !(k.is_finite() && k > 0.0) {
        return Err(FiberError::InvalidWavenumber(k));
    }
    Ok(())
}

fn check_photon_sigma(sigma: f64) -> Result<()> {
    if sigma != 1.0 && sigma != -1.0 {
        return Err(FiberError::InvalidSigma { sigma, j: 1.0 });
    }
    Ok(())
}

/// K/k third component, cosλ − x(1 − cosλ), with x = γ̇/k.
fn kz_over_k(lambda: f64, x: f64) -> f64 {
    lambda.cos() - x * one_minus_cos(lambda)
}

fn zeta_unchecked(lambda: f64, x: f64) -> f64 {
    let w = x * one_minus_cos(lambda);
    (1.0 - 2.0 * w * lambda.cos() + w * w).max(0.0).sqrt()
}

pub fn k_vector(lambda: f64, gamma: f64, gamma_dot: f64, k: f64) -> Result<Vec3> {
    check_wavenumber(k)?;
    let s = lambda.sin();
    Ok(Vec3::new(s * gamma.cos(), s * gamma.sin(), kz_over_k(lambda, gamma_dot / k)) * k)
}

/// ς = |K|/k = √(1 − 2(γ̇/k)(1 − cosλ)cosλ + (γ̇/k)²(1 − cosλ)²).
pub fn zeta(lambda: f64, gamma_dot: f64, k: f64) -> Result<f64> {
    check_wavenumber(k)?;
    Ok(zeta_unchecked(lambda, gamma_dot / k))
}

/// ⟨σ|K̂·J|σ⟩ = σ[cosλ − (γ̇/k)(1 − cosλ)]/ς for the photon states σ = ±1.
pub fn helicity_expectation_closed(lambda: f64, gamma_dot_over_k: f64, sigma: f64) -> Result<f64> {
    check_photon_sigma(sigma)?;
    let z = zeta_unchecked(lambda, gamma_dot_over_k);
    if !(z > 0.0) {
        return Err(FiberError::UndefinedHelicity);
    }
    Ok(sigma * kz_over_k(lambda, gamma_dot_over_k) / z)
}

/// ς from the phase rate r = γ̇(1 − cosλ) directly; finite at λ = 0.
pub fn zeta_from_rate(lambda: f64, rate_over_k: f64) -> f64 {
    lambda.sin().hypot(lambda.cos() - rate_over_k)
}

/// Closed-form expectation written with the phase rate r = γ̇(1 − cosλ):
/// σ(cosλ − r/k)/ς. Agrees with [`helicity_expectation_closed`] and stays
/// regular where γ̇ is undefined (λ = 0).
pub fn helicity_expectation_from_rate(lambda: f64, rate_over_k: f64, sigma: f64) -> Result<f64> {
    check_photon_sigma(sigma)?;
    let z = zeta_from_rate(lambda, rate_over_k);
    if !(z > 0.0) {
        return Err(FiberError::UndefinedHelicity);
    }
    Ok(sigma * (lambda.cos() - rate_over_k) / z)
}

/// Diagnostic: expectation of K̂·J in the instantaneous invariant eigenstate
/// |σ, k̂⟩ instead of |σ⟩, σ(K̂·k̂) = σ[1 − (γ̇/k)(1 − cosλ)cosλ]/ς.
pub fn helicity_expectation_instantaneous(lambda: f64, gamma_dot_over_k: f64, sigma: f64) -> Result<f64> {
    check_photon_sigma(sigma)?;
    let z = zeta_unchecked(lambda, gamma_dot_over_k);
    if !(z > 0.0) {
        return Err(FiberError::UndefinedHelicity);
    }
    let w = gamma_dot_over_k * one_minus_cos(lambda);
    Ok(sigma * (1.0 - w * lambda.cos()) / z)
}

/// ⟨ψ|K̂·J|ψ⟩ by matrix evaluation.
pub fn helicity_expectation_matrix(rep: &AngularMomentumRep, state: &ComplexVector, k_vec: &Vec3) -> Result<f64> {
    let kn = k_vec.norm();
    if !(kn > 0.0) || !kn.is_finite() {
        return Err(FiberError::UndefinedHelicity);
    }
    let norm = state.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(FiberError::NotNormalized { norm, tolerance: 1e-9 });
    }
    let op = direction_operator(rep, &(k_vec / kn))?;
    Ok(op.sandwich(state, state).re)
}

/// Helicity summary at one point of the fiber.
#[derive(Debug, Clone, PartialEq)]
pub struct HelicityReport {
    pub k_vec: Vec3,
    pub zeta: f64,
    /// (σ, closed-form expectation) for σ = +1, −1.
    pub expectation_closed: [(f64, f64); 2],
    pub expectation_matrix: [(f64, f64); 2],
    pub expectation_instantaneous: [(f64, f64); 2],
    /// expectation·σ < 0 for σ = +1, −1.
    pub inverted: [bool; 2],
}

/// Evaluates K, ς and both σ = ±1 expectations with a spin-1 representation.
pub fn helicity_report(rep: &AngularMomentumRep, lambda: f64, gamma: f64, gamma_dot: f64, k: f64) -> Result<HelicityReport> {
    let k_vec = k_vector(lambda, gamma, gamma_dot, k)?;
    let z = zeta(lambda, gamma_dot, k)?;
    let x = gamma_dot / k;
    let mut closed = [(1.0, 0.0), (-1.0, 0.0)];
    let mut matrix = closed;
    let mut inst = closed;
    let mut inverted = [false; 2];
    for (i, sigma) in [1.0, -1.0].into_iter().enumerate() {
        let c = helicity_expectation_closed(lambda, x, sigma)?;
        closed[i] = (sigma, c);
        matrix[i] = (sigma, helicity_expectation_matrix(rep, &rep.basis_state(sigma)?, &k_vec)?);
        inst[i] = (sigma, helicity_expectation_instantaneous(lambda, x, sigma)?);
        inverted[i] = c * sigma < 0.0;
    }
    Ok(HelicityReport {
        k_vec,
        zeta: z,
        expectation_closed: closed,
        expectation_matrix: matrix,
        expectation_instantaneous: inst,
        inverted,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// One scan axis: explicit values or an evenly spaced range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    Values(Vec<f64>),
    Range(AxisRange),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisRange {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl Axis {
    pub fn values(&self) -> Result<Vec<f64>> {
        let vals = match self {
            Axis::Values(v) => v.clone(),
            Axis::Range(r) => {
                if r.count == 0 {
                    Vec::new()
                } else if r.count == 1 {
                    vec![r.start]
                } else {
                    let n = (r.count - 1) as f64;
                    match r.spacing {
                        Spacing::Linear => (0..r.count).map(|i| r.start + (r.stop - r.start) * i as f64 / n).collect(),
                        Spacing::Log => {
                            if !(r.start > 0.0 && r.stop > 0.0) {
                                return Err(FiberError::InvalidArgument("log axis needs positive bounds".into()));
                            }
                            let (a, b) = (r.start.ln(), r.stop.ln());
                            (0..r.count).map(|i| (a + (b - a) * i as f64 / n).exp()).collect()
                        }
                    }
                }
            }
        };
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(FiberError::InvalidArgument("non-finite axis value".into()));
        }
        Ok(vals)
    }
}

/// Scan over the dimensionless rate and polar angle, or over helix geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScanGrid {
    Rate {
        gamma_dot_over_k: Axis,
        lambda: Axis,
    },
    Helix {
        radius: Axis,
        pitch: Axis,
        #[serde(default)]
        omega_convention: OmegaConvention,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    /// γ̇/k or helix radius a.
    pub first: f64,
    /// λ or helix pitch d.
    pub second: f64,
    pub zeta: f64,
    pub expectation_plus: f64,
    pub expectation_minus: f64,
    pub inverted_plus: bool,
    pub inverted_minus: bool,
}

/// Bracket of a sign change of cosλ − (γ̇/k)(1 − cosλ) along the inner axis.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroCrossing {
    /// Fixed outer coordinate (λ for rate grids, radius for helix grids).
    pub outer: f64,
    pub inner_lo: f64,
    pub inner_hi: f64,
    /// Root located by bisection inside the bracket.
    pub root: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanTable {
    pub column_names: [&'static str; 2],
    pub rows: Vec<ScanRow>,
    pub crossings: Vec<ZeroCrossing>,
}

/// (λ, γ̇/k) at one grid point; `outer`/`inner` follow the grid's loop order.
fn grid_point(grid: &ScanGrid, outer: f64, inner: f64, k: f64) -> Result<(f64, f64)> {
    match grid {
        ScanGrid::Rate { .. } => Ok((outer, inner)),
        ScanGrid::Helix { omega_convention, .. } => {
            let omega = helix_frequency(outer, inner, *omega_convention)?;
            Ok((helix_pitch_angle(outer, inner), omega / k))
        }
    }
}

fn numerator(lambda: f64, x: f64) -> f64 {
    kz_over_k(lambda, x)
}

/// Evaluates ς, the σ = ±1 expectations and inversion flags on every grid
/// point. Rows are ordered outer-major: λ then γ̇/k, or radius then pitch.
pub fn inversion_scan(grid: &ScanGrid, k: f64) -> Result<ScanTable> {
    check_wavenumber(k)?;
    let (outer_axis, inner_axis, names, rate) = match grid {
        ScanGrid::Rate { gamma_dot_over_k, lambda } => (lambda.values()?, gamma_dot_over_k.values()?, ["gamma_dot_over_k", "lambda"], true),
        ScanGrid::Helix { radius, pitch, .. } => (radius.values()?, pitch.values()?, ["a", "d"], false),
    };
    if outer_axis.is_empty() || inner_axis.is_empty() {
        return Err(FiberError::InvalidArgument("scan grid is empty".into()));
    }
    let mut rows = Vec::with_capacity(outer_axis.len() * inner_axis.len());
    let mut crossings = Vec::new();
    for &outer in &outer_axis {
        let mut prev: Option<(f64, f64)> = None;
        for &inner in &inner_axis {
            let (lambda, x) = grid_point(grid, outer, inner, k)?;
            let zeta = zeta_unchecked(lambda, x);
            let plus = helicity_expectation_closed(lambda, x, 1.0)?;
            let minus = helicity_expectation_closed(lambda, x, -1.0)?;
            let (first, second) = if rate { (inner, outer) } else { (outer, inner) };
            rows.push(ScanRow {
                first,
                second,
                zeta,
                expectation_plus: plus,
                expectation_minus: minus,
                inverted_plus: plus < 0.0,
                inverted_minus: -minus < 0.0,
            });
            let num = numerator(lambda, x);
            if let Some((prev_inner, prev_num)) = prev {
                if (prev_num > 0.0 && num <= 0.0) || (prev_num < 0.0 && num >= 0.0) {
                    let root = bisect(
                        |v| grid_point(grid, outer, v, k).map(|(l, xx)| numerator(l, xx)).unwrap_or(f64::NAN),
                        prev_inner,
                        inner,
                    );
                    crossings.push(ZeroCrossing { outer, inner_lo: prev_inner, inner_hi: inner, root });
                }
            }
            prev = Some((inner, num));
        }
    }
    Ok(ScanTable { column_names: names, rows, crossings })
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = f(lo);
    if f_lo == 0.0 {
        return lo;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
