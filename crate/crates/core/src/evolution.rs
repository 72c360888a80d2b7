//! Phase integrals and propagators for i∂ₜψ = (k̂ × k̂̇)·J ψ.
//!
//! Sign convention: the state picks up e^{−iφ_σ} with φ_σ = σΦ and
//! Φ(t) = ∫₀ᵗ γ̇(1 − cosλ)dt′. On a right-handed helix γ̇ > 0, so φ₊₁ > 0.

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{FiberError, Result};
use crate::geometry::{field_angle_integrand, phase_rate, EffectiveField, MomentumTrajectory, Vec3};
use crate::quadrature::adaptive_simpson;
use crate::spin_algebra::{build_v, mat_exp, spherical_angles, AngularMomentumRep, ComplexMatrix, ComplexVector};
use crate::tolerances::Tolerances;

const NEG_I: Complex64 = Complex64::new(0.0, -1.0);

/// Which circular polarization a vacuum phase belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Handedness {
    Right,
    Left,
}

impl Handedness {
    pub fn sign(self) -> f64 {
        match self {
            Handedness::Right => 1.0,
            Handedness::Left => -1.0,
        }
    }
}

/// Φ(t) on the trajectory grid together with its integrand.
#[derive(Debug, Clone)]
pub struct PhaseCurve {
    pub times: Vec<f64>,
    /// Φ(t) = ∫₀ᵗ γ̇(1 − cosλ)dt′
    pub phi: Vec<f64>,
    /// dΦ/dt on the grid.
    pub rate: Vec<f64>,
}

impl PhaseCurve {
    /// φ_σ(t) = σΦ(t), since ⟨σ|J₃|σ⟩ = σ.
    pub fn geometric_phase(&self, sigma: f64) -> Vec<f64> {
        self.phi.iter().map(|p| sigma * p).collect()
    }

    /// ±Φ(t)/2 for right/left circular polarization.
    pub fn vacuum_phase(&self, hand: Handedness) -> Vec<f64> {
        self.phi.iter().map(|p| hand.sign() * 0.5 * p).collect()
    }

    pub fn final_phi(&self) -> f64 {
        *self.phi.last().unwrap_or(&0.0)
    }
}

/// Integrates `f` over [a, b], splitting at the trajectory's breakpoints.
fn integrate_piecewise<F: Fn(f64) -> f64>(traj: &MomentumTrajectory, f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let bps = traj.breakpoints();
    let start = bps.partition_point(|&x| x <= lo);
    let end = bps.partition_point(|&x| x < hi);
    let mut cuts = Vec::with_capacity(end.saturating_sub(start) + 2);
    cuts.push(lo);
    cuts.extend_from_slice(&bps[start..end.max(start)]);
    cuts.push(hi);
    let pieces = (cuts.len() - 1) as f64;
    sign * cuts
        .windows(2)
        .map(|w| adaptive_simpson(&f, w[0], w[1], tol / pieces))
        .sum::<f64>()
}

/// Φ(t₁) − Φ(t₀).
pub fn geometric_phase_between(traj: &MomentumTrajectory, t0: f64, t1: f64, tol: &Tolerances) -> Result<f64> {
    traj.check_time(t0)?;
    traj.check_time(t1)?;
    traj.ensure_clear_of_south_pole(tol.south_pole)?;
    Ok(integrate_piecewise(traj, |t| traj.phase_rate_at(t), t0, t1, tol.quadrature))
}

/// Φ(t) = ∫₀ᵗ γ̇(1 − cosλ)dt′ by adaptive quadrature of the regularized integrand.
pub fn geometric_phase(traj: &MomentumTrajectory, t: f64) -> Result<f64> {
    geometric_phase_between(traj, 0.0, t, &Tolerances::default())
}

/// Φ on every grid time, accumulated interval by interval.
pub fn phase_curve(traj: &MomentumTrajectory, tol: &Tolerances) -> Result<PhaseCurve> {
    traj.ensure_clear_of_south_pole(tol.south_pole)?;
    let n = traj.len();
    let per_interval = tol.quadrature / (n.max(2) - 1) as f64;
    let increments: Vec<f64> = traj
        .times
        .par_windows(2)
        .map(|w| integrate_piecewise(traj, |t| traj.phase_rate_at(t), w[0], w[1], per_interval))
        .collect();
    let mut phi = Vec::with_capacity(n);
    phi.push(0.0);
    for inc in increments {
        let last = *phi.last().unwrap();
        phi.push(last + inc);
    }
    Ok(PhaseCurve { times: traj.times.clone(), phi, rate: traj.phase_rates() })
}

/// φ±^(g) = ±Φ(t)/2.
pub fn vacuum_phase(traj: &MomentumTrajectory, t: f64, hand: Handedness) -> Result<f64> {
    Ok(hand.sign() * 0.5 * geometric_phase(traj, t)?)
}

/// ∫₀ᵗ [cosλ cosθ + sinλ sinθ cos(γ − φ)] dt′ per unit σ, with θ, φ the
/// direction angles of the effective field. Degenerate stretches contribute 0.
pub fn dynamical_phase_residual(traj: &MomentumTrajectory, t: f64) -> Result<f64> {
    dynamical_phase_residual_with(traj, t, &Tolerances::default())
}

pub fn dynamical_phase_residual_with(traj: &MomentumTrajectory, t: f64, tol: &Tolerances) -> Result<f64> {
    traj.check_time(t)?;
    let integrand = |s: f64| {
        let (k, kd) = traj.kinematics(s);
        let field = EffectiveField::from_kinematics(&k, &kd, tol.degenerate_field);
        let (lambda, gamma) = spherical_angles(&k);
        field_angle_integrand(lambda, gamma, &field)
    };
    Ok(integrate_piecewise(traj, integrand, 0.0, t, tol.quadrature))
}

/// H_eff = b·J with the full (unnormalized) field.
pub fn h_eff_matrix(rep: &AngularMomentumRep, field: &EffectiveField) -> ComplexMatrix {
    rep.dot(&field.b)
}

fn h_eff_at(rep: &AngularMomentumRep, traj: &MomentumTrajectory, t: f64) -> ComplexMatrix {
    let (k, kd) = traj.kinematics(t);
    rep.dot(&k.cross(&kd))
}

/// V for the direction k̂, i.e. V(λ, γ) with λ, γ the spherical angles of k̂.
pub fn v_for_direction(rep: &AngularMomentumRep, khat: &Vec3) -> Result<ComplexMatrix> {
    let (lambda, gamma) = spherical_angles(khat);
    build_v(rep, lambda, gamma)
}

/// V(t)·exp(−iΦJ₃)·V(0)† given a precomputed Φ.
pub fn analytic_propagator_from_phase(
    rep: &AngularMomentumRep,
    khat_t: &Vec3,
    khat_0: &Vec3,
    phi: f64,
) -> Result<ComplexMatrix> {
    let vt = v_for_direction(rep, khat_t)?;
    let v0 = v_for_direction(rep, khat_0)?;
    Ok(&(&vt * &rep.j3_phase(phi)) * &v0.adjoint())
}

/// Chronological-product-free propagator U(t) = V(t)·exp(−iΦ(t)J₃)·V(0)†.
/// When the trajectory starts at the north pole V(0) = I and U(0) = I.
pub fn analytic_propagator(rep: &AngularMomentumRep, traj: &MomentumTrajectory, t: f64) -> Result<ComplexMatrix> {
    let phi = geometric_phase(traj, t)?;
    analytic_propagator_from_phase(rep, &traj.khat_at(t), &traj.khat_at(0.0), phi)
}

/// Time-ordered product of midpoint exponentials exp(−iH(t_mid)Δt),
/// earliest factor rightmost.
pub fn oracle_propagator(
    rep: &AngularMomentumRep,
    traj: &MomentumTrajectory,
    t: f64,
    n_steps: usize,
) -> Result<ComplexMatrix> {
    Ok(oracle_checkpoints(rep, traj, t, n_steps, 1)?.pop().unwrap())
}

/// Oracle propagator sampled at `checkpoints + 1` evenly spaced times
/// 0, t/checkpoints, …, t. `n_steps` must be a multiple of `checkpoints`.
pub fn oracle_checkpoints(
    rep: &AngularMomentumRep,
    traj: &MomentumTrajectory,
    t: f64,
    n_steps: usize,
    checkpoints: usize,
) -> Result<Vec<ComplexMatrix>> {
    if n_steps == 0 || checkpoints == 0 || n_steps % checkpoints != 0 {
        return Err(FiberError::InvalidArgument(format!(
            "n_steps ({n_steps}) must be a positive multiple of checkpoints ({checkpoints})"
        )));
    }
    traj.check_time(t)?;
    let dt = t / n_steps as f64;
    let every = n_steps / checkpoints;
    let mut u = ComplexMatrix::identity(rep.dim());
    let mut out = Vec::with_capacity(checkpoints + 1);
    out.push(u.clone());
    for step in 0..n_steps {
        let mid = (step as f64 + 0.5) * dt;
        let generator = h_eff_at(rep, traj, mid).scale(NEG_I * dt);
        u = &mat_exp(&generator)? * &u;
        if (step + 1) % every == 0 {
            out.push(u.clone());
        }
    }
    Ok(out)
}

/// Σ_σ C_σ e^{−iσΦ(t)} V(t)|σ⟩, with C_σ the amplitudes on the initial
/// invariant eigenstates V(0)|σ⟩. Returns J₃-basis components.
pub fn evolve_state(
    rep: &AngularMomentumRep,
    traj: &MomentumTrajectory,
    initial: &[(f64, Complex64)],
    t: f64,
) -> Result<ComplexVector> {
    let coefficients = coefficient_vector(rep, initial, Tolerances::default().unit_norm)?;
    let phi = geometric_phase(traj, t)?;
    let vt = v_for_direction(rep, &traj.khat_at(t))?;
    Ok(vt.mul_vec(&rep.j3_phase(phi).mul_vec(&coefficients)))
}

/// Dense coefficient vector from (σ, C_σ) pairs; requires Σ|C_σ|² = 1.
pub fn coefficient_vector(rep: &AngularMomentumRep, initial: &[(f64, Complex64)], tol: f64) -> Result<ComplexVector> {
    let mut c = DVector::<Complex64>::zeros(rep.dim());
    for &(sigma, amp) in initial {
        let idx = rep.spin.index_of(sigma)?;
        if c[idx] != Complex64::new(0.0, 0.0) {
            return Err(FiberError::InvalidArgument(format!("sigma = {sigma} given twice")));
        }
        c[idx] = amp;
    }
    let norm = c.norm();
    if !norm.is_finite() || (norm * norm - 1.0).abs() > tol {
        return Err(FiberError::NotNormalized { norm, tolerance: tol });
    }
    Ok(c)
}

/// max-entry norm of ∂I/∂t + (1/i)[I, H_eff] with I = k̂·J, ∂I/∂t by central
/// difference of step h.
pub fn invariant_residual(rep: &AngularMomentumRep, traj: &MomentumTrajectory, t: f64, h: f64) -> f64 {
    let i_plus = rep.dot(&traj.khat_at(t + h));
    let i_minus = rep.dot(&traj.khat_at(t - h));
    let d_i = (&i_plus - &i_minus).scale_real(0.5 / h);
    let inv = rep.dot(&traj.khat_at(t));
    let h_eff = h_eff_at(rep, traj, t);
    let comm = ComplexMatrix::commutator(&inv, &h_eff).scale(NEG_I);
    (&d_i + &comm).max_abs()
}

/// max-entry norm of V†H_eff V − iV†V̇ − γ̇(1 − cosλ)J₃, V̇ by central difference.
pub fn h_v_identity_residual(rep: &AngularMomentumRep, traj: &MomentumTrajectory, t: f64, h: f64) -> Result<f64> {
    let (k, kd) = traj.kinematics(t);
    let v = v_for_direction(rep, &k)?;
    let v_plus = v_for_direction(rep, &traj.khat_at(t + h))?;
    let v_minus = v_for_direction(rep, &traj.khat_at(t - h))?;
    let v_dot = (&v_plus - &v_minus).scale_real(0.5 / h);
    let vd = v.adjoint();
    let h_eff = rep.dot(&k.cross(&kd));
    let transformed = &(&vd * &h_eff) * &v;
    let gauge = (&vd * &v_dot).scale(Complex64::new(0.0, 1.0));
    let h_v = &transformed - &gauge;
    let expected = rep.j3.scale_real(phase_rate(&k, &kd));
    Ok((&h_v - &expected).max_abs())
}

/// Grid maximum of [`invariant_residual`].
pub fn max_invariant_residual(rep: &AngularMomentumRep, traj: &MomentumTrajectory, h: f64) -> f64 {
    traj.times
        .par_iter()
        .map(|&t| invariant_residual(rep, traj, t, h))
        .reduce(|| 0.0, f64::max)
}

/// Grid maximum of [`h_v_identity_residual`].
pub fn max_h_v_identity_residual(rep: &AngularMomentumRep, traj: &MomentumTrajectory, h: f64) -> Result<f64> {
    traj.ensure_clear_of_south_pole(Tolerances::default().south_pole)?;
    let values: Result<Vec<f64>> = traj
        .times
        .par_iter()
        .map(|&t| h_v_identity_residual(rep, traj, t, h))
        .collect();
    Ok(values?.into_iter().fold(0.0, f64::max))
}

/// |⟨σ, k̂(t)|U|σ, k̂(0)⟩| − 1 for every σ, maximized in absolute value.
pub fn eigenstate_persistence_defect(
    rep: &AngularMomentumRep,
    u: &ComplexMatrix,
    khat_t: &Vec3,
    khat_0: &Vec3,
) -> Result<f64> {
    let vt = v_for_direction(rep, khat_t)?;
    let v0 = v_for_direction(rep, khat_0)?;
    let m = &(&vt.adjoint() * u) * &v0;
    Ok((0..rep.dim()).map(|i| (m.get(i, i).norm() - 1.0).abs()).fold(0.0, f64::max))
}

/// Analytic and oracle propagators side by side on a set of checkpoints.
#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    pub phi: Vec<f64>,
    pub u_analytic: Vec<ComplexMatrix>,
    pub u_oracle: Vec<ComplexMatrix>,
    /// Analytic state for each σ started in V(0)|σ⟩, per checkpoint.
    pub states: Vec<Vec<ComplexVector>>,
    /// max over checkpoints of ‖U_analytic − U_oracle‖_F
    pub fidelity_deficit: f64,
    /// Grid maximum of the invariant-equation residual.
    pub invariant_residual: f64,
    /// Largest ‖U†U − I‖ over both propagator series.
    pub unitarity_defect: f64,
}

pub fn evolve(
    rep: &AngularMomentumRep,
    traj: &MomentumTrajectory,
    oracle_steps: usize,
    checkpoints: usize,
    tol: &Tolerances,
) -> Result<EvolutionResult> {
    traj.ensure_clear_of_south_pole(tol.south_pole)?;
    let t_end = traj.duration();
    let times: Vec<f64> = (0..=checkpoints).map(|c| t_end * c as f64 / checkpoints as f64).collect();
    let k0 = traj.khat_at(0.0);

    let mut phi = Vec::with_capacity(times.len());
    phi.push(0.0);
    for w in times.windows(2) {
        let last = *phi.last().unwrap();
        phi.push(last + geometric_phase_between(traj, w[0], w[1], tol)?);
    }

    let u_analytic: Vec<ComplexMatrix> = times
        .iter()
        .zip(&phi)
        .map(|(&t, &p)| analytic_propagator_from_phase(rep, &traj.khat_at(t), &k0, p))
        .collect::<Result<_>>()?;
    let u_oracle = oracle_checkpoints(rep, traj, t_end, oracle_steps, checkpoints)?;

    let v0 = v_for_direction(rep, &k0)?;
    let states = u_analytic
        .iter()
        .map(|u| {
            (0..rep.dim())
                .map(|i| {
                    let mut e = DVector::<Complex64>::zeros(rep.dim());
                    e[i] = Complex64::new(1.0, 0.0);
                    u.mul_vec(&v0.mul_vec(&e))
                })
                .collect()
        })
        .collect();

    let fidelity_deficit = u_analytic
        .iter()
        .zip(&u_oracle)
        .map(|(a, o)| (a - o).frobenius())
        .fold(0.0, f64::max);
    let unitarity_defect = u_analytic
        .iter()
        .chain(&u_oracle)
        .map(ComplexMatrix::unitarity_defect)
        .fold(0.0, f64::max);

    Ok(EvolutionResult {
        times,
        phi,
        u_analytic,
        u_oracle,
        states,
        fidelity_deficit,
        invariant_residual: max_invariant_residual(rep, traj, tol.fd_step),
        unitarity_defect,
    })
}
