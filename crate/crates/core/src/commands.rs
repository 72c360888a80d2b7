//! The three batch commands behind the `fiberphase` binary.
//!
//! Each command turns a validated [`RunConfig`] into one or more named
//! [`Table`]s. Rows may be computed in parallel but are always assembled in
//! grid order, so output bytes depend only on the config.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::config::RunConfig;
use crate::error::FiberError;
use crate::evolution::{
    dynamical_phase_residual_with, eigenstate_persistence_defect, evolve, geometric_phase_between,
    max_h_v_identity_residual, max_invariant_residual, oracle_propagator, phase_curve, vacuum_phase, Handedness,
};
use crate::geometry::{field_angle_identity_residual, trajectory_from_path_with, verify_equation_of_motion, MomentumTrajectory};
use crate::helicity::{helicity_expectation_from_rate, helicity_expectation_matrix, inversion_scan, zeta_from_rate};
use crate::report::{Cell, Table};
use crate::spin_algebra::{build_rep, build_v, mat_exp, AngularMomentumRep, ComplexMatrix};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Numeric(FiberError),
}

impl RunError {
    /// 2 for configuration problems, 3 for numeric-domain failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numeric(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Config(_) => "config",
            RunError::Numeric(e) => e.kind(),
        }
    }
}

impl From<FiberError> for RunError {
    fn from(e: FiberError) -> Self {
        if e.is_input_error() {
            RunError::Config(e.to_string())
        } else {
            RunError::Numeric(e)
        }
    }
}

pub type RunResult<T> = std::result::Result<T, RunError>;

/// Named output tables; the name becomes the file stem.
#[derive(Debug, Clone)]
pub struct Report {
    pub tables: Vec<(String, Table)>,
}

impl Report {
    fn single(name: &str, table: Table) -> Self {
        Self { tables: vec![(name.to_owned(), table)] }
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }
}

fn trajectory(cfg: &RunConfig) -> RunResult<MomentumTrajectory> {
    Ok(trajectory_from_path_with(&cfg.path, cfg.n_samples, cfg.frame, &cfg.tolerances)?)
}

pub const SIMULATE_COLUMNS: [&str; 15] = [
    "t",
    "khat_x",
    "khat_y",
    "khat_z",
    "lambda",
    "gamma",
    "dPhi_dt",
    "Phi",
    "phase_sigma_plus",
    "phase_sigma_minus",
    "vac_phase_plus",
    "vac_phase_minus",
    "zeta",
    "helicity_plus",
    "helicity_minus",
];

/// Time series of direction, angles, phases and helicity on the sample grid.
pub fn simulate(cfg: &RunConfig) -> RunResult<Report> {
    let traj = trajectory(cfg)?;
    let curve = phase_curve(&traj, &cfg.tolerances)?;
    let k = cfg.wavenumber_k;
    let window = &cfg.simulate;
    let t_end = window.t_end.unwrap_or(f64::INFINITY);
    let last = traj.len() - 1;
    let picked: Vec<usize> = (0..traj.len())
        .filter(|&i| (i % window.stride == 0 || i == last) && traj.times[i] >= window.t_start && traj.times[i] <= t_end)
        .collect();

    let rows: Vec<Vec<Cell>> = picked
        .par_iter()
        .map(|&i| -> RunResult<Vec<Cell>> {
            let kh = traj.khat[i];
            let lambda = traj.lambda[i];
            let rate = curve.rate[i];
            let phi = curve.phi[i];
            let r = rate / k;
            let values = [
                traj.times[i],
                kh.x,
                kh.y,
                kh.z,
                lambda,
                traj.gamma[i],
                rate,
                phi,
                phi,
                -phi,
                0.5 * phi,
                -0.5 * phi,
                zeta_from_rate(lambda, r),
                helicity_expectation_from_rate(lambda, r, 1.0)?,
                helicity_expectation_from_rate(lambda, r, -1.0)?,
            ];
            Ok(values.into_iter().map(Cell::Float).collect())
        })
        .collect::<RunResult<_>>()?;

    let mut table = Table::new(SIMULATE_COLUMNS);
    for row in rows {
        table.push(row);
    }
    Ok(Report::single("simulate", table))
}

/// Outcome of the verification suite.
#[derive(Debug, Clone)]
pub struct Verification {
    pub report: Report,
    pub all_pass: bool,
}

struct Checks {
    table: Table,
    all_pass: bool,
}

impl Checks {
    fn new() -> Self {
        Self { table: Table::new(["name", "residual", "bound", "pass"]), all_pass: true }
    }

    fn add(&mut self, name: &str, residual: f64, bound: f64) {
        let pass = residual <= bound;
        self.record(name, residual, bound, pass);
    }

    fn record(&mut self, name: &str, residual: f64, bound: f64, pass: bool) {
        self.all_pass &= pass;
        self.table.push(vec![name.into(), residual.into(), bound.into(), pass.into()]);
    }
}

fn algebra_checks(checks: &mut Checks, rep: &AngularMomentumRep, cfg: &RunConfig) -> RunResult<()> {
    let tol = &cfg.tolerances;
    checks.add("rep_commutators", rep.commutator_defect(), tol.exact);
    checks.add("rep_casimir", rep.casimir_defect(), tol.exact);

    let grid: Vec<(f64, f64)> = (0..12)
        .flat_map(|i| (0..12).map(move |m| (std::f64::consts::PI * i as f64 / 12.0, std::f64::consts::TAU * m as f64 / 12.0)))
        .collect();
    let results: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&(lambda, gamma)| -> RunResult<(f64, f64)> {
            let v = build_v(rep, lambda, gamma)?;
            let axis = Vector3::new(lambda.sin() * gamma.cos(), lambda.sin() * gamma.sin(), lambda.cos());
            let conj = &(&v.adjoint() * &rep.dot(&axis)) * &v;
            Ok((v.unitarity_defect(), (&conj - &rep.j3).max_abs()))
        })
        .collect::<RunResult<_>>()?;
    let unitarity = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let conjugation = results.iter().map(|r| r.1).fold(0.0, f64::max);
    checks.add("v_unitarity", unitarity, tol.exact);
    checks.add("v_conjugation", conjugation, tol.conjugation);

    let dim = rep.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.verify.seed);
    let mut worst: f64 = 0.0;
    for _ in 0..cfg.verify.random_matrices {
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            entries[r * dim + r] = Complex64::new(0.0, rng.random_range(-1.0..1.0));
            for c in r + 1..dim {
                let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                entries[r * dim + c] = z;
                entries[c * dim + r] = -z.conj();
            }
        }
        let m = ComplexMatrix::from_row_major(dim, &entries)?;
        let product = &mat_exp(&m)? * &mat_exp(&m.scale_real(-1.0))?;
        worst = worst.max((&product - &ComplexMatrix::identity(dim)).max_abs());
    }
    checks.add("mat_exp_inverse", worst, tol.conjugation);
    Ok(())
}

fn geometry_checks(checks: &mut Checks, traj: &MomentumTrajectory, cfg: &RunConfig) -> RunResult<()> {
    let tol = &cfg.tolerances;
    let scale = traj.khat_dot.iter().map(|kd| kd.norm()).fold(1.0, f64::max);
    let unit = traj.khat.iter().map(|k| (k.norm() - 1.0).abs()).fold(0.0, f64::max);
    let ortho = traj.khat.iter().zip(&traj.khat_dot).map(|(k, kd)| k.dot(kd).abs()).fold(0.0, f64::max);
    checks.add("unit_norm", unit, tol.unit_norm);
    checks.add("tangent_orthogonality", ortho / scale, tol.unit_norm);
    checks.add("equation_of_motion", verify_equation_of_motion(traj) / scale, tol.unit_norm);
    checks.add("field_orthogonality", field_angle_identity_residual(traj, tol.degenerate_field), tol.unit_norm);
    Ok(())
}

fn phase_checks(checks: &mut Checks, traj: &MomentumTrajectory, cfg: &RunConfig) -> RunResult<()> {
    let tol = &cfg.tolerances;
    let t_end = traj.duration();
    checks.add("dynamical_phase", dynamical_phase_residual_with(traj, t_end, tol)?.abs(), tol.dynamical);

    let whole = geometric_phase_between(traj, 0.0, t_end, tol)?;
    let plus = vacuum_phase(traj, t_end, Handedness::Right)?;
    let minus = vacuum_phase(traj, t_end, Handedness::Left)?;
    checks.add("vacuum_cancellation", (plus + minus).abs(), tol.exact);
    checks.add("vacuum_half_phase", (plus - 0.5 * whole).abs().max((minus + 0.5 * whole).abs()), tol.exact.max(4.0 * tol.quadrature));

    let mid = 0.5 * t_end;
    let split = geometric_phase_between(traj, 0.0, mid, tol)? + geometric_phase_between(traj, mid, t_end, tol)?;
    checks.add("phase_additivity", (split - whole).abs(), 4.0 * tol.quadrature);

    // A rotation about ẑ keeps the south pole fixed, so Φ must not change.
    let rz = Matrix3::new_rotation(0.7);
    let rotation = Matrix3::new(rz[(0, 0)], rz[(0, 1)], 0.0, rz[(1, 0)], rz[(1, 1)], 0.0, 0.0, 0.0, 1.0);
    let rotated = geometric_phase_between(&traj.rotated(&rotation), 0.0, t_end, tol)?;
    checks.add("phase_azimuthal_gauge", (rotated - whole).abs(), 4.0 * tol.quadrature);
    Ok(())
}

fn propagator_checks(checks: &mut Checks, rep: &AngularMomentumRep, traj: &MomentumTrajectory, cfg: &RunConfig) -> RunResult<()> {
    let tol = &cfg.tolerances;
    let n = cfg.oracle_steps;
    let result = evolve(rep, traj, n, cfg.verify.checkpoints, tol)?;
    checks.add("propagator_unitarity", result.unitarity_defect, tol.conjugation);
    checks.add("oracle_equivalence", result.fidelity_deficit, tol.oracle);

    let t_end = traj.duration();
    let u_final = result.u_analytic.last().expect("at least one checkpoint");
    let coarse: Vec<f64> = [n / 4, n / 2]
        .par_iter()
        .map(|&steps| -> RunResult<f64> {
            let u = oracle_propagator(rep, traj, t_end, steps.max(1))?;
            Ok((&u - u_final).frobenius())
        })
        .collect::<RunResult<_>>()?;
    let fine = (result.u_oracle.last().expect("checkpoint") - u_final).frobenius();
    // Below ~1e-11 the error is roundoff, and the slope carries no information.
    if fine > 1e-11 && n >= 4 {
        let slope = 0.5 * ((coarse[0] / coarse[1]).log2() + (coarse[1] / fine).log2());
        checks.add("oracle_convergence_order", (slope - 2.0).abs(), 0.1);
    } else {
        checks.record("oracle_convergence_order", f64::NAN, 0.1, true);
    }

    let k0 = traj.khat_at(0.0);
    let persistence = result
        .times
        .iter()
        .zip(&result.u_analytic)
        .map(|(&t, u)| eigenstate_persistence_defect(rep, u, &traj.khat_at(t), &k0))
        .collect::<crate::Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    checks.add("eigenstate_persistence", persistence, tol.conjugation);

    let h = tol.fd_step * t_end.max(1.0);
    checks.add("invariant_equation", max_invariant_residual(rep, traj, h), tol.invariant);
    checks.add("h_v_identity", max_h_v_identity_residual(rep, traj, h)?, tol.h_v_identity);
    Ok(())
}

fn helicity_checks(checks: &mut Checks, traj: &MomentumTrajectory, cfg: &RunConfig) -> RunResult<()> {
    let photon = build_rep(1.0)?;
    let k = cfg.wavenumber_k;
    let stride = (traj.len() / 64).max(1);
    let mut consistency: f64 = 0.0;
    let mut symmetry: f64 = 0.0;
    let rates = traj.phase_rates();
    for i in (0..traj.len()).step_by(stride) {
        let lambda = traj.lambda[i];
        let r = rates[i] / k;
        let k_vec = (traj.khat[i] - Vector3::z() * r) * k;
        for sigma in [1.0, -1.0] {
            let closed = helicity_expectation_from_rate(lambda, r, sigma)?;
            let matrix = helicity_expectation_matrix(&photon, &photon.basis_state(sigma)?, &k_vec)?;
            consistency = consistency.max((closed - matrix).abs());
        }
        let plus = helicity_expectation_from_rate(lambda, r, 1.0)?;
        let minus = helicity_expectation_from_rate(lambda, r, -1.0)?;
        symmetry = symmetry.max((plus + minus).abs());
    }
    checks.add("helicity_consistency", consistency, cfg.tolerances.exact);
    checks.add("helicity_sign_symmetry", symmetry, cfg.tolerances.exact);
    Ok(())
}

/// Runs every property check on the configured path. Failing checks are
/// reported in the table; only numeric-domain problems abort.
pub fn verify(cfg: &RunConfig) -> RunResult<Verification> {
    if cfg.oracle_steps % cfg.verify.checkpoints != 0 {
        return Err(RunError::Config(format!(
            "oracle_steps ({}) must be a multiple of verify.checkpoints ({})",
            cfg.oracle_steps, cfg.verify.checkpoints
        )));
    }
    let rep = AngularMomentumRep::new(cfg.spin());
    let traj = trajectory(cfg)?;
    traj.ensure_clear_of_south_pole(cfg.tolerances.south_pole)?;
    let mut checks = Checks::new();
    algebra_checks(&mut checks, &rep, cfg)?;
    geometry_checks(&mut checks, &traj, cfg)?;
    phase_checks(&mut checks, &traj, cfg)?;
    propagator_checks(&mut checks, &rep, &traj, cfg)?;
    helicity_checks(&mut checks, &traj, cfg)?;
    Ok(Verification { report: Report::single("verify", checks.table), all_pass: checks.all_pass })
}

/// Helicity inversion scan plus the located zero crossings.
pub fn scan(cfg: &RunConfig) -> RunResult<Report> {
    let grid = cfg.scan.as_ref().ok_or_else(|| RunError::Config("scan command needs a \"scan\" block".into()))?;
    let result = inversion_scan(grid, cfg.wavenumber_k)?;
    let [first, second] = result.column_names;
    let mut table = Table::new([
        first,
        second,
        "zeta",
        "expectation_plus",
        "expectation_minus",
        "inverted_plus",
        "inverted_minus",
    ]);
    for row in &result.rows {
        table.push(vec![
            row.first.into(),
            row.second.into(),
            row.zeta.into(),
            row.expectation_plus.into(),
            row.expectation_minus.into(),
            row.inverted_plus.into(),
            row.inverted_minus.into(),
        ]);
    }
    // The outer loop runs over λ for rate grids and over a for helix grids.
    let (outer, inner) = if first == "a" { (first, second) } else { (second, first) };
    let mut crossings = Table::new([
        outer.to_owned(),
        format!("{inner}_lo"),
        format!("{inner}_hi"),
        format!("{inner}_root"),
    ]);
    for c in &result.crossings {
        crossings.push(vec![c.outer.into(), c.inner_lo.into(), c.inner_hi.into(), c.root.into()]);
    }
    Ok(Report { tables: vec![("scan".into(), table), ("scan_crossings".into(), crossings)] })
}
