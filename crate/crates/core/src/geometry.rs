//! Fiber curves and the photon momentum direction along them.
//!
//! The photon wave vector is tangent to the fiber everywhere and the photon
//! moves at unit speed (c = 1), so time equals arc length. A path is turned
//! into a [`MomentumTrajectory`]: the unit tangent k̂(t), its rate, the
//! spherical angles λ(t), γ(t) on a uniform grid, plus an evaluator for k̂ at
//! arbitrary times that the propagators and finite differences use.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix3, Rotation3, Unit, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{FiberError, Result};
use crate::spin_algebra::spherical_angles;
use crate::spline::CubicSpline3;
use crate::tolerances::Tolerances;

pub type Vec3 = Vector3<f64>;

/// Which helix rotation frequency drives γ̇.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaConvention {
    /// Ω = 2π/√(d² + (2πa)²): unit-speed traversal of the helix.
    #[default]
    Geometric,
    /// Ω = 2π/√(d² + (4πa)²), the frequency quoted for the helical fiber in
    /// the Chiao-Wu setting. Time is rescaled so γ̇ = Ω; it is then no longer
    /// arc length.
    Paper,
}

/// Orientation of the lab frame the trajectory is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FramePolicy {
    /// Use the curve's own coordinates (a helix keeps its axis along ẑ).
    #[default]
    Native,
    /// Rotate rigidly so the initial tangent is ẑ, giving λ(0) = 0 and V(0) = I.
    AlignInitialTangent,
}

/// One piece of a [`FiberPath::Segments`] path. Pieces join with a
/// continuous tangent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Segment {
    Line {
        length: f64,
    },
    /// Circular arc of the given radius turning the tangent by `angle` rad.
    /// The bending direction is the running normal rotated by `bank` rad
    /// about the tangent; nonzero banks make the path noncoplanar.
    Arc {
        radius: f64,
        angle: f64,
        #[serde(default)]
        bank: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FiberPath {
    /// Right-handed helix about ẑ starting at (a, 0, 0), pitch d per turn.
    Helix {
        radius: f64,
        pitch: f64,
        turns: f64,
        #[serde(default)]
        omega_convention: OmegaConvention,
    },
    /// Ordered sample points interpolated by a cubic spline.
    Samples {
        points: Vec<[f64; 3]>,
        #[serde(default)]
        closed: bool,
    },
    /// Lines and arcs chained with tangent continuity.
    Segments {
        #[serde(default = "default_direction")]
        initial_direction: [f64; 3],
        #[serde(default)]
        initial_normal: Option<[f64; 3]>,
        segments: Vec<Segment>,
    },
}

fn default_direction() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

impl FiberPath {
    pub fn helix(radius: f64, pitch: f64, turns: f64) -> Self {
        FiberPath::Helix { radius, pitch, turns, omega_convention: OmegaConvention::Geometric }
    }

    /// Straight fiber of the given length along `direction`.
    pub fn straight(direction: [f64; 3], length: f64) -> Self {
        FiberPath::Segments {
            initial_direction: direction,
            initial_normal: None,
            segments: vec![Segment::Line { length }],
        }
    }
}

/// Rotation frequency of the momentum direction on a helix.
pub fn helix_frequency(radius: f64, pitch: f64, convention: OmegaConvention) -> Result<f64> {
    if !(radius.is_finite() && pitch.is_finite()) || radius < 0.0 || pitch < 0.0 {
        return Err(FiberError::InvalidPath(format!(
            "helix radius and pitch must be finite and non-negative, got a = {radius}, d = {pitch}"
        )));
    }
    if radius == 0.0 && pitch == 0.0 {
        return Err(FiberError::DegenerateHelix);
    }
    let circumference = match convention {
        OmegaConvention::Geometric => TAU * radius,
        OmegaConvention::Paper => 2.0 * TAU * radius,
    };
    Ok(TAU / pitch.hypot(circumference))
}

/// Constant polar angle of a helix tangent about its axis, arctan(2πa/d).
pub fn helix_pitch_angle(radius: f64, pitch: f64) -> f64 {
    (TAU * radius).atan2(pitch)
}

/// Dimensionless rate of the geometric phase, γ̇(1 − cosλ), written in the
/// Cartesian form (k̂ₓk̂̇_y − k̂_y k̂̇ₓ)/(1 + k̂_z) that stays finite at λ = 0.
pub fn phase_rate(khat: &Vec3, khat_dot: &Vec3) -> f64 {
    (khat.x * khat_dot.y - khat.y * khat_dot.x) / (1.0 + khat.z)
}

#[derive(Debug, Clone)]
struct Piece {
    t_start: f64,
    t_end: f64,
    tangent: Vec3,
    normal: Vec3,
    curvature: f64,
}

impl Piece {
    fn eval(&self, t: f64) -> (Vec3, Vec3) {
        let tau = t - self.t_start;
        let (s, c) = (self.curvature * tau).sin_cos();
        let k = self.tangent * c + self.normal * s;
        let kd = (self.normal * c - self.tangent * s) * self.curvature;
        (k, kd)
    }
}

#[derive(Debug, Clone)]
enum TangentModel {
    Helix { lambda: f64, omega: f64, gamma0: f64 },
    Pieces(Vec<Piece>),
    Spline(Box<CubicSpline3>),
}

impl TangentModel {
    fn eval(&self, t: f64) -> (Vec3, Vec3) {
        match self {
            TangentModel::Helix { lambda, omega, gamma0 } => {
                let (sl, cl) = lambda.sin_cos();
                let (sg, cg) = (omega * t + gamma0).sin_cos();
                (Vec3::new(sl * cg, sl * sg, cl), Vec3::new(-sg, cg, 0.0) * (omega * sl))
            }
            TangentModel::Pieces(pieces) => {
                let idx = pieces.partition_point(|p| p.t_end <= t).min(pieces.len() - 1);
                pieces[idx].eval(t)
            }
            TangentModel::Spline(spline) => {
                let u = spline.param_at_arc(t);
                let p = spline.eval(u);
                let speed = p.d1.norm();
                let k = p.d1 / speed;
                let kd = (p.d2 - k * k.dot(&p.d2)) / (speed * speed);
                (k, kd)
            }
        }
    }
}

/// Time series of the photon momentum direction on a uniform grid.
#[derive(Debug, Clone)]
pub struct MomentumTrajectory {
    pub times: Vec<f64>,
    pub khat: Vec<Vec3>,
    pub khat_dot: Vec<Vec3>,
    pub lambda: Vec<f64>,
    /// Azimuth, unwrapped for continuity along the grid.
    pub gamma: Vec<f64>,
    pub lambda_dot: Vec<f64>,
    pub gamma_dot: Vec<f64>,
    /// Rigid rotation applied to the raw curve (identity for the native frame).
    pub frame_rotation: Matrix3<f64>,
    model: TangentModel,
    duration: f64,
    breakpoints: Vec<f64>,
}

/// Effective field b = k̂ × k̂̇ = (k × k̇)/k² with its direction angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveField {
    pub b: Vec3,
    /// Zero when the field is degenerate.
    pub b_hat: Vec3,
    pub theta: f64,
    pub phi: f64,
    pub magnitude: f64,
    pub degenerate: bool,
}

impl EffectiveField {
    pub fn from_kinematics(khat: &Vec3, khat_dot: &Vec3, threshold: f64) -> Self {
        let b = khat.cross(khat_dot);
        let magnitude = b.norm();
        if magnitude <= threshold {
            return Self { b, b_hat: Vec3::zeros(), theta: 0.0, phi: 0.0, magnitude, degenerate: true };
        }
        let b_hat = b / magnitude;
        let (theta, phi) = spherical_angles(&b_hat);
        Self { b, b_hat, theta, phi, magnitude, degenerate: false }
    }
}

pub fn trajectory_from_path(path: &FiberPath, n_samples: usize, frame: FramePolicy) -> Result<MomentumTrajectory> {
    trajectory_from_path_with(path, n_samples, frame, &Tolerances::default())
}

pub fn trajectory_from_path_with(
    path: &FiberPath,
    n_samples: usize,
    frame: FramePolicy,
    tol: &Tolerances,
) -> Result<MomentumTrajectory> {
    if n_samples < 16 {
        return Err(FiberError::InvalidArgument(format!("n_samples must be at least 16, got {n_samples}")));
    }
    let (model, duration, breakpoints) = build_model(path, tol)?;
    let (raw_k0, _) = model.eval(0.0);
    let frame_rotation = match frame {
        FramePolicy::Native => Matrix3::identity(),
        FramePolicy::AlignInitialTangent => align_to_z(&raw_k0),
    };

    Ok(MomentumTrajectory::sample(model, duration, breakpoints, frame_rotation, n_samples))
}

fn finite3(v: &[f64; 3]) -> bool {
    v.iter().all(|x| x.is_finite())
}

fn build_model(path: &FiberPath, tol: &Tolerances) -> Result<(TangentModel, f64, Vec<f64>)> {
    match path {
        FiberPath::Helix { radius, pitch, turns, omega_convention } => {
            let (a, d, n) = (*radius, *pitch, *turns);
            if !(a.is_finite() && d.is_finite() && n.is_finite()) || a <= 0.0 || d < 0.0 || n <= 0.0 {
                return Err(FiberError::InvalidPath(format!(
                    "helix needs a > 0, d >= 0, turns > 0; got a = {a}, d = {d}, turns = {n}"
                )));
            }
            let omega = helix_frequency(a, d, *omega_convention)?;
            let duration = n * TAU / omega;
            let model = TangentModel::Helix { lambda: helix_pitch_angle(a, d), omega, gamma0: PI / 2.0 };
            Ok((model, duration, vec![0.0, duration]))
        }
        FiberPath::Samples { points, closed } => {
            if points.iter().any(|p| !finite3(p)) {
                return Err(FiberError::InvalidPath("non-finite sample coordinates".into()));
            }
            let pts: Vec<Vec3> = points.iter().map(|p| Vec3::new(p[0], p[1], p[2])).collect();
            if pts.len() >= 2 && pts.windows(2).all(|w| w[0] == w[1]) {
                return Err(FiberError::DegeneratePath);
            }
            let spline = CubicSpline3::new(&pts, *closed)?;
            let (index, angle) = spline.max_chord_turn();
            if angle > tol.max_chord_turn {
                return Err(FiberError::Kinked { index, angle });
            }
            let duration = spline.total_length();
            let breakpoints = spline.knot_arc().to_vec();
            Ok((TangentModel::Spline(Box::new(spline)), duration, breakpoints))
        }
        FiberPath::Segments { initial_direction, initial_normal, segments } => {
            if segments.is_empty() {
                return Err(FiberError::InvalidPath("segments list is empty".into()));
            }
            if !finite3(initial_direction) {
                return Err(FiberError::InvalidPath("non-finite initial direction".into()));
            }
            let dir = Vec3::from_column_slice(initial_direction);
            if dir.norm() == 0.0 {
                return Err(FiberError::InvalidPath("initial direction is the zero vector".into()));
            }
            let mut tangent = dir.normalize();
            let mut normal = match initial_normal {
                Some(n) => {
                    let n = Vec3::from_column_slice(n);
                    let perp = n - tangent * tangent.dot(&n);
                    if !(perp.norm() > 1e-9) {
                        return Err(FiberError::InvalidPath("initial normal is parallel to the initial direction".into()));
                    }
                    perp.normalize()
                }
                None => any_perpendicular(&tangent),
            };
            let mut pieces = Vec::with_capacity(segments.len());
            let mut t = 0.0;
            for seg in segments {
                match *seg {
                    Segment::Line { length } => {
                        if !length.is_finite() || length < 0.0 {
                            return Err(FiberError::InvalidPath(format!("line length must be >= 0, got {length}")));
                        }
                        if length > 0.0 {
                            pieces.push(Piece { t_start: t, t_end: t + length, tangent, normal, curvature: 0.0 });
                            t += length;
                        }
                    }
                    Segment::Arc { radius, angle, bank } => {
                        if !(radius.is_finite() && radius > 0.0 && angle.is_finite() && angle >= 0.0 && bank.is_finite()) {
                            return Err(FiberError::InvalidPath(format!(
                                "arc needs radius > 0, angle >= 0 and finite bank; got radius = {radius}, angle = {angle}, bank = {bank}"
                            )));
                        }
                        let rot = Rotation3::from_axis_angle(&Unit::new_normalize(tangent), bank);
                        let bend = rot * normal;
                        let length = radius * angle;
                        if length > 0.0 {
                            let piece = Piece { t_start: t, t_end: t + length, tangent, normal: bend, curvature: 1.0 / radius };
                            let (s, c) = angle.sin_cos();
                            let new_tangent = tangent * c + bend * s;
                            normal = (bend * c - tangent * s).normalize();
                            tangent = new_tangent.normalize();
                            pieces.push(piece);
                            t += length;
                        } else {
                            normal = bend;
                        }
                    }
                }
            }
            if pieces.is_empty() || t <= 0.0 {
                return Err(FiberError::DegeneratePath);
            }
            let mut breakpoints: Vec<f64> = pieces.iter().map(|p| p.t_start).collect();
            breakpoints.push(t);
            Ok((TangentModel::Pieces(pieces), t, breakpoints))
        }
    }
}

fn any_perpendicular(t: &Vec3) -> Vec3 {
    let seed = if t.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    (seed - t * t.dot(&seed)).normalize()
}

/// Rotation taking the unit vector `from` onto ẑ.
fn align_to_z(from: &Vec3) -> Matrix3<f64> {
    let from = from.normalize();
    let axis = from.cross(&Vec3::z());
    let s = axis.norm();
    let c = from.z;
    if s < 1e-15 {
        if c > 0.0 {
            return Matrix3::identity();
        }
        return *Rotation3::from_axis_angle(&Vec3::x_axis(), PI).matrix();
    }
    *Rotation3::from_axis_angle(&Unit::new_normalize(axis), s.atan2(c)).matrix()
}

impl MomentumTrajectory {
    fn sample(
        model: TangentModel,
        duration: f64,
        breakpoints: Vec<f64>,
        frame_rotation: Matrix3<f64>,
        n_samples: usize,
    ) -> Self {
        let times: Vec<f64> = (0..n_samples)
            .map(|i| duration * i as f64 / (n_samples - 1) as f64)
            .collect();
        let mut khat = Vec::with_capacity(n_samples);
        let mut khat_dot = Vec::with_capacity(n_samples);
        let mut lambda = Vec::with_capacity(n_samples);
        let mut gamma: Vec<f64> = Vec::with_capacity(n_samples);
        let mut lambda_dot = Vec::with_capacity(n_samples);
        let mut gamma_dot = Vec::with_capacity(n_samples);

        for &t in &times {
            let (k, kd) = model.eval(t);
            let (k, kd) = (frame_rotation * k, frame_rotation * kd);
            let (lam, az) = spherical_angles(&k);
            let rho = k.x.hypot(k.y);
            let mut g = if rho > 1e-9 {
                az
            } else if kd.x.hypot(kd.y) > 0.0 {
                // At the pole γ follows the direction the tangent moves off in.
                let sign = if k.z >= 0.0 { 1.0 } else { -1.0 };
                (sign * kd.y).atan2(sign * kd.x)
            } else {
                gamma.last().copied().unwrap_or(0.0)
            };
            if let Some(&prev) = gamma.last() {
                g += TAU * ((prev - g) / TAU).round();
            }
            let (ld, gd) = if rho > 1e-9 {
                let rho_dot = (k.x * kd.x + k.y * kd.y) / rho;
                (k.z * rho_dot - rho * kd.z, (k.x * kd.y - k.y * kd.x) / (rho * rho))
            } else {
                (kd.x.hypot(kd.y) * k.z.signum(), 0.0)
            };
            khat.push(k);
            khat_dot.push(kd);
            lambda.push(lam);
            gamma.push(g);
            lambda_dot.push(ld);
            gamma_dot.push(gd);
        }

        MomentumTrajectory {
            times,
            khat,
            khat_dot,
            lambda,
            gamma,
            lambda_dot,
            gamma_dot,
            frame_rotation,
            model,
            duration,
            breakpoints,
        }
    }

    /// The same curve after an extra rigid rotation of the working frame,
    /// resampled on the same grid.
    pub fn rotated(&self, rotation: &Matrix3<f64>) -> MomentumTrajectory {
        MomentumTrajectory::sample(
            self.model.clone(),
            self.duration,
            self.breakpoints.clone(),
            rotation * self.frame_rotation,
            self.len(),
        )
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Times where the tangent model changes piece; phase integrals split here.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// k̂(t) and k̂̇(t) in the working frame. Times slightly outside
    /// [0, duration] extrapolate the end pieces (used by finite differences).
    pub fn kinematics(&self, t: f64) -> (Vec3, Vec3) {
        let (k, kd) = self.model.eval(t);
        (self.frame_rotation * k, self.frame_rotation * kd)
    }

    pub fn khat_at(&self, t: f64) -> Vec3 {
        self.kinematics(t).0
    }

    pub fn check_time(&self, t: f64) -> Result<()> {
        let slack = 1e-12 * self.duration.max(1.0);
        if !t.is_finite() || t < -slack || t > self.duration + slack {
            return Err(FiberError::TimeOutOfRange { t, duration: self.duration });
        }
        Ok(())
    }

    /// d/dt of γ(1 − cosλ) integrand at time t.
    pub fn phase_rate_at(&self, t: f64) -> f64 {
        let (k, kd) = self.kinematics(t);
        phase_rate(&k, &kd)
    }

    /// Phase rate on each grid sample.
    pub fn phase_rates(&self) -> Vec<f64> {
        self.khat.iter().zip(&self.khat_dot).map(|(k, kd)| phase_rate(k, kd)).collect()
    }

    /// Fails if any grid sample comes within `tol` of k̂ = −ẑ.
    pub fn ensure_clear_of_south_pole(&self, tol: f64) -> Result<()> {
        match self.khat.iter().zip(&self.times).find(|(k, _)| 1.0 + k.z <= tol) {
            Some((_, &t)) => Err(FiberError::SouthPole { t }),
            None => Ok(()),
        }
    }
}

pub fn effective_field(traj: &MomentumTrajectory, t: f64) -> Result<EffectiveField> {
    effective_field_with(traj, t, Tolerances::default().degenerate_field)
}

pub fn effective_field_with(traj: &MomentumTrajectory, t: f64, threshold: f64) -> Result<EffectiveField> {
    traj.check_time(t)?;
    let (k, kd) = traj.kinematics(t);
    Ok(EffectiveField::from_kinematics(&k, &kd, threshold))
}

/// max over the grid of ‖k̂̇ + k̂ × (k̂ × k̂̇)‖.
pub fn verify_equation_of_motion(traj: &MomentumTrajectory) -> f64 {
    traj.khat
        .iter()
        .zip(&traj.khat_dot)
        .map(|(k, kd)| (kd + k.cross(&k.cross(kd))).norm())
        .fold(0.0, f64::max)
}

/// max over the grid of |cosλ cosθ + sinλ sinθ cos(γ − φ)| at non-degenerate
/// field samples, evaluated from the angles themselves.
pub fn field_angle_identity_residual(traj: &MomentumTrajectory, threshold: f64) -> f64 {
    traj.khat
        .iter()
        .zip(&traj.khat_dot)
        .zip(traj.lambda.iter().zip(&traj.gamma))
        .filter_map(|((k, kd), (&lam, &gam))| {
            let f = EffectiveField::from_kinematics(k, kd, threshold);
            (!f.degenerate).then(|| field_angle_integrand(lam, gam, &f).abs())
        })
        .fold(0.0, f64::max)
}

/// cosλ cosθ + sinλ sinθ cos(γ − φ); zero for degenerate fields.
pub fn field_angle_integrand(lambda: f64, gamma: f64, field: &EffectiveField) -> f64 {
    if field.degenerate {
        return 0.0;
    }
    lambda.cos() * field.theta.cos() + lambda.sin() * field.theta.sin() * (gamma - field.phi).cos()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn helix_frequency_conventions() {
        let a = 0.7;
        assert!((helix_frequency(a, 0.0, OmegaConvention::Geometric).unwrap() - 1.0 / a).abs() < 1e-15);
        let d = 3.0;
        for conv in [OmegaConvention::Geometric, OmegaConvention::Paper] {
            let w = helix_frequency(1e-12, d, conv).unwrap();
            assert!((w - TAU / d).abs() < 1e-12);
        }
        let paper = helix_frequency(1.0, 1.0, OmegaConvention::Paper).unwrap();
        assert!((paper - TAU / (1.0 + 16.0 * PI * PI).sqrt()).abs() < 1e-15);
        // mpmath: 2π/√(1+16π²)
        assert!((paper - 0.498_424_336_075_164_55).abs() < 1e-15);
        assert_eq!(helix_frequency(0.0, 0.0, OmegaConvention::Paper), Err(FiberError::DegenerateHelix));
    }

    #[test]
    fn helix_has_constant_pitch_angle() {
        let traj = trajectory_from_path(&FiberPath::helix(1.0, 1.0, 2.5), 257, FramePolicy::Native).unwrap();
        let expected = (TAU).atan();
        let omega = helix_frequency(1.0, 1.0, OmegaConvention::Geometric).unwrap();
        for i in 0..traj.len() {
            assert!((traj.lambda[i] - expected).abs() < 1e-10);
            assert!((traj.gamma_dot[i] - omega).abs() < 1e-8);
            assert!((traj.khat[i].norm() - 1.0).abs() < 1e-12);
            assert!(traj.khat[i].dot(&traj.khat_dot[i]).abs() < 1e-12);
        }
        // Unwrapped γ keeps growing across turns.
        let span = traj.gamma.last().unwrap() - traj.gamma[0];
        assert!((span - 2.5 * TAU).abs() < 1e-9);
    }

    #[test]
    fn helix_duration_is_arc_length() {
        let (a, d) = (0.5, 2.0);
        let traj = trajectory_from_path(&FiberPath::helix(a, d, 1.0), 16, FramePolicy::Native).unwrap();
        assert!((traj.duration() - d.hypot(TAU * a)).abs() < 1e-12);
    }

    #[test]
    fn straight_line_along_z() {
        let traj = trajectory_from_path(&FiberPath::straight([0.0, 0.0, 1.0], 5.0), 32, FramePolicy::Native).unwrap();
        for i in 0..traj.len() {
            assert_eq!(traj.lambda[i], 0.0);
            assert_eq!(traj.gamma_dot[i], 0.0);
        }
        assert_eq!(verify_equation_of_motion(&traj), 0.0);
        let f = effective_field(&traj, 2.0).unwrap();
        assert!(f.degenerate);
        assert_eq!(f.b, Vec3::zeros());
    }

    #[test]
    fn planar_circle_samples() {
        let r = 1.5;
        let n = 400;
        let points: Vec<[f64; 3]> = (0..n)
            .map(|i| {
                let t = TAU * i as f64 / n as f64;
                [r * t.cos(), r * t.sin(), 0.0]
            })
            .collect();
        let traj = trajectory_from_path(&FiberPath::Samples { points, closed: true }, 256, FramePolicy::Native).unwrap();
        assert!((traj.duration() - TAU * r).abs() < 1e-6);
        for i in 0..traj.len() {
            assert!((traj.lambda[i] - PI / 2.0).abs() < 1e-12);
            // Spline curvature error is O(h²) at 400 samples.
            assert!((traj.gamma_dot[i] - 1.0 / r).abs() < 5e-5, "{}", traj.gamma_dot[i]);
            let f = EffectiveField::from_kinematics(&traj.khat[i], &traj.khat_dot[i], 1e-12);
            assert!((f.b - Vec3::z() / r).norm() < 5e-5);
        }
    }

    #[test]
    fn helix_field_matches_closed_form() {
        let (a, d) = (1.0, 1.0);
        let traj = trajectory_from_path(&FiberPath::helix(a, d, 1.0), 64, FramePolicy::Native).unwrap();
        let lam = helix_pitch_angle(a, d);
        let omega = helix_frequency(a, d, OmegaConvention::Geometric).unwrap();
        for &t in &[0.0, 0.37, 2.0, traj.duration()] {
            let f = effective_field(&traj, t).unwrap();
            let g = omega * t + PI / 2.0;
            let expected = Vec3::new(-lam.cos() * g.cos(), -lam.cos() * g.sin(), lam.sin()) * (omega * lam.sin());
            assert!((f.b - expected).norm() < 1e-14);
            assert!(f.b.dot(&traj.khat_at(t)).abs() < 1e-14);
            let back = Vec3::new(f.theta.sin() * f.phi.cos(), f.theta.sin() * f.phi.sin(), f.theta.cos());
            assert!((back - f.b_hat).norm() < 1e-12);
        }
        assert!(verify_equation_of_motion(&traj) <= 1e-12);
        assert!(field_angle_identity_residual(&traj, 1e-12) < 1e-12);
    }

    #[test]
    fn aligned_frame_starts_at_pole() {
        let traj = trajectory_from_path(&FiberPath::helix(1.0, 1.0, 1.0), 128, FramePolicy::AlignInitialTangent).unwrap();
        assert!((traj.khat[0] - Vec3::z()).norm() < 1e-12);
        assert!(traj.lambda[0].abs() < 1e-12);
        for w in traj.gamma.windows(2) {
            assert!((w[1] - w[0]).abs() < PI);
        }
        // γ(0) points along the first variation of the tangent.
        let kd = traj.khat_dot[0];
        assert!((traj.gamma[0] - kd.y.atan2(kd.x)).abs() < 1e-12);
        let r = traj.frame_rotation;
        assert!((r.transpose() * r - Matrix3::identity()).norm() < 1e-12);
    }

    #[test]
    fn aligned_frame_handles_antiparallel_start() {
        let traj = trajectory_from_path(&FiberPath::straight([0.0, 0.0, -1.0], 1.0), 16, FramePolicy::AlignInitialTangent).unwrap();
        assert!((traj.khat[5] - Vec3::z()).norm() < 1e-12);
    }

    #[test]
    fn segments_are_tangent_continuous() {
        let path = FiberPath::Segments {
            initial_direction: [0.0, 0.0, 1.0],
            initial_normal: Some([1.0, 0.0, 0.0]),
            segments: vec![
                Segment::Line { length: 1.0 },
                Segment::Arc { radius: 2.0, angle: 0.8, bank: 0.0 },
                Segment::Arc { radius: 1.0, angle: 0.5, bank: 1.2 },
                Segment::Line { length: 0.5 },
            ],
        };
        let traj = trajectory_from_path(&path, 64, FramePolicy::Native).unwrap();
        assert!((traj.duration() - (1.0 + 1.6 + 0.5 + 0.5)).abs() < 1e-12);
        for &tb in &traj.breakpoints()[1..traj.breakpoints().len() - 1] {
            let before = traj.khat_at(tb - 1e-12);
            let after = traj.khat_at(tb + 1e-12);
            assert!((before - after).norm() < 1e-9);
        }
        for k in &traj.khat {
            assert!((k.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_paths() {
        let bad_helix = FiberPath::helix(0.0, 1.0, 1.0);
        assert!(matches!(trajectory_from_path(&bad_helix, 32, FramePolicy::Native), Err(FiberError::InvalidPath(_))));
        let zero = FiberPath::straight([1.0, 0.0, 0.0], 0.0);
        assert_eq!(trajectory_from_path(&zero, 32, FramePolicy::Native).unwrap_err(), FiberError::DegeneratePath);
        let same = FiberPath::Samples { points: vec![[1.0, 2.0, 3.0]; 5], closed: false };
        assert_eq!(trajectory_from_path(&same, 32, FramePolicy::Native).unwrap_err(), FiberError::DegeneratePath);
        let kinked = FiberPath::Samples {
            points: vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [2.0, 1.0, 0.0], [2.0, 2.0, 0.0]],
            closed: false,
        };
        assert!(matches!(trajectory_from_path(&kinked, 32, FramePolicy::Native), Err(FiberError::Kinked { index: 2, .. })));
        let few = FiberPath::helix(1.0, 1.0, 1.0);
        assert!(matches!(trajectory_from_path(&few, 8, FramePolicy::Native), Err(FiberError::InvalidArgument(_))));
    }

    #[test]
    fn south_pole_detected() {
        let traj = trajectory_from_path(&FiberPath::straight([0.0, 0.0, -1.0], 1.0), 16, FramePolicy::Native).unwrap();
        assert!(matches!(traj.ensure_clear_of_south_pole(1e-9), Err(FiberError::SouthPole { .. })));
    }

    #[test]
    fn path_json_is_strict() {
        let ok: FiberPath = serde_json::from_str(r#"{"type":"helix","radius":1,"pitch":2,"turns":1}"#).unwrap();
        assert_eq!(ok, FiberPath::helix(1.0, 2.0, 1.0));
        let bad = serde_json::from_str::<FiberPath>(r#"{"type":"helix","radius":1,"pitch":2,"turns":1,"extra":0}"#);
        assert!(bad.is_err());
    }
}
