//! Interpolating cubic splines through 3D points and their arc-length
//! reparametrization.
//!
//! Open curves use not-a-knot end conditions, closed curves are periodic.
//! The spline parameter is cumulative chord length.

use nalgebra::Vector3;

use crate::error::{FiberError, Result};

// 5-point Gauss-Legendre nodes and weights on [-1, 1].
const GL_NODES: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
    0.236_926_885_056_189_1,
];
// Each knot interval is split into this many sub-panels for arc length.
const ARC_PANELS: usize = 4;

#[derive(Debug, Clone)]
pub struct CubicSpline3 {
    knots: Vec<f64>,
    points: Vec<Vector3<f64>>,
    second: Vec<Vector3<f64>>,
    closed: bool,
    /// Arc length at each knot.
    arc: Vec<f64>,
}

/// Position, first and second parameter derivatives at one parameter value.
#[derive(Debug, Clone, Copy)]
pub struct SplinePoint {
    pub position: Vector3<f64>,
    pub d1: Vector3<f64>,
    pub d2: Vector3<f64>,
}

impl CubicSpline3 {
    pub fn new(points: &[Vector3<f64>], closed: bool) -> Result<Self> {
        if points.len() < 4 {
            return Err(FiberError::InvalidPath(format!(
                "samples need at least 4 points, got {}",
                points.len()
            )));
        }
        let mut pts: Vec<Vector3<f64>> = points.to_vec();
        if closed {
            // Drop an explicit repeat of the first point.
            if (pts[0] - pts[pts.len() - 1]).norm() == 0.0 {
                pts.pop();
            }
            if pts.len() < 4 {
                return Err(FiberError::InvalidPath("closed samples need at least 4 distinct points".into()));
            }
            pts.push(pts[0]);
        }
        let mut knots = Vec::with_capacity(pts.len());
        knots.push(0.0);
        for (i, w) in pts.windows(2).enumerate() {
            let h = (w[1] - w[0]).norm();
            if !h.is_finite() {
                return Err(FiberError::InvalidPath("non-finite sample coordinates".into()));
            }
            if h == 0.0 {
                return Err(FiberError::InvalidPath(format!("samples {i} and {} coincide", i + 1)));
            }
            knots.push(knots[i] + h);
        }
        let second = if closed {
            periodic_second_derivatives(&knots, &pts)
        } else {
            not_a_knot_second_derivatives(&knots, &pts)
        };
        let mut spline = Self { knots, points: pts, second, closed, arc: Vec::new() };
        spline.arc = spline.knot_arc_lengths();
        Ok(spline)
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn total_length(&self) -> f64 {
        *self.arc.last().unwrap()
    }

    pub fn param_range(&self) -> (f64, f64) {
        (self.knots[0], *self.knots.last().unwrap())
    }

    pub fn knot_count(&self) -> usize {
        self.knots.len()
    }

    /// Arc length at every knot (for breakpoints).
    pub fn knot_arc(&self) -> &[f64] {
        &self.arc
    }

    fn segment_of(&self, u: f64) -> usize {
        let last = self.knots.len() - 2;
        if u <= self.knots[0] {
            return 0;
        }
        if u >= self.knots[last + 1] {
            return last;
        }
        self.knots.partition_point(|&k| k <= u).saturating_sub(1).min(last)
    }

    /// Evaluates the spline; outside the knot range the end cubics extrapolate.
    pub fn eval(&self, u: f64) -> SplinePoint {
        let i = self.segment_of(u);
        let h = self.knots[i + 1] - self.knots[i];
        let a = (self.knots[i + 1] - u) / h;
        let b = (u - self.knots[i]) / h;
        let (p0, p1) = (self.points[i], self.points[i + 1]);
        let (m0, m1) = (self.second[i], self.second[i + 1]);
        let position = p0 * a + p1 * b + (m0 * (a * a * a - a) + m1 * (b * b * b - b)) * (h * h / 6.0);
        let d1 = (p1 - p0) / h + (m1 * (3.0 * b * b - 1.0) - m0 * (3.0 * a * a - 1.0)) * (h / 6.0);
        let d2 = m0 * a + m1 * b;
        SplinePoint { position, d1, d2 }
    }

    fn speed(&self, u: f64) -> f64 {
        self.eval(u).d1.norm()
    }

    fn gauss_length(&self, u0: f64, u1: f64) -> f64 {
        let half = 0.5 * (u1 - u0);
        let mid = 0.5 * (u1 + u0);
        GL_NODES
            .iter()
            .zip(GL_WEIGHTS)
            .map(|(x, w)| w * self.speed(mid + half * x))
            .sum::<f64>()
            * half
    }

    fn panel_length(&self, u0: f64, u1: f64) -> f64 {
        let step = (u1 - u0) / ARC_PANELS as f64;
        (0..ARC_PANELS)
            .map(|p| self.gauss_length(u0 + step * p as f64, u0 + step * (p + 1) as f64))
            .sum()
    }

    fn knot_arc_lengths(&self) -> Vec<f64> {
        let mut arc = Vec::with_capacity(self.knots.len());
        arc.push(0.0);
        for w in self.knots.windows(2) {
            let prev = *arc.last().unwrap();
            arc.push(prev + self.panel_length(w[0], w[1]));
        }
        arc
    }

    /// Arc length from the start to parameter `u`.
    pub fn arc_length_at(&self, u: f64) -> f64 {
        let i = self.segment_of(u);
        self.arc[i] + self.panel_length(self.knots[i], u)
    }

    /// Inverse of `arc_length_at`: the parameter reached after arc length `s`.
    /// Open curves extrapolate the end cubics beyond [0, L]; closed curves wrap
    /// back into the knot range.
    pub fn param_at_arc(&self, s: f64) -> f64 {
        let total = self.total_length();
        let s = if self.closed { s.rem_euclid(total) } else { s };
        let i = if s <= 0.0 {
            0
        } else if s >= total {
            self.knots.len() - 2
        } else {
            self.arc.partition_point(|&a| a <= s).saturating_sub(1).min(self.knots.len() - 2)
        };
        let (k0, k1) = (self.knots[i], self.knots[i + 1]);
        let (a0, a1) = (self.arc[i], self.arc[i + 1]);
        let mut u = k0 + (s - a0) / (a1 - a0) * (k1 - k0);
        for _ in 0..50 {
            let err = self.arc[i] + self.panel_length(k0, u) - s;
            let sp = self.speed(u);
            let du = err / sp;
            u -= du;
            if du.abs() <= 1e-15 * (1.0 + u.abs()) {
                break;
            }
        }
        u
    }

    /// Largest turning angle between consecutive chords, with its sample index.
    pub fn max_chord_turn(&self) -> (usize, f64) {
        let chords: Vec<Vector3<f64>> = self.points.windows(2).map(|w| (w[1] - w[0]).normalize()).collect();
        let mut worst = (0, 0.0);
        let mut consider = |idx: usize, a: &Vector3<f64>, b: &Vector3<f64>| {
            let angle = a.cross(b).norm().atan2(a.dot(b));
            if angle > worst.1 {
                worst = (idx, angle);
            }
        };
        for (i, w) in chords.windows(2).enumerate() {
            consider(i + 1, &w[0], &w[1]);
        }
        if self.closed {
            consider(0, chords.last().unwrap(), &chords[0]);
        }
        worst
    }
}

/// Solves a tridiagonal system in place (Thomas algorithm).
fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[Vector3<f64>]) -> Vec<Vector3<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![Vector3::zeros(); n];
    c[0] = if n > 1 { upper[0] / diag[0] } else { 0.0 };
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - lower[i] * c[i - 1];
        if i < n - 1 {
            c[i] = upper[i] / denom;
        }
        d[i] = (rhs[i] - d[i - 1] * lower[i]) / denom;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] -= next * c[i];
    }
    x
}

fn divided(knots: &[f64], pts: &[Vector3<f64>], i: usize) -> Vector3<f64> {
    (pts[i + 1] - pts[i]) / (knots[i + 1] - knots[i])
}

/// Second derivatives M₀…M_{n−1} with not-a-knot ends (third derivative
/// continuous across the second and second-to-last knots).
fn not_a_knot_second_derivatives(knots: &[f64], pts: &[Vector3<f64>]) -> Vec<Vector3<f64>> {
    let n = pts.len();
    let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
    // Unknowns M₁…M_{n−2}; M₀ and M_{n−1} are eliminated afterwards.
    let m = n - 2;
    let mut lower = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut upper = vec![0.0; m];
    let mut rhs = vec![Vector3::zeros(); m];
    for r in 0..m {
        let i = r + 1;
        lower[r] = h[i - 1];
        diag[r] = 2.0 * (h[i - 1] + h[i]);
        upper[r] = h[i];
        rhs[r] = (divided(knots, pts, i) - divided(knots, pts, i - 1)) * 6.0;
    }
    // M₀ = (1 + h₀/h₁)M₁ − (h₀/h₁)M₂
    let (h0, h1) = (h[0], h[1]);
    diag[0] += h0 * (1.0 + h0 / h1);
    if m > 1 {
        upper[0] -= h0 * h0 / h1;
    }
    // M_{n−1} = (1 + h_{n−2}/h_{n−3})M_{n−2} − (h_{n−2}/h_{n−3})M_{n−3}
    let (hl, hp) = (h[n - 2], h[n - 3]);
    diag[m - 1] += hl * (1.0 + hl / hp);
    if m > 1 {
        lower[m - 1] -= hl * hl / hp;
    }
    let inner = solve_tridiagonal(&lower, &diag, &upper, &rhs);
    let mut second = Vec::with_capacity(n);
    let first = if m > 1 {
        inner[0] * (1.0 + h0 / h1) - inner[1] * (h0 / h1)
    } else {
        inner[0]
    };
    second.push(first);
    second.extend_from_slice(&inner);
    let last = if m > 1 {
        inner[m - 1] * (1.0 + hl / hp) - inner[m - 2] * (hl / hp)
    } else {
        inner[0]
    };
    second.push(last);
    second
}

/// Periodic second derivatives; `pts` repeats its first point at the end.
fn periodic_second_derivatives(knots: &[f64], pts: &[Vector3<f64>]) -> Vec<Vector3<f64>> {
    let n = pts.len() - 1; // distinct points
    let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
    let hm = |i: usize| h[(i + n - 1) % n];
    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let mut rhs = vec![Vector3::zeros(); n];
    for i in 0..n {
        lower[i] = hm(i);
        diag[i] = 2.0 * (hm(i) + h[i]);
        upper[i] = h[i];
        let prev = divided(knots, pts, (i + n - 1) % n);
        rhs[i] = (divided(knots, pts, i) - prev) * 6.0;
    }
    // Cyclic tridiagonal via Sherman-Morrison: corners are lower[0] and upper[n−1].
    let alpha = upper[n - 1];
    let beta = lower[0];
    let gamma = -diag[0];
    let mut diag_mod = diag.clone();
    diag_mod[0] -= gamma;
    diag_mod[n - 1] -= alpha * beta / gamma;
    let mut lower_mod = lower.clone();
    lower_mod[0] = 0.0;
    let mut upper_mod = upper.clone();
    upper_mod[n - 1] = 0.0;
    let x = solve_tridiagonal(&lower_mod, &diag_mod, &upper_mod, &rhs);
    let mut u = vec![Vector3::zeros(); n];
    u[0] = Vector3::repeat(gamma);
    u[n - 1] = Vector3::repeat(alpha);
    let z = solve_tridiagonal(&lower_mod, &diag_mod, &upper_mod, &u);
    // All three coordinates share the same z (u is coordinate-independent).
    let zf: Vec<f64> = z.iter().map(|v| v.x).collect();
    let denom = 1.0 + zf[0] + beta * zf[n - 1] / gamma;
    let mut out: Vec<Vector3<f64>> = (0..n)
        .map(|i| {
            let fact = (x[0] + x[n - 1] * (beta / gamma)) / denom;
            x[i] - fact * zf[i]
        })
        .collect();
    out.push(out[0]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn circle(n: usize, r: f64) -> Vec<Vector3<f64>> {
        (0..n)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / n as f64;
                Vector3::new(r * t.cos(), r * t.sin(), 0.0)
            })
            .collect()
    }

    #[test]
    fn not_a_knot_is_exact_for_cubics() {
        // With not-a-knot ends a single cubic is reproduced exactly, so the
        // second derivatives at the knots equal f''(x) = 6x − 4.
        let knots = [0.0, 0.4, 1.1, 1.5, 2.6, 3.0];
        let f = |x: f64| x * x * x - 2.0 * x * x + 0.5;
        let pts: Vec<Vector3<f64>> = knots.iter().map(|&x| Vector3::new(f(x), -f(x), 0.0)).collect();
        let m = not_a_knot_second_derivatives(&knots, &pts);
        for (x, mi) in knots.iter().zip(&m) {
            assert!((mi.x - (6.0 * x - 4.0)).abs() < 1e-11, "{x}: {}", mi.x);
            assert!((mi.y + (6.0 * x - 4.0)).abs() < 1e-11);
        }
    }

    #[test]
    fn straight_samples_have_zero_curvature() {
        let pts: Vec<Vector3<f64>> = (0..6).map(|i| Vector3::new(i as f64, 2.0 * i as f64, 0.0)).collect();
        let sp = CubicSpline3::new(&pts, false).unwrap();
        for m in &sp.second {
            assert!(m.norm() < 1e-12);
        }
        assert!((sp.total_length() - 5.0 * 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn periodic_circle_length_and_tangent() {
        let r = 2.0;
        let sp = CubicSpline3::new(&circle(256, r), true).unwrap();
        assert!((sp.total_length() - 2.0 * PI * r).abs() < 1e-6);
        for k in 0..20 {
            let s = sp.total_length() * k as f64 / 20.0;
            let u = sp.param_at_arc(s);
            assert!((sp.arc_length_at(u) - s).abs() < 1e-10);
            let p = sp.eval(u);
            assert!((p.position.norm() - r).abs() < 1e-7);
            assert!(p.d1.normalize().dot(&p.position.normalize()).abs() < 1e-6);
        }
    }

    #[test]
    fn closed_wraps_arc_length() {
        let sp = CubicSpline3::new(&circle(64, 1.0), true).unwrap();
        let l = sp.total_length();
        let a = sp.eval(sp.param_at_arc(0.3)).position;
        let b = sp.eval(sp.param_at_arc(0.3 + l)).position;
        assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn rejects_short_and_duplicate() {
        let p = Vector3::new(0.0, 0.0, 0.0);
        assert!(CubicSpline3::new(&[p, p + Vector3::x(), p + 2.0 * Vector3::x()], false).is_err());
        let dup = vec![p, p + Vector3::x(), p + Vector3::x(), p + 3.0 * Vector3::x()];
        assert!(CubicSpline3::new(&dup, false).is_err());
    }

    #[test]
    fn chord_turn_detects_corner() {
        let pts: Vec<Vector3<f64>> = vec![
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(2.0, 0.0, 0.0),
            Vector3::new(2.0, 1.0, 0.0),
            Vector3::new(2.0, 2.0, 0.0),
        ];
        let sp = CubicSpline3::new(&pts, false).unwrap();
        let (idx, angle) = sp.max_chord_turn();
        assert_eq!(idx, 2);
        assert!((angle - PI / 2.0).abs() < 1e-12);
    }
}
