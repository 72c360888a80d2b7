//! Numerical tolerances shared by the property checks.
//!
//! All thresholds live in one record so that the verification suite, the
//! unit tests and the CLI read the same values.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Unit-vector normalization (|k̂| = 1, |n̂| = 1, state norm).
    pub unit_norm: f64,
    /// Exact-arithmetic matrix identities (commutators, Casimir, unitarity of exp).
    pub exact: f64,
    /// Propagator unitarity and conjugation identities such as V†(k̂·J)V = J₃.
    pub conjugation: f64,
    /// ‖U_analytic − U_oracle‖ at the configured oracle step count.
    pub oracle: f64,
    /// Residual of V†HV − iV†V̇ − γ̇(1−cosλ)J₃.
    pub h_v_identity: f64,
    /// Residual of ∂I/∂t + (1/i)[I, H].
    pub invariant: f64,
    /// Integrated dynamical phase and the pointwise k̂·b̂ identity.
    pub dynamical: f64,
    /// Absolute tolerance handed to adaptive Simpson.
    pub quadrature: f64,
    /// Central-difference step for operator derivatives.
    pub fd_step: f64,
    /// |b| below which the effective field counts as degenerate.
    pub degenerate_field: f64,
    /// Minimum allowed 1 + k̂_z.
    pub south_pole: f64,
    /// Largest turning angle between consecutive sample chords.
    pub max_chord_turn: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            unit_norm: 1e-9,
            exact: 1e-12,
            conjugation: 1e-10,
            oracle: 1e-6,
            h_v_identity: 1e-6,
            invariant: 1e-7,
            dynamical: 1e-8,
            quadrature: 1e-10,
            fd_step: 1e-5,
            degenerate_field: 1e-12,
            south_pole: 1e-9,
            max_chord_turn: std::f64::consts::FRAC_PI_4,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<(), String> {
        let fields = [
            ("unit_norm", self.unit_norm),
            ("exact", self.exact),
            ("conjugation", self.conjugation),
            ("oracle", self.oracle),
            ("h_v_identity", self.h_v_identity),
            ("invariant", self.invariant),
            ("dynamical", self.dynamical),
            ("quadrature", self.quadrature),
            ("fd_step", self.fd_step),
            ("degenerate_field", self.degenerate_field),
            ("south_pole", self.south_pole),
            ("max_chord_turn", self.max_chord_turn),
        ];
        for (name, value) in fields {
            if !value.is_finite() || value <= 0.0 {
                return Err(format!("tolerances.{name} must be positive and finite, got {value}"));
            }
        }
        if self.max_chord_turn >= std::f64::consts::PI {
            return Err("tolerances.max_chord_turn must be below pi".into());
        }
        Ok(())
    }
}
