//! Scalar constants of the problem.
//!
//! Everything downstream is driven by the adiabatic exponent `gamma` and the
//! viscosity `epsilon`: the pressure law is p(rho) = p0 * rho^gamma with
//! p0 = theta^2 / gamma, theta = (gamma - 1) / 2, and the radial scaling
//! exponents are c = 1/theta, d = c + 1. The inner boundary of the annular
//! domain is a(eps) = -1/ln(eps), which tends to 0 as eps -> 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// All scalar constants of a single run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    /// Adiabatic exponent, > 1.
    pub gamma: f64,
    /// (gamma - 1) / 2; the sound-speed exponent.
    pub theta: f64,
    /// Density scaling exponent, 1/theta.
    pub c: f64,
    /// Momentum scaling exponent, c + 1.
    pub d: f64,
    /// Pressure coefficient theta^2 / gamma.
    pub p0: f64,
    /// Artificial viscosity, in (0, 1).
    pub epsilon: f64,
    /// Inner domain boundary -1/ln(epsilon).
    pub a_eps: f64,
    /// Outer domain boundary.
    pub b_eps: f64,
    /// Time horizon, >= 0.
    pub t_final: f64,
    /// Admissibility slope for the upper Riemann-invariant bound w0 <= m1 * x.
    pub m1: f64,
    /// Admissibility slope for the angular bound |mtilde0 / rho0| <= m2 * x.
    pub m2: f64,
    /// Constant in the control function w_bar <= m3 + c_ctrl * t + 2 eps.
    pub m3: f64,
    /// Slope of the control function, max(m2^2, 1).
    pub c_ctrl: f64,
}

/// Derive the full parameter set from the user-facing constants.
///
/// Rejects `gamma <= 1` (c = 1/theta degenerates) and `epsilon` outside
/// (0, 1) (a_eps would be undefined or non-positive).
pub fn derive_params(
    gamma: f64,
    epsilon: f64,
    b_eps: f64,
    t_final: f64,
    m1: f64,
    m2: f64,
    m3: f64,
) -> Result<Params> {
    if !(gamma > 1.0) {
        return Err(Error::Params(format!(
            "gamma must be > 1 (theta = (gamma-1)/2 would make c = 1/theta undefined): got {gamma}"
        )));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Params(format!(
            "epsilon must lie in (0, 1) so that a(eps) = -1/ln(eps) > 0: got {epsilon}"
        )));
    }
    let theta = (gamma - 1.0) / 2.0;
    let c = 1.0 / theta;
    let d = c + 1.0;
    let p0 = theta * theta / gamma;
    let a_eps = -1.0 / epsilon.ln();
    if !(b_eps > a_eps) {
        return Err(Error::Params(format!(
            "outer boundary b = {b_eps} must exceed a(eps) = {a_eps}"
        )));
    }
    if !(t_final >= 0.0) {
        return Err(Error::Params(format!("t_final must be >= 0: got {t_final}")));
    }
    if !(m1 > 0.0) {
        return Err(Error::Params(format!("m1 must be > 0: got {m1}")));
    }
    if !(m2 >= 0.0) {
        return Err(Error::Params(format!("m2 must be >= 0: got {m2}")));
    }
    // The control slope must dominate sup omega_hat^2 = m2^2 for the sign
    // structure of the source terms; the floor of 1 avoids a degenerate zero
    // slope when m2 = 0.
    let c_ctrl = (m2 * m2).max(1.0);
    Ok(Params {
        gamma,
        theta,
        c,
        d,
        p0,
        epsilon,
        a_eps,
        b_eps,
        t_final,
        m1,
        m2,
        m3,
        c_ctrl,
    })
}

impl Params {
    /// Pressure p(s) = p0 * s^gamma in whichever variable set `s` lives in.
    #[inline]
    pub fn pressure(&self, s: f64) -> f64 {
        self.p0 * s.powf(self.gamma)
    }

    /// The density floor added to the initial data, eps^(2/theta).
    #[inline]
    pub fn initial_density_floor(&self) -> f64 {
        self.epsilon.powf(2.0 / self.theta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_two_reference_constants() {
        let p = derive_params(2.0, (-10.0f64).exp(), 10.0, 0.2, 1.0, 0.1, 0.3).unwrap();
        assert_eq!(p.theta, 0.5);
        assert_eq!(p.c, 2.0);
        assert_eq!(p.d, 3.0);
        assert_eq!(p.p0, 0.125);
        assert!((p.a_eps - 0.1).abs() < 1e-12, "a_eps = {}", p.a_eps);
    }

    #[test]
    fn gamma_three_constants() {
        let p = derive_params(3.0, 1e-3, 10.0, 0.2, 1.0, 0.1, 0.3).unwrap();
        assert_eq!(p.theta, 1.0);
        assert_eq!(p.c, 1.0);
        assert_eq!(p.d, 2.0);
        assert!((p.p0 - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_degenerate_gamma_and_epsilon() {
        assert!(derive_params(1.0, 1e-3, 10.0, 0.2, 1.0, 0.1, 0.3).is_err());
        assert!(derive_params(0.5, 1e-3, 10.0, 0.2, 1.0, 0.1, 0.3).is_err());
        assert!(derive_params(2.0, 1.0, 10.0, 0.2, 1.0, 0.1, 0.3).is_err());
        assert!(derive_params(2.0, 0.0, 10.0, 0.2, 1.0, 0.1, 0.3).is_err());
        assert!(derive_params(2.0, 1.5, 10.0, 0.2, 1.0, 0.1, 0.3).is_err());
    }

    #[test]
    fn rejects_outer_boundary_inside_inner() {
        // a(0.8) = 4.48... > 1.25
        assert!(derive_params(2.0, 0.8, 1.25, 0.2, 1.0, 0.1, 0.3).is_err());
    }

    #[test]
    fn scaling_exponent_identities_exact() {
        for gamma in [1.2, 1.4, 1.6, 2.0] {
            let p = derive_params(gamma, 1e-3, 10.0, 0.2, 1.0, 0.1, 0.3).unwrap();
            assert_eq!(p.theta, (gamma - 1.0) / 2.0);
            assert_eq!(p.c * p.theta, 1.0, "c*theta != 1 for gamma = {gamma}");
            assert_eq!(p.d, p.c + 1.0, "d != c+1 for gamma = {gamma}");
        }
    }

    #[test]
    fn control_slope_floor() {
        let p = derive_params(2.0, 1e-3, 10.0, 0.2, 1.0, 0.1, 0.3).unwrap();
        assert_eq!(p.c_ctrl, 1.0);
        let p = derive_params(2.0, 1e-3, 10.0, 0.2, 1.0, 3.0, 0.3).unwrap();
        assert_eq!(p.c_ctrl, 9.0);
    }

    #[test]
    fn initial_floor_exponent() {
        // eps = 0.01, theta = 0.5 -> eps^(2/theta) = eps^4 = 1e-8
        let p = derive_params(2.0, 0.01, 10.0, 0.2, 1.0, 0.1, 0.3).unwrap();
        let floor = p.initial_density_floor();
        assert!((floor - 1e-8).abs() / 1e-8 < 1e-12, "floor = {floor}");
    }
}
