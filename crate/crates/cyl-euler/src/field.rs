//! Field containers and the pure algebraic maps between variable sets.
//!
//! The solver works in scaled variables (rho_bar, m_bar, m_hat) related to
//! the physical ones by rho = rho_bar * x^c, m = m_bar * x^d,
//! mtilde = m_hat * x^d. The Riemann invariants of the scaled system are
//! w_bar = m_bar/rho_bar + rho_bar^theta, z_bar = m_bar/rho_bar - rho_bar^theta,
//! omega_hat = m_hat/rho_bar, with characteristic speeds
//! lam_{1,2} = m_bar/rho_bar -/+ theta * rho_bar^theta and lam_3 = m_bar/rho_bar.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::params::Params;

/// Solver state in scaled variables, one value per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledField {
    pub rho_bar: Vec<f64>,
    pub m_bar: Vec<f64>,
    pub m_hat: Vec<f64>,
}

impl ScaledField {
    pub fn zeros(n: usize) -> ScaledField {
        ScaledField {
            rho_bar: vec![0.0; n],
            m_bar: vec![0.0; n],
            m_hat: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.rho_bar.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho_bar.is_empty()
    }

    pub fn check_shape(&self, grid: &Grid) -> Result<()> {
        let n = grid.n;
        if self.rho_bar.len() != n || self.m_bar.len() != n || self.m_hat.len() != n {
            return Err(Error::Shape(format!(
                "field lengths ({}, {}, {}) do not match grid size {n}",
                self.rho_bar.len(),
                self.m_bar.len(),
                self.m_hat.len()
            )));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.rho_bar.iter().all(|v| v.is_finite())
            && self.m_bar.iter().all(|v| v.is_finite())
            && self.m_hat.iter().all(|v| v.is_finite())
    }
}

/// Physical variables plus the derived velocities u = m/rho, u_tilde = mtilde/rho.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    pub rho: Vec<f64>,
    pub m: Vec<f64>,
    pub m_tilde: Vec<f64>,
    pub u: Vec<f64>,
    pub u_tilde: Vec<f64>,
}

/// Scaled Riemann invariants and characteristic speeds.
#[derive(Debug, Clone, PartialEq)]
pub struct Invariants3 {
    pub w_bar: Vec<f64>,
    pub z_bar: Vec<f64>,
    pub omega_hat: Vec<f64>,
    pub lam1: Vec<f64>,
    pub lam2: Vec<f64>,
    pub lam3: Vec<f64>,
}

/// Map a scaled field to physical variables: rho = rho_bar x^c, m = m_bar x^d,
/// mtilde = m_hat x^d.
pub fn scale_to_physical(s: &ScaledField, grid: &Grid, p: &Params) -> PhysicalField {
    debug_assert_eq!(s.len(), grid.n);
    let n = grid.n;
    let mut f = PhysicalField {
        rho: vec![0.0; n],
        m: vec![0.0; n],
        m_tilde: vec![0.0; n],
        u: vec![0.0; n],
        u_tilde: vec![0.0; n],
    };
    for i in 0..n {
        let xc = grid.x[i].powf(p.c);
        let xd = grid.x[i].powf(p.d);
        f.rho[i] = s.rho_bar[i] * xc;
        f.m[i] = s.m_bar[i] * xd;
        f.m_tilde[i] = s.m_hat[i] * xd;
        f.u[i] = f.m[i] / f.rho[i];
        f.u_tilde[i] = f.m_tilde[i] / f.rho[i];
    }
    f
}

/// Inverse of [`scale_to_physical`]; requires positive density.
pub fn physical_to_scaled(f: &PhysicalField, grid: &Grid, p: &Params) -> Result<ScaledField> {
    let n = grid.n;
    if f.rho.len() != n {
        return Err(Error::Shape(format!(
            "physical field length {} does not match grid size {n}",
            f.rho.len()
        )));
    }
    if let Some(i) = f.rho.iter().position(|&r| !(r > 0.0)) {
        return Err(Error::Shape(format!(
            "physical density must be positive to invert the scaling: rho[{i}] = {}",
            f.rho[i]
        )));
    }
    let mut s = ScaledField::zeros(n);
    for i in 0..n {
        let xc = grid.x[i].powf(p.c);
        let xd = grid.x[i].powf(p.d);
        s.rho_bar[i] = f.rho[i] / xc;
        s.m_bar[i] = f.m[i] / xd;
        s.m_hat[i] = f.m_tilde[i] / xd;
    }
    Ok(s)
}

/// Scaled Riemann invariants and characteristic speeds of a state.
///
/// Signals if the density has dropped below `density_floor` (state corrupted
/// upstream; the ratios m_bar/rho_bar would be meaningless).
pub fn riemann_invariants(s: &ScaledField, p: &Params, density_floor: f64) -> Result<Invariants3> {
    if let Some(i) = s.rho_bar.iter().position(|&r| r < density_floor) {
        return Err(Error::Diagnostic(format!(
            "rho_bar[{i}] = {} is below the density floor {density_floor}",
            s.rho_bar[i]
        )));
    }
    let n = s.len();
    let mut inv = Invariants3 {
        w_bar: vec![0.0; n],
        z_bar: vec![0.0; n],
        omega_hat: vec![0.0; n],
        lam1: vec![0.0; n],
        lam2: vec![0.0; n],
        lam3: vec![0.0; n],
    };
    for i in 0..n {
        let r = s.rho_bar[i];
        let vel = s.m_bar[i] / r;
        let sound = r.powf(p.theta);
        inv.w_bar[i] = vel + sound;
        inv.z_bar[i] = vel - sound;
        inv.omega_hat[i] = s.m_hat[i] / r;
        inv.lam1[i] = vel - p.theta * sound;
        inv.lam2[i] = vel + p.theta * sound;
        inv.lam3[i] = vel;
    }
    Ok(inv)
}

/// Mechanical energy and its flux:
/// eta* = (m^2 + mtilde^2) / (2 rho) + p0 rho^gamma / (gamma - 1),
/// q* = (m^3 + m mtilde^2) / (2 rho^2) + gamma p0 rho^(gamma-1) m / (gamma - 1).
pub fn mechanical_entropy(f: &PhysicalField, p: &Params) -> (Vec<f64>, Vec<f64>) {
    let n = f.rho.len();
    let mut eta = vec![0.0; n];
    let mut q = vec![0.0; n];
    for i in 0..n {
        let (rho, m, mt) = (f.rho[i], f.m[i], f.m_tilde[i]);
        eta[i] = (m * m + mt * mt) / (2.0 * rho) + p.p0 * rho.powf(p.gamma) / (p.gamma - 1.0);
        q[i] = (m * m * m + m * mt * mt) / (2.0 * rho * rho)
            + p.gamma * p.p0 * rho.powf(p.gamma - 1.0) * m / (p.gamma - 1.0);
    }
    (eta, q)
}

/// Pointwise mechanical entropy, for quadrature kernels.
#[inline]
pub fn eta_star(rho: f64, m: f64, mt: f64, p: &Params) -> f64 {
    (m * m + mt * mt) / (2.0 * rho) + p.p0 * rho.powf(p.gamma) / (p.gamma - 1.0)
}

/// Pointwise mechanical entropy flux.
#[inline]
pub fn q_star(rho: f64, m: f64, mt: f64, p: &Params) -> f64 {
    (m * m * m + m * mt * mt) / (2.0 * rho * rho)
        + p.gamma * p.p0 * rho.powf(p.gamma - 1.0) * m / (p.gamma - 1.0)
}

/// Analytic gradient of eta* with respect to (rho, m, mtilde).
#[inline]
pub fn eta_star_gradient(rho: f64, m: f64, mt: f64, p: &Params) -> [f64; 3] {
    [
        -(m * m + mt * mt) / (2.0 * rho * rho)
            + p.gamma * p.p0 * rho.powf(p.gamma - 1.0) / (p.gamma - 1.0),
        m / rho,
        mt / rho,
    ]
}
