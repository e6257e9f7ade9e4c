//! Time integration of the viscous system in (xi, t).
//!
//! Semi-discrete form, per node:
//!
//!   d/dt rho_bar = -(m_bar)_xi                         - (d+1) m_bar            + eps (rho_bar)_xixi
//!   d/dt m_bar   = -(m_bar^2/rho_bar + p(rho_bar))_xi  - (2d-c+1) m_bar^2/rho_bar
//!                                                      + m_hat^2/rho_bar
//!                                                      - (2d-c) p(rho_bar)      + eps (m_bar)_xixi
//!   d/dt m_hat   = -(m_bar m_hat/rho_bar)_xi           - (2d-c+2) m_bar m_hat/rho_bar
//!                                                                               + eps (m_hat)_xixi
//!
//! The convective divergence uses a local Lax-Friedrichs (Rusanov) interface
//! flux with speed max(|lam1|, |lam2|, |lam3|) = |m_bar/rho_bar| + theta rho_bar^theta;
//! diffusion is the plain second difference. Dirichlet triples are re-imposed
//! after every stage. The density is clipped at a floor far below the initial
//! floor eps^(2/theta), and every clip is counted.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{scale_to_physical, PhysicalField, ScaledField};
use crate::grid::Grid;
use crate::initial::{boundary_values, build_initial_data, InitialProfile, InitialReport};
use crate::params::Params;
use crate::stencil;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Integrator {
    /// Two-stage strong-stability-preserving Runge-Kutta, everything explicit.
    ExplicitSsp2,
    /// Forward-Euler convection and sources, backward-Euler diffusion via a
    /// tridiagonal solve; removes the dxi^2/eps step restriction.
    ImexDiffusion,
}

impl std::fmt::Display for Integrator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Integrator::ExplicitSsp2 => write!(f, "explicit-ssp2"),
            Integrator::ImexDiffusion => write!(f, "imex-diffusion"),
        }
    }
}

/// Resolution and stability knobs of a single run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub n: usize,
    pub cfl: f64,
    pub diff_number: f64,
    pub snapshot_dt: f64,
    pub density_floor: f64,
    pub integrator: Integrator,
}

impl SolverConfig {
    /// Defaults for a given parameter set: cfl 0.4, diffusion number 0.25,
    /// snapshots at t_final/50, density floor eps^(2/theta) * 1e-4.
    pub fn for_params(p: &Params, n: usize) -> SolverConfig {
        SolverConfig {
            n,
            cfl: 0.4,
            diff_number: 0.25,
            snapshot_dt: if p.t_final > 0.0 { p.t_final / 50.0 } else { 1.0 },
            density_floor: p.initial_density_floor() * 1e-4,
            integrator: Integrator::ExplicitSsp2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.n < 8 {
            problems.push(format!("solver.n must be >= 8: got {}", self.n));
        }
        if !(self.cfl > 0.0 && self.cfl <= 0.9) {
            problems.push(format!("solver.cfl must lie in (0, 0.9]: got {}", self.cfl));
        }
        if !(self.diff_number > 0.0 && self.diff_number <= 0.5) {
            problems.push(format!(
                "solver.diff_number must lie in (0, 0.5]: got {}",
                self.diff_number
            ));
        }
        if !(self.snapshot_dt > 0.0) {
            problems.push(format!(
                "solver.snapshot_dt must be > 0: got {}",
                self.snapshot_dt
            ));
        }
        if !(self.density_floor > 0.0) {
            problems.push(format!(
                "solver.density_floor must be > 0: got {}",
                self.density_floor
            ));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }
}

/// Dirichlet triples pinned at both ends for all time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirichletBc {
    pub left: [f64; 3],
    pub right: [f64; 3],
}

impl DirichletBc {
    pub fn impose(&self, s: &mut ScaledField) {
        let n = s.len();
        s.rho_bar[0] = self.left[0];
        s.m_bar[0] = self.left[1];
        s.m_hat[0] = self.left[2];
        s.rho_bar[n - 1] = self.right[0];
        s.m_bar[n - 1] = self.right[1];
        s.m_hat[n - 1] = self.right[2];
    }
}

/// Per-snapshot extrema of the Riemann invariants and the density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotExtrema {
    pub t: f64,
    pub w_bar_max: f64,
    pub w_bar_min: f64,
    pub z_bar_min: f64,
    pub z_bar_max: f64,
    pub omega_hat_abs_max: f64,
    pub rho_bar_min: f64,
    pub rho_bar_max: f64,
}

impl SnapshotExtrema {
    pub fn measure(t: f64, s: &ScaledField, p: &Params) -> SnapshotExtrema {
        let mut e = SnapshotExtrema {
            t,
            w_bar_max: f64::NEG_INFINITY,
            w_bar_min: f64::INFINITY,
            z_bar_min: f64::INFINITY,
            z_bar_max: f64::NEG_INFINITY,
            omega_hat_abs_max: 0.0,
            rho_bar_min: f64::INFINITY,
            rho_bar_max: f64::NEG_INFINITY,
        };
        for i in 0..s.len() {
            let r = s.rho_bar[i];
            let vel = s.m_bar[i] / r;
            let sound = r.powf(p.theta);
            let (w, z) = (vel + sound, vel - sound);
            e.w_bar_max = e.w_bar_max.max(w);
            e.w_bar_min = e.w_bar_min.min(w);
            e.z_bar_min = e.z_bar_min.min(z);
            e.z_bar_max = e.z_bar_max.max(z);
            e.omega_hat_abs_max = e.omega_hat_abs_max.max((s.m_hat[i] / r).abs());
            e.rho_bar_min = e.rho_bar_min.min(r);
            e.rho_bar_max = e.rho_bar_max.max(r);
        }
        e
    }
}

/// Time-ordered snapshots of one run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<ScaledField>,
    /// Parameters of the run, with m3 replaced by the observed max of w_bar0.
    pub params: Params,
    pub grid: Grid,
    pub clip_events: u64,
    pub node_steps: u64,
    pub snapshot_extrema: Vec<SnapshotExtrema>,
    pub left_bc: [f64; 3],
    pub right_bc: [f64; 3],
}

impl Trajectory {
    pub fn clip_fraction(&self) -> f64 {
        if self.node_steps == 0 {
            0.0
        } else {
            self.clip_events as f64 / self.node_steps as f64
        }
    }

    /// True when clips exceeded 0.1% of node-steps, i.e. the positive lower
    /// bound is being violated numerically.
    pub fn clip_flag(&self) -> bool {
        self.clip_fraction() > 1e-3
    }

    /// Physical-variable view of snapshot `k`.
    pub fn physical(&self, k: usize) -> PhysicalField {
        scale_to_physical(&self.snapshots[k], &self.grid, &self.params)
    }

    /// Index of the snapshot nearest to time `t`.
    pub fn nearest_snapshot(&self, t: f64) -> usize {
        let mut best = 0;
        let mut dist = f64::INFINITY;
        for (k, &tk) in self.times.iter().enumerate() {
            if (tk - t).abs() < dist {
                dist = (tk - t).abs();
                best = k;
            }
        }
        best
    }
}

#[inline]
fn wave_speed(rho_bar: f64, m_bar: f64, theta: f64) -> f64 {
    (m_bar / rho_bar).abs() + theta * rho_bar.powf(theta)
}

#[inline]
fn flux(rho_bar: f64, m_bar: f64, m_hat: f64, p: &Params) -> [f64; 3] {
    let vel = m_bar / rho_bar;
    [
        m_bar,
        m_bar * vel + p.pressure(rho_bar),
        m_hat * vel,
    ]
}

#[inline]
fn source(rho_bar: f64, m_bar: f64, m_hat: f64, p: &Params) -> [f64; 3] {
    let vel = m_bar / rho_bar;
    [
        -(p.d + 1.0) * m_bar,
        -(2.0 * p.d - p.c + 1.0) * m_bar * vel + m_hat * m_hat / rho_bar
            - (2.0 * p.d - p.c) * p.pressure(rho_bar),
        -(2.0 * p.d - p.c + 2.0) * m_hat * vel,
    ]
}

/// eps * second difference / dxi^2; exactly zero on index-linear data.
pub fn diffusion_term(f: &[f64], i: usize, dxi: f64, eps: f64) -> f64 {
    eps * (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (dxi * dxi)
}

fn rhs_inner(s: &ScaledField, grid: &Grid, p: &Params, with_diffusion: bool) -> Result<ScaledField> {
    if !s.is_finite() {
        return Err(Error::Diagnostic("non-finite state passed to rhs".into()));
    }
    let n = grid.n;
    let dxi = grid.dxi;
    let mut speeds = vec![0.0; n];
    let mut fluxes = vec![[0.0; 3]; n];
    for i in 0..n {
        speeds[i] = wave_speed(s.rho_bar[i], s.m_bar[i], p.theta);
        fluxes[i] = flux(s.rho_bar[i], s.m_bar[i], s.m_hat[i], p);
    }
    // Rusanov interface fluxes, one per cell face.
    let mut iface = vec![[0.0; 3]; n - 1];
    for i in 0..n - 1 {
        let a = speeds[i].max(speeds[i + 1]);
        let du = [
            s.rho_bar[i + 1] - s.rho_bar[i],
            s.m_bar[i + 1] - s.m_bar[i],
            s.m_hat[i + 1] - s.m_hat[i],
        ];
        for k in 0..3 {
            iface[i][k] = 0.5 * (fluxes[i][k] + fluxes[i + 1][k]) - 0.5 * a * du[k];
        }
    }
    let mut out = ScaledField::zeros(n);
    for i in 1..n - 1 {
        let src = source(s.rho_bar[i], s.m_bar[i], s.m_hat[i], p);
        let mut inc = [0.0; 3];
        for k in 0..3 {
            inc[k] = -(iface[i][k] - iface[i - 1][k]) / dxi + src[k];
        }
        if with_diffusion {
            inc[0] += diffusion_term(&s.rho_bar, i, dxi, p.epsilon);
            inc[1] += diffusion_term(&s.m_bar, i, dxi, p.epsilon);
            inc[2] += diffusion_term(&s.m_hat, i, dxi, p.epsilon);
        }
        out.rho_bar[i] = inc[0];
        out.m_bar[i] = inc[1];
        out.m_hat[i] = inc[2];
    }
    Ok(out)
}

/// Semi-discrete time derivative of the full viscous system. Boundary nodes
/// carry zero increment; they are pinned by the Dirichlet data.
pub fn rhs(s: &ScaledField, grid: &Grid, p: &Params) -> Result<ScaledField> {
    rhs_inner(s, grid, p, true)
}

/// Largest stable explicit step for the current state:
/// min(cfl dxi / max|lam|, diff_number dxi^2 / eps); the diffusion bound is
/// dropped for the IMEX integrator. With vanishing wave speeds the diffusion
/// bound alone is used.
pub fn stable_dt(s: &ScaledField, grid: &Grid, p: &Params, cfg: &SolverConfig) -> f64 {
    let amax = (0..s.len())
        .map(|i| wave_speed(s.rho_bar[i], s.m_bar[i], p.theta))
        .fold(0.0f64, f64::max);
    let dt_diff = cfg.diff_number * grid.dxi * grid.dxi / p.epsilon;
    if amax <= f64::MIN_POSITIVE {
        return dt_diff;
    }
    let dt_conv = cfg.cfl * grid.dxi / amax;
    match cfg.integrator {
        Integrator::ExplicitSsp2 => dt_conv.min(dt_diff),
        Integrator::ImexDiffusion => dt_conv,
    }
}

fn clip_density(s: &mut ScaledField, floor: f64) -> u64 {
    let mut clips = 0;
    for r in s.rho_bar.iter_mut() {
        if *r < floor {
            *r = floor;
            clips += 1;
        }
    }
    clips
}

fn axpy(base: &ScaledField, rate: &ScaledField, dt: f64) -> ScaledField {
    let n = base.len();
    let mut out = ScaledField::zeros(n);
    for i in 0..n {
        out.rho_bar[i] = base.rho_bar[i] + dt * rate.rho_bar[i];
        out.m_bar[i] = base.m_bar[i] + dt * rate.m_bar[i];
        out.m_hat[i] = base.m_hat[i] + dt * rate.m_hat[i];
    }
    out
}

/// Thomas solve of (I - r D2) u = rhs with Dirichlet rows at both ends.
fn backward_euler_diffusion(u: &mut [f64], r: f64, bc_left: f64, bc_right: f64) {
    let n = u.len();
    // forward sweep on interior rows: a = -r, b = 1 + 2r, c = -r
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    u[0] = bc_left;
    u[n - 1] = bc_right;
    cp[0] = 0.0;
    dp[0] = u[0];
    for i in 1..n - 1 {
        let m = 1.0 + 2.0 * r - (-r) * cp[i - 1];
        cp[i] = -r / m;
        dp[i] = (u[i] - (-r) * dp[i - 1]) / m;
    }
    for i in (1..n - 1).rev() {
        u[i] = dp[i] - cp[i] * u[i + 1];
    }
}

/// Advance one step of size `dt`. Returns the new state and the number of
/// density clips applied.
pub fn step(
    s: &ScaledField,
    dt: f64,
    grid: &Grid,
    p: &Params,
    cfg: &SolverConfig,
    bc: &DirichletBc,
) -> Result<(ScaledField, u64)> {
    let mut clips = 0;
    let out = match cfg.integrator {
        Integrator::ExplicitSsp2 => {
            let l0 = rhs_inner(s, grid, p, true)?;
            let mut u1 = axpy(s, &l0, dt);
            bc.impose(&mut u1);
            clips += clip_density(&mut u1, cfg.density_floor);
            let l1 = rhs_inner(&u1, grid, p, true)?;
            let full = axpy(&u1, &l1, dt);
            let n = s.len();
            let mut u2 = ScaledField::zeros(n);
            for i in 0..n {
                u2.rho_bar[i] = 0.5 * (s.rho_bar[i] + full.rho_bar[i]);
                u2.m_bar[i] = 0.5 * (s.m_bar[i] + full.m_bar[i]);
                u2.m_hat[i] = 0.5 * (s.m_hat[i] + full.m_hat[i]);
            }
            bc.impose(&mut u2);
            clips += clip_density(&mut u2, cfg.density_floor);
            u2
        }
        Integrator::ImexDiffusion => {
            let l0 = rhs_inner(s, grid, p, false)?;
            let mut u1 = axpy(s, &l0, dt);
            bc.impose(&mut u1);
            let r = p.epsilon * dt / (grid.dxi * grid.dxi);
            backward_euler_diffusion(&mut u1.rho_bar, r, bc.left[0], bc.right[0]);
            backward_euler_diffusion(&mut u1.m_bar, r, bc.left[1], bc.right[1]);
            backward_euler_diffusion(&mut u1.m_hat, r, bc.left[2], bc.right[2]);
            clips += clip_density(&mut u1, cfg.density_floor);
            u1
        }
    };
    Ok((out, clips))
}

pub struct RunOutcome {
    pub trajectory: Trajectory,
    pub initial: InitialReport,
}

/// Integrate from t = 0 to t_final, storing snapshots every `snapshot_dt`
/// (plus t = 0 and t_final) and recording per-snapshot extrema and density
/// clips. The control constant m3 is replaced by the observed max of w_bar0.
pub fn run(profile: &InitialProfile, p: &Params, cfg: &SolverConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let grid = Grid::for_params(p, cfg.n)?;
    let (mut state, initial) = build_initial_data(profile, &grid, p)?;
    let (left, right) = boundary_values(&state);
    let bc = DirichletBc { left, right };
    bc.impose(&mut state);

    let mut params = *p;
    params.m3 = initial.m3_observed;

    // snapshot schedule: multiples of snapshot_dt, then t_final
    let mut targets = Vec::new();
    if p.t_final > 0.0 {
        let mut k = 1u64;
        loop {
            let t = k as f64 * cfg.snapshot_dt;
            if t >= p.t_final - 1e-12 * p.t_final.max(1.0) {
                break;
            }
            targets.push(t);
            k += 1;
        }
        targets.push(p.t_final);
    }
    let snapshot_count = targets.len() + 1;
    if (snapshot_count as f64) * (cfg.n as f64) > 2e7 {
        return Err(Error::SnapshotStorage(format!(
            "{snapshot_count} snapshots x {} nodes exceeds the storage budget; \
             raise snapshot_dt",
            cfg.n
        )));
    }

    let mut times = vec![0.0];
    let mut snapshots = vec![state.clone()];
    let mut extrema = vec![SnapshotExtrema::measure(0.0, &state, &params)];
    let mut clip_events = 0u64;
    let mut node_steps = 0u64;

    let mut t = 0.0;
    for &target in &targets {
        while t < target {
            let dt_stable = stable_dt(&state, &grid, &params, cfg);
            if !(dt_stable > 0.0) {
                return Err(Error::BlowUp { t, node: 0, x: grid.x[0] });
            }
            let dt = dt_stable.min(target - t);
            let (next, clips) = step(&state, dt, &grid, &params, cfg, &bc)?;
            if !next.is_finite() {
                let node = (0..grid.n)
                    .find(|&i| {
                        !next.rho_bar[i].is_finite()
                            || !next.m_bar[i].is_finite()
                            || !next.m_hat[i].is_finite()
                    })
                    .unwrap_or(0);
                return Err(Error::BlowUp {
                    t: t + dt,
                    node,
                    x: grid.x[node],
                });
            }
            state = next;
            clip_events += clips;
            node_steps += (grid.n - 2) as u64;
            t = if target - (t + dt) < 1e-14 * target.max(1.0) {
                target
            } else {
                t + dt
            };
        }
        times.push(target);
        snapshots.push(state.clone());
        extrema.push(SnapshotExtrema::measure(target, &state, &params));
    }

    Ok(RunOutcome {
        trajectory: Trajectory {
            times,
            snapshots,
            params,
            grid,
            clip_events,
            node_steps,
            snapshot_extrema: extrema,
            left_bc: bc.left,
            right_bc: bc.right,
        },
        initial,
    })
}

/// Residual norms of the physical-coordinate viscous system evaluated on a
/// trajectory by centered differences in x and t.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// L1 norms of the (mass, normal-momentum, angular-momentum) residuals.
    pub l1: [f64; 3],
    /// Max-norm counterparts.
    pub linf: [f64; 3],
}

/// Evaluate the residual of the equivalent physical-coordinate viscous system
/// on the stored snapshots.
///
/// The three equations carry the x^2-weighted diffusion plus first-order
/// corrections with coefficients (d-3c), -(c+d), -(c+d) and zeroth-order
/// terms c^2 rho, d^2 m, d^2 mtilde.
pub fn cross_check_physical(traj: &Trajectory) -> Result<ResidualReport> {
    let nk = traj.times.len();
    if nk < 3 {
        return Err(Error::Diagnostic(format!(
            "cross_check_physical needs at least 3 snapshots, trajectory has {nk}"
        )));
    }
    let p = &traj.params;
    let grid = &traj.grid;
    let x = &grid.x;
    let fields: Vec<PhysicalField> = (0..nk).map(|k| traj.physical(k)).collect();

    let mut l1 = [0.0; 3];
    let mut linf = [0.0f64; 3];
    let eps = p.epsilon;
    let (c, d) = (p.c, p.d);
    for k in 1..nk - 1 {
        let dt2 = traj.times[k + 1] - traj.times[k - 1];
        let wt = 0.5 * dt2;
        let (prev, cur, next) = (&fields[k - 1], &fields[k], &fields[k + 1]);
        // flux fields at the current time
        let n = grid.n;
        let mut f_m = vec![0.0; n];
        let mut f_mt = vec![0.0; n];
        for i in 0..n {
            f_m[i] = cur.m[i] * cur.m[i] / cur.rho[i] + p.pressure(cur.rho[i]);
            f_mt[i] = cur.m[i] * cur.m_tilde[i] / cur.rho[i];
        }
        for i in 1..n - 1 {
            let xi = x[i];
            let wx = 0.5 * (x[i + 1] - x[i - 1]);
            let rho_t = (next.rho[i] - prev.rho[i]) / dt2;
            let m_t = (next.m[i] - prev.m[i]) / dt2;
            let mt_t = (next.m_tilde[i] - prev.m_tilde[i]) / dt2;

            let rho_x = stencil::d_dx(&cur.rho, x, i);
            let rho_xx = stencil::d2_dx2(&cur.rho, x, i);
            let m_x = stencil::d_dx(&cur.m, x, i);
            let m_xx = stencil::d2_dx2(&cur.m, x, i);
            let mt_x = stencil::d_dx(&cur.m_tilde, x, i);
            let mt_xx = stencil::d2_dx2(&cur.m_tilde, x, i);
            let fm_x = stencil::d_dx(&f_m, x, i);
            let fmt_x = stencil::d_dx(&f_mt, x, i);

            let r0 = rho_t + m_x + cur.m[i] / xi
                - eps * (rho_xx * xi * xi + (d - 3.0 * c) * rho_x * xi + c * c * cur.rho[i]);
            let r1 = m_t + fm_x
                + (cur.m[i] * cur.m[i] - cur.m_tilde[i] * cur.m_tilde[i]) / (cur.rho[i] * xi)
                - eps * (m_xx * xi * xi - (c + d) * m_x * xi + d * d * cur.m[i]);
            let r2 = mt_t + fmt_x + 2.0 * cur.m[i] * cur.m_tilde[i] / (cur.rho[i] * xi)
                - eps * (mt_xx * xi * xi - (c + d) * mt_x * xi + d * d * cur.m_tilde[i]);

            for (j, r) in [r0, r1, r2].into_iter().enumerate() {
                l1[j] += r.abs() * wx * wt;
                linf[j] = linf[j].max(r.abs());
            }
        }
    }
    Ok(ResidualReport { l1, linf })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::derive_params;

    fn params() -> Params {
        derive_params(2.0, 0.05, 5.0, 0.1, 1.0, 0.1, 0.3).unwrap()
    }

    fn constant_state(n: usize, rho: f64) -> ScaledField {
        ScaledField {
            rho_bar: vec![rho; n],
            m_bar: vec![0.0; n],
            m_hat: vec![0.0; n],
        }
    }

    #[test]
    fn rhs_constant_zero_momentum_state_leaves_only_pressure_source() {
        let p = params();
        let grid = Grid::for_params(&p, 64).unwrap();
        let s = constant_state(64, 0.01);
        let inc = rhs(&s, &grid, &p).unwrap();
        let expect = -(2.0 * p.d - p.c) * p.pressure(0.01);
        for i in 1..63 {
            assert!(inc.rho_bar[i].abs() < 1e-15, "rho inc at {i}");
            assert!(
                (inc.m_bar[i] - expect).abs() < 1e-15 * expect.abs(),
                "m inc at {i}: {} vs {expect}",
                inc.m_bar[i]
            );
            assert!(inc.m_hat[i].abs() < 1e-15);
        }
    }

    #[test]
    fn rhs_floor_state_is_nearly_quiescent() {
        let p = params();
        let grid = Grid::for_params(&p, 64).unwrap();
        let floor = p.initial_density_floor();
        let s = constant_state(64, floor);
        let inc = rhs(&s, &grid, &p).unwrap();
        let budget = (2.0 * p.d - p.c) * p.pressure(floor) * (1.0 + 1e-12);
        for i in 1..63 {
            assert!(inc.rho_bar[i].abs() <= budget);
            assert!(inc.m_bar[i].abs() <= budget);
            assert!(inc.m_hat[i].abs() <= budget);
        }
    }

    #[test]
    fn diffusion_annihilates_index_linear_fields() {
        let f: Vec<f64> = (0..32).map(|i| 4.0 + 0.25 * i as f64).collect();
        for i in 1..31 {
            assert_eq!(diffusion_term(&f, i, 0.01, 0.05), 0.0);
        }
    }

    #[test]
    fn conservation_form_consistency_per_step() {
        // Sum of interior rho_bar increments equals boundary flux difference
        // plus source sum plus diffusion boundary terms.
        let p = params();
        let grid = Grid::for_params(&p, 128).unwrap();
        let n = grid.n;
        let mut s = constant_state(n, 0.02);
        for i in 0..n {
            let xi = grid.xi[i];
            s.rho_bar[i] = 0.02 + 0.005 * xi.sin();
            s.m_bar[i] = 0.002 + 0.001 * (2.0 * xi).cos();
            s.m_hat[i] = 0.0005 * xi.cos();
        }
        let inc = rhs(&s, &grid, &p).unwrap();
        let dxi = grid.dxi;
        let sum_inc: f64 = inc.rho_bar[1..n - 1].iter().sum::<f64>() * dxi;

        // flux at the two extreme interfaces
        let f_at = |i: usize, j: usize| -> f64 {
            let a = wave_speed(s.rho_bar[i], s.m_bar[i], p.theta)
                .max(wave_speed(s.rho_bar[j], s.m_bar[j], p.theta));
            0.5 * (s.m_bar[i] + s.m_bar[j]) - 0.5 * a * (s.rho_bar[j] - s.rho_bar[i])
        };
        let flux_term = -(f_at(n - 2, n - 1) - f_at(0, 1));
        let source_term: f64 = (1..n - 1)
            .map(|i| -(p.d + 1.0) * s.m_bar[i])
            .sum::<f64>()
            * dxi;
        let diff_term = p.epsilon
            * ((s.rho_bar[n - 1] - s.rho_bar[n - 2]) - (s.rho_bar[1] - s.rho_bar[0]))
            / dxi;
        let expect = flux_term + source_term + diff_term;
        assert!(
            (sum_inc - expect).abs() < 1e-12 * (1.0 + expect.abs()),
            "{sum_inc} vs {expect}"
        );
    }

    #[test]
    fn step_zero_dt_is_identity_and_bcs_hold() {
        let p = params();
        let grid = Grid::for_params(&p, 64).unwrap();
        let s = constant_state(64, 0.01);
        let bc = DirichletBc {
            left: [0.01, 0.0, 0.0],
            right: [0.01, 0.0, 0.0],
        };
        let cfg = SolverConfig::for_params(&p, 64);
        let (s1, clips) = step(&s, 0.0, &grid, &p, &cfg, &bc).unwrap();
        assert_eq!(s1, s);
        assert_eq!(clips, 0);
    }

    #[test]
    fn step_constant_state_preserves_density_and_boundary() {
        let p = params();
        let grid = Grid::for_params(&p, 64).unwrap();
        let s = constant_state(64, 0.01);
        let bc = DirichletBc {
            left: [0.01, 0.0, 0.0],
            right: [0.01, 0.0, 0.0],
        };
        let cfg = SolverConfig::for_params(&p, 64);
        let dt = stable_dt(&s, &grid, &p, &cfg);
        let (s1, _) = step(&s, dt, &grid, &p, &cfg, &bc).unwrap();
        // boundary nodes pinned
        assert_eq!(s1.rho_bar[0], 0.01);
        assert_eq!(s1.m_bar[0], 0.0);
        assert_eq!(s1.rho_bar[63], 0.01);
        // only the pressure source acts on m_bar; rho_bar barely moves and
        // stays at or above the floor
        let expect = -dt * (2.0 * p.d - p.c) * p.pressure(0.01);
        for i in 2..62 {
            assert!((s1.m_bar[i] - expect).abs() < dt * dt * 1.0 + 1e-14);
            assert!(s1.rho_bar[i] >= cfg.density_floor);
        }
    }

    #[test]
    fn stable_dt_formula() {
        let p = params();
        let grid = Grid::for_params(&p, 64).unwrap();
        let s = constant_state(64, 1.0); // sound speed theta * 1 = 0.5
        let cfg = SolverConfig::for_params(&p, 64);
        let expect = (0.4 * grid.dxi / 0.5).min(0.25 * grid.dxi * grid.dxi / p.epsilon);
        assert!((stable_dt(&s, &grid, &p, &cfg) - expect).abs() < 1e-15);

        let imex = SolverConfig {
            integrator: Integrator::ImexDiffusion,
            ..cfg
        };
        let expect_imex = 0.4 * grid.dxi / 0.5;
        assert!((stable_dt(&s, &grid, &p, &imex) - expect_imex).abs() < 1e-15);

        // doubling n halves dxi and at least halves dt
        let grid2 = Grid::for_params(&p, 128).unwrap();
        let s2 = constant_state(128, 1.0);
        assert!(stable_dt(&s2, &grid2, &p, &cfg) <= 0.51 * stable_dt(&s, &grid, &p, &cfg));
    }

    #[test]
    fn run_zero_profile_stays_near_equilibrium() {
        let p = params(); // eps = 0.05
        let zero = InitialProfile::Tabulated {
            points: vec![[0.01, 0.0, 0.0, 0.0], [10.0, 0.0, 0.0, 0.0]],
        };
        let cfg = SolverConfig::for_params(&p, 128);
        let out = run(&zero, &p, &cfg).unwrap();
        let traj = out.trajectory;
        let s0 = &traj.snapshots[0];
        let last = traj.snapshots.last().unwrap();
        let mut worst = 0.0f64;
        for i in 0..s0.len() {
            worst = worst.max((last.rho_bar[i] - s0.rho_bar[i]).abs());
            worst = worst.max((last.m_bar[i] - s0.m_bar[i]).abs());
            worst = worst.max((last.m_hat[i] - s0.m_hat[i]).abs());
        }
        assert!(worst <= 10.0 * p.epsilon, "drift {worst}");
        assert_eq!(traj.clip_events, 0);
    }

    #[test]
    fn run_zero_horizon_gives_single_snapshot() {
        let p = derive_params(2.0, 0.05, 5.0, 0.0, 1.0, 0.1, 0.3).unwrap();
        let zero = InitialProfile::Tabulated {
            points: vec![[0.01, 0.0, 0.0, 0.0], [10.0, 0.0, 0.0, 0.0]],
        };
        let mut cfg = SolverConfig::for_params(&p, 64);
        cfg.snapshot_dt = 1.0;
        let out = run(&zero, &p, &cfg).unwrap();
        assert_eq!(out.trajectory.times, vec![0.0]);
        assert_eq!(out.trajectory.snapshots.len(), 1);
    }

    #[test]
    fn run_without_swirl_keeps_angular_momentum_exactly_zero() {
        let p = params();
        let prof = InitialProfile::PowerBlast {
            beta: 0.1,
            kappa: 0.0,
            u_factor: 2.0,
            cap_radius: 2.0,
        };
        let cfg = SolverConfig::for_params(&p, 128);
        let out = run(&prof, &p, &cfg).unwrap();
        for s in &out.trajectory.snapshots {
            assert!(s.m_hat.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn run_power_blast_keeps_lower_invariant_nonnegative() {
        let p = derive_params(2.0, 0.01, 10.0, 0.05, 1.0, 0.1, 0.3).unwrap();
        let prof = InitialProfile::PowerBlast {
            beta: 0.1,
            kappa: 0.05,
            u_factor: 2.0,
            cap_radius: 2.0,
        };
        let cfg = SolverConfig::for_params(&p, 512);
        let out = run(&prof, &p, &cfg).unwrap();
        let tol = 1e-6 * (1.0 + out.trajectory.params.m3) + 5.0 * out.trajectory.grid.dxi;
        for e in &out.trajectory.snapshot_extrema {
            assert!(e.z_bar_min >= -tol, "z_bar dipped to {} at t = {}", e.z_bar_min, e.t);
        }
        assert_eq!(out.trajectory.clip_events, 0);
    }

    #[test]
    fn boundary_triples_bit_identical_across_snapshots() {
        let p = params();
        let prof = InitialProfile::PowerBlast {
            beta: 0.1,
            kappa: 0.05,
            u_factor: 2.0,
            cap_radius: 2.0,
        };
        let cfg = SolverConfig::for_params(&p, 128);
        let out = run(&prof, &p, &cfg).unwrap();
        let traj = &out.trajectory;
        let n = traj.grid.n;
        for s in &traj.snapshots {
            assert_eq!(
                [s.rho_bar[0], s.m_bar[0], s.m_hat[0]],
                traj.left_bc
            );
            assert_eq!(
                [s.rho_bar[n - 1], s.m_bar[n - 1], s.m_hat[n - 1]],
                traj.right_bc
            );
        }
    }

    #[test]
    fn blow_up_is_reported_with_location() {
        let p = params();
        let grid = Grid::for_params(&p, 64).unwrap();
        let mut s = constant_state(64, 0.01);
        s.m_bar[30] = 1e200; // forces inf in the flux
        let cfg = SolverConfig::for_params(&p, 64);
        let bc = DirichletBc {
            left: [0.01, 0.0, 0.0],
            right: [0.01, 0.0, 0.0],
        };
        let res = step(&s, 1.0, &grid, &p, &cfg, &bc);
        // either the rhs flags non-finite or the state does after stepping
        assert!(res.is_err() || !res.unwrap().0.is_finite());
    }

    #[test]
    fn clip_events_are_counted() {
        let p = params();
        let grid = Grid::for_params(&p, 64).unwrap();
        let cfg = SolverConfig::for_params(&p, 64);
        let n = grid.n;
        // strong divergence drains the interior below the floor
        let mut s = constant_state(n, cfg.density_floor * 1.5);
        for i in 0..n {
            s.m_bar[i] = 1e-3 * (i as f64 / n as f64);
        }
        let bc = DirichletBc {
            left: [s.rho_bar[0], s.m_bar[0], 0.0],
            right: [s.rho_bar[n - 1], s.m_bar[n - 1], 0.0],
        };
        let (s1, clips) = step(&s, 1e-2, &grid, &p, &cfg, &bc).unwrap();
        assert!(clips > 0);
        assert!(s1.rho_bar.iter().all(|&r| r >= cfg.density_floor));
    }

    #[test]
    fn imex_matches_explicit_on_smooth_data() {
        let p = params();
        let prof = InitialProfile::PowerBlast {
            beta: 0.1,
            kappa: 0.05,
            u_factor: 2.0,
            cap_radius: 2.0,
        };
        let cfg_e = SolverConfig::for_params(&p, 256);
        let cfg_i = SolverConfig {
            integrator: Integrator::ImexDiffusion,
            ..cfg_e
        };
        let a = run(&prof, &p, &cfg_e).unwrap().trajectory;
        let b = run(&prof, &p, &cfg_i).unwrap().trajectory;
        let sa = a.snapshots.last().unwrap();
        let sb = b.snapshots.last().unwrap();
        let mut worst = 0.0f64;
        for i in 0..sa.len() {
            worst = worst.max((sa.rho_bar[i] - sb.rho_bar[i]).abs());
            worst = worst.max((sa.m_bar[i] - sb.m_bar[i]).abs());
        }
        assert!(worst < 5e-3, "integrator mismatch {worst}");
    }

    #[test]
    fn cross_check_needs_three_snapshots() {
        let p = derive_params(2.0, 0.05, 5.0, 0.0, 1.0, 0.1, 0.3).unwrap();
        let zero = InitialProfile::Tabulated {
            points: vec![[0.01, 0.0, 0.0, 0.0], [10.0, 0.0, 0.0, 0.0]],
        };
        let mut cfg = SolverConfig::for_params(&p, 64);
        cfg.snapshot_dt = 1.0;
        let out = run(&zero, &p, &cfg).unwrap();
        assert!(cross_check_physical(&out.trajectory).is_err());
    }

    #[test]
    fn cross_check_angular_residual_vanishes_without_swirl() {
        let p = params();
        let grid = Grid::for_params(&p, 64).unwrap();
        let s = constant_state(64, 0.01);
        let traj = Trajectory {
            times: vec![0.0, 0.01, 0.02],
            snapshots: vec![s.clone(), s.clone(), s],
            params: p,
            grid,
            clip_events: 0,
            node_steps: 0,
            snapshot_extrema: vec![],
            left_bc: [0.01, 0.0, 0.0],
            right_bc: [0.01, 0.0, 0.0],
        };
        let rep = cross_check_physical(&traj).unwrap();
        assert_eq!(rep.l1[2], 0.0);
        assert_eq!(rep.linf[2], 0.0);
        assert_eq!(rep.l1[0], 0.0); // mass: m = 0 and rho static
        assert!(rep.linf[1] > 0.0); // the constant state is not a steady state
    }
}
