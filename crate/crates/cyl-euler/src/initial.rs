//! Initial and boundary data construction.
//!
//! Raw analytic profiles are floored, velocity-shifted, cut off near the
//! inner boundary, and mollified:
//!
//! * the density fluctuation is multiplied by the cutoff chi = 1_{x >= 2a(eps)}
//!   and floored by eps^(2/theta), so the state near x = a(eps) is exactly the
//!   quiet floor state and z_bar0 = -eps^2 there (the lower Riemann invariant
//!   stays nonnegative up to O(eps^2) everywhere);
//! * the normal velocity is shifted by +eps, making z_bar0 strictly positive
//!   wherever the gas is present;
//! * the angular velocity is NOT shifted, so kappa = 0 yields m_hat
//!   identically zero and the angular momentum stays exactly zero for all time;
//! * all three components are convolved with a discrete nonnegative unit-mass
//!   mollifier acting in xi, of support radius max(eps, 2 dxi) so the kernel
//!   never falls below grid resolution.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bump::bump;
use crate::error::{Error, Result};
use crate::field::{PhysicalField, ScaledField};
use crate::grid::Grid;
use crate::params::Params;
use crate::report::VerificationRecord;

/// Analytic or tabulated initial profile in physical variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InitialProfile {
    /// Outward-moving blast: rho0 = (beta h(x))^c with h(x) = x below
    /// `cap_radius` and smoothly constant beyond, u0 = u_factor * rho0^theta,
    /// omega0 = kappa * x.
    PowerBlast {
        beta: f64,
        kappa: f64,
        u_factor: f64,
        cap_radius: f64,
    },
    /// Tabulated (x, rho0, u0, omega0) samples, linearly interpolated in x.
    Tabulated { points: Vec<[f64; 4]> },
}

/// Summary of the constructed initial data, kept in the run report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialReport {
    /// max over nodes of the constructed w_bar0; feeds the control function.
    pub m3_observed: f64,
    pub w0_max: f64,
    pub z0_min: f64,
    pub omega0_abs_max: f64,
    /// eps^(2/theta), the additive density floor.
    pub density_floor_initial: f64,
    /// Largest component mismatch between the initial data and the Dirichlet
    /// triple at each end (zero when the cutoff zone is resolved).
    pub corner_jump_left: f64,
    pub corner_jump_right: f64,
    /// Discrete mollifier half-width in nodes.
    pub mollifier_half_width: usize,
}

impl InitialProfile {
    /// Smoothly capped radius argument: h(x) = x for x <= r, cubic blend on
    /// [r, 1.2 r] to the constant 1.1 r. Monotone, C^1, and h(x) <= x, so the
    /// capped profile keeps every admissibility inequality of the uncapped one.
    fn capped(x: f64, r: f64) -> f64 {
        if x <= r {
            x
        } else if x >= 1.2 * r {
            1.1 * r
        } else {
            let t = (x - r) / (0.2 * r);
            let h00 = 2.0 * t * t * t - 3.0 * t * t + 1.0;
            let h10 = t * t * t - 2.0 * t * t + t;
            let h01 = -2.0 * t * t * t + 3.0 * t * t;
            r * h00 + 0.2 * r * h10 + 1.1 * r * h01
        }
    }

    /// Raw scaled profile (rho_bar0, m_bar0, m_hat0) at radius x.
    pub fn eval_scaled(&self, x: f64, p: &Params) -> [f64; 3] {
        match self {
            InitialProfile::PowerBlast {
                beta,
                kappa,
                u_factor,
                cap_radius,
            } => {
                // With phi = beta h(x) / x <= beta:
                //   rho_bar0 = phi^c, m_bar0 = u_factor phi^d, m_hat0 = kappa phi^c.
                let phi = beta * Self::capped(x, *cap_radius) / x;
                let rho_bar = phi.powf(p.c);
                [rho_bar, u_factor * phi.powf(p.d), kappa * rho_bar]
            }
            InitialProfile::Tabulated { points } => {
                let (rho0, u0, om0) = interp_tabulated(points, x);
                let xc = x.powf(p.c);
                let xd = x.powf(p.d);
                [rho0 / xc, rho0 * u0 / xd, rho0 * om0 / xd]
            }
        }
    }

    /// Raw physical profile on a grid (pre-floor, pre-mollification).
    pub fn eval_physical(&self, grid: &Grid, p: &Params) -> PhysicalField {
        let n = grid.n;
        let mut s = ScaledField::zeros(n);
        for i in 0..n {
            let v = self.eval_scaled(grid.x[i], p);
            s.rho_bar[i] = v[0];
            s.m_bar[i] = v[1];
            s.m_hat[i] = v[2];
        }
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
            // ratios, not m/rho, so vacuum nodes stay finite
            let (u, ut) = if s.rho_bar[i] > 0.0 {
                (
                    s.m_bar[i] / s.rho_bar[i] * grid.x[i],
                    s.m_hat[i] / s.rho_bar[i] * grid.x[i],
                )
            } else {
                (0.0, 0.0)
            };
            f.u[i] = u;
            f.u_tilde[i] = ut;
        }
        f
    }

    /// Load a tabulated profile from a CSV with header `x,rho0,u0,omega0`.
    pub fn from_csv(path: &Path) -> Result<InitialProfile> {
        let text = std::fs::read_to_string(path)?;
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::SnapshotFormat(format!("{}: empty file", path.display())))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols != ["x", "rho0", "u0", "omega0"] {
            return Err(Error::SnapshotFormat(format!(
                "{}: expected header 'x,rho0,u0,omega0', found '{header}'",
                path.display()
            )));
        }
        let mut points = Vec::new();
        for (k, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let vals: Vec<f64> = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| {
                    Error::SnapshotFormat(format!("{}:{}: {e}", path.display(), k + 2))
                })?;
            if vals.len() != 4 {
                return Err(Error::SnapshotFormat(format!(
                    "{}:{}: expected 4 fields",
                    path.display(),
                    k + 2
                )));
            }
            points.push([vals[0], vals[1], vals[2], vals[3]]);
        }
        if points.len() < 2 {
            return Err(Error::SnapshotFormat(format!(
                "{}: need at least two sample points",
                path.display()
            )));
        }
        if points.windows(2).any(|w| w[1][0] <= w[0][0]) {
            return Err(Error::SnapshotFormat(format!(
                "{}: x column must be strictly increasing",
                path.display()
            )));
        }
        Ok(InitialProfile::Tabulated { points })
    }
}

fn interp_tabulated(points: &[[f64; 4]], x: f64) -> (f64, f64, f64) {
    let first = points.first().unwrap();
    let last = points.last().unwrap();
    if x <= first[0] {
        return (first[1], first[2], first[3]);
    }
    if x >= last[0] {
        return (last[1], last[2], last[3]);
    }
    let j = points.partition_point(|p| p[0] <= x).min(points.len() - 1);
    let (lo, hi) = (&points[j - 1], &points[j]);
    let w = (x - lo[0]) / (hi[0] - lo[0]);
    (
        lo[1] + w * (hi[1] - lo[1]),
        lo[2] + w * (hi[2] - lo[2]),
        lo[3] + w * (hi[3] - lo[3]),
    )
}

/// Admissibility of raw initial data: rho0 >= 0, m0/rho0 + rho0^theta <= m1 x,
/// m0/rho0 - rho0^theta >= 0, |mtilde0/rho0| <= m2 x, each to 1e-12. Nodes with
/// rho0 = 0 are admissible iff both momenta vanish there. The report, not an
/// error, carries the verdict.
pub fn check_admissibility(f: &PhysicalField, grid: &Grid, p: &Params) -> VerificationRecord {
    const TOL: f64 = 1e-12;
    let mut worst = f64::NEG_INFINITY;
    let mut worst_node = 0;
    let mut worst_kind = "none";
    let mut check = |val: f64, i: usize, kind: &'static str, worst: &mut f64| {
        if val > *worst {
            *worst = val;
            worst_node = i;
            worst_kind = kind;
        }
    };
    for i in 0..grid.n {
        let (rho, m, mt, x) = (f.rho[i], f.m[i], f.m_tilde[i], grid.x[i]);
        check(-rho, i, "rho0 >= 0", &mut worst);
        if rho > 0.0 {
            let sound = rho.powf(p.theta);
            let vel = m / rho;
            check(vel + sound - p.m1 * x, i, "w0 <= M1 x", &mut worst);
            check(-(vel - sound), i, "z0 >= 0", &mut worst);
            check((mt / rho).abs() - p.m2 * x, i, "|omega0| <= M2 x", &mut worst);
        } else {
            check(m.abs(), i, "m0 = 0 at vacuum", &mut worst);
            check(mt.abs(), i, "mtilde0 = 0 at vacuum", &mut worst);
        }
    }
    let notes = format!(
        "worst inequality: {worst_kind}; the scaled form |omega_hat0| <= M2 is the same \
         inequality divided by x and is not checked separately"
    );
    VerificationRecord::new(
        "initial-admissibility",
        worst,
        TOL,
        (0.0, grid.x[worst_node]),
        notes,
    )
}

/// Discrete mollifier weights: bump(k/K) for |k| <= K, renormalized to unit
/// mass. K = max(ceil(eps/dxi), 2), so the kernel spans at least 3 nonzero
/// nodes on any grid fine enough to hold it.
fn mollifier_weights(p: &Params, grid: &Grid) -> Result<(usize, Vec<f64>)> {
    let k = ((p.epsilon / grid.dxi).ceil() as usize).max(2);
    if 2 * k + 1 > grid.n {
        return Err(Error::GridTooCoarse {
            needed: 2 * k + 1,
            have: grid.n,
        });
    }
    let mut w: Vec<f64> = (-(k as isize)..=k as isize)
        .map(|j| bump(j as f64 / k as f64))
        .collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    Ok((k, w))
}

fn convolve_replicated(f: &[f64], half: usize, w: &[f64]) -> Vec<f64> {
    let n = f.len() as isize;
    (0..n)
        .map(|i| {
            w.iter()
                .enumerate()
                .map(|(j, &wj)| {
                    let idx = (i + j as isize - half as isize).clamp(0, n - 1) as usize;
                    wj * f[idx]
                })
                .sum()
        })
        .collect()
}

/// Build the solver's initial data from an admissible raw profile.
pub fn build_initial_data(
    profile: &InitialProfile,
    grid: &Grid,
    p: &Params,
) -> Result<(ScaledField, InitialReport)> {
    let raw_physical = profile.eval_physical(grid, p);
    let adm = check_admissibility(&raw_physical, grid, p);
    if !adm.passed {
        return Err(Error::Inadmissible(format!(
            "metric {:.3e} at x = {:.6} ({})",
            adm.metric, adm.worst_x, adm.notes
        )));
    }
    let (half, weights) = mollifier_weights(p, grid)?;
    let floor = p.initial_density_floor();
    let cut = 2.0 * p.a_eps;
    let n = grid.n;

    let mut rho_pre = vec![0.0; n];
    let mut m_pre = vec![0.0; n];
    let mut mh_pre = vec![0.0; n];
    for i in 0..n {
        let [rb, mb, mh] = profile.eval_scaled(grid.x[i], p);
        let chi = if grid.x[i] >= cut { 1.0 } else { 0.0 };
        let (vel_n, vel_a) = if rb > 0.0 { (mb / rb, mh / rb) } else { (0.0, 0.0) };
        rho_pre[i] = rb * chi + floor;
        m_pre[i] = (vel_n + p.epsilon) * (rb + floor) * chi;
        mh_pre[i] = vel_a * (rb + floor) * chi;
    }
    let field = ScaledField {
        rho_bar: convolve_replicated(&rho_pre, half, &weights),
        m_bar: convolve_replicated(&m_pre, half, &weights),
        m_hat: convolve_replicated(&mh_pre, half, &weights),
    };

    let mut w0_max = f64::NEG_INFINITY;
    let mut z0_min = f64::INFINITY;
    let mut om0_max = 0.0f64;
    for i in 0..n {
        let r = field.rho_bar[i];
        let vel = field.m_bar[i] / r;
        let sound = r.powf(p.theta);
        w0_max = w0_max.max(vel + sound);
        z0_min = z0_min.min(vel - sound);
        om0_max = om0_max.max((field.m_hat[i] / r).abs());
    }
    let corner_left = field.m_bar[0].abs().max(field.m_hat[0].abs());
    let report = InitialReport {
        m3_observed: w0_max,
        w0_max,
        z0_min,
        omega0_abs_max: om0_max,
        density_floor_initial: floor,
        corner_jump_left: corner_left,
        corner_jump_right: 0.0,
        mollifier_half_width: half,
    };
    Ok((field, report))
}

/// Dirichlet triples held for all time: (rho_bar0(a), 0, 0) on the left, the
/// initial values at b on the right.
pub fn boundary_values(s0: &ScaledField) -> ([f64; 3], [f64; 3]) {
    let n = s0.len();
    (
        [s0.rho_bar[0], 0.0, 0.0],
        [s0.rho_bar[n - 1], s0.m_bar[n - 1], s0.m_hat[n - 1]],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::derive_params;

    fn reference_params() -> Params {
        derive_params(2.0, 2e-3, 10.0, 0.2, 1.0, 0.1, 0.3).unwrap()
    }

    fn reference_profile() -> InitialProfile {
        InitialProfile::PowerBlast {
            beta: 0.1,
            kappa: 0.05,
            u_factor: 2.0,
            cap_radius: 2.0,
        }
    }

    #[test]
    fn power_blast_scaled_constants_below_cap() {
        let p = reference_params();
        let prof = reference_profile();
        // Below the cap the scaled profile is constant: rho_bar = beta^c,
        // m_bar = u_factor beta^d, m_hat = kappa beta^c.
        for x in [0.2, 0.5, 1.0, 1.9] {
            let [rb, mb, mh] = prof.eval_scaled(x, &p);
            assert!((rb - 0.01).abs() < 1e-14);
            assert!((mb - 2.0 * 0.001).abs() < 1e-14);
            assert!((mh - 0.05 * 0.01).abs() < 1e-15);
        }
        // Beyond the cap the profile decays but stays admissible.
        let [rb_far, ..] = prof.eval_scaled(9.0, &p);
        assert!(rb_far < 0.01 && rb_far > 0.0);
    }

    #[test]
    fn admissibility_reference_passes() {
        let p = reference_params();
        let g = Grid::for_params(&p, 256).unwrap();
        let f = reference_profile().eval_physical(&g, &p);
        let rec = check_admissibility(&f, &g, &p);
        assert!(rec.passed, "metric {} ({})", rec.metric, rec.notes);
    }

    #[test]
    fn admissibility_flags_inward_motion() {
        let p = reference_params();
        let g = Grid::for_params(&p, 128).unwrap();
        let prof = InitialProfile::PowerBlast {
            beta: 0.1,
            kappa: 0.05,
            u_factor: 0.5,
            cap_radius: 2.0,
        };
        let rec = check_admissibility(&prof.eval_physical(&g, &p), &g, &p);
        assert!(!rec.passed);
        assert!(rec.notes.contains("z0 >= 0"), "{}", rec.notes);
    }

    #[test]
    fn admissibility_flags_excess_swirl() {
        let p = reference_params();
        let g = Grid::for_params(&p, 128).unwrap();
        // omega0 = 2 M2 x violates the angular bound by a factor of 2
        let prof = InitialProfile::PowerBlast {
            beta: 0.1,
            kappa: 0.2,
            u_factor: 2.0,
            cap_radius: 2.0,
        };
        let rec = check_admissibility(&prof.eval_physical(&g, &p), &g, &p);
        assert!(!rec.passed);
        assert!(rec.notes.contains("omega0"), "{}", rec.notes);
    }

    #[test]
    fn zero_profile_floor_shift_and_cut() {
        // eps = 0.05 keeps the floor representable: floor = eps^4.
        let p = derive_params(2.0, 0.05, 5.0, 0.1, 1.0, 0.1, 0.3).unwrap();
        let g = Grid::for_params(&p, 512).unwrap();
        let zero = InitialProfile::Tabulated {
            points: vec![[0.01, 0.0, 0.0, 0.0], [20.0, 0.0, 0.0, 0.0]],
        };
        let (s, rep) = build_initial_data(&zero, &g, &p).unwrap();
        let floor = p.initial_density_floor();
        for i in 0..g.n {
            assert!((s.rho_bar[i] - floor).abs() <= 1e-15 * floor);
            // normal momentum: eps * floor inside chi, 0 in the cutoff zone
            let chi_zone = g.x[i] < 2.0 * p.a_eps;
            if chi_zone && g.x[i] < 2.0 * p.a_eps * (-(rep.mollifier_half_width as f64) * g.dxi).exp() {
                assert_eq!(s.m_bar[i], 0.0);
            }
            if g.x[i] > 2.0 * p.a_eps * ((rep.mollifier_half_width as f64 + 1.0) * g.dxi).exp() {
                let expect = p.epsilon * floor;
                assert!((s.m_bar[i] - expect).abs() <= 1e-12 * expect);
            }
            // no angular shift: m_hat identically zero
            assert_eq!(s.m_hat[i], 0.0);
        }
        let (left, right) = boundary_values(&s);
        assert_eq!(left, [floor, 0.0, 0.0]);
        assert!((right[0] - floor).abs() <= 1e-15 * floor);
        assert!((right[1] - p.epsilon * floor).abs() <= 1e-12 * p.epsilon * floor);
        assert_eq!(right[2], 0.0);
    }

    #[test]
    fn mollifier_reproduces_constants_and_linears() {
        let p = derive_params(2.0, 0.05, 5.0, 0.1, 1.0, 0.1, 0.3).unwrap();
        let g = Grid::for_params(&p, 256).unwrap();
        let (half, w) = mollifier_weights(&p, &g).unwrap();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!(w.iter().all(|&v| v >= 0.0));

        let constant = vec![3.25; g.n];
        let out = convolve_replicated(&constant, half, &w);
        for v in &out {
            assert!((v - 3.25).abs() < 1e-13);
        }
        // Symmetric weights annihilate the slope of an index-linear sequence
        // away from the replicated edges.
        let linear: Vec<f64> = (0..g.n).map(|i| 2.0 + 0.5 * i as f64).collect();
        let out = convolve_replicated(&linear, half, &w);
        for i in half..g.n - half {
            assert!((out[i] - linear[i]).abs() < 1e-12, "node {i}");
        }
    }

    #[test]
    fn rejects_grid_too_coarse_for_mollifier() {
        let p = derive_params(2.0, 0.05, 5.0, 0.1, 1.0, 0.1, 0.3).unwrap();
        let g = Grid::new(p.a_eps, p.b_eps, 4).unwrap();
        let err = build_initial_data(&reference_profile(), &g, &p).unwrap_err();
        assert!(matches!(err, Error::GridTooCoarse { .. }));
    }

    #[test]
    fn constructed_data_meets_invariant_region_hypotheses() {
        let p = reference_params();
        let g = Grid::for_params(&p, 2048).unwrap();
        let (s, rep) = build_initial_data(&reference_profile(), &g, &p).unwrap();
        let eps2 = p.epsilon * p.epsilon;
        // z_bar0 >= -eps^2 (the floor state value) within rounding
        assert!(
            rep.z0_min >= -eps2 * (1.0 + 1e-9),
            "z0_min = {} vs -eps^2 = {}",
            rep.z0_min,
            -eps2
        );
        // w_bar0 within M3 + 2 eps of the raw profile's ceiling
        assert!(rep.w0_max <= (2.0 + 1.0) * 0.1 + 2.0 * p.epsilon + 1e-9);
        // density floored everywhere
        let floor = p.initial_density_floor();
        assert!(s.rho_bar.iter().all(|&r| r >= floor * (1.0 - 1e-13)));
        // momenta vanish identically well inside the cutoff zone
        let guard = 2.0 * p.a_eps * (-(rep.mollifier_half_width as f64 + 1.0) * g.dxi).exp();
        for i in 0..g.n {
            if g.x[i] < guard {
                assert_eq!(s.m_bar[i], 0.0, "m_bar nonzero at x = {}", g.x[i]);
                assert_eq!(s.m_hat[i], 0.0);
            }
        }
        assert_eq!(rep.corner_jump_left, 0.0);
    }

    #[test]
    fn tabulated_csv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("profile.csv");
        std::fs::write(&path, "x,rho0,u0,omega0\n0.1,0.01,0.02,0.005\n10.0,0.04,0.4,0.5\n")
            .unwrap();
        let prof = InitialProfile::from_csv(&path).unwrap();
        match &prof {
            InitialProfile::Tabulated { points } => assert_eq!(points.len(), 2),
            _ => panic!(),
        }
        // midpoint interpolation is linear in x
        let (rho0, u0, om0) = interp_tabulated(
            match &prof {
                InitialProfile::Tabulated { points } => points,
                _ => unreachable!(),
            },
            5.05,
        );
        assert!((rho0 - 0.025).abs() < 1e-12);
        assert!((u0 - 0.21).abs() < 1e-12);
        assert!((om0 - 0.2525).abs() < 1e-12);

        std::fs::write(&path, "x,rho,u0,omega0\n0.1,0.01,0.02,0.005\n").unwrap();
        assert!(InitialProfile::from_csv(&path).is_err());
    }
}
