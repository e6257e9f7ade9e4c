//! Families of runs over viscosity and resolution: viscosity-limit Cauchy
//! behavior in L1 on a fixed compact set, and fixed-viscosity self-convergence
//! orders under grid doubling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{entropy_dissipation_integral, weak_residual, TestFunctionSpec, WeakEquation};
use crate::error::{Error, Result};
use crate::field::ScaledField;
use crate::grid::Grid;
use crate::initial::InitialProfile;
use crate::params::{derive_params, Params};
use crate::solver::{cross_check_physical, run, Integrator, SolverConfig, Trajectory};

/// The compact set K inside the space-time cylinder on which runs are compared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompactSet {
    pub x_lo: f64,
    pub x_hi: f64,
    pub t_lo: f64,
    pub t_hi: f64,
}

/// Base run description shared by every member of a study.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyInputs {
    pub gamma: f64,
    pub b_max: f64,
    pub t_final: f64,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub profile: InitialProfile,
    pub cfl: f64,
    pub diff_number: f64,
    pub snapshot_dt: f64,
    pub integrator: Integrator,
}

impl StudyInputs {
    pub fn params_for(&self, epsilon: f64) -> Result<Params> {
        let b_eps = self.b_max.min(1.0 / epsilon);
        derive_params(
            self.gamma,
            epsilon,
            b_eps,
            self.t_final,
            self.m1,
            self.m2,
            self.m3,
        )
    }

    pub fn run_one(&self, epsilon: f64, n: usize, snapshot_dt: f64) -> Result<Trajectory> {
        let p = self.params_for(epsilon)?;
        let cfg = SolverConfig {
            n,
            cfl: self.cfl,
            diff_number: self.diff_number,
            snapshot_dt,
            density_floor: p.initial_density_floor() * 1e-4,
            integrator: self.integrator,
        };
        Ok(run(&self.profile, &p, &cfg)?.trajectory)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyPlan {
    /// Strictly halving viscosities, at least three.
    pub epsilons: Vec<f64>,
    /// Doubling node counts, at least three for refinement studies.
    pub grid_sizes: Vec<usize>,
    pub compact: CompactSet,
    /// Node count of the common comparison mesh.
    pub common_nodes: usize,
}

impl StudyPlan {
    fn validate_epsilons(&self) -> Result<()> {
        if self.epsilons.len() < 3 {
            return Err(Error::StudyPlan(format!(
                "need at least 3 viscosities, got {}",
                self.epsilons.len()
            )));
        }
        for w in self.epsilons.windows(2) {
            if (w[1] - w[0] / 2.0).abs() > 1e-9 * w[0] {
                return Err(Error::StudyPlan(format!(
                    "viscosities must halve: {} then {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(())
    }

    fn validate_grids(&self) -> Result<()> {
        if self.grid_sizes.len() < 3 {
            return Err(Error::StudyPlan(format!(
                "need at least 3 grid sizes, got {}",
                self.grid_sizes.len()
            )));
        }
        for w in self.grid_sizes.windows(2) {
            if w[1] != 2 * w[0] {
                return Err(Error::StudyPlan(format!(
                    "grid sizes must double: {} then {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(())
    }

    fn validate_compact(&self, inputs: &StudyInputs) -> Result<()> {
        let k = self.compact;
        if !(k.x_lo < k.x_hi && k.t_lo < k.t_hi && k.t_lo > 0.0) {
            return Err(Error::StudyPlan(format!(
                "degenerate compact set [{}, {}] x [{}, {}]",
                k.x_lo, k.x_hi, k.t_lo, k.t_hi
            )));
        }
        if k.t_hi > inputs.t_final {
            return Err(Error::StudyPlan(format!(
                "compact set reaches t = {} beyond t_final = {}",
                k.t_hi, inputs.t_final
            )));
        }
        for &eps in &self.epsilons {
            let p = inputs.params_for(eps)?;
            if k.x_lo <= p.a_eps || k.x_hi >= p.b_eps {
                return Err(Error::StudyPlan(format!(
                    "compact set [{}, {}] is not strictly inside the eps = {eps} domain ({}, {})",
                    k.x_lo, k.x_hi, p.a_eps, p.b_eps
                )));
            }
        }
        if self.common_nodes < 16 {
            return Err(Error::StudyPlan(format!(
                "common mesh needs at least 16 nodes, got {}",
                self.common_nodes
            )));
        }
        Ok(())
    }

    /// The uniform-in-xi comparison mesh over [x_lo, x_hi].
    pub fn common_mesh(&self) -> Vec<f64> {
        let (lo, hi) = (self.compact.x_lo.ln(), self.compact.x_hi.ln());
        let m = (self.common_nodes - 1) as f64;
        (0..self.common_nodes)
            .map(|i| (lo * (m - i as f64) + hi * i as f64) / m)
            .collect()
    }

    /// Interior bump spanning the compact set, for the dissipation integral
    /// and the weak-residual reruns.
    pub fn bump_on_compact(&self, p: &Params, weight_by_area: bool) -> Result<TestFunctionSpec> {
        let k = self.compact;
        TestFunctionSpec::interior(
            0.5 * (k.x_lo + k.x_hi),
            0.5 * (k.x_hi - k.x_lo),
            0.5 * (k.t_lo + k.t_hi),
            0.5 * (k.t_hi - k.t_lo),
            weight_by_area,
            p,
        )
    }
}

/// Linear interpolation (in xi) of nodal values onto a target xi mesh.
/// Exact for targets that coincide with grid nodes.
pub fn interpolate_onto(target_xi: &[f64], grid: &Grid, values: &[f64]) -> Vec<f64> {
    target_xi
        .iter()
        .map(|&xi| {
            let pos = (xi - grid.xi[0]) / grid.dxi;
            if pos <= 0.0 {
                return values[0];
            }
            let j = pos.floor() as usize;
            if j >= grid.n - 1 {
                return values[grid.n - 1];
            }
            let w = pos - j as f64;
            if w == 0.0 {
                values[j]
            } else {
                values[j] * (1.0 - w) + values[j + 1] * w
            }
        })
        .collect()
}

/// Physical components (rho, m, mtilde) of one snapshot interpolated onto the
/// common mesh.
fn sample_physical(traj: &Trajectory, k: usize, mesh_xi: &[f64]) -> [Vec<f64>; 3] {
    let s: &ScaledField = &traj.snapshots[k];
    let rb = interpolate_onto(mesh_xi, &traj.grid, &s.rho_bar);
    let mb = interpolate_onto(mesh_xi, &traj.grid, &s.m_bar);
    let mh = interpolate_onto(mesh_xi, &traj.grid, &s.m_hat);
    let p = &traj.params;
    let n = mesh_xi.len();
    let mut rho = vec![0.0; n];
    let mut m = vec![0.0; n];
    let mut mt = vec![0.0; n];
    for i in 0..n {
        let x = mesh_xi[i].exp();
        rho[i] = rb[i] * x.powf(p.c);
        m[i] = mb[i] * x.powf(p.d);
        mt[i] = mh[i] * x.powf(p.d);
    }
    [rho, m, mt]
}

fn trapezoid_weights(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut w = vec![0.0; n];
    if n < 2 {
        return w;
    }
    w[0] = 0.5 * (v[1] - v[0]);
    w[n - 1] = 0.5 * (v[n - 1] - v[n - 2]);
    for i in 1..n - 1 {
        w[i] = 0.5 * (v[i + 1] - v[i - 1]);
    }
    w
}

/// L1 and Linf distances, per physical component, between two trajectories on
/// the common space-time mesh over the compact set.
fn compare_on_compact(
    a: &Trajectory,
    b: &Trajectory,
    plan: &StudyPlan,
) -> Result<([f64; 3], [f64; 3])> {
    let mesh = plan.common_mesh();
    let mesh_x: Vec<f64> = mesh.iter().map(|&v| v.exp()).collect();
    let wx = trapezoid_weights(&mesh_x);
    let k = plan.compact;
    let times: Vec<(usize, usize, f64)> = a
        .times
        .iter()
        .enumerate()
        .filter(|(_, &t)| t >= k.t_lo - 1e-12 && t <= k.t_hi + 1e-12)
        .filter_map(|(ia, &t)| {
            b.times
                .iter()
                .position(|&tb| (tb - t).abs() <= 1e-12 * (1.0 + t))
                .map(|ib| (ia, ib, t))
        })
        .collect();
    if times.len() < 2 {
        return Err(Error::StudyPlan(format!(
            "only {} shared snapshot times inside the compact window; refine snapshot_dt",
            times.len()
        )));
    }
    let tvals: Vec<f64> = times.iter().map(|v| v.2).collect();
    let wt = trapezoid_weights(&tvals);
    let mut l1 = [0.0; 3];
    let mut linf = [0.0f64; 3];
    for (row, &(ia, ib, _)) in times.iter().enumerate() {
        let fa = sample_physical(a, ia, &mesh);
        let fb = sample_physical(b, ib, &mesh);
        for comp in 0..3 {
            for i in 0..mesh.len() {
                let d = (fa[comp][i] - fb[comp][i]).abs();
                l1[comp] += d * wx[i] * wt[row];
                linf[comp] = linf[comp].max(d);
            }
        }
    }
    Ok((l1, linf))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpsilonRow {
    pub epsilon: f64,
    pub a_eps: f64,
    pub n: usize,
    /// L1(K) distance to the previous (larger-viscosity) run, per component.
    pub delta_l1: Option<[f64; 3]>,
    pub delta_linf: Option<[f64; 3]>,
    /// Dissipation integral over the compact-set bump.
    pub dissipation: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpsilonStudyReport {
    pub rows: Vec<EpsilonRow>,
    /// Whether successive L1 differences decrease, per component.
    pub deltas_decreasing: [bool; 3],
    /// Componentwise-summed pairwise L1 distances between all runs.
    pub pairwise_l1: Vec<Vec<f64>>,
    pub compact: CompactSet,
}

pub struct EpsilonStudyOutcome {
    pub report: EpsilonStudyReport,
    pub trajectories: Vec<Trajectory>,
    pub wall_times_s: Vec<f64>,
}

/// Run each viscosity at the finest grid and report the Cauchy differences
/// and dissipation integrals.
pub fn epsilon_study(inputs: &StudyInputs, plan: &StudyPlan) -> Result<EpsilonStudyOutcome> {
    plan.validate_epsilons()?;
    if plan.grid_sizes.is_empty() {
        return Err(Error::StudyPlan("no grid sizes given".into()));
    }
    plan.validate_compact(inputs)?;
    let n = *plan.grid_sizes.iter().max().unwrap();

    let results: Vec<Result<(Trajectory, f64)>> = plan
        .epsilons
        .par_iter()
        .map(|&eps| {
            let start = std::time::Instant::now();
            let traj = inputs.run_one(eps, n, inputs.snapshot_dt).map_err(|e| {
                Error::StudyPlan(format!("run at eps = {eps} failed: {e}"))
            })?;
            Ok((traj, start.elapsed().as_secs_f64()))
        })
        .collect();
    let mut trajectories = Vec::new();
    let mut wall_times = Vec::new();
    for r in results {
        let (t, w) = r?;
        trajectories.push(t);
        wall_times.push(w);
    }

    let mut rows = Vec::new();
    for (j, traj) in trajectories.iter().enumerate() {
        let tf = plan.bump_on_compact(&traj.params, false)?;
        let dissipation = entropy_dissipation_integral(traj, &tf);
        let (delta_l1, delta_linf) = if j == 0 {
            (None, None)
        } else {
            let (l1, linf) = compare_on_compact(&trajectories[j - 1], traj, plan)?;
            (Some(l1), Some(linf))
        };
        rows.push(EpsilonRow {
            epsilon: plan.epsilons[j],
            a_eps: traj.params.a_eps,
            n,
            delta_l1,
            delta_linf,
            dissipation,
        });
    }
    let mut decreasing = [true; 3];
    let deltas: Vec<[f64; 3]> = rows.iter().filter_map(|r| r.delta_l1).collect();
    for comp in 0..3 {
        for w in deltas.windows(2) {
            // a component that is identically zero (no swirl) passes vacuously
            let vacuous = w[0][comp] == 0.0 && w[1][comp] == 0.0;
            if w[1][comp] >= w[0][comp] && !vacuous {
                decreasing[comp] = false;
            }
        }
    }
    let m = trajectories.len();
    let mut pairwise = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in i + 1..m {
            let (l1, _) = compare_on_compact(&trajectories[i], &trajectories[j], plan)?;
            let total = l1[0] + l1[1] + l1[2];
            pairwise[i][j] = total;
            pairwise[j][i] = total;
        }
    }
    Ok(EpsilonStudyOutcome {
        report: EpsilonStudyReport {
            rows,
            deltas_decreasing: decreasing,
            pairwise_l1: pairwise,
            compact: plan.compact,
        },
        trajectories,
        wall_times_s: wall_times,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridRow {
    pub n: usize,
    pub snapshot_dt: f64,
    /// L1 residual norms of the physical-coordinate system (per equation).
    pub cross_residual_l1: [f64; 3],
    /// Weak residual magnitudes against the compact-set bump (per equation).
    pub weak_residual: [f64; 3],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridStudyReport {
    pub epsilon: f64,
    pub rows: Vec<GridRow>,
    /// L1(K) self-convergence errors between consecutive sizes, per component.
    pub field_error_l1: Vec<[f64; 3]>,
    /// Orders from consecutive error pairs, per component.
    pub field_orders: Vec<[f64; 3]>,
    /// Orders of the cross-check residual L1 norms under doubling.
    pub cross_orders: Vec<[f64; 3]>,
    /// Orders of the weak residual magnitudes under doubling.
    pub weak_orders: Vec<[f64; 3]>,
    /// Set when errors sit at round-off and order measurement is meaningless.
    pub degenerate: bool,
}

pub struct GridStudyOutcome {
    pub report: GridStudyReport,
    pub wall_times_s: Vec<f64>,
}

/// Fixed-viscosity self-convergence under grid doubling. Snapshot spacing is
/// refined along with the grid so the time-stencil and quadrature errors of
/// the residual audits shrink with the refinement.
pub fn grid_refinement_study(inputs: &StudyInputs, plan: &StudyPlan) -> Result<GridStudyOutcome> {
    plan.validate_grids()?;
    if plan.epsilons.is_empty() {
        return Err(Error::StudyPlan("no viscosities given".into()));
    }
    plan.validate_compact(inputs)?;
    let eps = plan.epsilons[0];
    let n0 = plan.grid_sizes[0] as f64;

    let specs: Vec<(usize, f64)> = plan
        .grid_sizes
        .iter()
        .map(|&n| (n, inputs.snapshot_dt * n0 / n as f64))
        .collect();
    let results: Vec<Result<(Trajectory, f64)>> = specs
        .par_iter()
        .map(|&(n, sdt)| {
            let start = std::time::Instant::now();
            let traj = inputs
                .run_one(eps, n, sdt)
                .map_err(|e| Error::StudyPlan(format!("run at n = {n} failed: {e}")))?;
            Ok((traj, start.elapsed().as_secs_f64()))
        })
        .collect();
    let mut trajectories = Vec::new();
    let mut wall_times = Vec::new();
    for r in results {
        let (t, w) = r?;
        trajectories.push(t);
        wall_times.push(w);
    }

    let mut rows = Vec::new();
    for (j, traj) in trajectories.iter().enumerate() {
        let residual = cross_check_physical(traj)?;
        let tf = plan.bump_on_compact(&traj.params, true)?;
        let weak = [
            weak_residual(traj, &tf, WeakEquation::Mass).abs(),
            weak_residual(traj, &tf, WeakEquation::NormalMomentum).abs(),
            weak_residual(traj, &tf, WeakEquation::AngularMomentum).abs(),
        ];
        rows.push(GridRow {
            n: plan.grid_sizes[j],
            snapshot_dt: specs[j].1,
            cross_residual_l1: residual.l1,
            weak_residual: weak,
        });
    }

    let mut field_error = Vec::new();
    for j in 0..trajectories.len() - 1 {
        let (l1, _) = compare_on_compact(&trajectories[j], &trajectories[j + 1], plan)?;
        field_error.push(l1);
    }
    let scale: f64 = field_error
        .iter()
        .map(|e| e[0] + e[1] + e[2])
        .fold(0.0, f64::max);
    let degenerate = scale < 1e-12;
    let orders_of = |vals: Vec<[f64; 3]>| -> Vec<[f64; 3]> {
        vals.windows(2)
            .map(|w| {
                let mut o = [0.0; 3];
                for c in 0..3 {
                    o[c] = if w[0][c] > 0.0 && w[1][c] > 0.0 {
                        (w[0][c] / w[1][c]).log2()
                    } else {
                        f64::NAN
                    };
                }
                o
            })
            .collect()
    };
    let field_orders = orders_of(field_error.clone());
    let cross_orders = orders_of(rows.iter().map(|r| r.cross_residual_l1).collect());
    let weak_orders = orders_of(rows.iter().map(|r| r.weak_residual).collect());

    Ok(GridStudyOutcome {
        report: GridStudyReport {
            epsilon: eps,
            rows,
            field_error_l1: field_error,
            field_orders,
            cross_orders,
            weak_orders,
            degenerate,
        },
        wall_times_s: wall_times,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inputs() -> StudyInputs {
        StudyInputs {
            gamma: 2.0,
            b_max: 10.0,
            t_final: 0.05,
            m1: 1.0,
            m2: 0.1,
            m3: 0.3,
            profile: InitialProfile::PowerBlast {
                beta: 0.1,
                kappa: 0.05,
                u_factor: 2.0,
                cap_radius: 2.0,
            },
            cfl: 0.4,
            diff_number: 0.25,
            snapshot_dt: 0.005,
            integrator: Integrator::ExplicitSsp2,
        }
    }

    fn plan() -> StudyPlan {
        StudyPlan {
            epsilons: vec![0.04, 0.02, 0.01],
            grid_sizes: vec![64, 128, 256],
            compact: CompactSet {
                x_lo: 0.8,
                x_hi: 3.0,
                t_lo: 0.01,
                t_hi: 0.05,
            },
            common_nodes: 129,
        }
    }

    #[test]
    fn plan_validation() {
        let mut p = plan();
        p.epsilons = vec![0.04, 0.02];
        assert!(epsilon_study(&inputs(), &p).is_err());
        let mut p = plan();
        p.epsilons = vec![0.04, 0.03, 0.02];
        assert!(epsilon_study(&inputs(), &p).is_err());
        let mut p = plan();
        p.grid_sizes = vec![64, 128, 200];
        assert!(grid_refinement_study(&inputs(), &p).is_err());
        let mut p = plan();
        p.compact.x_lo = 0.01; // inside a(eps) for eps = 0.04
        assert!(epsilon_study(&inputs(), &p).is_err());
    }

    #[test]
    fn interpolation_idempotent_on_grid_nodes() {
        let g = Grid::new(0.5, 4.0, 33).unwrap();
        let vals: Vec<f64> = (0..33).map(|i| (i as f64).sin()).collect();
        let out = interpolate_onto(&g.xi, &g, &vals);
        assert_eq!(out, vals);
    }

    #[test]
    fn identical_runs_have_zero_distance() {
        let inp = inputs();
        let pl = plan();
        let a = inp.run_one(0.02, 128, inp.snapshot_dt).unwrap();
        let b = inp.run_one(0.02, 128, inp.snapshot_dt).unwrap();
        let (l1, linf) = compare_on_compact(&a, &b, &pl).unwrap();
        assert_eq!(l1, [0.0; 3]);
        assert_eq!(linf, [0.0; 3]);
    }

    #[test]
    fn epsilon_study_produces_rows_and_deltas() {
        let out = epsilon_study(&inputs(), &plan()).unwrap();
        let rep = &out.report;
        assert_eq!(rep.rows.len(), 3);
        assert!(rep.rows[0].delta_l1.is_none());
        assert!(rep.rows[1].delta_l1.is_some());
        assert!(rep.rows[2].delta_l1.is_some());
        assert!(rep.rows.iter().all(|r| r.dissipation >= 0.0));
        assert_eq!(rep.pairwise_l1.len(), 3);
        assert!(rep.pairwise_l1[0][1] > 0.0);
        assert_eq!(rep.pairwise_l1[1][0], rep.pairwise_l1[0][1]);
    }

    #[test]
    fn grid_study_reports_orders() {
        let out = grid_refinement_study(&inputs(), &plan()).unwrap();
        let rep = &out.report;
        assert_eq!(rep.rows.len(), 3);
        assert_eq!(rep.field_error_l1.len(), 2);
        assert_eq!(rep.field_orders.len(), 1);
        assert_eq!(rep.cross_orders.len(), 2);
        assert!(!rep.degenerate);
        // smooth viscous data: self-convergence order lands between the flux
        // order and the time-integration order
        for c in 0..2 {
            let o = rep.field_orders[0][c];
            assert!(o > 0.5 && o < 3.0, "component {c} order {o}");
        }
    }
}
