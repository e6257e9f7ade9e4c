//! Verification records, snapshot CSV format, and the run report JSON.
//!
//! Snapshot files carry one row per node with the full scaled and physical
//! state plus the Riemann invariants; the column set is fixed and validated
//! on read. Floats are written with 17 significant digits so a write/read
//! round trip reproduces every f64 bit-exactly.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{riemann_invariants, scale_to_physical, ScaledField};
use crate::grid::Grid;
use crate::params::Params;
use crate::solver::{SnapshotExtrema, Trajectory};

/// Outcome of a single diagnostic check. `passed` is kept consistent with
/// `metric <= tolerance` by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationRecord {
    pub name: String,
    pub passed: bool,
    pub metric: f64,
    pub tolerance: f64,
    pub worst_t: f64,
    pub worst_x: f64,
    pub notes: String,
}

impl VerificationRecord {
    pub fn new(
        name: impl Into<String>,
        metric: f64,
        tolerance: f64,
        worst: (f64, f64),
        notes: impl Into<String>,
    ) -> VerificationRecord {
        VerificationRecord {
            name: name.into(),
            passed: metric <= tolerance,
            metric,
            tolerance,
            worst_t: worst.0,
            worst_x: worst.1,
            notes: notes.into(),
        }
    }

    /// Informational record: a reported value with no pass criterion.
    pub fn info(name: impl Into<String>, metric: f64, notes: impl Into<String>) -> VerificationRecord {
        VerificationRecord::new(name, metric, f64::INFINITY, (0.0, 0.0), notes)
    }
}

pub const SNAPSHOT_COLUMNS: [&str; 12] = [
    "t", "x", "xi", "rho", "m", "mtilde", "rho_bar", "m_bar", "m_hat", "w_bar", "z_bar",
    "omega_hat",
];

/// Write one snapshot CSV into `dir` as `snap_NNNNN.csv`.
pub fn write_snapshot(
    dir: &Path,
    index: usize,
    t: f64,
    s: &ScaledField,
    grid: &Grid,
    p: &Params,
) -> Result<PathBuf> {
    let f = scale_to_physical(s, grid, p);
    let inv = riemann_invariants(s, p, 0.0)?;
    let path = dir.join(format!("snap_{index:05}.csv"));
    let mut out = String::with_capacity(grid.n * 220);
    out.push_str(&SNAPSHOT_COLUMNS.join(","));
    out.push('\n');
    for i in 0..grid.n {
        out.push_str(&format!(
            "{t:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}\n",
            grid.x[i],
            grid.xi[i],
            f.rho[i],
            f.m[i],
            f.m_tilde[i],
            s.rho_bar[i],
            s.m_bar[i],
            s.m_hat[i],
            inv.w_bar[i],
            inv.z_bar[i],
            inv.omega_hat[i],
        ));
    }
    let mut file = fs::File::create(&path)?;
    file.write_all(out.as_bytes())?;
    Ok(path)
}

/// Write every snapshot of a trajectory into `dir`.
pub fn write_trajectory(dir: &Path, traj: &Trajectory) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (k, (t, s)) in traj.times.iter().zip(traj.snapshots.iter()).enumerate() {
        write_snapshot(dir, k, *t, s, &traj.grid, &traj.params)?;
    }
    Ok(())
}

fn parse_snapshot_file(path: &Path) -> Result<(f64, Vec<f64>, Vec<f64>, ScaledField)> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::SnapshotFormat(format!("{}: empty file", path.display())))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    for required in SNAPSHOT_COLUMNS {
        if !cols.contains(&required) {
            return Err(Error::SnapshotFormat(format!(
                "{}: missing column '{required}'",
                path.display()
            )));
        }
    }
    let idx = |name: &str| cols.iter().position(|c| *c == name).unwrap();
    let (it, ix, ixi) = (idx("t"), idx("x"), idx("xi"));
    let (irb, imb, imh) = (idx("rho_bar"), idx("m_bar"), idx("m_hat"));

    let mut t = None;
    let mut x = Vec::new();
    let mut xi = Vec::new();
    let mut s = ScaledField::zeros(0);
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(Error::SnapshotFormat(format!(
                "{}:{}: expected {} fields, found {}",
                path.display(),
                lineno + 2,
                cols.len(),
                fields.len()
            )));
        }
        let get = |j: usize| -> Result<f64> {
            fields[j].trim().parse::<f64>().map_err(|e| {
                Error::SnapshotFormat(format!(
                    "{}:{}: bad float in column '{}': {e}",
                    path.display(),
                    lineno + 2,
                    cols[j]
                ))
            })
        };
        let row_t = get(it)?;
        match t {
            None => t = Some(row_t),
            Some(t0) if t0 != row_t => {
                return Err(Error::SnapshotFormat(format!(
                    "{}: inconsistent t within one snapshot",
                    path.display()
                )))
            }
            _ => {}
        }
        x.push(get(ix)?);
        xi.push(get(ixi)?);
        s.rho_bar.push(get(irb)?);
        s.m_bar.push(get(imb)?);
        s.m_hat.push(get(imh)?);
    }
    let t = t.ok_or_else(|| Error::SnapshotFormat(format!("{}: no data rows", path.display())))?;
    Ok((t, x, xi, s))
}

/// Reassemble a trajectory from a directory of snapshot CSVs.
///
/// Params come from the caller (typically the run config); the grid is taken
/// from the first snapshot's xi column; per-snapshot extrema are recomputed.
/// Clip-event counts are not recoverable from snapshots and read as zero.
pub fn read_trajectory(dir: &Path, params: Params) -> Result<Trajectory> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .map(|n| n.starts_with("snap_") && n.ends_with(".csv"))
                .unwrap_or(false)
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::SnapshotFormat(format!(
            "{}: no snap_*.csv files found",
            dir.display()
        )));
    }
    let mut times = Vec::with_capacity(files.len());
    let mut snapshots = Vec::with_capacity(files.len());
    let mut grid: Option<Grid> = None;
    for f in &files {
        let (t, x, xi, s) = parse_snapshot_file(f)?;
        match &grid {
            None => {
                let n = xi.len();
                if n < 4 {
                    return Err(Error::SnapshotFormat(format!(
                        "{}: snapshot has fewer than 4 nodes",
                        f.display()
                    )));
                }
                let dxi = (xi[n - 1] - xi[0]) / (n - 1) as f64;
                grid = Some(Grid { n, xi, x, dxi });
            }
            Some(g) => {
                if xi.len() != g.n {
                    return Err(Error::SnapshotFormat(format!(
                        "{}: node count {} differs from first snapshot's {}",
                        f.display(),
                        xi.len(),
                        g.n
                    )));
                }
            }
        }
        times.push(t);
        snapshots.push(s);
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::SnapshotFormat(
            "snapshot times are not strictly increasing".into(),
        ));
    }
    let grid = grid.unwrap();
    let extrema = times
        .iter()
        .zip(snapshots.iter())
        .map(|(t, s)| SnapshotExtrema::measure(*t, s, &params))
        .collect();
    let left_bc = [
        snapshots[0].rho_bar[0],
        snapshots[0].m_bar[0],
        snapshots[0].m_hat[0],
    ];
    let nlast = grid.n - 1;
    let right_bc = [
        snapshots[0].rho_bar[nlast],
        snapshots[0].m_bar[nlast],
        snapshots[0].m_hat[nlast],
    ];
    Ok(Trajectory {
        times,
        snapshots,
        params,
        grid,
        clip_events: 0,
        node_steps: 0,
        snapshot_extrema: extrema,
        left_bc,
        right_bc,
    })
}

/// Fields of the run report that must be byte-identical across reruns.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunResult {
    pub params: Params,
    pub initial: crate::initial::InitialReport,
    pub clip_events: u64,
    pub clip_fraction: f64,
    pub clip_flag: bool,
    pub snapshot_extrema: Vec<SnapshotExtrema>,
    pub verifications: Vec<VerificationRecord>,
}

/// Non-deterministic bookkeeping, excluded from reproducibility comparisons.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportMeta {
    pub wall_time_s: f64,
    pub created_unix_s: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub meta: ReportMeta,
    pub result: RunResult,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::derive_params;

    #[test]
    fn record_pass_flag_consistent() {
        let r = VerificationRecord::new("x", 0.5, 1.0, (0.0, 0.0), "");
        assert!(r.passed);
        let r = VerificationRecord::new("x", 2.0, 1.0, (0.0, 0.0), "");
        assert!(!r.passed);
        assert!(VerificationRecord::info("v", 123.0, "").passed);
    }

    #[test]
    fn snapshot_roundtrip_is_exact() {
        let p = derive_params(2.0, 0.05, 5.0, 0.1, 1.0, 0.1, 0.3).unwrap();
        let grid = Grid::for_params(&p, 16).unwrap();
        let s = ScaledField {
            rho_bar: (0..16).map(|i| 0.01 + 1e-3 * i as f64).collect(),
            m_bar: (0..16).map(|i| 1e-4 * (i as f64).sin()).collect(),
            m_hat: (0..16).map(|i| -1e-5 * i as f64).collect(),
        };
        let dir = tempfile::tempdir().unwrap();
        write_snapshot(dir.path(), 0, 0.0625, &s, &grid, &p).unwrap();
        let (t, x, xi, s2) = parse_snapshot_file(&dir.path().join("snap_00000.csv")).unwrap();
        assert_eq!(t, 0.0625);
        assert_eq!(x, grid.x);
        assert_eq!(xi, grid.xi);
        assert_eq!(s2, s);
    }

    #[test]
    fn missing_column_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snap_00000.csv");
        fs::write(&path, "t,x,xi,rho,m,mtilde,rho_bar,m_bar,w_bar,z_bar,omega_hat\n").unwrap();
        let err = parse_snapshot_file(&path).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("m_hat"), "error should name the column: {msg}");
    }
}
