//! Line-oriented run configuration: `section.key = value` with `#` comments.
//!
//! Invalid configs produce a single aggregated error listing every violation.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::initial::InitialProfile;
use crate::params::{derive_params, Params};
use crate::solver::{Integrator, SolverConfig};
use crate::study::{CompactSet, StudyInputs, StudyPlan};

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub gamma: Option<f64>,
    pub epsilon: Option<f64>,
    pub nx: Option<usize>,
    pub t_final: Option<f64>,
}

/// Everything a run or study needs, parsed and validated.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub gamma: f64,
    pub epsilon: f64,
    pub b_max: f64,
    pub t_final: f64,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub profile: InitialProfile,
    pub n: usize,
    pub cfl: f64,
    pub diff_number: f64,
    pub snapshot_dt: Option<f64>,
    pub integrator: Integrator,
    pub output_dir: PathBuf,
    /// Enabled verification names; `None` means the full standard set.
    pub verifications: Option<Vec<String>>,
    pub testfn_x_center: f64,
    pub testfn_x_width: f64,
    pub testfn_t_center: f64,
    pub testfn_t_width: f64,
    pub study_epsilons: Vec<f64>,
    pub study_grid_sizes: Vec<usize>,
    pub study_compact: CompactSet,
    pub study_common_nodes: usize,
    pub study_kind: StudyKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StudyKind {
    Epsilon,
    Grid,
    Both,
}

pub const ALL_VERIFICATIONS: [&str; 11] = [
    "admissibility",
    "invariant-region",
    "physical-bounds",
    "omega-max-principle",
    "source-sign",
    "entropy-inequality",
    "decay-rate",
    "angular-transport",
    "weak-residual",
    "dissipation",
    "cross-check",
];

fn parse_key_values(text: &str, problems: &mut Vec<String>) -> BTreeMap<String, String> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) => {
                let key = k.trim().to_string();
                if map.insert(key.clone(), v.trim().to_string()).is_some() {
                    problems.push(format!("line {}: duplicate key '{key}'", lineno + 1));
                }
            }
            None => problems.push(format!(
                "line {}: expected 'key = value', found '{line}'",
                lineno + 1
            )),
        }
    }
    map
}

struct Reader {
    map: BTreeMap<String, String>,
    used: std::collections::BTreeSet<String>,
    problems: Vec<String>,
}

impl Reader {
    fn take(&mut self, key: &str) -> Option<String> {
        self.used.insert(key.to_string());
        self.map.get(key).cloned()
    }

    fn f64_or(&mut self, key: &str, default: f64) -> f64 {
        match self.take(key) {
            None => default,
            Some(v) => v.parse().unwrap_or_else(|_| {
                self.problems.push(format!("{key}: expected a number, found '{v}'"));
                default
            }),
        }
    }

    fn usize_or(&mut self, key: &str, default: usize) -> usize {
        match self.take(key) {
            None => default,
            Some(v) => v.parse().unwrap_or_else(|_| {
                self.problems
                    .push(format!("{key}: expected an integer, found '{v}'"));
                default
            }),
        }
    }

    fn f64_list(&mut self, key: &str, default: &[f64]) -> Vec<f64> {
        match self.take(key) {
            None => default.to_vec(),
            Some(v) => {
                let mut out = Vec::new();
                for part in v.split(',') {
                    match part.trim().parse::<f64>() {
                        Ok(x) => out.push(x),
                        Err(_) => self
                            .problems
                            .push(format!("{key}: bad list entry '{}'", part.trim())),
                    }
                }
                out
            }
        }
    }

    fn usize_list(&mut self, key: &str, default: &[usize]) -> Vec<usize> {
        match self.take(key) {
            None => default.to_vec(),
            Some(v) => {
                let mut out = Vec::new();
                for part in v.split(',') {
                    match part.trim().parse::<usize>() {
                        Ok(x) => out.push(x),
                        Err(_) => self
                            .problems
                            .push(format!("{key}: bad list entry '{}'", part.trim())),
                    }
                }
                out
            }
        }
    }
}

/// Parse and validate a config file, applying CLI overrides.
pub fn load_config(path: &Path, over: &Overrides) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(vec![format!("{}: {e}", path.display())]))?;
    parse_config(&text, over, path.parent().unwrap_or(Path::new(".")))
}

pub fn parse_config(text: &str, over: &Overrides, base_dir: &Path) -> Result<RunConfig> {
    let mut problems = Vec::new();
    let map = parse_key_values(text, &mut problems);
    let mut r = Reader {
        map,
        used: Default::default(),
        problems,
    };

    let mut gamma = r.f64_or("params.gamma", 2.0);
    let mut epsilon = r.f64_or("params.epsilon", 2e-3);
    let b_max = r.f64_or("params.b_max", 10.0);
    let mut t_final = r.f64_or("params.t_final", 0.2);
    let m1 = r.f64_or("params.m1", 1.0);
    let m2 = r.f64_or("params.m2", 0.1);
    let m3 = r.f64_or("params.m3", 0.3);

    let kind = r.take("profile.kind").unwrap_or_else(|| "power-blast".into());
    let beta = r.f64_or("profile.beta", 0.1);
    let kappa = r.f64_or("profile.kappa", 0.05);
    let u_factor = r.f64_or("profile.u_factor", 2.0);
    let cap_radius = r.f64_or("profile.cap_radius", 2.0);
    let csv_path = r.take("profile.csv_path");
    let profile = match kind.as_str() {
        "power-blast" => InitialProfile::PowerBlast {
            beta,
            kappa,
            u_factor,
            cap_radius,
        },
        "custom-tabulated" => match &csv_path {
            Some(rel) => {
                let full = base_dir.join(rel);
                match InitialProfile::from_csv(&full) {
                    Ok(p) => p,
                    Err(e) => {
                        r.problems.push(format!("profile.csv_path: {e}"));
                        InitialProfile::PowerBlast {
                            beta,
                            kappa,
                            u_factor,
                            cap_radius,
                        }
                    }
                }
            }
            None => {
                r.problems
                    .push("profile.kind = custom-tabulated requires profile.csv_path".into());
                InitialProfile::PowerBlast {
                    beta,
                    kappa,
                    u_factor,
                    cap_radius,
                }
            }
        },
        other => {
            r.problems.push(format!(
                "profile.kind must be power-blast or custom-tabulated, found '{other}'"
            ));
            InitialProfile::PowerBlast {
                beta,
                kappa,
                u_factor,
                cap_radius,
            }
        }
    };

    let mut n = r.usize_or("solver.n", 2048);
    let cfl = r.f64_or("solver.cfl", 0.4);
    let diff_number = r.f64_or("solver.diff_number", 0.25);
    let snapshot_dt = r.take("solver.snapshot_dt").map(|v| {
        v.parse().unwrap_or_else(|_| {
            r.problems
                .push(format!("solver.snapshot_dt: expected a number, found '{v}'"));
            0.0
        })
    });
    let integrator = match r
        .take("solver.integrator")
        .unwrap_or_else(|| "explicit-ssp2".into())
        .as_str()
    {
        "explicit-ssp2" => Integrator::ExplicitSsp2,
        "imex-diffusion" => Integrator::ImexDiffusion,
        other => {
            r.problems.push(format!(
                "solver.integrator must be explicit-ssp2 or imex-diffusion, found '{other}'"
            ));
            Integrator::ExplicitSsp2
        }
    };

    let output_dir = base_dir.join(r.take("output.dir").unwrap_or_else(|| "out".into()));

    let verifications = r.take("verify.enable").map(|v| {
        v.split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty() && s != "none")
            .collect::<Vec<_>>()
    });
    if let Some(list) = &verifications {
        for name in list {
            if !ALL_VERIFICATIONS.contains(&name.as_str()) {
                r.problems.push(format!(
                    "verify.enable: unknown verification '{name}' (known: {})",
                    ALL_VERIFICATIONS.join(", ")
                ));
            }
        }
    }

    let testfn_x_center = r.f64_or("testfn.x_center", 1.0);
    let testfn_x_width = r.f64_or("testfn.x_width", 0.5);
    let testfn_t_center = r.f64_or("testfn.t_center", 0.1);
    let testfn_t_width = r.f64_or("testfn.t_width", 0.04);

    let study_epsilons = r.f64_list("study.epsilons", &[4e-3, 2e-3, 1e-3]);
    let study_grid_sizes = r.usize_list("study.grid_sizes", &[512, 1024, 2048]);
    let study_compact = CompactSet {
        x_lo: r.f64_or("study.x_lo", 0.3),
        x_hi: r.f64_or("study.x_hi", 3.0),
        t_lo: r.f64_or("study.t_lo", 0.05),
        t_hi: r.f64_or("study.t_hi", 0.2),
    };
    let study_common_nodes = r.usize_or("study.common_nodes", 257);
    let study_kind = match r.take("study.kind").unwrap_or_else(|| "epsilon".into()).as_str() {
        "epsilon" => StudyKind::Epsilon,
        "grid" => StudyKind::Grid,
        "both" => StudyKind::Both,
        other => {
            r.problems.push(format!(
                "study.kind must be epsilon, grid, or both, found '{other}'"
            ));
            StudyKind::Epsilon
        }
    };

    // unknown keys are config errors, aggregated with everything else
    for key in r.map.keys() {
        if !r.used.contains(key) {
            r.problems.push(format!("unknown key '{key}'"));
        }
    }

    if let Some(g) = over.gamma {
        gamma = g;
    }
    if let Some(e) = over.epsilon {
        epsilon = e;
    }
    if let Some(nx) = over.nx {
        n = nx;
    }
    if let Some(t) = over.t_final {
        t_final = t;
    }

    let mut problems = r.problems;
    if !(gamma > 1.0) {
        problems.push(format!("params.gamma must exceed 1: got {gamma}"));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        problems.push(format!("params.epsilon must lie in (0, 1): got {epsilon}"));
    }
    if !(t_final >= 0.0) {
        problems.push(format!("params.t_final must be >= 0: got {t_final}"));
    }
    if n < 8 {
        problems.push(format!("solver.n must be at least 8: got {n}"));
    }
    if !(cfl > 0.0 && cfl <= 0.9) {
        problems.push(format!("solver.cfl must lie in (0, 0.9]: got {cfl}"));
    }
    if !(diff_number > 0.0 && diff_number <= 0.5) {
        problems.push(format!("solver.diff_number must lie in (0, 0.5]: got {diff_number}"));
    }
    if let Some(s) = snapshot_dt {
        if !(s > 0.0) {
            problems.push(format!("solver.snapshot_dt must be > 0: got {s}"));
        }
    }
    if !problems.is_empty() {
        return Err(Error::Config(problems));
    }

    Ok(RunConfig {
        gamma,
        epsilon,
        b_max,
        t_final,
        m1,
        m2,
        m3,
        profile,
        n,
        cfl,
        diff_number,
        snapshot_dt,
        integrator,
        output_dir,
        verifications,
        testfn_x_center,
        testfn_x_width,
        testfn_t_center,
        testfn_t_width,
        study_epsilons,
        study_grid_sizes,
        study_compact,
        study_common_nodes,
        study_kind,
    })
}

impl RunConfig {
    pub fn params(&self) -> Result<Params> {
        let b_eps = self.b_max.min(1.0 / self.epsilon);
        derive_params(
            self.gamma,
            self.epsilon,
            b_eps,
            self.t_final,
            self.m1,
            self.m2,
            self.m3,
        )
        .map_err(|e| Error::Config(vec![e.to_string()]))
    }

    pub fn solver_config(&self, p: &Params) -> SolverConfig {
        let mut cfg = SolverConfig::for_params(p, self.n);
        cfg.cfl = self.cfl;
        cfg.diff_number = self.diff_number;
        if let Some(s) = self.snapshot_dt {
            cfg.snapshot_dt = s;
        }
        cfg
    }

    pub fn enabled_verifications(&self) -> Vec<String> {
        match &self.verifications {
            Some(list) => list.clone(),
            None => ALL_VERIFICATIONS.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn study_inputs(&self) -> StudyInputs {
        StudyInputs {
            gamma: self.gamma,
            b_max: self.b_max,
            t_final: self.t_final,
            m1: self.m1,
            m2: self.m2,
            m3: self.m3,
            profile: self.profile.clone(),
            cfl: self.cfl,
            diff_number: self.diff_number,
            snapshot_dt: self.snapshot_dt.unwrap_or(self.t_final / 50.0),
            integrator: self.integrator,
        }
    }

    pub fn study_plan(&self) -> StudyPlan {
        StudyPlan {
            epsilons: self.study_epsilons.clone(),
            grid_sizes: self.study_grid_sizes.clone(),
            compact: self.study_compact,
            common_nodes: self.study_common_nodes,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_a_minimal_config() {
        let cfg = parse_config("solver.n = 128\n", &Overrides::default(), Path::new(".")).unwrap();
        assert_eq!(cfg.gamma, 2.0);
        assert_eq!(cfg.n, 128);
        assert!(cfg.verifications.is_none());
        assert_eq!(cfg.enabled_verifications().len(), ALL_VERIFICATIONS.len());
    }

    #[test]
    fn aggregated_errors_name_every_violation() {
        let text = "params.gamma = 1.0\nsolver.cfl = 7\nbogus.key = 3\n";
        let err = parse_config(text, &Overrides::default(), Path::new(".")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("params.gamma"), "{msg}");
        assert!(msg.contains("solver.cfl"), "{msg}");
        assert!(msg.contains("bogus.key"), "{msg}");
    }

    #[test]
    fn overrides_replace_file_values() {
        let over = Overrides {
            gamma: Some(1.4),
            epsilon: Some(1e-3),
            nx: Some(256),
            t_final: Some(0.1),
        };
        let cfg = parse_config("params.gamma = 2.0\n", &over, Path::new(".")).unwrap();
        assert_eq!(cfg.gamma, 1.4);
        assert_eq!(cfg.epsilon, 1e-3);
        assert_eq!(cfg.n, 256);
        assert_eq!(cfg.t_final, 0.1);
    }

    #[test]
    fn empty_verification_list_disables_everything() {
        let cfg = parse_config("verify.enable =\n", &Overrides::default(), Path::new("."))
            .unwrap();
        assert_eq!(cfg.enabled_verifications().len(), 0);
    }

    #[test]
    fn unknown_verification_is_rejected() {
        let err = parse_config(
            "verify.enable = invariant-region, bogus-check\n",
            &Overrides::default(),
            Path::new("."),
        )
        .unwrap_err();
        assert!(err.to_string().contains("bogus-check"));
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = "# full line comment\n\nparams.gamma = 1.6 # trailing comment\n";
        let cfg = parse_config(text, &Overrides::default(), Path::new(".")).unwrap();
        assert_eq!(cfg.gamma, 1.6);
    }
}
