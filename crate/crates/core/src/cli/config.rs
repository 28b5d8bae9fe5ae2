//! Line-oriented `section.key = value` configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Lists are comma
//! separated. Every problem found is reported, each with its line number.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::budget::DEFAULT_BUDGET;
use crate::freenergy::Solver;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Sim,
    Psi,
    Uconv,
    CgCheck,
    Rege,
    Hc,
    Scan,
    Smoothing,
    AlphaGt1,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Experiment::Sim,
        Experiment::Psi,
        Experiment::Uconv,
        Experiment::CgCheck,
        Experiment::Rege,
        Experiment::Hc,
        Experiment::Scan,
        Experiment::Smoothing,
        Experiment::AlphaGt1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Sim => "sim",
            Experiment::Psi => "psi",
            Experiment::Uconv => "uconv",
            Experiment::CgCheck => "cg-check",
            Experiment::Rege => "rege",
            Experiment::Hc => "hc",
            Experiment::Scan => "scan",
            Experiment::Smoothing => "smoothing",
            Experiment::AlphaGt1 => "alpha-gt1",
        }
    }
}

impl FromStr for Experiment {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Experiment::ALL
            .iter()
            .copied()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Experiment::ALL.iter().map(|e| e.name()).collect();
                format!(
                    "unknown experiment `{s}` (expected one of {})",
                    names.join(", ")
                )
            })
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    F64,
    Usize,
    U64,
    Str,
    F64List,
    UsizeList,
}

impl Kind {
    fn describe(self) -> &'static str {
        match self {
            Kind::F64 => "a number",
            Kind::Usize | Kind::U64 => "a nonnegative integer",
            Kind::Str => "a string",
            Kind::F64List => "a comma-separated list of numbers",
            Kind::UsizeList => "a comma-separated list of nonnegative integers",
        }
    }
}

/// Known keys with their kinds.
const KEYS: &[(&str, Kind)] = &[
    ("law.family", Kind::Str),
    ("law.alpha", Kind::F64),
    ("law.l", Kind::Str),
    ("law.l_param", Kind::F64),
    ("law.n_max", Kind::Usize),
    ("disorder.kind", Kind::Str),
    ("disorder.gamma", Kind::F64),
    ("run.seed", Kind::U64),
    ("run.replicas", Kind::Usize),
    ("run.workers", Kind::Usize),
    ("run.budget", Kind::F64),
    ("run.out", Kind::Str),
    ("solver.kappa", Kind::F64),
    ("solver.c0", Kind::F64),
    ("solver.h_lo", Kind::F64),
    ("solver.h_hi", Kind::F64),
    ("solver.tol", Kind::F64),
    ("sim.beta_hat", Kind::F64List),
    ("sim.h_hat", Kind::F64List),
    ("sim.t", Kind::F64),
    ("sim.n", Kind::Usize),
    ("sim.c", Kind::F64),
    ("psi.nu", Kind::F64),
    ("psi.delta_hat", Kind::F64List),
    ("psi.t", Kind::F64List),
    ("psi.tol", Kind::F64),
    ("psi.k_max", Kind::Usize),
    ("psi.panels", Kind::Usize),
    ("uconv.delta_hat", Kind::F64),
    ("uconv.n_list", Kind::UsizeList),
    ("uconv.t_points", Kind::Usize),
    ("cg.n", Kind::Usize),
    ("cg.t", Kind::Usize),
    ("cg.beta", Kind::F64),
    ("cg.h", Kind::F64),
    ("rege.alpha", Kind::F64List),
    ("rege.t_max", Kind::Usize),
    ("rege.paths", Kind::Usize),
    ("rege.samples", Kind::Usize),
    ("rege.gammas", Kind::F64List),
    ("hc.beta", Kind::F64List),
    ("hc.n", Kind::Usize),
    ("scan.beta_grid", Kind::F64List),
    ("scan.n", Kind::Usize),
    ("smoothing.beta", Kind::F64),
    ("smoothing.h_offsets", Kind::F64List),
    ("smoothing.n", Kind::Usize),
    ("agt1.beta_grid", Kind::F64List),
    ("agt1.n", Kind::Usize),
];

/// One configuration problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    /// 1-based line, or `None` for a missing key.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

#[derive(Debug, Clone, PartialEq)]
pub struct LawConfig {
    /// `power`, `two-point` or `deterministic`.
    pub family: String,
    pub alpha: f64,
    /// Slowly varying family key and parameter.
    pub l: String,
    pub l_param: f64,
    /// Table length; derived from the experiment when absent.
    pub n_max: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grids {
    pub beta_hat: Vec<f64>,
    pub h_hat: Vec<f64>,
    pub sim_t: f64,
    pub sim_n: usize,
    pub sim_c: Option<f64>,
    pub psi_nu: f64,
    pub psi_delta_hat: Vec<f64>,
    pub psi_t: Vec<f64>,
    pub psi_tol: f64,
    pub psi_k_max: usize,
    pub psi_panels: usize,
    pub uconv_delta_hat: f64,
    pub uconv_n_list: Vec<usize>,
    pub uconv_t_points: usize,
    pub cg_n: usize,
    pub cg_t: usize,
    pub cg_beta: f64,
    pub cg_h: f64,
    pub rege_alpha: Vec<f64>,
    pub rege_t_max: usize,
    pub rege_paths: usize,
    pub rege_samples: usize,
    pub rege_gammas: Vec<f64>,
    pub hc_beta: Vec<f64>,
    pub hc_n: usize,
    pub scan_beta: Vec<f64>,
    pub scan_n: usize,
    pub smoothing_beta: f64,
    pub smoothing_offsets: Vec<f64>,
    pub smoothing_n: usize,
    pub agt1_beta: Vec<f64>,
    pub agt1_n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub law: LawConfig,
    pub disorder: String,
    pub disorder_gamma: Option<f64>,
    pub seed: u64,
    pub replicas: usize,
    pub workers: usize,
    pub budget: u128,
    pub out: PathBuf,
    pub solver: Solver,
    pub grids: Grids,
}

struct Entry {
    value: String,
    line: usize,
}

struct Reader {
    entries: BTreeMap<String, Entry>,
    errors: Vec<ConfigError>,
}

impl Reader {
    fn err(&mut self, line: Option<usize>, message: String) {
        self.errors.push(ConfigError { line, message });
    }

    fn raw(&self, key: &str) -> Option<(&str, usize)> {
        self.entries.get(key).map(|e| (e.value.as_str(), e.line))
    }

    fn parse<T: FromStr>(&mut self, key: &str, kind: Kind) -> Option<T> {
        let (v, line) = self.raw(key)?;
        let v = v.to_string();
        match v.parse::<T>() {
            Ok(x) => Some(x),
            Err(_) => {
                self.err(
                    Some(line),
                    format!("{key}: expected {}, got `{v}`", kind.describe()),
                );
                None
            }
        }
    }

    fn f64_or(&mut self, key: &str, default: f64) -> f64 {
        self.parse(key, Kind::F64).unwrap_or(default)
    }

    fn f64_opt(&mut self, key: &str) -> Option<f64> {
        self.parse(key, Kind::F64)
    }

    fn usize_or(&mut self, key: &str, default: usize) -> usize {
        self.parse(key, Kind::Usize).unwrap_or(default)
    }

    fn str_or(&mut self, key: &str, default: &str) -> String {
        self.raw(key)
            .map_or_else(|| default.to_string(), |(v, _)| v.to_string())
    }

    fn list<T: FromStr + Clone>(&mut self, key: &str, kind: Kind, default: &[T]) -> Vec<T> {
        let Some((v, line)) = self.raw(key) else {
            return default.to_vec();
        };
        let v = v.to_string();
        if v.trim().is_empty() {
            self.err(Some(line), format!("{key}: empty grid"));
            return Vec::new();
        }
        let mut out = Vec::new();
        for item in v.split(',') {
            match item.trim().parse::<T>() {
                Ok(x) => out.push(x),
                Err(_) => {
                    self.err(
                        Some(line),
                        format!("{key}: expected {}, got `{}`", kind.describe(), item.trim()),
                    );
                    return Vec::new();
                }
            }
        }
        out
    }

    fn line_of(&self, key: &str) -> Option<usize> {
        self.entries.get(key).map(|e| e.line)
    }
}

/// Parses and validates a configuration for `experiment`.
pub fn parse_config(text: &str, experiment: Experiment) -> Result<RunConfig, ConfigErrors> {
    let mut r = Reader {
        entries: BTreeMap::new(),
        errors: Vec::new(),
    };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        let Some((k, v)) = s.split_once('=') else {
            r.err(
                Some(line),
                format!("expected `section.key = value`, got `{s}`"),
            );
            continue;
        };
        let key = k.trim().to_string();
        let value = v.trim().to_string();
        if !KEYS.iter().any(|(name, _)| *name == key) {
            r.err(Some(line), format!("unknown key `{key}`"));
            continue;
        }
        if let Some(prev) = r.entries.get(&key) {
            let first = prev.line;
            r.err(
                Some(line),
                format!("duplicate key `{key}` (lines {first} and {line})"),
            );
            continue;
        }
        r.entries.insert(key, Entry { value, line });
    }

    let law = LawConfig {
        family: r.str_or("law.family", "power"),
        alpha: r.f64_or("law.alpha", 0.75),
        l: r.str_or("law.l", "const"),
        l_param: r.f64_or("law.l_param", 1.0),
        n_max: r.parse("law.n_max", Kind::Usize),
    };
    if !["power", "two-point", "deterministic"].contains(&law.family.as_str()) {
        let line = r.line_of("law.family");
        r.err(line, format!("law.family: unknown family `{}`", law.family));
    }
    if !["const", "logpow"].contains(&law.l.as_str()) {
        let line = r.line_of("law.l");
        r.err(
            line,
            format!("law.l: unknown slowly varying family `{}`", law.l),
        );
    }
    let disorder = r.str_or("disorder.kind", "gaussian");
    if ![
        "gaussian",
        "uniform",
        "bounded-uniform",
        "rademacher",
        "gamma-exp",
    ]
    .contains(&disorder.as_str())
    {
        let line = r.line_of("disorder.kind");
        r.err(
            line,
            format!("disorder.kind: unknown disorder `{disorder}`"),
        );
    }
    let disorder_gamma = r.f64_opt("disorder.gamma");
    if disorder == "gamma-exp" && disorder_gamma.is_none() && r.line_of("disorder.gamma").is_none()
    {
        r.err(
            None,
            "missing required key `disorder.gamma` for gamma-exp disorder".into(),
        );
    }
    let seed = r.parse::<u64>("run.seed", Kind::U64);
    let replicas = r.usize_or("run.replicas", 256);
    let workers = r.usize_or("run.workers", 1);
    let budget = r.f64_or("run.budget", DEFAULT_BUDGET as f64);
    if !(budget > 0.0) {
        let line = r.line_of("run.budget");
        r.err(line, "run.budget: must be positive".into());
    }
    if workers == 0 {
        let line = r.line_of("run.workers");
        r.err(line, "run.workers: must be at least 1".into());
    }
    let out = PathBuf::from(r.str_or("run.out", "out"));
    let d = Solver::default();
    let solver = Solver {
        kappa: r.f64_or("solver.kappa", d.kappa),
        c0: r.f64_or("solver.c0", d.c0),
        bracket: (r.f64_or("solver.h_lo", -0.1), r.f64_or("solver.h_hi", 0.3)),
        tol: r.f64_or("solver.tol", d.tol),
    };
    let grids = Grids {
        beta_hat: r.list("sim.beta_hat", Kind::F64List, &[1.0]),
        h_hat: r.list("sim.h_hat", Kind::F64List, &[0.0]),
        sim_t: r.f64_or("sim.t", 1.0),
        sim_n: r.usize_or("sim.n", 1024),
        sim_c: r.f64_opt("sim.c"),
        psi_nu: r.f64_or("psi.nu", 0.75),
        psi_delta_hat: r.list("psi.delta_hat", Kind::F64List, &[1.0]),
        psi_t: r.list("psi.t", Kind::F64List, &[0.25, 0.5, 0.75, 1.0]),
        psi_tol: r.f64_or("psi.tol", crate::continuum_psi::DEFAULT_TOL),
        psi_k_max: r.usize_or("psi.k_max", crate::continuum_psi::DEFAULT_K_MAX),
        psi_panels: r.usize_or("psi.panels", crate::continuum_psi::DEFAULT_PANELS),
        uconv_delta_hat: r.f64_or("uconv.delta_hat", 1.0),
        uconv_n_list: r.list("uconv.n_list", Kind::UsizeList, &[256, 1024, 4096]),
        uconv_t_points: r.usize_or("uconv.t_points", 16),
        cg_n: r.usize_or("cg.n", 8),
        cg_t: r.usize_or("cg.t", 2),
        cg_beta: r.f64_or("cg.beta", 0.4),
        cg_h: r.f64_or("cg.h", 0.2),
        rege_alpha: r.list("rege.alpha", Kind::F64List, &[0.5, 0.75]),
        rege_t_max: r.usize_or("rege.t_max", 10),
        rege_paths: r.usize_or("rege.paths", 100),
        rege_samples: r.usize_or("rege.samples", 100_000),
        rege_gammas: r.list(
            "rege.gammas",
            Kind::F64List,
            &[1e-4, 3e-4, 1e-3, 3e-3, 1e-2],
        ),
        hc_beta: r.list("hc.beta", Kind::F64List, &[0.0]),
        hc_n: r.usize_or("hc.n", 2048),
        scan_beta: r.list("scan.beta_grid", Kind::F64List, &[]),
        scan_n: r.usize_or("scan.n", 4096),
        smoothing_beta: r.f64_or("smoothing.beta", 0.4),
        smoothing_offsets: r.list(
            "smoothing.h_offsets",
            Kind::F64List,
            &[0.05, 0.1, 0.15, 0.2, 0.25, 0.3],
        ),
        smoothing_n: r.usize_or("smoothing.n", 4096),
        agt1_beta: r.list("agt1.beta_grid", Kind::F64List, &[0.1]),
        agt1_n: r.usize_or("agt1.n", 8192),
    };

    // experiment-specific requirements
    let required: &[&str] = match experiment {
        Experiment::Scan => &["scan.beta_grid"],
        _ => &[],
    };
    for key in required {
        if r.line_of(key).is_none() {
            r.err(None, format!("missing required key `{key}`"));
        }
    }
    if seed.is_none() && r.line_of("run.seed").is_none() {
        r.err(None, "missing required key `run.seed`".into());
    }
    if replicas < 2
        && matches!(
            experiment,
            Experiment::Sim
                | Experiment::Hc
                | Experiment::Scan
                | Experiment::Smoothing
                | Experiment::AlphaGt1
        )
    {
        let line = r.line_of("run.replicas");
        r.err(line, "run.replicas: at least 2 needed".into());
    }

    if !r.errors.is_empty() {
        r.errors.sort_by_key(|e| e.line.unwrap_or(usize::MAX));
        return Err(ConfigErrors(r.errors));
    }
    Ok(RunConfig {
        experiment,
        law,
        disorder,
        disorder_gamma,
        seed: seed.unwrap_or(0),
        replicas,
        workers,
        budget: budget as u128,
        out,
        solver,
        grids,
    })
}

/// Same as [`parse_config`] but lets a command-line seed stand in for a
/// missing `run.seed`.
pub fn parse_config_with_seed(
    text: &str,
    experiment: Experiment,
    seed: Option<u64>,
) -> Result<RunConfig, ConfigErrors> {
    match seed {
        None => parse_config(text, experiment),
        Some(s) => {
            let has_seed = text.lines().any(|l| {
                l.split_once('=')
                    .is_some_and(|(k, _)| k.trim() == "run.seed")
            });
            let text = if has_seed {
                text.to_string()
            } else {
                format!("{text}\nrun.seed = {s}\n")
            };
            let mut cfg = parse_config(&text, experiment)?;
            cfg.seed = s;
            Ok(cfg)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_sim_config() {
        let c = parse_config("run.seed = 7\n", Experiment::Sim).unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.replicas, 256);
        assert_eq!(c.law.alpha, 0.75);
        assert_eq!(c.grids.sim_n, 1024);
        assert_eq!(
            c.solver,
            Solver {
                bracket: (-0.1, 0.3),
                ..Solver::default()
            }
        );
    }

    #[test]
    fn empty_grid_is_named() {
        let e = parse_config("run.seed = 1\nscan.beta_grid =\n", Experiment::Scan).unwrap_err();
        assert!(
            e.0.iter()
                .any(|x| x.message.contains("scan.beta_grid") && x.line == Some(2)),
            "{e}"
        );
        let e = parse_config("run.seed = 1\n", Experiment::Scan).unwrap_err();
        assert!(e.to_string().contains("scan.beta_grid"));
    }

    #[test]
    fn duplicate_key_reports_both_lines() {
        let e = parse_config("run.seed = 1\n# c\nrun.seed = 2\n", Experiment::Sim).unwrap_err();
        assert_eq!(e.0.len(), 1);
        assert_eq!(e.0[0].line, Some(3));
        assert!(e.0[0].message.contains("lines 1 and 3"));
    }

    #[test]
    fn all_errors_are_collected() {
        let text =
            "run.seed = x\nlaw.alpha = fast\nbogus.key = 1\nnot a pair\nsim.h_hat = 1, two\n";
        let e = parse_config(text, Experiment::Sim).unwrap_err();
        let lines: Vec<_> = e.0.iter().map(|x| x.line).collect();
        assert_eq!(
            lines,
            vec![Some(1), Some(2), Some(3), Some(4), Some(5)],
            "{e}"
        );
    }

    #[test]
    fn missing_seed_and_cli_override() {
        let e = parse_config("", Experiment::Psi).unwrap_err();
        assert!(e.to_string().contains("run.seed"));
        let c = parse_config_with_seed("", Experiment::Psi, Some(9)).unwrap();
        assert_eq!(c.seed, 9);
        let c = parse_config_with_seed("run.seed = 3", Experiment::Psi, Some(9)).unwrap();
        assert_eq!(c.seed, 9);
    }

    #[test]
    fn experiment_names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
        assert!("nope".parse::<Experiment>().is_err());
    }
}
