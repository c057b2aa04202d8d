//! The run configuration document and its validation.
//!
//! A single JSON document describes the system, the potential and every
//! subcommand's parameters. Validation walks the whole document and reports
//! every problem with its field path before anything runs.

use std::fmt;

use lyapmax::montecarlo::BernoulliSpec;
use lyapmax::periodic::SearchConfig;
use lyapmax::pressure::{default_t_grid, geometric_grid, uniform_grid};
use lyapmax::{Matrix64, MatrixSet64, Potential64, SftSpec};
use serde::{Deserialize, Serialize};

/// Largest number of words a single exhaustive level may enumerate.
pub const MAX_LEVEL_WORDS: u128 = 1 << 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrices: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub additive: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<GridConfig>,
    #[serde(default = "default_levels")]
    pub levels: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<McConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub close: Option<CloseConfig>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

fn default_levels() -> Vec<usize> {
    vec![1, 2, 4, 8]
}

/// `{"full": k}` or `{"k": k, "transitions": [[...]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub full: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transitions: Option<Vec<Vec<u8>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PotentialKind {
    Norm,
    Additive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridScale {
    Linear,
    Geometric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    #[serde(default = "linear")]
    pub scale: GridScale,
}

fn linear() -> GridScale {
    GridScale::Linear
}

/// Overrides on top of the alphabet-dependent search defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_exact: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beam_delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beam_width: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
    /// Second probability vector for a measure-perturbation probe.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_prime: Option<Vec<f64>>,
    #[serde(default = "thousand")]
    pub n: usize,
    #[serde(default = "thousand")]
    pub samples: usize,
    #[serde(default)]
    pub deltas: Vec<f64>,
}

impl Default for McConfig {
    fn default() -> Self {
        Self { p: None, p_prime: None, n: 1000, samples: 1000, deltas: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CloseConfig {
    #[serde(default = "ten_thousand")]
    pub len: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
}

impl Default for CloseConfig {
    fn default() -> Self {
        Self { len: 10_000, p: None }
    }
}

fn thousand() -> usize {
    1000
}

fn ten_thousand() -> usize {
    10_000
}

/// Which subcommand a configuration is validated for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Pressure,
    ZeroTemp,
    MaxExp,
    MonteCarlo,
    Close,
    Verify,
}

/// One validation problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// Every problem found in a configuration.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ConfigError {
    pub issues: Vec<Issue>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid configuration ({} issue(s)):", self.issues.len())?;
        for issue in &self.issues {
            writeln!(f, "  {issue}")?;
        }
        Ok(())
    }
}

impl ConfigError {
    pub fn single(path: &str, message: impl Into<String>) -> Self {
        Self { issues: vec![Issue { path: path.into(), message: message.into() }] }
    }
}

#[derive(Default)]
struct Issues(Vec<Issue>);

impl Issues {
    fn push(&mut self, path: impl Into<String>, message: impl fmt::Display) {
        self.0.push(Issue { path: path.into(), message: message.to_string() });
    }
}

/// A validated configuration turned into library objects.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub sft: SftSpec,
    pub potential: Potential64,
    pub matrices: Option<MatrixSet64>,
    pub t_grid: Vec<f64>,
    pub levels: Vec<usize>,
    pub search: SearchConfig,
    pub mc: McConfig,
    pub mc_p: BernoulliSpec<f64>,
    pub mc_p_prime: Option<BernoulliSpec<f64>>,
    pub close: CloseConfig,
    pub close_p: BernoulliSpec<f64>,
    pub seed: u64,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::single("$", e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes")
    }

    /// Validates everything `purpose` needs and builds the library objects.
    pub fn resolve(&self, purpose: Purpose) -> Result<Resolved, ConfigError> {
        let mut issues = Issues::default();
        let sft = self.resolve_system(&mut issues);
        let k = sft.as_ref().map(SftSpec::k);
        let (potential, matrices) = self.resolve_potential(k, &mut issues);

        let t_grid = self.resolve_grid(&mut issues);
        if self.levels.is_empty() {
            issues.push("levels", "at least one level is required");
        }
        for (i, &n) in self.levels.iter().enumerate() {
            if n == 0 {
                issues.push(format!("levels[{i}]"), "levels must be ≥ 1");
            } else if let Some(s) = &sft {
                if s.count_words(n) > MAX_LEVEL_WORDS {
                    issues.push(format!("levels[{i}]"), format!("level {n} has more than 2^32 words"));
                }
            }
        }

        let search = self.resolve_search(k.unwrap_or(2), &mut issues);
        let mc = self.mc.clone().unwrap_or_default();
        let mc_p = resolve_probabilities(mc.p.as_deref(), k, "mc.p", &mut issues);
        let mc_p_prime = mc.p_prime.as_deref().map(|p| resolve_probabilities(Some(p), k, "mc.p_prime", &mut issues));
        if mc.n < 100 {
            issues.push("mc.n", "must be ≥ 100");
        }
        if mc.samples < 100 {
            issues.push("mc.samples", "must be ≥ 100");
        }
        for (i, d) in mc.deltas.iter().enumerate() {
            if !(d.is_finite() && *d >= 0.0) {
                issues.push(format!("mc.deltas[{i}]"), "must be finite and ≥ 0");
            }
        }
        let close = self.close.clone().unwrap_or_default();
        let close_p = resolve_probabilities(close.p.as_deref(), k, "close.p", &mut issues);
        if close.len < 100 {
            issues.push("close.len", "must be ≥ 100");
        }
        if self.threads == Some(0) {
            issues.push("threads", "must be ≥ 1");
        }

        if purpose == Purpose::MonteCarlo && sft.as_ref().is_some_and(|s| !s.is_full()) {
            issues.push("system", "Monte Carlo estimates need a full shift (Bernoulli measures are not invariant otherwise)");
        }
        if purpose == Purpose::MonteCarlo
            && !mc.deltas.is_empty()
            && (self.matrices.is_none() || self.potential == Some(PotentialKind::Additive))
        {
            issues.push("mc.deltas", "perturbation ladders need a matrix set");
        }

        if !issues.0.is_empty() {
            return Err(ConfigError { issues: issues.0 });
        }
        Ok(Resolved {
            sft: sft.expect("validated"),
            potential: potential.expect("validated"),
            matrices,
            t_grid: t_grid.expect("validated"),
            levels: self.levels.clone(),
            search: search.expect("validated"),
            mc,
            mc_p: mc_p.expect("validated"),
            mc_p_prime: mc_p_prime.map(|p| p.expect("validated")),
            close,
            close_p: close_p.expect("validated"),
            seed: self.seed,
        })
    }

    fn resolve_system(&self, issues: &mut Issues) -> Option<SftSpec> {
        let sys = &self.system;
        match (sys.full, &sys.transitions) {
            (Some(_), Some(_)) => {
                issues.push("system", "give either \"full\" or \"transitions\", not both");
                None
            }
            (None, None) => {
                issues.push("system", "missing \"full\" or \"transitions\"");
                None
            }
            (Some(k), None) => {
                if sys.k.is_some_and(|kk| kk != k) {
                    issues.push("system.k", format!("disagrees with full = {k}"));
                }
                SftSpec::full(k).map_err(|e| issues.push("system.full", e)).ok()
            }
            (None, Some(rows)) => {
                if let Some(k) = sys.k {
                    if k != rows.len() {
                        issues.push("system.k", format!("k = {k} but transitions has {} rows", rows.len()));
                    }
                }
                match SftSpec::new(rows).and_then(SftSpec::require_irreducible) {
                    Ok(s) => Some(s),
                    Err(e) => {
                        issues.push("system.transitions", e);
                        None
                    }
                }
            }
        }
    }

    fn resolve_potential(&self, k: Option<usize>, issues: &mut Issues) -> (Option<Potential64>, Option<MatrixSet64>) {
        let kind = match (self.potential, &self.matrices, &self.additive) {
            (Some(kind), _, _) => Some(kind),
            (None, Some(_), None) => Some(PotentialKind::Norm),
            (None, None, Some(_)) => Some(PotentialKind::Additive),
            (None, Some(_), Some(_)) => {
                issues.push("potential", "both matrices and additive given; set \"potential\" to choose");
                None
            }
            (None, None, None) => {
                issues.push("matrices", "a matrix set or additive potential is required");
                None
            }
        };
        let matrices = self.matrices.as_ref().and_then(|m| resolve_matrices(m, k, issues));
        match kind {
            Some(PotentialKind::Norm) => {
                if self.matrices.is_none() {
                    issues.push("matrices", "potential \"norm\" needs a matrix set");
                }
                (matrices.clone().map(Potential64::MatrixNorm), matrices)
            }
            Some(PotentialKind::Additive) => {
                let Some(f) = &self.additive else {
                    issues.push("additive", "potential \"additive\" needs weights");
                    return (None, matrices);
                };
                let mut ok = true;
                if let Some(k) = k {
                    if f.len() != k {
                        issues.push("additive", format!("{} weights for {k} symbols", f.len()));
                        ok = false;
                    }
                }
                for (i, x) in f.iter().enumerate() {
                    if !x.is_finite() {
                        issues.push(format!("additive[{i}]"), "must be finite");
                        ok = false;
                    }
                }
                (ok.then(|| Potential64::Additive(f.clone())), matrices)
            }
            None => (None, matrices),
        }
    }

    fn resolve_grid(&self, issues: &mut Issues) -> Option<Vec<f64>> {
        let Some(g) = &self.t_grid else {
            return Some(default_t_grid());
        };
        let before = issues.0.len();
        if !(g.min.is_finite() && g.min >= 0.0) {
            issues.push("t_grid.min", "must be finite and ≥ 0");
        }
        if !(g.max.is_finite() && g.max > g.min) {
            issues.push("t_grid.max", "must be finite and > min");
        }
        if g.points < 2 {
            issues.push("t_grid.points", "must be ≥ 2");
        }
        if g.scale == GridScale::Geometric && !(g.min > 0.0) {
            issues.push("t_grid.min", "geometric grids need min > 0");
        }
        if issues.0.len() > before {
            return None;
        }
        Some(match g.scale {
            GridScale::Linear => uniform_grid(g.min, g.max, g.points),
            GridScale::Geometric => geometric_grid(g.min, g.max, g.points),
        })
    }

    fn resolve_search(&self, k: usize, issues: &mut Issues) -> Option<SearchConfig> {
        let mut cfg = SearchConfig::for_alphabet(k);
        cfg.seed = self.seed;
        if let Some(s) = &self.search {
            if let Some(v) = s.n_exact {
                cfg.n_exact = v;
            }
            if let Some(v) = s.beam_delta {
                cfg.beam_delta = v;
            }
            if let Some(v) = s.max_depth {
                cfg.max_depth = v;
            }
            if let Some(v) = s.beam_width {
                cfg.beam_width = v;
            }
            if let Some(v) = s.seed {
                cfg.seed = v;
            }
        }
        match cfg.validate() {
            Ok(()) => Some(cfg),
            Err(e) => {
                issues.push("search", e);
                None
            }
        }
    }
}

fn resolve_matrices(raw: &[Vec<Vec<f64>>], k: Option<usize>, issues: &mut Issues) -> Option<MatrixSet64> {
    let before = issues.0.len();
    if raw.is_empty() {
        issues.push("matrices", "empty matrix set");
        return None;
    }
    if let Some(k) = k {
        if raw.len() != k {
            issues.push("matrices", format!("{} matrices for {k} symbols", raw.len()));
        }
    }
    let d = raw[0].len();
    let mut mats = Vec::with_capacity(raw.len());
    for (i, rows) in raw.iter().enumerate() {
        if rows.len() != d {
            issues.push(format!("matrices[{i}]"), format!("dimension {} differs from matrices[0] ({d})", rows.len()));
            continue;
        }
        if rows.iter().flatten().any(|x| !x.is_finite()) {
            issues.push(format!("matrices[{i}]"), "entries must be finite");
            continue;
        }
        match Matrix64::from_rows(rows) {
            Ok(m) => mats.push(m),
            Err(e) => issues.push(format!("matrices[{i}]"), e),
        }
    }
    if issues.0.len() > before {
        return None;
    }
    match MatrixSet64::new(mats) {
        Ok(ms) => Some(ms),
        Err(lyapmax::CocycleError::Singular { index, det }) => {
            issues.push(format!("matrices[{index}]"), format!("not invertible (det = {det:e})"));
            None
        }
        Err(e) => {
            issues.push("matrices", e);
            None
        }
    }
}

fn resolve_probabilities(p: Option<&[f64]>, k: Option<usize>, path: &str, issues: &mut Issues) -> Option<BernoulliSpec<f64>> {
    let k = k?;
    let p = match p {
        Some(p) => p.to_vec(),
        None => vec![1.0 / k as f64; k],
    };
    if p.len() != k {
        issues.push(path, format!("{} probabilities for {k} symbols", p.len()));
        return None;
    }
    BernoulliSpec::new(p).map_err(|e| issues.push(path, e)).ok()
}
