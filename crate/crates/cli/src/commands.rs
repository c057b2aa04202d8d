//! Subcommand implementations.

use std::path::PathBuf;
use std::time::Instant;

use lyapmax::equilibrium::{gibbs_weights, richardson_check, zero_temp_sweep};
use lyapmax::montecarlo::{continuity_ladder, continuity_probe, furstenberg_estimate, LadderRow};
use lyapmax::periodic::{bracket_search, closing_experiment, verify_witness, JsrBracket, SearchError, GAP_TARGET};
use lyapmax::pressure::{
    convexity_report, pressure_curve, pressure_spectral_sum, pressure_upper_grid, slope_at_infinity, uniform_grid,
    SLOPE_MIN_T,
};
use lyapmax::{Potential64, Word};
use serde::Serialize;

use crate::config::{ConfigError, Purpose, Resolved, RunConfig};
use crate::output::{fmt_real, reals, write_json, Envelope, Provenance, Real, Table};
use crate::{Cli, Command};

/// Points of the auxiliary uniform grid used for convexity checks when the
/// configured grid is not uniform.
const CONVEXITY_POINTS: usize = 65;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("search budget exhausted with gap {gap:e}; partial bracket written to {path}")]
    Budget { gap: f64, path: PathBuf },
    #[error("verification failed: {0}")]
    Mismatch(String),
    #[error("{0}")]
    Compute(#[from] lyapmax::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Budget { .. } => 3,
            CliError::Mismatch(_) => 4,
            CliError::Compute(_) | CliError::Io(_) | CliError::Pool(_) => 1,
        }
    }
}

struct Ctx {
    cfg: RunConfig,
    resolved: Resolved,
    out_dir: PathBuf,
    threads: usize,
    started: Instant,
    command: &'static str,
}

impl Ctx {
    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn write_meta<R: Serialize>(&self, name: &str, result: R) -> Result<(), CliError> {
        let envelope = Envelope {
            provenance: Provenance::new(self.command, &self.cfg, self.started.elapsed(), self.threads),
            config: &self.cfg,
            result,
        };
        write_json(&self.path(name), &envelope)?;
        Ok(())
    }
}

fn purpose(command: &Command) -> (Purpose, &'static str) {
    match command {
        Command::Pressure { .. } => (Purpose::Pressure, "pressure"),
        Command::Zerotemp => (Purpose::ZeroTemp, "zerotemp"),
        Command::Maxexp => (Purpose::MaxExp, "maxexp"),
        Command::Mc => (Purpose::MonteCarlo, "mc"),
        Command::Close => (Purpose::Close, "close"),
        Command::Verify { .. } => (Purpose::Verify, "verify"),
    }
}

/// Loads the configuration, applies flag overrides, and runs the subcommand
/// on a pool of the requested size.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let started = Instant::now();
    let path = cli.config.as_ref().ok_or_else(|| CliError::Usage("--config <path> is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::single("$", format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = RunConfig::from_json(&text)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(threads) = cli.threads {
        cfg.threads = Some(threads);
    }
    if let Some(out) = &cli.out {
        cfg.output = Some(out.display().to_string());
    }
    let (purpose, command) = purpose(&cli.command);
    let resolved = cfg.resolve(purpose)?;

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build()?;
    let out_dir = PathBuf::from(cfg.output.clone().unwrap_or_else(|| ".".into()));
    if purpose != Purpose::Verify {
        std::fs::create_dir_all(&out_dir)?;
    }
    let ctx = Ctx { cfg, resolved, out_dir, threads: pool.current_num_threads(), started, command };

    pool.install(|| match &cli.command {
        Command::Pressure { experimental } => run_pressure(&ctx, *experimental),
        Command::Zerotemp => run_zerotemp(&ctx),
        Command::Maxexp => run_maxexp(&ctx),
        Command::Mc => run_mc(&ctx),
        Command::Close => run_close(&ctx),
        Command::Verify { witness, claim } => run_verify(&ctx, witness, claim),
    })
}

#[derive(Serialize)]
struct BestPoint {
    t: Real,
    upper: Real,
    upper_level: usize,
    lower: Real,
    lower_level: usize,
    witness: String,
}

#[derive(Serialize)]
struct LevelConvexity {
    n: usize,
    max_violation: Real,
}

#[derive(Serialize)]
struct Convexity {
    grid: String,
    levels: Vec<LevelConvexity>,
}

#[derive(Serialize)]
struct Slope {
    t_max: Real,
    ratio: Real,
    segment_slope: Real,
}

#[derive(Serialize)]
struct PressureResult {
    upper_certified: bool,
    levels: Vec<usize>,
    t_grid: Vec<Real>,
    best: Vec<BestPoint>,
    convexity: Convexity,
    slope_at_infinity: Option<Slope>,
    experimental: bool,
}

fn is_uniform(ts: &[f64]) -> bool {
    if ts.len() < 3 {
        return false;
    }
    let h = ts[1] - ts[0];
    let tol = 1e-9 * h.abs().max(ts[ts.len() - 1].abs());
    ts.windows(2).all(|p| ((p[1] - p[0]) - h).abs() <= tol)
}

fn run_pressure(ctx: &Ctx, experimental: bool) -> Result<(), CliError> {
    let r = &ctx.resolved;
    let curve = pressure_curve(&r.levels, &r.t_grid, &r.sft, &r.potential)?;

    let mut header = vec!["t", "n", "upper", "lower", "witness"];
    if experimental {
        header.push("spectral_sum_estimate");
    }
    let mut table = Table::new(&header);
    for row in &curve.rows {
        let mut cells = vec![
            fmt_real(row.t),
            row.n.to_string(),
            fmt_real(row.upper),
            fmt_real(row.lower),
            row.witness.as_ref().map(ToString::to_string).unwrap_or_default(),
        ];
        if experimental {
            cells.push(fmt_real(pressure_spectral_sum(row.n, row.t, &r.sft, &r.potential)?));
        }
        table.push(cells);
    }
    table.write(&ctx.path("pressure.csv"))?;

    let (grid, label) = if is_uniform(&r.t_grid) {
        (r.t_grid.clone(), "configured grid".to_string())
    } else {
        let (lo, hi) = (r.t_grid[0], r.t_grid[r.t_grid.len() - 1]);
        let g = uniform_grid(lo, hi, CONVEXITY_POINTS);
        (g, format!("uniform grid on [{}, {}], {CONVEXITY_POINTS} points", fmt_real(lo), fmt_real(hi)))
    };
    let levels = r
        .levels
        .iter()
        .map(|&n| {
            let values = pressure_upper_grid(n, &grid, &r.sft, &r.potential)?;
            Ok(LevelConvexity { n, max_violation: Real(convexity_report(&grid, &values)?) })
        })
        .collect::<Result<Vec<_>, lyapmax::Error>>()?;

    let slope = match curve.best.last() {
        Some(p) if p.t >= SLOPE_MIN_T && curve.best.len() >= 2 => {
            let s = slope_at_infinity(&curve)?;
            Some(Slope { t_max: Real(s.t_max), ratio: Real(s.ratio), segment_slope: Real(s.segment_slope) })
        }
        _ => None,
    };
    let result = PressureResult {
        upper_certified: curve.upper_certified,
        levels: curve.levels.clone(),
        t_grid: reals(&curve.t_grid),
        best: curve
            .best
            .iter()
            .map(|p| BestPoint {
                t: Real(p.t),
                upper: Real(p.upper),
                upper_level: p.upper_level,
                lower: Real(p.lower),
                lower_level: p.lower_level,
                witness: p.witness.as_ref().map(ToString::to_string).unwrap_or_default(),
            })
            .collect(),
        convexity: Convexity { grid: label, levels },
        slope_at_infinity: slope,
        experimental,
    };
    ctx.write_meta("pressure.json", result)
}

#[derive(Serialize)]
struct ArgmaxEntry {
    n: usize,
    beta_plus: Real,
    ground_entropy: Real,
    argmax: Vec<String>,
}

#[derive(Serialize)]
struct RichardsonRow {
    t: Real,
    residual_coarse: Real,
    residual_fine: Real,
    ratio: Real,
}

#[derive(Serialize)]
struct LevelDiagnostics {
    n: usize,
    max_chi_decrease: Real,
    max_entropy_increase: Real,
    gap_bound_holds: bool,
    max_variational_residual: Real,
    richardson: Vec<RichardsonRow>,
}

#[derive(Serialize)]
struct ZeroTempResult {
    t_grid: Vec<Real>,
    levels: Vec<LevelDiagnostics>,
}

fn run_zerotemp(ctx: &Ctx) -> Result<(), CliError> {
    let r = &ctx.resolved;
    let mut grid = r.t_grid.clone();
    if grid[0] != 0.0 {
        grid.insert(0, 0.0);
    }
    let mut table = Table::new(&["t", "n", "chi", "entropy", "pressure", "gap_bound"]);
    let mut argmax = Vec::new();
    let mut levels = Vec::new();
    for &n in &r.levels {
        let diag = zero_temp_sweep(n, &grid, &r.sft, &r.potential)?;
        for row in &diag.rows {
            table.push(vec![
                fmt_real(row.t),
                n.to_string(),
                fmt_real(row.chi),
                fmt_real(row.entropy),
                fmt_real(row.pressure),
                fmt_real(row.gap_bound),
            ]);
        }
        let richardson = grid
            .iter()
            .map(|&t| {
                let g = gibbs_weights(n, t, &r.sft, &r.potential)?;
                let c = richardson_check(&g, 1e-3, 1e-4);
                Ok(RichardsonRow {
                    t: Real(t),
                    residual_coarse: Real(c.coarse_residual),
                    residual_fine: Real(c.fine_residual),
                    ratio: Real(c.ratio),
                })
            })
            .collect::<Result<Vec<_>, lyapmax::Error>>()?;
        levels.push(LevelDiagnostics {
            n,
            max_chi_decrease: Real(diag.max_chi_decrease),
            max_entropy_increase: Real(diag.max_entropy_increase),
            gap_bound_holds: diag.gap_bound_holds,
            max_variational_residual: Real(diag.rows.iter().map(|r| r.variational_residual).fold(0.0, f64::max)),
            richardson,
        });
        argmax.push(ArgmaxEntry {
            n,
            beta_plus: Real(diag.beta_plus),
            ground_entropy: Real(diag.ground_entropy),
            argmax: diag.argmax.iter().map(Word::to_string).collect(),
        });
    }
    table.write(&ctx.path("zerotemp.csv"))?;
    write_json(&ctx.path("zerotemp_argmax.json"), &argmax)?;
    ctx.write_meta("zerotemp.json", ZeroTempResult { t_grid: reals(&grid), levels })
}

#[derive(Serialize)]
struct MaxExpResult {
    lower: Real,
    upper: Real,
    gap: Real,
    witness: String,
    period: usize,
    depth: usize,
    upper_level: usize,
    gap_target: Real,
    budget_exhausted: bool,
    /// Whether convergence of the lower bound is a theorem (2×2 cocycles)
    /// or only observed.
    lower_convergence: &'static str,
}

fn convergence_label(potential: &Potential64) -> &'static str {
    match potential.matrices().map(|m| m.dim()) {
        Some(2) => "theorem (d = 2)",
        Some(_) => "empirical (d != 2)",
        None => "not applicable (additive potential)",
    }
}

fn run_maxexp(ctx: &Ctx) -> Result<(), CliError> {
    let r = &ctx.resolved;
    let (bracket, exhausted): (JsrBracket<f64>, bool) = match bracket_search(&r.search, &r.sft, &r.potential) {
        Ok(b) => (b, false),
        Err(SearchError::BudgetExhausted(b)) => (*b, true),
        Err(SearchError::Failed(e)) => return Err(e.into()),
    };
    let result = MaxExpResult {
        lower: Real(bracket.lower),
        upper: Real(bracket.upper),
        gap: Real(bracket.gap()),
        witness: bracket.witness.to_string(),
        period: bracket.witness.period(),
        depth: bracket.depth_used,
        upper_level: bracket.upper_level,
        gap_target: Real(GAP_TARGET),
        budget_exhausted: exhausted,
        lower_convergence: convergence_label(&r.potential),
    };
    let path = ctx.path("maxexp.json");
    ctx.write_meta("maxexp.json", result)?;
    if exhausted {
        return Err(CliError::Budget { gap: bracket.gap(), path });
    }
    Ok(())
}

#[derive(Serialize)]
struct Estimate {
    mean: Real,
    half_width: Real,
    std_dev: Real,
    n: usize,
    samples: usize,
    seed: u64,
}

impl From<&lyapmax::montecarlo::ExponentEstimate<f64>> for Estimate {
    fn from(e: &lyapmax::montecarlo::ExponentEstimate<f64>) -> Self {
        Self {
            mean: Real(e.mean),
            half_width: Real(e.half_width),
            std_dev: Real(e.std_dev),
            n: e.n,
            samples: e.samples,
            seed: e.seed,
        }
    }
}

#[derive(Serialize)]
struct MeasureProbe {
    p: Vec<Real>,
    p_prime: Vec<Real>,
    chi: Real,
    chi_prime: Real,
    gap: Real,
    half_width: Real,
}

#[derive(Serialize)]
struct McResult {
    estimate: Estimate,
    perturbation_metric: &'static str,
    continuity_scope: &'static str,
    measure_probe: Option<MeasureProbe>,
}

fn run_mc(ctx: &Ctx) -> Result<(), CliError> {
    let r = &ctx.resolved;
    let (n, samples, seed) = (r.mc.n, r.mc.samples, r.seed);
    let estimate = furstenberg_estimate(&r.potential, &r.sft, &r.mc_p, n, samples, seed)?;

    let rows: Vec<LadderRow<f64>> = match (&r.matrices, r.mc.deltas.is_empty()) {
        (Some(ms), false) if matches!(r.potential, Potential64::MatrixNorm(_)) => {
            continuity_ladder(ms, &r.sft, &r.mc_p, &r.mc.deltas, n, samples, seed)?
        }
        _ => vec![LadderRow {
            delta: 0.0,
            chi: estimate.mean,
            chi_prime: estimate.mean,
            gap: 0.0,
            half_width: estimate.half_width,
        }],
    };
    let mut table = Table::new(&["delta", "chi", "chi_prime", "gap", "half_width"]);
    for row in &rows {
        table.push(vec![
            fmt_real(row.delta),
            fmt_real(row.chi),
            fmt_real(row.chi_prime),
            fmt_real(row.gap),
            fmt_real(row.half_width),
        ]);
    }
    table.write(&ctx.path("mc.csv"))?;

    let measure_probe = match &r.mc_p_prime {
        Some(pp) => {
            let probe = continuity_probe(&r.potential, &r.potential, &r.sft, &r.mc_p, pp, n, samples, seed)?;
            Some(MeasureProbe {
                p: reals(r.mc_p.probabilities()),
                p_prime: reals(pp.probabilities()),
                chi: Real(probe.base.mean),
                chi_prime: Real(probe.perturbed.mean),
                gap: Real(probe.difference),
                half_width: Real(probe.base.half_width.max(probe.perturbed.half_width)),
            })
        }
        None => None,
    };
    let result = McResult {
        estimate: Estimate::from(&estimate),
        perturbation_metric: "entrywise max-norm: each entry moves by delta*u, u uniform in [-1, 1] from a seeded stream",
        continuity_scope: convergence_label(&r.potential),
        measure_probe,
    };
    ctx.write_meta("mc.json", result)
}

#[derive(Serialize)]
struct CloseResult {
    trajectory_len: usize,
    prefix_exponent: Real,
    periodic_exponent: Real,
    difference: Real,
    orbit: String,
    period: usize,
    orbit_start: usize,
    extended_by: usize,
}

fn run_close(ctx: &Ctx) -> Result<(), CliError> {
    let r = &ctx.resolved;
    let report = closing_experiment(&r.potential, &r.sft, &r.close_p, r.close.len, r.seed)?;
    let mut table = Table::new(&["n", "prefix_exponent"]);
    for (n, v) in &report.checkpoints {
        table.push(vec![n.to_string(), fmt_real(*v)]);
    }
    table.write(&ctx.path("close.csv"))?;
    ctx.write_meta(
        "close.json",
        CloseResult {
            trajectory_len: report.trajectory_len,
            prefix_exponent: Real(report.prefix_exponent),
            periodic_exponent: Real(report.periodic_exponent),
            difference: Real(report.difference),
            orbit: report.orbit.to_string(),
            period: report.orbit.period(),
            orbit_start: report.orbit_start,
            extended_by: report.extended_by,
        },
    )
}

/// Half a unit in the last written digit of a decimal literal.
pub fn written_precision(literal: &str) -> Option<f64> {
    let s = literal.trim();
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let decimals = mantissa.split_once('.').map_or(0, |(_, frac)| frac.len() as i32);
    Some(0.5 * 10f64.powi(exponent - decimals))
}

/// Verification tolerance for a claimed value.
pub fn claim_tolerance(literal: &str) -> Option<f64> {
    written_precision(literal).map(|p| p.max(1e-8))
}

#[derive(Serialize)]
struct VerifyResult {
    witness: String,
    exponent: Real,
    claim: Real,
    difference: Real,
    tolerance: Real,
    verified: bool,
}

fn run_verify(ctx: &Ctx, witness: &str, claim: &str) -> Result<(), CliError> {
    let r = &ctx.resolved;
    let word: Word = witness.parse().map_err(|e| CliError::Usage(format!("witness {witness:?}: {e}")))?;
    let claimed: f64 = claim
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("claim {claim:?} is not a number")))?;
    let tolerance = claim_tolerance(claim).ok_or_else(|| CliError::Usage(format!("claim {claim:?} is not a number")))?;
    let exponent = verify_witness(&word, &r.sft, &r.potential)
        .map_err(|e| CliError::Mismatch(format!("witness {witness} rejected: {e}")))?;
    let difference = (exponent - claimed).abs();
    let verified = difference <= tolerance;
    let report = VerifyResult {
        witness: word.to_string(),
        exponent: Real(exponent),
        claim: Real(claimed),
        difference: Real(difference),
        tolerance: Real(tolerance),
        verified,
    };
    println!("{}", serde_json::to_string(&report).expect("report serializes"));
    if verified {
        Ok(())
    } else {
        Err(CliError::Mismatch(format!(
            "witness {witness} has exponent {} but the claim is {claim} (tolerance {})",
            fmt_real(exponent),
            fmt_real(tolerance)
        )))
    }
}
