//! Level-`n` Gibbs distributions and zero-temperature diagnostics.
//!
//! The level-`n` Gibbs distribution `p_w ∝ exp(t·s(w))` on admissible
//! `n`-words is the exact maximizer of `H(q) + t·Σ q_w s(w)` over
//! distributions on those words, with maximum `log Z_n(t)`. It stands in for
//! an equilibrium state; it is not a shift-invariant measure, so every
//! statement checked here is its exact finite-level form:
//!
//! * `entropy + t·chi = pressure_upper` (variational identity),
//! * `d/dt pressure_upper = chi` (derivative identity),
//! * `chi` non-decreasing and `entropy` non-increasing in `t`,
//! * `beta_plus − chi ≤ entropy / t ≤ log k / t`.
//!
//! Entropies are per symbol: `−(1/n) Σ p_w log p_w`. The infinite-`t` limit
//! is built explicitly by [`ground_state`] rather than by a huge `t`.

use crate::cocycle::Potential;
use crate::error::{invalid, Error};
use crate::pressure::pressure_upper_grid;
use crate::scalar::{pairwise_sum, Scalar};
use crate::scan;
use crate::symbolic::{SftSpec, Symbol, Word};

/// A probability distribution on admissible `n`-words.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsApproximant<T> {
    n: usize,
    t: T,
    words: Vec<Vec<Symbol>>,
    log_norms: Vec<T>,
    log_probs: Vec<T>,
    probs: Vec<T>,
}

impl<T: Scalar> GibbsApproximant<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Inverse temperature; `+∞` for ground states.
    pub fn t(&self) -> T {
        self.t
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = Word> + '_ {
        self.words.iter().map(|w| Word::new(w.clone()).expect("level words are non-empty"))
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    /// Exact log-probabilities; finite for every word at finite `t` even
    /// where `probs` underflows to zero.
    pub fn log_probs(&self) -> &[T] {
        &self.log_probs
    }

    pub fn log_norms(&self) -> &[T] {
        &self.log_norms
    }

    pub fn probability(&self, word: &Word) -> Option<T> {
        self.words
            .binary_search_by(|w| w.as_slice().cmp(word.symbols()))
            .ok()
            .map(|i| self.probs[i])
    }

    /// Total probability of a set of words.
    pub fn mass_on(&self, words: &[Word]) -> T {
        words.iter().filter_map(|w| self.probability(w)).sum()
    }

    /// Words carrying positive probability.
    pub fn support(&self) -> Vec<Word> {
        self.words()
            .zip(&self.probs)
            .filter(|(_, &p)| p > T::zero())
            .map(|(w, _)| w)
            .collect()
    }
}

fn check_n(n: usize) -> Result<(), Error> {
    if n == 0 {
        return Err(invalid("level n must be ≥ 1"));
    }
    Ok(())
}

fn level_table<T: Scalar>(n: usize, sft: &SftSpec, potential: &Potential<T>) -> Result<(Vec<Vec<Symbol>>, Vec<T>), Error> {
    check_n(n)?;
    potential.check_level(sft, n)?;
    Ok(scan::collect_words_and_values(sft, n, potential))
}

fn gibbs_from_values<T: Scalar>(n: usize, t: T, words: Vec<Vec<Symbol>>, log_norms: Vec<T>) -> GibbsApproximant<T> {
    let top = log_norms.iter().copied().fold(T::neg_infinity(), T::max);
    let exponents: Vec<T> = log_norms
        .iter()
        .map(|&s| if t == T::zero() { T::zero() } else { t * (s - top) })
        .collect();
    let shifted: Vec<T> = exponents.iter().map(|e| e.exp()).collect();
    let log_z = pairwise_sum(&shifted).ln();
    let log_probs: Vec<T> = exponents.iter().map(|&e| e - log_z).collect();
    let probs = log_probs.iter().map(|lp| lp.exp()).collect();
    GibbsApproximant { n, t, words, log_norms, log_probs, probs }
}

/// `p_w ∝ exp(t·s(w))` over admissible `n`-words, built from max-shifted
/// exponentials so nothing overflows.
pub fn gibbs_weights<T: Scalar>(n: usize, t: T, sft: &SftSpec, potential: &Potential<T>) -> Result<GibbsApproximant<T>, Error> {
    if !(t >= T::zero()) || !t.is_finite() {
        return Err(invalid(format!("inverse temperature must be finite and ≥ 0, got {t}")));
    }
    let (words, values) = level_table(n, sft, potential)?;
    Ok(gibbs_from_values(n, t, words, values))
}

/// `Σ p_w s(w) / n`.
pub fn lyapunov_of<T: Scalar>(g: &GibbsApproximant<T>) -> T {
    let terms: Vec<T> = g
        .probs
        .iter()
        .zip(&g.log_norms)
        .map(|(&p, &s)| if p > T::zero() { p * s } else { T::zero() })
        .collect();
    pairwise_sum(&terms) / T::from_count(g.n)
}

/// `−(1/n) Σ p_w log p_w`.
pub fn entropy_of<T: Scalar>(g: &GibbsApproximant<T>) -> T {
    let terms: Vec<T> = g
        .probs
        .iter()
        .zip(&g.log_probs)
        .map(|(&p, &lp)| if p > T::zero() { p * lp } else { T::zero() })
        .collect();
    -pairwise_sum(&terms) / T::from_count(g.n)
}

/// Argmax tolerance on `s(w)`: `1e-9` per symbol.
pub fn tie_tolerance<T: Scalar>(n: usize) -> T {
    T::lit(1e-9) * T::from_count(n)
}

fn ground_from_values<T: Scalar>(n: usize, words: Vec<Vec<Symbol>>, log_norms: Vec<T>) -> GibbsApproximant<T> {
    let top = log_norms.iter().copied().fold(T::neg_infinity(), T::max);
    let tol = tie_tolerance::<T>(n);
    let in_argmax: Vec<bool> = log_norms.iter().map(|&s| s >= top - tol).collect();
    let count = in_argmax.iter().filter(|&&b| b).count();
    let log_p = -T::from_count(count).ln();
    let (log_probs, probs) = in_argmax
        .iter()
        .map(|&b| if b { (log_p, log_p.exp()) } else { (T::neg_infinity(), T::zero()) })
        .unzip();
    GibbsApproximant { n, t: T::infinity(), words, log_norms, log_probs, probs }
}

/// Uniform distribution on `{w : s(w) ≥ max s − 1e-9·n}`: the `t → ∞`
/// limit of [`gibbs_weights`].
pub fn ground_state<T: Scalar>(n: usize, sft: &SftSpec, potential: &Potential<T>) -> Result<GibbsApproximant<T>, Error> {
    let (words, values) = level_table(n, sft, potential)?;
    Ok(ground_from_values(n, words, values))
}

/// `½ Σ |p_w − q_w|` for two distributions on the same words.
pub fn total_variation<T: Scalar>(a: &GibbsApproximant<T>, b: &GibbsApproximant<T>) -> Result<T, Error> {
    if a.n != b.n || a.words != b.words {
        return Err(invalid("distributions live on different word sets"));
    }
    let diffs: Vec<T> = a.probs.iter().zip(&b.probs).map(|(&p, &q)| (p - q).abs()).collect();
    Ok(pairwise_sum(&diffs) * T::lit(0.5))
}

/// `sinh(y) − y`, accurate for small `y`.
fn sinh_minus_id<T: Scalar>(y: T) -> T {
    if y.abs() >= T::lit(0.5) {
        return y.sinh() - y;
    }
    let y2 = y * y;
    let mut term = y * y2 / T::lit(6.0);
    let mut sum = term;
    for k in 2..20 {
        term = term * y2 / T::from_count((2 * k) * (2 * k + 1));
        sum = sum + term;
        if term.abs() <= T::epsilon() * sum.abs() {
            break;
        }
    }
    sum
}

/// `eʸ − 1 − y`, accurate for small `y`.
fn expm1_minus_id<T: Scalar>(y: T) -> T {
    if y.abs() >= T::lit(0.5) {
        return y.exp_m1() - y;
    }
    let mut term = y * y / T::lit(2.0);
    let mut sum = term;
    for k in 3..40 {
        term = term * y / T::from_count(k);
        sum = sum + term;
        if term.abs() <= T::epsilon() * sum.abs() {
            break;
        }
    }
    sum
}

/// `(P(t+h) − P(t−h)) / (2h) − chi` for the level-`n` pressure at the
/// approximant's `t`.
///
/// With `x_w = s(w) − Σ p s` (so `Σ p x = 0` exactly),
/// `n·(P(t±h) − P(t)) = ±h·Σ p s + log(1 + Σ p (e^{±h x} − 1 ∓ h x))`, and the
/// residual is `log1p(2 Σ p (sinh(h x) − h x) / (1 + Σ p (e^{−h x} − 1 + h x))) / (2 h n)`.
/// No term of size `h·x` is ever formed, so the `O(h²)` residual keeps full
/// relative precision down to small `h`. Works for `t − h < 0` since the
/// level pressure is analytic in `t`.
pub fn central_difference_residual<T: Scalar>(g: &GibbsApproximant<T>, h: T) -> T {
    let n = T::from_count(g.n);
    let mean = lyapunov_of(g) * n;
    let (odd, even): (Vec<T>, Vec<T>) = g
        .probs
        .iter()
        .zip(&g.log_norms)
        .filter(|(&p, _)| p > T::zero())
        .map(|(&p, &s)| {
            let y = h * (s - mean);
            (p * sinh_minus_id(y), p * expm1_minus_id(-y))
        })
        .unzip();
    let ratio = T::lit(2.0) * pairwise_sum(&odd) / (T::one() + pairwise_sum(&even));
    ratio.ln_1p() / (T::lit(2.0) * h * n)
}

/// Central-difference residuals at two step sizes and their ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RichardsonCheck<T> {
    pub coarse_step: T,
    pub fine_step: T,
    pub coarse_residual: T,
    pub fine_residual: T,
    /// `coarse_residual / fine_residual`; `(coarse/fine)²` for a
    /// second-order difference.
    pub ratio: T,
    /// Leading coefficient `κ₃ / (6n)` of the residual in `h²`, with `κ₃`
    /// the third central moment of `s` under the distribution.
    pub h2_coefficient: T,
    /// `κ₃` vanishes to working precision (e.g. any two-point distribution
    /// with equal weights); the residual is then `O(h⁴)` and the ratio is
    /// not `(coarse/fine)²`.
    pub h2_vanishes: bool,
}

pub fn richardson_check<T: Scalar>(g: &GibbsApproximant<T>, coarse_step: T, fine_step: T) -> RichardsonCheck<T> {
    let n = T::from_count(g.n);
    let mean = lyapunov_of(g) * n;
    let (cubes, scale): (Vec<T>, Vec<T>) = g
        .probs
        .iter()
        .zip(&g.log_norms)
        .filter(|(&p, _)| p > T::zero())
        .map(|(&p, &s)| {
            let x = s - mean;
            (p * x * x * x, p * (x * x * x).abs())
        })
        .unzip();
    let kappa3 = pairwise_sum(&cubes);
    let h2_vanishes = kappa3.abs() <= T::lit(64.0) * T::epsilon() * pairwise_sum(&scale);
    let coarse_residual = central_difference_residual(g, coarse_step);
    let fine_residual = central_difference_residual(g, fine_step);
    RichardsonCheck {
        coarse_step,
        fine_step,
        coarse_residual,
        fine_residual,
        ratio: coarse_residual / fine_residual,
        h2_coefficient: kappa3 / (T::lit(6.0) * n),
        h2_vanishes,
    }
}

/// One grid point of a zero-temperature sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroTempRow<T> {
    pub t: T,
    pub chi: T,
    pub entropy: T,
    /// Streaming [`crate::pressure::pressure_upper`] at this `t`.
    pub pressure: T,
    /// `beta_plus − chi`.
    pub gap: T,
    /// `entropy / t`; `+∞` at `t = 0`.
    pub gap_bound: T,
    /// `|entropy + t·chi − pressure|`.
    pub variational_residual: T,
}

/// Zero-temperature diagnostics at one level.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroTempDiagnostics<T> {
    pub n: usize,
    pub rows: Vec<ZeroTempRow<T>>,
    /// `max_w s(w)/n`.
    pub beta_plus: T,
    /// `(1/n) log |argmax|`.
    pub ground_entropy: T,
    pub argmax: Vec<Word>,
    /// Largest drop of `chi` between consecutive grid points (≤ 0 when monotone).
    pub max_chi_decrease: T,
    /// Largest rise of `entropy` between consecutive grid points.
    pub max_entropy_increase: T,
    /// `gap ≤ gap_bound ≤ log k / t` at every `t > 0`.
    pub gap_bound_holds: bool,
}

/// Gibbs functionals along `t_grid` (increasing, starting at 0) plus the
/// ground-state limits at level `n`.
pub fn zero_temp_sweep<T: Scalar>(
    n: usize,
    t_grid: &[T],
    sft: &SftSpec,
    potential: &Potential<T>,
) -> Result<ZeroTempDiagnostics<T>, Error> {
    if t_grid.first() != Some(&T::zero()) {
        return Err(invalid("zero-temperature grid must start at t = 0"));
    }
    if t_grid.windows(2).any(|p| !(p[0] < p[1])) {
        return Err(invalid("t grid must be strictly increasing"));
    }
    let (words, values) = level_table(n, sft, potential)?;
    let pressures = pressure_upper_grid(n, t_grid, sft, potential)?;
    let ground = ground_from_values(n, words.clone(), values.clone());
    let beta_plus = values.iter().copied().fold(T::neg_infinity(), T::max) / T::from_count(n);
    let argmax = ground.support();
    let ground_entropy = T::from_count(argmax.len()).ln() / T::from_count(n);
    let log_k = T::from_count(sft.k()).ln();
    let tol = T::tol(1e-12, 64.0) * beta_plus.abs().max(T::one());

    let mut rows = Vec::with_capacity(t_grid.len());
    let mut gap_bound_holds = true;
    for (&t, &pressure) in t_grid.iter().zip(&pressures) {
        let g = gibbs_from_values(n, t, words.clone(), values.clone());
        let chi = lyapunov_of(&g);
        let entropy = entropy_of(&g);
        let gap = beta_plus - chi;
        let gap_bound = if t > T::zero() { entropy / t } else { T::infinity() };
        if t > T::zero() && !(gap <= gap_bound + tol && gap_bound <= log_k / t + tol) {
            gap_bound_holds = false;
        }
        rows.push(ZeroTempRow {
            t,
            chi,
            entropy,
            pressure,
            gap,
            gap_bound,
            variational_residual: (entropy + t * chi - pressure).abs(),
        });
    }
    let max_chi_decrease = rows
        .windows(2)
        .map(|r| r[0].chi - r[1].chi)
        .fold(T::neg_infinity(), T::max);
    let max_entropy_increase = rows
        .windows(2)
        .map(|r| r[1].entropy - r[0].entropy)
        .fold(T::neg_infinity(), T::max);
    Ok(ZeroTempDiagnostics {
        n,
        rows,
        beta_plus,
        ground_entropy,
        argmax,
        max_chi_decrease,
        max_entropy_increase,
        gap_bound_holds,
    })
}
