//! Brackets for the maximal Lyapunov exponent `β(Φ)`.
//!
//! * Upper: `max_{|w|=n} s(w)/n` bounds `β` from above at every level `n`,
//!   because `n ↦ max_{|w|=n} s(w)` is subadditive. Subwords of admissible
//!   words are admissible and every admissible word extends to a
//!   bi-infinite orbit (no dead symbols), so this holds on proper SFTs as
//!   well as on the full shift.
//! * Lower: a cyclically admissible word `w` of period `p` carries an
//!   invariant measure with exponent `(1/p) log ρ(A_w)`, which can never
//!   exceed `β`.
//!
//! Only exhaustive levels move the upper bound. The beam search in
//! [`bracket_search`] is allowed to miss maximizers; it can only tighten the
//! lower bound.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cocycle::{log_spectral_radius, product, CocycleError, Potential, RunningPotential, ScaledMatrix};
use crate::error::{invalid, Error};
use crate::montecarlo::BernoulliSpec;
use crate::scalar::Scalar;
use crate::scan;
use crate::symbolic::{close_word, is_lyndon, PeriodicOrbit, SftSpec, Symbol, SymbolicError, Word};

/// Enclosure `lower ≤ β(Φ) ≤ upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct JsrBracket<T> {
    pub lower: T,
    pub upper: T,
    /// Orbit whose exponent equals `lower`.
    pub witness: PeriodicOrbit,
    /// Level whose norm maximum gave `upper`.
    pub upper_level: usize,
    /// Longest word length examined.
    pub depth_used: usize,
}

impl<T: Scalar> JsrBracket<T> {
    pub fn gap(&self) -> T {
        self.upper - self.lower
    }
}

/// Search budget for [`bracket_search`].
#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    /// Exhaustive depth.
    pub n_exact: usize,
    /// Beam keeps words with `s(w)/|w| ≥ lower − beam_delta`.
    pub beam_delta: f64,
    pub max_depth: usize,
    /// Frontier cap per depth.
    pub beam_width: usize,
    /// Drives the random part of frontier truncation.
    pub seed: u64,
}

/// Stop once `upper − lower` falls to this.
pub const GAP_TARGET: f64 = 1e-6;

impl SearchConfig {
    /// `n_exact = 12` for two symbols, scaled by `1/log₂ k` so the
    /// exhaustive level stays near 4096 words.
    pub fn for_alphabet(k: usize) -> Self {
        let n_exact = if k <= 2 {
            12
        } else {
            ((12.0 / (k as f64).log2()).round() as usize).max(1)
        };
        Self { n_exact, beam_delta: 0.05, max_depth: 64, beam_width: 2048, seed: 0 }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.n_exact == 0 {
            return Err(invalid("n_exact must be ≥ 1"));
        }
        if self.n_exact > self.max_depth {
            return Err(invalid("n_exact must not exceed max_depth"));
        }
        if !(self.beam_delta >= 0.0) {
            return Err(invalid("beam_delta must be ≥ 0"));
        }
        if self.beam_width == 0 {
            return Err(invalid("beam_width must be ≥ 1"));
        }
        Ok(())
    }
}

/// Failure modes of [`bracket_search`].
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SearchError<T: Scalar> {
    /// Depth budget spent with the gap still open; the bracket is sound.
    #[error("search budget exhausted with gap {}", .0.gap())]
    BudgetExhausted(Box<JsrBracket<T>>),
    #[error(transparent)]
    Failed(#[from] Error),
}

fn reject_tables<T: Scalar>(potential: &Potential<T>) -> Result<(), Error> {
    if let Potential::TableWeights(_) = potential {
        return Err(invalid("weight tables define a single level; exponent brackets need matrix or additive potentials"));
    }
    Ok(())
}

/// `max_{|w|=n} s(w)/n` for `n = 1..=max_level`, from a single sweep over
/// words of length `max_level` (each prefix of length `n` is an `n`-word).
pub fn level_maxima<T: Scalar>(max_level: usize, sft: &SftSpec, potential: &Potential<T>) -> Result<Vec<T>, Error> {
    if max_level == 0 {
        return Err(invalid("level must be ≥ 1"));
    }
    reject_tables(potential)?;
    potential.check_level(sft, max_level)?;
    let chunks = scan::map_chunks(sft, max_level, |mut cursor| {
        let mut maxima = vec![T::neg_infinity(); max_level];
        let mut eval = crate::cocycle::PrefixEvaluator::new(potential);
        while let Some(changed) = cursor.advance() {
            eval.truncate(changed);
            for &s in &cursor.word()[changed..] {
                eval.push(s);
                let depth = eval.len();
                maxima[depth - 1] = maxima[depth - 1].max(eval.value());
            }
        }
        maxima
    });
    let mut maxima = vec![T::neg_infinity(); max_level];
    for chunk in chunks {
        for (m, c) in maxima.iter_mut().zip(chunk) {
            *m = m.max(c);
        }
    }
    Ok(maxima
        .into_iter()
        .enumerate()
        .map(|(i, m)| m / T::from_count(i + 1))
        .collect())
}

/// `min_{n ≤ max_level} max_{|w|=n} s(w)/n` and the level attaining it.
pub fn beta_upper<T: Scalar>(max_level: usize, sft: &SftSpec, potential: &Potential<T>) -> Result<(T, usize), Error> {
    let maxima = level_maxima(max_level, sft, potential)?;
    Ok(min_with_level(&maxima))
}

fn min_with_level<T: Scalar>(maxima: &[T]) -> (T, usize) {
    maxima
        .iter()
        .enumerate()
        .fold((T::infinity(), 0), |(best, lvl), (i, &m)| if m < best { (m, i + 1) } else { (best, lvl) })
}

fn witness_tolerance<T: Scalar>(v: T) -> T {
    T::tol(1e-12, 16.0) * v.abs().max(T::one())
}

/// Periodic candidates of one length: cyclically admissible Lyndon words
/// (one representative per primitive rotation class) with their exponents.
/// Each chunk keeps only the words within tolerance of its own maximum.
fn periodic_candidates<T: Scalar>(
    len: usize,
    sft: &SftSpec,
    potential: &Potential<T>,
) -> Result<Vec<(T, Vec<Symbol>)>, Error> {
    let chunks = scan::map_chunks(sft, len, |mut cursor| -> Result<Vec<(T, Vec<Symbol>)>, CocycleError> {
        let mut kept: Vec<(T, Vec<Symbol>)> = Vec::new();
        let mut chunk_max = T::neg_infinity();
        let mut eval = crate::cocycle::PrefixEvaluator::new(potential);
        // first position that differs from the evaluator's word
        let mut stale = usize::MAX;
        while let Some(changed) = cursor.advance() {
            stale = stale.min(changed);
            let word = cursor.word();
            if !sft.allows(word[len - 1], word[0]) || !is_lyndon(word) {
                continue;
            }
            eval.sync(word, stale);
            stale = usize::MAX;
            let value = match (potential, eval.product()) {
                (Potential::MatrixNorm(_), Some(p)) => log_spectral_radius(p)? / T::from_count(len),
                _ => potential.periodic_exponent(word)?,
            };
            if value > chunk_max {
                chunk_max = value;
                let tol = witness_tolerance(chunk_max);
                kept.retain(|(v, _)| *v >= chunk_max - tol);
            }
            if value >= chunk_max - witness_tolerance(chunk_max) {
                kept.push((value, word.to_vec()));
            }
        }
        Ok(kept)
    });
    let mut all = Vec::new();
    for chunk in chunks {
        all.extend(chunk?);
    }
    Ok(all)
}

/// Best periodic candidate: global maximum, then the first word in
/// (length, lexicographic) order within tolerance of it.
fn select_witness<T: Scalar>(candidates: Vec<(T, Vec<Symbol>)>) -> Option<(T, Vec<Symbol>)> {
    let top = candidates.iter().map(|(v, _)| *v).fold(T::neg_infinity(), T::max);
    let tol = witness_tolerance(top);
    candidates.into_iter().find(|(v, _)| *v >= top - tol)
}

/// `max_{|w| ≤ max_len} (1/|w|) log ρ(A_w)` over cyclically admissible words,
/// with the shortest, then lexicographically first, witness.
pub fn beta_lower_periodic<T: Scalar>(
    max_len: usize,
    sft: &SftSpec,
    potential: &Potential<T>,
) -> Result<(T, PeriodicOrbit), Error> {
    if max_len == 0 {
        return Err(invalid("period bound must be ≥ 1"));
    }
    reject_tables(potential)?;
    potential.check_level(sft, max_len)?;
    let mut candidates = Vec::new();
    for len in 1..=max_len {
        candidates.extend(periodic_candidates(len, sft, potential)?);
    }
    let (value, word) = select_witness(candidates)
        .ok_or_else(|| invalid(format!("no periodic orbit of period ≤ {max_len}")))?;
    Ok((value, PeriodicOrbit::new(Word::new(word)?, sft)?))
}

/// Exponent of a periodic orbit recomputed from scratch.
pub fn verify_witness<T: Scalar>(word: &Word, sft: &SftSpec, potential: &Potential<T>) -> Result<T, Error> {
    reject_tables(potential)?;
    potential.check_level(sft, word.len())?;
    let orbit = PeriodicOrbit::new(word.clone(), sft)?;
    Ok(potential.periodic_exponent(orbit.word().symbols())?)
}

struct FrontierEntry<T> {
    word: Vec<Symbol>,
    product: Option<ScaledMatrix<T>>,
    sum: T,
    score: T,
}

impl<T: Scalar> FrontierEntry<T> {
    fn extend(&self, symbol: Symbol, potential: &Potential<T>) -> Self {
        let mut word = Vec::with_capacity(self.word.len() + 1);
        word.extend_from_slice(&self.word);
        word.push(symbol);
        let n = T::from_count(word.len());
        match potential {
            Potential::MatrixNorm(ms) => {
                let p = self.product.as_ref().expect("matrix frontier carries products").left_mul(ms.matrix(symbol));
                let score = p.log_norm() / n;
                Self { word, product: Some(p), sum: T::zero(), score }
            }
            Potential::Additive(f) => {
                let sum = self.sum + f[symbol];
                Self { word, product: None, sum, score: sum / n }
            }
            Potential::TableWeights(_) => unreachable!("tables rejected before search"),
        }
    }

    fn seed(word: Vec<Symbol>, potential: &Potential<T>) -> Self {
        let n = T::from_count(word.len());
        match potential {
            Potential::MatrixNorm(ms) => {
                let p = product(&word, ms);
                let score = p.log_norm() / n;
                Self { word, product: Some(p), sum: T::zero(), score }
            }
            _ => {
                let sum = potential.log_norm(&word);
                Self { word, product: None, sum, score: sum / n }
            }
        }
    }

    fn periodic_exponent(&self, potential: &Potential<T>) -> Result<T, CocycleError> {
        match &self.product {
            Some(p) => Ok(log_spectral_radius(p)? / T::from_count(self.word.len())),
            None => potential.periodic_exponent(&self.word),
        }
    }
}

/// Deepening search: exhaustive levels up to `n_exact` for both bounds,
/// then a beam that extends words scoring at least `lower − beam_delta` and
/// only ever raises `lower`. Stops at `max_depth` or when the gap reaches
/// [`GAP_TARGET`]. The witness is re-verified from scratch before return.
pub fn bracket_search<T: Scalar>(
    cfg: &SearchConfig,
    sft: &SftSpec,
    potential: &Potential<T>,
) -> Result<JsrBracket<T>, SearchError<T>> {
    cfg.validate()?;
    reject_tables(potential)?;
    potential.check_level(sft, 1).map_err(Error::from)?;
    let target = T::lit(GAP_TARGET);

    let maxima = level_maxima(cfg.n_exact, sft, potential)?;
    let mut upper = T::infinity();
    let mut upper_level = 0;
    let mut best: Option<(T, Vec<Symbol>)> = None;
    let mut depth_used = 0;

    for len in 1..=cfg.n_exact {
        if maxima[len - 1] < upper {
            upper = maxima[len - 1];
            upper_level = len;
        }
        if let Some(cand) = select_witness(periodic_candidates(len, sft, potential)?) {
            if improves(&best, cand.0) {
                best = Some(cand);
            }
        }
        depth_used = len;
        if let Some((lower, _)) = &best {
            if upper - *lower <= target {
                return finish(best, upper, upper_level, depth_used, sft, potential).map_err(Into::into);
            }
        }
    }

    let mut lower = best.as_ref().map_or(T::neg_infinity(), |b| b.0);
    let delta = T::lit(cfg.beam_delta);
    let mut frontier: Vec<FrontierEntry<T>> = crate::symbolic::enumerate_words(cfg.n_exact, sft)
        .map(|w| FrontierEntry::seed(w.into_symbols(), potential))
        .filter(|e| e.score >= lower - delta)
        .collect();
    frontier = truncate_frontier(frontier, cfg, cfg.n_exact);

    for len in cfg.n_exact + 1..=cfg.max_depth {
        if frontier.is_empty() {
            break;
        }
        let threshold_at_start = lower;
        let extended: Vec<Vec<(FrontierEntry<T>, Option<T>)>> = frontier
            .par_iter()
            .map(|entry| {
                let last = *entry.word.last().expect("frontier words are non-empty");
                sft.successors(last)
                    .iter()
                    .map(|&s| {
                        let child = entry.extend(s, potential);
                        // ρ ≤ ‖·‖, so only words scoring above the incumbent can improve it
                        let periodic = (child.score > threshold_at_start
                            && sft.allows(s, child.word[0])
                            && is_lyndon(&child.word))
                        .then(|| child.periodic_exponent(potential));
                        match periodic {
                            Some(Err(e)) => Err(e),
                            Some(Ok(v)) => Ok((child, Some(v))),
                            None => Ok((child, None)),
                        }
                    })
                    .collect::<Result<Vec<_>, CocycleError>>()
            })
            .collect::<Result<Vec<_>, CocycleError>>()
            .map_err(Error::from)?;

        let mut next = Vec::new();
        for (child, periodic) in extended.into_iter().flatten() {
            if let Some(v) = periodic {
                if improves(&best, v) {
                    lower = v;
                    best = Some((v, child.word.clone()));
                }
            }
            if child.score >= lower - delta {
                next.push(child);
            }
        }
        depth_used = len;
        if best.is_some() && upper - lower <= target {
            return finish(best, upper, upper_level, depth_used, sft, potential).map_err(Into::into);
        }
        frontier = truncate_frontier(next, cfg, len);
    }

    let bracket = finish(best, upper, upper_level, depth_used, sft, potential)?;
    Err(SearchError::BudgetExhausted(Box::new(bracket)))
}

fn improves<T: Scalar>(best: &Option<(T, Vec<Symbol>)>, value: T) -> bool {
    match best {
        None => true,
        Some((v, _)) => value > *v + witness_tolerance(*v),
    }
}

/// Keeps the best half of an oversized frontier by score and a seeded
/// random sample of the rest, then restores lexicographic order.
fn truncate_frontier<T: Scalar>(mut frontier: Vec<FrontierEntry<T>>, cfg: &SearchConfig, depth: usize) -> Vec<FrontierEntry<T>> {
    if frontier.len() > cfg.beam_width {
        frontier.sort_by(|a, b| b.score.partial_cmp(&a.score).unwrap_or(std::cmp::Ordering::Equal).then_with(|| a.word.cmp(&b.word)));
        let keep_top = cfg.beam_width.div_ceil(2);
        let rest = frontier.split_off(keep_top);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (depth as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut picks = sample(&mut rng, rest.len(), cfg.beam_width - keep_top).into_vec();
        picks.sort_unstable();
        let mut rest: Vec<Option<FrontierEntry<T>>> = rest.into_iter().map(Some).collect();
        frontier.extend(picks.into_iter().filter_map(|i| rest[i].take()));
    }
    frontier.sort_by(|a, b| a.word.cmp(&b.word));
    frontier
}

fn finish<T: Scalar>(
    best: Option<(T, Vec<Symbol>)>,
    upper: T,
    upper_level: usize,
    depth_used: usize,
    sft: &SftSpec,
    potential: &Potential<T>,
) -> Result<JsrBracket<T>, Error> {
    let (lower, word) = best.ok_or_else(|| invalid("no periodic orbit found within the search depth"))?;
    let witness = PeriodicOrbit::new(Word::new(word)?, sft)?;
    let recomputed = verify_witness(witness.word(), sft, potential)?;
    if (recomputed - lower).abs() > T::tol(1e-10, 1024.0) * lower.abs().max(T::one()) {
        return Err(invalid(format!(
            "witness {witness} re-verification drifted: search {lower}, recomputed {recomputed}"
        )));
    }
    Ok(JsrBracket { lower: recomputed, upper, witness, upper_level, depth_used })
}

/// Outcome of a closing experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosingReport<T> {
    pub trajectory_len: usize,
    /// `s(w₁…w_n)/n` at `n = 100, 200, 400, …` and at the full length.
    pub checkpoints: Vec<(usize, T)>,
    pub prefix_exponent: T,
    pub orbit: PeriodicOrbit,
    /// Start index of the closed orbit inside the trajectory.
    pub orbit_start: usize,
    pub periodic_exponent: T,
    /// `periodic_exponent − prefix_exponent`.
    pub difference: T,
    /// Symbols appended because the trajectory could not close.
    pub extended_by: usize,
}

fn sample_successor<T: Scalar>(prev: Option<Symbol>, sft: &SftSpec, p: &BernoulliSpec<T>, u: f64) -> Result<Symbol, Error> {
    let allowed: Vec<Symbol> = match prev {
        Some(a) => sft.successors(a).to_vec(),
        None => (0..sft.k()).collect(),
    };
    let total: f64 = allowed.iter().map(|&s| p.probabilities()[s].as_f64()).sum();
    let mut target = u * total;
    for &s in &allowed {
        target -= p.probabilities()[s].as_f64();
        if target < 0.0 {
            return Ok(s);
        }
    }
    allowed.last().copied().ok_or_else(|| invalid("no admissible successor"))
}

/// Samples an admissible trajectory (i.i.d. proposal `p` restricted to
/// allowed successors), tracks the running prefix exponent, closes the
/// trajectory into a periodic orbit and compares the two exponents.
pub fn closing_experiment<T: Scalar>(
    potential: &Potential<T>,
    sft: &SftSpec,
    p: &BernoulliSpec<T>,
    len: usize,
    seed: u64,
) -> Result<ClosingReport<T>, Error> {
    if len < 100 {
        return Err(invalid("closing experiment needs len ≥ 100"));
    }
    if p.k() != sft.k() {
        return Err(invalid(format!("proposal has {} symbols, shift has {}", p.k(), sft.k())));
    }
    reject_tables(potential)?;
    potential.check_level(sft, 1)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut word: Vec<Symbol> = Vec::with_capacity(len + sft.k());
    let mut eval = RunningPotential::new(potential);
    let mut checkpoints = Vec::new();
    let mut next_checkpoint = 100;
    for i in 0..len {
        let s = sample_successor(word.last().copied(), sft, p, rng.gen::<f64>())?;
        word.push(s);
        eval.push(s);
        if i + 1 == next_checkpoint || i + 1 == len {
            checkpoints.push((i + 1, eval.value() / T::from_count(i + 1)));
            if i + 1 == next_checkpoint {
                next_checkpoint *= 2;
            }
        }
    }
    let prefix_exponent = eval.value() / T::from_count(len);

    let mut extended_by = 0;
    let orbit = loop {
        match close_word(&Word::new(word.clone())?, sft) {
            Ok(orbit) => break orbit,
            Err(SymbolicError::NoClosure) if extended_by < sft.k() => {
                let s = sample_successor(word.last().copied(), sft, p, rng.gen::<f64>())?;
                word.push(s);
                extended_by += 1;
            }
            Err(e) => return Err(e.into()),
        }
    };
    let orbit_start = word
        .windows(orbit.period())
        .position(|w| w == orbit.word().symbols())
        .unwrap_or(0);
    let periodic_exponent = potential.periodic_exponent(orbit.word().symbols())?;
    Ok(ClosingReport {
        trajectory_len: len,
        checkpoints,
        prefix_exponent,
        difference: periodic_exponent - prefix_exponent,
        orbit,
        orbit_start,
        periodic_exponent,
        extended_by,
    })
}
