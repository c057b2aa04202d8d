//! Monte Carlo Lyapunov exponents for Bernoulli measures.
//!
//! Each sample draws `n` i.i.d. symbols and records `s(w)/n`; by Kingman's
//! theorem the mean converges to `χ(μ, Φ)`. Sample `i` uses the ChaCha
//! stream `i` of the run seed and maps uniforms to symbols through the
//! inverse CDF, so two runs with the same seed share their random numbers
//! even when the probability vectors differ (common random numbers).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cocycle::{Matrix, MatrixSet, Potential, RunningPotential};
use crate::error::{invalid, Error};
use crate::scalar::{pairwise_sum, Scalar};
use crate::symbolic::{SftSpec, Symbol};

/// A strictly positive probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliSpec<T> {
    p: Vec<T>,
    cdf: Vec<T>,
}

impl<T: Scalar> BernoulliSpec<T> {
    pub fn new(p: Vec<T>) -> Result<Self, Error> {
        if p.is_empty() {
            return Err(invalid("probability vector is empty"));
        }
        if let Some(i) = p.iter().position(|&x| !(x > T::zero()) || !x.is_finite()) {
            return Err(invalid(format!("probability p[{i}] must be strictly positive")));
        }
        let total: T = pairwise_sum(&p);
        if (total - T::one()).abs() > T::tol(1e-12, 8.0) * T::from_count(p.len()) {
            return Err(invalid(format!("probabilities sum to {total}, expected 1")));
        }
        let mut acc = T::zero();
        let cdf = p
            .iter()
            .map(|&x| {
                acc = acc + x;
                acc
            })
            .collect();
        Ok(Self { p, cdf })
    }

    pub fn uniform(k: usize) -> Result<Self, Error> {
        Self::new(vec![T::from_count(k).recip(); k])
    }

    pub fn k(&self) -> usize {
        self.p.len()
    }

    pub fn probabilities(&self) -> &[T] {
        &self.p
    }

    /// Inverse-CDF lookup for `u ∈ [0, 1)`.
    pub fn symbol_for(&self, u: f64) -> Symbol {
        let u = T::lit(u) * self.cdf[self.cdf.len() - 1];
        self.cdf.iter().position(|&c| u < c).unwrap_or(self.cdf.len() - 1)
    }
}

/// Mean exponent with a 95% normal confidence half-width.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentEstimate<T> {
    pub mean: T,
    /// `1.96 · std / √samples`.
    pub half_width: T,
    pub std_dev: T,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
}

fn sample_exponent<T: Scalar>(potential: &Potential<T>, bp: &BernoulliSpec<T>, n: usize, seed: u64, index: usize) -> T {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let mut running = RunningPotential::new(potential);
    for _ in 0..n {
        running.push(bp.symbol_for(rng.gen::<f64>()));
    }
    running.value() / T::from_count(n)
}

/// Monte Carlo estimate of `χ(μ_p, Φ)` on the full shift.
pub fn furstenberg_estimate<T: Scalar>(
    potential: &Potential<T>,
    sft: &SftSpec,
    bp: &BernoulliSpec<T>,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<ExponentEstimate<T>, Error> {
    if !sft.is_full() {
        return Err(Error::UnsupportedSft);
    }
    if n < 100 || samples < 100 {
        return Err(invalid("Monte Carlo estimates need n ≥ 100 and samples ≥ 100"));
    }
    if bp.k() != sft.k() {
        return Err(invalid(format!("probability vector has {} entries, alphabet has {}", bp.k(), sft.k())));
    }
    if let Potential::TableWeights(_) = potential {
        return Err(invalid("weight tables cannot be sampled along long words"));
    }
    potential.check_level(sft, 1)?;

    let values: Vec<T> = (0..samples)
        .into_par_iter()
        .map(|i| sample_exponent(potential, bp, n, seed, i))
        .collect();
    let count = T::from_count(samples);
    let mean = pairwise_sum(&values) / count;
    let squares: Vec<T> = values.iter().map(|&v| (v - mean) * (v - mean)).collect();
    let std_dev = (pairwise_sum(&squares) / T::from_count(samples - 1)).sqrt();
    Ok(ExponentEstimate {
        mean,
        half_width: T::lit(1.96) * std_dev / count.sqrt(),
        std_dev,
        n,
        samples,
        seed,
    })
}

/// Paired estimates for two cocycles or measures and their gap.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityProbe<T> {
    pub base: ExponentEstimate<T>,
    pub perturbed: ExponentEstimate<T>,
    pub difference: T,
    /// Both cocycles are 2×2, the dimension where continuity is a theorem;
    /// other dimensions are empirical.
    pub within_theorem_scope: bool,
}

/// Estimates both exponents from the same random streams.
#[allow(clippy::too_many_arguments)]
pub fn continuity_probe<T: Scalar>(
    potential: &Potential<T>,
    perturbed: &Potential<T>,
    sft: &SftSpec,
    bp: &BernoulliSpec<T>,
    bp_perturbed: &BernoulliSpec<T>,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<ContinuityProbe<T>, Error> {
    if bp.k() != bp_perturbed.k() {
        return Err(invalid("paired probe needs equal alphabet sizes"));
    }
    let base = furstenberg_estimate(potential, sft, bp, n, samples, seed)?;
    let other = furstenberg_estimate(perturbed, sft, bp_perturbed, n, samples, seed)?;
    let dims = [potential, perturbed].map(|p| p.matrices().map(MatrixSet::dim));
    Ok(ContinuityProbe {
        difference: (base.mean - other.mean).abs(),
        base,
        perturbed: other,
        within_theorem_scope: dims.iter().all(|d| *d == Some(2)),
    })
}

/// Adds `delta · u` to every entry, `u` uniform in `[−1, 1]` from `seed`;
/// the entrywise max-norm distance is at most `delta`.
pub fn perturb_entries<T: Scalar>(ms: &MatrixSet<T>, delta: T, seed: u64) -> Result<MatrixSet<T>, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mats = ms
        .matrices()
        .iter()
        .map(|m| {
            let data = m
                .as_slice()
                .iter()
                .map(|&x| x + delta * T::lit(rng.gen_range(-1.0..=1.0)))
                .collect();
            Matrix::from_row_major(m.dim(), data)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MatrixSet::new(mats)?)
}

/// One rung of a perturbation ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderRow<T> {
    pub delta: T,
    pub chi: T,
    pub chi_prime: T,
    pub gap: T,
    /// Larger of the two half-widths.
    pub half_width: T,
}

/// Continuity probe against entrywise perturbations of size `delta` for
/// each rung; the same perturbation direction is used on every rung.
pub fn continuity_ladder<T: Scalar>(
    ms: &MatrixSet<T>,
    sft: &SftSpec,
    bp: &BernoulliSpec<T>,
    deltas: &[T],
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<LadderRow<T>>, Error> {
    let base = Potential::MatrixNorm(ms.clone());
    deltas
        .iter()
        .map(|&delta| {
            let perturbed = Potential::MatrixNorm(perturb_entries(ms, delta, seed ^ 0x5EED)?);
            let probe = continuity_probe(&base, &perturbed, sft, bp, bp, n, samples, seed)?;
            Ok(LadderRow {
                delta,
                chi: probe.base.mean,
                chi_prime: probe.perturbed.mean,
                gap: probe.difference,
                half_width: probe.base.half_width.max(probe.perturbed.half_width),
            })
        })
        .collect()
}
