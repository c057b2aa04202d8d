//! Brackets for the pressure `P(tΦ)` and its slope at infinity.
//!
//! With `Z_n(t) = Σ_{|w|=n} exp(t·s(w))` over admissible words, the level-`n`
//! upper value is `(1/n) log Z_n(t)`. On the full shift every concatenation
//! is admissible, so `log Z_n` is subadditive and each level is an upper
//! bound for `P(tΦ)`. On a proper SFT the same quantity is reported as an
//! estimate ([`PressureCurve::upper_certified`] is `false`).
//!
//! The lower value comes from periodic-orbit measures: they have zero
//! entropy, so `t · (1/p) log ρ(A_w)` bounds the pressure from below for any
//! cyclically admissible `w` of period `p`.

use crate::cocycle::Potential;
use crate::error::{invalid, Error};
use crate::periodic::beta_lower_periodic;
use crate::scalar::Scalar;
use crate::scan;
use crate::symbolic::{PeriodicOrbit, SftSpec};

/// Pressure bounds at one `(n, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureBracket<T> {
    pub n: usize,
    pub t: T,
    pub upper: T,
    /// `−∞` when the shift has no cycle of length `≤ n`.
    pub lower: T,
    pub witness: Option<PeriodicOrbit>,
}

/// Best bounds at one `t`, with the levels that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint<T> {
    pub t: T,
    pub upper: T,
    pub upper_level: usize,
    pub lower: T,
    pub lower_level: usize,
    pub witness: Option<PeriodicOrbit>,
}

/// Pressure brackets over a `t` grid and a set of levels.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureCurve<T> {
    pub t_grid: Vec<T>,
    pub levels: Vec<usize>,
    /// One row per `(t, n)`, `t`-major.
    pub rows: Vec<PressureBracket<T>>,
    pub best: Vec<CurvePoint<T>>,
    /// `true` on the full shift, where every level upper value is certified.
    pub upper_certified: bool,
}

impl<T: Scalar> PressureCurve<T> {
    /// Upper values at one level, in grid order.
    pub fn upper_at_level(&self, n: usize) -> Vec<T> {
        self.rows.iter().filter(|r| r.n == n).map(|r| r.upper).collect()
    }

    pub fn best_upper(&self) -> Vec<T> {
        self.best.iter().map(|p| p.upper).collect()
    }
}

fn check_t<T: Scalar>(t: T) -> Result<(), Error> {
    if !(t >= T::zero()) || !t.is_finite() {
        return Err(invalid(format!("inverse temperature must be finite and ≥ 0, got {t}")));
    }
    Ok(())
}

fn check_n(n: usize) -> Result<(), Error> {
    if n == 0 {
        return Err(invalid("level n must be ≥ 1"));
    }
    Ok(())
}

/// `(1/n) log Σ_{|w|=n} exp(t·s(w))` by streaming two-pass log-sum-exp.
pub fn pressure_upper<T: Scalar>(n: usize, t: T, sft: &SftSpec, potential: &Potential<T>) -> Result<T, Error> {
    Ok(pressure_upper_grid(n, &[t], sft, potential)?[0])
}

/// [`pressure_upper`] at every `t` of a grid, sharing one sweep.
pub fn pressure_upper_grid<T: Scalar>(
    n: usize,
    ts: &[T],
    sft: &SftSpec,
    potential: &Potential<T>,
) -> Result<Vec<T>, Error> {
    check_n(n)?;
    ts.iter().try_for_each(|&t| check_t(t))?;
    potential.check_level(sft, n)?;
    let inv_n = T::from_count(n).recip();
    Ok(scan::log_partition(sft, n, ts, potential).into_iter().map(|lz| lz * inv_n).collect())
}

/// `t · max_{|w| ≤ n} (1/|w|) log ρ(A_w)` over cyclically admissible words,
/// with the witness orbit.
pub fn pressure_lower_periodic<T: Scalar>(
    n: usize,
    t: T,
    sft: &SftSpec,
    potential: &Potential<T>,
) -> Result<(T, PeriodicOrbit), Error> {
    check_t(t)?;
    let (beta, witness) = beta_lower_periodic(n, sft, potential)?;
    Ok((t * beta, witness))
}

/// Upper and lower bounds at every `(t, n)`, plus the best of each per `t`.
pub fn pressure_curve<T: Scalar>(
    levels: &[usize],
    t_grid: &[T],
    sft: &SftSpec,
    potential: &Potential<T>,
) -> Result<PressureCurve<T>, Error> {
    if levels.is_empty() || t_grid.is_empty() {
        return Err(invalid("pressure curve needs at least one level and one t"));
    }
    if t_grid.windows(2).any(|p| !(p[0] < p[1])) {
        return Err(invalid("t grid must be strictly increasing"));
    }
    let per_level = levels
        .iter()
        .map(|&n| {
            let uppers = pressure_upper_grid(n, t_grid, sft, potential)?;
            // a level shorter than every cycle has no periodic bound
            let periodic = match beta_lower_periodic(n, sft, potential) {
                Ok((beta, orbit)) => Some((beta, orbit)),
                Err(_) if sft.shortest_cycle().is_some_and(|c| c > n) => None,
                Err(e) => return Err(e),
            };
            Ok((n, uppers, periodic))
        })
        .collect::<Result<Vec<_>, Error>>()?;

    let mut rows = Vec::with_capacity(levels.len() * t_grid.len());
    let mut best = Vec::with_capacity(t_grid.len());
    for (i, &t) in t_grid.iter().enumerate() {
        let mut point: Option<CurvePoint<T>> = None;
        for (n, uppers, periodic) in &per_level {
            let upper = uppers[i];
            let (lower, witness) = match periodic {
                Some((beta, orbit)) => (t * *beta, Some(orbit.clone())),
                None => (T::neg_infinity(), None),
            };
            rows.push(PressureBracket { n: *n, t, upper, lower, witness: witness.clone() });
            let p = point.get_or_insert_with(|| CurvePoint {
                t,
                upper,
                upper_level: *n,
                lower,
                lower_level: *n,
                witness: witness.clone(),
            });
            if upper < p.upper {
                p.upper = upper;
                p.upper_level = *n;
            }
            if lower > p.lower {
                p.lower = lower;
                p.lower_level = *n;
                p.witness = witness.clone();
            }
        }
        best.extend(point);
    }
    Ok(PressureCurve {
        t_grid: t_grid.to_vec(),
        levels: levels.to_vec(),
        rows,
        best,
        upper_certified: sft.is_full(),
    })
}

/// Experimental: `(1/n) log Σ ρ(A_w)^t` over cyclically admissible words of
/// length `n`.
///
/// For irreducible cocycles this sum is known to bound the pressure from
/// below, but that result is outside what this crate certifies; callers must
/// label it as an estimate.
pub fn pressure_spectral_sum<T: Scalar>(n: usize, t: T, sft: &SftSpec, potential: &Potential<T>) -> Result<T, Error> {
    check_n(n)?;
    check_t(t)?;
    potential.check_level(sft, 1)?;
    if let Potential::TableWeights(_) = potential {
        return Err(invalid("spectral sums need matrix or additive potentials"));
    }
    let chunks = scan::map_chunks(sft, n, |mut cursor| {
        let mut out = Vec::new();
        while cursor.advance().is_some() {
            let w = cursor.word();
            if sft.is_cyclically_admissible(w) {
                out.push(potential.periodic_exponent(w).map(|e| t * e * T::from_count(n)));
            }
        }
        out
    });
    let exponents = chunks.into_iter().flatten().collect::<Result<Vec<T>, _>>()?;
    let top = exponents.iter().copied().fold(T::neg_infinity(), T::max);
    if top == T::neg_infinity() {
        return Err(invalid(format!("no cyclically admissible words of length {n}")));
    }
    let shifted: Vec<T> = exponents.iter().map(|&e| (e - top).exp()).collect();
    Ok((top + crate::scalar::pairwise_sum(&shifted).ln()) / T::from_count(n))
}

/// Two estimates of `P′(∞) = β(Φ)` from the end of a curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeAtInfinity<T> {
    pub t_max: T,
    /// `upper(t_max) / t_max`.
    pub ratio: T,
    /// Finite-difference slope of the best upper curve on the last segment.
    pub segment_slope: T,
}

pub const SLOPE_MIN_T: f64 = 100.0;

pub fn slope_at_infinity<T: Scalar>(curve: &PressureCurve<T>) -> Result<SlopeAtInfinity<T>, Error> {
    let last = curve.best.last().ok_or_else(|| invalid("empty curve"))?;
    if last.t < T::lit(SLOPE_MIN_T) {
        return Err(Error::GridTooShort { t_max: last.t.as_f64() });
    }
    if curve.best.len() < 2 {
        return Err(invalid("slope needs at least two grid points"));
    }
    let prev = &curve.best[curve.best.len() - 2];
    Ok(SlopeAtInfinity {
        t_max: last.t,
        ratio: last.upper / last.t,
        segment_slope: (last.upper - prev.upper) / (last.t - prev.t),
    })
}

/// Largest `−(P(t+h) − 2P(t) + P(t−h))` over interior points of a uniform
/// grid; convex curves give values `≤ 0` up to rounding.
pub fn convexity_report<T: Scalar>(ts: &[T], values: &[T]) -> Result<T, Error> {
    if ts.len() != values.len() {
        return Err(invalid("grid and values differ in length"));
    }
    if ts.len() < 3 {
        return Err(invalid("convexity needs at least three grid points"));
    }
    let h = ts[1] - ts[0];
    let tol = T::tol(1e-9, 64.0) * h.abs().max(ts[ts.len() - 1].abs());
    if !(h > T::zero()) || ts.windows(2).any(|p| ((p[1] - p[0]) - h).abs() > tol) {
        return Err(Error::NonUniformGrid);
    }
    Ok(values
        .windows(3)
        .map(|v| -(v[2] - v[1] - v[1] + v[0]))
        .fold(T::neg_infinity(), T::max))
}

/// `{0} ∪ {0.25 · 2^j : j = 0..=10}`, i.e. `0, 0.25, 0.5, …, 256`.
pub fn default_t_grid<T: Scalar>() -> Vec<T> {
    std::iter::once(T::zero())
        .chain((0..=10).map(|j| T::lit(0.25 * f64::powi(2.0, j))))
        .collect()
}

/// `points` equally spaced values from `min` to `max` inclusive.
pub fn uniform_grid<T: Scalar>(min: T, max: T, points: usize) -> Vec<T> {
    match points {
        0 => Vec::new(),
        1 => vec![min],
        _ => {
            let h = (max - min) / T::from_count(points - 1);
            (0..points).map(|i| min + h * T::from_count(i)).collect()
        }
    }
}

/// `points` geometrically spaced values from `min > 0` to `max` inclusive.
pub fn geometric_grid<T: Scalar>(min: T, max: T, points: usize) -> Vec<T> {
    match points {
        0 => Vec::new(),
        1 => vec![min],
        _ => {
            let ratio = (max / min).ln() / T::from_count(points - 1);
            (0..points).map(|i| min * (ratio * T::from_count(i)).exp()).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::{Matrix, MatrixSet};

    fn shear() -> Potential<f64> {
        Potential::MatrixNorm(
            MatrixSet::from_nested(&[
                vec![vec![1.0, 1.0], vec![0.0, 1.0]],
                vec![vec![1.0, 0.0], vec![1.0, 1.0]],
            ])
            .unwrap(),
        )
    }

    fn diag_pair() -> Potential<f64> {
        Potential::MatrixNorm(
            MatrixSet::new(vec![Matrix::diagonal(&[2.0, 1.0]), Matrix::diagonal(&[1.0, 3.0])]).unwrap(),
        )
    }

    const PHI_LN: f64 = 0.481_211_825_059_603_4;

    #[test]
    fn identity_set_gives_log_k() {
        let sft = SftSpec::full(3).unwrap();
        let pot = Potential::MatrixNorm(MatrixSet::new(vec![Matrix::identity(2); 3]).unwrap());
        for n in 1..5 {
            for t in [0.0, 1.0, 7.5] {
                assert!((pressure_upper(n, t, &sft, &pot).unwrap() - 3f64.ln()).abs() < 1e-12);
            }
        }
        let (lower, _) = pressure_lower_periodic(3, 2.0, &sft, &pot).unwrap();
        assert!(lower.abs() < 1e-12);
    }

    #[test]
    fn additive_oracle_is_exact() {
        let sft = SftSpec::full(2).unwrap();
        let pot = Potential::Additive(vec![2f64.ln(), 3f64.ln()]);
        for n in 1..=6 {
            assert!((pressure_upper(n, 1.0, &sft, &pot).unwrap() - 5f64.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn single_matrix_pressure_is_linear() {
        let sft = SftSpec::full(1).unwrap();
        let pot = Potential::MatrixNorm(MatrixSet::new(vec![Matrix::diagonal(&[2.0, 1.0])]).unwrap());
        assert!((pressure_upper(5, 3.0, &sft, &pot).unwrap() - 3.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn periodic_lower_examples() {
        let sft = SftSpec::full(2).unwrap();
        let (v, w) = pressure_lower_periodic(2, 1.0, &sft, &shear()).unwrap();
        assert!((v - PHI_LN).abs() < 1e-12);
        assert_eq!(w.to_string(), "01");
        let (v, w) = pressure_lower_periodic(1, 2.0, &sft, &diag_pair()).unwrap();
        assert!((v - 2.0 * 3f64.ln()).abs() < 1e-12);
        assert_eq!(w.to_string(), "1");
    }

    #[test]
    fn spectral_sum_matches_trace_formula() {
        // diagonal cocycles: ρ(A_w) = max of the diagonal products
        let sft = SftSpec::full(2).unwrap();
        let diag = diag_pair();
        let v = pressure_spectral_sum(2, 1.0, &sft, &diag).unwrap();
        let expected = (4.0f64 + 3.0 + 3.0 + 9.0).ln() / 2.0;
        assert!((v - expected).abs() < 1e-9);
        assert!(v <= pressure_upper(2, 1.0, &sft, &diag).unwrap() + 1e-12);
    }

    #[test]
    fn slope_examples() {
        let sft = SftSpec::full(2).unwrap();
        let grid = [0.0, 50.0, 100.0, 200.0];
        let curve = pressure_curve(&[2], &grid, &sft, &shear()).unwrap();
        let slope = slope_at_infinity(&curve).unwrap();
        assert!((slope.ratio - PHI_LN).abs() <= 2f64.ln() / 200.0);
        assert!((slope.segment_slope - PHI_LN).abs() <= 2f64.ln() / 200.0, "{slope:?}");

        let single = Potential::MatrixNorm(MatrixSet::new(vec![Matrix::diagonal(&[2.0, 1.0])]).unwrap());
        let curve = pressure_curve(&[3], &grid, &SftSpec::full(1).unwrap(), &single).unwrap();
        let slope = slope_at_infinity(&curve).unwrap();
        assert!((slope.ratio - 2f64.ln()).abs() < 1e-12);
        assert!((slope.segment_slope - 2f64.ln()).abs() < 1e-12);

        let id = Potential::MatrixNorm(MatrixSet::new(vec![Matrix::identity(2); 2]).unwrap());
        let curve = pressure_curve(&[2], &grid, &sft, &id).unwrap();
        assert!(slope_at_infinity(&curve).unwrap().segment_slope.abs() < 1e-12);

        let short = pressure_curve(&[2], &[0.0, 10.0], &sft, &id).unwrap();
        assert!(matches!(slope_at_infinity(&short), Err(Error::GridTooShort { .. })));
    }

    #[test]
    fn levels_below_the_shortest_cycle_have_no_lower_bound() {
        let swap = SftSpec::new(&[vec![0, 1], vec![1, 0]]).unwrap();
        let curve = pressure_curve(&[1, 2], &[0.0, 1.0], &swap, &diag_pair()).unwrap();
        let level1: Vec<_> = curve.rows.iter().filter(|r| r.n == 1).collect();
        assert!(level1.iter().all(|r| r.lower == f64::NEG_INFINITY && r.witness.is_none()));
        let best = &curve.best[1];
        assert!((best.lower - 0.5 * 3f64.ln()).abs() < 1e-12);
        assert_eq!(best.lower_level, 2);
        assert_eq!(best.witness.as_ref().unwrap().word().to_string(), "01");
    }

    #[test]
    fn convexity_examples() {
        let ts = uniform_grid(0.0, 10.0, 101);
        let oracle: Vec<f64> = ts.iter().map(|&t: &f64| (2f64.powf(t) + 3f64.powf(t)).ln()).collect();
        assert!(convexity_report(&ts, &oracle).unwrap() <= 1e-9);
        let affine: Vec<f64> = ts.iter().map(|t| t * 2f64.ln()).collect();
        assert!(convexity_report(&ts, &affine).unwrap().abs() < 1e-13);
        let curve = pressure_upper_grid(4, &ts, &SftSpec::full(2).unwrap(), &shear()).unwrap();
        assert!(convexity_report(&ts, &curve).unwrap() <= 1e-9);
        let concave: Vec<f64> = ts.iter().map(|t| -t * t).collect();
        assert!(convexity_report(&ts, &concave).unwrap() > 0.0);
        assert_eq!(convexity_report(&[0.0, 1.0, 3.0], &[0.0; 3]), Err(Error::NonUniformGrid));
    }

    #[test]
    fn curve_contains_topological_entropy_at_zero() {
        let sft = SftSpec::golden_mean();
        let curve = pressure_curve(&[4, 8, 12], &[0.0, 1.0], &sft, &shear()).unwrap();
        assert!(!curve.upper_certified);
        let h = crate::symbolic::topological_entropy(&sft);
        assert!(curve.best[0].lower <= h + 1e-12 && h <= curve.best[0].upper + 1e-12);
    }

    #[test]
    fn rejects_bad_arguments() {
        let sft = SftSpec::full(2).unwrap();
        assert!(pressure_upper(0, 1.0, &sft, &shear()).is_err());
        assert!(pressure_upper(2, -1.0, &sft, &shear()).is_err());
        let three = Potential::Additive(vec![0.0; 3]);
        assert!(matches!(pressure_upper(2, 1.0, &sft, &three), Err(Error::Cocycle(_))));
    }

    #[test]
    fn default_grid_spans_zero_to_256() {
        let g: Vec<f64> = default_t_grid();
        assert_eq!(g.len(), 12);
        assert_eq!((g[0], g[1], g[11]), (0.0, 0.25, 256.0));
    }
}
