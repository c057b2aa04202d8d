//! Locally constant matrix cocycles and submultiplicative potentials.
//!
//! For a word `w = w₀w₁…w_{n-1}` the cocycle product is
//! `A_w = A_{w_{n-1}} ⋯ A_{w_1} A_{w_0}`: the leftmost factor belongs to the
//! last symbol. Exponents are invariant under the reversed convention; only
//! witness words change.
//!
//! Products are carried as [`ScaledMatrix`] values (`exp(log_scale) · body`)
//! so words of length 10⁴ and more never overflow.

use std::collections::HashMap;

use thiserror::Error;

use crate::scalar::Scalar;
use crate::symbolic::{SftSpec, Symbol, Word};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CocycleError {
    #[error("matrix set is empty")]
    Empty,
    #[error("matrix data has {len} entries, expected {d}×{d}")]
    NotSquare { d: usize, len: usize },
    #[error("matrix {index} has dimension {got}, expected {expected}")]
    DimensionMismatch { index: usize, expected: usize, got: usize },
    #[error("matrix {index} is singular or nearly so (|det| = {det:e})")]
    Singular { index: usize, det: f64 },
    #[error("matrix {index} has a non-finite entry")]
    NonFinite { index: usize },
    #[error("potential has {potential} symbols but the shift has {sft}")]
    AlphabetMismatch { potential: usize, sft: usize },
    #[error("weight table is defined at level {table}, requested level {requested}")]
    LevelMismatch { table: usize, requested: usize },
    #[error("weight table has no entry for admissible word {0}")]
    MissingWord(String),
    #[error("weight for word {0} must be positive and finite")]
    BadWeight(String),
    #[error("operation needs a matrix potential")]
    NotMatrixPotential,
    #[error("Gelfand iteration stalled: last estimate {estimate}, step gap {gap:e}")]
    NonConvergence { estimate: f64, gap: f64 },
}

impl CocycleError {
    /// Best available estimate carried by [`CocycleError::NonConvergence`].
    pub fn last_estimate(&self) -> f64 {
        match self {
            CocycleError::NonConvergence { estimate, .. } => *estimate,
            _ => f64::NAN,
        }
    }
}

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    d: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn identity(d: usize) -> Self {
        let mut data = vec![T::zero(); d * d];
        for i in 0..d {
            data[i * d + i] = T::one();
        }
        Self { d, data }
    }

    pub fn from_row_major(d: usize, data: Vec<T>) -> Result<Self, CocycleError> {
        if data.len() != d * d || d == 0 {
            return Err(CocycleError::NotSquare { d, len: data.len() });
        }
        Ok(Self { d, data })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self, CocycleError> {
        let d = rows.len();
        let data: Vec<T> = rows.iter().flatten().copied().collect();
        if rows.iter().any(|r| r.len() != d) {
            return Err(CocycleError::NotSquare { d, len: data.len() });
        }
        Self::from_row_major(d, data)
    }

    pub fn diagonal(entries: &[T]) -> Self {
        let d = entries.len();
        let mut m = Self { d, data: vec![T::zero(); d * d] };
        for (i, &x) in entries.iter().enumerate() {
            m.data[i * d + i] = x;
        }
        m
    }

    /// Rotation by `theta` in the plane.
    pub fn rotation(theta: T) -> Self {
        let (s, c) = theta.sin_cos();
        Self { d: 2, data: vec![c, -s, s, c] }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.d + j]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.data.chunks(self.d).map(|r| r.to_vec()).collect()
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { d: self.d, data: self.data.iter().map(|&x| f(x)).collect() }
    }

    pub fn scale(&self, c: T) -> Self {
        self.map(|x| x * c)
    }

    pub fn transpose(&self) -> Self {
        let d = self.d;
        let mut out = vec![T::zero(); d * d];
        for i in 0..d {
            for j in 0..d {
                out[j * d + i] = self.data[i * d + j];
            }
        }
        Self { d, data: out }
    }

    /// `self · rhs`.
    pub fn mul(&self, rhs: &Self) -> Self {
        let d = self.d;
        debug_assert_eq!(d, rhs.d);
        let mut out = vec![T::zero(); d * d];
        for i in 0..d {
            for l in 0..d {
                let a = self.data[i * d + l];
                if a == T::zero() {
                    continue;
                }
                let row = &rhs.data[l * d..(l + 1) * d];
                for (o, &b) in out[i * d..(i + 1) * d].iter_mut().zip(row) {
                    *o = *o + a * b;
                }
            }
        }
        Self { d, data: out }
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|&x| x * x).sum::<T>().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// LU with partial pivoting.
    pub fn determinant(&self) -> T {
        let d = self.d;
        let mut a = self.data.clone();
        let mut det = T::one();
        for col in 0..d {
            let pivot = (col..d)
                .max_by(|&i, &j| a[i * d + col].abs().partial_cmp(&a[j * d + col].abs()).unwrap())
                .unwrap();
            if a[pivot * d + col] == T::zero() {
                return T::zero();
            }
            if pivot != col {
                for j in 0..d {
                    a.swap(pivot * d + j, col * d + j);
                }
                det = -det;
            }
            let p = a[col * d + col];
            det = det * p;
            for i in col + 1..d {
                let f = a[i * d + col] / p;
                for j in col..d {
                    a[i * d + j] = a[i * d + j] - f * a[col * d + j];
                }
            }
        }
        det
    }

    /// Operator 2-norm: the largest singular value.
    pub fn spectral_norm(&self) -> T {
        match self.d {
            1 => self.data[0].abs(),
            2 => {
                // σ_max = (|z₁| + |z₂|) / 2 for z₁ = (a+d) + i(c−b), z₂ = (a−d) + i(b+c)
                let (a, b, c, d) = (self.data[0], self.data[1], self.data[2], self.data[3]);
                let half = T::lit(0.5);
                ((a + d).hypot(c - b) + (a - d).hypot(b + c)) * half
            }
            _ => self.spectral_norm_jacobi(),
        }
    }

    /// Largest singular value via cyclic Jacobi on `AᵀA`.
    pub fn spectral_norm_jacobi(&self) -> T {
        let gram = self.transpose().mul(self);
        symmetric_max_eigenvalue(gram).max(T::zero()).sqrt()
    }
}

/// Largest eigenvalue of a symmetric matrix by cyclic Jacobi sweeps.
fn symmetric_max_eigenvalue<T: Scalar>(mut a: Matrix<T>) -> T {
    let d = a.d;
    let norm = a.frobenius_norm();
    if norm == T::zero() {
        return T::zero();
    }
    for _sweep in 0..64 {
        let off: T = (0..d)
            .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a.get(i, j) * a.get(i, j))
            .sum::<T>()
            .sqrt();
        if off <= T::epsilon() * norm {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let apq = a.get(p, q);
                if apq == T::zero() {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..d {
                    let akp = a.data[k * d + p];
                    let akq = a.data[k * d + q];
                    a.data[k * d + p] = c * akp - s * akq;
                    a.data[k * d + q] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = a.data[p * d + k];
                    let aqk = a.data[q * d + k];
                    a.data[p * d + k] = c * apk - s * aqk;
                    a.data[q * d + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..d).map(|i| a.get(i, i)).fold(T::neg_infinity(), T::max)
}

/// `exp(log_scale) · body` with `‖body‖₂ ∈ [1/2, 2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledMatrix<T> {
    pub log_scale: T,
    pub body: Matrix<T>,
}

impl<T: Scalar> ScaledMatrix<T> {
    pub fn identity(d: usize) -> Self {
        Self { log_scale: T::zero(), body: Matrix::identity(d) }
    }

    pub fn from_matrix(m: &Matrix<T>) -> Self {
        let mut out = Self { log_scale: T::zero(), body: m.clone() };
        out.renormalize();
        out
    }

    pub fn dim(&self) -> usize {
        self.body.dim()
    }

    /// Rescales the body when a cheap Frobenius test cannot place its
    /// operator norm inside `[1/2, 2]`.
    pub fn renormalize(&mut self) {
        let f = self.body.frobenius_norm();
        let root_d = T::from_count(self.body.dim()).sqrt();
        let half = T::lit(0.5);
        let two = T::lit(2.0);
        if f <= two && f / root_d >= half {
            return;
        }
        let s = self.body.spectral_norm();
        if s > T::zero() && s.is_finite() {
            self.body = self.body.scale(s.recip());
            self.log_scale = self.log_scale + s.ln();
        }
    }

    /// `a · self`: appends one more factor on the left.
    pub fn left_mul(&self, a: &Matrix<T>) -> Self {
        let mut out = Self { log_scale: self.log_scale, body: a.mul(&self.body) };
        out.renormalize();
        out
    }

    /// `self · rhs`.
    pub fn mul(&self, rhs: &Self) -> Self {
        let mut out = Self {
            log_scale: self.log_scale + rhs.log_scale,
            body: self.body.mul(&rhs.body),
        };
        out.renormalize();
        out
    }

    pub fn squared(&self) -> Self {
        self.mul(self)
    }

    /// `log ‖exp(log_scale) · body‖₂`.
    pub fn log_norm(&self) -> T {
        self.log_scale + self.body.spectral_norm().ln()
    }

    /// Materializes the product; overflows for large `log_scale`.
    pub fn to_matrix(&self) -> Matrix<T> {
        self.body.scale(self.log_scale.exp())
    }
}

/// Generators `A₀ … A_{k-1}` of a locally constant cocycle, all in `GL(d, ℝ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSet<T> {
    d: usize,
    mats: Vec<Matrix<T>>,
}

impl<T: Scalar> MatrixSet<T> {
    /// Rejects empty sets, mixed dimensions, non-finite entries and matrices
    /// with `|det| ≤ 1e-12 · ‖A‖₂^d`.
    pub fn new(mats: Vec<Matrix<T>>) -> Result<Self, CocycleError> {
        let d = mats.first().ok_or(CocycleError::Empty)?.dim();
        for (index, m) in mats.iter().enumerate() {
            if m.dim() != d {
                return Err(CocycleError::DimensionMismatch { index, expected: d, got: m.dim() });
            }
            if !m.is_finite() {
                return Err(CocycleError::NonFinite { index });
            }
            let det = m.determinant();
            let scale = m.spectral_norm().powi(d as i32);
            if !(det.abs() > T::lit(1e-12) * scale) {
                return Err(CocycleError::Singular { index, det: det.as_f64() });
            }
        }
        Ok(Self { d, mats })
    }

    pub fn from_nested(mats: &[Vec<Vec<T>>]) -> Result<Self, CocycleError> {
        let mats = mats.iter().map(|rows| Matrix::from_rows(rows)).collect::<Result<Vec<_>, _>>()?;
        Self::new(mats)
    }

    pub fn k(&self) -> usize {
        self.mats.len()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn matrices(&self) -> &[Matrix<T>] {
        &self.mats
    }

    pub fn matrix(&self, symbol: Symbol) -> &Matrix<T> {
        &self.mats[symbol]
    }

    /// Every generator multiplied by `c`.
    pub fn scaled(&self, c: T) -> Self {
        Self { d: self.d, mats: self.mats.iter().map(|m| m.scale(c)).collect() }
    }

    pub fn to_nested(&self) -> Vec<Vec<Vec<T>>> {
        self.mats.iter().map(Matrix::rows).collect()
    }
}

/// Positive weights for every admissible word of one fixed level.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable<T> {
    level: usize,
    log_weights: HashMap<Vec<Symbol>, T>,
}

impl<T: Scalar> WeightTable<T> {
    pub fn new(level: usize, entries: impl IntoIterator<Item = (Word, T)>) -> Result<Self, CocycleError> {
        let mut log_weights = HashMap::new();
        for (word, weight) in entries {
            if word.len() != level {
                return Err(CocycleError::LevelMismatch { table: level, requested: word.len() });
            }
            if !(weight > T::zero() && weight.is_finite()) {
                return Err(CocycleError::BadWeight(word.to_string()));
            }
            log_weights.insert(word.into_symbols(), weight.ln());
        }
        Ok(Self { level, log_weights })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn log_weight(&self, symbols: &[Symbol]) -> Option<T> {
        self.log_weights.get(symbols).copied()
    }
}

/// A subadditive potential `s(w) = log φ_{|w|}` on cylinders.
#[derive(Debug, Clone, PartialEq)]
pub enum Potential<T> {
    /// `s(w) = log ‖A_w‖₂`.
    MatrixNorm(MatrixSet<T>),
    /// `s(w) = Σ f(wᵢ)`; additive, so submultiplicative with equality.
    Additive(Vec<T>),
    /// `s(w) = log weight(w)` at one fixed level.
    TableWeights(WeightTable<T>),
}

impl<T: Scalar> Potential<T> {
    pub fn matrices(&self) -> Option<&MatrixSet<T>> {
        match self {
            Potential::MatrixNorm(ms) => Some(ms),
            _ => None,
        }
    }

    /// Checks that the potential can be evaluated on every admissible word
    /// of length `level`.
    pub fn check_level(&self, sft: &SftSpec, level: usize) -> Result<(), CocycleError> {
        match self {
            Potential::MatrixNorm(ms) => check_alphabet(ms.k(), sft),
            Potential::Additive(f) => check_alphabet(f.len(), sft),
            Potential::TableWeights(table) => {
                if table.level != level {
                    return Err(CocycleError::LevelMismatch { table: table.level, requested: level });
                }
                crate::symbolic::enumerate_words(level, sft)
                    .find(|w| table.log_weight(w.symbols()).is_none())
                    .map_or(Ok(()), |w| Err(CocycleError::MissingWord(w.to_string())))
            }
        }
    }

    /// `s(w)`. Panics on table words that are missing; validate with
    /// [`Potential::check_level`] first.
    pub fn log_norm(&self, symbols: &[Symbol]) -> T {
        match self {
            Potential::MatrixNorm(ms) => product(symbols, ms).log_norm(),
            Potential::Additive(f) => symbols.iter().map(|&s| f[s]).sum(),
            Potential::TableWeights(table) => table
                .log_weight(symbols)
                .expect("word present in a validated weight table"),
        }
    }

    /// Per-symbol exponent of the periodic orbit through `symbols`:
    /// `(1/n) log ρ(A_w)` for matrices, the mean of `f` for additive weights.
    pub fn periodic_exponent(&self, symbols: &[Symbol]) -> Result<T, CocycleError> {
        let n = T::from_count(symbols.len());
        match self {
            Potential::MatrixNorm(ms) => Ok(log_spectral_radius(&product(symbols, ms))? / n),
            Potential::Additive(f) => Ok(symbols.iter().map(|&s| f[s]).sum::<T>() / n),
            Potential::TableWeights(_) => Err(CocycleError::NotMatrixPotential),
        }
    }
}

fn check_alphabet(potential: usize, sft: &SftSpec) -> Result<(), CocycleError> {
    if potential != sft.k() {
        return Err(CocycleError::AlphabetMismatch { potential, sft: sft.k() });
    }
    Ok(())
}

/// Incremental evaluation of `s` along a word that changes only in its tail.
#[derive(Debug, Clone)]
pub struct PrefixEvaluator<'p, T: Scalar> {
    potential: &'p Potential<T>,
    word: Vec<Symbol>,
    // products[i] / sums[i] cover word[..=i]
    products: Vec<ScaledMatrix<T>>,
    sums: Vec<T>,
}

impl<'p, T: Scalar> PrefixEvaluator<'p, T> {
    pub fn new(potential: &'p Potential<T>) -> Self {
        Self { potential, word: Vec::new(), products: Vec::new(), sums: Vec::new() }
    }

    pub fn truncate(&mut self, len: usize) {
        self.word.truncate(len);
        self.products.truncate(len);
        self.sums.truncate(len);
    }

    pub fn push(&mut self, symbol: Symbol) {
        match self.potential {
            Potential::MatrixNorm(ms) => {
                let next = match self.products.last() {
                    Some(p) => p.left_mul(ms.matrix(symbol)),
                    None => ScaledMatrix::from_matrix(ms.matrix(symbol)),
                };
                self.products.push(next);
            }
            Potential::Additive(f) => {
                let prev = self.sums.last().copied().unwrap_or_else(T::zero);
                self.sums.push(prev + f[symbol]);
            }
            Potential::TableWeights(_) => {}
        }
        self.word.push(symbol);
    }

    /// Brings the evaluator to `word`, reusing the first `from` symbols.
    pub fn sync(&mut self, word: &[Symbol], from: usize) {
        let keep = from.min(self.word.len());
        self.truncate(keep);
        for &s in &word[keep..] {
            self.push(s);
        }
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    pub fn word(&self) -> &[Symbol] {
        &self.word
    }

    /// `s(current word)`.
    pub fn value(&self) -> T {
        match self.potential {
            Potential::MatrixNorm(_) => self.products.last().map_or(T::zero(), ScaledMatrix::log_norm),
            Potential::Additive(_) => self.sums.last().copied().unwrap_or_else(T::zero),
            Potential::TableWeights(table) => table
                .log_weight(&self.word)
                .expect("word present in a validated weight table"),
        }
    }

    /// Cocycle product of the current word, for matrix potentials.
    pub fn product(&self) -> Option<&ScaledMatrix<T>> {
        self.products.last()
    }
}

/// Value of `s` along a word that only grows, in constant memory.
#[derive(Debug, Clone)]
pub struct RunningPotential<'p, T: Scalar> {
    potential: &'p Potential<T>,
    product: Option<ScaledMatrix<T>>,
    sum: T,
    len: usize,
}

impl<'p, T: Scalar> RunningPotential<'p, T> {
    /// Tables are not supported: their value depends on the whole word.
    pub fn new(potential: &'p Potential<T>) -> Self {
        Self { potential, product: None, sum: T::zero(), len: 0 }
    }

    pub fn push(&mut self, symbol: Symbol) {
        match self.potential {
            Potential::MatrixNorm(ms) => {
                self.product = Some(match self.product.take() {
                    Some(p) => p.left_mul(ms.matrix(symbol)),
                    None => ScaledMatrix::from_matrix(ms.matrix(symbol)),
                });
            }
            Potential::Additive(f) => self.sum = self.sum + f[symbol],
            Potential::TableWeights(_) => panic!("weight tables cannot be evaluated incrementally"),
        }
        self.len += 1;
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn value(&self) -> T {
        match &self.product {
            Some(p) => p.log_norm(),
            None => self.sum,
        }
    }
}

/// `A_w = A_{w_{n-1}} ⋯ A_{w_0}` in overflow-safe form.
pub fn product<T: Scalar>(symbols: &[Symbol], ms: &MatrixSet<T>) -> ScaledMatrix<T> {
    symbols
        .iter()
        .fold(ScaledMatrix::identity(ms.dim()), |acc, &s| acc.left_mul(ms.matrix(s)))
}

/// `log ‖A_w‖₂` (or `Σ f(wᵢ)` for additive potentials).
pub fn log_norm<T: Scalar>(w: &Word, potential: &Potential<T>) -> T {
    potential.log_norm(w.symbols())
}

const GELFAND_MAX_DOUBLINGS: usize = 40;

/// `log ρ(M)` from the Gelfand limit `log ‖M^{2^j}‖ / 2^j`, iterated until two
/// successive estimates differ by less than `1e-10`.
pub fn log_spectral_radius<T: Scalar>(m: &ScaledMatrix<T>) -> Result<T, CocycleError> {
    let step_tol = T::tol(1e-10, 64.0);
    let fail_tol = T::tol(1e-6, 1024.0);
    let mut power = m.clone();
    power.renormalize();
    let mut exponent = T::one();
    let mut prev = power.log_norm();
    let mut gap = T::infinity();
    for _ in 0..GELFAND_MAX_DOUBLINGS {
        power = power.squared();
        exponent = exponent * T::lit(2.0);
        let est = power.log_norm() / exponent;
        gap = (est - prev).abs();
        prev = est;
        if gap < step_tol {
            return Ok(est);
        }
    }
    if gap > fail_tol {
        return Err(CocycleError::NonConvergence { estimate: prev.as_f64(), gap: gap.as_f64() });
    }
    Ok(prev)
}

/// `log ρ` of a 2×2 scaled matrix from its characteristic polynomial.
pub fn log_spectral_radius_2x2<T: Scalar>(m: &ScaledMatrix<T>) -> Option<T> {
    if m.dim() != 2 {
        return None;
    }
    let b = m.body.as_slice();
    let tr = b[0] + b[3];
    let det = b[0] * b[3] - b[1] * b[2];
    let disc = tr * tr - T::lit(4.0) * det;
    let rho = if disc >= T::zero() {
        (tr.abs() + disc.sqrt()) * T::lit(0.5)
    } else {
        det.abs().sqrt()
    };
    Some(m.log_scale + rho.ln())
}

/// Gelfand iteration, falling back to the characteristic polynomial for
/// `d = 2` when the iteration stalls.
pub fn log_spectral_radius_or_fallback<T: Scalar>(m: &ScaledMatrix<T>) -> Result<T, CocycleError> {
    match log_spectral_radius(m) {
        Err(err @ CocycleError::NonConvergence { .. }) => log_spectral_radius_2x2(m).ok_or(err),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Matrix64;

    fn shear_pair() -> MatrixSet<f64> {
        MatrixSet::from_nested(&[
            vec![vec![1.0, 1.0], vec![0.0, 1.0]],
            vec![vec![1.0, 0.0], vec![1.0, 1.0]],
        ])
        .unwrap()
    }

    fn word(s: &str) -> Vec<Symbol> {
        s.parse::<Word>().unwrap().into_symbols()
    }

    const PHI_LN: f64 = 0.481_211_825_059_603_4;

    #[test]
    fn product_order_last_symbol_leftmost() {
        let p = product(&word("01"), &shear_pair()).to_matrix();
        let expected = [1.0, 1.0, 1.0, 2.0];
        for (a, b) in p.as_slice().iter().zip(expected) {
            assert!((a - b).abs() < 1e-13);
        }
        // naive unscaled product A₁·A₀
        let ms = shear_pair();
        let naive = ms.matrix(1).mul(ms.matrix(0));
        assert_eq!(naive.as_slice(), &expected);
    }

    #[test]
    fn identity_products() {
        let ms = MatrixSet::new(vec![Matrix64::identity(3); 2]).unwrap();
        let p = product(&word("0110101"), &ms);
        assert_eq!(p.log_scale, 0.0);
        assert_eq!(p.body, Matrix64::identity(3));
        assert_eq!(Potential::MatrixNorm(ms).log_norm(&word("0110")), 0.0);
    }

    #[test]
    fn long_diagonal_power_stays_finite() {
        let ms = MatrixSet::new(vec![Matrix64::diagonal(&[2.0, 1.0])]).unwrap();
        let p = product(&vec![0; 400], &ms);
        let expected = 400.0 * 2f64.ln();
        assert!((p.log_scale + p.body.spectral_norm().ln() - expected).abs() < 400.0 * 1e-13 * expected);
        assert!(p.body.get(1, 1).abs() < 1e-100);
        assert!((p.body.get(0, 0) * (p.log_scale - expected).exp() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn log_norm_examples() {
        let pot = Potential::MatrixNorm(shear_pair());
        let golden_sq = (3.0 + 5f64.sqrt()) / 2.0;
        assert!((pot.log_norm(&word("01")) - golden_sq.ln()).abs() < 1e-12);
        assert!((pot.log_norm(&word("0")) - PHI_LN).abs() < 1e-12);
        let add = Potential::Additive(vec![2f64.ln(), 3f64.ln()]);
        assert!((add.log_norm(&word("0110")) - 36f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn spectral_norm_closed_form_matches_jacobi() {
        let cases = [
            [1.0, 2.0, 3.0, 4.0],
            [0.0, 1.0, -1.0, 0.0],
            [1e-3, 5.0, 0.0, 1e-3],
            [-2.0, 0.5, 0.25, 1.5],
        ];
        for data in cases {
            let m = Matrix64::from_row_major(2, data.to_vec()).unwrap();
            assert!((m.spectral_norm() - m.spectral_norm_jacobi()).abs() < 1e-12 * m.spectral_norm());
        }
    }

    #[test]
    fn jacobi_three_by_three() {
        // singular values of diag(3, 2, 1) after an orthogonal mix stay {3, 2, 1}
        let q = Matrix64::from_row_major(3, vec![0.0, 0.6, 0.8, 1.0, 0.0, 0.0, 0.0, 0.8, -0.6]).unwrap();
        let m = q.mul(&Matrix64::diagonal(&[3.0, 2.0, 1.0])).mul(&q.transpose());
        assert!((m.spectral_norm() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn spectral_radius_examples() {
        let sym = Matrix64::from_row_major(2, vec![2.0, 1.0, 1.0, 1.0]).unwrap();
        let r = log_spectral_radius(&ScaledMatrix::from_matrix(&sym)).unwrap();
        assert!((r - 2.0 * PHI_LN).abs() < 1e-12);
        let id = ScaledMatrix::<f64>::identity(4);
        assert!(log_spectral_radius(&id).unwrap().abs() < 1e-15);
        let rot = Matrix64::from_row_major(2, vec![0.0, 1.0, -1.0, 0.0]).unwrap();
        assert!(log_spectral_radius(&ScaledMatrix::from_matrix(&rot)).unwrap().abs() < 1e-12);
    }

    #[test]
    fn spectral_radius_of_nonnormal_matches_char_poly() {
        let m = Matrix64::from_row_major(2, vec![1.0, 10.0, 0.0, 0.5]).unwrap();
        let sm = ScaledMatrix::from_matrix(&m);
        let gelfand = log_spectral_radius(&sm).unwrap();
        assert!(gelfand.abs() < 1e-9, "{gelfand}");
        assert!((log_spectral_radius_2x2(&sm).unwrap() - gelfand).abs() < 1e-9);
        let complex = Matrix64::from_row_major(2, vec![1.0, -3.0, 2.0, 0.5]).unwrap();
        let sc = ScaledMatrix::from_matrix(&complex);
        let expected = complex.determinant().sqrt().ln();
        assert!((log_spectral_radius(&sc).unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn rejects_singular_and_mismatched() {
        let singular = Matrix64::from_row_major(2, vec![1.0, 2.0, 2.0, 4.0]).unwrap();
        assert!(matches!(MatrixSet::new(vec![singular]), Err(CocycleError::Singular { index: 0, .. })));
        let mixed = vec![Matrix64::identity(2), Matrix64::identity(3)];
        assert!(matches!(MatrixSet::new(mixed), Err(CocycleError::DimensionMismatch { index: 1, .. })));
        assert_eq!(MatrixSet::<f64>::new(vec![]), Err(CocycleError::Empty));
        assert!(matches!(
            MatrixSet::<f64>::from_nested(&[vec![vec![1.0, 0.0], vec![0.0]]]),
            Err(CocycleError::NotSquare { .. })
        ));
    }

    #[test]
    fn weight_table_validation() {
        let sft = SftSpec::full(2).unwrap();
        let entries = crate::symbolic::enumerate_words(2, &sft).map(|w| (w, 2.0));
        let table = WeightTable::new(2, entries).unwrap();
        let pot = Potential::TableWeights(table);
        assert!(pot.check_level(&sft, 2).is_ok());
        assert!(matches!(pot.check_level(&sft, 3), Err(CocycleError::LevelMismatch { .. })));
        assert!((pot.log_norm(&[1, 0]) - 2f64.ln()).abs() < 1e-15);
        let partial = WeightTable::new(1, vec![("0".parse().unwrap(), 1.0)]).unwrap();
        assert!(matches!(
            Potential::TableWeights(partial).check_level(&sft, 1),
            Err(CocycleError::MissingWord(_))
        ));
        assert!(WeightTable::new(1, vec![("0".parse().unwrap(), -1.0)]).is_err());
    }

    #[test]
    fn prefix_evaluator_agrees_with_direct_products() {
        let pot = Potential::MatrixNorm(shear_pair());
        let mut ev = PrefixEvaluator::new(&pot);
        ev.sync(&word("0110"), 0);
        assert!((ev.value() - pot.log_norm(&word("0110"))).abs() < 1e-12);
        ev.sync(&word("0101"), 2);
        assert!((ev.value() - pot.log_norm(&word("0101"))).abs() < 1e-12);
        ev.truncate(1);
        assert!((ev.value() - PHI_LN).abs() < 1e-12);
    }

    #[test]
    fn works_in_single_precision() {
        let ms = MatrixSet::<f32>::from_nested(&[
            vec![vec![1.0, 1.0], vec![0.0, 1.0]],
            vec![vec![1.0, 0.0], vec![1.0, 1.0]],
        ])
        .unwrap();
        let r = log_spectral_radius(&product(&[0, 1], &ms)).unwrap();
        assert!((r - 2.0 * PHI_LN as f32).abs() < 1e-5);
    }
}
