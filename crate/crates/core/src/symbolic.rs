//! Alphabets, words and subshifts of finite type.
//!
//! A subshift of finite type (SFT) over the alphabet `{0, …, k-1}` is given by
//! a `k × k` 0/1 transition relation; entry `(i, j) = 1` means symbol `j` may
//! follow symbol `i`. Admissible words are the finite paths of that graph.
//!
//! In the shift metric `d(x, y) = 2^{-min{|i| : x_i ≠ y_i}}`, two points are
//! `(n, ε)`-separated for any `ε < 1` exactly when their first `n` symbols
//! differ. A maximal separated set is therefore one point per admissible
//! `n`-cylinder, and every sum over separated sets in this crate is a sum over
//! admissible words of length `n`. Nothing is lost by fixing `ε < 1`.
//!
//! Closing is exact on shift spaces: a word whose last symbol may be followed
//! by its first symbol *is* a periodic point, so [`close_word`] exposes no
//! shadowing constants.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::cocycle::{log_spectral_radius, Matrix, ScaledMatrix};

pub type Symbol = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymbolicError {
    #[error("alphabet must contain at least one symbol")]
    EmptyAlphabet,
    #[error("transition matrix row {row} has length {len}, expected {k}")]
    NotSquare { row: usize, len: usize, k: usize },
    #[error("transition entry ({row}, {col}) = {value} is not 0 or 1")]
    BadEntry { row: usize, col: usize, value: u8 },
    #[error("symbol {symbol} has no allowed successor")]
    NoSuccessor { symbol: Symbol },
    #[error("symbol {symbol} has no allowed predecessor")]
    NoPredecessor { symbol: Symbol },
    #[error("transition relation is not irreducible")]
    NotIrreducible,
    #[error("symbol {symbol} out of range for alphabet of size {k}")]
    SymbolOutOfRange { symbol: Symbol, k: usize },
    #[error("words must contain at least one symbol")]
    EmptyWord,
    #[error("transition {from} -> {to} at position {position} is forbidden")]
    NotAdmissible { position: usize, from: Symbol, to: Symbol },
    #[error("word is not cyclically admissible")]
    NotCyclic,
    #[error("no cyclically admissible subword; extend the trajectory")]
    NoClosure,
    #[error("cannot parse word: {0}")]
    Parse(String),
}

/// Transition structure of a subshift of finite type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SftSpec {
    k: usize,
    allowed: Vec<bool>,
    successors: Vec<Vec<Symbol>>,
    full: bool,
    irreducible: bool,
}

impl SftSpec {
    /// Full shift on `k` symbols.
    pub fn full(k: usize) -> Result<Self, SymbolicError> {
        if k == 0 {
            return Err(SymbolicError::EmptyAlphabet);
        }
        Self::from_allowed(k, vec![true; k * k]).map(|s| Self { irreducible: true, ..s })
    }

    /// Golden-mean shift: `1 → 1` forbidden.
    pub fn golden_mean() -> Self {
        Self::new(&[vec![1, 1], vec![1, 0]]).expect("golden-mean transitions are valid")
    }

    /// Builds an SFT from a row-major 0/1 transition matrix.
    pub fn new(transitions: &[Vec<u8>]) -> Result<Self, SymbolicError> {
        let k = transitions.len();
        if k == 0 {
            return Err(SymbolicError::EmptyAlphabet);
        }
        let mut allowed = Vec::with_capacity(k * k);
        for (row, entries) in transitions.iter().enumerate() {
            if entries.len() != k {
                return Err(SymbolicError::NotSquare { row, len: entries.len(), k });
            }
            for (col, &value) in entries.iter().enumerate() {
                match value {
                    0 => allowed.push(false),
                    1 => allowed.push(true),
                    _ => return Err(SymbolicError::BadEntry { row, col, value }),
                }
            }
        }
        Self::from_allowed(k, allowed)
    }

    fn from_allowed(k: usize, allowed: Vec<bool>) -> Result<Self, SymbolicError> {
        for symbol in 0..k {
            if !(0..k).any(|j| allowed[symbol * k + j]) {
                return Err(SymbolicError::NoSuccessor { symbol });
            }
            if !(0..k).any(|i| allowed[i * k + symbol]) {
                return Err(SymbolicError::NoPredecessor { symbol });
            }
        }
        let successors = (0..k)
            .map(|i| (0..k).filter(|&j| allowed[i * k + j]).collect())
            .collect();
        let full = allowed.iter().all(|&a| a);
        Ok(Self { k, allowed, successors, full, irreducible: false })
    }

    /// Marks the relation irreducible after checking it.
    pub fn require_irreducible(mut self) -> Result<Self, SymbolicError> {
        if !self.check_irreducible() {
            return Err(SymbolicError::NotIrreducible);
        }
        self.irreducible = true;
        Ok(self)
    }

    /// Strong connectivity of the transition graph.
    pub fn check_irreducible(&self) -> bool {
        (0..self.k).all(|start| {
            let mut seen = vec![false; self.k];
            let mut stack = vec![start];
            while let Some(a) = stack.pop() {
                for &b in &self.successors[a] {
                    if !seen[b] {
                        seen[b] = true;
                        stack.push(b);
                    }
                }
            }
            seen.iter().all(|&s| s)
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn is_full(&self) -> bool {
        self.full
    }

    pub fn is_irreducible(&self) -> bool {
        self.irreducible
    }

    #[inline]
    pub fn allows(&self, from: Symbol, to: Symbol) -> bool {
        self.allowed[from * self.k + to]
    }

    /// Allowed successors of `symbol`, ascending.
    #[inline]
    pub fn successors(&self, symbol: Symbol) -> &[Symbol] {
        &self.successors[symbol]
    }

    /// Length of the shortest cycle in the transition graph.
    pub fn shortest_cycle(&self) -> Option<usize> {
        // reach[i][j]: a path of exactly m steps from i to j
        let mut reach = self.allowed.clone();
        for m in 1..=self.k {
            if (0..self.k).any(|i| reach[i * self.k + i]) {
                return Some(m);
            }
            let mut next = vec![false; self.k * self.k];
            for i in 0..self.k {
                for j in 0..self.k {
                    if reach[i * self.k + j] {
                        for &l in self.successors(j) {
                            next[i * self.k + l] = true;
                        }
                    }
                }
            }
            reach = next;
        }
        None
    }

    /// Row-major 0/1 matrix.
    pub fn transitions(&self) -> Vec<Vec<u8>> {
        (0..self.k)
            .map(|i| (0..self.k).map(|j| u8::from(self.allows(i, j))).collect())
            .collect()
    }

    pub fn check_symbols(&self, symbols: &[Symbol]) -> Result<(), SymbolicError> {
        match symbols.iter().find(|&&s| s >= self.k) {
            Some(&symbol) => Err(SymbolicError::SymbolOutOfRange { symbol, k: self.k }),
            None => Ok(()),
        }
    }

    /// Every internal transition allowed.
    pub fn is_admissible(&self, symbols: &[Symbol]) -> bool {
        self.first_forbidden(symbols).is_none() && symbols.iter().all(|&s| s < self.k)
    }

    fn first_forbidden(&self, symbols: &[Symbol]) -> Option<usize> {
        symbols
            .windows(2)
            .position(|pair| pair[0] >= self.k || pair[1] >= self.k || !self.allows(pair[0], pair[1]))
    }

    /// Internal transitions and the wrap-around `last → first` allowed.
    pub fn is_cyclically_admissible(&self, symbols: &[Symbol]) -> bool {
        match (symbols.first(), symbols.last()) {
            (Some(&first), Some(&last)) => {
                self.is_admissible(symbols) && self.allows(last, first)
            }
            _ => false,
        }
    }

    pub fn check_admissible(&self, symbols: &[Symbol]) -> Result<(), SymbolicError> {
        if symbols.is_empty() {
            return Err(SymbolicError::EmptyWord);
        }
        self.check_symbols(symbols)?;
        match self.first_forbidden(symbols) {
            Some(position) => Err(SymbolicError::NotAdmissible {
                position,
                from: symbols[position],
                to: symbols[position + 1],
            }),
            None => Ok(()),
        }
    }

    /// Number of admissible words of length `n`: the sum of the entries of
    /// `transitionsⁿ⁻¹`.
    pub fn count_words(&self, n: usize) -> u128 {
        if n == 0 {
            return 1;
        }
        let mut counts = vec![1u128; self.k];
        for _ in 1..n {
            let mut next = vec![0u128; self.k];
            for (a, &c) in counts.iter().enumerate() {
                for &b in &self.successors[a] {
                    next[b] += c;
                }
            }
            counts = next;
        }
        counts.iter().sum()
    }

    /// Admissible words of length `p` in lexicographic order, where `p ≤ n` is
    /// the shortest length with at least `min_parts` words. Extending each
    /// prefix enumerates every admissible `n`-word exactly once.
    pub fn prefix_partition(&self, n: usize, min_parts: usize) -> Vec<Vec<Symbol>> {
        let mut p = 1;
        while p < n && self.count_words(p) < min_parts as u128 {
            p += 1;
        }
        let p = p.min(n.max(1));
        enumerate_words(p, self).map(Word::into_symbols).collect()
    }
}

/// A finite non-empty word over `{0, …, k-1}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<Symbol>);

impl Word {
    pub fn new(symbols: Vec<Symbol>) -> Result<Self, SymbolicError> {
        if symbols.is_empty() {
            return Err(SymbolicError::EmptyWord);
        }
        Ok(Self(symbols))
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn into_symbols(self) -> Vec<Symbol> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Word {
    /// Single base-36 characters when every symbol fits, comma-separated
    /// decimals otherwise.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.iter().all(|&s| s < 36) {
            for &s in &self.0 {
                let c = std::char::from_digit(s as u32, 36).expect("digit < 36");
                write!(f, "{c}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
            write!(f, "{}", parts.join(","))
        }
    }
}

impl FromStr for Word {
    type Err = SymbolicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let symbols = if s.contains(',') {
            s.split(',')
                .map(|part| {
                    part.trim()
                        .parse::<Symbol>()
                        .map_err(|e| SymbolicError::Parse(format!("{part:?}: {e}")))
                })
                .collect::<Result<Vec<_>, _>>()?
        } else {
            s.chars()
                .map(|c| {
                    c.to_digit(36)
                        .map(|d| d as Symbol)
                        .ok_or_else(|| SymbolicError::Parse(format!("invalid symbol {c:?}")))
                })
                .collect::<Result<Vec<_>, _>>()?
        };
        Word::new(symbols)
    }
}

/// A cyclically admissible word: the periodic point `p = (www…)` with
/// `Tⁿ(p) = p` for `n` the word length.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PeriodicOrbit {
    word: Word,
}

impl PeriodicOrbit {
    pub fn new(word: Word, sft: &SftSpec) -> Result<Self, SymbolicError> {
        sft.check_admissible(word.symbols())?;
        if !sft.is_cyclically_admissible(word.symbols()) {
            return Err(SymbolicError::NotCyclic);
        }
        Ok(Self { word })
    }

    pub fn word(&self) -> &Word {
        &self.word
    }

    pub fn period(&self) -> usize {
        self.word.len()
    }

    /// Symbol at position `i` of the periodic point.
    pub fn symbol_at(&self, i: usize) -> Symbol {
        self.word.0[i % self.period()]
    }
}

impl fmt::Display for PeriodicOrbit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.word.fmt(f)
    }
}

/// Odometer over admissible words of a fixed length, lexicographic order.
///
/// [`WordCursor::advance`] reports the first position that changed, so
/// callers can maintain prefix products incrementally.
#[derive(Debug, Clone)]
pub struct WordCursor<'a> {
    sft: &'a SftSpec,
    len: usize,
    fixed: usize,
    buf: Vec<Symbol>,
    state: CursorState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CursorState {
    Fresh,
    Running,
    Done,
}

impl<'a> WordCursor<'a> {
    pub fn new(sft: &'a SftSpec, len: usize) -> Self {
        Self::with_prefix(sft, &[], len)
    }

    /// Enumerates only words that start with `prefix` (assumed admissible).
    pub fn with_prefix(sft: &'a SftSpec, prefix: &[Symbol], len: usize) -> Self {
        let mut buf = Vec::with_capacity(len);
        buf.extend_from_slice(&prefix[..prefix.len().min(len)]);
        let state = if len == 0 { CursorState::Done } else { CursorState::Fresh };
        Self { sft, len, fixed: buf.len(), buf, state }
    }

    fn fill_from(&mut self, start: usize) {
        self.buf.truncate(start);
        while self.buf.len() < self.len {
            let next = match self.buf.last() {
                Some(&prev) => self.sft.successors(prev)[0],
                None => 0,
            };
            self.buf.push(next);
        }
    }

    /// Moves to the next word; returns the first changed index.
    pub fn advance(&mut self) -> Option<usize> {
        match self.state {
            CursorState::Done => None,
            CursorState::Fresh => {
                self.state = CursorState::Running;
                let start = self.fixed;
                self.fill_from(start);
                Some(0)
            }
            CursorState::Running => {
                for i in (self.fixed..self.len).rev() {
                    let current = self.buf[i];
                    let next = if i == 0 {
                        (current + 1 < self.sft.k()).then_some(current + 1)
                    } else {
                        self.sft
                            .successors(self.buf[i - 1])
                            .iter()
                            .copied()
                            .find(|&s| s > current)
                    };
                    if let Some(symbol) = next {
                        self.buf[i] = symbol;
                        self.fill_from(i + 1);
                        return Some(i);
                    }
                }
                self.state = CursorState::Done;
                None
            }
        }
    }

    pub fn word(&self) -> &[Symbol] {
        &self.buf
    }
}

/// Streaming iterator over admissible words of a fixed length.
pub struct Words<'a> {
    cursor: WordCursor<'a>,
}

impl Iterator for Words<'_> {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        self.cursor.advance().map(|_| Word(self.cursor.word().to_vec()))
    }
}

/// Every admissible word of length `n`, once each, in lexicographic order.
pub fn enumerate_words(n: usize, sft: &SftSpec) -> Words<'_> {
    Words { cursor: WordCursor::new(sft, n) }
}

pub fn is_cyclically_admissible(w: &Word, sft: &SftSpec) -> bool {
    sft.is_cyclically_admissible(w.symbols())
}

/// Longest cyclically admissible subword of an admissible word, earliest
/// start on ties. Returns the whole word when it already closes.
///
/// A subword `w[i..j]` of an admissible word closes iff `w[j-1] → w[i]` is
/// allowed, so an optimal pair always uses the first occurrence of its start
/// symbol and the last occurrence of its end symbol.
pub fn close_word(w: &Word, sft: &SftSpec) -> Result<PeriodicOrbit, SymbolicError> {
    let symbols = w.symbols();
    sft.check_admissible(symbols)?;
    let k = sft.k();
    let mut first = vec![usize::MAX; k];
    let mut last = vec![usize::MAX; k];
    for (i, &s) in symbols.iter().enumerate() {
        if first[s] == usize::MAX {
            first[s] = i;
        }
        last[s] = i;
    }
    // (length, start) maximizing length, then minimizing start
    let mut best: Option<(usize, usize)> = None;
    for (end_symbol, &end) in last.iter().enumerate() {
        if end == usize::MAX {
            continue;
        }
        for &start_symbol in sft.successors(end_symbol) {
            let start = first[start_symbol];
            if start == usize::MAX || start > end {
                continue;
            }
            let len = end - start + 1;
            let better = match best {
                None => true,
                Some((bl, bs)) => len > bl || (len == bl && start < bs),
            };
            if better {
                best = Some((len, start));
            }
        }
    }
    let (len, start) = best.ok_or(SymbolicError::NoClosure)?;
    Ok(PeriodicOrbit { word: Word(symbols[start..start + len].to_vec()) })
}

/// Topological entropy in nats: log of the spectral radius of the
/// transition matrix.
pub fn topological_entropy(sft: &SftSpec) -> f64 {
    let k = sft.k();
    let data = (0..k)
        .flat_map(|i| (0..k).map(move |j| (i, j)))
        .map(|(i, j)| if sft.allows(i, j) { 1.0 } else { 0.0 })
        .collect();
    let m = Matrix::from_row_major(k, data).expect("square by construction");
    match log_spectral_radius(&ScaledMatrix::from_matrix(&m)) {
        Ok(v) => v,
        Err(e) => e.last_estimate(),
    }
}

/// Lyndon test: strictly smaller than every proper rotation. Lyndon words
/// are the primitive necklace representatives.
pub fn is_lyndon(symbols: &[Symbol]) -> bool {
    // Duval: the word is Lyndon iff one factorization step consumes it whole
    let n = symbols.len();
    if n == 0 {
        return false;
    }
    let (mut i, mut j) = (0usize, 1usize);
    while j < n {
        match symbols[i].cmp(&symbols[j]) {
            std::cmp::Ordering::Less => {
                i = 0;
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
            std::cmp::Ordering::Greater => return false,
        }
    }
    i == 0
}
