//! Scalar abstraction shared by every numeric module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
///
/// Everything that touches matrices, logarithms or probabilities is generic
/// over this trait. Tolerances quoted in the docs are for `f64`; with `f32`
/// they scale with [`Float::epsilon`].
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 literal fits in scalar")
    }

    /// Converts a count.
    #[inline]
    fn from_count(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("count fits in scalar")
    }

    /// Widens to `f64` for reporting.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `max(floor, c * eps)`: a tolerance that is meaningful for both widths.
    #[inline]
    fn tol(floor: f64, eps_multiple: f64) -> Self {
        let eps = Self::epsilon() * Self::lit(eps_multiple);
        Self::lit(floor).max(eps)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Streaming pairwise (cascade) summation.
///
/// Values are combined as a balanced binary tree in arrival order, so the
/// result depends only on the sequence, never on how it was produced.
#[derive(Clone, Debug)]
pub struct PairwiseSum<T> {
    // (number of leaves, partial sum); leaf counts strictly decrease down the stack
    stack: Vec<(u64, T)>,
}

impl<T: Scalar> Default for PairwiseSum<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> PairwiseSum<T> {
    pub fn new() -> Self {
        Self { stack: Vec::with_capacity(64) }
    }

    pub fn push(&mut self, x: T) {
        let mut node = (1u64, x);
        while let Some(&(count, value)) = self.stack.last() {
            if count != node.0 {
                break;
            }
            self.stack.pop();
            node = (count * 2, value + node.1);
        }
        self.stack.push(node);
    }

    pub fn total(&self) -> T {
        // fold from the smallest partial upward
        self.stack.iter().rev().fold(T::zero(), |acc, &(_, v)| acc + v)
    }
}

/// Pairwise reduction of an ordered slice.
pub fn pairwise_sum<T: Scalar>(xs: &[T]) -> T {
    match xs.len() {
        0 => T::zero(),
        1 => xs[0],
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

/// Reduces an ordered list of partial results with a fixed balanced tree.
pub fn tree_reduce<A, F>(mut items: Vec<A>, combine: F) -> Option<A>
where
    F: Fn(A, A) -> A,
{
    if items.is_empty() {
        return None;
    }
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut it = items.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(combine(a, b)),
                None => next.push(a),
            }
        }
        items = next;
    }
    items.pop()
}
