//! Compensated, order-fixed summation.
//!
//! Terms are split into consecutive blocks of [`BLOCK`] entries. Each block is
//! reduced with Neumaier's compensated sum; block results are then combined
//! as a balanced binary tree using error-free `two_sum`, carrying the
//! compensation terms alongside. The tree shape depends only on the number of
//! terms, so results are bitwise reproducible for a given input order, no
//! matter how the terms were produced.

use crate::scalar::Real;

/// Leaf block length of the reduction tree.
pub const BLOCK: usize = 256;

/// Running (sum, compensation) pair.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Compensated<T> {
    pub sum: T,
    pub comp: T,
}

impl<T: Real> Compensated<T> {
    pub fn zero() -> Self {
        Self {
            sum: T::zero(),
            comp: T::zero(),
        }
    }

    /// Neumaier update.
    #[inline]
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp = self.comp + ((self.sum - t) + x);
        } else {
            self.comp = self.comp + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    /// Merge two partial sums without losing the rounding error of the merge.
    #[inline]
    pub fn merge(self, other: Self) -> Self {
        let (s, e) = two_sum(self.sum, other.sum);
        Self {
            sum: s,
            comp: self.comp + other.comp + e,
        }
    }

    #[inline]
    pub fn value(self) -> T {
        self.sum + self.comp
    }
}

/// Knuth's error-free transformation: `a + b = s + e` exactly.
#[inline]
pub fn two_sum<T: Real>(a: T, b: T) -> (T, T) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

fn reduce_tree<T: Real>(blocks: &[Compensated<T>]) -> Compensated<T> {
    match blocks.len() {
        0 => Compensated::zero(),
        1 => blocks[0],
        n => {
            let mid = n / 2;
            reduce_tree(&blocks[..mid]).merge(reduce_tree(&blocks[mid..]))
        }
    }
}

/// Compensated sum of `terms` in slice order.
pub fn compensated_sum<T: Real>(terms: &[T]) -> T {
    let blocks: Vec<Compensated<T>> = terms
        .chunks(BLOCK)
        .map(|chunk| {
            let mut acc = Compensated::zero();
            for &x in chunk {
                acc.add(x);
            }
            acc
        })
        .collect();
    reduce_tree(&blocks).value()
}
