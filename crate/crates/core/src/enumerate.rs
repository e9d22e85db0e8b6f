//! Exact weighted enumeration over product spaces `D^n`.
//!
//! Every voter independently picks a digit from the same alphabet; digit `d`
//! carries a bit mask (one bit per tracked component, e.g. one per canonical
//! pair) and a weight. The engine walks all `|D|^n` assignments in
//! mixed-radix order with voter 0 as the fastest digit, keeping per-component
//! table indices (bit `i` = voter `i`'s bit) and the running weight product
//! up to date incrementally.

use std::ops::{AddAssign, Mul};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quantity::Quantity;

/// Default cap on the number of enumerated assignments.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

const CHUNK: u64 = 1 << 14;

/// Alphabet weights: integer numerators over a common denominator, or floats.
#[derive(Clone, Debug)]
pub(crate) enum DigitWeights {
    Exact { nums: Vec<BigInt>, den: BigInt },
    Float(Vec<f64>),
}

pub(crate) trait Weight:
    Clone + Send + Sync + Zero + One + for<'a> AddAssign<&'a Self> + for<'a> Mul<&'a Self, Output = Self>
{
}

impl<T> Weight for T where
    T: Clone + Send + Sync + Zero + One + for<'a> AddAssign<&'a T> + for<'a> Mul<&'a T, Output = T>
{
}

/// Number of assignments, checked against the budget.
pub(crate) fn check_budget(radix: usize, n: usize, budget: u64) -> Result<u64> {
    let required = (radix as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if required > budget as u128 {
        return Err(Error::BudgetExceeded { required, budget });
    }
    Ok(required as u64)
}

struct Cursor<'a, W> {
    masks: &'a [u64],
    weights: &'a [W],
    digits: Vec<usize>,
    /// `index[c]`: bit `i` is component `c` of voter `i`'s digit.
    index: Vec<usize>,
    /// `suffix[i]` = product of the weights of digits `i..n`.
    suffix: Vec<W>,
}

impl<'a, W: Weight> Cursor<'a, W> {
    fn at(masks: &'a [u64], weights: &'a [W], components: usize, n: usize, mut pos: u64) -> Self {
        let radix = masks.len() as u64;
        let digits: Vec<usize> = (0..n)
            .map(|_| {
                let d = (pos % radix) as usize;
                pos /= radix;
                d
            })
            .collect();
        let index = (0..components)
            .map(|c| {
                digits
                    .iter()
                    .enumerate()
                    .fold(0usize, |acc, (i, &d)| acc | ((((masks[d] >> c) & 1) as usize) << i))
            })
            .collect();
        let mut suffix = vec![W::one(); n + 1];
        for i in (0..n).rev() {
            suffix[i] = weights[digits[i]].clone() * &suffix[i + 1];
        }
        Cursor { masks, weights, digits, index, suffix }
    }

    fn set_digit(&mut self, i: usize, d: usize) {
        let mut changed = self.masks[self.digits[i]] ^ self.masks[d];
        while changed != 0 {
            let c = changed.trailing_zeros() as usize;
            self.index[c] ^= 1 << i;
            changed &= changed - 1;
        }
        self.digits[i] = d;
    }

    fn advance(&mut self) {
        let radix = self.masks.len();
        let mut i = 0;
        while i < self.digits.len() {
            let next = self.digits[i] + 1;
            if next < radix {
                self.set_digit(i, next);
                break;
            }
            self.set_digit(i, 0);
            i += 1;
        }
        // Callers never step past the last assignment, so `i < n` here.
        for j in (0..=i).rev() {
            self.suffix[j] = self.weights[self.digits[j]].clone() * &self.suffix[j + 1];
        }
    }

    fn weight(&self) -> &W {
        &self.suffix[0]
    }
}

fn chunks(total: u64) -> Vec<(u64, u64)> {
    (0..total.div_ceil(CHUNK)).map(|c| (c * CHUNK, ((c + 1) * CHUNK).min(total))).collect()
}

fn sum_where<W, P>(masks: &[u64], weights: &[W], components: usize, n: usize, total: u64, pred: &P) -> W
where
    W: Weight,
    P: Fn(&[usize]) -> bool + Sync,
{
    let parts: Vec<W> = chunks(total)
        .into_par_iter()
        .map(|(start, end)| {
            let mut cur = Cursor::at(masks, weights, components, n, start);
            let mut acc = W::zero();
            for pos in start..end {
                if pred(&cur.index) {
                    acc += cur.weight();
                }
                if pos + 1 < end {
                    cur.advance();
                }
            }
            acc
        })
        .collect();
    // Fixed combination order keeps float results independent of scheduling.
    parts.into_iter().fold(W::zero(), |mut acc, w| {
        acc += &w;
        acc
    })
}

/// Probability that `pred` holds on the component indices of a random
/// assignment.
pub(crate) fn probability<P>(
    masks: &[u64],
    weights: &DigitWeights,
    components: usize,
    n: usize,
    budget: u64,
    pred: P,
) -> Result<Quantity>
where
    P: Fn(&[usize]) -> bool + Sync,
{
    let total = check_budget(masks.len(), n, budget)?;
    match weights {
        DigitWeights::Exact { nums, den } => {
            let scale = num_traits::pow(den.clone(), n);
            if scale.bits() < 127 {
                let w: Vec<u128> = nums.iter().map(|x| x.to_u128().expect("nonnegative numerator")).collect();
                let count = sum_where(masks, &w, components, n, total, &pred);
                Ok(Quantity::Exact(BigRational::new(BigInt::from(count), scale)))
            } else {
                let w: Vec<BigUint> = nums.iter().map(|x| x.to_biguint().expect("nonnegative numerator")).collect();
                let count = sum_where(masks, &w, components, n, total, &pred);
                Ok(Quantity::Exact(BigRational::new(BigInt::from(count), scale)))
            }
        }
        DigitWeights::Float(w) => Ok(Quantity::Approx(sum_where(masks, w, components, n, total, &pred))),
    }
}

/// The first assignment in enumeration order satisfying `pred`, as digits.
pub(crate) fn find_first<P>(masks: &[u64], components: usize, n: usize, budget: u64, pred: P) -> Result<Option<Vec<usize>>>
where
    P: Fn(&[usize]) -> bool + Sync,
{
    let total = check_budget(masks.len(), n, budget)?;
    let unit = vec![1.0f64; masks.len()];
    Ok(chunks(total).into_par_iter().find_map_first(|(start, end)| {
        let mut cur = Cursor::at(masks, &unit, components, n, start);
        for pos in start..end {
            if pred(&cur.index) {
                return Some(cur.digits.clone());
            }
            if pos + 1 < end {
                cur.advance();
            }
        }
        None
    }))
}
