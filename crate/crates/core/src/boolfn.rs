//! Dense functions on the Boolean cube and their Walsh–Fourier analysis.
//!
//! A function on `{-1,+1}^n` is a table of `2^n` values. Bit `i` of a table
//! index is 1 exactly when coordinate `x_i = +1`; every file format and every
//! other module inherits this convention. Expectations are under the uniform
//! measure and `coeffs[S]` is `E[f(x) χ_S(x)]` with `S` a bitmask.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{Error, Result};

/// Largest `n` a dense table may have.
pub const MAX_VARS: usize = 25;

const RANGE_SLACK: f64 = 1e-12;

fn check_n(n: usize) -> Result<()> {
    if n > MAX_VARS {
        Err(Error::TooManyVariables { n, max: MAX_VARS })
    } else {
        Ok(())
    }
}

fn check_coord(n: usize, i: usize) -> Result<()> {
    if i >= n {
        Err(Error::InvalidParameter(format!("coordinate {i} out of range for n = {n}")))
    } else {
        Ok(())
    }
}

/// A function `{-1,1}^n → [-1,1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundedFunction {
    n: usize,
    values: Vec<f64>,
}

impl BoundedFunction {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        check_n(n)?;
        if values.len() != 1 << n {
            return Err(Error::InvalidTable(format!("expected {} values, got {}", 1usize << n, values.len())));
        }
        if let Some(v) = values.iter().find(|v| !(v.abs() <= 1.0)) {
            return Err(Error::InvalidTable(format!("value {v} outside [-1, 1]")));
        }
        Ok(BoundedFunction { n, values })
    }

    /// Like [`new`](Self::new) but clamps values within 1e-12 of the range,
    /// absorbing round-off from transforms.
    pub(crate) fn from_rounded(n: usize, mut values: Vec<f64>) -> Result<Self> {
        for v in &mut values {
            if v.abs() > 1.0 && v.abs() <= 1.0 + RANGE_SLACK {
                *v = v.signum();
            }
        }
        Self::new(n, values)
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::new(n, vec![c; 1 << n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, index: usize) -> f64 {
        self.values[index]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn second_moment(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() / self.values.len() as f64
    }

    pub fn variance(&self) -> f64 {
        self.second_moment() - self.mean().powi(2)
    }

    /// The Boolean function with the same table, if every value is ±1.
    pub fn to_boolean(&self) -> Option<BooleanFunction> {
        if self.values.iter().all(|&v| v == 1.0 || v == -1.0) {
            Some(BooleanFunction::from_fn(self.n, |x| self.values[x] > 0.0).expect("n checked"))
        } else {
            None
        }
    }

    /// Whether the function ignores coordinate `i`.
    pub fn ignores(&self, i: usize) -> bool {
        let bit = 1 << i;
        (0..self.values.len()).filter(|x| x & bit == 0).all(|x| self.values[x] == self.values[x | bit])
    }
}

/// A function `{-1,1}^n → {-1,1}`, bit-packed (bit set means `+1`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BooleanFunction {
    n: usize,
    words: Vec<u64>,
}

impl BooleanFunction {
    pub fn from_fn<F: FnMut(usize) -> bool>(n: usize, mut plus: F) -> Result<Self> {
        check_n(n)?;
        let len = 1usize << n;
        let mut words = vec![0u64; len.div_ceil(64)];
        for x in 0..len {
            if plus(x) {
                words[x >> 6] |= 1 << (x & 63);
            }
        }
        Ok(BooleanFunction { n, words })
    }

    pub fn from_signs(n: usize, signs: &[i8]) -> Result<Self> {
        if signs.len() != 1 << n.min(MAX_VARS + 1) {
            return Err(Error::InvalidTable(format!("expected {} signs, got {}", 1usize << n, signs.len())));
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidTable("signs must be ±1".into()));
        }
        Self::from_fn(n, |x| signs[x] > 0)
    }

    pub fn constant(n: usize, sign: i8) -> Result<Self> {
        Self::from_fn(n, |_| sign > 0)
    }

    /// `sign · x_i`.
    pub fn dictator(n: usize, i: usize, sign: i8) -> Result<Self> {
        check_coord(n, i)?;
        Self::from_fn(n, |x| ((x >> i) & 1 == 1) == (sign > 0))
    }

    /// Simple majority; `n` must be odd.
    pub fn majority(n: usize) -> Result<Self> {
        if n.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!("majority needs odd n, got {n}")));
        }
        Self::from_fn(n, |x| 2 * x.count_ones() as usize > n)
    }

    /// `Π x_i`.
    pub fn parity(n: usize) -> Result<Self> {
        Self::from_fn(n, |x| (n - x.count_ones() as usize).is_multiple_of(2))
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        check_n(n)?;
        let len = 1usize << n;
        let mut words: Vec<u64> = (0..len.div_ceil(64)).map(|_| rng.random()).collect();
        if len < 64 {
            words[0] &= (1u64 << len) - 1;
        }
        Ok(BooleanFunction { n, words })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        1 << self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn is_plus(&self, index: usize) -> bool {
        (self.words[index >> 6] >> (index & 63)) & 1 == 1
    }

    #[inline]
    pub fn value(&self, index: usize) -> i8 {
        if self.is_plus(index) {
            1
        } else {
            -1
        }
    }

    pub fn signs(&self) -> Vec<i8> {
        (0..self.len()).map(|x| self.value(x)).collect()
    }

    pub fn flip(&mut self, index: usize) {
        self.words[index >> 6] ^= 1 << (index & 63);
    }

    pub fn count_plus(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// `Some(sign)` when the function is constant.
    pub fn constant_value(&self) -> Option<i8> {
        match self.count_plus() {
            0 => Some(-1),
            c if c == self.len() => Some(1),
            _ => None,
        }
    }

    pub fn negate(&self) -> Self {
        Self::from_fn(self.n, |x| !self.is_plus(x)).expect("same n")
    }

    /// `y ↦ -f(-y)`: the same social decision read from the other side of
    /// the pair, i.e. `f^{b>a}` given `f^{a>b}`.
    pub fn reverse_orientation(&self) -> Self {
        let all = self.len() - 1;
        Self::from_fn(self.n, |y| !self.is_plus(y ^ all)).expect("same n")
    }

    /// Fixes coordinate `i` to `sign` and drops it; later coordinates shift
    /// down by one.
    pub fn restrict_coordinate(&self, i: usize, sign: i8) -> Result<Self> {
        check_coord(self.n, i)?;
        let low = (1usize << i) - 1;
        let fixed = if sign > 0 { 1usize << i } else { 0 };
        Self::from_fn(self.n - 1, |y| {
            let x = (y & low) | ((y & !low) << 1) | fixed;
            self.is_plus(x)
        })
    }

    pub fn to_bounded(&self) -> BoundedFunction {
        BoundedFunction {
            n: self.n,
            values: (0..self.len()).map(|x| self.value(x) as f64).collect(),
        }
    }

    /// Unnormalized integer Walsh spectrum `Σ_x f(x) χ_S(x) = 2^n f̂(S)`.
    pub fn walsh_int(&self) -> Vec<i64> {
        let mut a: Vec<i64> = (0..self.len()).map(|x| self.value(x) as i64).collect();
        butterfly(&mut a, |lo, hi| (lo + hi, hi - lo));
        a
    }

    /// Fraction of inputs where the two functions differ.
    pub fn distance(&self, other: &BooleanFunction) -> f64 {
        let diff: usize = self.words.iter().zip(&other.words).map(|(a, b)| (a ^ b).count_ones() as usize).sum();
        diff as f64 / self.len() as f64
    }
}

/// In-place radix-2 butterflies over every coordinate, in a fixed order.
fn butterfly<T: Copy, F: Fn(T, T) -> (T, T)>(a: &mut [T], op: F) {
    let mut h = 1;
    while h < a.len() {
        for block in a.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (l, u) in lo.iter_mut().zip(hi.iter_mut()) {
                let (s, d) = op(*l, *u);
                *l = s;
                *u = d;
            }
        }
        h *= 2;
    }
}

/// Fourier coefficients indexed by subset bitmask.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierExpansion {
    n: usize,
    coeffs: Vec<f64>,
}

impl FourierExpansion {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, set: usize) -> f64 {
        self.coeffs[set]
    }

    /// `Σ_S f̂(S)²`, which equals `E[f²]`.
    pub fn weight(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// Function values `Σ_S f̂(S) χ_S(x)`.
    pub fn inverse(&self) -> Vec<f64> {
        let mut v = self.coeffs.clone();
        butterfly(&mut v, |lo, hi| (lo - hi, lo + hi));
        v
    }

    pub fn to_function(&self) -> Result<BoundedFunction> {
        BoundedFunction::from_rounded(self.n, self.inverse())
    }
}

pub fn fwht(f: &BoundedFunction) -> FourierExpansion {
    let mut c = f.values.clone();
    butterfly(&mut c, |lo, hi| (lo + hi, hi - lo));
    let scale = 1.0 / c.len() as f64;
    c.iter_mut().for_each(|v| *v *= scale);
    FourierExpansion { n: f.n, coeffs: c }
}

/// `P_x[f(x) ≠ f(x ⊕ e_i)]` by counting flips.
pub fn influence(f: &BooleanFunction, i: usize) -> Result<f64> {
    check_coord(f.n, i)?;
    let bit = 1 << i;
    let pivotal = (0..f.len()).filter(|x| x & bit == 0 && f.is_plus(*x) != f.is_plus(x | bit)).count();
    Ok(pivotal as f64 / (f.len() / 2) as f64)
}

/// `Σ_{S ∋ i} f̂(S)²`.
pub fn spectral_influence(f: &BoundedFunction, i: usize) -> Result<f64> {
    check_coord(f.n, i)?;
    let fourier = fwht(f);
    Ok(fourier.coeffs.iter().enumerate().filter(|(s, _)| s >> i & 1 == 1).map(|(_, c)| c * c).sum())
}

/// Spectral influences of every coordinate from one transform.
pub fn influences(f: &BoundedFunction) -> Vec<f64> {
    let fourier = fwht(f);
    let mut out = vec![0.0; f.n];
    for (s, c) in fourier.coeffs.iter().enumerate() {
        let w = c * c;
        let mut rest = s;
        while rest != 0 {
            out[rest.trailing_zeros() as usize] += w;
            rest &= rest - 1;
        }
    }
    out
}

/// `Σ_{S ∋ i, |S| ≤ d} f̂(S)²`.
pub fn low_degree_influence(f: &BoundedFunction, i: usize, d: usize) -> Result<f64> {
    check_coord(f.n, i)?;
    let fourier = fwht(f);
    Ok(fourier
        .coeffs
        .iter()
        .enumerate()
        .filter(|(s, _)| s >> i & 1 == 1 && s.count_ones() as usize <= d)
        .map(|(_, c)| c * c)
        .sum())
}

/// The Bonami–Beckner operator `T_ρ`, which scales `f̂(S)` by `ρ^{|S|}`.
///
/// Computed as the per-coordinate average `(1+ρ)/2 f(x) + (1-ρ)/2 f(x ⊕ e_i)`,
/// which keeps values inside `[-1, 1]` without round-off overshoot.
pub fn noise_operator(f: &BoundedFunction, rho: f64) -> Result<BoundedFunction> {
    if !(rho.abs() <= 1.0) {
        return Err(Error::InvalidParameter(format!("|rho| must be at most 1, got {rho}")));
    }
    let (keep, swap) = ((1.0 + rho) / 2.0, (1.0 - rho) / 2.0);
    let mut v = f.values.clone();
    butterfly(&mut v, |lo, hi| (keep * lo + swap * hi, swap * lo + keep * hi));
    BoundedFunction::from_rounded(f.n, v)
}

fn check_rho(n: usize, rho: &[f64]) -> Result<()> {
    if rho.len() != n {
        return Err(Error::ShapeMismatch(format!("{} correlations for n = {n}", rho.len())));
    }
    if let Some(r) = rho.iter().find(|r| !(r.abs() <= 1.0)) {
        return Err(Error::InvalidParameter(format!("|rho_i| must be at most 1, got {r}")));
    }
    Ok(())
}

/// `E[f(X) g(Y)]` where the pairs `(X_i, Y_i)` are independent, uniform on
/// each side, with `E[X_i Y_i] = rho[i]`.
pub fn correlated_expectation(f: &BoundedFunction, g: &BoundedFunction, rho: &[f64]) -> Result<f64> {
    if f.n != g.n {
        return Err(Error::ShapeMismatch(format!("n = {} vs n = {}", f.n, g.n)));
    }
    check_rho(f.n, rho)?;
    let (ff, gg) = (fwht(f), fwht(g));
    Ok(ff
        .coeffs
        .iter()
        .zip(&gg.coeffs)
        .enumerate()
        .map(|(s, (a, b))| {
            let mut w = a * b;
            let mut rest = s;
            while rest != 0 && w != 0.0 {
                w *= rho[rest.trailing_zeros() as usize];
                rest &= rest - 1;
            }
            w
        })
        .sum())
}

/// Exact `E[f(X) g(Y)]` for Boolean `f, g` when every coordinate pair has the
/// same rational correlation `rho`.
pub fn correlated_expectation_exact(
    f: &BooleanFunction,
    g: &BooleanFunction,
    rho: &BigRational,
) -> Result<BigRational> {
    if f.n != g.n {
        return Err(Error::ShapeMismatch(format!("n = {} vs n = {}", f.n, g.n)));
    }
    let (a, b) = (f.walsh_int(), g.walsh_int());
    // Group Σ a_S b_S by |S| so only n + 1 rational products are needed.
    let mut by_level = vec![BigInt::zero(); f.n + 1];
    for (s, (x, y)) in a.iter().zip(&b).enumerate() {
        by_level[s.count_ones() as usize] += BigInt::from(*x) * BigInt::from(*y);
    }
    let mut total = BigRational::zero();
    let mut power = BigRational::one();
    for level in by_level {
        total += &power * BigRational::from_integer(level);
        power *= rho;
    }
    let scale = BigInt::one() << (2 * f.n);
    Ok(total / BigRational::from_integer(scale))
}

/// `g(x) = E[f(Y) | Y_j = x_j for j ∉ coords]`.
pub fn average_over_coords(f: &BoundedFunction, coords: &[usize]) -> Result<BoundedFunction> {
    let mut v = f.values.clone();
    for &i in coords {
        check_coord(f.n, i)?;
        let bit = 1 << i;
        for x in 0..v.len() {
            if x & bit == 0 {
                let avg = (v[x] + v[x | bit]) / 2.0;
                v[x] = avg;
                v[x | bit] = avg;
            }
        }
    }
    BoundedFunction::from_rounded(f.n, v)
}

/// Constants, dictators and negated dictators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SimpleFunction {
    Constant(i8),
    /// `sign · x_voter`.
    Dictator { voter: usize, sign: i8 },
}

impl SimpleFunction {
    /// All `2n + 2` candidates in tie-breaking order: `+1`, `-1`, then
    /// `x_j` by `j`, then `-x_j` by `j`.
    pub fn candidates(n: usize) -> Vec<SimpleFunction> {
        let mut out = vec![SimpleFunction::Constant(1), SimpleFunction::Constant(-1)];
        out.extend((0..n).map(|voter| SimpleFunction::Dictator { voter, sign: 1 }));
        out.extend((0..n).map(|voter| SimpleFunction::Dictator { voter, sign: -1 }));
        out
    }

    pub fn to_boolean(self, n: usize) -> Result<BooleanFunction> {
        match self {
            SimpleFunction::Constant(s) => BooleanFunction::constant(n, s),
            SimpleFunction::Dictator { voter, sign } => BooleanFunction::dictator(n, voter, sign),
        }
    }
}

/// Closest constant or (negated) dictator in normalized Hamming distance.
pub fn nearest_simple(f: &BooleanFunction) -> (SimpleFunction, f64) {
    nearest_simple_biased(f, 0.5)
}

/// Like [`nearest_simple`], with coordinates independently `+1` with
/// probability `p_plus`.
pub fn nearest_simple_biased(f: &BooleanFunction, p_plus: f64) -> (SimpleFunction, f64) {
    let weight = |x: usize| {
        let plus = x.count_ones() as i32;
        p_plus.powi(plus) * (1.0 - p_plus).powi(f.n as i32 - plus)
    };
    let weights: Vec<f64> = (0..f.len()).map(weight).collect();
    let mut best: Option<(SimpleFunction, f64)> = None;
    for cand in SimpleFunction::candidates(f.n) {
        let g = cand.to_boolean(f.n).expect("same n");
        let d: f64 = (0..f.len()).filter(|&x| f.is_plus(x) != g.is_plus(x)).fold(0.0, |s, x| s + weights[x]);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((cand, d));
        }
    }
    best.expect("at least two candidates")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    /// Oracle: `E[f χ_S]` summed directly over the cube.
    fn naive_coeff(f: &BoundedFunction, s: usize) -> f64 {
        let n = f.n();
        (0..1usize << n)
            .map(|x| {
                let minus_in_s = (s & !x).count_ones();
                let chi = if minus_in_s.is_multiple_of(2) { 1.0 } else { -1.0 };
                f.value(x) * chi
            })
            .sum::<f64>()
            / (1usize << n) as f64
    }

    #[test]
    fn transform_examples() {
        let c = fwht(&BoundedFunction::constant(3, 1.0).unwrap());
        assert_eq!(c.coeff(0), 1.0);
        assert!(c.coeffs()[1..].iter().all(|&v| v == 0.0));

        let d = fwht(&BooleanFunction::dictator(3, 0, 1).unwrap().to_bounded());
        assert_eq!(d.coeff(0b001), 1.0);
        assert_eq!(d.weight(), 1.0);

        let maj = fwht(&BooleanFunction::majority(3).unwrap().to_bounded());
        for s in 0..8 {
            let expected = match s {
                0b001 | 0b010 | 0b100 => 0.5,
                0b111 => -0.5,
                _ => 0.0,
            };
            assert_eq!(maj.coeff(s), expected, "S = {s:03b}");
        }
    }

    #[test]
    fn transform_matches_naive_and_inverts() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 0..=7 {
            let values: Vec<f64> = (0..1 << n).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let f = BoundedFunction::new(n, values).unwrap();
            let fourier = fwht(&f);
            for s in 0..1 << n {
                assert!(close(fourier.coeff(s), naive_coeff(&f, s), 1e-12));
            }
            for (a, b) in fourier.inverse().iter().zip(f.values()) {
                assert!(close(*a, *b, 1e-12));
            }
        }
    }

    #[test]
    fn parseval_on_random_tables() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for t in 0..1000 {
            let n = t % 13;
            let values: Vec<f64> = (0..1 << n).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let f = BoundedFunction::new(n, values).unwrap();
            assert!(close(fwht(&f).weight(), f.second_moment(), 1e-10));
        }
    }

    #[test]
    fn influence_examples() {
        for n in 1..=6 {
            let p = BooleanFunction::parity(n).unwrap();
            for i in 0..n {
                assert_eq!(influence(&p, i).unwrap(), 1.0);
            }
        }
        let d = BooleanFunction::dictator(4, 0, 1).unwrap();
        assert_eq!(influence(&d, 0).unwrap(), 1.0);
        for j in 1..4 {
            assert_eq!(influence(&d, j).unwrap(), 0.0);
        }
        let maj = BooleanFunction::majority(3).unwrap();
        for i in 0..3 {
            assert_eq!(influence(&maj, i).unwrap(), 0.5);
        }
        assert!(influence(&maj, 3).is_err());
    }

    #[test]
    fn flip_and_spectral_influences_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for t in 0..300 {
            let n = 1 + t % 10;
            let f = BooleanFunction::random(n, &mut rng).unwrap();
            let spectral = influences(&f.to_bounded());
            for i in 0..n {
                let flip = influence(&f, i).unwrap();
                assert!(close(flip, spectral[i], 1e-12));
                assert!(close(flip, spectral_influence(&f.to_bounded(), i).unwrap(), 1e-12));
            }
        }
    }

    #[test]
    fn low_degree_influence_examples() {
        let maj = BooleanFunction::majority(3).unwrap().to_bounded();
        assert!(close(low_degree_influence(&maj, 0, 1).unwrap(), 0.25, 1e-15));
        assert_eq!(low_degree_influence(&maj, 0, 0).unwrap(), 0.0);
        assert!(close(low_degree_influence(&maj, 0, 3).unwrap(), 0.5, 1e-15));
    }

    #[test]
    fn low_degree_sum_bounded_by_degree_times_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for t in 0..200 {
            let n = 1 + t % 9;
            let values: Vec<f64> = (0..1 << n).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let f = BoundedFunction::new(n, values).unwrap();
            let var = f.variance();
            let mut prev = vec![0.0; n];
            for d in 0..=n {
                let total: f64 = (0..n).map(|i| low_degree_influence(&f, i, d).unwrap()).sum();
                assert!(total <= d as f64 * var + 1e-12);
                for i in 0..n {
                    let cur = low_degree_influence(&f, i, d).unwrap();
                    assert!(cur + 1e-15 >= prev[i]);
                    prev[i] = cur;
                }
            }
            let spectral = influences(&f);
            for i in 0..n {
                assert!(close(prev[i], spectral[i], 1e-12));
            }
        }
    }

    #[test]
    fn noise_operator_examples() {
        let maj = BooleanFunction::majority(5).unwrap().to_bounded();
        assert_eq!(noise_operator(&maj, 1.0).unwrap(), maj);
        let flat = noise_operator(&maj, 0.0).unwrap();
        assert!(flat.values().iter().all(|v| close(*v, maj.mean(), 1e-15)));
        let d = BooleanFunction::dictator(3, 0, 1).unwrap().to_bounded();
        let half = noise_operator(&d, 0.5).unwrap();
        for x in 0..8 {
            assert!(close(half.value(x), 0.5 * d.value(x), 1e-15));
        }
        assert!(noise_operator(&d, 1.5).is_err());
    }

    #[test]
    fn noise_operator_scales_coefficients_and_composes() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let n = rng.random_range(1..=8);
            let values: Vec<f64> = (0..1 << n).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let f = BoundedFunction::new(n, values).unwrap();
            let (r1, r2) = (rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
            let tf = noise_operator(&f, r1).unwrap();
            let (a, b) = (fwht(&f), fwht(&tf));
            for s in 0..1usize << n {
                assert!(close(b.coeff(s), a.coeff(s) * r1.powi(s.count_ones() as i32), 1e-12));
            }
            let twice = noise_operator(&tf, r2).unwrap();
            let once = noise_operator(&f, r1 * r2).unwrap();
            for (x, y) in twice.values().iter().zip(once.values()) {
                assert!(close(*x, *y, 1e-12));
            }
        }
    }

    /// Oracle: `Σ_{x,y} f(x) g(y) Π_i p(x_i, y_i)` over all `4^n` pairs.
    fn brute_correlated(f: &BoundedFunction, g: &BoundedFunction, rho: &[f64]) -> f64 {
        let n = f.n();
        let mut total = 0.0;
        for x in 0..1usize << n {
            for y in 0..1usize << n {
                let p: f64 = (0..n)
                    .map(|i| {
                        let same = (x >> i & 1) == (y >> i & 1);
                        if same {
                            (1.0 + rho[i]) / 4.0
                        } else {
                            (1.0 - rho[i]) / 4.0
                        }
                    })
                    .product();
                total += f.value(x) * g.value(y) * p;
            }
        }
        total
    }

    #[test]
    fn correlated_expectation_examples() {
        let d = BooleanFunction::dictator(2, 0, 1).unwrap().to_bounded();
        assert!(close(correlated_expectation(&d, &d, &[0.3, -0.7]).unwrap(), 0.3, 1e-15));
        let maj = BooleanFunction::majority(3).unwrap().to_bounded();
        let third = -1.0 / 3.0;
        let v = correlated_expectation(&maj, &maj, &[third; 3]).unwrap();
        assert!(close(v, -7.0 / 27.0, 1e-15));
        assert!(close(brute_correlated(&maj, &maj, &[third; 3]), -7.0 / 27.0, 1e-15));
        assert!(close(correlated_expectation(&maj, &maj, &[1.0; 3]).unwrap(), 1.0, 1e-15));
        assert!(correlated_expectation(&maj, &d, &[0.0; 3]).is_err());
        assert!(correlated_expectation(&maj, &maj, &[0.0; 2]).is_err());
    }

    #[test]
    fn correlated_expectation_matches_joint_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..150 {
            let n = rng.random_range(0..=6);
            let f = BoundedFunction::new(n, (0..1 << n).map(|_| rng.random_range(-1.0..=1.0)).collect()).unwrap();
            let g = BoundedFunction::new(n, (0..1 << n).map(|_| rng.random_range(-1.0..=1.0)).collect()).unwrap();
            let rho: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let spectral = correlated_expectation(&f, &g, &rho).unwrap();
            assert!(close(spectral, brute_correlated(&f, &g, &rho), 1e-10));
        }
    }

    #[test]
    fn exact_correlated_expectation() {
        let maj = BooleanFunction::majority(3).unwrap();
        let rho = BigRational::new((-1).into(), 3.into());
        let v = correlated_expectation_exact(&maj, &maj, &rho).unwrap();
        assert_eq!(v, BigRational::new((-7).into(), 27.into()));
    }

    #[test]
    fn averaging_examples() {
        let maj = BooleanFunction::majority(3).unwrap().to_bounded();
        assert_eq!(average_over_coords(&maj, &[]).unwrap(), maj);
        let all = average_over_coords(&maj, &[0, 1, 2]).unwrap();
        assert!(all.values().iter().all(|&v| v == maj.mean()));
        let avg = average_over_coords(&maj, &[0]).unwrap();
        assert!(avg.ignores(0));
        for x in 0..8usize {
            let (b1, b2) = (x >> 1 & 1, x >> 2 & 1);
            let expected = if b1 != b2 { 0.0 } else if b1 == 1 { 1.0 } else { -1.0 };
            assert_eq!(avg.value(x), expected);
        }
    }

    #[test]
    fn averaging_preserves_mean_and_shrinks_influences() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let n = rng.random_range(1..=8);
            let f = BoundedFunction::new(n, (0..1 << n).map(|_| rng.random_range(-1.0..=1.0)).collect()).unwrap();
            let coords: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.4)).collect();
            let g = average_over_coords(&f, &coords).unwrap();
            assert!(close(g.mean(), f.mean(), 1e-12));
            for &i in &coords {
                assert!(g.ignores(i));
            }
            let (fi, gi) = (influences(&f), influences(&g));
            for i in 0..n {
                assert!(gi[i] <= fi[i] + 1e-12);
            }
        }
    }

    #[test]
    fn nearest_simple_examples() {
        let f = BooleanFunction::dictator(4, 3, 1).unwrap();
        assert_eq!(nearest_simple(&f), (SimpleFunction::Dictator { voter: 3, sign: 1 }, 0.0));
        let mut g = BooleanFunction::constant(3, 1).unwrap();
        g.flip(5);
        assert_eq!(nearest_simple(&g), (SimpleFunction::Constant(1), 0.125));
        // Majority on 3 is 1/4 from each dictator and 1/2 from constants;
        // ties go to the earliest candidate.
        let maj = BooleanFunction::majority(3).unwrap();
        assert_eq!(nearest_simple(&maj), (SimpleFunction::Dictator { voter: 0, sign: 1 }, 0.25));
    }

    #[test]
    fn low_influence_functions_are_near_constants() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut checked = 0;
        for _ in 0..2000 {
            let n = rng.random_range(1..=8);
            // Sparse random sets give low influences.
            let density = rng.random_range(0.0..0.05);
            let f = BooleanFunction::from_fn(n, |_| !rng.random_bool(density)).unwrap();
            let inf: Vec<f64> = (0..n).map(|i| influence(&f, i).unwrap()).collect();
            let eps = n as f64 * inf.iter().cloned().fold(0.0, f64::max);
            let best_constant = (f.len() - f.count_plus()).min(f.count_plus()) as f64 / f.len() as f64;
            assert!(best_constant <= 2.0 * eps + 1e-15);
            checked += 1;
        }
        assert_eq!(checked, 2000);
    }

    #[test]
    fn orientation_and_restriction() {
        let maj = BooleanFunction::majority(3).unwrap();
        // Majority is odd, so reading it from the other side changes nothing.
        assert_eq!(maj.reverse_orientation(), maj);
        let d = BooleanFunction::dictator(3, 1, 1).unwrap();
        assert_eq!(d.reverse_orientation(), d);
        let c = BooleanFunction::constant(2, 1).unwrap();
        assert_eq!(c.reverse_orientation(), BooleanFunction::constant(2, -1).unwrap());

        let fixed = maj.restrict_coordinate(0, 1).unwrap();
        // OR of the remaining two.
        assert_eq!(fixed.signs(), vec![-1, 1, 1, 1]);
        let shifted = d.restrict_coordinate(0, -1).unwrap();
        assert_eq!(shifted, BooleanFunction::dictator(2, 0, 1).unwrap());
    }

    #[test]
    fn table_cap() {
        assert!(matches!(BooleanFunction::constant(26, 1), Err(Error::TooManyVariables { .. })));
        assert!(BoundedFunction::new(1, vec![0.0, 1.5]).is_err());
    }
}
