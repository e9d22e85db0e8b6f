//! Single-voter distributions over rankings and the pairwise statistics they
//! induce.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::quantity::{rational_to_f64, Quantity};
use crate::ranking::{all_rankings, factorial, Ranking, RankingTable, MAX_ALTERNATIVES};

const FLOAT_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum Weights {
    Exact(Vec<BigRational>),
    Float(Vec<f64>),
}

/// A probability vector over the `k!` rankings, indexed as in
/// [`Ranking::index`].
#[derive(Clone, Debug)]
pub struct VoteDistribution {
    k: usize,
    weights: Weights,
    symmetric: bool,
    rankings: Vec<Ranking>,
    table: RankingTable,
}

impl VoteDistribution {
    pub fn uniform(k: usize) -> Self {
        let m = factorial(k) as i64;
        let p = BigRational::new(BigInt::one(), BigInt::from(m));
        Self::from_rationals(k, vec![p; m as usize]).expect("uniform is valid")
    }

    pub fn point_mass(ranking: &Ranking) -> Self {
        let k = ranking.k();
        let mut probs = vec![BigRational::zero(); factorial(k)];
        probs[ranking.index()] = BigRational::one();
        Self::from_rationals(k, probs).expect("point mass is valid")
    }

    /// Uniform over the given rankings (duplicates count twice).
    pub fn uniform_on(k: usize, support: &[Ranking]) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        let mut counts = vec![0i64; factorial(k)];
        for r in support {
            if r.k() != k {
                return Err(Error::ShapeMismatch("support ranking has wrong k".into()));
            }
            counts[r.index()] += 1;
        }
        let total = BigInt::from(support.len());
        let probs = counts
            .into_iter()
            .map(|c| BigRational::new(BigInt::from(c), total.clone()))
            .collect();
        Self::from_rationals(k, probs)
    }

    pub fn from_rationals(k: usize, probs: Vec<BigRational>) -> Result<Self> {
        check_k(k, probs.len())?;
        if probs.iter().any(|p| p.is_negative()) {
            return Err(Error::InvalidDistribution("negative probability".into()));
        }
        let total: BigRational = probs.iter().sum();
        if !total.is_one() {
            return Err(Error::InvalidDistribution(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self::build(k, Weights::Exact(probs)))
    }

    pub fn from_floats(k: usize, probs: Vec<f64>) -> Result<Self> {
        check_k(k, probs.len())?;
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidDistribution("probabilities must be finite and nonnegative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > FLOAT_SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self::build(k, Weights::Float(probs)))
    }

    fn build(k: usize, weights: Weights) -> Self {
        let rankings = all_rankings(k);
        let symmetric = rankings.iter().all(|r| {
            let (i, j) = (r.index(), r.reversal().index());
            match &weights {
                Weights::Exact(p) => p[i] == p[j],
                Weights::Float(p) => (p[i] - p[j]).abs() <= FLOAT_SUM_TOLERANCE,
            }
        });
        VoteDistribution { k, weights, symmetric, rankings, table: RankingTable::new(k) }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.rankings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rankings.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.weights, Weights::Exact(_))
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    pub fn rankings(&self) -> &[Ranking] {
        &self.rankings
    }

    pub fn table(&self) -> &RankingTable {
        &self.table
    }

    pub fn prob(&self, index: usize) -> f64 {
        match &self.weights {
            Weights::Exact(p) => rational_to_f64(&p[index]),
            Weights::Float(p) => p[index],
        }
    }

    pub fn prob_quantity(&self, index: usize) -> Quantity {
        match &self.weights {
            Weights::Exact(p) => Quantity::Exact(p[index].clone()),
            Weights::Float(p) => Quantity::Approx(p[index]),
        }
    }

    /// The minimal atom.
    pub fn alpha(&self) -> Quantity {
        match &self.weights {
            Weights::Exact(p) => Quantity::Exact(p.iter().min().cloned().expect("nonempty")),
            Weights::Float(p) => Quantity::Approx(p.iter().cloned().fold(f64::INFINITY, f64::min)),
        }
    }

    /// Same distribution with float weights.
    pub fn to_float(&self) -> Self {
        let probs = (0..self.len()).map(|i| self.prob(i)).collect();
        Self::build(self.k, Weights::Float(probs))
    }

    /// Integer numerators over the least common denominator, when exact.
    pub fn integer_weights(&self) -> Option<(Vec<BigInt>, BigInt)> {
        let Weights::Exact(p) = &self.weights else { return None };
        let den = p.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
        let nums = p.iter().map(|q| q.numer() * (&den / q.denom())).collect();
        Some((nums, den))
    }

    /// `E[g(σ)]` for an integer-valued statistic of one voter's ranking.
    pub fn expectation<G: Fn(&Ranking) -> i64>(&self, g: G) -> Quantity {
        match &self.weights {
            Weights::Exact(p) => Quantity::Exact(
                self.rankings
                    .iter()
                    .zip(p)
                    .map(|(r, w)| w * BigInt::from(g(r)))
                    .sum(),
            ),
            Weights::Float(p) => {
                Quantity::Approx(self.rankings.iter().zip(p).map(|(r, w)| w * g(r) as f64).sum())
            }
        }
    }

    /// `E[x^{a>b}(i)]` for a single voter.
    pub fn pair_marginal(&self, a: usize, b: usize) -> Quantity {
        self.expectation(|r| sign(r, a, b))
    }

    /// True when every pair marginal is zero (exactly, or to 1e-12 in float mode).
    pub fn has_unbiased_pairs(&self) -> bool {
        if self.symmetric {
            return true;
        }
        let pairs = self.table.pairs().to_vec();
        pairs.iter().all(|&(a, b)| match self.pair_marginal(a, b) {
            Quantity::Exact(m) => m.is_zero(),
            Quantity::Approx(m) => m.abs() <= FLOAT_SUM_TOLERANCE,
        })
    }

    fn check_alt(&self, alt: usize) -> Result<()> {
        if alt >= self.k {
            Err(Error::AlternativeOutOfRange { alt, k: self.k })
        } else {
            Ok(())
        }
    }

    /// A sampler drawing ranking indices with these probabilities.
    pub fn sampler(&self) -> RankingSampler {
        if let Some((nums, den)) = self.integer_weights() {
            if let Some(total) = den.to_u64() {
                let mut acc = 0u64;
                let cumulative = nums
                    .iter()
                    .map(|n| {
                        acc += n.to_u64().expect("numerator at most the denominator");
                        acc
                    })
                    .collect();
                return RankingSampler::Exact { cumulative, total };
            }
        }
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = (0..self.len())
            .map(|i| {
                acc += self.prob(i);
                acc
            })
            .collect();
        // The last ranking with positive mass absorbs rounding.
        if let Some(last) = (0..self.len()).rev().find(|&i| self.prob(i) > 0.0) {
            for c in &mut cumulative[last..] {
                *c = f64::INFINITY;
            }
        }
        RankingSampler::Float { cumulative }
    }
}

fn check_k(k: usize, len: usize) -> Result<()> {
    if !(2..=MAX_ALTERNATIVES).contains(&k) {
        return Err(Error::InvalidDistribution(format!("k = {k} not in 2..={MAX_ALTERNATIVES}")));
    }
    if len != factorial(k) {
        return Err(Error::InvalidDistribution(format!("expected {} probabilities, got {len}", factorial(k))));
    }
    Ok(())
}

fn sign(r: &Ranking, a: usize, b: usize) -> i64 {
    if r.prefers(a, b) {
        1
    } else {
        -1
    }
}

/// Draws ranking indices; exact integer arithmetic when the distribution is
/// rational with a denominator that fits in `u64`.
#[derive(Clone, Debug)]
pub enum RankingSampler {
    Exact { cumulative: Vec<u64>, total: u64 },
    Float { cumulative: Vec<f64> },
}

impl RankingSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match self {
            RankingSampler::Exact { cumulative, total } => {
                let x = rng.random_range(0..*total);
                cumulative.partition_point(|&c| c <= x)
            }
            RankingSampler::Float { cumulative } => {
                let u: f64 = rng.random();
                cumulative.partition_point(|&c| c <= u)
            }
        }
    }
}

pub fn sample_ranking<R: Rng + ?Sized>(mu: &VoteDistribution, rng: &mut R) -> Ranking {
    mu.rankings()[mu.sampler().sample(rng)].clone()
}

/// Single-voter `E[x^{p1}(i) x^{p2}(i)]` for ordered pairs.
pub fn pair_correlation(
    mu: &VoteDistribution,
    p1: (usize, usize),
    p2: (usize, usize),
) -> Result<Quantity> {
    for alt in [p1.0, p1.1, p2.0, p2.1] {
        mu.check_alt(alt)?;
    }
    for (a, b) in [p1, p2] {
        if a == b {
            return Err(Error::IdenticalAlternatives(a));
        }
    }
    Ok(mu.expectation(|r| sign(r, p1.0, p1.1) * sign(r, p2.0, p2.1)))
}

/// Squared L2 norm of `E[x^target | x^given.0, x^given.1]` for one voter.
pub fn conditional_l2_squared(
    mu: &VoteDistribution,
    target: (usize, usize),
    given: ((usize, usize), (usize, usize)),
) -> Result<Quantity> {
    let pairs = [target, given.0, given.1];
    for &(a, b) in &pairs {
        mu.check_alt(a)?;
        mu.check_alt(b)?;
        if a == b {
            return Err(Error::DegeneratePairs);
        }
    }
    let mut alts: Vec<usize> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    alts.sort_unstable();
    alts.dedup();
    let mut unordered: Vec<(usize, usize)> =
        pairs.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    unordered.sort_unstable();
    unordered.dedup();
    if alts.len() != 3 || unordered.len() != 3 {
        return Err(Error::DegeneratePairs);
    }

    // cell = (given.0 sign, given.1 sign); accumulate P(cell) and E[x^t; cell].
    let cell = |r: &Ranking| {
        let u = (sign(r, given.0 .0, given.0 .1) > 0) as usize;
        let v = (sign(r, given.1 .0, given.1 .1) > 0) as usize;
        2 * u + v
    };
    match mu.weights() {
        Weights::Exact(p) => {
            let mut mass = vec![BigRational::zero(); 4];
            let mut moment = vec![BigRational::zero(); 4];
            for (r, w) in mu.rankings().iter().zip(p) {
                let c = cell(r);
                mass[c] += w;
                moment[c] += w * BigInt::from(sign(r, target.0, target.1));
            }
            let total = mass
                .iter()
                .zip(&moment)
                .filter(|(m, _)| !m.is_zero())
                .map(|(m, e)| e * e / m)
                .sum();
            Ok(Quantity::Exact(total))
        }
        Weights::Float(p) => {
            let mut mass = [0.0; 4];
            let mut moment = [0.0; 4];
            for (r, w) in mu.rankings().iter().zip(p) {
                let c = cell(r);
                mass[c] += w;
                moment[c] += w * sign(r, target.0, target.1) as f64;
            }
            let total = mass
                .iter()
                .zip(&moment)
                .filter(|(m, _)| **m > 0.0)
                .map(|(m, e)| e * e / m)
                .sum();
            Ok(Quantity::Approx(total))
        }
    }
}

pub fn conditional_l2(
    mu: &VoteDistribution,
    target: (usize, usize),
    given: ((usize, usize), (usize, usize)),
) -> Result<f64> {
    Ok(conditional_l2_squared(mu, target, given)?.to_f64().sqrt())
}

/// A random symmetric rational distribution on `S(k)` with integer weights
/// drawn from `1..=max_weight` for each reversal pair.
pub fn random_symmetric<R: Rng + ?Sized>(k: usize, max_weight: u32, rng: &mut R) -> VoteDistribution {
    let rankings = all_rankings(k);
    let mut raw = vec![0i64; rankings.len()];
    for r in &rankings {
        let (i, j) = (r.index(), r.reversal().index());
        if i < j {
            let w = rng.random_range(1..=max_weight) as i64;
            raw[i] = w;
            raw[j] = w;
        }
    }
    let total = BigInt::from(raw.iter().sum::<i64>());
    let probs = raw
        .into_iter()
        .map(|w| BigRational::new(BigInt::from(w), total.clone()))
        .collect();
    VoteDistribution::from_rationals(k, probs).expect("normalized")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn r(order: &[usize]) -> Ranking {
        Ranking::from_order(order).unwrap()
    }

    #[test]
    fn uniform_correlation_is_minus_one_third() {
        let mu = VoteDistribution::uniform(3);
        for (p1, p2) in [((0, 1), (1, 2)), ((1, 2), (2, 0)), ((2, 0), (0, 1))] {
            assert_eq!(pair_correlation(&mu, p1, p2).unwrap(), Quantity::ratio(-1, 3));
        }
        assert_eq!(pair_correlation(&mu, (0, 1), (0, 1)).unwrap(), Quantity::ratio(1, 1));
    }

    #[test]
    fn two_atom_correlation() {
        let mu = VoteDistribution::uniform_on(3, &[r(&[0, 1, 2]), r(&[2, 1, 0])]).unwrap();
        assert_eq!(pair_correlation(&mu, (0, 1), (1, 2)).unwrap(), Quantity::ratio(1, 1));
        let l2 = conditional_l2(&mu, (2, 0), ((0, 1), (1, 2))).unwrap();
        assert!((l2 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_conditional_l2() {
        let mu = VoteDistribution::uniform(3);
        let sq = conditional_l2_squared(&mu, (2, 0), ((0, 1), (1, 2))).unwrap();
        assert_eq!(sq, Quantity::ratio(1, 3));
        let l2 = conditional_l2(&mu, (2, 0), ((0, 1), (1, 2))).unwrap();
        assert!((l2 - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        // Uniform on S(4) marginalizes to uniform on any triple.
        let mu4 = VoteDistribution::uniform(4);
        let l2 = conditional_l2(&mu4, (3, 1), ((1, 2), (2, 3))).unwrap();
        assert!((l2 - 1.0 / 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn degenerate_pairs_rejected() {
        let mu = VoteDistribution::uniform(4);
        assert!(matches!(
            conditional_l2(&mu, (0, 1), ((0, 1), (1, 2))),
            Err(Error::DegeneratePairs)
        ));
        assert!(matches!(
            conditional_l2(&mu, (0, 3), ((0, 1), (1, 2))),
            Err(Error::DegeneratePairs)
        ));
    }

    #[test]
    fn symmetric_marginals_vanish_and_bounds_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let mu = random_symmetric(3, 20, &mut rng);
            assert!(mu.is_symmetric());
            let alpha = mu.alpha().to_f64();
            for (a, b) in [(0, 1), (1, 2), (0, 2)] {
                assert_eq!(mu.pair_marginal(a, b), Quantity::ratio(0, 1));
            }
            let rho = pair_correlation(&mu, (0, 1), (1, 2)).unwrap().to_f64();
            assert!(rho.abs() <= 1.0 - 4.0 * alpha + 1e-15);
            let l2 = conditional_l2(&mu, (2, 0), ((0, 1), (1, 2))).unwrap();
            assert!(l2 <= (1.0 - 4.0 * alpha).sqrt() + 1e-12);
        }
    }

    #[test]
    fn validation() {
        assert!(VoteDistribution::from_floats(3, vec![0.5; 6]).is_err());
        assert!(VoteDistribution::from_floats(3, vec![1.0 / 6.0; 5]).is_err());
        let mut p = vec![BigRational::new(1.into(), 6.into()); 6];
        p[0] = BigRational::new(1.into(), 3.into());
        assert!(VoteDistribution::from_rationals(3, p).is_err());
        let mu = VoteDistribution::from_floats(3, vec![1.0 / 6.0; 6]).unwrap();
        assert!(mu.is_symmetric());
        assert!((mu.alpha().to_f64() - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn point_mass_always_samples_its_ranking() {
        let target = r(&[1, 2, 0]);
        let mu = VoteDistribution::point_mass(&target);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            assert_eq!(sample_ranking(&mu, &mut rng), target);
        }
        let float = mu.to_float();
        for _ in 0..1000 {
            assert_eq!(sample_ranking(&float, &mut rng), target);
        }
    }

    #[test]
    fn uniform_sampling_frequencies() {
        let draws = 600_000;
        for mu in [VoteDistribution::uniform(3), VoteDistribution::uniform(3).to_float()] {
            let sampler = mu.sampler();
            let mut rng = ChaCha8Rng::seed_from_u64(42);
            let mut counts = [0u64; 6];
            for _ in 0..draws {
                counts[sampler.sample(&mut rng)] += 1;
            }
            let p = 1.0 / 6.0;
            let sigma = (p * (1.0 - p) / draws as f64).sqrt();
            for c in counts {
                assert!((c as f64 / draws as f64 - p).abs() < 5.0 * sigma);
            }
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let mu = VoteDistribution::uniform(4);
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            (0..100).map(|_| sample_ranking(&mu, &mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }
}
