//! IIA constitutions: one Boolean function per unordered pair of alternatives.

use num_rational::BigRational;
use num_traits::One;
use std::sync::OnceLock;

use crate::boolfn::{correlated_expectation, correlated_expectation_exact, BooleanFunction};
use crate::distribution::{pair_correlation, VoteDistribution, Weights};
use crate::enumerate::{self, DigitWeights};
use crate::error::{Error, Result};
use crate::quantity::Quantity;
use crate::ranking::{canonical_pairs, factorial, pair_index, Profile, Ranking, RankingTable, MAX_ALTERNATIVES};

/// `pairs[p]` decides canonical pair `p = (a, b)`, `a < b`: `+1` means `a`
/// is ranked above `b`. The opposite orientation is derived, never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Constitution {
    k: usize,
    n: usize,
    pairs: Vec<BooleanFunction>,
}

/// Pairwise social decisions, stored as a mask over canonical pairs (bit `p`
/// set iff the lower alternative of pair `p` wins).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct OutcomeTournament {
    k: usize,
    mask: u64,
}

impl OutcomeTournament {
    pub fn from_mask(k: usize, mask: u64) -> Self {
        OutcomeTournament { k, mask }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn prefers(&self, a: usize, b: usize) -> bool {
        let bit = self.mask >> pair_index(self.k, a, b) & 1 == 1;
        if a < b {
            bit
        } else {
            !bit
        }
    }

    /// The ranking this tournament encodes, if it is transitive.
    pub fn ranking(&self) -> Option<Ranking> {
        let wins = self.wins();
        let mut seen = vec![false; self.k];
        let mut ranks = Vec::with_capacity(self.k);
        for w in wins {
            let r = self.k - 1 - w;
            if seen[r] {
                return None;
            }
            seen[r] = true;
            ranks.push(r);
        }
        Ranking::from_ranks(&ranks).ok()
    }

    fn wins(&self) -> Vec<usize> {
        let mut wins = vec![0; self.k];
        for (p, (a, b)) in canonical_pairs(self.k).into_iter().enumerate() {
            if self.mask >> p & 1 == 1 {
                wins[a] += 1;
            } else {
                wins[b] += 1;
            }
        }
        wins
    }
}

/// True iff the tournament is a total order, i.e. all win counts differ.
pub fn is_transitive(t: &OutcomeTournament) -> bool {
    t.ranking().is_some()
}

/// Lookup of transitive outcome masks for small `k`.
fn transitive_lookup(k: usize) -> Option<&'static [bool]> {
    static TABLES: OnceLock<Vec<Vec<bool>>> = OnceLock::new();
    let tables = TABLES.get_or_init(|| {
        (0..=6)
            .map(|k| {
                if k < 2 {
                    return vec![true];
                }
                let table = RankingTable::new(k);
                let mut ok = vec![false; 1 << (k * (k - 1) / 2)];
                for r in 0..table.len() {
                    ok[table.pair_mask(r) as usize] = true;
                }
                ok
            })
            .collect()
    });
    tables.get(k).map(Vec::as_slice)
}

pub(crate) fn mask_is_transitive(k: usize, mask: u64) -> bool {
    match transitive_lookup(k) {
        Some(t) => t[mask as usize],
        None => is_transitive(&OutcomeTournament::from_mask(k, mask)),
    }
}

impl Constitution {
    /// `pairs` in canonical order (see [`canonical_pairs`]).
    pub fn new(k: usize, n: usize, pairs: Vec<BooleanFunction>) -> Result<Self> {
        if !(2..=MAX_ALTERNATIVES).contains(&k) {
            return Err(Error::InvalidParameter(format!("k = {k} not in 2..={MAX_ALTERNATIVES}")));
        }
        let expected = k * (k - 1) / 2;
        if pairs.len() != expected {
            return Err(Error::ShapeMismatch(format!("{} pair functions for k = {k}, expected {expected}", pairs.len())));
        }
        if let Some(f) = pairs.iter().find(|f| f.n() != n) {
            return Err(Error::ShapeMismatch(format!("pair function has n = {}, constitution has n = {n}", f.n())));
        }
        Ok(Constitution { k, n, pairs })
    }

    pub fn from_fn<F: FnMut(usize, usize) -> BooleanFunction>(k: usize, n: usize, mut f: F) -> Result<Self> {
        let pairs = canonical_pairs(k).into_iter().map(|(a, b)| f(a, b)).collect();
        Self::new(k, n, pairs)
    }

    /// Follows voter `voter`'s ranking, or its reversal when `sign < 0`.
    pub fn dictator(k: usize, n: usize, voter: usize, sign: i8) -> Result<Self> {
        let f = BooleanFunction::dictator(n, voter, sign)?;
        Self::from_fn(k, n, |_, _| f.clone())
    }

    /// Always outputs `ranking`.
    pub fn constant(ranking: &Ranking, n: usize) -> Result<Self> {
        Self::from_fn(ranking.k(), n, |a, b| {
            BooleanFunction::constant(n, if ranking.prefers(a, b) { 1 } else { -1 }).expect("n checked by caller")
        })
    }

    /// Pairwise majority; `n` must be odd.
    pub fn majority(k: usize, n: usize) -> Result<Self> {
        let f = BooleanFunction::majority(n)?;
        Self::from_fn(k, n, |_, _| f.clone())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pair_functions(&self) -> &[BooleanFunction] {
        &self.pairs
    }

    /// `f^{a>b}` for either orientation.
    pub fn oriented(&self, a: usize, b: usize) -> Result<BooleanFunction> {
        self.check_pair(a, b)?;
        let f = &self.pairs[pair_index(self.k, a, b)];
        Ok(if a < b { f.clone() } else { f.reverse_orientation() })
    }

    pub fn set_pair(&mut self, a: usize, b: usize, f: BooleanFunction) -> Result<()> {
        self.check_pair(a, b)?;
        if f.n() != self.n {
            return Err(Error::ShapeMismatch(format!("n = {} for a constitution with n = {}", f.n(), self.n)));
        }
        self.pairs[pair_index(self.k, a, b)] = if a < b { f } else { f.reverse_orientation() };
        Ok(())
    }

    fn check_pair(&self, a: usize, b: usize) -> Result<()> {
        if a == b {
            return Err(Error::IdenticalAlternatives(a));
        }
        for alt in [a, b] {
            if alt >= self.k {
                return Err(Error::AlternativeOutOfRange { alt, k: self.k });
            }
        }
        Ok(())
    }

    /// Outcome mask from per-pair table indices.
    #[inline]
    pub(crate) fn outcome_mask(&self, indices: &[usize]) -> u64 {
        self.pairs
            .iter()
            .zip(indices)
            .enumerate()
            .fold(0u64, |m, (p, (f, &x))| m | ((f.is_plus(x) as u64) << p))
    }

    pub fn evaluate(&self, profile: &Profile) -> Result<OutcomeTournament> {
        if profile.n() != self.n {
            return Err(Error::ShapeMismatch(format!("profile has {} voters, constitution {}", profile.n(), self.n)));
        }
        if self.n > 0 && profile.k() != Some(self.k) {
            return Err(Error::ShapeMismatch(format!("profile has k = {:?}, constitution k = {}", profile.k(), self.k)));
        }
        let indices: Vec<usize> = canonical_pairs(self.k)
            .into_iter()
            .map(|(a, b)| {
                profile
                    .voters()
                    .iter()
                    .enumerate()
                    .filter(|(_, r)| r.prefers(a, b))
                    .fold(0, |acc, (i, _)| acc | (1 << i))
            })
            .collect();
        Ok(OutcomeTournament { k: self.k, mask: self.outcome_mask(&indices) })
    }

    /// Probability that `pred` holds for the per-pair table indices of a
    /// random profile drawn from `mu`.
    pub(crate) fn profile_probability<P>(&self, mu: &VoteDistribution, budget: u64, pred: P) -> Result<Quantity>
    where
        P: Fn(&[usize]) -> bool + Sync,
    {
        if mu.k() != self.k {
            return Err(Error::ShapeMismatch(format!("distribution k = {}, constitution k = {}", mu.k(), self.k)));
        }
        let (masks, weights) = profile_space(mu);
        enumerate::probability(&masks, &weights, self.k * (self.k - 1) / 2, self.n, budget, pred)
    }

    /// `P(F)`: the probability of a non-transitive outcome, by enumerating
    /// every profile in the support of `mu^n`.
    pub fn paradox_probability_exact(&self, mu: &VoteDistribution, budget: u64) -> Result<Quantity> {
        let k = self.k;
        self.profile_probability(mu, budget, |idx| !mask_is_transitive(k, self.outcome_mask(idx)))
    }

    /// `T(F) = 1 - P(F)`.
    pub fn transitive_probability(&self, mu: &VoteDistribution, budget: u64) -> Result<Quantity> {
        Ok(self.paradox_probability_exact(mu, budget)?.complement())
    }

    /// The three correlation terms `E[f^{ab} f^{bc}]`, `E[f^{bc} f^{ca}]`,
    /// `E[f^{ca} f^{ab}]` of Kalai's formula.
    pub fn kalai_terms(&self, mu: &VoteDistribution) -> Result<[Quantity; 3]> {
        if self.k != 3 {
            return Err(Error::UnsupportedK { k: self.k, expected: 3 });
        }
        if mu.k() != 3 {
            return Err(Error::ShapeMismatch(format!("distribution k = {}", mu.k())));
        }
        if !mu.has_unbiased_pairs() {
            return Err(Error::AsymmetricDistribution);
        }
        let oriented = [(0, 1), (1, 2), (2, 0)];
        let funcs: Vec<BooleanFunction> =
            oriented.iter().map(|&(a, b)| self.oriented(a, b)).collect::<Result<_>>()?;
        let mut terms = Vec::with_capacity(3);
        for t in 0..3 {
            let (p, q) = (t, (t + 1) % 3);
            let rho = pair_correlation(mu, oriented[p], oriented[q])?;
            terms.push(match rho {
                Quantity::Exact(r) => Quantity::Exact(correlated_expectation_exact(&funcs[p], &funcs[q], &r)?),
                Quantity::Approx(r) => Quantity::Approx(correlated_expectation(
                    &funcs[p].to_bounded(),
                    &funcs[q].to_bounded(),
                    &vec![r; self.n],
                )?),
            });
        }
        Ok(terms.try_into().expect("three terms"))
    }

    /// `P(F)` by Kalai's formula `¼(1 + Σ E[f f'])`; needs `k = 3` and
    /// unbiased pair marginals.
    pub fn paradox_probability_kalai(&self, mu: &VoteDistribution) -> Result<Quantity> {
        let terms = self.kalai_terms(mu)?;
        Ok(match terms {
            [Quantity::Exact(a), Quantity::Exact(b), Quantity::Exact(c)] => {
                let quarter = BigRational::new(1.into(), 4.into());
                Quantity::Exact(quarter * (BigRational::one() + a + b + c))
            }
            _ => Quantity::Approx(0.25 * (1.0 + terms.iter().map(Quantity::to_f64).sum::<f64>())),
        })
    }

    /// `D(F, G)`: probability that the full outcomes differ.
    pub fn distance(&self, other: &Constitution, mu: &VoteDistribution, budget: u64) -> Result<Quantity> {
        if self.k != other.k || self.n != other.n {
            return Err(Error::ShapeMismatch(format!(
                "(k, n) = ({}, {}) vs ({}, {})",
                self.k, self.n, other.k, other.n
            )));
        }
        self.profile_probability(mu, budget, |idx| self.outcome_mask(idx) != other.outcome_mask(idx))
    }

    /// `F_A`, with the alternatives of `subset` renumbered in sorted order.
    pub fn restrict(&self, subset: &[usize]) -> Result<Self> {
        let mut alts = subset.to_vec();
        alts.sort_unstable();
        alts.dedup();
        if alts.len() < 2 {
            return Err(Error::TooFewAlternatives(alts.len()));
        }
        if let Some(&alt) = alts.iter().find(|&&a| a >= self.k) {
            return Err(Error::AlternativeOutOfRange { alt, k: self.k });
        }
        Self::from_fn(alts.len(), self.n, |a, b| self.pairs[pair_index(self.k, alts[a], alts[b])].clone())
    }

    /// Fixes `voter`'s ranking and drops that voter; later voters shift down.
    pub fn conditional_restriction(&self, voter: usize, ranking: &Ranking) -> Result<Self> {
        if voter >= self.n {
            return Err(Error::InvalidParameter(format!("voter {voter} out of range for n = {}", self.n)));
        }
        if ranking.k() != self.k {
            return Err(Error::ShapeMismatch(format!("ranking has k = {}", ranking.k())));
        }
        let pairs = canonical_pairs(self.k)
            .into_iter()
            .zip(&self.pairs)
            .map(|((a, b), f)| f.restrict_coordinate(voter, if ranking.prefers(a, b) { 1 } else { -1 }))
            .collect::<Result<_>>()?;
        Self::new(self.k, self.n - 1, pairs)
    }
}

/// Per-ranking pair masks and weights over the support of `mu`.
pub(crate) fn profile_space(mu: &VoteDistribution) -> (Vec<u64>, DigitWeights) {
    let support: Vec<usize> = (0..mu.len()).filter(|&r| mu.prob(r) > 0.0).collect();
    let masks = support.iter().map(|&r| mu.table().pair_mask(r)).collect();
    let weights = match (mu.weights(), mu.integer_weights()) {
        (Weights::Exact(_), Some((nums, den))) => {
            DigitWeights::Exact { nums: support.iter().map(|&r| nums[r].clone()).collect(), den }
        }
        _ => DigitWeights::Float(support.iter().map(|&r| mu.prob(r)).collect()),
    };
    (masks, weights)
}

/// Profile built from support-local digits as returned by the enumerator.
pub(crate) fn profile_from_digits(mu: &VoteDistribution, digits: &[usize]) -> Profile {
    let support: Vec<usize> = (0..mu.len()).filter(|&r| mu.prob(r) > 0.0).collect();
    Profile::from_indices(mu.k(), &digits.iter().map(|&d| support[d]).collect::<Vec<_>>()).expect("valid indices")
}

/// A profile with a non-transitive outcome, searching all `(k!)^n` profiles.
pub fn find_paradox_profile(f: &Constitution, budget: u64) -> Result<Option<Profile>> {
    let mu = VoteDistribution::uniform(f.k);
    let (masks, _) = profile_space(&mu);
    let k = f.k;
    let hit = enumerate::find_first(&masks, k * (k - 1) / 2, f.n, budget, |idx| {
        !mask_is_transitive(k, f.outcome_mask(idx))
    })?;
    Ok(hit.map(|digits| profile_from_digits(&mu, &digits)))
}

/// Number of profiles `(k!)^n`, saturating.
pub fn profile_count(k: usize, n: usize) -> u128 {
    (factorial(k) as u128).checked_pow(n as u32).unwrap_or(u128::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::random_symmetric;
    use crate::enumerate::DEFAULT_BUDGET;
    use crate::ranking::all_rankings;
    use num_traits::Zero;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn r(order: &[usize]) -> Ranking {
        Ranking::from_order(order).unwrap()
    }

    /// Oracle: evaluate every profile one by one with exact weights.
    fn brute_paradox(f: &Constitution, mu: &VoteDistribution) -> BigRational {
        let m = factorial(f.k());
        let mut total = BigRational::zero();
        for code in 0..m.pow(f.n() as u32) {
            let mut c = code;
            let idx: Vec<usize> = (0..f.n())
                .map(|_| {
                    let d = c % m;
                    c /= m;
                    d
                })
                .collect();
            let profile = Profile::from_indices(f.k(), &idx).unwrap();
            if !is_transitive(&f.evaluate(&profile).unwrap()) {
                let w: BigRational =
                    idx.iter().map(|&i| mu.prob_quantity(i).as_exact().unwrap().clone()).product();
                total += w;
            }
        }
        total
    }

    fn exact(q: Quantity) -> BigRational {
        q.as_exact().expect("exact").clone()
    }

    fn random_constitution(rng: &mut ChaCha8Rng, k: usize, n: usize) -> Constitution {
        Constitution::from_fn(k, n, |_, _| BooleanFunction::random(n, rng).unwrap()).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let d = Constitution::dictator(3, 3, 1, 1).unwrap();
        for ranking in all_rankings(3) {
            let p = Profile::new(vec![r(&[0, 1, 2]), ranking.clone(), r(&[2, 0, 1])]).unwrap();
            assert_eq!(d.evaluate(&p).unwrap().ranking(), Some(ranking));
        }
        let fixed = r(&[0, 1, 2]);
        let c = Constitution::constant(&fixed, 2).unwrap();
        let p = Profile::new(vec![r(&[2, 1, 0]), r(&[1, 2, 0])]).unwrap();
        assert_eq!(c.evaluate(&p).unwrap().ranking(), Some(fixed));

        let maj = Constitution::majority(3, 3).unwrap();
        let condorcet = Profile::new(vec![r(&[0, 1, 2]), r(&[1, 2, 0]), r(&[2, 0, 1])]).unwrap();
        let t = maj.evaluate(&condorcet).unwrap();
        assert!(t.prefers(0, 1) && t.prefers(1, 2) && t.prefers(2, 0));
        assert!(!is_transitive(&t));
        assert!(maj.evaluate(&Profile::new(vec![r(&[0, 1, 2])]).unwrap()).is_err());
    }

    #[test]
    fn transitivity_examples() {
        let abc = OutcomeTournament::from_mask(3, 0b111);
        assert!(is_transitive(&abc));
        // a>b, b>c, c>a: pair (0,2) bit cleared.
        assert!(!is_transitive(&OutcomeTournament::from_mask(3, 0b101)));
        // k = 4: 0>1>2>0 cycle with 3 on the bottom.
        let mut mask = 0u64;
        for (p, (a, b)) in canonical_pairs(4).into_iter().enumerate() {
            let a_wins = match (a, b) {
                (0, 1) | (1, 2) => true,
                (0, 2) => false,
                _ => true,
            };
            if a_wins {
                mask |= 1 << p;
            }
        }
        assert!(!is_transitive(&OutcomeTournament::from_mask(4, mask)));
        assert!(!mask_is_transitive(4, mask));
        for k in 2..=7 {
            let table = RankingTable::new(k);
            for ranking in 0..table.len() {
                assert!(mask_is_transitive(k, table.pair_mask(ranking)));
            }
        }
    }

    #[test]
    fn condorcet_paradox_is_one_eighteenth() {
        let maj = Constitution::majority(3, 3).unwrap();
        let mu = VoteDistribution::uniform(3);
        let p = maj.paradox_probability_exact(&mu, DEFAULT_BUDGET).unwrap();
        assert_eq!(p, Quantity::ratio(1, 18));
        assert_eq!(exact(p.clone()), brute_paradox(&maj, &mu));
        assert_eq!(maj.paradox_probability_kalai(&mu).unwrap(), Quantity::ratio(1, 18));
        assert_eq!(maj.transitive_probability(&mu, DEFAULT_BUDGET).unwrap(), Quantity::ratio(17, 18));
    }

    #[test]
    fn degenerate_constitutions() {
        let mu = VoteDistribution::uniform(3);
        for voter in 0..3 {
            for sign in [1, -1] {
                let d = Constitution::dictator(3, 3, voter, sign).unwrap();
                assert_eq!(d.paradox_probability_exact(&mu, DEFAULT_BUDGET).unwrap(), Quantity::ratio(0, 1));
                assert_eq!(d.paradox_probability_kalai(&mu).unwrap(), Quantity::ratio(0, 1));
            }
        }
        // f^{ab} = f^{bc} = f^{ca} = 1 means f on the canonical (0,2) pair is -1.
        let plus = BooleanFunction::constant(2, 1).unwrap();
        let minus = BooleanFunction::constant(2, -1).unwrap();
        let cyclic = Constitution::new(3, 2, vec![plus.clone(), minus, plus]).unwrap();
        assert_eq!(cyclic.paradox_probability_exact(&mu, DEFAULT_BUDGET).unwrap(), Quantity::ratio(1, 1));
        assert_eq!(cyclic.paradox_probability_kalai(&mu).unwrap(), Quantity::ratio(1, 1));
    }

    #[test]
    fn parity_kalai_matches_closed_form_and_enumeration() {
        let mu = VoteDistribution::uniform(3);
        for n in 1..=5 {
            let p = BooleanFunction::parity(n).unwrap();
            // Same function on each oriented pair, so the canonical (0,2) entry is its reversal.
            let f = Constitution::new(3, n, vec![p.clone(), p.reverse_orientation(), p.clone()]).unwrap();
            let third = BigRational::new((-1).into(), 3.into());
            let expected = BigRational::new(1.into(), 4.into())
                * (BigRational::one() + BigRational::from_integer(3.into()) * num_traits::pow(third, n));
            assert_eq!(exact(f.paradox_probability_kalai(&mu).unwrap()), expected);
            assert_eq!(exact(f.paradox_probability_exact(&mu, DEFAULT_BUDGET).unwrap()), expected);
        }
    }

    #[test]
    fn kalai_equals_enumeration_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for t in 0..60 {
            let n = 1 + t % 4;
            let f = random_constitution(&mut rng, 3, n);
            let mu = if t % 2 == 0 { VoteDistribution::uniform(3) } else { random_symmetric(3, 9, &mut rng) };
            let e = f.paradox_probability_exact(&mu, DEFAULT_BUDGET).unwrap();
            assert_eq!(e, f.paradox_probability_kalai(&mu).unwrap());
            assert_eq!(exact(e), brute_paradox(&f, &mu));
            let float_mu = mu.to_float();
            let ef = f.paradox_probability_kalai(&float_mu).unwrap().to_f64();
            let xf = f.paradox_probability_exact(&float_mu, DEFAULT_BUDGET).unwrap().to_f64();
            assert!((ef - xf).abs() <= 1e-10);
        }
    }

    #[test]
    fn kalai_rejects_bad_inputs() {
        let f = Constitution::majority(4, 3).unwrap();
        assert!(matches!(
            f.paradox_probability_kalai(&VoteDistribution::uniform(4)),
            Err(Error::UnsupportedK { k: 4, expected: 3 })
        ));
        let g = Constitution::majority(3, 3).unwrap();
        let biased = VoteDistribution::point_mass(&r(&[0, 1, 2]));
        assert!(matches!(g.paradox_probability_kalai(&biased), Err(Error::AsymmetricDistribution)));
    }

    #[test]
    fn distance_examples() {
        let mu = VoteDistribution::uniform(3);
        let d1 = Constitution::dictator(3, 2, 0, 1).unwrap();
        let d2 = Constitution::dictator(3, 2, 1, 1).unwrap();
        assert_eq!(d1.distance(&d1, &mu, DEFAULT_BUDGET).unwrap(), Quantity::ratio(0, 1));
        assert_eq!(d1.distance(&d2, &mu, DEFAULT_BUDGET).unwrap(), Quantity::ratio(5, 6));
    }

    #[test]
    fn distance_is_subadditive_over_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mu = VoteDistribution::uniform(3);
        for _ in 0..30 {
            let n = rng.random_range(1..=4);
            let (f, g) = (random_constitution(&mut rng, 3, n), random_constitution(&mut rng, 3, n));
            let d = exact(f.distance(&g, &mu, DEFAULT_BUDGET).unwrap());
            // Pair marginals are uniform, so each pair's disagreement is a table distance.
            let bound: BigRational = f
                .pair_functions()
                .iter()
                .zip(g.pair_functions())
                .map(|(a, b)| {
                    let diff = (0..a.len()).filter(|&x| a.is_plus(x) != b.is_plus(x)).count();
                    BigRational::new(diff.into(), a.len().into())
                })
                .sum();
            assert!(d <= bound);
        }
    }

    #[test]
    fn restriction_examples() {
        let d = Constitution::dictator(4, 2, 1, -1).unwrap();
        assert_eq!(d.restrict(&[0, 1, 2, 3]).unwrap(), d);
        assert_eq!(d.restrict(&[3, 0, 2]).unwrap(), Constitution::dictator(3, 2, 1, -1).unwrap());
        assert!(matches!(d.restrict(&[2]), Err(Error::TooFewAlternatives(1))));
    }

    #[test]
    fn restriction_never_increases_paradox() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mu4 = VoteDistribution::uniform(4);
        let mu3 = VoteDistribution::uniform(3);
        for _ in 0..10 {
            let n = rng.random_range(1..=3);
            let f = random_constitution(&mut rng, 4, n);
            let p = exact(f.paradox_probability_exact(&mu4, DEFAULT_BUDGET).unwrap());
            for subset in [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]] {
                let sub = f.restrict(&subset).unwrap();
                assert!(exact(sub.paradox_probability_exact(&mu3, DEFAULT_BUDGET).unwrap()) <= p);
            }
        }
    }

    #[test]
    fn conditional_restriction_examples() {
        let abc = r(&[0, 1, 2]);
        let d = Constitution::dictator(3, 3, 0, 1).unwrap();
        assert_eq!(d.conditional_restriction(0, &abc).unwrap(), Constitution::constant(&abc, 2).unwrap());
        let d2 = Constitution::dictator(3, 3, 2, 1).unwrap();
        assert_eq!(d2.conditional_restriction(0, &abc).unwrap(), Constitution::dictator(3, 2, 1, 1).unwrap());
        assert!(d.conditional_restriction(3, &abc).is_err());
    }

    #[test]
    fn majority_with_a_fixed_voter() {
        // With voter 0 fixed to a>b>c, the other two voters still complete a
        // Condorcet cycle in exactly two of the 36 profiles: (c>a>b, b>c>a)
        // and its swap.
        let maj = Constitution::majority(3, 3).unwrap();
        let g = maj.conditional_restriction(0, &r(&[0, 1, 2])).unwrap();
        let mu = VoteDistribution::uniform(3);
        let p = g.paradox_probability_exact(&mu, DEFAULT_BUDGET).unwrap();
        assert_eq!(exact(p.clone()), brute_paradox(&g, &mu));
        assert_eq!(p, Quantity::ratio(1, 18));
        let cyc = Profile::new(vec![r(&[0, 1, 2]), r(&[2, 0, 1]), r(&[1, 2, 0])]).unwrap();
        assert!(!is_transitive(&maj.evaluate(&cyc).unwrap()));
    }

    #[test]
    fn paradox_free_iff_every_profile_is_transitive() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mu = VoteDistribution::uniform(3);
        for t in 0..200 {
            let n = 1 + t % 4;
            // Mostly dictators and constants with an occasional random pair, so both outcomes occur.
            let base = Constitution::dictator(3, n, rng.random_range(0..n), 1).unwrap();
            let mut f = base.clone();
            if rng.random_bool(0.5) {
                let (a, b) = [(0, 1), (1, 2), (0, 2)][rng.random_range(0..3)];
                f.set_pair(a, b, BooleanFunction::random(n, &mut rng).unwrap()).unwrap();
            }
            let p = exact(f.paradox_probability_exact(&mu, DEFAULT_BUDGET).unwrap());
            let witness = find_paradox_profile(&f, DEFAULT_BUDGET).unwrap();
            assert_eq!(p.is_zero(), witness.is_none());
            if let Some(w) = witness {
                assert!(!is_transitive(&f.evaluate(&w).unwrap()));
            }
        }
    }

    #[test]
    fn budget_guard() {
        let f = Constitution::majority(3, 11).unwrap();
        let err = f.paradox_probability_exact(&VoteDistribution::uniform(3), DEFAULT_BUDGET).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { required: 362_797_056, budget: DEFAULT_BUDGET }));
    }

    #[test]
    fn zero_atoms_shrink_the_enumeration() {
        let f = Constitution::majority(3, 15).unwrap();
        let mu = VoteDistribution::uniform_on(3, &[r(&[0, 1, 2]), r(&[2, 1, 0])]).unwrap();
        // 2^15 profiles; voters only ever submit a ranking or its reversal.
        assert_eq!(f.paradox_probability_exact(&mu, DEFAULT_BUDGET).unwrap(), Quantity::ratio(0, 1));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn probabilities_are_complementary_and_bounded(seed in any::<u64>(), n in 1usize..=3) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_constitution(&mut rng, 3, n);
            let mu = random_symmetric(3, 5, &mut rng);
            let p = exact(f.paradox_probability_exact(&mu, DEFAULT_BUDGET).unwrap());
            let t = exact(f.transitive_probability(&mu, DEFAULT_BUDGET).unwrap());
            prop_assert_eq!(&p + &t, BigRational::one());
            prop_assert!(p >= BigRational::zero() && p <= BigRational::one());
        }

        #[test]
        fn reversed_orientation_round_trips(seed in any::<u64>(), a in 0usize..4, b in 0usize..4) {
            prop_assume!(a != b);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut f = random_constitution(&mut rng, 4, 3);
            let g = BooleanFunction::random(3, &mut rng).unwrap();
            f.set_pair(a, b, g.clone()).unwrap();
            prop_assert_eq!(f.oriented(a, b).unwrap(), g.clone());
            prop_assert_eq!(f.oriented(b, a).unwrap(), g.reverse_orientation());
        }
    }
}
