//! Seeded Monte Carlo estimators for when enumeration is out of budget.
//!
//! Samples are cut into fixed blocks of [`BLOCK`] draws. Block `b` always
//! uses stream `b` of a ChaCha8 generator keyed by the seed, and blocks
//! return integer hit counts, so estimates do not depend on the thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::constitution::{mask_is_transitive, Constitution};
use crate::distribution::{RankingSampler, VoteDistribution};
use crate::error::{Error, Result};
use crate::ranking::RankingTable;

pub const MIN_SAMPLES: u64 = 1000;
pub const BLOCK: u64 = 1 << 14;
/// Two-sided 99% standard normal quantile.
pub const Z99: f64 = 2.575_829_303_548_900_4;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
    /// Half-width of the 99% normal-approximation interval.
    pub confidence: f64,
}

impl Estimate {
    pub fn from_hits(hits: u64, samples: u64) -> Result<Self> {
        if samples < MIN_SAMPLES {
            return Err(Error::TooFewSamples { got: samples, min: MIN_SAMPLES });
        }
        let n = samples as f64;
        let mean = hits as f64 / n;
        let sd = (n / (n - 1.0) * mean * (1.0 - mean)).sqrt();
        let stderr = sd / n.sqrt();
        Ok(Estimate { mean, stderr, samples, confidence: Z99 * stderr })
    }

    pub fn covers(&self, truth: f64) -> bool {
        (self.mean - truth).abs() <= self.confidence
    }

    /// Whether `truth` lies within `sigmas` standard errors.
    pub fn within(&self, truth: f64, sigmas: f64) -> bool {
        (self.mean - truth).abs() <= sigmas * self.stderr
    }
}

/// The generator for block `block` under `seed`.
pub fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// Estimates `P[trial]`. `init` builds per-task scratch space; it must not
/// influence the outcome of a trial.
pub fn bernoulli<S, I, F>(samples: u64, seed: u64, init: I, trial: F) -> Result<Estimate>
where
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut ChaCha8Rng, &mut S) -> bool + Sync + Send,
{
    if samples < MIN_SAMPLES {
        return Err(Error::TooFewSamples { got: samples, min: MIN_SAMPLES });
    }
    let blocks = samples.div_ceil(BLOCK);
    let hits: u64 = (0..blocks)
        .into_par_iter()
        .map_init(&init, |scratch, b| {
            let mut rng = block_rng(seed, b);
            let size = BLOCK.min(samples - b * BLOCK);
            (0..size).filter(|_| trial(&mut rng, scratch)).count() as u64
        })
        .sum();
    Estimate::from_hits(hits, samples)
}

/// A pairwise rule evaluated from sampled ranking indices.
pub trait PairwiseRule: Sync {
    fn k(&self) -> usize;
    fn n(&self) -> usize;
    /// The outcome mask (bit `p` set when the lower alternative of canonical
    /// pair `p` wins) for voters holding the given ranking indices.
    fn outcome_mask(&self, table: &RankingTable, rankings: &[usize]) -> u64;
}

impl PairwiseRule for Constitution {
    fn k(&self) -> usize {
        Constitution::k(self)
    }

    fn n(&self) -> usize {
        Constitution::n(self)
    }

    fn outcome_mask(&self, table: &RankingTable, rankings: &[usize]) -> u64 {
        let mut idx = [0usize; 45];
        for (voter, &r) in rankings.iter().enumerate() {
            let mask = table.pair_mask(r);
            for (p, slot) in idx[..table.pairs().len()].iter_mut().enumerate() {
                *slot |= ((mask >> p & 1) as usize) << voter;
            }
        }
        Constitution::outcome_mask(self, &idx[..table.pairs().len()])
    }
}

/// Simple majority on every pair, evaluated by counting rather than through
/// truth tables, so `n` may be large. `n` must be odd.
#[derive(Clone, Copy, Debug)]
pub struct MajorityRule {
    k: usize,
    n: usize,
}

impl MajorityRule {
    pub fn new(k: usize, n: usize) -> Result<Self> {
        if n.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!("majority needs odd n, got {n}")));
        }
        if !(2..=crate::ranking::MAX_ALTERNATIVES).contains(&k) {
            return Err(Error::InvalidParameter(format!("k = {k} out of range")));
        }
        Ok(MajorityRule { k, n })
    }
}

impl PairwiseRule for MajorityRule {
    fn k(&self) -> usize {
        self.k
    }

    fn n(&self) -> usize {
        self.n
    }

    fn outcome_mask(&self, table: &RankingTable, rankings: &[usize]) -> u64 {
        let pairs = table.pairs().len();
        let mut counts = [0usize; 45];
        for &r in rankings {
            let mask = table.pair_mask(r);
            for (p, c) in counts[..pairs].iter_mut().enumerate() {
                *c += (mask >> p & 1) as usize;
            }
        }
        (0..pairs).fold(0, |m, p| m | ((2 * counts[p] > self.n) as u64) << p)
    }
}

fn check_rule<R: PairwiseRule + ?Sized>(rule: &R, mu: &VoteDistribution) -> Result<()> {
    if rule.k() != mu.k() {
        return Err(Error::ShapeMismatch(format!("rule has k = {}, distribution k = {}", rule.k(), mu.k())));
    }
    Ok(())
}

fn draw(sampler: &RankingSampler, rng: &mut ChaCha8Rng, out: &mut [usize]) {
    for r in out {
        *r = sampler.sample(rng);
    }
}

/// Estimates the paradox probability of `rule` under i.i.d. votes from `mu`.
pub fn estimate_paradox<R: PairwiseRule + ?Sized>(rule: &R, mu: &VoteDistribution, samples: u64, seed: u64) -> Result<Estimate> {
    check_rule(rule, mu)?;
    let (sampler, table, k, n) = (mu.sampler(), mu.table(), rule.k(), rule.n());
    bernoulli(samples, seed, || vec![0usize; n], |rng, profile| {
        draw(&sampler, rng, profile);
        !mask_is_transitive(k, rule.outcome_mask(table, profile))
    })
}

/// Estimates `D(F, G)`, the probability that the two outcomes differ.
pub fn estimate_distance<R, S>(f: &R, g: &S, mu: &VoteDistribution, samples: u64, seed: u64) -> Result<Estimate>
where
    R: PairwiseRule + ?Sized,
    S: PairwiseRule + ?Sized,
{
    check_rule(f, mu)?;
    check_rule(g, mu)?;
    if f.n() != g.n() {
        return Err(Error::ShapeMismatch(format!("n = {} vs n = {}", f.n(), g.n())));
    }
    let (sampler, table, n) = (mu.sampler(), mu.table(), f.n());
    bernoulli(samples, seed, || vec![0usize; n], |rng, profile| {
        draw(&sampler, rng, profile);
        f.outcome_mask(table, profile) != g.outcome_mask(table, profile)
    })
}

/// A generator for building random inputs, on a stream no estimate uses.
pub fn rng_for(seed: u64) -> ChaCha8Rng {
    block_rng(seed, u64::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::DEFAULT_BUDGET;
    use proptest::prelude::*;

    #[test]
    fn dictator_never_paradoxical() {
        let d = Constitution::dictator(3, 5, 2, 1).unwrap();
        let e = estimate_paradox(&d, &VoteDistribution::uniform(3), 20_000, 1).unwrap();
        assert_eq!(e.mean, 0.0);
        assert_eq!(e.stderr, 0.0);
        let z = estimate_distance(&d, &d, &VoteDistribution::uniform(3), 20_000, 1).unwrap();
        assert_eq!(z.mean, 0.0);
    }

    #[test]
    fn condorcet_within_four_sigma() {
        let maj = Constitution::majority(3, 3).unwrap();
        let e = estimate_paradox(&maj, &VoteDistribution::uniform(3), 1_000_000, 7).unwrap();
        assert!(e.within(1.0 / 18.0, 4.0), "{e:?}");
        // The counting rule agrees with the truth-table rule draw for draw.
        let m = estimate_paradox(&MajorityRule::new(3, 3).unwrap(), &VoteDistribution::uniform(3), 1_000_000, 7).unwrap();
        assert_eq!(e, m);
    }

    #[test]
    fn counting_majority_matches_tables_on_every_profile() {
        for (k, n) in [(3, 1), (3, 5), (4, 3)] {
            let (rule, table_rule) = (MajorityRule::new(k, n).unwrap(), Constitution::majority(k, n).unwrap());
            let table = RankingTable::new(k);
            let m = table.len();
            for code in 0..m.pow(n as u32) {
                let profile: Vec<usize> = (0..n).map(|v| code / m.pow(v as u32) % m).collect();
                assert_eq!(rule.outcome_mask(&table, &profile), PairwiseRule::outcome_mask(&table_rule, &table, &profile));
            }
        }
    }

    #[test]
    fn two_dictators_differ_five_sixths() {
        let mu = VoteDistribution::uniform(3);
        let (f, g) = (Constitution::dictator(3, 9, 0, 1).unwrap(), Constitution::dictator(3, 9, 4, 1).unwrap());
        let e = estimate_distance(&f, &g, &mu, 200_000, 3).unwrap();
        assert!(e.within(5.0 / 6.0, 4.0), "{e:?}");
        let small = Constitution::dictator(3, 2, 0, 1).unwrap().distance(&Constitution::dictator(3, 2, 1, 1).unwrap(), &mu, DEFAULT_BUDGET).unwrap();
        assert_eq!(small, crate::Quantity::ratio(5, 6));
    }

    #[test]
    fn triangle_inequality_within_intervals() {
        let mu = VoteDistribution::uniform(3);
        let f = Constitution::majority(3, 5).unwrap();
        let g = Constitution::dictator(3, 5, 0, 1).unwrap();
        let h = Constitution::dictator(3, 5, 1, -1).unwrap();
        let d = |a: &Constitution, b: &Constitution| estimate_distance(a, b, &mu, 100_000, 11).unwrap();
        let (fh, fg, gh) = (d(&f, &h), d(&f, &g), d(&g, &h));
        assert!(fh.mean <= fg.mean + gh.mean + fh.confidence + fg.confidence + gh.confidence);
        let ex = |a: &Constitution, b: &Constitution| a.distance(b, &mu, DEFAULT_BUDGET).unwrap().to_f64();
        assert!(ex(&f, &h) <= ex(&f, &g) + ex(&g, &h) + 1e-15);
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let maj = MajorityRule::new(3, 101).unwrap();
        let mu = VoteDistribution::uniform(3);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| estimate_paradox(&maj, &mu, 50_000, 99).unwrap())
        };
        let one = run(1);
        assert_eq!(one, run(3));
        assert_eq!(one, run(8));
    }

    #[test]
    fn ninety_nine_percent_intervals_cover() {
        let maj = Constitution::majority(3, 3).unwrap();
        let mu = VoteDistribution::uniform(3);
        let covered = (0..100)
            .filter(|&seed| estimate_paradox(&maj, &mu, 5_000, seed).unwrap().covers(1.0 / 18.0))
            .count();
        assert!(covered >= 95, "covered {covered}/100");
    }

    #[test]
    fn too_few_samples() {
        let d = Constitution::dictator(3, 1, 0, 1).unwrap();
        assert!(matches!(
            estimate_paradox(&d, &VoteDistribution::uniform(3), 999, 0),
            Err(Error::TooFewSamples { got: 999, min: 1000 })
        ));
    }

    proptest! {
        #[test]
        fn stderr_matches_sample_deviation(hits in 0u64..5000, extra in 0u64..5000) {
            let samples = 1000 + hits + extra;
            let e = Estimate::from_hits(hits, samples).unwrap();
            // Direct sample variance of the 0/1 outcomes.
            let m = hits as f64 / samples as f64;
            let var = (hits as f64 * (1.0 - m).powi(2) + (samples - hits) as f64 * m * m) / (samples - 1) as f64;
            prop_assert!((e.stderr - (var / samples as f64).sqrt()).abs() < 1e-12);
            prop_assert!((e.confidence - Z99 * e.stderr).abs() < 1e-15);
        }
    }
}
