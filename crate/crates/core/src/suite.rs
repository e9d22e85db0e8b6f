//! Randomized instance suites for the joint-pivotality, two-influential-voter
//! and reverse-hypercontractivity bounds, and for projection onto the
//! transitive family. Instance `t` of a suite is generated from its own
//! stream, so results are independent of scheduling.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::boolfn::BooleanFunction;
use crate::constitution::Constitution;
use crate::distribution::{random_symmetric, VoteDistribution};
use crate::error::{Error, Result};
use crate::family::{project_to_family, Membership};
use crate::hyper::{check_reverse_hc, SetFamily};
use crate::montecarlo::block_rng;
use crate::pivotal::{check_joint_pivotal_bound, check_two_influential_bound};
use crate::quantity::Quantity;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionKind {
    Table,
    Junta,
    Threshold,
    NoisyDictator,
    Sparse,
    Majority,
}

impl FunctionKind {
    pub const ALL: [FunctionKind; 6] = [
        FunctionKind::Table,
        FunctionKind::Junta,
        FunctionKind::Threshold,
        FunctionKind::NoisyDictator,
        FunctionKind::Sparse,
        FunctionKind::Majority,
    ];
}

/// A random function of the given kind on `n ≥ 1` variables.
pub fn random_function<R: Rng + ?Sized>(kind: FunctionKind, n: usize, rng: &mut R) -> Result<BooleanFunction> {
    let len = 1usize << n;
    match kind {
        FunctionKind::Table => BooleanFunction::random(n, rng),
        FunctionKind::Junta => {
            let vars: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.5)).take(3).collect();
            let table: Vec<bool> = (0..1 << vars.len()).map(|_| rng.random_bool(0.5)).collect();
            BooleanFunction::from_fn(n, |x| {
                let key = vars.iter().enumerate().fold(0, |k, (b, &v)| k | (x >> v & 1) << b);
                table[key]
            })
        }
        FunctionKind::Threshold => {
            let w: Vec<i64> = (0..n).map(|_| rng.random_range(-3..=3)).collect();
            let t = rng.random_range(-2..=2);
            BooleanFunction::from_fn(n, |x| {
                let s: i64 = w.iter().enumerate().map(|(i, wi)| if x >> i & 1 == 1 { *wi } else { -*wi }).sum();
                s > t
            })
        }
        FunctionKind::NoisyDictator => {
            let sign = if rng.random_bool(0.5) { 1 } else { -1 };
            let mut f = BooleanFunction::dictator(n, rng.random_range(0..n), sign)?;
            for _ in 0..rng.random_range(0..=2) {
                f.flip(rng.random_range(0..len));
            }
            Ok(f)
        }
        FunctionKind::Sparse => {
            let sign = if rng.random_bool(0.5) { 1 } else { -1 };
            let mut f = BooleanFunction::constant(n, sign)?;
            for _ in 0..rng.random_range(1..=3) {
                f.flip(rng.random_range(0..len));
            }
            Ok(f)
        }
        FunctionKind::Majority => {
            let m = if n % 2 == 1 { n } else { n - 1 };
            if m == 0 {
                return BooleanFunction::dictator(n, 0, 1);
            }
            let f = BooleanFunction::majority(m)?;
            BooleanFunction::from_fn(n, |x| f.is_plus(x & ((1 << m) - 1)))
        }
    }
}

/// A `k = 3` constitution whose three pair functions have independently
/// chosen kinds.
pub fn random_constitution<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Constitution> {
    let pairs = (0..3)
        .map(|_| {
            let kind = FunctionKind::ALL[rng.random_range(0..FunctionKind::ALL.len())];
            random_function(kind, n, rng)
        })
        .collect::<Result<Vec<_>>>()?;
    Constitution::new(3, n, pairs)
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteSummary {
    pub name: String,
    pub instances: usize,
    pub violations: usize,
    /// Instances whose bound is zero.
    pub vacuous: usize,
    /// Smallest `value / bound` over non-vacuous instances.
    pub tightest_ratio: Option<f64>,
    /// Up to ten violating instances, described.
    pub examples: Vec<String>,
}

struct Outcome {
    value: f64,
    bound: f64,
    holds: bool,
    detail: String,
}

fn summarize(name: &str, outcomes: Vec<Outcome>) -> SuiteSummary {
    let mut s = SuiteSummary {
        name: name.into(),
        instances: outcomes.len(),
        violations: 0,
        vacuous: 0,
        tightest_ratio: None,
        examples: Vec::new(),
    };
    for o in outcomes {
        if !o.holds {
            s.violations += 1;
            if s.examples.len() < 10 {
                s.examples.push(o.detail);
            }
        }
        if o.bound > 0.0 {
            let r = o.value / o.bound;
            s.tightest_ratio = Some(s.tightest_ratio.map_or(r, |t: f64| t.min(r)));
        } else {
            s.vacuous += 1;
        }
    }
    s
}

// Distinct stream families per suite.
const JOINT_STREAM: u64 = 1 << 40;
const TWO_INF_STREAM: u64 = 2 << 40;
const HC_STREAM: u64 = 3 << 40;
const PROJECTION_STREAM: u64 = 4 << 40;

fn instance_distribution(t: usize, rng: &mut ChaCha8Rng) -> VoteDistribution {
    if t.is_multiple_of(2) {
        VoteDistribution::uniform(3)
    } else {
        random_symmetric(3, 6, rng)
    }
}

/// Joint pivotality of two distinct voters, uniform and symmetric `μ`.
pub fn joint_pivotal_suite(instances: usize, max_n: usize, seed: u64, budget: u64) -> Result<SuiteSummary> {
    let outcomes = (0..instances)
        .into_par_iter()
        .map(|t| {
            let mut rng = block_rng(seed, JOINT_STREAM + t as u64);
            let n = rng.random_range(2..=max_n.max(2));
            let f = random_constitution(n, &mut rng)?;
            let mu = instance_distribution(t, &mut rng);
            let i = rng.random_range(0..n);
            let j = (i + rng.random_range(1..n)) % n;
            let r = check_joint_pivotal_bound(&f, i, j, &mu, budget)?;
            Ok(Outcome {
                value: r.probability.to_f64(),
                bound: r.bound.to_f64(),
                holds: r.holds,
                detail: format!("instance {t}: n = {n}, voters ({i}, {j}), P[B] = {} < {}", r.probability, r.bound),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize("joint_pivotal", outcomes))
}

/// Paradox probability against the two-influential-voters bound.
pub fn two_influential_suite(instances: usize, max_n: usize, seed: u64, budget: u64) -> Result<SuiteSummary> {
    let outcomes = (0..instances)
        .into_par_iter()
        .map(|t| {
            let mut rng = block_rng(seed, TWO_INF_STREAM + t as u64);
            let n = rng.random_range(2..=max_n.max(2));
            let f = random_constitution(n, &mut rng)?;
            let mu = instance_distribution(t, &mut rng);
            let r = check_two_influential_bound(&f, &mu, budget)?;
            Ok(Outcome {
                value: r.paradox.to_f64(),
                bound: r.bound.to_f64(),
                holds: r.holds,
                detail: format!("instance {t}: n = {n}, P(F) = {} < {}", r.paradox, r.bound),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize("two_influential", outcomes))
}

/// Random set pairs with uniform per-coordinate correlation `±rho_bound`.
pub fn reverse_hc_suite(pairs: usize, max_n: usize, rho_bound: f64, seed: u64) -> Result<SuiteSummary> {
    let outcomes = (0..pairs)
        .into_par_iter()
        .map(|t| {
            let mut rng = block_rng(seed, HC_STREAM + t as u64);
            let n = rng.random_range(1..=max_n.max(1));
            let family = SetFamily::ALL[t % SetFamily::ALL.len()];
            let (b1, b2) = (family.sample(n, &mut rng)?, SetFamily::ALL[rng.random_range(0..4)].sample(n, &mut rng)?);
            let rho = if t % 2 == 0 { rho_bound } else { -rho_bound };
            let r = check_reverse_hc(&b1, &b2, &vec![rho; n], rho_bound)?;
            Ok(Outcome {
                value: r.intersection,
                bound: r.bound,
                holds: !r.violated,
                detail: format!("pair {t}: n = {n}, {family:?}, intersection {} < {}", r.intersection, r.bound),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize("reverse_hypercontractivity", outcomes))
}

#[derive(Clone, Debug, Serialize)]
pub struct ProjectionSummary {
    pub epsilon: Quantity,
    pub n: usize,
    /// Perturbed dictators drawn until `accepted` met the hypothesis.
    pub drawn: usize,
    pub accepted: usize,
    /// Accepted instances projected to a family member.
    pub members: usize,
    /// Accepted instances with `D(F, G) ≤ 10 ε`.
    pub within_radius: usize,
    /// Largest `D(F, G)` among accepted instances.
    pub max_distance: Quantity,
    /// Accepted instances that are not members or lie outside `10 ε`.
    pub failures: usize,
    /// Rejected instances that still projected within `10 ε` of a member.
    pub rejected_within_radius: usize,
}

impl ProjectionSummary {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// A dictator with a random number (possibly zero) of flipped table
/// entries spread over its pair functions.
pub fn perturbed_dictator<R: Rng + ?Sized>(n: usize, max_flips: usize, rng: &mut R) -> Result<Constitution> {
    let sign = if rng.random_bool(0.5) { 1 } else { -1 };
    let mut f = Constitution::dictator(3, n, rng.random_range(0..n), sign)?;
    let flips = rng.random_range(0..=max_flips);
    let mut tables: Vec<BooleanFunction> = f.pair_functions().to_vec();
    let mut chosen = std::collections::BTreeSet::new();
    while chosen.len() < flips {
        chosen.insert((rng.random_range(0..3), rng.random_range(0..1usize << n)));
    }
    for (p, x) in chosen {
        tables[p].flip(x);
    }
    for ((a, b), g) in [(0, 1), (0, 2), (1, 2)].into_iter().zip(tables) {
        f.set_pair(a, b, g)?;
    }
    Ok(f)
}

/// Perturbed dictators with `P(F) < ε³ / (36 n³)` projected onto the family.
pub fn projection_suite(epsilon: &BigRational, n: usize, accepted: usize, seed: u64, budget: u64) -> Result<ProjectionSummary> {
    let mu = VoteDistribution::uniform(3);
    let n3 = BigRational::from_integer(BigInt::from(36 * n * n * n));
    let threshold = num_traits::pow(epsilon.clone(), 3) / n3;
    let radius = epsilon * BigRational::from_integer(10.into());
    let eps_f = crate::quantity::rational_to_f64(epsilon);
    let mut summary = ProjectionSummary {
        epsilon: Quantity::Exact(epsilon.clone()),
        n,
        drawn: 0,
        accepted: 0,
        members: 0,
        within_radius: 0,
        max_distance: Quantity::ratio(0, 1),
        failures: 0,
        rejected_within_radius: 0,
    };
    let stream = PROJECTION_STREAM + ((n as u64) << 32);
    // Work in parallel batches but consume results in draw order.
    const BATCH: usize = 64;
    let mut next = 0u64;
    while summary.accepted < accepted {
        let batch = (next..next + BATCH as u64)
            .into_par_iter()
            .map(|t| {
                let mut rng = block_rng(seed, stream + t);
                let f = perturbed_dictator(n, 3, &mut rng)?;
                let p = f.paradox_probability_exact(&mu, budget)?;
                let proj = project_to_family(&f, eps_f, &mu, budget)?;
                Ok((p, proj))
            })
            .collect::<Result<Vec<_>>>()?;
        next += BATCH as u64;
        for (p, proj) in batch {
            if summary.accepted == accepted {
                break;
            }
            summary.drawn += 1;
            let d = proj.distance.as_exact().ok_or_else(|| Error::InvalidParameter("inexact distance".into()))?.clone();
            let within = d <= radius;
            let member = matches!(proj.membership, Membership::Member(_));
            if *p.as_exact().expect("uniform is exact") >= threshold {
                summary.rejected_within_radius += (within && member) as usize;
                continue;
            }
            summary.accepted += 1;
            summary.members += member as usize;
            summary.within_radius += within as usize;
            summary.failures += !(member && within) as usize;
            if d > *summary.max_distance.as_exact().expect("exact") {
                summary.max_distance = Quantity::Exact(d);
            }
        }
    }
    Ok(summary)
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundsConfig {
    pub seed: u64,
    pub pivot_instances: usize,
    pub pivot_max_n: usize,
    pub hc_pairs: usize,
    pub hc_max_n: usize,
    pub rho_bound: f64,
    pub projection_instances: usize,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        BoundsConfig {
            seed: 0,
            pivot_instances: 2000,
            pivot_max_n: 5,
            hc_pairs: 10_000,
            hc_max_n: 12,
            rho_bound: 1.0 / 3.0,
            projection_instances: 200,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundsReport {
    pub joint_pivotal: SuiteSummary,
    pub two_influential: SuiteSummary,
    pub reverse_hc: SuiteSummary,
    pub projection: Vec<ProjectionSummary>,
    pub instances: usize,
    pub violations: usize,
}

pub const PROJECTION_EPSILONS: [(i64, i64); 2] = [(1, 100), (1, 500)];
pub const PROJECTION_NS: [usize; 3] = [3, 4, 5];

pub fn run_bounds_suite(config: &BoundsConfig, budget: u64) -> Result<BoundsReport> {
    if config.pivot_max_n > 12 || config.hc_max_n > 12 {
        return Err(Error::InvalidParameter("suites are limited to n ≤ 12".into()));
    }
    let joint_pivotal = joint_pivotal_suite(config.pivot_instances, config.pivot_max_n, config.seed, budget)?;
    let two_influential = two_influential_suite(config.pivot_instances, config.pivot_max_n, config.seed, budget)?;
    let reverse_hc = reverse_hc_suite(config.hc_pairs, config.hc_max_n, config.rho_bound, config.seed)?;
    let mut projection = Vec::new();
    if config.projection_instances > 0 {
        for (num, den) in PROJECTION_EPSILONS {
            for n in PROJECTION_NS {
                let eps = BigRational::new(num.into(), den.into());
                projection.push(projection_suite(&eps, n, config.projection_instances, config.seed, budget)?);
            }
        }
    }
    let suites = [&joint_pivotal, &two_influential, &reverse_hc];
    let instances = suites.iter().map(|s| s.instances).sum();
    let violations = suites.iter().map(|s| s.violations).sum::<usize>()
        + projection.iter().map(|p| p.failures).sum::<usize>();
    Ok(BoundsReport { joint_pivotal, two_influential, reverse_hc, projection, instances, violations })
}
