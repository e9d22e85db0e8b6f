//! Acceptance criteria, one pass/fail line each. Runs without the libtest
//! harness so every line is printed; exits non-zero if any criterion fails.

use std::time::{Duration, Instant};

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use quantarrow::constitution::{is_transitive, Constitution};
use quantarrow::distribution::{random_symmetric, VoteDistribution};
use quantarrow::enumerate::DEFAULT_BUDGET;
use quantarrow::family::{classify_single_voter, enumerate_family, generate_family, transitive_iia};
use quantarrow::gaussian::{
    check_gaussian_arrow_bound, hypercube_vs_gaussian_drift, random_unit_weights, GaussianTripleSpec, LinearThreshold,
    ThresholdFunction,
};
use quantarrow::montecarlo::{estimate_paradox, Estimate, MajorityRule};
use quantarrow::pivotal::{barbera_construct, find_pivot_pair};
use quantarrow::suite::{projection_suite, random_constitution, run_bounds_suite, BoundsConfig, PROJECTION_EPSILONS, PROJECTION_NS};
use quantarrow::{Error, Quantity};

const KALAI_UNIFORM_INSTANCES: usize = 500;
const KALAI_SYMMETRIC_INSTANCES: usize = 100;
const KALAI_TIME_LIMIT: Duration = Duration::from_secs(120);

const CONDORCET_SAMPLES: u64 = 1_000_000;
const CONDORCET_SIGMAS: f64 = 4.0;
const CONDORCET_SEED: u64 = 2;

const LIMIT_VOTERS: usize = 1001;
const LIMIT_SAMPLES: u64 = 1_000_000;
const LIMIT_TOLERANCE: f64 = 0.004;
const LIMIT_TIME_LIMIT: Duration = Duration::from_secs(300);
const LIMIT_SEED: u64 = 3;

const BARBERA_INSTANCES: usize = 1000;
const BARBERA_MAX_N: usize = 8;

const BOUNDS_MIN_INSTANCES: usize = 10_000;

const PROJECTION_ACCEPTED: usize = 200;

const GAUSS_TRIPLES: usize = 100;
const GAUSS_EPSILON: f64 = 0.5;

const DRIFT_NS: [usize; 3] = [11, 51, 101];
const DRIFT_RHO: f64 = -1.0 / 3.0;
const DRIFT_TOLERANCE: f64 = 0.02;

const DETERMINISM_THREADS: [usize; 3] = [1, 2, 7];

fn guilbaud_limit() -> f64 {
    0.25 - 3.0 / (2.0 * std::f64::consts::PI) * (1.0f64 / 3.0).asin()
}

type Check = Result<String, String>;

fn kalai_equivalence() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let uniform = VoteDistribution::uniform(3);
    let mut mismatches = 0;
    for t in 0..KALAI_UNIFORM_INSTANCES + KALAI_SYMMETRIC_INSTANCES {
        let n = 1 + t % 5;
        let f = random_constitution(n, &mut rng).map_err(|e| e.to_string())?;
        let mu = if t < KALAI_UNIFORM_INSTANCES { uniform.clone() } else { random_symmetric(3, 9, &mut rng) };
        let exact = f.paradox_probability_exact(&mu, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
        let kalai = f.paradox_probability_kalai(&mu).map_err(|e| e.to_string())?;
        match (exact.as_exact(), kalai.as_exact()) {
            (Some(a), Some(b)) if a == b => {}
            _ => mismatches += 1,
        }
    }
    let elapsed = start.elapsed();
    let detail = format!(
        "{KALAI_UNIFORM_INSTANCES} uniform + {KALAI_SYMMETRIC_INSTANCES} symmetric, {mismatches} mismatches, {:.2}s",
        elapsed.as_secs_f64()
    );
    if mismatches == 0 && elapsed < KALAI_TIME_LIMIT {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn condorcet_estimate() -> Result<Estimate, Error> {
    let maj = Constitution::majority(3, 3)?;
    estimate_paradox(&maj, &VoteDistribution::uniform(3), CONDORCET_SAMPLES, CONDORCET_SEED)
}

fn condorcet() -> Check {
    let maj = Constitution::majority(3, 3).map_err(|e| e.to_string())?;
    let exact = maj.paradox_probability_exact(&VoteDistribution::uniform(3), DEFAULT_BUDGET).map_err(|e| e.to_string())?;
    let est = condorcet_estimate().map_err(|e| e.to_string())?;
    let detail = format!("exact {exact}, MC {:.6} ± {:.6} (σ)", est.mean, est.stderr);
    if exact == Quantity::ratio(1, 18) && est.within(1.0 / 18.0, CONDORCET_SIGMAS) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn limit_estimate() -> Result<Estimate, Error> {
    let rule = MajorityRule::new(3, LIMIT_VOTERS)?;
    estimate_paradox(&rule, &VoteDistribution::uniform(3), LIMIT_SAMPLES, LIMIT_SEED)
}

fn gaussian_limit() -> Check {
    let start = Instant::now();
    let est = limit_estimate().map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let gap = (est.mean - guilbaud_limit()).abs();
    let detail = format!(
        "n = {LIMIT_VOTERS}: MC {:.5}, limit {:.5}, gap {gap:.5} (tolerance {LIMIT_TOLERANCE}), {:.1}s",
        est.mean,
        guilbaud_limit(),
        elapsed.as_secs_f64()
    );
    if gap <= LIMIT_TOLERANCE && elapsed < LIMIT_TIME_LIMIT {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn barbera() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut drawn, mut cyclic) = (0, 0);
    let mut accepted = 0;
    while accepted < BARBERA_INSTANCES {
        drawn += 1;
        let n = rng.random_range(2..=BARBERA_MAX_N);
        let f = random_constitution(n, &mut rng).map_err(|e| e.to_string())?;
        let Some((w1, w2)) = find_pivot_pair(&f).map_err(|e| e.to_string())? else { continue };
        accepted += 1;
        let ok = barbera_construct(&f, &w1, &w2)
            .and_then(|p| {
                let valid = p.n() == n && p.k() == Some(3);
                Ok(valid && !is_transitive(&f.evaluate(&p)?))
            })
            .unwrap_or(false);
        cyclic += ok as usize;
    }
    let detail = format!("{cyclic}/{accepted} cyclic ({drawn} drawn, n ≤ {BARBERA_MAX_N})");
    if cyclic == accepted {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn bounds() -> Check {
    let config = BoundsConfig { projection_instances: 0, ..BoundsConfig::default() };
    let r = run_bounds_suite(&config, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
    let detail = format!(
        "{} instances: joint pivotal {}/{} violations, two influential {}/{}, reverse HC {}/{} (ρ = 1/3, n ≤ {})",
        r.instances,
        r.joint_pivotal.violations,
        r.joint_pivotal.instances,
        r.two_influential.violations,
        r.two_influential.instances,
        r.reverse_hc.violations,
        r.reverse_hc.instances,
        config.hc_max_n
    );
    if r.violations == 0 && r.instances >= BOUNDS_MIN_INSTANCES {
        Ok(detail)
    } else {
        Err(format!("{detail}; first: {:?}", r.joint_pivotal.examples.first().or(r.reverse_hc.examples.first())))
    }
}

fn characterization() -> Check {
    let mut parts = Vec::new();
    let mut ok = true;
    for (n, total) in [(1, 64u64), (2, 4096)] {
        let e = enumerate_family(n, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
        ok &= e.iia_total == Some(total) && e.sets_equal == Some(true) && e.generated_verified;
        parts.push(format!("n = {n}: {} of {total} transitive, equal = {:?}", e.transitive.unwrap_or(0), e.sets_equal));
    }
    let survivors = transitive_iia(1, 64).map_err(|e| e.to_string())?;
    let classified = survivors.iter().filter(|f| classify_single_voter(f).is_ok()).count();
    ok &= classified == survivors.len() && survivors.len() == generate_family(3, 1, DEFAULT_BUDGET).map_err(|e| e.to_string())?.len();
    parts.push(format!("{classified}/{} single-voter survivors classified", survivors.len()));
    let detail = parts.join("; ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn projection() -> Check {
    let mut parts = Vec::new();
    let mut ok = true;
    for (num, den) in PROJECTION_EPSILONS {
        let eps = BigRational::new(num.into(), den.into());
        for n in PROJECTION_NS {
            let s = projection_suite(&eps, n, PROJECTION_ACCEPTED, 7, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
            ok &= s.passed() && s.accepted == PROJECTION_ACCEPTED;
            parts.push(format!("ε={num}/{den} n={n}: {}/{} ok of {} drawn, max D {}", s.accepted - s.failures, s.accepted, s.drawn, s.max_distance));
        }
    }
    let detail = parts.join("; ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn gaussian_arrow() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut drawn, mut accepted, mut holds) = (0, 0, 0);
    let mut smallest = f64::INFINITY;
    while accepted < GAUSS_TRIPLES {
        drawn += 1;
        let n = rng.random_range(1..=4);
        let spec = GaussianTripleSpec::arrow(n).map_err(|e| e.to_string())?;
        let fs: Vec<ThresholdFunction> = (0..3)
            .map(|_| ThresholdFunction::new(random_unit_weights(n, &mut rng), rng.random_range(-1.5..1.5)))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        match check_gaussian_arrow_bound([&fs[0], &fs[1], &fs[2]], &spec, GAUSS_EPSILON) {
            Ok(r) => {
                accepted += 1;
                holds += r.holds as usize;
                smallest = smallest.min(r.probability);
            }
            Err(Error::HypothesisFailed { .. }) => {}
            Err(e) => return Err(e.to_string()),
        }
    }
    let bound = (GAUSS_EPSILON / 2.0).powi(18);
    let detail = format!("{holds}/{accepted} ≥ {bound:.3e} ({drawn} drawn), smallest probability {smallest:.4}");
    if holds == accepted {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn drift() -> Check {
    let gaps = DRIFT_NS
        .iter()
        .map(|&n| {
            let m = LinearThreshold::majority(n)?;
            Ok(hypercube_vs_gaussian_drift(&m, &m, DRIFT_RHO)?.gap)
        })
        .collect::<Result<Vec<f64>, Error>>()
        .map_err(|e| e.to_string())?;
    let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
    let detail = format!(
        "gaps {:?} at n = {DRIFT_NS:?}",
        gaps.iter().map(|g| format!("{g:.5}")).collect::<Vec<_>>()
    );
    if decreasing && gaps[2] <= DRIFT_TOLERANCE {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn determinism() -> Check {
    let run = |threads: usize| -> Result<String, String> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| e.to_string())?;
        pool.install(|| {
            let a = condorcet_estimate().map_err(|e| e.to_string())?;
            let b = limit_estimate().map_err(|e| e.to_string())?;
            serde_json::to_string(&(a, b)).map_err(|e| e.to_string())
        })
    };
    let outputs = DETERMINISM_THREADS.iter().map(|&t| run(t)).collect::<Result<Vec<_>, _>>()?;
    let identical = outputs.windows(2).all(|w| w[0] == w[1]);
    let detail = format!("criteria 2 and 3 reruns at {DETERMINISM_THREADS:?} threads byte-identical: {identical}");
    if identical {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("kalai formula equals enumeration", kalai_equivalence),
        ("condorcet fixture", condorcet),
        ("gaussian limit of majority", gaussian_limit),
        ("paradox from two pivotal voters", barbera),
        ("bounds suite", bounds),
        ("characterization of transitive constitutions", characterization),
        ("projection of near-transitive dictators", projection),
        ("gaussian arrow bound", gaussian_arrow),
        ("invariance drift", drift),
        ("monte carlo determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("acceptance {:>2} PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("acceptance {:>2} FAIL {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
