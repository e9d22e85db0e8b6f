//! Pivotal voters, the two-pivots paradox construction, and the lower bounds
//! it feeds.
//!
//! Throughout, alternatives `0, 1, 2` play the roles of `a, b, c`, so
//! `f^{a>b}` and `f^{b>c}` are the canonical pair functions `(0,1)` and
//! `(1,2)`, and `f^{c>a}` is the reversal of `(0,2)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::boolfn::BooleanFunction;
use crate::constitution::{is_transitive, Constitution};
use crate::distribution::{VoteDistribution, Weights};
use crate::enumerate::{self, DigitWeights};
use crate::error::{Error, Result};
use crate::quantity::{rational_to_f64, Quantity};
use crate::ranking::{pair_index, Profile, Ranking, RankingTable};

/// An input at which flipping `voter`'s bit changes a function's value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PivotWitness {
    pub voter: usize,
    n: usize,
    /// Table index of the other voters' bits; the voter's own bit is clear.
    point: usize,
}

impl PivotWitness {
    pub fn new(n: usize, voter: usize, others: &[i8]) -> Result<Self> {
        if voter >= n || others.len() + 1 != n {
            return Err(Error::InvalidWitness(format!(
                "voter {voter} with {} other bits does not fit n = {n}",
                others.len()
            )));
        }
        let mut point = 0;
        for (slot, &s) in others.iter().enumerate() {
            let m = if slot < voter { slot } else { slot + 1 };
            match s {
                1 => point |= 1 << m,
                -1 => {}
                _ => return Err(Error::InvalidWitness(format!("bit {s} is not ±1"))),
            }
        }
        Ok(PivotWitness { voter, n, point })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The other voters' signs, in voter order.
    pub fn others(&self) -> Vec<i8> {
        (0..self.n)
            .filter(|&m| m != self.voter)
            .map(|m| if self.point >> m & 1 == 1 { 1 } else { -1 })
            .collect()
    }

    pub fn is_pivotal_for(&self, f: &BooleanFunction) -> bool {
        f.n() == self.n && self.voter < self.n && f.is_plus(self.point) != f.is_plus(self.point | 1 << self.voter)
    }
}

/// The lowest-index input at which voter `i` is pivotal for `f`.
pub fn find_pivot(f: &BooleanFunction, i: usize) -> Result<Option<PivotWitness>> {
    if i >= f.n() {
        return Err(Error::InvalidParameter(format!("voter {i} out of range for n = {}", f.n())));
    }
    let bit = 1 << i;
    Ok((0..f.len())
        .filter(|x| x & bit == 0)
        .find(|&x| f.is_plus(x) != f.is_plus(x | bit))
        .map(|point| PivotWitness { voter: i, n: f.n(), point }))
}

fn require_k3(f: &Constitution) -> Result<()> {
    if f.k() != 3 {
        Err(Error::UnsupportedK { k: f.k(), expected: 3 })
    } else {
        Ok(())
    }
}

/// Witnesses for distinct voters pivotal on `f^{a>b}` and `f^{b>c}`, lowest
/// voters first, if any exist.
pub fn find_pivot_pair(f: &Constitution) -> Result<Option<(PivotWitness, PivotWitness)>> {
    require_k3(f)?;
    let (ab, bc) = (f.oriented(0, 1)?, f.oriented(1, 2)?);
    for i in 0..f.n() {
        let Some(w1) = find_pivot(&ab, i)? else { continue };
        for j in (0..f.n()).filter(|&j| j != i) {
            if let Some(w2) = find_pivot(&bc, j)? {
                return Ok(Some((w1, w2)));
            }
        }
    }
    Ok(None)
}

/// A profile with a non-transitive outcome, built from a voter pivotal for
/// `f^{a>b}` and a different voter pivotal for `f^{b>c}`.
///
/// With `i = w1.voter`, `j = w2.voter`: the `a>b` bits are `w1`'s with a free
/// bit `x*` at `i`; the `b>c` bits are `w2`'s with a free bit `y*` at `j`;
/// the `c>a` bits negate the `a>b` bits except at `i`, where they negate the
/// `b>c` bit. No voter's triple is constant, so every voter holds a genuine
/// ranking, and `f^{c>a}` is fixed while `x*`, `y*` steer the other two
/// functions onto its value. `(x*, y*)` are tried with `+1` before `-1`.
pub fn barbera_construct(f: &Constitution, w1: &PivotWitness, w2: &PivotWitness) -> Result<Profile> {
    require_k3(f)?;
    if w1.voter == w2.voter {
        return Err(Error::SameVoter(w1.voter));
    }
    let (ab, bc, ca) = (f.oriented(0, 1)?, f.oriented(1, 2)?, f.oriented(2, 0)?);
    if !w1.is_pivotal_for(&ab) {
        return Err(Error::InvalidWitness(format!("voter {} is not pivotal for f^(a>b) at the witness", w1.voter)));
    }
    if !w2.is_pivotal_for(&bc) {
        return Err(Error::InvalidWitness(format!("voter {} is not pivotal for f^(b>c) at the witness", w2.voter)));
    }
    let (i, j, n) = (w1.voter, w2.voter, f.n());
    let all = (1usize << n) - 1;
    let mut z = !w1.point & all & !(1 << i);
    if w2.point >> i & 1 == 0 {
        z |= 1 << i;
    }
    let target = ca.is_plus(z);
    let table = RankingTable::new(3);
    for x_star in [true, false] {
        for y_star in [true, false] {
            let x = w1.point | (x_star as usize) << i;
            let y = w2.point | (y_star as usize) << j;
            if ab.is_plus(x) != target || bc.is_plus(y) != target {
                continue;
            }
            let voters = (0..n)
                .map(|m| {
                    let (s_ab, s_bc, s_ca) = (x >> m & 1 == 1, y >> m & 1 == 1, z >> m & 1 == 1);
                    let mask = (s_ab as u64) << pair_index(3, 0, 1)
                        | (!s_ca as u64) << pair_index(3, 0, 2)
                        | (s_bc as u64) << pair_index(3, 1, 2);
                    let r = table.ranking_for_mask(mask).ok_or_else(|| {
                        Error::ConstructionFailed(format!("voter {m} got the constant triple ({s_ab}, {s_bc}, {s_ca})"))
                    })?;
                    Ranking::from_index(3, r)
                })
                .collect::<Result<Vec<_>>>()?;
            let profile = Profile::new(voters)?;
            if is_transitive(&f.evaluate(&profile)?) {
                return Err(Error::ConstructionFailed(format!(
                    "profile {:?} evaluates to a transitive outcome",
                    profile.indices()
                )));
            }
            return Ok(profile);
        }
    }
    Err(Error::ConstructionFailed("no choice of the free bits matches f^(c>a)".into()))
}

/// Exact probability that voter `i` is pivotal for `f^{a>b}` and voter `j`
/// for `f^{b>c}` on a random profile.
///
/// Both events only see the `a>b` and `b>c` bits, so the enumeration runs
/// over the four per-voter sign cells (weighted by `mu`) rather than over
/// rankings.
pub fn joint_pivotal_probability(
    f: &Constitution,
    i: usize,
    j: usize,
    mu: &VoteDistribution,
    budget: u64,
) -> Result<Quantity> {
    require_k3(f)?;
    if mu.k() != 3 {
        return Err(Error::ShapeMismatch(format!("distribution k = {}", mu.k())));
    }
    if i == j {
        return Err(Error::SameVoter(i));
    }
    for v in [i, j] {
        if v >= f.n() {
            return Err(Error::InvalidParameter(format!("voter {v} out of range for n = {}", f.n())));
        }
    }
    let pivotal = |g: &BooleanFunction, v: usize| -> Vec<bool> {
        (0..g.len()).map(|x| g.is_plus(x) != g.is_plus(x ^ 1 << v)).collect()
    };
    let (piv_ab, piv_bc) = (pivotal(&f.oriented(0, 1)?, i), pivotal(&f.oriented(1, 2)?, j));

    // Cell bit 0: voter ranks a over b; bit 1: b over c.
    let cell = |r: &Ranking| (r.prefers(0, 1) as usize) | (r.prefers(1, 2) as usize) << 1;
    let (masks, weights) = match (mu.weights(), mu.integer_weights()) {
        (Weights::Exact(_), Some((nums, den))) => {
            let mut sums = vec![BigInt::zero(); 4];
            for (r, w) in mu.rankings().iter().zip(nums) {
                sums[cell(r)] += w;
            }
            let live: Vec<usize> = (0..4).filter(|&c| !sums[c].is_zero()).collect();
            let masks = live.iter().map(|&c| c as u64).collect::<Vec<_>>();
            (masks, DigitWeights::Exact { nums: live.iter().map(|&c| sums[c].clone()).collect(), den })
        }
        _ => {
            let mut sums = [0.0; 4];
            for (idx, r) in mu.rankings().iter().enumerate() {
                sums[cell(r)] += mu.prob(idx);
            }
            let live: Vec<usize> = (0..4).filter(|&c| sums[c] > 0.0).collect();
            let masks = live.iter().map(|&c| c as u64).collect::<Vec<_>>();
            (masks, DigitWeights::Float(live.iter().map(|&c| sums[c]).collect()))
        }
    };
    enumerate::probability(&masks, &weights, 2, f.n(), budget, |idx| piv_ab[idx[0]] && piv_bc[idx[1]])
}

/// Influence of voter `i` on `g` as an exact fraction of the cube.
fn influence_exact(g: &BooleanFunction, i: usize) -> BigRational {
    let bit = 1 << i;
    let count = (0..g.len()).filter(|x| x & bit == 0 && g.is_plus(*x) != g.is_plus(x | bit)).count();
    BigRational::new(count.into(), (g.len() / 2).into())
}

/// Which version of a bound applies to a vote distribution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Uniform,
    /// Symmetric with minimal atom `alpha`; exponents involve `1/(2 alpha)`.
    Symmetric,
}

fn regime(mu: &VoteDistribution) -> Result<Regime> {
    let uniform = match mu.weights() {
        Weights::Exact(p) => p.iter().all(|q| q == &p[0]),
        Weights::Float(p) => p.iter().all(|q| (q - p[0]).abs() <= 1e-15),
    };
    if uniform {
        Ok(Regime::Uniform)
    } else if mu.is_symmetric() {
        Ok(Regime::Symmetric)
    } else {
        Err(Error::AsymmetricDistribution)
    }
}

/// `ε^{1/(2α)}`, the symmetric-distribution exponent; 0 when `α = 0`.
fn symmetric_power(eps: f64, alpha: f64) -> f64 {
    if alpha <= 0.0 {
        0.0
    } else {
        eps.powf(1.0 / (2.0 * alpha))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct JointPivotalReport {
    pub voters: (usize, usize),
    pub regime: Regime,
    /// `min(I_i(f^{a>b}), I_j(f^{b>c}))`.
    pub epsilon: Quantity,
    pub probability: Quantity,
    pub bound: Quantity,
    pub holds: bool,
}

/// Checks `P[B] ≥ ε³` (uniform) or `P[B] ≥ ε^{1/(2α)}` (symmetric) for the
/// joint pivotality event `B` of voters `i`, `j`.
pub fn check_joint_pivotal_bound(
    f: &Constitution,
    i: usize,
    j: usize,
    mu: &VoteDistribution,
    budget: u64,
) -> Result<JointPivotalReport> {
    let regime = regime(mu)?;
    let probability = joint_pivotal_probability(f, i, j, mu, budget)?;
    let eps = influence_exact(&f.oriented(0, 1)?, i).min(influence_exact(&f.oriented(1, 2)?, j));
    let (bound, holds) = match regime {
        Regime::Uniform => {
            let b = num_traits::pow(eps.clone(), 3);
            let holds = match &probability {
                Quantity::Exact(p) => *p >= b,
                Quantity::Approx(p) => *p >= rational_to_f64(&b) - 1e-12,
            };
            (Quantity::Exact(b), holds)
        }
        Regime::Symmetric => {
            let b = symmetric_power(rational_to_f64(&eps), mu.alpha().to_f64());
            (Quantity::Approx(b), probability.to_f64() >= b - 1e-12)
        }
    };
    Ok(JointPivotalReport { voters: (i, j), regime, epsilon: Quantity::Exact(eps), probability, bound, holds })
}

#[derive(Clone, Debug, Serialize)]
pub struct TwoInfluentialReport {
    pub regime: Regime,
    /// Largest `min(I_i(f), I_j(g))` over distinct voters and distinct pair
    /// functions.
    pub epsilon: Quantity,
    /// Voters and canonical pairs attaining `epsilon`, when it is positive.
    pub witness: Option<TwoInfluentialWitness>,
    pub paradox: Quantity,
    pub bound: Quantity,
    /// True when `epsilon = 0`, so the bound says nothing.
    pub vacuous: bool,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TwoInfluentialWitness {
    pub voters: (usize, usize),
    pub pairs: ((usize, usize), (usize, usize)),
}

/// Checks `P(F) ≥ ε³/36` (uniform) or `P(F) ≥ α² ε^{1/(2α)}` (symmetric).
pub fn check_two_influential_bound(f: &Constitution, mu: &VoteDistribution, budget: u64) -> Result<TwoInfluentialReport> {
    require_k3(f)?;
    let regime = regime(mu)?;
    let pairs = [(0, 1), (0, 2), (1, 2)];
    let infl: Vec<Vec<BigRational>> = f
        .pair_functions()
        .iter()
        .map(|g| (0..f.n()).map(|i| influence_exact(g, i)).collect())
        .collect();
    let mut eps = BigRational::zero();
    let mut witness = None;
    for p in 0..3 {
        for q in (0..3).filter(|&q| q != p) {
            for i in 0..f.n() {
                for j in (0..f.n()).filter(|&j| j != i) {
                    let m = infl[p][i].clone().min(infl[q][j].clone());
                    if m > eps {
                        eps = m;
                        witness = Some(TwoInfluentialWitness { voters: (i, j), pairs: (pairs[p], pairs[q]) });
                    }
                }
            }
        }
    }
    let paradox = f.paradox_probability_exact(mu, budget)?;
    let vacuous = eps.is_zero();
    let (bound, holds) = match regime {
        Regime::Uniform => {
            let b = num_traits::pow(eps.clone(), 3) / BigRational::from_integer(36.into());
            let holds = match &paradox {
                Quantity::Exact(p) => *p >= b,
                Quantity::Approx(p) => *p >= rational_to_f64(&b) - 1e-12,
            };
            (Quantity::Exact(b), holds)
        }
        Regime::Symmetric => {
            let alpha = mu.alpha().to_f64();
            let b = alpha * alpha * symmetric_power(rational_to_f64(&eps), alpha);
            (Quantity::Approx(b), paradox.to_f64() >= b - 1e-12)
        }
    };
    Ok(TwoInfluentialReport { regime, epsilon: Quantity::Exact(eps), witness, paradox, bound, vacuous, holds })
}
