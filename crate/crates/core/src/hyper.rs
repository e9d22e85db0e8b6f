//! Correlated intersection probabilities of subsets of the cube, checked
//! against the reverse-hypercontractive lower bound.

use rand::Rng;
use serde::Serialize;

use crate::boolfn::{correlated_expectation, BooleanFunction, BoundedFunction};
use crate::error::{Error, Result};
use crate::gaussian::{normal_tail, pair_agreement};

/// A subset of `{-1, 1}^n`; bit `i` of an index set means `x_i = +1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndicatorSet {
    members: BooleanFunction,
}

impl IndicatorSet {
    pub fn from_fn<F: FnMut(usize) -> bool>(n: usize, member: F) -> Result<Self> {
        Ok(IndicatorSet { members: BooleanFunction::from_fn(n, member)? })
    }

    pub fn from_function(members: BooleanFunction) -> Self {
        IndicatorSet { members }
    }

    pub fn full(n: usize) -> Result<Self> {
        Self::from_fn(n, |_| true)
    }

    /// `{x : x_i = sign}`.
    pub fn half_cube(n: usize, i: usize, sign: i8) -> Result<Self> {
        check_coord(n, i)?;
        Self::from_fn(n, |x| (x >> i & 1 == 1) == (sign > 0))
    }

    /// Each point independently with probability `density`.
    pub fn random<R: Rng + ?Sized>(n: usize, density: f64, rng: &mut R) -> Result<Self> {
        if !(0.0..=1.0).contains(&density) {
            return Err(Error::InvalidParameter(format!("density {density} outside [0, 1]")));
        }
        Self::from_fn(n, |_| rng.random_bool(density))
    }

    /// Points within Hamming distance `radius` of `center`.
    pub fn hamming_ball(n: usize, center: usize, radius: usize) -> Result<Self> {
        Self::from_fn(n, |x| ((x ^ center).count_ones() as usize) <= radius)
    }

    /// Points agreeing with `values` on the coordinates set in `fixed`.
    pub fn subcube(n: usize, fixed: usize, values: usize) -> Result<Self> {
        Self::from_fn(n, |x| (x ^ values) & fixed == 0)
    }

    /// The first `count` points in lexicographic order, reading `x_{n-1}`
    /// as the most significant coordinate and `-1` before `+1`.
    pub fn lex_prefix(n: usize, count: usize) -> Result<Self> {
        Self::from_fn(n, |x| x < count)
    }

    pub fn n(&self) -> usize {
        self.members.n()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.members.is_plus(index)
    }

    pub fn size(&self) -> usize {
        self.members.count_plus()
    }

    pub fn measure(&self) -> f64 {
        self.size() as f64 / self.members.len() as f64
    }

    /// `{x : x ⊙ s ∈ B}` where `s_i = -1` exactly on the coordinates in `mask`.
    pub fn negate_coordinates(&self, mask: usize) -> Self {
        let f = &self.members;
        IndicatorSet {
            members: BooleanFunction::from_fn(f.n(), |x| f.is_plus(x ^ mask)).expect("same n"),
        }
    }

    pub fn indicator(&self) -> BoundedFunction {
        let values = (0..self.members.len()).map(|x| if self.contains(x) { 1.0 } else { 0.0 }).collect();
        BoundedFunction::new(self.n(), values).expect("0/1 values")
    }
}

fn check_coord(n: usize, i: usize) -> Result<()> {
    if i >= n {
        return Err(Error::InvalidParameter(format!("coordinate {i} out of range for n = {n}")));
    }
    Ok(())
}

/// `P[x ∈ B1, y ∈ B2]` for uniform `x, y` with independent coordinate pairs
/// and `E[x_i y_i] = rho[i]`, from the Fourier expansions of the indicators.
pub fn correlated_intersection(b1: &IndicatorSet, b2: &IndicatorSet, rho: &[f64]) -> Result<f64> {
    correlated_expectation(&b1.indicator(), &b2.indicator(), rho)
}

#[derive(Clone, Debug, Serialize)]
pub struct HcReport {
    pub measures: [f64; 2],
    pub epsilon: f64,
    pub intersection: f64,
    /// `ε^{2/(1-ρ)}`.
    pub bound: f64,
    /// `exp(-(α² + β² + 2ραβ)/(1-ρ²))` with `P[B1] = e^{-α²}`, `P[B2] = e^{-β²}`.
    pub general_bound: f64,
    pub slack: f64,
    /// The intersection falls below `bound`.
    pub violated: bool,
    /// The intersection falls below `general_bound`.
    pub general_violated: bool,
}

/// Absolute tolerance for the floating-point intersection.
pub const HC_TOLERANCE: f64 = 1e-12;

fn hc_report(m1: f64, m2: f64, intersection: f64, rho_bound: f64) -> HcReport {
    let epsilon = m1.min(m2);
    let bound = if epsilon == 0.0 { 0.0 } else { epsilon.powf(2.0 / (1.0 - rho_bound)) };
    let general_bound = if epsilon == 0.0 {
        0.0
    } else {
        let (a, b) = ((-m1.ln()).max(0.0).sqrt(), (-m2.ln()).max(0.0).sqrt());
        (-(a * a + b * b + 2.0 * rho_bound * a * b) / (1.0 - rho_bound * rho_bound)).exp()
    };
    let slack = intersection - bound;
    HcReport {
        measures: [m1, m2],
        epsilon,
        intersection,
        bound,
        general_bound,
        slack,
        violated: intersection < bound - HC_TOLERANCE,
        general_violated: intersection < general_bound - HC_TOLERANCE,
    }
}

fn check_rho_bound(rho_bound: f64) -> Result<()> {
    if !(0.0..1.0).contains(&rho_bound) {
        return Err(Error::InvalidParameter(format!("rho bound must lie in [0, 1), got {rho_bound}")));
    }
    Ok(())
}

/// Compares the exact intersection probability with the lower bound for
/// correlations bounded by `rho_bound` in absolute value.
pub fn check_reverse_hc(b1: &IndicatorSet, b2: &IndicatorSet, rho: &[f64], rho_bound: f64) -> Result<HcReport> {
    check_rho_bound(rho_bound)?;
    if let Some(r) = rho.iter().find(|r| !(r.abs() <= rho_bound)) {
        return Err(Error::InvalidParameter(format!("|rho_i| = {} exceeds the bound {rho_bound}", r.abs())));
    }
    let intersection = correlated_intersection(b1, b2, rho)?;
    Ok(hc_report(b1.measure(), b2.measure(), intersection, rho_bound))
}

/// The one-dimensional Gaussian case with half-lines `{s_1 N > t_1}` and
/// `{s_2 M > t_2}`, where `E[NM] = rho`.
pub fn check_gaussian_half_lines(t: [f64; 2], signs: [i8; 2], rho: f64, rho_bound: f64) -> Result<HcReport> {
    check_rho_bound(rho_bound)?;
    if !(rho.abs() <= rho_bound) {
        return Err(Error::InvalidParameter(format!("|rho| = {} exceeds the bound {rho_bound}", rho.abs())));
    }
    // s N > t has the law of N > t, and flipping a sign flips the correlation.
    let effective = rho * f64::from(signs[0]) * f64::from(signs[1]);
    let intersection = pair_agreement(t[0], t[1], effective);
    Ok(hc_report(normal_tail(t[0]), normal_tail(t[1]), intersection, rho_bound))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SetFamily {
    Random,
    Balls,
    Subcubes,
    LexPrefixes,
}

impl SetFamily {
    pub const ALL: [SetFamily; 4] = [SetFamily::Random, SetFamily::Balls, SetFamily::Subcubes, SetFamily::LexPrefixes];

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "random" => Some(SetFamily::Random),
            "balls" => Some(SetFamily::Balls),
            "subcubes" => Some(SetFamily::Subcubes),
            "lex" | "lex_prefixes" | "lex-prefixes" => Some(SetFamily::LexPrefixes),
            _ => None,
        }
    }

    /// A random nonempty member of the family.
    pub fn sample<R: Rng + ?Sized>(self, n: usize, rng: &mut R) -> Result<IndicatorSet> {
        let len = 1usize << n;
        loop {
            let set = match self {
                SetFamily::Random => {
                    let density = rng.random_range(0.02..=1.0);
                    IndicatorSet::random(n, density, rng)?
                }
                SetFamily::Balls => IndicatorSet::hamming_ball(n, rng.random_range(0..len), rng.random_range(0..=n))?,
                SetFamily::Subcubes => IndicatorSet::subcube(n, rng.random_range(0..len), rng.random_range(0..len))?,
                SetFamily::LexPrefixes => IndicatorSet::lex_prefix(n, rng.random_range(1..=len))?,
            };
            if set.size() > 0 {
                return Ok(set);
            }
        }
    }
}
