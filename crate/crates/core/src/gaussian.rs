//! Correlated Gaussian triples, threshold functions of them, and the
//! Gaussian counterparts of paradox probability and low-influence drift.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::montecarlo::{bernoulli, block_rng, Estimate};

/// `P[N > x]` for a standard normal `N`.
pub fn normal_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

pub fn normal_density(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `n` independent copies of a 3-vector with unit variances and pairwise
/// correlation `rho`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GaussianTripleSpec {
    n: usize,
    rho: f64,
}

impl GaussianTripleSpec {
    pub const ARROW_RHO: f64 = -1.0 / 3.0;

    pub fn new(n: usize, rho: f64) -> Result<Self> {
        if !(-0.5..=1.0).contains(&rho) {
            return Err(Error::InvalidCorrelation { rho });
        }
        if n == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        Ok(GaussianTripleSpec { n, rho })
    }

    /// The correlation `-1/3` of a uniform voter's pair indicators.
    pub fn arrow(n: usize) -> Result<Self> {
        Self::new(n, Self::ARROW_RHO)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Lower-triangular `L` with `L Lᵀ` equal to the 3×3 block correlation.
    pub fn cholesky(&self) -> [[f64; 3]; 3] {
        let r = self.rho;
        let l22 = (1.0 - r * r).sqrt();
        let l32 = if r >= 1.0 { 0.0 } else { r * ((1.0 - r) / (1.0 + r)).sqrt() };
        // 1 - r² - l32², factored so it vanishes exactly at r = -1/2 and r = 1.
        let l33 = if r >= 1.0 { 0.0 } else { ((1.0 - r) * (1.0 + 2.0 * r) / (1.0 + r)).max(0.0).sqrt() };
        [[1.0, 0.0, 0.0], [r, l22, 0.0], [r, l32, l33]]
    }

    /// One draw of `(N_1, N_2, N_3)`, each of dimension `n`.
    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [Vec<f64>; 3]) {
        let l = self.cholesky();
        for v in out.iter_mut() {
            v.resize(self.n, 0.0);
        }
        for m in 0..self.n {
            let z: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
            for (i, v) in out.iter_mut().enumerate() {
                v[m] = l[i][0] * z[0] + l[i][1] * z[1] + l[i][2] * z[2];
            }
        }
    }
}

/// A deterministic draw: stream `stream` of the generator keyed by `seed`.
pub fn sample_triple(spec: &GaussianTripleSpec, seed: u64, stream: u64) -> [Vec<f64>; 3] {
    let mut out = [Vec::new(), Vec::new(), Vec::new()];
    spec.sample_with(&mut block_rng(seed, stream), &mut out);
    out
}

/// `x ↦ +1` iff `⟨w, x⟩ > t`, with `w` of unit length. `t = ±∞` gives the
/// constants `-1` and `+1` exactly.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdFunction {
    weights: Vec<f64>,
    t: f64,
}

impl ThresholdFunction {
    /// Normalizes `weights`; `t` applies after normalization.
    pub fn new(weights: Vec<f64>, t: f64) -> Result<Self> {
        let norm = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidParameter("threshold weights must be finite and not all zero".into()));
        }
        if t.is_nan() {
            return Err(Error::InvalidParameter("threshold is NaN".into()));
        }
        Ok(ThresholdFunction { weights: weights.into_iter().map(|w| w / norm).collect(), t })
    }

    pub fn scalar(t: f64) -> Result<Self> {
        Self::new(vec![1.0], t)
    }

    pub fn constant(n: usize, sign: i8) -> Result<Self> {
        let mut w = vec![0.0; n.max(1)];
        w[0] = 1.0;
        Self::new(w, if sign > 0 { f64::NEG_INFINITY } else { f64::INFINITY })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn threshold(&self) -> f64 {
        self.t
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn value(&self, x: &[f64]) -> i8 {
        let s: f64 = self.weights.iter().zip(x).map(|(w, v)| w * v).sum();
        if s > self.t {
            1
        } else {
            -1
        }
    }

    /// `P[f(N) = +1]` for standard Gaussian input.
    pub fn prob_plus(&self) -> f64 {
        normal_tail(self.t)
    }

    pub fn mean(&self) -> f64 {
        2.0 * self.prob_plus() - 1.0
    }

    fn inner(&self, other: &ThresholdFunction) -> f64 {
        self.weights.iter().zip(&other.weights).map(|(a, b)| a * b).sum::<f64>().clamp(-1.0, 1.0)
    }
}

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1], positive half.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let center = f(c);
    let mut kronrod = WGK[7] * center;
    let mut gauss = WG[3] * center;
    for j in 0..7 {
        let pair = f(c - h * XGK[j]) + f(c + h * XGK[j]);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * h, (kronrod - gauss).abs() * h)
}

/// Adaptive Gauss–Kronrod quadrature to absolute tolerance `tol`.
fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let mut total = 0.0;
    let mut stack = vec![(a, b, 0u32)];
    while let Some((lo, hi, depth)) = stack.pop() {
        let (value, err) = gk15(f, lo, hi);
        if err <= tol * (hi - lo) / (b - a) || depth >= 60 {
            total += value;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, depth + 1));
            stack.push((mid, hi, depth + 1));
        }
    }
    total
}

const CUTOFF: f64 = 40.0;

/// `P[N_1 > t1, N_2 > t2]` for standard normals with correlation `rho`,
/// by integrating the conditional tail of `N_2` against the density of `N_1`.
fn orthant_by_quadrature(t1: f64, t2: f64, rho: f64) -> f64 {
    let s = (1.0 - rho * rho).sqrt();
    let a = t1.max(-CUTOFF);
    if a >= CUTOFF {
        return 0.0;
    }
    let f = |x: f64| normal_density(x) * normal_tail((t2 - rho * x) / s);
    // The conditional tail is steep around x = t2 / rho when |rho| is near 1.
    let kink = t2 / rho;
    if rho != 0.0 && kink > a && kink < CUTOFF {
        integrate(&f, a, kink, 5e-14) + integrate(&f, kink, CUTOFF, 5e-14)
    } else {
        integrate(&f, a, CUTOFF, 1e-13)
    }
}

/// `P[N_1 > t1, N_2 > t2]` for standard normals with correlation `rho`.
/// Infinite thresholds are allowed.
pub fn pair_agreement(t1: f64, t2: f64, rho: f64) -> f64 {
    assert!(rho.abs() <= 1.0, "correlation {rho} outside [-1, 1]");
    if t1 == f64::INFINITY || t2 == f64::INFINITY {
        return 0.0;
    }
    if t1 == f64::NEG_INFINITY {
        return normal_tail(t2);
    }
    if t2 == f64::NEG_INFINITY {
        return normal_tail(t1);
    }
    if rho == 1.0 {
        return normal_tail(t1.max(t2));
    }
    if rho == -1.0 {
        // N_2 = -N_1, so the event is t1 < N_1 < -t2.
        return (normal_tail(t1) - normal_tail(-t2)).max(0.0);
    }
    if t1 == 0.0 && t2 == 0.0 {
        return 0.25 + rho.asin() / (2.0 * std::f64::consts::PI);
    }
    if rho == 0.0 {
        return normal_tail(t1) * normal_tail(t2);
    }
    orthant_by_quadrature(t1, t2, rho)
}

/// `E[f(X) g(Y)]` for standard Gaussians `X, Y` whose projections onto the
/// two weight vectors have correlation `rho`.
fn sign_correlation(t1: f64, t2: f64, rho: f64) -> f64 {
    1.0 - 2.0 * normal_tail(t1) - 2.0 * normal_tail(t2) + 4.0 * pair_agreement(t1, t2, rho)
}

#[derive(Clone, Debug, Serialize)]
pub struct GaussianParadox {
    /// `P[f_1(N_1) = f_2(N_2) = f_3(N_3)]`.
    pub probability: f64,
    /// `E[f_1 f_2]`, `E[f_2 f_3]`, `E[f_3 f_1]`.
    pub correlations: [f64; 3],
}

fn check_dims(fs: [&ThresholdFunction; 3], spec: &GaussianTripleSpec) -> Result<()> {
    if let Some(f) = fs.iter().find(|f| f.n() != spec.n()) {
        return Err(Error::ShapeMismatch(format!("threshold function has n = {}, triple has n = {}", f.n(), spec.n())));
    }
    Ok(())
}

/// The probability that all three functions agree, from the three pairwise
/// correlations: `1{s_1 = s_2 = s_3} = (1 + s_1 s_2 + s_2 s_3 + s_3 s_1) / 4`.
pub fn gaussian_paradox_probability(fs: [&ThresholdFunction; 3], spec: &GaussianTripleSpec) -> Result<GaussianParadox> {
    check_dims(fs, spec)?;
    let correlations: [f64; 3] = std::array::from_fn(|i| {
        let (f, g) = (fs[i], fs[(i + 1) % 3]);
        sign_correlation(f.t, g.t, spec.rho() * f.inner(g))
    });
    let probability = (0.25 * (1.0 + correlations.iter().sum::<f64>())).clamp(0.0, 1.0);
    Ok(GaussianParadox { probability, correlations })
}

pub fn gaussian_paradox_mc(fs: [&ThresholdFunction; 3], spec: &GaussianTripleSpec, samples: u64, seed: u64) -> Result<Estimate> {
    check_dims(fs, spec)?;
    bernoulli(samples, seed, || [Vec::new(), Vec::new(), Vec::new()], |rng, triple| {
        spec.sample_with(rng, triple);
        let v = fs[0].value(&triple[0]);
        v == fs[1].value(&triple[1]) && v == fs[2].value(&triple[2])
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GaussianArrowReport {
    pub epsilon: f64,
    /// `P[f_i = u, f_{i+1} = -u]` for `i = 1, 2, 3` and `u = +1, -1`.
    pub hypothesis: [[f64; 2]; 3],
    pub probability: f64,
    /// `(ε/2)^18`.
    pub bound: f64,
    pub holds: bool,
}

/// Checks the non-dictatorship hypothesis at `epsilon`, then compares the
/// agreement probability with `(ε/2)^18`.
pub fn check_gaussian_arrow_bound(
    fs: [&ThresholdFunction; 3],
    spec: &GaussianTripleSpec,
    epsilon: f64,
) -> Result<GaussianArrowReport> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    check_dims(fs, spec)?;
    let limit = 1.0 - epsilon;
    let mut hypothesis = [[0.0; 2]; 3];
    for i in 0..3 {
        let (f, g) = (fs[i], fs[(i + 1) % 3]);
        let both = pair_agreement(f.t, g.t, spec.rho() * f.inner(g));
        let plus_minus = (f.prob_plus() - both).max(0.0);
        // P[f = -1, g = +1] = P[g = +1] - P[both +1].
        let minus_plus = (g.prob_plus() - both).max(0.0);
        hypothesis[i] = [plus_minus, minus_plus];
        for (u, prob) in [(1i8, plus_minus), (-1, minus_plus)] {
            if prob > limit {
                return Err(Error::HypothesisFailed { i: i + 1, j: (i + 1) % 3 + 1, u, neg_u: -u, prob, limit });
            }
        }
    }
    let probability = gaussian_paradox_probability(fs, spec)?.probability;
    let bound = (epsilon / 2.0).powi(18);
    Ok(GaussianArrowReport { epsilon, hypothesis, probability, bound, holds: probability >= bound })
}

/// `x ↦ +1` iff `Σ w_i x_i > threshold` on the cube, with integer weights.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LinearThreshold {
    weights: Vec<i64>,
    threshold: i64,
}

impl LinearThreshold {
    pub fn new(weights: Vec<i64>, threshold: i64) -> Result<Self> {
        if weights.iter().all(|&w| w == 0) {
            return Err(Error::InvalidParameter("linear threshold needs a nonzero weight".into()));
        }
        Ok(LinearThreshold { weights, threshold })
    }

    pub fn majority(n: usize) -> Result<Self> {
        if n.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!("majority needs odd n, got {n}")));
        }
        Self::new(vec![1; n], 0)
    }

    pub fn dictator(n: usize, i: usize) -> Result<Self> {
        if i >= n {
            return Err(Error::InvalidParameter(format!("voter {i} out of range for n = {n}")));
        }
        let mut w = vec![0; n];
        w[i] = 1;
        Self::new(w, 0)
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[i64] {
        &self.weights
    }

    pub fn threshold(&self) -> i64 {
        self.threshold
    }

    /// `x_i = +1` iff bit `i` of `index` is set.
    pub fn value(&self, index: usize) -> i8 {
        let s: i64 = self.weights.iter().enumerate().map(|(i, w)| if index >> i & 1 == 1 { *w } else { -*w }).sum();
        if s > self.threshold {
            1
        } else {
            -1
        }
    }

    pub fn to_boolean(&self) -> Result<crate::boolfn::BooleanFunction> {
        crate::boolfn::BooleanFunction::from_fn(self.n(), |x| self.value(x) == 1)
    }

    /// The Gaussian threshold function with the same normalized weights.
    pub fn gaussian(&self) -> ThresholdFunction {
        let norm = self.weights.iter().map(|&w| (w * w) as f64).sum::<f64>().sqrt();
        ThresholdFunction::new(self.weights.iter().map(|&w| w as f64).collect(), self.threshold as f64 / norm)
            .expect("a nonzero weight")
    }

    fn span(&self) -> i64 {
        self.weights.iter().map(|w| w.abs()).sum()
    }

    /// Every coordinate's influence, computed from the distribution of the
    /// other coordinates' weighted sum.
    pub fn influences(&self) -> Vec<f64> {
        let span = self.span();
        let mut cache: Vec<(i64, f64)> = Vec::new();
        (0..self.n())
            .map(|i| {
                let w = self.weights[i].abs();
                if w == 0 {
                    return 0.0;
                }
                // Coordinates with equal |w_i| share the same answer.
                if let Some(&(_, v)) = cache.iter().find(|(c, _)| *c == w) {
                    return v;
                }
                let mut dist = vec![0.0; (2 * span + 1) as usize];
                dist[span as usize] = 1.0;
                for (j, &wj) in self.weights.iter().enumerate() {
                    if j != i && wj != 0 {
                        dist = shift_half(&dist, wj.abs());
                    }
                }
                // x_i is pivotal iff threshold - |w_i| < S ≤ threshold + |w_i|.
                let v = dist
                    .iter()
                    .enumerate()
                    .filter(|(s, _)| {
                        let s = *s as i64 - span;
                        self.threshold - w < s && s <= self.threshold + w
                    })
                    .map(|(_, p)| p)
                    .sum();
                cache.push((w, v));
                v
            })
            .collect()
    }
}

/// The distribution of `S ± w` with equal probability.
fn shift_half(dist: &[f64], w: i64) -> Vec<f64> {
    let w = w as usize;
    let mut out = vec![0.0; dist.len()];
    for (s, &p) in dist.iter().enumerate() {
        if p != 0.0 {
            out[s + w] += 0.5 * p;
            out[s - w] += 0.5 * p;
        }
    }
    out
}

const MAX_CELLS: i64 = 1 << 26;

/// Exact `E[f(X) g(Y)]` on the cube with `E[X_i Y_i] = rho` for every `i`,
/// by dynamic programming over the pair of weighted sums.
pub fn cube_correlation(f: &LinearThreshold, g: &LinearThreshold, rho: f64) -> Result<f64> {
    if f.n() != g.n() {
        return Err(Error::ShapeMismatch(format!("n = {} vs n = {}", f.n(), g.n())));
    }
    if !(rho.abs() <= 1.0) {
        return Err(Error::InvalidParameter(format!("|rho| must be at most 1, got {rho}")));
    }
    let (sf, sg) = (f.span(), g.span());
    let (wf, wg) = (2 * sf + 1, 2 * sg + 1);
    if wf.saturating_mul(wg) > MAX_CELLS {
        return Err(Error::InvalidParameter(format!("weight spans {sf} and {sg} are too large")));
    }
    let (same, diff) = ((1.0 + rho) / 4.0, (1.0 - rho) / 4.0);
    let mut dist = vec![0.0; (wf * wg) as usize];
    dist[(sf * wg + sg) as usize] = 1.0;
    // Reachable sums stay within the running spans.
    let (mut rf, mut rg) = (0i64, 0i64);
    for (&a, &b) in f.weights.iter().zip(&g.weights) {
        let mut next = vec![0.0; dist.len()];
        for x in -rf..=rf {
            for y in -rg..=rg {
                let p = dist[((x + sf) * wg + y + sg) as usize];
                if p == 0.0 {
                    continue;
                }
                for (dx, dy, q) in [(a, b, same), (-a, -b, same), (a, -b, diff), (-a, b, diff)] {
                    next[((x + dx + sf) * wg + y + dy + sg) as usize] += p * q;
                }
            }
        }
        dist = next;
        rf += a.abs();
        rg += b.abs();
    }
    let sign = |s: i64, t: i64| if s > t { 1.0 } else { -1.0 };
    let mut total = 0.0;
    for x in -sf..=sf {
        for y in -sg..=sg {
            let p = dist[((x + sf) * wg + y + sg) as usize];
            if p != 0.0 {
                total += p * sign(x, f.threshold) * sign(y, g.threshold);
            }
        }
    }
    Ok(total)
}

#[derive(Clone, Debug, Serialize)]
pub struct DriftReport {
    pub rho: f64,
    pub cube: f64,
    pub gaussian: f64,
    pub gap: f64,
    pub max_influence: [f64; 2],
}

/// Compares `E[f(X) g(Y)]` on the cube with the Gaussian value for the
/// threshold functions carrying the same normalized weights.
pub fn hypercube_vs_gaussian_drift(f: &LinearThreshold, g: &LinearThreshold, rho: f64) -> Result<DriftReport> {
    let cube = cube_correlation(f, g, rho)?;
    let (ft, gt) = (f.gaussian(), g.gaussian());
    let gaussian = sign_correlation(ft.t, gt.t, rho * ft.inner(&gt));
    let max = |h: &LinearThreshold| h.influences().into_iter().fold(0.0, f64::max);
    Ok(DriftReport { rho, cube, gaussian, gap: (cube - gaussian).abs(), max_influence: [max(f), max(g)] })
}

/// Random-looking but reproducible unit weight vectors for sweeps.
pub fn random_unit_weights(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let w: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        if w.iter().any(|x: &f64| *x != 0.0) {
            return w;
        }
    }
}
