//! Stochastic compressors and their verification.
//!
//! A compressor pairs a randomized encoder `E(omega, h) -> bits` with a
//! deterministic decoder `D(bits) -> function values`. The claims attached to
//! one are:
//!
//! - *unbiasedness*: `E[D(E(omega, h))](x) = h(x)` for every point `x`;
//! - *second moment*: for every unit direction `u`, the squared deviation
//!   `<u, D(..)(x) - h(x)>^2`, averaged over `x` from the empirical
//!   distribution and over the encoder's randomness, is at most `sigma^2`;
//! - *budget*: the expected codeword length is at most `claimed_bits`.
//!
//! [`verify_estimator`] measures all three by Monte Carlo with per-trial
//! substreams (bit-reproducible at any worker count). The directional second
//! moment is certified through the exact top eigenvalue of the pooled
//! deviation matrix rather than by sampling directions.
//!
//! Combinators: [`amplify`] averages `ceil(eps^-2)` independent copies and
//! contracts sigma by `eps`; [`median_boost`] takes a coordinate-wise lower
//! median of `k` copies, trading unbiasedness for exponential tails; and
//! [`transport`] carries a compressor along an isometric embedding without
//! touching its code-length distribution.

use rayon::prelude::*;
use serde::Serialize;

use crate::core::{
    ceil_log2, top_eig_with_vector, BitCursor, BitString, EmpiricalDistribution,
    FiniteFunctionClass, FunctionValues, Matrix, RandomStream,
};
use crate::error::{AdlError, Result};
use crate::sketch::{decode_sketch, encode_sketch_into, sketch_codeword_bits_bound, sketch_once};

/// Fixed work-chunk size for parallel Monte Carlo loops. Chunk boundaries are
/// independent of the worker count and partial results are folded in chunk
/// order, so totals are bit-identical no matter how many threads run.
pub(crate) const PAR_CHUNK: usize = 1024;

/// A stochastic (or deterministic) compressor for hypotheses of a finite
/// function class.
pub trait Compressor: Send + Sync {
    /// Emit one prefix-free codeword for hypothesis `h` of `class`.
    fn encode(
        &self,
        rng: &mut RandomStream,
        class: &FiniteFunctionClass,
        h: usize,
    ) -> Result<BitString>;

    /// Consume exactly one codeword from the cursor.
    fn decode(&self, cur: &mut BitCursor) -> Result<FunctionValues>;

    /// Claimed directional second-moment parameter.
    fn claimed_sigma(&self) -> f64;

    /// Claimed expected codeword length in bits.
    fn claimed_bits(&self) -> f64;

    /// Shape `(num_points, dim)` of decoded outputs.
    fn output_shape(&self) -> (usize, usize);
}

pub(crate) fn check_class_shape(c: &dyn Compressor, class: &FiniteFunctionClass) -> Result<()> {
    let (m, d) = c.output_shape();
    if class.num_points() != m || class.dim() != d {
        return Err(AdlError::invalid_parameter(format!(
            "compressor built for {m} points x dim {d}, class has {} x {}",
            class.num_points(),
            class.dim()
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Exact index coding (the deterministic baseline)
// ---------------------------------------------------------------------------

/// Zero-variance baseline: spend `ceil(log2 |H|)` bits on the hypothesis
/// index. Exact, deterministic, and the thing stochastic budgets are measured
/// against.
#[derive(Debug, Clone)]
pub struct ExactIndexCompressor {
    class: FiniteFunctionClass,
}

impl ExactIndexCompressor {
    pub fn new(class: &FiniteFunctionClass) -> Self {
        ExactIndexCompressor {
            class: class.clone(),
        }
    }
}

impl Compressor for ExactIndexCompressor {
    fn encode(
        &self,
        _rng: &mut RandomStream,
        class: &FiniteFunctionClass,
        h: usize,
    ) -> Result<BitString> {
        check_class_shape(self, class)?;
        class.check_hypothesis_index(h)?;
        let mut bits = BitString::new();
        bits.push_bits(h as u64, ceil_log2(self.class.num_hypotheses()));
        Ok(bits)
    }

    fn decode(&self, cur: &mut BitCursor) -> Result<FunctionValues> {
        let h = cur.read_bits(ceil_log2(self.class.num_hypotheses()))? as usize;
        if h >= self.class.num_hypotheses() {
            return Err(AdlError::decode(format!(
                "hypothesis index {h} out of range ({})",
                self.class.num_hypotheses()
            )));
        }
        Ok(self.class.function_values(h))
    }

    fn claimed_sigma(&self) -> f64 {
        0.0
    }

    fn claimed_bits(&self) -> f64 {
        ceil_log2(self.class.num_hypotheses()) as f64
    }

    fn output_shape(&self) -> (usize, usize) {
        (self.class.num_points(), self.class.dim())
    }
}

// ---------------------------------------------------------------------------
// Sketch compressor for norm balls
// ---------------------------------------------------------------------------

/// Pointwise k-sketch compressor for classes whose values stay in the
/// Euclidean ball of a given radius.
#[derive(Debug, Clone)]
pub struct SketchCompressor {
    radius: f64,
    dim: usize,
    num_points: usize,
    copies: usize,
    sigma: f64,
}

/// Compressor for vectors with `|q| <= radius` in `R^dim`: averages
/// `k = ceil((1/4 + 2 radius^2) / sigma_target^2)` one-coordinate sketches
/// per point, so the directional second moment is at most `sigma_target^2`.
///
/// Built for single-point classes; use [`SketchCompressor::with_num_points`]
/// to apply it pointwise to classes over larger point sets.
pub fn ball_compressor(radius: f64, dim: usize, sigma_target: f64) -> Result<SketchCompressor> {
    if dim == 0 {
        return Err(AdlError::invalid_parameter("dimension must be >= 1"));
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(AdlError::invalid_parameter(format!(
            "radius must be positive and finite, got {radius}"
        )));
    }
    let worst = (0.25 + 2.0 * radius * radius).sqrt();
    if !(sigma_target > 0.0 && sigma_target <= worst) {
        return Err(AdlError::invalid_parameter(format!(
            "sigma_target {sigma_target} outside (0, {worst:.6}] for radius {radius}"
        )));
    }
    let copies = ((0.25 + 2.0 * radius * radius) / (sigma_target * sigma_target)).ceil() as usize;
    Ok(SketchCompressor {
        radius,
        dim,
        num_points: 1,
        copies,
        sigma: sigma_target,
    })
}

impl SketchCompressor {
    /// Same sketch parameters, applied pointwise over `num_points` points.
    pub fn with_num_points(mut self, num_points: usize) -> Self {
        assert!(num_points >= 1);
        self.num_points = num_points;
        self
    }

    /// Number of sketches averaged per point.
    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

impl Compressor for SketchCompressor {
    fn encode(
        &self,
        rng: &mut RandomStream,
        class: &FiniteFunctionClass,
        h: usize,
    ) -> Result<BitString> {
        check_class_shape(self, class)?;
        class.check_hypothesis_index(h)?;
        let mut bits = BitString::new();
        for x in 0..self.num_points {
            let w = class.point_vector(h, x);
            for _ in 0..self.copies {
                let o = sketch_once(w, rng)?;
                encode_sketch_into(&mut bits, &o, self.dim)?;
            }
        }
        Ok(bits)
    }

    fn decode(&self, cur: &mut BitCursor) -> Result<FunctionValues> {
        let mut out = FunctionValues::zeros(self.num_points, self.dim);
        for x in 0..self.num_points {
            let point = out.point_mut(x);
            for _ in 0..self.copies {
                let o = decode_sketch(cur, self.dim)?;
                point[o.index] += o.value as f64;
            }
            for v in point.iter_mut() {
                *v /= self.copies as f64;
            }
        }
        Ok(out)
    }

    fn claimed_sigma(&self) -> f64 {
        self.sigma
    }

    fn claimed_bits(&self) -> f64 {
        (self.num_points * self.copies) as f64 * sketch_codeword_bits_bound(self.dim, self.radius)
    }

    fn output_shape(&self) -> (usize, usize) {
        (self.num_points, self.dim)
    }
}

// ---------------------------------------------------------------------------
// Monte Carlo verification
// ---------------------------------------------------------------------------

/// Measured behavior of a compressor on one hypothesis.
#[derive(Debug, Clone, Serialize)]
pub struct EstimatorReport {
    pub trials: usize,
    /// Largest `|mean decoded - true value|` over points and coordinates.
    pub bias_max: f64,
    /// Largest per-coordinate bias in units of its Monte Carlo standard
    /// error (`|bias| / (std / sqrt(trials))`).
    pub max_bias_z: f64,
    /// Pooled deviation second moment `E_x E_omega [Delta Delta^T]`
    /// (`dim x dim`, weighted by the empirical distribution).
    pub second_moment: Vec<Vec<f64>>,
    /// Top eigenvalue of `second_moment`: the measured squared sigma.
    pub lambda_max: f64,
    /// `5 * std / sqrt(trials)` of the per-trial quadratic form along the top
    /// eigendirection — the Monte Carlo radius attached to `lambda_max`.
    pub confidence_radius: f64,
    pub mean_bits: f64,
    pub claimed_sigma: f64,
    pub claimed_bits: f64,
}

struct TrialAccum {
    sum: Vec<f64>,
    sumsq: Vec<f64>,
    second: Matrix,
    bits: u64,
}

/// Measure unbiasedness, pooled directional second moment, and code length
/// over `trials` independent encode/decode rounds.
///
/// Trial `t` draws from `rng.substream(t)`, so results are independent of how
/// trials are scheduled across workers. Requires `trials >= 1000` (below that
/// the confidence radii are noise).
pub fn verify_estimator(
    c: &dyn Compressor,
    class: &FiniteFunctionClass,
    dist: &EmpiricalDistribution,
    h: usize,
    trials: usize,
    rng: &RandomStream,
) -> Result<EstimatorReport> {
    if trials < 1000 {
        return Err(AdlError::invalid_parameter(format!(
            "verification needs >= 1000 trials, got {trials}"
        )));
    }
    check_class_shape(c, class)?;
    class.check_hypothesis_index(h)?;
    dist.matches_points(class)?;

    let m = class.num_points();
    let d = class.dim();
    let chunks: Vec<(usize, usize)> = (0..trials)
        .step_by(PAR_CHUNK)
        .map(|s| (s, (s + PAR_CHUNK).min(trials)))
        .collect();

    let run_trial = |t: usize| -> Result<(FunctionValues, usize)> {
        let mut sub = rng.substream(t as u64);
        let bits = c.encode(&mut sub, class, h)?;
        let mut cur = bits.cursor();
        let vals = c
            .decode(&mut cur)
            .map_err(|e| AdlError::DecodeDuringTrial {
                trial: t,
                detail: e.to_string(),
            })?;
        if !cur.is_exhausted() {
            return Err(AdlError::DecodeDuringTrial {
                trial: t,
                detail: format!("{} trailing bits after decode", cur.remaining()),
            });
        }
        Ok((vals, bits.len()))
    };

    let partials: Vec<Result<TrialAccum>> = chunks
        .par_iter()
        .map(|&(start, end)| {
            let mut acc = TrialAccum {
                sum: vec![0.0; m * d],
                sumsq: vec![0.0; m * d],
                second: Matrix::zeros(d, d),
                bits: 0,
            };
            let mut delta = vec![0.0; d];
            for t in start..end {
                let (vals, len) = run_trial(t)?;
                acc.bits += len as u64;
                for x in 0..m {
                    let pv = vals.point(x);
                    let w = dist.weight(x);
                    for j in 0..d {
                        let v = pv[j];
                        acc.sum[x * d + j] += v;
                        acc.sumsq[x * d + j] += v * v;
                        delta[j] = v - class.value(h, x, j);
                    }
                    acc.second.add_scaled_outer(&delta, w);
                }
            }
            Ok(acc)
        })
        .collect();

    let mut sum = vec![0.0; m * d];
    let mut sumsq = vec![0.0; m * d];
    let mut second = Matrix::zeros(d, d);
    let mut bits_total = 0u64;
    for p in partials {
        let p = p?;
        for (a, b) in sum.iter_mut().zip(&p.sum) {
            *a += b;
        }
        for (a, b) in sumsq.iter_mut().zip(&p.sumsq) {
            *a += b;
        }
        second.add_assign(&p.second);
        bits_total += p.bits;
    }
    second.scale_in_place(1.0 / trials as f64);

    let tf = trials as f64;
    let mut bias_max = 0.0f64;
    let mut max_bias_z = 0.0f64;
    for x in 0..m {
        for j in 0..d {
            let mean = sum[x * d + j] / tf;
            let bias = (mean - class.value(h, x, j)).abs();
            bias_max = bias_max.max(bias);
            let var = (sumsq[x * d + j] / tf - mean * mean).max(0.0);
            let se = (var / tf).sqrt();
            let z = if se > 0.0 {
                bias / se
            } else if bias == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            max_bias_z = max_bias_z.max(z);
        }
    }

    let (lambda_max, top_dir) = top_eig_with_vector(&second)?;

    // Second pass, replaying the same substreams, for the Monte Carlo spread
    // of the quadratic form along the measured top direction.
    let q_partials: Vec<Result<(f64, f64)>> = chunks
        .par_iter()
        .map(|&(start, end)| {
            let mut q_sum = 0.0;
            let mut q_sumsq = 0.0;
            for t in start..end {
                let (vals, _) = run_trial(t)?;
                let mut q = 0.0;
                for x in 0..m {
                    let pv = vals.point(x);
                    let mut along = 0.0;
                    for j in 0..d {
                        along += top_dir[j] * (pv[j] - class.value(h, x, j));
                    }
                    q += dist.weight(x) * along * along;
                }
                q_sum += q;
                q_sumsq += q * q;
            }
            Ok((q_sum, q_sumsq))
        })
        .collect();
    let mut q_sum = 0.0;
    let mut q_sumsq = 0.0;
    for p in q_partials {
        let (a, b) = p?;
        q_sum += a;
        q_sumsq += b;
    }
    let q_mean = q_sum / tf;
    let q_var = (q_sumsq / tf - q_mean * q_mean).max(0.0);
    let confidence_radius = 5.0 * (q_var / tf).sqrt();

    Ok(EstimatorReport {
        trials,
        bias_max,
        max_bias_z,
        second_moment: second.to_rows(),
        lambda_max,
        confidence_radius,
        mean_bits: bits_total as f64 / tf,
        claimed_sigma: c.claimed_sigma(),
        claimed_bits: c.claimed_bits(),
    })
}

// ---------------------------------------------------------------------------
// Combinators
// ---------------------------------------------------------------------------

/// Average of `ceil(eps^-2)` independent copies: sigma contracts by `eps`,
/// bits multiply by the copy count (codewords are simply concatenated).
pub struct Amplified {
    inner: Box<dyn Compressor>,
    eps: f64,
    copies: usize,
}

pub fn amplify(inner: Box<dyn Compressor>, eps: f64) -> Result<Amplified> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(AdlError::invalid_parameter(format!(
            "amplification eps must lie in (0, 1], got {eps}"
        )));
    }
    let copies = (1.0 / (eps * eps)).ceil() as usize;
    Ok(Amplified { inner, eps, copies })
}

/// [`amplify`] with the copy count given directly: sigma contracts by
/// `1 / sqrt(copies)`. Sidesteps the float round-trip of `ceil(eps^-2)` when
/// the caller already knows the integer it wants.
pub fn amplify_by_copies(inner: Box<dyn Compressor>, copies: usize) -> Result<Amplified> {
    if copies == 0 {
        return Err(AdlError::invalid_parameter(
            "amplification needs at least one copy".to_string(),
        ));
    }
    let eps = 1.0 / (copies as f64).sqrt();
    Ok(Amplified { inner, eps, copies })
}

impl Amplified {
    pub fn copies(&self) -> usize {
        self.copies
    }
}

impl Compressor for Amplified {
    fn encode(
        &self,
        rng: &mut RandomStream,
        class: &FiniteFunctionClass,
        h: usize,
    ) -> Result<BitString> {
        let mut bits = BitString::new();
        for _ in 0..self.copies {
            bits.extend(&self.inner.encode(rng, class, h)?);
        }
        Ok(bits)
    }

    fn decode(&self, cur: &mut BitCursor) -> Result<FunctionValues> {
        let (m, d) = self.inner.output_shape();
        let mut out = FunctionValues::zeros(m, d);
        for _ in 0..self.copies {
            let one = self.inner.decode(cur)?;
            for x in 0..m {
                let acc = out.point_mut(x);
                let pv = one.point(x);
                for j in 0..d {
                    acc[j] += pv[j];
                }
            }
        }
        for x in 0..m {
            for v in out.point_mut(x) {
                *v /= self.copies as f64;
            }
        }
        Ok(out)
    }

    fn claimed_sigma(&self) -> f64 {
        self.inner.claimed_sigma() * self.eps
    }

    fn claimed_bits(&self) -> f64 {
        self.inner.claimed_bits() * self.copies as f64
    }

    fn output_shape(&self) -> (usize, usize) {
        self.inner.output_shape()
    }
}

/// Lower median of a slice (the smaller of the two central order statistics
/// when the length is even).
pub fn lower_median(xs: &mut [f64]) -> f64 {
    assert!(!xs.is_empty());
    xs.sort_unstable_by(f64::total_cmp);
    xs[(xs.len() - 1) / 2]
}

/// Coordinate-wise lower median of `k` copies. Exponentially better tails
/// than a single copy (`Pr[|med - mu| > t sigma] < (2/t)^k` for independent
/// sigma-estimators), at the price of bias: the median of unbiased copies is
/// not itself unbiased, so `claimed_sigma` reports the per-copy parameter.
pub struct MedianBoosted {
    inner: Box<dyn Compressor>,
    copies: usize,
}

pub fn median_boost(inner: Box<dyn Compressor>, k: usize) -> Result<MedianBoosted> {
    if k == 0 {
        return Err(AdlError::invalid_parameter("median boost needs k >= 1"));
    }
    Ok(MedianBoosted { inner, copies: k })
}

impl MedianBoosted {
    pub fn copies(&self) -> usize {
        self.copies
    }
}

impl Compressor for MedianBoosted {
    fn encode(
        &self,
        rng: &mut RandomStream,
        class: &FiniteFunctionClass,
        h: usize,
    ) -> Result<BitString> {
        let mut bits = BitString::new();
        for _ in 0..self.copies {
            bits.extend(&self.inner.encode(rng, class, h)?);
        }
        Ok(bits)
    }

    fn decode(&self, cur: &mut BitCursor) -> Result<FunctionValues> {
        let (m, d) = self.inner.output_shape();
        let copies: Vec<FunctionValues> = (0..self.copies)
            .map(|_| self.inner.decode(cur))
            .collect::<Result<_>>()?;
        let mut out = FunctionValues::zeros(m, d);
        let mut column = vec![0.0; self.copies];
        for x in 0..m {
            for j in 0..d {
                for (c, vals) in column.iter_mut().zip(&copies) {
                    *c = vals.get(x, j);
                }
                out.point_mut(x)[j] = lower_median(&mut column);
            }
        }
        Ok(out)
    }

    fn claimed_sigma(&self) -> f64 {
        self.inner.claimed_sigma()
    }

    fn claimed_bits(&self) -> f64 {
        self.inner.claimed_bits() * self.copies as f64
    }

    fn output_shape(&self) -> (usize, usize) {
        self.inner.output_shape()
    }
}

/// A compressor for the image class `U . h` of an isometric embedding `U`
/// (orthonormal columns). Encoding delegates to the inner compressor on the
/// source hypothesis — bit for bit, so the code-length distribution is
/// untouched — and decoding maps back through `U`. Directional second moments
/// are preserved exactly because `U (E Delta Delta^T) U^T` has the same
/// nonzero spectrum.
pub struct Transported {
    inner: Box<dyn Compressor>,
    u: Matrix,
    source: FiniteFunctionClass,
}

/// Wrap `inner` (a compressor for `source`) into one for the embedded class
/// with values `U * h(x)`. `u` must have orthonormal columns matching the
/// source dimension.
pub fn transport(
    inner: Box<dyn Compressor>,
    u: Matrix,
    source: &FiniteFunctionClass,
) -> Result<Transported> {
    let (m, d) = inner.output_shape();
    if source.num_points() != m || source.dim() != d {
        return Err(AdlError::invalid_parameter(format!(
            "source class is {} x {}, inner compressor expects {m} x {d}",
            source.num_points(),
            source.dim()
        )));
    }
    if u.cols() != d {
        return Err(AdlError::invalid_parameter(format!(
            "embedding has {} columns, source dimension is {d}",
            u.cols()
        )));
    }
    if u.rows() < u.cols() {
        return Err(AdlError::invalid_parameter(
            "embedding must not reduce dimension",
        ));
    }
    for j1 in 0..u.cols() {
        let c1 = u.column(j1);
        for j2 in j1..u.cols() {
            let g: f64 = c1.iter().zip(u.column(j2)).map(|(a, b)| a * b).sum();
            let want = if j1 == j2 { 1.0 } else { 0.0 };
            if (g - want).abs() > 1e-9 {
                return Err(AdlError::invalid_parameter(format!(
                    "embedding columns {j1},{j2} have inner product {g}, expected {want}"
                )));
            }
        }
    }
    Ok(Transported {
        inner,
        u,
        source: source.clone(),
    })
}

impl Compressor for Transported {
    fn encode(
        &self,
        rng: &mut RandomStream,
        class: &FiniteFunctionClass,
        h: usize,
    ) -> Result<BitString> {
        check_class_shape(self, class)?;
        if class.num_hypotheses() != self.source.num_hypotheses() {
            return Err(AdlError::invalid_parameter(format!(
                "embedded class has {} hypotheses, source has {}",
                class.num_hypotheses(),
                self.source.num_hypotheses()
            )));
        }
        self.inner.encode(rng, &self.source, h)
    }

    fn decode(&self, cur: &mut BitCursor) -> Result<FunctionValues> {
        let back = self.inner.decode(cur)?;
        let (m, _) = self.inner.output_shape();
        let mut out = FunctionValues::zeros(m, self.u.rows());
        for x in 0..m {
            let mapped = self.u.mul_vec(back.point(x));
            out.point_mut(x).copy_from_slice(&mapped);
        }
        Ok(out)
    }

    fn claimed_sigma(&self) -> f64 {
        self.inner.claimed_sigma()
    }

    fn claimed_bits(&self) -> f64 {
        self.inner.claimed_bits()
    }

    fn output_shape(&self) -> (usize, usize) {
        (self.inner.output_shape().0, self.u.rows())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_vector_class(v: &[f64]) -> FiniteFunctionClass {
        FiniteFunctionClass::new(1, 1, v.len(), v.to_vec()).unwrap()
    }

    #[test]
    fn exact_index_is_exact() {
        let class = FiniteFunctionClass::thresholds(6); // 7 hypotheses -> 3 bits
        let c = ExactIndexCompressor::new(&class);
        assert_eq!(c.claimed_bits(), 3.0);
        let dist = EmpiricalDistribution::uniform(6);
        let rng = RandomStream::from_seed(1);
        let report = verify_estimator(&c, &class, &dist, 4, 1000, &rng).unwrap();
        assert_eq!(report.bias_max, 0.0);
        assert_eq!(report.lambda_max, 0.0);
        assert_eq!(report.mean_bits, 3.0);
    }

    #[test]
    fn ball_compressor_copy_count() {
        // radius 3, d = 8, sigma 1: k = ceil(0.25 + 18) = 19
        let c = ball_compressor(3.0, 8, 1.0).unwrap();
        assert_eq!(c.copies(), 19);
        assert!(ball_compressor(3.0, 8, 0.0).is_err());
        assert!(ball_compressor(3.0, 8, 10.0).is_err()); // above sqrt(18.25)
        assert!(ball_compressor(-1.0, 8, 1.0).is_err());
        assert!(ball_compressor(1.0, 0, 0.5).is_err());
    }

    #[test]
    fn two_sketch_of_ones_vector_has_unit_second_moment() {
        // w = (1,1), k = 2: pooled deviation matrix [[1,-1],[-1,1]]/2, top
        // eigenvalue exactly 1 in expectation.
        let class = one_vector_class(&[1.0, 1.0]);
        let dist = EmpiricalDistribution::uniform(1);
        // (1/4 + 2*2) / 1.46^2 = 1.99... -> 2 copies
        let c = ball_compressor(2.0f64.sqrt(), 2, 1.46).unwrap();
        assert_eq!(c.copies(), 2);
        let rng = RandomStream::from_seed(99);
        let report = verify_estimator(&c, &class, &dist, 0, 40_000, &rng).unwrap();
        assert!(report.bias_max < 0.05, "bias {}", report.bias_max);
        assert!(
            (report.lambda_max - 1.0).abs() < 0.05,
            "lambda {}",
            report.lambda_max
        );
        assert!(report.mean_bits <= report.claimed_bits);
    }

    #[test]
    fn verifier_rejects_tiny_trial_counts() {
        let class = one_vector_class(&[1.0]);
        let c = ExactIndexCompressor::new(&class);
        let rng = RandomStream::from_seed(0);
        assert!(
            verify_estimator(&c, &class, &EmpiricalDistribution::uniform(1), 0, 999, &rng).is_err()
        );
    }

    #[test]
    fn verifier_flags_trailing_bits_with_trial_index() {
        struct Padded(ExactIndexCompressor);
        impl Compressor for Padded {
            fn encode(
                &self,
                rng: &mut RandomStream,
                class: &FiniteFunctionClass,
                h: usize,
            ) -> Result<BitString> {
                let mut b = self.0.encode(rng, class, h)?;
                b.push(true); // stray bit the decoder will not consume
                Ok(b)
            }
            fn decode(&self, cur: &mut BitCursor) -> Result<FunctionValues> {
                self.0.decode(cur)
            }
            fn claimed_sigma(&self) -> f64 {
                0.0
            }
            fn claimed_bits(&self) -> f64 {
                self.0.claimed_bits() + 1.0
            }
            fn output_shape(&self) -> (usize, usize) {
                self.0.output_shape()
            }
        }
        let class = FiniteFunctionClass::thresholds(3);
        let c = Padded(ExactIndexCompressor::new(&class));
        let rng = RandomStream::from_seed(3);
        let err = verify_estimator(
            &c,
            &class,
            &EmpiricalDistribution::uniform(3),
            0,
            1000,
            &rng,
        )
        .unwrap_err();
        assert!(matches!(err, AdlError::DecodeDuringTrial { trial: 0, .. }));
    }

    #[test]
    fn amplify_copy_counts_and_claims() {
        let class = one_vector_class(&[1.0, 1.0]);
        let base = ball_compressor(2.0, 2, 1.0).unwrap();
        let base_sigma = base.claimed_sigma();
        let base_bits = base.claimed_bits();
        let amp = amplify(Box::new(base), 0.5).unwrap();
        assert_eq!(amp.copies(), 4);
        assert_eq!(amp.claimed_sigma(), base_sigma * 0.5);
        assert_eq!(amp.claimed_bits(), base_bits * 4.0);
        assert!(amplify(Box::new(ExactIndexCompressor::new(&class)), 0.0).is_err());
        assert!(amplify(Box::new(ExactIndexCompressor::new(&class)), 1.5).is_err());
        // eps = 1 is the identity copy count
        let id = amplify(Box::new(ExactIndexCompressor::new(&class)), 1.0).unwrap();
        assert_eq!(id.copies(), 1);
    }

    #[test]
    fn amplified_codewords_concatenate_exactly() {
        let class = FiniteFunctionClass::thresholds(4); // 5 hypotheses, 3 bits
        let base = ExactIndexCompressor::new(&class);
        let amp = amplify(Box::new(base), 0.5).unwrap();
        let mut rng = RandomStream::from_seed(7);
        let bits = amp.encode(&mut rng, &class, 2).unwrap();
        assert_eq!(bits.len(), 12);
        let mut cur = bits.cursor();
        let vals = amp.decode(&mut cur).unwrap();
        assert!(cur.is_exhausted());
        assert_eq!(vals, class.function_values(2));
    }

    #[test]
    fn lower_median_convention() {
        assert_eq!(lower_median(&mut [5.0]), 5.0);
        assert_eq!(lower_median(&mut [3.0, 1.0]), 1.0);
        assert_eq!(lower_median(&mut [1.0, 2.0, 3.0, 4.0]), 2.0);
        assert_eq!(lower_median(&mut [9.0, 1.0, 5.0]), 5.0);
    }

    #[test]
    fn median_boost_single_copy_is_identity() {
        let class = FiniteFunctionClass::thresholds(4);
        let base = ExactIndexCompressor::new(&class);
        let boosted = median_boost(Box::new(base), 1).unwrap();
        let mut rng = RandomStream::from_seed(2);
        let bits = boosted.encode(&mut rng, &class, 3).unwrap();
        let vals = boosted.decode(&mut bits.cursor()).unwrap();
        assert_eq!(vals, class.function_values(3));
        assert!(median_boost(Box::new(ExactIndexCompressor::new(&class)), 0).is_err());
    }

    #[test]
    fn transport_requires_orthonormal_columns() {
        let class = one_vector_class(&[1.0, 0.0]);
        let skew = Matrix::from_rows(vec![vec![1.0, 0.5], vec![0.0, 1.0]]).unwrap();
        let c = ball_compressor(1.0, 2, 1.0).unwrap();
        assert!(transport(Box::new(c), skew, &class).is_err());
    }

    #[test]
    fn transport_through_a_rotation_preserves_bits_and_maps_values() {
        let class = one_vector_class(&[1.0, 1.0]);
        let angle: f64 = 0.3;
        let u = Matrix::from_rows(vec![
            vec![angle.cos(), -angle.sin()],
            vec![angle.sin(), angle.cos()],
        ])
        .unwrap();
        // embedded class: U * (1,1)
        let embedded = one_vector_class(&u.mul_vec(&[1.0, 1.0]));
        let base = ball_compressor(2.0, 2, 1.0).unwrap();
        let copies = base.copies();
        let moved = transport(Box::new(base), u.clone(), &class).unwrap();
        assert_eq!(moved.output_shape(), (1, 2));

        let base_again = ball_compressor(2.0, 2, 1.0).unwrap();
        for t in 0..50u64 {
            let mut r1 = RandomStream::from_seed(5).substream(t);
            let mut r2 = RandomStream::from_seed(5).substream(t);
            let b_inner = base_again.encode(&mut r1, &class, 0).unwrap();
            let b_moved = moved.encode(&mut r2, &embedded, 0).unwrap();
            assert_eq!(b_inner, b_moved, "trial {t}");
            // decoded embedded values are U applied to the inner decode
            let v_inner = base_again.decode(&mut b_inner.cursor()).unwrap();
            let v_moved = moved.decode(&mut b_moved.cursor()).unwrap();
            let mapped = u.mul_vec(v_inner.point(0));
            for j in 0..2 {
                assert!((v_moved.get(0, j) - mapped[j]).abs() < 1e-12);
            }
        }
        let _ = copies;
    }
}
