//! The multi-resolution chain compressor over a [`CoverChain`].
//!
//! Write `h_n` for the cover member assigned to `h` at scale `eps_n = 2^-n`.
//! The chain telescopes: `h = h_0 + sum_n (h_n - h_{n-1})` with `h_0 = 0` and
//! the terminal member equal to `h` itself. The compressor samples a single
//! scale,
//!
//! ```text
//! output = (h_n - h_{n-1}) / q_n   with probability q_n = 2^(-n (2 - a/2)),
//! output = 0                       with the leftover probability,
//! ```
//!
//! which is exactly unbiased for every `a` in `(0, 1]`. A codeword is one
//! flag bit (zero branch), or the flag, the Elias gamma code of `n`, and the
//! positions of `h_n` and `h_{n-1}` inside their covers at fixed widths
//! `ceil(log2 |C_n|)` and `ceil(log2 |C_{n-1}|)` — so deep scales are pricier
//! but exponentially rare, and the expected bill stays proportional to the
//! cover-size logs. The variance envelope `sum_n 16 * 2^(-a n / 2)` is a
//! geometric series; [`normalize_to_unit_sigma`] then averages enough copies
//! to bring the second moment below one.

use serde::Serialize;

use crate::compressor::{amplify_by_copies, check_class_shape, Amplified, Compressor};
use crate::core::{
    ceil_log2, decode_gamma, encode_gamma, gamma_len, BitCursor, BitString, FiniteFunctionClass,
    FunctionValues, RandomStream,
};
use crate::cover::CoverChain;
use crate::error::{AdlError, Result};

/// Stochastic chain compressor; build with [`build_chain_compressor`].
pub struct ChainCompressor {
    class: FiniteFunctionClass,
    chain: CoverChain,
    a: f64,
    /// `scale_probs[n - 1]` is `q_n` for `n = 1..=n_max`.
    scale_probs: Vec<f64>,
    zero_prob: f64,
    /// `per_scale_bits[n - 1]` is the exact codeword length at scale `n`.
    per_scale_bits: Vec<usize>,
}

/// Per-scale accounting row of a chain compressor.
#[derive(Debug, Clone, Serialize)]
pub struct ScaleRow {
    pub n: usize,
    pub eps: f64,
    pub prob: f64,
    pub cover_size: usize,
    pub codeword_bits: usize,
}

impl ChainCompressor {
    pub fn chain(&self) -> &CoverChain {
        &self.chain
    }

    pub fn exponent(&self) -> f64 {
        self.a
    }

    /// `q_n` for `n = 1..=n_max`, in order.
    pub fn scale_probs(&self) -> &[f64] {
        &self.scale_probs
    }

    /// Probability of the 1-bit zero branch.
    pub fn zero_prob(&self) -> f64 {
        self.zero_prob
    }

    /// Exact codeword length at scale `n` (`1..=n_max`), in bits.
    pub fn scale_bits(&self, n: usize) -> usize {
        self.per_scale_bits[n - 1]
    }

    /// Exact expected codeword length: `zero_prob + sum_n q_n * b_n`. This is
    /// an accounting identity, not a bound — every branch has a fixed length.
    pub fn expected_bits(&self) -> f64 {
        let mut total = self.zero_prob;
        for (i, &q) in self.scale_probs.iter().enumerate() {
            total += q * self.per_scale_bits[i] as f64;
        }
        total
    }

    /// Per-scale accounting table for reports.
    pub fn scale_table(&self) -> Vec<ScaleRow> {
        (1..=self.chain.n_max())
            .map(|n| ScaleRow {
                n,
                eps: self.chain.scale(n),
                prob: self.scale_probs[n - 1],
                cover_size: self.chain.cover(n).len(),
                codeword_bits: self.per_scale_bits[n - 1],
            })
            .collect()
    }

    /// The deterministic codeword emitted when scale `n` is drawn for
    /// hypothesis `h`. Exposed so the full outcome space can be enumerated.
    pub fn codeword_for_scale(&self, h: usize, n: usize) -> Result<BitString> {
        self.class.check_hypothesis_index(h)?;
        if n < 1 || n > self.chain.n_max() {
            return Err(AdlError::invalid_parameter(format!(
                "scale {n} outside 1..={}",
                self.chain.n_max()
            )));
        }
        let mut bits = BitString::new();
        bits.push(true);
        encode_gamma(&mut bits, n as u64);
        let pos_cur = self.chain.assignment(n)[h];
        let pos_prev = self.chain.assignment(n - 1)[h];
        bits.push_bits(pos_cur as u64, ceil_log2(self.chain.cover(n).len()));
        bits.push_bits(pos_prev as u64, ceil_log2(self.chain.cover(n - 1).len()));
        Ok(bits)
    }

    /// The 1-bit codeword of the zero branch.
    pub fn zero_codeword(&self) -> BitString {
        let mut bits = BitString::new();
        bits.push(false);
        bits
    }
}

impl Compressor for ChainCompressor {
    fn encode(
        &self,
        rng: &mut RandomStream,
        class: &FiniteFunctionClass,
        h: usize,
    ) -> Result<BitString> {
        check_class_shape(self, class)?;
        if class.num_hypotheses() != self.class.num_hypotheses() {
            return Err(AdlError::invalid_parameter(format!(
                "chain compressor built for {} hypotheses, class has {}",
                self.class.num_hypotheses(),
                class.num_hypotheses()
            )));
        }
        class.check_hypothesis_index(h)?;
        let u = rng.unit_f64();
        let mut acc = 0.0;
        for (i, &q) in self.scale_probs.iter().enumerate() {
            acc += q;
            if u < acc {
                return self.codeword_for_scale(h, i + 1);
            }
        }
        Ok(self.zero_codeword())
    }

    fn decode(&self, cur: &mut BitCursor) -> Result<FunctionValues> {
        let (m, d) = self.output_shape();
        if !cur.read_bit()? {
            return Ok(FunctionValues::zeros(m, d));
        }
        let n = decode_gamma(cur)? as usize;
        if n < 1 || n > self.chain.n_max() {
            return Err(AdlError::decode(format!(
                "chain scale {n} outside 1..={}",
                self.chain.n_max()
            )));
        }
        let mut pos = [0usize; 2];
        for (slot, level) in [(0usize, n), (1usize, n - 1)] {
            let size = self.chain.cover(level).len();
            let p = cur.read_bits(ceil_log2(size))? as usize;
            if p >= size {
                return Err(AdlError::decode(format!(
                    "cover position {p} out of range ({size}) at scale {level}"
                )));
            }
            pos[slot] = p;
        }
        let cur_vals = self
            .chain
            .member_values(&self.class, self.chain.cover(n)[pos[0]]);
        let prev_vals = self
            .chain
            .member_values(&self.class, self.chain.cover(n - 1)[pos[1]]);
        let q = self.scale_probs[n - 1];
        let mut out = FunctionValues::zeros(m, d);
        for x in 0..m {
            let row = out.point_mut(x);
            for j in 0..d {
                let idx = x * d + j;
                row[j] = (cur_vals[idx] - prev_vals[idx]) / q;
            }
        }
        Ok(out)
    }

    fn claimed_sigma(&self) -> f64 {
        chain_variance_bound(&self.chain, self.a).sqrt()
    }

    fn claimed_bits(&self) -> f64 {
        self.expected_bits()
    }

    fn output_shape(&self) -> (usize, usize) {
        (self.class.num_points(), self.class.dim())
    }
}

/// Build the chain compressor for `class` over `chain` with exponent `a` in
/// `(0, 1]`.
///
/// The chain must have been built from `class` (hypothesis counts are
/// checked; the terminal scale must be the identity on the whole class so the
/// telescoping sum is exact). Smaller `a` spends more probability on fine
/// scales — cheaper codewords on average but a larger variance envelope.
pub fn build_chain_compressor(
    class: &FiniteFunctionClass,
    chain: &CoverChain,
    a: f64,
) -> Result<ChainCompressor> {
    if !(a > 0.0 && a <= 1.0) || !a.is_finite() {
        return Err(AdlError::invalid_parameter(format!(
            "chain exponent a must lie in (0, 1], got {a}"
        )));
    }
    if chain.num_hypotheses() != class.num_hypotheses() {
        return Err(AdlError::invalid_parameter(format!(
            "chain built for {} hypotheses, class has {}",
            chain.num_hypotheses(),
            class.num_hypotheses()
        )));
    }
    if let Some((h, x, j)) = class.first_value_outside(0.0, 1.0) {
        return Err(AdlError::invalid_parameter(format!(
            "chain compression requires values in [0, 1]; values[{h}][{x}][{j}] = {} is outside",
            class.value(h, x, j)
        )));
    }
    let n_max = chain.n_max();
    let n = class.num_hypotheses();
    if n_max == 0 {
        // Root-only chain: valid only when every hypothesis is the zero
        // function, which is what the terminal-exactness contract demands.
        if let Some((h, x, j)) = class.first_value_outside(0.0, 0.0) {
            return Err(AdlError::invalid_parameter(format!(
                "chain terminates at the zero function but values[{h}][{x}][{j}] = {}",
                class.value(h, x, j)
            )));
        }
    } else {
        let terminal: Vec<usize> = (0..n).collect();
        if chain.cover(n_max) != terminal.as_slice()
            || chain.assignment(n_max) != terminal.as_slice()
        {
            return Err(AdlError::invalid_parameter(
                "chain lacks an exact terminal scale (whole class, identity assignment)"
                    .to_string(),
            ));
        }
    }

    let mut scale_probs = Vec::with_capacity(n_max);
    let mut per_scale_bits = Vec::with_capacity(n_max);
    for level in 1..=n_max {
        let q = 2f64.powf(-(level as f64) * (2.0 - a / 2.0));
        scale_probs.push(q);
        let b = 1
            + gamma_len(level as u64)
            + ceil_log2(chain.cover(level).len())
            + ceil_log2(chain.cover(level - 1).len());
        per_scale_bits.push(b);
    }
    let zero_prob = 1.0 - scale_probs.iter().sum::<f64>();
    debug_assert!(zero_prob > 0.0);

    Ok(ChainCompressor {
        class: class.clone(),
        chain: chain.clone(),
        a,
        scale_probs,
        zero_prob,
        per_scale_bits,
    })
}

/// Analytic variance envelope of a chain with exponent `a`:
/// `sum_{n=1}^{n_max} 4 eps_{n-1}^2 / q_n = sum_{n=1}^{n_max} 16 * 2^(-a n / 2)`.
///
/// The square of the per-scale deviation is at most `(eps_n + eps_{n-1})^2 <=
/// 4 eps_{n-1}^2` and is paid with probability `q_n` at magnitude `1 / q_n`
/// squared, giving the closed form. Meaningful for `a` in `(0, 1]`; the
/// series is geometric with ratio `2^(-a/2)`, so the envelope stays bounded
/// at every depth.
pub fn chain_variance_bound(chain: &CoverChain, a: f64) -> f64 {
    (1..=chain.n_max())
        .map(|n| 16.0 * 2f64.powf(-a * n as f64 / 2.0))
        .sum()
}

/// Average enough copies of `c` to bring a measured (or claimed) directional
/// second moment `lambda_max` below one: `ceil(lambda_max)` copies, sigma
/// contracted by the square root. An input already at or below one is passed
/// through as a single copy.
pub fn normalize_to_unit_sigma(c: Box<dyn Compressor>, lambda_max: f64) -> Result<Amplified> {
    if !lambda_max.is_finite() || lambda_max < 0.0 {
        return Err(AdlError::invalid_parameter(format!(
            "lambda_max must be finite and nonnegative, got {lambda_max}"
        )));
    }
    let copies = lambda_max.max(1.0).ceil() as usize;
    amplify_by_copies(c, copies)
}
