//! One-coordinate importance sketches of real vectors.
//!
//! A sketch of `w` in `R^d` keeps one randomized coordinate and zeroes the
//! rest, chosen so the estimate is exactly unbiased with uniformly bounded
//! directional second moment:
//!
//! ```text
//! p_i   = w_i^2 / (2 |w|^2) + 1 / (2d)        (p_i = 1/d when |w| = 0)
//! i ~ p ,  b ~ Bernoulli(frac(w_i / p_i))
//! what  = (floor(w_i / p_i) + b) * e_i
//! ```
//!
//! Then `E[what] = w` exactly, and for every unit `u`,
//! `E <u, what>^2 <= 1/4 + 2 |w|^2`. Averaging `k` independent sketches
//! divides the second moment bound by `k`.
//!
//! The integer payload makes sketches cheap to serialize: a codeword is a
//! fixed-width coordinate index, the Elias gamma code of `|value| + 1`, and a
//! sign bit — prefix-free, so codewords concatenate.

use serde::Serialize;

use crate::core::RandomStream;
use crate::core::{ceil_log2, decode_gamma, encode_gamma, gamma_len, BitCursor, BitString};
use crate::error::{AdlError, Result};

/// A single sketch: `value * e_index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SketchOutcome {
    pub index: usize,
    pub value: i64,
}

/// The sampling distribution over coordinates for `w` (sums to 1 exactly up
/// to float rounding; uniform when `w = 0`).
pub fn sketch_probabilities(w: &[f64]) -> Vec<f64> {
    let d = w.len();
    let norm_sq: f64 = w.iter().map(|x| x * x).sum();
    if norm_sq == 0.0 {
        return vec![1.0 / d as f64; d];
    }
    w.iter()
        .map(|&x| x * x / (2.0 * norm_sq) + 1.0 / (2.0 * d as f64))
        .collect()
}

fn validate_input(w: &[f64]) -> Result<()> {
    if w.is_empty() {
        return Err(AdlError::invalid_parameter("sketch input is empty"));
    }
    if let Some(i) = w.iter().position(|v| !v.is_finite()) {
        return Err(AdlError::invalid_parameter(format!(
            "sketch input coordinate {i} is not finite ({})",
            w[i]
        )));
    }
    Ok(())
}

/// Draw one sketch of `w`.
pub fn sketch_once(w: &[f64], rng: &mut RandomStream) -> Result<SketchOutcome> {
    validate_input(w)?;
    let probs = sketch_probabilities(w);
    let u = rng.unit_f64();
    let mut index = probs.len() - 1; // fallback for cumulative rounding
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            index = i;
            break;
        }
    }
    let ratio = if w[index] == 0.0 {
        0.0
    } else {
        w[index] / probs[index]
    };
    let floor = ratio.floor();
    let frac = ratio - floor; // in [0, 1) for either sign of ratio
    let bump = rng.unit_f64() < frac;
    Ok(SketchOutcome {
        index,
        value: floor as i64 + i64::from(bump),
    })
}

/// The dense vector `value * e_index` in `R^d`.
pub fn reconstruct(outcome: &SketchOutcome, d: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[outcome.index] = outcome.value as f64;
    v
}

/// Average of `k` independent sketches of `w` (second moment bound divided
/// by `k`).
pub fn k_sketch(w: &[f64], k: usize, rng: &mut RandomStream) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(AdlError::invalid_parameter("k_sketch needs k >= 1"));
    }
    validate_input(w)?;
    let mut sum = vec![0.0; w.len()];
    for _ in 0..k {
        let o = sketch_once(w, rng)?;
        sum[o.index] += o.value as f64;
    }
    for s in &mut sum {
        *s /= k as f64;
    }
    Ok(sum)
}

/// Append the prefix-free codeword for `outcome` (coordinate index in
/// `ceil(log2 d)` fixed bits, then gamma(|value|+1), then a sign bit).
pub fn encode_sketch_into(bits: &mut BitString, outcome: &SketchOutcome, d: usize) -> Result<()> {
    if outcome.index >= d {
        return Err(AdlError::IndexOutOfRange {
            what: "sketch coordinate",
            index: outcome.index,
            len: d,
        });
    }
    bits.push_bits(outcome.index as u64, ceil_log2(d));
    encode_gamma(bits, outcome.value.unsigned_abs() + 1);
    bits.push(outcome.value < 0);
    Ok(())
}

/// One sketch as its own bitstring.
pub fn encode_sketch(outcome: &SketchOutcome, d: usize) -> Result<BitString> {
    let mut bits = BitString::new();
    encode_sketch_into(&mut bits, outcome, d)?;
    Ok(bits)
}

/// Read one sketch codeword for dimension `d` from the cursor.
pub fn decode_sketch(cur: &mut BitCursor, d: usize) -> Result<SketchOutcome> {
    let index = cur.read_bits(ceil_log2(d))? as usize;
    if index >= d {
        return Err(AdlError::decode(format!(
            "sketch coordinate {index} out of range for dimension {d}"
        )));
    }
    let mag_plus_one = decode_gamma(cur)?;
    let magnitude = mag_plus_one - 1;
    if magnitude > i64::MAX as u64 {
        return Err(AdlError::decode(format!(
            "sketch magnitude {magnitude} overflows i64"
        )));
    }
    let negative = cur.read_bit()?;
    let value = if negative {
        -(magnitude as i64)
    } else {
        magnitude as i64
    };
    Ok(SketchOutcome { index, value })
}

/// Exact codeword length for one outcome.
pub fn sketch_codeword_len(outcome: &SketchOutcome, d: usize) -> usize {
    ceil_log2(d) + gamma_len(outcome.value.unsigned_abs() + 1) + 1
}

/// Bit-budget envelope for one sketch of a vector with `|w| <= radius`:
/// `ceil(log2 d) + 2 ceil(log2(5 d radius + 2)) + 3`. Every sketch value
/// satisfies `|value| <= 5 d radius + 1`, and the gamma code of `|value| + 1`
/// stays within the middle term plus one.
pub fn sketch_codeword_bits_bound(d: usize, radius: f64) -> f64 {
    ceil_log2(d) as f64 + 2.0 * (5.0 * d as f64 * radius + 2.0).log2().ceil() + 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probabilities_sum_to_one_and_cover_support() {
        let w = vec![3.0, -1.0, 0.0, 0.25];
        let p = sketch_probabilities(&w);
        let sum: f64 = p.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        // every coordinate keeps at least the 1/(2d) exploration floor
        for &pi in &p {
            assert!(pi >= 1.0 / (2.0 * 4.0) - 1e-15);
        }
    }

    #[test]
    fn zero_vector_sketches_to_zero() {
        let mut rng = RandomStream::from_seed(5);
        let p = sketch_probabilities(&[0.0, 0.0, 0.0]);
        assert_eq!(p, vec![1.0 / 3.0; 3]);
        for _ in 0..100 {
            let o = sketch_once(&[0.0, 0.0, 0.0], &mut rng).unwrap();
            assert_eq!(o.value, 0);
        }
    }

    #[test]
    fn singleton_unit_vector_is_deterministic() {
        // d = 1, w = (1): p = 1, ratio = 1, frac = 0, so value = 1 always.
        let mut rng = RandomStream::from_seed(9);
        for _ in 0..50 {
            let o = sketch_once(&[1.0], &mut rng).unwrap();
            assert_eq!(o, SketchOutcome { index: 0, value: 1 });
        }
    }

    #[test]
    fn ones_vector_in_two_dims_takes_value_two() {
        // w = (1,1): p_i = 1/2, ratio = 2 exactly on both coordinates.
        let mut rng = RandomStream::from_seed(31);
        let mut seen = [false, false];
        for _ in 0..200 {
            let o = sketch_once(&[1.0, 1.0], &mut rng).unwrap();
            assert_eq!(o.value, 2);
            seen[o.index] = true;
        }
        assert!(seen[0] && seen[1]);
    }

    #[test]
    fn negative_coordinates_keep_unbiasedness_convention() {
        // ratio < 0: floor/frac still split so that E[value | index] = ratio.
        let w = [-2.0, 0.5];
        let p = sketch_probabilities(&w);
        let ratio = w[0] / p[0];
        assert!(ratio < 0.0);
        let mut rng = RandomStream::from_seed(77);
        let mut values = std::collections::HashSet::new();
        for _ in 0..2000 {
            let o = sketch_once(&w, &mut rng).unwrap();
            if o.index == 0 {
                values.insert(o.value);
            }
        }
        let fl = ratio.floor() as i64;
        assert!(
            values.contains(&fl) && values.contains(&(fl + 1)),
            "{values:?}"
        );
    }

    #[test]
    fn rejects_bad_input() {
        let mut rng = RandomStream::from_seed(0);
        assert!(sketch_once(&[], &mut rng).is_err());
        assert!(sketch_once(&[1.0, f64::NAN], &mut rng).is_err());
        assert!(k_sketch(&[1.0], 0, &mut rng).is_err());
    }

    #[test]
    fn codec_roundtrips_and_is_prefix_free() {
        let d = 5;
        let mut all = BitString::new();
        let mut outcomes = Vec::new();
        for index in 0..d {
            for value in [-17i64, -2, -1, 0, 1, 2, 33, 1000] {
                let o = SketchOutcome { index, value };
                let one = encode_sketch(&o, d).unwrap();
                assert_eq!(one.len(), sketch_codeword_len(&o, d));
                let mut cur = one.cursor();
                assert_eq!(decode_sketch(&mut cur, d).unwrap(), o);
                assert!(cur.is_exhausted());
                encode_sketch_into(&mut all, &o, d).unwrap();
                outcomes.push(o);
            }
        }
        let mut cur = all.cursor();
        for o in &outcomes {
            assert_eq!(&decode_sketch(&mut cur, d).unwrap(), o);
        }
        assert!(cur.is_exhausted());
    }

    #[test]
    fn codec_worked_example() {
        // (index 2, value -5) at d = 4: index "10", gamma(6) = "00110", sign "1".
        let o = SketchOutcome {
            index: 2,
            value: -5,
        };
        let bits = encode_sketch(&o, 4).unwrap();
        assert_eq!(bits.to_compact_string(), "10001101");
    }

    #[test]
    fn decode_rejects_out_of_range_index() {
        // d = 3 uses 2 index bits; index 3 is invalid.
        let mut bits = BitString::new();
        bits.push_bits(0b11, 2);
        encode_gamma(&mut bits, 1);
        bits.push(false);
        assert!(decode_sketch(&mut bits.cursor(), 3).is_err());
    }

    #[test]
    fn values_stay_within_budget_envelope() {
        // |value| <= 5 d |w| + 1 for a spread of vectors, and the codeword
        // stays within the documented bound.
        let mut rng = RandomStream::from_seed(321);
        for d in [1usize, 2, 7, 32] {
            for norm in [0.1, 1.0, 10.0] {
                let mut w: Vec<f64> = (0..d).map(|_| rng.gaussian()).collect();
                let n: f64 = w.iter().map(|x| x * x).sum::<f64>().sqrt();
                for x in &mut w {
                    *x *= norm / n;
                }
                let bound = sketch_codeword_bits_bound(d, norm);
                for _ in 0..500 {
                    let o = sketch_once(&w, &mut rng).unwrap();
                    assert!(
                        o.value.unsigned_abs() as f64 <= 5.0 * d as f64 * norm + 1.0,
                        "d={d} norm={norm} value={}",
                        o.value
                    );
                    assert!(sketch_codeword_len(&o, d) as f64 <= bound);
                }
            }
        }
    }

    #[test]
    fn k_sketch_averages() {
        // With w = (1,1), a 2-sketch is (2,0), (0,2), or (1,1) halved.
        let mut rng = RandomStream::from_seed(8);
        for _ in 0..100 {
            let v = k_sketch(&[1.0, 1.0], 2, &mut rng).unwrap();
            let ok = [(2.0, 0.0), (0.0, 2.0), (1.0, 1.0)]
                .iter()
                .any(|&(a, b)| v[0] == a && v[1] == b);
            assert!(ok, "unexpected 2-sketch {v:?}");
        }
    }
}
