//! Empirical metric entropy for finite function classes.
//!
//! Distances between hypotheses are root-mean-square over the empirical
//! distribution of a per-point inner norm (sup or euclidean):
//!
//! ```text
//! dist(h, g)^2 = sum_x weight(x) * inner(h(x) - g(x))^2
//! ```
//!
//! On that metric this module computes exact minimum eps-covers (small
//! classes only), scalable greedy covers, greedy packings that certify cover
//! lower bounds, brute-force VC dimension for binary classes, and the
//! multi-scale [`CoverChain`] consumed by the chain compressor: covers at
//! every resolution `eps_n = 2^-n` from the zero function down to an exact
//! terminal scale.
//!
//! Covers here are internal: every cover element is a class member (the one
//! exception is the zero function serving as the root of a chain). Internal
//! covers are at most a factor two coarser in eps than unrestricted ones and
//! keep every cover element addressable by index, which codewords need.

use rayon::prelude::*;
use serde::Serialize;

use crate::core::{EmpiricalDistribution, FiniteFunctionClass};
use crate::error::{AdlError, Result};

/// Per-point inner norm used inside the RMS distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InnerNorm {
    /// `max_j |v_j|`.
    Sup,
    /// `sqrt(sum_j v_j^2)`.
    Euclidean,
}

/// How distances are measured: an inner norm per point, always aggregated as
/// root-mean-square over the empirical distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NormSpec {
    pub inner: InnerNorm,
}

impl NormSpec {
    pub fn sup() -> Self {
        NormSpec {
            inner: InnerNorm::Sup,
        }
    }

    pub fn euclidean() -> Self {
        NormSpec {
            inner: InnerNorm::Euclidean,
        }
    }

    /// Inner norm of the difference of two `dim`-vectors.
    fn inner_diff(&self, a: &[f64], b: &[f64]) -> f64 {
        match self.inner {
            InnerNorm::Sup => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max),
            InnerNorm::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
        }
    }
}

/// RMS distance between two flat value tables (`num_points * dim` each).
pub(crate) fn values_distance(
    a: &[f64],
    b: &[f64],
    dim: usize,
    weights: &[f64],
    norm: NormSpec,
) -> f64 {
    let mut acc = 0.0;
    for (x, w) in weights.iter().enumerate() {
        let lo = x * dim;
        let hi = lo + dim;
        let inner = norm.inner_diff(&a[lo..hi], &b[lo..hi]);
        acc += w * inner * inner;
    }
    acc.sqrt()
}

/// Distance between hypotheses `i` and `j` under `norm`, RMS-averaged over
/// `dist`.
pub fn class_distance(
    class: &FiniteFunctionClass,
    dist: &EmpiricalDistribution,
    norm: NormSpec,
    i: usize,
    j: usize,
) -> Result<f64> {
    dist.matches_points(class)?;
    class.check_hypothesis_index(i)?;
    class.check_hypothesis_index(j)?;
    Ok(values_distance(
        class.hypothesis(i),
        class.hypothesis(j),
        class.dim(),
        dist.weights(),
        norm,
    ))
}

/// Distance from hypothesis `i` to the zero function.
pub fn distance_to_zero(
    class: &FiniteFunctionClass,
    dist: &EmpiricalDistribution,
    norm: NormSpec,
    i: usize,
) -> Result<f64> {
    dist.matches_points(class)?;
    class.check_hypothesis_index(i)?;
    let zero = vec![0.0; class.num_points() * class.dim()];
    Ok(values_distance(
        class.hypothesis(i),
        &zero,
        class.dim(),
        dist.weights(),
        norm,
    ))
}

/// Full pairwise distance matrix, parallelized by row. Row `i` holds
/// `dist(i, j)` for every `j`; the result is symmetric with a zero diagonal.
pub fn distance_matrix(
    class: &FiniteFunctionClass,
    dist: &EmpiricalDistribution,
    norm: NormSpec,
) -> Result<Vec<Vec<f64>>> {
    dist.matches_points(class)?;
    let n = class.num_hypotheses();
    let dim = class.dim();
    let weights = dist.weights();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let a = class.hypothesis(i);
            (0..n)
                .map(|j| {
                    if i == j {
                        0.0
                    } else {
                        values_distance(a, class.hypothesis(j), dim, weights, norm)
                    }
                })
                .collect()
        })
        .collect();
    Ok(rows)
}

fn check_eps(eps: f64) -> Result<()> {
    if !eps.is_finite() || eps < 0.0 {
        return Err(AdlError::invalid_parameter(format!(
            "eps must be finite and nonnegative, got {eps}"
        )));
    }
    Ok(())
}

/// Exact minimum set cover by branch and bound over bitmasks.
///
/// `masks[c]` is the set of universe elements candidate `c` covers. Candidates
/// are tried in index order and only strict improvements replace the
/// incumbent, so among optimal solutions the returned one is the first in
/// lexicographic candidate order. Returns `None` when the union of all
/// candidates misses part of the universe.
pub(crate) fn min_set_cover(universe: usize, masks: &[u32]) -> Option<Vec<usize>> {
    debug_assert!(universe <= 24);
    let full: u32 = if universe == 0 {
        return Some(Vec::new());
    } else {
        (1u32 << universe) - 1
    };
    if masks.iter().fold(0u32, |acc, m| acc | m) & full != full {
        return None;
    }

    // Upper bound from the ln-factor greedy to prune early.
    let mut best = greedy_set_cover(universe, masks);
    let mut chosen = Vec::new();

    fn dfs(uncovered: u32, masks: &[u32], chosen: &mut Vec<usize>, best: &mut Vec<usize>) {
        if uncovered == 0 {
            if chosen.len() < best.len() {
                best.clear();
                best.extend_from_slice(chosen);
            }
            return;
        }
        if chosen.len() + 1 >= best.len() {
            return; // cannot strictly improve
        }
        let elem = uncovered.trailing_zeros();
        let bit = 1u32 << elem;
        for (c, &mask) in masks.iter().enumerate() {
            if mask & bit != 0 {
                chosen.push(c);
                dfs(uncovered & !mask, masks, chosen, best);
                chosen.pop();
            }
        }
    }

    dfs(full, masks, &mut chosen, &mut best);
    best.sort_unstable();
    Some(best)
}

/// Greedy set cover: repeatedly take the candidate covering the most
/// uncovered elements (ties to the lowest index). Assumes the union of the
/// candidates covers the universe.
fn greedy_set_cover(universe: usize, masks: &[u32]) -> Vec<usize> {
    let full: u32 = if universe == 0 {
        0
    } else {
        (1u32 << universe) - 1
    };
    let mut uncovered = full;
    let mut picked = Vec::new();
    while uncovered != 0 {
        let mut best_c = usize::MAX;
        let mut best_gain = 0;
        for (c, &mask) in masks.iter().enumerate() {
            let gain = (mask & uncovered).count_ones();
            if gain > best_gain {
                best_gain = gain;
                best_c = c;
            }
        }
        debug_assert!(best_c != usize::MAX);
        picked.push(best_c);
        uncovered &= !masks[best_c];
    }
    picked.sort_unstable();
    picked
}

/// Size guard for [`exact_cover`]: minimum covers are found by exponential
/// search over the incidence structure.
pub const EXACT_COVER_MAX: usize = 24;

/// Minimum-cardinality internal eps-cover: the smallest set of hypothesis
/// indices such that every hypothesis is within `eps` of one of them.
///
/// Exact via branch-and-bound set cover; guarded to classes of at most
/// [`EXACT_COVER_MAX`] hypotheses. The returned indices are sorted.
pub fn exact_cover(
    class: &FiniteFunctionClass,
    dist: &EmpiricalDistribution,
    eps: f64,
    norm: NormSpec,
) -> Result<Vec<usize>> {
    check_eps(eps)?;
    let n = class.num_hypotheses();
    if n > EXACT_COVER_MAX {
        return Err(AdlError::GuardExceeded {
            detail: format!(
                "exact_cover is exponential and limited to {EXACT_COVER_MAX} hypotheses, got {n}"
            ),
        });
    }
    let d = distance_matrix(class, dist, norm)?;
    let masks: Vec<u32> = (0..n)
        .map(|c| {
            let mut mask = 0u32;
            for h in 0..n {
                if d[c][h] <= eps {
                    mask |= 1 << h;
                }
            }
            mask
        })
        .collect();
    // Every hypothesis covers itself (distance zero), so a cover exists.
    Ok(min_set_cover(n, &masks).expect("self-incidence guarantees a cover"))
}

/// Greedy farthest-point eps-cover (a net).
///
/// Starts from hypothesis 0 and repeatedly promotes the hypothesis farthest
/// from the current centers (ties to the lowest index) until everything is
/// within `eps`. The centers are pairwise more than `eps` apart, so the net
/// is simultaneously an eps-packing: its size is sandwiched between the
/// minimum cover size and the maximum packing size at the same scale. The
/// returned indices are sorted.
pub fn greedy_cover(
    class: &FiniteFunctionClass,
    dist: &EmpiricalDistribution,
    eps: f64,
    norm: NormSpec,
) -> Result<Vec<usize>> {
    check_eps(eps)?;
    dist.matches_points(class)?;
    let n = class.num_hypotheses();
    let dim = class.dim();
    let weights = dist.weights();
    let mut centers = vec![0usize];
    // nearest[h] = distance from h to its closest center so far
    let mut nearest: Vec<f64> = (0..n)
        .map(|h| values_distance(class.hypothesis(h), class.hypothesis(0), dim, weights, norm))
        .collect();
    loop {
        let mut far = 0usize;
        let mut far_d = -1.0;
        for (h, &dh) in nearest.iter().enumerate() {
            if dh > far_d {
                far_d = dh;
                far = h;
            }
        }
        if far_d <= eps {
            break;
        }
        centers.push(far);
        let fv = class.hypothesis(far);
        for h in 0..n {
            let dh = values_distance(class.hypothesis(h), fv, dim, weights, norm);
            if dh < nearest[h] {
                nearest[h] = dh;
            }
        }
    }
    centers.sort_unstable();
    Ok(centers)
}

/// Greedy set-cover eps-cover: the ln-factor alternative to the farthest
/// point net. Picks the hypothesis covering the most uncovered hypotheses
/// until the class is covered; size is within a `ln` factor of the minimum.
/// The returned indices are sorted.
pub fn greedy_cover_setcover(
    class: &FiniteFunctionClass,
    dist: &EmpiricalDistribution,
    eps: f64,
    norm: NormSpec,
) -> Result<Vec<usize>> {
    check_eps(eps)?;
    let d = distance_matrix(class, dist, norm)?;
    let n = class.num_hypotheses();
    let mut covered = vec![false; n];
    let mut picked = Vec::new();
    while covered.iter().any(|c| !c) {
        let mut best_c = usize::MAX;
        let mut best_gain = 0usize;
        for c in 0..n {
            let gain = (0..n).filter(|&h| !covered[h] && d[c][h] <= eps).count();
            if gain > best_gain {
                best_gain = gain;
                best_c = c;
            }
        }
        debug_assert!(best_c != usize::MAX, "self-incidence guarantees progress");
        for h in 0..n {
            if d[best_c][h] <= eps {
                covered[h] = true;
            }
        }
        picked.push(best_c);
    }
    picked.sort_unstable();
    Ok(picked)
}

/// Greedy maximal eps-packing: scans hypotheses in index order and keeps
/// those strictly more than `eps` from everything kept so far.
///
/// Any packing at scale `2 * eps` lower-bounds the minimum cover size at
/// `eps` (two packed points cannot share a center), so the returned size is a
/// certified cover lower bound at half its scale. The returned indices are
/// ascending by construction.
pub fn greedy_packing(
    class: &FiniteFunctionClass,
    dist: &EmpiricalDistribution,
    eps: f64,
    norm: NormSpec,
) -> Result<Vec<usize>> {
    check_eps(eps)?;
    dist.matches_points(class)?;
    let n = class.num_hypotheses();
    let dim = class.dim();
    let weights = dist.weights();
    let mut kept: Vec<usize> = Vec::new();
    for h in 0..n {
        let hv = class.hypothesis(h);
        let ok = kept
            .iter()
            .all(|&k| values_distance(hv, class.hypothesis(k), dim, weights, norm) > eps);
        if ok {
            kept.push(h);
        }
    }
    Ok(kept)
}

/// Size guard for [`vc_dimension`]: shattering is checked by subset
/// enumeration.
pub const VC_MAX_POINTS: usize = 24;

/// VC dimension of a binary class (`d = 1`, values in `{0, 1}`): the size of
/// the largest point subset on which the class realizes all sign patterns.
///
/// Ascending-size subset search with early exit: as soon as no subset of a
/// given size is shattered, no larger one can be. Guarded to at most
/// [`VC_MAX_POINTS`] points.
pub fn vc_dimension(class: &FiniteFunctionClass) -> Result<usize> {
    if class.dim() != 1 {
        return Err(AdlError::invalid_parameter(format!(
            "vc_dimension requires scalar outputs (d = 1), got d = {}",
            class.dim()
        )));
    }
    if !class.is_binary() {
        return Err(AdlError::invalid_parameter(
            "vc_dimension requires values in {0, 1}".to_string(),
        ));
    }
    let m = class.num_points();
    if m > VC_MAX_POINTS {
        return Err(AdlError::GuardExceeded {
            detail: format!(
                "vc_dimension enumerates subsets and is limited to {VC_MAX_POINTS} points, got {m}"
            ),
        });
    }
    let n = class.num_hypotheses();
    // Each hypothesis as a bitmask over points.
    let rows: Vec<u32> = (0..n)
        .map(|h| {
            let mut mask = 0u32;
            for x in 0..m {
                if class.value(h, x, 0) == 1.0 {
                    mask |= 1 << x;
                }
            }
            mask
        })
        .collect();

    let mut vc = 0usize;
    for s in 1..=m {
        // Shattering a set of size s needs at least 2^s distinct hypotheses.
        if n < (1usize << s) {
            break;
        }
        let mut shattered = false;
        let mut subset: u32 = (1u32 << s) - 1; // Gosper's hack over s-subsets
        let limit: u32 = 1u32 << m;
        while subset < limit {
            if is_shattered(subset, s, &rows) {
                shattered = true;
                break;
            }
            let c = subset & subset.wrapping_neg();
            let r = subset + c;
            if r >= limit || c == 0 {
                break;
            }
            subset = (((r ^ subset) >> 2) / c) | r;
        }
        if !shattered {
            break;
        }
        vc = s;
    }
    Ok(vc)
}

/// Does the class realize all `2^s` patterns on the points of `subset`?
fn is_shattered(subset: u32, s: usize, rows: &[u32]) -> bool {
    // Positions of the subset's bits, for pattern extraction.
    let mut positions = [0u32; 24];
    let mut k = 0;
    let mut rest = subset;
    while rest != 0 {
        positions[k] = rest.trailing_zeros();
        k += 1;
        rest &= rest - 1;
    }
    let want = 1usize << s;
    let mut seen = vec![false; want];
    let mut count = 0usize;
    for &row in rows {
        let mut pat = 0usize;
        for (b, &p) in positions[..k].iter().enumerate() {
            if row & (1 << p) != 0 {
                pat |= 1 << b;
            }
        }
        if !seen[pat] {
            seen[pat] = true;
            count += 1;
            if count == want {
                return true;
            }
        }
    }
    false
}

/// A multi-resolution cover chain: covers at scales `eps_n = 2^-n` from the
/// zero-function root (`n = 0`) to an exact terminal scale.
///
/// Cover members are extended indices: `0..num_hypotheses` are class members
/// and `num_hypotheses` denotes the zero function, which appears only in the
/// root cover. `assignment(n)[h]` is the *position* within `cover(n)` of the
/// member nearest to `h` (ties to the lowest index); at the terminal scale
/// the assignment is the identity, so the chain reconstructs every hypothesis
/// exactly.
#[derive(Debug, Clone, Serialize)]
pub struct CoverChain {
    num_hypotheses: usize,
    covers: Vec<Vec<usize>>,
    assignment: Vec<Vec<usize>>,
    norm: NormSpec,
}

impl CoverChain {
    /// Deepest scale index; scales run `0..=n_max`.
    pub fn n_max(&self) -> usize {
        self.covers.len() - 1
    }

    /// `eps_n = 2^-n`.
    pub fn scale(&self, n: usize) -> f64 {
        0.5f64.powi(n as i32)
    }

    /// Extended member indices of the cover at scale `n`.
    pub fn cover(&self, n: usize) -> &[usize] {
        &self.covers[n]
    }

    /// For each hypothesis, the position of its assigned member in
    /// `cover(n)`.
    pub fn assignment(&self, n: usize) -> &[usize] {
        &self.assignment[n]
    }

    /// Extended index reserved for the zero function.
    pub fn zero_id(&self) -> usize {
        self.num_hypotheses
    }

    pub fn num_hypotheses(&self) -> usize {
        self.num_hypotheses
    }

    pub fn norm(&self) -> NormSpec {
        self.norm
    }

    /// The extended member assigned to hypothesis `h` at scale `n`.
    pub fn assigned_member(&self, n: usize, h: usize) -> usize {
        self.covers[n][self.assignment[n][h]]
    }

    /// Values of an extended member as a flat `num_points * dim` table.
    pub fn member_values(&self, class: &FiniteFunctionClass, id: usize) -> Vec<f64> {
        if id == self.zero_id() {
            vec![0.0; class.num_points() * class.dim()]
        } else {
            class.hypothesis(id).to_vec()
        }
    }
}

/// Build a [`CoverChain`] for a class with values in `[0, 1]`.
///
/// The root cover is the singleton zero function (valid because every
/// hypothesis is within `2^0 = 1` of zero, which is checked). The terminal
/// scale `n_max` is the smallest `n` with `2^-n` below half the minimum
/// nonzero pairwise distance — past that point distinct hypotheses cannot
/// share a center, so the cover becomes the whole class with the identity
/// assignment and the chain is exact. Classes whose hypotheses are all
/// identical terminate at `n_max = 0` (all zero) or `n_max = 1`.
///
/// Intermediate scales use [`exact_cover`] when `use_exact` is set (subject
/// to its size guard) and [`greedy_cover`] otherwise.
pub fn build_cover_chain(
    class: &FiniteFunctionClass,
    dist: &EmpiricalDistribution,
    norm: NormSpec,
    use_exact: bool,
) -> Result<CoverChain> {
    dist.matches_points(class)?;
    if let Some((h, x, j)) = class.first_value_outside(0.0, 1.0) {
        return Err(AdlError::invalid_parameter(format!(
            "cover chains require values in [0, 1]; values[{h}][{x}][{j}] = {} is outside",
            class.value(h, x, j)
        )));
    }
    let n = class.num_hypotheses();
    let zero = vec![0.0; class.num_points() * class.dim()];
    let to_zero: Vec<f64> = (0..n)
        .map(|h| {
            values_distance(
                class.hypothesis(h),
                &zero,
                class.dim(),
                dist.weights(),
                norm,
            )
        })
        .collect();
    // Values in [0, 1] make this automatic for the sup inner norm, but the
    // euclidean inner norm can exceed 1 when d > 1.
    if let Some((h, &dz)) = to_zero.iter().enumerate().find(|(_, &dz)| dz > 1.0) {
        return Err(AdlError::invalid_parameter(format!(
            "the zero function must cover the class at scale 1, but hypothesis {h} is at distance {dz}"
        )));
    }

    let dmat = distance_matrix(class, dist, norm)?;
    let mut dmin = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            if dmat[i][j] > 0.0 && dmat[i][j] < dmin {
                dmin = dmat[i][j];
            }
        }
    }

    let n_max = if dmin.is_finite() {
        let mut k = 1usize;
        while 0.5f64.powi(k as i32) >= dmin / 2.0 {
            k += 1;
        }
        k
    } else if to_zero.iter().all(|&dz| dz == 0.0) {
        0 // every hypothesis is the zero function; the root is already exact
    } else {
        1 // all hypotheses identical but nonzero; one refinement suffices
    };

    let zero_id = n;
    let mut covers: Vec<Vec<usize>> = vec![vec![zero_id]];
    let mut assignment: Vec<Vec<usize>> = vec![vec![0; n]];

    for level in 1..=n_max {
        let eps = 0.5f64.powi(level as i32);
        let members: Vec<usize> = if level == n_max {
            (0..n).collect()
        } else if use_exact {
            exact_cover(class, dist, eps, norm)?
        } else {
            greedy_cover(class, dist, eps, norm)?
        };
        let assign: Vec<usize> = if level == n_max {
            (0..n).collect()
        } else {
            (0..n)
                .map(|h| {
                    let mut best_pos = 0usize;
                    let mut best_d = f64::INFINITY;
                    for (pos, &c) in members.iter().enumerate() {
                        if dmat[c][h] < best_d {
                            best_d = dmat[c][h];
                            best_pos = pos;
                        }
                    }
                    best_pos
                })
                .collect()
        };
        covers.push(members);
        assignment.push(assign);
    }

    Ok(CoverChain {
        num_hypotheses: n,
        covers,
        assignment,
        norm,
    })
}
