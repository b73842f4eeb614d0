//! Finite function classes and empirical distributions over their point sets.
//!
//! A class holds `num_hypotheses` functions from a common finite point set
//! (size `num_points`) into `R^dim`, stored dense. All values must be finite;
//! constructors and the file loader reject anything else, naming the offending
//! index.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{AdlError, Result};

/// One function's values: a `num_points x dim` table.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionValues {
    num_points: usize,
    dim: usize,
    data: Vec<f64>,
}

impl FunctionValues {
    pub fn zeros(num_points: usize, dim: usize) -> Self {
        FunctionValues {
            num_points,
            dim,
            data: vec![0.0; num_points * dim],
        }
    }

    pub fn from_data(num_points: usize, dim: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), num_points * dim);
        FunctionValues {
            num_points,
            dim,
            data,
        }
    }

    pub fn num_points(&self) -> usize {
        self.num_points
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, x: usize) -> &[f64] {
        &self.data[x * self.dim..(x + 1) * self.dim]
    }

    pub fn point_mut(&mut self, x: usize) -> &mut [f64] {
        &mut self.data[x * self.dim..(x + 1) * self.dim]
    }

    pub fn get(&self, x: usize, j: usize) -> f64 {
        self.data[x * self.dim + j]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// A finite class of functions from a finite point set to `R^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteFunctionClass {
    num_hypotheses: usize,
    num_points: usize,
    dim: usize,
    /// Flat `[hypothesis][point][coordinate]`.
    values: Vec<f64>,
    point_ids: Option<Vec<String>>,
}

impl FiniteFunctionClass {
    /// Build from flat values, validating extents and finiteness.
    pub fn new(
        num_hypotheses: usize,
        num_points: usize,
        dim: usize,
        values: Vec<f64>,
    ) -> Result<Self> {
        if num_hypotheses == 0 || num_points == 0 || dim == 0 {
            return Err(AdlError::invalid_class(format!(
                "extents must be positive, got {num_hypotheses} hypotheses, \
                 {num_points} points, dim {dim}"
            )));
        }
        if values.len() != num_hypotheses * num_points * dim {
            return Err(AdlError::invalid_class(format!(
                "values has {} entries, expected {num_hypotheses}*{num_points}*{dim} = {}",
                values.len(),
                num_hypotheses * num_points * dim
            )));
        }
        for (idx, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                let h = idx / (num_points * dim);
                let x = (idx / dim) % num_points;
                let j = idx % dim;
                return Err(AdlError::invalid_class(format!(
                    "values[{h}][{x}][{j}] is not finite ({v})"
                )));
            }
        }
        Ok(FiniteFunctionClass {
            num_hypotheses,
            num_points,
            dim,
            values,
            point_ids: None,
        })
    }

    /// Build from nested `[hypothesis][point][coordinate]` arrays.
    pub fn from_nested(values: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let num_hypotheses = values.len();
        if num_hypotheses == 0 {
            return Err(AdlError::invalid_class("values has no hypotheses"));
        }
        let num_points = values[0].len();
        let dim = values[0].first().map_or(0, Vec::len);
        let mut flat = Vec::with_capacity(num_hypotheses * num_points * dim);
        for (h, hyp) in values.iter().enumerate() {
            if hyp.len() != num_points {
                return Err(AdlError::invalid_class(format!(
                    "values[{h}] has {} points, expected {num_points}",
                    hyp.len()
                )));
            }
            for (x, pt) in hyp.iter().enumerate() {
                if pt.len() != dim {
                    return Err(AdlError::invalid_class(format!(
                        "values[{h}][{x}] has {} coordinates, expected {dim}",
                        pt.len()
                    )));
                }
                flat.extend_from_slice(pt);
            }
        }
        Self::new(num_hypotheses, num_points, dim, flat)
    }

    pub fn with_point_ids(mut self, ids: Vec<String>) -> Result<Self> {
        if ids.len() != self.num_points {
            return Err(AdlError::invalid_class(format!(
                "point_ids has {} entries, expected {}",
                ids.len(),
                self.num_points
            )));
        }
        self.point_ids = Some(ids);
        Ok(self)
    }

    pub fn num_hypotheses(&self) -> usize {
        self.num_hypotheses
    }

    pub fn num_points(&self) -> usize {
        self.num_points
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point_ids(&self) -> Option<&[String]> {
        self.point_ids.as_deref()
    }

    pub fn value(&self, h: usize, x: usize, j: usize) -> f64 {
        self.values[(h * self.num_points + x) * self.dim + j]
    }

    /// All values of hypothesis `h` (length `num_points * dim`).
    pub fn hypothesis(&self, h: usize) -> &[f64] {
        let stride = self.num_points * self.dim;
        &self.values[h * stride..(h + 1) * stride]
    }

    /// The `dim`-vector of hypothesis `h` at point `x`.
    pub fn point_vector(&self, h: usize, x: usize) -> &[f64] {
        let base = (h * self.num_points + x) * self.dim;
        &self.values[base..base + self.dim]
    }

    pub fn function_values(&self, h: usize) -> FunctionValues {
        FunctionValues::from_data(self.num_points, self.dim, self.hypothesis(h).to_vec())
    }

    pub fn check_hypothesis_index(&self, h: usize) -> Result<()> {
        if h >= self.num_hypotheses {
            return Err(AdlError::IndexOutOfRange {
                what: "hypothesis",
                index: h,
                len: self.num_hypotheses,
            });
        }
        Ok(())
    }

    /// Subclass on a point subset (order as given; must be non-empty,
    /// in-range, duplicate-free).
    pub fn restrict(&self, point_subset: &[usize]) -> Result<Self> {
        if point_subset.is_empty() {
            return Err(AdlError::invalid_parameter("point subset is empty"));
        }
        let mut seen = vec![false; self.num_points];
        for &x in point_subset {
            if x >= self.num_points {
                return Err(AdlError::IndexOutOfRange {
                    what: "point",
                    index: x,
                    len: self.num_points,
                });
            }
            if seen[x] {
                return Err(AdlError::DuplicateIndex { index: x });
            }
            seen[x] = true;
        }
        let mut values = Vec::with_capacity(self.num_hypotheses * point_subset.len() * self.dim);
        for h in 0..self.num_hypotheses {
            for &x in point_subset {
                values.extend_from_slice(self.point_vector(h, x));
            }
        }
        let point_ids = self
            .point_ids
            .as_ref()
            .map(|ids| point_subset.iter().map(|&x| ids[x].clone()).collect());
        Ok(FiniteFunctionClass {
            num_hypotheses: self.num_hypotheses,
            num_points: point_subset.len(),
            dim: self.dim,
            values,
            point_ids,
        })
    }

    /// First (hypothesis, point, coordinate) whose value leaves `[lo, hi]`.
    pub fn first_value_outside(&self, lo: f64, hi: f64) -> Option<(usize, usize, usize)> {
        for (idx, &v) in self.values.iter().enumerate() {
            if v < lo || v > hi {
                let h = idx / (self.num_points * self.dim);
                let x = (idx / self.dim) % self.num_points;
                let j = idx % self.dim;
                return Some((h, x, j));
            }
        }
        None
    }

    /// True when every value is exactly 0.0 or 1.0.
    pub fn is_binary(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    /// The one-hypothesis class that is identically zero.
    pub fn singleton_zero(num_points: usize, dim: usize) -> Self {
        FiniteFunctionClass {
            num_hypotheses: 1,
            num_points,
            dim,
            values: vec![0.0; num_points * dim],
            point_ids: None,
        }
    }

    /// Threshold functions on `num_points` ordered points: hypothesis `t`
    /// maps point `x` to 1 iff `x >= t`, for `t = 0..=num_points`.
    /// A scalar binary class with `num_points + 1` hypotheses.
    pub fn thresholds(num_points: usize) -> Self {
        let mut values = Vec::with_capacity((num_points + 1) * num_points);
        for t in 0..=num_points {
            for x in 0..num_points {
                values.push(if x >= t { 1.0 } else { 0.0 });
            }
        }
        FiniteFunctionClass {
            num_hypotheses: num_points + 1,
            num_points,
            dim: 1,
            values,
            point_ids: None,
        }
    }

    /// All `2^num_points` binary labelings of `num_points` points
    /// (`num_points <= 20` to keep this a desk-scale constructor).
    pub fn full_binary_labelings(num_points: usize) -> Result<Self> {
        if num_points == 0 || num_points > 20 {
            return Err(AdlError::GuardExceeded {
                detail: format!("full labelings of {num_points} points (limit 20)"),
            });
        }
        let h = 1usize << num_points;
        let mut values = Vec::with_capacity(h * num_points);
        for labeling in 0..h {
            for x in 0..num_points {
                values.push(if (labeling >> x) & 1 == 1 { 1.0 } else { 0.0 });
            }
        }
        Ok(FiniteFunctionClass {
            num_hypotheses: h,
            num_points,
            dim: 1,
            values,
            point_ids: None,
        })
    }
}

/// Probability weights over a class's point set.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    weights: Vec<f64>,
}

impl EmpiricalDistribution {
    /// Weights must be finite, non-negative, and sum to 1 within 1e-12.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(AdlError::invalid_class("weights is empty"));
        }
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(AdlError::invalid_class(format!(
                    "weights[{i}] = {w} is not a probability"
                )));
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(AdlError::invalid_class(format!(
                "weights sum to {sum}, expected 1 within 1e-12"
            )));
        }
        Ok(EmpiricalDistribution { weights })
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform distribution over empty set");
        EmpiricalDistribution {
            weights: vec![1.0 / n as f64; n],
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn matches_points(&self, class: &FiniteFunctionClass) -> Result<()> {
        if self.len() != class.num_points() {
            return Err(AdlError::invalid_parameter(format!(
                "distribution over {} points paired with class on {} points",
                self.len(),
                class.num_points()
            )));
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassFile {
    num_hypotheses: usize,
    num_points: usize,
    dim: usize,
    values: Vec<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    point_ids: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<Vec<f64>>>,
}

/// A class file's contents: the class plus optional point weights and
/// per-point labels (both used by the CLI).
#[derive(Debug, Clone)]
pub struct LoadedClass {
    pub class: FiniteFunctionClass,
    pub weights: Option<EmpiricalDistribution>,
    pub labels: Option<Vec<Vec<f64>>>,
}

/// Load a class from a UTF-8 JSON file, validating declared extents against
/// the nested arrays and every value for finiteness.
pub fn load_class(path: impl AsRef<Path>) -> Result<LoadedClass> {
    let text = std::fs::read_to_string(path)?;
    let file: ClassFile = serde_json::from_str(&text)?;
    let class = FiniteFunctionClass::from_nested(file.values)?;
    if class.num_hypotheses() != file.num_hypotheses {
        return Err(AdlError::invalid_class(format!(
            "values has {} hypotheses, declared num_hypotheses = {}",
            class.num_hypotheses(),
            file.num_hypotheses
        )));
    }
    if class.num_points() != file.num_points {
        return Err(AdlError::invalid_class(format!(
            "values has {} points, declared num_points = {}",
            class.num_points(),
            file.num_points
        )));
    }
    if class.dim() != file.dim {
        return Err(AdlError::invalid_class(format!(
            "values has dim {}, declared dim = {}",
            class.dim(),
            file.dim
        )));
    }
    let class = match file.point_ids {
        Some(ids) => class.with_point_ids(ids)?,
        None => class,
    };
    let weights = match file.weights {
        Some(w) => {
            if w.len() != class.num_points() {
                return Err(AdlError::invalid_class(format!(
                    "weights has {} entries, expected num_points = {}",
                    w.len(),
                    class.num_points()
                )));
            }
            Some(EmpiricalDistribution::new(w)?)
        }
        None => None,
    };
    if let Some(labels) = &file.labels {
        if labels.len() != class.num_points() {
            return Err(AdlError::invalid_class(format!(
                "labels has {} entries, expected num_points = {}",
                labels.len(),
                class.num_points()
            )));
        }
        for (x, lab) in labels.iter().enumerate() {
            if lab.len() != class.dim() {
                return Err(AdlError::invalid_class(format!(
                    "labels[{x}] has {} coordinates, expected dim = {}",
                    lab.len(),
                    class.dim()
                )));
            }
            if let Some(j) = lab.iter().position(|v| !v.is_finite()) {
                return Err(AdlError::invalid_class(format!(
                    "labels[{x}][{j}] is not finite"
                )));
            }
        }
    }
    Ok(LoadedClass {
        class,
        weights,
        labels: file.labels,
    })
}

/// Write a class (and optional weights) in the same JSON format
/// [`load_class`] reads.
pub fn save_class(
    path: impl AsRef<Path>,
    class: &FiniteFunctionClass,
    weights: Option<&EmpiricalDistribution>,
) -> Result<()> {
    let values = (0..class.num_hypotheses())
        .map(|h| {
            (0..class.num_points())
                .map(|x| class.point_vector(h, x).to_vec())
                .collect()
        })
        .collect();
    let file = ClassFile {
        num_hypotheses: class.num_hypotheses(),
        num_points: class.num_points(),
        dim: class.dim(),
        values,
        weights: weights.map(|w| w.weights().to_vec()),
        point_ids: class.point_ids().map(<[String]>::to_vec),
        labels: None,
    };
    let text = serde_json::to_string_pretty(&file)?;
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_class() -> FiniteFunctionClass {
        // 2 hypotheses on 3 points in R^2
        FiniteFunctionClass::from_nested(vec![
            vec![vec![0.0, 1.0], vec![0.5, 0.25], vec![1.0, 0.0]],
            vec![vec![1.0, 1.0], vec![0.0, 0.0], vec![0.5, 0.5]],
        ])
        .unwrap()
    }

    #[test]
    fn accessors_agree_with_layout() {
        let c = small_class();
        assert_eq!(c.num_hypotheses(), 2);
        assert_eq!(c.num_points(), 3);
        assert_eq!(c.dim(), 2);
        assert_eq!(c.value(0, 1, 0), 0.5);
        assert_eq!(c.value(1, 2, 1), 0.5);
        assert_eq!(c.point_vector(0, 2), &[1.0, 0.0]);
        assert_eq!(c.hypothesis(1).len(), 6);
    }

    #[test]
    fn nan_reported_with_index_path() {
        let err = FiniteFunctionClass::from_nested(vec![
            vec![vec![0.0], vec![0.0]],
            vec![vec![0.0], vec![f64::NAN]],
        ])
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("values[1][1][0]"), "got: {msg}");
    }

    #[test]
    fn extent_mismatch_reported() {
        let err =
            FiniteFunctionClass::from_nested(vec![vec![vec![0.0], vec![0.0]], vec![vec![0.0]]])
                .unwrap_err();
        assert!(err.to_string().contains("values[1]"), "got: {err}");
    }

    #[test]
    fn restrict_picks_points_in_order() {
        let c = small_class();
        let r = c.restrict(&[2, 0]).unwrap();
        assert_eq!(r.num_points(), 2);
        assert_eq!(r.point_vector(0, 0), c.point_vector(0, 2));
        assert_eq!(r.point_vector(0, 1), c.point_vector(0, 0));
        assert_eq!(r.point_vector(1, 0), c.point_vector(1, 2));
    }

    #[test]
    fn restrict_rejects_bad_subsets() {
        let c = small_class();
        assert!(matches!(
            c.restrict(&[]),
            Err(AdlError::InvalidParameter { .. })
        ));
        assert!(matches!(
            c.restrict(&[3]),
            Err(AdlError::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            c.restrict(&[1, 1]),
            Err(AdlError::DuplicateIndex { index: 1 })
        ));
    }

    #[test]
    fn restrict_composes() {
        let c = small_class();
        let ab = c.restrict(&[2, 0, 1]).unwrap().restrict(&[1, 0]).unwrap();
        let direct = c.restrict(&[0, 2]).unwrap();
        assert_eq!(ab, direct);
    }

    #[test]
    fn thresholds_shape_and_values() {
        let t = FiniteFunctionClass::thresholds(4);
        assert_eq!(t.num_hypotheses(), 5);
        assert_eq!(t.num_points(), 4);
        assert!(t.is_binary());
        // hypothesis 0 is all ones, hypothesis 4 all zeros
        assert_eq!(t.hypothesis(0), &[1.0, 1.0, 1.0, 1.0]);
        assert_eq!(t.hypothesis(4), &[0.0, 0.0, 0.0, 0.0]);
        assert_eq!(t.hypothesis(2), &[0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn full_labelings_count() {
        let c = FiniteFunctionClass::full_binary_labelings(3).unwrap();
        assert_eq!(c.num_hypotheses(), 8);
        assert!(c.is_binary());
        assert!(FiniteFunctionClass::full_binary_labelings(21).is_err());
    }

    #[test]
    fn distribution_validation() {
        assert!(EmpiricalDistribution::new(vec![0.5, 0.5]).is_ok());
        assert!(EmpiricalDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(EmpiricalDistribution::new(vec![1.5, -0.5]).is_err());
        let u = EmpiricalDistribution::uniform(4);
        assert_eq!(u.weight(3), 0.25);
    }

    #[test]
    fn file_roundtrip_preserves_class_and_weights() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("class.json");
        let c = small_class()
            .with_point_ids(vec!["a".into(), "b".into(), "c".into()])
            .unwrap();
        let w = EmpiricalDistribution::new(vec![0.2, 0.3, 0.5]).unwrap();
        save_class(&path, &c, Some(&w)).unwrap();
        let loaded = load_class(&path).unwrap();
        assert_eq!(loaded.class, c);
        assert_eq!(loaded.weights.unwrap(), w);
    }

    #[test]
    fn loader_rejects_declared_extent_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(
            &path,
            r#"{"num_hypotheses": 2, "num_points": 1, "dim": 1, "values": [[[0.0]]]}"#,
        )
        .unwrap();
        let err = load_class(&path).unwrap_err();
        assert!(err.to_string().contains("num_hypotheses"), "got: {err}");
    }

    #[test]
    fn loader_rejects_unknown_keys() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(
            &path,
            r#"{"num_hypotheses": 1, "num_points": 1, "dim": 1, "values": [[[0.0]]], "wieghts": [1.0]}"#,
        )
        .unwrap();
        assert!(matches!(load_class(&path), Err(AdlError::Json(_))));
    }
}
