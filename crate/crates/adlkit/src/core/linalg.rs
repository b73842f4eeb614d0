//! Dense row-major matrices and the power-iteration top eigenvalue used to
//! certify directional second moments.

use crate::error::{AdlError, Result};

/// Dense `rows x cols` matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != c {
                return Err(AdlError::invalid_parameter(format!(
                    "row {i} has {} entries, expected {c}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// `self * v`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            out[i] = dot(row, v);
        }
        out
    }

    /// `self^T * v`.
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            for j in 0..self.cols {
                out[j] += row[j] * v[i];
            }
        }
        out
    }

    /// `self += scale * v v^T` (square matrices only).
    pub fn add_scaled_outer(&mut self, v: &[f64], scale: f64) {
        assert_eq!(self.rows, self.cols);
        assert_eq!(v.len(), self.rows);
        for i in 0..self.rows {
            let vi = v[i] * scale;
            let row = &mut self.data[i * self.cols..(i + 1) * self.cols];
            for j in 0..self.cols {
                row[j] += vi * v[j];
            }
        }
    }

    pub fn add_assign(&mut self, other: &Matrix) {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn scale_in_place(&mut self, s: f64) {
        for a in &mut self.data {
            *a *= s;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &x| m.max(x.abs()))
    }

    /// Nested-array view (for JSON reports).
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| self.data[i * self.cols..(i + 1) * self.cols].to_vec())
            .collect()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Top eigenvalue of a symmetric positive-semidefinite matrix.
///
/// Power iteration from a fixed pseudorandom start; the convergence test is on
/// successive Rayleigh quotients (no deflation), tightened past the documented
/// 1e-9 relative accuracy. Errors if the input is not symmetric within 1e-9
/// (relative to the largest entry) or has a clearly negative diagonal.
pub fn second_moment_top_eig(m: &Matrix) -> Result<f64> {
    top_eig_with_vector(m).map(|(l, _)| l)
}

/// Same as [`second_moment_top_eig`] but also returns a unit vector achieving
/// the top Rayleigh quotient.
pub fn top_eig_with_vector(m: &Matrix) -> Result<(f64, Vec<f64>)> {
    if m.rows != m.cols || m.rows == 0 {
        return Err(AdlError::invalid_parameter(format!(
            "top eigenvalue needs a non-empty square matrix, got {}x{}",
            m.rows, m.cols
        )));
    }
    let d = m.rows;
    let scale = m.max_abs().max(1.0);
    let mut max_dev = 0.0f64;
    for i in 0..d {
        for j in (i + 1)..d {
            max_dev = max_dev.max((m.get(i, j) - m.get(j, i)).abs());
        }
    }
    if max_dev > 1e-9 * scale {
        return Err(AdlError::NonSymmetric { max_dev });
    }
    for i in 0..d {
        if m.get(i, i) < -1e-9 * scale {
            return Err(AdlError::invalid_parameter(format!(
                "diagonal entry ({i},{i}) = {} is negative; matrix is not a second moment",
                m.get(i, i)
            )));
        }
    }
    if m.max_abs() == 0.0 {
        let mut v = vec![0.0; d];
        v[0] = 1.0;
        return Ok((0.0, v));
    }

    // Probe order: two fixed pseudorandom vectors, then the basis vector at
    // the largest diagonal entry (which cannot lie in the kernel of a nonzero
    // PSD matrix).
    for probe in 0..3u32 {
        let mut v: Vec<f64> = match probe {
            2 => {
                let j = (0..d)
                    .max_by(|&a, &b| m.get(a, a).total_cmp(&m.get(b, b)))
                    .unwrap();
                let mut e = vec![0.0; d];
                e[j] = 1.0;
                e
            }
            _ => (0..d)
                .map(|i| {
                    let h = (i as u64 + 1)
                        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                        .wrapping_add(u64::from(probe) * 0x517C_C1B7_2722_0A95);
                    1.0 + (h >> 40) as f64 / (1u64 << 24) as f64
                })
                .collect(),
        };
        let n0 = norm(&v);
        for x in &mut v {
            *x /= n0;
        }
        let mut lambda = 0.0f64;
        let mut stable = 0;
        for _ in 0..100_000 {
            let w = m.mul_vec(&v);
            let nw = norm(&w);
            if nw == 0.0 {
                break; // probe sat in the kernel; try the next one
            }
            let next = dot(&v, &w);
            if (next - lambda).abs() <= 1e-13 * next.abs().max(f64::MIN_POSITIVE) {
                stable += 1;
                if stable >= 3 {
                    lambda = next;
                    for (x, y) in v.iter_mut().zip(&w) {
                        *x = y / nw;
                    }
                    return Ok((lambda.max(0.0), v));
                }
            } else {
                stable = 0;
            }
            lambda = next;
            for (x, y) in v.iter_mut().zip(&w) {
                *x = y / nw;
            }
        }
        if lambda > 0.0 {
            return Ok((lambda.max(0.0), v));
        }
    }
    Ok((0.0, {
        let mut v = vec![0.0; d];
        v[0] = 1.0;
        v
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(entries: &[f64]) -> Matrix {
        let d = entries.len();
        let mut m = Matrix::zeros(d, d);
        for (i, &e) in entries.iter().enumerate() {
            m.set(i, i, e);
        }
        m
    }

    #[test]
    fn diagonal_top_eig() {
        let m = diag(&[4.0, 1.0]);
        assert!((second_moment_top_eig(&m).unwrap() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn rank_one_top_eig_is_squared_norm() {
        let v = [1.0, -2.0, 3.0];
        let mut m = Matrix::zeros(3, 3);
        m.add_scaled_outer(&v, 1.0);
        let expect = dot(&v, &v);
        assert!((second_moment_top_eig(&m).unwrap() - expect).abs() < 1e-9 * expect);
    }

    #[test]
    fn two_by_two_with_known_spectrum() {
        // [[2,1],[1,2]] has eigenvalues 3 and 1.
        let m = Matrix::from_rows(vec![vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        assert!((second_moment_top_eig(&m).unwrap() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn zero_matrix() {
        assert_eq!(second_moment_top_eig(&Matrix::zeros(5, 5)).unwrap(), 0.0);
    }

    #[test]
    fn rejects_asymmetry() {
        let m = Matrix::from_rows(vec![vec![1.0, 0.5], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(
            second_moment_top_eig(&m),
            Err(AdlError::NonSymmetric { .. })
        ));
    }

    #[test]
    fn rejects_negative_diagonal() {
        let m = diag(&[1.0, -0.5]);
        assert!(second_moment_top_eig(&m).is_err());
    }

    #[test]
    fn dominates_random_rayleigh_quotients() {
        // lambda_max must upper-bound u^T M u for every sampled unit u, and the
        // sampled maximum should land in the right ballpark from below.
        let mut rng = crate::core::RandomStream::from_seed(2024);
        for d in [2usize, 5, 16] {
            let mut m = Matrix::zeros(d, d);
            for _ in 0..(2 * d) {
                let g: Vec<f64> = (0..d).map(|_| rng.gaussian()).collect();
                m.add_scaled_outer(&g, 1.0);
            }
            let lambda = second_moment_top_eig(&m).unwrap();
            let mut best = 0.0f64;
            for _ in 0..10_000 {
                let mut u: Vec<f64> = (0..d).map(|_| rng.gaussian()).collect();
                let n = norm(&u);
                for x in &mut u {
                    *x /= n;
                }
                best = best.max(dot(&u, &m.mul_vec(&u)));
            }
            assert!(
                best <= lambda * (1.0 + 1e-6),
                "d={d}: sampled {best} > {lambda}"
            );
            assert!(
                best >= 0.3 * lambda,
                "d={d}: sampled max {best} far below {lambda}"
            );
        }
    }

    #[test]
    fn transpose_multiply_matches_definition() {
        let m = Matrix::from_rows(vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        let v = [1.0, -1.0, 2.0];
        let got = m.tr_mul_vec(&v);
        assert_eq!(got, vec![1.0 - 3.0 + 10.0, 2.0 - 4.0 + 12.0]);
    }
}
