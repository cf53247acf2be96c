//! Reference computations shared by the integration tests. Everything here is
//! written against plain dense arrays so it does not lean on the library code
//! it is used to check.

#![allow(dead_code)]

use chemofv::mesh::{EdgeKind, Mesh};
use chemofv::SparseMatrix;

/// Gaussian elimination with partial pivoting on a dense copy.
pub fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut x = b.to_vec();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs()))
            .expect("nonempty pivot column");
        m.swap(k, p);
        x.swap(k, p);
        let pivot = m[k][k];
        assert!(pivot != 0.0, "singular matrix in dense oracle");
        for i in k + 1..n {
            let f = m[i][k] / pivot;
            if f != 0.0 {
                for j in k..n {
                    m[i][j] -= f * m[k][j];
                }
                x[i] -= f * x[k];
            }
        }
    }
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[i][j] * x[j]).sum();
        x[i] = (x[i] - s) / m[i][i];
    }
    x
}

pub fn dense_matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum()).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn mass(mesh: &Mesh, u: &[f64]) -> f64 {
    mesh.cells().iter().map(|c| c.measure * u[c.index]).sum()
}

/// `Σ_σ τ_σ |c_L − c_K|²` over interior edges.
pub fn edge_energy(mesh: &Mesh, c: &[f64]) -> f64 {
    let mut e = 0.0;
    for edge in mesh.edges() {
        if let EdgeKind::Interior { left, right } = edge.kind {
            e += edge.measure / edge.distance * (c[right] - c[left]).powi(2);
        }
    }
    e
}

/// Column slack `a_jj − Σ_{i≠j} |a_ij|` and row slack, computed densely,
/// plus whether every off-diagonal entry is nonpositive.
pub struct Dominance {
    pub col_slack: Vec<f64>,
    pub row_slack: Vec<f64>,
    pub offdiag_nonpositive: bool,
    pub diag_positive: bool,
}

pub fn dominance(m: &SparseMatrix) -> Dominance {
    let d = m.to_dense();
    let n = d.len();
    let mut col_slack: Vec<f64> = (0..n).map(|j| d[j][j]).collect();
    let mut row_slack: Vec<f64> = (0..n).map(|i| d[i][i]).collect();
    let mut offdiag_nonpositive = true;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                col_slack[j] -= d[i][j].abs();
                row_slack[i] -= d[i][j].abs();
                offdiag_nonpositive &= d[i][j] <= 0.0;
            }
        }
    }
    let diag_positive = (0..n).all(|i| d[i][i] > 0.0);
    Dominance { col_slack, row_slack, offdiag_nonpositive, diag_positive }
}

/// Same as [`dominance`] but walks the sparse rows, for matrices too large
/// to densify.
pub fn sparse_dominance(m: &SparseMatrix) -> Dominance {
    let n = m.dim();
    let mut col_slack = vec![0.0; n];
    let mut row_slack = vec![0.0; n];
    let mut offdiag_nonpositive = true;
    let mut diag_positive = true;
    for i in 0..n {
        for (j, v) in m.row(i) {
            if i == j {
                col_slack[j] += v;
                row_slack[i] += v;
                diag_positive &= v > 0.0;
            } else {
                col_slack[j] -= v.abs();
                row_slack[i] -= v.abs();
                offdiag_nonpositive &= v <= 0.0;
            }
        }
    }
    Dominance { col_slack, row_slack, offdiag_nonpositive, diag_positive }
}

/// Mean of `field` over rings of width `dr` around `center`, out to
/// `r_max`. Empty rings are dropped.
pub fn radial_profile(mesh: &Mesh, field: &[f64], center: [f64; 2], dr: f64, r_max: f64) -> Vec<f64> {
    let bins = (r_max / dr).floor() as usize;
    let mut sum = vec![0.0; bins];
    let mut count = vec![0usize; bins];
    for cell in mesh.cells() {
        let r = ((cell.center[0] - center[0]).powi(2) + (cell.center[1] - center[1]).powi(2)).sqrt();
        let b = (r / dr).floor() as usize;
        if b < bins {
            sum[b] += field[cell.index];
            count[b] += 1;
        }
    }
    sum.iter()
        .zip(&count)
        .filter(|(_, &n)| n > 0)
        .map(|(s, &n)| s / n as f64)
        .collect()
}

/// Strict local maxima of a profile. The first entry counts when it exceeds
/// its only neighbor; the last entry never counts.
pub fn local_maxima(profile: &[f64]) -> usize {
    let n = profile.len();
    (0..n.saturating_sub(1))
        .filter(|&i| profile[i] > profile[i + 1] && (i == 0 || profile[i] > profile[i - 1]))
        .count()
}

/// Number of face-connected components of `{K : field_K > threshold}` on a
/// row-major `nx × ny` grid.
pub fn super_threshold_components(field: &[f64], nx: usize, ny: usize, threshold: f64) -> usize {
    assert_eq!(field.len(), nx * ny);
    let mut seen = vec![false; field.len()];
    let mut components = 0;
    let mut stack = Vec::new();
    for start in 0..field.len() {
        if seen[start] || !(field[start] > threshold) {
            continue;
        }
        components += 1;
        seen[start] = true;
        stack.push(start);
        while let Some(k) = stack.pop() {
            let (ix, iy) = (k % nx, k / nx);
            let mut visit = |j: usize| {
                if !seen[j] && field[j] > threshold {
                    seen[j] = true;
                    stack.push(j);
                }
            };
            if ix > 0 {
                visit(k - 1);
            }
            if ix + 1 < nx {
                visit(k + 1);
            }
            if iy > 0 {
                visit(k - nx);
            }
            if iy + 1 < ny {
                visit(k + nx);
            }
        }
    }
    components
}

#[cfg(test)]
mod self_checks {
    use super::*;

    #[test]
    fn dense_oracle_solves_a_known_system() {
        let a = vec![vec![0.0, 2.0], vec![1.0, 1.0]];
        let x = dense_solve(&a, &[4.0, 3.0]);
        assert_eq!(x, vec![1.0, 2.0]);
    }

    #[test]
    fn components_on_a_checkerboard() {
        let f = [2.0, 0.0, 2.0, 0.0, 2.0, 0.0, 2.0, 0.0, 2.0];
        assert_eq!(super_threshold_components(&f, 3, 3, 1.0), 5);
        assert_eq!(super_threshold_components(&[2.0; 9], 3, 3, 1.0), 1);
    }

    #[test]
    fn maxima_counting() {
        assert_eq!(local_maxima(&[3.0, 1.0, 2.0, 1.0, 1.0]), 2);
        assert_eq!(local_maxima(&[1.0, 2.0, 3.0]), 0);
    }
}
