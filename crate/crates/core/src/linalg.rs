//! Dense helpers for the tiny (d <= 3) matrices used by the models.

use crate::scalar::{lit, Real};

pub type Mat2<T> = [[T; 2]; 2];

pub fn mat2_vec<T: Real>(m: &Mat2<T>, v: &[T; 2]) -> [T; 2] {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

pub fn quad_form2<T: Real>(m: &Mat2<T>, v: &[T; 2]) -> T {
    let mv = mat2_vec(m, v);
    v[0] * mv[0] + v[1] * mv[1]
}

pub fn det2<T: Real>(m: &Mat2<T>) -> T {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Eigenvalues of a symmetric 2x2 matrix, ascending.
pub fn sym_eigenvalues2<T: Real>(m: &Mat2<T>) -> [T; 2] {
    let half: T = lit(0.5);
    let mean = half * (m[0][0] + m[1][1]);
    let diff = half * (m[0][0] - m[1][1]);
    let rad = (diff * diff + m[0][1] * m[1][0]).sqrt();
    [mean - rad, mean + rad]
}

/// Lower-triangular Cholesky factor of a symmetric positive-semidefinite
/// matrix given row-major. Zero pivots are tolerated (the column is zeroed),
/// which covers perfectly correlated factors.
pub fn cholesky(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s < -1e-12 {
                    return None;
                }
                l[i][i] = s.max(0.0).sqrt();
            } else if l[j][j] > 0.0 {
                l[i][j] = s / l[j][j];
            } else if s.abs() > 1e-12 {
                return None;
            }
        }
    }
    Some(l)
}
