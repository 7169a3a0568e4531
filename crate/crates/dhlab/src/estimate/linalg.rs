//! Closed-form inverses for the small normal-equation blocks and a pivoted
//! elimination for the 9×9 information matrix. Singular systems are reported
//! instead of pseudo-inverted: any pivot below `1e-12·‖A‖` fails the solve.

/// Relative pivot cutoff below which a matrix is declared singular.
pub const SINGULAR_CUTOFF: f64 = 1e-12;

fn max_abs<const N: usize>(a: &[[f64; N]; N]) -> f64 {
    a.iter()
        .flat_map(|row| row.iter())
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// 2×2 inverse by the adjugate formula. Returns None when the determinant is
/// below the cutoff relative to the matrix scale.
pub fn inv2(a: &[[f64; 2]; 2]) -> Option<[[f64; 2]; 2]> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let scale = max_abs(a);
    if det.abs() <= SINGULAR_CUTOFF * scale * scale {
        return None;
    }
    let inv_det = 1.0 / det;
    Some([
        [a[1][1] * inv_det, -a[0][1] * inv_det],
        [-a[1][0] * inv_det, a[0][0] * inv_det],
    ])
}

/// 3×3 inverse by cofactors.
pub fn inv3(a: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let scale = max_abs(a);
    inv3_with_cutoff(a, SINGULAR_CUTOFF * scale * scale * scale)
}

/// 3×3 cofactor inverse with an explicit absolute determinant cutoff, for
/// callers whose matrices are legitimately ill-conditioned (floored R).
pub fn inv3_with_cutoff(a: &[[f64; 3]; 3], det_cutoff: f64) -> Option<[[f64; 3]; 3]> {
    let c00 = a[1][1] * a[2][2] - a[1][2] * a[2][1];
    let c01 = a[1][2] * a[2][0] - a[1][0] * a[2][2];
    let c02 = a[1][0] * a[2][1] - a[1][1] * a[2][0];
    let det = a[0][0] * c00 + a[0][1] * c01 + a[0][2] * c02;
    if det.abs() <= det_cutoff {
        return None;
    }
    let inv_det = 1.0 / det;
    Some([
        [
            c00 * inv_det,
            (a[0][2] * a[2][1] - a[0][1] * a[2][2]) * inv_det,
            (a[0][1] * a[1][2] - a[0][2] * a[1][1]) * inv_det,
        ],
        [
            c01 * inv_det,
            (a[0][0] * a[2][2] - a[0][2] * a[2][0]) * inv_det,
            (a[0][2] * a[1][0] - a[0][0] * a[1][2]) * inv_det,
        ],
        [
            c02 * inv_det,
            (a[0][1] * a[2][0] - a[0][0] * a[2][1]) * inv_det,
            (a[0][0] * a[1][1] - a[0][1] * a[1][0]) * inv_det,
        ],
    ])
}

/// 4×4 inverse by the 2×2-minor expansion of the adjugate.
pub fn inv4(a: &[[f64; 4]; 4]) -> Option<[[f64; 4]; 4]> {
    let s0 = a[0][0] * a[1][1] - a[1][0] * a[0][1];
    let s1 = a[0][0] * a[1][2] - a[1][0] * a[0][2];
    let s2 = a[0][0] * a[1][3] - a[1][0] * a[0][3];
    let s3 = a[0][1] * a[1][2] - a[1][1] * a[0][2];
    let s4 = a[0][1] * a[1][3] - a[1][1] * a[0][3];
    let s5 = a[0][2] * a[1][3] - a[1][2] * a[0][3];

    let c5 = a[2][2] * a[3][3] - a[3][2] * a[2][3];
    let c4 = a[2][1] * a[3][3] - a[3][1] * a[2][3];
    let c3 = a[2][1] * a[3][2] - a[3][1] * a[2][2];
    let c2 = a[2][0] * a[3][3] - a[3][0] * a[2][3];
    let c1 = a[2][0] * a[3][2] - a[3][0] * a[2][2];
    let c0 = a[2][0] * a[3][1] - a[3][0] * a[2][1];

    let det = s0 * c5 - s1 * c4 + s2 * c3 + s3 * c2 - s4 * c1 + s5 * c0;
    let scale = max_abs(a);
    if det.abs() <= SINGULAR_CUTOFF * scale.powi(4) {
        return None;
    }
    let d = 1.0 / det;
    Some([
        [
            (a[1][1] * c5 - a[1][2] * c4 + a[1][3] * c3) * d,
            (-a[0][1] * c5 + a[0][2] * c4 - a[0][3] * c3) * d,
            (a[3][1] * s5 - a[3][2] * s4 + a[3][3] * s3) * d,
            (-a[2][1] * s5 + a[2][2] * s4 - a[2][3] * s3) * d,
        ],
        [
            (-a[1][0] * c5 + a[1][2] * c2 - a[1][3] * c1) * d,
            (a[0][0] * c5 - a[0][2] * c2 + a[0][3] * c1) * d,
            (-a[3][0] * s5 + a[3][2] * s2 - a[3][3] * s1) * d,
            (a[2][0] * s5 - a[2][2] * s2 + a[2][3] * s1) * d,
        ],
        [
            (a[1][0] * c4 - a[1][1] * c2 + a[1][3] * c0) * d,
            (-a[0][0] * c4 + a[0][1] * c2 - a[0][3] * c0) * d,
            (a[3][0] * s4 - a[3][1] * s2 + a[3][3] * s0) * d,
            (-a[2][0] * s4 + a[2][1] * s2 - a[2][3] * s0) * d,
        ],
        [
            (-a[1][0] * c3 + a[1][1] * c1 - a[1][2] * c0) * d,
            (a[0][0] * c3 - a[0][1] * c1 + a[0][2] * c0) * d,
            (-a[3][0] * s3 + a[3][1] * s1 - a[3][2] * s0) * d,
            (a[2][0] * s3 - a[2][1] * s1 + a[2][2] * s0) * d,
        ],
    ])
}

/// Inverse of an N×N matrix by Gauss-Jordan elimination with partial
/// pivoting; fails when a pivot drops below `1e-12·‖A‖_∞`. Also reports the
/// ratio of the largest to smallest pivot encountered as a cheap condition
/// indicator.
pub fn invert_pivoted<const N: usize>(a: &[[f64; N]; N]) -> Option<([[f64; N]; N], f64)> {
    let norm = a
        .iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let cutoff = SINGULAR_CUTOFF * norm.max(f64::MIN_POSITIVE);

    let mut m = *a;
    let mut inv = [[0.0; N]; N];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let mut min_pivot = f64::INFINITY;
    let mut max_pivot = 0.0f64;

    for col in 0..N {
        let mut pivot_row = col;
        for row in col + 1..N {
            if m[row][col].abs() > m[pivot_row][col].abs() {
                pivot_row = row;
            }
        }
        let pivot = m[pivot_row][col];
        if pivot.abs() <= cutoff {
            return None;
        }
        min_pivot = min_pivot.min(pivot.abs());
        max_pivot = max_pivot.max(pivot.abs());
        m.swap(col, pivot_row);
        inv.swap(col, pivot_row);

        let inv_pivot = 1.0 / m[col][col];
        for j in 0..N {
            m[col][j] *= inv_pivot;
            inv[col][j] *= inv_pivot;
        }
        for row in 0..N {
            if row == col {
                continue;
            }
            let factor = m[row][col];
            if factor == 0.0 {
                continue;
            }
            for j in 0..N {
                m[row][j] -= factor * m[col][j];
                inv[row][j] -= factor * inv[col][j];
            }
        }
    }
    Some((inv, max_pivot / min_pivot))
}

/// Symmetrize as (A + Aᵀ)/2.
pub fn symmetrize<const N: usize>(a: &mut [[f64; N]; N]) {
    for i in 0..N {
        for j in i + 1..N {
            let avg = 0.5 * (a[i][j] + a[j][i]);
            a[i][j] = avg;
            a[j][i] = avg;
        }
    }
}

/// Eigenvalues of a symmetric matrix by the cyclic Jacobi method.
pub fn sym_eigenvalues<const N: usize>(a: &[[f64; N]; N]) -> [f64; N] {
    let mut m = *a;
    for _sweep in 0..64 {
        let mut off = 0.0;
        for i in 0..N {
            for j in i + 1..N {
                off += m[i][j] * m[i][j];
            }
        }
        if off < 1e-28 {
            break;
        }
        for p in 0..N {
            for q in p + 1..N {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..N {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..N {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut eig = [0.0; N];
    for i in 0..N {
        eig[i] = m[i][i];
    }
    eig
}

/// Matrix-vector product for small dense systems.
pub fn mat_vec<const N: usize>(a: &[[f64; N]; N], v: &[f64; N]) -> [f64; N] {
    let mut out = [0.0; N];
    for i in 0..N {
        for j in 0..N {
            out[i] += a[i][j] * v[j];
        }
    }
    out
}
