//! Small shared numerical kernels: dense matrix exponential for tiny
//! systems, exponential ramp integrals, composite Simpson, and least-squares
//! slopes.

/// Infinity norm of a small dense matrix.
fn inf_norm<const N: usize>(a: &[[f64; N]; N]) -> f64 {
    a.iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn mat_mul<const N: usize>(a: &[[f64; N]; N], b: &[[f64; N]; N]) -> [[f64; N]; N] {
    let mut c = [[0.0; N]; N];
    for i in 0..N {
        for k in 0..N {
            let aik = a[i][k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..N {
                c[i][j] += aik * b[k][j];
            }
        }
    }
    c
}

/// Matrix exponential by scaling-and-squaring with a Taylor series on the
/// scaled matrix. Intended for N ≤ 8; accuracy is near machine epsilon once
/// the scaled norm is below 1/2.
pub fn expm<const N: usize>(a: &[[f64; N]; N]) -> [[f64; N]; N] {
    let norm = inf_norm(a);
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scale = (0.5f64).powi(s);
    let mut b = *a;
    for row in b.iter_mut() {
        for v in row.iter_mut() {
            *v *= scale;
        }
    }

    // exp(B) = Σ B^k / k!, truncated when the term underflows the sum.
    let mut result = [[0.0; N]; N];
    for (i, row) in result.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let mut term = result;
    for k in 1..40 {
        term = mat_mul(&term, &b);
        let inv_k = 1.0 / k as f64;
        for row in term.iter_mut() {
            for v in row.iter_mut() {
                *v *= inv_k;
            }
        }
        let mut max_term = 0.0f64;
        for i in 0..N {
            for j in 0..N {
                result[i][j] += term[i][j];
                max_term = max_term.max(term[i][j].abs());
            }
        }
        if max_term < 1e-18 * (1.0 + inf_norm(&result)) {
            break;
        }
    }
    for _ in 0..s {
        result = mat_mul(&result, &result);
    }
    result
}

/// `ramp(k, s, h) = ∫₀ʰ uᵏ e^{s·u} du` for k ≤ 4.
///
/// Series evaluation for small |s·h| avoids the cancellation of the
/// integration-by-parts recursion near s = 0.
pub fn ramp(k: u32, s: f64, h: f64) -> f64 {
    debug_assert!(k <= 4);
    let sh = s * h;
    if sh.abs() <= 0.5 {
        // ∫ uᵏ e^{su} du = h^{k+1} Σ_j (sh)^j / (j! (k+j+1))
        let mut sum = 0.0;
        let mut coeff = 1.0; // (sh)^j / j!
        for j in 0..30u32 {
            let term = coeff / (k + j + 1) as f64;
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
            coeff *= sh / (j + 1) as f64;
        }
        h.powi(k as i32 + 1) * sum
    } else {
        if k == 0 {
            return sh.exp_m1() / s;
        }
        // ramp_k = (hᵏ e^{sh} − k·ramp_{k−1}) / s
        (h.powi(k as i32) * sh.exp() - k as f64 * ramp(k - 1, s, h)) / s
    }
}

/// First divided difference of `s ↦ ramp(0, s, h)` at nodes (s1, s2):
/// `(ramp0(s1) − ramp0(s2)) / (s1 − s2)`, continued through s1 = s2.
pub fn ramp0_divdiff(s1: f64, s2: f64, h: f64) -> f64 {
    let d = s1 - s2;
    if d.abs() > 1e-4 {
        (ramp(0, s1, h) - ramp(0, s2, h)) / d
    } else {
        // Taylor around the midpoint: f[s1,s2] = f'(c) + f'''(c)(s1−s2)²/24.
        let c = 0.5 * (s1 + s2);
        ramp(1, c, h) + ramp(3, c, h) * d * d / 24.0
    }
}

/// Second divided difference of `s ↦ ramp(0, s, h)` at nodes (x0, x1, x2),
/// continued through coincident nodes.
pub fn ramp0_divdiff2(x0: f64, x1: f64, x2: f64, h: f64) -> f64 {
    let gap01 = (x0 - x1).abs();
    let gap02 = (x0 - x2).abs();
    let gap12 = (x1 - x2).abs();
    let tol = 1e-4;
    if gap01 > tol && gap02 > tol && gap12 > tol {
        (ramp0_divdiff(x0, x1, h) - ramp0_divdiff(x1, x2, h)) / (x0 - x2)
    } else if gap01.max(gap02).max(gap12) <= tol {
        // All nodes coincide: f''(c)/2 + f⁗(c)·Σ(xi−c)²/48.
        let c = (x0 + x1 + x2) / 3.0;
        let ss = (x0 - c).powi(2) + (x1 - c).powi(2) + (x2 - c).powi(2);
        0.5 * ramp(2, c, h) + ramp(4, c, h) * ss / 48.0
    } else {
        // Exactly one tight pair: rotate it into the (x1, x2) slots so the
        // outer division is by a wide gap.
        let (a, b, c) = if gap01 <= tol {
            (x2, x0, x1)
        } else if gap02 <= tol {
            (x1, x0, x2)
        } else {
            (x0, x1, x2)
        };
        (ramp0_divdiff(a, b, h) - ramp0_divdiff(b, c, h)) / (a - c)
    }
}

/// Composite Simpson weights applied to pre-sampled values on a uniform grid
/// with an even number of intervals.
pub fn simpson_uniform(values: &[f64], h: f64) -> f64 {
    let n = values.len() - 1;
    assert!(
        n >= 2 && n.is_multiple_of(2),
        "Simpson needs an even interval count"
    );
    let mut sum = values[0] + values[n];
    for (i, v) in values.iter().enumerate().take(n).skip(1) {
        sum += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    sum * h / 3.0
}

/// Least-squares slope and intercept of y against x.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// FNV-1a 64-bit hash, used to stamp outputs with a config fingerprint.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}
