//! Matrix realizations and exponential charts of SL(2,R) and SO(3).
//!
//! Algebra coordinates: `(e, h, f) ↦ [[h, e], [f, -h]]` for sl(2,R) and
//! `(x, y, z) ↦` the skew matrix of the cross product for so(3).

use crate::scalar::Matrix;

pub fn sl2_hat(v: &[f64]) -> Matrix<f64> {
    Matrix::from_rows(vec![vec![v[1], v[0]], vec![v[2], -v[1]]])
}

pub fn sl2_vee(m: &Matrix<f64>) -> Vec<f64> {
    vec![m[(0, 1)], (m[(0, 0)] - m[(1, 1)]) / 2.0, m[(1, 0)]]
}

pub fn so3_hat(v: &[f64]) -> Matrix<f64> {
    Matrix::from_rows(vec![
        vec![0.0, -v[2], v[1]],
        vec![v[2], 0.0, -v[0]],
        vec![-v[1], v[0], 0.0],
    ])
}

pub fn so3_vee(m: &Matrix<f64>) -> Vec<f64> {
    vec![
        (m[(2, 1)] - m[(1, 2)]) / 2.0,
        (m[(0, 2)] - m[(2, 0)]) / 2.0,
        (m[(1, 0)] - m[(0, 1)]) / 2.0,
    ]
}

/// `Σ δ^k / (2k)!` and `Σ δ^k / (2k+1)!`, i.e. `cosh √δ` and `sinh √δ / √δ`
/// continued to all real `δ`.
fn even_odd(delta: f64) -> (f64, f64) {
    if delta.abs() < 1e-3 {
        let mut c = 0.0;
        let mut s = 0.0;
        let mut term = 1.0;
        for k in 0..8 {
            c += term / fact(2 * k);
            s += term / fact(2 * k + 1);
            term *= delta;
        }
        (c, s)
    } else if delta > 0.0 {
        let r = delta.sqrt();
        (r.cosh(), r.sinh() / r)
    } else {
        let r = (-delta).sqrt();
        (r.cos(), r.sin() / r)
    }
}

fn fact(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

pub fn sl2_exp(v: &[f64]) -> Matrix<f64> {
    // X² = δ I for traceless 2×2 X
    let delta = v[1] * v[1] + v[0] * v[2];
    let (c, s) = even_odd(delta);
    Matrix::identity(2).scale(&c).add(&sl2_hat(v).scale(&s))
}

/// Principal logarithm of an element with trace above -2. Callers enforce
/// the tighter chart domain.
pub fn sl2_log(g: &Matrix<f64>) -> Vec<f64> {
    let half_trace = (g[(0, 0)] + g[(1, 1)]) / 2.0;
    let u = half_trace - 1.0;
    // X = s / sinh(s) (g - cosh(s) I) with cosh(s) = tr/2, continued to tr < 2
    let factor = if u.abs() < 1e-6 {
        // s² ≈ 2u + u²/... ; s/sinh s = 1 - s²/6 + 7 s⁴/360
        let s2 = 2.0 * u - u * u / 3.0;
        1.0 - s2 / 6.0 + 7.0 * s2 * s2 / 360.0
    } else if u > 0.0 {
        let s = half_trace.acosh();
        s / s.sinh()
    } else {
        let s = half_trace.clamp(-1.0, 1.0).acos();
        s / s.sin()
    };
    let traceless = g.sub(&Matrix::identity(2).scale(&half_trace));
    sl2_vee(&traceless).into_iter().map(|x| x * factor).collect()
}

/// Jacobian density `|det((1 - e^{-ad X}) / ad X)|` of the exponential
/// chart of SL(2,R) with respect to Haar measure: `(sinh s / s)²` with
/// `s² = h² + ef`, continued through `δ < 0`.
pub fn sl2_chart_density(v: &[f64]) -> f64 {
    let (_, s) = even_odd(v[1] * v[1] + v[0] * v[2]);
    s * s
}

pub fn so3_exp(v: &[f64]) -> Matrix<f64> {
    let theta2 = v.iter().map(|x| x * x).sum::<f64>();
    let (a, b) = if theta2 < 1e-8 {
        (
            1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0,
            0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0,
        )
    } else {
        let t = theta2.sqrt();
        (t.sin() / t, (1.0 - t.cos()) / theta2)
    };
    let k = so3_hat(v);
    Matrix::identity(3).add(&k.scale(&a)).add(&k.mul(&k).scale(&b))
}

/// Rotation angle in `[0, π]`.
pub fn so3_angle(r: &Matrix<f64>) -> f64 {
    let w = so3_vee(r);
    let sin = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    let cos = (r[(0, 0)] + r[(1, 1)] + r[(2, 2)] - 1.0) / 2.0;
    sin.atan2(cos)
}

/// Logarithm of a rotation by an angle below π.
pub fn so3_log(r: &Matrix<f64>) -> Vec<f64> {
    let theta = so3_angle(r);
    let w = so3_vee(r);
    let factor = if theta < 1e-6 {
        1.0 + theta * theta / 6.0
    } else {
        theta / theta.sin()
    };
    w.into_iter().map(|x| x * factor).collect()
}

/// Largest singular value.
pub fn op_norm(m: &Matrix<f64>) -> f64 {
    m.to_nalgebra().singular_values().iter().copied().fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn so3_rodrigues_round_trip() {
        let r = so3_exp(&[0.3, 0.0, 0.0]);
        assert!((r[(1, 1)] - 0.3f64.cos()).abs() < 1e-15);
        assert!((r[(2, 1)] - 0.3f64.sin()).abs() < 1e-15);
        let v = so3_log(&r);
        assert!((v[0] - 0.3).abs() < 1e-12 && v[1].abs() < 1e-15 && v[2].abs() < 1e-15);
        assert!((so3_angle(&r) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn sl2_exp_matches_series() {
        for v in [[0.3, -0.2, 0.5], [0.0, 0.4, 0.0], [0.2, 0.0, -0.7], [1e-5, 2e-5, 3e-5]] {
            let x = sl2_hat(&v);
            let mut term = Matrix::identity(2);
            let mut sum = Matrix::identity(2);
            for k in 1..30 {
                term = term.mul(&x).scale(&(1.0 / k as f64));
                sum = sum.add(&term);
            }
            assert!(sl2_exp(&v).max_abs_diff(&sum) < 1e-14);
            let back = sl2_log(&sl2_exp(&v));
            for (a, b) in back.iter().zip(&v) {
                assert!((a - b).abs() < 1e-10, "{back:?} vs {v:?}");
            }
        }
    }

    #[test]
    fn sl2_density_matches_series_determinant() {
        use nalgebra::Matrix3;
        for v in [[0.3, -0.2, 0.5], [0.1, 0.4, -0.9], [0.05, 0.0, 0.02]] {
            // ad X on (E, H, F)
            let (e, h, f) = (v[0], v[1], v[2]);
            let ad: Matrix3<f64> = Matrix3::new(
                2.0 * h,
                -2.0 * e,
                0.0, //
                -f,
                0.0,
                e, //
                0.0,
                2.0 * f,
                -2.0 * h,
            );
            let mut term: Matrix3<f64> = Matrix3::identity();
            let mut sum: Matrix3<f64> = Matrix3::identity();
            for k in 1..40 {
                term = term * (-ad) / (k as f64 + 1.0);
                sum += term;
            }
            assert!((sum.determinant().abs() - sl2_chart_density(&v)).abs() < 1e-12);
        }
    }
}
