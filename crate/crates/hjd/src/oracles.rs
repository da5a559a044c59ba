//! Brute-force reference computations.
//!
//! These are deliberately independent of the closed-form solver paths they
//! are used to check: dense matrix products instead of localized updates,
//! exhaustive grids instead of eigenvector recoveries, power iteration
//! instead of Jacobi. The acceptance suite and `hjd oracle` both run them.

use ndarray::Array2;
use num_complex::Complex64;

use crate::kernels::CMat;
use crate::rotations::Block;

/// Principal eigenvector of a symmetric 3×3 by plain power iteration.
pub fn power_iteration3(a: &[[f64; 3]; 3], steps: usize) -> [f64; 3] {
    let mut v = [1.0, 0.7, 0.41];
    for _ in 0..steps {
        let w = [
            a[0][0] * v[0] + a[0][1] * v[1] + a[0][2] * v[2],
            a[1][0] * v[0] + a[1][1] * v[1] + a[1][2] * v[2],
            a[2][0] * v[0] + a[2][1] * v[1] + a[2][2] * v[2],
        ];
        let n = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
        if n == 0.0 {
            break;
        }
        v = [w[0] / n, w[1] / n, w[2] / n];
    }
    v
}

/// Principal eigenvector of a symmetric 2×2 by power iteration.
pub fn power_iteration2(a: &[[f64; 2]; 2], steps: usize) -> [f64; 2] {
    let mut v = [1.0, 0.7];
    for _ in 0..steps {
        let w = [
            a[0][0] * v[0] + a[0][1] * v[1],
            a[1][0] * v[0] + a[1][1] * v[1],
        ];
        let n = (w[0] * w[0] + w[1] * w[1]).sqrt();
        if n == 0.0 {
            break;
        }
        v = [w[0] / n, w[1] / n];
    }
    v
}

/// Full dense congruence RᴴMR (or RᴴMR* when `conjugate_right`), with R
/// the identity outside the (p, q) block.
pub fn dense_congruence(m: &CMat, block: &Block, p: usize, q: usize, conjugate_right: bool) -> CMat {
    let n = m.nrows();
    let mut r: CMat = Array2::eye(n);
    r[[p, p]] = block.r11;
    r[[p, q]] = block.r12;
    r[[q, p]] = block.r21;
    r[[q, q]] = block.r22;
    let rh = r.t().map(|z| z.conj());
    if conjugate_right {
        rh.dot(m).dot(&r.map(|z| z.conj()))
    } else {
        rh.dot(m).dot(&r)
    }
}

/// 2×2 matrix as a flat row-major block.
pub type Block2 = [Complex64; 4];

pub fn block2_of(m: &CMat, p: usize, q: usize) -> Block2 {
    [m[[p, p]], m[[p, q]], m[[q, p]], m[[q, q]]]
}

fn congruence2(m: &Block2, r: &Block2, conjugate_right: bool) -> Block2 {
    let rr: Block2 = if conjugate_right {
        [r[0].conj(), r[1].conj(), r[2].conj(), r[3].conj()]
    } else {
        *r
    };
    // t = M · Rr
    let t = [
        m[0] * rr[0] + m[1] * rr[2],
        m[0] * rr[1] + m[1] * rr[3],
        m[2] * rr[0] + m[3] * rr[2],
        m[2] * rr[1] + m[3] * rr[3],
    ];
    // Rᴴ · t
    [
        r[0].conj() * t[0] + r[2].conj() * t[2],
        r[0].conj() * t[1] + r[2].conj() * t[3],
        r[1].conj() * t[0] + r[3].conj() * t[2],
        r[1].conj() * t[1] + r[3].conj() * t[3],
    ]
}

fn givens2(theta: f64, alpha: f64) -> Block2 {
    let (c, s) = (theta.cos(), theta.sin());
    [
        Complex64::new(c, 0.0),
        -s * Complex64::from_polar(1.0, -alpha),
        s * Complex64::from_polar(1.0, alpha),
        Complex64::new(c, 0.0),
    ]
}

fn combined2(theta: f64, alpha: f64, y: f64, phi: f64) -> Block2 {
    let g = givens2(theta, alpha);
    let (ch, sh) = (y.cosh(), y.sinh());
    let h = [
        Complex64::new(ch, 0.0),
        sh * Complex64::from_polar(1.0, -phi),
        sh * Complex64::from_polar(1.0, phi),
        Complex64::new(ch, 0.0),
    ];
    [
        g[0] * h[0] + g[1] * h[2],
        g[0] * h[1] + g[1] * h[3],
        g[2] * h[0] + g[3] * h[2],
        g[2] * h[1] + g[3] * h[3],
    ]
}

/// Local Givens cost: off-energy of the transformed 2×2 blocks,
/// Σ off(GᴴMG) + Σ off(GᴴNG*).
pub fn givens_local_cost(
    m_blocks: &[Block2],
    n_blocks: &[Block2],
    theta: f64,
    alpha: f64,
) -> f64 {
    let g = givens2(theta, alpha);
    let mut s = 0.0;
    for m in m_blocks {
        let t = congruence2(m, &g, false);
        s += t[1].norm_sqr() + t[2].norm_sqr();
    }
    for n in n_blocks {
        let t = congruence2(n, &g, true);
        s += t[1].norm_sqr() + t[2].norm_sqr();
    }
    s
}

/// Local combined-rotation cost of CJDi type: Σ |[RᴴM̃R]_pq|² + Σ |[RᴴNR*]_pq|²,
/// with R = R(θ, α₀, y, α₀) and α₀ ∈ {0, π/2}.
pub fn combined_local_cost(
    mt_blocks: &[Block2],
    n_blocks: &[Block2],
    theta: f64,
    y: f64,
    axis: f64,
) -> f64 {
    let r = combined2(theta, axis, y, axis);
    let mut s = 0.0;
    for m in mt_blocks {
        let t = congruence2(m, &r, false);
        s += t[1].norm_sqr();
    }
    for n in n_blocks {
        let t = congruence2(n, &r, true);
        s += t[1].norm_sqr();
    }
    s
}

#[derive(Debug, Clone, Copy)]
pub struct GridMin {
    pub value: f64,
    pub x: f64,
    pub y: f64,
}

/// Exhaustive minimization of the local Givens cost over a
/// θ ∈ [−π/4, π/4] × α ∈ [0, 2π) grid.
pub fn grid_search_givens(
    m_blocks: &[Block2],
    n_blocks: &[Block2],
    n_theta: usize,
    n_alpha: usize,
) -> GridMin {
    let mut best = GridMin {
        value: f64::INFINITY,
        x: 0.0,
        y: 0.0,
    };
    let alphas: Vec<f64> = (0..n_alpha)
        .map(|ia| 2.0 * std::f64::consts::PI * (ia as f64) / (n_alpha as f64))
        .collect();
    let phases: Vec<Complex64> = alphas
        .iter()
        .map(|&a| Complex64::from_polar(1.0, a))
        .collect();
    for it in 0..n_theta {
        let theta = -std::f64::consts::FRAC_PI_4
            + std::f64::consts::FRAC_PI_2 * (it as f64) / (n_theta as f64 - 1.0);
        let (s, c) = theta.sin_cos();
        for (ia, ph) in phases.iter().enumerate() {
            let g = [
                Complex64::new(c, 0.0),
                -s * ph.conj(),
                s * ph,
                Complex64::new(c, 0.0),
            ];
            let mut v = 0.0;
            for m in m_blocks {
                let t = congruence2(m, &g, false);
                v += t[1].norm_sqr() + t[2].norm_sqr();
            }
            for n in n_blocks {
                let t = congruence2(n, &g, true);
                v += t[1].norm_sqr() + t[2].norm_sqr();
            }
            if v < best.value {
                best = GridMin {
                    value: v,
                    x: theta,
                    y: alphas[ia],
                };
            }
        }
    }
    best
}

/// Exhaustive minimization of the real-Givens (α = 0) local cost over θ.
pub fn grid_search_real_givens(m_blocks: &[Block2], n_blocks: &[Block2], n_theta: usize) -> GridMin {
    let mut best = GridMin {
        value: f64::INFINITY,
        x: 0.0,
        y: 0.0,
    };
    for it in 0..n_theta {
        let theta = -std::f64::consts::FRAC_PI_4
            + std::f64::consts::FRAC_PI_2 * (it as f64) / (n_theta as f64 - 1.0);
        let v = givens_local_cost(m_blocks, n_blocks, theta, 0.0);
        if v < best.value {
            best = GridMin {
                value: v,
                x: theta,
                y: 0.0,
            };
        }
    }
    best
}

/// Exhaustive minimization of the combined-rotation local cost over a
/// θ ∈ [−π/4, π/4] × y ∈ [−y_max, y_max] grid, for axis α = φ ∈ {0, π/2}.
pub fn grid_search_combined(
    mt_blocks: &[Block2],
    n_blocks: &[Block2],
    n_theta: usize,
    n_y: usize,
    y_max: f64,
    axis: f64,
) -> GridMin {
    let mut best = GridMin {
        value: f64::INFINITY,
        x: 0.0,
        y: 0.0,
    };
    let ys: Vec<f64> = (0..n_y)
        .map(|iy| -y_max + 2.0 * y_max * (iy as f64) / (n_y as f64 - 1.0))
        .collect();
    let hyp: Vec<(f64, f64)> = ys.iter().map(|&yv| (yv.cosh(), yv.sinh())).collect();
    let axis_ph = Complex64::from_polar(1.0, axis);
    for it in 0..n_theta {
        let theta = -std::f64::consts::FRAC_PI_4
            + std::f64::consts::FRAC_PI_2 * (it as f64) / (n_theta as f64 - 1.0);
        let (s, c) = theta.sin_cos();
        let g = [
            Complex64::new(c, 0.0),
            -s * axis_ph.conj(),
            s * axis_ph,
            Complex64::new(c, 0.0),
        ];
        for (iy, &(ch, sh)) in hyp.iter().enumerate() {
            let h = [
                Complex64::new(ch, 0.0),
                sh * axis_ph.conj(),
                sh * axis_ph,
                Complex64::new(ch, 0.0),
            ];
            let r = [
                g[0] * h[0] + g[1] * h[2],
                g[0] * h[1] + g[1] * h[3],
                g[2] * h[0] + g[3] * h[2],
                g[2] * h[1] + g[3] * h[3],
            ];
            let mut v = 0.0;
            for m in mt_blocks {
                let t = congruence2(m, &r, false);
                v += t[1].norm_sqr();
            }
            for n in n_blocks {
                let t = congruence2(n, &r, true);
                v += t[1].norm_sqr();
            }
            if v < best.value {
                best = GridMin {
                    value: v,
                    x: theta,
                    y: ys[iy],
                };
            }
        }
    }
    best
}

/// Median of a sample (average of the middle pair for even lengths).
pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
