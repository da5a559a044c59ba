//! H-CJDi: non-orthogonal hybrid JD by alternating real-axis
//! R⁽⁰⁾ = R(θ,0,y,0) and imaginary-axis R^(π/2) = R(θ′,π/2,y′,π/2) combined
//! Givens+hyperbolic rotations on hermitianized targets.

use ndarray::Array2;
use num_complex::Complex64;

use crate::kernels::{frob, jpencil_selected_eigvec, CMat, RealSym3};
use crate::metrics::{off_energy, performance_index};
use crate::rotations::{accumulate, apply_hermitian_congruence, apply_transpose_congruence,
    combined_block, Block, RotationParams};
use crate::orthogonal::{Diagnostics, SweepConfig, SweepRecord};
use crate::{tol, HjdError, Result};

/// 2K₁ Hermitian matrices M̃ plus K₂ symmetric N, ready for the combined-rotation sweep.
#[derive(Debug, Clone)]
pub struct HermitianizedSets {
    pub mtilde: Vec<CMat>,
    pub n: Vec<CMat>,
    pub dim: usize,
}

impl HermitianizedSets {
    pub fn new(m: &[CMat], n: &[CMat]) -> Result<Self> {
        let dim = m
            .first()
            .or_else(|| n.first())
            .map(|x| x.nrows())
            .ok_or_else(|| HjdError::InvalidConfig("K1 + K2 must be at least 1".into()))?;
        for x in m.iter().chain(n.iter()) {
            if x.nrows() != dim || x.ncols() != dim {
                return Err(HjdError::DimensionMismatch(format!(
                    "expected {dim}x{dim}, got {}x{}",
                    x.nrows(),
                    x.ncols()
                )));
            }
        }
        Ok(HermitianizedSets {
            mtilde: hermitianize(m),
            n: symmetrize(n),
            dim,
        })
    }

    pub fn current_cost(&self) -> f64 {
        self.mtilde
            .iter()
            .chain(self.n.iter())
            .map(off_energy)
            .sum()
    }

    pub fn total_energy(&self) -> f64 {
        self.mtilde
            .iter()
            .chain(self.n.iter())
            .map(|x| frob(x).powi(2))
            .sum()
    }
}

/// M̃_{2k−1} = (M_k + M_kᴴ)/2, M̃_{2k} = (M_k − M_kᴴ)/(2j); the originals are
/// recovered as M_k = M̃_{2k−1} + j·M̃_{2k}.
pub fn hermitianize(m: &[CMat]) -> Vec<CMat> {
    let j = Complex64::new(0.0, 1.0);
    let mut out = Vec::with_capacity(2 * m.len());
    for mk in m {
        let dim = mk.nrows();
        out.push(Array2::from_shape_fn((dim, dim), |(r, c)| {
            (mk[[r, c]] + mk[[c, r]].conj()) * 0.5
        }));
        out.push(Array2::from_shape_fn((dim, dim), |(r, c)| {
            (mk[[r, c]] - mk[[c, r]].conj()) * 0.5 / j
        }));
    }
    out
}

/// N_k ← (N_k + N_kᵀ)/2, the Frobenius-closest symmetric matrix.
pub fn symmetrize(n: &[CMat]) -> Vec<CMat> {
    n.iter()
        .map(|nk| {
            let dim = nk.nrows();
            Array2::from_shape_fn((dim, dim), |(r, c)| (nk[[r, c]] + nk[[c, r]]) * 0.5)
        })
        .collect()
}

/// e₃,k = ½[M̃_pp + M̃_qq, M̃_pp − M̃_qq, 2Re(M̃_pq)] (½ dropped when unscaled).
pub fn build_e3(mtilde: &[CMat], p: usize, q: usize, scaled: bool) -> Vec<[Complex64; 3]> {
    let s = if scaled { 0.5 } else { 1.0 };
    mtilde
        .iter()
        .map(|mk| {
            [
                s * (mk[[p, p]] + mk[[q, q]]),
                s * (mk[[p, p]] - mk[[q, q]]),
                s * Complex64::new(2.0 * mk[[p, q]].re, 0.0),
            ]
        })
        .collect()
}

/// e₄,k = ½[N_pp + N_qq, N_pp − N_qq, 2N_pq].
pub fn build_e4(n: &[CMat], p: usize, q: usize, scaled: bool) -> Vec<[Complex64; 3]> {
    let s = if scaled { 0.5 } else { 1.0 };
    n.iter()
        .map(|nk| {
            [
                s * (nk[[p, p]] + nk[[q, q]]),
                s * (nk[[p, p]] - nk[[q, q]]),
                s * 2.0 * nk[[p, q]],
            ]
        })
        .collect()
}

/// e₅,k = (j/2)[−(M̃_pp + M̃_qq), M̃_qq − M̃_pp, 2Im(M̃_pq)], so that
/// M̃″_pq = e₅ᵀw′ + Re(M̃_pq) holds identically (direct expansion of the
/// R^(π/2) congruence; checked against the apply-and-measure oracle).
pub fn build_e5(mtilde: &[CMat], p: usize, q: usize, scaled: bool) -> Vec<[Complex64; 3]> {
    let js = Complex64::new(0.0, if scaled { 0.5 } else { 1.0 });
    mtilde
        .iter()
        .map(|mk| {
            [
                -js * (mk[[p, p]] + mk[[q, q]]),
                js * (mk[[q, q]] - mk[[p, p]]),
                js * Complex64::new(2.0 * mk[[p, q]].im, 0.0),
            ]
        })
        .collect()
}

/// e₆,k = (j/2)[N_pp − N_qq, N_pp + N_qq, −2jN_pq].
pub fn build_e6(n: &[CMat], p: usize, q: usize, scaled: bool) -> Vec<[Complex64; 3]> {
    let j = Complex64::new(0.0, 1.0);
    let js = Complex64::new(0.0, if scaled { 0.5 } else { 1.0 });
    n.iter()
        .map(|nk| {
            [
                js * (nk[[p, p]] - nk[[q, q]]),
                js * (nk[[p, p]] + nk[[q, q]]),
                js * (-2.0 * j * nk[[p, q]]),
            ]
        })
        .collect()
}

fn gram3(rows: &[&[[Complex64; 3]]]) -> RealSym3 {
    let mut g = [[0.0f64; 3]; 3];
    for block in rows {
        for r in *block {
            for i in 0..3 {
                for j in i..3 {
                    g[i][j] += (r[i].conj() * r[j]).re;
                }
            }
        }
    }
    RealSym3 {
        a11: g[0][0],
        a12: g[0][1],
        a13: g[0][2],
        a22: g[1][1],
        a23: g[1][2],
        a33: g[2][2],
    }
}

/// Recovery of (θ, y) from the pencil eigenvector
/// w = [sinh 2y, −sin 2θ cosh 2y, cos 2θ cosh 2y].
fn recover_theta_y(w: [f64; 3]) -> (f64, f64) {
    let ch2 = (1.0 + w[0] * w[0]).sqrt();
    let c = std::f64::consts::FRAC_1_SQRT_2 * (1.0 + w[2] / ch2).sqrt();
    let s = -w[1] / (2.0 * c * ch2);
    let chy = std::f64::consts::FRAC_1_SQRT_2 * (1.0 + ch2).sqrt();
    let shy = w[0] / (2.0 * chy);
    let theta = s.atan2(c);
    let y = shy.asinh().clamp(-tol::Y_CLAMP, tol::Y_CLAMP);
    (theta, y)
}

/// Real-axis rotation R⁽⁰⁾ for the pair (p, q); identity when the pencil is
/// degenerate (caller skips the pair).
pub fn solve_r0(sets: &HermitianizedSets, p: usize, q: usize, config: &SweepConfig) -> RotationParams {
    let e3 = build_e3(&sets.mtilde, p, q, config.e_half_scale);
    let e4 = build_e4(&sets.n, p, q, config.e_half_scale);
    let Ok(w) = jpencil_selected_eigvec(gram3(&[&e3, &e4])) else {
        return RotationParams::identity(p, q);
    };
    let (theta, y) = recover_theta_y(w);
    RotationParams {
        p,
        q,
        theta,
        alpha: 0.0,
        y,
        phi: 0.0,
    }
}

/// Imaginary-axis rotation R^(π/2) for the pair (p, q).
pub fn solve_rpi2(sets: &HermitianizedSets, p: usize, q: usize, config: &SweepConfig) -> RotationParams {
    let e5 = build_e5(&sets.mtilde, p, q, config.e_half_scale);
    let e6 = build_e6(&sets.n, p, q, config.e_half_scale);
    let Ok(w) = jpencil_selected_eigvec(gram3(&[&e5, &e6])) else {
        return RotationParams::identity(p, q);
    };
    let (theta, y) = recover_theta_y(w);
    RotationParams {
        p,
        q,
        theta,
        alpha: std::f64::consts::FRAC_PI_2,
        y,
        phi: std::f64::consts::FRAC_PI_2,
    }
}

/// Halvings of the shear parameter y tried before falling back to the pure
/// Givens part when a rotation would increase the joint off-cost.
const SHEAR_DAMPING_STEPS: usize = 4;

/// Exact change of the joint off-cost that a congruence with `block` at
/// (p, q) would cause. Only rows/columns p and q are touched: the (p, q)
/// block transforms by the full 2×2 congruence, and for every other index l
/// the row pair [X_pl, X_ql] transforms by the left factor alone (the
/// symmetric/Hermitian counterpart entries mirror it, hence the factor 2).
fn rotation_cost_delta(sets: &HermitianizedSets, block: &Block, p: usize, q: usize) -> f64 {
    let pair_delta = |x: &CMat, conjugate_right: bool| -> f64 {
        let (rr11, rr12, rr21, rr22) = if conjugate_right {
            (block.r11.conj(), block.r12.conj(), block.r21.conj(), block.r22.conj())
        } else {
            (block.r11, block.r12, block.r21, block.r22)
        };
        let mut d = 0.0;
        for l in 0..x.nrows() {
            if l == p || l == q {
                continue;
            }
            let (u1, u2) = (x[[p, l]], x[[q, l]]);
            let n1 = block.r11.conj() * u1 + block.r21.conj() * u2;
            let n2 = block.r12.conj() * u1 + block.r22.conj() * u2;
            d += 2.0 * (n1.norm_sqr() + n2.norm_sqr() - u1.norm_sqr() - u2.norm_sqr());
        }
        // (p, q) / (q, p) entries after RᴴXR (or RᴴXR*)
        let t1 = x[[p, p]] * rr12 + x[[p, q]] * rr22;
        let t2 = x[[q, p]] * rr12 + x[[q, q]] * rr22;
        let s1 = x[[p, p]] * rr11 + x[[p, q]] * rr21;
        let s2 = x[[q, p]] * rr11 + x[[q, q]] * rr21;
        let npq = block.r11.conj() * t1 + block.r21.conj() * t2;
        let nqp = block.r12.conj() * s1 + block.r22.conj() * s2;
        d + npq.norm_sqr() + nqp.norm_sqr() - x[[p, q]].norm_sqr() - x[[q, p]].norm_sqr()
    };
    sets.mtilde.iter().map(|mk| pair_delta(mk, false)).sum::<f64>()
        + sets.n.iter().map(|nk| pair_delta(nk, true)).sum::<f64>()
}

fn apply_rotation(sets: &mut HermitianizedSets, v: &mut CMat, params: &RotationParams) {
    if params.is_identity() {
        return;
    }
    let block = combined_block(params);
    for mk in sets.mtilde.iter_mut() {
        apply_hermitian_congruence(mk, &block, params.p, params.q);
    }
    for nk in sets.n.iter_mut() {
        apply_transpose_congruence(nk, &block, params.p, params.q);
    }
    accumulate(v, &block, params.p, params.q);
}

/// H-CJDi on raw sets; hermitianization and symmetrization are
/// applied internally. Returns the (generally non-unitary) diagonalizer V.
pub fn h_cjdi(
    m: &[CMat],
    n: &[CMat],
    config: &SweepConfig,
    ground_truth: Option<&CMat>,
) -> Result<(CMat, Diagnostics)> {
    let mut sets = HermitianizedSets::new(m, n)?;
    let dim = sets.dim;
    let mut v: CMat = Array2::eye(dim);
    let mut diag = Diagnostics::default();
    for sweep in 1..=config.max_sweeps {
        let mut max_sin = 0.0f64;
        let mut max_sinh = 0.0f64;
        for p in 0..dim.saturating_sub(1) {
            for q in (p + 1)..dim {
                for mut params in [solve_r0(&sets, p, q, config), solve_rpi2(&sets, p, q, config)] {
                    // The closed form minimizes the (p, q) energy, but a
                    // strong shear can inflate the rest of rows p and q and
                    // raise the joint off-cost. Damp the shear (finally
                    // dropping to the pure Givens part) until the exact cost
                    // change is non-positive, so the sweep cost is
                    // non-increasing; skip the pair if no damping helps.
                    for attempt in 0..=SHEAR_DAMPING_STEPS {
                        if params.is_identity() {
                            break;
                        }
                        let block = combined_block(&params);
                        if rotation_cost_delta(&sets, &block, p, q) <= 0.0 {
                            max_sin = max_sin.max(params.theta.sin().abs());
                            max_sinh = max_sinh.max(params.y.sinh().abs());
                            apply_rotation(&mut sets, &mut v, &params);
                            break;
                        }
                        params.y = if attempt + 1 == SHEAR_DAMPING_STEPS {
                            0.0
                        } else {
                            params.y * 0.5
                        };
                    }
                }
            }
        }
        let vnorm = frob(&v);
        if vnorm > tol::V_DIVERGENCE {
            return Err(HjdError::Diverged(vnorm));
        }
        let pi = ground_truth.and_then(|a| {
            let vh = v.t().map(|z| z.conj());
            performance_index(&vh.dot(a)).ok()
        });
        diag.records.push(SweepRecord {
            sweep,
            cost: sets.current_cost(),
            max_sin,
            max_sinh,
            pi,
        });
        if max_sin.max(max_sinh) <= config.tau {
            diag.converged = true;
            break;
        }
    }
    Ok((v, diag))
}
