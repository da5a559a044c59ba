//! Orthogonal hybrid joint diagonalization: CO-HJD (complex Givens sweeps)
//! and RO-HJD (Takagi-based realification followed by real Givens sweeps).

use ndarray::Array2;
use num_complex::Complex64;

use crate::kernels::{
    cmat_is_finite, frob, left_singular_vectors, sym2_principal_eigvec, sym3_principal_eigvec,
    takagi, CMat, RealSym2, RealSym3,
};
use crate::metrics::{off_energy, performance_index};
use crate::rotations::{accumulate, apply_hermitian_congruence, apply_transpose_congruence,
    givens_matrix_entries, RotationParams};
use crate::{tol, HjdError, Result};

/// The pair of target sequences: {M_k} under Hermitian congruence and
/// {N_k} under transpose congruence.
#[derive(Debug, Clone)]
pub struct TargetSets {
    pub m: Vec<CMat>,
    pub n: Vec<CMat>,
    pub dim: usize,
}

impl TargetSets {
    /// Validates shapes and symmetrizes the N matrices on ingestion.
    pub fn new(m: Vec<CMat>, n: Vec<CMat>) -> Result<Self> {
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
            if !cmat_is_finite(x) {
                return Err(HjdError::NonFinite("TargetSets"));
            }
        }
        let n = n
            .into_iter()
            .map(|nk| {
                let sym = Array2::from_shape_fn((dim, dim), |(i, j)| {
                    (nk[[i, j]] + nk[[j, i]]) * 0.5
                });
                sym
            })
            .collect();
        Ok(TargetSets { m, n, dim })
    }

    pub fn total_energy(&self) -> f64 {
        self.m
            .iter()
            .chain(self.n.iter())
            .map(|x| frob(x).powi(2))
            .sum()
    }

    /// Current joint off-diagonal cost of the (already transformed) sets.
    pub fn current_cost(&self) -> f64 {
        self.m
            .iter()
            .chain(self.n.iter())
            .map(off_energy)
            .sum()
    }
}

/// Sweep loop configuration shared by all solvers.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    /// Stop when the largest rotation magnitude in a sweep drops to τ.
    pub tau: f64,
    pub max_sweeps: usize,
    /// Apply a ½ factor to e₂ (CO-HJD). The default `false` (unscaled e₂)
    /// weights every matrix equally in the joint criterion: per pair,
    /// off(M″) = c − ½|e₁ᵀv|² and off(N″) = ½|e₂ᵀv|², so the unscaled Gram
    /// difference Re(E₁ᴴE₁ − E₂ᴴE₂) is exactly the equal-weight objective.
    /// `true` down-weights the N targets by ¼, kept for A/B comparison.
    pub e2_half_weight: bool,
    /// Use the ½ and j/2 factors on e₃..e₆ (H-CJDi); a uniform scale that
    /// cancels inside the pencil, kept as a switch for A/B parity.
    pub e_half_scale: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            tau: tol::SWEEP_TAU,
            max_sweeps: 100,
            e2_half_weight: false,
            e_half_scale: true,
        }
    }
}

/// One per-sweep trace record.
#[derive(Debug, Clone, Copy)]
pub struct SweepRecord {
    pub sweep: usize,
    /// Joint off-diagonal cost of the transformed sets after the sweep.
    pub cost: f64,
    pub max_sin: f64,
    pub max_sinh: f64,
    pub pi: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct Diagnostics {
    pub records: Vec<SweepRecord>,
    pub converged: bool,
}

impl Diagnostics {
    pub fn final_pi(&self) -> Option<f64> {
        self.records.last().and_then(|r| r.pi)
    }
    pub fn sweeps(&self) -> usize {
        self.records.len()
    }
}

/// Row k: [M_{k,pp} − M_{k,qq}, −(M_{k,pq} + M_{k,qp}), j(M_{k,qp} − M_{k,pq})].
pub fn build_e1(m: &[CMat], p: usize, q: usize) -> Vec<[Complex64; 3]> {
    let j = Complex64::new(0.0, 1.0);
    m.iter()
        .map(|mk| {
            [
                mk[[p, p]] - mk[[q, q]],
                -(mk[[p, q]] + mk[[q, p]]),
                j * (mk[[q, p]] - mk[[p, q]]),
            ]
        })
        .collect()
}

/// Row k: ½[2N_{k,pq}, N_{k,pp} − N_{k,qq}, j(N_{k,pp} + N_{k,qq})] with the
/// optional ½ factor (dropped when `half` is false).
pub fn build_e2(n: &[CMat], p: usize, q: usize, half: bool) -> Vec<[Complex64; 3]> {
    let j = Complex64::new(0.0, 1.0);
    let scale = if half { 0.5 } else { 1.0 };
    n.iter()
        .map(|nk| {
            [
                scale * 2.0 * nk[[p, q]],
                scale * (nk[[p, p]] - nk[[q, q]]),
                scale * j * (nk[[p, p]] + nk[[q, q]]),
            ]
        })
        .collect()
}

/// Re(EᴴE) of a stack of length-3 complex rows, accumulated into `out` with
/// the given sign.
fn accumulate_gram3(rows: &[[Complex64; 3]], sign: f64, out: &mut [[f64; 3]; 3]) {
    for r in rows {
        for i in 0..3 {
            for j in i..3 {
                let v = (r[i].conj() * r[j]).re * sign;
                out[i][j] += v;
                if i != j {
                    out[j][i] += v;
                }
            }
        }
    }
}

fn gram3_to_sym(g: &[[f64; 3]; 3]) -> RealSym3 {
    RealSym3 {
        a11: g[0][0],
        a12: g[0][1],
        a13: g[0][2],
        a22: g[1][1],
        a23: g[1][2],
        a33: g[2][2],
    }
}

/// Canonicalize so that sin θ may be signed but α ∈ (−π/2, π/2]; the 2×2
/// block is unchanged (G(−θ, α) = G(θ, α ± π)).
fn canonical_theta_alpha(g_pp: f64, g_qp: Complex64) -> (f64, f64) {
    let mut theta = g_qp.norm().atan2(g_pp);
    let mut alpha = if g_qp.norm() > 0.0 { g_qp.arg() } else { 0.0 };
    if alpha > std::f64::consts::FRAC_PI_2 {
        alpha -= std::f64::consts::PI;
        theta = -theta;
    } else if alpha <= -std::f64::consts::FRAC_PI_2 {
        alpha += std::f64::consts::PI;
        theta = -theta;
    }
    (theta, alpha)
}

/// Closed-form optimal complex Givens rotation for the pair (p, q).
pub fn co_hjd_rotation(sets: &TargetSets, p: usize, q: usize, config: &SweepConfig) -> RotationParams {
    let e1 = build_e1(&sets.m, p, q);
    let e2 = build_e2(&sets.n, p, q, config.e2_half_weight);
    let mut g = [[0.0f64; 3]; 3];
    accumulate_gram3(&e1, 1.0, &mut g);
    accumulate_gram3(&e2, -1.0, &mut g);
    let Ok(mut v) = sym3_principal_eigvec(gram3_to_sym(&g)) else {
        return RotationParams::identity(p, q);
    };
    if v[0] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
    let g_pp = ((1.0 + v[0]) / 2.0).sqrt();
    let g_qp = -Complex64::new(v[1], v[2]) / (2.0 * g_pp);
    let (theta, alpha) = canonical_theta_alpha(g_pp, g_qp);
    RotationParams {
        p,
        q,
        theta,
        alpha,
        y: 0.0,
        phi: 0.0,
    }
}

/// Real-Givens (α = 0) restriction of the CO-HJD rotation, used by RO-HJD.
pub fn ro_hjd_rotation(sets: &TargetSets, p: usize, q: usize, config: &SweepConfig) -> RotationParams {
    let e1 = build_e1(&sets.m, p, q);
    let e2 = build_e2(&sets.n, p, q, config.e2_half_weight);
    let mut g = [[0.0f64; 3]; 3];
    accumulate_gram3(&e1, 1.0, &mut g);
    accumulate_gram3(&e2, -1.0, &mut g);
    let Ok(mut v) = sym2_principal_eigvec(RealSym2 {
        a11: g[0][0],
        a12: g[0][1],
        a22: g[1][1],
    }) else {
        return RotationParams::identity(p, q);
    };
    if v[0] < 0.0 {
        v[0] = -v[0];
        v[1] = -v[1];
    }
    let c = ((1.0 + v[0]) / 2.0).sqrt();
    let s = -v[1] / (2.0 * c);
    RotationParams {
        p,
        q,
        theta: s.atan2(c),
        alpha: 0.0,
        y: 0.0,
        phi: 0.0,
    }
}

fn run_sweeps(
    sets: &mut TargetSets,
    config: &SweepConfig,
    ground_truth: Option<&CMat>,
    v: &mut CMat,
    rotation: impl Fn(&TargetSets, usize, usize, &SweepConfig) -> RotationParams,
) -> Diagnostics {
    let n = sets.dim;
    let mut diag = Diagnostics::default();
    for sweep in 1..=config.max_sweeps {
        let mut max_sin = 0.0f64;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let params = rotation(sets, p, q, config);
                let block = givens_matrix_entries(&params);
                max_sin = max_sin.max(params.theta.sin().abs());
                if params.is_identity() {
                    continue;
                }
                for mk in sets.m.iter_mut() {
                    apply_hermitian_congruence(mk, &block, p, q);
                }
                for nk in sets.n.iter_mut() {
                    apply_transpose_congruence(nk, &block, p, q);
                }
                accumulate(v, &block, p, q);
            }
        }
        let pi = ground_truth.and_then(|a| {
            let vh = v.t().map(|z| z.conj());
            performance_index(&vh.dot(a)).ok()
        });
        diag.records.push(SweepRecord {
            sweep,
            cost: sets.current_cost(),
            max_sin,
            max_sinh: 0.0,
            pi,
        });
        if max_sin <= config.tau {
            diag.converged = true;
            break;
        }
    }
    diag
}

/// Complex Orthogonal HJD: cyclic complex Givens sweeps minimizing the joint
/// off-diagonal cost. Mutates the sets in place to VᴴM_kV, VᴴN_kV* and
/// returns the accumulated unitary V.
pub fn co_hjd(
    sets: &mut TargetSets,
    config: &SweepConfig,
    ground_truth: Option<&CMat>,
) -> (CMat, Diagnostics) {
    let mut v: CMat = Array2::eye(sets.dim);
    let diag = run_sweeps(sets, config, ground_truth, &mut v, co_hjd_rotation);
    (v, diag)
}

/// Takagi-based realification: B such that BᴴA is real orthogonal when the
/// sets stem from a unitary A with full-rank N₁.
pub fn ro_transform(n1: &CMat) -> Result<CMat> {
    let (u, sv) = left_singular_vectors(n1)?;
    let smax = sv.first().copied().unwrap_or(0.0);
    let smin = sv.last().copied().unwrap_or(0.0);
    if smax <= 0.0 || smin / smax <= tol::RANK {
        return Err(HjdError::RankDeficient(if smax > 0.0 {
            smin / smax
        } else {
            0.0
        }));
    }
    let uh = u.t().map(|z| z.conj());
    let uc = u.map(|z| z.conj());
    let t_raw = uh.dot(n1).dot(&uc);
    let dim = n1.nrows();
    let t = Array2::from_shape_fn((dim, dim), |(i, j)| (t_raw[[i, j]] + t_raw[[j, i]]) * 0.5);
    let (e, _sigma) = takagi(&t)?;
    Ok(u.dot(&e))
}

/// Real Orthogonal HJD: transform by B from [`ro_transform`], then joint
/// diagonalization with real Givens rotations. Returns V = B·V_real.
pub fn ro_hjd(
    sets: &mut TargetSets,
    config: &SweepConfig,
    ground_truth: Option<&CMat>,
) -> Result<(CMat, Diagnostics)> {
    if sets.n.is_empty() {
        return Err(HjdError::InvalidConfig(
            "ro-hjd requires at least one transpose-congruence target".into(),
        ));
    }
    let b = ro_transform(&sets.n[0])?;
    let bh = b.t().map(|z| z.conj());
    let bc = b.map(|z| z.conj());
    for mk in sets.m.iter_mut() {
        *mk = bh.dot(&*mk).dot(&b);
    }
    for nk in sets.n.iter_mut() {
        *nk = bh.dot(&*nk).dot(&bc);
    }
    // PI is tracked against the full V = B·V_real, so fold B into the
    // ground truth seen by the sweep loop: (B·Vr)ᴴA = Vrᴴ(BᴴA).
    let gt_transformed = ground_truth.map(|a| bh.dot(a));
    let mut v_real: CMat = Array2::eye(sets.dim);
    let diag = run_sweeps(
        sets,
        config,
        gt_transformed.as_ref(),
        &mut v_real,
        ro_hjd_rotation,
    );
    Ok((b.dot(&v_real), diag))
}
