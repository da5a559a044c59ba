//! Elementary Givens, hyperbolic and combined transforms, plus the in-place
//! two-sided congruence updates that touch only rows/columns p and q.

use num_complex::Complex64;

use crate::kernels::CMat;

/// Parameters of an elementary transform acting on the (p, q) plane.
///
/// A pure Givens rotation has `y = 0`; a pure hyperbolic one has `theta = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationParams {
    pub p: usize,
    pub q: usize,
    pub theta: f64,
    pub alpha: f64,
    pub y: f64,
    pub phi: f64,
}

impl RotationParams {
    pub fn identity(p: usize, q: usize) -> Self {
        RotationParams {
            p,
            q,
            theta: 0.0,
            alpha: 0.0,
            y: 0.0,
            phi: 0.0,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.theta == 0.0 && self.y == 0.0
    }
}

/// 2×2 block of an elementary transform, restricted to the (p, q) plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Block {
    pub r11: Complex64,
    pub r12: Complex64,
    pub r21: Complex64,
    pub r22: Complex64,
}

impl Block {
    pub fn identity() -> Self {
        Block {
            r11: Complex64::new(1.0, 0.0),
            r12: Complex64::new(0.0, 0.0),
            r21: Complex64::new(0.0, 0.0),
            r22: Complex64::new(1.0, 0.0),
        }
    }

    /// Matrix product self · other.
    pub fn mul(&self, other: &Block) -> Block {
        Block {
            r11: self.r11 * other.r11 + self.r12 * other.r21,
            r12: self.r11 * other.r12 + self.r12 * other.r22,
            r21: self.r21 * other.r11 + self.r22 * other.r21,
            r22: self.r21 * other.r12 + self.r22 * other.r22,
        }
    }
}

/// Givens block [[cosθ, −sinθ e^{−jα}],[sinθ e^{jα}, cosθ]].
pub fn givens_matrix_entries(params: &RotationParams) -> Block {
    let c = params.theta.cos();
    let s = params.theta.sin();
    Block {
        r11: Complex64::new(c, 0.0),
        r12: -s * Complex64::from_polar(1.0, -params.alpha),
        r21: s * Complex64::from_polar(1.0, params.alpha),
        r22: Complex64::new(c, 0.0),
    }
}

/// Hyperbolic block [[cosh y, sinh y e^{−jφ}],[sinh y e^{jφ}, cosh y]].
pub fn hyperbolic_matrix_entries(params: &RotationParams) -> Block {
    let ch = params.y.cosh();
    let sh = params.y.sinh();
    Block {
        r11: Complex64::new(ch, 0.0),
        r12: sh * Complex64::from_polar(1.0, -params.phi),
        r21: sh * Complex64::from_polar(1.0, params.phi),
        r22: Complex64::new(ch, 0.0),
    }
}

/// Combined block R = G(θ, α) · H(y, φ).
pub fn combined_block(params: &RotationParams) -> Block {
    givens_matrix_entries(params).mul(&hyperbolic_matrix_entries(params))
}

/// In-place M ← RᴴMR where R is the identity outside the (p, q) block.
///
/// Row-then-column two-pass; entries outside rows/columns {p, q} are left
/// bit-identical.
pub fn apply_hermitian_congruence(m: &mut CMat, block: &Block, p: usize, q: usize) {
    let n = m.nrows();
    // M' = M·R (columns p, q)
    for i in 0..n {
        let mip = m[[i, p]];
        let miq = m[[i, q]];
        m[[i, p]] = mip * block.r11 + miq * block.r21;
        m[[i, q]] = mip * block.r12 + miq * block.r22;
    }
    // M'' = Rᴴ·M' (rows p, q)
    for i in 0..n {
        let mpi = m[[p, i]];
        let mqi = m[[q, i]];
        m[[p, i]] = block.r11.conj() * mpi + block.r21.conj() * mqi;
        m[[q, i]] = block.r12.conj() * mpi + block.r22.conj() * mqi;
    }
}

/// In-place N ← RᴴNR*; preserves complex symmetry of N.
pub fn apply_transpose_congruence(n_mat: &mut CMat, block: &Block, p: usize, q: usize) {
    let n = n_mat.nrows();
    // N' = N·R* (columns p, q)
    for i in 0..n {
        let nip = n_mat[[i, p]];
        let niq = n_mat[[i, q]];
        n_mat[[i, p]] = nip * block.r11.conj() + niq * block.r21.conj();
        n_mat[[i, q]] = nip * block.r12.conj() + niq * block.r22.conj();
    }
    // N'' = Rᴴ·N' (rows p, q)
    for i in 0..n {
        let npi = n_mat[[p, i]];
        let nqi = n_mat[[q, i]];
        n_mat[[p, i]] = block.r11.conj() * npi + block.r21.conj() * nqi;
        n_mat[[q, i]] = block.r12.conj() * npi + block.r22.conj() * nqi;
    }
}

/// In-place V ← V·R (columns p, q only).
pub fn accumulate(v: &mut CMat, block: &Block, p: usize, q: usize) {
    let n = v.nrows();
    for i in 0..n {
        let vip = v[[i, p]];
        let viq = v[[i, q]];
        v[[i, p]] = vip * block.r11 + viq * block.r21;
        v[[i, q]] = vip * block.r12 + viq * block.r22;
    }
}
