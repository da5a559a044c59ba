//! Augmented Real Orthogonal HJD: paired real Givens rotations on 2n×2n
//! augmented statistics, preserving the realified-unitary block structure.

use ndarray::Array2;

use crate::kernels::{sym2_principal_eigvec, CMat, RealSym2};
use crate::metrics::{off_energy_real, performance_index_real};
use crate::orthogonal::{Diagnostics, SweepConfig, SweepRecord};
use crate::{HjdError, Result};

/// K real symmetric 2n×2n matrices M̄_k = Ā D_k Āᵀ.
#[derive(Debug, Clone)]
pub struct AugmentedSet {
    pub mbar: Vec<Array2<f64>>,
    /// Base (complex) dimension; matrices are 2n×2n.
    pub n: usize,
}

impl AugmentedSet {
    /// Validates shapes and symmetrizes on ingestion (sample estimates of
    /// lagged statistics are only approximately symmetric).
    pub fn new(mbar: Vec<Array2<f64>>) -> Result<Self> {
        let two_n = mbar
            .first()
            .map(|x| x.nrows())
            .ok_or_else(|| HjdError::InvalidConfig("K must be at least 1".into()))?;
        if two_n == 0 || two_n % 2 != 0 {
            return Err(HjdError::DimensionMismatch(format!(
                "augmented matrices must be 2n x 2n, got {two_n}"
            )));
        }
        for x in &mbar {
            if x.nrows() != two_n || x.ncols() != two_n {
                return Err(HjdError::DimensionMismatch(format!(
                    "expected {two_n}x{two_n}, got {}x{}",
                    x.nrows(),
                    x.ncols()
                )));
            }
            if !x.iter().all(|v| v.is_finite()) {
                return Err(HjdError::NonFinite("AugmentedSet"));
            }
        }
        let mbar = mbar
            .into_iter()
            .map(|x| {
                let xt = x.t().to_owned();
                (&x + &xt) * 0.5
            })
            .collect();
        Ok(AugmentedSet { mbar, n: two_n / 2 })
    }

    pub fn current_cost(&self) -> f64 {
        self.mbar.iter().map(off_energy_real).sum()
    }
}

/// Ā = [[Re A, −Im A], [Im A, Re A]].
pub fn augment_mixing(a: &CMat) -> Array2<f64> {
    let n = a.nrows();
    Array2::from_shape_fn((2 * n, 2 * n), |(i, j)| {
        let z = a[[i % n, j % n]];
        match (i >= n, j >= n) {
            (false, false) | (true, true) => z.re,
            (false, true) => -z.im,
            (true, false) => z.im,
        }
    })
}

/// Augmented second-order statistic built from a correlation matrix M and a
/// pseudo-correlation matrix N of the same complex process:
/// M̄ = ½[[Re(M+N), Im(N−M)], [Im(M+N), Re(M−N)]].
pub fn augment_statistics(m: &CMat, n_mat: &CMat) -> Array2<f64> {
    let n = m.nrows();
    Array2::from_shape_fn((2 * n, 2 * n), |(i, j)| {
        let mz = m[[i % n, j % n]];
        let nz = n_mat[[i % n, j % n]];
        0.5 * match (i >= n, j >= n) {
            (false, false) => mz.re + nz.re,
            (false, true) => nz.im - mz.im,
            (true, false) => mz.im + nz.im,
            (true, true) => mz.re - nz.re,
        }
    })
}

/// f-vector of one matrix for the Jacobi plane (a, b):
/// [M̄_bb − M̄_aa, M̄_ab + M̄_ba]. f₁/f₂ use the planes (p, q)/(p+n, q+n),
/// f₃/f₄ use (p, q+n)/(q, p+n), f₅ uses (p, p+n).
fn f_vector(mbar: &Array2<f64>, a: usize, b: usize) -> [f64; 2] {
    [mbar[[b, b]] - mbar[[a, a]], mbar[[a, b]] + mbar[[b, a]]]
}

/// Rows f₁..f₅ for one matrix of the set.
pub fn build_f_vectors(mbar: &Array2<f64>, n: usize, p: usize, q: usize) -> [[f64; 2]; 5] {
    [
        f_vector(mbar, p, q),
        f_vector(mbar, p + n, q + n),
        f_vector(mbar, p, q + n),
        f_vector(mbar, q, p + n),
        f_vector(mbar, p, p + n),
    ]
}

fn angle_from_planes(set: &AugmentedSet, planes: &[(usize, usize)]) -> f64 {
    let mut g = [[0.0f64; 2]; 2];
    for m in &set.mbar {
        for &(a, b) in planes {
            let f = f_vector(m, a, b);
            g[0][0] += f[0] * f[0];
            g[0][1] += f[0] * f[1];
            g[1][1] += f[1] * f[1];
        }
    }
    let Ok(mut v) = sym2_principal_eigvec(RealSym2 {
        a11: g[0][0],
        a12: g[0][1],
        a22: g[1][1],
    }) else {
        return 0.0;
    };
    if v[0] < 0.0 {
        v[0] = -v[0];
        v[1] = -v[1];
    }
    let c = ((1.0 + v[0]) / 2.0).sqrt();
    let s = -v[1] / (2.0 * c);
    s.atan2(c)
}

pub fn aro_rotation_theta(set: &AugmentedSet, p: usize, q: usize) -> f64 {
    let n = set.n;
    angle_from_planes(set, &[(p, q), (p + n, q + n)])
}

pub fn aro_rotation_theta_prime(set: &AugmentedSet, p: usize, q: usize) -> f64 {
    let n = set.n;
    angle_from_planes(set, &[(p, q + n), (q, p + n)])
}

pub fn aro_rotation_theta_dprime(set: &AugmentedSet, p: usize) -> f64 {
    let n = set.n;
    angle_from_planes(set, &[(p, p + n)])
}

/// In-place real Givens congruence X ← GᵀXG on the plane (a, b), with
/// G_aa = G_bb = cos θ, G_ba = sin θ, G_ab = −sin θ.
fn real_congruence(x: &mut Array2<f64>, a: usize, b: usize, c: f64, s: f64) {
    let n = x.nrows();
    for i in 0..n {
        let (xa, xb) = (x[[i, a]], x[[i, b]]);
        x[[i, a]] = c * xa + s * xb;
        x[[i, b]] = -s * xa + c * xb;
    }
    for i in 0..n {
        let (xa, xb) = (x[[a, i]], x[[b, i]]);
        x[[a, i]] = c * xa + s * xb;
        x[[b, i]] = -s * xa + c * xb;
    }
}

fn real_accumulate(v: &mut Array2<f64>, a: usize, b: usize, c: f64, s: f64) {
    let n = v.nrows();
    for i in 0..n {
        let (va, vb) = (v[[i, a]], v[[i, b]]);
        v[[i, a]] = c * va + s * vb;
        v[[i, b]] = -s * va + c * vb;
    }
}

/// Rotation kinds of the paired-Givens sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AroKind {
    Theta,
    ThetaPrime,
    ThetaDprime,
}

/// Applies a paired (or single, for θ″) rotation as an orthogonal congruence
/// to every M̄_k and accumulates it into V̄.
pub fn apply_paired_rotation(
    set: &mut AugmentedSet,
    v: &mut Array2<f64>,
    kind: AroKind,
    p: usize,
    q: usize,
    angle: f64,
) {
    if angle == 0.0 {
        return;
    }
    let n = set.n;
    let planes: &[(usize, usize)] = match kind {
        AroKind::Theta => &[(p, q), (p + n, q + n)],
        AroKind::ThetaPrime => &[(p, q + n), (q, p + n)],
        AroKind::ThetaDprime => &[(p, p + n)],
    };
    let (c, s) = (angle.cos(), angle.sin());
    for m in set.mbar.iter_mut() {
        for &(a, b) in planes {
            real_congruence(m, a, b, c, s);
        }
    }
    for &(a, b) in planes {
        real_accumulate(v, a, b, c, s);
    }
}

/// ARO-HJD. Mutates the set in place to V̄ᵀM̄_kV̄ and returns
/// the accumulated orthogonal V̄. When the augmented ground truth Ā is
/// given, per-sweep PI of P̄ = V̄ᵀĀ is recorded.
pub fn aro_hjd(
    set: &mut AugmentedSet,
    config: &SweepConfig,
    ground_truth: Option<&Array2<f64>>,
) -> (Array2<f64>, Diagnostics) {
    let n = set.n;
    let mut v: Array2<f64> = Array2::eye(2 * n);
    let mut diag = Diagnostics::default();
    for sweep in 1..=config.max_sweeps {
        let mut max_sin = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                let theta = aro_rotation_theta(set, p, q);
                max_sin = max_sin.max(theta.sin().abs());
                apply_paired_rotation(set, &mut v, AroKind::Theta, p, q, theta);

                let theta_p = aro_rotation_theta_prime(set, p, q);
                max_sin = max_sin.max(theta_p.sin().abs());
                apply_paired_rotation(set, &mut v, AroKind::ThetaPrime, p, q, theta_p);
            }
            let theta_d = aro_rotation_theta_dprime(set, p);
            max_sin = max_sin.max(theta_d.sin().abs());
            apply_paired_rotation(set, &mut v, AroKind::ThetaDprime, p, 0, theta_d);
        }
        let pi = ground_truth.and_then(|a| performance_index_real(&v.t().dot(a)).ok());
        diag.records.push(SweepRecord {
            sweep,
            cost: set.current_cost(),
            max_sin,
            max_sinh: 0.0,
            pi,
        });
        if max_sin <= config.tau {
            diag.converged = true;
            break;
        }
    }
    (v, diag)
}

/// True when V̄ retains the [[X, −Y], [Y, X]] structure within `tol`.
pub fn has_augmented_structure(v: &Array2<f64>, n: usize, tol: f64) -> bool {
    for i in 0..n {
        for j in 0..n {
            if (v[[i, j]] - v[[i + n, j + n]]).abs() > tol
                || (v[[i, j + n]] + v[[i + n, j]]).abs() > tol
            {
                return false;
            }
        }
    }
    true
}
