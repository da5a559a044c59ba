//! Dense small-matrix primitives.
//!
//! Everything here is a pure function on value inputs: symmetric 2×2/3×3
//! eigenvectors, the J-pencil generalized eigenvector used by the hyperbolic
//! rotation solver, Takagi factorization of complex symmetric matrices,
//! cyclic Jacobi eigensolvers and a one-sided Jacobi SVD for left singular
//! vectors.

use ndarray::Array2;
use num_complex::Complex64;

use crate::{tol, HjdError, Result};

/// Dense complex matrix, the universal carrier for targets and diagonalizers.
pub type CMat = Array2<Complex64>;

pub fn cmat_is_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn frob(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn frob_real(m: &Array2<f64>) -> f64 {
    m.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Real symmetric 3×3, upper triangle stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealSym3 {
    pub a11: f64,
    pub a12: f64,
    pub a13: f64,
    pub a22: f64,
    pub a23: f64,
    pub a33: f64,
}

impl RealSym3 {
    pub fn to_dense(self) -> [[f64; 3]; 3] {
        [
            [self.a11, self.a12, self.a13],
            [self.a12, self.a22, self.a23],
            [self.a13, self.a23, self.a33],
        ]
    }

    pub fn is_finite(&self) -> bool {
        [self.a11, self.a12, self.a13, self.a22, self.a23, self.a33]
            .iter()
            .all(|x| x.is_finite())
    }

    fn norm(&self) -> f64 {
        let d = self.to_dense();
        d.iter()
            .flat_map(|r| r.iter())
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    }
}

/// Real symmetric 2×2, upper triangle stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealSym2 {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
}

impl RealSym2 {
    pub fn is_finite(&self) -> bool {
        self.a11.is_finite() && self.a12.is_finite() && self.a22.is_finite()
    }
}

// ---------------------------------------------------------------------------
// Real symmetric Jacobi eigensolver
// ---------------------------------------------------------------------------

/// Jacobi rotation (c, s) zeroing the (p,q) entry of [[app, apq],[apq, aqq]]
/// under GᵀAG with G = [[c, s],[-s, c]] on the (p,q) plane (G_pq = s).
fn sym_schur2(app: f64, aqq: f64, apq: f64) -> (f64, f64) {
    if apq == 0.0 {
        return (1.0, 0.0);
    }
    // B₁₂ = cs(app−aqq) + apq(c²−s²) = 0 ⇔ t² − 2τt − 1 = 0 with t = s/c;
    // take the smaller-magnitude root for stability.
    let tau = (app - aqq) / (2.0 * apq);
    let t = if tau >= 0.0 {
        -1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    (c, t * c)
}

/// Cyclic Jacobi eigendecomposition of a real symmetric matrix.
///
/// Returns unsorted (eigenvalues, eigenvectors-as-columns) with
/// A ≈ V diag(λ) Vᵀ. Eigenvalue `i` sits at diagonal slot `i` of the
/// converged iterate, which fixes the "internal solver ordering" used by
/// tie-breaking rules downstream.
pub fn eigh_real(a: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let mut m = a.clone();
    let mut v: Array2<f64> = Array2::eye(n);
    let scale = frob_real(a).max(f64::MIN_POSITIVE);
    for _ in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[[p, q]] * m[[p, q]];
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq.abs() <= 1e-18 * scale {
                    continue;
                }
                let (c, s) = sym_schur2(m[[p, p]], m[[q, q]], apq);
                // m <- Gᵀ m G, G_pq = s
                for i in 0..n {
                    let mip = m[[i, p]];
                    let miq = m[[i, q]];
                    m[[i, p]] = c * mip - s * miq;
                    m[[i, q]] = s * mip + c * miq;
                }
                for i in 0..n {
                    let mpi = m[[p, i]];
                    let mqi = m[[q, i]];
                    m[[p, i]] = c * mpi - s * mqi;
                    m[[q, i]] = s * mpi + c * mqi;
                }
                for i in 0..n {
                    let vip = v[[i, p]];
                    let viq = v[[i, q]];
                    v[[i, p]] = c * vip - s * viq;
                    v[[i, q]] = s * vip + c * viq;
                }
            }
        }
    }
    let eig = (0..n).map(|i| m[[i, i]]).collect();
    (eig, v)
}

/// Cyclic Jacobi eigendecomposition of a complex Hermitian matrix,
/// eigenvalues sorted descending, H ≈ U diag(λ) Uᴴ.
pub fn eigh_hermitian(h: &CMat) -> (Vec<f64>, CMat) {
    let n = h.nrows();
    assert_eq!(n, h.ncols());
    let mut m = h.clone();
    let mut u: CMat = Array2::eye(n);
    let scale = frob(h).max(f64::MIN_POSITIVE);
    for _ in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[[p, q]].norm_sqr();
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let hpq = m[[p, q]];
                if hpq.norm() <= 1e-18 * scale {
                    continue;
                }
                let phase = Complex64::from_polar(1.0, hpq.arg());
                let (c, s) = sym_schur2(m[[p, p]].re, m[[q, q]].re, hpq.norm());
                // G = D·R with D = diag(e^{iφ}, 1) on the (p,q) plane.
                let gpp = phase * c;
                let gpq = phase * s;
                let gqp = Complex64::new(-s, 0.0);
                let gqq = Complex64::new(c, 0.0);
                for i in 0..n {
                    let mip = m[[i, p]];
                    let miq = m[[i, q]];
                    m[[i, p]] = mip * gpp + miq * gqp;
                    m[[i, q]] = mip * gpq + miq * gqq;
                }
                for i in 0..n {
                    let mpi = m[[p, i]];
                    let mqi = m[[q, i]];
                    m[[p, i]] = gpp.conj() * mpi + gqp.conj() * mqi;
                    m[[q, i]] = gpq.conj() * mpi + gqq.conj() * mqi;
                }
                for i in 0..n {
                    let uip = u[[i, p]];
                    let uiq = u[[i, q]];
                    u[[i, p]] = uip * gpp + uiq * gqp;
                    u[[i, q]] = uip * gpq + uiq * gqq;
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| m[[b, b]].re.partial_cmp(&m[[a, a]].re).unwrap());
    let eig: Vec<f64> = idx.iter().map(|&i| m[[i, i]].re).collect();
    let mut us: CMat = Array2::zeros((n, n));
    for (j, &i) in idx.iter().enumerate() {
        for r in 0..n {
            us[[r, j]] = u[[r, i]];
        }
    }
    (eig, us)
}

// ---------------------------------------------------------------------------
// Principal eigenvectors of small symmetric matrices
// ---------------------------------------------------------------------------

fn sign_fix<const N: usize>(v: &mut [f64; N]) {
    for x in v.iter() {
        if x.abs() > 1e-14 {
            if *x < 0.0 {
                for y in v.iter_mut() {
                    *y = -*y;
                }
            }
            return;
        }
    }
}

/// Unit eigenvector maximizing vᵀQv.
///
/// Ties within `tol::EIG_TIE` relative pick the tied eigenvector with the
/// smallest internal solver index; sign fixed so the first nonzero
/// component is ≥ 0.
pub fn sym3_principal_eigvec(q: RealSym3) -> Result<[f64; 3]> {
    if !q.is_finite() {
        return Err(HjdError::NonFinite("sym3_principal_eigvec"));
    }
    let d = q.to_dense();
    let a = Array2::from_shape_fn((3, 3), |(i, j)| d[i][j]);
    let (eig, vecs) = eigh_real(&a);
    let best = principal_index(&eig);
    let mut v = [vecs[[0, best]], vecs[[1, best]], vecs[[2, best]]];
    let nrm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    for x in v.iter_mut() {
        *x /= nrm;
    }
    sign_fix(&mut v);
    Ok(v)
}

/// As [`sym3_principal_eigvec`], for 2×2 via the closed-form half angle.
pub fn sym2_principal_eigvec(q: RealSym2) -> Result<[f64; 2]> {
    if !q.is_finite() {
        return Err(HjdError::NonFinite("sym2_principal_eigvec"));
    }
    // Eigenvector of the larger eigenvalue at angle ½·atan2(2b, a−c).
    let theta = 0.5 * (2.0 * q.a12).atan2(q.a11 - q.a22);
    let mut v = [theta.cos(), theta.sin()];
    sign_fix(&mut v);
    Ok(v)
}

/// Index of the largest eigenvalue; ties broken by smallest index.
fn principal_index(eig: &[f64]) -> usize {
    let lmax = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tie = tol::EIG_TIE * lmax.abs().max(f64::MIN_POSITIVE);
    for (i, &l) in eig.iter().enumerate() {
        if lmax - l <= tie {
            return i;
        }
    }
    0
}

// ---------------------------------------------------------------------------
// J-pencil generalized eigenvector
// ---------------------------------------------------------------------------

/// Roots of λ³ + aλ² + bλ + c, as complex numbers.
fn cubic_roots(a: f64, b: f64, c: f64) -> [Complex64; 3] {
    // Depressed cubic t³ + pt + q with λ = t − a/3.
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = c - a * b / 3.0 + 2.0 * a * a * a / 27.0;
    let disc = -(4.0 * p * p * p + 27.0 * q * q);
    // A discriminant within rounding noise of zero means a repeated real
    // root; the Cardano branch would give it a spurious imaginary part.
    let disc_scale = (4.0 * p * p * p).abs() + 27.0 * q * q;
    let roots = if disc >= -1e-12 * disc_scale {
        // Three real roots (trigonometric form).
        if p.abs() < 1e-300 {
            // disc ≥ 0 with p ≈ 0 forces q ≈ 0: triple root.
            [(-q).cbrt(), (-q).cbrt(), (-q).cbrt()]
        } else {
            let m = 2.0 * (-p / 3.0).sqrt();
            let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
            let phi = arg.acos() / 3.0;
            [
                m * phi.cos(),
                m * (phi - 2.0 * std::f64::consts::PI / 3.0).cos(),
                m * (phi - 4.0 * std::f64::consts::PI / 3.0).cos(),
            ]
        }
        .map(|t| Complex64::new(t - shift, 0.0))
    } else {
        // One real root, complex conjugate pair (Cardano).
        let half_q = q / 2.0;
        // disc < 0 implies a positive radicand; clamp rounding noise at 0.
        let rad = (half_q * half_q + p * p * p / 27.0).max(0.0).sqrt();
        let u = (-half_q + rad).cbrt();
        let v = (-half_q - rad).cbrt();
        let t1 = u + v;
        let re = -t1 / 2.0;
        let im = (u - v) * 3.0f64.sqrt() / 2.0;
        [
            Complex64::new(t1 - shift, 0.0),
            Complex64::new(re - shift, im),
            Complex64::new(re - shift, -im),
        ]
    };
    roots
}

/// Newton-polish a real root of λ³ + aλ² + bλ + c.
fn polish_real_root(a: f64, b: f64, c: f64, mut x: f64) -> f64 {
    for _ in 0..8 {
        let f = ((x + a) * x + b) * x + c;
        let df = (3.0 * x + 2.0 * a) * x + b;
        if df.abs() < 1e-300 {
            break;
        }
        let step = f / df;
        x -= step;
        if step.abs() <= 1e-16 * x.abs().max(1.0) {
            break;
        }
    }
    x
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Unit-2-norm null vector candidates of a (near-singular) 3×3 matrix,
/// most reliable first.
fn null_candidates(m: [[f64; 3]; 3]) -> Vec<[f64; 3]> {
    let r = [m[0], m[1], m[2]];
    let mut cands: Vec<([f64; 3], f64)> = vec![
        (cross(r[0], r[1]), 0.0),
        (cross(r[0], r[2]), 0.0),
        (cross(r[1], r[2]), 0.0),
    ];
    for c in cands.iter_mut() {
        c.1 = norm3(c.0);
    }
    cands.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    let row_scale = r.iter().map(|x| norm3(*x)).fold(0.0f64, f64::max);
    let mut out = Vec::new();
    for (v, nv) in cands {
        if nv > 1e-10 * row_scale.max(1e-300) * row_scale.max(1e-300) {
            out.push([v[0] / nv, v[1] / nv, v[2] / nv]);
        }
    }
    // Rank ≤ 1 fallback: project basis vectors against the dominant row.
    if out.is_empty() {
        let (ri, rn) = r
            .iter()
            .enumerate()
            .map(|(i, x)| (i, norm3(*x)))
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        if rn > 1e-300 {
            let rr = r[ri];
            for k in 0..3 {
                let dot = rr[k] / (rn * rn);
                let mut e = [0.0; 3];
                e[k] = 1.0;
                for (j, ej) in e.iter_mut().enumerate() {
                    *ej -= dot * rr[j];
                }
                let ne = norm3(e);
                if ne > 1e-8 {
                    out.push([e[0] / ne, e[1] / ne, e[2] / ne]);
                }
            }
        } else {
            out.push([1.0, 0.0, 0.0]);
            out.push([0.0, 1.0, 0.0]);
            out.push([0.0, 0.0, 1.0]);
        }
    }
    out
}

/// Generalized eigenvector of the pencil (Q, J), J = diag(−1, 1, 1), at the
/// smallest real non-negative eigenvalue, normalized to wᵀJw = 1 with w₃ ≥ 0.
pub fn jpencil_selected_eigvec(q: RealSym3) -> Result<[f64; 3]> {
    if !q.is_finite() {
        return Err(HjdError::NonFinite("jpencil_selected_eigvec"));
    }
    let qd = q.to_dense();
    // Q w = λ J w  ⇔  (J·Q) w = λ w  since J⁻¹ = J.
    let a = [
        [-qd[0][0], -qd[0][1], -qd[0][2]],
        [qd[1][0], qd[1][1], qd[1][2]],
        [qd[2][0], qd[2][1], qd[2][2]],
    ];
    let tr = a[0][0] + a[1][1] + a[2][2];
    let m2 = a[0][0] * a[1][1] - a[0][1] * a[1][0] + a[0][0] * a[2][2] - a[0][2] * a[2][0]
        + a[1][1] * a[2][2]
        - a[1][2] * a[2][1];
    let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    // charpoly λ³ − tr·λ² + m2·λ − det
    let roots = cubic_roots(-tr, m2, -det);
    let mut best: Option<f64> = None;
    for root in roots {
        if root.im.abs() <= tol::PENCIL_IMAG * (1.0 + root.norm()) && root.re >= tol::PENCIL_NEG {
            let lam = polish_real_root(-tr, m2, -det, root.re);
            let lam = lam.max(0.0);
            best = Some(match best {
                Some(b) if b <= lam => b,
                _ => lam,
            });
        }
    }
    let lam = best.ok_or(HjdError::DegeneratePencil)?;
    let shifted = [
        [a[0][0] - lam, a[0][1], a[0][2]],
        [a[1][0], a[1][1] - lam, a[1][2]],
        [a[2][0], a[2][1], a[2][2] - lam],
    ];
    let qn = q.norm().max(f64::MIN_POSITIVE);
    for mut w in null_candidates(shifted) {
        // Residual check on the pencil: ‖Qw − λJw‖ ≤ tol·‖Q‖_F.
        let res = pencil_residual(&qd, lam, w);
        if res > tol::EIG_RESIDUAL * qn {
            continue;
        }
        if w[2] < 0.0 {
            for x in w.iter_mut() {
                *x = -*x;
            }
        }
        let jn = -w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
        if jn <= tol::PENCIL_JNORM {
            continue;
        }
        let s = jn.sqrt();
        return Ok([w[0] / s, w[1] / s, w[2] / s]);
    }
    Err(HjdError::DegeneratePencil)
}

fn pencil_residual(q: &[[f64; 3]; 3], lam: f64, w: [f64; 3]) -> f64 {
    let j = [-1.0, 1.0, 1.0];
    let mut r = [0.0; 3];
    for (i, ri) in r.iter_mut().enumerate() {
        *ri = q[i][0] * w[0] + q[i][1] * w[1] + q[i][2] * w[2] - lam * j[i] * w[i];
    }
    norm3(r)
}

// ---------------------------------------------------------------------------
// Takagi factorization
// ---------------------------------------------------------------------------

/// Takagi factorization T = E diag(σ) Eᵀ of a complex symmetric matrix,
/// σ real, non-negative, sorted descending, E unitary.
///
/// Works on the real symmetric embedding [[Re T, Im T],[Im T, −Re T]]:
/// an eigenvector [x; y] at eigenvalue σ ≥ 0 maps to the Takagi vector
/// x + jy (T·conj(e) = σ·e).
pub fn takagi(t: &CMat) -> Result<(CMat, Vec<f64>)> {
    let n = t.nrows();
    if n != t.ncols() {
        return Err(HjdError::DimensionMismatch("takagi expects square".into()));
    }
    if !cmat_is_finite(t) {
        return Err(HjdError::NonFinite("takagi"));
    }
    let tn = frob(t).max(f64::MIN_POSITIVE);
    let mut asym = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            asym += (t[[i, j]] - t[[j, i]]).norm_sqr();
        }
    }
    if asym.sqrt() > tol::TAKAGI_SYM * tn {
        return Err(HjdError::NotSymmetric);
    }

    let mut big = Array2::<f64>::zeros((2 * n, 2 * n));
    for i in 0..n {
        for j in 0..n {
            let z = t[[i, j]];
            big[[i, j]] = z.re;
            big[[i, j + n]] = z.im;
            big[[i + n, j]] = z.im;
            big[[i + n, j + n]] = -z.re;
        }
    }
    let (eig, vecs) = eigh_real(&big);
    let mut idx: Vec<usize> = (0..2 * n).collect();
    idx.sort_by(|&a, &b| eig[b].partial_cmp(&eig[a]).unwrap());

    // Take the top eigenpairs; for (near) zero eigenvalues the ±σ spaces
    // merge, so keep only candidates that stay orthonormal in ℂⁿ.
    let mut e: CMat = Array2::zeros((n, n));
    let mut sig = Vec::with_capacity(n);
    let mut taken = 0usize;
    for &k in &idx {
        if taken == n {
            break;
        }
        let mut cand: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(vecs[[i, k]], vecs[[i + n, k]]))
            .collect();
        for c in 0..taken {
            let mut dot = Complex64::new(0.0, 0.0);
            for i in 0..n {
                dot += e[[i, c]].conj() * cand[i];
            }
            for (i, ci) in cand.iter_mut().enumerate() {
                *ci -= dot * e[[i, c]];
            }
        }
        let nrm = cand.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nrm < 0.5 {
            continue; // shadow of an already-taken vector (±σ pairing)
        }
        for (i, ci) in cand.iter().enumerate() {
            e[[i, taken]] = ci / nrm;
        }
        sig.push(eig[k].max(0.0));
        taken += 1;
    }
    if taken < n {
        return Err(HjdError::DegeneratePencil);
    }
    Ok((e, sig))
}

// ---------------------------------------------------------------------------
// One-sided Jacobi SVD (left singular vectors)
// ---------------------------------------------------------------------------

/// Left singular vectors of a square complex matrix, columns ordered by
/// descending singular value. Returns (U, σ) with UᴴU = I.
pub fn left_singular_vectors(x: &CMat) -> Result<(CMat, Vec<f64>)> {
    let n = x.nrows();
    if n != x.ncols() {
        return Err(HjdError::DimensionMismatch(
            "left_singular_vectors expects square".into(),
        ));
    }
    if !cmat_is_finite(x) {
        return Err(HjdError::NonFinite("left_singular_vectors"));
    }
    let mut a = x.clone();
    let scale = frob(x).max(f64::MIN_POSITIVE);
    for _ in 0..60 {
        let mut converged = true;
        for p in 0..n {
            for q in (p + 1)..n {
                let mut app = 0.0f64;
                let mut aqq = 0.0f64;
                let mut apq = Complex64::new(0.0, 0.0);
                for i in 0..n {
                    app += a[[i, p]].norm_sqr();
                    aqq += a[[i, q]].norm_sqr();
                    apq += a[[i, p]].conj() * a[[i, q]];
                }
                if apq.norm() <= 1e-15 * (app * aqq).sqrt() + 1e-30 * scale * scale {
                    continue;
                }
                converged = false;
                let phase = Complex64::from_polar(1.0, apq.arg());
                let (c, s) = sym_schur2(app, aqq, apq.norm());
                // Columns ← columns · (diag(e^{iφ},1) · [[c, s],[-s, c]])
                for i in 0..n {
                    let ap = a[[i, p]] * phase;
                    let aq = a[[i, q]];
                    a[[i, p]] = c * ap - s * aq;
                    a[[i, q]] = s * ap + c * aq;
                }
            }
        }
        if converged {
            break;
        }
    }
    let mut norms: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|i| a[[i, j]].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());
    let smax = norms[idx[0]].max(f64::MIN_POSITIVE);
    let mut u: CMat = Array2::zeros((n, n));
    let mut sv = Vec::with_capacity(n);
    let mut filled = 0usize;
    for &j in &idx {
        if norms[j] > 1e-14 * smax {
            for i in 0..n {
                u[[i, filled]] = a[[i, j]] / norms[j];
            }
            sv.push(norms[j]);
            filled += 1;
        } else {
            sv.push(0.0);
            norms[j] = 0.0;
        }
    }
    // Complete a rank-deficient basis with Gram-Schmidt over the identity.
    let mut basis = 0usize;
    while filled < n && basis < n {
        let mut cand: Vec<Complex64> = (0..n)
            .map(|i| {
                if i == basis {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        for c in 0..filled {
            let mut dot = Complex64::new(0.0, 0.0);
            for i in 0..n {
                dot += u[[i, c]].conj() * cand[i];
            }
            for (i, ci) in cand.iter_mut().enumerate() {
                *ci -= dot * u[[i, c]];
            }
        }
        let nrm = cand.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nrm > 0.5 {
            for (i, ci) in cand.iter().enumerate() {
                u[[i, filled]] = ci / nrm;
            }
            filled += 1;
        }
        basis += 1;
    }
    Ok((u, sv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles;
    use ndarray::Array2;
    use num_complex::Complex64;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn rand_sym3(r: &mut impl Rng) -> RealSym3 {
        RealSym3 {
            a11: r.gen_range(-1.0..1.0),
            a12: r.gen_range(-1.0..1.0),
            a13: r.gen_range(-1.0..1.0),
            a22: r.gen_range(-1.0..1.0),
            a23: r.gen_range(-1.0..1.0),
            a33: r.gen_range(-1.0..1.0),
        }
    }

    fn rand_cmat(n: usize, r: &mut impl Rng) -> CMat {
        Array2::from_shape_fn((n, n), |_| {
            Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))
        })
    }

    #[test]
    fn sym3_diagonal() {
        let q = RealSym3 {
            a11: 3.0,
            a12: 0.0,
            a13: 0.0,
            a22: 1.0,
            a23: 0.0,
            a33: 0.0,
        };
        let v = sym3_principal_eigvec(q).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-14 && v[1].abs() < 1e-14 && v[2].abs() < 1e-14);
    }

    #[test]
    fn sym3_identity_tie_break() {
        let q = RealSym3 {
            a11: 1.0,
            a12: 0.0,
            a13: 0.0,
            a22: 1.0,
            a23: 0.0,
            a33: 1.0,
        };
        let v = sym3_principal_eigvec(q).unwrap();
        assert_eq!(v, [1.0, 0.0, 0.0]);
    }

    #[test]
    fn sym3_nonfinite_rejected() {
        let q = RealSym3 {
            a11: f64::NAN,
            a12: 0.0,
            a13: 0.0,
            a22: 1.0,
            a23: 0.0,
            a33: 1.0,
        };
        assert!(matches!(
            sym3_principal_eigvec(q),
            Err(HjdError::NonFinite(_))
        ));
    }

    #[test]
    fn sym3_matches_power_iteration() {
        let mut r = rng(1);
        for _ in 0..200 {
            let mut q = rand_sym3(&mut r);
            // Shift to make the matrix PSD-dominant so power iteration targets
            // the same (largest-eigenvalue) eigenvector.
            q.a11 += 4.0;
            q.a22 += 4.0;
            q.a33 += 4.0;
            let v = sym3_principal_eigvec(q).unwrap();
            let d = q.to_dense();
            let p = oracles::power_iteration3(&d, 10_000);
            let ray = |u: [f64; 3]| {
                let mut s = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        s += u[i] * d[i][j] * u[j];
                    }
                }
                s
            };
            assert!((ray(v) - ray(p)).abs() <= 1e-9 * ray(p).abs().max(1.0));
        }
    }

    #[test]
    fn sym2_cases() {
        let v = sym2_principal_eigvec(RealSym2 {
            a11: 2.0,
            a12: 0.0,
            a22: 1.0,
        })
        .unwrap();
        assert!((v[0] - 1.0).abs() < 1e-15 && v[1].abs() < 1e-15);
        let v = sym2_principal_eigvec(RealSym2 {
            a11: 1.0,
            a12: 1.0,
            a22: 1.0,
        })
        .unwrap();
        let h = 0.5f64.sqrt();
        assert!((v[0] - h).abs() < 1e-14 && (v[1] - h).abs() < 1e-14);
    }

    #[test]
    fn sym2_matches_power_iteration() {
        let mut r = rng(2);
        for _ in 0..300 {
            let q = RealSym2 {
                a11: r.gen_range(0.0..4.0),
                a12: r.gen_range(-1.0..1.0),
                a22: r.gen_range(0.0..4.0),
            };
            let v = sym2_principal_eigvec(q).unwrap();
            let d = [[q.a11, q.a12], [q.a12, q.a22]];
            let p = oracles::power_iteration2(&d, 20_000);
            let ray = |u: [f64; 2]| {
                u[0] * (d[0][0] * u[0] + d[0][1] * u[1]) + u[1] * (d[1][0] * u[0] + d[1][1] * u[1])
            };
            assert!((ray(v) - ray(p)).abs() <= 1e-12 * ray(p).abs().max(1.0));
        }
    }

    #[test]
    fn jpencil_hand_case() {
        let q = RealSym3 {
            a11: 1.0,
            a12: 0.0,
            a13: 0.0,
            a22: 2.0,
            a23: 0.0,
            a33: 3.0,
        };
        // J·Q = diag(−1, 2, 3): smallest non-negative eigenvalue is 2 at e₂.
        let w = jpencil_selected_eigvec(q).unwrap();
        assert!(w[0].abs() < 1e-12 && (w[1].abs() - 1.0).abs() < 1e-12 && w[2].abs() < 1e-12);
    }

    #[test]
    fn jpencil_identity_tie() {
        let q = RealSym3 {
            a11: 1.0,
            a12: 0.0,
            a13: 0.0,
            a22: 1.0,
            a23: 0.0,
            a33: 1.0,
        };
        let w = jpencil_selected_eigvec(q).unwrap();
        assert!(w[0].abs() < 1e-12);
        assert!((w[1] - 1.0).abs() < 1e-12 && w[2].abs() < 1e-12);
    }

    #[test]
    fn jpencil_random_gram_residual() {
        let mut r = rng(3);
        for _ in 0..300 {
            // Q as the real part of a Gram matrix, the shape the solvers feed it.
            let e = rand_cmat(3, &mut r);
            let mut q = [[0.0f64; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    let mut z = Complex64::new(0.0, 0.0);
                    for k in 0..3 {
                        z += e[[k, i]].conj() * e[[k, j]];
                    }
                    q[i][j] = z.re;
                }
            }
            let qs = RealSym3 {
                a11: q[0][0],
                a12: q[0][1],
                a13: q[0][2],
                a22: q[1][1],
                a23: q[1][2],
                a33: q[2][2],
            };
            let Ok(w) = jpencil_selected_eigvec(qs) else {
                continue;
            };
            let jn = -w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
            assert!((jn - 1.0).abs() < 1e-10, "J-norm {jn}");
            assert!(w[2] >= 0.0);
        }
    }

    #[test]
    fn takagi_real_diagonal() {
        let t = Array2::from_diag(&ndarray::arr1(&[
            Complex64::new(2.0, 0.0),
            Complex64::new(1.0, 0.0),
        ]));
        let (e, s) = takagi(&t).unwrap();
        assert!((s[0] - 2.0).abs() < 1e-12 && (s[1] - 1.0).abs() < 1e-12);
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((e[[i, j]].norm() - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn takagi_phase_absorption() {
        // T = diag(r e^{2jα}) factors as E = diag(±e^{jα}), σ = r.
        let alpha = [0.3, -1.1, 2.0];
        let radius = [2.0, 1.0, 0.5];
        let t = Array2::from_shape_fn((3, 3), |(i, j)| {
            if i == j {
                Complex64::from_polar(radius[i], 2.0 * alpha[i])
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let (e, s) = takagi(&t).unwrap();
        assert!((s[0] - 2.0).abs() < 1e-10);
        // verify reconstruction rather than the phase itself (sign-free)
        assert_recon(&t, &e, &s);
    }

    fn assert_recon(t: &CMat, e: &CMat, s: &[f64]) {
        let n = t.nrows();
        let mut rec: CMat = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    rec[[i, j]] += e[[i, k]] * s[k] * e[[j, k]];
                }
            }
        }
        let err = frob(&(&rec - t));
        assert!(err <= 1e-8 * frob(t).max(1.0), "takagi residual {err}");
        let mut gram_err = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let mut z = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    z += e[[k, i]].conj() * e[[k, j]];
                }
                let want = if i == j { 1.0 } else { 0.0 };
                gram_err += (z - want).norm_sqr();
            }
        }
        assert!(gram_err.sqrt() <= 1e-10, "EᴴE deviation {}", gram_err.sqrt());
    }

    #[test]
    fn takagi_random_reconstruction() {
        let mut r = rng(4);
        for trial in 0..1000 {
            let n = 2 + (trial % 9);
            let x = rand_cmat(n, &mut r);
            let t = Array2::from_shape_fn((n, n), |(i, j)| (x[[i, j]] + x[[j, i]]) * 0.5);
            let (e, s) = takagi(&t).unwrap();
            assert!(s.windows(2).all(|w| w[0] >= w[1] - 1e-12));
            assert_recon(&t, &e, &s);
        }
    }

    #[test]
    fn takagi_rejects_asymmetric() {
        let mut r = rng(5);
        let t = rand_cmat(4, &mut r);
        assert!(matches!(takagi(&t), Err(HjdError::NotSymmetric)));
    }

    #[test]
    fn svd_diagonal_and_unitary() {
        let x = Array2::from_shape_fn((3, 3), |(i, j)| {
            if i == j {
                Complex64::new((3 - i) as f64, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let (u, s) = left_singular_vectors(&x).unwrap();
        assert!((s[0] - 3.0).abs() < 1e-12 && (s[2] - 1.0).abs() < 1e-12);
        for i in 0..3 {
            assert!((u[[i, i]].norm() - 1.0).abs() < 1e-10);
        }

        let mut r = rng(6);
        let g = rand_cmat(4, &mut r);
        let (q, _) = left_singular_vectors(&g).unwrap(); // a unitary matrix
        let (_, sv) = left_singular_vectors(&q).unwrap();
        for s in sv {
            assert!((s - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn svd_random_reconstruction() {
        let mut r = rng(7);
        for trial in 0..200 {
            let n = 2 + (trial % 7);
            let x = rand_cmat(n, &mut r);
            let (u, s) = left_singular_vectors(&x).unwrap();
            // ‖X Xᴴ − U Σ² Uᴴ‖ small
            let mut xxh: CMat = Array2::zeros((n, n));
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        xxh[[i, j]] += x[[i, k]] * x[[j, k]].conj();
                    }
                }
            }
            let mut rec: CMat = Array2::zeros((n, n));
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        rec[[i, j]] += u[[i, k]] * s[k] * s[k] * u[[j, k]].conj();
                    }
                }
            }
            let err = frob(&(&rec - &xxh));
            assert!(err <= 1e-9 * frob(&xxh).max(1.0), "svd residual {err}");
        }
    }

    #[test]
    fn eigh_real_reconstruction() {
        let mut r = rng(8);
        for _ in 0..50 {
            let n = 6;
            let g = Array2::from_shape_fn((n, n), |_| r.gen_range(-1.0..1.0));
            let a = &g + &g.t();
            let (eig, v) = eigh_real(&a);
            let mut rec = Array2::<f64>::zeros((n, n));
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        rec[[i, j]] += v[[i, k]] * eig[k] * v[[j, k]];
                    }
                }
            }
            assert!(frob_real(&(&rec - &a)) <= 1e-11 * frob_real(&a).max(1.0));
        }
    }

    #[test]
    fn eigh_hermitian_reconstruction() {
        let mut r = rng(9);
        for _ in 0..50 {
            let n = 5;
            let g = rand_cmat(n, &mut r);
            let h = Array2::from_shape_fn((n, n), |(i, j)| {
                (g[[i, j]] + g[[j, i]].conj()) * 0.5
            });
            let (eig, u) = eigh_hermitian(&h);
            assert!(eig.windows(2).all(|w| w[0] >= w[1]));
            let mut rec: CMat = Array2::zeros((n, n));
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        rec[[i, j]] += u[[i, k]] * eig[k] * u[[j, k]].conj();
                    }
                }
            }
            assert!(frob(&(&rec - &h)) <= 1e-11 * frob(&h).max(1.0));
        }
    }
}
