//! Problem generators: synthetic exact/noisy HJD instances with controlled
//! condition number, SNR and MoU, plus the non-circular AR(1) BSS simulation
//! (mixing, noise, lagged statistics, pre-whitening).

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::aro::{augment_statistics, AugmentedSet};
use crate::kernels::{eigh_hermitian, frob, left_singular_vectors, CMat};
use crate::metrics::{modulus_of_uniqueness, DiagonalProfiles};
use crate::orthogonal::TargetSets;
use crate::{tol, HjdError, Result};

/// Synthetic-problem generator configuration.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub n: usize,
    pub k1: usize,
    pub k2: usize,
    /// Target condition number of A; `None` draws plain i.i.d. Gaussian.
    pub cond_target: Option<f64>,
    /// Per-matrix SNR in dB; `None` generates an exact (noise-free) problem.
    pub snr_db: Option<f64>,
    /// Target modulus of uniqueness; `None` leaves diagonals i.i.d.
    pub mou_target: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(HjdError::InvalidConfig("scenario.n must be >= 2".into()));
        }
        if self.k1 + self.k2 == 0 {
            return Err(HjdError::InvalidConfig("scenario.k1 + k2 must be >= 1".into()));
        }
        if let Some(c) = self.cond_target {
            if c < 1.0 {
                return Err(HjdError::InvalidConfig(
                    "scenario.cond_target must be >= 1".into(),
                ));
            }
        }
        if let Some(m) = self.mou_target {
            if !(0.0..1.0).contains(&m) {
                return Err(HjdError::InvalidConfig(
                    "scenario.mou_target must lie in [0, 1)".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InnovationMode {
    #[default]
    C1,
    C2,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseModel {
    White,
    /// Spatially colored: Toeplitz covariance with entry (i, i+γ) ∝ base^γ.
    Colored { base: f64 },
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel::White
    }
}

/// Non-circular AR(1) BSS simulation configuration.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BssSpec {
    /// Sensors.
    pub m: usize,
    /// Sources.
    pub n: usize,
    #[serde(default = "default_samples")]
    pub t: usize,
    #[serde(default = "default_ar_coeffs")]
    pub ar_coeffs: Vec<Complex64>,
    /// Non-circularity rate ρ ∈ [0, 1].
    pub rho: f64,
    #[serde(default)]
    pub innovation_mode: InnovationMode,
    #[serde(default)]
    pub noise: NoiseModel,
    /// Observation SNR in dB; `None` is noise-free.
    pub snr_db: Option<f64>,
    #[serde(default = "default_lags")]
    pub lags_m: Vec<usize>,
    #[serde(default = "default_pseudo_lags")]
    pub lags_n: Vec<usize>,
    #[serde(default)]
    pub seed: u64,
}

fn default_samples() -> usize {
    1000
}

fn default_lags() -> Vec<usize> {
    vec![1, 2, 3, 4, 5]
}

// Whitening consumes only the Hermitian lag-0 statistic; the lag-0
// pseudo-correlation is the lowest-noise carrier of non-circularity and so
// leads the default pseudo-lag set.
fn default_pseudo_lags() -> Vec<usize> {
    vec![0, 1, 2, 3, 4]
}

fn default_ar_coeffs() -> Vec<Complex64> {
    vec![
        Complex64::new(0.95, 0.0),
        Complex64::from_polar(0.85, std::f64::consts::PI / 4.0),
        Complex64::from_polar(0.7, std::f64::consts::PI / 6.0),
    ]
}

const BURN_IN: usize = 1000;

impl BssSpec {
    pub fn validate(&self) -> Result<()> {
        if self.m < self.n {
            return Err(HjdError::InvalidConfig("bss.m must be >= bss.n".into()));
        }
        if self.t == 0 {
            return Err(HjdError::InvalidConfig("bss.t must be >= 1".into()));
        }
        if self.ar_coeffs.len() < self.n {
            return Err(HjdError::InvalidConfig(format!(
                "bss.ar_coeffs has {} entries for {} sources",
                self.ar_coeffs.len(),
                self.n
            )));
        }
        if self.ar_coeffs[..self.n].iter().any(|a| a.norm() >= 1.0) {
            return Err(HjdError::InvalidConfig(
                "bss.ar_coeffs must all have modulus < 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(HjdError::InvalidConfig("bss.rho must lie in [0, 1]".into()));
        }
        if self.lags_m.is_empty() && self.lags_n.is_empty() {
            return Err(HjdError::InvalidConfig("bss needs at least one lag".into()));
        }
        Ok(())
    }
}

/// Ground truth of a generated problem.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub a: CMat,
    /// Diagonals of the D_k (Hermitian-congruence targets).
    pub d: Vec<Vec<Complex64>>,
    /// Diagonals of the L_k (transpose-congruence targets).
    pub l: Vec<Vec<Complex64>>,
}

fn normal(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Standard complex normal: unit total variance, zero mean, circular.
fn complex_normal(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(
        normal(rng) * std::f64::consts::FRAC_1_SQRT_2,
        normal(rng) * std::f64::consts::FRAC_1_SQRT_2,
    )
}

fn gaussian_cmat(rows: usize, cols: usize, rng: &mut impl Rng) -> CMat {
    let mut out = Array2::zeros((rows, cols));
    for i in 0..rows {
        for j in 0..cols {
            out[[i, j]] = complex_normal(rng);
        }
    }
    out
}

/// Random mixing matrix; with a condition target, A = U diag(σ) Wᴴ with
/// unitary U, W and σ log-spaced from 1 down to 1/cond.
pub fn random_mixing(n: usize, cond_target: Option<f64>, rng: &mut impl Rng) -> CMat {
    let Some(cond) = cond_target else {
        return gaussian_cmat(n, n, rng);
    };
    let (u, _) = left_singular_vectors(&gaussian_cmat(n, n, rng))
        .expect("Gaussian draw is finite");
    let (w, _) = left_singular_vectors(&gaussian_cmat(n, n, rng))
        .expect("Gaussian draw is finite");
    let sigma: Vec<f64> = (0..n)
        .map(|i| {
            if n == 1 {
                1.0
            } else {
                cond.powf(-(i as f64) / (n as f64 - 1.0))
            }
        })
        .collect();
    let wh = w.t().map(|z| z.conj());
    let mut scaled = wh;
    for (i, &s) in sigma.iter().enumerate() {
        for j in 0..n {
            scaled[[i, j]] *= s;
        }
    }
    u.dot(&scaled)
}

fn diag_cmat(d: &[Complex64]) -> CMat {
    Array2::from_diag(&Array1::from_vec(d.to_vec()))
}

fn measured_mou(d: &[Vec<Complex64>], l: &[Vec<Complex64>]) -> f64 {
    modulus_of_uniqueness(&DiagonalProfiles::from_diagonals(d, l))
}

/// Ties the (1,2) diagonal pair as entry₂ = entry₁ + ε·g_k and bisects on ε
/// until the measured MoU lands in [target, target + 1e-8].
fn tune_mou(
    d: &mut [Vec<Complex64>],
    l: &mut [Vec<Complex64>],
    target: f64,
    rng: &mut impl Rng,
) {
    let gd: Vec<Complex64> = d.iter().map(|_| complex_normal(rng)).collect();
    let gl: Vec<Complex64> = l.iter().map(|_| complex_normal(rng)).collect();
    let apply = |eps: f64, d: &mut [Vec<Complex64>], l: &mut [Vec<Complex64>]| {
        for (k, dk) in d.iter_mut().enumerate() {
            dk[1] = dk[0] + eps * gd[k];
        }
        for (k, lk) in l.iter_mut().enumerate() {
            lk[1] = lk[0] + eps * gl[k];
        }
    };
    let mou_at = |eps: f64, d: &mut [Vec<Complex64>], l: &mut [Vec<Complex64>]| -> f64 {
        apply(eps, d, l);
        measured_mou(d, l)
    };
    let mut lo = 0.0f64; // MoU(0) = 1 ≥ target
    let mut hi = 1.0f64;
    let mut grow = 0;
    while mou_at(hi, d, l) >= target && grow < 60 {
        hi *= 2.0;
        grow += 1;
    }
    for _ in 0..60 {
        if mou_at(lo, d, l) - target <= 1e-8 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mou_at(mid, d, l) >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    apply(lo, d, l);
}

/// Generates a synthetic HJD problem M_k = A D_k Aᴴ (+ noise),
/// N_k = A L_k Aᵀ (+ symmetric noise).
pub fn gen_problem(spec: &ScenarioSpec, rng: &mut impl Rng) -> Result<(TargetSets, GroundTruth)> {
    spec.validate()?;
    let n = spec.n;
    let a = random_mixing(n, spec.cond_target, rng);
    let mut d: Vec<Vec<Complex64>> = (0..spec.k1)
        .map(|_| (0..n).map(|_| complex_normal(rng)).collect())
        .collect();
    let mut l: Vec<Vec<Complex64>> = (0..spec.k2)
        .map(|_| (0..n).map(|_| complex_normal(rng)).collect())
        .collect();
    if let Some(target) = spec.mou_target {
        tune_mou(&mut d, &mut l, target, rng);
    }
    let ah = a.t().map(|z| z.conj());
    let at = a.t().to_owned();
    let mut m: Vec<CMat> = d.iter().map(|dk| a.dot(&diag_cmat(dk)).dot(&ah)).collect();
    let mut nset: Vec<CMat> = l.iter().map(|lk| a.dot(&diag_cmat(lk)).dot(&at)).collect();
    if let Some(snr) = spec.snr_db {
        let amp = 10f64.powf(snr / 10.0);
        for mk in m.iter_mut() {
            let b = gaussian_cmat(n, n, rng);
            let delta = frob(mk) / (frob(&b) * amp);
            *mk = &*mk + &b.map(|z| z * delta);
        }
        for nk in nset.iter_mut() {
            let b = gaussian_cmat(n, n, rng);
            // symmetrize the perturbation first so the SNR holds exactly on
            // the symmetric noise actually added
            let bs = Array2::from_shape_fn((n, n), |(i, j)| (b[[i, j]] + b[[j, i]]) * 0.5);
            let delta = frob(nk) / (frob(&bs) * amp);
            *nk = &*nk + &bs.map(|z| z * delta);
        }
    }
    let sets = TargetSets::new(m, nset)?;
    Ok((sets, GroundTruth { a, d, l }))
}

/// 2×2 lower Cholesky factor.
fn chol2(c11: f64, c12: f64, c22: f64) -> [f64; 3] {
    let l11 = c11.sqrt();
    let l21 = c12 / l11;
    let l22 = (c22 - l21 * l21).max(0.0).sqrt();
    [l11, l21, l22]
}

/// Non-circular unit-power AR(1) sources, burn-in discarded.
pub fn gen_ar1_sources(spec: &BssSpec, rng: &mut impl Rng) -> Result<Array2<Complex64>> {
    spec.validate()?;
    let r2 = spec.rho * std::f64::consts::FRAC_1_SQRT_2;
    let (c11, c12, c22) = match spec.innovation_mode {
        InnovationMode::C1 => (0.5 * (1.0 + r2), 0.5 * r2, 0.5 * (1.0 - r2)),
        InnovationMode::C2 => (0.5 * (1.0 + r2), 0.0, 0.5 * (1.0 - r2)),
    };
    let lc = chol2(c11, c12, c22);
    let mut s = Array2::zeros((spec.n, spec.t));
    for i in 0..spec.n {
        // C2 models sources whose real and imaginary parts are two
        // independent real AR(1) processes. A complex recursion coefficient
        // would re-couple them, so C2 uses the coefficient modulus (which
        // leaves every |E[s(t+τ)s(t)*]| lag profile unchanged).
        let a = match spec.innovation_mode {
            InnovationMode::C1 => spec.ar_coeffs[i],
            InnovationMode::C2 => Complex64::new(spec.ar_coeffs[i].norm(), 0.0),
        };
        let mut cur = Complex64::new(0.0, 0.0);
        let mut power = 0.0;
        for t in 0..BURN_IN + spec.t {
            let (g1, g2) = (normal(rng), normal(rng));
            let o = Complex64::new(lc[0] * g1, lc[1] * g1 + lc[2] * g2);
            cur = a * cur + o;
            if t >= BURN_IN {
                s[[i, t - BURN_IN]] = cur;
                power += cur.norm_sqr();
            }
        }
        let scale = (power / spec.t as f64).sqrt().recip();
        for t in 0..spec.t {
            s[[i, t]] *= scale;
        }
    }
    Ok(s)
}

fn toeplitz_chol(m: usize, base: f64) -> Array2<f64> {
    let c = Array2::from_shape_fn((m, m), |(i, j)| base.powi((i as i32 - j as i32).abs()));
    // in-place Cholesky; the Toeplitz matrix is SPD for |base| < 1
    let mut l: Array2<f64> = Array2::zeros((m, m));
    for i in 0..m {
        for j in 0..=i {
            let mut sum = c[[i, j]];
            for k in 0..j {
                sum -= l[[i, k]] * l[[j, k]];
            }
            if i == j {
                l[[i, j]] = sum.max(0.0).sqrt();
            } else {
                l[[i, j]] = sum / l[[j, j]];
            }
        }
    }
    l
}

/// X = A·S plus additive Gaussian noise scaled to the requested SNR over the
/// whole record.
pub fn mix_observe(
    a: &CMat,
    s: &Array2<Complex64>,
    spec: &BssSpec,
    rng: &mut impl Rng,
) -> Result<Array2<Complex64>> {
    if a.ncols() != s.nrows() {
        return Err(HjdError::DimensionMismatch(format!(
            "mixing is {}x{} but sources have {} rows",
            a.nrows(),
            a.ncols(),
            s.nrows()
        )));
    }
    let x0 = a.dot(s);
    let Some(snr) = spec.snr_db else {
        return Ok(x0);
    };
    let (m, t) = x0.dim();
    let mut w = gaussian_cmat(m, t, rng);
    if let NoiseModel::Colored { base } = spec.noise {
        let lc = toeplitz_chol(m, base).map(|&v| Complex64::new(v, 0.0));
        w = lc.dot(&w);
    }
    let signal_norm = x0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let noise_norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let delta = signal_norm / (noise_norm * 10f64.powf(snr / 10.0));
    Ok(&x0 + &w.map(|z| z * delta))
}

fn lagged_products(x: &Array2<Complex64>, lag: usize, conjugate: bool) -> Result<CMat> {
    let (m, t) = x.dim();
    if lag >= t {
        return Err(HjdError::InvalidConfig(format!(
            "lag {lag} too large for {t} samples"
        )));
    }
    let mut acc: CMat = Array2::zeros((m, m));
    for s in 0..t - lag {
        for i in 0..m {
            let xi = x[[i, s + lag]];
            for j in 0..m {
                let xj = x[[j, s]];
                acc[[i, j]] += xi * if conjugate { xj.conj() } else { xj };
            }
        }
    }
    let scale = 1.0 / (t - lag) as f64;
    Ok(acc.map(|z| z * scale))
}

/// Time-averaged correlation matrices M_τ = E[x(t+τ)x(t)ᴴ] and
/// pseudo-correlations N_τ = E[x(t+τ)x(t)ᵀ] (symmetrized on ingestion).
pub fn estimate_statistics(
    x: &Array2<Complex64>,
    lags_m: &[usize],
    lags_n: &[usize],
) -> Result<TargetSets> {
    let m = lags_m
        .iter()
        .map(|&tau| lagged_products(x, tau, true))
        .collect::<Result<Vec<_>>>()?;
    let n = lags_n
        .iter()
        .map(|&tau| lagged_products(x, tau, false))
        .collect::<Result<Vec<_>>>()?;
    TargetSets::new(m, n)
}

/// Augmented lagged statistics E[x̄(t+τ)x̄(t)ᵀ] of the realified observation.
pub fn estimate_augmented_statistics(x: &Array2<Complex64>, lags: &[usize]) -> Result<AugmentedSet> {
    let mbar = lags
        .iter()
        .map(|&tau| {
            let m = lagged_products(x, tau, true)?;
            let n = lagged_products(x, tau, false)?;
            Ok(augment_statistics(&m, &n))
        })
        .collect::<Result<Vec<_>>>()?;
    AugmentedSet::new(mbar)
}

/// W = Λ_s^{−1/2} U_sᴴ from the n dominant eigenpairs of a covariance.
pub fn whitening_from_covariance(cov: &CMat, n_sources: usize) -> Result<CMat> {
    let m = cov.nrows();
    if n_sources > m {
        return Err(HjdError::CovarianceRank {
            found: m,
            wanted: n_sources,
        });
    }
    let (vals, vecs) = eigh_hermitian(cov); // descending
    let lmax = vals.first().copied().unwrap_or(0.0);
    if lmax <= 0.0 || vals[n_sources - 1] <= tol::WHITEN_EIG * lmax {
        return Err(HjdError::CovarianceRank {
            found: vals.iter().filter(|&&v| v > tol::WHITEN_EIG * lmax).count(),
            wanted: n_sources,
        });
    }
    let mut w: CMat = Array2::zeros((n_sources, m));
    for i in 0..n_sources {
        let scale = vals[i].sqrt().recip();
        for j in 0..m {
            w[[i, j]] = vecs[[j, i]].conj() * scale;
        }
    }
    Ok(w)
}

/// Pre-whitening from the sample zero-lag covariance; returns (W, Z = WX).
pub fn prewhiten(x: &Array2<Complex64>, n_sources: usize) -> Result<(CMat, Array2<Complex64>)> {
    let (m, t) = x.dim();
    let mut cov: CMat = Array2::zeros((m, m));
    for s in 0..t {
        for i in 0..m {
            for j in 0..m {
                cov[[i, j]] += x[[i, s]] * x[[j, s]].conj();
            }
        }
    }
    let cov = cov.map(|z| z / t as f64);
    let w = whitening_from_covariance(&cov, n_sources)?;
    Ok((w.clone(), w.dot(x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{jd_cost, snr_db, SnrConvention};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn spec(n: usize, k1: usize, k2: usize) -> ScenarioSpec {
        ScenarioSpec {
            n,
            k1,
            k2,
            cond_target: None,
            snr_db: None,
            mou_target: None,
            seed: 0,
        }
    }

    fn bss(rho: f64) -> BssSpec {
        BssSpec {
            m: 5,
            n: 3,
            t: 1000,
            ar_coeffs: default_ar_coeffs(),
            rho,
            innovation_mode: InnovationMode::C1,
            noise: NoiseModel::White,
            snr_db: Some(20.0),
            lags_m: default_lags(),
            lags_n: default_pseudo_lags(),
            seed: 0,
        }
    }

    #[test]
    fn random_mixing_condition_control() {
        let mut r = rng(61);
        let a = random_mixing(4, Some(1.0), &mut r);
        let ah = a.t().map(|z| z.conj());
        let eye: CMat = Array2::eye(4);
        assert!(frob(&(&ah.dot(&a) - &eye)) < 1e-10);

        let a = random_mixing(5, Some(100.0), &mut r);
        let (_, sv) = left_singular_vectors(&a).unwrap();
        let cond = sv[0] / sv[sv.len() - 1];
        assert!((cond - 100.0).abs() < 1.0, "cond {cond}");
    }

    #[test]
    fn random_mixing_gaussian_moments() {
        let mut r = rng(62);
        let mut sum = Complex64::new(0.0, 0.0);
        let mut sq = 0.0;
        let draws = 20_000;
        for _ in 0..draws {
            let z = complex_normal(&mut r);
            sum += z;
            sq += z.norm_sqr();
        }
        assert!((sum / draws as f64).norm() < 0.02);
        assert!((sq / draws as f64 - 1.0).abs() < 0.05);
    }

    #[test]
    fn gen_problem_exact_is_exact() {
        let mut r = rng(63);
        let (sets, gt) = gen_problem(&spec(4, 3, 3), &mut r).unwrap();
        let ah = gt.a.t().map(|z| z.conj());
        for (mk, dk) in sets.m.iter().zip(&gt.d) {
            let want = gt.a.dot(&diag_cmat(dk)).dot(&ah);
            assert!(frob(&(mk - &want)) < 1e-13 * frob(&want).max(1.0));
        }
        // unitary A: the true diagonalizer is A itself
        let mut r = rng(64);
        let s = ScenarioSpec {
            cond_target: Some(1.0),
            ..spec(4, 3, 3)
        };
        let (sets, gt) = gen_problem(&s, &mut r).unwrap();
        assert!(jd_cost(&sets, &gt.a) <= 1e-14 * sets.total_energy());
    }

    #[test]
    fn gen_problem_snr_exact() {
        let mut r = rng(65);
        let s = ScenarioSpec {
            snr_db: Some(30.0),
            ..spec(4, 3, 3)
        };
        let (sets, gt) = gen_problem(&s, &mut r).unwrap();
        let ah = gt.a.t().map(|z| z.conj());
        let at = gt.a.t().to_owned();
        for (mk, dk) in sets.m.iter().zip(&gt.d) {
            let signal = gt.a.dot(&diag_cmat(dk)).dot(&ah);
            let noise = mk - &signal;
            let snr = snr_db(&signal, &noise, SnrConvention::Literal);
            assert!((snr - 30.0).abs() < 1e-9, "snr {snr}");
        }
        for (nk, lk) in sets.n.iter().zip(&gt.l) {
            let signal = gt.a.dot(&diag_cmat(lk)).dot(&at);
            let noise = nk - &signal;
            let snr = snr_db(&signal, &noise, SnrConvention::Literal);
            assert!((snr - 30.0).abs() < 1e-9, "snr {snr}");
        }
    }

    #[test]
    fn gen_problem_mou_bisection() {
        let target = 1.0 - 1e-6;
        let mut r = rng(66);
        let s = ScenarioSpec {
            mou_target: Some(target),
            ..spec(4, 5, 5)
        };
        let (_, gt) = gen_problem(&s, &mut r).unwrap();
        let mou = measured_mou(&gt.d, &gt.l);
        assert!(mou >= target, "mou {mou}");
        assert!(mou - target <= 1e-8, "overshoot {}", mou - target);
    }

    #[test]
    fn gen_problem_deterministic() {
        let s = ScenarioSpec {
            snr_db: Some(20.0),
            mou_target: Some(0.9),
            cond_target: Some(50.0),
            ..spec(5, 4, 4)
        };
        let (sets1, _) = gen_problem(&s, &mut rng(67)).unwrap();
        let (sets2, _) = gen_problem(&s, &mut rng(67)).unwrap();
        for (a, b) in sets1.m.iter().zip(&sets2.m) {
            assert_eq!(a, b);
        }
        for (a, b) in sets1.n.iter().zip(&sets2.n) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn ar1_sources_statistics() {
        let t = 20_000;
        let mut s0 = bss(0.0);
        s0.t = t;
        let mut r = rng(68);
        let src = gen_ar1_sources(&s0, &mut r).unwrap();
        // circular case: pseudo-variance near zero
        for i in 0..3 {
            let pseudo: Complex64 = (0..t).map(|k| src[[i, k]] * src[[i, k]]).sum::<Complex64>()
                / t as f64;
            // AR(1) pseudo-covariance of circular innovations is 0
            assert!(pseudo.norm() < 3.0 / (t as f64).sqrt() * 3.0, "{}", pseudo.norm());
        }
        // unit power by construction
        for i in 0..3 {
            let p: f64 = (0..t).map(|k| src[[i, k]].norm_sqr()).sum::<f64>() / t as f64;
            assert!((p - 1.0).abs() < 1e-12);
        }
        // lag-1 autocorrelation of source 0 ≈ a₁ = 0.95
        let mut lag1 = Complex64::new(0.0, 0.0);
        for k in 0..t - 1 {
            lag1 += src[[0, k + 1]] * src[[0, k]].conj();
        }
        let lag1 = lag1 / (t - 1) as f64;
        assert!((lag1.re - 0.95).abs() < 5.0 / (t as f64).sqrt() * 5.0, "{}", lag1.re);

        // C2 innovations: Re/Im of the innovation are uncorrelated
        let mut s2 = bss(0.9);
        s2.innovation_mode = InnovationMode::C2;
        s2.ar_coeffs[0] = Complex64::new(0.0, 0.0); // innovations only
        s2.t = t;
        let src = gen_ar1_sources(&s2, &mut rng(69)).unwrap();
        let mut cross = 0.0;
        for k in 0..t {
            cross += src[[0, k]].re * src[[0, k]].im;
        }
        assert!((cross / t as f64).abs() < 3.0 / (t as f64).sqrt());
    }

    #[test]
    fn mix_observe_snr_and_coloring() {
        let mut r = rng(70);
        let s = bss(0.5);
        let src = gen_ar1_sources(&s, &mut r).unwrap();
        let a = gaussian_cmat(5, 3, &mut r);

        let mut clean = s.clone();
        clean.snr_db = None;
        let x = mix_observe(&a, &src, &clean, &mut r).unwrap();
        assert!(frob(&(&x - &a.dot(&src))) == 0.0);

        let x = mix_observe(&a, &src, &s, &mut r).unwrap();
        let w = &x - &a.dot(&src);
        let x0 = a.dot(&src);
        let sn = x0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let nn = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!((10.0 * (sn / nn).log10() - 20.0).abs() < 1e-9);

        // colored noise: offset-1 spatial correlation ≈ 0.8
        let mut col = s.clone();
        col.noise = NoiseModel::Colored { base: 0.8 };
        col.snr_db = Some(0.0);
        let mut big = col.clone();
        big.t = 20_000;
        let src = gen_ar1_sources(&big, &mut r).unwrap();
        let x = mix_observe(&a, &src, &big, &mut r).unwrap();
        let w = &x - &a.dot(&src);
        let t = big.t;
        let mut c0 = 0.0;
        let mut c1 = Complex64::new(0.0, 0.0);
        for k in 0..t {
            for i in 0..5 {
                c0 += w[[i, k]].norm_sqr();
            }
            for i in 0..4 {
                c1 += w[[i, k]] * w[[i + 1, k]].conj();
            }
        }
        let corr = c1.norm() / (c0 * 4.0 / 5.0);
        assert!((corr - 0.8).abs() < 0.05, "corr {corr}");
    }

    #[test]
    fn estimate_statistics_ar_theory() {
        let mut s = bss(0.3);
        s.m = 1;
        s.n = 1;
        s.t = 20_000;
        s.snr_db = None;
        let mut r = rng(71);
        let src = gen_ar1_sources(&s, &mut r).unwrap();
        let a: CMat = Array2::eye(1);
        let x = mix_observe(&a, &src, &s, &mut r).unwrap();
        let sets = estimate_statistics(&x, &[1, 2], &[]).unwrap();
        let a1 = Complex64::new(0.95, 0.0);
        let tol = 5.0 / (s.t as f64).sqrt();
        assert!((sets.m[0][[0, 0]] - a1).norm() < tol * 3.0);
        assert!((sets.m[1][[0, 0]] - a1 * a1).norm() < tol * 3.0);
    }

    #[test]
    fn estimate_augmented_matches_direct_realification() {
        let mut r = rng(72);
        let s = bss(0.7);
        let src = gen_ar1_sources(&s, &mut r).unwrap();
        let a = gaussian_cmat(5, 3, &mut r);
        let x = mix_observe(&a, &src, &s, &mut r).unwrap();
        let set = estimate_augmented_statistics(&x, &[1]).unwrap();
        // direct computation on x̄(t) = [Re x; Im x]
        let (m, t) = x.dim();
        let xbar = Array2::from_shape_fn((2 * m, t), |(i, k)| {
            if i < m {
                x[[i, k]].re
            } else {
                x[[i - m, k]].im
            }
        });
        let mut direct: Array2<f64> = Array2::zeros((2 * m, 2 * m));
        for k in 0..t - 1 {
            for i in 0..2 * m {
                for j in 0..2 * m {
                    direct[[i, j]] += xbar[[i, k + 1]] * xbar[[j, k]];
                }
            }
        }
        let direct = direct.map(|v| v / (t - 1) as f64);
        let sym = (&direct + &direct.t()) * 0.5;
        let err = (&set.mbar[0] - &sym).iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(err < 1e-12, "err {err}");
    }

    #[test]
    fn whitening_analytic_and_sample() {
        let mut r = rng(73);
        // analytic path: cov = AAᴴ with m = 5, n = 3
        let a = gaussian_cmat(5, 3, &mut r);
        let cov = a.dot(&a.t().map(|z| z.conj()));
        let w = whitening_from_covariance(&cov, 3).unwrap();
        assert_eq!(w.dim(), (3, 5));
        let wa = w.dot(&a);
        let g = wa.dot(&wa.t().map(|z| z.conj()));
        let eye: CMat = Array2::eye(3);
        assert!(frob(&(&g - &eye)) < 1e-10);

        // rank failure
        let a2 = gaussian_cmat(5, 2, &mut r);
        let cov2 = a2.dot(&a2.t().map(|z| z.conj()));
        assert!(matches!(
            whitening_from_covariance(&cov2, 3),
            Err(HjdError::CovarianceRank { .. })
        ));

        // sample path: whitened covariance is I within sampling error
        let mut s = bss(0.5);
        s.t = 5_000;
        let src = gen_ar1_sources(&s, &mut rng(74)).unwrap();
        let x = mix_observe(&a, &src, &s, &mut rng(75)).unwrap();
        let (_, z) = prewhiten(&x, 3).unwrap();
        let t = s.t;
        let mut cz: CMat = Array2::zeros((3, 3));
        for k in 0..t {
            for i in 0..3 {
                for j in 0..3 {
                    cz[[i, j]] += z[[i, k]] * z[[j, k]].conj();
                }
            }
        }
        let cz = cz.map(|v| v / t as f64);
        let eye: CMat = Array2::eye(3);
        assert!(frob(&(&cz - &eye)) < 1e-10);
    }
}
