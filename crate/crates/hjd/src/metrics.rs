//! JD quality and problem-difficulty measures: off/on energies, the joint
//! diagonalization cost, the performance index, modulus of uniqueness and
//! the SNR convention used by the noise generator.

use ndarray::Array2;
use num_complex::Complex64;

use crate::kernels::{frob, CMat};
use crate::orthogonal::TargetSets;
use crate::{HjdError, Result};

/// Sum of squared moduli of the off-diagonal entries.
pub fn off_energy(x: &CMat) -> f64 {
    let n = x.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += x[[i, j]].norm_sqr();
            }
        }
    }
    s
}

/// Real off-diagonal energy (augmented-statistics variant).
pub fn off_energy_real(x: &Array2<f64>) -> f64 {
    let n = x.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += x[[i, j]] * x[[i, j]];
            }
        }
    }
    s
}

/// Joint diagonalization cost: Σ off(VᴴM_kV) + Σ off(VᴴN_kV*).
pub fn jd_cost(sets: &TargetSets, v: &CMat) -> f64 {
    let vh = v.t().map(|z| z.conj());
    let vc = v.map(|z| z.conj());
    let mut s = 0.0;
    for m in &sets.m {
        s += off_energy(&vh.dot(m).dot(v));
    }
    for n in &sets.n {
        s += off_energy(&vh.dot(n).dot(&vc));
    }
    s
}

/// Performance index of a global matrix P: 0 iff P is a permutation times a
/// non-singular diagonal, at most 1 for fully mixed P.
pub fn performance_index(p: &CMat) -> Result<f64> {
    let n = p.nrows();
    if n != p.ncols() {
        return Err(HjdError::DimensionMismatch(
            "performance_index expects square".into(),
        ));
    }
    if n < 2 {
        return Ok(0.0);
    }
    let mut row_sum = 0.0;
    for l in 0..n {
        let mx = (0..n)
            .map(|k| p[[l, k]].norm_sqr())
            .fold(0.0f64, f64::max);
        if mx <= 0.0 {
            return Err(HjdError::UndefinedPi);
        }
        for m in 0..n {
            row_sum += p[[l, m]].norm_sqr() / mx;
        }
        row_sum -= 1.0;
    }
    let mut col_sum = 0.0;
    for m in 0..n {
        let mx = (0..n)
            .map(|k| p[[k, m]].norm_sqr())
            .fold(0.0f64, f64::max);
        if mx <= 0.0 {
            return Err(HjdError::UndefinedPi);
        }
        for l in 0..n {
            col_sum += p[[l, m]].norm_sqr() / mx;
        }
        col_sum -= 1.0;
    }
    let norm = 2.0 * (n as f64) * (n as f64 - 1.0);
    Ok((row_sum + col_sum) / norm)
}

/// Real-matrix convenience wrapper for the augmented solver (P̄ = V̄ᵀĀ).
pub fn performance_index_real(p: &Array2<f64>) -> Result<f64> {
    let c = p.map(|&x| Complex64::new(x, 0.0));
    performance_index(&c)
}

/// Diagonal-entry profiles: row i collects the i-th diagonal entry of every
/// D_k followed by every L_k.
#[derive(Debug, Clone)]
pub struct DiagonalProfiles {
    pub profiles: Vec<Vec<Complex64>>,
}

impl DiagonalProfiles {
    pub fn from_diagonals(d: &[Vec<Complex64>], l: &[Vec<Complex64>]) -> Self {
        let n = d
            .first()
            .map(|v| v.len())
            .or_else(|| l.first().map(|v| v.len()))
            .unwrap_or(0);
        let profiles = (0..n)
            .map(|i| {
                d.iter()
                    .map(|dk| dk[i])
                    .chain(l.iter().map(|lk| lk[i]))
                    .collect()
            })
            .collect();
        DiagonalProfiles { profiles }
    }
}

/// Modulus of uniqueness: max over i ≠ j of |d_iᴴd_j| / (‖d_i‖‖d_j‖).
pub fn modulus_of_uniqueness(profiles: &DiagonalProfiles) -> f64 {
    let n = profiles.profiles.len();
    let mut mou = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let di = &profiles.profiles[i];
            let dj = &profiles.profiles[j];
            let dot: Complex64 = di.iter().zip(dj).map(|(a, b)| a.conj() * b).sum();
            let ni: f64 = di.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let nj: f64 = dj.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if ni > 0.0 && nj > 0.0 {
                mou = mou.max(dot.norm() / (ni * nj));
            }
        }
    }
    mou
}

/// SNR convention selector.
///
/// `Literal` is 10·log₁₀ of the Frobenius-norm ratio (the definition the
/// noise model is calibrated against); `Conventional` is the usual energy
/// ratio, 20·log₁₀ of the same amplitude ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SnrConvention {
    #[default]
    Literal,
    Conventional,
}

pub fn snr_db(signal: &CMat, noise: &CMat, convention: SnrConvention) -> f64 {
    let ratio = frob(signal) / frob(noise);
    match convention {
        SnrConvention::Literal => 10.0 * ratio.log10(),
        SnrConvention::Conventional => 20.0 * ratio.log10(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{arr1, Array2};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rand_cmat(n: usize, r: &mut impl Rng) -> CMat {
        Array2::from_shape_fn((n, n), |_| {
            Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))
        })
    }

    #[test]
    fn off_energy_cases() {
        let d = Array2::from_diag(&arr1(&[
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 3.0),
        ]));
        assert_eq!(off_energy(&d), 0.0);

        let ones = Array2::from_elem((3, 3), Complex64::new(1.0, 0.0));
        assert!((off_energy(&ones) - 6.0).abs() < 1e-15);

        let mut r = ChaCha8Rng::seed_from_u64(21);
        let x = rand_cmat(4, &mut r);
        let on: f64 = (0..4).map(|i| x[[i, i]].norm_sqr()).sum();
        assert!((off_energy(&x) + on - frob(&x).powi(2)).abs() < 1e-13);
    }

    #[test]
    fn pi_identity_and_permutation_diagonal() {
        let eye: CMat = Array2::eye(4);
        assert_eq!(performance_index(&eye).unwrap(), 0.0);

        let mut r = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..50 {
            let n = 4;
            let mut perm: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                perm.swap(i, r.gen_range(0..=i));
            }
            let mut p: CMat = Array2::zeros((n, n));
            for (i, &pi) in perm.iter().enumerate() {
                p[[i, pi]] = Complex64::from_polar(r.gen_range(0.1..3.0), r.gen_range(0.0..6.28));
            }
            assert!(performance_index(&p).unwrap() < 1e-12);
        }
    }

    #[test]
    fn pi_all_ones_2x2_is_one() {
        let ones = Array2::from_elem((2, 2), Complex64::new(1.0, 0.0));
        assert!((performance_index(&ones).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pi_invariance_under_permutation_and_phases() {
        // PI depends only on entry moduli, so it is exactly invariant under
        // permutations combined with unit-modulus scalings on either side.
        let mut r = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..50 {
            let n = 5;
            let p0 = rand_cmat(n, &mut r);
            let base = performance_index(&p0).unwrap();
            let mut perm: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                perm.swap(i, r.gen_range(0..=i));
            }
            let mut pl: CMat = Array2::zeros((n, n));
            for (i, &pi) in perm.iter().enumerate() {
                pl[[i, pi]] = Complex64::from_polar(1.0, r.gen_range(0.0..6.28));
            }
            let left = performance_index(&pl.dot(&p0)).unwrap();
            assert!((left - base).abs() <= 1e-12);
            let right = performance_index(&p0.dot(&pl)).unwrap();
            assert!((right - base).abs() <= 1e-12);
        }
    }

    #[test]
    fn pi_zero_column_is_error() {
        let mut p: CMat = Array2::eye(3);
        p[[2, 2]] = Complex64::new(0.0, 0.0);
        assert!(matches!(performance_index(&p), Err(HjdError::UndefinedPi)));
    }

    #[test]
    fn mou_cases() {
        // Orthogonal profiles
        let d = vec![
            vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        ];
        let prof = DiagonalProfiles::from_diagonals(&d, &[]);
        assert_eq!(modulus_of_uniqueness(&prof), 0.0);

        // Identical profiles
        let d = vec![
            vec![Complex64::new(1.0, 1.0), Complex64::new(1.0, 1.0)],
            vec![Complex64::new(2.0, 0.5), Complex64::new(2.0, 0.5)],
        ];
        let prof = DiagonalProfiles::from_diagonals(&d, &[]);
        assert!((modulus_of_uniqueness(&prof) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mou_matches_brute_force() {
        let mut r = ChaCha8Rng::seed_from_u64(24);
        for _ in 0..200 {
            let n = 4;
            let k = 6;
            let d: Vec<Vec<Complex64>> = (0..k)
                .map(|_| {
                    (0..n)
                        .map(|_| Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)))
                        .collect()
                })
                .collect();
            let prof = DiagonalProfiles::from_diagonals(&d, &[]);
            let got = modulus_of_uniqueness(&prof);
            let mut want = 0.0f64;
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let mut dot = Complex64::new(0.0, 0.0);
                    let mut ni = 0.0;
                    let mut nj = 0.0;
                    for dk in &d {
                        dot += dk[i].conj() * dk[j];
                        ni += dk[i].norm_sqr();
                        nj += dk[j].norm_sqr();
                    }
                    want = want.max(dot.norm() / (ni.sqrt() * nj.sqrt()));
                }
            }
            assert!((got - want).abs() <= 1e-14);
        }
    }

    #[test]
    fn snr_cases() {
        let s = Array2::from_elem((2, 2), Complex64::new(1.0, 0.0));
        assert!(snr_db(&s, &s, SnrConvention::Literal).abs() < 1e-12);
        let w = s.map(|z| z / 10.0);
        assert!((snr_db(&s, &w, SnrConvention::Literal) - 10.0).abs() < 1e-12);
        assert!((snr_db(&s, &w, SnrConvention::Conventional) - 20.0).abs() < 1e-12);
    }
}
