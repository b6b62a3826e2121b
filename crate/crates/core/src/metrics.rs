//! Reconstruction and support-fidelity measures.
//!
//! Tones carry a complex amplitude `c + i s` built from the cosine/sine
//! coefficient pair of one frequency index. A true tone with phase `phi`
//! expands onto the pair as `(cos phi, sin phi)`, so its amplitude is
//! `exp(i phi)` and a perfect estimate has zero support error.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::acs::RecoveryResult;
use crate::dictionary::pair_indices;
use crate::error::{Error, Result};
use crate::signals::HarmonicScene;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToneEstimate {
    pub frequency: f64,
    pub amplitude: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToneSet {
    pub tones: Vec<ToneEstimate>,
    /// Closeness window used when this set is the reference.
    pub epsilon: f64,
}

/// Default closeness window, a fifth of a bin: `1 / (5 QN)`.
pub fn default_epsilon(grid: usize) -> f64 {
    1.0 / (5.0 * grid as f64)
}

/// `||z - z_hat||^2 / ||z||^2` (a squared ratio, despite the name).
pub fn normalized_rmse(z: &[f64], z_hat: &[f64]) -> Result<f64> {
    if z.len() != z_hat.len() {
        return Err(Error::Dimension(format!(
            "reference has length {}, estimate has length {}",
            z.len(),
            z_hat.len()
        )));
    }
    let reference: f64 = z.iter().map(|v| v * v).sum();
    if reference == 0.0 {
        return Err(Error::ZeroReference);
    }
    let diff: f64 = z.iter().zip(z_hat).map(|(a, b)| (a - b).powi(2)).sum();
    Ok(diff / reference)
}

/// Frequency indices whose paired coefficients have modulus at least `kappa`.
pub fn extract_tones(result: &RecoveryResult, kappa: f64) -> ToneSet {
    let grid = result.grid_size();
    let tones = (0..grid / 2)
        .filter_map(|j| {
            let (c, s) = pair_indices(j, grid).ok()?;
            let amplitude = Complex64::new(result.x_hat[c], result.x_hat[s]);
            let present = amplitude.norm() >= kappa && amplitude.norm() > 0.0;
            present.then(|| ToneEstimate {
                frequency: j as f64 / grid as f64 + result.theta_hat[j],
                amplitude,
            })
        })
        .collect();
    ToneSet {
        tones,
        epsilon: default_epsilon(grid),
    }
}

/// Reference tones of a scene with `epsilon = 1 / (5 QN)` on the scene's grid.
///
/// A tone whose perturbation pushes it below zero is folded onto `|f|` with
/// the conjugate amplitude.
pub fn truth_tones(scene: &HarmonicScene) -> Result<ToneSet> {
    let grid = scene.overcompleteness.grid_size(scene.n_samples)?;
    let tones = scene
        .tones
        .iter()
        .map(|t| {
            let amplitude = Complex64::from_polar(1.0, t.phase);
            if t.frequency < 0.0 {
                ToneEstimate {
                    frequency: -t.frequency,
                    amplitude: amplitude.conj(),
                }
            } else {
                ToneEstimate {
                    frequency: t.frequency,
                    amplitude,
                }
            }
        })
        .collect();
    Ok(ToneSet {
        tones,
        epsilon: default_epsilon(grid),
    })
}

/// `sum_i |x_i - sum_{j : |f_j - f_i| < eps} x_hat_j|` with `eps` taken from `truth`.
///
/// Estimated tones outside every window do not contribute.
pub fn support_err(truth: &ToneSet, estimate: &ToneSet) -> f64 {
    truth
        .tones
        .iter()
        .map(|t| {
            let matched: Complex64 = estimate
                .tones
                .iter()
                .filter(|e| (e.frequency - t.frequency).abs() < truth.epsilon)
                .map(|e| e.amplitude)
                .sum();
            (t.amplitude - matched).norm()
        })
        .sum()
}

/// True when every reference tone has at least one estimate within its window.
pub fn all_tones_located(truth: &ToneSet, estimate: &ToneSet) -> bool {
    truth.tones.iter().all(|t| {
        estimate
            .tones
            .iter()
            .any(|e| (e.frequency - t.frequency).abs() < truth.epsilon)
    })
}

/// Convenience: normalized RMSE of a result against a scene.
pub fn scene_rmse(scene: &HarmonicScene, result: &RecoveryResult) -> Result<f64> {
    normalized_rmse(&scene.clean_signal, &result.z_hat)
}
