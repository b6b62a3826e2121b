//! Synthetic harmonic scenes, sensing operators and noisy measurements.
//!
//! Every generator is a pure function of its parameters and a `u64` seed.
//! Randomness comes from ChaCha8 streams; normal variates use the Marsaglia
//! polar method on top of the stream's uniform doubles, so the seed to value
//! map only depends on this crate and the pinned `rand_chacha` stream.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dictionary::{base_frequency, half_bin, Overcompleteness};
use crate::error::{Error, Result};

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent child seed from a master seed and a path of labels
/// (trial index, sparsity, stream id, ...). Order of the labels matters.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix64(master), |acc, &p| mix64(acc ^ mix64(p)))
}

pub(crate) fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard normal variate via the Marsaglia polar method (one value per call).
pub(crate) fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u = 2.0 * rng.gen::<f64>() - 1.0;
        let v = 2.0 * rng.gen::<f64>() - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            return u * (-2.0 * s.ln() / s).sqrt();
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tone {
    /// Grid bin `k`; the base frequency is `k / QN`.
    pub bin: usize,
    pub perturbation: f64,
    /// `k / QN + perturbation`, cycles per sample.
    pub frequency: f64,
    /// Radians in `[0, 2 pi)`.
    pub phase: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneOptions {
    /// Draw bins from `1..QN/2` instead of `0..QN/2`.
    pub exclude_dc_bin: bool,
    /// Force every phase to zero.
    pub zero_phase: bool,
    /// Force every perturbation to zero.
    pub on_grid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicScene {
    pub n_samples: usize,
    pub overcompleteness: Overcompleteness,
    /// Real coefficient count `S`; the scene has `S / 2` tones.
    pub sparsity: usize,
    pub tones: Vec<Tone>,
    pub clean_signal: Vec<f64>,
}

impl HarmonicScene {
    /// Builds a scene from explicit tones, sampling at `tau = 0, 1, ..., N-1`.
    pub fn from_tones(n_samples: usize, q: Overcompleteness, tones: Vec<Tone>) -> Result<Self> {
        let grid = q.grid_size(n_samples)?;
        let bound = half_bin(grid);
        for t in &tones {
            if t.bin >= grid / 2 {
                return Err(Error::IndexOutOfRange {
                    index: t.bin,
                    len: grid / 2,
                });
            }
            if t.perturbation.abs() > bound {
                return Err(Error::PerturbationOutOfBounds {
                    index: t.bin,
                    value: t.perturbation,
                    bound,
                });
            }
        }
        let clean_signal = (0..n_samples)
            .map(|n| {
                tones
                    .iter()
                    .map(|t| t.amplitude * (2.0 * PI * t.frequency * n as f64 + t.phase).cos())
                    .sum()
            })
            .collect();
        Ok(HarmonicScene {
            n_samples,
            overcompleteness: q,
            sparsity: 2 * tones.len(),
            tones,
            clean_signal,
        })
    }

    pub fn clean(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.clean_signal)
    }

    pub fn rms(&self) -> f64 {
        let energy: f64 = self.clean_signal.iter().map(|v| v * v).sum();
        (energy / self.n_samples as f64).sqrt()
    }
}

/// Random off-grid scene with `s / 2` tones of amplitude `sqrt(2/N)`.
pub fn generate_scene(
    n: usize,
    s: usize,
    q: Overcompleteness,
    seed: u64,
    options: SceneOptions,
) -> Result<HarmonicScene> {
    if s % 2 != 0 {
        return Err(Error::InvalidParameter(format!("sparsity {s} must be even")));
    }
    let grid = q.grid_size(n)?;
    let first_bin = usize::from(options.exclude_dc_bin);
    let available = grid / 2 - first_bin;
    let count = s / 2;
    if count > available {
        return Err(Error::InvalidParameter(format!(
            "{count} tones requested but only {available} bins available"
        )));
    }

    let mut rng = rng_from_seed(seed);
    let bins = index::sample(&mut rng, available, count);
    let bound = half_bin(grid);
    let amplitude = (2.0 / n as f64).sqrt();
    let mut tones = Vec::with_capacity(count);
    for b in bins.iter() {
        let bin = b + first_bin;
        // draws happen even when forced to zero so the stream layout is fixed
        let raw_theta = rng.gen_range(-bound..bound);
        let raw_phase = rng.gen_range(0.0..2.0 * PI);
        let perturbation = if options.on_grid { 0.0 } else { raw_theta };
        let phase = if options.zero_phase { 0.0 } else { raw_phase };
        tones.push(Tone {
            bin,
            perturbation,
            frequency: base_frequency(bin, grid) + perturbation,
            phase,
            amplitude,
        });
    }
    HarmonicScene::from_tones(n, q, tones)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SensingKind {
    Gaussian,
    Subsample,
}

impl std::str::FromStr for SensingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "gaussian" => Ok(SensingKind::Gaussian),
            "subsample" | "temporal-subsample" => Ok(SensingKind::Subsample),
            other => Err(Error::InvalidParameter(format!("unknown sensing kind `{other}`"))),
        }
    }
}

impl std::fmt::Display for SensingKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SensingKind::Gaussian => "gaussian",
            SensingKind::Subsample => "subsample",
        })
    }
}

/// Enough to regenerate a [`SensingOperator`] bit for bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SensingSpec {
    pub kind: SensingKind,
    pub rows: usize,
    pub cols: usize,
    pub seed: u64,
}

impl SensingSpec {
    pub fn build(&self) -> Result<SensingOperator> {
        match self.kind {
            SensingKind::Gaussian => gaussian_sensing(self.rows, self.cols, self.seed),
            SensingKind::Subsample => temporal_subsample_sensing(self.rows, self.cols, self.seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensingOperator {
    spec: SensingSpec,
    matrix: DMatrix<f64>,
    selected: Vec<usize>,
}

impl SensingOperator {
    pub fn kind(&self) -> SensingKind {
        self.spec.kind
    }

    pub fn rows(&self) -> usize {
        self.spec.rows
    }

    pub fn cols(&self) -> usize {
        self.spec.cols
    }

    pub fn spec(&self) -> SensingSpec {
        self.spec
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Sample times kept by a subsampling operator (empty for Gaussian).
    pub fn selected_indices(&self) -> &[usize] {
        &self.selected
    }

    /// `A v`.
    pub fn apply(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        if v.len() != self.cols() {
            return Err(Error::Dimension(format!(
                "operator has {} columns, vector has length {}",
                self.cols(),
                v.len()
            )));
        }
        Ok(match self.kind() {
            SensingKind::Gaussian => &self.matrix * v,
            SensingKind::Subsample => DVector::from_iterator(self.rows(), self.selected.iter().map(|&i| v[i])),
        })
    }

    /// `A Psi` for a dictionary matrix `Psi` with `N` rows.
    pub fn compose(&self, psi: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if psi.nrows() != self.cols() {
            return Err(Error::Dimension(format!(
                "operator has {} columns, dictionary has {} rows",
                self.cols(),
                psi.nrows()
            )));
        }
        Ok(match self.kind() {
            SensingKind::Gaussian => &self.matrix * psi,
            SensingKind::Subsample => psi.select_rows(self.selected.iter()),
        })
    }
}

/// Dense `m x n` matrix of independent standard normal entries.
pub fn gaussian_sensing(m: usize, n: usize, seed: u64) -> Result<SensingOperator> {
    if m == 0 || m > n {
        return Err(Error::InvalidParameter(format!(
            "gaussian sensing needs 1 <= m <= n, got m={m}, n={n}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    // filled row by row so a row prefix does not depend on n
    let mut matrix = DMatrix::zeros(m, n);
    for r in 0..m {
        for c in 0..n {
            matrix[(r, c)] = standard_normal(&mut rng);
        }
    }
    Ok(SensingOperator {
        spec: SensingSpec {
            kind: SensingKind::Gaussian,
            rows: m,
            cols: n,
            seed,
        },
        matrix,
        selected: Vec::new(),
    })
}

/// Keeps `m` distinct sample times (sorted), one `1` per row.
pub fn temporal_subsample_sensing(m: usize, n: usize, seed: u64) -> Result<SensingOperator> {
    if m == 0 || m > n {
        return Err(Error::InvalidParameter(format!(
            "temporal subsampling needs 1 <= m <= n, got m={m}, n={n}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut selected = index::sample(&mut rng, n, m).into_vec();
    selected.sort_unstable();
    let mut matrix = DMatrix::zeros(m, n);
    for (r, &c) in selected.iter().enumerate() {
        matrix[(r, c)] = 1.0;
    }
    Ok(SensingOperator {
        spec: SensingSpec {
            kind: SensingKind::Subsample,
            rows: m,
            cols: n,
            seed,
        },
        matrix,
        selected,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub y: Vec<f64>,
    pub noise_sigma: f64,
    /// `None` for a noiseless measurement.
    pub snr_db: Option<f64>,
    pub noise: Vec<f64>,
}

impl Measurement {
    pub fn target(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.y)
    }
}

/// `y = A z + eta` with `sigma = rms(z) / 10^(snr_db / 20)`.
///
/// `snr_db = +inf` gives a noiseless measurement.
pub fn measure(scene: &HarmonicScene, a: &SensingOperator, snr_db: f64, seed: u64) -> Result<Measurement> {
    if a.cols() != scene.n_samples {
        return Err(Error::Dimension(format!(
            "operator has {} columns, scene has {} samples",
            a.cols(),
            scene.n_samples
        )));
    }
    if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
        return Err(Error::InvalidParameter(format!("snr_db = {snr_db}")));
    }
    let clean = a.apply(&scene.clean())?;
    let noiseless = snr_db == f64::INFINITY;
    let sigma = if noiseless {
        0.0
    } else {
        scene.rms() / 10f64.powf(snr_db / 20.0)
    };
    let noise: Vec<f64> = if noiseless {
        vec![0.0; a.rows()]
    } else {
        let mut rng = rng_from_seed(seed);
        (0..a.rows()).map(|_| sigma * standard_normal(&mut rng)).collect()
    };
    let y = clean.iter().zip(&noise).map(|(c, e)| c + e).collect();
    Ok(Measurement {
        y,
        noise_sigma: sigma,
        snr_db: (!noiseless).then_some(snr_db),
        noise,
    })
}
