//! Numerical checks of the convexity analysis behind the frequency step.
//!
//! The analysis studies a single sine tone `x sin(2 pi f n)` against an
//! estimate `x_hat sin(2 pi (f + theta) n)`. Through a random operator `A`
//! with i.i.d. zero-mean entries of variance `sigma_A^2`, the scaled residual
//! `||A v + eta||^2 / M` is close to the deterministic `sigma_A^2 g(theta) + sigma^2`,
//! and `g` is convex on a bin narrow enough. The functions here evaluate those
//! quantities directly so the claims can be tested.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signals::{rng_from_seed, standard_normal};
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntryDistribution {
    Normal,
    /// Uniform on `[-sqrt(3) sigma_A, sqrt(3) sigma_A]`.
    Uniform,
}

impl EntryDistribution {
    /// Excess kurtosis of the entry distribution.
    pub fn kurtosis(&self) -> f64 {
        match self {
            EntryDistribution::Normal => 0.0,
            EntryDistribution::Uniform => -1.2,
        }
    }

    fn draw(&self, rng: &mut impl Rng, sigma: f64) -> f64 {
        match self {
            EntryDistribution::Normal => sigma * standard_normal(rng),
            EntryDistribution::Uniform => {
                let half_width = 3f64.sqrt() * sigma;
                rng.gen_range(-half_width..half_width)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AppendixProbe {
    pub n: usize,
    pub m: usize,
    pub sigma_a: f64,
    pub sigma_noise: f64,
    pub distribution: EntryDistribution,
    /// True amplitude `x`.
    pub true_amp: f64,
    /// Estimated amplitude `x_hat`.
    pub est_amp: f64,
    /// True frequency in cycles per sample.
    pub frequency: f64,
}

impl AppendixProbe {
    /// `delta = |x - x_hat|`.
    pub fn delta(&self) -> f64 {
        (self.true_amp - self.est_amp).abs()
    }

    pub fn kurtosis(&self) -> f64 {
        self.distribution.kurtosis()
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParameter(format!("n = {} must be at least 2", self.n)));
        }
        if self.m == 0 {
            return Err(Error::InvalidParameter("m must be positive".into()));
        }
        let finite = [self.sigma_a, self.sigma_noise, self.true_amp, self.est_amp, self.frequency];
        if finite.iter().any(|v| !v.is_finite()) || self.sigma_a < 0.0 || self.sigma_noise < 0.0 {
            return Err(Error::InvalidParameter("probe parameters must be finite, sigmas non-negative".into()));
        }
        Ok(())
    }

    /// `v_n = x sin(2 pi f n) - x_hat sin(2 pi (f + theta) n)`.
    pub fn discrepancy(&self, theta: f64) -> Vec<f64> {
        (0..self.n)
            .map(|n| {
                let n = n as f64;
                self.true_amp * (2.0 * PI * self.frequency * n).sin()
                    - self.est_amp * (2.0 * PI * (self.frequency + theta) * n).sin()
            })
            .collect()
    }
}

/// `g(theta) = sum_n v_n^2`.
pub fn g_k(theta: f64, probe: &AppendixProbe) -> f64 {
    probe.discrepancy(theta).iter().map(|v| v * v).sum()
}

/// `h(theta) = sum_n v_n`.
pub fn h_k(theta: f64, probe: &AppendixProbe) -> f64 {
    probe.discrepancy(theta).iter().sum()
}

/// Large-N closed form whose zeros locate the inflection points of `g`.
///
/// The expression is amplitude-free and approaches `g'' / pi^2` for
/// `x = x_hat = 1`. At `theta = 0` the removable singularity is replaced by
/// its limit `(4N^3 - 18N^2 - 22N - 3) / 3`; for `0 < |theta| < 1e-4 / N` the
/// direct evaluation loses digits to cancellation.
pub fn g_second_deriv_limit(theta: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n = {n} must be at least 2")));
    }
    if !theta.is_finite() {
        return Err(Error::NonFinite("theta"));
    }
    let nf = n as f64;
    if theta == 0.0 {
        return Ok((4.0 * nf.powi(3) - 18.0 * nf * nf - 22.0 * nf - 3.0) / 3.0);
    }
    let p = PI * theta;
    let csc = 1.0 / p.sin();
    let cot = p.cos() / p.sin();
    let c2 = (2.0 * PI * (nf + 1.0) * theta).cos();
    Ok(2.0 * nf * nf * csc * (PI * (2.0 * nf + 1.0) * theta).sin()
        + 2.0 * nf * csc * csc * c2
        + 3.0 * csc * csc * c2
        - csc.powi(3) * (PI * (2.0 * nf + 3.0) * theta).sin()
        - cot * cot
        + csc * csc)
}

/// `tan(pi/Q) - 4Q pi / (4Q^2 - 2 pi^2)`, the bin-width condition as written.
///
/// Has poles at `Q = 2` and `Q = pi / sqrt(2)`.
pub fn convexity_residual(q: f64) -> f64 {
    (PI / q).tan() - 4.0 * q * PI / (4.0 * q * q - 2.0 * PI * PI)
}

/// The same condition multiplied through by `cos(pi/Q) (4Q^2 - 2pi^2)`; no poles.
pub fn convexity_residual_regular(q: f64) -> f64 {
    (PI / q).sin() * (4.0 * q * q - 2.0 * PI * PI) - 4.0 * PI * q * (PI / q).cos()
}

/// Root of the bin-width condition on `(1, 4]`, by bisection of the pole-free form.
pub fn convexity_root() -> f64 {
    let (mut lo, mut hi) = (1.0f64, 4.0f64);
    let f_lo = convexity_residual_regular(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if (convexity_residual_regular(mid) > 0.0) == (f_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `points` evenly spaced perturbations covering `[-1/(2n), 1/(2n)]`.
pub fn bin_grid(n: usize, points: usize) -> Vec<f64> {
    let half = 0.5 / n as f64;
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points)
            .map(|i| half * (2.0 * i as f64 - (points - 1) as f64) / (points - 1) as f64)
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostComparisonRow {
    pub theta: f64,
    /// `||A v + eta||^2 / M` for one draw of `A` and `eta`.
    pub exact: f64,
    /// `sigma_A^2 g(theta) + sigma^2`.
    pub approx: f64,
    pub deviation: f64,
    /// `sqrt(2 + gamma) sigma_A^2 g / sqrt(M) + 2 sigma_A sigma |h| / sqrt(M) + sqrt(2) sigma^2 / sqrt(M)`.
    pub predicted_order: f64,
}

/// Exact stochastic cost against its deterministic approximation over `theta_grid`.
///
/// One `A` (row-major draws) and one noise vector are drawn from `seed` and
/// shared by every grid point.
pub fn approx_cost_compare(probe: &AppendixProbe, theta_grid: &[f64], seed: u64) -> Result<Vec<CostComparisonRow>> {
    probe.validate()?;
    let bound = 0.5 / probe.n as f64;
    if let Some(t) = theta_grid.iter().find(|t| !(t.abs() <= bound * (1.0 + 1e-12))) {
        return Err(Error::PerturbationOutOfBounds {
            index: 0,
            value: *t,
            bound,
        });
    }
    let (m, n) = (probe.m, probe.n);
    let mut rng = rng_from_seed(seed);
    let a: Vec<f64> = (0..m * n).map(|_| probe.distribution.draw(&mut rng, probe.sigma_a)).collect();
    let eta: Vec<f64> = if probe.sigma_noise > 0.0 {
        (0..m).map(|_| probe.sigma_noise * standard_normal(&mut rng)).collect()
    } else {
        vec![0.0; m]
    };
    let mf = m as f64;
    let sa2 = probe.sigma_a * probe.sigma_a;
    let s2 = probe.sigma_noise * probe.sigma_noise;

    Ok(theta_grid
        .iter()
        .map(|&theta| {
            let v = probe.discrepancy(theta);
            let exact = a
                .chunks_exact(n)
                .zip(&eta)
                .map(|(row, e)| {
                    let av: f64 = row.iter().zip(&v).map(|(r, vi)| r * vi).sum();
                    (av + e).powi(2)
                })
                .sum::<f64>()
                / mf;
            let g: f64 = v.iter().map(|x| x * x).sum();
            let h: f64 = v.iter().sum();
            let approx = sa2 * g + s2;
            let predicted_order = ((2.0 + probe.kurtosis()).sqrt() * sa2 * g
                + 2.0 * probe.sigma_a * probe.sigma_noise * h.abs()
                + 2f64.sqrt() * s2)
                / mf.sqrt();
            CostComparisonRow {
                theta,
                exact,
                approx,
                deviation: (exact - approx).abs(),
                predicted_order,
            }
        })
        .collect())
}

/// Largest `|exact - approx|` in a table.
pub fn max_deviation(rows: &[CostComparisonRow]) -> f64 {
    rows.iter().map(|r| r.deviation).fold(0.0, f64::max)
}

/// Centered second differences of `g` at the interior points of `thetas`.
pub fn g_second_differences(probe: &AppendixProbe, thetas: &[f64], step: f64) -> Vec<f64> {
    thetas
        .iter()
        .map(|&t| (g_k(t + step, probe) - 2.0 * g_k(t, probe) + g_k(t - step, probe)) / (step * step))
        .collect()
}

/// Largest `|theta| N` on each side of zero (positive side first) up to which
/// the second differences of `g` stay at or above `-1e-6 N`, scanned on
/// `samples` points per half bin.
pub fn convex_half_width(probe: &AppendixProbe, samples: usize) -> (f64, f64) {
    let nf = probe.n as f64;
    let side = |sign: f64| {
        let thetas: Vec<f64> = (0..=samples).map(|i| sign * 0.5 * i as f64 / samples as f64 / nf).collect();
        let d2 = g_second_differences(probe, &thetas, 1e-3 / nf);
        let first = d2.iter().position(|&v| v < -1e-6 * nf).unwrap_or(samples);
        thetas[first].abs() * nf
    };
    (side(1.0), side(-1.0))
}
