//! Parameterized harmonic dictionary.
//!
//! For a signal of length `N` and overcompleteness `Q` the dictionary has
//! `L = QN` real atoms. Indices here are zero-based: frequency index `j` in
//! `0..L/2` owns the cosine column `j` and the sine column `L - 1 - j`, both
//! evaluated at the perturbed frequency `j / L + theta[j]`:
//!
//! ```text
//! cos column j:        sqrt(2/N) * cos(2 pi n (j/L + theta[j]))
//! sin column L-1-j:   -sqrt(2/N) * sin(2 pi n (j/L + theta[j]))
//! ```
//!
//! A tone `sqrt(2/N) cos(2 pi f n + phi)` at the perturbed frequency of index
//! `j` is then exactly `cos(phi) * cos_col + sin(phi) * sin_col`.
//!
//! `theta[0]` (DC) is frozen at zero and the DC sine column is identically zero.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Overcompleteness factor `Q` as a reduced positive fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Overcompleteness {
    num: u32,
    den: u32,
}

impl Overcompleteness {
    pub const ONE: Overcompleteness = Overcompleteness { num: 1, den: 1 };

    pub fn new(num: u32, den: u32) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::InvalidParameter(format!(
                "overcompleteness {num}/{den} must be positive"
            )));
        }
        if num < den {
            return Err(Error::InvalidParameter(format!(
                "overcompleteness {num}/{den} must be at least 1"
            )));
        }
        let g = gcd(num, den);
        Ok(Overcompleteness {
            num: num / g,
            den: den / g,
        })
    }

    pub fn integer(q: u32) -> Result<Self> {
        Self::new(q, 1)
    }

    pub fn numerator(&self) -> u32 {
        self.num
    }

    pub fn denominator(&self) -> u32 {
        self.den
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Number of atoms `QN`; must be an even integer.
    pub fn grid_size(&self, n: usize) -> Result<usize> {
        let scaled = n as u64 * self.num as u64;
        if n == 0 || scaled % self.den as u64 != 0 {
            return Err(Error::Grid {
                q: self.to_string(),
                n,
            });
        }
        let grid = (scaled / self.den as u64) as usize;
        if grid % 2 != 0 {
            return Err(Error::Grid {
                q: self.to_string(),
                n,
            });
        }
        Ok(grid)
    }
}

impl Default for Overcompleteness {
    fn default() -> Self {
        Self::ONE
    }
}

impl fmt::Display for Overcompleteness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for Overcompleteness {
    type Err = Error;

    /// Accepts `"2"`, `"3/2"` or a terminating decimal such as `"1.5"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidParameter(format!("cannot parse overcompleteness `{s}`"));
        if let Some((a, b)) = s.split_once('/') {
            let num = a.trim().parse().map_err(|_| bad())?;
            let den = b.trim().parse().map_err(|_| bad())?;
            return Self::new(num, den);
        }
        if let Some((int, frac)) = s.split_once('.') {
            if frac.is_empty() || frac.len() > 6 || !frac.bytes().all(|c| c.is_ascii_digit()) {
                return Err(bad());
            }
            let den = 10u32.pow(frac.len() as u32);
            let int: u32 = int.parse().map_err(|_| bad())?;
            let frac: u32 = frac.parse().map_err(|_| bad())?;
            let num = int.checked_mul(den).and_then(|v| v.checked_add(frac)).ok_or_else(bad)?;
            return Self::new(num, den);
        }
        Self::new(s.parse().map_err(|_| bad())?, 1)
    }
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Cosine and sine column indices for frequency index `j` on a grid of `grid` atoms.
pub fn pair_indices(j: usize, grid: usize) -> Result<(usize, usize)> {
    if j >= grid / 2 {
        return Err(Error::IndexOutOfRange {
            index: j,
            len: grid / 2,
        });
    }
    Ok((j, grid - 1 - j))
}

/// Frequency index owning coefficient/column `col`.
pub fn frequency_index_of(col: usize, grid: usize) -> usize {
    if col < grid / 2 {
        col
    } else {
        grid - 1 - col
    }
}

/// Writes one cosine/sine atom pair at `freq` cycles per sample.
///
/// Every column of a [`PerturbedDictionary`] is produced by this function, so
/// a rebuild from the same parameters reproduces the stored values exactly.
pub fn fill_atom_pair(freq: f64, cos_out: &mut [f64], sin_out: &mut [f64]) {
    debug_assert_eq!(cos_out.len(), sin_out.len());
    let n_samples = cos_out.len();
    let scale = (2.0 / n_samples as f64).sqrt();
    for (n, (c, s)) in cos_out.iter_mut().zip(sin_out.iter_mut()).enumerate() {
        let phase = 2.0 * std::f64::consts::PI * n as f64 * freq;
        *c = scale * phase.cos();
        *s = -scale * phase.sin();
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedDictionary {
    n_samples: usize,
    q: Overcompleteness,
    grid: usize,
    theta: Vec<f64>,
    atoms: DMatrix<f64>,
}

impl PerturbedDictionary {
    pub fn build(n_samples: usize, q: Overcompleteness, theta: Vec<f64>) -> Result<Self> {
        let grid = q.grid_size(n_samples)?;
        if theta.len() != grid / 2 {
            return Err(Error::Dimension(format!(
                "theta has length {}, expected QN/2 = {}",
                theta.len(),
                grid / 2
            )));
        }
        let bound = half_bin(grid);
        for (j, &t) in theta.iter().enumerate() {
            check_perturbation(j, t, bound)?;
        }
        if theta[0] != 0.0 {
            return Err(Error::DcPerturbation);
        }

        let mut dict = PerturbedDictionary {
            n_samples,
            q,
            grid,
            theta,
            atoms: DMatrix::zeros(n_samples, grid),
        };
        for j in 0..grid / 2 {
            dict.refresh_pair(j);
        }
        Ok(dict)
    }

    /// The dictionary with every perturbation at zero (the overcomplete Fourier dictionary).
    pub fn unperturbed(n_samples: usize, q: Overcompleteness) -> Result<Self> {
        let grid = q.grid_size(n_samples)?;
        Self::build(n_samples, q, vec![0.0; grid / 2])
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn overcompleteness(&self) -> Overcompleteness {
        self.q
    }

    /// Number of atoms, `QN`.
    pub fn grid_size(&self) -> usize {
        self.grid
    }

    pub fn num_frequencies(&self) -> usize {
        self.grid / 2
    }

    /// Largest admissible perturbation magnitude, `1 / (2QN)`.
    pub fn theta_bound(&self) -> f64 {
        half_bin(self.grid)
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn atoms(&self) -> &DMatrix<f64> {
        &self.atoms
    }

    pub fn pair_indices(&self, j: usize) -> Result<(usize, usize)> {
        pair_indices(j, self.grid)
    }

    pub fn atom_frequency(&self, j: usize) -> Result<f64> {
        if j >= self.num_frequencies() {
            return Err(Error::IndexOutOfRange {
                index: j,
                len: self.num_frequencies(),
            });
        }
        Ok(base_frequency(j, self.grid) + self.theta[j])
    }

    /// Returns a copy with `theta[j]` replaced; only the two paired columns change.
    pub fn with_perturbation(&self, j: usize, theta_new: f64) -> Result<Self> {
        let mut out = self.clone();
        out.set_perturbation(j, theta_new)?;
        Ok(out)
    }

    /// In-place form of [`with_perturbation`](Self::with_perturbation).
    pub fn set_perturbation(&mut self, j: usize, theta_new: f64) -> Result<()> {
        if j >= self.num_frequencies() {
            return Err(Error::IndexOutOfRange {
                index: j,
                len: self.num_frequencies(),
            });
        }
        if j == 0 {
            return Err(Error::DcPerturbation);
        }
        check_perturbation(j, theta_new, self.theta_bound())?;
        self.theta[j] = theta_new;
        self.refresh_pair(j);
        Ok(())
    }

    fn refresh_pair(&mut self, j: usize) {
        let (c, s) = (j, self.grid - 1 - j);
        let freq = base_frequency(j, self.grid) + self.theta[j];
        let mut cos_col = vec![0.0; self.n_samples];
        let mut sin_col = vec![0.0; self.n_samples];
        fill_atom_pair(freq, &mut cos_col, &mut sin_col);
        self.atoms.column_mut(c).copy_from_slice(&cos_col);
        self.atoms.column_mut(s).copy_from_slice(&sin_col);
    }

    /// `Psi_theta * x`.
    pub fn reconstruct(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.grid {
            return Err(Error::Dimension(format!(
                "coefficient vector has length {}, dictionary has {} atoms",
                x.len(),
                self.grid
            )));
        }
        Ok(&self.atoms * x)
    }
}

pub(crate) fn base_frequency(j: usize, grid: usize) -> f64 {
    j as f64 / grid as f64
}

pub(crate) fn half_bin(grid: usize) -> f64 {
    1.0 / (2.0 * grid as f64)
}

fn check_perturbation(index: usize, value: f64, bound: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::NonFinite("perturbation"));
    }
    if value.abs() > bound {
        return Err(Error::PerturbationOutOfBounds {
            index,
            value,
            bound,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn q(s: &str) -> Overcompleteness {
        s.parse().unwrap()
    }

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(q("3/2"), Overcompleteness::new(3, 2).unwrap());
        assert_eq!(q("1.5"), Overcompleteness::new(3, 2).unwrap());
        assert_eq!(q("8"), Overcompleteness::integer(8).unwrap());
        assert_eq!(q("6/4").to_string(), "3/2");
        assert!("0.5".parse::<Overcompleteness>().is_err());
        assert!("x".parse::<Overcompleteness>().is_err());
    }

    #[test]
    fn grid_must_be_even_integer() {
        assert_eq!(q("3/2").grid_size(256).unwrap(), 384);
        assert!(q("3/2").grid_size(3).is_err());
        assert!(q("1").grid_size(5).is_err());
    }

    #[test]
    fn dc_columns_for_small_dictionary() {
        let d = PerturbedDictionary::unperturbed(4, Overcompleteness::ONE).unwrap();
        let half = 0.5f64.sqrt();
        for n in 0..4 {
            assert!((d.atoms()[(n, 0)] - half).abs() < 1e-15);
            assert_eq!(d.atoms()[(n, 3)], 0.0);
        }
        assert!((d.atoms().column(0).norm() - 2f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn perturbed_column_matches_scalar_evaluation() {
        let mut theta = vec![0.0; 4];
        theta[1] = 1.0 / 32.0;
        let d = PerturbedDictionary::build(8, Overcompleteness::ONE, theta).unwrap();
        for n in 0..8 {
            let expected = (2.0f64 / 8.0).sqrt() * (2.0 * PI * n as f64 * (1.0 / 8.0 + 1.0 / 32.0)).cos();
            assert!((d.atoms()[(n, 1)] - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn standard_fourier_basis_is_orthonormal() {
        let d = PerturbedDictionary::unperturbed(256, Overcompleteness::ONE).unwrap();
        let gram = d.atoms().transpose() * d.atoms();
        // skip DC cosine (norm sqrt 2) and DC sine (zero)
        for a in 1..255 {
            assert!((gram[(a, a)] - 1.0).abs() < 1e-10, "column {a}");
            for b in (a + 1)..255 {
                assert!(gram[(a, b)].abs() < 1e-10, "columns {a},{b}");
            }
        }
    }

    #[test]
    fn pair_indices_boundaries() {
        assert_eq!(pair_indices(1, 256).unwrap(), (1, 254));
        assert_eq!(pair_indices(0, 256).unwrap(), (0, 255));
        assert_eq!(pair_indices(127, 256).unwrap(), (127, 128));
        assert!(pair_indices(128, 256).is_err());
    }

    #[test]
    fn atom_frequency_stays_below_nyquist() {
        let grid = 256;
        let mut theta = vec![0.0; grid / 2];
        theta[51] = 0.0015;
        theta[127] = half_bin(grid);
        let d = PerturbedDictionary::build(256, Overcompleteness::ONE, theta).unwrap();
        assert_eq!(d.atom_frequency(0).unwrap(), 0.0);
        assert_eq!(d.atom_frequency(51).unwrap(), 51.0 / 256.0 + 0.0015);
        let top = d.atom_frequency(127).unwrap();
        assert!((top - (0.5 - 1.0 / 512.0)).abs() < 1e-15);
        assert!(top < 0.5);
        assert!(d.atom_frequency(128).is_err());
    }

    #[test]
    fn rejects_bad_perturbations() {
        let d = PerturbedDictionary::unperturbed(16, Overcompleteness::ONE).unwrap();
        assert!(matches!(d.with_perturbation(0, 0.0), Err(Error::DcPerturbation)));
        assert!(matches!(
            d.with_perturbation(3, 1.0 / 31.0),
            Err(Error::PerturbationOutOfBounds { .. })
        ));
        assert!(d.with_perturbation(3, f64::NAN).is_err());
        let mut theta = vec![0.0; 8];
        theta[0] = 1e-3;
        assert!(PerturbedDictionary::build(16, Overcompleteness::ONE, theta).is_err());
        assert!(PerturbedDictionary::build(16, Overcompleteness::ONE, vec![0.0; 7]).is_err());
    }

    #[test]
    fn update_is_identity_for_same_theta() {
        let d = PerturbedDictionary::unperturbed(32, q("3/2")).unwrap();
        let same = d.with_perturbation(5, d.theta()[5]).unwrap();
        assert_eq!(same, d);
    }

    #[test]
    fn update_matches_full_rebuild_exhaustively() {
        for (n, qs) in [(8usize, "1"), (8, "2"), (12, "3/2"), (16, "1")] {
            let base = PerturbedDictionary::unperturbed(n, q(qs)).unwrap();
            let bound = base.theta_bound();
            for j in 1..base.num_frequencies() {
                for step in 0..10 {
                    let t = -bound + 2.0 * bound * step as f64 / 9.0;
                    let updated = base.with_perturbation(j, t).unwrap();
                    let mut theta = base.theta().to_vec();
                    theta[j] = t;
                    let rebuilt = PerturbedDictionary::build(n, q(qs), theta).unwrap();
                    let diff = (updated.atoms() - rebuilt.atoms()).abs().max();
                    assert!(diff <= 1e-14, "n={n} q={qs} j={j} diff={diff}");
                    let (c, s) = updated.pair_indices(j).unwrap();
                    for col in 0..base.grid_size() {
                        if col != c && col != s {
                            assert_eq!(updated.atoms().column(col), base.atoms().column(col));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn paired_atoms_represent_arbitrary_phase_tone() {
        let n = 64;
        let grid = 64;
        let j = 9;
        let offset = 0.37 / grid as f64;
        let phi: f64 = 2.1;
        let mut theta = vec![0.0; grid / 2];
        theta[j] = offset;
        let d = PerturbedDictionary::build(n, Overcompleteness::ONE, theta).unwrap();
        let mut x = DVector::zeros(grid);
        let (c, s) = d.pair_indices(j).unwrap();
        x[c] = phi.cos();
        x[s] = phi.sin();
        let z = d.reconstruct(&x).unwrap();
        let f = j as f64 / grid as f64 + offset;
        for t in 0..n {
            let tone = (2.0 / n as f64).sqrt() * (2.0 * PI * f * t as f64 + phi).cos();
            assert!((z[t] - tone).abs() < 1e-10);
        }
    }

    #[test]
    fn reconstruct_checks_length() {
        let d = PerturbedDictionary::unperturbed(8, Overcompleteness::ONE).unwrap();
        assert!(d.reconstruct(&DVector::zeros(7)).is_err());
        assert_eq!(d.reconstruct(&DVector::zeros(8)).unwrap(), DVector::zeros(8));
    }
}
