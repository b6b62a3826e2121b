//! One-dimensional perturbation updates with the coefficients held fixed.
//!
//! Moving `theta[j]` only changes the two paired atoms of frequency `j`, so the
//! residual `y - A Psi x` can be corrected with a rank-two update instead of a
//! full rebuild.

use nalgebra::DVector;

use crate::dictionary::{base_frequency, fill_atom_pair, PerturbedDictionary};
use crate::error::{Error, Result};
use crate::signals::SensingOperator;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    /// Final bracket width; `None` means `1e-4 / (QN)`.
    pub tol: Option<f64>,
    pub max_iter: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            tol: None,
            max_iter: 60,
        }
    }
}

impl SearchOptions {
    pub fn resolved_tol(&self, grid: usize) -> f64 {
        self.tol.unwrap_or(1e-4 / grid as f64)
    }
}

#[derive(Debug, Clone)]
pub struct SearchState<'a> {
    sensing: &'a SensingOperator,
    dict: PerturbedDictionary,
    coeffs: &'a DVector<f64>,
    target: &'a DVector<f64>,
    residual: DVector<f64>,
}

/// The residual with frequency `j`'s own contribution added back in.
struct PairContext {
    base: DVector<f64>,
    cos_coeff: f64,
    sin_coeff: f64,
    j: usize,
}

impl<'a> SearchState<'a> {
    pub fn new(
        sensing: &'a SensingOperator,
        dict: PerturbedDictionary,
        coeffs: &'a DVector<f64>,
        target: &'a DVector<f64>,
    ) -> Result<Self> {
        if sensing.cols() != dict.n_samples() || sensing.rows() != target.len() || coeffs.len() != dict.grid_size() {
            return Err(Error::Dimension(format!(
                "operator {}x{}, dictionary {}x{}, coefficients {}, target {}",
                sensing.rows(),
                sensing.cols(),
                dict.n_samples(),
                dict.grid_size(),
                coeffs.len(),
                target.len()
            )));
        }
        let residual = full_residual(sensing, &dict, coeffs, target)?;
        Ok(SearchState {
            sensing,
            dict,
            coeffs,
            target,
            residual,
        })
    }

    pub fn dictionary(&self) -> &PerturbedDictionary {
        &self.dict
    }

    pub fn into_dictionary(self) -> PerturbedDictionary {
        self.dict
    }

    pub fn residual(&self) -> &DVector<f64> {
        &self.residual
    }

    /// `||y - A Psi x||^2` from a full rebuild, ignoring the maintained residual.
    pub fn recompute_residual(&self) -> Result<DVector<f64>> {
        full_residual(self.sensing, &self.dict, self.coeffs, self.target)
    }

    fn check_candidate(&self, j: usize, theta: f64) -> Result<()> {
        let len = self.dict.num_frequencies();
        if j >= len {
            return Err(Error::IndexOutOfRange { index: j, len });
        }
        if j == 0 {
            return Err(Error::DcPerturbation);
        }
        if !theta.is_finite() {
            return Err(Error::NonFinite("perturbation candidate"));
        }
        let bound = self.dict.theta_bound();
        if theta.abs() > bound {
            return Err(Error::PerturbationOutOfBounds {
                index: j,
                value: theta,
                bound,
            });
        }
        Ok(())
    }

    fn context(&self, j: usize) -> Result<PairContext> {
        let (c, s) = self.dict.pair_indices(j)?;
        let cos_coeff = self.coeffs[c];
        let sin_coeff = self.coeffs[s];
        let current = self.dict.atoms().column(c) * cos_coeff + self.dict.atoms().column(s) * sin_coeff;
        let base = &self.residual + self.sensing.apply(&current)?;
        Ok(PairContext {
            base,
            cos_coeff,
            sin_coeff,
            j,
        })
    }

    fn pair_contribution(&self, ctx: &PairContext, theta: f64) -> DVector<f64> {
        let n = self.dict.n_samples();
        let mut cos_col = vec![0.0; n];
        let mut sin_col = vec![0.0; n];
        let freq = base_frequency(ctx.j, self.dict.grid_size()) + theta;
        fill_atom_pair(freq, &mut cos_col, &mut sin_col);
        DVector::from_iterator(
            n,
            cos_col
                .iter()
                .zip(&sin_col)
                .map(|(c, s)| ctx.cos_coeff * c + ctx.sin_coeff * s),
        )
    }

    fn eval(&self, ctx: &PairContext, theta: f64) -> f64 {
        if ctx.cos_coeff == 0.0 && ctx.sin_coeff == 0.0 {
            return ctx.base.norm_squared();
        }
        let w = self.pair_contribution(ctx, theta);
        // dimensions were validated in `new`
        let aw = self.sensing.apply(&w).expect("operator width matches dictionary");
        (&ctx.base - aw).norm_squared()
    }

    /// Residual energy if `theta[j]` were replaced by `theta`; the state is unchanged.
    pub fn cost_at(&self, j: usize, theta: f64) -> Result<f64> {
        self.check_candidate(j, theta)?;
        let ctx = self.context(j)?;
        Ok(self.eval(&ctx, theta))
    }

    /// Golden-section search for `theta[j]` over the whole bin `[-1/(2QN), 1/(2QN)]`.
    ///
    /// The incumbent is returned whenever the search does not find a lower cost.
    pub fn golden_search(&self, j: usize, options: SearchOptions) -> Result<f64> {
        self.check_candidate(j, 0.0)?;
        let tol = options.resolved_tol(self.dict.grid_size());
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter(format!("search tol = {tol}")));
        }
        let ctx = self.context(j)?;
        let incumbent = self.dict.theta()[j];
        let incumbent_cost = self.eval(&ctx, incumbent);

        let bound = self.dict.theta_bound();
        let mut a = -bound;
        let mut b = bound;
        let mut x1 = b - INV_PHI * (b - a);
        let mut x2 = a + INV_PHI * (b - a);
        let mut f1 = self.eval(&ctx, x1);
        let mut f2 = self.eval(&ctx, x2);
        let mut iter = 0;
        while b - a > tol && iter < options.max_iter {
            if f1 <= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - INV_PHI * (b - a);
                f1 = self.eval(&ctx, x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + INV_PHI * (b - a);
                f2 = self.eval(&ctx, x2);
            }
            iter += 1;
        }
        let (best, best_cost) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
        Ok(if best_cost < incumbent_cost { best } else { incumbent })
    }

    /// Commits `theta[j] = theta`, updating the paired atoms and the residual.
    pub fn accept(&mut self, j: usize, theta: f64) -> Result<()> {
        self.check_candidate(j, theta)?;
        if theta == self.dict.theta()[j] {
            return Ok(());
        }
        let ctx = self.context(j)?;
        self.dict.set_perturbation(j, theta)?;
        let (c, s) = self.dict.pair_indices(j)?;
        let updated = self.dict.atoms().column(c) * ctx.cos_coeff + self.dict.atoms().column(s) * ctx.sin_coeff;
        self.residual = ctx.base - self.sensing.apply(&updated)?;
        Ok(())
    }
}

fn full_residual(
    sensing: &SensingOperator,
    dict: &PerturbedDictionary,
    coeffs: &DVector<f64>,
    target: &DVector<f64>,
) -> Result<DVector<f64>> {
    let z = dict.reconstruct(coeffs)?;
    Ok(target - sensing.apply(&z)?)
}
