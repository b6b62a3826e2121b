//! Gradient projection for `min_x ||y - Bx||^2 + lambda ||x||_1`.
//!
//! The coefficients are split as `x = u - v` with `u, v >= 0`, turning the
//! problem into a bound-constrained quadratic program. Each iteration takes a
//! projected step with a Barzilai-Borwein length and then an exact line search
//! along the resulting feasible direction, so the objective never increases.
//! No `1/2` factor is used on the data term; soft thresholding for an
//! orthonormal design therefore happens at `lambda / 2`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const ALPHA_MIN: f64 = 1e-30;
const ALPHA_MAX: f64 = 1e30;

#[derive(Debug, Clone, Copy)]
pub struct L1Problem<'a> {
    design: &'a DMatrix<f64>,
    target: &'a DVector<f64>,
    lambda: f64,
}

impl<'a> L1Problem<'a> {
    pub fn new(design: &'a DMatrix<f64>, target: &'a DVector<f64>, lambda: f64) -> Result<Self> {
        if design.nrows() != target.len() {
            return Err(Error::Dimension(format!(
                "design has {} rows, target has length {}",
                design.nrows(),
                target.len()
            )));
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("lambda = {lambda}")));
        }
        if design.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("design matrix"));
        }
        if target.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("target"));
        }
        Ok(L1Problem {
            design,
            target,
            lambda,
        })
    }

    pub fn design(&self) -> &DMatrix<f64> {
        self.design
    }

    pub fn target(&self) -> &DVector<f64> {
        self.target
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        let r = self.target - self.design * x;
        r.norm_squared() + self.lambda * x.lp_norm(1)
    }

    /// Largest violation of the subgradient optimality conditions.
    ///
    /// With `g = 2 B^T (Bx - y)`: `|g_k| <= lambda` where `x_k = 0`, and
    /// `g_k = -sign(x_k) lambda` elsewhere.
    pub fn optimality_violation(&self, x: &DVector<f64>) -> f64 {
        let g = self.design.tr_mul(&(self.design * x - self.target)) * 2.0;
        g.iter()
            .zip(x.iter())
            .map(|(&gk, &xk)| {
                if xk == 0.0 {
                    (gk.abs() - self.lambda).max(0.0)
                } else {
                    (gk + xk.signum() * self.lambda).abs()
                }
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Stop when the relative objective change falls below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-8,
            max_iter: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub x: DVector<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// `alpha * ||B^T y||_inf`.
pub fn compute_lambda(design: &DMatrix<f64>, y: &DVector<f64>, alpha: f64) -> Result<f64> {
    if design.is_empty() || y.is_empty() {
        return Err(Error::Dimension("empty design or target".into()));
    }
    if design.nrows() != y.len() {
        return Err(Error::Dimension(format!(
            "design has {} rows, target has length {}",
            design.nrows(),
            y.len()
        )));
    }
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha}")));
    }
    Ok(alpha * design.tr_mul(y).amax())
}

pub fn solve_l2l1(problem: &L1Problem<'_>, init: Option<&DVector<f64>>, options: SolverOptions) -> Result<SolverReport> {
    if !(options.tol > 0.0) {
        return Err(Error::InvalidParameter(format!("solver tol = {}", options.tol)));
    }
    let b = problem.design;
    let y = problem.target;
    let lambda = problem.lambda;
    let width = b.ncols();

    let x0 = match init {
        Some(x) if x.len() != width => {
            return Err(Error::Dimension(format!(
                "initial point has length {}, design has {} columns",
                x.len(),
                width
            )))
        }
        Some(x) if x.iter().any(|v| !v.is_finite()) => return Err(Error::NonFinite("initial point")),
        Some(x) => x.clone(),
        None => DVector::zeros(width),
    };

    let mut u = x0.map(|v| v.max(0.0));
    let mut v = x0.map(|v| (-v).max(0.0));
    let mut bx = b * (&u - &v);
    let mut objective = split_objective(y, &bx, &u, &v, lambda);

    // 2 B^T (Bx - y)
    let mut grad = b.tr_mul(&(&bx - y)) * 2.0;
    let mut alpha = initial_step(b, &grad, &u, &v, lambda);

    let mut iterations = 0;
    let mut converged = false;
    let mut du = DVector::zeros(width);
    let mut dv = DVector::zeros(width);

    while iterations < options.max_iter {
        iterations += 1;

        for k in 0..width {
            let gu = grad[k] + lambda;
            let gv = -grad[k] + lambda;
            du[k] = (u[k] - alpha * gu).max(0.0) - u[k];
            dv[k] = (v[k] - alpha * gv).max(0.0) - v[k];
        }
        let dx = &du - &dv;
        let bdx = b * &dx;
        let curvature = 2.0 * bdx.norm_squared();
        let slope = grad.dot(&dx) + lambda * (du.sum() + dv.sum());
        let dnorm2 = du.norm_squared() + dv.norm_squared();

        if dnorm2 == 0.0 || slope >= 0.0 {
            // projected gradient vanishes: stationary
            converged = true;
            break;
        }
        let step = if curvature > 0.0 {
            (-slope / curvature).clamp(0.0, 1.0)
        } else {
            1.0
        };

        u.axpy(step, &du, 1.0);
        v.axpy(step, &dv, 1.0);
        // cancel overlapping mass; lowers the l1 term without moving Bx
        for k in 0..width {
            let m = u[k].min(v[k]);
            if m > 0.0 {
                u[k] -= m;
                v[k] -= m;
            }
        }
        bx.axpy(step, &bdx, 1.0);

        let previous = objective;
        objective = split_objective(y, &bx, &u, &v, lambda);
        grad = b.tr_mul(&(&bx - y)) * 2.0;

        alpha = if curvature > 0.0 {
            (dnorm2 / curvature).clamp(ALPHA_MIN, ALPHA_MAX)
        } else {
            ALPHA_MAX
        };

        let change = (previous - objective).abs();
        if change <= options.tol * previous.abs() || objective == 0.0 {
            converged = true;
            break;
        }
    }

    let x = &u - &v;
    let objective = problem.objective(&x);
    Ok(SolverReport {
        x,
        objective,
        iterations,
        converged,
    })
}

fn split_objective(y: &DVector<f64>, bx: &DVector<f64>, u: &DVector<f64>, v: &DVector<f64>, lambda: f64) -> f64 {
    (y - bx).norm_squared() + lambda * (u.sum() + v.sum())
}

/// BB-style initial step from the unblocked part of the gradient.
fn initial_step(b: &DMatrix<f64>, grad: &DVector<f64>, u: &DVector<f64>, v: &DVector<f64>, lambda: f64) -> f64 {
    let width = b.ncols();
    let mut gu = DVector::zeros(width);
    let mut gv = DVector::zeros(width);
    for k in 0..width {
        let pu = grad[k] + lambda;
        let pv = -grad[k] + lambda;
        if u[k] > 0.0 || pu < 0.0 {
            gu[k] = pu;
        }
        if v[k] > 0.0 || pv < 0.0 {
            gv[k] = pv;
        }
    }
    let num = gu.norm_squared() + gv.norm_squared();
    let bg = b * (&gu - &gv);
    let den = 2.0 * bg.norm_squared();
    if num > 0.0 && den > 0.0 {
        (num / den).clamp(ALPHA_MIN, ALPHA_MAX)
    } else {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::{rng_from_seed, standard_normal};

    fn random_matrix(m: usize, n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = rng_from_seed(seed);
        DMatrix::from_fn(m, n, |_, _| standard_normal(&mut rng))
    }

    #[test]
    fn lambda_of_zero_target_is_zero() {
        let b = random_matrix(4, 6, 1);
        assert_eq!(compute_lambda(&b, &DVector::zeros(4), 0.1).unwrap(), 0.0);
    }

    #[test]
    fn lambda_of_identity() {
        let b = DMatrix::identity(5, 5);
        let y = DVector::from_fn(5, |i, _| if i == 0 { 1.0 } else { 0.0 });
        assert!((compute_lambda(&b, &y, 0.1).unwrap() - 0.1).abs() < 1e-16);
    }

    #[test]
    fn lambda_matches_per_column_dot_products() {
        let b = random_matrix(8, 16, 3);
        let mut rng = rng_from_seed(4);
        let y = DVector::from_fn(8, |_, _| standard_normal(&mut rng));
        let mut best: f64 = 0.0;
        for c in 0..16 {
            let mut dot = 0.0;
            for r in 0..8 {
                dot += b[(r, c)] * y[r];
            }
            best = best.max(dot.abs());
        }
        assert!((compute_lambda(&b, &y, 0.3).unwrap() - 0.3 * best).abs() < 1e-12);
    }

    #[test]
    fn lambda_rejects_bad_input() {
        assert!(compute_lambda(&DMatrix::zeros(0, 0), &DVector::zeros(0), 0.1).is_err());
        assert!(compute_lambda(&DMatrix::zeros(2, 2), &DVector::zeros(2), 0.0).is_err());
    }

    #[test]
    fn large_lambda_gives_zero() {
        let b = random_matrix(10, 20, 5);
        let mut rng = rng_from_seed(6);
        let y = DVector::from_fn(10, |_, _| standard_normal(&mut rng));
        let lambda = 2.0 * b.tr_mul(&y).amax() * 1.01;
        let p = L1Problem::new(&b, &y, lambda).unwrap();
        let rep = solve_l2l1(&p, None, SolverOptions::default()).unwrap();
        assert!(rep.x.iter().all(|&v| v == 0.0));
        assert!(rep.converged);
    }

    #[test]
    fn orthonormal_design_soft_thresholds() {
        // orthonormal columns from a rotation of the identity
        let qr = random_matrix(12, 12, 7).qr();
        let b = qr.q().columns(0, 8).into_owned();
        let mut rng = rng_from_seed(8);
        let y = DVector::from_fn(12, |_, _| standard_normal(&mut rng));
        let lambda = 0.8;
        let p = L1Problem::new(&b, &y, lambda).unwrap();
        let rep = solve_l2l1(&p, None, SolverOptions::default()).unwrap();
        let corr = b.tr_mul(&y);
        for k in 0..8 {
            let c = corr[k];
            let expected = c.signum() * (c.abs() - lambda / 2.0).max(0.0);
            assert!((rep.x[k] - expected).abs() <= 1e-6, "k={k}: {} vs {expected}", rep.x[k]);
        }
    }

    #[test]
    fn objective_descends_from_init() {
        let b = random_matrix(20, 40, 9);
        let mut rng = rng_from_seed(10);
        let y = DVector::from_fn(20, |_, _| standard_normal(&mut rng));
        let init = DVector::from_fn(40, |_, _| standard_normal(&mut rng));
        let lambda = compute_lambda(&b, &y, 0.1).unwrap();
        let p = L1Problem::new(&b, &y, lambda).unwrap();
        let rep = solve_l2l1(&p, Some(&init), SolverOptions::default()).unwrap();
        assert!(rep.objective <= p.objective(&init));
        assert!((rep.objective - p.objective(&rep.x)).abs() <= 1e-10 * rep.objective);
    }

    #[test]
    fn rejects_non_finite_input() {
        let b = DMatrix::from_element(2, 2, f64::NAN);
        let y = DVector::zeros(2);
        assert!(L1Problem::new(&b, &y, 0.1).is_err());
        let b = DMatrix::identity(2, 2);
        let y = DVector::from_element(2, f64::INFINITY);
        assert!(L1Problem::new(&b, &y, 0.1).is_err());
        let y = DVector::zeros(2);
        let p = L1Problem::new(&b, &y, 0.1).unwrap();
        let bad = DVector::from_element(2, f64::NAN);
        assert!(solve_l2l1(&p, Some(&bad), SolverOptions::default()).is_err());
        assert!(solve_l2l1(&p, None, SolverOptions { tol: 0.0, max_iter: 5 }).is_err());
    }

    #[test]
    fn certificate_holds_at_tight_convergence() {
        let b = random_matrix(30, 60, 11);
        let mut x_true = DVector::zeros(60);
        x_true[3] = 1.0;
        x_true[17] = -0.7;
        x_true[44] = 0.4;
        let y = &b * &x_true;
        let lambda = compute_lambda(&b, &y, 0.1).unwrap();
        let p = L1Problem::new(&b, &y, lambda).unwrap();
        let opts = SolverOptions {
            tol: 1e-14,
            max_iter: 20000,
        };
        let rep = solve_l2l1(&p, None, opts).unwrap();
        assert!(p.optimality_violation(&rep.x) <= 1e-4 * lambda, "{}", p.optimality_violation(&rep.x));
    }

    #[test]
    fn invariant_under_column_permutation() {
        let b = random_matrix(15, 30, 12);
        let mut rng = rng_from_seed(13);
        let y = DVector::from_fn(15, |_, _| standard_normal(&mut rng));
        let lambda = compute_lambda(&b, &y, 0.2).unwrap();
        let perm: Vec<usize> = (0..30).map(|i| (i * 7) % 30).collect();
        let bp = DMatrix::from_fn(15, 30, |r, c| b[(r, perm[c])]);
        let opts = SolverOptions {
            tol: 1e-14,
            max_iter: 20000,
        };
        let x = solve_l2l1(&L1Problem::new(&b, &y, lambda).unwrap(), None, opts).unwrap().x;
        let xp = solve_l2l1(&L1Problem::new(&bp, &y, lambda).unwrap(), None, opts).unwrap().x;
        for c in 0..30 {
            assert!((xp[c] - x[perm[c]]).abs() < 1e-6);
        }
    }
}
