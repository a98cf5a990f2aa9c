//! Equilibrium measures of logarithmic energy functionals, discretized as
//! probability vectors on a grid and minimized by projected gradient
//! descent with Barzilai-Borwein steps and Armijo backtracking.
//!
//! The unconstrained problem minimizes
//! `E(mu) = int int log 1/|x-y| dmu dmu + int V dmu` over probability
//! measures; the constrained variant adds the box `0 <= mu <= rho/beta`
//! and uses the external field `(V - U^rho)/beta` of the discrete gas.

use crate::discrete::NodeDensity;
use crate::error::{CoreError, Result};
use crate::potential::Potential;
use nalgebra::{DMatrix, DVector};

/// A discretized equilibrium density.
#[derive(Debug, Clone)]
pub struct EquilibriumDensity {
    pub grid: Vec<f64>,
    /// Density values (mass per unit length) at the grid points.
    pub density: Vec<f64>,
    /// Total mass of the discrete solution.
    pub mass: f64,
    /// Detected support `[x-, x+]` (density above threshold).
    pub support: (f64, f64),
    pub iterations: usize,
    /// Final projected-gradient residual (sup norm).
    pub residual: f64,
}

impl EquilibriumDensity {
    /// Linear interpolation of the density.
    pub fn density_at(&self, x: f64) -> f64 {
        let g = &self.grid;
        if x <= g[0] || x >= *g.last().unwrap() {
            return 0.0;
        }
        let i = g.partition_point(|&t| t < x).max(1);
        let (x0, x1) = (g[i - 1], g[i]);
        let t = (x - x0) / (x1 - x0);
        self.density[i - 1] * (1.0 - t) + self.density[i] * t
    }

    /// Moment `int x^k density dx` by the trapezoid rule.
    pub fn moment(&self, k: u32) -> f64 {
        let mut acc = 0.0;
        for i in 1..self.grid.len() {
            let h = self.grid[i] - self.grid[i - 1];
            let f0 = self.grid[i - 1].powi(k as i32) * self.density[i - 1];
            let f1 = self.grid[i].powi(k as i32) * self.density[i];
            acc += 0.5 * h * (f0 + f1);
        }
        acc
    }
}

/// Region classification of the constrained problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionKind {
    /// `kappa = 0`.
    Void,
    /// `0 < kappa < rho/beta`.
    Band,
    /// `kappa = rho/beta`.
    Saturated,
}

/// Constrained equilibrium density with its band/void/saturation map.
#[derive(Debug, Clone)]
pub struct ConstrainedEquilibrium {
    pub eq: EquilibriumDensity,
    /// One entry per grid point.
    pub classification: Vec<RegionKind>,
    pub beta: f64,
}

/// Equilibrium density for `exp(-n V)` ensembles. Closed-form data
/// attached to the potential short-circuits the solver; otherwise the
/// discretized energy is minimized on the grid.
pub fn equilibrium_density(potential: &Potential, grid: &[f64]) -> Result<EquilibriumDensity> {
    if let Some(a) = potential.analytic() {
        let density: Vec<f64> = grid.iter().map(|&x| (a.density)(x)).collect();
        let cells = cell_widths(grid)?;
        let mass = density.iter().zip(&cells).map(|(&d, &h)| d * h).sum();
        return Ok(EquilibriumDensity {
            grid: grid.to_vec(),
            density,
            mass,
            support: a.support,
            iterations: 0,
            residual: 0.0,
        });
    }
    equilibrium_density_numeric(potential, grid)
}

/// Force the numerical energy minimization even when closed-form data is
/// available (used to validate the solver against the analytic law).
pub fn equilibrium_density_numeric(
    potential: &Potential,
    grid: &[f64],
) -> Result<EquilibriumDensity> {
    let q: Vec<f64> = grid.iter().map(|&x| potential.v(x)).collect();
    let cells = cell_widths(grid)?;
    let sol = minimize_log_energy(grid, &q, None)?;
    Ok(package_solution(grid, &cells, sol, None))
}

/// Constrained equilibrium measure of the discrete Coulomb gas: external
/// field `(V - U^rho)/beta`, mass one, box constraint
/// `0 <= density <= rho/beta`.
pub fn constrained_equilibrium(
    potential: &Potential,
    rho: &NodeDensity,
    beta: f64,
    grid: &[f64],
) -> Result<ConstrainedEquilibrium> {
    if !(0.0 < beta && beta < 1.0) {
        return Err(CoreError::InvalidParameter(format!(
            "beta must lie in (0,1), got {beta}"
        )));
    }
    if grid.iter().any(|&x| x <= 0.0 || x >= 1.0) {
        return Err(CoreError::InvalidParameter(
            "constrained grid must lie inside (0,1)".into(),
        ));
    }
    let cells = cell_widths(grid)?;
    let mut q = Vec::with_capacity(grid.len());
    for &x in grid {
        q.push((potential.v(x) - rho.log_potential(x)?) / beta);
    }
    let caps: Vec<f64> = grid
        .iter()
        .zip(&cells)
        .map(|(&x, &h)| rho.eval(x) / beta * h)
        .collect();
    let total_cap: f64 = caps.iter().sum();
    if total_cap < 1.0 {
        return Err(CoreError::InvalidParameter(format!(
            "box constraint is infeasible: total cap {total_cap} < 1"
        )));
    }
    let sol = minimize_log_energy(grid, &q, Some(&caps))?;
    let eq = package_solution(grid, &cells, sol, Some(&caps));
    let classification = eq
        .density
        .iter()
        .zip(grid)
        .map(|(&d, &x)| {
            let r = d * beta / rho.eval(x);
            if r <= 1e-3 {
                RegionKind::Void
            } else if r >= 1.0 - 1e-3 {
                RegionKind::Saturated
            } else {
                RegionKind::Band
            }
        })
        .collect();
    Ok(ConstrainedEquilibrium {
        eq,
        classification,
        beta,
    })
}

struct Solution {
    masses: DVector<f64>,
    iterations: usize,
    residual: f64,
}

fn cell_widths(grid: &[f64]) -> Result<Vec<f64>> {
    if grid.len() < 8 {
        return Err(CoreError::InvalidParameter(
            "equilibrium grid needs at least 8 points".into(),
        ));
    }
    if grid.windows(2).any(|p| p[0] >= p[1]) {
        return Err(CoreError::InvalidParameter(
            "grid must be strictly increasing".into(),
        ));
    }
    let m = grid.len();
    let mut h = vec![0.0; m];
    h[0] = grid[1] - grid[0];
    h[m - 1] = grid[m - 1] - grid[m - 2];
    for i in 1..m - 1 {
        h[i] = 0.5 * (grid[i + 1] - grid[i - 1]);
    }
    Ok(h)
}

fn package_solution(
    grid: &[f64],
    cells: &[f64],
    sol: Solution,
    caps: Option<&[f64]>,
) -> EquilibriumDensity {
    let density: Vec<f64> = sol.masses.iter().zip(cells).map(|(&p, &h)| p / h).collect();
    let mass = sol.masses.sum();
    let dmax = density.iter().cloned().fold(0.0, f64::max);
    let thr = 1e-3 * dmax;
    let lo = grid
        .iter()
        .zip(&density)
        .find(|(_, &d)| d > thr)
        .map(|(&x, _)| x)
        .unwrap_or(grid[0]);
    let hi = grid
        .iter()
        .zip(&density)
        .rev()
        .find(|(_, &d)| d > thr)
        .map(|(&x, _)| x)
        .unwrap_or(*grid.last().unwrap());
    let _ = caps;
    EquilibriumDensity {
        grid: grid.to_vec(),
        density,
        mass,
        support: (lo, hi),
        iterations: sol.iterations,
        residual: sol.residual,
    }
}

/// Projected gradient with BB steps on
/// `E(p) = p^T L p + q^T p`, `L_ij = log 1/|x_i - x_j|` off the diagonal,
/// over the capped simplex.
///
/// The diagonal carries the exact intra-cell average
/// `(1/h^2) int int_{cell^2} log 1/|x-y| = 3/2 - log h`. Dropping it
/// altogether makes a point mass the discrete minimizer (its
/// self-interaction would cost nothing), which destroys the continuum
/// limit.
fn minimize_log_energy(grid: &[f64], q: &[f64], caps: Option<&[f64]>) -> Result<Solution> {
    let m = grid.len();
    let cells = cell_widths(grid)?;
    let l = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            1.5 - cells[i].ln()
        } else {
            -(grid[i] - grid[j]).abs().ln()
        }
    });
    let qv = DVector::from_column_slice(q);
    let energy = |p: &DVector<f64>| -> (f64, DVector<f64>) {
        let lp = &l * p;
        (p.dot(&lp) + qv.dot(p), 2.0 * lp + &qv)
    };

    // feasible start: uniform, scaled under the caps
    let mut p = match caps {
        None => DVector::from_element(m, 1.0 / m as f64),
        Some(c) => {
            let y = DVector::from_element(m, 1.0 / m as f64);
            project_capped_simplex(&y, Some(c))
        }
    };
    let (mut e, mut g) = energy(&p);
    let mut tau = 1.0 / (1.0 + g.amax());
    let max_iter = 100_000;
    let mut flat_count = 0;
    let mut iterations = 0;

    for it in 0..max_iter {
        iterations = it + 1;
        // Armijo backtracking along the projection arc
        let mut accepted = None;
        let mut step = tau;
        for _ in 0..50 {
            let cand = project_capped_simplex(&(&p - step * &g), caps);
            let d = &cand - &p;
            let (e_new, g_new) = energy(&cand);
            if e_new <= e + 1e-4 * g.dot(&d) || d.amax() == 0.0 {
                accepted = Some((cand, d, e_new, g_new));
                break;
            }
            step *= 0.5;
        }
        let Some((cand, d, e_new, g_new)) = accepted else {
            break; // line search stalled at numerical precision
        };

        // BB1 step from the accepted move
        let dg = &g_new - &g;
        let denom = d.dot(&dg);
        tau = if denom > 0.0 {
            (d.dot(&d) / denom).clamp(1e-12, 1e6)
        } else {
            step * 2.0
        };

        let rel_change = (e - e_new).abs() / e.abs().max(1.0);
        p = cand;
        g = g_new;
        e = e_new;
        if rel_change < 1e-10 {
            flat_count += 1;
            if flat_count >= 3 {
                break;
            }
        } else {
            flat_count = 0;
        }
    }

    let residual = (&p - project_capped_simplex(&(&p - &g), caps)).amax();
    if iterations >= max_iter {
        return Err(CoreError::OptimizationFailed {
            residual,
            iterations,
        });
    }
    Ok(Solution {
        masses: p,
        iterations,
        residual,
    })
}

/// Euclidean projection onto `{ 0 <= p <= cap, sum p = 1 }` by bisection
/// on the dual shift.
fn project_capped_simplex(y: &DVector<f64>, caps: Option<&[f64]>) -> DVector<f64> {
    let clamp = |v: f64, i: usize| -> f64 {
        let hi = caps.map(|c| c[i]).unwrap_or(f64::INFINITY);
        v.clamp(0.0, hi)
    };
    let total = |tau: f64| -> f64 {
        y.iter()
            .enumerate()
            .map(|(i, &v)| clamp(v - tau, i))
            .sum::<f64>()
    };
    let mut lo = y.min() - 1.0;
    let mut hi = y.max();
    // ensure bracketing: total(lo) >= 1 >= total(hi)
    while total(lo) < 1.0 {
        lo -= 1.0 + (hi - lo);
        if !lo.is_finite() {
            break;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if total(mid) >= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 * (1.0 + hi.abs()) {
            break;
        }
    }
    let tau = 0.5 * (lo + hi);
    DVector::from_fn(y.len(), |i, _| clamp(y[i] - tau, i))
}
