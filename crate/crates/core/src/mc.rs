//! Small-`n` Monte Carlo oracle: tabulates the squared-Vandermonde joint
//! density on a grid, samples configurations by inverse CDF on the
//! chain-rule conditionals, applies Bernoulli marking with conditioning
//! by rejection, and estimates generating functionals empirically.
//!
//! Exact enumeration is capped at `n <= 3`; the `n = 3` build streams the
//! cubic pass once to accumulate the pair marginal and draws the third
//! conditional on demand during sampling.

use crate::discrete::DiscreteEnsemble;
use crate::error::{CoreError, Result};
use crate::orthopoly::BiorthogonalSystem;
use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Tabulated joint density of an `n <= 3` ensemble on a grid.
pub struct GridDensity {
    grid: Vec<f64>,
    cell: f64,
    n: usize,
    log_w: Vec<f64>,
    /// Marginal of one particle, normalized to sum 1.
    p1: Vec<f64>,
    p1_cdf: Vec<f64>,
    /// Pair marginal `P(x1 = i, x2 = j)` (n >= 2), normalized.
    p12: Option<DMatrix<f64>>,
    /// Row-conditional CDFs of `P(x2 | x1 = i)`.
    cond2_cdf: Option<Vec<Vec<f64>>>,
    /// `log |x_i - x_j|` lookup (n = 3 third-conditional draws).
    log_dist: Option<DMatrix<f64>>,
    /// Normalization estimate of the unnormalized joint, including the
    /// grid cell volume.
    pub z_hat: f64,
}

const MAX_PARTICLES: usize = 3;
const MAX_GRID: usize = 500;

/// Where the tabulated weight comes from.
pub enum DensitySource<'a> {
    /// Continuous ensemble: weight `exp(-n V)` on a uniform grid of `m`
    /// cells over `span`.
    Continuous {
        system: &'a BiorthogonalSystem,
        span: (f64, f64),
        cells: usize,
    },
    /// Discrete ensemble: the node set itself is the grid.
    Discrete(&'a DiscreteEnsemble),
}

/// Tabulate the chain-rule factorization of the joint density
/// `prod_{j<k} (x_k - x_j)^2 prod_j w(x_j)`.
pub fn build_grid_density(source: &DensitySource) -> Result<GridDensity> {
    let (grid, cell, log_w, n) = match source {
        DensitySource::Continuous {
            system,
            span,
            cells,
        } => {
            let (lo, hi) = *span;
            if !(lo < hi) {
                return Err(CoreError::InvalidParameter(
                    "density span must be non-empty".into(),
                ));
            }
            let m = *cells;
            if m < 16 {
                return Err(CoreError::InvalidParameter(
                    "density grid needs at least 16 cells".into(),
                ));
            }
            let h = (hi - lo) / m as f64;
            let grid: Vec<f64> = (0..m).map(|i| lo + (i as f64 + 0.5) * h).collect();
            let n = system.n();
            let nf = n as f64;
            let pot = system.potential();
            let vmin = grid.iter().map(|&x| pot.v(x)).fold(f64::INFINITY, f64::min);
            let log_w: Vec<f64> = grid.iter().map(|&x| -nf * (pot.v(x) - vmin)).collect();
            (grid, h, log_w, n)
        }
        DensitySource::Discrete(ens) => {
            let log_w: Vec<f64> = ens
                .weights()
                .iter()
                .map(|&w| if w > 0.0 { w.ln() } else { -1e9 })
                .collect();
            (ens.nodes().to_vec(), 1.0, log_w, ens.particle_count())
        }
    };
    if n > MAX_PARTICLES {
        return Err(CoreError::CostGuard(format!(
            "exact enumeration is capped at n <= {MAX_PARTICLES}, got n = {n}"
        )));
    }
    let m = grid.len();
    if m > MAX_GRID {
        return Err(CoreError::CostGuard(format!(
            "density grid is capped at {MAX_GRID} cells, got {m}"
        )));
    }

    let mut gd = GridDensity {
        grid,
        cell,
        n,
        log_w,
        p1: Vec::new(),
        p1_cdf: Vec::new(),
        p12: None,
        cond2_cdf: None,
        log_dist: None,
        z_hat: 0.0,
    };
    match n {
        1 => gd.build_one(),
        2 => gd.build_two(),
        _ => gd.build_three(),
    }
    Ok(gd)
}

impl GridDensity {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn particle_count(&self) -> usize {
        self.n
    }

    /// One-particle marginal density (per unit length).
    pub fn marginal_density(&self, i: usize) -> f64 {
        self.p1[i] / self.cell
    }

    fn build_one(&mut self) {
        let max = self.log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let raw: Vec<f64> = self.log_w.iter().map(|&lw| (lw - max).exp()).collect();
        let total: f64 = raw.iter().sum();
        self.z_hat = total * self.cell * max.exp();
        self.p1 = raw.iter().map(|&r| r / total).collect();
        self.p1_cdf = cumsum(&self.p1);
    }

    fn build_two(&mut self) {
        let m = self.grid.len();
        let mut logp = DMatrix::from_element(m, m, f64::NEG_INFINITY);
        let mut max = f64::NEG_INFINITY;
        for i in 0..m {
            for j in 0..m {
                if i == j {
                    continue;
                }
                let d = (self.grid[i] - self.grid[j]).abs();
                let v = self.log_w[i] + self.log_w[j] + 2.0 * d.ln();
                logp[(i, j)] = v;
                max = max.max(v);
            }
        }
        let mut p = DMatrix::zeros(m, m);
        let mut total = 0.0;
        for i in 0..m {
            for j in 0..m {
                let e = logp[(i, j)] - max;
                let v = if e < -690.0 { 0.0 } else { e.exp() };
                p[(i, j)] = v;
                total += v;
            }
        }
        p /= total;
        self.z_hat = total * self.cell * self.cell * max.exp();
        self.p1 = (0..m).map(|i| p.row(i).sum()).collect();
        self.p1_cdf = cumsum(&self.p1);
        let cond: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                let row: Vec<f64> = (0..m).map(|j| p[(i, j)]).collect();
                let s: f64 = row.iter().sum();
                if s > 0.0 {
                    cumsum(&row.iter().map(|&v| v / s).collect::<Vec<_>>())
                } else {
                    vec![1.0; m]
                }
            })
            .collect();
        self.p12 = Some(p);
        self.cond2_cdf = Some(cond);
    }

    fn build_three(&mut self) {
        let m = self.grid.len();
        let log_dist = DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                f64::NEG_INFINITY
            } else {
                (self.grid[i] - self.grid[j]).abs().ln()
            }
        });
        // streaming cubic pass: first the max exponent, then accumulation
        let mut max = f64::NEG_INFINITY;
        for i in 0..m {
            for j in 0..m {
                if j == i {
                    continue;
                }
                let base = self.log_w[i] + self.log_w[j] + 2.0 * log_dist[(i, j)];
                for k in 0..m {
                    if k == i || k == j {
                        continue;
                    }
                    let e = base + self.log_w[k] + 2.0 * (log_dist[(i, k)] + log_dist[(j, k)]);
                    if e > max {
                        max = e;
                    }
                }
            }
        }
        let mut p12 = DMatrix::zeros(m, m);
        let mut total = 0.0;
        for i in 0..m {
            for j in 0..m {
                if j == i {
                    continue;
                }
                let base = self.log_w[i] + self.log_w[j] + 2.0 * log_dist[(i, j)];
                let mut acc = 0.0;
                for k in 0..m {
                    if k == i || k == j {
                        continue;
                    }
                    let e =
                        base + self.log_w[k] + 2.0 * (log_dist[(i, k)] + log_dist[(j, k)]) - max;
                    if e >= -690.0 {
                        acc += e.exp();
                    }
                }
                p12[(i, j)] = acc;
                total += acc;
            }
        }
        p12 /= total;
        self.z_hat = total * self.cell.powi(3) * max.exp();
        self.p1 = (0..m).map(|i| p12.row(i).sum()).collect();
        self.p1_cdf = cumsum(&self.p1);
        let cond: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                let row: Vec<f64> = (0..m).map(|j| p12[(i, j)]).collect();
                let s: f64 = row.iter().sum();
                if s > 0.0 {
                    cumsum(&row.iter().map(|&v| v / s).collect::<Vec<_>>())
                } else {
                    vec![1.0; m]
                }
            })
            .collect();
        self.p12 = Some(p12);
        self.cond2_cdf = Some(cond);
        self.log_dist = Some(log_dist);
    }

    fn draw_index(cdf: &[f64], u: f64) -> usize {
        cdf.partition_point(|&c| c < u).min(cdf.len() - 1)
    }

    fn draw_configuration(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let i = Self::draw_index(&self.p1_cdf, rng.gen::<f64>());
        if self.n == 1 {
            return vec![self.grid[i]];
        }
        let cond = self.cond2_cdf.as_ref().expect("built");
        let j = Self::draw_index(&cond[i], rng.gen::<f64>());
        if self.n == 2 {
            return vec![self.grid[i], self.grid[j]];
        }
        // third conditional on demand
        let ld = self.log_dist.as_ref().expect("built");
        let m = self.grid.len();
        let mut row = vec![0.0; m];
        let mut max = f64::NEG_INFINITY;
        for k in 0..m {
            if k == i || k == j {
                row[k] = f64::NEG_INFINITY;
                continue;
            }
            let e = self.log_w[k] + 2.0 * (ld[(i, k)] + ld[(j, k)]);
            row[k] = e;
            max = max.max(e);
        }
        let probs: Vec<f64> = row
            .iter()
            .map(|&e| {
                if e - max < -690.0 {
                    0.0
                } else {
                    (e - max).exp()
                }
            })
            .collect();
        let s: f64 = probs.iter().sum();
        let cdf = cumsum(&probs.iter().map(|&v| v / s).collect::<Vec<_>>());
        let k = Self::draw_index(&cdf, rng.gen::<f64>());
        vec![self.grid[i], self.grid[j], self.grid[k]]
    }
}

fn cumsum(p: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(p.len());
    for &v in p {
        acc += v;
        out.push(acc);
    }
    if let Some(last) = out.last_mut() {
        *last = 1.0;
    }
    out
}

/// Draw `count` i.i.d. configurations by inverse CDF on the tabulated
/// conditionals; deterministic under a fixed seed.
pub fn sample(density: &GridDensity, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if count == 0 {
        return Err(CoreError::InvalidParameter(
            "sample count must be >= 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| density.draw_configuration(&mut rng))
        .collect())
}

/// One configuration with its Bernoulli marks.
#[derive(Debug, Clone)]
pub struct MarkedSample {
    pub positions: Vec<f64>,
    pub marks: Vec<bool>,
    /// All marks zero: the configuration survives the conditioning.
    pub accepted: bool,
}

/// Output of marking and conditioning.
#[derive(Debug, Clone)]
pub struct MarkedSet {
    pub samples: Vec<MarkedSample>,
    /// Accepted configurations (all marks zero).
    pub accepted: Vec<Vec<f64>>,
    /// Empirical estimate of the conditioning probability.
    pub acceptance_rate: f64,
    pub acceptance_std_error: f64,
}

/// Attach independent Bernoulli(`sigma(u_j)`) marks to every particle
/// and condition on all marks being zero.
///
/// Aborts with [`CoreError::AcceptanceStarvation`] when fewer than 0.1%
/// of the first ten thousand configurations survive.
pub fn mark_and_condition(
    samples: &[Vec<f64>],
    sigma: &dyn Fn(f64) -> f64,
    seed: u64,
) -> Result<MarkedSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(samples.len());
    let mut accepted = Vec::new();
    let mut n_accepted = 0usize;
    for (idx, config) in samples.iter().enumerate() {
        let marks: Vec<bool> = config
            .iter()
            .map(|&u| {
                let s = sigma(u);
                debug_assert!((0.0..=1.0).contains(&s), "sigma out of range: {s}");
                rng.gen::<f64>() < s
            })
            .collect();
        let ok = marks.iter().all(|&m| !m);
        if ok {
            n_accepted += 1;
            accepted.push(config.clone());
        }
        out.push(MarkedSample {
            positions: config.clone(),
            marks,
            accepted: ok,
        });
        let trials = idx + 1;
        if trials == 10_000 && (n_accepted as f64) < 1e-3 * trials as f64 {
            return Err(CoreError::AcceptanceStarvation {
                rate: n_accepted as f64 / trials as f64,
                trials,
            });
        }
    }
    let trials = samples.len();
    let rate = n_accepted as f64 / trials as f64;
    Ok(MarkedSet {
        samples: out,
        accepted,
        acceptance_rate: rate,
        acceptance_std_error: (rate * (1.0 - rate) / trials as f64).sqrt(),
    })
}

/// Empirical mean and standard error.
#[derive(Debug, Clone, Copy)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub count: usize,
}

impl McEstimate {
    /// `(mean - reference) / std_error`; infinite when the spread is zero
    /// and the values disagree.
    pub fn z_score(&self, reference: f64) -> f64 {
        let diff = self.mean - reference;
        if self.std_error == 0.0 {
            if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY * diff.signum()
            }
        } else {
            diff / self.std_error
        }
    }
}

/// Estimate `E prod_k (1 - h(u_k))` over accepted configurations.
pub fn estimate_pgf(accepted: &[Vec<f64>], h: &dyn Fn(f64) -> f64) -> Result<McEstimate> {
    const MIN_SAMPLES: usize = 100;
    if accepted.len() < MIN_SAMPLES {
        return Err(CoreError::InsufficientStatistics {
            got: accepted.len(),
            need: MIN_SAMPLES,
        });
    }
    let vals: Vec<f64> = accepted
        .iter()
        .map(|config| config.iter().map(|&u| 1.0 - h(u)).product())
        .collect();
    let count = vals.len();
    let mean = vals.iter().sum::<f64>() / count as f64;
    let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (count as f64 - 1.0);
    Ok(McEstimate {
        mean,
        std_error: (var / count as f64).sqrt(),
        count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Potential;

    fn hermite_density(n: usize, cells: usize) -> GridDensity {
        let sys = BiorthogonalSystem::build(&Potential::quadratic(), n).unwrap();
        build_grid_density(&DensitySource::Continuous {
            system: &sys,
            span: (-2.5, 2.5),
            cells,
        })
        .unwrap()
    }

    #[test]
    fn one_particle_marginal_matches_kernel_diagonal() {
        let sys = BiorthogonalSystem::build(&Potential::quadratic(), 1).unwrap();
        let gd = build_grid_density(&DensitySource::Continuous {
            system: &sys,
            span: (-3.5, 3.5),
            cells: 280,
        })
        .unwrap();
        // density ~ w, and k_1(x,x) integrates to 1: compare pointwise
        let mut worst = 0.0f64;
        for (i, &x) in gd.grid().iter().enumerate() {
            let want = crate::orthopoly::cd_kernel(&sys, x, x);
            worst = worst.max((gd.marginal_density(i) - want).abs());
        }
        assert!(worst < 1e-4, "sup error {worst:.3e}");
    }

    #[test]
    fn two_particle_marginal_matches_kernel_diagonal() {
        let n = 2;
        let sys = BiorthogonalSystem::build(&Potential::quadratic(), n).unwrap();
        let gd = build_grid_density(&DensitySource::Continuous {
            system: &sys,
            span: (-2.5, 2.5),
            cells: 400,
        })
        .unwrap();
        let mut worst = 0.0f64;
        for (i, &x) in gd.grid().iter().enumerate() {
            let want = crate::orthopoly::cd_kernel(&sys, x, x) / n as f64;
            worst = worst.max((gd.marginal_density(i) - want).abs());
        }
        assert!(worst < 2e-3, "sup error {worst:.3e}");
    }

    #[test]
    fn joint_vanishes_on_diagonal_and_samples_distinct() {
        let gd = hermite_density(2, 120);
        let p12 = gd.p12.as_ref().unwrap();
        for i in 0..gd.grid().len() {
            assert_eq!(p12[(i, i)], 0.0);
        }
        for config in sample(&gd, 500, 11).unwrap() {
            assert_ne!(config[0], config[1]);
        }
    }

    #[test]
    fn pair_marginal_is_permutation_symmetric() {
        let gd = hermite_density(2, 120);
        let p12 = gd.p12.as_ref().unwrap();
        for i in 0..gd.grid().len() {
            for j in (i + 1)..gd.grid().len() {
                let diff = (p12[(i, j)] - p12[(j, i)]).abs();
                assert!(diff < 1e-15, "asymmetry {diff} at ({i},{j})");
            }
        }
    }

    #[test]
    fn sampling_is_deterministic_under_seed() {
        let gd = hermite_density(2, 80);
        let a = sample(&gd, 64, 42).unwrap();
        let b = sample(&gd, 64, 42).unwrap();
        assert_eq!(a, b);
        let c = sample(&gd, 64, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sigma_zero_accepts_everything() {
        let gd = hermite_density(2, 80);
        let samples = sample(&gd, 300, 5).unwrap();
        let marked = mark_and_condition(&samples, &|_| 0.0, 7).unwrap();
        assert_eq!(marked.acceptance_rate, 1.0);
        assert_eq!(marked.accepted.len(), 300);
    }

    #[test]
    fn hard_indicator_empties_the_interval() {
        let gd = hermite_density(2, 120);
        let samples = sample(&gd, 4000, 5).unwrap();
        let sigma = |u: f64| if (-0.5 < u) && (u < 0.5) { 1.0 } else { 0.0 };
        let marked = mark_and_condition(&samples, &sigma, 7).unwrap();
        assert!(!marked.accepted.is_empty());
        for config in &marked.accepted {
            assert!(config.iter().all(|&u| u.abs() >= 0.5));
        }
    }

    #[test]
    fn starvation_guard_fires() {
        let gd = hermite_density(1, 80);
        let samples = sample(&gd, 20_000, 5).unwrap();
        // sigma = 1 everywhere the particle can be
        let r = mark_and_condition(&samples, &|_| 1.0, 7);
        assert!(matches!(r, Err(CoreError::AcceptanceStarvation { .. })));
    }

    #[test]
    fn marking_independence_two_particles() {
        // joint mark frequency factorizes within 4/sqrt(count)
        let gd = hermite_density(2, 120);
        let count = 40_000;
        let samples = sample(&gd, count, 5).unwrap();
        let marked =
            mark_and_condition(&samples, &|u| 0.3 + 0.2 * (u > 0.0) as u8 as f64, 9).unwrap();
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        let mut m12 = 0.0;
        for s in &marked.samples {
            let (a, b) = (s.marks[0] as u8 as f64, s.marks[1] as u8 as f64);
            m1 += a;
            m2 += b;
            m12 += a * b;
        }
        let nf = count as f64;
        let (m1, m2, m12) = (m1 / nf, m2 / nf, m12 / nf);
        assert!(
            (m12 - m1 * m2).abs() < 4.0 / nf.sqrt(),
            "joint {m12} vs product {}",
            m1 * m2
        );
    }

    #[test]
    fn pgf_estimate_basics() {
        let gd = hermite_density(2, 80);
        let samples = sample(&gd, 2000, 5).unwrap();
        // h = 0: estimator is exactly one with zero spread
        let est = estimate_pgf(&samples, &|_| 0.0).unwrap();
        assert_eq!(est.mean, 1.0);
        assert_eq!(est.std_error, 0.0);
        // nested h: larger h gives smaller mean
        let h1 = |u: f64| if u.abs() < 0.5 { 0.3 } else { 0.0 };
        let h2 = |u: f64| if u.abs() < 0.5 { 0.6 } else { 0.0 };
        let e1 = estimate_pgf(&samples, &h1).unwrap();
        let e2 = estimate_pgf(&samples, &h2).unwrap();
        assert!(e2.mean < e1.mean);
        // too few samples
        assert!(matches!(
            estimate_pgf(&samples[..50], &h1),
            Err(CoreError::InsufficientStatistics { .. })
        ));
    }

    #[test]
    fn cost_guards() {
        let sys = BiorthogonalSystem::build(&Potential::quadratic(), 4).unwrap();
        let r = build_grid_density(&DensitySource::Continuous {
            system: &sys,
            span: (-2.0, 2.0),
            cells: 100,
        });
        assert!(matches!(r, Err(CoreError::CostGuard(_))));
    }
}
