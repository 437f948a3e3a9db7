//! Maximum pseudo-likelihood estimation and numerical Fisher information.
//!
//! Margins are handled nonparametrically by ranks (pseudo-observations); the
//! copula parameters are then estimated by maximizing the sum of log
//! densities.  Optimization runs on the fit scale declared by the template
//! (Kendall tau for one-parameter copula families, native otherwise) with a
//! stochastic population search, a derivative-free simplex, or both.
//!
//! The Fisher information of a parameter point is estimated from central
//! finite differences of the log density, either averaged over a simulated
//! sample (positive semidefinite by construction) or integrated against the
//! density.

use crate::error::{FcError, Result};
use crate::factor_model::{FactorModel, FitTemplate};
use crate::quadrature::{integrate_unit_cube, IntegratorConfig, IntegratorKind};
use crate::sampling::{sample_neofc, RngHandle};
pub use crate::stats::pseudo_observations;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

/// Density floor for log-likelihood terms; floored observations are counted
/// rather than failing the evaluation.
pub const DENSITY_FLOOR: f64 = 1e-300;

/// Log-likelihood value together with the floored-observation diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Loglik {
    /// Sum of log densities (floored terms included).
    pub value: f64,
    /// Number of observations whose density estimate was not positive.
    pub floored: usize,
}

/// Log-likelihood of a concrete model on pseudo-observations.
pub fn loglik_model(model: &FactorModel, pseudo: &[Vec<f64>], cfg: &IntegratorConfig) -> Result<Loglik> {
    if pseudo.is_empty() {
        return Err(FcError::Data("log-likelihood needs at least one observation".into()));
    }
    let terms: Vec<(f64, bool)> = pseudo
        .par_iter()
        .map(|row| {
            let dens = model.density(row, cfg)?.value;
            if dens.is_finite() && dens > 0.0 {
                Ok((dens.ln(), false))
            } else {
                Ok((DENSITY_FLOOR.ln(), true))
            }
        })
        .collect::<Result<_>>()?;
    let value = terms.iter().map(|t| t.0).sum();
    let floored = terms.iter().filter(|t| t.1).count();
    if floored == pseudo.len() {
        return Err(FcError::Numeric(
            "degenerate fit: every observation hit the density floor".into(),
        ));
    }
    Ok(Loglik { value, floored })
}

/// Log-likelihood of a template at the fit-scale point `x`.
pub fn loglik(
    template: &FitTemplate,
    pseudo: &[Vec<f64>],
    x: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Loglik> {
    loglik_model(&template.instantiate(x)?, pseudo, cfg)
}

/// Optimizer selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Optimizer {
    /// Differential-evolution population search over the box.
    GlobalPopulation,
    /// Nelder–Mead simplex from the template's initial point plus random
    /// restarts.
    LocalSimplex,
    /// Population search followed by a simplex polish.
    Both,
}

/// Fitting configuration.
#[derive(Debug, Clone)]
pub struct FitConfig {
    /// Optimizer route.
    pub optimizer: Optimizer,
    /// Extra random starts for the simplex stage (best result retained).
    pub restarts: usize,
    /// Seed controlling starts, the population search, and the fixed
    /// per-fit integration seed (common random numbers).
    pub seed: u64,
    /// Per-observation integrator; `None` picks the model default (adaptive
    /// for one layer, Monte Carlo otherwise) with the fit seed.
    pub integrator: Option<IntegratorConfig>,
    /// Population-search generations.
    pub de_generations: usize,
    /// Population size; `None` means `10 * n_free`.
    pub de_population: Option<usize>,
    /// Simplex iteration cap.
    pub nm_max_iters: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            optimizer: Optimizer::Both,
            restarts: 0,
            seed: 0,
            integrator: None,
            de_generations: 200,
            de_population: None,
            nm_max_iters: 400,
        }
    }
}

/// Result of a maximum pseudo-likelihood fit.
#[derive(Debug, Clone)]
pub struct FitResult {
    /// Optimum on the fit scale (tau for tau-scale parameters).
    pub x: Vec<f64>,
    /// Flat native parameter vector of the fitted model, registry order.
    pub theta_hat: Vec<f64>,
    /// The fitted model.
    pub model: FactorModel,
    /// Log-likelihood at the optimum.
    pub loglik: f64,
    /// Observations at the density floor in the final evaluation.
    pub floored: usize,
    /// Objective evaluations spent.
    pub n_evals: usize,
    /// Whether the final stage met its convergence test.
    pub converged: bool,
    /// Box bounds used, fit scale.
    pub bounds: Vec<(f64, f64)>,
}

fn resolve_integrator(template: &FitTemplate, config: &FitConfig) -> IntegratorConfig {
    match &config.integrator {
        Some(cfg) => cfg.clone(),
        None => {
            let mut cfg = IntegratorConfig::default_for_layers(template.base().w());
            if cfg.kind != IntegratorKind::Adaptive1D {
                cfg.seed = config.seed;
            }
            cfg
        }
    }
}

/// Maximize the pseudo-likelihood of `template` on `pseudo`.
pub fn fit(template: &FitTemplate, pseudo: &[Vec<f64>], config: &FitConfig) -> Result<FitResult> {
    let p = template.n_free();
    let bounds = template.bounds();
    let int_cfg = resolve_integrator(template, config);
    let mut n_evals = 0usize;
    // Minimized objective: negative log-likelihood, +inf outside the domain.
    let mut objective = |x: &[f64]| -> f64 {
        n_evals += 1;
        match loglik(template, pseudo, x, &int_cfg) {
            Ok(ll) => -ll.value,
            Err(_) => f64::INFINITY,
        }
    };

    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let mut best_x = template.initial();
    let mut best_f = objective(&best_x);
    let mut converged = false;

    if matches!(config.optimizer, Optimizer::GlobalPopulation | Optimizer::Both) {
        let np = config.de_population.unwrap_or(10 * p).max(5);
        let (x, f) = differential_evolution(
            &mut objective,
            &bounds,
            np,
            config.de_generations,
            &mut rng,
            Some((best_x.clone(), best_f)),
        );
        if f < best_f {
            best_x = x;
            best_f = f;
        }
        converged = best_f.is_finite();
    }

    if matches!(config.optimizer, Optimizer::LocalSimplex | Optimizer::Both) {
        let mut starts = vec![best_x.clone()];
        for _ in 0..config.restarts {
            starts.push(
                bounds
                    .iter()
                    .map(|(lo, hi)| lo + (hi - lo) * rng.random::<f64>())
                    .collect(),
            );
        }
        converged = false;
        for start in starts {
            let (x, f, ok) = nelder_mead(&mut objective, &start, &bounds, config.nm_max_iters);
            if f < best_f {
                best_x = x;
                best_f = f;
                converged = ok;
            } else if f == best_f {
                converged = converged || ok;
            }
        }
    }

    if !best_f.is_finite() {
        return Err(FcError::Numeric(
            "fit failed: the likelihood is non-finite everywhere it was evaluated".into(),
        ));
    }
    let final_ll = loglik(template, pseudo, &best_x, &int_cfg)?;
    let model = template.instantiate(&best_x)?;
    Ok(FitResult {
        x: best_x,
        theta_hat: model.params(),
        model,
        loglik: final_ll.value,
        floored: final_ll.floored,
        n_evals,
        converged,
        bounds,
    })
}

/// Differential evolution (rand/1/bin) over a box; returns the best point
/// and value.  An optional known point is injected into the population.
fn differential_evolution<F: FnMut(&[f64]) -> f64>(
    f: &mut F,
    bounds: &[(f64, f64)],
    np: usize,
    generations: usize,
    rng: &mut ChaCha12Rng,
    inject: Option<(Vec<f64>, f64)>,
) -> (Vec<f64>, f64) {
    let p = bounds.len();
    let (f_weight, cr) = (0.8, 0.9);
    let mut pop: Vec<Vec<f64>> = (0..np)
        .map(|_| {
            bounds
                .iter()
                .map(|(lo, hi)| lo + (hi - lo) * rng.random::<f64>())
                .collect()
        })
        .collect();
    let mut fit: Vec<f64> = pop.iter().map(|x| f(x)).collect();
    if let Some((x0, f0)) = inject {
        if x0.len() == p && f0.is_finite() {
            pop[0] = x0;
            fit[0] = f0;
        }
    }
    let mut trial = vec![0.0f64; p];
    for _ in 0..generations {
        for i in 0..np {
            let pick = |rng: &mut ChaCha12Rng, avoid: &[usize]| loop {
                let r = rng.random_range(0..np);
                if !avoid.contains(&r) {
                    return r;
                }
            };
            let r1 = pick(rng, &[i]);
            let r2 = pick(rng, &[i, r1]);
            let r3 = pick(rng, &[i, r1, r2]);
            let j_rand = rng.random_range(0..p);
            for j in 0..p {
                trial[j] = if j == j_rand || rng.random::<f64>() < cr {
                    let v = pop[r1][j] + f_weight * (pop[r2][j] - pop[r3][j]);
                    v.clamp(bounds[j].0, bounds[j].1)
                } else {
                    pop[i][j]
                };
            }
            let ft = f(&trial);
            if ft <= fit[i] {
                pop[i].copy_from_slice(&trial);
                fit[i] = ft;
            }
        }
        // Population collapse: nothing left to explore.
        let (lo, hi) = fit
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        if hi - lo < 1e-10 && hi.is_finite() {
            break;
        }
    }
    let best = (0..np).min_by(|&a, &b| fit[a].total_cmp(&fit[b])).unwrap();
    (pop[best].clone(), fit[best])
}

/// Nelder–Mead simplex minimization clipped to a box.  Returns the best
/// point, its value, and whether the spread-based convergence test was met.
fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    f: &mut F,
    start: &[f64],
    bounds: &[(f64, f64)],
    max_iters: usize,
) -> (Vec<f64>, f64, bool) {
    let p = start.len();
    let clip = |x: &mut Vec<f64>| {
        for (v, (lo, hi)) in x.iter_mut().zip(bounds) {
            *v = v.clamp(*lo, *hi);
        }
    };
    // Initial simplex: start point plus per-coordinate steps of a tenth of
    // the box, flipped when that would leave it.
    let mut simplex: Vec<Vec<f64>> = vec![start.to_vec()];
    for j in 0..p {
        let mut v = start.to_vec();
        let step = 0.1 * (bounds[j].1 - bounds[j].0);
        v[j] = if v[j] + step <= bounds[j].1 { v[j] + step } else { v[j] - step };
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| f(x)).collect();
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut converged = false;
    for _ in 0..max_iters {
        let mut order: Vec<usize> = (0..=p).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let (best, worst, second_worst) = (order[0], order[p], order[p - 1]);
        if (values[worst] - values[best]).abs()
            <= 1e-9 * (1.0 + values[best].abs())
        {
            converged = true;
            break;
        }
        // Centroid of all but the worst.
        let mut centroid = vec![0.0f64; p];
        for (k, x) in simplex.iter().enumerate() {
            if k != worst {
                for j in 0..p {
                    centroid[j] += x[j] / p as f64;
                }
            }
        }
        let mut reflected: Vec<f64> = (0..p)
            .map(|j| centroid[j] + alpha * (centroid[j] - simplex[worst][j]))
            .collect();
        clip(&mut reflected);
        let f_r = f(&reflected);
        if f_r < values[best] {
            let mut expanded: Vec<f64> = (0..p)
                .map(|j| centroid[j] + gamma * (reflected[j] - centroid[j]))
                .collect();
            clip(&mut expanded);
            let f_e = f(&expanded);
            if f_e < f_r {
                simplex[worst] = expanded;
                values[worst] = f_e;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_r;
            }
        } else if f_r < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = f_r;
        } else {
            let mut contracted: Vec<f64> = (0..p)
                .map(|j| centroid[j] + rho * (simplex[worst][j] - centroid[j]))
                .collect();
            clip(&mut contracted);
            let f_c = f(&contracted);
            if f_c < values[worst] {
                simplex[worst] = contracted;
                values[worst] = f_c;
            } else {
                // Shrink towards the best vertex.
                let best_point = simplex[best].clone();
                for (k, x) in simplex.iter_mut().enumerate() {
                    if k != best {
                        for j in 0..p {
                            x[j] = best_point[j] + sigma * (x[j] - best_point[j]);
                        }
                        values[k] = f(x);
                    }
                }
            }
        }
    }
    let best = (0..=p).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
    (simplex[best].clone(), values[best], converged)
}

/// Fisher estimation route.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FisherMethod {
    /// Average the score outer product over a simulated sample of size `n`.
    SampleBased {
        /// Simulated sample size.
        n: usize,
    },
    /// Integrate the score outer product against the density over the cube.
    QuadratureBased,
}

/// Fisher estimation configuration.
#[derive(Debug, Clone)]
pub struct FisherConfig {
    /// Estimator.
    pub method: FisherMethod,
    /// Relative step for the central differences of the log density.
    pub fd_step: f64,
    /// Seed for the simulated sample / integration rule.
    pub seed: u64,
    /// Integrator for per-observation densities; `None` picks the model
    /// default.
    pub integrator: Option<IntegratorConfig>,
    /// Points for the quadrature-based route.
    pub quadrature_points: usize,
}

impl Default for FisherConfig {
    fn default() -> Self {
        FisherConfig {
            method: FisherMethod::SampleBased { n: 100_000 },
            fd_step: 1e-4,
            seed: 0,
            integrator: None,
            quadrature_points: 4096,
        }
    }
}

/// Numerical Fisher information at a native-scale parameter point.
#[derive(Debug, Clone)]
pub struct FisherResult {
    /// Symmetric p×p information estimate.
    pub matrix: Vec<Vec<f64>>,
    /// Determinant of the estimate (local-identifiability screen).
    pub determinant: f64,
    /// Estimator used.
    pub method: FisherMethod,
    /// Base relative step.
    pub fd_step: f64,
    /// Actual absolute steps per parameter (shrunk near domain edges).
    pub steps: Vec<f64>,
}

/// Estimate the Fisher information of the template's free parameters at the
/// native-scale point `theta_r`.
///
/// Scores are central finite differences of the log density in the model's
/// own parameterisation; steps that leave the parameter domain are halved
/// until the perturbed model is admissible.
pub fn fisher_information(
    template: &FitTemplate,
    theta_r: &[f64],
    config: &FisherConfig,
) -> Result<FisherResult> {
    let p = template.n_free();
    if theta_r.len() != p {
        return Err(FcError::Domain(format!(
            "expected {} native parameter values, got {}",
            p,
            theta_r.len()
        )));
    }
    let center = template.instantiate_native(theta_r)?;
    let int_cfg = config
        .integrator
        .clone()
        .unwrap_or_else(|| IntegratorConfig::default_for_layers(center.w()));
    // Perturbed models with per-parameter steps shrunk to stay admissible.
    let mut perturbed: Vec<(FactorModel, FactorModel)> = Vec::with_capacity(p);
    let mut steps = Vec::with_capacity(p);
    for k in 0..p {
        let mut h = config.fd_step * (1.0 + theta_r[k].abs());
        let mut pair = None;
        for _ in 0..12 {
            let mut up = theta_r.to_vec();
            let mut dn = theta_r.to_vec();
            up[k] += h;
            dn[k] -= h;
            match (template.instantiate_native(&up), template.instantiate_native(&dn)) {
                (Ok(a), Ok(b)) => {
                    pair = Some((a, b));
                    break;
                }
                _ => h *= 0.5,
            }
        }
        let (up, dn) = pair.ok_or_else(|| {
            FcError::Domain(format!(
                "parameter {k} cannot be perturbed inside its domain at {}",
                theta_r[k]
            ))
        })?;
        perturbed.push((up, dn));
        steps.push(h);
    }

    let score = |u: &[f64]| -> Result<Vec<f64>> {
        let mut s = vec![0.0f64; p];
        for k in 0..p {
            let up = perturbed[k].0.density(u, &int_cfg)?.value.max(DENSITY_FLOOR);
            let dn = perturbed[k].1.density(u, &int_cfg)?.value.max(DENSITY_FLOOR);
            s[k] = (up.ln() - dn.ln()) / (2.0 * steps[k]);
        }
        Ok(s)
    };

    let matrix = match config.method {
        FisherMethod::SampleBased { n } => {
            if n == 0 {
                return Err(FcError::Domain("sample-based Fisher needs n > 0".into()));
            }
            let rows = sample_neofc(&center, n, RngHandle::new(config.seed))?;
            let acc = rows
                .par_iter()
                .map(|row| {
                    let s = score(row)?;
                    let mut m = vec![0.0f64; p * p];
                    for a in 0..p {
                        for b in 0..p {
                            m[a * p + b] = s[a] * s[b];
                        }
                    }
                    Ok(m)
                })
                .try_reduce(
                    || vec![0.0f64; p * p],
                    |mut x, y| {
                        for (xa, ya) in x.iter_mut().zip(&y) {
                            *xa += ya;
                        }
                        Ok(x)
                    },
                )?;
            (0..p)
                .map(|a| (0..p).map(|b| acc[a * p + b] / n as f64).collect())
                .collect::<Vec<Vec<f64>>>()
        }
        FisherMethod::QuadratureBased => {
            let d = center.d();
            let mut matrix = vec![vec![0.0f64; p]; p];
            for a in 0..p {
                for b in a..p {
                    let f = |u: &[f64]| -> Result<f64> {
                        let s = score(u)?;
                        let dens = center.density(u, &int_cfg)?.value.max(0.0);
                        Ok(s[a] * s[b] * dens)
                    };
                    let est = integrate_unit_cube(
                        &f,
                        d,
                        &IntegratorConfig::quasi_monte_carlo(config.quadrature_points, config.seed),
                    )?;
                    matrix[a][b] = est.value;
                    matrix[b][a] = est.value;
                }
            }
            matrix
        }
    };
    let determinant = det(&matrix);
    Ok(FisherResult { matrix, determinant, method: config.method, fd_step: config.fd_step, steps })
}

/// Determinant by partial-pivot elimination (the matrices here are tiny).
fn det(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut sign = 1.0;
    let mut d = 1.0;
    for k in 0..n {
        let piv = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        if a[piv][k] == 0.0 {
            return 0.0;
        }
        if piv != k {
            a.swap(piv, k);
            sign = -sign;
        }
        d *= a[k][k];
        for i in k + 1..n {
            let r = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= r * a[k][j];
            }
        }
    }
    sign * d
}
