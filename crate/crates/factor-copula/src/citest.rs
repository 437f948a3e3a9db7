//! Empirical-copula statistics, the bootstrap conditional-independence
//! test, the power-study harness, and the conjecture-scan experiment.
//!
//! The test statistic compares the upper Fréchet–Hoeffding bound with the
//! empirical copula: under conditional independence (product inner copula)
//! the gap is large, and positive inner dependence shrinks it.  The null
//! distribution is bootstrapped by refitting the product-inner model once
//! and simulating from it.

use crate::bicop::{Bicop, BicopFamily};
use crate::error::{FcError, Result};
use crate::factor_model::{FactorModel, FitTemplate, ParamLoc};
use crate::inference::{fit, FitConfig, FitResult, Optimizer};
use crate::innercop::{FactorLaw, FactorMapping, InnerCopula, InnerFamily};
use crate::normal::norm_cdf;
use crate::quadrature::IntegratorConfig;
use crate::sampling::{sample_eofc, RngHandle};
use crate::stats::{check_matrix, pseudo_observations};
use rayon::prelude::*;

/// Empirical copula of a pseudo-observation matrix: the step function
/// counting rows componentwise below the argument.
#[derive(Debug, Clone)]
pub struct EmpiricalCopula {
    pseudo: Vec<Vec<f64>>,
}

impl EmpiricalCopula {
    /// Wrap a pseudo-observation matrix (rows in the open unit cube).
    pub fn new(pseudo: Vec<Vec<f64>>) -> Result<Self> {
        let (_, _) = check_matrix(&pseudo)?;
        if pseudo
            .iter()
            .any(|row| row.iter().any(|&x| !(0.0..=1.0).contains(&x)))
        {
            return Err(FcError::Data(
                "pseudo-observations must lie in the unit interval".into(),
            ));
        }
        Ok(EmpiricalCopula { pseudo })
    }

    /// Number of observations.
    pub fn n(&self) -> usize {
        self.pseudo.len()
    }

    /// Number of variables.
    pub fn d(&self) -> usize {
        self.pseudo[0].len()
    }

    /// Fraction of rows componentwise `<= t`.
    pub fn eval(&self, t: &[f64]) -> f64 {
        empirical_copula_eval(&self.pseudo, t)
    }

    /// Fraction of rows componentwise strictly `< t` (the step function's
    /// left limit, used at its own jump corners).
    pub fn eval_strict(&self, t: &[f64]) -> f64 {
        let count = self
            .pseudo
            .iter()
            .filter(|row| row.iter().zip(t).all(|(&x, &b)| x < b))
            .count();
        count as f64 / self.pseudo.len() as f64
    }
}

/// Fraction of rows of `pseudo` componentwise `<= t`.
pub fn empirical_copula_eval(pseudo: &[Vec<f64>], t: &[f64]) -> f64 {
    if pseudo.is_empty() {
        return 0.0;
    }
    let count = pseudo
        .iter()
        .filter(|row| row.iter().zip(t).all(|(&x, &b)| x <= b))
        .count();
    count as f64 / pseudo.len() as f64
}

/// Supremum of `M(t) - C_hat(t)` over the unit cube, where `M` is the upper
/// Fréchet–Hoeffding bound and `C_hat` the empirical copula.
///
/// The supremum is computed exactly: lowering every coordinate of `t` to the
/// smallest one leaves `M` unchanged while `C_hat` can only shrink, so the
/// supremum lies on the diagonal, where it is approached just below the
/// per-row maxima of the pseudo-observations.  With rows sorted by their
/// maximum the statistic is `max_h [max_h - #(strictly smaller maxima)/n]`.
pub fn t_statistic(pseudo: &[Vec<f64>]) -> Result<f64> {
    let (n, _d) = check_matrix(pseudo)?;
    if n < 10 {
        return Err(FcError::Data(format!(
            "the test statistic needs at least 10 observations, got {n}"
        )));
    }
    let mut maxes: Vec<f64> = pseudo
        .iter()
        .map(|row| row.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
        .collect();
    maxes.sort_unstable_by(|a, b| a.partial_cmp(b).expect("pseudo-observations are finite"));
    let n_f = n as f64;
    let mut sup = 1.0 - maxes.iter().filter(|&&m| m < 1.0).count() as f64 / n_f;
    let mut i = 0;
    while i < n {
        sup = sup.max(maxes[i] - i as f64 / n_f);
        let tied = maxes[i];
        while i < n && maxes[i] == tied {
            i += 1;
        }
    }
    Ok(sup.max(0.0))
}

/// Which side of the bootstrap distribution rejects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestSide {
    /// Alternative of positive inner dependence (inner copula above the
    /// product): small statistics reject.
    Left,
    /// Alternative of negative inner dependence: large statistics reject.
    Right,
}

/// Bootstrap test configuration.
#[derive(Debug, Clone)]
pub struct CITestConfig {
    /// Number of bootstrap replicates.
    pub n_bootstrap: usize,
    /// Rejection risk level.
    pub alpha: f64,
    /// Tail that rejects.
    pub side: TestSide,
    /// Seed for the bootstrap streams.
    pub seed: u64,
    /// Configuration of the single null-model fit.  The default runs the
    /// simplex stage only: the product-inner likelihood in a few linking
    /// parameters is smooth and low-dimensional.
    pub fit: FitConfig,
}

impl Default for CITestConfig {
    fn default() -> Self {
        CITestConfig {
            n_bootstrap: 200,
            alpha: 0.1,
            side: TestSide::Left,
            seed: 0,
            fit: FitConfig {
                optimizer: Optimizer::LocalSimplex,
                restarts: 1,
                ..FitConfig::default()
            },
        }
    }
}

/// Outcome of the bootstrap conditional-independence test.
#[derive(Debug, Clone)]
pub struct CITestResult {
    /// Statistic of the observed data.
    pub t_obs: f64,
    /// Bootstrap statistics under the fitted null model.
    pub bootstrap: Vec<f64>,
    /// Bootstrap tail probability (multiple of `1/N`).
    pub p_value: f64,
    /// The null-model fit (product inner copula).
    pub h0_fit: FitResult,
    /// Risk level used for the decision.
    pub alpha: f64,
    /// Tail used for the decision.
    pub side: TestSide,
    /// Whether `p_value <= alpha`.
    pub reject: bool,
}

/// Bootstrap test of conditional independence given the common factor.
///
/// `linking` holds the known parametric linking family of each variable
/// (one layer) with starting parameter values.  The data are rank
/// transformed, the product-inner model is fitted once by maximum
/// pseudo-likelihood, `N` samples of the original size are simulated from
/// that fit, and the observed statistic is placed in their distribution.
pub fn ci_test(data: &[Vec<f64>], linking: &[Bicop], config: &CITestConfig) -> Result<CITestResult> {
    let (n, d) = check_matrix(data)?;
    if linking.len() != d {
        return Err(FcError::Domain(format!(
            "{} linking copulas for {d}-variate data",
            linking.len()
        )));
    }
    if config.n_bootstrap == 0 {
        return Err(FcError::Domain("the bootstrap needs at least one replicate".into()));
    }
    if !(0.0..=1.0).contains(&config.alpha) {
        return Err(FcError::Domain(format!("alpha {} outside [0, 1]", config.alpha)));
    }
    let pseudo = pseudo_observations(data)?;
    let t_obs = t_statistic(&pseudo)?;

    let h0_model = FactorModel::one_factor(linking.to_vec())?;
    let specs: Vec<(ParamLoc, Option<String>)> = (0..d)
        .filter(|&i| linking[i].family().has_parameter())
        .map(|i| (ParamLoc::Linking { var: i, layer: 0 }, None))
        .collect();
    if specs.is_empty() {
        return Err(FcError::Domain(
            "the test needs at least one parametric linking copula".into(),
        ));
    }
    let template = FitTemplate::new(h0_model, specs)?;
    let h0_fit = fit(&template, &pseudo, &config.fit)?;

    let handle = RngHandle::new(config.seed);
    let bootstrap: Vec<f64> = (0..config.n_bootstrap)
        .into_par_iter()
        .map(|k| {
            let rows = sample_eofc(&h0_fit.model, n, handle.child(k as u64))?;
            t_statistic(&pseudo_observations(&rows)?)
        })
        .collect::<Result<_>>()?;

    let nb = config.n_bootstrap as f64;
    let p_value = match config.side {
        TestSide::Left => bootstrap.iter().filter(|&&t| t <= t_obs).count() as f64 / nb,
        TestSide::Right => bootstrap.iter().filter(|&&t| t >= t_obs).count() as f64 / nb,
    };
    Ok(CITestResult {
        t_obs,
        bootstrap,
        p_value,
        h0_fit,
        alpha: config.alpha,
        side: config.side,
        reject: p_value <= config.alpha,
    })
}

/// Power-study scenario: the trivariate Clayton-linking design with an
/// exchangeable Gaussian inner copula of varying strength.
#[derive(Debug, Clone)]
pub struct PowerStudyConfig {
    /// Sample sizes.
    pub ns: Vec<usize>,
    /// Inner equicorrelations; `0` is the null.
    pub betas: Vec<f64>,
    /// Monte Carlo replications per cell.
    pub replications: usize,
    /// Bootstrap replicates inside each test.
    pub n_bootstrap: usize,
    /// Risk level.
    pub alpha: f64,
    /// Master seed.
    pub seed: u64,
    /// Kendall taus of the Clayton linking copulas (one per variable).
    pub linking_taus: Vec<f64>,
}

impl Default for PowerStudyConfig {
    fn default() -> Self {
        PowerStudyConfig {
            ns: vec![50, 500],
            betas: vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
            replications: 200,
            n_bootstrap: 100,
            alpha: 0.1,
            seed: 0,
            linking_taus: vec![0.4, 0.5, 0.6],
        }
    }
}

/// One cell of the power study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerRow {
    /// Sample size.
    pub n: usize,
    /// Inner equicorrelation of the generating model.
    pub beta: f64,
    /// Rejection rate across the replications.
    pub power: f64,
}

/// SplitMix64 step, used to derive independent seeds.
fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Rejection rate of the test across a grid of sample sizes and inner
/// dependence strengths.
pub fn power_study(config: &PowerStudyConfig) -> Result<Vec<PowerRow>> {
    let d = config.linking_taus.len();
    if d < 2 {
        return Err(FcError::Domain("the power study needs at least two variables".into()));
    }
    if config.replications == 0 {
        return Err(FcError::Domain("the power study needs at least one replication".into()));
    }
    let linking: Vec<Bicop> = config
        .linking_taus
        .iter()
        .map(|&t| Bicop::from_tau(BicopFamily::Clayton, t))
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(config.ns.len() * config.betas.len());
    for (ni, &n) in config.ns.iter().enumerate() {
        for (bi, &beta) in config.betas.iter().enumerate() {
            let inner = if beta == 0.0 {
                InnerCopula::independence(d)?
            } else {
                InnerCopula::new(
                    d,
                    InnerFamily::GaussianExchangeable,
                    vec![FactorMapping::Constant(beta)],
                    FactorLaw::Uniform,
                )?
            };
            let truth = FactorModel::new(
                linking.iter().map(|c| vec![*c]).collect(),
                inner,
            )?;
            let cell = (ni * config.betas.len() + bi) as u64;
            let rejections = (0..config.replications)
                .into_par_iter()
                .map(|rep| {
                    let cell_seed = splitmix64(
                        config.seed ^ splitmix64(cell << 32 | rep as u64),
                    );
                    let rows = sample_eofc(&truth, n, RngHandle::new(splitmix64(cell_seed)))?;
                    let test_config = CITestConfig {
                        n_bootstrap: config.n_bootstrap,
                        alpha: config.alpha,
                        seed: cell_seed,
                        ..CITestConfig::default()
                    };
                    let res = ci_test(&rows, &linking, &test_config)?;
                    Ok(res.reject as usize)
                })
                .collect::<Result<Vec<usize>>>()?
                .into_iter()
                .sum::<usize>();
            rows.push(PowerRow {
                n,
                beta,
                power: rejections as f64 / config.replications as f64,
            });
        }
    }
    Ok(rows)
}

/// One conjecture-scan setup: a conditionally invariant bivariate inner
/// copula and the two linking copulas.
#[derive(Debug, Clone)]
pub struct ConjectureSetup {
    /// Invariant bivariate inner copula.
    pub inner: InnerCopula,
    /// Linking copula of the first variable.
    pub c1: Bicop,
    /// Linking copula of the second variable.
    pub c2: Bicop,
}

impl ConjectureSetup {
    /// Build a setup, checking the preconditions.
    pub fn new(inner: InnerCopula, c1: Bicop, c2: Bicop) -> Result<Self> {
        if inner.dim() != 2 {
            return Err(FcError::Domain("the conjecture scan is bivariate".into()));
        }
        if !inner.is_invariant() {
            return Err(FcError::Domain(
                "the conjecture scan needs a conditionally invariant inner copula".into(),
            ));
        }
        Ok(ConjectureSetup { inner, c1, c2 })
    }

    /// Display label used in reports.
    pub fn label(&self) -> String {
        format!(
            "inner={} c1={}({}) c2={}({})",
            self.inner.family().name(),
            self.c1.family().name(),
            self.c1.theta(),
            self.c2.family().name(),
            self.c2.theta()
        )
    }
}

/// Conjecture-scan configuration.
#[derive(Debug, Clone)]
pub struct ConjectureScanConfig {
    /// Interior grid resolution per axis (points `k/(grid+1)`).
    pub grid: usize,
    /// Monte Carlo points per grid point.
    pub mc_points: usize,
    /// Seed for the Monte Carlo estimates.
    pub seed: u64,
}

impl Default for ConjectureScanConfig {
    fn default() -> Self {
        ConjectureScanConfig { grid: 10, mc_points: 200_000, seed: 0 }
    }
}

/// Scan result for one setup.
#[derive(Debug, Clone)]
pub struct ConjectureRow {
    /// Human-readable setup description.
    pub setup: String,
    /// Average left-tail p-value over the evaluated grid points.
    pub avg_p: f64,
    /// Grid points entering the average.
    pub evaluated: usize,
    /// Points skipped because the Monte Carlo error was zero while the
    /// difference was not.
    pub skipped: usize,
}

/// Numerical scan for outer-below-inner orderings.
///
/// For each setup and grid point the outer copula is estimated by Monte
/// Carlo with its standard error, standardised against the inner copula
/// value, and converted to a left-tail normal p-value; small averages
/// support the conjecture that the outer copula lies below the invariant
/// inner one.  Points where both the error and the difference vanish are
/// exact representations and contribute `0.5`.
pub fn conjecture_scan(
    setups: &[ConjectureSetup],
    config: &ConjectureScanConfig,
) -> Result<Vec<ConjectureRow>> {
    if config.grid == 0 {
        return Err(FcError::Domain("the scan grid must be positive".into()));
    }
    setups
        .iter()
        .enumerate()
        .map(|(si, setup)| {
            let model = FactorModel::new(
                vec![vec![setup.c1], vec![setup.c2]],
                setup.inner.clone(),
            )?;
            let m = config.grid;
            let points: Vec<(usize, usize)> =
                (1..=m).flat_map(|a| (1..=m).map(move |b| (a, b))).collect();
            let stats = points
                .par_iter()
                .map(|&(a, b)| {
                    let u = [a as f64 / (m as f64 + 1.0), b as f64 / (m as f64 + 1.0)];
                    let seed = splitmix64(config.seed ^ splitmix64((si * m * m + a * m + b) as u64));
                    let est = model.outer_cdf(&u, &IntegratorConfig::monte_carlo(config.mc_points, seed))?;
                    let inner_value = setup.inner.cdf(&u, 0.5)?;
                    let diff = est.value - inner_value;
                    if est.error == 0.0 {
                        // Exact representation (e.g. independence linking).
                        return Ok(if diff == 0.0 { Some(0.5) } else { None });
                    }
                    Ok(Some(norm_cdf(diff / est.error)))
                })
                .collect::<Result<Vec<Option<f64>>>>()?;
            let evaluated = stats.iter().flatten().count();
            let skipped = stats.len() - evaluated;
            if evaluated == 0 {
                return Err(FcError::Numeric(format!(
                    "conjecture scan for `{}` skipped every grid point",
                    setup.label()
                )));
            }
            let avg_p = stats.iter().flatten().sum::<f64>() / evaluated as f64;
            Ok(ConjectureRow { setup: setup.label(), avg_p, evaluated, skipped })
        })
        .collect()
}
