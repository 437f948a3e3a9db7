//! Inner (conditional) copula families.
//!
//! The inner copula describes the dependence that remains between the
//! coordinates *given* the latent factor of the last layer.  Its parameters
//! may vary with the factor through a [`FactorMapping`]; a constant mapping
//! gives a conditionally invariant inner copula.
//!
//! Implemented families: independence, exchangeable Gaussian, the Clayton,
//! Gumbel–Hougaard and Frank Archimedean classes (any dimension, with
//! log-space generator-derivative densities), the upper Fréchet bound, and a
//! one-level truncated C-vine with arbitrary absolutely continuous pair
//! copulas.
//!
//! Exact sampling uses the Marshall–Olkin frailty scheme for the Archimedean
//! families (gamma, positive-stable, and logarithmic frailties); the
//! remaining families have direct constructions.  The bivariate Frank family
//! with negative parameter — a valid copula even though no frailty exists —
//! falls back to conditional inversion.

use crate::bicop::{clamp_unit, Bicop, BicopFamily, CLAMP_EPS};
use crate::error::{FcError, Result};
use crate::normal::{bvn_cdf, norm_cdf, norm_quantile};
use crate::quadrature::gauss_legendre_01;
use rand::Rng;
use rand_distr::{Distribution, Gamma};

/// Marginal law of a latent factor, used when a mapping reads the factor on
/// its natural (quantile-transformed) scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FactorLaw {
    /// Standard uniform on `[0, 1]`.
    Uniform,
    /// Exponential with the given rate.
    Exponential(f64),
    /// Pareto with unit shape and scale: quantile `1 / (1 - u)`.
    Pareto,
}

impl FactorLaw {
    /// Quantile function mapping the uniform coordinate to the natural scale.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = clamp_unit(u);
        match self {
            FactorLaw::Uniform => u,
            FactorLaw::Exponential(rate) => -(-u).ln_1p() / rate,
            FactorLaw::Pareto => 1.0 / (1.0 - u),
        }
    }

    /// Canonical name for the text formats.
    pub fn name(&self) -> &'static str {
        match self {
            FactorLaw::Uniform => "uniform",
            FactorLaw::Exponential(_) => "exponential",
            FactorLaw::Pareto => "pareto",
        }
    }

    /// Validate the law's parameter.
    pub fn validate(&self) -> Result<()> {
        if let FactorLaw::Exponential(rate) = self {
            if !(rate.is_finite() && *rate > 0.0) {
                return Err(FcError::Domain(format!(
                    "exponential factor law needs a positive rate (got {rate})"
                )));
            }
        }
        Ok(())
    }
}

/// Monotone cubic (Fritsch–Butland) interpolant used by table mappings.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    ms: Vec<f64>,
}

impl MonotoneCubic {
    /// Build from strictly increasing `xs` spanning `[0, 1]` and monotone `ys`.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(FcError::Domain(
                "table mapping needs at least two knots with equal lengths".into(),
            ));
        }
        if xs[0] != 0.0 || *xs.last().unwrap() != 1.0 {
            return Err(FcError::Domain("table mapping knots must span [0, 1]".into()));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(FcError::Domain("table mapping knots must be strictly increasing".into()));
        }
        let increasing = ys.windows(2).all(|w| w[1] >= w[0]);
        let decreasing = ys.windows(2).all(|w| w[1] <= w[0]);
        if !increasing && !decreasing {
            return Err(FcError::Domain("table mapping values must be monotone".into()));
        }
        let n = xs.len();
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
        let mut ms = vec![0.0; n];
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] <= 0.0 {
                ms[i] = 0.0;
            } else {
                // Fritsch–Butland weighted harmonic mean preserves monotonicity.
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                ms[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        // One-sided endpoint slopes, clipped to keep monotonicity.
        let end_slope = |d0: f64, d1: f64, h0: f64, h1: f64| -> f64 {
            let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
            if m * d0 <= 0.0 {
                0.0
            } else if d0 * d1 < 0.0 && m.abs() > 3.0 * d0.abs() {
                3.0 * d0
            } else {
                m
            }
        };
        ms[0] = if n == 2 { delta[0] } else { end_slope(delta[0], delta[1], h[0], h[1]) };
        ms[n - 1] = if n == 2 {
            delta[0]
        } else {
            end_slope(delta[n - 2], delta[n - 3], h[n - 2], h[n - 3])
        };
        Ok(MonotoneCubic { xs, ys, ms })
    }

    /// Evaluate the interpolant at `x` in `[0, 1]`.
    pub fn eval(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        let i = match self.xs.windows(2).position(|w| x <= w[1]) {
            Some(i) => i,
            None => self.xs.len() - 2,
        };
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[i] + h10 * h * self.ms[i] + h01 * self.ys[i + 1] + h11 * h * self.ms[i + 1]
    }

    /// Interpolation knots (abscissae, values).
    pub fn knots(&self) -> (&[f64], &[f64]) {
        (&self.xs, &self.ys)
    }
}

/// How an inner-copula parameter depends on the latent factor coordinate
/// `u0` in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub enum FactorMapping {
    /// Conditionally invariant parameter.
    Constant(f64),
    /// `beta(u0) = 1 - u0`.
    OneMinusU,
    /// `beta(u0) = 1 / (1 - u0)`.
    ParetoInverse,
    /// `beta(u0) = 2 u0 / (1 - u0)` (the Clayton parameter whose tau is `u0`).
    ClaytonTauInverse,
    /// `beta(u0) = -log(1 - u0) / rate` (the exponential quantile).
    ExpInverse {
        /// Rate of the exponential quantile.
        rate: f64,
    },
    /// `beta(u0) = exp(-b0 - b1 * x0)` where `x0` is the factor on its
    /// natural scale under the model's factor law.
    ExpDecay {
        /// Intercept of the log-scale decay.
        b0: f64,
        /// Slope of the log-scale decay.
        b1: f64,
    },
    /// Monotone cubic interpolation of user-supplied knots on `[0, 1]`.
    UserTable(MonotoneCubic),
}

impl FactorMapping {
    /// Evaluate the mapping at latent coordinate `u0`.
    pub fn eval(&self, u0: f64, law: &FactorLaw) -> f64 {
        let u0 = clamp_unit(u0);
        match self {
            FactorMapping::Constant(b) => *b,
            FactorMapping::OneMinusU => 1.0 - u0,
            FactorMapping::ParetoInverse => 1.0 / (1.0 - u0),
            FactorMapping::ClaytonTauInverse => 2.0 * u0 / (1.0 - u0),
            FactorMapping::ExpInverse { rate } => -(-u0).ln_1p() / rate,
            FactorMapping::ExpDecay { b0, b1 } => (-b0 - b1 * law.quantile(u0)).exp(),
            FactorMapping::UserTable(cubic) => cubic.eval(u0),
        }
    }

    /// Whether the mapping is constant in the factor.
    pub fn is_constant(&self) -> bool {
        matches!(self, FactorMapping::Constant(_))
    }

    /// Validate mapping parameters.
    pub fn validate(&self) -> Result<()> {
        match self {
            FactorMapping::Constant(b) if !b.is_finite() => {
                Err(FcError::Domain("constant mapping parameter must be finite".into()))
            }
            FactorMapping::ExpInverse { rate } if !(rate.is_finite() && *rate > 0.0) => {
                Err(FcError::Domain(format!("exp-inverse mapping needs a positive rate (got {rate})")))
            }
            FactorMapping::ExpDecay { b0, b1 } if !(b0.is_finite() && b1.is_finite()) => {
                Err(FcError::Domain("exp-decay mapping parameters must be finite".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Inner copula families.
#[derive(Debug, Clone, PartialEq)]
pub enum InnerFamily {
    /// Conditional independence (the classical one-factor model).
    Independence,
    /// Exchangeable Gaussian copula with a common correlation.
    GaussianExchangeable,
    /// Multivariate Clayton, parameter `beta >= 0`.
    Clayton,
    /// Multivariate Gumbel–Hougaard, parameter `beta >= 1`.
    GumbelHougaard,
    /// Multivariate Frank, parameter `beta >= 0` when `d > 2` (any sign for
    /// the bivariate case).
    Frank,
    /// Upper Fréchet bound (comonotone coordinates).
    FrechetUpper,
    /// One-level truncated C-vine rooted at the first coordinate; pair `i`
    /// links coordinates `1` and `i + 1`.
    CVine(Vec<BicopFamily>),
}

impl InnerFamily {
    /// Canonical name for the text formats.
    pub fn name(&self) -> &'static str {
        match self {
            InnerFamily::Independence => "indep",
            InnerFamily::GaussianExchangeable => "gaussian-ex",
            InnerFamily::Clayton => "clayton",
            InnerFamily::GumbelHougaard => "gumbel",
            InnerFamily::Frank => "frank",
            InnerFamily::FrechetUpper => "frechet-upper",
            InnerFamily::CVine(_) => "cvine",
        }
    }

    /// Number of parameters (hence mappings) the family takes in dimension `d`.
    pub fn n_params(&self, d: usize) -> usize {
        match self {
            InnerFamily::Independence | InnerFamily::FrechetUpper => 0,
            InnerFamily::CVine(_) => d - 1,
            _ => 1,
        }
    }
}

/// An inner copula: family, dimension, parameter mappings, and the factor law
/// used by natural-scale mappings.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerCopula {
    d: usize,
    family: InnerFamily,
    mappings: Vec<FactorMapping>,
    factor_law: FactorLaw,
}

impl InnerCopula {
    /// Build and validate an inner copula of dimension `d >= 2`.
    pub fn new(
        d: usize,
        family: InnerFamily,
        mappings: Vec<FactorMapping>,
        factor_law: FactorLaw,
    ) -> Result<Self> {
        if d < 2 {
            return Err(FcError::Domain("inner copula dimension must be at least 2".into()));
        }
        let need = family.n_params(d);
        if mappings.len() != need {
            return Err(FcError::Domain(format!(
                "inner family {} in dimension {d} takes {need} parameter mapping(s), got {}",
                family.name(),
                mappings.len()
            )));
        }
        for m in &mappings {
            m.validate()?;
        }
        factor_law.validate()?;
        if let InnerFamily::CVine(pairs) = &family {
            if pairs.len() != d - 1 {
                return Err(FcError::Domain(format!(
                    "C-vine inner copula in dimension {d} needs {} pair families, got {}",
                    d - 1,
                    pairs.len()
                )));
            }
            for f in pairs {
                if !f.is_absolutely_continuous() {
                    return Err(FcError::Domain(format!(
                        "C-vine pair family {} must be absolutely continuous",
                        f.name()
                    )));
                }
            }
        }
        Ok(InnerCopula { d, family, mappings, factor_law })
    }

    /// Conditional independence in dimension `d`.
    pub fn independence(d: usize) -> Result<Self> {
        InnerCopula::new(d, InnerFamily::Independence, vec![], FactorLaw::Uniform)
    }

    /// Dimension of the copula.
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Family of the copula.
    pub fn family(&self) -> &InnerFamily {
        &self.family
    }

    /// Parameter mappings.
    pub fn mappings(&self) -> &[FactorMapping] {
        &self.mappings
    }

    /// Mutable access to the parameter mappings (used by fit templates).
    pub fn mappings_mut(&mut self) -> &mut [FactorMapping] {
        &mut self.mappings
    }

    /// Factor law used by natural-scale mappings.
    pub fn factor_law(&self) -> &FactorLaw {
        &self.factor_law
    }

    /// Whether all parameter mappings are constant in the factor.
    pub fn is_invariant(&self) -> bool {
        self.mappings.iter().all(|m| m.is_constant())
    }

    /// Parameters at latent coordinate `u0`.
    pub fn params_at(&self, u0: f64) -> Vec<f64> {
        self.mappings.iter().map(|m| m.eval(u0, &self.factor_law)).collect()
    }

    /// Restrict the inner copula to the coordinates in `keep` (strictly
    /// increasing indices).  The exchangeable and Archimedean families
    /// marginalise to themselves; a C-vine requires its root (coordinate 0)
    /// to be kept.
    pub fn marginal(&self, keep: &[usize]) -> Result<Self> {
        if keep.len() < 2 || keep.windows(2).any(|w| w[1] <= w[0]) {
            return Err(FcError::Domain(
                "marginalisation needs at least two strictly increasing indices".into(),
            ));
        }
        if keep.iter().any(|&i| i >= self.d) {
            return Err(FcError::Domain("marginalisation index out of range".into()));
        }
        let family = match &self.family {
            InnerFamily::CVine(pairs) => {
                if keep[0] != 0 {
                    return Err(FcError::Unsupported(
                        "marginalising a C-vine inner copula away from its root is not closed-form"
                            .into(),
                    ));
                }
                InnerFamily::CVine(keep[1..].iter().map(|&i| pairs[i - 1]).collect())
            }
            other => other.clone(),
        };
        let mappings = match &self.family {
            InnerFamily::CVine(_) => {
                keep[1..].iter().map(|&i| self.mappings[i - 1].clone()).collect()
            }
            _ => self.mappings.clone(),
        };
        InnerCopula::new(keep.len(), family, mappings, self.factor_law)
    }

    fn check_args(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.d {
            return Err(FcError::Domain(format!(
                "inner copula expects {} coordinates, got {}",
                self.d,
                v.len()
            )));
        }
        Ok(())
    }

    /// Distribution function at `v`, with parameters evaluated at `u0`.
    ///
    /// Unsupported for the exchangeable Gaussian family above dimension two
    /// and for the C-vine (whose distribution function is evaluated by a
    /// one-dimensional quadrature over the root when needed).
    pub fn cdf(&self, v: &[f64], u0: f64) -> Result<f64> {
        self.check_args(v)?;
        if v.iter().any(|&x| x <= 0.0) {
            return Ok(0.0);
        }
        let v: Vec<f64> = v.iter().map(|&x| clamp_unit(x)).collect();
        let p = self.params_at(u0);
        match &self.family {
            InnerFamily::Independence => Ok(v.iter().product()),
            InnerFamily::FrechetUpper => Ok(v.iter().cloned().fold(1.0, f64::min)),
            InnerFamily::GaussianExchangeable => {
                let beta = self.check_gaussian_beta(p[0])?;
                if self.d == 2 {
                    Ok(bvn_cdf(norm_quantile(v[0]), norm_quantile(v[1]), beta))
                } else {
                    Err(FcError::Unsupported(
                        "exchangeable Gaussian cdf is implemented only for dimension 2".into(),
                    ))
                }
            }
            InnerFamily::Clayton => {
                let beta = self.check_clayton_beta(p[0])?;
                if beta == 0.0 {
                    return Ok(v.iter().product());
                }
                // log(sum v_i^{-beta} - d + 1), accumulated in log space.
                let la = log_sum_exp_minus(&v.iter().map(|x| -beta * x.ln()).collect::<Vec<_>>(),
                    self.d as f64 - 1.0);
                Ok((-la / beta).exp())
            }
            InnerFamily::GumbelHougaard => {
                let beta = self.check_gumbel_beta(p[0])?;
                if beta == 1.0 {
                    return Ok(v.iter().product());
                }
                let terms: Vec<f64> = v.iter().map(|x| beta * (-x.ln()).ln()).collect();
                let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let ls = m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln();
                Ok((-(ls / beta).exp()).exp())
            }
            InnerFamily::Frank => {
                let beta = self.check_frank_beta(p[0])?;
                if beta == 0.0 {
                    return Ok(v.iter().product());
                }
                if self.d == 2 {
                    return Ok(Bicop::new(BicopFamily::Frank, beta)?.cdf(v[0], v[1]));
                }
                // C = -(1/beta) ln(1 - prod(1 - e^{-beta v_i}) / (1 - e^{-beta})^{d-1}).
                let log_num: f64 = v.iter().map(|x| (-(-beta * x).exp_m1()).ln()).sum();
                let log_den = (self.d as f64 - 1.0) * (-(-beta).exp_m1()).ln();
                let y = (log_num - log_den).exp();
                Ok(-(-y).ln_1p() / beta)
            }
            InnerFamily::CVine(pairs) => {
                // C(v) = int_0^{v_1} prod_i h_i(v_{1+i} | s) ds on a fixed rule.
                let cops: Vec<Bicop> = pairs
                    .iter()
                    .zip(&p)
                    .map(|(f, th)| Bicop::new(*f, *th))
                    .collect::<Result<_>>()?;
                let (nodes, weights) = gauss_legendre_01(64);
                let mut acc = 0.0;
                for (t, w) in nodes.iter().zip(&weights) {
                    let s = t * v[0];
                    let mut prod = 1.0;
                    for (i, cop) in cops.iter().enumerate() {
                        prod *= cop.hfunc(v[1 + i], s);
                    }
                    acc += w * prod;
                }
                Ok(acc * v[0])
            }
        }
    }

    /// Density at `v`, with parameters evaluated at `u0`.
    pub fn pdf(&self, v: &[f64], u0: f64) -> Result<f64> {
        self.check_args(v)?;
        let v: Vec<f64> = v.iter().map(|&x| clamp_unit(x)).collect();
        let p = self.params_at(u0);
        match &self.family {
            InnerFamily::Independence => Ok(1.0),
            InnerFamily::FrechetUpper => Err(FcError::Unsupported(
                "the upper Fréchet bound has no density".into(),
            )),
            InnerFamily::GaussianExchangeable => {
                let beta = self.check_gaussian_beta(p[0])?;
                let z: Vec<f64> = v.iter().map(|&x| norm_quantile(x)).collect();
                let sum_sq: f64 = z.iter().map(|x| x * x).sum();
                let sum: f64 = z.iter().sum();
                let d = self.d as f64;
                let denom = 1.0 + (d - 1.0) * beta;
                let quad = (sum_sq - beta * sum * sum / denom) / (1.0 - beta);
                let log_det = (d - 1.0) * (1.0 - beta).ln() + denom.ln();
                Ok((-0.5 * (log_det + quad - sum_sq)).exp())
            }
            InnerFamily::Clayton => {
                let beta = self.check_clayton_beta(p[0])?;
                if beta == 0.0 {
                    return Ok(1.0);
                }
                let la = log_sum_exp_minus(
                    &v.iter().map(|x| -beta * x.ln()).collect::<Vec<_>>(),
                    self.d as f64 - 1.0,
                );
                let mut log_c = -(1.0 / beta + self.d as f64) * la;
                for k in 0..self.d {
                    log_c += (1.0 + k as f64 * beta).ln();
                }
                log_c -= (beta + 1.0) * v.iter().map(|x| x.ln()).sum::<f64>();
                // The leading product above includes k = 0 (a factor of 1);
                // the exponent bookkeeping uses lA = log(sum v^-beta - d + 1).
                Ok(log_c.exp())
            }
            InnerFamily::GumbelHougaard => {
                let beta = self.check_gumbel_beta(p[0])?;
                if beta == 1.0 {
                    return Ok(1.0);
                }
                Ok(gumbel_log_pdf(&v, beta)?.exp())
            }
            InnerFamily::Frank => {
                let beta = self.check_frank_beta(p[0])?;
                if beta == 0.0 {
                    return Ok(1.0);
                }
                if self.d == 2 {
                    return Bicop::new(BicopFamily::Frank, beta)?.pdf(v[0], v[1]);
                }
                Ok(frank_log_pdf(&v, beta).exp())
            }
            InnerFamily::CVine(pairs) => {
                let mut dens = 1.0;
                for (i, f) in pairs.iter().enumerate() {
                    dens *= Bicop::new(*f, p[i])?.pdf(v[0], v[1 + i])?;
                }
                Ok(dens)
            }
        }
    }

    /// Draw one exact sample, writing the coordinates into `out`.
    pub fn sample_into<R: Rng + ?Sized>(&self, u0: f64, rng: &mut R, out: &mut [f64]) -> Result<()> {
        if out.len() != self.d {
            return Err(FcError::Domain("sample output buffer has wrong length".into()));
        }
        let p = self.params_at(u0);
        match &self.family {
            InnerFamily::Independence => {
                for o in out.iter_mut() {
                    *o = rng.random::<f64>();
                }
            }
            InnerFamily::FrechetUpper => {
                let u = rng.random::<f64>();
                out.fill(u);
            }
            InnerFamily::GaussianExchangeable => {
                let beta = self.check_gaussian_beta(p[0])?;
                let d = self.d as f64;
                let a = (1.0 + (d - 1.0) * beta).sqrt();
                let b = (1.0 - beta).sqrt();
                let z: Vec<f64> = (0..self.d).map(|_| standard_normal(rng)).collect();
                let mean = z.iter().sum::<f64>() / d;
                for (o, zi) in out.iter_mut().zip(&z) {
                    *o = norm_cdf(b * zi + (a - b) * mean);
                }
            }
            InnerFamily::Clayton => {
                let beta = self.check_clayton_beta(p[0])?;
                if beta == 0.0 {
                    for o in out.iter_mut() {
                        *o = rng.random::<f64>();
                    }
                    return Ok(());
                }
                // Gamma(1/beta) frailty.
                let gamma = Gamma::new(1.0 / beta, 1.0)
                    .map_err(|e| FcError::Numeric(format!("gamma frailty: {e}")))?;
                let vfrail: f64 = gamma.sample(rng).max(f64::MIN_POSITIVE);
                for o in out.iter_mut() {
                    let e = exp1(rng);
                    *o = (-(e / vfrail).ln_1p() / beta).exp();
                }
            }
            InnerFamily::GumbelHougaard => {
                let beta = self.check_gumbel_beta(p[0])?;
                if beta == 1.0 {
                    for o in out.iter_mut() {
                        *o = rng.random::<f64>();
                    }
                    return Ok(());
                }
                // Positive-stable frailty with exponent 1/beta.
                let vfrail = sample_positive_stable(1.0 / beta, rng);
                for o in out.iter_mut() {
                    let e = exp1(rng);
                    *o = (-(e / vfrail).powf(1.0 / beta)).exp();
                }
            }
            InnerFamily::Frank => {
                let beta = self.check_frank_beta(p[0])?;
                if beta == 0.0 {
                    for o in out.iter_mut() {
                        *o = rng.random::<f64>();
                    }
                } else if self.d == 2 && beta < 0.0 {
                    // No frailty exists for negative dependence; conditional
                    // inversion is exact in the bivariate case.
                    let cop = Bicop::new(BicopFamily::Frank, beta)?;
                    out[0] = rng.random::<f64>();
                    out[1] = cop.hinv(rng.random::<f64>(), out[0])?;
                    // hinv conditions on its second argument.
                    out.swap(0, 1);
                } else {
                    // Logarithmic-series frailty.
                    let p_log = -(-beta).exp_m1();
                    let vfrail = sample_logarithmic(p_log, rng) as f64;
                    let one_a = -(-beta).exp_m1();
                    for o in out.iter_mut() {
                        let e = exp1(rng);
                        *o = -(-one_a * (-e / vfrail).exp()).ln_1p() / beta;
                    }
                }
            }
            InnerFamily::CVine(pairs) => {
                out[0] = rng.random::<f64>();
                for (i, f) in pairs.iter().enumerate() {
                    let cop = Bicop::new(*f, p[i])?;
                    out[1 + i] = cop.hinv(rng.random::<f64>(), out[0])?;
                }
            }
        }
        for o in out.iter_mut() {
            *o = o.clamp(CLAMP_EPS, 1.0 - CLAMP_EPS);
        }
        Ok(())
    }

    /// Draw `n` exact samples as rows.
    pub fn sample<R: Rng + ?Sized>(&self, u0: f64, n: usize, rng: &mut R) -> Result<Vec<Vec<f64>>> {
        let mut rows = vec![vec![0.0; self.d]; n];
        for row in rows.iter_mut() {
            self.sample_into(u0, rng, row)?;
        }
        Ok(rows)
    }

    fn check_gaussian_beta(&self, beta: f64) -> Result<f64> {
        let lo = -1.0 / (self.d as f64 - 1.0);
        if beta <= lo || beta >= 1.0 {
            return Err(FcError::Domain(format!(
                "exchangeable Gaussian correlation {beta} outside ({lo}, 1) in dimension {}",
                self.d
            )));
        }
        Ok(beta)
    }

    fn check_clayton_beta(&self, beta: f64) -> Result<f64> {
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(FcError::Domain(format!(
                "inner Clayton parameter must be >= 0 (got {beta})"
            )));
        }
        Ok(beta)
    }

    fn check_gumbel_beta(&self, beta: f64) -> Result<f64> {
        if !(beta.is_finite() && beta >= 1.0) {
            return Err(FcError::Domain(format!(
                "inner Gumbel parameter must be >= 1 (got {beta})"
            )));
        }
        Ok(beta)
    }

    fn check_frank_beta(&self, beta: f64) -> Result<f64> {
        if !beta.is_finite() {
            return Err(FcError::Domain("inner Frank parameter must be finite".into()));
        }
        if self.d > 2 && beta < 0.0 {
            return Err(FcError::Domain(format!(
                "inner Frank parameter must be >= 0 in dimension {} (got {beta})",
                self.d
            )));
        }
        Ok(beta)
    }
}

/// `log(sum_i e^{a_i} - sub)` computed stably (all `a_i >= 0`, `sub >= 0`).
fn log_sum_exp_minus(a: &[f64], sub: f64) -> f64 {
    let m = a.iter().cloned().fold(f64::NEG_INFINITY, f64::max).max(0.0);
    let s: f64 = a.iter().map(|x| (x - m).exp()).sum::<f64>() - sub * (-m).exp();
    m + s.max(f64::MIN_POSITIVE).ln()
}

/// Log-density of the `d`-variate Gumbel–Hougaard copula via the generator
/// derivative recurrence: `psi^{(k)}(t) = e^{-x} t^{-k} R_k(x)`, `x = t^{1/beta}`,
/// with `R_{k+1} = a x (R_k' - R_k) - k R_k`, `a = 1/beta`.  The polynomial
/// `(-1)^k R_k` has non-negative coefficients, so it is evaluated by
/// log-sum-exp without cancellation.
fn gumbel_log_pdf(v: &[f64], beta: f64) -> Result<f64> {
    let d = v.len();
    let alpha = 1.0 / beta;
    // Coefficients of R_k, starting from R_1(x) = -alpha x.
    let mut coef = vec![0.0f64, -alpha];
    for k in 1..d {
        let mut next = vec![0.0f64; coef.len() + 1];
        for (j, &c) in coef.iter().enumerate() {
            // a x R_k' contributes a*j*c to degree j; -a x R_k shifts degree up.
            next[j] += alpha * j as f64 * c - k as f64 * c;
            next[j + 1] -= alpha * c;
        }
        coef = next;
    }
    // t = sum (-ln v_i)^beta in log space; x = t^alpha.
    let terms: Vec<f64> = v.iter().map(|u| beta * (-u.ln()).ln()).collect();
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let log_t = m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln();
    let log_x = alpha * log_t;
    let x = log_x.exp();
    // log |R_d(x)| with the uniform-sign coefficients.
    let mut log_poly = f64::NEG_INFINITY;
    for (j, &c) in coef.iter().enumerate() {
        if c != 0.0 {
            let term = c.abs().ln() + j as f64 * log_x;
            log_poly = log_sum_exp2(log_poly, term);
        }
    }
    // log prod |(psi^{-1})'(v_i)| = sum [ln beta + (beta-1) ln(-ln v_i) - ln v_i].
    let log_inv_derivs: f64 = v
        .iter()
        .map(|u| beta.ln() + (beta - 1.0) * (-u.ln()).ln() - u.ln())
        .sum();
    Ok(-x - d as f64 * log_t + log_poly + log_inv_derivs)
}

/// Log-density of the `d`-variate Frank copula (`beta > 0`) via
/// `psi^{(k)}(t) = -(1/beta) P_k(s)`, `s = y/(1-y)`, `y = (1-e^{-beta}) e^{-t}`,
/// with `P_{k+1}(s) = -(s + s^2) P_k'(s)`.  The polynomial `(-1)^{k+1} P_k`
/// has non-negative coefficients, evaluated by log-sum-exp.
fn frank_log_pdf(v: &[f64], beta: f64) -> f64 {
    let d = v.len();
    // Coefficients of P_k, starting from P_1(s) = s.
    let mut coef = vec![0.0f64, 1.0];
    for _ in 1..d {
        let mut next = vec![0.0f64; coef.len() + 1];
        for (j, &c) in coef.iter().enumerate() {
            if j > 0 {
                next[j] -= j as f64 * c;
                next[j + 1] -= j as f64 * c;
            }
        }
        coef = next;
    }
    let log_one_a = (-(-beta).exp_m1()).ln();
    // log y = sum log(1 - e^{-beta v_i}) - (d-1) log(1 - e^{-beta}).
    let log_y: f64 = v.iter().map(|u| (-(-beta * u).exp_m1()).ln()).sum::<f64>()
        - (d as f64 - 1.0) * log_one_a;
    let one_minus_y = -log_y.exp_m1();
    let log_s = log_y - one_minus_y.max(f64::MIN_POSITIVE).ln();
    let mut log_poly = f64::NEG_INFINITY;
    for (j, &c) in coef.iter().enumerate() {
        if c != 0.0 {
            log_poly = log_sum_exp2(log_poly, c.abs().ln() + j as f64 * log_s);
        }
    }
    // log prod |(psi^{-1})'(v_i)| = sum [ln beta - beta v_i - ln(1 - e^{-beta v_i})].
    let log_inv_derivs: f64 = v
        .iter()
        .map(|u| beta.ln() - beta * u - (-(-beta * u).exp_m1()).ln())
        .sum();
    -beta.ln() + log_poly + log_inv_derivs
}

fn log_sum_exp2(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Standard normal draw by inversion (keeps the generator platform-stable).
fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    norm_quantile(clamp_unit(rng.random::<f64>()))
}

/// Unit-rate exponential draw.
fn exp1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    -(-rng.random::<f64>()).ln_1p()
}

/// One-sided positive stable draw with Laplace transform `exp(-t^alpha)`,
/// `0 < alpha < 1` (Kanter's representation).
fn sample_positive_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let theta = std::f64::consts::PI * clamp_unit(rng.random::<f64>());
    let w = exp1(rng).max(f64::MIN_POSITIVE);
    let a = (alpha * theta).sin() / theta.sin().powf(1.0 / alpha);
    let b = ((1.0 - alpha) * theta).sin() / w;
    a * b.powf((1.0 - alpha) / alpha)
}

/// Logarithmic-series draw with parameter `p` in `(0, 1)` (Kemp's method):
/// `P(V = k) = p^k / (-k ln(1-p))`.
fn sample_logarithmic<R: Rng + ?Sized>(p: f64, rng: &mut R) -> u64 {
    let h = (-p).ln_1p(); // ln(1 - p) < 0
    let u2 = clamp_unit(rng.random::<f64>());
    if u2 > p {
        return 1;
    }
    let u1 = clamp_unit(rng.random::<f64>());
    let q = -(u1 * h).exp_m1(); // 1 - (1-p)^{u1}
    if u2 < q * q {
        let k = (1.0 + u2.ln() / q.ln()).floor();
        if k >= 1.0 && k < 1e18 {
            return k as u64;
        }
        return 1;
    }
    if u2 > q {
        1
    } else {
        2
    }
}
