//! Bivariate copula families.
//!
//! Each family exposes the distribution function `cdf`, the density `pdf`,
//! the conditional distribution `hfunc(u, v) = d C(u, v) / d v` (conditioning
//! on the second argument, which plays the role of the latent factor), its
//! inverse `hinv` in the first argument, and the Kendall-tau parameter maps
//! `tau_of_theta` / `theta_of_tau`.
//!
//! The Fréchet bounds and the Mardia mixture carry singular components, so
//! their `pdf` (and, being step functions in `u`, their `hinv`) are
//! unavailable and reported as [`FcError::Unsupported`].  Evaluation inputs
//! are clamped to `[1e-12, 1 - 1e-12]` after exact boundary cases are
//! resolved.

use crate::error::{FcError, Result};
use crate::normal::{bvn_cdf, norm_cdf, norm_quantile};
use crate::quadrature::gauss_legendre_01;

/// Clamping margin applied to copula arguments before evaluation.
pub const CLAMP_EPS: f64 = 1e-12;

/// Clamp an argument into the open unit interval used for evaluation.
pub fn clamp_unit(x: f64) -> f64 {
    x.clamp(CLAMP_EPS, 1.0 - CLAMP_EPS)
}

/// Supported bivariate copula families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BicopFamily {
    /// Product copula `uv`.
    Independence,
    /// Upper Fréchet–Hoeffding bound `min(u, v)` (comonotonicity).
    FrechetUpper,
    /// Lower Fréchet–Hoeffding bound `max(u + v - 1, 0)` (countermonotonicity).
    FrechetLower,
    /// Clayton family, `theta >= 0`.
    Clayton,
    /// Frank family, any real `theta` (`theta = 0` is independence).
    Frank,
    /// Gumbel–Hougaard family, `theta >= 1`.
    GumbelHougaard,
    /// Gaussian family, `theta` is the correlation in `(-1, 1)`.
    Gaussian,
    /// Farlie–Gumbel–Morgenstern family, `theta` in `[-1, 1]`.
    Fgm,
    /// Ali–Mikhail–Haq family, `theta` in `[-1, 1)`.
    Amh,
    /// Mardia mixture of the Fréchet bounds and independence, `theta` in `[-1, 1]`.
    Mardia,
    /// Plackett family, `theta > 0` (`theta = 1` is independence).
    Plackett,
}

impl BicopFamily {
    /// Canonical lower-case name used by the text formats.
    pub fn name(self) -> &'static str {
        match self {
            BicopFamily::Independence => "indep",
            BicopFamily::FrechetUpper => "frechet-upper",
            BicopFamily::FrechetLower => "frechet-lower",
            BicopFamily::Clayton => "clayton",
            BicopFamily::Frank => "frank",
            BicopFamily::GumbelHougaard => "gumbel",
            BicopFamily::Gaussian => "gaussian",
            BicopFamily::Fgm => "fgm",
            BicopFamily::Amh => "amh",
            BicopFamily::Mardia => "mardia",
            BicopFamily::Plackett => "plackett",
        }
    }

    /// Parse a family name (case-insensitive, a few aliases accepted).
    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "indep" | "independence" | "pi" => Ok(BicopFamily::Independence),
            "frechet-upper" | "upper" | "m" | "comonotone" => Ok(BicopFamily::FrechetUpper),
            "frechet-lower" | "lower" | "w" | "countermonotone" => Ok(BicopFamily::FrechetLower),
            "clayton" => Ok(BicopFamily::Clayton),
            "frank" => Ok(BicopFamily::Frank),
            "gumbel" | "gumbel-hougaard" => Ok(BicopFamily::GumbelHougaard),
            "gaussian" | "normal" => Ok(BicopFamily::Gaussian),
            "fgm" | "farlie-gumbel-morgenstern" => Ok(BicopFamily::Fgm),
            "amh" | "ali-mikhail-haq" => Ok(BicopFamily::Amh),
            "mardia" => Ok(BicopFamily::Mardia),
            "plackett" => Ok(BicopFamily::Plackett),
            other => Err(FcError::Domain(format!("unknown bivariate family '{other}'"))),
        }
    }

    /// Whether the family carries a free parameter.
    pub fn has_parameter(self) -> bool {
        !matches!(
            self,
            BicopFamily::Independence | BicopFamily::FrechetUpper | BicopFamily::FrechetLower
        )
    }

    /// Whether the copula is absolutely continuous (admits a density).
    pub fn is_absolutely_continuous(self) -> bool {
        !matches!(
            self,
            BicopFamily::FrechetUpper | BicopFamily::FrechetLower | BicopFamily::Mardia
        )
    }

    /// Attainable Kendall-tau interval `[lo, hi]` for the family.
    ///
    /// For Frank and Plackett the interval is capped to the range where the
    /// numeric parameter maps stay well conditioned.
    pub fn tau_range(self) -> (f64, f64) {
        match self {
            BicopFamily::Independence => (0.0, 0.0),
            BicopFamily::FrechetUpper => (1.0, 1.0),
            BicopFamily::FrechetLower => (-1.0, -1.0),
            BicopFamily::Clayton => (0.0, 0.995),
            BicopFamily::Frank => (-0.985, 0.985),
            BicopFamily::GumbelHougaard => (0.0, 0.995),
            BicopFamily::Gaussian => (-0.9999, 0.9999),
            BicopFamily::Fgm => (-2.0 / 9.0, 2.0 / 9.0),
            BicopFamily::Amh => (AMH_TAU_MIN, AMH_TAU_MAX),
            BicopFamily::Mardia => (-1.0, 1.0),
            BicopFamily::Plackett => (-0.95, 0.95),
        }
    }

    fn validate_theta(self, theta: f64) -> Result<()> {
        if !theta.is_finite() {
            return Err(FcError::Domain(format!(
                "{} parameter must be finite (got {theta})",
                self.name()
            )));
        }
        let ok = match self {
            BicopFamily::Independence
            | BicopFamily::FrechetUpper
            | BicopFamily::FrechetLower => theta == 0.0,
            BicopFamily::Clayton => (0.0..=MAX_CLAYTON_THETA).contains(&theta),
            BicopFamily::Frank => theta.abs() <= MAX_FRANK_THETA,
            BicopFamily::GumbelHougaard => (1.0..=MAX_GUMBEL_THETA).contains(&theta),
            BicopFamily::Gaussian => theta.abs() < 1.0,
            BicopFamily::Fgm => theta.abs() <= 1.0,
            BicopFamily::Amh => (-1.0..1.0).contains(&theta),
            BicopFamily::Mardia => theta.abs() <= 1.0,
            BicopFamily::Plackett => theta > 0.0 && theta <= MAX_PLACKETT_THETA,
        };
        if ok {
            Ok(())
        } else {
            Err(FcError::Domain(format!(
                "parameter {theta} outside the domain of the {} family",
                self.name()
            )))
        }
    }
}

// Numeric caps keeping the closed forms far from overflow.
const MAX_FRANK_THETA: f64 = 350.0;
const MAX_CLAYTON_THETA: f64 = 500.0;
const MAX_GUMBEL_THETA: f64 = 200.0;
const MAX_PLACKETT_THETA: f64 = 1e6;

// Kendall tau of the Ali–Mikhail–Haq family at the ends of its domain:
// tau(-1) = (5 - 8 ln 2)/3 and tau(theta -> 1) = 1/3.
const AMH_TAU_MIN: f64 = -0.181_726_07;
const AMH_TAU_MAX: f64 = 0.333_333_32;

/// A bivariate copula: a family together with a validated parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bicop {
    family: BicopFamily,
    theta: f64,
}

impl Bicop {
    /// Build a copula, validating the parameter against the family domain.
    /// Families without a parameter require `theta = 0`.
    pub fn new(family: BicopFamily, theta: f64) -> Result<Self> {
        family.validate_theta(theta)?;
        Ok(Bicop { family, theta })
    }

    /// The product copula.
    pub fn independence() -> Self {
        Bicop { family: BicopFamily::Independence, theta: 0.0 }
    }

    /// Build a copula from a Kendall-tau value via `theta_of_tau`.
    pub fn from_tau(family: BicopFamily, tau: f64) -> Result<Self> {
        let theta = theta_of_tau(family, tau)?;
        Bicop::new(family, theta)
    }

    /// The family of this copula.
    pub fn family(&self) -> BicopFamily {
        self.family
    }

    /// The parameter of this copula.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Kendall's tau implied by the parameter.
    pub fn tau(&self) -> f64 {
        tau_of_theta(self.family, self.theta).expect("validated parameter")
    }

    /// Distribution function `C(u, v)`.
    pub fn cdf(&self, u: f64, v: f64) -> f64 {
        if u <= 0.0 || v <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 && v >= 1.0 {
            return 1.0;
        }
        if u >= 1.0 {
            return v;
        }
        if v >= 1.0 {
            return u;
        }
        let (u, v) = (clamp_unit(u), clamp_unit(v));
        let th = self.theta;
        match self.family {
            BicopFamily::Independence => u * v,
            BicopFamily::FrechetUpper => u.min(v),
            BicopFamily::FrechetLower => (u + v - 1.0).max(0.0),
            BicopFamily::Clayton => {
                if th == 0.0 {
                    u * v
                } else {
                    let la = clayton_log_a(u, v, th);
                    (-la / th).exp()
                }
            }
            BicopFamily::Frank => {
                if th == 0.0 {
                    u * v
                } else if th < 0.0 {
                    u - Bicop { family: BicopFamily::Frank, theta: -th }.cdf(u, 1.0 - v)
                } else {
                    // C = -(1/th) ln(D / (1-a)) with the cancellation-free
                    // D = x(1-y) + (y-a), x = e^{-th u}, y = e^{-th v}, a = e^{-th}.
                    let d = frank_d(u, v, th);
                    let one_a = -(-th).exp_m1();
                    -(d / one_a).ln() / th
                }
            }
            BicopFamily::GumbelHougaard => {
                if th == 1.0 {
                    u * v
                } else {
                    (-gumbel_s_pow(u, v, th)).exp()
                }
            }
            BicopFamily::Gaussian => bvn_cdf(norm_quantile(u), norm_quantile(v), th),
            BicopFamily::Fgm => u * v + th * u * v * (1.0 - u) * (1.0 - v),
            BicopFamily::Amh => u * v / (1.0 - th * (1.0 - u) * (1.0 - v)),
            BicopFamily::Mardia => {
                let (w1, w2, w3) = mardia_weights(th);
                w1 * u.min(v) + w2 * u * v + w3 * (u + v - 1.0).max(0.0)
            }
            BicopFamily::Plackett => {
                // Cancellation-free form 2 uv theta / (L + sqrt(L^2 - 4 theta (theta-1) uv)).
                let l = 1.0 + (th - 1.0) * (u + v);
                let disc = (l * l - 4.0 * th * (th - 1.0) * u * v).max(0.0);
                2.0 * u * v * th / (l + disc.sqrt())
            }
        }
    }

    /// Density `c(u, v)`.  Unsupported for families with singular parts.
    pub fn pdf(&self, u: f64, v: f64) -> Result<f64> {
        if !self.family.is_absolutely_continuous() {
            return Err(FcError::Unsupported(format!(
                "the {} copula has no density",
                self.family.name()
            )));
        }
        let (u, v) = (clamp_unit(u), clamp_unit(v));
        let th = self.theta;
        let val = match self.family {
            BicopFamily::Independence => 1.0,
            BicopFamily::Clayton => {
                if th == 0.0 {
                    1.0
                } else {
                    let la = clayton_log_a(u, v, th);
                    ((1.0 + th).ln() - (th + 1.0) * (u.ln() + v.ln()) - (1.0 / th + 2.0) * la)
                        .exp()
                }
            }
            BicopFamily::Frank => {
                if th == 0.0 {
                    1.0
                } else if th < 0.0 {
                    return Bicop { family: BicopFamily::Frank, theta: -th }.pdf(u, 1.0 - v);
                } else {
                    let x = (-th * u).exp();
                    let y = (-th * v).exp();
                    let one_a = -(-th).exp_m1(); // 1 - e^{-theta}
                    let d = frank_d(u, v, th);
                    th * one_a * x * y / (d * d)
                }
            }
            BicopFamily::GumbelHougaard => {
                if th == 1.0 {
                    1.0
                } else {
                    let lx = (-u.ln()).ln();
                    let ly = (-v.ln()).ln();
                    let (ls, s_pow) = gumbel_log_s(lx, ly, th);
                    let log_c = -s_pow + (th - 1.0) * (lx + ly) - u.ln() - v.ln()
                        + (2.0 / th - 2.0) * ls
                        + ((th - 1.0) * (-ls / th).exp()).ln_1p();
                    log_c.exp()
                }
            }
            BicopFamily::Gaussian => {
                let zu = norm_quantile(u);
                let zv = norm_quantile(v);
                let r2 = 1.0 - th * th;
                (-(th * th * (zu * zu + zv * zv) - 2.0 * th * zu * zv) / (2.0 * r2)).exp()
                    / r2.sqrt()
            }
            BicopFamily::Fgm => 1.0 + th * (1.0 - 2.0 * u) * (1.0 - 2.0 * v),
            BicopFamily::Amh => {
                let d = 1.0 - th * (1.0 - u) * (1.0 - v);
                let n_prime = 1.0 - th + 2.0 * th * u;
                let n = u * (1.0 - th + th * u);
                (n_prime * d - 2.0 * n * th * (1.0 - v)) / (d * d * d)
            }
            BicopFamily::Plackett => {
                let l = 1.0 + (th - 1.0) * (u + v);
                let disc = (l * l - 4.0 * th * (th - 1.0) * u * v).max(f64::MIN_POSITIVE);
                th * (1.0 + (th - 1.0) * (u + v - 2.0 * u * v)) / disc.powf(1.5)
            }
            _ => unreachable!("families without densities are rejected above"),
        };
        Ok(val.max(0.0))
    }

    /// Conditional distribution `h(u | v) = d C(u, v) / d v`, conditioning on
    /// the second argument.
    ///
    /// For the Fréchet bounds this is a step function in `u`:
    /// `1{v <= u}` for the upper bound and `1{u + v > 1}` for the lower one.
    pub fn hfunc(&self, u: f64, v: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return 1.0;
        }
        let (u, v) = (clamp_unit(u), clamp_unit(v));
        let th = self.theta;
        match self.family {
            BicopFamily::Independence => u,
            BicopFamily::FrechetUpper => {
                if v <= u {
                    1.0
                } else {
                    0.0
                }
            }
            BicopFamily::FrechetLower => {
                if u + v > 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            BicopFamily::Clayton => {
                if th == 0.0 {
                    u
                } else {
                    let la = clayton_log_a(u, v, th);
                    ((-th - 1.0) * v.ln() - (1.0 / th + 1.0) * la).exp()
                }
            }
            BicopFamily::Frank => {
                if th == 0.0 {
                    u
                } else if th < 0.0 {
                    Bicop { family: BicopFamily::Frank, theta: -th }.hfunc(u, 1.0 - v)
                } else {
                    let y = (-th * v).exp();
                    let one_minus_x = -(-th * u).exp_m1();
                    let d = frank_d(u, v, th);
                    (y * one_minus_x / d).clamp(0.0, 1.0)
                }
            }
            BicopFamily::GumbelHougaard => {
                if th == 1.0 {
                    u
                } else {
                    let lx = (-u.ln()).ln();
                    let ly = (-v.ln()).ln();
                    let (ls, s_pow) = gumbel_log_s(lx, ly, th);
                    (-s_pow + (1.0 / th - 1.0) * ls + (th - 1.0) * ly - v.ln()).exp().min(1.0)
                }
            }
            BicopFamily::Gaussian => {
                let zu = norm_quantile(u);
                let zv = norm_quantile(v);
                norm_cdf((zu - th * zv) / (1.0 - th * th).sqrt())
            }
            BicopFamily::Fgm => u + th * u * (1.0 - u) * (1.0 - 2.0 * v),
            BicopFamily::Amh => {
                let d = 1.0 - th * (1.0 - u) * (1.0 - v);
                u * (1.0 - th * (1.0 - u)) / (d * d)
            }
            BicopFamily::Mardia => {
                let (w1, w2, w3) = mardia_weights(th);
                let step_m = if v <= u { 1.0 } else { 0.0 };
                let step_w = if u + v > 1.0 { 1.0 } else { 0.0 };
                w1 * step_m + w2 * u + w3 * step_w
            }
            BicopFamily::Plackett => {
                let l = 1.0 + (th - 1.0) * (u + v);
                let disc = (l * l - 4.0 * th * (th - 1.0) * u * v).max(f64::MIN_POSITIVE);
                (0.5 * (1.0 - (l - 2.0 * th * u) / disc.sqrt())).clamp(0.0, 1.0)
            }
        }
    }

    /// Inverse of [`Bicop::hfunc`] in its first argument: the `u` with
    /// `h(u | v) = p`.
    ///
    /// Closed forms are used where available; otherwise a bracketed bisection
    /// (tolerance `1e-12` in `u`, at most 200 iterations) followed by a short
    /// Newton polish.  Unsupported for the Fréchet bounds and the Mardia
    /// mixture, whose h-functions are step functions in `u`.
    pub fn hinv(&self, p: f64, v: f64) -> Result<f64> {
        match self.family {
            BicopFamily::FrechetUpper | BicopFamily::FrechetLower | BicopFamily::Mardia => {
                return Err(FcError::Unsupported(format!(
                    "h-function of the {} copula is not invertible",
                    self.family.name()
                )));
            }
            _ => {}
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(FcError::Domain(format!("hinv probability {p} outside [0, 1]")));
        }
        let p = clamp_unit(p);
        let v = clamp_unit(v);
        let th = self.theta;
        let val = match self.family {
            BicopFamily::Independence => p,
            BicopFamily::Clayton => {
                if th == 0.0 {
                    p
                } else {
                    // u = (1 + v^{-theta} (p^{-theta/(1+theta)} - 1))^{-1/theta},
                    // evaluated in log space to dodge overflow.
                    let t = (-th / (1.0 + th)) * p.ln();
                    let log_term = t.exp_m1().ln();
                    let s = log_term - th * v.ln();
                    let log_a = if s > 35.0 { s } else { s.exp().ln_1p() };
                    (-log_a / th).exp()
                }
            }
            BicopFamily::Frank => {
                if th == 0.0 {
                    p
                } else if th < 0.0 {
                    return Bicop { family: BicopFamily::Frank, theta: -th }.hinv(p, 1.0 - v);
                } else {
                    // Solve p = y (1 - x) / ((1 - a) - (1 - x)(1 - y)) for
                    // x = e^{-theta u}.  Both x and 1 - x have cancellation-free
                    // expressions; pick the branch where the log is well
                    // conditioned.
                    let y = (-th * v).exp();
                    let a = (-th).exp();
                    let one_a = -(-th).exp_m1();
                    let denom = y + p * (1.0 - y);
                    let x = (y * (1.0 - p) + p * a) / denom;
                    if x < 0.5 {
                        (-x.ln() / th).min(1.0)
                    } else {
                        let one_minus_x = p * one_a / denom;
                        (-(-one_minus_x).ln_1p() / th).min(1.0)
                    }
                }
            }
            BicopFamily::GumbelHougaard => {
                if th == 1.0 {
                    p
                } else {
                    self.hinv_bisect(p, v)?
                }
            }
            BicopFamily::Gaussian => {
                let zv = norm_quantile(v);
                norm_cdf((1.0 - th * th).sqrt() * norm_quantile(p) + th * zv)
            }
            BicopFamily::Fgm => {
                let a = th * (1.0 - 2.0 * v);
                let disc = ((1.0 + a) * (1.0 + a) - 4.0 * a * p).max(0.0);
                2.0 * p / ((1.0 + a) + disc.sqrt())
            }
            BicopFamily::Amh => {
                // h(u|v) = p is quadratic in u; fall back to bisection if the
                // closed form degenerates.
                let b = 1.0 - th * (1.0 - v);
                let cc = th * (1.0 - v);
                let qa = p * cc * cc - th;
                let qb = 2.0 * p * b * cc - (1.0 - th);
                let qc = p * b * b;
                let mut root = None;
                if qa.abs() > 1e-14 {
                    let disc = qb * qb - 4.0 * qa * qc;
                    if disc >= 0.0 {
                        let sq = disc.sqrt();
                        for cand in [(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)] {
                            if (0.0..=1.0).contains(&cand)
                                && (self.hfunc(cand, v) - p).abs() < 1e-9
                            {
                                root = Some(cand);
                                break;
                            }
                        }
                    }
                } else if qb.abs() > 1e-14 {
                    let cand = -qc / qb;
                    if (0.0..=1.0).contains(&cand) && (self.hfunc(cand, v) - p).abs() < 1e-9 {
                        root = Some(cand);
                    }
                }
                match root {
                    Some(r) => r,
                    None => self.hinv_bisect(p, v)?,
                }
            }
            BicopFamily::Plackett => self.hinv_bisect(p, v)?,
            _ => unreachable!("non-invertible families are rejected above"),
        };
        Ok(val.clamp(CLAMP_EPS, 1.0 - CLAMP_EPS))
    }

    /// Bracketed bisection solve of `h(u | v) = p`, with a Newton polish when
    /// the density is available.
    fn hinv_bisect(&self, p: f64, v: f64) -> Result<f64> {
        let mut lo = CLAMP_EPS;
        let mut hi = 1.0 - CLAMP_EPS;
        let f_lo = self.hfunc(lo, v) - p;
        let f_hi = self.hfunc(hi, v) - p;
        if f_lo > 0.0 {
            return Ok(lo);
        }
        if f_hi < 0.0 {
            return Ok(hi);
        }
        let mut mid = 0.5;
        for _ in 0..200 {
            mid = 0.5 * (lo + hi);
            if hi - lo < 1e-12 {
                break;
            }
            if self.hfunc(mid, v) - p <= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if let Ok(mut dens) = self.pdf(mid, v) {
            // A couple of Newton steps sharpen the root well below the
            // bisection tolerance whenever the local slope is usable.
            for _ in 0..3 {
                if dens <= 1e-12 || !dens.is_finite() {
                    break;
                }
                let err = self.hfunc(mid, v) - p;
                let next = mid - err / dens;
                if !(lo..=hi).contains(&next) {
                    break;
                }
                mid = next;
                dens = self.pdf(mid, v)?;
            }
        }
        Ok(mid)
    }
}

/// The Frank denominator `(1-a) - (1-x)(1-y) = x(1-y) + (y-a)` for
/// `theta > 0`, written as a sum of non-negative terms so it never suffers
/// catastrophic cancellation (`x = e^{-theta u}`, `y = e^{-theta v}`,
/// `a = e^{-theta}`).
fn frank_d(u: f64, v: f64, theta: f64) -> f64 {
    let x = (-theta * u).exp();
    let y = (-theta * v).exp();
    let a = (-theta).exp();
    let one_minus_y = -(-theta * v).exp_m1();
    x * one_minus_y + (y - a)
}

/// `log(u^{-theta} + v^{-theta} - 1)` for Clayton, safe against overflow.
fn clayton_log_a(u: f64, v: f64, theta: f64) -> f64 {
    let a1 = -theta * u.ln();
    let a2 = -theta * v.ln();
    let m = a1.max(a2);
    m + ((a1 - m).exp() + (a2 - m).exp() - (-m).exp()).ln()
}

/// For Gumbel: returns `(log S, S^{1/theta})` where `S = x^theta + y^theta`,
/// given `lx = log x`, `ly = log y` with `x = -ln u`, `y = -ln v`.
fn gumbel_log_s(lx: f64, ly: f64, theta: f64) -> (f64, f64) {
    let (lmax, lmin) = if lx >= ly { (lx, ly) } else { (ly, lx) };
    let ls = theta * lmax + (theta * (lmin - lmax)).exp().ln_1p();
    (ls, (ls / theta).exp())
}

/// `S^{1/theta}` for the Gumbel cdf.
fn gumbel_s_pow(u: f64, v: f64, theta: f64) -> f64 {
    let lx = (-u.ln()).ln();
    let ly = (-v.ln()).ln();
    gumbel_log_s(lx, ly, theta).1
}

/// Mixture weights `(w_M, w_Pi, w_W)` of the Mardia family.
fn mardia_weights(theta: f64) -> (f64, f64, f64) {
    let t2 = theta * theta;
    (t2 * (1.0 + theta) / 2.0, 1.0 - t2, t2 * (1.0 - theta) / 2.0)
}

/// First Debye function `D_1(x) = (1/x) int_0^x t/(e^t - 1) dt`, valid for
/// any non-zero `x` via `D_1(-x) = D_1(x) + x/2`.
pub fn debye1(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    if x < 0.0 {
        return debye1(-x) - x / 2.0;
    }
    // The integrand decays like t e^{-t}; truncating at 40 is far below
    // double precision for the values used here.
    let upper = x.min(40.0);
    let (nodes, weights) = gauss_legendre_01(64);
    let mut integral = 0.0;
    for (t01, w) in nodes.iter().zip(&weights) {
        let t = t01 * upper;
        let f = if t < 1e-8 { 1.0 - t / 2.0 } else { t / t.exp_m1() };
        integral += w * f * upper;
    }
    if x > 40.0 {
        // First-order tail correction int_40^x t e^{-t} dt.
        integral += 41.0 * (-40.0f64).exp() - (x + 1.0) * (-x).exp();
    }
    integral / x
}

/// Kendall's tau as a function of the family parameter.
///
/// Closed forms exist for every family except Plackett, whose tau is obtained
/// by numeric double integration of the conditional distributions
/// (`tau = 1 - 4 int int dC/du * dC/dv du dv`).
pub fn tau_of_theta(family: BicopFamily, theta: f64) -> Result<f64> {
    family.validate_theta(theta)?;
    Ok(match family {
        BicopFamily::Independence => 0.0,
        BicopFamily::FrechetUpper => 1.0,
        BicopFamily::FrechetLower => -1.0,
        BicopFamily::Clayton => theta / (theta + 2.0),
        BicopFamily::Frank => {
            if theta == 0.0 {
                0.0
            } else {
                1.0 - 4.0 / theta * (1.0 - debye1(theta))
            }
        }
        BicopFamily::GumbelHougaard => (theta - 1.0) / theta,
        BicopFamily::Gaussian => 2.0 * theta.asin() / std::f64::consts::PI,
        BicopFamily::Fgm => 2.0 * theta / 9.0,
        BicopFamily::Amh => {
            if theta.abs() < 1e-6 {
                2.0 * theta / 9.0
            } else {
                let omt = 1.0 - theta;
                1.0 - 2.0 * (theta + omt * omt * omt.ln()) / (3.0 * theta * theta)
            }
        }
        BicopFamily::Mardia => theta.powi(3) * (theta * theta + 2.0) / 3.0,
        BicopFamily::Plackett => plackett_tau(theta),
    })
}

/// Numeric Kendall tau for the Plackett family.
fn plackett_tau(theta: f64) -> f64 {
    if (theta - 1.0).abs() < 1e-12 {
        return 0.0;
    }
    let cop = Bicop { family: BicopFamily::Plackett, theta };
    let (nodes, weights) = gauss_legendre_01(256);
    let mut acc = 0.0;
    for (u, wu) in nodes.iter().zip(&weights) {
        for (v, wv) in nodes.iter().zip(&weights) {
            // dC/du at (u, v) equals h(v | u) by exchangeability.
            acc += wu * wv * cop.hfunc(*v, *u) * cop.hfunc(*u, *v);
        }
    }
    1.0 - 4.0 * acc
}

/// Inverse of [`tau_of_theta`].
///
/// Closed forms where they exist; monotone bisection otherwise.  `tau` must
/// lie in the family's attainable range (see [`BicopFamily::tau_range`]).
pub fn theta_of_tau(family: BicopFamily, tau: f64) -> Result<f64> {
    if !tau.is_finite() {
        return Err(FcError::Domain("tau must be finite".into()));
    }
    let (lo, hi) = family.tau_range();
    if tau < lo - 1e-9 || tau > hi + 1e-9 {
        return Err(FcError::Domain(format!(
            "tau {tau} outside the attainable range [{lo}, {hi}] of the {} family",
            family.name()
        )));
    }
    let tau = tau.clamp(lo, hi);
    Ok(match family {
        BicopFamily::Independence | BicopFamily::FrechetUpper | BicopFamily::FrechetLower => {
            return Err(FcError::Unsupported(format!(
                "the {} family has no parameter",
                family.name()
            )));
        }
        BicopFamily::Clayton => 2.0 * tau / (1.0 - tau),
        BicopFamily::Frank => {
            if tau == 0.0 {
                0.0
            } else {
                let target = tau.abs();
                let theta = bisect_increasing(
                    |th| tau_of_theta(BicopFamily::Frank, th).expect("valid theta"),
                    target,
                    1e-10,
                    MAX_FRANK_THETA,
                )?;
                theta.copysign(tau)
            }
        }
        BicopFamily::GumbelHougaard => 1.0 / (1.0 - tau),
        BicopFamily::Gaussian => (std::f64::consts::PI * tau / 2.0).sin(),
        BicopFamily::Fgm => 4.5 * tau,
        BicopFamily::Amh => bisect_increasing(
            |th| tau_of_theta(BicopFamily::Amh, th).expect("valid theta"),
            tau,
            -1.0,
            1.0 - 1e-9,
        )?,
        BicopFamily::Mardia => bisect_increasing(
            |th| tau_of_theta(BicopFamily::Mardia, th).expect("valid theta"),
            tau,
            -1.0,
            1.0,
        )?,
        BicopFamily::Plackett => {
            // Bisection over log(theta), where tau is increasing.
            let lt = bisect_increasing(|lt| plackett_tau(lt.exp()), tau, -14.0, 14.0)?;
            lt.exp()
        }
    })
}

/// Bisection for an increasing scalar function; tolerance `1e-13` on the
/// argument (relative for large arguments), at most 200 iterations.
fn bisect_increasing<F: Fn(f64) -> f64>(f: F, target: f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    let f_lo = f(lo);
    let f_hi = f(hi);
    if target < f_lo - 1e-9 || target > f_hi + 1e-9 {
        return Err(FcError::Numeric(format!(
            "bisection target {target} outside bracket [{f_lo}, {f_hi}]"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= 1e-13 * (1.0 + mid.abs()) {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    /// Every parametric family with a representative parameter, plus the
    /// parameter-free ones.
    fn all_test_copulas() -> Vec<Bicop> {
        vec![
            Bicop::independence(),
            Bicop::new(BicopFamily::FrechetUpper, 0.0).unwrap(),
            Bicop::new(BicopFamily::FrechetLower, 0.0).unwrap(),
            Bicop::new(BicopFamily::Clayton, 2.0).unwrap(),
            Bicop::new(BicopFamily::Clayton, 0.4).unwrap(),
            Bicop::new(BicopFamily::Frank, 5.736).unwrap(),
            Bicop::new(BicopFamily::Frank, -3.2).unwrap(),
            Bicop::new(BicopFamily::GumbelHougaard, 2.0).unwrap(),
            Bicop::new(BicopFamily::GumbelHougaard, 1.3).unwrap(),
            Bicop::new(BicopFamily::Gaussian, 0.6).unwrap(),
            Bicop::new(BicopFamily::Gaussian, -0.8).unwrap(),
            Bicop::new(BicopFamily::Fgm, 1.0).unwrap(),
            Bicop::new(BicopFamily::Fgm, -0.7).unwrap(),
            Bicop::new(BicopFamily::Amh, 0.9).unwrap(),
            Bicop::new(BicopFamily::Amh, -0.9).unwrap(),
            Bicop::new(BicopFamily::Mardia, 0.6).unwrap(),
            Bicop::new(BicopFamily::Mardia, -0.5).unwrap(),
            Bicop::new(BicopFamily::Plackett, 12.0).unwrap(),
            Bicop::new(BicopFamily::Plackett, 0.2).unwrap(),
        ]
    }

    fn interior_grid(n: usize) -> Vec<f64> {
        (1..=n).map(|i| i as f64 / (n as f64 + 1.0)).collect()
    }

    #[test]
    fn parameter_domains_are_enforced() {
        assert!(Bicop::new(BicopFamily::Clayton, -0.5).is_err());
        assert!(Bicop::new(BicopFamily::GumbelHougaard, 0.8).is_err());
        assert!(Bicop::new(BicopFamily::Gaussian, 1.0).is_err());
        assert!(Bicop::new(BicopFamily::Fgm, 1.2).is_err());
        assert!(Bicop::new(BicopFamily::Amh, 1.0).is_err());
        assert!(Bicop::new(BicopFamily::Mardia, -1.4).is_err());
        assert!(Bicop::new(BicopFamily::Plackett, 0.0).is_err());
        assert!(Bicop::new(BicopFamily::Frank, f64::NAN).is_err());
        assert!(Bicop::new(BicopFamily::Independence, 0.3).is_err());
    }

    #[test]
    fn cdf_boundary_conditions_and_frechet_sandwich() {
        let grid = interior_grid(13);
        for cop in all_test_copulas() {
            for &u in &grid {
                assert_abs_diff_eq!(cop.cdf(u, 1.0), u, epsilon = 1e-9);
                assert_abs_diff_eq!(cop.cdf(1.0, u), u, epsilon = 1e-9);
                assert_eq!(cop.cdf(u, 0.0), 0.0);
                assert_eq!(cop.cdf(0.0, u), 0.0);
                for &v in &grid {
                    let c = cop.cdf(u, v);
                    assert!(c >= (u + v - 1.0).max(0.0) - 1e-12, "{:?} below W", cop);
                    assert!(c <= u.min(v) + 1e-12, "{:?} above M", cop);
                }
            }
        }
    }

    #[test]
    fn cdf_is_two_increasing() {
        let grid = interior_grid(9);
        for cop in all_test_copulas() {
            for i in 0..grid.len() - 1 {
                for j in 0..grid.len() - 1 {
                    let (u1, u2) = (grid[i], grid[i + 1]);
                    let (v1, v2) = (grid[j], grid[j + 1]);
                    let vol = cop.cdf(u2, v2) - cop.cdf(u1, v2) - cop.cdf(u2, v1)
                        + cop.cdf(u1, v1);
                    assert!(vol >= -1e-12, "{:?} rectangle volume {vol}", cop);
                }
            }
        }
    }

    #[test]
    fn hfunc_matches_cdf_finite_differences() {
        // Only smooth families: the Fréchet bounds and Mardia mixture have
        // step-type conditionals checked separately.
        let grid = interior_grid(7);
        let delta = 1e-6;
        for cop in all_test_copulas() {
            if !cop.family().is_absolutely_continuous() {
                continue;
            }
            for &u in &grid {
                for &v in &grid {
                    let fd = (cop.cdf(u, v + delta) - cop.cdf(u, v - delta)) / (2.0 * delta);
                    let h = cop.hfunc(u, v);
                    assert!(
                        (h - fd).abs() <= 2e-5 * (1.0 + fd.abs()),
                        "{:?} at ({u},{v}): h={h} fd={fd}",
                        cop
                    );
                }
            }
        }
    }

    #[test]
    fn pdf_matches_hfunc_finite_differences() {
        let grid = interior_grid(7);
        let delta = 1e-6;
        for cop in all_test_copulas() {
            if !cop.family().is_absolutely_continuous() {
                continue;
            }
            for &u in &grid {
                for &v in &grid {
                    let fd = (cop.hfunc(u + delta, v) - cop.hfunc(u - delta, v)) / (2.0 * delta);
                    let c = cop.pdf(u, v).unwrap();
                    assert!(
                        (c - fd).abs() <= 1e-4 * (1.0 + fd.abs()),
                        "{:?} at ({u},{v}): pdf={c} fd={fd}",
                        cop
                    );
                }
            }
        }
    }

    #[test]
    fn pdf_integrates_to_one() {
        // Tensor Gauss–Legendre over the unit square.
        let (nodes, weights) = gauss_legendre_01(96);
        for cop in all_test_copulas() {
            if !cop.family().is_absolutely_continuous() {
                continue;
            }
            let mut total = 0.0;
            for (u, wu) in nodes.iter().zip(&weights) {
                for (v, wv) in nodes.iter().zip(&weights) {
                    total += wu * wv * cop.pdf(*u, *v).unwrap();
                }
            }
            assert!((total - 1.0).abs() < 2e-4, "{:?} mass {total}", cop);
        }
    }

    #[test]
    fn hfunc_step_conventions_for_bounds() {
        let m = Bicop::new(BicopFamily::FrechetUpper, 0.0).unwrap();
        assert_eq!(m.hfunc(0.4, 0.2), 1.0);
        assert_eq!(m.hfunc(0.4, 0.6), 0.0);
        let w = Bicop::new(BicopFamily::FrechetLower, 0.0).unwrap();
        assert_eq!(w.hfunc(0.7, 0.5), 1.0);
        assert_eq!(w.hfunc(0.3, 0.5), 0.0);
    }

    #[test]
    fn hinv_roundtrip_within_1e9() {
        let mut rng = ChaCha12Rng::seed_from_u64(2024);
        for cop in all_test_copulas() {
            match cop.family() {
                BicopFamily::FrechetUpper | BicopFamily::FrechetLower | BicopFamily::Mardia => {
                    assert!(cop.hinv(0.5, 0.5).is_err());
                    continue;
                }
                _ => {}
            }
            for _ in 0..1000 {
                let p: f64 = rng.random::<f64>().clamp(1e-6, 1.0 - 1e-6);
                let v: f64 = rng.random::<f64>().clamp(1e-6, 1.0 - 1e-6);
                let u = cop.hinv(p, v).unwrap();
                let back = cop.hfunc(u, v);
                assert!(
                    (back - p).abs() <= 1e-9,
                    "{:?} roundtrip p={p} v={v} -> u={u} -> {back}",
                    cop
                );
            }
        }
    }

    #[test]
    fn tau_closed_forms_match_reference_values() {
        // Clayton theta = 2 has tau = 1/2; beta/(beta+2) in general.
        assert_abs_diff_eq!(tau_of_theta(BicopFamily::Clayton, 2.0).unwrap(), 0.5, epsilon = 1e-12);
        // Gumbel theta = 2 has tau = 1/2.
        assert_abs_diff_eq!(
            tau_of_theta(BicopFamily::GumbelHougaard, 2.0).unwrap(),
            0.5,
            epsilon = 1e-12
        );
        // Gaussian rho = 1/2 has tau = 1/3.
        assert_abs_diff_eq!(
            tau_of_theta(BicopFamily::Gaussian, 0.5).unwrap(),
            1.0 / 3.0,
            epsilon = 1e-12
        );
        // FGM tau = 2 theta / 9.
        assert_abs_diff_eq!(
            tau_of_theta(BicopFamily::Fgm, 1.0).unwrap(),
            2.0 / 9.0,
            epsilon = 1e-12
        );
        // Frank anchors used throughout the worked examples.
        for &(theta, tau, tol) in &[
            (5.74, 0.50, 2e-3),
            (6.73, 0.55, 2e-3),
            (14.14, 0.75, 2e-3),
            (38.28, 0.90, 1e-3),
            (1.38, 0.15, 3e-3),
        ] {
            assert!(
                (tau_of_theta(BicopFamily::Frank, theta).unwrap() - tau).abs() <= tol,
                "frank tau({theta})"
            );
        }
        // Frank is odd in theta.
        assert_abs_diff_eq!(
            tau_of_theta(BicopFamily::Frank, -5.74).unwrap(),
            -tau_of_theta(BicopFamily::Frank, 5.74).unwrap(),
            epsilon = 1e-12
        );
        // Mardia endpoints are the Fréchet bounds.
        assert_abs_diff_eq!(tau_of_theta(BicopFamily::Mardia, 1.0).unwrap(), 1.0, epsilon = 0.0);
        assert_abs_diff_eq!(tau_of_theta(BicopFamily::Mardia, -1.0).unwrap(), -1.0, epsilon = 0.0);
    }

    /// Numeric tau through the conditional-distribution double integral;
    /// valid for every copula, including singular parts.
    fn tau_numeric(cop: &Bicop, n: usize) -> f64 {
        let (nodes, weights) = gauss_legendre_01(n);
        let mut acc = 0.0;
        for (u, wu) in nodes.iter().zip(&weights) {
            for (v, wv) in nodes.iter().zip(&weights) {
                acc += wu * wv * cop.hfunc(*v, *u) * cop.hfunc(*u, *v);
            }
        }
        1.0 - 4.0 * acc
    }

    #[test]
    fn tau_closed_forms_match_numeric_double_integral() {
        for (cop, tol) in [
            (Bicop::new(BicopFamily::Clayton, 2.0).unwrap(), 1e-5),
            (Bicop::new(BicopFamily::Frank, 5.736).unwrap(), 1e-7),
            (Bicop::new(BicopFamily::Frank, -2.0).unwrap(), 1e-7),
            (Bicop::new(BicopFamily::GumbelHougaard, 2.5).unwrap(), 1e-4),
            (Bicop::new(BicopFamily::Gaussian, 0.6).unwrap(), 1e-5),
            (Bicop::new(BicopFamily::Fgm, 0.8).unwrap(), 1e-9),
            (Bicop::new(BicopFamily::Amh, -1.0 + 1e-12).unwrap(), 1e-7),
            (Bicop::new(BicopFamily::Amh, 0.5).unwrap(), 1e-8),
            // Step-type conditionals limit the quadrature accuracy here.
            (Bicop::new(BicopFamily::Mardia, 0.6).unwrap(), 5e-3),
        ] {
            let numeric = tau_numeric(&cop, 256);
            assert!(
                (cop.tau() - numeric).abs() <= tol,
                "{:?}: closed {} vs numeric {}",
                cop,
                cop.tau(),
                numeric
            );
        }
    }

    #[test]
    fn amh_lower_endpoint_tau_matches_closed_form() {
        // tau(-1) = (5 - 8 ln 2) / 3.
        let expected = (5.0 - 8.0 * 2.0f64.ln()) / 3.0;
        assert_abs_diff_eq!(
            tau_of_theta(BicopFamily::Amh, -1.0 + 1e-12).unwrap(),
            expected,
            epsilon = 1e-7
        );
    }

    #[test]
    fn plackett_tau_behaves_like_a_reflection_family() {
        // tau(1/theta) = -tau(theta) because 1/theta corresponds to (U, 1-V).
        for &theta in &[3.0, 12.0, 64.0] {
            let plus = tau_of_theta(BicopFamily::Plackett, theta).unwrap();
            let minus = tau_of_theta(BicopFamily::Plackett, 1.0 / theta).unwrap();
            assert_abs_diff_eq!(plus, -minus, epsilon = 1e-9);
            assert!(plus > 0.0);
        }
        assert_abs_diff_eq!(tau_of_theta(BicopFamily::Plackett, 1.0).unwrap(), 0.0, epsilon = 0.0);
    }

    #[test]
    fn theta_of_tau_roundtrips_within_1e8() {
        let cases: Vec<(BicopFamily, Vec<f64>)> = vec![
            (BicopFamily::Clayton, vec![0.05, 0.3, 0.5, 0.75, 0.9]),
            (BicopFamily::Frank, vec![-0.9, -0.5, -0.15, 0.15, 0.5, 0.75, 0.9]),
            (BicopFamily::GumbelHougaard, vec![0.05, 0.3, 0.5, 0.75, 0.9]),
            (BicopFamily::Gaussian, vec![-0.9, -0.4, 0.0, 0.4, 0.9]),
            (BicopFamily::Fgm, vec![-0.2, -0.1, 0.0, 0.1, 0.2]),
            (BicopFamily::Amh, vec![-0.15, -0.05, 0.0, 0.1, 0.25, 0.32]),
            (BicopFamily::Mardia, vec![-0.9, -0.3, 0.0, 0.3, 0.9]),
            (BicopFamily::Plackett, vec![-0.9, -0.5, -0.2, 0.2, 0.5, 0.9]),
        ];
        for (family, taus) in cases {
            for tau in taus {
                let theta = theta_of_tau(family, tau).unwrap();
                let back = tau_of_theta(family, theta).unwrap();
                assert!(
                    (back - tau).abs() <= 1e-8,
                    "{family:?} tau={tau} -> theta={theta} -> {back}"
                );
            }
        }
    }

    #[test]
    fn theta_of_tau_rejects_unattainable_values() {
        assert!(theta_of_tau(BicopFamily::Fgm, 0.4).is_err());
        assert!(theta_of_tau(BicopFamily::Clayton, -0.2).is_err());
        assert!(theta_of_tau(BicopFamily::Amh, 0.5).is_err());
        assert!(theta_of_tau(BicopFamily::Independence, 0.2).is_err());
    }

    #[test]
    fn frank_zero_and_plackett_one_are_independence() {
        let frank0 = Bicop::new(BicopFamily::Frank, 0.0).unwrap();
        let plackett1 = Bicop::new(BicopFamily::Plackett, 1.0).unwrap();
        let grid = interior_grid(11);
        for &u in &grid {
            for &v in &grid {
                assert_abs_diff_eq!(frank0.cdf(u, v), u * v, epsilon = 1e-14);
                assert_abs_diff_eq!(plackett1.cdf(u, v), u * v, epsilon = 1e-12);
                assert_abs_diff_eq!(frank0.hfunc(u, v), u, epsilon = 1e-14);
                assert_abs_diff_eq!(plackett1.pdf(u, v).unwrap(), 1.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn frank_handles_strong_dependence_without_overflow() {
        let cop = Bicop::new(BicopFamily::Frank, 300.0).unwrap();
        let neg = Bicop::new(BicopFamily::Frank, -300.0).unwrap();
        for &(u, v) in &[(0.01, 0.99), (0.99, 0.99), (0.5, 0.5), (1e-9, 1.0 - 1e-9)] {
            for c in [&cop, &neg] {
                assert!(c.cdf(u, v).is_finite());
                assert!(c.pdf(u, v).unwrap().is_finite());
                assert!(c.hfunc(u, v).is_finite());
            }
        }
        // Near the upper Fréchet bound the cdf approaches min(u, v).
        assert_abs_diff_eq!(cop.cdf(0.3, 0.7), 0.3, epsilon = 1e-3);
        // Near the lower bound it approaches max(u + v - 1, 0); exactly on
        // the kink u + v = 1 the gap decays slowest, like ln(2)/|theta|.
        assert_abs_diff_eq!(neg.cdf(0.3, 0.7), 2.0f64.ln() / 300.0, epsilon = 1e-4);
        assert_abs_diff_eq!(neg.cdf(0.3, 0.6), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn clayton_and_gumbel_log_forms_survive_extreme_corners() {
        let clayton = Bicop::new(BicopFamily::Clayton, 38.0).unwrap();
        let gumbel = Bicop::new(BicopFamily::GumbelHougaard, 50.0).unwrap();
        for &(u, v) in &[(1e-12, 1e-12), (1e-12, 0.999), (0.999, 1e-12), (0.5, 0.5)] {
            for c in [&clayton, &gumbel] {
                assert!(c.cdf(u, v).is_finite(), "{:?} cdf at ({u},{v})", c);
                assert!(c.hfunc(u, v).is_finite());
                assert!(c.pdf(u, v).unwrap().is_finite());
            }
        }
    }

    #[test]
    fn amh_negative_theta_cdf_is_concave_in_v() {
        // For theta < 0 the second derivative of C in the conditioning
        // argument is non-negative (stochastically decreasing conditionals).
        let cop = Bicop::new(BicopFamily::Amh, -0.8).unwrap();
        let delta = 1e-4;
        for &u in &interior_grid(9) {
            for &v in &interior_grid(9) {
                let second = (cop.cdf(u, v + delta) - 2.0 * cop.cdf(u, v)
                    + cop.cdf(u, v - delta))
                    / (delta * delta);
                assert!(second >= -1e-6, "second derivative {second} at ({u},{v})");
            }
        }
    }

    #[test]
    fn fgm_closed_form_value() {
        let cop = Bicop::new(BicopFamily::Fgm, 1.0).unwrap();
        assert_abs_diff_eq!(cop.cdf(0.5, 0.5), 0.3125, epsilon = 1e-15);
    }

    #[test]
    fn family_names_roundtrip() {
        for cop in all_test_copulas() {
            let name = cop.family().name();
            assert_eq!(BicopFamily::parse(name).unwrap(), cop.family());
        }
        assert!(BicopFamily::parse("no-such-family").is_err());
    }
}
