//! Factor copula models: construction, conditional transforms, density,
//! distribution function, and marginalisation.
//!
//! A model has `d >= 2` observed variables and `w >= 1` latent layers.  Each
//! variable `i` is tied to layer `j` through a bivariate linking copula
//! `C_ij`; conditioning on the layer variables composes the h-functions into
//! the transform `G_i`.  The inner copula captures whatever dependence
//! remains after conditioning on the last layer.  With one layer and an
//! independence inner copula the model is the classical one-factor copula;
//! a non-trivial inner copula extends it, and `w >= 2` nests the extensions.
//!
//! The module also houses the flat parameter registry ([`ParamLoc`]) and the
//! fit template ([`FitTemplate`]) through which the optimizer and the Fisher
//! code address free parameters uniformly.

use crate::bicop::{clamp_unit, tau_of_theta, theta_of_tau, Bicop, BicopFamily};
use crate::error::{FcError, Result};
use crate::innercop::{FactorLaw, FactorMapping, InnerCopula, InnerFamily};
use crate::quadrature::{integrate_adaptive, integrate_unit_cube, IntegralEstimate, IntegratorConfig};

/// A factor copula model (one-factor, extended, or nested-extended).
#[derive(Debug, Clone, PartialEq)]
pub struct FactorModel {
    d: usize,
    w: usize,
    /// `linking[i][j]` ties variable `i` to layer `j`.
    linking: Vec<Vec<Bicop>>,
    inner: InnerCopula,
}

impl FactorModel {
    /// Build a model from the variable-major linking grid `linking[i][j]`
    /// and an inner copula of matching dimension.
    pub fn new(linking: Vec<Vec<Bicop>>, inner: InnerCopula) -> Result<Self> {
        let d = linking.len();
        if d < 2 {
            return Err(FcError::Domain("a factor model needs at least two variables".into()));
        }
        let w = linking[0].len();
        if w < 1 {
            return Err(FcError::Domain("a factor model needs at least one layer".into()));
        }
        if linking.iter().any(|row| row.len() != w) {
            return Err(FcError::Domain("all linking rows must cover the same layers".into()));
        }
        if inner.dim() != d {
            return Err(FcError::Domain(format!(
                "inner copula dimension {} does not match the {} linking rows",
                inner.dim(),
                d
            )));
        }
        Ok(FactorModel { d, w, linking, inner })
    }

    /// Build a model from layer-major lists (`layers[j]` holds the `d`
    /// copulas of layer `j + 1`), the format of the model-spec files.
    pub fn from_layers(layers: Vec<Vec<Bicop>>, inner: InnerCopula) -> Result<Self> {
        let w = layers.len();
        if w < 1 {
            return Err(FcError::Domain("a factor model needs at least one layer".into()));
        }
        let d = layers[0].len();
        if layers.iter().any(|l| l.len() != d) {
            return Err(FcError::Domain("all layers must list the same number of variables".into()));
        }
        let linking = (0..d)
            .map(|i| (0..w).map(|j| layers[j][i]).collect())
            .collect();
        FactorModel::new(linking, inner)
    }

    /// Classical one-factor copula: one layer, independence inner.
    pub fn one_factor(links: Vec<Bicop>) -> Result<Self> {
        let d = links.len();
        let inner = InnerCopula::independence(d)?;
        FactorModel::new(links.into_iter().map(|c| vec![c]).collect(), inner)
    }

    /// Number of observed variables.
    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of latent layers.
    pub fn w(&self) -> usize {
        self.w
    }

    /// The linking grid, variable-major (`linking()[i][j]`).
    pub fn linking(&self) -> &[Vec<Bicop>] {
        &self.linking
    }

    /// Linking copula of variable `var` and layer `layer` (zero-based).
    pub fn linking_copula(&self, var: usize, layer: usize) -> &Bicop {
        &self.linking[var][layer]
    }

    /// The inner copula.
    pub fn inner(&self) -> &InnerCopula {
        &self.inner
    }

    /// The conditional transform `G_i(u_i; t) = H_iw ∘ … ∘ H_i1(u_i)`,
    /// composing the h-functions of variable `i` along the layers.
    pub fn g_transform(&self, i: usize, u_i: f64, t: &[f64]) -> Result<f64> {
        self.check_var_and_t(i, t)?;
        let mut x = clamp_unit(u_i);
        for (j, tj) in t.iter().enumerate() {
            x = self.linking[i][j].hfunc(x, clamp_unit(*tj));
        }
        Ok(x)
    }

    /// `∂G_i/∂u_i`: the product of the `w` pair densities along the chain.
    pub fn g_derivative(&self, i: usize, u_i: f64, t: &[f64]) -> Result<f64> {
        self.check_var_and_t(i, t)?;
        let mut x = clamp_unit(u_i);
        let mut deriv = 1.0;
        for (j, tj) in t.iter().enumerate() {
            let tj = clamp_unit(*tj);
            deriv *= self.linking[i][j].pdf(x, tj)?;
            x = self.linking[i][j].hfunc(x, tj);
        }
        Ok(deriv)
    }

    fn check_var_and_t(&self, i: usize, t: &[f64]) -> Result<()> {
        if i >= self.d {
            return Err(FcError::Domain(format!("variable index {i} out of range (d = {})", self.d)));
        }
        if t.len() != self.w {
            return Err(FcError::Domain(format!(
                "expected {} layer coordinates, got {}",
                self.w,
                t.len()
            )));
        }
        Ok(())
    }

    fn check_u(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.d {
            return Err(FcError::Domain(format!(
                "expected {} coordinates, got {}",
                self.d,
                u.len()
            )));
        }
        Ok(())
    }

    /// Density integrand at latent coordinates `t`: the inner density at the
    /// transformed point times the Jacobian product of the chains.
    fn density_integrand(&self, u: &[f64], t: &[f64]) -> Result<f64> {
        let mut g = vec![0.0; self.d];
        let mut jac = 1.0;
        for i in 0..self.d {
            let mut x = u[i];
            for (j, tj) in t.iter().enumerate() {
                jac *= self.linking[i][j].pdf(x, *tj)?;
                x = self.linking[i][j].hfunc(x, *tj);
            }
            g[i] = x;
        }
        Ok(self.inner.pdf(&g, t[self.w - 1])? * jac)
    }

    /// Copula density at `u`, integrating the conditional density over the
    /// `w`-dimensional latent cube with the given integrator.
    pub fn density(&self, u: &[f64], cfg: &IntegratorConfig) -> Result<IntegralEstimate> {
        self.check_u(u)?;
        let u: Vec<f64> = u.iter().map(|&x| clamp_unit(x)).collect();
        let f = |t: &[f64]| self.density_integrand(&u, t);
        integrate_unit_cube(&f, self.w, cfg)
    }

    /// Distribution function at `u`, integrating the inner cdf of the
    /// transformed point over the latent cube.
    ///
    /// Fréchet-bound linking rows (M or W) are handled exactly for
    /// single-layer models by truncating the integration domain — their
    /// h-functions are step functions in the factor, so the row contributes
    /// an integration limit instead of an integrand factor.  Multi-layer
    /// models with Fréchet-bound links are not supported.
    pub fn outer_cdf(&self, u: &[f64], cfg: &IntegratorConfig) -> Result<IntegralEstimate> {
        self.check_u(u)?;
        if u.iter().any(|&x| x <= 0.0) {
            return Ok(IntegralEstimate { value: 0.0, error: 0.0 });
        }
        let u: Vec<f64> = u.iter().map(|&x| clamp_unit(x)).collect();
        let is_bound = |f: BicopFamily| {
            matches!(f, BicopFamily::FrechetUpper | BicopFamily::FrechetLower)
        };
        let has_bound_links = self
            .linking
            .iter()
            .any(|row| row.iter().any(|c| is_bound(c.family())));
        if !has_bound_links {
            let f = |t: &[f64]| {
                let mut g = vec![0.0; self.d];
                for i in 0..self.d {
                    let mut x = u[i];
                    for (j, tj) in t.iter().enumerate() {
                        x = self.linking[i][j].hfunc(x, *tj);
                    }
                    g[i] = x;
                }
                self.inner.cdf(&g, t[self.w - 1])
            };
            return integrate_unit_cube(&f, self.w, cfg);
        }
        if self.w > 1 {
            return Err(FcError::Unsupported(
                "Fréchet-bound linking copulas are supported only in single-layer models".into(),
            ));
        }
        // Single layer with M/W rows: H(u|t) is 1{t <= u} (M) or 1{t > 1-u}
        // (W), so each such row truncates the domain and its inner argument
        // becomes 1 inside it.
        let mut lo = 0.0f64;
        let mut hi = 1.0f64;
        for (i, row) in self.linking.iter().enumerate() {
            match row[0].family() {
                BicopFamily::FrechetUpper => hi = hi.min(u[i]),
                BicopFamily::FrechetLower => lo = lo.max(1.0 - u[i]),
                _ => {}
            }
        }
        if lo >= hi {
            return Ok(IntegralEstimate { value: 0.0, error: 0.0 });
        }
        let mut f = |s: f64| {
            let mut g = vec![0.0; self.d];
            for i in 0..self.d {
                g[i] = match self.linking[i][0].family() {
                    BicopFamily::FrechetUpper | BicopFamily::FrechetLower => 1.0,
                    _ => self.linking[i][0].hfunc(u[i], s),
                };
            }
            self.inner.cdf(&g, s)
        };
        integrate_adaptive(&mut f, lo, hi, cfg.abs_tol, cfg.rel_tol, cfg.max_subdivisions)
    }

    /// Sub-model on the variables in `keep` (strictly increasing indices):
    /// the kept linking rows with the inner copula marginalised to match.
    pub fn marginalize(&self, keep: &[usize]) -> Result<FactorModel> {
        if keep.len() < 2 || keep.windows(2).any(|w| w[1] <= w[0]) {
            return Err(FcError::Domain(
                "marginalisation needs at least two strictly increasing indices".into(),
            ));
        }
        if keep.iter().any(|&i| i >= self.d) {
            return Err(FcError::Domain("marginalisation index out of range".into()));
        }
        let linking = keep.iter().map(|&i| self.linking[i].clone()).collect();
        FactorModel::new(linking, self.inner.marginal(keep)?)
    }

    /// Verification helper for the extraction construction: with an
    /// independence inner copula, a single layer, and every linking row equal
    /// to M except row `l`, the bivariate `(l, k)` margin equals the linking
    /// copula of row `l`.  Returns that margin as a two-variable model.
    pub fn extract_linking(&self, l: usize, k: usize) -> Result<FactorModel> {
        if l >= self.d || k >= self.d || l == k {
            return Err(FcError::Domain(format!(
                "extraction indices ({l}, {k}) invalid for d = {}",
                self.d
            )));
        }
        if self.w != 1 {
            return Err(FcError::Domain("extraction requires a single-layer model".into()));
        }
        if !matches!(self.inner.family(), InnerFamily::Independence) {
            return Err(FcError::Domain("extraction requires an independence inner copula".into()));
        }
        for (i, row) in self.linking.iter().enumerate() {
            if i != l && row[0].family() != BicopFamily::FrechetUpper {
                return Err(FcError::Domain(format!(
                    "extraction requires every linking row except {l} to be the upper Fréchet bound (row {i} is {})",
                    row[0].family().name()
                )));
            }
        }
        FactorModel::new(
            vec![self.linking[l].clone(), self.linking[k].clone()],
            InnerCopula::independence(2)?,
        )
    }

    /// All scalar parameter locations, in registry order: linking parameters
    /// (variable-major, then layer), inner mapping scalars, then the factor
    /// law rate if present.
    pub fn param_locs(&self) -> Vec<ParamLoc> {
        let mut locs = Vec::new();
        for (i, row) in self.linking.iter().enumerate() {
            for (j, cop) in row.iter().enumerate() {
                if cop.family().has_parameter() {
                    locs.push(ParamLoc::Linking { var: i, layer: j });
                }
            }
        }
        for (m, mapping) in self.inner.mappings().iter().enumerate() {
            for c in 0..mapping_scalar_count(mapping) {
                locs.push(ParamLoc::InnerMapping { mapping: m, coord: c });
            }
        }
        if matches!(self.inner.factor_law(), FactorLaw::Exponential(_)) {
            locs.push(ParamLoc::FactorRate);
        }
        locs
    }

    /// Current value at a parameter location.
    pub fn get_param(&self, loc: &ParamLoc) -> Result<f64> {
        match *loc {
            ParamLoc::Linking { var, layer } => {
                if var >= self.d || layer >= self.w {
                    return Err(FcError::Domain(format!("linking location ({var}, {layer}) out of range")));
                }
                let cop = &self.linking[var][layer];
                if !cop.family().has_parameter() {
                    return Err(FcError::Domain(format!(
                        "linking copula ({var}, {layer}) has family {} without a parameter",
                        cop.family().name()
                    )));
                }
                Ok(cop.theta())
            }
            ParamLoc::InnerMapping { mapping, coord } => {
                let m = self.inner.mappings().get(mapping).ok_or_else(|| {
                    FcError::Domain(format!("inner mapping index {mapping} out of range"))
                })?;
                mapping_scalar(m, coord)
            }
            ParamLoc::FactorRate => match self.inner.factor_law() {
                FactorLaw::Exponential(rate) => Ok(*rate),
                other => Err(FcError::Domain(format!(
                    "factor law {} has no rate parameter",
                    other.name()
                ))),
            },
        }
    }

    /// Set the value at a parameter location, revalidating the model part.
    pub fn set_param(&mut self, loc: &ParamLoc, value: f64) -> Result<()> {
        match *loc {
            ParamLoc::Linking { var, layer } => {
                if var >= self.d || layer >= self.w {
                    return Err(FcError::Domain(format!("linking location ({var}, {layer}) out of range")));
                }
                let family = self.linking[var][layer].family();
                self.linking[var][layer] = Bicop::new(family, value)?;
                Ok(())
            }
            ParamLoc::InnerMapping { mapping, coord } => {
                let m = self
                    .inner
                    .mappings_mut()
                    .get_mut(mapping)
                    .ok_or_else(|| FcError::Domain(format!("inner mapping index {mapping} out of range")))?;
                set_mapping_scalar(m, coord, value)
            }
            ParamLoc::FactorRate => {
                if !matches!(self.inner.factor_law(), FactorLaw::Exponential(_)) {
                    return Err(FcError::Domain(format!(
                        "factor law {} has no rate parameter",
                        self.inner.factor_law().name()
                    )));
                }
                let law = FactorLaw::Exponential(value);
                law.validate()?;
                let rebuilt = InnerCopula::new(
                    self.inner.dim(),
                    self.inner.family().clone(),
                    self.inner.mappings().to_vec(),
                    law,
                )?;
                self.inner = rebuilt;
                Ok(())
            }
        }
    }

    /// All parameter values in registry order.
    pub fn params(&self) -> Vec<f64> {
        self.param_locs()
            .iter()
            .map(|loc| self.get_param(loc).expect("registry location is valid"))
            .collect()
    }
}

/// Location of one scalar parameter inside a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamLoc {
    /// Parameter of the linking copula (variable `var`, layer `layer`).
    Linking {
        /// Variable index (zero-based).
        var: usize,
        /// Layer index (zero-based).
        layer: usize,
    },
    /// Scalar `coord` of the inner mapping with index `mapping`.
    InnerMapping {
        /// Mapping index among the inner copula's mappings.
        mapping: usize,
        /// Scalar index within the mapping (`ExpDecay` has two).
        coord: usize,
    },
    /// Rate of an exponential factor law.
    FactorRate,
}

impl ParamLoc {
    /// Registry name, e.g. `linking[2][1]`, `inner.mapping1[0]`, `factor_rate`.
    pub fn name(&self) -> String {
        match *self {
            ParamLoc::Linking { var, layer } => format!("linking[{}][{}]", var + 1, layer + 1),
            ParamLoc::InnerMapping { mapping, coord } => {
                format!("inner.mapping{}[{}]", mapping + 1, coord)
            }
            ParamLoc::FactorRate => "factor_rate".into(),
        }
    }
}

/// Number of fittable scalars inside a mapping.
pub(crate) fn mapping_scalar_count(mapping: &FactorMapping) -> usize {
    match mapping {
        FactorMapping::Constant(_) | FactorMapping::ExpInverse { .. } => 1,
        FactorMapping::ExpDecay { .. } => 2,
        _ => 0,
    }
}

fn mapping_scalar(mapping: &FactorMapping, coord: usize) -> Result<f64> {
    match (mapping, coord) {
        (FactorMapping::Constant(b), 0) => Ok(*b),
        (FactorMapping::ExpInverse { rate }, 0) => Ok(*rate),
        (FactorMapping::ExpDecay { b0, .. }, 0) => Ok(*b0),
        (FactorMapping::ExpDecay { b1, .. }, 1) => Ok(*b1),
        _ => Err(FcError::Domain(format!(
            "mapping has no scalar parameter at index {coord}"
        ))),
    }
}

fn set_mapping_scalar(mapping: &mut FactorMapping, coord: usize, value: f64) -> Result<()> {
    match (&mut *mapping, coord) {
        (FactorMapping::Constant(b), 0) => *b = value,
        (FactorMapping::ExpInverse { rate }, 0) => *rate = value,
        (FactorMapping::ExpDecay { b0, .. }, 0) => *b0 = value,
        (FactorMapping::ExpDecay { b1, .. }, 1) => *b1 = value,
        _ => {
            return Err(FcError::Domain(format!(
                "mapping has no scalar parameter at index {coord}"
            )))
        }
    }
    mapping.validate()
}

/// Scale on which a free parameter is optimized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamScale {
    /// Kendall's tau of the associated bivariate family (one-parameter
    /// copula parameters): a common, well-conditioned box.
    Tau,
    /// The parameter's own scale (mapping coefficients, rates).
    Native,
}

/// One free parameter of a fit: the tied locations it controls, its scale,
/// and its box.
#[derive(Debug, Clone)]
pub struct FreeParam {
    /// Display name (the tie tag, or the single location's registry name).
    pub name: String,
    /// Locations sharing this value.
    pub locs: Vec<ParamLoc>,
    /// Optimization scale.
    pub scale: ParamScale,
    /// Lower box bound on the optimization scale.
    pub lower: f64,
    /// Upper box bound on the optimization scale.
    pub upper: f64,
    /// Initial value on the optimization scale.
    pub init: f64,
}

/// A model with declared free parameters, ready for fitting.
///
/// Free linking parameters and constant-mapping inner parameters are
/// optimized on the Kendall-tau scale (box `[-0.95, 0.95]` intersected with
/// the family's attainable range); other scalars keep their native scale.
/// Tags tie several locations to a single free value — on the tau scale the
/// tie means equal tau, converted per location to each family's parameter.
#[derive(Debug, Clone)]
pub struct FitTemplate {
    model: FactorModel,
    free: Vec<FreeParam>,
}

impl FitTemplate {
    /// Declare the free locations of `model`; `specs` pairs each location
    /// with an optional tie tag.
    pub fn new(model: FactorModel, specs: Vec<(ParamLoc, Option<String>)>) -> Result<FitTemplate> {
        if specs.is_empty() {
            return Err(FcError::Domain("a fit template needs at least one free parameter".into()));
        }
        // Group by tag, preserving first-appearance order.
        let mut groups: Vec<(Option<String>, Vec<ParamLoc>)> = Vec::new();
        for (loc, tag) in specs {
            model.get_param(&loc)?;
            match &tag {
                Some(t) => {
                    if let Some(g) = groups.iter_mut().find(|(g, _)| g.as_deref() == Some(t)) {
                        g.1.push(loc);
                        continue;
                    }
                    groups.push((Some(t.clone()), vec![loc]));
                }
                None => groups.push((None, vec![loc])),
            }
        }
        let mut free = Vec::new();
        for (tag, locs) in groups {
            let mut scale = None;
            let mut lower = f64::NEG_INFINITY;
            let mut upper = f64::INFINITY;
            for loc in &locs {
                let (s, lo, hi) = scale_and_bounds(&model, loc)?;
                match scale {
                    None => scale = Some(s),
                    Some(prev) if prev != s => {
                        return Err(FcError::Domain(format!(
                            "tied parameters under tag {:?} mix tau-scale and native-scale locations",
                            tag.as_deref().unwrap_or("")
                        )))
                    }
                    _ => {}
                }
                lower = lower.max(lo);
                upper = upper.min(hi);
            }
            let scale = scale.unwrap();
            if lower >= upper {
                return Err(FcError::Domain(format!(
                    "tied parameters under tag {:?} have an empty common range",
                    tag.as_deref().unwrap_or("")
                )));
            }
            // Initial value: the template's current value at the first
            // location, mapped to the fit scale and clamped into the box.
            let loc0 = locs[0];
            let native = model.get_param(&loc0)?;
            let init = match scale {
                ParamScale::Native => native,
                ParamScale::Tau => {
                    let fam = assoc_family(&model, &loc0)?;
                    tau_of_theta(fam, native).unwrap_or(0.5 * (lower + upper))
                }
            };
            let init = init.clamp(lower, upper);
            let name = tag.unwrap_or_else(|| loc0.name());
            free.push(FreeParam { name, locs, scale, lower, upper, init });
        }
        Ok(FitTemplate { model, free })
    }

    /// Template over every registered parameter of `model` (no ties).
    pub fn all_free(model: FactorModel) -> Result<FitTemplate> {
        let specs = model.param_locs().into_iter().map(|l| (l, None)).collect();
        FitTemplate::new(model, specs)
    }

    /// Number of free parameters.
    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    /// The free-parameter descriptors, in order.
    pub fn free(&self) -> &[FreeParam] {
        &self.free
    }

    /// The template's base model (placeholder values at free locations).
    pub fn base(&self) -> &FactorModel {
        &self.model
    }

    /// Initial point on the fit scale.
    pub fn initial(&self) -> Vec<f64> {
        self.free.iter().map(|f| f.init).collect()
    }

    /// Box bounds on the fit scale.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        self.free.iter().map(|f| (f.lower, f.upper)).collect()
    }

    /// Materialise the model at the fit-scale point `x`.
    pub fn instantiate(&self, x: &[f64]) -> Result<FactorModel> {
        if x.len() != self.free.len() {
            return Err(FcError::Domain(format!(
                "expected {} free values, got {}",
                self.free.len(),
                x.len()
            )));
        }
        let mut model = self.model.clone();
        for (fp, &v) in self.free.iter().zip(x) {
            if !v.is_finite() {
                return Err(FcError::Domain(format!("free parameter {} is not finite", fp.name)));
            }
            for loc in &fp.locs {
                let native = match fp.scale {
                    ParamScale::Native => v,
                    ParamScale::Tau => theta_of_tau(assoc_family(&model, loc)?, v)?,
                };
                model.set_param(loc, native)?;
            }
        }
        Ok(model)
    }

    /// Materialise the model with `theta` interpreted on each parameter's
    /// native scale, regardless of the fit scale (used by the Fisher code,
    /// whose derivatives are taken in the model's own parameterisation).
    pub fn instantiate_native(&self, theta: &[f64]) -> Result<FactorModel> {
        if theta.len() != self.free.len() {
            return Err(FcError::Domain(format!(
                "expected {} free values, got {}",
                self.free.len(),
                theta.len()
            )));
        }
        let mut model = self.model.clone();
        for (fp, &v) in self.free.iter().zip(theta) {
            if !v.is_finite() {
                return Err(FcError::Domain(format!("free parameter {} is not finite", fp.name)));
            }
            for loc in &fp.locs {
                model.set_param(loc, v)?;
            }
        }
        Ok(model)
    }

    /// Native values of the free parameters at the fit-scale point `x`
    /// (first tied location where a tie spans several).
    pub fn native_point(&self, x: &[f64]) -> Result<Vec<f64>> {
        let model = self.instantiate(x)?;
        self.free.iter().map(|fp| model.get_param(&fp.locs[0])).collect()
    }

    /// The same template with every tau-scale parameter switched to its
    /// native scale (bounds mapped through the family's tau-parameter
    /// relation).  Ties spanning different families cannot be re-scaled.
    pub fn native_scaled(mut self) -> Result<FitTemplate> {
        for fp in &mut self.free {
            if fp.scale != ParamScale::Tau {
                continue;
            }
            let fam0 = assoc_family(&self.model, &fp.locs[0])?;
            for loc in &fp.locs[1..] {
                if assoc_family(&self.model, loc)? != fam0 {
                    return Err(FcError::Unsupported(
                        "cannot switch a tie across different families to the native scale".into(),
                    ));
                }
            }
            let lower = theta_of_tau(fam0, fp.lower)?;
            let upper = theta_of_tau(fam0, fp.upper)?;
            let init = theta_of_tau(fam0, fp.init)?;
            fp.scale = ParamScale::Native;
            fp.lower = lower.min(upper);
            fp.upper = lower.max(upper);
            fp.init = init;
        }
        Ok(self)
    }
}

/// Bivariate family whose tau map parameterises the location (for the tau
/// fit scale).
fn assoc_family(model: &FactorModel, loc: &ParamLoc) -> Result<BicopFamily> {
    match *loc {
        ParamLoc::Linking { var, layer } => Ok(model.linking()[var][layer].family()),
        ParamLoc::InnerMapping { mapping, .. } => match model.inner().family() {
            InnerFamily::Clayton => Ok(BicopFamily::Clayton),
            InnerFamily::GumbelHougaard => Ok(BicopFamily::GumbelHougaard),
            InnerFamily::Frank => Ok(BicopFamily::Frank),
            InnerFamily::GaussianExchangeable => Ok(BicopFamily::Gaussian),
            InnerFamily::CVine(pairs) => Ok(pairs[mapping]),
            other => Err(FcError::Domain(format!(
                "inner family {} has no associated bivariate family",
                other.name()
            ))),
        },
        ParamLoc::FactorRate => {
            Err(FcError::Domain("the factor rate has no associated bivariate family".into()))
        }
    }
}

/// Fit scale and box for one location.
fn scale_and_bounds(model: &FactorModel, loc: &ParamLoc) -> Result<(ParamScale, f64, f64)> {
    const TAU_BOX: (f64, f64) = (-0.95, 0.95);
    const TAU_MARGIN: f64 = 1e-3;
    match *loc {
        ParamLoc::Linking { .. } => {
            let fam = assoc_family(model, loc)?;
            let (lo, hi) = fam.tau_range();
            Ok((
                ParamScale::Tau,
                (lo + TAU_MARGIN).max(TAU_BOX.0),
                (hi - TAU_MARGIN).min(TAU_BOX.1),
            ))
        }
        ParamLoc::InnerMapping { mapping, coord } => {
            let m = &model.inner().mappings()[mapping];
            match m {
                FactorMapping::Constant(_) => {
                    let fam = assoc_family(model, loc)?;
                    let (mut lo, hi) = fam.tau_range();
                    let d = model.inner().dim() as f64;
                    match model.inner().family() {
                        // Equicorrelation must stay above -1/(d-1).
                        InnerFamily::GaussianExchangeable if d > 2.0 => {
                            let beta_min = -1.0 / (d - 1.0);
                            lo = lo.max(2.0 * beta_min.asin() / std::f64::consts::PI);
                        }
                        // No negative-dependence Frank frailty beyond d = 2.
                        InnerFamily::Frank if d > 2.0 => lo = lo.max(0.0),
                        _ => {}
                    }
                    Ok((
                        ParamScale::Tau,
                        (lo + TAU_MARGIN).max(TAU_BOX.0),
                        (hi - TAU_MARGIN).min(TAU_BOX.1),
                    ))
                }
                FactorMapping::ExpInverse { .. } => Ok((ParamScale::Native, 1e-2, 100.0)),
                FactorMapping::ExpDecay { .. } => {
                    let _ = coord;
                    Ok((ParamScale::Native, -10.0, 10.0))
                }
                _ => Err(FcError::Domain(format!(
                    "mapping {} has no fittable scalar",
                    mapping + 1
                ))),
            }
        }
        ParamLoc::FactorRate => Ok((ParamScale::Native, 1e-2, 100.0)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_legendre_01;
    use approx::assert_abs_diff_eq;

    fn bicop(f: BicopFamily, theta: f64) -> Bicop {
        Bicop::new(f, theta).unwrap()
    }

    fn indep() -> Bicop {
        Bicop::independence()
    }

    fn fgm_closure(theta1: f64, theta2: f64) -> FactorModel {
        FactorModel::one_factor(vec![
            bicop(BicopFamily::Fgm, theta1),
            bicop(BicopFamily::Fgm, theta2),
        ])
        .unwrap()
    }

    #[test]
    fn g_transform_composes_h_functions() {
        // All-independence linking: identity.
        let model = FactorModel::from_layers(
            vec![vec![indep(); 3], vec![indep(); 3]],
            InnerCopula::independence(3).unwrap(),
        )
        .unwrap();
        assert_abs_diff_eq!(model.g_transform(1, 0.37, &[0.2, 0.9]).unwrap(), 0.37, epsilon = 1e-12);
        assert_abs_diff_eq!(model.g_derivative(1, 0.37, &[0.2, 0.9]).unwrap(), 1.0);

        // Single layer: plain h-function.
        let cop = bicop(BicopFamily::Clayton, 2.0);
        let ofc = FactorModel::one_factor(vec![cop, cop]).unwrap();
        assert_abs_diff_eq!(
            ofc.g_transform(0, 0.3, &[0.6]).unwrap(),
            cop.hfunc(0.3, 0.6),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            ofc.g_derivative(0, 0.3, &[0.6]).unwrap(),
            cop.pdf(0.3, 0.6).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn g_transform_matches_nested_finite_differences() {
        // Three Frank layers: compare against nested central differences of
        // the cdfs in the conditioning argument.
        let f1 = bicop(BicopFamily::Frank, 3.0);
        let f2 = bicop(BicopFamily::Frank, -2.0);
        let f3 = bicop(BicopFamily::Frank, 5.0);
        let model = FactorModel::new(
            vec![vec![f1, f2, f3], vec![f1, f2, f3]],
            InnerCopula::independence(2).unwrap(),
        )
        .unwrap();
        let h = 1e-5;
        let fd = |cop: &Bicop, x: f64, t: f64| (cop.cdf(x, t + h) - cop.cdf(x, t - h)) / (2.0 * h);
        for &(u, t1, t2, t3) in
            &[(0.3, 0.4, 0.6, 0.2), (0.7, 0.5, 0.5, 0.5), (0.12, 0.8, 0.3, 0.9)]
        {
            let x1 = fd(&f1, u, t1);
            let x2 = fd(&f2, x1, t2);
            let x3 = fd(&f3, x2, t3);
            let g = model.g_transform(0, u, &[t1, t2, t3]).unwrap();
            assert!(
                (g - x3).abs() <= 1e-4 * g.max(1e-4),
                "({u},{t1},{t2},{t3}): {g} vs {x3}"
            );
        }
    }

    #[test]
    fn g_derivative_matches_finite_difference_of_g_transform() {
        let f1 = bicop(BicopFamily::Frank, 4.0);
        let f2 = bicop(BicopFamily::Frank, 2.0);
        let model = FactorModel::new(
            vec![vec![f1, f2], vec![f1, f2]],
            InnerCopula::independence(2).unwrap(),
        )
        .unwrap();
        let h = 1e-6;
        for &(u, t1, t2) in &[(0.3, 0.4, 0.6), (0.55, 0.2, 0.8), (0.9, 0.7, 0.3)] {
            let t = [t1, t2];
            let num =
                (model.g_transform(0, u + h, &t).unwrap() - model.g_transform(0, u - h, &t).unwrap())
                    / (2.0 * h);
            let an = model.g_derivative(0, u, &t).unwrap();
            assert!((num - an).abs() <= 1e-4 * an.max(1e-4), "({u},{t1},{t2}): {an} vs {num}");
        }
    }

    #[test]
    fn density_of_trivial_model_is_one() {
        let model = FactorModel::one_factor(vec![indep(), indep(), indep()]).unwrap();
        let cfg = IntegratorConfig::adaptive();
        for &u in &[[0.2, 0.5, 0.8], [0.5, 0.5, 0.5]] {
            let est = model.density(&u, &cfg).unwrap();
            assert_abs_diff_eq!(est.value, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn fgm_closure_density_and_cdf_match_the_closed_form() {
        // FGM(theta1) x FGM(theta2) linking with independence inner gives an
        // FGM copula with parameter theta1*theta2/3.
        let cfg = IntegratorConfig::adaptive();
        for &(t1, t2) in &[(1.0, 1.0), (-1.0, 0.5), (0.5, 0.5)] {
            let model = fgm_closure(t1, t2);
            let outer = bicop(BicopFamily::Fgm, t1 * t2 / 3.0);
            for &u in &[0.1, 0.3, 0.7] {
                for &v in &[0.2, 0.5, 0.9] {
                    let dens = model.density(&[u, v], &cfg).unwrap().value;
                    assert_abs_diff_eq!(dens, outer.pdf(u, v).unwrap(), epsilon = 1e-6);
                    let cdf = model.outer_cdf(&[u, v], &cfg).unwrap().value;
                    assert_abs_diff_eq!(cdf, outer.cdf(u, v), epsilon = 1e-6);
                }
            }
        }
        // Spot value quoted for the (1,1) closure at (0.1, 0.1).
        let dens = fgm_closure(1.0, 1.0).density(&[0.1, 0.1], &cfg).unwrap().value;
        assert_abs_diff_eq!(dens, 1.0 + (0.8 * 0.8) / 3.0, epsilon = 1e-6);
    }

    #[test]
    fn gaussian_closure_density_matches_the_implied_correlation() {
        // Gaussian links with Delta = 0.6 and exchangeable Gaussian inner
        // rho_A = 0.5 give a Gaussian copula with rho = 0.5*(1-0.36)+0.36.
        let delta = 0.6;
        let rho_a = 0.5;
        let model = FactorModel::new(
            vec![
                vec![bicop(BicopFamily::Gaussian, delta)],
                vec![bicop(BicopFamily::Gaussian, delta)],
            ],
            InnerCopula::new(
                2,
                InnerFamily::GaussianExchangeable,
                vec![FactorMapping::Constant(rho_a)],
                FactorLaw::Uniform,
            )
            .unwrap(),
        )
        .unwrap();
        let rho = rho_a * (1.0 - delta * delta) + delta * delta;
        let outer = bicop(BicopFamily::Gaussian, rho);
        let cfg = IntegratorConfig::adaptive();
        for &(u, v) in &[(0.3, 0.4), (0.5, 0.5), (0.8, 0.2), (0.9, 0.9)] {
            let dens = model.density(&[u, v], &cfg).unwrap().value;
            let expected = outer.pdf(u, v).unwrap();
            assert!(
                (dens - expected).abs() <= 1e-4 * expected,
                "({u},{v}): {dens} vs {expected}"
            );
        }
    }

    #[test]
    fn one_factor_density_agrees_with_an_independent_product_integrand() {
        // Independently coded classical one-factor density: GL quadrature of
        // the product of pair densities.
        let links =
            [bicop(BicopFamily::Clayton, 2.0), bicop(BicopFamily::Frank, 4.0), bicop(BicopFamily::GumbelHougaard, 1.8)];
        let model = FactorModel::one_factor(links.to_vec()).unwrap();
        let (nodes, weights) = gauss_legendre_01(128);
        let cfg = IntegratorConfig::adaptive();
        for &u in &[[0.3, 0.6, 0.2], [0.5, 0.5, 0.5], [0.85, 0.1, 0.7]] {
            let mut byhand = 0.0;
            for (t, w) in nodes.iter().zip(&weights) {
                let mut prod = 1.0;
                for (i, cop) in links.iter().enumerate() {
                    prod *= cop.pdf(u[i], *t).unwrap();
                }
                byhand += w * prod;
            }
            let dens = model.density(&u, &cfg).unwrap().value;
            assert!((dens - byhand).abs() <= 1e-6 * byhand.max(1.0), "{dens} vs {byhand}");
        }
    }

    #[test]
    fn frechet_bound_constructions_hit_the_bounds() {
        // All-M linking with independence inner: the upper bound min(u).
        let m = bicop(BicopFamily::FrechetUpper, 0.0);
        let upper = FactorModel::one_factor(vec![m, m, m]).unwrap();
        let cfg = IntegratorConfig::adaptive();
        for &u in &[[0.3, 0.6, 0.2], [0.9, 0.8, 0.85], [0.5, 0.5, 0.5]] {
            let est = upper.outer_cdf(&u, &cfg).unwrap();
            let expected = u.iter().cloned().fold(1.0, f64::min);
            assert_abs_diff_eq!(est.value, expected, epsilon = 1e-8);
        }
        // W/M rows give the lower bound max(u1+u2-1, 0).
        let w = bicop(BicopFamily::FrechetLower, 0.0);
        let lower = FactorModel::one_factor(vec![w, m]).unwrap();
        for &(u1, u2) in &[(0.3, 0.4), (0.8, 0.7), (0.2, 0.9), (0.5, 0.5)] {
            let est = lower.outer_cdf(&[u1, u2], &cfg).unwrap();
            assert_abs_diff_eq!(est.value, (u1 + u2 - 1.0).max(0.0), epsilon = 1e-8);
        }
        // Multi-layer Fréchet links are rejected.
        let two_layer = FactorModel::from_layers(
            vec![vec![m, m], vec![indep(), indep()]],
            InnerCopula::independence(2).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            two_layer.outer_cdf(&[0.5, 0.5], &cfg),
            Err(FcError::Unsupported(_))
        ));
    }

    #[test]
    fn all_independence_linking_exposes_the_inner_copula() {
        // The outer copula collapses to a conditionally invariant inner.
        let inner = InnerCopula::new(
            3,
            InnerFamily::Clayton,
            vec![FactorMapping::Constant(2.0)],
            FactorLaw::Uniform,
        )
        .unwrap();
        let model = FactorModel::one_factor(vec![indep(), indep(), indep()])
            .unwrap();
        let model = FactorModel::new(model.linking().to_vec(), inner.clone()).unwrap();
        let cfg = IntegratorConfig::adaptive();
        for &u in &[[0.3, 0.6, 0.2], [0.5, 0.5, 0.5], [0.9, 0.8, 0.4]] {
            let est = model.outer_cdf(&u, &cfg).unwrap();
            assert_abs_diff_eq!(est.value, inner.cdf(&u, 0.0).unwrap(), epsilon = 1e-8);
            let dens = model.density(&u, &cfg).unwrap();
            assert_abs_diff_eq!(dens.value, inner.pdf(&u, 0.0).unwrap(), epsilon = 1e-7);
        }
    }

    #[test]
    fn density_matches_mixed_finite_differences_of_the_cdf() {
        let model = fgm_closure(1.0, 0.5);
        let cfg = IntegratorConfig::adaptive();
        let h = 1e-3;
        for &(u, v) in &[(0.3, 0.6), (0.5, 0.5), (0.75, 0.25)] {
            let c = |a: f64, b: f64| model.outer_cdf(&[a, b], &cfg).unwrap().value;
            let fd = (c(u + h, v + h) - c(u + h, v - h) - c(u - h, v + h) + c(u - h, v - h))
                / (4.0 * h * h);
            let dens = model.density(&[u, v], &cfg).unwrap().value;
            assert!((fd - dens).abs() <= 1e-3 * dens, "({u},{v}): {dens} vs fd {fd}");
        }
    }

    #[test]
    fn outer_cdf_is_monotone_and_within_frechet_bounds() {
        let model = FactorModel::new(
            vec![
                vec![bicop(BicopFamily::Clayton, 2.0)],
                vec![bicop(BicopFamily::Frank, -3.0)],
            ],
            InnerCopula::new(
                2,
                InnerFamily::Frank,
                vec![FactorMapping::Constant(2.5)],
                FactorLaw::Uniform,
            )
            .unwrap(),
        )
        .unwrap();
        let cfg = IntegratorConfig::adaptive();
        let grid: Vec<f64> = (1..6).map(|i| i as f64 / 6.0).collect();
        let mut prev_row = vec![0.0; grid.len()];
        for &u in &grid {
            let mut prev = 0.0;
            for (jv, &v) in grid.iter().enumerate() {
                let c = model.outer_cdf(&[u, v], &cfg).unwrap().value;
                let (lo, hi) = ((u + v - 1.0).max(0.0), u.min(v));
                assert!(c >= lo - 1e-9 && c <= hi + 1e-9, "({u},{v}): {c} outside [{lo},{hi}]");
                assert!(c >= prev - 1e-9, "not monotone in v at ({u},{v})");
                assert!(c >= prev_row[jv] - 1e-9, "not monotone in u at ({u},{v})");
                prev = c;
                prev_row[jv] = c;
            }
        }
    }

    #[test]
    fn quadrant_dependence_certificates_hold() {
        let cfg = IntegratorConfig::adaptive();
        // PQD inner (Frank beta > 0), row 1 SD (AMH theta < 0), row 2 NQD
        // (FGM theta < 0): the outer copula is PQD.
        let pqd = FactorModel::new(
            vec![
                vec![bicop(BicopFamily::Amh, -0.5)],
                vec![bicop(BicopFamily::Fgm, -0.5)],
            ],
            InnerCopula::new(
                2,
                InnerFamily::Frank,
                vec![FactorMapping::Constant(3.0)],
                FactorLaw::Uniform,
            )
            .unwrap(),
        )
        .unwrap();
        // NQD inner, row 1 SI (AMH theta > 0), row 2 NQD: the outer copula
        // is NQD.
        let nqd = FactorModel::new(
            vec![
                vec![bicop(BicopFamily::Amh, 0.5)],
                vec![bicop(BicopFamily::Fgm, -0.5)],
            ],
            InnerCopula::new(
                2,
                InnerFamily::Frank,
                vec![FactorMapping::Constant(-3.0)],
                FactorLaw::Uniform,
            )
            .unwrap(),
        )
        .unwrap();
        for i in 1..20 {
            for j in 1..20 {
                let (u, v) = (i as f64 / 20.0, j as f64 / 20.0);
                let cp = pqd.outer_cdf(&[u, v], &cfg).unwrap().value;
                assert!(cp >= u * v - 1e-8, "PQD violated at ({u},{v}): {cp} < {}", u * v);
                let cn = nqd.outer_cdf(&[u, v], &cfg).unwrap().value;
                assert!(cn <= u * v + 1e-8, "NQD violated at ({u},{v}): {cn} > {}", u * v);
            }
        }
    }

    #[test]
    fn marginalization_keeps_rows_and_shrinks_the_inner() {
        let inner = InnerCopula::new(
            3,
            InnerFamily::GumbelHougaard,
            vec![FactorMapping::Constant(2.0)],
            FactorLaw::Uniform,
        )
        .unwrap();
        let model = FactorModel::new(
            vec![
                vec![bicop(BicopFamily::Clayton, 1.0)],
                vec![bicop(BicopFamily::Clayton, 2.0)],
                vec![bicop(BicopFamily::Clayton, 3.0)],
            ],
            inner,
        )
        .unwrap();
        // keep = all is the identity.
        let same = model.marginalize(&[0, 1, 2]).unwrap();
        assert_eq!(same, model);
        // The 2-margin density integrates the full density over the dropped
        // coordinate.
        let sub = model.marginalize(&[1, 2]).unwrap();
        assert_eq!(sub.d(), 2);
        assert_eq!(sub.linking()[0][0].theta(), 2.0);
        let cfg = IntegratorConfig::adaptive();
        let (nodes, weights) = gauss_legendre_01(64);
        for &(a, b) in &[(0.3, 0.7), (0.6, 0.4)] {
            let mut full = 0.0;
            for (x, wt) in nodes.iter().zip(&weights) {
                full += wt * model.density(&[*x, a, b], &cfg).unwrap().value;
            }
            let margin = sub.density(&[a, b], &cfg).unwrap().value;
            assert!(
                (full - margin).abs() <= 2e-3 * margin.max(1.0),
                "({a},{b}): margin {margin} vs integrated {full}"
            );
        }
    }

    #[test]
    fn extraction_recovers_the_non_degenerate_link() {
        let m = bicop(BicopFamily::FrechetUpper, 0.0);
        let cfg = IntegratorConfig::adaptive();
        for link in [
            bicop(BicopFamily::Clayton, 2.0),
            Bicop::independence(),
            bicop(BicopFamily::Fgm, -1.0),
        ] {
            let model =
                FactorModel::one_factor(vec![m, link, m]).unwrap();
            let margin = model.extract_linking(1, 2).unwrap();
            for i in 1..8 {
                for j in 1..8 {
                    let (u, v) = (i as f64 / 8.0, j as f64 / 8.0);
                    let c = margin.outer_cdf(&[u, v], &cfg).unwrap().value;
                    assert_abs_diff_eq!(c, link.cdf(u, v), epsilon = 1e-6);
                }
            }
        }
        // Preconditions are enforced.
        let bad = FactorModel::one_factor(vec![
            bicop(BicopFamily::Clayton, 2.0),
            bicop(BicopFamily::Clayton, 2.0),
        ])
        .unwrap();
        assert!(bad.extract_linking(0, 1).is_err());
    }

    #[test]
    fn registry_addresses_every_scalar() {
        let inner = InnerCopula::new(
            2,
            InnerFamily::Clayton,
            vec![FactorMapping::ExpDecay { b0: 0.5, b1: 1.0 }],
            FactorLaw::Exponential(2.0),
        )
        .unwrap();
        let mut model = FactorModel::new(
            vec![
                vec![bicop(BicopFamily::Clayton, 2.0), indep()],
                vec![bicop(BicopFamily::Frank, 4.0), bicop(BicopFamily::GumbelHougaard, 1.5)],
            ],
            inner,
        )
        .unwrap();
        let locs = model.param_locs();
        // Parameter-free entries are skipped; order is rows, then inner, then rate.
        assert_eq!(
            locs,
            vec![
                ParamLoc::Linking { var: 0, layer: 0 },
                ParamLoc::Linking { var: 1, layer: 0 },
                ParamLoc::Linking { var: 1, layer: 1 },
                ParamLoc::InnerMapping { mapping: 0, coord: 0 },
                ParamLoc::InnerMapping { mapping: 0, coord: 1 },
                ParamLoc::FactorRate,
            ]
        );
        assert_eq!(model.params(), vec![2.0, 4.0, 1.5, 0.5, 1.0, 2.0]);
        assert_eq!(locs[0].name(), "linking[1][1]");
        assert_eq!(locs[4].name(), "inner.mapping1[1]");
        model.set_param(&locs[1], -2.0).unwrap();
        assert_eq!(model.linking()[1][0].theta(), -2.0);
        model.set_param(&locs[5], 3.0).unwrap();
        assert_eq!(model.get_param(&ParamLoc::FactorRate).unwrap(), 3.0);
        // Domain violations are rejected at set time.
        assert!(model.set_param(&locs[2], 0.5).is_err()); // Gumbel needs >= 1
        assert!(model
            .set_param(&ParamLoc::Linking { var: 0, layer: 1 }, 1.0)
            .is_err()); // independence has no parameter
    }

    #[test]
    fn fit_template_converts_tau_scale_and_ties() {
        let model = FactorModel::one_factor(vec![
            bicop(BicopFamily::Clayton, 1.0),
            bicop(BicopFamily::GumbelHougaard, 1.5),
            bicop(BicopFamily::Frank, 2.0),
        ])
        .unwrap();
        // Tie the first two on the tau scale; leave the third free alone.
        let tpl = FitTemplate::new(
            model,
            vec![
                (ParamLoc::Linking { var: 0, layer: 0 }, Some("g".into())),
                (ParamLoc::Linking { var: 1, layer: 0 }, Some("g".into())),
                (ParamLoc::Linking { var: 2, layer: 0 }, None),
            ],
        )
        .unwrap();
        assert_eq!(tpl.n_free(), 2);
        assert_eq!(tpl.free()[0].name, "g");
        let fitted = tpl.instantiate(&[0.4, 0.3]).unwrap();
        // Same tau, different native parameters per family.
        assert_abs_diff_eq!(fitted.linking()[0][0].theta(), 2.0 * 0.4 / 0.6, epsilon = 1e-9);
        assert_abs_diff_eq!(fitted.linking()[1][0].theta(), 1.0 / 0.6, epsilon = 1e-9);
        assert_abs_diff_eq!(fitted.linking()[2][0].tau(), 0.3, epsilon = 1e-6);
        // The Clayton/Gumbel tie restricts the common tau range to (0, ...).
        assert!(tpl.free()[0].lower > 0.0);
        // Out-of-the-box values fail to instantiate.
        assert!(tpl.instantiate(&[f64::NAN, 0.3]).is_err());
    }

    #[test]
    fn fit_template_handles_inner_and_native_parameters() {
        let inner = InnerCopula::new(
            3,
            InnerFamily::GaussianExchangeable,
            vec![FactorMapping::Constant(0.3)],
            FactorLaw::Uniform,
        )
        .unwrap();
        let model = FactorModel::new(
            vec![
                vec![bicop(BicopFamily::Clayton, 2.0)],
                vec![bicop(BicopFamily::Clayton, 2.0)],
                vec![bicop(BicopFamily::Clayton, 2.0)],
            ],
            inner,
        )
        .unwrap();
        let tpl = FitTemplate::all_free(model).unwrap();
        assert_eq!(tpl.n_free(), 4);
        // The inner equicorrelation is fitted on the Gaussian tau scale with
        // the d = 3 admissibility floor.
        let inner_free = &tpl.free()[3];
        let floor = 2.0 * (-0.5f64).asin() / std::f64::consts::PI;
        assert!(inner_free.lower >= floor);
        let fitted = tpl.instantiate(&[0.5, 0.5, 0.5, 0.2]).unwrap();
        let beta = fitted.get_param(&ParamLoc::InnerMapping { mapping: 0, coord: 0 }).unwrap();
        assert_abs_diff_eq!(beta, (0.2 * std::f64::consts::PI / 2.0).sin(), epsilon = 1e-9);
    }
}
