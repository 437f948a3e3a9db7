//! Text format for factor-copula models.
//!
//! A model file is sectioned key–value text:
//!
//! ```text
//! [model]
//! dimension = 4
//! layers = 2
//!
//! [inner]
//! family = frank
//! mapping = constant
//! mapping_params = 2.5
//! factor_law = uniform
//!
//! [linking.1]
//! families = frank, frank, indep, indep
//! taus = 0.5, 0.5, -, -
//!
//! [linking.2]
//! families = clayton, clayton, clayton, clayton
//! params = 2, 2, 2, 2
//! ```
//!
//! Lists are comma separated with one entry per variable (or per mapping
//! scalar).  Parameter-free entries are written `-`.  Each linking section
//! carries exactly one of `params` (natural parameters) or `taus` (Kendall
//! taus).  A numeric entry may be replaced by `free` or `free:tag` to mark
//! it for fitting; entries sharing a tag are tied to a single fitted value,
//! and a file containing any marker parses to a fit template instead of a
//! concrete model.  Comments start with `#`.

use crate::bicop::{theta_of_tau, Bicop, BicopFamily};
use crate::error::{FcError, Result};
use crate::factor_model::{FactorModel, FitTemplate, ParamLoc};
use crate::innercop::{FactorLaw, FactorMapping, InnerCopula, InnerFamily};
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Kendall tau used to initialise `free` linking parameters.
const FREE_INIT_TAU: f64 = 0.2;

/// Outcome of parsing: a concrete model, or a template when the file
/// contains `free` markers.
#[derive(Debug, Clone)]
pub enum ParsedSpec {
    /// Fully specified model.
    Model(FactorModel),
    /// Model with free parameters for fitting.
    Template(FitTemplate),
}

impl ParsedSpec {
    /// The underlying model (a template's base model carries the `free`
    /// markers' initial values).
    pub fn model(&self) -> &FactorModel {
        match self {
            ParsedSpec::Model(m) => m,
            ParsedSpec::Template(t) => t.base(),
        }
    }

    /// The template, if the file had `free` markers.
    pub fn template(&self) -> Option<&FitTemplate> {
        match self {
            ParsedSpec::Model(_) => None,
            ParsedSpec::Template(t) => Some(t),
        }
    }
}

fn perr(line: usize, msg: impl Into<String>) -> FcError {
    FcError::Parse { line, msg: msg.into() }
}

/// One list entry: a number, a `free` marker, or the `-` placeholder.
#[derive(Debug, Clone, PartialEq)]
enum Entry {
    Num(f64),
    Free(Option<String>),
    Dash,
}

fn parse_entry(line: usize, raw: &str) -> Result<Entry> {
    let s = raw.trim();
    if s == "-" {
        return Ok(Entry::Dash);
    }
    if s == "free" {
        return Ok(Entry::Free(None));
    }
    if let Some(tag) = s.strip_prefix("free:") {
        if tag.is_empty() || !tag.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        {
            return Err(perr(line, format!("invalid tie tag in '{s}'")));
        }
        return Ok(Entry::Free(Some(tag.to_string())));
    }
    s.parse::<f64>()
        .map(Entry::Num)
        .map_err(|_| perr(line, format!("expected a number, 'free', or '-', got '{s}'")))
}

fn parse_entries(line: usize, value: &str) -> Result<Vec<Entry>> {
    value.split(',').map(|e| parse_entry(line, e)).collect()
}

fn parse_names(value: &str) -> Vec<String> {
    value.split(',').map(|e| e.trim().to_string()).collect()
}

/// A parsed `[section]` with its keys, each remembering its line.
struct Section {
    line: usize,
    entries: BTreeMap<String, (usize, String)>,
}

impl Section {
    fn get(&self, key: &str) -> Option<&(usize, String)> {
        self.entries.get(key)
    }

    fn require(&self, key: &str) -> Result<&(usize, String)> {
        self.get(key)
            .ok_or_else(|| perr(self.line, format!("missing key '{key}' in this section")))
    }

    fn forbid_unknown(&self, allowed: &[&str]) -> Result<()> {
        for (key, (line, _)) in &self.entries {
            if !allowed.contains(&key.as_str()) {
                return Err(perr(*line, format!("unknown key '{key}'")));
            }
        }
        Ok(())
    }
}

fn split_sections(text: &str) -> Result<BTreeMap<String, Section>> {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| perr(line_no, format!("malformed section header '{line}'")))?
                .trim()
                .to_string();
            if name.is_empty() {
                return Err(perr(line_no, "empty section name"));
            }
            if sections.contains_key(&name) {
                return Err(perr(line_no, format!("duplicate section '[{name}]'")));
            }
            sections.insert(name.clone(), Section { line: line_no, entries: BTreeMap::new() });
            current = Some(name);
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| perr(line_no, format!("expected 'key = value', got '{line}'")))?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        let section = current
            .as_ref()
            .ok_or_else(|| perr(line_no, "key-value line before any [section] header"))?;
        let entries = &mut sections.get_mut(section).unwrap().entries;
        if entries.contains_key(&key) {
            return Err(perr(line_no, format!("duplicate key '{key}'")));
        }
        entries.insert(key, (line_no, value));
    }
    Ok(sections)
}

fn parse_usize(line: usize, value: &str, what: &str) -> Result<usize> {
    value
        .trim()
        .parse::<usize>()
        .map_err(|_| perr(line, format!("{what} must be a positive integer, got '{value}'")))
}

/// Default natural-scale parameter for a `free` inner-copula value.
fn free_inner_default(family: &InnerFamily, mapping_idx: usize) -> Result<f64> {
    match family {
        InnerFamily::GaussianExchangeable => Ok(0.2),
        InnerFamily::Clayton => Ok(0.5),
        InnerFamily::GumbelHougaard => Ok(1.25),
        InnerFamily::Frank => Ok(2.0),
        InnerFamily::CVine(pairs) => theta_of_tau(pairs[mapping_idx], FREE_INIT_TAU),
        InnerFamily::Independence | InnerFamily::FrechetUpper => Err(FcError::Domain(
            format!("inner family {} has no parameters to free", family.name()),
        )),
    }
}

fn parse_inner_family(line: usize, value: &str, d: usize) -> Result<InnerFamily> {
    let v = value.trim();
    if let Some(rest) = v.strip_prefix("cvine(") {
        let inner = rest
            .strip_suffix(')')
            .ok_or_else(|| perr(line, format!("malformed cvine family list '{v}'")))?;
        let pairs = parse_names(inner)
            .iter()
            .map(|n| BicopFamily::parse(n))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| perr(line, e.to_string()))?;
        if pairs.len() != d - 1 {
            return Err(perr(
                line,
                format!("cvine needs {} pair families for dimension {d}, got {}", d - 1, pairs.len()),
            ));
        }
        return Ok(InnerFamily::CVine(pairs));
    }
    match v {
        "indep" | "independence" | "pi" => Ok(InnerFamily::Independence),
        "gaussian-ex" | "gaussian" => Ok(InnerFamily::GaussianExchangeable),
        "clayton" => Ok(InnerFamily::Clayton),
        "gumbel" | "gumbel-hougaard" => Ok(InnerFamily::GumbelHougaard),
        "frank" => Ok(InnerFamily::Frank),
        "frechet-upper" | "upper" | "m" => Ok(InnerFamily::FrechetUpper),
        other => Err(perr(line, format!("unknown inner family '{other}'"))),
    }
}

struct MappingSpec {
    kind: String,
    line: usize,
}

/// Consume scalars (and collect free markers) for one mapping kind.
fn build_mapping(
    spec: &MappingSpec,
    mapping_idx: usize,
    family: &InnerFamily,
    scalars: &mut std::vec::IntoIter<Entry>,
    scalars_line: usize,
    free: &mut Vec<(ParamLoc, Option<String>)>,
) -> Result<FactorMapping> {
    let mut take = |coord: usize, what: &str, default: Result<f64>| -> Result<f64> {
        match scalars.next() {
            Some(Entry::Num(v)) => Ok(v),
            Some(Entry::Free(tag)) => {
                free.push((ParamLoc::InnerMapping { mapping: mapping_idx, coord }, tag));
                default
            }
            Some(Entry::Dash) => {
                Err(perr(scalars_line, format!("'-' is not a valid {what} value")))
            }
            None => Err(perr(
                scalars_line,
                format!("mapping_params list too short: missing {what}"),
            )),
        }
    };
    match spec.kind.as_str() {
        "constant" => {
            let v = take(0, "constant mapping parameter", free_inner_default(family, mapping_idx))?;
            Ok(FactorMapping::Constant(v))
        }
        "one-minus-u" => Ok(FactorMapping::OneMinusU),
        "pareto-inverse" => Ok(FactorMapping::ParetoInverse),
        "clayton-tau-inverse" => Ok(FactorMapping::ClaytonTauInverse),
        "exp-inverse" => {
            let rate = take(0, "exp-inverse rate", Ok(1.0))?;
            Ok(FactorMapping::ExpInverse { rate })
        }
        "exp-decay" => {
            let b0 = take(0, "exp-decay intercept", Ok(0.5))?;
            let b1 = take(1, "exp-decay slope", Ok(0.5))?;
            Ok(FactorMapping::ExpDecay { b0, b1 })
        }
        other => Err(perr(spec.line, format!("unknown mapping kind '{other}'"))),
    }
}

/// Parse a model-spec file into a model, or a fit template when the text
/// contains `free` markers.
pub fn parse_model_spec(text: &str) -> Result<ParsedSpec> {
    let sections = split_sections(text)?;
    for name in sections.keys() {
        let known = name == "model"
            || name == "inner"
            || name
                .strip_prefix("linking.")
                .is_some_and(|j| j.parse::<usize>().is_ok());
        if !known {
            return Err(perr(sections[name].line, format!("unknown section '[{name}]'")));
        }
    }

    let model_sec = sections
        .get("model")
        .ok_or_else(|| perr(1, "missing [model] section"))?;
    model_sec.forbid_unknown(&["dimension", "layers"])?;
    let (dl, dv) = model_sec.require("dimension")?;
    let d = parse_usize(*dl, dv, "dimension")?;
    let (ll, lv) = model_sec.require("layers")?;
    let w = parse_usize(*ll, lv, "layers")?;
    if d < 2 {
        return Err(perr(*dl, format!("dimension must be at least 2, got {d}")));
    }
    if w < 1 {
        return Err(perr(*ll, format!("layers must be at least 1, got {w}")));
    }

    let mut free: Vec<(ParamLoc, Option<String>)> = Vec::new();

    // Linking sections, one per layer.
    let mut linking: Vec<Vec<Bicop>> = vec![Vec::with_capacity(w); d];
    for j in 1..=w {
        let name = format!("linking.{j}");
        let sec = sections
            .get(&name)
            .ok_or_else(|| perr(model_sec.line, format!("missing [{name}] section")))?;
        sec.forbid_unknown(&["families", "params", "taus"])?;
        let (fl, fv) = sec.require("families")?;
        let names = parse_names(fv);
        if names.len() != d {
            return Err(perr(*fl, format!("expected {d} families, got {}", names.len())));
        }
        let families = names
            .iter()
            .map(|n| BicopFamily::parse(n).map_err(|e| perr(*fl, e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        let (values_line, entries, is_tau) = match (sec.get("params"), sec.get("taus")) {
            (Some((pl, pv)), None) => (*pl, parse_entries(*pl, pv)?, false),
            (None, Some((tl, tv))) => (*tl, parse_entries(*tl, tv)?, true),
            (Some((pl, _)), Some(_)) => {
                return Err(perr(*pl, "give exactly one of 'params' and 'taus', not both"));
            }
            (None, None) => {
                return Err(perr(sec.line, "missing key 'params' or 'taus' in this section"));
            }
        };
        if entries.len() != d {
            return Err(perr(
                values_line,
                format!("expected {d} values, got {}", entries.len()),
            ));
        }
        for (i, (family, entry)) in families.iter().zip(entries).enumerate() {
            let copula = match (family.has_parameter(), entry) {
                (false, Entry::Dash) => Bicop::new(*family, 0.0),
                (false, _) => Err(perr(
                    values_line,
                    format!("family {} takes no parameter; write '-'", family.name()),
                )),
                (true, Entry::Dash) => Err(perr(
                    values_line,
                    format!("family {} needs a value, 'free', or 'free:tag'", family.name()),
                )),
                (true, Entry::Num(v)) => {
                    if is_tau {
                        Bicop::from_tau(*family, v)
                    } else {
                        Bicop::new(*family, v)
                    }
                }
                (true, Entry::Free(tag)) => {
                    free.push((ParamLoc::Linking { var: i, layer: j - 1 }, tag));
                    Bicop::from_tau(*family, FREE_INIT_TAU)
                }
            }
            .map_err(|e| match e {
                FcError::Parse { .. } => e,
                other => perr(values_line, format!("variable {}: {other}", i + 1)),
            })?;
            linking[i].push(copula);
        }
    }

    // Inner section.
    let inner_sec = sections
        .get("inner")
        .ok_or_else(|| perr(model_sec.line, "missing [inner] section"))?;
    inner_sec.forbid_unknown(&["family", "mapping", "mapping_params", "factor_law", "factor_param"])?;
    let (faml, famv) = inner_sec.require("family")?;
    let family = parse_inner_family(*faml, famv, d)?;
    let n_params = family.n_params(d);

    let mapping_specs: Vec<MappingSpec> = match inner_sec.get("mapping") {
        Some((ml, mv)) => parse_names(mv)
            .into_iter()
            .map(|kind| MappingSpec { kind, line: *ml })
            .collect(),
        None => Vec::new(),
    };
    if mapping_specs.len() != n_params {
        let line = inner_sec.get("mapping").map_or(inner_sec.line, |(l, _)| *l);
        return Err(perr(
            line,
            format!(
                "inner family {} takes {n_params} mapping(s), got {}",
                family.name(),
                mapping_specs.len()
            ),
        ));
    }
    let (scalars_line, scalar_entries) = match inner_sec.get("mapping_params") {
        Some((sl, sv)) => (*sl, parse_entries(*sl, sv)?),
        None => (inner_sec.line, Vec::new()),
    };
    let mut scalars = scalar_entries.into_iter();
    let mut mappings = Vec::with_capacity(n_params);
    for (m_idx, spec) in mapping_specs.iter().enumerate() {
        mappings.push(build_mapping(spec, m_idx, &family, &mut scalars, scalars_line, &mut free)?);
    }
    if scalars.next().is_some() {
        return Err(perr(scalars_line, "mapping_params list has more values than the mappings take"));
    }

    let factor_law = match inner_sec.get("factor_law") {
        None => FactorLaw::Uniform,
        Some((ll, lv)) => match lv.trim() {
            "uniform" => FactorLaw::Uniform,
            "pareto" => FactorLaw::Pareto,
            "exponential" => {
                let (pl, pv) = inner_sec.require("factor_param")?;
                match parse_entry(*pl, pv)? {
                    Entry::Num(rate) => FactorLaw::Exponential(rate),
                    Entry::Free(tag) => {
                        free.push((ParamLoc::FactorRate, tag));
                        FactorLaw::Exponential(1.0)
                    }
                    Entry::Dash => {
                        return Err(perr(*pl, "factor_param must be a number or 'free'"));
                    }
                }
            }
            other => return Err(perr(*ll, format!("unknown factor law '{other}'"))),
        },
    };
    if !matches!(factor_law, FactorLaw::Exponential(_)) {
        if let Some((pl, _)) = inner_sec.get("factor_param") {
            return Err(perr(*pl, "factor_param is only valid with factor_law = exponential"));
        }
    }

    let inner = InnerCopula::new(d, family, mappings, factor_law)
        .map_err(|e| perr(inner_sec.line, e.to_string()))?;
    let model = FactorModel::new(linking, inner)
        .map_err(|e| perr(model_sec.line, e.to_string()))?;
    if free.is_empty() {
        Ok(ParsedSpec::Model(model))
    } else {
        let template = FitTemplate::new(model, free)
            .map_err(|e| perr(model_sec.line, e.to_string()))?;
        Ok(ParsedSpec::Template(template))
    }
}

fn mapping_kind_name(mapping: &FactorMapping) -> Result<&'static str> {
    match mapping {
        FactorMapping::Constant(_) => Ok("constant"),
        FactorMapping::OneMinusU => Ok("one-minus-u"),
        FactorMapping::ParetoInverse => Ok("pareto-inverse"),
        FactorMapping::ClaytonTauInverse => Ok("clayton-tau-inverse"),
        FactorMapping::ExpInverse { .. } => Ok("exp-inverse"),
        FactorMapping::ExpDecay { .. } => Ok("exp-decay"),
        FactorMapping::UserTable(_) => Err(FcError::Unsupported(
            "table mappings have no text form; build them programmatically".into(),
        )),
    }
}

fn mapping_scalars(mapping: &FactorMapping) -> Vec<f64> {
    match mapping {
        FactorMapping::Constant(b) => vec![*b],
        FactorMapping::ExpInverse { rate } => vec![*rate],
        FactorMapping::ExpDecay { b0, b1 } => vec![*b0, *b1],
        _ => Vec::new(),
    }
}

/// Render a model in the text format; `parse_model_spec` restores it
/// exactly (numbers print in shortest round-trip form).
pub fn print_model_spec(model: &FactorModel) -> Result<String> {
    let mut out = String::new();
    let d = model.d();
    let w = model.w();
    let _ = writeln!(out, "[model]");
    let _ = writeln!(out, "dimension = {d}");
    let _ = writeln!(out, "layers = {w}");
    let inner = model.inner();
    let _ = writeln!(out, "\n[inner]");
    match inner.family() {
        InnerFamily::CVine(pairs) => {
            let names: Vec<&str> = pairs.iter().map(|f| f.name()).collect();
            let _ = writeln!(out, "family = cvine({})", names.join(", "));
        }
        fam => {
            let _ = writeln!(out, "family = {}", fam.name());
        }
    }
    if !inner.mappings().is_empty() {
        let kinds = inner
            .mappings()
            .iter()
            .map(mapping_kind_name)
            .collect::<Result<Vec<_>>>()?;
        let _ = writeln!(out, "mapping = {}", kinds.join(", "));
        let scalars: Vec<String> = inner
            .mappings()
            .iter()
            .flat_map(mapping_scalars)
            .map(|v| v.to_string())
            .collect();
        if !scalars.is_empty() {
            let _ = writeln!(out, "mapping_params = {}", scalars.join(", "));
        }
    }
    let _ = writeln!(out, "factor_law = {}", inner.factor_law().name());
    if let FactorLaw::Exponential(rate) = inner.factor_law() {
        let _ = writeln!(out, "factor_param = {rate}");
    }
    for j in 0..w {
        let _ = writeln!(out, "\n[linking.{}]", j + 1);
        let families: Vec<&str> = (0..d)
            .map(|i| model.linking()[i][j].family().name())
            .collect();
        let _ = writeln!(out, "families = {}", families.join(", "));
        let params: Vec<String> = (0..d)
            .map(|i| {
                let c = &model.linking()[i][j];
                if c.family().has_parameter() {
                    c.theta().to_string()
                } else {
                    "-".to_string()
                }
            })
            .collect();
        let _ = writeln!(out, "params = {}", params.join(", "));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::innercop::MonotoneCubic;

    fn parse_model(text: &str) -> FactorModel {
        match parse_model_spec(text).unwrap() {
            ParsedSpec::Model(m) => m,
            ParsedSpec::Template(_) => panic!("unexpected template"),
        }
    }

    fn parse_template(text: &str) -> FitTemplate {
        match parse_model_spec(text).unwrap() {
            ParsedSpec::Model(_) => panic!("expected a template"),
            ParsedSpec::Template(t) => t,
        }
    }

    fn parse_line_error(text: &str) -> (usize, String) {
        match parse_model_spec(text).unwrap_err() {
            FcError::Parse { line, msg } => (line, msg),
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn parses_a_hierarchical_layout() {
        // Three layers over four variables: the first two variables keep
        // their own block factor, the others pass through independently.
        let text = "\
[model]
dimension = 4
layers = 3

[inner]
family = frank
mapping = constant
mapping_params = 5.74

[linking.1]
families = frank, frank, indep, indep
params = 6.73, 6.73, -, -

[linking.2]
families = indep, indep, frank, frank
params = -, -, 6.73, 6.73

[linking.3]
families = indep, indep, indep, indep
params = -, -, -, -
";
        let model = parse_model(text);
        assert_eq!(model.d(), 4);
        assert_eq!(model.w(), 3);
        assert_eq!(model.linking()[0][0].family(), BicopFamily::Frank);
        assert_eq!(model.linking()[2][0].family(), BicopFamily::Independence);
        assert_eq!(model.linking()[2][1].theta(), 6.73);
        assert_eq!(model.inner().family(), &InnerFamily::Frank);
    }

    #[test]
    fn taus_convert_to_parameters() {
        let text = "\
[model]
dimension = 2
layers = 1

[inner]
family = indep

[linking.1]
families = clayton, clayton
taus = 0.5, 0.5
";
        let model = parse_model(text);
        assert!((model.linking()[0][0].theta() - 2.0).abs() < 1e-12);
        assert!((model.linking()[1][0].theta() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn free_markers_build_a_template_with_ties() {
        let text = "\
[model]
dimension = 3
layers = 1

[inner]
family = gaussian-ex
mapping = constant
mapping_params = free

[linking.1]
families = clayton, clayton, frank
taus = free:block, free:block, 0.4
";
        let template = parse_template(text);
        assert_eq!(template.n_free(), 2);
        // Tied Clayton pair first (file order), then the inner parameter.
        assert_eq!(template.free()[0].locs.len(), 2);
        assert_eq!(template.free()[1].locs.len(), 1);
        let base = template.base();
        assert!((base.linking()[0][0].tau() - FREE_INIT_TAU).abs() < 1e-9);
        assert_eq!(base.linking()[2][0].theta(), theta_of_tau(BicopFamily::Frank, 0.4).unwrap());
    }

    #[test]
    fn roundtrips_representative_models() {
        let texts = [
            "\
[model]
dimension = 2
layers = 1

[inner]
family = frank
mapping = clayton-tau-inverse
factor_law = uniform

[linking.1]
families = gaussian, fgm
params = 0.55, -0.3
",
            "\
[model]
dimension = 3
layers = 2

[inner]
family = cvine(frank, clayton)
mapping = constant, exp-inverse
mapping_params = 4.5, 2.25
factor_law = exponential
factor_param = 1.5

[linking.1]
families = frechet-upper, plackett, amh
params = -, 3.5, 0.25

[linking.2]
families = indep, mardia, gumbel
params = -, 0.5, 1.75
",
            "\
[model]
dimension = 2
layers = 1

[inner]
family = clayton
mapping = exp-decay
mapping_params = 0.25, 1.3
factor_law = pareto

[linking.1]
families = frank, frank
params = 5, 5
",
        ];
        for text in texts {
            let model = parse_model(text);
            let printed = print_model_spec(&model).unwrap();
            let reparsed = parse_model(&printed);
            assert_eq!(model, reparsed, "round-trip failed for:\n{printed}");
        }
    }

    #[test]
    fn rejects_malformed_input_with_line_numbers() {
        // Missing families key inside [linking.1].
        let (line, msg) = parse_line_error(
            "[model]\ndimension = 2\nlayers = 1\n\n[inner]\nfamily = indep\n\n[linking.1]\nparams = 1, 1\n",
        );
        assert_eq!(line, 8);
        assert!(msg.contains("families"), "message: {msg}");

        // Unknown key.
        let (line, msg) = parse_line_error(
            "[model]\ndimension = 2\nlayers = 1\nextra = 1\n\n[inner]\nfamily = indep\n\n[linking.1]\nfamilies = indep, indep\nparams = -, -\n",
        );
        assert_eq!(line, 4);
        assert!(msg.contains("unknown key"), "message: {msg}");

        // Both params and taus.
        let text = "\
[model]
dimension = 2
layers = 1

[inner]
family = indep

[linking.1]
families = clayton, clayton
params = 1, 1
taus = 0.3, 0.3
";
        let (line, msg) = parse_line_error(text);
        assert_eq!(line, 10);
        assert!(msg.contains("exactly one"), "message: {msg}");

        // Wrong list length.
        let (_, msg) = parse_line_error(
            "[model]\ndimension = 3\nlayers = 1\n\n[inner]\nfamily = indep\n\n[linking.1]\nfamilies = clayton, clayton\nparams = 1, 1\n",
        );
        assert!(msg.contains("expected 3 families"), "message: {msg}");

        // Unparseable number with its line.
        let (line, _) = parse_line_error(
            "[model]\ndimension = 2\nlayers = 1\n\n[inner]\nfamily = indep\n\n[linking.1]\nfamilies = clayton, clayton\nparams = 1, oops\n",
        );
        assert_eq!(line, 10);

        // Unknown section.
        let (_, msg) = parse_line_error(
            "[model]\ndimension = 2\nlayers = 1\n\n[extra]\nkey = 1\n\n[inner]\nfamily = indep\n\n[linking.1]\nfamilies = indep, indep\nparams = -, -\n",
        );
        assert!(msg.contains("unknown section"), "message: {msg}");

        // Domain violation reported with the offending variable.
        let (_, msg) = parse_line_error(
            "[model]\ndimension = 2\nlayers = 1\n\n[inner]\nfamily = indep\n\n[linking.1]\nfamilies = gumbel, gumbel\nparams = 0.5, 2\n",
        );
        assert!(msg.contains("variable 1"), "message: {msg}");
    }

    #[test]
    fn rejects_misplaced_factor_param_and_short_scalar_lists() {
        let (_, msg) = parse_line_error(
            "[model]\ndimension = 2\nlayers = 1\n\n[inner]\nfamily = indep\nfactor_param = 2\n\n[linking.1]\nfamilies = indep, indep\nparams = -, -\n",
        );
        assert!(msg.contains("factor_param"), "message: {msg}");

        let (_, msg) = parse_line_error(
            "[model]\ndimension = 2\nlayers = 1\n\n[inner]\nfamily = clayton\nmapping = exp-decay\nmapping_params = 0.5\n\n[linking.1]\nfamilies = indep, indep\nparams = -, -\n",
        );
        assert!(msg.contains("too short"), "message: {msg}");
    }

    #[test]
    fn comments_and_spacing_are_ignored() {
        let text = "\
# a model with noise around it
[model]
dimension   =   2   # inline comment
layers = 1

[inner]
family = indep

[linking.1]
families = clayton , clayton
taus = 0.5,0.5
";
        let model = parse_model(text);
        assert_eq!(model.d(), 2);
        assert!((model.linking()[1][0].theta() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn table_mappings_have_no_text_form() {
        let cubic = MonotoneCubic::new(
            vec![0.0, 0.5, 1.0],
            vec![1.0, 2.0, 4.0],
        )
        .unwrap();
        let inner = InnerCopula::new(
            2,
            InnerFamily::Frank,
            vec![FactorMapping::UserTable(cubic)],
            FactorLaw::Uniform,
        )
        .unwrap();
        let model = FactorModel::new(
            vec![vec![Bicop::independence()], vec![Bicop::independence()]],
            inner,
        )
        .unwrap();
        assert!(matches!(print_model_spec(&model), Err(FcError::Unsupported(_))));
    }
}
