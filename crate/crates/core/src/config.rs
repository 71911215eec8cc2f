//! Run configuration: a line-oriented `key = value` format with
//! `[section]` headers.
//!
//! ```text
//! [physical]
//! P = 12.5
//! a = 1.0
//! k = 0.0            # or current_amplitude / angular_frequency / ramp_time
//!
//! [coefficients.phase1.lambda]
//! kind = affine
//! intercept = 0.99
//! slope = 0.01
//!
//! [coefficients.phase2.c]
//! kind = tabulated
//! point = 0.0, 1.0
//! point = 1.0, 1.2
//!
//! [bounds]
//! mode = auto        # or explicit
//!
//! [solver]
//! tol = 1e-10
//!
//! [output]
//! snapshot_time = 1.0
//! ```
//!
//! `#` starts a comment. Unknown sections and keys are rejected so typos do
//! not silently fall back to defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::coefficients::{CoefficientBounds, CoefficientFamily, CoefficientSet, PhaseLaws};
use crate::error::{Error, Result};
use crate::fixed_point::PicardSettings;
use crate::interface::XiSolveSettings;
use crate::special::QuadratureSpec;
use crate::vapor::PhysicalParams;

/// How the hypothesis constants are obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundsSpec {
    /// Estimated by sampling the coefficient laws over the phase ranges;
    /// any constant given explicitly replaces the estimate.
    Auto {
        samples: usize,
        safety: f64,
        overrides: BTreeMap<String, f64>,
    },
    Explicit(CoefficientBounds),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
    /// Time at which the temperature column of the profile export is taken.
    pub snapshot_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: PhysicalParams,
    pub coefficients: CoefficientSet,
    pub bounds: BoundsSpec,
    pub picard: PicardSettings,
    pub quadrature: QuadratureSpec,
    pub xi_solve: XiSolveSettings,
    /// Samples per phase for the static hypothesis checks.
    pub check_samples: usize,
    pub output: OutputSpec,
}

#[derive(Debug)]
struct Entry {
    key: String,
    value: String,
    line: usize,
    used: bool,
}

#[derive(Debug)]
struct Section {
    name: String,
    line: usize,
    entries: Vec<Entry>,
}

fn cfg_err(field: impl Into<String>, line: Option<usize>, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        line,
        message: message.into(),
    }
}

fn parse_sections(text: &str) -> Result<Vec<Section>> {
    let mut sections: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| cfg_err(body, Some(line), "unterminated section header"))?
                .trim();
            if name.is_empty() {
                return Err(cfg_err("[]", Some(line), "empty section name"));
            }
            if sections.iter().any(|s| s.name == name) {
                return Err(cfg_err(name, Some(line), "section declared twice"));
            }
            sections.push(Section {
                name: name.to_string(),
                line,
                entries: Vec::new(),
            });
            continue;
        }
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| cfg_err(body, Some(line), "expected `key = value`"))?;
        let section = sections
            .last_mut()
            .ok_or_else(|| cfg_err(key.trim(), Some(line), "entry before any [section]"))?;
        let key = key.trim().to_string();
        if key.is_empty() {
            return Err(cfg_err(&section.name, Some(line), "empty key"));
        }
        if key != "point" && section.entries.iter().any(|e| e.key == key) {
            return Err(cfg_err(format!("{}.{key}", section.name), Some(line), "key given twice"));
        }
        section.entries.push(Entry {
            key,
            value: value.trim().to_string(),
            line,
            used: false,
        });
    }
    Ok(sections)
}

struct Reader {
    sections: Vec<Section>,
}

impl Reader {
    fn section_index(&self, name: &str) -> Option<usize> {
        self.sections.iter().position(|s| s.name == name)
    }

    fn raw(&mut self, section: &str, key: &str) -> Option<(String, usize)> {
        let s = self.section_index(section)?;
        let e = self.sections[s].entries.iter_mut().find(|e| e.key == key)?;
        e.used = true;
        Some((e.value.clone(), e.line))
    }

    fn number(&mut self, section: &str, key: &str) -> Result<Option<f64>> {
        match self.raw(section, key) {
            None => Ok(None),
            Some((v, line)) => parse_number(&v)
                .map(Some)
                .ok_or_else(|| cfg_err(format!("{section}.{key}"), Some(line), format!("not a number: `{v}`"))),
        }
    }

    fn required(&mut self, section: &str, key: &str) -> Result<f64> {
        let line = self.section_index(section).map(|i| self.sections[i].line);
        self.number(section, key)?
            .ok_or_else(|| cfg_err(format!("{section}.{key}"), line, "required value missing"))
    }

    fn or(&mut self, section: &str, key: &str, default: f64) -> Result<f64> {
        Ok(self.number(section, key)?.unwrap_or(default))
    }

    fn count(&mut self, section: &str, key: &str, default: usize) -> Result<usize> {
        match self.raw(section, key) {
            None => Ok(default),
            Some((v, line)) => v
                .parse::<usize>()
                .map_err(|_| cfg_err(format!("{section}.{key}"), Some(line), format!("not a count: `{v}`"))),
        }
    }

    fn text(&mut self, section: &str, key: &str) -> Option<(String, usize)> {
        self.raw(section, key)
    }

    fn points(&mut self, section: &str) -> Result<Vec<(f64, f64)>> {
        let Some(s) = self.section_index(section) else {
            return Ok(Vec::new());
        };
        let mut out = Vec::new();
        for e in self.sections[s].entries.iter_mut().filter(|e| e.key == "point") {
            e.used = true;
            let bad = || cfg_err(format!("{section}.point"), Some(e.line), format!("expected `theta, value`, got `{}`", e.value));
            let (t, v) = e.value.split_once(',').ok_or_else(bad)?;
            let (t, v) = (parse_number(t.trim()).ok_or_else(bad)?, parse_number(v.trim()).ok_or_else(bad)?);
            out.push((t, v));
        }
        Ok(out)
    }

    fn finish(&self) -> Result<()> {
        for s in &self.sections {
            if !KNOWN_SECTIONS.contains(&s.name.as_str()) && !s.name.starts_with("coefficients.") {
                return Err(cfg_err(&s.name, Some(s.line), "unknown section"));
            }
            if let Some(e) = s.entries.iter().find(|e| !e.used) {
                return Err(cfg_err(format!("{}.{}", s.name, e.key), Some(e.line), "unknown key"));
            }
        }
        Ok(())
    }
}

/// Default factor on sampled Lipschitz constants, which underestimate the
/// true ones.
pub const DEFAULT_SAFETY: f64 = 1.1;

const KNOWN_SECTIONS: [&str; 4] = ["physical", "bounds", "solver", "output"];

fn parse_number(s: &str) -> Option<f64> {
    let v: f64 = s.parse().ok()?;
    v.is_finite().then_some(v)
}

const PHYSICAL_KEYS: [&str; 11] = [
    "P",
    "a",
    "lambda_b",
    "L_b",
    "gamma_b",
    "theta_ion",
    "theta_b",
    "theta_m",
    "l_m",
    "gamma_m",
    "k",
];

pub const BOUND_KEYS: [&str; 13] = [
    "L_min",
    "L_max",
    "N_min",
    "N_max",
    "K_min",
    "K_max",
    "decay_rate",
    "N_lip1",
    "N_lip2",
    "L_lip1",
    "L_lip2",
    "K_lip1",
    "K_lip2",
];

fn set_bound(b: &mut CoefficientBounds, key: &str, v: f64) {
    match key {
        "L_min" => b.l_min = v,
        "L_max" => b.l_max = v,
        "N_min" => b.n_min = v,
        "N_max" => b.n_max = v,
        "K_min" => b.k_min = v,
        "K_max" => b.k_max = v,
        "decay_rate" => b.decay_rate = v,
        "N_lip1" => b.n_lip[0] = v,
        "N_lip2" => b.n_lip[1] = v,
        "L_lip1" => b.l_lip[0] = v,
        "L_lip2" => b.l_lip[1] = v,
        "K_lip1" => b.k_lip[0] = v,
        "K_lip2" => b.k_lip[1] = v,
        _ => unreachable!("unknown bound key {key}"),
    }
}

impl BoundsSpec {
    /// Applies explicit overrides on top of estimated constants.
    pub fn apply_overrides(overrides: &BTreeMap<String, f64>, b: &mut CoefficientBounds) {
        for (k, v) in overrides {
            set_bound(b, k, *v);
        }
    }
}

fn family(r: &mut Reader, section: &str, default: Option<f64>) -> Result<CoefficientFamily> {
    let Some((kind, line)) = r.text(section, "kind") else {
        if r.section_index(section).is_some() {
            return Err(cfg_err(format!("{section}.kind"), None, "required value missing"));
        }
        return match default {
            Some(v) => Ok(CoefficientFamily::Constant(v)),
            None => Err(cfg_err(section, None, "coefficient law missing")),
        };
    };
    let f = match kind.as_str() {
        "constant" => CoefficientFamily::Constant(r.required(section, "value")?),
        "affine" => CoefficientFamily::Affine {
            intercept: r.required(section, "intercept")?,
            slope: r.required(section, "slope")?,
        },
        "exponential" => CoefficientFamily::Exponential {
            scale: r.required(section, "scale")?,
            rate: r.required(section, "rate")?,
        },
        "power" => CoefficientFamily::Power {
            scale: r.required(section, "scale")?,
            exponent: r.required(section, "exponent")?,
        },
        "tabulated" => CoefficientFamily::tabulated(r.points(section)?)
            .map_err(|e| cfg_err(format!("{section}.point"), Some(line), e.to_string()))?,
        other => {
            return Err(cfg_err(
                format!("{section}.kind"),
                Some(line),
                format!("unknown kind `{other}` (constant, affine, exponential, power, tabulated)"),
            ))
        }
    };
    Ok(f)
}

fn phase_laws(r: &mut Reader, phase: usize) -> Result<PhaseLaws> {
    let s = |name: &str| format!("coefficients.phase{phase}.{name}");
    Ok(PhaseLaws {
        c: family(r, &s("c"), None)?,
        gamma: family(r, &s("gamma"), None)?,
        lambda: family(r, &s("lambda"), None)?,
        rho: family(r, &s("rho"), Some(0.0))?,
    })
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| cfg_err(path.display().to_string(), None, format!("cannot read: {e}")))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut r = Reader {
            sections: parse_sections(text)?,
        };
        for s in &r.sections {
            if let Some(rest) = s.name.strip_prefix("coefficients.") {
                let ok = matches!(
                    rest.split_once('.'),
                    Some(("phase1" | "phase2", "c" | "gamma" | "lambda" | "rho"))
                );
                if !ok {
                    return Err(cfg_err(&s.name, Some(s.line), "expected coefficients.phase<1|2>.<c|gamma|lambda|rho>"));
                }
            }
        }

        let ph = "physical";
        let k = match r.number(ph, "k")? {
            Some(k) => k,
            None => {
                let i0 = r.number(ph, "current_amplitude")?;
                let om = r.number(ph, "angular_frequency")?;
                let ta = r.number(ph, "ramp_time")?;
                match (i0, om, ta) {
                    (None, None, None) => 0.0,
                    (Some(i0), Some(om), Some(ta)) => PhysicalParams::ramp_from_current(i0, om, ta),
                    _ => {
                        return Err(cfg_err(
                            "physical.current_amplitude",
                            None,
                            "give k, or all of current_amplitude, angular_frequency, ramp_time",
                        ))
                    }
                }
            }
        };
        let params = PhysicalParams {
            p: r.required(ph, "P")?,
            a: r.required(ph, "a")?,
            lambda_b: r.required(ph, "lambda_b")?,
            l_b: r.required(ph, "L_b")?,
            gamma_b: r.required(ph, "gamma_b")?,
            theta_ion: r.required(ph, "theta_ion")?,
            theta_b: r.required(ph, "theta_b")?,
            theta_m: r.required(ph, "theta_m")?,
            l_m: r.required(ph, "l_m")?,
            gamma_m: r.required(ph, "gamma_m")?,
            k,
        };
        params
            .validate()
            .map_err(|e| cfg_err("physical", None, e.to_string()))?;

        let coefficients = CoefficientSet {
            liquid: phase_laws(&mut r, 1)?,
            solid: phase_laws(&mut r, 2)?,
            theta_m: params.theta_m,
        };

        let bs = "bounds";
        let mode = r.text(bs, "mode");
        let mut given = BTreeMap::new();
        for key in BOUND_KEYS {
            if let Some(v) = r.number(bs, key)? {
                given.insert(key.to_string(), v);
            }
        }
        let bounds = match mode.as_ref().map(|(m, l)| (m.as_str(), *l)) {
            None | Some(("auto", _)) => BoundsSpec::Auto {
                samples: r.count(bs, "samples", 257)?,
                safety: r.or(bs, "safety", DEFAULT_SAFETY)?,
                overrides: given,
            },
            Some(("explicit", line)) => {
                let mut b = CoefficientBounds::for_constants(1.0, 1.0, 0.0, params.a);
                for key in BOUND_KEYS {
                    match given.get(key) {
                        Some(v) => set_bound(&mut b, key, *v),
                        None if key.contains("lip") => set_bound(&mut b, key, 0.0),
                        None if key == "decay_rate" => {}
                        None => return Err(cfg_err(format!("bounds.{key}"), Some(line), "required in explicit mode")),
                    }
                }
                if !given.contains_key("decay_rate") {
                    b.decay_rate = b.min_decay_rate(params.a);
                }
                b.validate(params.a)
                    .map_err(|e| cfg_err("bounds", Some(line), e.to_string()))?;
                BoundsSpec::Explicit(b)
            }
            Some((other, line)) => {
                return Err(cfg_err("bounds.mode", Some(line), format!("unknown mode `{other}` (auto, explicit)")))
            }
        };

        let sv = "solver";
        let picard = PicardSettings {
            tol: r.or(sv, "tol", 1e-10)?,
            max_iter: r.count(sv, "max_iter", 200)?,
            grid_size: r.count(sv, "grid", 257)?,
        };
        picard.validate().map_err(|e| cfg_err(sv, None, e.to_string()))?;
        let quadrature = QuadratureSpec {
            rel_tol: r.or(sv, "quad_rel_tol", 1e-10)?,
            abs_tol: r.or(sv, "quad_abs_tol", 1e-14)?,
            max_depth: r.count(sv, "quad_max_depth", 50)?,
        };
        quadrature.validate().map_err(|e| cfg_err(sv, None, e.to_string()))?;
        let defaults = XiSolveSettings::default();
        let xi_solve = XiSolveSettings {
            root_tol: r.or(sv, "root_tol", defaults.root_tol)?,
            scan_points: r.count(sv, "scan_points", defaults.scan_points)?,
            scan_tol: r.or(sv, "scan_tol", defaults.scan_tol)?,
            max_refine: r.count(sv, "max_refine", defaults.max_refine)?,
        };
        if !(xi_solve.root_tol > 0.0 && xi_solve.scan_tol > 0.0) || xi_solve.scan_points < 2 {
            return Err(cfg_err(sv, None, "root_tol and scan_tol must be positive, scan_points >= 2"));
        }
        let check_samples = r.count(sv, "check_samples", 257)?;

        let out = "output";
        let output = OutputSpec {
            dir: r.text(out, "dir").map(|(d, _)| PathBuf::from(d)),
            snapshot_time: r.or(out, "snapshot_time", 1.0)?,
        };
        if !(output.snapshot_time > 0.0) {
            return Err(cfg_err("output.snapshot_time", None, "must be positive"));
        }
        r.finish()?;
        Ok(Self {
            params,
            coefficients,
            bounds,
            picard,
            quadrature,
            xi_solve,
            check_samples,
            output,
        })
    }

    /// Names accepted by [`RunConfig::with_parameter`].
    pub fn parameter_names() -> &'static [&'static str] {
        &PHYSICAL_KEYS
    }

    /// A copy with one physical constant replaced.
    pub fn with_parameter(&self, name: &str, value: f64) -> Result<Self> {
        let mut c = self.clone();
        let p = &mut c.params;
        let slot = match name {
            "P" => &mut p.p,
            "a" => &mut p.a,
            "lambda_b" => &mut p.lambda_b,
            "L_b" => &mut p.l_b,
            "gamma_b" => &mut p.gamma_b,
            "theta_ion" => &mut p.theta_ion,
            "theta_b" => &mut p.theta_b,
            "theta_m" => &mut p.theta_m,
            "l_m" => &mut p.l_m,
            "gamma_m" => &mut p.gamma_m,
            "k" => &mut p.k,
            other => {
                return Err(cfg_err(
                    other,
                    None,
                    format!("unknown sweep parameter (one of {})", PHYSICAL_KEYS.join(", ")),
                ))
            }
        };
        *slot = value;
        c.coefficients.theta_m = c.params.theta_m;
        c.params.validate()?;
        Ok(c)
    }
}
