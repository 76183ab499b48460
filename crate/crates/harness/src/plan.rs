//! Experiment plans: a flat `key = value` file with `[model]`, `[run]` and
//! `[noise]` sections.
//!
//! ```text
//! [model]
//! problem = ginzburg_landau46
//! a = 1
//! b = 1
//! sigma = 2
//! x0 = 1
//!
//! [run]
//! mode = weak_rel
//! horizon = 5
//! deltas = 1/16, 1/32, 1/64, 1/128
//! schemes = dnd, tamed_euler, balanced
//! samples = 100000
//!
//! [noise]
//! seed = 7
//! ```
//!
//! Defaults:
//!
//! | key | default |
//! |---|---|
//! | `rotation41`: `b`, `sigma`, `eps` | −4, 8, 8 |
//! | `ginzburg_landau46`: `a`, `b`, `sigma` | 1, 1, 2 |
//! | `nonlinear_rot47`: `a`, `b` | 6, 3 |
//! | `x0` | (1, 2) for `rotation41`, 1 for `ginzburg_landau46`, (4, 2) for the other two problems; required for `bilinear` |
//! | `mode` | `weak_abs` |
//! | `schemes` | `dnd` |
//! | `samples` | 100000 |
//! | `functional`, `component` | `log1p_sq`, 1 |
//! | `alpha` | `default` |
//! | `output` | `out` |
//! | `reference` | `quadrature` for `rotation41`, `backward_euler` otherwise; `none` for `strong` and `stability_trace` unless the model is `rotation41` |
//! | `reference_samples` | `samples` |
//! | `reference_delta` | 1/2048 |
//! | `law` | `uniform_sqrt3` for `ginzburg_landau46`, `gaussian` otherwise |
//! | `seed` | 1 |
//! | `reference_law` | `two_point` for a `backward_euler` reference, `gaussian` otherwise |
//!
//! `horizon`, `deltas` and `reference_delta` take dyadic rationals
//! (`5`, `1/16`, `0.0625`, `2^-4`), so that `T/Δ` is checked exactly.
//! `render_plan` writes every key, and `parse_plan(render_plan(p)) == p`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use dnd_sde_core::dnd::alpha_default;
use dnd_sde_core::{make_test_problem, BilinearModel, Functional, NoiseLaw, NoiseSpec, SchemeId, TestProblemId};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct PlanError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for PlanError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(key) = &self.key {
            write!(f, "`{key}`: ")?;
        }
        f.write_str(&self.message)
    }
}

impl PlanError {
    fn new(line: Option<usize>, key: Option<&str>, message: impl Into<String>) -> Self {
        Self {
            line,
            key: key.map(str::to_owned),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Problem(TestProblemId),
    /// `dim × dim` row-major matrices.
    Bilinear { dim: usize, drift: Vec<f64>, diffusions: Vec<Vec<f64>> },
}

impl ModelSpec {
    pub fn dim(&self) -> usize {
        match self {
            Self::Problem(TestProblemId::GinzburgLandau46 { .. }) => 1,
            Self::Problem(_) => 2,
            Self::Bilinear { dim, .. } => *dim,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Problem(id) => id.name(),
            Self::Bilinear { .. } => "bilinear",
        }
    }

    pub fn is_rotation(&self) -> bool {
        matches!(self, Self::Problem(TestProblemId::Rotation41 { .. }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    WeakAbs,
    WeakRel,
    Strong,
    StabilityTrace,
}

impl Mode {
    const ALL: [Mode; 4] = [Mode::WeakAbs, Mode::WeakRel, Mode::Strong, Mode::StabilityTrace];

    pub fn name(&self) -> &'static str {
        match self {
            Self::WeakAbs => "weak_abs",
            Self::WeakRel => "weak_rel",
            Self::Strong => "strong",
            Self::StabilityTrace => "stability_trace",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaChoice {
    Default,
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceChoice {
    None,
    /// Deterministic quadrature of the exact law (rotation41 only).
    Quadrature,
    /// Monte Carlo over the exact solution (rotation41 only).
    Exact,
    BackwardEuler,
    Dnd,
}

impl ReferenceChoice {
    const ALL: [ReferenceChoice; 5] = [
        ReferenceChoice::None,
        ReferenceChoice::Quadrature,
        ReferenceChoice::Exact,
        ReferenceChoice::BackwardEuler,
        ReferenceChoice::Dnd,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Quadrature => "quadrature",
            Self::Exact => "exact",
            Self::BackwardEuler => "backward_euler",
            Self::Dnd => "dnd",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub model: ModelSpec,
    pub x0: Vec<f64>,
    pub horizon: f64,
    pub deltas: Vec<f64>,
    pub schemes: Vec<SchemeId>,
    pub noise: NoiseSpec,
    pub samples: u64,
    pub functional: Functional,
    pub mode: Mode,
    pub alpha: AlphaChoice,
    pub output: PathBuf,
    pub reference: ReferenceChoice,
    pub reference_samples: u64,
    pub reference_delta: f64,
    pub reference_law: NoiseLaw,
}

pub const DEFAULT_SAMPLES: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_REFERENCE_DELTA: f64 = 1.0 / 2048.0;

/// Largest power of two allowed in a dyadic denominator.
const MAX_DYADIC_EXP: i32 = 40;

const SCHEMES: [SchemeId; 6] = [
    SchemeId::Dnd,
    SchemeId::EulerMaruyama,
    SchemeId::BackwardEuler {
        tol: dnd_sde_core::baselines::NEWTON_TOL,
        max_iter: dnd_sde_core::baselines::NEWTON_MAX_ITER,
    },
    SchemeId::Balanced,
    SchemeId::SRock {
        stages: dnd_sde_core::baselines::SROCK_STAGES,
        damping: dnd_sde_core::baselines::SROCK_DAMPING,
    },
    SchemeId::TamedEuler,
];

const LAWS: [NoiseLaw; 3] = [NoiseLaw::Gaussian, NoiseLaw::TwoPoint, NoiseLaw::UniformSqrt3];

pub fn scheme_by_name(name: &str) -> Option<SchemeId> {
    SCHEMES.into_iter().find(|s| s.name() == name)
}

pub fn law_by_name(name: &str) -> Option<NoiseLaw> {
    LAWS.into_iter().find(|l| l.name() == name)
}

pub fn functional_label(f: Functional) -> String {
    format!("{}_x{}", f.name(), f.coord() + 1)
}

/// `k / 2^j` with `j ≤ 40`, exactly.
fn dyadic_parts(x: f64) -> Option<(i128, i32)> {
    if !x.is_finite() {
        return None;
    }
    for j in 0..=MAX_DYADIC_EXP {
        let scaled = x * f64::powi(2.0, j);
        if scaled.fract() == 0.0 && scaled.abs() < 2f64.powi(100) {
            return Some((scaled as i128, j));
        }
    }
    None
}

pub fn format_dyadic(x: f64) -> String {
    match dyadic_parts(x) {
        Some((k, 0)) => format!("{k}"),
        Some((k, j)) => format!("{k}/{}", 1i128 << j),
        None => format!("{x}"),
    }
}

/// `n/m`, `2^k`, `2^-k` or a decimal; the value must be dyadic.
pub fn parse_dyadic(text: &str) -> Result<f64, String> {
    let text = text.trim();
    let value = if let Some((num, den)) = text.split_once('/') {
        let num: f64 = num.trim().parse().map_err(|_| format!("`{text}` is not a number"))?;
        let den: u64 = den.trim().parse().map_err(|_| format!("`{text}` has an invalid denominator"))?;
        if !den.is_power_of_two() {
            return Err(format!("`{text}`: denominator must be a power of two"));
        }
        num / den as f64
    } else if let Some(exp) = text.strip_prefix("2^") {
        let exp: i32 = exp.trim().parse().map_err(|_| format!("`{text}` has an invalid exponent"))?;
        if exp.abs() > MAX_DYADIC_EXP {
            return Err(format!("`{text}`: exponent out of range"));
        }
        2f64.powi(exp)
    } else {
        text.parse().map_err(|_| format!("`{text}` is not a number"))?
    };
    if dyadic_parts(value).is_none() {
        return Err(format!("`{text}` is not a dyadic rational k/2^j with j ≤ {MAX_DYADIC_EXP}"));
    }
    Ok(value)
}

/// Whether `num / den` is a positive integer, computed exactly.
fn divides(den: f64, num: f64) -> bool {
    match (dyadic_parts(num), dyadic_parts(den)) {
        (Some((a, ja)), Some((b, jb))) if a > 0 && b > 0 => {
            let j = ja.max(jb);
            let (a, b) = (a << (j - ja), b << (j - jb));
            a % b == 0
        }
        _ => false,
    }
}

fn parse_list(text: &str) -> Vec<&str> {
    text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
}

fn render_list(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
}

struct Entry {
    line: usize,
    value: String,
}

struct Sections {
    entries: BTreeMap<(String, String), Entry>,
}

impl Sections {
    fn take(&mut self, section: &str, key: &str) -> Option<Entry> {
        self.entries.remove(&(section.to_owned(), key.to_owned()))
    }

    fn take_parsed<T>(
        &mut self,
        section: &str,
        key: &str,
        parse: impl FnOnce(&str) -> Result<T, String>,
    ) -> Result<Option<T>, PlanError> {
        match self.take(section, key) {
            None => Ok(None),
            Some(e) => parse(&e.value)
                .map(Some)
                .map_err(|m| PlanError::new(Some(e.line), Some(key), m)),
        }
    }

    fn take_f64(&mut self, section: &str, key: &str, default: f64) -> Result<f64, PlanError> {
        Ok(self.take_parsed(section, key, parse_real)?.unwrap_or(default))
    }
}

fn parse_real(text: &str) -> Result<f64, String> {
    let v: f64 = text.parse().map_err(|_| format!("`{text}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{text}` must be finite"))
    }
}

fn parse_reals(text: &str) -> Result<Vec<f64>, String> {
    parse_list(text).into_iter().map(parse_real).collect()
}

fn parse_count(text: &str) -> Result<u64, String> {
    text.replace('_', "").parse().map_err(|_| format!("`{text}` is not a nonnegative integer"))
}

fn tokenize(text: &str) -> Result<Sections, PlanError> {
    let mut entries = BTreeMap::new();
    let mut section: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap().trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| PlanError::new(Some(line), None, "unterminated section header"))?
                .trim();
            if !["model", "run", "noise"].contains(&name) {
                return Err(PlanError::new(
                    Some(line),
                    None,
                    format!("unknown section [{name}]; expected [model], [run] or [noise]"),
                ));
            }
            section = Some(name.to_owned());
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| PlanError::new(Some(line), None, "expected `key = value`"))?;
        let key = key.trim();
        let sec = section
            .clone()
            .ok_or_else(|| PlanError::new(Some(line), Some(key), "key outside of a section"))?;
        let slot = (sec, key.to_owned());
        if let Some(prev) = entries.get(&slot) {
            let prev: &Entry = prev;
            return Err(PlanError::new(
                Some(line),
                Some(key),
                format!("duplicate key (first set on line {})", prev.line),
            ));
        }
        entries.insert(
            slot,
            Entry {
                line,
                value: value.trim().to_owned(),
            },
        );
    }
    Ok(Sections { entries })
}

fn parse_model(s: &mut Sections) -> Result<ModelSpec, PlanError> {
    let problem = s
        .take("model", "problem")
        .ok_or_else(|| PlanError::new(None, Some("problem"), "missing required key in [model]"))?;
    let spec = match problem.value.as_str() {
        "rotation41" => ModelSpec::Problem(TestProblemId::Rotation41 {
            b: s.take_f64("model", "b", -4.0)?,
            sigma: s.take_f64("model", "sigma", 8.0)?,
            eps: s.take_f64("model", "eps", 8.0)?,
        }),
        "ginzburg_landau46" => ModelSpec::Problem(TestProblemId::GinzburgLandau46 {
            a: s.take_f64("model", "a", 1.0)?,
            b: s.take_f64("model", "b", 1.0)?,
            sigma: s.take_f64("model", "sigma", 2.0)?,
        }),
        "nonlinear_rot47" => ModelSpec::Problem(TestProblemId::NonlinearRot47 {
            a: s.take_f64("model", "a", 6.0)?,
            b: s.take_f64("model", "b", 3.0)?,
        }),
        "shifted48" => ModelSpec::Problem(TestProblemId::Shifted48),
        "bilinear" => {
            let missing = |key: &str| PlanError::new(Some(problem.line), Some(key), "required for a bilinear model");
            let dim = s
                .take_parsed("model", "dim", parse_count)?
                .ok_or_else(|| missing("dim"))? as usize;
            let drift = s.take_parsed("model", "drift", parse_reals)?.ok_or_else(|| missing("drift"))?;
            let diffusion = s.take("model", "diffusion").ok_or_else(|| missing("diffusion"))?;
            let diffusions = diffusion
                .value
                .split('|')
                .map(parse_reals)
                .collect::<Result<Vec<_>, _>>()
                .map_err(|m| PlanError::new(Some(diffusion.line), Some("diffusion"), m))?;
            if let Err(e) = BilinearModel::new(dim, drift.clone(), diffusions.clone()) {
                return Err(PlanError::new(Some(problem.line), Some("problem"), e.to_string()));
            }
            ModelSpec::Bilinear { dim, drift, diffusions }
        }
        other => {
            return Err(PlanError::new(
                Some(problem.line),
                Some("problem"),
                format!(
                    "unknown problem `{other}`; expected rotation41, ginzburg_landau46, nonlinear_rot47, shifted48 or bilinear"
                ),
            ))
        }
    };
    if let ModelSpec::Problem(id) = spec {
        make_test_problem(id).map_err(|e| PlanError::new(Some(problem.line), Some("problem"), e.to_string()))?;
    }
    Ok(spec)
}

fn default_x0(model: &ModelSpec) -> Option<Vec<f64>> {
    match model {
        ModelSpec::Problem(TestProblemId::Rotation41 { .. }) => Some(vec![1.0, 2.0]),
        ModelSpec::Problem(TestProblemId::GinzburgLandau46 { .. }) => Some(vec![1.0]),
        ModelSpec::Problem(_) => Some(vec![4.0, 2.0]),
        ModelSpec::Bilinear { .. } => None,
    }
}

fn default_reference(model: &ModelSpec, mode: Mode) -> ReferenceChoice {
    match (model.is_rotation(), mode) {
        (true, Mode::Strong) => ReferenceChoice::None,
        (true, _) => ReferenceChoice::Quadrature,
        (false, Mode::WeakAbs | Mode::WeakRel) => ReferenceChoice::BackwardEuler,
        (false, _) => ReferenceChoice::None,
    }
}

fn default_law(model: &ModelSpec) -> NoiseLaw {
    match model {
        ModelSpec::Problem(TestProblemId::GinzburgLandau46 { .. }) => NoiseLaw::UniformSqrt3,
        _ => NoiseLaw::Gaussian,
    }
}

/// Parses and validates a plan, filling in defaults.
pub fn parse_plan(text: &str) -> Result<ExperimentPlan, PlanError> {
    let mut s = tokenize(text)?;
    let lines: BTreeMap<String, usize> = s.entries.iter().map(|((_, k), e)| (k.clone(), e.line)).collect();
    let model = parse_model(&mut s)?;
    let x0 = match s.take_parsed("model", "x0", parse_reals)? {
        Some(x0) => x0,
        None => default_x0(&model).ok_or_else(|| PlanError::new(None, Some("x0"), "required for a bilinear model"))?,
    };

    let mode = s
        .take_parsed("run", "mode", |v| {
            Mode::ALL
                .into_iter()
                .find(|m| m.name() == v)
                .ok_or_else(|| format!("unknown mode `{v}`; expected weak_abs, weak_rel, strong or stability_trace"))
        })?
        .unwrap_or(Mode::WeakAbs);
    let horizon = s
        .take_parsed("run", "horizon", parse_dyadic)?
        .ok_or_else(|| PlanError::new(None, Some("horizon"), "missing required key in [run]"))?;
    let deltas = s
        .take_parsed("run", "deltas", |v| parse_list(v).into_iter().map(parse_dyadic).collect())?
        .ok_or_else(|| PlanError::new(None, Some("deltas"), "missing required key in [run]"))?;
    let schemes = s
        .take_parsed("run", "schemes", |v| {
            parse_list(v)
                .into_iter()
                .map(|name| {
                    scheme_by_name(name).ok_or_else(|| {
                        format!(
                            "unknown scheme `{name}`; expected dnd, euler_maruyama, backward_euler, balanced, srock or tamed_euler"
                        )
                    })
                })
                .collect()
        })?
        .unwrap_or_else(|| vec![SchemeId::Dnd]);
    let samples = s.take_parsed("run", "samples", parse_count)?.unwrap_or(DEFAULT_SAMPLES);
    let kind = s.take_parsed("run", "functional", |v| match v {
        "log1p_sq" | "atan1p_sq" => Ok(v.to_owned()),
        _ => Err(format!("unknown functional `{v}`; expected log1p_sq or atan1p_sq")),
    })?;
    let component_entry = s.take("run", "component");
    let component = match &component_entry {
        None => 1,
        Some(e) => parse_count(&e.value).map_err(|m| PlanError::new(Some(e.line), Some("component"), m))? as usize,
    };
    if component == 0 || component > model.dim() {
        return Err(PlanError::new(
            component_entry.map(|e| e.line),
            Some("component"),
            format!("must be between 1 and the dimension {}", model.dim()),
        ));
    }
    let functional = match kind.as_deref() {
        Some("atan1p_sq") => Functional::Atan1pSq { coord: component - 1 },
        _ => Functional::Log1pSq { coord: component - 1 },
    };
    let alpha = s
        .take_parsed("run", "alpha", |v| {
            if v == "default" {
                Ok(AlphaChoice::Default)
            } else {
                parse_real(v).map(AlphaChoice::Value)
            }
        })?
        .unwrap_or(AlphaChoice::Default);
    let output = s
        .take("run", "output")
        .map(|e| PathBuf::from(e.value))
        .unwrap_or_else(|| PathBuf::from("out"));
    let reference = s
        .take_parsed("run", "reference", |v| {
            if v == "auto" {
                return Ok(None);
            }
            ReferenceChoice::ALL.into_iter().find(|r| r.name() == v).map(Some).ok_or_else(|| {
                format!("unknown reference `{v}`; expected auto, none, quadrature, exact, backward_euler or dnd")
            })
        })?
        .flatten()
        .unwrap_or_else(|| default_reference(&model, mode));
    let reference_samples = s.take_parsed("run", "reference_samples", parse_count)?.unwrap_or(samples);
    let reference_delta = s
        .take_parsed("run", "reference_delta", parse_dyadic)?
        .unwrap_or(DEFAULT_REFERENCE_DELTA);

    let law = s
        .take_parsed("noise", "law", |v| {
            law_by_name(v).ok_or_else(|| format!("unknown law `{v}`; expected gaussian, two_point or uniform_sqrt3"))
        })?
        .unwrap_or_else(|| default_law(&model));
    let seed = s.take_parsed("noise", "seed", parse_count)?.unwrap_or(DEFAULT_SEED);
    let reference_law = s
        .take_parsed("noise", "reference_law", |v| {
            law_by_name(v).ok_or_else(|| format!("unknown law `{v}`; expected gaussian, two_point or uniform_sqrt3"))
        })?
        .unwrap_or(if reference == ReferenceChoice::BackwardEuler {
            NoiseLaw::TwoPoint
        } else {
            NoiseLaw::Gaussian
        });

    if let Some(((section, key), e)) = s.entries.into_iter().next() {
        return Err(PlanError::new(
            Some(e.line),
            Some(&key),
            format!("unknown key in [{section}] for this problem"),
        ));
    }

    let plan = ExperimentPlan {
        model,
        x0,
        horizon,
        deltas,
        schemes,
        noise: NoiseSpec::new(law, seed),
        samples,
        functional,
        mode,
        alpha,
        output,
        reference,
        reference_samples,
        reference_delta,
        reference_law,
    };
    validate(&plan).map_err(|mut e| {
        if e.line.is_none() {
            e.line = e.key.as_ref().and_then(|k| lines.get(k).copied());
        }
        e
    })?;
    Ok(plan)
}

/// Checks the plan invariants.
pub fn validate(plan: &ExperimentPlan) -> Result<(), PlanError> {
    let err = |key: &str, m: String| Err(PlanError::new(None, Some(key), m));
    let dim = plan.model.dim();
    if plan.x0.len() != dim {
        return err("x0", format!("has {} entries but the model dimension is {dim}", plan.x0.len()));
    }
    if plan.x0.iter().any(|v| !v.is_finite()) {
        return err("x0", "entries must be finite".into());
    }
    if plan.functional.coord() >= dim {
        return err("component", format!("must be between 1 and the dimension {dim}"));
    }
    if !(plan.horizon > 0.0) || dyadic_parts(plan.horizon).is_none() {
        return err("horizon", format!("{} must be a positive dyadic rational", plan.horizon));
    }
    if plan.deltas.is_empty() {
        return err("deltas", "at least one step size is needed".into());
    }
    for &dt in &plan.deltas {
        if !divides(dt, plan.horizon) {
            return err(
                "deltas",
                format!("{} does not divide the horizon {}", format_dyadic(dt), format_dyadic(plan.horizon)),
            );
        }
    }
    if plan.schemes.is_empty() {
        return err("schemes", "at least one scheme is needed".into());
    }
    for s in &plan.schemes {
        if let Err(m) = s.validate() {
            return err("schemes", m.into());
        }
    }
    if plan.samples == 0 {
        return err("samples", "must be at least 1".into());
    }
    if plan.reference_samples == 0 {
        return err("reference_samples", "must be at least 1".into());
    }
    if let AlphaChoice::Value(a) = plan.alpha {
        if !(a >= 0.0) || !a.is_finite() {
            return err("alpha", format!("{a} must be finite and nonnegative"));
        }
    }
    if plan.output.as_os_str().is_empty() {
        return err("output", "must not be empty".into());
    }
    match plan.mode {
        Mode::Strong => {
            if !plan.model.is_rotation() {
                return err("mode", "strong errors need the rotation41 problem and its exact solution".into());
            }
            if plan.noise.law != NoiseLaw::Gaussian {
                return err("law", "strong errors need gaussian noise".into());
            }
        }
        Mode::WeakAbs | Mode::WeakRel => {
            if plan.reference == ReferenceChoice::None {
                return err("reference", format!("{} needs a reference", plan.mode.name()));
            }
        }
        Mode::StabilityTrace => {}
    }
    match plan.reference {
        ReferenceChoice::Quadrature | ReferenceChoice::Exact if !plan.model.is_rotation() => {
            return err("reference", format!("{} is only available for rotation41", plan.reference.name()));
        }
        ReferenceChoice::BackwardEuler | ReferenceChoice::Dnd => {
            let dt = plan.reference_delta;
            if dt > dnd_sde_core::path::OBSERVATION_SPACING || !divides(dt, plan.horizon) {
                return err(
                    "reference_delta",
                    format!("{} must be at most 1/16 and divide the horizon", format_dyadic(dt)),
                );
            }
        }
        _ => {}
    }
    Ok(())
}

/// Writes every key, so that the output parses back to the same plan.
pub fn render_plan(plan: &ExperimentPlan) -> String {
    let mut out = String::from("[model]\n");
    let mut line = |k: &str, v: String| {
        if k.starts_with('[') {
            out.push_str(&format!("\n{k}\n"));
        } else {
            out.push_str(&format!("{k} = {v}\n"));
        }
    };
    line("problem", plan.model.name().to_owned());
    match &plan.model {
        ModelSpec::Problem(TestProblemId::Rotation41 { b, sigma, eps }) => {
            line("b", b.to_string());
            line("sigma", sigma.to_string());
            line("eps", eps.to_string());
        }
        ModelSpec::Problem(TestProblemId::GinzburgLandau46 { a, b, sigma }) => {
            line("a", a.to_string());
            line("b", b.to_string());
            line("sigma", sigma.to_string());
        }
        ModelSpec::Problem(TestProblemId::NonlinearRot47 { a, b }) => {
            line("a", a.to_string());
            line("b", b.to_string());
        }
        ModelSpec::Problem(TestProblemId::Shifted48) => {}
        ModelSpec::Bilinear { dim, drift, diffusions } => {
            line("dim", dim.to_string());
            line("drift", render_list(drift));
            line(
                "diffusion",
                diffusions.iter().map(|m| render_list(m)).collect::<Vec<_>>().join(" | "),
            );
        }
    }
    line("x0", render_list(&plan.x0));
    line("[run]", String::new());
    line("mode", plan.mode.name().to_owned());
    line("horizon", format_dyadic(plan.horizon));
    line(
        "deltas",
        plan.deltas.iter().map(|&d| format_dyadic(d)).collect::<Vec<_>>().join(", "),
    );
    line(
        "schemes",
        plan.schemes.iter().map(|s| s.name()).collect::<Vec<_>>().join(", "),
    );
    line("samples", plan.samples.to_string());
    line("functional", plan.functional.name().to_owned());
    line("component", (plan.functional.coord() + 1).to_string());
    line(
        "alpha",
        match plan.alpha {
            AlphaChoice::Default => "default".to_owned(),
            AlphaChoice::Value(a) => a.to_string(),
        },
    );
    line("output", plan.output.display().to_string());
    line("reference", plan.reference.name().to_owned());
    line("reference_samples", plan.reference_samples.to_string());
    line("reference_delta", format_dyadic(plan.reference_delta));
    line("[noise]", String::new());
    line("law", plan.noise.law.name().to_owned());
    line("seed", plan.noise.seed.to_string());
    line("reference_law", plan.reference_law.name().to_owned());
    out
}

impl ExperimentPlan {
    /// `α` for Scheme 4: the explicit value, or the model's default.
    pub fn resolved_alpha(&self) -> f64 {
        match self.alpha {
            AlphaChoice::Value(a) => a,
            AlphaChoice::Default => match &self.model {
                ModelSpec::Problem(id) => make_test_problem(*id).map(|p| alpha_default(&p)).unwrap_or(0.0),
                ModelSpec::Bilinear { .. } => 0.0,
            },
        }
    }
}
