//! Scenario files: a flat, sectioned `key = value` text format.
//!
//! ```text
//! [model]
//! n_x = 1
//! n_u = 0
//! n_y = 1
//! f1 = -x1
//! C = 1
//! x0_lower = 0
//! x0_upper = 2
//! horizon = 0, 1
//! v1_lower = -0.1
//! v1_upper = 0.1
//!
//! [truth]
//! x0 = 1
//! noise1 = 0.1*sin(10*t)
//! n_samples = 500
//!
//! [observer]
//! variant = gmac
//! gain = 0
//! ```
//!
//! Matrices are written as rows separated by `;`, entries by `,`. Lines
//! starting with `#` are comments. Parsing and [`fmt::Display`] round-trip.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use interval_observer::{
    BoundSignal, Expr, ExprError, IntegConfig, IntervalVector, LinearForm, Matrix, Method,
    SystemModel, Variant, VectorField,
};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: key '{key}': {source}")]
    Expression {
        line: usize,
        key: String,
        #[source]
        source: ExprError,
    },
    #[error("line {line}: key '{key}': {message}")]
    BadValue {
        line: usize,
        key: String,
        message: String,
    },
    #[error("[{section}] is missing key '{key}'")]
    Missing { section: String, key: String },
    #[error("{0}")]
    Invalid(String),
}

/// Measurement noise used to generate the synthetic measurements.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseSpec {
    /// One expression of `t` per output.
    Signal(Vec<Expr<f64>>),
    /// Independent uniform draws inside the noise bounds at every sample time.
    Random { seed: u64 },
}

/// Observer gain: a literal matrix, a name from `[gains]`, or synthesized.
#[derive(Debug, Clone, PartialEq)]
pub enum GainChoice {
    Matrix(Matrix<f64>),
    Named(String),
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelBlock {
    pub n_x: usize,
    pub n_u: usize,
    pub n_y: usize,
    pub dynamics: Vec<Expr<f64>>,
    pub output: Matrix<f64>,
    pub x0_lower: Vec<f64>,
    pub x0_upper: Vec<f64>,
    pub horizon: (f64, f64),
    pub u_lower: Vec<Expr<f64>>,
    pub u_upper: Vec<Expr<f64>>,
    pub v_lower: Vec<Expr<f64>>,
    pub v_upper: Vec<Expr<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruthBlock {
    pub inputs: Vec<Expr<f64>>,
    pub x0: Vec<f64>,
    pub noise: NoiseSpec,
    pub n_samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObserverBlock {
    pub variant: Variant,
    pub gain: GainChoice,
    pub s_min: f64,
    pub l_bound: f64,
    pub linear_form: LinearForm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationBlock {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub blow_up_threshold: f64,
    pub output_points: usize,
    pub method: Method,
}

impl Default for IntegrationBlock {
    fn default() -> Self {
        let base = IntegConfig::<f64>::default();
        Self {
            rel_tol: base.rel_tol,
            abs_tol: base.abs_tol,
            max_step: base.max_step,
            blow_up_threshold: base.blow_up_threshold,
            output_points: 500,
            method: base.method,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub model: ModelBlock,
    /// Linear part `A` of the dynamics, used for gain synthesis.
    pub linear: Option<Matrix<f64>>,
    pub truth: TruthBlock,
    pub observer: ObserverBlock,
    pub gains: BTreeMap<String, Matrix<f64>>,
    pub integration: IntegrationBlock,
}

pub const DEFAULT_S_MIN: f64 = -10.0;
pub const DEFAULT_L_BOUND: f64 = 100.0;

pub fn variant_key(v: Variant) -> &'static str {
    match v {
        Variant::Gmac => "gmac",
        Variant::NoMeasurements => "no_measurements",
        Variant::NoConstraints => "no_constraints",
    }
}

pub fn parse_variant(s: &str) -> Option<Variant> {
    match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
        "gmac" => Some(Variant::Gmac),
        "no_measurements" | "nomeasurements" => Some(Variant::NoMeasurements),
        "no_constraints" | "noconstraints" => Some(Variant::NoConstraints),
        _ => None,
    }
}

fn method_key(m: Method) -> &'static str {
    match m {
        Method::DormandPrince => "dopri5",
        Method::Rosenbrock => "rosenbrock",
        Method::Auto => "auto",
    }
}

fn form_key(f: LinearForm) -> &'static str {
    match f {
        LinearForm::Fused => "fused",
        LinearForm::Split => "split",
    }
}

struct Entry {
    line: usize,
    value: String,
    used: bool,
}

struct Section {
    name: String,
    entries: BTreeMap<String, Entry>,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.entries.get_mut(key).map(|e| {
            e.used = true;
            (e.line, e.value.clone())
        })
    }

    fn require(&mut self, key: &str) -> Result<(usize, String), ScenarioError> {
        self.take(key).ok_or_else(|| ScenarioError::Missing {
            section: self.name.clone(),
            key: key.into(),
        })
    }

    fn bad(line: usize, key: &str, message: impl Into<String>) -> ScenarioError {
        ScenarioError::BadValue {
            line,
            key: key.into(),
            message: message.into(),
        }
    }

    fn number<T: FromStr>(&mut self, key: &str) -> Result<T, ScenarioError> {
        let (line, v) = self.require(key)?;
        v.parse()
            .map_err(|_| Self::bad(line, key, format!("'{v}' is not a valid number")))
    }

    fn number_or<T: FromStr>(&mut self, key: &str, default: T) -> Result<T, ScenarioError> {
        match self.entries.contains_key(key) {
            true => self.number(key),
            false => Ok(default),
        }
    }

    fn list(&mut self, key: &str, len: usize) -> Result<Vec<f64>, ScenarioError> {
        let (line, v) = self.require(key)?;
        let values = parse_list(&v).map_err(|m| Self::bad(line, key, m))?;
        if values.len() != len {
            return Err(Self::bad(
                line,
                key,
                format!("expected {len} values, found {}", values.len()),
            ));
        }
        Ok(values)
    }

    fn matrix(&mut self, key: &str, rows: usize, cols: usize) -> Result<Matrix<f64>, ScenarioError> {
        let (line, v) = self.require(key)?;
        parse_matrix(&v, rows, cols).map_err(|m| Self::bad(line, key, m))
    }

    fn expr(&mut self, key: &str, n_x: usize, n_u: usize) -> Result<Expr<f64>, ScenarioError> {
        let (line, v) = self.require(key)?;
        Expr::parse(&v, n_x, n_u).map_err(|source| ScenarioError::Expression {
            line,
            key: key.into(),
            source,
        })
    }

    fn finish(&self) -> Result<(), ScenarioError> {
        match self.entries.iter().find(|(_, e)| !e.used) {
            Some((key, e)) => Err(ScenarioError::BadValue {
                line: e.line,
                key: key.clone(),
                message: format!("unknown key in [{}]", self.name),
            }),
            None => Ok(()),
        }
    }
}

fn parse_list(v: &str) -> Result<Vec<f64>, String> {
    v.split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>()
                .map_err(|_| format!("'{s}' is not a valid number"))
        })
        .collect()
}

fn parse_matrix(v: &str, rows: usize, cols: usize) -> Result<Matrix<f64>, String> {
    let parsed: Vec<Vec<f64>> = v.split(';').map(parse_list).collect::<Result<_, _>>()?;
    if parsed.len() != rows || parsed.iter().any(|r| r.len() != cols) {
        return Err(format!("expected a {rows}x{cols} matrix"));
    }
    Matrix::from_rows(&parsed).map_err(|e| e.to_string())
}

fn split_sections(text: &str) -> Result<Vec<Section>, ScenarioError> {
    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| ScenarioError::Syntax {
                    line,
                    message: "unterminated section header".into(),
                })?
                .trim()
                .to_string();
            if !["model", "linear", "truth", "observer", "gains", "integration"].contains(&name.as_str()) {
                return Err(ScenarioError::Syntax {
                    line,
                    message: format!("unknown section [{name}]"),
                });
            }
            if sections.iter().any(|s| s.name == name) {
                return Err(ScenarioError::Syntax {
                    line,
                    message: format!("duplicate section [{name}]"),
                });
            }
            sections.push(Section {
                name,
                entries: BTreeMap::new(),
            });
            continue;
        }
        let (key, value) = trimmed.split_once('=').ok_or_else(|| ScenarioError::Syntax {
            line,
            message: "expected 'key = value'".into(),
        })?;
        let section = sections.last_mut().ok_or_else(|| ScenarioError::Syntax {
            line,
            message: "key outside of any section".into(),
        })?;
        let key = key.trim().to_string();
        if section.entries.contains_key(&key) {
            return Err(ScenarioError::BadValue {
                line,
                key,
                message: "duplicate key".into(),
            });
        }
        section.entries.insert(
            key,
            Entry {
                line,
                value: value.trim().to_string(),
                used: false,
            },
        );
    }
    Ok(sections)
}

impl FromStr for Scenario {
    type Err = ScenarioError;

    fn from_str(text: &str) -> Result<Self, ScenarioError> {
        let mut sections = split_sections(text)?;
        let mut get = |name: &str| -> Section {
            match sections.iter().position(|s| s.name == name) {
                Some(i) => sections.remove(i),
                None => Section {
                    name: name.into(),
                    entries: BTreeMap::new(),
                },
            }
        };
        let mut model_s = get("model");
        let mut linear_s = get("linear");
        let mut truth_s = get("truth");
        let mut observer_s = get("observer");
        let mut gains_s = get("gains");
        let mut integ_s = get("integration");

        let n_x: usize = model_s.number("n_x")?;
        let n_u: usize = model_s.number_or("n_u", 0)?;
        let n_y: usize = model_s.number("n_y")?;
        if n_x == 0 || n_y == 0 {
            return Err(ScenarioError::Invalid("n_x and n_y must be positive".into()));
        }
        let dynamics = (1..=n_x)
            .map(|i| model_s.expr(&format!("f{i}"), n_x, n_u))
            .collect::<Result<Vec<_>, _>>()?;
        let output = model_s.matrix("C", n_y, n_x)?;
        let x0_lower = model_s.list("x0_lower", n_x)?;
        let x0_upper = model_s.list("x0_upper", n_x)?;
        let horizon = model_s.list("horizon", 2)?;
        let bound = |s: &mut Section, prefix: &str, n: usize, side: &str| {
            (1..=n)
                .map(|k| s.expr(&format!("{prefix}{k}_{side}"), 0, 0))
                .collect::<Result<Vec<_>, _>>()
        };
        let u_lower = bound(&mut model_s, "u", n_u, "lower")?;
        let u_upper = bound(&mut model_s, "u", n_u, "upper")?;
        let v_lower = bound(&mut model_s, "v", n_y, "lower")?;
        let v_upper = bound(&mut model_s, "v", n_y, "upper")?;
        model_s.finish()?;
        let model = ModelBlock {
            n_x,
            n_u,
            n_y,
            dynamics,
            output,
            x0_lower,
            x0_upper,
            horizon: (horizon[0], horizon[1]),
            u_lower,
            u_upper,
            v_lower,
            v_upper,
        };

        let linear = match linear_s.entries.contains_key("A") {
            true => Some(linear_s.matrix("A", n_x, n_x)?),
            false => None,
        };
        linear_s.finish()?;

        let inputs = (1..=n_u)
            .map(|k| truth_s.expr(&format!("u{k}"), 0, 0))
            .collect::<Result<Vec<_>, _>>()?;
        let x0 = truth_s.list("x0", n_x)?;
        let noise = match truth_s.take("noise") {
            Some((line, v)) => {
                let seed = v
                    .strip_prefix("random(")
                    .and_then(|r| r.strip_suffix(')'))
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| Section::bad(line, "noise", "expected 'random(<seed>)'"))?;
                NoiseSpec::Random { seed }
            }
            None => NoiseSpec::Signal(
                (1..=n_y)
                    .map(|k| truth_s.expr(&format!("noise{k}"), 0, 0))
                    .collect::<Result<Vec<_>, _>>()?,
            ),
        };
        let n_samples = truth_s.number_or("n_samples", 500usize)?;
        truth_s.finish()?;
        let truth = TruthBlock {
            inputs,
            x0,
            noise,
            n_samples,
        };

        let mut gains = BTreeMap::new();
        let names: Vec<String> = gains_s.entries.keys().cloned().collect();
        for name in names {
            let m = gains_s.matrix(&name, n_x, n_y)?;
            gains.insert(name, m);
        }

        let (line, v) = observer_s.require("variant")?;
        let variant = parse_variant(&v).ok_or_else(|| {
            Section::bad(line, "variant", "expected gmac, no_measurements or no_constraints")
        })?;
        let gain = match observer_s.take("gain") {
            None => GainChoice::Matrix(Matrix::zeros(n_x, n_y)),
            Some((_, v)) if v == "auto" => GainChoice::Auto,
            Some((_, v)) if gains.contains_key(&v) => GainChoice::Named(v),
            Some((line, v)) => GainChoice::Matrix(
                parse_matrix(&v, n_x, n_y).map_err(|m| Section::bad(line, "gain", m))?,
            ),
        };
        let s_min = observer_s.number_or("s_min", DEFAULT_S_MIN)?;
        let l_bound = observer_s.number_or("l_bound", DEFAULT_L_BOUND)?;
        let linear_form = match observer_s.take("linear_form") {
            None => LinearForm::default(),
            Some((_, v)) if v == "fused" => LinearForm::Fused,
            Some((_, v)) if v == "split" => LinearForm::Split,
            Some((line, _)) => return Err(Section::bad(line, "linear_form", "expected fused or split")),
        };
        observer_s.finish()?;
        let observer = ObserverBlock {
            variant,
            gain,
            s_min,
            l_bound,
            linear_form,
        };

        let base = IntegrationBlock::default();
        let method = match integ_s.take("method") {
            None => base.method,
            Some((_, v)) if v == "dopri5" => Method::DormandPrince,
            Some((_, v)) if v == "rosenbrock" => Method::Rosenbrock,
            Some((_, v)) if v == "auto" => Method::Auto,
            Some((line, _)) => {
                return Err(Section::bad(line, "method", "expected dopri5, rosenbrock or auto"))
            }
        };
        let integration = IntegrationBlock {
            rel_tol: integ_s.number_or("rel_tol", base.rel_tol)?,
            abs_tol: integ_s.number_or("abs_tol", base.abs_tol)?,
            max_step: integ_s.number_or("max_step", base.max_step)?,
            blow_up_threshold: integ_s.number_or("blow_up_threshold", base.blow_up_threshold)?,
            output_points: integ_s.number_or("output_points", base.output_points)?,
            method,
        };
        integ_s.finish()?;

        let scenario = Scenario {
            model,
            linear,
            truth,
            observer,
            gains,
            integration,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

impl Scenario {
    fn validate(&self) -> Result<(), ScenarioError> {
        let invalid = |m: String| Err(ScenarioError::Invalid(m));
        let (t0, tf) = self.model.horizon;
        if !(t0 < tf) {
            return invalid(format!("horizon [{t0}, {tf}] is empty"));
        }
        if self
            .model
            .x0_lower
            .iter()
            .zip(&self.model.x0_upper)
            .any(|(l, u)| !(l <= u))
        {
            return invalid("x0_lower exceeds x0_upper".into());
        }
        let i = &self.integration;
        if !(i.rel_tol > 0.0 && i.abs_tol > 0.0) {
            return invalid("tolerances must be positive".into());
        }
        if !(i.max_step > 0.0) || !(i.blow_up_threshold > 0.0) {
            return invalid("max_step and blow_up_threshold must be positive".into());
        }
        if i.output_points < 2 || self.truth.n_samples < 2 {
            return invalid("output_points and n_samples must be at least 2".into());
        }
        self.system_model().map(|_| ())
    }

    pub fn system_model(&self) -> Result<SystemModel<f64>, ScenarioError> {
        let m = &self.model;
        let wrap = |e: interval_observer::ObserverError| ScenarioError::Invalid(e.to_string());
        let field = VectorField::new(m.dynamics.clone(), m.n_u)
            .map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        let x0 = IntervalVector::from_bounds(&m.x0_lower, &m.x0_upper)
            .map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        SystemModel::new(
            field,
            m.output.clone(),
            x0,
            m.horizon,
            BoundSignal::new(m.u_lower.clone(), m.u_upper.clone()).map_err(wrap)?,
            BoundSignal::new(m.v_lower.clone(), m.v_upper.clone()).map_err(wrap)?,
        )
        .map_err(wrap)
    }

    pub fn integ_config(&self) -> IntegConfig<f64> {
        let i = &self.integration;
        IntegConfig {
            rel_tol: i.rel_tol,
            abs_tol: i.abs_tol,
            max_step: i.max_step,
            blow_up_threshold: i.blow_up_threshold,
            ..IntegConfig::default()
        }
        .with_method(i.method)
        .with_output_times(interval_observer::uniform_grid(
            self.model.horizon.0,
            self.model.horizon.1,
            i.output_points,
        ))
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, v: &[f64]) -> fmt::Result {
    for (k, x) in v.iter().enumerate() {
        if k > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{x}")?;
    }
    Ok(())
}

fn write_matrix(f: &mut fmt::Formatter<'_>, m: &Matrix<f64>) -> fmt::Result {
    for (i, row) in m.rows_iter().enumerate() {
        if i > 0 {
            write!(f, "; ")?;
        }
        write_list(f, row)?;
    }
    Ok(())
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.model;
        writeln!(f, "[model]")?;
        writeln!(f, "n_x = {}", m.n_x)?;
        writeln!(f, "n_u = {}", m.n_u)?;
        writeln!(f, "n_y = {}", m.n_y)?;
        for (i, e) in m.dynamics.iter().enumerate() {
            writeln!(f, "f{} = {e}", i + 1)?;
        }
        write!(f, "C = ")?;
        write_matrix(f, &m.output)?;
        write!(f, "\nx0_lower = ")?;
        write_list(f, &m.x0_lower)?;
        write!(f, "\nx0_upper = ")?;
        write_list(f, &m.x0_upper)?;
        writeln!(f, "\nhorizon = {}, {}", m.horizon.0, m.horizon.1)?;
        for (k, (lo, hi)) in m.u_lower.iter().zip(&m.u_upper).enumerate() {
            writeln!(f, "u{0}_lower = {lo}\nu{0}_upper = {hi}", k + 1)?;
        }
        for (k, (lo, hi)) in m.v_lower.iter().zip(&m.v_upper).enumerate() {
            writeln!(f, "v{0}_lower = {lo}\nv{0}_upper = {hi}", k + 1)?;
        }

        if let Some(a) = &self.linear {
            write!(f, "\n[linear]\nA = ")?;
            write_matrix(f, a)?;
            writeln!(f)?;
        }

        let t = &self.truth;
        writeln!(f, "\n[truth]")?;
        for (k, e) in t.inputs.iter().enumerate() {
            writeln!(f, "u{} = {e}", k + 1)?;
        }
        write!(f, "x0 = ")?;
        write_list(f, &t.x0)?;
        writeln!(f)?;
        match &t.noise {
            NoiseSpec::Random { seed } => writeln!(f, "noise = random({seed})")?,
            NoiseSpec::Signal(exprs) => {
                for (k, e) in exprs.iter().enumerate() {
                    writeln!(f, "noise{} = {e}", k + 1)?;
                }
            }
        }
        writeln!(f, "n_samples = {}", t.n_samples)?;

        if !self.gains.is_empty() {
            writeln!(f, "\n[gains]")?;
            for (name, g) in &self.gains {
                write!(f, "{name} = ")?;
                write_matrix(f, g)?;
                writeln!(f)?;
            }
        }

        let o = &self.observer;
        writeln!(f, "\n[observer]")?;
        writeln!(f, "variant = {}", variant_key(o.variant))?;
        match &o.gain {
            GainChoice::Auto => writeln!(f, "gain = auto")?,
            GainChoice::Named(n) => writeln!(f, "gain = {n}")?,
            GainChoice::Matrix(g) => {
                write!(f, "gain = ")?;
                write_matrix(f, g)?;
                writeln!(f)?;
            }
        }
        writeln!(f, "s_min = {}", o.s_min)?;
        writeln!(f, "l_bound = {}", o.l_bound)?;
        writeln!(f, "linear_form = {}", form_key(o.linear_form))?;

        let i = &self.integration;
        writeln!(f, "\n[integration]")?;
        writeln!(f, "rel_tol = {}", i.rel_tol)?;
        writeln!(f, "abs_tol = {}", i.abs_tol)?;
        writeln!(f, "max_step = {}", i.max_step)?;
        writeln!(f, "blow_up_threshold = {}", i.blow_up_threshold)?;
        writeln!(f, "output_points = {}", i.output_points)?;
        writeln!(f, "method = {}", method_key(i.method))
    }
}
