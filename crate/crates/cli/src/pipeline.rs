//! From a parsed scenario to observer runs: truth simulation, measurement
//! synthesis and gain resolution.

use std::cell::RefCell;

use interval_observer::{
    make_measurements, run_observer, simulate_truth, synthesize_gain, EstimateTrajectory,
    GainError, GainResult, IntegConfig, LinearForm, LinearObserverData, Matrix, MeasurementSignal,
    ObserverError, ObserverSpec, Solution, SystemModel, Variant,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::scenario::{variant_key, GainChoice, NoiseSpec, Scenario, ScenarioError};

/// Tolerance used for the reference trajectory that generates measurements.
pub const TRUTH_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read '{path}': {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Scenario(#[from] ScenarioError),
    #[error("{0}")]
    Observer(#[from] ObserverError),
    #[error("{0}")]
    Gain(#[from] GainError),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write output: {0}")]
    Output(String),
}

/// Everything the variants of one scenario share.
pub struct Prepared {
    pub scenario: Scenario,
    pub model: SystemModel<f64>,
    pub truth: Solution<f64>,
    pub measurements: MeasurementSignal<f64>,
    pub config: IntegConfig<f64>,
}

/// One observer configuration to run against a prepared scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct VariantChoice {
    pub variant: Variant,
    /// Name of a gain in `[gains]`; `None` uses the scenario's observer gain.
    pub gain: Option<String>,
}

impl VariantChoice {
    /// Parses `variant[@gain]`, e.g. `no_constraints@gain1`.
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let (v, gain) = match s.split_once('@') {
            Some((v, g)) => (v, Some(g.trim().to_string())),
            None => (s, None),
        };
        let variant = crate::scenario::parse_variant(v)
            .ok_or_else(|| CliError::Usage(format!("unknown variant '{}'", v.trim())))?;
        Ok(Self { variant, gain })
    }

    pub fn label(&self) -> String {
        match &self.gain {
            Some(g) => format!("{}@{g}", variant_key(self.variant)),
            None => variant_key(self.variant).to_string(),
        }
    }
}

pub fn load(path: &str) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.into(),
        source,
    })?;
    Ok(text.parse()?)
}

fn eval_signal(exprs: &[interval_observer::Expr<f64>], t: f64) -> Vec<f64> {
    exprs
        .iter()
        .map(|e| e.eval_real(t, &[], &[]).unwrap_or(f64::NAN))
        .collect()
}

/// Simulates the truth and samples the measurements.
pub fn prepare(scenario: &Scenario) -> Result<Prepared, CliError> {
    let model = scenario.system_model()?;
    let truth_cfg = IntegConfig::default().with_tolerances(TRUTH_TOL, TRUTH_TOL);
    let inputs = &scenario.truth.inputs;
    let truth = simulate_truth(&model, |t| eval_signal(inputs, t), &scenario.truth.x0, &truth_cfg)?;
    let state_at = |t: f64| truth.dense_eval(t).unwrap_or_else(|_| truth.final_state().to_vec());
    let n = scenario.truth.n_samples;
    let measurements = match &scenario.truth.noise {
        NoiseSpec::Signal(exprs) => {
            let n_y = model.n_y();
            for t in interval_observer::uniform_grid(model.horizon.0, model.horizon.1, n) {
                let v = eval_signal(exprs, t);
                let bounds = model.noise.eval(t)?;
                if v.iter().zip(&bounds).take(n_y).any(|(x, b)| !b.contains(*x)) {
                    return Err(ObserverError::Inadmissible(format!(
                        "measurement noise leaves its bounds at t = {t}"
                    ))
                    .into());
                }
            }
            make_measurements(state_at, &model.output, |t| eval_signal(exprs, t), n, model.horizon)?
        }
        NoiseSpec::Random { seed } => {
            let rng = RefCell::new(ChaCha8Rng::seed_from_u64(*seed));
            let noise = |t: f64| {
                let bounds = model.noise.eval(t).unwrap_or_default();
                let mut rng = rng.borrow_mut();
                bounds
                    .iter()
                    .map(|b| match b.lo() < b.hi() {
                        true => rng.gen_range(b.lo()..=b.hi()),
                        false => b.lo(),
                    })
                    .collect()
            };
            make_measurements(state_at, &model.output, noise, n, model.horizon)?
        }
    };
    Ok(Prepared {
        scenario: scenario.clone(),
        model,
        truth,
        measurements,
        config: scenario.integ_config(),
    })
}

/// Data for gain synthesis: the scenario's `A` and `C`.
pub fn linear_data(scenario: &Scenario) -> Result<LinearObserverData<f64>, CliError> {
    let a = scenario
        .linear
        .clone()
        .ok_or_else(|| CliError::Usage("scenario has no [linear] block with an A matrix".into()))?;
    Ok(LinearObserverData::new(a, scenario.model.output.clone())?)
}

pub fn synthesize(scenario: &Scenario, s_min: f64, l_bound: f64) -> Result<GainResult<f64>, CliError> {
    Ok(synthesize_gain(&linear_data(scenario)?, s_min, l_bound)?)
}

/// The gain matrix for a variant: a named gain or the scenario's own choice.
pub fn resolve_gain(scenario: &Scenario, name: Option<&str>) -> Result<Matrix<f64>, CliError> {
    let named = |n: &str| {
        scenario
            .gains
            .get(n)
            .cloned()
            .ok_or_else(|| CliError::Usage(format!("no gain named '{n}' in [gains]")))
    };
    match name {
        Some(n) => named(n),
        None => match &scenario.observer.gain {
            GainChoice::Matrix(m) => Ok(m.clone()),
            GainChoice::Named(n) => named(n),
            GainChoice::Auto => {
                let o = &scenario.observer;
                Ok(synthesize(scenario, o.s_min, o.l_bound)?.gain)
            }
        },
    }
}

impl Prepared {
    pub fn spec(&self, choice: &VariantChoice) -> Result<ObserverSpec<f64>, CliError> {
        let gain = resolve_gain(&self.scenario, choice.gain.as_deref())?;
        Ok(ObserverSpec::new(choice.variant, gain).with_linear_form(self.scenario.observer.linear_form))
    }

    pub fn run(&self, choice: &VariantChoice) -> Result<EstimateTrajectory<f64>, CliError> {
        Ok(run_observer(&self.spec(choice)?, &self.model, &self.measurements, &self.config)?)
    }

    /// The scenario's own `[observer]` configuration.
    pub fn default_choice(&self) -> VariantChoice {
        VariantChoice {
            variant: self.scenario.observer.variant,
            gain: None,
        }
    }

    pub fn linear_form(&self) -> LinearForm {
        self.scenario.observer.linear_form
    }
}
