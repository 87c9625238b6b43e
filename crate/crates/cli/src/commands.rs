//! Subcommand bodies. Each returns the process exit code and writes its
//! report to `out` and problems to `err`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use interval_observer::{EstimateTrajectory, RunStatus};

use crate::pipeline::{self, CliError, Prepared, VariantChoice};
use crate::report;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_RUN_FAILED: i32 = 2;
pub const EXIT_SYNTHESIS_FAILED: i32 = 3;

fn run_exit(traj: &EstimateTrajectory<f64>) -> i32 {
    match traj.diagnostics.status {
        RunStatus::Completed => EXIT_OK,
        RunStatus::Diverged | RunStatus::SolverFailure => EXIT_RUN_FAILED,
    }
}

fn save_csv(path: &Path, traj: &EstimateTrajectory<f64>, prepared: &Prepared) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
    report::write_csv(BufWriter::new(file), traj, &prepared.truth)
        .map_err(|e| CliError::Output(format!("{}: {e}", path.display())))
}

fn input_error(err: &mut dyn Write, e: &CliError) -> i32 {
    let _ = writeln!(err, "error: {e}");
    EXIT_INPUT
}

/// `estimator run`: the scenario's own observer, CSV to `output`.
pub fn cmd_run(scenario_path: &str, output: &Path, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let outcome = pipeline::load(scenario_path)
        .and_then(|s| pipeline::prepare(&s))
        .and_then(|p| {
            let traj = p.run(&p.default_choice())?;
            save_csv(output, &traj, &p)?;
            Ok(traj)
        });
    match outcome {
        Ok(traj) => {
            let _ = write!(out, "{}", report::final_box(&traj));
            run_exit(&traj)
        }
        Err(e) => input_error(err, &e),
    }
}

/// `estimator gain`: synthesize and certify a gain from the `[linear]` block.
pub fn cmd_gain(
    scenario_path: &str,
    s_min: Option<f64>,
    l_bound: Option<f64>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let scenario = match pipeline::load(scenario_path) {
        Ok(s) => s,
        Err(e) => return input_error(err, &e),
    };
    let s_min = s_min.unwrap_or(scenario.observer.s_min);
    let l_bound = l_bound.unwrap_or(scenario.observer.l_bound);
    match pipeline::synthesize(&scenario, s_min, l_bound) {
        Ok(res) => {
            let _ = writeln!(out, "L =");
            for row in res.gain.rows_iter() {
                let cells: Vec<String> = row.iter().map(|v| report::number(*v)).collect();
                let _ = writeln!(out, "  [{}]", cells.join(", "));
            }
            let _ = writeln!(out, "s* = {}", report::number(res.s_star));
            let _ = writeln!(out, "margin = {}", report::number(res.margin));
            match res.margin < 0.0 {
                true => EXIT_OK,
                false => {
                    let _ = writeln!(err, "gain is not certified: margin is not negative");
                    EXIT_SYNTHESIS_FAILED
                }
            }
        }
        Err(CliError::Gain(
            e @ (interval_observer::GainError::SynthesisFailed { .. }
            | interval_observer::GainError::LpFailed(_)),
        )) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_SYNTHESIS_FAILED
        }
        Err(e) => input_error(err, &e),
    }
}

fn display_label(choice: &VariantChoice) -> String {
    match &choice.gain {
        Some(g) => format!("{} ({g})", choice.variant.name()),
        None => choice.variant.name().to_string(),
    }
}

/// Runs several variants against one shared measurement realization.
/// Returns the trajectories in the order given.
pub fn compare(
    prepared: &Prepared,
    choices: &[VariantChoice],
) -> Vec<Result<EstimateTrajectory<f64>, CliError>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = choices
            .iter()
            .map(|c| scope.spawn(move || prepared.run(c)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("observer thread panicked"))
            .collect()
    })
}

/// `estimator compare`: one CSV per variant plus `summary.txt` in `output_dir`.
pub fn cmd_compare(
    scenario_path: &str,
    variants: &[String],
    output_dir: &Path,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let choices = match variants
        .iter()
        .map(|v| VariantChoice::parse(v))
        .collect::<Result<Vec<_>, _>>()
    {
        Ok(c) if !c.is_empty() => c,
        Ok(_) => return input_error(err, &CliError::Usage("no variants given".into())),
        Err(e) => return input_error(err, &e),
    };
    let prepared = match pipeline::load(scenario_path).and_then(|s| pipeline::prepare(&s)) {
        Ok(p) => p,
        Err(e) => return input_error(err, &e),
    };
    if let Err(e) = std::fs::create_dir_all(output_dir) {
        return input_error(err, &CliError::Output(format!("{}: {e}", output_dir.display())));
    }
    let results = compare(&prepared, &choices);
    let mut code = EXIT_OK;
    let mut rows = Vec::new();
    for (choice, result) in choices.iter().zip(&results) {
        match result {
            Ok(traj) => {
                let path = output_dir.join(format!("{}.csv", choice.label().replace('@', "_")));
                if let Err(e) = save_csv(&path, traj, &prepared) {
                    code = code.max(input_error(err, &e));
                }
                code = code.max(run_exit(traj));
                rows.push((display_label(choice), traj));
            }
            Err(e) => {
                let _ = writeln!(err, "{}: ", choice.label());
                code = code.max(input_error(err, e));
            }
        }
    }
    let table = report::summary_table(&rows);
    let _ = write!(out, "{table}");
    if let Err(e) = std::fs::write(output_dir.join("summary.txt"), &table) {
        code = code.max(input_error(err, &CliError::Output(e.to_string())));
    }
    code
}
