//! CSV trajectories and human-readable summaries.

use std::io::Write;

use interval_observer::{EstimateTrajectory, RunStatus, Solution};

/// Writes `t, xL_1..xL_n, xU_1..xU_n, truth_1..truth_n`, one row per output time.
pub fn write_csv<W: Write>(
    out: W,
    traj: &EstimateTrajectory<f64>,
    truth: &Solution<f64>,
) -> Result<(), csv::Error> {
    let n = traj.lower.first().map_or(0, Vec::len);
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain((1..=n).map(|i| format!("xL_{i}")))
        .chain((1..=n).map(|i| format!("xU_{i}")))
        .chain((1..=n).map(|i| format!("truth_{i}")))
        .collect();
    w.write_record(&header)?;
    for (k, &t) in traj.times.iter().enumerate() {
        let x = truth.dense_eval(t).unwrap_or_else(|_| vec![f64::NAN; n]);
        let row: Vec<String> = std::iter::once(t)
            .chain(traj.lower[k].iter().copied())
            .chain(traj.upper[k].iter().copied())
            .chain(x)
            .map(number)
            .collect();
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn number(x: f64) -> String {
    format!("{x:.16e}")
}

/// Rounds to three significant digits for tables.
pub fn sig3(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let digits = 2 - x.abs().log10().floor() as i32;
    let scale = 10f64.powi(digits);
    let r = (x * scale).round() / scale;
    if digits > 0 {
        let s = format!("{r:.*}", digits as usize);
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    } else {
        format!("{r:.0}")
    }
}

pub fn status_text(traj: &EstimateTrajectory<f64>) -> String {
    let d = &traj.diagnostics;
    let base = match d.status {
        RunStatus::Completed => "completed".to_string(),
        RunStatus::Diverged => "diverged".to_string(),
        RunStatus::SolverFailure => "solver failure".to_string(),
    };
    let mut s = match d.failure_time {
        Some(t) => format!("{base} at t = {t:.4}"),
        None => base,
    };
    if let Some(m) = &d.message {
        s.push_str(&format!(" ({m})"));
    }
    s
}

/// Final-time box followed by run diagnostics.
pub fn final_box(traj: &EstimateTrajectory<f64>) -> String {
    let mut s = String::new();
    match traj.final_bounds() {
        Some((t, lo, hi)) => {
            s.push_str(&format!("t = {t}\n"));
            for (i, (l, u)) in lo.iter().zip(hi).enumerate() {
                s.push_str(&format!("  x{} in [{}, {}]\n", i + 1, number(*l), number(*u)));
            }
        }
        None => s.push_str("no output recorded\n"),
    }
    let d = &traj.diagnostics;
    s.push_str(&format!("status: {}\n", status_text(traj)));
    s.push_str(&format!(
        "steps: {} accepted, {} rejected, {} rhs evaluations\n",
        d.stats.accepted, d.stats.rejected, d.stats.rhs_evals
    ));
    s.push_str(&format!(
        "tightening: {} activations, {} infeasible slabs\n",
        d.ic_activation_count, d.infeasible_slab_count
    ));
    if let Some(t) = d.first_crossing_time {
        s.push_str(&format!("bounds crossed first at t = {t}\n"));
    }
    s
}

/// Table of final-time boxes, one row per labelled run.
pub fn summary_table(rows: &[(String, &EstimateTrajectory<f64>)]) -> String {
    let n = rows
        .iter()
        .find_map(|(_, t)| t.lower.first().map(Vec::len))
        .unwrap_or(0);
    let mut cells: Vec<Vec<String>> = vec![std::iter::once("Method".to_string())
        .chain((1..=n).map(|i| format!("x{i}")))
        .chain(std::iter::once("t_final".to_string()))
        .chain(std::iter::once("status".to_string()))
        .collect()];
    for (label, traj) in rows {
        let mut row = vec![label.clone()];
        match traj.final_bounds() {
            Some((t, lo, hi)) => {
                row.extend(lo.iter().zip(hi).map(|(l, u)| format!("[{}, {}]", sig3(*l), sig3(*u))));
                row.push(sig3(t));
            }
            None => {
                row.extend((0..=n).map(|_| "-".to_string()));
            }
        }
        row.push(status_text(traj));
        cells.push(row);
    }
    let widths: Vec<usize> = (0..cells[0].len())
        .map(|c| cells.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for (r, row) in cells.iter().enumerate() {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, w)| format!("{cell:<w$}"))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
        if r == 0 {
            out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_significant_digits() {
        assert_eq!(sig3(0.44871), "0.449");
        assert_eq!(sig3(1.19241), "1.19");
        assert_eq!(sig3(17.4496), "17.4");
        assert_eq!(sig3(10428.7), "10400");
        assert_eq!(sig3(-0.02504), "-0.025");
        assert_eq!(sig3(0.0), "0");
    }

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, -1.0 / 3.0, 3.143_826_712e6, f64::MIN_POSITIVE] {
            assert_eq!(number(x).parse::<f64>().unwrap(), x);
        }
    }
}
