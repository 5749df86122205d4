//! Deterministic CSV rendering for every report the simulator emits.
//!
//! All files are UTF-8, comma separated, with a header row, `.` decimal
//! separator, floats in scientific notation with 13 significant digits
//! and a trailing newline; identical inputs render byte-identical
//! output.

use crate::basis::DIM;
use crate::eigen::EigenSystem;
use crate::gates::CompiledPulse;
use crate::model::{ConditionReport, TWO_PI};
use crate::protocol::{RunResult, SweepAxis, SweepPoint};
use crate::relax::Trajectory;

/// One CSV field.
#[derive(Debug, Clone)]
pub enum Field {
    Int(i64),
    UInt(u64),
    Float(f64),
    Str(String),
    Bool(bool),
}

impl Field {
    fn render(&self) -> String {
        match self {
            Field::Int(v) => v.to_string(),
            Field::UInt(v) => v.to_string(),
            Field::Float(v) => format_float(*v),
            Field::Str(s) => s.clone(),
            Field::Bool(b) => b.to_string(),
        }
    }
}

/// Scientific notation with 13 significant digits.
pub fn format_float(v: f64) -> String {
    format!("{v:.12e}")
}

/// Renders records under a header; an empty record list yields a
/// header-only file. Every row must match the header width.
pub fn render_csv(header: &[&str], records: &[Vec<Field>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for record in records {
        assert_eq!(record.len(), header.len(), "row width mismatch");
        let row: Vec<String> = record.iter().map(Field::render).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Level-by-level energy comparison across the three routes,
/// frequencies in Hz.
pub fn eigen_report(
    pert0: &EigenSystem,
    pert2: &EigenSystem,
    exact: &EigenSystem,
) -> String {
    let header = [
        "label",
        "sigma",
        "E0_Hz",
        "E2corr_Hz",
        "Eexact_Hz",
        "diff0_Hz",
        "diff2_Hz",
    ];
    let records: Vec<Vec<Field>> = (0..DIM)
        .map(|n| {
            let e0 = pert0.energies[n] / TWO_PI;
            let e2 = pert2.energies[n] / TWO_PI;
            let ex = exact.energies[n] / TWO_PI;
            vec![
                Field::UInt(n as u64),
                Field::Int(exact.sigmas[n] as i64),
                Field::Float(e0),
                Field::Float(e2),
                Field::Float(ex),
                Field::Float(ex - e0),
                Field::Float(ex - e2),
            ]
        })
        .collect();
    render_csv(&header, &records)
}

/// Compiled-pulse table for a gate list.
pub fn compile_report(pulses: &[&CompiledPulse]) -> String {
    let header = [
        "gate", "context", "nu_Hz", "Delta_Hz", "K", "B1_T", "Omega_Hz", "tau_s", "eps_e",
        "eps_n", "sqrtPe",
    ];
    let records: Vec<Vec<Field>> = pulses
        .iter()
        .map(|cp| {
            vec![
                Field::Str(cp.gate.name()),
                Field::Str(cp.gate.context_string()),
                Field::Float(cp.pulse.nu / TWO_PI),
                Field::Float(cp.detuning / TWO_PI),
                Field::UInt(cp.k as u64),
                Field::Float(cp.pulse.amplitude),
                Field::Float(cp.omega / TWO_PI),
                Field::Float(cp.pulse.duration),
                Field::Float(cp.eps_e),
                Field::Float(cp.eps_n),
                Field::Float(cp.sqrt_pe),
            ]
        })
        .collect();
    render_csv(&header, &records)
}

/// Per-step basis populations of one protocol run.
pub fn protocol_report(result: &RunResult) -> String {
    let pop_headers: Vec<String> = (0..DIM).map(|i| format!("pop_{i}")).collect();
    let mut header: Vec<&str> = vec!["step", "label"];
    header.extend(pop_headers.iter().map(String::as_str));
    let mut records: Vec<Vec<Field>> = Vec::with_capacity(result.trace.len() + 1);
    for (idx, (name, pops)) in result.trace.iter().enumerate() {
        let mut row = vec![Field::UInt(idx as u64 + 1), Field::Str(name.clone())];
        row.extend(pops.iter().map(|&p| Field::Float(p)));
        records.push(row);
    }
    let mut final_row = vec![Field::UInt(result.trace.len() as u64 + 1), Field::Str("final".into())];
    final_row.extend(result.final_amplitudes.iter().map(|a| Field::Float(a.norm_sqr())));
    records.push(final_row);
    render_csv(&header, &records)
}

/// Sweep summary; the axis value is reported as `J/2pi` in Hz for an
/// exchange sweep and as the full field difference `2 delta_b` in tesla
/// for a gradient sweep.
pub fn sweep_report(axis: SweepAxis, points: &[SweepPoint]) -> String {
    let header = [
        "axis_value",
        "mean_P",
        "std_P",
        "n_realizations",
        "n_ambiguous_points",
    ];
    let records: Vec<Vec<Field>> = points
        .iter()
        .map(|pt| {
            let value = match axis {
                SweepAxis::Exchange => pt.value / TWO_PI,
                SweepAxis::FieldHalfDifference => 2.0 * pt.value,
            };
            vec![
                Field::Float(value),
                Field::Float(pt.mean_p),
                Field::Float(pt.std_p),
                Field::UInt(pt.n_realizations as u64),
                Field::UInt(pt.n_ambiguous as u64),
            ]
        })
        .collect();
    render_csv(&header, &records)
}

/// Sampled classical trajectory.
pub fn trajectory_report(traj: &Trajectory) -> String {
    let header = ["t_s", "Ix", "Iy", "Iz"];
    let records: Vec<Vec<Field>> = traj
        .samples
        .iter()
        .map(|row| row.iter().map(|&v| Field::Float(v)).collect())
        .collect();
    render_csv(&header, &records)
}

/// One-line trajectory summary.
pub fn relax_summary_report(xi: f64, traj: &Trajectory, eta: f64, b0_min: f64) -> String {
    let header = ["xi", "delta_Iz", "flipped", "eta", "B0_min_T", "step_s"];
    let records = vec![vec![
        Field::Float(xi),
        Field::Float(traj.delta_iz),
        Field::Bool(traj.flipped),
        Field::Float(eta),
        Field::Float(b0_min),
        Field::Float(traj.step),
    ]];
    render_csv(&header, &records)
}

/// Operating-condition table.
pub fn validation_report(reports: &[ConditionReport]) -> String {
    let header = ["condition", "description", "ratio", "threshold", "pass"];
    let records: Vec<Vec<Field>> = reports
        .iter()
        .map(|r| {
            vec![
                Field::UInt(r.index as u64),
                Field::Str(r.description.clone()),
                Field::Float(r.ratio),
                Field::Str(r.threshold.clone()),
                Field::Bool(r.pass),
            ]
        })
        .collect();
    render_csv(&header, &records)
}
