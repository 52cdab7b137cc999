//! Sign pattern of the sphere flux over time.
//!
//! Per radius the flux history is cut into maximal runs of one sign (a zero
//! sample extends the run before it, and counts as incoming at the start).
//! Runs whose time integral is at most `l1_tol` in absolute value are
//! dropped as integrable noise; the signs of what remains decide the
//! verdict. Dropping is done in one pass against the fixed budget, so a
//! larger budget only ever removes more runs.

use serde::{Deserialize, Serialize};

use solitonscope_core::FluxSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Flux `≤ 0` at every radius (up to the budget).
    AlwaysIncoming,
    /// At most one change from incoming to outgoing at every radius.
    IncomingThenOutgoing,
    Mixed,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::AlwaysIncoming => "always_incoming",
            Verdict::IncomingThenOutgoing => "incoming_then_outgoing",
            Verdict::Mixed => "mixed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct SignRun {
    outgoing: bool,
    integral: f64,
}

/// Trapezoid weights for integrating samples at `times`.
fn trapezoid_weights(times: &[f64]) -> Vec<f64> {
    let n = times.len();
    let mut w = vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        let h = times[i + 1] - times[i];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    w
}

fn sign_runs(times: &[f64], flux: &[f64]) -> Vec<SignRun> {
    let w = trapezoid_weights(times);
    let mut runs: Vec<SignRun> = Vec::new();
    for (f, wi) in flux.iter().zip(&w) {
        let outgoing = match runs.last() {
            _ if *f > 0.0 => true,
            _ if *f < 0.0 => false,
            Some(r) => r.outgoing,
            None => false,
        };
        match runs.last_mut() {
            Some(r) if r.outgoing == outgoing => r.integral += f * wi,
            _ => runs.push(SignRun {
                outgoing,
                integral: f * wi,
            }),
        }
    }
    runs
}

/// Verdict for one flux history.
pub fn classify_history(times: &[f64], flux: &[f64], l1_tol: f64) -> Verdict {
    let kept: Vec<bool> = sign_runs(times, flux)
        .into_iter()
        .filter(|r| r.integral.abs() > l1_tol)
        .map(|r| r.outgoing)
        .collect();
    if !kept.contains(&true) {
        return Verdict::AlwaysIncoming;
    }
    // incoming* outgoing*
    let first_out = kept.iter().position(|&o| o).unwrap();
    if kept[first_out..].iter().all(|&o| o) {
        Verdict::IncomingThenOutgoing
    } else {
        Verdict::Mixed
    }
}

/// Aggregate verdict over the radii with index in `columns`.
pub fn classify_columns(series: &FluxSeries, columns: &[usize], l1_tol: f64) -> Verdict {
    let mut worst = Verdict::AlwaysIncoming;
    for &j in columns {
        match classify_history(&series.times, &series.column(j), l1_tol) {
            Verdict::Mixed => return Verdict::Mixed,
            Verdict::IncomingThenOutgoing => worst = Verdict::IncomingThenOutgoing,
            Verdict::AlwaysIncoming => {}
        }
    }
    worst
}

/// Verdict aggregated over every radius of the series.
pub fn classify_flux(series: &FluxSeries, l1_tol: f64) -> Verdict {
    let all: Vec<usize> = (0..series.radii.len()).collect();
    classify_columns(series, &all, l1_tol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusVerdict {
    pub radius: f64,
    pub verdict: Verdict,
    /// `∫|flux|` over the final quarter divided by `∫|flux|` over the run:
    /// the finite-horizon stand-in for integrability of the flux.
    pub tail_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub l1_tol: f64,
    pub per_radius: Vec<RadiusVerdict>,
    pub overall: Verdict,
    pub exterior_radius: Option<f64>,
    pub exterior: Option<Verdict>,
}

pub fn classify_report(series: &FluxSeries, l1_tol: f64, exterior_radius: Option<f64>) -> Classification {
    let w = trapezoid_weights(&series.times);
    let t_end = series.times.last().copied().unwrap_or(0.0);
    let t_start = series.times.first().copied().unwrap_or(0.0);
    let cut = t_end - 0.25 * (t_end - t_start);
    let per_radius = series
        .radii
        .iter()
        .enumerate()
        .map(|(j, &radius)| {
            let col = series.column(j);
            let total: f64 = col.iter().zip(&w).map(|(f, wi)| f.abs() * wi).sum();
            let tail: f64 = col
                .iter()
                .zip(&w)
                .zip(&series.times)
                .filter(|(_, &t)| t >= cut)
                .map(|((f, wi), _)| f.abs() * wi)
                .sum();
            RadiusVerdict {
                radius,
                verdict: classify_history(&series.times, &col, l1_tol),
                tail_fraction: if total > 0.0 { tail / total } else { 0.0 },
            }
        })
        .collect();
    let exterior = exterior_radius.map(|r0| {
        let cols: Vec<usize> = (0..series.radii.len()).filter(|&j| series.radii[j] >= r0).collect();
        classify_columns(series, &cols, l1_tol)
    });
    Classification {
        l1_tol,
        per_radius,
        overall: classify_flux(series, l1_tol),
        exterior_radius,
        exterior,
    }
}
