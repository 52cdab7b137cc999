//! Verdicts for a finished run, recomputed from its artifacts.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use solitonscope_core::io::{read_table, Table};

use crate::artifacts::{CONFIG, METRICS};
use crate::classify::{Classification, Verdict};
use crate::config::{ExperimentConfig, Stage};
use crate::error::{CliError, CliResult};
use crate::pipeline::Metrics;

/// Every verdict here is taken over the simulated window only; nothing is
/// claimed about `t → ∞`.
pub const FINITE_HORIZON_NOTE: &str =
    "all verdicts are finite-horizon: they describe the simulated window [0, T] and say nothing about t -> infinity";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// The stage producing the data was not run.
    Unevaluated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub stage: Stage,
    pub status: CheckStatus,
    /// Measured value; `null` when it is missing or not finite.
    pub value: Option<f64>,
    pub threshold: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mass_drift: Option<f64>,
    pub energy_drift: Option<f64>,
    /// `max |2·cumulative + Δ ball mass| / mass(0)`.
    pub flux_balance: Option<f64>,
    /// Fraction of snapshots at which the incoming-wave indicator holds.
    pub iwc_fraction: Option<f64>,
    pub kinetic_splitting: Option<f64>,
    pub classifier: Option<Verdict>,
    pub classifier_exterior: Option<Verdict>,
    pub soliton_l2: Option<f64>,
    pub free_virial: Option<f64>,
    pub reconstruction: Option<f64>,
    pub e_hat: Option<f64>,
    pub e_hat_final_quarter: Option<f64>,
    /// Fitted energy of the final snapshot.
    pub e_fit: Option<f64>,
    /// Mean fitted energy over the final quarter of the distance samples.
    pub e_fit_final_quarter: Option<f64>,
    /// `|E_hat - E_fit|/E_fit` with both taken over the final quarter.
    pub e_gap: Option<f64>,
    pub distance_max: Option<f64>,
    pub distance_final_quarter_max: Option<f64>,
    pub distance_final: Option<f64>,
    pub weak_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub stage_reached: Option<Stage>,
    pub skipped: Vec<crate::pipeline::Skipped>,
    pub summary: Summary,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub note: String,
    pub config: ExperimentConfig,
}

impl RunReport {
    pub fn failed(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }

    /// Human-readable table of the checks.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "scenario {}: {}",
            self.scenario,
            if self.pass { "PASS" } else { "FAIL" }
        );
        for c in &self.checks {
            let status = match c.status {
                CheckStatus::Pass => "pass",
                CheckStatus::Fail => "FAIL",
                CheckStatus::Unevaluated => "----",
            };
            let value = c.value.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "null".into());
            let _ = write!(out, "  [{status}] {:<22} {:>11}  ({})", c.name, value, c.threshold);
            if !c.detail.is_empty() {
                let _ = write!(out, "  {}", c.detail);
            }
            out.push('\n');
        }
        for s in &self.skipped {
            let _ = writeln!(out, "  skipped {}: {}", s.stage, s.reason);
        }
        let _ = writeln!(out, "  note: {}", self.note);
        out
    }
}

fn max_of(values: &[f64]) -> Option<f64> {
    if values.iter().any(|v| !v.is_finite()) {
        return Some(f64::NAN);
    }
    values.iter().copied().reduce(f64::max)
}

struct Judge<'a> {
    metrics: &'a Metrics,
    checks: Vec<Check>,
}

impl Judge<'_> {
    /// Whether `stage` produced its data. A stage cut by `--stage-until`
    /// yields `None`; a stage skipped for lack of input still counts as run.
    fn ran(&self, stage: Stage) -> Option<Option<&str>> {
        if self.metrics.stage_reached.is_none_or(|r| r < stage) {
            return None;
        }
        match self.metrics.skipped.iter().find(|s| s.stage == stage) {
            Some(s) if s.reason.starts_with("stopped after") => None,
            Some(s) => Some(Some(s.reason.as_str())),
            None => Some(None),
        }
    }

    fn push(&mut self, name: &str, stage: Stage, value: Option<f64>, threshold: String, ok: impl Fn(f64) -> bool) {
        let (status, value, detail) = match self.ran(stage) {
            None => (CheckStatus::Unevaluated, None, format!("{stage} not run")),
            Some(Some(reason)) => (CheckStatus::Fail, None, format!("{stage} skipped: {reason}")),
            Some(None) => match value {
                Some(v) if v.is_finite() => (
                    if ok(v) { CheckStatus::Pass } else { CheckStatus::Fail },
                    Some(v),
                    String::new(),
                ),
                Some(_) => (CheckStatus::Fail, None, "not finite".into()),
                None => (CheckStatus::Fail, None, "missing data".into()),
            },
        };
        self.checks.push(Check {
            name: name.into(),
            stage,
            status,
            value,
            threshold,
            detail,
        });
    }

    fn at_most(&mut self, name: &str, stage: Stage, value: Option<f64>, limit: Option<f64>) {
        if let Some(limit) = limit {
            self.push(name, stage, value, format!("<= {limit:e}"), |v| v <= limit);
        }
    }
}

fn table(dir: &Path, name: &str) -> Option<Table> {
    read_table(&dir.join(name)).ok()
}

fn json<T: for<'de> Deserialize<'de>>(dir: &Path, name: &str) -> Option<T> {
    let text = fs::read_to_string(dir.join(name)).ok()?;
    serde_json::from_str(&text).ok()
}

/// Drift columns of `conserved.csv`: `(mass, energy)` relative to `t = 0`.
fn drifts(t: &Table) -> (Option<f64>, Option<f64>) {
    let rel = |col: Option<Vec<f64>>| {
        let col = col?;
        let c0 = *col.first()?;
        let scale = if c0 != 0.0 { c0.abs() } else { 1.0 };
        max_of(&col.iter().map(|c| (c - c0).abs() / scale).collect::<Vec<_>>())
    };
    (rel(t.column("mass")), rel(t.column("energy")))
}

/// Flux balance relative to `mass(0)`, and whether the bound on the
/// cumulative flux holds over every radius's initial incoming stretch.
fn flux_checks(t: &Table, mass0: f64) -> (Option<f64>, Option<bool>) {
    let (Some(radii), Some(flux), Some(cum), Some(ball)) = (
        t.column("R"),
        t.column("flux"),
        t.column("cumulative"),
        t.column("ball_mass"),
    ) else {
        return (None, None);
    };
    let mut distinct: Vec<f64> = Vec::new();
    for r in &radii {
        if !distinct.contains(r) {
            distinct.push(*r);
        }
    }
    let nr = distinct.len();
    if nr == 0 || radii.len() % nr != 0 {
        return (None, None);
    }
    let mut balance: f64 = 0.0;
    let mut bound = true;
    for j in 0..nr {
        let rows: Vec<usize> = (j..radii.len()).step_by(nr).collect();
        let m0 = ball[rows[0]];
        let mut incoming = true;
        for &i in &rows {
            let err = (2.0 * cum[i] + ball[i] - m0).abs();
            balance = if err.is_finite() && !balance.is_nan() {
                balance.max(err)
            } else {
                f64::NAN
            };
            incoming &= flux[i] <= 0.0;
            if incoming {
                bound &= -cum[i] >= -1e-12 * mass0 && -cum[i] <= 0.5 * mass0 + 1e-9;
            }
        }
    }
    let scale = if mass0 > 0.0 { mass0 } else { 1.0 };
    (Some(balance / scale), Some(bound))
}

struct DistanceSummary {
    max: f64,
    final_quarter_max: f64,
    last: f64,
    e_fit_final_quarter: f64,
}

fn distance_summary(t: &Table) -> Option<DistanceSummary> {
    let times = t.column("t")?;
    let d = t.column("l2_fit")?;
    let e = t.column("e_fit")?;
    let t_end = *times.last()?;
    let cut = times[0] + 0.75 * (t_end - times[0]);
    let tail: Vec<usize> = (0..times.len()).filter(|&i| times[i] >= cut).collect();
    let tail_d: Vec<f64> = tail.iter().map(|&i| d[i]).collect();
    Some(DistanceSummary {
        max: max_of(&d)?,
        final_quarter_max: max_of(&tail_d)?,
        last: *d.last()?,
        e_fit_final_quarter: tail.iter().map(|&i| e[i]).sum::<f64>() / tail.len() as f64,
    })
}

/// Recompute every verdict of the run in `dir`.
pub fn evaluate(dir: &Path) -> CliResult<RunReport> {
    let cfg_path = dir.join(CONFIG);
    let cfg_text =
        fs::read_to_string(&cfg_path).map_err(|e| CliError::artifact(cfg_path.display().to_string(), e.to_string()))?;
    let cfg = ExperimentConfig::from_toml(&cfg_text)?;
    let metrics: Metrics = json(dir, METRICS)
        .ok_or_else(|| CliError::artifact(dir.join(METRICS).display().to_string(), "missing or unreadable"))?;
    let th = &cfg.thresholds;
    let mut s = Summary::default();

    if let Some(t) = table(dir, "conserved.csv") {
        (s.mass_drift, s.energy_drift) = drifts(&t);
    }
    s.soliton_l2 = metrics.soliton_l2;
    s.free_virial = metrics.free_virial;

    let mut iwc_bound = None;
    if let Some(t) = table(dir, "flux.csv") {
        (s.flux_balance, iwc_bound) = flux_checks(&t, metrics.mass0);
    }
    if let Some(t) = table(dir, "iwc.csv") {
        s.iwc_fraction = t
            .column("satisfied")
            .map(|c| c.iter().sum::<f64>() / c.len().max(1) as f64);
    }
    let mut nodeless_snapshots = 0;
    if let Some(t) = table(dir, "splitting.csv") {
        if let (Some(nodeless), Some(err)) = (t.column("nodeless"), t.column("relative_error")) {
            let kept: Vec<f64> = nodeless
                .iter()
                .zip(&err)
                .filter(|(n, _)| **n > 0.5)
                .map(|(_, e)| *e)
                .collect();
            nodeless_snapshots = kept.len();
            s.kinetic_splitting = max_of(&kept);
        }
    }
    let classification: Option<Classification> = json(dir, "classifier.json");
    if let Some(c) = &classification {
        s.classifier = Some(c.overall);
        s.classifier_exterior = c.exterior;
    }
    if let Some(l) = &metrics.lift {
        s.reconstruction = Some(l.reconstruction);
    }
    if let Some(sl) = &metrics.slope {
        s.e_hat = Some(sl.slope.e_hat);
        s.e_hat_final_quarter = Some(sl.final_quarter.e_hat);
    }
    if let Some(f) = &metrics.fit {
        s.e_fit = Some(f.e_fit);
    }
    if let Some(ds) = table(dir, "distances.csv").as_ref().and_then(distance_summary) {
        s.distance_max = Some(ds.max);
        s.distance_final_quarter_max = Some(ds.final_quarter_max);
        s.distance_final = Some(ds.last);
        s.e_fit_final_quarter = Some(ds.e_fit_final_quarter);
    }
    if let (Some(e), Some(f)) = (s.e_hat_final_quarter, s.e_fit_final_quarter) {
        s.e_gap = Some((e - f).abs() / f);
    }
    if let Some(t) = table(dir, "weak.csv") {
        s.weak_residual = t.column("ratio").and_then(|c| max_of(&c));
    }

    let mut j = Judge {
        metrics: &metrics,
        checks: Vec::new(),
    };
    j.at_most("mass_drift", Stage::Evolve, s.mass_drift, th.mass_drift);
    j.at_most("energy_drift", Stage::Evolve, s.energy_drift, th.energy_drift);
    j.at_most("closed_form_l2", Stage::Evolve, s.soliton_l2, th.closed_form_l2);
    j.at_most("free_virial", Stage::Evolve, s.free_virial, th.free_virial);
    j.at_most("flux_balance", Stage::Hydro, s.flux_balance, th.flux_balance);
    if th.iwc_bound == Some(true) {
        j.push(
            "iwc_bound",
            Stage::Hydro,
            iwc_bound.map(|b| if b { 1.0 } else { 0.0 }),
            "cumulative in [0, mass/2] while incoming".into(),
            |v| v == 1.0,
        );
    }
    if let Some(limit) = th
        .kinetic_splitting
        .filter(|_| nodeless_snapshots == 0 && j.ran(Stage::Hydro) == Some(None))
    {
        j.checks.push(Check {
            name: "kinetic_splitting".into(),
            stage: Stage::Hydro,
            status: CheckStatus::Unevaluated,
            value: None,
            threshold: format!("<= {limit:e}"),
            detail: "no nodeless snapshot".into(),
        });
    } else {
        j.at_most(
            "kinetic_splitting",
            Stage::Hydro,
            s.kinetic_splitting,
            th.kinetic_splitting,
        );
    }
    if let Some(expected) = &th.classifier {
        let got = s.classifier_exterior.or(s.classifier);
        let ok = got.map(|v| v.name() == expected.as_str());
        j.push(
            "classifier",
            Stage::Hydro,
            ok.map(|b| if b { 1.0 } else { 0.0 }),
            format!("== {expected}"),
            |v| v == 1.0,
        );
        if let (Some(c), Some(got)) = (j.checks.last_mut(), got) {
            c.detail = format!("got {}", got.name());
        }
    }
    j.at_most("reconstruction", Stage::Lift, s.reconstruction, th.reconstruction);
    if th.vortex_free == Some(true) {
        let windings = metrics.lift.as_ref().map(|l| l.nonzero_windings as f64);
        j.push("vortex_free", Stage::Lift, windings, "no nonzero winding".into(), |v| {
            v == 0.0
        });
    }
    let e_hat_err = match (s.e_hat, metrics.recipe_energy) {
        (Some(e), Some(r)) => Some((e - r).abs() / r),
        _ => None,
    };
    j.at_most("e_hat_recipe", Stage::Slope, e_hat_err, th.e_hat_recipe);
    j.at_most(
        "r_spread",
        Stage::Slope,
        metrics.slope.as_ref().map(|s| s.slope.r_spread),
        th.r_spread,
    );
    j.at_most("weak_residual", Stage::Fit, s.weak_residual, th.weak_residual);
    j.at_most("e_gap", Stage::Distances, s.e_gap, th.e_gap);
    if let Some(factor) = th.distance_decrease {
        let ratio = match (s.distance_max, s.distance_final_quarter_max) {
            (Some(m), Some(t)) => Some(m / t),
            _ => None,
        };
        j.push(
            "distance_decrease",
            Stage::Distances,
            ratio,
            format!(">= {factor:e}"),
            |v| v >= factor,
        );
    }

    let checks = j.checks;
    let pass = !checks.iter().any(|c| c.status == CheckStatus::Fail);
    Ok(RunReport {
        scenario: cfg.scenario.name().into(),
        stage_reached: metrics.stage_reached,
        skipped: metrics.skipped.clone(),
        summary: s,
        checks,
        pass,
        note: FINITE_HORIZON_NOTE.into(),
        config: cfg,
    })
}
