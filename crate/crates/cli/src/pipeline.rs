//! One run: evolve, then the hydrodynamic, phase and profile diagnostics,
//! each stage writing its artifacts before the next starts.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use solitonscope_core::grid::nodes_in;
use solitonscope_core::io::{self, ProfileSidecar};
use solitonscope_core::model::kinetic_integral;
use solitonscope_core::phase::{default_delta, phase_slope_window, PhaseSlope, PolarResiduals};
use solitonscope_core::profile::{fit_profile_in, solve_profile, weak_residuals, DistanceNorm};
use solitonscope_core::{
    evolve, find_good_boxes, flux_series, hydro_frame, iwc_indicator, kinetic_splitting, lift_phase, polar_residuals,
    profile_distance, GoodBox, NonlinearitySpec, Recipe, Trajectory,
};

use crate::artifacts::{RunDir, CONFIG, METRICS, REPORT};
use crate::classify::classify_report;
use crate::config::{ExperimentConfig, Stage};
use crate::error::{AtStage, CliError, CliResult};
use crate::report::{evaluate, RunReport};
use crate::scenario;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides `output_dir` (and `OUTPUT_DIR`).
    pub output_dir: Option<PathBuf>,
    /// Stop after this stage.
    pub stage_until: Option<Stage>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skipped {
    pub stage: Stage,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftMetrics {
    pub good_box: GoodBox,
    /// `max |η e^{-iθ} - ψ|` over the box divided by `max |ψ|`.
    pub reconstruction: f64,
    pub nonzero_windings: usize,
    pub path_discrepancy: f64,
    pub polar: PolarResiduals,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeMetrics {
    pub window: f64,
    pub slope: PhaseSlope,
    pub final_quarter: PhaseSlope,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitMetrics {
    pub interval: [f64; 2],
    pub e_fit: f64,
    pub distance: f64,
    pub profile: ProfileSidecar,
}

/// Scalars a run measures that are not kept in the CSV artifacts.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub stage_reached: Option<Stage>,
    pub skipped: Vec<Skipped>,
    pub snapshots: usize,
    pub mass0: f64,
    /// Max over snapshots of `|ψ|`.
    pub max_abs: f64,
    /// Recipe energy when the data start as a ground state.
    pub recipe_energy: Option<f64>,
    /// `‖|ψ(T)| - u_E‖_{L²}` for ground-state data.
    pub soliton_l2: Option<f64>,
    /// Worst relative misfit of the free variance quadratic.
    pub free_virial: Option<f64>,
    pub boxes: Option<Vec<GoodBox>>,
    pub lift: Option<LiftMetrics>,
    pub slope: Option<SlopeMetrics>,
    pub fit: Option<FitMetrics>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub report: RunReport,
}

/// Execute a config. Artifacts go to the resolved output directory; on a
/// stage error everything written so far stays, with a MANIFEST marking the
/// run incomplete.
pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> CliResult<RunOutcome> {
    cfg.validate()?;
    let dir = cfg.resolve_output_dir(opts.output_dir.as_deref());
    let mut out = RunDir::create(&dir)?;
    out.text(CONFIG, &cfg.to_toml()?)?;
    let mut metrics = Metrics::default();
    let result = execute(cfg, opts, &mut out, &mut metrics);
    out.json(METRICS, &metrics)?;
    match result {
        Ok(()) => {
            let report = evaluate(out.root())?;
            out.json(REPORT, &report)?;
            out.manifest(metrics.stage_reached, None)?;
            Ok(RunOutcome { dir, report })
        }
        Err(e) => {
            out.manifest(metrics.stage_reached, Some(&e.to_string()))?;
            Err(e)
        }
    }
}

struct Context<'a> {
    cfg: &'a ExperimentConfig,
    nl: NonlinearitySpec,
    traj: Trajectory,
}

fn execute(cfg: &ExperimentConfig, opts: &RunOptions, out: &mut RunDir, m: &mut Metrics) -> CliResult<()> {
    let until = opts.stage_until.unwrap_or(Stage::Distances);
    let started = Instant::now();
    let ctx = stage_evolve(cfg, out, m)?;
    log::info!("{}: evolve done in {:.1?}", cfg.scenario.name(), started.elapsed());
    m.stage_reached = Some(Stage::Evolve);

    let mut sheet = None;
    let mut gbox = None;
    for stage in &Stage::ALL[1..] {
        let stage = *stage;
        if stage > until {
            m.skipped.push(Skipped {
                stage,
                reason: format!("stopped after {until}"),
            });
            continue;
        }
        let t = Instant::now();
        let skip = match stage {
            Stage::Evolve => unreachable!(),
            Stage::Hydro => stage_hydro(&ctx, out).map(|_| None)?,
            Stage::Boxes => {
                gbox = stage_boxes(&ctx, out, m)?;
                gbox.is_none().then(|| "no good box with 3x3 samples".to_string())
            }
            Stage::Lift => match &gbox {
                Some(b) => {
                    sheet = Some(stage_lift(&ctx, b, out, m)?);
                    None
                }
                None => Some("no good box".to_string()),
            },
            Stage::Slope => match &sheet {
                Some(s) => stage_slope(&ctx, s, out, m).map(|_| None)?,
                None => Some("no phase sheet".to_string()),
            },
            Stage::Fit => match cfg.diagnostics.interval {
                Some(iv) => stage_fit(&ctx, iv, out, m).map(|_| None)?,
                None => Some("no fit interval".to_string()),
            },
            Stage::Distances => match (cfg.diagnostics.interval, &m.fit) {
                (Some(iv), Some(_)) => stage_distances(&ctx, iv, out).map(|_| None)?,
                _ => Some("no fitted profile".to_string()),
            },
        };
        if let Some(reason) = skip {
            m.skipped.push(Skipped { stage, reason });
        }
        m.stage_reached = Some(stage);
        log::info!("{}: {stage} done in {:.1?}", cfg.scenario.name(), t.elapsed());
    }
    Ok(())
}

fn stage_evolve<'a>(cfg: &'a ExperimentConfig, out: &mut RunDir, m: &mut Metrics) -> CliResult<Context<'a>> {
    let st = Stage::Evolve;
    let grid = cfg.grid.build()?;
    let nl = cfg.nonlinearity.build()?;
    let recipe = scenario::build_recipe(cfg, &grid)?;
    let initial = solitonscope_core::make_initial_condition(&recipe, &grid).at(st)?;
    let solver = cfg.solver.build(grid.dimension());
    let traj = evolve(&initial, &nl, &solver).at(st)?;

    out.text("conserved.csv", &io::conserved_csv(&traj))?;
    out.text(
        "trajectory.csv",
        &io::trajectory_csv(&traj, cfg.diagnostics.trajectory_every),
    )?;

    m.snapshots = traj.len();
    m.mass0 = traj.initial_mass();
    m.max_abs = traj.snapshots.iter().map(|s| s.max_abs()).fold(0.0, f64::max);
    if let Recipe::ExactSoliton { energy } = recipe {
        m.recipe_energy = Some(energy);
        let profile = solve_profile(energy, &nl, &grid).at(st)?;
        let last = traj.snapshots.last().unwrap();
        let diff: Vec<f64> = last
            .amplitude()
            .iter()
            .zip(&profile.u)
            .map(|(a, u)| (a - u).powi(2))
            .collect();
        m.soliton_l2 = Some(grid.integrate(&diff).sqrt());
    }
    if nl.is_free() && cfg.solver.sponge.is_none() {
        let c0 = traj.conserved[0];
        let k = kinetic_integral(&initial);
        let worst = traj
            .snapshots
            .iter()
            .zip(&traj.conserved)
            .map(|(s, c)| {
                let t = s.time;
                (c.variance - (c0.variance + 4.0 * c0.dilation * t + 4.0 * k * t * t)).abs() / c0.variance
            })
            .fold(0.0, f64::max);
        m.free_virial = Some(worst);
    }
    Ok(Context { cfg, nl, traj })
}

fn stage_hydro(ctx: &Context, out: &mut RunDir) -> CliResult<()> {
    let st = Stage::Hydro;
    let traj = &ctx.traj;
    let mut iwc = String::from("t,worst,tolerance,satisfied\n");
    let mut split = String::from("t,nodeless,total,gradient,flow,relative_error\n");
    for snap in &traj.snapshots {
        let frame = hydro_frame(snap, None);
        let status = iwc_indicator(&frame);
        let _ = writeln!(
            iwc,
            "{},{},{},{}",
            io::num(snap.time),
            io::num(status.worst),
            io::num(status.tolerance),
            u8::from(status.satisfied)
        );
        let k = kinetic_splitting(snap);
        let _ = writeln!(
            split,
            "{},{},{},{},{},{}",
            io::num(snap.time),
            u8::from(frame.is_nodeless()),
            io::num(k.total),
            io::num(k.gradient),
            io::num(k.flow),
            io::num(k.relative_error())
        );
    }
    out.text("iwc.csv", &iwc)?;
    out.text("splitting.csv", &split)?;
    out.text(
        "hydro_initial.csv",
        &io::hydro_csv(&hydro_frame(&traj.snapshots[0], None)),
    )?;
    out.text(
        "hydro_final.csv",
        &io::hydro_csv(&hydro_frame(traj.snapshots.last().unwrap(), None)),
    )?;

    let series = flux_series(traj, &ctx.cfg.diagnostics.radii).at(st)?;
    if series.stride_warning {
        log::info!("flux changes quickly between snapshots; the trapezoid column is unreliable");
    }
    out.text("flux.csv", &io::flux_csv(&series))?;
    let l1_tol = ctx.cfg.diagnostics.l1_tol.unwrap_or(1e-3 * traj.initial_mass());
    out.json(
        "classifier.json",
        &classify_report(&series, l1_tol, ctx.cfg.diagnostics.exterior_radius),
    )?;
    Ok(())
}

fn stage_boxes(ctx: &Context, out: &mut RunDir, m: &mut Metrics) -> CliResult<Option<GoodBox>> {
    let d = &ctx.cfg.diagnostics;
    let delta = d.delta.unwrap_or_else(|| default_delta(&ctx.traj));
    let boxes = if delta > 0.0 {
        find_good_boxes(&ctx.traj, delta, d.box_min_width, 0.0).at(Stage::Boxes)?
    } else {
        Vec::new()
    };
    out.json("boxes.json", &boxes)?;
    // the polar residuals need three samples each way; among the boxes that
    // have them, the widest carries the most phase information
    let times = ctx.traj.times();
    let grid = ctx.traj.grid();
    let best = boxes
        .iter()
        .copied()
        .filter(|b| {
            let rows = times.iter().filter(|&&t| t >= b.t_start && t <= b.t_end).count();
            rows >= 3 && nodes_in(grid, b.interval.0, b.interval.1).len() >= 3
        })
        .max_by(|a, b| (a.interval.1 - a.interval.0).total_cmp(&(b.interval.1 - b.interval.0)));
    m.boxes = Some(boxes);
    Ok(best)
}

fn stage_lift(
    ctx: &Context,
    gbox: &GoodBox,
    out: &mut RunDir,
    m: &mut Metrics,
) -> CliResult<solitonscope_core::PhaseSheet> {
    let st = Stage::Lift;
    let sheet = lift_phase(&ctx.traj, gbox).at(st)?;
    out.text("phase.csv", &io::phase_csv(&sheet))?;
    let polar = polar_residuals(&sheet, &ctx.traj, &ctx.nl).at(st)?;
    let lift = LiftMetrics {
        good_box: *gbox,
        reconstruction: sheet.reconstruction_error(&ctx.traj) / m.max_abs,
        nonzero_windings: sheet.plaquette_windings(&ctx.traj).iter().filter(|&&w| w != 0).count(),
        path_discrepancy: sheet.path_discrepancy(&ctx.traj),
        polar,
    };
    out.json("lift.json", &lift)?;
    m.lift = Some(lift);
    Ok(sheet)
}

fn stage_slope(
    ctx: &Context,
    sheet: &solitonscope_core::PhaseSheet,
    out: &mut RunDir,
    m: &mut Metrics,
) -> CliResult<()> {
    let st = Stage::Slope;
    let window = ctx.cfg.diagnostics.slope_window;
    let slope = SlopeMetrics {
        window,
        slope: phase_slope_window(sheet, window).at(st)?,
        final_quarter: phase_slope_window(sheet, 0.25).at(st)?,
    };
    out.json("slope.json", &slope)?;
    m.slope = Some(slope);
    Ok(())
}

fn fit_range(ctx: &Context) -> (f64, f64) {
    let [lo, hi] = ctx.cfg.diagnostics.fit_energy_range;
    (lo, hi)
}

fn stage_fit(ctx: &Context, interval: [f64; 2], out: &mut RunDir, m: &mut Metrics) -> CliResult<()> {
    let st = Stage::Fit;
    let grid = ctx.traj.grid();
    let eta = ctx.traj.snapshots.last().unwrap().amplitude();
    let iv = (interval[0], interval[1]);
    let (e_fit, distance) = fit_profile_in(&eta, &ctx.nl, grid, iv, fit_range(ctx)).at(st)?;
    let profile = solve_profile(e_fit, &ctx.nl, grid).at(st)?;
    out.text("profile.csv", &io::profile_csv(&profile))?;
    let sidecar = ProfileSidecar::from(&profile);
    out.json("profile.json", &sidecar)?;

    let mut weak = String::from("center,width,residual,scale,ratio\n");
    for r in weak_residuals(&profile, &ctx.nl) {
        let _ = writeln!(
            weak,
            "{},{},{},{},{}",
            io::num(r.bump.center),
            io::num(r.bump.width),
            io::num(r.residual),
            io::num(r.scale),
            io::num(r.ratio())
        );
    }
    out.text("weak.csv", &weak)?;
    m.fit = Some(FitMetrics {
        interval,
        e_fit,
        distance,
        profile: sidecar,
    });
    Ok(())
}

fn stage_distances(ctx: &Context, interval: [f64; 2], out: &mut RunDir) -> CliResult<()> {
    let st = Stage::Distances;
    let grid = ctx.traj.grid();
    let iv = (interval[0], interval[1]);
    let e_final = {
        let eta = ctx.traj.snapshots.last().unwrap().amplitude();
        fit_profile_in(&eta, &ctx.nl, grid, iv, fit_range(ctx)).at(st)?.0
    };
    let final_profile = solve_profile(e_final, &ctx.nl, grid).at(st)?;
    let mut csv = String::from("t,e_fit,l2_fit,l2_final,hs_final,sup_final\n");
    for snap in ctx.traj.snapshots.iter().step_by(ctx.cfg.diagnostics.distance_every) {
        let eta = snap.amplitude();
        let (e, d) = fit_profile_in(&eta, &ctx.nl, grid, iv, fit_range(ctx)).at(st)?;
        let l2 = profile_distance(&eta, &final_profile, iv, DistanceNorm::L2).at(st)?;
        let hs = profile_distance(&eta, &final_profile, iv, DistanceNorm::Hs(0.5)).at(st)?;
        let sup = profile_distance(&eta, &final_profile, iv, DistanceNorm::Sup).at(st)?;
        let row: Vec<String> = [snap.time, e, d, l2, hs, sup].iter().map(|&v| io::num(v)).collect();
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    out.text("distances.csv", &csv)?;
    Ok(())
}

/// Directory a config would write to, for callers that only need the path.
pub fn output_dir_of(cfg: &ExperimentConfig, opts: &RunOptions) -> PathBuf {
    cfg.resolve_output_dir(opts.output_dir.as_deref())
}

/// Re-judge a finished run from its artifacts and rewrite its report.
pub fn rejudge(dir: &Path) -> CliResult<RunReport> {
    let manifest = crate::artifacts::read_manifest(dir)?;
    if !manifest.complete {
        return Err(CliError::artifact(
            dir.display().to_string(),
            format!(
                "run is incomplete: {}",
                manifest.error.unwrap_or_else(|| "no error recorded".into())
            ),
        ));
    }
    let report = evaluate(dir)?;
    io::write_json(&dir.join(REPORT), &report)?;
    Ok(report)
}
