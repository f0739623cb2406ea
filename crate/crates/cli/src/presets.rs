//! Scenario orchestration: building the shared computation context and
//! emitting the data products for each subcommand and preset.

use std::path::Path;
use std::sync::Arc;

use pilotwave::eigen::{compute_eigenstate, Eigenstate};
use pilotwave::grid::{build_grid, RadialGrid};
use pilotwave::kepler::{integrate_classical, RadialDirection};
use pilotwave::packet::{
    autocorrelation, build_basis, classical_period, gaussian_coefficients, CoefficientSet,
    PulseModel, SuperposedField,
};
use pilotwave::pilot::{equivariance_distance, sample_positions, Guidance};
use pilotwave::trajectory::{linspace, Trajectory, TrajectoryStatus};

use crate::config::{CliError, CliResult, PulseMode, ScenarioConfig};
use crate::emit::{write_manifest, write_series, EmittedFile};

fn numerical(e: pilotwave::Error) -> CliError {
    CliError::Numerical(e.to_string())
}

/// Emitted files plus key/value notes destined for the run manifest.
pub type FilesAndNotes = (Vec<EmittedFile>, Vec<(String, String)>);

/// Everything a scenario needs, built once.
pub struct SceneContext {
    pub config: ScenarioConfig,
    pub grid: Arc<RadialGrid>,
    pub coeffs: CoefficientSet,
    pub field: SuperposedField,
    pub t_cl: f64,
}

pub fn build_scene(config: ScenarioConfig) -> CliResult<SceneContext> {
    config.validate()?;
    let grid =
        Arc::new(build_grid(config.r_max, config.points, config.mapping).map_err(numerical)?);
    let coeffs = gaussian_coefficients(config.n0, config.delta_n, config.weight_mode, config.l)
        .map_err(numerical)?;
    let mut basis = build_basis(&coeffs, &grid).map_err(numerical)?;
    if config.pulse_mode == PulseMode::TurnOn {
        basis.push(Arc::new(
            compute_eigenstate(1, 0, &grid).map_err(numerical)?,
        ));
    }
    let pulse: PulseModel = config.pulse()?;
    let field = SuperposedField::new(coeffs.clone(), &basis, pulse).map_err(numerical)?;
    let t_cl = classical_period(config.n0);
    Ok(SceneContext {
        config,
        grid,
        coeffs,
        field,
        t_cl,
    })
}

fn trajectory_rows(traj: &Trajectory, t_cl: f64) -> Vec<Vec<f64>> {
    traj.samples
        .iter()
        .map(|s| vec![s.t, s.t / t_cl, s.r, s.v])
        .collect()
}

fn status_label(status: &TrajectoryStatus) -> String {
    match status {
        TrajectoryStatus::Completed => "completed".to_string(),
        TrajectoryStatus::StepUnderflow { t } => format!("step-underflow at t={t:.6e}"),
        TrajectoryStatus::LeftGrid { t, r } => format!("left-grid at t={t:.6e} r={r:.6e}"),
    }
}

fn r0_label(r0: f64) -> String {
    if (r0 - r0.round()).abs() < 1e-9 {
        format!("{:.0}", r0.round())
    } else {
        format!("{r0}")
    }
}

pub fn emit_eigen(config: &ScenarioConfig, n: u32, l: u32) -> CliResult<Vec<EmittedFile>> {
    config.validate()?;
    let grid =
        Arc::new(build_grid(config.r_max, config.points, config.mapping).map_err(numerical)?);
    let state: Eigenstate = compute_eigenstate(n, l, &grid).map_err(numerical)?;
    let mut meta = config.describe();
    meta.push(("eigen.n".into(), n.to_string()));
    meta.push(("eigen.l".into(), l.to_string()));
    meta.push(("eigen.energy_au".into(), format!("{:.16e}", state.energy())));
    let rows: Vec<Vec<f64>> = grid
        .nodes()
        .iter()
        .zip(state.samples())
        .map(|(r, u)| vec![*r, *u])
        .collect();
    let file = write_series(
        &config.out_dir,
        &format!("eigen_n{n}_l{l}.csv"),
        &meta,
        &["r", "u"],
        &rows,
    )?;
    Ok(vec![file])
}

pub fn emit_autocorr(ctx: &SceneContext) -> CliResult<Vec<EmittedFile>> {
    let cfg = &ctx.config;
    let times = linspace(
        cfg.t_start_tcl * ctx.t_cl,
        cfg.t_end_tcl * ctx.t_cl,
        cfg.samples,
    );
    let c = autocorrelation(&ctx.coeffs, &times);
    let rows: Vec<Vec<f64>> = times
        .iter()
        .zip(c.iter())
        .map(|(t, z)| vec![*t, *t / ctx.t_cl, z.re, z.im, z.norm_sqr()])
        .collect();
    let file = write_series(
        &cfg.out_dir,
        "autocorr.csv",
        &cfg.describe(),
        &["t_au", "t_over_Tcl", "ReC", "ImC", "absC2"],
        &rows,
    )?;
    Ok(vec![file])
}

pub fn emit_snapshots(ctx: &SceneContext, times_tcl: &[f64]) -> CliResult<Vec<EmittedFile>> {
    let cfg = &ctx.config;
    let mut files = Vec::new();
    for (i, &f) in times_tcl.iter().enumerate() {
        let t = f * ctx.t_cl;
        let snap = ctx.field.snapshot(t);
        let mut meta = cfg.describe();
        meta.push(("snapshot.t_au".into(), format!("{t:.16e}")));
        meta.push(("snapshot.t_over_tcl".into(), format!("{f}")));
        meta.push((
            "snapshot.total_norm".into(),
            format!("{:.16e}", snap.total_norm()),
        ));
        meta.push((
            "snapshot.expectation_r_au".into(),
            format!("{:.16e}", snap.expectation_r()),
        ));
        let rows: Vec<Vec<f64>> = ctx
            .grid
            .nodes()
            .iter()
            .zip(snap.rho2())
            .map(|(r, d)| vec![*r, *d])
            .collect();
        files.push(write_series(
            &cfg.out_dir,
            &format!("snapshot_{i}.csv"),
            &meta,
            &["r", "rho2"],
            &rows,
        )?);
    }
    Ok(files)
}

/// Bohmian trajectories from the given initial radii over the scenario time
/// window; returns files plus manifest notes (per-member status, ordering).
pub fn emit_bohm(ctx: &SceneContext, r0s: &[f64]) -> CliResult<FilesAndNotes> {
    let cfg = &ctx.config;
    let (t0, t1) = (cfg.t_start_tcl * ctx.t_cl, cfg.t_end_tcl * ctx.t_cl);
    let times = linspace(t0, t1, cfg.samples);
    let guidance = Guidance::new(&ctx.field, cfg.integrator, t0, t1).map_err(numerical)?;
    let run = guidance
        .run_ensemble(r0s, t0, t1, &times)
        .map_err(numerical)?;
    let mut files = Vec::new();
    let mut notes = Vec::new();
    for traj in &run.trajectories {
        let name = format!("bohm_r0_{}.csv", r0_label(traj.initial_r));
        let mut meta = cfg.describe();
        meta.push(("trajectory.kind".into(), "bohm".into()));
        meta.push(("trajectory.r0_au".into(), format!("{}", traj.initial_r)));
        meta.push(("trajectory.status".into(), status_label(&traj.status)));
        files.push(write_series(
            &cfg.out_dir,
            &name,
            &meta,
            &["t_au", "t_over_Tcl", "r_au", "v_au"],
            &trajectory_rows(traj, ctx.t_cl),
        )?);
        notes.push((format!("{name}.status"), status_label(&traj.status)));
    }
    notes.push((
        "ordering_preserved".into(),
        run.ordering_preserved.to_string(),
    ));
    Ok((files, notes))
}

pub fn emit_classical(
    ctx: &SceneContext,
    r0: f64,
    l_squared: f64,
    direction: RadialDirection,
) -> CliResult<Vec<EmittedFile>> {
    let cfg = &ctx.config;
    let (t0, t1) = (cfg.t_start_tcl * ctx.t_cl, cfg.t_end_tcl * ctx.t_cl);
    let times = linspace(t0, t1, cfg.samples);
    let energy = pilotwave::eigen::eigen_energy(cfg.n0).map_err(numerical)?;
    let traj =
        integrate_classical(r0, energy, l_squared, direction, t0, t1, &times).map_err(numerical)?;
    let mut meta = cfg.describe();
    meta.push(("trajectory.kind".into(), "classical".into()));
    meta.push(("trajectory.r0_au".into(), format!("{r0}")));
    meta.push(("trajectory.energy_au".into(), format!("{energy:.16e}")));
    meta.push(("trajectory.l_squared".into(), format!("{l_squared}")));
    let file = write_series(
        &cfg.out_dir,
        &format!("classical_r0_{}.csv", r0_label(r0)),
        &meta,
        &["t_au", "t_over_Tcl", "r_au", "v_au"],
        &trajectory_rows(&traj, ctx.t_cl),
    )?;
    Ok(vec![file])
}

pub fn emit_expectation(ctx: &SceneContext) -> CliResult<Vec<EmittedFile>> {
    let cfg = &ctx.config;
    let times = linspace(
        cfg.t_start_tcl * ctx.t_cl,
        cfg.t_end_tcl * ctx.t_cl,
        cfg.samples,
    );
    let rows: Vec<Vec<f64>> = times
        .iter()
        .map(|&t| {
            let snap = ctx.field.snapshot(t);
            vec![t, t / ctx.t_cl, snap.expectation_r()]
        })
        .collect();
    let file = write_series(
        &cfg.out_dir,
        "expectation_r.csv",
        &cfg.describe(),
        &["t_au", "t_over_Tcl", "r_mean_au"],
        &rows,
    )?;
    Ok(vec![file])
}

/// Sample `count` positions from ρ²(·, t_start), evolve the ensemble over
/// the scenario window, write one trajectory file per member plus the
/// ensemble manifest (member files, seed, per-member exit status), and
/// record equivariance distances at the requested comparison times.
pub fn emit_ensemble(
    ctx: &SceneContext,
    count: usize,
    compare_tcl: &[f64],
) -> CliResult<FilesAndNotes> {
    let cfg = &ctx.config;
    let (t0, t1) = (cfg.t_start_tcl * ctx.t_cl, cfg.t_end_tcl * ctx.t_cl);
    let snap0 = ctx.field.snapshot(t0);
    let positions = sample_positions(&snap0, count, cfg.seed).map_err(numerical)?;
    let mut sample_times: Vec<f64> = compare_tcl.iter().map(|f| f * ctx.t_cl).collect();
    sample_times.sort_by(f64::total_cmp);
    sample_times.dedup();
    let guidance = Guidance::new(&ctx.field, cfg.integrator, t0, t1).map_err(numerical)?;
    let run = guidance
        .run_ensemble(&positions, t0, t1, &sample_times)
        .map_err(numerical)?;

    let mut notes = vec![
        ("ensemble.count".into(), count.to_string()),
        ("ensemble.seed".into(), cfg.seed.to_string()),
        (
            "ensemble.ordering_preserved".into(),
            run.ordering_preserved.to_string(),
        ),
    ];
    for &f in compare_tcl {
        let t = f * ctx.t_cl;
        let snap = ctx.field.snapshot(t);
        let tv = equivariance_distance(&run.trajectories, &snap, t).map_err(numerical)?;
        notes.push((format!("equivariance.tv_at_{f}Tcl"), format!("{tv:.6}")));
    }

    let mut files = Vec::with_capacity(count + 1);
    let mut manifest_lines = String::new();
    use std::fmt::Write as _;
    writeln!(manifest_lines, "# ensemble manifest").expect("string write");
    writeln!(manifest_lines, "seed = {}", cfg.seed).expect("string write");
    writeln!(manifest_lines, "count = {count}").expect("string write");
    for (i, traj) in run.trajectories.iter().enumerate() {
        let name = format!("member_{i:04}.csv");
        let mut meta = cfg.describe();
        meta.push(("trajectory.kind".into(), "bohm".into()));
        meta.push(("trajectory.index".into(), i.to_string()));
        meta.push((
            "trajectory.r0_au".into(),
            format!("{:.16e}", traj.initial_r),
        ));
        meta.push(("trajectory.status".into(), status_label(&traj.status)));
        files.push(write_series(
            &cfg.out_dir,
            &name,
            &meta,
            &["t_au", "t_over_Tcl", "r_au", "v_au"],
            &trajectory_rows(traj, ctx.t_cl),
        )?);
        writeln!(
            manifest_lines,
            "{name} seed={} index={i} r0={:.16e} status={}",
            cfg.seed,
            traj.initial_r,
            status_label(&traj.status)
        )
        .expect("string write");
    }
    std::fs::create_dir_all(&cfg.out_dir)?;
    let manifest_bytes = manifest_lines.into_bytes();
    std::fs::write(cfg.out_dir.join("ensemble_manifest.txt"), &manifest_bytes)?;
    files.push(EmittedFile {
        name: "ensemble_manifest.txt".into(),
        bytes: manifest_bytes.len(),
        fnv1a64: crate::emit::fnv1a64(&manifest_bytes),
    });
    Ok((files, notes))
}

/// Built-in scenario presets.
pub fn preset_config(name: &str) -> Option<ScenarioConfig> {
    let base = |delta_n: f64, t_end_tcl: f64, samples: usize| ScenarioConfig {
        name: name.to_string(),
        delta_n,
        t_end_tcl,
        samples,
        ..ScenarioConfig::default()
    };
    match name {
        "fig1a" => Some(base(0.75, 15.0, 6001)),
        "fig1b" => Some(base(1.5, 15.0, 6001)),
        "fig2" => Some(base(1.5, 0.5, 5)),
        "fig3a" => Some(base(0.75, 3.0, 1201)),
        "fig3b" => Some(base(1.5, 3.0, 1201)),
        "fig4" => Some(base(1.5, 0.7, 561)),
        _ => None,
    }
}

pub const PRESET_NAMES: [&str; 6] = ["fig1a", "fig1b", "fig2", "fig3a", "fig3b", "fig4"];

/// Run one preset end to end and write its manifest.
pub fn run_preset(config: ScenarioConfig) -> CliResult<Vec<EmittedFile>> {
    let name = config.name.clone();
    let ctx = build_scene(config)?;
    let mut files = Vec::new();
    let mut notes: Vec<(String, String)> = Vec::new();
    match name.as_str() {
        "fig1a" | "fig1b" => {
            files.extend(emit_autocorr(&ctx)?);
        }
        "fig2" => {
            files.extend(emit_snapshots(&ctx, &[0.0, 0.125, 0.25, 0.375, 0.5])?);
        }
        "fig3a" | "fig3b" => {
            let (f, n) = emit_bohm(&ctx, &[1.0, 2.0, 6.0, 10.0])?;
            files.extend(f);
            notes.extend(n);
        }
        "fig4" => {
            files.extend(emit_classical(
                &ctx,
                2.0,
                (ctx.config.l * (ctx.config.l + 1)) as f64,
                RadialDirection::Outward,
            )?);
            let (f, n) = emit_bohm(&ctx, &[2.0, 1000.0])?;
            files.extend(f);
            notes.extend(n);
            files.extend(emit_expectation(&ctx)?);
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown preset: {other} (expected one of {PRESET_NAMES:?})"
            )))
        }
    }
    write_manifest(&ctx.config.out_dir, &ctx.config.describe(), &files, &notes)?;
    Ok(files)
}

/// Write a manifest for an ad-hoc subcommand run.
pub fn finish_run(
    out_dir: &Path,
    config_lines: &[(String, String)],
    files: &[EmittedFile],
    notes: &[(String, String)],
) -> CliResult<()> {
    write_manifest(out_dir, config_lines, files, notes)?;
    Ok(())
}
