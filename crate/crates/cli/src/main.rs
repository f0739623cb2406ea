//! Command-line scenario runner: construct eigenstates and wavepackets,
//! emit autocorrelation series, density snapshots, Bohmian and classical
//! trajectories, and seeded trajectory ensembles as reproducible CSV data.

use pilotwave_cli::{config, presets};

use std::process::ExitCode;

use pilotwave::kepler::RadialDirection;

use config::{CliError, CliResult, ScenarioConfig};
use presets::{
    build_scene, emit_autocorr, emit_bohm, emit_classical, emit_eigen, emit_ensemble,
    emit_snapshots, finish_run, preset_config, run_preset, PRESET_NAMES,
};

const USAGE: &str = "\
pilotwave <command> [options]

commands:
  eigen       write one radial eigenstate as (r, u) CSV      [--n N --l L]
  autocorr    autocorrelation series over the time window
  snapshot    probability-density snapshots                  [--times-tcl a,b,..]
  bohm        guidance trajectories from initial radii       [--r0 a,b,..]
  classical   classical radial trajectory                    [--r0 X --l2 X --direction outward|inward]
  ensemble    seeded ensemble + equivariance distances       [--count N --compare-tcl a,b,..]
  run         run a named preset                             (fig1a fig1b fig2 fig3a fig3b fig4)

common options:
  --config FILE          layered key = value configuration file
  --set section.key=val  override any config key (repeatable)
  --seed N               shorthand for --set scenario.seed=N
  --out-dir DIR          shorthand for --set output.dir=DIR

exit codes: 0 success, 2 configuration error, 3 numerical/io failure";

struct ParsedArgs {
    command: String,
    preset: Option<String>,
    config_file: Option<String>,
    overrides: Vec<(String, String, String)>,
    n: u32,
    l: u32,
    r0_list: Vec<f64>,
    l2: Option<f64>,
    direction: RadialDirection,
    times_tcl: Vec<f64>,
    count: usize,
    compare_tcl: Vec<f64>,
}

fn parse_f64_list(value: &str, flag: &str) -> CliResult<Vec<f64>> {
    value
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("invalid number in {flag}: {v}")))
        })
        .collect()
}

fn parse_args(args: &[String]) -> CliResult<ParsedArgs> {
    let mut parsed = ParsedArgs {
        command: String::new(),
        preset: None,
        config_file: None,
        overrides: Vec::new(),
        n: 40,
        l: 1,
        r0_list: vec![2.0],
        l2: None,
        direction: RadialDirection::Outward,
        times_tcl: vec![0.0, 0.125, 0.25, 0.375, 0.5],
        count: 2000,
        compare_tcl: vec![0.25, 0.5],
    };
    let mut it = args.iter();
    parsed.command = it
        .next()
        .cloned()
        .ok_or_else(|| CliError::Config(format!("missing command\n\n{USAGE}")))?;

    let mut positional: Vec<String> = Vec::new();
    while let Some(arg) = it.next() {
        let mut value_of = |flag: &str| -> CliResult<String> {
            it.next()
                .cloned()
                .ok_or_else(|| CliError::Config(format!("{flag} needs a value")))
        };
        match arg.as_str() {
            "--config" => parsed.config_file = Some(value_of("--config")?),
            "--seed" => {
                let v = value_of("--seed")?;
                parsed.overrides.push(("scenario".into(), "seed".into(), v));
            }
            "--out-dir" => {
                let v = value_of("--out-dir")?;
                parsed.overrides.push(("output".into(), "dir".into(), v));
            }
            "--set" => {
                let v = value_of("--set")?;
                let (key_path, value) = v.split_once('=').ok_or_else(|| {
                    CliError::Config(format!("--set expects section.key=value, got {v}"))
                })?;
                let (section, key) = key_path.split_once('.').ok_or_else(|| {
                    CliError::Config(format!("--set expects section.key=value, got {v}"))
                })?;
                parsed
                    .overrides
                    .push((section.into(), key.into(), value.into()));
            }
            "--n" => {
                parsed.n = value_of("--n")?
                    .parse()
                    .map_err(|_| CliError::Config("invalid --n".into()))?
            }
            "--l" => {
                parsed.l = value_of("--l")?
                    .parse()
                    .map_err(|_| CliError::Config("invalid --l".into()))?
            }
            "--r0" => parsed.r0_list = parse_f64_list(&value_of("--r0")?, "--r0")?,
            "--l2" => {
                parsed.l2 = Some(
                    value_of("--l2")?
                        .parse()
                        .map_err(|_| CliError::Config("invalid --l2".into()))?,
                )
            }
            "--direction" => {
                parsed.direction = match value_of("--direction")?.as_str() {
                    "outward" => RadialDirection::Outward,
                    "inward" => RadialDirection::Inward,
                    other => {
                        return Err(CliError::Config(format!(
                            "invalid --direction: {other} (outward|inward)"
                        )))
                    }
                }
            }
            "--times-tcl" => {
                parsed.times_tcl = parse_f64_list(&value_of("--times-tcl")?, "--times-tcl")?
            }
            "--count" => {
                parsed.count = value_of("--count")?
                    .parse()
                    .map_err(|_| CliError::Config("invalid --count".into()))?
            }
            "--compare-tcl" => {
                parsed.compare_tcl = parse_f64_list(&value_of("--compare-tcl")?, "--compare-tcl")?
            }
            "--help" | "-h" => {
                return Err(CliError::Config(USAGE.to_string()));
            }
            other if other.starts_with("--") => {
                return Err(CliError::Config(format!(
                    "unknown flag: {other}\n\n{USAGE}"
                )));
            }
            other => positional.push(other.to_string()),
        }
    }
    if parsed.command == "run" {
        parsed.preset = positional.pop();
        if parsed.preset.is_none() {
            return Err(CliError::Config(format!(
                "run needs a preset name, one of {PRESET_NAMES:?}"
            )));
        }
    }
    if !positional.is_empty() {
        return Err(CliError::Config(format!(
            "unexpected argument: {}",
            positional[0]
        )));
    }
    Ok(parsed)
}

fn resolve_config(parsed: &ParsedArgs, base: ScenarioConfig) -> CliResult<ScenarioConfig> {
    let mut cfg = base;
    if let Some(path) = &parsed.config_file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {path}: {e}")))?;
        cfg.merge_file(&text)?;
    }
    for (section, key, value) in &parsed.overrides {
        cfg.set(section, key, value)?;
    }
    Ok(cfg)
}

fn execute(parsed: ParsedArgs) -> CliResult<Vec<String>> {
    let emitted = match parsed.command.as_str() {
        "eigen" => {
            let cfg = resolve_config(&parsed, ScenarioConfig::default())?;
            emit_eigen(&cfg, parsed.n, parsed.l)?
        }
        "autocorr" => {
            let base = ScenarioConfig {
                t_end_tcl: 15.0,
                samples: 6001,
                ..ScenarioConfig::default()
            };
            let cfg = resolve_config(&parsed, base)?;
            let ctx = build_scene(cfg)?;
            let files = emit_autocorr(&ctx)?;
            finish_run(&ctx.config.out_dir, &ctx.config.describe(), &files, &[])?;
            files
        }
        "snapshot" => {
            let cfg = resolve_config(&parsed, ScenarioConfig::default())?;
            let ctx = build_scene(cfg)?;
            let files = emit_snapshots(&ctx, &parsed.times_tcl)?;
            finish_run(&ctx.config.out_dir, &ctx.config.describe(), &files, &[])?;
            files
        }
        "bohm" => {
            let cfg = resolve_config(&parsed, ScenarioConfig::default())?;
            let ctx = build_scene(cfg)?;
            let (files, notes) = emit_bohm(&ctx, &parsed.r0_list)?;
            finish_run(&ctx.config.out_dir, &ctx.config.describe(), &files, &notes)?;
            files
        }
        "classical" => {
            let cfg = resolve_config(&parsed, ScenarioConfig::default())?;
            let ctx = build_scene(cfg)?;
            let r0 = *parsed
                .r0_list
                .first()
                .ok_or_else(|| CliError::Config("--r0 needs a value".into()))?;
            let l2 = parsed
                .l2
                .unwrap_or((ctx.config.l * (ctx.config.l + 1)) as f64);
            let files = emit_classical(&ctx, r0, l2, parsed.direction)?;
            finish_run(&ctx.config.out_dir, &ctx.config.describe(), &files, &[])?;
            files
        }
        "ensemble" => {
            let base = ScenarioConfig {
                t_end_tcl: 0.5,
                samples: 2,
                ..ScenarioConfig::default()
            };
            let cfg = resolve_config(&parsed, base)?;
            let ctx = build_scene(cfg)?;
            let (files, notes) = emit_ensemble(&ctx, parsed.count, &parsed.compare_tcl)?;
            finish_run(&ctx.config.out_dir, &ctx.config.describe(), &files, &notes)?;
            files
        }
        "run" => {
            let name = parsed.preset.clone().expect("checked in parse_args");
            let base = preset_config(&name).ok_or_else(|| {
                CliError::Config(format!(
                    "unknown preset: {name} (expected one of {PRESET_NAMES:?})"
                ))
            })?;
            let cfg = resolve_config(&parsed, base)?;
            run_preset(cfg)?
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown command: {other}\n\n{USAGE}"
            )))
        }
    };
    Ok(emitted.into_iter().map(|f| f.name).collect())
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match parse_args(&args).and_then(execute) {
        Ok(files) => {
            for f in files {
                println!("wrote {f}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
