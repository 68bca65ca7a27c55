use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use indi_hinf::analysis::{closed_loop_sensitivities, margins, template_compliance, write_sensitivity_csv, Margins, TemplateCompliance};
use indi_hinf::linsys::{FrequencyGrid, StateSpaceSystem};
use indi_hinf::sim::{compare_controllers, compute_metrics, run_scenario, ControllerChoice, Scenario};
use indi_hinf::synthesis::{rigid_axis, ControllerKind, DesignProfile, LoopKind, Structure, SynthesisReport, WeightSet};
use indi_hinf::sysid::{estimate_parameters, generate_log, EstimationConfig, FlightLog, SyntheticLogConfig};
use indi_hinf::vehicle::{measurement_filter, QuadcopterParams};

use crate::output::{sig4, Staged};
use crate::{out_dir, CliError, Common, DesignArgs, EXIT_DIVERGED, EXIT_OK};

const ALL_KINDS: &str = "pd,hinf-structured,hinf-full";
/// Improvement over PD that counts as meeting the disturbance-rejection target, %.
const IMPROVEMENT_TARGET: f64 = 50.0;

fn looks_like_path(s: &str) -> bool {
    s.contains('/') || s.contains('\\') || s.ends_with(".toml")
}

fn read_input(path: &str, what: &str) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Run(format!("cannot read {what} '{path}': {e}")))
}

fn load_params(name: &str) -> Result<QuadcopterParams, CliError> {
    if looks_like_path(name) || Path::new(name).is_file() {
        Ok(QuadcopterParams::from_toml(&read_input(name, "parameter file")?)?)
    } else {
        Ok(QuadcopterParams::preset(name)?)
    }
}

fn load_profile(weights: Option<&str>, params: &QuadcopterParams) -> Result<DesignProfile, CliError> {
    match weights {
        Some(w) if looks_like_path(w) || Path::new(w).is_file() => Ok(DesignProfile::from_toml(&read_input(w, "weight file")?)?),
        Some(w) => Ok(DesignProfile::preset(w)?),
        None => Ok(DesignProfile::for_vehicle(&params.name)?),
    }
}

fn load_scenario(name: &str) -> Result<Scenario, CliError> {
    if looks_like_path(name) || Path::new(name).is_file() {
        Ok(Scenario::from_toml(&read_input(name, "scenario file")?)?)
    } else {
        Ok(Scenario::preset(name)?)
    }
}

fn parse_kinds(list: Option<&str>) -> Result<Vec<ControllerKind>, CliError> {
    let kinds = list
        .unwrap_or(ALL_KINDS)
        .split(',')
        .map(|s| s.trim().parse::<ControllerKind>().map_err(|e| CliError::Usage(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    if kinds.is_empty() {
        return Err(CliError::Usage("no controllers given".into()));
    }
    Ok(kinds)
}

fn parse_structure(s: Option<&str>) -> Result<Option<Structure>, CliError> {
    let Some(s) = s else { return Ok(None) };
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || CliError::Usage(format!("structure must be 'outer,inner', got '{s}'"));
    if parts.len() != 2 {
        return Err(bad());
    }
    let outer = parts[0].parse().map_err(|_| bad())?;
    let inner = parts[1].parse().map_err(|_| bad())?;
    Structure::new(outer, inner).map(Some).map_err(|e| CliError::Usage(e.to_string()))
}

fn parse_loop(s: &str) -> Result<LoopKind, CliError> {
    s.parse().map_err(|e: indi_hinf::error::Error| CliError::Usage(e.to_string()))
}

fn to_toml<T: Serialize>(v: &T) -> Result<String, CliError> {
    toml::to_string(v).map_err(|e| CliError::Run(e.to_string()))
}

struct Setup {
    params: QuadcopterParams,
    profile: DesignProfile,
    structure: Option<Structure>,
    seed: u64,
}

fn setup(common: &Common, design: &DesignArgs, default_preset: &str) -> Result<Setup, CliError> {
    let structure = parse_structure(design.structure.as_deref())?;
    let params = load_params(common.preset.as_deref().unwrap_or(default_preset))?;
    let profile = load_profile(design.weights.as_deref(), &params)?;
    Ok(Setup { params, profile, structure, seed: common.seed.unwrap_or(0) })
}

fn design(s: &Setup, l: LoopKind, k: ControllerKind) -> Result<SynthesisReport, CliError> {
    Ok(s.profile.design(l, k, &s.params, s.structure, s.seed)?)
}

fn choice(s: &Setup, k: ControllerKind) -> Result<ControllerChoice, CliError> {
    Ok(ControllerChoice {
        label: k.label().into(),
        attitude: design(s, LoopKind::Attitude, k)?.controller,
        guidance: design(s, LoopKind::Guidance, k)?.controller,
    })
}

pub fn synth(common: &Common, d: &DesignArgs, loop_kind: &str, args: &[String]) -> Result<u8, CliError> {
    let l = parse_loop(loop_kind)?;
    let kinds = parse_kinds(d.controllers.as_deref())?;
    let s = setup(common, d, "bebop-sim")?;
    let reports = kinds.iter().map(|&k| design(&s, l, k)).collect::<Result<Vec<_>, _>>()?;
    let out = Staged::new(&out_dir(common, "synth"))?;
    for r in &reports {
        let stem = format!("{}-{}", loop_kind, r.controller.kind.label());
        out.write(&format!("{stem}.controller.toml"), &r.controller.to_toml()?)?;
        out.write(&format!("{stem}.report.toml"), &r.to_toml()?)?;
        let gamma = r.gamma.map(sig4).unwrap_or_else(|| "-".into());
        let norms: Vec<String> = r.channel_norms.iter().map(|(c, v)| format!("{c} {}", sig4(*v))).collect();
        println!("{stem}: gamma {gamma}, order {}, {}", r.controller.k.order(), norms.join(", "));
    }
    let dir = out.commit("synth", args)?;
    println!("wrote {}", dir.display());
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct LoopAnalysis {
    controller: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bandwidth: Option<f64>,
    s_di_at_0_1: f64,
    s_do_at_0_1: f64,
    margins: Margins,
    compliance: TemplateCompliance,
}

pub fn analyze(common: &Common, d: &DesignArgs, loop_kind: &str, args: &[String]) -> Result<u8, CliError> {
    let l = parse_loop(loop_kind)?;
    let kinds = parse_kinds(d.controllers.as_deref())?;
    let s = setup(common, d, "bebop-sim")?;
    let act = StateSpaceSystem::first_order_lag(s.profile.plant_tau(l, &s.params))?;
    let h = measurement_filter(&s.params.filter)?;
    let weights = WeightSet::new(s.profile.loop_design(l).weights)?;
    let grid = FrequencyGrid::analysis_default();
    let mut sets = Vec::new();
    let mut results = Vec::new();
    for &k in &kinds {
        let r = design(&s, l, k)?;
        let set = closed_loop_sensitivities(&rigid_axis(), &r.controller.k, Some(&h), &act, &grid)?;
        let m = margins(&set.s)?;
        let c = template_compliance(&set, &weights, r.gamma.unwrap_or(1.0))?;
        println!(
            "{}: bandwidth {} rad/s, |S_di(0.1)| {}, modulus {}, GM {} dB, PM {} deg",
            k.label(),
            set.bandwidth().map(sig4).unwrap_or_else(|| "-".into()),
            sig4(set.s_di_at(0.1)?),
            sig4(m.modulus),
            sig4(m.gain_db),
            sig4(m.phase_deg)
        );
        results.push(LoopAnalysis {
            controller: k.label().into(),
            gamma: r.gamma,
            bandwidth: set.bandwidth(),
            s_di_at_0_1: set.s_di_at(0.1)?,
            s_do_at_0_1: set.s_do_at(0.1)?,
            margins: m,
            compliance: c,
        });
        sets.push((k.label(), set));
    }
    let out = Staged::new(&out_dir(common, "analyze"))?;
    let refs: Vec<(&str, &_)> = sets.iter().map(|(n, s)| (*n, s)).collect();
    write_sensitivity_csv(out.create("sensitivities.csv")?, &refs, Some(&weights.we))?;
    let mut doc = BTreeMap::new();
    doc.insert("loop", results);
    out.write("analysis.toml", &to_toml(&doc)?)?;
    let dir = out.commit("analyze", args)?;
    println!("wrote {}", dir.display());
    Ok(EXIT_OK)
}

pub fn simulate(common: &Common, d: &DesignArgs, scenario: &str, args: &[String]) -> Result<u8, CliError> {
    let mut sc = load_scenario(scenario)?;
    if let Some(seed) = common.seed {
        sc.seed = seed;
    }
    let s = setup(common, d, &sc.preset)?;
    let ctrl = match d.controllers.as_deref() {
        None => ControllerChoice {
            label: format!("{}+{}", sc.controllers.attitude.label(), sc.controllers.guidance.label()),
            attitude: design(&s, LoopKind::Attitude, sc.controllers.attitude)?.controller,
            guidance: design(&s, LoopKind::Guidance, sc.controllers.guidance)?.controller,
        },
        Some(list) => {
            let kinds = parse_kinds(Some(list))?;
            if kinds.len() != 1 {
                return Err(CliError::Usage("simulate takes one controller kind; use compare for several".into()));
            }
            choice(&s, kinds[0])?
        }
    };
    let trace = run_scenario(&sc, &s.params, &ctrl)?;
    let out = Staged::new(&out_dir(common, "simulate"))?;
    trace.write_csv(out.create("trace.csv")?)?;
    #[derive(Serialize)]
    struct RunSummary<'a> {
        scenario: &'a str,
        controller: &'a str,
        status: &'a indi_hinf::sim::RunStatus,
        #[serde(skip_serializing_if = "Option::is_none")]
        metrics: Option<indi_hinf::sim::Metrics>,
    }
    let metrics = if trace.status.is_completed() { Some(compute_metrics(&trace, &sc.metric)?) } else { None };
    out.write("run.toml", &to_toml(&RunSummary { scenario: &sc.name, controller: &ctrl.label, status: &trace.status, metrics })?)?;
    match &metrics {
        Some(m) => println!("{} / {}: peak {} deviation {}", sc.name, ctrl.label, m.signal.label(), sig4(m.peak_deviation)),
        None => println!("{} / {}: {:?}", sc.name, ctrl.label, trace.status),
    }
    let completed = trace.status.is_completed();
    let dir = out.commit("simulate", args)?;
    println!("wrote {}", dir.display());
    Ok(if completed { EXIT_OK } else { EXIT_DIVERGED })
}

pub fn compare(common: &Common, d: &DesignArgs, scenarios: &str, args: &[String]) -> Result<u8, CliError> {
    let kinds = parse_kinds(d.controllers.as_deref())?;
    if kinds.len() < 2 {
        return Err(CliError::Usage("compare needs at least two controllers".into()));
    }
    let mut list = Vec::new();
    for name in scenarios.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let mut sc = load_scenario(name)?;
        if let Some(seed) = common.seed {
            sc.seed = seed;
        }
        list.push(sc);
    }
    if list.is_empty() {
        return Err(CliError::Usage("no scenario given".into()));
    }
    // One design per vehicle preset, shared by its scenarios.
    let mut designs: BTreeMap<String, (Setup, Vec<ControllerChoice>)> = BTreeMap::new();
    for sc in &list {
        let key = common.preset.clone().unwrap_or_else(|| sc.preset.clone());
        if !designs.contains_key(&key) {
            let s = setup(common, d, &key)?;
            let ch = kinds.iter().map(|&k| choice(&s, k)).collect::<Result<Vec<_>, _>>()?;
            designs.insert(key, (s, ch));
        }
    }
    let runs = list
        .par_iter()
        .map(|sc| {
            let key = common.preset.clone().unwrap_or_else(|| sc.preset.clone());
            let (s, ch) = &designs[&key];
            compare_controllers(sc, &s.params, ch)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let out = Staged::new(&out_dir(common, "compare"))?;
    let mut diverged = false;
    for (sc, (cmp, traces)) in list.iter().zip(&runs) {
        fs::create_dir_all(out.path(&sc.name))?;
        out.write(&format!("{}/comparison.toml", sc.name), &cmp.to_toml()?)?;
        cmp.write_csv(out.create(&format!("{}/comparison.csv", sc.name))?)?;
        for t in traces {
            t.write_csv(out.create(&format!("{}/trace-{}.csv", sc.name, t.controller))?)?;
        }
        println!("{} (baseline {}):", sc.name, cmp.baseline);
        for r in &cmp.rows {
            match (&r.metrics, r.status.is_completed()) {
                (Some(m), true) => println!(
                    "  {:<16} peak {} improvement {}",
                    r.controller,
                    sig4(m.peak_deviation),
                    r.improvement_pct.map(|v| format!("{}%", sig4(v))).unwrap_or_else(|| "-".into())
                ),
                _ => println!("  {:<16} {:?}", r.controller, r.status),
            }
        }
        let met = cmp.rows[1..].iter().any(|r| r.improvement_pct.is_some_and(|v| v >= IMPROVEMENT_TARGET));
        println!("  improvement target ({IMPROVEMENT_TARGET}% over {}) met: {}", cmp.baseline, if met { "yes" } else { "no" });
        diverged |= cmp.any_diverged();
    }
    let dir = out.commit("compare", args)?;
    println!("wrote {}", dir.display());
    Ok(if diverged { EXIT_DIVERGED } else { EXIT_OK })
}

pub fn estimate(common: &Common, log: Option<&Path>, noise: f64, args: &[String]) -> Result<u8, CliError> {
    let params = load_params(common.preset.as_deref().unwrap_or("bebop-sim"))?;
    let cfg = EstimationConfig::for_vehicle(&params);
    let (log, synthetic) = match log {
        Some(p) => {
            let f = fs::File::open(p).map_err(|e| CliError::Run(format!("cannot read log '{}': {e}", p.display())))?;
            (FlightLog::read_csv(f)?, false)
        }
        None => {
            if !(noise >= 0.0) {
                return Err(CliError::Usage("noise must be >= 0".into()));
            }
            let mut c = SyntheticLogConfig::for_vehicle(&params, common.seed.unwrap_or(0))?;
            c.noise = noise;
            (generate_log(&c)?, true)
        }
    };
    let mut fit_log = log.clone();
    // The estimator works from throttle commands, as on hardware.
    fit_log.motor_speed = None;
    let r = estimate_parameters(&fit_log, &cfg, None)?;
    let out = Staged::new(&out_dir(common, "estimate"))?;
    out.write("estimate.toml", &r.to_toml()?)?;
    out.write("params.toml", &r.apply_to(&params)?.to_toml()?)?;
    if synthetic {
        log.write_csv(out.create("log.csv")?)?;
    }
    println!(
        "tau_m {} s (1/{}), fit {}%, converged {}",
        sig4(r.tau_m),
        sig4(1.0 / r.tau_m),
        sig4(r.fit_pct),
        r.converged
    );
    let dir = out.commit("estimate", args)?;
    println!("wrote {}", dir.display());
    Ok(EXIT_OK)
}
