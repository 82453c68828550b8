//! Subcommand execution: resolve the run configuration (file, then flag
//! overrides, then per-command defaults), run the core computation, and emit
//! text, JSON, or CSV.

use mmqkd_core::calibration::{effective_parameters, knowledge_rate_comparison, KnowledgeModel};
use mmqkd_core::montecarlo::{run_fluctuating, summarize, FluctuationSpec};
use mmqkd_core::security::{self, ContourGrid, SweepAxis, SweepGrid};
use mmqkd_core::{key_rate, transmittance_from_distance_km, Scenario};

use crate::config::{parse_grouping, AxisArg, RunConfig, SweepConfig, TrustArg};
use crate::output::{csv_row, maybe_clamp, sig, Sink};
use crate::{
    CliError, CommonArgs, CompareKnowledgeArgs, ContourArgs, DumpConfigArgs, KeyrateArgs,
    MonteCarloArgs, SweepArgs, Table1Args,
};

/// Loads the config file when given and overlays the common flags.
fn resolve(common: &CommonArgs, excess_noise: Option<f64>) -> Result<RunConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.scenario
        .merge_flags(&common.scenario_flags(excess_noise));
    if common.out.is_some() {
        cfg.output.out = common.out.clone();
    }
    if common.clamp {
        cfg.output.clamp = true;
    }
    if common.jobs.is_some() {
        cfg.output.jobs = common.jobs;
    }
    Ok(cfg)
}

fn dump(cfg: &RunConfig) -> Result<(), CliError> {
    let mut sink = Sink::open(&cfg.output.out)?;
    sink.line(cfg.to_toml()?.trim_end())?;
    sink.finish()
}

fn sanitize(msg: &str) -> String {
    msg.replace([',', '\n'], " ")
}

fn lambda_report(s: &Scenario) -> String {
    let fmt = |w: &mmqkd_core::DetectionWeights| {
        w.lambdas_squared()
            .iter()
            .map(|l| format!("{l:.6}"))
            .collect::<Vec<_>>()
            .join(",")
    };
    if s.alice_weights == s.bob_weights {
        format!("normalized lambda^2: {}", fmt(&s.alice_weights))
    } else {
        format!(
            "normalized lambda^2: alice {} | bob {}",
            fmt(&s.alice_weights),
            fmt(&s.bob_weights)
        )
    }
}

pub fn keyrate(args: KeyrateArgs) -> Result<(), CliError> {
    let mut cfg = resolve(&args.common, args.excess_noise)?;
    if args.json {
        cfg.output.json = true;
    }
    if args.common.dump_config {
        return dump(&cfg);
    }
    let scenario = cfg.scenario.build()?;
    let report = key_rate(&scenario).map_err(|e| CliError::Numerical(e.to_string()))?;
    let shown_rate = maybe_clamp(report.key_rate, cfg.output.clamp);

    let mut sink = Sink::open(&cfg.output.out)?;
    if cfg.output.json {
        let mut value =
            serde_json::to_value(&report).map_err(|e| CliError::Numerical(format!("json: {e}")))?;
        value["key_rate"] = serde_json::json!(shown_rate);
        sink.line(
            &serde_json::to_string_pretty(&value)
                .map_err(|e| CliError::Numerical(format!("json: {e}")))?,
        )?;
    } else {
        let kind = match report.eve_bound_kind {
            mmqkd_core::EveBoundKind::ShannonIndividual => "I_BE (individual)",
            mmqkd_core::EveBoundKind::HolevoCollective => "chi_BE (holevo)",
        };
        sink.line(&format!(
            "scenario: {} mode(s), {:?} attack, {:?} detection",
            scenario.mode_count(),
            scenario.attack,
            scenario.detection_trust
        ))?;
        sink.line(&lambda_report(&scenario))?;
        sink.line(&format!(
            "channel: T = {}, excess noise = {} SNU",
            sig(scenario.channel.transmittance()),
            sig(scenario.channel.excess_noise())
        ))?;
        sink.line(&format!("I_AB     = {} bits/symbol", sig(report.i_ab)))?;
        sink.line(&format!("{kind} = {} bits/symbol", sig(report.eve_bound)))?;
        sink.line(&format!("beta     = {}", sig(report.beta)))?;
        sink.line(&format!("key rate = {} bits/symbol", sig(shown_rate)))?;
    }
    sink.finish()
}

fn sweep_axis(cfg: &SweepConfig) -> Result<SweepAxis, CliError> {
    match cfg.axis {
        Some(AxisArg::Distance) => Ok(SweepAxis::DistanceKm),
        Some(AxisArg::Transmittance) => Ok(SweepAxis::Transmittance),
        Some(AxisArg::ExcessNoise) => Ok(SweepAxis::ExcessNoise),
        Some(AxisArg::Variance) => Ok(SweepAxis::SourceVariance {
            mode: cfg.mode.unwrap_or(0),
        }),
        None => Err(CliError::Validation("missing --axis".into())),
    }
}

pub fn sweep(args: SweepArgs) -> Result<(), CliError> {
    let mut cfg = resolve(&args.common, args.excess_noise)?;
    let mut section = cfg.sweep.take().unwrap_or_default();
    if args.axis.is_some() {
        section.axis = args.axis;
    }
    if args.from.is_some() {
        section.from = args.from;
    }
    if args.to.is_some() {
        section.to = args.to;
    }
    if args.steps.is_some() {
        section.steps = args.steps;
    }
    if args.mode.is_some() {
        section.mode = args.mode;
    }
    cfg.sweep = Some(section.clone());
    if args.common.dump_config {
        return dump(&cfg);
    }

    // a sweep over the channel needs a template transmittance even though
    // the axis replaces it point by point
    if matches!(
        section.axis,
        Some(AxisArg::Distance) | Some(AxisArg::Transmittance)
    ) && cfg.scenario.transmittance.is_none()
        && cfg.scenario.distance_km.is_none()
    {
        cfg.scenario.transmittance = Some(1.0);
    }
    let template = cfg.scenario.build()?;
    let grid = SweepGrid {
        axis: sweep_axis(&section)?,
        from: section
            .from
            .ok_or_else(|| CliError::Validation("missing --from".into()))?,
        to: section
            .to
            .ok_or_else(|| CliError::Validation("missing --to".into()))?,
        steps: section.steps.unwrap_or(11),
    };
    eprintln!("{}", lambda_report(&template));
    let points = security::sweep(&template, &grid, cfg.output.jobs.unwrap_or(0))
        .map_err(|e| CliError::Numerical(e.to_string()))?;

    let mut sink = Sink::open(&cfg.output.out)?;
    sink.line(
        "index,parameter,transmittance,excess_noise,i_ab,eve_bound,beta,key_rate,status,error",
    )?;
    for p in &points {
        match &p.outcome {
            Ok(r) => {
                let shown = maybe_clamp(r.key_rate, cfg.output.clamp);
                sink.line(&csv_row(&[
                    p.index.to_string(),
                    sig(p.parameter),
                    sig(r.scenario_echo.channel.transmittance()),
                    sig(r.scenario_echo.channel.excess_noise()),
                    sig(r.i_ab),
                    sig(r.eve_bound),
                    sig(r.beta),
                    sig(shown),
                    "ok".into(),
                    String::new(),
                ]))?;
            }
            Err(msg) => {
                sink.line(&csv_row(&[
                    p.index.to_string(),
                    sig(p.parameter),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    "failed".into(),
                    sanitize(msg),
                ]))?;
            }
        }
    }
    sink.finish()
}

pub fn contour(args: ContourArgs) -> Result<(), CliError> {
    let mut cfg = resolve(&args.common, None)?;
    let mut section = cfg.contour.take().unwrap_or_default();
    if args.eps_list.is_some() {
        section.eps_list = args.eps_list.clone();
    }
    if args.v2_from.is_some() {
        section.v2_from = args.v2_from;
    }
    if args.v2_to.is_some() {
        section.v2_to = args.v2_to;
    }
    if args.v2_steps.is_some() {
        section.v2_steps = args.v2_steps;
    }
    if args.v1_max.is_some() {
        section.v1_max = args.v1_max;
    }
    if args.k_tolerance.is_some() {
        section.k_tolerance = args.k_tolerance;
    }
    cfg.contour = Some(section.clone());
    if cfg.scenario.modes.is_none() {
        cfg.scenario.modes = Some(vec![2.0, 2.0]);
    }
    if args.common.dump_config {
        return dump(&cfg);
    }
    if cfg.scenario.modes.as_ref().map(Vec::len) != Some(2) {
        return Err(CliError::Validation(
            "contour requires a two-mode scenario".into(),
        ));
    }

    let trusts: Vec<TrustArg> = match cfg.scenario.trust {
        Some(t) => vec![t],
        None => vec![TrustArg::Trusted, TrustArg::Untrusted],
    };
    let eps_list = section
        .eps_list
        .clone()
        .unwrap_or_else(|| vec![0.0, 0.01, 0.02, 0.03, 0.04, 0.05]);
    let grid = ContourGrid {
        v2_from: section.v2_from.unwrap_or(1.0),
        v2_to: section.v2_to.unwrap_or(3.0),
        steps: section.v2_steps.unwrap_or(9),
    };
    let bracket = (1.0, section.v1_max.unwrap_or(1000.0));
    let k_tol = section.k_tolerance.unwrap_or(1e-6);

    let mut sink = Sink::open(&cfg.output.out)?;
    sink.line("index,excess_noise,trust,v2,boundary_v1,status,error")?;
    let mut index = 0usize;
    for &eps in &eps_list {
        for &trust in &trusts {
            let mut scenario_cfg = cfg.scenario.clone();
            scenario_cfg.excess_noise = Some(eps);
            scenario_cfg.trust = Some(trust);
            let template = scenario_cfg.build()?;
            let points = security::contour(
                &template,
                &grid,
                bracket,
                k_tol,
                cfg.output.jobs.unwrap_or(0),
            )
            .map_err(|e| CliError::Numerical(e.to_string()))?;
            let trust_name = match trust {
                TrustArg::Trusted => "trusted",
                TrustArg::Untrusted => "untrusted",
            };
            for p in &points {
                match &p.boundary_v1 {
                    Ok(v1) => sink.line(&csv_row(&[
                        index.to_string(),
                        sig(eps),
                        trust_name.into(),
                        sig(p.v2),
                        sig(*v1),
                        "ok".into(),
                        String::new(),
                    ]))?,
                    Err(msg) => sink.line(&csv_row(&[
                        index.to_string(),
                        sig(eps),
                        trust_name.into(),
                        sig(p.v2),
                        String::new(),
                        "failed".into(),
                        sanitize(msg),
                    ]))?,
                }
                index += 1;
            }
        }
    }
    sink.finish()
}

/// Reference three-mode configuration used when table1 or compare-knowledge
/// run without explicit scenario flags.
fn default_partial_knowledge_scenario(cfg: &mut RunConfig) {
    if cfg.scenario.modes.is_none() {
        cfg.scenario.modes = Some(vec![5.0, 1.5, 1.1]);
        if cfg.scenario.weights.is_none() {
            cfg.scenario.weights = Some(vec![0.95, 0.025, 0.025]);
            cfg.scenario.weights_squared = true;
        }
        if cfg.scenario.excess_noise.is_none() {
            cfg.scenario.excess_noise = Some(0.05);
        }
    }
}

fn groupings_or_default(
    given: &Option<Vec<String>>,
    n: usize,
) -> Result<Vec<KnowledgeModel>, CliError> {
    match given {
        Some(texts) => texts
            .iter()
            .map(|t| {
                KnowledgeModel::new(parse_grouping(t)?)
                    .map_err(|e| CliError::Validation(e.to_string()))
            })
            .collect(),
        None => {
            let mut models = vec![KnowledgeModel::full(n)];
            if n > 2 {
                // merge everything but the strongest mode
                let mut groups = vec![vec![0]];
                groups.push((1..n).collect());
                models.push(
                    KnowledgeModel::new(groups).map_err(|e| CliError::Validation(e.to_string()))?,
                );
            }
            if n > 1 {
                models.push(KnowledgeModel::ignorant(n));
            }
            Ok(models)
        }
    }
}

pub fn table1(args: Table1Args) -> Result<(), CliError> {
    let mut cfg = resolve(&args.common, args.excess_noise)?;
    let mut section = cfg.table1.take().unwrap_or_default();
    if args.groupings.is_some() {
        section.groupings = args.groupings.clone();
    }
    cfg.table1 = Some(section.clone());
    default_partial_knowledge_scenario(&mut cfg);
    if cfg.scenario.transmittance.is_none() && cfg.scenario.distance_km.is_none() {
        cfg.scenario.transmittance = Some(0.5);
    }
    if args.common.dump_config {
        return dump(&cfg);
    }

    let truth = cfg.scenario.build()?;
    let t_true = truth.channel.transmittance();
    let models = groupings_or_default(&section.groupings, truth.mode_count())?;

    let mut sink = Sink::open(&cfg.output.out)?;
    sink.line("level_modes,group_index,v_eff,lambda_sq,t_eff_ratio,t_eff,eps_eff")?;
    for model in &models {
        let eff =
            effective_parameters(&truth, model).map_err(|e| CliError::Numerical(e.to_string()))?;
        for (g, (v, w)) in eff
            .variances
            .iter()
            .zip(eff.weights_squared.iter())
            .enumerate()
        {
            sink.line(&csv_row(&[
                model.assumed_modes().to_string(),
                g.to_string(),
                sig(*v),
                sig(*w),
                sig(eff.transmittance / t_true),
                sig(eff.transmittance),
                sig(eff.excess_noise),
            ]))?;
        }
    }
    sink.finish()
}

pub fn compare_knowledge(args: CompareKnowledgeArgs) -> Result<(), CliError> {
    let mut cfg = resolve(&args.common, args.excess_noise)?;
    let mut section = cfg.compare_knowledge.take().unwrap_or_default();
    if args.from.is_some() {
        section.from = args.from;
    }
    if args.to.is_some() {
        section.to = args.to;
    }
    if args.steps.is_some() {
        section.steps = args.steps;
    }
    if args.groupings.is_some() {
        section.groupings = args.groupings.clone();
    }
    cfg.compare_knowledge = Some(section.clone());
    default_partial_knowledge_scenario(&mut cfg);
    if cfg.scenario.beta.is_none() {
        cfg.scenario.beta = Some(0.95);
    }
    // transmittance comes from the distance grid
    if cfg.scenario.transmittance.is_none() && cfg.scenario.distance_km.is_none() {
        cfg.scenario.transmittance = Some(1.0);
    }
    if args.common.dump_config {
        return dump(&cfg);
    }

    let from = section.from.unwrap_or(0.0);
    let to = section.to.unwrap_or(100.0);
    let steps = section.steps.unwrap_or(21);
    let distances: Vec<f64> = if steps <= 1 {
        vec![from]
    } else {
        (0..steps)
            .map(|k| from + (to - from) * k as f64 / (steps - 1) as f64)
            .collect()
    };

    let base = cfg.scenario.build()?;
    let models = groupings_or_default(&section.groupings, base.mode_count())?;

    let mut sink = Sink::open(&cfg.output.out)?;
    sink.line("level_modes,distance_km,transmittance,i_ab,eve_bound,beta,key_rate")?;
    for &d in &distances {
        let t = transmittance_from_distance_km(d);
        let channel = mmqkd_core::ChannelSpec::new(t, base.channel.excess_noise())
            .map_err(|e| CliError::Validation(e.to_string()))?;
        let truth = Scenario::new(
            base.source.clone(),
            base.alice_weights.clone(),
            base.bob_weights.clone(),
            channel,
            base.detection_trust,
            base.attack,
            base.beta,
        )
        .map_err(|e| CliError::Validation(e.to_string()))?;
        let rates = knowledge_rate_comparison(&truth, &models)
            .map_err(|e| CliError::Numerical(e.to_string()))?;
        for (level, report) in rates {
            sink.line(&csv_row(&[
                level.to_string(),
                sig(d),
                sig(t),
                sig(report.i_ab),
                sig(report.eve_bound),
                sig(report.beta),
                sig(maybe_clamp(report.key_rate, cfg.output.clamp)),
            ]))?;
        }
    }
    sink.finish()
}

pub fn montecarlo(args: MonteCarloArgs) -> Result<(), CliError> {
    let mut cfg = resolve(&args.common, args.excess_noise)?;
    let mut section = cfg.montecarlo.take().unwrap_or_default();
    if args.mean.is_some() {
        section.mean = args.mean;
    }
    if args.spread.is_some() {
        section.spread = args.spread;
    }
    if args.spread_is_std {
        section.spread_is_std = true;
    }
    if args.n_modes.is_some() {
        section.n_modes = args.n_modes;
    }
    if args.runs.is_some() {
        section.runs = args.runs;
    }
    if args.seed.is_some() {
        section.seed = args.seed;
    }
    cfg.montecarlo = Some(section.clone());
    // reference simulation parameters unless overridden
    let mean = section.mean.unwrap_or(3.0);
    if cfg.scenario.modes.is_none() {
        cfg.scenario.modes = Some(vec![mean]);
    }
    if cfg.scenario.transmittance.is_none() && cfg.scenario.distance_km.is_none() {
        cfg.scenario.transmittance = Some(0.03);
    }
    if cfg.scenario.excess_noise.is_none() {
        cfg.scenario.excess_noise = Some(0.05);
    }
    if cfg.scenario.beta.is_none() {
        cfg.scenario.beta = Some(0.95);
    }
    if args.common.dump_config {
        return dump(&cfg);
    }

    let base = cfg.scenario.build()?;
    let mut spec = FluctuationSpec::new(
        mean,
        section.spread.unwrap_or(0.75),
        section.n_modes.unwrap_or(5),
        section.runs.unwrap_or(1000),
        section.seed.unwrap_or(1),
    )
    .map_err(|e| CliError::Validation(e.to_string()))?;
    spec.spread_is_std = section.spread_is_std;

    let series = run_fluctuating(&spec, &base).map_err(|e| CliError::Numerical(e.to_string()))?;
    let summary = summarize(&series).map_err(|e| CliError::Numerical(e.to_string()))?;

    let mut sink = Sink::open(&cfg.output.out)?;
    sink.line("run_index,K,V_draws_hash")?;
    for run in &series.runs {
        sink.line(&csv_row(&[
            run.run_index.to_string(),
            sig(maybe_clamp(run.report.key_rate, cfg.output.clamp)),
            format!("{:016x}", run.draws_hash),
        ]))?;
    }
    sink.finish()?;
    eprintln!(
        "montecarlo: rng={} runs={} modes={} mean(K)={} std(K)={} min(K)={} frac(K>0)={:.4} clamped={:.4}",
        series.rng_algorithm,
        series.runs.len(),
        spec.n_modes,
        sig(summary.mean),
        sig(summary.std_dev),
        sig(summary.min),
        summary.fraction_positive,
        series.clamped_fraction,
    );
    Ok(())
}

pub fn dump_config(args: DumpConfigArgs) -> Result<(), CliError> {
    let cfg = resolve(&args.common, args.excess_noise)?;
    dump(&cfg)
}
