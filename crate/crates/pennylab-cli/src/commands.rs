//! Subcommand bodies. Each one builds its inputs from the validated config,
//! runs, writes its outputs into the output directory, and finishes with a
//! manifest. All parallelism is replica-level inside the library; writing
//! stays on this thread.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use pennylab::acceptance::{all_passed, run_all, Tier};
use pennylab::dynamics::{
    monte_carlo, run, CheckpointSchedule, DynamicsOptions, FeedbackMode, RunKind, RunSetup,
    TelepathicUpdate, Trajectory,
};
use pennylab::format_float17;
use pennylab::games::{nash_equilibrium, Player};
use pennylab::pmf::{
    demoivre_ratio_certificate, shaky_hands_estimate, shift_ratio_bound_check, ShiftRatioCheck,
};
use pennylab::probes::{oscillation_estimate, realized_regret_full, scan_sensitivity};
use pennylab::strategies::StrategyFamily;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::manifest::RunManifest;
use crate::{CliError, Command};

pub fn dispatch(command: &Command, config: &ExperimentConfig) -> Result<i32, CliError> {
    let started = Instant::now();
    let dir = config.output_dir.clone();
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::Runtime(format!("creating {}: {e}", dir.display())))?;

    let (name, outputs, exit_code) = match command {
        Command::Simulate => ("simulate", simulate(config, &dir)?, 0),
        Command::ProbeSensitivity => ("probe-sensitivity", probe_sensitivity(config, &dir)?, 0),
        Command::ProbeOscillation => ("probe-oscillation", probe_oscillation(config, &dir)?, 0),
        Command::AuditRegret => ("audit-regret", audit_regret(config, &dir)?, 0),
        Command::PmfTools { empirical } => ("pmf-tools", pmf_tools(config, *empirical, &dir)?, 0),
        Command::CheckAll { full } => {
            let (outputs, ok) = check_all(*full, &dir)?;
            ("check-all", outputs, if ok { 0 } else { 1 })
        }
    };
    RunManifest::new(name, config, started, outputs).write(&dir)?;
    Ok(exit_code)
}

fn build_setup(config: &ExperimentConfig) -> Result<RunSetup, CliError> {
    let game = config.game.build()?;
    let kind = match config.mode {
        FeedbackMode::Realization => RunKind::Realization { spec2: config.strategy2.clone() },
        FeedbackMode::Telepathic => RunKind::Telepathic { spec2: config.strategy2.clone() },
    };
    Ok(RunSetup {
        game,
        spec1: config.strategy1.clone(),
        kind,
        steps: config.steps,
        opts: DynamicsOptions {
            schedule: CheckpointSchedule::geometric(config.checkpoint_base, config.checkpoint_ratio),
            tail_window: config.tail_window,
            telepathic_start: config.telepathic_start,
            telepathic_update: config.telepathic_update,
        },
    })
}

fn write_file(dir: &Path, name: &str, body: &[u8]) -> Result<String, CliError> {
    let path = dir.join(name);
    std::fs::write(&path, body)
        .map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display())))?;
    Ok(name.to_string())
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<String, CliError> {
    let body = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Runtime(format!("serializing {name}: {e}")))?;
    write_file(dir, name, (body + "\n").as_bytes())
}

fn write_trajectory(dir: &Path, index: usize, traj: &Trajectory) -> Result<String, CliError> {
    let name = format!("trajectory_{index:04}.csv");
    let mut buf = Vec::new();
    traj.write_checkpoints_csv(&mut buf)
        .map_err(|e| CliError::Runtime(format!("formatting {name}: {e}")))?;
    write_file(dir, &name, &buf)
}

fn simulate(config: &ExperimentConfig, dir: &Path) -> Result<Vec<String>, CliError> {
    if config.mode == FeedbackMode::Telepathic
        && config.telepathic_update == TelepathicUpdate::Incremental
    {
        let plain_hedge = |s: &pennylab::strategies::StrategySpec| {
            s.family == StrategyFamily::Hedge && s.recency.ell() == 0
        };
        if !(plain_hedge(&config.strategy1) && plain_hedge(&config.strategy2)) {
            return Err(CliError::Precondition(
                "telepathic_update = incremental applies to plain hedge strategies only".into(),
            ));
        }
    }
    let setup = build_setup(config)?;
    let mut outputs = Vec::new();
    if config.mode == FeedbackMode::Telepathic {
        // Deterministic dynamic: one trajectory regardless of n_runs.
        let traj = run(&setup, config.master_seed);
        outputs.push(write_trajectory(dir, 0, &traj)?);
    } else {
        let runs = monte_carlo(&setup, config.n_runs, config.master_seed);
        for (k, traj) in runs.iter().enumerate() {
            outputs.push(write_trajectory(dir, k, traj)?);
        }
    }
    Ok(outputs)
}

fn require_runs(config: &ExperimentConfig) -> Result<(), CliError> {
    if config.n_runs == 0 {
        return Err(CliError::Precondition("this probe needs n_runs >= 1".into()));
    }
    Ok(())
}

fn probe_sensitivity(config: &ExperimentConfig, dir: &Path) -> Result<Vec<String>, CliError> {
    require_runs(config)?;
    let game = config.game.build()?;
    let scan = scan_sensitivity(
        &config.strategy1,
        &game,
        config.steps,
        config.alpha_coeff,
        config.n_runs,
        config.master_seed,
    )?;
    Ok(vec![write_json(dir, "sensitivity.json", &scan)?])
}

fn probe_oscillation(config: &ExperimentConfig, dir: &Path) -> Result<Vec<String>, CliError> {
    require_runs(config)?;
    let setup = build_setup(config)?;
    let p_star = nash_equilibrium(&setup.game)
        .map_err(|e| CliError::Precondition(e.to_string()))?
        .p_star;
    let report =
        oscillation_estimate(&setup, p_star, config.delta, config.n_runs, config.master_seed)?;
    let mut csv = String::from("t,fraction_deviating\n");
    for (t, frac) in report.checkpoints.iter().zip(&report.fraction_deviating) {
        let _ = writeln!(csv, "{t},{}", format_float17(*frac));
    }
    Ok(vec![write_file(dir, "oscillation.csv", csv.as_bytes())?])
}

fn audit_regret(config: &ExperimentConfig, dir: &Path) -> Result<Vec<String>, CliError> {
    if config.mode != FeedbackMode::Realization {
        return Err(CliError::Precondition(
            "audit-regret needs mode = realization; telepathic runs have no realized actions"
                .into(),
        ));
    }
    let mut setup = build_setup(config)?;
    // The audit needs every realized action, whatever tail_window says.
    setup.opts.tail_window = config.steps as usize;
    let mut csv = String::from(
        "run,seed,player,window_len,realized_payoff,best_fixed_payoff,best_action,regret,normalized\n",
    );
    let runs = monte_carlo(&setup, config.n_runs, config.master_seed);
    for (k, traj) in runs.iter().enumerate() {
        for player in [Player::One, Player::Two] {
            let rep = realized_regret_full(traj, player)?;
            let _ = writeln!(
                csv,
                "{k},{},{},{},{},{},{},{},{}",
                traj.seed.expect("realization runs are seeded"),
                match player {
                    Player::One => 1,
                    Player::Two => 2,
                },
                rep.window_len,
                format_float17(rep.realized_payoff),
                format_float17(rep.best_fixed_payoff),
                rep.best_action,
                format_float17(rep.regret),
                format_float17(rep.normalized),
            );
        }
    }
    Ok(vec![write_file(dir, "regret.csv", csv.as_bytes())?])
}

/// Exact-pmf certificates at the configured horizon: the local-normal
/// deviation on the `window_coeff * sqrt(t)` window and the change-of-measure
/// floor for `s = floor(alpha_coeff * sqrt(t))` forced successes.
#[derive(Debug, Serialize)]
struct PmfCertificates {
    t: u64,
    s: u64,
    q_star: f64,
    window_coeff: f64,
    demoivre_worst_rel_dev: f64,
    shift: ShiftRatioCheck<f64>,
}

fn pmf_tools(config: &ExperimentConfig, empirical: bool, dir: &Path) -> Result<Vec<String>, CliError> {
    let game = config.game.build()?;
    let q_star = nash_equilibrium(&game)
        .map_err(|e| CliError::Precondition(e.to_string()))?
        .q_star;
    let t = config.steps;
    let s = ((config.alpha_coeff * (t as f64).sqrt()).floor() as u64).max(1);
    let demoivre = demoivre_ratio_certificate(t, q_star, config.window_coeff)?;
    let shift = shift_ratio_bound_check(t, s, q_star, config.window_coeff)?;
    let report = PmfCertificates {
        t,
        s,
        q_star,
        window_coeff: config.window_coeff,
        demoivre_worst_rel_dev: demoivre,
        shift,
    };
    let mut outputs = vec![write_json(dir, "certificates.json", &report)?];
    if empirical {
        let setup = build_setup(config)?;
        let shaky =
            shaky_hands_estimate(&setup, t, config.gamma, config.n_runs, config.master_seed)?;
        outputs.push(write_json(dir, "shaky_hands.json", &shaky)?);
    }
    Ok(outputs)
}

#[derive(Debug, Serialize)]
struct CriterionRecord {
    index: usize,
    name: &'static str,
    pass: bool,
    detail: String,
    seconds: f64,
}

fn check_all(full: bool, dir: &Path) -> Result<(Vec<String>, bool), CliError> {
    let tier = if full { Tier::Full } else { Tier::Fast };
    println!("acceptance gate, {tier:?} tier");
    let results = run_all(tier);
    for r in &results {
        println!("{}", r.line());
    }
    let ok = all_passed(&results);
    let failed = results.iter().filter(|r| !r.pass).count();
    if ok {
        println!("acceptance: all {} criteria passed", results.len());
    } else {
        println!("acceptance: {failed} criterion(s) FAILED");
    }
    let records: Vec<CriterionRecord> = results
        .into_iter()
        .map(|r| CriterionRecord {
            index: r.index,
            name: r.name,
            pass: r.pass,
            detail: r.detail,
            seconds: r.seconds,
        })
        .collect();
    Ok((vec![write_json(dir, "acceptance.json", &records)?], ok))
}
