//! `wargame`: run matches, tournaments, tuning and MAP-Elites, and verify
//! replays from the command line.
//!
//! Exit codes: 0 success, 2 invalid configuration or arguments, 3 runtime
//! failure.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use wargame::agents::{AgentConfig, SearchBudget};
use wargame::evaluation::{
    map_elites_run, nash_average, round_robin, run_match, write_report, Entrant, MapElitesConfig, MatchOptions,
    ParamRange,
};
use wargame::interface::ObservationLevel;
use wargame::scenario::{fixtures, parse_scenario, ScenarioDoc};
use wargame::scripts::parse_doctrine;
use wargame::tooling::{exit_samples, replay_verify, write_exit_dataset};
use wargame::tuning::{tune_agent, write_tuning_log, Dimension, ParamSpace};

#[derive(Parser)]
#[command(
    name = "wargame",
    version,
    about = "Headless hex wargame with forward-planning agents"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play one match.
    Run(RunArgs),
    /// Round-robin tournament with Nash-averaged ranking.
    Tournament(TournamentArgs),
    /// Tune agent parameters with NTBEA.
    Tune(TuneArgs),
    /// Illuminate agent parameters with MAP-Elites.
    Mapelites(MapElitesArgs),
    /// Check a replay file against its scenario.
    Replay(ReplayArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Args)]
struct Common {
    /// Scenario file, or the name of a shipped scenario.
    #[arg(long, default_value = "river-crossing.wg")]
    scenario: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Forward-model calls per decision.
    #[arg(long, default_value_t = 2000)]
    budget_calls: u64,
    /// Wall-clock milliseconds per decision.
    #[arg(long)]
    budget_ms: Option<u64>,
    #[arg(long, value_enum, default_value = "on")]
    fog: Switch,
    /// Output file for the subcommand's records.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Doctrine rule file applied to both sides.
    #[arg(long)]
    doctrine: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    /// Agent spec, `kind` or `kind:key=value,...`.
    #[arg(long, default_value = "random")]
    blue: String,
    #[arg(long, default_value = "random")]
    red: String,
    /// Write a replay file.
    #[arg(long)]
    replay: Option<PathBuf>,
    /// Write expert-iteration training samples for this game.
    #[arg(long)]
    exit_data: Option<PathBuf>,
}

#[derive(Args)]
struct TournamentArgs {
    #[command(flatten)]
    common: Common,
    /// Ranked entrant, `name=spec` or `spec`; repeat for each.
    #[arg(long = "agent", required = true)]
    agents: Vec<String>,
    /// Hall-of-fame opponent; plays the entrants but not each other.
    #[arg(long = "hall-of-fame")]
    hall_of_fame: Vec<String>,
    /// Further scenarios besides `--scenario`.
    #[arg(long = "also-scenario")]
    also_scenarios: Vec<String>,
    /// Games per pair, scenario and side assignment.
    #[arg(long, default_value_t = 10)]
    games: u64,
}

#[derive(Args)]
struct TuneArgs {
    #[command(flatten)]
    common: Common,
    /// Agent spec whose parameters are tuned.
    #[arg(long)]
    agent: String,
    /// Dimension `key=v1:v2:...`; repeat for each.
    #[arg(long = "param", required = true)]
    params: Vec<String>,
    #[arg(long, default_value = "random")]
    opponent: String,
    #[arg(long, default_value_t = 4)]
    games_per_eval: usize,
    /// Number of NTBEA evaluations.
    #[arg(long, default_value_t = 100)]
    evals: u64,
}

#[derive(Args)]
struct MapElitesArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    agent: String,
    /// Range `key=lo:hi`; repeat for each.
    #[arg(long = "param", required = true)]
    params: Vec<String>,
    #[arg(long, default_value = "random")]
    opponent: String,
    #[arg(long, default_value_t = 200)]
    iterations: usize,
    /// Fitness games per candidate.
    #[arg(long, default_value_t = 4)]
    games: u64,
}

#[derive(Args)]
struct ReplayArgs {
    /// Replay file to verify.
    #[arg(long)]
    verify: PathBuf,
    #[arg(long)]
    scenario: String,
}

/// Failure classes with their exit codes.
enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

fn usage(flag: &str, message: impl std::fmt::Display) -> Failure {
    Failure::Usage(format!("invalid value for --{flag}: {message}"))
}

fn load_scenario(name: &str) -> Result<(ScenarioDoc, String), Failure> {
    let text = if Path::new(name).is_file() {
        std::fs::read_to_string(name).map_err(|e| usage("scenario", format!("{name}: {e}")))?
    } else if let Some(t) = fixtures::text(name) {
        t.to_string()
    } else {
        return Err(usage("scenario", format!("{name}: no such file or shipped scenario")));
    };
    let doc = parse_scenario(&text).map_err(|e| usage("scenario", format!("{name}: {e}")))?;
    Ok((doc, text))
}

fn agent(flag: &str, spec: &str) -> Result<AgentConfig, Failure> {
    spec.parse().map_err(|e| usage(flag, e))
}

fn options(c: &Common) -> Result<MatchOptions, Failure> {
    let mut budget = SearchBudget::calls(c.budget_calls);
    if let Some(ms) = c.budget_ms {
        budget = budget.with_millis(ms);
    }
    let doctrine = match &c.doctrine {
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| usage("doctrine", format!("{}: {e}", path.display())))?;
            parse_doctrine(&text).map_err(|e| usage("doctrine", e))?
        }
        None => Vec::new(),
    };
    Ok(MatchOptions {
        level: match c.fog {
            Switch::On => ObservationLevel::Fog,
            Switch::Off => ObservationLevel::Full,
        },
        budget,
        doctrine,
        ..MatchOptions::default()
    })
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn split_range(flag: &str, spec: &str) -> Result<(String, Vec<f64>), Failure> {
    let (key, values) = spec
        .split_once('=')
        .ok_or_else(|| usage(flag, format!("`{spec}`: expected key=values")))?;
    let values = values
        .split(':')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|e| usage(flag, format!("`{spec}`: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((key.trim().to_string(), values))
}

fn run(a: RunArgs) -> Result<(), Failure> {
    let (doc, _) = load_scenario(&a.common.scenario)?;
    let blue = agent("blue", &a.blue)?;
    let red = agent("red", &a.red)?;
    let mut opts = options(&a.common)?;
    opts.replay = a.replay.clone();
    opts.keep_decisions = a.common.log.is_some() || a.exit_data.is_some();
    let out = run_match(&doc, &blue, &red, a.common.seed, &opts).context("match failed")?;
    if let Some(path) = &a.replay {
        log::info!("replay written to {}", path.display());
    }
    if let Some(path) = &a.common.log {
        let mut w = create(path)?;
        for d in &out.decisions {
            serde_json::to_writer(&mut w, d).context("writing decision log")?;
            w.write_all(b"\n")?;
        }
        serde_json::to_writer(&mut w, &out.result).context("writing decision log")?;
        w.write_all(b"\n")?;
        w.flush()?;
    }
    if let Some(path) = &a.exit_data {
        let mut w = create(path)?;
        write_exit_dataset(&mut w, &exit_samples(&[(out.result.clone(), out.decisions.clone())]))?;
        w.flush()?;
    }
    let r = &out.result;
    println!(
        "{} vs {} on {} seed {}: outcome(blue) {} vp {:.3}/{:.3} after {} ticks ({})",
        r.blue,
        r.red,
        r.scenario,
        r.seed,
        r.outcome_blue,
        r.vp[0],
        r.vp[1],
        r.ticks,
        match (&r.forfeit, r.termination) {
            (Some(f), _) => format!("{} forfeits: {}", f.side, f.violation),
            (None, Some(t)) => t.name().to_string(),
            (None, None) => "unfinished".to_string(),
        }
    );
    println!("final hash {:016x}", r.final_hash);
    Ok(())
}

fn entrant(flag: &str, spec: &str) -> Result<Entrant, Failure> {
    // A bare spec may itself contain `=`, so only a prefix without `:` or
    // `=` before the first `=` is a name.
    match spec.split_once('=') {
        Some((name, rest)) if !name.contains(':') && rest.parse::<AgentConfig>().is_ok() => {
            Ok(Entrant::new(name, agent(flag, rest)?))
        }
        _ => Ok(Entrant::new(spec, agent(flag, spec)?)),
    }
}

fn tournament(a: TournamentArgs) -> Result<(), Failure> {
    let mut scenarios = vec![load_scenario(&a.common.scenario)?.0];
    for s in &a.also_scenarios {
        scenarios.push(load_scenario(s)?.0);
    }
    let entrants = a
        .agents
        .iter()
        .map(|s| entrant("agent", s))
        .collect::<Result<Vec<_>, _>>()?;
    let hof = a
        .hall_of_fame
        .iter()
        .map(|s| entrant("hall-of-fame", s))
        .collect::<Result<Vec<_>, _>>()?;
    if entrants.len() + hof.len() < 2 {
        return Err(usage("agent", "a tournament needs at least two agents"));
    }
    let opts = options(&a.common)?;
    let t = round_robin(&entrants, &scenarios, a.games, &hof, a.common.seed, &opts).context("tournament failed")?;
    let nash = nash_average(&t.matrix.w).context("Nash averaging failed")?;
    let stdout = io::stdout();
    write_report(&mut stdout.lock(), &t.matrix, &nash)?;
    if let Some(path) = &a.common.log {
        let mut w = create(path)?;
        for r in &t.results {
            serde_json::to_writer(&mut w, r).context("writing results")?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
    }
    Ok(())
}

fn tune(a: TuneArgs) -> Result<(), Failure> {
    let (doc, _) = load_scenario(&a.common.scenario)?;
    let base = agent("agent", &a.agent)?;
    let opponent = agent("opponent", &a.opponent)?;
    let mut dims = Vec::new();
    for p in &a.params {
        let (key, values) = split_range("param", p)?;
        for v in &values {
            base.clone().set_value(&key, *v).map_err(|e| usage("param", e))?;
        }
        dims.push(Dimension::new(&key, &values));
    }
    if a.evals == 0 {
        return Err(usage("evals", "must be at least 1"));
    }
    let space = ParamSpace::new(dims);
    let opts = options(&a.common)?;
    let r = tune_agent(
        &base,
        &space,
        &doc,
        &opponent,
        a.games_per_eval,
        a.evals,
        a.common.seed,
        &opts,
    )
    .context("tuning failed")?;
    if let Some(path) = &a.common.log {
        let mut w = create(path)?;
        write_tuning_log(&mut w, &space, &r.log)?;
        w.flush()?;
    }
    let best: Vec<String> = space
        .dims
        .iter()
        .zip(&r.best_values)
        .map(|(d, v)| format!("{}={v}", d.name))
        .collect();
    println!(
        "best {} (estimated fitness {:.3})",
        best.join(","),
        r.model.estimate(&r.best)
    );
    Ok(())
}

fn mapelites(a: MapElitesArgs) -> Result<(), Failure> {
    let (doc, _) = load_scenario(&a.common.scenario)?;
    let base = agent("agent", &a.agent)?;
    let opponent = agent("opponent", &a.opponent)?;
    let mut space = Vec::new();
    for p in &a.params {
        let (key, values) = split_range("param", p)?;
        let [lo, hi] = values[..] else {
            return Err(usage("param", format!("`{p}`: expected key=lo:hi")));
        };
        if !lo.is_finite() || !hi.is_finite() {
            return Err(usage("param", format!("`{p}`: bounds must be finite")));
        }
        if lo > hi {
            return Err(usage("param", format!("`{p}`: lower bound above upper bound")));
        }
        for v in [lo, hi] {
            base.clone().set_value(&key, v).map_err(|e| usage("param", e))?;
        }
        space.push(ParamRange::new(&key, lo, hi));
    }
    let mut cfg = MapElitesConfig::new(base, space, opponent);
    cfg.options = options(&a.common)?;
    cfg.seeds = (0..a.games.max(1)).map(|k| a.common.seed.wrapping_add(k)).collect();
    let (archive, log) = map_elites_run(&doc, &cfg, a.iterations, a.common.seed).context("MAP-Elites failed")?;
    if let Some(path) = &a.common.log {
        let mut w = create(path)?;
        for ins in &log {
            serde_json::to_writer(&mut w, ins).context("writing insertion log")?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
    }
    println!("cell\tfitness\tcasualties\tmovement\tparams");
    for (c, e) in archive.cells.iter().enumerate() {
        if let Some(e) = e {
            let params: Vec<String> = cfg
                .space
                .iter()
                .zip(&e.params)
                .map(|(d, v)| format!("{}={v:.4}", d.key))
                .collect();
            println!(
                "{c}\t{:.4}\t{:.4}\t{:.4}\t{}",
                e.fitness,
                e.descriptor.casualties_suffered_fraction,
                e.descriptor.movement_expended_normalized,
                params.join(",")
            );
        }
    }
    Ok(())
}

fn replay(a: ReplayArgs) -> Result<(), Failure> {
    let (_, scenario) = load_scenario(&a.scenario)?;
    let text =
        std::fs::read_to_string(&a.verify).map_err(|e| usage("verify", format!("{}: {e}", a.verify.display())))?;
    let report = replay_verify(&text, &scenario).context("replay verification failed")?;
    if report.ok {
        println!("ok: final hash {}", report.final_hash);
        Ok(())
    } else {
        Err(Failure::Runtime(anyhow::anyhow!(
            "replay diverged{}: expected hash {}, got {}",
            report.mismatch_at.map(|t| format!(" at tick {t}")).unwrap_or_default(),
            report.expected_hash,
            report.final_hash
        )))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("WARGAME_LOG", "error")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Tournament(a) => tournament(a),
        Command::Tune(a) => tune(a),
        Command::Mapelites(a) => mapelites(a),
        Command::Replay(a) => replay(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
