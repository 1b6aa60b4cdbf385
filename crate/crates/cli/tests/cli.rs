use std::path::PathBuf;
use std::process::{Command, Output};

fn wargame(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wargame")).args(args).output().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("wargame-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn run_writes_a_replay_that_verifies() {
    let replay = scratch("out.rpl");
    let out = wargame(&[
        "run",
        "--scenario",
        "tiny-duel.wg",
        "--blue",
        "mcts",
        "--red",
        "random",
        "--seed",
        "7",
        "--budget-calls",
        "2000",
        "--replay",
        replay.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&replay).unwrap();
    assert!(text.lines().count() > 2);

    let out = wargame(&[
        "replay",
        "--verify",
        replay.to_str().unwrap(),
        "--scenario",
        "tiny-duel.wg",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok"));

    // A tampered terminal hash is detected as a runtime failure.
    let last = text.lines().last().unwrap();
    let i = last.find("\"finalHash\":\"").unwrap() + 13;
    let flipped = if &last[i..i + 1] == "0" { "1" } else { "0" };
    let tampered = format!("{}{}{}", &text[..text.len() - last.len() - 1], &last[..i], flipped) + &last[i + 1..] + "\n";
    let bad = scratch("bad.rpl");
    std::fs::write(&bad, tampered).unwrap();
    let out = wargame(&[
        "replay",
        "--verify",
        bad.to_str().unwrap(),
        "--scenario",
        "tiny-duel.wg",
    ]);
    assert_eq!(out.status.code(), Some(3));

    // Same replay against another scenario.
    let out = wargame(&[
        "replay",
        "--verify",
        replay.to_str().unwrap(),
        "--scenario",
        "river-crossing.wg",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unknown_agent_exits_two_naming_the_flag() {
    let out = wargame(&["run", "--scenario", "tiny-duel.wg", "--blue", "alphazero"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("--blue"), "{err}");
    assert!(err.contains("alphazero"), "{err}");
}

#[test]
fn bad_arguments_exit_two() {
    assert_eq!(wargame(&["run", "--fog", "maybe"]).status.code(), Some(2));
    assert_eq!(wargame(&["run", "--scenario", "no-such-map.wg"]).status.code(), Some(2));
    assert_eq!(wargame(&["frobnicate"]).status.code(), Some(2));
    let out = wargame(&[
        "tune",
        "--scenario",
        "tiny-duel.wg",
        "--agent",
        "rhea",
        "--param",
        "mutation=0.1:7",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--param"));
}

#[test]
fn logging_does_not_change_results() {
    let log = scratch("decisions.jsonl");
    let args = [
        "run",
        "--scenario",
        "tiny-duel.wg",
        "--blue",
        "cmab",
        "--red",
        "sss",
        "--seed",
        "3",
        "--budget-calls",
        "300",
    ];
    let plain = wargame(&args);
    let mut with_log = args.to_vec();
    with_log.extend(["--log", log.to_str().unwrap()]);
    let logged = Command::new(env!("CARGO_BIN_EXE_wargame"))
        .args(&with_log)
        .env("WARGAME_LOG", "debug")
        .output()
        .unwrap();
    assert_eq!(plain.status.code(), Some(0));
    assert_eq!(logged.status.code(), Some(0));
    assert_eq!(plain.stdout, logged.stdout);
    let lines = std::fs::read_to_string(&log).unwrap();
    assert!(lines.lines().count() > 1);
    assert!(!logged.stderr.is_empty());
}

#[test]
fn tournament_tune_and_mapelites_run() {
    let out = wargame(&[
        "tournament",
        "--scenario",
        "tiny-duel.wg",
        "--agent",
        "random",
        "--agent",
        "greedy=scripted:script=attackNearest",
        "--hall-of-fame",
        "scripted:script=holdPosition",
        "--games",
        "2",
        "--fog",
        "off",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = String::from_utf8_lossy(&out.stdout);
    assert!(report.starts_with("name\tgames\tmeanOutcome\tnashWeight\tskill"));
    assert_eq!(report.lines().count(), 3);

    let log = scratch("tune.tsv");
    let out = wargame(&[
        "tune",
        "--scenario",
        "tiny-duel.wg",
        "--agent",
        "scripted:script=withdrawIfOutnumbered",
        "--param",
        "aggression=0:1:2",
        "--evals",
        "5",
        "--games-per-eval",
        "2",
        "--log",
        log.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read_to_string(&log).unwrap().lines().count(), 6);

    let out = wargame(&[
        "mapelites",
        "--scenario",
        "tiny-duel.wg",
        "--agent",
        "scripted:script=scoutPatrol",
        "--param",
        "scoutRadius=1:4",
        "--iterations",
        "10",
        "--games",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}
