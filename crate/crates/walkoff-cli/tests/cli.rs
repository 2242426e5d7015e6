//! Behavior of the `walkoff` binary: exit codes, error phrasing, and the
//! wiring between subcommands.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_walkoff"))
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn from_utf8(bytes: &[u8]) -> String {
    String::from_utf8(bytes.to_vec()).expect("utf8 output")
}

#[test]
fn parse_reports_games_and_plays() {
    let out = bin().arg("parse").arg(fixtures().join("events")).output().unwrap();
    assert!(out.status.success());
    let text = from_utf8(&out.stdout);
    assert!(text.contains("games parsed           : 11"), "{text}");
    assert!(text.contains("replay inconsistencies : 0"), "{text}");
}

#[test]
fn parse_of_empty_directory_is_zero_games_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().arg("parse").arg(dir.path()).output().unwrap();
    assert!(out.status.success());
    assert!(from_utf8(&out.stdout).contains("games parsed           : 0"));
}

#[test]
fn parse_rejects_corrupt_line_with_its_number() {
    let out = bin()
        .arg("parse")
        .arg(fixtures().join("corrupt/BADFIELDS.EVN"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = from_utf8(&out.stderr);
    assert!(err.contains("line 10"), "{err}");
    assert!(err.contains("expected 7"), "{err}");

    let out = bin().arg("parse").arg(fixtures().join("corrupt/NOID.EVN")).output().unwrap();
    assert!(!out.status.success());
    let err = from_utf8(&out.stderr);
    assert!(err.contains("line 1"), "{err}");
    assert!(err.contains("before any id"), "{err}");
}

#[test]
fn parse_missing_path_is_a_clean_error() {
    let out = bin().arg("parse").arg("/no/such/place").output().unwrap();
    assert!(!out.status.success());
    assert!(from_utf8(&out.stderr).contains("no such path"));
}

#[test]
fn parse_writes_play_context_rows() {
    let dir = tempfile::tempdir().unwrap();
    let ctx = dir.path().join("ctx.csv");
    let out = bin()
        .arg("parse")
        .arg(fixtures().join("events/2021FIX.EVN"))
        .arg("--out")
        .arg(&ctx)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = std::fs::read_to_string(&ctx).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "game_id,play_index,inning,half,outs,b1,b2,b3,score_away,score_home,event_text,bunt_flag"
    );
    // The walk-off bunt: bottom 10, ghost on second, bunt flag set.
    assert!(text.contains("BOS202109150,57,10,1,0,0,1,0,0,0,23/SH/BG.2-3,1"), "{text}");
}

fn cohort_cmd(out_csv: &Path) -> Command {
    let mut c = bin();
    c.arg("cohort")
        .arg("--events")
        .arg(fixtures().join("events"))
        .arg("--batting")
        .arg(fixtures().join("lahman/Batting.csv"))
        .arg("--pitching")
        .arg(fixtures().join("lahman/Pitching.csv"))
        .arg("--seasons")
        .arg("2021,2022")
        .arg("--out")
        .arg(out_csv);
    c
}

#[test]
fn cohort_extracts_joins_and_writes_the_interchange_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("cohort.csv");
    let covs = dir.path().join("covariates.csv");
    let out = cohort_cmd(&csv).arg("--covariates-out").arg(&covs).output().unwrap();
    assert!(out.status.success(), "{}", from_utf8(&out.stderr));
    let text = from_utf8(&out.stdout);
    assert!(text.contains("qualifying situations  : 12"), "{text}");
    assert!(
        text.contains("covariate join         : 10 kept, 1 missing batter, 1 missing pitcher, 0 undefined"),
        "{text}"
    );

    let written = std::fs::read_to_string(&csv).unwrap();
    let mut lines = written.lines();
    assert_eq!(
        lines.next().unwrap(),
        "game_id,season,inning,batter_id,pitcher_id,A,Y,ops,sac_rate,era,result_category"
    );
    assert_eq!(lines.count(), 10);
    // The pitching change must attribute the reliever, not the starter.
    assert!(written.contains("BOS202109200,2021,10,bosb0009,nyap0004,1,1"), "{written}");
    // Stint totals feed OPS: bosb0003's two stints sum before the join.
    // OBP 126/387 + SLG 133/350 over the summed stints.
    assert!(written.contains("BOS202109160,2021,10,bosb0003,nyap0001,0,0,0.705581"), "{written}");

    let covariates = std::fs::read_to_string(&covs).unwrap();
    assert!(covariates.starts_with("player_id,season,ops,sac_rate,era\n"));
    // Batters carry ops and sac rate, pitchers era; absent parts stay empty.
    assert!(covariates.contains("bosb0003,2021,0.705581,0.257732,\n"), "{covariates}");
    assert!(covariates.contains("nyap0001,2021,,,3.000000\n"), "{covariates}");
}

#[test]
fn cohort_rejects_pre_ghost_runner_seasons() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("cohort.csv");
    let mut cmd = cohort_cmd(&csv);
    // Replace the season list.
    let out = cmd.arg("--seasons").arg("2019").output().unwrap();
    assert!(!out.status.success());
    assert!(from_utf8(&out.stderr).contains("2019"), "stderr should name the season");
}

#[test]
fn cohort_with_no_qualifying_situations_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let events = dir.path().join("events");
    std::fs::create_dir(&events).unwrap();
    // One game decided in regulation: nothing qualifies.
    let mut game = String::from(
        "id,BOS202105010\nversion,2\ninfo,visteam,NYA\ninfo,hometeam,BOS\ninfo,date,2021/05/01\n\
         start,nyap0001,\"P\",0,1,1\nstart,bosp0001,\"P\",1,1,1\n",
    );
    for half in ["0", "1"] {
        for _ in 0..3 {
            game.push_str(&format!("play,1,{half},someone1,02,CSS,K\n"));
        }
    }
    game.push_str("play,2,0,someone1,00,X,HR/F7\n");
    for _ in 0..3 {
        game.push_str("play,2,0,someone1,02,CSS,K\n");
    }
    std::fs::write(events.join("TINY.EVN"), game).unwrap();

    let csv = dir.path().join("cohort.csv");
    let mut c = bin();
    let out = c
        .arg("cohort")
        .arg("--events")
        .arg(&events)
        .arg("--batting")
        .arg(fixtures().join("lahman/Batting.csv"))
        .arg("--pitching")
        .arg(fixtures().join("lahman/Pitching.csv"))
        .arg("--seasons")
        .arg("2021")
        .arg("--out")
        .arg(&csv)
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(from_utf8(&out.stderr).contains("no qualifying situations"));
}

#[test]
fn estimate_runs_on_an_emitted_synthetic_cohort() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("synth.csv");
    let out = bin()
        .arg("synth-validate")
        .arg("--emit-cohort")
        .arg(&csv)
        .arg("--emit-n")
        .arg("400")
        .arg("--seed")
        .arg("99")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", from_utf8(&out.stderr));

    let est_dir = dir.path().join("est");
    let out = bin()
        .arg("estimate")
        .arg(&csv)
        .arg("--boot")
        .arg("200")
        .arg("--seed")
        .arg("5")
        .arg("--out")
        .arg(&est_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", from_utf8(&out.stderr));
    let text = from_utf8(&out.stdout);
    assert!(text.contains("effects (odds ratios"), "{text}");
    for artifact in [
        "effects.csv",
        "propensity_hist.csv",
        "propensity_model.csv",
        "outcome_model.csv",
        "balance.csv",
        "manifest.txt",
        "report.txt",
    ] {
        assert!(est_dir.join(artifact).exists(), "missing {artifact}");
    }
    let effects = std::fs::read_to_string(est_dir.join("effects.csv")).unwrap();
    assert!(effects.contains("method,odds_ratio,ci_lo,ci_hi,ci_method,n_used,n_trimmed"));
    assert!(effects.contains("crude,"));
    assert!(effects.contains("ipw,"));
    let hist = std::fs::read_to_string(est_dir.join("propensity_hist.csv")).unwrap();
    assert_eq!(hist.lines().filter(|l| !l.starts_with('#')).count(), 21); // header + 20 bins
}

#[test]
fn estimate_rejects_bad_trim_windows() {
    let out = bin()
        .arg("estimate")
        .arg("whatever.csv")
        .arg("--trim")
        .arg("0.9,0.1")
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(from_utf8(&out.stderr).contains("--trim"));
}

#[test]
fn simulate_honors_the_r_flag_and_model_files_round_trip() {
    let out = bin().arg("simulate").arg("--mc-trials").arg("1000").arg("--r").arg("0.5").output().unwrap();
    assert!(out.status.success());
    let text = from_utf8(&out.stdout);
    assert!(text.contains("P(reaching 12 innings or more)       = 0.2500"), "{text}");

    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.cfg");
    let out = bin().arg("simulate").arg("--dump-model").arg(&model).output().unwrap();
    assert!(out.status.success());
    let out = bin()
        .arg("simulate")
        .arg("--model")
        .arg(&model)
        .arg("--mc-trials")
        .arg("1000")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", from_utf8(&out.stderr));
}

#[test]
fn simulate_rejects_invalid_model_probabilities() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.cfg");
    std::fs::write(&model, "out = 0.9\nwalk = 0.9\n").unwrap();
    let out = bin().arg("simulate").arg("--model").arg(&model).output().unwrap();
    assert!(!out.status.success());
    assert!(from_utf8(&out.stderr).contains("sum"));
}

#[test]
fn synth_validate_rejects_bad_spec_files_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.cfg");
    std::fs::write(&spec, "ops_sd = -2\n").unwrap();
    let out = bin().arg("synth-validate").arg("--spec").arg(&spec).output().unwrap();
    assert!(!out.status.success());
    assert!(from_utf8(&out.stderr).contains("ops_sd"));

    std::fs::write(&spec, "not_a_field = 1\n").unwrap();
    let out = bin().arg("synth-validate").arg("--spec").arg(&spec).output().unwrap();
    assert!(!out.status.success());
    assert!(from_utf8(&out.stderr).contains("not_a_field"));
}

#[test]
fn synth_validate_small_run_passes_and_prints_check_lines() {
    let out = bin()
        .arg("synth-validate")
        .arg("--n")
        .arg("4000")
        .arg("--reps")
        .arg("30")
        .arg("--seed")
        .arg("11")
        .output()
        .unwrap();
    let text = from_utf8(&out.stdout);
    assert!(out.status.success(), "{text}\n{}", from_utf8(&out.stderr));
    for check in [
        "consistency identity",
        "positivity",
        "oracle convergence",
        "estimator recovery",
        "zero-confounding collapse",
    ] {
        assert!(text.contains(&format!("PASS {check}")), "{text}");
    }
}

#[test]
fn walkoff_seed_env_var_is_the_fallback() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .arg("parse")
        .arg(dir.path())
        .env("WALKOFF_SEED", "777")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(from_utf8(&out.stdout).contains("seed    : 777"));
    // The flag wins over the environment.
    let out = bin()
        .arg("parse")
        .arg(dir.path())
        .env("WALKOFF_SEED", "777")
        .arg("--seed")
        .arg("5")
        .output()
        .unwrap();
    assert!(from_utf8(&out.stdout).contains("seed    : 5"));
}

#[test]
fn null_mechanism_cohort_gives_near_unit_odds_ratios() {
    // A spec with no bunt effect and no confounding: both estimates land
    // near 1 through the whole binary loop.
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("null.cfg");
    std::fs::write(
        &spec,
        "out_bunt = 0\ntreat_ops = 0\ntreat_sac_rate = 0\ntreat_era = 0\ntreat_intercept = -1.0\n",
    )
    .unwrap();
    let csv = dir.path().join("null.csv");
    let out = bin()
        .arg("synth-validate")
        .arg("--spec")
        .arg(&spec)
        .arg("--emit-cohort")
        .arg(&csv)
        .arg("--emit-n")
        .arg("4000")
        .arg("--seed")
        .arg("31")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", from_utf8(&out.stderr));
    let out = bin()
        .arg("estimate")
        .arg(&csv)
        .arg("--boot")
        .arg("200")
        .arg("--seed")
        .arg("2")
        .arg("--out")
        .arg(dir.path().join("est"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", from_utf8(&out.stderr));
    let effects =
        std::fs::read_to_string(dir.path().join("est").join("effects.csv")).unwrap();
    for line in effects.lines().filter(|l| l.starts_with("crude") || l.starts_with("ipw")) {
        let or: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((or - 1.0).abs() < 0.15, "{line}");
    }
}

#[test]
fn spec_dump_round_trips_through_the_validator() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.cfg");
    let out = bin().arg("synth-validate").arg("--dump-spec").arg(&spec).output().unwrap();
    assert!(out.status.success());
    let text = std::fs::read_to_string(&spec).unwrap();
    assert!(text.contains("treat_ops"));
    // The dumped spec parses back and drives a quick emit.
    let csv = dir.path().join("c.csv");
    let out = bin()
        .arg("synth-validate")
        .arg("--spec")
        .arg(&spec)
        .arg("--emit-cohort")
        .arg(&csv)
        .arg("--emit-n")
        .arg("50")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 51);
}
