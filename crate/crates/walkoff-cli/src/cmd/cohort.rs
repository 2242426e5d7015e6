//! `walkoff cohort`: extract qualifying half-innings, merge season
//! covariates, summarize the two arms, and write the cohort CSV.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;

use anyhow::{bail, Context, Result};

use walkoff_core::cohort::{
    audit_strategy_switching, extract_situations, join_covariates, summarize_cohort,
    ArmAudit, GroupSummary, ResultCategory,
};
use walkoff_core::season::{covariate_dump, load_batting, load_pitching};

use crate::cmd::{CohortArgs, CommandOutput};
use crate::formats::{collect_event_paths, load_games, load_table, write_cohort_csv};
use crate::manifest::RunManifest;
use crate::resolve_seed;

pub fn run(args: &CohortArgs) -> Result<CommandOutput> {
    let seed = resolve_seed(args.seed);
    let mut manifest = RunManifest::new("cohort", seed);
    manifest.config(
        "seasons",
        args.seasons.iter().map(u16::to_string).collect::<Vec<_>>().join(","),
    );
    manifest.config("audit_n", args.audit_n);

    let files = collect_event_paths(&args.events)?;
    for f in &files {
        manifest.input(f)?;
    }
    manifest.input(&args.batting)?;
    manifest.input(&args.pitching)?;

    let games = load_games(&files)?;
    let seasons: BTreeSet<u16> = args.seasons.iter().copied().collect();
    let extraction = extract_situations(&games, &seasons)?;
    if extraction.records.is_empty() {
        bail!(
            "no qualifying situations: {} games scanned in seasons {:?}, none reached a tied home half of an extra inning",
            extraction.games_scanned,
            args.seasons
        );
    }

    let batting = load_batting(&load_table(&args.batting)?)?;
    let pitching = load_pitching(&load_table(&args.pitching)?)?;
    let (joined, join_report) = join_covariates(&extraction.records, &batting, &pitching);
    if joined.is_empty() {
        bail!(
            "covariate join removed every record ({} missing batters, {} missing pitchers, {} undefined)",
            join_report.missing_batter,
            join_report.missing_pitcher,
            join_report.undefined_covariates
        );
    }

    write_cohort_csv(&args.out, &joined)?;
    if let Some(path) = &args.covariates_out {
        let mut dump = String::from("player_id,season,ops,sac_rate,era\n");
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        for (id, season, ops, sac, era) in covariate_dump(&batting, &pitching) {
            let _ = writeln!(dump, "{id},{season},{},{},{}", fmt(ops), fmt(sac), fmt(era));
        }
        fs::write(path, dump).with_context(|| format!("cannot write {}", path.display()))?;
    }

    let summary = summarize_cohort(&joined);
    let audit = audit_strategy_switching(&joined, args.audit_n, seed);

    let mut text = manifest.text_block();
    let _ = writeln!(text, "games scanned          : {}", extraction.games_scanned);
    let _ = writeln!(text, "qualifying situations  : {}", extraction.records.len());
    let _ = writeln!(text, "games skipped (replay) : {}", extraction.skipped.len());
    for s in &extraction.skipped {
        let _ = writeln!(text, "  {}: {}", s.game_id, s.reason);
    }
    let _ = writeln!(text, "covariate join         : {} kept, {} missing batter, {} missing pitcher, {} undefined",
        join_report.joined,
        join_report.missing_batter,
        join_report.missing_pitcher,
        join_report.undefined_covariates,
    );
    let _ = writeln!(text);
    text.push_str(&summary_table(&summary));
    let _ = writeln!(text);
    text.push_str(&category_table(&summary));
    let _ = writeln!(text);
    text.push_str(&audit_table(args.audit_n, &audit.bunt, &audit.swing));
    let _ = writeln!(text, "\ncohort written to {}", args.out.display());
    Ok(CommandOutput::ok(text))
}

fn group_cells(g: Option<&GroupSummary>) -> [String; 5] {
    match g {
        None => core::array::from_fn(|_| "absent".to_string()),
        Some(g) => [
            format!("{}", g.n),
            format!("{:.1}%", 100.0 * g.win_rate),
            format!("{:.3} ± {:.3}", g.ops_mean, g.ops_sd),
            format!("{:.2} ± {:.2}", g.sac_rate_mean, g.sac_rate_sd),
            format!("{:.2} ± {:.2}", g.era_mean, g.era_sd),
        ],
    }
}

fn summary_table(s: &walkoff_core::cohort::CohortSummary) -> String {
    let bunt = group_cells(s.bunt.as_ref());
    let swing = group_cells(s.swing.as_ref());
    let rows = ["n", "home team wins", "batter ops", "batter sac rate /100PA", "pitcher era"];
    let mut out = String::from("cohort comparison\n");
    let _ = writeln!(out, "  {:<24} {:>16} {:>16}", "", "bunt (A=1)", "swing (A=0)");
    for (label, (b, w)) in rows.iter().zip(bunt.iter().zip(swing.iter())) {
        let _ = writeln!(out, "  {label:<24} {b:>16} {w:>16}");
    }
    out
}

fn category_table(s: &walkoff_core::cohort::CohortSummary) -> String {
    let mut out = String::from("first plate appearance results (% within arm)\n");
    let _ = writeln!(out, "  {:<26} {:>8} {:>8}", "category", "bunt", "swing");
    for (i, cat) in ResultCategory::ALL.iter().enumerate() {
        let cell = |g: Option<&GroupSummary>| {
            g.map(|g| format!("{:.1}", g.category_pct[i])).unwrap_or_else(|| "-".to_string())
        };
        let _ = writeln!(
            out,
            "  {:<26} {:>8} {:>8}",
            cat.label(),
            cell(s.bunt.as_ref()),
            cell(s.swing.as_ref())
        );
    }
    out
}

fn audit_table(requested: usize, bunt: &ArmAudit, swing: &ArmAudit) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "strategy-switching audit ({requested} requested per arm)");
    for (label, arm) in [("bunt", bunt), ("swing", swing)] {
        let frac = arm
            .switched_fraction()
            .map(|f| format!("{:.1}%", 100.0 * f))
            .unwrap_or_else(|| "n/a".to_string());
        let _ = writeln!(
            out,
            "  {label:<5} arm: sampled {}, switched {} ({}), unknown pitch strings {}",
            arm.sampled, arm.switched, frac, arm.unknown
        );
    }
    out
}
