//! The analysis cohort: the first plate appearance of the home half of a
//! tied extra inning. Each qualifying half-inning yields one record carrying
//! the treatment (bunt vs swing away), the outcome (home team wins the game
//! in that inning; any run walks it off), covariates, and the result
//! category of the first plate appearance.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::baseout::BaseOutState;
use crate::retrosheet::{pitch_profile, replay_game, GameAccount, Half, PlayContext};
use crate::rng;
use crate::season::{covariates, BattingSeason, CovariateTriple, PitchingSeason, SeasonKey};

/// Outcome taxonomy of the first plate appearance. The first four are the
/// favorable results; a run scoring takes precedence over base-state
/// categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResultCategory {
    RunScores,
    FirstAndThirdNoOuts,
    FirstAndSecondNoOuts,
    ThirdOneOut,
    Other,
}

impl ResultCategory {
    pub const ALL: [ResultCategory; 5] = [
        ResultCategory::RunScores,
        ResultCategory::FirstAndThirdNoOuts,
        ResultCategory::FirstAndSecondNoOuts,
        ResultCategory::ThirdOneOut,
        ResultCategory::Other,
    ];

    pub fn favorable(self) -> bool {
        self != ResultCategory::Other
    }

    pub fn label(self) -> &'static str {
        match self {
            ResultCategory::RunScores => "RUN_SCORES",
            ResultCategory::FirstAndThirdNoOuts => "FIRST_AND_THIRD_NO_OUTS",
            ResultCategory::FirstAndSecondNoOuts => "FIRST_AND_SECOND_NO_OUTS",
            ResultCategory::ThirdOneOut => "THIRD_ONE_OUT",
            ResultCategory::Other => "OTHER",
        }
    }

    pub fn from_label(s: &str) -> Option<ResultCategory> {
        ResultCategory::ALL.into_iter().find(|c| c.label() == s)
    }

    fn index(self) -> usize {
        ResultCategory::ALL.iter().position(|c| *c == self).unwrap()
    }
}

/// Maps what the first plate appearance left behind to its category.
pub fn classify_result(runs_in_pa: u32, state_after: &BaseOutState) -> ResultCategory {
    if runs_in_pa >= 1 {
        return ResultCategory::RunScores;
    }
    let s = state_after;
    match (s.first, s.second, s.third, s.outs) {
        (true, false, true, 0) => ResultCategory::FirstAndThirdNoOuts,
        (true, true, false, 0) => ResultCategory::FirstAndSecondNoOuts,
        (false, false, true, 1) => ResultCategory::ThirdOneOut,
        _ => ResultCategory::Other,
    }
}

/// One analysis unit. `propensity` and `weight` stay unset until the causal
/// pipeline fills them.
#[derive(Debug, Clone, PartialEq)]
pub struct CohortRecord {
    pub game_id: String,
    pub season: u16,
    pub inning: u8,
    pub batter_id: String,
    pub pitcher_id: String,
    /// Treatment: the first plate appearance ended with a bunt in fair play.
    pub bunt: bool,
    /// Outcome: the home team scored (and so won) in this half-inning.
    pub win: bool,
    pub covariates: Option<CovariateTriple>,
    pub result_category: ResultCategory,
    /// Pitch string of the plate appearance, kept for the strategy audit;
    /// not part of the cohort CSV schema.
    pub pitches: String,
    pub propensity: Option<f64>,
    pub weight: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CohortError {
    #[error("season {0} predates the ghost-runner rule (2020)")]
    PreGhostRunnerSeason(u16),
}

/// A game the extractor had to skip, with the replay message explaining why.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedGame {
    pub game_id: String,
    pub reason: String,
}

/// Extraction output: records sorted by (game id, inning) plus the skip log.
#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub records: Vec<CohortRecord>,
    pub skipped: Vec<SkippedGame>,
    pub games_scanned: usize,
}

/// Selects qualifying half-innings: inning ≥ 10, home batting, score tied at
/// the start, ghost runner alone on second with nobody out. Games that fail
/// replay are skipped and logged, never silently dropped.
pub fn extract_situations(
    games: &[GameAccount],
    seasons: &BTreeSet<u16>,
) -> Result<Extraction, CohortError> {
    if let Some(&bad) = seasons.iter().find(|&&s| s < 2020) {
        return Err(CohortError::PreGhostRunnerSeason(bad));
    }

    let mut records = Vec::new();
    let mut skipped = Vec::new();
    let mut games_scanned = 0usize;

    for game in games {
        if !seasons.contains(&game.season) {
            continue;
        }
        games_scanned += 1;
        let replay = match replay_game(game) {
            Ok(r) => r,
            Err(e) => {
                skipped.push(SkippedGame {
                    game_id: game.game_id.clone(),
                    reason: e.to_string(),
                });
                continue;
            }
        };
        records.extend(situations_in_game(game, &replay.contexts));
    }

    records.sort_by(|a, b| (&a.game_id, a.inning).cmp(&(&b.game_id, b.inning)));
    Ok(Extraction { records, skipped, games_scanned })
}

fn situations_in_game(game: &GameAccount, contexts: &[PlayContext]) -> Vec<CohortRecord> {
    let mut out = Vec::new();
    let mut i = 0usize;
    let plays = &game.plays;
    while i < plays.len() {
        let key = (plays[i].inning, plays[i].half);
        let mut end = i;
        while end < plays.len() && (plays[end].inning, plays[end].half) == key {
            end += 1;
        }
        let (inning, half) = key;
        if half == Half::Bottom && inning >= 10 {
            let first = &contexts[i];
            let tied = first.score_home == first.score_away;
            if tied && first.state_before == BaseOutState::ghost_runner_start() {
                // The first plate appearance spans up to and including the
                // first PA-ending play; a mid-PA walk-off leaves it open and
                // the span runs to the end of the half.
                let pa_end = (i..end)
                    .find(|&j| contexts[j].is_plate_appearance_end)
                    .unwrap_or(end - 1);
                let runs_in_pa: u32 =
                    contexts[i..=pa_end].iter().map(|c| c.runs_on_play).sum();
                let runs_in_half: u32 =
                    contexts[i..end].iter().map(|c| c.runs_on_play).sum();
                let last = &plays[pa_end];
                out.push(CohortRecord {
                    game_id: game.game_id.clone(),
                    season: game.season,
                    inning,
                    batter_id: last.batter_id.clone(),
                    pitcher_id: last.pitcher_id.clone(),
                    bunt: contexts[pa_end].bunt_flag,
                    win: runs_in_half >= 1,
                    covariates: None,
                    result_category: classify_result(
                        runs_in_pa,
                        &contexts[pa_end].state_after,
                    ),
                    pitches: last.pitches.clone(),
                    propensity: None,
                    weight: None,
                });
            }
        }
        i = end;
    }
    out
}

/// Join accounting: how many records survived the covariate merge and why
/// the rest did not.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct JoinReport {
    pub input: usize,
    pub joined: usize,
    pub missing_batter: usize,
    pub missing_pitcher: usize,
    pub undefined_covariates: usize,
}

/// Attaches the covariate triple from season tables. Records whose batter or
/// pitcher is absent, or whose covariates are undefined (zero denominators),
/// are excluded and counted, never imputed.
pub fn join_covariates(
    records: &[CohortRecord],
    batting: &BTreeMap<SeasonKey, BattingSeason>,
    pitching: &BTreeMap<SeasonKey, PitchingSeason>,
) -> (Vec<CohortRecord>, JoinReport) {
    let mut report = JoinReport { input: records.len(), ..JoinReport::default() };
    let mut joined = Vec::with_capacity(records.len());
    for rec in records {
        let b = batting.get(&(rec.batter_id.clone(), rec.season));
        let p = pitching.get(&(rec.pitcher_id.clone(), rec.season));
        let (b, p) = match (b, p) {
            (Some(b), Some(p)) => (b, p),
            (None, _) => {
                report.missing_batter += 1;
                continue;
            }
            (_, None) => {
                report.missing_pitcher += 1;
                continue;
            }
        };
        match covariates(b, p) {
            Some(triple) => {
                let mut rec = rec.clone();
                rec.covariates = Some(triple);
                joined.push(rec);
            }
            None => report.undefined_covariates += 1,
        }
    }
    report.joined = joined.len();
    (joined, report)
}

/// Per-arm descriptive summary (the comparison-table layout).
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary {
    pub n: usize,
    pub wins: usize,
    pub win_rate: f64,
    pub ops_mean: f64,
    pub ops_sd: f64,
    pub sac_rate_mean: f64,
    pub sac_rate_sd: f64,
    pub era_mean: f64,
    pub era_sd: f64,
    /// Percentages over [`ResultCategory::ALL`] order; sums to 100 ± rounding.
    pub category_pct: [f64; 5],
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CohortSummary {
    pub bunt: Option<GroupSummary>,
    pub swing: Option<GroupSummary>,
}

pub fn summarize_cohort(records: &[CohortRecord]) -> CohortSummary {
    let group = |treated: bool| -> Option<GroupSummary> {
        let recs: Vec<&CohortRecord> =
            records.iter().filter(|r| r.bunt == treated).collect();
        if recs.is_empty() {
            return None;
        }
        let n = recs.len();
        let wins = recs.iter().filter(|r| r.win).count();
        let pull = |f: fn(&CovariateTriple) -> f64| -> Vec<f64> {
            recs.iter().filter_map(|r| r.covariates.as_ref()).map(f).collect()
        };
        let ops = pull(|c| c.ops);
        let sac = pull(|c| c.sac_rate);
        let era = pull(|c| c.era);
        let mut category_pct = [0.0; 5];
        for r in &recs {
            category_pct[r.result_category.index()] += 1.0;
        }
        for c in &mut category_pct {
            *c *= 100.0 / n as f64;
        }
        Some(GroupSummary {
            n,
            wins,
            win_rate: wins as f64 / n as f64,
            ops_mean: crate::stat::mean(&ops),
            ops_sd: crate::stat::sample_sd(&ops),
            sac_rate_mean: crate::stat::mean(&sac),
            sac_rate_sd: crate::stat::sample_sd(&sac),
            era_mean: crate::stat::mean(&era),
            era_sd: crate::stat::sample_sd(&era),
            category_pct,
        })
    };
    CohortSummary { bunt: group(true), swing: group(false) }
}

/// One arm of the strategy-switching audit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArmAudit {
    pub requested: usize,
    pub sampled: usize,
    pub switched: usize,
    /// Records with empty pitch strings: excluded from the fraction's
    /// denominator.
    pub unknown: usize,
}

impl ArmAudit {
    pub fn switched_fraction(&self) -> Option<f64> {
        let denom = self.sampled - self.unknown;
        (denom > 0).then(|| self.switched as f64 / denom as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AuditReport {
    pub bunt: ArmAudit,
    pub swing: ArmAudit,
    pub seed: u64,
}

/// Samples `n_per_group` records from each arm (seeded, reproducible; arms
/// larger than requested are subsampled, smaller arms are taken whole) and
/// reports how often batters mixed bunt attempts with swings.
pub fn audit_strategy_switching(
    records: &[CohortRecord],
    n_per_group: usize,
    seed: u64,
) -> AuditReport {
    let audit_arm = |treated: bool, stream: u64| -> ArmAudit {
        let arm: Vec<&CohortRecord> =
            records.iter().filter(|r| r.bunt == treated).collect();
        let mut rng = rng::derive_rng(seed, stream);
        let picks = rng::sample_indices(&mut rng, arm.len(), n_per_group);
        let mut switched = 0usize;
        let mut unknown = 0usize;
        for &i in &picks {
            let profile = pitch_profile(&arm[i].pitches, arm[i].bunt);
            if !profile.known {
                unknown += 1;
            } else if profile.switched_strategy {
                switched += 1;
            }
        }
        ArmAudit { requested: n_per_group, sampled: picks.len(), switched, unknown }
    };
    AuditReport { bunt: audit_arm(true, 0), swing: audit_arm(false, 1), seed }
}
