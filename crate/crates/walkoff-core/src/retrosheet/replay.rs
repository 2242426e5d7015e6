//! Replays a parsed game, reconstructing score, outs, and base occupancy
//! before and after every play.
//!
//! Explicit `.`-advances always win; implied movement is the minimal forced
//! movement for the event (batter to his base on a hit, force chains on
//! walks and batter-to-first plays, the named runner on steals). Each half
//! inning starts with no outs and, for extra innings in the ghost-runner
//! era (2020 on), a runner placed on second base.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::baseout::BaseOutState;

use super::event::{parse_event, AdvanceTarget, BatterEvent, ParsedEvent, RunningAction};
use super::{GameAccount, Half};

/// Reconstructed context around one play. Scores are as of *before* the
/// play; `runs_on_play` accrues to the batting team.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlayContext {
    pub state_before: BaseOutState,
    pub score_away: u32,
    pub score_home: u32,
    pub runs_on_play: u32,
    pub state_after: BaseOutState,
    pub bunt_flag: bool,
    pub is_plate_appearance_end: bool,
}

/// A fully replayed game: one context per play plus the derived final line
/// score.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameReplay {
    pub contexts: Vec<PlayContext>,
    pub final_away_runs: u32,
    pub final_home_runs: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReplayErrorKind {
    Event(String),
    AdvanceFromEmptyBase(&'static str),
    DoubleOccupancy(&'static str),
    ConflictingAdvance(&'static str),
    TooManyOuts,
    OutOfOrderPlay,
    HalfEndedEarly,
}

/// A replay inconsistency, pinned to the game and play where it surfaced.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("replay inconsistency in game {game_id} at play {play_index} (`{event_text}`): {message}")]
pub struct ReplayError {
    pub game_id: String,
    pub play_index: usize,
    pub event_text: String,
    pub message: String,
}

struct Movement {
    bases_after: [bool; 3],
    outs_after: u8,
    runs: u32,
}

fn base_name(i: usize) -> &'static str {
    ["first", "second", "third"][i]
}

/// Applies one parsed event to a base-out state. Pure; where the event file
/// is internally inconsistent (advance from an empty base, two runners on
/// one base, more than three outs) the offending condition is named.
fn apply_event(before: &BaseOutState, ev: &ParsedEvent) -> Result<Movement, ReplayErrorKind> {
    // `pre` marks runners still awaiting a decision; `post` marks claimed
    // destination bases.
    let mut pre = [before.first, before.second, before.third];
    let mut post = [false; 3];
    let mut outs = before.outs as u32;
    let mut runs = 0u32;
    let mut batter_decided = false;

    // Explicit advances first, lead runner first so claims cascade cleanly.
    let mut advances = ev.advances.clone();
    advances.sort_by_key(|a| core::cmp::Reverse(a.from));
    for adv in &advances {
        match adv.from.base_index() {
            Some(i) => {
                if !pre[i] {
                    return Err(ReplayErrorKind::AdvanceFromEmptyBase(base_name(i)));
                }
                pre[i] = false;
            }
            None => {
                if batter_decided {
                    return Err(ReplayErrorKind::ConflictingAdvance("batter"));
                }
                batter_decided = true;
            }
        }
        if adv.out {
            outs += 1;
        } else {
            match adv.to.base_index() {
                Some(t) => {
                    if post[t] {
                        return Err(ReplayErrorKind::DoubleOccupancy(base_name(t)));
                    }
                    post[t] = true;
                }
                None => runs += 1,
            }
        }
    }

    fn claim(post: &mut [bool; 3], t: usize) -> Result<(), ReplayErrorKind> {
        if post[t] {
            return Err(ReplayErrorKind::DoubleOccupancy(base_name(t)));
        }
        post[t] = true;
        Ok(())
    }

    // Moves the batter to first, pushing the contiguous chain of forced
    // runners one base each.
    fn force_batter_to_first(
        pre: &mut [bool; 3],
        post: &mut [bool; 3],
        runs: &mut u32,
    ) -> Result<(), ReplayErrorKind> {
        let mut chain_end = 0;
        while chain_end < 3 && pre[chain_end] {
            chain_end += 1;
        }
        for i in (0..chain_end).rev() {
            pre[i] = false;
            if i == 2 {
                *runs += 1;
            } else {
                claim(post, i + 1)?;
            }
        }
        claim(post, 0)
    }

    match &ev.batter {
        Some(BatterEvent::NoPlay) | Some(BatterEvent::FoulFlyError) => {}
        Some(BatterEvent::Single) | Some(BatterEvent::Double)
        | Some(BatterEvent::GroundRuleDouble) | Some(BatterEvent::Triple)
        | Some(BatterEvent::HomeRun) => {
            let batter_base: usize = match ev.batter.as_ref().unwrap() {
                BatterEvent::Single => 0,
                BatterEvent::Double | BatterEvent::GroundRuleDouble => 1,
                BatterEvent::Triple => 2,
                BatterEvent::HomeRun => 3,
                _ => unreachable!(),
            };
            // Undecided runners, lead first: on a home run everyone scores;
            // otherwise runners beyond the batter's base hold, and runners at
            // or below it take the lowest open base beyond it (scoring when
            // pushed past third). Identity is not tracked, so "the trailing
            // runner spills home" and "the lead runner is pushed home" are
            // the same occupancy-and-runs outcome.
            for i in (0..3).rev() {
                if !pre[i] {
                    continue;
                }
                pre[i] = false;
                if batter_base == 3 {
                    runs += 1;
                    continue;
                }
                if i > batter_base {
                    claim(&mut post, i)?;
                } else {
                    let mut target = batter_base + 1;
                    while target < 3 && post[target] {
                        target += 1;
                    }
                    if target >= 3 {
                        runs += 1;
                    } else {
                        claim(&mut post, target)?;
                    }
                }
            }
            if !batter_decided {
                if batter_base == 3 {
                    runs += 1;
                } else {
                    claim(&mut post, batter_base)?;
                }
            }
        }
        Some(BatterEvent::Walk)
        | Some(BatterEvent::IntentionalWalk)
        | Some(BatterEvent::HitByPitch)
        | Some(BatterEvent::CatcherInterference) => {
            if !batter_decided {
                force_batter_to_first(&mut pre, &mut post, &mut runs)?;
            }
        }
        Some(BatterEvent::ReachedOnError) | Some(BatterEvent::FieldersChoice) => {
            if !batter_decided {
                force_batter_to_first(&mut pre, &mut post, &mut runs)?;
            }
        }
        Some(BatterEvent::Strikeout) => {
            if !batter_decided {
                outs += 1;
            }
        }
        Some(BatterEvent::FieldedOut { runners_out, batter_out }) => {
            for r in runners_out {
                let i = r.base_index().expect("batter filtered out of runner groups");
                if !pre[i] {
                    return Err(ReplayErrorKind::AdvanceFromEmptyBase(base_name(i)));
                }
                pre[i] = false;
                outs += 1;
            }
            if !batter_decided {
                if *batter_out {
                    outs += 1;
                } else {
                    force_batter_to_first(&mut pre, &mut post, &mut runs)?;
                }
            }
        }
        None => {}
    }

    for action in &ev.running {
        match action {
            RunningAction::StolenBase(target) => {
                let from = target.base_index().map(|t| t - 1);
                match from {
                    Some(i) => {
                        if pre[i] {
                            pre[i] = false;
                            claim(&mut post, i + 1)?;
                        }
                    }
                    None => {
                        // SBH: steal of home.
                        if pre[2] {
                            pre[2] = false;
                            runs += 1;
                        }
                    }
                }
            }
            RunningAction::CaughtStealing { target, safe_on_error }
            | RunningAction::PickOffCaughtStealing { target, safe_on_error } => {
                let from = match target {
                    AdvanceTarget::Second => 0,
                    AdvanceTarget::Third => 1,
                    AdvanceTarget::Home => 2,
                    AdvanceTarget::First => unreachable!("filtered at parse"),
                };
                if pre[from] {
                    pre[from] = false;
                    if *safe_on_error {
                        if from == 2 {
                            runs += 1;
                        } else {
                            claim(&mut post, from + 1)?;
                        }
                    } else {
                        outs += 1;
                    }
                }
            }
            RunningAction::PickOff { base, safe_on_error } => {
                let i = base.base_index().expect("batter pickoff impossible");
                if pre[i] {
                    if *safe_on_error {
                        // Safe on the error: holds unless an explicit advance said more.
                    } else {
                        pre[i] = false;
                        outs += 1;
                    }
                }
            }
            RunningAction::WildPitch
            | RunningAction::PassedBall
            | RunningAction::Balk
            | RunningAction::OtherAdvance
            | RunningAction::DefensiveIndifference
            | RunningAction::Error => {}
        }
    }

    // Whoever was never moved holds their base.
    for (i, &waiting) in pre.iter().enumerate() {
        if waiting {
            claim(&mut post, i)?;
        }
    }

    if outs > 3 {
        return Err(ReplayErrorKind::TooManyOuts);
    }

    Ok(Movement { bases_after: post, outs_after: outs as u8, runs })
}

/// Replays every play of a game to a [`PlayContext`] sequence plus the
/// derived final score.
pub fn replay_game(game: &GameAccount) -> Result<GameReplay, ReplayError> {
    let err = |idx: usize, event: &str, kind: ReplayErrorKind| {
        let message = match kind {
            ReplayErrorKind::Event(m) => m,
            ReplayErrorKind::AdvanceFromEmptyBase(b) => {
                format!("advance from unoccupied {b} base")
            }
            ReplayErrorKind::DoubleOccupancy(b) => format!("two runners claim {b} base"),
            ReplayErrorKind::ConflictingAdvance(who) => {
                format!("conflicting movement for {who}")
            }
            ReplayErrorKind::TooManyOuts => "more than three outs".to_string(),
            ReplayErrorKind::OutOfOrderPlay => "plays out of inning order".to_string(),
            ReplayErrorKind::HalfEndedEarly => {
                "new half inning before three outs".to_string()
            }
        };
        ReplayError {
            game_id: game.game_id.clone(),
            play_index: idx,
            event_text: event.to_string(),
            message,
        }
    };

    let ghost_runner = game.season >= 2020;
    let half_start = |inning: u8| -> BaseOutState {
        if ghost_runner && inning >= 10 {
            BaseOutState::ghost_runner_start()
        } else {
            BaseOutState::empty()
        }
    };

    let mut contexts = Vec::with_capacity(game.plays.len());
    let mut score = [0u32; 2]; // away, home
    let mut current: Option<(u8, Half)> = None;
    let mut state = BaseOutState::empty();

    for (idx, play) in game.plays.iter().enumerate() {
        let key = (play.inning, play.half);
        match current {
            None => {
                current = Some(key);
                state = half_start(play.inning);
            }
            Some(prev) if prev == key => {}
            Some(prev) => {
                if key < prev {
                    return Err(err(idx, &play.event_text, ReplayErrorKind::OutOfOrderPlay));
                }
                if state.outs != 3 {
                    return Err(err(idx, &play.event_text, ReplayErrorKind::HalfEndedEarly));
                }
                current = Some(key);
                state = half_start(play.inning);
            }
        }

        let parsed = parse_event(&play.event_text)
            .map_err(|e| err(idx, &play.event_text, ReplayErrorKind::Event(e.message)))?;
        let moved =
            apply_event(&state, &parsed).map_err(|k| err(idx, &play.event_text, k))?;

        let state_after = BaseOutState {
            first: moved.bases_after[0],
            second: moved.bases_after[1],
            third: moved.bases_after[2],
            outs: moved.outs_after.min(3),
        };
        contexts.push(PlayContext {
            state_before: state,
            score_away: score[0],
            score_home: score[1],
            runs_on_play: moved.runs,
            state_after,
            bunt_flag: super::classify_bunt(&play.event_text),
            is_plate_appearance_end: parsed.ends_plate_appearance(),
        });
        score[play.half as usize] += moved.runs;
        state = state_after;
    }

    Ok(GameReplay { contexts, final_away_runs: score[0], final_home_runs: score[1] })
}
