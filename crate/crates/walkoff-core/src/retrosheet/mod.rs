//! Retrosheet-format event files: parsing, the play-event grammar, a replay
//! engine reconstructing per-play game state, and pitch-sequence profiling.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

pub mod event;
mod parse;
mod pitch;
mod replay;

pub use event::{classify_bunt, parse_event, Advance, BatterEvent, ParsedEvent, RunningAction};
pub use parse::{parse_event_file, write_event_file, ParseError, ParseOutput};
pub use pitch::{pitch_profile, PitchProfile};
pub use replay::{replay_game, GameReplay, PlayContext, ReplayError, ReplayErrorKind};

/// Which half of the inning a play belongs to. Matches the event-file
/// encoding: 0 = top (visitors bat), 1 = bottom (home bats).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Half {
    Top = 0,
    Bottom = 1,
}

impl Half {
    pub fn from_digit(d: &str) -> Option<Half> {
        match d {
            "0" => Some(Half::Top),
            "1" => Some(Half::Bottom),
            _ => None,
        }
    }

    pub fn digit(self) -> char {
        match self {
            Half::Top => '0',
            Half::Bottom => '1',
        }
    }
}

/// One `play` record with the pitcher on the mound resolved from the
/// surrounding `start`/`sub` records.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlayRecord {
    pub inning: u8,
    pub half: Half,
    pub batter_id: String,
    pub pitcher_id: String,
    /// Ball-strike count at the event, two digits or `??`.
    pub count: String,
    /// Pitch-by-pitch codes, possibly empty in older data.
    pub pitches: String,
    pub event_text: String,
}

/// One game: identity, metadata, and its plays in file order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameAccount {
    /// 12-character id, home team + date + game number.
    pub game_id: String,
    pub season: u16,
    pub info: BTreeMap<String, String>,
    pub plays: Vec<PlayRecord>,
}

impl GameAccount {
    pub fn visiting_team(&self) -> Option<&str> {
        self.info.get("visteam").map(String::as_str)
    }

    pub fn home_team(&self) -> Option<&str> {
        self.info.get("hometeam").map(String::as_str)
    }
}

/// An event string the grammar could not make sense of.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("bad event `{event}`: {message}")]
pub struct EventParseError {
    pub event: String,
    pub message: String,
}

impl EventParseError {
    pub(crate) fn new(event: &str, message: impl Into<String>) -> Self {
        EventParseError { event: String::from(event), message: message.into() }
    }
}
