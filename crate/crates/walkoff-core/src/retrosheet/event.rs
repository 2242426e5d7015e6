//! The play-event grammar: a primary event (hit, out, walk, ...), optional
//! `+`-chained baserunning events, `/`-separated modifiers, and
//! `.`-separated runner advances.
//!
//! Parsing is deliberately tolerant of annotation characters (`!`, `#`, `?`)
//! and only models what the replay engine needs: who batted, who moved,
//! who is out.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::EventParseError;

/// A runner position an advance or putout can reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Runner {
    Batter,
    First,
    Second,
    Third,
}

impl Runner {
    fn from_char(c: char) -> Option<Runner> {
        match c {
            'B' => Some(Runner::Batter),
            '1' => Some(Runner::First),
            '2' => Some(Runner::Second),
            '3' => Some(Runner::Third),
            _ => None,
        }
    }

    /// 0-based base index for non-batter runners.
    pub(crate) fn base_index(self) -> Option<usize> {
        match self {
            Runner::Batter => None,
            Runner::First => Some(0),
            Runner::Second => Some(1),
            Runner::Third => Some(2),
        }
    }
}

/// An advance target: a base or home.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdvanceTarget {
    First,
    Second,
    Third,
    Home,
}

impl AdvanceTarget {
    fn from_char(c: char) -> Option<AdvanceTarget> {
        match c {
            '1' => Some(AdvanceTarget::First),
            '2' => Some(AdvanceTarget::Second),
            '3' => Some(AdvanceTarget::Third),
            'H' => Some(AdvanceTarget::Home),
            _ => None,
        }
    }

    pub(crate) fn base_index(self) -> Option<usize> {
        match self {
            AdvanceTarget::First => Some(0),
            AdvanceTarget::Second => Some(1),
            AdvanceTarget::Third => Some(2),
            AdvanceTarget::Home => None,
        }
    }

    fn rank(self) -> u8 {
        match self {
            AdvanceTarget::First => 1,
            AdvanceTarget::Second => 2,
            AdvanceTarget::Third => 3,
            AdvanceTarget::Home => 4,
        }
    }
}

/// One explicit advance, e.g. `2-H`, `B-1`, or `1X3(5E4)` (the embedded
/// error makes the runner safe).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Advance {
    pub from: Runner,
    pub to: AdvanceTarget,
    pub out: bool,
}

/// What the batter did, when the play involves the batter at all.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BatterEvent {
    Single,
    Double,
    GroundRuleDouble,
    Triple,
    HomeRun,
    Walk,
    IntentionalWalk,
    HitByPitch,
    Strikeout,
    CatcherInterference,
    /// `E$`: batter reaches on an error.
    ReachedOnError,
    FieldersChoice,
    /// A fielded out: zero or more runners retired by name, plus possibly
    /// the batter. `batter_out = false` with an `E` in the batter's chain
    /// means the batter reached on a dropped throw.
    FieldedOut { runners_out: Vec<Runner>, batter_out: bool },
    /// `FLE$`: error on a foul fly; no advance, the plate appearance
    /// continues.
    FoulFlyError,
    NoPlay,
}

/// A baserunning event: standalone (`SB2`, `WP`) or chained after a
/// strikeout/walk with `+`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunningAction {
    StolenBase(AdvanceTarget),
    CaughtStealing { target: AdvanceTarget, safe_on_error: bool },
    PickOff { base: Runner, safe_on_error: bool },
    PickOffCaughtStealing { target: AdvanceTarget, safe_on_error: bool },
    WildPitch,
    PassedBall,
    Balk,
    OtherAdvance,
    DefensiveIndifference,
    /// `E$` appearing as a secondary event; movement comes from the
    /// explicit advances.
    Error,
}

/// A fully parsed event string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedEvent {
    pub batter: Option<BatterEvent>,
    pub running: Vec<RunningAction>,
    pub modifiers: Vec<String>,
    pub advances: Vec<Advance>,
}

impl ParsedEvent {
    /// True when the event ends the batter's plate appearance.
    pub fn ends_plate_appearance(&self) -> bool {
        match &self.batter {
            None => false,
            Some(BatterEvent::NoPlay) | Some(BatterEvent::FoulFlyError) => false,
            Some(_) => true,
        }
    }
}

/// Splits `s` on `sep` at paren depth zero.
fn split_depth0(s: &str, sep: char) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            c if c == sep && depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

/// Finds the first `.` at paren depth zero, the advance-section separator.
fn find_advance_dot(s: &str) -> Option<usize> {
    let mut depth = 0usize;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            '.' if depth == 0 => return Some(i),
            _ => {}
        }
    }
    None
}

pub fn parse_event(event_text: &str) -> Result<ParsedEvent, EventParseError> {
    // Annotation characters carry no replay semantics.
    let cleaned: String =
        event_text.chars().filter(|c| !matches!(c, '!' | '#' | '?')).collect();
    let cleaned = cleaned.trim();
    if cleaned.is_empty() {
        return Err(EventParseError::new(event_text, "empty event text"));
    }

    let (event_part, advance_part) = match find_advance_dot(cleaned) {
        Some(i) => (&cleaned[..i], Some(&cleaned[i + 1..])),
        None => (cleaned, None),
    };

    let mut segments = split_depth0(event_part, '/').into_iter();
    let primary = segments.next().unwrap_or("");
    let modifiers: Vec<String> =
        segments.filter(|m| !m.is_empty()).map(|m| m.to_string()).collect();

    let (batter, running) = parse_primary(event_text, primary)?;

    let mut advances = Vec::new();
    if let Some(adv) = advance_part {
        for token in split_depth0(adv, ';') {
            let token = token.trim();
            if token.is_empty() {
                continue;
            }
            advances.push(parse_advance(event_text, token)?);
        }
    }

    Ok(ParsedEvent { batter, running, modifiers, advances })
}

fn parse_primary(
    full: &str,
    primary: &str,
) -> Result<(Option<BatterEvent>, Vec<RunningAction>), EventParseError> {
    let mut chunks = split_depth0(primary, '+').into_iter();
    let head = chunks.next().unwrap_or("");

    let mut running = Vec::new();

    // `;` separates simultaneous baserunning events (double steals etc.).
    let head_tokens = split_depth0(head, ';');
    let batter = if head_tokens.len() > 1 {
        for t in &head_tokens {
            running.push(parse_running(full, t)?);
        }
        None
    } else {
        match parse_batter(full, head)? {
            Some(ev) => Some(ev),
            None => {
                running.push(parse_running(full, head)?);
                None
            }
        }
    };

    for chunk in chunks {
        for t in split_depth0(chunk, ';') {
            running.push(parse_running(full, t)?);
        }
    }
    Ok((batter, running))
}

/// Parses a batter-event token; `Ok(None)` means "not a batter event, try
/// the baserunning grammar".
fn parse_batter(full: &str, token: &str) -> Result<Option<BatterEvent>, EventParseError> {
    if token.is_empty() {
        return Err(EventParseError::new(full, "empty primary event"));
    }
    let b = token.as_bytes();
    if b[0].is_ascii_digit() {
        return parse_out_chain(full, token).map(Some);
    }
    let ev = if token == "NP" {
        BatterEvent::NoPlay
    } else if token == "HP" {
        BatterEvent::HitByPitch
    } else if token == "HR" || token == "H" || starts_then_digits(token, "HR") || starts_then_digits(token, "H") {
        BatterEvent::HomeRun
    } else if starts_then_digits(token, "DGR") {
        BatterEvent::GroundRuleDouble
    } else if token == "IW" || token == "I" {
        BatterEvent::IntentionalWalk
    } else if token == "W" {
        BatterEvent::Walk
    } else if token == "K" || (b[0] == b'K' && token[1..].bytes().all(|c| c.is_ascii_digit())) {
        BatterEvent::Strikeout
    } else if token == "C" {
        BatterEvent::CatcherInterference
    } else if starts_then_digits(token, "FLE") {
        BatterEvent::FoulFlyError
    } else if starts_then_digits(token, "FC") {
        BatterEvent::FieldersChoice
    } else if starts_then_digits(token, "E") {
        BatterEvent::ReachedOnError
    } else if token != "SB2" && token != "SB3" && token != "SBH" && starts_then_digits(token, "S")
    {
        BatterEvent::Single
    } else if token != "DI" && starts_then_digits(token, "D") {
        BatterEvent::Double
    } else if starts_then_digits(token, "T") {
        BatterEvent::Triple
    } else {
        return Ok(None);
    };
    Ok(Some(ev))
}

fn starts_then_digits(token: &str, prefix: &str) -> bool {
    token.strip_prefix(prefix).is_some_and(|rest| rest.bytes().all(|c| c.is_ascii_digit()))
}

fn parse_running(full: &str, token: &str) -> Result<RunningAction, EventParseError> {
    let token = token.trim();
    match token {
        "WP" => return Ok(RunningAction::WildPitch),
        "PB" => return Ok(RunningAction::PassedBall),
        "BK" => return Ok(RunningAction::Balk),
        "OA" => return Ok(RunningAction::OtherAdvance),
        "DI" => return Ok(RunningAction::DefensiveIndifference),
        _ => {}
    }
    if let Some(rest) = token.strip_prefix("SB") {
        let target = rest
            .chars()
            .next()
            .and_then(AdvanceTarget::from_char)
            .filter(|t| *t != AdvanceTarget::First)
            .ok_or_else(|| EventParseError::new(full, "bad stolen-base target"))?;
        return Ok(RunningAction::StolenBase(target));
    }
    if let Some(rest) = token.strip_prefix("POCS") {
        let (target, safe) = parse_running_target(full, rest)?;
        return Ok(RunningAction::PickOffCaughtStealing { target, safe_on_error: safe });
    }
    if let Some(rest) = token.strip_prefix("PO") {
        let base = rest
            .chars()
            .next()
            .and_then(Runner::from_char)
            .filter(|r| *r != Runner::Batter)
            .ok_or_else(|| EventParseError::new(full, "bad pickoff base"))?;
        return Ok(RunningAction::PickOff { base, safe_on_error: params_negate(&rest[1..]) });
    }
    if let Some(rest) = token.strip_prefix("CS") {
        let (target, safe) = parse_running_target(full, rest)?;
        return Ok(RunningAction::CaughtStealing { target, safe_on_error: safe });
    }
    if starts_then_digits(token, "E") {
        return Ok(RunningAction::Error);
    }
    Err(EventParseError::new(full, format!("unrecognized event token `{token}`")))
}

fn parse_running_target(
    full: &str,
    rest: &str,
) -> Result<(AdvanceTarget, bool), EventParseError> {
    let target = rest
        .chars()
        .next()
        .and_then(AdvanceTarget::from_char)
        .filter(|t| *t != AdvanceTarget::First)
        .ok_or_else(|| EventParseError::new(full, "bad caught-stealing target"))?;
    Ok((target, params_negate(&rest[1..])))
}

/// True when a parenthesized fielding chain contains an error, which makes
/// the nominal out safe.
fn params_negate(params: &str) -> bool {
    params.contains('E')
}

/// Parses a digit-led out chain like `63`, `64(1)3`, `8(B)84(2)`, or
/// `54(1)E3` (error: batter safe).
fn parse_out_chain(full: &str, token: &str) -> Result<BatterEvent, EventParseError> {
    let mut runners_out = Vec::new();
    let mut chain = String::new();
    let mut batter_group = false;
    let mut chars = token.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '(' => {
                let runner = chars
                    .next()
                    .and_then(Runner::from_char)
                    .ok_or_else(|| EventParseError::new(full, "bad out-chain runner"))?;
                if chars.next() != Some(')') {
                    return Err(EventParseError::new(full, "unterminated out-chain group"));
                }
                if chain.contains('E') {
                    // Error before the group: the preceding chain retired no one.
                } else {
                    runners_out.push(runner);
                }
                chain.clear();
            }
            c if c.is_ascii_digit() || c == 'E' => {
                chain.push(c);
                batter_group = true;
            }
            other => {
                return Err(EventParseError::new(
                    full,
                    format!("unexpected `{other}` in out chain"),
                ));
            }
        }
        if chars.peek().is_none() {
            break;
        }
    }
    // Whatever digits trail the last parenthesized group belong to the
    // batter; an embedded E means the batter reached on the error.
    let batter_out = batter_group && !chain.is_empty() && !chain.contains('E');
    let batter_reached = batter_group && !chain.is_empty() && chain.contains('E');
    if runners_out.contains(&Runner::Batter) {
        let runners_out = runners_out.into_iter().filter(|r| *r != Runner::Batter).collect();
        return Ok(BatterEvent::FieldedOut { runners_out, batter_out: true });
    }
    if batter_reached {
        return Ok(BatterEvent::FieldedOut { runners_out, batter_out: false });
    }
    Ok(BatterEvent::FieldedOut { runners_out, batter_out })
}

fn parse_advance(full: &str, token: &str) -> Result<Advance, EventParseError> {
    let mut chars = token.char_indices();
    let (_, from_c) =
        chars.next().ok_or_else(|| EventParseError::new(full, "empty advance"))?;
    let from = Runner::from_char(from_c)
        .ok_or_else(|| EventParseError::new(full, "bad advance source"))?;
    let (_, sep) =
        chars.next().ok_or_else(|| EventParseError::new(full, "truncated advance"))?;
    let out_marker = match sep {
        '-' => false,
        'X' => true,
        _ => return Err(EventParseError::new(full, "bad advance separator")),
    };
    let (to_idx, to_c) =
        chars.next().ok_or_else(|| EventParseError::new(full, "truncated advance"))?;
    let to = AdvanceTarget::from_char(to_c)
        .ok_or_else(|| EventParseError::new(full, "bad advance target"))?;
    let params = &token[to_idx + to_c.len_utf8()..];
    let out = out_marker && !params_negate(params);
    // Runners never move backward; treat `2-2`-style holds as safe stays.
    let from_rank = match from {
        Runner::Batter => 0,
        Runner::First => 1,
        Runner::Second => 2,
        Runner::Third => 3,
    };
    if to.rank() < from_rank {
        return Err(EventParseError::new(full, "advance moves runner backward"));
    }
    Ok(Advance { from, to, out })
}

/// The modifier spellings that mark a bunt. `BGDP`/`BPDP` are bunt double
/// plays; plain `B` appears in older data.
const BUNT_MODIFIERS: [&str; 6] = ["B", "BG", "BP", "BL", "BGDP", "BPDP"];

/// True when the plate appearance ended with a bunt in fair play: a bunt
/// modifier on an event where the ball was put in play. Foul-bunt
/// strikeouts, walks, and no-plays are not bunts in fair play.
pub fn classify_bunt(event_text: &str) -> bool {
    let Ok(parsed) = parse_event(event_text) else {
        return false;
    };
    let in_play = matches!(
        parsed.batter,
        Some(BatterEvent::Single)
            | Some(BatterEvent::Double)
            | Some(BatterEvent::GroundRuleDouble)
            | Some(BatterEvent::Triple)
            | Some(BatterEvent::HomeRun)
            | Some(BatterEvent::ReachedOnError)
            | Some(BatterEvent::FieldersChoice)
            | Some(BatterEvent::FieldedOut { .. })
    );
    if !in_play {
        return false;
    }
    parsed.modifiers.iter().any(|m| {
        let alpha_len = m.bytes().take_while(|c| c.is_ascii_uppercase()).count();
        BUNT_MODIFIERS.contains(&&m[..alpha_len])
    })
}
