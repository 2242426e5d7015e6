//! Line-oriented event-file parsing: `id`, `version`, `info`, `start`,
//! `sub`, `play`, `com`, `data`, and the adjustment records. Player names in
//! `start`/`sub` records are quoted, so fields are split with a small
//! quote-aware scanner rather than a bare comma split.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{GameAccount, Half, PlayRecord};

/// Result of parsing one event file (which may hold many games).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseOutput {
    pub games: Vec<GameAccount>,
    /// Records of unknown type, skipped with a count rather than an error.
    pub skipped_records: u32,
}

/// A structural problem in the file, pinned to its 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError { line, message: message.into() }
    }
}

/// Splits one record line on commas, honoring double-quoted fields.
fn split_record(line: &str) -> Vec<String> {
    let mut fields = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    for c in line.chars() {
        match c {
            '"' => quoted = !quoted,
            ',' if !quoted => {
                fields.push(core::mem::take(&mut cur));
            }
            _ => cur.push(c),
        }
    }
    fields.push(cur);
    fields
}

fn season_of(game_id: &str, info: &BTreeMap<String, String>) -> Option<u16> {
    if let Some(date) = info.get("date") {
        if let Some(year) = date.split('/').next() {
            if let Ok(y) = year.parse::<u16>() {
                return Some(y);
            }
        }
    }
    // Fall back to the yyyy embedded in the game id (e.g. ANA202104010).
    game_id.get(3..7).and_then(|y| y.parse::<u16>().ok())
}

struct GameBuilder {
    game_id: String,
    id_line: usize,
    info: BTreeMap<String, String>,
    plays: Vec<PlayRecord>,
    /// Current pitcher per team side (0 = visiting, 1 = home).
    pitchers: [String; 2],
}

impl GameBuilder {
    fn finish(self) -> Result<GameAccount, ParseError> {
        let season = season_of(&self.game_id, &self.info).ok_or_else(|| {
            ParseError::new(
                self.id_line,
                format!("game {}: season undeterminable (no date info)", self.game_id),
            )
        })?;
        Ok(GameAccount {
            game_id: self.game_id,
            season,
            info: self.info,
            plays: self.plays,
        })
    }
}

/// Parses a whole event file. Returns one [`GameAccount`] per `id` record;
/// unknown record types are counted, malformed known records are errors.
pub fn parse_event_file(input: &str) -> Result<ParseOutput, ParseError> {
    let mut games = Vec::new();
    let mut skipped = 0u32;
    let mut current: Option<GameBuilder> = None;

    for (idx, raw) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let fields = split_record(line);
        let record_type = fields[0].as_str();
        match record_type {
            "id" => {
                if fields.len() < 2 || fields[1].is_empty() {
                    return Err(ParseError::new(line_no, "id record without a game id"));
                }
                if let Some(g) = current.take() {
                    games.push(g.finish()?);
                }
                current = Some(GameBuilder {
                    game_id: fields[1].clone(),
                    id_line: line_no,
                    info: BTreeMap::new(),
                    plays: Vec::new(),
                    pitchers: [String::new(), String::new()],
                });
            }
            "version" => {}
            "info" => {
                let g = current.as_mut().ok_or_else(|| {
                    ParseError::new(line_no, "info record before any id record")
                })?;
                if fields.len() < 3 {
                    return Err(ParseError::new(line_no, "info record needs key and value"));
                }
                // Rejoin in case an unquoted value contained commas.
                g.info.insert(fields[1].clone(), fields[2..].join(","));
            }
            "start" | "sub" => {
                let g = current.as_mut().ok_or_else(|| {
                    ParseError::new(
                        line_no,
                        format!("{record_type} record before any id record"),
                    )
                })?;
                if fields.len() != 6 {
                    return Err(ParseError::new(
                        line_no,
                        format!(
                            "{} record has {} fields, expected 6",
                            record_type,
                            fields.len()
                        ),
                    ));
                }
                let team = match fields[3].as_str() {
                    "0" => 0usize,
                    "1" => 1usize,
                    other => {
                        return Err(ParseError::new(
                            line_no,
                            format!("bad team `{other}` in {record_type} record"),
                        ))
                    }
                };
                // Fielding position 1 is the pitcher; that is all the replay
                // and cohort need from the lineup records.
                if fields[5] == "1" {
                    g.pitchers[team] = fields[1].clone();
                }
            }
            "play" => {
                let g = current
                    .as_mut()
                    .ok_or_else(|| ParseError::new(line_no, "play record before any id record"))?;
                if fields.len() != 7 {
                    return Err(ParseError::new(
                        line_no,
                        format!("play record has {} fields, expected 7", fields.len()),
                    ));
                }
                let inning: u8 = fields[1].parse().map_err(|_| {
                    ParseError::new(line_no, format!("bad inning `{}`", fields[1]))
                })?;
                let half = Half::from_digit(&fields[2]).ok_or_else(|| {
                    ParseError::new(line_no, format!("bad half `{}`", fields[2]))
                })?;
                if fields[6].is_empty() {
                    return Err(ParseError::new(line_no, "play record with empty event"));
                }
                // The pitcher on the mound belongs to the fielding team.
                let fielding = match half {
                    Half::Top => 1,
                    Half::Bottom => 0,
                };
                g.plays.push(PlayRecord {
                    inning,
                    half,
                    batter_id: fields[3].clone(),
                    pitcher_id: g.pitchers[fielding].clone(),
                    count: fields[4].clone(),
                    pitches: fields[5].clone(),
                    event_text: fields[6].clone(),
                });
            }
            "com" | "data" | "badj" | "padj" | "ladj" | "radj" | "presadj" => {}
            _ => skipped += 1,
        }
    }
    if let Some(g) = current.take() {
        games.push(g.finish()?);
    }
    Ok(ParseOutput { games, skipped_records: skipped })
}

/// Serializes games back to event-file text. Lineup records are reduced to
/// the synthetic `sub` records needed to reproduce each play's pitcher, so
/// `parse(write(parse(f)))` yields identical [`GameAccount`]s.
pub fn write_event_file(games: &[GameAccount]) -> String {
    let mut out = String::new();
    for game in games {
        out.push_str("id,");
        out.push_str(&game.game_id);
        out.push('\n');
        out.push_str("version,2\n");
        for (k, v) in &game.info {
            out.push_str(&format!("info,{k},{v}\n"));
        }
        let mut pitchers = [String::new(), String::new()];
        for play in &game.plays {
            let fielding = match play.half {
                Half::Top => 1,
                Half::Bottom => 0,
            };
            if pitchers[fielding] != play.pitcher_id && !play.pitcher_id.is_empty() {
                pitchers[fielding] = play.pitcher_id.clone();
                out.push_str(&format!(
                    "sub,{id},\"{id}\",{team},0,1\n",
                    id = play.pitcher_id,
                    team = fielding
                ));
            }
            out.push_str(&format!(
                "play,{},{},{},{},{},{}\n",
                play.inning,
                play.half.digit(),
                play.batter_id,
                play.count,
                play.pitches,
                play.event_text
            ));
        }
    }
    out
}
