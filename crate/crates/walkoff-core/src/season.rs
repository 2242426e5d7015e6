//! Season-level batting and pitching tables and the three covariates:
//! OPS, sacrifice-bunt rate per 100 plate appearances, and ERA.
//!
//! Input arrives as an already-tokenized [`Table`] (header row plus string
//! cells); the companion crate owns actual CSV file decoding. Rows for the
//! same player-season (multiple stints after a trade) are summed.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

/// A tokenized tabular file: one header row and the data rows.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: Vec<String>, rows: Vec<Vec<String>>) -> Self {
        Table { headers, rows }
    }

    fn column(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }
}

/// The table violates the expected schema.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SchemaError {
    #[error("missing required column `{0}`")]
    MissingColumn(String),
    #[error("row {row}: bad numeric value `{value}` in column `{column}`")]
    BadNumber { row: usize, column: String, value: String },
}

/// One batter's season totals, summed over stints.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BattingSeason {
    pub player_id: String,
    pub season: u16,
    pub at_bats: u32,
    pub hits: u32,
    pub doubles: u32,
    pub triples: u32,
    pub home_runs: u32,
    pub walks: u32,
    pub hit_by_pitch: u32,
    pub sacrifice_flies: u32,
    pub sacrifice_hits: u32,
}

/// One pitcher's season totals, summed over stints.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PitchingSeason {
    pub player_id: String,
    pub season: u16,
    pub earned_runs: u32,
    /// Innings pitched × 3 (the `IPouts` column).
    pub outs_recorded: u32,
}

/// The covariates attached to every cohort record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovariateTriple {
    pub ops: f64,
    pub sac_rate: f64,
    pub era: f64,
}

pub type SeasonKey = (String, u16);

fn parse_count(
    row_idx: usize,
    row: &[String],
    col: usize,
    name: &str,
) -> Result<u32, SchemaError> {
    let cell = row.get(col).map(String::as_str).unwrap_or("");
    if cell.is_empty() {
        return Ok(0); // missing numeric cells read as zero
    }
    cell.parse::<u32>().map_err(|_| SchemaError::BadNumber {
        row: row_idx + 1,
        column: name.to_string(),
        value: cell.to_string(),
    })
}

const BATTING_COLUMNS: [&str; 11] =
    ["playerID", "yearID", "AB", "H", "2B", "3B", "HR", "BB", "HBP", "SF", "SH"];

/// Loads a Lahman-style `Batting` table, summing stints per player-season.
pub fn load_batting(table: &Table) -> Result<BTreeMap<SeasonKey, BattingSeason>, SchemaError> {
    let cols: Vec<usize> = BATTING_COLUMNS
        .iter()
        .map(|name| {
            table.column(name).ok_or_else(|| SchemaError::MissingColumn(name.to_string()))
        })
        .collect::<Result<_, _>>()?;

    let mut out: BTreeMap<SeasonKey, BattingSeason> = BTreeMap::new();
    for (i, row) in table.rows.iter().enumerate() {
        let player_id = row.get(cols[0]).cloned().unwrap_or_default();
        let season = parse_count(i, row, cols[1], "yearID")? as u16;
        let entry = out.entry((player_id.clone(), season)).or_insert_with(|| BattingSeason {
            player_id,
            season,
            ..BattingSeason::default()
        });
        entry.at_bats += parse_count(i, row, cols[2], "AB")?;
        entry.hits += parse_count(i, row, cols[3], "H")?;
        entry.doubles += parse_count(i, row, cols[4], "2B")?;
        entry.triples += parse_count(i, row, cols[5], "3B")?;
        entry.home_runs += parse_count(i, row, cols[6], "HR")?;
        entry.walks += parse_count(i, row, cols[7], "BB")?;
        entry.hit_by_pitch += parse_count(i, row, cols[8], "HBP")?;
        entry.sacrifice_flies += parse_count(i, row, cols[9], "SF")?;
        entry.sacrifice_hits += parse_count(i, row, cols[10], "SH")?;
    }
    Ok(out)
}

const PITCHING_COLUMNS: [&str; 4] = ["playerID", "yearID", "ER", "IPouts"];

/// Loads a Lahman-style `Pitching` table, summing stints per player-season.
pub fn load_pitching(
    table: &Table,
) -> Result<BTreeMap<SeasonKey, PitchingSeason>, SchemaError> {
    let cols: Vec<usize> = PITCHING_COLUMNS
        .iter()
        .map(|name| {
            table.column(name).ok_or_else(|| SchemaError::MissingColumn(name.to_string()))
        })
        .collect::<Result<_, _>>()?;

    let mut out: BTreeMap<SeasonKey, PitchingSeason> = BTreeMap::new();
    for (i, row) in table.rows.iter().enumerate() {
        let player_id = row.get(cols[0]).cloned().unwrap_or_default();
        let season = parse_count(i, row, cols[1], "yearID")? as u16;
        let entry = out.entry((player_id.clone(), season)).or_insert_with(|| PitchingSeason {
            player_id,
            season,
            ..PitchingSeason::default()
        });
        entry.earned_runs += parse_count(i, row, cols[2], "ER")?;
        entry.outs_recorded += parse_count(i, row, cols[3], "IPouts")?;
    }
    Ok(out)
}

/// On-base plus slugging. `None` when a denominator is zero; the record is
/// excluded downstream by the cohort join policy.
pub fn compute_ops(b: &BattingSeason) -> Option<f64> {
    let obp_denom = b.at_bats + b.walks + b.hit_by_pitch + b.sacrifice_flies;
    if b.at_bats == 0 || obp_denom == 0 {
        return None;
    }
    let obp = (b.hits + b.walks + b.hit_by_pitch) as f64 / obp_denom as f64;
    let singles = b.hits - b.doubles - b.triples - b.home_runs;
    let total_bases = singles + 2 * b.doubles + 3 * b.triples + 4 * b.home_runs;
    let slg = total_bases as f64 / b.at_bats as f64;
    Some(obp + slg)
}

/// Sacrifice hits per 100 plate appearances.
pub fn compute_sac_rate(b: &BattingSeason) -> Option<f64> {
    let pa = b.at_bats + b.walks + b.hit_by_pitch + b.sacrifice_flies + b.sacrifice_hits;
    if pa == 0 {
        return None;
    }
    Some(100.0 * b.sacrifice_hits as f64 / pa as f64)
}

/// Earned runs per nine innings.
pub fn compute_era(p: &PitchingSeason) -> Option<f64> {
    if p.outs_recorded == 0 {
        return None;
    }
    Some(9.0 * p.earned_runs as f64 / (p.outs_recorded as f64 / 3.0))
}

/// Assembles the covariate triple; `None` when any component is undefined.
pub fn covariates(b: &BattingSeason, p: &PitchingSeason) -> Option<CovariateTriple> {
    Some(CovariateTriple {
        ops: compute_ops(b)?,
        sac_rate: compute_sac_rate(b)?,
        era: compute_era(p)?,
    })
}

/// Writable description of covariates per player-season for the optional
/// dump: `(player_id, season, ops, sac_rate, era)` with absent parts `None`.
pub type CovariateDumpRow = (String, u16, Option<f64>, Option<f64>, Option<f64>);

/// Rows for the covariate dump: batters contribute OPS and sacrifice rate,
/// pitchers ERA.
pub fn covariate_dump(
    batting: &BTreeMap<SeasonKey, BattingSeason>,
    pitching: &BTreeMap<SeasonKey, PitchingSeason>,
) -> Vec<CovariateDumpRow> {
    let mut rows: Vec<CovariateDumpRow> = Vec::new();
    for ((id, season), b) in batting {
        rows.push((id.clone(), *season, compute_ops(b), compute_sac_rate(b), None));
    }
    for ((id, season), p) in pitching {
        rows.push((id.clone(), *season, None, None, compute_era(p)));
    }
    rows.sort_by(|a, b| (&a.0, a.1).cmp(&(&b.0, b.1)));
    rows
}

#[cfg(test)]
pub(crate) fn table_from_fixture(header: &str, rows: &[&str]) -> Table {
    Table::new(
        header.split(',').map(|s| s.to_string()).collect(),
        rows.iter()
            .map(|r| r.split(',').map(|s| s.to_string()).collect())
            .collect(),
    )
}
