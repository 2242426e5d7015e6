//! On-disk formats: the cohort CSV interchange file, Lahman-style table
//! loading, flat key=value config files for the simulator model and the
//! synthetic spec, and the CSV artifacts the estimate command emits.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};

use walkoff_core::causal::{AnalysisReport, EffectEstimate, PropensityHistogram};
use walkoff_core::cohort::{CohortRecord, ResultCategory};
use walkoff_core::glm::LogisticModel;
use walkoff_core::retrosheet::{parse_event_file, GameAccount};
use walkoff_core::season::Table;
use walkoff_core::sim::{EventModel, PaOutcome};
use walkoff_core::stat;
use walkoff_core::synth::{LinearPredictor, SynthSpec, TruncatedNormal, ZeroInflatedExponential};
use walkoff_core::CovariateTriple;

use crate::manifest::RunManifest;

pub const COHORT_HEADER: &str =
    "game_id,season,inning,batter_id,pitcher_id,A,Y,ops,sac_rate,era,result_category";

/// Collects event files from file or directory paths. Directories
/// contribute their `.EV*` entries, sorted by name for determinism.
pub fn collect_event_paths(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for path in paths {
        if path.is_dir() {
            let mut entries: Vec<PathBuf> = fs::read_dir(path)
                .with_context(|| format!("cannot read directory {}", path.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| {
                    p.extension()
                        .and_then(|e| e.to_str())
                        .is_some_and(|e| e.to_ascii_uppercase().starts_with("EV"))
                })
                .collect();
            entries.sort();
            files.extend(entries);
        } else if path.exists() {
            files.push(path.clone());
        } else {
            bail!("no such path: {}", path.display());
        }
    }
    Ok(files)
}

/// Parses every event file into game accounts, tagging errors with the file.
pub fn load_games(paths: &[PathBuf]) -> Result<Vec<GameAccount>> {
    let mut games = Vec::new();
    for path in paths {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        let parsed = parse_event_file(&text)
            .map_err(|e| anyhow!("{}: {e}", path.display()))?;
        games.extend(parsed.games);
    }
    Ok(games)
}

/// Reads a CSV file into the core's tokenized table form.
pub fn load_table(path: &Path) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .with_context(|| format!("cannot open {}", path.display()))?;
    let headers = reader.headers()?.iter().map(|s| s.to_string()).collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.with_context(|| format!("bad CSV row in {}", path.display()))?;
        rows.push(record.iter().map(|s| s.to_string()).collect());
    }
    Ok(Table::new(headers, rows))
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.6}")
}

/// Writes the cohort interchange CSV. This file is the boundary between the
/// data pipeline and the estimation pipeline, so it stays comment-free.
pub fn write_cohort_csv(path: &Path, records: &[CohortRecord]) -> Result<()> {
    let mut out = String::new();
    out.push_str(COHORT_HEADER);
    out.push('\n');
    for r in records {
        let c = r
            .covariates
            .as_ref()
            .ok_or_else(|| anyhow!("record {} lacks covariates", r.game_id))?;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.game_id,
            r.season,
            r.inning,
            r.batter_id,
            r.pitcher_id,
            r.bunt as u8,
            r.win as u8,
            fmt_f64(c.ops),
            fmt_f64(c.sac_rate),
            fmt_f64(c.era),
            r.result_category.label()
        );
    }
    fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// Reads a cohort CSV back into records. Lines starting with `#` are
/// tolerated and skipped.
pub fn read_cohort_csv(path: &Path) -> Result<Vec<CohortRecord>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| anyhow!("{}: empty cohort file", path.display()))?;
    if header.trim() != COHORT_HEADER {
        bail!(
            "{}: unexpected cohort header\n  found:    {}\n  expected: {}",
            path.display(),
            header.trim(),
            COHORT_HEADER
        );
    }
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 11 {
            bail!("{} row {}: expected 11 fields, found {}", path.display(), i + 2, fields.len());
        }
        let parse_f = |s: &str, what: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| anyhow!("{} row {}: bad {what} `{s}`", path.display(), i + 2))
        };
        let parse_bit = |s: &str, what: &str| -> Result<bool> {
            match s {
                "0" => Ok(false),
                "1" => Ok(true),
                _ => bail!("{} row {}: {what} must be 0 or 1, found `{s}`", path.display(), i + 2),
            }
        };
        records.push(CohortRecord {
            game_id: fields[0].to_string(),
            season: fields[1]
                .parse()
                .map_err(|_| anyhow!("{} row {}: bad season", path.display(), i + 2))?,
            inning: fields[2]
                .parse()
                .map_err(|_| anyhow!("{} row {}: bad inning", path.display(), i + 2))?,
            batter_id: fields[3].to_string(),
            pitcher_id: fields[4].to_string(),
            bunt: parse_bit(fields[5], "A")?,
            win: parse_bit(fields[6], "Y")?,
            covariates: Some(CovariateTriple {
                ops: parse_f(fields[7], "ops")?,
                sac_rate: parse_f(fields[8], "sac_rate")?,
                era: parse_f(fields[9], "era")?,
            }),
            result_category: ResultCategory::from_label(fields[10]).ok_or_else(|| {
                anyhow!("{} row {}: unknown result category `{}`", path.display(), i + 2, fields[10])
            })?,
            pitches: String::new(),
            propensity: None,
            weight: None,
        });
    }
    Ok(records)
}

/// effects.csv: one row per estimate.
pub fn effects_csv(manifest: &RunManifest, effects: &[&EffectEstimate]) -> String {
    let mut out = manifest.csv_header();
    out.push_str("method,odds_ratio,ci_lo,ci_hi,ci_method,n_used,n_trimmed\n");
    for e in effects {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            e.method.label(),
            fmt_f64(e.odds_ratio),
            fmt_f64(e.ci.0),
            fmt_f64(e.ci.1),
            e.ci_method.label(),
            e.n_used,
            e.n_trimmed
        );
    }
    out
}

/// propensity_hist.csv: the score distribution per arm (the figure data).
pub fn histogram_csv(manifest: &RunManifest, hist: &PropensityHistogram) -> String {
    let mut out = manifest.csv_header();
    out.push_str("bin_lo,bin_hi,count_bunt,count_swing\n");
    for b in &hist.bins {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(b.lo),
            fmt_f64(b.hi),
            b.count_bunt,
            b.count_swing
        );
    }
    out
}

/// Coefficient table for a fitted model, intervals on the coefficient scale.
pub fn model_csv(manifest: &RunManifest, model: &LogisticModel, level: f64) -> String {
    let z = stat::normal_quantile(0.5 + level / 2.0);
    let mut out = manifest.csv_header();
    out.push_str("coefficient,estimate,std_error,z,ci_lo,ci_hi\n");
    for name in model.names() {
        let est = model.coefficient(name).expect("listed name");
        let se = model.std_error(name).expect("listed name");
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            name,
            fmt_f64(est),
            fmt_f64(se),
            fmt_f64(est / se),
            fmt_f64(est - z * se),
            fmt_f64(est + z * se)
        );
    }
    out
}

pub fn balance_csv(manifest: &RunManifest, report: &AnalysisReport) -> String {
    let b = &report.balance;
    let mut out = manifest.csv_header();
    let _ = writeln!(out, "# ess_bunt: {}", fmt_f64(b.ess_bunt));
    let _ = writeln!(out, "# ess_swing: {}", fmt_f64(b.ess_swing));
    out.push_str("covariate,smd_unweighted,smd_weighted,comparable\n");
    for row in &b.rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            row.covariate.name(),
            fmt_f64(row.smd_unweighted),
            fmt_f64(row.smd_weighted),
            row.comparable
        );
    }
    out
}

/// Flat `key = value` config files: `#` comments, blank lines ignored.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected `key = value`, found `{raw}`", i + 1))?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn take_f64(map: &mut BTreeMap<String, String>, key: &str, default: f64) -> Result<f64> {
    match map.remove(key) {
        None => Ok(default),
        Some(v) => v.parse::<f64>().map_err(|_| anyhow!("field `{key}`: bad number `{v}`")),
    }
}

fn reject_unknown(map: &BTreeMap<String, String>) -> Result<()> {
    if let Some(key) = map.keys().next() {
        bail!("unknown field `{key}`");
    }
    Ok(())
}

/// Simulator model file. Every key is optional and defaults to the built-in
/// swing-away model; `p_sac_success` rides along for the policy comparison.
pub fn parse_event_model(text: &str) -> Result<(EventModel, f64)> {
    let mut map = parse_kv(text)?;
    let defaults = EventModel::default_swing();
    let mut probs = [0.0; 8];
    for (slot, outcome) in probs.iter_mut().zip(PaOutcome::ALL) {
        *slot = take_f64(&mut map, outcome.label(), defaults.prob(outcome))?;
    }
    let p2 = take_f64(
        &mut map,
        "single_scores_from_second",
        defaults.single_scores_from_second,
    )?;
    let q = take_f64(&mut map, "out_scores_from_third", defaults.out_scores_from_third)?;
    let p_sac = take_f64(&mut map, "p_sac_success", walkoff_core::sim::DEFAULT_SAC_SUCCESS)?;
    reject_unknown(&map)?;
    let model = EventModel::new(probs, p2, q).map_err(|e| anyhow!("{e}"))?;
    Ok((model, p_sac))
}

pub fn event_model_text(model: &EventModel, p_sac_success: f64) -> String {
    let mut out = String::from("# plate-appearance outcome distribution\n");
    for outcome in PaOutcome::ALL {
        let _ = writeln!(out, "{} = {}", outcome.label(), model.prob(outcome));
    }
    let _ = writeln!(out, "single_scores_from_second = {}", model.single_scores_from_second);
    let _ = writeln!(out, "out_scores_from_third = {}", model.out_scores_from_third);
    let _ = writeln!(out, "p_sac_success = {p_sac_success}");
    out
}

/// Synthetic-spec file; unset keys default to the documented confounded
/// mechanism, unknown keys are errors naming the field.
pub fn parse_synth_spec(text: &str) -> Result<SynthSpec> {
    let mut map = parse_kv(text)?;
    let d = walkoff_core::synth::confounded_default_spec();
    let spec = SynthSpec {
        ops: TruncatedNormal {
            mean: take_f64(&mut map, "ops_mean", d.ops.mean)?,
            sd: take_f64(&mut map, "ops_sd", d.ops.sd)?,
        },
        sac_rate: ZeroInflatedExponential {
            p_zero: take_f64(&mut map, "sac_p_zero", d.sac_rate.p_zero)?,
            exp_mean: take_f64(&mut map, "sac_exp_mean", d.sac_rate.exp_mean)?,
        },
        era: TruncatedNormal {
            mean: take_f64(&mut map, "era_mean", d.era.mean)?,
            sd: take_f64(&mut map, "era_sd", d.era.sd)?,
        },
        treatment: LinearPredictor {
            intercept: take_f64(&mut map, "treat_intercept", d.treatment.intercept)?,
            ops: take_f64(&mut map, "treat_ops", d.treatment.ops)?,
            sac_rate: take_f64(&mut map, "treat_sac_rate", d.treatment.sac_rate)?,
            era: take_f64(&mut map, "treat_era", d.treatment.era)?,
        },
        outcome: LinearPredictor {
            intercept: take_f64(&mut map, "out_intercept", d.outcome.intercept)?,
            ops: take_f64(&mut map, "out_ops", d.outcome.ops)?,
            sac_rate: take_f64(&mut map, "out_sac_rate", d.outcome.sac_rate)?,
            era: take_f64(&mut map, "out_era", d.outcome.era)?,
        },
        bunt_effect: take_f64(&mut map, "out_bunt", d.bunt_effect)?,
    };
    reject_unknown(&map)?;
    spec.validate().map_err(|e| anyhow!("{e}"))?;
    Ok(spec)
}

pub fn synth_spec_text(spec: &SynthSpec) -> String {
    let mut out = String::from("# covariate distributions\n");
    let _ = writeln!(out, "ops_mean = {}", spec.ops.mean);
    let _ = writeln!(out, "ops_sd = {}", spec.ops.sd);
    let _ = writeln!(out, "sac_p_zero = {}", spec.sac_rate.p_zero);
    let _ = writeln!(out, "sac_exp_mean = {}", spec.sac_rate.exp_mean);
    let _ = writeln!(out, "era_mean = {}", spec.era.mean);
    let _ = writeln!(out, "era_sd = {}", spec.era.sd);
    out.push_str("# treatment assignment (logit scale)\n");
    let _ = writeln!(out, "treat_intercept = {}", spec.treatment.intercept);
    let _ = writeln!(out, "treat_ops = {}", spec.treatment.ops);
    let _ = writeln!(out, "treat_sac_rate = {}", spec.treatment.sac_rate);
    let _ = writeln!(out, "treat_era = {}", spec.treatment.era);
    out.push_str("# outcome model (logit scale)\n");
    let _ = writeln!(out, "out_intercept = {}", spec.outcome.intercept);
    let _ = writeln!(out, "out_ops = {}", spec.outcome.ops);
    let _ = writeln!(out, "out_sac_rate = {}", spec.outcome.sac_rate);
    let _ = writeln!(out, "out_era = {}", spec.outcome.era);
    let _ = writeln!(out, "out_bunt = {}", spec.bunt_effect);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use walkoff_core::synth::{confounded_default_spec, generate, to_cohort};

    #[test]
    fn cohort_csv_round_trips() {
        let records = to_cohort(&generate(&confounded_default_spec(), 50, 3).unwrap());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cohort.csv");
        write_cohort_csv(&path, &records).unwrap();
        let back = read_cohort_csv(&path).unwrap();
        assert_eq!(back.len(), records.len());
        for (a, b) in records.iter().zip(&back) {
            assert_eq!(a.game_id, b.game_id);
            assert_eq!(a.bunt, b.bunt);
            assert_eq!(a.win, b.win);
            let ca = a.covariates.unwrap();
            let cb = b.covariates.unwrap();
            assert!((ca.ops - cb.ops).abs() < 1e-6);
            assert!((ca.sac_rate - cb.sac_rate).abs() < 1e-6);
            assert!((ca.era - cb.era).abs() < 1e-6);
            assert_eq!(a.result_category, b.result_category);
        }
    }

    #[test]
    fn cohort_csv_rejects_wrong_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "nope,nope\n1,2\n").unwrap();
        assert!(read_cohort_csv(&path).is_err());
    }

    #[test]
    fn event_model_kv_round_trips_and_rejects_unknown_keys() {
        let m = EventModel::default_swing();
        let text = event_model_text(&m, 0.96);
        let (back, p_sac) = parse_event_model(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(p_sac, 0.96);

        let err = parse_event_model("walk = 0.1\nbanana = 2\n").unwrap_err();
        assert!(err.to_string().contains("banana"));
    }

    #[test]
    fn synth_spec_kv_round_trips_and_names_bad_fields() {
        let spec = confounded_default_spec();
        let text = synth_spec_text(&spec);
        let back = parse_synth_spec(&text).unwrap();
        assert_eq!(back, spec);

        let err = parse_synth_spec("ops_sd = -1\n").unwrap_err();
        assert!(err.to_string().contains("ops_sd"));
        let err = parse_synth_spec("mystery_field = 3\n").unwrap_err();
        assert!(err.to_string().contains("mystery_field"));
    }
}
