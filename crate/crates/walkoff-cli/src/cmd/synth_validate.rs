//! `walkoff synth-validate`: certify the estimation pipeline against
//! synthetic cohorts whose true effect is known. Prints one PASS/FAIL line
//! per invariant; any failure makes the exit status nonzero.

use std::fmt::Write as _;
use std::fs;

use anyhow::{anyhow, Context, Result};

use walkoff_core::causal::{
    crude_or, pipeline_log_or, EffectScale, PipelineConfig,
};
use walkoff_core::synth::{
    confounded_default_spec, generate, to_cohort, true_marginal_or, SynthSpec,
};

use crate::cmd::{CommandOutput, SynthValidateArgs};
use crate::formats::{parse_synth_spec, synth_spec_text};
use crate::manifest::RunManifest;
use crate::resolve_seed;

pub fn run(args: &SynthValidateArgs) -> Result<CommandOutput> {
    let seed = resolve_seed(args.seed);

    let spec = match &args.spec {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            parse_synth_spec(&text).map_err(|e| anyhow!("{}: {e}", path.display()))?
        }
        None => confounded_default_spec(),
    };

    if let Some(path) = &args.dump_spec {
        fs::write(path, synth_spec_text(&spec))
            .with_context(|| format!("cannot write {}", path.display()))?;
        return Ok(CommandOutput::ok(format!("spec written to {}\n", path.display())));
    }

    if let Some(path) = &args.emit_cohort {
        let cohort =
            to_cohort(&generate(&spec, args.emit_n, seed).map_err(|e| anyhow!("{e}"))?);
        crate::formats::write_cohort_csv(path, &cohort)?;
        return Ok(CommandOutput::ok(format!(
            "synthetic cohort ({} records, seed {seed}) written to {}\n",
            args.emit_n,
            path.display()
        )));
    }

    let mut manifest = RunManifest::new("synth-validate", seed);
    if let Some(path) = &args.spec {
        manifest.input(path)?;
    }
    manifest.config("n", args.n);
    manifest.config("reps", args.reps);

    let mut text = manifest.text_block();
    let mut all_passed = true;
    let mut check = |text: &mut String, name: &str, passed: bool, detail: String| {
        all_passed &= passed;
        let _ = writeln!(
            text,
            "{} {name}: {detail}",
            if passed { "PASS" } else { "FAIL" }
        );
    };

    // 1. Consistency identity: the observed outcome is the potential
    //    outcome of the arm actually taken, record by record.
    let records = generate(&spec, args.n, seed).map_err(|e| anyhow!("{e}"))?;
    let violations = records
        .iter()
        .filter(|r| r.win != if r.bunt { r.win_if_bunt } else { r.win_if_swing })
        .count();
    check(
        &mut text,
        "consistency identity",
        violations == 0,
        format!("{violations} violations in {} records", args.n),
    );

    // 2. Positivity: true propensities inside (0.01, 0.99) for ≥ 99%.
    let inside = records
        .iter()
        .filter(|r| r.true_propensity > 0.01 && r.true_propensity < 0.99)
        .count();
    let frac = inside as f64 / records.len() as f64;
    check(
        &mut text,
        "positivity",
        frac >= 0.99,
        format!("{:.2}% of true propensities in (0.01, 0.99)", 100.0 * frac),
    );

    // 3. Oracle convergence: two independent million-draw runs agree within
    //    three combined Monte Carlo standard errors.
    let a = true_marginal_or(&spec, 1_000_000, seed ^ 0x9e3779b97f4a7c15)
        .map_err(|e| anyhow!("{e}"))?;
    let b = true_marginal_or(&spec, 1_000_000, seed ^ 0x6a09e667f3bcc909)
        .map_err(|e| anyhow!("{e}"))?;
    let combined = (a.mc_se_log_or.powi(2) + b.mc_se_log_or.powi(2)).sqrt();
    let gap = (a.log_or - b.log_or).abs();
    check(
        &mut text,
        "oracle convergence",
        combined == 0.0 && gap == 0.0 || gap < 3.0 * combined,
        format!(
            "two-seed log-OR gap {:.5} vs 3 x combined MC se {:.5} (truth ~ {:.4})",
            gap,
            3.0 * combined,
            a.odds_ratio
        ),
    );

    // 4. Estimator recovery: over the repetitions, the IPW estimate
    //    (standardized marginal scale) lands closer to the brute-force
    //    truth than the crude estimate in at least 95%.
    let truth = true_marginal_or(&spec, 1_000_000, seed.wrapping_add(424_242))
        .map_err(|e| anyhow!("{e}"))?;
    let mut ipw_closer = 0usize;
    let mut failed_reps = 0usize;
    for rep in 0..args.reps {
        let cohort = to_cohort(
            &generate(&spec, args.n, seed.wrapping_add(1000 + rep as u64))
                .map_err(|e| anyhow!("{e}"))?,
        );
        let cfg = PipelineConfig {
            effect_scale: EffectScale::MarginalStandardized,
            seed: seed.wrapping_add(rep as u64),
            ..PipelineConfig::default()
        };
        let crude = match crude_or(&cohort, 0.95) {
            Ok(c) => c,
            Err(_) => {
                failed_reps += 1;
                continue;
            }
        };
        match pipeline_log_or(&cohort, &cfg) {
            Ok(ipw_log) => {
                if (ipw_log - truth.log_or).abs() < (crude.log_or - truth.log_or).abs() {
                    ipw_closer += 1;
                }
            }
            Err(_) => failed_reps += 1,
        }
    }
    let usable = args.reps - failed_reps;
    let rate = if usable == 0 { 0.0 } else { ipw_closer as f64 / usable as f64 };
    check(
        &mut text,
        "estimator recovery",
        usable > 0 && rate >= 0.95,
        format!(
            "IPW closer to truth than crude in {ipw_closer}/{usable} repetitions ({:.1}%), {failed_reps} failed",
            100.0 * rate
        ),
    );

    // 5. No confounding, no difference: with treatment slopes zeroed the
    //    crude and IPW estimates coincide at large n.
    let marginal_rate = records.iter().filter(|r| r.bunt).count() as f64
        / records.len() as f64;
    let null_spec: SynthSpec = spec.zero_confounding(marginal_rate.clamp(0.05, 0.95));
    let big = to_cohort(
        &generate(&null_spec, 50_000, seed.wrapping_add(777)).map_err(|e| anyhow!("{e}"))?,
    );
    let cfg = PipelineConfig {
        effect_scale: EffectScale::MarginalStandardized,
        seed,
        ..PipelineConfig::default()
    };
    let crude = crude_or(&big, 0.95).map_err(|e| anyhow!("{e}"))?;
    let collapse = match pipeline_log_or(&big, &cfg) {
        Ok(ipw_log) => Some((ipw_log - crude.log_or).abs()),
        Err(_) => None,
    };
    check(
        &mut text,
        "zero-confounding collapse",
        collapse.is_some_and(|d| d < 0.05),
        match collapse {
            Some(d) => format!(
                "|log IPW - log crude| = {d:.5} at n = 50000 (crude {:.4})",
                crude.odds_ratio
            ),
            None => "pipeline failed on the null cohort".to_string(),
        },
    );

    let exit_code = if all_passed { 0 } else { 1 };
    let _ = writeln!(
        text,
        "{}",
        if all_passed { "all checks passed" } else { "some checks FAILED" }
    );
    Ok(CommandOutput { text, exit_code })
}
