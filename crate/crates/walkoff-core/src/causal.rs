//! The estimation pipeline: propensity scores, trimming, inverse
//! probability weights, crude and IPW odds ratios, bootstrap intervals, and
//! balance diagnostics.
//!
//! The crude odds ratio comes from the full 2×2 table. The IPW estimate
//! refits a weighted logistic outcome model (win ~ bunt + covariates) on
//! the trimmed pseudo-population; its default interval is a nonparametric
//! bootstrap percentile because Wald standard errors from a weighted
//! likelihood are not valid without sandwich corrections; the Wald
//! interval is still emitted alongside, labeled as such.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use crate::cohort::CohortRecord;
use crate::glm::{self, DesignMatrix, FitOptions, GlmError, LogisticModel};
use crate::rng;
use crate::season::CovariateTriple;
use crate::stat;

/// Bootstrap replicate `i` draws from stream `OFFSET + i`, clear of the
/// small stream numbers other components use on the same run seed.
const BOOTSTRAP_STREAM_OFFSET: u64 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Covariate {
    Ops,
    SacRate,
    Era,
}

impl Covariate {
    pub const ALL: [Covariate; 3] = [Covariate::Ops, Covariate::SacRate, Covariate::Era];

    pub fn name(self) -> &'static str {
        match self {
            Covariate::Ops => "ops",
            Covariate::SacRate => "sac_rate",
            Covariate::Era => "era",
        }
    }

    pub fn value(self, c: &CovariateTriple) -> f64 {
        match self {
            Covariate::Ops => c.ops,
            Covariate::SacRate => c.sac_rate,
            Covariate::Era => c.era,
        }
    }
}

/// How control-arm weights are formed. The pseudo-population form is the
/// standard one; the literal reading of "weight by the inverse of the
/// propensity score" is available for sensitivity analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightScheme {
    /// 1/e for the treated, 1/(1−e) for controls.
    PseudoPopulation,
    /// 1/e for everyone.
    LiteralInverse,
}

/// Which effect the IPW model reports: the conditional odds ratio
/// (exp of the treatment coefficient, the default) or a standardized
/// marginal odds ratio obtained by averaging model predictions under each
/// treatment over the trimmed cohort.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EffectScale {
    Conditional,
    MarginalStandardized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CiMethod {
    Wald,
    Bootstrap,
}

impl CiMethod {
    pub fn label(self) -> &'static str {
        match self {
            CiMethod::Wald => "wald",
            CiMethod::Bootstrap => "bootstrap",
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub trim_lo: f64,
    pub trim_hi: f64,
    pub propensity_covariates: Vec<Covariate>,
    pub outcome_covariates: Vec<Covariate>,
    pub bootstrap_replicates: usize,
    pub seed: u64,
    pub ci_level: f64,
    pub ci_method: CiMethod,
    pub weight_scheme: WeightScheme,
    pub effect_scale: EffectScale,
    pub fit: FitOptions,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            trim_lo: 0.1,
            trim_hi: 0.9,
            propensity_covariates: Covariate::ALL.to_vec(),
            outcome_covariates: Covariate::ALL.to_vec(),
            bootstrap_replicates: 2000,
            seed: 0,
            ci_level: 0.95,
            ci_method: CiMethod::Bootstrap,
            weight_scheme: WeightScheme::PseudoPopulation,
            effect_scale: EffectScale::Conditional,
            fit: FitOptions::default(),
        }
    }
}

impl PipelineConfig {
    pub fn with_seed(seed: u64) -> Self {
        PipelineConfig { seed, ..PipelineConfig::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EffectMethod {
    Crude,
    Ipw,
}

impl EffectMethod {
    pub fn label(self) -> &'static str {
        match self {
            EffectMethod::Crude => "crude",
            EffectMethod::Ipw => "ipw",
        }
    }
}

/// One estimated odds ratio with its interval.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectEstimate {
    pub method: EffectMethod,
    pub odds_ratio: f64,
    pub log_or: f64,
    pub se_log_or: Option<f64>,
    pub ci: (f64, f64),
    pub ci_level: f64,
    pub ci_method: CiMethod,
    pub n_used: usize,
    pub n_trimmed: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CausalError {
    #[error("cohort is empty")]
    EmptyCohort,
    #[error("{0} records lack covariates; run the covariate join first")]
    MissingCovariates(usize),
    #[error("treatment arm (bunt={treated}) has {n} records; at least 2 required")]
    ArmTooSmall { treated: bool, n: usize },
    #[error("propensity scores are not set; run estimate_propensity first")]
    PropensityUnset,
    #[error("weights are not set; run ipw_weights first")]
    WeightsUnset,
    #[error("propensity {0} outside (0,1); trimming must precede weighting")]
    PropensityOutOfRange(f64),
    #[error("all observations trimmed: propensity overlap is empty")]
    AllTrimmed,
    #[error("zero cell in the 2x2 table ({0}); use the bootstrap interval or pool categories (no silent continuity correction is applied)")]
    ZeroCell(&'static str),
    #[error("{context} model did not converge ({detail}); possible separation")]
    NotConverged { context: &'static str, detail: String },
    #[error("standardized marginal estimate has no Wald interval; use the bootstrap")]
    WaldUnavailableForMarginal,
    #[error("all {0} bootstrap replicates failed")]
    AllReplicatesFailed(usize),
    #[error(transparent)]
    Glm(#[from] GlmError),
}

#[allow(clippy::too_many_arguments)]
fn effect(
    method: EffectMethod,
    log_or: f64,
    se: Option<f64>,
    ci: (f64, f64),
    ci_level: f64,
    ci_method: CiMethod,
    n_used: usize,
    n_trimmed: usize,
) -> EffectEstimate {
    EffectEstimate {
        method,
        odds_ratio: libm::exp(log_or),
        log_or,
        se_log_or: se,
        ci,
        ci_level,
        ci_method,
        n_used,
        n_trimmed,
    }
}

fn require_covariates(records: &[CohortRecord]) -> Result<(), CausalError> {
    if records.is_empty() {
        return Err(CausalError::EmptyCohort);
    }
    let missing = records.iter().filter(|r| r.covariates.is_none()).count();
    if missing > 0 {
        return Err(CausalError::MissingCovariates(missing));
    }
    Ok(())
}

fn covariate_rows(records: &[CohortRecord], which: &[Covariate]) -> Vec<Vec<f64>> {
    records
        .iter()
        .map(|r| {
            let c = r.covariates.as_ref().expect("validated");
            which.iter().map(|v| v.value(c)).collect()
        })
        .collect()
}

/// Fits bunt ~ covariates and stores each record's propensity score.
/// Returns the fitted model for reporting (coefficient signs, histogram
/// data).
pub fn estimate_propensity(
    records: &mut [CohortRecord],
    cfg: &PipelineConfig,
) -> Result<LogisticModel, CausalError> {
    require_covariates(records)?;
    for treated in [true, false] {
        let n = records.iter().filter(|r| r.bunt == treated).count();
        if n < 2 {
            return Err(CausalError::ArmTooSmall { treated, n });
        }
    }
    let names: Vec<&str> = cfg.propensity_covariates.iter().map(|c| c.name()).collect();
    let rows = covariate_rows(records, &cfg.propensity_covariates);
    let x = DesignMatrix::with_intercept(&names, &rows)?;
    let y: Vec<f64> = records.iter().map(|r| r.bunt as u8 as f64).collect();
    let w = alloc::vec![1.0; records.len()];
    let model = glm::fit_logistic(&x, &y, &w, &cfg.fit)?;
    if !model.converged {
        return Err(CausalError::NotConverged {
            context: "propensity",
            detail: format!(
                "max score norm {:.3e} after {} iterations",
                model.max_score_norm, model.iterations
            ),
        });
    }
    for (rec, row) in records.iter_mut().zip(&rows) {
        let mut full = Vec::with_capacity(row.len() + 1);
        full.push(1.0);
        full.extend_from_slice(row);
        rec.propensity = Some(model.predict_prob(&full)?);
    }
    Ok(model)
}

/// Keeps records with trim_lo ≤ e ≤ trim_hi (closed interval: scores
/// *less than* the lower cut or *greater than* the upper cut are removed,
/// so boundary values stay). Order is preserved.
pub fn trim(
    records: Vec<CohortRecord>,
    cfg: &PipelineConfig,
) -> Result<(Vec<CohortRecord>, usize), CausalError> {
    let before = records.len();
    let mut kept = Vec::with_capacity(before);
    for r in records {
        let e = r.propensity.ok_or(CausalError::PropensityUnset)?;
        if e >= cfg.trim_lo && e <= cfg.trim_hi {
            kept.push(r);
        }
    }
    if kept.is_empty() {
        return Err(CausalError::AllTrimmed);
    }
    let trimmed = before - kept.len();
    Ok((kept, trimmed))
}

/// Sets each record's inverse-probability weight.
pub fn ipw_weights(
    records: &mut [CohortRecord],
    scheme: WeightScheme,
) -> Result<(), CausalError> {
    for r in records.iter_mut() {
        let e = r.propensity.ok_or(CausalError::PropensityUnset)?;
        if !e.is_finite() || e <= 0.0 || e >= 1.0 {
            return Err(CausalError::PropensityOutOfRange(e));
        }
        r.weight = Some(match scheme {
            WeightScheme::PseudoPopulation => {
                if r.bunt {
                    1.0 / e
                } else {
                    1.0 / (1.0 - e)
                }
            }
            WeightScheme::LiteralInverse => 1.0 / e,
        });
    }
    Ok(())
}

/// The 2×2 table behind the crude odds ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TwoByTwo {
    pub bunt_wins: usize,
    pub bunt_losses: usize,
    pub swing_wins: usize,
    pub swing_losses: usize,
}

impl TwoByTwo {
    pub fn from_records(records: &[CohortRecord]) -> TwoByTwo {
        let mut t =
            TwoByTwo { bunt_wins: 0, bunt_losses: 0, swing_wins: 0, swing_losses: 0 };
        for r in records {
            match (r.bunt, r.win) {
                (true, true) => t.bunt_wins += 1,
                (true, false) => t.bunt_losses += 1,
                (false, true) => t.swing_wins += 1,
                (false, false) => t.swing_losses += 1,
            }
        }
        t
    }
}

/// Unadjusted odds ratio from the 2×2 table of treatment by outcome, with
/// the Woolf (Wald on log odds) interval.
pub fn crude_or(records: &[CohortRecord], ci_level: f64) -> Result<EffectEstimate, CausalError> {
    if records.is_empty() {
        return Err(CausalError::EmptyCohort);
    }
    let t = TwoByTwo::from_records(records);
    crude_or_from_table(&t, ci_level, records.len())
}

pub fn crude_or_from_table(
    t: &TwoByTwo,
    ci_level: f64,
    n_used: usize,
) -> Result<EffectEstimate, CausalError> {
    let cells = [
        (t.bunt_wins, "bunt wins"),
        (t.bunt_losses, "bunt losses"),
        (t.swing_wins, "swing wins"),
        (t.swing_losses, "swing losses"),
    ];
    for (count, name) in cells {
        if count == 0 {
            return Err(CausalError::ZeroCell(name));
        }
    }
    let (a, b, c, d) = (
        t.bunt_wins as f64,
        t.bunt_losses as f64,
        t.swing_wins as f64,
        t.swing_losses as f64,
    );
    let log_or = libm::log(a * d / (b * c));
    let se = libm::sqrt(1.0 / a + 1.0 / b + 1.0 / c + 1.0 / d);
    let z = stat::normal_quantile(0.5 + ci_level / 2.0);
    let ci = (libm::exp(log_or - z * se), libm::exp(log_or + z * se));
    Ok(effect(EffectMethod::Crude, log_or, Some(se), ci, ci_level, CiMethod::Wald, n_used, 0))
}

/// The fitted weighted outcome model and its point estimate on the
/// configured scale.
#[derive(Debug, Clone)]
pub struct IpwOutcomeFit {
    pub model: LogisticModel,
    pub log_or: f64,
    /// Wald standard error of the treatment coefficient. Conditional scale
    /// only, and only valid as a labeled, uncorrected weighted-likelihood
    /// quantity.
    pub wald_se: Option<f64>,
}

pub const TREATMENT: &str = "bunt";

/// Fits the weighted logistic outcome model win ~ bunt + covariates on a
/// trimmed, weighted cohort.
pub fn ipw_effect(
    records: &[CohortRecord],
    cfg: &PipelineConfig,
) -> Result<IpwOutcomeFit, CausalError> {
    require_covariates(records)?;
    let mut names: Vec<&str> = Vec::with_capacity(cfg.outcome_covariates.len() + 1);
    names.push(TREATMENT);
    names.extend(cfg.outcome_covariates.iter().map(|c| c.name()));
    let mut rows = Vec::with_capacity(records.len());
    let mut y = Vec::with_capacity(records.len());
    let mut w = Vec::with_capacity(records.len());
    for r in records {
        let c = r.covariates.as_ref().expect("validated");
        let mut row = Vec::with_capacity(names.len());
        row.push(r.bunt as u8 as f64);
        row.extend(cfg.outcome_covariates.iter().map(|v| v.value(c)));
        rows.push(row);
        y.push(r.win as u8 as f64);
        w.push(r.weight.ok_or(CausalError::WeightsUnset)?);
    }
    let x = DesignMatrix::with_intercept(&names, &rows)?;
    let model = glm::fit_logistic(&x, &y, &w, &cfg.fit)?;
    if !model.converged {
        return Err(CausalError::NotConverged {
            context: "outcome",
            detail: format!(
                "max score norm {:.3e} after {} iterations",
                model.max_score_norm, model.iterations
            ),
        });
    }
    let (log_or, wald_se) = match cfg.effect_scale {
        EffectScale::Conditional => {
            (model.coefficient(TREATMENT)?, Some(model.std_error(TREATMENT)?))
        }
        EffectScale::MarginalStandardized => {
            // g-computation over the trimmed cohort: average the model's
            // predictions with treatment forced to each arm.
            let mut sum1 = 0.0;
            let mut sum0 = 0.0;
            for row in &rows {
                let mut x1 = Vec::with_capacity(row.len() + 1);
                x1.push(1.0);
                x1.extend_from_slice(row);
                let mut x0 = x1.clone();
                x1[1] = 1.0;
                x0[1] = 0.0;
                sum1 += model.predict_prob(&x1)?;
                sum0 += model.predict_prob(&x0)?;
            }
            let m1 = sum1 / rows.len() as f64;
            let m0 = sum0 / rows.len() as f64;
            (stat::logit(m1) - stat::logit(m0), None)
        }
    };
    Ok(IpwOutcomeFit { model, log_or, wald_se })
}

/// Runs propensity → trim → weights → outcome fit and returns the point
/// estimate (log odds ratio) on the configured scale. This is the unit the
/// bootstrap replays.
pub fn pipeline_log_or(
    records: &[CohortRecord],
    cfg: &PipelineConfig,
) -> Result<f64, CausalError> {
    let mut sample: Vec<CohortRecord> = records.to_vec();
    for r in &mut sample {
        r.propensity = None;
        r.weight = None;
    }
    estimate_propensity(&mut sample, cfg)?;
    let (mut kept, _) = trim(sample, cfg)?;
    ipw_weights(&mut kept, cfg.weight_scheme)?;
    for treated in [true, false] {
        let n = kept.iter().filter(|r| r.bunt == treated).count();
        if n < 2 {
            return Err(CausalError::ArmTooSmall { treated, n });
        }
    }
    Ok(ipw_effect(&kept, cfg)?.log_or)
}

/// Bootstrap percentile interval for the IPW estimate. Each replicate
/// resamples the joined cohort with replacement and re-runs the whole
/// pipeline (propensity refit included, so its estimation uncertainty
/// propagates). Replicate randomness derives from (seed, replicate index),
/// so results do not depend on execution order.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapSummary {
    pub ci: (f64, f64),
    pub level: f64,
    pub replicates: usize,
    pub failed: usize,
    /// More than 10% of replicates failed; the interval is reported but
    /// flagged.
    pub unreliable: bool,
}

pub fn bootstrap_ci(
    records: &[CohortRecord],
    cfg: &PipelineConfig,
) -> Result<BootstrapSummary, CausalError> {
    require_covariates(records)?;
    let n = records.len();
    let b = cfg.bootstrap_replicates;
    let mut log_ors = Vec::with_capacity(b);
    let mut failed = 0usize;
    for rep in 0..b {
        let mut rng = rng::derive_rng(cfg.seed, BOOTSTRAP_STREAM_OFFSET + rep as u64);
        let sample: Vec<CohortRecord> =
            (0..n).map(|_| records[rng.gen_range(0..n)].clone()).collect();
        match pipeline_log_or(&sample, cfg) {
            Ok(v) => log_ors.push(v),
            Err(_) => failed += 1,
        }
    }
    if log_ors.is_empty() {
        return Err(CausalError::AllReplicatesFailed(b));
    }
    let alpha = 1.0 - cfg.ci_level;
    let lo = stat::quantile(&log_ors, alpha / 2.0);
    let hi = stat::quantile(&log_ors, 1.0 - alpha / 2.0);
    Ok(BootstrapSummary {
        ci: (libm::exp(lo), libm::exp(hi)),
        level: cfg.ci_level,
        replicates: b,
        failed,
        unreliable: failed * 10 > b,
    })
}

/// Standardized mean difference of one covariate before and after
/// weighting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovariateBalance {
    pub covariate: Covariate,
    pub smd_unweighted: f64,
    pub smd_weighted: f64,
    /// False when a zero pooled standard deviation with unequal means makes
    /// the SMD undefined.
    pub comparable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalanceReport {
    pub rows: Vec<CovariateBalance>,
    pub n_bunt: usize,
    pub n_swing: usize,
    /// Kish effective sample size (Σw)²/Σw² per arm.
    pub ess_bunt: f64,
    pub ess_swing: f64,
}

pub fn balance_diagnostics(records: &[CohortRecord]) -> Result<BalanceReport, CausalError> {
    require_covariates(records)?;
    let (treated, control): (Vec<&CohortRecord>, Vec<&CohortRecord>) =
        records.iter().partition(|r| r.bunt);
    if treated.is_empty() || control.is_empty() {
        return Err(CausalError::ArmTooSmall { treated: treated.is_empty(), n: 0 });
    }
    let weights = |arm: &[&CohortRecord]| -> Result<Vec<f64>, CausalError> {
        arm.iter().map(|r| r.weight.ok_or(CausalError::WeightsUnset)).collect()
    };
    let w1 = weights(&treated)?;
    let w0 = weights(&control)?;

    let mut rows = Vec::with_capacity(Covariate::ALL.len());
    for cov in Covariate::ALL {
        let x1: Vec<f64> =
            treated.iter().map(|r| cov.value(r.covariates.as_ref().unwrap())).collect();
        let x0: Vec<f64> =
            control.iter().map(|r| cov.value(r.covariates.as_ref().unwrap())).collect();
        let smd = |m1: f64, m0: f64, v1: f64, v0: f64| -> (f64, bool) {
            let pooled = libm::sqrt((v1 + v0) / 2.0);
            if pooled == 0.0 {
                if m1 == m0 {
                    (0.0, true)
                } else {
                    (f64::NAN, false)
                }
            } else {
                ((m1 - m0) / pooled, true)
            }
        };
        let sd1 = stat::sample_sd(&x1);
        let sd0 = stat::sample_sd(&x0);
        let (unweighted, ok_u) = smd(stat::mean(&x1), stat::mean(&x0), sd1 * sd1, sd0 * sd0);
        let (weighted, ok_w) = smd(
            stat::weighted_mean(&x1, &w1),
            stat::weighted_mean(&x0, &w0),
            stat::weighted_var(&x1, &w1),
            stat::weighted_var(&x0, &w0),
        );
        rows.push(CovariateBalance {
            covariate: cov,
            smd_unweighted: unweighted,
            smd_weighted: weighted,
            comparable: ok_u && ok_w,
        });
    }
    let ess = |w: &[f64]| -> f64 {
        let s: f64 = w.iter().sum();
        let s2: f64 = w.iter().map(|v| v * v).sum();
        s * s / s2
    };
    Ok(BalanceReport {
        rows,
        n_bunt: treated.len(),
        n_swing: control.len(),
        ess_bunt: ess(&w1),
        ess_swing: ess(&w0),
    })
}

/// Propensity-score histogram data: 20 equal bins on [0,1], counts per arm.
#[derive(Debug, Clone, PartialEq)]
pub struct PropensityHistogram {
    pub bins: Vec<HistogramBin>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count_bunt: usize,
    pub count_swing: usize,
}

pub const HISTOGRAM_BINS: usize = 20;

pub fn propensity_histogram(
    records: &[CohortRecord],
) -> Result<PropensityHistogram, CausalError> {
    let mut bins: Vec<HistogramBin> = (0..HISTOGRAM_BINS)
        .map(|i| HistogramBin {
            lo: i as f64 / HISTOGRAM_BINS as f64,
            hi: (i + 1) as f64 / HISTOGRAM_BINS as f64,
            count_bunt: 0,
            count_swing: 0,
        })
        .collect();
    for r in records {
        let e = r.propensity.ok_or(CausalError::PropensityUnset)?;
        let idx = ((e * HISTOGRAM_BINS as f64) as usize).min(HISTOGRAM_BINS - 1);
        if r.bunt {
            bins[idx].count_bunt += 1;
        } else {
            bins[idx].count_swing += 1;
        }
    }
    Ok(PropensityHistogram { bins })
}

/// Everything one estimation run produces.
#[derive(Debug, Clone)]
pub struct AnalysisReport {
    pub crude: EffectEstimate,
    /// The full-cohort 2×2 table behind the crude estimate.
    pub two_by_two: TwoByTwo,
    pub ipw: EffectEstimate,
    /// The uncorrected weighted-likelihood Wald interval, emitted alongside
    /// the bootstrap interval for comparison (conditional scale only).
    pub ipw_wald_ci: Option<(f64, f64)>,
    pub propensity_model: LogisticModel,
    pub outcome_model: LogisticModel,
    pub balance: BalanceReport,
    pub histogram: PropensityHistogram,
    pub bootstrap: Option<BootstrapSummary>,
    pub n_records: usize,
    pub n_trimmed: usize,
}

/// The full estimation pipeline on a joined cohort: crude odds ratio on all
/// records, then propensity → trim → weights → weighted outcome model, with
/// the interval chosen by `cfg.ci_method`.
pub fn run_pipeline(
    records: &[CohortRecord],
    cfg: &PipelineConfig,
) -> Result<AnalysisReport, CausalError> {
    require_covariates(records)?;
    let two_by_two = TwoByTwo::from_records(records);
    let crude = crude_or(records, cfg.ci_level)?;

    let mut working: Vec<CohortRecord> = records.to_vec();
    for r in &mut working {
        r.propensity = None;
        r.weight = None;
    }
    let propensity_model = estimate_propensity(&mut working, cfg)?;
    let histogram = propensity_histogram(&working)?;
    let (mut kept, n_trimmed) = trim(working, cfg)?;
    ipw_weights(&mut kept, cfg.weight_scheme)?;
    let balance = balance_diagnostics(&kept)?;
    let fit = ipw_effect(&kept, cfg)?;

    let z = stat::normal_quantile(0.5 + cfg.ci_level / 2.0);
    let ipw_wald_ci =
        fit.wald_se.map(|se| (libm::exp(fit.log_or - z * se), libm::exp(fit.log_or + z * se)));

    let (ci, ci_method, bootstrap) = match cfg.ci_method {
        CiMethod::Wald => {
            let ci = ipw_wald_ci.ok_or(CausalError::WaldUnavailableForMarginal)?;
            (ci, CiMethod::Wald, None)
        }
        CiMethod::Bootstrap => {
            let bs = bootstrap_ci(records, cfg)?;
            (bs.ci, CiMethod::Bootstrap, Some(bs))
        }
    };

    let ipw = effect(
        EffectMethod::Ipw,
        fit.log_or,
        fit.wald_se,
        ci,
        cfg.ci_level,
        ci_method,
        kept.len(),
        n_trimmed,
    );

    Ok(AnalysisReport {
        crude,
        two_by_two,
        ipw,
        ipw_wald_ci,
        propensity_model,
        outcome_model: fit.model,
        balance,
        histogram,
        bootstrap,
        n_records: records.len(),
        n_trimmed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohort::ResultCategory;
    use alloc::vec;

    fn record(bunt: bool, win: bool, ops: f64, sac: f64, era: f64) -> CohortRecord {
        CohortRecord {
            game_id: "HOM202109150".to_string(),
            season: 2021,
            inning: 10,
            batter_id: "b".to_string(),
            pitcher_id: "p".to_string(),
            bunt,
            win,
            covariates: Some(CovariateTriple { ops, sac_rate: sac, era }),
            result_category: ResultCategory::Other,
            pitches: String::new(),
            propensity: None,
            weight: None,
        }
    }

    fn with_propensity(mut r: CohortRecord, e: f64) -> CohortRecord {
        r.propensity = Some(e);
        r
    }

    /// The table reconstructed from the reported group percentages:
    /// 39/53 wins bunting, 111/196 swinging away.
    fn paper_table() -> Vec<CohortRecord> {
        let mut v = Vec::new();
        for _ in 0..39 {
            v.push(record(true, true, 0.6, 1.0, 3.8));
        }
        for _ in 0..14 {
            v.push(record(true, false, 0.6, 1.0, 3.8));
        }
        for _ in 0..111 {
            v.push(record(false, true, 0.75, 0.1, 3.9));
        }
        for _ in 0..85 {
            v.push(record(false, false, 0.75, 0.1, 3.9));
        }
        v
    }

    #[test]
    fn crude_or_reproduces_reported_value() {
        let est = crude_or(&paper_table(), 0.95).unwrap();
        assert!((est.odds_ratio - 2.13).abs() < 0.02);
        assert!((est.odds_ratio - 2.1332046332046333).abs() < 1e-12);
        // Woolf interval.
        assert!((est.ci.0 - 1.0885).abs() < 0.001);
        assert!((est.ci.1 - 4.1807).abs() < 0.001);
        assert_eq!(est.n_used, 249);
        assert_eq!(est.n_trimmed, 0);
        // exp(log_or) equals the odds ratio.
        assert!((libm::exp(est.log_or) - est.odds_ratio).abs() < 1e-12);
    }

    #[test]
    fn crude_or_is_one_for_equal_win_rates() {
        let mut v = Vec::new();
        for _ in 0..10 {
            v.push(record(true, true, 0.6, 1.0, 3.8));
            v.push(record(true, false, 0.6, 1.0, 3.8));
            v.push(record(false, true, 0.75, 0.1, 3.9));
            v.push(record(false, false, 0.75, 0.1, 3.9));
        }
        let est = crude_or(&v, 0.95).unwrap();
        assert!((est.odds_ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn swapping_arms_inverts_the_odds_ratio() {
        let v = paper_table();
        let swapped: Vec<CohortRecord> = v
            .iter()
            .map(|r| {
                let mut s = r.clone();
                s.bunt = !r.bunt;
                s
            })
            .collect();
        let a = crude_or(&v, 0.95).unwrap();
        let b = crude_or(&swapped, 0.95).unwrap();
        assert!((a.odds_ratio * b.odds_ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_cell_is_an_error_not_a_correction() {
        let mut v = paper_table();
        v.retain(|r| !(r.bunt && !r.win));
        match crude_or(&v, 0.95) {
            Err(CausalError::ZeroCell(cell)) => assert_eq!(cell, "bunt losses"),
            other => panic!("unexpected {other:?}"),
        }
    }

    /// Two-route equivalence: the crude OR equals exp(treatment coefficient)
    /// of the unweighted logistic win ~ bunt.
    #[test]
    fn crude_or_matches_unweighted_logistic_route() {
        let records = paper_table();
        let rows: Vec<Vec<f64>> =
            records.iter().map(|r| vec![r.bunt as u8 as f64]).collect();
        let y: Vec<f64> = records.iter().map(|r| r.win as u8 as f64).collect();
        let x = DesignMatrix::with_intercept(&[TREATMENT], &rows).unwrap();
        let m =
            glm::fit_logistic(&x, &y, &vec![1.0; y.len()], &FitOptions::default()).unwrap();
        let est = crude_or(&records, 0.95).unwrap();
        assert!((m.coefficient(TREATMENT).unwrap() - est.log_or).abs() < 1e-8);
    }

    #[test]
    fn trim_keeps_the_closed_interval() {
        let cfg = PipelineConfig::default();
        let records: Vec<CohortRecord> = [0.05, 0.1, 0.9, 0.95]
            .into_iter()
            .map(|e| with_propensity(record(e > 0.5, false, 0.7, 0.5, 3.8), e))
            .collect();
        let (kept, n_trimmed) = trim(records, &cfg).unwrap();
        assert_eq!(n_trimmed, 2);
        let es: Vec<f64> = kept.iter().map(|r| r.propensity.unwrap()).collect();
        assert_eq!(es, vec![0.1, 0.9]);

        let all_mid: Vec<CohortRecord> = (0..5)
            .map(|_| with_propensity(record(true, true, 0.7, 0.5, 3.8), 0.5))
            .collect();
        let (kept, n_trimmed) = trim(all_mid, &cfg).unwrap();
        assert_eq!((kept.len(), n_trimmed), (5, 0));

        let out: Vec<CohortRecord> = (0..5)
            .map(|_| with_propensity(record(true, true, 0.7, 0.5, 3.8), 0.99))
            .collect();
        assert_eq!(trim(out, &cfg), Err(CausalError::AllTrimmed));
    }

    #[test]
    fn weights_follow_the_pseudo_population_form() {
        let mut records = vec![
            with_propensity(record(true, true, 0.7, 0.5, 3.8), 0.5),
            with_propensity(record(false, true, 0.7, 0.5, 3.8), 0.5),
            with_propensity(record(true, false, 0.7, 0.5, 3.8), 0.25),
            with_propensity(record(false, false, 0.7, 0.5, 3.8), 0.25),
        ];
        ipw_weights(&mut records, WeightScheme::PseudoPopulation).unwrap();
        let w: Vec<f64> = records.iter().map(|r| r.weight.unwrap()).collect();
        assert!((w[0] - 2.0).abs() < 1e-12);
        assert!((w[1] - 2.0).abs() < 1e-12);
        assert!((w[2] - 4.0).abs() < 1e-12);
        assert!((w[3] - 4.0 / 3.0).abs() < 1e-12);
        // Weight positivity: every weight exceeds 1 for e in (0,1).
        assert!(w.iter().all(|&v| v > 1.0));

        ipw_weights(&mut records, WeightScheme::LiteralInverse).unwrap();
        assert!((records[3].weight.unwrap() - 4.0).abs() < 1e-12);

        let mut bad = vec![with_propensity(record(true, true, 0.7, 0.5, 3.8), 1.0)];
        assert!(matches!(
            ipw_weights(&mut bad, WeightScheme::PseudoPopulation),
            Err(CausalError::PropensityOutOfRange(_))
        ));
    }

    /// Uniform weights collapse the weighted fit to the unweighted one, and
    /// with covariates distributed identically in every (treatment, outcome)
    /// cell the adjusted conditional estimate equals the crude odds ratio.
    #[test]
    fn constant_propensity_makes_ipw_equal_crude() {
        // Each cell holds ± pairs around one center, cycling three
        // independent perturbation directions: cell means are equal, the
        // design is full rank, and the covariate score vanishes at the
        // crude fit.
        let center = (0.70, 0.5, 3.8);
        let deltas =
            [(0.05, 0.0, 0.0), (0.0, 0.2, 0.0), (0.0, 0.0, 0.4)];
        let mut records = Vec::new();
        let mut push_pairs = |bunt: bool, win: bool, dirs: &[usize]| {
            for &k in dirs {
                let (d0, d1, d2) = deltas[k];
                records.push(with_propensity(
                    record(bunt, win, center.0 + d0, center.1 + d1, center.2 + d2),
                    0.5,
                ));
                records.push(with_propensity(
                    record(bunt, win, center.0 - d0, center.1 - d1, center.2 - d2),
                    0.5,
                ));
            }
        };
        push_pairs(true, true, &[0, 1]);
        push_pairs(true, false, &[2]);
        push_pairs(false, true, &[0]);
        push_pairs(false, false, &[1, 2]);

        let mut weighted = records.clone();
        ipw_weights(&mut weighted, WeightScheme::PseudoPopulation).unwrap();
        let cfg = PipelineConfig::default();
        let fit = ipw_effect(&weighted, &cfg).unwrap();
        let crude = crude_or(&records, 0.95).unwrap();
        assert!(
            (fit.log_or - crude.log_or).abs() < 1e-6,
            "ipw {} vs crude {}",
            fit.log_or,
            crude.log_or
        );
        assert!((libm::exp(crude.log_or) - 4.0).abs() < 1e-9);
    }

    #[test]
    fn propensity_reflects_marginal_rate_when_unrelated() {
        // Covariates vary but carry no signal about treatment.
        let mut records = Vec::new();
        let mut r = rng::derive_rng(11, 0);
        for i in 0..200 {
            let ops = 0.6 + 0.3 * r.gen::<f64>();
            let sac = r.gen::<f64>();
            let era = 3.0 + 2.0 * r.gen::<f64>();
            records.push(record(i % 5 == 0, i % 2 == 0, ops, sac, era));
        }
        let cfg = PipelineConfig::default();
        let model = estimate_propensity(&mut records, &cfg).unwrap();
        assert!(model.converged);
        let mean_e: f64 =
            records.iter().map(|r| r.propensity.unwrap()).sum::<f64>() / records.len() as f64;
        // Mean fitted propensity equals the treatment rate (intercept score
        // equation), and individual scores hover near it.
        assert!((mean_e - 0.2).abs() < 1e-6);
        assert!(records.iter().all(|r| (r.propensity.unwrap() - 0.2).abs() < 0.2));
    }

    #[test]
    fn histogram_has_twenty_bins_and_counts_everything() {
        let records: Vec<CohortRecord> = (0..100)
            .map(|i| {
                let e = (i as f64 + 0.5) / 100.0;
                with_propensity(record(i % 4 == 0, i % 2 == 0, 0.7, 0.5, 3.8), e)
            })
            .collect();
        let h = propensity_histogram(&records).unwrap();
        assert_eq!(h.bins.len(), 20);
        let total: usize = h.bins.iter().map(|b| b.count_bunt + b.count_swing).sum();
        assert_eq!(total, records.len());
        assert!(h.bins.iter().all(|b| b.count_bunt + b.count_swing == 5));
        assert!((h.bins[0].lo, h.bins[19].hi) == (0.0, 1.0));
    }

    #[test]
    fn balance_smd_zero_for_identical_distributions() {
        let mut records = Vec::new();
        for &(ops, sac, era) in &[(0.6, 0.2, 3.5), (0.7, 0.5, 4.0), (0.8, 0.8, 4.5)] {
            for bunt in [true, false] {
                let mut r = record(bunt, bunt, ops, sac, era);
                r.propensity = Some(0.5);
                r.weight = Some(2.0);
                records.push(r);
            }
        }
        let b = balance_diagnostics(&records).unwrap();
        for row in &b.rows {
            assert!(row.comparable);
            assert!(row.smd_unweighted.abs() < 1e-12);
            assert!(row.smd_weighted.abs() < 1e-12);
        }
        assert!(b.ess_bunt <= b.n_bunt as f64 + 1e-9);
        assert!(b.ess_swing <= b.n_swing as f64 + 1e-9);
    }

    #[test]
    fn balance_flags_zero_sd_with_unequal_means() {
        let mut records = vec![
            record(true, true, 0.6, 0.5, 3.8),
            record(true, false, 0.6, 0.5, 3.8),
            record(false, true, 0.8, 0.5, 3.8),
            record(false, false, 0.8, 0.5, 3.8),
        ];
        for r in &mut records {
            r.weight = Some(2.0);
        }
        let b = balance_diagnostics(&records).unwrap();
        let ops_row = b.rows.iter().find(|r| r.covariate == Covariate::Ops).unwrap();
        assert!(!ops_row.comparable);
        let sac_row = b.rows.iter().find(|r| r.covariate == Covariate::SacRate).unwrap();
        assert!(sac_row.comparable);
        assert_eq!(sac_row.smd_unweighted, 0.0);
    }

    #[test]
    fn bootstrap_is_deterministic_and_brackets_the_estimate() {
        // A cohort with genuine variation so resamples differ.
        let mut records = Vec::new();
        let mut r = rng::derive_rng(5, 0);
        for _ in 0..120 {
            let ops = 0.55 + 0.35 * r.gen::<f64>();
            let sac = 1.5 * r.gen::<f64>();
            let era = 3.0 + 2.0 * r.gen::<f64>();
            let e = crate::stat::logistic(1.2 * sac - 3.0 * (ops - 0.7));
            let bunt = r.gen::<f64>() < e.clamp(0.15, 0.85);
            let win = r.gen::<f64>()
                < crate::stat::logistic(0.5 * (bunt as u8 as f64) + 1.5 * (ops - 0.7));
            records.push(record(bunt, win, ops, sac, era));
        }
        let cfg = PipelineConfig {
            bootstrap_replicates: 200,
            seed: 42,
            ..PipelineConfig::default()
        };
        let a = bootstrap_ci(&records, &cfg).unwrap();
        let b = bootstrap_ci(&records, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.ci.0 < a.ci.1);
        assert!(!a.unreliable);

        let point = pipeline_log_or(&records, &cfg).unwrap();
        assert!(libm::log(a.ci.0) <= point && point <= libm::log(a.ci.1));
    }

    #[test]
    fn bootstrap_counts_failed_replicates() {
        // Two treated records among twelve: many resamples lack a usable
        // treated arm, so failures must be counted and flagged.
        let mut records = Vec::new();
        let mut r = rng::derive_rng(9, 0);
        for i in 0..12 {
            let ops = 0.55 + 0.3 * r.gen::<f64>();
            let sac = r.gen::<f64>();
            let era = 3.0 + 2.0 * r.gen::<f64>();
            records.push(record(i < 2, i % 2 == 0, ops, sac, era));
        }
        let cfg = PipelineConfig {
            bootstrap_replicates: 200,
            seed: 3,
            ..PipelineConfig::default()
        };
        match bootstrap_ci(&records, &cfg) {
            Ok(s) => {
                assert!(s.failed > 0);
                assert!(s.unreliable);
            }
            Err(CausalError::AllReplicatesFailed(_)) => {}
            Err(e) => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn run_pipeline_produces_a_complete_report() {
        let mut records = Vec::new();
        let mut r = rng::derive_rng(17, 0);
        for _ in 0..150 {
            let ops = 0.55 + 0.35 * r.gen::<f64>();
            let sac = 1.2 * r.gen::<f64>();
            let era = 3.0 + 2.0 * r.gen::<f64>();
            let e = crate::stat::logistic(1.5 * sac - 4.0 * (ops - 0.7) - 0.7);
            let bunt = r.gen::<f64>() < e.clamp(0.1, 0.9);
            let win = r.gen::<f64>()
                < crate::stat::logistic(0.6 * (bunt as u8 as f64) + 2.0 * (ops - 0.7));
            records.push(record(bunt, win, ops, sac, era));
        }
        let cfg = PipelineConfig {
            bootstrap_replicates: 150,
            seed: 8,
            ..PipelineConfig::default()
        };
        let report = run_pipeline(&records, &cfg).unwrap();
        assert_eq!(report.crude.method, EffectMethod::Crude);
        assert_eq!(report.ipw.method, EffectMethod::Ipw);
        assert_eq!(report.ipw.ci_method, CiMethod::Bootstrap);
        assert!(report.ipw_wald_ci.is_some());
        assert_eq!(report.n_records, 150);
        assert_eq!(report.ipw.n_used + report.n_trimmed, 150);
        assert!(report.ipw.ci.0 <= report.ipw.odds_ratio);
        assert!(report.ipw.odds_ratio <= report.ipw.ci.1);
        // Trimming boundary invariant: kept propensities inside the window.
        let mut working = records.clone();
        estimate_propensity(&mut working, &cfg).unwrap();
        let (kept, _) = trim(working, &cfg).unwrap();
        for r in &kept {
            let e = r.propensity.unwrap();
            assert!((cfg.trim_lo..=cfg.trim_hi).contains(&e));
        }
        // Determinism: identical config and seed, identical report bytes.
        let again = run_pipeline(&records, &cfg).unwrap();
        assert_eq!(format!("{report:?}"), format!("{again:?}"));
    }

    #[test]
    fn marginal_scale_needs_bootstrap_for_its_interval() {
        let mut records = Vec::new();
        let mut r = rng::derive_rng(2, 0);
        for _ in 0..120 {
            let ops = 0.55 + 0.35 * r.gen::<f64>();
            let sac = 1.2 * r.gen::<f64>();
            let era = 3.0 + 2.0 * r.gen::<f64>();
            let e = crate::stat::logistic(1.2 * sac - 3.0 * (ops - 0.7) - 0.8);
            let bunt = r.gen::<f64>() < e.clamp(0.15, 0.85);
            let win = r.gen::<f64>()
                < crate::stat::logistic(0.5 * (bunt as u8 as f64) + 1.5 * (ops - 0.7));
            records.push(record(bunt, win, ops, sac, era));
        }
        let cfg = PipelineConfig {
            effect_scale: EffectScale::MarginalStandardized,
            ci_method: CiMethod::Wald,
            ..PipelineConfig::default()
        };
        assert!(matches!(
            run_pipeline(&records, &cfg),
            Err(CausalError::WaldUnavailableForMarginal)
        ));
        // With the bootstrap the marginal estimate comes through.
        let cfg = PipelineConfig {
            effect_scale: EffectScale::MarginalStandardized,
            bootstrap_replicates: 100,
            seed: 21,
            ..PipelineConfig::default()
        };
        let report = run_pipeline(&records, &cfg).unwrap();
        assert!(report.ipw_wald_ci.is_none());
        assert!(report.ipw.se_log_or.is_none());
        assert_eq!(report.ipw.ci_method, CiMethod::Bootstrap);
    }
}
