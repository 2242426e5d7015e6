//! Weighted logistic regression fitted by iteratively reweighted least
//! squares, with Wald inference. This is the shared engine behind both the
//! propensity model and the weighted outcome model.
//!
//! Convergence is declared on the weighted score norm ‖Xᵀ·diag(w)·(y − p)‖∞,
//! which directly certifies stationarity. Separation shows up as a
//! non-converged fit carrying diagnostics, never as a silently wrong
//! answer. The inner linear solve is a Cholesky factorization of the
//! weighted information XᵀWX; a singular information matrix is an error
//! naming the offending column.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg;
use crate::stat;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GlmError {
    #[error("design matrix: {0}")]
    BadDesign(String),
    #[error("response and design dimensions disagree")]
    DimensionMismatch,
    #[error("response values must be 0 or 1")]
    BadResponse,
    #[error("weights must be strictly positive and finite")]
    BadWeight,
    #[error("information matrix is singular at column `{column}` (collinear with earlier columns)")]
    SingularInformation { column: String },
    #[error("model did not converge (max score norm {max_score_norm:.3e} after {iterations} iterations, |coef| {coef_norm:.3e}); possible separation")]
    NotConverged { iterations: usize, max_score_norm: f64, coef_norm: f64 },
    #[error("no coefficient named `{0}` in the model")]
    UnknownCoefficient(String),
    #[error("covariate row has wrong length for the model")]
    BadPredictRow,
}

/// Column name given to the constant term.
pub const INTERCEPT: &str = "(intercept)";

/// A dense design matrix whose first column is the constant 1.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    names: Vec<String>,
    data: Vec<f64>, // row-major, n × p
    n: usize,
    p: usize,
}

impl DesignMatrix {
    /// Builds a design from covariate rows (without the constant term);
    /// the intercept column is prepended.
    pub fn with_intercept(
        covariate_names: &[&str],
        rows: &[Vec<f64>],
    ) -> Result<DesignMatrix, GlmError> {
        let k = covariate_names.len();
        let p = k + 1;
        let mut names = Vec::with_capacity(p);
        names.push(INTERCEPT.to_string());
        for name in covariate_names {
            let name = name.to_string();
            if names.contains(&name) {
                return Err(GlmError::BadDesign(format!("duplicate column name `{name}`")));
            }
            names.push(name);
        }
        let mut data = Vec::with_capacity(rows.len() * p);
        for row in rows {
            if row.len() != k {
                return Err(GlmError::BadDesign(format!(
                    "row has {} values, expected {k}",
                    row.len()
                )));
            }
            data.push(1.0);
            for &v in row {
                if !v.is_finite() {
                    return Err(GlmError::BadDesign("non-finite entry".to_string()));
                }
                data.push(v);
            }
        }
        Ok(DesignMatrix { names, data, n: rows.len(), p })
    }

    pub fn n_rows(&self) -> usize {
        self.n
    }

    pub fn n_cols(&self) -> usize {
        self.p
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.p..(i + 1) * self.p]
    }
}

/// Fitting controls. `ridge` is a diagnostic fallback (typically 1e-6) for
/// separated or collinear fits: it penalizes every coefficient, intercept
/// included, and the fit then certifies the penalized gradient instead of
/// the raw score. Off by default so separation surfaces as a diagnosis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub ridge: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { tolerance: 1e-8, max_iterations: 50, ridge: 0.0 }
    }
}

/// A fitted (possibly weighted) logistic model.
#[derive(Debug, Clone)]
pub struct LogisticModel {
    names: Vec<String>,
    coefficients: Vec<f64>,
    covariance: Vec<f64>, // p × p; NaN-filled when not converged
    pub iterations: usize,
    pub converged: bool,
    pub max_score_norm: f64,
}

impl LogisticModel {
    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn coefficient(&self, name: &str) -> Result<f64, GlmError> {
        self.index_of(name).map(|j| self.coefficients[j])
    }

    /// Wald standard error from the inverse information.
    pub fn std_error(&self, name: &str) -> Result<f64, GlmError> {
        let j = self.index_of(name)?;
        Ok(libm::sqrt(self.covariance[j * self.names.len() + j]))
    }

    fn index_of(&self, name: &str) -> Result<usize, GlmError> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| GlmError::UnknownCoefficient(name.to_string()))
    }

    /// P(y = 1 | x) for a covariate row laid out like the design matrix
    /// (leading 1 for the intercept).
    pub fn predict_prob(&self, x: &[f64]) -> Result<f64, GlmError> {
        if x.len() != self.names.len() {
            return Err(GlmError::BadPredictRow);
        }
        let eta: f64 = x.iter().zip(&self.coefficients).map(|(a, b)| a * b).sum();
        Ok(stat::logistic(eta))
    }
}

/// Maximizes the w-weighted Bernoulli log-likelihood with a logit link.
///
/// Separation (the score refusing to vanish while coefficients run off)
/// comes back as `Ok` with `converged == false`; downstream inference must
/// check the flag.
pub fn fit_logistic(
    x: &DesignMatrix,
    y: &[f64],
    w: &[f64],
    opts: &FitOptions,
) -> Result<LogisticModel, GlmError> {
    let (n, p) = (x.n, x.p);
    if y.len() != n || w.len() != n || n == 0 {
        return Err(GlmError::DimensionMismatch);
    }
    if y.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(GlmError::BadResponse);
    }
    if w.iter().any(|&v| !v.is_finite() || v <= 0.0) {
        return Err(GlmError::BadWeight);
    }

    let mut beta = vec![0.0; p];
    let mut probs = vec![0.0; n];
    let mut score = vec![0.0; p];
    let mut info = vec![0.0; p * p];
    let mut iterations = 0;
    let mut max_score_norm = f64::INFINITY;
    let mut converged = false;
    let mut max_abs_eta = 0.0f64;

    for iter in 0..=opts.max_iterations {
        max_abs_eta = 0.0;
        for (i, p_i) in probs.iter_mut().enumerate() {
            let row = x.row(i);
            let eta: f64 = row.iter().zip(&beta).map(|(a, b)| a * b).sum();
            max_abs_eta = max_abs_eta.max(eta.abs());
            *p_i = stat::logistic(eta);
        }
        score.iter_mut().for_each(|s| *s = 0.0);
        for i in 0..n {
            let r = w[i] * (y[i] - probs[i]);
            for (j, &xij) in x.row(i).iter().enumerate() {
                score[j] += r * xij;
            }
        }
        // With a ridge the stationarity certificate is the penalized
        // gradient; without one it is the raw weighted score.
        if opts.ridge > 0.0 {
            for (g, b) in score.iter_mut().zip(&beta) {
                *g -= opts.ridge * b;
            }
        }
        max_score_norm = score.iter().fold(0.0f64, |m, s| m.max(s.abs()));
        iterations = iter;
        if max_score_norm <= opts.tolerance {
            converged = true;
            break;
        }
        if iter == opts.max_iterations {
            break;
        }

        info.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..n {
            let wi = w[i] * probs[i] * (1.0 - probs[i]);
            let row = x.row(i);
            for j in 0..p {
                let xw = row[j] * wi;
                for k in j..p {
                    info[j * p + k] += xw * row[k];
                }
            }
        }
        for j in 0..p {
            info[j * p + j] += opts.ridge;
            for k in 0..j {
                info[j * p + k] = info[k * p + j];
            }
        }

        let delta = match linalg::solve_spd(info.clone(), &score, p) {
            Ok(d) => d,
            // On the first step (p = 0.5 everywhere) a failed pivot is real
            // collinearity. Later it means the working weights collapsed
            // under separation, which is reported, not fatal.
            Err(col) if iter == 0 => {
                return Err(GlmError::SingularInformation { column: x.names[col].clone() })
            }
            Err(_) => break,
        };
        for j in 0..p {
            beta[j] += delta[j];
        }
    }

    // Under complete separation the raw score underflows to "converged"
    // while the linear predictor saturates at the data points; treat that
    // as non-convergence so the diagnostics surface. A penalized fit has a
    // genuine interior optimum, so the flag only applies without a ridge.
    if converged && opts.ridge == 0.0 && max_abs_eta > 30.0 {
        converged = false;
    }

    let covariance = if converged {
        // (Penalized) Fisher information at the optimum, then invert.
        info.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..n {
            let wi = w[i] * probs[i] * (1.0 - probs[i]);
            let row = x.row(i);
            for j in 0..p {
                let xw = row[j] * wi;
                for k in j..p {
                    info[j * p + k] += xw * row[k];
                }
            }
        }
        for j in 0..p {
            info[j * p + j] += opts.ridge;
            for k in 0..j {
                info[j * p + k] = info[k * p + j];
            }
        }
        linalg::invert_spd(&info, p)
            .map_err(|col| GlmError::SingularInformation { column: x.names[col].clone() })?
    } else {
        vec![f64::NAN; p * p]
    };

    Ok(LogisticModel {
        names: x.names.clone(),
        coefficients: beta,
        covariance,
        iterations,
        converged,
        max_score_norm,
    })
}

/// Wald confidence interval for one coefficient on the odds-ratio scale:
/// exp(β ± z·se). Refuses non-converged models.
pub fn wald_ci(
    model: &LogisticModel,
    coefficient: &str,
    level: f64,
) -> Result<(f64, f64), GlmError> {
    if !model.converged {
        return Err(GlmError::NotConverged {
            iterations: model.iterations,
            max_score_norm: model.max_score_norm,
            coef_norm: model
                .coefficients
                .iter()
                .fold(0.0f64, |m, c| m.max(c.abs())),
        });
    }
    let beta = model.coefficient(coefficient)?;
    let se = model.std_error(coefficient)?;
    let z = stat::normal_quantile(0.5 + level / 2.0);
    Ok((libm::exp(beta - z * se), libm::exp(beta + z * se)))
}
