//! Small statistical helpers shared across the crate.

use alloc::vec::Vec;

/// Numerically stable logistic function, strictly inside (0, 1).
///
/// The linear predictor is clamped to ±36 so that extreme inputs saturate
/// without ever returning exactly 0 or 1 in f64.
pub fn logistic(eta: f64) -> f64 {
    let eta = eta.clamp(-36.0, 36.0);
    if eta >= 0.0 {
        1.0 / (1.0 + libm::exp(-eta))
    } else {
        let e = libm::exp(eta);
        e / (1.0 + e)
    }
}

/// log(p / (1 - p)).
pub fn logit(p: f64) -> f64 {
    libm::log(p / (1.0 - p))
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n − 1 denominator). NaN for n < 2.
pub fn sample_sd(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    libm::sqrt(ss / (n - 1) as f64)
}

/// Weighted mean with positive weights.
pub fn weighted_mean(xs: &[f64], ws: &[f64]) -> f64 {
    let sw: f64 = ws.iter().sum();
    if sw <= 0.0 {
        return f64::NAN;
    }
    xs.iter().zip(ws).map(|(x, w)| x * w).sum::<f64>() / sw
}

/// Weighted population variance: Σw(x − m)² / Σw.
pub fn weighted_var(xs: &[f64], ws: &[f64]) -> f64 {
    let sw: f64 = ws.iter().sum();
    if sw <= 0.0 {
        return f64::NAN;
    }
    let m = weighted_mean(xs, ws);
    xs.iter().zip(ws).map(|(x, w)| w * (x - m) * (x - m)).sum::<f64>() / sw
}

/// Quantile of a sample by linear interpolation between order statistics
/// (the common "type 7" rule). `q` must be in [0, 1]; the input need not be
/// sorted.
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    assert!(!xs.is_empty(), "quantile of empty sample");
    assert!((0.0..=1.0).contains(&q), "quantile level outside [0,1]");
    let mut sorted: Vec<f64> = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("NaN in quantile input"));
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = q * (n - 1) as f64;
    let lo = h as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Inverse of the standard normal CDF (Wichura's AS 241, double precision).
///
/// Relative error is below 1e-15 over (0, 1); used for Wald intervals.
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "normal_quantile needs p in (0,1)");
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * poly_r(r, &A7) / poly_r(r, &B7);
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let mut r = libm::sqrt(-libm::log(r));
    let val = if r <= 5.0 {
        r -= 1.6;
        poly_r(r, &C7) / poly_r(r, &D7)
    } else {
        r -= 5.0;
        poly_r(r, &E7) / poly_r(r, &F7)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

// The published AS 241 coefficients, verbatim.
#[allow(clippy::excessive_precision)]
mod as241 {
    pub const A7: [f64; 8] = [
        3.3871328727963666080,
        1.3314166789178437745e2,
        1.9715909503065514427e3,
        1.3731693765509461125e4,
        4.5921953931549871457e4,
        6.7265770927008700853e4,
        3.3430575583588128105e4,
        2.5090809287301226727e3,
    ];
    pub const B7: [f64; 8] = [
        1.0,
        4.2313330701600911252e1,
        6.8718700749205790830e2,
        5.3941960214247511077e3,
        2.1213794301586595867e4,
        3.9307895800092710610e4,
        2.8729085735721942674e4,
        5.2264952788528545610e3,
    ];
    pub const C7: [f64; 8] = [
        1.42343711074968357734,
        4.63033784615654529590,
        5.76949722146069140550,
        3.64784832476320460504,
        1.27045825245236838258,
        2.41780725177450611770e-1,
        2.27238449892691845833e-2,
        7.74545014278341407640e-4,
    ];
    pub const D7: [f64; 8] = [
        1.0,
        2.05319162663775882187,
        1.67638483018380384940,
        6.89767334985100004550e-1,
        1.48103976427480074590e-1,
        1.51986665636164571966e-2,
        5.47593808499534494600e-4,
        1.05075007164441684324e-9,
    ];
    pub const E7: [f64; 8] = [
        6.65790464350110377720,
        5.46378491116411436990,
        1.78482653991729133580,
        2.96560571828504891230e-1,
        2.65321895265761230930e-2,
        1.24266094738807843860e-3,
        2.71155556874348757815e-5,
        2.01033439929228813265e-7,
    ];
    pub const F7: [f64; 8] = [
        1.0,
        5.99832206555887937690e-1,
        1.36929880922735805310e-1,
        1.48753612908506148525e-2,
        7.86869131145613259100e-4,
        1.84631831751005468180e-5,
        1.42151175831644588870e-7,
        2.04426310338993978564e-15,
    ];
}
use as241::{A7, B7, C7, D7, E7, F7};

fn poly_r(r: f64, coef: &[f64]) -> f64 {
    coef.iter().rev().fold(0.0, |acc, c| acc * r + c)
}
