//! Experimental orders of convergence and log-log slope fits.

use crate::error::{invalid, Result};

/// Pairwise rates `log(e_i / e_{i+1}) / log(h_i / h_{i+1})`.
pub fn eoc(errors: &[f64], params: &[f64]) -> Result<Vec<f64>> {
    if errors.len() != params.len() || errors.len() < 2 {
        return Err(invalid("eoc needs two or more (error, parameter) pairs of equal length"));
    }
    if errors.iter().chain(params).any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(invalid("errors and parameters must be positive"));
    }
    Ok(errors
        .windows(2)
        .zip(params.windows(2))
        .map(|(e, h)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        .collect())
}

/// Least-squares slope of `log y` against `log x`.
pub fn fit_loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(invalid("slope fit needs two or more points"));
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(invalid("slope fit needs positive values"));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(invalid("slope fit needs distinct abscissae"));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}
