use crate::error::{Error, Result};

/// Least-squares slope of `log(values)` against `log(ns)`.
pub fn fit_rate(ns: &[usize], values: &[f64]) -> Result<f64> {
    if ns.len() != values.len() {
        return Err(Error::Contract(format!(
            "{} sample sizes but {} values",
            ns.len(),
            values.len()
        )));
    }
    if ns.len() < 3 {
        return Err(Error::Contract("rate fit needs at least 3 points".into()));
    }
    if let Some(v) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::Contract(format!(
            "rate fit needs positive values, got {v}"
        )));
    }
    if ns.contains(&0) {
        return Err(Error::Contract("sample sizes must be positive".into()));
    }
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Contract(
            "rate fit needs at least two distinct sample sizes".into(),
        ));
    }
    Ok(sxy / sxx)
}
