use super::AnalysisError;

/// Least-squares line through `(t, log₁₀ e(t))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Fits the tail half of `errors`, where `errors[k]` is the error at round `first_t + k`.
/// Non-positive errors (exact convergence) are dropped.
pub fn log_error_fit(errors: &[f64], first_t: usize) -> Result<LogFit, AnalysisError> {
    let start = errors.len() / 2;
    let pts: Vec<(f64, f64)> = errors[start..]
        .iter()
        .enumerate()
        .filter(|(_, e)| **e > 0.0 && e.is_finite())
        .map(|(k, e)| ((first_t + start + k) as f64, e.log10()))
        .collect();
    if pts.len() < 2 {
        return Err(AnalysisError::FitFailed);
    }
    let m = pts.len() as f64;
    let mean_t = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let stt: f64 = pts.iter().map(|p| (p.0 - mean_t).powi(2)).sum();
    let sty: f64 = pts.iter().map(|p| (p.0 - mean_t) * (p.1 - mean_y)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let slope = sty / stt;
    let intercept = mean_y - slope * mean_t;
    let r_squared = if syy == 0.0 { 1.0 } else { sty * sty / (stt * syy) };
    Ok(LogFit {
        slope,
        intercept,
        r_squared,
        points: pts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_geometric_decay() {
        let errs: Vec<f64> = (0..40).map(|t| 3.0 * 0.5f64.powi(t)).collect();
        let fit = log_error_fit(&errs, 0).unwrap();
        assert!((fit.slope - 0.5f64.log10()).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert_eq!(fit.points, 20);
        assert!((fit.intercept - 3f64.log10()).abs() < 1e-10);
    }

    #[test]
    fn too_few_points() {
        assert_eq!(log_error_fit(&[1.0, 0.0, 0.0], 1), Err(AnalysisError::FitFailed));
    }
}
