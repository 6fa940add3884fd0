//! Refinement-trend rules used to turn "holds in the limit" identities into
//! finite checks.

/// Residuals at or below this are treated as exact.
pub const RESIDUAL_FLOOR: f64 = 1e-12;

/// Per-level slack allowed by [`decreasing_with_slack`] for sampling noise.
pub const LEVEL_SLACK: f64 = 0.10;

/// Residuals listed coarsest first. Holds when the finest residual is below
/// the one two levels coarser (or the coarsest available), or is negligible.
pub fn trend_holds(residuals: &[f64]) -> bool {
    let Some(&finest) = residuals.last() else {
        return true;
    };
    if finest <= RESIDUAL_FLOOR {
        return true;
    }
    match residuals.len() {
        0 | 1 => false,
        2 => finest < residuals[0],
        n => finest < residuals[n - 3],
    }
}

/// Every value is at most `(1 + slack)` times its predecessor, or negligible.
pub fn decreasing_with_slack(values: &[f64], slack: f64) -> bool {
    values
        .windows(2)
        .all(|w| w[1] <= RESIDUAL_FLOOR || w[1] <= (1.0 + slack) * w[0])
}

/// Least-squares slope of `ln(max(v, floor))` against the level index.
pub fn log_slope(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let ys: Vec<f64> = values.iter().map(|v| v.max(RESIDUAL_FLOOR).ln()).collect();
    let xm = (n - 1) as f64 / 2.0;
    let ym = ys.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, y) in ys.iter().enumerate() {
        let dx = i as f64 - xm;
        sxy += dx * (y - ym);
        sxx += dx * dx;
    }
    sxy / sxx
}

/// Noisy refinement sequences: [`trend_holds`], the finest value is below the
/// coarsest, and the log-linear fit slopes downward.
pub fn refinement_decreasing(values: &[f64]) -> bool {
    if values.iter().all(|&v| v <= RESIDUAL_FLOOR) {
        return true;
    }
    trend_holds(values)
        && values.len() >= 2
        && (values[values.len() - 1] < values[0] || values[values.len() - 1] <= RESIDUAL_FLOOR)
        && log_slope(values) < 0.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trend_rule() {
        assert!(trend_holds(&[0.3, 0.2, 0.25, 0.1]));
        assert!(!trend_holds(&[0.3, 0.2, 0.25, 0.21]));
        assert!(trend_holds(&[0.0, 0.0, 0.0]));
        assert!(trend_holds(&[0.5, 0.1]));
        assert!(!trend_holds(&[0.5]));
        assert!(trend_holds(&[]));
    }

    #[test]
    fn slack_rule() {
        assert!(decreasing_with_slack(&[1.0, 1.05, 0.9, 0.5], 0.1));
        assert!(!decreasing_with_slack(&[1.0, 1.2], 0.1));
        assert!(decreasing_with_slack(&[0.0, 0.0], 0.1));
    }

    #[test]
    fn refinement_rule() {
        assert!((log_slope(&[1.0, 0.5, 0.25]) + 2f64.ln()).abs() < 1e-14);
        assert!(refinement_decreasing(&[1e-3, 5e-3, 2e-3, 1e-3, 2e-4, 3e-4, 1e-4]));
        assert!(!refinement_decreasing(&[1e-4, 1e-3, 1e-2]));
        assert!(!refinement_decreasing(&[1e-3, 5e-4, 1e-3]));
        assert!(refinement_decreasing(&[0.0, 0.0]));
    }
}
