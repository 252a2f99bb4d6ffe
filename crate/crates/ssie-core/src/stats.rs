//! Small statistical helpers shared by the audit and report code.

/// Pearson correlation coefficient.
///
/// Computed from centered sums: `sum(dx*dy) / sqrt(sum(dx^2) * sum(dy^2))`.
/// Returns `None` when fewer than two points are given or either column has
/// zero variance (the coefficient is undefined there, which callers must
/// not conflate with 0).
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len(), "pearson: input length mismatch");
    let n = x.len();
    if n < 2 {
        return None;
    }
    let mean_x = x.iter().sum::<f64>() / n as f64;
    let mean_y = y.iter().sum::<f64>() / n as f64;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        let dx = a - mean_x;
        let dy = b - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}
