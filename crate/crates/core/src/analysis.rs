//! Small fitting helpers for the asymptotic-law measurements.

/// Least-squares slope of `ln y` against `ln x`.
///
/// Points with nonpositive `x` or `y` are rejected by panic in debug builds;
/// the asymptotic tests only ever feed magnitudes.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    assert!(points.len() >= 2);
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        debug_assert!(x > 0.0 && y > 0.0);
        let lx = x.ln();
        let ly = y.ln();
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Maximum of `|f|` over one oscillation window `[t0, t0 + period]`,
/// sampled at `n` equally spaced points.
pub fn oscillation_envelope(f: impl Fn(f64) -> f64, t0: f64, period: f64, n: usize) -> f64 {
    assert!(n >= 2 && period > 0.0);
    (0..n)
        .map(|i| f(t0 + period * i as f64 / (n - 1) as f64).abs())
        .fold(0.0, f64::max)
}
