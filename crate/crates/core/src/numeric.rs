//! Shared numeric helpers: FWHM extraction, least-squares fits.

/// Argument at which sinc²(x) falls to one half: sin²x/x² = 1/2.
pub const SINC_SQ_HALF_MAX_ARG: f64 = 1.391_557_378_251_512;

/// Half-maximum crossings of a sampled non-negative profile, located by
/// linear interpolation around the tallest contiguous above-half region.
///
/// Returns `(x_left, x_right, n_regions)` where `n_regions` counts all
/// contiguous above-half regions (more than one means the width is
/// ill-defined and the caller may want to flag it). Returns `None` when a
/// crossing is missing on either side (profile truncated by the window).
pub fn half_max_crossings(x: &[f64], y: &[f64]) -> Option<(f64, f64, usize)> {
    debug_assert_eq!(x.len(), y.len());
    let imax = y
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)?;
    let half = y[imax] / 2.0;

    let mut regions = 0usize;
    let mut inside = false;
    for &v in y {
        if v >= half && !inside {
            regions += 1;
            inside = true;
        } else if v < half {
            inside = false;
        }
    }

    let mut l = imax;
    while l > 0 && y[l - 1] >= half {
        l -= 1;
    }
    if l == 0 {
        return None;
    }
    let mut r = imax;
    while r + 1 < y.len() && y[r + 1] >= half {
        r += 1;
    }
    if r + 1 == y.len() {
        return None;
    }

    let xl = x[l - 1] + (x[l] - x[l - 1]) * (half - y[l - 1]) / (y[l] - y[l - 1]);
    let xr = x[r] + (x[r + 1] - x[r]) * (half - y[r]) / (y[r + 1] - y[r]);
    Some((xl, xr, regions))
}

/// Unweighted least-squares line `y = a + b x`; returns `(a, b)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(u, v)| u * v).sum();
    let denom = n * sxx - sx * sx;
    let b = (n * sxy - sx * sy) / denom;
    let a = (sy - b * sx) / n;
    (a, b)
}

/// Weighted least-squares line; weights need not be normalized.
pub fn weighted_linear_fit(x: &[f64], y: &[f64], w: &[f64]) -> (f64, f64) {
    let sw: f64 = w.iter().sum();
    let xb: f64 = x.iter().zip(w).map(|(u, q)| u * q).sum::<f64>() / sw;
    let yb: f64 = y.iter().zip(w).map(|(u, q)| u * q).sum::<f64>() / sw;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..x.len() {
        num += w[i] * (x[i] - xb) * (y[i] - yb);
        den += w[i] * (x[i] - xb) * (x[i] - xb);
    }
    let b = num / den;
    (yb - b * xb, b)
}

/// Log-log power-law slope of `(x, y)` pairs.
pub fn power_law_exponent(pairs: &[(f64, f64)]) -> Option<f64> {
    if pairs.len() < 2 {
        return None;
    }
    let lx: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let first = lx[0];
    if lx.iter().all(|&v| (v - first).abs() < 1e-12) {
        return None; // degenerate abscissa
    }
    let ly: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    Some(linear_fit(&lx, &ly).1)
}
