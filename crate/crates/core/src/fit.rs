//! Least-squares line fits used for late-time decay rates.

/// Result of fitting y = intercept + slope·x.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub rms: f64,
    pub points: usize,
}

/// Decay rate from a log-linear fit with its rms residual.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateFit {
    pub rate: f64,
    pub residual: f64,
    pub points: usize,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> LineFit {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    LineFit { slope, intercept, rms: (ss / n).sqrt(), points: x.len() }
}

/// Upper concave hull of (x, y) evaluated back on every x. `x` must be
/// increasing. Beats between poles of equal width leave dips in ln|G| that the
/// hull bridges, so a line through it follows the envelope.
pub fn upper_envelope(x: &[f64], y: &[f64]) -> Vec<f64> {
    assert_eq!(x.len(), y.len());
    let mut hull: Vec<usize> = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b when it lies on or below the chord a→i
            let cross = (x[b] - x[a]) * (y[i] - y[a]) - (y[b] - y[a]) * (x[i] - x[a]);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let mut out = Vec::with_capacity(x.len());
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        for i in a..b {
            out.push(y[a] + (y[b] - y[a]) * (x[i] - x[a]) / (x[b] - x[a]));
        }
    }
    if let Some(&last) = hull.last() {
        out.push(y[last]);
    }
    out
}
