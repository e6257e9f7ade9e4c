//! The C-infinity bumpexp(-1/(1-s^2)) on |s| < 1, shared by the initial-data
//! mollifier and the analytic space-time test functions.

/// b(s) = exp(-1/(1-s^2)) for |s| < 1, 0 otherwise. Not normalized.
#[inline]
pub fn bump(s: f64) -> f64 {
    let t = 1.0 - s * s;
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// db/ds. Vanishes smoothly (with all derivatives) at |s| = 1.
#[inline]
pub fn bump_deriv(s: f64) -> f64 {
    let t = 1.0 - s * s;
    if t <= 0.0 {
        0.0
    } else {
        bump(s) * (-2.0 * s / (t * t))
    }
}
