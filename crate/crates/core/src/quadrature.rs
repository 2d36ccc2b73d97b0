//! Composite Newton-Cotes rules on uniform samples.

/// Composite Simpson for a closure on `[a, b]` with an even number of panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels.max(2) + panels % 2;
    let h = (b - a) / panels as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for i in 1..panels {
        let y = f(a + h * i as f64);
        if i % 2 == 1 {
            odd += y;
        } else {
            even += y;
        }
    }
    h / 3.0 * (f(a) + 4.0 * odd + 2.0 * even + f(b))
}

/// Integral of uniformly spaced samples `y` with spacing `h`.
///
/// Even panel counts use composite Simpson; odd counts of at least three
/// close with Simpson's 3/8 rule on the last three panels. A single panel
/// falls back to the trapezoid rule; callers that need fourth order on a
/// single panel supply a midpoint and use [`simpson_panel`].
pub fn integrate_samples(y: &[f64], h: f64) -> f64 {
    let panels = y.len().saturating_sub(1);
    match panels {
        0 => 0.0,
        1 => 0.5 * h * (y[0] + y[1]),
        p if p % 2 == 0 => simpson_even(y, h),
        p => simpson_even(&y[..p - 2], h) + three_eighths(&y[p - 3..], h),
    }
}

/// Simpson's rule on one panel of width `h` given its midpoint value.
pub fn simpson_panel(left: f64, mid: f64, right: f64, h: f64) -> f64 {
    h / 6.0 * (left + 4.0 * mid + right)
}

fn simpson_even(y: &[f64], h: f64) -> f64 {
    let panels = y.len() - 1;
    if panels == 0 {
        return 0.0;
    }
    let mut acc = y[0] + y[panels];
    for (i, v) in y.iter().enumerate().take(panels).skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    acc * h / 3.0
}

fn three_eighths(y: &[f64], h: f64) -> f64 {
    3.0 * h / 8.0 * (y[0] + 3.0 * y[1] + 3.0 * y[2] + y[3])
}
