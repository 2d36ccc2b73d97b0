//! Green's kernels of `-w'' = g` on `[0, 1]` and the cone constants built on them.
//!
//! * [`KernelKind::Dirichlet`]: `w(0) = w(1) = 0`, kernel `k1(t,s) = min(t,s)(1 - max(t,s))`.
//! * [`KernelKind::Mixed`]: `w(0) = 0`, `w'(1) = 0`, kernel `k2(t,s) = min(t,s)`.
//!
//! The constants `m = (sup_t int_0^1 k(t,s) ds)^-1` and
//! `M = (inf_{t in [a,b]} int_a^b k(t,s) ds)^-1` are available in closed form
//! and through an independent quadrature route so user windows can be
//! certified.

use crate::quadrature::simpson;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("kernel argument ({t}, {s}) outside [0, 1]^2")]
    OutOfRange { t: f64, s: f64 },
    #[error("invalid window [{a}, {b}] for {kind} kernel")]
    Window { a: f64, b: f64, kind: KernelKind },
    #[error("degenerate window [{a}, {b}]")]
    Degenerate { a: f64, b: f64 },
}

/// Boundary-condition pair, i.e. which of the two Green's kernels applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    /// Component 1 (`u`): Dirichlet at both ends.
    Dirichlet,
    /// Component 2 (`v`): Dirichlet at 0, Neumann at 1.
    Mixed,
}

impl KernelKind {
    pub const BOTH: [KernelKind; 2] = [KernelKind::Dirichlet, KernelKind::Mixed];

    /// 1 or 2.
    pub fn index(self) -> usize {
        match self {
            KernelKind::Dirichlet => 1,
            KernelKind::Mixed => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        match i {
            1 => Some(KernelKind::Dirichlet),
            2 => Some(KernelKind::Mixed),
            _ => None,
        }
    }
}

impl std::fmt::Display for KernelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KernelKind::Dirichlet => write!(f, "Dirichlet (k1)"),
            KernelKind::Mixed => write!(f, "Dirichlet-Neumann (k2)"),
        }
    }
}

/// Localization interval `[a, b]` for one component.
///
/// Dirichlet windows must satisfy `0 < a < b < 1`; mixed windows `0 < a < b <= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeWindow {
    a: f64,
    b: f64,
    kind: KernelKind,
}

impl ConeWindow {
    pub fn new(kind: KernelKind, a: f64, b: f64) -> Result<Self, KernelError> {
        if a == b {
            return Err(KernelError::Degenerate { a, b });
        }
        let upper_ok = match kind {
            KernelKind::Dirichlet => b < 1.0,
            KernelKind::Mixed => b <= 1.0,
        };
        if !(a.is_finite() && b.is_finite() && a > 0.0 && a < b && upper_ok) {
            return Err(KernelError::Window { a, b, kind });
        }
        Ok(Self { a, b, kind })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.a && t <= self.b
    }
}

/// Value of `dk/dt` together with a marker for the jump at `t = s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSlope {
    pub value: f64,
    /// Set when `t == s`; `value` is then the `s < t` branch.
    pub at_jump: bool,
}

pub fn k1(t: f64, s: f64) -> Result<f64, KernelError> {
    check_square(t, s)?;
    Ok(kernel(KernelKind::Dirichlet, t, s))
}

pub fn k2(t: f64, s: f64) -> Result<f64, KernelError> {
    check_square(t, s)?;
    Ok(kernel(KernelKind::Mixed, t, s))
}

pub fn dk_dt(kind: KernelKind, t: f64, s: f64) -> Result<KernelSlope, KernelError> {
    check_square(t, s)?;
    Ok(KernelSlope {
        value: if s <= t {
            slope_left(kind, s)
        } else {
            slope_right(kind, s)
        },
        at_jump: t == s,
    })
}

/// `phi(s) = sup_t k(t, s)`.
pub fn phi(kind: KernelKind, s: f64) -> f64 {
    match kind {
        KernelKind::Dirichlet => s * (1.0 - s),
        KernelKind::Mixed => s,
    }
}

/// Envelope of `|dk/dt(., s)|`.
pub fn psi(kind: KernelKind, s: f64) -> f64 {
    match kind {
        KernelKind::Dirichlet => s.max(1.0 - s),
        KernelKind::Mixed => 1.0,
    }
}

// Unchecked kernel evaluation for quadrature loops.
pub(crate) fn kernel(kind: KernelKind, t: f64, s: f64) -> f64 {
    match kind {
        KernelKind::Dirichlet => {
            if s <= t {
                s * (1.0 - t)
            } else {
                t * (1.0 - s)
            }
        }
        KernelKind::Mixed => s.min(t),
    }
}

/// `dk/dt` on the branch `s < t`.
pub(crate) fn slope_left(kind: KernelKind, s: f64) -> f64 {
    match kind {
        KernelKind::Dirichlet => -s,
        KernelKind::Mixed => 0.0,
    }
}

/// `dk/dt` on the branch `s > t`.
pub(crate) fn slope_right(kind: KernelKind, s: f64) -> f64 {
    match kind {
        KernelKind::Dirichlet => 1.0 - s,
        KernelKind::Mixed => 1.0,
    }
}

fn check_square(t: f64, s: f64) -> Result<(), KernelError> {
    if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&s) {
        Ok(())
    } else {
        Err(KernelError::OutOfRange { t, s })
    }
}

/// Closed-form `m`: 8 for the Dirichlet kernel, 2 for the mixed kernel.
pub fn little_m(kind: KernelKind) -> f64 {
    match kind {
        KernelKind::Dirichlet => 8.0,
        KernelKind::Mixed => 2.0,
    }
}

/// `m` recomputed as `(max_t int_0^1 k(t,s) ds)^-1` over `points` uniform values of `t`.
pub fn little_m_numerical(kind: KernelKind, points: usize) -> f64 {
    let points = points.max(2);
    let best = (0..points)
        .map(|i| {
            let t = i as f64 / (points - 1) as f64;
            window_integral(kind, t, 0.0, 1.0)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    1.0 / best
}

/// Closed-form `M` for a window.
pub fn big_m(window: &ConeWindow) -> f64 {
    let (a, b) = (window.a, window.b);
    match window.kind {
        KernelKind::Dirichlet => {
            if a + b <= 1.0 {
                2.0 / (a * (b - a) * (2.0 - a - b))
            } else {
                2.0 / ((1.0 - b) * (b * b - a * a))
            }
        }
        KernelKind::Mixed => 1.0 / (a * (b - a)),
    }
}

/// `M` recomputed as `(min_{t in [a,b]} int_a^b k(t,s) ds)^-1` by quadrature,
/// sampling `points` values of `t` (endpoints included) and polishing the best
/// one with a golden-section search.
pub fn big_m_numerical(window: &ConeWindow, points: usize) -> f64 {
    let (a, b) = (window.a, window.b);
    let kind = window.kind;
    let points = points.max(2);
    let f = |t: f64| window_integral(kind, t, a, b);
    let step = (b - a) / (points - 1) as f64;
    let (mut best_t, mut best) = (a, f(a));
    for i in 1..points {
        let t = if i == points - 1 {
            b
        } else {
            a + step * i as f64
        };
        let v = f(t);
        if v < best {
            best = v;
            best_t = t;
        }
    }
    let (lo, hi) = ((best_t - step).max(a), (best_t + step).min(b));
    let (_, v) = golden_min(f, lo, hi, 60);
    1.0 / best.min(v)
}

/// Harnack constant: `min(a, 1 - b)` for Dirichlet, `a` for mixed.
pub fn harnack_c(window: &ConeWindow) -> f64 {
    match window.kind {
        KernelKind::Dirichlet => window.a.min(1.0 - window.b),
        KernelKind::Mixed => window.a,
    }
}

/// `int_lo^hi k(t, s) ds`, split at `s = t` so each piece is smooth.
fn window_integral(kind: KernelKind, t: f64, lo: f64, hi: f64) -> f64 {
    const PANELS: usize = 16;
    let split = t.clamp(lo, hi);
    let g = |s: f64| kernel(kind, t, s);
    simpson(g, lo, split, PANELS) + simpson(g, split, hi, PANELS)
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iters {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 < f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// All cone constants for a pair of windows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConstants {
    pub m: [f64; 2],
    pub big_m: [f64; 2],
    pub c: [f64; 2],
}

impl KernelConstants {
    pub fn new(windows: &[ConeWindow; 2]) -> Self {
        Self {
            m: [little_m(KernelKind::Dirichlet), little_m(KernelKind::Mixed)],
            big_m: [big_m(&windows[0]), big_m(&windows[1])],
            c: [harnack_c(&windows[0]), harnack_c(&windows[1])],
        }
    }
}
