//! Sup/inf of a nonlinearity over a box in `(r, u, v, gu, gv)`.
//!
//! A coarse tensor grid over the axes the expression actually reads is
//! followed by coordinate descent from the best few grid points. Each 1-D
//! step is a zooming line search: sample the bracket, recentre on the best
//! sample, shrink by four, repeat. The result is deterministic for a fixed
//! configuration regardless of the number of worker threads.

use crate::expr::{EvalError, Expr, Point, Var};
use crate::geometry::Extremum;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScanError {
    #[error("empty box: axis {axis} has lo={lo} > hi={hi}")]
    EmptyBox {
        axis: &'static str,
        lo: f64,
        hi: f64,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}, {}]",
            crate::format::sig9(self.lo),
            crate::format::sig9(self.hi)
        )
    }
}

/// Closed box over `(r, u, v, gu, gv)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxSpec {
    pub axes: [Interval; 5],
}

impl BoxSpec {
    pub fn new(r: Interval, u: Interval, v: Interval, gu: Interval, gv: Interval) -> Self {
        Self {
            axes: [r, u, v, gu, gv],
        }
    }

    pub fn axis(&self, var: Var) -> Interval {
        self.axes[var.axis()]
    }

    fn validate(&self) -> Result<(), ScanError> {
        for var in Var::ALL {
            let iv = self.axis(var);
            if iv.lo.is_nan() || iv.hi.is_nan() || iv.lo > iv.hi {
                return Err(ScanError::EmptyBox {
                    axis: var.name(),
                    lo: iv.lo,
                    hi: iv.hi,
                });
            }
        }
        Ok(())
    }
}

impl std::fmt::Display for BoxSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = Var::ALL
            .iter()
            .map(|v| format!("{} in {}", v.name(), self.axis(*v)))
            .collect();
        write!(f, "{}", parts.join(", "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanConfig {
    /// Grid samples per active axis.
    pub points_per_axis: usize,
    /// Number of best grid points refined by coordinate descent.
    pub starts: usize,
    /// Samples per zoom stage of a line search.
    pub line_points: usize,
    pub max_sweeps: usize,
    /// Relative improvement below which a sweep counts as converged.
    pub rel_tol: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            points_per_axis: 17,
            starts: 8,
            line_points: 17,
            max_sweeps: 40,
            rel_tol: 1e-13,
        }
    }
}

impl ScanConfig {
    /// Same configuration with every sampling density doubled.
    pub fn doubled(&self) -> Self {
        Self {
            points_per_axis: 2 * self.points_per_axis - 1,
            starts: 2 * self.starts,
            line_points: 2 * self.line_points - 1,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanResult {
    pub value: f64,
    pub argpoint: Point,
    pub evaluations: usize,
}

/// Key, location and evaluation count of one refined start.
type Descent = (f64, [f64; 5], usize);

/// Estimate `sup` or `inf` of `f` over `bx`.
pub fn scan_extremum(
    f: &Expr,
    bx: &BoxSpec,
    mode: Extremum,
    cfg: &ScanConfig,
) -> Result<ScanResult, ScanError> {
    bx.validate()?;
    let used = f.variables();
    let active: Vec<usize> = Var::ALL
        .iter()
        .filter(|v| used.contains(**v) && bx.axis(**v).width() > 0.0)
        .map(|v| v.axis())
        .collect();
    let base: [f64; 5] = std::array::from_fn(|i| bx.axes[i].lo);
    let per_axis = cfg.points_per_axis.max(2);
    let total = per_axis.pow(active.len() as u32);

    let grid_point = |mut idx: usize| {
        let mut x = base;
        for &axis in &active {
            let i = idx % per_axis;
            idx /= per_axis;
            let iv = bx.axes[axis];
            x[axis] = if i == per_axis - 1 {
                iv.hi
            } else {
                iv.lo + iv.width() * i as f64 / (per_axis - 1) as f64
            };
        }
        x
    };
    let key = |v: f64| match mode {
        Extremum::Sup => -v,
        Extremum::Inf => v,
    };

    const CHUNK: usize = 4096;
    let starts = cfg.starts.max(1);
    let chunks: Vec<Result<Vec<(f64, usize)>, EvalError>> = (0..total.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut best: Vec<(f64, usize)> = Vec::with_capacity(starts + 1);
            for idx in c * CHUNK..((c + 1) * CHUNK).min(total) {
                let v = f.eval(&Point::from_array(grid_point(idx)))?;
                push_top(&mut best, (key(v), idx), starts);
            }
            Ok(best)
        })
        .collect();
    let mut seeds: Vec<(f64, usize)> = Vec::new();
    for chunk in chunks {
        for cand in chunk? {
            push_top(&mut seeds, cand, starts);
        }
    }

    let refined: Vec<Result<Descent, EvalError>> = seeds
        .par_iter()
        .map(|&(k, idx)| descend(f, bx, &active, grid_point(idx), k, &key, cfg))
        .collect();
    let mut evaluations = total;
    let mut best: Option<(f64, [f64; 5])> = None;
    for r in refined {
        let (k, x, evals) = r?;
        evaluations += evals;
        if best.is_none_or(|(bk, _)| k < bk) {
            best = Some((k, x));
        }
    }
    let (_, x) = best.expect("at least one grid point");
    let argpoint = Point::from_array(x);
    Ok(ScanResult {
        value: f.eval(&argpoint)?,
        argpoint,
        evaluations,
    })
}

/// Keep the `limit` smallest `(key, index)` pairs in ascending order.
fn push_top(best: &mut Vec<(f64, usize)>, cand: (f64, usize), limit: usize) {
    let pos = best.partition_point(|b| b.0 < cand.0 || (b.0 == cand.0 && b.1 < cand.1));
    if pos < limit {
        best.insert(pos, cand);
        best.truncate(limit);
    }
}

fn descend(
    f: &Expr,
    bx: &BoxSpec,
    active: &[usize],
    mut x: [f64; 5],
    mut best: f64,
    key: &impl Fn(f64) -> f64,
    cfg: &ScanConfig,
) -> Result<(f64, [f64; 5], usize), EvalError> {
    let mut evals = 0;
    for _ in 0..cfg.max_sweeps {
        let before = best;
        for &axis in active {
            let (k, n) = line_search(f, bx.axes[axis], axis, &mut x, best, key, cfg.line_points)?;
            best = k;
            evals += n;
        }
        if before - best <= cfg.rel_tol * best.abs().max(1.0) {
            break;
        }
    }
    Ok((best, x, evals))
}

fn line_search(
    f: &Expr,
    iv: Interval,
    axis: usize,
    x: &mut [f64; 5],
    mut best: f64,
    key: &impl Fn(f64) -> f64,
    points: usize,
) -> Result<(f64, usize), EvalError> {
    let points = points.max(3);
    let mut center = x[axis];
    let mut half = iv.width();
    let floor = 1e-14 * iv.lo.abs().max(iv.hi.abs()).max(iv.width());
    let mut evals = 0;
    let mut probe = *x;
    while half > floor {
        for i in 0..points {
            let cand =
                (center - half + 2.0 * half * i as f64 / (points - 1) as f64).clamp(iv.lo, iv.hi);
            probe[axis] = cand;
            let k = key(f.eval(&Point::from_array(probe))?);
            evals += 1;
            if k < best {
                best = k;
                x[axis] = cand;
            }
        }
        center = x[axis];
        half /= 4.0;
    }
    Ok((best, evals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn unit_box() -> BoxSpec {
        let i = Interval::new(0.0, 1.0);
        BoxSpec::new(i, i, i, i, i)
    }

    #[test]
    fn monotone_corner_is_exact() {
        let f = Expr::parse("u^5/2").unwrap();
        let mut bx = unit_box();
        bx.axes[1] = Interval::new(0.0, 0.1);
        let res = scan_extremum(&f, &bx, Extremum::Sup, &ScanConfig::default()).unwrap();
        assert_eq!(res.value, 0.1f64.powi(5) / 2.0);
        assert_eq!(res.argpoint.u, 0.1);
        let low = scan_extremum(&f, &bx, Extremum::Inf, &ScanConfig::default()).unwrap();
        assert_eq!(low.value, 0.0);
    }

    #[test]
    fn constant_collapses_grid() {
        let f = Expr::parse("1").unwrap();
        let res = scan_extremum(&f, &unit_box(), Extremum::Inf, &ScanConfig::default()).unwrap();
        assert_eq!(res.value, 1.0);
        assert!(res.evaluations < 10);
    }

    #[test]
    fn interior_extremum_found() {
        let f = Expr::parse("(u - 0.3)^2 + (r - 0.71)^2 + 1").unwrap();
        let res = scan_extremum(&f, &unit_box(), Extremum::Inf, &ScanConfig::default()).unwrap();
        assert!((res.value - 1.0).abs() < 1e-12);
        assert!((res.argpoint.u - 0.3).abs() < 1e-6);
    }

    #[test]
    fn oscillatory_gradient_factor() {
        // inf of (2 - sin(gu^2 + gv^2)) over a wide gradient box is 1.
        let f = Expr::parse("2 - sin(gu^2 + gv^2)").unwrap();
        let z = Interval::new(0.0, 1000.0);
        let bx = BoxSpec::new(
            Interval::point(1.0),
            Interval::point(1.0),
            Interval::point(0.0),
            z,
            z,
        );
        let res = scan_extremum(&f, &bx, Extremum::Inf, &ScanConfig::default()).unwrap();
        assert!((res.value - 1.0).abs() < 1e-12, "{res:?}");
    }

    #[test]
    fn example_lower_bound_for_first_nonlinearity() {
        let f = Expr::parse("exp(-r^2)/6 * (2 - sin(gu^2+gv^2)) * u^5").unwrap();
        let z = Interval::new(0.0, 1000.0);
        let bx = BoxSpec::new(
            Interval::new(4.0 * E / (3.0 * E + 1.0), 4.0 * E / (E + 3.0)),
            Interval::new(10.0, 40.0),
            Interval::new(0.0, 20.0),
            z,
            z,
        );
        let res = scan_extremum(&f, &bx, Extremum::Inf, &ScanConfig::default()).unwrap();
        let r = 4.0 * E / (E + 3.0);
        let exact = (-r * r).exp() / 6.0 * 1e5;
        assert!(
            (res.value - exact).abs() < 1e-9 * exact,
            "{} vs {exact}",
            res.value
        );
        assert!((res.value - 448.356).abs() / 448.356 < 1e-3);
    }

    #[test]
    fn errors_propagate_with_point() {
        let f = Expr::parse("1/u").unwrap();
        let err =
            scan_extremum(&f, &unit_box(), Extremum::Sup, &ScanConfig::default()).unwrap_err();
        let ScanError::Eval(e) = err else { panic!() };
        assert_eq!(e.point.u, 0.0);
        let mut bx = unit_box();
        bx.axes[2] = Interval::new(1.0, 0.0);
        assert!(matches!(
            scan_extremum(&f, &bx, Extremum::Sup, &ScanConfig::default()),
            Err(ScanError::EmptyBox { axis: "v", .. })
        ));
    }

    #[test]
    fn deterministic_across_runs() {
        let f = Expr::parse("sin(7*r*u) * cos(3*gv) + v").unwrap();
        let a = scan_extremum(&f, &unit_box(), Extremum::Sup, &ScanConfig::default()).unwrap();
        let b = scan_extremum(&f, &unit_box(), Extremum::Sup, &ScanConfig::default()).unwrap();
        assert_eq!(a, b);
    }
}
