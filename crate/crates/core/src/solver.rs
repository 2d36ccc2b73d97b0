//! Best-effort fixed-point iteration for `(u, v) = T(u, v)`.
//!
//! The existence results behind this crate are topological and give no
//! algorithm, so nothing here certifies a solution: a converged run yields a
//! *candidate*, reported together with its residuals and where it sits
//! relative to the localization sets `K_rho` and `V_s`.

use crate::expr::{EvalErrorKind, Point};
use crate::format::sig9;
use crate::hypothesis::ThresholdSpec;
use crate::kernels::{harnack_c, ConeWindow, KernelKind};
use crate::operator::{
    norms, window_min, GridFunction, OperatorError, ReducedSystem, DEFAULT_PANELS,
};
use nalgebra::{DMatrix, DVector};
use std::collections::VecDeque;
use std::fmt;
use std::io::{self, Write};
use thiserror::Error;

/// Growth factor over the initial sup norm that counts as divergence.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("initial guess has {got} panels, solver grid has {expected}")]
    InitialGrid { expected: usize, got: usize },
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error("radial residual at r={r}: {source}")]
    Radial { r: f64, source: OperatorError },
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialGuess {
    /// `u = l1`, `v = l2` with `l_i` the geometric mean of `rho_i/c_i` and `s_i/c_i`.
    Flat,
    /// `u = l1 t(1-t)`, `v = l2 t(2-t)` with window minima at `sqrt(rho_i s_i)`.
    KernelShaped,
    Grid(GridFunction, GridFunction),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    /// Panels on `[0, 1]`; even and at least 64.
    pub panels: usize,
    /// Mixing weight `beta` in `(0, 1]`.
    pub damping: f64,
    /// Anderson history length; 0 is plain damped iteration.
    pub anderson_depth: usize,
    pub max_iterations: usize,
    /// Stop once `sup |T(x) - x| <= tolerance` on the values.
    pub tolerance: f64,
    pub initial: InitialGuess,
    /// Interior radii used for the radial residual.
    pub radial_samples: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            panels: DEFAULT_PANELS,
            damping: 0.5,
            anderson_depth: 0,
            max_iterations: 500,
            tolerance: 1e-10,
            initial: InitialGuess::KernelShaped,
            radial_samples: 63,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        if self.panels < 64 || !self.panels.is_multiple_of(2) {
            return Err(SolveError::Config(format!(
                "grid must be even and >= 64, got {}",
                self.panels
            )));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(SolveError::Config(format!(
                "damping must lie in (0, 1], got {}",
                self.damping
            )));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(SolveError::Config(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.radial_samples == 0 {
            return Err(SolveError::Config("radial_samples must be positive".into()));
        }
        if let InitialGuess::Grid(u, v) = &self.initial {
            for w in [u, v] {
                if w.panels() != self.panels {
                    return Err(SolveError::InitialGrid {
                        expected: self.panels,
                        got: w.panels(),
                    });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    /// The iterate grew past `DIVERGENCE_FACTOR` times its initial size or overflowed.
    Diverged,
}

impl SolveStatus {
    pub fn label(self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIterations => "max_iterations",
            SolveStatus::Diverged => "diverged",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// `sup |T(x) - x|` over the values of both components.
    pub residual: f64,
    pub sup_u: f64,
    pub sup_v: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Localization {
    /// Both full norms below `rho_i`.
    InsideK,
    /// In `V_s` and outside the closure of `K_rho`.
    Target,
    /// Some window minimum is at least `s_i`.
    OutsideV,
    /// In `V_s`, on the boundary of `K_rho`.
    Mixed,
}

impl Localization {
    pub fn label(self) -> &'static str {
        match self {
            Localization::InsideK => "inside_K_rho",
            Localization::Target => "target_region",
            Localization::OutsideV => "outside_V_s",
            Localization::Mixed => "mixed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizationReport {
    /// `max(||w||_inf, ||w'||_omega)` per component.
    pub norms: [f64; 2],
    pub window_min: [f64; 2],
    pub region: Localization,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryReport {
    pub u_inner: f64,
    pub u_outer: f64,
    pub v_inner: f64,
    /// `dv/dr` at `R1`.
    pub dv_outer: f64,
    pub tolerance: f64,
}

impl BoundaryReport {
    pub fn holds(&self) -> bool {
        [self.u_inner, self.u_outer, self.v_inner, self.dv_outer]
            .iter()
            .all(|x| x.abs() <= self.tolerance)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialReport {
    /// `max |-w'' - (n-1)/r w' - f|` over the sample radii, per component.
    pub residual: [f64; 2],
    pub radii: Vec<f64>,
    /// Finite-difference step in `r`.
    pub step: f64,
    pub boundary: BoundaryReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub u: GridFunction,
    pub v: GridFunction,
    pub status: SolveStatus,
    /// Number of mixing updates applied.
    pub iterations: usize,
    pub fixed_point_residual: f64,
    /// `max |-w'' - g|` over interior nodes by centered differences, per component.
    pub ode_residual: [f64; 2],
    pub radial: RadialReport,
    pub localization: LocalizationReport,
    pub trace: Vec<IterationRecord>,
    pub tolerance: f64,
}

impl SolveResult {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }

    /// `# key=value` metadata followed by `t,r,u,v,du_dt,dv_dt` rows.
    pub fn write_csv(&self, sys: &ReducedSystem, mut out: impl Write) -> io::Result<()> {
        for (k, v) in self.metadata() {
            writeln!(out, "# {k}={v}")?;
        }
        writeln!(out, "t,r,u,v,du_dt,dv_dt")?;
        for k in 0..=self.u.panels() {
            let t = self.u.node(k);
            writeln!(
                out,
                "{},{},{},{},{},{}",
                sig9(t),
                sig9(sys.domain().radius_at(t)),
                sig9(self.u.values()[k]),
                sig9(self.v.values()[k]),
                sig9(self.u.derivs()[k]),
                sig9(self.v.derivs()[k]),
            )?;
        }
        Ok(())
    }

    pub fn metadata(&self) -> Vec<(&'static str, String)> {
        vec![
            ("N", self.u.panels().to_string()),
            ("status", self.status.label().into()),
            ("converged", self.converged().to_string()),
            ("iterations", self.iterations.to_string()),
            ("tolerance", sig9(self.tolerance)),
            ("fixed_point_residual", sig9(self.fixed_point_residual)),
            ("ode_residual_u", sig9(self.ode_residual[0])),
            ("ode_residual_v", sig9(self.ode_residual[1])),
            ("pde_residual_u", sig9(self.radial.residual[0])),
            ("pde_residual_v", sig9(self.radial.residual[1])),
            ("boundary_ok", self.radial.boundary.holds().to_string()),
            ("localization", self.localization.region.label().into()),
        ]
    }
}

impl fmt::Display for SolveResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let outcome = match self.status {
            SolveStatus::Converged => "candidate solution found",
            SolveStatus::MaxIterations => "no candidate solution: iteration limit reached",
            SolveStatus::Diverged => "no candidate solution: iteration diverged",
        };
        writeln!(
            f,
            "{outcome} after {} iterations (N = {})",
            self.iterations,
            self.u.panels()
        )?;
        writeln!(
            f,
            "  fixed-point residual {}",
            sig9(self.fixed_point_residual)
        )?;
        writeln!(
            f,
            "  ODE residual u {}  v {}",
            sig9(self.ode_residual[0]),
            sig9(self.ode_residual[1])
        )?;
        writeln!(
            f,
            "  radial PDE residual u {}  v {}  (step {})",
            sig9(self.radial.residual[0]),
            sig9(self.radial.residual[1]),
            sig9(self.radial.step)
        )?;
        let b = &self.radial.boundary;
        writeln!(
            f,
            "  boundary u(R0) {}  u(R1) {}  v(R0) {}  v'(R1) {}  [{}]",
            sig9(b.u_inner),
            sig9(b.u_outer),
            sig9(b.v_inner),
            sig9(b.dv_outer),
            if b.holds() { "ok" } else { "FAIL" }
        )?;
        let l = &self.localization;
        writeln!(
            f,
            "  localization {}: norms {} {}, window minima {} {}",
            l.region.label(),
            sig9(l.norms[0]),
            sig9(l.norms[1]),
            sig9(l.window_min[0]),
            sig9(l.window_min[1])
        )
    }
}

/// Flat state vector `[u, u', v, v']` for mixing.
#[derive(Debug, Clone)]
struct State {
    data: Vec<f64>,
    nodes: usize,
}

impl State {
    fn from_pair(u: &GridFunction, v: &GridFunction) -> Self {
        let nodes = u.values().len();
        let mut data = Vec::with_capacity(4 * nodes);
        data.extend_from_slice(u.values());
        data.extend_from_slice(u.derivs());
        data.extend_from_slice(v.values());
        data.extend_from_slice(v.derivs());
        Self { data, nodes }
    }

    fn to_pair(&self) -> Result<(GridFunction, GridFunction), OperatorError> {
        let n = self.nodes;
        let part = |k: usize| self.data[k * n..(k + 1) * n].to_vec();
        Ok((
            GridFunction::with_derivative(part(0), part(1))?,
            GridFunction::with_derivative(part(2), part(3))?,
        ))
    }

    fn clamp_values(&mut self) {
        let n = self.nodes;
        let (u_part, v_part) = self.data.split_at_mut(2 * n);
        for x in u_part[..n].iter_mut().chain(v_part[..n].iter_mut()) {
            *x = x.max(0.0);
        }
    }
}

fn sup_values(w: &GridFunction) -> f64 {
    w.values().iter().fold(0.0, |m: f64, x| m.max(x.abs()))
}

fn initial_pair(
    windows: &[ConeWindow; 2],
    spec: &ThresholdSpec,
    cfg: &SolveConfig,
) -> Result<(GridFunction, GridFunction), OperatorError> {
    let n = cfg.panels;
    match &cfg.initial {
        InitialGuess::Grid(u, v) => Ok((u.clone(), v.clone())),
        InitialGuess::Flat => {
            let level = |i: usize| {
                let c = harnack_c(&windows[i]);
                (spec.rho[i] * spec.s[i]).sqrt() / c
            };
            let (l1, l2) = (level(0), level(1));
            Ok((
                GridFunction::sample(n, |_| l1, |_| 0.0)?,
                GridFunction::sample(n, |_| l2, |_| 0.0)?,
            ))
        }
        InitialGuess::KernelShaped => {
            let [w1, w2] = windows;
            let shape1 = |t: f64| t * (1.0 - t);
            let shape2 = |t: f64| t * (2.0 - t);
            let l1 = (spec.rho[0] * spec.s[0]).sqrt() / shape1(w1.a()).min(shape1(w1.b()));
            let l2 = (spec.rho[1] * spec.s[1]).sqrt() / shape2(w2.a());
            Ok((
                GridFunction::sample(n, |t| l1 * shape1(t), |t| l1 * (1.0 - 2.0 * t))?,
                GridFunction::sample(n, |t| l2 * shape2(t), |t| l2 * (2.0 - 2.0 * t))?,
            ))
        }
    }
}

/// Overflow inside `T` is treated as divergence rather than as an input error.
fn is_blowup(e: &OperatorError) -> bool {
    match e {
        OperatorError::Quadrature { .. } | OperatorError::NonFiniteValue(_) => true,
        OperatorError::Eval { source, .. } => {
            matches!(
                source.kind,
                EvalErrorKind::NonFinite | EvalErrorKind::NonFiniteInput
            )
        }
        _ => false,
    }
}

struct Anderson {
    depth: usize,
    xs: VecDeque<Vec<f64>>,
    fs: VecDeque<Vec<f64>>,
}

impl Anderson {
    fn new(depth: usize) -> Self {
        Self {
            depth,
            xs: VecDeque::new(),
            fs: VecDeque::new(),
        }
    }

    /// Next iterate from `x` and its residual `f = T(x) - x`.
    fn step(&mut self, x: &[f64], f: &[f64], beta: f64) -> Vec<f64> {
        let damped: Vec<f64> = x.iter().zip(f).map(|(a, b)| a + beta * b).collect();
        if self.depth == 0 {
            return damped;
        }
        self.xs.push_back(x.to_vec());
        self.fs.push_back(f.to_vec());
        if self.xs.len() > self.depth + 1 {
            self.xs.pop_front();
            self.fs.pop_front();
        }
        let m = self.xs.len() - 1;
        if m == 0 {
            return damped;
        }
        let len = x.len();
        let diff = |h: &VecDeque<Vec<f64>>, j: usize| {
            DVector::from_iterator(len, (0..len).map(|k| h[j + 1][k] - h[j][k]))
        };
        let df = DMatrix::from_columns(&(0..m).map(|j| diff(&self.fs, j)).collect::<Vec<_>>());
        let dx = DMatrix::from_columns(&(0..m).map(|j| diff(&self.xs, j)).collect::<Vec<_>>());
        let rhs = DVector::from_column_slice(f);
        let gamma = match df.clone().svd(true, true).solve(&rhs, 1e-12) {
            Ok(g) if g.iter().all(|x| x.is_finite()) => g,
            _ => return damped,
        };
        let correction = (dx + df * beta) * gamma;
        damped
            .iter()
            .zip(correction.iter())
            .map(|(a, c)| a - c)
            .collect()
    }
}

pub fn solve(
    sys: &ReducedSystem,
    windows: &[ConeWindow; 2],
    spec: &ThresholdSpec,
    cfg: &SolveConfig,
) -> Result<SolveResult, SolveError> {
    solve_with_monitor(sys, windows, spec, cfg, |_, _, _| {})
}

/// As [`solve`], calling `monitor(k, u, v)` on every iterate after the initial guess.
pub fn solve_with_monitor(
    sys: &ReducedSystem,
    windows: &[ConeWindow; 2],
    spec: &ThresholdSpec,
    cfg: &SolveConfig,
    mut monitor: impl FnMut(usize, &GridFunction, &GridFunction),
) -> Result<SolveResult, SolveError> {
    cfg.validate()?;
    let (mut u, mut v) = initial_pair(windows, spec, cfg)?;
    let limit = DIVERGENCE_FACTOR * sup_values(&u).max(sup_values(&v)).max(1.0);
    let mut anderson = Anderson::new(cfg.anderson_depth);
    let mut trace = Vec::new();
    let mut last_good: Option<(GridFunction, GridFunction, f64)> = None;
    let mut status = SolveStatus::MaxIterations;
    let mut residual;
    let mut k = 0;

    loop {
        let (tu, tv) = match sys.apply_t(&u, &v) {
            Ok(pair) => pair,
            Err(e) if k > 0 && is_blowup(&e) => {
                let (pu, pv, pr) = last_good.take().expect("previous iterate was mapped");
                u = pu;
                v = pv;
                residual = pr;
                k -= 1;
                status = SolveStatus::Diverged;
                break;
            }
            Err(e) => return Err(e.into()),
        };
        residual = tu.sup_distance(&u).max(tv.sup_distance(&v));
        trace.push(IterationRecord {
            iteration: k,
            residual,
            sup_u: sup_values(&u),
            sup_v: sup_values(&v),
        });
        if residual <= cfg.tolerance {
            status = SolveStatus::Converged;
            break;
        }
        if k == cfg.max_iterations {
            break;
        }
        let x = State::from_pair(&u, &v);
        let tx = State::from_pair(&tu, &tv);
        let f: Vec<f64> = tx.data.iter().zip(&x.data).map(|(a, b)| a - b).collect();
        let mut next = State {
            data: anderson.step(&x.data, &f, cfg.damping),
            nodes: x.nodes,
        };
        next.clamp_values();
        let grown = next.data.iter().any(|z| !z.is_finite() || z.abs() > limit);
        if grown {
            status = SolveStatus::Diverged;
            break;
        }
        let (nu, nv) = next.to_pair()?;
        last_good = Some((
            std::mem::replace(&mut u, nu),
            std::mem::replace(&mut v, nv),
            residual,
        ));
        k += 1;
        monitor(k, &u, &v);
    }

    let ode_residual = ode_residual(sys, &u, &v)?;
    let radial = verify_radial(sys, &u, &v, cfg.radial_samples)?;
    let localization = localize(&u, &v, windows, spec);
    Ok(SolveResult {
        u,
        v,
        status,
        iterations: k,
        fixed_point_residual: residual,
        ode_residual,
        radial,
        localization,
        trace,
        tolerance: cfg.tolerance,
    })
}

/// `max |-(w_{k+1} - 2 w_k + w_{k-1}) / h^2 - g_k|` over interior nodes.
pub fn ode_residual(
    sys: &ReducedSystem,
    u: &GridFunction,
    v: &GridFunction,
) -> Result<[f64; 2], OperatorError> {
    let h = u.step();
    let mut out = [0.0; 2];
    for (kind, w) in KernelKind::BOTH.into_iter().zip([u, v]) {
        let g = sys.g_along(kind, u, v)?;
        let y = w.values();
        out[kind.index() - 1] = (1..y.len() - 1)
            .map(|k| (-(y[k + 1] - 2.0 * y[k] + y[k - 1]) / (h * h) - g[k]).abs())
            .fold(0.0, f64::max);
    }
    Ok(out)
}

/// Radial residual `-w_rr - (n-1)/r w_r - f(r, u, v, |u_r|, |v_r|)` by centered
/// differences in `r` of the interpolated grid solution, at `samples` equally
/// spaced interior radii, plus the four boundary conditions.
pub fn verify_radial(
    sys: &ReducedSystem,
    u: &GridFunction,
    v: &GridFunction,
    samples: usize,
) -> Result<RadialReport, SolveError> {
    let d = sys.domain();
    let (r0, r1) = (d.inner_radius(), d.outer_radius());
    let spacing = (r1 - r0) / (samples + 1) as f64;
    let step = ((r1 - r0) / u.panels() as f64).min(0.5 * spacing);
    let dim = d.dimension() as f64;
    let at = |w: &GridFunction, r: f64| {
        let t = d
            .inverse_radial_map(r.clamp(r0, r1))
            .expect("radius inside the annulus");
        w.interpolate(t)
    };
    let radii: Vec<f64> = (1..=samples).map(|j| r0 + j as f64 * spacing).collect();
    let mut residual = [0.0f64; 2];
    for &r in &radii {
        let mut w = [0.0; 2];
        let mut wr = [0.0; 2];
        let mut wrr = [0.0; 2];
        for (i, g) in [u, v].into_iter().enumerate() {
            let (lo, mid, hi) = (at(g, r - step), at(g, r), at(g, r + step));
            w[i] = mid;
            wr[i] = (hi - lo) / (2.0 * step);
            wrr[i] = (hi - 2.0 * mid + lo) / (step * step);
        }
        let point = Point::new(r, w[0], w[1], wr[0].abs(), wr[1].abs());
        for kind in KernelKind::BOTH {
            let i = kind.index() - 1;
            let f = sys
                .nonlinearity(kind)
                .eval(&point)
                .map_err(|source| SolveError::Radial {
                    r,
                    source: OperatorError::Eval {
                        component: kind.index(),
                        t: d.inverse_radial_map(r).unwrap_or(f64::NAN),
                        source,
                    },
                })?;
            let res = (-wrr[i] - (dim - 1.0) / r * wr[i] - f).abs();
            residual[i] = residual[i].max(res);
        }
    }
    let n = u.panels();
    let scale = 1.0 + sup_values(u).max(sup_values(v));
    let boundary = BoundaryReport {
        u_inner: u.values()[0],
        u_outer: u.values()[n],
        v_inner: v.values()[0],
        dv_outer: v.derivs()[n] / d.radius_slope_at(1.0),
        tolerance: 1e-8 * scale,
    };
    Ok(RadialReport {
        residual,
        radii,
        step,
        boundary,
    })
}

/// Place `(u, v)` relative to `K_rho` and `V_s`.
pub fn localize(
    u: &GridFunction,
    v: &GridFunction,
    windows: &[ConeWindow; 2],
    spec: &ThresholdSpec,
) -> LocalizationReport {
    let full = [
        norms(u, KernelKind::Dirichlet).full(),
        norms(v, KernelKind::Mixed).full(),
    ];
    let mins = [window_min(u, &windows[0]), window_min(v, &windows[1])];
    let in_k = (0..2).all(|i| full[i] < spec.rho[i]);
    let in_closure_k = (0..2).all(|i| full[i] <= spec.rho[i]);
    let in_v = (0..2).all(|i| mins[i] < spec.s[i]);
    let region = if in_k {
        Localization::InsideK
    } else if !in_v {
        Localization::OutsideV
    } else if !in_closure_k {
        Localization::Target
    } else {
        Localization::Mixed
    };
    LocalizationReport {
        norms: full,
        window_min: mins,
        region,
    }
}
