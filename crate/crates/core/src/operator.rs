//! The reduced system on `[0, 1]` and its Hammerstein operator
//!
//! ```text
//! T_i(u, v)(t) = int_0^1 k_i(t, s) g_i(s, u(s), v(s), |u'(s)|, |v'(s)|) ds
//! ```
//!
//! with `g_i(t, w1, w2, z1, z2) = p(t) f_i(r(t), w1, w2, z1 / r'(t), z2 / r'(t))`.
//! Fixed points of `T` are the radial solutions with `u(0) = u(1) = 0`,
//! `v(0) = v'(1) = 0`.

use crate::expr::{EvalError, Expr, Point};
use crate::geometry::AnnulusDomain;
use crate::kernels::{self, harnack_c, ConeWindow, KernelKind};
use crate::quadrature::{integrate_samples, simpson_panel};
use rayon::prelude::*;
use thiserror::Error;

/// Default number of panels for discretizing `[0, 1]`.
pub const DEFAULT_PANELS: usize = 512;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("grid needs an even panel count with at least 5 nodes, got {0} panels")]
    Grid(usize),
    #[error("grid value arrays have mismatched lengths ({values} values, {derivs} derivatives)")]
    Length { values: usize, derivs: usize },
    #[error("non-finite grid value at node {0}")]
    NonFiniteValue(usize),
    #[error("grids of different size ({0} vs {1} panels)")]
    GridMismatch(usize, usize),
    #[error("negative input value {value} at node {node}")]
    Negative { node: usize, value: f64 },
    #[error("evaluating f{component} at t={t}: {source}")]
    Eval {
        component: usize,
        t: f64,
        source: EvalError,
    },
    #[error("non-finite integrand for T{component} at node {node}")]
    Quadrature { component: usize, node: usize },
}

/// Samples of a function and its derivative on the uniform nodes `k / N`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    values: Vec<f64>,
    derivs: Vec<f64>,
}

impl GridFunction {
    /// Values with derivatives supplied (e.g. from the kernel derivatives).
    pub fn with_derivative(values: Vec<f64>, derivs: Vec<f64>) -> Result<Self, OperatorError> {
        if values.len() != derivs.len() {
            return Err(OperatorError::Length {
                values: values.len(),
                derivs: derivs.len(),
            });
        }
        check_panels(values.len().saturating_sub(1))?;
        if let Some(k) = values.iter().chain(&derivs).position(|v| !v.is_finite()) {
            return Err(OperatorError::NonFiniteValue(k % values.len()));
        }
        Ok(Self { values, derivs })
    }

    /// Values only; derivatives by centered differences, second-order one-sided
    /// at the two ends.
    pub fn from_values(values: Vec<f64>) -> Result<Self, OperatorError> {
        let panels = values.len().saturating_sub(1);
        check_panels(panels)?;
        let h = 1.0 / panels as f64;
        let n = panels;
        let mut derivs = vec![0.0; n + 1];
        derivs[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h);
        derivs[n] = (3.0 * values[n] - 4.0 * values[n - 1] + values[n - 2]) / (2.0 * h);
        for k in 1..n {
            derivs[k] = (values[k + 1] - values[k - 1]) / (2.0 * h);
        }
        Self::with_derivative(values, derivs)
    }

    /// Sample `w` and `w'` at the nodes.
    pub fn sample(
        panels: usize,
        w: impl Fn(f64) -> f64,
        dw: impl Fn(f64) -> f64,
    ) -> Result<Self, OperatorError> {
        check_panels(panels)?;
        let nodes: Vec<f64> = (0..=panels).map(|k| node(k, panels)).collect();
        Self::with_derivative(
            nodes.iter().map(|&t| w(t)).collect(),
            nodes.iter().map(|&t| dw(t)).collect(),
        )
    }

    pub fn zeros(panels: usize) -> Result<Self, OperatorError> {
        Self::sample(panels, |_| 0.0, |_| 0.0)
    }

    pub fn panels(&self) -> usize {
        self.values.len() - 1
    }

    pub fn step(&self) -> f64 {
        1.0 / self.panels() as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        node(k, self.panels())
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(|k| self.node(k))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn derivs(&self) -> &[f64] {
        &self.derivs
    }

    /// Largest absolute difference of nodal values.
    pub fn sup_distance(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Value at an arbitrary `t` by cubic Hermite interpolation of values and derivatives.
    pub fn interpolate(&self, t: f64) -> f64 {
        let n = self.panels();
        let h = self.step();
        let t = t.clamp(0.0, 1.0);
        let k = ((t / h).floor() as usize).min(n - 1);
        let x = (t - self.node(k)) / h;
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let (d0, d1) = (self.derivs[k] * h, self.derivs[k + 1] * h);
        let x2 = x * x;
        let x3 = x2 * x;
        (2.0 * x3 - 3.0 * x2 + 1.0) * y0
            + (x3 - 2.0 * x2 + x) * d0
            + (-2.0 * x3 + 3.0 * x2) * y1
            + (x3 - x2) * d1
    }
}

fn node(k: usize, panels: usize) -> f64 {
    k as f64 / panels as f64
}

fn check_panels(panels: usize) -> Result<(), OperatorError> {
    if panels < 4 || !panels.is_multiple_of(2) {
        Err(OperatorError::Grid(panels))
    } else {
        Ok(())
    }
}

/// The ODE system on `[0, 1]` obtained from an annulus problem.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    domain: AnnulusDomain,
    f: [Expr; 2],
}

impl ReducedSystem {
    pub fn new(domain: AnnulusDomain, f1: Expr, f2: Expr) -> Self {
        Self {
            domain,
            f: [f1, f2],
        }
    }

    pub fn domain(&self) -> &AnnulusDomain {
        &self.domain
    }

    pub fn nonlinearity(&self, kind: KernelKind) -> &Expr {
        &self.f[kind.index() - 1]
    }

    /// `g_i(t, w1, w2, z1, z2)`; `w` and `z` are `(u, v)` and `(|u'|, |v'|)` in `t`.
    pub fn compose_g(
        &self,
        kind: KernelKind,
        t: f64,
        w: [f64; 2],
        z: [f64; 2],
    ) -> Result<f64, OperatorError> {
        let t_checked = t.clamp(0.0, 1.0);
        let slope = self.domain.radius_slope_at(t_checked);
        let point = Point::new(
            self.domain.radius_at(t_checked),
            w[0],
            w[1],
            z[0].abs() / slope,
            z[1].abs() / slope,
        );
        let f = self
            .nonlinearity(kind)
            .eval(&point)
            .map_err(|source| OperatorError::Eval {
                component: kind.index(),
                t,
                source,
            })?;
        Ok(self.domain.weight_at(t_checked) * f)
    }

    /// `g_i` at every node along the pair `(u, v)`.
    pub fn g_along(
        &self,
        kind: KernelKind,
        u: &GridFunction,
        v: &GridFunction,
    ) -> Result<Vec<f64>, OperatorError> {
        (0..u.values.len())
            .into_par_iter()
            .map(|k| {
                self.compose_g(
                    kind,
                    u.node(k),
                    [u.values[k], v.values[k]],
                    [u.derivs[k], v.derivs[k]],
                )
            })
            .collect()
    }

    /// `T(u, v)`, with derivatives from the differentiated kernels.
    pub fn apply_t(
        &self,
        u: &GridFunction,
        v: &GridFunction,
    ) -> Result<(GridFunction, GridFunction), OperatorError> {
        if u.panels() != v.panels() {
            return Err(OperatorError::GridMismatch(u.panels(), v.panels()));
        }
        for w in [u, v] {
            if let Some((node, &value)) = w.values.iter().enumerate().find(|(_, &x)| x < 0.0) {
                return Err(OperatorError::Negative { node, value });
            }
        }
        let g1 = self.g_along(KernelKind::Dirichlet, u, v)?;
        let g2 = self.g_along(KernelKind::Mixed, u, v)?;
        Ok((
            integrate_kernel(KernelKind::Dirichlet, &g1)?,
            integrate_kernel(KernelKind::Mixed, &g2)?,
        ))
    }
}

/// `int_0^1 k(t_j, s) g(s) ds` and its `t`-derivative at every node, given `g` at the nodes.
pub fn integrate_kernel(kind: KernelKind, g: &[f64]) -> Result<GridFunction, OperatorError> {
    let panels = g.len().saturating_sub(1);
    check_panels(panels)?;
    if let Some(node) = g.iter().position(|x| !x.is_finite()) {
        return Err(OperatorError::Quadrature {
            component: kind.index(),
            node,
        });
    }
    let (values, derivs): (Vec<f64>, Vec<f64>) = (0..=panels)
        .into_par_iter()
        .map(|j| {
            let t = node(j, panels);
            let value = split_integral(
                g,
                j,
                |s| kernels::kernel(kind, t, s),
                |s| kernels::kernel(kind, t, s),
            );
            let deriv = split_integral(
                g,
                j,
                |s| kernels::slope_left(kind, s),
                |s| kernels::slope_right(kind, s),
            );
            (value, deriv)
        })
        .unzip();
    GridFunction::with_derivative(values, derivs)
}

/// `int_0^{t_j} left(s) g(s) ds + int_{t_j}^1 right(s) g(s) ds` by composite
/// Simpson on each side of the node `t_j`.
///
/// A side with a single panel uses Simpson's rule with `g` at the panel midpoint
/// taken from the quadratic through the three nearest nodes of that side
/// and its neighbour.
fn split_integral(
    g: &[f64],
    j: usize,
    left: impl Fn(f64) -> f64,
    right: impl Fn(f64) -> f64,
) -> f64 {
    let n = g.len() - 1;
    let h = 1.0 / n as f64;
    let mut buf = Vec::with_capacity(n + 1);

    let lhs = match j {
        0 => 0.0,
        1 => {
            let mid = (3.0 * g[0] + 6.0 * g[1] - g[2]) / 8.0;
            simpson_panel(left(0.0) * g[0], left(0.5 * h) * mid, left(h) * g[1], h)
        }
        _ => {
            buf.extend((0..=j).map(|k| left(node(k, n)) * g[k]));
            integrate_samples(&buf, h)
        }
    };

    let rhs = match n - j {
        0 => 0.0,
        1 => {
            let mid = (3.0 * g[n] + 6.0 * g[n - 1] - g[n - 2]) / 8.0;
            let (a, b) = (node(n - 1, n), 1.0);
            simpson_panel(
                right(a) * g[n - 1],
                right(a + 0.5 * h) * mid,
                right(b) * g[n],
                h,
            )
        }
        _ => {
            buf.clear();
            buf.extend((j..=n).map(|k| right(node(k, n)) * g[k]));
            integrate_samples(&buf, h)
        }
    };
    lhs + rhs
}

/// Weight of the derivative seminorm: `t(1-t)` for Dirichlet, `t` for mixed.
pub fn omega(kind: KernelKind, t: f64) -> f64 {
    match kind {
        KernelKind::Dirichlet => t * (1.0 - t),
        KernelKind::Mixed => t,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    /// `max |w|` over the nodes.
    pub sup: f64,
    /// `sup omega(t) |w'(t)|` over the interior nodes.
    pub weighted_deriv: f64,
}

impl Norms {
    /// `max(sup, weighted_deriv)`, the norm of the weighted space.
    pub fn full(&self) -> f64 {
        self.sup.max(self.weighted_deriv)
    }
}

pub fn norms(w: &GridFunction, kind: KernelKind) -> Norms {
    let sup = w.values.iter().fold(0.0, |m: f64, x| m.max(x.abs()));
    let n = w.panels();
    let weighted_deriv = (1..n)
        .map(|k| omega(kind, w.node(k)) * w.derivs[k].abs())
        .fold(0.0, f64::max);
    Norms {
        sup,
        weighted_deriv,
    }
}

/// Minimum of `w` over `[a, b]`: nodes inside the window plus interpolated endpoints.
pub fn window_min(w: &GridFunction, window: &ConeWindow) -> f64 {
    let inside = w
        .nodes()
        .zip(&w.values)
        .filter(|(t, _)| window.contains(*t))
        .map(|(_, &x)| x);
    inside
        .chain([w.interpolate(window.a()), w.interpolate(window.b())])
        .fold(f64::INFINITY, f64::min)
}

/// Outcome of testing a grid function against the cone `K_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeMembershipReport {
    pub sup_norm: f64,
    pub weighted_deriv_norm: f64,
    pub window_min: f64,
    pub harnack_c: f64,
    pub tolerance: f64,
    pub is_nonneg: bool,
    pub harnack_ok: bool,
    pub derivative_ok: bool,
}

impl ConeMembershipReport {
    pub fn is_member(&self) -> bool {
        self.is_nonneg && self.harnack_ok && self.derivative_ok
    }
}

/// Test `w >= 0`, `min_[a,b] w >= c ||w||_inf` and `||w'||_omega <= ||w||_inf`,
/// each up to `1e-10 (1 + ||w||_inf)`.
pub fn cone_check(w: &GridFunction, window: &ConeWindow) -> ConeMembershipReport {
    let kind = window.kind();
    let Norms {
        sup,
        weighted_deriv,
    } = norms(w, kind);
    let tol = 1e-10 * (1.0 + sup);
    let c = harnack_c(window);
    let wmin = window_min(w, window);
    ConeMembershipReport {
        sup_norm: sup,
        weighted_deriv_norm: weighted_deriv,
        window_min: wmin,
        harnack_c: c,
        tolerance: tol,
        is_nonneg: w.values.iter().all(|&x| x >= -tol),
        harnack_ok: wmin >= c * sup - tol,
        derivative_ok: weighted_deriv <= sup + tol,
    }
}
