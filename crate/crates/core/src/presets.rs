//! Built-in problems: the worked example on `1 < |x| < e` in three dimensions
//! and forcings that make the reduced right-hand side identically one.

use crate::geometry::{AnnulusDomain, Extremum};
use crate::hypothesis::{Setting, ThresholdSpec};
use crate::kernels::{ConeWindow, KernelKind};
use crate::operator::ReducedSystem;
use crate::scan::{scan_extremum, ScanConfig, ScanError};
use crate::Expr;
use std::f64::consts::E;

pub const EXAMPLE_F1: &str = "exp(-r^2)/6 * (2 - sin(gu^2 + gv^2)) * u^5";
/// Coefficient `2/pi`: the value at which the printed lower bound 30.8989 is the actual infimum.
pub const EXAMPLE_F2: &str = "2/pi * exp(-r^2) * atan(1 + gu^2 + gv^2) * v^5";

pub fn example_domain() -> AnnulusDomain {
    AnnulusDomain::new(3, 1.0, E).expect("valid annulus")
}

pub fn example_windows() -> [ConeWindow; 2] {
    [
        ConeWindow::new(KernelKind::Dirichlet, 0.25, 0.75).expect("valid window"),
        ConeWindow::new(KernelKind::Mixed, 0.5, 1.0).expect("valid window"),
    ]
}

pub fn example_spec() -> ThresholdSpec {
    ThresholdSpec::new([0.1, 0.1], [10.0, 10.0])
}

pub fn example_system() -> ReducedSystem {
    ReducedSystem::new(
        example_domain(),
        Expr::parse(EXAMPLE_F1).expect("preset parses"),
        Expr::parse(EXAMPLE_F2).expect("preset parses"),
    )
}

/// `1 / p` written as a function of `r`, so that `p(t) f(r(t)) = 1`.
///
/// `r'(t) = D r^{n-1} / (k (R0 R1)^k)` with `k = n - 2`, `D = R1^k - R0^k` for
/// `n >= 3`, and `r'(t) = r ln(R1/R0)` in the plane.
pub fn unit_forcing_source(domain: &AnnulusDomain) -> String {
    let (r0, r1) = (domain.inner_radius(), domain.outer_radius());
    match domain.dimension() {
        2 => {
            let l = (r1 / r0).ln();
            format!("1 / ({:e} * r^2)", l * l)
        }
        n => {
            let k = (n - 2) as i32;
            let coef = k as f64 * (r0 * r1).powi(k) / (r1.powi(k) - r0.powi(k));
            format!("{:e} / r^{}", coef * coef, 2 * (n - 1))
        }
    }
}

pub fn unit_forcing(domain: &AnnulusDomain) -> Expr {
    Expr::parse(&unit_forcing_source(domain)).expect("generated expression parses")
}

/// One printed number of the worked example next to its recomputation.
#[derive(Debug, Clone, PartialEq)]
pub struct PrintedValue {
    pub key: &'static str,
    pub description: &'static str,
    pub printed: f64,
    pub recomputed: f64,
}

impl PrintedValue {
    pub fn relative_error(&self) -> f64 {
        ((self.recomputed - self.printed) / self.printed).abs()
    }
}

/// Relative agreement demanded of each reproduced value.
pub const REPRODUCTION_TOLERANCE: f64 = 1e-3;

/// Recompute the four thresholds and the two infima of the worked example.
pub fn reproduce_example(scan: &ScanConfig) -> Result<Vec<PrintedValue>, ScanError> {
    let sys = example_system();
    let setting = Setting::new(&sys, example_windows());
    let spec = example_spec();
    let inf_over = |kind: KernelKind| -> Result<f64, ScanError> {
        let region = setting.a_box(kind, spec.s, spec.zmax);
        Ok(scan_extremum(sys.nonlinearity(kind), &region, Extremum::Inf, scan)?.value)
    };
    Ok(vec![
        PrintedValue {
            key: "threshold_sup_f1",
            description: "m1 rho1 / sup p",
            printed: 0.0366701,
            recomputed: setting.upper_threshold(KernelKind::Dirichlet, spec.rho[0]),
        },
        PrintedValue {
            key: "threshold_sup_f2",
            description: "m2 rho2 / sup p",
            printed: 0.00916753,
            recomputed: setting.upper_threshold(KernelKind::Mixed, spec.rho[1]),
        },
        PrintedValue {
            key: "threshold_inf_f1",
            description: "M1 s1 / inf p on [a1, b1]",
            printed: 201.236,
            recomputed: setting.lower_threshold(KernelKind::Dirichlet, spec.s[0]),
        },
        PrintedValue {
            key: "threshold_inf_f2",
            description: "M2 s2 / inf p on [a2, b2]",
            printed: 21.9044,
            recomputed: setting.lower_threshold(KernelKind::Mixed, spec.s[1]),
        },
        PrintedValue {
            key: "inf_f1_a1",
            description: "inf f1 over A1(s1, s2)",
            printed: 448.356,
            recomputed: inf_over(KernelKind::Dirichlet)?,
        },
        PrintedValue {
            key: "inf_f2_a2",
            description: "inf f2 over A2(s1, s2)",
            printed: 30.8989,
            recomputed: inf_over(KernelKind::Mixed)?,
        },
    ])
}
