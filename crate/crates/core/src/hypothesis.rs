//! Numerical screening of the existence, multiplicity and non-existence conditions.
//!
//! Each condition compares a sup or inf of `f_i` over a box against a
//! threshold built from the kernel constants and the extremes of the weight
//! `p`:
//!
//! * upper threshold `m_i * level_i / sup_[0,1] p` (the nonlinearity must stay below it on `Omega`);
//! * lower threshold `M_i * level_i / inf_[a_i,b_i] p` (the nonlinearity must exceed it on `A_i`).
//!
//! Gradient axes are truncated at `zmax`; every report says so.

use crate::expr::{Expr, Point, Var};
use crate::format::sig9;
use crate::geometry::Extremum;
use crate::kernels::{ConeWindow, KernelConstants, KernelKind};
use crate::operator::ReducedSystem;
use crate::scan::{scan_extremum, BoxSpec, Interval, ScanConfig, ScanError};
use std::fmt;
use thiserror::Error;

/// Lower end of the state range scanned by the non-existence check, relative to `wmax`.
pub const STATE_FLOOR: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CheckError {
    #[error("incompatible thresholds for component {component}: need rho < c*s, got rho={rho}, c*s={cs}")]
    Compatibility { component: usize, rho: f64, cs: f64 },
    #[error("multiplicity ordering violated for component {component}: need rho/c < s < theta, got rho/c={rho_over_c}, s={s}, theta={theta}")]
    Ordering {
        component: usize,
        rho_over_c: f64,
        s: f64,
        theta: f64,
    },
    #[error("multiplicity check needs theta1 and theta2")]
    MissingTheta,
    #[error("threshold {name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("scanning {condition}: {source}")]
    Scan {
        condition: String,
        source: ScanError,
    },
}

/// Levels `rho`, `s`, optional `theta`, and scan truncations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSpec {
    pub rho: [f64; 2],
    pub s: [f64; 2],
    pub theta: Option<[f64; 2]>,
    /// Truncation of the gradient axes `gu`, `gv`.
    pub zmax: f64,
    /// Truncation of the state axes in the non-existence scan.
    pub wmax: f64,
}

impl ThresholdSpec {
    pub const DEFAULT_ZMAX: f64 = 1e3;
    pub const DEFAULT_WMAX: f64 = 1e3;

    pub fn new(rho: [f64; 2], s: [f64; 2]) -> Self {
        Self {
            rho,
            s,
            theta: None,
            zmax: Self::DEFAULT_ZMAX,
            wmax: Self::DEFAULT_WMAX,
        }
    }

    fn validate_positive(&self) -> Result<(), CheckError> {
        let mut all = vec![
            ("rho1", self.rho[0]),
            ("rho2", self.rho[1]),
            ("s1", self.s[0]),
            ("s2", self.s[1]),
            ("zmax", self.zmax),
            ("wmax", self.wmax),
        ];
        if let Some(th) = self.theta {
            all.extend([("theta1", th[0]), ("theta2", th[1])]);
        }
        match all.into_iter().find(|(_, v)| !(v.is_finite() && *v > 0.0)) {
            Some((name, value)) => Err(CheckError::NonPositive { name, value }),
            None => Ok(()),
        }
    }
}

/// A system together with its localization windows.
#[derive(Debug, Clone)]
pub struct Setting<'a> {
    pub system: &'a ReducedSystem,
    pub windows: [ConeWindow; 2],
}

impl<'a> Setting<'a> {
    pub fn new(system: &'a ReducedSystem, windows: [ConeWindow; 2]) -> Self {
        Self { system, windows }
    }

    pub fn constants(&self) -> KernelConstants {
        KernelConstants::new(&self.windows)
    }

    pub fn sup_p(&self) -> f64 {
        self.system
            .domain()
            .extremize_p(0.0, 1.0, Extremum::Sup)
            .expect("unit interval")
    }

    pub fn inf_p(&self, kind: KernelKind) -> f64 {
        let w = &self.windows[kind.index() - 1];
        self.system
            .domain()
            .extremize_p(w.a(), w.b(), Extremum::Inf)
            .expect("window inside [0, 1]")
    }

    /// `m_i * level / sup_[0,1] p`.
    pub fn upper_threshold(&self, kind: KernelKind, level: f64) -> f64 {
        self.constants().m[kind.index() - 1] * level / self.sup_p()
    }

    /// `M_i * level / inf_[a_i,b_i] p`.
    pub fn lower_threshold(&self, kind: KernelKind, level: f64) -> f64 {
        self.constants().big_m[kind.index() - 1] * level / self.inf_p(kind)
    }

    /// `[R0, R1] x [0, l1] x [0, l2] x [0, zmax]^2`.
    pub fn omega_box(&self, levels: [f64; 2], zmax: f64) -> BoxSpec {
        let d = self.system.domain();
        let z = Interval::new(0.0, zmax);
        BoxSpec::new(
            Interval::new(d.inner_radius(), d.outer_radius()),
            Interval::new(0.0, levels[0]),
            Interval::new(0.0, levels[1]),
            z,
            z,
        )
    }

    /// `A_i` box: radii of the window, own state in `[l_i, l_i/c_i]`, other
    /// state in `[0, l_j/c_j]`, gradients in `[0, zmax]`.
    ///
    /// For `A_2` the `u` range is `[0, l1/c1]`, matching the sets on which the
    /// compression argument is carried out.
    pub fn a_box(&self, kind: KernelKind, levels: [f64; 2], zmax: f64) -> BoxSpec {
        let d = self.system.domain();
        let c = self.constants().c;
        let w = &self.windows[kind.index() - 1];
        let ra = d.radius_at(w.a());
        let rb = d.radius_at(w.b());
        let r = Interval::new(ra.min(rb), ra.max(rb));
        let z = Interval::new(0.0, zmax);
        let u_full = Interval::new(0.0, levels[0] / c[0]);
        let v_full = Interval::new(0.0, levels[1] / c[1]);
        match kind {
            KernelKind::Dirichlet => {
                BoxSpec::new(r, Interval::new(levels[0], levels[0] / c[0]), v_full, z, z)
            }
            KernelKind::Mixed => {
                BoxSpec::new(r, u_full, Interval::new(levels[1], levels[1] / c[1]), z, z)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Theorem {
    Existence,
    Multiplicity,
    Nonexistence,
}

impl Theorem {
    pub fn key(self) -> &'static str {
        match self {
            Theorem::Existence => "existence",
            Theorem::Multiplicity => "multiplicity",
            Theorem::Nonexistence => "nonexistence",
        }
    }
}

/// How far the gradient truncation can be trusted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientCaveat {
    /// Neither nonlinearity reads `gu` or `gv`; truncation is irrelevant.
    Independent,
    /// Probes beyond `zmax` never beat the scanned extrema.
    SampledBounded,
    /// Some probe beyond `zmax` beat a scanned extremum; the verdict only covers the truncated box.
    Truncated,
}

impl GradientCaveat {
    fn describe(self, zmax: f64) -> String {
        match self {
            GradientCaveat::Independent => "nonlinearities do not depend on gu, gv; gradient truncation is exact".into(),
            GradientCaveat::SampledBounded => format!(
                "gradient axes scanned on [0, {}]; probes up to 1000*zmax did not exceed the scanned extrema",
                sig9(zmax)
            ),
            GradientCaveat::Truncated => format!(
                "gradient axes truncated at {}; values beyond the truncation exceed the scanned extrema, so the verdict covers the truncated box only",
                sig9(zmax)
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    /// Short machine key such as `f1.sup_omega_rho`.
    pub key: String,
    pub description: String,
    pub component: usize,
    pub mode: Extremum,
    pub region: BoxSpec,
    pub extremum: f64,
    pub argpoint: Point,
    pub threshold: f64,
    /// Positive when the condition holds: `threshold - sup` or `inf - threshold`.
    pub margin: f64,
    pub tolerance: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Satisfied,
    NotSatisfied,
    /// One of the two non-existence conditions (1 or 2) holds on the scanned region.
    OnlyZeroSolution(u8),
    Inconclusive,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::Satisfied => "SATISFIED",
            Verdict::NotSatisfied => "NOT_SATISFIED",
            Verdict::OnlyZeroSolution(_) => "ONLY_ZERO_SOLUTION",
            Verdict::Inconclusive => "INCONCLUSIVE",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub theorem: Theorem,
    pub conditions: Vec<Condition>,
    pub verdict: Verdict,
    pub gradient: GradientCaveat,
    pub caveats: Vec<String>,
}

impl HypothesisReport {
    /// 0 satisfied, 1 not satisfied, 2 inconclusive or dominated by the truncation caveat.
    pub fn exit_code(&self) -> i32 {
        match self.verdict {
            Verdict::Satisfied | Verdict::OnlyZeroSolution(_)
                if self.gradient == GradientCaveat::Truncated =>
            {
                2
            }
            Verdict::Satisfied | Verdict::OnlyZeroSolution(_) => 0,
            Verdict::NotSatisfied => 1,
            Verdict::Inconclusive => 2,
        }
    }

    pub fn condition(&self, key: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.key == key)
    }

    /// `key=value` lines for scripting.
    pub fn to_key_values(&self) -> String {
        let t = self.theorem.key();
        let mut out = format!("{t}.verdict={}\n", self.verdict.label());
        if let Verdict::OnlyZeroSolution(which) = self.verdict {
            out += &format!("{t}.condition_holding=cond{which}\n");
        }
        out += &format!("{t}.exit_code={}\n", self.exit_code());
        out += &format!("{t}.gradient_caveat={:?}\n", self.gradient);
        for c in &self.conditions {
            let p = format!("{t}.{}", c.key);
            out += &format!("{p}.extremum={}\n", sig9(c.extremum));
            out += &format!("{p}.threshold={}\n", sig9(c.threshold));
            out += &format!("{p}.margin={}\n", sig9(c.margin));
            out += &format!("{p}.satisfied={}\n", c.satisfied);
        }
        out
    }
}

impl fmt::Display for HypothesisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} check: {}", self.theorem.key(), self.verdict.label())?;
        for c in &self.conditions {
            let op = match c.mode {
                Extremum::Sup => "<",
                Extremum::Inf => ">",
            };
            writeln!(
                f,
                "  [{}] {}: {} {} {}  (margin {})",
                if c.satisfied { "ok" } else { "FAIL" },
                c.description,
                sig9(c.extremum),
                op,
                sig9(c.threshold),
                sig9(c.margin)
            )?;
            writeln!(f, "        region: {}", c.region)?;
            writeln!(f, "        attained near {}", c.argpoint)?;
        }
        for note in &self.caveats {
            writeln!(f, "  note: {note}")?;
        }
        Ok(())
    }
}

fn tolerance(threshold: f64) -> f64 {
    1e-9 * threshold.abs().max(1.0)
}

struct ConditionSpec<'e> {
    key: String,
    description: String,
    kind: KernelKind,
    expr: &'e Expr,
    mode: Extremum,
    region: BoxSpec,
    threshold: f64,
}

fn evaluate(spec: ConditionSpec<'_>, scan: &ScanConfig) -> Result<Condition, CheckError> {
    let res = scan_extremum(spec.expr, &spec.region, spec.mode, scan).map_err(|source| {
        CheckError::Scan {
            condition: spec.description.clone(),
            source,
        }
    })?;
    let margin = match spec.mode {
        Extremum::Sup => spec.threshold - res.value,
        Extremum::Inf => res.value - spec.threshold,
    };
    let tol = tolerance(spec.threshold);
    Ok(Condition {
        key: spec.key,
        description: spec.description,
        component: spec.kind.index(),
        mode: spec.mode,
        region: spec.region,
        extremum: res.value,
        argpoint: res.argpoint,
        threshold: spec.threshold,
        margin,
        tolerance: tol,
        satisfied: margin > tol,
    })
}

/// Probe each scanned extremum with the gradient coordinates pushed past `zmax`.
fn gradient_caveat(conditions: &[Condition], exprs: &[&Expr], zmax: f64) -> GradientCaveat {
    let reads_gradient = |e: &Expr| e.depends_on(Var::Gu) || e.depends_on(Var::Gv);
    if !exprs.iter().any(|e| reads_gradient(e)) {
        return GradientCaveat::Independent;
    }
    let factors = [1.0, 10.0, 100.0, 1000.0];
    for (c, e) in conditions.iter().zip(exprs) {
        if !reads_gradient(e) {
            continue;
        }
        for &a in &factors {
            for &b in &factors {
                if a == 1.0 && b == 1.0 {
                    continue;
                }
                let mut p = c.argpoint;
                p.gu = a * zmax;
                p.gv = b * zmax;
                let beaten = match e.eval(&p) {
                    Ok(v) => match c.mode {
                        Extremum::Sup => v > c.extremum + c.tolerance,
                        Extremum::Inf => v < c.extremum - c.tolerance,
                    },
                    Err(_) => true,
                };
                if beaten {
                    return GradientCaveat::Truncated;
                }
            }
        }
    }
    GradientCaveat::SampledBounded
}

fn finish(
    theorem: Theorem,
    conditions: Vec<Condition>,
    exprs: Vec<&Expr>,
    verdict: Verdict,
    zmax: f64,
    mut caveats: Vec<String>,
) -> HypothesisReport {
    let gradient = gradient_caveat(&conditions, &exprs, zmax);
    caveats.insert(0, gradient.describe(zmax));
    HypothesisReport {
        theorem,
        conditions,
        verdict,
        gradient,
        caveats,
    }
}

const A2_NOTE: &str = "the A2 box uses u in [0, s1/c1] (the range on which the compression estimate is applied), not [0, s2/c2]";

/// Conditions for one positive solution between the levels `rho` and `s`.
pub fn existence_check(
    setting: &Setting<'_>,
    spec: &ThresholdSpec,
    scan: &ScanConfig,
) -> Result<HypothesisReport, CheckError> {
    spec.validate_positive()?;
    let c = setting.constants().c;
    for (i, (&rho, &s)) in spec.rho.iter().zip(&spec.s).enumerate() {
        if rho >= c[i] * s {
            return Err(CheckError::Compatibility {
                component: i + 1,
                rho,
                cs: c[i] * s,
            });
        }
    }
    let mut conditions = Vec::new();
    let mut exprs = Vec::new();
    for kind in KernelKind::BOTH {
        let i = kind.index();
        let f = setting.system.nonlinearity(kind);
        conditions.push(evaluate(
            ConditionSpec {
                key: format!("f{i}.sup_omega_rho"),
                description: format!("sup f{i} over Omega(rho1, rho2)"),
                kind,
                expr: f,
                mode: Extremum::Sup,
                region: setting.omega_box(spec.rho, spec.zmax),
                threshold: setting.upper_threshold(kind, spec.rho[i - 1]),
            },
            scan,
        )?);
        exprs.push(f);
        conditions.push(evaluate(
            ConditionSpec {
                key: format!("f{i}.inf_a_s"),
                description: format!("inf f{i} over A{i}(s1, s2)"),
                kind,
                expr: f,
                mode: Extremum::Inf,
                region: setting.a_box(kind, spec.s, spec.zmax),
                threshold: setting.lower_threshold(kind, spec.s[i - 1]),
            },
            scan,
        )?);
        exprs.push(f);
    }
    let verdict = if conditions.iter().all(|c| c.satisfied) {
        Verdict::Satisfied
    } else {
        Verdict::NotSatisfied
    };
    Ok(finish(
        Theorem::Existence,
        conditions,
        exprs,
        verdict,
        spec.zmax,
        vec![A2_NOTE.into()],
    ))
}

/// Conditions for two positive solutions at the levels `rho < s < theta`.
pub fn multiplicity_check(
    setting: &Setting<'_>,
    spec: &ThresholdSpec,
    scan: &ScanConfig,
) -> Result<HypothesisReport, CheckError> {
    let theta = spec.theta.ok_or(CheckError::MissingTheta)?;
    spec.validate_positive()?;
    let c = setting.constants().c;
    for i in 0..2 {
        let rho_over_c = spec.rho[i] / c[i];
        if !(rho_over_c < spec.s[i] && spec.s[i] < theta[i]) {
            return Err(CheckError::Ordering {
                component: i + 1,
                rho_over_c,
                s: spec.s[i],
                theta: theta[i],
            });
        }
    }
    let mut conditions = Vec::new();
    let mut exprs = Vec::new();
    for kind in KernelKind::BOTH {
        let i = kind.index();
        let f = setting.system.nonlinearity(kind);
        let lower = |key: &str, name: &str, levels: [f64; 2]| ConditionSpec {
            key: format!("f{i}.inf_a_{key}"),
            description: format!("inf f{i} over A{i}({name}1, {name}2)"),
            kind,
            expr: f,
            mode: Extremum::Inf,
            region: setting.a_box(kind, levels, spec.zmax),
            threshold: setting.lower_threshold(kind, levels[i - 1]),
        };
        conditions.push(evaluate(lower("rho", "rho", spec.rho), scan)?);
        conditions.push(evaluate(
            ConditionSpec {
                key: format!("f{i}.sup_omega_s"),
                description: format!("sup f{i} over Omega(s1, s2)"),
                kind,
                expr: f,
                mode: Extremum::Sup,
                region: setting.omega_box(spec.s, spec.zmax),
                threshold: setting.upper_threshold(kind, spec.s[i - 1]),
            },
            scan,
        )?);
        conditions.push(evaluate(lower("theta", "theta", theta), scan)?);
        exprs.extend([f, f, f]);
    }
    let verdict = if conditions.iter().all(|c| c.satisfied) {
        Verdict::Satisfied
    } else {
        Verdict::NotSatisfied
    };
    Ok(finish(
        Theorem::Multiplicity,
        conditions,
        exprs,
        verdict,
        spec.zmax,
        vec![A2_NOTE.into()],
    ))
}

/// Screens the two "too small" / "too large" linear-growth conditions that rule
/// out positive solutions, on `w_i in [STATE_FLOOR * wmax, wmax]`.
pub fn nonexistence_check(
    setting: &Setting<'_>,
    wmax: f64,
    zmax: f64,
    scan: &ScanConfig,
) -> Result<HypothesisReport, CheckError> {
    for (name, value) in [("wmax", wmax), ("zmax", zmax)] {
        if !(value.is_finite() && value > 0.0) {
            return Err(CheckError::NonPositive { name, value });
        }
    }
    let d = setting.system.domain();
    let mut ratios = Vec::new();
    for kind in KernelKind::BOTH {
        let var = if kind == KernelKind::Dirichlet {
            Var::U
        } else {
            Var::V
        };
        ratios.push(Expr::Binary(
            crate::expr::BinOp::Div,
            Box::new(setting.system.nonlinearity(kind).clone()),
            Box::new(Expr::Var(var)),
        ));
    }
    let state = Interval::new(STATE_FLOOR * wmax, wmax);
    let other = Interval::new(0.0, wmax);
    let z = Interval::new(0.0, zmax);
    let r = Interval::new(d.inner_radius(), d.outer_radius());

    let mut conditions = Vec::new();
    for (which, mode) in [(1u8, Extremum::Sup), (2u8, Extremum::Inf)] {
        for kind in KernelKind::BOTH {
            let i = kind.index();
            let region = match kind {
                KernelKind::Dirichlet => BoxSpec::new(r, state, other, z, z),
                KernelKind::Mixed => BoxSpec::new(r, other, state, z, z),
            };
            let w = if i == 1 { "u" } else { "v" };
            let (threshold, description) = match mode {
                Extremum::Sup => (
                    setting.upper_threshold(kind, 1.0),
                    format!("cond1: sup f{i}/{w} below m{i}/sup p"),
                ),
                Extremum::Inf => (
                    setting.lower_threshold(kind, 1.0),
                    format!("cond2: inf f{i}/{w} above M{i}/inf p"),
                ),
            };
            conditions.push(evaluate(
                ConditionSpec {
                    key: format!("cond{which}.f{i}"),
                    description,
                    kind,
                    expr: &ratios[i - 1],
                    mode,
                    region,
                    threshold,
                },
                scan,
            )?);
        }
    }
    let holds = |which: u8| {
        conditions
            .iter()
            .filter(|c| c.key.starts_with(&format!("cond{which}.")))
            .all(|c| c.satisfied)
    };
    let verdict = if holds(1) {
        Verdict::OnlyZeroSolution(1)
    } else if holds(2) {
        Verdict::OnlyZeroSolution(2)
    } else {
        Verdict::Inconclusive
    };
    let exprs: Vec<&Expr> = vec![&ratios[0], &ratios[1], &ratios[0], &ratios[1]];
    let caveat = format!(
        "the conditions must hold for every w_i > 0; only w_i in [{}, {}] was scanned",
        sig9(STATE_FLOOR * wmax),
        sig9(wmax)
    );
    Ok(finish(
        Theorem::Nonexistence,
        conditions,
        exprs,
        verdict,
        zmax,
        vec![caveat],
    ))
}
