//! Problem files: TOML with `[domain]`, `[windows]`, `[thresholds]`, `[f]` and `[numerics]`.
//!
//! ```toml
//! [domain]
//! n = 3
//! R0 = 1.0
//! R1 = 2.718281828459045
//!
//! [windows]
//! a1 = 0.25
//! b1 = 0.75
//! a2 = 0.5
//! b2 = 1.0
//!
//! [thresholds]
//! rho1 = 0.1
//! rho2 = 0.1
//! s1 = 10.0
//! s2 = 10.0
//!
//! [f]
//! f1 = "exp(-r^2)/6 * (2 - sin(gu^2 + gv^2)) * u^5"
//! f2 = "2/pi * exp(-r^2) * atan(1 + gu^2 + gv^2) * v^5"
//! ```

use crate::expr::{Expr, ParseError};
use crate::geometry::{AnnulusDomain, GeometryError};
use crate::hypothesis::ThresholdSpec;
use crate::kernels::{ConeWindow, KernelError, KernelKind};
use crate::operator::{GridFunction, OperatorError, ReducedSystem, DEFAULT_PANELS};
use crate::scan::ScanConfig;
use crate::solver::{InitialGuess, SolveConfig};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Syntax(#[from] toml::de::Error),
    #[error("missing [{section}] key '{key}'")]
    Missing {
        section: &'static str,
        key: &'static str,
    },
    #[error("[domain]: {0}")]
    Domain(#[from] GeometryError),
    #[error("[windows]: {0}")]
    Window(#[from] KernelError),
    #[error("[f] {key}: {source}")]
    Expr {
        key: &'static str,
        source: ParseError,
    },
    #[error("[numerics] {0}")]
    Numerics(String),
    #[error("initial grid {path}: {reason}")]
    InitialGrid { path: PathBuf, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    pub n: u32,
    #[serde(rename = "R0")]
    pub r0: f64,
    #[serde(rename = "R1")]
    pub r1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowsSection {
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdsSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta2: Option<f64>,
    #[serde(rename = "Zmax", default, skip_serializing_if = "Option::is_none")]
    pub zmax: Option<f64>,
    #[serde(rename = "Wmax", default, skip_serializing_if = "Option::is_none")]
    pub wmax: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FSection {
    pub f1: String,
    pub f2: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialMode {
    KernelShaped,
    Flat,
    /// Read `u`, `v` and their derivatives from a CSV written by `solve`.
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsSection {
    pub grid: usize,
    pub scan_points: usize,
    pub scan_starts: usize,
    pub damping: f64,
    pub anderson_depth: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub initial: InitialMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_csv: Option<PathBuf>,
    pub radial_samples: usize,
}

impl Default for NumericsSection {
    fn default() -> Self {
        let scan = ScanConfig::default();
        let solve = SolveConfig::default();
        Self {
            grid: DEFAULT_PANELS,
            scan_points: scan.points_per_axis,
            scan_starts: scan.starts,
            damping: solve.damping,
            anderson_depth: solve.anderson_depth,
            max_iter: solve.max_iterations,
            tol: solve.tolerance,
            initial: InitialMode::KernelShaped,
            initial_csv: None,
            radial_samples: solve.radial_samples,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub domain: DomainSection,
    pub windows: WindowsSection,
    #[serde(default)]
    pub thresholds: ThresholdsSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<FSection>,
    #[serde(default)]
    pub numerics: NumericsSection,
}

fn required(value: Option<f64>, key: &'static str) -> Result<f64, ConfigError> {
    value.ok_or(ConfigError::Missing {
        section: "thresholds",
        key,
    })
}

impl ProblemConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn domain(&self) -> Result<AnnulusDomain, ConfigError> {
        Ok(AnnulusDomain::new(
            self.domain.n,
            self.domain.r0,
            self.domain.r1,
        )?)
    }

    pub fn windows(&self) -> Result<[ConeWindow; 2], ConfigError> {
        let w = &self.windows;
        Ok([
            ConeWindow::new(KernelKind::Dirichlet, w.a1, w.b1)?,
            ConeWindow::new(KernelKind::Mixed, w.a2, w.b2)?,
        ])
    }

    pub fn system(&self) -> Result<ReducedSystem, ConfigError> {
        let f = self.f.as_ref().ok_or(ConfigError::Missing {
            section: "f",
            key: "f1",
        })?;
        let f1 = Expr::parse(&f.f1).map_err(|source| ConfigError::Expr { key: "f1", source })?;
        let f2 = Expr::parse(&f.f2).map_err(|source| ConfigError::Expr { key: "f2", source })?;
        Ok(ReducedSystem::new(self.domain()?, f1, f2))
    }

    pub fn zmax(&self) -> f64 {
        self.thresholds.zmax.unwrap_or(ThresholdSpec::DEFAULT_ZMAX)
    }

    pub fn wmax(&self) -> f64 {
        self.thresholds.wmax.unwrap_or(ThresholdSpec::DEFAULT_WMAX)
    }

    /// `rho` and `s` are required; `theta` is read when both entries are present.
    pub fn threshold_spec(&self) -> Result<ThresholdSpec, ConfigError> {
        let t = &self.thresholds;
        let mut spec = ThresholdSpec::new(
            [required(t.rho1, "rho1")?, required(t.rho2, "rho2")?],
            [required(t.s1, "s1")?, required(t.s2, "s2")?],
        );
        spec.theta = match (t.theta1, t.theta2) {
            (Some(a), Some(b)) => Some([a, b]),
            _ => None,
        };
        spec.zmax = self.zmax();
        spec.wmax = self.wmax();
        Ok(spec)
    }

    pub fn scan_config(&self) -> Result<ScanConfig, ConfigError> {
        let n = &self.numerics;
        if n.scan_points < 2 || n.scan_starts == 0 {
            return Err(ConfigError::Numerics(format!(
                "scan_points must be >= 2 and scan_starts >= 1, got {} and {}",
                n.scan_points, n.scan_starts
            )));
        }
        Ok(ScanConfig {
            points_per_axis: n.scan_points,
            starts: n.scan_starts,
            ..ScanConfig::default()
        })
    }

    pub fn solve_config(&self) -> Result<SolveConfig, ConfigError> {
        let n = &self.numerics;
        let initial = match n.initial {
            InitialMode::KernelShaped => InitialGuess::KernelShaped,
            InitialMode::Flat => InitialGuess::Flat,
            InitialMode::Csv => {
                let path = n.initial_csv.as_ref().ok_or(ConfigError::Numerics(
                    "initial = \"csv\" needs initial_csv".into(),
                ))?;
                let (u, v) = read_grid_csv(path)?;
                InitialGuess::Grid(u, v)
            }
        };
        let cfg = SolveConfig {
            panels: n.grid,
            damping: n.damping,
            anderson_depth: n.anderson_depth,
            max_iterations: n.max_iter,
            tolerance: n.tol,
            initial,
            radial_samples: n.radial_samples,
        };
        cfg.validate()
            .map_err(|e| ConfigError::Numerics(e.to_string()))?;
        Ok(cfg)
    }
}

/// Parse the `t,r,u,v,du_dt,dv_dt` rows of a solution CSV.
pub fn read_grid_csv(path: &Path) -> Result<(GridFunction, GridFunction), ConfigError> {
    let fail = |reason: String| ConfigError::InitialGrid {
        path: path.to_path_buf(),
        reason,
    };
    let text = std::fs::read_to_string(path).map_err(|e| fail(e.to_string()))?;
    let mut cols: [Vec<f64>; 4] = Default::default();
    let rows = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .skip(1);
    for (lineno, line) in rows.enumerate() {
        let fields: Vec<f64> = line
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| fail(format!("row {}: {e}", lineno + 1)))?;
        if fields.len() != 6 {
            return Err(fail(format!(
                "row {} has {} columns, expected 6",
                lineno + 1,
                fields.len()
            )));
        }
        for (col, &x) in cols.iter_mut().zip(&fields[2..]) {
            col.push(x);
        }
    }
    let [u, v, du, dv] = cols;
    let grid = |w, dw| {
        GridFunction::with_derivative(w, dw).map_err(|e: OperatorError| fail(e.to_string()))
    };
    Ok((grid(u, du)?, grid(v, dv)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
[domain]
n = 3
R0 = 1.0
R1 = 2.718281828459045

[windows]
a1 = 0.25
b1 = 0.75
a2 = 0.5
b2 = 1.0

[thresholds]
rho1 = 0.1
rho2 = 0.1
s1 = 10.0
s2 = 10.0

[f]
f1 = "u^5"
f2 = "v^5"
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = ProblemConfig::from_toml_str(EXAMPLE).unwrap();
        assert_eq!(cfg.domain.n, 3);
        assert_eq!(cfg.numerics, NumericsSection::default());
        assert_eq!(cfg.threshold_spec().unwrap().theta, None);
        let again = ProblemConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn reports_location_of_errors() {
        let bad = EXAMPLE.replace("a1 = 0.25", "a1 = ");
        let msg = ProblemConfig::from_toml_str(&bad).unwrap_err().to_string();
        assert!(msg.contains("line 8"), "{msg}");
        let unknown = EXAMPLE.replace("n = 3", "n = 3\nq = 1");
        let msg = ProblemConfig::from_toml_str(&unknown)
            .unwrap_err()
            .to_string();
        assert!(msg.contains("unknown field `q`"), "{msg}");
    }

    #[test]
    fn semantic_errors() {
        let cfg = ProblemConfig::from_toml_str(&EXAMPLE.replace("b1 = 0.75", "b1 = 0.25")).unwrap();
        assert!(cfg
            .windows()
            .unwrap_err()
            .to_string()
            .contains("degenerate window"));
        let cfg = ProblemConfig::from_toml_str(&EXAMPLE.replace("\"u^5\"", "\"u^\"")).unwrap();
        assert!(matches!(
            cfg.system(),
            Err(ConfigError::Expr { key: "f1", .. })
        ));
        let cfg = ProblemConfig::from_toml_str(&EXAMPLE.replace("rho2 = 0.1", "")).unwrap();
        assert!(matches!(
            cfg.threshold_spec(),
            Err(ConfigError::Missing { key: "rho2", .. })
        ));
        let cfg =
            ProblemConfig::from_toml_str(&format!("{EXAMPLE}\n[numerics]\ngrid = 63\n")).unwrap();
        assert!(matches!(cfg.solve_config(), Err(ConfigError::Numerics(_))));
    }
}
