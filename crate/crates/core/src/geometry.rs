//! Change of variables from the annulus `R0 < |x| < R1` to the unit interval.
//!
//! A radial function `w(r)` on `[R0, R1]` is pulled back to `w(t) = w(r(t))`
//! for `t in [0, 1]`, with `r(0) = R0` and `r(1) = R1` in every dimension.
//! Under this map the radial Laplacian becomes a plain second derivative
//! multiplied by the weight `p(t) = r'(t)^2`:
//!
//! ```text
//! -w''(t) = p(t) f(r(t), w(t), |w'(t) / r'(t)|)
//! ```

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("dimension must be at least 2, got {0}")]
    Dimension(u32),
    #[error("radii must satisfy 0 < R0 < R1 < inf, got R0={r0}, R1={r1}")]
    Radii { r0: f64, r1: f64 },
    #[error("parameter t={0} lies outside [0, 1]")]
    OutOfRange(f64),
    #[error("radius r={r} lies outside [{r0}, {r1}]")]
    RadiusOutOfRange { r: f64, r0: f64, r1: f64 },
    #[error("empty interval [{0}, {1}]")]
    EmptyInterval(f64, f64),
}

/// Which extremum of the weight to take over an interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremum {
    Sup,
    Inf,
}

/// The constants `A`, `B` of the power-law map used when `n >= 3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformConstants {
    pub a: f64,
    pub b: f64,
}

/// The annulus `{ x in R^n : R0 < |x| < R1 }`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusDomain {
    n: u32,
    r0: f64,
    r1: f64,
}

impl AnnulusDomain {
    pub fn new(n: u32, r0: f64, r1: f64) -> Result<Self, GeometryError> {
        if n < 2 {
            return Err(GeometryError::Dimension(n));
        }
        if !(r0.is_finite() && r1.is_finite() && r0 > 0.0 && r0 < r1) {
            return Err(GeometryError::Radii { r0, r1 });
        }
        Ok(Self { n, r0, r1 })
    }

    pub fn dimension(&self) -> u32 {
        self.n
    }

    pub fn inner_radius(&self) -> f64 {
        self.r0
    }

    pub fn outer_radius(&self) -> f64 {
        self.r1
    }

    /// `A` and `B`; `None` for the logarithmic case `n = 2`.
    pub fn constants(&self) -> Option<TransformConstants> {
        let k = self.exponent()?;
        let d = self.power_gap(k);
        Some(TransformConstants {
            a: (self.r0 * self.r1).powi(k) / d,
            b: self.r1.powi(k) / d,
        })
    }

    /// `r(t)`, increasing from `R0` at `t = 0` to `R1` at `t = 1`.
    pub fn radial_map(&self, t: f64) -> Result<f64, GeometryError> {
        check_unit(t)?;
        Ok(self.radius_at(t))
    }

    pub fn radial_map_derivative(&self, t: f64) -> Result<f64, GeometryError> {
        check_unit(t)?;
        Ok(self.radius_slope_at(t))
    }

    /// The weight `p(t)` from its closed form (not via `r'(t)^2`).
    pub fn weight_p(&self, t: f64) -> Result<f64, GeometryError> {
        check_unit(t)?;
        Ok(self.weight_at(t))
    }

    /// Inverse of [`radial_map`](Self::radial_map).
    pub fn inverse_radial_map(&self, r: f64) -> Result<f64, GeometryError> {
        if !(r >= self.r0 && r <= self.r1) {
            return Err(GeometryError::RadiusOutOfRange {
                r,
                r0: self.r0,
                r1: self.r1,
            });
        }
        let t = match self.exponent() {
            None => (r / self.r0).ln() / (self.r1 / self.r0).ln(),
            Some(k) => {
                let q = (self.r0 * self.r1 / r).powi(k);
                (self.r1.powi(k) - q) / self.power_gap(k)
            }
        };
        Ok(t.clamp(0.0, 1.0))
    }

    /// Exact sup or inf of `p` over `[alpha, beta]`.
    ///
    /// `p` is increasing in `t` in every dimension, so the extremum sits at an
    /// endpoint.
    pub fn extremize_p(&self, alpha: f64, beta: f64, mode: Extremum) -> Result<f64, GeometryError> {
        check_unit(alpha)?;
        check_unit(beta)?;
        if alpha > beta {
            return Err(GeometryError::EmptyInterval(alpha, beta));
        }
        Ok(match mode {
            Extremum::Sup => self.weight_at(beta),
            Extremum::Inf => self.weight_at(alpha),
        })
    }

    /// Dense-sampling estimate of the same extremum, used to certify
    /// [`extremize_p`](Self::extremize_p).
    pub fn extremize_p_sampled(
        &self,
        alpha: f64,
        beta: f64,
        mode: Extremum,
        samples: usize,
    ) -> Result<f64, GeometryError> {
        check_unit(alpha)?;
        check_unit(beta)?;
        if alpha > beta {
            return Err(GeometryError::EmptyInterval(alpha, beta));
        }
        let samples = samples.max(2);
        let values = (0..samples).map(|i| {
            let t = alpha + (beta - alpha) * i as f64 / (samples - 1) as f64;
            self.weight_at(t)
        });
        Ok(match mode {
            Extremum::Sup => values.fold(f64::NEG_INFINITY, f64::max),
            Extremum::Inf => values.fold(f64::INFINITY, f64::min),
        })
    }

    // Unchecked evaluations for hot loops; callers guarantee t in [0, 1].

    pub(crate) fn radius_at(&self, t: f64) -> f64 {
        match self.exponent() {
            None => self.r0 * (t * (self.r1 / self.r0).ln()).exp(),
            // (A / (B - t))^(1/k) written as R0 R1 / Q(t)^(1/k) with
            // Q(t) = R1^k (1 - t) + R0^k t, which has no cancellation.
            Some(k) => self.r0 * self.r1 / self.q(k, t).powf(1.0 / k as f64),
        }
    }

    pub(crate) fn radius_slope_at(&self, t: f64) -> f64 {
        match self.exponent() {
            None => self.radius_at(t) * (self.r1 / self.r0).ln(),
            Some(k) => {
                let kf = k as f64;
                self.r0 * self.r1 * self.power_gap(k) / kf * self.q(k, t).powf(-(kf + 1.0) / kf)
            }
        }
    }

    pub(crate) fn weight_at(&self, t: f64) -> f64 {
        match self.exponent() {
            None => {
                let log = (self.r1 / self.r0).ln();
                let r = self.radius_at(t);
                r * r * log * log
            }
            Some(k) => {
                let kf = k as f64;
                let lead = self.r0 * self.r1 * self.power_gap(k) / kf;
                let n = self.n as f64;
                lead * lead / self.q(k, t).powf(2.0 * (n - 1.0) / kf)
            }
        }
    }

    fn exponent(&self) -> Option<i32> {
        (self.n >= 3).then(|| (self.n - 2) as i32)
    }

    fn power_gap(&self, k: i32) -> f64 {
        self.r1.powi(k) - self.r0.powi(k)
    }

    fn q(&self, k: i32, t: f64) -> f64 {
        self.r1.powi(k) * (1.0 - t) + self.r0.powi(k) * t
    }
}

fn check_unit(t: f64) -> Result<(), GeometryError> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(GeometryError::OutOfRange(t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::E;

    fn example() -> AnnulusDomain {
        AnnulusDomain::new(3, 1.0, E).unwrap()
    }

    #[test]
    fn anchors_and_midpoints() {
        let d = example();
        assert_eq!(d.radial_map(0.0).unwrap(), 1.0);
        assert_relative_eq!(d.radial_map(1.0).unwrap(), E, max_relative = 1e-15);
        let planar = AnnulusDomain::new(2, 1.0, 2.0).unwrap();
        assert_relative_eq!(
            planar.radial_map(0.5).unwrap(),
            2f64.sqrt(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn constants_for_example() {
        let c = example().constants().unwrap();
        let expected = E / (E - 1.0);
        assert_relative_eq!(c.a, expected, max_relative = 1e-15);
        assert_relative_eq!(c.b, expected, max_relative = 1e-15);
        assert!(c.b > 1.0);
        assert!(AnnulusDomain::new(2, 1.0, 2.0)
            .unwrap()
            .constants()
            .is_none());
    }

    #[test]
    fn slopes() {
        let planar = AnnulusDomain::new(2, 1.0, E).unwrap();
        for &t in &[0.0, 0.3, 0.77, 1.0] {
            assert_relative_eq!(
                planar.radial_map_derivative(t).unwrap(),
                planar.radial_map(t).unwrap(),
                max_relative = 1e-14
            );
        }
        // r(t) = A / (B - t) with A = B, so r'(0) = A / B^2 = 1 / B.
        let d = example();
        assert_relative_eq!(
            d.radial_map_derivative(0.0).unwrap(),
            (E - 1.0) / E,
            max_relative = 1e-14
        );
    }

    #[test]
    fn weight_extrema_for_example() {
        let d = example();
        let top = E * E * (E - 1.0).powi(2);
        assert_relative_eq!(
            d.extremize_p(0.0, 1.0, Extremum::Sup).unwrap(),
            top,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            d.extremize_p(0.25, 0.75, Extremum::Inf).unwrap(),
            top / (E - (E - 1.0) / 4.0).powi(4),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            d.extremize_p(0.5, 1.0, Extremum::Inf).unwrap(),
            top / (E - (E - 1.0) / 2.0).powi(4),
            max_relative = 1e-14
        );
        assert_eq!(
            d.extremize_p(0.4, 0.4, Extremum::Inf).unwrap(),
            d.weight_p(0.4).unwrap()
        );
        let planar = AnnulusDomain::new(2, 1.0, 2.0).unwrap();
        let ln2 = 2f64.ln();
        assert_relative_eq!(
            planar.extremize_p(0.0, 1.0, Extremum::Sup).unwrap(),
            4.0 * ln2 * ln2,
            max_relative = 1e-14
        );
    }

    #[test]
    fn exact_extremum_matches_sampling() {
        for n in 2..=6 {
            let d = AnnulusDomain::new(n, 0.7, 3.1).unwrap();
            for mode in [Extremum::Sup, Extremum::Inf] {
                let exact = d.extremize_p(0.1, 0.9, mode).unwrap();
                let sampled = d.extremize_p_sampled(0.1, 0.9, mode, 1001).unwrap();
                assert_relative_eq!(exact, sampled, max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(AnnulusDomain::new(1, 1.0, 2.0).is_err());
        assert!(AnnulusDomain::new(3, 2.0, 1.0).is_err());
        assert!(AnnulusDomain::new(3, 0.0, 1.0).is_err());
        assert!(AnnulusDomain::new(3, 1.0, f64::INFINITY).is_err());
        let d = example();
        assert_eq!(d.radial_map(1.5), Err(GeometryError::OutOfRange(1.5)));
        assert!(d.radial_map_derivative(-0.1).is_err());
        assert!(d.weight_p(f64::NAN).is_err());
        assert_eq!(
            d.extremize_p(0.6, 0.5, Extremum::Sup),
            Err(GeometryError::EmptyInterval(0.6, 0.5))
        );
        assert!(d.inverse_radial_map(0.5).is_err());
    }

    #[test]
    fn inverse_round_trip() {
        for n in 2..=6 {
            let d = AnnulusDomain::new(n, 0.5, 4.0).unwrap();
            for i in 0..=20 {
                let t = i as f64 / 20.0;
                let back = d.inverse_radial_map(d.radial_map(t).unwrap()).unwrap();
                assert!((back - t).abs() < 1e-13, "n={n} t={t} back={back}");
            }
        }
    }
}
