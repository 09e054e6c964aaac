//! Service-time distribution models and the queue specification.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::WfError;
use crate::numerics::{binomial, factorial};

/// The closed set of service-time models with closed-form transforms,
/// moments and pole data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ServiceModel {
    /// Constant service time `d > 0`.
    Deterministic { d: f64 },
    /// Exponential with rate `omega > 0`.
    Exponential { omega: f64 },
    /// Erlang with integer shape `q >= 1` and rate `omega > 0`.
    Erlang { q: u32, omega: f64 },
}

impl ServiceModel {
    pub fn validate(&self) -> Result<(), WfError> {
        let ok = match *self {
            ServiceModel::Deterministic { d } => d > 0.0 && d.is_finite(),
            ServiceModel::Exponential { omega } => omega > 0.0 && omega.is_finite(),
            ServiceModel::Erlang { q, omega } => q >= 1 && omega > 0.0 && omega.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(WfError::Domain(format!("invalid service model {self:?}")))
        }
    }

    /// `E[D^k]`.
    pub fn moment(&self, k: u32) -> f64 {
        match *self {
            ServiceModel::Deterministic { d } => d.powi(k as i32),
            ServiceModel::Exponential { omega } => factorial(k) / omega.powi(k as i32),
            ServiceModel::Erlang { q, omega } => {
                // (k+q-1)!/((q-1)! ω^k)
                let mut acc = 1.0;
                for j in q..(q + k) {
                    acc *= j as f64;
                }
                acc / omega.powi(k as i32)
            }
        }
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    /// `D*(s) = E[e^{-sD}]`.
    pub fn lst(&self, s: Complex64) -> Result<Complex64, WfError> {
        match *self {
            ServiceModel::Deterministic { d } => Ok((-s * d).exp()),
            ServiceModel::Exponential { omega } => {
                let den = s + omega;
                if den.norm() < 1e-300 {
                    return Err(WfError::PoleEvaluation(format!("D* pole at s = -{omega}")));
                }
                Ok(Complex64::new(omega, 0.0) / den)
            }
            ServiceModel::Erlang { q, omega } => {
                let den = s + omega;
                if den.norm() < 1e-300 {
                    return Err(WfError::PoleEvaluation(format!("D* pole at s = -{omega}")));
                }
                Ok((Complex64::new(omega, 0.0) / den).powu(q))
            }
        }
    }

    /// Shifted moment coefficient `x_{a:k} = E[D^k e^{-aD}]/k!`, the k-th
    /// power-series coefficient of `D*(-s)` at `-a`.
    pub fn shifted_moment_coeff(&self, a: Complex64, k: u32) -> Result<Complex64, WfError> {
        match *self {
            ServiceModel::Deterministic { d } => {
                Ok(Complex64::new(d.powi(k as i32) / factorial(k), 0.0) * (-a * d).exp())
            }
            ServiceModel::Exponential { omega } => {
                let den = a + omega;
                if den.norm() < 1e-12 * omega {
                    return Err(WfError::PoleEvaluation(format!(
                        "shifted moment pole at a = -{omega}"
                    )));
                }
                if den.re <= 0.0 && den.im == 0.0 {
                    return Err(WfError::Domain(format!(
                        "E[D^k e^(-aD)] diverges for Re(a) <= -omega, a = {a}"
                    )));
                }
                Ok(Complex64::new(omega, 0.0) / den.powu(k + 1))
            }
            ServiceModel::Erlang { q, omega } => {
                let den = a + omega;
                if den.norm() < 1e-12 * omega {
                    return Err(WfError::PoleEvaluation(format!(
                        "shifted moment pole at a = -{omega}"
                    )));
                }
                if den.re <= 0.0 && den.im == 0.0 {
                    return Err(WfError::Domain(format!(
                        "E[D^k e^(-aD)] diverges for Re(a) <= -omega, a = {a}"
                    )));
                }
                Ok(Complex64::new(binomial(k + q - 1, k) * omega.powi(q as i32), 0.0)
                    / den.powu(k + q))
            }
        }
    }

    /// Dominant pole of `D*` (negative; `-inf` for the entire deterministic
    /// transform).
    pub fn dominant_pole(&self) -> f64 {
        match *self {
            ServiceModel::Deterministic { .. } => f64::NEG_INFINITY,
            ServiceModel::Exponential { omega } | ServiceModel::Erlang { omega, .. } => -omega,
        }
    }
}

/// An M/G/1 queue: arrival rate, busy-state service model, and the optional
/// idle-state (setup) model `D0` which defaults to `D`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueueSpec {
    pub model: ServiceModel,
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model0: Option<ServiceModel>,
}

impl QueueSpec {
    pub fn new(model: ServiceModel, lambda: f64) -> Result<Self, WfError> {
        let spec = QueueSpec { model, lambda, model0: None };
        spec.stability_check()?;
        Ok(spec)
    }

    pub fn with_setup(model: ServiceModel, lambda: f64, model0: ServiceModel) -> Result<Self, WfError> {
        model0.validate()?;
        if !matches!(model0, ServiceModel::Deterministic { .. }) && model0 != model {
            return Err(WfError::UnsupportedModel(
                "setup model D0 must be deterministic or identical to D".into(),
            ));
        }
        let spec = QueueSpec { model, lambda, model0: Some(model0) };
        spec.stability_check()?;
        Ok(spec)
    }

    /// `(rho, rho0) = (lambda E[D], lambda E[D0])`.
    pub fn utilization(&self) -> (f64, f64) {
        let rho = self.lambda * self.model.mean();
        let rho0 = self.lambda * self.model0.unwrap_or(self.model).mean();
        (rho, rho0)
    }

    pub fn rho(&self) -> f64 {
        self.lambda * self.model.mean()
    }

    pub fn model0(&self) -> ServiceModel {
        self.model0.unwrap_or(self.model)
    }

    pub fn has_setup(&self) -> bool {
        self.model0.map(|m0| m0 != self.model).unwrap_or(false)
    }

    pub fn stability_check(&self) -> Result<(), WfError> {
        self.model.validate()?;
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(WfError::Domain(format!("arrival rate must be positive, got {}", self.lambda)));
        }
        let (rho, rho0) = self.utilization();
        if rho >= 1.0 {
            return Err(WfError::StabilityViolation { rho });
        }
        if !rho0.is_finite() {
            return Err(WfError::Domain("rho0 must be finite".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::quad::adaptive_simpson;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn moments_match_closed_forms() {
        assert_eq!(ServiceModel::Exponential { omega: 1.0 }.moment(3), 6.0);
        assert_eq!(ServiceModel::Deterministic { d: 2.0 }.moment(2), 4.0);
        // Erlang(2, 1): E[D^2] = 3!/1! = 6, cross-checked by quadrature of
        // the density x e^{-x}.
        let m = ServiceModel::Erlang { q: 2, omega: 1.0 }.moment(2);
        let quad = adaptive_simpson(&|x: f64| x * x * x * (-x).exp(), 0.0, 80.0, 1e-12, 30);
        assert!((m - 6.0).abs() < 1e-12);
        assert!((m - quad).abs() < 1e-8);
    }

    #[test]
    fn lst_basics() {
        for model in [
            ServiceModel::Deterministic { d: 0.7 },
            ServiceModel::Exponential { omega: 1.3 },
            ServiceModel::Erlang { q: 3, omega: 2.0 },
        ] {
            let v = model.lst(c(0.0, 0.0)).unwrap();
            assert!((v - c(1.0, 0.0)).norm() < 1e-15);
        }
        let v = ServiceModel::Exponential { omega: 1.0 }.lst(c(1.0, 0.0)).unwrap();
        assert!((v - c(0.5, 0.0)).norm() < 1e-15);
        let v = ServiceModel::Deterministic { d: 1.0 }.lst(c(0.0, std::f64::consts::PI)).unwrap();
        assert!((v - c(-1.0, 0.0)).norm() < 1e-12);
        assert!(ServiceModel::Exponential { omega: 2.0 }.lst(c(-2.0, 0.0)).is_err());
    }

    #[test]
    fn lst_derivatives_match_moments() {
        // Numerically differentiate D*(s) at 0: (-1)^k d^k D*/ds^k = E[D^k].
        for model in [
            ServiceModel::Deterministic { d: 0.9 },
            ServiceModel::Exponential { omega: 1.7 },
            ServiceModel::Erlang { q: 2, omega: 3.0 },
        ] {
            let f = |s: f64| model.lst(c(s, 0.0)).unwrap().re;
            let h = 1e-3;
            let d1 = (f(h) - f(-h)) / (2.0 * h);
            let d2 = (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
            let d3 = (f(2.0 * h) - 2.0 * f(h) + 2.0 * f(-h) - f(-2.0 * h)) / (2.0 * h * h * h);
            assert!((-d1 - model.moment(1)).abs() < 1e-6 * model.moment(1));
            assert!((d2 - model.moment(2)).abs() < 1e-6 * model.moment(2));
            assert!((-d3 - model.moment(3)).abs() < 1e-4 * model.moment(3));
        }
    }

    #[test]
    fn shifted_moment_reduces_to_moment_at_zero() {
        for model in [
            ServiceModel::Deterministic { d: 0.9 },
            ServiceModel::Exponential { omega: 1.7 },
            ServiceModel::Erlang { q: 2, omega: 3.0 },
        ] {
            for k in 0..4u32 {
                let x = model.shifted_moment_coeff(c(0.0, 0.0), k).unwrap();
                assert!((x.re - model.moment(k) / factorial(k)).abs() < 1e-12);
                assert!(x.im.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn shifted_moment_matches_quadrature() {
        // Deterministic(1), a=1, k=2 -> e^{-1}/2.
        let x = ServiceModel::Deterministic { d: 1.0 }
            .shifted_moment_coeff(c(1.0, 0.0), 2)
            .unwrap();
        assert!((x.re - (-1.0f64).exp() / 2.0).abs() < 1e-15);

        // Exponential(1), a=0.25, k=1 -> 1/1.25^2 = 0.64, and the defining
        // integral by quadrature.
        let x = ServiceModel::Exponential { omega: 1.0 }
            .shifted_moment_coeff(c(0.25, 0.0), 1)
            .unwrap();
        assert!((x.re - 0.64).abs() < 1e-12);
        let quad =
            adaptive_simpson(&|t: f64| t * (-0.25 * t).exp() * (-t).exp(), 0.0, 120.0, 1e-13, 30);
        assert!((x.re - quad).abs() < 1e-8);

        // Erlang(3, 2), random-ish (a, k) against quadrature of the density.
        let model = ServiceModel::Erlang { q: 3, omega: 2.0 };
        for (a, k) in [(0.3f64, 1u32), (1.1, 2), (0.05, 3)] {
            let x = model.shifted_moment_coeff(c(a, 0.0), k).unwrap();
            let dens = |t: f64| (2.0 * t).powi(2) / 2.0 * 2.0 * (-2.0 * t).exp();
            let integrand = |t: f64| t.powi(k as i32) * (-a * t).exp() * dens(t);
            let quad = adaptive_simpson(&integrand, 0.0, 120.0, 1e-13, 30) / factorial(k);
            assert!(
                (x.re - quad).abs() < 1e-8 * quad.abs().max(1e-6),
                "a={a} k={k}: {x} vs {quad}"
            );
        }
    }

    #[test]
    fn stability() {
        assert!(QueueSpec::new(ServiceModel::Exponential { omega: 1.0 }, 0.5).is_ok());
        let err = QueueSpec::new(ServiceModel::Deterministic { d: 1.0 }, 1.0);
        assert!(matches!(err, Err(WfError::StabilityViolation { rho }) if rho == 1.0));
        let spec = QueueSpec::new(ServiceModel::Erlang { q: 2, omega: 4.0 }, 1.0).unwrap();
        assert_eq!(spec.utilization().0, 0.5);
    }

    #[test]
    fn setup_model_restrictions() {
        let exp = ServiceModel::Exponential { omega: 1.0 };
        assert!(QueueSpec::with_setup(exp, 0.5, ServiceModel::Deterministic { d: 2.0 }).is_ok());
        assert!(QueueSpec::with_setup(exp, 0.5, exp).is_ok());
        assert!(
            QueueSpec::with_setup(exp, 0.5, ServiceModel::Erlang { q: 2, omega: 1.0 }).is_err()
        );
    }
}
