//! Material law and kinematics on the annulus.
//!
//! The stored energy density is the polyconvex split
//! `W(grad u) = kappa |grad u|^p + h(det grad u) = g(F) + h(D)` with
//! `F = |grad u|^2 / 2`, `D = det grad u` and `g(t) = kappa (2t)^{p/2}`.
//! In the computational `(rho, phi)` coordinates the pointwise invariants
//! become
//!
//! ```text
//! D = (rho_r / r) P [ P_rho (Q_phi + 1) - P_phi Q_rho ]
//! F = (rho_r^2 / 2)(P_rho^2 + P^2 Q_rho^2)
//!     + (1 / 2r^2)[ P_phi^2 + P^2 (Q_phi + 1)^2 ]
//! ```
//!
//! where `r = (gamma+eps)/2 + (gamma-eps)/2 rho` and `rho_r = 2/(gamma-eps)`.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::basis::{FieldJet, QuadratureRule, SpectralField};
use crate::error::{Error, Result};

/// Scale of the default volumetric energy, `2^{-1/4}`.
const H_SCALE: f64 = 0.840_896_415_253_714_6;

/// The default volumetric energy `h(t) = 2^{-1/4} ((t-1)^2/2 + 1/t)`.
///
/// Strictly convex on `(0, inf)` with `h -> inf` as `t -> 0+` and
/// `h(t)/t -> inf` as `t -> inf`.
pub fn h_default(t: f64) -> Result<f64> {
    if t <= 0.0 {
        return Err(Error::OutOfDomain {
            what: "h argument",
            value: t,
        });
    }
    Ok(h_default_raw(t))
}

/// Derivative of the default volumetric energy.
pub fn h_default_prime(t: f64) -> Result<f64> {
    if t <= 0.0 {
        return Err(Error::OutOfDomain {
            what: "h argument",
            value: t,
        });
    }
    Ok(h_default_prime_raw(t))
}

pub(crate) fn h_default_raw(t: f64) -> f64 {
    H_SCALE * (0.5 * (t - 1.0) * (t - 1.0) + 1.0 / t)
}

pub(crate) fn h_default_prime_raw(t: f64) -> f64 {
    H_SCALE * ((t - 1.0) - 1.0 / (t * t))
}

/// Hyperelastic material: growth exponent `p` in `(1,2)`, modulus
/// `kappa > 0`, and a pluggable volumetric function with derivative.
#[derive(Clone)]
pub struct MaterialModel {
    pub p: f64,
    pub kappa: f64,
    pub tag: String,
    h: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    h_prime: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for MaterialModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MaterialModel")
            .field("p", &self.p)
            .field("kappa", &self.kappa)
            .field("tag", &self.tag)
            .finish()
    }
}

impl MaterialModel {
    /// Material with the default volumetric form.
    pub fn standard(p: f64, kappa: f64) -> Result<Self> {
        Self::with_volumetric(p, kappa, "default", h_default_raw, h_default_prime_raw)
    }

    /// The instance used throughout the experiments: `p = 3/2, kappa = 2/3`.
    pub fn experiment_default() -> Self {
        Self::standard(1.5, 2.0 / 3.0).expect("default material parameters are valid")
    }

    /// Material with a caller-supplied volumetric energy. The functions are
    /// only ever called with `t > 0` by checked paths; unchecked paths
    /// document their extension behaviour.
    pub fn with_volumetric(
        p: f64,
        kappa: f64,
        tag: &str,
        h: impl Fn(f64) -> f64 + Send + Sync + 'static,
        h_prime: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(p > 1.0 && p < 2.0) {
            return Err(Error::InvalidConfig {
                field: "p",
                reason: format!("growth exponent must lie in (1, 2), got {p}"),
            });
        }
        if !(kappa > 0.0) {
            return Err(Error::InvalidConfig {
                field: "kappa",
                reason: format!("modulus must be positive, got {kappa}"),
            });
        }
        Ok(MaterialModel {
            p,
            kappa,
            tag: tag.to_string(),
            h: Arc::new(h),
            h_prime: Arc::new(h_prime),
        })
    }

    /// Isochoric energy `g(t) = kappa (2t)^{p/2}` for `t > 0`.
    pub fn g(&self, t: f64) -> Result<f64> {
        if t <= 0.0 {
            return Err(Error::OutOfDomain {
                what: "g argument",
                value: t,
            });
        }
        Ok(self.g_raw(t))
    }

    /// Derivative `g'(t) = kappa p (2t)^{p/2 - 1}`.
    pub fn g_prime(&self, t: f64) -> Result<f64> {
        if t <= 0.0 {
            return Err(Error::OutOfDomain {
                what: "g argument",
                value: t,
            });
        }
        Ok(self.g_prime_raw(t))
    }

    #[inline]
    pub(crate) fn g_raw(&self, t: f64) -> f64 {
        self.kappa * (2.0 * t).powf(0.5 * self.p)
    }

    #[inline]
    pub(crate) fn g_prime_raw(&self, t: f64) -> f64 {
        self.kappa * self.p * (2.0 * t).powf(0.5 * self.p - 1.0)
    }

    /// Volumetric energy for `t > 0`.
    pub fn h(&self, t: f64) -> Result<f64> {
        if t <= 0.0 {
            return Err(Error::OutOfDomain {
                what: "h argument",
                value: t,
            });
        }
        Ok((self.h)(t))
    }

    /// Volumetric derivative for `t > 0`.
    pub fn h_prime(&self, t: f64) -> Result<f64> {
        if t <= 0.0 {
            return Err(Error::OutOfDomain {
                what: "h argument",
                value: t,
            });
        }
        Ok((self.h_prime)(t))
    }

    /// Volumetric energy evaluated by its formula without the positivity
    /// guard. Post-processing quadratures use this to report energies of
    /// fields whose determinant may graze zero between grid nodes; the
    /// default form is finite for every `t != 0`.
    #[inline]
    pub(crate) fn h_unguarded(&self, t: f64) -> f64 {
        (self.h)(t)
    }

    /// Volumetric derivative without the positivity guard; callers ensure
    /// admissibility themselves.
    #[inline]
    pub(crate) fn h_prime_unguarded(&self, t: f64) -> f64 {
        (self.h_prime)(t)
    }
}

/// Annular reference configuration `eps < |x| < gamma` with the affine
/// radial map to the computational interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusDomain {
    eps: f64,
    gamma: f64,
}

impl AnnulusDomain {
    pub fn new(eps: f64, gamma: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::InvalidConfig {
                field: "eps",
                reason: format!("inner radius must be positive, got {eps}"),
            });
        }
        if !(gamma > eps && gamma <= 1.0) {
            return Err(Error::InvalidConfig {
                field: "gamma",
                reason: format!("outer radius must satisfy eps < gamma <= 1, got {gamma}"),
            });
        }
        Ok(AnnulusDomain { eps, gamma })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Derivative of the computational coordinate: `rho_r = 2/(gamma-eps)`.
    pub fn rho_r(&self) -> f64 {
        2.0 / (self.gamma - self.eps)
    }

    /// Affine map `r = (gamma+eps)/2 + (gamma-eps)/2 * rho`.
    pub fn rho_to_r(&self, rho: f64) -> f64 {
        0.5 * (self.gamma + self.eps) + 0.5 * (self.gamma - self.eps) * rho
    }

    /// Inverse of [`AnnulusDomain::rho_to_r`].
    pub fn r_to_rho(&self, r: f64) -> f64 {
        (2.0 * r - (self.gamma + self.eps)) / (self.gamma - self.eps)
    }
}

/// Dirichlet data on the outer boundary.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryStretch {
    /// `u0(x) = (lambda1 x1, lambda2 x2)` on `|x| = gamma`.
    Principal { lambda1: f64, lambda2: f64 },
    /// Direct tabulation of `(P_0, Q_0)` at the angular nodes.
    Tabulated { p0: Vec<f64>, q0: Vec<f64> },
}

impl BoundaryStretch {
    pub fn principal(lambda1: f64, lambda2: f64) -> Result<Self> {
        if !(lambda1 > 1.0) || !(lambda2 > 1.0) {
            return Err(Error::InvalidConfig {
                field: "lambda",
                reason: format!("principal stretches must exceed 1, got ({lambda1}, {lambda2})"),
            });
        }
        Ok(BoundaryStretch::Principal { lambda1, lambda2 })
    }

    /// Boundary samples `(P_0(1, phi_n), Q_0(1, phi_n))` at `phi_n = 2 pi n / N`.
    pub fn samples(&self, n: usize, gamma: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        match self {
            BoundaryStretch::Principal { lambda1, lambda2 } => {
                let mut p0 = Vec::with_capacity(n);
                let mut q0 = Vec::with_capacity(n);
                for i in 0..n {
                    let phi = 2.0 * PI * i as f64 / n as f64;
                    let (c, s) = (phi.cos(), phi.sin());
                    p0.push(gamma * ((lambda1 * c).powi(2) + (lambda2 * s).powi(2)).sqrt());
                    let theta = (lambda2 * s).atan2(lambda1 * c);
                    q0.push(wrap_angle(theta - phi));
                }
                Ok((p0, q0))
            }
            BoundaryStretch::Tabulated { p0, q0 } => {
                if p0.len() != n || q0.len() != n {
                    return Err(Error::ShapeMismatch {
                        what: "boundary tabulation",
                        expected: format!("{n}"),
                        got: format!("{}/{}", p0.len(), q0.len()),
                    });
                }
                Ok((p0.clone(), q0.clone()))
            }
        }
    }
}

/// Wrap an angle difference into `(-pi, pi]`.
fn wrap_angle(mut d: f64) -> f64 {
    while d > PI {
        d -= 2.0 * PI;
    }
    while d <= -PI {
        d += 2.0 * PI;
    }
    d
}

/// Pointwise invariants `(D, F)` from a field jet.
pub fn kinematics(jet: &FieldJet, domain: &AnnulusDomain, rho: f64) -> Result<(f64, f64)> {
    let r = domain.rho_to_r(rho);
    if r <= 0.0 {
        return Err(Error::OutOfDomain {
            what: "radius",
            value: r,
        });
    }
    Ok(kinematics_at_radius(jet, domain.rho_r(), r))
}

#[inline]
pub(crate) fn kinematics_at_radius(jet: &FieldJet, rho_r: f64, r: f64) -> (f64, f64) {
    let qp1 = jet.q_phi + 1.0;
    let d = rho_r / r * jet.p * (jet.p_rho * qp1 - jet.p_phi * jet.q_rho);
    let f = 0.5 * rho_r * rho_r * (jet.p_rho * jet.p_rho + jet.p * jet.p * jet.q_rho * jet.q_rho)
        + 0.5 / (r * r) * (jet.p_phi * jet.p_phi + jet.p * jet.p * qp1 * qp1);
    (d, f)
}

/// Extrema of `D` and `2 r^2 F` over the quadrature grid. These are the
/// quantities whose uniform bounds the error analysis assumes; the solver
/// logs them as runtime diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct H2Diagnostics {
    pub min_d: f64,
    pub max_d: f64,
    pub min_2r2f: f64,
    pub max_2r2f: f64,
}

pub fn h2_diagnostics(
    field: &SpectralField,
    domain: &AnnulusDomain,
    rule: &QuadratureRule,
) -> H2Diagnostics {
    let jets = field.eval_field_grid(rule);
    let n_ang = rule.angular_count();
    let rho_r = domain.rho_r();
    let mut diag = H2Diagnostics {
        min_d: f64::INFINITY,
        max_d: f64::NEG_INFINITY,
        min_2r2f: f64::INFINITY,
        max_2r2f: f64::NEG_INFINITY,
    };
    for (mi, &rho) in rule.chebyshev_nodes.iter().enumerate() {
        let r = domain.rho_to_r(rho);
        for ni in 0..n_ang {
            let (d, f) = kinematics_at_radius(&jets[mi * n_ang + ni], rho_r, r);
            let two_r2f = 2.0 * r * r * f;
            diag.min_d = diag.min_d.min(d);
            diag.max_d = diag.max_d.max(d);
            diag.min_2r2f = diag.min_2r2f.min(two_r2f);
            diag.max_2r2f = diag.max_2r2f.max(two_r2f);
        }
    }
    diag
}
