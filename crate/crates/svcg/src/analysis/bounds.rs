//! Closed-form upper bounds: approximate price of anarchy, potential
//! stretch, the limited stretch used by the solver schedule, and the
//! solver's advertised approximation factor.
//!
//! All forms are driven by `r = 2^(1/(d+1))`; their denominators
//! `2^(-d/(d+1)) (1+rho) - rho = (r/2)(1+rho) - rho` nearly cancel as `rho`
//! approaches the admissible limit, so evaluation runs in double-double
//! arithmetic and rounds once at the end.
//!
//! The limited-stretch factor `(d+1)^2 (d+3) / 8` is derived through the
//! Shapley/proportional sandwich, whose proof needs class degree >= 1 (for
//! degree-0 games the two sharing rules coincide). A degree-0 game is a
//! member of the degree-1 class, so the limited bound and the sandwich
//! factors are evaluated at `max(d, 1)`.

use serde::Serialize;

use crate::numeric::{root_of_two, Dd};
use crate::{Error, Result};

fn clamp_class_degree(d: usize) -> usize {
    d.max(1)
}

/// `lambda = 2^(d/(d+1)) * (2^(1/(d+1)) - 1)^(-d)` from the smoothness
/// argument behind the PoA bound.
pub fn smoothness_lambda(d: usize) -> f64 {
    let r = root_of_two(d + 1);
    let two_over_r = Dd::from_f64(2.0).div(r);
    let base = r.sub(Dd::from_f64(1.0));
    two_over_r.div(base.powi(d)).value()
}

/// `mu = 2^(d/(d+1)) - 1`, the self term of the same smoothness argument.
pub fn smoothness_mu(d: usize) -> f64 {
    let r = root_of_two(d + 1);
    Dd::from_f64(2.0).div(r).sub(Dd::from_f64(1.0)).value()
}

fn poa_bound_dd(rho: f64, d: usize) -> Option<Dd> {
    if rho < 1.0 {
        return None;
    }
    let r = root_of_two(d + 1);
    let rho_dd = Dd::from_f64(rho);
    // (r/2)(1 + rho) - rho
    let den = r
        .mul(Dd::from_f64(0.5))
        .mul(Dd::from_f64(1.0).add(rho_dd))
        .sub(rho_dd);
    if !den.is_positive() {
        return None;
    }
    let num = rho_dd.div(r.sub(Dd::from_f64(1.0)).powi(d));
    Some(num.div(den))
}

/// Largest `rho` (exclusive) for which the bounds at degree `d` are finite:
/// `1 / (2^(d/(d+1)) - 1)`; unbounded at `d = 0`.
pub fn rho_admissible_limit(d: usize) -> f64 {
    if d == 0 {
        return f64::INFINITY;
    }
    let r = root_of_two(d + 1);
    Dd::from_f64(2.0)
        .div(r)
        .sub(Dd::from_f64(1.0))
        .recip()
        .value()
}

/// Upper bound on the rho-approximate price of anarchy:
/// `rho (2^(1/(d+1)) - 1)^(-d) / (2^(-d/(d+1)) (1+rho) - rho)`.
pub fn poa_bound(rho: f64, d: usize) -> Result<f64> {
    poa_bound_dd(rho, d)
        .map(|v| v.value())
        .ok_or(Error::RhoOutOfRange { rho, degree: d })
}

/// Upper bound on the rho-stretch: `(d+1)` times the PoA bound.
pub fn stretch_bound(rho: f64, d: usize) -> Result<f64> {
    poa_bound_dd(rho, d)
        .map(|v| v.mul(Dd::from_f64((d + 1) as f64)).value())
        .ok_or(Error::RhoOutOfRange { rho, degree: d })
}

fn limited_stretch_bound_dd(rho: f64, d: usize) -> Option<Dd> {
    let dc = clamp_class_degree(d);
    let factor = ((dc + 1) * (dc + 1) * (dc + 3)) as f64 / 8.0;
    poa_bound_dd(rho, dc).map(|v| v.mul(Dd::from_f64(factor)))
}

/// Upper bound on the D-limited rho-stretch:
/// `(d+1)^2 (d+3) / 8` times the PoA bound, at class degree `max(d, 1)`.
pub fn limited_stretch_bound(rho: f64, d: usize) -> Result<f64> {
    limited_stretch_bound_dd(rho, d)
        .map(|v| v.value())
        .ok_or(Error::RhoOutOfRange {
            rho,
            degree: clamp_class_degree(d),
        })
}

/// The solver's approximation factor for improvement parameter `gamma`:
/// `((1 + gamma^2) / (1 - gamma)) * (1/theta - 2 gamma)^(-1)` with
/// `theta = limited_stretch_bound(1 + gamma, d)`.
pub fn alpha_of(gamma: f64, d: usize) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Precondition(format!(
            "gamma must lie in (0, 1), got {gamma}"
        )));
    }
    let theta = limited_stretch_bound_dd(1.0 + gamma, d).ok_or(Error::GammaTooLarge {
        gamma,
        degree: d,
        max_admissible: max_admissible_gamma(d),
    })?;
    let g = Dd::from_f64(gamma);
    let den = theta.recip().sub(g.add(g));
    if !den.is_positive() {
        return Err(Error::GammaTooLarge {
            gamma,
            degree: d,
            max_admissible: max_admissible_gamma(d),
        });
    }
    let num = Dd::from_f64(1.0)
        .add(g.mul(g))
        .div(Dd::from_f64(1.0).sub(g));
    Ok(num.div(den).value())
}

fn gamma_feasible(gamma: f64, d: usize) -> bool {
    match limited_stretch_bound_dd(1.0 + gamma, d) {
        None => false,
        Some(theta) => theta.recip().sub(Dd::from_f64(2.0 * gamma)).is_positive(),
    }
}

/// Largest gamma satisfying `gamma < 1/(2 theta(1+gamma))`, found by
/// bisection; `1/theta(1+gamma) - 2 gamma` is strictly decreasing in gamma.
pub fn max_admissible_gamma(d: usize) -> f64 {
    let dc = clamp_class_degree(d);
    let mut lo = 0.0f64;
    let mut hi = (rho_admissible_limit(dc) - 1.0).min(1.0);
    debug_assert!(!gamma_feasible(hi, d));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gamma_feasible(mid, d) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// The full set of closed-form values at one `(rho, d)`.
#[derive(Clone, Debug, Serialize)]
pub struct BoundValues {
    pub d: usize,
    pub rho: f64,
    pub lambda: f64,
    pub mu_smooth: f64,
    pub poa_bound: f64,
    pub stretch_bound: f64,
    pub limited_stretch_bound: f64,
}

impl BoundValues {
    pub fn compute(rho: f64, d: usize) -> Result<Self> {
        Ok(BoundValues {
            d,
            rho,
            lambda: smoothness_lambda(d),
            mu_smooth: smoothness_mu(d),
            poa_bound: poa_bound(rho, d)?,
            stretch_bound: stretch_bound(rho, d)?,
            limited_stretch_bound: limited_stretch_bound(rho, d)?,
        })
    }
}

/// Shapley-to-proportional equilibrium transfer factor
/// `(d+3)(d+1)/8`, at class degree `max(d, 1)`.
pub fn transfer_factor(d: usize) -> f64 {
    let dc = clamp_class_degree(d);
    ((dc + 3) * (dc + 1)) as f64 / 8.0
}

/// Lower sandwich factor `2/(d+1)`: `chi_prop >= 2/(d+1) * chi`.
pub fn sandwich_lower_factor(d: usize) -> f64 {
    2.0 / (clamp_class_degree(d) + 1) as f64
}

/// Upper sandwich factor `(d+3)/4`: `chi_prop <= (d+3)/4 * chi`.
pub fn sandwich_upper_factor(d: usize) -> f64 {
    (clamp_class_degree(d) + 3) as f64 / 4.0
}
