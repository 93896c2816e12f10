//! The constant-diagonal one-parameter family of disk isometries: closed-form
//! ramification data, regime classification, rotation equivariance, the §-
//! component identity of its ball factor, and the boundary-extension report.

use thiserror::Error;

use crate::germ::{DiskIsometry, GermError};
use crate::poly::Poly;
use crate::rational::{RationalError, RationalMap};
use crate::unitary::{build_family_unitary, UnitaryError};
use crate::{c64, C64};

#[derive(Debug, Error)]
pub enum FamilyError {
    #[error("ζ must satisfy 0 < |ζ| < 1, got |ζ| = {0}")]
    InvalidZeta(f64),
    #[error("boundary extension requires 0 < |ζ| < 1/3, got |ζ| = {0}")]
    HypothesisViolated(f64),
    #[error("sample too close to a pole of the family map")]
    SampleAtSingularity,
    #[error(transparent)]
    Germ(#[from] GermError),
    #[error(transparent)]
    Unitary(#[from] UnitaryError),
    #[error(transparent)]
    Rational(#[from] RationalError),
}

/// Parameter regimes of the family, split at `|ζ| = (n−1)/(n+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Outer annulus: the free ramification pair sits on the unit circle.
    A,
    /// `|ζ| = (n−1)/(n+1)`: the pair degenerates to a double point.
    Critical,
    /// Inner punctured disk: the pair is a circle-inverted couple off the
    /// circle.
    B,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Regime::A => write!(f, "A"),
            Regime::Critical => write!(f, "critical"),
            Regime::B => write!(f, "B"),
        }
    }
}

/// Closed-form ramification data of the degree-(n+1) family map.
#[derive(Debug, Clone)]
pub struct RamificationProfile {
    pub zeta: C64,
    pub n: usize,
    pub a_plus: C64,
    pub a_minus: C64,
    pub regime: Regime,
    /// Discriminant `(n+1)²|ζ|⁴ − 2(n²+1)|ζ|² + (1−n)²`; negative exactly in
    /// the outer annulus.
    pub discriminant: f64,
}

/// Radius separating the two regimes.
pub fn critical_radius(n: usize) -> f64 {
    (n as f64 - 1.0) / (n as f64 + 1.0)
}

fn check_zeta(zeta: C64) -> Result<(), FamilyError> {
    let r = zeta.norm();
    if r > 0.0 && r < 1.0 {
        Ok(())
    } else {
        Err(FamilyError::InvalidZeta(r))
    }
}

/// The free ramification pair
/// `a± = [(n+1)|ζ|² + (1−n) ± √C] / (2ζ̄)` with the radicand taken as the
/// real number it is; a negative radicand contributes `+i√|C|` to `a₊`.
pub fn closed_form_ramification(zeta: C64, n: usize) -> Result<RamificationProfile, FamilyError> {
    check_zeta(zeta)?;
    let nf = n as f64;
    let rho2 = zeta.norm_sqr();
    let disc = (nf + 1.0) * (nf + 1.0) * rho2 * rho2 - 2.0 * (nf * nf + 1.0) * rho2
        + (1.0 - nf) * (1.0 - nf);
    let sqrt_disc = if disc >= 0.0 {
        c64(disc.sqrt(), 0.0)
    } else {
        c64(0.0, (-disc).sqrt())
    };
    let base = c64((nf + 1.0) * rho2 + (1.0 - nf), 0.0);
    let denom = 2.0 * zeta.conj();
    let a_plus = (base + sqrt_disc) / denom;
    let a_minus = (base - sqrt_disc) / denom;
    let rc = critical_radius(n);
    let rho = rho2.sqrt();
    let regime = if (rho - rc).abs() < 1e-12 {
        Regime::Critical
    } else if rho > rc {
        Regime::A
    } else {
        Regime::B
    };
    Ok(RamificationProfile {
        zeta,
        n,
        a_plus,
        a_minus,
        regime,
        discriminant: disc,
    })
}

/// The family map `z·((ζ̄z−1)/(z−ζ))ⁿ` as an explicit rational map.
pub fn family_rational(zeta: C64, n: usize) -> Result<RationalMap, FamilyError> {
    check_zeta(zeta)?;
    let lin = Poly::new(vec![c64(-1.0, 0.0), zeta.conj()]);
    let pole = Poly::new(vec![-zeta, c64(1.0, 0.0)]);
    let mut num = Poly::var();
    let mut den = Poly::one();
    for _ in 0..n {
        num = num.mul(&lin);
        den = den.mul(&pole);
    }
    Ok(RationalMap::new(num, den)?)
}

/// Solve the family isometry for the given parameter.
pub fn family_map(zeta: C64, n: usize) -> Result<DiskIsometry, FamilyError> {
    check_zeta(zeta)?;
    let frame = build_family_unitary(zeta, n)?;
    Ok(DiskIsometry::solve(&frame)?)
}

/// Max over samples of
/// `|R_{ζe^{iθ}}(z) − e^{−i(n−1)θ} R_ζ(e^{−iθ} z)|`,
/// which vanishes identically: rotating the parameter only rotates the map.
pub fn rotation_equivariance_residual(
    zeta: C64,
    theta: f64,
    n: usize,
    samples: &[C64],
) -> Result<f64, FamilyError> {
    check_zeta(zeta)?;
    let rotated_param = zeta * C64::from_polar(1.0, theta);
    let r_rot = family_rational(rotated_param, n)?;
    let r = family_rational(zeta, n)?;
    let post = C64::from_polar(1.0, -(n as f64 - 1.0) * theta);
    let pre = C64::from_polar(1.0, -theta);
    let mut worst: f64 = 0.0;
    for &z in samples {
        let lhs = r_rot.eval(z.into());
        let rhs = r.eval((pre * z).into());
        let (lhs, rhs) = match (lhs.finite(), rhs.finite()) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(FamilyError::SampleAtSingularity),
        };
        if lhs.norm() > 1e10 || rhs.norm() > 1e10 {
            return Err(FamilyError::SampleAtSingularity);
        }
        worst = worst.max((lhs - post * rhs).norm());
    }
    Ok(worst)
}

/// Max over samples in Δ of the closed-form identity for the trailing ball
/// component of the n = 2 family:
/// `f₂,₂(w) = √(1−|ζ|²) · f₁(w) / (f₁(w) − ζ)`.
pub fn second_component_residual(zeta: C64, samples: &[C64]) -> Result<f64, FamilyError> {
    check_zeta(zeta)?;
    let iso = family_map(zeta, 2)?;
    let s = (1.0 - zeta.norm_sqr()).sqrt();
    let mut worst: f64 = 0.0;
    for &w in samples {
        let p = iso.evaluate(w)?;
        let rhs = s * p.disk / (p.disk - zeta);
        worst = worst.max((p.ball[1] - rhs).norm());
    }
    Ok(worst)
}

/// Everything the boundary-extension verification measures for an n = 2
/// family parameter with `0 < |ζ| < 1/3`.
#[derive(Debug, Clone)]
pub struct ExtensionReport {
    pub zeta: C64,
    pub eps: f64,
    /// The two finite nonzero branch values `R(a±)`.
    pub branch_values: [C64; 2],
    /// `min | |b| − 1 |` over the finite branch values: how far the branch
    /// locus stays from the unit circle.
    pub circle_margin: f64,
    pub margin_ok: bool,
    /// Worst `|R(f₁(w)) − w|` over the continuation targets `|w| = 1+ε`.
    pub continuation_max_residual: f64,
    /// Directions (radians) where continuation to `1+ε` failed outright.
    pub continuation_failures: Vec<f64>,
    pub continuation_ok: bool,
    /// `max |f₁|` over the unit circle; the image of the closed disk must be
    /// a compact subset of the open disk.
    pub sup_f1_on_circle: f64,
    pub compact_image_ok: bool,
    /// Min distance from `f₁(∂Δ)` to the poles of the component rationals.
    pub min_pole_distance: f64,
    pub pole_clearance_ok: bool,
    /// Whether the two branch values coincide numerically.
    pub branch_values_coincide: bool,
}

impl ExtensionReport {
    pub fn passed(&self) -> bool {
        self.margin_ok && self.continuation_ok && self.compact_image_ok && self.pole_clearance_ok
    }
}

/// Number of boundary directions sampled by the extension check.
const EXTENSION_DIRECTIONS: usize = 64;

/// Verify that the n = 2 family member extends past the closed disk:
/// branch values clear of the unit circle (floor: 10 machine epsilons, the
/// measured margin is reported), continuation out to `|w| = 1+ε`, compact
/// image of the closed disk, and component poles never approached.
pub fn boundary_extension_check(zeta: C64, eps: f64) -> Result<ExtensionReport, FamilyError> {
    check_zeta(zeta)?;
    let rho = zeta.norm();
    if rho >= 1.0 / 3.0 {
        return Err(FamilyError::HypothesisViolated(rho));
    }
    let profile = closed_form_ramification(zeta, 2)?;
    let iso = family_map(zeta, 2)?;
    let r = iso.rational();
    let eval_branch = |a: C64| match r.eval(a.into()).finite() {
        Some(v) => v,
        None => c64(f64::INFINITY, 0.0),
    };
    let b_plus = eval_branch(profile.a_plus);
    let b_minus = eval_branch(profile.a_minus);
    let circle_margin = (b_plus.norm() - 1.0)
        .abs()
        .min((b_minus.norm() - 1.0).abs());
    let margin_ok = circle_margin > 10.0 * f64::EPSILON;

    let outer = 1.0 + eps;
    let mut continuation_max_residual: f64 = 0.0;
    let mut continuation_failures = Vec::new();
    let mut sup_f1_on_circle: f64 = 0.0;
    let mut min_pole_distance = f64::INFINITY;
    let mut poles: Vec<C64> = Vec::new();
    for comp in iso.components() {
        for (p, _) in comp.poles()? {
            poles.push(p);
        }
    }
    for k in 0..EXTENSION_DIRECTIONS {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / EXTENSION_DIRECTIONS as f64;
        let dir = C64::from_polar(1.0, theta);
        let mut ev = iso.evaluator();
        // unit circle first: the cache carries the ray outward
        match ev.evaluate_capped(dir, outer + 1e-9) {
            Ok(p) => {
                sup_f1_on_circle = sup_f1_on_circle.max(p.disk.norm());
                for pole in &poles {
                    min_pole_distance = min_pole_distance.min((p.disk - pole).norm());
                }
            }
            Err(_) => {
                continuation_failures.push(theta);
                continue;
            }
        }
        match ev.evaluate_capped(dir * outer, outer + 1e-9) {
            Ok(p) => {
                let res = (r.eval_finite(p.disk) - dir * outer).norm();
                continuation_max_residual = continuation_max_residual.max(res);
            }
            Err(_) => continuation_failures.push(theta),
        }
    }
    let continuation_ok = continuation_failures.is_empty() && continuation_max_residual < 1e-9;
    let compact_image_ok = sup_f1_on_circle < 1.0;
    let pole_clearance_ok = min_pole_distance >= 1e-6;
    Ok(ExtensionReport {
        zeta,
        eps,
        branch_values: [b_plus, b_minus],
        circle_margin,
        margin_ok,
        continuation_max_residual,
        continuation_failures,
        continuation_ok,
        sup_f1_on_circle,
        compact_image_ok,
        min_pole_distance,
        pole_clearance_ok,
        branch_values_coincide: (b_plus - b_minus).norm() < 1e-8,
    })
}
