//! Rational self-maps of the Riemann sphere, the unit-circle reflection
//! symmetry `R(z)·conj(R(1/z̄)) ≡ 1`, and the Blaschke-product normal form
//! that symmetry forces.

use thiserror::Error;

use crate::poly::{Poly, PolyError};
use crate::C64;

/// Relative tolerance at which a shared root of numerator and denominator is
/// cancelled. Frames with a unit-modulus diagonal entry produce exactly
/// cancelling factors.
pub const CANCEL_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum RationalError {
    #[error("denominator must be a nonzero polynomial")]
    ZeroDenominator,
    #[error("root finding failed: {0}")]
    Roots(#[from] PolyError),
    #[error("sample too close to a zero or pole of the map")]
    SampleAtSingularity,
    #[error("map is not of Blaschke form: {0}")]
    NotBlaschkeForm(String),
}

/// A point of ℂ ∪ {∞}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpherePoint {
    Finite(C64),
    Infinity,
}

impl SpherePoint {
    pub fn is_infinity(&self) -> bool {
        matches!(self, SpherePoint::Infinity)
    }

    pub fn finite(&self) -> Option<C64> {
        match self {
            SpherePoint::Finite(z) => Some(*z),
            SpherePoint::Infinity => None,
        }
    }

    /// Modulus, `f64::INFINITY` at the point at infinity.
    pub fn norm(&self) -> f64 {
        match self {
            SpherePoint::Finite(z) => z.norm(),
            SpherePoint::Infinity => f64::INFINITY,
        }
    }

    /// Distance of two sphere points, comparing infinities as equal.
    pub fn dist(&self, other: &SpherePoint) -> f64 {
        match (self, other) {
            (SpherePoint::Finite(a), SpherePoint::Finite(b)) => (a - b).norm(),
            (SpherePoint::Infinity, SpherePoint::Infinity) => 0.0,
            _ => f64::INFINITY,
        }
    }
}

impl From<C64> for SpherePoint {
    fn from(z: C64) -> Self {
        SpherePoint::Finite(z)
    }
}

/// Rational map `num/den` with the denominator kept monic and common roots
/// cancelled at construction.
///
/// A zero numerator represents the constant zero map (degree 0); component
/// functions forced to vanish by the frame structure use it.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalMap {
    num: Poly,
    den: Poly,
}

impl RationalMap {
    pub fn new(num: Poly, den: Poly) -> Result<Self, RationalError> {
        if den.is_zero() {
            return Err(RationalError::ZeroDenominator);
        }
        if num.is_zero() {
            return Ok(RationalMap {
                num,
                den: Poly::one(),
            });
        }
        let (num, den) = cancel_common_roots(num, den)?;
        let lead = den.leading();
        Ok(RationalMap {
            num: num.scale(C64::new(1.0, 0.0) / lead),
            den: den.scale(C64::new(1.0, 0.0) / lead),
        })
    }

    /// The identity map z ↦ z.
    pub fn identity() -> Self {
        RationalMap {
            num: Poly::var(),
            den: Poly::one(),
        }
    }

    /// The constant zero map.
    pub fn zero() -> Self {
        RationalMap {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    pub fn is_zero_map(&self) -> bool {
        self.num.is_zero()
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    /// Degree as a branched cover of the sphere: max of the two polynomial
    /// degrees.
    pub fn degree(&self) -> usize {
        self.num.degree().max(self.den.degree())
    }

    /// Evaluation as a map of the sphere: poles and the point at infinity get
    /// their limit values instead of raising floating-point exceptions.
    pub fn eval(&self, z: SpherePoint) -> SpherePoint {
        match z {
            SpherePoint::Infinity => {
                use std::cmp::Ordering::*;
                match self.num.degree().cmp(&self.den.degree()) {
                    Greater => SpherePoint::Infinity,
                    Less => SpherePoint::Finite(C64::new(0.0, 0.0)),
                    Equal => SpherePoint::Finite(self.num.leading() / self.den.leading()),
                }
            }
            SpherePoint::Finite(z) => {
                let d = self.den.eval(z);
                if d.norm_sqr() == 0.0 {
                    return SpherePoint::Infinity;
                }
                let v = self.num.eval(z) / d;
                if v.re.is_finite() && v.im.is_finite() {
                    SpherePoint::Finite(v)
                } else {
                    SpherePoint::Infinity
                }
            }
        }
    }

    /// Finite evaluation; callers that know the point is not a pole.
    pub fn eval_finite(&self, z: C64) -> C64 {
        match self.eval(SpherePoint::Finite(z)) {
            SpherePoint::Finite(v) => v,
            SpherePoint::Infinity => C64::new(f64::INFINITY, 0.0),
        }
    }

    /// Derivative as a rational map: `(n'd − nd')/d²`.
    pub fn derivative(&self) -> RationalMap {
        let np = self.num.derivative();
        let dp = self.den.derivative();
        let num = np.mul(&self.den).sub(&self.num.mul(&dp));
        RationalMap {
            num,
            den: self.den.mul(&self.den),
        }
    }

    /// Numerator of the derivative, `n'd − nd'`; its zeros are the finite
    /// critical points.
    pub fn derivative_numerator(&self) -> Poly {
        let w = self
            .num
            .derivative()
            .mul(&self.den)
            .sub(&self.num.mul(&self.den.derivative()));
        // equal-degree maps cancel the leading term exactly in theory
        w.trim_relative(1e-12)
    }

    /// Finite poles with multiplicity clusters.
    pub fn poles(&self) -> Result<Vec<(C64, usize)>, RationalError> {
        if self.den.degree() == 0 {
            return Ok(Vec::new());
        }
        Ok(self.den.clustered_roots()?)
    }

    /// Finite zeros with multiplicity clusters.
    pub fn zeros(&self) -> Result<Vec<(C64, usize)>, RationalError> {
        if self.num.is_zero() || self.num.degree() == 0 {
            return Ok(Vec::new());
        }
        Ok(self.num.clustered_roots()?)
    }

    /// Max coefficient distance to another map after aligning on monic
    /// denominators (both representations are already kept that way).
    pub fn coefficient_distance(&self, other: &RationalMap) -> f64 {
        let mut dist: f64 = 0.0;
        let nn = self.num.coeffs().len().max(other.num.coeffs().len());
        for k in 0..nn {
            dist = dist.max((self.num.coeff(k) - other.num.coeff(k)).norm());
        }
        let nd = self.den.coeffs().len().max(other.den.coeffs().len());
        for k in 0..nd {
            dist = dist.max((self.den.coeff(k) - other.den.coeff(k)).norm());
        }
        dist
    }

    /// Max over the samples of `|R(z)·conj(R(1/z̄)) − 1|`.
    ///
    /// Maps carrying the unit-circle reflection symmetry return values at
    /// rounding level; a failure of the symmetry shows up as O(1).
    pub fn circle_symmetry_residual(&self, samples: &[C64]) -> Result<f64, RationalError> {
        let mut worst: f64 = 0.0;
        for &z in samples {
            if z.norm_sqr() == 0.0 {
                return Err(RationalError::SampleAtSingularity);
            }
            let zi = C64::new(1.0, 0.0) / z.conj();
            let a = self.eval(SpherePoint::Finite(z));
            let b = self.eval(SpherePoint::Finite(zi));
            let (a, b) = match (a.finite(), b.finite()) {
                (Some(a), Some(b)) => (a, b),
                _ => return Err(RationalError::SampleAtSingularity),
            };
            // a value at a zero makes the product degenerate 0·∞
            if a.norm() < 1e-12 || a.norm() > 1e12 || b.norm() < 1e-12 || b.norm() > 1e12 {
                return Err(RationalError::SampleAtSingularity);
            }
            worst = worst.max((a * b.conj() - C64::new(1.0, 0.0)).norm());
        }
        Ok(worst)
    }

    /// Default sample ring for symmetry checks, nudged off zeros and poles.
    pub fn symmetry_samples(&self) -> Vec<C64> {
        for radius in [0.7, 0.73, 0.77, 0.81, 0.67] {
            let samples: Vec<C64> = (0..32)
                .map(|k| {
                    let t = 2.0 * std::f64::consts::PI * (k as f64 + 0.37) / 32.0;
                    C64::new(radius * t.cos(), radius * t.sin())
                })
                .collect();
            if self.circle_symmetry_residual(&samples).is_ok() {
                return samples;
            }
        }
        Vec::new()
    }

    /// Decompose a symmetric map fixing the origin into its Blaschke data.
    pub fn to_blaschke(&self) -> Result<BlaschkeForm, RationalError> {
        if self.is_zero_map() {
            return Err(RationalError::NotBlaschkeForm(
                "the zero map has no Blaschke form".into(),
            ));
        }
        let samples = self.symmetry_samples();
        if samples.is_empty() {
            return Err(RationalError::NotBlaschkeForm(
                "no sample ring avoids the singularities".into(),
            ));
        }
        let sym = self.circle_symmetry_residual(&samples)?;
        if sym > 1e-8 {
            return Err(RationalError::NotBlaschkeForm(format!(
                "circle symmetry residual {sym:.3e} exceeds 1e-8"
            )));
        }
        let zeros = self.zeros()?;
        let origin = zeros
            .iter()
            .find(|(z, _)| z.norm() < 1e-8)
            .ok_or_else(|| RationalError::NotBlaschkeForm("no zero at the origin".into()))?;
        if origin.1 != 1 {
            return Err(RationalError::NotBlaschkeForm(format!(
                "zero at the origin has multiplicity {}",
                origin.1
            )));
        }
        let mut pairs = Vec::new();
        for (pole, mult) in self.poles()? {
            if pole.norm() < 1e-8 || pole.norm() > 1.0 + 1e-8 {
                return Err(RationalError::NotBlaschkeForm(format!(
                    "pole {pole} outside the closed punctured disk"
                )));
            }
            // the paired zero must actually be present
            let inv = C64::new(1.0, 0.0) / pole.conj();
            let matched = zeros
                .iter()
                .any(|(z, m)| (z - inv).norm() <= 1e-8 * inv.norm().max(1.0) && *m >= mult);
            if !matched {
                return Err(RationalError::NotBlaschkeForm(format!(
                    "pole {pole} has no circle-inverted zero partner"
                )));
            }
            for _ in 0..mult {
                pairs.push(pole);
            }
        }
        // denominator is monic, so the numerator's leading coefficient is α₀
        let alpha0 = self.num.leading();
        let form = BlaschkeForm {
            alpha0,
            pairs,
            fixed_zero_at_origin: true,
        };
        let modulus_gap =
            (alpha0.norm() - form.pairs.iter().map(|p| p.norm()).product::<f64>()).abs();
        if modulus_gap > 1e-10 {
            return Err(RationalError::NotBlaschkeForm(format!(
                "|α₀| differs from the product of pole moduli by {modulus_gap:.3e}"
            )));
        }
        let residual = self.coefficient_distance(&form.to_rational()?);
        if residual > 1e-10 {
            return Err(RationalError::NotBlaschkeForm(format!(
                "reconstruction residual {residual:.3e} exceeds 1e-10"
            )));
        }
        Ok(form)
    }
}

fn cancel_common_roots(num: Poly, den: Poly) -> Result<(Poly, Poly), RationalError> {
    if num.degree() == 0 || den.degree() == 0 {
        return Ok((num, den));
    }
    let num_roots = num.roots()?;
    let den_roots = den.roots()?;
    let mut keep_den = vec![true; den_roots.len()];
    let mut keep_num = vec![true; num_roots.len()];
    for (i, rn) in num_roots.iter().enumerate() {
        for (j, rd) in den_roots.iter().enumerate() {
            if keep_den[j] && (rn - rd).norm() <= CANCEL_TOL * rn.norm().max(1.0) {
                keep_num[i] = false;
                keep_den[j] = false;
                break;
            }
        }
    }
    if keep_num.iter().all(|&k| k) {
        return Ok((num, den));
    }
    let kept_num: Vec<C64> = num_roots
        .into_iter()
        .zip(&keep_num)
        .filter_map(|(r, &k)| k.then_some(r))
        .collect();
    let kept_den: Vec<C64> = den_roots
        .into_iter()
        .zip(&keep_den)
        .filter_map(|(r, &k)| k.then_some(r))
        .collect();
    Ok((
        Poly::from_roots(&kept_num).scale(num.leading()),
        Poly::from_roots(&kept_den).scale(den.leading()),
    ))
}

/// Blaschke-type normal form `α₀ · z · ∏ (z − 1/ᾱⱼ)/(z − αⱼ)`.
///
/// Each pair couples a pole `αⱼ` in the closed punctured disk with its
/// circle-inverted zero; `|α₀|` equals the product of the pole moduli.
#[derive(Debug, Clone, PartialEq)]
pub struct BlaschkeForm {
    pub alpha0: C64,
    /// Poles αⱼ, repeated to multiplicity. The zero 1/ᾱⱼ is implied.
    pub pairs: Vec<C64>,
    pub fixed_zero_at_origin: bool,
}

impl BlaschkeForm {
    /// Rebuild the rational map this form describes.
    pub fn to_rational(&self) -> Result<RationalMap, RationalError> {
        let inverted: Vec<C64> = self
            .pairs
            .iter()
            .map(|p| C64::new(1.0, 0.0) / p.conj())
            .collect();
        let mut num = Poly::from_roots(&inverted).scale(self.alpha0);
        if self.fixed_zero_at_origin {
            num = num.mul(&Poly::var());
        }
        let den = Poly::from_roots(&self.pairs);
        RationalMap::new(num, den)
    }

    pub fn degree(&self) -> usize {
        self.pairs.len() + usize::from(self.fixed_zero_at_origin)
    }
}
