//! Solving the defining system of a unitary frame: the rational function `R`
//! with `R(f₁(w)) = w`, the component rationals, the degenerate linear case,
//! and evaluation of the isometry on the disk by predictor–corrector
//! continuation along radial segments.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::poly::Poly;
use crate::rational::{RationalError, RationalMap};
use crate::series::Series;
use crate::unitary::{UnitaryError, UnitaryFrame};
use crate::{c64, C64};

/// Frames with `|det U''|` below this are solved by the degenerate branch.
pub const DEGENERACY_TOL: f64 = 1e-12;
/// Newton convergence for the corrector: `|R(f) − τ| < NEWTON_TOL · (1+|τ|)`.
pub const NEWTON_TOL: f64 = 1e-13;
/// Continuation aborts when the step underflows this floor.
pub const STEP_FLOOR: f64 = 1e-6;
/// Continuation aborts when the path passes this close to a critical point.
pub const CRITICAL_CLEARANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum GermError {
    #[error("frame is degenerate (det U'' ≈ 0); use the degenerate solver")]
    DegenerateFrame,
    #[error("analytic continuation failed near f = {at} (step {step:.2e}, near critical point: {near_critical})")]
    ContinuationFailure {
        at: C64,
        step: f64,
        near_critical: bool,
    },
    #[error("|w| = {norm} is outside the evaluation radius {cap}")]
    OutsideDomain { norm: f64, cap: f64 },
    #[error("determinant formulas disagree (coefficient residual {residual:.3e})")]
    CrossCheck { residual: f64 },
    #[error(transparent)]
    Rational(#[from] RationalError),
    #[error(transparent)]
    Unitary(#[from] UnitaryError),
}

/// Interpolate the polynomial `z ↦ det(build(z))` of known degree bound by
/// sampling at roots of unity and inverting the DFT. Exact for determinant
/// pencils, and the Vandermonde system on the unit circle is perfectly
/// conditioned.
fn det_poly<F: Fn(C64) -> DMatrix<C64>>(build: F, degree: usize) -> Poly {
    let k = degree + 1;
    let samples: Vec<C64> = (0..k)
        .map(|j| {
            let t = 2.0 * std::f64::consts::PI * j as f64 / k as f64;
            build(C64::from_polar(1.0, t)).determinant()
        })
        .collect();
    let mut coeffs = vec![c64(0.0, 0.0); k];
    for (idx, c) in coeffs.iter_mut().enumerate() {
        let mut acc = c64(0.0, 0.0);
        for (j, s) in samples.iter().enumerate() {
            let t = -2.0 * std::f64::consts::PI * (idx * j) as f64 / k as f64;
            acc += s * C64::from_polar(1.0, t);
        }
        *c = acc / k as f64;
    }
    Poly::new(coeffs).trim_relative(1e-13)
}

/// `det(U'' − z·I)`, the common denominator of `R` and the components.
fn lower_block_charpoly(frame: &UnitaryFrame) -> Poly {
    let n = frame.ball_dim();
    let block = frame.lower_block();
    det_poly(
        |z| {
            let mut m = block.clone();
            for i in 0..n {
                m[(i, i)] -= z;
            }
            m
        },
        n,
    )
}

/// The rational function with `R(f₁(w)) = w`, built from the determinant
/// formula `R(z) = z·det(U − z·diag(0, I)) / det(U'' − z·I)` and cross-checked
/// against the equivalent bordered-block formula.
pub fn rational_from_unitary(frame: &UnitaryFrame) -> Result<RationalMap, GermError> {
    let (r, residual) = rational_with_cross_check(frame)?;
    if residual > 1e-10 {
        return Err(GermError::CrossCheck { residual });
    }
    Ok(r)
}

/// Primary determinant formula together with the coefficient residual against
/// the bordered-block formula.
pub fn rational_with_cross_check(frame: &UnitaryFrame) -> Result<(RationalMap, f64), GermError> {
    if frame.lower_block_det().norm() <= DEGENERACY_TOL {
        return Err(GermError::DegenerateFrame);
    }
    let n = frame.ball_dim();
    let u = frame.entries();
    let num_det = det_poly(
        |z| {
            let mut m = u.clone();
            for i in 1..=n {
                m[(i, i)] -= z;
            }
            m
        },
        n,
    );
    let den = lower_block_charpoly(frame);
    let num = Poly::var().mul(&num_det);
    let r = RationalMap::new(num, den)?;
    let alt = bordered_block_map(frame)?;
    let residual = r.coefficient_distance(&alt);
    Ok((r, residual))
}

/// The equivalent formula through the rank-one border correction:
/// `R(z) = z·u₁₁·det(U'' − u₁₁⁻¹·col·row − z·I) / det(U'' − z·I)`.
pub fn bordered_block_map(frame: &UnitaryFrame) -> Result<RationalMap, GermError> {
    if frame.lower_block_det().norm() <= DEGENERACY_TOL {
        return Err(GermError::DegenerateFrame);
    }
    let n = frame.ball_dim();
    let u = frame.entries();
    let u11 = u[(0, 0)];
    let mut corrected = frame.lower_block();
    for i in 0..n {
        for j in 0..n {
            corrected[(i, j)] -= u[(i + 1, 0)] * u[(0, j + 1)] / u11;
        }
    }
    let num_det = det_poly(
        |z| {
            let mut m = corrected.clone();
            for i in 0..n {
                m[(i, i)] -= z;
            }
            m
        },
        n,
    );
    let num = Poly::var().mul(&num_det).scale(u11);
    let den = lower_block_charpoly(frame);
    Ok(RationalMap::new(num, den)?)
}

/// Component rationals by Cramer's rule on `(U'' − z·I)·x = −z·u_col`, one
/// determinant per component, all over the common characteristic denominator.
pub fn component_rationals(frame: &UnitaryFrame) -> Result<Vec<RationalMap>, GermError> {
    if frame.lower_block_det().norm() <= DEGENERACY_TOL {
        return Err(GermError::DegenerateFrame);
    }
    let n = frame.ball_dim();
    let u = frame.entries();
    let block = frame.lower_block();
    let den = lower_block_charpoly(frame);
    let mut out = Vec::with_capacity(n);
    for comp in 0..n {
        let num = det_poly(
            |z| {
                let mut m = block.clone();
                for i in 0..n {
                    m[(i, i)] -= z;
                }
                for i in 0..n {
                    m[(i, comp)] = -z * u[(i + 1, 0)];
                }
                m
            },
            n,
        );
        out.push(RationalMap::new(num, den.clone())?);
    }
    Ok(out)
}

/// A point of the target Δ × 𝔹ⁿ.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetPoint {
    pub disk: C64,
    pub ball: Vec<C64>,
}

impl TargetPoint {
    pub fn ball_norm_sqr(&self) -> f64 {
        self.ball.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Residuals of the functional equation and the defining system over a grid.
#[derive(Debug, Clone)]
pub struct ResidueReport {
    /// `(w, functional residual, defining residual)` per sample.
    pub samples: Vec<(C64, f64, f64)>,
    pub max_functional: f64,
    pub max_defining: f64,
}

/// A solved isometry germ: the frame, the rational data, and everything the
/// evaluator needs to continue `f₁` along radial segments.
#[derive(Debug, Clone)]
pub struct DiskIsometry {
    frame: UnitaryFrame,
    r: RationalMap,
    components: Vec<RationalMap>,
    degenerate: bool,
    num_d: Poly,
    den_d: Poly,
    critical_points: Vec<C64>,
}

impl DiskIsometry {
    /// Solve the defining system of a frame, routing degenerate frames to the
    /// linear solver.
    pub fn solve(frame: &UnitaryFrame) -> Result<Self, GermError> {
        if frame.lower_block_det().norm() <= DEGENERACY_TOL {
            return Ok(Self::solve_degenerate(frame));
        }
        let r = rational_from_unitary(frame)?;
        let components = component_rationals(frame)?;
        Ok(Self::assemble(frame.clone(), r, components, false))
    }

    /// Degenerate branch: `f₁ ≡ 0` and the ball components are the linear map
    /// `Uᴴ(w, 0, …, 0)`.
    pub fn solve_degenerate(frame: &UnitaryFrame) -> Self {
        let n = frame.ball_dim();
        let u = frame.entries();
        // (U⁻¹)_{j+1,1} = conj(u_{1,j+1}) for unitary U
        let components: Vec<RationalMap> = (0..n)
            .map(|j| {
                let slope = u[(0, j + 1)].conj();
                RationalMap::new(Poly::new(vec![c64(0.0, 0.0), slope]), Poly::one())
                    .expect("linear map construction")
            })
            .collect();
        Self::assemble(frame.clone(), RationalMap::zero(), components, true)
    }

    /// Rebuild from stored parts (deserialization path). Derived data is
    /// recomputed from the rational maps.
    pub fn from_parts(
        frame: UnitaryFrame,
        r: RationalMap,
        components: Vec<RationalMap>,
        degenerate: bool,
    ) -> Self {
        Self::assemble(frame, r, components, degenerate)
    }

    fn assemble(
        frame: UnitaryFrame,
        r: RationalMap,
        components: Vec<RationalMap>,
        degenerate: bool,
    ) -> Self {
        let num_d = r.num().derivative();
        let den_d = r.den().derivative();
        let critical_points = if degenerate {
            Vec::new()
        } else {
            let w = r.derivative_numerator();
            if w.degree() == 0 {
                Vec::new()
            } else {
                w.roots().unwrap_or_default()
            }
        };
        DiskIsometry {
            frame,
            r,
            components,
            degenerate,
            num_d,
            den_d,
            critical_points,
        }
    }

    pub fn frame(&self) -> &UnitaryFrame {
        &self.frame
    }

    pub fn rational(&self) -> &RationalMap {
        &self.r
    }

    pub fn components(&self) -> &[RationalMap] {
        &self.components
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn ball_dim(&self) -> usize {
        self.frame.ball_dim()
    }

    /// Finite critical points of `R` (empty for degenerate frames).
    pub fn critical_points(&self) -> &[C64] {
        &self.critical_points
    }

    /// `f₁'(0) = 1/R'(0)`; for nondegenerate frames its modulus equals
    /// `|det U''|`, the product of the normalized diagonal moduli.
    pub fn f1_derivative_at_origin(&self) -> C64 {
        if self.degenerate {
            return c64(0.0, 0.0);
        }
        c64(1.0, 0.0) / self.r_prime(c64(0.0, 0.0))
    }

    fn r_value(&self, z: C64) -> C64 {
        self.r.num().eval(z) / self.r.den().eval(z)
    }

    fn r_prime(&self, z: C64) -> C64 {
        let d = self.r.den().eval(z);
        (self.num_d.eval(z) * d - self.r.num().eval(z) * self.den_d.eval(z)) / (d * d)
    }

    /// Evaluate at `w ∈ Δ` (radial continuation from the origin).
    pub fn evaluate(&self, w: C64) -> Result<TargetPoint, GermError> {
        self.evaluate_capped(w, 1.0)
    }

    /// Evaluate with an explicit radius cap. Caps above 1 are meant for
    /// frames whose boundary extension has been verified.
    pub fn evaluate_capped(&self, w: C64, radius_cap: f64) -> Result<TargetPoint, GermError> {
        if w.norm() >= radius_cap && w.norm() > 0.0 {
            return Err(GermError::OutsideDomain {
                norm: w.norm(),
                cap: radius_cap,
            });
        }
        let f1 = self.continue_f1(c64(0.0, 0.0), c64(0.0, 0.0), w)?;
        Ok(self.finish_point(w, f1))
    }

    fn finish_point(&self, w: C64, f1: C64) -> TargetPoint {
        let ball = if self.degenerate {
            self.components.iter().map(|c| c.eval_finite(w)).collect()
        } else {
            self.components.iter().map(|c| c.eval_finite(f1)).collect()
        };
        TargetPoint { disk: f1, ball }
    }

    /// Predictor–corrector continuation of `R(f) = τ` along the segment from
    /// `τ_start` (where `f = f_start`) to `w`.
    fn continue_f1(&self, f_start: C64, tau_start: C64, w: C64) -> Result<C64, GermError> {
        if self.degenerate {
            return Ok(c64(0.0, 0.0));
        }
        let span = w - tau_start;
        if span.norm() == 0.0 {
            return Ok(f_start);
        }
        let mut f = f_start;
        let mut t = 0.0f64;
        let mut dt = 0.05f64;
        let mut tau = tau_start;
        while t < 1.0 {
            let t_next = (t + dt).min(1.0);
            let tau_next = tau_start + span * t_next;
            let dprime = self.r_prime(f);
            let predicted = if dprime.norm() > 1e-14 {
                f + (tau_next - tau) / dprime
            } else {
                f
            };
            match self.newton(predicted, tau_next) {
                Some(root) => {
                    f = root;
                    t = t_next;
                    tau = tau_next;
                    if self
                        .critical_points
                        .iter()
                        .any(|cp| (f - cp).norm() < CRITICAL_CLEARANCE)
                    {
                        return Err(GermError::ContinuationFailure {
                            at: f,
                            step: dt,
                            near_critical: true,
                        });
                    }
                    dt = (dt * 1.5).min(0.1);
                }
                None => {
                    dt *= 0.5;
                    if dt < STEP_FLOOR {
                        let near = self.critical_points.iter().any(|cp| (f - cp).norm() < 1e-3);
                        return Err(GermError::ContinuationFailure {
                            at: f,
                            step: dt,
                            near_critical: near,
                        });
                    }
                }
            }
        }
        // final polish at the exact target
        if let Some(root) = self.newton(f, w) {
            f = root;
        }
        let res = (self.r_value(f) - w).norm();
        if res > 1e-11 * (1.0 + w.norm()) {
            return Err(GermError::ContinuationFailure {
                at: f,
                step: dt,
                near_critical: false,
            });
        }
        Ok(f)
    }

    fn newton(&self, start: C64, target: C64) -> Option<C64> {
        let tol = NEWTON_TOL * (1.0 + target.norm());
        let mut z = start;
        for _ in 0..25 {
            let val = self.r_value(z) - target;
            if val.norm() < tol {
                return Some(z);
            }
            let d = self.r_prime(z);
            if d.norm() < 1e-14 || !d.is_finite() {
                return None;
            }
            z -= val / d;
            if !z.is_finite() {
                return None;
            }
        }
        None
    }

    /// Stateful evaluator that reuses the last continuation endpoint when the
    /// next target lies further out on the same ray.
    pub fn evaluator(&self) -> RadialEvaluator<'_> {
        RadialEvaluator {
            iso: self,
            cache: None,
        }
    }

    /// Residuals of the functional equation
    /// `(1−|f₁|²)(1−Σ|f₂ⱼ|²) = 1−|w|²` and of the defining system over a
    /// grid of sample points.
    pub fn verify(&self, grid: &[C64]) -> Result<ResidueReport, GermError> {
        self.verify_capped(grid, 1.0)
    }

    pub fn verify_capped(&self, grid: &[C64], radius_cap: f64) -> Result<ResidueReport, GermError> {
        let mut samples = Vec::with_capacity(grid.len());
        let mut max_functional: f64 = 0.0;
        let mut max_defining: f64 = 0.0;
        for &w in grid {
            let point = self.evaluate_capped(w, radius_cap)?;
            let functional = ((1.0 - point.disk.norm_sqr()) * (1.0 - point.ball_norm_sqr())
                - (1.0 - w.norm_sqr()))
            .abs();
            let defining = self.defining_residual(w, &point);
            max_functional = max_functional.max(functional);
            max_defining = max_defining.max(defining);
            samples.push((w, functional, defining));
        }
        Ok(ResidueReport {
            samples,
            max_functional,
            max_defining,
        })
    }

    /// `‖U·(f₁, f₂)ᵀ − (w, f₁·f₂)ᵀ‖_∞` at a single point.
    pub fn defining_residual(&self, w: C64, point: &TargetPoint) -> f64 {
        let k = self.frame.dim();
        let mut fvec = DVector::from_element(k, c64(0.0, 0.0));
        fvec[0] = point.disk;
        for (j, z) in point.ball.iter().enumerate() {
            fvec[j + 1] = *z;
        }
        let lhs = self.frame.entries() * fvec;
        let mut worst = (lhs[0] - w).norm();
        for j in 0..point.ball.len() {
            worst = worst.max((lhs[j + 1] - point.disk * point.ball[j]).norm());
        }
        worst
    }

    /// Taylor coefficients of `f₁` at the origin, `c[k]` the coefficient of
    /// `w^k`, obtained by Newton iteration on truncated power series.
    pub fn taylor_germ(&self, order: usize) -> Vec<C64> {
        if self.degenerate {
            return vec![c64(0.0, 0.0); order];
        }
        let len = order.max(2);
        let num = self.r.num();
        let den = self.r.den();
        let mut f = Series::zero(len);
        f = f.add(
            &Series::var(len).mul(&Series::constant(self.f1_derivative_at_origin(), len), len),
        );
        let w = Series::var(len);
        let steps = (len as f64).log2().ceil() as usize + 2;
        for _ in 0..steps {
            let num_f = Series::compose_poly(num, &f, len);
            let den_f = Series::compose_poly(den, &f, len);
            let r_f = num_f.mul(&den_f.inverse(len), len);
            let numd_f = Series::compose_poly(&self.num_d, &f, len);
            let dend_f = Series::compose_poly(&self.den_d, &f, len);
            // R'(f) = (n'(f)d(f) − n(f)d'(f)) / d(f)²
            let dsq_inv = den_f.mul(&den_f, len).inverse(len);
            let rp_f = numd_f
                .mul(&den_f, len)
                .sub(&num_f.mul(&dend_f, len))
                .mul(&dsq_inv, len);
            let correction = r_f.sub(&w).mul(&rp_f.inverse(len), len);
            f = f.sub(&correction);
        }
        f.truncate(order).coeffs().to_vec()
    }
}

/// Continuation cache along a single ray from the origin.
pub struct RadialEvaluator<'a> {
    iso: &'a DiskIsometry,
    cache: Option<(C64, C64)>, // (τ, f₁(τ))
}

impl RadialEvaluator<'_> {
    pub fn evaluate_capped(&mut self, w: C64, radius_cap: f64) -> Result<TargetPoint, GermError> {
        if w.norm() >= radius_cap && w.norm() > 0.0 {
            return Err(GermError::OutsideDomain {
                norm: w.norm(),
                cap: radius_cap,
            });
        }
        let start = match self.cache {
            Some((tau, f)) if on_segment(tau, w) => (f, tau),
            _ => (c64(0.0, 0.0), c64(0.0, 0.0)),
        };
        let f1 = self.iso.continue_f1(start.0, start.1, w)?;
        self.cache = Some((w, f1));
        Ok(self.iso.finish_point(w, f1))
    }

    pub fn evaluate(&mut self, w: C64) -> Result<TargetPoint, GermError> {
        self.evaluate_capped(w, 1.0)
    }
}

/// Is `tau` strictly between 0 and `w` on the same ray?
fn on_segment(tau: C64, w: C64) -> bool {
    if tau.norm() == 0.0 || tau.norm() > w.norm() {
        return false;
    }
    let cross = tau.conj() * w;
    cross.im.abs() <= 1e-12 * tau.norm() * w.norm() && cross.re > 0.0
}
