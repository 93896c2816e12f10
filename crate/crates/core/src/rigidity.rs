//! Audit of rational candidate isometries from the disk into weighted
//! products of balls: the weighted functional equation, the conclusions
//! rational candidates must satisfy, and the rationality intake test that
//! screens algebraic germs out of the hypothesis.

use rand::Rng;
use thiserror::Error;

use crate::germ::DiskIsometry;
use crate::poly::Poly;
use crate::rational::{RationalError, RationalMap, SpherePoint};
use crate::sampling::{circle_samples, seeded_rng};
use crate::schur::least_squares;
use crate::{c64, C64};

/// Grid size for the isometry precondition.
pub const PRECONDITION_GRID: usize = 200;
/// Residual bound under which a candidate counts as an isometry.
pub const PRECONDITION_TOL: f64 = 1e-9;
/// Boundary samples for the properness check.
pub const BOUNDARY_SAMPLES: usize = 128;
/// Degree cap of the rationality intake fit.
pub const INTAKE_DEGREE: usize = 12;
/// Relative extrapolation residual above which a germ is declared
/// non-rational. Rational germs reproduce their own recurrence exactly
/// (observed ≤ 1e-13); the algebraic family germs drift off it by 1e-4 or
/// more once the recurrence is run past the fitting window.
pub const INTAKE_TOL: f64 = 1e-8;
/// Coefficients predicted recursively beyond the fitting window.
pub const INTAKE_EXTRAPOLATION: usize = 60;

#[derive(Debug, Error)]
pub enum RigidityError {
    #[error("candidate needs equally many component maps and weights")]
    MismatchedLengths,
    #[error("candidate must have at least one factor")]
    Empty,
    #[error("weights must be positive, got {0}")]
    NonPositiveWeight(f64),
    #[error("factor {0} is a constant map")]
    ConstantComponent(usize),
    #[error("factor {0} does not vanish at the origin")]
    NotNormalized(usize),
    #[error("grid sample hits a pole of a component")]
    PoleOnGrid,
    #[error("candidate is not an isometry (weighted residual {residual:.3e})")]
    NotAnIsometry { residual: f64 },
    #[error("rational isometry violates the rigidity conclusion: {0}")]
    ConclusionViolated(String),
    #[error(transparent)]
    Rational(#[from] RationalError),
}

/// A candidate map `f = (f₁, …, f_m)` into `𝔹^{N₁}×…×𝔹^{N_m}` with metric
/// weights `λⱼ`, every coordinate a rational function.
#[derive(Debug, Clone)]
pub struct WeightedCandidate {
    components: Vec<Vec<RationalMap>>,
    weights: Vec<f64>,
}

impl WeightedCandidate {
    pub fn new(
        components: Vec<Vec<RationalMap>>,
        weights: Vec<f64>,
    ) -> Result<Self, RigidityError> {
        if components.len() != weights.len() {
            return Err(RigidityError::MismatchedLengths);
        }
        if components.is_empty() {
            return Err(RigidityError::Empty);
        }
        for &w in &weights {
            if !w.is_finite() || w <= 0.0 {
                return Err(RigidityError::NonPositiveWeight(w));
            }
        }
        for (j, factor) in components.iter().enumerate() {
            let nonconstant = factor
                .iter()
                .any(|m| m.num().degree() >= 1 && !m.is_zero_map());
            if factor.is_empty() || !nonconstant {
                return Err(RigidityError::ConstantComponent(j));
            }
            for m in factor {
                let at0 = m.eval(SpherePoint::Finite(c64(0.0, 0.0)));
                if at0.dist(&SpherePoint::Finite(c64(0.0, 0.0))) > 1e-12 {
                    return Err(RigidityError::NotNormalized(j));
                }
            }
        }
        Ok(WeightedCandidate {
            components,
            weights,
        })
    }

    pub fn components(&self) -> &[Vec<RationalMap>] {
        &self.components
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn factor_count(&self) -> usize {
        self.components.len()
    }

    fn factor_norm_sqr(&self, j: usize, w: C64) -> Result<f64, RigidityError> {
        let mut acc = 0.0;
        for map in &self.components[j] {
            match map.eval(SpherePoint::Finite(w)) {
                SpherePoint::Finite(v) if v.norm() < 1e10 => acc += v.norm_sqr(),
                _ => return Err(RigidityError::PoleOnGrid),
            }
        }
        Ok(acc)
    }
}

/// Max over the grid of `|∏ⱼ (1 − ‖fⱼ(w)‖²)^{λⱼ} − (1 − |w|²)|`.
pub fn weighted_residual(c: &WeightedCandidate, grid: &[C64]) -> Result<f64, RigidityError> {
    let mut worst: f64 = 0.0;
    for &w in grid {
        let mut prod = 1.0f64;
        for (j, &lambda) in c.weights.iter().enumerate() {
            let norm = c.factor_norm_sqr(j, w)?;
            let slack = 1.0 - norm;
            if slack <= 0.0 {
                return Err(RigidityError::PoleOnGrid);
            }
            prod *= slack.powf(lambda);
        }
        worst = worst.max((prod - (1.0 - w.norm_sqr())).abs());
    }
    Ok(worst)
}

/// What the rigidity conclusion asserts about a rational candidate that
/// actually is an isometry.
#[derive(Debug, Clone)]
pub struct RigidityReport {
    pub weighted_residual: f64,
    /// `min | |pole| − 1 |` over all component poles; ∞ when no poles exist.
    pub pole_circle_clearance: f64,
    pub poles_clear: bool,
    /// `max_j max_b | ‖fⱼ(b)‖² − 1 |` over boundary samples: properness of
    /// every factor.
    pub properness_defect: f64,
    pub proper: bool,
    pub weight_sum: f64,
    pub weights_sum_to_one: bool,
    /// `max_j max_w | ‖fⱼ(w)‖² − |w|² |`: each factor is itself an isometry.
    pub per_factor_defect: f64,
    pub per_factor_isometry: bool,
}

impl RigidityReport {
    pub fn all_hold(&self) -> bool {
        self.poles_clear && self.proper && self.weights_sum_to_one && self.per_factor_isometry
    }
}

/// Check the four rigidity conclusions on a candidate.
///
/// The precondition (the weighted functional equation over a 200-point grid)
/// gates the audit: candidates failing it get `NotAnIsometry`. A candidate
/// passing the precondition but failing a conclusion would contradict the
/// rigidity statement and is flagged as `ConclusionViolated` for inspection.
pub fn rigidity_audit(c: &WeightedCandidate) -> Result<RigidityReport, RigidityError> {
    let grid = crate::sampling::disk_grid(PRECONDITION_GRID, 0.95);
    let residual = weighted_residual(c, &grid)?;
    if residual >= PRECONDITION_TOL {
        return Err(RigidityError::NotAnIsometry { residual });
    }
    // (i) poles stay away from the unit circle
    let mut clearance = f64::INFINITY;
    for factor in &c.components {
        for map in factor {
            for (p, _) in map.poles()? {
                clearance = clearance.min((p.norm() - 1.0).abs());
            }
        }
    }
    let poles_clear = clearance > 1e-6;
    // (ii) properness of every factor on the boundary
    let boundary = circle_samples(BOUNDARY_SAMPLES, 1.0);
    let mut properness_defect: f64 = 0.0;
    for j in 0..c.factor_count() {
        for &b in &boundary {
            let norm = c.factor_norm_sqr(j, b)?;
            properness_defect = properness_defect.max((norm - 1.0).abs());
        }
    }
    let proper = properness_defect < 1e-8;
    // (iii) weights sum to one
    let weight_sum: f64 = c.weights.iter().sum();
    let weights_sum_to_one = (weight_sum - 1.0).abs() < 1e-10;
    // (iv) each factor is an unweighted isometry
    let mut per_factor_defect: f64 = 0.0;
    for j in 0..c.factor_count() {
        for &w in &grid {
            let norm = c.factor_norm_sqr(j, w)?;
            per_factor_defect = per_factor_defect.max((norm - w.norm_sqr()).abs());
        }
    }
    let per_factor_isometry = per_factor_defect < 1e-8;
    let report = RigidityReport {
        weighted_residual: residual,
        pole_circle_clearance: clearance,
        poles_clear,
        properness_defect,
        proper,
        weight_sum,
        weights_sum_to_one,
        per_factor_defect,
        per_factor_isometry,
    };
    if !report.all_hold() {
        return Err(RigidityError::ConclusionViolated(format!(
            "poles_clear={poles_clear} proper={proper} weights_sum_to_one={weights_sum_to_one} per_factor={per_factor_isometry}"
        )));
    }
    Ok(report)
}

/// Verdict of the rationality intake test.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceClass {
    /// The germ is fit by a rational map of degree at most the cap.
    RationalWithinDegree { residual: f64 },
    /// No rational map of bounded degree reproduces the germ: outside the
    /// rigidity hypothesis.
    NotRational { residual: f64 },
}

/// Test whether a Taylor germ agrees with some rational function of degree
/// ≤ `max_deg`.
///
/// A rational germ's coefficients satisfy the linear recurrence of its
/// denominator exactly and forever. The recurrence is fitted on an initial
/// window of the (rescaled) coefficients and then run recursively past that
/// window; the discriminator is the worst relative error of those recursive
/// predictions. A short-window least-squares residual alone cannot decide
/// this: a 12-tap recurrence nearly annihilates any smoothly varying
/// sequence, so only the extrapolation drift separates algebraic germs from
/// rational ones.
pub fn classify_germ(series: &[C64], max_deg: usize) -> SourceClass {
    let d = max_deg;
    let fit_end = 3 * d + 6;
    assert!(
        series.len() >= fit_end + 24,
        "series too short: need the fitting window plus an extrapolation tail"
    );
    // rescale so the coefficients are O(1): estimate the radius from ratios
    let mut ratios: Vec<f64> = Vec::new();
    for k in series.len() / 3..2 * series.len() / 3 {
        let a = series[k].norm();
        let b = series[k + 1].norm();
        if a > 1e-300 && b > 1e-300 {
            ratios.push(a / b);
        }
    }
    ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let scale = if ratios.is_empty() {
        1.0
    } else {
        ratios[ratios.len() / 2].clamp(1e-6, 1e6)
    };
    let rescaled: Vec<C64> = series
        .iter()
        .enumerate()
        .map(|(k, &c)| c * scale.powi(k as i32))
        .collect();
    let magnitude = rescaled.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if magnitude == 0.0 {
        return SourceClass::RationalWithinDegree { residual: 0.0 };
    }
    // fit rows k = d+1 .. fit_end: Σ_{j=1..d} b_j c_{k−j} = −c_k
    let rows = fit_end - (d + 1);
    let mut a = nalgebra::DMatrix::from_element(rows, d, c64(0.0, 0.0));
    let mut rhs = vec![c64(0.0, 0.0); rows];
    for (row, k) in (d + 1..fit_end).enumerate() {
        for j in 1..=d {
            a[(row, j - 1)] = rescaled[k - j];
        }
        rhs[row] = -rescaled[k];
    }
    let (b, _) = least_squares(&a, &rhs);
    // run the recurrence recursively past the window
    let mut predicted = rescaled[..fit_end].to_vec();
    let mut worst: f64 = 0.0;
    for k in fit_end..rescaled.len() {
        let mut acc = c64(0.0, 0.0);
        for j in 1..=d {
            acc -= b[j - 1] * predicted[k - j];
        }
        predicted.push(acc);
        worst = worst.max((acc - rescaled[k]).norm());
    }
    let relative = worst / magnitude;
    if relative < INTAKE_TOL {
        SourceClass::RationalWithinDegree { residual: relative }
    } else {
        SourceClass::NotRational { residual: relative }
    }
}

/// Intake classification of a solved isometry's first component.
pub fn classify_disk_isometry(iso: &DiskIsometry, max_deg: usize) -> SourceClass {
    let series = iso.taylor_germ(3 * max_deg + 6 + INTAKE_EXTRAPOLATION);
    classify_germ(&series, max_deg)
}

/// Rotated-diagonal corpus member: each factor sends `w` to `e^{iφⱼ}·w·uⱼ`
/// for a random unit vector `uⱼ`, so every factor is a genuine isometry and
/// the weighted equation holds whenever the weights sum to one.
pub fn rotated_diagonal_candidate(
    dims: &[usize],
    weights: &[f64],
    seed: u64,
) -> Result<WeightedCandidate, RigidityError> {
    let mut rng = seeded_rng(seed);
    let mut components = Vec::with_capacity(dims.len());
    for &dim in dims {
        let phase = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * rng.random::<f64>());
        let mut direction: Vec<C64> = (0..dim)
            .map(|_| c64(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let norm: f64 = direction.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for v in direction.iter_mut() {
            *v = *v / norm * phase;
        }
        let factor: Vec<RationalMap> = direction
            .into_iter()
            .map(|slope| {
                RationalMap::new(Poly::new(vec![c64(0.0, 0.0), slope]), Poly::one()).unwrap()
            })
            .collect();
        components.push(factor);
    }
    WeightedCandidate::new(components, weights.to_vec())
}
