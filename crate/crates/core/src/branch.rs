//! Ramification and branch data of rational maps, congruence invariants with
//! an incongruence certificate, degree-based reduction verdicts, and the
//! one-parameter peeling factorization.

use thiserror::Error;

use crate::germ::DiskIsometry;
use crate::poly::PolyError;
use crate::rational::{RationalError, RationalMap, SpherePoint};
use crate::unitary::UnitaryError;
use crate::C64;

/// Two branch values closer than this are one value.
pub const BRANCH_DEDUP_TOL: f64 = 1e-8;
/// A point this close to the unit circle counts as lying on it.
pub const ON_CIRCLE_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum BranchError {
    #[error("map has degree {0}; nothing to analyze")]
    DegreeTooSmall(usize),
    #[error("map of degree 1 has no parameter to peel")]
    NothingToPeel,
    #[error(transparent)]
    Rational(#[from] RationalError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Unitary(#[from] UnitaryError),
}

/// Ramification points with orders, branch values with their total sheet
/// collapse, and where the ramification sits relative to the unit circle.
#[derive(Debug, Clone)]
pub struct BranchData {
    /// `(point, order)`: order is the local multiplicity minus one.
    pub ramification: Vec<(SpherePoint, usize)>,
    /// `(value, total branching of its fiber)`.
    pub branch: Vec<(SpherePoint, usize)>,
    /// Ramification point tallies `(inside, on circle, outside)`; the point
    /// at infinity counts as outside.
    pub location_counts: (usize, usize, usize),
}

impl BranchData {
    /// Riemann–Hurwitz total `Σ orders`, which must equal `2·deg − 2`.
    pub fn total_order(&self) -> usize {
        self.ramification.iter().map(|(_, k)| k).sum()
    }

    pub fn distinct_ramification_count(&self) -> usize {
        self.ramification.len()
    }
}

/// Compute the ramification/branch data of a map of degree ≥ 1.
///
/// Finite ramification points are the clustered roots of `p'q − pq'`; the
/// point at infinity picks up whatever Riemann–Hurwitz still requires, which
/// also covers numerator/denominator degree gaps.
pub fn branch_data(r: &RationalMap) -> Result<BranchData, BranchError> {
    let deg = r.degree();
    if deg == 0 || r.is_zero_map() {
        return Err(BranchError::DegreeTooSmall(deg));
    }
    let w = r.derivative_numerator();
    let mut ramification: Vec<(SpherePoint, usize)> = Vec::new();
    let finite_total = if w.degree() >= 1 {
        let clusters = w.clustered_roots()?;
        let mut total = 0;
        for (z, m) in clusters {
            total += m;
            if m >= 1 {
                ramification.push((SpherePoint::Finite(z), m));
            }
        }
        total
    } else {
        0
    };
    let expected = 2 * deg - 2;
    if expected > finite_total {
        ramification.push((SpherePoint::Infinity, expected - finite_total));
    }
    // branch values: images of the ramification points, merged
    let mut branch: Vec<(SpherePoint, usize)> = Vec::new();
    for (point, order) in &ramification {
        let value = snapped_image(r, *point);
        match branch
            .iter_mut()
            .find(|(v, _)| v.dist(&value) <= BRANCH_DEDUP_TOL)
        {
            Some((_, total)) => *total += order,
            None => branch.push((value, *order)),
        }
    }
    let mut location_counts = (0usize, 0usize, 0usize);
    for (point, _) in &ramification {
        match point {
            SpherePoint::Infinity => location_counts.2 += 1,
            SpherePoint::Finite(z) => {
                let d = z.norm();
                if (d - 1.0).abs() < ON_CIRCLE_TOL {
                    location_counts.1 += 1;
                } else if d < 1.0 {
                    location_counts.0 += 1;
                } else {
                    location_counts.2 += 1;
                }
            }
        }
    }
    Ok(BranchData {
        ramification,
        branch,
        location_counts,
    })
}

/// Moduli data that becomes congruence-invariant once both source and target
/// automorphisms are pinned to rotations.
#[derive(Debug, Clone, PartialEq)]
pub struct PinnedModuli {
    /// Sorted moduli of the finite nonzero branch values.
    pub branch_moduli: Vec<f64>,
    /// Sorted moduli of the finite poles, with multiplicity.
    pub pole_moduli: Vec<f64>,
}

/// Invariants of the congruence class of a solved isometry's rational map.
///
/// Degree, the ramification-order multiset, and the circle-location tallies
/// are invariant under arbitrary disk automorphisms on both sides. The
/// moduli data is recorded only under the rotation-pinning condition: when 0
/// and ∞ are branch values that any congruence must fix (either because
/// their fibers ramify with orders no other fiber shows, or because they are
/// the only branch values off the unit circle), the automorphisms reduce to
/// rotations and moduli become invariant.
#[derive(Debug, Clone)]
pub struct CongruenceInvariant {
    pub degree: usize,
    pub ram_order_multiset: Vec<usize>,
    pub location_counts: (usize, usize, usize),
    pub pinned: Option<PinnedModuli>,
}

/// Compute the congruence invariants of a normalized map (`R(0) = 0`, circle
/// symmetry).
pub fn invariants(r: &RationalMap) -> Result<CongruenceInvariant, BranchError> {
    let data = branch_data(r)?;
    let mut ram_order_multiset: Vec<usize> = data.ramification.iter().map(|(_, k)| *k).collect();
    ram_order_multiset.sort_unstable();
    let pinned = rotation_pinning(r, &data)?;
    Ok(CongruenceInvariant {
        degree: r.degree(),
        ram_order_multiset,
        location_counts: data.location_counts,
        pinned,
    })
}

fn is_origin(v: &SpherePoint) -> bool {
    matches!(v, SpherePoint::Finite(z) if z.norm() < BRANCH_DEDUP_TOL)
}

/// Image of a ramification point, with values beyond 1e8 snapped to the
/// point at infinity: a numerically perturbed multiple pole evaluates to a
/// huge finite number rather than an exact division by zero.
fn snapped_image(r: &RationalMap, point: SpherePoint) -> SpherePoint {
    match r.eval(point) {
        SpherePoint::Finite(v) if v.norm() > 1e8 => SpherePoint::Infinity,
        other => other,
    }
}

fn rotation_pinning(
    r: &RationalMap,
    data: &BranchData,
) -> Result<Option<PinnedModuli>, BranchError> {
    let has_zero = data.branch.iter().any(|(v, _)| is_origin(v));
    let has_inf = data.branch.iter().any(|(v, _)| v.is_infinity());
    if !has_zero || !has_inf {
        return Ok(None);
    }
    // orders appearing over 0/∞ versus over every other branch value
    let mut pinned_orders: Vec<usize> = Vec::new();
    let mut other_orders: Vec<usize> = Vec::new();
    for (point, order) in &data.ramification {
        let image = snapped_image(r, *point);
        if is_origin(&image) || image.is_infinity() {
            pinned_orders.push(*order);
        } else {
            other_orders.push(*order);
        }
    }
    let orders_distinct = !pinned_orders.is_empty()
        && pinned_orders
            .iter()
            .all(|p| other_orders.iter().all(|o| o != p));
    // location variant: 0 the only branch value in the open disk, ∞ the only
    // one outside the closed disk, everything else on the circle
    let location_unique = data.branch.iter().all(|(v, _)| {
        if is_origin(v) || v.is_infinity() {
            true
        } else {
            match v {
                SpherePoint::Finite(z) => (z.norm() - 1.0).abs() < ON_CIRCLE_TOL,
                SpherePoint::Infinity => true,
            }
        }
    });
    if !(orders_distinct || location_unique) {
        return Ok(None);
    }
    let mut branch_moduli: Vec<f64> = data
        .branch
        .iter()
        .filter_map(|(v, _)| match v {
            SpherePoint::Finite(z) if !is_origin(v) => Some(z.norm()),
            _ => None,
        })
        .collect();
    branch_moduli.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut pole_moduli: Vec<f64> = Vec::new();
    for (p, m) in r.poles()? {
        for _ in 0..m {
            pole_moduli.push(p.norm());
        }
    }
    pole_moduli.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(Some(PinnedModuli {
        branch_moduli,
        pole_moduli,
    }))
}

/// Outcome of comparing two invariant sets. The certificate never claims
/// congruence: matching invariants prove nothing.
#[derive(Debug, Clone, PartialEq)]
pub enum IncongruenceVerdict {
    ProvablyIncongruent(String),
    Inconclusive,
}

fn moduli_differ(a: &[f64], b: &[f64]) -> bool {
    a.len() != b.len()
        || a.iter()
            .zip(b)
            .any(|(x, y)| (x - y).abs() > BRANCH_DEDUP_TOL)
}

/// Compare congruence invariants; symmetric in its arguments.
pub fn incongruence_certificate(
    a: &CongruenceInvariant,
    b: &CongruenceInvariant,
) -> IncongruenceVerdict {
    use IncongruenceVerdict::*;
    if a.degree != b.degree {
        return ProvablyIncongruent(format!("degrees differ: {} vs {}", a.degree, b.degree));
    }
    if a.ram_order_multiset != b.ram_order_multiset {
        return ProvablyIncongruent(format!(
            "ramification orders differ: {:?} vs {:?}",
            a.ram_order_multiset, b.ram_order_multiset
        ));
    }
    if a.location_counts != b.location_counts {
        return ProvablyIncongruent(format!(
            "circle-location tallies differ: {:?} vs {:?}",
            a.location_counts, b.location_counts
        ));
    }
    if let (Some(pa), Some(pb)) = (&a.pinned, &b.pinned) {
        if moduli_differ(&pa.branch_moduli, &pb.branch_moduli) {
            return ProvablyIncongruent(format!(
                "branch moduli differ under rotation pinning: {:?} vs {:?}",
                pa.branch_moduli, pb.branch_moduli
            ));
        }
        if moduli_differ(&pa.pole_moduli, &pb.pole_moduli) {
            return ProvablyIncongruent(format!(
                "pole moduli differ under rotation pinning: {:?} vs {:?}",
                pa.pole_moduli, pb.pole_moduli
            ));
        }
    }
    Inconclusive
}

/// Degree-based classification of a solved isometry into Δ×𝔹ⁿ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReductionVerdict {
    /// Degree 1: congruent to a geodesic disk factor `w ↦ (F(w), 0)`.
    GeodesicDiskFactor,
    /// Degree 2: congruent to the square-root embedding in a Δ² slice.
    SquareRootClass,
    /// Degree m+1 ≤ n: factors through Δ×𝔹^m with `n−m` components forced to
    /// vanish.
    Reducible { m: usize },
    /// Degree n+1: genuinely full-dimensional.
    Full,
}

/// Classify by the degree law: deg R ≤ n+1 always, with equality exactly when
/// no trailing diagonal entry is unimodular.
pub fn reduction_classify(r: &RationalMap, n: usize) -> ReductionVerdict {
    let deg = r.degree();
    match deg {
        0 | 1 => ReductionVerdict::GeodesicDiskFactor,
        2 => ReductionVerdict::SquareRootClass,
        d if d <= n => ReductionVerdict::Reducible { m: d - 1 },
        _ => ReductionVerdict::Full,
    }
}

/// Frame-aware reduction report: which unit-modulus diagonal slots force
/// their component to vanish.
#[derive(Debug, Clone)]
pub struct ReductionReport {
    pub verdict: ReductionVerdict,
    /// `(slot j, u_jj)` in 1-based indexing over the normalized frame.
    pub forced_slots: Vec<(usize, C64)>,
}

pub fn reduction_report(iso: &DiskIsometry) -> Result<ReductionReport, BranchError> {
    let verdict = reduction_classify(iso.rational(), iso.ball_dim());
    let frame = iso.frame();
    let forced_slots = if frame.flags().lower_block_upper_triangular {
        frame.unit_modulus_diagonal()
    } else {
        let (normalized, _) = frame.schur_normalize()?;
        normalized.unit_modulus_diagonal()
    };
    Ok(ReductionReport {
        verdict,
        forced_slots,
    })
}

/// Strip one Blaschke factor: returns `R̃` of degree `deg − 1` and the peeled
/// parameter `c₂` with `R(z) = R̃(z) · (c̄₂z − 1)/(z − c₂)`.
///
/// When several poles are available the one of largest modulus is peeled,
/// ties broken by ascending argument, so the output is reproducible.
pub fn peel_parameter(r: &RationalMap) -> Result<(RationalMap, C64), BranchError> {
    if r.degree() < 2 {
        return Err(BranchError::NothingToPeel);
    }
    let form = r.to_blaschke()?;
    let mut poles = form.pairs.clone();
    poles.sort_by(|a, b| {
        let ka = (-a.norm(), positive_arg(*a));
        let kb = (-b.norm(), positive_arg(*b));
        ka.partial_cmp(&kb).unwrap()
    });
    let c2 = poles[0];
    let mut remaining = form.pairs.clone();
    let idx = remaining
        .iter()
        .position(|p| (p - c2).norm() == 0.0)
        .expect("peeled pole present");
    remaining.remove(idx);
    let peeled = crate::rational::BlaschkeForm {
        alpha0: form.alpha0 / c2.conj(),
        pairs: remaining,
        fixed_zero_at_origin: true,
    };
    Ok((peeled.to_rational()?, c2))
}

/// Reattach a peeled factor: `R̃(z) · (c̄₂z − 1)/(z − c₂)`.
pub fn remultiply(r_tilde: &RationalMap, c2: C64) -> Result<RationalMap, BranchError> {
    let factor_num = crate::poly::Poly::new(vec![crate::c64(-1.0, 0.0), c2.conj()]);
    let factor_den = crate::poly::Poly::new(vec![-c2, crate::c64(1.0, 0.0)]);
    Ok(RationalMap::new(
        r_tilde.num().mul(&factor_num),
        r_tilde.den().mul(&factor_den),
    )?)
}

fn positive_arg(z: C64) -> f64 {
    let mut a = z.arg();
    if a < 0.0 {
        a += 2.0 * std::f64::consts::PI;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use crate::family::{critical_radius, family_rational};
    use crate::germ::rational_from_unitary;
    use crate::unitary::build_hessenberg_unitary;

    #[test]
    fn identity_has_no_ramification() {
        let data = branch_data(&RationalMap::identity()).unwrap();
        assert!(data.ramification.is_empty());
        assert_eq!(data.location_counts, (0, 0, 0));
    }

    #[test]
    fn family_inner_regime_branch_data() {
        let r = family_rational(c64(0.2, 0.0), 2).unwrap();
        let data = branch_data(&r).unwrap();
        assert_eq!(data.total_order(), 4); // 2·deg − 2
        assert_eq!(data.distinct_ramification_count(), 4);
        let mut points: Vec<C64> = data
            .ramification
            .iter()
            .map(|(p, _)| p.finite().unwrap())
            .collect();
        points.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        let want = [-4.159591794, -0.2404082058, 0.2, 5.0];
        for (got, want) in points.iter().zip(want) {
            assert!((got.re - want).abs() < 1e-7, "got {got}, want {want}");
            assert!(got.im.abs() < 1e-8);
        }
        assert_eq!(data.location_counts, (2, 0, 2));
        // branch values: 0, ∞ and the two images of a±
        assert_eq!(data.branch.len(), 4);
    }

    #[test]
    fn family_outer_regime_location_counts() {
        let r = family_rational(c64(0.5, 0.0), 2).unwrap();
        let data = branch_data(&r).unwrap();
        assert_eq!(data.location_counts, (1, 2, 1));
    }

    #[test]
    fn family_critical_has_three_ramification_points() {
        let rc = critical_radius(2);
        let r = family_rational(c64(rc, 0.0), 2).unwrap();
        let data = branch_data(&r).unwrap();
        assert_eq!(data.distinct_ramification_count(), 3);
        assert_eq!(data.total_order(), 4);
        let double = data
            .ramification
            .iter()
            .find(|(_, k)| *k == 2)
            .expect("double point");
        assert!((double.0.finite().unwrap() - c64(-1.0, 0.0)).norm() < 1e-6);
    }

    #[test]
    fn ram_point_at_infinity_when_degrees_balance() {
        // z + 1/z has critical points ±1 and none at ∞ (deg 2, total 2)
        let r = RationalMap::new(
            crate::poly::Poly::new(vec![c64(1.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)]),
            crate::poly::Poly::var(),
        )
        .unwrap();
        let data = branch_data(&r).unwrap();
        assert_eq!(data.total_order(), 2);
        assert!(data.ramification.iter().all(|(p, _)| !p.is_infinity()));
        // z² ramifies at 0 and ∞
        let sq = RationalMap::new(
            crate::poly::Poly::new(vec![c64(0.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)]),
            crate::poly::Poly::one(),
        )
        .unwrap();
        let data = branch_data(&sq).unwrap();
        assert_eq!(data.total_order(), 2);
        assert!(data.ramification.iter().any(|(p, _)| p.is_infinity()));
    }

    #[test]
    fn invariants_of_identity() {
        let inv = invariants(&RationalMap::identity()).unwrap();
        assert_eq!(inv.degree, 1);
        assert!(inv.ram_order_multiset.is_empty());
        assert!(inv.pinned.is_none());
    }

    #[test]
    fn outer_regime_is_pinned_with_unimodular_branch_moduli() {
        let inv = invariants(&family_rational(c64(0.5, 0.0), 2).unwrap()).unwrap();
        let pinned = inv.pinned.expect("outer regime pins rotations");
        assert_eq!(pinned.branch_moduli.len(), 2);
        for m in &pinned.branch_moduli {
            assert!((m - 1.0).abs() < 1e-9);
        }
        assert_eq!(pinned.pole_moduli, vec![0.5, 0.5]);
    }

    #[test]
    fn certificate_separates_regimes_and_moduli() {
        let a = invariants(&family_rational(c64(0.5, 0.0), 2).unwrap()).unwrap();
        let b = invariants(&family_rational(c64(0.2, 0.0), 2).unwrap()).unwrap();
        assert!(matches!(
            incongruence_certificate(&a, &b),
            IncongruenceVerdict::ProvablyIncongruent(_)
        ));
        // rotation of the parameter is congruent: all invariants agree
        let rot =
            invariants(&family_rational(c64(0.5, 0.0) * C64::from_polar(1.0, 1.3), 2).unwrap())
                .unwrap();
        assert_eq!(
            incongruence_certificate(&a, &rot),
            IncongruenceVerdict::Inconclusive
        );
        // distinct moduli in the outer annulus
        let c = invariants(&family_rational(c64(0.8, 0.0), 2).unwrap()).unwrap();
        match incongruence_certificate(&a, &c) {
            IncongruenceVerdict::ProvablyIncongruent(reason) => {
                assert!(reason.contains("pole moduli"), "{reason}");
            }
            other => panic!("expected incongruence, got {other:?}"),
        }
        // degree separates immediately
        let id = invariants(&RationalMap::identity()).unwrap();
        assert!(matches!(
            incongruence_certificate(&id, &a),
            IncongruenceVerdict::ProvablyIncongruent(_)
        ));
        // self-comparison must stay inconclusive
        assert_eq!(
            incongruence_certificate(&a, &a),
            IncongruenceVerdict::Inconclusive
        );
    }

    #[test]
    fn reduction_verdicts_by_degree() {
        assert_eq!(
            reduction_classify(&RationalMap::identity(), 2),
            ReductionVerdict::GeodesicDiskFactor
        );
        let sq = RationalMap::new(
            crate::poly::Poly::new(vec![c64(0.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)]),
            crate::poly::Poly::one(),
        )
        .unwrap();
        assert_eq!(
            reduction_classify(&sq, 2),
            ReductionVerdict::SquareRootClass
        );
        let family = family_rational(c64(0.4, 0.0), 3).unwrap();
        assert_eq!(reduction_classify(&family, 3), ReductionVerdict::Full);
        let deg3 = family_rational(c64(0.4, 0.0), 2).unwrap();
        assert_eq!(
            reduction_classify(&deg3, 4),
            ReductionVerdict::Reducible { m: 2 }
        );
    }

    #[test]
    fn peel_family_map_yields_previous_family_member() {
        let zeta = c64(0.3, 0.2);
        let r = family_rational(zeta, 3).unwrap();
        let (r_tilde, c2) = peel_parameter(&r).unwrap();
        assert!((c2 - zeta).norm() < 1e-9);
        let want = family_rational(zeta, 2).unwrap();
        assert!(r_tilde.coefficient_distance(&want) < 1e-9);
        let rebuilt = remultiply(&r_tilde, c2).unwrap();
        assert!(rebuilt.coefficient_distance(&r) < 1e-12);
    }

    #[test]
    fn peel_seed_frame_map() {
        let r = rational_from_unitary(&build_hessenberg_unitary(2, 0).unwrap()).unwrap();
        let (r_tilde, c2) = peel_parameter(&r).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((c2 - c64(h, 0.0)).norm() < 1e-9);
        assert_eq!(r_tilde.degree(), 2);
        let poles = r_tilde.poles().unwrap();
        assert_eq!(poles.len(), 1);
        assert!((poles[0].0 - c64(h, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn peel_rejects_degree_one() {
        assert!(matches!(
            peel_parameter(&RationalMap::identity()),
            Err(BranchError::NothingToPeel)
        ));
    }

    #[test]
    fn certificate_is_symmetric() {
        let a = invariants(&family_rational(c64(0.5, 0.0), 2).unwrap()).unwrap();
        let b = invariants(&family_rational(c64(0.2, 0.0), 2).unwrap()).unwrap();
        let ab = matches!(
            incongruence_certificate(&a, &b),
            IncongruenceVerdict::ProvablyIncongruent(_)
        );
        let ba = matches!(
            incongruence_certificate(&b, &a),
            IncongruenceVerdict::ProvablyIncongruent(_)
        );
        assert_eq!(ab, ba);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(32))]

        /// Riemann-Hurwitz: the ramification orders always total 2·deg − 2.
        #[test]
        fn riemann_hurwitz_holds_for_family_maps(
            radius in 0.05f64..0.95,
            angle in 0.0f64..std::f64::consts::TAU,
            n in 2usize..=4,
        ) {
            let zeta = C64::from_polar(radius, angle);
            let r = family_rational(zeta, n).unwrap();
            let data = branch_data(&r).unwrap();
            proptest::prop_assert_eq!(data.total_order(), 2 * r.degree() - 2);
        }

        /// Peeling inverts: re-multiplying the stripped factor recovers the
        /// original coefficients.
        #[test]
        fn peel_then_remultiply_is_identity(
            radius in 0.15f64..0.9,
            angle in 0.0f64..std::f64::consts::TAU,
            n in 2usize..=4,
        ) {
            let zeta = C64::from_polar(radius, angle);
            let r = family_rational(zeta, n).unwrap();
            let (r_tilde, c2) = peel_parameter(&r).unwrap();
            let rebuilt = remultiply(&r_tilde, c2).unwrap();
            proptest::prop_assert!(rebuilt.coefficient_distance(&r) < 1e-12);
        }
    }
}
