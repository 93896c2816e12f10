//! Complex polynomials in one variable with dense ascending-degree storage,
//! and root finding via balanced companion matrices with Newton polish.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::schur;
use crate::C64;

#[derive(Debug, Error)]
pub enum PolyError {
    #[error("the zero polynomial has no roots")]
    ZeroPolynomial,
    #[error("eigenvalue solver failed: {0}")]
    Eigen(#[from] schur::SchurError),
}

/// Dense polynomial `c₀ + c₁ z + … + c_d z^d`.
///
/// The coefficient vector never ends in an exact zero; the zero polynomial is
/// the empty vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<C64>,
}

impl Poly {
    /// Build from ascending coefficients, trimming exact trailing zeros.
    pub fn new(mut coeffs: Vec<C64>) -> Self {
        while coeffs.last().is_some_and(|c| c.norm_sqr() == 0.0) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(C64::new(1.0, 0.0))
    }

    pub fn constant(c: C64) -> Self {
        Poly::new(vec![c])
    }

    /// The monomial `z`.
    pub fn var() -> Self {
        Poly::new(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)])
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[C64]) -> Self {
        let mut coeffs = vec![C64::new(1.0, 0.0)];
        for &r in roots {
            // multiply by (z - r)
            let mut next = vec![C64::new(0.0, 0.0); coeffs.len() + 1];
            for (k, &c) in coeffs.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= r * c;
            }
            coeffs = next;
        }
        Poly::new(coeffs)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; 0 for constants and for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> C64 {
        self.coeffs.get(k).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn leading(&self) -> C64 {
        self.coeffs.last().copied().unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Horner evaluation.
    pub fn eval(&self, z: C64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        Poly::new(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(k, &c)| c * (k as f64 + 1.0))
                .collect(),
        )
    }

    pub fn scale(&self, s: C64) -> Poly {
        Poly::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) - other.coeff(k)).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![C64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    /// Divide all coefficients so the leading one becomes 1.
    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let lead = self.leading();
        Poly::new(self.coeffs.iter().map(|&c| c / lead).collect())
    }

    /// Drop trailing coefficients that are negligible relative to the largest
    /// one. Used after arithmetic that cancels leading terms exactly in
    /// theory but leaves rounding residue in practice.
    pub fn trim_relative(&self, rel_tol: f64) -> Poly {
        let scale = self.max_coeff_norm();
        if scale == 0.0 {
            return Poly::zero();
        }
        let mut coeffs = self.coeffs.clone();
        while coeffs.last().is_some_and(|c| c.norm() <= rel_tol * scale) {
            coeffs.pop();
        }
        Poly::new(coeffs)
    }

    /// All complex roots with multiplicity, flat (a root of multiplicity m
    /// appears m times). Companion-matrix eigenvalues with balancing, then a
    /// Newton polish on each root.
    pub fn roots(&self) -> Result<Vec<C64>, PolyError> {
        Ok(self
            .clustered_roots()?
            .into_iter()
            .flat_map(|(z, m)| std::iter::repeat_n(z, m))
            .collect())
    }

    /// Roots grouped into multiplicity clusters (radius `1e-7 · max(1, |z|)`).
    pub fn clustered_roots(&self) -> Result<Vec<(C64, usize)>, PolyError> {
        if self.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        if self.degree() == 0 {
            return Ok(Vec::new());
        }
        // factor out exact roots at the origin first
        let zero_count = self
            .coeffs
            .iter()
            .take_while(|c| c.norm_sqr() == 0.0)
            .count();
        let reduced = Poly {
            coeffs: self.coeffs[zero_count..].to_vec(),
        };
        let mut raw = if reduced.degree() == 0 {
            Vec::new()
        } else {
            reduced.nonzero_roots()?
        };
        raw.extend(std::iter::repeat_n(C64::new(0.0, 0.0), zero_count));
        let mut clusters = cluster(raw, CLUSTER_RADIUS);
        clusters = self.consolidate_multiple_roots(clusters);
        clusters.sort_by(|a, b| (a.0.re, a.0.im).partial_cmp(&(b.0.re, b.0.im)).unwrap());
        Ok(clusters)
    }

    /// Merge clusters that together form one multiple root.
    ///
    /// An m-fold root is only located to `eps^(1/m)` from polynomial values,
    /// which for m ≥ 3 exceeds the base clustering radius: the copies land in
    /// separate clusters. Candidate groups are gathered at a coarse radius,
    /// refined through the (m−1)-th derivative (where the root is simple),
    /// and accepted only when `(z − r)^m` actually divides the polynomial.
    fn consolidate_multiple_roots(&self, clusters: Vec<(C64, usize)>) -> Vec<(C64, usize)> {
        let coarse = 2e-3;
        let groups = link_groups(&clusters, coarse);
        let scale = self.max_coeff_norm();
        let mut out: Vec<(C64, usize)> = Vec::new();
        for group in groups {
            let m: usize = group.iter().map(|&(_, k)| k).sum();
            let multi_cluster = group.len() > 1 && m >= 2;
            let lone_multiple = group.len() == 1 && group[0].1 >= 2;
            if !multi_cluster && !lone_multiple {
                out.extend(group);
                continue;
            }
            let centroid = group.iter().map(|&(z, k)| z * k as f64).sum::<C64>() / m as f64;
            if centroid.norm_sqr() == 0.0 {
                out.extend(group);
                continue;
            }
            let mut dp = self.clone();
            for _ in 0..m - 1 {
                dp = dp.derivative();
            }
            let dpp = dp.derivative();
            let refined = newton_polish(&dp, &dpp, centroid, dp.max_coeff_norm());
            if multi_cluster {
                let divisor = Poly::from_roots(&vec![refined; m]);
                let (_, rem) = self.div_rem(&divisor);
                let rel = rem.max_coeff_norm() / scale.max(1e-300);
                if rel <= 1e-9 {
                    out.push((refined, m));
                } else {
                    out.extend(group);
                }
            } else {
                // a base cluster that already carries the multiplicity: a
                // derivative polish only sharpens the representative
                if (refined - centroid).norm() <= 1e-5 * centroid.norm().max(1.0) {
                    out.push((refined, m));
                } else {
                    out.extend(group);
                }
            }
        }
        out
    }

    /// Roots of a polynomial with nonzero constant term.
    fn nonzero_roots(&self) -> Result<Vec<C64>, PolyError> {
        let d = self.degree();
        let lead = self.leading();
        match d {
            1 => return Ok(vec![-self.coeffs[0] / self.coeffs[1]]),
            2 => {
                let a = self.coeffs[2];
                let b = self.coeffs[1];
                let c = self.coeffs[0];
                let disc = (b * b - 4.0 * a * c).sqrt();
                // pick the sign avoiding cancellation
                let q = if (b + disc).norm() >= (b - disc).norm() {
                    -0.5 * (b + disc)
                } else {
                    -0.5 * (b - disc)
                };
                let r1 = q / a;
                let r2 = c / q;
                return Ok(vec![r1, r2]);
            }
            _ => {}
        }
        let mut companion = DMatrix::from_element(d, d, C64::new(0.0, 0.0));
        for i in 1..d {
            companion[(i, i - 1)] = C64::new(1.0, 0.0);
        }
        for i in 0..d {
            companion[(i, d - 1)] = -self.coeffs[i] / lead;
        }
        let mut roots = schur::eigenvalues(&companion)?;
        let dp = self.derivative();
        let dpp = dp.derivative();
        for r in roots.iter_mut() {
            *r = schroeder_polish(self, &dp, &dpp, *r);
        }
        Ok(roots)
    }

    /// Quotient and remainder of division by a monic-or-not divisor.
    pub fn div_rem(&self, divisor: &Poly) -> (Poly, Poly) {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        if self.degree() < divisor.degree() || self.is_zero() {
            return (Poly::zero(), self.clone());
        }
        let mut rem = self.coeffs.clone();
        let dlead = divisor.leading();
        let dd = divisor.degree();
        let mut quot = vec![C64::new(0.0, 0.0); self.degree() - dd + 1];
        for k in (0..quot.len()).rev() {
            let factor = rem[k + dd] / dlead;
            quot[k] = factor;
            for (j, &c) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= factor * c;
            }
        }
        rem.truncate(dd);
        (Poly::new(quot), Poly::new(rem))
    }
}

/// Newton iteration on `u = p/p'`, whose roots are all simple: converges
/// quadratically to roots of any multiplicity, so the eigensolver's
/// `eps^(1/m)` dispersion around an m-fold root collapses to one point.
fn schroeder_polish(p: &Poly, dp: &Poly, dpp: &Poly, start: C64) -> C64 {
    let mut z = start;
    let mut best = z;
    let mut best_u = f64::INFINITY;
    for _ in 0..8 {
        let pv = p.eval(z);
        let dv = dp.eval(z);
        if dv.norm() == 0.0 {
            break;
        }
        let u = pv / dv;
        if u.norm() < best_u {
            best_u = u.norm();
            best = z;
        }
        if u.norm() <= 1e-15 * z.norm().max(1.0) {
            break;
        }
        // u' = 1 − p·p''/p'²
        let uprime = C64::new(1.0, 0.0) - pv * dpp.eval(z) / (dv * dv);
        if uprime.norm() < 1e-14 {
            break;
        }
        let next = z - u / uprime;
        if !next.re.is_finite() || !next.im.is_finite() || (next - z).norm() > 1.0 + z.norm() {
            break;
        }
        z = next;
    }
    best
}

/// A few Newton steps, kept only while the residual improves.
fn newton_polish(p: &Poly, dp: &Poly, start: C64, scale: f64) -> C64 {
    let mut z = start;
    let mut best = z;
    let mut best_res = p.eval(z).norm();
    for _ in 0..4 {
        if best_res <= 1e-15 * scale {
            break;
        }
        let d = dp.eval(z);
        if d.norm() == 0.0 {
            break;
        }
        z -= p.eval(z) / d;
        let res = p.eval(z).norm();
        if res < best_res {
            best = z;
            best_res = res;
        } else {
            break;
        }
    }
    best
}

/// Base multiplicity-clustering radius (relative to `max(1, |z|)`).
const CLUSTER_RADIUS: f64 = 1e-7;

/// Single-linkage clustering; the cluster representative is the mean.
/// Double roots split by the eigensolver land within ~1e-8 of each other and
/// are re-merged here.
fn cluster(mut roots: Vec<C64>, radius: f64) -> Vec<(C64, usize)> {
    roots.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    let mut clusters: Vec<Vec<C64>> = Vec::new();
    'outer: for r in roots {
        for cl in clusters.iter_mut() {
            if cl
                .iter()
                .any(|c| (c - r).norm() <= radius * c.norm().max(1.0))
            {
                cl.push(r);
                continue 'outer;
            }
        }
        clusters.push(vec![r]);
    }
    clusters
        .into_iter()
        .map(|cl| {
            let m = cl.len();
            let mean = cl.iter().sum::<C64>() / m as f64;
            (mean, m)
        })
        .collect()
}

/// Single-linkage grouping of weighted clusters at a coarse relative radius.
fn link_groups(clusters: &[(C64, usize)], radius: f64) -> Vec<Vec<(C64, usize)>> {
    let mut groups: Vec<Vec<(C64, usize)>> = Vec::new();
    'outer: for &(z, m) in clusters {
        for g in groups.iter_mut() {
            if g.iter()
                .any(|(c, _)| (c - z).norm() <= radius * c.norm().max(1.0))
            {
                g.push((z, m));
                continue 'outer;
            }
        }
        groups.push(vec![(z, m)]);
    }
    groups
}
