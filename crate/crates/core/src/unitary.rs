//! Structured unitary matrices: the frames whose defining system produces
//! disk isometries, their Schur normalization, and the two inductive
//! constructions (generic Hessenberg-type frames and the constant-diagonal
//! one-parameter family).

use nalgebra::DMatrix;
use rand::Rng;
use thiserror::Error;

use crate::sampling::seeded_rng;
use crate::schur::{schur, SchurError};
use crate::{c64, C64};

/// Unitarity acceptance threshold for externally supplied matrices.
pub const UNITARY_TOL: f64 = 1e-10;
/// Tolerance for the structural zeros of the lower block.
pub const TRIANGULAR_TOL: f64 = 1e-14;
/// Tolerance for detecting a constant lower-block diagonal.
pub const CONSTANT_DIAG_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum UnitaryError {
    #[error("matrix is not unitary (residual {0:.3e})")]
    NotUnitary(f64),
    #[error("matrix must be square, got {0}x{1}")]
    NotSquare(usize, usize),
    #[error("frame dimension must be at least 3, got {0}")]
    TooSmall(usize),
    #[error("ζ must satisfy 0 < |ζ| < 1, got |ζ| = {0}")]
    InvalidZeta(f64),
    #[error("Schur decomposition failed: {0}")]
    Schur(#[from] SchurError),
}

/// Structure flags detected on a frame.
///
/// `lower_block_upper_triangular` refers to the zeros `u_{kj} = 0` for
/// `2 ≤ j ≤ k−1` in the paper's 1-based indexing: the trailing n×n block is
/// upper triangular while the first column stays free.
/// `constant_diagonal` is set when all trailing diagonal entries agree and
/// the common value lies in the punctured open disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameFlags {
    pub lower_block_upper_triangular: bool,
    pub constant_diagonal: Option<C64>,
}

/// An (n+1)×(n+1) unitary matrix together with its structure flags.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryFrame {
    entries: DMatrix<C64>,
    flags: FrameFlags,
}

impl UnitaryFrame {
    /// Validate a square matrix as unitary and detect its structure flags.
    pub fn check_unitary(m: DMatrix<C64>) -> Result<Self, UnitaryError> {
        if m.nrows() != m.ncols() {
            return Err(UnitaryError::NotSquare(m.nrows(), m.ncols()));
        }
        let residual = unitarity_residual(&m);
        if residual >= UNITARY_TOL {
            return Err(UnitaryError::NotUnitary(residual));
        }
        let flags = detect_flags(&m);
        Ok(UnitaryFrame { entries: m, flags })
    }

    pub fn identity(dim: usize) -> Self {
        UnitaryFrame::check_unitary(DMatrix::identity(dim, dim)).unwrap()
    }

    /// Matrix dimension n+1.
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Ball dimension n of the target Δ×𝔹ⁿ.
    pub fn ball_dim(&self) -> usize {
        self.dim() - 1
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn flags(&self) -> FrameFlags {
        self.flags
    }

    /// Entry in the paper's 1-based indexing.
    pub fn u(&self, i: usize, j: usize) -> C64 {
        self.entries[(i - 1, j - 1)]
    }

    /// Trailing n×n block `U''`.
    pub fn lower_block(&self) -> DMatrix<C64> {
        let n = self.ball_dim();
        self.entries.view((1, 1), (n, n)).into()
    }

    pub fn unitarity_residual(&self) -> f64 {
        unitarity_residual(&self.entries)
    }

    /// `det U''`, which measures the degeneracy of the frame: the first
    /// component of the solved isometry vanishes identically iff this is 0.
    pub fn lower_block_det(&self) -> C64 {
        self.lower_block().determinant()
    }

    /// Conjugate by `diag(1, B)` so the lower block becomes upper triangular,
    /// with the block's eigenvalues appearing on the diagonal in canonical
    /// order. Returns the normalized frame and `B`.
    pub fn schur_normalize(&self) -> Result<(UnitaryFrame, DMatrix<C64>), UnitaryError> {
        let n = self.ball_dim();
        let dec = schur(&self.lower_block())?;
        let b = dec.q.adjoint();
        let mut conj = DMatrix::identity(n + 1, n + 1);
        conj.view_mut((1, 1), (n, n)).copy_from(&b);
        let mut conj_inv = DMatrix::identity(n + 1, n + 1);
        conj_inv.view_mut((1, 1), (n, n)).copy_from(&dec.q);
        let normalized = &conj * &self.entries * &conj_inv;
        let frame = UnitaryFrame::check_unitary(normalized)?;
        Ok((frame, b))
    }

    /// Diagonal entries of the lower block with modulus 1 (within 1e-9),
    /// reported with the paper's 1-based slot index. Requires a triangular
    /// frame for the diagonal to be meaningful.
    pub fn unit_modulus_diagonal(&self) -> Vec<(usize, C64)> {
        (2..=self.dim())
            .filter_map(|j| {
                let v = self.u(j, j);
                ((v.norm() - 1.0).abs() < 1e-9).then_some((j, v))
            })
            .collect()
    }

    /// Embed this frame into one more dimension by inserting a decoupled
    /// unit-modulus slot at position 2 (paper indexing). The solved isometry
    /// of the result has its first ball component identically zero.
    pub fn insert_unit_slot(&self, phase: f64) -> UnitaryFrame {
        let k = self.dim();
        let mut m = DMatrix::from_element(k + 1, k + 1, c64(0.0, 0.0));
        let map = |i: usize| if i == 0 { 0 } else { i + 1 };
        for i in 0..k {
            for j in 0..k {
                m[(map(i), map(j))] = self.entries[(i, j)];
            }
        }
        m[(1, 1)] = C64::from_polar(1.0, phase);
        UnitaryFrame::check_unitary(m).expect("unit-slot embedding preserves unitarity")
    }
}

fn unitarity_residual(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let prod = m * m.adjoint();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let expect = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((prod[(i, j)] - c64(expect, 0.0)).norm());
        }
    }
    worst
}

fn detect_flags(m: &DMatrix<C64>) -> FrameFlags {
    let k = m.nrows();
    let mut triangular = true;
    for i in 2..k {
        for j in 1..i {
            if m[(i, j)].norm() > TRIANGULAR_TOL {
                triangular = false;
            }
        }
    }
    let mut constant = None;
    if k >= 2 {
        let first = m[(1, 1)];
        let all_equal = (2..k).all(|j| (m[(j, j)] - first).norm() < CONSTANT_DIAG_TOL);
        let in_punctured_disk = first.norm() > CONSTANT_DIAG_TOL && first.norm() < 1.0 - 1e-12;
        if all_equal && in_punctured_disk {
            constant = Some(first);
        }
    }
    FrameFlags {
        lower_block_upper_triangular: triangular,
        constant_diagonal: constant,
    }
}

/// The explicit 3×3 seed frame with both structural properties.
fn hessenberg_base(c_abs: f64, c_arg: f64, s_arg: f64, beta: C64, chi: f64) -> DMatrix<C64> {
    let s_abs = (1.0 - c_abs * c_abs).sqrt();
    let c = C64::from_polar(c_abs, c_arg);
    let s = C64::from_polar(s_abs, s_arg);
    let v = [c.conj(), c64(0.0, 0.0), -s.conj()];
    let e2 = [c64(0.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0)];
    let alpha = C64::from_polar((1.0 - beta.norm_sqr()).sqrt(), 0.0);
    let chi = C64::from_polar(1.0, chi);
    let mut m = DMatrix::from_element(3, 3, c64(0.0, 0.0));
    for j in 0..3 {
        m[(0, j)] = chi * (-beta.conj() * v[j] + alpha.conj() * e2[j]);
        m[(1, j)] = alpha * v[j] + beta * e2[j];
    }
    m[(2, 0)] = s;
    m[(2, 2)] = c;
    m
}

/// One induction step: extend a structured frame in U(m) to U(m+1), keeping
/// the triangular zeros and placing `beta` on the new diagonal slot.
fn extend_frame(v: &DMatrix<C64>, beta: C64, chi: f64) -> DMatrix<C64> {
    let m = v.nrows();
    let mut out = DMatrix::from_element(m + 1, m + 1, c64(0.0, 0.0));
    // v_ext = first row of V with a zero inserted at position 2
    let mut v_ext = vec![c64(0.0, 0.0); m + 1];
    v_ext[0] = v[(0, 0)];
    for j in 1..m {
        v_ext[j + 1] = v[(0, j)];
    }
    let alpha = C64::from_polar((1.0 - beta.norm_sqr()).sqrt(), 0.0);
    let chi = C64::from_polar(1.0, chi);
    for j in 0..m + 1 {
        let e2 = if j == 1 { c64(1.0, 0.0) } else { c64(0.0, 0.0) };
        out[(0, j)] = chi * (-beta.conj() * v_ext[j] + alpha.conj() * e2);
        out[(1, j)] = alpha * v_ext[j] + beta * e2;
    }
    // remaining rows: rows 2..m of V with the zero column inserted
    for i in 1..m {
        out[(i + 1, 0)] = v[(i, 0)];
        for j in 1..m {
            out[(i + 1, j + 1)] = v[(i, j)];
        }
    }
    out
}

/// Build a frame in U(n+1) with upper-triangular lower block and all trailing
/// diagonal moduli strictly inside (0, 1), by induction from the explicit 3×3
/// seed. Seed 0 reproduces the canonical matrices; other seeds randomize the
/// free orthonormal-pair choice at every step.
pub fn build_hessenberg_unitary(n: usize, seed: u64) -> Result<UnitaryFrame, UnitaryError> {
    if n < 2 {
        return Err(UnitaryError::TooSmall(n + 1));
    }
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = if seed == 0 {
        hessenberg_base(inv_sqrt2, 0.0, 0.0, c64(inv_sqrt2, 0.0), 0.0)
    } else {
        let mut rng = seeded_rng(seed);
        let draw_modulus = |rng: &mut rand_chacha::ChaCha8Rng| 0.2 + 0.75 * rng.random::<f64>();
        let draw_angle =
            |rng: &mut rand_chacha::ChaCha8Rng| 2.0 * std::f64::consts::PI * rng.random::<f64>();
        let c_abs = draw_modulus(&mut rng);
        let c_arg = draw_angle(&mut rng);
        let s_arg = draw_angle(&mut rng);
        let beta = C64::from_polar(draw_modulus(&mut rng), draw_angle(&mut rng));
        let chi = draw_angle(&mut rng);
        let mut base = hessenberg_base(c_abs, c_arg, s_arg, beta, chi);
        for _ in 3..=n {
            let beta = C64::from_polar(draw_modulus(&mut rng), draw_angle(&mut rng));
            let chi = draw_angle(&mut rng);
            base = extend_frame(&base, beta, chi);
        }
        base
    };
    if seed == 0 {
        for _ in 3..=n {
            m = extend_frame(&m, c64(inv_sqrt2, 0.0), 0.0);
        }
    }
    UnitaryFrame::check_unitary(m)
}

/// Build the constant-diagonal family frame in U(n+1): every trailing
/// diagonal entry equals ζ and the induced rational map is exactly
/// `z((ζ̄z−1)/(z−ζ))ⁿ`. The first row is rotated by a unimodular constant to
/// pin `u₁₁ = ζ̄ⁿ`; this amounts to precomposing the isometry with a disk
/// rotation, which does not change its congruence class.
pub fn build_family_unitary(zeta: C64, n: usize) -> Result<UnitaryFrame, UnitaryError> {
    if n < 2 {
        return Err(UnitaryError::TooSmall(n + 1));
    }
    let r = zeta.norm();
    if !(r > 0.0 && r < 1.0) {
        return Err(UnitaryError::InvalidZeta(r));
    }
    let s = (1.0 - zeta.norm_sqr()).sqrt();
    let mut m = DMatrix::from_element(3, 3, c64(0.0, 0.0));
    let zc = zeta.conj();
    m[(0, 0)] = -zc * zc;
    m[(0, 1)] = c64(-s, 0.0);
    m[(0, 2)] = zc * s;
    m[(1, 0)] = -zc * s;
    m[(1, 1)] = zeta;
    m[(1, 2)] = c64(s * s, 0.0);
    m[(2, 0)] = c64(s, 0.0);
    m[(2, 2)] = zeta;
    for _ in 3..=n {
        m = extend_family(&m, zeta, s);
    }
    // phase-fix the first row so u₁₁ = ζ̄ⁿ exactly
    let target = zc.powu(n as u32);
    let current = m[(0, 0)];
    let phase = target / current;
    debug_assert!((phase.norm() - 1.0).abs() < 1e-12);
    for j in 0..m.ncols() {
        m[(0, j)] *= phase;
    }
    UnitaryFrame::check_unitary(m)
}

/// Family induction step with the fixed orthonormal pair of the construction.
fn extend_family(v: &DMatrix<C64>, zeta: C64, s: f64) -> DMatrix<C64> {
    let m = v.nrows();
    let mut out = DMatrix::from_element(m + 1, m + 1, c64(0.0, 0.0));
    let mut v_ext = vec![c64(0.0, 0.0); m + 1];
    v_ext[0] = v[(0, 0)];
    for j in 1..m {
        v_ext[j + 1] = v[(0, j)];
    }
    let zc = zeta.conj();
    for j in 0..m + 1 {
        let e2 = if j == 1 { c64(1.0, 0.0) } else { c64(0.0, 0.0) };
        out[(0, j)] = -zc * v_ext[j] + s * e2;
        out[(1, j)] = s * v_ext[j] + zeta * e2;
    }
    for i in 1..m {
        out[(i + 1, 0)] = v[(i, 0)];
        for j in 1..m {
            out[(i + 1, j + 1)] = v[(i, j)];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::random_unitary;
    use crate::schur::eigenvalues;

    fn seed_matrix() -> DMatrix<C64> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        DMatrix::from_row_slice(
            3,
            3,
            &[
                c64(-0.5, 0.0),
                c64(h, 0.0),
                c64(0.5, 0.0),
                c64(0.5, 0.0),
                c64(h, 0.0),
                c64(-0.5, 0.0),
                c64(h, 0.0),
                c64(0.0, 0.0),
                c64(h, 0.0),
            ],
        )
    }

    #[test]
    fn identity_flags() {
        let f = UnitaryFrame::identity(3);
        assert!(f.flags().lower_block_upper_triangular);
        // diagonal 1 is not in the punctured open disk
        assert!(f.flags().constant_diagonal.is_none());
    }

    #[test]
    fn explicit_seed_matrix_is_accepted() {
        let f = UnitaryFrame::check_unitary(seed_matrix()).unwrap();
        assert!(f.flags().lower_block_upper_triangular);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((f.u(2, 2).norm() - h).abs() < 1e-14);
        assert!((f.u(3, 3).norm() - h).abs() < 1e-14);
    }

    #[test]
    fn shear_matrix_is_rejected() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[c64(1.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0), c64(1.0, 0.0)],
        );
        assert!(matches!(
            UnitaryFrame::check_unitary(m),
            Err(UnitaryError::NotUnitary(_))
        ));
    }

    #[test]
    fn canonical_seed_reproduces_seed_matrix() {
        let f = build_hessenberg_unitary(2, 0).unwrap();
        let diff = (f.entries() - seed_matrix())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-15);
    }

    #[test]
    fn built_frames_satisfy_structure_for_all_sizes() {
        for n in 2..=6 {
            for seed in [0u64, 1, 7, 1234] {
                let f = build_hessenberg_unitary(n, seed).unwrap();
                assert_eq!(f.dim(), n + 1);
                assert!(f.unitarity_residual() < 1e-12, "n={n} seed={seed}");
                assert!(f.flags().lower_block_upper_triangular);
                for j in 2..=n + 1 {
                    let d = f.u(j, j).norm();
                    assert!(d > 0.0 && d < 1.0, "n={n} seed={seed} j={j} |u|={d}");
                }
            }
        }
    }

    #[test]
    fn modulus_product_identity() {
        // |u₁₁| = ∏ |u_jj| over the trailing diagonal, forced by unitarity
        for seed in [0u64, 3, 99] {
            let f = build_hessenberg_unitary(4, seed).unwrap();
            let prod: f64 = (2..=5).map(|j| f.u(j, j).norm()).product();
            assert!((f.u(1, 1).norm() - prod).abs() < 1e-10);
        }
    }

    #[test]
    fn family_base_matrix_matches_construction() {
        let zeta = c64(0.5, 0.0);
        let f = build_family_unitary(zeta, 2).unwrap();
        let s = (1.0 - 0.25f64).sqrt();
        // first row negated by the u₁₁ = ζ̄² phase fix
        let expected = DMatrix::from_row_slice(
            3,
            3,
            &[
                c64(0.25, 0.0),
                c64(s, 0.0),
                c64(-0.5 * s, 0.0),
                c64(-0.5 * s, 0.0),
                c64(0.5, 0.0),
                c64(0.75, 0.0),
                c64(s, 0.0),
                c64(0.0, 0.0),
                c64(0.5, 0.0),
            ],
        );
        let diff = (f.entries() - expected)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-14, "diff {diff}");
    }

    #[test]
    fn family_flags_and_u11() {
        for n in 2..=5 {
            let zeta = c64(0.3, 0.2);
            let f = build_family_unitary(zeta, n).unwrap();
            assert_eq!(f.flags().constant_diagonal, Some(zeta));
            assert!(f.flags().lower_block_upper_triangular);
            assert!((f.u(1, 1) - zeta.conj().powu(n as u32)).norm() < 1e-13);
        }
    }

    #[test]
    fn family_rejects_bad_zeta() {
        assert!(matches!(
            build_family_unitary(c64(1.5, 0.0), 2),
            Err(UnitaryError::InvalidZeta(_))
        ));
        assert!(matches!(
            build_family_unitary(c64(0.0, 0.0), 2),
            Err(UnitaryError::InvalidZeta(_))
        ));
    }

    #[test]
    fn schur_normalize_triangularizes_random_frames() {
        let mut rng = seeded_rng(5);
        for k in [4usize, 5] {
            let u = UnitaryFrame::check_unitary(random_unitary(k, &mut rng)).unwrap();
            let before = eigenvalues(&u.lower_block()).unwrap();
            let (normal, b) = u.schur_normalize().unwrap();
            assert!(normal.flags().lower_block_upper_triangular);
            assert!(normal.unitarity_residual() < 1e-12);
            // b is unitary and the diagonal matches the block spectrum
            let bres = (&b * b.adjoint() - DMatrix::<C64>::identity(k - 1, k - 1))
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            assert!(bres < 1e-12);
            let mut after: Vec<C64> = (2..=k).map(|j| normal.u(j, j)).collect();
            for want in before {
                let idx = after
                    .iter()
                    .position(|got| (got - want).norm() < 1e-9)
                    .expect("eigenvalue preserved");
                after.remove(idx);
            }
        }
    }

    #[test]
    fn schur_normalize_keeps_block_diagonal_spectrum() {
        // diag(e^{iθ}, V): the normalized lower block diagonal must carry V's
        // eigenvalues
        let mut rng = seeded_rng(8);
        let v = random_unitary(3, &mut rng);
        let mut m = DMatrix::from_element(4, 4, c64(0.0, 0.0));
        m[(0, 0)] = C64::from_polar(1.0, 0.9);
        m.view_mut((1, 1), (3, 3)).copy_from(&v);
        let frame = UnitaryFrame::check_unitary(m).unwrap();
        let (normal, _) = frame.schur_normalize().unwrap();
        let want = eigenvalues(&v).unwrap();
        for j in 2..=4 {
            let got = normal.u(j, j);
            assert!(
                want.iter().any(|w| (w - got).norm() < 1e-9),
                "diagonal {got} not an eigenvalue"
            );
        }
    }

    #[test]
    fn schur_normalize_is_idempotent_on_the_diagonal() {
        let mut rng = seeded_rng(21);
        let u = UnitaryFrame::check_unitary(random_unitary(5, &mut rng)).unwrap();
        let (n1, _) = u.schur_normalize().unwrap();
        let (n2, _) = n1.schur_normalize().unwrap();
        for j in 2..=5 {
            assert!((n1.u(j, j) - n2.u(j, j)).norm() < 1e-10);
        }
    }

    #[test]
    fn schur_normalize_fixes_already_normalized_frames() {
        // triangular lower block with canonically ordered diagonal: B = I
        let f = build_family_unitary(c64(0.4, 0.1), 3).unwrap();
        let (normal, b) = f.schur_normalize().unwrap();
        let id_gap = (&b - DMatrix::<C64>::identity(3, 3))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(id_gap < 1e-12, "B deviates from identity by {id_gap}");
        let frame_gap = (normal.entries() - f.entries())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(frame_gap < 1e-12);
    }

    #[test]
    fn unit_slot_embedding() {
        let f = build_hessenberg_unitary(2, 0).unwrap();
        let g = f.insert_unit_slot(0.4);
        assert_eq!(g.dim(), 4);
        assert!(g.unitarity_residual() < 1e-12);
        assert_eq!(g.unit_modulus_diagonal().len(), 1);
        assert_eq!(g.unit_modulus_diagonal()[0].0, 2);
        assert!(g.flags().lower_block_upper_triangular);
    }
}
