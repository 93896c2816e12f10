//! Dense complex eigensolver: Hessenberg reduction, shifted QR iteration,
//! Schur form with a canonical eigenvalue order, and a small Householder
//! least-squares routine.
//!
//! The matrices in this crate are tiny (companion matrices of polynomials of
//! degree ≲ 14 and lower blocks of unitary frames), so the implementation
//! favors clarity and determinism over blocked performance.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::C64;

const EPS: f64 = f64::EPSILON;
const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

#[derive(Debug, Error)]
pub enum SchurError {
    #[error("QR iteration failed to converge after {0} sweeps")]
    NoConvergence(usize),
    #[error("matrix must be square, got {0}x{1}")]
    NotSquare(usize, usize),
}

/// Unitary Schur decomposition `a = q · t · qᴴ` with `t` upper triangular.
///
/// The diagonal of `t` is sorted by ascending argument in `[0, 2π)`, ties by
/// ascending modulus, so the factorization is deterministic.
#[derive(Debug, Clone)]
pub struct ComplexSchur {
    pub q: DMatrix<C64>,
    pub t: DMatrix<C64>,
}

impl ComplexSchur {
    /// Diagonal of the triangular factor, i.e. the eigenvalues in canonical
    /// order.
    pub fn eigenvalues(&self) -> Vec<C64> {
        (0..self.t.nrows()).map(|i| self.t[(i, i)]).collect()
    }
}

/// Key used to order eigenvalues canonically.
fn order_key(z: C64) -> (f64, f64) {
    let mut arg = z.arg();
    if arg < 0.0 {
        arg += 2.0 * std::f64::consts::PI;
    }
    (arg, z.norm())
}

/// Complex Givens rotation `[[c, s], [-s̄, c]]` (c real) mapping `(f, g)` to
/// `(r, 0)`.
fn givens(f: C64, g: C64) -> (f64, C64, C64) {
    if g.norm_sqr() == 0.0 {
        return (1.0, C64::new(0.0, 0.0), f);
    }
    if f.norm_sqr() == 0.0 {
        let s = g.conj() / g.norm();
        return (0.0, s, C64::new(g.norm(), 0.0));
    }
    let fa = f.norm();
    let d = (f.norm_sqr() + g.norm_sqr()).sqrt();
    let c = fa / d;
    let phase = f / fa;
    let s = phase * g.conj() / d;
    (c, s, phase * d)
}

/// Householder reflection of a (sub)column onto a multiple of e₁.
/// Returns the reflection vector `v` and `beta = 2 / vᴴv`; `v = 0` signals a
/// no-op.
fn householder_vector(x: &[C64]) -> (Vec<C64>, f64, C64) {
    let norm: f64 = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return (vec![C64::new(0.0, 0.0); x.len()], 0.0, C64::new(0.0, 0.0));
    }
    let x0 = x[0];
    let phase = if x0.norm() == 0.0 {
        C64::new(1.0, 0.0)
    } else {
        x0 / x0.norm()
    };
    let alpha = -phase * norm;
    let mut v = x.to_vec();
    v[0] -= alpha;
    let vnorm_sqr: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    if vnorm_sqr == 0.0 {
        return (v, 0.0, alpha);
    }
    (v, 2.0 / vnorm_sqr, alpha)
}

/// Reduce `a` to upper Hessenberg form by unitary similarity; accumulates the
/// transform into `q` when given.
fn hessenberg_in_place(a: &mut DMatrix<C64>, mut q: Option<&mut DMatrix<C64>>) {
    let n = a.nrows();
    for k in 0..n.saturating_sub(2) {
        let col: Vec<C64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        let (v, beta, _alpha) = householder_vector(&col);
        if beta == 0.0 {
            continue;
        }
        // a ← H a, rows k+1.., all columns
        for j in 0..n {
            let mut dot = C64::new(0.0, 0.0);
            for (idx, vi) in v.iter().enumerate() {
                dot += vi.conj() * a[(k + 1 + idx, j)];
            }
            dot *= beta;
            for (idx, vi) in v.iter().enumerate() {
                a[(k + 1 + idx, j)] -= vi * dot;
            }
        }
        // a ← a H, columns k+1.., all rows
        for i in 0..n {
            let mut dot = C64::new(0.0, 0.0);
            for (idx, vi) in v.iter().enumerate() {
                dot += a[(i, k + 1 + idx)] * *vi;
            }
            dot *= beta;
            for (idx, vi) in v.iter().enumerate() {
                a[(i, k + 1 + idx)] -= dot * vi.conj();
            }
        }
        if let Some(q) = q.as_deref_mut() {
            for i in 0..n {
                let mut dot = C64::new(0.0, 0.0);
                for (idx, vi) in v.iter().enumerate() {
                    dot += q[(i, k + 1 + idx)] * *vi;
                }
                dot *= beta;
                for (idx, vi) in v.iter().enumerate() {
                    q[(i, k + 1 + idx)] -= dot * vi.conj();
                }
            }
        }
        // enforce the Hessenberg zeros exactly
        for i in k + 2..n {
            a[(i, k)] = C64::new(0.0, 0.0);
        }
    }
}

/// Wilkinson shift: eigenvalue of the trailing 2×2 block closest to its
/// bottom-right entry.
fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr - 4.0 * det).sqrt();
    let mu1 = (tr + disc) * 0.5;
    let mu2 = (tr - disc) * 0.5;
    if (mu1 - d).norm() <= (mu2 - d).norm() {
        mu1
    } else {
        mu2
    }
}

/// One explicit shifted QR sweep on the active window `lo..=hi`.
fn qr_sweep(h: &mut DMatrix<C64>, q: Option<&mut DMatrix<C64>>, lo: usize, hi: usize, shift: C64) {
    let n = h.nrows();
    let mut rotations = Vec::with_capacity(hi - lo);
    for i in lo..=hi {
        h[(i, i)] -= shift;
    }
    // left pass: zero the subdiagonal of the shifted window
    for i in lo..hi {
        let (c, s, r) = givens(h[(i, i)], h[(i + 1, i)]);
        rotations.push((c, s));
        h[(i, i)] = r;
        h[(i + 1, i)] = C64::new(0.0, 0.0);
        for j in i + 1..n {
            let top = h[(i, j)];
            let bot = h[(i + 1, j)];
            h[(i, j)] = c * top + s * bot;
            h[(i + 1, j)] = -s.conj() * top + c * bot;
        }
    }
    // right pass: multiply by the adjoints, restoring Hessenberg form
    let mut q = q;
    for (k, (c, s)) in rotations.iter().enumerate() {
        let i = lo + k;
        let row_max = (i + 1).min(hi);
        for r in 0..=row_max + 1 {
            if r >= n {
                break;
            }
            let left = h[(r, i)];
            let right = h[(r, i + 1)];
            h[(r, i)] = c * left + s.conj() * right;
            h[(r, i + 1)] = -*s * left + c * right;
        }
        if let Some(q) = q.as_deref_mut() {
            for r in 0..n {
                let left = q[(r, i)];
                let right = q[(r, i + 1)];
                q[(r, i)] = c * left + s.conj() * right;
                q[(r, i + 1)] = -*s * left + c * right;
            }
        }
    }
    for i in lo..=hi {
        h[(i, i)] += shift;
    }
}

fn subdiag_negligible(h: &DMatrix<C64>, i: usize) -> bool {
    h[(i, i - 1)].norm() <= EPS * (h[(i - 1, i - 1)].norm() + h[(i, i)].norm())
}

/// Run the shifted QR iteration to triangular form. `q`, when given, starts
/// as the accumulated Hessenberg transform and ends with `a = q t qᴴ`.
fn qr_iterate(h: &mut DMatrix<C64>, mut q: Option<&mut DMatrix<C64>>) -> Result<(), SchurError> {
    let n = h.nrows();
    if n <= 1 {
        return Ok(());
    }
    let mut hi = n - 1;
    let mut sweeps_here = 0usize;
    loop {
        // deflate converged trailing eigenvalues
        while hi > 0 && subdiag_negligible(h, hi) {
            h[(hi, hi - 1)] = C64::new(0.0, 0.0);
            hi -= 1;
            sweeps_here = 0;
        }
        if hi == 0 {
            return Ok(());
        }
        // active window [lo, hi]
        let mut lo = hi;
        while lo > 0 && !subdiag_negligible(h, lo) {
            lo -= 1;
        }
        if lo > 0 {
            h[(lo, lo - 1)] = C64::new(0.0, 0.0);
        }
        sweeps_here += 1;
        if sweeps_here > MAX_SWEEPS_PER_EIGENVALUE {
            return Err(SchurError::NoConvergence(sweeps_here));
        }
        let shift = if sweeps_here.is_multiple_of(12) {
            // exceptional shift to break rare symmetric cycles
            h[(hi, hi)] + 0.75 * h[(hi, hi - 1)].norm() * C64::new(1.0, 0.0)
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };
        qr_sweep(h, q.as_deref_mut(), lo, hi, shift);
    }
}

/// Swap the adjacent diagonal entries `t[i,i]` and `t[i+1,i+1]` of a
/// triangular matrix by a unitary similarity, updating `q` alongside.
fn swap_adjacent(t: &mut DMatrix<C64>, q: &mut DMatrix<C64>, i: usize) {
    let n = t.nrows();
    let a = t[(i, i)];
    let b = t[(i, i + 1)];
    let d = t[(i + 1, i + 1)];
    // eigenvector of [[a, b], [0, d]] for eigenvalue d
    let (c, s, _r) = givens(b, d - a);
    if c == 1.0 && s.norm_sqr() == 0.0 && (d - a).norm() > 0.0 {
        // b = 0 with distinct entries: plain permutation
        t.swap_rows(i, i + 1);
        t.swap_columns(i, i + 1);
        q.swap_columns(i, i + 1);
        return;
    }
    // rows i, i+1
    for j in i..n {
        let top = t[(i, j)];
        let bot = t[(i + 1, j)];
        t[(i, j)] = c * top + s * bot;
        t[(i + 1, j)] = -s.conj() * top + c * bot;
    }
    // columns i, i+1
    for r in 0..=i + 1 {
        let left = t[(r, i)];
        let right = t[(r, i + 1)];
        t[(r, i)] = c * left + s.conj() * right;
        t[(r, i + 1)] = -s * left + c * right;
    }
    for r in 0..n {
        let left = q[(r, i)];
        let right = q[(r, i + 1)];
        q[(r, i)] = c * left + s.conj() * right;
        q[(r, i + 1)] = -s * left + c * right;
    }
    t[(i + 1, i)] = C64::new(0.0, 0.0);
}

/// Schur decomposition with canonically ordered diagonal.
pub fn schur(a: &DMatrix<C64>) -> Result<ComplexSchur, SchurError> {
    if a.nrows() != a.ncols() {
        return Err(SchurError::NotSquare(a.nrows(), a.ncols()));
    }
    let n = a.nrows();
    let mut t = a.clone();
    let mut q = DMatrix::identity(n, n);
    hessenberg_in_place(&mut t, Some(&mut q));
    qr_iterate(&mut t, Some(&mut q))?;
    // zero the strictly lower part left behind by deflation
    for i in 1..n {
        for j in 0..i {
            t[(i, j)] = C64::new(0.0, 0.0);
        }
    }
    // bubble the diagonal into canonical order
    loop {
        let mut swapped = false;
        for i in 0..n.saturating_sub(1) {
            let ki = order_key(t[(i, i)]);
            let kj = order_key(t[(i + 1, i + 1)]);
            if kj < ki {
                swap_adjacent(&mut t, &mut q, i);
                swapped = true;
            }
        }
        if !swapped {
            break;
        }
    }
    Ok(ComplexSchur { q, t })
}

/// Eigenvalues of a general complex matrix, in canonical order.
///
/// The matrix is balanced first (diagonal similarity with powers of two), so
/// companion matrices of badly scaled polynomials behave well.
pub fn eigenvalues(a: &DMatrix<C64>) -> Result<Vec<C64>, SchurError> {
    if a.nrows() != a.ncols() {
        return Err(SchurError::NotSquare(a.nrows(), a.ncols()));
    }
    let mut m = a.clone();
    balance(&mut m);
    hessenberg_in_place(&mut m, None);
    qr_iterate(&mut m, None)?;
    let mut eigs: Vec<C64> = (0..m.nrows()).map(|i| m[(i, i)]).collect();
    eigs.sort_by(|x, y| order_key(*x).partial_cmp(&order_key(*y)).unwrap());
    Ok(eigs)
}

/// Parlett–Reinsch balancing with radix-2 scale factors.
fn balance(a: &mut DMatrix<C64>) {
    let n = a.nrows();
    let radix = 2.0f64;
    loop {
        let mut converged = true;
        for i in 0..n {
            let mut c: f64 = (0..n).filter(|&j| j != i).map(|j| a[(j, i)].norm()).sum();
            let mut r: f64 = (0..n).filter(|&j| j != i).map(|j| a[(i, j)].norm()).sum();
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0f64;
            while c < r / radix {
                c *= radix;
                r /= radix;
                f *= radix;
            }
            while c >= r * radix {
                c /= radix;
                r *= radix;
                f /= radix;
            }
            if c + r < 0.95 * s {
                converged = false;
                for j in 0..n {
                    a[(i, j)] /= f;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
        if converged {
            break;
        }
    }
}

/// Least-squares solution of an overdetermined complex system by Householder
/// QR. Returns the solution and the residual norm `‖a·x − b‖₂`.
pub fn least_squares(a: &DMatrix<C64>, b: &[C64]) -> (Vec<C64>, f64) {
    let m = a.nrows();
    let n = a.ncols();
    assert!(m >= n, "least_squares expects m >= n");
    assert_eq!(b.len(), m);
    let mut r = a.clone();
    let mut rhs = b.to_vec();
    for k in 0..n {
        let col: Vec<C64> = (k..m).map(|i| r[(i, k)]).collect();
        let (v, beta, alpha) = householder_vector(&col);
        if beta == 0.0 {
            continue;
        }
        r[(k, k)] = alpha;
        for i in k + 1..m {
            r[(i, k)] = C64::new(0.0, 0.0);
        }
        for j in k + 1..n {
            let mut dot = C64::new(0.0, 0.0);
            for (idx, vi) in v.iter().enumerate() {
                dot += vi.conj() * r[(k + idx, j)];
            }
            dot *= beta;
            for (idx, vi) in v.iter().enumerate() {
                r[(k + idx, j)] -= *vi * dot;
            }
        }
        let mut dot = C64::new(0.0, 0.0);
        for (idx, vi) in v.iter().enumerate() {
            dot += vi.conj() * rhs[k + idx];
        }
        dot *= beta;
        for (idx, vi) in v.iter().enumerate() {
            rhs[k + idx] -= *vi * dot;
        }
    }
    // back substitution
    let mut x = vec![C64::new(0.0, 0.0); n];
    for k in (0..n).rev() {
        let mut acc = rhs[k];
        for j in k + 1..n {
            acc -= r[(k, j)] * x[j];
        }
        let diag = r[(k, k)];
        x[k] = if diag.norm() == 0.0 {
            C64::new(0.0, 0.0)
        } else {
            acc / diag
        };
    }
    let residual: f64 = rhs[n..].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    (x, residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use crate::sampling::random_unitary;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn reconstruction_error(a: &DMatrix<C64>, s: &ComplexSchur) -> f64 {
        let rebuilt = &s.q * &s.t * s.q.adjoint();
        (a - rebuilt).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
        use rand::Rng;
        DMatrix::from_fn(n, n, |_, _| {
            c64(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        })
    }

    #[test]
    fn schur_reconstructs_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1usize, 2, 3, 5, 8] {
            let a = random_matrix(n, &mut rng);
            let s = schur(&a).unwrap();
            assert!(reconstruction_error(&a, &s) < 1e-12, "n = {n}");
            for i in 1..n {
                for j in 0..i {
                    assert_eq!(s.t[(i, j)], c64(0.0, 0.0));
                }
            }
            // unitarity of q
            let qq = &s.q * s.q.adjoint();
            let id = DMatrix::<C64>::identity(n, n);
            let err = (&qq - id).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(err < 1e-13);
        }
    }

    #[test]
    fn diagonal_is_canonically_ordered() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_matrix(6, &mut rng);
        let s = schur(&a).unwrap();
        let eigs = s.eigenvalues();
        for w in eigs.windows(2) {
            assert!(order_key(w[0]) <= order_key(w[1]));
        }
    }

    #[test]
    fn eigenvalues_of_known_matrix() {
        // companion-like matrix of (z-1)(z-2i)
        let a = DMatrix::from_row_slice(
            2,
            2,
            &[c64(0.0, 0.0), c64(0.0, -2.0), c64(1.0, 0.0), c64(1.0, 2.0)],
        );
        let eigs = eigenvalues(&a).unwrap();
        let mut found = [false, false];
        for e in eigs {
            if (e - c64(1.0, 0.0)).norm() < 1e-12 {
                found[0] = true;
            }
            if (e - c64(0.0, 2.0)).norm() < 1e-12 {
                found[1] = true;
            }
        }
        assert!(found[0] && found[1]);
    }

    #[test]
    fn eigenvalues_of_unitary_lie_on_circle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_unitary(7, &mut rng);
        for e in eigenvalues(&u).unwrap() {
            assert!((e.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn least_squares_recovers_exact_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let a = {
            use rand::Rng;
            DMatrix::from_fn(9, 4, |_, _| {
                c64(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
            })
        };
        let x_true: Vec<C64> = (0..4).map(|k| c64(k as f64 + 0.5, -(k as f64))).collect();
        let mut b = vec![c64(0.0, 0.0); 9];
        for i in 0..9 {
            for j in 0..4 {
                b[i] += a[(i, j)] * x_true[j];
            }
        }
        let (x, res) = least_squares(&a, &b);
        assert!(res < 1e-12);
        for (got, want) in x.iter().zip(&x_true) {
            assert!((got - want).norm() < 1e-11);
        }
    }
}
