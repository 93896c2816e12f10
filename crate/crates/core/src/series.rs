//! Truncated power series arithmetic, enough to invert a rational map's germ
//! at the origin and to test a germ for rationality.

use crate::poly::Poly;
use crate::C64;

/// Power series `Σ c_k w^k` truncated at a fixed length.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    c: Vec<C64>,
}

impl Series {
    pub fn new(c: Vec<C64>) -> Self {
        Series { c }
    }

    pub fn zero(len: usize) -> Self {
        Series {
            c: vec![C64::new(0.0, 0.0); len],
        }
    }

    pub fn constant(v: C64, len: usize) -> Self {
        let mut s = Series::zero(len);
        if len > 0 {
            s.c[0] = v;
        }
        s
    }

    /// The identity series `w`.
    pub fn var(len: usize) -> Self {
        let mut s = Series::zero(len);
        if len > 1 {
            s.c[1] = C64::new(1.0, 0.0);
        }
        s
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    pub fn coeff(&self, k: usize) -> C64 {
        self.c.get(k).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.c
    }

    pub fn truncate(&self, len: usize) -> Series {
        let mut c = self.c.clone();
        c.resize(len, C64::new(0.0, 0.0));
        Series { c }
    }

    pub fn add(&self, other: &Series) -> Series {
        let len = self.len().max(other.len());
        Series {
            c: (0..len).map(|k| self.coeff(k) + other.coeff(k)).collect(),
        }
    }

    pub fn sub(&self, other: &Series) -> Series {
        let len = self.len().max(other.len());
        Series {
            c: (0..len).map(|k| self.coeff(k) - other.coeff(k)).collect(),
        }
    }

    pub fn mul(&self, other: &Series, len: usize) -> Series {
        let mut out = vec![C64::new(0.0, 0.0); len];
        for (i, &a) in self.c.iter().enumerate().take(len) {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            for (j, &b) in other.c.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                out[i + j] += a * b;
            }
        }
        Series { c: out }
    }

    /// Multiplicative inverse; requires a nonzero constant term.
    pub fn inverse(&self, len: usize) -> Series {
        let a0 = self.coeff(0);
        assert!(a0.norm_sqr() > 0.0, "series has no inverse at the origin");
        let mut out = vec![C64::new(0.0, 0.0); len];
        out[0] = C64::new(1.0, 0.0) / a0;
        for k in 1..len {
            let mut acc = C64::new(0.0, 0.0);
            for j in 1..=k {
                acc += self.coeff(j) * out[k - j];
            }
            out[k] = -acc / a0;
        }
        Series { c: out }
    }

    /// Substitute this series (constant term must vanish) into a polynomial.
    pub fn compose_poly(p: &Poly, inner: &Series, len: usize) -> Series {
        assert!(
            inner.coeff(0).norm_sqr() == 0.0,
            "composition needs a series vanishing at 0"
        );
        let mut acc = Series::zero(len);
        for &c in p.coeffs().iter().rev() {
            acc = acc.mul(inner, len);
            acc.c[0] += c;
        }
        acc
    }
}
