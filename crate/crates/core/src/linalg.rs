//! Dense complex linear algebra on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Frobenius norm.
pub fn frob(m: &CMat) -> f64 {
    m.norm()
}

/// Singular values in descending order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

/// `(σ_min, σ_max)`.
pub fn sigma_extremes(m: &CMat) -> (f64, f64) {
    let s = singular_values(m);
    (*s.last().unwrap_or(&0.0), *s.first().unwrap_or(&0.0))
}

/// Inverse, refusing matrices whose `σ_min/σ_max` is below `1e-14`.
pub fn inverse(m: &CMat) -> Result<CMat> {
    let (lo, hi) = sigma_extremes(m);
    if !(lo > 1e-14 * hi) {
        return Err(Error::Singular(lo));
    }
    m.clone().lu().try_inverse().ok_or(Error::Singular(lo))
}

/// Inverse without the conditioning check (LU only).
pub fn inverse_unchecked(m: &CMat) -> Result<CMat> {
    m.clone().lu().try_inverse().ok_or(Error::Singular(0.0))
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Orthonormalise the columns of `cols` (two passes of modified Gram-Schmidt),
/// dropping columns whose residual falls below `tol` times their norm.
pub fn orthonormalize(cols: &CMat, tol: f64) -> CMat {
    let n = cols.nrows();
    let mut out: Vec<CVec> = Vec::new();
    for j in 0..cols.ncols() {
        let orig = cols.column(j).into_owned();
        let scale = orig.norm();
        if scale == 0.0 {
            continue;
        }
        let mut w = orig;
        for _ in 0..2 {
            for q in &out {
                let c = q.dotc(&w);
                w -= q * c;
            }
        }
        let nw = w.norm();
        if nw > tol * scale {
            out.push(w / C64::new(nw, 0.0));
        }
    }
    let mut m = CMat::zeros(n, out.len());
    for (j, q) in out.iter().enumerate() {
        m.set_column(j, q);
    }
    m
}

/// Orthonormal basis of the orthogonal complement of the span of the
/// orthonormal columns of `basis`.
pub fn orthonormal_complement(basis: &CMat) -> CMat {
    let n = basis.nrows();
    let k = basis.ncols();
    let mut all = CMat::zeros(n, k + n);
    all.columns_mut(0, k).copy_from(basis);
    for i in 0..n {
        all[(i, k + i)] = C64::new(1.0, 0.0);
    }
    let q = orthonormalize(&all, 1e-8);
    q.columns(k, q.ncols() - k).into_owned()
}

/// Orthogonal projector `B B*` onto the span of orthonormal columns.
pub fn projector(basis: &CMat) -> CMat {
    basis * basis.adjoint()
}

/// Real-valued convenience constructor.
pub fn from_real(n: usize, m: usize, f: impl Fn(usize, usize) -> f64) -> CMat {
    CMat::from_fn(n, m, |i, j| C64::new(f(i, j), 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_is_orthonormal_and_orthogonal() {
        let v = CMat::from_fn(6, 2, |i, j| C64::new((i + j) as f64, (i * j) as f64 * 0.3));
        let b = orthonormalize(&v, 1e-12);
        let c = orthonormal_complement(&b);
        assert_eq!(c.ncols(), 4);
        assert!((c.adjoint() * &c - identity(4)).norm() < 1e-12);
        assert!((b.adjoint() * &c).norm() < 1e-12);
    }

    #[test]
    fn inverse_rejects_singular() {
        let m = from_real(3, 3, |i, _| i as f64);
        assert!(inverse(&m).is_err());
        let a = from_real(3, 3, |i, j| if i == j { 2.0 } else { 0.1 });
        let ai = inverse(&a).unwrap();
        assert!((a * ai - identity(3)).norm() < 1e-14);
    }
}
