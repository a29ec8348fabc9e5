//! Low-energy machinery: projections `P, Q, S₀`, the expansion
//! `M̃⁺(λ⁴) = P + A₂(λ) + N₄(λ)`, Jensen-Nenciu and Feshbach inversion, and the
//! regular/singular classification at zero energy.
//!
//! All matrices use the folded coordinates of [`crate::operators`].

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{Field, PlaneGrid};
use crate::linalg::{self, CMat, CVec};
use crate::operators::{self, DiscreteOperator, PotentialData};
use crate::specfun::{self, ComplexKernel, KernelKind};

const ONE: C64 = C64 { re: 1.0, im: 0.0 };

fn cvec(it: impl ExactSizeIterator<Item = f64>) -> CVec {
    let n = it.len();
    CVec::from_iterator(n, it.map(|x| C64::new(x, 0.0)))
}

fn diag(d: &CVec) -> CMat {
    CMat::from_diagonal(d)
}

/// Inverse of `E* A E` lifted back: `E (E* A E)⁻¹ E*`.
fn restricted_inverse(a: &CMat, e: &CMat) -> Result<CMat> {
    let r = e.adjoint() * a * e;
    Ok(e * linalg::inverse(&r)? * e.adjoint())
}

// ---------------------------------------------------------------------------
// projections

/// `P`, `Q`, `S₀^⊥`, `S₀` and the moment data.
#[derive(Clone, Debug)]
pub struct ProjectionSet {
    /// `ṽ = v/‖v‖₂` (folded).
    pub vt: CVec,
    pub p: CMat,
    pub q: CMat,
    /// `φⱼ = Q(xⱼ v)` before orthonormalisation.
    pub phi: [CVec; 2],
    /// `cⱼ = (ṽ, xⱼ ṽ)`.
    pub c: [f64; 2],
    /// Orthonormal basis of `S₀^⊥ℋ` (`n × 2`).
    pub s0perp_basis: CMat,
    /// Orthonormal basis of `S₀ℋ` (`n × (n-3)`).
    pub s0_basis: CMat,
}

impl ProjectionSet {
    pub fn s0perp(&self) -> CMat {
        linalg::projector(&self.s0perp_basis)
    }

    /// `S₀ = Q - S₀^⊥`.
    pub fn s0(&self) -> CMat {
        &self.q - self.s0perp()
    }

    /// Orthonormal basis of `Qℋ`, ordered `[S₀^⊥ | S₀]`.
    pub fn q_basis(&self) -> CMat {
        let n = self.q.nrows();
        let (a, b) = (self.s0perp_basis.ncols(), self.s0_basis.ncols());
        let mut m = CMat::zeros(n, a + b);
        m.columns_mut(0, a).copy_from(&self.s0perp_basis);
        m.columns_mut(a, b).copy_from(&self.s0_basis);
        m
    }
}

/// Build `P`, `Q`, `S₀^⊥`, `S₀` for a potential.
pub fn build_projections(p: &PotentialData) -> Result<ProjectionSet> {
    let n = p.len();
    if n < 8 {
        return Err(Error::Invalid(format!("support has {n} points, need at least 8")));
    }
    let vv = p.v_folded();
    let norm = vv.iter().map(|x| x * x).sum::<f64>().sqrt();
    let vt = cvec(vv.iter().map(|x| x / norm));
    let pm = &vt * vt.adjoint();
    let q = linalg::identity(n) - &pm;
    let mut phi = [CVec::zeros(n), CVec::zeros(n)];
    let mut c = [0.0; 2];
    for j in 0..2 {
        let xv = cvec(p.points.iter().zip(&vv).map(|(pt, v)| if j == 0 { pt.0 * v } else { pt.1 * v }));
        c[j] = p.points.iter().zip(vt.iter()).map(|(pt, t)| (if j == 0 { pt.0 } else { pt.1 }) * t.re * t.re).sum();
        let f = &q * &xv;
        if f.norm() < 1e-12 * xv.norm() {
            return Err(Error::DegenerateMoments { axis: j + 1, norm: f.norm() });
        }
        phi[j] = f;
    }
    let mut cols = CMat::zeros(n, 2);
    cols.set_column(0, &phi[0]);
    cols.set_column(1, &phi[1]);
    let s0perp_basis = linalg::orthonormalize(&cols, 1e-10);
    if s0perp_basis.ncols() < 2 {
        return Err(Error::DegenerateMoments { axis: 2, norm: 0.0 });
    }
    let mut taken = CMat::zeros(n, 3);
    taken.set_column(0, &vt);
    taken.columns_mut(1, 2).copy_from(&s0perp_basis);
    let s0_basis = linalg::orthonormal_complement(&taken);
    Ok(ProjectionSet { vt, p: pm, q, phi, c, s0perp_basis, s0_basis })
}

/// Matrix of a tail kernel `G₂, G₂ₗ, G₄, G₆, G₆ₗ` sandwiched by `v`.
pub fn tail_matrix(p: &PotentialData, kind: KernelKind) -> CMat {
    let k = ComplexKernel::new(kind);
    operators::kernel_matrix(p, |r| k.eval(ONE, r).expect("tail kernels are total"))
}

/// `‖QG₂Q - ½(φ₁⊗φ₁ + φ₂⊗φ₂)‖_F / ‖QG₂Q‖_F`.
pub fn rank_two_identity_check(p: &PotentialData, proj: &ProjectionSet) -> f64 {
    let g2 = tail_matrix(p, KernelKind::G2);
    let lhs = &proj.q * g2 * &proj.q;
    let rhs = (&proj.phi[0] * proj.phi[0].transpose() + &proj.phi[1] * proj.phi[1].transpose()) * C64::new(0.5, 0.0);
    (&lhs - rhs).norm() / lhs.norm()
}

/// `(‖Qv‖/‖v‖, max_j ‖S₀ xⱼv‖/‖xⱼv‖)`.
pub fn cancellation_check(p: &PotentialData, proj: &ProjectionSet) -> (f64, f64) {
    let vv = p.v_folded();
    let v = cvec(vv.iter().copied());
    let qv = (&proj.q * &v).norm() / v.norm();
    let s0 = proj.s0();
    let mut worst: f64 = 0.0;
    for j in 0..2 {
        let xv = cvec(p.points.iter().zip(&vv).map(|(pt, v)| if j == 0 { pt.0 * v } else { pt.1 * v }));
        worst = worst.max((&s0 * &xv).norm() / xv.norm());
    }
    (qv, worst)
}

// ---------------------------------------------------------------------------
// classification

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Regular,
    Singular,
    Borderline,
}

/// Zero-energy resonance data in the singular case.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResonanceReport {
    /// Null vector `f ∈ S₀ℋ` (unfolded values on the support).
    pub f: Vec<C64>,
    /// `(c₀, c₁, c₂)` with `T₀f = (c₀ + c₁x₁ + c₂x₂)v`.
    pub coefficients: [C64; 3],
    /// Least-squares residual of the moment system relative to `‖T₀‖‖f‖`.
    pub moment_residual: f64,
    /// `sup |φ(x)|/⟨x⟩` on the grid.
    pub growth: f64,
    /// Off-support discrete `Δ²φ` relative to `max |Vφ|`.
    pub biharmonic_residual: f64,
    /// Cosine similarity of `M_U M_v φ` with `f`.
    pub roundtrip_cosine: f64,
    #[serde(skip)]
    pub phi: Option<Field>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub verdict: Verdict,
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// Eigenvalue of the Hermitian `S₀T₀S₀|_{S₀ℋ}` closest to zero.
    pub signed_eigenvalue: f64,
    pub resonance: Option<ResonanceReport>,
}

/// Default relative tolerance of the classifier.
pub const CLASSIFY_TOL: f64 = 1e-6;

/// `T₀ = M_U + G₂ₗ` (unscaled).
pub fn t0_matrix(p: &PotentialData) -> CMat {
    operators::m_u(p) + tail_matrix(p, KernelKind::G2l)
}

/// Eigenvalues of `Z* T₀ Z`, `Z` an orthonormal basis of `S₀ℋ`, with the
/// eigenvector of the one closest to zero.
pub fn s0t0s0_spectrum(p: &PotentialData, proj: &ProjectionSet) -> (Vec<f64>, CVec) {
    let z = &proj.s0_basis;
    let m = z.adjoint() * t0_matrix(p) * z;
    let herm = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let k = (0..vals.len()).min_by(|&a, &b| vals[a].abs().partial_cmp(&vals[b].abs()).unwrap()).unwrap();
    let vec = z * eig.eigenvectors.column(k);
    (vals, vec)
}

/// Signed eigenvalue of `S₀T₀S₀` closest to zero.
pub fn signed_eigenvalue(p: &PotentialData) -> Result<f64> {
    let proj = build_projections(p)?;
    let (vals, _) = s0t0s0_spectrum(p, &proj);
    Ok(vals.into_iter().min_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap()).unwrap())
}

/// Regular iff `σ_min(S₀T₀S₀) > tol σ_max`; `Borderline` error in the decade band.
pub fn classify_zero_energy(p: &PotentialData, proj: &ProjectionSet, tol: f64) -> Result<ClassificationReport> {
    let (vals, null) = s0t0s0_spectrum(p, proj);
    let sigma_min = vals.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    let sigma_max = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let signed = vals.iter().copied().min_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap()).unwrap();
    let ratio = sigma_min / sigma_max;
    if ratio >= tol / 10.0 && ratio <= tol * 10.0 {
        return Err(Error::Borderline { ratio });
    }
    if ratio > tol {
        return Ok(ClassificationReport { verdict: Verdict::Regular, sigma_min, sigma_max, signed_eigenvalue: signed, resonance: None });
    }
    let resonance = Some(resonance_report(p, &null)?);
    Ok(ClassificationReport { verdict: Verdict::Singular, sigma_min, sigma_max, signed_eigenvalue: signed, resonance })
}

/// Build `φ = Φ(f) = (c₀ + c·x) - ∫G(x-y)v(y)f(y)dy`, `G = r² log r/(8π)`.
fn resonance_report(p: &PotentialData, f_folded: &CVec) -> Result<ResonanceReport> {
    let n = p.len();
    let vv = p.v_folded();
    let h = p.grid.h();
    let t0 = t0_matrix(p);
    let t0f = &t0 * f_folded;
    let mut a = CMat::zeros(n, 3);
    for i in 0..n {
        a[(i, 0)] = C64::new(vv[i], 0.0);
        a[(i, 1)] = C64::new(p.points[i].0 * vv[i], 0.0);
        a[(i, 2)] = C64::new(p.points[i].1 * vv[i], 0.0);
    }
    let svd = a.clone().svd(true, true);
    let c = svd.solve(&t0f, 1e-14).map_err(|e| Error::Invalid(e.to_string()))?;
    let moment_residual = (&a * &c - &t0f).norm() / (t0.norm() * f_folded.norm()).max(f64::MIN_POSITIVE);
    let coefficients = [c[0], c[1], c[2]];
    let g = |r: f64| if r == 0.0 { 0.0 } else { r * r * r.ln() / (8.0 * PI) };
    let weights: Vec<C64> = (0..n).map(|j| f_folded[j] * (p.v[j] * h)).collect();
    let phi_at = |x: f64, y: f64| -> C64 {
        let mut s = coefficients[0] + coefficients[1] * x + coefficients[2] * y;
        for (pt, w) in p.points.iter().zip(&weights) {
            s -= w * g((x - pt.0).hypot(y - pt.1));
        }
        s
    };
    let grid = p.grid;
    let phi = Field::from_fn(grid, phi_at);
    let growth = phi
        .data
        .iter()
        .enumerate()
        .map(|(k, z)| {
            let (x, y) = grid.point(k);
            z.norm() / crate::jbracket(x.hypot(y))
        })
        .fold(0.0, f64::max);
    // round trip Φ⁻¹φ = M_U M_v φ on the support
    let back: Vec<C64> = (0..n).map(|i| phi_at(p.points[i].0, p.points[i].1) * (p.u_sign[i] * p.v[i])).collect();
    let f_unf: Vec<C64> = (0..n).map(|i| f_folded[i] / h).collect();
    let dot: C64 = back.iter().zip(&f_unf).map(|(a, b)| a.conj() * b).sum();
    let na = back.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let nb = f_unf.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let roundtrip_cosine = dot.norm() / (na * nb);
    let vphi = (0..n).map(|i| (phi_at(p.points[i].0, p.points[i].1) * p.v_pot[i]).norm()).fold(0.0, f64::max);
    let biharmonic_residual = off_support_bilaplacian(&phi, p) / vphi.max(f64::MIN_POSITIVE);
    Ok(ResonanceReport { f: f_unf, coefficients, moment_residual, growth, biharmonic_residual, roundtrip_cosine, phi: Some(phi) })
}

/// 13-point `Δ²` stencil coefficients `(di, dj, weight·h⁴)`.
pub const BILAPLACIAN_STENCIL: [(i64, i64, f64); 13] = [
    (0, 0, 20.0),
    (1, 0, -8.0),
    (-1, 0, -8.0),
    (0, 1, -8.0),
    (0, -1, -8.0),
    (1, 1, 2.0),
    (1, -1, 2.0),
    (-1, 1, 2.0),
    (-1, -1, 2.0),
    (2, 0, 1.0),
    (-2, 0, 1.0),
    (0, 2, 1.0),
    (0, -2, 1.0),
];

/// `max |Δ_h² φ|` over interior nodes at lattice distance ≥ 3 from the support.
fn off_support_bilaplacian(phi: &Field, p: &PotentialData) -> f64 {
    let g: PlaneGrid = phi.grid;
    let n = g.n() as i64;
    let h4 = g.h().powi(4);
    let c = n / 2;
    let mut near = vec![false; g.len()];
    for &(a, b) in &p.lattice {
        for di in -3..=3 {
            for dj in -3..=3 {
                let (i, j) = (a + c + di, b + c + dj);
                if i >= 0 && j >= 0 && i < n && j < n {
                    near[(i * n + j) as usize] = true;
                }
            }
        }
    }
    let mut worst: f64 = 0.0;
    for i in 2..n - 2 {
        for j in 2..n - 2 {
            if near[(i * n + j) as usize] {
                continue;
            }
            let mut s = C64::new(0.0, 0.0);
            for &(di, dj, w) in &BILAPLACIAN_STENCIL {
                s += phi.data[((i + di) * n + j + dj) as usize] * w;
            }
            worst = worst.max(s.norm() / h4);
        }
    }
    worst
}

// ---------------------------------------------------------------------------
// generic inversions

/// Jensen-Nenciu: invert `A` through `(A+S)⁻¹` and `B = S - S(A+S)⁻¹S` on the
/// range of the orthogonal projection with orthonormal basis `s_basis`.
pub fn jensen_nenciu_invert(a: &CMat, s_basis: &CMat) -> Result<CMat> {
    let s = linalg::projector(s_basis);
    let aps = linalg::inverse(&(a + &s))?;
    let b = &s - &s * &aps * &s;
    let br = s_basis.adjoint() * &b * s_basis;
    let (lo, hi) = linalg::sigma_extremes(&br);
    if !(lo > 1e-13 * hi) {
        return Err(Error::BNotInvertible(lo));
    }
    let binv = s_basis * linalg::inverse_unchecked(&br)? * s_basis.adjoint();
    Ok(&aps + &aps * &s * binv * &s * &aps)
}

/// Feshbach inversion of `A` in the orthogonal decomposition spanned by the
/// orthonormal bases `e1` and `e2`; the result acts on `span(e1) ⊕ span(e2)`.
pub fn feshbach_invert(a: &CMat, e1: &CMat, e2: &CMat) -> Result<CMat> {
    let a11 = e1.adjoint() * a * e1;
    let a12 = e1.adjoint() * a * e2;
    let a21 = e2.adjoint() * a * e1;
    let a22 = e2.adjoint() * a * e2;
    let a22i = linalg::inverse(&a22).map_err(|e| match e {
        Error::Singular(s) => Error::SchurSingular(s),
        other => other,
    })?;
    let schur = &a11 - &a12 * &a22i * &a21;
    let d = linalg::inverse(&schur).map_err(|e| match e {
        Error::Singular(s) => Error::SchurSingular(s),
        other => other,
    })?;
    let b11 = d.clone();
    let b12 = -(&d * &a12 * &a22i);
    let b21 = -(&a22i * &a21 * &d);
    let b22 = &a22i + &a22i * &a21 * &d * &a12 * &a22i;
    Ok(e1 * b11 * e1.adjoint() + e1 * b12 * e2.adjoint() + e2 * b21 * e1.adjoint() + e2 * b22 * e2.adjoint())
}

// ---------------------------------------------------------------------------
// expansion

/// `λ`-independent pieces of the expansion for one potential.
#[derive(Clone, Debug)]
pub struct ThresholdContext {
    pub potential: PotentialData,
    pub proj: ProjectionSet,
    /// `c_v = 8/(i‖V‖₁)`.
    pub cv: C64,
    pub mu: CMat,
    pub g2: CMat,
    pub g2l: CMat,
    pub g4: CMat,
    pub g6: CMat,
    pub g6l: CMat,
    pub t0: CMat,
    pub classification: ClassificationReport,
}

/// Default threshold window `a`.
pub const THRESHOLD_WINDOW: f64 = 0.1;

impl ThresholdContext {
    pub fn new(p: &PotentialData) -> Result<Self> {
        let proj = build_projections(p)?;
        let classification = classify_zero_energy(p, &proj, CLASSIFY_TOL)?;
        let l1: f64 = p.v_folded().iter().map(|x| x * x).sum();
        let cv = C64::new(0.0, -8.0 / l1);
        let mu = operators::m_u(p);
        let g2l = tail_matrix(p, KernelKind::G2l);
        let t0 = &mu + &g2l;
        Ok(Self {
            potential: p.clone(),
            proj,
            cv,
            g2: tail_matrix(p, KernelKind::G2),
            g2l,
            g4: tail_matrix(p, KernelKind::G4),
            g6: tail_matrix(p, KernelKind::G6),
            g6l: tail_matrix(p, KernelKind::G6l),
            mu,
            t0,
            classification,
        })
    }

    /// `M̃⁺(λ⁴) = c_v λ² M⁺(λ)`.
    pub fn mtilde(&self, lambda: f64) -> CMat {
        let s = operators::kernel_matrix(&self.potential, |r| specfun::lambda2_resolvent(lambda, r));
        (&self.mu * C64::new(lambda * lambda, 0.0) + s) * self.cv
    }

    /// `(S₀T̃₀S₀)⁻¹` on `S₀ℋ`.
    pub fn d1_limit(&self) -> Result<CMat> {
        restricted_inverse(&(&self.t0 * self.cv), &self.proj.s0_basis)
    }

    /// `D₀ = (S₀T₀S₀|_{S₀ℋ})⁻¹`.
    pub fn d0(&self) -> Result<CMat> {
        restricted_inverse(&self.t0, &self.proj.s0_basis)
    }
}

/// All blocks of the low-energy expansion at one `λ`.
#[derive(Clone, Debug)]
pub struct ThresholdExpansion {
    pub lambda: f64,
    pub cv: C64,
    pub mtilde: CMat,
    pub a2: CMat,
    pub n2: CMat,
    /// `M̃ - P - A₂`.
    pub n4: CMat,
    /// `λ⁴G̃₄ + λ⁶(g₃G̃₆ + G̃₆ₗ)`.
    pub n4_truncated: CMat,
    /// `f(λ, x) = (1 + λ²Ũ)⁻¹`.
    pub f: Vec<C64>,
    /// `h(λ, x) = Ũ - c_v²λ² f + λ⁴Ũ³`.
    pub h: Vec<C64>,
    pub t1: CMat,
    pub aq: CMat,
    pub f4: CMat,
    /// `B(λ) = Q - Q(M̃ + Q)⁻¹Q`.
    pub b: CMat,
    pub d1: CMat,
    pub f2: CMat,
    pub f3: CMat,
    pub d: CMat,
    pub e: CMat,
    pub te: CMat,
    pub fmat: CMat,
}

/// `f(λ, x)` and `h(λ, x)` for a sign function `U` and constant `c_v`.
pub fn f_and_h(lambda: f64, cv: C64, u_sign: &[f64]) -> (Vec<C64>, Vec<C64>) {
    let l2 = lambda * lambda;
    let f: Vec<C64> = u_sign.iter().map(|&u| ONE / (ONE + cv * u * l2)).collect();
    let h = u_sign
        .iter()
        .zip(&f)
        .map(|(&u, fx)| {
            let ut = cv * u;
            ut - cv * cv * l2 * fx + ut * ut * ut * (l2 * l2)
        })
        .collect();
    (f, h)
}

pub fn assemble_expansion(lambda: f64, ctx: &ThresholdContext, a: f64) -> Result<ThresholdExpansion> {
    if !(lambda > 0.0 && lambda < a) {
        return Err(Error::LambdaOutOfRange { lambda, range: format!("(0, {a})") });
    }
    if ctx.classification.verdict != Verdict::Regular {
        return Err(Error::SingularPotential);
    }
    let cv = ctx.cv;
    let l2 = C64::new(lambda * lambda, 0.0);
    let l4 = l2 * l2;
    let l6 = l4 * l2;
    let g1 = specfun::g_n(1, C64::new(lambda, 0.0));
    let g3 = specfun::g_n(3, C64::new(lambda, 0.0));
    let proj = &ctx.proj;
    let q = &proj.q;
    let g2t = &ctx.g2 * cv;
    let g2lt = &ctx.g2l * cv;
    let g4t = &ctx.g4 * cv;
    let t0t = &ctx.t0 * cv;
    let ut = &ctx.mu * cv;
    let mtilde = ctx.mtilde(lambda);
    let a2 = (&g2t * g1 + &t0t) * l2;
    let n2 = (&g2t * g1 + &g2lt) * l2;
    let n4 = &mtilde - &proj.p - &a2;
    let n4_truncated = &g4t * l4 + (&ctx.g6 * g3 + &ctx.g6l) * (cv * l6);
    let (f, h) = f_and_h(lambda, cv, &ctx.potential.u_sign);
    let fd = diag(&CVec::from_vec(f.clone()));
    let ut3 = &ut * &ut * &ut;
    let t1 = &t0t - fd * (cv * cv * l2) + ut3 * l4;
    let aq = q * (&g2t * g1 + &t1) * q;
    let f4 = -(q * (&n2 * &n2 + &ut * &n2 * l2 + &n2 * &ut * l2 - &g4t * l4) * q);
    let b = q - q * linalg::inverse(&(&mtilde + q))? * q;
    // Feshbach pieces in Qℋ = S₀^⊥ℋ ⊕ S₀ℋ
    let w = &proj.s0perp_basis;
    let z = &proj.s0_basis;
    let s0 = proj.s0();
    let s0p = proj.s0perp();
    let d1 = restricted_inverse(&t1, z)?;
    let f2 = restricted_inverse(&g2t, w)?;
    let f3 = &s0p * (&t1 - &t1 * &s0 * &d1 * &s0 * &t1) * &s0p;
    let inner = &s0p + (&f3 * &f2) / g1;
    let d = &f2 * restricted_inverse(&inner, w)? / g1;
    let e = &d1 * &s0 * &t1 * &s0p;
    let te = &s0p * &t1 * &s0 * &d1;
    let fmat = (&s0p - &e) * &d * (&s0p - &te);
    Ok(ThresholdExpansion {
        lambda,
        cv,
        mtilde,
        a2,
        n2,
        n4,
        n4_truncated,
        f,
        h,
        t1,
        aq,
        f4,
        b,
        d1,
        f2,
        f3,
        d,
        e,
        te,
        fmat,
    })
}

impl ThresholdExpansion {
    /// `‖B - λ²A_Q - F₄‖_F`.
    pub fn b_remainder(&self) -> f64 {
        let l2 = C64::new(self.lambda * self.lambda, 0.0);
        (&self.b - &self.aq * l2 - &self.f4).norm()
    }

    /// Direct inverse of `A_Q` on `Qℋ`.
    pub fn aq_inverse_direct(&self, proj: &ProjectionSet) -> Result<CMat> {
        restricted_inverse(&self.aq, &proj.q_basis())
    }

    /// Named Frobenius norms for reports.
    pub fn norms(&self, ctx: &ThresholdContext) -> BTreeMap<String, f64> {
        let mut m = BTreeMap::new();
        m.insert("n4".into(), self.n4.norm());
        m.insert("n4_truncation_residual".into(), (&self.n4 - &self.n4_truncated).norm());
        m.insert("a2".into(), self.a2.norm());
        m.insert("b".into(), self.b.norm());
        m.insert("b_remainder".into(), self.b_remainder());
        m.insert("f4".into(), self.f4.norm());
        m.insert("fmat".into(), self.fmat.norm());
        if let Ok(lim) = ctx.d1_limit() {
            m.insert("d1_deviation".into(), (&self.d1 - lim).norm());
        }
        m.insert("x_lambda".into(), self.x_lambda(&ctx.proj).norm());
        m
    }

    /// `X(λ) = D₁(λ) - S₀ M_{h⁻¹} S₀`.
    pub fn x_lambda(&self, proj: &ProjectionSet) -> CMat {
        let s0 = proj.s0();
        let hinv = diag(&CVec::from_iterator(self.h.len(), self.h.iter().map(|x| ONE / x)));
        &self.d1 - &s0 * hinv * &s0
    }
}

/// Result of the `D₁` structure check on a λ-sweep.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct D1Report {
    pub lambdas: Vec<f64>,
    pub x_norms: Vec<f64>,
    pub deviations: Vec<f64>,
    /// `‖D₁ · S₀T₁S₀ - S₀‖_F` at each λ.
    pub identity_defects: Vec<f64>,
    pub x_ratio: f64,
    pub deviation_slope: f64,
}

pub fn d1_structure_check(lambdas: &[f64], ctx: &ThresholdContext) -> Result<D1Report> {
    let lim = ctx.d1_limit()?;
    let s0 = ctx.proj.s0();
    let rows = lambdas
        .par_iter()
        .map(|&l| {
            let e = assemble_expansion(l, ctx, THRESHOLD_WINDOW)?;
            let x = e.x_lambda(&ctx.proj).norm();
            let dev = (&e.d1 - &lim).norm();
            let id = (&e.d1 * &s0 * &e.t1 * &s0 - &s0).norm();
            Ok((x, dev, id))
        })
        .collect::<Result<Vec<_>>>()?;
    let x_norms: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let deviations: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let identity_defects = rows.iter().map(|r| r.2).collect();
    let xmax = x_norms.iter().cloned().fold(0.0, f64::max);
    let xmin = x_norms.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(D1Report {
        lambdas: lambdas.to_vec(),
        deviation_slope: crate::loglog_slope(lambdas, &deviations),
        x_norms,
        deviations,
        identity_defects,
        x_ratio: xmax / xmin,
    })
}

/// One row of an expansion sweep.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepEntry {
    pub lambda: f64,
    pub norms: BTreeMap<String, f64>,
}

/// JSON-facing summary of a λ-sweep.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExpansionDiagnostics {
    pub verdict: Verdict,
    pub sigma_min: f64,
    pub sweeps: Vec<SweepEntry>,
    /// Log-log slopes of selected norms against λ.
    pub slopes: BTreeMap<String, f64>,
}

pub fn expansion_sweep(ctx: &ThresholdContext, lambdas: &[f64]) -> Result<ExpansionDiagnostics> {
    let sweeps = lambdas
        .par_iter()
        .map(|&l| Ok(SweepEntry { lambda: l, norms: assemble_expansion(l, ctx, THRESHOLD_WINDOW)?.norms(ctx) }))
        .collect::<Result<Vec<_>>>()?;
    let mut slopes = BTreeMap::new();
    if lambdas.len() >= 2 {
        for key in ["n4", "b_remainder", "d1_deviation"] {
            let ys: Vec<f64> = sweeps.iter().filter_map(|s| s.norms.get(key).copied()).collect();
            if ys.len() == lambdas.len() {
                slopes.insert(key.to_string(), crate::loglog_slope(lambdas, &ys));
            }
        }
    }
    Ok(ExpansionDiagnostics {
        verdict: ctx.classification.verdict,
        sigma_min: ctx.classification.sigma_min,
        sweeps,
        slopes,
    })
}

// ---------------------------------------------------------------------------
// 𝒬_v

/// `𝒬_v(λ) = M_v M⁺(λ)⁻¹ M_v`.
pub fn qv_lambda(lambda: f64, p: &PotentialData) -> Result<DiscreteOperator> {
    let m = operators::birman_schwinger(lambda, p)?;
    let inv = linalg::inverse(&m.matrix).map_err(|_| Error::SingularAtLambda { lambda, sigma_min: m.sigma_min() })?;
    let v = diag(&cvec(p.v.iter().copied()));
    Ok(DiscreteOperator::new(&v * inv * &v, "Q_v", Some(lambda)))
}

/// `c_v λ² M_v M̃⁺(λ⁴)⁻¹ M_v`, the scaled route to `𝒬_v(λ)`.
pub fn qv_lambda_scaled(lambda: f64, ctx: &ThresholdContext) -> Result<DiscreteOperator> {
    let mt = ctx.mtilde(lambda);
    let inv = linalg::inverse(&mt)?;
    let v = diag(&cvec(ctx.potential.v.iter().copied()));
    Ok(DiscreteOperator::new(&v * inv * &v * (ctx.cv * lambda * lambda), "Q_v scaled", Some(lambda)))
}

/// `V` as a diagonal matrix on the support.
pub fn v_diag(p: &PotentialData) -> CMat {
    diag(&DVector::from_iterator(p.len(), p.v_pot.iter().map(|&x| C64::new(x, 0.0))))
}
