//! Order-zero Bessel and Hankel functions and the free resolvent kernels of `Δ²`.
//!
//! `Γ(z, r) = (i/4) H₀⁽¹⁾(z r)` is the kernel of `(-Δ - z²)⁻¹` and
//! `R(z, r) = (Γ(z, r) - Γ(iz, r)) / (2z²)` that of `(Δ² - z⁴)⁻¹`.
//! Both are available through a convergent power series (small `|z| r`)
//! and a Gauss-Laguerre evaluation of the rotated-contour integral
//!
//! ```text
//! H₀⁽¹⁾(z) = 2 e^{iz} / (iπ) ∫₀^∞ e^{-t} t^{-1/2} (t - 2iz)^{-1/2} dt
//! ```
//!
//! (large `|z| r`). Logarithms and square roots use the branch continuous
//! from `z ∈ iℝ₊`, i.e. the cut of `H₀⁽¹⁾` is placed on `i(-∞, 0]`.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64 as C64;
use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const I: C64 = C64::new(0.0, 1.0);

/// Default regime-switch radius `s*` between series and integral evaluation.
pub const DEFAULT_SWITCH: f64 = 0.5;

const SERIES_CAP: usize = 60;

// ---------------------------------------------------------------------------
// double-double helpers for the alternating Bessel series

#[derive(Clone, Copy, Debug)]
struct Dd(f64, f64);

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd(s, b - (s - a))
}

impl Dd {
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.0, o.0);
        quick_two_sum(s, e + self.1 + o.1)
    }
    fn mul(self, b: Dd) -> Dd {
        let p = self.0 * b.0;
        let e = self.0.mul_add(b.0, -p) + self.0 * b.1 + self.1 * b.0;
        quick_two_sum(p, e)
    }
    fn div_f(self, b: f64) -> Dd {
        let q1 = self.0 / b;
        let p = q1 * b;
        let pe = q1.mul_add(b, -p);
        let (s, e) = two_sum(self.0, -p);
        let r = s + (e - pe + self.1);
        quick_two_sum(q1, r / b)
    }
    fn neg(self) -> Dd {
        Dd(-self.0, -self.1)
    }
    fn val(self) -> f64 {
        self.0 + self.1
    }
}

fn sq_quarter(x: f64) -> Dd {
    let p = x * x;
    Dd(0.25 * p, 0.25 * x.mul_add(x, -p))
}

/// `Σ (-q)^k / (k! (k+m)!)` for `m ∈ {0, 1}` in double-double arithmetic.
fn bessel_series(x: f64, m: u32) -> f64 {
    let q = sq_quarter(x);
    let mut term = Dd(1.0, 0.0);
    let mut sum = term;
    for k in 1..120u32 {
        term = term.mul(q).neg().div_f((k * (k + m)) as f64);
        sum = sum.add(term);
        if term.0.abs() < 1e-34 * sum.0.abs().max(1e-300) {
            break;
        }
    }
    sum.val()
}

/// Bessel function `J₀(x)`.
///
/// Power series (double-double) for `|x| ≤ 12`, real part of the Laguerre
/// evaluation of `H₀⁽¹⁾` beyond.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x <= 12.0 {
        bessel_series(x, 0)
    } else {
        h0_integral(C64::new(x, 0.0), 64).re
    }
}

/// Bessel function `J₁(x)`.
pub fn bessel_j1(x: f64) -> f64 {
    let s = x.signum();
    let x = x.abs();
    if x <= 12.0 {
        s * 0.5 * x * bessel_series(x, 1)
    } else {
        s * h1_integral(x, 64).re
    }
}

/// Two-term large-argument form of `J₀`.
pub fn j0_asymptotic_two_term(x: f64) -> f64 {
    let ph = x - FRAC_PI_4;
    (2.0 / PI).sqrt() * (ph.cos() / x.sqrt() + ph.sin() / (8.0 * x.powf(1.5)))
}

// ---------------------------------------------------------------------------
// Hankel function

/// Logarithm with the cut on the negative imaginary axis, `arg ∈ (-π/2, 3π/2]`.
pub fn log_cut(z: C64) -> C64 {
    let mut arg = z.im.atan2(z.re);
    if arg <= -0.5 * PI {
        arg += 2.0 * PI;
    }
    C64::new(z.norm().ln(), arg)
}

fn on_cut(z: C64) -> bool {
    z.re == 0.0 && z.im <= 0.0
}

/// `g(z) = -(1/2π) log(z/2) - γ/(2π)`.
pub fn g(z: C64) -> C64 {
    -log_cut(z * 0.5) / (2.0 * PI) - EULER_GAMMA / (2.0 * PI)
}

/// Harmonic number `H_n` as a rational.
pub fn harmonic(n: usize) -> Rational64 {
    (1..=n as i64).fold(Rational64::from_integer(0), |acc, j| acc + Rational64::new(1, j))
}

/// The rational sequence `c_n = 1/(2(n+1)) + H_n`.
///
/// Kept for reference; the resolvent series below uses `H_n` (see [`g_n`]).
pub fn c_coefficient(n: usize) -> Rational64 {
    Rational64::new(1, 2 * (n as i64 + 1)) + harmonic(n)
}

fn harmonic_f(n: usize) -> f64 {
    (1..=n).map(|j| 1.0 / j as f64).sum()
}

/// `g_n(z) = g(z) + H_n/(2π) + i/8`, the coefficient of the odd terms of `R`.
pub fn g_n(n: usize, z: C64) -> C64 {
    g(z) + harmonic_f(n) / (2.0 * PI) + I * 0.125
}

/// Path selector for [`hankel_h01`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HankelPath {
    Series,
    Integral,
}

/// `(i/4) H₀⁽¹⁾(z)` by its ascending series.
fn quarter_i_h0_series(z: C64) -> C64 {
    let lg = g(z);
    let w = -z * z * 0.25;
    let mut p = C64::new(1.0, 0.0);
    let mut hn = 0.0;
    let mut sum = (lg + I * 0.25) * p;
    for n in 1..SERIES_CAP {
        p = p * w / ((n * n) as f64);
        hn += 1.0 / n as f64;
        let t = (lg + hn / (2.0 * PI) + I * 0.25) * p;
        sum += t;
        if t.norm() < 1e-17 * sum.norm() {
            break;
        }
    }
    sum
}

fn h0_integral(z: C64, n: usize) -> C64 {
    let rule = quad::laguerre(n, -0.5);
    let two_iz = 2.0 * I * z;
    let s: C64 = rule.iter().map(|&(t, w)| (C64::new(t, 0.0) - two_iz).sqrt().inv() * w).sum();
    2.0 * (I * z).exp() / (I * PI) * s
}

fn h1_integral(x: f64, n: usize) -> C64 {
    let rule = quad::laguerre(n, 0.5);
    let s: C64 = rule
        .iter()
        .map(|&(u, w)| (C64::new(1.0, 0.5 * u / x)).sqrt() * w)
        .sum();
    let gamma_3_2 = 0.5 * PI.sqrt();
    (2.0 / (PI * x)).sqrt() * (I * (x - 3.0 * FRAC_PI_4)).exp() / gamma_3_2 * s
}

fn integral_nodes(az: f64) -> usize {
    if az < 2.0 {
        128
    } else {
        64
    }
}

/// Hankel function `H₀⁽¹⁾(z)` on `ℂ ∖ i(-∞, 0]`.
pub fn hankel_h01(z: C64, path: HankelPath) -> Result<C64> {
    if on_cut(z) {
        return Err(Error::BranchCut { re: z.re, im: z.im });
    }
    match path {
        HankelPath::Series => Ok(-4.0 * I * quarter_i_h0_series(z)),
        HankelPath::Integral => {
            let fine = h0_integral(z, 128);
            let coarse = h0_integral(z, 64);
            let est = (fine - coarse).norm() / fine.norm().max(1e-300);
            let tol = 1e-6;
            if !est.is_finite() || est > tol {
                return Err(Error::QuadratureNonConverged { estimate: est, tol });
            }
            Ok(fine)
        }
    }
}

/// Fast `(i/4) H₀⁽¹⁾(w)` with automatic path choice.
fn quarter_i_h0(w: C64, s_star: f64) -> C64 {
    if w.norm() <= s_star {
        quarter_i_h0_series(w)
    } else {
        0.25 * I * h0_integral(w, integral_nodes(w.norm()))
    }
}

/// Branch selector of a [`SpectralPoint`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `Im z ≥ 0`, used as is.
    UpperHalf,
    /// `Re z ≥ 0`, evaluated at `iz`.
    Rotated,
}

/// Spectral parameter with its branch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub z: C64,
    pub branch: Branch,
}

impl SpectralPoint {
    pub fn new(z: C64, branch: Branch) -> Result<Self> {
        if z == C64::new(0.0, 0.0) {
            return Err(Error::BranchCut { re: 0.0, im: 0.0 });
        }
        let ok = match branch {
            Branch::UpperHalf => z.im >= 0.0,
            Branch::Rotated => z.re >= 0.0,
        };
        if !ok {
            return Err(Error::Invalid(format!("{z} outside the {branch:?} branch")));
        }
        Ok(Self { z, branch })
    }

    /// The point at which `Γ` is evaluated.
    pub fn effective(&self) -> C64 {
        match self.branch {
            Branch::UpperHalf => self.z,
            Branch::Rotated => I * self.z,
        }
    }
}

/// `Γ(z, r) = (i/4) H₀⁽¹⁾(z r)`, series for `|z| r ≤ 1/2`, integral beyond.
pub fn green_kernel(z: C64, r: f64) -> Result<C64> {
    green_kernel_with(z, r, DEFAULT_SWITCH)
}

fn green_kernel_with(z: C64, r: f64, s_star: f64) -> Result<C64> {
    if on_cut(z) {
        return Err(Error::BranchCut { re: z.re, im: z.im });
    }
    if r <= 0.0 || !r.is_finite() {
        return Err(Error::Invalid(format!("Green kernel needs r > 0, got {r}")));
    }
    Ok(quarter_i_h0(z * r, s_star))
}

/// `Γ(iλ, r) = K₀(λ r)/(2π)` for real `λ r > 0`, evaluated in real arithmetic.
pub fn green_rotated_real(x: f64) -> f64 {
    if x <= DEFAULT_SWITCH {
        return quarter_i_h0_series(C64::new(0.0, x)).re;
    }
    if x > 700.0 {
        return 0.0;
    }
    let rule = quad::laguerre(integral_nodes(x), -0.5);
    let s: f64 = rule.iter().map(|&(t, w)| w / (t + 2.0 * x).sqrt()).sum();
    (-x).exp() * s / (2.0 * PI)
}

/// `z² R(z, r)` by the ascending series (even terms `i/8`, odd terms `-g_n`).
fn scaled_resolvent_series(z: C64, r: f64) -> C64 {
    if r == 0.0 {
        return I * 0.125;
    }
    let zr = z * r;
    let lg = g(zr);
    let q = zr * zr * 0.25;
    let mut p = C64::new(1.0, 0.0);
    let mut hn = 0.0;
    let mut sum = I * 0.125;
    for n in 1..SERIES_CAP {
        p = p * q / ((n * n) as f64);
        hn += 1.0 / n as f64;
        let t = if n % 2 == 0 {
            I * 0.125 * p
        } else {
            -(lg + hn / (2.0 * PI) + I * 0.125) * p
        };
        sum += t;
        if t.norm() < 1e-17 * sum.norm() && n > 1 {
            break;
        }
    }
    sum
}

/// `z² R(z, r)` with regime switch at `|z| r = s*`.
fn scaled_resolvent(z: C64, r: f64, s_star: f64) -> C64 {
    if z.norm() * r <= s_star {
        scaled_resolvent_series(z, r)
    } else {
        let a = quarter_i_h0(z * r, 0.0);
        let b = quarter_i_h0(I * z * r, 0.0);
        0.5 * (a - b)
    }
}

/// `λ² R(λ, r)` for real `λ > 0`; finite at `r = 0` where it equals `i/8`.
pub fn lambda2_resolvent(lambda: f64, r: f64) -> C64 {
    let x = lambda * r;
    if x <= DEFAULT_SWITCH {
        scaled_resolvent_series(C64::new(lambda, 0.0), r)
    } else {
        let a = 0.25 * I * h0_integral(C64::new(x, 0.0), integral_nodes(x));
        0.5 * (a - green_rotated_real(x))
    }
}

/// Kernel `R(λ, r)` of `R₀⁺(λ⁴) = (Δ² - λ⁴ - i0)⁻¹`.
pub fn biharm_resolvent_kernel(lambda: f64, r: f64) -> Result<C64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Invalid(format!("lambda must be positive, got {lambda}")));
    }
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::Invalid(format!("r must be non-negative, got {r}")));
    }
    Ok(lambda2_resolvent(lambda, r) / (lambda * lambda))
}

// ---------------------------------------------------------------------------
// kernel objects

/// Kinds of radial convolution kernels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Green,
    BiharmonicResolvent,
    G2,
    G2l,
    G4,
    G6,
    G6l,
}

/// A complex kernel `(z, r) ↦ K(z, r)` with its regime-switch radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexKernel {
    pub kind: KernelKind,
    pub s_star: f64,
}

fn xlogx_pow(r: f64, p: i32) -> f64 {
    if r == 0.0 {
        0.0
    } else {
        r.powi(p) * r.ln()
    }
}

impl ComplexKernel {
    pub fn new(kind: KernelKind) -> Self {
        Self { kind, s_star: DEFAULT_SWITCH }
    }

    /// Which path an evaluation at `(z, r)` takes.
    pub fn path(&self, z: C64, r: f64) -> HankelPath {
        if z.norm() * r <= self.s_star {
            HankelPath::Series
        } else {
            HankelPath::Integral
        }
    }

    /// Evaluate the kernel. The tail kernels ignore `z`.
    pub fn eval(&self, z: C64, r: f64) -> Result<C64> {
        match self.kind {
            KernelKind::Green => green_kernel_with(z, r, self.s_star),
            KernelKind::BiharmonicResolvent => {
                if on_cut(z) {
                    return Err(Error::BranchCut { re: z.re, im: z.im });
                }
                if !(r >= 0.0) {
                    return Err(Error::Invalid(format!("r must be non-negative, got {r}")));
                }
                Ok(scaled_resolvent(z, r, self.s_star) / (z * z))
            }
            KernelKind::G2 => Ok(C64::new(-0.25 * r * r, 0.0)),
            KernelKind::G2l => Ok(C64::new(xlogx_pow(r, 2) / (8.0 * PI), 0.0)),
            KernelKind::G4 => Ok(C64::new(0.0, r.powi(4) / 512.0)),
            KernelKind::G6 => Ok(C64::new(-r.powi(6) / 2304.0, 0.0)),
            KernelKind::G6l => Ok(C64::new(xlogx_pow(r, 6) / (4608.0 * PI), 0.0)),
        }
    }
}

/// The kernels `G₂ₙ` and `G₂ₙ,ₗ` multiplying `λ^{2n-2}` in the small-λ expansion of `R`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailKernels {
    pub even: ComplexKernel,
    pub log: Option<ComplexKernel>,
}

/// Tail kernels of order `n ∈ {1, 2, 3}`.
pub fn series_tail_kernels(n: usize) -> Result<TailKernels> {
    let (even, log) = match n {
        1 => (KernelKind::G2, Some(KernelKind::G2l)),
        2 => (KernelKind::G4, None),
        3 => (KernelKind::G6, Some(KernelKind::G6l)),
        _ => return Err(Error::UnsupportedOrder(n)),
    };
    Ok(TailKernels { even: ComplexKernel::new(even), log: log.map(ComplexKernel::new) })
}

/// Coefficient `1/(4ⁿ (n!)²)` of `|x|^{2n}` in the expansion of `R`.
pub fn series_coefficient(n: u32) -> f64 {
    let f: f64 = (1..=n).map(|k| k as f64).product();
    1.0 / (4f64.powi(n as i32) * f * f)
}

// ---------------------------------------------------------------------------
// fitted constants

/// Constants fitted to the magnitude bounds of `Γ` and `R`.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct GreenBoundFit {
    /// `sup |Γ| e^{Im z r} (|z| r)^{1/2}` over `|z| r ≥ 1/2`.
    pub c_large: f64,
    /// `sup |Γ| / ⟨log(|z| r)⟩` over `|z| r ≤ 1/2`.
    pub c_small: f64,
    /// `sup |∂_z Γ| e^{Im z r} |z|^{1/2} r^{-1/2}` over `|z| r ≥ 1`.
    pub c_deriv: f64,
}

/// Fit the constants of the `Γ` bounds over the given `(z, r)` samples.
pub fn fit_green_constants(samples: &[(C64, f64)]) -> Result<GreenBoundFit> {
    let mut fit = GreenBoundFit::default();
    for &(z, r) in samples {
        let v = green_kernel(z, r)?;
        let x = z.norm() * r;
        if x >= 0.5 {
            fit.c_large = fit.c_large.max(v.norm() * (z.im * r).exp() * x.sqrt());
        } else {
            fit.c_small = fit.c_small.max(v.norm() / crate::jbracket(x.ln()));
        }
        if x >= 1.0 {
            let h = 1e-5 * z.norm();
            let d = (green_kernel(z + h, r)? - green_kernel(z - h, r)?) / (2.0 * h);
            let c = d.norm() * (z.im * r).exp() * z.norm().sqrt() / r.sqrt();
            fit.c_deriv = fit.c_deriv.max(c);
        }
    }
    Ok(fit)
}

/// `sup |R(λ, r)| λ^{5/2} r^{1/2}` over samples with `λ r ≥ 1`.
pub fn fit_resolvent_constant(samples: &[(f64, f64)]) -> Result<f64> {
    let mut c: f64 = 0.0;
    for &(l, r) in samples {
        if l * r >= 1.0 {
            c = c.max(biharm_resolvent_kernel(l, r)?.norm() * l.powf(2.5) * r.sqrt());
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `J_m(x) = (1/π) ∫₀^π cos(mθ - x sin θ) dθ`, trapezoid in θ (spectrally accurate).
    fn bessel_oracle(m: f64, x: f64) -> f64 {
        let k = 4096;
        let h = PI / k as f64;
        let mut s = 0.5 * ((0.0f64).cos() + (m * PI - x * PI.sin()).cos());
        for j in 1..k {
            let t = j as f64 * h;
            s += (m * t - x * t.sin()).cos();
        }
        s * h / PI
    }

    #[test]
    fn j0_and_j1_match_integral_oracle() {
        for x in [0.0, 0.5, 2.0, 7.3, 11.99, 12.01, 30.0, 100.0] {
            assert!((bessel_j0(x) - bessel_oracle(0.0, x)).abs() < 1e-13, "J0({x})");
            assert!((bessel_j1(x) - bessel_oracle(1.0, x)).abs() < 1e-13, "J1({x})");
        }
    }

    #[test]
    fn j0_first_zero_and_origin() {
        assert_eq!(bessel_j0(0.0), 1.0);
        assert!(bessel_j0(2.404_825_557_695_773).abs() < 1e-15);
    }

    #[test]
    fn j0_continuous_at_switch() {
        let a = bessel_series(12.0, 0);
        let b = h0_integral(C64::new(12.0, 0.0), 64).re;
        assert!((a - b).abs() < 1e-12, "{a} {b}");
    }

    #[test]
    fn hankel_reference_values() {
        // mpmath, 30 digits
        let cases = [
            (C64::new(1.0, 1.0), C64::new(0.227_449_894_802_294_76, -0.051_055_458_673_089_618)),
            (C64::new(0.3, 0.0), C64::new(0.977_626_246_538_296_09, -0.807_273_577_804_519_49)),
            (C64::new(-1.0, 0.5), C64::new(-0.430_644_626_406_534_44, -0.037_156_936_324_262_794)),
            (C64::new(0.0, 2.0), C64::new(0.0, -0.072_507_091_343_870_252)),
            (C64::new(5.0, 0.1), C64::new(-0.163_358_642_487_114_07, -0.277_395_337_348_113_52)),
        ];
        for (z, want) in cases {
            for path in [HankelPath::Series, HankelPath::Integral] {
                let got = hankel_h01(z, path).unwrap();
                assert!((got - want).norm() < 1e-9 * want.norm(), "{z} {path:?} {got} {want}");
            }
        }
    }

    #[test]
    fn hankel_rejects_cut() {
        assert!(matches!(hankel_h01(C64::new(0.0, -1.0), HankelPath::Series), Err(Error::BranchCut { .. })));
        assert!(matches!(hankel_h01(C64::new(0.0, 0.0), HankelPath::Integral), Err(Error::BranchCut { .. })));
    }

    #[test]
    fn integral_path_flags_tiny_argument() {
        let r = hankel_h01(C64::new(1e-6, 0.0), HankelPath::Integral);
        assert!(matches!(r, Err(Error::QuadratureNonConverged { .. })));
    }

    #[test]
    fn resolvent_reference_value() {
        // mpmath: (Γ(0.3, 2) - Γ(0.3 i, 2)) / (2 · 0.3²)
        let want = C64::new(-0.258_994_537_560_505_66, 1.266_673_421_523_903_9);
        let got = biharm_resolvent_kernel(0.3, 2.0).unwrap();
        assert!((got - want).norm() < 1e-12);
        let k0 = 0.105_125_000_715_854_67;
        assert!((green_rotated_real(0.7) - k0).abs() < 1e-14);
        assert!((green_rotated_real(1.4 / 2.0) - green_kernel(C64::new(0.0, 0.35), 2.0).unwrap().re).abs() < 1e-14);
    }

    #[test]
    fn resolvent_at_origin() {
        let r = biharm_resolvent_kernel(1.0, 0.0).unwrap();
        assert_eq!(r, C64::new(0.0, 0.125));
    }

    #[test]
    fn coefficients() {
        assert_eq!(c_coefficient(0), Rational64::new(1, 2));
        assert_eq!(c_coefficient(1), Rational64::new(5, 4));
        assert_eq!(harmonic(3), Rational64::new(11, 6));
        assert!((series_coefficient(3) - 1.0 / 2304.0).abs() < 1e-18);
    }

    #[test]
    fn tail_kernels() {
        let t = series_tail_kernels(1).unwrap();
        assert_eq!(t.log.unwrap().eval(C64::new(1.0, 0.0), 1.0).unwrap(), C64::new(0.0, 0.0));
        assert!(series_tail_kernels(2).unwrap().log.is_none());
        assert!(matches!(series_tail_kernels(4), Err(Error::UnsupportedOrder(4))));
        assert!(matches!(series_tail_kernels(0), Err(Error::UnsupportedOrder(0))));
        // -λ⁴ g₃ r⁶/(4³ (3!)²) with G₆ = -r⁶/2304
        let g6 = series_tail_kernels(3).unwrap().even.eval(C64::new(1.0, 0.0), 2.0).unwrap();
        assert!((g6.re + 64.0 / 2304.0).abs() < 1e-15);
    }

    #[test]
    fn green_on_imaginary_axis_is_real_positive() {
        let v = green_kernel(C64::new(0.0, 1.0), 1.0).unwrap();
        assert!(v.re > 0.0 && v.im.abs() < 1e-15);
    }

    #[test]
    fn complex_resolvent_paths_agree() {
        let k = ComplexKernel::new(KernelKind::BiharmonicResolvent);
        let z = C64::new(0.7, 0.4);
        let a = scaled_resolvent_series(z, 0.9);
        let b = 0.5 * (quarter_i_h0(z * 0.9, 0.0) - quarter_i_h0(I * z * 0.9, 0.0));
        assert!((a - b).norm() < 1e-12 * a.norm());
        assert!(k.eval(z, 0.9).is_ok());
    }
}
