//! Uniform planar grids, FFT-based radial multipliers and Fourier-side sampling.
//!
//! Transforms use the unitary convention `û(ξ) = (2π)⁻¹ ∫ e^{-ixξ} u(x) dx`.
//! With nodes `x = -R + i h`, `h = 2R/N`, and dual spacing `π/R`, the
//! discrete transform satisfies Parseval exactly.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square grid `[-R, R)²` with `N` points per axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneGrid {
    n: usize,
    half_width: f64,
}

impl PlaneGrid {
    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return Err(Error::Invalid(format!("grid size must be even and >= 2, got {n}")));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::Invalid(format!("grid half-width must be positive, got {half_width}")));
        }
        Ok(Self { n, half_width })
    }

    /// Default field grid (`N = 256`, `R = 20`).
    pub fn field_default() -> Self {
        Self { n: 256, half_width: 20.0 }
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn half_width(&self) -> f64 {
        self.half_width
    }
    pub fn len(&self) -> usize {
        self.n * self.n
    }
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
    /// Grid spacing `h = 2R/N`.
    pub fn h(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }
    /// Cell weight `h²`.
    pub fn cell_weight(&self) -> f64 {
        self.h() * self.h()
    }
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.h()
    }
    pub fn point(&self, idx: usize) -> (f64, f64) {
        (self.coord(idx / self.n), self.coord(idx % self.n))
    }
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }
    /// Dual spacing `π/R`.
    pub fn dual_spacing(&self) -> f64 {
        PI / self.half_width
    }
    /// Largest resolved frequency `π/h = πN/(2R)`.
    pub fn nyquist(&self) -> f64 {
        PI / self.h()
    }
    /// Signed frequency of FFT bin `k`.
    pub fn freq(&self, k: usize) -> f64 {
        let s = if k < self.n / 2 { k as f64 } else { k as f64 - self.n as f64 };
        s * self.dual_spacing()
    }
    /// Frequency vector of flat FFT index `idx`.
    pub fn freq_point(&self, idx: usize) -> (f64, f64) {
        (self.freq(idx / self.n), self.freq(idx % self.n))
    }
}

// ---------------------------------------------------------------------------
// FFT plumbing

fn plans(n: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    type Plans = HashMap<usize, (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>)>;
    static CACHE: OnceLock<Mutex<Plans>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut p = FftPlanner::new();
            (p.plan_fft_forward(n), p.plan_fft_inverse(n))
        })
        .clone()
}

fn transpose(data: &mut [C64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

/// In-place unnormalised 2-D DFT (rows then columns).
fn fft2(data: &mut [C64], n: usize, inverse: bool) {
    let (f, b) = plans(n);
    let plan = if inverse { b } else { f };
    data.par_chunks_mut(n).for_each(|row| plan.process(row));
    transpose(data, n);
    data.par_chunks_mut(n).for_each(|row| plan.process(row));
    transpose(data, n);
}

// ---------------------------------------------------------------------------
// fields

/// Complex samples on a [`PlaneGrid`], row-major in `(x₁, x₂)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    pub grid: PlaneGrid,
    pub data: Vec<C64>,
}

impl Field {
    pub fn zeros(grid: PlaneGrid) -> Self {
        Self { grid, data: vec![C64::new(0.0, 0.0); grid.len()] }
    }

    pub fn from_fn(grid: PlaneGrid, f: impl Fn(f64, f64) -> C64 + Sync) -> Self {
        let data = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let (x, y) = grid.point(idx);
                f(x, y)
            })
            .collect();
        Self { grid, data }
    }

    fn check_same(&self, o: &Field) -> Result<()> {
        if self.grid != o.grid {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, o.grid)));
        }
        Ok(())
    }

    pub fn add(&self, o: &Field) -> Result<Field> {
        self.check_same(o)?;
        Ok(Field { grid: self.grid, data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect() })
    }

    pub fn sub(&self, o: &Field) -> Result<Field> {
        self.check_same(o)?;
        Ok(Field { grid: self.grid, data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect() })
    }

    pub fn scale(&self, c: C64) -> Field {
        Field { grid: self.grid, data: self.data.iter().map(|a| a * c).collect() }
    }

    pub fn conj(&self) -> Field {
        Field { grid: self.grid, data: self.data.iter().map(|a| a.conj()).collect() }
    }

    pub fn mul_pointwise(&self, o: &Field) -> Result<Field> {
        self.check_same(o)?;
        Ok(Field { grid: self.grid, data: self.data.iter().zip(&o.data).map(|(a, b)| a * b).collect() })
    }

    /// `(Σ |u|^p h²)^{1/p}`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let w = self.grid.cell_weight();
        (self.data.iter().map(|a| a.norm().powf(p)).sum::<f64>() * w).powf(1.0 / p)
    }

    pub fn l2_norm(&self) -> f64 {
        let w = self.grid.cell_weight();
        (self.data.iter().map(|a| a.norm_sqr()).sum::<f64>() * w).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// `⟨u, v⟩ = Σ ū v h²`.
    pub fn inner(&self, o: &Field) -> Result<C64> {
        self.check_same(o)?;
        Ok(self.data.iter().zip(&o.data).map(|(a, b)| a.conj() * b).sum::<C64>() * self.grid.cell_weight())
    }

    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.data[self.grid.index(i, j)]
    }

    /// Continuum-normalised transform `û` at the dual nodes (FFT order).
    pub fn spectrum(&self) -> Spectrum {
        let n = self.grid.n;
        let mut d = self.data.clone();
        fft2(&mut d, n, false);
        let c = self.grid.cell_weight() / (2.0 * PI);
        for (idx, v) in d.iter_mut().enumerate() {
            let sgn = if (idx / n + idx % n) % 2 == 0 { 1.0 } else { -1.0 };
            *v *= c * sgn;
        }
        Spectrum { grid: self.grid, data: d }
    }

    /// Apply the symbol `m(ξ₁, ξ₂)` with no aliasing checks.
    pub fn apply_symbol(&self, m: impl Fn(f64, f64) -> C64 + Sync) -> Field {
        let n = self.grid.n;
        let mut d = self.data.clone();
        fft2(&mut d, n, false);
        let g = self.grid;
        let scale = 1.0 / (n * n) as f64;
        d.par_iter_mut().enumerate().for_each(|(idx, v)| {
            let (a, b) = g.freq_point(idx);
            *v *= m(a, b) * scale;
        });
        fft2(&mut d, n, true);
        Field { grid: self.grid, data: d }
    }

    /// Apply the radial symbol `m(|ξ|)` with no aliasing checks.
    pub fn apply_radial(&self, m: impl Fn(f64) -> C64 + Sync) -> Field {
        self.apply_symbol(|a, b| m(a.hypot(b)))
    }

    /// Samples `û(λ ω_k)`, `ω_k = (cos 2πk/K, sin 2πk/K)`, by the direct
    /// semidiscrete sum (no spectral interpolation).
    pub fn circle_transform(&self, lambda: f64, k: usize) -> Vec<C64> {
        let n = self.grid.n;
        let g = self.grid;
        let c = g.cell_weight() / (2.0 * PI);
        (0..k)
            .into_par_iter()
            .map(|m| {
                let th = 2.0 * PI * m as f64 / k as f64;
                let (w1, w2) = (lambda * th.cos(), lambda * th.sin());
                let e2: Vec<C64> = (0..n).map(|j| C64::from_polar(1.0, -w2 * g.coord(j))).collect();
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..n {
                    let row = &self.data[i * n..(i + 1) * n];
                    let mut s = C64::new(0.0, 0.0);
                    for (u, e) in row.iter().zip(&e2) {
                        s += u * e;
                    }
                    acc += s * C64::from_polar(1.0, -w1 * g.coord(i));
                }
                acc * c
            })
            .collect()
    }
}

/// Dual-grid samples of `û`.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub grid: PlaneGrid,
    pub data: Vec<C64>,
}

impl Spectrum {
    /// `(Σ |û|² (π/R)²)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        let d = self.grid.dual_spacing();
        (self.data.iter().map(|a| a.norm_sqr()).sum::<f64>() * d * d).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Largest `|û|` at frequencies outside `[lo, hi]`.
    pub fn max_outside(&self, lo: f64, hi: f64) -> f64 {
        self.data
            .iter()
            .enumerate()
            .filter(|(idx, _)| {
                let (a, b) = self.grid.freq_point(*idx);
                let r = a.hypot(b);
                r < lo || r > hi
            })
            .map(|(_, v)| v.norm())
            .fold(0.0, f64::max)
    }

    /// Back to physical space.
    pub fn to_field(&self) -> Field {
        let n = self.grid.n;
        let c = 2.0 * PI / (self.grid.cell_weight() * (n * n) as f64);
        let mut d: Vec<C64> = self
            .data
            .iter()
            .enumerate()
            .map(|(idx, v)| {
                let sgn = if (idx / n + idx % n) % 2 == 0 { 1.0 } else { -1.0 };
                v * (c * sgn)
            })
            .collect();
        fft2(&mut d, n, true);
        Field { grid: self.grid, data: d }
    }
}

// ---------------------------------------------------------------------------
// cutoffs and multipliers

/// `χ_{≤a}`: 1 on `[0, a]`, 0 on `[2a, ∞)`, quintic `C²` ramp between.
pub fn chi_le(t: f64, a: f64) -> f64 {
    let s = ((t - a) / a).clamp(0.0, 1.0);
    1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
}

/// `χ_{≥a} = 1 - χ_{≤a/2}`: 0 on `[0, a/2]`, 1 on `[a, ∞)`.
pub fn chi_ge(t: f64, a: f64) -> f64 {
    1.0 - chi_le(t, 0.5 * a)
}

/// Radial symbol type.
pub type Symbol = Arc<dyn Fn(f64) -> C64 + Send + Sync>;

/// Radial Fourier multiplier `m(|D|)`.
#[derive(Clone)]
pub struct Multiplier {
    pub name: String,
    symbol: Symbol,
    /// Claimed derivative order `k` of the GMU bound, checked by [`Multiplier::certify`].
    pub gmu_order: Option<u8>,
}

impl std::fmt::Debug for Multiplier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Multiplier").field("name", &self.name).field("gmu_order", &self.gmu_order).finish()
    }
}

/// Outcome of the finite-difference GMU check.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GmuCertificate {
    /// `max_j sup |λ^j m^{(j)}(λ)|` over `[1e-3, 1e3]`.
    pub sup_inner: f64,
    /// Same over `[1e-6, 1e6]`.
    pub sup_outer: f64,
    pub pass: bool,
}

impl Multiplier {
    pub fn new(name: impl Into<String>, f: impl Fn(f64) -> C64 + Send + Sync + 'static) -> Self {
        Self { name: name.into(), symbol: Arc::new(f), gmu_order: None }
    }

    pub fn real(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(name, move |t| C64::new(f(t), 0.0))
    }

    pub fn with_gmu(mut self, k: u8) -> Self {
        self.gmu_order = Some(k);
        self
    }

    pub fn identity() -> Self {
        Self::real("1", |_| 1.0).with_gmu(2)
    }

    pub fn power(p: f64) -> Self {
        Self::real(format!("lambda^{p}"), move |t| t.powf(p))
    }

    pub fn cutoff_le(a: f64) -> Self {
        Self::real(format!("chi_le({a})"), move |t| chi_le(t, a)).with_gmu(2)
    }

    pub fn cutoff_ge(a: f64) -> Self {
        Self::real(format!("chi_ge({a})"), move |t| chi_ge(t, a)).with_gmu(2)
    }

    /// `1 - χ_{≤a}`, the complement used for the low/high energy split.
    pub fn high_pass(a: f64) -> Self {
        Self::real(format!("1-chi_le({a})"), move |t| 1.0 - chi_le(t, a)).with_gmu(2)
    }

    pub fn eval(&self, t: f64) -> C64 {
        (self.symbol)(t)
    }

    pub fn symbol(&self) -> Symbol {
        self.symbol.clone()
    }

    /// Pointwise product `m₁ m₂`.
    pub fn product(&self, o: &Multiplier) -> Multiplier {
        let (a, b) = (self.symbol.clone(), o.symbol.clone());
        Multiplier::new(format!("{}*{}", self.name, o.name), move |t| a(t) * b(t))
    }

    /// Complex-conjugate symbol (adjoint operator).
    pub fn adjoint(&self) -> Multiplier {
        let a = self.symbol.clone();
        Multiplier::new(format!("conj({})", self.name), move |t| a(t).conj())
    }

    /// Finite-difference check of `|λ^j ∂^j m(λ)| ≤ C`, `j ≤ 2`.
    ///
    /// Passes when the supremum over `[1e-6, 1e6]` exceeds the one over
    /// `[1e-3, 1e3]` by at most 50 %, i.e. the bound does not degenerate at
    /// either end.
    pub fn certify(&self) -> GmuCertificate {
        let sup = |lo: f64, hi: f64| {
            let n = 600;
            let mut s: f64 = 0.0;
            for k in 0..=n {
                let l = (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / n as f64).exp();
                // derivatives in t = log λ: λ m' = dm/dt, λ² m'' = d²m/dt² - dm/dt
                let e: f64 = 1e-4;
                let f0 = self.eval(l);
                let fp = self.eval(l * e.exp());
                let fm = self.eval(l * (-e).exp());
                let d1 = (fp - fm) / (2.0 * e);
                let d2 = (fp - 2.0 * f0 + fm) / (e * e) - d1;
                s = s.max(f0.norm()).max(d1.norm()).max(d2.norm());
            }
            s
        };
        let sup_inner = sup(1e-3, 1e3);
        let sup_outer = sup(1e-6, 1e6);
        let pass = sup_outer.is_finite() && sup_outer <= 1.5 * sup_inner;
        GmuCertificate { sup_inner, sup_outer, pass }
    }

    /// Fails with `NotGmu` unless [`Multiplier::certify`] passes.
    pub fn require_gmu(&self) -> Result<()> {
        let c = self.certify();
        if c.pass {
            Ok(())
        } else {
            Err(Error::NotGmu(format!("{}: sup grows from {:.3e} to {:.3e}", self.name, c.sup_inner, c.sup_outer)))
        }
    }
}

// ---------------------------------------------------------------------------
// test functions

/// Field with a certified spectral annulus `[λmin, λmax]`.
#[derive(Clone, Debug)]
pub struct TestFunction {
    pub field: Field,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

/// Relative level below which `û` counts as zero outside the annulus.
pub const ANNULUS_TOL: f64 = 1e-10;

fn check_resolved(grid: &PlaneGrid, lambda_max: f64) -> Result<()> {
    if lambda_max >= grid.nyquist() {
        return Err(Error::AliasedSpectrum { lambda_max, nyquist: grid.nyquist() });
    }
    Ok(())
}

impl TestFunction {
    /// Project `field` onto the annulus `[λmin, λmax]`.
    pub fn from_field(field: Field, lambda_min: f64, lambda_max: f64) -> Result<Self> {
        check_resolved(&field.grid, lambda_max)?;
        if !(lambda_min >= 0.0 && lambda_max > lambda_min) {
            return Err(Error::Invalid(format!("bad annulus [{lambda_min}, {lambda_max}]")));
        }
        let projected = field.apply_radial(|t| {
            if t >= lambda_min && t <= lambda_max {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Ok(Self { field: projected, lambda_min, lambda_max })
    }

    /// Build from a spectrum given as a function of `ξ`, zeroed outside the annulus.
    pub fn from_spectrum(
        grid: PlaneGrid,
        lambda_min: f64,
        lambda_max: f64,
        uhat: impl Fn(f64, f64) -> C64 + Sync,
    ) -> Result<Self> {
        check_resolved(&grid, lambda_max)?;
        let data = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let (a, b) = grid.freq_point(idx);
                let r = a.hypot(b);
                if r >= lambda_min && r <= lambda_max {
                    uhat(a, b)
                } else {
                    C64::new(0.0, 0.0)
                }
            })
            .collect();
        let field = Spectrum { grid, data }.to_field();
        Ok(Self { field, lambda_min, lambda_max })
    }

    /// `û(ξ) ∝ exp(-(|ξ|-λ₀)²/(2s²)) e^{imθ} e^{-iξ·c}`, normalised in `L²`,
    /// on the annulus `[λ₀ - 7s, λ₀ + 7s]` (clipped at 0).
    pub fn annular_gaussian(grid: PlaneGrid, lambda0: f64, s: f64, mode: i32, center: (f64, f64)) -> Result<Self> {
        let lo = (lambda0 - 7.0 * s).max(0.0);
        let hi = lambda0 + 7.0 * s;
        let tf = Self::from_spectrum(grid, lo, hi, |a, b| {
            let r = a.hypot(b);
            let th = b.atan2(a);
            let amp = (-(r - lambda0).powi(2) / (2.0 * s * s)).exp();
            C64::from_polar(amp, mode as f64 * th - (a * center.0 + b * center.1))
        })?;
        Ok(tf.normalized())
    }

    /// Complex Gaussian noise on the dual grid, windowed smoothly to `[lo, hi]`.
    pub fn annular_noise(grid: PlaneGrid, lo: f64, hi: f64, seed: u64) -> Result<Self> {
        check_resolved(&grid, hi)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise: Vec<C64> = (0..grid.len())
            .map(|_| {
                let a: f64 = StandardNormal.sample(&mut rng);
                let b: f64 = StandardNormal.sample(&mut rng);
                C64::new(a, b)
            })
            .collect();
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let tf = Self::from_spectrum(grid, lo, hi, |a, b| {
            let t = (a.hypot(b) - mid) / half;
            if t.abs() >= 1.0 {
                return C64::new(0.0, 0.0);
            }
            let w = (1.0 - 1.0 / (1.0 - t * t)).exp();
            let k = {
                let n = grid.n();
                let ka = ((a / grid.dual_spacing()).round() as i64).rem_euclid(n as i64) as usize;
                let kb = ((b / grid.dual_spacing()).round() as i64).rem_euclid(n as i64) as usize;
                ka * n + kb
            };
            noise[k] * w
        })?;
        Ok(tf.normalized())
    }

    pub fn grid(&self) -> PlaneGrid {
        self.field.grid
    }

    pub fn normalized(mut self) -> Self {
        let n = self.field.l2_norm();
        if n > 0.0 {
            self.field = self.field.scale(C64::new(1.0 / n, 0.0));
        }
        self
    }

    /// Largest `|û|` outside the annulus relative to `max |û|`.
    pub fn annulus_leak(&self) -> f64 {
        let s = self.field.spectrum();
        let m = s.max_abs();
        if m == 0.0 {
            0.0
        } else {
            s.max_outside(self.lambda_min, self.lambda_max) / m
        }
    }

    /// Same annulus, different data (linear combinations, multiplier images).
    pub fn with_field(&self, field: Field) -> Self {
        Self { field, lambda_min: self.lambda_min, lambda_max: self.lambda_max }
    }

    pub fn scale(&self, c: C64) -> Self {
        self.with_field(self.field.scale(c))
    }

    /// `αu + βv` on the union annulus.
    pub fn combine(&self, a: C64, o: &TestFunction, b: C64) -> Result<TestFunction> {
        let f = self.field.scale(a).add(&o.field.scale(b))?;
        Ok(TestFunction {
            field: f,
            lambda_min: self.lambda_min.min(o.lambda_min),
            lambda_max: self.lambda_max.max(o.lambda_max),
        })
    }

    /// Translation `τ_a u(x) = u(x - a)` as the multiplier `e^{-ia·ξ}`.
    pub fn translate(&self, a: (f64, f64)) -> Self {
        let f = self.field.apply_symbol(|x, y| C64::from_polar(1.0, -(x * a.0 + y * a.1)));
        self.with_field(f)
    }
}

/// `m(|D|) u`.
pub fn apply_multiplier(m: &Multiplier, u: &TestFunction) -> Result<TestFunction> {
    check_resolved(&u.grid(), u.lambda_max)?;
    let sym = m.symbol();
    Ok(u.with_field(u.field.apply_radial(move |t| sym(t))))
}

/// Riesz transform `R_j` with symbol `iξ_j/|ξ|`, `j ∈ {1, 2}`.
pub fn riesz_transform(j: usize, u: &TestFunction) -> Result<TestFunction> {
    check_resolved(&u.grid(), u.lambda_max)?;
    if j != 1 && j != 2 {
        return Err(Error::Invalid(format!("Riesz index must be 1 or 2, got {j}")));
    }
    let f = u.field.apply_symbol(|a, b| {
        let r = a.hypot(b);
        if r == 0.0 {
            C64::new(0.0, 0.0)
        } else {
            C64::new(0.0, if j == 1 { a } else { b } / r)
        }
    });
    Ok(u.with_field(f))
}

/// `û(λ ω_k)` on `K` equally spaced directions.
pub fn fourier_on_circle(u: &TestFunction, lambda: f64, k: usize) -> Result<Vec<C64>> {
    if !(lambda > 0.0) {
        return Err(Error::Invalid(format!("lambda must be positive, got {lambda}")));
    }
    check_resolved(&u.grid(), lambda)?;
    Ok(u.field.circle_transform(lambda, k))
}

/// Spatial interpolation scheme for [`spherical_mean`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interp {
    Bilinear,
    /// Tensor Lagrange interpolation on 8 × 8 nodes.
    Lagrange8,
}

fn lagrange_weights(t: f64, order: usize) -> (i64, Vec<f64>) {
    let base = t.floor() as i64 - (order as i64 / 2 - 1);
    let mut w = vec![1.0; order];
    for (j, wj) in w.iter_mut().enumerate() {
        let xj = (base + j as i64) as f64;
        for m in 0..order {
            if m != j {
                let xm = (base + m as i64) as f64;
                *wj *= (t - xm) / (xj - xm);
            }
        }
    }
    (base, w)
}

/// Interpolate a field at an arbitrary point (periodic wrap).
pub fn interpolate(u: &Field, x: f64, y: f64, scheme: Interp) -> C64 {
    let g = u.grid;
    let n = g.n() as i64;
    let ti = (x + g.half_width()) / g.h();
    let tj = (y + g.half_width()) / g.h();
    let order = match scheme {
        Interp::Bilinear => 2,
        Interp::Lagrange8 => 8,
    };
    let (bi, wi) = lagrange_weights(ti, order);
    let (bj, wj) = lagrange_weights(tj, order);
    let mut s = C64::new(0.0, 0.0);
    for (a, wa) in wi.iter().enumerate() {
        let i = (bi + a as i64).rem_euclid(n) as usize;
        let row = &u.data[i * g.n()..(i + 1) * g.n()];
        let mut r = C64::new(0.0, 0.0);
        for (b, wb) in wj.iter().enumerate() {
            let j = (bj + b as i64).rem_euclid(n) as usize;
            r += row[j] * wb;
        }
        s += r * wa;
    }
    s
}

/// Circle mean `Mu(ρ) = (2π)⁻¹ ∫ u(ρω) dω` by the `K`-point trapezoid rule.
pub fn spherical_mean(u: &Field, rho: f64, k: usize, scheme: Interp) -> Result<C64> {
    let max = u.grid.half_width() * 2f64.sqrt();
    if !(rho >= 0.0) || rho > max {
        return Err(Error::OutOfDomain { rho, max });
    }
    if k < 64 {
        return Err(Error::Invalid(format!("spherical mean needs K >= 64, got {k}")));
    }
    let s: C64 = (0..k)
        .map(|m| {
            let th = 2.0 * PI * m as f64 / k as f64;
            interpolate(u, rho * th.cos(), rho * th.sin(), scheme)
        })
        .sum();
    Ok(s / k as f64)
}
