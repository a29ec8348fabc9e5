//! Stationary wave operators `W_±`, the Born series and the `Ω(T)` functional.
//!
//! `W₋u = u - ∫ R₀⁺(λ⁴) 𝒬_v(λ) Π(λ)u λ³ dλ` is assembled node by node on a
//! Gauss-Legendre rule covering the spectral annulus of `u`. The potential
//! must be sampled on the same lattice as `u`; scattered fields are kernel sums
//! over the support.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{self, chi_le, Field, Multiplier, PlaneGrid, TestFunction};
use crate::linalg::{CMat, CVec};
use crate::operators::{self, OffsetTable, PotentialData};
use crate::quad;
use crate::specfun;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WaveMode {
    FullInverse,
    /// Partial Born sum up to the given order.
    Born(usize),
    LowEnergyOnly,
    HighEnergyOnly,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WaveOperatorConfig {
    /// Gauss-Legendre nodes over the annulus.
    pub nodes: usize,
    /// Directions on each circle `|ξ| = λ`.
    pub circle_nodes: usize,
    /// Energy split.
    pub a: f64,
    pub born_max: usize,
    pub mode: WaveMode,
    /// Rejection level for `σ_min(M⁺(λ))`.
    pub inv_tol: f64,
    /// Smallest admissible quadrature node.
    pub lambda_floor: f64,
}

impl Default for WaveOperatorConfig {
    fn default() -> Self {
        Self {
            nodes: 96,
            circle_nodes: 256,
            a: 1.0,
            born_max: 4,
            mode: WaveMode::FullInverse,
            inv_tol: operators::INV_TOL,
            lambda_floor: 0.2,
        }
    }
}

/// Which wave operator: `W₋` uses `R₀⁺`, `W₊` the conjugate kernels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Minus,
    Plus,
}

/// Quadrature `(λ, w)` on `[λmin - δ, λmax + δ]`, `δ = 0.05 λmin`.
pub fn lambda_nodes(u: &TestFunction, cfg: &WaveOperatorConfig) -> Result<Vec<(f64, f64)>> {
    let delta = 0.05 * u.lambda_min;
    let lo = u.lambda_min - delta;
    let hi = u.lambda_max + delta;
    if lo < cfg.lambda_floor {
        return Err(Error::LambdaOutOfRange { lambda: lo, range: format!("[{}, inf)", cfg.lambda_floor) });
    }
    let nyq = u.grid().nyquist();
    if hi >= nyq {
        return Err(Error::AliasedSpectrum { lambda_max: hi, nyquist: nyq });
    }
    Ok(quad::gl_interval(lo, hi, cfg.nodes))
}

fn check_grid(u: &TestFunction, p: &PotentialData) -> Result<()> {
    let (a, b) = (u.grid(), p.grid);
    if a.n() != b.n() || (a.half_width() - b.half_width()).abs() > 1e-12 * a.half_width() {
        return Err(Error::GridMismatch(format!(
            "field grid {}@{} vs potential grid {}@{}",
            a.n(),
            a.half_width(),
            b.n(),
            b.half_width()
        )));
    }
    Ok(())
}

/// Per-node support data handed to the `q` builders.
pub struct NodeInput<'a> {
    pub lambda: f64,
    /// `Π(λ)u` on the support.
    pub pi: CVec,
    pub potential: &'a PotentialData,
    pub side: Side,
}

impl NodeInput<'_> {
    /// `λ²R(λ, ·)` or its conjugate.
    fn scaled_kernel(&self, r: f64) -> C64 {
        let k = specfun::lambda2_resolvent(self.lambda, r);
        match self.side {
            Side::Minus => k,
            Side::Plus => k.conj(),
        }
    }

    /// `R̃ᵢⱼ = R(λ, |yᵢ - yⱼ|) h²`.
    pub fn support_resolvent(&self) -> CMat {
        let p = self.potential;
        let h2 = p.grid.cell_weight();
        let l2 = self.lambda * self.lambda;
        let t = OffsetTable::build(p.grid.h(), p.max_offset(), |r| self.scaled_kernel(r) * (h2 / l2));
        let n = p.len();
        CMat::from_fn(n, n, |i, j| {
            let (a, b) = (p.lattice[i], p.lattice[j]);
            t.get(a.0 - b.0, a.1 - b.1)
        })
    }

    /// `𝒬_v(λ) Π(λ)u = v ⊙ M⁺(λ)⁻¹ (v ⊙ Π(λ)u)`.
    pub fn qv(&self, inv_tol: f64) -> Result<CVec> {
        let p = self.potential;
        let mut m = operators::birman_schwinger_with_tol(self.lambda, p, inv_tol)?.matrix;
        if self.side == Side::Plus {
            m = m.map(|z| z.conj());
        }
        let rhs = CVec::from_iterator(p.len(), self.pi.iter().zip(&p.v).map(|(a, v)| a * *v));
        let sol = m.lu().solve(&rhs).ok_or(Error::SingularAtLambda { lambda: self.lambda, sigma_min: 0.0 })?;
        Ok(CVec::from_iterator(p.len(), sol.iter().zip(&p.v).map(|(a, v)| a * *v)))
    }

    /// `q⁽¹⁾ = V Π(λ)u`, `q⁽ⁿ⁾ = V R̃ q⁽ⁿ⁻¹⁾`.
    pub fn born(&self, nmax: usize) -> Vec<CVec> {
        let p = self.potential;
        let vpot = CVec::from_iterator(p.len(), p.v_pot.iter().map(|&x| C64::new(x, 0.0)));
        let rr = if nmax > 1 { Some(self.support_resolvent()) } else { None };
        let mut out: Vec<CVec> = Vec::with_capacity(nmax);
        let mut q = self.pi.component_mul(&vpot);
        for n in 1..=nmax {
            if n > 1 {
                q = (rr.as_ref().unwrap() * &q).component_mul(&vpot);
            }
            out.push(q.clone());
        }
        out
    }
}

/// Node-wise support vectors produced by a builder.
pub struct NodeQ {
    pub lambda: f64,
    pub weight: f64,
    pub qs: Vec<CVec>,
}

/// Evaluate `Π(λ)u` on the support at every node and run `build`.
pub fn node_sources<F>(
    u: &TestFunction,
    p: &PotentialData,
    cfg: &WaveOperatorConfig,
    side: Side,
    build: F,
) -> Result<Vec<NodeQ>>
where
    F: Fn(&NodeInput) -> Result<Vec<CVec>> + Sync,
{
    check_grid(u, p)?;
    let nodes = lambda_nodes(u, cfg)?;
    nodes
        .par_iter()
        .map(|&(lambda, weight)| {
            let uhat = fourier::fourier_on_circle(u, lambda, cfg.circle_nodes)?;
            let pi = CVec::from_vec(operators::project_from_circle(lambda, &uhat, &p.points));
            let input = NodeInput { lambda, pi, potential: p, side };
            Ok(NodeQ { lambda, weight, qs: build(&input)? })
        })
        .collect()
}

/// `Σ_nodes w λ^{3+extra} R₀(λ⁴) q` on the field grid, one field per
/// `(q index, extra power)` job. Reduction runs in node order.
pub fn propagate(p: &PotentialData, grid: PlaneGrid, nodes: &[NodeQ], side: Side, jobs: &[(usize, i32)]) -> Vec<Field> {
    let n = grid.n();
    let c = (n / 2) as i64;
    let h2 = grid.cell_weight();
    let per_node: Vec<Vec<Vec<C64>>> = nodes
        .par_iter()
        .map(|nq| {
            let lambda = nq.lambda;
            let l2 = lambda * lambda;
            let table = OffsetTable::build(grid.h(), n, |r| {
                let k = specfun::lambda2_resolvent(lambda, r) / l2;
                match side {
                    Side::Minus => k,
                    Side::Plus => k.conj(),
                }
            });
            jobs.iter()
                .map(|&(qi, extra)| {
                    let scale = nq.weight * lambda.powi(3 + extra) * h2;
                    let q: Vec<C64> = nq.qs[qi].iter().map(|z| z * scale).collect();
                    let mut out = vec![C64::new(0.0, 0.0); grid.len()];
                    for (idx, o) in out.iter_mut().enumerate() {
                        let (i, j) = ((idx / n) as i64 - c, (idx % n) as i64 - c);
                        let mut s = C64::new(0.0, 0.0);
                        for (l, qj) in p.lattice.iter().zip(&q) {
                            s += table.get(i - l.0, j - l.1) * qj;
                        }
                        *o = s;
                    }
                    out
                })
                .collect()
        })
        .collect();
    jobs.iter()
        .enumerate()
        .map(|(k, _)| {
            let mut acc = vec![C64::new(0.0, 0.0); grid.len()];
            for node in &per_node {
                for (a, b) in acc.iter_mut().zip(&node[k]) {
                    *a += b;
                }
            }
            Field { grid, data: acc }
        })
        .collect()
}

/// `Σ_nodes w λ^{3+extra} q` as a grid field supported on the potential's
/// support (lattice delta of unit mass).
pub fn deposit(p: &PotentialData, grid: PlaneGrid, nodes: &[NodeQ], qi: usize, extra: i32) -> Field {
    let mut f = Field::zeros(grid);
    for nq in nodes {
        let s = nq.weight * nq.lambda.powi(3 + extra);
        for (&k, q) in p.support.iter().zip(nq.qs[qi].iter()) {
            f.data[k] += q * s;
        }
    }
    f
}

/// Scattered part `∫ R₀ 𝒬_v Π u λ³ dλ`.
pub fn scattered_part(u: &TestFunction, p: &PotentialData, cfg: &WaveOperatorConfig, side: Side) -> Result<Field> {
    let nodes = node_sources(u, p, cfg, side, |n| Ok(vec![n.qv(cfg.inv_tol)?]))?;
    Ok(propagate(p, u.grid(), &nodes, side, &[(0, 0)]).remove(0))
}

fn full(u: &TestFunction, p: &PotentialData, cfg: &WaveOperatorConfig, side: Side) -> Result<Field> {
    u.field.sub(&scattered_part(u, p, cfg, side)?)
}

/// `χ_{≤a}(|D|)u` and `(1 - χ_{≤a})(|D|)u`; the two add up to `u` exactly.
pub fn split_input(u: &TestFunction, a: f64) -> (TestFunction, TestFunction) {
    let low = u.with_field(u.field.apply_radial(|t| C64::new(chi_le(t, a), 0.0)));
    let high = u.with_field(u.field.sub(&low.field).expect("same grid"));
    (low, high)
}

pub fn apply_wave_operator(u: &TestFunction, p: &PotentialData, cfg: &WaveOperatorConfig) -> Result<Field> {
    apply_side(u, p, cfg, Side::Minus)
}

/// `W₊` through the conjugated kernels.
pub fn apply_wave_operator_plus(u: &TestFunction, p: &PotentialData, cfg: &WaveOperatorConfig) -> Result<Field> {
    apply_side(u, p, cfg, Side::Plus)
}

pub fn apply_side(u: &TestFunction, p: &PotentialData, cfg: &WaveOperatorConfig, side: Side) -> Result<Field> {
    match cfg.mode {
        WaveMode::FullInverse => full(u, p, cfg, side),
        WaveMode::Born(n) => {
            let terms = born_terms_side(u, p, cfg, n, side)?;
            let mut acc = u.field.clone();
            for (k, t) in terms.iter().enumerate() {
                let sgn = if (k + 1) % 2 == 0 { 1.0 } else { -1.0 };
                acc = acc.add(&t.scale(C64::new(sgn, 0.0)))?;
            }
            Ok(acc)
        }
        WaveMode::LowEnergyOnly => full(&split_input(u, cfg.a).0, p, cfg, side),
        WaveMode::HighEnergyOnly => full(&split_input(u, cfg.a).1, p, cfg, side),
    }
}

/// `(W₋χ_{≤a}u, W₋χ_{≥a}u)`.
pub fn low_high_split(u: &TestFunction, p: &PotentialData, cfg: &WaveOperatorConfig) -> Result<(Field, Field)> {
    let (lo, hi) = split_input(u, cfg.a);
    Ok((full(&lo, p, cfg, Side::Minus)?, full(&hi, p, cfg, Side::Minus)?))
}

fn born_terms_side(u: &TestFunction, p: &PotentialData, cfg: &WaveOperatorConfig, nmax: usize, side: Side) -> Result<Vec<Field>> {
    if nmax == 0 {
        return Ok(Vec::new());
    }
    let nodes = node_sources(u, p, cfg, side, |n| Ok(n.born(nmax)))?;
    let jobs: Vec<(usize, i32)> = (0..nmax).map(|k| (k, 0)).collect();
    Ok(propagate(p, u.grid(), &nodes, side, &jobs))
}

/// `W_n χ_{≥a}(|D|)u` for `n = 1..=nmax`, with `W₋ - I = Σ (-1)ⁿ Wₙ`.
pub fn born_terms(u: &TestFunction, p: &PotentialData, cfg: &WaveOperatorConfig, nmax: usize) -> Result<Vec<Field>> {
    born_terms_side(&split_input(u, cfg.a).1, p, cfg, nmax, Side::Minus)
}

pub fn born_term(n: usize, u: &TestFunction, p: &PotentialData, cfg: &WaveOperatorConfig) -> Result<Field> {
    if n == 0 || n > cfg.born_max {
        return Err(Error::Invalid(format!("Born order {n} outside 1..={}", cfg.born_max)));
    }
    Ok(born_terms(u, p, cfg, n)?.pop().unwrap())
}

/// `|‖Wu‖ - ‖u‖| / ‖u‖`.
pub fn isometry_defect(u: &Field, wu: &Field) -> f64 {
    let a = u.l2_norm();
    (wu.l2_norm() - a).abs() / a
}

/// `‖(Δ² + V)W₋u - W₋Δ²u‖₂ / ‖Δ²u‖₂`.
///
/// `Δ²` is spectral on `u`; on the scattered part it uses
/// `Δ² R₀⁺(λ⁴) q = λ⁴ R₀⁺(λ⁴) q + q`.
pub fn intertwining_defect(u: &TestFunction, p: &PotentialData, cfg: &WaveOperatorConfig) -> Result<f64> {
    let grid = u.grid();
    let nodes = node_sources(u, p, cfg, Side::Minus, |n| Ok(vec![n.qv(cfg.inv_tol)?]))?;
    let mut fields = propagate(p, grid, &nodes, Side::Minus, &[(0, 0), (0, 4)]);
    let s7 = fields.pop().unwrap();
    let s3 = fields.pop().unwrap();
    let delta = deposit(p, grid, &nodes, 0, 0);
    let d2u = u.field.apply_radial(|t| C64::new(t.powi(4), 0.0));
    let wu = u.field.sub(&s3)?;
    let vfield = Field { grid, data: p.values.iter().map(|&v| C64::new(v, 0.0)).collect() };
    let lhs = d2u.sub(&s7)?.sub(&delta)?.add(&vfield.mul_pointwise(&wu)?)?;
    let d2tf = u.with_field(d2u.clone());
    let rhs = full(&d2tf, p, cfg, Side::Minus)?;
    Ok(lhs.sub(&rhs)?.l2_norm() / d2u.l2_norm())
}

/// JSON metrics of a wave-operator run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WaveMetrics {
    pub isometry_defect: f64,
    pub intertwining_defect: f64,
    /// `‖W_{n+1}χ_{≥a}u‖ / ‖W_nχ_{≥a}u‖`.
    pub born_ratios: Vec<f64>,
}

pub fn wave_metrics(u: &TestFunction, p: &PotentialData, cfg: &WaveOperatorConfig) -> Result<WaveMetrics> {
    let wu = full(u, p, cfg, Side::Minus)?;
    let born = born_terms(u, p, cfg, cfg.born_max.max(2))?;
    Ok(WaveMetrics {
        isometry_defect: isometry_defect(&u.field, &wu),
        intertwining_defect: intertwining_defect(u, p, cfg)?,
        born_ratios: born_ratios(&born),
    })
}

pub fn born_ratios(terms: &[Field]) -> Vec<f64> {
    terms.windows(2).map(|w| w[1].l2_norm() / w[0].l2_norm()).collect()
}

/// Partial Born sum against the full-inverse route on `χ_{≥a}u`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BornComparison {
    pub order: usize,
    /// `‖Σ_{n≤N}(-1)ⁿWₙu - (W₋ - I)χ_{≥a}u‖₂`.
    pub discrepancy: f64,
    /// `‖W_{N+1}‖ / (1 - r)` with `r` the last measured ratio.
    pub bound: f64,
    pub ratio: f64,
    pub term_norms: Vec<f64>,
}

pub fn born_vs_full(u: &TestFunction, p: &PotentialData, cfg: &WaveOperatorConfig, order: usize) -> Result<BornComparison> {
    let terms = born_terms(u, p, cfg, order + 1)?;
    let hi = split_input(u, cfg.a).1;
    let scat = scattered_part(&hi, p, cfg, Side::Minus)?.scale(C64::new(-1.0, 0.0));
    let mut partial = Field::zeros(u.grid());
    for (k, t) in terms.iter().take(order).enumerate() {
        let sgn = if (k + 1) % 2 == 0 { 1.0 } else { -1.0 };
        partial = partial.add(&t.scale(C64::new(sgn, 0.0)))?;
    }
    let term_norms: Vec<f64> = terms.iter().map(Field::l2_norm).collect();
    let ratio = born_ratios(&terms).into_iter().fold(0.0, f64::max);
    let bound = if ratio < 1.0 { term_norms[order] / (1.0 - ratio) } else { f64::INFINITY };
    Ok(BornComparison { order, discrepancy: partial.sub(&scat)?.l2_norm(), bound, ratio, term_norms })
}

// ---------------------------------------------------------------------------
// Ω(T)

/// `T(λ)` as a kernel on the support (unfolded values `T(yᵢ, yⱼ)`).
#[derive(Clone)]
pub enum KernelFamily {
    Constant(CMat),
    Dependent(std::sync::Arc<dyn Fn(f64) -> CMat + Send + Sync>),
}

impl KernelFamily {
    pub fn at(&self, lambda: f64) -> CMat {
        match self {
            KernelFamily::Constant(m) => m.clone(),
            KernelFamily::Dependent(f) => f(lambda),
        }
    }
}

/// `Ω(T)μ(|D|)u = ∫ R₀⁺(λ⁴) T(λ) Π(λ) μ(λ) u λ³ dλ`.
#[derive(Clone)]
pub struct OmegaFunctional {
    pub t: KernelFamily,
    pub mu: Multiplier,
    /// `κ = μ/λ²`, certified before use.
    pub kappa: Multiplier,
}

impl OmegaFunctional {
    /// `μ = λ² κ`.
    pub fn new(t: KernelFamily, kappa: Multiplier) -> Result<Self> {
        kappa.require_gmu()?;
        let k = kappa.clone();
        let mu = Multiplier::new(format!("l^2 {}", kappa.name), move |l| k.eval(l) * (l * l));
        Ok(Self { t, mu, kappa })
    }
}

/// `∫∫ |T(x, y)| dx dy` on the support; `λ`-dependent kernels take the max
/// over the supplied nodes.
pub fn kernel_l1_norm(t: &KernelFamily, p: &PotentialData, lambdas: &[f64]) -> Result<f64> {
    let h4 = p.grid.cell_weight().powi(2);
    let one = |m: &CMat| -> Result<f64> {
        let s: f64 = m.iter().map(|z| z.norm()).sum::<f64>() * h4;
        if !s.is_finite() {
            return Err(Error::KernelNotIntegrable("non-finite kernel entries".into()));
        }
        Ok(s)
    };
    match t {
        KernelFamily::Constant(m) => one(m),
        KernelFamily::Dependent(_) => lambdas.iter().map(|&l| one(&t.at(l))).try_fold(0.0f64, |a, b| Ok(a.max(b?))),
    }
}

fn omega_sources(f: &OmegaFunctional, u: &TestFunction, p: &PotentialData, cfg: &WaveOperatorConfig) -> Result<Vec<NodeQ>> {
    let h2 = p.grid.cell_weight();
    node_sources(u, p, cfg, Side::Minus, |n| {
        let t = f.t.at(n.lambda);
        if t.iter().any(|z| !z.is_finite()) {
            return Err(Error::KernelNotIntegrable(format!("T({}) has non-finite entries", n.lambda)));
        }
        Ok(vec![(t * &n.pi) * (f.mu.eval(n.lambda) * h2)])
    })
}

/// Direct node-wise quadrature of `Ω(T)μ(|D|)u`.
pub fn omega_apply(f: &OmegaFunctional, u: &TestFunction, p: &PotentialData, cfg: &WaveOperatorConfig) -> Result<Field> {
    let nodes = omega_sources(f, u, p, cfg)?;
    Ok(propagate(p, u.grid(), &nodes, Side::Minus, &[(0, 0)]).remove(0))
}

/// Integration-by-parts route: with `F(λ) = μ(λ)T(λ)η(λ)`, `η` a smooth
/// cutoff equal to 1 on the annulus and vanishing past `2λmax`,
/// `Ω(F)u = ∫ ρ Ω(F″(ρ)) (1 - |D|/ρ)₊ u dρ`. `F″` is taken by central
/// differences. The radial multiplier `(1 - |D|/ρ)₊` acts on the circle
/// samples through its symbol, and the inner `λ`-integral is split at `ρ`.
pub fn omega_apply_ibp(
    f: &OmegaFunctional,
    u: &TestFunction,
    p: &PotentialData,
    cfg: &WaveOperatorConfig,
    rho_nodes: usize,
) -> Result<Field> {
    check_grid(u, p)?;
    let (lmin, lmax) = (u.lambda_min, u.lambda_max);
    let eta = move |l: f64| chi_le(l, lmax);
    let big_f = |l: f64| f.t.at(l) * (f.mu.eval(l) * eta(l));
    let d = 1e-3 * lmax;
    let f2 = |r: f64| (big_f(r + d) - big_f(r) * C64::new(2.0, 0.0) + big_f(r - d)) / C64::new(d * d, 0.0);
    let h2 = p.grid.cell_weight();
    let panels = 8;
    let mut breaks: Vec<f64> = (0..=panels).map(|k| lmin + (lmax - lmin) * k as f64 / panels as f64).collect();
    breaks.push(2.0 * lmax);
    let rho_rule = quad::gl_panels(&breaks, (rho_nodes / (panels + 1)).max(4));
    let mut srcs = Vec::new();
    for &(rho, wr) in &rho_rule {
        let hi = rho.min(lmax);
        if hi <= lmin {
            continue;
        }
        let t2 = f2(rho);
        if t2.iter().any(|z| !z.is_finite()) {
            return Err(Error::KernelNotIntegrable(format!("F''({rho}) has non-finite entries")));
        }
        let cut = Multiplier::real("(1-|D|/rho)+", move |t| (1.0 - t / rho).max(0.0));
        let inner = quad::gl_interval(lmin, hi, cfg.nodes);
        let part: Vec<NodeQ> = inner
            .par_iter()
            .map(|&(lambda, weight)| {
                let uhat = fourier::fourier_on_circle(u, lambda, cfg.circle_nodes)?;
                let pi = CVec::from_vec(operators::project_from_circle(lambda, &uhat, &p.points));
                let q = (&t2 * pi) * (cut.eval(lambda) * h2 * rho * wr);
                Ok(NodeQ { lambda, weight, qs: vec![q] })
            })
            .collect::<Result<_>>()?;
        srcs.extend(part);
    }
    Ok(propagate(p, u.grid(), &srcs, Side::Minus, &[(0, 0)]).remove(0))
}
