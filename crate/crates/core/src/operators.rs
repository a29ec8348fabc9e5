//! Potentials, dense operators on the `v`-support, spectral projections and
//! the singular operators `K̃₁`, `K̃₂`, `K`.
//!
//! Matrices act on "folded" coordinates `f̂ᵢ = h fᵢ`, so an integral operator
//! with kernel `k(x, y)` becomes `h² k(xᵢ, xⱼ)`, multiplication operators stay
//! diagonal and composition is the plain matrix product.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::path::PathBuf;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{self, Field, Interp, Multiplier, PlaneGrid, TestFunction};
use crate::linalg::{self, CMat};
use crate::quad;
use crate::specfun;

const I: C64 = C64 { re: 0.0, im: 1.0 };

// ---------------------------------------------------------------------------
// potentials

/// Potential family or tabulated source.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum PotentialSpec {
    /// `-β · ½ erfc((|x| - r₀)/w)`, a mollified disc indicator.
    Well { beta: f64, r0: f64, width: f64 },
    /// `-β exp(-|x - c|²/σ²)`.
    Gaussian { beta: f64, sigma: f64, center: (f64, f64) },
    /// `-β exp(-(x₁ - c₁)²/s₁² - (x₂ - c₂)²/s₂²)`.
    Anisotropic { beta: f64, sx: f64, sy: f64, center: (f64, f64) },
    /// CSV file with rows `x1,x2,V` on the target grid.
    Csv(PathBuf),
}

/// Default mollification width of the well family.
pub const WELL_WIDTH: f64 = 0.1;

/// Relative threshold defining the support `{|V| > v_tol · max|V|}`.
pub const SUPPORT_TOL: f64 = 1e-10;

impl PotentialSpec {
    pub fn well(beta: f64, r0: f64) -> Self {
        Self::Well { beta, r0, width: WELL_WIDTH }
    }

    pub fn gaussian(beta: f64, sigma: f64) -> Self {
        Self::Gaussian { beta, sigma, center: (0.0, 0.0) }
    }

    /// Pointwise value for analytic families.
    pub fn eval(&self, x: f64, y: f64) -> Option<f64> {
        match *self {
            Self::Well { beta, r0, width } => Some(-beta * 0.5 * libm::erfc((x.hypot(y) - r0) / width)),
            Self::Gaussian { beta, sigma, center } => {
                let r2 = (x - center.0).powi(2) + (y - center.1).powi(2);
                Some(-beta * (-r2 / (sigma * sigma)).exp())
            }
            Self::Anisotropic { beta, sx, sy, center } => {
                let e = ((x - center.0) / sx).powi(2) + ((y - center.1) / sy).powi(2);
                Some(-beta * (-e).exp())
            }
            Self::Csv(_) => None,
        }
    }

    /// Same family with the coupling replaced.
    pub fn with_beta(&self, b: f64) -> Self {
        let mut s = self.clone();
        match &mut s {
            Self::Well { beta, .. } | Self::Gaussian { beta, .. } | Self::Anisotropic { beta, .. } => *beta = b,
            Self::Csv(_) => {}
        }
        s
    }
}

impl FromStr for PotentialSpec {
    type Err = Error;

    /// `well:beta=1,r0=1[,w=0.1]`, `gaussian:beta=1,sigma=1[,x0=..,y0=..]`,
    /// `aniso:beta=1,sx=1,sy=2[,x0,y0]`, `csv:PATH`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        if kind == "csv" || kind == "file" {
            return Ok(Self::Csv(PathBuf::from(rest)));
        }
        let mut kv = HashMap::new();
        for part in rest.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Invalid(format!("expected key=value in potential spec, got '{part}'")))?;
            let v: f64 = v.trim().parse().map_err(|_| Error::Invalid(format!("bad number '{v}'")))?;
            kv.insert(k.trim().to_string(), v);
        }
        let get = |k: &str, d: Option<f64>| -> Result<f64> {
            kv.get(k).copied().or(d).ok_or_else(|| Error::Invalid(format!("potential spec '{s}' is missing '{k}'")))
        };
        let center = (get("x0", Some(0.0))?, get("y0", Some(0.0))?);
        match kind {
            "well" => Ok(Self::Well { beta: get("beta", None)?, r0: get("r0", Some(1.0))?, width: get("w", Some(WELL_WIDTH))? }),
            "gaussian" => Ok(Self::Gaussian { beta: get("beta", None)?, sigma: get("sigma", Some(1.0))?, center }),
            "aniso" | "anisotropic" => Ok(Self::Anisotropic {
                beta: get("beta", None)?,
                sx: get("sx", Some(1.0))?,
                sy: get("sy", Some(1.0))?,
                center,
            }),
            other => Err(Error::Invalid(format!("unknown potential family '{other}'"))),
        }
    }
}

/// Weighted norms of `V` on the truncated domain.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PotentialNorms {
    pub l1: f64,
    /// `‖⟨x⟩³ V‖₁`.
    pub weighted_3: f64,
    /// `‖⟨x⟩^{10.1} V‖₁`.
    pub weighted_10: f64,
    /// `sup_x (∫_{|x-y|<1} |V|²)^{1/2}`.
    pub lq_loc_u: f64,
}

/// Whether the decay condition survives truncation.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DecayReport {
    /// Share of `‖⟨x⟩^{10.1} V‖₁` carried by the outer shell `|x| > 0.8 R`.
    pub shell_fraction: f64,
    pub holds: bool,
}

/// Sampled potential and its support data.
#[derive(Clone, Debug)]
pub struct PotentialData {
    pub spec: Option<PotentialSpec>,
    pub grid: PlaneGrid,
    /// `V` on the full grid.
    pub values: Vec<f64>,
    /// Flat grid indices of the support.
    pub support: Vec<usize>,
    pub points: Vec<(f64, f64)>,
    /// Integer lattice coordinates of the support points.
    pub lattice: Vec<(i64, i64)>,
    /// `V` on the support.
    pub v_pot: Vec<f64>,
    /// `v = |V|^{1/2}` on the support.
    pub v: Vec<f64>,
    /// `U = sign V` on the support.
    pub u_sign: Vec<f64>,
    pub norms: PotentialNorms,
    pub decay: DecayReport,
}

/// Default operator grid: `N_op = 40` over `[-8, 8)²`.
pub fn operator_grid() -> PlaneGrid {
    PlaneGrid::new(40, 8.0).expect("valid default grid")
}

/// Sample `spec` on `grid`.
pub fn load_potential(spec: &PotentialSpec, grid: PlaneGrid) -> Result<PotentialData> {
    let values = match spec {
        PotentialSpec::Csv(path) => tabulated_values(path, grid)?,
        _ => (0..grid.len())
            .map(|idx| {
                let (x, y) = grid.point(idx);
                spec.eval(x, y).unwrap_or(0.0)
            })
            .collect(),
    };
    let mut p = PotentialData::from_values(grid, values)?;
    p.spec = Some(spec.clone());
    Ok(p)
}

fn tabulated_values(path: &std::path::Path, grid: PlaneGrid) -> Result<Vec<f64>> {
    let rows = crate::io::read_potential_csv(path)?;
    if rows.len() != grid.len() {
        return Err(Error::GridMismatch(format!("{} rows for a {}x{} grid", rows.len(), grid.n(), grid.n())));
    }
    let h = grid.h();
    let mut values = vec![f64::NAN; grid.len()];
    for (x, y, v) in rows {
        let i = ((x + grid.half_width()) / h).round();
        let j = ((y + grid.half_width()) / h).round();
        let ok = i >= 0.0
            && j >= 0.0
            && (i as usize) < grid.n()
            && (j as usize) < grid.n()
            && (grid.coord(i as usize) - x).abs() < 1e-6 * h
            && (grid.coord(j as usize) - y).abs() < 1e-6 * h;
        if !ok {
            return Err(Error::GridMismatch(format!("point ({x}, {y}) is not a grid node")));
        }
        values[grid.index(i as usize, j as usize)] = v;
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::GridMismatch("tabulated potential does not cover the grid".into()));
    }
    Ok(values)
}

impl PotentialData {
    pub fn from_values(grid: PlaneGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!("{} values for {} nodes", values.len(), grid.len())));
        }
        let vmax = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !(vmax > 0.0) {
            return Err(Error::EmptySupport);
        }
        let support: Vec<usize> = (0..grid.len()).filter(|&k| values[k].abs() > SUPPORT_TOL * vmax).collect();
        let n = grid.n();
        let c = (n / 2) as i64;
        let points = support.iter().map(|&k| grid.point(k)).collect();
        let lattice = support.iter().map(|&k| ((k / n) as i64 - c, (k % n) as i64 - c)).collect();
        let v_pot: Vec<f64> = support.iter().map(|&k| values[k]).collect();
        let v = v_pot.iter().map(|x| x.abs().sqrt()).collect();
        let u_sign = v_pot.iter().map(|&x| if x < 0.0 { -1.0 } else { 1.0 }).collect();
        let (norms, decay) = norms_of(&grid, &values);
        Ok(Self { spec: None, grid, values, support, points, lattice, v_pot, v, u_sign, norms, decay })
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// `v h`, the folded form of `v`.
    pub fn v_folded(&self) -> Vec<f64> {
        let h = self.grid.h();
        self.v.iter().map(|x| x * h).collect()
    }

    /// Largest lattice offset between two support points along an axis.
    pub fn max_offset(&self) -> usize {
        let (mut lo, mut hi) = ((i64::MAX, i64::MAX), (i64::MIN, i64::MIN));
        for &(a, b) in &self.lattice {
            lo = (lo.0.min(a), lo.1.min(b));
            hi = (hi.0.max(a), hi.1.max(b));
        }
        ((hi.0 - lo.0).max(hi.1 - lo.1)).max(0) as usize
    }

    /// `1 / (v h)` guarded against underflow.
    pub fn unfold(&self) -> Vec<f64> {
        self.v_folded().iter().map(|x| 1.0 / x).collect()
    }
}

fn norms_of(grid: &PlaneGrid, values: &[f64]) -> (PotentialNorms, DecayReport) {
    let w = grid.cell_weight();
    let mut l1 = 0.0;
    let mut w3 = 0.0;
    let mut w10 = 0.0;
    let mut shell = 0.0;
    for (k, &val) in values.iter().enumerate() {
        let (x, y) = grid.point(k);
        let r2 = x * x + y * y;
        let a = val.abs() * w;
        l1 += a;
        w3 += a * (1.0 + r2).powf(1.5);
        let t = a * (1.0 + r2).powf(10.1 / 2.0);
        w10 += t;
        if r2.sqrt() > 0.8 * grid.half_width() {
            shell += t;
        }
    }
    // local L² norm over unit discs centred at grid nodes near the support
    let vmax = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let n = grid.n() as i64;
    let rad = (1.0 / grid.h()).floor() as i64;
    let centers: Vec<usize> = (0..values.len()).filter(|&k| values[k].abs() > 1e-3 * vmax).collect();
    let lq = centers
        .par_iter()
        .map(|&k| {
            let (i0, j0) = ((k as i64) / n, (k as i64) % n);
            let mut s = 0.0;
            for di in -rad..=rad {
                for dj in -rad..=rad {
                    let (i, j) = (i0 + di, j0 + dj);
                    if i < 0 || j < 0 || i >= n || j >= n {
                        continue;
                    }
                    if ((di * di + dj * dj) as f64) * grid.cell_weight() <= 1.0 {
                        s += values[(i * n + j) as usize].powi(2) * w;
                    }
                }
            }
            s.sqrt()
        })
        .reduce(|| 0.0, f64::max);
    let shell_fraction = if w10 > 0.0 { shell / w10 } else { 0.0 };
    (
        PotentialNorms { l1, weighted_3: w3, weighted_10: w10, lq_loc_u: lq },
        DecayReport { shell_fraction, holds: shell_fraction < 1e-6 },
    )
}

// ---------------------------------------------------------------------------
// dense operators

/// Dense operator on the `v`-support in folded coordinates.
#[derive(Clone, Debug)]
pub struct DiscreteOperator {
    pub matrix: CMat,
    pub label: String,
    pub lambda: Option<f64>,
}

impl DiscreteOperator {
    pub fn new(matrix: CMat, label: impl Into<String>, lambda: Option<f64>) -> Self {
        Self { matrix, label: label.into(), lambda }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn check(&self, o: &DiscreteOperator) -> Result<()> {
        if self.matrix.shape() != o.matrix.shape() {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.matrix.shape(), o.matrix.shape())));
        }
        Ok(())
    }

    pub fn compose(&self, o: &DiscreteOperator) -> Result<DiscreteOperator> {
        self.check(o)?;
        Ok(Self::new(&self.matrix * &o.matrix, format!("{}*{}", self.label, o.label), self.lambda.or(o.lambda)))
    }

    pub fn add(&self, o: &DiscreteOperator) -> Result<DiscreteOperator> {
        self.check(o)?;
        Ok(Self::new(&self.matrix + &o.matrix, format!("{}+{}", self.label, o.label), self.lambda.or(o.lambda)))
    }

    pub fn adjoint(&self) -> DiscreteOperator {
        Self::new(self.matrix.adjoint(), format!("{}^*", self.label), self.lambda)
    }

    /// Hilbert-Schmidt norm, i.e. the Frobenius norm of the folded matrix.
    pub fn hs_norm(&self) -> f64 {
        linalg::frob(&self.matrix)
    }

    pub fn sigma_min(&self) -> f64 {
        linalg::sigma_extremes(&self.matrix).0
    }
}

/// Values of a radial kernel on all lattice offsets `0 ≤ dj ≤ di ≤ maxd`.
#[derive(Clone, Debug)]
pub struct OffsetTable {
    maxd: usize,
    vals: Vec<C64>,
}

impl OffsetTable {
    pub fn build(h: f64, maxd: usize, f: impl Fn(f64) -> C64 + Sync) -> Self {
        let m = maxd + 1;
        let pairs: Vec<(usize, usize)> = (0..m).flat_map(|a| (0..=a).map(move |b| (a, b))).collect();
        let computed: Vec<C64> = pairs.par_iter().map(|&(a, b)| f(h * ((a * a + b * b) as f64).sqrt())).collect();
        let mut vals = vec![C64::new(0.0, 0.0); m * m];
        for (&(a, b), v) in pairs.iter().zip(computed) {
            vals[a * m + b] = v;
            vals[b * m + a] = v;
        }
        Self { maxd, vals }
    }

    #[inline]
    pub fn get(&self, di: i64, dj: i64) -> C64 {
        let (a, b) = (di.unsigned_abs() as usize, dj.unsigned_abs() as usize);
        self.vals[a * (self.maxd + 1) + b]
    }
}

/// Matrix `(vh)ᵢ k(|xᵢ - xⱼ|) (vh)ⱼ`.
pub fn kernel_matrix(p: &PotentialData, k: impl Fn(f64) -> C64 + Sync) -> CMat {
    let table = OffsetTable::build(p.grid.h(), p.max_offset(), k);
    kernel_matrix_from_table(p, &table)
}

pub fn kernel_matrix_from_table(p: &PotentialData, t: &OffsetTable) -> CMat {
    let vv = p.v_folded();
    let n = p.len();
    CMat::from_fn(n, n, |i, j| {
        let (a, b) = (p.lattice[i], p.lattice[j]);
        t.get(a.0 - b.0, a.1 - b.1) * (vv[i] * vv[j])
    })
}

/// `M_v R₀⁺(λ⁴) M_v`.
pub fn sandwiched_resolvent(lambda: f64, p: &PotentialData) -> Result<DiscreteOperator> {
    if !(lambda > 0.0) {
        return Err(Error::Invalid(format!("lambda must be positive, got {lambda}")));
    }
    let l2 = lambda * lambda;
    let m = kernel_matrix(p, |r| specfun::lambda2_resolvent(lambda, r) / l2);
    Ok(DiscreteOperator::new(m, "M_v R0 M_v", Some(lambda)))
}

/// Diagonal `M_U`.
pub fn m_u(p: &PotentialData) -> CMat {
    CMat::from_diagonal(&linalg::CVec::from_iterator(p.len(), p.u_sign.iter().map(|&u| C64::new(u, 0.0))))
}

/// Default singularity threshold for `σ_min(M⁺(λ))`.
pub const INV_TOL: f64 = 1e-8;

/// `M⁺(λ) = M_U + M_v R₀⁺(λ⁴) M_v`, rejected when `σ_min < inv_tol`.
pub fn birman_schwinger_with_tol(lambda: f64, p: &PotentialData, inv_tol: f64) -> Result<DiscreteOperator> {
    let s = sandwiched_resolvent(lambda, p)?;
    let m = m_u(p) + s.matrix;
    let (lo, _) = linalg::sigma_extremes(&m);
    if lo < inv_tol {
        return Err(Error::SingularAtLambda { lambda, sigma_min: lo });
    }
    Ok(DiscreteOperator::new(m, "M+", Some(lambda)))
}

pub fn birman_schwinger(lambda: f64, p: &PotentialData) -> Result<DiscreteOperator> {
    birman_schwinger_with_tol(lambda, p, INV_TOL)
}

// ---------------------------------------------------------------------------
// spectral projection

/// `Π(λ)u` sampled at points.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralProjectionSample {
    pub lambda: f64,
    pub k: usize,
    pub points: Vec<(f64, f64)>,
    pub values: Vec<C64>,
}

impl SpectralProjectionSample {
    /// `Π₂(λ)u = λ² Π(λ)u`.
    pub fn pi2(&self) -> Vec<C64> {
        self.values.iter().map(|v| v * (self.lambda * self.lambda)).collect()
    }
}

/// `(2πλ²)⁻¹ ∫ e^{iλx·ω} û(λω) dω` from circle samples `û(λω_k)`.
pub fn project_from_circle(lambda: f64, uhat: &[C64], points: &[(f64, f64)]) -> Vec<C64> {
    let k = uhat.len();
    let dirs: Vec<(f64, f64)> = (0..k)
        .map(|m| {
            let t = 2.0 * PI * m as f64 / k as f64;
            (t.cos(), t.sin())
        })
        .collect();
    let scale = 1.0 / (lambda * lambda * k as f64);
    points
        .par_iter()
        .map(|&(x, y)| {
            let mut s = C64::new(0.0, 0.0);
            for (d, uh) in dirs.iter().zip(uhat) {
                s += C64::from_polar(1.0, lambda * (x * d.0 + y * d.1)) * uh;
            }
            s * scale
        })
        .collect()
}

/// Default angular node count on the circle `|ξ| = λ`.
pub const CIRCLE_NODES: usize = 256;

pub fn spectral_projection(
    lambda: f64,
    u: &TestFunction,
    points: &[(f64, f64)],
    k: usize,
) -> Result<SpectralProjectionSample> {
    let uhat = fourier::fourier_on_circle(u, lambda, k)?;
    Ok(SpectralProjectionSample { lambda, k, points: points.to_vec(), values: project_from_circle(lambda, &uhat, points) })
}

// ---------------------------------------------------------------------------
// K̃₁, K̃₂, K

/// Circle means `Mu(kδ)`, `δ = h/2`, vanishing beyond the half-width.
#[derive(Clone, Debug)]
pub struct RadialProfile {
    pub delta: f64,
    pub values: Vec<C64>,
}

impl RadialProfile {
    pub fn of(u: &Field) -> Result<Self> {
        let g = u.grid;
        let delta = 0.5 * g.h();
        let kmax = (g.half_width() / delta).floor() as usize;
        let nyq = g.nyquist();
        let values = (0..=kmax)
            .into_par_iter()
            .map(|k| {
                let rho = k as f64 * delta;
                let nodes = (64 + (2.0 * nyq * rho).ceil() as usize).min(8192);
                fourier::spherical_mean(u, rho, nodes, Interp::Lagrange8)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { delta, values })
    }

    /// Even extension, zero beyond the table, 6-point Lagrange in between.
    pub fn at(&self, rho: f64) -> C64 {
        let t = rho.abs() / self.delta;
        let last = self.values.len() as i64 - 1;
        if t > last as f64 {
            return C64::new(0.0, 0.0);
        }
        let base = t.floor() as i64 - 2;
        let mut s = C64::new(0.0, 0.0);
        for j in 0..6 {
            let xj = (base + j) as f64;
            let mut w = 1.0;
            for m in 0..6 {
                if m != j {
                    w *= (t - (base + m) as f64) / (xj - (base + m) as f64);
                }
            }
            let idx = (base + j).abs();
            if idx <= last {
                s += self.values[idx as usize] * w;
            }
        }
        s
    }

    fn rho_max(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.delta
    }

    /// `(4π)⁻¹ [PV∫₀^∞ Mu(ρ) 2ρ/(ρ²-σ²) dρ + iπ Mu(σ)]`.
    pub fn ktilde1_at(&self, sigma: f64) -> C64 {
        let eta = 0.5 * self.delta;
        let rmax = self.rho_max();
        let j0 = (-(sigma / eta) - 0.5).ceil() as i64;
        let j1 = ((rmax - sigma) / eta - 0.5).floor() as i64;
        let mut pv = C64::new(0.0, 0.0);
        for j in j0..=j1 {
            let off = (j as f64 + 0.5) * eta;
            let rho = sigma + off;
            if rho <= 0.0 {
                continue;
            }
            pv += self.at(rho) * (2.0 * rho / ((rho + sigma) * off));
        }
        (pv * eta + I * PI * self.at(sigma)) / (4.0 * PI)
    }

    /// `(4π)⁻¹ ∫₀^∞ Mu(ρ) 2ρ/(ρ²+σ²) dρ`.
    pub fn ktilde2_at(&self, sigma: f64) -> C64 {
        let eta = 0.5 * self.delta;
        let jmax = (self.rho_max() / eta).floor() as usize;
        let mut s = C64::new(0.0, 0.0);
        for j in 0..jmax {
            let rho = (j as f64 + 0.5) * eta;
            s += self.at(rho) * (2.0 * rho / (rho * rho + sigma * sigma));
        }
        s * eta / (4.0 * PI)
    }
}

/// Evaluate a radial function at every node, once per distinct `|x|`.
fn radial_field(grid: PlaneGrid, f: impl Fn(f64) -> C64 + Sync) -> Field {
    let n = grid.n() as i64;
    let c = n / 2;
    let h = grid.h();
    let mut keys: Vec<i64> = (0..=c).flat_map(|a| (0..=a).map(move |b| a * a + b * b)).collect();
    keys.sort_unstable();
    keys.dedup();
    let vals: HashMap<i64, C64> = keys.par_iter().map(|&k| (k, f(h * (k as f64).sqrt()))).collect();
    let data = (0..grid.len())
        .map(|idx| {
            let (i, j) = (idx as i64 / n - c, idx as i64 % n - c);
            vals[&(i * i + j * j)]
        })
        .collect();
    Field { grid, data }
}

/// `K̃₁u` for an arbitrary field (no annulus check).
pub fn ktilde1_field(u: &Field) -> Result<Field> {
    let prof = RadialProfile::of(u)?;
    Ok(radial_field(u.grid, |s| prof.ktilde1_at(s)))
}

/// `K̃₂u` for an arbitrary field (no annulus check).
pub fn ktilde2_field(u: &Field) -> Result<Field> {
    let prof = RadialProfile::of(u)?;
    Ok(radial_field(u.grid, |s| prof.ktilde2_at(s)))
}

/// `K̃₁u(x) = ∫ Γ(λ, x) Π₂(λ)u(0) λ dλ` via the Hilbert transform of circle means.
pub fn ktilde1(u: &TestFunction) -> Result<Field> {
    ktilde1_field(&u.field)
}

/// `K̃₂u(x) = (4π²)⁻¹ ∫ u(y)/(|x|²+|y|²) dy`.
pub fn ktilde2(u: &TestFunction) -> Result<Field> {
    ktilde2_field(&u.field)
}

/// Constant of the `K̃₂` kernel `c/(|x|²+|y|²)`.
pub const KTILDE2_CONSTANT: f64 = 1.0 / (4.0 * PI * PI);

/// `Π₂(λ)u(0) = (2π)⁻¹ ∫ û(λω) dω`.
pub fn pi2_at_origin(u: &TestFunction, lambda: f64, k: usize) -> Result<C64> {
    let s = fourier::fourier_on_circle(u, lambda, k)?;
    Ok(s.iter().sum::<C64>() / k as f64)
}

/// Which λ-integral to evaluate directly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DirectKernel {
    /// `Γ(λ, x)`, the integrand of `K̃₁`.
    Outgoing,
    /// `Γ(iλ, x)`, the integrand of `K̃₂`.
    Evanescent,
}

/// Direct Gauss-Legendre evaluation of `∫ Γ(·, x) Π₂(λ)u(0) λ dλ` over the annulus.
pub fn ktilde_direct(which: DirectKernel, u: &TestFunction, x: (f64, f64), nodes: usize) -> Result<C64> {
    let r = x.0.hypot(x.1);
    if r == 0.0 {
        return Err(Error::Invalid("direct K evaluation needs x != 0".into()));
    }
    let lo = u.lambda_min.max(1e-6);
    let mut s = C64::new(0.0, 0.0);
    for (l, w) in quad::gl_interval(lo, u.lambda_max, nodes) {
        let gam = match which {
            DirectKernel::Outgoing => specfun::green_kernel(C64::new(l, 0.0), r)?,
            DirectKernel::Evanescent => C64::new(specfun::green_rotated_real(l * r), 0.0),
        };
        s += gam * pi2_at_origin(u, l, CIRCLE_NODES)? * (l * w);
    }
    Ok(s)
}

/// Least-squares constant `c` with `K̃₂u ≈ c ∫u(y)/(|x|²+|y|²)dy`, fitted
/// against the direct λ-integral at the given points.
pub fn calibrate_ktilde2(u: &TestFunction, points: &[(f64, f64)]) -> Result<f64> {
    let prof = RadialProfile::of(&u.field)?;
    let (mut num, mut den) = (0.0, 0.0);
    for &x in points {
        let direct = ktilde_direct(DirectKernel::Evanescent, u, x, 96)?;
        // unit-constant kernel value
        let k = prof.ktilde2_at(x.0.hypot(x.1)) / KTILDE2_CONSTANT;
        num += (k.conj() * direct).re;
        den += k.norm_sqr();
    }
    if den == 0.0 {
        return Err(Error::Invalid("calibration function has vanishing K2 image".into()));
    }
    Ok(num / den)
}

/// `K μ(|D|) u` with `μ = λ² κ`: equals `½(K̃₁ - K̃₂) κ(|D|) u`.
pub fn k_operator(kappa: &Multiplier, u: &TestFunction) -> Result<Field> {
    kappa.require_gmu()?;
    let w = fourier::apply_multiplier(kappa, u)?;
    let prof = RadialProfile::of(&w.field)?;
    Ok(radial_field(u.grid(), |s| 0.5 * (prof.ktilde1_at(s) - prof.ktilde2_at(s))))
}

/// Direct quadrature of `∫ R(λ, x) μ(λ) Π(λ)u(0) λ³ dλ`.
pub fn k_operator_direct(mu: &Multiplier, u: &TestFunction, x: (f64, f64), nodes: usize) -> Result<C64> {
    let r = x.0.hypot(x.1);
    let lo = u.lambda_min.max(1e-6);
    let mut s = C64::new(0.0, 0.0);
    for (l, w) in quad::gl_interval(lo, u.lambda_max, nodes) {
        let pi = pi2_at_origin(u, l, CIRCLE_NODES)? / (l * l);
        s += specfun::biharm_resolvent_kernel(l, r)? * mu.eval(l) * pi * (l * l * l * w);
    }
    Ok(s)
}

/// Symbol of `R(|D|, y) χ_{≥a}(|D|)`.
pub fn resolvent_multiplier_symbol(y: (f64, f64), a: f64) -> Result<Multiplier> {
    let r = y.0.hypot(y.1);
    if r == 0.0 {
        return Err(Error::ZeroOffset);
    }
    Ok(Multiplier::new(format!("R(|D|,{r})chi_ge({a})"), move |l| {
        let c = fourier::chi_ge(l, a);
        if c == 0.0 {
            C64::new(0.0, 0.0)
        } else {
            specfun::lambda2_resolvent(l, r) / (l * l) * c
        }
    }))
}

pub fn resolvent_multiplier(y: (f64, f64), a: f64, u: &TestFunction) -> Result<Field> {
    let m = resolvent_multiplier_symbol(y, a)?;
    Ok(fourier::apply_multiplier(&m, u)?.field)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_parsing() {
        let s: PotentialSpec = "well:beta=1,r0=1".parse().unwrap();
        assert_eq!(s, PotentialSpec::well(1.0, 1.0));
        let g: PotentialSpec = "gaussian:beta=2,sigma=0.5,x0=1".parse().unwrap();
        assert!(matches!(g, PotentialSpec::Gaussian { center: (x, _), .. } if x == 1.0));
        assert!("blob:beta=1".parse::<PotentialSpec>().is_err());
        assert!("well:r0=1".parse::<PotentialSpec>().is_err());
    }

    #[test]
    fn zero_potential_is_rejected() {
        let r = load_potential(&PotentialSpec::well(0.0, 1.0), operator_grid());
        assert!(matches!(r, Err(Error::EmptySupport)));
    }

    #[test]
    fn offset_table_is_symmetric() {
        let t = OffsetTable::build(0.5, 4, |r| C64::new(r, 0.0));
        assert_eq!(t.get(3, -1), t.get(-1, 3));
        assert!((t.get(3, 4).re - 2.5).abs() < 1e-15);
    }

    #[test]
    fn sandwiched_resolvent_is_complex_symmetric() {
        let p = load_potential(&PotentialSpec::well(1.0, 1.0), operator_grid()).unwrap();
        let s = sandwiched_resolvent(1.3, &p).unwrap();
        assert!((&s.matrix - s.matrix.transpose()).norm() < 1e-12 * s.hs_norm());
    }

    fn ei(x: f64) -> f64 {
        let mut s = 0.5772156649015329 + x.ln();
        let mut t = 1.0;
        for k in 1..200 {
            t *= x / k as f64;
            s += t / k as f64;
        }
        s
    }

    #[test]
    fn hilbert_transform_of_gaussian_profile() {
        // Mu(ρ) = e^{-ρ²}: PV∫₀^∞ e^{-r}/(r-s) dr = -e^{-s} Ei(s)
        let delta = 0.02;
        let values = (0..=600).map(|k| C64::new((-(k as f64 * delta).powi(2)).exp(), 0.0)).collect();
        let prof = RadialProfile { delta, values };
        for s in [0.5f64, 1.0, 2.0] {
            let got = prof.ktilde1_at(s.sqrt()) * (4.0 * PI);
            let want = -(-s).exp() * ei(s);
            assert!((got.re - want).abs() < 1e-4, "s={s}: {} vs {want}", got.re);
            assert!((got.im - PI * (-s).exp()).abs() < 1e-10);
        }
    }
}
