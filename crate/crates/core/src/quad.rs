//! Cached Gauss rules built on `gauss-quad`.

use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::jacobi::GaussJacobi;
use gauss_quad::laguerre::GaussLaguerre;
use gauss_quad::legendre::GaussLegendre;

/// Node/weight pairs.
pub type Rule = Arc<Vec<(f64, f64)>>;

type Key = (u8, usize, u64, u64);

fn cache() -> &'static Mutex<HashMap<Key, Rule>> {
    static CACHE: OnceLock<Mutex<HashMap<Key, Rule>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn cached(key: Key, build: impl FnOnce() -> Vec<(f64, f64)>) -> Rule {
    if let Some(r) = cache().lock().unwrap().get(&key) {
        return r.clone();
    }
    let rule = Arc::new(build());
    cache().lock().unwrap().entry(key).or_insert(rule).clone()
}

fn nz(n: usize) -> NonZeroUsize {
    NonZeroUsize::new(n.max(1)).unwrap()
}

/// Generalised Gauss-Laguerre rule for `∫₀^∞ t^α e^{-t} f(t) dt`.
pub fn laguerre(n: usize, alpha: f64) -> Rule {
    cached((0, n, alpha.to_bits(), 0), || {
        let q = GaussLaguerre::new(nz(n), alpha.try_into().expect("alpha > -1"));
        q.iter().map(|(x, w)| (*x, *w)).collect()
    })
}

/// Gauss-Legendre rule on `[-1, 1]`.
pub fn legendre(n: usize) -> Rule {
    cached((1, n, 0, 0), || {
        let q = GaussLegendre::new(nz(n));
        let mut v: Vec<(f64, f64)> = q.iter().map(|(x, w)| (*x, *w)).collect();
        v.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        v
    })
}

/// Gauss-Jacobi rule for `∫_{-1}^{1} (1-x)^α (1+x)^β f(x) dx`.
pub fn jacobi(n: usize, alpha: f64, beta: f64) -> Rule {
    cached((2, n, alpha.to_bits(), beta.to_bits()), || {
        let q = GaussJacobi::new(
            nz(n),
            alpha.try_into().expect("alpha > -1"),
            beta.try_into().expect("beta > -1"),
        );
        q.iter().map(|(x, w)| (*x, *w)).collect()
    })
}

/// Gauss-Legendre nodes mapped to `[a, b]`.
pub fn gl_interval(a: f64, b: f64, n: usize) -> Vec<(f64, f64)> {
    let h = 0.5 * (b - a);
    let c = 0.5 * (b + a);
    legendre(n).iter().map(|&(x, w)| (c + h * x, h * w)).collect()
}

/// Composite Gauss-Legendre rule over consecutive break points.
pub fn gl_panels(breaks: &[f64], n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n * breaks.len());
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            out.extend(gl_interval(w[0], w[1], n));
        }
    }
    out
}

/// Break points on `[0, b]` graded geometrically towards 0 (ratio 2, `levels` levels),
/// then uniform panels no wider than `max_width`.
pub fn graded_breaks(b: f64, levels: usize, max_width: f64, inner: f64) -> Vec<f64> {
    let mut br = vec![0.0];
    let first = inner.min(b);
    for k in (1..=levels).rev() {
        br.push(first * 0.5f64.powi(k as i32));
    }
    br.push(first);
    let rest = b - first;
    if rest > 0.0 {
        let m = (rest / max_width).ceil().max(1.0) as usize;
        for j in 1..=m {
            br.push(first + rest * j as f64 / m as f64);
        }
    }
    br
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials() {
        let s: f64 = gl_interval(0.0, 2.0, 8).iter().map(|(x, w)| w * x.powi(7)).sum();
        assert!((s - 32.0).abs() < 1e-12);
    }

    #[test]
    fn laguerre_half_weight_sums_to_sqrt_pi() {
        for n in [64, 128] {
            let s: f64 = laguerre(n, -0.5).iter().map(|(_, w)| w).sum();
            assert!((s - std::f64::consts::PI.sqrt()).abs() < 1e-13);
        }
    }

    #[test]
    fn jacobi_handles_endpoint_power() {
        // ∫_{-1}^{1} (1+x)^{-1/2} dx = 2√2
        let s: f64 = jacobi(20, 0.0, -0.5).iter().map(|(_, w)| w).sum();
        assert!((s - 2.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn graded_breaks_are_increasing() {
        let b = graded_breaks(4.0, 10, 0.5, 1.0);
        assert!(b.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(*b.last().unwrap(), 4.0);
    }
}
