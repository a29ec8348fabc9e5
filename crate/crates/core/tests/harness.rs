use std::f64::consts::PI;

use biscat_core::harness::*;
use biscat_core::{Complex64 as C64, Error, PlaneGrid};

#[test]
fn l_depends_only_on_the_radii() {
    let a = 0.5;
    let x = (1.3, -0.4);
    let y = (0.2, 2.1);
    let rot = |p: (f64, f64), t: f64| (p.0 * t.cos() - p.1 * t.sin(), p.0 * t.sin() + p.1 * t.cos());
    let base = eval_kernel_l(x, y, a).unwrap();
    for (t1, t2) in [(0.7, -2.0), (2.9, 1.1)] {
        let v = eval_kernel_l(rot(x, t1), rot(y, t2), a).unwrap();
        assert!((v - base).norm() <= 1e-8 * base.norm());
    }
}

#[test]
fn l_at_the_origin_is_rejected() {
    assert!(eval_kernel_l((0.0, 0.0), (1.0, 0.0), 0.5).is_err());
}

#[test]
fn naive_and_ibp_agree() {
    let ev = KernelLEvaluator::new(0.5);
    for (rx, ry) in [(1.0, 1.0), (0.3, 7.0), (12.0, 0.2), (40.0, 25.0)] {
        let a = ev.eval_naive(rx, ry).unwrap();
        let b = ev.eval_ibp(rx, ry).unwrap();
        assert!((a - b).abs() <= 1e-6 * a.abs(), "{rx} {ry}: {a} {b}");
    }
}

#[test]
fn l_at_small_arguments_approaches_the_plain_integral() {
    // J₀ ≈ 1 for tiny |x|, |y|
    let ev = KernelLEvaluator::new(0.5);
    let near = ev.eval_naive(1e-6, 1e-6).unwrap();
    let at_zero = ev.eval_naive(0.0, 0.0).unwrap();
    assert!((near - at_zero).abs() < 1e-9);
    assert!(at_zero > 0.0);
}

#[test]
fn domain_tags() {
    let ev = KernelLEvaluator::new(0.5);
    assert_eq!(ev.radius, 20.0);
    assert_eq!(ev.domain(1.0, 1.0), LDomain::D1);
    assert_eq!(ev.domain(1.0, 30.0), LDomain::D2);
    assert_eq!(ev.domain(30.0, 1.0), LDomain::D3);
    assert_eq!(ev.domain(30.0, 30.0), LDomain::D4);
}

#[test]
fn d3_normalisation_is_bounded() {
    let ev = KernelLEvaluator::new(0.5);
    let v = ev.eval_ibp(50.0, 1.0).unwrap();
    let normalised = v.abs() * 2500.0 / biscat_core::jbracket(50f64.ln());
    assert!(normalised < 1.0, "{normalised}");
}

#[test]
fn small_l_bound_sweep_saturates() {
    let r = verify_l_bound(0.5, &[25.0, 50.0], 150, 10, 1).unwrap();
    assert_eq!(r.samples, 300);
    assert_eq!(r.sups.len(), 2);
    assert!(r.sups[1] >= r.sups[0]);
    assert!(r.dual_path_max_rel < 1e-6);
}

#[test]
fn f2_is_pi_squared() {
    let f2 = majorant_integral(&|_| 1.0, 2.0).unwrap();
    assert!((f2 - PI * PI).abs() < 1e-8);
}

#[test]
fn majorant_divergence() {
    assert!(matches!(majorant_integral(&|_| 1.0, 1.0), Err(Error::MajorantDiverges(_))));
    assert!(matches!(majorant_integral(&|_| 1.0, 0.5), Err(Error::MajorantDiverges(_))));
    assert!(matches!(majorant_integral(&|r| r * r, 2.0), Err(Error::MajorantDiverges(_))));
}

#[test]
fn f_p_closed_form() {
    // 2π ∫ r^{1-2/p}/(1+r²) dr = π² / sin(π(1 - 1/p))
    for p in [1.5, 3.0, 4.0] {
        let want = PI * PI / (PI * (1.0 - 1.0 / p)).sin();
        let got = majorant_integral(&|_| 1.0, p).unwrap();
        assert!((got - want).abs() < 1e-9 * want, "{p}: {got} {want}");
    }
}

#[test]
fn log_majorant_is_finite_and_probes_pass() {
    let f = |r: f64| biscat_core::jbracket(r.ln());
    let kernel = |x: (f64, f64), y: (f64, f64)| {
        let (a, b) = (x.0.hypot(x.1), y.0.hypot(y.1));
        biscat_core::jbracket((a / b).ln())
    };
    let probes = homogeneous_probes(6, 24, 6.0, 2);
    let r = homogeneous_kernel_bound(&kernel, &f, 2.0, &probes, 24, 6.0).unwrap();
    assert!(r.f_p.is_finite() && r.f_p > PI * PI);
    assert!(r.pass, "{:?}", r.ratios);
}

#[test]
fn fourier_decay_cases() {
    let zero = fourier_decay_check(&|_| C64::new(0.0, 0.0), 0.5, 0.25).unwrap();
    assert!(zero.values.iter().all(|&v| v == 0.0));
    let lin = fourier_decay_check(&|z| z, 0.5, 0.25).unwrap();
    let sq = fourier_decay_check(&|z| z * z, 0.5, 0.25).unwrap();
    assert!(lin.pass);
    assert!(sq.exponent <= lin.exponent, "{} {}", sq.exponent, lin.exponent);
}

#[test]
fn probe_family_shape() {
    let g = PlaneGrid::new(32, 8.0).unwrap();
    let a = probe_family(g, 4).unwrap();
    let b = probe_family(g, 4).unwrap();
    assert_eq!(a.len(), PROBE_COUNT);
    for kind in [ProbeKind::AnnularGaussian, ProbeKind::Bump, ProbeKind::Noise] {
        assert!(a.iter().any(|p| p.kind == kind));
    }
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.u.field.data, y.u.field.data);
    }
}

#[test]
fn identity_scan_is_flat() {
    let r = lp_scan("identity", &[4.0 / 3.0, 2.0, 4.0], &[32, 64], 0).unwrap();
    assert_eq!(r.table.len(), 3);
    for row in &r.table {
        assert_eq!(row.len(), 2);
        assert!(row.iter().all(|&v| (v - 1.0).abs() < 1e-12));
    }
    assert!(r.verdicts.iter().all(|v| v.stable));
}

#[test]
fn scans_are_reproducible() {
    let a = lp_scan("peral:b=0.5", &[4.0], &[32, 64], 9).unwrap();
    let b = lp_scan("peral:b=0.5", &[4.0], &[32, 64], 9).unwrap();
    assert_eq!(a.table, b.table);
}

#[test]
fn ktilde1_is_stable_at_p2() {
    let r = lp_scan("ktilde1", &[2.0], &[32, 64], 1).unwrap();
    assert!(r.verdicts[0].stable, "{:?}", r.table);
}

#[test]
fn unknown_operator() {
    assert!(matches!(lp_scan("nope", &[2.0], &[32], 0), Err(Error::UnknownOperator(_))));
    assert!(matches!(lookup_operator("peral:b=x"), Err(Error::UnknownOperator(_))));
}

#[test]
fn bad_exponents() {
    assert!(lp_scan("identity", &[1.0], &[32], 0).is_err());
    assert_eq!(parse_p_list("4/3, 2,4").unwrap(), vec![4.0 / 3.0, 2.0, 4.0]);
    assert!(parse_p_list("a/b").is_err());
}

#[test]
fn peral_rejects_coarse_grids() {
    assert!(matches!(peral_scan(0.5, &[2.0], &[4], 0), Err(Error::AliasedSpectrum { .. })));
}

#[test]
fn suites_by_name() {
    assert!(verify_suite("bogus").is_err());
    let a = verify_suite("appendix").unwrap();
    assert!(a.iter().all(|c| c.pass));
}
