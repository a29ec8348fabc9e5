use biscat_core::linalg;
use biscat_core::operators::{load_potential, operator_grid, PotentialData};
use biscat_core::threshold::*;
use biscat_core::{Complex64 as C64, Error, PotentialSpec};

fn well(beta: f64) -> PotentialData {
    load_potential(&PotentialSpec::well(beta, 1.0), operator_grid()).unwrap()
}

fn critical_beta() -> f64 {
    let (mut lo, mut hi) = (60.0, 94.0);
    let f = |b: f64| signed_eigenvalue(&well(b)).unwrap();
    assert!(f(lo) * f(hi) < 0.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if f(mid) * f(lo) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn weak_well_is_regular() {
    let p = well(1.0);
    let proj = build_projections(&p).unwrap();
    let r = classify_zero_energy(&p, &proj, CLASSIFY_TOL).unwrap();
    assert_eq!(r.verdict, Verdict::Regular);
    assert!(r.resonance.is_none());
    assert!(r.sigma_min > 0.5);
}

#[test]
fn projections_are_orthogonal_and_complete() {
    let p = well(1.0);
    let s = build_projections(&p).unwrap();
    let n = s.q.nrows();
    let id = linalg::identity(n);
    assert!((&s.p + &s.q - &id).norm() < 1e-12);
    assert!((&s.q * &s.q - &s.q).norm() < 1e-12);
    let s0 = s.s0();
    assert!((&s0 * &s0 - &s0).norm() < 1e-12);
    assert!((&s0 * &s.p).norm() < 1e-12);
    assert_eq!(s.s0perp_basis.ncols(), 2);
    assert_eq!(s.s0_basis.ncols(), n - 3);
}

#[test]
fn resonance_at_critical_coupling() {
    let bc = critical_beta();
    assert!((bc - 93.8).abs() < 1.0, "beta_c = {bc}");
    let p = well(bc);
    let proj = build_projections(&p).unwrap();
    let r = classify_zero_energy(&p, &proj, CLASSIFY_TOL).unwrap();
    assert_eq!(r.verdict, Verdict::Singular);
    let res = r.resonance.unwrap();
    assert!(res.moment_residual < 1e-6, "{}", res.moment_residual);
    assert!(res.roundtrip_cosine > 1.0 - 1e-6, "{}", res.roundtrip_cosine);
    assert!(res.growth.is_finite());
    assert!(res.phi.is_some());
}

#[test]
fn borderline_band_is_an_error() {
    let bc = critical_beta();
    // ratio lands inside [tol/10, 10 tol] somewhere on the approach to β_c
    let mut hit = false;
    for k in 1..40 {
        let p = well(bc * (1.0 + 2f64.powi(-k)));
        let proj = build_projections(&p).unwrap();
        if let Err(Error::Borderline { ratio }) = classify_zero_energy(&p, &proj, CLASSIFY_TOL) {
            assert!(ratio >= CLASSIFY_TOL / 10.0 && ratio <= CLASSIFY_TOL * 10.0);
            hit = true;
            break;
        }
    }
    assert!(hit);
}

#[test]
fn expansion_rejects_bad_lambda_and_singular_potentials() {
    let ctx = ThresholdContext::new(&well(1.0)).unwrap();
    assert!(matches!(assemble_expansion(0.2, &ctx, THRESHOLD_WINDOW), Err(Error::LambdaOutOfRange { .. })));
    assert!(matches!(assemble_expansion(0.0, &ctx, THRESHOLD_WINDOW), Err(Error::LambdaOutOfRange { .. })));
    let sing = ThresholdContext::new(&well(critical_beta())).unwrap();
    assert!(matches!(assemble_expansion(0.01, &sing, THRESHOLD_WINDOW), Err(Error::SingularPotential)));
}

#[test]
fn m_tilde_splits_into_p_a2_n4() {
    let ctx = ThresholdContext::new(&well(1.0)).unwrap();
    let e = assemble_expansion(0.02, &ctx, THRESHOLD_WINDOW).unwrap();
    let back = &ctx.proj.p + &e.a2 + &e.n4;
    assert!((back - &e.mtilde).norm() < 1e-12 * e.mtilde.norm());
    // the truncated N₄ is a good approximation
    assert!((&e.n4 - &e.n4_truncated).norm() < 1e-3 * e.n4.norm());
}

#[test]
fn d1_structure() {
    let ctx = ThresholdContext::new(&well(1.0)).unwrap();
    let r = d1_structure_check(&[0.04, 0.02, 0.01], &ctx).unwrap();
    assert!(r.identity_defects.iter().all(|&d| d < 1e-10), "{:?}", r.identity_defects);
    assert!(r.deviation_slope > 1.7);
    assert!(r.x_ratio < 1.5);
}

#[test]
fn scaled_and_direct_qv_agree() {
    let p = well(1.0);
    let ctx = ThresholdContext::new(&p).unwrap();
    for l in [0.02, 0.05] {
        let a = qv_lambda(l, &p).unwrap();
        let b = qv_lambda_scaled(l, &ctx).unwrap();
        assert!((&a.matrix - &b.matrix).norm() < 1e-10 * a.matrix.norm());
    }
}

#[test]
fn f_and_h_definitions() {
    let cv = C64::new(0.0, -0.3);
    let u = [1.0, -1.0, 1.0];
    let (f, h) = f_and_h(0.05, cv, &u);
    for (k, &s) in u.iter().enumerate() {
        let one = f[k] * (C64::new(1.0, 0.0) + cv * s * 0.0025);
        assert!((one - 1.0).norm() < 1e-15);
        let ut = cv * s;
        assert!((h[k] - (ut - cv * cv * 0.0025 * f[k] + ut * ut * ut * 0.05f64.powi(4))).norm() < 1e-15);
    }
}

#[test]
fn sweep_reports_requested_slopes() {
    let ctx = ThresholdContext::new(&well(1.0)).unwrap();
    let d = expansion_sweep(&ctx, &[0.04, 0.02, 0.01]).unwrap();
    assert_eq!(d.sweeps.len(), 3);
    for k in ["n4", "b_remainder", "d1_deviation"] {
        assert!(d.slopes.contains_key(k));
    }
    let json = serde_json::to_string(&d).unwrap();
    assert!(json.contains("\"regular\""));
}
