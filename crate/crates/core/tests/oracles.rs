use std::f64::consts::PI;

use num_complex::Complex64;
use xent_core::analytics::{quadratic_psi_at_level, QuadraticOptions};
use xent_core::biphoton::hankel::{hankel_trapezoid, Qdht};
use xent_core::phasematch::{collinear_mismatch, delta_pw};
use xent_core::{degeneracy_angle, quadratic_params, testdata, CrystalSpec};

/// Composite Simpson for ∫₁^U u^{−1/2} e^{iau} e^{iΔ/u} du plus the leading
/// endpoint term of the tail, −f(U) e^{iaU}/(ia).
fn brute_u_integral(a: f64, delta0: f64, upper: f64, panels: usize) -> Complex64 {
    let f = |u: f64| Complex64::from_polar(u.powf(-0.5), a * u + delta0 / u);
    let h = (upper - 1.0) / panels as f64;
    let mut acc = f(1.0) + f(upper);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += f(1.0 + i as f64 * h) * w;
    }
    let body = acc * (h / 3.0);
    let tail = -Complex64::from_polar(upper.powf(-0.5), delta0 / upper) * Complex64::from_polar(1.0, a * upper)
        / Complex64::new(0.0, a);
    body + tail
}

#[test]
fn quadratic_field_matches_brute_force_simpson() {
    let params = quadratic_params(&testdata::bbo(), 1e-3).unwrap();
    let pre = params.gain * params.q0 * params.q0 * params.omega0 / (8.0 * PI.powf(1.5))
        * Complex64::from_polar(1.0, -PI / 4.0);
    let opts = QuadraticOptions::default();
    for p in [params, params.with_delta0(0.0), params.with_delta0(1.5)] {
        for h in [40.0, -40.0, 12.0, -200.0] {
            let expect = pre * brute_u_integral(h / 4.0, p.delta0, 2000.0, 1_000_000);
            let got = quadratic_psi_at_level(&p, h, &opts).unwrap();
            assert!(!got.clamped);
            let rel = (got.value - expect).norm() / expect.norm();
            assert!(rel < 1e-4, "H={h} delta0={}: rel {rel:e}", p.delta0);
        }
    }
}

#[test]
fn quadratic_field_depends_only_on_level() {
    let params = quadratic_params(&testdata::bbo(), 1e-3).unwrap();
    let opts = QuadraticOptions::default();
    let h = 25.0;
    let reference = quadratic_psi_at_level(&params, h, &opts).unwrap().value;
    for t in [0.0, 30e-15, 300e-15] {
        let r = (h + (params.omega0 * t).powi(2)).sqrt() / params.q0;
        let v = xent_core::analytics::quadratic_psi(&params, r, t, &opts).unwrap().value;
        assert!((v - reference).norm() <= 1e-12 * reference.norm());
    }
}

#[test]
fn hankel_gaussian_pair() {
    // (1/2π) ∫ q J₀(qr) e^{−q²w²/4} dq = e^{−r²/w²}/(π w²)
    let w = 4e-6;
    let ht = Qdht::new(512, 3.0e6).unwrap();
    let f: Vec<Complex64> = ht
        .q_nodes()
        .iter()
        .map(|q| Complex64::new((-(q * w).powi(2) / 4.0).exp(), 0.0))
        .collect();
    let g = ht.forward(&f).unwrap();
    let peak = 1.0 / (PI * w * w);
    for (r, v) in ht.r_nodes().iter().zip(&g) {
        if *r < 3.0 * w {
            let exact = (-(r / w).powi(2)).exp() / (PI * w * w);
            assert!((v.re - exact).abs() <= 1e-9 * peak && v.im.abs() <= 1e-12 * peak);
        }
    }
    // and back
    let back = ht.inverse(&g).unwrap();
    for (a, b) in back.iter().zip(&f) {
        assert!((a - b).norm() < 1e-9);
    }
}

#[test]
fn off_node_evaluation_matches_trapezoid() {
    let w = 6e-6;
    let ht = Qdht::new(256, 2.0e6).unwrap();
    let shape = |q: f64| Complex64::new((-(q * w).powi(2) / 4.0).exp(), 0.0) * (1.0 + 0.3 * (q * w).cos());
    let f: Vec<Complex64> = ht.q_nodes().iter().map(|&q| shape(q)).collect();
    for r in [0.0, 1.3e-6, 7.7e-6, 15e-6] {
        let direct = ht.evaluate_at(&f, r).unwrap();
        let brute = hankel_trapezoid(shape, 2.0e6, 200_000, r);
        assert!((direct - brute).norm() <= 1e-7 * brute.norm().max(1e6), "r={r}");
    }
}

#[test]
fn quadratic_mismatch_approximates_exact_near_origin() {
    let crystal = testdata::bbo();
    let p = quadratic_params(&crystal, 1e-3).unwrap();
    let l = crystal.length();
    for &(qs, ws) in &[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (2.0, 1.5), (3.0, 3.0), (0.5, 4.0)] {
        let (q, w) = (qs * p.q0, ws * p.omega0);
        let exact = delta_pw(&crystal, q, w).unwrap() * l;
        let approx = p.mismatch(q, w);
        let scale = 1.0 + qs * qs + ws * ws;
        assert!((exact - approx).abs() <= 2e-3 * scale, "q={qs} w={ws}: {exact} vs {approx}");
    }
}

#[test]
fn degeneracy_angle_zeroes_the_collinear_mismatch() {
    let crystal = testdata::bbo();
    let theta = degeneracy_angle(&crystal).unwrap();
    assert!(collinear_mismatch(&crystal, theta).unwrap().abs() < 1e-6);
    // mismatch changes sign across it
    let lo = collinear_mismatch(&crystal, theta - 1e-3).unwrap();
    let hi = collinear_mismatch(&crystal, theta + 1e-3).unwrap();
    assert!(lo * hi < 0.0);
}

#[test]
fn crystal_document_round_trip() {
    let crystal = testdata::bbo();
    let text = crystal.to_document().to_string();
    let back = CrystalSpec::parse(&text).unwrap();
    assert_eq!(back, crystal);
}

#[test]
fn longer_crystal_narrows_the_angular_spectrum() {
    let short = testdata::bbo();
    let long = short.with_length(2.0 * short.length()).unwrap();
    let a = quadratic_params(&short, 1e-3).unwrap();
    let b = quadratic_params(&long, 1e-3).unwrap();
    assert!((a.q0 / b.q0 - 2f64.sqrt()).abs() < 1e-12);
    assert!((a.omega0 / b.omega0 - 2f64.sqrt()).abs() < 1e-12);
    assert!((b.delta0 / a.delta0 - 2.0).abs() < 1e-12);
}
