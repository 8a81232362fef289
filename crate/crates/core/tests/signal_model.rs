use fcomp_core::{
    build_grid, distortion_theta, exact_atom, exact_atom_with_gradient, factorized_atom,
    sub_atom_phi, sub_atom_phi_derivative, sub_atom_psi, sub_atom_psi_derivative, synthesize,
    ExactDictionary, FactorizedDictionary, InterpolantBank, Normalization, RadarConfig, Scene,
    SynthesisModel, Target,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel_err(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

fn central_diff(f: impl Fn(f64) -> Vec<Complex64>, x: f64, h: f64) -> Vec<Complex64> {
    let (p, m) = (f(x + h), f(x - h));
    p.iter().zip(&m).map(|(a, b)| (a - b) / (2.0 * h)).collect()
}

#[test]
fn gradients_match_finite_differences() {
    let cfg = RadarConfig::k_band(16, 16);
    let grid = build_grid(&cfg, 32, 32, Normalization::GridStep).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let hr = 1e-6 * cfg.range_resolution();
    let hv = 1e-6 * cfg.speed_resolution();
    for _ in 0..20 {
        let n = rng.random_range(0..grid.len());
        let (r, v) = grid.node(n).unwrap();
        let (_, da_dr, da_dv) = exact_atom_with_gradient(&cfg, r, v);
        let fd_r = central_diff(|x| exact_atom(&cfg, x, v), r, hr);
        let fd_v = central_diff(|x| exact_atom(&cfg, r, x), v, hv);
        assert!(rel_err(&fd_r, &da_dr) < 1e-6);
        assert!(rel_err(&fd_v, &da_dv) < 1e-6);

        let fd_psi = central_diff(|x| sub_atom_psi(&cfg, x), r, hr);
        assert!(rel_err(&fd_psi, &sub_atom_psi_derivative(&cfg, r)) < 1e-6);
        let fd_phi = central_diff(|x| sub_atom_phi(&cfg, x), v, hv);
        assert!(rel_err(&fd_phi, &sub_atom_phi_derivative(&cfg, v)) < 1e-6);
    }
}

fn remainder(exact: &[Complex64], d1: &[Complex64], d: &[Complex64], delta: f64) -> f64 {
    let approx: Vec<Complex64> = d1.iter().zip(d).map(|(a, b)| a + b * delta).collect();
    rel_err(&approx, exact)
}

#[test]
fn taylor_remainder_decays_quadratically() {
    let cfg = RadarConfig::k_band(16, 16);
    let grid = build_grid(&cfg, 32, 32, Normalization::GridStep).unwrap();
    let dict = ExactDictionary::build(&cfg, &grid).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut ratio_r, mut ratio_v) = (0.0, 0.0);
    for _ in 0..20 {
        let n = rng.random_range(0..grid.len());
        let (r, v) = grid.node(n).unwrap();
        let [d1, d2, d3] = dict.interpolants(n);
        let err_r = |delta: f64| {
            let a = exact_atom(&cfg, r + delta * grid.range_scale(), v);
            remainder(&a, &d1, &d2, delta)
        };
        let err_v = |delta: f64| {
            let a = exact_atom(&cfg, r, v + delta * grid.speed_scale());
            remainder(&a, &d1, &d3, delta)
        };
        ratio_r += err_r(0.10) / err_r(0.05) / 20.0;
        ratio_v += err_v(0.10) / err_v(0.05) / 20.0;
    }
    assert!((3.5..=4.5).contains(&ratio_r), "range ratio {ratio_r}");
    assert!((3.5..=4.5).contains(&ratio_v), "speed ratio {ratio_v}");
}

#[test]
fn factorized_interpolants_are_taylor_terms_of_the_factorized_atom() {
    let cfg = RadarConfig::k_band(8, 16);
    let grid = build_grid(&cfg, 16, 32, Normalization::Resolution).unwrap();
    let dict = FactorizedDictionary::build(&cfg, &grid).unwrap();
    let (nr, nv) = (5, 20);
    let (rp, v) = (grid.range_bins()[nr], grid.speed_bins()[nv]);
    let f = dict.factorized_interpolants(nr, nv).unwrap();
    let outer = |psi: Vec<Complex64>, phi: Vec<Complex64>| -> Vec<Complex64> {
        phi.iter().flat_map(|p| psi.iter().map(move |s| s * p)).collect()
    };
    let err = |delta: f64, axis: usize| {
        let (r_, v_) = if axis == 1 {
            (rp + delta * grid.range_scale(), v)
        } else {
            (rp, v + delta * grid.speed_scale())
        };
        let a = outer(sub_atom_psi(&cfg, r_), sub_atom_phi(&cfg, v_));
        remainder(&a, &f.outer(0), &f.outer(axis), delta)
    };
    for axis in [1, 2] {
        let ratio = err(0.02, axis) / err(0.01, axis);
        assert!((3.5..=4.5).contains(&ratio), "axis {axis}: {ratio}");
    }
}

#[test]
fn exact_and_factorized_agree_without_motion() {
    let cfg = RadarConfig::k_band(16, 16);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let r = cfg.max_range() * (1.0 - rng.random::<f64>());
        let a = exact_atom(&cfg, r, 0.0);
        let f = factorized_atom(&cfg, r, 0.0);
        assert!(a.iter().zip(f.iter()).all(|(x, y)| (x - y).norm() < 1e-12));
    }
}

fn max_mismatch(cfg: &RadarConfig, r: f64, v: f64) -> f64 {
    distortion_theta(cfg, r, v)
        .iter()
        .map(|z| (z - Complex64::new(1.0, 0.0)).norm())
        .fold(0.0, f64::max)
}

#[test]
fn mismatch_grows_with_chirp_count() {
    let mut last = 0.0;
    for mc in [8, 16, 32, 64] {
        let cfg = RadarConfig::k_band(16, mc);
        let m = max_mismatch(&cfg, 0.5 * cfg.max_range(), 0.5 * cfg.max_speed());
        assert!(m >= last, "Mc={mc}: {m} < {last}");
        last = m;
    }
    let cfg = RadarConfig::k_band(16, 16);
    assert_eq!(max_mismatch(&cfg, 3.0, 0.0), 0.0);
}

#[test]
fn factorized_synthesis_sums_factorized_atoms() {
    let cfg = RadarConfig::k_band(8, 8);
    let targets = vec![
        Target::new(1.3, 4.0, Complex64::new(0.5, -1.0)),
        Target::new(4.9, -7.5, Complex64::new(-2.0, 0.25)),
    ];
    let y = synthesize(&cfg, &Scene::new(targets.clone()), SynthesisModel::Factorized, 0.0, 0).unwrap();
    let mut expected = vec![Complex64::new(0.0, 0.0); cfg.m()];
    for t in &targets {
        for (e, a) in expected.iter_mut().zip(factorized_atom(&cfg, t.r, t.v).iter()) {
            *e += t.alpha * a;
        }
    }
    assert!(rel_err(y.samples(), &expected) < 1e-14);
}

#[test]
fn empty_scene_gives_zero_measurement() {
    let cfg = RadarConfig::k_band(8, 4);
    let y = synthesize(&cfg, &Scene::default(), SynthesisModel::Exact, 0.0, 1).unwrap();
    assert_eq!(y.len(), 32);
    assert!(y.samples().iter().all(|z| z.norm() == 0.0));
}

#[test]
fn noise_has_requested_power_and_is_seeded() {
    let cfg = RadarConfig::k_band(64, 64);
    let noisy = |seed| synthesize(&cfg, &Scene::default(), SynthesisModel::Exact, 0.5, seed).unwrap();
    let y = noisy(4);
    let power = y.samples().iter().map(|z| z.norm_sqr()).sum::<f64>() / y.len() as f64;
    assert!((power - 0.25).abs() < 0.02, "power {power}");
    assert_eq!(y, noisy(4));
    assert_ne!(y, noisy(5));
}

proptest! {
    #[test]
    fn atoms_have_unit_modulus(u in 0.0f64..1.0, w in -1.0f64..1.0) {
        let cfg = RadarConfig::k_band(8, 8);
        let r = cfg.max_range() * (1.0 - u);
        let v = w * cfg.max_speed();
        for z in exact_atom(&cfg, r, v) {
            prop_assert!((z.norm() - 1.0).abs() < 1e-12);
        }
        for z in factorized_atom(&cfg, r, v).iter() {
            prop_assert!((z.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sub_atoms_are_periodic(x in 0.0f64..20.0, v in -30.0f64..30.0) {
        let cfg = RadarConfig::k_band(8, 8);
        let a = sub_atom_psi(&cfg, x);
        let b = sub_atom_psi(&cfg, x + cfg.max_range());
        prop_assert!(rel_err(&a, &b) < 1e-9);
        let a = sub_atom_phi(&cfg, v);
        let b = sub_atom_phi(&cfg, v + 2.0 * cfg.max_speed());
        prop_assert!(rel_err(&a, &b) < 1e-9);
    }
}
