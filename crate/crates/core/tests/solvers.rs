use std::borrow::Cow;

use fcomp_core::solvers::{greedy_exact, joint_ls_exact};
use fcomp_core::{
    build_grid, error_ek, solve, synthesize, Algorithm, GridNode, IndexSelection, InterpolantBank,
    Measurement, Normalization, ParamGrid, RadarConfig, Scene, SolverOptions, SynthesisModel,
    TaylorDictionary, Target, TAYLOR_INTERPOLANTS,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn setup(ms: usize, mc: usize, nr: usize, nv: usize) -> (RadarConfig, ParamGrid, TaylorDictionary) {
    let cfg = RadarConfig::k_band(ms, mc);
    let grid = build_grid(&cfg, nr, nv, Normalization::GridStep).unwrap();
    let dict = TaylorDictionary::with_exact(&cfg, &grid).unwrap();
    (cfg, grid, dict)
}

fn measure(cfg: &RadarConfig, targets: &[Target], model: SynthesisModel) -> Measurement {
    synthesize(cfg, &Scene::new(targets.to_vec()), model, 0.0, 0).unwrap()
}

/// Target whose factorized atom sits exactly on factorized node `(nr, nv)`.
fn factorized_on_grid(cfg: &RadarConfig, grid: &ParamGrid, nr: usize, nv: usize, alpha: Complex64) -> Target {
    let v = grid.speed_bins()[nv];
    let r = cfg.wrap_range(grid.range_bins()[nr] - cfg.gamma() * v);
    Target::new(r, v, alpha)
}

#[test]
fn on_grid_target_is_recovered_by_every_algorithm() {
    let (cfg, grid, dict) = setup(16, 16, 16, 16);
    let alpha = Complex64::new(0.7, -1.2);
    let n = grid.linear_index(5, 9);
    let (r, v) = grid.node(n).unwrap();
    let y = measure(&cfg, &[Target::new(r, v, alpha)], SynthesisModel::Exact);
    for alg in [Algorithm::Omp, Algorithm::Comp] {
        let rep = solve(&y, &dict, &SolverOptions::new(1), alg).unwrap();
        let e = &rep.estimates[0];
        assert_eq!(e.source.node, GridNode::Linear(n), "{alg}");
        assert!(e.delta_r.abs() < 1e-3 && e.delta_v.abs() < 1e-3);
        assert!((e.alpha_hat - alpha).norm() < 1e-3);
        assert!(rep.residual_norm < 1e-6 * y.norm());
    }

    let t = factorized_on_grid(&cfg, &grid, 5, 9, alpha);
    let y = measure(&cfg, &[t], SynthesisModel::Factorized);
    for alg in [Algorithm::FOmp, Algorithm::FComp] {
        let rep = solve(&y, &dict, &SolverOptions::new(1), alg).unwrap();
        let e = &rep.estimates[0];
        assert_eq!(e.source.node, GridNode::Pair(5, 9), "{alg}");
        assert!((e.alpha_hat - alpha).norm() < 1e-6);
        assert!(error_ek(&cfg, (t.r, t.v), (e.r_hat, e.v_hat)) < 1e-6);
    }
}

#[test]
fn off_grid_target_favours_continuous_estimation() {
    let (cfg, grid, dict) = setup(16, 16, 16, 16);
    let (r0, v0) = grid.node(grid.linear_index(7, 6)).unwrap();
    let t = Target::new(r0 + 0.3 * grid.range_step(), v0 - 0.3 * grid.speed_step(), Complex64::new(1.0, 0.0));
    let y = measure(&cfg, &[t], SynthesisModel::Exact);
    let err = |alg| {
        let e = solve(&y, &dict, &SolverOptions::new(1), alg).unwrap().estimates[0].clone();
        error_ek(&cfg, (t.r, t.v), (e.r_hat, e.v_hat))
    };
    assert!(err(Algorithm::Comp) < err(Algorithm::Omp));
    assert!(err(Algorithm::FComp) < err(Algorithm::FOmp));
    assert!(err(Algorithm::Comp) < 0.1);
}

#[test]
fn two_on_grid_targets_give_exact_amplitudes() {
    let (cfg, grid, dict) = setup(16, 16, 16, 16);
    let alphas = [Complex64::new(1.0, 0.5), Complex64::new(-0.4, 0.8)];
    let nodes = [grid.linear_index(2, 3), grid.linear_index(11, 12)];
    let targets: Vec<Target> = nodes
        .iter()
        .zip(alphas)
        .map(|(&n, a)| {
            let (r, v) = grid.node(n).unwrap();
            Target::new(r, v, a)
        })
        .collect();
    let y = measure(&cfg, &targets, SynthesisModel::Exact);
    let rep = solve(&y, &dict, &SolverOptions::new(2), Algorithm::Omp).unwrap();
    for (n, a) in nodes.iter().zip(alphas) {
        let e = rep
            .estimates
            .iter()
            .find(|e| e.source.node == GridNode::Linear(*n))
            .expect("true node picked");
        assert!((e.alpha_hat - a).norm() < 1e-6);
    }

    let targets = [
        factorized_on_grid(&cfg, &grid, 2, 3, alphas[0]),
        factorized_on_grid(&cfg, &grid, 11, 12, alphas[1]),
    ];
    let y = measure(&cfg, &targets, SynthesisModel::Factorized);
    let rep = solve(&y, &dict, &SolverOptions::new(2), Algorithm::FOmp).unwrap();
    for ((nr, nv), a) in [(2, 3), (11, 12)].into_iter().zip(alphas) {
        let e = rep
            .estimates
            .iter()
            .find(|e| e.source.node == GridNode::Pair(nr, nv))
            .expect("true node picked");
        assert!((e.alpha_hat - a).norm() < 1e-6);
    }
}

#[test]
fn residual_never_grows() {
    let (cfg, _, dict) = setup(16, 16, 32, 32);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let bank = dict.exact_part().unwrap();
    for _ in 0..10 {
        let targets: Vec<Target> = (0..4)
            .map(|_| {
                Target::new(
                    cfg.max_range() * (1.0 - rng.random::<f64>()),
                    cfg.max_speed() * (1.0 - 2.0 * rng.random::<f64>()),
                    Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5),
                )
            })
            .collect();
        let y = measure(&cfg, &targets, SynthesisModel::Exact);
        for (interp, sel) in [(1, IndexSelection::Simplified), (3, IndexSelection::Simplified), (3, IndexSelection::Full)] {
            let out = greedy_exact(y.samples(), bank, interp, 6, sel).unwrap();
            let mut last = y.norm();
            for d in &out.diagnostics {
                assert!(d.residual_norm <= last + 1e-12);
                last = d.residual_norm;
            }
        }
    }
}

/// Exact bank whose derivative interpolants are zero.
struct NoDerivatives<'a, B: InterpolantBank>(&'a B);

impl<B: InterpolantBank> InterpolantBank for NoDerivatives<'_, B> {
    fn signal_len(&self) -> usize {
        self.0.signal_len()
    }
    fn node_count(&self) -> usize {
        self.0.node_count()
    }
    fn atom(&self, n: usize) -> Cow<'_, [Complex64]> {
        self.0.atom(n)
    }
    fn interpolants(&self, n: usize) -> [Vec<Complex64>; TAYLOR_INTERPOLANTS] {
        let zero = vec![Complex64::new(0.0, 0.0); self.signal_len()];
        [self.0.atom(n).into_owned(), zero.clone(), zero]
    }
}

#[test]
fn comp_without_derivatives_reduces_to_omp() {
    let (cfg, _, dict) = setup(8, 8, 16, 16);
    let bank = dict.exact_part().unwrap();
    let targets = [
        Target::new(2.2, 3.0, Complex64::new(1.0, 0.0)),
        Target::new(4.1, -20.0, Complex64::new(0.0, 0.6)),
    ];
    let y = measure(&cfg, &targets, SynthesisModel::Exact);
    let omp = greedy_exact(y.samples(), bank, 1, 2, IndexSelection::Simplified).unwrap();
    let degenerate = greedy_exact(y.samples(), &NoDerivatives(bank), 3, 2, IndexSelection::Simplified).unwrap();
    assert_eq!(omp.picks, degenerate.picks);
    for (a, b) in omp.betas.iter().zip(&degenerate.betas) {
        assert!((a[0] - b[0]).norm() < 1e-6);
        assert!(b[1].norm() < 1e-6 && b[2].norm() < 1e-6);
    }
}

#[test]
fn estimates_are_equivariant_to_measurement_scaling() {
    let (cfg, _, dict) = setup(16, 16, 16, 16);
    let targets = [
        Target::new(3.3, 5.5, Complex64::new(1.0, 0.2)),
        Target::new(9.1, -31.0, Complex64::new(-0.3, 0.9)),
    ];
    let y = measure(&cfg, &targets, SynthesisModel::Exact);
    let c = Complex64::new(-2.5, 4.0);
    let scaled = Measurement::from_samples(
        cfg.ms,
        cfg.mc,
        y.samples().iter().map(|z| z * c).collect(),
    )
    .unwrap();
    for alg in Algorithm::ALL {
        let a = solve(&y, &dict, &SolverOptions::new(2), alg).unwrap();
        let b = solve(&scaled, &dict, &SolverOptions::new(2), alg).unwrap();
        for (ea, eb) in a.estimates.iter().zip(&b.estimates) {
            assert_eq!(ea.source.node, eb.source.node);
            assert!((ea.r_hat - eb.r_hat).abs() < 1e-9 && (ea.v_hat - eb.v_hat).abs() < 1e-9);
            assert!((ea.alpha_hat * c - eb.alpha_hat).norm() < 1e-9 * eb.alpha_hat.norm().max(1.0));
        }
    }
}

#[test]
fn factorized_range_estimate_lands_in_domain() {
    let (cfg, grid, dict) = setup(8, 8, 16, 16);
    let t = factorized_on_grid(&cfg, &grid, 0, 15, Complex64::new(1.0, 0.0));
    let y = measure(&cfg, &[t], SynthesisModel::Factorized);
    let e = &solve(&y, &dict, &SolverOptions::new(1), Algorithm::FComp).unwrap().estimates[0];
    assert!(cfg.range_in_domain(e.r_hat));
    assert!((e.r_hat - t.r).abs() < 1e-9);
}

#[test]
fn invalid_requests_are_rejected() {
    let (cfg, _, dict) = setup(4, 4, 8, 8);
    let y = Measurement::zeros(cfg.ms, cfg.mc);
    assert!(solve(&y, &dict, &SolverOptions::new(6), Algorithm::Comp).is_err());
    assert!(solve(&y, &dict, &SolverOptions::new(0), Algorithm::Omp).is_err());
    assert!(solve(&Measurement::zeros(4, 2), &dict, &SolverOptions::new(1), Algorithm::Omp).is_err());
    let fact_only = TaylorDictionary::factorized(dict.config(), dict.grid()).unwrap();
    assert!(solve(&y, &fact_only, &SolverOptions::new(1), Algorithm::Omp).is_err());
    assert!(joint_ls_exact(y.samples(), dict.exact_part().unwrap(), &[3, 3], 1).is_err());
}
