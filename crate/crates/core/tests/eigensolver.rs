use nalgebra::DVector;
use ttstack::analysis::stats::median;
use ttstack::eigen::{
    dense_ground_energy, estimate_true_residual, sketched_rayleigh_ritz, true_rayleigh_quotient, tto_heisenberg,
    tto_tfim, RayleighRitzConfig,
};
use ttstack::sketch::{make_sketch, SketchSpec};
use ttstack::{Field, TensorTrain};

#[test]
fn tfim_ground_energy_matches_dense() {
    let d = 10;
    let h = tto_tfim::<f64>(d, 1.0, 1.5).unwrap();
    let exact = dense_ground_energy(&h).unwrap();
    let hd = h.dense().unwrap();
    let (mut errs, mut ratios) = (vec![], vec![]);
    for seed in 0..5 {
        let v0 = TensorTrain::<f64>::random_kronecker(&[2; 10], 100 + seed).unwrap();
        let out = sketched_rayleigh_ritz(&h, &v0, &RayleighRitzConfig::new(4, 8, 10, 16, seed)).unwrap();
        let q = true_rayleigh_quotient(&h, &out.best).unwrap();
        errs.push(((q - exact) / exact).abs());
        let x = DVector::from_vec(out.ritz_vector(0).unwrap().to_vector().unwrap());
        ratios.push(out.residuals[0] / (&hd * &x - &x * out.ground_energy()).norm());
        assert!(out.history.iter().all(|r| r.gram_offset <= 0.2));

        // the exact quotient at the end of each cycle does not go up
        let ends: Vec<f64> = out
            .history
            .windows(2)
            .filter(|w| w[1].cycle != w[0].cycle)
            .map(|w| w[0].quotient_true.unwrap())
            .collect();
        for w in ends.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "{ends:?}");
        }
    }
    assert!(median(&errs) < 1e-3, "{errs:?}");
    let r = median(&ratios);
    assert!((0.5..=2.0).contains(&r), "{ratios:?}");
}

#[test]
fn heisenberg_small_chain() {
    let d = 8;
    let h = tto_heisenberg::<f64>(d, 1.0, 1.0, 1.0, 0.1).unwrap();
    let exact = dense_ground_energy(&h).unwrap();
    let v0 = TensorTrain::<f64>::random_uniform(&[2; 8], 2, 4).unwrap();
    let mut cfg = RayleighRitzConfig::new(4, 8, 10, 8, 3);
    cfg.max_ranks = 16;
    let out = sketched_rayleigh_ritz(&h, &v0, &cfg).unwrap();
    let q = out.best_quotient.unwrap();
    assert!(q >= exact - 1e-9 && ((q - exact) / exact).abs() < 1e-2, "{q} vs {exact}");
}

#[test]
fn residual_estimate_tracks_dense_residual() {
    let d = 8;
    let h = tto_tfim::<f64>(d, 1.0, 0.8).unwrap();
    let hd = h.dense().unwrap();
    let x = TensorTrain::<f64>::random_uniform(&[2; 8], 3, 9).unwrap();
    let lambda = true_rayleigh_quotient(&h, &x).unwrap();
    let xv = DVector::from_vec(x.to_vector().unwrap());
    let dense = (&hd * &xv - &xv * lambda).norm();
    let ratios: Vec<f64> = (0..20)
        .map(|s| {
            let sk = make_sketch::<f64>(&SketchSpec::otts(4, 8, &[2; 8], Field::Real, s)).unwrap();
            estimate_true_residual(&h, &x, lambda, &sk).unwrap() / dense
        })
        .collect();
    let r = median(&ratios);
    assert!((0.5..=2.0).contains(&r), "{ratios:?}");
}
