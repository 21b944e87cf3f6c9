use hetreg::lowerbound::{least_favorable_prior, lower_bound_target, van_trees_bound, PriorConfig};
use hetreg::models::{EconometricScale, ScaleModel};
use hetreg::function::Zero;

#[test]
fn constant_scale_bound_sits_in_corridor() {
    let scale = EconometricScale::new(1.0, 0.0, 0.0, 0.0).unwrap();
    let cfg = PriorConfig::default();
    let (k, r, n) = (1u32, 1.0, 100_001usize);
    let prior = least_favorable_prior(k, r, n, &cfg, &scale).unwrap();
    let vt = van_trees_bound(&prior.family, &prior.t, &scale, n, 10, 7).unwrap();
    assert!(vt.exact);
    let target = lower_bound_target(k, r, scale.varsigma(&Zero), cfg.eps).unwrap();
    let ratio = (n as f64).powf(2.0 / 3.0) * vt.bound / target;
    assert!((0.5..=1.1).contains(&ratio), "corridor ratio {ratio}");
}

#[test]
fn bound_grows_toward_target_with_n() {
    let scale = EconometricScale::new(1.0, 0.0, 0.0, 0.0).unwrap();
    let cfg = PriorConfig::default();
    let target = lower_bound_target(1, 1.0, 1.0, cfg.eps).unwrap();
    let ratios: Vec<f64> = [1_001usize, 10_001, 100_001]
        .iter()
        .map(|&n| {
            let prior = least_favorable_prior(1, 1.0, n, &cfg, &scale).unwrap();
            let vt = van_trees_bound(&prior.family, &prior.t, &scale, n, 10, 7).unwrap();
            (n as f64).powf(2.0 / 3.0) * vt.bound / target
        })
        .collect();
    assert!(ratios.windows(2).all(|w| w[0] < w[1]), "{ratios:?}");
    assert!(ratios.iter().all(|&q| q > 0.0 && q < 1.1), "{ratios:?}");
}
