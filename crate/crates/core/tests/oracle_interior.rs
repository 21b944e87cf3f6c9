use hetreg::experiments::{oracle_study, ExperimentConfig, Preset, TestFunctionSpec};
use hetreg::models::{EconometricScale, NoiseSpec};

fn config(test_function: TestFunctionSpec) -> ExperimentConfig {
    let mut cfg = ExperimentConfig {
        n_grid: vec![101, 301, 1001],
        reps: 120,
        test_function,
        scale: EconometricScale::new(1.0, 1.0, 0.5, 0.5).unwrap(),
        ..Default::default()
    };
    cfg.noise_menu = vec![NoiseSpec::Gaussian];
    cfg.tuning.rho = Some(0.25);
    cfg
}

fn check(cfg: &ExperimentConfig) {
    let report = oracle_study(cfg).unwrap();
    for row in &report.summary {
        assert!(row.ratio <= 1.0 + 1.0 / 0.25 + 3.0 * row.ratio_se, "{row:?}");
        assert!(row.ratio >= 1.0 - 3.0 * row.ratio_se, "{row:?}");
    }
    assert!(report.trends.iter().all(|t| t.passes), "{:?}", report.trends);
    let last = report.summary.last().unwrap();
    let m = (last.n as f64).ln().powi(2).floor() as usize;
    let t: usize = last.min_family_member.rsplit("_t").next().unwrap().parse().unwrap();
    assert!(t < m, "best member {} sits on the edge", last.min_family_member);
}

#[test]
fn weak_signal_selects_inside_family() {
    check(&config(TestFunctionSpec::Trig {
        terms: vec![(2, 0.3), (5, 0.15)],
    }));
}

#[test]
fn smooth_preset_selects_inside_family() {
    check(&config(TestFunctionSpec::Preset { name: Preset::S2 }));
}
