use dnd_sde_core::stats::{observed_order, RunningStats};
use dnd_sde_core::{
    substream, BilinearModel, Functional, NoiseLaw, NoiseSpec, SchemeId, TimeGrid,
};
use dnd_sde_harness::{
    lyapunov_rates, mean_series, weak_error_abs, weak_error_rel, Executor, HarnessError, Reference,
    ReferenceMethod, SchemeRun,
};

const ALL_SCHEMES: [SchemeId; 6] = [
    SchemeId::Dnd,
    SchemeId::EulerMaruyama,
    SchemeId::Balanced,
    SchemeId::TamedEuler,
    SchemeId::SRock { stages: 8, damping: 0.05 },
    SchemeId::BackwardEuler { tol: 1e-12, max_iter: 50 },
];

fn zero_model() -> BilinearModel {
    BilinearModel::new(2, vec![0.0; 4], vec![vec![0.0; 4]]).unwrap()
}

#[test]
fn zero_coefficients_keep_every_path_at_the_start() {
    let model = zero_model();
    let exec = Executor::new(2).unwrap();
    let x0 = [0.5, -2.0];
    let f = Functional::Atan1pSq { coord: 1 };
    for scheme in ALL_SCHEMES {
        let run = SchemeRun {
            model: &model,
            scheme,
            alpha: 0.0,
            x0: &x0,
            grid: TimeGrid::new(0.25, 2.0).unwrap(),
            functional: f,
            noise: NoiseSpec::new(NoiseLaw::Gaussian, 4),
        };
        let s = mean_series(&exec, &run, 50).unwrap();
        assert_eq!(s.failed_paths, 0);
        for st in &s.stats {
            assert_eq!(st.mean(), f.eval(&x0), "{}", scheme.name());
            assert_eq!(st.ci99(), 0.0);
        }
    }
}

#[test]
fn series_against_itself_has_zero_error() {
    let model = BilinearModel::new(1, vec![-0.2], vec![vec![0.7]]).unwrap();
    let exec = Executor::new(2).unwrap();
    let run = SchemeRun {
        model: &model,
        scheme: SchemeId::EulerMaruyama,
        alpha: 0.0,
        x0: &[2.0],
        grid: TimeGrid::new(1.0 / 64.0, 1.0).unwrap(),
        functional: Functional::Log1pSq { coord: 0 },
        noise: NoiseSpec::new(NoiseLaw::TwoPoint, 9),
    };
    let s = mean_series(&exec, &run, 400).unwrap();
    let reference = Reference {
        method: ReferenceMethod::Scheme { scheme: run.scheme, dt: run.grid.dt },
        times: s.times.clone(),
        values: s.stats.iter().map(RunningStats::mean).collect(),
        ci: s.stats.iter().map(RunningStats::ci99).collect(),
        samples: 400,
        failed_paths: 0,
    };
    let abs = weak_error_abs(&s, &reference).unwrap();
    assert_eq!(abs.eps_a, 0.0);
    let widest = s.stats.iter().map(|st| 2.0 * st.ci99()).fold(0.0, f64::max);
    assert_eq!(abs.ci, widest);
    let t = s.terminal();
    assert_eq!(weak_error_rel((t.mean(), t.ci99()), reference.terminal()).unwrap().eps_r, 0.0);
}

#[test]
fn relative_error_needs_a_resolved_reference() {
    assert!(matches!(weak_error_rel((1.0, 0.0), (0.1, 0.01)), Err(HarnessError::UndefinedRelative { .. })));
    let w = weak_error_rel((0.9, 0.01), (1.0, 0.05)).unwrap();
    assert!((w.eps_r - 0.1).abs() < 1e-15);
    assert!((w.ci - (0.01 + 0.05 * 0.9)).abs() < 1e-15);
}

#[test]
fn deterministic_decay_gives_its_exact_rate() {
    let lambda = 2.5;
    let model = BilinearModel::new(2, vec![-lambda, 0.0, 0.0, -lambda], vec![vec![0.0; 4]]).unwrap();
    let exec = Executor::new(2).unwrap();
    for dt in [1.0, 0.125] {
        let grid = TimeGrid::new(dt, 10.0).unwrap();
        let noise = NoiseSpec::new(NoiseLaw::Gaussian, 1);
        let rates = lyapunov_rates(&exec, &model, SchemeId::Dnd, 0.0, &[3.0, 4.0], grid, 8, noise).unwrap();
        for r in rates {
            assert!((r.unwrap() + lambda).abs() < 1e-12);
        }
    }
}

#[test]
fn normal_intervals_cover_the_mean_about_99_percent_of_the_time() {
    let spec = NoiseSpec::new(NoiseLaw::Gaussian, 2024);
    let replications = 1000;
    let mut covered = 0;
    for r in 0..replications {
        let mut stream = substream(spec, r);
        let mut stats = RunningStats::new();
        for _ in 0..200 {
            stats.push(1.5 + 3.0 * stream.standard());
        }
        if (stats.mean() - 1.5).abs() <= stats.ci99() {
            covered += 1;
        }
    }
    // Binomial(1000, 0.99) has standard deviation about 3.
    assert!((975..=1000).contains(&covered), "{covered} of {replications}");
}

#[test]
fn orders_of_model_error_sequences() {
    let dts: Vec<f64> = (4..9).map(|k| 0.5f64.powi(k)).collect();
    let linear: Vec<_> = dts.iter().map(|&d| (d, 3.0 * d)).collect();
    assert!((observed_order(&linear).unwrap() - 1.0).abs() < 1e-12);
    let half: Vec<_> = dts.iter().map(|&d| (d, 0.2 * d.sqrt())).collect();
    assert!((observed_order(&half).unwrap() - 0.5).abs() < 1e-12);
    // Relative errors of the scalar scheme on the Ginzburg-Landau problem
    // with a = b = 1, σ = 2 at Δ = 1/16 … 1/128.
    let published = [(1.0 / 16.0, 0.033357), (1.0 / 32.0, 0.016634), (1.0 / 64.0, 0.0071119), (1.0 / 128.0, 0.0023089)];
    let p = observed_order(&published).unwrap();
    assert!((0.7..=1.3).contains(&p), "{p}");
}
