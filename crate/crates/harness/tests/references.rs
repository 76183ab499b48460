use std::time::Instant;

use dnd_sde_core::{make_test_problem, Functional, NoiseLaw, NoiseSpec, TestProblemId};
use dnd_sde_harness::reference::{exact_sampler_reference, quadrature_reference, reference_times};
use dnd_sde_harness::Executor;

fn compare(id: TestProblemId, x0: [f64; 2], horizon: f64, functional: Functional, samples: u64) {
    let problem = make_test_problem(id).unwrap();
    let exec = Executor::new(4).unwrap();
    let noise = NoiseSpec::new(NoiseLaw::Gaussian, 11);
    let sampled = exact_sampler_reference(&exec, &problem, x0, horizon, functional, samples, noise).unwrap();
    let start = Instant::now();
    let quad = quadrature_reference(&problem, x0, &reference_times(horizon), functional).unwrap();
    eprintln!("{id:?} {functional:?}: quadrature over {} times in {:?}", quad.times.len(), start.elapsed());
    assert_eq!(quad.times, sampled.times);
    let mut outside = 0;
    for i in 0..quad.times.len() {
        let gap = (quad.values[i] - sampled.values[i]).abs();
        // 99% half-widths: allow 1% of the grid to fall outside, none by more than 2x.
        if gap > sampled.ci[i] {
            outside += 1;
        }
        assert!(
            gap <= 2.0 * sampled.ci[i] + 1e-12,
            "t = {}: quadrature {} vs sampled {} ± {}",
            quad.times[i],
            quad.values[i],
            sampled.values[i],
            sampled.ci[i]
        );
    }
    assert!(outside * 20 <= quad.times.len(), "{outside} of {} times outside the CI", quad.times.len());
}

#[test]
fn quadrature_agrees_with_the_exact_sampler_in_the_stable_regime() {
    let id = TestProblemId::Rotation41 { b: -4.0, sigma: 8.0, eps: 8.0 };
    compare(id, [1.0, 2.0], 2.0, Functional::Log1pSq { coord: 0 }, 200_000);
    compare(id, [1.0, 2.0], 1.0, Functional::Atan1pSq { coord: 1 }, 200_000);
}

#[test]
fn quadrature_agrees_with_the_exact_sampler_in_the_unstable_regime() {
    let id = TestProblemId::Rotation41 { b: 4.0, sigma: 4.0, eps: 3.0 };
    compare(id, [2.0, 4.0], 10.0, Functional::Log1pSq { coord: 0 }, 100_000);
    compare(id, [2.0, 4.0], 2.0, Functional::Atan1pSq { coord: 0 }, 100_000);
}

#[test]
fn quadrature_with_small_noise_matches_a_fine_sum() {
    // Small angle spread exercises the Gaussian branch close to a zero of the
    // cosine; compare with a brute-force double sum.
    let (b, sigma, eps, t) = (0.3, 0.5, 0.2, 1.0);
    let x0 = [1e-3, 1.0];
    let problem = make_test_problem(TestProblemId::Rotation41 { b, sigma, eps }).unwrap();
    let f = Functional::Log1pSq { coord: 0 };
    let quad = quadrature_reference(&problem, x0, &[t], f).unwrap().values[0];
    let n = 4000;
    let (mut total, mut weight) = (0.0, 0.0);
    for i in 0..n {
        let u = -8.0 + 16.0 * (i as f64 + 0.5) / n as f64;
        for j in 0..n {
            let v = -8.0 + 16.0 * (j as f64 + 0.5) / n as f64;
            let w = (-0.5 * (u * u + v * v)).exp();
            let x = dnd_sde_core::model::rotation41_exact(b, sigma, eps, x0, t, u * t.sqrt(), v * t.sqrt());
            total += w * f.eval(&x);
            weight += w;
        }
    }
    let brute = total / weight;
    assert!((quad - brute).abs() < 1e-6 * brute.abs(), "{quad} vs {brute}");
}
