use steinis::experiments::fit_rate;
use steinis::gram::assemble_gram;
use steinis::kernels::{BaseKernel, ScoredSamples};
use steinis::qp::QpSettings;
use steinis::rng::{stream, Stream};
use steinis::samplers::{draw_subsample, run_chain, tula_step, ChainConfig, ChainKind};
use steinis::sis::{correct_gram, weighted_estimate};
use steinis::targets::StandardGaussian;
use steinis::WeightVector;

#[test]
fn iid_draws_have_unit_moments() {
    let d = 4;
    let chain = run_chain(&ChainConfig::iid(20_000, 3), &StandardGaussian::new(d)).unwrap();
    let n = chain.len() as f64;
    for k in 0..d {
        let mean: f64 = chain.points.iter().map(|p| p[k]).sum::<f64>() / n;
        let var: f64 = chain
            .points
            .iter()
            .map(|p| (p[k] - mean).powi(2))
            .sum::<f64>()
            / n;
        assert!(mean.abs() < 4.0 / n.sqrt(), "mean {mean}");
        assert!((var - 1.0).abs() < 5.0 * (2.0 / n).sqrt(), "var {var}");
    }
}

#[test]
fn subsamples_are_uniform() {
    // chi-square over 10 bins for single draws
    let mut rng = stream(5, Stream::ChainSubsample);
    let mut counts = [0usize; 10];
    let trials = 20_000;
    for _ in 0..trials {
        counts[draw_subsample(10, 1, &mut rng)[0]] += 1;
    }
    let expected = trials as f64 / 10.0;
    let chi2: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    // 99.9% quantile of chi-square with 9 degrees of freedom
    assert!(chi2 < 27.88, "chi2 {chi2}");
    // indices within a draw are independent (drawn with replacement):
    // ordered pairs from size-2 draws are uniform over all 16 cells
    let mut pairs = [0usize; 16];
    for _ in 0..trials {
        let s = draw_subsample(4, 2, &mut rng);
        assert!(s.iter().all(|&i| i < 4));
        pairs[s[0] * 4 + s[1]] += 1;
    }
    let expected = trials as f64 / 16.0;
    let chi2: f64 = pairs.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // 99.9% quantile of chi-square with 15 degrees of freedom
    assert!(chi2 < 37.70, "pair chi2 {chi2}");
}

#[test]
fn taming_bounds_the_drift() {
    let (h, gamma) = (1.0, 0.05);
    let x = vec![1e6; 5];
    let score: Vec<f64> = x.iter().map(|v| -v).collect();
    let z = vec![0.0; 5];
    let next = tula_step(&x, &score, h, gamma, &z).unwrap();
    let drift: f64 = next
        .iter()
        .zip(&x)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    assert!(drift <= h / (2.0 * gamma) + 1e-9, "{drift}");
    let ula = tula_step(&[2.0], &[-2.0], 0.5, 0.0, &[0.3]).unwrap();
    assert!((ula[0] - (2.0 - 0.5 + 0.5f64.sqrt() * 0.3)).abs() < 1e-15);
}

#[test]
fn chains_are_reproducible_and_seed_dependent() {
    let model = StandardGaussian::new(3);
    let a = run_chain(&ChainConfig::tula(1.0, 0.05, 50, 8), &model).unwrap();
    let b = run_chain(&ChainConfig::tula(1.0, 0.05, 50, 8), &model).unwrap();
    let c = run_chain(&ChainConfig::tula(1.0, 0.05, 50, 9), &model).unwrap();
    assert_eq!(a.points, b.points);
    assert_ne!(a.points, c.points);
    let longer = run_chain(&ChainConfig::tula(1.0, 0.05, 80, 8), &model).unwrap();
    assert_eq!(&longer.points[..50], &a.points[..]);
    let ula = run_chain(
        &ChainConfig {
            kind: ChainKind::Ula,
            ..ChainConfig::tula(0.5, 0.0, 10, 1)
        },
        &model,
    )
    .unwrap();
    assert_eq!(ula.len(), 10);
}

/// Stein weights pull a biased chain's second-moment estimate toward the
/// truth more often than not.
#[test]
fn correction_improves_second_moment_estimates() {
    let d = 5;
    let model = StandardGaussian::new(d);
    let mut raw_err = Vec::new();
    let mut corrected_err = Vec::new();
    for seed in 0..10 {
        let chain = run_chain(&ChainConfig::tula(1.0, 0.05, 300, seed), &model).unwrap();
        let phi: Vec<f64> = chain
            .points
            .iter()
            .map(|p| p.iter().map(|v| v * v).sum())
            .collect();
        let gram = assemble_gram(
            &ScoredSamples::canonical(&model, BaseKernel::imq(1.0, 0.5), &chain.points).unwrap(),
        )
        .unwrap();
        let result = correct_gram(&gram, &QpSettings::default()).unwrap();
        raw_err.push(
            (weighted_estimate(&WeightVector::uniform(phi.len()), &phi).unwrap() - d as f64).abs(),
        );
        corrected_err.push((weighted_estimate(&result.weights, &phi).unwrap() - d as f64).abs());
        assert!(result.ksd <= result.uniform_ksd);
    }
    let med = |mut v: Vec<f64>| {
        v.sort_by(f64::total_cmp);
        0.5 * (v[4] + v[5])
    };
    let (raw, corrected) = (med(raw_err), med(corrected_err));
    assert!(corrected < raw, "corrected {corrected} raw {raw}");
}

#[test]
fn iid_uniform_ksd_decays_at_root_n() {
    let model = StandardGaussian::new(2);
    let chain = run_chain(&ChainConfig::iid(1024, 21), &model).unwrap();
    let gram = assemble_gram(
        &ScoredSamples::canonical(&model, BaseKernel::imq(1.0, 0.5), &chain.points).unwrap(),
    )
    .unwrap();
    let ns = [64, 128, 256, 512, 1024];
    let ksd: Vec<f64> = ns
        .iter()
        .map(|&n| {
            gram.leading(n)
                .unwrap()
                .quad_form(WeightVector::uniform(n).as_slice())
                .sqrt()
        })
        .collect();
    let s = fit_rate(&ns, &ksd).unwrap();
    assert!((-0.8..=-0.25).contains(&s), "{s}");
}
