use wishart_hs::ensembles::{gram, sample_ginibre};
use wishart_hs::montecarlo::{run_and_compare, run_experiment, trial_values, ExperimentOutcome};
use wishart_hs::{EnsembleParams, ExperimentKind, ExperimentSpec, FixedMatrix, HermitianMatrix, RngStream, SummaryStat};

fn params(beta: u8, n: usize, m: usize) -> EnsembleParams {
    EnsembleParams::new(beta, n, m).unwrap()
}

fn within_3se(spec: &ExperimentSpec, want: f64) {
    let r = run_and_compare(spec).unwrap();
    assert_eq!(r.analytic, want);
    assert!(r.within(3.0), "z = {} for {:?}", r.z_score, spec.kind);
    assert_eq!(r.empirical.count, spec.trials);
}

#[test]
fn spot_values() {
    let p = params(2, 2, 2);
    within_3se(
        &ExperimentSpec::new(ExperimentKind::WishartVsFixed, p, 100_000, 11).with_fixed(HermitianMatrix::zeros(2)),
        16.0,
    );
    let sigma = FixedMatrix::MaximallyMixed.build(p.beta(), 2).unwrap();
    let r = run_and_compare(&ExperimentSpec::new(ExperimentKind::RhoVsFixed, p, 100_000, 12).with_fixed(sigma)).unwrap();
    assert!((r.analytic - 0.3).abs() < 1e-15 && r.within(3.0));
    within_3se(&ExperimentSpec::new(ExperimentKind::WishartPair, p, 100_000, 13).with_pair(params(2, 2, 3)), 22.0);
    let r = run_and_compare(&ExperimentSpec::new(ExperimentKind::RhoPair, p, 100_000, 14).with_pair(p)).unwrap();
    assert!((r.analytic - 0.6).abs() < 1e-15 && r.within(3.0));
    let r = run_and_compare(&ExperimentSpec::new(ExperimentKind::Purity, p, 100_000, 15)).unwrap();
    assert!((r.analytic - 0.8).abs() < 1e-15 && r.within(3.0));
}

#[test]
fn mean_ginibre_trace_is_nm() {
    for (beta, n, m) in [(1u8, 2usize, 3usize), (2, 2, 2), (2, 5, 7)] {
        let p = params(beta, n, m);
        let xs: Vec<f64> = (0..50_000).map(|i| gram(&sample_ginibre(&p, &mut RngStream::for_trial(5, i))).trace()).collect();
        let s = SummaryStat::from_samples(&xs);
        let want = (n * m) as f64;
        assert!(((s.mean - want) / s.std_error).abs() < 4.0, "beta={beta}: {} vs {want}", s.mean);
    }
}

#[test]
fn identical_results_for_any_thread_count() {
    let p = params(1, 5, 6);
    let spec = ExperimentSpec::new(ExperimentKind::WishartVsFixed, p, 5_000, 77)
        .with_fixed(FixedMatrix::ReferenceX5.build(p.beta(), 5).unwrap());
    let hist_spec = ExperimentSpec::new(ExperimentKind::EigDensityHistogram, params(2, 4, 6), 2_000, 3).with_bins(20);
    let on = |threads: usize, s: &ExperimentSpec| -> ExperimentOutcome {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| run_experiment(s).unwrap())
    };
    for s in [&spec, &hist_spec] {
        let reference = on(1, s);
        for threads in [2, 3, 8] {
            let other = on(threads, s);
            assert_eq!(other.stat.mean.to_bits(), reference.stat.mean.to_bits());
            assert_eq!(other.stat.std_error.to_bits(), reference.stat.std_error.to_bits());
            assert_eq!(other.histogram, reference.histogram);
        }
    }
}

#[test]
fn standard_error_scales_with_trials() {
    let p = params(2, 3, 4);
    let se = |trials: u64| {
        let spec = ExperimentSpec::new(ExperimentKind::RhoPair, p, trials, 21).with_pair(p);
        run_experiment(&spec).unwrap().stat.std_error
    };
    let ratio = se(4_000) / se(16_000);
    assert!((ratio / 2.0 - 1.0).abs() < 0.2, "ratio {ratio}");
}

#[test]
fn batch_means_average_to_global_mean() {
    let p = params(2, 2, 3);
    let spec = ExperimentSpec::new(ExperimentKind::Purity, p, 4096, 8);
    let values = trial_values(&spec).unwrap();
    let global = run_experiment(&spec).unwrap().stat.mean;
    for batches in [2usize, 8, 64] {
        let means: Vec<f64> = values.chunks(values.len() / batches).map(|c| SummaryStat::from_samples(c).mean).collect();
        assert_eq!(SummaryStat::from_samples(&means).mean, global);
    }
}

#[test]
fn histogram_matches_density_for_small_matrices() {
    let p = params(2, 3, 5);
    let spec = ExperimentSpec::new(ExperimentKind::EigDensityHistogram, p, 20_000, 4).with_bins(40);
    let out = run_experiment(&spec).unwrap();
    let hist = out.histogram.unwrap();
    assert_eq!(hist.total, 60_000);
    let density = wishart_hs::analytic::EigenvalueDensity::new(&p).unwrap();
    assert!(hist.l1_distance(&density) < 0.05);
}
