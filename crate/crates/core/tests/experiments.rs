mod common;

use lwshrink::experiments::*;
use lwshrink::*;

fn grid(
    ps: Vec<usize>,
    ns: Vec<usize>,
    distribution: Distribution,
    sigma_mode: SigmaMode,
    n_mc: usize,
    seed: u64,
) -> ExperimentConfig {
    let mut config = ExperimentConfig::desk_grid(distribution, sigma_mode);
    config.mode = Mode::Grid { ps, ns };
    config.n_mc = n_mc;
    config.base_seed = seed;
    config
}

#[test]
fn ec_loss_matches_beta2_in_harness() {
    let mut config = grid(
        vec![5],
        vec![20],
        Distribution::Gaussian,
        SigmaMode::Identity,
        10_000,
        1,
    );
    config.estimators = vec![EstimatorId::Ec];
    let s = &run_grid(&config).unwrap()[0];
    let r = s.record(EstimatorId::Ec).unwrap();
    assert!((r.mean_loss - 6.0 / 19.0).abs() <= 4.0 * r.std_err, "{r:?}");
}

#[test]
fn reduced_grid_is_complete() {
    let config = grid(
        vec![5, 15, 25],
        vec![5, 15, 25],
        Distribution::Gaussian,
        SigmaMode::Identity,
        100,
        2,
    );
    let summaries = run_grid(&config).unwrap();
    assert_eq!(summaries.len(), 9);
    for s in &summaries {
        for e in &config.estimators {
            let r = s.record(*e).unwrap();
            assert_eq!(r.n_mc, 100);
            assert!(r.mean_loss >= 0.0);
        }
    }
}

#[test]
fn cell_invariants_hold_under_wishart_draws() {
    let config = grid(
        vec![5, 25],
        vec![5, 25],
        Distribution::Student { nu: 10.0 },
        SigmaMode::Wishart,
        300,
        3,
    );
    for s in run_grid(&config).unwrap() {
        for v in Variant::ALL {
            let d = s.paired_diff(EstimatorId::LwOp, EstimatorId::Lw(v)).unwrap();
            assert!(d.mean <= 2.0 * d.std_err);
        }
        let ex = s.record(EstimatorId::LwEx).unwrap();
        let expected = s.expected_ex_loss.unwrap();
        assert!(
            (ex.mean_loss - expected).abs() <= 4.0 * ex.std_err,
            "{ex:?} vs {expected}"
        );
        for range in s.intensity_range.iter().flatten() {
            assert!(0.0 <= range.0 && range.1 <= 1.0);
        }
    }
}

#[test]
fn identity_oracles_vanish() {
    let config = grid(vec![7], vec![9], Distribution::Gaussian, SigmaMode::Identity, 50, 4);
    let s = &run_grid(&config).unwrap()[0];
    assert_eq!(s.record(EstimatorId::LwEx).unwrap().mean_loss, 0.0);
    assert!(s.record(EstimatorId::LwOp).unwrap().mean_loss < 1e-28);
}

#[test]
fn shrinkage_s_beats_u_somewhere_with_more_samples_than_dimensions() {
    let config = grid(
        vec![5, 15, 25],
        vec![15, 25, 35, 45],
        Distribution::Gaussian,
        SigmaMode::Wishart,
        1000,
        5,
    );
    let summaries = run_grid(&config).unwrap();
    let found = summaries.iter().filter(|s| s.cell.n > s.cell.p).any(|s| {
        let d = s
            .paired_diff(EstimatorId::Lw(Variant::S), EstimatorId::Lw(Variant::U))
            .unwrap();
        d.mean < 0.0
    });
    assert!(found);
}

#[test]
fn gaps_widen_with_concentration() {
    let gap = |c: f64| {
        let mut config =
            ExperimentConfig::desk_convergence(Distribution::Gaussian, SigmaMode::Identity, vec![c], vec![20]);
        config.n_mc = 500;
        config.base_seed = 6;
        let s = &run_convergence(&config).unwrap()[0];
        let losses: Vec<f64> = Variant::ALL
            .iter()
            .map(|v| s.record(EstimatorId::Lw(*v)).unwrap().mean_loss)
            .collect();
        losses.iter().cloned().fold(f64::MIN, f64::max) - losses.iter().cloned().fold(f64::MAX, f64::min)
    };
    assert!(gap(4.0) > gap(0.25));
}

#[test]
fn same_seed_same_table_any_thread_count() {
    let mut config = ExperimentConfig::desk_convergence(
        Distribution::Student { nu: 6.0 },
        SigmaMode::Wishart,
        vec![0.5, 2.0],
        vec![8, 12],
    );
    config.n_mc = 40;
    config.base_seed = 99;
    let render = |threads| {
        let mut c = config.clone();
        c.threads = Some(threads);
        let mut out = Vec::new();
        write_loss_csv(&run_convergence(&c).unwrap(), &mut out).unwrap();
        out
    };
    let one = render(1);
    assert_eq!(one, render(4));
    assert_eq!(one, render(1));
    config.base_seed = 100;
    let mut other = Vec::new();
    write_loss_csv(&run_convergence(&config).unwrap(), &mut other).unwrap();
    assert_ne!(one, other);
}

#[test]
fn mixed_student_runs_without_lw_ex() {
    let mixed = Distribution::MixedStudent {
        nu_first: 15.0,
        nu_second: 8.5,
    };
    let mut config = grid(vec![6], vec![10], mixed, SigmaMode::Wishart, 30, 7);
    assert!(run_grid(&config).is_ok());
    config.estimators.push(EstimatorId::LwEx);
    assert!(matches!(run_grid(&config), Err(Error::InvalidConfig(_))));
}

fn timed_cell(p: usize, n: usize, estimators: Vec<EstimatorId>) -> Vec<f64> {
    let mut config = grid(vec![p], vec![n], Distribution::Gaussian, SigmaMode::Identity, 60, 8);
    config.estimators = estimators;
    config.threads = Some(1);
    config.timing = true;
    run_grid(&config).unwrap()[0]
        .records
        .iter()
        .map(|r| r.mean_time_s.unwrap())
        .collect()
}

#[test]
fn sample_covariance_is_cheaper_than_any_variant() {
    let mut estimators = vec![EstimatorId::Ec];
    estimators.extend(Variant::ALL.map(EstimatorId::Lw));
    let times = timed_cell(50, 50, estimators);
    assert!(times[1..].iter().all(|&t| times[0] < t), "{times:?}");
}

#[test]
fn time_grows_superlinearly_in_dimension() {
    let small = timed_cell(100, 50, vec![EstimatorId::Lw(Variant::U)])[0];
    let large = timed_cell(400, 50, vec![EstimatorId::Lw(Variant::U)])[0];
    let slope = (large / small).ln() / 4f64.ln();
    assert!(slope > 1.0, "slope {slope}");
}
