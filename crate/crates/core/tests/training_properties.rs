use neural_fde::data::{normalize, System};
use neural_fde::harness::synthetic_series;
use neural_fde::neuralfde::{evaluate, predict, train, AlphaMode, TrainConfig};

fn ro_desk_scale() -> neural_fde::data::TimeSeries {
    let raw = synthetic_series(System::Ro, 0.99, 20.0 / 49.0, 50).unwrap();
    normalize(&raw).unwrap().0
}

#[test]
fn loss_mostly_non_increasing_on_ro() {
    let data = ro_desk_scale();
    let cfg = TrainConfig { max_iters: 200, ..TrainConfig::default() };
    let (_, h) = train(&data, &cfg).unwrap();
    let steps = h.loss.windows(2).count();
    let down = h.loss.windows(2).filter(|w| w[1] <= w[0]).count();
    assert!(down as f64 >= 0.6 * steps as f64, "{down} of {steps}");
    assert!(h.final_loss < h.loss[0]);
}

#[test]
fn alpha_stays_in_unit_interval_for_both_modes() {
    let data = ro_desk_scale();
    for (mode, lr) in [(AlphaMode::ScalarLogit, 5e-2), (AlphaMode::TinyNet, 5e-2)] {
        let cfg = TrainConfig { max_iters: 40, lr, alpha_mode: mode, hidden: vec![16, 16], ..TrainConfig::default() };
        let (model, h) = train(&data, &cfg).unwrap();
        for a in h.alpha.iter().flatten().chain(model.alpha().as_ref()) {
            assert!(*a > 0.0 && *a < 1.0, "{mode:?}: {a}");
        }
    }
}

#[test]
fn evaluate_on_training_set_matches_final_loss() {
    let data = ro_desk_scale();
    let cfg = TrainConfig { max_iters: 20, hidden: vec![16, 16], ..TrainConfig::default() };
    let (model, h) = train(&data, &cfg).unwrap();
    let mse = evaluate(&model, &data, model.solver_dt).unwrap();
    assert!((mse - h.final_loss).abs() <= 1e-10);
    let traj = predict(&model, model.t0, 30.0, model.solver_dt).unwrap();
    assert!(traj.grid().last() >= 30.0 - 1e-9);
}

#[test]
fn same_seed_same_history() {
    let data = ro_desk_scale();
    let cfg = TrainConfig { max_iters: 15, hidden: vec![16, 16], seed: 42, ..TrainConfig::default() };
    let (m1, h1) = train(&data, &cfg).unwrap();
    let (m2, h2) = train(&data, &cfg).unwrap();
    assert_eq!(h1.loss.iter().map(|l| l.to_bits()).collect::<Vec<_>>(), h2.loss.iter().map(|l| l.to_bits()).collect::<Vec<_>>());
    assert_eq!(h1.alpha, h2.alpha);
    assert_eq!(m1, m2);
}
