use cas_pfsp::memetic::{run, MaParams};
use cas_pfsp::milp::{exact_oracle, DEFAULT_BUDGET};
use cas_pfsp::model::{fcfs_schedule, Instance, Job, OperationSpec};
use cas_pfsp::{evaluate, ObjectiveKind};

/// Four jobs on one machine, horizon 20, intensity with a cheap valley.
fn toy() -> Instance {
    let durations = [3, 2, 4, 2];
    let carbon: Vec<f64> = (1..=20)
        .map(|t| 400.0 - 250.0 * (-(((t as f64) - 12.0) / 4.0).powi(2)).exp() + 10.0 * (t % 3) as f64)
        .collect();
    Instance {
        label: "toy".into(),
        machines: 1,
        horizon: 20,
        period_hours: 0.25,
        jobs: durations
            .iter()
            .enumerate()
            .map(|(i, &d)| Job::new(vec![OperationSpec::new(vec![200.0 + 150.0 * i as f64; d])]))
            .collect(),
        carbon,
        onsite: (1..=20)
            .map(|t| if (4..=6).contains(&t) { 300.0 } else { 0.0 })
            .collect(),
        prices: None,
    }
}

#[test]
fn memetic_meets_but_never_beats_the_oracle() {
    let inst = toy();
    let oracle = exact_oracle(&inst, ObjectiveKind::Carbon, DEFAULT_BUDGET).unwrap();
    let fcfs = evaluate(&inst, &fcfs_schedule(&inst), ObjectiveKind::Carbon).unwrap();
    assert!(oracle.objective.value <= fcfs.value);
    let mut matched = 0;
    for seed in 0..10 {
        let params = MaParams::default().with_seed(seed);
        let r = run(&inst, &params, ObjectiveKind::Carbon, None).unwrap();
        assert!(
            r.objective.fitness() >= oracle.objective.fitness(),
            "seed {seed} beat the oracle"
        );
        if r.objective.fitness() == oracle.objective.fitness() {
            matched += 1;
        }
    }
    assert!(matched >= 8, "matched {matched}/10");
}
