//! The exact mixed-integer model, its LP export, and an enumeration oracle.

mod lp;
mod model;
mod oracle;

pub use lp::{export_lp, parse_lp, write_lp};
pub use model::{
    build_milp, indicator_assignment, p_name, s_name, tau_name, x_name, y_name, Constraint, MilpModel, Sense, VarKind,
    Variable, VariableCounts,
};
pub use oracle::{exact_oracle, single_machine_space, OracleResult, SearchSpace, DEFAULT_BUDGET};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluator::{evaluate, ObjectiveKind};
    use crate::model::fixtures::table2_instance;
    use crate::model::{earliest_starts, fcfs_schedule, Instance, Job, OperationSpec, Schedule};

    fn two_jobs() -> Instance {
        Instance {
            label: "n2".into(),
            machines: 1,
            horizon: 10,
            period_hours: 0.25,
            jobs: vec![
                Job::new(vec![OperationSpec::new(vec![100.0, 200.0, 300.0])]),
                Job::new(vec![OperationSpec::new(vec![50.0; 4])]),
            ],
            carbon: vec![300.0, 280.0, 250.0, 100.0, 90.0, 120.0, 200.0, 310.0, 330.0, 350.0],
            onsite: vec![0.0, 0.0, 60.0, 80.0, 400.0, 0.0, 0.0, 10.0, 0.0, 0.0],
            prices: None,
        }
    }

    #[test]
    fn hand_counted_variables() {
        let model = build_milp(&two_jobs()).unwrap();
        let c = model.counts();
        assert_eq!((c.x, c.s, c.y, c.tau), (15, 1, 10, 2));
        // p spans [S, F + D - 1]: 10 periods for both jobs.
        assert_eq!(c.p, 20);
        assert_eq!(model.binary_count(), 16);
    }

    #[test]
    fn single_job_has_no_order_rows() {
        let mut inst = two_jobs();
        inst.jobs.truncate(1);
        let model = build_milp(&inst).unwrap();
        assert_eq!(model.counts().s, 0);
        assert!(model.constraints.iter().all(|c| !c.name.starts_with("seq")));
    }

    #[test]
    fn infeasible_window_is_reported() {
        let mut inst = two_jobs();
        // The four-period job cannot fit in three periods.
        inst.horizon = 3;
        inst.carbon.truncate(3);
        inst.onsite.truncate(3);
        assert!(build_milp(&inst).is_err());
    }

    #[test]
    fn indicator_encoding_matches_evaluator() {
        let inst = two_jobs();
        let model = build_milp(&inst).unwrap();
        for sequence in [vec![0, 1], vec![1, 0]] {
            for shift in 0..=3 {
                let mut start = earliest_starts(&inst, &sequence);
                start[sequence[1]][0] += shift;
                let schedule = Schedule::from_starts(&inst, sequence.clone(), start);
                let values = indicator_assignment(&model, &inst, &schedule).unwrap();
                assert!(model.max_violation(&values) < 1e-9);
                let direct = evaluate(&inst, &schedule, ObjectiveKind::Carbon).unwrap().value;
                let lp = model.objective_value(&values);
                assert!((lp - direct).abs() <= 1e-6 * direct.abs().max(1.0), "{lp} vs {direct}");
            }
        }
    }

    #[test]
    fn wrong_order_binary_violates_rows() {
        let inst = two_jobs();
        let model = build_milp(&inst).unwrap();
        let schedule = fcfs_schedule(&inst);
        let mut values = indicator_assignment(&model, &inst, &schedule).unwrap();
        values[model.variable_index("s_1_2").unwrap()] = 0.0;
        assert!(model.max_violation(&values) > 0.5);
    }

    #[test]
    fn lp_round_trip_and_stability() {
        let model = build_milp(&two_jobs()).unwrap();
        let text = write_lp(&model);
        assert_eq!(text, write_lp(&build_milp(&two_jobs()).unwrap()));
        let parsed = parse_lp(&text).unwrap();
        assert_eq!(parsed.counts(), model.counts());
        assert_eq!(parsed.constraints.len(), model.constraints.len());
        assert_eq!(parsed.binary_count(), model.binary_count());
        let names: Vec<_> = model.variables.iter().map(|v| v.name.as_str()).collect();
        let values: Vec<f64> = (0..names.len()).map(|i| (i % 7) as f64).collect();
        let reordered = parsed
            .assignment(names.iter().copied().zip(values.iter().copied()))
            .unwrap();
        assert_eq!(parsed.objective_value(&reordered), model.objective_value(&values));
        assert_eq!(parsed.max_violation(&reordered), model.max_violation(&values));
        for v in &parsed.variables {
            let original = &model.variables[model.variable_index(&v.name).unwrap()];
            assert_eq!(v, original);
        }
    }

    #[test]
    fn lp_sections() {
        let text = write_lp(&build_milp(&two_jobs()).unwrap());
        for header in ["Minimize", "Subject To", "Bounds", "Binaries", "End"] {
            assert!(text.lines().any(|l| l == header), "missing {header}");
        }
        assert!(text.contains(" 0 <= y_5 <= 400\n"));
        let binaries = text.split("Binaries\n").nth(1).unwrap();
        assert!(binaries.contains("x_1_1_1") && binaries.contains("s_1_2"));
        assert!(!binaries.contains("tau_"));
    }

    #[test]
    fn oracle_optimum_matches_lp_objective() {
        let inst = two_jobs();
        let model = build_milp(&inst).unwrap();
        let r = exact_oracle(&inst, ObjectiveKind::Carbon, DEFAULT_BUDGET).unwrap();
        let values = indicator_assignment(&model, &inst, &r.schedule).unwrap();
        let lp = model.objective_value(&values);
        assert!((lp - r.objective.value).abs() <= 1e-6 * r.objective.value.abs().max(1.0));
    }

    #[test]
    fn table2_model_builds() {
        let inst = table2_instance(vec![300.0; 96]);
        let model = build_milp(&inst).unwrap();
        // Job i can start anywhere in [1, 97 - D_i].
        assert_eq!(model.counts().x, 5 * 97 - 48);
        assert_eq!(model.counts().s, 10);
    }
}
