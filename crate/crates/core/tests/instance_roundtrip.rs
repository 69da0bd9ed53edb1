use cas_pfsp::model::{instance_to_json, load_instance, parse_instance, save_instance};
use cas_pfsp::rng::stream;
use cas_pfsp::Error;
use proptest::prelude::*;

mod common;

proptest! {
    #[test]
    fn save_then_load_is_identity(seed in any::<u64>(), machines in 1usize..4, jobs in 1usize..6) {
        let inst = common::random_instance(&mut stream(seed, &[]), machines, jobs, 6, 5);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("i.json");
        save_instance(&inst, &path).unwrap();
        let back = load_instance(&path).unwrap();
        prop_assert_eq!(back, inst);
    }

    #[test]
    fn loader_accepts_generated_and_rejects_broken(seed in any::<u64>(), which in 0usize..4) {
        let inst = common::random_instance(&mut stream(seed, &[]), 2, 3, 4, 2);
        prop_assert!(parse_instance(&instance_to_json(&inst)).is_ok());
        let mut broken = inst.clone();
        let field = match which {
            0 => { broken.carbon.pop(); "carbon" }
            1 => { broken.onsite[0] = -1.0; "onsite" }
            2 => { broken.jobs[0].operations.pop(); "jobs" }
            _ => { broken.prices.as_mut().unwrap().push(0.1); "prices" }
        };
        match parse_instance(&instance_to_json(&broken)) {
            Err(Error::Validation { field: f, .. }) => prop_assert!(f.starts_with(field), "{} vs {}", f, field),
            other => prop_assert!(false, "expected a validation error, got {:?}", other),
        }
    }
}
