use legfol::scenario::{bundled, parse_scenario, run_scenario, CheckOp, RunOptions};

#[test]
fn bundled_scenarios_pass_and_carry_anchors() {
    for (name, src) in bundled() {
        let s = parse_scenario(src).unwrap_or_else(|e| panic!("{name}: {e:?}"));
        assert_eq!(&s.name, name);
        let report = run_scenario(&s, &RunOptions::default());
        assert!(report.passed, "{}", report.summary_table());
        for r in &report.records {
            let op = CheckOp::from_name(&r.check).unwrap();
            assert_eq!(r.anchor, op.anchor());
            assert!(r.max_residual.is_none_or(f64::is_finite));
        }
    }
}

#[test]
fn every_check_op_is_exercised() {
    let mut seen: Vec<&str> = bundled()
        .iter()
        .flat_map(|(_, src)| parse_scenario(src).unwrap().checks)
        .map(|c| c.op.name())
        .collect();
    seen.sort_unstable();
    seen.dedup();
    let mut all: Vec<&str> = CheckOp::ALL.iter().map(|op| op.name()).collect();
    all.sort_unstable();
    assert_eq!(seen, all);
}

#[test]
fn reports_are_deterministic_per_seed() {
    for (name, src) in bundled() {
        let s = parse_scenario(src).unwrap();
        let opts = RunOptions {
            seed: Some(1234),
            ..Default::default()
        };
        assert_eq!(
            run_scenario(&s, &opts).to_json_untimed(),
            run_scenario(&s, &opts).to_json_untimed(),
            "{name}"
        );
    }
}

#[test]
fn samples_override_applies_to_random_grids() {
    let src = bundled()
        .iter()
        .find(|(n, _)| *n == "claim-identities-n2")
        .unwrap()
        .1;
    let s = parse_scenario(src).unwrap();
    let r = run_scenario(
        &s,
        &RunOptions {
            samples: Some(13),
            ..Default::default()
        },
    );
    assert!(r.records.iter().all(|rec| rec.samples == 13));
}
