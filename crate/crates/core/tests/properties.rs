use hawkes_core::cascade_io::{parse_cascade, write_events, ParseOptions};
use hawkes_core::kernels::{ExponentialParams, KernelSpec, MarkDistribution, MarkedPowerLawParams};
use hawkes_core::poisson::ExponentialLaw;
use hawkes_core::process::{compensator, intensity_at, intensity_right_limit, BackgroundSpec, Event, EventSequence, HawkesModel};
use hawkes_core::simulation::{simulate_cluster, simulate_thinning, MarkSource, SimulationConfig, StopRule};
use hawkes_core::HawkesError;
use proptest::prelude::*;

fn cascade_strategy() -> impl Strategy<Value = EventSequence> {
    prop::collection::vec((1e-9f64..100.0, 1.0f64..1e7, any::<bool>(), any::<prop::sample::Index>()), 0..40)
        .prop_map(|steps| {
            let mut events = vec![Event::new(0.0, 10.0)];
            let mut t = 0.0;
            for (gap, mark, linked, idx) in steps {
                t += gap;
                let parent = linked.then(|| idx.index(events.len()));
                events.push(Event { time: t, mark, parent });
            }
            EventSequence::new(events, t).unwrap()
        })
}

fn render(seq: &EventSequence) -> String {
    let mut buf = Vec::new();
    write_events(seq, &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

fn mpl_model() -> impl Strategy<Value = HawkesModel> {
    (0.01f64..2.0, 0.0f64..1.0, 0.1f64..50.0, 0.1f64..2.0, 0.0f64..3.0).prop_map(|(k, b, c, th, rate)| {
        let kernel: KernelSpec = MarkedPowerLawParams::new(k, b, c, th).unwrap().into();
        let background = if rate > 0.0 { BackgroundSpec::Constant { rate } } else { BackgroundSpec::Zero };
        HawkesModel::new(background, kernel).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn csv_round_trip(seq in cascade_strategy()) {
        let parsed = parse_cascade(render(&seq).as_bytes(), &ParseOptions::default()).unwrap();
        prop_assert_eq!(parsed, seq);
    }

    #[test]
    fn mutated_rows_are_reported(seq in cascade_strategy(), kind in 0usize..4, pick in any::<prop::sample::Index>()) {
        prop_assume!(seq.len() >= 3);
        let text = render(&seq);
        let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
        // rows are 1-based and row r sits on line r + 1
        let row = 2 + pick.index(seq.len() - 1);
        let mut fields: Vec<String> = lines[row].split(',').map(str::to_string).collect();
        match kind {
            0 => fields[0] = "-1".into(),
            1 => fields[1] = "0.5".into(),
            2 => fields[0] = "not-a-time".into(),
            _ => fields[0] = format!("{}", seq.events()[row - 2].time),
        }
        lines[row] = fields.join(",");
        let mutated = lines.join("\n") + "\n";
        match parse_cascade(mutated.as_bytes(), &ParseOptions::default()) {
            Err(HawkesError::Validation { row: r, line, .. }) => {
                prop_assert_eq!(r, row as u64);
                prop_assert_eq!(line, row as u64 + 1);
            }
            other => prop_assert!(false, "expected a validation error, got {:?}", other),
        }
    }

    #[test]
    fn exponential_cdf_and_survival_sum_to_one(rate in 1e-3f64..1e3, t in 0.0f64..1e3) {
        let law = ExponentialLaw::new(rate).unwrap();
        prop_assert_eq!(law.cdf(t) + law.survival(t), 1.0);
    }

    #[test]
    fn compensator_is_additive(model in mpl_model(), seq in cascade_strategy(), s in 0.0f64..1.0, u in 0.0f64..1.0) {
        let end = seq.observation_end();
        let (a, b) = if s < u { (s * end, u * end) } else { (u * end, s * end) };
        let whole = compensator(&model, &seq, 0.0, end).unwrap();
        let split = compensator(&model, &seq, 0.0, a).unwrap()
            + compensator(&model, &seq, a, b).unwrap()
            + compensator(&model, &seq, b, end).unwrap();
        prop_assert!((whole - split).abs() <= 1e-9 * whole.max(1.0), "{} vs {}", whole, split);
    }

    #[test]
    fn jump_at_event_is_kernel_at_zero(model in mpl_model(), seq in cascade_strategy(), pick in any::<prop::sample::Index>()) {
        let e = seq.events()[pick.index(seq.len())];
        let left = intensity_at(&model, &seq, e.time).unwrap();
        let right = intensity_right_limit(&model, &seq, e.time).unwrap();
        let jump = model.kernel.value(e.mark, 0.0).unwrap();
        prop_assert!((right - left - jump).abs() <= 1e-12 * right.max(1.0));
    }

    #[test]
    fn pareto_marks_are_at_least_one(alpha in 1.01f64..6.0, u in 1e-300f64..1.0) {
        prop_assert!(MarkDistribution::new(alpha).unwrap().sample(u) >= 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn simulation_is_reproducible(seed in any::<u64>(), alpha in 0.0f64..0.9) {
        let model = HawkesModel::new(
            BackgroundSpec::Constant { rate: 1.0 },
            ExponentialParams::new(alpha, 1.0).unwrap().into(),
        ).unwrap();
        let cfg = SimulationConfig::new(StopRule::Horizon(50.0), seed);
        let a = simulate_thinning(&model, &cfg).unwrap();
        let b = simulate_thinning(&model, &cfg).unwrap();
        prop_assert_eq!(&a, &b);
        let seq = a.to_event_sequence().unwrap();
        prop_assert!(seq.events().iter().enumerate().all(|(i, e)| e.parent.is_none_or(|p| p < i)));
    }

    #[test]
    fn cluster_generations_follow_parents(seed in any::<u64>()) {
        let dist = MarkDistribution::new(2.5).unwrap();
        let model = HawkesModel::new(
            BackgroundSpec::Zero,
            MarkedPowerLawParams::new(0.3, 0.5, 1.0, 1.0).unwrap().into(),
        ).unwrap();
        let cfg = SimulationConfig::new(StopRule::Horizon(1e4), seed).with_marks(MarkSource::ParetoDraw(dist));
        let c = simulate_cluster(&model, Event::new(0.0, 50.0), &cfg).unwrap();
        prop_assert_eq!(c.generation[0], 0);
        for (i, e) in c.events.iter().enumerate().skip(1) {
            let p = e.parent.expect("offspring have parents");
            prop_assert_eq!(c.generation[i], c.generation[p] + 1);
        }
    }
}
