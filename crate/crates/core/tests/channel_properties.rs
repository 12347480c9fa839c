mod common;

use common::{channel_mi, matrix_mutual_information, random_instance};
use greedy_degrade::{apply_degrading_map, mutual_information, to_posterior_form, Channel, DegradingMap, InputDistribution};
use proptest::prelude::*;

fn channel_strategy() -> impl Strategy<Value = (Channel, InputDistribution)> {
    (2usize..5, 2usize..12).prop_flat_map(|(k, n)| {
        (
            prop::collection::vec(prop::collection::vec(0.0f64..1.0, n), k),
            prop::collection::vec(0.01f64..1.0, k),
        )
            .prop_filter_map("degenerate rows", |(rows, input)| {
                let ch = Channel::renormalized(rows).ok()?;
                let input = InputDistribution::renormalized(input).ok()?;
                Some((ch, input))
            })
    })
}

proptest! {
    #[test]
    fn posterior_round_trip((ch, input) in channel_strategy()) {
        let pc = to_posterior_form(&ch, &input).unwrap();
        let direct = channel_mi(&ch, &input);
        prop_assert!((pc.mutual_information() - direct).abs() <= 1e-12);
        let masses: f64 = pc.letters().iter().map(|l| l.mass()).sum();
        prop_assert!((masses - 1.0).abs() <= 1e-12);
        for l in pc.letters() {
            prop_assert!(l.mass() > 0.0);
            prop_assert!((l.posterior().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
        let mi = mutual_information(&ch, &input).unwrap();
        prop_assert!(mi >= 0.0 && mi <= (input.len() as f64).ln() + 1e-12);
    }

    #[test]
    fn data_processing(
        (ch, input) in channel_strategy(),
        labels in prop::collection::vec(0usize..4, 12),
    ) {
        let n = ch.num_outputs();
        // compact labels so the map is onto 0..m
        let mut seen = Vec::new();
        let assignment: Vec<usize> = labels[..n]
            .iter()
            .map(|l| match seen.iter().position(|s| s == l) {
                Some(i) => i,
                None => { seen.push(*l); seen.len() - 1 }
            })
            .collect();
        let map = DegradingMap::new(assignment, seen.len()).unwrap();
        let q = apply_degrading_map(&ch, &map).unwrap();
        for (row_w, row_q) in ch.rows().iter().zip(q.rows()) {
            let sw: f64 = row_w.iter().sum();
            let sq: f64 = row_q.iter().sum();
            prop_assert!((sw - sq).abs() <= 1e-12);
        }
        let before = mutual_information(&ch, &input).unwrap();
        let after = mutual_information(&q, &input).unwrap();
        prop_assert!(after <= before + 1e-12);
    }
}

#[test]
fn posterior_form_handles_many_outputs() {
    let (ch, input, pc) = random_instance(3, 5000, 99);
    assert_eq!(pc.len(), 5000);
    let total: f64 = pc.letters().iter().map(|l| l.mass()).sum();
    assert!((total - 1.0).abs() < 1e-12);
    assert!((pc.mutual_information() - matrix_mutual_information(ch.rows(), input.probs())).abs() < 1e-12);
}
