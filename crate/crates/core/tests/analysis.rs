use proptest::prelude::*;

use qexplore::analysis::{
    asymmetry, duration_sweep, export_solutions, import_solutions, learning_curve, normalized_pulse, read_pulse_csv,
    success_fraction, symmetry_trajectory, sweep_row, write_pulse_csv, write_sweep_csv, Solution,
};
use qexplore::quantum::PulseSequence;
use qexplore::record::{OptimizationRecord, Pulse, Stage};
use qexplore::Error;

fn record(index: u64, stage: Stage, fidelity: f64, pulse: Pulse) -> OptimizationRecord {
    OptimizationRecord {
        optimizer: "test".into(),
        index,
        group: 0,
        stage,
        parent: None,
        elapsed: index as f64,
        fidelity,
        pulse,
        seed: 3,
        config_hash: "abc".into(),
    }
}

fn reference_asymmetry(a: &[f64]) -> f64 {
    let rev: Vec<f64> = a.iter().rev().copied().collect();
    let sq: f64 = a.iter().zip(&rev).map(|(x, y)| (x - y) * (x - y)).sum();
    sq.sqrt() / a.len() as f64
}

#[test]
fn asymmetry_of_a_step() {
    // Pairs (1,0) and (0,1) each contribute 1: sqrt(2) / 4.
    assert!((asymmetry(&[1.0, 0.0, 0.0, 0.0]) - 2f64.sqrt() / 4.0).abs() < 1e-15);
    assert_eq!(asymmetry(&[]), 0.0);
    assert_eq!(asymmetry(&[0.4]), 0.0);
}

#[test]
fn success_fraction_counts_within_four_times_best() {
    assert!((success_fraction(&[1e-4, 3e-4, 5e-4]).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    assert_eq!(success_fraction(&[1e-4, 4e-4]).unwrap(), 1.0);
    assert_eq!(success_fraction(&[2e-3]).unwrap(), 1.0);
    assert!(matches!(success_fraction(&[]), Err(Error::Domain(_))));
    assert!(matches!(success_fraction(&[1e-3, f64::NAN]), Err(Error::Domain(_))));
}

#[test]
fn learning_curve_skips_intermediate_stages() {
    let recs = vec![
        record(0, Stage::Episode, 0.5, Pulse::Actions(vec![0, 1])),
        record(1, Stage::Iterate, 0.99, Pulse::Amplitudes(vec![0.1, 0.2])),
        record(2, Stage::Seed, 0.98, Pulse::Amplitudes(vec![0.1, 0.2])),
        record(3, Stage::Final, 0.9, Pulse::Amplitudes(vec![0.1, 0.2])),
        record(4, Stage::Episode, 0.7, Pulse::Actions(vec![1, 1])),
    ];
    let curve = learning_curve(&recs);
    let elapsed: Vec<f64> = curve.iter().map(|p| p.elapsed).collect();
    assert_eq!(elapsed, vec![0.0, 3.0, 4.0]);
    assert!((curve[2].best - 0.1).abs() < 1e-15);
    assert!((curve[2].infidelity - 0.3).abs() < 1e-15);
}

#[test]
fn sweep_rows_follow_the_solutions() {
    let rows = duration_sweep(&[10e-9, 20e-9], |d| {
        let f = if d < 15e-9 { [0.9, 0.95, 0.99] } else { [0.999, 0.9995, 0.5] };
        Ok(f.iter()
            .enumerate()
            .map(|(i, &f)| record(i as u64, Stage::Episode, f, Pulse::Bits(vec![0])))
            .collect())
    })
    .unwrap();
    assert_eq!(rows.len(), 2);
    assert!((rows[0].best_infidelity - 0.01).abs() < 1e-12);
    assert!((rows[0].success_fraction - 1.0 / 3.0).abs() < 1e-15);
    assert!((rows[1].best_infidelity - 5e-4).abs() < 1e-12);
    assert!((rows[1].success_fraction - 2.0 / 3.0).abs() < 1e-15);

    assert!(duration_sweep(&[20e-9, 10e-9], |_| Ok(vec![])).is_err());
    assert!(duration_sweep(&[10e-9, 10e-9], |_| Ok(vec![])).is_err());
    assert!(duration_sweep(&[], |_| Ok(vec![])).is_err());
    assert!(sweep_row(1e-9, &[record(0, Stage::Iterate, 0.5, Pulse::Bits(vec![1]))]).is_err());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    write_sweep_csv(&path, &[("ga".into(), rows[0].clone()), ("sd".into(), rows[1].clone())]).unwrap();
    let text = std::fs::read_to_string(path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[1], "optimizer,duration_s,best_infidelity,success_fraction,records");
    assert!(lines[3].starts_with("sd,"));
    assert_eq!(lines[3].split(',').nth(1).unwrap().parse::<f64>().unwrap(), 20e-9);
}

#[test]
fn pulses_normalize_to_the_drive_bound() {
    let levels = [0.0, 5.0, 10.0];
    assert_eq!(normalized_pulse(&Pulse::Actions(vec![2, 0, 1]), Some(&levels), 10.0).unwrap(), vec![1.0, 0.0, 0.5]);
    assert_eq!(normalized_pulse(&Pulse::Actions(vec![2, 0]), None, 10.0).unwrap(), vec![2.0, 0.0]);
    assert_eq!(normalized_pulse(&Pulse::Amplitudes(vec![2.5]), None, 10.0).unwrap(), vec![0.25]);
    assert_eq!(normalized_pulse(&Pulse::Bits(vec![1, 0]), None, 10.0).unwrap(), vec![1.0, 0.0]);
    assert!(normalized_pulse(&Pulse::Actions(vec![3]), Some(&levels), 10.0).is_err());
}

#[test]
fn symmetry_trajectory_uses_normalized_pulses() {
    let recs = vec![
        record(0, Stage::Episode, 0.5, Pulse::Actions(vec![2, 0, 0, 0])),
        record(1, Stage::Iterate, 0.6, Pulse::Amplitudes(vec![3.0, 7.0, 3.0])),
    ];
    let traj = symmetry_trajectory(&recs, Some(&[0.0, 5.0, 10.0]), 10.0).unwrap();
    assert!((traj[0].asymmetry - 2f64.sqrt() / 4.0).abs() < 1e-15);
    assert_eq!(traj[1].asymmetry, 0.0);
    assert_eq!(traj[1].index, 1);
}

#[test]
fn mixed_length_exports_are_refused() {
    let dir = tempfile::tempdir().unwrap();
    let sols = vec![
        Solution {
            pulse: vec![0.1, 0.2],
            infidelity: 0.1,
            tag: "a".into(),
            seed: 1,
        },
        Solution {
            pulse: vec![0.1],
            infidelity: 0.1,
            tag: "b".into(),
            seed: 1,
        },
    ];
    assert!(matches!(export_solutions(&dir.path().join("s.csv"), &sols), Err(Error::Export(_))));
}

#[test]
fn pulse_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pulse.csv");
    let pulse = PulseSequence::new(vec![0.0, 1.234_567_890_123_456_7e9, 6.283e9, 1e-300], 2e-9).unwrap();
    write_pulse_csv(&path, &pulse).unwrap();
    assert_eq!(read_pulse_csv(&path).unwrap(), pulse);
}

proptest! {
    #[test]
    fn palindromes_have_zero_asymmetry(half in prop::collection::vec(-1.0f64..1.0, 0..20), mid in prop::option::of(-1.0f64..1.0)) {
        let mut v = half.clone();
        v.extend(mid);
        v.extend(half.iter().rev());
        prop_assert_eq!(asymmetry(&v), 0.0);
    }

    #[test]
    fn asymmetry_matches_reference_and_reversal(v in prop::collection::vec(-1.0f64..1.0, 1..40)) {
        let a = asymmetry(&v);
        prop_assert!((a - reference_asymmetry(&v)).abs() <= 1e-14);
        let rev: Vec<f64> = v.iter().rev().copied().collect();
        prop_assert_eq!(a, asymmetry(&rev));
    }

    #[test]
    fn envelope_never_increases(fids in prop::collection::vec((0.0f64..1.0, 0usize..6), 1..60)) {
        let stages = [Stage::Episode, Stage::Generation, Stage::Descent, Stage::Iterate, Stage::Seed, Stage::Final];
        let recs: Vec<_> = fids
            .iter()
            .enumerate()
            .map(|(i, &(f, s))| record(i as u64, stages[s], f, Pulse::Bits(vec![1])))
            .collect();
        let curve = learning_curve(&recs);
        for w in curve.windows(2) {
            prop_assert!(w[1].best <= w[0].best);
        }
        for p in &curve {
            prop_assert!(p.best <= p.infidelity);
        }
        let solutions = recs.iter().filter(|r| r.stage.is_solution()).count();
        prop_assert_eq!(curve.len(), solutions);
    }

    #[test]
    fn export_import_is_lossless(
        rows in prop::collection::vec((prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 6), 0.0f64..1.0, any::<u64>()), 1..12)
    ) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("solutions.csv");
        let sols: Vec<Solution> = rows
            .iter()
            .enumerate()
            .map(|(i, (p, inf, seed))| Solution { pulse: p.clone(), infidelity: *inf, tag: format!("cell/episode/{i}"), seed: *seed })
            .collect();
        export_solutions(&path, &sols).unwrap();
        let back = import_solutions(&path).unwrap();
        prop_assert_eq!(back.len(), sols.len());
        for (a, b) in back.iter().zip(&sols) {
            prop_assert_eq!(&a.tag, &b.tag);
            prop_assert_eq!(a.seed, b.seed);
            prop_assert_eq!(a.infidelity.to_bits(), b.infidelity.to_bits());
            for (x, y) in a.pulse.iter().zip(&b.pulse) {
                prop_assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }
}
