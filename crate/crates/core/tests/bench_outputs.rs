use std::collections::BTreeMap;

use nhtrack::bench::{
    emit_results, markdown, mean_std, run_experiment, run_trial, summary_csv, trials_csv,
    ExperimentSpec, OutputFormat, Sweep, SweepParam, SUMMARY_HEADER, TRIALS_HEADER,
};
use nhtrack::trackers::TrackerKind;
use nhtrack::world::WorldConfig;

fn small(trials: usize) -> ExperimentSpec {
    ExperimentSpec {
        world: WorldConfig {
            horizon: 30,
            ..Default::default()
        },
        trials,
        sigma_o_list: vec![1.0, 8.0],
        rho_list: vec![0.0, 0.2],
        base_seed: 3,
        ..Default::default()
    }
}

#[test]
fn trials_are_deterministic_and_isolated() {
    let spec = small(4);
    let a = run_trial(&spec, 1.0, 0.2, 2).unwrap();
    let b = run_trial(&spec, 1.0, 0.2, 2).unwrap();
    assert_eq!(a, b);

    // a single tracker sees the same trace and streams as in the full run
    let solo = ExperimentSpec {
        trackers: vec![TrackerKind::Pf],
        ..small(4)
    };
    let s = run_trial(&solo, 1.0, 0.2, 2).unwrap();
    assert_eq!(s.len(), 1);
    assert_eq!(
        s[0],
        *a.iter().find(|r| r.tracker == TrackerKind::Pf).unwrap()
    );

    // trial k does not depend on how many trials are run
    let full = run_experiment(&small(4)).unwrap();
    let fewer = run_experiment(&small(2)).unwrap();
    for c in &fewer.cells {
        let big = full.cell(c.tracker, c.sigma_o, c.rho).unwrap();
        assert_eq!(c.rmses[..], big.rmses[..2]);
    }
}

#[test]
fn summary_matches_trials_csv() {
    let result = run_experiment(&small(5)).unwrap();
    let trials = trials_csv(&result);
    let mut lines = trials.lines();
    assert_eq!(lines.next(), Some(TRIALS_HEADER));
    let mut groups: BTreeMap<(String, String, String), Vec<f64>> = BTreeMap::new();
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        groups
            .entry((f[0].into(), f[1].into(), f[2].into()))
            .or_default()
            .push(f[6].parse().unwrap());
    }
    let summary = summary_csv(&result);
    let mut lines = summary.lines();
    assert_eq!(lines.next(), Some(SUMMARY_HEADER));
    let mut seen = 0;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let rmses = &groups[&(f[0].into(), f[1].into(), f[2].into())];
        let (m, s) = mean_std(rmses);
        assert!((m - f[3].parse::<f64>().unwrap()).abs() <= 1e-12);
        assert!((s - f[4].parse::<f64>().unwrap()).abs() <= 1e-12);
        assert_eq!(f[5].parse::<usize>().unwrap(), rmses.len());
        seen += 1;
    }
    assert_eq!(seen, groups.len());
    assert_eq!(seen, 3 * 2 * 2);
}

#[test]
fn single_trial_has_zero_std() {
    let result = run_experiment(&small(1)).unwrap();
    assert!(result
        .cells
        .iter()
        .all(|c| c.std_rmse == 0.0 && c.trials() == 1));
}

#[test]
fn markdown_layout() {
    let result = run_experiment(&small(2)).unwrap();
    let md = markdown(&result);
    assert!(md.starts_with("### sigma_o = 1\n"), "{md}");
    assert!(md.contains("### sigma_o = 8\n"));
    let header = md.lines().find(|l| l.starts_with('|')).unwrap();
    for col in ["NH", "Bayes", "PF"] {
        assert!(header.contains(col), "{header}");
    }
    let rows = md.lines().filter(|l| l.starts_with("| 0.2")).count();
    assert_eq!(rows, 2);
    assert!(md.contains(" ± "));
}

#[test]
fn emitted_files_are_reproducible() {
    let result = run_experiment(&small(2)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let a = emit_results(&result, &dir.path().join("a"), OutputFormat::Csv).unwrap();
    let b = emit_results(&result, &dir.path().join("b"), OutputFormat::Csv).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
    }
    let md = emit_results(&result, &dir.path().join("m"), OutputFormat::Md).unwrap();
    assert!(md[0].ends_with("summary.md"));
}

#[test]
fn sweep_produces_one_cell_per_value() {
    let spec = ExperimentSpec {
        sweep: Some(Sweep {
            param: SweepParam::Alpha,
            values: vec![0.0, 0.02, 0.1],
        }),
        sigma_o_list: vec![1.0],
        rho_list: vec![0.1],
        ..small(2)
    };
    let result = run_experiment(&spec).unwrap();
    assert_eq!(result.cells.len(), 3);
    for v in [0.0, 0.02, 0.1] {
        assert!(result.sweep_cell(1.0, 0.1, v).is_some());
    }
    assert!(summary_csv(&result).starts_with("tracker,sigma_o,rho,sweep_param,sweep_value,"));
}

#[test]
fn invalid_specs_are_rejected() {
    let bad = ExperimentSpec {
        sigma_o_list: vec![0.0],
        ..small(1)
    };
    assert!(run_experiment(&bad).is_err());
    let bad = ExperimentSpec {
        workers: Some(0),
        ..small(1)
    };
    assert!(run_experiment(&bad).is_err());
}
