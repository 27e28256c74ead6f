use osd::dataset::{dist, Dataset, Labels};
use osd::detectors::DetectorKind;
use osd::pipeline::{evaluate, run_and_evaluate, run_osd, Ablation, EvalReport, RunConfig};
use osd::synth;

fn outlier_normal(ds: &Dataset, l: &Labels) -> (f64, f64) {
    let (mut min, mut sum, mut cnt) = (f64::INFINITY, 0.0, 0.0);
    for i in (0..ds.count()).filter(|&i| l.is_outlier(i)) {
        for j in (0..ds.count()).filter(|&j| !l.is_outlier(j)) {
            let d = dist(ds.point(i), ds.point(j));
            min = min.min(d);
            sum += d;
            cnt += 1.0;
        }
    }
    (min, sum / cnt)
}

fn k5() -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.explosion.k = Some(5);
    cfg
}

#[test]
fn outliers_end_farther_from_normals_than_they_started() {
    let mut failures = Vec::new();
    for seed in 0..20 {
        let (raw, l) = synth::gen_clusters_outliers(2, 50, 5, 2, 28.0, seed).unwrap();
        let cfg = k5();
        let x = cfg.prepare(&raw);
        let out = run_osd(&x, &cfg).unwrap();
        let (before, after) = (outlier_normal(&x, &l).0, outlier_normal(&out.data, &l).0);
        if after <= before {
            failures.push((seed, before, after));
        }
    }
    assert!(failures.is_empty(), "{failures:?}");
}

#[test]
fn repulsion_does_not_pull_outliers_back() {
    let mut failures = Vec::new();
    for seed in 0..50 {
        let (raw, l) = synth::gen_clusters_outliers(3, 60, 9, 2, 10.0, 100 + seed).unwrap();
        let cfg = RunConfig::default();
        let out = run_osd(&cfg.prepare(&raw), &cfg).unwrap();
        let (exploded, repelled) = (
            outlier_normal(&out.exploded, &l).1,
            outlier_normal(&out.data, &l).1,
        );
        if repelled < exploded {
            failures.push((seed, exploded, repelled));
        }
    }
    assert!(failures.is_empty(), "{failures:?}");
}

#[test]
fn transform_needs_no_labels() {
    // the transform's signature takes no labels: outputs are a function of
    // the data and the configuration alone
    let (raw, l) = synth::gen_clusters_outliers(2, 40, 4, 2, 12.0, 1).unwrap();
    let cfg = RunConfig::default();
    let a = run_osd(&cfg.prepare(&raw), &cfg).unwrap();
    let flipped = Labels::new(l.flags().iter().map(|b| !b).collect());
    let (_, b, _) = run_and_evaluate(&raw, &flipped, &cfg).unwrap();
    assert_eq!(a.data, b.data);
}

#[test]
fn full_pipeline_is_bit_identical_across_runs() {
    let (raw, l) = synth::gen_clusters_outliers(3, 50, 8, 3, 9.0, 5).unwrap();
    for ablation in [
        Ablation::None,
        Ablation::RandomBomb,
        Ablation::NoRepulsion,
        Ablation::NoDivision,
    ] {
        let cfg = RunConfig {
            ablation,
            seed: 77,
            ..Default::default()
        };
        let (_, o1, mut r1) = run_and_evaluate(&raw, &l, &cfg).unwrap();
        let (_, o2, mut r2) = run_and_evaluate(&raw, &l, &cfg).unwrap();
        assert_eq!(o1.data, o2.data);
        assert_eq!(o1.partition, o2.partition);
        // wall-clock timings are the only legitimately varying fields
        for r in [&mut r1, &mut r2] {
            r.osd.as_mut().unwrap().timings = Default::default();
            r.detectors.iter_mut().for_each(|d| d.seconds = 0.0);
        }
        assert_eq!(r1, r2);
    }
}

#[test]
fn report_json_round_trip_with_every_detector() {
    let (raw, l) = synth::gen_clusters_outliers(2, 30, 3, 2, 10.0, 2).unwrap();
    let cfg = RunConfig {
        ablation: Ablation::NoRepulsion,
        ..Default::default()
    };
    let (before, out, _) = run_and_evaluate(&raw, &l, &cfg).unwrap();
    let report = evaluate(&before, &out.data, &l, &cfg).unwrap();
    assert_eq!(report.detectors.len(), DetectorKind::ALL.len());
    let back = EvalReport::from_json(&report.to_json().unwrap()).unwrap();
    assert_eq!(back, report);
}
