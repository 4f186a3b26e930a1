//! Saving and reloading models, properties and sweep tables.

mod common;

use common::random_problem;
use probsafe::io::{
    load_boxes, load_model, load_property, parse_sweep_csv, save_model, save_property, write_json,
    write_sweep_csv, BoxesFile, ClassificationFile, PropertyFile, RegionFile, SpecFile, SweepRow,
};
use probsafe::{Interval, IntervalBox, Method};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn models_survive_a_round_trip(seed in any::<u64>()) {
        let p = random_problem(seed);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        save_model(&path, &p.model).unwrap();
        prop_assert_eq!(load_model(&path).unwrap(), p.model);
    }

    #[test]
    fn boxes_survive_a_round_trip(bounds in prop::collection::vec((-1e6f64..1e6, 0.0f64..1e3), 1..12)) {
        let b: IntervalBox = bounds.iter().map(|(lo, w)| Interval::new(*lo, lo + w)).collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.json");
        write_json(&path, &BoxesFile { boxes: vec![b.clone(), b.clone()] }).unwrap();
        prop_assert_eq!(load_boxes(&path).unwrap(), vec![b.clone(), b]);
    }

    #[test]
    fn sweep_tables_survive_a_round_trip(
        rows in prop::collection::vec((any::<bool>(), 1usize..5000, 0.0f64..10.0, any::<u64>(), 0.0f64..=1.0, 0usize..100), 0..20)
    ) {
        let rows: Vec<SweepRow> = rows
            .into_iter()
            .map(|(ibp, n, gamma, seed, p, acc)| SweepRow {
                method: if ibp { Method::Ibp } else { Method::Lbp },
                n_samples: n,
                gamma,
                seed,
                p_lower: p,
                accepted: acc.min(n),
                rejected: n - acc.min(n),
                seconds: 0.0,
            })
            .collect();
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &rows).unwrap();
        prop_assert_eq!(parse_sweep_csv(&String::from_utf8(buf).unwrap()).unwrap(), rows);
    }
}

#[test]
fn properties_survive_a_round_trip() {
    let p = random_problem(3);
    let files = [
        PropertyFile {
            description: Some("box".into()),
            region: RegionFile::Boxes(vec![p.t.clone()]),
            spec: SpecFile::Linear { matrix: p.spec.matrix().to_vec(), offset: p.spec.offset().to_vec() },
        },
        PropertyFile {
            description: None,
            region: RegionFile::LinfBall { center: p.t.center(), epsilon: 0.05, clip: Some(Interval::new(-1.0, 1.0)) },
            spec: SpecFile::Band { band: 2.0 },
        },
    ];
    let dir = tempfile::tempdir().unwrap();
    for (i, file) in files.iter().enumerate() {
        let path = dir.path().join(format!("p{i}.json"));
        save_property(&path, file).unwrap();
        let loaded = load_property(&path, &p.model).unwrap();
        assert_eq!(loaded, file.resolve(&p.model).unwrap());
    }
    let wrong = PropertyFile {
        description: None,
        region: RegionFile::Boxes(vec![p.t.clone()]),
        spec: SpecFile::Classification { classification: ClassificationFile { n_classes: 7, predicted: 0 } },
    };
    assert!(wrong.resolve(&p.model).is_err());
}
