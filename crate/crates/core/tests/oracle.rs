mod common;

use qabias::metrics::{comparative_bias, dataset_delta, dataset_epsilon, gamma, summarize};
use qabias::oracle::{
    synthesize, synthesize_records, BiasField, LexicalField, OracleError, PositionalOffsets,
};
use qabias::score::{ingest_records, DatasetIndex};
use qabias::{SyntheticModelSpec32, SyntheticModelSpec64};

use common::{dataset, small_config};

#[test]
fn fair_spec_gives_zero_everywhere() {
    let config = small_config("ethnicity", 2, 5, 3);
    let table = synthesize(&SyntheticModelSpec64::default(), &dataset(&config)).unwrap();
    let report = summarize(&table, 0.0).unwrap();
    let s = &report.summary;
    assert_eq!((s.delta, s.epsilon, s.mu, s.eta_abs), (0.0, 0.0, 0.0, 0.0));
    assert!(report.rows.iter().all(|r| r.gamma == 0.0 && r.eta == 0.0));
}

#[test]
fn uniform_bias_reaches_gamma_of_the_favoured_subject() {
    let config = small_config("ethnicity", 2, 2, 2);
    let spec = SyntheticModelSpec64 {
        bias: BiasField::Uniform(0.2),
        positional: PositionalOffsets::leading(0.07),
        lexical: LexicalField::Uniform(0.04),
        ..Default::default()
    };
    let table = synthesize(&spec, &dataset(&config)).unwrap();
    let (first, second) = (&config.subjects[0].id, &config.subjects[1].id);
    let a = &config.attributes[0].id;
    assert!((gamma(first, a, &table).unwrap() - 0.2).abs() < 1e-12);
    assert!((gamma(second, a, &table).unwrap() + 0.2).abs() < 1e-12);
    assert!((dataset_delta(&table).unwrap() - 0.14).abs() < 1e-12);
    // epsilon = f(12, first) - f(12, second) + g(first) - g(second)
    assert!((dataset_epsilon(&table).unwrap() - (0.14 + 0.08)).abs() < 1e-12);
}

#[test]
fn noisy_mean_stays_within_three_sigma() {
    // 14 templates x 105 pairs x 7 attributes = 10,290 quartets.
    let config = small_config("ethnicity", 14, 15, 7);
    let noise = 0.01;
    let b = 0.12;
    let spec = SyntheticModelSpec64 {
        bias: BiasField::Uniform(b),
        noise,
        seed: 42,
        ..Default::default()
    };
    let table = synthesize(&spec, &dataset(&config)).unwrap();
    let n = table.len() as f64;
    assert!(n >= 1e4);
    let cs: Vec<f64> = table.quartets().map(comparative_bias).collect();
    let mean = cs.iter().sum::<f64>() / n;
    // Each B averages four scores with +-1/2 weights, so var(C) = noise^2 / 2.
    let sigma_c = noise / 2f64.sqrt();
    assert!((mean - b).abs() < 3.0 * sigma_c / n.sqrt(), "mean {mean}");
    let sd = (cs.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / n).sqrt();
    assert!((sd / sigma_c - 1.0).abs() < 0.05, "sd {sd} vs {sigma_c}");
}

#[test]
fn seed_determines_output() {
    let examples = dataset(&small_config("religion", 1, 4, 2));
    let spec = |seed| SyntheticModelSpec64 {
        noise: 0.05,
        seed,
        ..Default::default()
    };
    assert_eq!(
        synthesize(&spec(1), &examples).unwrap(),
        synthesize(&spec(1), &examples).unwrap()
    );
    assert_ne!(
        synthesize(&spec(1), &examples).unwrap(),
        synthesize(&spec(2), &examples).unwrap()
    );
}

#[test]
fn records_ingest_cleanly_against_the_dataset() {
    let examples = dataset(&small_config("religion", 2, 5, 3));
    let index = DatasetIndex::from_examples("religion", &examples);
    let spec = SyntheticModelSpec64 {
        bias: BiasField::Uniform(0.1),
        noise: 0.02,
        seed: 3,
        ..Default::default()
    };
    let records = synthesize_records(&spec, &examples).unwrap();
    assert_eq!(records.len(), examples.len());
    let (table, report) = ingest_records::<f64>(records, Some(&index)).unwrap();
    assert!(!report.has_rejections(), "{report:?}");
    assert_eq!(table.len(), examples.len() / 4);
}

#[test]
fn single_precision_recovers_bias() {
    let spec = SyntheticModelSpec32 {
        bias: BiasField::Uniform(0.25),
        positional: PositionalOffsets::leading(0.1),
        ..Default::default()
    };
    let table = synthesize(&spec, &dataset(&small_config("religion", 1, 4, 2))).unwrap();
    assert!(table
        .quartets()
        .all(|q| (comparative_bias(q) - 0.25).abs() < 1e-6));
}

#[test]
fn rejects_scores_leaving_the_unit_interval() {
    let examples = dataset(&small_config("religion", 1, 3, 1));
    let spec = SyntheticModelSpec64 {
        base: 0.9,
        lexical: LexicalField::Uniform(0.2),
        ..Default::default()
    };
    assert!(matches!(
        synthesize(&spec, &examples),
        Err(OracleError::OutOfRange { .. })
    ));
    assert!(matches!(
        synthesize_records(&spec, &examples),
        Err(OracleError::OutOfRange { .. })
    ));
}
