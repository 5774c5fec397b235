//! Acceptance suite: one test per shipped guarantee, each printing a
//! single pass/fail line (run with `--nocapture` to see them on success).

use std::collections::BTreeMap;
use std::panic::{catch_unwind, resume_unwind, UnwindSafe};
use std::path::PathBuf;
use std::process::{Command, Output};

use scfc::{
    allocate, bootstrap_counts, bootstrap_records, classification_metric, classify_verdict,
    combine_cpk, cpl, cpu, draw_sample, evaluate_records, evaluate_statistic, max_deviation,
    parse_records_path, parse_spec_path, plan_sample, representativeness_report,
    BootstrapConfig, BootstrapDistribution, ConfusionCounts, EvaluateOptions, EvaluationRecord,
    MetricKind, RecordSet, StratumCount, StratumKey, Verdict,
};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn criterion<F: FnOnce() + UnwindSafe>(number: u32, description: &str, check: F) {
    match catch_unwind(check) {
        Ok(()) => println!("criterion {number}: PASS - {description}"),
        Err(payload) => {
            println!("criterion {number}: FAIL - {description}");
            resume_unwind(payload);
        }
    }
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn run_cli(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut command = Command::new(env!("CARGO_BIN_EXE_scfc"));
    command.args(args).env_remove("SCFC_SEED");
    for (key, value) in envs {
        command.env(key, value);
    }
    command.output().expect("failed to spawn the scfc binary")
}

fn stdout_text(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("stdout is UTF-8")
}

/// Report stdout is the JSON document followed by the verdict line.
fn split_report(stdout: &str) -> (serde_json::Value, String) {
    let trimmed = stdout.trim_end();
    let (json_text, verdict) = trimmed
        .rsplit_once('\n')
        .expect("stdout holds a report and a verdict line");
    let report = serde_json::from_str(json_text).expect("report parses as JSON");
    (report, verdict.to_string())
}

#[test]
fn criterion_01_end_to_end_gate_on_the_42_record_fixture() {
    criterion(
        1,
        "42-record fixture, LSL 0.70: point 35/42, mean/CI/Cpk in their windows, \
         verdict Capable, exit 0",
        || {
            let records = parse_records_path(&fixture("records_42.csv")).unwrap();
            let spec = parse_spec_path(&fixture("spec_gate.json")).unwrap();
            let report =
                evaluate_records(&records, &spec, &EvaluateOptions::default()).unwrap();

            let metric = &report.metrics[0];
            assert_eq!(metric.point_estimate.value, 35.0 / 42.0);
            assert!((0.8233..=0.8433).contains(&metric.distribution_mean));
            assert!((0.690..=0.738).contains(&metric.ci.lower));
            assert!((0.904..=0.952).contains(&metric.ci.upper));
            assert!((0.97..=1.27).contains(&metric.capability.cpk.value));
            assert_eq!(report.overall_verdict, Verdict::Capable);

            let output = run_cli(
                &[
                    "evaluate",
                    "--records",
                    fixture("records_42.csv").to_str().unwrap(),
                    "--spec",
                    fixture("spec_gate.json").to_str().unwrap(),
                    "--no-timestamp",
                ],
                &[],
            );
            assert_eq!(output.status.code(), Some(0));
            let (json, verdict) = split_report(&stdout_text(&output));
            assert_eq!(json["overall_verdict"], "capable");
            assert!(verdict.starts_with("SCFC verdict: Capable"));
        },
    );
}

#[test]
fn criterion_02_capability_from_published_statistics() {
    criterion(
        2,
        "capability --mean 0.9911 --lsl 0.98 --ci-lower 0.9855 gives Cpk 1.9821 +/- 0.005; \
         the aggregate-interval caveat is documented",
        || {
            let output = run_cli(
                &[
                    "capability",
                    "--mean",
                    "0.9911",
                    "--lsl",
                    "0.98",
                    "--ci-lower",
                    "0.9855",
                ],
                &[],
            );
            assert_eq!(output.status.code(), Some(0));
            let stdout = stdout_text(&output);
            let cpk_line = stdout
                .lines()
                .find(|l| l.starts_with("Cpk:"))
                .expect("Cpk line present");
            let cpk: f64 = cpk_line.trim_start_matches("Cpk:").trim().parse().unwrap();
            assert!((cpk - 1.9821).abs() <= 0.005, "Cpk {cpk} out of tolerance");
            assert!(stdout.contains("SCFC verdict: Capable"));

            let readme = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../README.md");
            let text = std::fs::read_to_string(readme).expect("README.md present");
            assert!(
                text.contains("## Capability from published statistics"),
                "README documents the published-statistics workflow"
            );
            assert!(
                text.contains("interval width"),
                "README documents the aggregate interval-width caveat"
            );
        },
    );
}

#[test]
fn criterion_03_confusion_metrics_are_exact_rationals() {
    criterion(
        3,
        "fraud matrix: recall 8951/9033, precision 8951/19316, fpr 10365/109279653, \
         each matching a brute-force oracle on the down-scaled matrix",
        || {
            let counts = ConfusionCounts::new(8951, 10365, 109_269_288, 82);
            let recall = classification_metric(&counts, MetricKind::Recall).unwrap();
            assert_eq!(recall.value, 8951.0 / 9033.0);
            assert!((recall.value - 0.99092).abs() < 5e-6);
            let precision = classification_metric(&counts, MetricKind::Precision).unwrap();
            assert_eq!(precision.value, 8951.0 / 19316.0);
            let fpr =
                classification_metric(&counts, MetricKind::FalsePositiveRate).unwrap();
            assert_eq!(fpr.value, 10365.0 / 109_279_653.0);

            // Down-scaled matrix (each cell / 1000, rounded): build the
            // records and count every cell by direct iteration.
            let scaled = ConfusionCounts::new(9, 10, 109_269, 0);
            let mut records = Vec::new();
            let mut id = 0usize;
            let mut push = |n: u64, actual: &str, predicted: &str,
                            records: &mut Vec<EvaluationRecord>| {
                for _ in 0..n {
                    id += 1;
                    records.push(EvaluationRecord::classification(
                        id.to_string(),
                        actual,
                        predicted,
                    ));
                }
            };
            push(scaled.true_positives, "fraud", "fraud", &mut records);
            push(scaled.false_negatives, "fraud", "legit", &mut records);
            push(scaled.false_positives, "legit", "fraud", &mut records);
            push(scaled.true_negatives, "legit", "legit", &mut records);
            let set = RecordSet::new(records).unwrap();

            let brute = |want_actual: Option<&str>, want_predicted: Option<&str>| {
                set.iter()
                    .filter(|r| match &r.outcome {
                        scfc::Outcome::Label { actual, predicted } => {
                            want_actual.is_none_or(|w| actual == w)
                                && want_predicted.is_none_or(|w| predicted == w)
                        }
                        _ => false,
                    })
                    .count() as f64
            };
            let oracle_recall = brute(Some("fraud"), Some("fraud")) / brute(Some("fraud"), None);
            let oracle_precision =
                brute(Some("fraud"), Some("fraud")) / brute(None, Some("fraud"));
            let oracle_fpr = brute(Some("legit"), Some("fraud")) / brute(Some("legit"), None);

            let refs: Vec<&EvaluationRecord> = set.iter().collect();
            let recall =
                evaluate_statistic(MetricKind::Recall, Some("fraud"), &refs).unwrap();
            let precision =
                evaluate_statistic(MetricKind::Precision, Some("fraud"), &refs).unwrap();
            let fpr =
                evaluate_statistic(MetricKind::FalsePositiveRate, Some("fraud"), &refs).unwrap();
            assert_eq!(recall, oracle_recall);
            assert_eq!(precision, oracle_precision);
            assert_eq!(fpr, oracle_fpr);
        },
    );
}

#[test]
fn criterion_04_percentile_ranks_on_a_known_distribution() {
    criterion(
        4,
        "distribution {1..1000}/1000 at level 0.95 gives CI [0.025, 0.975] exactly",
        || {
            let values: Vec<f64> = (1..=1000).map(|i| i as f64 / 1000.0).collect();
            let dist = BootstrapDistribution::from_values(values).unwrap();
            let ci = dist.percentile_ci(0.95).unwrap();
            assert_eq!(ci.lower, 0.025);
            assert_eq!(ci.upper, 0.975);
        },
    );
}

#[test]
fn criterion_05_counts_and_records_agree_on_recall_intervals() {
    criterion(
        5,
        "recall CI from aggregate counts (tp=30, fn=12, fp=8, tn=50) matches the CI from \
         the 100 expanded records within 0.02 per bound at S=5000",
        || {
            let counts = ConfusionCounts::new(30, 8, 50, 12);
            let config = BootstrapConfig::default().with_resamples(5000);

            let from_counts = bootstrap_counts(&counts, MetricKind::Recall, &config)
                .unwrap()
                .percentile_ci(0.95)
                .unwrap();

            let mut records = Vec::new();
            let mut id = 0usize;
            let mut push = |n: u64, actual: &str, predicted: &str,
                            records: &mut Vec<EvaluationRecord>| {
                for _ in 0..n {
                    id += 1;
                    records.push(EvaluationRecord::classification(
                        id.to_string(),
                        actual,
                        predicted,
                    ));
                }
            };
            push(30, "fraud", "fraud", &mut records);
            push(12, "fraud", "legit", &mut records);
            push(8, "legit", "fraud", &mut records);
            push(50, "legit", "legit", &mut records);
            let set = RecordSet::new(records).unwrap();
            assert_eq!(set.len(), 100);

            let statistic = |subset: &[&EvaluationRecord]| {
                evaluate_statistic(MetricKind::Recall, Some("fraud"), subset)
            };
            let from_records = bootstrap_records(&set, statistic, &config)
                .unwrap()
                .percentile_ci(0.95)
                .unwrap();

            assert!(
                (from_counts.lower - from_records.lower).abs() <= 0.02,
                "lower bounds {} vs {}",
                from_counts.lower,
                from_records.lower
            );
            assert!(
                (from_counts.upper - from_records.upper).abs() <= 0.02,
                "upper bounds {} vs {}",
                from_counts.upper,
                from_records.upper
            );
        },
    );
}

#[test]
fn criterion_06_reports_are_byte_identical_across_threads_and_runs() {
    criterion(
        6,
        "evaluate --no-timestamp is byte-identical at 1 thread vs default parallelism \
         and across 20 repeated runs",
        || {
            let records = fixture("records_42.csv");
            let spec = fixture("spec_gate.json");
            let args = [
                "evaluate",
                "--records",
                records.to_str().unwrap(),
                "--spec",
                spec.to_str().unwrap(),
                "--no-timestamp",
            ];

            let single = run_cli(&args, &[("RAYON_NUM_THREADS", "1")]);
            let parallel = run_cli(&args, &[]);
            assert_eq!(single.status.code(), Some(0));
            assert_eq!(parallel.status.code(), Some(0));
            assert_eq!(single.stdout, parallel.stdout);

            for _ in 0..20 {
                let repeat = run_cli(&args, &[]);
                assert_eq!(repeat.stdout, parallel.stdout);
            }
        },
    );
}

#[test]
fn criterion_07_capability_properties_and_verdict_boundaries() {
    criterion(
        7,
        "indices are affine-invariant over 50 random maps, zero at mean = LSL, combine \
         by minimum, and verdict bands switch exactly at 1.0 and 2.0",
        || {
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            for _ in 0..50 {
                let scale: f64 = rng.random_range(0.1..10.0);
                let shift: f64 = rng.random_range(-5.0..5.0);
                let mean: f64 = rng.random_range(0.3..0.9);
                let lsl = mean - rng.random_range(0.01..0.25);
                let lower = mean - rng.random_range(0.001..0.2);

                let base = cpl(mean, lsl, lower).unwrap().value;
                let mapped = cpl(
                    scale * mean + shift,
                    scale * lsl + shift,
                    scale * lower + shift,
                )
                .unwrap()
                .value;
                assert!(
                    (mapped - base).abs() <= 1e-9 * base.abs().max(1.0),
                    "affine map changed cpl: {base} vs {mapped}"
                );

                let usl = mean + rng.random_range(0.01..0.25);
                let upper = mean + rng.random_range(0.001..0.2);
                let base = cpu(mean, usl, upper).unwrap().value;
                let mapped = cpu(
                    scale * mean + shift,
                    scale * usl + shift,
                    scale * upper + shift,
                )
                .unwrap()
                .value;
                assert!(
                    (mapped - base).abs() <= 1e-9 * base.abs().max(1.0),
                    "affine map changed cpu: {base} vs {mapped}"
                );
            }

            assert_eq!(cpl(0.8, 0.8, 0.7).unwrap().value, 0.0);

            let narrow = cpl(0.9, 0.7, 0.85).unwrap();
            let wide = cpu(0.9, 0.95, 0.92).unwrap();
            let combined = combine_cpk(Some(narrow), Some(wide)).unwrap();
            assert_eq!(combined.value, narrow.value.min(wide.value));
            assert_eq!(
                combine_cpk(Some(narrow), None).unwrap().value,
                narrow.value
            );
            assert_eq!(combine_cpk(None, Some(wide)).unwrap().value, wide.value);

            assert_eq!(classify_verdict(0.999999), Verdict::Unacceptable);
            assert_eq!(classify_verdict(1.0), Verdict::Capable);
            assert_eq!(classify_verdict(1.999999), Verdict::Capable);
            assert_eq!(classify_verdict(2.0), Verdict::Excellent);
        },
    );
}

#[test]
fn criterion_08_allocation_oracle_unique_ids_and_tight_deviations() {
    criterion(
        8,
        "200 random allocations sum to n and match a greedy-deficit oracle; drawn samples \
         have unique ids; deviations stay within 1/sample_size under observed proportions",
        || {
            let mut rng = ChaCha8Rng::seed_from_u64(8);
            for _ in 0..200 {
                let strata_count = rng.random_range(2..8usize);
                let weights: Vec<u64> =
                    (0..strata_count).map(|_| rng.random_range(1..1000u64)).collect();
                let n = rng.random_range(0..60usize);

                // Availability exceeds any allocation, so pure apportionment
                // is exercised.
                let strata: Vec<StratumCount> = weights
                    .iter()
                    .enumerate()
                    .map(|(i, &w)| {
                        let key = StratumKey::from_attributes(BTreeMap::from([(
                            "k".to_string(),
                            format!("s{i:02}"),
                        )]));
                        StratumCount {
                            key,
                            count: (w as usize) * 60,
                            proportion: 0.0,
                        }
                    })
                    .collect();
                let total: f64 = weights.iter().map(|&w| w as f64 * 60.0).sum();
                let strata: Vec<StratumCount> = strata
                    .into_iter()
                    .map(|mut s| {
                        s.proportion = s.count as f64 / total;
                        s
                    })
                    .collect();

                let result = allocate(&strata, n, None).unwrap();
                let allocated: Vec<usize> =
                    result.allocations.iter().map(|a| a.allocated).collect();
                assert_eq!(allocated.iter().sum::<usize>(), n);
                assert!(!result.redistributed);

                // Independent oracle: repeatedly grant one unit to the
                // stratum with the largest remaining quota deficit,
                // breaking ties by stratum key.
                let quotas: Vec<f64> = strata
                    .iter()
                    .map(|s| {
                        let quota = n as f64 * s.proportion;
                        if (quota - quota.round()).abs() < 1e-9 {
                            quota.round()
                        } else {
                            quota
                        }
                    })
                    .collect();
                let mut oracle = vec![0usize; strata.len()];
                for _ in 0..n {
                    let mut best = 0;
                    for i in 1..strata.len() {
                        let deficit_best = quotas[best] - oracle[best] as f64;
                        let deficit_i = quotas[i] - oracle[i] as f64;
                        if deficit_i > deficit_best
                            || (deficit_i == deficit_best && strata[i].key < strata[best].key)
                        {
                            best = i;
                        }
                    }
                    oracle[best] += 1;
                }
                assert_eq!(allocated, oracle);
            }

            let population = parse_records_path(&fixture("population_100.csv")).unwrap();
            let keys = vec!["region".to_string()];
            for seed in 0..20 {
                let plan = plan_sample(&population, &keys, 37, seed, None).unwrap();
                let sample = draw_sample(&population, &plan).unwrap();
                let mut ids: Vec<&str> = sample.iter().map(|r| r.id.as_str()).collect();
                ids.sort_unstable();
                ids.dedup();
                assert_eq!(ids.len(), sample.len(), "duplicate id in sample");
            }

            // External proportions equal to the observed shares: every
            // deviation is bounded by one seat, 1/sample_size.
            let observed = BTreeMap::from([
                ("region=APAC".to_string(), 0.2),
                ("region=EU".to_string(), 0.5),
                ("region=US".to_string(), 0.3),
            ]);
            for n in [7usize, 10, 23, 37] {
                let plan = plan_sample(&population, &keys, n, 0, Some(&observed)).unwrap();
                let sample = draw_sample(&population, &plan).unwrap();
                let report = representativeness_report(&sample, &population, &keys).unwrap();
                assert!(
                    max_deviation(&report) <= 1.0 / n as f64 + 1e-12,
                    "n={n} deviation {} too large",
                    max_deviation(&report)
                );
            }
        },
    );
}

#[test]
fn criterion_09_degenerate_interval_is_flagged_not_hidden() {
    criterion(
        9,
        "all-correct fixture, LSL 0.9: zero-width CI, Cpk \"inf\" with degenerate flag, \
         verdict Excellent with warning, exit 0",
        || {
            let output = run_cli(
                &[
                    "evaluate",
                    "--records",
                    fixture("records_allcorrect_20.csv").to_str().unwrap(),
                    "--spec",
                    fixture("spec_strict_gate.json").to_str().unwrap(),
                    "--no-timestamp",
                ],
                &[],
            );
            assert_eq!(output.status.code(), Some(0));
            let (json, verdict) = split_report(&stdout_text(&output));

            let metric = &json["metrics"][0];
            assert_eq!(metric["ci_lower"], metric["ci_upper"]);
            assert_eq!(metric["cpk"], "inf");
            assert_eq!(metric["degenerate"], true);
            assert_eq!(json["overall_verdict"], "excellent");
            assert!(!json["warnings"].as_array().unwrap().is_empty());
            assert!(verdict.starts_with("SCFC verdict: Excellent (Cpk=inf)"));
        },
    );
}

#[test]
fn criterion_10_gate_exit_codes() {
    criterion(
        10,
        "22-of-42 fixture against LSL 0.70 exits 1; a malformed CSV exits 2",
        || {
            let failing = run_cli(
                &[
                    "evaluate",
                    "--records",
                    fixture("records_22of42.csv").to_str().unwrap(),
                    "--spec",
                    fixture("spec_gate.json").to_str().unwrap(),
                    "--no-timestamp",
                ],
                &[],
            );
            assert_eq!(failing.status.code(), Some(1));
            let (json, verdict) = split_report(&stdout_text(&failing));
            assert_eq!(json["overall_verdict"], "unacceptable");
            assert!(verdict.starts_with("SCFC verdict: Unacceptable"));

            let malformed = run_cli(
                &[
                    "evaluate",
                    "--records",
                    fixture("records_malformed.csv").to_str().unwrap(),
                    "--spec",
                    fixture("spec_gate.json").to_str().unwrap(),
                ],
                &[],
            );
            assert_eq!(malformed.status.code(), Some(2));
            let stderr = String::from_utf8(malformed.stderr).unwrap();
            assert!(stderr.contains("line 3"), "diagnostic names the line: {stderr}");
        },
    );
}
