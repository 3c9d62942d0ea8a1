//! Train/test splitting, error metrics and the scenario harness.
//!
//! Four scenarios cover the generalization questions the models are asked:
//!
//! * `A` - train and test on the default-scheduler dataset (80/20 split);
//! * `B` - train on the entire default-scheduler dataset, test on the
//!   custom-scheduler test split (out-of-band generalization);
//! * `C` - train and test on the custom-scheduler dataset, sharing B's
//!   test split at equal seeds so the two are directly comparable;
//! * `D` - warm-start the network from scenario B's model and fine-tune
//!   on the custom training split (transfer probe, network only).
//!
//! Scenario A uses the default-scheduler regression; B and C use the
//! custom-scheduler regression, whose fitted feasibility line may exclude
//! some test points - those are skipped and counted, never guessed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dataset::Dataset;
use crate::datagen;
use crate::error::{EvalError, FitError};
use crate::mlp::{self, MlpModel, TrainConfig};
use crate::regression::{self, Variant};

/// How to split a dataset into train and test parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> SplitSpec {
        SplitSpec {
            train_fraction: 0.80,
            seed: 0,
        }
    }
}

impl SplitSpec {
    pub fn with_seed(seed: u64) -> SplitSpec {
        SplitSpec {
            train_fraction: 0.80,
            seed,
        }
    }
}

/// Seeded shuffle, then partition. The test part takes `floor((1 -
/// train_fraction) * n)` samples (so an 80/20 split of 598 rows is
/// 479/119), with float noise at exact multiples rounded away.
pub fn split(ds: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset), EvalError> {
    let n = ds.len();
    if n < 5 {
        return Err(EvalError::DatasetTooSmall { n, min: 5 });
    }
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(EvalError::Scenario {
            scenario: "split".into(),
            detail: format!("train_fraction must be in (0, 1), got {}", spec.train_fraction),
        });
    }
    let test_size = floor_stable(n as f64 * (1.0 - spec.train_fraction))
        .clamp(1, n - 1);
    let train_size = n - test_size;

    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        idx.swap(i, j);
    }

    let samples = ds.samples();
    let train: Vec<_> = idx[..train_size].iter().map(|&i| samples[i].clone()).collect();
    let test: Vec<_> = idx[train_size..].iter().map(|&i| samples[i].clone()).collect();
    Ok((ds.with_samples(train)?, ds.with_samples(test)?))
}

/// Floor that tolerates float noise at exact integers (e.g. 0.2 * 4955).
fn floor_stable(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() < 1e-6 {
        r as usize
    } else {
        x.floor() as usize
    }
}

/// Root mean squared error over (predicted, actual) pairs, watts.
pub fn rmse(pairs: &[(f64, f64)]) -> Result<f64, EvalError> {
    if pairs.is_empty() {
        return Err(EvalError::EmptyPairs);
    }
    let sse: f64 = pairs.iter().map(|(p, a)| (p - a) * (p - a)).sum();
    Ok((sse / pairs.len() as f64).sqrt())
}

/// Mean absolute error over (predicted, actual) pairs, watts.
pub fn mae(pairs: &[(f64, f64)]) -> Result<f64, EvalError> {
    if pairs.is_empty() {
        return Err(EvalError::EmptyPairs);
    }
    Ok(pairs.iter().map(|(p, a)| (p - a).abs()).sum::<f64>() / pairs.len() as f64)
}

/// Median of a nonempty slice (average of the two middle values).
pub fn median(xs: &[f64]) -> f64 {
    assert!(!xs.is_empty(), "median of empty slice");
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

/// Evaluation scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    /// Default-scheduler train split -> default-scheduler test split.
    DefaultToDefault,
    /// Whole default-scheduler dataset -> custom-scheduler test split.
    DefaultToCustomTest,
    /// Custom-scheduler train split -> custom-scheduler test split.
    CustomToCustomTest,
    /// Fine-tune the default-trained network on the custom train split.
    TransferFineTune,
}

impl Scenario {
    pub fn code(self) -> &'static str {
        match self {
            Scenario::DefaultToDefault => "A",
            Scenario::DefaultToCustomTest => "B",
            Scenario::CustomToCustomTest => "C",
            Scenario::TransferFineTune => "D",
        }
    }

    pub fn parse(s: &str) -> Option<Scenario> {
        match s {
            "A" | "a" => Some(Scenario::DefaultToDefault),
            "B" | "b" => Some(Scenario::DefaultToCustomTest),
            "C" | "c" => Some(Scenario::CustomToCustomTest),
            "D" | "d" => Some(Scenario::TransferFineTune),
            _ => None,
        }
    }

    pub fn all() -> [Scenario; 4] {
        [
            Scenario::DefaultToDefault,
            Scenario::DefaultToCustomTest,
            Scenario::CustomToCustomTest,
            Scenario::TransferFineTune,
        ]
    }
}

/// Which model family a report covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelChoice {
    Regression,
    Nn,
}

impl ModelChoice {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelChoice::Regression => "regression",
            ModelChoice::Nn => "nn",
        }
    }

    pub fn parse(s: &str) -> Option<ModelChoice> {
        match s {
            "regression" => Some(ModelChoice::Regression),
            "nn" => Some(ModelChoice::Nn),
            _ => None,
        }
    }
}

/// Per-(scenario, platform, model, seed) evaluation record.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub scenario: Scenario,
    pub platform: String,
    pub model_kind: ModelChoice,
    pub train_rmse_w: f64,
    pub test_rmse_w: f64,
    pub train_mae_w: f64,
    pub test_mae_w: f64,
    pub n_train: usize,
    /// Raw test-set size; `n_infeasible_skipped` of these were not scored.
    pub n_test: usize,
    pub n_infeasible_skipped: usize,
    pub seed: u64,
    /// Hash of the test rows, for checking that scenarios share test sets.
    pub test_fingerprint: String,
}

/// One predicted-vs-actual row for scatter exports; `predicted_w` is empty
/// for test points the fitted model declares infeasible.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterRow {
    pub airtime: f64,
    pub snr_db: f64,
    pub mcs: u8,
    pub actual_w: f64,
    pub predicted_w: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterData {
    pub model_kind: ModelChoice,
    pub seed: u64,
    pub rows: Vec<ScatterRow>,
}

/// The two datasets a scenario draws from.
#[derive(Debug, Clone)]
pub struct CampaignData {
    pub default_ds: Dataset,
    pub custom_ds: Dataset,
}

#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub reports: Vec<EvalReport>,
    pub scatters: Vec<ScatterData>,
}

/// Runs one scenario for the requested model kinds.
///
/// The custom test split is keyed by `seed` alone, so scenarios B, C and D
/// at equal seeds score against an identical test set.
pub fn run_scenario(
    scenario: Scenario,
    data: &CampaignData,
    seed: u64,
    kinds: &[ModelChoice],
) -> Result<ScenarioOutcome, EvalError> {
    let spec = SplitSpec::with_seed(seed);
    let mut reports = Vec::new();
    let mut scatters = Vec::new();

    for &kind in kinds {
        let (report, scatter) = match scenario {
            Scenario::DefaultToDefault => {
                let (train, test) = split(&data.default_ds, &spec)?;
                eval_one(scenario, kind, &train, &test, seed)?
            }
            Scenario::DefaultToCustomTest => {
                let (_, test) = split(&data.custom_ds, &spec)?;
                eval_one(scenario, kind, &data.default_ds, &test, seed)?
            }
            Scenario::CustomToCustomTest => {
                let (train, test) = split(&data.custom_ds, &spec)?;
                eval_one(scenario, kind, &train, &test, seed)?
            }
            Scenario::TransferFineTune => {
                if kind != ModelChoice::Nn {
                    return Err(EvalError::Scenario {
                        scenario: scenario.code().into(),
                        detail: "the transfer probe applies to the nn model only".into(),
                    });
                }
                let (train, test) = split(&data.custom_ds, &spec)?;
                let cfg = TrainConfig {
                    seed,
                    ..TrainConfig::default()
                };
                let (source, _) = mlp::train(&data.default_ds, &cfg)
                    .map_err(|e| train_err(scenario, e))?;
                let (model, _) = mlp::fine_tune(&source, &train, &cfg)
                    .map_err(|e| train_err(scenario, e))?;
                report_for_nn(scenario, &model, &train, &test, seed)?
            }
        };
        reports.push(report);
        scatters.push(scatter);
    }

    Ok(ScenarioOutcome { reports, scatters })
}

/// Convenience wrapper: generates the platform's reference campaign, then
/// runs the scenario on it.
pub fn run_scenario_for_alias(
    scenario: Scenario,
    alias: &str,
    seed: u64,
    kinds: &[ModelChoice],
) -> Result<ScenarioOutcome, EvalError> {
    let (default_ds, custom_ds) = datagen::default_campaign(alias, seed)?;
    run_scenario(
        scenario,
        &CampaignData {
            default_ds,
            custom_ds,
        },
        seed,
        kinds,
    )
}

fn eval_one(
    scenario: Scenario,
    kind: ModelChoice,
    train: &Dataset,
    test: &Dataset,
    seed: u64,
) -> Result<(EvalReport, ScatterData), EvalError> {
    match kind {
        ModelChoice::Nn => {
            let cfg = TrainConfig {
                seed,
                ..TrainConfig::default()
            };
            let (model, _) = mlp::train(train, &cfg).map_err(|e| train_err(scenario, e))?;
            report_for_nn(scenario, &model, train, test, seed)
        }
        ModelChoice::Regression => match scenario {
            Scenario::DefaultToDefault => {
                let fit = regression::fit_default(train).map_err(|e| fit_err(scenario, e))?;
                let predict = |a: f64, c: f64, _m: u8| -> Option<f64> {
                    Some(regression::predict_default(&fit.params, a, c))
                };
                build_report(scenario, ModelChoice::Regression, &predict, train, test, seed)
            }
            Scenario::DefaultToCustomTest | Scenario::CustomToCustomTest => {
                let fit = regression::fit_custom(train, Variant::Continuous)
                    .map_err(|e| fit_err(scenario, e))?;
                let predict = |a: f64, c: f64, m: u8| -> Option<f64> {
                    regression::predict_custom(&fit.params, a, c, m).ok()
                };
                build_report(scenario, ModelChoice::Regression, &predict, train, test, seed)
            }
            Scenario::TransferFineTune => unreachable!("rejected in run_scenario"),
        },
    }
}

fn report_for_nn(
    scenario: Scenario,
    model: &MlpModel,
    train: &Dataset,
    test: &Dataset,
    seed: u64,
) -> Result<(EvalReport, ScatterData), EvalError> {
    let predict = |a: f64, c: f64, m: u8| -> Option<f64> { Some(model.predict(a, c, m)) };
    build_report(scenario, ModelChoice::Nn, &predict, train, test, seed)
}

/// Shared metric assembly; `predict` returns `None` for points the model
/// declares infeasible (skipped in the metrics, counted on the test side).
fn build_report(
    scenario: Scenario,
    kind: ModelChoice,
    predict: &dyn Fn(f64, f64, u8) -> Option<f64>,
    train: &Dataset,
    test: &Dataset,
    seed: u64,
) -> Result<(EvalReport, ScatterData), EvalError> {
    let train_pairs: Vec<(f64, f64)> = train
        .samples()
        .iter()
        .filter_map(|s| predict(s.airtime, s.snr_db, s.mcs).map(|p| (p, s.power_w)))
        .collect();

    let mut test_pairs = Vec::with_capacity(test.len());
    let mut rows = Vec::with_capacity(test.len());
    let mut skipped = 0usize;
    for s in test.samples() {
        let p = predict(s.airtime, s.snr_db, s.mcs);
        if p.is_none() {
            skipped += 1;
        } else {
            test_pairs.push((p.unwrap(), s.power_w));
        }
        rows.push(ScatterRow {
            airtime: s.airtime,
            snr_db: s.snr_db,
            mcs: s.mcs,
            actual_w: s.power_w,
            predicted_w: p,
        });
    }
    if test_pairs.is_empty() {
        return Err(EvalError::Scenario {
            scenario: scenario.code().into(),
            detail: "every test point is infeasible under the fitted model".into(),
        });
    }

    let report = EvalReport {
        scenario,
        platform: train.platform().to_string(),
        model_kind: kind,
        train_rmse_w: rmse(&train_pairs)?,
        test_rmse_w: rmse(&test_pairs)?,
        train_mae_w: mae(&train_pairs)?,
        test_mae_w: mae(&test_pairs)?,
        n_train: train.len(),
        n_test: test.len(),
        n_infeasible_skipped: skipped,
        seed,
        test_fingerprint: test.fingerprint(),
    };
    Ok((
        report,
        ScatterData {
            model_kind: kind,
            seed,
            rows,
        },
    ))
}

fn fit_err(scenario: Scenario, e: FitError) -> EvalError {
    EvalError::Fit {
        scenario: scenario.code().into(),
        source: e,
    }
}

fn train_err(scenario: Scenario, e: crate::error::TrainError) -> EvalError {
    EvalError::Train {
        scenario: scenario.code().into(),
        source: e,
    }
}

/// Header of the flat per-report CSV.
pub const REPORT_CSV_HEADER: &str = "scenario,platform,model_kind,train_rmse_w,test_rmse_w,\
train_mae_w,test_mae_w,n_train,n_test,n_skipped,seed";

/// Flat CSV rendering, one row per report.
pub fn reports_to_csv(reports: &[EvalReport]) -> String {
    let mut out = String::from(REPORT_CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{:.6},{:.6},{:.6},{:.6},{},{},{},{}\n",
            r.scenario.code(),
            r.platform,
            r.model_kind.as_str(),
            r.train_rmse_w,
            r.test_rmse_w,
            r.train_mae_w,
            r.test_mae_w,
            r.n_train,
            r.n_test,
            r.n_infeasible_skipped,
            r.seed
        ));
    }
    out
}

#[derive(Serialize)]
struct ReportsDoc<'a> {
    reports: Vec<ReportEntry<'a>>,
}

#[derive(Serialize)]
struct ReportEntry<'a> {
    scenario: &'a str,
    platform: &'a str,
    model_kind: &'a str,
    train_rmse_w: f64,
    test_rmse_w: f64,
    train_mae_w: f64,
    test_mae_w: f64,
    n_train: usize,
    n_test: usize,
    n_infeasible_skipped: usize,
    seed: u64,
    test_fingerprint: &'a str,
}

/// Structured (TOML) rendering including the test-set fingerprints.
pub fn reports_to_toml(reports: &[EvalReport]) -> String {
    let doc = ReportsDoc {
        reports: reports
            .iter()
            .map(|r| ReportEntry {
                scenario: r.scenario.code(),
                platform: &r.platform,
                model_kind: r.model_kind.as_str(),
                train_rmse_w: r.train_rmse_w,
                test_rmse_w: r.test_rmse_w,
                train_mae_w: r.train_mae_w,
                test_mae_w: r.test_mae_w,
                n_train: r.n_train,
                n_test: r.n_test,
                n_infeasible_skipped: r.n_infeasible_skipped,
                seed: r.seed,
                test_fingerprint: &r.test_fingerprint,
            })
            .collect(),
    };
    toml::to_string(&doc).expect("reports serialize")
}

/// CSV rendering of scatter rows (one per test sample).
pub fn scatter_to_csv(data: &ScatterData) -> String {
    let mut out = String::from("airtime,snr_db,mcs,actual_w,predicted_w,feasible\n");
    for r in &data.rows {
        match r.predicted_w {
            Some(p) => out.push_str(&format!(
                "{:.3},{:.2},{},{:.4},{:.4},1\n",
                r.airtime, r.snr_db, r.mcs, r.actual_w, p
            )),
            None => out.push_str(&format!(
                "{:.3},{:.2},{},{:.4},,0\n",
                r.airtime, r.snr_db, r.mcs, r.actual_w
            )),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{DataSource, Sample, Scheduler};
    use crate::profile::PlatformProfile;
    use crate::regression::{predict_default, DefaultRegParams};

    fn dummy_dataset(n: usize) -> Dataset {
        let samples: Vec<Sample> = (0..n)
            .map(|i| {
                Sample::new(
                    f64::from(i as u32 % 10 + 1) / 10.0,
                    (i % 300) as f64 / 10.0,
                    (i % 29) as u8,
                    10.0 + (i % 50) as f64 * 0.25,
                    Scheduler::Custom,
                    "T",
                )
                .unwrap()
            })
            .collect();
        Dataset::new(samples, "T", Scheduler::Custom, None, DataSource::Synthetic).unwrap()
    }

    #[test]
    fn split_sizes_match_reference_counts() {
        // (total, train, test) for every reference campaign size
        let expected = [
            (598, 479, 119),
            (160, 128, 32),
            (107, 86, 21),
            (4955, 3964, 991),
            (1091, 873, 218),
            (1218, 975, 243),
            (705, 564, 141),
        ];
        for (n, tr, te) in expected {
            let ds = dummy_dataset(n);
            let (train, test) = split(&ds, &SplitSpec::with_seed(1)).unwrap();
            assert_eq!((train.len(), test.len()), (tr, te), "n = {n}");
        }
    }

    #[test]
    fn split_is_deterministic_and_partitions() {
        let ds = dummy_dataset(107);
        let spec = SplitSpec::with_seed(9);
        let (tr1, te1) = split(&ds, &spec).unwrap();
        let (tr2, te2) = split(&ds, &spec).unwrap();
        assert_eq!(tr1, tr2);
        assert_eq!(te1, te2);

        // disjoint union: every original row appears exactly once
        let mut counts = std::collections::HashMap::new();
        for s in tr1.samples().iter().chain(te1.samples()) {
            *counts.entry(s.csv_row()).or_insert(0usize) += 1;
        }
        for s in ds.samples() {
            assert_eq!(counts.get(&s.csv_row()), Some(&1));
        }
        assert_eq!(tr1.len() + te1.len(), ds.len());

        let (tr3, _) = split(&ds, &SplitSpec::with_seed(10)).unwrap();
        assert_ne!(tr1.samples(), tr3.samples());
    }

    #[test]
    fn split_rejects_tiny_datasets() {
        let ds = dummy_dataset(4);
        assert!(matches!(
            split(&ds, &SplitSpec::default()),
            Err(EvalError::DatasetTooSmall { .. })
        ));
    }

    #[test]
    fn rmse_zero_error_case() {
        assert_eq!(rmse(&[(22.0, 22.0)]).unwrap(), 0.0);
    }

    #[test]
    fn rmse_hand_arithmetic() {
        let v = rmse(&[(0.0, 3.0), (0.0, 4.0)]).unwrap();
        assert!((v - 12.5f64.sqrt()).abs() < 1e-12);
        assert!((v - 3.535534).abs() < 1e-6);
    }

    #[test]
    fn rmse_weights_outliers_more_than_mae() {
        let mut pairs = vec![(5.0, 5.0); 99];
        pairs.push((5.0, 15.0)); // one 10 W miss
        let r = rmse(&pairs).unwrap();
        let m = mae(&pairs).unwrap();
        assert!((r - 1.0).abs() < 1e-12, "rmse {r}");
        assert!((m - 0.1).abs() < 1e-12, "mae {m}");
    }

    #[test]
    fn rmse_dominates_mae() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let n = rng.random_range(1..40);
            let pairs: Vec<(f64, f64)> = (0..n)
                .map(|_| (rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)))
                .collect();
            let r = rmse(&pairs).unwrap();
            let m = mae(&pairs).unwrap();
            assert!(r >= m - 1e-12, "rmse {r} < mae {m}");
        }
        // equality iff all absolute errors agree
        let equal = [(1.0, 3.0), (7.0, 5.0), (0.0, 2.0)];
        let r = rmse(&equal).unwrap();
        let m = mae(&equal).unwrap();
        assert!((r - m).abs() < 1e-12);
    }

    #[test]
    fn empty_pairs_rejected() {
        assert!(rmse(&[]).is_err());
        assert!(mae(&[]).is_err());
    }

    #[test]
    fn median_odd_even() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    /// Band-geometry dataset whose power comes from a default-model truth,
    /// so scenario A's regression is exactly in-class.
    fn default_oracle_campaign(n: usize) -> CampaignData {
        let truth = DefaultRegParams::from_coeffs([15.0, 10.0, 5.0, 0.2, 0.3]);
        let grid: Vec<f64> = (1..=10).map(|i| f64::from(i) / 10.0).collect();
        let samples: Vec<Sample> = (0..n)
            .map(|i| {
                let c = 30.0 * i as f64 / (n - 1) as f64;
                let m = ((0.93 * c).round()).clamp(0.0, 28.0) as u8;
                let a = grid[(i * 3) % 10];
                Sample::new(a, c, m, predict_default(&truth, a, c), Scheduler::Default, "T")
                    .unwrap()
            })
            .collect();
        let default_ds =
            Dataset::new(samples, "T", Scheduler::Default, None, DataSource::Synthetic).unwrap();
        // scenario A ignores the custom dataset; reuse a dummy
        CampaignData {
            default_ds,
            custom_ds: dummy_dataset(50),
        }
    }

    // Noiseless generate-fit-evaluate oracle for scenario A.
    #[test]
    fn scenario_a_regression_noiseless_is_exact() {
        let data = default_oracle_campaign(400);
        let out = run_scenario(
            Scenario::DefaultToDefault,
            &data,
            3,
            &[ModelChoice::Regression],
        )
        .unwrap();
        let r = &out.reports[0];
        assert!(r.test_rmse_w < 1e-6, "test rmse {}", r.test_rmse_w);
        assert_eq!(r.n_infeasible_skipped, 0);
        assert_eq!(r.n_train, 320);
        assert_eq!(r.n_test, 80);
    }

    #[test]
    fn scenarios_b_and_c_share_a_test_set_and_c_is_no_worse() {
        let (default_ds, custom_ds) = datagen::default_campaign("Server2", 5).unwrap();
        let data = CampaignData {
            default_ds,
            custom_ds,
        };
        let b = run_scenario(Scenario::DefaultToCustomTest, &data, 5,
            &[ModelChoice::Regression]).unwrap();
        let c = run_scenario(Scenario::CustomToCustomTest, &data, 5,
            &[ModelChoice::Regression]).unwrap();
        let rb = &b.reports[0];
        let rc = &c.reports[0];
        assert_eq!(rb.test_fingerprint, rc.test_fingerprint);
        assert_eq!(rb.n_test, 141);
        assert_eq!(rb.n_train, 107, "B trains on the whole default dataset");
        assert_eq!(rc.n_train, 564);
        assert!(
            rc.test_rmse_w <= rb.test_rmse_w,
            "in-distribution fit C ({}) should not lose to B ({})",
            rc.test_rmse_w,
            rb.test_rmse_w
        );
        // accounting: scored + skipped covers the raw test set
        assert_eq!(
            b.scatters[0].rows.len(),
            rb.n_test,
            "one scatter row per test sample"
        );
        let scored = b.scatters[0]
            .rows
            .iter()
            .filter(|r| r.predicted_w.is_some())
            .count();
        assert_eq!(scored + rb.n_infeasible_skipped, rb.n_test);
    }

    #[test]
    fn scenario_d_is_nn_only() {
        let (default_ds, custom_ds) = datagen::default_campaign("Server2", 2).unwrap();
        let data = CampaignData {
            default_ds,
            custom_ds,
        };
        assert!(run_scenario(
            Scenario::TransferFineTune,
            &data,
            2,
            &[ModelChoice::Regression]
        )
        .is_err());
    }

    #[test]
    fn scenario_pipeline_is_deterministic() {
        let run = || {
            run_scenario_for_alias(
                Scenario::DefaultToDefault,
                "Server2",
                7,
                &[ModelChoice::Regression, ModelChoice::Nn],
            )
            .unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a.reports, b.reports);
        assert_eq!(reports_to_toml(&a.reports), reports_to_toml(&b.reports));
        assert_eq!(reports_to_csv(&a.reports), reports_to_csv(&b.reports));
    }

    #[test]
    fn report_csv_shape() {
        let (default_ds, custom_ds) = datagen::default_campaign("Server2", 3).unwrap();
        let data = CampaignData {
            default_ds,
            custom_ds,
        };
        let out = run_scenario(Scenario::DefaultToDefault, &data, 3,
            &[ModelChoice::Regression]).unwrap();
        let csv = reports_to_csv(&out.reports);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), REPORT_CSV_HEADER);
        let row = lines.next().unwrap();
        assert!(row.starts_with("A,Server2,regression,"));
        assert_eq!(row.split(',').count(), 11);
    }
}
