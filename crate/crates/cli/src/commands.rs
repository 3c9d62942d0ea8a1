//! Command implementations.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use chrono::{DateTime, SecondsFormat, Utc};
use serde::Deserialize;

use vbspower::datagen::{self, GenConfig};
use vbspower::dataset::{Dataset, Scheduler};
use vbspower::eval::{self, CampaignData, ModelChoice, Scenario};
use vbspower::mlp::{self, TrainConfig};
use vbspower::modelfile::{self, ModelFile, ModelPayload};
use vbspower::profile::PlatformProfile;
use vbspower::regression::{self, Variant};

use crate::registry::Registry;
use crate::{CliError, FitKind, GenerateArgs, PredictArgs, TrainArgs};

/// Timestamp for model files. Sourced from `SOURCE_DATE_EPOCH` so every
/// output byte is a function of inputs; defaults to the epoch itself when
/// unset (set the variable to wall time for real timestamps).
fn created_at() -> String {
    let secs: i64 = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(0);
    DateTime::<Utc>::from_timestamp(secs, 0)
        .unwrap_or_else(|| DateTime::<Utc>::from_timestamp(0, 0).unwrap())
        .to_rfc3339_opts(SecondsFormat::Secs, true)
}

/// Generator overrides loadable from `--config` (TOML, all keys optional)
/// and individual flags; flags win over the file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenOverrides {
    pub snr_lo: Option<f64>,
    pub snr_hi: Option<f64>,
    pub noise_sigma_w: Option<f64>,
    pub outlier_prob: Option<f64>,
    pub outlier_lo: Option<f64>,
    pub outlier_hi: Option<f64>,
    pub map_slope: Option<f64>,
    pub map_intercept: Option<f64>,
    pub map_jitter_sigma: Option<f64>,
    pub airtime_grid: Option<Vec<f64>>,
}

impl GenOverrides {
    fn load(path: &Path) -> Result<GenOverrides> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    fn merge(self, flags: GenOverrides) -> GenOverrides {
        GenOverrides {
            snr_lo: flags.snr_lo.or(self.snr_lo),
            snr_hi: flags.snr_hi.or(self.snr_hi),
            noise_sigma_w: flags.noise_sigma_w.or(self.noise_sigma_w),
            outlier_prob: flags.outlier_prob.or(self.outlier_prob),
            outlier_lo: flags.outlier_lo.or(self.outlier_lo),
            outlier_hi: flags.outlier_hi.or(self.outlier_hi),
            map_slope: flags.map_slope.or(self.map_slope),
            map_intercept: flags.map_intercept.or(self.map_intercept),
            map_jitter_sigma: flags.map_jitter_sigma.or(self.map_jitter_sigma),
            airtime_grid: flags.airtime_grid.or(self.airtime_grid),
        }
    }

    fn apply_profile(&self, profile: &mut PlatformProfile) {
        if let Some(v) = self.noise_sigma_w {
            profile.noise_sigma_w = v;
        }
        if let Some(v) = self.outlier_prob {
            profile.outlier_prob = v;
        }
        if let Some(v) = self.outlier_lo {
            profile.outlier_range_w.0 = v;
        }
        if let Some(v) = self.outlier_hi {
            profile.outlier_range_w.1 = v;
        }
    }

    fn apply_config(&self, cfg: &mut GenConfig) {
        if let Some(v) = self.snr_lo {
            cfg.snr_range_db.0 = v;
        }
        if let Some(v) = self.snr_hi {
            cfg.snr_range_db.1 = v;
        }
        if let Some(v) = self.map_slope {
            cfg.map_slope = v;
        }
        if let Some(v) = self.map_intercept {
            cfg.map_intercept = v;
        }
        if let Some(v) = self.map_jitter_sigma {
            cfg.map_jitter_sigma = v;
        }
        if let Some(v) = &self.airtime_grid {
            cfg.airtime_grid = v.clone();
        }
    }
}

/// Registered dataset files carry their seed in the name; a CSV itself
/// cannot.
fn seed_from_filename(path: &Path) -> Option<u64> {
    path.file_stem()?
        .to_str()?
        .rsplit_once("_seed")?
        .1
        .parse()
        .ok()
}

fn dataset_path(reg: &Registry, platform: &str, scheduler: Scheduler, seed: u64) -> PathBuf {
    reg.datasets_dir()
        .join(format!("{platform}_{scheduler}_seed{seed}.csv"))
}

fn write_dataset(reg: &Registry, ds: &Dataset, seed: u64) -> Result<PathBuf> {
    let path = dataset_path(reg, ds.platform(), ds.scheduler(), seed);
    vbspower::emit_csv(ds, &path)?;
    reg.record(&path)?;
    Ok(path)
}

pub fn cmd_generate(reg: &Registry, args: &GenerateArgs) -> Result<(), CliError> {
    let mut profile = PlatformProfile::builtin(&args.platform)
        .ok_or_else(|| CliError::Usage(format!("unknown platform `{}`", args.platform)))?;

    let overrides = match &args.config {
        Some(path) => GenOverrides::load(path)
            .map_err(CliError::Data)?
            .merge(args.overrides()),
        None => args.overrides(),
    };
    overrides.apply_profile(&mut profile);

    if args.campaign {
        let (_, n_default, n_custom) = datagen::REFERENCE_CAMPAIGN_SIZES
            .iter()
            .find(|(a, _, _)| *a == args.platform)
            .copied()
            .expect("builtin platform has reference sizes");
        let (default_ds, custom_ds) =
            datagen::campaign(&profile, n_default, n_custom, args.seed)
                .map_err(|e| CliError::Data(e.into()))?;
        let p1 = write_dataset(reg, &default_ds, args.seed).map_err(CliError::Data)?;
        let p2 = write_dataset(reg, &custom_ds, args.seed).map_err(CliError::Data)?;
        println!(
            "generated campaign for {} (seed {}): {} default rows -> {}, {} custom rows -> {}",
            args.platform,
            args.seed,
            default_ds.len(),
            p1.display(),
            custom_ds.len(),
            p2.display()
        );
        return Ok(());
    }

    let scheduler = match args.scheduler.as_deref() {
        Some("default") => Scheduler::Default,
        Some("custom") => Scheduler::Custom,
        Some(other) => {
            return Err(CliError::Usage(format!(
                "scheduler must be `default` or `custom`, got `{other}`"
            )))
        }
        None => {
            return Err(CliError::Usage(
                "either --campaign or --scheduler is required".into(),
            ))
        }
    };
    let n = args.n.ok_or_else(|| {
        CliError::Usage("--n is required unless --campaign is given".into())
    })?;
    if n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }

    let mut cfg = GenConfig::new(profile, scheduler, n, args.seed);
    overrides.apply_config(&mut cfg);
    let ds = datagen::generate(&cfg).map_err(|e| CliError::Data(e.into()))?;
    let path = write_dataset(reg, &ds, args.seed).map_err(CliError::Data)?;
    println!(
        "generated {} {} rows for {} (seed {}) -> {}",
        ds.len(),
        scheduler,
        args.platform,
        args.seed,
        path.display()
    );
    Ok(())
}

pub fn cmd_fit(
    reg: &Registry,
    dataset: &Path,
    kind: FitKind,
    variant: Variant,
    scenario: &str,
    seed: Option<u64>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let ds = vbspower::ingest_csv(dataset).map_err(|e| CliError::Data(e.into()))?;
    let seed = seed
        .or(ds.seed())
        .or_else(|| seed_from_filename(dataset))
        .unwrap_or(0);

    let (payload, rmse, n, iters, flags) = match kind {
        FitKind::DefaultReg => {
            let fit = regression::fit_default(&ds).map_err(|e| CliError::Data(e.into()))?;
            (
                ModelPayload::DefaultReg(fit.params),
                fit.train_rmse_w,
                fit.n_samples,
                fit.solver_iters,
                fit.unconstrained,
            )
        }
        FitKind::CustomReg => {
            let fit =
                regression::fit_custom(&ds, variant).map_err(|e| CliError::Data(e.into()))?;
            (
                ModelPayload::CustomReg(fit.params),
                fit.train_rmse_w,
                fit.n_samples,
                fit.solver_iters,
                fit.unconstrained,
            )
        }
    };

    let model = ModelFile {
        payload,
        platform: ds.platform().to_string(),
        train_scenario: scenario.to_string(),
        seed,
        created_at: created_at(),
    };
    let path = save_into_registry(reg, &model, out)?;
    println!(
        "fit {} on {} samples: train RMSE {:.4} W ({} solver iterations) -> {}",
        model.model_kind().as_str(),
        n,
        rmse,
        iters,
        path.display()
    );
    if !flags.is_empty() {
        println!("unconstrained parameters (set to zero): {}", flags.join(", "));
    }
    Ok(())
}

pub fn cmd_train(reg: &Registry, args: &TrainArgs) -> Result<(), CliError> {
    let ds = vbspower::ingest_csv(&args.dataset).map_err(|e| CliError::Data(e.into()))?;
    let cfg = TrainConfig {
        learning_rate: args.lr,
        batch_size: args.batch,
        epochs: args.epochs,
        l1_activity_coeff: args.l1,
        seed: args.seed,
        ..TrainConfig::default()
    };

    let (model, trace) = match &args.warm_start {
        Some(path) => {
            let source = vbspower::load_model(path).map_err(|e| CliError::Data(e.into()))?;
            let ModelPayload::Mlp { model: source, .. } = source.payload else {
                return Err(CliError::Data(anyhow!(
                    "{} is not an mlp model file",
                    path.display()
                )));
            };
            mlp::fine_tune(&source, &ds, &cfg).map_err(|e| CliError::Data(e.into()))?
        }
        None => mlp::train(&ds, &cfg).map_err(|e| CliError::Data(e.into()))?,
    };

    let train_rmse = mlp::rmse_on(&model, ds.samples());
    let final_loss = *trace.epoch_losses.last().expect("at least one epoch");
    let file = ModelFile {
        payload: modelfile::mlp_payload(model, cfg),
        platform: ds.platform().to_string(),
        train_scenario: args.scenario.clone(),
        seed: args.seed,
        created_at: created_at(),
    };
    let path = save_into_registry(reg, &file, args.out.as_deref())?;
    println!(
        "trained mlp for {} epochs ({} steps): final loss {:.6}, train RMSE {:.4} W -> {}",
        args.epochs,
        trace.total_steps,
        final_loss,
        train_rmse,
        path.display()
    );
    Ok(())
}

fn save_into_registry(
    reg: &Registry,
    model: &ModelFile,
    out: Option<&Path>,
) -> Result<PathBuf, CliError> {
    let path = match out {
        Some(p) => p.to_path_buf(),
        None => reg.models_dir().join(format!(
            "{}_{}_{}_seed{}.toml",
            model.model_kind().as_str(),
            model.platform,
            model.train_scenario,
            model.seed
        )),
    };
    vbspower::save_model(model, &path).map_err(|e| CliError::Data(e.into()))?;
    if path.starts_with(reg.root()) {
        reg.record(&path).map_err(CliError::Data)?;
    }
    Ok(path)
}

/// Parses `--seeds`: a single value, `a..b` (inclusive) or a comma list.
pub fn parse_seeds(spec: &str) -> Result<Vec<u64>, CliError> {
    let bad = |detail: &str| CliError::Usage(format!("invalid --seeds `{spec}`: {detail}"));
    if let Some((a, b)) = spec.split_once("..") {
        let lo: u64 = a.trim().parse().map_err(|_| bad("range start"))?;
        let hi: u64 = b.trim().parse().map_err(|_| bad("range end"))?;
        if hi < lo {
            return Err(bad("range end below start"));
        }
        return Ok((lo..=hi).collect());
    }
    spec.split(',')
        .map(|s| s.trim().parse().map_err(|_| bad("not an integer")))
        .collect()
}

pub fn cmd_eval(
    reg: &Registry,
    scenario: Scenario,
    platform: &str,
    seeds: &[u64],
    kinds: &[ModelChoice],
) -> Result<(), CliError> {
    let mut reports = Vec::new();
    let mut scatter_paths = Vec::new();

    for &seed in seeds {
        let default_path = dataset_path(reg, platform, Scheduler::Default, seed);
        let custom_path = dataset_path(reg, platform, Scheduler::Custom, seed);
        for p in [&default_path, &custom_path] {
            if !p.exists() {
                return Err(CliError::Data(anyhow!(
                    "missing dataset {} (run `generate --platform {} --campaign --seed {}`)",
                    p.display(),
                    platform,
                    seed
                )));
            }
        }
        let data = CampaignData {
            default_ds: vbspower::ingest_csv(&default_path)
                .map_err(|e| CliError::Data(e.into()))?,
            custom_ds: vbspower::ingest_csv(&custom_path)
                .map_err(|e| CliError::Data(e.into()))?,
        };
        let outcome =
            eval::run_scenario(scenario, &data, seed, kinds).map_err(|e| CliError::Data(e.into()))?;
        for scatter in &outcome.scatters {
            let path = reg.reports_dir().join(format!(
                "scatter_{}_{}_{}_seed{}.csv",
                scenario.code(),
                platform,
                scatter.model_kind.as_str(),
                seed
            ));
            fs::write(&path, eval::scatter_to_csv(scatter))
                .with_context(|| format!("writing {}", path.display()))
                .map_err(CliError::Data)?;
            scatter_paths.push(path);
        }
        reports.extend(outcome.reports);
    }

    let tag = format!(
        "{}_{}_seeds{}-{}",
        scenario.code(),
        platform,
        seeds.first().unwrap(),
        seeds.last().unwrap()
    );
    let csv_path = reg.reports_dir().join(format!("eval_{tag}.csv"));
    fs::write(&csv_path, eval::reports_to_csv(&reports))
        .with_context(|| format!("writing {}", csv_path.display()))
        .map_err(CliError::Data)?;
    let toml_path = reg.reports_dir().join(format!("eval_{tag}.toml"));
    fs::write(&toml_path, eval::reports_to_toml(&reports))
        .with_context(|| format!("writing {}", toml_path.display()))
        .map_err(CliError::Data)?;

    // Median test RMSE per model kind, for bar-style plots.
    let bars_path = reg.reports_dir().join(format!("bars_{tag}.csv"));
    let mut bars = String::from("scenario,platform,model_kind,median_test_rmse_w,n_seeds\n");
    for &kind in kinds {
        let values: Vec<f64> = reports
            .iter()
            .filter(|r| r.model_kind == kind)
            .map(|r| r.test_rmse_w)
            .collect();
        bars.push_str(&format!(
            "{},{},{},{:.6},{}\n",
            scenario.code(),
            platform,
            kind.as_str(),
            eval::median(&values),
            values.len()
        ));
    }
    fs::write(&bars_path, bars)
        .with_context(|| format!("writing {}", bars_path.display()))
        .map_err(CliError::Data)?;

    for p in scatter_paths
        .iter()
        .chain([&csv_path, &toml_path, &bars_path])
    {
        reg.record(p).map_err(CliError::Data)?;
    }

    for r in &reports {
        println!(
            "scenario {} {} {} seed {}: train RMSE {:.4} W, test RMSE {:.4} W \
             (MAE {:.4}), {}/{} test points skipped",
            r.scenario.code(),
            r.platform,
            r.model_kind.as_str(),
            r.seed,
            r.train_rmse_w,
            r.test_rmse_w,
            r.test_mae_w,
            r.n_infeasible_skipped,
            r.n_test
        );
    }
    println!("wrote {} and {}", csv_path.display(), bars_path.display());
    Ok(())
}

pub fn cmd_predict(args: &PredictArgs) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&args.airtime) {
        return Err(CliError::Usage(format!(
            "airtime must be in [0, 1], got {}",
            args.airtime
        )));
    }
    if args.snr < 0.0 {
        return Err(CliError::Usage(format!(
            "snr must be nonnegative, got {}",
            args.snr
        )));
    }
    if args.mcs > vbspower::dataset::MCS_MAX {
        return Err(CliError::Usage(format!(
            "mcs must be in 0..={}, got {}",
            vbspower::dataset::MCS_MAX,
            args.mcs
        )));
    }

    let model = vbspower::load_model(&args.model).map_err(|e| CliError::Data(e.into()))?;
    let watts = match &model.payload {
        ModelPayload::DefaultReg(p) => {
            regression::predict_default(p, args.airtime, args.snr)
        }
        ModelPayload::CustomReg(p) => {
            match regression::predict_custom(p, args.airtime, args.snr, args.mcs) {
                Ok(w) => w,
                Err(e) => return Err(CliError::Infeasible(e.to_string())),
            }
        }
        ModelPayload::Mlp { model: m, .. } => m.predict(args.airtime, args.snr, args.mcs),
    };
    println!("{watts:.4}");
    Ok(())
}

pub fn cmd_registry_list(reg: &Registry) -> Result<(), CliError> {
    let entries = reg.load_index().map_err(CliError::Data)?;
    if entries.is_empty() {
        println!("registry at {} is empty", reg.root().display());
        return Ok(());
    }
    for e in &entries {
        println!(
            "{:<8} platform={:<8} scenario={:<8} seed={:<6} {}",
            e.kind, e.platform, e.scenario, e.seed, e.path
        );
    }
    println!("{} artifacts", entries.len());
    Ok(())
}

pub fn cmd_registry_rebuild(reg: &Registry) -> Result<(), CliError> {
    let entries = reg.rebuild().map_err(CliError::Data)?;
    println!(
        "rebuilt index at {}: {} artifacts",
        reg.root().display(),
        entries.len()
    );
    Ok(())
}

/// Parses `--model-kinds` (comma list of `regression` / `nn`).
pub fn parse_kinds(spec: &str) -> Result<Vec<ModelChoice>, CliError> {
    spec.split(',')
        .map(|s| {
            ModelChoice::parse(s.trim()).ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown model kind `{s}` (expected `regression` or `nn`)"
                ))
            })
        })
        .collect()
}
