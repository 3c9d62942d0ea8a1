//! Temporary diagnostics (not part of the suite; run explicitly).

use vbspower::datagen;
use vbspower::eval::{self, CampaignData, ModelChoice, Scenario};
use vbspower::regression::{fit_default, fit_custom, Variant};

#[test]
#[ignore]
fn probe_scenarios() {
    for alias in ["NUC1", "Server2"] {
        for seed in [1u64, 2, 3] {
            let (default_ds, custom_ds) = datagen::default_campaign(alias, seed).unwrap();
            let data = CampaignData {
                default_ds: default_ds.clone(),
                custom_ds: custom_ds.clone(),
            };
            for scenario in [
                Scenario::DefaultToDefault,
                Scenario::DefaultToCustomTest,
                Scenario::CustomToCustomTest,
            ] {
                for kind in [ModelChoice::Regression, ModelChoice::Nn] {
                    let out = eval::run_scenario(scenario, &data, seed, &[kind]).unwrap();
                    let r = &out.reports[0];
                    println!(
                        "{alias} seed {seed} {} {}: train {:.4} test {:.4} (mae {:.4}) skipped {}/{}",
                        scenario.code(),
                        kind.as_str(),
                        r.train_rmse_w,
                        r.test_rmse_w,
                        r.test_mae_w,
                        r.n_infeasible_skipped,
                        r.n_test
                    );
                }
            }
            let fd = fit_default(&default_ds).unwrap();
            println!(
                "{alias} seed {seed} eq1 on whole default: rmse {:.4} coeffs {:?}",
                fd.train_rmse_w,
                fd.params.coeffs()
            );
            let fb = fit_custom(&default_ds, Variant::Continuous).unwrap();
            println!(
                "{alias} seed {seed} eq3 on whole DEFAULT (B): rmse {:.4} flags {:?}\n  feas ({:.3}, {:.3}) thresh ({:.3}, {:.3}) rise {:?}",
                fb.train_rmse_w,
                fb.unconstrained,
                fb.params.feasibility_line[0],
                fb.params.feasibility_line[1],
                fb.params.threshold_line[0],
                fb.params.threshold_line[1],
                fb.params.rise,
            );
            let fc = fit_custom(&custom_ds, Variant::Continuous).unwrap();
            println!(
                "{alias} seed {seed} eq3 on whole custom: rmse {:.4} flags {:?}\n  coeffs {:?}",
                fc.train_rmse_w, fc.unconstrained, fc.params.coeffs()
            );
        }
    }
}
