//! Pilot runs behind the simulation thresholds in the acceptance suite.
//!
//! cargo run --release --example pilot

use elosteer::analytics::one_way_anova;
use elosteer::sim::{
    convergence_experiment, dense_catalog, run_trial, ConvergenceSetup, SteeringPolicy, TrialConfig,
};
use elosteer::steering::{Group, SteeringStep};

fn final_ratings(out: &elosteer::sim::TrialOutcome, g: Group) -> Vec<f64> {
    out.growth
        .learners
        .iter()
        .filter(|l| l.group == g)
        .map(|l| l.last)
        .collect()
}

fn main() {
    let catalog = dense_catalog("c", 1000.0, 2000.0, 101);
    let mut errors = Vec::new();
    for seed in 0..1000 {
        let setup = ConvergenceSetup {
            seed,
            ..Default::default()
        };
        errors.push(convergence_experiment(&setup, &catalog).unwrap().abs_error);
    }
    let within = |xs: &[f64]| xs.iter().filter(|e| **e <= 100.0).count();
    let mut sorted = errors.clone();
    sorted.sort_by(f64::total_cmp);
    println!(
        "convergence: within 100 in {}/100 (seeds 0..100), {}/1000 (seeds 0..1000); median error {:.1}, 95th pct {:.1}",
        within(&errors[..100]),
        within(&errors),
        sorted[500],
        sorted[950]
    );

    let mut ordered = 0;
    let mut gaps = Vec::new();
    for seed in 0..100 {
        let out = run_trial(&TrialConfig {
            seed,
            ..Default::default()
        })
        .unwrap();
        let g = &out.growth.groups;
        gaps.push(g[1].mean_last - g[0].mean_last);
        ordered += usize::from(g[1].mean_last > g[0].mean_last);
    }
    gaps.sort_by(f64::total_cmp);
    println!(
        "ambitious: CONTROL above NONE in {ordered}/100 seeds; median gap {:.1}, 10th pct {:.1}",
        gaps[50], gaps[10]
    );

    // Default policy and population against nearby alternatives.
    for (up, down, theta_sd, self_sd) in [
        (10, -5, 200.0, 150.0),
        (5, -5, 200.0, 150.0),
        (10, -10, 200.0, 150.0),
        (5, -5, 150.0, 100.0),
        (10, -10, 150.0, 100.0),
    ] {
        let mut ordered = 0;
        for seed in 0..100 {
            let mut cfg = TrialConfig {
                seed,
                policy: SteeringPolicy::Ambitious {
                    up: SteeringStep::new(up).unwrap(),
                    down: SteeringStep::new(down).unwrap(),
                },
                ..Default::default()
            };
            cfg.population.theta_sd = theta_sd;
            cfg.population.self_assessment_sd = self_sd;
            let g = run_trial(&cfg).unwrap().growth.groups;
            ordered += usize::from(g[1].mean_last > g[0].mean_last);
        }
        println!("ambitious up={up} down={down} theta_sd={theta_sd} self_sd={self_sd}: {ordered}/100");
    }

    let mut screened = 0;
    for seed in 0..100 {
        let out = run_trial(&TrialConfig {
            seed,
            policy: SteeringPolicy::Never,
            ..Default::default()
        })
        .unwrap();
        let s = Group::ALL.map(|g| final_ratings(&out, g));
        let p = one_way_anova(&[&s[0], &s[1], &s[2]]).unwrap().p_value;
        screened += usize::from(p < 0.10);
    }
    println!("never: ANOVA screen passes in {screened}/100 seeds");
}
