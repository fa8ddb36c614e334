//! Ignored diagnostics used when tuning scenario magnitudes; run with
//! `cargo test -p rfcpd --release --test calibration -- --ignored --nocapture`.

use rfcpd::detector::{argmin_within, EntropyReference};
use rfcpd::entropy::entropy_curve_from;
use rfcpd::regularity::{regularity_curve, Measure};
use rfcpd::series::DetectorParams;
use rfcpd::sim::{gen_scenario, monte_carlo_rmse, MethodConfig, ScenarioKind, SimulationScenario};

fn histogram(tag: &str, estimates: &[usize], cp: usize) {
    let mut errs: Vec<i64> = estimates.iter().map(|&e| e as i64 - cp as i64).collect();
    errs.sort_unstable();
    let n = errs.len();
    let q = |p: f64| errs[(p * (n - 1) as f64).round() as usize];
    println!(
        "{tag}: min={} q10={} q25={} med={} q75={} q90={} max={} | mean={:.2}",
        q(0.0),
        q(0.10),
        q(0.25),
        q(0.5),
        q(0.75),
        q(0.90),
        q(1.0),
        errs.iter().sum::<i64>() as f64 / n as f64
    );
}

#[test]
#[ignore]
fn s1_estimate_distributions() {
    let scn = SimulationScenario {
        kind: ScenarioKind::S1Discrete,
        t_len: 1000,
        cp: 666,
        jump: 1.75,
        fuzziness: 0.0,
        seed: 42,
    };
    let config = MethodConfig {
        params: DetectorParams::new(50, 5.0, 5.0),
        measure: Measure::Ks,
    };
    let c = monte_carlo_rmse(&scn, &config, 200).unwrap();
    println!(
        "rmse proposed={:.3} base={:.3}",
        c.proposed.rmse, c.base.rmse
    );
    histogram("proposed", &c.proposed.estimates, scn.cp);
    histogram("base", &c.base.estimates, scn.cp);
}

#[test]
#[ignore]
fn s1_curve_sections() {
    let scn = SimulationScenario {
        kind: ScenarioKind::S1Discrete,
        t_len: 1000,
        cp: 666,
        jump: 1.75,
        fuzziness: 0.0,
        seed: 42,
    };
    let params = DetectorParams::new(50, 5.0, 5.0);
    let reference = EntropyReference::new(&params, scn.t_len).unwrap();
    let series = gen_scenario(&scn).unwrap();
    let r = regularity_curve(&series, params.delta_reg, &Measure::Ks).unwrap();
    let h = entropy_curve_from(&r, &params).unwrap();
    let z = reference.studentize(h.values());
    println!("argmin R={} argmin z={}", argmin_within(r.values(), 50), argmin_within(&z, 50));
    for s in (596..=736).step_by(5) {
        println!(
            "s={s} R={:.4} H={:.6} z={:+.4}",
            r.at(s),
            h.at(s),
            z[s - 1]
        );
    }
}

#[test]
#[ignore]
fn s1_ttest_curve_sections() {
    let scn = SimulationScenario {
        kind: ScenarioKind::S1Discrete,
        t_len: 1000,
        cp: 666,
        jump: 2.0,
        fuzziness: 0.0,
        seed: 44,
    };
    let params = DetectorParams::new(50, 5.0, 5.0);
    let reference = EntropyReference::new(&params, scn.t_len).unwrap();
    let series = gen_scenario(&scn).unwrap();
    let r = regularity_curve(&series, params.delta_reg, &Measure::TTest { welch: false }).unwrap();
    let h = entropy_curve_from(&r, &params).unwrap();
    let z = reference.studentize(h.values());
    let zmin = argmin_within(&z, 50);
    println!("argmin R={} argmin z={zmin}", argmin_within(r.values(), 50));
    for s in (556..=776).step_by(10) {
        println!("s={s} R={:.5} H={:.6} z={:+.5}", r.at(s), h.at(s), z[s - 1]);
    }
    println!("-- around argmin z --");
    for s in (zmin.saturating_sub(10)..=(zmin + 10).min(1000)).step_by(2) {
        println!("s={s} R={:.5} H={:.6} z={:+.5}", r.at(s), h.at(s), z[s - 1]);
    }
}

#[test]
#[ignore]
fn s2_curve_sections() {
    let scn = SimulationScenario {
        kind: ScenarioKind::S2Continuous,
        t_len: 1000,
        cp: 666,
        jump: 2.0,
        fuzziness: 150.0,
        seed: 45,
    };
    let params = DetectorParams::new(50, 50.0, 50.0);
    let reference = EntropyReference::new(&params, scn.t_len).unwrap();
    let series = gen_scenario(&scn).unwrap();
    let r = regularity_curve(&series, params.delta_reg, &Measure::Ks).unwrap();
    let h = entropy_curve_from(&r, &params).unwrap();
    let z = reference.studentize(h.values());
    println!("argmin R={} argmin z={}", argmin_within(r.values(), 150), argmin_within(&z, 150));
    for s in (200..=950).step_by(25) {
        println!("s={s} R={:.4} H={:.6} z={:+.4}", r.at(s), h.at(s), z[s - 1]);
    }
}

#[test]
#[ignore]
fn s2_wide_ramp_distribution() {
    for (jump, fz) in [(4.0, 150.0), (2.0, 150.0), (3.0, 100.0)] {
        let scn = SimulationScenario {
            kind: ScenarioKind::S2Continuous,
            t_len: 1000,
            cp: 666,
            jump,
            fuzziness: fz,
            seed: 42,
        };
        let config = MethodConfig {
            params: DetectorParams::new(50, 50.0, 50.0),
            measure: Measure::Ks,
        };
        let c = monte_carlo_rmse(&scn, &config, 200).unwrap();
        println!(
            "jump={jump} F={fz}: rmse proposed={:.2} base={:.2}",
            c.proposed.rmse, c.base.rmse
        );
        histogram("  proposed", &c.proposed.estimates, scn.cp);
        histogram("  base", &c.base.estimates, scn.cp);
    }
}
