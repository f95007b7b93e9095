//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails.
//!
//! Run with `cargo test -p packsim-core --test acceptance`.

use std::process::ExitCode;
use std::time::Instant;

use packsim_core::control::{cc_cv_command, ChargeMode};
use packsim_core::engine::{charge_time, cycle_events, simulate, TimeSeries};
use packsim_core::planner::{rank, verify_rank, PlannerConstraints, VerifyOptions};
use packsim_core::run::{compare_csv, compare_svg, run_compare};
use packsim_core::soc::{coulomb_step, SocState};
use packsim_core::topology::enumerate_factorizations;
use packsim_core::{
    CellSpec, ChargerProfile, ControlRegion, PackConfig, Phase, Scenario, Topology,
    PAPER_ETA_CHARGE,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const H48: f64 = 48.0 * 3600.0;
const SEED: u64 = 0x5eed_ba77;

struct Validator {
    failed: Vec<String>,
    total: usize,
}

impl Validator {
    fn new() -> Self {
        Validator {
            failed: Vec::new(),
            total: 0,
        }
    }

    fn criterion(&mut self, id: &str, title: &str, run: impl FnOnce() -> Result<String, String>) {
        self.total += 1;
        let start = Instant::now();
        let outcome = run();
        let ms = start.elapsed().as_millis();
        match outcome {
            Ok(detail) => println!("PASS  {id:<5} {title} ({detail}) [{ms} ms]"),
            Err(detail) => {
                println!("FAIL  {id:<5} {title}: {detail} [{ms} ms]");
                self.failed.push(id.to_string());
            }
        }
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn pack(s: u32, p: u32) -> PackConfig {
    PackConfig::new(s, p, CellSpec::tesla_model_y()).unwrap()
}

fn hours(
    config: &PackConfig,
    profile: &ChargerProfile,
    duration: f64,
    dt: f64,
) -> Result<f64, String> {
    let series = simulate(config, profile, duration, dt, 0.0).map_err(|e| e.to_string())?;
    charge_time(&series).ok_or_else(|| format!("{config}: full charge not reached"))
}

const PAPER: [(u32, u32, f64); 3] = [(92, 9, 16.2), (46, 18, 32.4), (142, 5, 9.0)];

fn ac1_paper_reproduction() -> Result<String, String> {
    // The calibration constant is the one the 92S9P run fixes.
    let implied = 210.15 / (16.2 * 15.0);
    ensure((implied - PAPER_ETA_CHARGE).abs() < 1e-5, || {
        format!("eta {PAPER_ETA_CHARGE} does not match 92S9P calibration {implied}")
    })?;
    let profile = ChargerProfile::paper(15.0);
    let mut parts = Vec::new();
    for (s, p, expected) in PAPER {
        let config = pack(s, p);
        let start = Instant::now();
        let t = hours(&config, &profile, H48, 1.0)?;
        let elapsed = start.elapsed().as_secs_f64();
        let rel = (t - expected).abs() / expected;
        ensure(rel <= 0.005, || {
            format!("{config}: {t:.4} h vs {expected} h (rel {rel:.2e})")
        })?;
        ensure(elapsed < 1.0, || {
            format!("{config}: run took {elapsed:.3} s")
        })?;
        parts.push(format!("{config} {t:.3} h"));
    }
    Ok(parts.join(", "))
}

fn ac2_ratios() -> Result<String, String> {
    // Default (uncalibrated) eta so the check does not lean on the calibration.
    let profile = ChargerProfile {
        mode: ChargeMode::CcOnly,
        ..ChargerProfile::default()
    };
    let base = hours(&pack(92, 9), &profile, H48, 1.0)?;
    let wide = hours(&pack(46, 18), &profile, H48, 1.0)?;
    let tall = hours(&pack(142, 5), &profile, H48, 1.0)?;
    let r_wide = wide / base;
    let r_tall = tall / base;
    ensure((r_wide - 2.000).abs() <= 1e-3, || {
        format!("46S18P/92S9P = {r_wide}")
    })?;
    ensure((r_tall - 0.5556).abs() <= 1e-3, || {
        format!("142S5P/92S9P = {r_tall}")
    })?;
    Ok(format!("{r_wide:.6}, {r_tall:.6}"))
}

fn ac3_current_scaling() -> Result<String, String> {
    let mut worst = 0.0f64;
    for (s, p, _) in PAPER {
        let config = pack(s, p);
        let t15 = hours(&config, &ChargerProfile::paper(15.0), H48, 1.0)?;
        let t30 = hours(&config, &ChargerProfile::paper(30.0), H48, 1.0)?;
        let rel = (t30 - t15 / 2.0).abs() / (t15 / 2.0);
        worst = worst.max(rel);
        ensure(rel <= 1e-6, || {
            format!("{config}: 30 A {t30} h vs 15 A {t15} h")
        })?;
    }
    Ok(format!("worst rel {worst:.2e}"))
}

fn ac4_analytical_oracle() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    for case in 0..200 {
        let s = rng.random_range(1..=300u32);
        let p = rng.random_range(1..=40u32);
        let capacity = rng.random_range(0.5..60.0);
        // keep each run within two days of simulated time
        let ideal_h = rng.random_range(0.5..40.0);
        let current = f64::from(p) * capacity / ideal_h;
        let cell = CellSpec {
            capacity,
            energy: capacity * 3.7,
            ..CellSpec::tesla_model_y()
        };
        let config = PackConfig::new(s, p, cell).unwrap();
        let profile = ChargerProfile {
            i_charge: current,
            mode: ChargeMode::CcOnly,
            eta_charge: 1.0,
            ..ChargerProfile::default()
        };
        let oracle = f64::from(p) * capacity / current;
        let simulated = hours(&config, &profile, (oracle + 1.0) * 3600.0, 1.0)?;
        let rel = (simulated - oracle).abs() / simulated;
        worst = worst.max(rel);
        ensure(rel < 1e-4, || {
            format!("case {case} {config} C={capacity} I={current}: {simulated} vs {oracle}")
        })?;
    }
    Ok(format!("200 cases, worst rel {worst:.2e}"))
}

fn ac5_cc_cv_sanity() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 5);
    let mut cases: Vec<(u32, u32, f64)> = PAPER.iter().map(|&(s, p, _)| (s, p, 15.0)).collect();
    for _ in 0..12 {
        cases.push((
            rng.random_range(1..=200),
            rng.random_range(1..=20),
            rng.random_range(5.0..60.0),
        ));
    }
    let mut samples_checked = 0usize;
    for (s, p, current) in cases {
        let config = pack(s, p);
        let cc_cv = ChargerProfile {
            mode: ChargeMode::CcCv,
            ..ChargerProfile::default()
        }
        .with_current(current);
        let cc_only = ChargerProfile {
            mode: ChargeMode::CcOnly,
            ..cc_cv.clone()
        };
        let horizon = (config.capacity() / current * 2.0 + 2.0) * 3600.0;
        let series = simulate(&config, &cc_cv, horizon, 1.0, 0.0).map_err(|e| e.to_string())?;
        let t_cv = charge_time(&series).ok_or_else(|| format!("{config}: cc_cv never full"))?;
        let t_cc = hours(&config, &cc_only, horizon, 1.0)?;
        ensure(t_cv >= t_cc, || {
            format!("{config} @ {current} A: cc_cv {t_cv} < cc_only {t_cc}")
        })?;

        let v_limit = config.cv_voltage() + 1e-6;
        let mut last_cv: Option<(f64, f64)> = None;
        for sample in &series.samples {
            samples_checked += 1;
            ensure(sample.v_pack <= v_limit, || {
                format!(
                    "{config}: {} V above limit at t={}",
                    sample.v_pack, sample.t
                )
            })?;
            if sample.relay.phase == Phase::Charging {
                ensure((0.0..=current).contains(&sample.i_pack), || {
                    format!("{config}: commanded {} A at t={}", sample.i_pack, sample.t)
                })?;
            }
            if sample.control_region == ControlRegion::Cv {
                if let Some((soc0, i0)) = last_cv {
                    if sample.soc.soc >= soc0 {
                        ensure(sample.i_pack <= i0, || {
                            format!("{config}: CV current rose {i0} -> {} A", sample.i_pack)
                        })?;
                    }
                }
                last_cv = Some((sample.soc.soc, sample.i_pack));
            } else {
                last_cv = None;
            }
        }

        // and directly on the control law over an SOC grid
        let mut prev = f64::INFINITY;
        for k in 0..=10_000 {
            let soc = f64::from(k) / 10_000.0;
            let (i, region) = cc_cv_command(&cc_cv, &config, soc).map_err(|e| e.to_string())?;
            if region == ControlRegion::Cv {
                ensure(i <= prev, || {
                    format!("{config}: CV current rose at soc {soc}")
                })?;
                prev = i;
            }
        }
    }
    Ok(format!("15 configs, {samples_checked} samples"))
}

fn ac6_coulomb_exactness() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 6);
    let mut worst = 0.0f64;
    let mut checked = 0;
    for schedule in 0..100 {
        let capacity = rng.random_range(1.0..300.0);
        let eta = rng.random_range(0.7..=1.0);
        let dt = rng.random_range(0.1..10.0);
        let mut state = SocState::new(rng.random_range(0.0..=1.0)).unwrap();
        let mut exact = state.soc;
        let mut clamped = false;
        for _ in 0..rng.random_range(1..20) {
            let current: f64 = rng.random_range(-50.0..50.0);
            let steps = rng.random_range(1..500u32);
            for _ in 0..steps {
                state =
                    coulomb_step(state, current, dt, capacity, eta).map_err(|e| e.to_string())?;
            }
            let factor = if current > 0.0 { eta } else { 1.0 };
            exact += factor * current * f64::from(steps) * dt / (3600.0 * capacity);
            if !(0.0..=1.0).contains(&exact) {
                clamped = true;
            }
            if clamped {
                break;
            }
            let err = (state.soc - exact).abs();
            worst = worst.max(err);
            checked += 1;
            ensure(err <= 1e-12, || {
                format!(
                    "schedule {schedule}: stepped {} vs closed form {exact}",
                    state.soc
                )
            })?;
        }
    }
    Ok(format!("{checked} segment ends, worst abs {worst:.1e}"))
}

fn brute_force_divisor_pairs(n: u64) -> Vec<(u64, u64)> {
    (1..=n)
        .filter(|d| n.is_multiple_of(*d))
        .map(|d| (d, n / d))
        .collect()
}

fn ac7_factorization_oracle() -> Result<String, String> {
    let f828 = enumerate_factorizations(828).map_err(|e| e.to_string())?;
    ensure(f828.len() == 18, || {
        format!("828 gives {} pairs", f828.len())
    })?;
    ensure(f828 == brute_force_divisor_pairs(828), || {
        "828 mismatch".into()
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 7);
    for _ in 0..1000 {
        let n = rng.random_range(1..=1_000_000u64);
        let got = enumerate_factorizations(n).map_err(|e| e.to_string())?;
        ensure(got == brute_force_divisor_pairs(n), || {
            format!("mismatch at n={n}")
        })?;
    }
    Ok("828 -> 18 pairs; 1000 random n agree".into())
}

fn ac8_cycling_closed_form() -> Result<String, String> {
    let config = pack(142, 5);
    let series: TimeSeries = simulate(&config, &ChargerProfile::paper(15.0), H48, 1.0, 0.0)
        .map_err(|e| e.to_string())?;
    let toggles = cycle_events(&series);
    let charge = config.capacity() / (15.0 * PAPER_ETA_CHARGE);
    let discharge = config.capacity() / 15.0;
    let expected = [
        charge,
        charge + discharge,
        2.0 * charge + discharge,
        2.0 * charge + 2.0 * discharge,
        3.0 * charge + 2.0 * discharge,
    ];
    ensure(toggles.len() == 5, || {
        format!("{} toggles: {toggles:?}", toggles.len())
    })?;
    for (got, want) in toggles.iter().zip(expected) {
        ensure((got - want).abs() <= 0.02, || {
            format!("toggle at {got:.4} h, expected {want:.4} h")
        })?;
    }
    let listed: Vec<String> = toggles.iter().map(|t| format!("{t:.2}")).collect();
    Ok(format!("toggles at {} h", listed.join(", ")))
}

fn ac9_planner() -> Result<String, String> {
    let cell = CellSpec::tesla_model_y();
    let profile = ChargerProfile::paper(15.0);
    let free = PlannerConstraints::current_only(15.0);
    let plan = rank(828, &cell, &profile, &free).map_err(|e| e.to_string())?;
    ensure(plan.entries.len() == 18, || {
        format!("{} entries", plan.entries.len())
    })?;
    ensure(plan.entries.windows(2).all(|w| w[0].p < w[1].p), || {
        "ranking is not ascending in p".into()
    })?;

    let report =
        verify_rank(&plan, &cell, &profile, VerifyOptions::default()).map_err(|e| e.to_string())?;
    ensure(report.len() == 18, || {
        format!("verified {} entries", report.len())
    })?;
    let mut worst = 0.0f64;
    for d in &report {
        let rel = d
            .relative_delta
            .ok_or_else(|| format!("{}S{}P never reached full charge", d.s, d.p))?
            .abs();
        worst = worst.max(rel);
        ensure(rel <= 1e-4, || format!("{}S{}P delta {rel:.2e}", d.s, d.p))?;
    }

    let capped = PlannerConstraints {
        v_max: Some(420.0),
        ..free
    };
    let plan = rank(828, &cell, &profile, &capped).map_err(|e| e.to_string())?;
    for e in &plan.entries {
        if e.s > 100 {
            ensure(!e.feasible, || {
                format!("{}S{}P should be infeasible", e.s, e.p)
            })?;
        }
    }
    Ok(format!(
        "18 entries ascending in p, worst verify delta {worst:.1e}"
    ))
}

fn ac10_determinism() -> Result<String, String> {
    let scenarios: Vec<Scenario> = ["92S9P", "46S18P", "142S5P"]
        .iter()
        .map(|name| {
            let mut sc = Scenario::for_pack(name.parse::<Topology>().unwrap());
            sc.charger = ChargerProfile::paper(15.0);
            sc
        })
        .collect();
    let render = |parallel: bool| -> Result<(String, String), String> {
        let runs: Vec<_> = run_compare(&scenarios, parallel)
            .into_iter()
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let refs: Vec<_> = runs.iter().collect();
        Ok((compare_csv(&refs), compare_svg(&refs)))
    };
    let first = render(true)?;
    let second = render(true)?;
    let serial = render(false)?;
    ensure(first == second, || {
        "repeated parallel compare differs".into()
    })?;
    ensure(first == serial, || {
        "parallel and serial compare differ".into()
    })?;
    Ok(format!(
        "csv {} bytes, svg {} bytes identical across 3 runs",
        first.0.len(),
        first.1.len()
    ))
}

fn main() -> ExitCode {
    let mut v = Validator::new();
    v.criterion(
        "AC1",
        "reference charge times at 15 A within 0.5%, < 1 s per run",
        ac1_paper_reproduction,
    );
    v.criterion(
        "AC2",
        "charge-time ratios 2.000 and 0.5556 within 1e-3",
        ac2_ratios,
    );
    v.criterion(
        "AC3",
        "30 A charge time is half the 15 A time within 1e-6",
        ac3_current_scaling,
    );
    v.criterion(
        "AC4",
        "cc_only matches P*C/I within 1e-4 over 200 random cases",
        ac4_analytical_oracle,
    );
    v.criterion(
        "AC5",
        "CC-CV sanity (time, current bounds, voltage limit, taper)",
        ac5_cc_cv_sanity,
    );
    v.criterion(
        "AC6",
        "Coulomb counting equals closed-form integral",
        ac6_coulomb_exactness,
    );
    v.criterion(
        "AC7",
        "factorizations agree with trial division",
        ac7_factorization_oracle,
    );
    v.criterion(
        "AC8",
        "142S5P cycling: 5 toggles within 0.02 h of closed form",
        ac8_cycling_closed_form,
    );
    v.criterion(
        "AC9",
        "planner order, verification and voltage ceiling",
        ac9_planner,
    );
    v.criterion(
        "AC10",
        "compare output is byte-identical, parallel or serial",
        ac10_determinism,
    );

    println!(
        "{}/{} acceptance criteria passed",
        v.total - v.failed.len(),
        v.total
    );
    if v.failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {}", v.failed.join(", "));
        ExitCode::FAILURE
    }
}
