//! Fixed-step time-domain simulation of a pack on a cycling charger.
//!
//! Each step runs, in order: relay update, current command, Coulomb-counting
//! SOC update, terminal-voltage evaluation and event detection. Threshold
//! crossings are located by linear interpolation inside the step that
//! crosses them; the step itself is never subdivided.

use serde::{Deserialize, Serialize};

use crate::control::{
    commanded_current, relay_step, ChargeMode, ChargerProfile, ControlRegion, Phase, RelayState,
    MIN_TAPER_RESISTANCE,
};
use crate::error::{Error, Result};
use crate::soc::{coulomb_step_unclamped, SocState};
use crate::topology::PackConfig;

pub const DEFAULT_DT_S: f64 = 1.0;

/// State at one sample instant. `i_pack` is the current held over the
/// following step; `v_pack` is the terminal voltage at that current.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub t: f64,
    pub soc: SocState,
    pub relay: RelayState,
    pub i_pack: f64,
    pub v_pack: f64,
    pub control_region: ControlRegion,
    /// Net charge through the pack terminals since t = 0, Ah.
    pub cumulative_ah: f64,
}

impl SimState {
    /// Label used in CSV output.
    pub fn mode(&self) -> &'static str {
        match (self.relay.phase, self.control_region) {
            (Phase::Discharging, _) if self.i_pack < 0.0 => "discharge",
            (Phase::Charging, ControlRegion::Cc) => "cc",
            (Phase::Charging, ControlRegion::Cv) => "cv",
            _ => "idle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    FullChargeReached,
    RelayToggle,
    CcToCv,
    VoltageFloorHit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub dt: f64,
    pub samples: Vec<SimState>,
    pub events: Vec<Event>,
}

impl TimeSeries {
    pub fn events_of(&self, kind: EventKind) -> impl Iterator<Item = &Event> + '_ {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    pub fn final_soc(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.soc.soc)
    }

    pub fn peak_voltage(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.v_pack)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Every `stride`-th sample, starting with the first.
    pub fn decimated(&self, stride: usize) -> impl Iterator<Item = &SimState> + '_ {
        self.samples.iter().step_by(stride.max(1))
    }

    /// Sample stride that approximates `interval_s` at this series' step.
    pub fn stride_for(&self, interval_s: f64) -> usize {
        if !(interval_s > self.dt) {
            return 1;
        }
        (interval_s / self.dt).round().max(1.0) as usize
    }
}

/// Time of the first full charge, hours. `None` when the run never got
/// there.
pub fn charge_time(series: &TimeSeries) -> Option<f64> {
    series
        .events_of(EventKind::FullChargeReached)
        .next()
        .map(|e| e.t / 3600.0)
}

/// Relay toggle instants, hours.
pub fn cycle_events(series: &TimeSeries) -> Vec<f64> {
    series
        .events_of(EventKind::RelayToggle)
        .map(|e| e.t / 3600.0)
        .collect()
}

/// Fraction of the way from `a` to `b` at which `target` is met.
fn crossing(a: f64, b: f64, target: f64) -> f64 {
    if b == a {
        1.0
    } else {
        ((target - a) / (b - a)).clamp(0.0, 1.0)
    }
}

/// Distance of the CC operating point from the CV limit, per cell. The
/// controller is in CV once this is positive (non-negative for the
/// zero-resistance cutoff).
fn cv_margin(config: &PackConfig, profile: &ChargerProfile, soc: f64) -> Result<f64> {
    let cell = &config.cell;
    let ocv = cell.ocv(soc)?;
    if cell.r_internal < MIN_TAPER_RESISTANCE {
        Ok(ocv - cell.v_cv)
    } else {
        Ok(ocv + profile.i_charge / f64::from(config.p) * cell.r_internal - cell.v_cv)
    }
}

struct Stepper<'a> {
    config: &'a PackConfig,
    profile: &'a ChargerProfile,
    relay: RelayState,
    events: Vec<Event>,
}

impl Stepper<'_> {
    fn command(&self, soc: f64) -> Result<(f64, ControlRegion)> {
        commanded_current(self.relay, self.profile, self.config, soc)
    }

    fn voltage(&self, soc: f64, i_pack: f64) -> Result<f64> {
        let cell_v = self
            .config
            .cell
            .terminal_voltage(soc, i_pack / f64::from(self.config.p))?;
        Ok(f64::from(self.config.s) * cell_v)
    }

    fn push(&mut self, t: f64, kind: EventKind) {
        self.events.push(Event { t, kind });
    }

    fn force(&mut self, phase: Phase, t: f64) {
        if self.relay.phase != phase {
            self.relay = RelayState { phase };
            self.push(t, EventKind::RelayToggle);
        }
    }
}

/// Run a pack on a charger for `duration` seconds with step `dt`.
///
/// Samples are taken at `t = k * dt` for every `k` with `k * dt <= duration`.
/// The relay starts in the charging phase.
pub fn simulate(
    config: &PackConfig,
    profile: &ChargerProfile,
    duration: f64,
    dt: f64,
    initial_soc: f64,
) -> Result<TimeSeries> {
    let mut samples = Vec::with_capacity((duration / dt).clamp(0.0, 1e7) as usize + 1);
    let events = run(config, profile, duration, dt, initial_soc, false, |s| {
        samples.push(s)
    })?;
    Ok(TimeSeries {
        dt,
        samples,
        events,
    })
}

/// Time to the first full charge from `initial_soc`, hours, without
/// keeping the trajectory. Stops as soon as full charge is detected.
pub fn time_to_full_charge(
    config: &PackConfig,
    profile: &ChargerProfile,
    max_duration: f64,
    dt: f64,
    initial_soc: f64,
) -> Result<Option<f64>> {
    let events = run(config, profile, max_duration, dt, initial_soc, true, |_| {})?;
    Ok(events
        .iter()
        .find(|e| e.kind == EventKind::FullChargeReached)
        .map(|e| e.t / 3600.0))
}

fn run(
    config: &PackConfig,
    profile: &ChargerProfile,
    duration: f64,
    dt: f64,
    initial_soc: f64,
    stop_at_full: bool,
    mut record: impl FnMut(SimState),
) -> Result<Vec<Event>> {
    if !(duration > 0.0) || !duration.is_finite() {
        return Err(Error::domain(format!(
            "duration must be > 0 s, got {duration}"
        )));
    }
    if !(dt > 0.0 && dt <= duration) {
        return Err(Error::domain(format!(
            "step must satisfy 0 < dt <= duration, got dt={dt} duration={duration}"
        )));
    }
    config.cell.validate()?;
    profile.validate()?;
    let mut soc = SocState::new(initial_soc)?;

    let n_steps = (duration / dt * (1.0 + 1e-12)).floor() as usize;
    let capacity = config.capacity();
    let v_floor = f64::from(config.s) * config.cell.v_min;
    let cutoff = profile.cutoff_current();
    let tapered = profile.mode == ChargeMode::CcCv;

    let mut sim = Stepper {
        config,
        profile,
        relay: RelayState::charging(),
        events: Vec::new(),
    };
    let mut cumulative_ah = 0.0;
    // interpolated instant of the SOC-bound crossing that the relay will act on
    let mut pending_toggle: Option<f64> = None;
    // (t, soc, i_pack, region) of the previous charging sample
    let mut prev_charge: Option<(f64, f64, f64, ControlRegion)> = None;

    for k in 0..=n_steps {
        let t = k as f64 * dt;

        let next = relay_step(sim.relay, soc.soc, profile);
        if next != sim.relay {
            sim.relay = next;
            sim.push(pending_toggle.unwrap_or(t), EventKind::RelayToggle);
        }
        pending_toggle = None;

        let (mut i_pack, mut region) = sim.command(soc.soc)?;

        if sim.relay.phase == Phase::Charging && tapered && region == ControlRegion::Cv {
            if let Some((tp, sp, ip, rp)) = prev_charge {
                if rp == ControlRegion::Cc {
                    let g0 = cv_margin(config, profile, sp)?;
                    let g1 = cv_margin(config, profile, soc.soc)?;
                    sim.push(tp + crossing(g0, g1, 0.0) * dt, EventKind::CcToCv);
                }
                if i_pack <= cutoff {
                    let t_end = if ip > cutoff {
                        tp + crossing(ip, i_pack, cutoff) * (t - tp)
                    } else {
                        t
                    };
                    sim.push(t_end, EventKind::FullChargeReached);
                    sim.force(Phase::Discharging, t_end);
                    (i_pack, region) = sim.command(soc.soc)?;
                }
            } else {
                sim.push(t, EventKind::CcToCv);
                if i_pack <= cutoff {
                    sim.push(t, EventKind::FullChargeReached);
                    sim.force(Phase::Discharging, t);
                    (i_pack, region) = sim.command(soc.soc)?;
                }
            }
        }

        let mut v_pack = sim.voltage(soc.soc, i_pack)?;
        if sim.relay.phase == Phase::Discharging && i_pack < 0.0 && v_pack < v_floor {
            sim.push(t, EventKind::VoltageFloorHit);
            sim.force(Phase::Charging, t);
            (i_pack, region) = sim.command(soc.soc)?;
            v_pack = sim.voltage(soc.soc, i_pack)?;
        }

        record(SimState {
            t,
            soc,
            relay: sim.relay,
            i_pack,
            v_pack,
            control_region: region,
            cumulative_ah,
        });

        prev_charge = (sim.relay.phase == Phase::Charging).then_some((t, soc.soc, i_pack, region));

        if k == n_steps
            || (stop_at_full
                && sim
                    .events
                    .iter()
                    .any(|e| e.kind == EventKind::FullChargeReached))
        {
            break;
        }

        let (next_soc, raw) =
            coulomb_step_unclamped(soc, i_pack, dt, capacity, profile.eta_charge)?;
        match sim.relay.phase {
            Phase::Charging if raw >= profile.soc_high && soc.soc < profile.soc_high => {
                let t_full = t + crossing(soc.soc, raw, profile.soc_high) * dt;
                sim.push(t_full, EventKind::FullChargeReached);
                pending_toggle = Some(t_full);
            }
            Phase::Discharging if raw <= profile.soc_low && soc.soc > profile.soc_low => {
                pending_toggle = Some(t + crossing(soc.soc, raw, profile.soc_low) * dt);
            }
            _ => {}
        }
        cumulative_ah += i_pack * dt / 3600.0;
        soc = next_soc;
    }

    let mut events = sim.events;
    events.sort_by(|a, b| a.t.total_cmp(&b.t));
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::CellSpec;

    fn pack(s: u32, p: u32) -> PackConfig {
        PackConfig::new(s, p, CellSpec::default()).unwrap()
    }

    const H48: f64 = 48.0 * 3600.0;

    #[test]
    fn paper_profile_charge_times() {
        let prof = ChargerProfile::paper(15.0);
        for (s, p, hours) in [(92, 9, 16.2), (46, 18, 32.4), (142, 5, 9.0)] {
            let ts = simulate(&pack(s, p), &prof, H48, 1.0, 0.0).unwrap();
            let t = charge_time(&ts).unwrap();
            assert!((t - hours).abs() / hours < 0.005, "{s}S{p}P: {t}");
        }
    }

    #[test]
    fn ideal_charge_time_matches_closed_form() {
        let prof = ChargerProfile {
            mode: ChargeMode::CcOnly,
            ..ChargerProfile::default()
        };
        let ts = simulate(&pack(92, 9), &prof, H48, 1.0, 0.0).unwrap();
        let t = charge_time(&ts).unwrap();
        assert!((t - 210.15 / 15.0).abs() < 1e-6, "{t}");
        assert!((t - 14.01).abs() < 0.005);
    }

    #[test]
    fn early_stop_agrees_with_full_run() {
        for mode in [ChargeMode::CcOnly, ChargeMode::CcCv] {
            let prof = ChargerProfile {
                mode,
                ..ChargerProfile::default()
            };
            for (s, p) in [(92, 9), (3, 1), (142, 5)] {
                let full = charge_time(&simulate(&pack(s, p), &prof, H48, 1.0, 0.2).unwrap());
                let quick = time_to_full_charge(&pack(s, p), &prof, H48, 1.0, 0.2).unwrap();
                assert_eq!(full, quick, "{s}S{p}P");
            }
        }
        let short =
            time_to_full_charge(&pack(92, 9), &ChargerProfile::paper(15.0), 3600.0, 1.0, 0.0);
        assert_eq!(short.unwrap(), None);
    }

    #[test]
    fn not_reached_when_too_short() {
        let prof = ChargerProfile::paper(15.0);
        let ts = simulate(&pack(92, 9), &prof, 10.0 * 3600.0, 1.0, 0.0).unwrap();
        assert_eq!(charge_time(&ts), None);
        assert!(cycle_events(&ts).is_empty());
    }

    #[test]
    fn zero_current_holds_soc() {
        let prof = ChargerProfile::paper(0.0);
        let ts = simulate(&pack(92, 9), &prof, 3600.0, 1.0, 0.3).unwrap();
        assert!(ts.samples.iter().all(|s| s.soc.soc == 0.3));
        assert!(cycle_events(&ts).is_empty());
        assert_eq!(charge_time(&ts), None);
    }

    #[test]
    fn sampling_grid() {
        let prof = ChargerProfile::paper(15.0);
        let ts = simulate(&pack(92, 9), &prof, 100.0, 0.5, 0.0).unwrap();
        assert_eq!(ts.samples.len(), 201);
        for (k, s) in ts.samples.iter().enumerate() {
            assert_eq!(s.t, k as f64 * 0.5);
        }
        assert_eq!(ts.stride_for(60.0), 120);
        assert_eq!(ts.stride_for(0.1), 1);
    }

    #[test]
    fn rejects_bad_steps() {
        let prof = ChargerProfile::paper(15.0);
        let p = pack(1, 1);
        assert!(simulate(&p, &prof, 10.0, 0.0, 0.0).is_err());
        assert!(simulate(&p, &prof, 10.0, 20.0, 0.0).is_err());
        assert!(simulate(&p, &prof, 0.0, 1.0, 0.0).is_err());
        assert!(simulate(&p, &prof, 10.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn voltage_matches_cell_model_at_samples() {
        let prof = ChargerProfile::default();
        let config = pack(92, 9);
        let ts = simulate(&config, &prof, 20.0 * 3600.0, 1.0, 0.0).unwrap();
        for s in ts.samples.iter().step_by(97) {
            let v = 92.0
                * config
                    .cell
                    .terminal_voltage(s.soc.soc, s.i_pack / 9.0)
                    .unwrap();
            assert_eq!(s.v_pack, v);
        }
    }

    #[test]
    fn cc_cv_run_emits_transition_then_full_charge() {
        let prof = ChargerProfile::default();
        let ts = simulate(&pack(92, 9), &prof, 20.0 * 3600.0, 1.0, 0.0).unwrap();
        let kinds: Vec<_> = ts.events.iter().map(|e| e.kind).take(3).collect();
        assert_eq!(
            kinds,
            [
                EventKind::CcToCv,
                EventKind::FullChargeReached,
                EventKind::RelayToggle
            ]
        );
        let t_cv = ts.events[0].t / 3600.0;
        // CC ends when ocv + (15/9) * 0.02 reaches 4.2 V
        let soc_cv = 0.9 + (4.2 - 15.0 / 9.0 * 0.02 - 4.05) / 1.5;
        let expected = soc_cv * 210.15 / 15.0;
        assert!(
            (t_cv - expected).abs() < 1.0 / 3600.0,
            "{t_cv} vs {expected}"
        );
        assert!(charge_time(&ts).unwrap() > 210.15 / 15.0);
    }

    #[test]
    fn voltage_floor_forces_charge() {
        // Floor set just under the empty OCV so the discharge IR drop trips it.
        let cell = CellSpec {
            v_min: 2.99,
            ..CellSpec::default()
        };
        let config = PackConfig::new(10, 1, cell).unwrap();
        let prof = ChargerProfile {
            i_charge: 20.0,
            mode: ChargeMode::CcOnly,
            soc_high: 0.5,
            soc_low: 0.0,
            ..Default::default()
        };
        let ts = simulate(&config, &prof, 6.0 * 3600.0, 1.0, 0.0).unwrap();
        let floor: Vec<_> = ts.events_of(EventKind::VoltageFloorHit).collect();
        assert!(!floor.is_empty());
        for s in &ts.samples {
            if s.i_pack < 0.0 {
                assert!(s.v_pack >= 10.0 * 2.99);
            }
        }
    }

    #[test]
    fn events_are_ordered() {
        let ts = simulate(&pack(142, 5), &ChargerProfile::default(), H48, 1.0, 0.0).unwrap();
        assert!(ts.events.windows(2).all(|w| w[0].t <= w[1].t));
        assert!(ts.samples.windows(2).all(|w| w[0].t < w[1].t));
    }
}
