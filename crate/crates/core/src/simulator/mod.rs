//! Exact event-driven simulation of the two-strain branching process.
//!
//! With `z = (z1, z2)` infected hosts the next state change happens after
//! an `Exp(sum_i z_i r_i)` wait, where `r_i = alpha_i + beta_i lambda` is the
//! rate at which a single strain-`i` host dies or transmits. The acting host
//! and the outcome are then drawn proportionally to the component rates
//! (death `alpha_i`, transmission without mutation `(1 - mu_i) beta_i lambda`,
//! transmission with mutation `mu_i beta_i lambda`).
//!
//! Encounters that transmit nothing leave the state unchanged and are skipped.
//! With [`SimOptions::trace_neutral`] the full particle picture is simulated
//! instead (lifetime rate `alpha_i + lambda`, outcome drawn from the
//! offspring table) and those encounters are recorded as
//! [`EventKind::NoTransmission`]. Both produce the same law for `Z(t)`.

mod ensemble;
mod io;
mod schedule;

pub use ensemble::{
    empirical_limiting_ratio, empirical_limiting_ratio_with, ensemble, ensemble_with_cap, final_states, EnsembleStats,
    GridStats, RatioEstimate, RatioOptions,
};
pub use io::{write_ensemble_csv, write_trajectory_csv, ENSEMBLE_CSV_HEADER};
pub use schedule::LambdaSchedule;

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Strain, TwoTypeParams};
use crate::rng::SimRng;

/// Default ceiling on the total population of a single run.
pub const DEFAULT_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct PopulationState {
    pub z1: u64,
    pub z2: u64,
}

impl PopulationState {
    pub const fn new(z1: u64, z2: u64) -> Self {
        Self { z1, z2 }
    }

    pub fn total(&self) -> u64 {
        self.z1 + self.z2
    }

    pub fn is_extinct(&self) -> bool {
        self.total() == 0
    }

    pub fn count(&self, s: Strain) -> u64 {
        match s {
            Strain::One => self.z1,
            Strain::Two => self.z2,
        }
    }

    fn count_mut(&mut self, s: Strain) -> &mut u64 {
        match s {
            Strain::One => &mut self.z1,
            Strain::Two => &mut self.z2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    Death(Strain),
    /// Encounter without transmission; only recorded in tracing mode.
    NoTransmission(Strain),
    Birth {
        parent: Strain,
        child: Strain,
    },
}

impl EventKind {
    /// Change in `(z1, z2)` caused by the event.
    pub fn delta(&self) -> (i64, i64) {
        let unit = |s: Strain| match s {
            Strain::One => (1, 0),
            Strain::Two => (0, 1),
        };
        match *self {
            EventKind::Death(s) => {
                let (a, b) = unit(s);
                (-a, -b)
            }
            EventKind::NoTransmission(_) => (0, 0),
            EventKind::Birth { child, .. } => unit(child),
        }
    }

    pub fn label(&self) -> String {
        let n = |s: Strain| s.index() + 1;
        match *self {
            EventKind::Death(s) => format!("death{}", n(s)),
            EventKind::NoTransmission(s) => format!("idle{}", n(s)),
            EventKind::Birth { parent, child } => format!("birth{}->{}", n(parent), n(child)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    /// State after the event.
    pub state: PopulationState,
    pub kind: EventKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StopReason {
    Extinct,
    Cap,
    Horizon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub initial: PopulationState,
    pub events: Vec<Event>,
    pub stop: StopReason,
    pub end_time: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> PopulationState {
        self.events.last().map_or(self.initial, |e| e.state)
    }

    /// State at time `t` (right-continuous); `None` past the end of the run
    /// unless the run ended in extinction.
    pub fn state_at(&self, t: f64) -> Option<PopulationState> {
        if t > self.end_time && self.stop != StopReason::Extinct {
            return None;
        }
        let n = self.events.partition_point(|e| e.time <= t);
        Some(if n == 0 { self.initial } else { self.events[n - 1].state })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOptions {
    pub horizon: f64,
    pub cap: u64,
    pub trace_neutral: bool,
    /// Overrides `params.lambda` when set.
    pub schedule: Option<LambdaSchedule>,
}

impl SimOptions {
    pub fn new(horizon: f64) -> Self {
        Self {
            horizon,
            cap: DEFAULT_CAP,
            trace_neutral: false,
            schedule: None,
        }
    }

    pub fn with_cap(self, cap: u64) -> Self {
        Self { cap, ..self }
    }
}

/// Where a run stopped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct RunEnd {
    pub state: PopulationState,
    pub stop: StopReason,
    pub time: f64,
}

pub(crate) fn check_inputs(params: &TwoTypeParams, init: PopulationState, opts: &SimOptions) -> Result<()> {
    params.validate()?;
    if init.is_extinct() {
        return Err(Error::InvalidInit);
    }
    if !(opts.horizon.is_finite() && opts.horizon > 0.0) {
        return Err(Error::InvalidParameter {
            name: "horizon",
            value: opts.horizon,
            constraint: "must be finite and > 0",
        });
    }
    if opts.cap <= init.total() {
        return Err(Error::InvalidCap {
            cap: opts.cap,
            initial: init.total(),
        });
    }
    Ok(())
}

/// Per-host rates `[death, same-strain birth, cross-strain birth, idle]`.
fn strain_rates(params: &TwoTypeParams, lambda: f64, s: Strain, trace: bool) -> [f64; 4] {
    let (a, b, m) = (params.alpha(s), params.beta(s), params.mu(s));
    let idle = if trace { (1.0 - b) * lambda } else { 0.0 };
    [a, (1.0 - m) * b * lambda, m * b * lambda, idle]
}

/// Core loop. `observe(time, before, event)` is called for every recorded
/// event with the state just before it.
pub(crate) fn run<F>(
    params: &TwoTypeParams,
    init: PopulationState,
    opts: &SimOptions,
    rng: &mut SimRng,
    mut observe: F,
) -> RunEnd
where
    F: FnMut(PopulationState, &Event),
{
    let mut state = init;
    let mut t = 0.0;
    let mut lambda = opts.schedule.as_ref().map_or(params.lambda, |s| s.at(0.0));
    let mut rates = Strain::BOTH.map(|s| strain_rates(params, lambda, s, opts.trace_neutral));

    loop {
        if state.is_extinct() {
            return RunEnd {
                state,
                stop: StopReason::Extinct,
                time: t,
            };
        }
        if state.total() >= opts.cap {
            return RunEnd {
                state,
                stop: StopReason::Cap,
                time: t,
            };
        }
        let seg_end = opts
            .schedule
            .as_ref()
            .and_then(|s| s.next_change_after(t))
            .map_or(opts.horizon, |c| c.min(opts.horizon));

        let per_host = rates.map(|r| r.iter().sum::<f64>());
        let weight = [state.z1 as f64 * per_host[0], state.z2 as f64 * per_host[1]];
        let total = weight[0] + weight[1];
        let wait: f64 = rng.sample::<f64, _>(Exp1) / total;
        if t + wait >= seg_end {
            // Memorylessness lets the clock restart at the boundary.
            t = seg_end;
            if seg_end >= opts.horizon {
                return RunEnd {
                    state,
                    stop: StopReason::Horizon,
                    time: opts.horizon,
                };
            }
            lambda = opts.schedule.as_ref().map_or(lambda, |s| s.at(t));
            rates = Strain::BOTH.map(|s| strain_rates(params, lambda, s, opts.trace_neutral));
            continue;
        }
        t += wait;

        let mut u = rng.random::<f64>() * total;
        let parent = if u < weight[0] || weight[1] == 0.0 {
            Strain::One
        } else {
            u -= weight[0];
            Strain::Two
        };
        let n = state.count(parent) as f64;
        let r = &rates[parent.index()];
        let kind = pick_kind(parent, r, u / n);

        let before = state;
        match kind {
            EventKind::Death(s) => *state.count_mut(s) -= 1,
            EventKind::Birth { child, .. } => *state.count_mut(child) += 1,
            EventKind::NoTransmission(_) => {}
        }
        observe(before, &Event { time: t, state, kind });
    }
}

fn pick_kind(parent: Strain, rates: &[f64; 4], mut u: f64) -> EventKind {
    let kinds = [
        EventKind::Death(parent),
        EventKind::Birth { parent, child: parent },
        EventKind::Birth {
            parent,
            child: parent.other(),
        },
        EventKind::NoTransmission(parent),
    ];
    for (k, &r) in kinds.iter().zip(rates) {
        if u < r {
            return *k;
        }
        u -= r;
    }
    // Round-off at the top of the range: last kind with positive rate.
    kinds
        .iter()
        .zip(rates)
        .rev()
        .find(|(_, &r)| r > 0.0)
        .map(|(k, _)| *k)
        .unwrap_or(kinds[0])
}

/// Simulates one trajectory and records every state change.
pub fn simulate(
    params: &TwoTypeParams,
    init: PopulationState,
    horizon: f64,
    cap: u64,
    seed: u64,
) -> Result<Trajectory> {
    simulate_with(params, init, &SimOptions::new(horizon).with_cap(cap), seed)
}

pub fn simulate_with(
    params: &TwoTypeParams,
    init: PopulationState,
    opts: &SimOptions,
    seed: u64,
) -> Result<Trajectory> {
    check_inputs(params, init, opts)?;
    let mut rng = crate::rng::stream(seed, 0);
    let mut events = Vec::new();
    let end = run(params, init, opts, &mut rng, |_, e| events.push(*e));
    Ok(Trajectory {
        initial: init,
        events,
        stop: end.stop,
        end_time: end.time,
    })
}
