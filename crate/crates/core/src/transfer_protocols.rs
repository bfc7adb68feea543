//! End-to-end state transfer: the two-marked-vertex protocols, the
//! active-switch protocol on the lackadaisical walk, and parameter sweeps.

use std::f64::consts::PI;
use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::analytic_fidelity::{maximize_fidelity, search_phase, search_window, FidelityCurve, Maximum};
use crate::error::{Error, Result};
use crate::graph_space::{
    build_basis, fidelity, loop_state, receiver_target_state, stationary_state, uniform_sender_state,
    BipartiteSpec, Partition, Vertex, WalkState,
};
use crate::walk_operators::{evolve, fidelity_series, CoinConfig, CoinFlavor, MarkedScenario, ScenarioKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    TwoMarked(MarkedScenario),
    ActiveSwitch { sender: Vertex, receiver: Vertex },
}

impl Protocol {
    pub fn name(&self) -> &'static str {
        match self {
            Protocol::TwoMarked(s) => s.name(),
            Protocol::ActiveSwitch { .. } => "active_switch",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SwitchSchedule {
    pub l1: f64,
    pub l2: f64,
    pub theta_s: f64,
    pub theta_r: f64,
    pub t1: usize,
    pub t2: usize,
    /// Set when `π/θ` for either phase sits on a half-integer, where
    /// rounding direction is a convention.
    pub rounding_ambiguous: bool,
}

fn round_half_up(x: f64) -> (usize, bool) {
    let ambiguous = ((x - x.floor()) - 0.5).abs() < 1e-9;
    ((x + 0.5).floor() as usize, ambiguous)
}

impl SwitchSchedule {
    pub fn new(n1: usize, n2: usize, sender: Vertex, receiver: Vertex) -> Result<Self> {
        for (name, n) in [("n1", n1), ("n2", n2)] {
            if n < 2 {
                return Err(Error::TooSmall { name, min: 2, value: n });
            }
        }
        let spec = BipartiteSpec::switch_weights(n1, n2)?;
        let theta_s = search_phase(spec.size(sender.partition));
        let theta_r = search_phase(spec.size(receiver.partition));
        let (t1, a1) = round_half_up(PI / theta_s);
        let (t2, a2) = round_half_up(PI / theta_r);
        Ok(Self {
            l1: spec.l1(),
            l2: spec.l2(),
            theta_s,
            theta_r,
            t1,
            t2,
            rounding_ambiguous: a1 || a2,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferReport {
    pub protocol: Protocol,
    /// Total number of walk steps.
    pub steps: usize,
    pub fidelity: f64,
    /// Continuous maximizer and maximum of the closed form, when one exists.
    pub continuous_optimum: Option<(f64, f64)>,
    pub schedule: Option<SwitchSchedule>,
    /// Fidelity with the stationary state after the sender phase.
    pub midpoint_sigma_fidelity: Option<f64>,
    pub elapsed: Duration,
}

fn closed_form_for(scenario: &MarkedScenario) -> Result<FidelityCurve> {
    match (scenario.kind, scenario.flavor) {
        (ScenarioKind::DiffPartition { .. }, CoinFlavor::GG) => Ok(FidelityCurve::DiffGG),
        (ScenarioKind::DiffPartition { .. }, CoinFlavor::GI) => Ok(FidelityCurve::DiffGI),
        (ScenarioKind::SamePartition { .. }, _) => Ok(FidelityCurve::Same),
        _ => Err(Error::InvalidScenario(format!(
            "{} is not a two-marked-vertex transfer",
            scenario.name()
        ))),
    }
}

/// Runs a two-marked-vertex transfer for the step count the closed form
/// recommends and reports the simulated fidelity.
pub fn run_transfer(spec: &BipartiteSpec, scenario: &MarkedScenario) -> Result<TransferReport> {
    let start = Instant::now();
    if spec.has_loops(Partition::V1) || spec.has_loops(Partition::V2) {
        return Err(Error::InvalidScenario("transfer runs on a loop-free graph".into()));
    }
    let curve = closed_form_for(scenario)?;
    scenario.validate(spec)?;
    let f = curve.bind(spec.n1(), spec.n2())?;
    let optimum = maximize_fidelity(f, search_window(spec.n1(), spec.n2()), curve.parity())?;
    let fidelity = simulate_transfer(spec, scenario, optimum.integer_steps)?;
    Ok(TransferReport {
        protocol: Protocol::TwoMarked(*scenario),
        steps: optimum.integer_steps,
        fidelity,
        continuous_optimum: Some((optimum.steps, optimum.fidelity)),
        schedule: None,
        midpoint_sigma_fidelity: None,
        elapsed: start.elapsed(),
    })
}

/// Simulated transfer fidelity after exactly `steps` steps.
pub fn simulate_transfer(spec: &BipartiteSpec, scenario: &MarkedScenario, steps: usize) -> Result<f64> {
    let (initial, config, target) = transfer_setup(spec, scenario)?;
    fidelity(&evolve(&initial, &config, steps)?, &target)
}

/// Simulated transfer fidelity at every step `0..=max_steps`.
pub fn simulate_transfer_series(
    spec: &BipartiteSpec,
    scenario: &MarkedScenario,
    max_steps: usize,
) -> Result<Vec<f64>> {
    let (initial, config, target) = transfer_setup(spec, scenario)?;
    fidelity_series(&initial, &config, &target, max_steps)
}

fn transfer_setup(spec: &BipartiteSpec, scenario: &MarkedScenario) -> Result<(WalkState, CoinConfig, WalkState)> {
    closed_form_for(scenario)?;
    let basis = build_basis(*spec)?;
    let config = scenario.coin_config(&basis)?;
    let sender = scenario.sender().expect("two-marked scenario");
    let receiver = scenario.receiver().expect("two-marked scenario");
    let initial = uniform_sender_state(&basis, sender.index)?;
    let target = receiver_target_state(&basis, receiver)?;
    Ok((initial, config, target))
}

/// Sender and receiver layout for the active switch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    /// `V1[0] → V2[0]`.
    Diff,
    /// `V1[0] → V1[1]`.
    Same,
}

impl Placement {
    pub fn endpoints(self) -> (Vertex, Vertex) {
        match self {
            Placement::Diff => (Vertex::v1(0), Vertex::v2(0)),
            Placement::Same => (Vertex::v1(0), Vertex::v1(1)),
        }
    }
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Placement::Diff => "diff",
            Placement::Same => "same",
        })
    }
}

impl FromStr for Placement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "diff" => Ok(Placement::Diff),
            "same" => Ok(Placement::Same),
            other => Err(Error::InvalidScenario(format!("unknown placement {other:?}"))),
        }
    }
}

/// States of one active-switch run.
#[derive(Debug, Clone)]
pub struct SwitchRun {
    pub schedule: SwitchSchedule,
    pub initial: WalkState,
    /// After `T1` steps with the sender marked.
    pub midpoint: WalkState,
    /// After a further `T2` steps with the receiver marked.
    pub final_state: WalkState,
}

pub fn active_switch_states(n1: usize, n2: usize, sender: Vertex, receiver: Vertex) -> Result<SwitchRun> {
    if sender == receiver {
        return Err(Error::InvalidScenario(
            "active switch needs distinct sender and receiver".into(),
        ));
    }
    let schedule = SwitchSchedule::new(n1, n2, sender, receiver)?;
    let spec = BipartiteSpec::switch_weights(n1, n2)?;
    let basis = build_basis(spec)?;
    let u_s = MarkedScenario::single(sender).coin_config(&basis)?;
    let u_r = MarkedScenario::single(receiver).coin_config(&basis)?;
    let initial = loop_state(&basis, sender)?;
    let midpoint = evolve(&initial, &u_s, schedule.t1)?;
    let final_state = evolve(&midpoint, &u_r, schedule.t2)?;
    Ok(SwitchRun {
        schedule,
        initial,
        midpoint,
        final_state,
    })
}

/// Loop-to-loop transfer `|s,s⟩ → |r,r⟩` by marking `s` for `T1` steps,
/// then `r` for `T2` steps.
pub fn run_active_switch(n1: usize, n2: usize, sender: Vertex, receiver: Vertex) -> Result<TransferReport> {
    let start = Instant::now();
    let run = active_switch_states(n1, n2, sender, receiver)?;
    let basis = *run.final_state.basis();
    let target = loop_state(&basis, receiver)?;
    let sigma = stationary_state(&basis)?;
    Ok(TransferReport {
        protocol: Protocol::ActiveSwitch { sender, receiver },
        steps: run.schedule.t1 + run.schedule.t2,
        fidelity: fidelity(&run.final_state, &target)?,
        continuous_optimum: None,
        schedule: Some(run.schedule),
        midpoint_sigma_fidelity: Some(fidelity(&run.midpoint, &sigma)?),
        elapsed: start.elapsed(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxFidelityRow {
    pub n2: usize,
    pub gg: Maximum,
    pub gi: Maximum,
}

fn nonempty(range: &RangeInclusive<usize>) -> Result<()> {
    if range.is_empty() {
        Err(Error::EmptyRange)
    } else {
        Ok(())
    }
}

/// Closed-form maxima of both opposite-partition protocols for each `n2`.
pub fn sweep_max_fidelity(n1: usize, n2_range: RangeInclusive<usize>) -> Result<Vec<MaxFidelityRow>> {
    nonempty(&n2_range)?;
    n2_range
        .into_par_iter()
        .map(|n2| {
            let window = search_window(n1, n2);
            let gg = maximize_fidelity(FidelityCurve::DiffGG.bind(n1, n2)?, window, FidelityCurve::DiffGG.parity())?;
            let gi = maximize_fidelity(FidelityCurve::DiffGI.bind(n1, n2)?, window, FidelityCurve::DiffGI.parity())?;
            Ok(MaxFidelityRow { n2, gg, gi })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SwitchPoint {
    pub n1: usize,
    pub n2: usize,
    pub placement: Placement,
    pub t1: usize,
    pub t2: usize,
    pub fidelity: f64,
}

/// Active-switch fidelities over a grid, ordered by `n1` then `n2`.
pub fn sweep_active_switch(
    n1_range: RangeInclusive<usize>,
    n2_range: RangeInclusive<usize>,
    placement: Placement,
) -> Result<Vec<SwitchPoint>> {
    nonempty(&n1_range)?;
    nonempty(&n2_range)?;
    let points: Vec<(usize, usize)> = n1_range
        .flat_map(|n1| n2_range.clone().map(move |n2| (n1, n2)))
        .collect();
    let (sender, receiver) = placement.endpoints();
    points
        .into_par_iter()
        .map(|(n1, n2)| {
            let report = run_active_switch(n1, n2, sender, receiver)?;
            let schedule = report.schedule.expect("active switch has a schedule");
            Ok(SwitchPoint {
                n1,
                n2,
                placement,
                t1: schedule.t1,
                t2: schedule.t2,
                fidelity: report.fidelity,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rounding() {
        assert_eq!(round_half_up(2.5), (3, true));
        assert_eq!(round_half_up(2.49), (2, false));
        assert_eq!(round_half_up(10.4955), (10, false));
    }

    #[test]
    fn schedule_weights() {
        let s = SwitchSchedule::new(100, 25, Vertex::v1(0), Vertex::v2(0)).unwrap();
        assert_abs_diff_eq!(s.l1, 0.125);
        assert_abs_diff_eq!(s.l2, 2.0);
        assert_eq!(s.t1, (PI / (0.02f64).sqrt().asin()).round() as usize);
        assert!(s.t1 >= 1 && s.t2 >= 1);
        assert!(SwitchSchedule::new(1, 5, Vertex::v1(0), Vertex::v2(0)).is_err());
    }

    #[test]
    fn smallest_switch_runs() {
        let r = run_active_switch(2, 2, Vertex::v1(0), Vertex::v2(0)).unwrap();
        assert!((0.0..=1.0 + 1e-12).contains(&r.fidelity));
        let r = run_active_switch(2, 2, Vertex::v1(0), Vertex::v1(1)).unwrap();
        assert!((0.0..=1.0 + 1e-12).contains(&r.fidelity));
    }

    #[test]
    fn switch_rejects_same_endpoint() {
        assert!(matches!(
            run_active_switch(20, 20, Vertex::v1(3), Vertex::v1(3)),
            Err(Error::InvalidScenario(_))
        ));
    }

    #[test]
    fn transfer_rejects_loops_and_single_mark() {
        let looped = BipartiteSpec::with_loops(5, 5, 0.5, 0.5).unwrap();
        assert!(run_transfer(&looped, &MarkedScenario::diff(0, 0, CoinFlavor::GG)).is_err());
        let plain = BipartiteSpec::new(5, 5).unwrap();
        assert!(run_transfer(&plain, &MarkedScenario::single(Vertex::v1(0))).is_err());
    }

    #[test]
    fn transfer_parity() {
        let spec = BipartiteSpec::new(9, 6).unwrap();
        let r = run_transfer(&spec, &MarkedScenario::diff(0, 0, CoinFlavor::GG)).unwrap();
        assert_eq!(r.steps % 2, 1);
        let r = run_transfer(&spec, &MarkedScenario::same(0, 1, CoinFlavor::GI)).unwrap();
        assert_eq!(r.steps % 2, 0);
    }

    #[test]
    fn sweeps_keep_grid_order() {
        let rows = sweep_max_fidelity(20, 1..=12).unwrap();
        assert_eq!(rows.iter().map(|r| r.n2).collect::<Vec<_>>(), (1..=12).collect::<Vec<_>>());
        let grid = sweep_active_switch(3..=5, 4..=6, Placement::Diff).unwrap();
        let coords: Vec<_> = grid.iter().map(|p| (p.n1, p.n2)).collect();
        assert_eq!(coords[0], (3, 4));
        assert_eq!(coords[1], (3, 5));
        assert_eq!(coords[8], (5, 6));
        #[allow(clippy::reversed_empty_ranges)]
        let empty = 5..=4;
        assert_eq!(sweep_max_fidelity(20, empty), Err(Error::EmptyRange));
    }

    #[test]
    fn placement_parsing() {
        assert_eq!("diff".parse::<Placement>().unwrap(), Placement::Diff);
        assert!("middle".parse::<Placement>().is_err());
        assert_eq!(Placement::Same.to_string(), "same");
    }
}
