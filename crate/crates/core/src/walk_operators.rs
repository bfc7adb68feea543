//! Matrix-free evolution `U = S C`: flip-flop shift after a per-vertex coin.
//!
//! Every vertex `v` carries a reflection `2|μ_v⟩⟨μ_v| − I` about
//! `|μ_v⟩ = (Σ_{u~v} |u⟩ + √l_v |v⟩) / √d_v`, `d_v = n_opposite + l_v`. With no
//! loop this is the plain Grover diffusion. Marked vertices get `−G` or `−I`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph_space::{fidelity, ArcBasis, BipartiteSpec, Partition, Vertex, WalkState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CoinKind {
    GroverPlus,
    GroverMinus,
    NegIdentity,
}

/// Which coin marked vertices receive: `−G` (GG) or `−I` (GI).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CoinFlavor {
    GG,
    GI,
}

impl CoinFlavor {
    pub fn marked_kind(self) -> CoinKind {
        match self {
            CoinFlavor::GG => CoinKind::GroverMinus,
            CoinFlavor::GI => CoinKind::NegIdentity,
        }
    }
}

impl fmt::Display for CoinFlavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoinFlavor::GG => "gg",
            CoinFlavor::GI => "gi",
        })
    }
}

/// Per-vertex coin assignment over a basis.
#[derive(Debug, Clone, PartialEq)]
pub struct CoinConfig {
    basis: ArcBasis,
    default_kind: CoinKind,
    overrides: BTreeMap<Vertex, CoinKind>,
    // V1 vertices first, then V2.
    kinds: Vec<CoinKind>,
}

impl CoinConfig {
    pub fn new(
        basis: ArcBasis,
        default_kind: CoinKind,
        overrides: BTreeMap<Vertex, CoinKind>,
    ) -> Result<Self> {
        let spec = *basis.spec();
        let mut kinds = vec![default_kind; spec.n1() + spec.n2()];
        for (&v, &kind) in &overrides {
            if !basis.contains(v) {
                return Err(Error::VertexOutOfRange(v));
            }
            kinds[slot(&spec, v)] = kind;
        }
        Ok(CoinConfig {
            basis,
            default_kind,
            overrides,
            kinds,
        })
    }

    /// Grover coin everywhere.
    pub fn unmarked(basis: ArcBasis) -> Self {
        Self::new(basis, CoinKind::GroverPlus, BTreeMap::new()).expect("no overrides")
    }

    /// Grover coin everywhere except `marked`, which get `kind`.
    pub fn marking(basis: ArcBasis, marked: &[Vertex], kind: CoinKind) -> Result<Self> {
        let overrides = marked.iter().map(|&v| (v, kind)).collect();
        Self::new(basis, CoinKind::GroverPlus, overrides)
    }

    pub fn basis(&self) -> &ArcBasis {
        &self.basis
    }

    pub fn default_kind(&self) -> CoinKind {
        self.default_kind
    }

    pub fn overrides(&self) -> &BTreeMap<Vertex, CoinKind> {
        &self.overrides
    }

    pub fn kind_of(&self, v: Vertex) -> CoinKind {
        self.kinds[slot(self.basis.spec(), v)]
    }
}

fn slot(spec: &BipartiteSpec, v: Vertex) -> usize {
    match v.partition {
        Partition::V1 => v.index,
        Partition::V2 => spec.n1() + v.index,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScenarioKind {
    /// Sender `V1[sender]`, receiver `V2[receiver]`.
    DiffPartition { sender: usize, receiver: usize },
    /// Sender `V1[sender]`, receiver `V1[receiver]`, distinct.
    SamePartition { sender: usize, receiver: usize },
    SingleMarked(Vertex),
    Unmarked,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkedScenario {
    pub kind: ScenarioKind,
    pub flavor: CoinFlavor,
}

impl MarkedScenario {
    pub fn diff(sender: usize, receiver: usize, flavor: CoinFlavor) -> Self {
        MarkedScenario {
            kind: ScenarioKind::DiffPartition { sender, receiver },
            flavor,
        }
    }

    pub fn same(sender: usize, receiver: usize, flavor: CoinFlavor) -> Self {
        MarkedScenario {
            kind: ScenarioKind::SamePartition { sender, receiver },
            flavor,
        }
    }

    /// One vertex marked with `−Ĝ`.
    pub fn single(marked: Vertex) -> Self {
        MarkedScenario {
            kind: ScenarioKind::SingleMarked(marked),
            flavor: CoinFlavor::GG,
        }
    }

    pub fn unmarked() -> Self {
        MarkedScenario {
            kind: ScenarioKind::Unmarked,
            flavor: CoinFlavor::GG,
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ScenarioKind::DiffPartition { .. } => "diff",
            ScenarioKind::SamePartition { .. } => "same",
            ScenarioKind::SingleMarked(_) => "single",
            ScenarioKind::Unmarked => "unmarked",
        }
    }

    pub fn sender(&self) -> Option<Vertex> {
        match self.kind {
            ScenarioKind::DiffPartition { sender, .. }
            | ScenarioKind::SamePartition { sender, .. } => Some(Vertex::v1(sender)),
            _ => None,
        }
    }

    pub fn receiver(&self) -> Option<Vertex> {
        match self.kind {
            ScenarioKind::DiffPartition { receiver, .. } => Some(Vertex::v2(receiver)),
            ScenarioKind::SamePartition { receiver, .. } => Some(Vertex::v1(receiver)),
            _ => None,
        }
    }

    pub fn marked(&self) -> Vec<Vertex> {
        match self.kind {
            ScenarioKind::SingleMarked(m) => vec![m],
            ScenarioKind::Unmarked => Vec::new(),
            _ => vec![self.sender().unwrap(), self.receiver().unwrap()],
        }
    }

    pub fn validate(&self, spec: &BipartiteSpec) -> Result<()> {
        if let ScenarioKind::SamePartition { sender, receiver } = self.kind {
            if sender == receiver {
                return Err(Error::InvalidScenario(
                    "sender and receiver must differ".into(),
                ));
            }
        }
        for v in self.marked() {
            if v.index >= spec.size(v.partition) {
                return Err(Error::VertexOutOfRange(v));
            }
        }
        Ok(())
    }

    pub fn coin_config(&self, basis: &ArcBasis) -> Result<CoinConfig> {
        self.validate(basis.spec())?;
        CoinConfig::marking(*basis, &self.marked(), self.flavor.marked_kind())
    }
}

/// Runs the coin vertex by vertex and hands each output amplitude to `emit`
/// together with its (pre-shift) arc index.
#[inline]
fn coin_pass(
    config: &CoinConfig,
    input: &[Complex64],
    mut emit: impl FnMut(usize, Complex64),
) {
    let basis = config.basis();
    let spec = *basis.spec();
    for partition in [Partition::V1, Partition::V2] {
        let inv_sqrt_d = 1.0 / spec.degree(partition).sqrt();
        let sqrt_l = spec.loop_weight(partition).sqrt();
        for index in 0..spec.size(partition) {
            let v = Vertex { partition, index };
            let out = basis.out_arcs(v).expect("vertex in range");
            let kind = config.kind_of(v);
            if kind == CoinKind::NegIdentity {
                for i in out.edges.clone().chain(out.self_loop) {
                    emit(i, -input[i]);
                }
                continue;
            }
            // ⟨μ_v|ψ_v⟩
            let mut overlap: Complex64 = input[out.edges.clone()].iter().sum();
            if let Some(l) = out.self_loop {
                overlap += input[l] * sqrt_l;
            }
            overlap *= inv_sqrt_d;
            let sign = if kind == CoinKind::GroverMinus { -1.0 } else { 1.0 };
            let edge_part = overlap * (2.0 * inv_sqrt_d);
            for i in out.edges {
                emit(i, (edge_part - input[i]) * sign);
            }
            if let Some(l) = out.self_loop {
                emit(l, (edge_part * sqrt_l - input[l]) * sign);
            }
        }
    }
}

fn check_basis(state: &WalkState, config: &CoinConfig) -> Result<()> {
    if state.basis() != config.basis() {
        return Err(Error::BasisMismatch);
    }
    Ok(())
}

/// `S|v,u⟩ = |u,v⟩`; loops are fixed.
pub fn apply_shift(state: &WalkState) -> WalkState {
    let basis = *state.basis();
    let input = state.amplitudes();
    let mut out = vec![Complex64::new(0.0, 0.0); input.len()];
    for (i, &a) in input.iter().enumerate() {
        out[basis.shift_index(i)] = a;
    }
    WalkState::from_raw(basis, out)
}

pub fn apply_coin(state: &WalkState, config: &CoinConfig) -> Result<WalkState> {
    check_basis(state, config)?;
    let input = state.amplitudes();
    let mut out = vec![Complex64::new(0.0, 0.0); input.len()];
    coin_pass(config, input, |i, a| out[i] = a);
    Ok(WalkState::from_raw(*state.basis(), out))
}

fn step_into(config: &CoinConfig, input: &[Complex64], out: &mut [Complex64]) {
    let basis = *config.basis();
    coin_pass(config, input, |i, a| out[basis.shift_index(i)] = a);
}

/// One step `U = S C`, fused into a single pass.
pub fn step(state: &WalkState, config: &CoinConfig) -> Result<WalkState> {
    check_basis(state, config)?;
    let mut out = vec![Complex64::new(0.0, 0.0); state.basis().dimension()];
    step_into(config, state.amplitudes(), &mut out);
    Ok(WalkState::from_raw(*state.basis(), out))
}

/// `U^steps |state⟩`.
pub fn evolve(state: &WalkState, config: &CoinConfig, steps: usize) -> Result<WalkState> {
    evolve_observed(state, config, steps, |_, _| {})
}

/// Like [`evolve`], calling `observe(t, amplitudes)` for `t = 0..=steps`.
pub fn evolve_observed(
    state: &WalkState,
    config: &CoinConfig,
    steps: usize,
    mut observe: impl FnMut(usize, &[Complex64]),
) -> Result<WalkState> {
    check_basis(state, config)?;
    let mut current = state.amplitudes().to_vec();
    let mut next = vec![Complex64::new(0.0, 0.0); current.len()];
    observe(0, &current);
    for t in 1..=steps {
        step_into(config, &current, &mut next);
        std::mem::swap(&mut current, &mut next);
        observe(t, &current);
    }
    Ok(WalkState::from_raw(*state.basis(), current))
}

/// `|⟨U^t ψ | target⟩|²` for `t = 0..=max_steps`.
pub fn fidelity_series(
    initial: &WalkState,
    config: &CoinConfig,
    target: &WalkState,
    max_steps: usize,
) -> Result<Vec<f64>> {
    // Validates the target basis up front.
    fidelity(initial, target)?;
    let target = target.amplitudes();
    let mut series = Vec::with_capacity(max_steps + 1);
    evolve_observed(initial, config, max_steps, |_, amps| {
        let overlap: Complex64 = amps.iter().zip(target).map(|(a, b)| a.conj() * b).sum();
        series.push(overlap.norm_sqr());
    })?;
    Ok(series)
}
