//! Arc-based Hilbert space of the complete bipartite graph `K(n1, n2)`,
//! optionally with one weighted self-loop per vertex.
//!
//! Basis layout (fixed, block-wise):
//!
//! | block        | label       | index                      |
//! |--------------|-------------|----------------------------|
//! | V1 → V2      | `(a, b)`    | `a * n2 + b`               |
//! | V2 → V1      | `(b, a)`    | `n1 * n2 + b * n1 + a`     |
//! | V1 loops     | `(a, a)`    | `2 * n1 * n2 + a`          |
//! | V2 loops     | `(b, b)`    | after the V1 loops (if any) |
//!
//! Loop blocks are present only when the corresponding weight is strictly
//! positive.

use std::fmt;
use std::ops::Range;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const NORM_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Partition {
    V1,
    V2,
}

impl Partition {
    pub fn other(self) -> Partition {
        match self {
            Partition::V1 => Partition::V2,
            Partition::V2 => Partition::V1,
        }
    }
}

/// A vertex, identified by its partition and a 0-based index inside it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Vertex {
    pub partition: Partition,
    pub index: usize,
}

impl Vertex {
    pub fn v1(index: usize) -> Self {
        Vertex {
            partition: Partition::V1,
            index,
        }
    }

    pub fn v2(index: usize) -> Self {
        Vertex {
            partition: Partition::V2,
            index,
        }
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = match self.partition {
            Partition::V1 => "V1",
            Partition::V2 => "V2",
        };
        write!(f, "{p}[{}]", self.index)
    }
}

/// Graph dimensions and per-partition self-loop weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BipartiteSpec {
    n1: usize,
    n2: usize,
    l1: f64,
    l2: f64,
}

impl BipartiteSpec {
    /// Loop-free `K(n1, n2)`.
    pub fn new(n1: usize, n2: usize) -> Result<Self> {
        Self::with_loops(n1, n2, 0.0, 0.0)
    }

    pub fn with_loops(n1: usize, n2: usize, l1: f64, l2: f64) -> Result<Self> {
        if n1 < 1 {
            return Err(Error::TooSmall {
                name: "n1",
                min: 1,
                value: n1,
            });
        }
        if n2 < 1 {
            return Err(Error::TooSmall {
                name: "n2",
                min: 1,
                value: n2,
            });
        }
        for (name, value) in [("l1", l1), ("l2", l2)] {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidLoopWeight { name, value });
            }
        }
        Ok(BipartiteSpec { n1, n2, l1, l2 })
    }

    /// Loop weights used by the active-switch protocol: `l1 = n2 / 2n1`,
    /// `l2 = n1 / 2n2`.
    pub fn switch_weights(n1: usize, n2: usize) -> Result<Self> {
        let (a, b) = (n1 as f64, n2 as f64);
        Self::with_loops(n1, n2, b / (2.0 * a), a / (2.0 * b))
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn l1(&self) -> f64 {
        self.l1
    }

    pub fn l2(&self) -> f64 {
        self.l2
    }

    pub fn size(&self, partition: Partition) -> usize {
        match partition {
            Partition::V1 => self.n1,
            Partition::V2 => self.n2,
        }
    }

    pub fn loop_weight(&self, partition: Partition) -> f64 {
        match partition {
            Partition::V1 => self.l1,
            Partition::V2 => self.l2,
        }
    }

    pub fn has_loops(&self, partition: Partition) -> bool {
        self.loop_weight(partition) > 0.0
    }

    /// Vertex degree: opposite partition size plus the loop weight.
    pub fn degree(&self, partition: Partition) -> f64 {
        self.size(partition.other()) as f64 + self.loop_weight(partition)
    }

    /// The same graph with the two partitions swapped.
    pub fn swapped(&self) -> Self {
        BipartiteSpec {
            n1: self.n2,
            n2: self.n1,
            l1: self.l2,
            l2: self.l1,
        }
    }
}

/// A basis label `|from, to⟩`; a loop when `from == to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ArcLabel {
    pub from: Vertex,
    pub to: Vertex,
}

impl ArcLabel {
    pub fn new(from: Vertex, to: Vertex) -> Self {
        ArcLabel { from, to }
    }

    pub fn is_loop(&self) -> bool {
        self.from == self.to
    }
}

impl fmt::Display for ArcLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{},{}⟩", self.from, self.to)
    }
}

/// Indices of the arcs leaving one vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutArcs {
    /// Contiguous block of edge arcs toward the opposite partition.
    pub edges: Range<usize>,
    pub self_loop: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcBasis {
    spec: BipartiteSpec,
    loops1: Option<usize>,
    loops2: Option<usize>,
    dimension: usize,
}

pub fn build_basis(spec: BipartiteSpec) -> Result<ArcBasis> {
    // Re-validate: a spec may have been deserialized.
    let spec = BipartiteSpec::with_loops(spec.n1, spec.n2, spec.l1, spec.l2)?;
    Ok(ArcBasis::new(spec))
}

impl ArcBasis {
    pub fn new(spec: BipartiteSpec) -> Self {
        let edges = 2 * spec.n1 * spec.n2;
        let mut next = edges;
        let loops1 = spec.has_loops(Partition::V1).then(|| {
            let start = next;
            next += spec.n1;
            start
        });
        let loops2 = spec.has_loops(Partition::V2).then(|| {
            let start = next;
            next += spec.n2;
            start
        });
        ArcBasis {
            spec,
            loops1,
            loops2,
            dimension: next,
        }
    }

    pub fn spec(&self) -> &BipartiteSpec {
        &self.spec
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn contains(&self, v: Vertex) -> bool {
        v.index < self.spec.size(v.partition)
    }

    fn check(&self, v: Vertex) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange(v))
        }
    }

    fn loop_block(&self, partition: Partition) -> Option<usize> {
        match partition {
            Partition::V1 => self.loops1,
            Partition::V2 => self.loops2,
        }
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.spec.n1)
            .map(Vertex::v1)
            .chain((0..self.spec.n2).map(Vertex::v2))
    }

    pub fn out_arcs(&self, v: Vertex) -> Result<OutArcs> {
        self.check(v)?;
        let (n1, n2) = (self.spec.n1, self.spec.n2);
        let edges = match v.partition {
            Partition::V1 => v.index * n2..(v.index + 1) * n2,
            Partition::V2 => n1 * n2 + v.index * n1..n1 * n2 + (v.index + 1) * n1,
        };
        let self_loop = self.loop_block(v.partition).map(|start| start + v.index);
        Ok(OutArcs { edges, self_loop })
    }

    pub fn loop_index(&self, v: Vertex) -> Result<usize> {
        self.check(v)?;
        self.loop_block(v.partition)
            .map(|start| start + v.index)
            .ok_or(Error::MissingLoop(v))
    }

    pub fn index_of(&self, arc: ArcLabel) -> Result<usize> {
        self.check(arc.from)?;
        self.check(arc.to)?;
        if arc.is_loop() {
            return self.loop_index(arc.from);
        }
        let (n1, n2) = (self.spec.n1, self.spec.n2);
        match (arc.from.partition, arc.to.partition) {
            (Partition::V1, Partition::V2) => Ok(arc.from.index * n2 + arc.to.index),
            (Partition::V2, Partition::V1) => Ok(n1 * n2 + arc.from.index * n1 + arc.to.index),
            _ => Err(Error::InvalidScenario(format!(
                "{arc} is not an arc of a bipartite graph"
            ))),
        }
    }

    /// Inverse of [`ArcBasis::index_of`].
    ///
    /// Panics if `index >= self.dimension()`.
    pub fn label(&self, index: usize) -> ArcLabel {
        assert!(index < self.dimension, "arc index {index} out of range");
        let (n1, n2) = (self.spec.n1, self.spec.n2);
        let edges = n1 * n2;
        if index < edges {
            ArcLabel::new(Vertex::v1(index / n2), Vertex::v2(index % n2))
        } else if index < 2 * edges {
            let i = index - edges;
            ArcLabel::new(Vertex::v2(i / n1), Vertex::v1(i % n1))
        } else {
            for (partition, start) in [(Partition::V1, self.loops1), (Partition::V2, self.loops2)] {
                if let Some(start) = start {
                    let len = self.spec.size(partition);
                    if (start..start + len).contains(&index) {
                        let v = Vertex {
                            partition,
                            index: index - start,
                        };
                        return ArcLabel::new(v, v);
                    }
                }
            }
            unreachable!("index below dimension always resolves")
        }
    }

    /// Index of `S|v,u⟩ = |u,v⟩`.
    #[inline]
    pub fn shift_index(&self, index: usize) -> usize {
        let (n1, n2) = (self.spec.n1, self.spec.n2);
        let edges = n1 * n2;
        if index < edges {
            let (a, b) = (index / n2, index % n2);
            edges + b * n1 + a
        } else if index < 2 * edges {
            let i = index - edges;
            let (b, a) = (i / n1, i % n1);
            a * n2 + b
        } else {
            index
        }
    }
}

/// Complex amplitudes over an [`ArcBasis`], of unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkState {
    basis: ArcBasis,
    amplitudes: Vec<Complex64>,
}

impl WalkState {
    /// Wraps amplitudes that are already known to be normalized.
    pub(crate) fn from_raw(basis: ArcBasis, amplitudes: Vec<Complex64>) -> Self {
        debug_assert_eq!(amplitudes.len(), basis.dimension());
        WalkState { basis, amplitudes }
    }

    /// Rejects vectors whose norm differs from 1 by more than `1e-10`.
    pub fn from_amplitudes(basis: ArcBasis, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_len(&basis, amplitudes.len())?;
        let norm = l2_norm(&amplitudes);
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized(norm));
        }
        Ok(WalkState { basis, amplitudes })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(basis: ArcBasis, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        check_len(&basis, amplitudes.len())?;
        let norm = l2_norm(&amplitudes);
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized(norm));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(WalkState { basis, amplitudes })
    }

    pub fn basis_state(basis: ArcBasis, index: usize) -> Result<Self> {
        if index >= basis.dimension() {
            return Err(Error::DimensionMismatch {
                expected: basis.dimension(),
                actual: index + 1,
            });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); basis.dimension()];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(WalkState { basis, amplitudes })
    }

    /// A random unit vector (components uniform in the unit square, then
    /// normalized).
    pub fn random<R: Rng + ?Sized>(basis: ArcBasis, rng: &mut R) -> Self {
        let amplitudes = (0..basis.dimension())
            .map(|_| {
                Complex64::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                )
            })
            .collect();
        WalkState::normalized(basis, amplitudes).expect("random vector is nonzero")
    }

    pub fn basis(&self) -> &ArcBasis {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn amplitude(&self, arc: ArcLabel) -> Result<Complex64> {
        Ok(self.amplitudes[self.basis.index_of(arc)?])
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.amplitudes)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &WalkState) -> Result<Complex64> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch);
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Euclidean distance `‖self − other‖`.
    pub fn distance(&self, other: &WalkState) -> Result<f64> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch);
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    /// Indices with a nonzero amplitude.
    pub fn support(&self) -> Vec<usize> {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > 0.0)
            .map(|(i, _)| i)
            .collect()
    }
}

fn check_len(basis: &ArcBasis, len: usize) -> Result<()> {
    if len != basis.dimension() {
        return Err(Error::DimensionMismatch {
            expected: basis.dimension(),
            actual: len,
        });
    }
    Ok(())
}

pub(crate) fn l2_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// Uniform superposition over the edge arcs leaving `v` (its loop, if any,
/// gets amplitude 0).
pub fn uniform_out_state(basis: &ArcBasis, v: Vertex) -> Result<WalkState> {
    let out = basis.out_arcs(v)?;
    let amp = Complex64::new(1.0 / (out.edges.len() as f64).sqrt(), 0.0);
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); basis.dimension()];
    amplitudes[out.edges].iter_mut().for_each(|a| *a = amp);
    Ok(WalkState::from_raw(*basis, amplitudes))
}

/// Initial state `1/√n2 Σ_{v2} |s, v2⟩` for a sender `s ∈ V1`.
pub fn uniform_sender_state(basis: &ArcBasis, sender: usize) -> Result<WalkState> {
    uniform_out_state(basis, Vertex::v1(sender))
}

/// Uniform superposition of the arcs out of `receiver` toward the opposite
/// partition.
pub fn receiver_target_state(basis: &ArcBasis, receiver: Vertex) -> Result<WalkState> {
    uniform_out_state(basis, receiver)
}

/// `|v, v⟩`.
pub fn loop_state(basis: &ArcBasis, v: Vertex) -> Result<WalkState> {
    WalkState::basis_state(*basis, basis.loop_index(v)?)
}

/// Fixed point of the unmarked lackadaisical walk: `√l` on every loop, 1 on
/// every edge arc, normalized by `√(2 n1 n2 + l1 n1 + l2 n2)`.
pub fn stationary_state(basis: &ArcBasis) -> Result<WalkState> {
    let spec = basis.spec();
    for partition in [Partition::V1, Partition::V2] {
        if !spec.has_loops(partition) {
            return Err(Error::MissingLoop(Vertex {
                partition,
                index: 0,
            }));
        }
    }
    let (n1, n2) = (spec.n1() as f64, spec.n2() as f64);
    let z = (2.0 * n1 * n2 + spec.l1() * n1 + spec.l2() * n2).sqrt();
    let edges = 2 * spec.n1() * spec.n2();
    let mut amplitudes = vec![Complex64::new(1.0 / z, 0.0); basis.dimension()];
    let l1_amp = Complex64::new(spec.l1().sqrt() / z, 0.0);
    let l2_amp = Complex64::new(spec.l2().sqrt() / z, 0.0);
    amplitudes[edges..edges + spec.n1()].fill(l1_amp);
    amplitudes[edges + spec.n1()..].fill(l2_amp);
    Ok(WalkState::from_raw(*basis, amplitudes))
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &WalkState, b: &WalkState) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr())
}
