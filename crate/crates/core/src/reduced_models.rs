//! Invariant subspaces of the marked walks and their reduced operators.
//!
//! Three models are provided:
//!
//! * two marked vertices in opposite partitions: 4-dim basis, operator `U²`;
//! * two marked vertices in the same partition: 3-dim basis, operator `U²`;
//! * one marked vertex on the lackadaisical walk: 7-dim basis, operator `U`.
//!
//! Reduced matrices use the column convention `M[(i, j)] = ⟨φ_i|U^p|φ_j⟩`.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph_space::{
    build_basis, ArcBasis, ArcLabel, BipartiteSpec, Partition, Vertex, WalkState,
};
use crate::walk_operators::{evolve, CoinConfig, CoinFlavor, MarkedScenario, ScenarioKind};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Orthonormal vectors spanning an invariant subspace, realized in full space.
#[derive(Debug, Clone)]
pub struct SubspaceBasis {
    pub scenario: MarkedScenario,
    pub vectors: Vec<WalkState>,
    pub labels: Vec<String>,
}

impl SubspaceBasis {
    pub fn dimension(&self) -> usize {
        self.vectors.len()
    }

    pub fn arc_basis(&self) -> &ArcBasis {
        self.vectors[0].basis()
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, a) in self.vectors.iter().enumerate() {
            for (j, b) in self.vectors.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                let g = a.inner(b).expect("same basis");
                worst = worst.max((g - c(expected, 0.0)).norm());
            }
        }
        worst
    }
}

/// Equal-weight superposition of `arcs`.
fn uniform_over(basis: &ArcBasis, arcs: &[ArcLabel]) -> Result<WalkState> {
    let mut amplitudes = vec![ZERO; basis.dimension()];
    let amp = c(1.0 / (arcs.len() as f64).sqrt(), 0.0);
    for &arc in arcs {
        amplitudes[basis.index_of(arc)?] = amp;
    }
    WalkState::from_amplitudes(*basis, amplitudes)
}

fn require(cond: bool, msg: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidScenario(msg.into()))
    }
}

fn require_loop_free(spec: &BipartiteSpec) -> Result<()> {
    require(
        !spec.has_loops(Partition::V1) && !spec.has_loops(Partition::V2),
        "two-marked-vertex models need a loop-free graph",
    )
}

fn vertices(partition: Partition, n: usize) -> impl Iterator<Item = Vertex> + Clone {
    (0..n).map(move |index| Vertex { partition, index })
}

pub fn build_subspace(scenario: &MarkedScenario, spec: &BipartiteSpec) -> Result<SubspaceBasis> {
    check_model(scenario, spec)?;
    let basis = build_basis(*spec)?;
    let arc = ArcLabel::new;
    let (vectors, labels): (Vec<Vec<ArcLabel>>, Vec<&str>) = match scenario.kind {
        ScenarioKind::DiffPartition { .. } => {
            let s = scenario.sender().unwrap();
            let r = scenario.receiver().unwrap();
            let others1: Vec<_> = vertices(Partition::V1, spec.n1()).filter(|&v| v != s).collect();
            let others2: Vec<_> = vertices(Partition::V2, spec.n2()).filter(|&v| v != r).collect();
            let phi4 = others2
                .iter()
                .flat_map(|&v2| others1.iter().map(move |&v1| arc(v2, v1)))
                .collect();
            (
                vec![
                    vec![arc(r, s)],
                    others1.iter().map(|&v1| arc(r, v1)).collect(),
                    others2.iter().map(|&v2| arc(v2, s)).collect(),
                    phi4,
                ],
                vec!["phi1", "phi2", "phi3", "phi4"],
            )
        }
        ScenarioKind::SamePartition { .. } => {
            let s = scenario.sender().unwrap();
            let r = scenario.receiver().unwrap();
            let all2: Vec<_> = vertices(Partition::V2, spec.n2()).collect();
            let phi3 = vertices(Partition::V1, spec.n1())
                .filter(|&v| v != s && v != r)
                .flat_map(|v1| all2.iter().map(move |&v2| arc(v1, v2)))
                .collect();
            (
                vec![
                    all2.iter().map(|&v2| arc(s, v2)).collect(),
                    all2.iter().map(|&v2| arc(r, v2)).collect(),
                    phi3,
                ],
                vec!["phi1", "phi2", "phi3"],
            )
        }
        ScenarioKind::SingleMarked(m) => {
            let (p, q) = (m.partition, m.partition.other());
            let others: Vec<_> = vertices(p, spec.size(p)).filter(|&v| v != m).collect();
            let opposite: Vec<_> = vertices(q, spec.size(q)).collect();
            (
                vec![
                    vec![arc(m, m)],
                    opposite.iter().map(|&u| arc(m, u)).collect(),
                    opposite.iter().map(|&u| arc(u, m)).collect(),
                    opposite.iter().map(|&u| arc(u, u)).collect(),
                    opposite
                        .iter()
                        .flat_map(|&u| others.iter().map(move |&v| arc(u, v)))
                        .collect(),
                    others
                        .iter()
                        .flat_map(|&v| opposite.iter().map(move |&u| arc(v, u)))
                        .collect(),
                    others.iter().map(|&v| arc(v, v)).collect(),
                ],
                vec!["phi1", "phi2", "phi3", "phi4", "phi5", "phi6", "phi7"],
            )
        }
        ScenarioKind::Unmarked => unreachable!("rejected by check_model"),
    };
    let vectors = vectors
        .iter()
        .map(|arcs| uniform_over(&basis, arcs))
        .collect::<Result<Vec<_>>>()?;
    Ok(SubspaceBasis {
        scenario: *scenario,
        vectors,
        labels: labels.into_iter().map(String::from).collect(),
    })
}

/// Parameters a reduced operator was built from. For the lackadaisical
/// model `n1`, `l1` refer to the marked vertex's partition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedParams {
    pub n1: usize,
    pub n2: usize,
    pub l1: f64,
    pub l2: f64,
    pub theta1: f64,
    pub theta2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedOperator {
    /// Real orthogonal matrix in the subspace basis.
    pub matrix: DMatrix<f64>,
    /// The full-space operator represented is `U^power`.
    pub power: u32,
    pub params: ReducedParams,
}

impl ReducedOperator {
    pub fn unitarity_error(&self) -> f64 {
        let n = self.matrix.nrows();
        (self.matrix.transpose() * &self.matrix - DMatrix::identity(n, n)).amax()
    }
}

/// `cos θ = 1 − 2/n`, `sin θ = (2/n)√(n − 1)`.
pub fn grover_angle(n: usize) -> (f64, f64) {
    let n = n as f64;
    (1.0 - 2.0 / n, 2.0 / n * (n - 1.0).sqrt())
}

/// `U²` on the opposite-partition basis `(φ1, φ2, φ3, φ4)`.
pub fn two_marked_matrix(n1: usize, n2: usize) -> DMatrix<f64> {
    let (c1, s1) = grover_angle(n1);
    let (c2, s2) = grover_angle(n2);
    #[rustfmt::skip]
    let m = DMatrix::from_row_slice(4, 4, &[
        c1 * c2,  -s1 * c2, c1 * s2,  -s1 * s2,
        s1 * c2,  c1 * c2,  s1 * s2,  c1 * s2,
        -c1 * s2, s1 * s2,  c1 * c2,  -s1 * c2,
        -s1 * s2, -c1 * s2, s1 * c2,  c1 * c2,
    ]);
    m
}

/// `U²` on the same-partition basis `(φ1, φ2, φ3)`; independent of `n2`.
pub fn same_partition_matrix(n1: usize) -> DMatrix<f64> {
    let n = n1 as f64;
    let a = 1.0 - 2.0 / n;
    let b = 2.0 / n;
    let e = 2.0 * (n - 2.0).sqrt() / n;
    #[rustfmt::skip]
    let m = DMatrix::from_row_slice(3, 3, &[
        a,  -b, e,
        -b, a,  e,
        -e, -e, 1.0 - 4.0 / n,
    ]);
    m
}

/// `U_m` on the 7-dim lackadaisical basis. `n_marked`, `l_marked` belong to
/// the marked vertex's partition. Defined for any non-negative weights.
pub fn lackadaisical_matrix(
    n_marked: usize,
    n_other: usize,
    l_marked: f64,
    l_other: f64,
) -> DMatrix<f64> {
    let (n1, n2, l1, l2) = (n_marked as f64, n_other as f64, l_marked, l_other);
    let d1 = n2 + l1;
    let d2 = n1 + l2;
    let k = 2.0 * (n2 * l1).sqrt() / d1;
    let mut m = DMatrix::zeros(7, 7);
    m[(0, 0)] = (n2 - l1) / d1;
    m[(0, 1)] = -k;
    m[(1, 2)] = (2.0 - n1 - l2) / d2;
    m[(1, 3)] = 2.0 * l2.sqrt() / d2;
    m[(1, 4)] = 2.0 * (n1 - 1.0).sqrt() / d2;
    m[(2, 0)] = -k;
    m[(2, 1)] = (l1 - n2) / d1;
    m[(3, 2)] = 2.0 * l2.sqrt() / d2;
    m[(3, 3)] = (l2 - n1) / d2;
    m[(3, 4)] = 2.0 * (l2 * (n1 - 1.0)).sqrt() / d2;
    m[(4, 5)] = (n2 - l1) / d1;
    m[(4, 6)] = k;
    m[(5, 2)] = 2.0 * (n1 - 1.0).sqrt() / d2;
    m[(5, 3)] = 2.0 * (l2 * (n1 - 1.0)).sqrt() / d2;
    m[(5, 4)] = (n1 - 2.0 - l2) / d2;
    m[(6, 5)] = k;
    m[(6, 6)] = (l1 - n2) / d1;
    m
}

/// `(n, n_other, l, l_other)` as seen from the marked vertex.
fn marked_frame(spec: &BipartiteSpec, m: Vertex) -> (usize, usize, f64, f64) {
    let (p, q) = (m.partition, m.partition.other());
    (spec.size(p), spec.size(q), spec.loop_weight(p), spec.loop_weight(q))
}

pub fn reduced_matrix(scenario: &MarkedScenario, spec: &BipartiteSpec) -> Result<ReducedOperator> {
    check_model(scenario, spec)?;
    let (n1, n2) = (spec.n1(), spec.n2());
    match scenario.kind {
        ScenarioKind::DiffPartition { .. } => {
            if scenario.flavor != CoinFlavor::GG {
                return Err(Error::Unsupported(
                    "a reduced operator for marked −I coins in opposite partitions".into(),
                ));
            }
            Ok(ReducedOperator {
                matrix: two_marked_matrix(n1, n2),
                power: 2,
                params: ReducedParams {
                    n1,
                    n2,
                    l1: 0.0,
                    l2: 0.0,
                    theta1: grover_theta(n1),
                    theta2: grover_theta(n2),
                },
            })
        }
        // −G and −I agree on the uniform states this basis uses at s and r.
        ScenarioKind::SamePartition { .. } => Ok(ReducedOperator {
            matrix: same_partition_matrix(n1),
            power: 2,
            params: ReducedParams {
                n1,
                n2,
                l1: 0.0,
                l2: 0.0,
                theta1: grover_theta(n1),
                theta2: grover_theta(n2),
            },
        }),
        ScenarioKind::SingleMarked(m) => {
            if scenario.flavor != CoinFlavor::GG {
                return Err(Error::Unsupported(
                    "a reduced operator for a −I marked lackadaisical vertex".into(),
                ));
            }
            let (np, nq, lp, lq) = marked_frame(spec, m);
            Ok(ReducedOperator {
                matrix: lackadaisical_matrix(np, nq, lp, lq),
                power: 1,
                params: ReducedParams {
                    n1: np,
                    n2: nq,
                    l1: lp,
                    l2: lq,
                    theta1: grover_theta(np),
                    theta2: grover_theta(nq),
                },
            })
        }
        ScenarioKind::Unmarked => unreachable!("rejected by check_model"),
    }
}

fn grover_theta(n: usize) -> f64 {
    grover_angle(n).0.acos()
}

fn check_model(scenario: &MarkedScenario, spec: &BipartiteSpec) -> Result<()> {
    scenario.validate(spec)?;
    match scenario.kind {
        ScenarioKind::DiffPartition { .. } => {
            require_loop_free(spec)?;
            require(
                spec.n1() >= 2 && spec.n2() >= 2,
                "opposite-partition model needs n1 ≥ 2 and n2 ≥ 2",
            )
        }
        ScenarioKind::SamePartition { .. } => {
            require_loop_free(spec)?;
            require(spec.n1() >= 3, "same-partition model needs n1 ≥ 3")
        }
        ScenarioKind::SingleMarked(m) => {
            require(
                spec.has_loops(Partition::V1) && spec.has_loops(Partition::V2),
                "lackadaisical model needs loops in both partitions",
            )?;
            require(
                spec.size(m.partition) >= 2,
                "lackadaisical model needs at least two vertices in the marked partition",
            )
        }
        ScenarioKind::Unmarked => Err(Error::Unsupported(
            "an invariant subspace for the unmarked walk".into(),
        )),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralPhases {
    /// `α = θ1 + θ2`, `β = θ1 − θ2`.
    TwoMarked { alpha: f64, beta: f64 },
    /// `ω = arccos(1 − 4/n1)`.
    SamePartition { omega: f64 },
    /// Asymptotic phases `θ`, `φ` of the lackadaisical operator.
    Lackadaisical { theta: f64, phi: f64 },
    /// Numerically diagonalized, no closed-form phases.
    Numeric,
}

#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub eigenvalues: Vec<Complex64>,
    /// Unit eigenvectors in the subspace basis.
    pub eigenvectors: Vec<DVector<Complex64>>,
    pub phases: SpectralPhases,
}

impl EigenSystem {
    /// `max_i ‖M v_i − λ_i v_i‖`.
    pub fn max_residual(&self, matrix: &DMatrix<f64>) -> f64 {
        let m = matrix.map(|x| c(x, 0.0));
        self.eigenvalues
            .iter()
            .zip(&self.eigenvectors)
            .map(|(&lambda, v)| (&m * v - v * lambda).norm())
            .fold(0.0, f64::max)
    }
}

/// Multiplies `v` by a unit phase so that its first component with modulus
/// above `1e-12` is real and positive.
pub fn canonical_phase(v: &DVector<Complex64>) -> DVector<Complex64> {
    match v.iter().find(|z| z.norm() > 1e-12) {
        Some(z) => {
            let phase = z.conj() / z.norm();
            v * phase
        }
        None => v.clone(),
    }
}

/// Eigenpairs of a real orthogonal matrix `M`. The commuting parts
/// `A = (M + Mᵀ)/2` and `K = (M − Mᵀ)/2` are diagonalized in turn: first `A`,
/// then `−iK` inside each eigenspace of `A`, giving `λ = a + ib`.
pub fn numeric_eigensystem(matrix: &DMatrix<f64>) -> EigenSystem {
    const CLUSTER: f64 = 1e-9;
    let n = matrix.nrows();
    let transpose = matrix.transpose();
    let sym = SymmetricEigen::new((matrix + &transpose) * 0.5);
    let skew = (matrix - &transpose) * 0.5;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sym.eigenvalues[i].total_cmp(&sym.eigenvalues[j]));
    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = Vec::with_capacity(n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && sym.eigenvalues[order[end]] - sym.eigenvalues[order[end - 1]] < CLUSTER {
            end += 1;
        }
        let cols: Vec<_> = order[start..end].iter().map(|&i| sym.eigenvectors.column(i)).collect();
        let q = DMatrix::from_columns(&cols);
        let a = order[start..end].iter().map(|&i| sym.eigenvalues[i]).sum::<f64>() / (end - start) as f64;
        let inner = (q.transpose() * &skew * &q).map(|x| c(0.0, -x));
        let local = SymmetricEigen::new(inner);
        let qc = q.map(|x| c(x, 0.0));
        for k in 0..end - start {
            eigenvalues.push(c(a, local.eigenvalues[k]));
            eigenvectors.push((&qc * local.eigenvectors.column(k)).normalize());
        }
        start = end;
    }
    EigenSystem {
        eigenvalues,
        eigenvectors,
        phases: SpectralPhases::Numeric,
    }
}

fn cvec(entries: &[Complex64]) -> DVector<Complex64> {
    DVector::from_column_slice(entries)
}

/// Closed-form eigenpairs `|±α⟩`, `|±β⟩` of the opposite-partition `U²`.
fn two_marked_eigensystem(n1: usize, n2: usize) -> EigenSystem {
    let (t1, t2) = (grover_theta(n1), grover_theta(n2));
    let (alpha, beta) = (t1 + t2, t1 - t2);
    let h = 0.5;
    let i = c(0.0, h);
    let one = c(h, 0.0);
    let eigenvectors = vec![
        cvec(&[one, -i, i, one]),
        cvec(&[one, i, -i, one]),
        cvec(&[-one, i, i, one]),
        cvec(&[-one, -i, -i, one]),
    ];
    let eigenvalues = vec![
        Complex64::from_polar(1.0, alpha),
        Complex64::from_polar(1.0, -alpha),
        Complex64::from_polar(1.0, beta),
        Complex64::from_polar(1.0, -beta),
    ];
    EigenSystem {
        eigenvalues,
        eigenvectors,
        phases: SpectralPhases::TwoMarked { alpha, beta },
    }
}

/// `sin θ`, `sin φ` of the asymptotic lackadaisical spectrum, seen from the
/// marked vertex's partition.
pub fn lackadaisical_sines(n_marked: usize, n_other: usize, l_marked: f64, l_other: f64) -> (f64, f64) {
    let (n1, n2, l1, l2) = (n_marked as f64, n_other as f64, l_marked, l_other);
    let sin_theta = ((2.0 * l1 * n1 + n2) / (n1 * n2)).sqrt();
    let sin_phi = ((2.0 * l1 * n1 + n2 + 2.0 * l2 * n2) / (n1 * n2)).sqrt();
    (sin_theta, sin_phi)
}

/// Asymptotic (large-N) eigenpairs `ψ1..ψ7` of `U_m`.
pub fn lackadaisical_eigensystem(
    n_marked: usize,
    n_other: usize,
    l_marked: f64,
    l_other: f64,
) -> Result<EigenSystem> {
    let (sin_theta, sin_phi) = lackadaisical_sines(n_marked, n_other, l_marked, l_other);
    if !(sin_theta <= 1.0 && sin_phi <= 1.0) || l_marked <= 0.0 {
        return Err(Error::Unsupported(format!(
            "the asymptotic eigenbasis at sin θ = {sin_theta}, sin φ = {sin_phi}, l = {l_marked}"
        )));
    }
    let (theta, phi) = (sin_theta.asin(), sin_phi.asin());
    let (n1, n2, l1, l2) = (n_marked as f64, n_other as f64, l_marked, l_other);
    let r = c(1.0, 0.0);
    let re = |x: f64| c(x, 0.0);
    let im = |x: f64| c(0.0, x);

    let x = (l1 * n1 / n2).sqrt();
    let psi1 = cvec(&[r, ZERO, ZERO, ZERO, re(-x), re(-x), ZERO]) / re((1.0 + 2.0 * l1 * n1 / n2).sqrt());

    let norm23 = re((2.0 + n2 / (l1 * n1)).sqrt());
    let y = ((2.0 * l1 * n1 + n2) / (4.0 * l1 * n1)).sqrt();
    let z = (n2 / (4.0 * l1 * n1)).sqrt();
    let psi2 = cvec(&[r, im(y), im(-y), ZERO, re(z), re(z), ZERO]) / norm23;
    let psi3 = cvec(&[r, im(-y), im(y), ZERO, re(z), re(z), ZERO]) / norm23;
    let psi4 = cvec(&[ZERO, r, r, ZERO, ZERO, ZERO, re((n2 / (l1 * n1)).sqrt())]) / norm23;

    let w5 = (l2 * n2 / (l1 * n1)).sqrt();
    let psi5 = cvec(&[ZERO, ZERO, ZERO, r, ZERO, ZERO, re(w5)]) / re((1.0 + l2 * n2 / (l1 * n1)).sqrt());

    let norm67 = re((2.0 + 4.0 * (l1 * n1 + l2 * n2) / n2).sqrt());
    let w = ((2.0 * l1 * n1 + (1.0 + 2.0 * l2) * n2) / (2.0 * n2)).sqrt();
    let tail = -(2.0 * l1 * n1 / n2).sqrt();
    let h = re(FRAC_1_SQRT_2);
    let s2 = re((2.0 * l2).sqrt());
    let psi6 = cvec(&[ZERO, h, h, s2, im(-w), im(w), re(tail)]) / norm67;
    let psi7 = cvec(&[ZERO, h, h, s2, im(w), im(-w), re(tail)]) / norm67;

    let eigenvalues = vec![
        r,
        Complex64::from_polar(1.0, -theta),
        Complex64::from_polar(1.0, theta),
        -r,
        -r,
        -Complex64::from_polar(1.0, phi),
        -Complex64::from_polar(1.0, -phi),
    ];
    Ok(EigenSystem {
        eigenvalues,
        eigenvectors: vec![psi1, psi2, psi3, psi4, psi5, psi6, psi7],
        phases: SpectralPhases::Lackadaisical { theta, phi },
    })
}

pub fn reduced_eigensystem(scenario: &MarkedScenario, spec: &BipartiteSpec) -> Result<EigenSystem> {
    let op = reduced_matrix(scenario, spec)?;
    match scenario.kind {
        ScenarioKind::DiffPartition { .. } => Ok(two_marked_eigensystem(spec.n1(), spec.n2())),
        ScenarioKind::SamePartition { .. } => {
            let mut eig = numeric_eigensystem(&op.matrix);
            eig.phases = SpectralPhases::SamePartition {
                omega: (1.0 - 4.0 / spec.n1() as f64).acos(),
            };
            Ok(eig)
        }
        ScenarioKind::SingleMarked(m) => {
            let (np, nq, lp, lq) = marked_frame(spec, m);
            lackadaisical_eigensystem(np, nq, lp, lq)
        }
        ScenarioKind::Unmarked => unreachable!("rejected by reduced_matrix"),
    }
}

/// The stationary state written in the asymptotic eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaExpansion {
    /// Coefficients on `ψ1..ψ7`: `(−1/√2, 1/2, 1/2, 0, 0, 0, 0)`.
    pub coefficients: [Complex64; 7],
    /// Large-N form in the `φ` basis, `(φ5 + φ6)/√2`.
    pub large_n_form: [f64; 7],
}

pub fn sigma_in_eigenbasis(_spec: &BipartiteSpec) -> SigmaExpansion {
    let mut coefficients = [ZERO; 7];
    coefficients[0] = c(-FRAC_1_SQRT_2, 0.0);
    coefficients[1] = c(0.5, 0.0);
    coefficients[2] = c(0.5, 0.0);
    let mut large_n_form = [0.0; 7];
    large_n_form[4] = FRAC_1_SQRT_2;
    large_n_form[5] = FRAC_1_SQRT_2;
    SigmaExpansion {
        coefficients,
        large_n_form,
    }
}

/// `Σ c_i ψ_i` with the asymptotic eigenvectors at this spec.
pub fn reconstruct_sigma(spec: &BipartiteSpec, marked: Vertex) -> Result<DVector<Complex64>> {
    let (np, nq, lp, lq) = marked_frame(spec, marked);
    let eig = lackadaisical_eigensystem(np, nq, lp, lq)?;
    let expansion = sigma_in_eigenbasis(spec);
    Ok(eig
        .eigenvectors
        .iter()
        .zip(expansion.coefficients)
        .fold(DVector::zeros(7), |acc, (v, k)| acc + v * k))
}

/// Exact coordinates of the stationary state on `φ1..φ7` (it lies entirely
/// in that span). Needs no full-space vector.
pub fn stationary_coordinates(spec: &BipartiteSpec, marked: Vertex) -> Result<DVector<f64>> {
    require(
        spec.has_loops(Partition::V1) && spec.has_loops(Partition::V2),
        "stationary state needs loops in both partitions",
    )?;
    let (np, nq, lp, lq) = marked_frame(spec, marked);
    let (n1, n2, l1, l2) = (np as f64, nq as f64, lp, lq);
    let z = (2.0 * n1 * n2 + l1 * n1 + l2 * n2).sqrt();
    Ok(DVector::from_column_slice(&[
        l1.sqrt() / z,
        n2.sqrt() / z,
        n2.sqrt() / z,
        (l2 * n2).sqrt() / z,
        (n2 * (n1 - 1.0)).sqrt() / z,
        (n2 * (n1 - 1.0)).sqrt() / z,
        (l1 * (n1 - 1.0)).sqrt() / z,
    ]))
}

/// Full-space state `Σ c_i φ_i`. The coefficients must have unit norm.
pub fn embed(sub: &SubspaceBasis, coefficients: &[Complex64]) -> Result<WalkState> {
    if coefficients.len() != sub.dimension() {
        return Err(Error::DimensionMismatch {
            expected: sub.dimension(),
            actual: coefficients.len(),
        });
    }
    let basis = *sub.arc_basis();
    let mut amplitudes = vec![ZERO; basis.dimension()];
    for (phi, &k) in sub.vectors.iter().zip(coefficients) {
        for (a, &p) in amplitudes.iter_mut().zip(phi.amplitudes()) {
            *a += p * k;
        }
    }
    WalkState::from_amplitudes(basis, amplitudes)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub coefficients: DVector<Complex64>,
    /// Norm of the component orthogonal to the subspace.
    pub residual: f64,
}

pub fn project(sub: &SubspaceBasis, state: &WalkState) -> Result<Projection> {
    if state.basis() != sub.arc_basis() {
        return Err(Error::BasisMismatch);
    }
    let coefficients = sub
        .vectors
        .iter()
        .map(|phi| phi.inner(state))
        .collect::<Result<Vec<_>>>()?;
    let mut rest = state.amplitudes().to_vec();
    for (phi, &k) in sub.vectors.iter().zip(&coefficients) {
        for (r, &p) in rest.iter_mut().zip(phi.amplitudes()) {
            *r -= p * k;
        }
    }
    let residual = rest.iter().map(|r| r.norm_sqr()).sum::<f64>().sqrt();
    Ok(Projection {
        coefficients: DVector::from_vec(coefficients),
        residual,
    })
}

/// Matrix of `U^power` obtained by evolving each basis vector in full space
/// and projecting back; also returns the largest out-of-subspace residual.
pub fn dynamics_matrix(sub: &SubspaceBasis, config: &CoinConfig, power: u32) -> Result<(DMatrix<Complex64>, f64)> {
    let k = sub.dimension();
    let mut m = DMatrix::zeros(k, k);
    let mut worst = 0.0f64;
    for (j, phi) in sub.vectors.iter().enumerate() {
        let image = evolve(phi, config, power as usize)?;
        let p = project(sub, &image)?;
        m.set_column(j, &p.coefficients);
        worst = worst.max(p.residual);
    }
    Ok((m, worst))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn spec(n1: usize, n2: usize) -> BipartiteSpec {
        BipartiteSpec::new(n1, n2).unwrap()
    }

    #[test]
    fn phi4_amplitudes() {
        let sub = build_subspace(&MarkedScenario::diff(0, 0, CoinFlavor::GG), &spec(4, 3)).unwrap();
        let phi4 = &sub.vectors[3];
        assert_eq!(phi4.support().len(), 6);
        for i in phi4.support() {
            assert_abs_diff_eq!(phi4.amplitudes()[i].re, 1.0 / 6f64.sqrt(), epsilon = 1e-15);
        }
        assert!(sub.orthonormality_error() < 1e-12);
    }

    #[test]
    fn same_partition_phi3_amplitudes() {
        let sub = build_subspace(&MarkedScenario::same(0, 1, CoinFlavor::GG), &spec(4, 3)).unwrap();
        let phi3 = &sub.vectors[2];
        assert_eq!(phi3.support().len(), 6);
        for i in phi3.support() {
            assert_abs_diff_eq!(phi3.amplitudes()[i].re, 1.0 / 6f64.sqrt(), epsilon = 1e-15);
        }
        assert!(sub.orthonormality_error() < 1e-12);
    }

    #[test]
    fn lackadaisical_basis_is_orthonormal() {
        let s = BipartiteSpec::with_loops(5, 4, 0.3, 0.8).unwrap();
        for m in [Vertex::v1(2), Vertex::v2(3)] {
            let sub = build_subspace(&MarkedScenario::single(m), &s).unwrap();
            assert_eq!(sub.dimension(), 7);
            assert!(sub.orthonormality_error() < 1e-12);
        }
    }

    #[test]
    fn degenerate_sizes_are_rejected() {
        let gg = CoinFlavor::GG;
        assert!(build_subspace(&MarkedScenario::diff(0, 0, gg), &spec(1, 3)).is_err());
        assert!(build_subspace(&MarkedScenario::diff(0, 0, gg), &spec(3, 1)).is_err());
        assert!(build_subspace(&MarkedScenario::same(0, 1, gg), &spec(2, 3)).is_err());
        assert!(build_subspace(&MarkedScenario::single(Vertex::v1(0)), &spec(3, 3)).is_err());
        assert!(build_subspace(&MarkedScenario::unmarked(), &spec(3, 3)).is_err());
        assert!(reduced_matrix(&MarkedScenario::diff(0, 0, CoinFlavor::GI), &spec(3, 3)).is_err());
    }

    #[test]
    fn printed_entries() {
        let m = two_marked_matrix(100, 100);
        assert_abs_diff_eq!(m[(0, 0)], 0.9604, epsilon = 1e-12);
        let m = same_partition_matrix(100);
        assert_abs_diff_eq!(m[(2, 2)], 0.96, epsilon = 1e-12);
        let m = lackadaisical_matrix(10, 7, 0.0, 0.0);
        assert_eq!(m[(0, 0)], 1.0);
    }

    #[test]
    fn reduced_operators_are_orthogonal() {
        let s = BipartiteSpec::with_loops(9, 5, 0.25, 0.9).unwrap();
        let op = reduced_matrix(&MarkedScenario::single(Vertex::v1(0)), &s).unwrap();
        assert!(op.unitarity_error() < 1e-12);
        for (n1, n2) in [(2, 2), (5, 9), (100, 35)] {
            let op = reduced_matrix(&MarkedScenario::diff(0, 0, CoinFlavor::GG), &spec(n1, n2)).unwrap();
            assert!(op.unitarity_error() < 1e-12);
        }
        let op = reduced_matrix(&MarkedScenario::same(0, 1, CoinFlavor::GG), &spec(7, 2)).unwrap();
        assert!(op.unitarity_error() < 1e-12);
    }

    #[test]
    fn same_partition_operator_ignores_n2() {
        let a = reduced_matrix(&MarkedScenario::same(0, 1, CoinFlavor::GG), &spec(8, 3)).unwrap();
        let b = reduced_matrix(&MarkedScenario::same(0, 1, CoinFlavor::GG), &spec(8, 40)).unwrap();
        assert_eq!(a.matrix, b.matrix);
    }

    #[test]
    fn closed_form_eigenpairs() {
        for (n1, n2) in [(2, 2), (4, 3), (100, 100), (100, 35)] {
            let eig = reduced_eigensystem(&MarkedScenario::diff(0, 0, CoinFlavor::GG), &spec(n1, n2)).unwrap();
            assert!(eig.max_residual(&two_marked_matrix(n1, n2)) < 1e-12);
        }
    }

    #[test]
    fn eigenphases_at_hundred() {
        let eig = reduced_eigensystem(&MarkedScenario::diff(0, 0, CoinFlavor::GG), &spec(100, 100)).unwrap();
        let SpectralPhases::TwoMarked { alpha, beta } = eig.phases else {
            panic!("wrong phases")
        };
        assert_abs_diff_eq!(alpha, 2.0 * 0.98f64.acos(), epsilon = 1e-15);
        assert_eq!(beta, 0.0);
        let mut numeric: Vec<f64> = numeric_eigensystem(&two_marked_matrix(100, 100))
            .eigenvalues
            .iter()
            .map(|z| z.arg().abs())
            .collect();
        numeric.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(numeric[3], alpha, epsilon = 1e-12);
        assert_abs_diff_eq!(numeric[0], 0.0, epsilon = 1e-7);
    }

    #[test]
    fn numeric_eigensystem_diagonalizes() {
        for m in [
            two_marked_matrix(7, 4),
            same_partition_matrix(9),
            lackadaisical_matrix(12, 5, 0.4, 1.3),
        ] {
            let eig = numeric_eigensystem(&m);
            assert_eq!(eig.eigenvalues.len(), m.nrows());
            assert!(eig.max_residual(&m) < 1e-10);
            for lambda in &eig.eigenvalues {
                assert_abs_diff_eq!(lambda.norm(), 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn numeric_eigensystem_handles_signed_permutation() {
        // n1 = n2 = 2 gives a signed permutation with eigenvalues ±1, −1, −1.
        let m = two_marked_matrix(2, 2);
        let eig = numeric_eigensystem(&m);
        assert!(eig.max_residual(&m) < 1e-12);
        let minus = eig.eigenvalues.iter().filter(|z| (*z + 1.0).norm() < 1e-12).count();
        assert_eq!(minus, 2);
    }

    #[test]
    fn lackadaisical_theta_matches_grover_form() {
        for n1 in [4usize, 10, 37, 100] {
            let n2 = 23;
            let l1 = n2 as f64 / (2.0 * n1 as f64);
            let (sin_theta, _) = lackadaisical_sines(n1, n2, l1, 0.5);
            assert_abs_diff_eq!(sin_theta, (2.0 / n1 as f64).sqrt(), epsilon = 1e-15);
        }
    }

    #[test]
    fn minus_one_pair() {
        let eig = lackadaisical_eigensystem(40, 30, 0.375, 0.5).unwrap();
        assert_eq!(eig.eigenvalues[3], c(-1.0, 0.0));
        assert_eq!(eig.eigenvalues[4], c(-1.0, 0.0));
    }

    #[test]
    fn sigma_expansion_is_unit() {
        let e = sigma_in_eigenbasis(&spec(3, 3));
        let total: f64 = e.coefficients.iter().map(|k| k.norm_sqr()).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn embed_project_round_trip() {
        let sub = build_subspace(&MarkedScenario::diff(1, 2, CoinFlavor::GG), &spec(5, 4)).unwrap();
        let coeffs = [c(0.5, 0.1), c(-0.3, 0.4), c(0.2, -0.5), c(0.0, 0.0)];
        let norm: f64 = coeffs.iter().map(|k| k.norm_sqr()).sum::<f64>().sqrt();
        let coeffs: Vec<_> = coeffs.iter().map(|k| k / norm).collect();
        let state = embed(&sub, &coeffs).unwrap();
        let p = project(&sub, &state).unwrap();
        for (a, b) in p.coefficients.iter().zip(&coeffs) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!(p.residual < 1e-14);
        assert!(embed(&sub, &coeffs[..3]).is_err());
    }

    #[test]
    fn orthogonal_state_projects_to_zero() {
        let s = spec(5, 4);
        let sub = build_subspace(&MarkedScenario::diff(0, 0, CoinFlavor::GG), &s).unwrap();
        // |s, v2⟩ lies in the V1 → V2 block; the basis lives in V2 → V1.
        let b = build_basis(s).unwrap();
        let x = WalkState::basis_state(b, 0).unwrap();
        let p = project(&sub, &x).unwrap();
        assert!(p.coefficients.iter().all(|k| k.norm() == 0.0));
        assert_abs_diff_eq!(p.residual, 1.0, epsilon = 1e-15);
    }
}
