use bwalk::analytic_fidelity::FidelityCurve;
use bwalk::graph_space::{build_basis, stationary_state, BipartiteSpec, Vertex};
use bwalk::reduced_models::{
    build_subspace, dynamics_matrix, numeric_eigensystem, reduced_eigensystem, reduced_matrix, SpectralPhases,
};
use bwalk::transfer_protocols::simulate_transfer_series;
use bwalk::walk_operators::{evolve, CoinConfig, CoinFlavor, MarkedScenario};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::output::{emit, format_or, json_bytes};
use crate::{CheckName, Failure, Format, VerifyArgs};

const TOLERANCE: f64 = 1e-10;
const STATIONARY_TOLERANCE: f64 = 1e-12;
const MAX_STEPS: usize = 60;

#[derive(Serialize)]
struct CheckResult {
    name: &'static str,
    cases: usize,
    max_residual: f64,
    tolerance: f64,
    passed: bool,
}

struct Suite {
    sizes: Vec<(usize, usize)>,
    seed: u64,
    inject_fault: bool,
}

impl Suite {
    fn rng(&self, n1: usize, n2: usize) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ ((n1 as u64) << 32) ^ n2 as u64)
    }

    /// Loop-free two-marked scenarios and looped single-mark scenarios valid
    /// at this size.
    fn models(&self, n1: usize, n2: usize) -> Vec<(BipartiteSpec, MarkedScenario)> {
        let mut rng = self.rng(n1, n2);
        let plain = BipartiteSpec::new(n1, n2).expect("sizes ≥ 1");
        let looped = BipartiteSpec::with_loops(n1, n2, rng.random_range(0.05..3.0), rng.random_range(0.05..3.0))
            .expect("positive weights");
        let switched = BipartiteSpec::switch_weights(n1, n2).expect("sizes ≥ 1");
        let mut models = Vec::new();
        if n1 >= 2 && n2 >= 2 {
            models.push((plain, MarkedScenario::diff(n1 - 1, 0, CoinFlavor::GG)));
        }
        if n1 >= 3 {
            models.push((plain, MarkedScenario::same(0, 2, CoinFlavor::GG)));
            models.push((plain, MarkedScenario::same(1, 0, CoinFlavor::GI)));
        }
        if n1 >= 2 {
            models.push((looped, MarkedScenario::single(Vertex::v1(0))));
            models.push((switched, MarkedScenario::single(Vertex::v1(n1 - 1))));
        }
        if n2 >= 2 {
            models.push((looped, MarkedScenario::single(Vertex::v2(n2 - 1))));
        }
        models
    }

    fn reduced(&self, spec: &BipartiteSpec, scenario: &MarkedScenario) -> Result<(DMatrix<f64>, u32), Failure> {
        let op = reduced_matrix(scenario, spec)?;
        let mut m = op.matrix;
        if self.inject_fault {
            let (i, j) = argmax_abs(&m);
            m[(i, j)] = -m[(i, j)];
        }
        Ok((m, op.power))
    }

    fn invariance(&self) -> Result<(usize, f64), Failure> {
        let (mut cases, mut worst) = (0, 0.0f64);
        for &(n1, n2) in &self.sizes {
            for (spec, scenario) in self.models(n1, n2) {
                let sub = build_subspace(&scenario, &spec)?;
                let (m, power) = self.reduced(&spec, &scenario)?;
                let config = scenario.coin_config(sub.arc_basis())?;
                let (dynamics, leak) = dynamics_matrix(&sub, &config, power)?;
                let gap = m
                    .iter()
                    .zip(dynamics.iter())
                    .map(|(&a, b)| (Complex64::new(a, 0.0) - b).norm())
                    .fold(leak, f64::max);
                worst = worst.max(gap);
                cases += 1;
            }
        }
        Ok((cases, worst))
    }

    fn eigen(&self) -> Result<(usize, f64), Failure> {
        let (mut cases, mut worst) = (0, 0.0f64);
        for &(n1, n2) in &self.sizes {
            for (spec, scenario) in self.models(n1, n2) {
                let (m, _) = self.reduced(&spec, &scenario)?;
                let numeric = numeric_eigensystem(&m);
                worst = worst.max(numeric.max_residual(&m));
                let expected: Vec<Complex64> = match reduced_eigensystem(&scenario, &spec) {
                    Ok(closed) => match closed.phases {
                        SpectralPhases::TwoMarked { alpha, beta } => {
                            worst = worst.max(closed.max_residual(&m));
                            [alpha, -alpha, beta, -beta].iter().map(|&a| Complex64::from_polar(1.0, a)).collect()
                        }
                        SpectralPhases::SamePartition { omega } => {
                            [0.0, omega, -omega].iter().map(|&a| Complex64::from_polar(1.0, a)).collect()
                        }
                        // The lackadaisical eigenbasis is asymptotic only.
                        _ => Vec::new(),
                    },
                    Err(_) => Vec::new(),
                };
                for lambda in &expected {
                    let d = numeric
                        .eigenvalues
                        .iter()
                        .map(|mu| (mu - lambda).norm())
                        .fold(f64::MAX, f64::min);
                    worst = worst.max(d);
                }
                cases += 1;
            }
        }
        Ok((cases, worst))
    }

    fn closed_form(&self) -> Result<(usize, f64), Failure> {
        let (mut cases, mut worst) = (0, 0.0f64);
        for &(n1, n2) in &self.sizes {
            let spec = BipartiteSpec::new(n1, n2)?;
            let mut runs = vec![
                (MarkedScenario::diff(0, n2 - 1, CoinFlavor::GG), FidelityCurve::DiffGG),
                (MarkedScenario::diff(0, 0, CoinFlavor::GI), FidelityCurve::DiffGI),
            ];
            if n1 >= 2 {
                runs.push((MarkedScenario::same(0, 1, CoinFlavor::GG), FidelityCurve::Same));
                runs.push((MarkedScenario::same(1, 0, CoinFlavor::GI), FidelityCurve::Same));
            }
            for (scenario, curve) in runs {
                let series = simulate_transfer_series(&spec, &scenario, MAX_STEPS)?;
                for (t, &sim) in series.iter().enumerate() {
                    if curve.parity().admits(t) {
                        worst = worst.max((curve.evaluate(n1, n2, t as f64)? - sim).abs());
                    }
                }
                cases += 1;
            }
        }
        Ok((cases, worst))
    }

    fn stationary(&self) -> Result<(usize, f64), Failure> {
        let (mut cases, mut worst) = (0, 0.0f64);
        for &(n1, n2) in &self.sizes {
            let mut rng = self.rng(n1, n2);
            let specs = [
                BipartiteSpec::switch_weights(n1, n2)?,
                BipartiteSpec::with_loops(n1, n2, rng.random_range(0.01..5.0), rng.random_range(0.01..5.0))?,
            ];
            for spec in specs {
                let basis = build_basis(spec)?;
                let sigma = stationary_state(&basis)?;
                let image = evolve(&sigma, &CoinConfig::unmarked(basis), 1)?;
                worst = worst.max(image.distance(&sigma)?);
                cases += 1;
            }
        }
        Ok((cases, worst))
    }
}

fn argmax_abs(m: &DMatrix<f64>) -> (usize, usize) {
    let mut best = (0, 0);
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if m[(i, j)].abs() > m[best].abs() {
                best = (i, j);
            }
        }
    }
    best
}

pub fn run(args: &VerifyArgs) -> Result<(), Failure> {
    let sizes = match (args.n1, args.n2) {
        (None, None) => (2..=12).flat_map(|a| (2..=12).map(move |b| (a, b))).collect(),
        (n1, n2) => {
            let n1 = n1.or(n2).expect("one is set");
            let n2 = n2.unwrap_or(n1);
            BipartiteSpec::new(n1, n2)?;
            vec![(n1, n2)]
        }
    };
    let suite = Suite {
        sizes,
        seed: args.seed,
        inject_fault: args.inject_fault,
    };
    type Check = fn(&Suite) -> Result<(usize, f64), Failure>;
    let all: [(CheckName, &'static str, Check, f64); 4] = [
        (CheckName::Invariance, "invariance", Suite::invariance, TOLERANCE),
        (CheckName::Eigen, "eigen", Suite::eigen, TOLERANCE),
        (CheckName::ClosedForm, "closed-form", Suite::closed_form, TOLERANCE),
        (CheckName::Stationary, "stationary", Suite::stationary, STATIONARY_TOLERANCE),
    ];
    let mut results = Vec::new();
    for (id, name, check, tolerance) in all {
        if args.check != CheckName::All && args.check != id {
            continue;
        }
        let (cases, max_residual) = check(&suite)?;
        results.push(CheckResult {
            name,
            cases,
            max_residual,
            tolerance,
            passed: max_residual < tolerance,
        });
    }
    let bytes = match format_or(&args.dest, Format::Csv) {
        Format::Json => json_bytes(&results),
        Format::Csv => {
            let mut text = String::new();
            for r in &results {
                text.push_str(&format!(
                    "{:<12} cases {:>4}  max residual {:.3e}  tolerance {:e}  {}\n",
                    r.name,
                    r.cases,
                    r.max_residual,
                    r.tolerance,
                    if r.passed { "PASS" } else { "FAIL" }
                ));
            }
            text.into_bytes()
        }
    };
    emit(&args.dest, &bytes)?;
    if results.iter().all(|r| r.passed) {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}
