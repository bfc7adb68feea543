//! Closed-form fidelities of the transfer protocols and a global maximizer
//! over the search window `(0, 5√(n1 + n2))`.
//!
//! Every function takes a number of walk steps, not the half-step parameter
//! the formulas are usually written in.

use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

fn check_size(name: &'static str, n: usize, min: usize) -> Result<()> {
    if n < min {
        Err(Error::TooSmall { name, min, value: n })
    } else {
        Ok(())
    }
}

/// `θ` with `cos θ = 1 − 2/n`.
pub fn grover_phase(n: usize) -> f64 {
    (1.0 - 2.0 / n as f64).acos()
}

/// `θ = arcsin √(2/n)`, the lackadaisical search phase.
pub fn search_phase(n: usize) -> f64 {
    (2.0 / n as f64).sqrt().asin()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticParams {
    pub n1: usize,
    pub n2: usize,
    pub theta1: f64,
    pub theta2: f64,
    pub omega_gi: f64,
    /// Defined for `n1 ≥ 2`.
    pub omega_same: Option<f64>,
    /// Lackadaisical phases per partition, defined for sizes `≥ 2`.
    pub theta_lqw: (Option<f64>, Option<f64>),
}

impl AnalyticParams {
    pub fn new(n1: usize, n2: usize) -> Result<Self> {
        check_size("n1", n1, 1)?;
        check_size("n2", n2, 1)?;
        let (a, b) = (n1 as f64, n2 as f64);
        let lqw = |n: usize| (n >= 2).then(|| search_phase(n));
        Ok(Self {
            n1,
            n2,
            theta1: grover_phase(n1),
            theta2: grover_phase(n2),
            omega_gi: ((a * b - 2.0 * a - 2.0 * b + 2.0) / (a * b)).clamp(-1.0, 1.0).acos(),
            omega_same: (n1 >= 2).then(|| (1.0 - 4.0 / a).acos()),
            theta_lqw: (lqw(n1), lqw(n2)),
        })
    }
}

/// Opposite-partition transfer with `−G` at sender and receiver.
///
/// Equals `sin²(θ1·s/2)·sin²(θ2·s/2)`, which coincides with the walk at odd `s`.
pub fn fidelity_diff_gg(n1: usize, n2: usize, steps: f64) -> Result<f64> {
    check_size("n1", n1, 1)?;
    check_size("n2", n2, 1)?;
    let a = (grover_phase(n1) * steps / 2.0).sin();
    let b = (grover_phase(n2) * steps / 2.0).sin();
    Ok((a * b).powi(2))
}

/// The product form `(1/(N1N2))[(√(N1−1) sin θ1t − cos θ1t)(√(N2−1) sin θ2t − cos θ2t)]²`
/// evaluated at `t = (s − 1)/2`. Trails the walk by two steps.
pub fn fidelity_diff_gg_lagged(n1: usize, n2: usize, steps: f64) -> Result<f64> {
    check_size("n1", n1, 1)?;
    check_size("n2", n2, 1)?;
    let t = (steps - 1.0) / 2.0;
    let factor = |n: usize| {
        let theta = grover_phase(n);
        ((n - 1) as f64).sqrt() * (theta * t).sin() - (theta * t).cos()
    };
    Ok((factor(n1) * factor(n2)).powi(2) / (n1 * n2) as f64)
}

/// Opposite-partition transfer with `−I` at sender and receiver, `t = (s − 1)/2`.
pub fn fidelity_diff_gi(n1: usize, n2: usize, steps: f64) -> Result<f64> {
    let p = AnalyticParams::new(n1, n2)?;
    let (a, b) = (n1 as f64, n2 as f64);
    let t = (steps - 1.0) / 2.0;
    let wt = p.omega_gi * t;
    let inner = a * b - (a - 1.0) * (b - 1.0) * wt.cos()
        + ((a - 1.0) * (b - 1.0) * (a + b - 1.0)).sqrt() * wt.sin();
    Ok(inner * inner / (a * b * (a + b - 1.0).powi(2)))
}

/// Same-partition transfer: `sin⁴(ω·t/2)` with `t = s/2`. Independent of `n2`.
pub fn fidelity_same(n1: usize, steps: f64) -> Result<f64> {
    check_size("n1", n1, 2)?;
    let omega = (1.0 - 4.0 / n1 as f64).acos();
    Ok((omega * steps / 4.0).sin().powi(4))
}

/// Lackadaisical transfer from `σ` to the marked loop: `¼(cos θs − 1)²`.
pub fn fidelity_lqw(n1: usize, steps: f64) -> Result<f64> {
    check_size("n1", n1, 2)?;
    Ok(0.25 * ((search_phase(n1) * steps).cos() - 1.0).powi(2))
}

/// First maximizer of the equal-size opposite-partition fidelity,
/// `2(π − arctan √(N1−1))/θ1 − 1`, which simplifies to `π/θ1`.
pub fn t_max_equal(n1: usize) -> Result<f64> {
    check_size("n1", n1, 2)?;
    let theta = grover_phase(n1);
    Ok(2.0 * (PI - ((n1 - 1) as f64).sqrt().atan()) / theta - 1.0)
}

/// `(0, 5√(n1 + n2))`.
pub fn search_window(n1: usize, n2: usize) -> (f64, f64) {
    (0.0, 5.0 * ((n1 + n2) as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Odd,
    Even,
    All,
}

impl Parity {
    pub fn admits(self, steps: usize) -> bool {
        match self {
            Parity::Odd => steps % 2 == 1,
            Parity::Even => steps.is_multiple_of(2),
            Parity::All => true,
        }
    }

    fn stride(self) -> i64 {
        match self {
            Parity::All => 1,
            _ => 2,
        }
    }

    /// Largest admitted integer `≤ x`.
    fn floor(self, x: f64) -> i64 {
        let f = x.floor() as i64;
        match self {
            Parity::All => f,
            Parity::Odd if f.rem_euclid(2) == 1 => f,
            Parity::Even if f.rem_euclid(2) == 0 => f,
            _ => f - 1,
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Odd => "odd",
            Parity::Even => "even",
            Parity::All => "all",
        })
    }
}

/// The closed forms as selectable curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FidelityCurve {
    DiffGG,
    DiffGGLagged,
    DiffGI,
    Same,
    Lackadaisical,
}

impl FidelityCurve {
    pub fn evaluate(self, n1: usize, n2: usize, steps: f64) -> Result<f64> {
        match self {
            FidelityCurve::DiffGG => fidelity_diff_gg(n1, n2, steps),
            FidelityCurve::DiffGGLagged => fidelity_diff_gg_lagged(n1, n2, steps),
            FidelityCurve::DiffGI => fidelity_diff_gi(n1, n2, steps),
            FidelityCurve::Same => fidelity_same(n1, steps),
            FidelityCurve::Lackadaisical => fidelity_lqw(n1, steps),
        }
    }

    /// Step parity at which the walk realizes the curve.
    pub fn parity(self) -> Parity {
        match self {
            FidelityCurve::DiffGG | FidelityCurve::DiffGGLagged | FidelityCurve::DiffGI => Parity::Odd,
            FidelityCurve::Same => Parity::Even,
            FidelityCurve::Lackadaisical => Parity::All,
        }
    }

    /// Checks the sizes once so the curve can be sampled infallibly.
    pub fn bind(self, n1: usize, n2: usize) -> Result<impl Fn(f64) -> f64 + Copy> {
        self.evaluate(n1, n2, 0.0)?;
        Ok(move |s| self.evaluate(n1, n2, s).expect("sizes checked"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelitySeries {
    pub steps: Vec<f64>,
    pub values: Vec<f64>,
    pub parity: Parity,
}

/// Samples `f` on `lo, lo + spacing, …` up to `hi`.
pub fn sample_curve(f: impl Fn(f64) -> f64, window: (f64, f64), spacing: f64) -> FidelitySeries {
    let count = ((window.1 - window.0) / spacing + 1e-9).floor() as usize + 1;
    let steps: Vec<f64> = (0..count).map(|k| window.0 + k as f64 * spacing).collect();
    let values = steps.iter().map(|&s| f(s)).collect();
    FidelitySeries {
        steps,
        values,
        parity: Parity::All,
    }
}

/// `f` at integer steps `0..=max_steps`, zero where `parity` forbids.
pub fn integer_series(f: impl Fn(f64) -> f64, max_steps: usize, parity: Parity) -> FidelitySeries {
    let steps: Vec<f64> = (0..=max_steps).map(|s| s as f64).collect();
    let values = (0..=max_steps)
        .map(|s| if parity.admits(s) { f(s as f64) } else { 0.0 })
        .collect();
    FidelitySeries {
        steps,
        values,
        parity,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Maximum {
    /// Continuous maximizer.
    pub steps: f64,
    pub fidelity: f64,
    /// Admitted integer nearest to `steps`.
    pub integer_steps: usize,
    pub integer_fidelity: f64,
}

const SCAN_SPACING: f64 = 0.01;
const ARG_TOLERANCE: f64 = 1e-8;
/// Peaks closer than this in value count as equal; the earliest wins.
const VALUE_TIE: f64 = 1e-9;

fn golden_section(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > ARG_TOLERANCE {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Global maximum of `f` over `window`: a 0.01-spaced scan, then golden-section
/// refinement of every local peak of the scan. Also returns the admitted
/// integer step nearest the maximizer; when two are equidistant the one with
/// larger fidelity wins, then the smaller.
pub fn maximize_fidelity(f: impl Fn(f64) -> f64, window: (f64, f64), parity: Parity) -> Result<Maximum> {
    let (lo, hi) = window;
    if hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::EmptyWindow(lo, hi));
    }
    let grid = sample_curve(&f, window, SCAN_SPACING);
    let (xs, ys) = (&grid.steps, &grid.values);
    let last = xs.len() - 1;

    let mut best: Option<(f64, f64)> = None;
    for i in 0..=last {
        let left = if i > 0 { ys[i - 1] } else { f64::NEG_INFINITY };
        let right = if i < last { ys[i + 1] } else { f64::NEG_INFINITY };
        if ys[i] < left || ys[i] < right {
            continue;
        }
        let a = xs[i.saturating_sub(1)];
        let b = xs[(i + 1).min(last)];
        let (mut x, mut y) = if b > a { golden_section(&f, a, b) } else { (xs[i], ys[i]) };
        if ys[i] > y {
            (x, y) = (xs[i], ys[i]);
        }
        match best {
            Some((_, by)) if y <= by + VALUE_TIE => {}
            _ => best = Some((x, y)),
        }
    }
    let (steps, fidelity) = best.expect("scan is non-empty");
    let (integer_steps, integer_fidelity) = nearest_admitted(&f, steps, parity);
    Ok(Maximum {
        steps,
        fidelity,
        integer_steps,
        integer_fidelity,
    })
}

fn nearest_admitted(f: &impl Fn(f64) -> f64, x: f64, parity: Parity) -> (usize, f64) {
    let below = parity.floor(x);
    let candidates = [below, below + parity.stride()]
        .into_iter()
        .filter(|&k| k >= 0)
        .map(|k| (k as usize, (x - k as f64).abs(), f(k as f64)));
    let mut best: Option<(usize, f64, f64)> = None;
    for c in candidates {
        best = match best {
            None => Some(c),
            Some(b) => {
                let closer = c.1 < b.1 - 1e-12;
                let tied = (c.1 - b.1).abs() <= 1e-12;
                if closer || (tied && c.2 > b.2) {
                    Some(c)
                } else {
                    Some(b)
                }
            }
        };
    }
    let (k, _, value) = best.expect("at least one candidate is non-negative");
    (k, value)
}
