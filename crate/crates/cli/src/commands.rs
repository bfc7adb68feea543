use std::env;

use bwalk::analytic_fidelity::{sample_curve, search_window, FidelityCurve};
use bwalk::graph_space::BipartiteSpec;
use bwalk::transfer_protocols::{
    run_active_switch, run_transfer, simulate_transfer, simulate_transfer_series, sweep_active_switch,
    sweep_max_fidelity, Placement, TransferReport,
};
use bwalk::walk_operators::{CoinFlavor, MarkedScenario};
use serde::Serialize;

use crate::output::{emit, format_or, json_bytes, opt, sig12, Table};
use crate::{
    CurveArgs, Failure, FlavorArg, Format, PlacementArg, ScenarioArg, SwitchArgs, SweepArgs, SweepMode, TransferArgs,
};

const CURVE_SPACING: f64 = 0.05;
const SIMULATION_LIMIT: usize = 10_000;

fn flavor(f: FlavorArg) -> CoinFlavor {
    match f {
        FlavorArg::Gg => CoinFlavor::GG,
        FlavorArg::Gi => CoinFlavor::GI,
    }
}

fn placement(p: PlacementArg) -> Placement {
    match p {
        PlacementArg::Diff => Placement::Diff,
        PlacementArg::Same => Placement::Same,
    }
}

fn scenario(kind: ScenarioArg, f: FlavorArg) -> MarkedScenario {
    match kind {
        ScenarioArg::Diff => MarkedScenario::diff(0, 0, flavor(f)),
        ScenarioArg::Same => MarkedScenario::same(0, 1, flavor(f)),
    }
}

fn curve_for(kind: ScenarioArg, f: FlavorArg, printed: bool) -> Result<FidelityCurve, Failure> {
    match (kind, f, printed) {
        (ScenarioArg::Diff, FlavorArg::Gg, false) => Ok(FidelityCurve::DiffGG),
        (ScenarioArg::Diff, FlavorArg::Gg, true) => Ok(FidelityCurve::DiffGGLagged),
        (ScenarioArg::Diff, FlavorArg::Gi, false) => Ok(FidelityCurve::DiffGI),
        (ScenarioArg::Same, _, false) => Ok(FidelityCurve::Same),
        _ => Err(Failure::Usage("--printed-form applies to --scenario diff --flavor gg only".into())),
    }
}

#[derive(Serialize)]
struct CurveJson {
    curve: Vec<(f64, f64)>,
    steps: Vec<StepJson>,
}

#[derive(Serialize)]
struct StepJson {
    steps: usize,
    admitted: bool,
    analytic: f64,
    simulated: Option<f64>,
}

pub fn fidelity_curve(args: &CurveArgs) -> Result<(), Failure> {
    let (n1, n2) = args.sizes.pair();
    let spec = BipartiteSpec::new(n1, n2)?;
    let curve = curve_for(args.scenario, args.flavor, args.printed_form)?;
    let f = curve.bind(n1, n2)?;
    let scenario = scenario(args.scenario, args.flavor);
    scenario.validate(&spec)?;
    let hi = match args.steps {
        Some(s) => s as f64,
        None => search_window(n1, n2).1,
    };
    let last = hi.floor() as usize;
    let continuous = sample_curve(f, (0.0, hi), CURVE_SPACING);
    let simulated = if n1 * n2 <= SIMULATION_LIMIT {
        Some(simulate_transfer_series(&spec, &scenario, last)?)
    } else {
        None
    };
    let parity = curve.parity();
    let steps: Vec<StepJson> = (0..=last)
        .map(|k| {
            let admitted = parity.admits(k);
            StepJson {
                steps: k,
                admitted,
                analytic: if admitted { f(k as f64) } else { 0.0 },
                simulated: simulated.as_ref().map(|s| s[k]),
            }
        })
        .collect();

    let bytes = match format_or(&args.dest, Format::Csv) {
        Format::Csv => {
            let mut table = Table::new(&["steps", "kind", "admitted", "analytic", "simulated"]);
            for (s, v) in continuous.steps.iter().zip(&continuous.values) {
                table.row([sig12(*s), "curve".into(), String::new(), sig12(*v), String::new()]);
            }
            for row in &steps {
                table.row([
                    row.steps.to_string(),
                    "step".into(),
                    row.admitted.to_string(),
                    sig12(row.analytic),
                    opt(row.simulated),
                ]);
            }
            table.into_bytes()
        }
        Format::Json => json_bytes(&CurveJson {
            curve: continuous.steps.into_iter().zip(continuous.values).collect(),
            steps,
        }),
    };
    emit(&args.dest, &bytes)
}

fn thread_pool() -> Result<rayon::ThreadPool, Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(value) = env::var("BWALK_THREADS") {
        let n = value
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Failure::Usage(format!("BWALK_THREADS must be a positive integer, got {value:?}")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Failure::Usage(e.to_string()))
}

pub fn sweep(args: &SweepArgs) -> Result<(), Failure> {
    let pool = thread_pool()?;
    let format = format_or(&args.dest, Format::Csv);
    let bytes = match args.mode {
        SweepMode::Max => {
            let (a, b) = args.n2_range.unwrap_or((1, 1000));
            let rows = pool.install(|| sweep_max_fidelity(args.n1, a..=b))?;
            match format {
                Format::Csv => {
                    let mut table = Table::new(&["n2", "Fmax_gg", "steps_gg", "Fmax_gi", "steps_gi"]);
                    for r in &rows {
                        table.row([
                            r.n2.to_string(),
                            sig12(r.gg.fidelity),
                            sig12(r.gg.steps),
                            sig12(r.gi.fidelity),
                            sig12(r.gi.steps),
                        ]);
                    }
                    table.into_bytes()
                }
                Format::Json => json_bytes(&rows),
            }
        }
        SweepMode::Grid => {
            let (a, b) = args.grid.unwrap_or((16, 60));
            let placements = match args.placement {
                Some(p) => vec![placement(p)],
                None => vec![Placement::Diff, Placement::Same],
            };
            let mut points = Vec::new();
            for p in placements {
                points.extend(pool.install(|| sweep_active_switch(a..=b, a..=b, p))?);
            }
            match format {
                Format::Csv => {
                    let mut table = Table::new(&["n1", "n2", "placement", "fidelity"]);
                    for p in &points {
                        table.row([p.n1.to_string(), p.n2.to_string(), p.placement.to_string(), sig12(p.fidelity)]);
                    }
                    table.into_bytes()
                }
                Format::Json => json_bytes(&points),
            }
        }
        SweepMode::Line => {
            let (a, b) = args.n2_range.unwrap_or((2, 1000));
            let p = placement(args.placement.unwrap_or(PlacementArg::Diff));
            let points = pool.install(|| sweep_active_switch(args.n1..=args.n1, a..=b, p))?;
            match format {
                Format::Csv => {
                    let mut table = Table::new(&["n2", "fidelity"]);
                    for p in &points {
                        table.row([p.n2.to_string(), sig12(p.fidelity)]);
                    }
                    table.into_bytes()
                }
                Format::Json => json_bytes(&points),
            }
        }
    };
    emit(&args.dest, &bytes)
}

#[derive(Serialize)]
struct Optimum {
    steps: f64,
    fidelity: f64,
}

/// The stable report shape shared by `transfer` and `active-switch`.
#[derive(Serialize)]
struct ReportJson {
    scenario: &'static str,
    steps: usize,
    fidelity: f64,
    continuous_optimum: Option<Optimum>,
    t1: Option<usize>,
    t2: Option<usize>,
    l1: Option<f64>,
    l2: Option<f64>,
}

impl From<&TransferReport> for ReportJson {
    fn from(r: &TransferReport) -> Self {
        ReportJson {
            scenario: r.protocol.name(),
            steps: r.steps,
            fidelity: r.fidelity,
            continuous_optimum: r.continuous_optimum.map(|(steps, fidelity)| Optimum { steps, fidelity }),
            t1: r.schedule.map(|s| s.t1),
            t2: r.schedule.map(|s| s.t2),
            l1: r.schedule.map(|s| s.l1),
            l2: r.schedule.map(|s| s.l2),
        }
    }
}

fn report_bytes(report: &ReportJson, format: Format) -> Vec<u8> {
    match format {
        Format::Json => json_bytes(report),
        Format::Csv => {
            let mut table = Table::new(&[
                "scenario",
                "steps",
                "fidelity",
                "optimum_steps",
                "optimum_fidelity",
                "t1",
                "t2",
                "l1",
                "l2",
            ]);
            let int = |x: Option<usize>| x.map(|v| v.to_string()).unwrap_or_default();
            table.row([
                report.scenario.to_string(),
                report.steps.to_string(),
                sig12(report.fidelity),
                opt(report.continuous_optimum.as_ref().map(|o| o.steps)),
                opt(report.continuous_optimum.as_ref().map(|o| o.fidelity)),
                int(report.t1),
                int(report.t2),
                opt(report.l1),
                opt(report.l2),
            ]);
            table.into_bytes()
        }
    }
}

pub fn transfer(args: &TransferArgs) -> Result<(), Failure> {
    let (n1, n2) = args.sizes.pair();
    let spec = BipartiteSpec::new(n1, n2)?;
    let scenario = scenario(args.scenario, args.flavor);
    let mut report = run_transfer(&spec, &scenario)?;
    if let Some(steps) = args.steps {
        report.steps = steps;
        report.fidelity = simulate_transfer(&spec, &scenario, steps)?;
    }
    emit(&args.dest, &report_bytes(&ReportJson::from(&report), format_or(&args.dest, Format::Json)))
}

pub fn active_switch(args: &SwitchArgs) -> Result<(), Failure> {
    let (n1, n2) = args.sizes.pair();
    let (default_s, default_r) = placement(args.placement).endpoints();
    let sender = args.sender.unwrap_or(default_s);
    let receiver = args.receiver.unwrap_or(default_r);
    let report = run_active_switch(n1, n2, sender, receiver)?;
    if let Some(s) = report.schedule.filter(|s| s.rounding_ambiguous) {
        eprintln!(
            "warning: π/θ is a half-integer; rounded up to T1 = {}, T2 = {}",
            s.t1, s.t2
        );
    }
    emit(&args.dest, &report_bytes(&ReportJson::from(&report), format_or(&args.dest, Format::Json)))
}
