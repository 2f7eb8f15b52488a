//! Dispatch to the core library and collect the results in a bundle.

use serde::{Serialize, Serializer};
use serde_json::{json, Map, Value};
use waves_core::dispersion::solve_dispersion;
use waves_core::expansion::{expansion_coefficients, t_max, BranchState};
use waves_core::laminar::{critical_depth, stagnation_height, surface_shear, FlowParams};
use waves_core::oracle::{assemble, eigenvalues};
use waves_core::regions::{self, CurveId, CurveSample, CurveSpec, RegionCurve};
use waves_core::stability::stability_report;
use waves_core::verify::{run_all, run_criterion, CriterionResult, VerifyOptions};

use crate::config::{Command, ComputeArgs, CurveArgs, FigureArgs, RunConfig, VerifyArgs};
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Num(x) if x.is_finite() => s.serialize_f64(*x),
            Cell::Num(_) => s.serialize_none(),
            Cell::Int(i) => s.serialize_i64(*i),
            Cell::Text(t) => s.serialize_str(t),
            Cell::Bool(b) => s.serialize_bool(*b),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }
}

/// What an SVG rendering draws; every coordinate comes from the table.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<(String, Vec<(f64, f64)>)>,
    /// Dotted horizontal reference levels.
    pub levels: Vec<(String, f64)>,
    pub y_range: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub toolkit: &'static str,
    pub version: &'static str,
    pub tolerances: Map<String, Value>,
    pub iterations: Map<String, Value>,
}

impl Provenance {
    fn new() -> Self {
        Self {
            toolkit: "waves",
            version: env!("CARGO_PKG_VERSION"),
            tolerances: Map::new(),
            iterations: Map::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportBundle {
    pub inputs: RunConfig,
    /// Named scalar and structured results, in insertion order.
    pub outputs: Map<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<Table>,
    #[serde(skip)]
    pub plot: Option<PlotSpec>,
    pub provenance: Provenance,
    /// Set by `verify`; criteria that did not pass.
    #[serde(skip)]
    pub failed: Vec<u8>,
}

pub fn run(config: &RunConfig) -> Result<ReportBundle, CliError> {
    config.validate()?;
    let mut bundle = ReportBundle {
        inputs: config.clone(),
        outputs: Map::new(),
        table: None,
        plot: None,
        provenance: Provenance::new(),
        failed: Vec::new(),
    };
    match &config.command {
        Command::Compute(c) => compute(c, &mut bundle)?,
        Command::Curve(c) => curve(c, &mut bundle)?,
        Command::Figure(f) => figure(f, &mut bundle)?,
        Command::Verify(v) => verify(v, &mut bundle),
    }
    Ok(bundle)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("plain data serialises")
}

fn compute(c: &ComputeArgs, bundle: &mut ReportBundle) -> Result<(), CliError> {
    let p = FlowParams::new(c.a, c.d)?;
    let tol = c.tol.unwrap_or(1e-14);
    let disp = solve_dispersion(&p, tol)?;
    let report = stability_report(&p)?;
    let shear = surface_shear(&p);
    let out = &mut bundle.outputs;
    out.insert("report".into(), to_value(&report));
    out.insert(
        "dispersion".into(),
        json!({ "tau_star": disp.tau_star, "residual": disp.residual, "bracket": [disp.bracket.0, disp.bracket.1] }),
    );
    let height = stagnation_height(&p)?;
    out.insert(
        "laminar".into(),
        json!({
            "critical_depth": critical_depth(c.a),
            "stagnation_depth": waves_core::laminar::stagnation_depth(c.a).ok(),
            "kappa": shear.kappa,
            "rho_hat0": shear.rho_hat0,
            "stagnation_height_relative": if height.relative.is_finite() { Some(height.relative) } else { None },
        }),
    );
    bundle.provenance.tolerances.insert("dispersion".into(), json!(tol));
    bundle.provenance.iterations.insert("dispersion".into(), json!(disp.iterations));

    if let Some(t) = c.t {
        let coeffs = expansion_coefficients(&p, 0.0)?;
        let state = BranchState::with_coefficients(p, coeffs, t, 3)?;
        let mut branch = json!({
            "t": t,
            "lambda": state.lambda(),
            "period": state.period(),
            "min_elevation": state.min_elevation(),
            "t_max": t_max(&p, &coeffs),
        });
        let grid = c.grid.unwrap_or(crate::config::Grid { n_modes: 8, n_y: 200 });
        let disc = assemble(&state, grid.n_modes, grid.n_y)?;
        let ev = eigenvalues(&disc, 2.min(grid.n_modes))?;
        branch["oracle"] = json!({
            "grid": [grid.n_modes, grid.n_y],
            "mu_values": ev.mu_values,
            "symmetry_defect": disc.symmetry_defect,
        });
        bundle.provenance.iterations.insert("oracle_sweeps".into(), json!(disc.sweeps));
        bundle.outputs.insert("branch".into(), branch);
    }

    Ok(())
}

/// The outputs as `quantity,value` rows, one per leaf.
pub fn flatten_outputs(outputs: &Map<String, Value>) -> Table {
    let mut table = Table::new(&["quantity", "value"]);
    for (k, v) in outputs {
        flatten(k, v, &mut table);
    }
    table
}

fn flatten(prefix: &str, v: &Value, table: &mut Table) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, table);
            }
        }
        Value::Array(xs) => {
            for (i, x) in xs.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), x, table);
            }
        }
        Value::Number(n) => {
            let cell = n.as_i64().map_or_else(|| Cell::Num(n.as_f64().unwrap_or(f64::NAN)), Cell::Int);
            table.rows.push(vec![Cell::Text(prefix.into()), cell]);
        }
        Value::String(s) => table.rows.push(vec![Cell::Text(prefix.into()), Cell::Text(s.clone())]),
        Value::Bool(b) => table.rows.push(vec![Cell::Text(prefix.into()), Cell::Bool(*b)]),
        Value::Null => table.rows.push(vec![Cell::Text(prefix.into()), Cell::Num(f64::NAN)]),
    }
}

fn curve_rows(curve: &RegionCurve, with_id: bool, table: &mut Table) {
    for s in &curve.samples {
        let mut row = Vec::with_capacity(5);
        if with_id {
            row.push(Cell::Text(curve.curve_id.name().into()));
        }
        row.extend([Cell::Num(s.a), Cell::Num(s.d), Cell::Num(s.value), Cell::Bool(s.converged)]);
        table.rows.push(row);
    }
}

fn points(samples: &[CurveSample], x_is_depth: bool) -> Vec<(f64, f64)> {
    samples
        .iter()
        .filter(|s| s.converged)
        .map(|s| (if x_is_depth { s.d } else { s.a }, s.value))
        .collect()
}

fn curve(c: &CurveArgs, bundle: &mut ReportBundle) -> Result<(), CliError> {
    let id = CurveId::parse(&c.id).expect("validated");
    let curve = if id == CurveId::SignedLogMu2 {
        let a = c.a.expect("validated");
        regions::signed_log_curve(a, c.d_max.unwrap_or_else(|| regions::default_depth_top(a)), c.points)
    } else {
        let n = c.points;
        let grid: Vec<f64> = (0..n).map(|i| c.a_min + (c.a_max - c.a_min) * i as f64 / (n - 1) as f64).collect();
        regions::trace_curve(id, &grid)?
    };
    let failed = curve.samples.iter().filter(|s| !s.converged).count();
    bundle.outputs.insert("curve".into(), json!(id.name()));
    bundle.outputs.insert("samples".into(), json!(curve.samples.len()));
    bundle.outputs.insert("failed_samples".into(), json!(failed));
    bundle.provenance.tolerances.insert("depth".into(), json!(regions::DEFAULT_TOL));
    let mut table = Table::new(&["a", "d", "value", "converged"]);
    curve_rows(&curve, false, &mut table);
    let along_depth = id == CurveId::SignedLogMu2;
    bundle.plot = Some(PlotSpec {
        title: id.name().into(),
        x_label: if along_depth { "d" } else { "a" }.into(),
        y_label: if along_depth { "sgn(mu2) ln(1 + |mu2|)" } else { "value" }.into(),
        series: vec![(id.name().into(), points(&curve.samples, along_depth))],
        levels: Vec::new(),
        y_range: None,
    });
    bundle.table = Some(table);
    Ok(())
}

fn figure(f: &FigureArgs, bundle: &mut ReportBundle) -> Result<(), CliError> {
    let data = regions::sample_curves(CurveSpec { figure: f.number, points: f.points })?;
    let mut table = Table::new(&["curve", "a", "d", "value", "converged"]);
    for c in &data.curves {
        curve_rows(c, true, &mut table);
    }
    let mut references = Map::new();
    for (name, value) in &data.references {
        references.insert(name.clone(), json!(value));
    }
    bundle.outputs.insert("figure".into(), json!(f.number));
    bundle.outputs.insert("references".into(), Value::Object(references));
    bundle.provenance.tolerances.insert("depth".into(), json!(regions::DEFAULT_TOL));

    let along_depth = matches!(f.number, 3 | 4);
    let series = data
        .curves
        .iter()
        .map(|c| {
            let name = if along_depth { format!("a = {:.5}", c.samples.first().map_or(f64::NAN, |s| s.a)) } else { c.curve_id.name().into() };
            (name, points(&c.samples, along_depth))
        })
        .collect();
    let (x_label, y_label, y_range) = match f.number {
        3 | 4 => ("d", "sgn(mu2) ln(1 + |mu2|)", None),
        5 => ("a", "Y*(a, d0(a))", None),
        _ => ("a", "d", Some((0.0, 3.0))),
    };
    let levels = data.references.iter().filter(|(n, _)| n == "ystar_limit").cloned().collect();
    bundle.plot = Some(PlotSpec {
        title: format!("figure {}", f.number),
        x_label: x_label.into(),
        y_label: y_label.into(),
        series,
        levels,
        y_range,
    });
    bundle.table = Some(table);
    Ok(())
}

fn verify(v: &VerifyArgs, bundle: &mut ReportBundle) {
    let mut opts = VerifyOptions { quick: v.quick, ..VerifyOptions::default() };
    if let Some(seed) = v.seed {
        opts.seed = seed;
    }
    let results: Vec<CriterionResult> = match v.criterion {
        Some(id) => vec![run_criterion(id, opts)],
        None => run_all(opts),
    };
    for r in &results {
        eprintln!("{}", r.line());
    }
    let mut table = Table::new(&["criterion", "title", "passed", "detail"]);
    for r in &results {
        table.rows.push(vec![Cell::Int(i64::from(r.id)), Cell::Text(r.title.into()), Cell::Bool(r.passed), Cell::Text(r.detail.clone())]);
    }
    bundle.failed = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    bundle.outputs.insert("passed".into(), json!(bundle.failed.is_empty()));
    bundle.outputs.insert("quick".into(), json!(v.quick));
    bundle.outputs.insert("seed".into(), json!(opts.seed));
    bundle.table = Some(table);
}
