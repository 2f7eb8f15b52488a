//! The acceptance suite: each criterion recomputes a published constant,
//! an identity, a convergence rate or a sign pattern and reports pass/fail.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dispersion::{
    counter_current_root, large_depth_root, sigma, solve_dispersion, tau_asymptotic, AsymptoticRegime,
};
use crate::error::{Result, WaveError};
use crate::expansion::{branch_residuals, expansion_coefficients, loglog_slope, BranchState, ResidualGrid};
use crate::laminar::{bernoulli, critical_depth, stagnation_depth_unchecked, stagnation_height, FlowParams};
use crate::oracle::{verify_mu2, Resolution};
use crate::regions::{self, CurveSpec, DEFAULT_TOL};
use crate::stability::{counter_current_coefficient, large_depth_coefficient, mu2, mu2_asymptotic, mu2_unreduced, p0_and_b};

/// Number of criteria in the suite.
pub const CRITERIA: u8 = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct VerifyOptions {
    /// Smaller random samples and grids; every criterion still runs.
    pub quick: bool,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { quick: false, seed: 20_241_017 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
    /// Wall-clock limit, if the criterion has one.
    pub budget_seconds: Option<f64>,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] criterion {} ({}): {} ({:.2} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.detail,
            self.seconds
        )
    }
}

// (passed, detail) from a criterion body
type Outcome = Result<(bool, String)>;

pub fn title(id: u8) -> &'static str {
    match id {
        1 => "constants",
        2 => "a0",
        3 => "a1",
        4 => "stagnation height limit",
        5 => "identities",
        6 => "expansion residual order",
        7 => "spectral oracle",
        8 => "asymptotic regimes",
        9 => "sign structure",
        _ => "unknown",
    }
}

fn budget(id: u8) -> Option<f64> {
    match id {
        1 => Some(1.0),
        2 | 4 => Some(10.0),
        3 => Some(60.0),
        6 => Some(120.0),
        7 => Some(300.0),
        _ => None,
    }
}

pub fn run_criterion(id: u8, opts: VerifyOptions) -> CriterionResult {
    let start = Instant::now();
    let outcome = match id {
        1 => constants(),
        2 => criterion_a0(),
        3 => criterion_a1(),
        4 => ystar_limit(),
        5 => identities(opts),
        6 => residual_order(opts),
        7 => oracle_agreement(opts),
        8 => asymptotic_regimes(),
        9 => sign_structure(opts),
        other => Err(WaveError::Request(format!("no criterion {other}"))),
    };
    let seconds = start.elapsed().as_secs_f64();
    let budget_seconds = budget(id);
    let (mut passed, mut detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    if let Some(limit) = budget_seconds {
        if seconds > limit {
            passed = false;
            detail.push_str(&format!("; over the {limit} s budget"));
        }
    }
    CriterionResult { id, title: title(id), passed, detail, seconds, budget_seconds }
}

pub fn run_all(opts: VerifyOptions) -> Vec<CriterionResult> {
    (1..=CRITERIA).map(|id| run_criterion(id, opts)).collect()
}

fn within(value: f64, target: f64, tol: f64) -> bool {
    (value - target).abs() <= tol
}

fn constants() -> Outcome {
    let q1: f64 = large_depth_root();
    let n: f64 = counter_current_root();
    let m: f64 = large_depth_coefficient();
    let big_m: f64 = counter_current_coefficient();
    let dc0: f64 = critical_depth(0.0);
    let passed = within(q1, 1.915008, 1e-6)
        && within(n, 1.034021, 1e-6)
        && within(m, -0.406748, 1e-5)
        && within(big_m, 4.287466, 1e-5)
        && dc0 == 1.0;
    Ok((passed, format!("q1 = {q1:.7}, n = {n:.7}, m = {m:.7}, M = {big_m:.7}, d_c(0) = {dc0}")))
}

fn criterion_a0() -> Outcome {
    let a0 = regions::a0(DEFAULT_TOL)?;
    Ok((within(a0, -1.01803, 1e-3), format!("a0 = {a0:.7}")))
}

fn criterion_a1() -> Outcome {
    let a1 = regions::a1(1e-6)?;
    Ok((within(a1, 0.15196, 2e-3), format!("a1 = {a1:.7}")))
}

fn ystar_limit() -> Outcome {
    let a = -1000.0;
    let d = regions::d0(a, DEFAULT_TOL)?;
    let y = stagnation_height(&FlowParams::new(a, d)?)?.relative;
    Ok((within(y, 0.314507, 0.01), format!("Y*(-1000, d0) = {y:.6} at d0 = {d:.7}")))
}

/// Subcritical `(a, d)` with `|kappa| > 0.05`, away from the stagnation depth.
pub fn random_subcritical(rng: &mut ChaCha8Rng) -> FlowParams<f64> {
    loop {
        let a: f64 = rng.random_range(-5.0..5.0);
        let dc = critical_depth(a);
        let top = if a > 0.0 { stagnation_depth_unchecked(a).min(dc + 2.0) } else { dc + 2.0 };
        let d = dc + rng.random_range(0.05..0.95) * (top - dc);
        let Ok(p) = FlowParams::new(a, d) else { continue };
        if p.kappa().abs() > 0.05 && p.require_subcritical().is_ok() && mu2(&p).is_ok() {
            return p;
        }
    }
}

fn identities(opts: VerifyOptions) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let count = if opts.quick { 25 } else { 100 };
    let mut worst_factor = 0.0_f64;
    let mut min_a = f64::INFINITY;
    let mut worst_sigma = 0.0_f64;
    for _ in 0..count {
        let p = random_subcritical(&mut rng);
        let m = mu2(&p)?;
        let direct = mu2_unreduced(&p)?;
        worst_factor = worst_factor.max(((direct + m.a_factor * m.lambda2) / direct).abs());
        min_a = min_a.min(m.a_factor);
        let slope = bernoulli(&p).slope;
        worst_sigma = worst_sigma.max((sigma(&p, 0.0) + slope).abs() / slope.abs().max(1.0));
    }
    let grid = if opts.quick { 201 } else { 1001 };
    let mut worst_critical = 0.0_f64;
    for i in 0..grid {
        let a = -50.0 + 100.0 * i as f64 / (grid - 1) as f64;
        let p = FlowParams::new(a, critical_depth(a))?;
        worst_critical = worst_critical.max(bernoulli(&p).slope.abs());
    }
    let passed = worst_factor <= 1e-10 && min_a > 0.0 && worst_sigma <= 1e-12 && worst_critical <= 1e-10;
    Ok((
        passed,
        format!(
            "{count} samples: mu2 = -A lambda2 to {worst_factor:.1e}, min A = {min_a:.3e}, sigma(0) + R' = {worst_sigma:.1e}; \
             R'(d_c) over {grid} values of a = {worst_critical:.1e}"
        ),
    ))
}

fn residual_order(opts: VerifyOptions) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5eed);
    let count = if opts.quick { 5 } else { 20 };
    let ts = [1e-1, 1e-2, 1e-3];
    // the largest amplitude must stay on the branch: surface above half depth
    let mut params = Vec::with_capacity(count);
    while params.len() < count {
        let p = random_subcritical(&mut rng);
        let c = expansion_coefficients(&p, 0.0)?;
        if BranchState::with_coefficients(p, c, ts[0], 3).is_ok_and(|s| s.min_elevation() > 0.5 * p.d()) {
            params.push(p);
        }
    }
    let slopes: Vec<Result<(FlowParams<f64>, [f64; 3])>> = params
        .par_iter()
        .map(|p| {
            let c = expansion_coefficients(p, 0.0)?;
            let mut rs = [[0.0; 3]; 3];
            for (k, &t) in ts.iter().enumerate() {
                let s = BranchState::with_coefficients(*p, c, t, 3)?;
                let r = branch_residuals(&s, ResidualGrid::default())?;
                rs[0][k] = r.field;
                rs[1][k] = r.kinematic;
                rs[2][k] = r.bernoulli;
            }
            Ok((*p, rs.map(|r| loglog_slope(&ts, &r))))
        })
        .collect();
    let mut min_slope = f64::INFINITY;
    let mut failures = Vec::new();
    for s in slopes {
        let (p, sl) = s?;
        let low = sl.iter().copied().fold(f64::INFINITY, f64::min);
        min_slope = min_slope.min(low);
        if !(low >= 3.7) {
            failures.push(format!("({:.4}, {:.4}): {:?}", p.a(), p.d(), sl));
        }
    }
    Ok((
        failures.is_empty(),
        if failures.is_empty() {
            format!("{count} samples, smallest slope {min_slope:.3}")
        } else {
            format!("{count} samples, below 3.7 at {}", failures.join(", "))
        },
    ))
}

/// Points where the oracle is compared with the formula.
pub const ORACLE_POINTS: [(f64, f64); 4] = [(0.0, 1.5), (-2.0, 1.2), (1.0, 1.1), (-4.0, 0.9)];
pub const ORACLE_AMPLITUDES: [f64; 3] = [0.02, 0.01, 0.005];

// Abscissa of each sign change in a table, by linear interpolation.
fn crossings(samples: &[regions::CurveSample]) -> Vec<f64> {
    samples
        .windows(2)
        .filter(|w| w[0].converged && w[1].converged && (w[0].value > 0.0) != (w[1].value > 0.0))
        .map(|w| w[0].d - w[0].value * (w[1].d - w[0].d) / (w[1].value - w[0].value))
        .collect()
}

fn oracle_agreement(opts: VerifyOptions) -> Outcome {
    let mut lines = Vec::new();
    let mut passed = true;
    for &(a, d) in &ORACLE_POINTS {
        let p = FlowParams::new(a, d)?;
        match verify_mu2(&p, &ORACLE_AMPLITUDES, Resolution { n_modes: 8, n_y: 200 }) {
            Ok(c) => {
                let ok = c.relative_error <= 0.05 && c.first_eigenvalue_negative;
                passed &= ok;
                lines.push(format!(
                    "({a}, {d}) formula {:.6} oracle {:.6} ({:.1e}{})",
                    c.formula,
                    c.estimate,
                    c.relative_error,
                    if c.first_eigenvalue_negative { "" } else { ", mu1 >= 0" }
                ));
            }
            Err(e) => {
                passed = false;
                lines.push(format!("({a}, {d}) {e}"));
            }
        }
    }

    // zero crossings in the plotted tables land on d0
    let points = if opts.quick { 100 } else { 400 };
    let mut worst = 0.0_f64;
    for fig in [3u8, 4] {
        let data = regions::sample_curves(CurveSpec { figure: fig, points })?;
        for curve in &data.curves {
            let a = curve.samples[0].a;
            let xs = crossings(&curve.samples);
            let root = regions::d0(a, DEFAULT_TOL)?;
            if xs.len() != 1 {
                passed = false;
                lines.push(format!("figure {fig}, a = {a}: {} sign changes", xs.len()));
                continue;
            }
            worst = worst.max((xs[0] - root).abs());
        }
    }
    let fig5 = regions::sample_curves(CurveSpec { figure: 5, points: if opts.quick { 40 } else { 200 } })?;
    let a0 = regions::a0_default()?;
    let end = fig5.curves[0]
        .samples
        .iter()
        .find(|s| s.a == a0 && s.value == 0.0)
        .ok_or_else(|| WaveError::Inconclusive("figure 5 table lacks its zero row".into()))?;
    worst = worst.max((end.d - regions::d0(a0, DEFAULT_TOL)?).abs());
    passed &= worst <= 1e-6;
    lines.push(format!("table crossings vs d0: {worst:.1e}"));
    Ok((passed, lines.join("; ")))
}

/// One rung sequence of the asymptotic check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ladder {
    pub quantity: &'static str,
    pub regime: AsymptoticRegime,
    pub points: Vec<(f64, f64)>,
    pub errors: Vec<f64>,
}

impl Ladder {
    pub fn halves(&self) -> bool {
        self.errors.windows(2).all(|w| w[1] <= 0.5 * w[0])
    }
}

fn relative(approx: f64, exact: f64) -> f64 {
    ((approx - exact) / exact).abs()
}

/// The ladders of `(a, d)` points that approach each regime limit.
pub fn ladders() -> Result<Vec<Ladder>> {
    use AsymptoticRegime::*;
    let near_critical = |a: f64, eps: &[f64]| -> Vec<(f64, f64)> {
        let dc = critical_depth(a);
        eps.iter().map(|e| (a, dc + e)).collect()
    };
    let near_stagnation = |a: f64, eps: &[f64]| -> Vec<(f64, f64)> {
        let ds = stagnation_depth_unchecked(a);
        eps.iter().map(|e| (a, ds + e)).collect()
    };
    let curve = |ds: &[f64]| -> Vec<(f64, f64)> { ds.iter().map(|&d| (-4.0 / (d * d), d)).collect() };
    let specs: Vec<(&'static str, AsymptoticRegime, Vec<(f64, f64)>)> = vec![
        ("tau", LargeDepth, vec![(1.0, 10.0), (1.0, 20.0), (1.0, 40.0)]),
        ("tau", NearCritical, near_critical(1.0, &[1e-2, 1e-3, 1e-4])),
        ("tau", NearStagnation, near_stagnation(1.0, &[0.04, 0.02, 0.01])),
        ("tau", CounterCurrentCurve, curve(&[0.4, 0.2, 0.1])),
        ("mu2", LargeDepth, vec![(-10.0, 10.0), (-10.0, 100.0), (-10.0, 1000.0)]),
        ("mu2", NearCritical, near_critical(1.0, &[1e-2, 1e-3, 1e-4])),
        ("mu2", NearStagnation, near_stagnation(3.0, &[0.04, 0.01, 0.0025])),
        ("mu2", CounterCurrentCurve, curve(&[0.2, 0.1, 0.05])),
    ];
    specs
        .into_iter()
        .map(|(quantity, regime, points)| {
            let errors = points
                .iter()
                .map(|&(a, d)| {
                    let p = FlowParams::new(a, d)?;
                    if quantity == "tau" {
                        Ok(relative(tau_asymptotic(&p, regime)?, solve_dispersion(&p, 1e-15)?.tau_star))
                    } else {
                        Ok(relative(mu2_asymptotic(&p, regime)?, mu2(&p)?.mu2))
                    }
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(Ladder { quantity, regime, points, errors })
        })
        .collect()
}

fn asymptotic_regimes() -> Outcome {
    let ladders = ladders()?;
    let passed = ladders.iter().all(Ladder::halves);
    let detail = ladders
        .iter()
        .map(|l| {
            let e: Vec<String> = l.errors.iter().map(|e| format!("{e:.1e}")).collect();
            format!("{} {} [{}]{}", l.quantity, l.regime.name(), e.join(" "), if l.halves() { "" } else { " not halving" })
        })
        .collect::<Vec<_>>()
        .join("; ");
    Ok((passed, detail))
}

/// Vorticity window of the sign-structure grid.
pub const SIGN_GRID_A: (f64, f64) = (-4.0, 2.0);
const SIGN_GRID_DEPTH: f64 = 3.0;

/// Depths of one column of the sign-structure grid, strictly inside the
/// subcritical part of the window.
pub fn sign_grid_column(a: f64, n: usize) -> Vec<f64> {
    let dc = critical_depth(a);
    let top = if a > 0.0 { stagnation_depth_unchecked(a) * (1.0 - 1e-3) } else { SIGN_GRID_DEPTH };
    (0..n).map(|j| dc + (top - dc) * (j as f64 + 0.5) / n as f64).collect()
}

struct Column {
    a: f64,
    spacing: f64,
    problems: Vec<String>,
    has_b_plus: bool,
}

fn check_column(a: f64, n: usize) -> Result<Column> {
    let depths = sign_grid_column(a, n);
    let spacing = depths[1] - depths[0];
    let mut problems = Vec::new();
    let mut mu = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for &d in &depths {
        let f = p0_and_b(&FlowParams::new(a, d)?)?;
        mu.push(f.mu2);
        b.push(f.b);
    }
    let changes = (1..n).filter(|&j| (mu[j - 1] > 0.0) != (mu[j] > 0.0)).count();
    if changes != 1 {
        problems.push(format!("{changes} sign changes of mu2"));
    }
    let root = regions::d0(a, DEFAULT_TOL)?;
    for (j, &d) in depths.iter().enumerate() {
        if (d < root) != (mu[j] > 0.0) {
            problems.push(format!("mu2 sign at d = {d:.4} against d0 = {root:.4}"));
        }
    }
    let positive: Vec<usize> = (0..n).filter(|&j| b[j] > 0.0).collect();
    if let (Some(&first), Some(&last)) = (positive.first(), positive.last()) {
        if last - first + 1 != positive.len() {
            problems.push("B > 0 cells are not contiguous".into());
        }
    }
    let slice = regions::b_plus_boundary(a, DEFAULT_TOL)?;
    match (slice.lower, slice.upper) {
        (Some(lo), Some(hi)) => {
            for (j, &d) in depths.iter().enumerate() {
                let inside = d > lo + spacing && d < hi - spacing;
                let outside = d < lo - spacing || d > hi + spacing;
                if (inside && !(b[j] > 0.0)) || (outside && b[j] > 0.0) {
                    problems.push(format!("B sign at d = {d:.4} against B+ = ({lo:.4}, {hi:.4})"));
                }
            }
        }
        _ if !positive.is_empty() => problems.push("B > 0 cells without a B+ slice".into()),
        _ => {}
    }
    Ok(Column { a, spacing, problems, has_b_plus: !positive.is_empty() })
}

fn sign_structure(opts: VerifyOptions) -> Outcome {
    let n = if opts.quick { 20 } else { 40 };
    let (lo, hi) = SIGN_GRID_A;
    let a_values: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let columns = a_values.par_iter().map(|&a| check_column(a, n)).collect::<Result<Vec<Column>>>()?;
    let mut problems: Vec<String> = columns
        .iter()
        .flat_map(|c| c.problems.iter().map(move |p| format!("a = {:.3}: {p}", c.a)))
        .collect();
    // columns carrying B > 0 form one run in a
    let flags: Vec<bool> = columns.iter().map(|c| c.has_b_plus).collect();
    let runs = (0..flags.len()).filter(|&i| flags[i] && (i == 0 || !flags[i - 1])).count();
    if runs != 1 {
        problems.push(format!("B > 0 occupies {runs} separate runs of columns"));
    }
    let a1 = regions::a1(1e-6)?;
    let da = (hi - lo) / (n - 1) as f64;
    for c in &columns {
        if (c.a < a1 - da && !c.has_b_plus && c.a > lo + da) || (c.a > a1 + da && c.has_b_plus) {
            problems.push(format!("a = {:.3}: B+ presence disagrees with a1 = {a1:.5}", c.a));
        }
    }
    let finest = columns.iter().map(|c| c.spacing).fold(f64::INFINITY, f64::min);
    Ok((
        problems.is_empty(),
        if problems.is_empty() {
            format!("{n}x{n} grid, a in [{lo}, {hi}], smallest depth step {finest:.3e}")
        } else {
            problems.join("; ")
        },
    ))
}
