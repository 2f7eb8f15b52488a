//! Curves in the `(a, d)` plane: the zero set of `mu2`, its crossing with
//! the stagnation depth, the band where the formal-stability quantity is
//! positive, and tables for plotting.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, WaveError};
use crate::laminar::{critical_depth, stagnation_depth_unchecked, stagnation_height, FlowParams};
use crate::stability::{mu2, p0_and_b};

/// Relative depth tolerance used when none is given.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Points in the coarse depth scan that locates sign changes.
pub const SCAN_POINTS: usize = 256;
// first scan point sits this fraction of the window above d_c
const SCAN_START: f64 = 1e-7;
// relative distance kept from the stagnation depth when a > 0
const STAGNATION_MARGIN: f64 = 1e-5;
const MAX_BISECTIONS: usize = 200;

/// Depth interval searched at vorticity `a`.
pub fn search_window(a: f64) -> (f64, f64) {
    let dc = critical_depth(a);
    let ds = stagnation_depth_unchecked(a);
    let hi = if a > 0.0 {
        ds * (1.0 - STAGNATION_MARGIN)
    } else if ds.is_finite() {
        (5.0 * ds).max(10.0)
    } else {
        10.0
    };
    (dc, hi)
}

// Geometric in the distance from d_c: the interesting structure is packed
// against the critical depth when |a| is large.
fn scan_depths(a: f64) -> Vec<f64> {
    let (lo, hi) = search_window(a);
    let ratio = (1.0 / SCAN_START).powf(1.0 / (SCAN_POINTS - 1) as f64);
    (0..SCAN_POINTS).map(|i| lo + (hi - lo) * SCAN_START * ratio.powi(i as i32)).collect()
}

fn mu2_at(a: f64, d: f64) -> Result<f64> {
    Ok(mu2(&FlowParams::new(a, d)?)?.mu2)
}

fn b_at(a: f64, d: f64) -> Result<f64> {
    Ok(p0_and_b(&FlowParams::new(a, d)?)?.b)
}

fn scan<F>(depths: &[f64], f: F) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    depths.par_iter().map(|&d| f(d)).collect()
}

// Bisection on a fallible function; `lo` and `hi` must carry opposite signs.
fn bisect_sign<F>(mut f: F, mut lo: f64, mut hi: f64, xtol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let positive_lo = f(lo)? > 0.0;
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= xtol || mid == lo || mid == hi {
            return Ok(mid);
        }
        let v = f(mid)?;
        if v == 0.0 {
            return Ok(mid);
        }
        if (v > 0.0) == positive_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(WaveError::NoConvergence { what: "bisection", iterations: MAX_BISECTIONS })
}

fn sign_changes(xs: &[f64], vs: &[f64]) -> Vec<(f64, f64)> {
    (1..xs.len()).filter(|&i| (vs[i - 1] > 0.0) != (vs[i] > 0.0)).map(|i| (xs[i - 1], xs[i])).collect()
}

/// Depth `d0(a)` at which `mu2` changes sign, positive below and negative above.
///
/// Every sign change of a coarse scan is recorded; more than one is an error
/// rather than a silent choice.
pub fn d0(a: f64, tol: f64) -> Result<f64> {
    let depths = scan_depths(a);
    let values = scan(&depths, |d| mu2_at(a, d))?;
    let changes = sign_changes(&depths, &values);
    match changes.len() {
        0 => Err(WaveError::NoSignChange { what: "mu2 along depth", lo: depths[0], hi: depths[depths.len() - 1] }),
        1 => {
            let (lo, hi) = changes[0];
            if !(values[0] > 0.0) {
                return Err(WaveError::RegimeMismatch {
                    regime: "near critical",
                    reason: format!("mu2 is not positive just above d_c at a = {a}"),
                });
            }
            bisect_sign(|d| mu2_at(a, d), lo, hi, tol * hi)
        }
        count => Err(WaveError::MultipleRoots {
            what: "mu2 along depth",
            count,
            locations: changes.iter().map(|(l, h)| 0.5 * (l + h)).collect(),
        }),
    }
}

fn d0_minus_ds(a: f64, tol: f64) -> Result<f64> {
    Ok(d0(a, tol)? - stagnation_depth_unchecked(a))
}

/// Vorticity where `d0(a) = d_s(a)`, searched on `(-5, -0.5)`.
pub fn a0(tol: f64) -> Result<f64> {
    let (lo, hi) = (-5.0, -0.5);
    let (glo, ghi) = (d0_minus_ds(lo, tol)?, d0_minus_ds(hi, tol)?);
    if (glo > 0.0) == (ghi > 0.0) {
        return Err(WaveError::NoSignChange { what: "d0 - d_s", lo, hi });
    }
    bisect_sign(|a| d0_minus_ds(a, tol), lo, hi, tol.max(1e-14))
}

/// `a0` at the default tolerance, computed once per process.
pub fn a0_default() -> Result<f64> {
    static CACHE: OnceLock<Result<f64>> = OnceLock::new();
    CACHE.get_or_init(|| a0(DEFAULT_TOL)).clone()
}

/// Slice `{d : B(a, d) > 0}` at one vorticity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BPlusSlice {
    pub a: f64,
    pub exists: bool,
    /// Largest value of `B` on the search window and where it occurs.
    pub max_b: f64,
    pub argmax: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    /// Number of separate positive intervals seen on the scan.
    pub components: usize,
}

// Golden-section refinement of a maximum bracketed by three scan points.
fn refine_max<F>(f: F, mut lo: f64, mut hi: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    for _ in 0..80 {
        if (hi - lo) <= 1e-13 * hi.abs() {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1)?;
        }
    }
    Ok(if f1 > f2 { (x1, f1) } else { (x2, f2) })
}

pub fn b_plus_boundary(a: f64, tol: f64) -> Result<BPlusSlice> {
    let depths = scan_depths(a);
    let values = scan(&depths, |d| b_at(a, d))?;
    let imax = (0..values.len()).max_by(|&i, &j| values[i].total_cmp(&values[j])).expect("nonempty scan");
    let (argmax, max_b) = if imax > 0 && imax + 1 < values.len() {
        refine_max(|d| b_at(a, d), depths[imax - 1], depths[imax + 1])?
    } else {
        (depths[imax], values[imax])
    };
    let components = (0..values.len())
        .filter(|&i| values[i] > 0.0 && (i == 0 || !(values[i - 1] > 0.0)))
        .count()
        .max(usize::from(max_b > 0.0));
    let mut slice = BPlusSlice { a, exists: max_b > 0.0, max_b, argmax, lower: None, upper: None, components };
    if !slice.exists {
        return Ok(slice);
    }
    // roots on either side of the component containing the maximum
    let left = (0..depths.len()).rev().find(|&i| depths[i] < argmax && !(values[i] > 0.0));
    let right = (0..depths.len()).find(|&i| depths[i] > argmax && !(values[i] > 0.0));
    if let Some(i) = left {
        slice.lower = Some(bisect_sign(|d| b_at(a, d), depths[i], argmax, tol * argmax)?);
    }
    if let Some(i) = right {
        slice.upper = Some(bisect_sign(|d| b_at(a, d), argmax, depths[i], tol * depths[i])?);
    }
    Ok(slice)
}

/// Largest `a` in `(0, 1)` whose `B+` slice is nonempty.
///
/// The existence flag is sampled on a coarse grid first; a pattern other
/// than a single switch from present to absent is reported as inconclusive.
pub fn a1(tol: f64) -> Result<f64> {
    let grid: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
    let flags: Vec<bool> = grid
        .par_iter()
        .map(|&a| Ok(b_plus_boundary(a, DEFAULT_TOL)?.max_b > 0.0))
        .collect::<Result<_>>()?;
    let switches: Vec<usize> = (1..flags.len()).filter(|&i| flags[i] != flags[i - 1]).collect();
    if switches.len() != 1 || !flags[0] {
        let pattern: String = flags.iter().map(|&f| if f { '+' } else { '-' }).collect();
        return Err(WaveError::Inconclusive(format!("B+ existence over a = 0, 0.05, .., 1: {pattern}")));
    }
    let i = switches[0];
    bisect_sign(|a| b_plus_boundary(a, DEFAULT_TOL).map(|s| s.max_b), grid[i - 1], grid[i], tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveId {
    CriticalDepth,
    StagnationDepth,
    D0,
    BPlusLower,
    BPlusUpper,
    YStarOnD0,
    /// `sgn(mu2) ln(1 + |mu2|)` along depth at fixed `a`.
    SignedLogMu2,
}

impl CurveId {
    pub fn name(self) -> &'static str {
        match self {
            CurveId::CriticalDepth => "critical_depth",
            CurveId::StagnationDepth => "stagnation_depth",
            CurveId::D0 => "d0",
            CurveId::BPlusLower => "b_plus_lower",
            CurveId::BPlusUpper => "b_plus_upper",
            CurveId::YStarOnD0 => "ystar_on_d0",
            CurveId::SignedLogMu2 => "signed_log_mu2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            CurveId::CriticalDepth,
            CurveId::StagnationDepth,
            CurveId::D0,
            CurveId::BPlusLower,
            CurveId::BPlusUpper,
            CurveId::YStarOnD0,
            CurveId::SignedLogMu2,
        ]
        .into_iter()
        .find(|c| c.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveSample {
    pub a: f64,
    pub d: f64,
    pub value: f64,
    pub converged: bool,
}

impl CurveSample {
    fn failed(a: f64, d: f64) -> Self {
        Self { a, d, value: f64::NAN, converged: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionCurve {
    pub curve_id: CurveId,
    pub samples: Vec<CurveSample>,
}

pub fn signed_log(x: f64) -> f64 {
    x.signum() * x.abs().ln_1p() * f64::from(x != 0.0)
}

/// `Y*(a, d0(a))` along `a_grid` and its largest value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YStarCurve {
    pub curve: RegionCurve,
    pub supremum: f64,
}

pub fn ystar_on_d0(a_grid: &[f64]) -> Result<YStarCurve> {
    let a0 = a0_default()?;
    if let Some(&bad) = a_grid.iter().find(|&&a| !(a < a0)) {
        return Err(WaveError::OutOfRange { name: "a", value: bad, lo: f64::NEG_INFINITY, hi: a0 });
    }
    let mut samples: Vec<CurveSample> = a_grid.par_iter().map(|&a| ystar_sample(a)).collect();
    samples.sort_by(|x, y| x.a.total_cmp(&y.a));
    let supremum = samples.iter().filter(|s| s.converged).map(|s| s.value).fold(f64::NEG_INFINITY, f64::max);
    Ok(YStarCurve { curve: RegionCurve { curve_id: CurveId::YStarOnD0, samples }, supremum })
}

fn ystar_sample(a: f64) -> CurveSample {
    let run = || -> Result<(f64, f64)> {
        let d = d0(a, DEFAULT_TOL)?;
        Ok((d, stagnation_height(&FlowParams::new(a, d)?)?.relative))
    };
    match run() {
        Ok((d, y)) => CurveSample { a, d, value: y, converged: true },
        Err(_) => CurveSample::failed(a, f64::NAN),
    }
}

/// What `sample_curves` draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveSpec {
    pub figure: u8,
    /// Points per curve.
    pub points: usize,
}

impl CurveSpec {
    pub fn new(figure: u8) -> Self {
        Self { figure, points: 400 }
    }
}

/// Curves for one figure plus reference levels (named constants drawn as lines).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureData {
    pub figure: u8,
    pub curves: Vec<RegionCurve>,
    pub references: Vec<(String, f64)>,
}

pub const FIGURE3_A: [f64; 5] = [-10.0, -3.0, -0.3, -0.1, 0.0];
pub const FIGURE4_A: [f64; 5] = [5.0, 1.5, 0.5, 0.25, 0.15];

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn depth_curves(a_grid: &[f64], ids: &[CurveId]) -> Vec<RegionCurve> {
    let rows: Vec<(f64, Result<f64>, Result<BPlusSlice>)> = a_grid
        .par_iter()
        .map(|&a| {
            let d0v = if ids.contains(&CurveId::D0) { d0(a, DEFAULT_TOL) } else { Ok(f64::NAN) };
            let bp = if ids.contains(&CurveId::BPlusLower) || ids.contains(&CurveId::BPlusUpper) {
                b_plus_boundary(a, DEFAULT_TOL)
            } else {
                Err(WaveError::Request("not requested".into()))
            };
            (a, d0v, bp)
        })
        .collect();
    ids.iter()
        .map(|&id| {
            let samples = rows
                .iter()
                .filter_map(|(a, d0v, bp)| {
                    let a = *a;
                    let depth = |d: f64| CurveSample { a, d, value: d, converged: true };
                    match id {
                        CurveId::CriticalDepth => Some(depth(critical_depth(a))),
                        CurveId::StagnationDepth => Some(depth(stagnation_depth_unchecked(a))),
                        CurveId::D0 => Some(d0v.as_ref().map_or(CurveSample::failed(a, f64::NAN), |&d| depth(d))),
                        // a slice without B > 0 has no boundary point
                        CurveId::BPlusLower => match bp {
                            Ok(s) => s.lower.map(depth),
                            Err(_) => Some(CurveSample::failed(a, f64::NAN)),
                        },
                        CurveId::BPlusUpper => match bp {
                            Ok(s) => s.upper.map(depth),
                            Err(_) => Some(CurveSample::failed(a, f64::NAN)),
                        },
                        _ => None,
                    }
                })
                .collect();
            RegionCurve { curve_id: id, samples }
        })
        .collect()
}

/// `sgn(mu2) ln(1 + |mu2|)` against depth at fixed `a`, with the zero
/// crossing at `d0(a)` inserted as an exact row.
pub fn signed_log_curve(a: f64, d_top: f64, points: usize) -> RegionCurve {
    let dc = critical_depth(a);
    let mut depths: Vec<f64> = linspace(dc, d_top, points + 1).into_iter().skip(1).collect();
    if let Ok(root) = d0(a, DEFAULT_TOL) {
        if root < d_top {
            depths.push(root);
        }
    }
    depths.sort_by(f64::total_cmp);
    let samples = depths
        .par_iter()
        .map(|&d| match mu2_at(a, d) {
            Ok(m) => CurveSample { a, d, value: signed_log(m), converged: true },
            Err(_) => CurveSample::failed(a, d),
        })
        .collect();
    RegionCurve { curve_id: CurveId::SignedLogMu2, samples }
}

pub fn sample_curves(spec: CurveSpec) -> Result<FigureData> {
    let n = spec.points.max(2);
    let mut references = Vec::new();
    let curves = match spec.figure {
        1 => {
            references.push(("a0".to_string(), a0_default()?));
            depth_curves(&linspace(-4.0, 4.0, n), &[CurveId::CriticalDepth, CurveId::StagnationDepth, CurveId::D0])
        }
        2 => depth_curves(&linspace(-4.0, 4.0, n), &[CurveId::CriticalDepth, CurveId::StagnationDepth]),
        3 => {
            let a0 = a0_default()?;
            references.push(("a0".to_string(), a0));
            let mut a_values = FIGURE3_A.to_vec();
            a_values.insert(2, a0);
            a_values.iter().map(|&a| signed_log_curve(a, default_depth_top(a), n)).collect()
        }
        4 => FIGURE4_A
            .iter()
            .map(|&a| signed_log_curve(a, default_depth_top(a), n))
            .collect(),
        5 => {
            let a0 = a0_default()?;
            // uniform in log|a| from -1000 up to a0, excluding a0 itself
            let (l0, l1) = (1000f64.ln(), (-a0).ln());
            let grid: Vec<f64> = (0..n).map(|i| -(l0 + (l1 - l0) * i as f64 / n as f64).exp()).collect();
            let mut curve = ystar_on_d0(&grid)?;
            // Y* vanishes at a0, where d0 = d_s
            curve.curve.samples.push(CurveSample { a: a0, d: stagnation_depth_unchecked(a0), value: 0.0, converged: true });
            references.push(("a0".to_string(), a0));
            references.push(("ystar_limit".to_string(), ystar_limit()?));
            vec![curve.curve]
        }
        6 => {
            references.push(("a0".to_string(), a0_default()?));
            references.push(("a1".to_string(), a1(1e-6)?));
            depth_curves(
                &linspace(-4.0, 0.5, n),
                &[CurveId::CriticalDepth, CurveId::StagnationDepth, CurveId::D0, CurveId::BPlusLower, CurveId::BPlusUpper],
            )
        }
        other => return Err(WaveError::Request(format!("no figure {other}; expected 1..6"))),
    };
    Ok(FigureData { figure: spec.figure, curves, references })
}

/// One curve over a grid of vorticities. `SignedLogMu2` runs along depth
/// instead and is built by [`signed_log_curve`].
pub fn trace_curve(id: CurveId, a_grid: &[f64]) -> Result<RegionCurve> {
    match id {
        CurveId::SignedLogMu2 => Err(WaveError::Request("signed_log_mu2 is traced along depth at fixed a".into())),
        CurveId::YStarOnD0 => Ok(ystar_on_d0(a_grid)?.curve),
        _ => Ok(depth_curves(a_grid, &[id]).pop().expect("one curve per id")),
    }
}

/// Top of the depth axis for [`signed_log_curve`] when none is given.
pub fn default_depth_top(a: f64) -> f64 {
    if a > 0.0 {
        search_window(a).1
    } else {
        3.0
    }
}

/// Limit of `Y*(a, d0(a))` as `a -> -inf`, estimated far out on the branch.
pub fn ystar_limit() -> Result<f64> {
    let a = -1e5;
    let d = d0(a, DEFAULT_TOL)?;
    Ok(stagnation_height(&FlowParams::new(a, d)?)?.relative)
}
