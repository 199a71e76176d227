//! Parameter sweeps, extremum search and the finite-size scaling fit.

use rayon::prelude::*;

use crate::cache::SpectrumCache;
use crate::dissipation::BathParams;
use crate::error::{Error, Result};
use crate::io::{Table, Value};
use crate::model::DickeParams;
use crate::pipeline::{evaluate, run_point, PointResult, SolverSettings};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

/// One sweep axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub scale: Scale,
}

impl Axis {
    pub fn linear(name: &str, min: f64, max: f64, points: usize) -> Self {
        Axis {
            name: name.to_string(),
            min,
            max,
            points,
            scale: Scale::Linear,
        }
    }

    pub fn log(name: &str, min: f64, max: f64, points: usize) -> Self {
        Axis {
            scale: Scale::Log,
            ..Axis::linear(name, min, max, points)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(Error::invalid(
                "axis",
                format!("{} needs at least 2 points", self.name),
            ));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return Err(Error::invalid(
                "axis",
                format!(
                    "{} must satisfy min < max, got [{}, {}]",
                    self.name, self.min, self.max
                ),
            ));
        }
        if self.scale == Scale::Log && self.min <= 0.0 {
            return Err(Error::invalid(
                "axis",
                format!("{} is logarithmic but min ≤ 0", self.name),
            ));
        }
        Ok(())
    }

    /// Grid values; endpoints are exact.
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| {
                if i == 0 {
                    return self.min;
                }
                if i == n - 1 {
                    return self.max;
                }
                let t = i as f64 / (n - 1) as f64;
                match self.scale {
                    Scale::Linear => self.min + t * (self.max - self.min),
                    Scale::Log => (self.min.ln() + t * (self.max.ln() - self.min.ln())).exp(),
                }
            })
            .collect()
    }
}

/// Which finite-temperature critical coupling to subtract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LambdaCVariant {
    /// `(√(ωΔ)/2)·√coth(Δ/4T)`.
    Caption,
    /// `(√(ωΔ)/2)·coth(Δ/4T)`.
    MainText,
}

impl LambdaCVariant {
    pub fn name(self) -> &'static str {
        match self {
            LambdaCVariant::Caption => "caption",
            LambdaCVariant::MainText => "main-text",
        }
    }
}

/// Finite-temperature critical coupling; `T = 0` gives `√(ωΔ)/2`.
pub fn critical_coupling(
    params: &DickeParams,
    temperature: f64,
    variant: LambdaCVariant,
) -> Result<f64> {
    if !(temperature >= 0.0 && temperature.is_finite()) {
        return Err(Error::invalid(
            "temperature",
            format!("must be ≥ 0, got {temperature}"),
        ));
    }
    let base = (params.omega * params.delta).sqrt() / 2.0;
    if temperature == 0.0 {
        return Ok(base);
    }
    let coth = 1.0 / (params.delta / (4.0 * temperature)).tanh();
    Ok(match variant {
        LambdaCVariant::Caption => base * coth.sqrt(),
        LambdaCVariant::MainText => base * coth,
    })
}

pub const LAMBDA_ROW_LEVELS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaRow {
    pub lambda: f64,
    pub energies: Vec<f64>,
    pub g2: f64,
    pub one_photon_norm: f64,
    pub two_photon_norm: f64,
    pub parities: Vec<i8>,
    pub error: Option<String>,
}

impl LambdaRow {
    fn failed(lambda: f64, e: &Error) -> Self {
        LambdaRow {
            lambda,
            energies: vec![f64::NAN; LAMBDA_ROW_LEVELS],
            g2: f64::NAN,
            one_photon_norm: f64::NAN,
            two_photon_norm: f64::NAN,
            parities: vec![0; LAMBDA_ROW_LEVELS],
            error: Some(e.to_string()),
        }
    }

    fn from_point(lambda: f64, r: &PointResult) -> Self {
        let pad = |i: usize| r.energies().get(i).copied().unwrap_or(f64::NAN);
        LambdaRow {
            lambda,
            energies: (0..LAMBDA_ROW_LEVELS).map(pad).collect(),
            g2: r.correlation.g2,
            one_photon_norm: r.correlation.one_photon_normalized(),
            two_photon_norm: r.correlation.two_photon_normalized(),
            parities: (0..LAMBDA_ROW_LEVELS)
                .map(|i| r.parities().get(i).copied().unwrap_or(0))
                .collect(),
            error: None,
        }
    }
}

fn point(
    params: &DickeParams,
    baths: &BathParams,
    settings: &SolverSettings,
    cache: &SpectrumCache,
) -> Result<PointResult> {
    let system = cache.get_or_solve(params, settings)?;
    evaluate(&system, baths, settings)
}

fn log_point(what: &str, r: &Result<PointResult>) {
    match r {
        Ok(p) => log::info!("{what}: g2 = {:.6e} (k = {})", p.correlation.g2, p.k_levels),
        Err(e) => log::warn!("{what}: {e}"),
    }
}

/// g2 along a λ grid; failures land in the `error` column.
pub fn sweep_lambda(
    lambdas: &[f64],
    params: &DickeParams,
    baths: &BathParams,
    settings: &SolverSettings,
    cache: &SpectrumCache,
) -> Vec<LambdaRow> {
    lambdas
        .par_iter()
        .map(|&lambda| {
            let r = point(&params.with_lambda(lambda), baths, settings, cache);
            log_point(&format!("N = {}, λ = {lambda}", params.n_qubits), &r);
            match r {
                Ok(p) => LambdaRow::from_point(lambda, &p),
                Err(e) => LambdaRow::failed(lambda, &e),
            }
        })
        .collect()
}

pub fn lambda_table(rows: &[LambdaRow]) -> Table {
    let mut columns = vec!["lambda".to_string()];
    columns.extend((0..LAMBDA_ROW_LEVELS).map(|i| format!("E{i}")));
    columns.extend(["g2", "one_photon_norm", "two_photon_norm"].map(String::from));
    columns.extend((0..LAMBDA_ROW_LEVELS).map(|i| format!("parity{i}")));
    columns.push("error".to_string());
    let mut t = Table::new(columns);
    for r in rows {
        let mut row = vec![Value::Float(r.lambda)];
        row.extend(r.energies.iter().map(|&e| Value::Float(e)));
        row.extend([r.g2, r.one_photon_norm, r.two_photon_norm].map(Value::Float));
        row.extend(r.parities.iter().map(|&p| Value::Int(p as i64)));
        row.push(Value::Text(r.error.clone().unwrap_or_default()));
        t.push(row);
    }
    t
}

/// Golden-section search for a minimum of `f` on `[a, b]` down to `tol`.
pub fn golden_section(
    mut f: impl FnMut(f64) -> f64,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumKind {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub kind: ExtremumKind,
    pub lambda: f64,
    pub g2: f64,
}

/// Interior local extrema of a sampled profile; non-finite samples are skipped.
pub fn local_extrema(xs: &[f64], ys: &[f64]) -> Vec<(usize, ExtremumKind)> {
    let idx: Vec<usize> = (0..xs.len()).filter(|&i| ys[i].is_finite()).collect();
    let mut out = Vec::new();
    for w in idx.windows(3) {
        let (a, b, c) = (ys[w[0]], ys[w[1]], ys[w[2]]);
        if b > a && b >= c {
            out.push((w[1], ExtremumKind::Max));
        } else if b < a && b <= c {
            out.push((w[1], ExtremumKind::Min));
        }
    }
    out
}

/// Refinement tolerance on λ.
pub const EXTREMUM_TOLERANCE: f64 = 1e-4;
/// Fewest coarse points per qubit number.
pub const MIN_COARSE_POINTS: usize = 60;
/// Local extrema of each kind that get refined, best coarse values first.
const REFINED_CANDIDATES: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct QubitExtrema {
    pub n_qubits: usize,
    pub max: Option<Extremum>,
    pub min: Option<Extremum>,
    /// Every coarse local extremum, refined or not.
    pub local: Vec<Extremum>,
    pub coarse: Vec<LambdaRow>,
}

fn refine(
    kind: ExtremumKind,
    lo: f64,
    hi: f64,
    params: &DickeParams,
    baths: &BathParams,
    settings: &SolverSettings,
) -> Option<Extremum> {
    let sign = match kind {
        ExtremumKind::Max => -1.0,
        ExtremumKind::Min => 1.0,
    };
    let f = |lambda: f64| match run_point(&params.with_lambda(lambda), baths, settings) {
        Ok(p) => sign * p.correlation.g2,
        Err(_) => f64::INFINITY,
    };
    let (lambda, v) = golden_section(f, lo, hi, EXTREMUM_TOLERANCE);
    v.is_finite().then_some(Extremum {
        kind,
        lambda,
        g2: sign * v,
    })
}

/// Coarse λ grid used for each qubit number.
#[derive(Debug, Clone, PartialEq)]
pub enum QubitGrid {
    /// The same axis for every N.
    Fixed(Axis),
    /// `[0.6 λ0, λ0 (1 + 12/N)]` with `λ0 = √(ωΔ)/2`, which follows the
    /// extrema as they close in on the transition like 1/N.
    Scaled { points: usize },
}

impl QubitGrid {
    pub fn axis(&self, n_qubits: usize, params: &DickeParams) -> Axis {
        match self {
            QubitGrid::Fixed(a) => a.clone(),
            QubitGrid::Scaled { points } => {
                let l0 = (params.omega * params.delta).sqrt() / 2.0;
                Axis::linear(
                    "lambda",
                    0.6 * l0,
                    l0 * (1.0 + 12.0 / n_qubits as f64),
                    *points,
                )
            }
        }
    }
}

/// Global extrema of g2 over λ for every qubit number: coarse grid then
/// golden-section refinement of the most promising local extrema.
pub fn sweep_qubits(
    n_values: &[usize],
    grid: &QubitGrid,
    params: &DickeParams,
    baths: &BathParams,
    settings: &SolverSettings,
) -> Result<Vec<QubitExtrema>> {
    let axes: Vec<Axis> = n_values.iter().map(|&n| grid.axis(n, params)).collect();
    for a in &axes {
        a.validate()?;
        if a.points < MIN_COARSE_POINTS {
            return Err(Error::invalid(
                "lambda_points",
                format!("extremum search needs at least {MIN_COARSE_POINTS} coarse points"),
            ));
        }
    }
    let grids: Vec<Vec<f64>> = axes.iter().map(Axis::values).collect();
    let jobs: Vec<(usize, f64)> = n_values
        .iter()
        .zip(&grids)
        .flat_map(|(&n, g)| g.iter().map(move |&l| (n, l)))
        .collect();
    let rows: Vec<LambdaRow> = jobs
        .par_iter()
        .map(|&(n, lambda)| {
            let p = params.with_qubits(n).with_lambda(lambda);
            let r = run_point(&p, baths, settings);
            log_point(&format!("N = {n}, λ = {lambda}"), &r);
            match r {
                Ok(pt) => LambdaRow::from_point(lambda, &pt),
                Err(e) => LambdaRow::failed(lambda, &e),
            }
        })
        .collect();

    n_values
        .par_iter()
        .enumerate()
        .map(|(i, &n)| {
            let lambdas = &grids[i];
            let start: usize = grids[..i].iter().map(Vec::len).sum();
            let coarse = rows[start..start + lambdas.len()].to_vec();
            let ys: Vec<f64> = coarse.iter().map(|r| r.g2).collect();
            let found = local_extrema(lambdas, &ys);
            let local: Vec<Extremum> = found
                .iter()
                .map(|&(j, kind)| Extremum {
                    kind,
                    lambda: lambdas[j],
                    g2: ys[j],
                })
                .collect();
            let p = params.with_qubits(n);
            let pick = |kind: ExtremumKind| -> Option<Extremum> {
                let mut cands: Vec<usize> =
                    found.iter().filter(|f| f.1 == kind).map(|f| f.0).collect();
                cands.sort_by(|&a, &b| match kind {
                    ExtremumKind::Max => ys[b].total_cmp(&ys[a]),
                    ExtremumKind::Min => ys[a].total_cmp(&ys[b]),
                });
                cands.truncate(REFINED_CANDIDATES);
                cands
                    .par_iter()
                    .filter_map(|&j| {
                        refine(kind, lambdas[j - 1], lambdas[j + 1], &p, baths, settings)
                    })
                    .collect::<Vec<_>>()
                    .into_iter()
                    .reduce(|a, b| match kind {
                        ExtremumKind::Max if b.g2 > a.g2 => b,
                        ExtremumKind::Min if b.g2 < a.g2 => b,
                        _ => a,
                    })
            };
            let max = pick(ExtremumKind::Max);
            let min = pick(ExtremumKind::Min);
            if max.is_none() || min.is_none() {
                log::warn!(
                    "N = {n}: no interior {} on the λ grid",
                    if max.is_none() { "maximum" } else { "minimum" }
                );
            }
            Ok(QubitExtrema {
                n_qubits: n,
                max,
                min,
                local,
                coarse,
            })
        })
        .collect()
}

pub fn qubits_table(rows: &[QubitExtrema]) -> Table {
    let mut t = Table::new(
        [
            "n",
            "lambda_max",
            "g2_max",
            "lambda_min",
            "g2_min",
            "local_extrema",
        ]
        .map(String::from)
        .to_vec(),
    );
    let nan = f64::NAN;
    for r in rows {
        let local = r
            .local
            .iter()
            .map(|e| {
                let k = if e.kind == ExtremumKind::Max {
                    "max"
                } else {
                    "min"
                };
                format!("{k}@{:?}", e.lambda)
            })
            .collect::<Vec<_>>()
            .join(" ");
        t.push(vec![
            Value::Int(r.n_qubits as i64),
            Value::Float(r.max.map_or(nan, |e| e.lambda)),
            Value::Float(r.max.map_or(nan, |e| e.g2)),
            Value::Float(r.min.map_or(nan, |e| e.lambda)),
            Value::Float(r.min.map_or(nan, |e| e.g2)),
            Value::Text(local),
        ]);
    }
    t
}

/// Least-squares line `y = a + b x` with standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub slope_stderr: f64,
    pub intercept: f64,
    pub intercept_stderr: f64,
    pub residuals: Vec<f64>,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let n = x.len();
    if n < 3 || y.len() != n {
        return Err(Error::invalid(
            "fit",
            format!("need at least 3 paired points, got {n}"),
        ));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::ZeroDenominator("spread of fit abscissae"));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(a, b)| b - (intercept + slope * a))
        .collect();
    let s2 = residuals.iter().map(|r| r * r).sum::<f64>() / (nf - 2.0);
    Ok(LineFit {
        slope,
        slope_stderr: (s2 / sxx).sqrt(),
        intercept,
        intercept_stderr: (s2 * (1.0 / nf + mx * mx / sxx)).sqrt(),
        residuals,
    })
}

/// Fewest qubit numbers a branch fit accepts.
pub const MIN_FIT_POINTS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct BranchFit {
    /// Qubit numbers that entered the fit.
    pub n_values: Vec<usize>,
    /// `(N, λ_extreme)` dropped because `λ_extreme ≤ λ_c`.
    pub excluded: Vec<(usize, f64)>,
    pub fit: Option<LineFit>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub temperature: f64,
    pub variant: LambdaCVariant,
    pub lambda_c: f64,
    /// `(N, λ_min, λ_max)`.
    pub extrema: Vec<(usize, f64, f64)>,
    pub min_branch: BranchFit,
    pub max_branch: BranchFit,
}

fn fit_branch(points: &[(usize, f64)], lambda_c: f64) -> BranchFit {
    let (kept, excluded): (Vec<(usize, f64)>, Vec<(usize, f64)>) = points
        .iter()
        .partition(|p| p.1 > lambda_c && p.1.is_finite());
    let mut distinct: Vec<usize> = kept.iter().map(|p| p.0).collect();
    distinct.dedup();
    let fit = if distinct.len() >= MIN_FIT_POINTS {
        let x: Vec<f64> = kept.iter().map(|p| (p.0 as f64).ln()).collect();
        let y: Vec<f64> = kept.iter().map(|p| (p.1 - lambda_c).ln()).collect();
        fit_line(&x, &y).ok()
    } else {
        None
    };
    BranchFit {
        n_values: kept.iter().map(|p| p.0).collect(),
        excluded,
        fit,
    }
}

/// Log-log fit of `λ_extreme(N) - λ_c` against `N` for both branches.
pub fn scaling_fit(
    extrema: &[(usize, f64, f64)],
    params: &DickeParams,
    temperature: f64,
    variant: LambdaCVariant,
) -> Result<ScalingFit> {
    let lambda_c = critical_coupling(params, temperature, variant)?;
    let mins: Vec<(usize, f64)> = extrema.iter().map(|e| (e.0, e.1)).collect();
    let maxs: Vec<(usize, f64)> = extrema.iter().map(|e| (e.0, e.2)).collect();
    let min_branch = fit_branch(&mins, lambda_c);
    let max_branch = fit_branch(&maxs, lambda_c);
    for (name, b) in [("min", &min_branch), ("max", &max_branch)] {
        for (n, l) in &b.excluded {
            log::warn!("{name} branch: N = {n} excluded, λ = {l} is not above λ_c = {lambda_c}");
        }
    }
    Ok(ScalingFit {
        temperature,
        variant,
        lambda_c,
        extrema: extrema.to_vec(),
        min_branch,
        max_branch,
    })
}

pub fn scaling_table(fit: &ScalingFit) -> Table {
    let mut t = Table::new(
        [
            "branch",
            "variant",
            "lambda_c",
            "n",
            "lambda_extreme",
            "offset",
            "residual",
            "slope",
            "slope_stderr",
            "status",
        ]
        .map(String::from)
        .to_vec(),
    );
    for (name, b, col) in [
        ("min", &fit.min_branch, 1usize),
        ("max", &fit.max_branch, 2),
    ] {
        let (slope, err) = b
            .fit
            .as_ref()
            .map_or((f64::NAN, f64::NAN), |f| (f.slope, f.slope_stderr));
        for e in &fit.extrema {
            let lambda = if col == 1 { e.1 } else { e.2 };
            let pos = b.n_values.iter().position(|&n| n == e.0);
            let residual = match (pos, &b.fit) {
                (Some(i), Some(f)) => f.residuals[i],
                _ => f64::NAN,
            };
            t.push(vec![
                Value::Text(name.into()),
                Value::Text(fit.variant.name().into()),
                Value::Float(fit.lambda_c),
                Value::Int(e.0 as i64),
                Value::Float(lambda),
                Value::Float(lambda - fit.lambda_c),
                Value::Float(residual),
                Value::Float(slope),
                Value::Float(err),
                Value::Text(if pos.is_some() { "fitted" } else { "excluded" }.into()),
            ]);
        }
    }
    t
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub lambda: f64,
    pub t_q: f64,
    pub t_c: f64,
    pub g2: f64,
    pub one_photon_norm: f64,
    pub two_photon_norm: f64,
    pub k_levels: usize,
    pub error: Option<String>,
}

fn grid_row(lambda: f64, t_q: f64, t_c: f64, r: Result<PointResult>) -> GridRow {
    match r {
        Ok(p) => GridRow {
            lambda,
            t_q,
            t_c,
            g2: p.correlation.g2,
            one_photon_norm: p.correlation.one_photon_normalized(),
            two_photon_norm: p.correlation.two_photon_normalized(),
            k_levels: p.k_levels,
            error: None,
        },
        Err(e) => GridRow {
            lambda,
            t_q,
            t_c,
            g2: f64::NAN,
            one_photon_norm: f64::NAN,
            two_photon_norm: f64::NAN,
            k_levels: 0,
            error: Some(e.to_string()),
        },
    }
}

/// Every `(λ, T_q, T_c)` combination, in that nesting order. Each λ is
/// diagonalized once and shared through `cache`.
pub fn bias_grid(
    lambdas: &[f64],
    tq_values: &[f64],
    tc_values: &[f64],
    params: &DickeParams,
    baths: &BathParams,
    settings: &SolverSettings,
    cache: &SpectrumCache,
) -> Vec<GridRow> {
    let jobs: Vec<(f64, f64, f64)> = lambdas
        .iter()
        .flat_map(|&l| {
            tq_values
                .iter()
                .flat_map(move |&q| tc_values.iter().map(move |&c| (l, q, c)))
        })
        .collect();
    // one solve per λ up front so the grid points only hit the cache
    lambdas.par_iter().for_each(|&l| {
        if let Err(e) = cache.get_or_solve(&params.with_lambda(l), settings) {
            log::warn!("λ = {l}: {e}");
        }
    });
    jobs.par_iter()
        .map(|&(l, q, c)| {
            let b = baths.with_temperatures(q, c);
            let r = point(&params.with_lambda(l), &b, settings, cache);
            log_point(&format!("λ = {l}, T_q = {q}, T_c = {c}"), &r);
            grid_row(l, q, c, r)
        })
        .collect()
}

/// Equal-temperature sweep `T_q = T_c = T`.
pub fn sweep_temperature(
    lambdas: &[f64],
    temperatures: &[f64],
    params: &DickeParams,
    baths: &BathParams,
    settings: &SolverSettings,
    cache: &SpectrumCache,
) -> Vec<GridRow> {
    lambdas.par_iter().for_each(|&l| {
        if let Err(e) = cache.get_or_solve(&params.with_lambda(l), settings) {
            log::warn!("λ = {l}: {e}");
        }
    });
    let jobs: Vec<(f64, f64)> = lambdas
        .iter()
        .flat_map(|&l| temperatures.iter().map(move |&t| (l, t)))
        .collect();
    jobs.par_iter()
        .map(|&(l, t)| {
            let b = baths.with_temperatures(t, t);
            let r = point(&params.with_lambda(l), &b, settings, cache);
            log_point(&format!("λ = {l}, T = {t}"), &r);
            grid_row(l, t, t, r)
        })
        .collect()
}

pub fn grid_table(rows: &[GridRow]) -> Table {
    let mut t = Table::new(
        [
            "lambda",
            "t_q",
            "t_c",
            "g2",
            "one_photon_norm",
            "two_photon_norm",
            "k_levels",
            "error",
        ]
        .map(String::from)
        .to_vec(),
    );
    for r in rows {
        t.push(vec![
            Value::Float(r.lambda),
            Value::Float(r.t_q),
            Value::Float(r.t_c),
            Value::Float(r.g2),
            Value::Float(r.one_photon_norm),
            Value::Float(r.two_photon_norm),
            Value::Int(r.k_levels as i64),
            Value::Text(r.error.clone().unwrap_or_default()),
        ]);
    }
    t
}
