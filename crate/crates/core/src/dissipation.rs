//! Dressed master equation restricted to eigenstate populations.
//!
//! Both baths are Ohmic, `γ(ω) = παω e^{-ω/ω_c}`, and couple through
//! `(J+ + J-)/√N` (qubits, temperature `t_q`) and `a† + a` (cavity, `t_c`).
//! For every pair `j < k` with gap `Δ = E_k - E_j ≥ 0` bath `u` drives
//!
//! ```text
//! k → j   at  γ(Δ) |S_u^{jk}|² (1 + n_u(Δ))
//! j → k   at  γ(Δ) |S_u^{jk}|² n_u(Δ)
//! ```
//!
//! and coherences are dropped. The stationary populations are found with the
//! Grassmann–Taksar–Heyman state reduction, which uses no subtractions and
//! therefore keeps full relative accuracy even for populations like
//! `e^{-40}` that decide the two-photon correlator at low temperature.

use faer::Mat;

use crate::error::{Error, Result};
use crate::operators::TransitionTables;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathParams {
    /// Dimensionless Ohmic coupling α.
    pub alpha: f64,
    /// Cutoff frequency ω_c.
    pub omega_c: f64,
    /// Qubit-bath temperature.
    pub t_q: f64,
    /// Cavity-bath temperature.
    pub t_c: f64,
}

impl BathParams {
    pub fn new(alpha: f64, omega_c: f64, t_q: f64, t_c: f64) -> Result<Self> {
        let b = BathParams {
            alpha,
            omega_c,
            t_q,
            t_c,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        match self.problems().into_iter().next() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    /// Every violated invariant, in field order.
    pub fn problems(&self) -> Vec<Error> {
        let mut out = Vec::new();
        for (name, v) in [("alpha", self.alpha), ("omega_c", self.omega_c)] {
            if !(v.is_finite() && v > 0.0) {
                out.push(Error::invalid(name, format!("must be positive, got {v}")));
            }
        }
        for (name, t) in [("t_q", self.t_q), ("t_c", self.t_c)] {
            if !(t.is_finite() && t >= 0.0) {
                out.push(Error::invalid(
                    name,
                    format!("must be non-negative, got {t}"),
                ));
            }
        }
        out
    }

    pub fn with_temperatures(mut self, t_q: f64, t_c: f64) -> Self {
        self.t_q = t_q;
        self.t_c = t_c;
        self
    }

    pub fn max_temperature(&self) -> f64 {
        self.t_q.max(self.t_c)
    }
}

impl Default for BathParams {
    fn default() -> Self {
        BathParams {
            alpha: 0.001,
            omega_c: 10.0,
            t_q: 0.05,
            t_c: 0.05,
        }
    }
}

/// Ohmic spectral function `παω e^{-ω/ω_c}` for `ω ≥ 0`.
pub fn ohmic_gamma(omega: f64, bath: &BathParams) -> f64 {
    std::f64::consts::PI * bath.alpha * omega * (-omega / bath.omega_c).exp()
}

/// Bose-Einstein occupation `1/(e^{ω/T} - 1)`; exactly zero at `T = 0` and
/// for `ω/T > 700`.
pub fn bose_occupation(omega: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    let x = omega / temperature;
    if x > 700.0 {
        return 0.0;
    }
    1.0 / x.exp_m1()
}

/// Absorption and emission rates per unit `|S|²` across a gap.
///
/// Returns `(up, down) = (γ n, γ (1 + n))`, with the finite `Δ → 0` limit
/// `γ n → παT` taken explicitly.
pub fn pair_rates(gap: f64, temperature: f64, bath: &BathParams) -> (f64, f64) {
    let gap = gap.max(0.0);
    let pa = std::f64::consts::PI * bath.alpha;
    let cutoff = (-gap / bath.omega_c).exp();
    let up = if temperature <= 0.0 {
        0.0
    } else {
        let x = gap / temperature;
        if x > 700.0 {
            0.0
        } else if x == 0.0 {
            pa * temperature
        } else {
            pa * cutoff * temperature * (x / x.exp_m1())
        }
    };
    (up, up + pa * gap * cutoff)
}

/// Population generator over the lowest `k_levels` eigenstates.
#[derive(Debug, Clone)]
pub struct RateMatrix {
    /// `rates[(n, k)]` is the transition rate `k → n`; zero diagonal.
    pub rates: Mat<f64>,
    /// `dP/dt = W P` with `W_nk = rates_nk`, `W_kk = -Σ_n rates_nk`.
    pub generator: Mat<f64>,
    /// Escape rate of the top kept level out of the kept subspace relative
    /// to its escape rate into it, when the tables extend beyond it.
    pub leak_ratio: Option<f64>,
}

impl RateMatrix {
    pub fn len(&self) -> usize {
        self.rates.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `max |W P|`.
    pub fn residual(&self, populations: &[f64]) -> f64 {
        let n = self.len();
        (0..n)
            .map(|r| {
                (0..n)
                    .map(|c| self.generator[(r, c)] * populations[c])
                    .sum::<f64>()
                    .abs()
            })
            .fold(0.0, f64::max)
    }
}

fn transition_rates(tables: &TransitionTables, baths: &BathParams, levels: usize) -> Mat<f64> {
    let mut rates = Mat::<f64>::zeros(levels, levels);
    for k in 0..levels {
        for j in 0..k {
            let gap = tables.gap(k, j);
            let (up_q, down_q) = pair_rates(gap, baths.t_q, baths);
            let (up_c, down_c) = pair_rates(gap, baths.t_c, baths);
            let sq = tables.s_q[(j, k)].powi(2);
            let sc = tables.x[(j, k)].powi(2);
            rates[(j, k)] = sq * down_q + sc * down_c;
            rates[(k, j)] = sq * up_q + sc * up_c;
        }
    }
    rates
}

/// Builds the generator over the lowest `k_levels` states of `tables`.
pub fn build_rate_matrix(
    tables: &TransitionTables,
    baths: &BathParams,
    k_levels: usize,
) -> Result<RateMatrix> {
    baths.validate()?;
    if k_levels == 0 || k_levels > tables.len() {
        return Err(Error::invalid(
            "k_levels",
            format!("must be in 1..={}, got {k_levels}", tables.len()),
        ));
    }
    let leak_ratio = (tables.len() > k_levels).then(|| {
        let all = transition_rates(tables, baths, tables.len());
        let top = k_levels - 1;
        let inside: f64 = (0..k_levels).map(|n| all[(n, top)]).sum();
        let outside: f64 = (k_levels..tables.len()).map(|n| all[(n, top)]).sum();
        if inside > 0.0 {
            outside / inside
        } else if outside > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    });
    if let Some(r) = leak_ratio {
        if r > 1.0 {
            log::warn!(
                "level {} escapes mostly out of the kept subspace (out/in = {r:.3e}); raise k_levels",
                k_levels - 1
            );
        }
    }
    let rates = transition_rates(tables, baths, k_levels);
    let mut generator = rates.clone();
    for k in 0..k_levels {
        let out: f64 = (0..k_levels)
            .filter(|&n| n != k)
            .map(|n| rates[(n, k)])
            .sum();
        generator[(k, k)] = -out;
    }
    Ok(RateMatrix {
        rates,
        generator,
        leak_ratio,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    RateSolve,
    Gibbs,
}

/// Diagonal steady state over energy-ordered eigenstates.
#[derive(Debug, Clone)]
pub struct SteadyState {
    pub populations: Vec<f64>,
    pub provenance: Provenance,
}

impl SteadyState {
    pub fn len(&self) -> usize {
        self.populations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.populations.is_empty()
    }
}

/// Closed communicating classes of the transition graph (`rates > 0`).
fn closed_classes(rates: &Mat<f64>) -> Vec<Vec<usize>> {
    let n = rates.nrows();
    // reach[i][j]: j reachable from i
    let mut reach = vec![vec![false; n]; n];
    for (i, row) in reach.iter_mut().enumerate() {
        row[i] = true;
        let mut stack = vec![i];
        while let Some(s) = stack.pop() {
            for t in 0..n {
                if !row[t] && rates[(t, s)] > 0.0 {
                    row[t] = true;
                    stack.push(t);
                }
            }
        }
    }
    let mut assigned = vec![false; n];
    let mut classes = Vec::new();
    for i in 0..n {
        if assigned[i] {
            continue;
        }
        let class: Vec<usize> = (0..n).filter(|&j| reach[i][j] && reach[j][i]).collect();
        class.iter().for_each(|&j| assigned[j] = true);
        let closed = (0..n).all(|j| !reach[i][j] || reach[j][i]);
        if closed {
            classes.push(class);
        }
    }
    classes
}

/// Stationary populations `W P = 0`, `Σ P = 1`.
pub fn solve_steady_state(rates: &RateMatrix) -> Result<SteadyState> {
    let n = rates.len();
    if n == 0 {
        return Err(Error::invalid("k_levels", "empty rate matrix"));
    }
    let classes = closed_classes(&rates.rates);
    if classes.len() != 1 {
        return Err(Error::DisconnectedRateGraph {
            components: classes,
        });
    }

    // GTH on q[i][j] = rate i → j
    let mut q: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| rates.rates[(j, i)]).collect())
        .collect();
    let mut out_rate = vec![0.0; n];
    for s in (1..n).rev() {
        let total: f64 = q[s][..s].iter().sum();
        out_rate[s] = total;
        if total <= 0.0 {
            // s cannot reach any lower state in the censored chain; the
            // closed class then lies above s and nothing below is recurrent
            return Err(Error::DisconnectedRateGraph {
                components: classes,
            });
        }
        for i in 0..s {
            let f = q[i][s] / total;
            if f == 0.0 {
                continue;
            }
            for j in 0..s {
                q[i][j] += f * q[s][j];
            }
        }
    }
    let mut p = vec![0.0; n];
    p[0] = 1.0;
    for s in 1..n {
        let inflow: f64 = (0..s).map(|i| p[i] * q[i][s]).sum();
        p[s] = inflow / out_rate[s];
    }
    let z: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= z);
    Ok(SteadyState {
        populations: p,
        provenance: Provenance::RateSolve,
    })
}

/// Thermal populations `e^{-E_k/T}/Z` (energies need not start at zero).
/// At `T = 0` the ground level, or levels within 1e-9 of it, share weight
/// equally.
pub fn gibbs_populations(energies: &[f64], temperature: f64) -> Result<SteadyState> {
    if energies.is_empty() {
        return Err(Error::invalid("energies", "empty spectrum"));
    }
    if !(temperature.is_finite() && temperature >= 0.0) {
        return Err(Error::invalid(
            "temperature",
            format!("must be non-negative, got {temperature}"),
        ));
    }
    let e0 = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let mut p: Vec<f64> = if temperature == 0.0 {
        energies
            .iter()
            .map(|&e| if e - e0 <= 1e-9 { 1.0 } else { 0.0 })
            .collect()
    } else {
        energies
            .iter()
            .map(|&e| (-(e - e0) / temperature).exp())
            .collect()
    };
    let z: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= z);
    Ok(SteadyState {
        populations: p,
        provenance: Provenance::Gibbs,
    })
}

/// Gibbs weight below which a level is considered unpopulated when choosing
/// the initial number of kept levels.
pub const LEVEL_WEIGHT_CUTOFF: f64 = 1e-12;
/// Fewest levels ever kept.
pub const MIN_LEVELS: usize = 12;

/// Smallest `M ≥ 12` such that level `M` has Gibbs weight (relative to the
/// ground state) below 1e-12 at `temperature`, capped at the spectrum size.
pub fn select_k_levels(energies: &[f64], temperature: f64) -> usize {
    let avail = energies.len();
    if avail == 0 {
        return 0;
    }
    let e0 = energies[0];
    let threshold = -LEVEL_WEIGHT_CUTOFF.ln() * temperature;
    let m = energies
        .iter()
        .position(|&e| e - e0 > threshold)
        .unwrap_or(avail);
    m.max(MIN_LEVELS).min(avail)
}

/// Relaxes `dP/dt = W P` from `initial` with implicit Euler steps whose
/// length doubles from `first_step`.
pub fn relax_populations(
    rates: &RateMatrix,
    initial: &[f64],
    first_step: f64,
    steps: usize,
) -> Vec<f64> {
    use faer::linalg::solvers::Solve;

    let n = rates.len();
    let mut p = Mat::from_fn(n, 1, |r, _| initial[r]);
    let mut h = first_step;
    for _ in 0..steps {
        let a = Mat::from_fn(n, n, |r, c| {
            let id = if r == c { 1.0 } else { 0.0 };
            id - h * rates.generator[(r, c)]
        });
        p = a.partial_piv_lu().solve(&p);
        let z: f64 = (0..n).map(|r| p[(r, 0)]).sum();
        for r in 0..n {
            p[(r, 0)] /= z;
        }
        h *= 2.0;
    }
    (0..n).map(|r| p[(r, 0)]).collect()
}
