//! One parameter point end to end: spectrum, tables, steady state, G².

use crate::correlators::{g2_generalized, CorrelationResult};
use crate::dissipation::{
    bose_occupation, build_rate_matrix, gibbs_populations, select_k_levels, solve_steady_state,
    BathParams, RateMatrix, SteadyState,
};
use crate::ecs::EcsEigensystem;
use crate::error::{Error, Result};
use crate::model::DickeParams;
use crate::operators::{xplus_matrix, TransitionTables};

/// How many eigenstates enter the rate equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelPolicy {
    /// Gibbs-weight rule, then grown by 25% until populations settle.
    Auto,
    Fixed(usize),
}

/// Growth step of the automatic level count.
pub const LEVEL_GROWTH: f64 = 1.25;
/// Largest population change tolerated when the level count grows.
pub const POPULATION_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub n_tr: usize,
    pub k_levels: LevelPolicy,
    /// Eigenstates retained from the diagonalization.
    pub max_levels: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            n_tr: 50,
            k_levels: LevelPolicy::Auto,
            max_levels: 400,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        if self.n_tr == 0 {
            return Err(Error::invalid("n_tr", "must be at least 1"));
        }
        if self.max_levels < 2 {
            return Err(Error::invalid("max_levels", "must be at least 2"));
        }
        if let LevelPolicy::Fixed(k) = self.k_levels {
            if k < 2 || k > self.max_levels {
                return Err(Error::invalid(
                    "k_levels",
                    format!("must be in 2..={}, got {k}", self.max_levels),
                ));
            }
        }
        Ok(())
    }

    pub fn solve(&self, params: &DickeParams) -> Result<EcsEigensystem> {
        self.validate()?;
        EcsEigensystem::solve(params, self.n_tr, Some(self.max_levels))
    }
}

/// Everything computed at one point.
#[derive(Debug, Clone)]
pub struct PointResult {
    pub tables: TransitionTables,
    pub rates: RateMatrix,
    pub state: SteadyState,
    pub correlation: CorrelationResult,
    pub k_levels: usize,
}

impl PointResult {
    pub fn energies(&self) -> &[f64] {
        &self.tables.energies
    }

    pub fn parities(&self) -> &[i8] {
        &self.tables.parities
    }
}

fn steady_over(
    tables: &TransitionTables,
    baths: &BathParams,
    k: usize,
) -> Result<(RateMatrix, SteadyState)> {
    let rates = build_rate_matrix(tables, baths, k)?;
    let state = solve_steady_state(&rates)?;
    Ok((rates, state))
}

fn grown(k: usize) -> usize {
    ((k as f64 * LEVEL_GROWTH).ceil() as usize).max(k + 1)
}

/// Runs the rate equation and correlators on a solved spectrum.
pub fn evaluate(
    system: &EcsEigensystem,
    baths: &BathParams,
    settings: &SolverSettings,
) -> Result<PointResult> {
    evaluate_with(
        |levels| TransitionTables::from_ecs(system, levels),
        system.energies(),
        system.dim(),
        system.params().omega,
        baths,
        settings.k_levels,
    )
}

/// The level-count loop over any source of transition tables; `make(m)`
/// must return tables over the lowest `m` of the `energies`.
pub fn evaluate_with(
    make: impl Fn(usize) -> TransitionTables,
    energies: &[f64],
    dim: usize,
    omega: f64,
    baths: &BathParams,
    policy: LevelPolicy,
) -> Result<PointResult> {
    baths.validate()?;
    let avail = energies.len();
    let (k, tables_len) = match policy {
        LevelPolicy::Fixed(k) => {
            if k > avail {
                return Err(Error::invalid(
                    "k_levels",
                    format!("{k} requested but only {avail} eigenstates retained"),
                ));
            }
            (k, grown(k).min(avail))
        }
        LevelPolicy::Auto => {
            let k = select_k_levels(energies, baths.max_temperature());
            (k, grown(grown(k)).min(avail))
        }
    };
    let mut tables = make(tables_len);
    let (mut k, (mut rates, mut state)) = (k, steady_over(&tables, baths, k)?);

    if policy == LevelPolicy::Auto {
        loop {
            let next = grown(k).min(avail);
            if next == k {
                break;
            }
            if next > tables.len() {
                tables = make(grown(next).min(avail));
            }
            let (r2, s2) = steady_over(&tables, baths, next)?;
            let change = state
                .populations
                .iter()
                .zip(&s2.populations)
                .map(|(a, b)| (a - b).abs())
                .chain(s2.populations[k..].iter().map(|b| b.abs()))
                .fold(0.0, f64::max);
            k = next;
            rates = r2;
            state = s2;
            if change < POPULATION_TOLERANCE {
                break;
            }
        }
        if k == avail && avail < dim {
            log::warn!(
                "automatic level count reached the {avail} retained eigenstates; raise max_levels"
            );
        }
    }

    let tables = tables.truncated(k);
    let xplus = xplus_matrix(&tables);
    let n_c = bose_occupation(omega, baths.t_c);
    let correlation = g2_generalized(&xplus, &state, n_c)?;
    Ok(PointResult {
        tables,
        rates,
        state,
        correlation,
        k_levels: k,
    })
}

/// Same as [`evaluate`] but with Gibbs populations at `temperature` instead
/// of the rate-equation steady state.
pub fn evaluate_gibbs(
    system: &EcsEigensystem,
    temperature: f64,
    k_levels: usize,
) -> Result<CorrelationResult> {
    let k = k_levels.min(system.levels());
    let tables = TransitionTables::from_ecs(system, k);
    let state = gibbs_populations(&tables.energies, temperature)?;
    let n_c = bose_occupation(system.params().omega, temperature);
    g2_generalized(&xplus_matrix(&tables), &state, n_c)
}

/// Solves and evaluates one point.
pub fn run_point(
    params: &DickeParams,
    baths: &BathParams,
    settings: &SolverSettings,
) -> Result<PointResult> {
    let system = settings.solve(params)?;
    evaluate(&system, baths, settings)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings(n_tr: usize) -> SolverSettings {
        SolverSettings {
            n_tr,
            k_levels: LevelPolicy::Auto,
            max_levels: 200,
        }
    }

    #[test]
    fn equal_temperatures_match_gibbs() {
        let p = DickeParams::new(4, 1.0, 1.0, 0.6).unwrap();
        let b = BathParams::new(0.001, 10.0, 0.2, 0.2).unwrap();
        let s = settings(30);
        let sys = s.solve(&p).unwrap();
        let r = evaluate(&sys, &b, &s).unwrap();
        let g = gibbs_populations(&r.tables.energies, 0.2).unwrap();
        for (a, b) in r.state.populations.iter().zip(&g.populations) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn growing_levels_does_not_move_g2() {
        let p = DickeParams::new(8, 1.0, 1.0, 0.45).unwrap();
        let b = BathParams::default();
        let s = settings(30);
        let sys = s.solve(&p).unwrap();
        let auto = evaluate(&sys, &b, &s).unwrap();
        let fixed = SolverSettings {
            k_levels: LevelPolicy::Fixed(grown(auto.k_levels).min(200)),
            ..s
        };
        let more = evaluate(&sys, &b, &fixed).unwrap();
        let rel = (auto.correlation.g2 - more.correlation.g2).abs() / more.correlation.g2;
        assert!(rel < 1e-6, "{rel}");
    }

    #[test]
    fn settings_validation() {
        assert!(SolverSettings {
            n_tr: 0,
            ..SolverSettings::default()
        }
        .validate()
        .is_err());
        assert!(SolverSettings {
            k_levels: LevelPolicy::Fixed(1000),
            ..SolverSettings::default()
        }
        .validate()
        .is_err());
    }
}
