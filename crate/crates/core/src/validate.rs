//! Oracle versus ECS comparison suite.

use rayon::prelude::*;

use crate::dissipation::BathParams;
use crate::error::Result;
use crate::io::{Table, Value};
use crate::model::DickeParams;
use crate::operators::{
    photon_quadrature_elements as quadrature_elements, qubit_coupling_elements,
};
use crate::oracle::{oracle_spectrum, OracleConfig, OracleSpectrum};
use crate::pipeline::{evaluate, evaluate_with, LevelPolicy, SolverSettings};

/// Levels compared for energies and matrix elements.
pub const COMPARED_LEVELS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub n_qubits: usize,
    pub lambda: f64,
    pub quantity: &'static str,
    /// Worst deviation found (relative for energies and g2, absolute otherwise).
    pub deviation: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.deviation <= self.tolerance
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(
            [
                "n",
                "lambda",
                "quantity",
                "deviation",
                "tolerance",
                "status",
            ]
            .map(String::from)
            .to_vec(),
        );
        for c in &self.checks {
            t.push(vec![
                Value::Int(c.n_qubits as i64),
                Value::Float(c.lambda),
                Value::Text(c.quantity.into()),
                Value::Float(c.deviation),
                Value::Float(c.tolerance),
                Value::Text(if c.passed() { "pass" } else { "FAIL" }.into()),
            ]);
        }
        t
    }
}

pub const VALIDATION_QUBITS: [usize; 4] = [1, 2, 4, 8];
pub const VALIDATION_COUPLINGS: [f64; 6] = [0.1, 0.3, 0.5, 0.7, 0.9, 1.1];

/// Pairs ECS level `k` with the oracle level of equal parity and equal rank
/// within that parity, which is robust to near-degenerate doublets swapping.
fn match_levels(ecs: &[i8], oracle: &[i8], count: usize) -> Vec<Option<usize>> {
    let rank = |ps: &[i8], k: usize| ps[..k].iter().filter(|&&p| p == ps[k]).count();
    (0..count)
        .map(|k| {
            let r = rank(ecs, k);
            (0..oracle.len()).find(|&o| oracle[o] == ecs[k] && rank(oracle, o) == r)
        })
        .collect()
}

fn compare_point(
    params: &DickeParams,
    baths: &BathParams,
    settings: &SolverSettings,
    oracle: &OracleConfig,
) -> Result<Vec<Check>> {
    let spec: OracleSpectrum = oracle_spectrum(params, oracle)?;
    let system = settings.solve(params)?;
    let levels = COMPARED_LEVELS.min(system.levels()).min(spec.levels());
    let (n, lambda) = (params.n_qubits, params.lambda);
    let check = |quantity, deviation, tolerance| Check {
        n_qubits: n,
        lambda,
        quantity,
        deviation,
        tolerance,
    };
    let mut out = Vec::new();

    let de = (0..levels)
        .map(|k| (system.energies()[k] - spec.energies[k]).abs() / spec.energies[k].abs().max(1.0))
        .fold(0.0, f64::max);
    out.push(check("energies", de, oracle.energy_tolerance));

    let map = match_levels(system.parities(), &spec.parities, levels);
    let parity_ok = map.iter().all(Option::is_some);
    out.push(check(
        "parity labels",
        if parity_ok { 0.0 } else { 1.0 },
        0.0,
    ));

    let main = evaluate(&system, baths, settings)?;
    let reference = evaluate_with(
        |m| spec.tables(m),
        &spec.energies,
        spec.basis.dim(),
        params.omega,
        baths,
        LevelPolicy::Fixed(main.k_levels.min(spec.levels())),
    )?;

    if parity_ok {
        let ecs_x = quadrature_elements(&system, levels);
        let ecs_s = qubit_coupling_elements(&system, levels);
        let span = map.iter().flatten().max().map_or(0, |m| m + 1);
        let ox = spec.quadrature_elements(span);
        let os = spec.qubit_coupling_elements(span);
        let worst = |a: &faer::Mat<f64>, b: &faer::Mat<f64>| {
            let mut d: f64 = 0.0;
            for j in 0..levels {
                for k in 0..levels {
                    let (oj, ok) = (map[j].unwrap(), map[k].unwrap());
                    d = d.max((a[(j, k)].abs() - b[(oj, ok)].abs()).abs());
                }
            }
            d
        };
        out.push(check(
            "|X_jk|",
            worst(&ecs_x, &ox),
            oracle.element_tolerance,
        ));
        out.push(check(
            "|S_q^jk|",
            worst(&ecs_s, &os),
            oracle.element_tolerance,
        ));
    }

    let dp = main
        .state
        .populations
        .iter()
        .zip(&reference.state.populations)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    out.push(check("populations", dp, oracle.population_tolerance));

    let g = &reference.correlation.g2;
    let dg = (main.correlation.g2 - g).abs() / g.abs();
    out.push(check("g2", dg, oracle.g2_tolerance));
    Ok(out)
}

/// Runs every `(N, λ)` fixture with `N ≤ max_n`.
pub fn run_validation(
    max_n: usize,
    baths: &BathParams,
    settings: &SolverSettings,
    oracle: &OracleConfig,
) -> ValidationReport {
    let jobs: Vec<(usize, f64)> = VALIDATION_QUBITS
        .iter()
        .filter(|&&n| n <= max_n)
        .flat_map(|&n| VALIDATION_COUPLINGS.iter().map(move |&l| (n, l)))
        .collect();
    let checks = jobs
        .par_iter()
        .map(|&(n, lambda)| {
            let p = DickeParams {
                n_qubits: n,
                lambda,
                ..DickeParams::default()
            };
            compare_point(&p, baths, settings, oracle).unwrap_or_else(|e| {
                log::error!("N = {n}, λ = {lambda}: {e}");
                vec![Check {
                    n_qubits: n,
                    lambda,
                    quantity: "computation",
                    deviation: f64::INFINITY,
                    tolerance: 0.0,
                }]
            })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    ValidationReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_matching_handles_swapped_doublets() {
        let ecs = [1, -1, 1, -1];
        let oracle = [-1, 1, 1, -1];
        assert_eq!(
            match_levels(&ecs, &oracle, 4),
            vec![Some(1), Some(0), Some(2), Some(3)]
        );
        assert_eq!(match_levels(&[1, 1], &[1, -1], 2), vec![Some(0), None]);
    }

    #[test]
    fn rabi_point_passes() {
        let p = DickeParams::new(1, 1.0, 1.0, 0.5).unwrap();
        let s = SolverSettings {
            n_tr: 40,
            max_levels: 60,
            ..SolverSettings::default()
        };
        let o = OracleConfig {
            fock_cutoff: 80,
            levels: 60,
            ..OracleConfig::default()
        };
        let checks = compare_point(&p, &BathParams::default(), &s, &o).unwrap();
        for c in &checks {
            assert!(c.passed(), "{c:?}");
        }
    }
}
