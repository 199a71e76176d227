//! Brute-force reference: `H_D` in a large plain Fock ⊗ spin basis.
//!
//! Nothing here touches displaced states; every operator is the textbook
//! ladder-operator matrix.

use faer::Mat;

use crate::dissipation::BathParams;
use crate::ecs::PhotonMoments;
use crate::error::{Error, Result};
use crate::linalg::{check_dimension, eigh, fix_sign};
use crate::model::{original_entry, original_parity, DickeParams, ProductBasisIndex};
use crate::operators::{TransitionTables, TAIL_WEIGHT_LIMIT};
use crate::pipeline::{evaluate_with, LevelPolicy, PointResult};

/// Ground-state Fock weight above `N_F - 10` that triggers a warning.
pub const ORACLE_TAIL_LIMIT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub fock_cutoff: usize,
    /// Eigenstates retained.
    pub levels: usize,
    pub energy_tolerance: f64,
    pub element_tolerance: f64,
    pub population_tolerance: f64,
    pub g2_tolerance: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            fock_cutoff: 150,
            levels: 200,
            energy_tolerance: 1e-8,
            element_tolerance: 1e-7,
            population_tolerance: 1e-8,
            g2_tolerance: 1e-6,
        }
    }
}

/// Smallest cutoff considered safe: `5 g_max² + 20` with `g_max = λ√N/ω`.
pub fn minimum_fock_cutoff(params: &DickeParams) -> usize {
    let g_max = params.lambda * (params.n_qubits as f64).sqrt() / params.omega;
    (5.0 * g_max * g_max + 20.0).ceil() as usize
}

impl OracleConfig {
    pub fn validate(&self, params: &DickeParams) -> Result<()> {
        let need = minimum_fock_cutoff(params);
        if self.fock_cutoff <= need {
            return Err(Error::invalid(
                "fock_cutoff",
                format!(
                    "{} is too small for λ = {}, N = {}; need more than {need}",
                    self.fock_cutoff, params.lambda, params.n_qubits
                ),
            ));
        }
        if self.levels < 2 {
            return Err(Error::invalid("levels", "must be at least 2"));
        }
        Ok(())
    }
}

/// Eigenstates of `H_D` in the plain basis.
#[derive(Debug, Clone)]
pub struct OracleSpectrum {
    pub params: DickeParams,
    pub basis: ProductBasisIndex,
    pub energies: Vec<f64>,
    pub parities: Vec<i8>,
    /// Column `k` is eigenstate `k` over flat `(m, n)` indices.
    pub vectors: Mat<f64>,
}

pub fn oracle_spectrum(params: &DickeParams, config: &OracleConfig) -> Result<OracleSpectrum> {
    config.validate(params)?;
    let basis = ProductBasisIndex::new(params.n_qubits, config.fock_cutoff);
    let dim = basis.dim();
    check_dimension(dim)?;
    let spin = params.spin_basis();

    let mut found: Vec<(f64, i8, usize, usize)> = Vec::with_capacity(dim);
    let mut blocks = Vec::with_capacity(2);
    for (b, parity) in [1i8, -1].into_iter().enumerate() {
        let members: Vec<usize> = (0..dim)
            .filter(|&x| {
                let (mi, l) = basis.split(x);
                original_parity(mi, l) == parity
            })
            .collect();
        let nb = members.len();
        let h = Mat::from_fn(nb, nb, |r, c| {
            original_entry(params, &spin, &basis, members[r], members[c])
        });
        let spec = eigh(&h)?;
        found.extend(
            spec.values
                .iter()
                .enumerate()
                .map(|(i, &e)| (e, parity, b, i)),
        );
        blocks.push((members, spec));
    }
    found.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
    found.truncate(config.levels.min(dim));

    let mut vectors = Mat::<f64>::zeros(dim, found.len());
    let mut col = vec![0.0; dim];
    for (k, &(_, _, b, i)) in found.iter().enumerate() {
        col.iter_mut().for_each(|x| *x = 0.0);
        let (members, spec) = &blocks[b];
        for (a, &x) in members.iter().enumerate() {
            col[x] = spec.vectors[(a, i)];
        }
        fix_sign(&mut col);
        for (r, &x) in col.iter().enumerate() {
            vectors[(r, k)] = x;
        }
    }
    let out = OracleSpectrum {
        params: *params,
        basis,
        energies: found.iter().map(|f| f.0).collect(),
        parities: found.iter().map(|f| f.1).collect(),
        vectors,
    };
    let tail = out.tail_weight(0, config.fock_cutoff.saturating_sub(10));
    if tail > ORACLE_TAIL_LIMIT {
        log::warn!(
            "oracle ground state has weight {tail:e} above n = {}; raise the Fock cutoff",
            config.fock_cutoff.saturating_sub(10)
        );
    }
    Ok(out)
}

impl OracleSpectrum {
    pub fn levels(&self) -> usize {
        self.energies.len()
    }

    /// Weight of eigenstate `k` on photon numbers strictly above `above`.
    pub fn tail_weight(&self, k: usize, above: usize) -> f64 {
        (0..self.basis.dim())
            .filter(|&x| self.basis.split(x).1 > above)
            .map(|x| self.vectors[(x, k)].powi(2))
            .sum()
    }

    fn apply(&self, k: usize, f: impl Fn(usize, usize, f64, &mut [f64])) -> Vec<f64> {
        let mut out = vec![0.0; self.basis.dim()];
        for x in 0..self.basis.dim() {
            let v = self.vectors[(x, k)];
            if v != 0.0 {
                let (mi, l) = self.basis.split(x);
                f(mi, l, v, &mut out);
            }
        }
        out
    }

    fn elements(
        &self,
        levels: usize,
        f: impl Fn(usize, usize, f64, &mut [f64]) + Copy,
    ) -> Mat<f64> {
        let dim = self.basis.dim();
        let mut applied = Mat::<f64>::zeros(dim, levels);
        for k in 0..levels {
            for (r, v) in self.apply(k, f).into_iter().enumerate() {
                applied[(r, k)] = v;
            }
        }
        let c = self.vectors.as_ref().submatrix(0, 0, dim, levels);
        let mut m = c.transpose() * &applied;
        for j in 0..levels {
            for k in (j + 1)..levels {
                let v = 0.5 * (m[(j, k)] + m[(k, j)]);
                m[(j, k)] = v;
                m[(k, j)] = v;
            }
        }
        m
    }

    /// `⟨φ_j|(a + a†)|φ_k⟩`.
    pub fn quadrature_elements(&self, levels: usize) -> Mat<f64> {
        let basis = self.basis;
        let top = basis.boson_dim() - 1;
        self.elements(levels, move |mi, l, v, out| {
            if l > 0 {
                out[basis.index(mi, l - 1)] += (l as f64).sqrt() * v;
            }
            if l < top {
                out[basis.index(mi, l + 1)] += ((l + 1) as f64).sqrt() * v;
            }
        })
    }

    /// `⟨φ_j|(J+ + J-)|φ_k⟩/√N`.
    pub fn qubit_coupling_elements(&self, levels: usize) -> Mat<f64> {
        let basis = self.basis;
        let spin = &self.params.spin_basis();
        let norm = (self.params.n_qubits as f64).sqrt();
        let top = spin.len() - 1;
        self.elements(levels, move |mi, l, v, out| {
            if mi < top {
                out[basis.index(mi + 1, l)] += spin.raising(mi) * v / norm;
            }
            if mi > 0 {
                out[basis.index(mi - 1, l)] += spin.lowering(mi) * v / norm;
            }
        })
    }

    pub fn photon_moments(&self, k: usize) -> PhotonMoments {
        let mut pm = PhotonMoments { n1: 0.0, n2: 0.0 };
        for x in 0..self.basis.dim() {
            let w = self.vectors[(x, k)].powi(2);
            let l = self.basis.split(x).1 as f64;
            pm.n1 += l * w;
            pm.n2 += l * (l - 1.0) * w;
        }
        pm
    }

    pub fn tables(&self, levels: usize) -> TransitionTables {
        let levels = levels.min(self.levels());
        let near_top = self.basis.boson_dim().saturating_sub(11);
        TransitionTables {
            energies: self.energies[..levels].to_vec(),
            parities: self.parities[..levels].to_vec(),
            x: self.quadrature_elements(levels),
            s_q: self.qubit_coupling_elements(levels),
            photons: (0..levels).map(|k| self.photon_moments(k)).collect(),
            untrusted: (0..levels)
                .filter(|&k| self.tail_weight(k, near_top) > TAIL_WEIGHT_LIMIT)
                .collect(),
        }
    }
}

/// End-to-end G² computed from the plain-basis spectrum.
pub fn oracle_point(
    params: &DickeParams,
    baths: &BathParams,
    config: &OracleConfig,
    policy: LevelPolicy,
) -> Result<PointResult> {
    let spec = oracle_spectrum(params, config)?;
    evaluate_with(
        |m| spec.tables(m),
        &spec.energies,
        spec.basis.dim(),
        params.omega,
        baths,
        policy,
    )
}

pub fn oracle_g2(params: &DickeParams, baths: &BathParams, config: &OracleConfig) -> Result<f64> {
    Ok(oracle_point(params, baths, config, LevelPolicy::Auto)?
        .correlation
        .g2)
}
