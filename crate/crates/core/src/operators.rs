//! Eigenbasis matrix elements of the bath-coupling and detection operators.

use faer::Mat;

use crate::ecs::{EcsEigensystem, PhotonMoments};

/// Elements whose eigenstates have more than this weight on the last boson
/// level are flagged as truncation-limited.
pub const TAIL_WEIGHT_LIMIT: f64 = 1e-8;

/// Matrix elements over the lowest `len()` eigenstates, energy ordered.
///
/// `x` is `⟨φ_j|(a† + a)|φ_k⟩`, which is also the cavity-bath coupling
/// element; `s_q` is `⟨φ_j|(J+ + J-)|φ_k⟩/√N` of the qubit bath.
#[derive(Debug, Clone)]
pub struct TransitionTables {
    pub energies: Vec<f64>,
    pub parities: Vec<i8>,
    pub x: Mat<f64>,
    pub s_q: Mat<f64>,
    /// Per-state photon moments, used by the standard correlator.
    pub photons: Vec<PhotonMoments>,
    /// States whose elements are limited by the boson truncation.
    pub untrusted: Vec<usize>,
}

impl TransitionTables {
    pub fn from_ecs(system: &EcsEigensystem, levels: usize) -> Self {
        let levels = levels.min(system.levels());
        let x = photon_quadrature_elements(system, levels);
        let s_q = qubit_coupling_elements(system, levels);
        let photons = (0..levels).map(|k| system.photon_moments(k)).collect();
        let untrusted: Vec<usize> = (0..levels)
            .filter(|&k| system.boson_tail_weight(k) > TAIL_WEIGHT_LIMIT)
            .collect();
        if !untrusted.is_empty() {
            log::warn!(
                "{} of {} kept eigenstates have boson weight above {:e} at l = n_tr = {}; raise n_tr",
                untrusted.len(),
                levels,
                TAIL_WEIGHT_LIMIT,
                system.n_tr()
            );
        }
        TransitionTables {
            energies: system.energies()[..levels].to_vec(),
            parities: system.parities()[..levels].to_vec(),
            x,
            s_q,
            photons,
            untrusted,
        }
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// `Δ_kj = E_k - E_j`.
    pub fn gap(&self, k: usize, j: usize) -> f64 {
        self.energies[k] - self.energies[j]
    }

    /// The same tables restricted to the lowest `levels` states.
    pub fn truncated(&self, levels: usize) -> Self {
        let m = levels.min(self.len());
        TransitionTables {
            energies: self.energies[..m].to_vec(),
            parities: self.parities[..m].to_vec(),
            x: self.x.as_ref().submatrix(0, 0, m, m).to_owned(),
            s_q: self.s_q.as_ref().submatrix(0, 0, m, m).to_owned(),
            photons: self.photons[..m].to_vec(),
            untrusted: self.untrusted.iter().copied().filter(|&k| k < m).collect(),
        }
    }
}

fn sandwich(system: &EcsEigensystem, levels: usize, op: impl Fn(&[f64]) -> Vec<f64>) -> Mat<f64> {
    let dim = system.dim();
    let c = system.coefficients().as_ref().submatrix(0, 0, dim, levels);
    let mut applied = Mat::<f64>::zeros(dim, levels);
    for k in 0..levels {
        let out = op(&system.vector(k));
        for (r, v) in out.into_iter().enumerate() {
            applied[(r, k)] = v;
        }
    }
    let mut m = c.transpose() * &applied;
    // symmetrize away rounding
    for j in 0..levels {
        for k in (j + 1)..levels {
            let v = 0.5 * (m[(j, k)] + m[(k, j)]);
            m[(j, k)] = v;
            m[(k, j)] = v;
        }
    }
    m
}

/// `X_jk = ⟨φ_j|(a† + a)|φ_k⟩` with `a = A_m - g_m` in every projection block.
pub fn photon_quadrature_elements(system: &EcsEigensystem, levels: usize) -> Mat<f64> {
    sandwich(system, levels, |v| system.apply_quadrature(v))
}

/// `S_q^{jk}`: in the rotated frame `(J+ + J-)/√N` is `2Jz/√N`, diagonal in `m`.
pub fn qubit_coupling_elements(system: &EcsEigensystem, levels: usize) -> Mat<f64> {
    sandwich(system, levels, |v| system.apply_qubit_coupling(v))
}

/// `⟨φ_j|a|φ_k⟩` over the lowest `levels` states.
pub fn annihilation_elements(system: &EcsEigensystem, levels: usize) -> Mat<f64> {
    let dim = system.dim();
    let c = system.coefficients().as_ref().submatrix(0, 0, dim, levels);
    let mut applied = Mat::<f64>::zeros(dim, levels);
    for k in 0..levels {
        for (r, v) in system
            .apply_annihilation(&system.vector(k))
            .into_iter()
            .enumerate()
        {
            applied[(r, k)] = v;
        }
    }
    c.transpose() * &applied
}

/// Generalized emission operator `X+ = -i Σ_{k>j} Δ_kj X_jk |φ_j⟩⟨φ_k|`.
///
/// Stored as the real matrix `Y` with `X+ = -i Y`; `Y` is strictly upper
/// triangular in energy order. Only products `X-X+` and `(X-)²(X+)²` are
/// ever formed, where the phase cancels.
#[derive(Debug, Clone)]
pub struct XPlusMatrix {
    pub weights: Mat<f64>,
}

impl XPlusMatrix {
    pub fn len(&self) -> usize {
        self.weights.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `Y²`, the real part of `-(X+)²`.
    pub fn squared(&self) -> Mat<f64> {
        &self.weights * &self.weights
    }

    /// `‖X+ |φ_k⟩‖²` for every `k`.
    pub fn emission_norms(&self) -> Vec<f64> {
        column_norms_sq(&self.weights)
    }

    /// `‖(X+)² |φ_k⟩‖²` for every `k`.
    pub fn two_photon_norms(&self) -> Vec<f64> {
        column_norms_sq(&self.squared())
    }
}

fn column_norms_sq(m: &Mat<f64>) -> Vec<f64> {
    (0..m.ncols())
        .map(|k| (0..m.nrows()).map(|j| m[(j, k)] * m[(j, k)]).sum())
        .collect()
}

pub fn xplus_matrix(tables: &TransitionTables) -> XPlusMatrix {
    let m = tables.len();
    let weights = Mat::from_fn(m, m, |j, k| {
        if k > j {
            tables.gap(k, j) * tables.x[(j, k)]
        } else {
            0.0
        }
    });
    XPlusMatrix { weights }
}
