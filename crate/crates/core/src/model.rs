//! Physical parameters, collective-spin algebra and plain-basis Hamiltonians.
//!
//! Units are ħ = k_B = 1 with the photon frequency setting the energy scale.
//! The spin is the symmetric (j = N/2) multiplet of N two-level systems with
//! the conventional normalization `J± = Σ σ±`, `σ± = (σx ± iσy)/2`, so that
//! `[J+, J-] = 2 Jz` holds.
//!
//! Two frames are used. The *original* frame is
//!
//! ```text
//! H_D = ω a†a + Δ Jz + (2λ/√N)(a† + a) Jx
//! ```
//!
//! and the *rotated* frame applies `exp(iπ Jy/2)`, which sends `Jz → -Jx` and
//! `Jx → Jz`:
//!
//! ```text
//! H_0 = ω a†a - (Δ/2)(J+ + J-) + (2λ/√N)(a† + a) Jz
//! ```

use faer::Mat;

use crate::ecs::EcsEigensystem;
use crate::error::{Error, Result};
use crate::linalg::check_dimension;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DickeParams {
    pub n_qubits: usize,
    /// Qubit splitting Δ.
    pub delta: f64,
    /// Cavity frequency ω.
    pub omega: f64,
    /// Collective coupling λ.
    pub lambda: f64,
}

impl DickeParams {
    pub fn new(n_qubits: usize, delta: f64, omega: f64, lambda: f64) -> Result<Self> {
        let p = DickeParams {
            n_qubits,
            delta,
            omega,
            lambda,
        };
        p.validate()?;
        Ok(p)
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
        if self.n_qubits < 1 {
            out.push(Error::invalid("n_qubits", "must be at least 1"));
        }
        for (name, v) in [("omega", self.omega), ("delta", self.delta)] {
            if !(v.is_finite() && v > 0.0) {
                out.push(Error::invalid(name, format!("must be positive, got {v}")));
            }
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            out.push(Error::invalid(
                "lambda",
                format!("must be non-negative, got {}", self.lambda),
            ));
        }
        out
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_qubits(mut self, n_qubits: usize) -> Self {
        self.n_qubits = n_qubits;
        self
    }

    /// Total angular momentum j = N/2.
    pub fn j(&self) -> f64 {
        self.n_qubits as f64 / 2.0
    }

    /// Prefactor 2λ/√N of the light-matter coupling.
    pub fn coupling(&self) -> f64 {
        2.0 * self.lambda / (self.n_qubits as f64).sqrt()
    }

    pub fn spin_basis(&self) -> SpinBasis {
        SpinBasis::new(self.n_qubits)
    }
}

impl Default for DickeParams {
    fn default() -> Self {
        DickeParams {
            n_qubits: 8,
            delta: 1.0,
            omega: 1.0,
            lambda: 0.0,
        }
    }
}

/// The symmetric multiplet |j, m⟩, m = -j..=j ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinBasis {
    pub j: f64,
    pub m_values: Vec<f64>,
}

impl SpinBasis {
    pub fn new(n_qubits: usize) -> Self {
        let j = n_qubits as f64 / 2.0;
        let m_values = (0..=n_qubits).map(|i| i as f64 - j).collect();
        SpinBasis { j, m_values }
    }

    pub fn len(&self) -> usize {
        self.m_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m_values.is_empty()
    }

    /// `j_m^+ = √(j(j+1) - m(m+1))` for the projection at `index`.
    pub fn raising(&self, index: usize) -> f64 {
        let m = self.m_values[index];
        (self.j * (self.j + 1.0) - m * (m + 1.0)).max(0.0).sqrt()
    }

    /// `j_m^- = √(j(j+1) - m(m-1))` for the projection at `index`.
    pub fn lowering(&self, index: usize) -> f64 {
        let m = self.m_values[index];
        (self.j * (self.j + 1.0) - m * (m - 1.0)).max(0.0).sqrt()
    }

    pub fn jz(&self) -> Mat<f64> {
        let n = self.len();
        Mat::from_fn(n, n, |r, c| if r == c { self.m_values[r] } else { 0.0 })
    }

    pub fn j_plus(&self) -> Mat<f64> {
        let n = self.len();
        Mat::from_fn(n, n, |r, c| if r == c + 1 { self.raising(c) } else { 0.0 })
    }

    pub fn j_minus(&self) -> Mat<f64> {
        let n = self.len();
        Mat::from_fn(n, n, |r, c| if c == r + 1 { self.lowering(c) } else { 0.0 })
    }

    pub fn jx(&self) -> Mat<f64> {
        (self.j_plus() + self.j_minus()) * faer::Scale(0.5)
    }
}

/// Flat indexing of the product basis `|l⟩_boson ⊗ |j, m⟩`.
///
/// `index = m_index * (cutoff + 1) + l`, with `m_index = m + j` ascending, so
/// each spin projection owns a contiguous block of boson states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProductBasisIndex {
    pub n_qubits: usize,
    pub cutoff: usize,
}

impl ProductBasisIndex {
    pub fn new(n_qubits: usize, cutoff: usize) -> Self {
        ProductBasisIndex { n_qubits, cutoff }
    }

    pub fn spin_dim(&self) -> usize {
        self.n_qubits + 1
    }

    pub fn boson_dim(&self) -> usize {
        self.cutoff + 1
    }

    pub fn dim(&self) -> usize {
        self.spin_dim() * self.boson_dim()
    }

    #[inline]
    pub fn index(&self, m_index: usize, l: usize) -> usize {
        debug_assert!(m_index < self.spin_dim() && l < self.boson_dim());
        m_index * self.boson_dim() + l
    }

    #[inline]
    pub fn split(&self, flat: usize) -> (usize, usize) {
        (flat / self.boson_dim(), flat % self.boson_dim())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    Original,
    Rotated,
}

fn checked_basis(params: &DickeParams, fock_cutoff: usize) -> Result<ProductBasisIndex> {
    params.validate()?;
    if fock_cutoff < 1 {
        return Err(Error::invalid("fock_cutoff", "must be at least 1"));
    }
    let basis = ProductBasisIndex::new(params.n_qubits, fock_cutoff);
    check_dimension(basis.dim())?;
    Ok(basis)
}

/// Matrix element of `H_D` between two plain product states.
pub(crate) fn original_entry(
    params: &DickeParams,
    spin: &SpinBasis,
    basis: &ProductBasisIndex,
    row: usize,
    col: usize,
) -> f64 {
    let (mr, lr) = basis.split(row);
    let (mc, lc) = basis.split(col);
    if row == col {
        return params.omega * lr as f64 + params.delta * spin.m_values[mr];
    }
    // (2λ/√N)(a + a†) Jx: one boson step and one spin step at once
    let boson = if lr == lc + 1 {
        (lr as f64).sqrt()
    } else if lc == lr + 1 {
        (lc as f64).sqrt()
    } else {
        return 0.0;
    };
    let spin_elem = if mr == mc + 1 {
        0.5 * spin.raising(mc)
    } else if mc == mr + 1 {
        0.5 * spin.raising(mr)
    } else {
        return 0.0;
    };
    params.coupling() * boson * spin_elem
}

/// Matrix element of `H_0` between two plain product states.
fn rotated_entry(
    params: &DickeParams,
    spin: &SpinBasis,
    basis: &ProductBasisIndex,
    row: usize,
    col: usize,
) -> f64 {
    let (mr, lr) = basis.split(row);
    let (mc, lc) = basis.split(col);
    if mr == mc {
        if lr == lc {
            return params.omega * lr as f64;
        }
        let boson = if lr == lc + 1 {
            (lr as f64).sqrt()
        } else if lc == lr + 1 {
            (lc as f64).sqrt()
        } else {
            return 0.0;
        };
        return params.coupling() * spin.m_values[mr] * boson;
    }
    if lr != lc {
        return 0.0;
    }
    if mr == mc + 1 {
        -0.5 * params.delta * spin.raising(mc)
    } else if mc == mr + 1 {
        -0.5 * params.delta * spin.raising(mr)
    } else {
        0.0
    }
}

/// Dense `H_D` in the plain Fock ⊗ spin basis with bosons truncated at
/// `fock_cutoff`.
pub fn build_hamiltonian_original(params: &DickeParams, fock_cutoff: usize) -> Result<Mat<f64>> {
    let basis = checked_basis(params, fock_cutoff)?;
    let spin = params.spin_basis();
    let n = basis.dim();
    Ok(Mat::from_fn(n, n, |r, c| {
        original_entry(params, &spin, &basis, r, c)
    }))
}

/// Dense `H_0` (rotated frame) in the plain Fock ⊗ spin basis.
pub fn build_hamiltonian_rotated(params: &DickeParams, fock_cutoff: usize) -> Result<Mat<f64>> {
    let basis = checked_basis(params, fock_cutoff)?;
    let spin = params.spin_basis();
    let n = basis.dim();
    Ok(Mat::from_fn(n, n, |r, c| {
        rotated_entry(params, &spin, &basis, r, c)
    }))
}

/// Parity eigenvalue `exp(iπ(a†a + Jz + N/2))` of a plain original-frame
/// basis state.
pub fn original_parity(m_index: usize, l: usize) -> i8 {
    if (m_index + l) % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Parity operator `exp(iπ(a†a + Jz + N/2))` expressed in `frame`.
///
/// In the original frame it is diagonal. In the rotated frame it becomes
/// `exp(iπ(a†a - Jx + N/2))`, which maps `|l, m⟩ → (-1)^l |l, -m⟩`.
pub fn parity_matrix(frame: Frame, basis: &ProductBasisIndex) -> Mat<f64> {
    let n = basis.dim();
    let top = basis.n_qubits;
    match frame {
        Frame::Original => Mat::from_fn(n, n, |r, c| {
            if r != c {
                return 0.0;
            }
            let (mi, l) = basis.split(r);
            original_parity(mi, l) as f64
        }),
        Frame::Rotated => Mat::from_fn(n, n, |r, c| {
            let (mr, lr) = basis.split(r);
            let (mc, lc) = basis.split(c);
            if lr == lc && mr == top - mc {
                if lc % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            } else {
                0.0
            }
        }),
    }
}

/// `N_tot = ⟨a†a⟩ + ⟨Jz⟩ + N/2` for a diagonal state over the eigenstates of
/// `system`. The original-frame `Jz` is `-Jx` in the rotated frame.
pub fn excitation_number(populations: &[f64], system: &EcsEigensystem) -> f64 {
    let half_n = system.params().j();
    populations
        .iter()
        .enumerate()
        .filter(|(_, &p)| p != 0.0)
        .map(|(k, &p)| {
            let photons = system.photon_moments(k).n1;
            p * (photons - system.jx_expectation(k) + half_n)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, eigh, frobenius, symmetry_defect};

    fn params(n: usize, lambda: f64) -> DickeParams {
        DickeParams::new(n, 1.0, 1.0, lambda).unwrap()
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(DickeParams::new(0, 1.0, 1.0, 0.1).is_err());
        assert!(DickeParams::new(2, 0.0, 1.0, 0.1).is_err());
        assert!(DickeParams::new(2, 1.0, -1.0, 0.1).is_err());
        assert!(DickeParams::new(2, 1.0, 1.0, -0.1).is_err());
        assert!(build_hamiltonian_original(&params(2, 0.1), 0).is_err());
        assert!(matches!(
            build_hamiltonian_original(&params(2000, 0.1), 10),
            Err(Error::DimensionTooLarge { .. })
        ));
    }

    #[test]
    fn ladder_coefficients_vanish_at_edges() {
        for n in 1..=6 {
            let s = SpinBasis::new(n);
            assert_eq!(s.raising(n), 0.0);
            assert_eq!(s.lowering(0), 0.0);
            assert!((0..=n).all(|i| s.raising(i) >= 0.0 && s.lowering(i) >= 0.0));
        }
    }

    #[test]
    fn angular_momentum_commutators() {
        for n in [1, 2, 5, 8] {
            let s = SpinBasis::new(n);
            let (jp, jm, jz) = (s.j_plus(), s.j_minus(), s.jz());
            let c1 = commutator(&jp, &jm) - &jz * faer::Scale(2.0);
            let c2 = commutator(&jz, &jp) - &jp;
            let c3 = commutator(&jz, &jm) + &jm;
            assert!(frobenius(&c1) < 1e-12);
            assert!(frobenius(&c2) < 1e-12);
            assert!(frobenius(&c3) < 1e-12);
        }
    }

    #[test]
    fn decoupled_spectrum_original_frame() {
        let p = params(1, 0.0);
        let h = build_hamiltonian_original(&p, 6).unwrap();
        let s = eigh(&h).unwrap();
        let mut want: Vec<f64> = (0..=6)
            .flat_map(|l| [l as f64 - 0.5, l as f64 + 0.5])
            .collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in s.values.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn single_qubit_is_rabi_hamiltonian() {
        let (lam, cutoff) = (0.37, 5);
        let p = params(1, lam);
        let h = build_hamiltonian_original(&p, cutoff).unwrap();
        // ω a†a + (Δ/2) σz + λ (a + a†) σx with σ index 0 = down
        let basis = ProductBasisIndex::new(1, cutoff);
        for r in 0..basis.dim() {
            for c in 0..basis.dim() {
                let (sr, lr) = basis.split(r);
                let (sc, lc) = basis.split(c);
                let mut want = 0.0;
                if r == c {
                    want = lr as f64 + if sr == 1 { 0.5 } else { -0.5 };
                }
                if sr != sc {
                    if lr == lc + 1 {
                        want = lam * (lr as f64).sqrt();
                    } else if lc == lr + 1 {
                        want = lam * (lc as f64).sqrt();
                    }
                }
                assert!((h[(r, c)] - want).abs() < 1e-15, "({r},{c})");
            }
        }
    }

    #[test]
    fn frames_are_isospectral() {
        for (n, lam) in [(1, 0.3), (2, 0.5), (3, 0.9), (4, 1.2)] {
            let p = params(n, lam);
            let a = eigh(&build_hamiltonian_original(&p, 30).unwrap()).unwrap();
            let b = eigh(&build_hamiltonian_rotated(&p, 30).unwrap()).unwrap();
            for (x, y) in a.values.iter().zip(&b.values) {
                assert!(
                    (x - y).abs() <= 1e-10 * x.abs().max(1.0),
                    "N={n} λ={lam}: {x} vs {y}"
                );
            }
        }
    }

    #[test]
    fn rotated_decoupled_spectrum() {
        let p = params(3, 0.0);
        let s = eigh(&build_hamiltonian_rotated(&p, 4).unwrap()).unwrap();
        let mut want: Vec<f64> = (0..=4)
            .flat_map(|l| [-1.5, -0.5, 0.5, 1.5].map(|m| l as f64 - m))
            .collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in s.values.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn hamiltonians_are_symmetric() {
        let p = params(5, 0.8);
        assert_eq!(
            symmetry_defect(&build_hamiltonian_original(&p, 12).unwrap()),
            0.0
        );
        assert_eq!(
            symmetry_defect(&build_hamiltonian_rotated(&p, 12).unwrap()),
            0.0
        );
    }

    #[test]
    fn parity_operator_properties() {
        let p = params(8, 0.7);
        let basis = ProductBasisIndex::new(8, 20);
        for (frame, h) in [
            (Frame::Original, build_hamiltonian_original(&p, 20).unwrap()),
            (Frame::Rotated, build_hamiltonian_rotated(&p, 20).unwrap()),
        ] {
            let pi = parity_matrix(frame, &basis);
            assert_eq!(symmetry_defect(&pi), 0.0);
            let sq = &pi * &pi;
            for r in 0..basis.dim() {
                for c in 0..basis.dim() {
                    assert_eq!(sq[(r, c)], if r == c { 1.0 } else { 0.0 });
                }
            }
            assert!(frobenius(&commutator(&pi, &h)) < 1e-10, "{frame:?}");
        }
        // |l = 0, m = -j⟩ is parity even
        let pi = parity_matrix(Frame::Original, &basis);
        assert_eq!(pi[(0, 0)], 1.0);
    }

    #[test]
    fn parity_blocks_decouple_hamiltonian() {
        let p = params(4, 0.6);
        let basis = ProductBasisIndex::new(4, 15);
        let h = build_hamiltonian_original(&p, 15).unwrap();
        let mut off = 0.0f64;
        for r in 0..basis.dim() {
            for c in 0..basis.dim() {
                let (mr, lr) = basis.split(r);
                let (mc, lc) = basis.split(c);
                if original_parity(mr, lr) != original_parity(mc, lc) {
                    off += h[(r, c)] * h[(r, c)];
                }
            }
        }
        assert!(off.sqrt() < 1e-12);
    }
}
