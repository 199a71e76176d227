//! Diagonalization in the extended-coherent-state (displaced Fock) basis.
//!
//! In the rotated frame the spin projection `m` fixes a static force on the
//! cavity, so each `m` block is best described with bosons displaced by
//! `g_m = 2λm/(ω√N)`: `A_m = a + g_m` and `|l⟩_m = D(-g_m)|l⟩`. In that basis
//! the `m`-diagonal part is exactly `ω(l - g_m²)` and only the tunneling term
//! `-(Δ/2)(J+ + J-)` connects neighbouring projections, through the overlap
//! `⟨l|D(G)|k⟩` with the constant step `G = g_{m+1} - g_m`. A handful of
//! displaced quanta per block resolves the low spectrum even deep in the
//! ultrastrong regime, where a plain Fock basis needs hundreds.
//!
//! The product states `|j,m⟩ ⊗ |l⟩_m` are orthonormal (distinct `m` are
//! orthogonal spin states), so the eigenproblem is an ordinary symmetric one.
//! Operators acting only on the boson are `m`-diagonal and are evaluated with
//! `a = A_m - g_m`; only spin-flip operators need the displaced overlaps.
//!
//! Parity `exp(iπ(a†a - Jx + N/2))` maps `|l⟩_m ⊗ |m⟩ → (-1)^l |l⟩_{-m} ⊗ |-m⟩`
//! here, so the matrix is split into two parity blocks before solving. Every
//! eigenvector is then an exact parity eigenstate, even inside the
//! exponentially small tunneling doublets of the superradiant regime.

use faer::Mat;

use crate::error::{Error, Result};
use crate::linalg::{check_dimension, eigh, fix_sign, Spectrum};
use crate::model::{DickeParams, ProductBasisIndex, SpinBasis};

/// Per-projection boson displacements `g_m` and the neighbour step `G`.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementTable {
    /// `g_m` indexed by `m + j`.
    pub shifts: Vec<f64>,
    pub step: f64,
}

impl DisplacementTable {
    pub fn new(params: &DickeParams) -> Self {
        let step = params.coupling() / params.omega;
        let shifts = params
            .spin_basis()
            .m_values
            .iter()
            .map(|m| step * m)
            .collect();
        DisplacementTable { shifts, step }
    }

    /// Largest `|g_m|`, reached at `m = ±j`.
    pub fn max_shift(&self) -> f64 {
        self.shifts.iter().fold(0.0f64, |a, g| a.max(g.abs()))
    }
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// Generalized Laguerre `L_n^{(a)}(x)` by the forward three-term recurrence.
/// Returned as `(mantissa, log_scale)` with value `mantissa * e^log_scale`.
fn laguerre_scaled(n: usize, a: f64, x: f64) -> (f64, f64) {
    const BIG: f64 = 1e200;
    let mut prev = 1.0;
    if n == 0 {
        return (prev, 0.0);
    }
    let mut cur = 1.0 + a - x;
    let mut log_scale = 0.0;
    for i in 1..n {
        let fi = i as f64;
        let next = ((2.0 * fi + 1.0 + a - x) * cur - (fi + a) * prev) / (fi + 1.0);
        prev = cur;
        cur = next;
        if cur.abs() > BIG {
            prev /= BIG;
            cur /= BIG;
            log_scale += BIG.ln();
        }
    }
    (cur, log_scale)
}

/// `⟨l| D(δ) |k⟩` for a real displacement, `D(δ) = exp(δ(a† - a))`.
///
/// Evaluated as `√(k!/l!) δ^(l-k) e^(-δ²/2) L_k^(l-k)(δ²)` for `l ≥ k` with
/// the prefactor in the log domain, and `⟨l|D(δ)|k⟩ = ⟨k|D(-δ)|l⟩` otherwise.
/// Stable for `l, k ≤ 200` and `|δ| ≤ 20`.
///
/// With the basis conventions of this module the tunneling element between
/// projections `m+1` and `m` is `⟨l|D(G)|k⟩`; compared with the closed-form
/// sum `D_{l,k}` (terms `(-1)^r √(l!k!) G^(l+k-2r) / ((l-r)!(k-r)!r!)`) this is
/// `(-1)^k D_{l,k}`.
pub fn displaced_overlap(l: usize, k: usize, delta: f64) -> f64 {
    if delta == 0.0 {
        return if l == k { 1.0 } else { 0.0 };
    }
    if l < k {
        return displaced_overlap(k, l, -delta);
    }
    let n = l - k;
    let x = delta * delta;
    let (lag, lag_scale) = laguerre_scaled(k, n as f64, x);
    if lag == 0.0 {
        return 0.0;
    }
    let ln_mag = 0.5 * (ln_factorial(k) - ln_factorial(l)) + n as f64 * delta.abs().ln() - 0.5 * x
        + lag_scale
        + lag.abs().ln();
    let sign = if delta < 0.0 && n % 2 == 1 {
        -lag.signum()
    } else {
        lag.signum()
    };
    sign * ln_mag.exp()
}

/// `O[l][k] = ⟨l|D(δ)|k⟩` for `l, k < size`.
pub fn overlap_table(size: usize, delta: f64) -> Mat<f64> {
    Mat::from_fn(size, size, |l, k| displaced_overlap(l, k, delta))
}

/// Everything needed to evaluate single ECS matrix elements.
struct EcsContext {
    params: DickeParams,
    basis: ProductBasisIndex,
    spin: SpinBasis,
    displacements: DisplacementTable,
    overlap: Mat<f64>,
}

impl EcsContext {
    fn new(params: &DickeParams, n_tr: usize) -> Result<Self> {
        params.validate()?;
        if n_tr < 1 {
            return Err(Error::invalid(
                "n_tr",
                "boson truncation must be at least 1",
            ));
        }
        let basis = ProductBasisIndex::new(params.n_qubits, n_tr);
        check_dimension(basis.dim())?;
        let displacements = DisplacementTable::new(params);
        let overlap = overlap_table(n_tr + 1, displacements.step);
        Ok(EcsContext {
            params: *params,
            basis,
            spin: params.spin_basis(),
            displacements,
            overlap,
        })
    }

    fn entry(&self, x: usize, y: usize) -> f64 {
        let (mx, lx) = self.basis.split(x);
        let (my, ly) = self.basis.split(y);
        if mx == my {
            if lx == ly {
                let g = self.displacements.shifts[mx];
                return self.params.omega * (lx as f64 - g * g);
            }
            return 0.0;
        }
        let half_delta = 0.5 * self.params.delta;
        if mx == my + 1 {
            -half_delta * self.spin.raising(my) * self.overlap[(lx, ly)]
        } else if my == mx + 1 {
            -half_delta * self.spin.raising(mx) * self.overlap[(ly, lx)]
        } else {
            0.0
        }
    }

    /// Orthonormal parity-adapted basis vectors as (flat index, weight) lists.
    fn parity_block(&self, parity: i8) -> Vec<Vec<(usize, f64)>> {
        let top = self.params.n_qubits;
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let mut out = Vec::with_capacity(self.basis.dim() / 2 + 1);
        for mi in 0..=top {
            let partner = top - mi;
            if partner < mi {
                break;
            }
            for l in 0..self.basis.boson_dim() {
                let sign_l: i8 = if l % 2 == 0 { 1 } else { -1 };
                if partner == mi {
                    if sign_l == parity {
                        out.push(vec![(self.basis.index(mi, l), 1.0)]);
                    }
                } else {
                    let s = (parity * sign_l) as f64;
                    out.push(vec![
                        (self.basis.index(mi, l), r),
                        (self.basis.index(partner, l), s * r),
                    ]);
                }
            }
        }
        out
    }
}

/// Dense rotated-frame Hamiltonian in the ECS product basis, dimension
/// `(N+1)(n_tr+1)`, ordered like [`ProductBasisIndex`].
pub fn build_ecs_matrix(params: &DickeParams, n_tr: usize) -> Result<Mat<f64>> {
    let ctx = EcsContext::new(params, n_tr)?;
    let n = ctx.basis.dim();
    Ok(Mat::from_fn(n, n, |r, c| ctx.entry(r, c)))
}

/// Full eigendecomposition of a symmetric matrix, ascending.
pub fn diagonalize(matrix: &Mat<f64>) -> Result<Spectrum> {
    eigh(matrix)
}

/// `⟨a†a⟩` and `⟨a†a†aa⟩` of one pure state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonMoments {
    pub n1: f64,
    pub n2: f64,
}

impl PhotonMoments {
    /// Moments of a state given by its plain Fock amplitudes.
    pub fn from_fock_amplitudes(amplitudes: &[f64]) -> Self {
        let mut n1 = 0.0;
        let mut n2 = 0.0;
        for (n, c) in amplitudes.iter().enumerate() {
            let w = c * c;
            n1 += n as f64 * w;
            n2 += (n * n.saturating_sub(1)) as f64 * w;
        }
        PhotonMoments { n1, n2 }
    }
}

/// Lowest eigenpairs of the rotated Dicke Hamiltonian in the ECS basis.
#[derive(Debug, Clone)]
pub struct EcsEigensystem {
    params: DickeParams,
    basis: ProductBasisIndex,
    displacements: DisplacementTable,
    overlap: Mat<f64>,
    energies: Vec<f64>,
    parities: Vec<i8>,
    /// Column `k` holds `c_{m,l}` of eigenstate `k`, flat-indexed.
    coefficients: Mat<f64>,
}

impl EcsEigensystem {
    /// Solves with boson truncation `n_tr`, keeping at most `max_levels` of
    /// the lowest eigenstates (all of them when `None`).
    pub fn solve(params: &DickeParams, n_tr: usize, max_levels: Option<usize>) -> Result<Self> {
        let ctx = EcsContext::new(params, n_tr)?;
        let dim = ctx.basis.dim();
        let keep = max_levels.unwrap_or(dim).min(dim);

        let mut found: Vec<(f64, i8, usize, usize)> = Vec::with_capacity(dim);
        let mut blocks = Vec::with_capacity(2);
        for (b, parity) in [1i8, -1].into_iter().enumerate() {
            let vecs = ctx.parity_block(parity);
            let nb = vecs.len();
            let mut m = Mat::<f64>::zeros(nb, nb);
            for a in 0..nb {
                for c in 0..=a {
                    let mut acc = 0.0;
                    for &(x, wx) in &vecs[a] {
                        for &(y, wy) in &vecs[c] {
                            acc += wx * wy * ctx.entry(x, y);
                        }
                    }
                    m[(a, c)] = acc;
                    m[(c, a)] = acc;
                }
            }
            let spec = eigh(&m)?;
            found.extend(
                spec.values
                    .iter()
                    .enumerate()
                    .map(|(i, &e)| (e, parity, b, i)),
            );
            blocks.push((vecs, spec));
        }
        found.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
        found.truncate(keep);

        let mut coefficients = Mat::<f64>::zeros(dim, keep);
        let mut col = vec![0.0; dim];
        for (k, &(_, _, b, i)) in found.iter().enumerate() {
            col.iter_mut().for_each(|x| *x = 0.0);
            let (vecs, spec) = &blocks[b];
            for (a, members) in vecs.iter().enumerate() {
                let v = spec.vectors[(a, i)];
                for &(x, w) in members {
                    col[x] += w * v;
                }
            }
            fix_sign(&mut col);
            for (r, &x) in col.iter().enumerate() {
                coefficients[(r, k)] = x;
            }
        }

        Ok(EcsEigensystem {
            params: ctx.params,
            basis: ctx.basis,
            displacements: ctx.displacements,
            overlap: ctx.overlap,
            energies: found.iter().map(|f| f.0).collect(),
            parities: found.iter().map(|f| f.1).collect(),
            coefficients,
        })
    }

    /// Rebuilds an eigensystem from stored energies, parities and
    /// coefficients (used by the spectrum cache).
    pub fn from_parts(
        params: &DickeParams,
        n_tr: usize,
        energies: Vec<f64>,
        parities: Vec<i8>,
        coefficients: Mat<f64>,
    ) -> Result<Self> {
        params.validate()?;
        let basis = ProductBasisIndex::new(params.n_qubits, n_tr);
        if coefficients.nrows() != basis.dim()
            || coefficients.ncols() != energies.len()
            || parities.len() != energies.len()
        {
            return Err(Error::Cache(format!(
                "inconsistent eigensystem shape: {}x{} coefficients, {} energies, {} parities, basis dim {}",
                coefficients.nrows(),
                coefficients.ncols(),
                energies.len(),
                parities.len(),
                basis.dim()
            )));
        }
        let displacements = DisplacementTable::new(params);
        let overlap = overlap_table(n_tr + 1, displacements.step);
        Ok(EcsEigensystem {
            params: *params,
            basis,
            displacements,
            overlap,
            energies,
            parities,
            coefficients,
        })
    }

    pub fn params(&self) -> &DickeParams {
        &self.params
    }

    pub fn n_tr(&self) -> usize {
        self.basis.cutoff
    }

    pub fn basis(&self) -> &ProductBasisIndex {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Number of eigenstates kept.
    pub fn levels(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn parities(&self) -> &[i8] {
        &self.parities
    }

    pub fn displacements(&self) -> &DisplacementTable {
        &self.displacements
    }

    pub fn coefficients(&self) -> &Mat<f64> {
        &self.coefficients
    }

    pub fn coefficient(&self, k: usize, m_index: usize, l: usize) -> f64 {
        self.coefficients[(self.basis.index(m_index, l), k)]
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        (0..self.dim()).map(|r| self.coefficients[(r, k)]).collect()
    }

    /// Weight of eigenstate `k` on the last displaced boson level `l = n_tr`.
    pub fn boson_tail_weight(&self, k: usize) -> f64 {
        let top = self.n_tr();
        (0..self.basis.spin_dim())
            .map(|mi| self.coefficient(k, mi, top).powi(2))
            .sum()
    }

    /// `a v` with `a = A_m - g_m` on every projection block.
    pub fn apply_annihilation(&self, v: &[f64]) -> Vec<f64> {
        let nb = self.basis.boson_dim();
        let mut out = vec![0.0; v.len()];
        for (mi, g) in self.displacements.shifts.iter().enumerate() {
            let off = mi * nb;
            for l in 0..nb {
                let mut x = -g * v[off + l];
                if l + 1 < nb {
                    x += ((l + 1) as f64).sqrt() * v[off + l + 1];
                }
                out[off + l] = x;
            }
        }
        out
    }

    /// `(a + a†) v`, restricted to the truncated basis.
    pub fn apply_quadrature(&self, v: &[f64]) -> Vec<f64> {
        let nb = self.basis.boson_dim();
        let mut out = vec![0.0; v.len()];
        for (mi, g) in self.displacements.shifts.iter().enumerate() {
            let off = mi * nb;
            for l in 0..nb {
                let mut x = -2.0 * g * v[off + l];
                if l + 1 < nb {
                    x += ((l + 1) as f64).sqrt() * v[off + l + 1];
                }
                if l > 0 {
                    x += (l as f64).sqrt() * v[off + l - 1];
                }
                out[off + l] = x;
            }
        }
        out
    }

    /// `2 Jz / √N` applied to `v` (the rotated-frame image of `(J+ + J-)/√N`).
    pub fn apply_qubit_coupling(&self, v: &[f64]) -> Vec<f64> {
        let nb = self.basis.boson_dim();
        let scale = 2.0 / (self.params.n_qubits as f64).sqrt();
        let spin = self.params.spin_basis();
        v.iter()
            .enumerate()
            .map(|(x, c)| scale * spin.m_values[x / nb] * c)
            .collect()
    }

    pub fn photon_moments(&self, k: usize) -> PhotonMoments {
        let v = self.vector(k);
        let av = self.apply_annihilation(&v);
        let aav = self.apply_annihilation(&av);
        PhotonMoments {
            n1: av.iter().map(|x| x * x).sum(),
            n2: aav.iter().map(|x| x * x).sum(),
        }
    }

    /// `⟨φ_k| Jx |φ_k⟩` in the rotated frame; spin flips between projections
    /// carry the displaced overlaps.
    pub fn jx_expectation(&self, k: usize) -> f64 {
        let nb = self.basis.boson_dim();
        let spin = self.params.spin_basis();
        let mut acc = 0.0;
        for mi in 0..self.params.n_qubits {
            let jp = spin.raising(mi);
            for l in 0..nb {
                let upper = self.coefficient(k, mi + 1, l);
                if upper == 0.0 {
                    continue;
                }
                let mut row = 0.0;
                for q in 0..nb {
                    row += self.overlap[(l, q)] * self.coefficient(k, mi, q);
                }
                acc += jp * upper * row;
            }
        }
        acc
    }

    /// `⟨φ_k| Π |φ_k⟩` evaluated from the coefficients.
    pub fn parity_expectation(&self, k: usize) -> f64 {
        let top = self.params.n_qubits;
        let mut acc = 0.0;
        for mi in 0..=top {
            for l in 0..self.basis.boson_dim() {
                let s = if l % 2 == 0 { 1.0 } else { -1.0 };
                acc += s * self.coefficient(k, mi, l) * self.coefficient(k, top - mi, l);
            }
        }
        acc
    }

    /// Gauge transformation: negates the eigenvectors selected by `flips`.
    pub fn with_flipped_signs(&self, flips: &[bool]) -> Self {
        let mut out = self.clone();
        for (k, &f) in flips.iter().enumerate().take(self.levels()) {
            if f {
                for r in 0..self.dim() {
                    out.coefficients[(r, k)] = -out.coefficients[(r, k)];
                }
            }
        }
        out
    }
}

/// Level-by-level energy shifts between two boson truncations.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub n_tr_low: usize,
    pub n_tr_high: usize,
    /// `|E_k(n_tr_low) - E_k(n_tr_high)|`.
    pub shifts: Vec<f64>,
    pub tolerance: f64,
    /// Levels whose shift exceeds `tolerance`.
    pub non_converged: Vec<usize>,
}

impl ConvergenceReport {
    pub fn converged(&self) -> bool {
        self.non_converged.is_empty()
    }

    pub fn max_shift(&self) -> f64 {
        self.shifts.iter().copied().fold(0.0, f64::max)
    }
}

pub fn convergence_check(
    params: &DickeParams,
    n_tr_low: usize,
    n_tr_high: usize,
    k_levels: usize,
    tolerance: f64,
) -> Result<ConvergenceReport> {
    if n_tr_low >= n_tr_high {
        return Err(Error::invalid(
            "n_tr_low",
            format!("must be below n_tr_high ({n_tr_low} >= {n_tr_high})"),
        ));
    }
    let low = EcsEigensystem::solve(params, n_tr_low, Some(k_levels))?;
    let high = EcsEigensystem::solve(params, n_tr_high, Some(k_levels))?;
    let shifts: Vec<f64> = low
        .energies()
        .iter()
        .zip(high.energies())
        .map(|(a, b)| (a - b).abs())
        .collect();
    let non_converged = shifts
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > tolerance)
        .map(|(k, _)| k)
        .collect();
    Ok(ConvergenceReport {
        n_tr_low,
        n_tr_high,
        shifts,
        tolerance,
        non_converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::symmetry_defect;

    /// `exp(δ(a† - a))` on a truncated Fock space by scaling and squaring.
    fn brute_force_displacement(size: usize, delta: f64) -> Mat<f64> {
        let gen = Mat::from_fn(size, size, |r, c| {
            if r == c + 1 {
                delta * (r as f64).sqrt()
            } else if c == r + 1 {
                -delta * (c as f64).sqrt()
            } else {
                0.0
            }
        });
        let norm = 2.0 * delta.abs() * (size as f64).sqrt();
        let mut squarings = 0;
        while norm / f64::powi(2.0, squarings) > 0.25 {
            squarings += 1;
        }
        let scaled = &gen * faer::Scale(1.0 / f64::powi(2.0, squarings));
        let mut term = Mat::<f64>::identity(size, size);
        let mut sum = Mat::<f64>::identity(size, size);
        for i in 1..30 {
            term = &term * &scaled * faer::Scale(1.0 / i as f64);
            sum += &term;
        }
        for _ in 0..squarings {
            sum = &sum * &sum;
        }
        sum
    }

    /// Closed-form finite sum, fine for small indices.
    fn overlap_by_sum(l: usize, k: usize, g: f64) -> f64 {
        let fact = |n: usize| (1..=n).map(|i| i as f64).product::<f64>();
        let mut acc = 0.0;
        for r in 0..=l.min(k) {
            let sign = if (k - r) % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * (fact(l) * fact(k)).sqrt() * g.powi((l + k - 2 * r) as i32)
                / (fact(l - r) * fact(k - r) * fact(r));
        }
        (-g * g / 2.0).exp() * acc
    }

    #[test]
    fn overlap_identity_at_zero() {
        for l in 0..6 {
            for k in 0..6 {
                assert_eq!(displaced_overlap(l, k, 0.0), if l == k { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn overlap_frozen_values() {
        // e^{-G²/2} at G = 0.5
        assert!((displaced_overlap(0, 0, 0.5) - 0.882_496_902_584_595).abs() < 1e-14);
        let g: f64 = 0.5;
        let want = (-g * g / 2.0).exp() * (1.0 - g * g);
        assert!((displaced_overlap(1, 1, g) - want).abs() < 1e-15);
        // sign convention: ⟨1|D(δ)|0⟩ = δ e^{-δ²/2}, ⟨0|D(δ)|1⟩ = -δ e^{-δ²/2}
        assert!((displaced_overlap(1, 0, g) - g * (-g * g / 2.0).exp()).abs() < 1e-15);
        assert!((displaced_overlap(0, 1, g) + g * (-g * g / 2.0).exp()).abs() < 1e-15);
    }

    #[test]
    fn overlap_matches_exponentiated_displacement() {
        for delta in [0.5, -0.8, 1.7] {
            let d = brute_force_displacement(200, delta);
            for l in 0..25 {
                for k in 0..25 {
                    let got = displaced_overlap(l, k, delta);
                    assert!(
                        (got - d[(l, k)]).abs() < 1e-11,
                        "l={l} k={k} δ={delta}: {got} vs {}",
                        d[(l, k)]
                    );
                }
            }
        }
    }

    #[test]
    fn overlap_matches_closed_form_sum() {
        for g in [0.2, 0.9, 2.3] {
            for l in 0..12 {
                for k in 0..12 {
                    let want = overlap_by_sum(l, k, g);
                    assert!((displaced_overlap(l, k, g) - want).abs() < 1e-11);
                }
            }
        }
    }

    #[test]
    fn overlap_rows_are_unit_vectors() {
        for delta in [0.3, 2.0, 6.0, -11.0] {
            for l in [0usize, 5, 40, 120] {
                let kmax = 600;
                let s: f64 = (0..kmax)
                    .map(|k| displaced_overlap(l, k, delta).powi(2))
                    .sum();
                assert!((s - 1.0).abs() < 1e-10, "δ={delta} l={l}: {s}");
            }
        }
    }

    #[test]
    fn overlap_stable_at_contract_edge() {
        for &(l, k, d) in &[
            (200, 200, 20.0),
            (200, 0, 20.0),
            (0, 200, -20.0),
            (150, 190, 13.0),
        ] {
            let v = displaced_overlap(l, k, d);
            assert!(v.is_finite() && v.abs() <= 1.0 + 1e-12, "{l} {k} {d}: {v}");
        }
    }

    #[test]
    fn displacement_table_shape() {
        let p = DickeParams::new(6, 1.0, 1.0, 0.7).unwrap();
        let t = DisplacementTable::new(&p);
        let n = t.shifts.len();
        for i in 0..n {
            assert!((t.shifts[i] + t.shifts[n - 1 - i]).abs() < 1e-15);
        }
        for w in t.shifts.windows(2) {
            assert!((w[1] - w[0] - t.step).abs() < 1e-14);
        }
        assert!((t.step - 2.0 * 0.7 / 6f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn ecs_matrix_symmetric() {
        let p = DickeParams::new(5, 1.0, 1.0, 0.9).unwrap();
        let h = build_ecs_matrix(&p, 20).unwrap();
        assert!(symmetry_defect(&h) < 1e-12);
    }

    #[test]
    fn decoupled_ecs_spectrum() {
        let p = DickeParams::new(4, 1.0, 1.0, 0.0).unwrap();
        let sys = EcsEigensystem::solve(&p, 6, None).unwrap();
        let mut want: Vec<f64> = (0..=6)
            .flat_map(|l| (-2..=2).map(move |m| l as f64 - m as f64))
            .collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in sys.energies().iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn parity_blocks_agree_with_full_matrix() {
        let p = DickeParams::new(5, 1.0, 1.3, 0.8).unwrap();
        let full = eigh(&build_ecs_matrix(&p, 15).unwrap()).unwrap();
        let sys = EcsEigensystem::solve(&p, 15, None).unwrap();
        for (a, b) in full.values.iter().zip(sys.energies()) {
            assert!((a - b).abs() < 1e-10);
        }
        for k in 0..20 {
            assert!((sys.parity_expectation(k) - sys.parities()[k] as f64).abs() < 1e-12);
        }
        let c = sys.coefficients();
        let gram = c.transpose() * c;
        for r in 0..sys.levels() {
            for q in 0..sys.levels() {
                let want = if r == q { 1.0 } else { 0.0 };
                assert!((gram[(r, q)] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ground_energy_variational_in_truncation() {
        let p = DickeParams::new(8, 1.0, 1.0, 0.6).unwrap();
        let mut last = f64::INFINITY;
        for n_tr in [1, 2, 4, 8, 16] {
            let e0 = EcsEigensystem::solve(&p, n_tr, Some(1)).unwrap().energies()[0];
            assert!(e0 <= last + 1e-12);
            last = e0;
        }
    }

    #[test]
    fn spectrum_even_in_coupling_sign() {
        // λ → -λ is g_m → -g_m, i.e. the relabeling m → -m
        let p = DickeParams::new(3, 1.0, 1.0, 0.0).unwrap();
        let ctx = EcsContext::new(&p.with_lambda(0.8), 12).unwrap();
        let mut flipped = EcsContext::new(&p.with_lambda(0.8), 12).unwrap();
        flipped
            .displacements
            .shifts
            .iter_mut()
            .for_each(|g| *g = -*g);
        flipped.displacements.step = -flipped.displacements.step;
        flipped.overlap = overlap_table(13, flipped.displacements.step);
        let n = ctx.basis.dim();
        let a = eigh(&Mat::from_fn(n, n, |r, c| ctx.entry(r, c))).unwrap();
        let b = eigh(&Mat::from_fn(n, n, |r, c| flipped.entry(r, c))).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn convergence_report_zero_coupling() {
        let p = DickeParams::new(4, 1.0, 1.0, 0.0).unwrap();
        let r = convergence_check(&p, 10, 20, 15, 1e-12).unwrap();
        assert!(r.converged());
        assert!(r.max_shift() < 1e-13);
        assert!(convergence_check(&p, 20, 10, 5, 1e-12).is_err());
    }

    #[test]
    fn near_degenerate_doublet_at_strong_coupling() {
        let p = DickeParams::new(8, 1.0, 1.0, 0.7).unwrap();
        let sys = EcsEigensystem::solve(&p, 40, Some(6)).unwrap();
        let e = sys.energies();
        // ground doublet, then levels 2 and 3 close together
        assert!(e[1] - e[0] < 0.01, "{e:?}");
        assert!(e[3] - e[2] < 0.25 * (e[2] - e[1]), "{e:?}");
    }

    #[test]
    fn excitation_number_decoupled() {
        use crate::model::excitation_number;
        let p = DickeParams::new(2, 1.0, 1.7, 0.0).unwrap();
        let sys = EcsEigensystem::solve(&p, 5, Some(4)).unwrap();
        // levels: 0 (vacuum), Δ (spin flip), ω (photon), ...
        assert!(excitation_number(&[1.0, 0.0, 0.0, 0.0], &sys).abs() < 1e-12);
        assert!((excitation_number(&[0.0, 1.0, 0.0, 0.0], &sys) - 1.0).abs() < 1e-12);
        assert!((excitation_number(&[0.0, 0.0, 1.0, 0.0], &sys) - 1.0).abs() < 1e-12);
        assert!((sys.photon_moments(2).n1 - 1.0).abs() < 1e-12);
    }
}
