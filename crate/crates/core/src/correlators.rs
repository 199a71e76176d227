//! Zero-delay two-photon correlators.
//!
//! With a diagonal steady state `ρ = Σ P_k |φ_k⟩⟨φ_k|` every trace reduces to
//! weighted column norms:
//!
//! ```text
//! ⟨X-X+⟩         = Σ_k P_k A_k,   A_k = ‖X+ φ_k‖²
//! ⟨(X-)²(X+)²⟩   = Σ_k P_k B_k,   B_k = ‖(X+)² φ_k‖²
//! G²_N(0)        = ⟨(X-)²(X+)²⟩ / ⟨X-X+⟩²
//! ```

use crate::dissipation::{bose_occupation, SteadyState};
use crate::ecs::PhotonMoments;
use crate::error::{Error, Result};
use crate::model::DickeParams;
use crate::operators::{TransitionTables, XPlusMatrix};

/// One-photon correlators below this are treated as a dark state.
pub const DARK_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationResult {
    pub g2: f64,
    /// `⟨X-X+⟩`.
    pub one_photon: f64,
    /// `⟨(X-)²(X+)²⟩`.
    pub two_photon: f64,
    pub a_components: Vec<f64>,
    pub b_components: Vec<f64>,
    /// Cavity-bath occupation `n_c = n(ω, T_c)` used to normalize reports.
    pub n_c: f64,
}

impl CorrelationResult {
    pub fn one_photon_normalized(&self) -> f64 {
        self.one_photon / self.n_c
    }

    pub fn two_photon_normalized(&self) -> f64 {
        self.two_photon / (self.n_c * self.n_c)
    }
}

/// Generalized correlator from the emission operator and steady state.
pub fn g2_generalized(
    xplus: &XPlusMatrix,
    state: &SteadyState,
    n_c: f64,
) -> Result<CorrelationResult> {
    let m = xplus.len();
    if state.len() != m {
        return Err(Error::invalid(
            "state",
            format!("{} populations for {} levels", state.len(), m),
        ));
    }
    let a_components = xplus.emission_norms();
    let b_components = xplus.two_photon_norms();
    let p = &state.populations;
    let one_photon: f64 = p.iter().zip(&a_components).map(|(p, a)| p * a).sum();
    let two_photon: f64 = p.iter().zip(&b_components).map(|(p, b)| p * b).sum();
    if one_photon < DARK_FLOOR {
        return Err(Error::DarkState { one_photon });
    }
    Ok(CorrelationResult {
        g2: two_photon / (one_photon * one_photon),
        one_photon,
        two_photon,
        a_components,
        b_components,
        n_c,
    })
}

/// Standard `⟨a†a†aa⟩/⟨a†a⟩²` for a diagonal mixture of states with the
/// given photon moments.
pub fn g2_standard(moments: &[PhotonMoments], state: &SteadyState) -> Result<f64> {
    if moments.len() < state.len() {
        return Err(Error::invalid(
            "moments",
            format!("{} moments for {} populations", moments.len(), state.len()),
        ));
    }
    let (n1, n2) = state
        .populations
        .iter()
        .zip(moments)
        .fold((0.0, 0.0), |(a, b), (p, m)| (a + p * m.n1, b + p * m.n2));
    if n1 < DARK_FLOOR {
        return Err(Error::DarkState { one_photon: n1 });
    }
    Ok(n2 / (n1 * n1))
}

/// Coupling regimes with a closed dominant-term approximation (labels taken
/// at N = 8, Δ = ω = 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// λ ∈ (0, 0.3): the second photon comes from level 3.
    Low,
    /// λ ∈ (0.3, 0.6): after the crossing, level 2 feeds level 1.
    Mid,
    /// λ ∈ (0.6, 0.85): levels 2 and 3 are nearly degenerate and both emit pairs.
    Degenerate,
}

impl Regime {
    pub fn for_coupling(lambda: f64) -> Option<Self> {
        if lambda > 0.0 && lambda < 0.3 {
            Some(Regime::Low)
        } else if (0.3..0.6).contains(&lambda) {
            Some(Regime::Mid)
        } else if (0.6..0.85).contains(&lambda) {
            Some(Regime::Degenerate)
        } else {
            None
        }
    }
}

/// Dominant-term approximations of `G²_N(0)` from the four lowest levels.
pub fn g2_dominant_approx(
    regime: Regime,
    tables: &TransitionTables,
    state: &SteadyState,
) -> Result<f64> {
    if tables.len() < 4 || state.len() < 4 {
        return Err(Error::invalid("tables", "need at least four levels"));
    }
    let p = &state.populations;
    let w = |k: usize, j: usize| tables.gap(k, j) * tables.x[(j, k)];
    let w10 = w(1, 0);
    if w10 == 0.0 || p[1] == 0.0 {
        return Err(Error::ZeroDenominator("P_1 Δ_10 X_10"));
    }
    let denom = p[1] * p[1] * w10 * w10;
    Ok(match regime {
        Regime::Low => p[3] * w(3, 1).powi(2) / denom,
        Regime::Mid => p[2] * w(2, 1).powi(2) / denom,
        Regime::Degenerate => {
            let num = p[2] * (w(2, 1) * w10).powi(2) + p[3] * (w(3, 2) * w(2, 1)).powi(2);
            num / (denom * w10 * w10)
        }
    })
}

/// Strong-coupling thermal-state correlators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrongCoupling {
    pub one_photon: f64,
    pub two_photon: f64,
    pub g2: f64,
}

/// When tunneling is fully dressed each spin projection carries an
/// independent displaced oscillator and `X+ → -iω A_m`, so at equal bath
/// temperature `T`: `⟨X-X+⟩ = ω² n`, `⟨(X-)²(X+)²⟩ = 2ω⁴ n²`, `G² = 2`.
pub fn g2_strong_coupling_analytic(
    params: &DickeParams,
    temperature: f64,
) -> Result<StrongCoupling> {
    params.validate()?;
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(Error::invalid(
            "temperature",
            format!("must be positive, got {temperature}"),
        ));
    }
    let w = params.omega;
    let n = bose_occupation(w, temperature);
    Ok(StrongCoupling {
        one_photon: w * w * n,
        two_photon: 2.0 * w.powi(4) * n * n,
        g2: 2.0,
    })
}
