//! Closed-form physics of the qubit engine.
//!
//! Units: `k_B = ħ = 1` and the gap of `H_S = |1⟩⟨1|` is one, so every work
//! value is dimensionless. The polarization `η = ⟨σ_z⟩` of the Gibbs state is
//! the primary parameter; temperatures are only reachable through
//! [`eta_from_beta`] / [`beta_from_eta`].

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, ComplexMatrix};
use crate::qubit::{
    apply_unitary, bloch_to_density, expectation, sigma_x, BlochVector, DensityMatrix, UnitaryGate,
};

pub fn check_eta(eta: f64) -> Result<()> {
    if eta.is_finite() && eta > -1.0 && eta < 1.0 {
        Ok(())
    } else {
        Err(Error::EtaOutOfRange(eta))
    }
}

/// `√(1 − η²)`, the x-extent of the tilted decomposition.
#[inline]
pub fn transverse(eta: f64) -> f64 {
    (1.0 - eta * eta).sqrt()
}

/// Blue-to-red cell ratio for which the classical bound is derived.
#[inline]
pub fn default_ratio(eta: f64) -> f64 {
    1.0 / transverse(eta)
}

/// Parameters shared by every sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineParams {
    pub eta: f64,
    pub q: f64,
    /// Blue-to-red ratio; `None` means [`default_ratio`].
    pub ratio_override: Option<f64>,
}

impl EngineParams {
    pub fn new(eta: f64, q: f64) -> Result<Self> {
        check_eta(eta)?;
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidParameter {
                name: "q",
                reason: format!("{q} is outside [0, 1]"),
            });
        }
        Ok(Self {
            eta,
            q,
            ratio_override: None,
        })
    }

    pub fn with_ratio(mut self, ratio: f64) -> Result<Self> {
        if !(ratio.is_finite() && ratio > 0.0) {
            return Err(Error::InvalidParameter {
                name: "c",
                reason: format!("{ratio} must be finite and positive"),
            });
        }
        self.ratio_override = Some(ratio);
        Ok(self)
    }

    pub fn ratio(&self) -> f64 {
        self.ratio_override.unwrap_or_else(|| default_ratio(self.eta))
    }

    /// Thermal states have `η ≤ 0`; positive values are population-inverted.
    pub fn is_physical(&self) -> bool {
        self.eta <= 0.0
    }
}

/// `H_S = |1⟩⟨1|`.
pub fn hamiltonian() -> ComplexMatrix {
    ComplexMatrix::diagonal(&[1.0, 0.0]).unwrap()
}

/// Qubit Gibbs state with `⟨σ_z⟩ = η`.
pub fn gibbs_state(eta: f64) -> Result<DensityMatrix> {
    check_eta(eta)?;
    Ok(bloch_to_density(BlochVector {
        x: 0.0,
        y: 0.0,
        z: eta,
    }))
}

/// `η = (e^{−β} − 1)/(e^{−β} + 1)`.
pub fn eta_from_beta(beta: f64) -> Result<f64> {
    if beta.is_nan() || beta < 0.0 {
        return Err(Error::InvalidParameter {
            name: "beta",
            reason: format!("{beta} must be non-negative"),
        });
    }
    Ok(-(0.5 * beta).tanh())
}

/// Inverse of [`eta_from_beta`]; `η = −1` maps to `β = ∞`.
pub fn beta_from_eta(eta: f64) -> Result<f64> {
    if eta > 0.0 {
        return Err(Error::NoPhysicalTemperature(eta));
    }
    if eta.is_nan() || eta < -1.0 {
        return Err(Error::EtaOutOfRange(eta));
    }
    Ok(((1.0 - eta) / (1.0 + eta)).ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellColor {
    Red,
    Blue,
}

impl CellColor {
    pub fn buttons(self) -> [Button; 2] {
        match self {
            CellColor::Red => [Button::Z1, Button::Z0],
            CellColor::Blue => [Button::XPlus, Button::XMinus],
        }
    }
}

/// The four work-extraction unitaries Bob's cells can trigger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Button {
    #[serde(rename = "z1")]
    Z1,
    #[serde(rename = "z0")]
    Z0,
    #[serde(rename = "x+")]
    XPlus,
    #[serde(rename = "x-")]
    XMinus,
}

impl Button {
    pub const ALL: [Button; 4] = [Button::Z1, Button::Z0, Button::XPlus, Button::XMinus];

    pub fn color(self) -> CellColor {
        match self {
            Button::Z1 | Button::Z0 => CellColor::Red,
            Button::XPlus | Button::XMinus => CellColor::Blue,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Button::Z1 => "z1",
            Button::Z0 => "z0",
            Button::XPlus => "x+",
            Button::XMinus => "x-",
        }
    }
}

impl fmt::Display for Button {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkUnitarySet {
    pub u_z1: UnitaryGate,
    pub u_z0: UnitaryGate,
    pub u_x_plus: UnitaryGate,
    pub u_x_minus: UnitaryGate,
}

impl WorkUnitarySet {
    pub fn gate(&self, button: Button) -> &UnitaryGate {
        match button {
            Button::Z1 => &self.u_z1,
            Button::Z0 => &self.u_z0,
            Button::XPlus => &self.u_x_plus,
            Button::XMinus => &self.u_x_minus,
        }
    }
}

/// Bob's gates for polarization `η`.
///
/// `u_x_plus` / `u_x_minus` bring the Bloch vectors `(±√(1−η²), 0, η)` to the
/// ground state. They are real reflections; the rotation about the y-axis
/// with the same energy bookkeeping is [`equivalent_rotation_angle`].
pub fn work_unitaries(eta: f64) -> Result<WorkUnitarySet> {
    check_eta(eta)?;
    let a = ((1.0 - eta) / 2.0).sqrt();
    let b = ((1.0 + eta) / 2.0).sqrt();
    Ok(WorkUnitarySet {
        u_z1: UnitaryGate::from_trusted(sigma_x()),
        u_z0: UnitaryGate::identity(2)?,
        u_x_plus: UnitaryGate::new(ComplexMatrix::from_real_rows([[-a, b], [b, a]])?)?,
        u_x_minus: UnitaryGate::new(ComplexMatrix::from_real_rows([[a, b], [-b, a]])?)?,
    })
}

/// `exp(−i φ σ_y / 2)`.
pub fn y_rotation(phi: f64) -> UnitaryGate {
    let (s, co) = (0.5 * phi).sin_cos();
    UnitaryGate::from_trusted(ComplexMatrix::from_real_rows([[co, -s], [s, co]]).unwrap())
}

/// Angle φ of a y-rotation that changes the energy of every state exactly as
/// the gate behind `button` does (same final `z` for any input).
///
/// `z1 ↦ π`, `z0 ↦ 0`, `x± ↦ ±(π − θ)` with `cos θ = η`, `sin θ = √(1−η²)`.
pub fn equivalent_rotation_angle(button: Button, eta: f64) -> f64 {
    let theta = transverse(eta).atan2(eta);
    match button {
        Button::Z1 => PI,
        Button::Z0 => 0.0,
        Button::XPlus => PI - theta,
        Button::XMinus => theta - PI,
    }
}

/// Energy handed to the work storage when `u` acts on `rho`:
/// `Tr{H_S ρ} − Tr{H_S U ρ U†}`.
pub fn extracted_work(u: &UnitaryGate, rho: &DensityMatrix) -> Result<f64> {
    let h = hamiltonian();
    let before = expectation(&h, rho)?;
    let after = expectation(&h, &apply_unitary(u, rho)?)?;
    Ok(before - after)
}

/// Expected work of each button on a state with Bloch vector `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkObservables {
    pub z1: f64,
    pub z0: f64,
    pub x_plus: f64,
    pub x_minus: f64,
}

impl WorkObservables {
    pub fn get(&self, button: Button) -> f64 {
        match button {
            Button::Z1 => self.z1,
            Button::Z0 => self.z0,
            Button::XPlus => self.x_plus,
            Button::XMinus => self.x_minus,
        }
    }
}

pub fn work_observables(r: BlochVector, eta: f64) -> WorkObservables {
    let tilt = r.x * transverse(eta);
    let base = r.z * (1.0 + eta);
    WorkObservables {
        z1: r.z,
        z0: 0.0,
        x_plus: 0.5 * (base + tilt),
        x_minus: 0.5 * (base - tilt),
    }
}

/// Largest average work any local-hidden-state model can deliver at the
/// ratio `c = 1/√(1−η²)`:
///
/// `[η(√(1−η²) + η + 1) + √(2−2η²)] / [2(√(1−η²) + 1)]`.
pub fn classical_bound(eta: f64) -> f64 {
    let s = transverse(eta);
    (eta * (s + eta + 1.0) + (2.0 - 2.0 * eta * eta).sqrt()) / (2.0 * (s + 1.0))
}

/// Average work with the mixed demon state `q ρ_qu + (1−q) ρ_cl` at the
/// default ratio.
pub fn quantum_work(eta: f64, q: f64) -> f64 {
    let s = transverse(eta);
    (1.0 + eta) * (s + eta - eta * q + q) / (2.0 * (s + 1.0))
}

/// `(W̄_z, W̄_x)` for the mixed demon state: red cells always reach
/// `(1+η)/2`, blue cells `½(q + η + η² − qη²)`.
pub fn component_works(eta: f64, q: f64) -> (f64, f64) {
    let red = 0.5 * (1.0 + eta);
    let blue = 0.5 * (q + eta + eta * eta - q * eta * eta);
    (red, blue)
}

/// Root of `quantum_work(η, 1) − classical_bound(η)` on `(−1, 0)`.
pub fn violation_threshold_eta() -> f64 {
    let gap = |eta: f64| quantum_work(eta, 1.0) - classical_bound(eta);
    let (mut lo, mut hi) = (-0.99_f64, 0.0_f64);
    assert!(gap(lo) < 0.0 && gap(hi) > 0.0, "threshold bracket lost");
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if gap(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Smallest `q ∈ [0, 1]` whose quantum work reaches the classical bound, or
/// `None` if even `q = 1` falls short.
///
/// `quantum_work` is affine in `q`, so this is a direct solve. A value of
/// `q*` exceeding one by less than `1e-9` is clamped to one so the
/// boundary still meets `q = 1` at the bisected threshold.
pub fn violation_boundary_q(eta: f64) -> Option<f64> {
    let s = transverse(eta);
    let intercept = (1.0 + eta) * (s + eta) / (2.0 * (s + 1.0));
    let slope = (1.0 + eta) * (1.0 - eta) / (2.0 * (s + 1.0));
    let q_star = (classical_bound(eta) - intercept) / slope;
    if q_star <= 0.0 {
        Some(0.0)
    } else if q_star <= 1.0 + 1e-9 {
        Some(q_star.min(1.0))
    } else {
        None
    }
}

/// Reference state `√((1+η)/2)|11⟩ + √((1−η)/2)|00⟩` shared by a qubit and its
/// partner.
pub fn entangled_state(eta: f64) -> Result<DensityMatrix> {
    check_eta(eta)?;
    let a = ((1.0 + eta) / 2.0).sqrt();
    let b = ((1.0 - eta) / 2.0).sqrt();
    let mut ket = crate::qubit::computational_ket(&[1, 1]);
    for (v, w) in ket.iter_mut().zip(crate::qubit::computational_ket(&[0, 0])) {
        *v = *v * c(a, 0.0) + w * c(b, 0.0);
    }
    DensityMatrix::from_ket(&ket)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::density_to_bloch;
    use std::f64::consts::SQRT_2;

    #[test]
    fn gibbs_anchors() {
        assert_eq!(gibbs_state(0.0).unwrap(), DensityMatrix::maximally_mixed(2).unwrap());
        let g = gibbs_state(-0.5).unwrap();
        assert!((g.matrix().get(0, 0).re - 0.25).abs() < 1e-15);
        assert!((g.matrix().get(1, 1).re - 0.75).abs() < 1e-15);
        let cold = gibbs_state(-1.0 + 1e-12).unwrap();
        assert!(cold.matrix().get(1, 1).re > 1.0 - 1e-11);
        assert!(gibbs_state(1.0).is_err());
        assert!(gibbs_state(-1.0).is_err());
        assert!(gibbs_state(f64::NAN).is_err());
    }

    #[test]
    fn temperature_conversions() {
        assert_eq!(eta_from_beta(0.0).unwrap(), 0.0);
        assert!((eta_from_beta(1e3).unwrap() + 1.0).abs() < 1e-15);
        for eta in [-0.99, -0.7, -0.3, -1e-6, 0.0] {
            let beta = beta_from_eta(eta).unwrap();
            assert!((eta_from_beta(beta).unwrap() - eta).abs() < 1e-12);
        }
        assert!(matches!(beta_from_eta(0.2), Err(Error::NoPhysicalTemperature(_))));
        assert!(eta_from_beta(-1.0).is_err());
    }

    #[test]
    fn gates_map_decomposition_states_to_ground() {
        for eta in [-0.9, -0.5, 0.0, 0.4] {
            let set = work_unitaries(eta).unwrap();
            assert_eq!(set.u_z0, UnitaryGate::identity(2).unwrap());
            let s = transverse(eta);
            for (gate, x) in [(&set.u_x_plus, s), (&set.u_x_minus, -s)] {
                let out = apply_unitary(gate, &bloch_to_density(BlochVector::new(x, 0.0, eta).unwrap())).unwrap();
                let r = density_to_bloch(&out).unwrap();
                assert!((r.z + 1.0).abs() < 1e-10, "eta {eta}: {r:?}");
            }
        }
    }

    #[test]
    fn infinite_temperature_gates_have_half_weight_entries() {
        let set = work_unitaries(0.0).unwrap();
        for gate in [&set.u_x_plus, &set.u_x_minus] {
            for v in gate.matrix().entries() {
                assert!((v.norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn work_anchors() {
        let set = work_unitaries(-0.5).unwrap();
        let excited = bloch_to_density(BlochVector::EXCITED);
        assert!((extracted_work(&set.u_z1, &excited).unwrap() - 1.0).abs() < 1e-15);
        let any = bloch_to_density(BlochVector::new(0.1, 0.2, 0.3).unwrap());
        assert_eq!(extracted_work(&set.u_z0, &any).unwrap(), 0.0);
        let r_plus = bloch_to_density(BlochVector::new(transverse(-0.5), 0.0, -0.5).unwrap());
        assert!((extracted_work(&set.u_x_plus, &r_plus).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn observables_closed_form() {
        let obs = work_observables(BlochVector::EXCITED, 0.3);
        assert_eq!(obs.z1, 1.0);
        let r = BlochVector::new(transverse(-0.5), 0.0, -0.5).unwrap();
        assert!((work_observables(r, -0.5).x_plus - 0.25).abs() < 1e-15);
    }

    #[test]
    fn rotation_angles_reproduce_gate_energetics() {
        for eta in [-0.95, -0.5, 0.0, 0.6] {
            let set = work_unitaries(eta).unwrap();
            for r in [
                BlochVector::new(0.3, -0.4, 0.5).unwrap(),
                BlochVector::new(-0.7, 0.1, -0.2).unwrap(),
                BlochVector::EXCITED,
            ] {
                let rho = bloch_to_density(r);
                for button in Button::ALL {
                    let gate = extracted_work(set.gate(button), &rho).unwrap();
                    let rot = extracted_work(&y_rotation(equivalent_rotation_angle(button, eta)), &rho).unwrap();
                    assert!((gate - rot).abs() < 1e-12, "{button} at eta {eta}");
                }
            }
        }
    }

    #[test]
    fn bound_values() {
        assert!((classical_bound(0.0) - 1.0 / (2.0 * SQRT_2)).abs() < 1e-15);
        assert!((classical_bound(-0.5) - 0.145_156_697_331_316).abs() < 1e-13);
    }

    #[test]
    fn quantum_work_values() {
        assert!((quantum_work(0.0, 1.0) - 0.5).abs() < 1e-15);
        for eta in [-0.9, -0.3, 0.2] {
            assert!((quantum_work(eta, 1.0) - 0.5 * (1.0 + eta)).abs() < 1e-15);
        }
        assert!((quantum_work(0.0, SQRT_2 - 1.0) - classical_bound(0.0)).abs() < 1e-15);
    }

    #[test]
    fn component_recombination() {
        let (z, x) = component_works(-0.5, 1.0);
        assert!((x - 0.25).abs() < 1e-15 && (z - 0.25).abs() < 1e-15);
        let (z, x) = component_works(0.0, 0.0);
        assert_eq!((z, x), (0.5, 0.0));
        for eta in [-0.8, -0.2, 0.0, 0.5] {
            for q in [0.0, 0.3, 1.0] {
                let (z, x) = component_works(eta, q);
                let c = default_ratio(eta);
                assert!(((z + c * x) / (1.0 + c) - quantum_work(eta, q)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn threshold_and_boundary() {
        let t = violation_threshold_eta();
        assert!((t + (2.0 * (SQRT_2 - 1.0)).sqrt()).abs() < 1e-9);
        assert!(quantum_work(t + 0.01, 1.0) > classical_bound(t + 0.01));
        assert!(quantum_work(t - 0.01, 1.0) < classical_bound(t - 0.01));
        assert!((violation_boundary_q(0.0).unwrap() - (SQRT_2 - 1.0)).abs() < 1e-12);
        assert_eq!(violation_boundary_q(-0.95), None);
        assert!((violation_boundary_q(t).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn params_validation() {
        assert!(EngineParams::new(1.0, 0.5).is_err());
        assert!(EngineParams::new(-0.5, 1.5).is_err());
        let p = EngineParams::new(-0.6, 0.5).unwrap();
        assert!((p.ratio() - 1.25).abs() < 1e-15);
        assert!(p.with_ratio(0.0).is_err());
        assert_eq!(p.with_ratio(2.0).unwrap().ratio(), 2.0);
        assert!(!EngineParams::new(0.3, 0.0).unwrap().is_physical());
    }

    #[test]
    fn entangled_state_reduces_to_gibbs() {
        let psi = entangled_state(-0.5).unwrap();
        let reduced = psi.partial_trace(&[0]).unwrap();
        assert!(reduced.matrix().max_abs_diff(gibbs_state(-0.5).unwrap().matrix()) < 1e-15);
    }
}
