//! Collision models, simulated with exact unitaries.
//!
//! * Work extraction: Bob's qubit `S` meets a stream of ancillas `A` through
//!   `exp(−iΔφ(σ₊⊗σ₋ + σ₋⊗σ₊))`. Ancillas start in `(|0⟩ − i|1⟩)/√2`, which
//!   makes the reduced dynamics of `S` converge to `exp(−iφσ_y/2)`. With
//!   `H_A = σ_z/2` the exchange conserves `H_S + H_A` exactly, so the ancillas
//!   absorb precisely the energy `S` loses.
//! * Thermalization: `S` and a control qubit `C` meet fresh two-qubit
//!   subenvironments `E E'` prepared in `|Ψ⟩`. The register is ordered
//!   `(S, E, E', C)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{check_eta, entangled_state, hamiltonian};
use crate::error::{Error, Result};
use crate::linalg::{c, ComplexMatrix};
use crate::qubit::{
    expectation, swap, trace_distance, BlochVector, DensityMatrix, UnitaryGate,
};

/// `exp(−iΔφ(σ₊⊗σ₋ + σ₋⊗σ₊))`: a rotation on the one-excitation block
/// `{|10⟩, |01⟩}`, identity on `|11⟩` and `|00⟩`.
pub fn work_collision_unitary(delta_phi: f64) -> UnitaryGate {
    let (s, co) = delta_phi.sin_cos();
    let mut m = ComplexMatrix::identity(4).unwrap();
    m.set(1, 1, c(co, 0.0));
    m.set(2, 2, c(co, 0.0));
    m.set(1, 2, c(0.0, -s));
    m.set(2, 1, c(0.0, -s));
    UnitaryGate::from_trusted(m)
}

/// Ancilla preparation `(|0⟩ − i|1⟩)/√2`.
pub fn ancilla_state() -> DensityMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    DensityMatrix::from_ket(&[c(0.0, -h), c(h, 0.0)]).unwrap()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkCollisionConfig {
    /// Total rotation angle.
    pub phi: f64,
    /// Number of collisions `K`; each contributes `Δφ = φ/K`.
    pub steps: usize,
    /// `H_A = scale · σ_z`; the level spacing is `2·scale`.
    pub ancilla_hamiltonian_scale: f64,
}

impl WorkCollisionConfig {
    pub const DEFAULT_SCALE: f64 = 0.5;

    pub fn new(phi: f64, steps: usize) -> Result<Self> {
        let cfg = Self {
            phi,
            steps,
            ancilla_hamiltonian_scale: Self::DEFAULT_SCALE,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidParameter {
                name: "steps",
                reason: "need at least one collision".into(),
            });
        }
        if !self.phi.is_finite() {
            return Err(Error::InvalidParameter {
                name: "phi",
                reason: format!("{} is not finite", self.phi),
            });
        }
        if !(self.ancilla_hamiltonian_scale.is_finite() && self.ancilla_hamiltonian_scale > 0.0) {
            return Err(Error::InvalidParameter {
                name: "ancilla_hamiltonian_scale",
                reason: format!("{} must be positive", self.ancilla_hamiltonian_scale),
            });
        }
        Ok(())
    }

    pub fn level_spacing(&self) -> f64 {
        2.0 * self.ancilla_hamiltonian_scale
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AncillaRecord {
    pub mean_energy_gain: f64,
    pub excitation_probability: f64,
    pub level_spacing: f64,
    pub sampled_outcome: Option<bool>,
}

impl AncillaRecord {
    /// Energy gained if the ancilla is found excited (`true`) or not.
    pub fn gain_for(&self, excited: bool) -> f64 {
        self.level_spacing * (if excited { 0.5 } else { -0.5 })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkExtraction {
    pub final_state: DensityMatrix,
    pub records: Vec<AncillaRecord>,
    pub total_mean_work: f64,
    /// `Tr{H_S ρ_initial} − Tr{H_S ρ_final}`.
    pub system_energy_drop: f64,
}

impl WorkExtraction {
    /// Energy not accounted for by the ancillas.
    pub fn conservation_residual(&self) -> f64 {
        self.total_mean_work - self.system_energy_drop
    }
}

pub fn run_work_extraction(rho_s: &DensityMatrix, cfg: &WorkCollisionConfig) -> Result<WorkExtraction> {
    cfg.validate()?;
    if rho_s.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: rho_s.dim(),
        });
    }
    let u = work_collision_unitary(cfg.phi / cfg.steps as f64);
    let ancilla = ancilla_state();
    let spacing = cfg.level_spacing();
    let mut rho = rho_s.clone();
    let mut records = Vec::with_capacity(cfg.steps);
    let mut total = 0.0;
    for _ in 0..cfg.steps {
        let joint = DensityMatrix::from_trusted(
            rho.tensor(&ancilla)?.matrix().conjugate_by(u.matrix())?,
        );
        rho = joint.partial_trace(&[0])?.renormalized();
        let p = joint.partial_trace(&[1])?.matrix().get(0, 0).re.clamp(0.0, 1.0);
        let gain = spacing * (p - 0.5);
        total += gain;
        records.push(AncillaRecord {
            mean_energy_gain: gain,
            excitation_probability: p,
            level_spacing: spacing,
            sampled_outcome: None,
        });
    }
    let h = hamiltonian();
    let drop = expectation(&h, rho_s)? - expectation(&h, &rho)?;
    Ok(WorkExtraction {
        final_state: rho,
        records,
        total_mean_work: total,
        system_energy_drop: drop,
    })
}

/// Measures every ancilla in its energy basis and returns the summed gain.
pub fn sample_work<R: Rng + ?Sized>(records: &[AncillaRecord], rng: &mut R) -> f64 {
    records
        .iter()
        .map(|r| r.gain_for(rng.random::<f64>() < r.excitation_probability))
        .sum()
}

/// Like [`sample_work`], but stores each outcome in its record.
pub fn sample_outcomes<R: Rng + ?Sized>(records: &mut [AncillaRecord], rng: &mut R) -> f64 {
    records
        .iter_mut()
        .map(|r| {
            let excited = rng.random::<f64>() < r.excitation_probability;
            r.sampled_outcome = Some(excited);
            r.gain_for(excited)
        })
        .sum()
}

/// `√((1+η)/2)|11⟩ + √((1−η)/2)|00⟩` for a subenvironment `E E'`.
pub fn subenv_state(eta: f64) -> Result<DensityMatrix> {
    entangled_state(eta)
}

/// `exp(−iθ SWAP) = cos θ · I − i sin θ · SWAP`.
pub fn swap_coupling(theta: f64) -> UnitaryGate {
    exchange(&swap(), theta)
}

fn exchange(involution: &ComplexMatrix, theta: f64) -> UnitaryGate {
    let (s, co) = theta.sin_cos();
    let id = ComplexMatrix::identity(involution.dim()).unwrap();
    UnitaryGate::from_trusted(&id.scale(c(co, 0.0)) + &involution.scale(c(0.0, -s)))
}

/// How one subenvironment couples to `S` and `C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingScheme {
    /// `exp(−iθ SWAP_SE · SWAP_E'C)`: both exchanges happen together or not
    /// at all. `|Ψ⟩_SC` is an exact fixed point.
    #[default]
    JointExchange,
    /// `exp(−iθ SWAP_SE) · exp(−iθ SWAP_E'C)`: two independent partial
    /// swaps. Bob's reduced dynamics then ignore `C`, and `|Ψ⟩_SC` is not
    /// stationary.
    LocalSwaps,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalizationConfig {
    pub eta: f64,
    /// `θ = √(γΔt)` per collision.
    pub coupling: f64,
    pub steps: usize,
    pub scheme: CouplingScheme,
}

impl ThermalizationConfig {
    pub fn new(eta: f64, coupling: f64, steps: usize) -> Result<Self> {
        let cfg = Self {
            eta,
            coupling,
            steps,
            scheme: CouplingScheme::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        check_eta(self.eta)?;
        if !(self.coupling > 0.0 && self.coupling <= std::f64::consts::FRAC_PI_2) {
            return Err(Error::InvalidParameter {
                name: "coupling",
                reason: format!("θ = {} must lie in (0, π/2]", self.coupling),
            });
        }
        if self.steps == 0 {
            return Err(Error::InvalidParameter {
                name: "steps",
                reason: "need at least one collision".into(),
            });
        }
        Ok(())
    }
}

/// One-collision map on `ρ_SC`, precomputed for repeated use.
#[derive(Debug, Clone)]
pub struct Thermalizer {
    unitary: UnitaryGate,
    subenv: DensityMatrix,
}

impl Thermalizer {
    pub fn new(eta: f64, theta: f64, scheme: CouplingScheme) -> Result<Self> {
        let id4 = ComplexMatrix::identity(4)?;
        let swap_se = swap().kron(&id4)?;
        let swap_ec = id4.kron(&swap())?;
        let unitary = match scheme {
            CouplingScheme::JointExchange => exchange(&swap_se.matmul(&swap_ec), theta),
            CouplingScheme::LocalSwaps => exchange(&swap_se, theta).compose(&exchange(&swap_ec, theta))?,
        };
        Ok(Self {
            unitary,
            subenv: subenv_state(eta)?,
        })
    }

    pub fn from_config(cfg: &ThermalizationConfig) -> Result<Self> {
        Self::new(cfg.eta, cfg.coupling, cfg.scheme)
    }

    pub fn step(&self, rho_sc: &DensityMatrix) -> Result<DensityMatrix> {
        if rho_sc.dim() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                found: rho_sc.dim(),
            });
        }
        // (S, C, E, E') -> (S, E, E', C)
        let register = rho_sc.tensor(&self.subenv)?.permute_qubits(&[0, 2, 3, 1])?;
        let evolved = DensityMatrix::from_trusted(register.matrix().conjugate_by(self.unitary.matrix())?);
        evolved.partial_trace(&[0, 3])
    }
}

pub fn thermalization_step(rho_sc: &DensityMatrix, cfg: &ThermalizationConfig) -> Result<DensityMatrix> {
    Thermalizer::from_config(cfg)?.step(rho_sc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThermalizationSample {
    pub step: usize,
    pub trace_distance: f64,
    pub s_bloch: BlochVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThermalizationRun {
    pub final_state: DensityMatrix,
    /// Step 0 is the initial state.
    pub trajectory: Vec<ThermalizationSample>,
    /// First step whose distance to `|Ψ⟩_SC` is below the tolerance.
    pub converged_at: Option<usize>,
}

pub fn run_thermalization(
    rho0: &DensityMatrix,
    cfg: &ThermalizationConfig,
    tolerance: f64,
) -> Result<ThermalizationRun> {
    cfg.validate()?;
    let map = Thermalizer::from_config(cfg)?;
    let target = entangled_state(cfg.eta)?;
    let sample = |step: usize, rho: &DensityMatrix| -> Result<ThermalizationSample> {
        Ok(ThermalizationSample {
            step,
            trace_distance: trace_distance(rho, &target)?,
            s_bloch: rho.partial_trace(&[0])?.bloch()?,
        })
    };
    let mut rho = rho0.clone();
    let mut trajectory = Vec::with_capacity(cfg.steps + 1);
    trajectory.push(sample(0, &rho)?);
    for step in 1..=cfg.steps {
        rho = map.step(&rho)?;
        trajectory.push(sample(step, &rho)?);
    }
    let converged_at = trajectory
        .iter()
        .find(|s| s.trace_distance < tolerance)
        .map(|s| s.step);
    Ok(ThermalizationRun {
        final_state: rho,
        trajectory,
        converged_at,
    })
}
