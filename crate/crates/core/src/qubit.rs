//! States, gates and measurements for one to four qubits.
//!
//! # Sign and ordering convention
//!
//! The energy eigenstates are labelled |1⟩ (excited, energy 1) and |0⟩
//! (ground, energy 0), and
//!
//! ```text
//!     σ_z = |1⟩⟨1| − |0⟩⟨0|
//! ```
//!
//! so the excited state has Bloch component `z = +1` and
//! `Tr{H_S ρ} = (1 + z)/2` for `H_S = |1⟩⟨1|`. This is the opposite of the
//! usual quantum-information convention.
//!
//! Matrix index 0 of every qubit holds |1⟩ and index 1 holds |0⟩. With that
//! ordering the Pauli matrices take their familiar textbook form. Callers
//! should not rely on raw indices: build states from Bloch vectors or from
//! [`computational_ket`] and read them back the same way. For several qubits
//! the first factor is the most significant one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, hermitian_eigenvalues, trace_norm, ComplexMatrix, ALGEBRAIC_TOL, C64};

/// Eigenvalues of a density matrix may dip this far below zero.
pub const PSD_TOL: f64 = 1e-10;

pub fn sigma_x() -> ComplexMatrix {
    ComplexMatrix::from_real_rows([[0.0, 1.0], [1.0, 0.0]]).unwrap()
}

pub fn sigma_y() -> ComplexMatrix {
    ComplexMatrix::from_rows([[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]]).unwrap()
}

/// `|1⟩⟨1| − |0⟩⟨0|`.
pub fn sigma_z() -> ComplexMatrix {
    ComplexMatrix::from_real_rows([[1.0, 0.0], [0.0, -1.0]]).unwrap()
}

/// Raising operator `|1⟩⟨0|`.
pub fn sigma_plus() -> ComplexMatrix {
    ComplexMatrix::from_real_rows([[0.0, 1.0], [0.0, 0.0]]).unwrap()
}

/// Lowering operator `|0⟩⟨1|`.
pub fn sigma_minus() -> ComplexMatrix {
    ComplexMatrix::from_real_rows([[0.0, 0.0], [1.0, 0.0]]).unwrap()
}

/// Two-qubit exchange operator.
pub fn swap() -> ComplexMatrix {
    ComplexMatrix::from_real_rows([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ])
    .unwrap()
}

/// State vector of the computational basis state with the given physical
/// labels, e.g. `[1, 0]` is |1⟩_A ⊗ |0⟩_B.
pub fn computational_ket(labels: &[u8]) -> Vec<C64> {
    let dim = 1usize << labels.len();
    let index = labels
        .iter()
        .fold(0usize, |acc, &label| (acc << 1) | usize::from(label == 0));
    let mut ket = vec![c(0.0, 0.0); dim];
    ket[index] = c(1.0, 0.0);
    ket
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const ORIGIN: BlochVector = BlochVector { x: 0.0, y: 0.0, z: 0.0 };
    pub const EXCITED: BlochVector = BlochVector { x: 0.0, y: 0.0, z: 1.0 };
    pub const GROUND: BlochVector = BlochVector { x: 0.0, y: 0.0, z: -1.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let r = Self { x, y, z };
        let length = r.length();
        if length.is_nan() || length > 1.0 + ALGEBRAIC_TOL {
            return Err(Error::UnphysicalBloch { x, y, z, length });
        }
        Ok(r)
    }

    pub fn length(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn is_pure(&self) -> bool {
        (self.length() - 1.0).abs() <= ALGEBRAIC_TOL
    }

    pub fn to_density(self) -> DensityMatrix {
        bloch_to_density(self)
    }
}

/// `(I + x σ_x + y σ_y + z σ_z) / 2`.
pub fn bloch_to_density(r: BlochVector) -> DensityMatrix {
    let m = ComplexMatrix::from_rows([
        [c(0.5 * (1.0 + r.z), 0.0), c(0.5 * r.x, -0.5 * r.y)],
        [c(0.5 * r.x, 0.5 * r.y), c(0.5 * (1.0 - r.z), 0.0)],
    ])
    .unwrap();
    DensityMatrix { matrix: m }
}

pub fn density_to_bloch(rho: &DensityMatrix) -> Result<BlochVector> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: rho.dim(),
        });
    }
    let m = &rho.matrix;
    let off = m.get(1, 0);
    Ok(BlochVector {
        x: 2.0 * off.re,
        y: 2.0 * off.im,
        z: (m.get(0, 0) - m.get(1, 1)).re,
    })
}

/// Positive, unit-trace Hermitian matrix on one to four qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let herm = matrix.max_abs_diff(&matrix.adjoint());
        if herm > ALGEBRAIC_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = matrix.trace();
        if (tr - c(1.0, 0.0)).norm() > ALGEBRAIC_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace is {tr}")));
        }
        let min_ev = hermitian_eigenvalues(&matrix)[0];
        if min_ev < -PSD_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {min_ev:.3e}"
            )));
        }
        Ok(Self { matrix })
    }

    /// Wraps a matrix produced by a trace-preserving map of valid states.
    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        debug_assert!(matrix.is_hermitian(1e-9));
        Self { matrix }
    }

    /// Removes the trace drift that accumulates over long chains of maps.
    pub(crate) fn renormalized(self) -> Self {
        let tr = self.matrix.trace().re;
        Self {
            matrix: self.matrix.scale(c(1.0 / tr, 0.0)),
        }
    }

    /// Pure state `|ψ⟩⟨ψ|`; the vector is normalised here.
    pub fn from_ket(ket: &[C64]) -> Result<Self> {
        let norm: f64 = ket.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidDensityMatrix("zero or non-finite state vector".into()));
        }
        let normalised: Vec<C64> = ket.iter().map(|v| v / norm).collect();
        Ok(Self {
            matrix: ComplexMatrix::outer(&normalised)?,
        })
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        let id = ComplexMatrix::identity(dim)?;
        Ok(Self {
            matrix: id.scale(c(1.0 / dim as f64, 0.0)),
        })
    }

    /// Convex combination `Σ w_k ρ_k`; weights must be non-negative and sum to one.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidDensityMatrix("empty mixture".into()))?;
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        if parts.iter().any(|(w, _)| *w < 0.0) || (total - 1.0).abs() > ALGEBRAIC_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "mixture weights must be a probability vector (sum {total})"
            )));
        }
        let mut acc = ComplexMatrix::zeros(first.1.dim())?;
        for (w, rho) in parts {
            acc.same_dim(&rho.matrix)?;
            acc = &acc + &rho.matrix.scale(c(*w, 0.0));
        }
        Ok(Self { matrix: acc })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn n_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn purity(&self) -> f64 {
        self.matrix.matmul(&self.matrix).trace().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    pub fn bloch(&self) -> Result<BlochVector> {
        density_to_bloch(self)
    }

    /// `self ⊗ other`, with `self` as the left factor.
    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        Ok(Self {
            matrix: self.matrix.kron(&other.matrix)?,
        })
    }

    /// Reduced state on the qubits listed in `keep` (strictly increasing,
    /// qubit 0 is the leftmost factor).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let n = self.n_qubits();
        validate_keep(keep, n)?;
        let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
        let out_dim = 1usize << keep.len();
        let mut out = vec![c(0.0, 0.0); out_dim * out_dim];
        let place = |sub: usize, qubits: &[usize]| -> usize {
            qubits.iter().enumerate().fold(0usize, |acc, (k, &q)| {
                let bit = (sub >> (qubits.len() - 1 - k)) & 1;
                acc | (bit << (n - 1 - q))
            })
        };
        for i in 0..out_dim {
            let bi = place(i, keep);
            for j in 0..out_dim {
                let bj = place(j, keep);
                let mut acc = c(0.0, 0.0);
                for t in 0..(1usize << traced.len()) {
                    let bt = place(t, &traced);
                    acc += self.matrix.get(bi | bt, bj | bt);
                }
                out[i * out_dim + j] = acc;
            }
        }
        Ok(Self {
            matrix: ComplexMatrix::from_row_major(out)?,
        })
    }

    /// Reorders the tensor factors: qubit `k` of the result is qubit
    /// `order[k]` of `self`.
    pub fn permute_qubits(&self, order: &[usize]) -> Result<DensityMatrix> {
        Ok(Self {
            matrix: permute_qubits(&self.matrix, order)?,
        })
    }
}

/// Operator version of [`DensityMatrix::permute_qubits`]; every embedding of
/// a subsystem operator into a larger register goes through here.
pub fn permute_qubits(m: &ComplexMatrix, order: &[usize]) -> Result<ComplexMatrix> {
    let n = m.dim().trailing_zeros() as usize;
    let mut seen = vec![false; n];
    if order.len() != n || order.iter().any(|&q| q >= n || std::mem::replace(&mut seen[q], true)) {
        return Err(Error::InvalidSubsystems(format!(
            "{order:?} is not a permutation of {n} qubits"
        )));
    }
    let dim = m.dim();
    let map = |new_index: usize| -> usize {
        (0..n).fold(0usize, |acc, k| {
            let bit = (new_index >> (n - 1 - k)) & 1;
            acc | (bit << (n - 1 - order[k]))
        })
    };
    let old_of: Vec<usize> = (0..dim).map(map).collect();
    let mut out = vec![c(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            out[i * dim + j] = m.get(old_of[i], old_of[j]);
        }
    }
    ComplexMatrix::from_row_major(out)
}

fn validate_keep(keep: &[usize], n: usize) -> Result<()> {
    if keep.is_empty() {
        return Err(Error::InvalidSubsystems("nothing to keep".into()));
    }
    if keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&q| q >= n) {
        return Err(Error::InvalidSubsystems(format!(
            "{keep:?} must be strictly increasing qubit indices below {n}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryGate {
    matrix: ComplexMatrix,
}

impl UnitaryGate {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let id = ComplexMatrix::identity(matrix.dim())?;
        let dev = matrix.adjoint().matmul(&matrix).max_abs_diff(&id);
        if dev > ALGEBRAIC_TOL {
            return Err(Error::NotUnitary(dev));
        }
        Ok(Self { matrix })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Ok(Self {
            matrix: ComplexMatrix::identity(dim)?,
        })
    }

    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        debug_assert!(matrix.is_unitary(1e-9));
        Self { matrix }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn adjoint(&self) -> UnitaryGate {
        Self {
            matrix: self.matrix.adjoint(),
        }
    }

    /// `self ⊗ other`, with `self` as the left factor.
    pub fn tensor(&self, other: &UnitaryGate) -> Result<UnitaryGate> {
        Ok(Self {
            matrix: self.matrix.kron(&other.matrix)?,
        })
    }

    /// Gate product `self · other` (apply `other` first).
    pub fn compose(&self, other: &UnitaryGate) -> Result<UnitaryGate> {
        Ok(Self {
            matrix: self.matrix.try_mul(&other.matrix)?,
        })
    }

    pub fn approx_eq_up_to_phase(&self, other: &UnitaryGate, tol: f64) -> bool {
        self.matrix.approx_eq_up_to_phase(&other.matrix, tol)
    }
}

/// `U ρ U†`.
pub fn apply_unitary(u: &UnitaryGate, rho: &DensityMatrix) -> Result<DensityMatrix> {
    Ok(DensityMatrix::from_trusted(rho.matrix.conjugate_by(&u.matrix)?))
}

/// `Tr{O ρ}` for a Hermitian observable.
pub fn expectation(observable: &ComplexMatrix, rho: &DensityMatrix) -> Result<f64> {
    let herm = observable.max_abs_diff(&observable.adjoint());
    if herm > ALGEBRAIC_TOL {
        return Err(Error::NotHermitian(herm));
    }
    let value = observable.try_mul(&rho.matrix)?.trace();
    debug_assert!(value.im.abs() < 1e-10, "imaginary expectation {value}");
    Ok(value.re)
}

/// `½ ‖ρ − σ‖₁`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    rho.matrix.same_dim(&sigma.matrix)?;
    Ok((0.5 * trace_norm(&(&rho.matrix - &sigma.matrix))).clamp(0.0, 1.0))
}

/// Complete set of orthogonal single-qubit projectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveBasis {
    projectors: Vec<ComplexMatrix>,
}

impl ProjectiveBasis {
    pub fn new(projectors: Vec<ComplexMatrix>) -> Result<Self> {
        let first = projectors
            .first()
            .ok_or_else(|| Error::IncompleteMeasurement("no projectors".into()))?;
        let dim = first.dim();
        let mut sum = ComplexMatrix::zeros(dim)?;
        for (k, p) in projectors.iter().enumerate() {
            p.same_dim(first)?;
            if !p.is_hermitian(ALGEBRAIC_TOL) {
                return Err(Error::IncompleteMeasurement(format!("projector {k} is not Hermitian")));
            }
            if p.matmul(p).max_abs_diff(p) > ALGEBRAIC_TOL {
                return Err(Error::IncompleteMeasurement(format!("projector {k} is not idempotent")));
            }
            for (l, other) in projectors.iter().enumerate().skip(k + 1) {
                if p.matmul(other).entries().iter().any(|v| v.norm() > ALGEBRAIC_TOL) {
                    return Err(Error::IncompleteMeasurement(format!(
                        "projectors {k} and {l} are not orthogonal"
                    )));
                }
            }
            sum = &sum + p;
        }
        if sum.max_abs_diff(&ComplexMatrix::identity(dim)?) > ALGEBRAIC_TOL {
            return Err(Error::IncompleteMeasurement("projectors do not sum to identity".into()));
        }
        Ok(Self { projectors })
    }

    /// Spin measurement along the unit vector `axis`; outcome 0 is the `+`
    /// eigenprojector `(I + n·σ)/2`, outcome 1 the `−` one.
    pub fn along(axis: BlochVector) -> Result<Self> {
        if !axis.is_pure() {
            return Err(Error::IncompleteMeasurement("measurement axis must be a unit vector".into()));
        }
        let plus = bloch_to_density(axis).matrix;
        let minus = bloch_to_density(BlochVector {
            x: -axis.x,
            y: -axis.y,
            z: -axis.z,
        })
        .matrix;
        Self::new(vec![plus, minus])
    }

    /// σ_z measurement: outcome 0 is |1⟩, outcome 1 is |0⟩.
    pub fn z() -> Self {
        Self::along(BlochVector::EXCITED).unwrap()
    }

    /// σ_x measurement: outcome 0 is |+⟩, outcome 1 is |−⟩.
    pub fn x() -> Self {
        Self::along(BlochVector { x: 1.0, y: 0.0, z: 0.0 }).unwrap()
    }

    pub fn projectors(&self) -> &[ComplexMatrix] {
        &self.projectors
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }
}

/// One outcome of a steering measurement on the second factor.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeredOutcome {
    pub probability: f64,
    /// Normalised conditional state of the first factor. For an outcome of
    /// probability zero this is the unconditional reduced state.
    pub state: DensityMatrix,
}

/// Measures the second qubit of a two-qubit state in `basis` and returns the
/// outcome probabilities with the conditional states of the first qubit.
pub fn steer(rho_ab: &DensityMatrix, basis: &ProjectiveBasis) -> Result<Vec<SteeredOutcome>> {
    if rho_ab.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: rho_ab.dim(),
        });
    }
    if basis.projectors[0].dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: basis.projectors[0].dim(),
        });
    }
    let id = ComplexMatrix::identity(2)?;
    let marginal = rho_ab.partial_trace(&[0])?;
    basis
        .projectors
        .iter()
        .map(|p| {
            let lifted = id.kron(p)?;
            let sandwiched = lifted.matmul(&rho_ab.matrix).matmul(&lifted);
            let unnormalised = DensityMatrix::from_trusted(sandwiched).partial_trace(&[0])?;
            let probability = unnormalised.matrix.trace().re.max(0.0);
            let state = if probability > 1e-15 {
                DensityMatrix::from_trusted(unnormalised.matrix.scale(c(1.0 / probability, 0.0)))
            } else {
                marginal.clone()
            };
            Ok(SteeredOutcome { probability, state })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn excited() -> DensityMatrix {
        DensityMatrix::from_ket(&computational_ket(&[1])).unwrap()
    }

    fn ground() -> DensityMatrix {
        DensityMatrix::from_ket(&computational_ket(&[0])).unwrap()
    }

    #[test]
    fn bloch_anchors() {
        let mixed = bloch_to_density(BlochVector::ORIGIN);
        assert_eq!(mixed, DensityMatrix::maximally_mixed(2).unwrap());
        assert!(bloch_to_density(BlochVector::EXCITED).matrix().max_abs_diff(excited().matrix()) < 1e-15);
        assert_eq!(density_to_bloch(&ground()).unwrap(), BlochVector::GROUND);
        assert_eq!(density_to_bloch(&mixed).unwrap(), BlochVector::ORIGIN);
    }

    #[test]
    fn tilted_state_populations() {
        let eta: f64 = -0.5;
        let r = BlochVector::new((1.0 - eta * eta).sqrt(), 0.0, eta).unwrap();
        let rho = bloch_to_density(r);
        // (|1⟩, |0⟩) populations.
        assert!((rho.matrix().get(0, 0).re - 0.25).abs() < 1e-15);
        assert!((rho.matrix().get(1, 1).re - 0.75).abs() < 1e-15);
        let h = ComplexMatrix::diagonal(&[1.0, 0.0]).unwrap();
        assert!((expectation(&h, &rho).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn unphysical_bloch_rejected() {
        assert!(matches!(
            BlochVector::new(0.8, 0.0, 0.8),
            Err(Error::UnphysicalBloch { .. })
        ));
        assert!(BlochVector::new(f64::NAN, 0.0, 0.0).is_err());
    }

    #[test]
    fn sigma_x_flips_excited_state() {
        let x = UnitaryGate::new(sigma_x()).unwrap();
        let out = apply_unitary(&x, &excited()).unwrap();
        assert!(out.matrix().max_abs_diff(ground().matrix()) < 1e-15);
        let id = UnitaryGate::identity(2).unwrap();
        let rho = bloch_to_density(BlochVector::new(0.3, -0.2, 0.1).unwrap());
        assert_eq!(apply_unitary(&id, &rho).unwrap(), rho);
    }

    #[test]
    fn product_projector() {
        let p = excited().tensor(&ground()).unwrap();
        let target = DensityMatrix::from_ket(&computational_ket(&[1, 0])).unwrap();
        assert_eq!(p, target);
        assert!((p.purity() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn expectation_rejects_non_hermitian() {
        assert!(matches!(
            expectation(&sigma_plus(), &excited()),
            Err(Error::NotHermitian(_))
        ));
        assert!((expectation(&sigma_z(), &excited()).unwrap() - 1.0).abs() < 1e-15);
        let id = ComplexMatrix::identity(2).unwrap();
        assert!((expectation(&id, &ground()).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn partial_trace_invalid_selection() {
        let rho = DensityMatrix::maximally_mixed(4).unwrap();
        assert!(rho.partial_trace(&[]).is_err());
        assert!(rho.partial_trace(&[2]).is_err());
        assert!(rho.partial_trace(&[1, 0]).is_err());
    }

    #[test]
    fn bell_state_is_locally_mixed() {
        let mut ket = computational_ket(&[1, 1]);
        for (a, b) in ket.iter_mut().zip(computational_ket(&[0, 0])) {
            *a += b;
        }
        let bell = DensityMatrix::from_ket(&ket).unwrap();
        let reduced = bell.partial_trace(&[1]).unwrap();
        assert!(reduced.matrix().max_abs_diff(DensityMatrix::maximally_mixed(2).unwrap().matrix()) < 1e-15);
    }

    #[test]
    fn permutation_moves_factors() {
        let a = excited();
        let b = ground();
        let m = bloch_to_density(BlochVector::ORIGIN);
        let abm = a.tensor(&b).unwrap().tensor(&m).unwrap();
        let mab = m.tensor(&a).unwrap().tensor(&b).unwrap();
        // New qubit 0 is old qubit 2, and so on.
        let permuted = abm.permute_qubits(&[2, 0, 1]).unwrap();
        assert!(permuted.matrix().max_abs_diff(mab.matrix()) < 1e-15);
        assert!(abm.permute_qubits(&[0, 0, 1]).is_err());
    }

    #[test]
    fn measurement_validation() {
        let p = ComplexMatrix::diagonal(&[1.0, 0.0]).unwrap();
        assert!(matches!(
            ProjectiveBasis::new(vec![p.clone()]),
            Err(Error::IncompleteMeasurement(_))
        ));
        assert!(ProjectiveBasis::new(vec![p.clone(), p]).is_err());
        assert_eq!(ProjectiveBasis::z().len(), 2);
    }

    #[test]
    fn steering_a_product_state_changes_nothing() {
        let rho_s = bloch_to_density(BlochVector::new(0.2, 0.1, -0.4).unwrap());
        let rho_e = bloch_to_density(BlochVector::new(-0.5, 0.3, 0.2).unwrap());
        let joint = rho_s.tensor(&rho_e).unwrap();
        for basis in [ProjectiveBasis::z(), ProjectiveBasis::x()] {
            for outcome in steer(&joint, &basis).unwrap() {
                assert!(outcome.state.matrix().max_abs_diff(rho_s.matrix()) < 1e-14);
            }
        }
    }

    #[test]
    fn trace_distance_extremes() {
        assert!(trace_distance(&excited(), &excited()).unwrap() < 1e-15);
        assert!((trace_distance(&excited(), &ground()).unwrap() - 1.0).abs() < 1e-15);
        let four = DensityMatrix::maximally_mixed(4).unwrap();
        assert!(trace_distance(&four, &excited()).is_err());
    }

    #[test]
    fn density_validation() {
        let bad = ComplexMatrix::diagonal(&[1.5, -0.5]).unwrap();
        assert!(matches!(
            DensityMatrix::new(bad),
            Err(Error::InvalidDensityMatrix(_))
        ));
        let untraced = ComplexMatrix::diagonal(&[0.5, 0.2]).unwrap();
        assert!(DensityMatrix::new(untraced).is_err());
        assert!(matches!(
            DensityMatrix::new(sigma_plus()),
            Err(Error::NotHermitian(_))
        ));
    }
}
