//! Qubit Szilard engine driven by steering: closed-form physics, local
//! hidden-state search, collision models and the game harness.
//!
//! Convention: `σ_z = |1⟩⟨1| − |0⟩⟨0|`, so the excited state has Bloch
//! component `z = +1` and `H_S = |1⟩⟨1|` has unit gap.

pub mod collision;
pub mod engine;
pub mod error;
pub mod game;
pub mod lhs;
pub mod linalg;
pub mod qubit;

pub use engine::{Button, CellColor, EngineParams};
pub use error::{Error, Result};
pub use game::{DemonStrategy, GameConfig, GameMode, GameSummary};
pub use lhs::HiddenStateEnsemble;
pub use qubit::{BlochVector, DensityMatrix, UnitaryGate};
