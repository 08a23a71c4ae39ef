//! Simulator of excitonic qubits in Förster-coupled quantum-dot chains.
//!
//! The crate models occupation qubits (exciton present/absent) on chains of
//! self-assembled dots: Hermitian chain generators and rotating-frame laser
//! drives, unitary and decaying time evolution, pulse-level Bell-state
//! preparation on a stacked dot pair, and the full six-step entanglement
//! distribution sequence with its fidelity budget.
//!
//! Units are meV for energies, ps for times, ps⁻¹ for rates, with
//! ħ = 0.6582119569 meV·ps.

pub mod cli;
pub mod error;
pub mod evolve;
pub mod gates;
pub mod hamiltonian;
pub mod linalg;
pub mod model;
pub mod protocol;

pub use error::{Error, Result};
pub use model::HBAR;

#[cfg(test)]
mod shared_state_tests {
    //! The domain types are immutable after construction and safe to share
    //! across parallel sweep workers.

    fn assert_send_sync<T: Send + Sync>() {}

    #[test]
    fn core_types_are_shareable() {
        assert_send_sync::<crate::model::BasisIndex>();
        assert_send_sync::<crate::model::StateVector>();
        assert_send_sync::<crate::model::ChainSpec>();
        assert_send_sync::<crate::linalg::HermitianMatrix>();
        assert_send_sync::<crate::hamiltonian::DrivenChain>();
        assert_send_sync::<crate::evolve::Trajectory>();
        assert_send_sync::<crate::evolve::StaticPropagator>();
        assert_send_sync::<crate::protocol::DistributionReport>();
    }

    #[test]
    fn parallel_sweeps_reproduce_serial_results() {
        use rayon::prelude::*;

        let serial: Vec<f64> = (2..=8usize)
            .map(|n| crate::evolve::uniform_chain_first_resonance(n, 0.2).unwrap().value)
            .collect();
        let parallel: Vec<f64> = (2..=8usize)
            .into_par_iter()
            .map(|n| crate::evolve::uniform_chain_first_resonance(n, 0.2).unwrap().value)
            .collect();
        assert_eq!(serial, parallel);
    }
}
