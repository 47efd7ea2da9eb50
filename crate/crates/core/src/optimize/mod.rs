//! Lower bounds on simultaneous guessing probabilities: exact binary
//! discrimination, an iterative M-ary discriminator, alternating (seesaw)
//! optimization of the two parties' POVMs, and a grid oracle for qubits.

mod brute;
mod discrimination;
mod seesaw;

pub use brute::brute_force_pguess_qubit;
pub use discrimination::{
    discrimination_fixed_point, helstrom, helstrom_operators, AutoDiscriminator, Discrimination,
    Discriminator, FixedPoint, Helstrom,
};
pub use seesaw::{
    contract_with_first, contract_with_second, pwin_unif_seesaw, pwin_unif_seesaw_on_keys,
    seesaw_pguess, seesaw_pguess_from, SeesawConfig, SeesawResult,
};
