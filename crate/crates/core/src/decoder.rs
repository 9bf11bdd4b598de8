//! Two-stage single-shot decoder and the logical-failure verdict.

use crate::chain::ChainComplex;
use crate::code::SubsystemCode;
use crate::error::{Error, Result};
use crate::gf2::{Basis, BitVec};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeOutcome {
    /// Estimated measurement error, over measured operators.
    pub mu_hat: BitVec,
    /// Estimated stabilizer syndrome.
    pub sigma_hat: BitVec,
    /// Recovery, over qubits.
    pub chi: BitVec,
}

/// Step one: repair the measurement outcome so that it obeys the Gauss law
/// (matching relation defects on the measurement graph), then read off the
/// stabilizer syndrome from its BG edges.
pub fn estimate_syndrome(cc: &ChainComplex, _code: &SubsystemCode, zeta: &BitVec) -> Result<(BitVec, BitVec)> {
    let rel = cc.d_r.apply(zeta)?;
    let interior = cc.meas.graph().interior();
    let defects: Vec<usize> = rel.ones().map(|i| interior[i]).collect();
    let mu_hat = cc.meas.decode(&defects)?.edge_set.relabel(Basis::Meas);
    let sigma_hat = cc.d_s.apply(&zeta.xor(&mu_hat))?;
    Ok((mu_hat, sigma_hat))
}

/// Step two: minimum-weight recovery for a stabilizer syndrome, by matching
/// on the qubit graph.
pub fn ideal_decode(cc: &ChainComplex, _code: &SubsystemCode, sigma: &BitVec) -> Result<BitVec> {
    if sigma.basis() != Basis::Stabilizers || sigma.len() != cc.n_stab() {
        return Err(Error::Usage(format!("syndrome over {:?} of length {}", sigma.basis(), sigma.len())));
    }
    let interior = cc.qubits.graph().interior();
    let defects: Vec<usize> = sigma.ones().map(|i| interior[i]).collect();
    Ok(cc.qubits.decode(&defects)?.edge_set.relabel(Basis::Qubits))
}

pub fn single_shot_decode(cc: &ChainComplex, code: &SubsystemCode, zeta: &BitVec) -> Result<DecodeOutcome> {
    let (mu_hat, sigma_hat) = estimate_syndrome(cc, code, zeta)?;
    let chi = ideal_decode(cc, code, &sigma_hat)?;
    Ok(DecodeOutcome { mu_hat, sigma_hat, chi })
}

/// Whether a residual X-type operator with trivial stabilizer syndrome acts
/// as a nontrivial logical: odd overlap with the bare Z logical.
pub fn is_logical_error(code: &SubsystemCode, residual: &BitVec) -> Result<bool> {
    if residual.basis() != Basis::Qubits || residual.len() != code.n() {
        return Err(Error::Usage("residual must be over the qubits".into()));
    }
    let syn = code.qubit_graph.relative_boundary(residual, Basis::Stabilizers);
    if !syn.is_zero() {
        return Err(Error::NonzeroSyndrome(syn.weight()));
    }
    Ok(residual.dot(&code.bare_logical_z.bits))
}
