//! Sparse boundary maps between gauge generators, qubits, measured
//! operators, stabilizer sites and relations.

use crate::code::{Color, SubsystemCode};
use crate::error::{Error, Result};
use crate::gf2::{Basis, BitVec, SparseMatrix};
use crate::matching::MatchingGraph;

/// All maps are column-sparse; `apply` is XOR-scatter.
#[derive(Clone, Debug)]
pub struct ChainComplex {
    /// X-gauge generators → qubits (∂_Q).
    pub d_q: SparseMatrix,
    /// Qubits → measured Z-gauge operators (δ_M).
    pub d_m: SparseMatrix,
    /// Measured operators → stabilizer sites, BG edges only (δ_S).
    pub d_s: SparseMatrix,
    /// Measured operators → stabilizer sites, BY edges only (cross-check).
    pub d_s_by: SparseMatrix,
    /// Measured operators → relations (δ_R).
    pub d_r: SparseMatrix,
    /// Qubits → stabilizer sites (∂_S = δ_S δ_M).
    pub b_s: SparseMatrix,
    pub meas: MatchingGraph,
    pub qubits: MatchingGraph,
}

fn u32s(v: impl IntoIterator<Item = usize>) -> Vec<u32> {
    v.into_iter().map(|x| x as u32).collect()
}

pub fn build_chain(code: &SubsystemCode) -> Result<ChainComplex> {
    let n = code.n();
    let n_meas = code.z_gauge.len();
    let mg = &code.meas_graph;
    let qg = &code.qubit_graph;
    let n_stab = qg.interior().len();
    let n_rel = mg.interior().len();

    let d_q = SparseMatrix::from_columns(
        Basis::Qubits,
        Basis::XGauge,
        n,
        code.x_gauge.iter().map(|g| u32s(g.support.iter().copied())).collect(),
    );

    let mut by_qubit = vec![Vec::new(); n];
    for (m, g) in code.z_gauge.iter().enumerate() {
        for &q in &g.support {
            by_qubit[q].push(m as u32);
        }
    }
    let d_m = SparseMatrix::from_columns(Basis::Meas, Basis::Qubits, n_meas, by_qubit);

    let stab_site = |cell: usize| qg.vertex_of_lattice(cell).and_then(|v| qg.interior_index(v));
    let d_s_class = |class: Color| {
        let cols = code
            .z_gauge
            .iter()
            .map(|g| if g.class == class { u32s(stab_site(g.cell)) } else { Vec::new() })
            .collect();
        SparseMatrix::from_columns(Basis::Stabilizers, Basis::Meas, n_stab, cols)
    };
    let d_s = d_s_class(Color::G);
    let d_s_by = d_s_class(Color::Y);

    let d_r = SparseMatrix::from_columns(
        Basis::Relations,
        Basis::Meas,
        n_rel,
        (0..n_meas).map(|e| u32s(mg.interior_endpoints(e).map(|v| mg.interior_index(v).unwrap()))).collect(),
    );
    let b_s = SparseMatrix::from_columns(
        Basis::Stabilizers,
        Basis::Qubits,
        n_stab,
        (0..n).map(|e| u32s(qg.interior_endpoints(e).map(|v| qg.interior_index(v).unwrap()))).collect(),
    );

    let cc = ChainComplex {
        d_q,
        d_m,
        d_s,
        d_s_by,
        d_r,
        b_s,
        meas: MatchingGraph::new(mg.clone()),
        qubits: MatchingGraph::new(qg.clone()),
    };
    cc.check_identities()?;
    Ok(cc)
}

impl ChainComplex {
    pub fn n_qubits(&self) -> usize {
        self.d_m.n_cols()
    }

    pub fn n_meas(&self) -> usize {
        self.d_m.n_rows()
    }

    pub fn n_x_gauge(&self) -> usize {
        self.d_q.n_cols()
    }

    pub fn n_stab(&self) -> usize {
        self.b_s.n_rows()
    }

    pub fn n_rel(&self) -> usize {
        self.d_r.n_rows()
    }

    fn check_identities(&self) -> Result<()> {
        let n = self.n_qubits();
        for g in 0..self.n_x_gauge() {
            let col = BitVec::from_indices(Basis::Qubits, n, self.d_q.column(g).iter().map(|&q| q as usize));
            let s = self.b_s.apply(&col)?;
            if !s.is_zero() {
                return Err(Error::Identity(format!("X-gauge generator {g} has nonzero stabilizer syndrome")));
            }
        }
        for q in 0..n {
            let e = BitVec::from_indices(Basis::Qubits, n, [q]);
            let flux = self.d_m.apply(&e)?;
            if !self.d_r.apply(&flux)?.is_zero() {
                return Err(Error::Identity(format!("qubit {q} has nonzero relation syndrome")));
            }
            if self.d_s.apply(&flux)? != self.b_s.apply(&e)? {
                return Err(Error::Identity(format!("qubit {q}: BG syndrome of its flux differs from its boundary")));
            }
        }
        Ok(())
    }

    /// ∂_Q γ.
    pub fn gauge_support(&self, gamma: &BitVec) -> Result<BitVec> {
        Ok(self.d_q.apply(gamma)?)
    }

    /// ∂_S ε.
    pub fn stab_syndrome(&self, eps: &BitVec) -> Result<BitVec> {
        Ok(self.b_s.apply(eps)?)
    }
}

/// ζ = δ_M ε + μ + δ_M ∂_Q γ.
pub fn measurement_outcome(cc: &ChainComplex, eps: &BitVec, mu: &BitVec, gamma: &BitVec) -> Result<BitVec> {
    let mut err = cc.d_q.apply(gamma)?;
    err.try_xor_assign(eps)?;
    let mut zeta = cc.d_m.apply(&err)?;
    zeta.try_xor_assign(mu)?;
    Ok(zeta)
}

/// Stabilizer syndrome of a flux, computed from BG edges and from BY edges.
/// The two must agree for any flux obeying the Gauss law.
pub fn flux_syndrome_two_ways(cc: &ChainComplex, phi: &BitVec) -> Result<BitVec> {
    let rel = cc.d_r.apply(phi)?;
    if !rel.is_zero() {
        return Err(Error::InvalidFlux(rel.weight()));
    }
    let bg = cc.d_s.apply(phi)?;
    let by = cc.d_s_by.apply(phi)?;
    if bg != by {
        return Err(Error::Identity("BG and BY syndromes of a valid flux differ".into()));
    }
    Ok(bg)
}
