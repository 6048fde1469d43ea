//! Generator/load reordering of the admittance matrix.
//!
//! With generator buses first, `Y_bus` splits as
//!
//! ```text
//! [ I_G ]   [ Y_GG  Y_GL ] [ V_G ]
//! [ I_L ] = [ Y_LG  Y_LL ] [ V_L ]
//! ```
//!
//! The blocks are pure permutations of the source entries; no arithmetic is
//! performed.

use std::collections::HashMap;

use thiserror::Error;

use crate::case_io::{BusId, BusKind, GridCase};
use crate::linalg::ComplexMatrix;
use crate::ybus::AdmittanceMatrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PartitionError {
    #[error("bus {0} has no declared kind in the case")]
    MissingKind(BusId),
}

#[derive(Debug, Clone)]
pub struct PartitionedYbus {
    pub gen_order: Vec<BusId>,
    pub load_order: Vec<BusId>,
    /// `m × m`
    pub y_gg: ComplexMatrix,
    /// `m × n`
    pub y_gl: ComplexMatrix,
    /// `n × m`
    pub y_lg: ComplexMatrix,
    /// `n × n`
    pub y_ll: ComplexMatrix,
}

impl PartitionedYbus {
    /// Number of generator buses.
    pub fn m(&self) -> usize {
        self.gen_order.len()
    }

    /// Number of load buses.
    pub fn n(&self) -> usize {
        self.load_order.len()
    }

    /// Reassembles the full matrix in the given bus order. Panics if `order`
    /// names a bus that is not in the partition.
    pub fn reassemble(&self, order: &[BusId]) -> ComplexMatrix {
        let mut loc: HashMap<BusId, (bool, usize)> = HashMap::new();
        for (k, &id) in self.gen_order.iter().enumerate() {
            loc.insert(id, (true, k));
        }
        for (k, &id) in self.load_order.iter().enumerate() {
            loc.insert(id, (false, k));
        }
        ComplexMatrix::from_fn(order.len(), order.len(), |i, j| {
            let (gi, a) = loc[&order[i]];
            let (gj, b) = loc[&order[j]];
            match (gi, gj) {
                (true, true) => self.y_gg[(a, b)],
                (true, false) => self.y_gl[(a, b)],
                (false, true) => self.y_lg[(a, b)],
                (false, false) => self.y_ll[(a, b)],
            }
        })
    }

    /// The reordered matrix `[[Y_GG, Y_GL], [Y_LG, Y_LL]]`.
    pub fn reordered(&self) -> ComplexMatrix {
        let order: Vec<BusId> = self
            .gen_order
            .iter()
            .chain(&self.load_order)
            .copied()
            .collect();
        self.reassemble(&order)
    }
}

/// Splits `y` into generator and load blocks using the bus kinds of `case`.
/// Within each group buses keep their order in `y`.
pub fn partition(y: &AdmittanceMatrix, case: &GridCase) -> Result<PartitionedYbus, PartitionError> {
    let kinds: HashMap<BusId, BusKind> = case.buses.iter().map(|b| (b.id, b.kind)).collect();
    let mut gen_idx = Vec::new();
    let mut load_idx = Vec::new();
    for (k, &id) in y.bus_ids().iter().enumerate() {
        match kinds.get(&id) {
            Some(BusKind::Generator) => gen_idx.push(k),
            Some(BusKind::Load) => load_idx.push(k),
            None => return Err(PartitionError::MissingKind(id)),
        }
    }
    let m = y.matrix();
    let ids = y.bus_ids();
    Ok(PartitionedYbus {
        gen_order: gen_idx.iter().map(|&k| ids[k]).collect(),
        load_order: load_idx.iter().map(|&k| ids[k]).collect(),
        y_gg: m.select(&gen_idx, &gen_idx),
        y_gl: m.select(&gen_idx, &load_idx),
        y_lg: m.select(&load_idx, &gen_idx),
        y_ll: m.select(&load_idx, &load_idx),
    })
}

/// `max |Y_LG − Y_GLᵀ|`.
pub fn transpose_check(p: &PartitionedYbus) -> f64 {
    p.y_lg
        .max_abs_diff(&p.y_gl.transpose())
        .expect("Y_LG and Y_GLᵀ share a shape")
}
