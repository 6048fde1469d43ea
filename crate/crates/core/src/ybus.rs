//! Bus admittance matrix assembly.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::case_io::{BusId, GridCase};
use crate::linalg::ComplexMatrix;

/// Entries with magnitude at or below this are treated as structural zeros.
pub const ZERO_ENTRY: f64 = 1e-12;

/// Dense complex `N × N` admittance matrix with its bus ordering.
#[derive(Debug, Clone)]
pub struct AdmittanceMatrix {
    matrix: ComplexMatrix,
    bus_ids: Vec<BusId>,
    bus_index: HashMap<BusId, usize>,
    shunts_included: bool,
}

impl AdmittanceMatrix {
    /// Wraps an existing matrix. Panics if the matrix is not square or the
    /// id list does not match its dimension.
    pub fn from_parts(matrix: ComplexMatrix, bus_ids: Vec<BusId>, shunts_included: bool) -> Self {
        assert!(matrix.is_square(), "admittance matrix must be square");
        assert_eq!(matrix.rows(), bus_ids.len(), "one bus id per row");
        let bus_index = bus_ids.iter().enumerate().map(|(k, &id)| (id, k)).collect();
        Self {
            matrix,
            bus_ids,
            bus_index,
            shunts_included,
        }
    }

    pub fn dim(&self) -> usize {
        self.bus_ids.len()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn bus_ids(&self) -> &[BusId] {
        &self.bus_ids
    }

    pub fn index_of(&self, id: BusId) -> Option<usize> {
        self.bus_index.get(&id).copied()
    }

    pub fn shunts_included(&self) -> bool {
        self.shunts_included
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.max_abs()
    }

    /// Same buses, entries multiplied by `s`.
    pub fn scaled(&self, s: Complex64) -> Self {
        Self {
            matrix: self.matrix.scale(s),
            ..self.clone()
        }
    }

    /// Same buses, entries replaced.
    pub fn with_matrix(&self, matrix: ComplexMatrix) -> Self {
        assert_eq!(matrix.shape(), self.matrix.shape());
        Self {
            matrix,
            ..self.clone()
        }
    }
}

/// Stamps every branch (π model with off-nominal complex tap at the from
/// end) and, when `include_shunts` is set, line charging and bus shunts.
/// Bus order follows the case.
pub fn build_ybus(case: &GridCase, include_shunts: bool) -> AdmittanceMatrix {
    let ids: Vec<BusId> = case.buses.iter().map(|b| b.id).collect();
    let mut y = AdmittanceMatrix::from_parts(
        ComplexMatrix::zeros(ids.len(), ids.len()),
        ids,
        include_shunts,
    );
    let m = &mut y.matrix;

    for br in &case.branches {
        let f = y.bus_index[&br.from_bus];
        let t = y.bus_index[&br.to_bus];
        let series = Complex64::new(1.0, 0.0) / Complex64::new(br.r, br.x);
        let charging = if include_shunts {
            Complex64::new(0.0, br.b / 2.0)
        } else {
            Complex64::new(0.0, 0.0)
        };
        let end = series + charging;

        m[(f, f)] += end / (br.tap * br.tap);
        m[(t, t)] += end;
        if br.shift_deg == 0.0 {
            let off = -series / br.tap;
            m[(f, t)] += off;
            m[(t, f)] += off;
        } else {
            let tap = Complex64::from_polar(br.tap, br.shift_deg.to_radians());
            m[(f, t)] -= series / tap.conj();
            m[(t, f)] -= series / tap;
        }
    }

    if include_shunts {
        for (k, bus) in case.buses.iter().enumerate() {
            m[(k, k)] += Complex64::new(bus.gs, bus.bs);
        }
    }
    y
}

/// `|Σ_j Y_ij|` for every row.
pub fn row_sum_residuals(y: &AdmittanceMatrix) -> Vec<f64> {
    let m = y.matrix();
    (0..m.rows())
        .map(|i| m.row(i).iter().sum::<Complex64>().norm())
        .collect()
}

/// `max_ij |Y_ij − Y_ji|`.
pub fn symmetry_residual(y: &AdmittanceMatrix) -> f64 {
    let m = y.matrix();
    let mut worst = 0.0_f64;
    for i in 0..m.rows() {
        for j in i + 1..m.cols() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).norm());
        }
    }
    worst
}

/// `(re, im)` of every entry with magnitude above [`ZERO_ENTRY`], row-major.
pub fn ratio_scatter(y: &AdmittanceMatrix) -> Vec<(f64, f64)> {
    y.matrix()
        .as_slice()
        .iter()
        .filter(|z| z.norm() > ZERO_ENTRY)
        .map(|z| (z.re, z.im))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case_io::{Branch, Bus, BusKind};

    fn bus(id: u32, kind: BusKind) -> Bus {
        Bus {
            id: BusId(id),
            kind,
            gs: 0.0,
            bs: 0.0,
        }
    }

    fn two_bus(r: f64, x: f64, b: f64) -> GridCase {
        GridCase {
            name: "two".into(),
            base_mva: 100.0,
            buses: vec![bus(1, BusKind::Generator), bus(2, BusKind::Load)],
            branches: vec![Branch::new(1, 2, r, x, b)],
        }
    }

    #[test]
    fn single_edge_laplacian() {
        let y = build_ybus(&two_bus(0.1, 0.5, 0.0), false);
        let adm = Complex64::new(1.0, 0.0) / Complex64::new(0.1, 0.5);
        // hand value: 1/(0.1+0.5i) = (0.1-0.5i)/0.26
        assert!((adm - Complex64::new(0.1 / 0.26, -0.5 / 0.26)).norm() < 1e-15);
        let expected = ComplexMatrix::from_rows(&[vec![adm, -adm], vec![-adm, adm]]);
        assert_eq!(y.matrix(), &expected);
        assert!(row_sum_residuals(&y).iter().all(|&r| r < 1e-15));
        assert_eq!(symmetry_residual(&y), 0.0);
    }

    #[test]
    fn line_charging_on_diagonals() {
        let y = build_ybus(&two_bus(0.1, 0.5, 0.2), true);
        let adm = Complex64::new(0.1 / 0.26, -0.5 / 0.26);
        let half = Complex64::new(0.0, 0.1);
        for k in 0..2 {
            assert!((y.matrix()[(k, k)] - (adm + half)).norm() < 1e-15);
        }
        assert!((y.matrix()[(0, 1)] + adm).norm() < 1e-15);
        assert!((y.matrix()[(1, 0)] + adm).norm() < 1e-15);
        // without shunts the charging is ignored
        let y = build_ybus(&two_bus(0.1, 0.5, 0.2), false);
        assert!((y.matrix()[(0, 0)] - adm).norm() < 1e-15);
    }

    #[test]
    fn bus_shunts_only_with_flag() {
        let mut c = two_bus(0.1, 0.5, 0.0);
        c.buses[1].gs = 0.01;
        c.buses[1].bs = 0.3;
        let with = build_ybus(&c, true);
        let without = build_ybus(&c, false);
        let rs = row_sum_residuals(&with);
        assert!(rs[0] < 1e-15);
        assert!((rs[1] - Complex64::new(0.01, 0.3).norm()).abs() < 1e-15);
        assert!(row_sum_residuals(&without).iter().all(|&r| r < 1e-15));
    }

    #[test]
    fn phase_shift_breaks_symmetry() {
        let mut c = two_bus(0.1, 0.5, 0.0);
        c.branches[0].shift_deg = 10.0;
        let y = build_ybus(&c, false);
        let adm = Complex64::new(0.1 / 0.26, -0.5 / 0.26);
        let a = Complex64::from_polar(1.0, 10f64.to_radians());
        // hand stamp: Y_ft = -y/conj(a), Y_tf = -y/a
        assert!((y.matrix()[(0, 1)] + adm / a.conj()).norm() < 1e-15);
        assert!((y.matrix()[(1, 0)] + adm / a).norm() < 1e-15);
        let expected = (adm / a.conj() - adm / a).norm();
        assert!(expected > 0.1);
        assert!((symmetry_residual(&y) - expected).abs() < 1e-15);
    }

    #[test]
    fn tap_scales_from_end() {
        let mut c = two_bus(0.1, 0.5, 0.0);
        c.branches[0].tap = 1.05;
        let y = build_ybus(&c, false);
        let adm = Complex64::new(0.1 / 0.26, -0.5 / 0.26);
        assert!((y.matrix()[(0, 0)] - adm / (1.05 * 1.05)).norm() < 1e-15);
        assert!((y.matrix()[(1, 1)] - adm).norm() < 1e-15);
        assert!((y.matrix()[(0, 1)] + adm / 1.05).norm() < 1e-15);
        assert_eq!(symmetry_residual(&y), 0.0);
    }

    #[test]
    fn parallel_branches_accumulate() {
        let mut c = two_bus(0.1, 0.5, 0.0);
        c.branches.push(Branch::new(2, 1, 0.1, 0.5, 0.0));
        let y = build_ybus(&c, false);
        let adm = Complex64::new(0.1 / 0.26, -0.5 / 0.26);
        assert!((y.matrix()[(0, 0)] - 2.0 * adm).norm() < 1e-15);
        assert!((y.matrix()[(1, 0)] + 2.0 * adm).norm() < 1e-15);
    }

    #[test]
    fn scatter_of_two_bus() {
        // z = 1 + 5i, so y = (1 - 5i)/26
        let y = build_ybus(&two_bus(1.0, 5.0, 0.0), false);
        let pts = ratio_scatter(&y);
        let (g, b) = (1.0 / 26.0, -5.0 / 26.0);
        assert_eq!(pts.len(), 4);
        for (k, &(re, im)) in pts.iter().enumerate() {
            let sign = if k == 0 || k == 3 { 1.0 } else { -1.0 };
            assert!((re - sign * g).abs() < 1e-15, "{re}");
            assert!((im - sign * b).abs() < 1e-15, "{im}");
        }
        assert!((g - 0.0384615).abs() < 1e-7 && (b + 0.1923077).abs() < 1e-7);
    }

    #[test]
    fn scatter_skips_zeros() {
        let mut c = two_bus(0.1, 0.5, 0.0);
        c.buses.push(bus(3, BusKind::Load));
        let y = build_ybus(&c, false);
        assert_eq!(y.dim(), 3);
        assert_eq!(ratio_scatter(&y).len(), 4);
    }
}
