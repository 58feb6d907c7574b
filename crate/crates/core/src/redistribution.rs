//! Registration-cycle remapping of all `N·W` ONUs onto the `W−1` data
//! wavelengths.
//!
//! During a registration cycle one wavelength carries only the discovery
//! window, so the ONUs that normally transmit there are folded into the slot
//! grids of the remaining wavelengths. The fill order is round-robin and
//! row-wise: slot 0 of every data wavelength first, then slot 1, and so on,
//! walking the ONUs in `(i_n, lambda)` order.

use crate::model::{Topology, TopologyError};
use thiserror::Error;

/// Logical ONU identity: wavelength index and non-registration slot index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OnuId {
    pub lambda: u32,
    pub i_n: u32,
}

impl OnuId {
    pub fn new(lambda: u32, i_n: u32) -> OnuId {
        OnuId { lambda, i_n }
    }
}

/// Where an ONU transmits during registration cycles: slot `i_r` on data
/// wavelength ordinal `w_r` (ordinals run over the `W−1` wavelengths that are
/// not hosting the window, so the host choice never changes them).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegSlotAssignment {
    pub onu: OnuId,
    pub i_r: u32,
    pub w_r: u32,
}

#[derive(Debug, Error)]
pub enum RedistributionError {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("ONU ({lambda}, {i_n}) out of range for N={n}, W={w}")]
    OnuOutOfRange {
        lambda: u32,
        i_n: u32,
        n: u32,
        w: u32,
    },
}

/// ONUs each data wavelength must support during registration cycles:
/// `ceil(N*W / (W-1))`.
pub fn compute_nr(n: u32, w: u32) -> Result<u32, RedistributionError> {
    let topo = Topology::new(n, w)?;
    let total = topo.total_onus() as u64;
    let data = (w - 1) as u64;
    Ok(total.div_ceil(data) as u32)
}

/// Registration-cycle slot of one ONU. With `g = W*i_n + lambda`:
/// `i_r = floor(g / (W-1))`, `w_r = g mod (W-1)`.
pub fn map_reg_slot(onu: OnuId, n: u32, w: u32) -> Result<RegSlotAssignment, RedistributionError> {
    Topology::new(n, w)?;
    if onu.lambda >= w || onu.i_n >= n {
        return Err(RedistributionError::OnuOutOfRange {
            lambda: onu.lambda,
            i_n: onu.i_n,
            n,
            w,
        });
    }
    let g = (w as u64) * (onu.i_n as u64) + onu.lambda as u64;
    let data = (w - 1) as u64;
    Ok(RegSlotAssignment {
        onu,
        i_r: (g / data) as u32,
        w_r: (g % data) as u32,
    })
}

/// All `N*W` assignments in fill order (ascending `g`), i.e. sorted by
/// `(i_r, w_r)`.
pub fn enumerate_assignments(
    n: u32,
    w: u32,
) -> Result<Vec<RegSlotAssignment>, RedistributionError> {
    Topology::new(n, w)?;
    let mut out = Vec::with_capacity((n * w) as usize);
    for g in 0..(n as u64 * w as u64) {
        let onu = OnuId::new((g % w as u64) as u32, (g / w as u64) as u32);
        out.push(map_reg_slot(onu, n, w)?);
    }
    Ok(out)
}

/// Grid cells of the registration cycle left empty when `W-1` does not divide
/// `N*W`; listed after all assignments in `(i_r, w_r)` order.
pub fn vacant_slots(n: u32, w: u32) -> Result<Vec<(u32, u32)>, RedistributionError> {
    let nr = compute_nr(n, w)?;
    let total = n as u64 * w as u64;
    let data = (w - 1) as u64;
    let mut out = Vec::new();
    for g in total..(nr as u64 * data) {
        out.push(((g / data) as u32, (g % data) as u32));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn nr_examples() {
        assert_eq!(compute_nr(4, 3).unwrap(), 6);
        assert_eq!(compute_nr(3, 3).unwrap(), 5);
        assert_eq!(compute_nr(1, 2).unwrap(), 2);
        assert!(compute_nr(4, 1).is_err());
    }

    #[test]
    fn reg_slot_examples() {
        // First slot on the first data wavelength goes to N(0,0).
        let a = map_reg_slot(OnuId::new(0, 0), 4, 3).unwrap();
        assert_eq!((a.i_r, a.w_r), (0, 0));

        // g = 3*2 + 0 = 6 -> i_r = 3.
        let a = map_reg_slot(OnuId::new(0, 2), 4, 3).unwrap();
        assert_eq!(a.i_r, 3);

        // N=3, W=3: last ONU lands on (4, 0); (4, 1) stays vacant.
        let a = map_reg_slot(OnuId::new(2, 2), 3, 3).unwrap();
        assert_eq!((a.i_r, a.w_r), (4, 0));
        assert_eq!(vacant_slots(3, 3).unwrap(), vec![(4, 1)]);

        assert!(map_reg_slot(OnuId::new(3, 0), 4, 3).is_err());
        assert!(map_reg_slot(OnuId::new(0, 4), 4, 3).is_err());
    }

    #[test]
    fn enumeration_fills_grids() {
        // 12 ONUs on a 6x2 grid, no vacancies.
        let a = enumerate_assignments(4, 3).unwrap();
        assert_eq!(a.len(), 12);
        assert!(a.iter().all(|x| x.i_r < 6 && x.w_r < 2));
        assert!(vacant_slots(4, 3).unwrap().is_empty());

        // 9 ONUs on a 5x2 grid with exactly 1 vacancy.
        let a = enumerate_assignments(3, 3).unwrap();
        assert_eq!(a.len(), 9);
        assert!(a.iter().all(|x| x.i_r < 5 && x.w_r < 2));
        assert_eq!(vacant_slots(3, 3).unwrap().len(), 1);

        // Single data wavelength.
        let a = enumerate_assignments(1, 2).unwrap();
        assert_eq!(a.len(), 2);
        assert!(a.iter().all(|x| x.w_r == 0));
        assert!(vacant_slots(1, 2).unwrap().is_empty());
    }

    #[test]
    fn injective_and_bounded_exhaustively() {
        for w in 2..=16u32 {
            for n in 1..=64u32 {
                let nr = compute_nr(n, w).unwrap();
                let assignments = enumerate_assignments(n, w).unwrap();
                let mut seen = HashSet::new();
                let mut max_ir = 0;
                for a in &assignments {
                    assert!(seen.insert((a.i_r, a.w_r)), "collision at N={n}, W={w}");
                    assert!(a.w_r < w - 1);
                    assert!(a.i_r < nr);
                    max_ir = max_ir.max(a.i_r);
                }
                if (n * w) % (w - 1) == 0 {
                    assert_eq!(max_ir, nr - 1);
                }
                let vacancies = vacant_slots(n, w).unwrap().len() as u32;
                assert_eq!(vacancies, (w - 1) * nr - n * w);
            }
        }
    }

    #[test]
    fn fill_order_is_row_wise_round_robin() {
        for (n, w) in [(4, 3), (3, 3), (5, 7), (2, 2)] {
            let a = enumerate_assignments(n, w).unwrap();
            // g strictly increases along (i_r, w_r) lexicographic order.
            let mut sorted = a.clone();
            sorted.sort_by_key(|x| (x.i_r, x.w_r));
            let gs: Vec<u64> = sorted
                .iter()
                .map(|x| w as u64 * x.onu.i_n as u64 + x.onu.lambda as u64)
                .collect();
            assert!(gs.windows(2).all(|p| p[0] < p[1]));
        }
    }
}
