//! Ethernet packetization overhead, minimum slot durations, and cycle timing.
//!
//! A slot that must carry up to `f` eCPRI frames of `alpha` bits needs
//! `p = ceil(f*alpha / E_max)` Ethernet packets, so its duration must cover
//! `f*alpha + p*L_hdr` bits at the line rate plus one guard band.

use crate::kv;
use crate::model::SystemParams;
use crate::num::approx_ge;
use crate::redistribution::compute_nr;
use thiserror::Error;

/// Ethernet packets needed for `f` frames: `ceil(f*alpha / E_max)`.
///
/// Frames are packed by pure bit accounting; a frame may straddle a packet
/// boundary.
pub fn packets_per_slot(f: u64, params: &SystemParams) -> u64 {
    let payload_bits = f as f64 * params.alpha;
    (payload_bits / params.e_max).ceil() as u64
}

/// Infimum slot duration admitting `f` frames:
/// `(f*alpha + packets*L_hdr) / R_E + G`.
pub fn min_slot_duration(f: u64, params: &SystemParams) -> f64 {
    let p = packets_per_slot(f, params) as f64;
    (f as f64 * params.alpha + p * params.l_hdr) / params.r_e + params.guard
}

/// Frames per slot, packets per slot, and slot duration for one cycle type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotSpec {
    pub f: u64,
    pub p: u64,
    pub t_s: f64,
}

impl SlotSpec {
    /// Slot pinned to the minimum duration for `f` frames.
    pub fn minimal(f: u64, params: &SystemParams) -> SlotSpec {
        SlotSpec {
            f,
            p: packets_per_slot(f, params),
            t_s: min_slot_duration(f, params),
        }
    }
}

/// A complete candidate schedule: topology, frames per slot and slot
/// durations for both cycle types, and the super-cycle pattern of `k_r`
/// registration cycles followed by `k_n` non-registration cycles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CyclePlan {
    pub n: u32,
    pub w: u32,
    /// Frames per slot in non-registration / registration cycles.
    pub f_n: u64,
    pub f_r: u64,
    /// Consecutive non-registration / registration cycles per super-cycle.
    pub k_n: u32,
    pub k_r: u32,
    /// Slot durations, seconds.
    pub t_sn: f64,
    pub t_sr: f64,
}

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("plan field {field} must be at least 1 (got {got})")]
    CountTooSmall { field: &'static str, got: u64 },
    #[error("W must be at least 2 (got {0})")]
    TooFewWavelengths(u32),
    #[error("slot duration {field}={got} below minimum {min} for f={f}")]
    SlotTooShort {
        field: &'static str,
        got: f64,
        min: f64,
        f: u64,
    },
    #[error("plan key {0:?} missing from record")]
    MissingKey(&'static str),
    #[error(transparent)]
    Kv(#[from] kv::KvError),
}

impl CyclePlan {
    /// ONUs per data wavelength during registration cycles.
    pub fn n_r(&self) -> u32 {
        compute_nr(self.n, self.w).expect("N_r needs W >= 2 and N >= 1; see validate()")
    }

    /// Non-registration cycle duration `N * T_sn`.
    pub fn t_cn(&self) -> f64 {
        self.n as f64 * self.t_sn
    }

    /// Registration cycle duration `N_r * T_sr`.
    pub fn t_cr(&self) -> f64 {
        self.n_r() as f64 * self.t_sr
    }

    /// Registration window per super-cycle, `k_r * T_cr`.
    pub fn window(&self) -> f64 {
        self.k_r as f64 * self.t_cr()
    }

    /// Gap between consecutive windows, `k_n * T_cn`.
    pub fn gap(&self) -> f64 {
        self.k_n as f64 * self.t_cn()
    }

    /// Super-cycle duration `k_r * T_cr + k_n * T_cn`.
    pub fn super_cycle(&self) -> f64 {
        self.window() + self.gap()
    }

    /// Structural validity: counts at least 1 and slot durations meeting the
    /// packetization lower bound.
    pub fn validate(&self, params: &SystemParams) -> Result<(), PlanError> {
        if self.w < 2 {
            return Err(PlanError::TooFewWavelengths(self.w));
        }
        for (field, got) in [
            ("n", self.n as u64),
            ("f_n", self.f_n),
            ("f_r", self.f_r),
            ("k_n", self.k_n as u64),
            ("k_r", self.k_r as u64),
        ] {
            if got < 1 {
                return Err(PlanError::CountTooSmall { field, got });
            }
        }
        for (field, got, f) in [("t_sn", self.t_sn, self.f_n), ("t_sr", self.t_sr, self.f_r)] {
            let min = min_slot_duration(f, params);
            if !approx_ge(got, min) {
                return Err(PlanError::SlotTooShort { field, got, min, f });
            }
        }
        Ok(())
    }

    /// Flat key-value record, losslessly round-trippable.
    pub fn to_kv_string(&self) -> String {
        format!(
            "n = {}\nw = {}\nf_n = {}\nf_r = {}\nk_n = {}\nk_r = {}\nt_sn_s = {}\nt_sr_s = {}\n",
            self.n, self.w, self.f_n, self.f_r, self.k_n, self.k_r, self.t_sn, self.t_sr
        )
    }

    pub fn from_kv_str(text: &str) -> Result<CyclePlan, PlanError> {
        let mut n = None;
        let mut w = None;
        let mut f_n = None;
        let mut f_r = None;
        let mut k_n = None;
        let mut k_r = None;
        let mut t_sn = None;
        let mut t_sr = None;
        for (idx, (key, value)) in kv::parse(text)?.into_iter().enumerate() {
            let line = idx + 1;
            match key.as_str() {
                "n" => n = Some(kv::parse_u64(line, &key, &value)? as u32),
                "w" => w = Some(kv::parse_u64(line, &key, &value)? as u32),
                "f_n" => f_n = Some(kv::parse_u64(line, &key, &value)?),
                "f_r" => f_r = Some(kv::parse_u64(line, &key, &value)?),
                "k_n" => k_n = Some(kv::parse_u64(line, &key, &value)? as u32),
                "k_r" => k_r = Some(kv::parse_u64(line, &key, &value)? as u32),
                "t_sn_s" => t_sn = Some(kv::parse_f64(line, &key, &value)?),
                "t_sr_s" => t_sr = Some(kv::parse_f64(line, &key, &value)?),
                _ => {} // tolerate derived/extra keys in plan records
            }
        }
        Ok(CyclePlan {
            n: n.ok_or(PlanError::MissingKey("n"))?,
            w: w.ok_or(PlanError::MissingKey("w"))?,
            f_n: f_n.ok_or(PlanError::MissingKey("f_n"))?,
            f_r: f_r.ok_or(PlanError::MissingKey("f_r"))?,
            k_n: k_n.ok_or(PlanError::MissingKey("k_n"))?,
            k_r: k_r.ok_or(PlanError::MissingKey("k_r"))?,
            t_sn: t_sn.ok_or(PlanError::MissingKey("t_sn_s"))?,
            t_sr: t_sr.ok_or(PlanError::MissingKey("t_sr_s"))?,
        })
    }
}

/// `(T_cn, T_cr)` of a plan.
pub fn cycle_durations(plan: &CyclePlan) -> (f64, f64) {
    (plan.t_cn(), plan.t_cr())
}

/// `(window, gap)` of a plan.
pub fn window_and_gap(plan: &CyclePlan) -> (f64, f64) {
    (plan.window(), plan.gap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params_with(alpha: f64, e_max: f64, l_hdr: f64) -> SystemParams {
        SystemParams {
            alpha,
            e_max,
            l_hdr,
            ..SystemParams::default()
        }
    }

    /// Greedy bit-packing oracle: fill packets one payload at a time.
    fn packed_packets(f: u64, alpha: f64, e_max: f64) -> u64 {
        let mut remaining = f as f64 * alpha;
        let mut packets = 0;
        while remaining > 0.0 {
            remaining -= e_max;
            packets += 1;
        }
        packets
    }

    #[test]
    fn packets_examples() {
        // f*alpha == E_max exactly -> one packet.
        let p = params_with(120.0, 12000.0, 208.0);
        assert_eq!(packets_per_slot(100, &p), 1);
        // One bit over -> two packets.
        let p = params_with(120.0, 11999.0, 208.0);
        assert_eq!(packets_per_slot(100, &p), 2);
        // ceil(12800/12000) = 2, cross-checked by the greedy packer.
        let p = params_with(128.0, 12000.0, 208.0);
        assert_eq!(packets_per_slot(100, &p), 2);
        assert_eq!(packed_packets(100, 128.0, 12000.0), 2);
    }

    #[test]
    fn min_slot_duration_examples() {
        let p = SystemParams::default();
        // (12800 + 2*208)/1e10 + 1e-6 = 2.3216 us
        let d = min_slot_duration(100, &p);
        assert!((d - 2.3216e-6).abs() < 1e-15);
        // Guard band dominates a single frame: 336 bits at 10 Gbps is 33.6 ns,
        // so (128+208)/1e10 + 1e-6 = 1.0336 us.
        let d1 = min_slot_duration(1, &p);
        assert!((d1 - 1.0336e-6).abs() < 1e-15);
    }

    #[test]
    fn min_slot_duration_is_strictly_increasing() {
        let p = SystemParams::default();
        let mut prev = min_slot_duration(1, &p);
        for f in 2..=5000 {
            let cur = min_slot_duration(f, &p);
            assert!(cur > prev, "not increasing at f={f}");
            prev = cur;
        }
    }

    #[test]
    fn cycle_duration_and_window_gap_identities() {
        let params = SystemParams::default();
        // N=2, W=3 topology: N_r = 3 -> T_cn = 2 T_sn, T_cr = 3 T_sr.
        let plan = CyclePlan {
            n: 2,
            w: 3,
            f_n: 100,
            f_r: 100,
            k_n: 3,
            k_r: 2,
            t_sn: min_slot_duration(100, &params),
            t_sr: min_slot_duration(100, &params),
        };
        plan.validate(&params).unwrap();
        let (t_cn, t_cr) = cycle_durations(&plan);
        assert_eq!(t_cn, 2.0 * plan.t_sn);
        assert_eq!(t_cr, 3.0 * plan.t_sr);
        let (window, gap) = window_and_gap(&plan);
        assert_eq!(window, 2.0 * t_cr); // k_r = 2
        assert_eq!(gap, 3.0 * t_cn); // k_n = 3

        let single = CyclePlan {
            n: 1,
            w: 3,
            k_n: 1,
            k_r: 1,
            ..plan
        };
        assert_eq!(single.t_cn(), single.t_sn);
        assert_eq!(window_and_gap(&single), (single.t_cr(), single.t_cn()));

        // Linearity in the slot duration.
        let doubled = CyclePlan {
            t_sn: 2.0 * plan.t_sn,
            ..plan
        };
        assert_eq!(doubled.t_cn(), 2.0 * plan.t_cn());
    }

    #[test]
    fn plan_kv_round_trip() {
        let params = SystemParams::default();
        let plan = CyclePlan {
            n: 10,
            w: 2,
            f_n: 135,
            f_r: 243,
            k_n: 3610,
            k_r: 3,
            t_sn: min_slot_duration(135, &params),
            t_sr: min_slot_duration(243, &params),
        };
        let text = plan.to_kv_string();
        assert_eq!(CyclePlan::from_kv_str(&text).unwrap(), plan);
    }

    #[test]
    fn validate_rejects_undersized_slots_and_zero_counts() {
        let params = SystemParams::default();
        let good = CyclePlan {
            n: 2,
            w: 3,
            f_n: 10,
            f_r: 10,
            k_n: 1,
            k_r: 1,
            t_sn: min_slot_duration(10, &params),
            t_sr: min_slot_duration(10, &params),
        };
        good.validate(&params).unwrap();
        let short = CyclePlan {
            t_sr: good.t_sr * 0.5,
            ..good
        };
        assert!(matches!(
            short.validate(&params),
            Err(PlanError::SlotTooShort { .. })
        ));
        let zero = CyclePlan { k_r: 0, ..good };
        assert!(matches!(
            zero.validate(&params),
            Err(PlanError::CountTooSmall { .. })
        ));
    }

    proptest! {
        #[test]
        fn greedy_packer_matches_ceiling(f in 1u64..3000) {
            let p = SystemParams::default();
            prop_assert_eq!(packets_per_slot(f, &p), packed_packets(f, p.alpha, p.e_max));
        }

        #[test]
        fn minimum_slot_carries_at_least_one_header_and_wastes_capacity(f in 1u64..3000) {
            let p = SystemParams::default();
            let t = min_slot_duration(f, &p);
            prop_assert!(t * p.r_e >= f as f64 * p.alpha + p.l_hdr);
            // Utilization strictly below 1: guard band and headers are overhead.
            prop_assert!((f as f64 * p.alpha) / (t * p.r_e) < 1.0);
        }
    }
}
