//! Upstream scheduling toolkit for TWDM-EPON mobile fronthaul.
//!
//! The OLT periodically opens a registration window on one wavelength while the
//! traffic of all active ONUs is remapped onto the remaining wavelengths, so no
//! wavelength has to be reserved for discovery alone. This crate provides:
//!
//! - [`model`] — system parameters (line rate, delay budget, window/gap
//!   requirements, framing overheads) with validation and config parsing,
//! - [`redistribution`] — the registration-cycle slot remapping of all `N·W`
//!   ONUs onto the `W−1` data wavelengths,
//! - [`slotting`] — packetization overhead, minimum slot durations and cycle
//!   timing, plus the [`slotting::CyclePlan`] schedule record,
//! - [`delay_analysis`] — closed-form inter-slot gaps, per-cycle residual
//!   backlog and worst-case scheduling delays per ONU,
//! - [`planner`] — maximizes ONUs per wavelength under the delay budget via a
//!   descending feasibility search, plus the dedicated-wavelength baseline and
//!   the capacity-gain metric,
//! - [`simulator`] — frame-granular replay of a plan used as an independent
//!   oracle for the analytic expressions,
//! - [`sweep`] — reproducible multi-wavelength parameter sweeps with CSV /
//!   JSON-lines emission.

pub mod delay_analysis;
mod kv;
pub mod model;
pub mod planner;
pub mod redistribution;
pub mod simulator;
pub mod slotting;
pub mod sweep;

pub(crate) mod num {
    /// Relative slack for feasibility comparisons on derived quantities.
    ///
    /// Constraints like `window >= T_reg` are frequently satisfied with exact
    /// equality by construction (stretched slots); the slack keeps those edges
    /// stable under floating-point rounding.
    pub const REL_TOL: f64 = 1e-9;
    pub const ABS_TOL: f64 = 1e-15;

    pub fn slack(a: f64, b: f64) -> f64 {
        ABS_TOL.max(REL_TOL * a.abs().max(b.abs()))
    }

    /// `a <= b` up to rounding slack.
    pub fn approx_le(a: f64, b: f64) -> bool {
        a <= b + slack(a, b)
    }

    /// `a >= b` up to rounding slack.
    pub fn approx_ge(a: f64, b: f64) -> bool {
        b <= a + slack(a, b)
    }
}
