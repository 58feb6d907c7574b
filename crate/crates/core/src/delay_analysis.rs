//! Closed-form inter-slot gaps, residual backlog, and worst-case scheduling
//! delays over one super-cycle.
//!
//! The governing identity: the maximum scheduling delay of a frame served in
//! a slot equals the gap since the ONU's previous transmission opportunity
//! plus the backlog left over at the end of that previous slot,
//! `D[k] = Delta[k] + B[k-1]`. Backlog evolves as
//! `B[k] = B[k-1] + Delta[k] - f*alpha/R_C` (time-equivalent) and is allowed
//! to go negative in non-registration cycles; only `B_reg[0]` is clamped at
//! zero because the drain constraint guarantees an empty buffer when the
//! registration phase begins.
//!
//! The worst delay is attained either in the final registration cycle or in
//! the first non-registration cycle, so feasibility checks only that pair per
//! ONU, plus the drain condition `B_nr[k_n-1] <= 0`.

use crate::model::SystemParams;
use crate::num::{approx_ge, approx_le};
use crate::redistribution::{map_reg_slot, OnuId};
use crate::slotting::CyclePlan;

/// Analytic gaps, backlog traces, and the dominant delay pair for one ONU.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayProfile {
    pub onu: OnuId,
    pub i_r: u32,
    /// `Delta_reg[0..k_r]`, seconds.
    pub gaps_reg: Vec<f64>,
    /// `Delta_nr[0..k_n]`, seconds.
    pub gaps_nr: Vec<f64>,
    /// `B_reg[0..k_r]`, time-equivalent seconds.
    pub backlog_reg: Vec<f64>,
    /// `B_nr[0..k_n]`, time-equivalent seconds (may be negative).
    pub backlog_nr: Vec<f64>,
    /// `D_reg[k_r-1]`.
    pub d_reg_last: f64,
    /// `D_nr[0]`.
    pub d_nr_first: f64,
}

impl DelayProfile {
    /// All registration-cycle delays `D_reg[k] = Delta_reg[k] + B_reg[k-1]`,
    /// with zero backlog carried into the phase. Exposed for inspection; only
    /// the last one is constrained.
    pub fn delays_reg(&self) -> Vec<f64> {
        self.gaps_reg
            .iter()
            .enumerate()
            .map(|(k, gap)| gap + if k == 0 { 0.0 } else { self.backlog_reg[k - 1] })
            .collect()
    }

    /// All non-registration-cycle delays `D_nr[k] = Delta_nr[k] + B_nr[k-1]`,
    /// crossing over from the registration phase at `k = 0`.
    pub fn delays_nr(&self) -> Vec<f64> {
        let b_reg_last = self.backlog_reg.last().copied().unwrap_or(0.0);
        self.gaps_nr
            .iter()
            .enumerate()
            .map(|(k, gap)| {
                gap + if k == 0 {
                    b_reg_last
                } else {
                    self.backlog_nr[k - 1]
                }
            })
            .collect()
    }
}

fn reg_slot_index(onu: OnuId, plan: &CyclePlan) -> u32 {
    map_reg_slot(onu, plan.n, plan.w)
        .expect("ONU must be valid for the plan topology")
        .i_r
}

/// Inter-slot gaps `(Delta_reg, Delta_nr)` for one ONU.
///
/// Only the two cycle-transition gaps are non-uniform:
/// `Delta_reg[0] = (N - i_n) T_sn + i_r T_sr` and
/// `Delta_nr[0] = i_n T_sn + (N_r - i_r) T_sr`; within a phase the gap is the
/// cycle duration.
pub fn inter_slot_gaps(onu: OnuId, plan: &CyclePlan) -> (Vec<f64>, Vec<f64>) {
    let i_r = reg_slot_index(onu, plan) as f64;
    let i_n = onu.i_n as f64;
    let (t_cn, t_cr) = (plan.t_cn(), plan.t_cr());

    let mut gaps_reg = Vec::with_capacity(plan.k_r as usize);
    if plan.k_r >= 1 {
        gaps_reg.push((plan.n as f64 - i_n) * plan.t_sn + i_r * plan.t_sr);
        gaps_reg.resize(plan.k_r as usize, t_cr);
    }

    let mut gaps_nr = Vec::with_capacity(plan.k_n as usize);
    if plan.k_n >= 1 {
        gaps_nr.push(i_n * plan.t_sn + (plan.n_r() as f64 - i_r) * plan.t_sr);
        gaps_nr.resize(plan.k_n as usize, t_cn);
    }

    (gaps_reg, gaps_nr)
}

/// Time-equivalent service capacity of one slot, `f * alpha / R_C`.
fn slot_service(f: u64, params: &SystemParams) -> f64 {
    f as f64 * params.alpha / params.r_c
}

/// Backlog traces `(B_reg, B_nr)` for one ONU.
pub fn backlog_trace(onu: OnuId, plan: &CyclePlan, params: &SystemParams) -> (Vec<f64>, Vec<f64>) {
    let (gaps_reg, gaps_nr) = inter_slot_gaps(onu, plan);
    let serve_r = slot_service(plan.f_r, params);
    let serve_n = slot_service(plan.f_n, params);
    let (t_cn, t_cr) = (plan.t_cn(), plan.t_cr());

    let mut backlog_reg = Vec::with_capacity(plan.k_r as usize);
    if plan.k_r >= 1 {
        let b0 = (gaps_reg[0] - serve_r).max(0.0);
        for k in 0..plan.k_r as usize {
            backlog_reg.push(b0 + k as f64 * (t_cr - serve_r));
        }
    }

    let mut backlog_nr = Vec::with_capacity(plan.k_n as usize);
    if plan.k_n >= 1 {
        let b_reg_last = backlog_reg.last().copied().unwrap_or(0.0);
        let b0 = b_reg_last + gaps_nr[0] - serve_n;
        for k in 0..plan.k_n as usize {
            backlog_nr.push(b0 - k as f64 * (serve_n - t_cn));
        }
    }

    (backlog_reg, backlog_nr)
}

/// The dominant delay pair `(D_reg[k_r-1], D_nr[0])` for one ONU.
///
/// `B_reg[-1] = 0`: the last non-registration cycle carries no backlog into
/// the registration phase.
pub fn worst_delays(onu: OnuId, plan: &CyclePlan, params: &SystemParams) -> (f64, f64) {
    let (gaps_reg, gaps_nr) = inter_slot_gaps(onu, plan);
    let (backlog_reg, _) = backlog_trace(onu, plan, params);
    let k_r = plan.k_r as usize;

    let d_reg_last = gaps_reg[k_r - 1] + if k_r >= 2 { backlog_reg[k_r - 2] } else { 0.0 };
    let d_nr_first = gaps_nr[0] + backlog_reg[k_r - 1];
    (d_reg_last, d_nr_first)
}

/// Full analytic profile of one ONU.
pub fn profile(onu: OnuId, plan: &CyclePlan, params: &SystemParams) -> DelayProfile {
    let (gaps_reg, gaps_nr) = inter_slot_gaps(onu, plan);
    let (backlog_reg, backlog_nr) = backlog_trace(onu, plan, params);
    let (d_reg_last, d_nr_first) = worst_delays(onu, plan, params);
    DelayProfile {
        onu,
        i_r: reg_slot_index(onu, plan),
        gaps_reg,
        gaps_nr,
        backlog_reg,
        backlog_nr,
        d_reg_last,
        d_nr_first,
    }
}

/// Which feasibility checks to apply. Window and gap checks can be disabled
/// for exploratory runs.
#[derive(Debug, Clone, Copy)]
pub struct CheckOptions {
    pub enforce_window: bool,
    pub enforce_gap: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            enforce_window: true,
            enforce_gap: true,
        }
    }
}

/// Per-ONU verdict inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnuReport {
    pub onu: OnuId,
    pub i_r: u32,
    pub d_reg_last: f64,
    pub d_nr_first: f64,
    pub b_nr_last: f64,
    pub delay_ok: bool,
    pub drain_ok: bool,
}

/// Outcome of [`check_plan`]. Infeasibility is a verdict, not an error.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub window: f64,
    pub gap: f64,
    pub window_ok: bool,
    pub gap_ok: bool,
    /// Largest `max(d_reg_last, d_nr_first)` over all ONUs.
    pub worst_delay: f64,
    pub per_onu: Vec<OnuReport>,
}

impl FeasibilityReport {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.window_ok {
            out.push(format!("window {} below required duration", self.window));
        }
        if !self.gap_ok {
            out.push(format!("gap {} above allowed maximum", self.gap));
        }
        for r in &self.per_onu {
            if !r.delay_ok {
                out.push(format!(
                    "delay: ONU ({}, {}) max({}, {}) over budget",
                    r.onu.lambda, r.onu.i_n, r.d_reg_last, r.d_nr_first
                ));
            }
            if !r.drain_ok {
                out.push(format!(
                    "drain: ONU ({}, {}) B_nr[k_n-1] = {} > 0",
                    r.onu.lambda, r.onu.i_n, r.b_nr_last
                ));
            }
        }
        out
    }
}

/// Evaluates every ONU's dominant delay pair and end-of-phase backlog.
///
/// FEASIBLE iff for every ONU `max(d_reg_last, d_nr_first) <= D_b` and
/// `B_nr[k_n-1] <= 0`, and (unless disabled) `window >= T_reg` and
/// `gap <= T_gap`.
pub fn check_plan(
    plan: &CyclePlan,
    params: &SystemParams,
    opts: CheckOptions,
) -> FeasibilityReport {
    let serve_r = slot_service(plan.f_r, params);
    let serve_n = slot_service(plan.f_n, params);
    let (t_cn, t_cr) = (plan.t_cn(), plan.t_cr());
    let n_r = plan.n_r() as f64;
    let k_r = plan.k_r as f64;
    let k_n = plan.k_n as f64;

    let mut per_onu = Vec::with_capacity((plan.n * plan.w) as usize);
    let mut worst_delay = f64::NEG_INFINITY;
    for lambda in 0..plan.w {
        for i_n in 0..plan.n {
            let onu = OnuId::new(lambda, i_n);
            let i_r = reg_slot_index(onu, plan);
            let gap_reg0 = (plan.n - i_n) as f64 * plan.t_sn + i_r as f64 * plan.t_sr;
            let gap_nr0 = i_n as f64 * plan.t_sn + (n_r - i_r as f64) * plan.t_sr;

            let b_reg0 = (gap_reg0 - serve_r).max(0.0);
            let drift = t_cr - serve_r;
            let b_reg_last = b_reg0 + (k_r - 1.0) * drift;
            let d_reg_last = if plan.k_r >= 2 {
                t_cr + b_reg0 + (k_r - 2.0) * drift
            } else {
                gap_reg0
            };
            let d_nr_first = gap_nr0 + b_reg_last;
            let b_nr0 = b_reg_last + gap_nr0 - serve_n;
            let b_nr_last = b_nr0 - (k_n - 1.0) * (serve_n - t_cn);

            let delay_ok = approx_le(d_reg_last, params.d_b) && approx_le(d_nr_first, params.d_b);
            let drain_ok = approx_le(b_nr_last, 0.0);
            worst_delay = worst_delay.max(d_reg_last.max(d_nr_first));
            per_onu.push(OnuReport {
                onu,
                i_r,
                d_reg_last,
                d_nr_first,
                b_nr_last,
                delay_ok,
                drain_ok,
            });
        }
    }

    let window = plan.window();
    let gap = plan.gap();
    let window_ok = !opts.enforce_window || approx_ge(window, params.t_reg);
    let gap_ok = !opts.enforce_gap || approx_le(gap, params.t_gap);
    let feasible = window_ok && gap_ok && per_onu.iter().all(|r| r.delay_ok && r.drain_ok);

    FeasibilityReport {
        feasible,
        window,
        gap,
        window_ok,
        gap_ok,
        worst_delay,
        per_onu,
    }
}
