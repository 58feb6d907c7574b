//! Frame-granular replay of a [`CyclePlan`]; the independent oracle for the
//! analytic backlog and delay expressions.
//!
//! Each ONU emits one `alpha`-bit frame every `alpha / R_C` seconds (the
//! worst case; frame `m` completes arrival at `(m+1) * alpha / R_C`). At each
//! assigned slot start, up to `f_type` of the oldest buffered frames are
//! served FIFO; a frame's scheduling delay is the slot start time minus its
//! arrival time. Frames arriving exactly at a slot start are not eligible for
//! that slot. The first super-cycle starts from empty queues, so comparisons
//! against the analysis should use the second super-cycle onward.

use crate::delay_analysis::DelayProfile;
use crate::model::SystemParams;
use crate::redistribution::{map_reg_slot, OnuId};
use crate::slotting::CyclePlan;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CycleType {
    Registration,
    NonRegistration,
}

impl CycleType {
    pub fn label(&self) -> &'static str {
        match self {
            CycleType::Registration => "reg",
            CycleType::NonRegistration => "nr",
        }
    }
}

/// One transmission opportunity of one ONU.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotEvent {
    pub t_start: f64,
    /// Physical wavelength (registration host = W-1 by convention).
    pub wavelength: u32,
    pub cycle_type: CycleType,
    pub super_cycle: u32,
    /// Cycle index within its phase (0..k_r or 0..k_n).
    pub cycle: u32,
    pub frames_served: u64,
    pub queue_after: u64,
    /// Largest scheduling delay among frames served in this slot (0 if none).
    pub max_delay: f64,
}

#[derive(Debug, Clone)]
pub struct OnuTrace {
    pub onu: OnuId,
    pub i_r: u32,
    pub w_r: u32,
    pub events: Vec<SlotEvent>,
    /// Queue right after the ONU's final slot of each super-cycle.
    pub end_queues: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct SimTrace {
    pub per_onu: Vec<OnuTrace>,
    /// Largest frame scheduling delay anywhere in the trace.
    pub max_delay: f64,
    pub super_cycles: u32,
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("slot timeline overlaps on wavelength {wavelength} at t={t}")]
    TimelineOverlap { wavelength: u32, t: f64 },
}

/// Frames that completed arrival strictly before `t`, for inter-arrival `tau`.
fn arrivals_before(t: f64, tau: f64) -> u64 {
    if t <= tau {
        return 0;
    }
    let q = t / tau;
    let floor = q.floor();
    // Arrival at exactly m*tau is excluded; back off when t sits on the grid.
    let exact = (q - floor) <= 1e-9 * q.max(1.0);
    let count = if exact { floor - 1.0 } else { floor };
    count.max(0.0) as u64
}

/// Replays `super_cycles` repetitions of the plan's schedule.
pub fn simulate(
    plan: &CyclePlan,
    params: &SystemParams,
    super_cycles: u32,
) -> Result<SimTrace, SimError> {
    if super_cycles < 1 {
        return Err(SimError::InvalidPlan(
            "need at least one super-cycle".into(),
        ));
    }
    if plan.w < 2 || plan.n < 1 || plan.f_n < 1 || plan.k_n < 1 {
        return Err(SimError::InvalidPlan(format!(
            "topology or non-registration pattern degenerate: N={} W={} f_n={} k_n={}",
            plan.n, plan.w, plan.f_n, plan.k_n
        )));
    }
    // k_r = 0 is allowed here (steady non-registration operation, used as a
    // test oracle); the planner itself never produces it.
    if plan.k_r >= 1 && plan.f_r < 1 {
        return Err(SimError::InvalidPlan(
            "f_r must be >= 1 when k_r >= 1".into(),
        ));
    }

    let tau = params.frame_interval();
    let t_cr = plan.t_cr();
    let t_cn = plan.t_cn();
    let t_super = plan.k_r as f64 * t_cr + plan.k_n as f64 * t_cn;
    let host = plan.w - 1;

    let mut per_onu = Vec::with_capacity((plan.n * plan.w) as usize);
    let mut max_delay: f64 = 0.0;
    let mut timeline: Vec<(u32, f64, f64)> = Vec::new();

    for lambda in 0..plan.w {
        for i_n in 0..plan.n {
            let onu = OnuId::new(lambda, i_n);
            let assignment = map_reg_slot(onu, plan.n, plan.w)
                .map_err(|e| SimError::InvalidPlan(e.to_string()))?;
            // Data-wavelength ordinal onto physical index, skipping the host.
            let reg_wavelength = if assignment.w_r < host {
                assignment.w_r
            } else {
                assignment.w_r + 1
            };

            let mut events = Vec::with_capacity((super_cycles * (plan.k_r + plan.k_n)) as usize);
            let mut end_queues = Vec::with_capacity(super_cycles as usize);
            let mut served_total: u64 = 0;

            for sc in 0..super_cycles {
                let base = sc as f64 * t_super;
                let mut last_queue = 0;
                for cycle in 0..plan.k_r {
                    let t = base + cycle as f64 * t_cr + assignment.i_r as f64 * plan.t_sr;
                    let ev = serve_slot(
                        t,
                        reg_wavelength,
                        CycleType::Registration,
                        sc,
                        cycle,
                        plan.f_r,
                        tau,
                        &mut served_total,
                    );
                    max_delay = max_delay.max(ev.max_delay);
                    last_queue = ev.queue_after;
                    timeline.push((reg_wavelength, t, plan.t_sr));
                    events.push(ev);
                }
                let nr_base = base + plan.k_r as f64 * t_cr;
                for cycle in 0..plan.k_n {
                    let t = nr_base + cycle as f64 * t_cn + i_n as f64 * plan.t_sn;
                    let ev = serve_slot(
                        t,
                        lambda,
                        CycleType::NonRegistration,
                        sc,
                        cycle,
                        plan.f_n,
                        tau,
                        &mut served_total,
                    );
                    max_delay = max_delay.max(ev.max_delay);
                    last_queue = ev.queue_after;
                    timeline.push((lambda, t, plan.t_sn));
                    events.push(ev);
                }
                end_queues.push(last_queue);
            }

            per_onu.push(OnuTrace {
                onu,
                i_r: assignment.i_r,
                w_r: assignment.w_r,
                events,
                end_queues,
            });
        }
    }

    check_timeline(&mut timeline)?;

    Ok(SimTrace {
        per_onu,
        max_delay,
        super_cycles,
    })
}

#[allow(clippy::too_many_arguments)]
fn serve_slot(
    t: f64,
    wavelength: u32,
    cycle_type: CycleType,
    super_cycle: u32,
    cycle: u32,
    capacity: u64,
    tau: f64,
    served_total: &mut u64,
) -> SlotEvent {
    let arrived = arrivals_before(t, tau);
    let queue = arrived - *served_total; // never negative: service <= arrivals
    let served = queue.min(capacity);
    let max_delay = if served > 0 {
        // FIFO: the oldest frame in the buffer is index `served_total`,
        // which arrived at (served_total + 1) * tau.
        t - (*served_total + 1) as f64 * tau
    } else {
        0.0
    };
    *served_total += served;
    SlotEvent {
        t_start: t,
        wavelength,
        cycle_type,
        super_cycle,
        cycle,
        frames_served: served,
        queue_after: queue - served,
        max_delay,
    }
}

/// Rejects any schedule where two slots on one wavelength intersect.
fn check_timeline(timeline: &mut [(u32, f64, f64)]) -> Result<(), SimError> {
    timeline.sort_by(|a, b| (a.0, a.1).partial_cmp(&(b.0, b.1)).expect("finite times"));
    for pair in timeline.windows(2) {
        let (w0, t0, d0) = pair[0];
        let (w1, t1, _) = pair[1];
        if w0 == w1 && t1 < t0 + d0 - 1e-12 * (t0 + d0).abs().max(1.0) {
            return Err(SimError::TimelineOverlap {
                wavelength: w1,
                t: t1,
            });
        }
    }
    Ok(())
}

/// One analytic-vs-simulated discrepancy beyond tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub onu: OnuId,
    pub cycle_type: CycleType,
    pub cycle: u32,
    pub quantity: &'static str,
    pub expected: f64,
    pub actual: f64,
}

/// Result of [`compare_with_analysis`].
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    /// Frame-quantization tolerance, `2 * alpha / R_C`.
    pub tol: f64,
    /// Super-cycle the comparison ran on.
    pub super_cycle: u32,
    pub checks: u64,
    pub mismatches: Vec<Mismatch>,
}

impl ComparisonReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Checks simulated delays and queues of one super-cycle against analytic
/// profiles built from the same plan.
///
/// Per ONU: the max delay in the last registration slot must match
/// `d_reg_last`, the first non-registration slot `d_nr_first`, and the queue
/// after every slot must match `max(0, B_type[k])`, all within `2 alpha/R_C`
/// (one frame of arrival quantization plus one of service quantization).
pub fn compare_with_analysis(
    trace: &SimTrace,
    profiles: &[DelayProfile],
    plan: &CyclePlan,
    params: &SystemParams,
    super_cycle: u32,
) -> ComparisonReport {
    assert!(
        super_cycle < trace.super_cycles,
        "super-cycle not simulated"
    );
    let tau = params.frame_interval();
    let tol = 2.0 * tau;
    let mut mismatches = Vec::new();
    let mut checks = 0;

    for onu_trace in &trace.per_onu {
        let profile = profiles
            .iter()
            .find(|p| p.onu == onu_trace.onu)
            .expect("profile for every simulated ONU");
        let mut record = |cycle_type, cycle, quantity, expected: f64, actual: f64| {
            checks += 1;
            if (expected - actual).abs() > tol {
                mismatches.push(Mismatch {
                    onu: onu_trace.onu,
                    cycle_type,
                    cycle,
                    quantity,
                    expected,
                    actual,
                });
            }
        };

        for ev in onu_trace
            .events
            .iter()
            .filter(|ev| ev.super_cycle == super_cycle)
        {
            let queue_time = ev.queue_after as f64 * tau;
            match ev.cycle_type {
                CycleType::Registration => {
                    let k = ev.cycle as usize;
                    record(
                        ev.cycle_type,
                        ev.cycle,
                        "queue_after",
                        profile.backlog_reg[k].max(0.0),
                        queue_time,
                    );
                    if plan.k_r >= 1 && ev.cycle == plan.k_r - 1 {
                        record(
                            ev.cycle_type,
                            ev.cycle,
                            "d_reg_last",
                            profile.d_reg_last,
                            ev.max_delay,
                        );
                    }
                }
                CycleType::NonRegistration => {
                    let k = ev.cycle as usize;
                    record(
                        ev.cycle_type,
                        ev.cycle,
                        "queue_after",
                        profile.backlog_nr[k].max(0.0),
                        queue_time,
                    );
                    if ev.cycle == 0 && plan.k_r >= 1 {
                        record(
                            ev.cycle_type,
                            ev.cycle,
                            "d_nr_first",
                            profile.d_nr_first,
                            ev.max_delay,
                        );
                    }
                }
            }
        }
    }

    ComparisonReport {
        tol,
        super_cycle,
        checks,
        mismatches,
    }
}
