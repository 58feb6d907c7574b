//! Maximizes ONUs per wavelength under the delay budget, and computes the
//! dedicated-wavelength baseline for gain comparison.
//!
//! The search descends from `N_max = floor(R_E / R_C)` and treats each `N` as
//! a feasibility problem over the integers `(f_n, f_r, k_r)` with `k_n` and
//! the slot durations implied:
//!
//! - `T_sn` is pinned to the minimum slot duration; every delay and backlog
//!   expression is non-decreasing in it.
//! - `T_sr` is the minimum slot duration stretched up to `T_reg / (k_r N_r)`
//!   when the window would otherwise be too short; again minimal subject to
//!   the window requirement, which dominates for the same reason.
//! - `k_n` is taken as large as the gap requirement allows. Candidate `f_n`
//!   values always satisfy `f_n alpha / R_C >= T_cn`, so per-cycle drain
//!   slack is non-decreasing in `k_n` and the largest value dominates.
//!
//! Candidates are enumerated in ascending `(f_n, f_r, k_r)` order, biasing
//! toward short registration phases; the first candidate passing
//! [`check_plan`] is returned. A cheap closed-form bound over all ONUs
//! filters candidates before the full per-ONU check runs.

use crate::delay_analysis::{check_plan, CheckOptions};
use crate::model::{SystemParams, ValidatedParams};
use crate::num::{approx_ge, approx_le, slack};
use crate::redistribution::compute_nr;
use crate::slotting::{min_slot_duration, CyclePlan};

/// Hard upper limit on ONUs per wavelength: `floor(R_E / R_C)`.
pub fn n_max(params: &ValidatedParams) -> u32 {
    (params.r_e / params.r_c).floor() as u32
}

/// Scheduling delay lower bound of standard single-wavelength EPON
/// registration: the full window plus one cycle.
pub fn standard_epon_delay_bound(t_reg: f64, t_c: f64) -> f64 {
    t_reg + t_c
}

/// Capacity gain of the proposed scheme over the baseline, in percent.
/// `None` flags an undefined gain (baseline supports zero RUs).
pub fn gain(total_proposed: u64, total_baseline: u64) -> Option<f64> {
    if total_baseline == 0 {
        return None;
    }
    Some(100.0 * (total_proposed as f64 - total_baseline as f64) / total_baseline as f64)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// N values tried by the descending search.
    pub n_iterations: u32,
    /// Inner `(f_n, f_r, k_r)` candidates examined.
    pub candidates: u64,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SolveOptions {
    /// Require `k_n * T_cn = T_gap` (within rounding) instead of `<=`.
    pub exact_gap: bool,
}

/// Solver outcome for one wavelength count.
#[derive(Debug, Clone)]
pub struct PlanResult {
    pub w: u32,
    /// Maximum feasible ONUs per wavelength; 0 if none.
    pub n_star: u32,
    pub plan: Option<CyclePlan>,
    /// Baseline ONUs per data-carrying wavelength.
    pub n_baseline: u32,
    pub total_proposed: u64,
    pub total_baseline: u64,
    pub gain_pct: Option<f64>,
    pub stats: SearchStats,
}

/// Largest feasible `N` for `W` wavelengths, searched descending from
/// `n_max`, plus baseline and gain.
pub fn solve(w: u32, params: &ValidatedParams) -> PlanResult {
    solve_with(w, params, SolveOptions::default())
}

pub fn solve_with(w: u32, params: &ValidatedParams, opts: SolveOptions) -> PlanResult {
    let mut stats = SearchStats::default();
    let mut n_star = 0;
    let mut plan = None;
    for n in (1..=n_max(params)).rev() {
        stats.n_iterations += 1;
        if let Some(found) = inner_feasible_with_stats(n, w, params, opts, &mut stats) {
            n_star = n;
            plan = Some(found);
            break;
        }
    }
    let n_baseline = solve_baseline(params);
    let total_proposed = n_star as u64 * w as u64;
    let total_baseline = n_baseline as u64 * w.saturating_sub(1) as u64;
    PlanResult {
        w,
        n_star,
        plan,
        n_baseline,
        total_proposed,
        total_baseline,
        gain_pct: gain(total_proposed, total_baseline),
        stats,
    }
}

/// A schedule supporting `n` ONUs per wavelength for `w` wavelengths, or
/// `None`. Absence is the signal, not an error.
pub fn inner_feasible(n: u32, w: u32, params: &ValidatedParams) -> Option<CyclePlan> {
    let mut stats = SearchStats::default();
    inner_feasible_with_stats(n, w, params, SolveOptions::default(), &mut stats)
}

pub fn inner_feasible_with_stats(
    n: u32,
    w: u32,
    params: &ValidatedParams,
    opts: SolveOptions,
    stats: &mut SearchStats,
) -> Option<CyclePlan> {
    let nr = compute_nr(n, w).ok()?;
    let p: &SystemParams = params;
    let tau = p.frame_interval();
    let reg_extremes = RegGapExtremes::new(n, w);

    let mut f_n: u64 = 1;
    loop {
        let t_sn = min_slot_duration(f_n, p);
        let t_cn = n as f64 * t_sn;
        // T_cn grows monotonically with f_n; past the budget nothing works.
        if !approx_le(t_cn, p.d_b) {
            return None;
        }
        // Per-cycle capacity: a slot must cover the traffic of one cycle.
        if approx_ge(f_n as f64 * tau, t_cn) {
            if let Some(k_n) = pick_k_n(t_cn, p, opts) {
                if let Some(plan) =
                    scan_registration_dims(n, w, nr, f_n, t_sn, k_n, p, &reg_extremes, stats)
                {
                    return Some(plan);
                }
            }
        }
        f_n += 1;
    }
}

/// Largest cycle count keeping the inter-window gap within `T_gap`
/// (drain slack only grows with `k_n`), or the exact-match count when
/// `exact_gap` is requested.
fn pick_k_n(t_cn: f64, p: &SystemParams, opts: SolveOptions) -> Option<u32> {
    let k_max = (p.t_gap / t_cn).floor();
    if k_max < 1.0 {
        return None;
    }
    if opts.exact_gap {
        let k = (p.t_gap / t_cn).round();
        if k >= 1.0 && (k * t_cn - p.t_gap).abs() <= slack(k * t_cn, p.t_gap) {
            return Some(k as u32);
        }
        return None;
    }
    Some(k_max.min(u32::MAX as f64) as u32)
}

#[allow(clippy::too_many_arguments)]
fn scan_registration_dims(
    n: u32,
    w: u32,
    nr: u32,
    f_n: u64,
    t_sn: f64,
    k_n: u32,
    p: &SystemParams,
    reg_extremes: &RegGapExtremes,
    stats: &mut SearchStats,
) -> Option<CyclePlan> {
    let serve_n = f_n as f64 * p.alpha / p.r_c;
    let t_cn = n as f64 * t_sn;
    let mut f_r: u64 = 1;
    loop {
        let t_sr_min = min_slot_duration(f_r, p);
        // One redistributed cycle alone exceeding the budget ends the scan.
        if !approx_le(nr as f64 * t_sr_min, p.d_b) {
            return None;
        }
        let serve_r = f_r as f64 * p.alpha / p.r_c;
        let k_r_cap = (p.t_reg / (nr as f64 * t_sr_min)).ceil() as u32 + 1;
        for k_r in 1..=k_r_cap {
            stats.candidates += 1;
            // Minimal slot subject to the window requirement; stretching any
            // further only increases every delay and backlog expression.
            let t_sr = t_sr_min.max(p.t_reg / (k_r as f64 * nr as f64));
            let candidate = Candidate {
                t_sn,
                t_sr,
                t_cn,
                t_cr: nr as f64 * t_sr,
                serve_n,
                serve_r,
                k_r,
                k_n,
            };
            if candidate.bounds_feasible(reg_extremes, p) {
                let plan = CyclePlan {
                    n,
                    w,
                    f_n,
                    f_r,
                    k_n,
                    k_r,
                    t_sn,
                    t_sr,
                };
                if check_plan(&plan, p, CheckOptions::default()).feasible {
                    return Some(plan);
                }
            }
        }
        f_r += 1;
    }
}

/// Range of the registration-transition gap coefficients per `i_n`:
/// `Delta_reg[0] = (N - i_n) T_sn + i_r T_sr` with `i_r` spanning
/// `[floor(W i_n / (W-1)), floor((W i_n + W - 1) / (W-1))]` over lambda.
struct RegGapExtremes {
    n: u32,
    /// `(n - i_n, i_r_min, i_r_max)` rows.
    rows: Vec<(f64, f64, f64)>,
}

impl RegGapExtremes {
    fn new(n: u32, w: u32) -> RegGapExtremes {
        let data = (w - 1) as u64;
        let rows = (0..n)
            .map(|i_n| {
                let g0 = w as u64 * i_n as u64;
                (
                    (n - i_n) as f64,
                    (g0 / data) as f64,
                    ((g0 + data) / data) as f64, // lambda = w - 1
                )
            })
            .collect();
        RegGapExtremes { n, rows }
    }

    fn min_max(&self, t_sn: f64, t_sr: f64) -> (f64, f64) {
        debug_assert_eq!(self.rows.len(), self.n as usize);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &(coef_n, ir_min, ir_max) in &self.rows {
            let base = coef_n * t_sn;
            lo = lo.min(base + ir_min * t_sr);
            hi = hi.max(base + ir_max * t_sr);
        }
        (lo, hi)
    }
}

struct Candidate {
    t_sn: f64,
    t_sr: f64,
    t_cn: f64,
    t_cr: f64,
    serve_n: f64,
    serve_r: f64,
    k_r: u32,
    k_n: u32,
}

impl Candidate {
    /// Exact closed-form maxima of the per-ONU constraints.
    ///
    /// Over all ONUs, with `d = Delta_reg[0]` ranging over `[d_min, d_max]`:
    /// `max D_nr[0] = T_cn + T_cr - min(d_min, serve_r) + (k_r-1) drift` and
    /// `max D_reg[k_r-1] = T_cr + max(0, d_max - serve_r) + (k_r-2) drift`
    /// (or `d_max` when `k_r = 1`); the drain bound follows from
    /// `B_nr[0] = D_nr[0] - serve_n`.
    fn bounds_feasible(&self, extremes: &RegGapExtremes, p: &SystemParams) -> bool {
        let (d_min, d_max) = extremes.min_max(self.t_sn, self.t_sr);
        let drift = self.t_cr - self.serve_r;
        let b0_max = (d_max - self.serve_r).max(0.0);

        let d_reg_last_max = if self.k_r >= 2 {
            self.t_cr + b0_max + (self.k_r as f64 - 2.0) * drift
        } else {
            d_max
        };
        let d_nr_first_max =
            self.t_cn + self.t_cr - d_min.min(self.serve_r) + (self.k_r as f64 - 1.0) * drift;
        if !approx_le(d_reg_last_max, p.d_b) || !approx_le(d_nr_first_max, p.d_b) {
            return false;
        }

        let b_nr0_max = d_nr_first_max - self.serve_n;
        let b_nr_last_max = b_nr0_max - (self.k_n as f64 - 1.0) * (self.serve_n - self.t_cn);
        approx_le(b_nr_last_max, 0.0)
    }
}

/// Baseline: one wavelength reserved exclusively for registration, data
/// wavelengths run uninterrupted cycles. Returns the largest `n` per data
/// wavelength such that some `f` gives `n * T_s <= D_b` with per-cycle
/// capacity `f alpha / R_C >= n * T_s`. Independent of `W`; system totals
/// scale with `W - 1`.
pub fn solve_baseline(params: &ValidatedParams) -> u32 {
    (1..=n_max(params))
        .rev()
        .find(|&n| baseline_feasible(n, params))
        .unwrap_or(0)
}

fn baseline_feasible(n: u32, params: &ValidatedParams) -> bool {
    let tau = params.frame_interval();
    let mut f: u64 = 1;
    loop {
        let t_s = min_slot_duration(f, params);
        if !approx_le(n as f64 * t_s, params.d_b) {
            return false;
        }
        if approx_ge(f as f64 * tau, n as f64 * t_s) {
            return true;
        }
        f += 1;
    }
}

/// Smallest `k_n` keeping the plan feasible; used as a drain-tightness probe
/// after solving.
pub fn min_feasible_k_n(plan: &CyclePlan, params: &ValidatedParams) -> Option<u32> {
    (1..=plan.k_n).find(|&k_n| {
        let probe = CyclePlan { k_n, ..*plan };
        check_plan(&probe, params, CheckOptions::default()).feasible
    })
}

/// Textual MIQP model of one feasibility instance, for parity with an
/// external-solver formulation. Ceilings use the linearization
/// `p = ceil(X)  <=>  X <= p <= X + 1 - eps` with `eps = 1e-6`; the
/// `max{0, .}` in the first registration backlog uses a big-M row set with
/// `M = 10 * T_gap` and one binary per ONU. Not on any solve path.
pub fn export_miqp(n: u32, w: u32, params: &ValidatedParams) -> String {
    use std::fmt::Write;

    let p: &SystemParams = params;
    let nr = compute_nr(n, w).expect("valid topology");
    let eps = 1e-6;
    let big_m = 10.0 * p.t_gap;
    let rate = p.alpha / p.r_c; // slot service seconds per frame

    let mut s = String::new();
    let _ = writeln!(s, "\\ MIQP feasibility instance: N={n}, W={w}, N_r={nr}");
    let _ = writeln!(
        s,
        "\\ params: R_E={} R_C={} D_b={} T_reg={} T_gap={} G={} alpha={} E_max={} L_hdr={}",
        p.r_e, p.r_c, p.d_b, p.t_reg, p.t_gap, p.guard, p.alpha, p.e_max, p.l_hdr
    );
    let _ = writeln!(s, "\\ eps={eps} (ceiling linearization), M={big_m} (big-M)");
    let _ = writeln!(
        s,
        "\\ integer: f_n f_r k_n k_r p_n p_r; continuous: t_sn t_sr"
    );
    let _ = writeln!(s, "\\ quadratic products are written inside [ ] blocks");
    let _ = writeln!(s, "Minimize\n obj: 0");
    let _ = writeln!(s, "Subject To");
    // p = ceil(f alpha / E_max): alpha f <= E_max p <= alpha f + (1 - eps) E_max
    for (sfx, _) in [("n", ()), ("r", ())] {
        let _ = writeln!(
            s,
            " pkt_{sfx}_lo: {} p_{sfx} - {} f_{sfx} >= 0",
            p.e_max, p.alpha
        );
        let _ = writeln!(
            s,
            " pkt_{sfx}_hi: {} p_{sfx} - {} f_{sfx} <= {}",
            p.e_max,
            p.alpha,
            (1.0 - eps) * p.e_max
        );
        // R_E t_s >= f alpha + p L_hdr + R_E G
        let _ = writeln!(
            s,
            " slot_{sfx}: {} t_s{sfx} - {} f_{sfx} - {} p_{sfx} >= {}",
            p.r_e,
            p.alpha,
            p.l_hdr,
            p.r_e * p.guard
        );
    }
    // Window and gap conditions (quadratic in k and t_s).
    let _ = writeln!(s, " window: [ {nr} k_r * t_sr ] >= {}", p.t_reg);
    let _ = writeln!(s, " gap: [ {n} k_n * t_sn ] <= {}", p.t_gap);
    // Per-ONU rows. x_l_i stands for Delta_reg[0] - f_r alpha / R_C.
    for lambda in 0..w {
        for i_n in 0..n {
            let g = w as u64 * i_n as u64 + lambda as u64;
            let i_r = g / (w as u64 - 1);
            let id = format!("{lambda}_{i_n}");
            let coef_sn = (n - i_n) as f64;
            let coef_sr = i_r as f64;
            // big-M encoding of b0 = max{0, x}
            let _ = writeln!(
                s,
                " x_{id}: {coef_sn} t_sn + {coef_sr} t_sr - {rate} f_r - {big_m} d_{id} <= 0"
            );
            let _ = writeln!(
                s,
                " b0lb_{id}: b0_{id} - {coef_sn} t_sn - {coef_sr} t_sr + {rate} f_r >= 0"
            );
            let _ = writeln!(
                s,
                " b0ub1_{id}: b0_{id} - {coef_sn} t_sn - {coef_sr} t_sr + {rate} f_r + {big_m} d_{id} <= {big_m}"
            );
            let _ = writeln!(s, " b0ub2_{id}: b0_{id} - {big_m} d_{id} <= 0");
            // D_reg[k_r-1] = N_r t_sr + b0 + (k_r - 2)(N_r t_sr - rate f_r) <= D_b
            let _ = writeln!(
                s,
                " dreg_{id}: b0_{id} - {nr} t_sr + {} f_r + [ {nr} k_r * t_sr - {rate} k_r * f_r ] <= {}",
                2.0 * rate,
                p.d_b
            );
            // D_nr[0] = i_n t_sn + (N_r - i_r) t_sr + b0 + (k_r - 1)(N_r t_sr - rate f_r) <= D_b
            let coef_nr_sr = (nr - i_r as u32) as f64;
            let _ = writeln!(
                s,
                " dnr_{id}: {} t_sn + {} t_sr + b0_{id} + {rate} f_r + [ {nr} k_r * t_sr - {rate} k_r * f_r ] <= {}",
                i_n as f64,
                coef_nr_sr - nr as f64,
                p.d_b
            );
            // B_nr[k_n-1] = D_nr[0] - rate f_n - (k_n - 1)(rate f_n - N t_sn) <= 0
            let _ = writeln!(
                s,
                " drain_{id}: {} t_sn + {} t_sr + b0_{id} + {rate} f_r - {n} t_sn + [ {nr} k_r * t_sr - {rate} k_r * f_r - {rate} k_n * f_n + {n} k_n * t_sn ] <= 0",
                i_n as f64,
                coef_nr_sr - nr as f64
            );
        }
    }
    let _ = writeln!(s, "Bounds");
    let _ = writeln!(
        s,
        " f_n >= 1\n f_r >= 1\n k_n >= 1\n k_r >= 1\n p_n >= 1\n p_r >= 1"
    );
    let _ = writeln!(s, " t_sn >= {}\n t_sr >= {}", p.guard, p.guard);
    let _ = writeln!(s, "General\n f_n f_r k_n k_r p_n p_r");
    let mut binaries = String::new();
    for lambda in 0..w {
        for i_n in 0..n {
            binaries.push_str(&format!(" d_{lambda}_{i_n}"));
        }
    }
    let _ = writeln!(s, "Binary\n{binaries}");
    let _ = writeln!(s, "End");
    s
}
