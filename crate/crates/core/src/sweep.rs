//! Reproducible parameter sweeps over the wavelength count, with optional
//! per-point verification and deterministic CSV / JSON-lines output.

use crate::delay_analysis::{check_plan, profile, CheckOptions};
use crate::model::{validate_params, SystemParams};
use crate::planner::{solve_with, PlanResult, SolveOptions};
use crate::simulator::{compare_with_analysis, simulate};
use rayon::prelude::*;

/// One parameter variant of a sweep (already fully overridden).
#[derive(Debug, Clone)]
pub struct VariantSpec {
    pub id: String,
    pub params: SystemParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyMode {
    Off,
    /// Re-run the analytic feasibility check on every returned plan.
    Analytic,
    /// Additionally replay the plan and compare against the analysis.
    Simulate,
}

/// Sweep axis and options: for each variant, solve every `W` in
/// `w_min..=w_max`.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub w_min: u32,
    pub w_max: u32,
    pub variants: Vec<VariantSpec>,
    pub verify: VerifyMode,
    pub exact_gap: bool,
}

impl SweepSpec {
    pub fn new(w_min: u32, w_max: u32, variants: Vec<VariantSpec>) -> SweepSpec {
        SweepSpec {
            w_min,
            w_max,
            variants,
            verify: VerifyMode::Analytic,
            exact_gap: false,
        }
    }
}

/// One `(W, variant)` sweep point.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub w: u32,
    pub variant_id: String,
    pub n_star: u32,
    pub n_baseline: u32,
    pub total_proposed: u64,
    pub total_baseline: u64,
    pub gain_pct: Option<f64>,
    pub window_s: Option<f64>,
    pub gap_s: Option<f64>,
    pub f_n: Option<u64>,
    pub f_r: Option<u64>,
    pub k_n: Option<u32>,
    pub k_r: Option<u32>,
    pub t_sn_s: Option<f64>,
    pub t_sr_s: Option<f64>,
    /// Per-point failure, recorded in-row; the sweep continues.
    pub error: Option<String>,
    /// Full solver result, for downstream checks.
    pub result: Option<PlanResult>,
}

/// Built-in variant sets mirroring the three evaluation scenarios plus the
/// plain defaults.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Panel {
    Default,
    /// eCPRI rate steps at fixed T_reg = 250 us, D_b = 150 us.
    TrafficRate,
    /// D_b in {100, 150} us at fixed T_reg = 150 us.
    DelayBudget,
    /// T_reg in {250, 400} us at fixed D_b = 150 us.
    RegWindow,
}

pub fn panel_variants(panel: Panel, base: &SystemParams) -> Vec<VariantSpec> {
    match panel {
        Panel::Default => vec![VariantSpec {
            id: "default".into(),
            params: *base,
        }],
        Panel::TrafficRate => [307.2e6, 614.4e6, 1228.8e6]
            .iter()
            .map(|&r_c| VariantSpec {
                id: format!("rc_{:.1}mbps", r_c / 1e6),
                params: SystemParams { r_c, ..*base },
            })
            .collect(),
        Panel::DelayBudget => [100e-6, 150e-6]
            .iter()
            .map(|&d_b| VariantSpec {
                id: format!("db_{:.0}us", d_b * 1e6),
                params: SystemParams {
                    d_b,
                    t_reg: 150e-6,
                    ..*base
                },
            })
            .collect(),
        Panel::RegWindow => [250e-6, 400e-6]
            .iter()
            .map(|&t_reg| VariantSpec {
                id: format!("treg_{:.0}us", t_reg * 1e6),
                params: SystemParams {
                    t_reg,
                    d_b: 150e-6,
                    ..*base
                },
            })
            .collect(),
    }
}

/// Runs every sweep point. Points execute on a worker pool; rows come back
/// in spec order (variant-major, then ascending `W`) regardless of
/// completion order, so output is deterministic.
pub fn run_sweep(spec: &SweepSpec) -> Vec<SweepRow> {
    let mut points = Vec::new();
    for variant in &spec.variants {
        for w in spec.w_min..=spec.w_max {
            points.push((variant.clone(), w));
        }
    }
    points
        .par_iter()
        .map(|(variant, w)| run_point(variant, *w, spec))
        .collect()
}

fn run_point(variant: &VariantSpec, w: u32, spec: &SweepSpec) -> SweepRow {
    let mut row = SweepRow {
        w,
        variant_id: variant.id.clone(),
        n_star: 0,
        n_baseline: 0,
        total_proposed: 0,
        total_baseline: 0,
        gain_pct: None,
        window_s: None,
        gap_s: None,
        f_n: None,
        f_r: None,
        k_n: None,
        k_r: None,
        t_sn_s: None,
        t_sr_s: None,
        error: None,
        result: None,
    };
    let params = match validate_params(variant.params) {
        Ok(p) => p,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    let result = solve_with(
        w,
        &params,
        SolveOptions {
            exact_gap: spec.exact_gap,
        },
    );
    row.n_star = result.n_star;
    row.n_baseline = result.n_baseline;
    row.total_proposed = result.total_proposed;
    row.total_baseline = result.total_baseline;
    row.gain_pct = result.gain_pct;
    if let Some(plan) = &result.plan {
        row.window_s = Some(plan.window());
        row.gap_s = Some(plan.gap());
        row.f_n = Some(plan.f_n);
        row.f_r = Some(plan.f_r);
        row.k_n = Some(plan.k_n);
        row.k_r = Some(plan.k_r);
        row.t_sn_s = Some(plan.t_sn);
        row.t_sr_s = Some(plan.t_sr);
        if spec.verify != VerifyMode::Off {
            let report = check_plan(plan, &params, CheckOptions::default());
            if !report.feasible {
                row.error = Some("verify: returned plan failed the analytic check".into());
            }
        }
        if spec.verify == VerifyMode::Simulate && row.error.is_none() {
            match simulate(plan, &params, 3) {
                Ok(trace) => {
                    let profiles: Vec<_> = trace
                        .per_onu
                        .iter()
                        .map(|t| profile(t.onu, plan, &params))
                        .collect();
                    let cmp = compare_with_analysis(&trace, &profiles, plan, &params, 1);
                    if !cmp.passed() {
                        row.error = Some(format!(
                            "verify: {} simulation mismatches, first: {:?}",
                            cmp.mismatches.len(),
                            cmp.mismatches[0]
                        ));
                    }
                }
                Err(e) => row.error = Some(format!("verify: simulation rejected plan: {e}")),
            }
        }
    }
    row.result = Some(result);
    row
}

/// Output formats for [`emit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitFormat {
    Csv,
    JsonLines,
}

/// Formats a float with 9 significant digits, locale-free.
pub fn fmt_sig9(x: f64) -> String {
    format!("{:.8e}", x)
}

pub const CSV_HEADER: &str = "w,variant_id,n_star,n_baseline,total_proposed,total_baseline,\
gain_pct,window_s,gap_s,f_n,f_r,k_n,k_r,t_sn_s,t_sr_s,error";

/// Renders rows with a stable column order; byte-identical across repeated
/// runs on identical inputs.
pub fn emit(rows: &[SweepRow], format: EmitFormat) -> String {
    let mut out = String::new();
    match format {
        EmitFormat::Csv => {
            out.push_str(CSV_HEADER);
            out.push('\n');
            for row in rows {
                let cells = [
                    row.w.to_string(),
                    row.variant_id.clone(),
                    row.n_star.to_string(),
                    row.n_baseline.to_string(),
                    row.total_proposed.to_string(),
                    row.total_baseline.to_string(),
                    opt_f(row.gain_pct),
                    opt_f(row.window_s),
                    opt_f(row.gap_s),
                    opt_u(row.f_n),
                    opt_u(row.f_r),
                    opt_u(row.k_n.map(u64::from)),
                    opt_u(row.k_r.map(u64::from)),
                    opt_f(row.t_sn_s),
                    opt_f(row.t_sr_s),
                    row.error.clone().unwrap_or_default().replace(',', ";"),
                ];
                out.push_str(&cells.join(","));
                out.push('\n');
            }
        }
        EmitFormat::JsonLines => {
            for row in rows {
                out.push_str(&format!(
                    "{{\"w\":{},\"variant_id\":\"{}\",\"n_star\":{},\"n_baseline\":{},\
\"total_proposed\":{},\"total_baseline\":{},\"gain_pct\":{},\"window_s\":{},\"gap_s\":{},\
\"f_n\":{},\"f_r\":{},\"k_n\":{},\"k_r\":{},\"t_sn_s\":{},\"t_sr_s\":{},\"error\":{}}}\n",
                    row.w,
                    row.variant_id,
                    row.n_star,
                    row.n_baseline,
                    row.total_proposed,
                    row.total_baseline,
                    json_f(row.gain_pct),
                    json_f(row.window_s),
                    json_f(row.gap_s),
                    json_u(row.f_n),
                    json_u(row.f_r),
                    json_u(row.k_n.map(u64::from)),
                    json_u(row.k_r.map(u64::from)),
                    json_f(row.t_sn_s),
                    json_f(row.t_sr_s),
                    row.error
                        .as_ref()
                        .map(|e| format!("\"{}\"", e.replace('"', "'")))
                        .unwrap_or_else(|| "null".into()),
                ));
            }
        }
    }
    out
}

fn opt_f(x: Option<f64>) -> String {
    x.map(fmt_sig9).unwrap_or_default()
}

fn opt_u(x: Option<u64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn json_f(x: Option<f64>) -> String {
    x.map(fmt_sig9).unwrap_or_else(|| "null".into())
}

fn json_u(x: Option<u64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_else(|| "null".into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_table_is_header_only() {
        let csv = emit(&[], EmitFormat::Csv);
        assert_eq!(csv.lines().count(), 1);
        assert!(csv.starts_with("w,variant_id,"));
        assert!(emit(&[], EmitFormat::JsonLines).is_empty());
    }

    #[test]
    fn single_point_sweep_has_two_csv_lines() {
        let spec = SweepSpec::new(
            3,
            3,
            panel_variants(Panel::Default, &SystemParams::default()),
        );
        let rows = run_sweep(&spec);
        assert_eq!(rows.len(), 1);
        assert!(rows[0].error.is_none());
        let csv = emit(&rows, EmitFormat::Csv);
        assert_eq!(csv.lines().count(), 2);
        let jsonl = emit(&rows, EmitFormat::JsonLines);
        assert_eq!(jsonl.lines().count(), 1);
        assert!(jsonl.contains("\"variant_id\":\"default\""));
    }

    #[test]
    fn repeated_runs_are_byte_identical() {
        let spec = SweepSpec::new(
            2,
            4,
            panel_variants(Panel::Default, &SystemParams::default()),
        );
        let first = emit(&run_sweep(&spec), EmitFormat::Csv);
        let second = emit(&run_sweep(&spec), EmitFormat::Csv);
        assert_eq!(first.as_bytes(), second.as_bytes());
    }

    #[test]
    fn sig9_formatting() {
        assert_eq!(fmt_sig9(42.857142857142854), "4.28571429e1");
        assert_eq!(fmt_sig9(0.00015), "1.50000000e-4");
    }

    #[test]
    fn higher_traffic_rate_yields_higher_gain() {
        let spec = SweepSpec::new(
            2,
            6,
            panel_variants(Panel::TrafficRate, &SystemParams::default()),
        );
        let rows = run_sweep(&spec);
        let gains = |id: &str| -> Vec<f64> {
            rows.iter()
                .filter(|r| r.variant_id == id)
                .map(|r| r.gain_pct.unwrap())
                .collect()
        };
        let low = gains("rc_307.2mbps");
        let mid = gains("rc_614.4mbps");
        let high = gains("rc_1228.8mbps");
        for w_idx in 0..low.len() {
            assert!(mid[w_idx] >= low[w_idx]);
            assert!(high[w_idx] >= mid[w_idx]);
        }
    }
}
