//! `ponplan` — plan, analyze, simulate, and sweep TWDM-EPON fronthaul
//! upstream schedules.

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use ponplan_core::delay_analysis::{check_plan, profile, CheckOptions};
use ponplan_core::model::{validate_params, SystemParams, ValidatedParams};
use ponplan_core::planner::{export_miqp, solve_with, standard_epon_delay_bound, SolveOptions};
use ponplan_core::redistribution::{enumerate_assignments, vacant_slots};
use ponplan_core::simulator::{compare_with_analysis, simulate};
use ponplan_core::slotting::CyclePlan;
use ponplan_core::sweep::{
    emit, fmt_sig9, panel_variants, run_sweep, EmitFormat, Panel, SweepSpec, VerifyMode,
};

#[derive(Parser)]
#[command(name = "ponplan", version, about)]
struct Cli {
    /// Config file with `key = value` parameter overrides.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Line rate per wavelength, bits/s.
    #[arg(long, global = true)]
    r_e_bps: Option<f64>,
    /// eCPRI traffic rate per ONU, bits/s.
    #[arg(long, global = true)]
    r_c_bps: Option<f64>,
    /// Scheduling delay budget, s.
    #[arg(long, global = true)]
    d_b_s: Option<f64>,
    /// Required registration window duration, s.
    #[arg(long, global = true)]
    t_reg_s: Option<f64>,
    /// Maximum gap between registration windows, s.
    #[arg(long, global = true)]
    t_gap_s: Option<f64>,
    /// Guard band per slot, s.
    #[arg(long, global = true)]
    g_s: Option<f64>,
    /// eCPRI basic frame size, bytes.
    #[arg(long, global = true)]
    alpha_bytes: Option<f64>,
    /// Maximum Ethernet payload size, bytes.
    #[arg(long, global = true)]
    e_max_bytes: Option<f64>,
    /// Ethernet header size, bytes.
    #[arg(long, global = true)]
    l_hdr_bytes: Option<f64>,

    /// Output file for the subcommand's primary artifact (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Table output format.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Plan verification applied to solver output.
    #[arg(long, global = true, value_enum, default_value_t = VerifyArg::Analytic)]
    verify: VerifyArg,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    JsonLines,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VerifyArg {
    Off,
    Analytic,
    Simulate,
}

impl From<VerifyArg> for VerifyMode {
    fn from(v: VerifyArg) -> VerifyMode {
        match v {
            VerifyArg::Off => VerifyMode::Off,
            VerifyArg::Analytic => VerifyMode::Analytic,
            VerifyArg::Simulate => VerifyMode::Simulate,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PanelArg {
    /// Single variant with the effective parameters.
    Default,
    /// eCPRI rate steps (307.2 / 614.4 / 1228.8 Mbps).
    TrafficRate,
    /// Delay budgets 100 and 150 us at T_reg = 150 us.
    DelayBudget,
    /// Registration windows 250 and 400 us at D_b = 150 us.
    RegWindow,
}

impl From<PanelArg> for Panel {
    fn from(p: PanelArg) -> Panel {
        match p {
            PanelArg::Default => Panel::Default,
            PanelArg::TrafficRate => Panel::TrafficRate,
            PanelArg::DelayBudget => Panel::DelayBudget,
            PanelArg::RegWindow => Panel::RegWindow,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the registration-cycle slot assignment grid as CSV.
    Map {
        /// ONUs per wavelength outside registration cycles.
        #[arg(long)]
        n: u32,
        /// Number of upstream wavelengths.
        #[arg(long)]
        w: u32,
    },
    /// Maximize ONUs per wavelength for a given wavelength count.
    Solve {
        /// Number of upstream wavelengths.
        #[arg(long)]
        w: u32,
        /// Report only the dedicated-wavelength baseline.
        #[arg(long)]
        baseline: bool,
        /// Write a textual MIQP model of the N* feasibility instance.
        #[arg(long)]
        export_miqp: Option<PathBuf>,
        /// Require the inter-window gap to equal T_gap instead of <=.
        #[arg(long)]
        exact_gap: bool,
        /// Cycle duration for the standard-registration bound report
        /// (default: the solved plan's T_cn).
        #[arg(long)]
        bound_t_c: Option<f64>,
    },
    /// Per-ONU delay/backlog report and feasibility verdict for a plan file.
    Analyze {
        #[arg(long)]
        plan: PathBuf,
        /// Skip the window >= T_reg requirement.
        #[arg(long)]
        no_window_check: bool,
        /// Skip the gap <= T_gap requirement.
        #[arg(long)]
        no_gap_check: bool,
    },
    /// Frame-granular replay of a plan file.
    Simulate {
        #[arg(long)]
        plan: PathBuf,
        /// Super-cycles to replay.
        #[arg(long, default_value_t = 3)]
        cycles: u32,
        /// Per-slot CSV trace output file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Solve across a range of wavelength counts and emit a table.
    Sweep {
        #[arg(long, default_value_t = 2)]
        w_min: u32,
        #[arg(long, default_value_t = 8)]
        w_max: u32,
        /// Parameter variant set.
        #[arg(long, value_enum, default_value_t = PanelArg::Default)]
        panel: PanelArg,
        /// Require the inter-window gap to equal T_gap instead of <=.
        #[arg(long)]
        exact_gap: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn effective_params(cli: &Cli) -> Result<ValidatedParams> {
    let mut params = SystemParams::default();
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        params.apply_kv(&text).context("parsing config")?;
    }
    if let Some(v) = cli.r_e_bps {
        params.r_e = v;
    }
    if let Some(v) = cli.r_c_bps {
        params.r_c = v;
    }
    if let Some(v) = cli.d_b_s {
        params.d_b = v;
    }
    if let Some(v) = cli.t_reg_s {
        params.t_reg = v;
    }
    if let Some(v) = cli.t_gap_s {
        params.t_gap = v;
    }
    if let Some(v) = cli.g_s {
        params.guard = v;
    }
    if let Some(v) = cli.alpha_bytes {
        params.alpha = v * 8.0;
    }
    if let Some(v) = cli.e_max_bytes {
        params.e_max = v * 8.0;
    }
    if let Some(v) = cli.l_hdr_bytes {
        params.l_hdr = v * 8.0;
    }
    Ok(validate_params(params)?)
}

fn write_artifact(cli: &Cli, content: &str) -> Result<()> {
    match &cli.out {
        Some(path) => {
            fs::write(path, content).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{content}"),
    }
    Ok(())
}

fn load_plan(path: &PathBuf) -> Result<CyclePlan> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading plan {}", path.display()))?;
    Ok(CyclePlan::from_kv_str(&text)?)
}

fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Map { n, w } => {
            let assignments = enumerate_assignments(*n, *w)?;
            let mut out = String::from("lambda,i_n,i_r,w_r\n");
            for a in &assignments {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    a.onu.lambda, a.onu.i_n, a.i_r, a.w_r
                ));
            }
            for (i_r, w_r) in vacant_slots(*n, *w)? {
                out.push_str(&format!(",,{i_r},{w_r}\n"));
            }
            write_artifact(cli, &out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve {
            w,
            baseline,
            export_miqp: miqp_path,
            exact_gap,
            bound_t_c,
        } => {
            let params = effective_params(cli)?;
            if *w < 2 {
                bail!("need at least 2 wavelengths, got {w}");
            }
            let result = solve_with(
                *w,
                &params,
                SolveOptions {
                    exact_gap: *exact_gap,
                },
            );
            let mut text = String::new();
            text.push_str(&format!("w={}\n", result.w));
            if !*baseline {
                text.push_str(&format!("n_star={}\n", result.n_star));
            }
            text.push_str(&format!("n_baseline={}\n", result.n_baseline));
            if !*baseline {
                text.push_str(&format!("total_proposed={}\n", result.total_proposed));
            }
            text.push_str(&format!("total_baseline={}\n", result.total_baseline));
            if !*baseline {
                text.push_str(&format!(
                    "gain_pct={}\n",
                    result
                        .gain_pct
                        .map(fmt_sig9)
                        .unwrap_or_else(|| "undefined".into())
                ));
                text.push_str(&format!(
                    "search_iterations={}\nsearch_candidates={}\n",
                    result.stats.n_iterations, result.stats.candidates
                ));
            }
            if let (false, Some(plan)) = (*baseline, &result.plan) {
                text.push_str(&format!(
                    "n_r={}\nf_n={}\nf_r={}\nk_n={}\nk_r={}\n",
                    plan.n_r(),
                    plan.f_n,
                    plan.f_r,
                    plan.k_n,
                    plan.k_r
                ));
                for (key, value) in [
                    ("t_sn_s", plan.t_sn),
                    ("t_sr_s", plan.t_sr),
                    ("t_cn_s", plan.t_cn()),
                    ("t_cr_s", plan.t_cr()),
                    ("window_s", plan.window()),
                    ("gap_s", plan.gap()),
                ] {
                    text.push_str(&format!("{key}={}\n", fmt_sig9(value)));
                }
                match VerifyMode::from(cli.verify) {
                    VerifyMode::Off => {}
                    VerifyMode::Analytic => {
                        let ok = check_plan(plan, &params, CheckOptions::default()).feasible;
                        text.push_str(&format!("verify_analytic={ok}\n"));
                    }
                    VerifyMode::Simulate => {
                        let trace = simulate(plan, &params, 3)?;
                        let profiles: Vec<_> = trace
                            .per_onu
                            .iter()
                            .map(|t| profile(t.onu, plan, &params))
                            .collect();
                        let cmp = compare_with_analysis(&trace, &profiles, plan, &params, 1);
                        text.push_str(&format!(
                            "verify_simulate={}\nsim_max_delay_s={}\n",
                            cmp.passed(),
                            fmt_sig9(trace.max_delay)
                        ));
                    }
                }
            }
            // Standard single-wavelength registration needs T_reg + T_C of
            // headroom, which dwarfs fronthaul budgets.
            let t_c = bound_t_c.or_else(|| result.plan.as_ref().map(|p| p.t_cn()));
            if let Some(t_c) = t_c {
                let bound = standard_epon_delay_bound(params.t_reg, t_c);
                text.push_str(&format!(
                    "standard_epon_bound_s={}\nstandard_epon_bound_exceeds_d_b={}\n",
                    fmt_sig9(bound),
                    bound > params.d_b
                ));
            }
            print!("{text}");
            if let Some(path) = &cli.out {
                if let Some(plan) = &result.plan {
                    fs::write(path, plan.to_kv_string())
                        .with_context(|| format!("writing plan {}", path.display()))?;
                }
            }
            if let Some(path) = miqp_path {
                let n_model = if result.n_star >= 1 { result.n_star } else { 1 };
                fs::write(path, export_miqp(n_model, *w, &params))
                    .with_context(|| format!("writing MIQP model {}", path.display()))?;
            }
            if *baseline || result.n_star >= 1 {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::FAILURE)
            }
        }
        Command::Analyze {
            plan,
            no_window_check,
            no_gap_check,
        } => {
            let params = effective_params(cli)?;
            let plan = load_plan(plan)?;
            plan.validate(&params)?;
            let report = check_plan(
                &plan,
                &params,
                CheckOptions {
                    enforce_window: !*no_window_check,
                    enforce_gap: !*no_gap_check,
                },
            );
            let mut out =
                String::from("lambda,i_n,i_r,d_reg_last_s,d_nr_first_s,b_nr_last_s,verdict\n");
            for r in &report.per_onu {
                let verdict = match (r.delay_ok, r.drain_ok) {
                    (true, true) => "ok",
                    (false, true) => "delay",
                    (true, false) => "drain",
                    (false, false) => "delay+drain",
                };
                out.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    r.onu.lambda,
                    r.onu.i_n,
                    r.i_r,
                    fmt_sig9(r.d_reg_last),
                    fmt_sig9(r.d_nr_first),
                    fmt_sig9(r.b_nr_last),
                    verdict
                ));
            }
            write_artifact(cli, &out)?;
            eprintln!(
                "verdict: {} (window {}: {}, gap {}: {}, worst delay {})",
                if report.feasible {
                    "FEASIBLE"
                } else {
                    "INFEASIBLE"
                },
                fmt_sig9(report.window),
                if report.window_ok { "ok" } else { "violated" },
                fmt_sig9(report.gap),
                if report.gap_ok { "ok" } else { "violated" },
                fmt_sig9(report.worst_delay),
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate {
            plan,
            cycles,
            trace,
        } => {
            let params = effective_params(cli)?;
            let plan = load_plan(plan)?;
            let sim = simulate(&plan, &params, *cycles)?;
            if let Some(path) = trace {
                let mut events: Vec<_> = sim
                    .per_onu
                    .iter()
                    .flat_map(|t| t.events.iter().map(move |ev| (t.onu, ev)))
                    .collect();
                events.sort_by(|(ao, a), (bo, b)| {
                    (a.t_start, a.wavelength, ao.lambda, ao.i_n)
                        .partial_cmp(&(b.t_start, b.wavelength, bo.lambda, bo.i_n))
                        .expect("finite slot times")
                });
                let mut out = String::from(
                    "t_start_s,wavelength,lambda,i_n,cycle_type,frames_served,queue_after_frames,max_delay_s\n",
                );
                for (onu, ev) in events {
                    out.push_str(&format!(
                        "{},{},{},{},{},{},{},{}\n",
                        fmt_sig9(ev.t_start),
                        ev.wavelength,
                        onu.lambda,
                        onu.i_n,
                        ev.cycle_type.label(),
                        ev.frames_served,
                        ev.queue_after,
                        fmt_sig9(ev.max_delay)
                    ));
                }
                fs::write(path, out)
                    .with_context(|| format!("writing trace {}", path.display()))?;
            }
            let end_queues_zero = sim
                .per_onu
                .iter()
                .all(|t| t.end_queues.iter().all(|&q| q == 0));
            println!(
                "super_cycles={}\nmax_delay_s={}\nend_queues_zero={}",
                sim.super_cycles,
                fmt_sig9(sim.max_delay),
                end_queues_zero
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep {
            w_min,
            w_max,
            panel,
            exact_gap,
        } => {
            let params = effective_params(cli)?;
            if *w_min < 2 || w_max < w_min || *w_max > 32 {
                bail!("need 2 <= w_min <= w_max <= 32, got {w_min}..{w_max}");
            }
            let mut spec = SweepSpec::new(*w_min, *w_max, panel_variants((*panel).into(), &params));
            spec.verify = VerifyMode::from(cli.verify);
            spec.exact_gap = *exact_gap;
            let rows = run_sweep(&spec);
            let format = match cli.format {
                FormatArg::Csv => EmitFormat::Csv,
                FormatArg::JsonLines => EmitFormat::JsonLines,
            };
            write_artifact(cli, &emit(&rows, format))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
