//! Command-line driver: single solves (`run`) and experiment studies
//! (`study`) with CSV/JSON artifacts.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use schrodingerize::config::{load_system, parse_profile};
use schrodingerize::error::SchroError;
use schrodingerize::harness::{
    self, fmt_f64, ComplexityInputs, GrowthFamily,
};
use schrodingerize::oracle;
use schrodingerize::pipeline::{self, SolveOptions};
use schrodingerize::profiles::InitProfile;

#[derive(Parser)]
#[command(
    name = "schrodingerize",
    about = "Warped-phase (Schrödingerization) simulator for linear non-unitary dynamics",
    version
)]
struct Cli {
    /// Cap the number of worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory for artifacts (default: $SCHRODINGERIZE_OUT or ./out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one system and compare against the reference oracle.
    Run(RunArgs),
    /// Run an experiment study and emit CSV + JSON reports.
    Study(StudyArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Builtin system name (std2, std2-homo, zero, scalar-decay,
    /// scalar-source, rotation, td-scalar) or a TOML file path.
    #[arg(long)]
    system: String,
    /// Profile selection: exp_abs | cutoff:d=V | hermite:r=V | erf:eps=V | quartic:eps=V.
    #[arg(long)]
    psi: Option<String>,
    /// Accuracy knob (domain truncation and resolution rule).
    #[arg(long)]
    eps: Option<f64>,
    /// Domain override: left extent.
    #[arg(long, value_name = "L")]
    l: Option<f64>,
    /// Domain override: right extent.
    #[arg(long, value_name = "R")]
    r: Option<f64>,
    /// Grid override (power of two).
    #[arg(long)]
    np: Option<usize>,
    /// Average the recovery over the whole window.
    #[arg(long)]
    average: bool,
    /// Force the lifted clock-coordinate evolution.
    #[arg(long)]
    lift: bool,
    #[arg(long, default_value_t = 256)]
    lift_ns: usize,
    #[arg(long, default_value_t = 4)]
    lift_m: usize,
    /// Clock half-extent (pi S); picked automatically when omitted.
    #[arg(long)]
    lift_s: Option<f64>,
    /// Oracle tolerance for the reference solve.
    #[arg(long, default_value_t = 1e-10)]
    oracle_tol: f64,
}

#[derive(Args)]
struct StudyArgs {
    /// converge | mu-scaling | growth | truncation | complexity
    study: String,
    #[arg(long, default_value = "std2")]
    system: String,
    #[arg(long)]
    psi: Option<String>,
    #[arg(long)]
    eps: Option<f64>,
    /// Grid ladder, comma separated (converge).
    #[arg(long, default_value = "64,128,256,512,1024")]
    np_list: String,
    /// Accuracy ladder, comma separated (mu-scaling).
    #[arg(long, default_value = "1e-2,1e-3,1e-4,1e-5,1e-6,1e-7")]
    eps_list: String,
    /// Grid cap for the minimal-resolution walk.
    #[arg(long, default_value_t = 1 << 25)]
    np_cap: usize,
    /// Largest derivative order (growth).
    #[arg(long, default_value_t = 40)]
    rmax: usize,
    /// Left-extent ladder, comma separated (truncation).
    #[arg(long, default_value = "5,6,7,8,9,10")]
    l_list: String,
    /// Cells per unit length for the truncation ladder (each box width
    /// times this must be a power of two).
    #[arg(long, default_value_t = 256)]
    np: usize,
    #[arg(long, default_value_t = 1e-10)]
    oracle_tol: f64,
    /// Complexity-model inputs.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    horizon: f64,
    #[arg(long, default_value_t = 1.0)]
    ratio: f64,
    #[arg(long)]
    beta: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        // Ignore failure if a pool already exists.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let out_dir = cli
        .out
        .clone()
        .or_else(|| std::env::var_os("SCHRODINGERIZE_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args, &out_dir),
        Command::Study(args) => cmd_study(args, &out_dir),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                SchroError::Config(_) | SchroError::InvalidInput(_) | SchroError::Io(_) => {
                    ExitCode::from(2)
                }
                SchroError::Numerical(_) => ExitCode::from(3),
            }
        }
    }
}

fn resolve_profile(
    spec: Option<&str>,
    meta_psi: Option<&str>,
    eps: f64,
) -> Result<InitProfile<f64>, SchroError> {
    let spec = spec.or(meta_psi).unwrap_or("erf");
    parse_profile(spec, eps)
}

fn cmd_run(args: &RunArgs, out_dir: &PathBuf) -> Result<(), SchroError> {
    let (sys, meta) = load_system::<f64>(&args.system)?;
    let eps = args.eps.or(meta.epsilon).unwrap_or(1e-6);
    let profile = resolve_profile(args.psi.as_deref(), meta.psi.as_deref(), eps)?;
    let mut opts = SolveOptions::new(eps);
    if let (Some(l), Some(r)) = (args.l, args.r) {
        opts.domain_override = Some((l, r));
    } else if args.l.is_some() || args.r.is_some() {
        return Err(SchroError::config("domain override needs both --l and --r"));
    }
    opts.np_override = args.np;
    opts.mode_average = args.average;
    opts.force_lift = args.lift;
    // file-level [lift] settings, overridden by explicit flags
    if let Some(sec) = meta.lift {
        if let Some(ns) = sec.ns {
            opts.lift_n_s = ns;
        }
        if let Some(m) = sec.m {
            opts.lift_m = m;
        }
        opts.lift_s_half = sec.s_half;
    }
    if args.lift_ns != 256 {
        opts.lift_n_s = args.lift_ns;
    }
    if args.lift_m != 4 {
        opts.lift_m = args.lift_m;
    }
    if args.lift_s.is_some() {
        opts.lift_s_half = args.lift_s;
    }

    let started = std::time::Instant::now();
    let out = pipeline::solve(&sys, &profile, &opts)?;
    let runtime = started.elapsed().as_secs_f64();
    let oracle = oracle::solve_reference(&sys, args.oracle_tol)?;
    let rel_err = pipeline::relative_error(&out.u, &oracle.u_t);

    println!("system        : {}", meta.id);
    println!("profile       : {}", profile.id());
    println!("epsilon       : {}", fmt_f64(eps));
    println!("domain        : L={} R={}", fmt_f64(out.domain.left()), fmt_f64(out.domain.right()));
    println!("n_p           : {}", out.n_p);
    println!("mu_max        : {}", fmt_f64(out.mu_max));
    println!(
        "p_diamond     : {} (read-back at p={})",
        fmt_f64(out.window.p_diamond),
        fmt_f64(out.domain.grid_point(out.window.k_star))
    );
    for (i, v) in out.u.iter().enumerate() {
        println!("u[{i}]          : {} + {}i", fmt_f64(v.re), fmt_f64(v.im));
    }
    for (i, v) in oracle.u_t.iter().enumerate() {
        println!("oracle u[{i}]   : {} + {}i", fmt_f64(v.re), fmt_f64(v.im));
    }
    println!("rel_error     : {}", fmt_f64(rel_err));
    if let Some(p) = &out.probability {
        println!("pr_w          : {}", fmt_f64(p.pr_w));
        println!("pr_u          : {}", fmt_f64(p.pr_u));
        println!("g             : {}", p.amplification_g);
    }
    if let Some(d) = out.norm_drift {
        println!("norm_drift    : {}", fmt_f64(d));
    }
    println!("runtime_s     : {}", fmt_f64(runtime));

    std::fs::create_dir_all(out_dir)?;
    let summary = serde_json::json!({
        "system": meta.id,
        "profile": profile.id(),
        "epsilon": eps,
        "domain": { "left": out.domain.left(), "right": out.domain.right() },
        "n_p": out.n_p,
        "mu_max": out.mu_max,
        "u": out.u.iter().map(|z| vec![z.re, z.im]).collect::<Vec<_>>(),
        "u_oracle": oracle.u_t.iter().map(|z| vec![z.re, z.im]).collect::<Vec<_>>(),
        "rel_error": rel_err,
        "pr_w": out.probability.as_ref().map(|p| p.pr_w),
        "pr_u": out.probability.as_ref().map(|p| p.pr_u),
        "amplification_g": out.probability.as_ref().map(|p| p.amplification_g),
        "norm_drift": out.norm_drift,
    });
    let path = out_dir.join("run.json");
    std::fs::write(&path, serde_json::to_string_pretty(&summary).expect("json"))?;
    println!("wrote {}", path.display());
    if let Some(state) = &out.state {
        // Recovery-window dump: one row per admissible node.
        let mut csv = String::from("k,p_k,row_norm");
        for i in 0..out.u_f.len() {
            csv.push_str(&format!(",u_f{i}_re,u_f{i}_im"));
        }
        csv.push('\n');
        for &k in &out.window.k_set {
            let p = out.domain.grid_point(k);
            let mut row_norm = 0.0f64;
            for j in 0..state.values.ncols() {
                row_norm += state.values[(k, j)].norm_sqr();
            }
            csv.push_str(&format!("{k},{},{}", fmt_f64(p), fmt_f64(row_norm.sqrt())));
            for j in 0..state.values.ncols() {
                let v = state.values[(k, j)] * num_complex::Complex64::new(p.exp(), 0.0);
                csv.push_str(&format!(",{},{}", fmt_f64(v.re), fmt_f64(v.im)));
            }
            csv.push('\n');
        }
        let rpath = out_dir.join("recovery.csv");
        std::fs::write(&rpath, csv)?;
        println!("wrote {}", rpath.display());
    }
    Ok(())
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, SchroError> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<T>()
                .map_err(|_| SchroError::config(format!("bad {what} entry `{tok}`")))
        })
        .collect()
}

fn write_report(
    out_dir: &PathBuf,
    stem: &str,
    csv: String,
    json: String,
) -> Result<(), SchroError> {
    std::fs::create_dir_all(out_dir)?;
    let csv_path = out_dir.join(format!("{stem}.csv"));
    let json_path = out_dir.join(format!("{stem}.json"));
    std::fs::write(&csv_path, csv)?;
    std::fs::write(&json_path, json)?;
    println!("wrote {}", csv_path.display());
    println!("wrote {}", json_path.display());
    Ok(())
}

fn cmd_study(args: &StudyArgs, out_dir: &PathBuf) -> Result<(), SchroError> {
    match args.study.as_str() {
        "converge" => {
            let (sys, meta) = load_system::<f64>(&args.system)?;
            let eps = args.eps.or(meta.epsilon).unwrap_or(1e-6);
            let profile = resolve_profile(args.psi.as_deref(), meta.psi.as_deref(), eps)?;
            let np_list: Vec<usize> = parse_list(&args.np_list, "np")?;
            let report = harness::convergence_study(
                &sys,
                &meta.id,
                &profile,
                &np_list,
                &SolveOptions::new(eps),
                args.oracle_tol,
            )?;
            println!("global order  : {}", fmt_f64(report.global_order));
            println!(
                "drop-coarsest : {}",
                fmt_f64(report.global_order_drop_coarsest)
            );
            write_report(
                out_dir,
                "converge",
                report.to_csv(),
                serde_json::to_string_pretty(&report).expect("json"),
            )
        }
        "mu-scaling" => {
            let (sys, meta) = load_system::<f64>(&args.system)?;
            let eps_list: Vec<f64> = parse_list(&args.eps_list, "eps")?;
            let family = args.psi.clone().unwrap_or_else(|| "exp_abs".into());
            let builder = |eps: f64| parse_profile::<f64>(&family, eps);
            let report = harness::mu_scaling_study(
                &sys,
                &meta.id,
                &family,
                &builder,
                &eps_list,
                args.np_cap,
                args.oracle_tol,
            )?;
            println!("loglog slope  : {}", fmt_f64(report.loglog_slope));
            println!("linear R^2    : {}", fmt_f64(report.linear_r2));
            println!("max ratio     : {}", fmt_f64(report.max_ratio));
            write_report(
                out_dir,
                "mu_scaling",
                report.to_csv(),
                serde_json::to_string_pretty(&report).expect("json"),
            )
        }
        "growth" => {
            let family = match args.psi.as_deref().unwrap_or("erf") {
                "erf" => GrowthFamily::ErfScaled,
                "cutoff" => GrowthFamily::CutoffScaled,
                other => {
                    return Err(SchroError::config(format!(
                        "growth family must be erf or cutoff, got `{other}`"
                    )))
                }
            };
            let r_list: Vec<usize> = match family {
                GrowthFamily::ErfScaled => [5usize, 10, 20, 40].into_iter().filter(|&r| r <= args.rmax).collect(),
                GrowthFamily::CutoffScaled => [5usize, 10, 15, 20].into_iter().filter(|&r| r <= args.rmax).collect(),
            };
            let report = harness::growth_study::<f64>(family, &r_list)?;
            println!("slope         : {}", fmt_f64(report.slope));
            println!("beta estimate : {}", fmt_f64(report.beta_estimate));
            write_report(
                out_dir,
                "growth",
                report.to_csv(),
                serde_json::to_string_pretty(&report).expect("json"),
            )
        }
        "truncation" => {
            let (sys, meta) = load_system::<f64>(&args.system)?;
            let eps = args.eps.or(meta.epsilon).unwrap_or(1e-6);
            let profile = resolve_profile(args.psi.as_deref(), meta.psi.as_deref(), eps)?;
            let l_list: Vec<f64> = parse_list(&args.l_list, "L")?;
            let report =
                harness::truncation_check(&sys, &meta.id, &profile, &l_list, args.np)?;
            println!("decay rate    : {}", fmt_f64(report.rate));
            write_report(
                out_dir,
                "truncation",
                report.to_csv(),
                serde_json::to_string_pretty(&report).expect("json"),
            )
        }
        "complexity" => {
            let table = harness::query_estimate(ComplexityInputs {
                alpha_h: args.alpha,
                horizon: args.horizon,
                epsilon: args.eps.unwrap_or(1e-6),
                norm_ratio: args.ratio,
                beta: args.beta.unwrap_or(1.0),
            })?;
            for row in &table.rows {
                println!(
                    "{:28} queries {} prep {}{}",
                    row.method,
                    fmt_f64(row.queries),
                    fmt_f64(row.state_prep),
                    if row.reference_formula_only { "  [reference formula only]" } else { "" }
                );
            }
            write_report(
                out_dir,
                "complexity",
                table.to_csv(),
                serde_json::to_string_pretty(&table).expect("json"),
            )
        }
        other => Err(SchroError::config(format!(
            "unknown study `{other}` (converge, mu-scaling, growth, truncation, complexity)"
        ))),
    }
}
