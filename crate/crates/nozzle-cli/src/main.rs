//! Command-line front end: solve on one cut-off domain, verify a stored
//! solution, run the domain-continuation sweep, and emit far-field decay
//! tables.
//!
//! Exit codes: 0 success, 2 configuration problems, 3 guard or divergence
//! failures, 4 I/O failures.

use clap::{Parser, Subcommand};
use nozzle_core::config::{parse_config, ConfigError, RunConfig};
use nozzle_core::diagnostics::{far_field_report, full_report, PrimitiveFields, SolutionFields};
use nozzle_core::driver::{continuation_sweep, outer_entropy_loop, SolveRun, SolveStatus};
use nozzle_core::gas::Gas;
use nozzle_core::geometry::CutDomain;
use nozzle_core::inlet::InletProfile;
use nozzle_core::output;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "nozzle", version, about = "Steady subsonic Euler flow with a contact discontinuity in a 2-D semi-infinite nozzle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve on a single cut-off domain and write solution, boundary and
    /// report files.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-read a solution directory and re-emit its diagnostic report.
    Verify {
        #[arg(long)]
        solution: PathBuf,
    },
    /// Solve on every length of domain.l_list and compare the solutions on
    /// the shared initial segment.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Emit the far-field window table of a stored solution.
    Decay {
        #[arg(long)]
        solution: PathBuf,
        #[arg(long, default_value_t = usize::MAX)]
        windows: usize,
    },
}

const EXIT_VALIDATION: u8 = 2;
const EXIT_GUARD: u8 = 3;
const EXIT_IO: u8 = 4;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Solve { config, out } => cmd_solve(&config, &out),
        Command::Verify { solution } => cmd_verify(&solution),
        Command::Sweep { config, out } => cmd_sweep(&config, &out),
        Command::Decay { solution, windows } => cmd_decay(&solution, windows),
    };
    match code {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => {
            ExitCode::from(code)
        }
    }
}

fn fail(code: u8, message: impl std::fmt::Display) -> u8 {
    eprintln!("error: {message}");
    code
}

fn load_config(path: &Path) -> Result<RunConfig, u8> {
    parse_config(path).map_err(|e| match e {
        ConfigError::Io(m) => fail(EXIT_IO, m),
        other => fail(EXIT_VALIDATION, other),
    })
}

fn build_inputs(cfg: &RunConfig, config_path: &Path) -> Result<(Gas, InletProfile), u8> {
    let gas = Gas::new(cfg.gas).map_err(|e| fail(EXIT_VALIDATION, e))?;
    let profile = match (&cfg.inlet.s_profile, &cfg.inlet.v_profile) {
        (Some(s), Some(v)) => {
            // profile paths are taken relative to the config file
            let base = config_path.parent().unwrap_or(Path::new("."));
            InletProfile::from_tables(
                &gas,
                &base.join(s),
                &base.join(v),
                cfg.inlet.epsilon,
                cfg.inlet.alpha,
            )
        }
        _ => InletProfile::build(&gas, cfg.inlet.a_s, cfg.inlet.a_v, cfg.inlet.epsilon, cfg.inlet.alpha),
    }
    .map_err(|e| fail(EXIT_VALIDATION, e))?;
    Ok((gas, profile))
}

fn write_run_outputs(
    dir: &Path,
    cfg: &RunConfig,
    gas: &Gas,
    run: &mut SolveRun,
) -> Result<(), u8> {
    std::fs::create_dir_all(dir).map_err(|e| fail(EXIT_IO, format!("{}: {e}", dir.display())))?;
    let echo = output::config_echo(cfg);
    let io_err = |e: std::io::Error| fail(EXIT_IO, e);
    match &run.solution {
        Some(sol) => {
            let view = SolutionFields {
                gas,
                grid: &sol.grid,
                phi_hat: &sol.phi_hat,
                psi: &sol.psi,
                s: &sol.s,
            };
            let prim = PrimitiveFields::build(&view).map_err(|e| fail(EXIT_GUARD, e))?;
            // margin violations demote a formally converged run
            if prim.density_margin < 0.0 || prim.subsonic_margin < 0.0 {
                run.report.status = SolveStatus::GuardError;
                run.report.first_failure = Some(format!(
                    "margins violated: density {:.3e}, subsonic {:.3e}",
                    prim.density_margin, prim.subsonic_margin
                ));
            }
            let diag = full_report(&view, &prim).map_err(|e| fail(EXIT_GUARD, e))?;
            if cfg.output.solution {
                output::write_solution(&dir.join("solution.tsv"), &echo, gas, sol, &prim)
                    .map_err(io_err)?;
            }
            if cfg.output.boundary {
                output::write_boundary(&dir.join("boundary.tsv"), &echo, &sol.grid.boundary)
                    .map_err(io_err)?;
            }
            if cfg.output.report {
                output::write_report(&dir.join("report.tsv"), &echo, Some(&run.report), &diag)
                    .map_err(io_err)?;
            }
        }
        None => {
            // no solution: report what happened and flag the partial output
            let empty = nozzle_core::diagnostics::DiagnosticsReport {
                metrics: Vec::new(),
                rows: Vec::new(),
            };
            output::write_report(&dir.join("report.tsv"), &echo, Some(&run.report), &empty)
                .map_err(io_err)?;
        }
    }
    Ok(())
}

fn cmd_solve(config_path: &Path, out: &Path) -> Result<(), u8> {
    let cfg = load_config(config_path)?;
    if cfg.domain.l_list.len() != 1 {
        return Err(fail(
            EXIT_VALIDATION,
            "solve needs a single domain length; use `sweep` for domain.l_list",
        ));
    }
    let (gas, profile) = build_inputs(&cfg, config_path)?;
    let domain = CutDomain::new(cfg.domain.l_list[0], cfg.domain.nx, cfg.domain.ny)
        .map_err(|e| fail(EXIT_VALIDATION, e))?;
    let out_dir = cfg.output.dir.clone().map(|d| out.join(d)).unwrap_or_else(|| out.to_path_buf());
    let mut run = outer_entropy_loop(&gas, &profile, domain, &cfg.iteration);
    write_run_outputs(&out_dir, &cfg, &gas, &mut run)?;
    println!(
        "STATUS: {} (outer_cycles: {}, sigma: {:.6e})",
        run.report.status.as_str(),
        run.report.outer_cycles(),
        run.report.sigma
    );
    if run.report.status == SolveStatus::Converged {
        Ok(())
    } else {
        if let Some(m) = &run.report.first_failure {
            eprintln!("failure: {m}");
        }
        Err(EXIT_GUARD)
    }
}

fn cmd_verify(solution_dir: &Path) -> Result<(), u8> {
    let path = solution_dir.join("solution.tsv");
    let stored = output::read_solution(&path).map_err(|e| fail(EXIT_IO, e))?;
    let view = SolutionFields {
        gas: &stored.gas,
        grid: &stored.grid,
        phi_hat: &stored.phi_hat,
        psi: &stored.psi,
        s: &stored.s,
    };
    let diag = full_report(&view, &stored.prim).map_err(|e| fail(EXIT_GUARD, e))?;
    let echo = vec![("verify".to_string(), "true".to_string())];
    output::write_report(&solution_dir.join("report.tsv"), &echo, None, &diag)
        .map_err(|e| fail(EXIT_IO, e))?;
    println!("STATUS: verified ({} metrics)", diag.metrics.len());
    Ok(())
}

fn cmd_sweep(config_path: &Path, out: &Path) -> Result<(), u8> {
    let cfg = load_config(config_path)?;
    if cfg.domain.l_list.len() < 2 {
        return Err(fail(
            EXIT_VALIDATION,
            "sweep needs at least two lengths in domain.l_list",
        ));
    }
    let (gas, profile) = build_inputs(&cfg, config_path)?;
    let threads = std::env::var("NOZZLE_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        });
    let sweep = continuation_sweep(
        &gas,
        &profile,
        &cfg.domain.l_list,
        cfg.domain.nx,
        cfg.domain.ny,
        &cfg.iteration,
        threads,
    )
    .map_err(|e| fail(EXIT_GUARD, e))?;
    std::fs::create_dir_all(out).map_err(|e| fail(EXIT_IO, format!("{}: {e}", out.display())))?;
    let mut statuses = Vec::new();
    let mut all_ok = true;
    for (l, run) in &sweep.runs {
        statuses.push((*l, run.report.status.as_str().to_string()));
        all_ok &= run.report.status == SolveStatus::Converged;
        // per-length artifacts next to the sweep table
        let sub = out.join(format!("L{l}"));
        let mut owned = SolveRun {
            report: run.report.clone(),
            solution: run.solution.clone(),
        };
        write_run_outputs(&sub, &cfg, &gas, &mut owned)?;
    }
    output::write_sweep(
        &out.join("sweep.tsv"),
        &output::config_echo(&cfg),
        &statuses,
        &sweep.comparisons,
    )
    .map_err(|e| fail(EXIT_IO, e))?;
    println!(
        "STATUS: {} ({} runs, {} comparisons)",
        if all_ok { "converged" } else { "partial" },
        sweep.runs.len(),
        sweep.comparisons.len()
    );
    if all_ok {
        Ok(())
    } else {
        Err(EXIT_GUARD)
    }
}

fn cmd_decay(solution_dir: &Path, windows: usize) -> Result<(), u8> {
    let path = solution_dir.join("solution.tsv");
    let stored = output::read_solution(&path).map_err(|e| fail(EXIT_IO, e))?;
    let view = SolutionFields {
        gas: &stored.gas,
        grid: &stored.grid,
        phi_hat: &stored.phi_hat,
        psi: &stored.psi,
        s: &stored.s,
    };
    let far = far_field_report(&view, &stored.prim);
    output::write_decay(&solution_dir.join("decay.tsv"), &far.rows, windows)
        .map_err(|e| fail(EXIT_IO, e))?;
    println!(
        "STATUS: decay table written ({} windows, energy slope {:.4e}, non-increasing: {})",
        far.rows.len().min(windows),
        far.energy_log_slope,
        far.energy_nonincreasing
    );
    Ok(())
}
