//! Tab-separated output files and the solution reader used by the
//! verification path. All floats are written with 17 significant digits so
//! they round-trip exactly.

use crate::config::RunConfig;
use crate::diagnostics::{DiagnosticsReport, PrimitiveFields};
use crate::driver::{PairComparison, SolveReport, Solution};
use crate::error::{Result as SolverResult, SolverError};
use crate::field::Field;
use crate::gas::{Gas, GasParams};
use crate::geometry::{CutDomain, FreeBoundary, MappedGrid};
use std::fmt::Write as _;
use std::io;
use std::path::Path;

pub const FORMAT_VERSION: u32 = 1;

fn fmt(v: f64) -> String {
    format!("{v:.17e}")
}

fn header(config_echo: &[(String, String)]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# format_version: {FORMAT_VERSION}");
    for (k, v) in config_echo {
        let _ = writeln!(out, "# config {k}: {v}");
    }
    out
}

/// solution.tsv: the full config echo, the constant lower state, and one row
/// per node, row-major by x1 then x2.
pub fn write_solution(
    path: &Path,
    config_echo: &[(String, String)],
    gas: &Gas,
    sol: &Solution,
    prim: &PrimitiveFields,
) -> io::Result<()> {
    let grid = &sol.grid;
    let (nx, ny) = (grid.domain.nx, grid.domain.ny);
    let mut out = header(config_echo);
    let _ = writeln!(
        out,
        "# lower_state: 0 0 {} {} {}",
        fmt(gas.params.rho_minus),
        fmt(gas.params.p0),
        fmt(gas.background.s0_minus)
    );
    let _ = writeln!(out, "# columns: x1 x2 u1 u2 rho p S phi psi");
    let u0 = gas.params.u0;
    for i in 0..=nx {
        let x1 = grid.domain.x1(i);
        for j in 0..=ny {
            let phi = u0 * x1 + sol.phi_hat[(i, j)];
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                fmt(x1),
                fmt(grid.x2(i, j)),
                fmt(prim.u1[(i, j)]),
                fmt(prim.u2[(i, j)]),
                fmt(prim.rho[(i, j)]),
                fmt(prim.p[(i, j)]),
                fmt(sol.s[(i, j)]),
                fmt(phi),
                fmt(sol.psi[(i, j)])
            );
        }
    }
    std::fs::write(path, out)
}

/// boundary.tsv: two columns x1, f.
pub fn write_boundary(
    path: &Path,
    config_echo: &[(String, String)],
    boundary: &FreeBoundary,
) -> io::Result<()> {
    let mut out = header(config_echo);
    let _ = writeln!(out, "# columns: x1 f");
    for i in 0..=boundary.nx() {
        let _ = writeln!(
            out,
            "{}\t{}",
            fmt(i as f64 * boundary.hx()),
            fmt(boundary.value(i))
        );
    }
    std::fs::write(path, out)
}

/// report.tsv: key-value metric lines followed by the per-window decay table.
pub fn write_report(
    path: &Path,
    config_echo: &[(String, String)],
    solve: Option<&SolveReport>,
    diagnostics: &DiagnosticsReport,
) -> io::Result<()> {
    let mut out = header(config_echo);
    if let Some(r) = solve {
        let _ = writeln!(out, "status\t{}", r.status.as_str());
        if let Some(fail) = &r.first_failure {
            let _ = writeln!(out, "# first_failure: {fail}");
        }
        let _ = writeln!(out, "sigma\t{}", fmt(r.sigma));
        let _ = writeln!(out, "outer_cycles\t{}", r.outer_cycles());
        let _ = writeln!(out, "inner_iterations\t{}", r.total_inner_iterations());
        for (k, v) in [
            ("norm_f_sup", r.norms.f_sup),
            ("norm_f_slope_sup", r.norms.f_slope_sup),
            ("norm_phi_sup", r.norms.phi_sup),
            ("norm_phi_grad_sup", r.norms.phi_grad_sup),
            ("norm_psi_sup", r.norms.psi_sup),
            ("norm_psi_grad_sup", r.norms.psi_grad_sup),
            ("norm_s_sup", r.norms.s_sup),
            ("norm_s_grad_sup", r.norms.s_grad_sup),
        ] {
            let _ = writeln!(out, "{k}\t{}", fmt(v));
        }
    }
    for (k, v) in &diagnostics.metrics {
        let _ = writeln!(out, "{k}\t{}", fmt(*v));
    }
    let _ = writeln!(out, "# decay: window_start energy tail_u2 tail_dp");
    for row in &diagnostics.rows {
        let _ = writeln!(
            out,
            "window\t{}\t{}\t{}\t{}",
            fmt(row.window_start),
            fmt(row.energy),
            fmt(row.tail_u2),
            fmt(row.tail_dp)
        );
    }
    std::fs::write(path, out)
}

/// decay.tsv: the last `windows` rows of the decay table.
pub fn write_decay(
    path: &Path,
    rows: &[crate::diagnostics::DecayRow],
    windows: usize,
) -> io::Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "# format_version: {FORMAT_VERSION}");
    let _ = writeln!(out, "# columns: window_start energy tail_u2 tail_dp");
    let skip = rows.len().saturating_sub(windows);
    for row in &rows[skip..] {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}",
            fmt(row.window_start),
            fmt(row.energy),
            fmt(row.tail_u2),
            fmt(row.tail_dp)
        );
    }
    std::fs::write(path, out)
}

/// sweep.tsv: per-run status lines and the pairwise difference table.
pub fn write_sweep(
    path: &Path,
    config_echo: &[(String, String)],
    statuses: &[(f64, String)],
    comparisons: &[PairComparison],
) -> io::Result<()> {
    let mut out = header(config_echo);
    for (l, status) in statuses {
        let _ = writeln!(out, "# run L={l}: {status}");
    }
    let _ = writeln!(
        out,
        "# columns: l_a l_b segment sup_phi sup_psi sup_s sup_f l2_phi l2_psi l2_s l2_f"
    );
    for c in comparisons {
        let n = &c.norms;
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            fmt(c.l_a),
            fmt(c.l_b),
            fmt(c.segment),
            fmt(n.sup_phi),
            fmt(n.sup_psi),
            fmt(n.sup_s),
            fmt(n.sup_f),
            fmt(n.l2_phi),
            fmt(n.l2_psi),
            fmt(n.l2_s),
            fmt(n.l2_f)
        );
    }
    std::fs::write(path, out)
}

/// A solution re-read from disk: everything the diagnostics need.
pub struct StoredSolution {
    pub gas: Gas,
    pub grid: MappedGrid,
    pub phi_hat: Field,
    pub psi: Field,
    pub s: Field,
    pub prim: PrimitiveFields,
}

/// Reads solution.tsv back. The grid is reconstructed from the node
/// coordinates (the j = 0 row of each column carries the curve) and the gas
/// block from the config echo in the header.
pub fn read_solution(path: &Path) -> SolverResult<StoredSolution> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SolverError::InvalidDomain(format!("{}: {e}", path.display())))?;
    let mut gas_kv: Vec<(String, f64)> = Vec::new();
    let mut rows: Vec<[f64; 9]> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if let Some(rest) = line.strip_prefix("# config gas.") {
            if let Some((k, v)) = rest.split_once(':') {
                if let Ok(x) = v.trim().parse::<f64>() {
                    gas_kv.push((k.trim().to_string(), x));
                }
            }
            continue;
        }
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let mut row = [0.0; 9];
        let mut count = 0;
        for (k, tok) in line.split('\t').enumerate() {
            if k >= 9 {
                count += 1;
                break;
            }
            row[k] = tok.trim().parse::<f64>().map_err(|_| {
                SolverError::InvalidDomain(format!(
                    "{}:{lineno}: bad numeric field `{tok}`",
                    path.display()
                ))
            })?;
            count = k + 1;
        }
        if count != 9 {
            return Err(SolverError::InvalidDomain(format!(
                "{}:{lineno}: expected 9 columns",
                path.display()
            )));
        }
        rows.push(row);
    }
    let find = |key: &str| -> SolverResult<f64> {
        gas_kv
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| *v)
            .ok_or_else(|| {
                SolverError::InvalidDomain(format!("missing `gas.{key}` in solution header"))
            })
    };
    let gas = Gas::new(GasParams {
        gamma: find("gamma")?,
        rho_plus: find("rho_plus")?,
        rho_minus: find("rho_minus")?,
        p0: find("p0")?,
        u0: find("u0")?,
    })?;
    if rows.is_empty() {
        return Err(SolverError::InvalidDomain("empty solution file".into()));
    }
    // infer ny from the first column block
    let x1_first = rows[0][0];
    let ny = rows.iter().take_while(|r| r[0] == x1_first).count() - 1;
    if ny < 1 || rows.len() % (ny + 1) != 0 {
        return Err(SolverError::InvalidDomain(
            "solution rows do not form a rectangular grid".into(),
        ));
    }
    let nx = rows.len() / (ny + 1) - 1;
    let l = rows[rows.len() - 1][0];
    let domain = CutDomain::new(l, nx, ny)?;
    let curve: Vec<f64> = (0..=nx).map(|i| rows[i * (ny + 1)][1]).collect();
    let mut boundary = FreeBoundary::from_values(curve, domain.hx)?;
    // solver-produced curves carry the iteration-set slope convention
    boundary.enforce_endpoint_compatibility();
    let grid = MappedGrid::new(domain, boundary)?;
    let get = |col: usize| Field::from_fn(nx, ny, |i, j| rows[i * (ny + 1) + j][col]);
    let u1 = get(2);
    let u2 = get(3);
    let rho = get(4);
    let p = get(5);
    let s = get(6);
    let u0 = gas.params.u0;
    let phi_hat = Field::from_fn(nx, ny, |i, j| rows[i * (ny + 1) + j][7] - u0 * grid.domain.x1(i));
    let psi = get(8);
    let prim = PrimitiveFields::from_components(&gas, u1, u2, rho, p);
    Ok(StoredSolution {
        gas,
        grid,
        phi_hat,
        psi,
        s: s.clone(),
        prim,
    })
}

/// Echo block for outputs produced without a config file (sweep sub-runs).
pub fn config_echo(config: &RunConfig) -> Vec<(String, String)> {
    config.echo.clone()
}
