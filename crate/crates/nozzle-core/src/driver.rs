//! The three nested fixed-point loops and the domain continuation: inner
//! Picard on (phi, psi) for frozen (f, S), the middle loop updating the free
//! boundary, the outer loop transporting and extending the entropy, and the
//! L-sweep comparing solutions on nested cut-off domains.
//!
//! The update order inside one outer cycle is fixed: potentials, then
//! boundary, then entropy.

use crate::elliptic::{self, LiftFunction, SolverOptions};
use crate::error::{Result, SolverError};
use crate::field::Field;
use crate::free_boundary::{self, flux_profile};
use crate::gas::Gas;
use crate::geometry::{
    compare_on_common_domain, extend_entropy_below, reinterpolate_columns, CutDomain, DiffNorms,
    ExtendedEntropy, FieldBundle, FreeBoundary, MappedGrid,
};
use crate::inlet::InletProfile;
use crate::transport::{self, InletStreamMap};

#[derive(Debug, Clone, Copy)]
pub struct IterationConfig {
    pub tol_inner: f64,
    pub tol_middle: f64,
    pub tol_outer: f64,
    pub max_inner: usize,
    pub max_middle: usize,
    pub max_outer: usize,
    /// Under-relaxation of the free-boundary update (1 = plain update).
    pub theta: f64,
    pub solver: SolverOptions,
}

impl Default for IterationConfig {
    fn default() -> Self {
        IterationConfig {
            tol_inner: 1e-8,
            tol_middle: 1e-8,
            tol_outer: 1e-8,
            max_inner: 50,
            max_middle: 50,
            max_outer: 30,
            theta: 1.0,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct InnerHistory {
    pub iterations: usize,
    pub final_change: f64,
    /// Measured ratio of successive changes (< 1 in the contractive regime).
    pub contraction: f64,
    pub pcg_iterations: usize,
}

#[derive(Debug, Clone)]
pub struct MiddleCycle {
    pub inner: InnerHistory,
    pub delta_f: f64,
    pub compat_defect: f64,
}

#[derive(Debug, Clone)]
pub struct OuterCycle {
    pub middle: Vec<MiddleCycle>,
    pub delta_s: f64,
    pub clamped: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    CapReached,
    GuardError,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::CapReached => "cap_reached",
            SolveStatus::GuardError => "guard_error",
        }
    }
}

/// Sup norms of the perturbation fields and of their finite-difference
/// gradients, the discrete stand-ins for the Hoelder-norm framework.
#[derive(Debug, Clone, Copy, Default)]
pub struct FinalNorms {
    pub f_sup: f64,
    pub f_slope_sup: f64,
    pub phi_sup: f64,
    pub phi_grad_sup: f64,
    pub psi_sup: f64,
    pub psi_grad_sup: f64,
    pub s_sup: f64,
    pub s_grad_sup: f64,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub sigma: f64,
    pub outer: Vec<OuterCycle>,
    pub status: SolveStatus,
    pub norms: FinalNorms,
    pub first_failure: Option<String>,
}

impl SolveReport {
    pub fn outer_cycles(&self) -> usize {
        self.outer.len()
    }

    pub fn total_inner_iterations(&self) -> usize {
        self.outer
            .iter()
            .flat_map(|o| o.middle.iter().map(|m| m.inner.iterations))
            .sum()
    }
}

/// A converged (or best-effort) solution on its final mapped grid.
#[derive(Debug, Clone)]
pub struct Solution {
    pub gas: Gas,
    pub profile: InletProfile,
    pub grid: MappedGrid,
    pub phi_hat: Field,
    pub psi: Field,
    /// Transported entropy on the grid.
    pub s: Field,
    /// The extended entropy backing the last outer iterate.
    pub s_star: ExtendedEntropy,
}

pub struct SolveRun {
    pub report: SolveReport,
    pub solution: Option<Solution>,
}

/// Inner Picard iteration on (phi-hat, psi) for frozen curve and entropy.
/// Each pass solves the stream-function problem from the previous iterate,
/// rebuilds the remainder with the fresh psi, and solves the potential
/// problem; the loop stops when the relative sup change drops below
/// tol_inner.
pub fn inner_picard(
    gas: &Gas,
    grid: &MappedGrid,
    lift: &LiftFunction,
    s_star: &Field,
    init: (Field, Field),
    cfg: &IterationConfig,
) -> Result<(Field, Field, InnerHistory)> {
    let (nx, ny) = (grid.domain.nx, grid.domain.ny);
    let (a11, a22) = elliptic::background_coefficients(gas);
    // frozen data: transverse entropy derivative and the contact datum
    let s_y2 = grid.d_y2(s_star);
    let eta = Field::from_fn(nx, ny, |i, j| grid.k_factor(i) * s_y2[(i, j)]);
    let mut conormal = vec![0.0; nx + 1];
    for i in 0..=nx {
        conormal[i] = gas.contact_neumann_a(grid.boundary.slope(i), s_star[(i, 0)])?;
    }

    let (mut phi_hat, mut psi) = init;
    let mut history = InnerHistory::default();
    let mut prev_change = f64::NAN;
    let u0 = gas.params.u0;
    for iter in 1..=cfg.max_inner {
        // vorticity source from the previous iterate
        let (phi_x1, phi_x2) = grid.grad_physical(&phi_hat);
        let (psi_x1, psi_x2) = grid.grad_physical(&psi);
        let mut source = Field::zeros(nx, ny);
        for i in 0..=nx {
            for j in 0..=ny {
                let state = crate::gas::StatePoint::new(
                    s_star[(i, j)],
                    [u0 + phi_x1[(i, j)], phi_x2[(i, j)]],
                    [psi_x1[(i, j)], psi_x2[(i, j)]],
                );
                source[(i, j)] = gas.vorticity_source_g(&state, eta[(i, j)])?;
            }
        }
        let psi_sol = elliptic::solve_psi(grid, &source, &conormal, Some(&psi), &cfg.solver)?;
        let rem = elliptic::remainder_f(gas, grid, s_star, &phi_hat, &psi_sol.field, a11, a22)?;
        let mut warm_hom = phi_hat.clone();
        warm_hom.scale_add(-1.0, &lift.values);
        let phi_sol = elliptic::solve_phi(
            grid,
            &rem.divergence,
            lift,
            a11,
            a22,
            Some(&warm_hom),
            &cfg.solver,
        )?;

        let change = phi_sol
            .field
            .sup_diff(&phi_hat)
            .max(psi_sol.field.sup_diff(&psi));
        phi_hat = phi_sol.field;
        psi = psi_sol.field;
        history.iterations = iter;
        history.final_change = change;
        history.pcg_iterations += psi_sol.pcg_iterations + phi_sol.pcg_iterations;
        if prev_change.is_finite() && prev_change > 0.0 {
            history.contraction = change / prev_change;
        }
        prev_change = change;
        let scale = phi_hat.sup_norm().max(psi.sup_norm());
        if change <= cfg.tol_inner * scale.max(1e-14) {
            return Ok((phi_hat, psi, history));
        }
    }
    Err(SolverError::CapReached {
        level: "inner",
        change: history.final_change,
        cap: cfg.max_inner,
        target: cfg.tol_inner,
    })
}

/// State produced by the middle loop: fields live on the grid of the last
/// solved curve.
pub struct MiddleResult {
    pub grid: MappedGrid,
    pub phi_hat: Field,
    pub psi: Field,
    pub s_star: Field,
    pub cycles: Vec<MiddleCycle>,
}

/// Middle loop: alternate the inner Picard solve with the mass-flux
/// free-boundary update until the curve stops moving.
pub fn middle_boundary_loop(
    gas: &Gas,
    domain: CutDomain,
    profile: &InletProfile,
    s_star_ext: &ExtendedEntropy,
    f_init: FreeBoundary,
    warm: Option<(MappedGrid, Field, Field)>,
    cfg: &IterationConfig,
) -> Result<MiddleResult> {
    let mut grid = MappedGrid::new(domain, f_init)?;
    let (mut phi_warm, mut psi_warm) = match warm {
        Some((old_grid, phi, psi)) => (
            reinterpolate_columns(&old_grid, &grid, &phi),
            reinterpolate_columns(&old_grid, &grid, &psi),
        ),
        None => (
            Field::zeros(domain.nx, domain.ny),
            Field::zeros(domain.nx, domain.ny),
        ),
    };
    let mut cycles = Vec::new();
    for _cycle in 1..=cfg.max_middle {
        let s_star = s_star_ext.sample_on_grid(&grid);
        let lift = LiftFunction::build(&grid, profile);
        let (phi_hat, psi, inner) = inner_picard(
            gas,
            &grid,
            &lift,
            &s_star,
            (phi_warm.clone(), psi_warm.clone()),
            cfg,
        )?;
        let rho_u1 = transport::mass_flux_field(gas, &grid, &s_star, &phi_hat, &psi)?;
        let f_new = free_boundary::update_boundary(gas, &grid, &rho_u1, cfg.theta)?;
        let delta_f = f_new.sup_diff(&grid.boundary);
        let compat = f_new.compat_defect();
        cycles.push(MiddleCycle {
            inner,
            delta_f,
            compat_defect: compat,
        });
        if compat > 0.02 {
            return Err(SolverError::CompatibilityViolated {
                context: "updated curve endpoint conditions",
                value: compat,
                tol: 0.02,
            });
        }
        if delta_f <= cfg.tol_middle * f_new.sup().max(1.0) {
            return Ok(MiddleResult {
                grid,
                phi_hat,
                psi,
                s_star,
                cycles,
            });
        }
        // move to the new curve: rebuild the grid and carry the fields over
        let new_grid = MappedGrid::new(domain, f_new)?;
        phi_warm = reinterpolate_columns(&grid, &new_grid, &phi_hat);
        psi_warm = reinterpolate_columns(&grid, &new_grid, &psi);
        grid = new_grid;
    }
    let last = cycles.last().map(|c| c.delta_f).unwrap_or(f64::NAN);
    Err(SolverError::CapReached {
        level: "middle",
        change: last,
        cap: cfg.max_middle,
        target: cfg.tol_middle,
    })
}

/// Full solve on one cut-off domain: the outer loop over the entropy.
/// Always returns a report; the solution is present when the run converged.
pub fn outer_entropy_loop(
    gas: &Gas,
    profile: &InletProfile,
    domain: CutDomain,
    cfg: &IterationConfig,
) -> SolveRun {
    match outer_loop_inner(gas, profile, domain, cfg) {
        Ok((solution, outer)) => {
            let norms = final_norms(gas, &solution);
            SolveRun {
                report: SolveReport {
                    sigma: profile.sigma,
                    outer,
                    status: SolveStatus::Converged,
                    norms,
                    first_failure: None,
                },
                solution: Some(solution),
            }
        }
        Err((e, outer)) => {
            let status = match e {
                SolverError::CapReached { .. } => SolveStatus::CapReached,
                _ => SolveStatus::GuardError,
            };
            SolveRun {
                report: SolveReport {
                    sigma: profile.sigma,
                    outer,
                    status,
                    norms: FinalNorms::default(),
                    first_failure: Some(e.to_string()),
                },
                solution: None,
            }
        }
    }
}

type OuterOutcome = std::result::Result<(Solution, Vec<OuterCycle>), (SolverError, Vec<OuterCycle>)>;

fn outer_loop_inner(
    gas: &Gas,
    profile: &InletProfile,
    domain: CutDomain,
    cfg: &IterationConfig,
) -> OuterOutcome {
    let s0 = gas.background.s0_plus;
    let mut s_star_ext = ExtendedEntropy::constant(&domain, s0);
    let mut f = FreeBoundary::flat(domain.nx, domain.hx);
    let mut warm: Option<(MappedGrid, Field, Field)> = None;
    let mut outer = Vec::new();
    for _cycle in 1..=cfg.max_outer {
        let mid = match middle_boundary_loop(
            gas,
            domain,
            profile,
            &s_star_ext,
            f.clone(),
            warm.take(),
            cfg,
        ) {
            Ok(m) => m,
            Err(e) => return Err((e, outer)),
        };
        // entropy transport on the settled curve
        let step = (|| -> Result<(Field, usize)> {
            let v1 =
                transport::mass_flux_field(gas, &mid.grid, &mid.s_star, &mid.phi_hat, &mid.psi)?;
            let stream = transport::stream_function(gas, &mid.grid, &v1)?;
            let map = InletStreamMap::from_stream(&mid.grid, &stream)?;
            let out = transport::transport_entropy(profile, &mid.grid, &stream, &map);
            Ok((out.s, out.clamped))
        })();
        let (s_new, clamped) = match step {
            Ok(v) => v,
            Err(e) => return Err((e, outer)),
        };
        let delta_s = s_new.sup_diff(&mid.s_star);
        outer.push(OuterCycle {
            middle: mid.cycles.clone(),
            delta_s,
            clamped,
        });
        let dev = {
            let mut m: f64 = 0.0;
            for v in s_new.as_slice() {
                m = m.max((v - s0).abs());
            }
            m
        };
        s_star_ext = extend_entropy_below(&mid.grid, &s_new);
        if delta_s <= cfg.tol_outer * dev.max(1.0) {
            let solution = Solution {
                gas: *gas,
                profile: profile.clone(),
                grid: mid.grid,
                phi_hat: mid.phi_hat,
                psi: mid.psi,
                s: s_new,
                s_star: s_star_ext,
            };
            return Ok((solution, outer));
        }
        f = mid.grid.boundary.clone();
        warm = Some((mid.grid, mid.phi_hat, mid.psi));
    }
    let last = outer.last().map(|o| o.delta_s).unwrap_or(f64::NAN);
    Err((
        SolverError::CapReached {
            level: "outer",
            change: last,
            cap: cfg.max_outer,
            target: cfg.tol_outer,
        },
        outer,
    ))
}

fn final_norms(gas: &Gas, sol: &Solution) -> FinalNorms {
    let grid = &sol.grid;
    let (phi_x1, phi_x2) = grid.grad_physical(&sol.phi_hat);
    let (psi_x1, psi_x2) = grid.grad_physical(&sol.psi);
    let (s_x1, s_x2) = grid.grad_physical(&sol.s);
    let sup2 = |a: &Field, b: &Field| -> f64 {
        a.as_slice()
            .iter()
            .zip(b.as_slice())
            .fold(0.0, |m, (x, y)| m.max(x.abs().max(y.abs())))
    };
    let s0 = gas.background.s0_plus;
    let mut s_dev: f64 = 0.0;
    for v in sol.s.as_slice() {
        s_dev = s_dev.max((v - s0).abs());
    }
    FinalNorms {
        f_sup: grid.boundary.sup(),
        f_slope_sup: grid.boundary.sup_slope(),
        phi_sup: sol.phi_hat.sup_norm(),
        phi_grad_sup: sup2(&phi_x1, &phi_x2),
        psi_sup: sol.psi.sup_norm(),
        psi_grad_sup: sup2(&psi_x1, &psi_x2),
        s_sup: s_dev,
        s_grad_sup: sup2(&s_x1, &s_x2),
    }
}

/// Residual summary a converged solution can be checked against: the flux
/// drift and the inner change at exit.
pub fn converged_flux_drift(gas: &Gas, sol: &Solution) -> Result<f64> {
    let s_star = sol.s_star.sample_on_grid(&sol.grid);
    let rho_u1 = transport::mass_flux_field(gas, &sol.grid, &s_star, &sol.phi_hat, &sol.psi)?;
    Ok(flux_profile(&sol.grid, &rho_u1).max_relative_drift())
}

#[derive(Debug, Clone)]
pub struct PairComparison {
    pub l_a: f64,
    pub l_b: f64,
    pub segment: f64,
    pub norms: DiffNorms,
}

pub struct SweepResult {
    pub runs: Vec<(f64, SolveRun)>,
    pub comparisons: Vec<PairComparison>,
}

/// Domain-continuation sweep: solves each length independently (in
/// parallel up to `max_threads`), then compares every pair of successful
/// runs on the shared initial segment [0, L_min / 2].
pub fn continuation_sweep(
    gas: &Gas,
    profile: &InletProfile,
    l_list: &[f64],
    nx_base: usize,
    ny: usize,
    cfg: &IterationConfig,
    max_threads: usize,
) -> Result<SweepResult> {
    assert!(l_list.len() >= 2, "continuation needs at least two lengths");
    for pair in l_list.windows(2) {
        if pair[1] <= pair[0] {
            return Err(SolverError::InvalidDomain(format!(
                "continuation lengths must be strictly increasing, got {} after {}",
                pair[1], pair[0]
            )));
        }
    }
    let l_base = l_list[0];
    let mut runs: Vec<Option<(f64, SolveRun)>> = (0..l_list.len()).map(|_| None).collect();
    let threads = max_threads.max(1);
    let mut offset = 0;
    for batch in l_list.chunks(threads) {
        std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for (k, &l) in batch.iter().enumerate() {
                let cfg = *cfg;
                let gas = *gas;
                let profile = profile.clone();
                handles.push((
                    offset + k,
                    scope.spawn(move || {
                        let nx = ((nx_base as f64) * l / l_base).round() as usize;
                        let domain = CutDomain::new(l, nx, ny)?;
                        Ok::<_, SolverError>((l, outer_entropy_loop(&gas, &profile, domain, &cfg)))
                    }),
                ));
            }
            for (slot, h) in handles {
                if let Ok(r) = h.join().expect("sweep worker panicked") {
                    runs[slot] = Some(r);
                }
            }
        });
        offset += batch.len();
    }
    let runs: Vec<(f64, SolveRun)> = runs.into_iter().flatten().collect();
    let l_min = l_list.iter().cloned().fold(f64::INFINITY, f64::min);
    let segment = l_min / 2.0;
    let mut comparisons = Vec::new();
    for a in 0..runs.len() {
        for b in a + 1..runs.len() {
            let (la, ra) = (&runs[a].0, &runs[a].1);
            let (lb, rb) = (&runs[b].0, &runs[b].1);
            if let (Some(sa), Some(sb)) = (&ra.solution, &rb.solution) {
                let bundle_a = FieldBundle {
                    grid: &sa.grid,
                    phi_hat: &sa.phi_hat,
                    psi: &sa.psi,
                    s: &sa.s,
                };
                let bundle_b = FieldBundle {
                    grid: &sb.grid,
                    phi_hat: &sb.phi_hat,
                    psi: &sb.psi,
                    s: &sb.s,
                };
                comparisons.push(PairComparison {
                    l_a: *la,
                    l_b: *lb,
                    segment,
                    norms: compare_on_common_domain(&bundle_a, &bundle_b, segment),
                });
            }
        }
    }
    Ok(SweepResult { runs, comparisons })
}
