//! Discrete solvers for the two linear problems of each Picard step: the
//! Poisson problem for the stream-function perturbation psi, and the
//! constant-coefficient divergence-form problem for the potential
//! perturbation phi-hat with its homogenizing inlet lift.
//!
//! Both solves happen on the mapped rectangle. The implicit operator is the
//! five-point tensor stencil cx d_y1y1 + cy(i) d_y2y2; the cross-derivative
//! metric terms of the rectangle map are folded into the right-hand side at
//! the previous iterate and converged by defect-correction sweeps, so the
//! returned field satisfies the full mapped equation to solver tolerance.

use crate::error::{Result, SolverError};
use crate::field::Field;
use crate::gas::{Gas, StatePoint};
use crate::geometry::MappedGrid;
use crate::inlet::InletProfile;

/// Linearization coefficients a_ii = d A_i / d q_i at the background state:
/// a11 = rho0+ (1 - u0^2/c0^2), a22 = rho0+. Off-diagonals vanish.
pub fn background_coefficients(gas: &Gas) -> (f64, f64) {
    let rho = gas.params.rho_plus;
    let u0 = gas.params.u0;
    let c0 = gas.background.c0;
    (rho * (1.0 - u0 * u0 / (c0 * c0)), rho)
}

/// Options for the iterative linear solves.
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Relative residual target of the conjugate-gradient solve.
    pub tol: f64,
    /// Iteration cap as a multiple of nx * ny.
    pub max_iter_factor: usize,
    /// Relative change target of the metric defect-correction sweeps.
    pub defect_tol: f64,
    pub max_defect_sweeps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-10,
            max_iter_factor: 10,
            defect_tol: 1e-12,
            max_defect_sweeps: 60,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeBc {
    Dirichlet,
    Neumann,
}

/// The scaled symmetric five-point operator
/// A u = -scale(i,j) [ cx Txx(u) + cy(i) Tyy(u) ]
/// with ghost-eliminated Neumann rows and Dirichlet nodes pinned to zero.
pub struct TensorOperator {
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
    pub cx: f64,
    pub cy: Vec<f64>,
    /// Boundary conditions on the edges x=0, x=L, y=0, y=1.
    pub bc: [EdgeBc; 4],
}

/// Prescribed mapped-coordinate derivative data on Neumann edges
/// (u_y1 on the x-edges, u_y2 on the y-edges).
#[derive(Default)]
pub struct EdgeData {
    pub x0: Option<Vec<f64>>,
    pub x1: Option<Vec<f64>>,
    pub y0: Option<Vec<f64>>,
    pub y1: Option<Vec<f64>>,
}

impl TensorOperator {
    /// The ellipticity bound nu with nu I <= diag(cx, cy) <= I/nu, checked
    /// at assembly; non-positive coefficients mean the map degenerated.
    pub fn ellipticity(&self) -> f64 {
        let mut lo = self.cx;
        let mut hi = self.cx;
        for c in &self.cy {
            lo = lo.min(*c);
            hi = hi.max(*c);
        }
        lo.min(1.0 / hi)
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.ny + 1) + j
    }

    #[inline]
    pub fn pinned(&self, i: usize, j: usize) -> bool {
        (i == 0 && self.bc[0] == EdgeBc::Dirichlet)
            || (i == self.nx && self.bc[1] == EdgeBc::Dirichlet)
            || (j == 0 && self.bc[2] == EdgeBc::Dirichlet)
            || (j == self.ny && self.bc[3] == EdgeBc::Dirichlet)
    }

    /// Row scaling (1/2 per Neumann edge the node sits on) keeping the
    /// ghost-eliminated system symmetric.
    #[inline]
    fn scale(&self, i: usize, j: usize) -> f64 {
        let mut s = 1.0;
        if (i == 0 && self.bc[0] == EdgeBc::Neumann) || (i == self.nx && self.bc[1] == EdgeBc::Neumann)
        {
            s *= 0.5;
        }
        if (j == 0 && self.bc[2] == EdgeBc::Neumann) || (j == self.ny && self.bc[3] == EdgeBc::Neumann)
        {
            s *= 0.5;
        }
        s
    }

    pub fn apply(&self, u: &[f64], out: &mut [f64]) {
        let (nx, ny) = (self.nx, self.ny);
        let ihx2 = 1.0 / (self.hx * self.hx);
        let ihy2 = 1.0 / (self.hy * self.hy);
        for i in 0..=nx {
            let cy = self.cy[i];
            for j in 0..=ny {
                let at = self.idx(i, j);
                if self.pinned(i, j) {
                    out[at] = 0.0;
                    continue;
                }
                let u0 = u[at];
                let txx = if i == 0 {
                    2.0 * (u[self.idx(1, j)] - u0) * ihx2
                } else if i == nx {
                    2.0 * (u[self.idx(nx - 1, j)] - u0) * ihx2
                } else {
                    (u[self.idx(i - 1, j)] + u[self.idx(i + 1, j)] - 2.0 * u0) * ihx2
                };
                let tyy = if j == 0 {
                    2.0 * (u[at + 1] - u0) * ihy2
                } else if j == ny {
                    2.0 * (u[at - 1] - u0) * ihy2
                } else {
                    (u[at - 1] + u[at + 1] - 2.0 * u0) * ihy2
                };
                out[at] = -self.scale(i, j) * (self.cx * txx + cy * tyy);
            }
        }
    }

    /// Right-hand side for A u = b from the PDE right-hand side `rhs` and
    /// the Neumann edge derivative data.
    pub fn assemble_rhs(&self, rhs: &Field, data: &EdgeData) -> Vec<f64> {
        let (nx, ny) = (self.nx, self.ny);
        let mut b = vec![0.0; (nx + 1) * (ny + 1)];
        for i in 0..=nx {
            let cy = self.cy[i];
            for j in 0..=ny {
                let at = self.idx(i, j);
                if self.pinned(i, j) {
                    continue;
                }
                // ghost elimination moves the prescribed edge derivative to
                // the right-hand side: u_ghost = u_inner -/+ 2 h d
                let mut v = rhs[(i, j)];
                if i == 0 {
                    if let Some(d) = &data.x0 {
                        v += self.cx * 2.0 * d[j] / self.hx;
                    }
                }
                if i == nx {
                    if let Some(d) = &data.x1 {
                        v -= self.cx * 2.0 * d[j] / self.hx;
                    }
                }
                if j == 0 {
                    if let Some(d) = &data.y0 {
                        v += cy * 2.0 * d[i] / self.hy;
                    }
                }
                if j == ny {
                    if let Some(d) = &data.y1 {
                        v -= cy * 2.0 * d[i] / self.hy;
                    }
                }
                b[at] = -self.scale(i, j) * v;
            }
        }
        b
    }

    fn diagonal(&self) -> Vec<f64> {
        let (nx, ny) = (self.nx, self.ny);
        let ihx2 = 1.0 / (self.hx * self.hx);
        let ihy2 = 1.0 / (self.hy * self.hy);
        let mut d = vec![1.0; (nx + 1) * (ny + 1)];
        for i in 0..=nx {
            for j in 0..=ny {
                if !self.pinned(i, j) {
                    d[self.idx(i, j)] =
                        self.scale(i, j) * 2.0 * (self.cx * ihx2 + self.cy[i] * ihy2);
                }
            }
        }
        d
    }

    /// Jacobi-preconditioned conjugate gradients; returns (solution,
    /// iterations, final relative residual).
    pub fn solve_pcg(
        &self,
        b: &[f64],
        x0: Option<&[f64]>,
        opts: &SolverOptions,
    ) -> Result<(Vec<f64>, usize, f64)> {
        let n = (self.nx + 1) * (self.ny + 1);
        let cap = (self.max_cap(opts)).max(64);
        let norm_b = dot(b, b).sqrt();
        if norm_b == 0.0 {
            return Ok((vec![0.0; n], 0, 0.0));
        }
        let target = opts.tol * norm_b;
        let diag = self.diagonal();
        let mut x = match x0 {
            Some(x0) => x0.to_vec(),
            None => vec![0.0; n],
        };
        // pinned nodes carry value 0 by convention
        for i in 0..=self.nx {
            for j in 0..=self.ny {
                if self.pinned(i, j) {
                    x[self.idx(i, j)] = 0.0;
                }
            }
        }
        let mut r = vec![0.0; n];
        self.apply(&x, &mut r);
        for k in 0..n {
            r[k] = b[k] - r[k];
        }
        let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut q = vec![0.0; n];
        let mut res = dot(&r, &r).sqrt();
        let mut iterations = 0;
        while res > target && iterations < cap {
            self.apply(&p, &mut q);
            let pq = dot(&p, &q);
            if !pq.is_finite() || pq <= 0.0 {
                return Err(SolverError::SolverDiverged {
                    residual: res / norm_b,
                    iterations,
                    target: opts.tol,
                });
            }
            let alpha = rz / pq;
            for k in 0..n {
                x[k] += alpha * p[k];
                r[k] -= alpha * q[k];
            }
            for k in 0..n {
                z[k] = r[k] / diag[k];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..n {
                p[k] = z[k] + beta * p[k];
            }
            res = dot(&r, &r).sqrt();
            iterations += 1;
        }
        if res > target {
            return Err(SolverError::SolverDiverged {
                residual: res / norm_b,
                iterations,
                target: opts.tol,
            });
        }
        Ok((x, iterations, res / norm_b))
    }

    fn max_cap(&self, opts: &SolverOptions) -> usize {
        opts.max_iter_factor * self.nx * self.ny
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn d_y2y2(u: &Field, hy: f64) -> Field {
    let (nx, ny) = (u.nx(), u.ny());
    let ih2 = 1.0 / (hy * hy);
    Field::from_fn(nx, ny, |i, j| {
        if j == 0 {
            (2.0 * u[(i, 0)] - 5.0 * u[(i, 1)] + 4.0 * u[(i, 2)] - u[(i, 3)]) * ih2
        } else if j == ny {
            (2.0 * u[(i, ny)] - 5.0 * u[(i, ny - 1)] + 4.0 * u[(i, ny - 2)] - u[(i, ny - 3)]) * ih2
        } else {
            (u[(i, j - 1)] - 2.0 * u[(i, j)] + u[(i, j + 1)]) * ih2
        }
    })
}

/// The metric correction 2 J u_y1y2 + J^2 u_y2y2 + (d2y2/dx1^2) u_y2, i.e.
/// everything d^2/dx1^2 picks up beyond u_y1y1 under the rectangle map.
fn metric_correction(grid: &MappedGrid, u: &Field) -> Field {
    let uy2 = grid.d_y2(u);
    let uy1y2 = grid.d_y1(&uy2);
    let uy2y2 = d_y2y2(u, grid.domain.hy);
    Field::from_fn(grid.domain.nx, grid.domain.ny, |i, j| {
        let jf = grid.j_factor(i, j);
        2.0 * jf * uy1y2[(i, j)] + jf * jf * uy2y2[(i, j)] + grid.dj_factor(i, j) * uy2[(i, j)]
    })
}

/// Result of one elliptic solve.
#[derive(Debug, Clone)]
pub struct EllipticSolution {
    pub field: Field,
    pub pcg_iterations: usize,
    pub defect_sweeps: usize,
    pub residual: f64,
}

/// Solves the stream-function problem: Delta psi = source in the curved
/// domain, psi = 0 on the top wall, d psi/d x1 = 0 at inlet and exit, and
/// conormal flux grad(psi) . n_f = conormal on the contact edge.
pub fn solve_psi(
    grid: &MappedGrid,
    source: &Field,
    conormal: &[f64],
    warm: Option<&Field>,
    opts: &SolverOptions,
) -> Result<EllipticSolution> {
    let (nx, ny) = (grid.domain.nx, grid.domain.ny);
    assert_eq!(conormal.len(), nx + 1);
    let op = TensorOperator {
        nx,
        ny,
        hx: grid.domain.hx,
        hy: grid.domain.hy,
        cx: 1.0,
        cy: (0..=nx)
            .map(|i| {
                let k = grid.k_factor(i);
                k * k
            })
            .collect(),
        bc: [EdgeBc::Neumann, EdgeBc::Neumann, EdgeBc::Neumann, EdgeBc::Dirichlet],
    };
    debug_assert!(op.ellipticity() > 0.0, "operator lost ellipticity");
    let curved = grid.boundary.sup() > 0.0 || grid.boundary.sup_slope() > 0.0;
    let mut u = warm.cloned().unwrap_or_else(|| Field::zeros(nx, ny));
    let mut iterations_total = 0;
    let mut residual;
    let mut sweeps = 0;
    let max_sweeps = if curved { opts.max_defect_sweeps } else { 1 };
    loop {
        sweeps += 1;
        // contact-edge flux in mapped terms; the tangential lag term and the
        // inlet/exit metric terms use the previous sweep's field
        let uy1 = grid.d_y1(&u);
        let uy2 = grid.d_y2(&u);
        let mut y0 = vec![0.0; nx + 1];
        for i in 0..=nx {
            let fp = grid.boundary.slope(i);
            let k = grid.k_factor(i);
            let root = (1.0 + fp * fp).sqrt();
            y0[i] = (conormal[i] * root + fp * uy1[(i, 0)]) / (k * (1.0 + fp * fp));
        }
        let mut x0 = vec![0.0; ny + 1];
        let mut x1 = vec![0.0; ny + 1];
        for j in 0..=ny {
            x0[j] = -grid.j_factor(0, j) * uy2[(0, j)];
            x1[j] = -grid.j_factor(nx, j) * uy2[(nx, j)];
        }
        let mut rhs = source.clone();
        if curved {
            let corr = metric_correction(grid, &u);
            rhs.scale_add(-1.0, &corr);
        }
        let data = EdgeData {
            x0: Some(x0),
            x1: Some(x1),
            y0: Some(y0),
            y1: None,
        };
        let b = op.assemble_rhs(&rhs, &data);
        let (x, iters, res) = op.solve_pcg(&b, Some(u.as_slice()), opts)?;
        iterations_total += iters;
        residual = res;
        let mut next = Field::zeros(nx, ny);
        next.as_mut_slice().copy_from_slice(&x);
        let change = next.sup_diff(&u);
        u = next;
        let scale = u.sup_norm().max(1e-30);
        if !curved || change <= opts.defect_tol * scale || sweeps >= max_sweeps {
            if curved && change > opts.defect_tol * scale && sweeps >= max_sweeps {
                return Err(SolverError::SolverDiverged {
                    residual: change / scale,
                    iterations: sweeps,
                    target: opts.defect_tol,
                });
            }
            break;
        }
    }
    Ok(EllipticSolution {
        field: u,
        pcg_iterations: iterations_total,
        defect_sweeps: sweeps,
        residual,
    })
}

/// The homogenizing lift phi_en*(y1, y2) = eta(y1) phi_en(y2), separable on
/// the mapped rectangle; eta is a smooth cutoff equal to 1 for x1 < L/3 and
/// 0 for x1 > 2L/3.
pub struct LiftFunction {
    pub values: Field,
    trace: Vec<f64>,
    trace_d1: Vec<f64>,
    trace_d2: Vec<f64>,
    eta: Vec<f64>,
    eta_d1: Vec<f64>,
    eta_d2: Vec<f64>,
}

impl LiftFunction {
    pub fn build(grid: &MappedGrid, profile: &InletProfile) -> Self {
        let (nx, ny) = (grid.domain.nx, grid.domain.ny);
        let trace = profile.potential_trace_nodes(ny);
        let trace_d1: Vec<f64> = (0..=ny).map(|j| profile.v_en(grid.domain.y2(j))).collect();
        let trace_d2: Vec<f64> = (0..=ny)
            .map(|j| profile.v_en_deriv(grid.domain.y2(j)))
            .collect();
        let mut eta = vec![0.0; nx + 1];
        let mut eta_d1 = vec![0.0; nx + 1];
        let mut eta_d2 = vec![0.0; nx + 1];
        for i in 0..=nx {
            let (e, d1, d2) = eta_cutoff(grid.domain.l, grid.domain.x1(i));
            eta[i] = e;
            eta_d1[i] = d1;
            eta_d2[i] = d2;
        }
        let values = Field::from_fn(nx, ny, |i, j| eta[i] * trace[j]);
        LiftFunction {
            values,
            trace,
            trace_d1,
            trace_d2,
            eta,
            eta_d1,
            eta_d2,
        }
    }

    pub fn zero(grid: &MappedGrid) -> Self {
        let (nx, ny) = (grid.domain.nx, grid.domain.ny);
        LiftFunction {
            values: Field::zeros(nx, ny),
            trace: vec![0.0; ny + 1],
            trace_d1: vec![0.0; ny + 1],
            trace_d2: vec![0.0; ny + 1],
            eta: vec![0.0; nx + 1],
            eta_d1: vec![0.0; nx + 1],
            eta_d2: vec![0.0; nx + 1],
        }
    }

    /// a11 d^2/dx1^2 + a22 d^2/dx2^2 of the lift, analytically through the
    /// map (the separable form keeps every term exact).
    pub fn elliptic_image(&self, grid: &MappedGrid, a11: f64, a22: f64) -> Field {
        Field::from_fn(grid.domain.nx, grid.domain.ny, |i, j| {
            let jf = grid.j_factor(i, j);
            let k = grid.k_factor(i);
            let uy1y1 = self.eta_d2[i] * self.trace[j];
            let uy1y2 = self.eta_d1[i] * self.trace_d1[j];
            let uy2y2 = self.eta[i] * self.trace_d2[j];
            let uy2 = self.eta[i] * self.trace_d1[j];
            let dxx = uy1y1 + 2.0 * jf * uy1y2 + jf * jf * uy2y2 + grid.dj_factor(i, j) * uy2;
            let dyy = k * k * uy2y2;
            a11 * dxx + a22 * dyy
        })
    }
}

/// Smooth cutoff in x1: 1 below L/3, 0 above 2L/3, built from the standard
/// exp(-1/t) step so all derivatives vanish at the junctions.
pub fn eta_cutoff(l: f64, x1: f64) -> (f64, f64, f64) {
    let a = l / 3.0;
    let b = 2.0 * l / 3.0;
    if x1 <= a {
        return (1.0, 0.0, 0.0);
    }
    if x1 >= b {
        return (0.0, 0.0, 0.0);
    }
    let w = b - a;
    let t = (b - x1) / w; // runs 1 -> 0 across the transition
    let (s, s1, s2) = smooth_step(t);
    (s, -s1 / w, s2 / (w * w))
}

/// The C-infinity step B(t)/(B(t)+B(1-t)) with B(t) = exp(-1/t), together
/// with its first two derivatives.
fn smooth_step(t: f64) -> (f64, f64, f64) {
    if t <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if t >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let bv = |x: f64| (-1.0 / x).exp();
    let b1 = |x: f64| bv(x) / (x * x);
    let b2 = |x: f64| bv(x) * (1.0 / (x * x * x * x) - 2.0 / (x * x * x));
    let (u, v) = (bv(t), bv(1.0 - t));
    let (u1, v1) = (b1(t), -b1(1.0 - t));
    let (u2, v2) = (b2(t), b2(1.0 - t));
    let sum = u + v;
    let s = u / sum;
    let s1 = (u1 * v - u * v1) / (sum * sum);
    let s2 = ((u2 * v - u * v2) * sum - 2.0 * (u1 * v - u * v1) * (u1 + v1)) / (sum * sum * sum);
    (s, s1, s2)
}

/// Solves the potential problem L(phi) = a11 phi_x1x1 + a22 phi_x2x2 =
/// source with phi = phi_en on the inlet, phi = 0 on contact and exit, and
/// zero normal derivative on the top wall. Implemented through the lift:
/// phi = phi_hom + phi_en* with an all-zero-Dirichlet problem for phi_hom.
pub fn solve_phi(
    grid: &MappedGrid,
    source: &Field,
    lift: &LiftFunction,
    a11: f64,
    a22: f64,
    warm_hom: Option<&Field>,
    opts: &SolverOptions,
) -> Result<EllipticSolution> {
    let (nx, ny) = (grid.domain.nx, grid.domain.ny);
    let op = TensorOperator {
        nx,
        ny,
        hx: grid.domain.hx,
        hy: grid.domain.hy,
        cx: a11,
        cy: (0..=nx)
            .map(|i| {
                let k = grid.k_factor(i);
                a22 * k * k
            })
            .collect(),
        bc: [EdgeBc::Dirichlet, EdgeBc::Dirichlet, EdgeBc::Dirichlet, EdgeBc::Neumann],
    };
    debug_assert!(op.ellipticity() > 0.0, "operator lost ellipticity");
    // source for the homogenized problem
    let lift_image = lift.elliptic_image(grid, a11, a22);
    let curved = grid.boundary.sup() > 0.0 || grid.boundary.sup_slope() > 0.0;
    let mut u = warm_hom.cloned().unwrap_or_else(|| Field::zeros(nx, ny));
    let mut iterations_total = 0;
    let mut residual;
    let mut sweeps = 0;
    let max_sweeps = if curved { opts.max_defect_sweeps } else { 1 };
    loop {
        sweeps += 1;
        let mut rhs = source.clone();
        rhs.scale_add(-1.0, &lift_image);
        if curved {
            let mut corr = metric_correction(grid, &u);
            corr.map_in_place(|v| a11 * v);
            rhs.scale_add(-1.0, &corr);
        }
        let data = EdgeData {
            x0: None,
            x1: None,
            y0: None,
            y1: Some(vec![0.0; nx + 1]),
        };
        let b = op.assemble_rhs(&rhs, &data);
        let (x, iters, res) = op.solve_pcg(&b, Some(u.as_slice()), opts)?;
        iterations_total += iters;
        residual = res;
        let mut next = Field::zeros(nx, ny);
        next.as_mut_slice().copy_from_slice(&x);
        let change = next.sup_diff(&u);
        u = next;
        let scale = u.sup_norm().max(1e-30);
        if !curved || change <= opts.defect_tol * scale || sweeps >= max_sweeps {
            if curved && change > opts.defect_tol * scale && sweeps >= max_sweeps {
                return Err(SolverError::SolverDiverged {
                    residual: change / scale,
                    iterations: sweeps,
                    target: opts.defect_tol,
                });
            }
            break;
        }
    }
    let mut phi_hat = u;
    phi_hat.scale_add(1.0, &lift.values);
    Ok(EllipticSolution {
        field: phi_hat,
        pcg_iterations: iterations_total,
        defect_sweeps: sweeps,
        residual,
    })
}

/// The nonlinear remainder F(Q) and its divergence. The closed form
/// F_i = -( F_i(S, grad phi, grad psi) - F_i(V0) - a_ii d_i phi_hat )
/// is algebraically identical to the t-integral definition and strips the
/// background linearization from the full flux.
pub struct Remainder {
    pub f1: Field,
    pub f2: Field,
    pub divergence: Field,
}

pub fn remainder_f(
    gas: &Gas,
    grid: &MappedGrid,
    s_star: &Field,
    phi_hat: &Field,
    psi: &Field,
    a11: f64,
    a22: f64,
) -> Result<Remainder> {
    let (nx, ny) = (grid.domain.nx, grid.domain.ny);
    let (phi_x1, phi_x2) = grid.grad_physical(phi_hat);
    let (psi_x1, psi_x2) = grid.grad_physical(psi);
    let u0 = gas.params.u0;
    let flux0 = gas.params.rho_plus * u0;
    let mut f1 = Field::zeros(nx, ny);
    let mut f2 = Field::zeros(nx, ny);
    for i in 0..=nx {
        for j in 0..=ny {
            let q = [u0 + phi_x1[(i, j)], phi_x2[(i, j)]];
            let r = [psi_x1[(i, j)], psi_x2[(i, j)]];
            let state = StatePoint::new(s_star[(i, j)], q, r);
            let flux = gas.momentum_f(&state)?;
            f1[(i, j)] = -(flux[0] - flux0 - a11 * phi_x1[(i, j)]);
            f2[(i, j)] = -(flux[1] - a22 * phi_x2[(i, j)]);
        }
    }
    let (f1_x1, _) = grid.grad_physical(&f1);
    let (_, f2_x2) = grid.grad_physical(&f2);
    let divergence = Field::from_fn(nx, ny, |i, j| f1_x1[(i, j)] + f2_x2[(i, j)]);
    Ok(Remainder { f1, f2, divergence })
}
