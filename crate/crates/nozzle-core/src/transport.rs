//! Entropy transport by the explicit streamline construction: stream
//! function w from column quadrature, monotone inlet map, level-set pullback
//! to the inlet, and composition with the inlet entropy trace.

use crate::error::{Result, SolverError};
use crate::field::Field;
use crate::gas::{Gas, StatePoint};
use crate::geometry::MappedGrid;
use crate::inlet::InletProfile;
use crate::interp::MonotoneCubic;

/// Axial mass flux rho* u1* = H(S*, grad phi, grad psi)(phi_x1 + psi_x2)
/// on the mapped grid nodes.
pub fn mass_flux_field(
    gas: &Gas,
    grid: &MappedGrid,
    s_star: &Field,
    phi_hat: &Field,
    psi: &Field,
) -> Result<Field> {
    let (nx, ny) = (grid.domain.nx, grid.domain.ny);
    let (phi_x1, phi_x2) = grid.grad_physical(phi_hat);
    let (psi_x1, psi_x2) = grid.grad_physical(psi);
    let u0 = gas.params.u0;
    let mut v1 = Field::zeros(nx, ny);
    for i in 0..=nx {
        for j in 0..=ny {
            let q = [u0 + phi_x1[(i, j)], phi_x2[(i, j)]];
            let r = [psi_x1[(i, j)], psi_x2[(i, j)]];
            let state = StatePoint::new(s_star[(i, j)], q, r);
            let h = gas.density_h(&state)?;
            v1[(i, j)] = h * (q[0] + r[1]);
        }
    }
    Ok(v1)
}

/// The stream function w(x1, x2) = integral from the top wall of the axial
/// mass flux, so w = 0 on the wall and w < 0 below it.
#[derive(Debug, Clone)]
pub struct StreamFunctionField {
    pub w: Field,
    /// Strict monotonicity in x2, per column.
    pub monotone_columns: Vec<bool>,
}

impl StreamFunctionField {
    pub fn all_monotone(&self) -> bool {
        self.monotone_columns.iter().all(|m| *m)
    }
}

/// Column-wise cumulative trapezoid of the axial mass flux, with the
/// forward-flow guard V . e1 >= 0.1 rho0+ u0.
pub fn stream_function(gas: &Gas, grid: &MappedGrid, v1: &Field) -> Result<StreamFunctionField> {
    let guard = 0.1 * gas.params.rho_plus * gas.params.u0;
    let mut low = f64::INFINITY;
    for v in v1.as_slice() {
        low = low.min(*v);
    }
    if low < guard {
        return Err(SolverError::ForwardFlowLost { value: low, guard });
    }
    Ok(stream_from_flux(grid, v1))
}

/// The quadrature part alone (no guard); used by the diagnostics as well.
pub fn stream_from_flux(grid: &MappedGrid, v1: &Field) -> StreamFunctionField {
    let (nx, ny, hy) = (grid.domain.nx, grid.domain.ny, grid.domain.hy);
    let mut w = Field::zeros(nx, ny);
    let mut monotone_columns = vec![true; nx + 1];
    for i in 0..=nx {
        let jac = (1.0 - grid.boundary.value(i)) * hy;
        w[(i, ny)] = 0.0;
        for j in (0..ny).rev() {
            let step = 0.5 * jac * (v1[(i, j)] + v1[(i, j + 1)]);
            w[(i, j)] = w[(i, j + 1)] - step;
            if step <= 0.0 {
                monotone_columns[i] = false;
            }
        }
    }
    StreamFunctionField {
        w,
        monotone_columns,
    }
}

/// The invertible inlet map G(x2) = w(0, x2) with its monotone-cubic inverse.
#[derive(Debug, Clone)]
pub struct InletStreamMap {
    inverse: MonotoneCubic,
    range: (f64, f64),
}

impl InletStreamMap {
    pub fn from_stream(grid: &MappedGrid, stream: &StreamFunctionField) -> Result<Self> {
        let ny = grid.domain.ny;
        let knots: Vec<f64> = (0..=ny).map(|j| stream.w[(0, j)]).collect();
        for pair in knots.windows(2) {
            if pair[1] <= pair[0] {
                return Err(SolverError::ForwardFlowLost {
                    value: pair[1] - pair[0],
                    guard: 0.0,
                });
            }
        }
        let heights: Vec<f64> = (0..=ny).map(|j| grid.domain.y2(j)).collect();
        let range = (knots[0], knots[ny]);
        Ok(InletStreamMap {
            inverse: MonotoneCubic::new(knots, heights),
            range,
        })
    }

    /// G^{-1}(w): the inlet height whose streamline carries the value w.
    /// Out-of-range arguments are clamped (possible at intermediate
    /// iterates) and reported through the flag.
    pub fn pullback(&self, w: f64) -> (f64, bool) {
        let clamped = w < self.range.0 || w > self.range.1;
        (self.inverse.eval(w), clamped)
    }

    pub fn range(&self) -> (f64, f64) {
        self.range
    }
}

/// Result of one entropy-transport pass.
pub struct TransportedEntropy {
    pub s: Field,
    /// Number of nodes whose stream value fell outside the inlet range.
    pub clamped: usize,
}

/// S = S_en composed with the level-set pullback; the inlet column is copied
/// from the trace exactly.
pub fn transport_entropy(
    profile: &InletProfile,
    grid: &MappedGrid,
    stream: &StreamFunctionField,
    map: &InletStreamMap,
) -> TransportedEntropy {
    let (nx, ny) = (grid.domain.nx, grid.domain.ny);
    let mut clamped = 0usize;
    let s = Field::from_fn(nx, ny, |i, j| {
        if i == 0 {
            profile.s_en(grid.domain.y2(j))
        } else {
            let (y0, was_clamped) = map.pullback(stream.w[(i, j)]);
            if was_clamped {
                clamped += 1;
            }
            profile.s_en(y0)
        }
    });
    TransportedEntropy { s, clamped }
}

/// Discrete advection residual H (grad phi + perp grad psi) . grad S, the
/// quantity the transport construction drives to zero under refinement.
pub fn advection_residual(
    gas: &Gas,
    grid: &MappedGrid,
    s_star: &Field,
    phi_hat: &Field,
    psi: &Field,
    s: &Field,
) -> Result<Field> {
    let (nx, ny) = (grid.domain.nx, grid.domain.ny);
    let (phi_x1, phi_x2) = grid.grad_physical(phi_hat);
    let (psi_x1, psi_x2) = grid.grad_physical(psi);
    let (s_x1, s_x2) = grid.grad_physical(s);
    let u0 = gas.params.u0;
    let mut out = Field::zeros(nx, ny);
    for i in 0..=nx {
        for j in 0..=ny {
            let q = [u0 + phi_x1[(i, j)], phi_x2[(i, j)]];
            let r = [psi_x1[(i, j)], psi_x2[(i, j)]];
            let state = StatePoint::new(s_star[(i, j)], q, r);
            let h = gas.density_h(&state)?;
            let u = state.velocity();
            out[(i, j)] = h * (u[0] * s_x1[(i, j)] + u[1] * s_x2[(i, j)]);
        }
    }
    Ok(out)
}
