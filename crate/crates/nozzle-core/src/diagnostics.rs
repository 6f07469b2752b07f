//! Verification passes over a computed solution: Rankine-Hugoniot residuals
//! on the contact, Bernoulli constancy, weak-form residuals against compactly
//! supported test functions, and the far-field stream-function quantities
//! with window energies and decay trends.
//!
//! Everything here reads only (gas, grid, fields), so the same passes run on
//! freshly computed solutions and on solutions re-read from disk.

use crate::error::Result;
use crate::field::Field;
use crate::free_boundary::flux_profile;
use crate::gas::{Gas, StatePoint};
use crate::geometry::MappedGrid;
use crate::inlet::{bump, bump_deriv};
use crate::interp::{bicubic, MonotoneCubic};
use crate::transport::stream_from_flux;

/// Borrowed view of a solution, the common input of every diagnostic.
#[derive(Clone, Copy)]
pub struct SolutionFields<'a> {
    pub gas: &'a Gas,
    pub grid: &'a MappedGrid,
    pub phi_hat: &'a Field,
    pub psi: &'a Field,
    pub s: &'a Field,
}

/// Primitive variables reconstructed from the decomposition:
/// u = grad(phi) + perp(grad(psi)), rho = H, p = S H^gamma, B from (u, rho, p).
pub struct PrimitiveFields {
    pub u1: Field,
    pub u2: Field,
    pub rho: Field,
    pub p: Field,
    pub b: Field,
    /// min over the grid of rho - rho0+/2.
    pub density_margin: f64,
    /// min over the grid of (c - |u|) - (c0 - u0)/2.
    pub subsonic_margin: f64,
}

impl PrimitiveFields {
    pub fn build(sol: &SolutionFields) -> Result<PrimitiveFields> {
        let gas = sol.gas;
        let grid = sol.grid;
        let (nx, ny) = (grid.domain.nx, grid.domain.ny);
        let (phi_x1, phi_x2) = grid.grad_physical(sol.phi_hat);
        let (psi_x1, psi_x2) = grid.grad_physical(sol.psi);
        let u0 = gas.params.u0;
        let mut u1 = Field::zeros(nx, ny);
        let mut u2 = Field::zeros(nx, ny);
        let mut rho = Field::zeros(nx, ny);
        let mut p = Field::zeros(nx, ny);
        let mut b = Field::zeros(nx, ny);
        let mut density_margin = f64::INFINITY;
        let mut subsonic_margin = f64::INFINITY;
        let g = gas.params.gamma;
        let half_gap = 0.5 * (gas.background.c0 - u0);
        for i in 0..=nx {
            for j in 0..=ny {
                let q = [u0 + phi_x1[(i, j)], phi_x2[(i, j)]];
                let r = [psi_x1[(i, j)], psi_x2[(i, j)]];
                let state = StatePoint::new(sol.s[(i, j)], q, r);
                let dens = gas.density_h(&state)?;
                let vel = state.velocity();
                let pres = gas.pressure_from(sol.s[(i, j)], dens);
                u1[(i, j)] = vel[0];
                u2[(i, j)] = vel[1];
                rho[(i, j)] = dens;
                p[(i, j)] = pres;
                b[(i, j)] = gas.bernoulli(vel, dens, pres);
                let speed = (vel[0] * vel[0] + vel[1] * vel[1]).sqrt();
                let c = (g * pres / dens).sqrt();
                density_margin = density_margin.min(dens - 0.5 * gas.params.rho_plus);
                subsonic_margin = subsonic_margin.min(c - speed - half_gap);
            }
        }
        Ok(PrimitiveFields {
            u1,
            u2,
            rho,
            p,
            b,
            density_margin,
            subsonic_margin,
        })
    }

    /// Assembles primitives from already-known components (the verify path,
    /// where (u, rho, p) come straight from a solution file).
    pub fn from_components(gas: &Gas, u1: Field, u2: Field, rho: Field, p: Field) -> Self {
        let (nx, ny) = (u1.nx(), u1.ny());
        let g = gas.params.gamma;
        let half_gap = 0.5 * (gas.background.c0 - gas.params.u0);
        let mut b = Field::zeros(nx, ny);
        let mut density_margin = f64::INFINITY;
        let mut subsonic_margin = f64::INFINITY;
        for i in 0..=nx {
            for j in 0..=ny {
                let vel = [u1[(i, j)], u2[(i, j)]];
                b[(i, j)] = gas.bernoulli(vel, rho[(i, j)], p[(i, j)]);
                let speed = (vel[0] * vel[0] + vel[1] * vel[1]).sqrt();
                let c = (g * p[(i, j)] / rho[(i, j)]).sqrt();
                density_margin = density_margin.min(rho[(i, j)] - 0.5 * gas.params.rho_plus);
                subsonic_margin = subsonic_margin.min(c - speed - half_gap);
            }
        }
        PrimitiveFields {
            u1,
            u2,
            rho,
            p,
            b,
            density_margin,
            subsonic_margin,
        }
    }
}

/// Rankine-Hugoniot residual profiles along the contact curve: the pressure
/// mismatch p - p0 (the lower state is constant) and the normal flow u . n_f.
pub struct RhResiduals {
    pub pressure: Vec<f64>,
    pub normal_flow: Vec<f64>,
}

impl RhResiduals {
    pub fn pressure_sup(&self) -> f64 {
        self.pressure.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn normal_sup(&self) -> f64 {
        self.normal_flow.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub fn rankine_hugoniot_residuals(sol: &SolutionFields, prim: &PrimitiveFields) -> RhResiduals {
    let grid = sol.grid;
    let nx = grid.domain.nx;
    let p0 = sol.gas.params.p0;
    let mut pressure = vec![0.0; nx + 1];
    let mut normal_flow = vec![0.0; nx + 1];
    for i in 0..=nx {
        let fp = grid.boundary.slope(i);
        let root = (1.0 + fp * fp).sqrt();
        pressure[i] = prim.p[(i, 0)] - p0;
        normal_flow[i] = (-fp * prim.u1[(i, 0)] + prim.u2[(i, 0)]) / root;
    }
    RhResiduals {
        pressure,
        normal_flow,
    }
}

/// B - B0+ over the upper region, recomputed from (u, rho, p); an algebraic
/// identity of the closure, so it sits at roundoff regardless of
/// convergence.
pub fn bernoulli_residual(sol: &SolutionFields, prim: &PrimitiveFields) -> Field {
    let gas = sol.gas;
    let b0 = gas.background.b0_plus;
    Field::from_fn(sol.grid.domain.nx, sol.grid.domain.ny, |i, j| {
        gas.bernoulli(
            [prim.u1[(i, j)], prim.u2[(i, j)]],
            prim.rho[(i, j)],
            prim.p[(i, j)],
        ) - b0
    })
}

/// One compactly supported tensor-bump test function.
#[derive(Debug, Clone, Copy)]
pub struct TestFunction {
    pub center: [f64; 2],
    pub half_width: [f64; 2],
}

impl TestFunction {
    pub fn value(&self, x1: f64, x2: f64) -> f64 {
        let tx = (x1 - self.center[0] + self.half_width[0]) / (2.0 * self.half_width[0]);
        let ty = (x2 - self.center[1] + self.half_width[1]) / (2.0 * self.half_width[1]);
        bump(tx) * bump(ty)
    }

    pub fn gradient(&self, x1: f64, x2: f64) -> [f64; 2] {
        let (wx, wy) = (2.0 * self.half_width[0], 2.0 * self.half_width[1]);
        let tx = (x1 - self.center[0] + self.half_width[0]) / wx;
        let ty = (x2 - self.center[1] + self.half_width[1]) / wy;
        [
            bump_deriv(tx) * bump(ty) / wx,
            bump(tx) * bump_deriv(ty) / wy,
        ]
    }
}

/// The three weak-form residuals (mass, momentum pair, energy) for one test
/// function.
#[derive(Debug, Clone, Copy)]
pub struct WeakFormResidual {
    pub station: f64,
    pub mass: f64,
    pub momentum: [f64; 2],
    pub energy: f64,
}

/// The default family: tensor bumps centered on the curve at `count` axial
/// stations.
pub fn default_test_functions(grid: &MappedGrid, count: usize) -> Vec<TestFunction> {
    let l = grid.domain.l;
    (0..count)
        .map(|k| {
            let c = l * (k + 1) as f64 / (count + 1) as f64;
            TestFunction {
                center: [c, grid.boundary.at(c)],
                half_width: [l / 8.0, 0.3],
            }
        })
        .collect()
}

/// Weak-form residuals by midpoint quadrature at twice the solution
/// resolution. The lower constant region enters exactly: its only nonzero
/// contribution (the pressure term) is folded into the upper integral by
/// subtracting p0, using that the full-domain integral of grad(xi) vanishes.
pub fn weak_form_residuals(
    sol: &SolutionFields,
    prim: &PrimitiveFields,
    tests: &[TestFunction],
) -> Vec<WeakFormResidual> {
    let grid = sol.grid;
    let (hx, hy) = (grid.domain.hx, grid.domain.hy);
    let (qx, qy) = (0.5 * hx, 0.5 * hy);
    let p0 = sol.gas.params.p0;
    let b0u = sol.gas.background.b0_plus;
    tests
        .iter()
        .map(|tf| {
            let x1_lo = (tf.center[0] - tf.half_width[0]).max(0.0);
            let x1_hi = (tf.center[0] + tf.half_width[0]).min(grid.domain.l);
            let x2_lo = tf.center[1] - tf.half_width[1];
            let x2_hi = (tf.center[1] + tf.half_width[1]).min(1.0);
            let n1 = ((x1_hi - x1_lo) / qx).ceil() as usize;
            let n2 = ((x2_hi - x2_lo) / qy).ceil() as usize;
            let (dx, dy) = ((x1_hi - x1_lo) / n1 as f64, (x2_hi - x2_lo) / n2 as f64);
            let cell = dx * dy;
            let mut mass = 0.0;
            let mut momentum = [0.0; 2];
            let mut energy = 0.0;
            for a in 0..n1 {
                let x1 = x1_lo + (a as f64 + 0.5) * dx;
                let f = grid.boundary.at(x1);
                for bq in 0..n2 {
                    let x2 = x2_lo + (bq as f64 + 0.5) * dy;
                    if x2 <= f {
                        continue; // lower region handled through the p0 shift
                    }
                    let gradxi = tf.gradient(x1, x2);
                    if gradxi[0] == 0.0 && gradxi[1] == 0.0 {
                        continue;
                    }
                    // mapped coordinates of the sample point
                    let y2 = (x2 - f) / (1.0 - f);
                    let u1 = bicubic(&prim.u1, hx, hy, x1, y2);
                    let u2 = bicubic(&prim.u2, hx, hy, x1, y2);
                    let rho = bicubic(&prim.rho, hx, hy, x1, y2);
                    let p = bicubic(&prim.p, hx, hy, x1, y2);
                    let ru = [rho * u1, rho * u2];
                    mass += (ru[0] * gradxi[0] + ru[1] * gradxi[1]) * cell;
                    for k in 0..2 {
                        let uk = if k == 0 { u1 } else { u2 };
                        let flux = [
                            rho * uk * u1 + if k == 0 { p - p0 } else { 0.0 },
                            rho * uk * u2 + if k == 1 { p - p0 } else { 0.0 },
                        ];
                        momentum[k] += (flux[0] * gradxi[0] + flux[1] * gradxi[1]) * cell;
                    }
                    energy += b0u * (ru[0] * gradxi[0] + ru[1] * gradxi[1]) * cell;
                }
            }
            WeakFormResidual {
                station: tf.center[0],
                mass,
                momentum,
                energy,
            }
        })
        .collect()
}

/// One row of the far-field decay table.
#[derive(Debug, Clone, Copy)]
pub struct DecayRow {
    /// Window start L'.
    pub window_start: f64,
    /// Window energy of grad(omega) over [L', L'+1].
    pub energy: f64,
    /// sup |u2| on x1 >= L'.
    pub tail_u2: f64,
    /// sup |p - p0| on x1 >= L'.
    pub tail_dp: f64,
}

/// Far-field bundle: the mass-flux stream function h, omega = dh/dx1, window
/// energies and tail norms with their trend flags.
pub struct FarFieldBundle {
    pub h: Field,
    pub omega: Field,
    /// sup |omega + rho u2|: the discrete defect of the stream identity.
    pub omega_identity_sup: f64,
    pub rows: Vec<DecayRow>,
    /// Log-linear slope of the window energy over the final half.
    pub energy_log_slope: f64,
    /// Energies non-increasing over the last 8 windows, 5% noise allowed.
    pub energy_nonincreasing: bool,
    pub tails_nonincreasing: bool,
}

pub fn far_field_report(sol: &SolutionFields, prim: &PrimitiveFields) -> FarFieldBundle {
    let grid = sol.grid;
    let (nx, ny) = (grid.domain.nx, grid.domain.ny);
    let rho_u1 = Field::from_fn(nx, ny, |i, j| prim.rho[(i, j)] * prim.u1[(i, j)]);
    let h = stream_from_flux(grid, &rho_u1).w;
    let (omega, _) = grid.grad_physical(&h);
    let mut identity: f64 = 0.0;
    for i in 0..=nx {
        for j in 0..=ny {
            identity = identity.max((omega[(i, j)] + prim.rho[(i, j)] * prim.u2[(i, j)]).abs());
        }
    }
    let (om_x1, om_x2) = grid.grad_physical(&omega);
    // window energies: trapezoid in both directions with the map Jacobian
    let windows = (grid.domain.l.floor() as usize).max(1);
    let mut rows = Vec::new();
    for k in 0..windows {
        let lo = k as f64;
        let hi = lo + 1.0;
        let mut energy = 0.0;
        for i in 0..=nx {
            let x1 = grid.domain.x1(i);
            if x1 < lo - 1e-12 || x1 > hi + 1e-12 {
                continue;
            }
            let wx = if x1 - lo < 1e-12 || hi - x1 < 1e-12 {
                0.5
            } else {
                1.0
            };
            let jac = (1.0 - grid.boundary.value(i)) * grid.domain.hy * grid.domain.hx;
            for j in 0..=ny {
                let wy = if j == 0 || j == ny { 0.5 } else { 1.0 };
                let g2 = om_x1[(i, j)] * om_x1[(i, j)] + om_x2[(i, j)] * om_x2[(i, j)];
                energy += wx * wy * g2 * jac;
            }
        }
        let mut tail_u2: f64 = 0.0;
        let mut tail_dp: f64 = 0.0;
        for i in 0..=nx {
            if grid.domain.x1(i) >= lo {
                for j in 0..=ny {
                    tail_u2 = tail_u2.max(prim.u2[(i, j)].abs());
                    tail_dp = tail_dp.max((prim.p[(i, j)] - sol.gas.params.p0).abs());
                }
            }
        }
        rows.push(DecayRow {
            window_start: lo,
            energy,
            tail_u2,
            tail_dp,
        });
    }
    // trend checks over the final stretch
    let half = rows.len() / 2;
    let floor = 1e-24;
    let last8 = rows.len().saturating_sub(8);
    let mut energy_nonincreasing = true;
    for k in last8.max(1)..rows.len() {
        if rows[k].energy > 1.05 * rows[k - 1].energy + floor {
            energy_nonincreasing = false;
        }
    }
    let mut tails_nonincreasing = true;
    for k in half.max(1)..rows.len() {
        if rows[k].tail_u2 > rows[k - 1].tail_u2 * 1.05 + 1e-15
            || rows[k].tail_dp > rows[k - 1].tail_dp * 1.05 + 1e-15
        {
            tails_nonincreasing = false;
        }
    }
    // log-linear fit over the final half (windows above the floor)
    let fit: Vec<(f64, f64)> = rows[half..]
        .iter()
        .filter(|r| r.energy > floor)
        .map(|r| (r.window_start, r.energy.ln()))
        .collect();
    let energy_log_slope = if fit.len() >= 2 {
        let n = fit.len() as f64;
        let mx = fit.iter().map(|p| p.0).sum::<f64>() / n;
        let my = fit.iter().map(|p| p.1).sum::<f64>() / n;
        let num: f64 = fit.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let den: f64 = fit.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        num / den
    } else {
        0.0
    };
    FarFieldBundle {
        h,
        omega,
        omega_identity_sup: identity,
        rows,
        energy_log_slope,
        energy_nonincreasing,
        tails_nonincreasing,
    }
}

/// |grad h|^2 - C along the contact, with the contact constant
/// C = 2 (B0+ p0^{2/g} S_cd^{-2/g} - g/(g-1) p0^{1+1/g} S_cd^{-1/g})
/// evaluated at the contact entropy S_cd = S(0, 0).
pub fn contact_constant_check(
    sol: &SolutionFields,
    prim: &PrimitiveFields,
    h: &Field,
) -> Vec<f64> {
    let gas = sol.gas;
    let g = gas.params.gamma;
    let p0 = gas.params.p0;
    let s_cd = sol.s[(0, 0)];
    let constant = 2.0
        * (gas.background.b0_plus * p0.powf(2.0 / g) * s_cd.powf(-2.0 / g)
            - g / (g - 1.0) * p0.powf(1.0 + 1.0 / g) * s_cd.powf(-1.0 / g));
    let _ = prim;
    let grid = sol.grid;
    let (hx1, hx2) = grid.grad_physical(h);
    (0..=grid.domain.nx)
        .map(|i| hx1[(i, 0)] * hx1[(i, 0)] + hx2[(i, 0)] * hx2[(i, 0)] - constant)
        .collect()
}

/// Entropy as a function of the stream value, sampled along the inlet
/// column: the discrete stand-in for S_en composed with the inverse inlet
/// stream map. Fails when the inlet stream values are not strictly
/// increasing (forward flow lost, or a corrupt stored solution).
pub fn entropy_of_stream(sol: &SolutionFields, h: &Field) -> Result<MonotoneCubic> {
    let ny = sol.grid.domain.ny;
    let knots: Vec<f64> = (0..=ny).map(|j| h[(0, j)]).collect();
    let s_values: Vec<f64> = (0..=ny).map(|j| sol.s[(0, j)]).collect();
    MonotoneCubic::try_new(knots, s_values).map_err(|_| crate::error::SolverError::ForwardFlowLost {
        value: f64::NAN,
        guard: 0.0,
    })
}

/// Pointwise residual of the stream-form Bernoulli identity
/// B0+ rho^2 = |grad h|^2 / 2 + g/(g-1) S(h) rho^{g+1}.
pub fn bernoulli_stream_identity(
    sol: &SolutionFields,
    prim: &PrimitiveFields,
    h: &Field,
    s_of_h: &MonotoneCubic,
) -> Field {
    let grid = sol.grid;
    let (nx, ny) = (grid.domain.nx, grid.domain.ny);
    let gas = sol.gas;
    let g = gas.params.gamma;
    let b0 = gas.background.b0_plus;
    let (hx1, hx2) = grid.grad_physical(h);
    let _ = ny;
    Field::from_fn(nx, ny, |i, j| {
        let rho = prim.rho[(i, j)];
        let grad2 = hx1[(i, j)] * hx1[(i, j)] + hx2[(i, j)] * hx2[(i, j)];
        let entropy = s_of_h.eval(h[(i, j)]);
        b0 * rho * rho - 0.5 * grad2 - g / (g - 1.0) * entropy * rho.powf(g + 1.0)
    })
}

/// Per-column mass flux by composite Simpson (3/8 on the trailing cells for
/// odd counts): a finer quadrature than the trapezoid the free-boundary
/// update enforces, so the drift it reports is the genuine discretization
/// defect of the conservation identity.
pub fn flux_drift_simpson(grid: &MappedGrid, rho_u1: &Field) -> f64 {
    let (nx, ny, hy) = (grid.domain.nx, grid.domain.ny, grid.domain.hy);
    let column = |i: usize| -> f64 {
        let col = rho_u1.column(i);
        let jac = 1.0 - grid.boundary.value(i);
        let mut acc = 0.0;
        let mut j = 0;
        let even_end = if ny % 2 == 0 { ny } else { ny - 3 };
        while j + 2 <= even_end {
            acc += hy / 3.0 * (col[j] + 4.0 * col[j + 1] + col[j + 2]);
            j += 2;
        }
        if ny % 2 == 1 {
            acc += 3.0 * hy / 8.0 * (col[ny - 3] + 3.0 * col[ny - 2] + 3.0 * col[ny - 1] + col[ny]);
        }
        acc * jac
    };
    let inlet = column(0);
    let mut drift: f64 = 0.0;
    for i in 0..=nx {
        drift = drift.max((column(i) - inlet).abs());
    }
    drift / inlet.abs().max(1e-300)
}

/// The summary metrics emitted into report files.
pub struct DiagnosticsReport {
    pub metrics: Vec<(String, f64)>,
    pub rows: Vec<DecayRow>,
}

/// Assembles every diagnostic metric. The primitives are passed in so that
/// a verification pass re-reading (u, rho, p, S) from disk reproduces each
/// metric from exactly the same inputs.
pub fn full_report(sol: &SolutionFields, prim: &PrimitiveFields) -> Result<DiagnosticsReport> {
    let rh = rankine_hugoniot_residuals(sol, prim);
    let bern = bernoulli_residual(sol, prim);
    let tests = default_test_functions(sol.grid, 5);
    let weak = weak_form_residuals(sol, prim, &tests);
    let far = far_field_report(sol, prim);
    let contact = contact_constant_check(sol, prim, &far.h);
    let s_of_h = entropy_of_stream(sol, &far.h)?;
    let stream_identity = bernoulli_stream_identity(sol, prim, &far.h, &s_of_h);
    let rho_u1 = Field::from_fn(sol.grid.domain.nx, sol.grid.domain.ny, |i, j| {
        prim.rho[(i, j)] * prim.u1[(i, j)]
    });
    let trap = flux_profile(sol.grid, &rho_u1);
    let simpson_drift = flux_drift_simpson(sol.grid, &rho_u1);
    let sup = |v: &[f64]| v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let weak_sup = |pick: &dyn Fn(&WeakFormResidual) -> f64| {
        weak.iter().map(|w| pick(w).abs()).fold(0.0, f64::max)
    };
    let mut metrics: Vec<(String, f64)> = Vec::new();
    let mut push = |k: &str, v: f64| metrics.push((k.to_string(), v));
    push("rh_pressure_sup", rh.pressure_sup());
    push("rh_normal_flow_sup", rh.normal_sup());
    push("bernoulli_residual_sup", bern.sup_norm());
    push("weak_mass_sup", weak_sup(&|w| w.mass));
    push("weak_momentum_x1_sup", weak_sup(&|w| w.momentum[0]));
    push("weak_momentum_x2_sup", weak_sup(&|w| w.momentum[1]));
    push("weak_energy_sup", weak_sup(&|w| w.energy));
    push("flux_drift_trapezoid", trap.max_relative_drift());
    push("flux_drift_simpson", simpson_drift);
    push("omega_identity_sup", far.omega_identity_sup);
    push("contact_constant_sup", sup(&contact));
    push("stream_bernoulli_sup", stream_identity.sup_norm());
    push("energy_log_slope", far.energy_log_slope);
    push(
        "energy_nonincreasing",
        if far.energy_nonincreasing { 1.0 } else { 0.0 },
    );
    push(
        "tails_nonincreasing",
        if far.tails_nonincreasing { 1.0 } else { 0.0 },
    );
    push("density_margin", prim.density_margin);
    push("subsonic_margin", prim.subsonic_margin);
    push("compat_defect", sol.grid.boundary.compat_defect());
    Ok(DiagnosticsReport {
        metrics,
        rows: far.rows,
    })
}
