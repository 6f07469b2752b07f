//! Shared helpers for the integration suites: manufactured solutions for
//! both elliptic problems, observed-order fits, and curve builders.
#![allow(dead_code)]

use nozzle_core::elliptic::{self, LiftFunction, SolverOptions};
use nozzle_core::field::Field;
use nozzle_core::gas::Gas;
use nozzle_core::geometry::{CutDomain, FreeBoundary, MappedGrid};

/// Quartic curve c x1^2 (x1-L)^2 scaled to the given peak; satisfies
/// f(0) = 0, f'(0) = f'(L) = 0.
pub fn quartic_boundary(nx: usize, l: f64, peak: f64) -> FreeBoundary {
    let hx = l / nx as f64;
    let norm = (l / 2.0_f64).powi(2) * (l / 2.0 - l).powi(2);
    let values: Vec<f64> = (0..=nx)
        .map(|i| {
            let x = i as f64 * hx;
            peak * x * x * (x - l) * (x - l) / norm
        })
        .collect();
    FreeBoundary::from_values(values, hx).unwrap()
}

/// Least-squares slope of ln(err) against ln(h): the observed order.
pub fn observed_order(hs: &[f64], errs: &[f64]) -> f64 {
    let n = hs.len() as f64;
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

/// Manufactured stream-function solution psi* = cos(pi x1 / L)(1 - x2)^2 in
/// physical coordinates: satisfies the homogeneous inlet/exit and top-wall
/// conditions for any contact curve.
pub struct PsiManufactured {
    pub l: f64,
}

impl PsiManufactured {
    pub fn value(&self, x1: f64, x2: f64) -> f64 {
        (std::f64::consts::PI * x1 / self.l).cos() * (1.0 - x2) * (1.0 - x2)
    }

    pub fn laplacian(&self, x1: f64, x2: f64) -> f64 {
        let k = std::f64::consts::PI / self.l;
        -(k * k) * (k * x1).cos() * (1.0 - x2) * (1.0 - x2) + 2.0 * (k * x1).cos()
    }

    pub fn gradient(&self, x1: f64, x2: f64) -> [f64; 2] {
        let k = std::f64::consts::PI / self.l;
        [
            -k * (k * x1).sin() * (1.0 - x2) * (1.0 - x2),
            -2.0 * (k * x1).cos() * (1.0 - x2),
        ]
    }

    /// Conormal datum grad(psi*) . n_f along the curve.
    pub fn conormal(&self, f: &FreeBoundary, i: usize, x1: f64) -> f64 {
        let fp = f.slope(i);
        let g = self.gradient(x1, f.value(i));
        (-fp * g[0] + g[1]) / (1.0 + fp * fp).sqrt()
    }

    /// Solves on the given grid and returns the sup error at the nodes.
    pub fn solve_error(&self, grid: &MappedGrid, opts: &SolverOptions) -> f64 {
        let (nx, ny) = (grid.domain.nx, grid.domain.ny);
        let source = Field::from_fn(nx, ny, |i, j| {
            self.laplacian(grid.domain.x1(i), grid.x2(i, j))
        });
        let conormal: Vec<f64> = (0..=nx)
            .map(|i| self.conormal(&grid.boundary, i, grid.domain.x1(i)))
            .collect();
        let sol = elliptic::solve_psi(grid, &source, &conormal, None, opts).unwrap();
        let mut err: f64 = 0.0;
        for i in 0..=nx {
            for j in 0..=ny {
                let exact = self.value(grid.domain.x1(i), grid.x2(i, j));
                err = err.max((sol.field[(i, j)] - exact).abs());
            }
        }
        err
    }
}

/// Manufactured potential solution phi* = sin(pi x1 / L) sin(pi w / 2) with
/// w = (x2 - f)/(1 - f): zero on inlet, exit and contact, zero normal
/// derivative on the top wall. The chain rule below is written out
/// independently of the library's metric code.
pub struct PhiManufactured<'a> {
    pub l: f64,
    pub f: &'a FreeBoundary,
}

impl PhiManufactured<'_> {
    fn w(&self, x1: f64, x2: f64) -> (f64, f64, f64, f64, f64) {
        let f = self.f.at(x1);
        let fp = self.f.slope_at(x1);
        let fpp = nozzle_core::interp::cubic_uniform(
            &(0..=self.f.nx()).map(|i| self.f.curvature(i)).collect::<Vec<_>>(),
            self.f.hx(),
            x1,
        );
        let om = 1.0 - f;
        let w = (x2 - f) / om;
        let w_x1 = -fp * (1.0 - x2) / (om * om);
        let w_x2 = 1.0 / om;
        let w_x1x1 = -fpp * (1.0 - x2) / (om * om) - 2.0 * fp * fp * (1.0 - x2) / (om * om * om);
        let w_x1x2 = fp / (om * om);
        (w, w_x1, w_x2, w_x1x1, w_x1x2)
    }

    pub fn value(&self, x1: f64, x2: f64) -> f64 {
        let (w, ..) = self.w(x1, x2);
        let k = std::f64::consts::PI / self.l;
        (k * x1).sin() * (std::f64::consts::FRAC_PI_2 * w).sin()
    }

    /// a11 phi_x1x1 + a22 phi_x2x2, fully analytic.
    pub fn source(&self, x1: f64, x2: f64, a11: f64, a22: f64) -> f64 {
        let (w, w_x1, w_x2, w_x1x1, _w_x1x2) = self.w(x1, x2);
        let k = std::f64::consts::PI / self.l;
        let hp = std::f64::consts::FRAC_PI_2;
        let xv = (k * x1).sin();
        let xd = k * (k * x1).cos();
        let xdd = -k * k * (k * x1).sin();
        let yv = (hp * w).sin();
        let yd = hp * (hp * w).cos();
        let ydd = -hp * hp * (hp * w).sin();
        let phi_x1x1 =
            xdd * yv + 2.0 * xd * yd * w_x1 + xv * (ydd * w_x1 * w_x1 + yd * w_x1x1);
        let phi_x2x2 = xv * ydd * w_x2 * w_x2;
        a11 * phi_x1x1 + a22 * phi_x2x2
    }

    pub fn solve_error(&self, gas: &Gas, grid: &MappedGrid, opts: &SolverOptions) -> f64 {
        let (a11, a22) = elliptic::background_coefficients(gas);
        let (nx, ny) = (grid.domain.nx, grid.domain.ny);
        let source = Field::from_fn(nx, ny, |i, j| {
            self.source(grid.domain.x1(i), grid.x2(i, j), a11, a22)
        });
        let lift = LiftFunction::zero(grid);
        let sol = elliptic::solve_phi(grid, &source, &lift, a11, a22, None, opts).unwrap();
        let mut err: f64 = 0.0;
        for i in 0..=nx {
            for j in 0..=ny {
                let exact = self.value(grid.domain.x1(i), grid.x2(i, j));
                err = err.max((sol.field[(i, j)] - exact).abs());
            }
        }
        err
    }
}

/// Runs both manufactured suites over a grid ladder, printing a convergence
/// table, and returns the two observed orders (psi, phi).
pub fn mms_orders(curved: bool, quiet: bool) -> (f64, f64) {
    let gas = nozzle_core::gas::example_gas();
    let l = 5.0;
    let ladder = [(40usize, 8usize), (80, 16), (160, 32), (320, 64)];
    let opts = SolverOptions::default();
    let mut hs = Vec::new();
    let mut errs_psi = Vec::new();
    let mut errs_phi = Vec::new();
    for (nx, ny) in ladder {
        let domain = CutDomain::new(l, nx, ny).unwrap();
        let boundary = if curved {
            quartic_boundary(nx, l, 0.05)
        } else {
            FreeBoundary::flat(nx, domain.hx)
        };
        let grid = MappedGrid::new(domain, boundary).unwrap();
        let psi = PsiManufactured { l };
        let e_psi = psi.solve_error(&grid, &opts);
        let phi = PhiManufactured {
            l,
            f: &grid.boundary,
        };
        let e_phi = phi.solve_error(&gas, &grid, &opts);
        hs.push(domain.hy);
        errs_psi.push(e_psi);
        errs_phi.push(e_phi);
        if !quiet {
            println!("  {nx:4}x{ny:<3} h={:.4}  err_psi={e_psi:.4e}  err_phi={e_phi:.4e}", domain.hy);
        }
    }
    (
        observed_order(&hs, &errs_psi),
        observed_order(&hs, &errs_phi),
    )
}
