//! The cut-off nozzle domain, the free-boundary curve, the rectangle map and
//! its metric data, reflection extensions, and the C2-matched entropy
//! extension below the contact curve.

use crate::error::{Result, SolverError};
use crate::field::Field;
use crate::interp::{bicubic, cubic_uniform};

/// Hard bound on the contact curve from the iteration set: sup|f| < 1/4.
pub const BOUNDARY_BOUND: f64 = 0.25;

/// Coefficients of the three-point reflection extension; they solve
/// sum c_i (-1/i)^m = 1 for m = 0, 1, 2.
pub const EXTENSION_COEFFS: [f64; 3] = [6.0, -32.0, 27.0];

/// The cut-off nozzle of length L with its uniform mapped-rectangle grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutDomain {
    pub l: f64,
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
}

impl CutDomain {
    pub fn new(l: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(l > 0.0) || !l.is_finite() {
            return Err(SolverError::InvalidDomain(format!("L must be positive, got {l}")));
        }
        if nx < 8 || ny < 8 {
            return Err(SolverError::InvalidDomain(format!(
                "grid counts must be at least 8, got nx = {nx}, ny = {ny}"
            )));
        }
        Ok(CutDomain {
            l,
            nx,
            ny,
            hx: l / nx as f64,
            hy: 1.0 / ny as f64,
        })
    }

    #[inline]
    pub fn x1(&self, i: usize) -> f64 {
        i as f64 * self.hx
    }

    #[inline]
    pub fn y2(&self, j: usize) -> f64 {
        j as f64 * self.hy
    }
}

/// The sampled contact curve f with its derivative samples.
///
/// Derivatives are always rebuilt by the same scheme (fourth-order central
/// differences inside, one-sided at the ends), so compatibility checks see
/// the same numbers everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeBoundary {
    values: Vec<f64>,
    slope: Vec<f64>,
    curvature: Vec<f64>,
    hx: f64,
}

impl FreeBoundary {
    pub fn flat(nx: usize, hx: f64) -> Self {
        FreeBoundary {
            values: vec![0.0; nx + 1],
            slope: vec![0.0; nx + 1],
            curvature: vec![0.0; nx + 1],
            hx,
        }
    }

    /// Builds the curve from node samples; rejects sup|f| >= 1/4.
    pub fn from_values(values: Vec<f64>, hx: f64) -> Result<Self> {
        assert!(values.len() >= 5, "need at least 5 curve samples");
        let sup = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if sup >= BOUNDARY_BOUND {
            return Err(SolverError::BoundaryEscaped { sup });
        }
        let slope = first_derivative_samples(&values, hx);
        let curvature = second_derivative_samples(&values, hx);
        Ok(FreeBoundary {
            values,
            slope,
            curvature,
            hx,
        })
    }

    #[inline]
    pub fn nx(&self) -> usize {
        self.values.len() - 1
    }

    #[inline]
    pub fn hx(&self) -> f64 {
        self.hx
    }

    #[inline]
    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    #[inline]
    pub fn slope(&self, i: usize) -> f64 {
        self.slope[i]
    }

    #[inline]
    pub fn curvature(&self, i: usize) -> f64 {
        self.curvature[i]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sup_slope(&self) -> f64 {
        self.slope.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Curve height at an arbitrary station, cubic through the samples.
    pub fn at(&self, x1: f64) -> f64 {
        cubic_uniform(&self.values, self.hx, x1)
    }

    pub fn slope_at(&self, x1: f64) -> f64 {
        cubic_uniform(&self.slope, self.hx, x1)
    }

    /// max(|f(0)|, |f'(0)|, |f'(L)|), measured from the raw values by
    /// one-sided differences: the defect against the compatibility
    /// conditions of the iteration set. Reported, never hidden by
    /// [`FreeBoundary::enforce_endpoint_compatibility`].
    pub fn compat_defect(&self) -> f64 {
        let n = self.nx();
        let left = stencil_d1(|k| self.values[k], 0, n, self.hx);
        let right = stencil_d1(|k| self.values[k], n, n, self.hx);
        self.values[0].abs().max(left.abs()).max(right.abs())
    }

    /// Projects the stored derivative samples onto the iteration-set
    /// constraint f'(0) = f'(L) = 0. The curve values are untouched.
    pub fn enforce_endpoint_compatibility(&mut self) {
        let n = self.nx();
        self.slope[0] = 0.0;
        self.slope[n] = 0.0;
    }

    pub fn sup_diff(&self, other: &FreeBoundary) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// One fourth-order first-derivative sample at index `i` of `n+1` uniform
/// values accessed through `v`; biased stencils at the ends.
#[inline]
pub fn stencil_d1(v: impl Fn(usize) -> f64, i: usize, n: usize, h: f64) -> f64 {
    if i >= 2 && i + 2 <= n {
        (v(i - 2) - 8.0 * v(i - 1) + 8.0 * v(i + 1) - v(i + 2)) / (12.0 * h)
    } else if i == 0 {
        (-25.0 * v(0) + 48.0 * v(1) - 36.0 * v(2) + 16.0 * v(3) - 3.0 * v(4)) / (12.0 * h)
    } else if i == 1 {
        (-3.0 * v(0) - 10.0 * v(1) + 18.0 * v(2) - 6.0 * v(3) + v(4)) / (12.0 * h)
    } else if i == n - 1 {
        (3.0 * v(n) + 10.0 * v(n - 1) - 18.0 * v(n - 2) + 6.0 * v(n - 3) - v(n - 4)) / (12.0 * h)
    } else {
        (25.0 * v(n) - 48.0 * v(n - 1) + 36.0 * v(n - 2) - 16.0 * v(n - 3) + 3.0 * v(n - 4))
            / (12.0 * h)
    }
}

/// Fourth-order first derivative of uniform samples, one-sided at the ends.
pub fn first_derivative_samples(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len() - 1;
    (0..=n).map(|i| stencil_d1(|k| v[k], i, n, h)).collect()
}

/// Fourth-order central second derivative, lower-order one-sided at the ends.
pub fn second_derivative_samples(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    let h2 = h * h;
    let mut d = vec![0.0; n];
    for i in 0..n {
        d[i] = if i >= 2 && i + 2 < n {
            (-v[i - 2] + 16.0 * v[i - 1] - 30.0 * v[i] + 16.0 * v[i + 1] - v[i + 2]) / (12.0 * h2)
        } else if i == 0 {
            (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h2
        } else if i == 1 {
            (v[0] - 2.0 * v[1] + v[2]) / h2
        } else if i == n - 2 {
            (v[n - 3] - 2.0 * v[n - 2] + v[n - 1]) / h2
        } else {
            (2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]) / h2
        };
    }
    d
}

/// The rectangle map P_f(x1, x2) = (x1, (x2 - f)/(1 - f)) together with the
/// metric factors needed to push derivatives through it.
#[derive(Debug, Clone)]
pub struct MappedGrid {
    pub domain: CutDomain,
    pub boundary: FreeBoundary,
}

impl MappedGrid {
    pub fn new(domain: CutDomain, boundary: FreeBoundary) -> Result<Self> {
        assert_eq!(boundary.nx(), domain.nx, "curve samples must match the grid");
        for i in 0..=domain.nx {
            let margin = 1.0 - boundary.value(i);
            if margin <= 0.0 {
                return Err(SolverError::DegenerateBoundary {
                    margin,
                    x1: domain.x1(i),
                });
            }
        }
        Ok(MappedGrid { domain, boundary })
    }

    pub fn flat(domain: CutDomain) -> Self {
        MappedGrid {
            boundary: FreeBoundary::flat(domain.nx, domain.hx),
            domain,
        }
    }

    /// Physical height of node (i, j): x2 = f + y2 (1 - f).
    #[inline]
    pub fn x2(&self, i: usize, j: usize) -> f64 {
        let f = self.boundary.value(i);
        f + self.domain.y2(j) * (1.0 - f)
    }

    /// dy2/dx2 = 1/(1 - f), constant along a column.
    #[inline]
    pub fn k_factor(&self, i: usize) -> f64 {
        1.0 / (1.0 - self.boundary.value(i))
    }

    /// dy2/dx1 = f' (y2 - 1) / (1 - f).
    #[inline]
    pub fn j_factor(&self, i: usize, j: usize) -> f64 {
        self.boundary.slope(i) * (self.domain.y2(j) - 1.0) / (1.0 - self.boundary.value(i))
    }

    /// d2y2/dx1^2 = (y2 - 1) (f'' (1 - f) + 2 f'^2) / (1 - f)^2.
    #[inline]
    pub fn dj_factor(&self, i: usize, j: usize) -> f64 {
        let f = self.boundary.value(i);
        let fp = self.boundary.slope(i);
        let fpp = self.boundary.curvature(i);
        (self.domain.y2(j) - 1.0) * (fpp * (1.0 - f) + 2.0 * fp * fp) / ((1.0 - f) * (1.0 - f))
    }

    pub fn to_rectangle(&self, x: [f64; 2]) -> Result<[f64; 2]> {
        let f = self.boundary.at(x[0]);
        let margin = 1.0 - f;
        if margin <= 0.0 {
            return Err(SolverError::DegenerateBoundary {
                margin,
                x1: x[0],
            });
        }
        Ok([x[0], (x[1] - f) / margin])
    }

    pub fn from_rectangle(&self, y: [f64; 2]) -> [f64; 2] {
        let f = self.boundary.at(y[0]);
        [y[0], f + y[1] * (1.0 - f)]
    }

    /// Mapped-coordinate first derivatives of a grid function. Fourth-order
    /// stencils everywhere: the uniform truncation order keeps column-wise
    /// integrals free of stencil-transition layers near the inlet and exit.
    pub fn d_y1(&self, u: &Field) -> Field {
        let (nx, hx) = (self.domain.nx, self.domain.hx);
        Field::from_fn(nx, self.domain.ny, |i, j| {
            let v = |k: usize| u[(k, j)];
            stencil_d1(v, i, nx, hx)
        })
    }

    pub fn d_y2(&self, u: &Field) -> Field {
        let (ny, hy) = (self.domain.ny, self.domain.hy);
        Field::from_fn(self.domain.nx, ny, |i, j| {
            let v = |k: usize| u[(i, k)];
            stencil_d1(v, j, ny, hy)
        })
    }

    /// Physical gradient (d/dx1, d/dx2) of a grid function through the map.
    pub fn grad_physical(&self, u: &Field) -> (Field, Field) {
        let uy1 = self.d_y1(u);
        let uy2 = self.d_y2(u);
        let dx1 = Field::from_fn(self.domain.nx, self.domain.ny, |i, j| {
            uy1[(i, j)] + self.j_factor(i, j) * uy2[(i, j)]
        });
        let dx2 = Field::from_fn(self.domain.nx, self.domain.ny, |i, j| {
            self.k_factor(i) * uy2[(i, j)]
        });
        (dx1, dx2)
    }
}

/// Even reflection of the curve into [-1, L+1]; C^{2,alpha} provided
/// f'(0) = f'(L) = 0.
#[derive(Debug, Clone)]
pub struct ExtendedCurve {
    /// Node samples; index 0 sits at x1 = -pad * hx.
    pub values: Vec<f64>,
    pub hx: f64,
    pub pad: usize,
}

impl ExtendedCurve {
    pub fn value_at_index(&self, k: isize) -> f64 {
        self.values[(k + self.pad as isize) as usize]
    }

    pub fn at(&self, x1: f64) -> f64 {
        cubic_uniform(&self.values, self.hx, x1 + self.pad as f64 * self.hx)
    }
}

pub fn reflect_even_extension(f: &FreeBoundary, tol: f64) -> Result<ExtendedCurve> {
    let defect = f.slope(0).abs().max(f.slope(f.nx()).abs());
    if defect > tol {
        return Err(SolverError::CompatibilityViolated {
            context: "endpoint slope for even reflection",
            value: defect,
            tol,
        });
    }
    let nx = f.nx();
    let hx = f.hx();
    let pad = (1.0 / hx).ceil() as usize;
    let mut values = Vec::with_capacity(nx + 1 + 2 * pad);
    for k in 0..pad {
        values.push(f.value(pad - k)); // f(-x1) = f(x1)
    }
    values.extend_from_slice(f.values());
    for k in 1..=pad {
        values.push(f.value(nx - k)); // f(2L - x1)
    }
    Ok(ExtendedCurve { values, hx, pad })
}

/// Entropy extended below the contact curve into the strip y2 in [-1, 1] of
/// the mapped coordinates of `boundary`. The lower half is the three-point
/// reflection sum c_i S(y1, -y2/i), which matches the value and the first
/// two normal derivatives at the interface.
#[derive(Debug, Clone)]
pub struct ExtendedEntropy {
    boundary: FreeBoundary,
    hx: f64,
    hy: f64,
    /// (nx+1) columns of 2 ny + 1 samples; jj = 0 corresponds to y2 = -1.
    columns: Vec<Vec<f64>>,
}

impl ExtendedEntropy {
    /// The constant background entropy, valid for any curve.
    pub fn constant(domain: &CutDomain, value: f64) -> Self {
        ExtendedEntropy {
            boundary: FreeBoundary::flat(domain.nx, domain.hx),
            hx: domain.hx,
            hy: domain.hy,
            columns: vec![vec![value; 2 * domain.ny + 1]; domain.nx + 1],
        }
    }

    pub fn boundary(&self) -> &FreeBoundary {
        &self.boundary
    }
}

/// Extends S (given on the mapped grid of `grid`) below the curve, staying in
/// mapped coordinates exactly as in the defining formula.
pub fn extend_entropy_below(grid: &MappedGrid, s: &Field) -> ExtendedEntropy {
    let (nx, ny, hy) = (grid.domain.nx, grid.domain.ny, grid.domain.hy);
    let _ = ny;
    let mut columns = Vec::with_capacity(nx + 1);
    for i in 0..=nx {
        let upper = s.column(i);
        let mut col = vec![0.0; 2 * ny + 1];
        col[ny..].copy_from_slice(upper);
        for k in 1..=ny {
            // y2 = -k hy; sample the upper trace at -y2/i = k hy / m
            let y2 = k as f64 * hy;
            let mut v = 0.0;
            for (m, c) in EXTENSION_COEFFS.iter().enumerate() {
                v += c * cubic_uniform(upper, hy, y2 / (m + 1) as f64);
            }
            col[ny - k] = v;
        }
        columns.push(col);
    }
    ExtendedEntropy {
        boundary: grid.boundary.clone(),
        hx: grid.domain.hx,
        hy,
        columns,
    }
}

impl ExtendedEntropy {
    /// Value at mapped coordinates of the OWN curve (y2 in [-1, 1]).
    fn eval_own(&self, x1: f64, y2: f64) -> f64 {
        let y2 = y2.clamp(-1.0, 1.0);
        let t = x1 / self.hx;
        let n = self.columns.len();
        let k = ((t.floor() as isize) - 1).clamp(0, (n - 4) as isize) as usize;
        let pos = (y2 + 1.0) / self.hy * self.hy; // offset into the column
        let vals = [
            cubic_uniform(&self.columns[k], self.hy, pos + 0.0),
            cubic_uniform(&self.columns[k + 1], self.hy, pos),
            cubic_uniform(&self.columns[k + 2], self.hy, pos),
            cubic_uniform(&self.columns[k + 3], self.hy, pos),
        ];
        cubic_uniform(&vals, self.hx, x1 - k as f64 * self.hx)
    }

    /// Value at a physical point; x2 may dip below the curve down to -1/2.
    pub fn eval_physical(&self, x1: f64, x2: f64) -> f64 {
        let f = self.boundary.at(x1);
        let y2 = (x2 - f) / (1.0 - f);
        self.eval_own(x1, y2)
    }

    /// Samples the entropy on the (possibly different) mapped grid of a new
    /// curve. Columns share x1 stations, so this is one cubic pass per column.
    pub fn sample_on_grid(&self, grid: &MappedGrid) -> Field {
        let (nx, ny) = (grid.domain.nx, grid.domain.ny);
        assert_eq!(self.columns.len(), nx + 1, "grids must share x1 stations");
        Field::from_fn(nx, ny, |i, j| {
            let x2 = grid.x2(i, j);
            let f_old = self.boundary.value(i);
            let y2_old = (x2 - f_old) / (1.0 - f_old);
            cubic_uniform(&self.columns[i], self.hy, y2_old + 1.0)
        })
    }
}

/// Re-interpolates a grid function from one curve's mapped grid to
/// another's (same x1 stations), cubic per column. Points of the new grid
/// that dip slightly outside the old one use the clamped end stencil.
pub fn reinterpolate_columns(old: &MappedGrid, new: &MappedGrid, field: &Field) -> Field {
    assert_eq!(old.domain.nx, new.domain.nx);
    assert_eq!(old.domain.ny, new.domain.ny);
    let hy = old.domain.hy;
    Field::from_fn(new.domain.nx, new.domain.ny, |i, j| {
        let x2 = new.x2(i, j);
        let f_old = old.boundary.value(i);
        let y2_old = (x2 - f_old) / (1.0 - f_old);
        cubic_uniform(field.column(i), hy, y2_old)
    })
}

/// Sup and L2 differences of (phi, psi, S, f) between two solutions composed
/// through the domain-matching transform, restricted to x1 <= x1_max.
#[derive(Debug, Clone, Copy, Default)]
pub struct DiffNorms {
    pub sup_phi: f64,
    pub l2_phi: f64,
    pub sup_psi: f64,
    pub l2_psi: f64,
    pub sup_s: f64,
    pub l2_s: f64,
    pub sup_f: f64,
    pub l2_f: f64,
}

pub struct FieldBundle<'a> {
    pub grid: &'a MappedGrid,
    pub phi_hat: &'a Field,
    pub psi: &'a Field,
    pub s: &'a Field,
}

/// Compares two solutions on the common initial segment. The transform
/// between the two curved domains maps level sets of the rectangle map onto
/// each other, so fields are compared at equal mapped coordinates.
pub fn compare_on_common_domain(a: &FieldBundle, b: &FieldBundle, x1_max: f64) -> DiffNorms {
    let ga = a.grid;
    let gb = b.grid;
    let (hx_b, hy_b) = (gb.domain.hx, gb.domain.hy);
    let mut norms = DiffNorms::default();
    let mut count = 0usize;
    let cell = ga.domain.hx * ga.domain.hy;
    for i in 0..=ga.domain.nx {
        let x1 = ga.domain.x1(i);
        if x1 > x1_max + 1e-12 {
            break;
        }
        let df = ga.boundary.value(i) - gb.boundary.at(x1);
        norms.sup_f = norms.sup_f.max(df.abs());
        norms.l2_f += df * df * ga.domain.hx;
        for j in 0..=ga.domain.ny {
            let y2 = ga.domain.y2(j);
            let dphi = a.phi_hat[(i, j)] - bicubic(b.phi_hat, hx_b, hy_b, x1, y2);
            let dpsi = a.psi[(i, j)] - bicubic(b.psi, hx_b, hy_b, x1, y2);
            let ds = a.s[(i, j)] - bicubic(b.s, hx_b, hy_b, x1, y2);
            norms.sup_phi = norms.sup_phi.max(dphi.abs());
            norms.sup_psi = norms.sup_psi.max(dpsi.abs());
            norms.sup_s = norms.sup_s.max(ds.abs());
            norms.l2_phi += dphi * dphi * cell;
            norms.l2_psi += dpsi * dpsi * cell;
            norms.l2_s += ds * ds * cell;
            count += 1;
        }
    }
    let _ = count;
    norms.l2_phi = norms.l2_phi.sqrt();
    norms.l2_psi = norms.l2_psi.sqrt();
    norms.l2_s = norms.l2_s.sqrt();
    norms.l2_f = norms.l2_f.sqrt();
    norms
}
