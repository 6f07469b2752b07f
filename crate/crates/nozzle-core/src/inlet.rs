//! Inlet data: the entropy and transverse-velocity traces (S_en, v_en), the
//! potential trace phi_en built from v_en, and the discrete perturbation
//! size sigma used by scaling tests and reporting.

use crate::error::{Result, SolverError};
use crate::gas::Gas;
use crate::interp::MonotoneCubic;
use std::path::Path;

/// The standard C-infinity bump: exp(1 - 1/(1-(2t-1)^2)) on (0,1), 0 outside.
pub fn bump(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    let s = 2.0 * t - 1.0;
    let w = 1.0 - s * s;
    (1.0 - 1.0 / w).exp()
}

pub fn bump_deriv(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    let s = 2.0 * t - 1.0;
    let w = 1.0 - s * s;
    -4.0 * s / (w * w) * bump(t)
}

/// One inlet trace: either the built-in bump family or tabulated samples.
#[derive(Debug, Clone)]
enum Trace {
    Bump {
        base: f64,
        amplitude: f64,
        epsilon: f64,
    },
    Tabulated(MonotoneCubic),
}

impl Trace {
    fn eval(&self, x2: f64) -> f64 {
        match self {
            Trace::Bump {
                base,
                amplitude,
                epsilon,
            } => base + amplitude * bump((x2 - epsilon) / (1.0 - 2.0 * epsilon)),
            Trace::Tabulated(m) => m.eval(x2),
        }
    }

    fn deriv(&self, x2: f64) -> f64 {
        match self {
            Trace::Bump {
                amplitude, epsilon, ..
            } => {
                let span = 1.0 - 2.0 * epsilon;
                amplitude * bump_deriv((x2 - epsilon) / span) / span
            }
            Trace::Tabulated(m) => {
                let h = 1e-6;
                let lo = (x2 - h).max(0.0);
                let hi = (x2 + h).min(1.0);
                (m.eval(hi) - m.eval(lo)) / (hi - lo)
            }
        }
    }

    /// Deviation from the base level, without the cancellation noise of
    /// evaluating base + amplitude * bump and subtracting the base again.
    fn deviation(&self, x2: f64, base: f64) -> f64 {
        match self {
            Trace::Bump {
                amplitude, epsilon, ..
            } => amplitude * bump((x2 - epsilon) / (1.0 - 2.0 * epsilon)),
            Trace::Tabulated(m) => m.eval(x2) - base,
        }
    }
}

/// Inlet data for the upper layer on x2 in [0,1].
#[derive(Debug, Clone)]
pub struct InletProfile {
    s_en: Trace,
    v_en: Trace,
    /// Support margin: v_en vanishes on [0,eps] and [1-eps,1].
    pub epsilon: f64,
    /// Hoelder exponent used by the sigma proxy.
    pub alpha: f64,
    /// Discrete perturbation size (sup-norms of the traces and their first
    /// two derivatives plus sampled Hoelder quotients).
    pub sigma: f64,
}

pub const SIGMA_SAMPLES: usize = 257;

impl InletProfile {
    /// Built-in family: s_en = S0+ + a_s * bump, v_en = a_v * bump, with the
    /// bump squeezed into (epsilon, 1-epsilon).
    pub fn build(gas: &Gas, a_s: f64, a_v: f64, epsilon: f64, alpha: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 0.1) {
            return Err(SolverError::InvalidProfile(format!(
                "epsilon must lie in (0, 1/10), got {epsilon}"
            )));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(SolverError::InvalidProfile(format!(
                "alpha must lie in (0, 1), got {alpha}"
            )));
        }
        if !a_s.is_finite() || !a_v.is_finite() {
            return Err(SolverError::InvalidProfile(
                "profile amplitudes must be finite".into(),
            ));
        }
        let s0 = gas.background.s0_plus;
        if s0 + a_s.min(0.0) <= 0.0 {
            return Err(SolverError::InvalidProfile(format!(
                "entropy trace not positive: S0+ + a_s = {}",
                s0 + a_s
            )));
        }
        let mut profile = InletProfile {
            s_en: Trace::Bump {
                base: s0,
                amplitude: a_s,
                epsilon,
            },
            v_en: Trace::Bump {
                base: 0.0,
                amplitude: a_v,
                epsilon,
            },
            epsilon,
            alpha,
            sigma: 0.0,
        };
        profile.sigma = profile.perturbation_size(SIGMA_SAMPLES, s0);
        Ok(profile)
    }

    /// Tabulated traces from two-column files (x2, value), validated against
    /// the support and endpoint-flatness conditions.
    pub fn from_tables(
        gas: &Gas,
        s_file: &Path,
        v_file: &Path,
        epsilon: f64,
        alpha: f64,
    ) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 0.1) {
            return Err(SolverError::InvalidProfile(format!(
                "epsilon must lie in (0, 1/10), got {epsilon}"
            )));
        }
        let s_en = Trace::Tabulated(load_table(s_file)?);
        let v_en = Trace::Tabulated(load_table(v_file)?);
        // validate (en-epsilon) and positivity on a fine sample
        let n = 1024;
        let mut s_scale: f64 = 0.0;
        for k in 0..=n {
            let x2 = k as f64 / n as f64;
            s_scale = s_scale.max(s_en.eval(x2).abs());
        }
        for k in 0..=n {
            let x2 = k as f64 / n as f64;
            let s = s_en.eval(x2);
            if s <= 0.0 {
                return Err(SolverError::InvalidProfile(format!(
                    "tabulated entropy trace not positive at x2 = {x2}: {s}"
                )));
            }
            let in_margin = x2 <= epsilon || x2 >= 1.0 - epsilon;
            if in_margin {
                let v = v_en.eval(x2);
                if v.abs() > 1e-12 {
                    return Err(SolverError::InvalidProfile(format!(
                        "v_en must vanish on the margins: v({x2}) = {v}"
                    )));
                }
                let ds = s_en.deriv(x2);
                if ds.abs() > 1e-6 * s_scale.max(1.0) {
                    return Err(SolverError::InvalidProfile(format!(
                        "entropy trace must be flat on the margins: s'({x2}) = {ds}"
                    )));
                }
            }
        }
        let s0 = gas.background.s0_plus;
        let mut profile = InletProfile {
            s_en,
            v_en,
            epsilon,
            alpha,
            sigma: 0.0,
        };
        profile.sigma = profile.perturbation_size(SIGMA_SAMPLES, s0);
        Ok(profile)
    }

    pub fn s_en(&self, x2: f64) -> f64 {
        self.s_en.eval(x2)
    }

    pub fn v_en(&self, x2: f64) -> f64 {
        self.v_en.eval(x2)
    }

    pub fn v_en_deriv(&self, x2: f64) -> f64 {
        self.v_en.deriv(x2)
    }

    /// phi_en(x2) = integral of v_en from 0 to x2, by composite trapezoid at
    /// the requested resolution.
    pub fn potential_trace(&self, x2: f64, n: usize) -> f64 {
        let n = n.max(2);
        let h = x2 / n as f64;
        let mut acc = 0.0;
        for k in 0..n {
            let a = k as f64 * h;
            acc += 0.5 * h * (self.v_en.eval(a) + self.v_en.eval(a + h));
        }
        acc
    }

    /// phi_en sampled at the ny+1 grid nodes of the inlet, by cumulative
    /// trapezoid (the quadrature the solver itself uses).
    pub fn potential_trace_nodes(&self, ny: usize) -> Vec<f64> {
        let hy = 1.0 / ny as f64;
        let mut out = vec![0.0; ny + 1];
        for j in 1..=ny {
            let a = (j - 1) as f64 * hy;
            out[j] = out[j - 1] + 0.5 * hy * (self.v_en.eval(a) + self.v_en.eval(a + hy));
        }
        out
    }

    /// Discrete proxy for a C^{2,alpha} x C^{1,alpha} trace norm:
    /// sup|s-S0| + sup|s'| + sup|s''| + Hoelder(s'') + sup|v| + sup|v'| + Hoelder(v').
    /// Derivatives are centered differences on the sample grid.
    fn perturbation_size(&self, n: usize, s0: f64) -> f64 {
        let n = n.max(64);
        let h = 1.0 / (n - 1) as f64;
        let xs: Vec<f64> = (0..n).map(|k| k as f64 * h).collect();
        let s: Vec<f64> = xs.iter().map(|&x| self.s_en.deviation(x, s0)).collect();
        let v: Vec<f64> = xs.iter().map(|&x| self.v_en.eval(x)).collect();
        let d = |g: &[f64]| -> Vec<f64> {
            (0..n)
                .map(|k| {
                    if k == 0 {
                        (g[1] - g[0]) / h
                    } else if k == n - 1 {
                        (g[n - 1] - g[n - 2]) / h
                    } else {
                        (g[k + 1] - g[k - 1]) / (2.0 * h)
                    }
                })
                .collect()
        };
        let sup = |g: &[f64]| g.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let s1 = d(&s);
        let s2 = d(&s1);
        let v1 = d(&v);
        sup(&s) + sup(&s1) + sup(&s2) + holder_quotient(&xs, &s2, self.alpha)
            + sup(&v) + sup(&v1) + holder_quotient(&xs, &v1, self.alpha)
    }
}

fn holder_quotient(xs: &[f64], g: &[f64], alpha: f64) -> f64 {
    let mut q: f64 = 0.0;
    // every 2nd point keeps the pair loop cheap without losing the scale
    let step = 2;
    let idx: Vec<usize> = (0..xs.len()).step_by(step).collect();
    for (a, &i) in idx.iter().enumerate() {
        for &j in idx.iter().skip(a + 1) {
            q = q.max((g[i] - g[j]).abs() / (xs[j] - xs[i]).powf(alpha));
        }
    }
    q
}

fn load_table(path: &Path) -> Result<MonotoneCubic> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SolverError::InvalidProfile(format!("{}: {e}", path.display())))?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let parse = |tok: Option<&str>| -> Result<f64> {
            tok.and_then(|t| t.parse::<f64>().ok()).ok_or_else(|| {
                SolverError::InvalidProfile(format!(
                    "{}:{}: expected two numeric columns",
                    path.display(),
                    lineno + 1
                ))
            })
        };
        let x = parse(parts.next())?;
        let y = parse(parts.next())?;
        if let Some(prev) = xs.last() {
            if x <= *prev {
                return Err(SolverError::InvalidProfile(format!(
                    "{}:{}: x2 samples must be strictly increasing",
                    path.display(),
                    lineno + 1
                )));
            }
        }
        xs.push(x);
        ys.push(y);
    }
    if xs.len() < 4 {
        return Err(SolverError::InvalidProfile(format!(
            "{}: need at least 4 samples",
            path.display()
        )));
    }
    if xs[0] > 0.0 || *xs.last().unwrap() < 1.0 {
        return Err(SolverError::InvalidProfile(format!(
            "{}: samples must cover [0, 1]",
            path.display()
        )));
    }
    Ok(MonotoneCubic::new(xs, ys))
}
