//! Maximizer search for the ratio functionals over radial profiles with `∥∇u∥_N = 1`.
//!
//! Profiles live on a fixed geometric grid `r_0 = 10⁻⁴ < … < r_M = 1` with `u(r_M) = 0`;
//! dilation invariance makes the support radius irrelevant. The unknowns are the
//! increments `d_i = v_i − v_{i+1}`, in which the gradient energy is the separable sum
//! `Σ C_i |d_i|^N`. Integrals use a fixed Gauss rule on every cell so the objective
//! and its gradient are exact derivatives of the same finite sum. Each step moves along
//! the tangential gradient of `log R`, then rescales to the constraint surface.

use rand::{RngExt, SeedableRng};
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponents::{alpha_n, conjugate, sphere_area, ExponentConfig};
use crate::functionals::{at_ratio, f_ratio, g_ratio, q_ratio, FunctionalKind};
use crate::profiles::RadialProfile;
use crate::quadrature::{grad_norm, phi_tail, weighted_norm, GaussRule};

/// Innermost grid radius; the grid is geometric over `[INNER_RADIUS, 1]`.
pub const INNER_RADIUS: f64 = 1e-8;
const CELL_GAUSS_ORDER: usize = 20;
const ARMIJO: f64 = 1e-4;

/// Optimizer keys `opt.node_count`, `opt.max_iterations`, `opt.step_init`, `opt.rel_tol`,
/// `opt.restarts`, `opt.seed`. `node_count` counts grid cells, so grids with node counts
/// `m` and `4m` are nested.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimizerParams {
    pub node_count: usize,
    pub max_iterations: usize,
    pub step_init: f64,
    pub rel_tol: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for OptimizerParams {
    fn default() -> Self {
        Self { node_count: 64, max_iterations: 3000, step_init: 1.0, rel_tol: 1e-10, restarts: 5, seed: 0 }
    }
}

impl OptimizerParams {
    pub fn validate(&self) -> Result<()> {
        if self.node_count < 2 {
            return Err(Error::InvalidParameter(format!("node_count = {} must be >= 2", self.node_count)));
        }
        if self.max_iterations == 0 || self.restarts == 0 {
            return Err(Error::InvalidParameter("max_iterations and restarts must be positive".into()));
        }
        if !(self.step_init > 0.0) || !self.step_init.is_finite() {
            return Err(Error::InvalidParameter(format!("step_init = {} must be positive", self.step_init)));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::InvalidParameter(format!("rel_tol = {} must lie in (0, 1)", self.rel_tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaximizerResult {
    pub best_profile: RadialProfile<f64>,
    /// The functional re-evaluated on `best_profile` by adaptive quadrature.
    pub value: f64,
    /// The same functional in the optimizer's fixed Gauss discretization.
    pub discrete_value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<(usize, f64)>,
    pub constraint_residual: f64,
    /// Final value of every restart, in seed order.
    pub restart_values: Vec<f64>,
}

impl MaximizerResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("maximizer result serializes")
    }

    /// CSV with columns `iteration,value`.
    pub fn history_csv(&self) -> String {
        let mut out = String::from("iteration,value\n");
        for (i, v) in &self.history {
            out.push_str(&format!("{i},{v:e}\n"));
        }
        out
    }

    pub fn history_is_monotone(&self) -> bool {
        self.history.windows(2).all(|w| w[1].1 >= w[0].1)
    }
}

/// `f(u)` in `∫ f(u) |x|^{-w} dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Integrand {
    /// `|u|^p`
    Power(f64),
    /// `Φ_N(c|u|^{N'})`
    Phi(f64),
    /// `e^{c|u|^{N'}} |u|^p`
    ExpPower(f64, f64),
}

impl Integrand {
    /// `(f(u), f'(u))`.
    fn eval(&self, n: usize, np: f64, u: f64) -> (f64, f64) {
        let a = u.abs();
        let sg = u.signum();
        if a == 0.0 {
            return (0.0, 0.0);
        }
        match *self {
            Integrand::Power(p) => (a.powf(p), p * a.powf(p - 1.0) * sg),
            Integrand::Phi(c) => {
                let x = c * a.powf(np);
                (phi_tail(n - 1, x), phi_tail(n - 2, x) * c * np * a.powf(np - 1.0) * sg)
            }
            Integrand::ExpPower(c, p) => {
                let e = (c * a.powf(np)).exp();
                let ap = a.powf(p);
                (e * ap, e * (c * np * a.powf(np - 1.0) * ap + p * a.powf(p - 1.0)) * sg)
            }
        }
    }
}

/// `A / M^e` with `A = ∫ f_A(u)|x|^{-w_A}`, `M = ∫ |u|^p |x|^{-w_M}`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct RatioSpec {
    num: Integrand,
    num_weight: f64,
    den_power: f64,
    den_weight: f64,
    den_exponent: f64,
}

impl RatioSpec {
    fn for_kind(cfg: &ExponentConfig<f64>, kind: FunctionalKind) -> Result<Self> {
        let nn = cfg.n_real();
        let (s, t, a) = (cfg.s(), cfg.t(), cfg.alpha());
        let theta = (nn - t) / (nn - s);
        match kind {
            FunctionalKind::F => Ok(Self { num: Integrand::Phi(a), num_weight: t, den_power: nn, den_weight: s, den_exponent: theta }),
            FunctionalKind::G => {
                Ok(Self { num: Integrand::ExpPower(a, nn), num_weight: t, den_power: nn, den_weight: s, den_exponent: theta })
            }
            FunctionalKind::Q => {
                if !(cfg.q() > nn) {
                    return Err(Error::Power(format!("Q search needs q > N, got q = {}", cfg.q())));
                }
                Ok(Self {
                    num: Integrand::ExpPower(a, cfg.q()),
                    num_weight: t,
                    den_power: cfg.q(),
                    den_weight: s,
                    den_exponent: theta,
                })
            }
            other => Err(Error::InvalidParameter(format!("maximize_ratio supports F, G, Q; got {other}"))),
        }
    }

    fn at(n: usize, alpha: f64, beta: f64) -> Self {
        let nn = n as f64;
        Self {
            num: Integrand::Phi(alpha * (1.0 - beta / nn)),
            num_weight: beta,
            den_power: nn,
            den_weight: 0.0,
            den_exponent: (nn - beta) / nn,
        }
    }
}

/// Quadrature points of one weight on every cell: `(cell, λ, W)` with `u = (1-λ)v_i + λv_{i+1}`.
#[derive(Debug, Clone)]
struct WeightTable {
    plateau: f64,
    points: Vec<(usize, f64, f64)>,
}

#[derive(Debug, Clone)]
pub(crate) struct Grid {
    n: usize,
    np: f64,
    radii: Vec<f64>,
    /// `∫|∇u|^N = Σ coef_i |d_i|^N`
    coef: Vec<f64>,
}

impl Grid {
    pub(crate) fn new(n: usize, cells: usize) -> Result<Self> {
        let omega = sphere_area::<f64>(n)?;
        let nn = n as f64;
        let radii: Vec<f64> = (0..=cells)
            .map(|i| if i == cells { 1.0 } else { INNER_RADIUS.powf(1.0 - i as f64 / cells as f64) })
            .collect();
        let coef = radii
            .windows(2)
            .map(|w| omega * (w[1].powf(nn) - w[0].powf(nn)) / (nn * (w[1] - w[0]).powf(nn)))
            .collect();
        Ok(Self { n, np: conjugate::<f64>(n), radii, coef })
    }

    fn cells(&self) -> usize {
        self.radii.len() - 1
    }

    fn table(&self, weight: f64) -> Result<WeightTable> {
        let nn = self.n as f64;
        if !(weight < nn) {
            return Err(Error::WeightIntegrability { weight, n: self.n });
        }
        let omega = sphere_area::<f64>(self.n)?;
        let rule = GaussRule::<f64>::legendre(CELL_GAUSS_ORDER);
        let mut points = Vec::with_capacity(self.cells() * CELL_GAUSS_ORDER);
        for (i, w) in self.radii.windows(2).enumerate() {
            let half = 0.5 * (w[1] - w[0]);
            let mid = 0.5 * (w[1] + w[0]);
            for (x, gw) in rule.nodes.iter().zip(&rule.weights) {
                let r = mid + half * x;
                points.push((i, (r - w[0]) / (w[1] - w[0]), omega * gw * half * r.powf(nn - 1.0 - weight)));
            }
        }
        let plateau = omega * self.radii[0].powf(nn - weight) / (nn - weight);
        Ok(WeightTable { plateau, points })
    }

    fn values(&self, d: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; d.len() + 1];
        for i in (0..d.len()).rev() {
            v[i] = v[i + 1] + d[i];
        }
        v
    }

    pub(crate) fn profile(&self, d: &[f64]) -> Result<RadialProfile<f64>> {
        let v = self.values(d);
        RadialProfile::new(self.radii.iter().copied().zip(v).collect())
    }

    fn energy(&self, d: &[f64]) -> f64 {
        let nn = self.n as f64;
        d.iter().zip(&self.coef).map(|(x, c)| c * x.abs().powf(nn)).sum()
    }

    /// `(∂/∂d) ∥∇u∥_N` at a point of the constraint surface.
    fn energy_norm_grad(&self, d: &[f64]) -> Vec<f64> {
        let nn = self.n as f64;
        let e = self.energy(d);
        let scale = e.powf(1.0 / nn - 1.0);
        d.iter().zip(&self.coef).map(|(x, c)| scale * c * x.abs().powf(nn - 1.0) * x.signum()).collect()
    }

    fn retract(&self, d: &[f64]) -> Vec<f64> {
        let g = self.energy(d).powf(1.0 / self.n as f64);
        d.iter().map(|x| x / g).collect()
    }

    /// `∫ f(u)|x|^{-w}` and its gradient with respect to `d`.
    fn integral(&self, table: &WeightTable, f: Integrand, v: &[f64]) -> (f64, Vec<f64>) {
        let (f0, df0) = f.eval(self.n, self.np, v[0]);
        let mut total = f0 * table.plateau;
        let mut dv = vec![0.0; v.len()];
        dv[0] = df0 * table.plateau;
        for &(i, lam, w) in &table.points {
            let u = (1.0 - lam) * v[i] + lam * v[i + 1];
            let (fu, dfu) = f.eval(self.n, self.np, u);
            total += w * fu;
            dv[i] += w * dfu * (1.0 - lam);
            dv[i + 1] += w * dfu * lam;
        }
        // v_i = Σ_{j >= i} d_j, so ∂/∂d_j = Σ_{i <= j} ∂/∂v_i
        let mut dd = Vec::with_capacity(v.len() - 1);
        let mut acc = 0.0;
        for x in dv.iter().take(v.len() - 1) {
            acc += x;
            dd.push(acc);
        }
        (total, dd)
    }
}

/// `log R` on a grid with its `d`-gradient.
struct Objective {
    grid: Grid,
    spec: RatioSpec,
    num_table: WeightTable,
    den_table: WeightTable,
}

impl Objective {
    fn new(grid: Grid, spec: RatioSpec) -> Result<Self> {
        let num_table = grid.table(spec.num_weight)?;
        let den_table = grid.table(spec.den_weight)?;
        Ok(Self { grid, spec, num_table, den_table })
    }

    fn log_value(&self, d: &[f64]) -> (f64, Vec<f64>) {
        let v = self.grid.values(d);
        let (a, da) = self.grid.integral(&self.num_table, self.spec.num, &v);
        let (m, dm) = self.grid.integral(&self.den_table, Integrand::Power(self.spec.den_power), &v);
        if !(a > 0.0) || !(m > 0.0) || !a.is_finite() {
            return (f64::NEG_INFINITY, vec![0.0; d.len()]);
        }
        let e = self.spec.den_exponent;
        let h = a.ln() - e * m.ln();
        let g = da.iter().zip(&dm).map(|(x, y)| x / a - e * y / m).collect();
        (h, g)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Projection of `g` onto the tangent space `{x : x·c = 0}`.
fn tangential(g: &[f64], c: &[f64]) -> Vec<f64> {
    let cc = dot(c, c);
    let k = dot(g, c) / cc;
    g.iter().zip(c).map(|(x, y)| x - k * y).collect()
}

#[derive(Debug, Clone)]
struct RunOutcome {
    d: Vec<f64>,
    log_value: f64,
    iterations: usize,
    converged: bool,
    history: Vec<(usize, f64)>,
}

fn initial_increments(seed: u64, cells: usize) -> Vec<f64> {
    let mut rng = SplitMix64::seed_from_u64(seed);
    (0..cells).map(|_| 0.05 + rng.random::<f64>()).collect()
}

/// Projected ascent from `d0` with Barzilai–Borwein steps and Armijo backtracking.
fn ascend(obj: &Objective, d0: Vec<f64>, params: &OptimizerParams, step0: f64) -> RunOutcome {
    let grid = &obj.grid;
    let mut d = grid.retract(&d0);
    let (mut h, mut g) = obj.log_value(&d);
    let mut tg = tangential(&g, &grid.energy_norm_grad(&d));
    let mut history = vec![(0, h.exp())];
    let mut step = step0;
    let step_max = 1e3 * step0;
    let mut stalls = 0;
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=params.max_iterations {
        iterations = it;
        let slope = dot(&tg, &tg);
        if !(slope > 0.0) || !h.is_finite() {
            converged = h.is_finite();
            break;
        }
        let mut eta = step;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = d.iter().zip(&tg).map(|(x, y)| x + eta * y).collect();
            let trial = grid.retract(&trial);
            let (ht, gt) = obj.log_value(&trial);
            if ht.is_finite() && ht >= h + ARMIJO * eta * slope {
                accepted = Some((trial, ht, gt));
                break;
            }
            eta *= 0.5;
        }
        let Some((nd, nh, ng)) = accepted else {
            // no ascent direction left at working precision
            converged = true;
            break;
        };
        let ntg = tangential(&ng, &grid.energy_norm_grad(&nd));
        let s: Vec<f64> = nd.iter().zip(&d).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = ntg.iter().zip(&tg).map(|(a, b)| b - a).collect();
        let sy = dot(&s, &y);
        step = if sy > 0.0 { (dot(&s, &s) / sy).min(step_max) } else { (2.0 * eta).min(step_max) };
        let improvement = (nh - h).exp_m1();
        d = nd;
        h = nh;
        g = ng;
        tg = ntg;
        history.push((it, h.exp()));
        if improvement <= params.rel_tol {
            stalls += 1;
            if stalls >= 3 {
                converged = true;
                break;
            }
        } else {
            stalls = 0;
        }
    }
    let _ = g;
    RunOutcome { d, log_value: h, iterations, converged, history }
}

fn search(
    obj: &Objective,
    params: &OptimizerParams,
    criticality: f64,
    audit: impl Fn(&RadialProfile<f64>) -> Result<f64>,
) -> Result<MaximizerResult> {
    params.validate()?;
    let step0 = params.step_init * criticality;
    let runs: Vec<RunOutcome> = (0..params.restarts as u64)
        .into_par_iter()
        .map(|r| ascend(obj, initial_increments(params.seed.wrapping_add(r), obj.grid.cells()), params, step0))
        .collect();
    let restart_values: Vec<f64> = runs.iter().map(|r| r.log_value.exp()).collect();
    let best = runs
        .into_iter()
        .reduce(|a, b| if b.log_value > a.log_value { b } else { a })
        .expect("at least one restart");
    let profile = obj.grid.profile(&best.d)?;
    let value = audit(&profile)?;
    let constraint_residual = (grad_norm(&profile, obj.grid.n)? - 1.0).abs();
    Ok(MaximizerResult {
        best_profile: profile,
        value,
        discrete_value: best.log_value.exp(),
        iterations: best.iterations,
        converged: best.converged && constraint_residual <= 1e-8,
        history: best.history,
        constraint_residual,
        restart_values,
    })
}

/// Maximizes `F`, `G` or `Q` over unit-gradient profiles. Supercritical configurations
/// are rejected since the supremum is infinite there.
pub fn maximize_ratio(cfg: &ExponentConfig<f64>, kind: FunctionalKind, params: &OptimizerParams) -> Result<MaximizerResult> {
    if !cfg.is_subcritical() {
        return Err(Error::Supercritical { alpha: cfg.alpha(), alpha_crit: cfg.alpha_crit() });
    }
    let spec = RatioSpec::for_kind(cfg, kind)?;
    params.validate()?;
    let obj = Objective::new(Grid::new(cfg.n(), params.node_count)?, spec)?;
    let cfg = *cfg;
    search(&obj, params, 1.0 - cfg.alpha() / cfg.alpha_crit(), move |p| {
        Ok(match kind {
            FunctionalKind::F => f_ratio(p, &cfg)?.value,
            FunctionalKind::G => g_ratio(p, &cfg)?.value,
            _ => q_ratio(p, &cfg)?.value,
        })
    })
}

fn check_at_args(n: usize, alpha: f64, beta: f64) -> Result<f64> {
    let an = alpha_n::<f64>(n)?;
    if !(beta >= 0.0 && beta < n as f64) {
        return Err(Error::InvalidBeta { beta, n });
    }
    if !(alpha > 0.0) {
        return Err(Error::NonpositiveAlpha(alpha));
    }
    if !(alpha < an) {
        return Err(Error::Supercritical { alpha, alpha_crit: an });
    }
    Ok(an)
}

/// Lower estimate of `AT(α, β)` by maximizing the Adachi–Tanaka ratio at `∥∇u∥_N = 1`.
pub fn estimate_at(n: usize, alpha: f64, beta: f64, params: &OptimizerParams) -> Result<MaximizerResult> {
    let an = check_at_args(n, alpha, beta)?;
    params.validate()?;
    let obj = Objective::new(Grid::new(n, params.node_count)?, RatioSpec::at(n, alpha, beta))?;
    search(&obj, params, 1.0 - alpha / an, move |p| Ok(at_ratio(p, n, alpha, beta)?.value))
}

/// Result of the two-level search for `MT_{a,b}(β)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MtResult {
    /// `∫ Φ_N(α_N(1-β/N)|u|^{N'}) |x|^{-β}` on `profile`, by adaptive quadrature.
    pub value: f64,
    pub theta: f64,
    pub profile: RadialProfile<f64>,
    /// `∥∇u∥_N^a + ∥u∥_N^b − 1` on `profile`.
    pub constraint_residual: f64,
    /// `(θ, inner value)` at every outer evaluation, in evaluation order.
    pub trace: Vec<(f64, f64)>,
    pub converged: bool,
}

/// Value of the `MT` functional at level `θ = ∥∇u∥_N^a`, together with the profile.
///
/// A unit-gradient shape `w` maximizing the Adachi–Tanaka ratio at `α_N θ^{N'/a}` is
/// scaled to `c w(λ·)` with `c = θ^{1/a}` and `λ` chosen so `∥c w(λ·)∥_N^b = 1 − θ`;
/// both constraints then hold exactly, and the functional is evaluated on that profile.
pub fn mt_inner(
    n: usize,
    a: f64,
    b: f64,
    beta: f64,
    theta: f64,
    params: &OptimizerParams,
) -> Result<(f64, RadialProfile<f64>, bool)> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidParameter(format!("theta = {theta} must lie in (0, 1)")));
    }
    let nn = n as f64;
    let an = alpha_n::<f64>(n)?;
    let alpha = an * theta.powf(conjugate::<f64>(n) / a);
    let shape = estimate_at(n, alpha, beta, params)?;
    let c = theta.powf(1.0 / a);
    let norm = weighted_norm(&shape.best_profile, n, nn, 0.0)?;
    let lambda = c * norm / (1.0 - theta).powf(1.0 / b);
    let profile = crate::transforms::dilate(&shape.best_profile.scaled(c), lambda)?;
    let value = crate::quadrature::Quadrature::default().phi_integral(&profile, n, an * (1.0 - beta / nn), beta)?;
    Ok((value, profile, shape.converged))
}

/// Lower estimate of `MT_{a,b}(β)`: golden-section search over `θ ∈ (0, 1)` of [`mt_inner`].
pub fn estimate_mt(n: usize, a: f64, b: f64, beta: f64, params: &OptimizerParams) -> Result<MtResult> {
    let nn = n as f64;
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::InvalidParameter(format!("a = {a}, b = {b} must be positive")));
    }
    if b > nn {
        return Err(Error::Finiteness { b, n });
    }
    if !(beta >= 0.0 && beta < nn) {
        return Err(Error::InvalidBeta { beta, n });
    }
    params.validate()?;
    let mut trace = Vec::new();
    let mut all_converged = true;
    let mut eval = |theta: f64| -> Result<f64> {
        let (v, _, conv) = mt_inner(n, a, b, beta, theta, params)?;
        all_converged &= conv;
        trace.push((theta, v));
        Ok(v)
    };
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.005, 0.995);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = eval(x1)?;
    let mut f2 = eval(x2)?;
    for _ in 0..18 {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = eval(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = eval(x2)?;
        }
    }
    let theta = trace.iter().copied().fold((0.0, f64::NEG_INFINITY), |best, p| if p.1 > best.1 { p } else { best }).0;
    let (value, profile, conv) = mt_inner(n, a, b, beta, theta, params)?;
    let g = grad_norm(&profile, n)?;
    let m = weighted_norm(&profile, n, nn, 0.0)?;
    let constraint_residual = g.powf(a) + m.powf(b) - 1.0;
    Ok(MtResult { value, theta, profile, constraint_residual, trace, converged: all_converged && conv })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::critical_alpha;
    use crate::scalar::rel_err;

    fn quick() -> OptimizerParams {
        OptimizerParams { node_count: 32, max_iterations: 800, restarts: 3, ..Default::default() }
    }

    #[test]
    fn analytic_gradient_matches_central_differences() {
        let cfg = ExponentConfig::new(2, -0.5, 0.5, 3.0, 3.0).unwrap();
        let specs = [
            RatioSpec::for_kind(&cfg, FunctionalKind::F).unwrap(),
            RatioSpec::for_kind(&cfg, FunctionalKind::G).unwrap(),
            RatioSpec::for_kind(&cfg, FunctionalKind::Q).unwrap(),
            RatioSpec::at(3, 8.0, 1.0),
        ];
        for (k, spec) in specs.iter().enumerate() {
            let n = if k == 3 { 3 } else { 2 };
            let obj = Objective::new(Grid::new(n, 16).unwrap(), *spec).unwrap();
            for seed in 0..10u64 {
                let d = obj.grid.retract(&initial_increments(seed, 16));
                let (_, g) = obj.log_value(&d);
                let scale = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                for j in [0usize, 5, 15] {
                    let h = 1e-6 * d[j].abs().max(1e-3);
                    let mut dp = d.clone();
                    let mut dm = d.clone();
                    dp[j] += h;
                    dm[j] -= h;
                    let fd = (obj.log_value(&dp).0 - obj.log_value(&dm).0) / (2.0 * h);
                    assert!(rel_err(fd, g[j]) < 1e-5 || (fd - g[j]).abs() < 1e-6 * scale, "spec {k} seed {seed} j {j}: {fd} vs {}", g[j]);
                }
            }
        }
    }

    #[test]
    fn grid_energy_matches_quadrature() {
        let grid = Grid::new(3, 24).unwrap();
        let d = grid.retract(&initial_increments(4, 24));
        let p = grid.profile(&d).unwrap();
        assert!((grad_norm(&p, 3).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(grid.radii[0], INNER_RADIUS);
        // node counts m and 4m give nested grids
        let fine = Grid::new(3, 96).unwrap();
        for (i, r) in grid.radii.iter().enumerate() {
            assert!(rel_err(*r, fine.radii[4 * i]) < 1e-14);
        }
    }

    #[test]
    fn g_maximizer_exceeds_one() {
        let cfg = ExponentConfig::standard(2, 0.0, 0.0, 6.0).unwrap();
        let res = maximize_ratio(&cfg, FunctionalKind::G, &quick()).unwrap();
        assert!(res.value > 1.0);
        assert!(res.history_is_monotone());
        assert!(res.constraint_residual <= 1e-10);
        assert!(rel_err(res.value, g_ratio(&res.best_profile, &cfg).unwrap().value) < 1e-15);
        assert!(rel_err(res.value, res.discrete_value) < 1e-6, "{} vs {}", res.value, res.discrete_value);
    }

    #[test]
    fn small_alpha_f_matches_leading_term() {
        for n in [2usize, 3] {
            let a = 1e-3;
            let cfg = ExponentConfig::standard(n, 0.3, 0.3, a).unwrap();
            let res = maximize_ratio(&cfg, FunctionalKind::F, &quick()).unwrap();
            let fact: f64 = (1..n).map(|j| j as f64).product();
            let lead = a.powi(n as i32 - 1) / fact;
            assert!(rel_err(res.value, lead) < 0.05, "n {n}: {} vs {lead}", res.value);
        }
    }

    #[test]
    fn rejects_supercritical_and_bad_params() {
        let ac = critical_alpha::<f64>(2, 0.0).unwrap();
        let cfg = ExponentConfig::standard(2, 0.0, 0.0, 1.05 * ac).unwrap();
        assert!(matches!(maximize_ratio(&cfg, FunctionalKind::G, &quick()), Err(Error::Supercritical { .. })));
        let ok = ExponentConfig::standard(2, 0.0, 0.0, 1.0).unwrap();
        let bad = OptimizerParams { rel_tol: 2.0, ..quick() };
        assert!(matches!(maximize_ratio(&ok, FunctionalKind::G, &bad), Err(Error::InvalidParameter(_))));
        assert!(matches!(maximize_ratio(&ok, FunctionalKind::AT, &quick()), Err(Error::InvalidParameter(_))));
        assert!(matches!(estimate_at(2, 13.0, 0.0, &quick()), Err(Error::Supercritical { .. })));
        assert!(matches!(estimate_mt(2, 2.0, 2.5, 0.0, &quick()), Err(Error::Finiteness { .. })));
    }

    #[test]
    fn at_estimates_increase_with_alpha() {
        let an = alpha_n::<f64>(2).unwrap();
        let vals: Vec<f64> = [0.5, 0.7, 0.9].iter().map(|f| estimate_at(2, f * an, 0.0, &quick()).unwrap().value).collect();
        assert!(vals[0] < vals[1] && vals[1] < vals[2], "{vals:?}");
    }

    #[test]
    fn mt_inner_profile_satisfies_both_constraints() {
        let (v, p, _) = mt_inner(2, 2.0, 2.0, 0.0, 0.4, &quick()).unwrap();
        let g = grad_norm(&p, 2).unwrap();
        let m = weighted_norm(&p, 2, 2.0, 0.0).unwrap();
        assert!((g.powi(2) - 0.4).abs() < 1e-10);
        assert!((m.powi(2) - 0.6).abs() < 1e-9);
        assert!(v > 0.0);
    }

    #[test]
    fn result_serializes() {
        let cfg = ExponentConfig::standard(2, 0.0, 0.0, 2.0).unwrap();
        let res = maximize_ratio(&cfg, FunctionalKind::G, &OptimizerParams { restarts: 1, ..quick() }).unwrap();
        let v: serde_json::Value = serde_json::from_str(&res.to_json()).unwrap();
        assert!(v["best_profile"]["nodes"].as_array().unwrap().len() == 33);
        assert!(res.history_csv().starts_with("iteration,value\n0,"));
    }
}
