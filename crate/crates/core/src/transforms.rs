//! Changes of variables: the radial peel map that removes the weight `|x|^{-t}`,
//! Moser's logarithmic substitution `|x|^N = e^{-t}`, dilations, and finite-difference
//! checks of the non-radial pointwise computations.

use rand::{RngExt, SeedableRng};
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponents::{alpha_n, conjugate, sphere_area, ExponentConfig};
use crate::experiments::SweepRecord;
use crate::profiles::{ComposedProfile, RadialProfile};
use crate::quadrature::Quadrature;
use crate::scalar::{lit, rel_err, Scalar};

/// Whether a record asserts equality or an upper bound `lhs <= rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Eq,
    Le,
}

impl Relation {
    fn is_eq(&self) -> bool {
        *self == Relation::Eq
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityRecord {
    pub id: String,
    pub lhs: f64,
    pub rhs: f64,
    pub rel_err: f64,
    #[serde(skip_serializing_if = "Relation::is_eq")]
    pub relation: Relation,
    /// Overrides the report tolerance for this record.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

impl IdentityRecord {
    pub fn equality(id: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self { id: id.into(), lhs, rhs, rel_err: rel_err(lhs, rhs), relation: Relation::Eq, tol: None }
    }

    pub fn bound(id: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self { id: id.into(), lhs, rhs, rel_err: rel_err(lhs, rhs), relation: Relation::Le, tol: None }
    }

    fn with_tol(mut self, tol: f64) -> Self {
        self.tol = Some(tol);
        self
    }

    /// Equalities pass when `rel_err <= tol`; bounds when `lhs <= rhs + tol (1 + |rhs|)`.
    pub fn passes(&self, report_tol: f64) -> bool {
        let tol = self.tol.unwrap_or(report_tol);
        match self.relation {
            Relation::Eq => self.rel_err <= tol,
            Relation::Le => self.lhs <= self.rhs + tol * (1.0 + self.rhs.abs()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub identities: Vec<IdentityRecord>,
    pub pass: bool,
    pub tol: f64,
}

impl IdentityReport {
    pub fn new(identities: Vec<IdentityRecord>, tol: f64) -> Self {
        let pass = identities.iter().all(|r| r.passes(tol));
        Self { identities, pass, tol }
    }

    pub fn max_rel_err(&self) -> f64 {
        self.identities.iter().filter(|r| r.relation == Relation::Eq).map(|r| r.rel_err).fold(0.0, f64::max)
    }

    pub fn failures(&self) -> Vec<&IdentityRecord> {
        self.identities.iter().filter(|r| !r.passes(self.tol)).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("identity report serializes")
    }

    /// CSV with columns `id,lhs,rhs,rel_err,pass`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("id,lhs,rhs,rel_err,pass\n");
        for r in &self.identities {
            out.push_str(&format!("{},{:e},{:e},{:e},{}\n", r.id, r.lhs, r.rhs, r.rel_err, r.passes(self.tol)));
        }
        out
    }
}

/// Radial peel map `ṽ(ρ) = ((N-e)/N)^{1/N'} ũ(ρ^{N/(N-e)})`.
pub fn peel_map<S: Scalar>(p: &RadialProfile<S>, n: usize, e: S) -> Result<ComposedProfile<S>> {
    let nn = S::from_usize_lossy(n);
    if n < 2 {
        return Err(Error::DimensionTooSmall(n));
    }
    if !(e < nn) {
        return Err(Error::WeightIntegrability { weight: e.to_f64_lossy(), n });
    }
    let amplitude = ((nn - e) / nn).powf(conjugate::<S>(n).recip());
    ComposedProfile::new(p.clone(), nn / (nn - e), amplitude)
}

pub fn verify_peel_identities<S: Scalar>(p: &RadialProfile<S>, cfg: &ExponentConfig<S>) -> Result<IdentityReport> {
    verify_peel_identities_with(&Quadrature::default(), p, cfg, 1e-7)
}

/// Compares integrals of `u` against integrals of `v = peel_map(u, N, t)`; each side is
/// an independent quadrature. With `γ = N/(N-t)`:
///
/// * `norm`: `∥u∥_{N,t}^N = γ^N ∥v∥_N^N`
/// * `phi`: `∫ Φ_N(α|u|^{N'}) |x|^{-t} = γ ∫ Φ_N(γα|v|^{N'})`
/// * `exp`: `∫ e^{α|u|^{N'}} |u|^N |x|^{-t} = γ^N ∫ e^{γα|v|^{N'}} |v|^N`
/// * `moment_j` (q > N, `j ∈ {q, q+2}`): `∫ |u|^j |x|^{-t} = γ^{j/N'+1} ∫ |v|^j`
/// * `exp_q` (q > N): `∫ e^{α|u|^{N'}} |u|^q |x|^{-t} = γ^{q/N'+1} ∫ e^{γα|v|^{N'}} |v|^q`
/// * `grad`: `∥∇u∥_N = ∥∇v∥_N`
pub fn verify_peel_identities_with<S: Scalar>(
    quad: &Quadrature<S>,
    p: &RadialProfile<S>,
    cfg: &ExponentConfig<S>,
    tol: f64,
) -> Result<IdentityReport> {
    let n = cfg.n();
    let nn = cfg.n_real();
    let t = cfg.t();
    let a = cfg.alpha();
    let np = cfg.nprime();
    let v = peel_map(p, n, t)?;
    let gamma = nn / (nn - t);
    let f = |x: S| x.to_f64_lossy();
    let mut out = Vec::new();

    let lhs = quad.weighted_norm(p, n, nn, t)?.powf(nn);
    let rhs = gamma.powf(nn) * quad.weighted_norm(&v, n, nn, S::zero())?.powf(nn);
    out.push(IdentityRecord::equality("norm", f(lhs), f(rhs)));

    let lhs = quad.phi_integral(p, n, a, t)?;
    let rhs = gamma * quad.phi_integral(&v, n, gamma * a, S::zero())?;
    out.push(IdentityRecord::equality("phi", f(lhs), f(rhs)));

    let lhs = quad.exp_integral(p, n, a, nn, t)?;
    let rhs = gamma.powf(nn) * quad.exp_integral(&v, n, gamma * a, nn, S::zero())?;
    out.push(IdentityRecord::equality("exp", f(lhs), f(rhs)));

    let q = cfg.q();
    if q > nn {
        for j in [q, q + lit(2.0)] {
            let lhs = quad.radial_integral(p, n, t, |u| u.abs().powf(j))?;
            let rhs = gamma.powf(j / np + S::one()) * quad.radial_integral(&v, n, S::zero(), |u| u.abs().powf(j))?;
            out.push(IdentityRecord::equality(format!("moment_{}", j.to_f64_lossy()), f(lhs), f(rhs)));
        }
        let lhs = quad.exp_integral(p, n, a, q, t)?;
        let rhs = gamma.powf(q / np + S::one()) * quad.exp_integral(&v, n, gamma * a, q, S::zero())?;
        out.push(IdentityRecord::equality("exp_q", f(lhs), f(rhs)));
    }

    let lhs = quad.grad_norm(p, n)?;
    let rhs = quad.grad_norm(&v, n)?;
    out.push(IdentityRecord::equality("grad", f(lhs), f(rhs)));
    Ok(IdentityReport::new(out, tol))
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|c| c * c).sum::<f64>().sqrt()
}

fn check_point(n: usize, t: f64, x: &[f64]) -> Result<()> {
    if x.len() != n {
        return Err(Error::InvalidParameter(format!("point has dimension {}, expected {n}", x.len())));
    }
    if !(t < n as f64) {
        return Err(Error::WeightIntegrability { weight: t, n });
    }
    if norm(x) == 0.0 {
        return Err(Error::Origin);
    }
    Ok(())
}

/// `det J_F(x) = N/(N-t) |x|^{Nt/(N-t)}` for `F(x) = |x|^{t/(N-t)} x`.
pub fn jacobian_det(n: usize, t: f64, x: &[f64]) -> Result<f64> {
    check_point(n, t, x)?;
    let nn = n as f64;
    Ok(nn / (nn - t) * norm(x).powf(nn * t / (nn - t)))
}

/// `F(x) = |x|^{t/(N-t)} x`.
pub fn peel_point(n: usize, t: f64, x: &[f64]) -> Vec<f64> {
    let scale = norm(x).powf(t / (n as f64 - t));
    x.iter().map(|c| c * scale).collect()
}

/// Determinant of a dense row-major matrix by LU with partial pivoting.
fn determinant(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        if a[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        det *= a[col][col];
        let (top, rest) = a.split_at_mut(col + 1);
        let pivot_row = &top[col];
        for row in rest.iter_mut() {
            let m = row[col] / pivot_row[col];
            for (x, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= m * p;
            }
        }
    }
    det
}

/// Central-difference Jacobian determinant of `F` with step `h = 1e-5 |x|`.
pub fn fd_jacobian_det(n: usize, t: f64, x: &[f64]) -> Result<f64> {
    check_point(n, t, x)?;
    let h = 1e-5 * norm(x);
    let mut jac = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] += h;
        xm[j] -= h;
        let (fp, fm) = (peel_point(n, t, &xp), peel_point(n, t, &xm));
        for i in 0..n {
            jac[i][j] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    Ok(determinant(jac))
}

/// Finite-difference slack for the pointwise gradient bound.
pub const FD_SLACK: f64 = 1e-4;
/// Tolerance for the finite-difference Jacobian determinant.
pub const JACOBIAN_TOL: f64 = 1e-5;

/// Checks `|∇v(x)| <= (N/(N-t))^{1/N} |x|^{t/(N-t)} |∇u(F(x))|` for the bump
/// `u(y) = exp(-|y - c|²)` and `v(x) = ((N-t)/N)^{1/N'} u(F(x))`.
///
/// `∇v` is a central difference with step `1e-5 |x|`; `∇u` is exact. Each point also
/// contributes a `jacobian` record comparing [`fd_jacobian_det`] with [`jacobian_det`].
pub fn verify_nonradial_gradient_bound(
    n: usize,
    t: f64,
    sample_points: &[Vec<f64>],
    bump_center: &[f64],
) -> Result<IdentityReport> {
    if bump_center.len() != n {
        return Err(Error::InvalidParameter(format!("bump center has dimension {}, expected {n}", bump_center.len())));
    }
    let nn = n as f64;
    let amp = ((nn - t) / nn).powf((nn - 1.0) / nn);
    let u = |y: &[f64]| (-y.iter().zip(bump_center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()).exp();
    let grad_u = |y: &[f64]| {
        let e = u(y);
        y.iter().zip(bump_center).map(|(a, b)| -2.0 * (a - b) * e).collect::<Vec<_>>()
    };
    let v = |x: &[f64]| amp * u(&peel_point(n, t, x));
    let mut out = Vec::with_capacity(2 * sample_points.len());
    for (i, x) in sample_points.iter().enumerate() {
        check_point(n, t, x)?;
        let r = norm(x);
        let h = 1e-5 * r;
        let mut gv = vec![0.0; n];
        for j in 0..n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            gv[j] = (v(&xp) - v(&xm)) / (2.0 * h);
        }
        let lhs = norm(&gv);
        let rhs = (nn / (nn - t)).powf(1.0 / nn) * r.powf(t / (nn - t)) * norm(&grad_u(&peel_point(n, t, x)));
        out.push(IdentityRecord::bound(format!("gradient_bound[{i}]"), lhs, rhs).with_tol(FD_SLACK));
        let fd = fd_jacobian_det(n, t, x)?;
        let exact = jacobian_det(n, t, x)?;
        out.push(IdentityRecord::equality(format!("jacobian[{i}]"), fd, exact).with_tol(JACOBIAN_TOL));
    }
    Ok(IdentityReport::new(out, FD_SLACK))
}

/// `count` seeded points uniform in angle and radius in the annulus `r_min < |x| < r_max`.
pub fn annulus_points(seed: u64, n: usize, count: usize, r_min: f64, r_max: f64) -> Vec<Vec<f64>> {
    let mut rng = SplitMix64::seed_from_u64(seed);
    (0..count)
        .map(|_| loop {
            let dir: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let len = norm(&dir);
            if len > 1e-3 && len <= 1.0 {
                let r = rng.random_range(r_min..r_max);
                break dir.iter().map(|c| c * r / len).collect();
            }
        })
        .collect()
}

/// How a [`LogProfile`] is interpolated between its nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LogInterp {
    /// Linear in `t`.
    Linear,
    /// Linear in `r = e^{-t/N}`: the exact image of a piecewise-linear radial profile.
    Radial,
}

/// `w(t)` on the line, constant beyond the first and last node.
#[derive(Debug, Clone, PartialEq)]
pub struct LogProfile<S> {
    n: usize,
    nodes: Vec<(S, S)>,
    interp: LogInterp,
}

impl<S: Scalar> LogProfile<S> {
    pub fn new(n: usize, nodes: Vec<(S, S)>, interp: LogInterp) -> Result<Self> {
        if n < 2 {
            return Err(Error::DimensionTooSmall(n));
        }
        if nodes.len() < 2 {
            return Err(Error::InadmissibleLogProfile("need at least two nodes".into()));
        }
        for (i, w) in nodes.windows(2).enumerate() {
            if !(w[1].0 > w[0].0) {
                return Err(Error::InadmissibleLogProfile(format!("t not increasing at node {}", i + 1)));
            }
        }
        if nodes.iter().any(|&(t, w)| !t.is_finite() || !w.is_finite()) {
            return Err(Error::InadmissibleLogProfile("non-finite node".into()));
        }
        Ok(Self { n, nodes, interp })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> &[(S, S)] {
        &self.nodes
    }

    pub fn interp(&self) -> LogInterp {
        self.interp
    }

    fn radius(&self, t: S) -> S {
        (-t / S::from_usize_lossy(self.n)).exp()
    }

    /// `w` and `w'` at `t` inside cell `j` (nodes `j`, `j+1`).
    fn cell_eval(&self, j: usize, t: S) -> (S, S) {
        let (ta, wa) = self.nodes[j];
        let (tb, wb) = self.nodes[j + 1];
        match self.interp {
            LogInterp::Linear => {
                let slope = (wb - wa) / (tb - ta);
                (wa + slope * (t - ta), slope)
            }
            LogInterp::Radial => {
                let (ra, rb) = (self.radius(ta), self.radius(tb));
                let slope = (wb - wa) / (rb - ra);
                let r = self.radius(t);
                (wa + slope * (r - ra), -slope * r / S::from_usize_lossy(self.n))
            }
        }
    }

    pub fn evaluate(&self, t: S) -> S {
        let nodes = &self.nodes;
        let last = nodes.len() - 1;
        if t <= nodes[0].0 {
            return nodes[0].1;
        }
        if t >= nodes[last].0 {
            return nodes[last].1;
        }
        let j = nodes.partition_point(|&(tt, _)| tt <= t) - 1;
        self.cell_eval(j, t).0
    }

    /// `∫ g(w(t), w'(t), t) dt` over the node range by adaptive Gauss per cell.
    fn cell_sum<F: Fn(S, S, S) -> S>(&self, quad: &Quadrature<S>, g: F) -> Result<S> {
        let mut total = S::zero();
        for j in 0..self.nodes.len() - 1 {
            let h = |t: S| {
                let (w, dw) = self.cell_eval(j, t);
                g(w, dw, t)
            };
            total = total + quad.adaptive(&h, self.nodes[j].0, self.nodes[j + 1].0)?;
        }
        Ok(total)
    }

    /// `∫ |w'|^N dt`.
    pub fn derivative_energy(&self, quad: &Quadrature<S>) -> Result<S> {
        let nn = S::from_usize_lossy(self.n);
        if self.interp == LogInterp::Linear {
            return Ok(self
                .nodes
                .windows(2)
                .map(|c| ((c[1].1 - c[0].1).abs() / (c[1].0 - c[0].0)).powf(nn) * (c[1].0 - c[0].0))
                .fold(S::zero(), |a, b| a + b));
        }
        self.cell_sum(quad, |_, dw, _| dw.abs().powf(nn))
    }

    /// `∫ e^{β|w|^{N'}} |w|^N e^{-t} dt`; `β = 0` gives the plain moment. The tail beyond
    /// the last node, where `w` is constant, is added in closed form. A nonzero first
    /// value makes the integral diverge and is rejected.
    pub fn exp_moment(&self, quad: &Quadrature<S>, beta: S) -> Result<S> {
        let nn = S::from_usize_lossy(self.n);
        let np = conjugate::<S>(self.n);
        if self.nodes[0].1 != S::zero() {
            return Err(Error::InadmissibleLogProfile("w must vanish at the first node".into()));
        }
        let g = |w: S| {
            let a = w.abs();
            (beta * a.powf(np)).exp() * a.powf(nn)
        };
        let body = self.cell_sum(quad, |w, _, t| g(w) * (-t).exp())?;
        let (t_last, w_last) = self.nodes[self.nodes.len() - 1];
        Ok(body + g(w_last) * (-t_last).exp())
    }

    /// Inverse substitution back to a radial profile (`Radial` interpolation only).
    pub fn to_radial(&self) -> Result<RadialProfile<S>> {
        if self.interp != LogInterp::Radial {
            return Err(Error::InadmissibleLogProfile("only radial-interpolated profiles invert exactly".into()));
        }
        let k = log_constant::<S>(self.n)?;
        let nodes = self.nodes.iter().rev().map(|&(t, w)| (self.radius(t), w / k)).collect();
        RadialProfile::new(nodes)
    }

    /// `T_0 = sup{t : w(t) <= 1}`; `None` when `w` never exceeds 1. Assumes `w` nondecreasing.
    pub fn threshold(&self) -> Option<S> {
        let last = self.nodes.len() - 1;
        if self.nodes[last].1 <= S::one() {
            return None;
        }
        // first node strictly above 1
        let j = self.nodes.partition_point(|&(_, w)| w <= S::one());
        if j == 0 {
            return Some(self.nodes[0].0);
        }
        let (mut lo, mut hi) = (self.nodes[j - 1].0, self.nodes[j].0);
        for _ in 0..200 {
            let mid = (lo + hi) / lit(2.0);
            if !(mid > lo && mid < hi) {
                break;
            }
            if self.cell_eval(j - 1, mid).0 <= S::one() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(lo)
    }

    pub fn scaled(&self, factor: S) -> Self {
        Self { n: self.n, nodes: self.nodes.iter().map(|&(t, w)| (t, w * factor)).collect(), interp: self.interp }
    }

    /// Checks nonnegativity, monotonicity and vanishing at the first node.
    pub fn check_admissible(&self) -> Result<()> {
        if self.nodes.iter().any(|&(_, w)| w < S::zero()) {
            return Err(Error::InadmissibleLogProfile("w takes negative values".into()));
        }
        if self.nodes.windows(2).any(|c| c[1].1 < c[0].1) {
            return Err(Error::InadmissibleLogProfile("w is not nondecreasing".into()));
        }
        if self.nodes[0].1 != S::zero() {
            return Err(Error::InadmissibleLogProfile("w does not vanish".into()));
        }
        Ok(())
    }
}

/// `N^{(N-1)/N} ω_{N-1}^{1/N}`.
pub fn log_constant<S: Scalar>(n: usize) -> Result<S> {
    let nn = S::from_usize_lossy(n);
    let omega = sphere_area::<S>(n)?;
    Ok(nn.powf((nn - S::one()) / nn) * omega.powf(nn.recip()))
}

/// `w(t) = N^{(N-1)/N} ω_{N-1}^{1/N} ũ(e^{-t/N})`, nodes `(-N log r, const·v)` in
/// ascending `t`, interpolated as [`LogInterp::Radial`].
pub fn log_substitution<S: Scalar>(p: &RadialProfile<S>, n: usize) -> Result<LogProfile<S>> {
    let k = log_constant::<S>(n)?;
    let nn = S::from_usize_lossy(n);
    let nodes = p.nodes().iter().rev().map(|&(r, v)| (-nn * r.ln(), k * v)).collect();
    LogProfile::new(n, nodes, LogInterp::Radial)
}

pub fn verify_log_identities<S: Scalar>(p: &RadialProfile<S>, n: usize, alpha: S) -> Result<IdentityReport> {
    verify_log_identities_with(&Quadrature::default(), p, n, alpha, 1e-7)
}

/// `grad`: `∫|∇u|^N dx = ∫|w'|^N dt`; `norm`: `∫|u|^N dx = N^{-N} ∫|w|^N e^{-t} dt`;
/// `exp`: `∫ e^{α|u|^{N'}}|u|^N dx = N^{-N} ∫ e^{(α/α_N)|w|^{N'}}|w|^N e^{-t} dt`.
///
/// The radial sides use the quadrature module; the line sides integrate `w` cell by
/// cell on its own `t` grid.
pub fn verify_log_identities_with<S: Scalar>(
    quad: &Quadrature<S>,
    p: &RadialProfile<S>,
    n: usize,
    alpha: S,
    tol: f64,
) -> Result<IdentityReport> {
    if !(alpha > S::zero()) {
        return Err(Error::NonpositiveAlpha(alpha.to_f64_lossy()));
    }
    let w = log_substitution(p, n)?;
    let nn = S::from_usize_lossy(n);
    let scale = nn.powf(nn).recip();
    let f = |x: S| x.to_f64_lossy();
    let mut out = Vec::new();
    let lhs = quad.grad_integral(p, n)?;
    let rhs = w.derivative_energy(quad)?;
    out.push(IdentityRecord::equality("grad", f(lhs), f(rhs)));
    let lhs = quad.weighted_norm(p, n, nn, S::zero())?.powf(nn);
    let rhs = scale * w.exp_moment(quad, S::zero())?;
    out.push(IdentityRecord::equality("norm", f(lhs), f(rhs)));
    let lhs = quad.exp_integral(p, n, alpha, nn, S::zero())?;
    let rhs = scale * w.exp_moment(quad, alpha / alpha_n::<S>(n)?)?;
    out.push(IdentityRecord::equality("exp", f(lhs), f(rhs)));
    Ok(IdentityReport::new(out, tol))
}

/// `u(λ·)`: radii divided by `λ`.
pub fn dilate<S: Scalar>(p: &RadialProfile<S>, lambda: S) -> Result<RadialProfile<S>> {
    if !(lambda > S::zero()) || !lambda.is_finite() {
        return Err(Error::NonpositiveLambda(lambda.to_f64_lossy()));
    }
    Ok(p.radii_divided(lambda))
}

/// `u(∥u∥_{N,s}^{N/(N-s)} ·)`, which has unit `L^N(|x|^{-s})` norm.
pub fn renormalize<S: Scalar>(p: &RadialProfile<S>, n: usize, s: S) -> Result<RadialProfile<S>> {
    let nn = S::from_usize_lossy(n);
    let norm = crate::quadrature::weighted_norm(p, n, nn, s)?;
    if !(norm > S::zero()) {
        return Err(Error::ZeroDenominator("renormalization"));
    }
    dilate(p, norm.powf(nn / (nn - s)))
}

/// Seeded admissible `w`: zero up to `t = 0`, then nondecreasing with random increments
/// on `node_count` uniform cells of `[0, span]`, scaled to `∫|w'|^N dt = 1`.
pub fn random_log_profile(seed: u64, n: usize, node_count: usize, span: f64) -> Result<LogProfile<f64>> {
    if node_count < 2 || !(span > 0.0) {
        return Err(Error::InvalidParameter("need node_count >= 2 and span > 0".into()));
    }
    let mut rng = SplitMix64::seed_from_u64(seed);
    let mut w = 0.0;
    let mut nodes = vec![(-1.0, 0.0), (0.0, 0.0)];
    for i in 1..node_count {
        // sparse increments keep a mix of flat and steep stretches
        let inc: f64 = if rng.random::<f64>() < 0.3 { 0.0 } else { rng.random() };
        w += inc;
        nodes.push((span * i as f64 / (node_count - 1) as f64, w));
    }
    let raw = LogProfile::new(n, nodes, LogInterp::Linear)?;
    let energy = raw.derivative_energy(&Quadrature::default())?;
    if energy == 0.0 {
        return random_log_profile(seed.wrapping_add(0x9e37_79b9_7f4a_7c15), n, node_count, span);
    }
    Ok(raw.scaled(energy.powf(-1.0 / n as f64)))
}

/// `sup_{s >= 0} (1 + s^{1/N'})^{N'} - (1+ε)s`: the constant for which the growth bound
/// `w^{N'} <= (1+ε)(t - T_0) + C_ε` follows from `w(t) <= 1 + (t - T_0)^{1/N'}`.
pub fn growth_constant(n: usize, epsilon: f64) -> f64 {
    let np = n as f64 / (n as f64 - 1.0);
    let f = |s: f64| (1.0 + s.powf(1.0 / np)).powf(np) - (1.0 + epsilon) * s;
    let mut best = (0.0, f(0.0));
    for k in -1000..=2000 {
        let s = 10f64.powf(k as f64 / 200.0);
        let v = f(s);
        if v > best.1 {
            best = (s, v);
        }
    }
    let (mut lo, mut hi) = (best.0 / 1.02, best.0 * 1.02);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let a = hi - phi * (hi - lo);
        let b = lo + phi * (hi - lo);
        if f(a) > f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    best.1.max(f(0.5 * (lo + hi)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthCheck {
    pub epsilon: f64,
    /// Smallest `C` with `w^{N'} <= (1+ε)(t - T_0) + C` at every node past `T_0`, over the family.
    pub fitted_c: f64,
    pub analytic_c: f64,
    /// Nodes where the bound with the analytic constant fails.
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma38Probe {
    pub beta: f64,
    pub records: Vec<SweepRecord>,
    pub c_hat: f64,
    pub growth: Vec<GrowthCheck>,
}

impl Lemma38Probe {
    /// CSV with columns `index,ratio,lhs,rhs,grad_norm`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,ratio,lhs,rhs,grad_norm\n");
        for r in &self.records {
            out.push_str(&format!("{},{:e},{:e},{:e},{:e}\n", r.sweep_value, r.ratio, r.numerator, r.denominator, r.grad_norm));
        }
        out
    }
}

/// Ratio `∫ e^{β|w|^{N'}}|w|^N e^{-t} dt / ∫ |w|^N e^{-t} dt` for every member, plus the
/// growth bound for `ε ∈ {0.1, 0.5}`. Members are rescaled to `∫|w'|^N = 1`.
pub fn lemma_3_8_inequality_probe(w_family: &[LogProfile<f64>], beta: f64) -> Result<Lemma38Probe> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidParameter(format!("beta = {beta} must lie in (0, 1)")));
    }
    let quad = Quadrature::<f64>::default();
    let normalized: Vec<LogProfile<f64>> = w_family
        .iter()
        .map(|w| {
            w.check_admissible()?;
            let e = w.derivative_energy(&quad)?;
            if e == 0.0 {
                return Err(Error::InadmissibleLogProfile("w is constant".into()));
            }
            Ok(w.scaled(e.powf(-1.0 / w.n() as f64)))
        })
        .collect::<Result<_>>()?;
    let records: Vec<SweepRecord> = normalized
        .par_iter()
        .enumerate()
        .map(|(i, w)| {
            let lhs = w.exp_moment(&quad, beta)?;
            let rhs = w.exp_moment(&quad, 0.0)?;
            if rhs == 0.0 {
                return Err(Error::ZeroDenominator("lemma probe"));
            }
            let cfg = ExponentConfig::standard(w.n(), 0.0, 0.0, beta * alpha_n::<f64>(w.n())?)?;
            Ok(SweepRecord {
                sweep_value: i as f64,
                ratio: lhs / rhs,
                numerator: lhs,
                denominator: rhs,
                lower_bound: None,
                grad_norm: w.derivative_energy(&quad)?.powf(1.0 / w.n() as f64),
                config: cfg.snapshot(),
            })
        })
        .collect::<Result<_>>()?;
    let c_hat = records.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let growth = [0.1, 0.5]
        .iter()
        .map(|&eps| {
            let mut fitted = f64::NEG_INFINITY;
            let mut violations = 0;
            let mut analytic = f64::NAN;
            for w in &normalized {
                let n = w.n();
                let np = conjugate::<f64>(n);
                analytic = growth_constant(n, eps);
                let Some(t0) = w.threshold() else { continue };
                let probe = std::iter::once((t0, w.evaluate(t0))).chain(w.nodes().iter().copied().filter(|&(t, _)| t >= t0));
                for (t, v) in probe {
                    let lhs = v.powf(np);
                    let excess = lhs - (1.0 + eps) * (t - t0);
                    fitted = fitted.max(excess);
                    if excess > analytic + 1e-12 * (1.0 + lhs) {
                        violations += 1;
                    }
                }
            }
            GrowthCheck { epsilon: eps, fitted_c: fitted, analytic_c: analytic, violations }
        })
        .collect();
    Ok(Lemma38Probe { beta, records, c_hat, growth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::critical_alpha;
    use crate::profiles::{moser_sequence, random_profile};
    use crate::quadrature::grad_norm;
    use std::f64::consts::PI;

    fn tent() -> RadialProfile<f64> {
        RadialProfile::new(vec![(0.5, 1.0), (1.0, 0.0)]).unwrap()
    }

    #[test]
    fn peel_map_parameters() {
        let id = peel_map(&tent(), 2, 0.0).unwrap();
        assert_eq!((id.radial_exponent, id.amplitude), (1.0, 1.0));
        let v = peel_map(&tent(), 2, 1.0).unwrap();
        assert!((v.amplitude - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(v.radial_exponent, 2.0);
        for rho in [0.1, 0.6, 0.8, 0.95, 1.5] {
            assert_eq!(v.evaluate(rho).unwrap(), v.amplitude * tent().evaluate(rho * rho).unwrap());
        }
        assert!(matches!(peel_map(&tent(), 2, 2.0), Err(Error::WeightIntegrability { .. })));
    }

    #[test]
    fn peel_identities_trivial_at_t_zero() {
        let cfg = ExponentConfig::new(2, 0.0, 0.0, 3.0, 4.0).unwrap();
        let rep = verify_peel_identities(&tent(), &cfg).unwrap();
        assert!(rep.pass);
        assert!(rep.max_rel_err() < 1e-14);
    }

    #[test]
    fn peel_identities_on_moser_profile() {
        let p = moser_sequence::<f64>(2, 1.0, 2).unwrap();
        let cfg = ExponentConfig::new(2, 1.0, 1.0, 2.0, 3.0).unwrap();
        let rep = verify_peel_identities(&p, &cfg).unwrap();
        assert_eq!(rep.identities.len(), 4);
        assert!(rep.pass, "{:?}", rep.failures());
    }

    #[test]
    fn peel_moments_on_tent_in_three_dimensions() {
        let cfg = ExponentConfig::new(3, 0.0, 1.5, 4.0, 2.0).unwrap();
        let rep = verify_peel_identities(&tent(), &cfg).unwrap();
        let ids: Vec<&str> = rep.identities.iter().map(|r| r.id.as_str()).collect();
        assert!(ids.contains(&"moment_4") && ids.contains(&"moment_6"));
        assert!(rep.pass, "{:?}", rep.failures());
    }

    #[test]
    fn jacobian_examples() {
        assert!((jacobian_det(2, 1.0, &[2.0, 0.0]).unwrap() - 8.0).abs() < 1e-14);
        assert!((jacobian_det(3, 1.0, &[1.0, 0.0, 0.0]).unwrap() - 1.5).abs() < 1e-15);
        assert_eq!(jacobian_det(2, 0.0, &[0.3, -0.7]).unwrap(), 1.0);
        assert_eq!(jacobian_det(2, 1.0, &[0.0, 0.0]), Err(Error::Origin));
        assert!(matches!(jacobian_det(2, 2.0, &[1.0, 0.0]), Err(Error::WeightIntegrability { .. })));
        for x in annulus_points(3, 3, 20, 0.2, 2.0) {
            let fd = fd_jacobian_det(3, 1.0, &x).unwrap();
            assert!(rel_err(fd, jacobian_det(3, 1.0, &x).unwrap()) < 1e-8);
        }
    }

    #[test]
    fn determinant_matches_hand_values() {
        assert_eq!(determinant(vec![vec![0.0, 2.0], vec![3.0, 1.0]]), -6.0);
        let d = determinant(vec![vec![2.0, 0.0, 1.0], vec![1.0, 3.0, 2.0], vec![1.0, 1.0, 2.0]]);
        assert!((d - 6.0).abs() < 1e-14);
        assert_eq!(determinant(vec![vec![1.0, 2.0], vec![2.0, 4.0]]), 0.0);
    }

    #[test]
    fn nonradial_bound_holds_off_center() {
        let pts = annulus_points(11, 2, 100, 0.2, 2.0);
        for t in [0.5, 1.0] {
            let rep = verify_nonradial_gradient_bound(2, t, &pts, &[1.0, 0.0]).unwrap();
            assert!(rep.pass, "{:?}", rep.failures());
            assert_eq!(rep.identities.len(), 200);
        }
    }

    #[test]
    fn nonradial_bound_is_tight_for_radial_bumps_and_identity_map() {
        let pts = annulus_points(5, 2, 30, 0.2, 2.0);
        let rep = verify_nonradial_gradient_bound(2, 1.0, &pts, &[0.0, 0.0]).unwrap();
        for r in rep.identities.iter().filter(|r| r.relation == Relation::Le) {
            assert!(r.rel_err < 1e-6, "{r:?}");
        }
        let rep = verify_nonradial_gradient_bound(2, 0.0, &pts, &[0.4, 0.1]).unwrap();
        for r in rep.identities.iter().filter(|r| r.relation == Relation::Le) {
            assert!(r.rel_err < 1e-6, "{r:?}");
        }
        assert_eq!(verify_nonradial_gradient_bound(2, 1.0, &[vec![0.0, 0.0]], &[1.0, 0.0]), Err(Error::Origin));
    }

    #[test]
    fn log_substitution_examples() {
        let w = log_substitution(&tent(), 2).unwrap();
        assert_eq!(w.nodes()[0], (0.0, 0.0));
        let (t, v) = w.nodes()[1];
        assert!((t - 2.0 * 2f64.ln()).abs() < 1e-15);
        assert!((v - (4.0 * PI).sqrt()).abs() < 1e-14);
        let m = log_substitution(&moser_sequence::<f64>(2, 0.0, 3).unwrap(), 2).unwrap();
        assert!(m.nodes().windows(2).all(|c| c[1].1 >= c[0].1));
        assert!(m.check_admissible().is_ok());
        assert_eq!(m.evaluate(-5.0), 0.0);
    }

    #[test]
    fn log_round_trip() {
        let p = random_profile::<f64>(4, 20, 1.0).unwrap();
        let back = log_substitution(&p, 3).unwrap().to_radial().unwrap();
        for (a, b) in p.nodes().iter().zip(back.nodes()) {
            assert!(rel_err(a.0, b.0) < 1e-14 && rel_err(a.1, b.1) < 1e-14);
        }
    }

    #[test]
    fn log_identities() {
        let zero = RadialProfile::new(vec![(1.0, 0.0)]).unwrap();
        let rep = verify_log_identities(&zero, 2, 1.0).unwrap();
        assert!(rep.identities.iter().all(|r| r.lhs == 0.0 && r.rhs == 0.0));
        let rep = verify_log_identities(&moser_sequence::<f64>(2, 0.0, 1).unwrap(), 2, 1.0).unwrap();
        assert!(rep.pass, "{:?}", rep.failures());
        assert!((rep.identities[0].rhs - 1.0).abs() < 1e-7);
        let rep = verify_log_identities(&tent(), 2, 6.0).unwrap();
        assert!(rep.pass, "{:?}", rep.failures());
    }

    #[test]
    fn dilation() {
        let p = random_profile::<f64>(9, 12, 1.0).unwrap();
        assert_eq!(dilate(&p, 1.0).unwrap(), p);
        assert!(matches!(dilate(&p, 0.0), Err(Error::NonpositiveLambda(_))));
        let g = grad_norm(&p, 3).unwrap();
        for lambda in [0.01, 0.5, 3.0, 1e3] {
            let d = dilate(&p, lambda).unwrap();
            assert!(rel_err(grad_norm(&d, 3).unwrap(), g) < 1e-12);
        }
        let r = renormalize(&p, 3, -0.5).unwrap();
        let nrm = crate::quadrature::weighted_norm(&r, 3, 3.0, -0.5).unwrap();
        assert!((nrm - 1.0).abs() < 1e-9);
    }

    #[test]
    fn growth_constant_is_a_supremum() {
        for n in [2usize, 3] {
            for eps in [0.1, 0.5] {
                let c = growth_constant(n, eps);
                let np = n as f64 / (n as f64 - 1.0);
                assert!(c >= 1.0);
                for k in 0..4000 {
                    let s = k as f64 * 0.05;
                    assert!((1.0 + s.powf(1.0 / np)).powf(np) - (1.0 + eps) * s <= c + 1e-12);
                }
            }
        }
        // N = 2: (1+√s)² - (1+ε)s peaks at √s = 1/ε with value 1 + 1/ε
        assert!((growth_constant(2, 0.5) - 3.0).abs() < 1e-9);
    }

    #[test]
    fn lemma_probe_on_seeded_family() {
        let fam: Vec<_> = (0..40).map(|s| random_log_profile(s, 2, 30, 8.0).unwrap()).collect();
        let mut prev = 0.0;
        for beta in [0.5, 0.7, 0.9] {
            let probe = lemma_3_8_inequality_probe(&fam, beta).unwrap();
            assert!(probe.records.iter().all(|r| r.ratio.is_finite() && r.ratio >= 1.0));
            assert!(probe.c_hat >= prev);
            prev = probe.c_hat;
            for g in &probe.growth {
                assert_eq!(g.violations, 0);
                assert!(g.fitted_c <= g.analytic_c + 1e-12);
            }
        }
        let ramp = LogProfile::new(2, vec![(0.0, 0.0), (1.0, 1.0)], LogInterp::Linear).unwrap();
        let probe = lemma_3_8_inequality_probe(&[ramp], 0.5).unwrap();
        assert!(probe.records[0].ratio.is_finite());
        let bad = LogProfile::new(2, vec![(0.0, 0.0), (1.0, 1.0), (2.0, 0.5)], LogInterp::Linear).unwrap();
        assert!(matches!(lemma_3_8_inequality_probe(&[bad], 0.5), Err(Error::InadmissibleLogProfile(_))));
    }

    #[test]
    fn log_threshold() {
        let w = LogProfile::new(2, vec![(0.0f64, 0.0), (2.0, 2.0), (3.0, 4.0)], LogInterp::Linear).unwrap();
        assert!((w.threshold().unwrap() - 1.0).abs() < 1e-14);
        let low = LogProfile::new(2, vec![(0.0, 0.0), (2.0, 0.5)], LogInterp::Linear).unwrap();
        assert_eq!(low.threshold(), None);
    }

    #[test]
    fn report_json_shape() {
        let cfg = ExponentConfig::standard(2, 0.0, 0.5, critical_alpha::<f64>(2, 0.5).unwrap() * 0.5).unwrap();
        let rep = verify_peel_identities(&tent(), &cfg).unwrap();
        let v: serde_json::Value = serde_json::from_str(&rep.to_json()).unwrap();
        assert!(v["pass"].as_bool().unwrap());
        assert_eq!(v["tol"], 1e-7);
        let first = &v["identities"][0];
        assert_eq!(first.as_object().unwrap().len(), 4);
        assert_eq!(first["id"], "norm");
    }
}
