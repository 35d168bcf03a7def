//! Radial integrals with power-law weights, the truncated exponential `Φ_N`, and the
//! integrals every functional is assembled from.
//!
//! All integrals reduce to `ω_{N-1} ∫_0^∞ f(ũ(r)) r^{N-1-w} dr`. The innermost cell
//! `[0, r_0]` carries a constant profile value and is integrated in closed form; every
//! other cell is integrated by Gauss–Legendre with adaptive bisection.

use crate::error::{Error, Result};
use crate::exponents::{sphere_area, ExponentConfig};
use crate::profiles::RadialShape;
use crate::scalar::{lit, Scalar};

/// Tolerance keys `quad.rel_tol`, `quad.gauss_order`, `quad.max_depth`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSettings<S> {
    pub rel_tol: S,
    pub gauss_order: usize,
    pub max_depth: usize,
}

impl<S: Scalar> Default for QuadSettings<S> {
    fn default() -> Self {
        Self { rel_tol: lit(1e-9), gauss_order: 16, max_depth: 12 }
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule<S> {
    pub nodes: Vec<S>,
    pub weights: Vec<S>,
}

impl<S: Scalar> GaussRule<S> {
    /// Newton iteration on `P_n` from the Chebyshev-type initial guesses.
    pub fn legendre(order: usize) -> Self {
        assert!(order >= 1, "Gauss order must be positive");
        let n = order;
        let nn = S::from_usize_lossy(n);
        let mut nodes = vec![S::zero(); n];
        let mut weights = vec![S::zero(); n];
        for i in 0..n.div_ceil(2) {
            let ii = S::from_usize_lossy(i);
            let mut x = (S::PI() * (ii + lit(0.75)) / (nn + lit(0.5))).cos();
            let mut dp = S::one();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x = x - dx;
                if dx.abs() <= S::epsilon() * lit(4.0) {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = lit::<S>(2.0) / ((S::one() - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = S::zero();
        }
        Self { nodes, weights }
    }

    /// `∫_a^b g`.
    #[inline]
    pub fn integrate<F: Fn(S) -> S>(&self, g: &F, a: S, b: S) -> S {
        let half = (b - a) / lit(2.0);
        let mid = (a + b) / lit(2.0);
        let mut acc = S::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + *w * g(mid + half * *x);
        }
        acc * half
    }
}

fn legendre_with_derivative<S: Scalar>(n: usize, x: S) -> (S, S) {
    let mut p0 = S::one();
    let mut p1 = x;
    for k in 2..=n {
        let kk = S::from_usize_lossy(k);
        let p2 = ((lit::<S>(2.0) * kk - S::one()) * x * p1 - (kk - S::one()) * p0) / kk;
        p0 = p1;
        p1 = p2;
    }
    let nn = S::from_usize_lossy(n);
    let d = nn * (x * p1 - p0) / (x * x - S::one());
    (p1, d)
}

/// Quadrature engine: settings plus the precomputed Gauss rule.
#[derive(Debug, Clone)]
pub struct Quadrature<S> {
    settings: QuadSettings<S>,
    rule: GaussRule<S>,
}

impl<S: Scalar> Default for Quadrature<S> {
    fn default() -> Self {
        Self::new(QuadSettings::default())
    }
}

impl<S: Scalar> Quadrature<S> {
    pub fn new(settings: QuadSettings<S>) -> Self {
        Self { rule: GaussRule::legendre(settings.gauss_order), settings }
    }

    pub fn settings(&self) -> &QuadSettings<S> {
        &self.settings
    }

    pub fn rule(&self) -> &GaussRule<S> {
        &self.rule
    }

    /// `∫_a^b g` refined by bisection until successive estimates agree to `rel_tol`.
    pub fn adaptive<F: Fn(S) -> S>(&self, g: &F, a: S, b: S) -> Result<S> {
        let whole = self.rule.integrate(g, a, b);
        self.refine(g, a, b, whole, 0)
    }

    fn refine<F: Fn(S) -> S>(&self, g: &F, a: S, b: S, whole: S, depth: usize) -> Result<S> {
        let mid = (a + b) / lit(2.0);
        let left = self.rule.integrate(g, a, mid);
        let right = self.rule.integrate(g, mid, b);
        let both = left + right;
        if (both - whole).abs() <= self.settings.rel_tol * both.abs() + S::min_positive_value().sqrt() {
            return Ok(both);
        }
        if depth >= self.settings.max_depth || !(mid > a && mid < b) {
            return Err(Error::NonConvergentRefinement {
                rel_tol: self.settings.rel_tol.to_f64_lossy(),
                max_depth: self.settings.max_depth,
                lo: a.to_f64_lossy(),
                hi: b.to_f64_lossy(),
            });
        }
        Ok(self.refine(g, a, mid, left, depth + 1)? + self.refine(g, mid, b, right, depth + 1)?)
    }

    /// `ω_{N-1} ∫_0^∞ f(u(ρ)) ρ^{N-1-w} dρ` for an integrand with `f(0) = 0`.
    pub fn radial_integral<P, F>(&self, p: &P, n: usize, weight: S, f: F) -> Result<S>
    where
        P: RadialShape<S> + ?Sized,
        F: Fn(S) -> S,
    {
        let omega = sphere_area::<S>(n)?;
        let nn = S::from_usize_lossy(n);
        let decay = nn - weight;
        if !(decay > S::zero()) {
            return Err(Error::WeightIntegrability { weight: weight.to_f64_lossy(), n });
        }
        let base = p.base();
        let gamma = p.radial_exponent();
        let amp = p.amplitude();
        let identity_map = gamma == S::one();
        let inv_gamma = gamma.recip();
        let to_eval = |r: S| if identity_map { r } else { r.powf(inv_gamma) };
        let power = decay - S::one();

        let nodes = base.nodes();
        let (r0, v0) = nodes[0];
        let plateau_edge = to_eval(r0);
        let mut total = f(amp * v0) * plateau_edge.powf(decay) / decay;

        for cell in nodes.windows(2) {
            let (ra, va) = cell[0];
            let (rb, vb) = cell[1];
            if va == S::zero() && vb == S::zero() {
                continue;
            }
            let slope = (vb - va) / (rb - ra);
            let g = |rho: S| {
                let r = if identity_map { rho } else { rho.powf(gamma) };
                f(amp * (va + slope * (r - ra))) * rho.powf(power)
            };
            let (lo, hi) = (to_eval(ra), to_eval(rb));
            if va * vb < S::zero() {
                let root = to_eval(ra + va / (va - vb) * (rb - ra));
                total = total + self.adaptive(&g, lo, root)? + self.adaptive(&g, root, hi)?;
            } else {
                total = total + self.adaptive(&g, lo, hi)?;
            }
        }
        Ok(omega * total)
    }

    /// `(ω_{N-1} ∫ |ũ|^p r^{N-1-w} dr)^{1/p}`.
    pub fn weighted_norm<P>(&self, p: &P, n: usize, power: S, weight: S) -> Result<S>
    where
        P: RadialShape<S> + ?Sized,
    {
        if !(power >= S::one()) {
            return Err(Error::Power(format!("norm power {} must be >= 1", power.to_f64_lossy())));
        }
        let integral = self.radial_integral(p, n, weight, |u| u.abs().powf(power))?;
        Ok(integral.powf(power.recip()))
    }

    /// `∫ |∇u|^N dx`. Closed form per cell for plain profiles; chain rule under Gauss
    /// quadrature for reparameterized ones.
    pub fn grad_integral<P>(&self, p: &P, n: usize) -> Result<S>
    where
        P: RadialShape<S> + ?Sized,
    {
        let omega = sphere_area::<S>(n)?;
        let nn = S::from_usize_lossy(n);
        let base = p.base();
        let gamma = p.radial_exponent();
        let amp = p.amplitude().abs();
        let mut total = S::zero();
        if gamma == S::one() {
            for cell in base.nodes().windows(2) {
                let (ra, va) = cell[0];
                let (rb, vb) = cell[1];
                let slope = (vb - va).abs() / (rb - ra);
                if slope == S::zero() {
                    continue;
                }
                total = total + slope.powf(nn) * (rb.powf(nn) - ra.powf(nn)) / nn;
            }
            return Ok(omega * amp.powf(nn) * total);
        }
        let inv_gamma = gamma.recip();
        for cell in base.nodes().windows(2) {
            let (ra, va) = cell[0];
            let (rb, vb) = cell[1];
            let slope = (vb - va).abs() / (rb - ra);
            if slope == S::zero() {
                continue;
            }
            let g = |rho: S| (amp * slope * gamma * rho.powf(gamma - S::one())).powf(nn) * rho.powf(nn - S::one());
            total = total + self.adaptive(&g, ra.powf(inv_gamma), rb.powf(inv_gamma))?;
        }
        Ok(omega * total)
    }

    /// `∥∇u∥_{L^N}`.
    pub fn grad_norm<P>(&self, p: &P, n: usize) -> Result<S>
    where
        P: RadialShape<S> + ?Sized,
    {
        Ok(self.grad_integral(p, n)?.powf(S::from_usize_lossy(n).recip()))
    }

    /// `ω_{N-1} ∫ e^{α|ũ|^{N'}} |ũ|^p r^{N-1-w} dr`.
    pub fn exp_functional<P>(&self, p: &P, cfg: &ExponentConfig<S>, power: S, weight: S) -> Result<S>
    where
        P: RadialShape<S> + ?Sized,
    {
        self.exp_integral(p, cfg.n(), cfg.alpha(), power, weight)
    }

    /// Same as [`Quadrature::exp_functional`] with an explicit coefficient.
    pub fn exp_integral<P>(&self, p: &P, n: usize, coef: S, power: S, weight: S) -> Result<S>
    where
        P: RadialShape<S> + ?Sized,
    {
        let nprime = crate::exponents::conjugate::<S>(n);
        self.radial_integral(p, n, weight, |u| {
            let a = u.abs();
            (coef * a.powf(nprime)).exp() * a.powf(power)
        })
    }

    /// `ω_{N-1} ∫ Φ_N(α|ũ|^{N'}) r^{N-1-w} dr`.
    pub fn phi_functional<P>(&self, p: &P, cfg: &ExponentConfig<S>, weight: S) -> Result<S>
    where
        P: RadialShape<S> + ?Sized,
    {
        self.phi_integral(p, cfg.n(), cfg.alpha(), weight)
    }

    /// Same as [`Quadrature::phi_functional`] with an explicit coefficient.
    pub fn phi_integral<P>(&self, p: &P, n: usize, coef: S, weight: S) -> Result<S>
    where
        P: RadialShape<S> + ?Sized,
    {
        let nprime = crate::exponents::conjugate::<S>(n);
        self.radial_integral(p, n, weight, |u| phi_tail(n - 1, coef * u.abs().powf(nprime)))
    }
}

/// `Σ_{j ≥ m} x^j / j!` for `x >= 0` (`m = 0` gives `e^x`).
///
/// Power series below `x = m + 1`, `e^x` minus the partial sum above.
pub fn phi_tail<S: Scalar>(m: usize, x: S) -> S {
    if m == 0 {
        return x.exp();
    }
    if x == S::zero() {
        return S::zero();
    }
    if x < S::from_usize_lossy(m + 1) {
        let mut term = S::one();
        for j in 1..=m {
            term = term * x / S::from_usize_lossy(j);
        }
        let mut sum = term;
        let cutoff = lit::<S>(1e-17);
        let mut j = m;
        loop {
            j += 1;
            term = term * x / S::from_usize_lossy(j);
            sum = sum + term;
            if term <= cutoff * sum || j > m + 400 {
                break;
            }
        }
        sum
    } else {
        let mut partial = S::zero();
        let mut term = S::one();
        for j in 0..m {
            if j > 0 {
                term = term * x / S::from_usize_lossy(j);
            }
            partial = partial + term;
        }
        x.exp() - partial
    }
}

/// `Φ_N(x) = Σ_{j ≥ N-1} x^j / j!`.
pub fn phi_n<S: Scalar>(n: usize, x: S) -> Result<S> {
    if n < 2 {
        return Err(Error::DimensionTooSmall(n));
    }
    if x < S::zero() || x.is_nan() {
        return Err(Error::NegativeArgument(x.to_f64_lossy()));
    }
    Ok(phi_tail(n - 1, x))
}

/// [`Quadrature::weighted_norm`] with default settings.
pub fn weighted_norm<S: Scalar, P: RadialShape<S> + ?Sized>(p: &P, n: usize, power: S, weight: S) -> Result<S> {
    Quadrature::default().weighted_norm(p, n, power, weight)
}

/// [`Quadrature::grad_norm`] with default settings.
pub fn grad_norm<S: Scalar, P: RadialShape<S> + ?Sized>(p: &P, n: usize) -> Result<S> {
    Quadrature::default().grad_norm(p, n)
}

/// [`Quadrature::exp_functional`] with default settings.
pub fn exp_functional<S: Scalar, P: RadialShape<S> + ?Sized>(
    p: &P,
    cfg: &ExponentConfig<S>,
    power: S,
    weight: S,
) -> Result<S> {
    Quadrature::default().exp_functional(p, cfg, power, weight)
}

/// [`Quadrature::phi_functional`] with default settings.
pub fn phi_functional<S: Scalar, P: RadialShape<S> + ?Sized>(p: &P, cfg: &ExponentConfig<S>, weight: S) -> Result<S> {
    Quadrature::default().phi_functional(p, cfg, weight)
}
