//! Parameter regime, dimensional constants and critical exponential coefficients.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

/// `Γ(m/2)` for a positive integer `m`, by the exact integer/half-integer recurrence.
pub fn gamma_half<S: Scalar>(m: usize) -> S {
    assert!(m >= 1, "gamma_half needs m >= 1");
    let (mut value, mut x) = if m.is_multiple_of(2) {
        (S::one(), S::one())
    } else {
        (S::PI().sqrt(), lit(0.5))
    };
    let target = S::from_usize_lossy(m) / lit(2.0);
    while x < target {
        value = value * x;
        x = x + S::one();
    }
    value
}

/// Surface measure `ω_{N-1} = 2π^{N/2} / Γ(N/2)` of the unit sphere in `R^N`.
pub fn sphere_area<S: Scalar>(n: usize) -> Result<S> {
    if n < 2 {
        return Err(Error::DimensionTooSmall(n));
    }
    let half_n = S::from_usize_lossy(n) / lit(2.0);
    Ok(lit::<S>(2.0) * S::PI().powf(half_n) / gamma_half::<S>(n))
}

/// Volume of the unit ball, `π^{N/2} / Γ(N/2 + 1)`.
pub fn ball_volume<S: Scalar>(n: usize) -> Result<S> {
    if n < 2 {
        return Err(Error::DimensionTooSmall(n));
    }
    let half_n = S::from_usize_lossy(n) / lit(2.0);
    Ok(S::PI().powf(half_n) / gamma_half::<S>(n + 2))
}

/// Critical coefficient `α_{N,t} = (N - t) ω_{N-1}^{1/(N-1)}`.
pub fn critical_alpha<S: Scalar>(n: usize, t: S) -> Result<S> {
    let omega = sphere_area::<S>(n)?;
    let nn = S::from_usize_lossy(n);
    if t >= nn {
        return Err(Error::WeightIntegrability { weight: t.to_f64_lossy(), n });
    }
    Ok((nn - t) * omega.powf(S::one() / (nn - S::one())))
}

/// Unweighted critical coefficient `α_N = N ω_{N-1}^{1/(N-1)}`.
pub fn alpha_n<S: Scalar>(n: usize) -> Result<S> {
    critical_alpha(n, S::zero())
}

/// Hölder conjugate `N' = N / (N - 1)`.
pub fn conjugate<S: Scalar>(n: usize) -> S {
    let nn = S::from_usize_lossy(n);
    nn / (nn - S::one())
}

/// Validated exponent tuple `(N, s, t, q, α)` with its derived constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentConfig<S> {
    n: usize,
    s: S,
    t: S,
    q: S,
    alpha: S,
    nprime: S,
    omega: S,
    alpha_crit: S,
}

impl<S: Scalar> ExponentConfig<S> {
    /// Validates `N >= 2`, `s <= t < N`, `q >= N` and `α > 0`.
    ///
    /// Supercritical `α` is accepted; see [`ExponentConfig::is_subcritical`].
    pub fn new(n: usize, s: S, t: S, q: S, alpha: S) -> Result<Self> {
        if n < 2 {
            return Err(Error::DimensionTooSmall(n));
        }
        let nn = S::from_usize_lossy(n);
        if s > t {
            return Err(Error::WeightOrder { s: s.to_f64_lossy(), t: t.to_f64_lossy() });
        }
        if t >= nn {
            return Err(Error::WeightIntegrability { weight: t.to_f64_lossy(), n });
        }
        if !(q >= nn) {
            return Err(Error::Power(format!("q = {} must be >= N = {n}", q.to_f64_lossy())));
        }
        if !(alpha > S::zero()) {
            return Err(Error::NonpositiveAlpha(alpha.to_f64_lossy()));
        }
        let omega = sphere_area::<S>(n)?;
        let alpha_crit = (nn - t) * omega.powf(S::one() / (nn - S::one()));
        Ok(Self { n, s, t, q, alpha, nprime: conjugate(n), omega, alpha_crit })
    }

    /// Config with the default power `q = N`.
    pub fn standard(n: usize, s: S, t: S, alpha: S) -> Result<Self> {
        Self::new(n, s, t, S::from_usize_lossy(n), alpha)
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn n_real(&self) -> S {
        S::from_usize_lossy(self.n)
    }
    pub fn s(&self) -> S {
        self.s
    }
    pub fn t(&self) -> S {
        self.t
    }
    pub fn q(&self) -> S {
        self.q
    }
    pub fn alpha(&self) -> S {
        self.alpha
    }
    pub fn nprime(&self) -> S {
        self.nprime
    }
    pub fn omega(&self) -> S {
        self.omega
    }
    pub fn alpha_crit(&self) -> S {
        self.alpha_crit
    }

    /// `α < α_{N,t}`; the borderline `α = α_{N,t}` counts as supercritical.
    pub fn is_subcritical(&self) -> bool {
        self.alpha < self.alpha_crit
    }

    /// Same exponents with a different coefficient.
    pub fn with_alpha(&self, alpha: S) -> Result<Self> {
        Self::new(self.n, self.s, self.t, self.q, alpha)
    }

    pub fn with_q(&self, q: S) -> Result<Self> {
        Self::new(self.n, self.s, self.t, q, self.alpha)
    }

    /// Flat `key=value` record of the primary keys; derived constants are never written.
    pub fn to_kv_string(&self) -> String {
        format!(
            "N={}\ns={}\nt={}\nq={}\nalpha={}\n",
            self.n,
            self.s.to_f64_lossy(),
            self.t.to_f64_lossy(),
            self.q.to_f64_lossy(),
            self.alpha.to_f64_lossy()
        )
    }

    /// Parses a record written by [`ExponentConfig::to_kv_string`]. `q` defaults to `N`.
    pub fn from_kv_str(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", lineno + 1)))?;
            let key = k.trim();
            if !["N", "s", "t", "q", "alpha"].contains(&key) {
                return Err(Error::Config(format!("unknown key `{key}`")));
            }
            map.insert(key.to_string(), v.trim().to_string());
        }
        let get = |k: &str| -> Result<Option<f64>> {
            map.get(k)
                .map(|v| v.parse::<f64>().map_err(|_| Error::Config(format!("bad value for {k}: `{v}`"))))
                .transpose()
        };
        let n: usize = map
            .get("N")
            .ok_or_else(|| Error::Config("missing key N".into()))?
            .parse()
            .map_err(|_| Error::Config("N must be an integer".into()))?;
        let s = get("s")?.unwrap_or(0.0);
        let t = get("t")?.unwrap_or(0.0);
        let q = get("q")?.unwrap_or(n as f64);
        let alpha = get("alpha")?.ok_or_else(|| Error::Config("missing key alpha".into()))?;
        Self::new(n, lit(s), lit(t), lit(q), lit(alpha))
    }

    pub fn snapshot(&self) -> ConfigSnapshot {
        ConfigSnapshot {
            n: self.n,
            s: self.s.to_f64_lossy(),
            t: self.t.to_f64_lossy(),
            q: self.q.to_f64_lossy(),
            alpha: self.alpha.to_f64_lossy(),
        }
    }
}

/// Serializable copy of the primary keys, used inside experiment records.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfigSnapshot {
    #[serde(rename = "N")]
    pub n: usize,
    pub s: f64,
    pub t: f64,
    pub q: f64,
    pub alpha: f64,
}
