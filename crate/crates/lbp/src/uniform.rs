use std::fmt;

use crate::bounds::{FIXED_POINT_CAP, FIXED_POINT_TOL};
use crate::error::{Error, Result};
use crate::scalar::{log_contraction, Scalar};

/// Binary model where every node has `k + 1` neighbors, uniform node potentials and pairwise
/// potential `[[a, b], [b, a]]`. All messages stay equal under synchronous updates from equal
/// starts, so the dynamics reduce to `x ← F(x)` on the first message entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformModel<F> {
    pub a: F,
    pub b: F,
    /// Incoming messages per update, i.e. degree − 1.
    pub k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Paramagnetic,
    Ferromagnetic,
    AntiFerromagnetic,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Paramagnetic => "paramagnetic",
            Regime::Ferromagnetic => "ferromagnetic",
            Regime::AntiFerromagnetic => "anti-ferromagnetic",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPoint<F> {
    pub x: F,
    pub derivative: F,
    /// `|F'(x)| < 1`; for a period-2 pair `{x, 1−x}` this is also the stability of the orbit.
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointSet<F> {
    /// Solutions of `x = F(x)`, ascending.
    pub fixed: Vec<FixedPoint<F>>,
    /// Solutions of `1 − x = F(x)` other than 1/2, ascending.
    pub quasi_fixed: Vec<FixedPoint<F>>,
    pub regime: Regime,
}

/// Grid size of the root scan on `(0, 1/2)`.
pub const ROOT_SCAN_POINTS: usize = 10_000;

impl<F: Scalar> UniformModel<F> {
    pub fn new(a: F, b: F, k: usize) -> Result<Self> {
        if !(a > F::zero() && b > F::zero()) || k == 0 {
            return Err(Error::Domain(format!("need a, b > 0 and k >= 1 (a = {a}, b = {b}, k = {k})")));
        }
        Ok(Self { a, b, k })
    }

    /// Potentials `[[η, 1−η], [1−η, η]]` on a graph of uniform `degree`.
    pub fn from_eta(eta: F, degree: usize) -> Result<Self> {
        if degree < 2 {
            return Err(Error::Domain("degree must be at least 2".into()));
        }
        Self::new(eta, F::one() - eta, degree - 1)
    }

    fn powk(&self, x: F) -> F {
        x.powi(self.k as i32)
    }

    /// `F(x) = (a x^k + b (1−x)^k) / ((a+b)(x^k + (1−x)^k))`.
    pub fn update(&self, x: F) -> F {
        let (u, v) = (self.powk(x), self.powk(F::one() - x));
        (self.a * u + self.b * v) / ((self.a + self.b) * (u + v))
    }

    pub fn derivative(&self, x: F) -> F {
        let k = self.k as i32;
        let y = F::one() - x;
        let s = self.powk(x) + self.powk(y);
        (self.a - self.b) * F::lit(self.k as f64) * x.powi(k - 1) * y.powi(k - 1) / ((self.a + self.b) * s * s)
    }

    /// `F'(1/2) = k(a−b)/(a+b)`.
    pub fn slope_at_half(&self) -> F {
        F::lit(self.k as f64) * (self.a - self.b) / (self.a + self.b)
    }

    pub fn regime(&self) -> Regime {
        let s = self.slope_at_half();
        if s > F::one() {
            Regime::Ferromagnetic
        } else if s < -F::one() {
            Regime::AntiFerromagnetic
        } else {
            Regime::Paramagnetic
        }
    }

    fn point(&self, x: F) -> FixedPoint<F> {
        let derivative = self.derivative(x);
        FixedPoint { x, derivative, stable: derivative.abs() < F::one() }
    }

    /// Roots in `(0, 1/2)` of `g`, which vanishes at 1/2 with slope `g_half`.
    fn roots_below_half(&self, g: impl Fn(F) -> F, g_half: F, tol: F) -> Vec<F> {
        let half = F::lit(0.5);
        let n = ROOT_SCAN_POINTS;
        let at = |i: usize| half * F::lit(i as f64) / F::lit(n as f64);
        let mut roots = Vec::new();
        let mut prev = (at(1), g(at(1)));
        for i in 2..=n {
            let x = at(i);
            // just left of 1/2, g has the sign of -g'(1/2)
            let gx = if i == n { -g_half } else { g(x) };
            if gx == F::zero() && i < n {
                roots.push(x);
            } else if prev.1 != F::zero() && (prev.1 < F::zero()) != (gx < F::zero()) && gx != F::zero() {
                let (mut lo, mut hi) = (prev.0, x);
                let neg_lo = prev.1 < F::zero();
                while hi - lo > tol {
                    let mid = (lo + hi) / F::lit(2.0);
                    if (g(mid) < F::zero()) == neg_lo {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if mid == lo && mid == hi {
                        break;
                    }
                }
                roots.push((lo + hi) / F::lit(2.0));
            }
            prev = (x, gx);
        }
        roots
    }

    /// All fixed points and period-2 points, found by sign scan and bisection to `tol`.
    pub fn fixed_points(&self, tol: F) -> FixedPointSet<F> {
        let half = F::lit(0.5);
        let slope = self.slope_at_half();
        let mut fixed: Vec<F> = self.roots_below_half(|x| x - self.update(x), F::one() - slope, tol);
        let mut quasi: Vec<F> = self.roots_below_half(|x| F::one() - x - self.update(x), -F::one() - slope, tol);
        let mirror = |v: &mut Vec<F>, with_half: bool| {
            let lows = v.clone();
            if with_half {
                v.push(half);
            }
            v.extend(lows.iter().rev().map(|&x| F::one() - x));
        };
        mirror(&mut fixed, true);
        mirror(&mut quasi, false);
        FixedPointSet {
            fixed: fixed.into_iter().map(|x| self.point(x)).collect(),
            quasi_fixed: quasi.into_iter().map(|x| self.point(x)).collect(),
            regime: self.regime(),
        }
    }

    /// Change of the log error after one update, for a fixed-point product `m` (first state)
    /// whose first entry is multiplied by `E = exp(log_e)`, `1 ≤ E < 1/m`, `a > b`.
    pub fn true_error_variation(&self, m: F, log_e: F) -> Result<F> {
        if !(self.a > self.b) {
            return Err(Error::Domain("the error variation needs a > b".into()));
        }
        if !(m > F::zero() && m < F::one()) {
            return Err(Error::Domain(format!("product m = {m} must lie in (0, 1)")));
        }
        if !(log_e >= F::zero() && log_e < -m.ln()) {
            return Err(Error::Domain(format!("log E = {log_e} must lie in [0, {})", -m.ln())));
        }
        let k = F::lit(self.k as f64);
        let (a, b) = (self.a, self.b);
        let me = m * log_e.exp();
        let mix = |p: F| ((a * p + b * (F::one() - p)).ln(), (b * p + a * (F::one() - p)).ln());
        let (p0, q0) = mix(m);
        let (p1, q1) = mix(me);
        let log_sum = |x: F, y: F| {
            let hi = x.max(y);
            hi + ((x - hi).exp() + (y - hi).exp()).ln()
        };
        Ok(k * p1 - k * p0 + log_sum(k * p0, k * q0) - log_sum(k * p1, k * q1) - log_e)
    }

    /// Nonzero roots of [`Self::true_error_variation`] on its domain, ascending.
    pub fn error_variation_crossings(&self, m: F, tol: F) -> Result<Vec<F>> {
        let top = -m.ln();
        let n = ROOT_SCAN_POINTS;
        let at = |i: usize| top * F::lit(i as f64) / F::lit(n as f64);
        let g = |z: F| self.true_error_variation(m, z);
        let mut out = Vec::new();
        let mut prev = (at(1), g(at(1))?);
        for i in 2..n {
            let x = at(i);
            let gx = g(x)?;
            if (prev.1 < F::zero()) != (gx < F::zero()) {
                let (mut lo, mut hi) = (prev.0, x);
                let neg_lo = prev.1 < F::zero();
                while hi - lo > tol {
                    let mid = (lo + hi) / F::lit(2.0);
                    if mid == lo || mid == hi {
                        break;
                    }
                    if (g(mid)? < F::zero()) == neg_lo {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                out.push((lo + hi) / F::lit(2.0));
            }
            prev = (x, gx);
        }
        Ok(out)
    }

    /// `(log E, G(log E))` samples over the domain, excluding its open end.
    pub fn error_variation_curve(&self, m: F, points: usize) -> Result<Vec<(F, F)>> {
        let top = -m.ln();
        (0..points)
            .map(|i| {
                let z = top * F::lit(i as f64) / F::lit(points as f64);
                Ok((z, self.true_error_variation(m, z)?))
            })
            .collect()
    }
}

/// Normalized product of `count` copies of the message `[x, 1−x]`, first entry.
pub fn message_product<F: Scalar>(x: F, count: usize) -> F {
    let (u, v) = (x.powi(count as i32), (F::one() - x).powi(count as i32));
    u / (u + v)
}

/// Log ε of the completely uniform dynamic-range recursion `z ← k·ln((d²e^z+1)/(d²+e^z))`.
pub fn completely_uniform_log_epsilon<F: Scalar>(d_pair: F, degree: usize) -> Result<F> {
    if !(d_pair >= F::one()) || degree < 2 {
        return Err(Error::Domain(format!("need d >= 1 and degree >= 2 (d = {d_pair}, degree = {degree})")));
    }
    let d2 = d_pair * d_pair;
    let k = F::lit((degree - 1) as f64);
    if k * (d2 - F::one()) / (d2 + F::one()) <= F::one() {
        return Ok(F::zero());
    }
    let mut z = k * d2.ln();
    for _ in 0..FIXED_POINT_CAP {
        let next = k * log_contraction(d2, z);
        let done = (next - z).abs() < F::lit(FIXED_POINT_TOL);
        z = next;
        if done {
            break;
        }
    }
    Ok(z)
}

/// Belief distance bound for completely uniform binary graphs: `degree·ln((d²ε+1)/(d²+ε))`.
pub fn udb_completely_uniform<F: Scalar>(d_pair: F, degree: usize) -> Result<F> {
    let z = completely_uniform_log_epsilon(d_pair, degree)?;
    Ok(F::lit(degree as f64) * log_contraction(d_pair * d_pair, z))
}
