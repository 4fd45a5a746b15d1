//! Adaptive Gauss–Legendre quadrature with inverse-square-root endpoint
//! singularities removed by substitution, cumulative integral tables on a
//! fixed knot mesh, and bracketed monotone inversion.
//!
//! All three profile integrands handled by this crate behave like
//! C * (distance to the singular end)^(-1/2), so a single substitution
//! x = end ± s^2 turns every one of them into a smooth integrand. Panels are
//! Gauss–Legendre, which never evaluates at panel endpoints, so the (removed)
//! singular point is never touched.

use crate::error::{Error, Result};

/// Exponent class of every supported endpoint singularity.
pub const SINGULAR_EXPONENT: f64 = -0.5;

const GL_POINTS: usize = 15;

/// Which end of the interval carries the integrable singularity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SingularEnd {
    Lower,
    Upper,
    None,
}

/// Tolerance and refinement budget for the adaptive integrator.
#[derive(Clone, Copy, Debug)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub max_refinements: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            abs_tol: 1e-10,
            max_refinements: 48,
        }
    }
}

impl Quadrature {
    pub fn with_tol(abs_tol: f64) -> Self {
        assert!(abs_tol > 0.0, "abs_tol must be positive");
        Quadrature {
            abs_tol,
            ..Default::default()
        }
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1], generated once by Newton
/// iteration on the Legendre polynomial so no table has to be transcribed.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for k in 0..n {
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // evaluate P_n and P_n' by the three-term recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for m in 2..=n {
                let m = m as f64;
                let p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let mut p0 = 1.0;
        let mut p1 = x;
        for m in 2..=n {
            let m = m as f64;
            let p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        nodes[k] = x;
        weights[k] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn gl_rule() -> &'static (Vec<f64>, Vec<f64>) {
    use std::sync::OnceLock;
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(GL_POINTS))
}

fn gl_panel<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> f64 {
    let (nodes, weights) = gl_rule();
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    tol: f64,
    depth: usize,
) -> Result<f64> {
    let whole = gl_panel(f, lo, hi);
    adaptive_rec(f, lo, hi, whole, tol, depth)
}

fn adaptive_rec<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> Result<f64> {
    let mid = 0.5 * (lo + hi);
    let left = gl_panel(f, lo, mid);
    let right = gl_panel(f, mid, hi);
    let refined = left + right;
    let err = (refined - whole).abs();
    // an absolute tolerance below a few ulp of the value is unreachable;
    // floor it at machine-relative accuracy
    let floor = 4.0 * f64::EPSILON * refined.abs();
    if err <= tol.max(floor) && refined.is_finite() {
        return Ok(refined);
    }
    if depth == 0 {
        return Err(Error::QuadratureFailure {
            tol,
            prev: whole,
            last: refined,
        });
    }
    let l = adaptive_rec(f, lo, mid, left, 0.5 * tol, depth - 1)?;
    let r = adaptive_rec(f, mid, hi, right, 0.5 * tol, depth - 1)?;
    Ok(l + r)
}

/// Improper integral of `f` over [a, b] where `f` may blow up like
/// (distance)^(-1/2) at the declared end. The substitution x = end ± s^2
/// removes the singularity; the smooth result is integrated adaptively to
/// `q.abs_tol`.
pub fn integrate_singular<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    end: SingularEnd,
    q: &Quadrature,
) -> Result<f64> {
    assert!(a.is_finite() && b.is_finite() && a <= b, "bad interval");
    if a == b {
        return Ok(0.0);
    }
    let depth = q.max_refinements;
    match end {
        SingularEnd::None => adaptive(&f, a, b, q.abs_tol, depth),
        SingularEnd::Lower => {
            let g = |s: f64| 2.0 * s * f(a + s * s);
            adaptive(&g, 0.0, (b - a).sqrt(), q.abs_tol, depth)
        }
        SingularEnd::Upper => {
            let g = |s: f64| 2.0 * s * f(b - s * s);
            adaptive(&g, 0.0, (b - a).sqrt(), q.abs_tol, depth)
        }
    }
}

/// Solve F(t) = y for a strictly increasing F on the bracket. Bisection is
/// the backbone; when the bracket straddles, the result satisfies
/// |F(t) - y| <= tol (or the bracket has collapsed to rounding width).
pub fn invert_monotone<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    y: f64,
    bracket: (f64, f64),
    tol: f64,
) -> Result<f64> {
    let (mut lo, mut hi) = bracket;
    let flo = f(lo)?;
    let fhi = f(hi)?;
    if !(flo <= y && y <= fhi) {
        return Err(Error::Bracket {
            lo: flo,
            hi: fhi,
            target: y,
        });
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if (fm - y).abs() <= tol {
            return Ok(mid);
        }
        if fm < y {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * mid.abs().max(1.0) {
            break;
        }
    }
    let resid = (f(mid)? - y).abs();
    if resid <= tol {
        Ok(mid)
    } else {
        Err(Error::InversionFailure {
            t: mid,
            residual: resid,
            tol,
        })
    }
}

/// Cumulative antiderivative table F(t) = ∫_{t0}^{t} q(x) dx on a fixed knot
/// mesh, with exact (quadrature-backed) evaluation between knots and
/// derivative-polished inversion. The integrand must be positive, so F is
/// strictly increasing and invertible.
pub struct IntegralTable {
    knots: Vec<f64>,
    values: Vec<f64>,
    quad: Quadrature,
    singular_start: bool,
    integrand: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl IntegralTable {
    pub fn build(
        integrand: Box<dyn Fn(f64) -> f64 + Send + Sync>,
        knots: Vec<f64>,
        singular_start: bool,
        quad: Quadrature,
    ) -> Result<Self> {
        assert!(knots.len() >= 2, "need at least two knots");
        assert!(
            knots.windows(2).all(|w| w[0] < w[1]),
            "knots must be strictly increasing"
        );
        let mut values = Vec::with_capacity(knots.len());
        values.push(0.0);
        let mut acc = 0.0;
        for k in 1..knots.len() {
            let end = if k == 1 && singular_start {
                SingularEnd::Lower
            } else {
                SingularEnd::None
            };
            acc += integrate_singular(&integrand, knots[k - 1], knots[k], end, &quad)?;
            values.push(acc);
        }
        Ok(IntegralTable {
            knots,
            values,
            quad,
            singular_start,
            integrand,
        })
    }

    pub fn t_min(&self) -> f64 {
        self.knots[0]
    }

    pub fn t_max(&self) -> f64 {
        *self.knots.last().unwrap()
    }

    pub fn max_value(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// F(t) for t inside the tabulated range.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if t < self.t_min() || t > self.t_max() {
            return Err(Error::OutOfTable {
                t,
                lo: self.t_min(),
                hi: self.t_max(),
            });
        }
        // segment with knots[k] <= t
        let k = match self.knots.binary_search_by(|a| a.partial_cmp(&t).unwrap()) {
            Ok(exact) => return Ok(self.values[exact]),
            Err(0) => 0,
            Err(p) => p - 1,
        };
        let end = if k == 0 && self.singular_start {
            SingularEnd::Lower
        } else {
            SingularEnd::None
        };
        let seg = integrate_singular(&self.integrand, self.knots[k], t, end, &self.quad)?;
        Ok(self.values[k] + seg)
    }

    /// Solve F(t) = y. Starts from inverse interpolation on the knot values,
    /// then polishes with guarded Newton steps (F' is the integrand); falls
    /// back to bisection whenever a step leaves the bracket.
    pub fn invert(&self, y: f64, ftol: f64) -> Result<f64> {
        if y < -ftol || y > self.max_value() + ftol {
            return Err(Error::Bracket {
                lo: 0.0,
                hi: self.max_value(),
                target: y,
            });
        }
        if y <= 0.0 {
            return Ok(self.t_min());
        }
        let k = self
            .values
            .partition_point(|v| *v < y)
            .min(self.values.len() - 1)
            .max(1)
            - 1;
        let (mut lo, mut hi) = (self.knots[k], self.knots[k + 1]);
        let (vlo, vhi) = (self.values[k], self.values[k + 1]);
        // secant guess inside the segment
        let mut t = if vhi > vlo {
            lo + (hi - lo) * ((y - vlo) / (vhi - vlo)).clamp(0.0, 1.0)
        } else {
            0.5 * (lo + hi)
        };
        for _ in 0..80 {
            let ft = self.eval(t)?;
            if (ft - y).abs() <= ftol {
                return Ok(t);
            }
            if ft < y {
                lo = t;
            } else {
                hi = t;
            }
            let d = (self.integrand)(t);
            let mut next = if d.is_finite() && d > 0.0 {
                t - (ft - y) / d
            } else {
                f64::NAN
            };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if hi - lo <= f64::EPSILON * t.abs().max(1.0) {
                return Ok(t);
            }
            t = next;
        }
        let resid = (self.eval(t)? - y).abs();
        if resid <= 10.0 * ftol {
            Ok(t)
        } else {
            Err(Error::InversionFailure {
                t,
                residual: resid,
                tol: ftol,
            })
        }
    }
}

/// Knot helper: `base + 10^e` for `per_decade` log-spaced exponents per decade
/// from `e_lo` to `e_hi` inclusive.
pub fn log_offset_knots(base: f64, e_lo: i32, e_hi: i32, per_decade: usize) -> Vec<f64> {
    let mut out = vec![base];
    let steps = ((e_hi - e_lo) as usize) * per_decade;
    for k in 0..=steps {
        let e = e_lo as f64 + k as f64 / per_decade as f64;
        out.push(base + 10f64.powf(e));
    }
    out
}
