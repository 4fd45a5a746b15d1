//! Exact two-dimensional objects built from one-dimensional ODE profiles:
//! the entire product solution, the vanishing-boundary box solution, the
//! strict-convexity barrier, and the second-derivative monitor. All carry
//! analytic first and second derivatives so they can serve as oracles for
//! the discrete solvers.
//!
//! Profile construction reduces the ODEs to antiderivative inversions:
//!
//!   f f'' = 1, f(0) = 1, f'(0) = 0   =>   f = H^{-1}(sqrt(2)|s|),
//!       H(t) = ∫_1^t (log x)^{-1/2} dx,   f' = sgn(s) sqrt(2 log f),  f'' = 1/f
//!
//!   g g'' = -1, g(±1) = 0            =>   g = λ0^{-1} G^{-1}(λ0 |x|),
//!       G(t) = ∫_{-1}^t (log x^{-2})^{-1/2} dx on [-1, 0],  λ0 = G(0),
//!       g' = sgn(x) sqrt(-2 log(-λ0 g)),  g'' = -1/g
//!
//! Both integrands have inverse-square-root endpoint behavior, handled by
//! the substitution in [`crate::quad`].

use crate::error::{Error, Result};
use crate::grid::{self, Axis, ScalarField2D};
use crate::quad::{IntegralTable, Quadrature};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Value, gradient and Hessian of a scalar function at a point.
/// `hess = [d11, d12, d22]`.
#[derive(Clone, Copy, Debug)]
pub struct Jet2 {
    pub value: f64,
    pub grad: [f64; 2],
    pub hess: [f64; 3],
}

impl Jet2 {
    pub fn hess_product(&self) -> f64 {
        self.hess[0] * self.hess[2]
    }
}

/// The even convex profile of the entire product solution, valid for
/// |s| up to ~1.4e9 (the cached antiderivative table covers it).
///
/// The antiderivative H(t) = ∫_1^t (log x)^{-1/2} dx is tabulated in the
/// substituted coordinate q = sqrt(t - 1), where the integrand
/// 2q/sqrt(log1p(q^2)) is smooth and log1p keeps full precision arbitrarily
/// close to the singular endpoint.
pub struct EntireProfile {
    table: IntegralTable,
    inv_tol: f64,
}

fn h_integrand_substituted(q: f64) -> f64 {
    if q == 0.0 {
        2.0
    } else {
        2.0 * q / f64::ln_1p(q * q).sqrt()
    }
}

impl EntireProfile {
    pub fn new() -> Result<Self> {
        Self::with_tolerance(1e-13)
    }

    pub fn with_tolerance(abs_tol: f64) -> Result<Self> {
        // q-knots from 0 out to 1e5, i.e. t up to 1e10, so H reaches past
        // sqrt(2) * 1.4e9
        let mut knots = vec![0.0];
        let mut e = -2.0;
        while e < 5.01 {
            knots.push(10f64.powf(e));
            e += 0.25;
        }
        let table = IntegralTable::build(
            Box::new(h_integrand_substituted),
            knots,
            false,
            Quadrature::with_tol(abs_tol),
        )?;
        Ok(EntireProfile {
            table,
            inv_tol: (10.0 * abs_tol).max(1e-14),
        })
    }

    /// (f, f', f'') at s.
    pub fn eval(&self, s: f64) -> Result<(f64, f64, f64)> {
        if s == 0.0 {
            return Ok((1.0, 0.0, 1.0));
        }
        let y = SQRT_2 * s.abs();
        let q = self.table.invert(y, self.inv_tol)?;
        let f = 1.0 + q * q;
        // f' = sqrt(2 log f) evaluated through log1p so it stays accurate
        // when f rounds to 1
        let df = s.signum() * (2.0 * f64::ln_1p(q * q)).sqrt();
        Ok((f, df, 1.0 / f))
    }

    /// Antiderivative H itself, exposed for round-trip checks.
    pub fn antiderivative(&self, t: f64) -> Result<f64> {
        if t < 1.0 {
            return Err(Error::OutOfTable {
                t,
                lo: 1.0,
                hi: f64::INFINITY,
            });
        }
        self.table.eval((t - 1.0).sqrt())
    }

    /// Largest |s| the cached table can invert.
    pub fn max_abscissa(&self) -> f64 {
        self.table.max_value() / SQRT_2
    }
}

/// u(x1,x2) = f(x1) f(x2) with gradient and Hessian from profile derivatives.
pub fn entire_solution(p: &EntireProfile, x1: f64, x2: f64) -> Result<Jet2> {
    let (f1, d1, s1) = p.eval(x1)?;
    let (f2, d2, s2) = p.eval(x2)?;
    Ok(Jet2 {
        value: f1 * f2,
        grad: [d1 * f2, f1 * d2],
        hess: [s1 * f2, d1 * d2, f1 * s2],
    })
}

/// The negative even profile of the box solution on [-1, 1].
///
/// The antiderivative G(t) = ∫_{-1}^t (log x^{-2})^{-1/2} dx on [-1, 0] is
/// tabulated in q = sqrt(t + 1); the substituted integrand
/// 2q * (-2 log1p(-q^2))^{-1/2} is finite on all of [0, 1].
pub struct BoxProfile {
    table: IntegralTable,
    lambda0: f64,
    inv_tol: f64,
}

fn g_box_integrand_substituted(q: f64) -> f64 {
    if q == 0.0 {
        return SQRT_2;
    }
    // at q = 1 the log blows up and the integrand goes to zero
    2.0 * q / (-2.0 * f64::ln_1p(-q * q)).sqrt()
}

impl BoxProfile {
    pub fn new() -> Result<Self> {
        Self::with_tolerance(1e-13)
    }

    pub fn with_tolerance(abs_tol: f64) -> Result<Self> {
        let mut knots: Vec<f64> = (0..19).map(|k| 0.05 * k as f64).collect();
        for k in 2..=13 {
            knots.push(1.0 - 10f64.powi(-k));
        }
        knots.push(1.0);
        let table = IntegralTable::build(
            Box::new(g_box_integrand_substituted),
            knots,
            false,
            Quadrature::with_tol(abs_tol),
        )?;
        let lambda0 = table.max_value();
        Ok(BoxProfile {
            table,
            lambda0,
            inv_tol: (10.0 * abs_tol).max(1e-14),
        })
    }

    /// The shooting constant: G evaluated at the inner endpoint. Equals
    /// sqrt(pi/2) by the Gamma-integral reduction.
    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    /// (g, g', g'') at x in [-1, 1]; g < 0 inside, g(±1) = 0.
    pub fn eval(&self, x: f64) -> Result<(f64, f64, f64)> {
        if x.abs() > 1.0 {
            return Err(Error::OutsideDomain {
                what: "box profile",
                x,
                y: 0.0,
            });
        }
        if x == 0.0 {
            return Ok((-1.0 / self.lambda0, 0.0, self.lambda0));
        }
        let y = self.lambda0 * x.abs();
        let q = self.table.invert(y.min(self.lambda0), self.inv_tol)?;
        // t = q^2 - 1; the factored form keeps |t| accurate near the wall
        let abs_t = ((1.0 - q) * (1.0 + q)).max(f64::MIN_POSITIVE);
        let g = -abs_t / self.lambda0;
        let log_abs_t = (1.0 - q).ln() + f64::ln_1p(q);
        let dg = x.signum() * (-2.0 * log_abs_t).max(0.0).sqrt();
        let d2g = -1.0 / g;
        Ok((g, dg, d2g))
    }
}

/// The coordinate-convex representative v = -g(x1) g(x2) of the box
/// solution: zero on the boundary of [-1,1]^2, negative inside, v11 > 0,
/// v11*v22 = 1.
pub fn box_solution(p: &BoxProfile, x1: f64, x2: f64) -> Result<Jet2> {
    if x1.abs() > 1.0 || x2.abs() > 1.0 {
        return Err(Error::OutsideDomain {
            what: "box solution",
            x: x1,
            y: x2,
        });
    }
    let (g1, d1, s1) = p.eval(x1)?;
    let (g2, d2, s2) = p.eval(x2)?;
    Ok(Jet2 {
        value: -g1 * g2,
        grad: [-d1 * g2, -g1 * d2],
        hess: [-s1 * g2, -d1 * d2, -g1 * s2],
    })
}

/// The strict-convexity barrier on R = (0, 1/4) x [-1/2, 1/2]:
/// lambda * (x1 sqrt(log(1/x1))) * (4 x2^2 - 1) + x1/lambda, with its
/// analytic Hessian. The diagonal Hessian product lies in [0, 6 lambda]
/// for small lambda.
pub fn strict_convexity_barrier(lambda: f64, x1: f64, x2: f64) -> Result<Jet2> {
    assert!(lambda > 0.0, "lambda must be positive");
    if !(x1 > 0.0 && x1 < 0.25 && x2.abs() <= 0.5) {
        return Err(Error::OutsideDomain {
            what: "barrier rectangle",
            x: x1,
            y: x2,
        });
    }
    let l = -x1.ln(); // log(1/x1) > log 4 on the strip
    let sl = l.sqrt();
    let p = x1 * sl;
    let dp = sl - 0.5 / sl;
    let d2p = -(2.0 * l + 1.0) / (4.0 * x1 * l * sl);
    let q = 4.0 * x2 * x2 - 1.0;
    let dq = 8.0 * x2;
    Ok(Jet2 {
        value: lambda * p * q + x1 / lambda,
        grad: [lambda * dp * q + 1.0 / lambda, lambda * p * dq],
        hess: [lambda * d2p * q, lambda * dp * dq, lambda * p * 8.0],
    })
}

/// Parameters of the second-derivative monitor. `a = None` picks the cutoff
/// amplitude from the boundary values of x1^2 + u2^2 so the positive set of
/// the cutoff cannot touch the grid boundary.
#[derive(Clone, Copy, Debug)]
pub struct MonitorParams {
    pub sigma: f64,
    pub a: Option<f64>,
}

impl Default for MonitorParams {
    fn default() -> Self {
        MonitorParams {
            sigma: 0.01,
            a: None,
        }
    }
}

/// Output of [`pogorelov_monitor`]: cutoff and logarithmic-quantity fields on
/// the component of {eta > 0} containing the center node (zero and unmasked
/// elsewhere), plus the monitored supremum.
pub struct PogorelovMonitor {
    pub eta: ScalarField2D,
    pub m: ScalarField2D,
    pub inside: Vec<bool>,
    pub sup_eta2_u11_sq: f64,
    pub a_used: f64,
}

/// Computes eta = 1 - A (x1^2 + u2^2)/2, M = log u11 + sigma/2 u1^2 + log eta
/// on the component of {eta > 0} containing the center node, and the
/// supremum of eta^2 u11^2 there. Fails if u11 <= 0 anywhere inside the
/// component, which signals loss of discrete coordinate-convexity.
pub fn pogorelov_monitor(u: &ScalarField2D, params: MonitorParams) -> Result<PogorelovMonitor> {
    let g = *u.grid();
    let u1 = grid::d1_axis(u, Axis::X1);
    let u2 = grid::d1_axis(u, Axis::X2);
    let u11 = grid::d2_axis(u, Axis::X1);

    let radial = |i: usize, j: usize| {
        let x = g.node_x(i);
        let v = u2.get(i, j);
        x * x + v * v
    };

    let a = match params.a {
        Some(a) => a,
        None => {
            let mut min_b = f64::INFINITY;
            for j in 0..g.n2 {
                for i in 0..g.n1 {
                    if g.is_boundary(i, j) {
                        min_b = min_b.min(radial(i, j));
                    }
                }
            }
            if min_b <= 0.0 || !min_b.is_finite() {
                return Err(Error::Config(
                    "cutoff amplitude recipe needs x1^2 + u2^2 > 0 on the grid boundary"
                        .to_string(),
                ));
            }
            2.0 / min_b
        }
    };

    let mut eta = ScalarField2D::zeros(g);
    for j in 0..g.n2 {
        for i in 0..g.n1 {
            eta.set(i, j, 1.0 - 0.5 * a * radial(i, j));
        }
    }

    // flood fill the positive component containing the center node
    let (ci, cj) = (g.n1 / 2, g.n2 / 2);
    let mut inside = vec![false; g.n_nodes()];
    if eta.get(ci, cj) > 0.0 {
        let mut stack = vec![(ci, cj)];
        inside[g.index(ci, cj)] = true;
        while let Some((i, j)) = stack.pop() {
            let mut push = |ii: usize, jj: usize, stack: &mut Vec<(usize, usize)>| {
                let idx = g.index(ii, jj);
                if !inside[idx] && eta.get(ii, jj) > 0.0 {
                    inside[idx] = true;
                    stack.push((ii, jj));
                }
            };
            if i > 0 {
                push(i - 1, j, &mut stack);
            }
            if i + 1 < g.n1 {
                push(i + 1, j, &mut stack);
            }
            if j > 0 {
                push(i, j - 1, &mut stack);
            }
            if j + 1 < g.n2 {
                push(i, j + 1, &mut stack);
            }
        }
    }

    let mut m = ScalarField2D::zeros(g);
    let mut sup = 0.0f64;
    for j in 0..g.n2 {
        for i in 0..g.n1 {
            if !inside[g.index(i, j)] {
                continue;
            }
            let c = u11.get(i, j);
            if c <= 0.0 {
                return Err(Error::Monitor { i, j, value: c });
            }
            let e = eta.get(i, j);
            m.set(
                i,
                j,
                c.ln() + 0.5 * params.sigma * u1.get(i, j).powi(2) + e.ln(),
            );
            sup = sup.max(e * e * c * c);
        }
    }

    Ok(PogorelovMonitor {
        eta,
        m,
        inside,
        sup_eta2_u11_sq: sup,
        a_used: a,
    })
}
