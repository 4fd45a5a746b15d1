//! The singular three-dimensional product solution u = w(x1,x2) h(x3):
//! profile ODE integration, the scaling family and its matching constant,
//! the glued homogeneous factor w, the one-dimensional factor h, and the
//! assembled solution with its diagonal Hessian.
//!
//! The planar factor reduces on the unit cross-section to
//!
//!   g g'' (t^2 g'' - (2/3) t g' + (4/9) g) = 1,   g(0) = 1,  g'(0) = 0,
//!
//! integrated with g'' supplied pointwise as the positive root of the
//! quadratic (in z) polynomial  P = t^2 x z^2 + b z - 1,
//! b = (4/9) x^2 - (2/3) t x y, with (x, y) = (g, g'). The matching constant
//! lambda0 is the first zero of h1(t) = t g1'(t) - (2/3) g1(t), and
//! g = lambda0^{-2/3} g1(lambda0 t) satisfies g'(1) = (2/3) g(1), which glues
//! w = x2^{4/3} g(x1/x2) analytically across the diagonals.

use crate::error::{Error, Result};
use crate::ode::{self, quintic_hermite, Trajectory};
use crate::quad::{IntegralTable, Quadrature};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Crossover between the small-t series start and the closed-form root; the
/// closed form divides by 3 t^2 and the series start is exact at t = 0. Both
/// branches are polished to the exact root, so they agree at the switch to
/// rounding.
pub const T_SWITCH: f64 = 1e-3;

/// Positive root z of P(z) = x z (t^2 z - (2/3) t y + (4/9) x) - 1 = 0,
/// i.e. the profile second derivative as a function of (g, g', t).
///
/// Requires x >= 1 and t >= 0, the region where the root stays smooth and
/// uniformly Lipschitz along trajectories. For t > T_SWITCH the closed form
/// is used with the conjugate rationalization so no cancellation occurs as
/// t -> 0; for t <= T_SWITCH the expansion of P around the t = 0 root seeds
/// the polish. Either way the returned z is Newton-polished on P.
pub fn second_derivative_branch(x: f64, y: f64, t: f64) -> Result<f64> {
    if !(x >= 1.0) || t < 0.0 {
        return Err(Error::OutsideDomain {
            what: "profile second derivative (needs x >= 1, t >= 0)",
            x,
            y: t,
        });
    }
    let b = (4.0 / 9.0) * x * x - (2.0 / 3.0) * t * x * y;
    let z0 = if t <= T_SWITCH {
        if b <= 0.0 {
            return Err(Error::Numeric {
                what: "series branch needs b > 0",
                value: b,
            });
        }
        // z = 1/b - t^2 x / b^3 + O(t^4): the first-order-in-(t^2) expansion
        let inv_b = 1.0 / b;
        inv_b - t * t * x * inv_b * inv_b * inv_b
    } else {
        let beta = t * y - (2.0 / 3.0) * x;
        let c = 9.0 * t * t / x;
        let disc = beta * beta + c;
        if disc <= 0.0 || !disc.is_finite() {
            return Err(Error::Numeric {
                what: "discriminant of the root formula",
                value: disc,
            });
        }
        let root = disc.sqrt();
        let num = if beta >= 0.0 { beta + root } else { c / (root - beta) };
        num / (3.0 * t * t)
    };
    let mut z = z0;
    for _ in 0..4 {
        let p = (t * t * x * z + b) * z - 1.0;
        let dp = 2.0 * t * t * x * z + b;
        if dp == 0.0 {
            break;
        }
        let dz = p / dp;
        z -= dz;
        if dz.abs() <= 4.0 * f64::EPSILON * z.abs() {
            break;
        }
    }
    if !z.is_finite() || z <= 0.0 {
        return Err(Error::Numeric {
            what: "profile second derivative root",
            value: z,
        });
    }
    Ok(z)
}

/// d/dt of the root along a trajectory (x, y) = (g, g'), by implicit
/// differentiation of P; valid on both branches since P_z >= (4/9) x^2 > 0
/// near the root.
pub fn third_derivative(x: f64, y: f64, z: f64, t: f64) -> f64 {
    let px = t * t * z * z - (2.0 / 3.0) * t * y * z + (8.0 / 9.0) * x * z;
    let py = -(2.0 / 3.0) * t * x * z;
    let pz = 2.0 * t * t * x * z - (2.0 / 3.0) * t * x * y + (4.0 / 9.0) * x * x;
    let pt = 2.0 * t * x * z * z - (2.0 / 3.0) * x * y * z;
    -(px * y + py * z + pt) / pz
}

/// Residual of the profile ODE at a state triple.
pub fn ode_residual(x: f64, y: f64, z: f64, t: f64) -> f64 {
    x * z * (t * t * z - (2.0 / 3.0) * t * y + (4.0 / 9.0) * x) - 1.0
}

/// Integrate the even convex profile (g, g') from (1, 0) up to `t_end`,
/// storing every `store_every`-th step. Verifies along the way that g is
/// nondecreasing, g >= 1, and the ODE residual at stored nodes stays below
/// 1e-8.
pub fn solve_g1_stored(t_end: f64, step: f64, store_every: usize) -> Result<Trajectory<2>> {
    let rhs = |t: f64, s: &[f64; 2]| -> Result<[f64; 2]> {
        Ok([s[1], second_derivative_branch(s[0], s[1], t)?])
    };
    let traj = ode::rk_integrate_stored(rhs, [1.0, 0.0], 0.0, t_end, step, store_every)?;
    let mut prev = 1.0;
    for (k, s) in traj.states.iter().enumerate() {
        let t = traj.t(k);
        if s[0] < 1.0 || s[0] < prev - 1e-12 {
            return Err(Error::OdeBlowUp { t, step: k });
        }
        let z = second_derivative_branch(s[0], s[1], t)?;
        let r = ode_residual(s[0], s[1], z, t);
        if r.abs() > 1e-8 {
            return Err(Error::Numeric {
                what: "profile ODE residual at a trajectory node",
                value: r,
            });
        }
        prev = s[0];
    }
    Ok(traj)
}

/// `solve_g1_stored` keeping every node.
pub fn solve_g1(t_end: f64, step: f64) -> Result<Trajectory<2>> {
    solve_g1_stored(t_end, step, 1)
}

/// First zero of h1(t) = t g1'(t) - (2/3) g1(t) along the trajectory,
/// bisected between the bracketing nodes. h1(0) = -2/3 exactly; a missing
/// crossing means the trajectory is too short.
pub fn find_lambda0(traj: &Trajectory<2>) -> Result<f64> {
    let h1_node = |k: usize| {
        let t = traj.t(k);
        t * traj.states[k][1] - (2.0 / 3.0) * traj.states[k][0]
    };
    debug_assert_eq!(h1_node(0), -2.0 / 3.0);
    let mut bracket = None;
    for k in 1..traj.len() {
        if h1_node(k - 1) < 0.0 && h1_node(k) >= 0.0 {
            bracket = Some(k);
            break;
        }
    }
    let Some(k) = bracket else {
        return Err(Error::CrossingNotFound { cap: traj.t_end() });
    };
    let h1 = |t: f64| {
        let s = traj.state_at(t).expect("bisection stays inside the bracket");
        t * s[1] - (2.0 / 3.0) * s[0]
    };
    ode::bisect_root(h1, traj.t(k - 1), traj.t(k), 1e-12)
}

/// Sup over stored nodes with t <= t_max of the residual of the linearized
/// profile equation applied to h1 = t g1' - (2/3) g1.
///
/// With the implicit pointwise third derivative the residual is an algebraic
/// identity (every state lies on some exact solution, and all inputs are
/// pointwise functions of the state), so it would measure nothing. The third
/// derivative here is instead the five-point difference of g1'' along the
/// trajectory, which makes the residual scale with the node spacing to
/// fourth order. The profile is even, so the difference stencil is mirrored
/// across t = 0.
pub fn linearized_residual(traj: &Trajectory<2>, t_max: f64) -> Result<f64> {
    let n = traj.len();
    if n < 5 {
        return Err(Error::Config(
            "linearized residual needs at least five trajectory nodes".to_string(),
        ));
    }
    let mut z_col = Vec::with_capacity(n);
    for k in 0..n {
        let [x, y] = traj.states[k];
        z_col.push(second_derivative_branch(x, y, traj.t(k))?);
    }
    // z(-t) = z(t)
    let z_at = |k: isize| -> f64 { z_col[k.unsigned_abs()] };
    let mut sup = 0.0f64;
    for k in 0..n - 2 {
        let t = traj.t(k);
        if t > t_max {
            break;
        }
        let ki = k as isize;
        let dz = (z_at(ki - 2) - 8.0 * z_at(ki - 1) + 8.0 * z_at(ki + 1) - z_at(ki + 2))
            / (12.0 * traj.dt);
        let [x, y] = traj.states[k];
        let z = z_col[k];
        let h1 = t * y - (2.0 / 3.0) * x;
        let h1p = t * z + y / 3.0;
        let h1pp = t * dz + (4.0 / 3.0) * z;
        let w = (x * z) * (x * z);
        let r = (x + t * t * w) * h1pp - (2.0 / 3.0) * w * t * h1p + (z + (4.0 / 9.0) * w) * h1;
        sup = sup.max(r.abs());
    }
    Ok(sup)
}

/// Build options for the singular pipeline.
#[derive(Clone, Copy, Debug)]
pub struct SingularConfig {
    /// RK step for the profile integration.
    pub step: f64,
    /// Storage stride (stored node spacing = step * store_every).
    pub store_every: usize,
    /// Initial trajectory length for the lambda0 search.
    pub t_initial: f64,
    /// Search cap; the crossing is guaranteed but not bounded a priori.
    pub t_cap: f64,
    /// After lambda0 is found the trajectory is extended to cover
    /// `cover * lambda0` so the glued profile is available on [0, ~cover].
    pub cover: f64,
}

impl Default for SingularConfig {
    fn default() -> Self {
        SingularConfig {
            step: 1e-4,
            store_every: 10,
            t_initial: 10.0,
            t_cap: 1e4,
            cover: 101.0,
        }
    }
}

/// The profile g1 on [0, T] with derivatives to order three at stored nodes,
/// the matching constant, and Hermite evaluation between nodes.
pub struct SingularProfile {
    dt: f64,
    t_end: f64,
    g: Vec<f64>,
    dg: Vec<f64>,
    d2g: Vec<f64>,
    d3g: Vec<f64>,
    lambda0: f64,
}

impl SingularProfile {
    pub fn build(cfg: SingularConfig) -> Result<Self> {
        let mut t_end = cfg.t_initial;
        let (traj, lambda0) = loop {
            let traj = solve_g1_stored(t_end, cfg.step, cfg.store_every)?;
            match find_lambda0(&traj) {
                Ok(l) => break (traj, l),
                Err(Error::CrossingNotFound { .. }) if t_end < cfg.t_cap => {
                    t_end *= 2.0;
                }
                Err(e) => return Err(e),
            }
        };
        let need = cfg.cover * lambda0;
        let traj = if traj.t_end() < need {
            solve_g1_stored(need, cfg.step, cfg.store_every)?
        } else {
            traj
        };
        Self::from_trajectory(&traj, lambda0)
    }

    pub fn from_trajectory(traj: &Trajectory<2>, lambda0: f64) -> Result<Self> {
        let n = traj.len();
        let mut g = Vec::with_capacity(n);
        let mut dg = Vec::with_capacity(n);
        let mut d2g = Vec::with_capacity(n);
        let mut d3g = Vec::with_capacity(n);
        for k in 0..n {
            let t = traj.t(k);
            let [x, y] = traj.states[k];
            let z = second_derivative_branch(x, y, t)?;
            g.push(x);
            dg.push(y);
            d2g.push(z);
            d3g.push(third_derivative(x, y, z, t));
        }
        Ok(SingularProfile {
            dt: traj.dt,
            t_end: traj.t_end(),
            g,
            dg,
            d2g,
            d3g,
            lambda0,
        })
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    /// (g1, g1', g1'') at any |t| <= t_end; even extension, with g1'' taken
    /// as the exact polynomial root of the interpolated state so the ODE
    /// relation holds pointwise.
    pub fn g1_eval(&self, t: f64) -> Result<(f64, f64, f64)> {
        let a = t.abs();
        if a > self.t_end + 1e-12 {
            return Err(Error::OutOfTable {
                t,
                lo: -self.t_end,
                hi: self.t_end,
            });
        }
        let k = ((a / self.dt).floor() as usize).min(self.g.len() - 2);
        let tau = ((a - k as f64 * self.dt) / self.dt).clamp(0.0, 1.0);
        let (x, _) = quintic_hermite(
            tau,
            self.dt,
            self.g[k],
            self.dg[k],
            self.d2g[k],
            self.g[k + 1],
            self.dg[k + 1],
            self.d2g[k + 1],
        );
        let (y, _) = quintic_hermite(
            tau,
            self.dt,
            self.dg[k],
            self.d2g[k],
            self.d3g[k],
            self.dg[k + 1],
            self.d2g[k + 1],
            self.d3g[k + 1],
        );
        let z = second_derivative_branch(x.max(1.0), y, a)?;
        Ok((x, t.signum() * y, z))
    }

    /// The matched profile g = lambda0^{-2/3} g1(lambda0 t) and its two
    /// derivatives; defined for |t| <= t_end/lambda0.
    pub fn g_eval(&self, t: f64) -> Result<(f64, f64, f64)> {
        let l = self.lambda0;
        let (x, y, z) = self.g1_eval(l * t)?;
        let s = l.powf(-2.0 / 3.0);
        Ok((s * x, l.powf(1.0 / 3.0) * y, l.powf(4.0 / 3.0) * z))
    }
}

/// The one-dimensional factor h(s) = G^{-1}(sqrt(2)|s|) where
/// G(t) = ∫_1^t sqrt(x/(x-1)) dx; h^2 h'' = 1, h(0) = 1, h'(0) = 0.
///
/// Tabulated in q = sqrt(t - 1): the substituted integrand is exactly
/// 2 sqrt(1 + q^2), smooth on the whole line.
pub struct HProfile {
    table: IntegralTable,
    inv_tol: f64,
}

impl HProfile {
    pub fn new() -> Result<Self> {
        Self::with_tolerance(1e-13)
    }

    pub fn with_tolerance(abs_tol: f64) -> Result<Self> {
        let mut knots = vec![0.0];
        let mut e = -2.0;
        while e < 4.01 {
            knots.push(10f64.powf(e));
            e += 0.25;
        }
        let table = IntegralTable::build(
            Box::new(|q: f64| 2.0 * (1.0 + q * q).sqrt()),
            knots,
            false,
            Quadrature::with_tol(abs_tol),
        )?;
        Ok(HProfile {
            table,
            inv_tol: (10.0 * abs_tol).max(1e-14),
        })
    }

    /// (h, h', h'') at s.
    pub fn eval(&self, s: f64) -> Result<(f64, f64, f64)> {
        if s == 0.0 {
            return Ok((1.0, 0.0, 1.0));
        }
        let q = self.table.invert(SQRT_2 * s.abs(), self.inv_tol)?;
        let h = 1.0 + q * q;
        // h' = sqrt(2 (h-1)/h) = sqrt(2) q / sqrt(1 + q^2)
        let dh = s.signum() * SQRT_2 * q / h.sqrt();
        Ok((h, dh, 1.0 / (h * h)))
    }

    /// G itself, for round-trip checks.
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
}

/// Value, gradient and (off-diagonal-set) Hessian of the glued homogeneous
/// factor w at a point.
#[derive(Clone, Copy, Debug)]
pub struct WPoint {
    pub value: f64,
    /// Defined away from the origin.
    pub grad: Option<[f64; 2]>,
    /// `[w11, w12, w22]`; refused on the diagonals x1^2 = x2^2 and at the
    /// origin, where w is only C^1 numerically.
    pub hess: Option<[f64; 3]>,
}

/// The assembled singular solution u(x) = w(x1, x2) h(x3).
pub struct SingularSolution {
    pub profile: SingularProfile,
    pub h: HProfile,
}

/// Diagonal Hessian data of u at a point.
#[derive(Clone, Copy, Debug)]
pub struct U3dPoint {
    pub value: f64,
    /// `[u11, u22, u33]`; `None` on the diagonals of the (x1, x2) plane and
    /// on the x3-axis, where the classical Hessian does not exist.
    pub hess_diag: Option<[f64; 3]>,
}

impl U3dPoint {
    pub fn hess_product(&self) -> Option<f64> {
        self.hess_diag.map(|h| h[0] * h[1] * h[2])
    }
}

impl SingularSolution {
    pub fn build(cfg: SingularConfig) -> Result<Self> {
        Ok(SingularSolution {
            profile: SingularProfile::build(cfg)?,
            h: HProfile::new()?,
        })
    }

    pub fn lambda0(&self) -> f64 {
        self.profile.lambda0()
    }

    /// w(x1, x2) = m^{4/3} g(n/m) with m = max(|x1|,|x2|), n = min(|x1|,|x2|),
    /// composed with the sign symmetries; 4/3-homogeneous and symmetric in
    /// its arguments by construction.
    pub fn w_eval(&self, x1: f64, x2: f64) -> Result<WPoint> {
        let a = x1.abs();
        let b = x2.abs();
        if a == 0.0 && b == 0.0 {
            return Ok(WPoint {
                value: 0.0,
                grad: None,
                hess: None,
            });
        }
        let swapped = a > b;
        let (n, m) = if swapped { (b, a) } else { (a, b) };
        let t = n / m;
        let (g, dg, d2g) = self.profile.g_eval(t)?;
        let m13 = m.powf(1.0 / 3.0);
        let m_23 = 1.0 / (m13 * m13);
        let value = m * m13 * g;
        // sector derivatives with respect to (n, m)
        let w_n = m13 * dg;
        let w_m = m13 * ((4.0 / 3.0) * g - t * dg);
        let w_nn = m_23 * d2g;
        let w_mm = m_23 * (t * t * d2g - (2.0 / 3.0) * t * dg + (4.0 / 9.0) * g);
        let w_nm = m_23 * (dg / 3.0 - t * d2g);
        // undo the swap, then the sign reflections
        let (wa, wb, waa, wbb, wab) = if swapped {
            (w_m, w_n, w_mm, w_nn, w_nm)
        } else {
            (w_n, w_m, w_nn, w_mm, w_nm)
        };
        let s1 = if x1 < 0.0 { -1.0 } else { 1.0 };
        let s2 = if x2 < 0.0 { -1.0 } else { 1.0 };
        let grad = Some([s1 * wa, s2 * wb]);
        let hess = if a == b {
            None
        } else {
            Some([waa, s1 * s2 * wab, wbb])
        };
        Ok(WPoint { value, grad, hess })
    }

    /// u = w(x1,x2) h(x3) with the diagonal Hessian entries
    /// (w11 h, w22 h, w h'') where the factors are classical.
    pub fn u3d(&self, x1: f64, x2: f64, x3: f64) -> Result<U3dPoint> {
        let w = self.w_eval(x1, x2)?;
        let (h, _, d2h) = self.h.eval(x3)?;
        let hess_diag = w
            .hess
            .map(|wh| [wh[0] * h, wh[2] * h, w.value * d2h]);
        Ok(U3dPoint {
            value: w.value * h,
            hess_diag,
        })
    }
}
