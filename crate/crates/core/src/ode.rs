//! Fixed-step classical Runge–Kutta integration, sampled trajectories with
//! Hermite reconstruction between nodes, and bracketing root finding.

use crate::error::{Error, Result};

/// A sampled ODE path on a uniform time mesh. `states[k]` and `derivs[k]`
/// hold the state and right-hand side at `t0 + k*dt`.
#[derive(Clone, Debug)]
pub struct Trajectory<const N: usize> {
    pub t0: f64,
    pub dt: f64,
    pub states: Vec<[f64; N]>,
    pub derivs: Vec<[f64; N]>,
}

impl<const N: usize> Trajectory<N> {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn t(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.t(self.len() - 1)
    }

    pub fn last(&self) -> &[f64; N] {
        self.states.last().unwrap()
    }

    /// Cubic-Hermite state reconstruction between stored nodes.
    pub fn state_at(&self, t: f64) -> Result<[f64; N]> {
        if t < self.t0 - 1e-12 || t > self.t_end() + 1e-12 {
            return Err(Error::OutOfTable {
                t,
                lo: self.t0,
                hi: self.t_end(),
            });
        }
        let k = (((t - self.t0) / self.dt).floor() as usize).min(self.len() - 2);
        let tau = ((t - self.t(k)) / self.dt).clamp(0.0, 1.0);
        let mut out = [0.0; N];
        for c in 0..N {
            out[c] = cubic_hermite(
                tau,
                self.dt,
                self.states[k][c],
                self.derivs[k][c],
                self.states[k + 1][c],
                self.derivs[k + 1][c],
            )
            .0;
        }
        Ok(out)
    }
}

/// Classical 4th-order one-step integration with a fixed step.
///
/// The requested step is adjusted (only downward) so the path lands exactly
/// on `t_end`; `keep_every` controls the storage stride so long integrations
/// stay in memory. Non-finite states or right-hand sides abort with the last
/// good node.
pub fn rk_integrate_stored<const N: usize, F>(
    rhs: F,
    y0: [f64; N],
    t0: f64,
    t_end: f64,
    step: f64,
    keep_every: usize,
) -> Result<Trajectory<N>>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
{
    assert!(step > 0.0 && t_end > t0, "bad integration interval");
    assert!(keep_every >= 1);
    let span = t_end - t0;
    let mut n_steps = (span / step).ceil() as usize;
    // round the step count up to a storage multiple so the last node is kept
    n_steps = n_steps.div_ceil(keep_every) * keep_every;
    let h = span / n_steps as f64;

    let mut states = Vec::with_capacity(n_steps / keep_every + 1);
    let mut derivs = Vec::with_capacity(n_steps / keep_every + 1);
    let mut y = y0;
    let d0 = rhs(t0, &y)?;
    states.push(y);
    derivs.push(d0);

    for step_idx in 0..n_steps {
        let t = t0 + step_idx as f64 * h;
        let k1 = rhs(t, &y)?;
        let k2 = rhs(t + 0.5 * h, &add_scaled(&y, &k1, 0.5 * h))?;
        let k3 = rhs(t + 0.5 * h, &add_scaled(&y, &k2, 0.5 * h))?;
        let k4 = rhs(t + h, &add_scaled(&y, &k3, h))?;
        for c in 0..N {
            y[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
        let t_next = t0 + (step_idx + 1) as f64 * h;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::OdeBlowUp {
                t: t_next,
                step: step_idx + 1,
            });
        }
        if (step_idx + 1) % keep_every == 0 {
            let d = rhs(t_next, &y)?;
            if d.iter().any(|v| !v.is_finite()) {
                return Err(Error::OdeBlowUp {
                    t: t_next,
                    step: step_idx + 1,
                });
            }
            states.push(y);
            derivs.push(d);
        }
    }

    Ok(Trajectory {
        t0,
        dt: h * keep_every as f64,
        states,
        derivs,
    })
}

/// `rk_integrate_stored` keeping every step.
pub fn rk_integrate<const N: usize, F>(
    rhs: F,
    y0: [f64; N],
    t_end: f64,
    step: f64,
) -> Result<Trajectory<N>>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
{
    rk_integrate_stored(rhs, y0, 0.0, t_end, step, 1)
}

fn add_scaled<const N: usize>(y: &[f64; N], d: &[f64; N], s: f64) -> [f64; N] {
    let mut out = *y;
    for c in 0..N {
        out[c] += s * d[c];
    }
    out
}

/// Root of a continuous function by bisection; requires a sign change.
pub fn bisect_root<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = (a, b);
    let (flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo * fhi > 0.0 {
        return Err(Error::NoSignChange { a, b });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 || hi - lo <= tol {
            return Ok(mid);
        }
        if fm * flo < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Two-point cubic Hermite value and derivative at normalized position
/// `tau` in [0,1]; `h` is the node spacing.
pub fn cubic_hermite(tau: f64, h: f64, f0: f64, d0: f64, f1: f64, d1: f64) -> (f64, f64) {
    let t2 = tau * tau;
    let t3 = t2 * tau;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + tau;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    let v = h00 * f0 + h10 * h * d0 + h01 * f1 + h11 * h * d1;
    let dh00 = 6.0 * t2 - 6.0 * tau;
    let dh10 = 3.0 * t2 - 4.0 * tau + 1.0;
    let dh01 = -6.0 * t2 + 6.0 * tau;
    let dh11 = 3.0 * t2 - 2.0 * tau;
    let dv = (dh00 * f0 + dh01 * f1) / h + dh10 * d0 + dh11 * d1;
    (v, dv)
}

/// Two-point quintic Hermite (values, first and second derivatives at both
/// ends) evaluated at normalized `tau`; returns value and first derivative.
pub fn quintic_hermite(
    tau: f64,
    h: f64,
    f0: f64,
    d0: f64,
    s0: f64,
    f1: f64,
    d1: f64,
    s1: f64,
) -> (f64, f64) {
    let t2 = tau * tau;
    let t3 = t2 * tau;
    let t4 = t3 * tau;
    let t5 = t4 * tau;
    let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    let h1 = tau - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    let h2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
    let h3 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
    let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    let h5 = 0.5 * t3 - t4 + 0.5 * t5;
    let v = h0 * f0 + h1 * h * d0 + h2 * h * h * s0 + h3 * f1 + h4 * h * d1 + h5 * h * h * s1;
    let dh0 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4;
    let dh1 = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4;
    let dh2 = tau - 4.5 * t2 + 6.0 * t3 - 2.5 * t4;
    let dh3 = 30.0 * t2 - 60.0 * t3 + 30.0 * t4;
    let dh4 = -12.0 * t2 + 28.0 * t3 - 15.0 * t4;
    let dh5 = 1.5 * t2 - 4.0 * t3 + 2.5 * t4;
    let dv = (dh0 * f0 + dh3 * f1) / h
        + dh1 * d0
        + dh4 * d1
        + (dh2 * s0 + dh5 * s1) * h;
    (v, dv)
}
