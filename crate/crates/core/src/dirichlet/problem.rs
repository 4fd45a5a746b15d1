//! The discrete penalized problem: residual, positivity checks, and the
//! Newton linearization on a pinned grid.

use crate::error::{Error, Result};
use crate::grid::{Grid2D, ScalarField2D};

/// One nonlinear problem instance: grid, data, penalty and penalty weight.
/// `eps_inv = 0` together with an all-zero `rho` is the plain in-domain
/// problem (pinned rectangle).
pub struct PinnedProblem<'a> {
    pub grid: Grid2D,
    pub phi: &'a ScalarField2D,
    pub rho: &'a ScalarField2D,
    pub eps_inv: f64,
    pub theta: f64,
}

/// Residual and argument fields of the log-form equation at the iterate:
/// `f` carries log A1 + log A2 - log(t + (1-t) g) at interior nodes and
/// u - phi at boundary nodes.
pub struct ResidualParts {
    pub f: ScalarField2D,
    pub a1: ScalarField2D,
    pub a2: ScalarField2D,
    pub sup: f64,
}

impl<'a> PinnedProblem<'a> {
    /// Penalized argument A_i = D_ii u - eps^{-1} (u - phi) rho and the full
    /// residual. Fails with the worst node when an argument leaves the
    /// positive cone (<= theta).
    pub fn residual(&self, u: &ScalarField2D, t: f64, g: &ScalarField2D) -> Result<ResidualParts> {
        let gr = self.grid;
        let (h1, h2) = (gr.h1(), gr.h2());
        let inv_h1 = 1.0 / (h1 * h1);
        let inv_h2 = 1.0 / (h2 * h2);
        let mut a1 = ScalarField2D::zeros(gr);
        let mut a2 = ScalarField2D::zeros(gr);
        let mut f = ScalarField2D::zeros(gr);
        let mut worst: Option<(u8, usize, usize, f64)> = None;
        for j in 0..gr.n2 {
            for i in 0..gr.n1 {
                if gr.is_boundary(i, j) {
                    f.set(i, j, u.get(i, j) - self.phi.get(i, j));
                    a1.set(i, j, 1.0);
                    a2.set(i, j, 1.0);
                    continue;
                }
                let pen = self.eps_inv * (u.get(i, j) - self.phi.get(i, j)) * self.rho.get(i, j);
                let d11 = (u.get(i - 1, j) - 2.0 * u.get(i, j) + u.get(i + 1, j)) * inv_h1;
                let d22 = (u.get(i, j - 1) - 2.0 * u.get(i, j) + u.get(i, j + 1)) * inv_h2;
                let v1 = d11 - pen;
                let v2 = d22 - pen;
                for (axis, v) in [(1u8, v1), (2u8, v2)] {
                    if v <= self.theta && worst.map_or(true, |w| v < w.3) {
                        worst = Some((axis, i, j, v));
                    }
                }
                a1.set(i, j, v1);
                a2.set(i, j, v2);
            }
        }
        if let Some((axis, i, j, value)) = worst {
            return Err(Error::Positivity {
                axis,
                i,
                j,
                value,
                floor: self.theta,
            });
        }
        let mut sup = 0.0f64;
        for j in 1..gr.n2 - 1 {
            for i in 1..gr.n1 - 1 {
                let rhs = (t + (1.0 - t) * g.get(i, j)).ln();
                let r = a1.get(i, j).ln() + a2.get(i, j).ln() - rhs;
                f.set(i, j, r);
                sup = sup.max(r.abs());
            }
        }
        for j in 0..gr.n2 {
            for i in 0..gr.n1 {
                if gr.is_boundary(i, j) {
                    sup = sup.max(f.get(i, j).abs());
                }
            }
        }
        Ok(ResidualParts { f, a1, a2, sup })
    }

    pub fn n_interior(&self) -> usize {
        (self.grid.n1 - 2) * (self.grid.n2 - 2)
    }

    /// Newton matrix applied to an interior vector:
    /// J v = A1^{-1}(D11 v - eps^{-1} rho v) + A2^{-1}(D22 v - eps^{-1} rho v)
    /// with v = 0 at boundary nodes.
    pub fn apply_jacobian(&self, parts: &ResidualParts, v: &[f64], out: &mut [f64]) {
        let gr = self.grid;
        let w = gr.n1 - 2;
        let inv_h1 = 1.0 / (gr.h1() * gr.h1());
        let inv_h2 = 1.0 / (gr.h2() * gr.h2());
        for j in 1..gr.n2 - 1 {
            for i in 1..gr.n1 - 1 {
                let q = (j - 1) * w + (i - 1);
                let vc = v[q];
                let vl = if i > 1 { v[q - 1] } else { 0.0 };
                let vr = if i < gr.n1 - 2 { v[q + 1] } else { 0.0 };
                let vd = if j > 1 { v[q - w] } else { 0.0 };
                let vu = if j < gr.n2 - 2 { v[q + w] } else { 0.0 };
                let pen = self.eps_inv * self.rho.get(i, j) * vc;
                let t1 = ((vl - 2.0 * vc + vr) * inv_h1 - pen) / parts.a1.get(i, j);
                let t2 = ((vd - 2.0 * vc + vu) * inv_h2 - pen) / parts.a2.get(i, j);
                out[q] = t1 + t2;
            }
        }
    }

    /// Inverse of the Jacobian diagonal, used as the preconditioner.
    pub fn jacobian_inv_diag(&self, parts: &ResidualParts) -> Vec<f64> {
        let gr = self.grid;
        let w = gr.n1 - 2;
        let inv_h1 = 1.0 / (gr.h1() * gr.h1());
        let inv_h2 = 1.0 / (gr.h2() * gr.h2());
        let mut out = vec![0.0; self.n_interior()];
        for j in 1..gr.n2 - 1 {
            for i in 1..gr.n1 - 1 {
                let pen = self.eps_inv * self.rho.get(i, j);
                let d = (-2.0 * inv_h1 - pen) / parts.a1.get(i, j)
                    + (-2.0 * inv_h2 - pen) / parts.a2.get(i, j);
                out[(j - 1) * w + (i - 1)] = 1.0 / d;
            }
        }
        out
    }
}
