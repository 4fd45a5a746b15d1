//! The penalized global Dirichlet solver: a smooth penalty outside the
//! domain forces the solution toward the boundary data, a continuation
//! family in t connects an explicitly solvable start to the target equation,
//! and damped Newton carries each stage. A plain pinned-rectangle path
//! reuses the same machinery with the penalty switched off.

mod linsolve;
mod problem;

pub use problem::{PinnedProblem, ResidualParts};

use crate::error::{Error, Result};
use crate::grid::{self, Axis, Grid2D, Region, ScalarField2D};

/// Built-in defining functions w for the domain catalog. The domain is the
/// connected component of {w < 0} containing the seed point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DomainKind {
    /// |x|^2 - 1
    Disk,
    /// |x|^4 + |x|^2 - 4 x1 x2 (two petals along the diagonal; pick one by seed)
    Quartic,
    /// c0 + c1 x1 + c2 x2 + c3 x1^2 + c4 x1 x2 + c5 x2^2
    CustomQuadratic([f64; 6]),
}

impl DomainKind {
    pub fn w(&self, x: f64, y: f64) -> f64 {
        match self {
            DomainKind::Disk => x * x + y * y - 1.0,
            DomainKind::Quartic => {
                let r2 = x * x + y * y;
                r2 * r2 + r2 - 4.0 * x * y
            }
            DomainKind::CustomQuadratic(c) => {
                c[0] + c[1] * x + c[2] * y + c[3] * x * x + c[4] * x * y + c[5] * y * y
            }
        }
    }

    /// Pure second derivatives (w11, w22).
    pub fn w_second(&self, x: f64, y: f64) -> (f64, f64) {
        match self {
            DomainKind::Disk => (2.0, 2.0),
            DomainKind::Quartic => {
                let r2 = x * x + y * y;
                (4.0 * r2 + 8.0 * x * x + 2.0, 4.0 * r2 + 8.0 * y * y + 2.0)
            }
            DomainKind::CustomQuadratic(c) => (2.0 * c[3], 2.0 * c[5]),
        }
    }
}

/// Boundary data: a quadratic polynomial in the monomial basis
/// [1, x1, x2, x1^2, x1*x2, x2^2].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhiPoly(pub [f64; 6]);

impl PhiPoly {
    pub fn zero() -> Self {
        PhiPoly([0.0; 6])
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let c = self.0;
        c[0] + c[1] * x + c[2] * y + c[3] * x * x + c[4] * x * y + c[5] * y * y
    }
}

/// A coordinate-convex domain plus everything the penalized solve needs.
#[derive(Clone, Debug)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub seed_point: (f64, f64),
    /// Bounding box (xmin, xmax, ymin, ymax) strictly containing a
    /// neighborhood of the domain closure.
    pub bbox: (f64, f64, f64, f64),
    /// Penalty ramp width in w-units.
    pub delta: f64,
    pub phi: PhiPoly,
}

impl DomainSpec {
    pub fn disk(phi: PhiPoly) -> Self {
        DomainSpec {
            kind: DomainKind::Disk,
            seed_point: (0.0, 0.0),
            bbox: (-1.5, 1.5, -1.5, 1.5),
            delta: 0.2,
            phi,
        }
    }

    pub fn quartic(phi: PhiPoly) -> Self {
        DomainSpec {
            kind: DomainKind::Quartic,
            seed_point: (0.5, 0.5),
            bbox: (-0.25, 1.1, -0.25, 1.1),
            delta: 0.05,
            phi,
        }
    }

    pub fn grid(&self, n1: usize, n2: usize) -> Result<Grid2D> {
        Grid2D::new(self.bbox.0, self.bbox.1, self.bbox.2, self.bbox.3, n1, n2)
    }

    /// Validated uniform coordinate-convexity constant: min of the analytic
    /// pure second derivatives over the grid nodes.
    pub fn convexity_constant(&self, g: Grid2D) -> Result<f64> {
        let mut c = f64::INFINITY;
        for j in 0..g.n2 {
            for i in 0..g.n1 {
                let (x, y) = g.node(i, j);
                let (w11, w22) = self.kind.w_second(x, y);
                c = c.min(w11).min(w22);
            }
        }
        if c <= 0.0 {
            return Err(Error::Config(format!(
                "defining function is not uniformly coordinate-convex on the box (min w_ii = {c})"
            )));
        }
        Ok(c)
    }
}

/// The penalty field rho = psi(w) with the cubic smoothstep ramp, plus the
/// flood-filled domain component.
pub struct PenaltyField {
    pub rho: ScalarField2D,
    /// Nodes of the selected component of {w < 0}.
    pub component: Vec<bool>,
    /// {w < 0} nodes outside the selected component (other components of
    /// the defining function inside the box); reported, not fatal.
    pub stray_negative_nodes: usize,
}

/// rho(x) = psi(w(x)): 0 for w <= 0, the cubic smoothstep S(w/delta) on the
/// ramp, 1 beyond it. The component of {w < 0} containing the seed point is
/// selected by flood fill.
pub fn build_penalty(spec: &DomainSpec, g: Grid2D) -> Result<PenaltyField> {
    let w = grid::sample(g, |x, y| spec.kind.w(x, y))?;
    let mut rho = ScalarField2D::zeros(g);
    for j in 0..g.n2 {
        for i in 0..g.n1 {
            let s = w.get(i, j) / spec.delta;
            let v = if s <= 0.0 {
                0.0
            } else if s >= 1.0 {
                1.0
            } else {
                s * s * (3.0 - 2.0 * s)
            };
            rho.set(i, j, v);
        }
    }
    let (si, sj) = g.nearest(spec.seed_point.0, spec.seed_point.1);
    if w.get(si, sj) >= 0.0 {
        return Err(Error::EmptyDomain);
    }
    let mut component = vec![false; g.n_nodes()];
    let mut stack = vec![(si, sj)];
    component[g.index(si, sj)] = true;
    while let Some((i, j)) = stack.pop() {
        let mut push = |ii: usize, jj: usize, stack: &mut Vec<(usize, usize)>| {
            let idx = g.index(ii, jj);
            if !component[idx] && w.get(ii, jj) < 0.0 {
                component[idx] = true;
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
    let mut stray = 0usize;
    for j in 0..g.n2 {
        for i in 0..g.n1 {
            if w.get(i, j) < 0.0 && !component[g.index(i, j)] {
                stray += 1;
            }
        }
    }
    Ok(PenaltyField {
        rho,
        component,
        stray_negative_nodes: stray,
    })
}

/// Schedules, tolerances and damping policy of the continuation solver.
#[derive(Clone, Debug)]
pub struct ContinuationConfig {
    /// Decreasing penalty weights.
    pub eps_schedule: Vec<f64>,
    /// Number of nodes of the uniform t-schedule on [0, 1] (>= 2).
    pub t_steps: usize,
    /// Sup-norm tolerance on the log-residual.
    pub newton_tol: f64,
    pub max_newton: usize,
    pub max_halvings: usize,
    /// Positivity floor for the penalized arguments.
    pub theta: f64,
    pub lin_rel_tol: f64,
    pub lin_max_iter: usize,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        ContinuationConfig {
            eps_schedule: vec![1.0, 0.3, 0.1, 0.03, 0.01],
            t_steps: 11,
            newton_tol: 1e-10,
            max_newton: 50,
            max_halvings: 30,
            theta: 1e-12,
            lin_rel_tol: 1e-12,
            lin_max_iter: 50_000,
        }
    }
}

/// Per-stage Newton record.
#[derive(Clone, Debug)]
pub struct StageRecord {
    pub epsilon: f64,
    pub t: f64,
    pub iterations: usize,
    pub final_residual: f64,
    pub residual_history: Vec<f64>,
}

/// Per-epsilon boundary-adherence record over the penalized region.
#[derive(Clone, Copy, Debug)]
pub struct EpsRecord {
    pub epsilon: f64,
    pub sup_phi_minus_u_plus: f64,
    pub sup_u_minus_phi_plus: f64,
}

/// Convergence history and monitored quantities of one solve.
#[derive(Clone, Debug, Default)]
pub struct SolveReport {
    pub stages: Vec<StageRecord>,
    pub eps_records: Vec<EpsRecord>,
    pub strict_convexity_probe: f64,
    pub interior_second_derivative_sup: f64,
    pub c0: f64,
    pub k0: f64,
    pub warnings: Vec<String>,
}

/// Starting data of the continuation: the right-hand-side field g built
/// from the barrier seed, the constants, and the seed iterate itself
/// (interior C0*w - K0, boundary pinned to phi so the t = 0 residual
/// vanishes at every node).
pub struct GField {
    pub g: ScalarField2D,
    pub c0: f64,
    pub k0: f64,
    pub seed: ScalarField2D,
}

/// Builds g = A1(u0) * A2(u0) for the seed u0 = C0 w - K0. C0 comes from
/// the coordinate-convexity constant; K0 doubles from its a priori floor
/// until every argument is positive and min g >= 1.05.
pub fn build_g_field(
    spec: &DomainSpec,
    g: Grid2D,
    penalty: &PenaltyField,
    eps: f64,
    theta: f64,
) -> Result<GField> {
    let w = grid::sample(g, |x, y| spec.kind.w(x, y))?;
    let phi = grid::sample(g, |x, y| spec.phi.eval(x, y))?;
    let c = spec.convexity_constant(g)?;
    let c0 = (1.1 / c).max(1.0);
    let (w_sup, _) = grid::norms(&w, Region::All);
    let (phi_sup, _) = grid::norms(&phi, Region::All);
    let mut k0 = (c0 * w_sup + phi_sup + 1.0).max(1.0);
    let problem = PinnedProblem {
        grid: g,
        phi: &phi,
        rho: &penalty.rho,
        eps_inv: 1.0 / eps,
        theta,
    };
    for _ in 0..31 {
        let mut seed = ScalarField2D::zeros(g);
        for j in 0..g.n2 {
            for i in 0..g.n1 {
                let v = if g.is_boundary(i, j) {
                    phi.get(i, j)
                } else {
                    c0 * w.get(i, j) - k0
                };
                seed.set(i, j, v);
            }
        }
        // evaluating with t = 1 and an all-ones g gives exactly the A_i of
        // the seed; squash the positivity error into a retry
        let ones = grid::sample(g, |_, _| 1.0)?;
        match problem.residual(&seed, 1.0, &ones) {
            Err(Error::Positivity { .. }) => {
                k0 *= 2.0;
                continue;
            }
            Err(e) => return Err(e),
            Ok(parts) => {
                let mut gmin = f64::INFINITY;
                let mut gfield = ScalarField2D::zeros(g);
                for j in 0..g.n2 {
                    for i in 0..g.n1 {
                        if g.is_boundary(i, j) {
                            gfield.set(i, j, 1.0);
                        } else {
                            let v = parts.a1.get(i, j) * parts.a2.get(i, j);
                            gfield.set(i, j, v);
                            gmin = gmin.min(v);
                        }
                    }
                }
                if gmin >= 1.05 {
                    return Ok(GField {
                        g: gfield,
                        c0,
                        k0,
                        seed,
                    });
                }
                k0 *= 2.0;
            }
        }
        if k0 > (1u64 << 30) as f64 {
            break;
        }
    }
    Err(Error::Config(format!(
        "barrier constants did not stabilize (K0 reached {k0})"
    )))
}

/// Outcome of one damped Newton stage.
pub struct StageOutcome {
    pub u: ScalarField2D,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub final_residual: f64,
}

/// Damped Newton on the log-residual at fixed (eps, t): each step solves the
/// five-point system J v = -F and is accepted only if every penalized
/// argument stays above the floor and the sup-residual strictly decreases;
/// otherwise the step halves, up to `max_halvings`.
pub fn newton_stage(
    problem: &PinnedProblem,
    u: &ScalarField2D,
    t: f64,
    gfield: &ScalarField2D,
    cfg: &ContinuationConfig,
    eps_label: f64,
) -> Result<StageOutcome> {
    let gr = problem.grid;
    let w = gr.n1 - 2;
    let mut u = u.clone();
    let mut parts = problem.residual(&u, t, gfield)?;
    let mut history = vec![parts.sup];
    let mut iterations = 0usize;

    while parts.sup > cfg.newton_tol {
        if iterations >= cfg.max_newton {
            return Err(Error::StageFailure {
                eps: eps_label,
                t,
                reason: format!(
                    "newton budget exhausted at residual {:e} after {iterations} iterations",
                    parts.sup
                ),
            });
        }
        let mut b = vec![0.0; problem.n_interior()];
        for j in 1..gr.n2 - 1 {
            for i in 1..gr.n1 - 1 {
                b[(j - 1) * w + (i - 1)] = -parts.f.get(i, j);
            }
        }
        let inv_diag = problem.jacobian_inv_diag(&parts);
        let v = linsolve::bicgstab(
            |x, out| problem.apply_jacobian(&parts, x, out),
            &b,
            &inv_diag,
            cfg.lin_rel_tol,
            cfg.lin_max_iter,
        )?;

        let mut alpha = 1.0f64;
        let mut accepted = None;
        for _ in 0..=cfg.max_halvings {
            let mut trial = u.clone();
            for j in 1..gr.n2 - 1 {
                for i in 1..gr.n1 - 1 {
                    let q = (j - 1) * w + (i - 1);
                    trial.set(i, j, u.get(i, j) + alpha * v[q]);
                }
            }
            match problem.residual(&trial, t, gfield) {
                Err(Error::Positivity { .. }) => {}
                Err(e) => return Err(e),
                Ok(p) => {
                    if p.sup < parts.sup {
                        accepted = Some((trial, p));
                        break;
                    }
                }
            }
            alpha *= 0.5;
        }
        let Some((trial, p)) = accepted else {
            return Err(Error::StageFailure {
                eps: eps_label,
                t,
                reason: format!(
                    "damping exhausted at residual {:e} after {iterations} iterations",
                    parts.sup
                ),
            });
        };
        u = trial;
        parts = p;
        history.push(parts.sup);
        iterations += 1;
    }

    Ok(StageOutcome {
        u,
        final_residual: parts.sup,
        iterations,
        residual_history: history,
    })
}

/// March the continuation parameter through `schedule`, warm-starting each
/// stage from the previous one. A failed stage is retried through bisection
/// of the t-interval (depth-limited), which is recorded as a warning.
fn march_t(
    problem: &PinnedProblem,
    u0: ScalarField2D,
    gfield: &ScalarField2D,
    schedule: &[f64],
    cfg: &ContinuationConfig,
    eps_label: f64,
    report: &mut SolveReport,
) -> Result<ScalarField2D> {
    let mut u = u0;
    let mut prev_t = schedule[0];
    for &t in schedule {
        u = stage_with_bisection(problem, u, prev_t, t, gfield, cfg, eps_label, report, 0)?;
        prev_t = t;
    }
    Ok(u)
}

#[allow(clippy::too_many_arguments)]
fn stage_with_bisection(
    problem: &PinnedProblem,
    u: ScalarField2D,
    t_from: f64,
    t: f64,
    gfield: &ScalarField2D,
    cfg: &ContinuationConfig,
    eps_label: f64,
    report: &mut SolveReport,
    depth: usize,
) -> Result<ScalarField2D> {
    match newton_stage(problem, &u, t, gfield, cfg, eps_label) {
        Ok(out) => {
            report.stages.push(StageRecord {
                epsilon: eps_label,
                t,
                iterations: out.iterations,
                final_residual: out.final_residual,
                residual_history: out.residual_history,
            });
            Ok(out.u)
        }
        Err(Error::StageFailure { .. }) if depth < 6 && t > t_from => {
            let mid = 0.5 * (t_from + t);
            report
                .warnings
                .push(format!("stage t = {t} retried through t = {mid}"));
            let u_mid =
                stage_with_bisection(problem, u, t_from, mid, gfield, cfg, eps_label, report, depth + 1)?;
            stage_with_bisection(problem, u_mid, mid, t, gfield, cfg, eps_label, report, depth + 1)
        }
        Err(e) => Err(e),
    }
}

fn uniform_schedule(steps: usize) -> Vec<f64> {
    let n = steps.max(2);
    (0..n).map(|k| k as f64 / (n - 1) as f64).collect()
}

/// Penalized continuation solve over the full epsilon schedule.
///
/// The first epsilon runs the t-continuation from the explicitly solvable
/// barrier seed. Later epsilons try a direct Newton solve at t = 1 from the
/// warm start; if the warm start has left the positive cone or the stage
/// fails, that epsilon falls back to a fresh t-march from its own seed.
pub fn continuation_solve(
    spec: &DomainSpec,
    g: Grid2D,
    cfg: &ContinuationConfig,
) -> Result<(ScalarField2D, SolveReport)> {
    assert!(!cfg.eps_schedule.is_empty(), "empty epsilon schedule");
    let penalty = build_penalty(spec, g)?;
    let phi = grid::sample(g, |x, y| spec.phi.eval(x, y))?;
    let ones = grid::sample(g, |_, _| 1.0)?;
    let mut report = SolveReport::default();
    if penalty.stray_negative_nodes > 0 {
        report.warnings.push(format!(
            "{} nodes with w < 0 outside the selected component; the penalty vanishes there",
            penalty.stray_negative_nodes
        ));
    }
    let t_schedule = uniform_schedule(cfg.t_steps);

    let mut u: Option<ScalarField2D> = None;
    for (k, &eps) in cfg.eps_schedule.iter().enumerate() {
        let problem = PinnedProblem {
            grid: g,
            phi: &phi,
            rho: &penalty.rho,
            eps_inv: 1.0 / eps,
            theta: cfg.theta,
        };
        let mut next = None;
        if let Some(prev) = u.take() {
            // warm start at the target equation directly
            match newton_stage(&problem, &prev, 1.0, &ones, cfg, eps) {
                Ok(out) => {
                    report.stages.push(StageRecord {
                        epsilon: eps,
                        t: 1.0,
                        iterations: out.iterations,
                        final_residual: out.final_residual,
                        residual_history: out.residual_history,
                    });
                    next = Some(out.u);
                }
                Err(Error::StageFailure { .. }) | Err(Error::Positivity { .. }) => {
                    report.warnings.push(format!(
                        "warm start rejected at eps = {eps}; rebuilt from the barrier seed"
                    ));
                }
                Err(e) => return Err(e),
            }
        }
        if next.is_none() {
            let gf = build_g_field(spec, g, &penalty, eps, cfg.theta)?;
            if k == 0 {
                report.c0 = gf.c0;
                report.k0 = gf.k0;
            }
            next = Some(march_t(
                &problem, gf.seed, &gf.g, &t_schedule, cfg, eps, &mut report,
            )?);
        }
        let cur = next.unwrap();
        let mut sup_pm = 0.0f64;
        let mut sup_mp = 0.0f64;
        for j in 0..g.n2 {
            for i in 0..g.n1 {
                if penalty.rho.get(i, j) > 0.0 {
                    let d = phi.get(i, j) - cur.get(i, j);
                    sup_pm = sup_pm.max(d);
                    sup_mp = sup_mp.max(-d);
                }
            }
        }
        report.eps_records.push(EpsRecord {
            epsilon: eps,
            sup_phi_minus_u_plus: sup_pm.max(0.0),
            sup_u_minus_phi_plus: sup_mp.max(0.0),
        });
        u = Some(cur);
    }

    let u = u.unwrap();
    finish_report(&u, Some(&penalty), &mut report);
    Ok((u, report))
}

/// Direct Dirichlet solve on the grid-aligned rectangle: boundary nodes are
/// pinned to phi and the penalty is off. The boundary data are normalized by
/// their corner bilinear interpolant first (the equation is invariant under
/// bilinear shifts, so this is a pure conditioning transform and makes the
/// discrete shear invariance exact by construction).
pub fn solve_rectangle(
    g: Grid2D,
    phi: &ScalarField2D,
    cfg: &ContinuationConfig,
) -> Result<(ScalarField2D, SolveReport)> {
    assert_eq!(phi.grid(), &g, "boundary data must live on the grid");
    let lx = g.xmax - g.xmin;
    let ly = g.ymax - g.ymin;
    let f00 = phi.get(0, 0);
    let f10 = phi.get(g.n1 - 1, 0);
    let f01 = phi.get(0, g.n2 - 1);
    let f11 = phi.get(g.n1 - 1, g.n2 - 1);
    let b10 = (f10 - f00) / lx;
    let b01 = (f01 - f00) / ly;
    let b11 = (f11 - f00 - b10 * lx - b01 * ly) / (lx * ly);
    let beta = |x: f64, y: f64| {
        f00 + b10 * (x - g.xmin) + b01 * (y - g.ymin) + b11 * (x - g.xmin) * (y - g.ymin)
    };

    let mut phit = ScalarField2D::zeros(g);
    for j in 0..g.n2 {
        for i in 0..g.n1 {
            let (x, y) = g.node(i, j);
            phit.set(i, j, phi.get(i, j) - beta(x, y));
        }
    }

    let zeros = ScalarField2D::zeros(g);
    let problem = PinnedProblem {
        grid: g,
        phi: &phit,
        rho: &zeros,
        eps_inv: 0.0,
        theta: cfg.theta,
    };

    // quadratic barrier seed under the pinned data
    let mut k0 = 1.0f64;
    for j in 0..g.n2 {
        for i in 0..g.n1 {
            if g.is_boundary(i, j) {
                let (x, y) = g.node(i, j);
                k0 = k0.max(0.5 * (x * x + y * y) - phit.get(i, j) + 1.0);
            }
        }
    }
    let mut seed = ScalarField2D::zeros(g);
    for j in 0..g.n2 {
        for i in 0..g.n1 {
            let (x, y) = g.node(i, j);
            let v = if g.is_boundary(i, j) {
                phit.get(i, j)
            } else {
                0.5 * (x * x + y * y) - k0
            };
            seed.set(i, j, v);
        }
    }
    let parts = problem.residual(&seed, 1.0, &grid::sample(g, |_, _| 1.0)?)?;
    let mut gfield = ScalarField2D::zeros(g);
    for j in 0..g.n2 {
        for i in 0..g.n1 {
            let v = if g.is_boundary(i, j) {
                1.0
            } else {
                parts.a1.get(i, j) * parts.a2.get(i, j)
            };
            gfield.set(i, j, v);
        }
    }

    let mut report = SolveReport::default();
    report.c0 = 1.0;
    report.k0 = k0;
    let t_schedule = uniform_schedule(cfg.t_steps);
    let ut = march_t(&problem, seed, &gfield, &t_schedule, cfg, f64::NAN, &mut report)?;

    let mut u = ScalarField2D::zeros(g);
    for j in 0..g.n2 {
        for i in 0..g.n1 {
            let (x, y) = g.node(i, j);
            u.set(i, j, ut.get(i, j) + beta(x, y));
        }
    }
    finish_report(&u, None, &mut report);
    Ok((u, report))
}

fn finish_report(u: &ScalarField2D, penalty: Option<&PenaltyField>, report: &mut SolveReport) {
    let g = *u.grid();
    let (pi, pj) = g.nearest(0.0, 0.5);
    let (mi, mj) = g.nearest(0.0, -0.5);
    let (ci, cj) = g.nearest(0.0, 0.0);
    report.strict_convexity_probe =
        u.get(pi, pj) + u.get(mi, mj) - 2.0 * u.get(ci, cj);
    let d11 = grid::d2_axis(u, Axis::X1);
    let d22 = grid::d2_axis(u, Axis::X2);
    let mut sup = 0.0f64;
    for j in 1..g.n2 - 1 {
        for i in 1..g.n1 - 1 {
            if let Some(p) = penalty {
                if !p.component[g.index(i, j)] {
                    continue;
                }
            }
            sup = sup.max(d11.get(i, j)).max(d22.get(i, j));
        }
    }
    report.interior_second_derivative_sup = sup;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::sup_diff;

    fn phi_field(g: Grid2D, phi: &PhiPoly) -> ScalarField2D {
        grid::sample(g, |x, y| phi.eval(x, y)).unwrap()
    }

    #[test]
    fn penalty_ramp_values() {
        let spec = DomainSpec::disk(PhiPoly::zero());
        let g = spec.grid(31, 31).unwrap();
        let p = build_penalty(&spec, g).unwrap();
        let (ci, cj) = g.nearest(0.0, 0.0);
        assert_eq!(p.rho.get(ci, cj), 0.0);
        assert!(p.component[g.index(ci, cj)]);
        // rho = 1/2 at w = delta/2, i.e. |x|^2 = 1.1 -> pointwise check
        let w_half = 1.0 + spec.delta / 2.0;
        let x = w_half.sqrt();
        let s = (x * x - 1.0) / spec.delta;
        let expected = s * s * (3.0 - 2.0 * s);
        assert!((expected - 0.5).abs() < 1e-12);
        // monotone along a ray where w increases
        let j = cj;
        let mut prev = -1.0;
        for i in ci..g.n1 {
            let v = p.rho.get(i, j);
            assert!(v >= prev - 1e-15);
            prev = v;
        }
        assert!(p.stray_negative_nodes == 0);
    }

    #[test]
    fn quartic_catalog_has_a_second_petal() {
        let spec = DomainSpec::quartic(PhiPoly::zero());
        let g = spec.grid(65, 65).unwrap();
        let p = build_penalty(&spec, g).unwrap();
        assert!(p.component.iter().filter(|&&b| b).count() > 100);
        // the mirror petal touches the origin, so some of it lies in the box
        assert!(p.stray_negative_nodes > 0);
    }

    #[test]
    fn empty_domain_is_an_error() {
        let spec = DomainSpec {
            kind: DomainKind::CustomQuadratic([1.0, 0.0, 0.0, 1.0, 0.0, 1.0]),
            seed_point: (0.0, 0.0),
            bbox: (-1.0, 1.0, -1.0, 1.0),
            delta: 0.1,
            phi: PhiPoly::zero(),
        };
        let g = spec.grid(17, 17).unwrap();
        assert!(matches!(build_penalty(&spec, g), Err(Error::EmptyDomain)));
    }

    #[test]
    fn residual_zero_on_quadratic_and_shear_invariant() {
        let g = Grid2D::square(-1.0, 1.0, 33).unwrap();
        let phi = phi_field(g, &PhiPoly([0.0, 0.0, 0.0, 0.5, 0.0, 0.5]));
        let zeros = ScalarField2D::zeros(g);
        let problem = PinnedProblem {
            grid: g,
            phi: &phi,
            rho: &zeros,
            eps_inv: 0.0,
            theta: 1e-12,
        };
        let ones = grid::sample(g, |_, _| 1.0).unwrap();
        let parts = problem.residual(&phi, 1.0, &ones).unwrap();
        assert_eq!(parts.sup, 0.0);
        // adding a shear leaves the interior residual unchanged where rho = 0
        let sheared = grid::sample(g, |x, y| 0.5 * (x * x + y * y) + 3.0 * x * y).unwrap();
        let phi2 = sheared.clone();
        let problem2 = PinnedProblem {
            grid: g,
            phi: &phi2,
            rho: &zeros,
            eps_inv: 0.0,
            theta: 1e-12,
        };
        let parts2 = problem2.residual(&sheared, 1.0, &ones).unwrap();
        for j in 1..g.n2 - 1 {
            for i in 1..g.n1 - 1 {
                assert!((parts2.f.get(i, j) - parts.f.get(i, j)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn positivity_error_names_the_worst_node() {
        let g = Grid2D::square(-1.0, 1.0, 17).unwrap();
        let phi = ScalarField2D::zeros(g);
        let zeros = ScalarField2D::zeros(g);
        let problem = PinnedProblem {
            grid: g,
            phi: &phi,
            rho: &zeros,
            eps_inv: 0.0,
            theta: 1e-12,
        };
        let concave = grid::sample(g, |x, y| -(x * x) - y * y).unwrap();
        let ones = grid::sample(g, |_, _| 1.0).unwrap();
        assert!(matches!(
            problem.residual(&concave, 1.0, &ones),
            Err(Error::Positivity { .. })
        ));
    }

    #[test]
    fn g_field_floor_and_exact_seed_residual() {
        let spec = DomainSpec::disk(PhiPoly([0.0, 0.0, 0.0, 0.5, 0.0, 0.5]));
        let g = spec.grid(33, 33).unwrap();
        let penalty = build_penalty(&spec, g).unwrap();
        let gf = build_g_field(&spec, g, &penalty, 1.0, 1e-12).unwrap();
        for j in 1..g.n2 - 1 {
            for i in 1..g.n1 - 1 {
                assert!(gf.g.get(i, j) >= 1.05);
            }
        }
        let phi = phi_field(g, &spec.phi);
        let problem = PinnedProblem {
            grid: g,
            phi: &phi,
            rho: &penalty.rho,
            eps_inv: 1.0,
            theta: 1e-12,
        };
        let parts = problem.residual(&gf.seed, 0.0, &gf.g).unwrap();
        assert!(parts.sup < 1e-12, "seed residual {}", parts.sup);
        // with the penalty off, g is the product of the seed's pure second
        // differences, bounded below by (C0 c)^2 away from the boundary ring
        let c = spec.convexity_constant(g).unwrap();
        let floor = (gf.c0 * c) * (gf.c0 * c);
        for j in 2..g.n2 - 2 {
            for i in 2..g.n1 - 2 {
                if penalty.rho.get(i, j) == 0.0 {
                    assert!(gf.g.get(i, j) >= floor - 1e-9);
                }
            }
        }
    }

    #[test]
    fn newton_stage_zero_iterations_on_exact_seed() {
        let spec = DomainSpec::disk(PhiPoly([0.0, 0.0, 0.0, 0.5, 0.0, 0.5]));
        let g = spec.grid(33, 33).unwrap();
        let penalty = build_penalty(&spec, g).unwrap();
        let gf = build_g_field(&spec, g, &penalty, 1.0, 1e-12).unwrap();
        let phi = phi_field(g, &spec.phi);
        let problem = PinnedProblem {
            grid: g,
            phi: &phi,
            rho: &penalty.rho,
            eps_inv: 1.0,
            theta: 1e-12,
        };
        let cfg = ContinuationConfig::default();
        let out = newton_stage(&problem, &gf.seed, 0.0, &gf.g, &cfg, 1.0).unwrap();
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn rectangle_recovers_quadratics_exactly() {
        let g = Grid2D::square(-1.0, 1.0, 33).unwrap();
        let cfg = ContinuationConfig::default();
        for (a, b) in [(1.0, 0.0), (2.0, 0.0), (1.0, 3.0)] {
            let exact = grid::sample(g, |x, y| {
                0.5 * a * x * x + 0.5 * y * y / a + b * x * y
            })
            .unwrap();
            let (u, _) = solve_rectangle(g, &exact, &cfg).unwrap();
            let err = sup_diff(&u, &exact, Region::All);
            assert!(err <= 1e-9, "(a,b) = ({a},{b}): {err}");
        }
    }

    #[test]
    fn rectangle_newton_tail_is_quadratic() {
        let g = Grid2D::square(-1.0, 1.0, 65).unwrap();
        let cfg = ContinuationConfig::default();
        let exact = grid::sample(g, |x, y| 0.5 * (x * x + y * y)).unwrap();
        let (_, report) = solve_rectangle(g, &exact, &cfg).unwrap();
        // quadratic contraction is observable between 1e-3 and the linear
        // solver floor
        let mut seen = false;
        for rec in &report.stages {
            let h = &rec.residual_history;
            for k in 0..h.len().saturating_sub(1) {
                if h[k] < 1e-3 && h[k + 1] > 5e-12 {
                    assert!(
                        h[k + 1] <= 10.0 * h[k] * h[k],
                        "tail {} -> {}",
                        h[k],
                        h[k + 1]
                    );
                    seen = true;
                }
            }
        }
        assert!(seen, "no sub-1e-3 iteration pair observed");
    }

    #[test]
    fn rectangle_discrete_comparison_principle() {
        let g = Grid2D::square(-1.0, 1.0, 33).unwrap();
        let cfg = ContinuationConfig::default();
        let lo = grid::sample(g, |x, y| 0.5 * (x * x + y * y)).unwrap();
        let hi = grid::sample(g, |x, y| 0.5 * (x * x + y * y) + 0.3 * (x * x + 0.1)).unwrap();
        let (ulo, _) = solve_rectangle(g, &lo, &cfg).unwrap();
        let (uhi, _) = solve_rectangle(g, &hi, &cfg).unwrap();
        for j in 0..g.n2 {
            for i in 0..g.n1 {
                assert!(ulo.get(i, j) <= uhi.get(i, j) + 1e-9);
            }
        }
    }

    #[test]
    fn warm_start_independence() {
        let g = Grid2D::square(-1.0, 1.0, 33).unwrap();
        let cfg = ContinuationConfig::default();
        let phi = grid::sample(g, |x, y| 0.5 * (x * x + y * y) + 0.2 * x).unwrap();
        let (u1, _) = solve_rectangle(g, &phi, &cfg).unwrap();
        // the same data through the penalized machinery with a perturbed seed:
        // run the t-march by hand from seed + bump
        let zeros = ScalarField2D::zeros(g);
        let problem = PinnedProblem {
            grid: g,
            phi: &phi,
            rho: &zeros,
            eps_inv: 0.0,
            theta: cfg.theta,
        };
        let mut k0 = 1.0f64;
        for j in 0..g.n2 {
            for i in 0..g.n1 {
                if g.is_boundary(i, j) {
                    let (x, y) = g.node(i, j);
                    k0 = k0.max(0.5 * (x * x + y * y) - phi.get(i, j) + 1.0);
                }
            }
        }
        let mut seed = ScalarField2D::zeros(g);
        for j in 0..g.n2 {
            for i in 0..g.n1 {
                let (x, y) = g.node(i, j);
                let v = if g.is_boundary(i, j) {
                    phi.get(i, j)
                } else {
                    0.5 * (x * x + y * y) - k0 + 0.05 * (1.0 - x * x) * (1.0 - y * y)
                };
                seed.set(i, j, v);
            }
        }
        // g-field built from the unperturbed seed: the perturbed start must
        // land on the same discrete solution
        let mut clean = seed.clone();
        for j in 1..g.n2 - 1 {
            for i in 1..g.n1 - 1 {
                let (x, y) = g.node(i, j);
                clean.set(i, j, 0.5 * (x * x + y * y) - k0);
            }
        }
        let ones = grid::sample(g, |_, _| 1.0).unwrap();
        let parts = problem.residual(&clean, 1.0, &ones).unwrap();
        let mut gfield = ScalarField2D::zeros(g);
        for j in 0..g.n2 {
            for i in 0..g.n1 {
                let v = if g.is_boundary(i, j) {
                    1.0
                } else {
                    parts.a1.get(i, j) * parts.a2.get(i, j)
                };
                gfield.set(i, j, v);
            }
        }
        let mut report = SolveReport::default();
        let schedule = uniform_schedule(cfg.t_steps);
        let u2 = march_t(&problem, seed, &gfield, &schedule, &cfg, 1.0, &mut report).unwrap();
        let err = sup_diff(&u1, &u2, Region::All);
        assert!(err <= 1e-8, "seed dependence {err}");
    }

    #[test]
    fn penalized_disk_manufactured_quadratic_sits_below_u() {
        // phi with phi_11 phi_22 = 1 is a global subsolution barrier: the
        // discrete maximum principle forces u >= phi everywhere, so the
        // one-sided gap (phi - u)^+ is identically zero
        let spec = DomainSpec::disk(PhiPoly([0.0, 0.0, 0.0, 0.5, 0.0, 0.5]));
        let g = spec.grid(33, 33).unwrap();
        let cfg = ContinuationConfig {
            eps_schedule: vec![1.0, 0.3, 0.1],
            ..Default::default()
        };
        let (u, report) = continuation_solve(&spec, g, &cfg).unwrap();
        for r in &report.eps_records {
            assert!(r.sup_phi_minus_u_plus <= 1e-9, "{r:?}");
        }
        // interior values approach the manufactured quadratic
        let phi = phi_field(g, &spec.phi);
        let mut sup = 0.0f64;
        let penalty = build_penalty(&spec, g).unwrap();
        for j in 0..g.n2 {
            for i in 0..g.n1 {
                if penalty.component[g.index(i, j)] {
                    sup = sup.max((u.get(i, j) - phi.get(i, j)).abs());
                }
            }
        }
        assert!(sup < 0.2, "interior deviation {sup}");
        assert!(report.strict_convexity_probe > 0.0);
    }

    #[test]
    fn penalized_disk_subunit_quadratic_undershoots_and_converges() {
        // phi = 0.4 |x|^2 has Hessian product 0.64 < 1, so outside the disk
        // the solution sits below phi by ~0.2 eps; the gap must shrink
        // strictly along the schedule. Inside, the constant boundary trace
        // gives the exact solution |x|^2/2 - 0.1.
        let spec = DomainSpec::disk(PhiPoly([0.0, 0.0, 0.0, 0.4, 0.0, 0.4]));
        let g = spec.grid(33, 33).unwrap();
        let cfg = ContinuationConfig {
            eps_schedule: vec![1.0, 0.3, 0.1],
            ..Default::default()
        };
        let (u, report) = continuation_solve(&spec, g, &cfg).unwrap();
        let sups: Vec<f64> = report
            .eps_records
            .iter()
            .map(|r| r.sup_phi_minus_u_plus)
            .collect();
        assert!(sups[0] > sups[1] && sups[1] > sups[2], "{sups:?}");
        assert!(sups[2] > 0.0);
        let oracle = grid::sample(g, |x, y| 0.5 * (x * x + y * y) - 0.1).unwrap();
        let penalty = build_penalty(&spec, g).unwrap();
        let mut sup = 0.0f64;
        for j in 0..g.n2 {
            for i in 0..g.n1 {
                if penalty.component[g.index(i, j)] {
                    sup = sup.max((u.get(i, j) - oracle.get(i, j)).abs());
                }
            }
        }
        // at eps = 0.1 the boundary mismatch ~0.2*eps dominates
        assert!(sup < 0.1, "interior deviation {sup}");
    }
}
