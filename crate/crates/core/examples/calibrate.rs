//! Prints the derived constants that the test suite freezes as regression
//! baselines, so they can be re-measured after an algorithm change.

use hessprod::exact2d::{pogorelov_monitor, EntireProfile, MonitorParams};
use hessprod::grid::{sample, Grid2D};
use hessprod::singular3d::{
    find_lambda0, linearized_residual, solve_g1_stored, SingularConfig, SingularProfile,
};

fn main() {
    let traj = solve_g1_stored(12.0, 1e-4, 10).unwrap();
    let lambda0 = find_lambda0(&traj).unwrap();
    println!("lambda0              = {lambda0:.15}");
    let k10 = ((10.0 - traj.t0) / traj.dt).round() as usize;
    println!("g1(10)               = {:.15}", traj.states[k10][0]);
    println!("g1'(10)              = {:.15}", traj.states[k10][1]);
    println!("lin residual (1e-3)  = {:e}", linearized_residual(&traj, lambda0).unwrap());

    let p = SingularProfile::build(SingularConfig::default()).unwrap();
    println!("profile t_end        = {}", p.t_end());
    let a_analytic = lambda0.powf(-2.0 / 3.0);
    let (_, _, d2g0) = p.g_eval(0.0).unwrap();
    println!("a = lambda0^(-2/3)   = {a_analytic:.15}");
    println!("b = g''(0)/2         = {:.15}", d2g0 / 2.0);
    for &t in &[1e2, 1e3, 1e4] {
        // far field through the gluing extension
        let (g_small, _, _) = p.g_eval(1.0 / t).unwrap();
        let a_est = g_small;
        let b_est = (g_small - a_analytic) * t * t;
        println!("  t = {t:>7e}: a_est = {a_est:.12}  b_est = {b_est:.12}");
    }

    // monitor baseline on the entire product over the unit square
    let prof = EntireProfile::new().unwrap();
    for n in [65usize, 129] {
        let g = Grid2D::square(-1.0, 1.0, n).unwrap();
        let u = sample(g, |x, y| {
            prof.eval(x).unwrap().0 * prof.eval(y).unwrap().0
        })
        .unwrap();
        let m = pogorelov_monitor(&u, MonitorParams::default()).unwrap();
        println!(
            "monitor sup eta^2 u11^2 (n = {n:>3}) = {:.12} (A = {:.6})",
            m.sup_eta2_u11_sq, m.a_used
        );
    }
}
