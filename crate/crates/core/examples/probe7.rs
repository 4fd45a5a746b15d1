use hessprod::dirichlet::*;
use hessprod::exact2d::{box_solution, BoxProfile, EntireProfile};
use hessprod::grid::{self, Grid2D, Region, ScalarField2D};
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    let cfg = ContinuationConfig::default();
    let p = EntireProfile::new().unwrap();

    // criterion 5: entire-product boundary data
    let mut errs = Vec::new();
    for n in [33usize, 65, 129] {
        let g = Grid2D::square(-1.0, 1.0, n).unwrap();
        let phi = grid::sample(g, |x, y| p.eval(x).unwrap().0 * p.eval(y).unwrap().0).unwrap();
        let t = Instant::now();
        let (u, _) = solve_rectangle(g, &phi, &cfg).unwrap();
        errs.push(grid::sup_diff(&u, &phi, Region::Interior));
        println!("C5 n={n}: err={:e}  ({:?})", errs.last().unwrap(), t.elapsed());
    }
    println!("C5 ratios: {} {}", errs[0]/errs[1], errs[1]/errs[2]);

    // criterion 6: zero boundary data vs box oracle
    let bp = BoxProfile::new().unwrap();
    let sub = Region::SubRect { x1min: -0.5, x1max: 0.5, x2min: -0.5, x2max: 0.5 };
    for n in [33usize, 65, 129] {
        let g = Grid2D::square(-1.0, 1.0, n).unwrap();
        let (u, r) = solve_rectangle(g, &ScalarField2D::zeros(g), &cfg).unwrap();
        let oracle = grid::sample(g, |x, y| box_solution(&bp, x, y).unwrap().value).unwrap();
        println!("C6 n={n}: err={:e} probe={:e}", grid::sup_diff(&u, &oracle, sub), r.strict_convexity_probe);
    }

    // criterion 7: disk with phi = 0.4|x|^2 (strict decrease + oracle) and 0.5|x|^2
    for (c, oracle_shift) in [(0.4, -0.1), (0.5, 0.0)] {
        for n in [65usize, 129] {
            let spec = DomainSpec::disk(PhiPoly([0.0, 0.0, 0.0, c, 0.0, c]));
            let g = spec.grid(n, n).unwrap();
            let t = Instant::now();
            let (u, rep) = continuation_solve(&spec, g, &cfg).unwrap();
            let pen = build_penalty(&spec, g).unwrap();
            let oracle = grid::sample(g, |x, y| 0.5*(x*x + y*y) + oracle_shift).unwrap();
            let mut sup = 0.0f64;
            for j in 0..g.n2 { for i in 0..g.n1 {
                if pen.component[g.index(i, j)] {
                    sup = sup.max((u.get(i, j) - oracle.get(i, j)).abs());
                }
            }}
            let sups: Vec<String> = rep.eps_records.iter().map(|r| format!("{:.3e}", r.sup_phi_minus_u_plus)).collect();
            println!("C7 c={c} n={n}: interior_err={sup:e} gaps={sups:?} warn={} ({:?})", rep.warnings.len(), t.elapsed());
        }
    }
    println!("total: {:?}", t0.elapsed());
}
