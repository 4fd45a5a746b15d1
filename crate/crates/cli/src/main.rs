//! Command-line surface: exact profiles, the barrier, the singular 3-D
//! pipeline, the Dirichlet solvers, and the verification suite.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure.

mod config;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hessprod::dirichlet::{continuation_solve, solve_rectangle};
use hessprod::error::Error;
use hessprod::exact2d::{strict_convexity_barrier, BoxProfile, EntireProfile};
use hessprod::grid::{self, Region};
use hessprod::singular3d::{SingularConfig, SingularSolution};
use hessprod::verify;

use config::{parse_config, RunKind};
use report::{field_csv, fmt, report_text, write_file, Csv};

#[derive(Parser)]
#[command(
    name = "hessprod",
    about = "Exact solutions, singular examples and Dirichlet solvers for the equation u11*u22 = 1"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Tabulate the entire product profile f (f f'' = 1) over a range.
    Entire {
        /// Sample range A:B
        #[arg(long, default_value = "-20:20", allow_hyphen_values = true)]
        range: String,
        #[arg(long, default_value_t = 1001)]
        samples: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Tabulate the vanishing-boundary box profile g (g g'' = -1).
    #[command(name = "box")]
    BoxCmd {
        #[arg(long, default_value_t = 1001)]
        samples: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Sample the strict-convexity barrier and check its Hessian bound.
    Barrier {
        /// Comma list of barrier amplitudes
        #[arg(long, default_value = "0.1,0.01")]
        lambda: String,
        /// Sample count per axis
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run the full singular 3-D pipeline and sample the glued solution.
    Singular3d {
        /// Lattice nodes per axis for the sampled field
        #[arg(long, default_value_t = 11)]
        samples: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Solve a Dirichlet problem described by a flat key-value config file.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Overrides output.dir from the config
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the verification suite (selector: all|residual|linearized|scaling|comparison|barrier).
    Verify {
        #[arg(default_value = "all")]
        selector: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Entire {
            range,
            samples,
            out,
        } => cmd_entire(&range, samples, &out),
        Cmd::BoxCmd { samples, out } => cmd_box(samples, &out),
        Cmd::Barrier {
            lambda,
            samples,
            out,
        } => cmd_barrier(&lambda, samples, &out),
        Cmd::Singular3d { samples, out } => cmd_singular3d(samples, &out),
        Cmd::Solve { config, out } => cmd_solve(&config, out.as_deref()),
        Cmd::Verify {
            selector,
            seed,
            out,
        } => cmd_verify(&selector, seed, &out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::InvalidGrid { .. } => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}

fn parse_range(range: &str) -> Result<(f64, f64), Error> {
    let parts: Vec<&str> = range.splitn(2, ':').collect();
    if parts.len() != 2 {
        return Err(Error::Config(format!("range '{range}' is not of the form A:B")));
    }
    let a: f64 = parts[0]
        .parse()
        .map_err(|_| Error::Config(format!("range start '{}' is not a number", parts[0])))?;
    let b: f64 = parts[1]
        .parse()
        .map_err(|_| Error::Config(format!("range end '{}' is not a number", parts[1])))?;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::Config(format!("range '{range}' is empty or not finite")));
    }
    Ok((a, b))
}

fn io_err(e: std::io::Error) -> Error {
    Error::Config(format!("i/o failure: {e}"))
}

fn cmd_entire(range: &str, samples: usize, out: &Path) -> Result<ExitCode, Error> {
    let (a, b) = parse_range(range)?;
    if samples < 2 {
        return Err(Error::Config("need at least 2 samples".to_string()));
    }
    let p = EntireProfile::new()?;
    let mut csv = Csv::new("s,f,f1,f2,residual");
    for k in 0..samples {
        let s = a + (b - a) * k as f64 / (samples - 1) as f64;
        let (f, f1, f2) = p.eval(s)?;
        csv.row(&[s, f, f1, f2, f * f2 - 1.0]);
    }
    write_file(&out.join("entire.csv"), &csv.finish()).map_err(io_err)?;
    println!("entire profile: {samples} samples on [{a},{b}] -> {}", out.join("entire.csv").display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_box(samples: usize, out: &Path) -> Result<ExitCode, Error> {
    if samples < 2 {
        return Err(Error::Config("need at least 2 samples".to_string()));
    }
    let p = BoxProfile::new()?;
    let mut csv = Csv::new("x,g,g1,g2,residual");
    for k in 0..samples {
        let x = -1.0 + 2.0 * k as f64 / (samples - 1) as f64;
        let (g, g1, g2) = p.eval(x)?;
        csv.row(&[x, g, g1, g2, g * g2 + 1.0]);
    }
    write_file(&out.join("box.csv"), &csv.finish()).map_err(io_err)?;
    let mut summary = String::new();
    summary.push_str(&format!("lambda0 = {}\n", fmt(p.lambda0())));
    summary.push_str(&format!(
        "center_value = {}\n",
        fmt(-1.0 / (p.lambda0() * p.lambda0()))
    ));
    write_file(&out.join("box_summary.txt"), &summary).map_err(io_err)?;
    println!("box profile: lambda0 = {}", p.lambda0());
    Ok(ExitCode::SUCCESS)
}

fn cmd_barrier(lambdas: &str, samples: usize, out: &Path) -> Result<ExitCode, Error> {
    let mut all_pass = true;
    let mut records = String::new();
    for part in lambdas.split(',') {
        let lambda: f64 = part
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("lambda '{part}' is not a number")))?;
        if !(lambda > 0.0) {
            return Err(Error::Config("lambda must be positive".to_string()));
        }
        for c in verify::barrier_bound_check(lambda, samples)? {
            all_pass &= c.pass;
            records.push_str(&check_line(&c));
        }
        // coarse sample of the barrier surface for plotting
        let mut csv = Csv::new("x1,x2,g,g11,g22,product");
        let n = 101usize;
        for a in 0..n {
            for b in 0..n {
                let x1 = 0.25 * (a as f64 + 0.5) / n as f64;
                let x2 = -0.5 + (b as f64 + 0.5) / n as f64;
                let jet = strict_convexity_barrier(lambda, x1, x2)?;
                csv.row(&[
                    x1,
                    x2,
                    jet.value,
                    jet.hess[0],
                    jet.hess[2],
                    jet.hess_product(),
                ]);
            }
        }
        write_file(&out.join(format!("barrier_{lambda}.csv")), &csv.finish()).map_err(io_err)?;
    }
    write_file(&out.join("barrier_checks.txt"), &records).map_err(io_err)?;
    print!("{records}");
    Ok(if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_singular3d(samples: usize, out: &Path) -> Result<ExitCode, Error> {
    let sol = SingularSolution::build(SingularConfig::default())?;
    let lambda0 = sol.lambda0();

    // profile table on the matched interval
    let mut csv = Csv::new("t,g,g1,g2");
    for k in 0..=1000 {
        let t = k as f64 / 1000.0;
        let (g, g1, g2) = sol.profile.g_eval(t)?;
        csv.row(&[t, g, g1, g2]);
    }
    write_file(&out.join("g_profile.csv"), &csv.finish()).map_err(io_err)?;

    // gluing identity sup over [1, 100]
    let mut gluing_sup = 0.0f64;
    for k in 0..=1000 {
        let t = 10f64.powf(2.0 * k as f64 / 1000.0);
        let (g, _, _) = sol.profile.g_eval(t)?;
        let (gr, _, _) = sol.profile.g_eval(1.0 / t)?;
        gluing_sup = gluing_sup.max((g - t.powf(4.0 / 3.0) * gr).abs());
    }

    // sampled field and off-axis Hessian products on a cube lattice
    let n = samples.max(2);
    let coord = |k: usize| -2.0 + 4.0 * k as f64 / (n - 1) as f64;
    let mut field = Csv::new("x1,x2,x3,u");
    let mut hess = Csv::new("x1,x2,x3,u11,u22,u33,product");
    let mut residual_sup = 0.0f64;
    let mut off_axis = 0usize;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let (x1, x2, x3) = (coord(a), coord(b), coord(c));
                let p = sol.u3d(x1, x2, x3)?;
                field.row(&[x1, x2, x3, p.value]);
                if let Some(h) = p.hess_diag {
                    let prod = h[0] * h[1] * h[2];
                    hess.row(&[x1, x2, x3, h[0], h[1], h[2], prod]);
                    residual_sup = residual_sup.max((prod - 1.0).abs());
                    off_axis += 1;
                }
            }
        }
    }
    write_file(&out.join("u3d_field.csv"), &field.finish()).map_err(io_err)?;
    write_file(&out.join("u3d_hessian.csv"), &hess.finish()).map_err(io_err)?;

    let (g0, dg0, _) = sol.profile.g1_eval(0.0)?;
    let h1_at_zero = 0.0 * dg0 - (2.0 / 3.0) * g0;
    let mut summary = String::new();
    summary.push_str(&format!("lambda0 = {}\n", fmt(lambda0)));
    summary.push_str(&format!("h1_at_zero = {}\n", fmt(h1_at_zero)));
    summary.push_str(&format!("gluing_sup = {}\n", fmt(gluing_sup)));
    summary.push_str(&format!("lattice_residual_sup = {}\n", fmt(residual_sup)));
    summary.push_str(&format!("lattice_offaxis_nodes = {off_axis}\n"));
    write_file(&out.join("singular3d_summary.txt"), &summary).map_err(io_err)?;
    print!("{summary}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_solve(config_path: &Path, out_override: Option<&Path>) -> Result<ExitCode, Error> {
    let text = std::fs::read_to_string(config_path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", config_path.display())))?;
    let run = parse_config(&text).map_err(Error::Config)?;
    let out: PathBuf = out_override
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from(&run.output_dir));

    let g = run.grid;
    let phi_field = grid::sample(g, |x, y| run.phi.eval(x, y))?;
    let (u, solve_report, kind_label) = match &run.kind {
        RunKind::Rectangle => {
            let (u, r) = solve_rectangle(g, &phi_field, &run.continuation)?;
            (u, r, "rectangle")
        }
        RunKind::Penalized(spec) => {
            let (u, r) = continuation_solve(spec, g, &run.continuation)?;
            (u, r, "penalized")
        }
    };

    let mut extra = vec![
        ("run.kind".to_string(), kind_label.to_string()),
        ("grid.n1".to_string(), g.n1.to_string()),
        ("grid.n2".to_string(), g.n2.to_string()),
        ("seed".to_string(), run.seed.to_string()),
    ];
    if matches!(run.kind, RunKind::Rectangle) {
        let dev = grid::sup_diff(&u, &phi_field, Region::All);
        extra.push(("sup_dev_from_data_polynomial".to_string(), fmt(dev)));
    }

    write_file(&out.join("field.csv"), &field_csv(&u)).map_err(io_err)?;
    write_file(&out.join("report.txt"), &report_text(&solve_report, &extra)).map_err(io_err)?;
    println!(
        "solve ({kind_label}): {} stages, probe = {}",
        solve_report.stages.len(),
        solve_report.strict_convexity_probe
    );
    Ok(ExitCode::SUCCESS)
}

fn check_line(c: &verify::CheckResult) -> String {
    let dir = match c.polarity {
        verify::Polarity::AtMost => "<=",
        verify::Polarity::AtLeast => ">=",
    };
    let seed = c
        .seed
        .map(|s| format!(" seed={s}"))
        .unwrap_or_default();
    format!(
        "check {}: {} measured={} {} {}{} ({})\n",
        c.name,
        if c.pass { "PASS" } else { "FAIL" },
        fmt(c.measured),
        dir,
        fmt(c.threshold),
        seed,
        c.note
    )
}

fn cmd_verify(selector: &str, seed: Option<u64>, out: &Path) -> Result<ExitCode, Error> {
    let seed = seed.unwrap_or(verify::DEFAULT_PROBE_SEED);
    let checks = verify::run_suite(selector, seed)?;
    let mut text = String::new();
    let mut all_pass = true;
    for c in &checks {
        all_pass &= c.pass;
        text.push_str(&check_line(c));
    }
    write_file(&out.join("verify.txt"), &text).map_err(io_err)?;
    print!("{text}");
    Ok(if all_pass {
        ExitCode::SUCCESS
    } else {
        println!("verification FAILED");
        ExitCode::from(1)
    })
}
