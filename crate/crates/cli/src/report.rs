//! CSV and flat-record serialization: '.' decimal, '\n' line endings,
//! 17 significant digits, fixed traversal order.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use hessprod::dirichlet::SolveReport;
use hessprod::grid::{self, Axis, ScalarField2D};

/// 17 significant digits, locale-independent.
pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_file(path: &Path, contents: &str) -> std::io::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut f = fs::File::create(path)?;
    f.write_all(contents.as_bytes())
}

/// Rows of f64 columns under a header line.
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &str) -> Self {
        let mut buf = String::new();
        buf.push_str(header);
        buf.push('\n');
        Csv { buf }
    }

    pub fn row(&mut self, values: &[f64]) {
        for (k, v) in values.iter().enumerate() {
            if k > 0 {
                self.buf.push(',');
            }
            let _ = write!(self.buf, "{v:.16e}");
        }
        self.buf.push('\n');
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

/// Solution field as x1,x2,u,u11,u22,residual in row-major order with the
/// x1 index fastest. Boundary rows carry the flagged one-sided difference
/// copies.
pub fn field_csv(u: &ScalarField2D) -> String {
    let g = *u.grid();
    let d11 = grid::d2_axis(u, Axis::X1);
    let d22 = grid::d2_axis(u, Axis::X2);
    let mut csv = Csv::new("x1,x2,u,u11,u22,residual");
    for j in 0..g.n2 {
        for i in 0..g.n1 {
            let (x, y) = g.node(i, j);
            let a = d11.get(i, j);
            let b = d22.get(i, j);
            csv.row(&[x, y, u.get(i, j), a, b, a * b - 1.0]);
        }
    }
    csv.finish()
}

/// Flat one-key-per-line record of a solve.
pub fn report_text(report: &SolveReport, extra: &[(String, String)]) -> String {
    let mut out = String::new();
    for (k, v) in extra {
        let _ = writeln!(out, "{k} = {v}");
    }
    let _ = writeln!(out, "stages.count = {}", report.stages.len());
    for (k, s) in report.stages.iter().enumerate() {
        let _ = writeln!(out, "stage.{k}.epsilon = {}", fmt(s.epsilon));
        let _ = writeln!(out, "stage.{k}.t = {}", fmt(s.t));
        let _ = writeln!(out, "stage.{k}.iterations = {}", s.iterations);
        let _ = writeln!(out, "stage.{k}.residual = {}", fmt(s.final_residual));
    }
    for (k, r) in report.eps_records.iter().enumerate() {
        let _ = writeln!(out, "eps.{k}.epsilon = {}", fmt(r.epsilon));
        let _ = writeln!(
            out,
            "eps.{k}.sup_phi_minus_u_plus = {}",
            fmt(r.sup_phi_minus_u_plus)
        );
        let _ = writeln!(
            out,
            "eps.{k}.sup_u_minus_phi_plus = {}",
            fmt(r.sup_u_minus_phi_plus)
        );
    }
    if let Some(last) = report.eps_records.last() {
        let _ = writeln!(
            out,
            "final.sup_phi_minus_u_plus = {}",
            fmt(last.sup_phi_minus_u_plus)
        );
    }
    let _ = writeln!(
        out,
        "strict_convexity_probe = {}",
        fmt(report.strict_convexity_probe)
    );
    let _ = writeln!(
        out,
        "interior_second_derivative_sup = {}",
        fmt(report.interior_second_derivative_sup)
    );
    let _ = writeln!(out, "barrier.c0 = {}", fmt(report.c0));
    let _ = writeln!(out, "barrier.k0 = {}", fmt(report.k0));
    let _ = writeln!(out, "warnings.count = {}", report.warnings.len());
    for (k, w) in report.warnings.iter().enumerate() {
        let _ = writeln!(out, "warning.{k} = {w}");
    }
    out
}
