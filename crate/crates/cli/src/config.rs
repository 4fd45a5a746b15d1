//! Flat key-value run configuration: every option is a scalar or a comma
//! list, unknown keys are rejected, and schedules must be monotone.

use hessprod::dirichlet::{ContinuationConfig, DomainKind, DomainSpec, PhiPoly};
use hessprod::grid::Grid2D;

/// What the solve subcommand should run.
pub enum RunKind {
    Rectangle,
    Penalized(DomainSpec),
}

pub struct RunConfig {
    pub kind: RunKind,
    pub grid: Grid2D,
    pub phi: PhiPoly,
    pub continuation: ContinuationConfig,
    pub output_dir: String,
    pub seed: u64,
}

const KNOWN_KEYS: [&str; 14] = [
    "domain.kind",
    "domain.params",
    "domain.seed_point",
    "boundary.phi",
    "grid.n1",
    "grid.n2",
    "box.bounds",
    "penalty.delta",
    "schedule.epsilon",
    "schedule.t_steps",
    "newton.tol",
    "newton.max_iter",
    "output.dir",
    "seed",
];

fn parse_f64(key: &str, v: &str) -> Result<f64, String> {
    let x: f64 = v
        .trim()
        .parse()
        .map_err(|_| format!("{key}: '{v}' is not a number"))?;
    if !x.is_finite() {
        return Err(format!("{key}: value must be finite, got {x}"));
    }
    Ok(x)
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>, String> {
    v.split(',').map(|p| parse_f64(key, p)).collect()
}

fn parse_usize(key: &str, v: &str) -> Result<usize, String> {
    v.trim()
        .parse()
        .map_err(|_| format!("{key}: '{v}' is not a nonnegative integer"))
}

pub fn parse_config(text: &str) -> Result<RunConfig, String> {
    let mut kv = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(format!("line {}: expected 'key = value'", lineno + 1));
        };
        let key = k.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(format!("unknown key '{key}'"));
        }
        if kv.iter().any(|(ek, _)| *ek == key) {
            return Err(format!("duplicate key '{key}'"));
        }
        kv.push((key, v.trim().to_string()));
    }
    let get = |key: &str| kv.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());

    let kind_str = get("domain.kind").unwrap_or("rectangle");
    let bounds = match get("box.bounds") {
        Some(v) => {
            let b = parse_list("box.bounds", v)?;
            if b.len() != 4 {
                return Err("box.bounds: expected xmin,xmax,ymin,ymax".to_string());
            }
            Some((b[0], b[1], b[2], b[3]))
        }
        None => None,
    };
    let n1 = match get("grid.n1") {
        Some(v) => parse_usize("grid.n1", v)?,
        None => 65,
    };
    let n2 = match get("grid.n2") {
        Some(v) => parse_usize("grid.n2", v)?,
        None => n1,
    };
    if n1 < 3 || n2 < 3 {
        return Err("grid.n1/grid.n2: need at least 3 nodes per axis".to_string());
    }

    let phi = match get("boundary.phi") {
        None | Some("zero") => PhiPoly::zero(),
        Some(v) => {
            let c = parse_list("boundary.phi", v)?;
            if c.len() != 6 {
                return Err(
                    "boundary.phi: expected 6 coefficients [1, x1, x2, x1^2, x1*x2, x2^2] or 'zero'"
                        .to_string(),
                );
            }
            PhiPoly([c[0], c[1], c[2], c[3], c[4], c[5]])
        }
    };

    let mut continuation = ContinuationConfig::default();
    if let Some(v) = get("schedule.epsilon") {
        let eps = parse_list("schedule.epsilon", v)?;
        if eps.is_empty() || eps.iter().any(|e| *e <= 0.0) {
            return Err("schedule.epsilon: need positive entries".to_string());
        }
        if eps.windows(2).any(|w| w[1] >= w[0]) {
            return Err("schedule.epsilon: must be strictly decreasing".to_string());
        }
        continuation.eps_schedule = eps;
    }
    if let Some(v) = get("schedule.t_steps") {
        let steps = parse_usize("schedule.t_steps", v)?;
        if steps < 2 {
            return Err("schedule.t_steps: need at least 2".to_string());
        }
        continuation.t_steps = steps;
    }
    if let Some(v) = get("newton.tol") {
        let tol = parse_f64("newton.tol", v)?;
        if tol <= 0.0 {
            return Err("newton.tol: must be positive".to_string());
        }
        continuation.newton_tol = tol;
    }
    if let Some(v) = get("newton.max_iter") {
        continuation.max_newton = parse_usize("newton.max_iter", v)?;
    }

    let delta = match get("penalty.delta") {
        Some(v) => {
            let d = parse_f64("penalty.delta", v)?;
            if d <= 0.0 {
                return Err("penalty.delta: must be positive".to_string());
            }
            Some(d)
        }
        None => None,
    };
    let seed_point = match get("domain.seed_point") {
        Some(v) => {
            let p = parse_list("domain.seed_point", v)?;
            if p.len() != 2 {
                return Err("domain.seed_point: expected x,y".to_string());
            }
            Some((p[0], p[1]))
        }
        None => None,
    };

    let (kind, grid) = match kind_str {
        "rectangle" => {
            if get("domain.params").is_some() {
                return Err("domain.params: only valid for domain.kind = custom".to_string());
            }
            let (a, b, c, d) = bounds.unwrap_or((-1.0, 1.0, -1.0, 1.0));
            let grid = Grid2D::new(a, b, c, d, n1, n2).map_err(|e| e.to_string())?;
            (RunKind::Rectangle, grid)
        }
        "disk" | "quartic" | "custom" => {
            let mut spec = match kind_str {
                "disk" => DomainSpec::disk(phi),
                "quartic" => DomainSpec::quartic(phi),
                _ => {
                    let Some(v) = get("domain.params") else {
                        return Err(
                            "domain.params: required for domain.kind = custom (6 coefficients)"
                                .to_string(),
                        );
                    };
                    let c = parse_list("domain.params", v)?;
                    if c.len() != 6 {
                        return Err("domain.params: expected 6 coefficients".to_string());
                    }
                    let Some(sp) = seed_point else {
                        return Err("domain.seed_point: required for custom domains".to_string());
                    };
                    let Some(bb) = bounds else {
                        return Err("box.bounds: required for custom domains".to_string());
                    };
                    DomainSpec {
                        kind: DomainKind::CustomQuadratic([c[0], c[1], c[2], c[3], c[4], c[5]]),
                        seed_point: sp,
                        bbox: bb,
                        delta: delta.unwrap_or(0.2),
                        phi,
                    }
                }
            };
            if let Some(bb) = bounds {
                spec.bbox = bb;
            }
            if let Some(sp) = seed_point {
                spec.seed_point = sp;
            }
            if let Some(d) = delta {
                spec.delta = d;
            }
            let grid = spec.grid(n1, n2).map_err(|e| e.to_string())?;
            (RunKind::Penalized(spec), grid)
        }
        other => {
            return Err(format!(
                "domain.kind: unknown kind '{other}' (disk|quartic|rectangle|custom)"
            ))
        }
    };

    let output_dir = get("output.dir").unwrap_or("out").to_string();
    let seed = match get("seed") {
        Some(v) => v
            .trim()
            .parse::<u64>()
            .map_err(|_| format!("seed: '{v}' is not an unsigned integer"))?,
        None => hessprod::verify::DEFAULT_PROBE_SEED,
    };

    Ok(RunConfig {
        kind,
        grid,
        phi,
        continuation,
        output_dir,
        seed,
    })
}
