//! Uniform tensor grids, nodal scalar fields, and centered differences.
//!
//! Indexing is row-major with the x1 index fastest (`idx = j*n1 + i`), fixed
//! globally so CSV output and linear-system ordering agree. Second differences
//! are exact on quadratics and annihilate the bilinear x1*x2, which is what
//! makes the discrete shear invariance exact.

use crate::error::{Error, Result};

/// Axis selector for one-dimensional difference operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X1,
    X2,
}

/// Region selector for norms.
#[derive(Clone, Copy, Debug)]
pub enum Region {
    All,
    Interior,
    SubRect {
        x1min: f64,
        x1max: f64,
        x2min: f64,
        x2max: f64,
    },
}

/// Uniform tensor-product grid on a rectangle with at least 3 nodes per axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid2D {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
    pub n1: usize,
    pub n2: usize,
    h1: f64,
    h2: f64,
}

impl Grid2D {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64, n1: usize, n2: usize) -> Result<Self> {
        if n1 < 3 {
            return Err(Error::InvalidGrid {
                axis: 1,
                needed: 3,
                got: n1,
            });
        }
        if n2 < 3 {
            return Err(Error::InvalidGrid {
                axis: 2,
                needed: 3,
                got: n2,
            });
        }
        if !(xmax - xmin).is_finite() || xmax <= xmin || !(ymax - ymin).is_finite() || ymax <= ymin
        {
            return Err(Error::Config(format!(
                "degenerate grid bounds [{xmin},{xmax}]x[{ymin},{ymax}]"
            )));
        }
        Ok(Grid2D {
            xmin,
            xmax,
            ymin,
            ymax,
            n1,
            n2,
            h1: (xmax - xmin) / (n1 - 1) as f64,
            h2: (ymax - ymin) / (n2 - 1) as f64,
        })
    }

    /// Square grid on [lo,hi]^2.
    pub fn square(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::new(lo, hi, lo, hi, n, n)
    }

    pub fn h1(&self) -> f64 {
        self.h1
    }

    pub fn h2(&self) -> f64 {
        self.h2
    }

    pub fn n_nodes(&self) -> usize {
        self.n1 * self.n2
    }

    /// Node coordinate, recomputed from the index every call so it is
    /// identical wherever it is asked for.
    pub fn node_x(&self, i: usize) -> f64 {
        self.xmin + i as f64 * self.h1
    }

    pub fn node_y(&self, j: usize) -> f64 {
        self.ymin + j as f64 * self.h2
    }

    pub fn node(&self, i: usize, j: usize) -> (f64, f64) {
        (self.node_x(i), self.node_y(j))
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n1 + i
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.n1 - 1 || j == self.n2 - 1
    }

    /// Index of the node nearest to (x, y).
    pub fn nearest(&self, x: f64, y: f64) -> (usize, usize) {
        let i = ((x - self.xmin) / self.h1).round().clamp(0.0, (self.n1 - 1) as f64) as usize;
        let j = ((y - self.ymin) / self.h2).round().clamp(0.0, (self.n2 - 1) as f64) as usize;
        (i, j)
    }
}

/// Real values attached to the nodes of a [`Grid2D`]; all entries finite.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField2D {
    grid: Grid2D,
    values: Vec<f64>,
}

impl ScalarField2D {
    pub fn zeros(grid: Grid2D) -> Self {
        ScalarField2D {
            grid,
            values: vec![0.0; grid.n_nodes()],
        }
    }

    pub fn from_values(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        assert_eq!(values.len(), grid.n_nodes(), "value count must match grid");
        for j in 0..grid.n2 {
            for i in 0..grid.n1 {
                let v = values[grid.index(i, j)];
                if !v.is_finite() {
                    let (x, y) = grid.node(i, j);
                    return Err(Error::Sampling { i, j, x, y, value: v });
                }
            }
        }
        Ok(ScalarField2D { grid, values })
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let idx = self.grid.index(i, j);
        self.values[idx] = v;
    }
}

/// Evaluate a pointwise function on every node.
pub fn sample<F: Fn(f64, f64) -> f64>(grid: Grid2D, f: F) -> Result<ScalarField2D> {
    let mut values = vec![0.0; grid.n_nodes()];
    for j in 0..grid.n2 {
        for i in 0..grid.n1 {
            let (x, y) = grid.node(i, j);
            let v = f(x, y);
            if !v.is_finite() {
                return Err(Error::Sampling { i, j, x, y, value: v });
            }
            values[grid.index(i, j)] = v;
        }
    }
    Ok(ScalarField2D { grid, values })
}

/// A difference field: interior nodes carry the stencil value, nodes where the
/// stencil did not fit carry a copy of the nearest computed value and are
/// flagged, so tests cannot silently consume them.
#[derive(Clone, Debug)]
pub struct DiffField {
    field: ScalarField2D,
    extrapolated: Vec<bool>,
}

impl DiffField {
    pub(crate) fn from_parts(field: ScalarField2D, extrapolated: Vec<bool>) -> Self {
        assert_eq!(field.values.len(), extrapolated.len());
        DiffField {
            field,
            extrapolated,
        }
    }

    pub fn field(&self) -> &ScalarField2D {
        &self.field
    }

    pub fn into_field(self) -> ScalarField2D {
        self.field
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.field.get(i, j)
    }

    pub fn is_extrapolated(&self, i: usize, j: usize) -> bool {
        self.extrapolated[self.field.grid.index(i, j)]
    }

    /// Sup of |self| over non-extrapolated nodes.
    pub fn interior_sup_abs(&self) -> f64 {
        let g = self.field.grid;
        let mut sup: f64 = 0.0;
        for j in 0..g.n2 {
            for i in 0..g.n1 {
                if !self.extrapolated[g.index(i, j)] {
                    sup = sup.max(self.field.get(i, j).abs());
                }
            }
        }
        sup
    }
}

/// Centered second difference along one axis. Nodes on the two faces normal
/// to the axis are flagged copies of the adjacent interior value; no solver
/// consumes them (solvers pin Dirichlet values at boundary nodes).
pub fn d2_axis(f: &ScalarField2D, axis: Axis) -> DiffField {
    let g = f.grid;
    let mut out = ScalarField2D::zeros(g);
    let mut extrapolated = vec![false; g.n_nodes()];
    let (h2inv, n1, n2) = match axis {
        Axis::X1 => (1.0 / (g.h1 * g.h1), g.n1, g.n2),
        Axis::X2 => (1.0 / (g.h2 * g.h2), g.n2, g.n1),
    };
    let val = |a: usize, b: usize| match axis {
        Axis::X1 => f.get(a, b),
        Axis::X2 => f.get(b, a),
    };
    for b in 0..n2 {
        for a in 1..n1 - 1 {
            let d = (val(a - 1, b) - 2.0 * val(a, b) + val(a + 1, b)) * h2inv;
            match axis {
                Axis::X1 => out.set(a, b, d),
                Axis::X2 => out.set(b, a, d),
            }
        }
        // face nodes: copy the adjacent interior value and flag it
        for (edge, inner) in [(0usize, 1usize), (n1 - 1, n1 - 2)] {
            let (i, j) = match axis {
                Axis::X1 => (edge, b),
                Axis::X2 => (b, edge),
            };
            let (ii, jj) = match axis {
                Axis::X1 => (inner, b),
                Axis::X2 => (b, inner),
            };
            let copy = out.get(ii, jj);
            out.set(i, j, copy);
            extrapolated[g.index(i, j)] = true;
        }
    }
    DiffField {
        field: out,
        extrapolated,
    }
}

/// Centered first difference along one axis, same flagging convention.
pub fn d1_axis(f: &ScalarField2D, axis: Axis) -> DiffField {
    let g = f.grid;
    let mut out = ScalarField2D::zeros(g);
    let mut extrapolated = vec![false; g.n_nodes()];
    let (hinv, n1, n2) = match axis {
        Axis::X1 => (0.5 / g.h1, g.n1, g.n2),
        Axis::X2 => (0.5 / g.h2, g.n2, g.n1),
    };
    let val = |a: usize, b: usize| match axis {
        Axis::X1 => f.get(a, b),
        Axis::X2 => f.get(b, a),
    };
    for b in 0..n2 {
        for a in 1..n1 - 1 {
            let d = (val(a + 1, b) - val(a - 1, b)) * hinv;
            match axis {
                Axis::X1 => out.set(a, b, d),
                Axis::X2 => out.set(b, a, d),
            }
        }
        for (edge, inner) in [(0usize, 1usize), (n1 - 1, n1 - 2)] {
            let (i, j) = match axis {
                Axis::X1 => (edge, b),
                Axis::X2 => (b, edge),
            };
            let (ii, jj) = match axis {
                Axis::X1 => (inner, b),
                Axis::X2 => (b, inner),
            };
            let copy = out.get(ii, jj);
            out.set(i, j, copy);
            extrapolated[g.index(i, j)] = true;
        }
    }
    DiffField {
        field: out,
        extrapolated,
    }
}

/// Four-point centered cross difference; the full boundary ring is flagged.
pub fn d2_mixed(f: &ScalarField2D) -> DiffField {
    let g = f.grid;
    let mut out = ScalarField2D::zeros(g);
    let mut extrapolated = vec![false; g.n_nodes()];
    let c = 0.25 / (g.h1 * g.h2);
    for j in 1..g.n2 - 1 {
        for i in 1..g.n1 - 1 {
            let d = (f.get(i + 1, j + 1) - f.get(i + 1, j - 1) - f.get(i - 1, j + 1)
                + f.get(i - 1, j - 1))
                * c;
            out.set(i, j, d);
        }
    }
    for j in 0..g.n2 {
        for i in 0..g.n1 {
            if g.is_boundary(i, j) {
                let ii = i.clamp(1, g.n1 - 2);
                let jj = j.clamp(1, g.n2 - 2);
                let copy = out.get(ii, jj);
                out.set(i, j, copy);
                extrapolated[g.index(i, j)] = true;
            }
        }
    }
    DiffField {
        field: out,
        extrapolated,
    }
}

/// (sup |f|, mean |f|) over the selected region.
pub fn norms(f: &ScalarField2D, region: Region) -> (f64, f64) {
    let g = f.grid;
    let mut sup: f64 = 0.0;
    let mut sum = 0.0;
    let mut count = 0usize;
    for j in 0..g.n2 {
        for i in 0..g.n1 {
            let keep = match region {
                Region::All => true,
                Region::Interior => !g.is_boundary(i, j),
                Region::SubRect {
                    x1min,
                    x1max,
                    x2min,
                    x2max,
                } => {
                    let (x, y) = g.node(i, j);
                    x >= x1min && x <= x1max && y >= x2min && y <= x2max
                }
            };
            if keep {
                let v = f.get(i, j).abs();
                sup = sup.max(v);
                sum += v;
                count += 1;
            }
        }
    }
    if count == 0 {
        (0.0, 0.0)
    } else {
        (sup, sum / count as f64)
    }
}

/// Sup of |a - b| over the given region.
pub fn sup_diff(a: &ScalarField2D, b: &ScalarField2D, region: Region) -> f64 {
    assert_eq!(a.grid, b.grid, "fields must share a grid");
    let g = a.grid;
    let mut sup: f64 = 0.0;
    for j in 0..g.n2 {
        for i in 0..g.n1 {
            let keep = match region {
                Region::All => true,
                Region::Interior => !g.is_boundary(i, j),
                Region::SubRect {
                    x1min,
                    x1max,
                    x2min,
                    x2max,
                } => {
                    let (x, y) = g.node(i, j);
                    x >= x1min && x <= x1max && y >= x2min && y <= x2max
                }
            };
            if keep {
                sup = sup.max((a.get(i, j) - b.get(i, j)).abs());
            }
        }
    }
    sup
}
