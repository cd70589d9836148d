//! POV occupancy inflated by the combined footprint, so that SV cells can be
//! tested as points.

use crate::frame::{Heading, VehicleSpec};
use crate::scalar::Scalar;

use super::grid::{AxisLayer, Grid, Layer};

/// Index offsets `ix_sv - ix_pov` (and likewise in `y`) at which the two
/// bodies may overlap when their reference points lie in those cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dilation {
    pub kx: (i64, i64),
    pub ky: (i64, i64),
}

impl Dilation {
    pub fn new<T: Scalar>(
        grid: &Grid<T>,
        sv_spec: &VehicleSpec<T>,
        sv_heading: Heading,
        pov_spec: &VehicleSpec<T>,
        pov_heading: Heading,
    ) -> Self {
        let two = T::lit(2.0);
        // centre_x = x - h * ref_offset, so the reference-point offset at
        // which the centres coincide is c.
        let c = sv_heading.sign::<T>() * sv_spec.ref_offset - pov_heading.sign::<T>() * pov_spec.ref_offset;
        let lx = (sv_spec.length + pov_spec.length) / two;
        let ly = (sv_spec.width + pov_spec.width) / two;
        let to_i = |v: T| v.to_i64().expect("dilation in range");
        Self {
            kx: (to_i(((c - lx) / grid.dx).floor()), to_i(((c + lx) / grid.dx).ceil())),
            ky: (to_i((-ly / grid.dy).floor()), to_i((ly / grid.dy).ceil())),
        }
    }
}

/// Dilated occupancy: the set of SV cells in potential collision.
#[derive(Debug, Clone, PartialEq)]
pub enum Occupancy {
    Empty,
    Grid {
        x0: i64,
        y0: i64,
        ny: usize,
        bits: Vec<bool>,
    },
    /// Product of two dilated index sets. Exact when the POV cells are the
    /// product of independent per-axis sets.
    Product {
        x0: i64,
        xbits: Vec<bool>,
        y0: i64,
        ybits: Vec<bool>,
    },
}

impl Occupancy {
    pub fn contains(&self, ix: i64, iy: i64) -> bool {
        match self {
            Occupancy::Empty => false,
            Occupancy::Grid { x0, y0, ny, bits } => {
                let (dx, dy) = (ix - x0, iy - y0);
                if dx < 0 || dy < 0 || dy as usize >= *ny {
                    return false;
                }
                bits.get(dx as usize * ny + dy as usize).copied().unwrap_or(false)
            }
            Occupancy::Product { x0, xbits, y0, ybits } => {
                let (dx, dy) = (ix - x0, iy - y0);
                dx >= 0
                    && dy >= 0
                    && xbits.get(dx as usize).copied().unwrap_or(false)
                    && ybits.get(dy as usize).copied().unwrap_or(false)
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Occupancy::Empty)
    }

    /// Occupied cells in `(ix, iy)` order.
    pub fn cells(&self) -> Vec<(i64, i64)> {
        match self {
            Occupancy::Empty => Vec::new(),
            Occupancy::Grid { x0, y0, ny, bits } => bits
                .iter()
                .enumerate()
                .filter(|(_, b)| **b)
                .map(|(k, _)| (x0 + (k / ny) as i64, y0 + (k % ny) as i64))
                .collect(),
            Occupancy::Product { x0, xbits, y0, ybits } => {
                let mut out = Vec::new();
                for (i, bx) in xbits.iter().enumerate() {
                    if !bx {
                        continue;
                    }
                    for (j, by) in ybits.iter().enumerate() {
                        if *by {
                            out.push((x0 + i as i64, y0 + j as i64));
                        }
                    }
                }
                out
            }
        }
    }
}

/// Dilates a 1D index set; returns the first index and the bitmap.
fn dilate_1d(idx: &[i64], k: (i64, i64)) -> Option<(i64, Vec<bool>)> {
    let (&lo, &hi) = (idx.first()?, idx.last()?);
    let mut raw = vec![0u32; (hi - lo + 2) as usize];
    for i in idx {
        raw[(i - lo + 1) as usize] = 1;
    }
    for i in 1..raw.len() {
        raw[i] += raw[i - 1];
    }
    // output index o is occupied iff some source j has o - j in [k.0, k.1]
    let o0 = lo + k.0;
    let o1 = hi + k.1;
    let count = |a: i64, b: i64| {
        let (a, b) = (a.max(lo), b.min(hi));
        if a > b {
            0
        } else {
            raw[(b - lo + 1) as usize] - raw[(a - lo) as usize]
        }
    };
    let bits = (o0..=o1).map(|o| count(o - k.1, o - k.0) > 0).collect();
    Some((o0, bits))
}

/// Dilated occupancy of a 2D POV layer via a summed-area table.
pub fn pov_occupancy<T: Scalar>(layer: &Layer<T>, win: &Dilation) -> Occupancy {
    if layer.cells.is_empty() {
        return Occupancy::Empty;
    }
    let (mut x0, mut x1, mut y0, mut y1) = (i64::MAX, i64::MIN, i64::MAX, i64::MIN);
    for c in &layer.cells {
        x0 = x0.min(c.ix);
        x1 = x1.max(c.ix);
        y0 = y0.min(c.iy);
        y1 = y1.max(c.iy);
    }
    let (nx, ny) = ((x1 - x0 + 1) as usize, (y1 - y0 + 1) as usize);
    // sat[(i+1)*(ny+1) + (j+1)] = count of cells in [0..=i] x [0..=j]
    let w = ny + 1;
    let mut sat = vec![0u32; (nx + 1) * w];
    for c in &layer.cells {
        sat[((c.ix - x0) as usize + 1) * w + (c.iy - y0) as usize + 1] = 1;
    }
    for i in 1..=nx {
        for j in 1..=ny {
            sat[i * w + j] += sat[(i - 1) * w + j] + sat[i * w + j - 1] - sat[(i - 1) * w + j - 1];
        }
    }
    let rect = |a0: i64, a1: i64, b0: i64, b1: i64| -> u32 {
        let a0 = a0.max(x0);
        let a1 = a1.min(x1);
        let b0 = b0.max(y0);
        let b1 = b1.min(y1);
        if a0 > a1 || b0 > b1 {
            return 0;
        }
        let (i0, i1) = ((a0 - x0) as usize, (a1 - x0) as usize + 1);
        let (j0, j1) = ((b0 - y0) as usize, (b1 - y0) as usize + 1);
        sat[i1 * w + j1] + sat[i0 * w + j0] - sat[i0 * w + j1] - sat[i1 * w + j0]
    };
    let (ox0, ox1) = (x0 + win.kx.0, x1 + win.kx.1);
    let (oy0, oy1) = (y0 + win.ky.0, y1 + win.ky.1);
    let ony = (oy1 - oy0 + 1) as usize;
    let mut bits = Vec::with_capacity((ox1 - ox0 + 1) as usize * ony);
    for ox in ox0..=ox1 {
        for oy in oy0..=oy1 {
            bits.push(rect(ox - win.kx.1, ox - win.kx.0, oy - win.ky.1, oy - win.ky.0) > 0);
        }
    }
    Occupancy::Grid { x0: ox0, y0: oy0, ny: ony, bits }
}

/// Dilated occupancy of the product of two per-axis POV layers.
pub fn product_occupancy<T: Scalar>(xs: &AxisLayer<T>, ys: &AxisLayer<T>, win: &Dilation) -> Occupancy {
    let xi: Vec<i64> = xs.cells.iter().map(|c| c.0).collect();
    let yi: Vec<i64> = ys.cells.iter().map(|c| c.0).collect();
    match (dilate_1d(&xi, win.kx), dilate_1d(&yi, win.ky)) {
        (Some((x0, xbits)), Some((y0, ybits))) => Occupancy::Product { x0, xbits, y0, ybits },
        _ => Occupancy::Empty,
    }
}
