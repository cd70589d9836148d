//! Output tables and reach snapshots.
//!
//! Tables are comma separated with a header row followed by a units row.
//! Reach snapshots are JSON: per `tau`, the surviving SV cells as `[ix, iy]`
//! pairs and the POV cells as the product `pov_ix x pov_iy`. Cell `(ix, iy)`
//! covers `[ix*dx, (ix+1)*dx) x [iy*dy, (iy+1)*dy)` in road coordinates.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::sequence::{Node, SequenceGraph};
use crate::error::{Error, Result};
use crate::frame::{footprint, Heading, RoadSpec, VehicleSpec, VehicleState};
use crate::reach::{DrivableArea, PovMode, PredictionConfig, PrevalenceSeries, WorldState};
use crate::scalar::Scalar;

/// Writes a header row, a units row and the data rows.
pub fn write_table<W: Write>(out: W, header: &[&str], units: &[&str], rows: &[Vec<String>]) -> Result<()> {
    if header.len() != units.len() {
        return Err(crate::error::invalid("header and units rows differ in length"));
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    w.write_record(units)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_table_file(path: &Path, header: &[&str], units: &[&str], rows: &[Vec<String>]) -> Result<()> {
    write_table(BufWriter::new(File::create(path)?), header, units, rows)
}

/// Reads a table written by [`write_table`]: header and data rows, units row
/// dropped.
pub fn read_table<R: Read>(input: R) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.iter().map(str::to_owned).collect();
    let mut rows = Vec::new();
    for (k, rec) in r.records().enumerate() {
        if k > 0 {
            rows.push(rec?.iter().map(str::to_owned).collect());
        }
    }
    Ok((header, rows))
}

pub const PREVALENCE_HEADER: [&str; 5] = ["t_rel", "fraction", "ci_lo", "ci_hi", "n_carried"];
const PREVALENCE_UNITS: [&str; 5] = ["s", "1", "1", "1", "runs"];

fn prevalence_rows(p: &PrevalenceSeries) -> Vec<Vec<String>> {
    (0..p.t_rel.len())
        .map(|k| {
            vec![
                format!("{:.3}", p.t_rel[k]),
                p.fraction[k].to_string(),
                p.ci_lo[k].to_string(),
                p.ci_hi[k].to_string(),
                p.n_carried[k].to_string(),
            ]
        })
        .collect()
}

pub fn write_prevalence<W: Write>(p: &PrevalenceSeries, out: W) -> Result<()> {
    write_table(out, &PREVALENCE_HEADER, &PREVALENCE_UNITS, &prevalence_rows(p))
}

pub fn emit_prevalence(p: &PrevalenceSeries, path: &Path) -> Result<()> {
    write_prevalence(p, BufWriter::new(File::create(path)?))
}

/// Source label of initial-state rows in the sequence table.
pub const START: &str = "start";
pub const SEQUENCE_HEADER: [&str; 3] = ["from", "to", "count"];
const SEQUENCE_UNITS: [&str; 3] = ["node", "node", "runs"];

pub fn write_sequence_graph<W: Write>(g: &SequenceGraph, out: W) -> Result<()> {
    let mut rows: Vec<Vec<String>> = g
        .initial
        .iter()
        .map(|(n, c)| vec![START.to_owned(), n.to_string(), c.to_string()])
        .collect();
    rows.extend(g.edges.iter().map(|((a, b), c)| vec![a.to_string(), b.to_string(), c.to_string()]));
    write_table(out, &SEQUENCE_HEADER, &SEQUENCE_UNITS, &rows)
}

pub fn emit_sequence_graph(g: &SequenceGraph, path: &Path) -> Result<()> {
    write_sequence_graph(g, BufWriter::new(File::create(path)?))
}

/// Rebuilds edge and initial counts from an emitted sequence table.
pub fn read_sequence_graph<R: Read>(input: R) -> Result<SequenceGraph> {
    let (header, rows) = read_table(input)?;
    if header != SEQUENCE_HEADER {
        return Err(Error::Config(format!("unexpected sequence table header {header:?}")));
    }
    let mut g = SequenceGraph::default();
    for (i, r) in rows.iter().enumerate() {
        let row = i + 3;
        let parse_node = |s: &str| s.parse::<Node>().map_err(|e| Error::Parse { row, msg: e.to_string() });
        let count: usize = r[2].parse().map_err(|_| Error::Parse { row, msg: format!("bad count `{}`", r[2]) })?;
        let to = parse_node(&r[1])?;
        if r[0] == START {
            *g.initial.entry(to).or_default() += count;
            g.runs += count;
        } else {
            *g.edges.entry((parse_node(&r[0])?, to)).or_default() += count;
        }
    }
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnapshotVehicle {
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub heading: Heading,
    pub length: f64,
    pub width: f64,
    pub ref_offset: f64,
}

impl SnapshotVehicle {
    fn of<T: Scalar>(s: &VehicleState<T>, spec: &VehicleSpec<T>) -> Self {
        Self {
            x: s.x.as_f64(),
            y: s.y.as_f64(),
            vx: s.vx.as_f64(),
            vy: s.vy.as_f64(),
            heading: s.heading,
            length: spec.length.as_f64(),
            width: spec.width.as_f64(),
            ref_offset: spec.ref_offset.as_f64(),
        }
    }

    /// Footprint `(x_min, x_max, y_min, y_max)`.
    pub fn rect(&self) -> (f64, f64, f64, f64) {
        let st = VehicleState { t: 0.0, x: self.x, y: self.y, vx: 0.0, vy: 0.0, ax: 0.0, ay: 0.0, heading: self.heading };
        let spec = VehicleSpec { length: self.length, width: self.width, ref_offset: self.ref_offset };
        let r = footprint(&st, &spec);
        (r.x_min, r.x_max, r.y_min, r.y_max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotLayer {
    pub tau: f64,
    pub sv_cells: Vec<[i64; 2]>,
    pub pov_ix: Vec<i64>,
    pub pov_iy: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReachSnapshot {
    pub t: f64,
    pub grid_dx: f64,
    pub grid_dy: f64,
    pub lane_width: f64,
    pub pov_mode: PovMode,
    pub exists: bool,
    pub sv: SnapshotVehicle,
    pub pov: SnapshotVehicle,
    pub layers: Vec<SnapshotLayer>,
}

impl ReachSnapshot {
    pub fn new<T: Scalar>(world: &WorldState<T>, area: &DrivableArea<T>, config: &PredictionConfig<T>) -> Self {
        let layers = area
            .sv_layers
            .iter()
            .zip(area.pov_x.iter().zip(&area.pov_y))
            .map(|(sv, (px, py))| SnapshotLayer {
                tau: sv.tau.as_f64(),
                sv_cells: sv.cells.iter().map(|c| [c.ix, c.iy]).collect(),
                pov_ix: px.cells.iter().map(|c| c.0).collect(),
                pov_iy: py.cells.iter().map(|c| c.0).collect(),
            })
            .collect();
        Self {
            t: area.t.as_f64(),
            grid_dx: config.grid_dx.as_f64(),
            grid_dy: config.grid_dy.as_f64(),
            lane_width: world.road.lane_width.as_f64(),
            pov_mode: area.pov_mode,
            exists: area.exists,
            sv: SnapshotVehicle::of(&world.sv, &world.sv_spec),
            pov: SnapshotVehicle::of(&world.pov, &world.pov_spec),
            layers,
        }
    }

    pub fn road(&self) -> RoadSpec<f64> {
        RoadSpec::with_lane_width(self.lane_width)
    }
}

pub fn emit_reach_snapshot(snap: &ReachSnapshot, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, snap)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn load_reach_snapshot(path: &Path) -> Result<ReachSnapshot> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

/// Maximal runs of consecutive integers.
fn runs(sorted: &[i64]) -> Vec<(i64, i64)> {
    let mut out: Vec<(i64, i64)> = Vec::new();
    for &i in sorted {
        match out.last_mut() {
            Some(r) if r.1 + 1 == i => r.1 = i,
            _ => out.push((i, i)),
        }
    }
    out
}

/// SV cells merged into horizontal strips `(ix0, ix1, iy)`.
fn sv_strips(cells: &[[i64; 2]]) -> Vec<(i64, i64, i64)> {
    let mut by_row: BTreeMap<i64, Vec<i64>> = BTreeMap::new();
    for [ix, iy] in cells {
        by_row.entry(*iy).or_default().push(*ix);
    }
    let mut out = Vec::new();
    for (iy, mut xs) in by_row {
        xs.sort_unstable();
        out.extend(runs(&xs).into_iter().map(|(a, b)| (a, b, iy)));
    }
    out
}

fn tau_colour(frac: f64) -> String {
    // near future blue, horizon red
    let hue = 240.0 * (1.0 - frac.clamp(0.0, 1.0));
    format!("hsl({hue:.0},75%,50%)")
}

/// Renders every `stride`-th layer, far layers first, with both vehicles as
/// dark rectangles. Meters map to `scale` SVG units, `y` pointing up.
pub fn render_snapshot_svg(snap: &ReachSnapshot, stride: usize, scale: f64) -> String {
    let stride = stride.max(1);
    let (dx, dy) = (snap.grid_dx, snap.grid_dy);
    let (svr, povr) = (snap.sv.rect(), snap.pov.rect());
    let w = snap.lane_width;
    let mut x0 = svr.0.min(povr.0);
    let mut x1 = svr.1.max(povr.1);
    for l in &snap.layers {
        for [ix, _] in &l.sv_cells {
            x0 = x0.min(*ix as f64 * dx);
            x1 = x1.max((*ix + 1) as f64 * dx);
        }
        if let (Some(a), Some(b)) = (l.pov_ix.first(), l.pov_ix.last()) {
            x0 = x0.min(*a as f64 * dx);
            x1 = x1.max((*b + 1) as f64 * dx);
        }
    }
    let (y0, y1) = (-w - 2.0, w + 2.0);
    let (x0, x1) = (x0 - 2.0, x1 + 2.0);
    let px = |x: f64| (x - x0) * scale;
    let py = |y: f64| (y1 - y) * scale;
    let (width, height) = ((x1 - x0) * scale, (y1 - y0) * scale);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.1}" height="{height:.1}" viewBox="0 0 {width:.1} {height:.1}">"#
    );
    let _ = writeln!(
        s,
        r##"<rect x="0" y="{:.2}" width="{width:.2}" height="{:.2}" fill="#e6e6e6"/>"##,
        py(w),
        2.0 * w * scale
    );
    let _ = writeln!(
        s,
        r##"<line x1="0" y1="{0:.2}" x2="{width:.2}" y2="{0:.2}" stroke="#ffffff" stroke-width="2" stroke-dasharray="12 8"/>"##,
        py(0.0)
    );
    let horizon = snap.layers.last().map_or(1.0, |l| l.tau.max(1e-9));
    let shown: Vec<&SnapshotLayer> = snap
        .layers
        .iter()
        .enumerate()
        .filter(|(k, _)| k % stride == 0 || *k + 1 == snap.layers.len())
        .map(|(_, l)| l)
        .collect();
    for l in shown.iter().rev() {
        let c = tau_colour(l.tau / horizon);
        let _ = writeln!(s, r#"<g fill="{c}" fill-opacity="0.3" data-tau="{:.3}">"#, l.tau);
        for (a, b) in runs(&l.pov_ix) {
            for (p, q) in runs(&l.pov_iy) {
                let (xa, xb) = (a as f64 * dx, (b + 1) as f64 * dx);
                let (ya, yb) = (p as f64 * dy, (q + 1) as f64 * dy);
                let _ = writeln!(
                    s,
                    r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}"/>"#,
                    px(xa),
                    py(yb),
                    (xb - xa) * scale,
                    (yb - ya) * scale
                );
            }
        }
        let _ = writeln!(s, "</g>");
        let _ = writeln!(s, r#"<g fill="{c}" fill-opacity="0.75" data-tau="{:.3}">"#, l.tau);
        for (a, b, iy) in sv_strips(&l.sv_cells) {
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}"/>"#,
                px(a as f64 * dx),
                py((iy + 1) as f64 * dy),
                (b - a + 1) as f64 * dx * scale,
                dy * scale
            );
        }
        let _ = writeln!(s, "</g>");
    }
    for r in [svr, povr] {
        let _ = writeln!(
            s,
            r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#202020"/>"##,
            px(r.0),
            py(r.3),
            (r.1 - r.0) * scale,
            (r.3 - r.2) * scale
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="6" y="16" font-family="sans-serif" font-size="13">t = {:.2} s, tau 0 (blue) to {:.1} s (red), drivable area {}</text>"#,
        snap.t,
        horizon,
        if snap.exists { "exists" } else { "lost" }
    );
    s.push_str("</svg>\n");
    s
}

pub fn emit_snapshot_svg(snap: &ReachSnapshot, path: &Path, stride: usize) -> Result<()> {
    std::fs::write(path, render_snapshot_svg(snap, stride, 10.0))?;
    Ok(())
}
