//! Trajectory logs as a delimited table plus a JSON metadata sidecar.
//!
//! The table has one header row, one units row and one row per sample.
//! Columns are looked up by name; `sv_ax`, `sv_ay`, `pov_ax`, `pov_ay`, `jx`
//! and `jy` may be absent (treated as zero, with the SV acceleration then
//! derived from velocity downstream).

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{ControlInput, Heading, VehicleState};
use crate::log::{LogSample, Termination, TrajectoryLog};
use crate::scalar::Scalar;
use crate::scenario::ScenarioSpec;

/// Columns every log must have, with units.
pub const REQUIRED_COLUMNS: [(&str, &str); 12] = [
    ("t", "s"),
    ("sv_x", "m"),
    ("sv_y", "m"),
    ("sv_vx", "m/s"),
    ("sv_vy", "m/s"),
    ("pov_x", "m"),
    ("pov_y", "m"),
    ("pov_vx", "m/s"),
    ("pov_vy", "m/s"),
    ("accel_pct", "%"),
    ("brake_pct", "%"),
    ("steer_deg", "deg"),
];

pub const OPTIONAL_COLUMNS: [(&str, &str); 6] = [
    ("sv_ax", "m/s^2"),
    ("sv_ay", "m/s^2"),
    ("pov_ax", "m/s^2"),
    ("pov_ay", "m/s^2"),
    ("jx", "m/s^3"),
    ("jy", "m/s^3"),
];

/// Column order used when writing.
const WRITE_ORDER: [&str; 18] = [
    "t", "sv_x", "sv_y", "sv_vx", "sv_vy", "sv_ax", "sv_ay", "pov_x", "pov_y", "pov_vx", "pov_vy", "accel_pct",
    "brake_pct", "steer_deg", "pov_ax", "pov_ay", "jx", "jy",
];

fn unit_of(col: &str) -> &'static str {
    REQUIRED_COLUMNS
        .iter()
        .chain(OPTIONAL_COLUMNS.iter())
        .find(|(c, _)| *c == col)
        .map(|(_, u)| *u)
        .unwrap_or("")
}

/// Sidecar contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct LogMeta<T: Scalar> {
    pub scenario: ScenarioSpec<T>,
    pub dt: T,
    pub t_trigger: T,
    #[serde(default = "external")]
    pub termination: Termination,
    #[serde(default = "yes")]
    pub complete: bool,
    #[serde(default = "forward")]
    pub sv_heading: Heading,
    #[serde(default = "reverse")]
    pub pov_heading: Heading,
}

fn external() -> Termination {
    Termination::External
}
fn yes() -> bool {
    true
}
fn forward() -> Heading {
    Heading::Forward
}
fn reverse() -> Heading {
    Heading::Reverse
}

impl<T: Scalar> LogMeta<T> {
    pub fn of(log: &TrajectoryLog<T>) -> Self {
        let first = log.samples.first();
        Self {
            scenario: log.scenario,
            dt: log.dt,
            t_trigger: log.t_trigger,
            termination: log.termination,
            complete: log.complete,
            sv_heading: first.map_or(Heading::Forward, |s| s.sv.heading),
            pov_heading: first.map_or(Heading::Reverse, |s| s.pov.heading),
        }
    }
}

/// `<log path>.meta.json`
pub fn meta_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// Writes the table body. `sv_ax` is omitted when the log did not record it.
pub fn write_log_table<T: Scalar, W: Write>(log: &TrajectoryLog<T>, out: W) -> Result<()> {
    let cols: Vec<&str> = WRITE_ORDER
        .iter()
        .copied()
        .filter(|c| log.sv_accel_logged || *c != "sv_ax")
        .collect();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&cols)?;
    w.write_record(cols.iter().map(|c| unit_of(c)))?;
    for s in &log.samples {
        let row = cols.iter().map(|c| {
            let v = match *c {
                "t" => s.t,
                "sv_x" => s.sv.x,
                "sv_y" => s.sv.y,
                "sv_vx" => s.sv.vx,
                "sv_vy" => s.sv.vy,
                "sv_ax" => s.sv.ax,
                "sv_ay" => s.sv.ay,
                "pov_x" => s.pov.x,
                "pov_y" => s.pov.y,
                "pov_vx" => s.pov.vx,
                "pov_vy" => s.pov.vy,
                "accel_pct" => s.controls.accel_pct,
                "brake_pct" => s.controls.brake_pct,
                "steer_deg" => s.controls.steer_deg,
                "pov_ax" => s.pov.ax,
                "pov_ay" => s.pov.ay,
                "jx" => s.controls.jx,
                "jy" => s.controls.jy,
                _ => unreachable!(),
            };
            v.to_string()
        });
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a table written by [`write_log_table`] or an external tool.
pub fn read_log_table<T: Scalar, R: Read>(input: R, meta: &LogMeta<T>) -> Result<TrajectoryLog<T>> {
    if !(meta.dt.is_finite() && meta.dt > T::zero()) {
        return Err(Error::Config("log metadata dt must be > 0".into()));
    }
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = rdr.headers()?.clone();
    let index: HashMap<&str, usize> = headers.iter().enumerate().map(|(i, h)| (h, i)).collect();
    for (c, _) in REQUIRED_COLUMNS {
        if !index.contains_key(c) {
            return Err(Error::MissingColumn(c.into()));
        }
    }
    let sv_accel_logged = index.contains_key("sv_ax");

    let mut samples: Vec<LogSample<T>> = Vec::new();
    let tol = meta.dt * T::lit(1e-6);
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = rec.position().map_or(k + 2, |p| p.line() as usize);
        if k == 0 && rec.get(index["t"]).is_some_and(|v| v.parse::<f64>().is_err()) {
            // units row
            continue;
        }
        let get = |c: &str| -> Result<T> {
            let Some(&i) = index.get(c) else {
                return Ok(T::zero());
            };
            let raw = rec.get(i).ok_or_else(|| Error::Parse { row, msg: format!("missing field `{c}`") })?;
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .and_then(T::from_f64)
                .ok_or_else(|| Error::Parse { row, msg: format!("column `{c}`: invalid number `{raw}`") })
        };
        let t = get("t")?;
        if let Some(prev) = samples.last() {
            let step = t - prev.t;
            if !(step > T::zero()) {
                return Err(Error::Parse { row, msg: format!("time {t} does not increase") });
            }
            if (step - meta.dt).abs() > tol {
                return Err(Error::Parse { row, msg: format!("time step {step} differs from dt {}", meta.dt) });
            }
        }
        let sv = VehicleState {
            t,
            x: get("sv_x")?,
            y: get("sv_y")?,
            vx: get("sv_vx")?,
            vy: get("sv_vy")?,
            ax: get("sv_ax")?,
            ay: get("sv_ay")?,
            heading: meta.sv_heading,
        };
        let pov = VehicleState {
            t,
            x: get("pov_x")?,
            y: get("pov_y")?,
            vx: get("pov_vx")?,
            vy: get("pov_vy")?,
            ax: get("pov_ax")?,
            ay: get("pov_ay")?,
            heading: meta.pov_heading,
        };
        let controls = ControlInput {
            accel_pct: get("accel_pct")?,
            brake_pct: get("brake_pct")?,
            steer_deg: get("steer_deg")?,
            jx: get("jx")?,
            jy: get("jy")?,
        };
        samples.push(LogSample { t, sv, pov, controls });
    }
    Ok(TrajectoryLog {
        dt: meta.dt,
        t_trigger: meta.t_trigger,
        scenario: meta.scenario,
        samples,
        sv_accel_logged,
        termination: meta.termination,
        complete: meta.complete,
    })
}

/// Writes the table to `path` and the sidecar next to it.
pub fn save_trajectory_log<T: Scalar>(log: &TrajectoryLog<T>, path: &Path) -> Result<()> {
    write_log_table(log, BufWriter::new(File::create(path)?))?;
    let meta = serde_json::to_string_pretty(&LogMeta::of(log))?;
    std::fs::write(meta_path(path), meta + "\n")?;
    Ok(())
}

pub fn load_trajectory_log<T: Scalar>(path: &Path) -> Result<TrajectoryLog<T>> {
    let mp = meta_path(path);
    let meta_text = std::fs::read_to_string(&mp)
        .map_err(|e| Error::Config(format!("cannot read log metadata {}: {e}", mp.display())))?;
    let meta: LogMeta<T> = serde_json::from_str(&meta_text)?;
    read_log_table(BufReader::new(File::open(path)?), &meta)
}
