//! Plain-text formats: particle CSV, trajectory CSV and diagnostics JSONL.
//! Floats are written with 17 significant digits so they round-trip.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::measures::{DiagnosticsRecord, VortexSystem};
use crate::vec2::Vec2;

/// Round-trip float formatting (`d.dddddddddddddddde±x`).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// `x,y,gamma` rows with a header line.
pub fn write_system<W: Write>(mut w: W, system: &VortexSystem) -> Result<()> {
    writeln!(w, "x,y,gamma")?;
    for (p, g) in system.positions().iter().zip(system.circulations()) {
        writeln!(w, "{},{},{}", fmt_f64(p.x), fmt_f64(p.y), fmt_f64(*g))?;
    }
    Ok(())
}

pub fn read_system<R: BufRead>(r: R, label: &str) -> Result<VortexSystem> {
    let mut positions = Vec::new();
    let mut circulations = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: Option<Vec<f64>> = fields.iter().map(|f| f.parse().ok()).collect();
        match parsed {
            Some(v) if v.len() == 3 => {
                positions.push(Vec2::new(v[0], v[1]));
                circulations.push(v[2]);
            }
            None if lineno == 0 => continue,
            _ => {
                return Err(Error::ProfileFormat(format!(
                    "line {}: expected `x,y,gamma`, got `{line}`",
                    lineno + 1
                )))
            }
        }
    }
    VortexSystem::new(positions, circulations, label)
}

/// `t,particle_id,x,y`, one row per particle per sample.
pub fn write_trajectory<W: Write>(mut w: W, trajectory: &Trajectory) -> Result<()> {
    writeln!(w, "t,particle_id,x,y")?;
    let mut buf = String::new();
    for (t, state) in trajectory.times.iter().zip(&trajectory.states) {
        buf.clear();
        let t = fmt_f64(*t);
        for (i, p) in state.iter().enumerate() {
            let _ = writeln!(buf, "{t},{i},{},{}", fmt_f64(p.x), fmt_f64(p.y));
        }
        w.write_all(buf.as_bytes())?;
    }
    Ok(())
}

/// One JSON object per line.
pub fn write_diagnostics<W: Write>(mut w: W, records: &[DiagnosticsRecord]) -> Result<()> {
    for d in records {
        writeln!(
            w,
            "{{\"t\":{},\"circulation\":{},\"impulse_x\":{},\"impulse_y\":{},\"angular_impulse\":{},\"hamiltonian\":{}}}",
            json_f64(d.t),
            json_f64(d.circulation),
            json_f64(d.impulse_x),
            json_f64(d.impulse_y),
            json_f64(d.angular_impulse),
            json_f64(d.hamiltonian)
        )?;
    }
    Ok(())
}

/// JSON has no NaN or infinity; those become `null`.
fn json_f64(v: f64) -> String {
    if v.is_finite() {
        fmt_f64(v)
    } else {
        "null".to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn system_round_trip_is_exact() {
        let s = VortexSystem::new(
            vec![Vec2::new(0.1, -1.0 / 3.0), Vec2::new(1e-300, 7.0)],
            vec![std::f64::consts::PI, -2.5],
            "s",
        )
        .unwrap();
        let mut buf = Vec::new();
        write_system(&mut buf, &s).unwrap();
        let back = read_system(buf.as_slice(), "s").unwrap();
        assert_eq!(back.positions(), s.positions());
        assert_eq!(back.circulations(), s.circulations());
    }

    #[test]
    fn bad_row_is_reported() {
        let err = read_system("x,y,gamma\n1,2\n".as_bytes(), "s").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn diagnostics_lines_parse_as_numbers() {
        let d = DiagnosticsRecord {
            t: 0.5,
            circulation: 1.0,
            impulse_x: 0.0,
            impulse_y: -0.25,
            angular_impulse: 2.0,
            hamiltonian: f64::NAN,
        };
        let mut buf = Vec::new();
        write_diagnostics(&mut buf, &[d]).unwrap();
        let line = String::from_utf8(buf).unwrap();
        assert!(line.starts_with("{\"t\":5.0000000000000000e-1,"), "{line}");
        assert!(line.trim_end().ends_with("\"hamiltonian\":null}"));
    }
}
