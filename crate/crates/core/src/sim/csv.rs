//! CSV output of trajectories and event logs.
//!
//! Trajectory files have the header `time,<var>,...` and one row per
//! sample. Event logs have the header `time,kind,transition` where `kind`
//! is `stochastic` or `instantaneous` and `transition` is the transition
//! label. Numbers use the shortest representation that reads back to the
//! same double.

use std::io::{self, Write};

use super::trajectory::Trajectory;
use crate::ir::VarKind;

/// Quotes a field when it contains a separator, quote or line break.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Indices of the model's stream variables (state indicators and the clock
/// are left out).
pub fn stream_columns(t: &Trajectory) -> Vec<usize> {
    (0..t.n_vars())
        .filter(|&i| t.kinds[i] == VarKind::Stream)
        .collect()
}

pub fn write_trajectory_csv<W: Write>(t: &Trajectory, cols: &[usize], w: &mut W) -> io::Result<()> {
    let mut line = String::from("time");
    for &c in cols {
        line.push(',');
        line.push_str(&csv_field(&t.names[c]));
    }
    line.push('\n');
    w.write_all(line.as_bytes())?;
    for i in 0..t.len() {
        line.clear();
        line.push_str(&t.times[i].to_string());
        let row = t.row(i);
        for &c in cols {
            line.push(',');
            line.push_str(&row[c].to_string());
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    Ok(())
}

pub fn write_events_csv<W: Write>(t: &Trajectory, w: &mut W) -> io::Result<()> {
    writeln!(w, "time,kind,transition")?;
    for e in &t.events {
        writeln!(
            w,
            "{},{},{}",
            e.time,
            e.kind.as_str(),
            csv_field(t.event_label(e))
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quoting() {
        assert_eq!(csv_field("P[a:b]"), "P[a:b]");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"x\""), "\"say \"\"x\"\"\"");
    }
}
