//! Per-step evaluation traces and their textual format.
//!
//! One record per line: step index, task id, per-robot pose and chosen
//! brain, cumulative fitness. Floats carry 17 significant digits so a trace
//! re-scored from file reproduces the original fitness exactly.

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotSnapshot {
    pub position: Vec2,
    pub heading: f64,
    pub chosen_brain: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub step: u32,
    pub task: usize,
    pub robots: Vec<RobotSnapshot>,
    pub cumulative_fitness: f64,
}

/// Serialize records; the header comment names the domain and robot count.
pub fn trace_to_text(domain: &str, records: &[TraceRecord]) -> String {
    let robots = records.first().map_or(0, |r| r.robots.len());
    let mut out = format!("# trace {domain} robots={robots}\n");
    for r in records {
        write!(out, "{} {}", r.step, r.task).unwrap();
        for robot in &r.robots {
            write!(
                out,
                " {:.16e} {:.16e} {:.16e} {}",
                robot.position.x, robot.position.y, robot.heading, robot.chosen_brain
            )
            .unwrap();
        }
        writeln!(out, " {:.16e}", r.cumulative_fitness).unwrap();
    }
    out
}

pub fn trace_from_text(text: &str) -> Result<Vec<TraceRecord>> {
    let mut records = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        // step task (x y heading brain)+ fitness
        if fields.len() < 7 || (fields.len() - 3) % 4 != 0 {
            return Err(Error::parse(line_no, "malformed trace record"));
        }
        let parse_f = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::parse(line_no, format!("invalid number `{s}`")))
        };
        let step: u32 = fields[0]
            .parse()
            .map_err(|_| Error::parse(line_no, format!("invalid step `{}`", fields[0])))?;
        let task: usize = fields[1]
            .parse()
            .map_err(|_| Error::parse(line_no, format!("invalid task `{}`", fields[1])))?;
        let mut robots = Vec::new();
        for chunk in fields[2..fields.len() - 1].chunks(4) {
            robots.push(RobotSnapshot {
                position: Vec2::new(parse_f(chunk[0])?, parse_f(chunk[1])?),
                heading: parse_f(chunk[2])?,
                chosen_brain: chunk[3]
                    .parse()
                    .map_err(|_| Error::parse(line_no, format!("invalid brain `{}`", chunk[3])))?,
            });
        }
        records.push(TraceRecord {
            step,
            task,
            robots,
            cumulative_fitness: parse_f(fields[fields.len() - 1])?,
        });
    }
    Ok(records)
}
