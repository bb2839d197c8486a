use std::fmt::Write as _;
use std::fs;
use std::path::Path as FsPath;

use serde::Serialize;

use super::{TrainResult, Test};
use crate::error::Result;
use crate::featmap::{Feature, Trajectory};

#[derive(Serialize)]
struct Summary<'a> {
    test: Test,
    constraint: &'a str,
    gamma: f64,
    eta: f64,
    epochs: usize,
    learning_rate: f64,
    seed: u64,
    n: usize,
    final_imitation_loss: f64,
    final_constraint_loss: f64,
    final_total_loss: f64,
    satisfied: bool,
}

/// Writes `losses.csv`, `trajectory.csv`, `result.json` and `plot.svg`
/// into `dir`, creating it if needed.
pub fn write_outputs(result: &TrainResult, dir: &FsPath) -> Result<()> {
    fs::create_dir_all(dir)?;

    let mut w = csv::Writer::from_path(dir.join("losses.csv"))?;
    w.write_record(["epoch", "L_d", "constraint_loss", "L_full"])?;
    for e in &result.series {
        w.write_record([
            e.epoch.to_string(),
            e.imitation.to_string(),
            e.constraint.to_string(),
            e.total.to_string(),
        ])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("trajectory.csv"))?;
    w.write_record(["i", "demo_x", "demo_y", "learned_x", "learned_y"])?;
    for (i, (d, q)) in result
        .demonstrator
        .points
        .iter()
        .zip(&result.trajectory.points)
        .enumerate()
    {
        w.write_record([
            i.to_string(),
            d[0].to_string(),
            d[1].to_string(),
            q[0].to_string(),
            q[1].to_string(),
        ])?;
    }
    w.flush()?;

    let c = &result.config;
    let summary = Summary {
        test: c.test,
        constraint: &result.constraint,
        gamma: c.gamma,
        eta: c.eta,
        epochs: c.epochs,
        learning_rate: c.learning_rate,
        seed: c.seed,
        n: c.n,
        final_imitation_loss: result.final_imitation,
        final_constraint_loss: result.final_constraint,
        final_total_loss: result.final_total,
        satisfied: result.satisfied,
    };
    let mut json = serde_json::to_string_pretty(&summary)?;
    json.push('\n');
    fs::write(dir.join("result.json"), json)?;

    fs::write(dir.join("plot.svg"), plot_svg(result))?;
    Ok(())
}

const SIZE: f64 = 500.0;
const LO: f64 = -0.1;
const HI: f64 = 1.1;

fn sx(x: f64) -> f64 {
    (x - LO) / (HI - LO) * SIZE
}

fn sy(y: f64) -> f64 {
    SIZE - (y - LO) / (HI - LO) * SIZE
}

enum Shape {
    Circle([f64; 2], f64),
    Line(usize, f64),
}

/// Geometry implied by comparisons between a trajectory feature and a
/// constant: balls around distance targets and coordinate thresholds.
fn shapes(result: &TrainResult) -> Vec<Shape> {
    let pc = result.parsed_constraint();
    let features = &result.feature_spec().features;
    let constant = |i: i64| pc.bindings.iter().find(|b| b.index == i).map(|b| b.value);
    let mut out: Vec<Shape> = Vec::new();
    pc.ast.for_each_comp(&mut |comp| {
        let (a, b) = comp.indices();
        for (f, k) in [(a, b), (b, a)] {
            let (Some(v), Some(feature)) = (constant(k), usize::try_from(f).ok().and_then(|f| features.get(f)))
            else {
                continue;
            };
            let shape = match *feature {
                Feature::DistanceTo(o) => Shape::Circle(o, v),
                Feature::Coord(axis) => Shape::Line(axis, v),
                Feature::Constant(_) => continue,
            };
            let dup = out.iter().any(|s| match (s, &shape) {
                (Shape::Circle(o1, r1), Shape::Circle(o2, r2)) => o1 == o2 && r1 == r2,
                (Shape::Line(a1, v1), Shape::Line(a2, v2)) => a1 == a2 && v1 == v2,
                _ => false,
            });
            if !dup {
                out.push(shape);
            }
        }
    });
    out
}

fn polyline(svg: &mut String, t: &Trajectory, style: &str) {
    let pts: Vec<String> = t
        .points
        .iter()
        .map(|p| format!("{:.2},{:.2}", sx(p[0]), sy(p[1])))
        .collect();
    let _ = writeln!(svg, r#"  <polyline points="{}" fill="none" {style}/>"#, pts.join(" "));
}

/// Demonstrator and learned trajectories over the constraint geometry.
pub fn plot_svg(result: &TrainResult) -> String {
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(svg, r#"  <rect width="{SIZE}" height="{SIZE}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r##"  <rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#ccc"/>"##,
        sx(0.0),
        sy(1.0),
        sx(1.0) - sx(0.0),
        sy(0.0) - sy(1.0)
    );
    let scale = SIZE / (HI - LO);
    for shape in shapes(result) {
        match shape {
            Shape::Circle(o, r) if r > 0.0 => {
                let _ = writeln!(
                    svg,
                    r##"  <circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="#f4cccc" stroke="#c00"/>"##,
                    sx(o[0]),
                    sy(o[1]),
                    r * scale
                );
            }
            Shape::Circle(o, _) => {
                let _ = writeln!(
                    svg,
                    r##"  <circle cx="{:.2}" cy="{:.2}" r="5" fill="#c00"/>"##,
                    sx(o[0]),
                    sy(o[1])
                );
            }
            Shape::Line(0, v) => {
                let _ = writeln!(
                    svg,
                    r##"  <line x1="{0:.2}" y1="0" x2="{0:.2}" y2="{SIZE}" stroke="#c00" stroke-dasharray="4 3"/>"##,
                    sx(v)
                );
            }
            Shape::Line(_, v) => {
                let _ = writeln!(
                    svg,
                    r##"  <line x1="0" y1="{0:.2}" x2="{SIZE}" y2="{0:.2}" stroke="#c00" stroke-dasharray="4 3"/>"##,
                    sy(v)
                );
            }
        }
    }
    polyline(&mut svg, &result.demonstrator, r##"stroke="#888" stroke-dasharray="3 2""##);
    polyline(&mut svg, &result.trajectory, r##"stroke="#1f5fbf" stroke-width="2""##);
    let _ = writeln!(
        svg,
        r#"  <text x="8" y="18" font-family="sans-serif" font-size="13">{} eta={} gamma={}</text>"#,
        result.config.test, result.config.eta, result.config.gamma
    );
    svg.push_str("</svg>\n");
    svg
}
