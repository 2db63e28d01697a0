//! SVG rendering of trajectories over the map.

use std::fmt::Write;

use fleetplan::post::Schedule;
use fleetplan::Graph;

const SCALE: f64 = 40.0;
const MARGIN: f64 = 1.0;

/// `paths[r]` holds `(t, x, y)` samples of robot `r` in time order.
/// Schedule waypoints are drawn as dots titled with their times.
pub fn svg(
    graph: &Graph,
    paths: &[Vec<(f64, f64, f64)>],
    schedule: Option<&Schedule<f64>>,
) -> String {
    let (mut x0, mut y0, mut x1, mut y1) = (
        f64::INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::NEG_INFINITY,
    );
    for v in graph.vertices() {
        let p = graph.position(v);
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    if !x0.is_finite() {
        (x0, y0, x1, y1) = (0.0, 0.0, 0.0, 0.0);
    }
    let px = |x: f64| (x - x0 + MARGIN) * SCALE;
    let py = |y: f64| (y - y0 + MARGIN) * SCALE;
    let width = (x1 - x0 + 2.0 * MARGIN) * SCALE;
    let height = (y1 - y0 + 2.0 * MARGIN) * SCALE;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.1}" height="{height:.1}" viewBox="0 0 {width:.1} {height:.1}">"#
    );
    out.push_str("<g class=\"map\" stroke=\"#bbb\" stroke-width=\"2\">\n");
    for e in graph.edges() {
        let (a, b) = (graph.position(e.u), graph.position(e.v));
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#,
            px(a.x),
            py(a.y),
            px(b.x),
            py(b.y)
        );
    }
    out.push_str("</g>\n<g class=\"vertices\" fill=\"#888\">\n");
    for v in graph.vertices() {
        let p = graph.position(v);
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3"><title>{}</title></circle>"#,
            px(p.x),
            py(p.y),
            escape(graph.name(v))
        );
    }
    out.push_str("</g>\n");

    let n = paths.len().max(1);
    for (r, samples) in paths.iter().enumerate() {
        let color = format!("hsl({:.0},70%,45%)", r as f64 * 360.0 / n as f64);
        let mut d = String::new();
        let mut last: Option<(f64, f64)> = None;
        for (i, &(_, x, y)) in samples.iter().enumerate() {
            // Waiting produces repeated samples; keep the first and the last.
            if last == Some((x, y)) && i + 1 != samples.len() {
                continue;
            }
            let _ = write!(
                d,
                "{}{:.2} {:.2} ",
                if last.is_none() { "M" } else { "L" },
                px(x),
                py(y)
            );
            last = Some((x, y));
        }
        let (t0, t1) = match (samples.first(), samples.last()) {
            (Some(a), Some(b)) => (a.0, b.0),
            _ => (0.0, 0.0),
        };
        let _ = writeln!(
            out,
            r#"<path class="robot" data-robot="{r}" d="{}" fill="none" stroke="{color}" stroke-width="2.5" stroke-opacity="0.8"><title>robot {r}: t={t0:.2}..{t1:.2}</title></path>"#,
            d.trim_end()
        );
        if let Some(s) = schedule.filter(|s| r < s.num_robots()) {
            let _ = writeln!(
                out,
                r#"<g class="waypoints" data-robot="{r}" fill="{color}">"#
            );
            for wp in s.robots()[r].iter().filter(|wp| wp.vertex.is_some()) {
                let _ = writeln!(
                    out,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="4"><title>robot {r} t={:.3}</title></circle>"#,
                    px(wp.position.x),
                    py(wp.position.y),
                    wp.time
                );
            }
            out.push_str("</g>\n");
        }
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
