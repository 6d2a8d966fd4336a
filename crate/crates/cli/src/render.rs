//! Dependency-free SVG emission for the three figure kinds: the profile
//! graphs, a fiber CDF with its atoms, and orbit scatter plots. Output is
//! plain text with fixed float formatting, so renders are byte-deterministic
//! and diffable.

use minimal_bottle_core::circle::{CirclePoint, Lift};
use minimal_bottle_core::{ProfileSpec, TransportEngine};
use std::fmt::Write as _;

const W: f64 = 800.0;
const H: f64 = 600.0;
const MARGIN: f64 = 50.0;

struct Canvas {
    body: String,
    x_max: f64,
}

impl Canvas {
    fn new(x_max: f64) -> Self {
        Self {
            body: String::new(),
            x_max,
        }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + x / self.x_max * (W - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        // SVG y grows downward.
        H - MARGIN - y * (H - 2.0 * MARGIN)
    }

    fn polyline(&mut self, pts: &[(f64, f64)], color: &str, width: f64) {
        if pts.len() < 2 {
            return;
        }
        let mut attr = String::new();
        for (x, y) in pts {
            let _ = write!(attr, "{:.2},{:.2} ", self.px(*x), self.py(*y));
        }
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="{width}"/>"#,
            attr.trim_end()
        );
    }

    fn line(&mut self, a: (f64, f64), b: (f64, f64), color: &str, width: f64) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="{width}"/>"#,
            self.px(a.0),
            self.py(a.1),
            self.px(b.0),
            self.py(b.1)
        );
    }

    fn circle(&mut self, center: (f64, f64), r: f64, color: &str) {
        let _ = writeln!(
            self.body,
            r#"<circle cx="{:.2}" cy="{:.2}" r="{r}" fill="{color}"/>"#,
            self.px(center.0),
            self.py(center.1)
        );
    }

    fn marker(&mut self, center: (f64, f64), label: &str) {
        let (cx, cy) = (self.px(center.0), self.py(center.1));
        let _ = writeln!(
            self.body,
            r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="5" fill="none" stroke="black" stroke-width="1.5"/>"#
        );
        let _ = writeln!(
            self.body,
            r#"<text x="{:.2}" y="{:.2}" font-size="12" font-family="monospace">{label}</text>"#,
            cx + 8.0,
            cy - 8.0
        );
    }

    fn finish(self, title: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
        );
        let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<rect x="{m}" y="{m}" width="{w:.2}" height="{h:.2}" fill="none" stroke="#999"/>"#,
            m = MARGIN,
            w = W - 2.0 * MARGIN,
            h = H - 2.0 * MARGIN
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="30" font-size="16" font-family="monospace">{title}</text>"#,
            MARGIN
        );
        for frac in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let x = MARGIN + frac * (W - 2.0 * MARGIN);
            let y = H - MARGIN - frac * (H - 2.0 * MARGIN);
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{}" font-size="10" font-family="monospace" text-anchor="middle">{:.2}</text>"#,
                x,
                H - MARGIN + 16.0,
                frac * self.x_max
            );
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{:.2}" font-size="10" font-family="monospace" text-anchor="end">{frac:.2}</text>"#,
                MARGIN - 6.0,
                y + 3.0
            );
        }
        out.push_str(&self.body);
        out.push_str("</svg>\n");
        out
    }
}

/// Break a sampled circle-valued graph into continuous runs so wrap jumps do
/// not draw spurious vertical strokes.
fn runs(samples: &[(f64, f64)]) -> Vec<Vec<(f64, f64)>> {
    let mut out: Vec<Vec<(f64, f64)>> = Vec::new();
    let mut current: Vec<(f64, f64)> = Vec::new();
    for &(x, y) in samples {
        if let Some(&(_, py)) = current.last() {
            if (y - py).abs() > 0.5 {
                out.push(std::mem::take(&mut current));
            }
        }
        current.push((x, y));
    }
    if !current.is_empty() {
        out.push(current);
    }
    out
}

/// Both profile graphs with the transversal crossings marked.
pub fn render_profiles(profile: &ProfileSpec, samples: usize) -> String {
    let mut canvas = Canvas::new(1.0);
    let sample = |f: &dyn Fn(CirclePoint) -> Lift| -> Vec<(f64, f64)> {
        (0..=samples)
            .map(|i| {
                let x = i as f64 / samples as f64;
                (x, f(CirclePoint::from_f64(x)).as_f64())
            })
            .collect()
    };
    let phi = sample(&|x| profile.phi(x));
    let psi = sample(&|x| profile.psi(x));
    for run in runs(&phi) {
        canvas.polyline(&run, "green", 1.5);
    }
    for run in runs(&psi) {
        canvas.polyline(&run, "red", 1.5);
    }
    canvas.marker(
        (profile.x1_star().to_f64(), profile.y1_star().as_f64()),
        "z1*",
    );
    canvas.marker(
        (profile.x2_star().to_f64(), profile.y2_star().as_f64()),
        "z2*",
    );
    canvas.finish("profiles phi (green) and psi (red)")
}

/// The fiber CDF `y -> mu_x[0, y]` over one base point, atoms marked as
/// vertical jump segments.
pub fn render_measure(engine: &TransportEngine, x: CirclePoint, grid: usize) -> String {
    let kernel = engine.fiber(x);
    let mut canvas = Canvas::new(1.0);
    let pts: Vec<(f64, f64)> = (0..=grid)
        .map(|i| {
            let y = i as f64 / grid as f64;
            (y, kernel.cdf(Lift::from_f64(y)).value)
        })
        .collect();
    canvas.polyline(&pts, "#1f4e9c", 1.5);
    for atom in kernel.atoms() {
        let pos = atom.position.to_f64();
        let top = kernel.cdf(Lift::from_f64(pos)).value;
        canvas.line((pos, top - atom.mass), (pos, top), "red", 2.5);
        canvas.circle((pos, top), 3.0, "red");
    }
    canvas.finish(&format!("fiber cdf at x = {:.6}", x.to_f64()))
}

/// Scatter plot of an orbit; `x_max` is 1 for torus orbits and 1/2 for the
/// canonical Klein domain.
pub fn render_orbit<I: Iterator<Item = (f64, f64)>>(points: I, x_max: f64, title: &str) -> String {
    let mut canvas = Canvas::new(x_max);
    for (x, y) in points {
        canvas.circle((x, y), 1.2, "#1f4e9c");
    }
    canvas.finish(title)
}

#[cfg(test)]
mod tests {
    use super::*;
    use minimal_bottle_core::transport::EngineParams;
    use minimal_bottle_core::CocycleSpec;

    #[test]
    fn profiles_svg_marks_both_crossings() {
        let p = ProfileSpec::default_star();
        let svg = render_profiles(&p, 500);
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("z1*") && svg.contains("z2*"));
        assert_eq!(svg.matches("<polyline").count() >= 4, true);
    }

    #[test]
    fn measure_svg_shows_star_jump() {
        let e = TransportEngine::new(
            ProfileSpec::default_star(),
            CocycleSpec::default_liouville(),
            EngineParams::default(),
        )
        .unwrap();
        let svg = render_measure(&e, e.profile().x1_star(), 200);
        // The quarter-mass atom at y1* draws a red jump segment.
        assert!(svg.contains("stroke=\"red\""));
    }

    #[test]
    fn renders_are_deterministic() {
        let p = ProfileSpec::default_star();
        assert_eq!(render_profiles(&p, 300), render_profiles(&p, 300));
    }
}
