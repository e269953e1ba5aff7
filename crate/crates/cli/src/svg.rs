//! Minimal SVG 1.1 writer: polylines, rectangles, circles, text and a linear
//! data-to-pixel mapping. Output depends only on the inputs.

use std::fmt::Write as _;

use viable_sde::geometry::Polyhedron;

pub struct Svg {
    width: f64,
    height: f64,
    body: String,
}

fn num(x: f64) -> String {
    format!("{:.2}", x)
}

impl Svg {
    pub fn new(width: f64, height: f64) -> Self {
        Self {
            width,
            height,
            body: String::new(),
        }
    }

    pub fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{fill}"/>"#,
            num(x),
            num(y),
            num(w),
            num(h)
        );
    }

    pub fn line(&mut self, a: (f64, f64), b: (f64, f64), stroke: &str, width: f64, dashed: bool) {
        let dash = if dashed { r#" stroke-dasharray="6,4""# } else { "" };
        let _ = writeln!(
            self.body,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{stroke}" stroke-width="{}"{dash}/>"#,
            num(a.0),
            num(a.1),
            num(b.0),
            num(b.1),
            num(width)
        );
    }

    pub fn polyline(&mut self, points: &[(f64, f64)], stroke: &str, width: f64) {
        if points.is_empty() {
            return;
        }
        let pts: Vec<String> = points.iter().map(|(x, y)| format!("{},{}", num(*x), num(*y))).collect();
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="{}"/>"#,
            pts.join(" "),
            num(width)
        );
    }

    pub fn polygon(&mut self, points: &[(f64, f64)], stroke: &str, width: f64) {
        let pts: Vec<String> = points.iter().map(|(x, y)| format!("{},{}", num(*x), num(*y))).collect();
        let _ = writeln!(
            self.body,
            r#"<polygon points="{}" fill="none" stroke="{stroke}" stroke-width="{}"/>"#,
            pts.join(" "),
            num(width)
        );
    }

    pub fn circle(&mut self, c: (f64, f64), r: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            r#"<circle cx="{}" cy="{}" r="{}" fill="{fill}"/>"#,
            num(c.0),
            num(c.1),
            num(r)
        );
    }

    pub fn text(&mut self, at: (f64, f64), size: f64, anchor: &str, s: &str) {
        let escaped = s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;");
        let _ = writeln!(
            self.body,
            r#"<text x="{}" y="{}" font-size="{}" font-family="sans-serif" text-anchor="{anchor}">{escaped}</text>"#,
            num(at.0),
            num(at.1),
            num(size)
        );
    }

    pub fn finish(self) -> String {
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
             <svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
             <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{body}</svg>\n",
            w = self.width,
            h = self.height,
            body = self.body
        )
    }
}

/// Maps a data rectangle onto a pixel rectangle (y axis flipped).
#[derive(Debug, Clone, Copy)]
pub struct Frame {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub left: f64,
    pub top: f64,
    pub width: f64,
    pub height: f64,
}

impl Frame {
    pub fn map(&self, x: f64, y: f64) -> (f64, f64) {
        (
            self.left + (x - self.x0) / (self.x1 - self.x0) * self.width,
            self.top + (1.0 - (y - self.y0) / (self.y1 - self.y0)) * self.height,
        )
    }

    pub fn axes(&self, svg: &mut Svg, xlabel: &str, ylabel: &str) {
        let bl = (self.left, self.top + self.height);
        svg.line(bl, (self.left + self.width, bl.1), "black", 1.0, false);
        svg.line(bl, (self.left, self.top), "black", 1.0, false);
        for k in 0..=4 {
            let fx = self.x0 + (self.x1 - self.x0) * k as f64 / 4.0;
            let (px, py) = self.map(fx, self.y0);
            svg.line((px, py), (px, py + 4.0), "black", 1.0, false);
            svg.text((px, py + 16.0), 10.0, "middle", &tick(fx));
            let fy = self.y0 + (self.y1 - self.y0) * k as f64 / 4.0;
            let (qx, qy) = self.map(self.x0, fy);
            svg.line((qx - 4.0, qy), (qx, qy), "black", 1.0, false);
            svg.text((qx - 6.0, qy + 3.0), 10.0, "end", &tick(fy));
        }
        svg.text((self.left + self.width / 2.0, self.top + self.height + 32.0), 12.0, "middle", xlabel);
        svg.text((self.left - 40.0, self.top + self.height / 2.0), 12.0, "middle", ylabel);
    }
}

fn tick(x: f64) -> String {
    let s = format!("{:.3}", x);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

pub fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

/// Blue-to-yellow ramp for values in `[0, 1]`.
pub fn ramp(v: f64) -> String {
    let v = v.clamp(0.0, 1.0);
    let stops = [(68.0, 1.0, 84.0), (59.0, 82.0, 139.0), (33.0, 145.0, 140.0), (94.0, 201.0, 98.0), (253.0, 231.0, 37.0)];
    let s = v * (stops.len() - 1) as f64;
    let i = (s.floor() as usize).min(stops.len() - 2);
    let f = s - i as f64;
    let (a, b) = (stops[i], stops[i + 1]);
    let mix = |x: f64, y: f64| (x + f * (y - x)).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

/// Vertices of a 2D polyhedron in counterclockwise order.
pub fn polygon_vertices(poly: &Polyhedron) -> Vec<[f64; 2]> {
    let hs = poly.halfspaces();
    let mut verts: Vec<[f64; 2]> = Vec::new();
    for i in 0..hs.len() {
        for j in i + 1..hs.len() {
            let (a, b) = (hs[i].normal(), hs[j].normal());
            let det = a[0] * b[1] - a[1] * b[0];
            if det.abs() < 1e-12 {
                continue;
            }
            // ⟨z, v⟩ = ⟨u, v⟩ for both facets
            let ca = a[0] * hs[i].anchor()[0] + a[1] * hs[i].anchor()[1];
            let cb = b[0] * hs[j].anchor()[0] + b[1] * hs[j].anchor()[1];
            let z = [(ca * b[1] - cb * a[1]) / det, (a[0] * cb - b[0] * ca) / det];
            if poly.contains(&z, 1e-9) && !verts.iter().any(|v| (v[0] - z[0]).abs() + (v[1] - z[1]).abs() < 1e-9) {
                verts.push(z);
            }
        }
    }
    let c = poly.chebyshev_center().0;
    verts.sort_by(|p, q| {
        let ap = (p[1] - c[1]).atan2(p[0] - c[0]);
        let aq = (q[1] - c[1]).atan2(q[0] - c[0]);
        ap.total_cmp(&aq)
    });
    verts
}
