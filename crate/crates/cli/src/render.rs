//! Butterfly images: energy horizontally, frequency vertically.
//!
//! Every band of every row is one horizontal segment at height `p/q`. Open
//! gaps can be filled with a strip colored by Hall number, red for positive
//! and blue for negative, darker with larger `|n|`.

use std::fmt::Write;

use harper_core::butterfly::ButterflyDataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Svg,
    Ppm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Style {
    pub width: u32,
    pub height: u32,
    pub fill_gaps: bool,
    pub format: Format,
}

impl Default for Style {
    fn default() -> Self {
        Self { width: 800, height: 800, fill_gaps: false, format: Format::Svg }
    }
}

const MARGIN: f64 = 10.0;
/// Hall numbers at or beyond this get the darkest shade.
const PALETTE_SPAN: i64 = 6;

pub fn hall_color(n: i64) -> [u8; 3] {
    let t = n.abs().min(PALETTE_SPAN) as f64 / PALETTE_SPAN as f64;
    let light = (235.0 - 180.0 * t).round() as u8;
    match n.signum() {
        1 => [220, light, light],
        -1 => [light, light, 220],
        _ => [200, 200, 200],
    }
}

struct Frame {
    e_max: f64,
    w: f64,
    h: f64,
}

impl Frame {
    fn new(d: &ButterflyDataset, style: &Style) -> Self {
        let e_max =
            d.rows.iter().flat_map(|r| r.bands.iter()).fold(0.0f64, |m, b| m.max(b.lo.abs()).max(b.hi.abs())).max(1e-9);
        Self { e_max, w: style.width as f64, h: style.height as f64 }
    }

    fn x(&self, e: f64) -> f64 {
        MARGIN + (e + self.e_max) / (2.0 * self.e_max) * (self.w - 2.0 * MARGIN)
    }

    fn y(&self, alpha: f64) -> f64 {
        self.h - MARGIN - alpha * (self.h - 2.0 * MARGIN)
    }

    fn strip(&self, q_max: u64) -> f64 {
        ((self.h - 2.0 * MARGIN) / (2.0 * (q_max * q_max) as f64)).clamp(1.0, 4.0)
    }
}

pub fn render(d: &ButterflyDataset, style: &Style) -> Result<Vec<u8>, String> {
    if d.rows.is_empty() {
        return Err("nothing to render".into());
    }
    if style.width < 3 * MARGIN as u32 || style.height < 3 * MARGIN as u32 {
        return Err(format!("image size {}x{} is too small", style.width, style.height));
    }
    Ok(match style.format {
        Format::Svg => svg(d, style).into_bytes(),
        Format::Ppm => ppm(d, style),
    })
}

fn svg(d: &ButterflyDataset, style: &Style) -> String {
    let fr = Frame::new(d, style);
    let strip = fr.strip(d.q_max);
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        style.width, style.height, style.width, style.height
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    if style.fill_gaps {
        writeln!(s, r#"<g id="gaps">"#).unwrap();
        for r in &d.rows {
            let y = fr.y(r.freq.alpha()) - strip / 2.0;
            for g in r.open_gaps() {
                let [cr, cg, cb] = hall_color(g.n);
                writeln!(
                    s,
                    r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="rgb({cr},{cg},{cb})" data-hall="{}"/>"#,
                    fr.x(g.lo),
                    y,
                    fr.x(g.hi) - fr.x(g.lo),
                    strip,
                    g.n
                )
                .unwrap();
            }
        }
        writeln!(s, "</g>").unwrap();
    }
    writeln!(s, r#"<g id="bands" stroke="black" stroke-width="{:.3}">"#, strip.min(1.5)).unwrap();
    for r in &d.rows {
        let y = fr.y(r.freq.alpha());
        for b in &r.bands {
            writeln!(s, r#"<line x1="{:.3}" y1="{y:.3}" x2="{:.3}" y2="{y:.3}"/>"#, fr.x(b.lo), fr.x(b.hi)).unwrap();
        }
    }
    writeln!(s, "</g>\n</svg>").unwrap();
    s
}

fn ppm(d: &ButterflyDataset, style: &Style) -> Vec<u8> {
    let fr = Frame::new(d, style);
    let (w, h) = (style.width as usize, style.height as usize);
    let mut px = vec![255u8; w * h * 3];
    // fills [x0, x1) x [y0, y1), at least one pixel each way
    let mut span = |x0: f64, x1: f64, y0: f64, y1: f64, c: [u8; 3]| {
        let cover = |a: f64, b: f64, n: usize| {
            let lo = (a.floor().max(0.0) as usize).min(n);
            (lo, (b.ceil().max(0.0) as usize).max(lo + 1).min(n))
        };
        let (xa, xb) = cover(x0, x1, w);
        let (ya, yb) = cover(y0, y1, h);
        for y in ya..yb {
            for x in xa..xb {
                px[(y * w + x) * 3..(y * w + x) * 3 + 3].copy_from_slice(&c);
            }
        }
    };
    if style.fill_gaps {
        let strip = fr.strip(d.q_max);
        for r in &d.rows {
            let y = fr.y(r.freq.alpha());
            for g in r.open_gaps() {
                span(fr.x(g.lo), fr.x(g.hi), y - strip / 2.0, y + strip / 2.0, hall_color(g.n));
            }
        }
    }
    for r in &d.rows {
        let y = fr.y(r.freq.alpha()).floor();
        for b in &r.bands {
            span(fr.x(b.lo), fr.x(b.hi), y, y + 1.0, [0, 0, 0]);
        }
    }
    let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
    out.extend_from_slice(&px);
    out
}
