//! Development of the nested chain `g_1, g_2, ...` in the upper half-plane.
//!
//! Base: `g_1 = (0, ∞)`, `g_2 = (-1, ∞)`. Step `n >= 2` takes the diagonal
//! `g_n = (a, c)` of the quadrilateral spanned by `g_{n-1}` and `g_{n+1}`,
//! labeled so that `(a, c, d)` is positively oriented where `d` is the
//! endpoint of `g_{n-1}` off `g_n`; the new vertex `b` solves
//! `cr(a, b, c, d) = e^{s_n}` and `g_{n+1}` joins `b` to the endpoint of `g_n`
//! not shared with `g_{n-1}`.
//!
//! Each step is solved in a local frame where the previous quadrilateral sits
//! at `0, ∞, -1, e^{s}`, so the solve never sees clustered coordinates. A
//! cumulative Möbius map carries local points to global ones; the global
//! chain is what nestedness and gaps are measured on.

use std::cmp::Ordering;
use std::fmt::Write as _;

use rug::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hyp::{
    bracket, orientation_hom, shear_hom, working_prec, BoundaryPoint, Geodesic, Hom, MobiusMap,
};
use crate::shear::ShearSequence;

/// `b` with `cr(a, b, c, d) = e^s`, as the homogeneous point
/// `[c,d] a + e^s [a,d] c`.
pub fn develop_next_vertex_hom(a: &Hom, c: &Hom, d: &Hom, s: &Float) -> Result<Hom> {
    let prec = a[0].prec();
    let cd = bracket(c, d);
    let ad = bracket(a, d);
    let ac = bracket(a, c);
    for (v, first, second) in [(&cd, "c", "d"), (&ad, "a", "d"), (&ac, "a", "c")] {
        if v.is_zero() {
            return Err(Error::Coincident { first, second });
        }
    }
    if !s.is_finite() {
        return Err(Error::domain("shear must be finite"));
    }
    let k = Float::with_val(prec, s.exp_ref()) * ad;
    let b = [
        Float::with_val(prec, &cd * &a[0]) + Float::with_val(prec, &k * &c[0]),
        Float::with_val(prec, &cd * &a[1]) + Float::with_val(prec, &k * &c[1]),
    ];
    if b[0].is_zero() && b[1].is_zero() {
        return Err(Error::domain(
            "degenerate quadrilateral: new vertex is undefined",
        ));
    }
    Ok(b)
}

pub fn develop_next_vertex(
    a: &BoundaryPoint,
    c: &BoundaryPoint,
    d: &BoundaryPoint,
    s: &Float,
) -> Result<BoundaryPoint> {
    let prec = working_prec(&[a, c, d]).max(s.prec());
    let b = develop_next_vertex_hom(&a.to_hom(prec), &c.to_hom(prec), &d.to_hom(prec), s)?;
    BoundaryPoint::from_hom(&b)
}

/// Chordal distance between two ideal points after the Cayley map to the
/// unit disk: `2 |[x, y]| / (|x| |y|)`.
pub fn chordal(x: &Hom, y: &Hom) -> Float {
    let prec = x[0].prec();
    let nx = Float::with_val(prec, x[0].square_ref()) + Float::with_val(prec, x[1].square_ref());
    let ny = Float::with_val(prec, y[0].square_ref()) + Float::with_val(prec, y[1].square_ref());
    bracket(x, y).abs() * 2u32 / (nx * ny).sqrt()
}

/// Cayley image `((x² - y²) - 2xy i) / (x² + y²)` of a real homogeneous point,
/// in binary64 for drawing.
pub fn cayley_f64(h: &Hom) -> (f64, f64) {
    let prec = h[0].prec();
    let n = Float::with_val(prec, h[0].square_ref()) + Float::with_val(prec, h[1].square_ref());
    let re =
        (Float::with_val(prec, h[0].square_ref()) - Float::with_val(prec, h[1].square_ref())) / &n;
    let im = Float::with_val(prec, &h[0] * &h[1]) * -2i32 / n;
    (re.to_f64(), im.to_f64())
}

/// Development results. Geodesic `g_i` is at index `i - 1`.
#[derive(Debug, Clone)]
pub struct GeodesicChain {
    endpoints: Vec<[Hom; 2]>,
    new_vertices: Vec<Hom>,
    gaps: Vec<Float>,
    max_local_roundtrip: Float,
    max_global_roundtrip: Float,
    precision: u32,
}

impl GeodesicChain {
    pub fn len(&self) -> usize {
        self.endpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.endpoints.is_empty()
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// Homogeneous endpoints of `g_i`, 1-based.
    pub fn endpoints_hom(&self, i: usize) -> &[Hom; 2] {
        &self.endpoints[i - 1]
    }

    /// `g_i`, 1-based.
    pub fn geodesic(&self, i: usize) -> Geodesic {
        let [x, y] = &self.endpoints[i - 1];
        Geodesic {
            initial: BoundaryPoint::from_hom(x).expect("chain points are never (0, 0)"),
            terminal: BoundaryPoint::from_hom(y).expect("chain points are never (0, 0)"),
        }
    }

    /// Vertex introduced when developing `g_{i+2}`.
    pub fn new_vertices(&self) -> &[Hom] {
        &self.new_vertices
    }

    /// Largest `|shear(a, b, c, d) - s_n|` over steps, with the developed
    /// quadrilateral recomputed in the frame of the following step.
    pub fn max_local_roundtrip(&self) -> &Float {
        &self.max_local_roundtrip
    }

    /// Same, evaluated on the global coordinates. Grows as the chain
    /// accumulates because global endpoints cluster.
    pub fn max_global_roundtrip(&self) -> &Float {
        &self.max_global_roundtrip
    }

    pub fn gaps(&self) -> GapSequence {
        GapSequence {
            gaps: self.gaps.clone(),
        }
    }
}

/// Chordal endpoint gap of each `g_n` in the disk.
#[derive(Debug, Clone, PartialEq)]
pub struct GapSequence {
    gaps: Vec<Float>,
}

impl GapSequence {
    pub fn values(&self) -> &[Float] {
        &self.gaps
    }

    /// `gap_i`, 1-based.
    pub fn get(&self, i: usize) -> &Float {
        &self.gaps[i - 1]
    }

    pub fn len(&self) -> usize {
        self.gaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaps.is_empty()
    }

    /// First index `i` with `gap_{i+1} > gap_i`.
    pub fn first_increase(&self) -> Option<usize> {
        self.gaps
            .windows(2)
            .position(|w| w[1] > w[0])
            .map(|i| i + 1)
    }

    /// `n,gap,log_gap` lines with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,gap,log_gap\n");
        for (i, g) in self.gaps.iter().enumerate() {
            let lg = Float::with_val(g.prec(), g.ln_ref());
            let _ = writeln!(
                out,
                "{},{},{}",
                i + 1,
                g.to_string_radix(10, Some(17)),
                lg.to_string_radix(10, Some(17))
            );
        }
        out
    }
}

pub fn accumulation_gap(chain: &GeodesicChain) -> GapSequence {
    chain.gaps()
}

/// Configuration of a development.
#[derive(Debug, Clone, Default)]
pub struct DevelopOptions {
    /// Map applied to the base configuration before developing.
    pub base_map: Option<MobiusMap>,
}

fn hom(prec: u32, x: i32, y: i32) -> Hom {
    [Float::with_val(prec, x), Float::with_val(prec, y)]
}

fn apply(m: &[Float; 4], h: &Hom) -> Hom {
    let prec = m[0].prec();
    [
        Float::with_val(prec, &m[0] * &h[0]) + Float::with_val(prec, &m[1] * &h[1]),
        Float::with_val(prec, &m[2] * &h[0]) + Float::with_val(prec, &m[3] * &h[1]),
    ]
}

fn mul(m: &[Float; 4], n: &[Float; 4]) -> [Float; 4] {
    let prec = m[0].prec();
    let dot = |a: &Float, b: &Float, c: &Float, d: &Float| {
        Float::with_val(prec, a * b) + Float::with_val(prec, c * d)
    };
    [
        dot(&m[0], &n[0], &m[1], &n[2]),
        dot(&m[0], &n[1], &m[1], &n[3]),
        dot(&m[2], &n[0], &m[3], &n[2]),
        dot(&m[2], &n[1], &m[3], &n[3]),
    ]
}

/// Rescales by a power of two so the largest entry is near one; exact.
fn rescale(m: &mut [Float; 4]) {
    let e = m.iter().filter_map(|x| x.get_exp()).max().unwrap_or(0);
    for x in m.iter_mut() {
        *x >>= e;
    }
}

fn rescale_hom(h: &mut Hom) {
    let e = h.iter().filter_map(|x| x.get_exp()).max().unwrap_or(0);
    for x in h.iter_mut() {
        *x >>= e;
    }
}

fn det(m: &[Float; 4]) -> Float {
    let prec = m[0].prec();
    Float::with_val(prec, &m[0] * &m[3]) - Float::with_val(prec, &m[1] * &m[2])
}

/// Develops the chain; fails on the first step that is not nested or that
/// the working precision cannot resolve.
pub fn develop_chain(s: &ShearSequence) -> Result<GeodesicChain> {
    develop_chain_with(s, &DevelopOptions::default())
}

pub fn develop_chain_with(s: &ShearSequence, opts: &DevelopOptions) -> Result<GeodesicChain> {
    let (chain, err) = develop_chain_until(s, opts);
    match err {
        Some(e) => Err(e),
        None => Ok(chain),
    }
}

/// Develops as far as possible and returns the valid prefix together with
/// the error that stopped it, if any.
pub fn develop_chain_until(
    s: &ShearSequence,
    opts: &DevelopOptions,
) -> (GeodesicChain, Option<Error>) {
    let prec = s.precision();
    let floor = Float::with_val(prec, 1) >> (prec as i32 - 32);
    let mut m: [Float; 4] = match &opts.base_map {
        Some(b) => b.entries().clone().map(|x| Float::with_val(prec, x)),
        None => [hom(prec, 1, 0), hom(prec, 0, 1)]
            .concat()
            .try_into()
            .expect("four entries"),
    };
    let mut chain = GeodesicChain {
        endpoints: Vec::with_capacity(s.len() + 1),
        new_vertices: Vec::with_capacity(s.len()),
        gaps: Vec::with_capacity(s.len() + 1),
        max_local_roundtrip: Float::new(prec),
        max_global_roundtrip: Float::new(prec),
        precision: prec,
    };

    // Labeled quadrilateral of the next step, in the current local frame:
    // diagonal (a, c), old vertex d; `a_shared` says whether `a` is the
    // endpoint g_n shares with g_{n-1}.
    let mut a = hom(prec, 1, 0);
    let mut c = hom(prec, -1, 1);
    let mut d = hom(prec, 0, 1);
    let mut a_shared = true;

    let push = |chain: &mut GeodesicChain, m: &[Float; 4], x: &Hom, y: &Hom| -> Result<()> {
        let gx = apply(m, x);
        let gy = apply(m, y);
        let nx =
            Float::with_val(prec, gx[0].square_ref()) + Float::with_val(prec, gx[1].square_ref());
        let ny =
            Float::with_val(prec, gy[0].square_ref()) + Float::with_val(prec, gy[1].square_ref());
        // [Mx, My] = det(M) [x, y] exactly, so the gap avoids cancellation.
        let gap = (det(m) * bracket(x, y)).abs() * 2u32 / (nx * ny).sqrt();
        let step = chain.endpoints.len() + 1;
        if gap < floor || bracket(&gx, &gy).is_zero() {
            return Err(Error::PrecisionExhausted {
                step,
                detail: format!(
                    "endpoints of g_{step} are indistinguishable at {prec} bits (gap {})",
                    gap.to_string_radix(10, Some(6))
                ),
            });
        }
        chain.endpoints.push([gx, gy]);
        chain.gaps.push(gap);
        Ok(())
    };

    if let Err(e) = push(&mut chain, &m, &d, &a) {
        return (chain, Some(e));
    }
    if let Err(e) = push(&mut chain, &m, &c, &a) {
        return (chain, Some(e));
    }

    for n in 2..=s.len() {
        let sn = s.shear(n);
        let b = match develop_next_vertex_hom(&a, &c, &d, sn) {
            Ok(b) => b,
            Err(e) => return (chain, Some(e)),
        };
        if orientation_hom(&a, &b, &c) != Ordering::Greater {
            return (chain, Some(Error::NotNested { step: n + 1 }));
        }

        let ga = apply(&m, &a);
        let gb = apply(&m, &b);
        let gc = apply(&m, &c);
        let gd = apply(&m, &d);
        match orientation_hom(&ga, &gb, &gc) {
            Ordering::Greater => {}
            _ => {
                return (
                    chain,
                    Some(Error::PrecisionExhausted {
                        step: n + 1,
                        detail:
                            "new vertex is not separated from the diagonal in global coordinates"
                                .into(),
                    }),
                )
            }
        }
        if let Ok(r) = shear_hom(&ga, &gb, &gc, &gd) {
            let err = Float::with_val(prec, &r - sn).abs();
            if err > chain.max_global_roundtrip {
                chain.max_global_roundtrip = err;
            }
        }

        let (shared, other) = if a_shared { (&a, &c) } else { (&c, &a) };
        if let Err(e) = push(&mut chain, &m, other, &b) {
            return (chain, Some(e));
        }
        chain.new_vertices.push(gb);

        // Next quadrilateral: diagonal (other, b), old vertex `shared`.
        let (na, nc, nd) = if orientation_hom(other, &b, shared) == Ordering::Greater {
            (other.clone(), b.clone(), shared.clone())
        } else {
            (b.clone(), other.clone(), shared.clone())
        };
        let next_a_shared = na == *other;

        // Frame change N: na -> 0, nc -> ∞, nd -> -1; local -> global becomes M adj(N).
        let cd = bracket(&nc, &nd);
        let ad = bracket(&na, &nd);
        let frame = [
            -Float::with_val(prec, &cd * &na[1]),
            Float::with_val(prec, &cd * &na[0]),
            Float::with_val(prec, &ad * &nc[1]),
            -Float::with_val(prec, &ad * &nc[0]),
        ];
        // Round trip: the quadrilateral carried into the next frame must
        // still have shear s_n.
        let moved: Vec<Hom> = [&a, &b, &c, &d].iter().map(|h| apply(&frame, h)).collect();
        match shear_hom(&moved[0], &moved[1], &moved[2], &moved[3]) {
            Ok(r) => {
                let err = Float::with_val(prec, &r - sn).abs();
                if err > chain.max_local_roundtrip {
                    chain.max_local_roundtrip = err;
                }
            }
            Err(e) => return (chain, Some(e)),
        }
        let adj = [
            frame[3].clone(),
            -frame[1].clone(),
            -frame[2].clone(),
            frame[0].clone(),
        ];
        m = mul(&m, &adj);
        rescale(&mut m);

        a = hom(prec, 0, 1);
        c = hom(prec, 1, 0);
        d = hom(prec, -1, 1);
        a_shared = next_a_shared;
    }
    (chain, None)
}

/// Drawing options for [`render_disk`].
#[derive(Debug, Clone, Serialize)]
pub struct RenderOptions {
    /// Canvas side in pixels.
    pub size: f64,
    pub stroke_width: f64,
    pub vertex_markers: bool,
    pub annotate_gap: bool,
    /// Draw at most this many geodesics (from `g_1`).
    pub max_geodesics: Option<usize>,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            size: 800.0,
            stroke_width: 1.0,
            vertex_markers: true,
            annotate_gap: true,
            max_geodesics: None,
        }
    }
}

fn arc_path(p: (f64, f64), q: (f64, f64), center: f64, radius: f64) -> String {
    let sx = |z: (f64, f64)| (center + radius * z.0, center - radius * z.1);
    let (px, py) = sx(p);
    let (qx, qy) = sx(q);
    let dot = (p.0 * q.0 + p.1 * q.1).clamp(-1.0, 1.0);
    let delta = dot.acos();
    if (std::f64::consts::PI - delta).abs() < 1e-9 || delta < 1e-12 {
        return format!("M {px:.6} {py:.6} L {qx:.6} {qy:.6}");
    }
    // Orthogonal circle: centre on the bisector at distance sec(Δ/2), radius tan(Δ/2).
    let mid = ((p.0 + q.0) / 2.0, (p.1 + q.1) / 2.0);
    let ml = (mid.0 * mid.0 + mid.1 * mid.1).sqrt();
    let k = 1.0 / (delta / 2.0).cos();
    let cc = (mid.0 / ml * k, mid.1 / ml * k);
    let r = (delta / 2.0).tan() * radius;
    let (cx, cy) = sx(cc);
    let cross = (px - cx) * (qy - cy) - (py - cy) * (qx - cx);
    let sweep = if cross > 0.0 { 1 } else { 0 };
    format!("M {px:.6} {py:.6} A {r:.6} {r:.6} 0 0 {sweep} {qx:.6} {qy:.6}")
}

/// SVG drawing of the chain in the Poincaré disk.
pub fn render_disk(chain: Option<&GeodesicChain>, opts: &RenderOptions) -> String {
    let size = opts.size;
    let center = size / 2.0;
    let radius = size / 2.0 - 10.0;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    let _ = writeln!(
        out,
        r#"<circle cx="{center}" cy="{center}" r="{radius}" fill="none" stroke="black" stroke-width="{}"/>"#,
        opts.stroke_width
    );
    if let Some(chain) = chain {
        let count = opts
            .max_geodesics
            .map_or(chain.len(), |m| m.min(chain.len()));
        let mut vertices: Vec<(f64, f64)> = Vec::new();
        for i in 1..=count {
            let [x, y] = chain.endpoints_hom(i);
            let (p, q) = (cayley_f64(x), cayley_f64(y));
            let _ = writeln!(
                out,
                r#"<path class="geodesic" data-n="{i}" d="{}" fill="none" stroke="steelblue" stroke-width="{}"/>"#,
                arc_path(p, q, center, radius),
                opts.stroke_width
            );
            for v in [p, q] {
                if !vertices
                    .iter()
                    .any(|w| (w.0 - v.0).abs() < 1e-15 && (w.1 - v.1).abs() < 1e-15)
                {
                    vertices.push(v);
                }
            }
        }
        if opts.vertex_markers {
            for v in &vertices {
                let _ = writeln!(
                    out,
                    r#"<circle class="vertex" cx="{:.6}" cy="{:.6}" r="{}" fill="crimson"/>"#,
                    center + radius * v.0,
                    center - radius * v.1,
                    2.0 * opts.stroke_width
                );
            }
        }
        if opts.annotate_gap && count > 0 {
            let g = &chain.gaps[count - 1];
            let _ = writeln!(
                out,
                r#"<text x="10" y="{:.1}" font-family="monospace" font-size="12">gap_{count} = {}</text>"#,
                size - 10.0,
                g.to_string_radix(10, Some(8))
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Applies `m` to every endpoint of the chain; gap ratios change only
/// through the non-invariance of the chordal metric.
pub fn moved_gap_ratios(chain: &GeodesicChain, m: &MobiusMap) -> Vec<Float> {
    let mut gaps = Vec::with_capacity(chain.len());
    for [x, y] in &chain.endpoints {
        let mut gx = m.apply_hom(x);
        let mut gy = m.apply_hom(y);
        rescale_hom(&mut gx);
        rescale_hom(&mut gy);
        gaps.push(chordal(&gx, &gy));
    }
    gaps.windows(2)
        .map(|w| Float::with_val(w[0].prec(), &w[1] / &w[0]))
        .collect()
}
