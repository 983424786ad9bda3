//! Primitives of the upper half-plane: ideal points, Möbius maps, geodesics,
//! cross-ratios and shears.
//!
//! Ideal points are handled internally through homogeneous coordinates
//! `(x, y)` with `x/y` the affine value and `(1, 0)` the point at infinity.
//! The bracket `[p, q] = q.x p.y - p.x q.y` equals `q - p` for affine points
//! and `-1`/`+1` when `p`/`q` is infinite, so every formula below is written
//! once and covers the infinite cases by algebraic cancellation.

use std::cmp::Ordering;
use std::fmt;

use rug::Float;

use crate::error::{Error, Result};
use crate::real::{DEFAULT_PRECISION, GUARD_BITS};

/// A point of the extended real line.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryPoint {
    Finite(Float),
    Infinity,
}

/// Homogeneous representative of an ideal point.
pub type Hom = [Float; 2];

impl BoundaryPoint {
    pub fn finite(x: Float) -> Self {
        BoundaryPoint::Finite(x)
    }

    pub fn from_f64(prec: u32, x: f64) -> Self {
        BoundaryPoint::Finite(Float::with_val(prec, x))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, BoundaryPoint::Infinity)
    }

    pub fn value(&self) -> Option<&Float> {
        match self {
            BoundaryPoint::Finite(x) => Some(x),
            BoundaryPoint::Infinity => None,
        }
    }

    pub fn to_hom(&self, prec: u32) -> Hom {
        match self {
            BoundaryPoint::Finite(x) => [Float::with_val(prec, x), Float::with_val(prec, 1)],
            BoundaryPoint::Infinity => [Float::with_val(prec, 1), Float::new(prec)],
        }
    }

    /// Projects a homogeneous pair back to the line. Both components zero is
    /// not a point and yields a domain error.
    pub fn from_hom(h: &Hom) -> Result<Self> {
        if h[1].is_zero() {
            if h[0].is_zero() {
                return Err(Error::domain("degenerate homogeneous point (0, 0)"));
            }
            return Ok(BoundaryPoint::Infinity);
        }
        Ok(BoundaryPoint::Finite(Float::with_val(
            h[0].prec(),
            &h[0] / &h[1],
        )))
    }

    fn prec(&self) -> Option<u32> {
        self.value().map(|x| x.prec())
    }
}

impl fmt::Display for BoundaryPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryPoint::Finite(x) => write!(f, "{}", x.to_string_radix(10, Some(20))),
            BoundaryPoint::Infinity => write!(f, "inf"),
        }
    }
}

/// `[p, q]`; zero exactly when `p` and `q` are the same ideal point.
pub fn bracket(p: &Hom, q: &Hom) -> Float {
    let prec = p[0].prec().max(q[0].prec());
    let mut t = Float::with_val(prec, &q[0] * &p[1]);
    t -= Float::with_val(prec, &p[0] * &q[1]);
    t
}

pub(crate) fn working_prec(points: &[&BoundaryPoint]) -> u32 {
    points
        .iter()
        .filter_map(|p| p.prec())
        .max()
        .unwrap_or(DEFAULT_PRECISION)
}

/// Orientation-preserving Möbius map `z -> (a z + b) / (c z + d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MobiusMap {
    m: [Float; 4],
}

impl MobiusMap {
    /// Fails unless `ad - bc > 0`.
    pub fn new(a: Float, b: Float, c: Float, d: Float) -> Result<Self> {
        let map = MobiusMap { m: [a, b, c, d] };
        if map.det() <= 0 {
            return Err(Error::domain("Möbius map determinant must be positive"));
        }
        Ok(map)
    }

    pub fn identity(prec: u32) -> Self {
        let one = Float::with_val(prec, 1);
        let z = Float::new(prec);
        MobiusMap {
            m: [one.clone(), z.clone(), z, one],
        }
    }

    pub fn entries(&self) -> &[Float; 4] {
        &self.m
    }

    pub fn det(&self) -> Float {
        let [a, b, c, d] = &self.m;
        let prec = a.prec();
        Float::with_val(prec, a * d) - Float::with_val(prec, b * c)
    }

    /// Rescales to determinant one.
    pub fn normalized(&self) -> Self {
        let s = self.det().sqrt().recip();
        MobiusMap {
            m: self.m.clone().map(|x| x * &s),
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &MobiusMap) -> MobiusMap {
        let [a, b, c, d] = &self.m;
        let [e, f, g, h] = &other.m;
        let prec = a.prec();
        let dot = |x: &Float, y: &Float, z: &Float, w: &Float| {
            Float::with_val(prec, x * y) + Float::with_val(prec, z * w)
        };
        MobiusMap {
            m: [
                dot(a, e, b, g),
                dot(a, f, b, h),
                dot(c, e, d, g),
                dot(c, f, d, h),
            ],
        }
    }

    pub fn inverse(&self) -> MobiusMap {
        let [a, b, c, d] = &self.m;
        MobiusMap {
            m: [d.clone(), -b.clone(), -c.clone(), a.clone()],
        }
    }

    pub fn apply_hom(&self, h: &Hom) -> Hom {
        let [a, b, c, d] = &self.m;
        let prec = a.prec();
        [
            Float::with_val(prec, a * &h[0]) + Float::with_val(prec, b * &h[1]),
            Float::with_val(prec, c * &h[0]) + Float::with_val(prec, d * &h[1]),
        ]
    }

    pub fn apply(&self, p: &BoundaryPoint) -> BoundaryPoint {
        let h = self.apply_hom(&p.to_hom(self.m[0].prec()));
        // An invertible map never sends a point to (0, 0).
        BoundaryPoint::from_hom(&h).expect("invertible map")
    }
}

/// Oriented geodesic with distinct ideal endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct Geodesic {
    pub initial: BoundaryPoint,
    pub terminal: BoundaryPoint,
}

impl Geodesic {
    pub fn new(initial: BoundaryPoint, terminal: BoundaryPoint) -> Result<Self> {
        let prec = working_prec(&[&initial, &terminal]);
        if bracket(&initial.to_hom(prec), &terminal.to_hom(prec)).is_zero() {
            return Err(Error::Coincident {
                first: "initial",
                second: "terminal",
            });
        }
        Ok(Geodesic { initial, terminal })
    }

    pub fn map(&self, m: &MobiusMap) -> Geodesic {
        Geodesic {
            initial: m.apply(&self.initial),
            terminal: m.apply(&self.terminal),
        }
    }
}

/// Cyclic order of three ideal points: `Greater` for positive (counterclockwise
/// on the circle, increasing on the line), `Less` for negative, `Equal` when
/// two coincide.
pub fn orientation_hom(a: &Hom, b: &Hom, c: &Hom) -> Ordering {
    let s = bracket(a, b) * bracket(b, c) * bracket(a, c);
    s.partial_cmp(&0).unwrap_or(Ordering::Equal)
}

pub fn orientation(a: &BoundaryPoint, b: &BoundaryPoint, c: &BoundaryPoint) -> Ordering {
    let prec = working_prec(&[a, b, c]);
    orientation_hom(&a.to_hom(prec), &b.to_hom(prec), &c.to_hom(prec))
}

/// `[a,b][c,d] / ([b,c][a,d])`, i.e. `(b-a)(d-c) / ((c-b)(d-a))` on affine points.
pub fn cross_ratio_hom(a: &Hom, b: &Hom, c: &Hom, d: &Hom) -> Result<Float> {
    let ab = bracket(a, b);
    let cd = bracket(c, d);
    let bc = bracket(b, c);
    let ad = bracket(a, d);
    let ac = bracket(a, c);
    let bd = bracket(b, d);
    for (v, first, second) in [
        (&ab, "a", "b"),
        (&cd, "c", "d"),
        (&bc, "b", "c"),
        (&ad, "a", "d"),
        (&ac, "a", "c"),
        (&bd, "b", "d"),
    ] {
        if v.is_zero() {
            return Err(Error::Coincident { first, second });
        }
    }
    let prec = ab.prec();
    Ok(Float::with_val(prec, ab * cd) / Float::with_val(prec, bc * ad))
}

pub fn cross_ratio(
    a: &BoundaryPoint,
    b: &BoundaryPoint,
    c: &BoundaryPoint,
    d: &BoundaryPoint,
) -> Result<Float> {
    let prec = working_prec(&[a, b, c, d]);
    cross_ratio_hom(
        &a.to_hom(prec),
        &b.to_hom(prec),
        &c.to_hom(prec),
        &d.to_hom(prec),
    )
}

/// Shear of the diagonal `(a, c)` in the ideal quadrilateral `a, b, c, d`:
/// `log cr(a, b, c, d)`.
pub fn shear_of_edge(
    a: &BoundaryPoint,
    b: &BoundaryPoint,
    c: &BoundaryPoint,
    d: &BoundaryPoint,
) -> Result<Float> {
    let prec = working_prec(&[a, b, c, d]);
    shear_hom(
        &a.to_hom(prec),
        &b.to_hom(prec),
        &c.to_hom(prec),
        &d.to_hom(prec),
    )
}

pub fn shear_hom(a: &Hom, b: &Hom, c: &Hom, d: &Hom) -> Result<Float> {
    let cr = cross_ratio_hom(a, b, c, d)?;
    if cr <= 0 {
        return Err(Error::domain(format!(
            "cross-ratio {} is not positive; the quadruple is not an embedded quadrilateral",
            cr.to_string_radix(10, Some(12))
        )));
    }
    Ok(cr.ln())
}

/// Hyperbolic distance between two disjoint geodesics.
///
/// The map `z -> [x1, z] / [y1, z]` sends `g1` to `(0, ∞)`; the images `u`, `v`
/// of the endpoints of `g2` then share a sign and the distance is
/// `log((√|u| + √|v|)² / |v - u|)`. The difference `v - u` is formed from a
/// bracket identity rather than by subtraction.
pub fn disjoint_geodesic_distance(g1: &Geodesic, g2: &Geodesic) -> Result<Float> {
    let prec = working_prec(&[&g1.initial, &g1.terminal, &g2.initial, &g2.terminal]);
    let w = prec + GUARD_BITS;
    let x1 = g1.initial.to_hom(w);
    let y1 = g1.terminal.to_hom(w);
    let x2 = g2.initial.to_hom(w);
    let y2 = g2.terminal.to_hom(w);
    let x1x2 = bracket(&x1, &x2);
    let y1x2 = bracket(&y1, &x2);
    let x1y2 = bracket(&x1, &y2);
    let y1y2 = bracket(&y1, &y2);
    if x1x2.is_zero() || y1x2.is_zero() || x1y2.is_zero() || y1y2.is_zero() {
        return Err(Error::domain("geodesics share an endpoint (asymptotic)"));
    }
    let u = Float::with_val(w, &x1x2 / &y1x2);
    let v = Float::with_val(w, &x1y2 / &y1y2);
    if (u > 0) != (v > 0) {
        return Err(Error::domain("geodesics intersect"));
    }
    let num = Float::with_val(w, bracket(&x1, &y1) * bracket(&x2, &y2));
    let den = Float::with_val(w, &y1y2 * &y1x2);
    let diff = (num / den).abs();
    let s = u.abs().sqrt() + v.abs().sqrt();
    let d = (s.square() / diff).ln();
    Ok(Float::with_val(prec, d))
}
