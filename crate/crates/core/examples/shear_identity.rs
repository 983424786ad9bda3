//! Shear of an ideal quadrilateral against the distance between its
//! opposite sides: `exp(shear) = sinh²(ρ/2)`.

use flutetype::hyp::{disjoint_geodesic_distance, shear_of_edge, BoundaryPoint, Geodesic};
use rug::Float;

fn main() -> flutetype::Result<()> {
    let prec = 128;
    let pt = |x: f64| BoundaryPoint::from_f64(prec, x);
    for quad in [
        [-3.0, -1.0, 1.0, 3.0],
        [-1.0, 0.0, 0.5, 7.0],
        [0.0, 1.0, 2.0, 1e6],
    ] {
        let [a, b, c, d] = quad.map(pt);
        let s = shear_of_edge(&a, &b, &c, &d)?;
        let rho = disjoint_geodesic_distance(&Geodesic::new(b, c)?, &Geodesic::new(d, a)?)?;
        let rhs = Float::with_val(prec, &rho / 2u32).sinh().square();
        println!(
            "{quad:?}: shear = {:.20}, exp(shear) = {:.20}, sinh^2(rho/2) = {:.20}",
            s,
            s.clone().exp(),
            rhs
        );
    }
    Ok(())
}
