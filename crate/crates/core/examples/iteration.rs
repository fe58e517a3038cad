//! Iterating a normal-form orbit model and checking dynamical convexity.

use sympidx::orbitmodel::{self, DegenerateBlock, OrbitModel, Rotation};

fn main() -> sympidx::Result<()> {
    let model = OrbitModel {
        label: "x".into(),
        loop_index: 4,
        rotations: vec![Rotation::Irrational(2f64.sqrt() - 1.0), Rotation::Rational(1, 3)],
        hyperbolic_index: 0,
        hyperbolic_planes: 0,
        degenerate: Some(DegenerateBlock { half_dim: 1, sgn: 1, nullity: 1 }),
        action: None,
    };
    model.validate()?;
    let m = model.half_dim();

    println!("{:>3} {:>10} {:>4} {:>4} {:>3} {:>4}", "k", "mean", "μ₋", "μ₊", "ν", "cz");
    for k in 1..=9 {
        let it = orbitmodel::iter_index(&model, k)?;
        let cz = it.cz.map_or("-".to_string(), |c| c.to_string());
        println!("{:>3} {:>10.4} {:>4} {:>4} {:>3} {:>4}", k, it.mean, it.mu_minus, it.mu_plus, it.nu, cz);
    }

    println!("dynamically convex: {}", orbitmodel::is_dynamically_convex(&model, m)?);
    let dc = orbitmodel::verify_dc_iteration(&model, m, 1000)?;
    println!("iteration inequalities up to k = {}: {}", dc.k_max, dc.holds);

    let path = orbitmodel::model_to_path(&model, 100)?;
    println!("realized as a path in dimension {}", 2 * path.m);
    Ok(())
}
