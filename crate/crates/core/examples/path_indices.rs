//! Indices of a symplectic path generated by a piecewise-linear Hamiltonian.

use nalgebra::DMatrix;
use sympidx::pathindex::{self, GeneratedPath, Tolerances};
use sympidx::symlin;

fn main() -> sympidx::Result<()> {
    let tol = Tolerances::default();

    // Rotation by 2π·1.3 in one plane, then a hyperbolic twist in the other.
    let w = 2.0 * std::f64::consts::PI * 1.3;
    let h0 = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![w, w, 0.4, -0.4]));
    let h1 = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![w, w, 0.9, -0.9]));
    let gen = GeneratedPath { m: 2, hamiltonian_samples: vec![(0.0, h0), (1.0, h1)], integration_steps: 200 };

    let report = pathindex::index_report(&gen, 0.01, &tol)?;
    println!("mean index  {:.6}", report.mean_index);
    println!("CZ index    {:?}", report.cz_index);
    println!("RS index    {:?}", report.rs_index);
    println!("crossings   {}", report.crossings.len());

    let end = pathindex::integrate(&gen)?;
    let classes = symlin::eigen_classify(end.endpoint(), tol.cluster)?;
    println!("endpoint    {} elliptic, {} hyperbolic pairs", classes.elliptic_pairs.len(), classes.hyperbolic_pairs.len());

    // A degenerate endpoint: one full turn. CZ is undefined, μ± bracket it.
    let turn = GeneratedPath::constant(DMatrix::identity(2, 2) * (2.0 * std::f64::consts::PI), 200);
    let pm = pathindex::mu_pm(&turn, 0.01, &tol)?;
    println!("full turn   μ₋ = {}, μ₊ = {}, ν = {}", pm.minus, pm.plus, pm.geometric_nullity);
    Ok(())
}
