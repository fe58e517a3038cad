//! Degreewise dimensions of positive equivariant symplectic homology.

use sympidx::shdim;

fn main() -> sympidx::Result<()> {
    let sphere = shdim::sphere_sh_dims(3, 1..=14)?;
    println!("{}: {:?}", sphere.manifold, sphere.degrees);

    let stsn = shdim::stsn_sh_dims_cases(4, 1..=20)?;
    println!("{}: {:?}", stsn.manifold, stsn.degrees);

    let check = shdim::stsn_cross_check(4, 1..=40)?;
    println!("case formula agrees with the Morse-Bott count: {}", check.agree);

    println!("D-chain on the sphere: {:?}", shdim::d_chain_sphere(3, 5)?.degrees);
    println!("D-chain on ST*S^4, band 1: {:?}", shdim::d_chain_stsn(4, 1)?.degrees);
    Ok(())
}
