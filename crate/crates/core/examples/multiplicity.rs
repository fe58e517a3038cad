//! Multiplicity bounds, checked against an irrational ellipsoid.

use sympidx::mult::{self, ContactSetting, EllipsoidModel, WitnessParams};

fn main() -> sympidx::Result<()> {
    for n in 2..=5 {
        let b = mult::lower_bound(&ContactSetting::sphere(n, n + 1, true))?;
        println!("S^{}  at least {} orbits", 2 * n - 1, b.r);
    }

    let e = EllipsoidModel { radii_sq: vec![1.0, 2f64.sqrt(), 1.0 + 3f64.sqrt()] };
    let seq = mult::ellipsoid_spectral_invariants(&e, 6)?;
    println!("spectral invariants {:?}", seq.values);
    println!("carriers            {:?}", seq.carriers);
    println!("carrier indices ok: {}", mult::verify_carrier_indices(&e, 200)?.passed);

    let lim = mult::chat_limit_check(&e, 10_000, 1e-3)?;
    println!("c_D/(n+2D−1) = {:.6}, limit {:.6}", lim.ratio, lim.limit);

    let models = mult::ellipsoid_orbit_models(&e)?;
    let setting = ContactSetting::sphere(3, 4, true);
    let bound = mult::mult_witness(&models, &setting, &WitnessParams::default())?;
    if let Some(w) = &bound.witness {
        println!("window [{}, {}] holds {} of r = {}: {:?}", w.interval.lo, w.interval.hi, w.matched, bound.r, w.status);
    }
    Ok(())
}
