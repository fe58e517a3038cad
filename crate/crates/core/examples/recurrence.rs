//! Common-index recurrence for two orbits, with verification and jump windows.

use sympidx::orbitmodel::{OrbitModel, Rotation};
use sympidx::recurrence::{self, JumpMode, RecurrenceQuery};

fn orbit(label: &str, loop_index: i64, lambda: f64) -> OrbitModel {
    OrbitModel {
        label: label.into(),
        loop_index,
        rotations: vec![Rotation::Irrational(lambda)],
        hyperbolic_index: 0,
        hyperbolic_planes: 0,
        degenerate: None,
        action: None,
    }
}

fn main() -> sympidx::Result<()> {
    let models = vec![orbit("a", 2, 2f64.sqrt() - 1.0), orbit("b", 2, 3f64.sqrt() - 1.0)];
    let query = RecurrenceQuery {
        models: models.clone(),
        ell0: 2,
        eta: 0.3,
        divisor: 2,
        k_max: 1_000_000,
        count: 3,
        require_d_divisible: true,
    };
    let out = recurrence::find_recurrence(&query)?;
    println!("ε = {:.3e}, scanned {} iterates", out.epsilon, out.scanned);

    for cert in &out.certificates {
        let check = recurrence::verify_certificate(cert, &models, query.ell0, query.eta)?;
        let jumps = recurrence::jump_intervals(cert, &models, query.ell0, JumpMode::General)?;
        println!(
            "d = {:>6}  k = {:?}  verified {}  interval [{}, {}] free of neighbours: {}",
            cert.d, cert.k, check.passed, jumps.interval.lo, jumps.interval.hi, jumps.disjoint
        );
    }
    Ok(())
}
