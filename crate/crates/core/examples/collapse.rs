//! Spectral sequence of a random filtered complex and its collapse onto a page.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sympidx::homalg;

fn main() -> sympidx::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (fc, expected) = homalg::random_filtered_complex(&mut rng, 12, 3, 3);

    let sp = homalg::pages(&fc)?;
    for page in &sp.pages {
        let dims: Vec<String> = page.dims.iter().map(|d| format!("({},{}):{}", d.p, d.q, d.dim)).collect();
        println!("E^{}  {}", page.r, dims.join(" "));
    }
    println!("stabilizes at r = {}", sp.stabilized_at);

    let collapsed = homalg::collapse(&sp, 1)?;
    let h = homalg::homology(&collapsed.dbar, &collapsed.degrees())?;
    println!("homology of the collapsed complex {:?}", h.dims);
    println!("homology built into the complex   {:?}", expected);
    println!("harmonic classes {}", collapsed.harmonic_basis.len());
    Ok(())
}
