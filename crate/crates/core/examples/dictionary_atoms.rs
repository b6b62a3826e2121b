//! Build a perturbed harmonic dictionary and inspect its atoms.
//!
//! `cargo run --example dictionary_atoms`

use harmonic_acs::dictionary::{Overcompleteness, PerturbedDictionary};

fn main() -> harmonic_acs::Result<()> {
    let n = 16;
    let q = Overcompleteness::integer(2)?;
    let dict = PerturbedDictionary::unperturbed(n, q)?;
    println!(
        "N = {n}, Q = {}, {} columns, {} frequencies, |theta| <= {:.5}",
        q.as_f64(),
        dict.grid_size(),
        dict.num_frequencies(),
        dict.theta_bound()
    );

    // move frequency 3 by 40% of its half bin
    let moved = dict.with_perturbation(3, 0.4 * dict.theta_bound())?;
    let (c, s) = moved.pair_indices(3)?;
    println!("frequency 3: cosine column {c}, sine column {s}, at {:.5} cycles/sample", moved.atom_frequency(3)?);

    for j in [0, 3] {
        let (c, s) = moved.pair_indices(j)?;
        println!(
            "  j = {j}: |cos| = {:.4}, |sin| = {:.4}",
            moved.atoms().column(c).norm(),
            moved.atoms().column(s).norm()
        );
    }

    println!("first samples of the moved cosine atom:");
    for k in 0..4 {
        println!("  n = {k}: {:+.5}", moved.atoms()[(k, c)]);
    }
    Ok(())
}
