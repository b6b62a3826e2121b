//! Numerical side of the convexity analysis of the frequency step.
//!
//! `cargo run --example appendix_checks`

use harmonic_acs::appendix::{
    approx_cost_compare, bin_grid, convex_half_width, convexity_root, g_k, g_second_deriv_limit, max_deviation,
    AppendixProbe, EntryDistribution,
};

fn main() -> harmonic_acs::Result<()> {
    let n = 1024;
    let nf = n as f64;
    println!("bin-width root Q = {:.6}", convexity_root());

    let probe = AppendixProbe {
        n,
        m: 512,
        sigma_a: 1.0,
        sigma_noise: 0.0,
        distribution: EntryDistribution::Normal,
        true_amp: 4.0,
        est_amp: 1.0,
        frequency: 0.25,
    };
    println!("g(0) = {:.3}, N/2 delta^2 = {:.3}", g_k(0.0, &probe), nf / 2.0 * probe.delta().powi(2));

    println!("large-N second derivative (scaled) across the half bin:");
    for k in [0.0, 0.1, 0.2, 0.3, 1.0 / 3.018, 0.4, 0.5] {
        println!("  theta N = {k:.4}  {:+.4e}", g_second_deriv_limit(k / nf, n)?);
    }
    let (plus, minus) = convex_half_width(&probe, 2000);
    println!("convex region from second differences: +{plus:.4}/N, -{minus:.4}/N");

    let rows = approx_cost_compare(&probe, &bin_grid(n, 201), 0)?;
    let centre = &rows[100];
    println!(
        "theta = 0: exact {:.2}, approx {:.2}, predicted deviation order {:.1}",
        centre.exact, centre.approx, centre.predicted_order
    );
    println!("max |exact - approx| over the bin: {:.1}", max_deviation(&rows));
    Ok(())
}
