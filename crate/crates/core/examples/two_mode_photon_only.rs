//! One atom mode and one cavity mode with a counter-rotating hybrid coupling.
//! The joint distribution is concentrated on the diagonal N = q, and summing
//! out the atoms leaves a thermal-looking photon marginal.
//!
//! cargo run --example two_mode_photon_only

use hybrid_sampler::sampling::{enumerate_distribution, photon_marginal};
use hybrid_sampler::Experiment;

fn main() -> hybrid_sampler::Result<()> {
    let exp = Experiment::from_json(
        r#"{ "mode": "DirectBlocks", "M_a": 1, "M_ph": 1, "delta_a": 1.0, "temperature": 0.0,
             "direct_blocks": { "eps_a": [[1.0]], "eps_ph": [[1.2]], "chit_pha": [[0.5]] } }"#,
    )?;
    let state = exp.state()?;
    let dist = enumerate_distribution(&state, 6)?;
    println!("joint P(N, q), captured mass {:.9}", dist.captured_mass);
    print!("  N\\q");
    for q in 0..=6 {
        print!("{q:>11}");
    }
    println!();
    for n in 0..=6u32 {
        print!("  {n:3}");
        for q in 0..=6u32 {
            let p = dist
                .probabilities
                .iter()
                .find(|(c, _)| c.0 == [n, q])
                .map_or(0.0, |(_, p)| *p);
            print!("{p:>11.2e}");
        }
        println!();
    }
    let photons = photon_marginal(&dist)?;
    println!("photon marginal:");
    for (counts, p) in &photons.probabilities {
        println!("  q = {counts}: {p:.9}");
    }
    println!(
        "mean atoms {:.6}, mean photons {:.6}",
        dist.means()[0],
        dist.means()[1]
    );
    println!("count covariance {:.6}", dist.count_covariance(0, 1));
    Ok(())
}
