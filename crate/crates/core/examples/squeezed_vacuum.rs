//! Counter-rotating atom pairing at zero temperature produces a single-mode
//! squeezed vacuum: only even atom numbers occur.
//!
//! cargo run --example squeezed_vacuum

use hybrid_sampler::gaussian::CountsVector;
use hybrid_sampler::sampling::enumerate_distribution;
use hybrid_sampler::Experiment;

fn main() -> hybrid_sampler::Result<()> {
    let exp = Experiment::from_json(
        r#"{ "mode": "DirectBlocks", "M_a": 1, "M_ph": 0, "delta_a": 1.0, "temperature": 0.0,
             "direct_blocks": { "eps_a": [[1.0]], "chit_aa": [[0.6]] } }"#,
    )?;
    let dec = exp.decompose()?;
    let factors = exp.bloch_messiah(&dec)?;
    let r = factors.r[0];
    println!("quasiparticle energy = {:.9}", dec.energies[0]);
    println!("squeezing parameter r = {r:.9}");

    let state = exp.state_from(&dec)?;
    let dist = enumerate_distribution(&state, 12)?;
    println!("   N   P(N)                (N−1)!!/N!! · tanh^N r / cosh r");
    for n in 0..=12u32 {
        let p = dist.probability(&CountsVector(vec![n])).unwrap_or(0.0);
        let exact = if n % 2 == 1 {
            0.0
        } else {
            let k = n / 2;
            let ratio: f64 = (1..=k)
                .map(|j| (2 * j - 1) as f64 / (2 * j) as f64)
                .product();
            ratio * r.tanh().powi(n as i32) / r.cosh()
        };
        println!("  {n:2}   {p:.12e}   {exact:.12e}");
    }
    Ok(())
}
