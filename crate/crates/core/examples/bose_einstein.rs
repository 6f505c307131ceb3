//! A single uncoupled mode in thermal equilibrium: the enumerated count
//! distribution reproduces the Bose-Einstein law n̄^q / (1 + n̄)^(q+1).
//!
//! cargo run --example bose_einstein

use hybrid_sampler::gaussian::CountsVector;
use hybrid_sampler::sampling::enumerate_distribution;
use hybrid_sampler::Experiment;

fn main() -> hybrid_sampler::Result<()> {
    let energy = 1.0;
    for temperature in [0.25, 1.0, 4.0] {
        let exp = Experiment::from_json(&format!(
            r#"{{ "mode": "DirectBlocks", "M_a": 0, "M_ph": 1, "delta_a": 1.0,
                  "temperature": {temperature},
                  "direct_blocks": {{ "eps_ph": [[{energy}]] }} }}"#
        ))?;
        let state = exp.state()?;
        let n_bar = state.mean_occupations()[0];
        let dist = enumerate_distribution(&state, 8)?;
        println!(
            "T = {temperature}: n̄ = {n_bar:.6}, captured mass = {:.9}",
            dist.captured_mass
        );
        println!("   q   hafnian            closed form");
        for q in 0..=8u32 {
            let p = dist.probability(&CountsVector(vec![q])).unwrap_or(0.0);
            let exact = n_bar.powi(q as i32) / (1.0 + n_bar).powi(q as i32 + 1);
            println!("  {q:2}   {p:.12}   {exact:.12}");
        }
    }
    Ok(())
}
