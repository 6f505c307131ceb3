//! Draw seeded samples from an enumerated distribution and test them against
//! the exact probabilities with a pooled chi-square test.
//!
//! cargo run --example sampler

use hybrid_sampler::sampling::{chi_square, enumerate_distribution, sample};
use hybrid_sampler::Experiment;

fn main() -> hybrid_sampler::Result<()> {
    let exp = Experiment::from_json(
        r#"{ "mode": "DirectBlocks", "M_a": 1, "M_ph": 1, "delta_a": 1.0, "temperature": 0.3,
             "direct_blocks": { "eps_a": [[1.0]], "eps_ph": [[1.2]],
                                "chi_pha": [[0.2]], "chit_pha": [[0.3]] } }"#,
    )?;
    let dist = enumerate_distribution(&exp.state()?, 10)?;
    println!("captured mass {:.9}", dist.captured_mass);

    let samples = sample(&dist, 20_000, 7)?;
    for s in samples.iter().take(5) {
        println!("sample ({s})");
    }
    let report = chi_square(&dist, &samples)?;
    println!(
        "chi-square {:.3} on {} degrees of freedom ({} buckets), p = {:.4}: {}",
        report.statistic,
        report.dof,
        report.buckets,
        report.p_value,
        if report.pass {
            "consistent"
        } else {
            "rejected"
        }
    );
    assert_eq!(
        samples,
        sample(&dist, 20_000, 7)?,
        "same seed, same samples"
    );
    Ok(())
}
