//! Full pipeline for a trapped condensate in a two-mode-function cavity:
//! overlap integrals on the grid, Bogoliubov diagonalization, Bloch-Messiah
//! squeezing, spatial mode functions and the scattering-time estimate.
//!
//! cargo run --example geometry_pipeline

use std::path::PathBuf;

use hybrid_sampler::config::load_config_file;
use hybrid_sampler::model::estimate_scattering_time;
use hybrid_sampler::sampling::{enumerate_distribution, recommend_cutoff};
use hybrid_sampler::validation::run_suite;
use hybrid_sampler::{Experiment, Tolerances};

fn main() -> hybrid_sampler::Result<()> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/geometry.json");
    let cfg = load_config_file(&path)?;
    let tau = estimate_scattering_time(&cfg)?;
    let exp = Experiment::new(cfg, Tolerances::default())?;
    let basis = exp.basis.as_ref().expect("geometry configs carry a grid");
    println!(
        "grid: {} points, orthonormality residual {:.2e}",
        basis.x.len(),
        basis.orthonormality_residual()
    );

    let dec = exp.decompose()?;
    println!("quasiparticle energies: {:?}", dec.energies);
    let factors = exp.bloch_messiah(&dec)?;
    println!("squeezing parameters r: {:?}", factors.r);
    let modes = exp.mode_functions(&factors)?;
    for (j, (u, v)) in modes.u.iter().zip(&modes.v).enumerate() {
        println!(
            "  mode {j}: ∫|u|² = {:.6}, ∫|v|² = {:.6}",
            u.norm_sqr(basis),
            v.norm_sqr(basis)
        );
    }

    let state = exp.state_from(&dec)?;
    let k = recommend_cutoff(&state).max(6);
    let dist = enumerate_distribution(&state, k)?;
    println!("mean occupations {:?}", state.mean_occupations());
    println!(
        "cutoff {k}: captured mass {:.9}, {} outcomes",
        dist.captured_mass,
        dist.probabilities.len()
    );
    println!("scattering time estimate {tau:.6e}");

    for check in run_suite(&exp, None)? {
        println!("{check}");
    }
    Ok(())
}
