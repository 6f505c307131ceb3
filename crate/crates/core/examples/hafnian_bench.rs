//! Time the hafnian kernels on random complex symmetric matrices and compare
//! the matching sum with the power-trace formula where both apply.
//!
//! cargo run --release --example hafnian_bench

use std::time::Instant;

use hybrid_sampler::hafnian::{hafnian, hafnian_naive, hafnian_powertrace, SymmetricMatrix};
use hybrid_sampler::linalg::CMat;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn random_symmetric(rng: &mut ChaCha20Rng, n: usize) -> SymmetricMatrix {
    let mut m = CMat::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            m[(i, j)] = z;
            m[(j, i)] = z;
        }
    }
    SymmetricMatrix::new(m).expect("symmetric by construction")
}

fn main() -> hybrid_sampler::Result<()> {
    let mut rng = ChaCha20Rng::seed_from_u64(2024);
    println!(" dim   seconds      |haf|          naive vs power-trace");
    for n in (4..=24).step_by(2) {
        let x = random_symmetric(&mut rng, n);
        let start = Instant::now();
        let value = hafnian(&x)?;
        let elapsed = start.elapsed().as_secs_f64();
        let agreement = if n <= 14 {
            let (a, b) = (hafnian_naive(&x)?, hafnian_powertrace(&x)?);
            format!("{:.2e}", (a - b).norm() / a.norm())
        } else {
            "-".to_string()
        };
        println!("{n:4}   {elapsed:.6}   {:.6e}   {agreement}", value.norm());
    }
    Ok(())
}
