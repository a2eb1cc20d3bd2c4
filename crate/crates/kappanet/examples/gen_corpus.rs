//! Regenerates the shipped example networks under `networks/` at the
//! workspace root. Run from anywhere inside the workspace:
//!
//! ```text
//! cargo run --example gen_corpus
//! ```

use std::fs;
use std::path::PathBuf;

use kappanet::analytic::{chain_network, fork_network, ChainSpec, ForkSpec};
use kappanet::diagnosis::car_network;
use kappanet::format::serialize_network;
use kappanet::model::Calculus;

fn main() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../networks");
    fs::create_dir_all(&dir).expect("create networks directory");

    let chain = chain_network(&ChainSpec::default_with_length(10), Calculus::Probability);
    fs::write(dir.join("chain10.toml"), serialize_network(&chain)).unwrap();

    let fork_spec = ForkSpec::default_with_effects(10);
    let fork = fork_network(&fork_spec, Calculus::Probability);
    fs::write(dir.join("fork10.toml"), serialize_network(&fork)).unwrap();
    let fork_kappa = fork_network(&fork_spec, Calculus::Kappa);
    fs::write(dir.join("fork10_kappa.toml"), serialize_network(&fork_kappa)).unwrap();

    let car = car_network();
    fs::write(dir.join("car.toml"), serialize_network(&car)).unwrap();

    println!("wrote corpus to {}", dir.display());
}
