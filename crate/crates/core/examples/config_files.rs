//! Loads a shipped configuration, applies an override the way `--set` does,
//! and prints the canonical form whose digest goes into run manifests.

use chiral_array::config::{RunConfig, Sources};

fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/disordered_chain_dynamics.toml");
    let mut src = Sources::new();
    let loaded = src
        .add_file(path.as_ref())
        .and_then(|_| src.add_override("disorder_strength=0.25"))
        .and_then(|_| RunConfig::from_sources(&src));
    match loaded {
        Ok(config) => {
            println!("{}", config.to_toml_string());
            println!("digest {}", config.digest());
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
    // errors carry the file and line of the offending key
    match RunConfig::from_toml_str("[system]\nn_total = 10\nxi_over_pi = \"quarter\"\n") {
        Ok(_) => unreachable!("a string is not a number"),
        Err(e) => println!("rejected: {e}"),
    }
}
