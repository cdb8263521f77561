//! Mean late-time populations across the clean/disordered interface and the
//! decay width on the clean side.

use std::f64::consts::PI;

use chiral_array::analysis::{interface_profile, SiteZone};
use chiral_array::ensemble::{run_ensemble, EnsembleSpec};
use chiral_array::evolve::TimeGrid;
use chiral_array::model::{SystemConfig, Zone};
use chiral_array::observables::ObservableKind;

fn main() -> chiral_array::Result<()> {
    for w in [0.05, 0.5] {
        let config = SystemConfig::half_and_half(40, 0.25 * PI, 0.2, w);
        let spec = EnsembleSpec::new(config.clone(), Zone::Disordered, 64, 3)
            .with_observables([ObservableKind::RightPopulation])
            .with_grid(TimeGrid::from_points(vec![0.0, 1e3])?);
        let result = run_ensemble(&spec, 0)?;
        let profile = interface_profile(&config, &result.mean_final_populations)?;
        println!(
            "w = {w}: surviving {:.3}, interface population {:.3e}, clean-side width {:.2} sites{}",
            profile.total,
            profile.interface_value,
            profile.width,
            if profile.decays_within_clean_zone { "" } else { " (no 1/e decay)" }
        );
        let clean: Vec<String> = profile
            .populations
            .iter()
            .zip(&profile.zones)
            .filter(|(_, z)| **z == SiteZone::Clean)
            .rev()
            .take(6)
            .map(|(p, _)| format!("{p:.2e}"))
            .collect();
        println!("  clean sites moving away from the interface: {}", clean.join(" "));
    }
    Ok(())
}
