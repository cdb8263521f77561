//! One disorder realization propagated from an excitation spread over the
//! disordered half, with the per-state observables along the way.

use std::f64::consts::PI;

use chiral_array::evolve::{propagate, TimeGrid};
use chiral_array::model::{build_coupling_matrix, dicke_initial_state, sample_disorder, SystemConfig, Zone};
use chiral_array::observables::{dplr, half_chain_entropy, imbalance, participation_ratio, photon_flux, Direction};

fn main() -> chiral_array::Result<()> {
    let config = SystemConfig::half_and_half(40, 0.25 * PI, 0.2, 0.5);
    let disorder = sample_disorder(&config, 42);
    let matrix = build_coupling_matrix(&config, &disorder)?;
    let initial = dicke_initial_state(&config, &Zone::Disordered)?;
    let grid = TimeGrid::logarithmic(1e-2, 1e4, 13, true)?;
    let trajectory = propagate(&matrix, &initial, &grid)?;
    let ratio = dplr(&trajectory, &config, &disorder)?;

    let cut = config.half_cut();
    println!("{:>10} {:>10} {:>10} {:>10} {:>8} {:>11} {:>11} {:>8}", "gamma_t", "norm", "imbalance", "entropy", "pr", "flux_L", "flux_R", "dplr");
    for (k, (t, state)) in grid.points().iter().zip(&trajectory.states).enumerate() {
        let pr = participation_ratio(state)?;
        println!(
            "{t:>10.3e} {:>10.4} {:>10.4} {:>10.4} {:>8.2} {:>11.3e} {:>11.3e} {:>8}",
            state.norm_sq(),
            imbalance(state, cut)?,
            half_chain_entropy(state, cut)?,
            pr.value,
            photon_flux(state, &config, &disorder, Direction::Left)?,
            photon_flux(state, &config, &disorder, Direction::Right)?,
            ratio.value_at(k).map_or("-".into(), |v| format!("{v:.3}")),
        );
    }
    Ok(())
}
