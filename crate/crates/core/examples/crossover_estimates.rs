//! Crossover strengths from the DPLR maximum and the gap-ratio midpoint,
//! first from a hand-made curve and then from a small sweep.

use std::f64::consts::PI;

use chiral_array::analysis::{crossover_from_dplr, crossover_from_gap_ratio, sweep_crossovers, Curve};
use chiral_array::ensemble::{run_sweep, Summary, SweepAxis, SweepParameter, SweepSpec};
use chiral_array::model::{SystemConfig, Zone};

fn main() -> chiral_array::Result<()> {
    let w = vec![0.0, 0.05, 0.1, 0.15, 0.2, 0.3, 0.5];
    let peaked = Curve::new(w.clone(), vec![1.5, 3.0, 9.0, 9.5, 6.0, 4.0, 2.0]);
    let falling = Curve::new(w, vec![0.53, 0.52, 0.48, 0.44, 0.41, 0.39, 0.39]);
    println!("dplr maximum:      {:?}", crossover_from_dplr(&peaked)?);
    println!("gap-ratio midpoint: {:?}", crossover_from_gap_ratio(&falling)?);

    let axes = vec![SweepAxis {
        parameter: SweepParameter::DisorderStrength,
        values: vec![0.0, 0.05, 0.1, 0.15, 0.2, 0.3, 0.5],
    }];
    let mut spec = SweepSpec::new(SystemConfig::half_and_half(40, 0.25 * PI, 0.2, 0.0), Zone::Disordered, axes);
    spec.summaries = [Summary::Dplr].into_iter().collect();
    spec.n_realizations = 32;
    spec.readout_time = 4000.0;
    let table = run_sweep(&spec, 0)?;
    let crossovers = sweep_crossovers(&table);
    match crossovers.first().and_then(|c| c.dplr.as_ref()) {
        Some(Ok(c)) => println!("sweep dplr maximum at w = {:.3} in [{}, {}]", c.w_star, c.bracket.0, c.bracket.1),
        Some(Err(e)) => println!("sweep dplr crossover unavailable: {}", e.tag()),
        None => println!("no dplr summary"),
    }
    Ok(())
}
