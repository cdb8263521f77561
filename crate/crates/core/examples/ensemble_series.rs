//! Disorder-averaged imbalance and participation ratio, clean versus strongly
//! disordered, on the default logarithmic grid.

use std::f64::consts::PI;

use chiral_array::ensemble::{run_ensemble, EnsembleSpec};
use chiral_array::model::{SystemConfig, Zone};
use chiral_array::observables::ObservableKind;

fn main() -> chiral_array::Result<()> {
    for w in [0.0, 0.5] {
        let config = SystemConfig::half_and_half(60, 0.25 * PI, 0.2, w);
        let spec = EnsembleSpec::new(config, Zone::Disordered, if w == 0.0 { 1 } else { 64 }, 1)
            .with_observables([ObservableKind::Imbalance, ObservableKind::Pr]);
        let result = run_ensemble(&spec, 0)?;
        let imbalance = result.get(ObservableKind::Imbalance).expect("requested");
        let pr = result.get(ObservableKind::Pr).expect("requested");
        println!("w = {w} ({} realizations)", result.n_realizations);
        for (k, t) in spec.grid.points().iter().enumerate().step_by(25) {
            let show = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.4}"));
            println!(
                "  gamma_t {t:>9.2e}  imbalance {} ± {}  pr {} ± {}",
                show(imbalance.value_at(k)),
                show(imbalance.stderr_at(k)),
                show(pr.value_at(k)),
                show(pr.stderr_at(k)),
            );
        }
    }
    Ok(())
}
