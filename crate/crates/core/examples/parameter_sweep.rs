//! Readout participation ratio and imbalance over a disorder grid, at two
//! system sizes tied by the equal-halves link.

use std::f64::consts::PI;

use chiral_array::ensemble::{run_sweep, Link, Summary, SweepAxis, SweepParameter, SweepSpec};
use chiral_array::model::{SystemConfig, Zone};

fn main() -> chiral_array::Result<()> {
    let axes = vec![
        SweepAxis { parameter: SweepParameter::NTotal, values: vec![40.0, 80.0] },
        SweepAxis { parameter: SweepParameter::DisorderStrength, values: vec![0.02, 0.1, 0.5] },
    ];
    let mut spec = SweepSpec::new(SystemConfig::half_and_half(40, 0.5 * PI, 0.2, 0.0), Zone::Disordered, axes);
    spec.links = vec![Link::EqualHalves];
    spec.summaries = [Summary::Pr, Summary::Imbalance].into_iter().collect();
    spec.n_realizations = 32;
    spec.readout_time = 1e4;

    let table = run_sweep(&spec, 0)?;
    for row in &table.rows {
        let label: Vec<String> = row.parameters.iter().map(|(p, v)| format!("{}={v}", p.name())).collect();
        match &row.summary {
            Some(s) => {
                let pr = s.pr.expect("requested");
                let imbalance = s.imbalance.expect("requested");
                println!(
                    "{:<34} pr {:>7.2} ± {:.2} (pr/N_d {:.3})  imbalance {:.3}",
                    label.join(" "),
                    pr.value,
                    pr.stderr.unwrap_or(0.0),
                    row.pr_over_nd().unwrap_or(f64::NAN),
                    imbalance.value
                );
            }
            None => println!("{:<34} failed: {:?}", label.join(" "), row.error),
        }
    }
    Ok(())
}
