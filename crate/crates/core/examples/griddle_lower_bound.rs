//! The griddle instance: every odd query point has a unique valid answer, so
//! any structure needs quadratically many cells.

use segavd::avd::{self, BuildConfig};
use segavd::workbench::{gen_griddle, verify_griddle};

fn main() -> segavd::Result<()> {
    let g = gen_griddle(3, 1.0, None)?;
    let report = verify_griddle(&g);
    println!(
        "n={} delta={} : {} odd points, {} witnesses, {} failures",
        g.n,
        g.delta,
        report.points_checked,
        report.witness_count,
        report.failures.len()
    );
    let cfg = BuildConfig {
        root_samples: 2_000,
        node_samples: 20,
        ..BuildConfig::default()
    };
    let dag = avd::build(&g.set, g.epsilon, &cfg)?;
    let mut exact = 0;
    for p in g.odd_points() {
        if dag.query(&p.point).segment == g.vertical(p.vertical) {
            exact += 1;
        }
    }
    println!("{} nodes; structure answers v_i at {exact} of {} odd points", dag.nodes.len(), report.points_checked);
    Ok(())
}
