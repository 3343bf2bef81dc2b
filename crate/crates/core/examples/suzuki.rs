//! The Suzuki-type sufficient condition and grid estimates of sup F.

use bergman_lab::domain::DomainSpec;
use bergman_lab::kernel::closed_form_kernel;
use bergman_lab::schwarz::{global_constant, suzuki_condition_check, GridSpec};

fn main() -> bergman_lab::error::Result<()> {
    let grid = GridSpec::default();
    let disc = closed_form_kernel(&DomainSpec::disc())?;
    for alpha in [0.25, 0.5, 0.75] {
        let r = suzuki_condition_check(&disc, alpha, &grid)?;
        println!(
            "disc α = {alpha}: holds {} (worst margin {:+.2e}), implied C = {}",
            r.holds_on_grid, r.worst_margin, r.implied_c
        );
    }
    for d in [DomainSpec::disc(), DomainSpec::ball(2)?, DomainSpec::polydisc(2)?] {
        let gc = global_constant(&closed_form_kernel(&d)?, &GridSpec { levels: 3, ..grid })?;
        println!("{d}: grid sup {:.6} (trend {:?}), analytic {:?}", gc.c_grid, gc.refinement_trend, gc.analytic_sup);
    }
    Ok(())
}
