//! Return-loss table with RSS error bars from an interpolated ECal budget.

use drivecal::uncertainty::{combine_rss, interp_ecal_sigma, to_return_loss, ErrorBudget, UncertaintyTable};

fn main() -> drivecal::Result<()> {
    let ecal =
        UncertaintyTable::new(vec![(-50.0, 0.004), (-40.0, 0.0045), (-30.0, 0.005), (-20.0, 0.006), (-10.0, 0.009)])?;
    println!("{:>7} {:>9} {:>12}", "|S11|", "sigma", "RL");
    for s11 in [0.004, 0.011, 0.019, 0.022, 0.05, 0.2] {
        let budget = ErrorBudget {
            sigma_ecal: interp_ecal_sigma(&ecal, 20.0 * f64::log10(s11))?,
            sigma_switch_var: 0.002,
            sigma_switch_rep: 0.0003,
            sigma_load: 0.0,
            s21_prefactor: 0.0,
        };
        let sigma = combine_rss(&budget, true, false);
        let rl = to_return_loss(s11, sigma)?;
        println!("{s11:>7.3} {sigma:>9.5} {:>12}", rl.display().to_string());
    }
    Ok(())
}
