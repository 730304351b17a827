//! Root-sum-square error budgets, ECal uncertainty tables, switch
//! statistics and the asymmetric dB error bars that follow from
//! symmetric linear bars.

use serde::{Deserialize, Serialize};

use crate::sparam::{fmt_num, require_same_grid, ComplexTrace};
use crate::{Error, Result};

/// ECal uncertainty table: reflection level in dB against linear σ.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyTable {
    rows: Vec<(f64, f64)>,
}

impl UncertaintyTable {
    /// Rows must be strictly monotone in level (either direction) with σ > 0.
    pub fn new(rows: Vec<(f64, f64)>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::invalid("uncertainty table needs at least 2 rows"));
        }
        if rows.iter().any(|&(l, s)| !l.is_finite() || !(s.is_finite() && s > 0.0)) {
            return Err(Error::invalid("uncertainty table rows must be finite with sigma > 0"));
        }
        let increasing = rows.windows(2).all(|w| w[1].0 > w[0].0);
        let decreasing = rows.windows(2).all(|w| w[1].0 < w[0].0);
        if !(increasing || decreasing) {
            return Err(Error::invalid("uncertainty table levels must be strictly monotone"));
        }
        let mut rows = rows;
        if decreasing {
            rows.reverse();
        }
        Ok(Self { rows })
    }

    /// Parse `s11_db,sigma_lin` CSV (header required, blank lines ignored).
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, h)) if h.trim().replace(' ', "") == "s11_db,sigma_lin" => {}
            Some((i, _)) => return Err(Error::parse(i + 1, "expected header `s11_db,sigma_lin`")),
            None => return Err(Error::parse(1, "empty uncertainty table")),
        }
        let mut rows = Vec::new();
        for (i, line) in lines {
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 2 {
                return Err(Error::parse(i + 1, format!("expected 2 columns, got {}", cols.len())));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| Error::parse(i + 1, format!("not a number: `{s}`")));
            rows.push((num(cols[0])?, num(cols[1])?));
        }
        Self::new(rows)
    }

    /// Rows sorted by increasing level.
    pub fn rows(&self) -> &[(f64, f64)] {
        &self.rows
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.rows[0].0, self.rows[self.rows.len() - 1].0)
    }
}

/// Piecewise-linear σ at a reflection level in dB.
pub fn interp_ecal_sigma(table: &UncertaintyTable, s11_db: f64) -> Result<f64> {
    let (lo, hi) = table.domain();
    if !(s11_db >= lo && s11_db <= hi) {
        return Err(Error::invalid(format!("level {s11_db} dB outside uncertainty table domain [{lo}, {hi}]")));
    }
    let rows = table.rows();
    let i = rows.partition_point(|r| r.0 < s11_db);
    if i < rows.len() && rows[i].0 == s11_db {
        return Ok(rows[i].1);
    }
    let (l0, s0) = rows[i - 1];
    let (l1, s1) = rows[i];
    let u = (s11_db - l0) / (l1 - l0);
    Ok(s0 + u * (s1 - s0))
}

/// Independent error terms entering the reflection RSS.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ErrorBudget {
    pub sigma_ecal: f64,
    pub sigma_switch_var: f64,
    #[serde(default)]
    pub sigma_switch_rep: f64,
    #[serde(default)]
    pub sigma_load: f64,
    /// `|S21,a|²` of the DUT in front of the load.
    #[serde(default)]
    pub s21_prefactor: f64,
}

impl ErrorBudget {
    pub fn validate(&self) -> Result<()> {
        let all = [self.sigma_ecal, self.sigma_switch_var, self.sigma_switch_rep, self.sigma_load, self.s21_prefactor];
        if all.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::invalid("error budget terms must be finite and ≥ 0"));
        }
        Ok(())
    }
}

/// `sqrt(σ_ecal² + σ_var² [+ σ_rep²] [+ (|S21|²·σ_load)²])`.
pub fn combine_rss(budget: &ErrorBudget, include_rep: bool, include_load: bool) -> f64 {
    let mut sum = budget.sigma_ecal.powi(2) + budget.sigma_switch_var.powi(2);
    if include_rep {
        sum += budget.sigma_switch_rep.powi(2);
    }
    if include_load {
        sum += (budget.s21_prefactor * budget.sigma_load).powi(2);
    }
    sum.sqrt()
}

/// Return loss with asymmetric bars.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnLossResult {
    pub rl_db: f64,
    /// Extent above `rl_db`, from `s11 − σ`; infinite when only a lower bound is known.
    pub upper_db: f64,
    /// Extent below `rl_db`, from `s11 + σ`.
    pub lower_db: f64,
    pub s11_linear: f64,
    pub sigma_rss: f64,
}

impl ReturnLossResult {
    pub fn lower_bound_only(&self) -> bool {
        self.upper_db.is_infinite()
    }

    /// Integer display, e.g. `35,+3,-2` or `48,+inf,-6*`.
    pub fn display(&self) -> DisplayRow {
        DisplayRow {
            rl: round_half_away(self.rl_db),
            upper: if self.lower_bound_only() { None } else { Some(round_half_away(self.upper_db)) },
            lower: round_half_away(self.lower_db),
        }
    }
}

/// Rounded return-loss entry; `upper == None` marks a lower bound only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DisplayRow {
    pub rl: i64,
    pub upper: Option<i64>,
    pub lower: i64,
}

impl std::fmt::Display for DisplayRow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.upper {
            Some(u) => write!(f, "{},+{},-{}", self.rl, u, self.lower),
            None => write!(f, "{},+inf,-{}*", self.rl, self.lower),
        }
    }
}

fn round_half_away(x: f64) -> i64 {
    x.round() as i64
}

pub fn to_return_loss(s11_linear: f64, sigma_rss: f64) -> Result<ReturnLossResult> {
    if !(s11_linear.is_finite() && s11_linear > 0.0) {
        return Err(Error::invalid(format!("|S11| must be > 0, got {s11_linear}")));
    }
    if !(sigma_rss.is_finite() && sigma_rss >= 0.0) {
        return Err(Error::invalid(format!("sigma must be finite and ≥ 0, got {sigma_rss}")));
    }
    let db = |x: f64| -20.0 * x.log10();
    let rl_db = db(s11_linear);
    let upper_db = if sigma_rss >= s11_linear { f64::INFINITY } else { db(s11_linear - sigma_rss) - rl_db };
    let lower_db = rl_db - db(s11_linear + sigma_rss);
    Ok(ReturnLossResult { rl_db, upper_db, lower_db, s11_linear, sigma_rss })
}

/// Population standard deviation of `|S11|` across switch-port traces.
pub fn switch_variability(port_traces: &[ComplexTrace]) -> Result<Vec<f64>> {
    if port_traces.len() < 2 {
        return Err(Error::invalid("switch variability needs at least 2 port traces"));
    }
    for t in &port_traces[1..] {
        require_same_grid(port_traces[0].grid(), t.grid(), "switch port traces")?;
    }
    let n = port_traces.len() as f64;
    Ok((0..port_traces[0].len())
        .map(|k| {
            let mags = port_traces.iter().map(|t| t.values()[k].norm());
            let mean = mags.clone().sum::<f64>() / n;
            (mags.map(|m| (m - mean).powi(2)).sum::<f64>() / n).sqrt()
        })
        .collect())
}

/// Mean absolute change of `|S11|` from the first actuation over the later ones.
pub fn switch_repeatability(actuations: &[ComplexTrace]) -> Result<Vec<f64>> {
    if actuations.len() < 2 {
        return Err(Error::invalid("switch repeatability needs an initial and at least 1 repeated trace"));
    }
    for t in &actuations[1..] {
        require_same_grid(actuations[0].grid(), t.grid(), "switch repeat traces")?;
    }
    let n = (actuations.len() - 1) as f64;
    Ok((0..actuations[0].len())
        .map(|k| {
            let first = actuations[0].values()[k].norm();
            actuations[1..].iter().map(|t| (t.values()[k].norm() - first).abs()).sum::<f64>() / n
        })
        .collect())
}

/// Per-frequency switch errors.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchStats {
    pub sigma_var: Vec<f64>,
    pub sigma_rep: Vec<f64>,
}

/// Variability across ports and repeatability of one port; both sets on one grid.
pub fn switch_stats(port_traces: &[ComplexTrace], actuations: &[ComplexTrace]) -> Result<SwitchStats> {
    let sigma_var = switch_variability(port_traces)?;
    let sigma_rep = switch_repeatability(actuations)?;
    require_same_grid(port_traces[0].grid(), actuations[0].grid(), "port and repeat traces")?;
    Ok(SwitchStats { sigma_var, sigma_rep })
}

/// Multiplicative transmission bars expressed on the insertion loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmissionBars {
    /// `sqrt(σ_ecal² + (2σ_switch)²)`.
    pub relative: f64,
    /// Loss increase from `|S21|·(1 − rel)`; infinite when `rel ≥ 1`.
    pub upper_db: f64,
    /// Loss decrease from `|S21|·(1 + rel)`.
    pub lower_db: f64,
}

pub fn s21_uncertainty(s21: f64, sigma_ecal: f64, sigma_s21_switch: f64) -> Result<TransmissionBars> {
    if !(s21.is_finite() && s21 > 0.0) {
        return Err(Error::invalid(format!("|S21| must be > 0, got {s21}")));
    }
    let relative = (sigma_ecal.powi(2) + (2.0 * sigma_s21_switch).powi(2)).sqrt();
    let upper_db = if relative >= 1.0 { f64::INFINITY } else { -20.0 * (1.0 - relative).log10() };
    let lower_db = 20.0 * (1.0 + relative).log10();
    Ok(TransmissionBars { relative, upper_db, lower_db })
}

/// CSV header of [`ReturnLossResult::csv_row`].
pub const RL_CSV_HEADER: &str =
    "freq_hz,s11_linear,sigma_rss,rl_db,upper_db,lower_db,rl_display,upper_display,lower_display,lower_bound_only";

impl ReturnLossResult {
    pub fn csv_row(&self, freq_hz: f64) -> String {
        let d = self.display();
        format!(
            "{},{},{},{},{},{},{},{},-{},{}",
            fmt_num(freq_hz),
            fmt_num(self.s11_linear),
            fmt_num(self.sigma_rss),
            fmt_num(self.rl_db),
            fmt_num(self.upper_db),
            fmt_num(self.lower_db),
            d.rl,
            d.upper.map_or("+inf".to_string(), |u| format!("+{u}")),
            d.lower,
            if self.lower_bound_only() { "*" } else { "" }
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparam::FrequencyGrid;
    use num_complex::Complex64;

    fn budget(ecal: f64, var: f64, rep: f64) -> ErrorBudget {
        ErrorBudget { sigma_ecal: ecal, sigma_switch_var: var, sigma_switch_rep: rep, ..Default::default() }
    }

    #[test]
    fn rss_examples() {
        assert_eq!(combine_rss(&budget(0.0, 0.006, 0.0), false, false), 0.006);
        let with_rep = combine_rss(&budget(0.0, 5e-3, 4e-4), true, false);
        assert!((with_rep - (25e-6f64 + 0.16e-6).sqrt()).abs() < 1e-15);
        assert!((with_rep - 5.016e-3).abs() < 1e-6);
        assert_eq!(combine_rss(&budget(0.0, 5e-3, 4e-4), false, false), 5e-3);

        let b = ErrorBudget { sigma_load: 0.01, s21_prefactor: 0.01, sigma_switch_var: 0.006, ..Default::default() };
        let with_load = combine_rss(&b, false, true);
        assert!((with_load - (0.006f64.powi(2) + 1e-8).sqrt()).abs() < 1e-15);
        assert!(with_load / 0.006 - 1.0 < 2e-4);
    }

    #[test]
    fn return_loss_examples() {
        let r = to_return_loss(0.019, 0.006).unwrap();
        assert!((r.rl_db - 34.4249).abs() < 1e-3);
        assert!((r.upper_db - 3.30).abs() < 0.01);
        assert!((r.lower_db - 2.38).abs() < 0.01);

        let r = to_return_loss(0.1, 0.0).unwrap();
        assert!((r.rl_db - 20.0).abs() < 1e-12);
        assert_eq!((r.upper_db, r.lower_db), (0.0, 0.0));

        let r = to_return_loss(0.003, 0.006).unwrap();
        assert!(r.lower_bound_only());
        assert_eq!(r.display().upper, None);
        assert!(r.display().to_string().ends_with('*'));

        assert!(to_return_loss(0.0, 0.006).is_err());
        assert!(to_return_loss(-0.1, 0.0).is_err());
    }

    #[test]
    fn display_rounding() {
        let r = to_return_loss(0.022, 0.006).unwrap();
        assert_eq!(r.display().to_string(), "33,+3,-2");
        assert_eq!(round_half_away(2.5), 3);
        assert_eq!(round_half_away(-2.5), -3);
    }

    #[test]
    fn table_interpolation() {
        let t = UncertaintyTable::from_csv("s11_db,sigma_lin\n-10,0.004\n-30,0.002\n-50,0.001\n").unwrap();
        assert_eq!(interp_ecal_sigma(&t, -30.0).unwrap(), 0.002);
        assert!((interp_ecal_sigma(&t, -20.0).unwrap() - 0.003).abs() < 1e-15);
        assert!(interp_ecal_sigma(&t, -60.0).is_err());
        assert!(interp_ecal_sigma(&t, 0.0).is_err());
        assert!(UncertaintyTable::new(vec![(-10.0, 0.1), (-10.0, 0.2)]).is_err());
        assert!(UncertaintyTable::new(vec![(-10.0, 0.1), (-20.0, 0.0)]).is_err());
        assert!(UncertaintyTable::from_csv("level,sigma\n").is_err());
    }

    fn flat(mag: f64) -> ComplexTrace {
        let g = FrequencyGrid::new(1e9, 1e9, 4).unwrap();
        ComplexTrace::from_fn(g, |_| Complex64::new(0.0, mag)).unwrap()
    }

    #[test]
    fn switch_statistics() {
        let same = switch_variability(&[flat(0.01), flat(0.01)]).unwrap();
        assert!(same.iter().all(|&s| s == 0.0));
        let two = switch_variability(&[flat(0.01), flat(0.02)]).unwrap();
        assert!(two.iter().all(|&s| (s - 0.005).abs() < 1e-15));
        assert!(switch_variability(&[flat(0.01)]).is_err());

        let rep = switch_repeatability(&[flat(0.01), flat(0.011), flat(0.009), flat(0.0104), flat(0.01)]).unwrap();
        assert!(rep.iter().all(|&s| (s - 0.0006).abs() < 1e-12));

        let other =
            ComplexTrace::from_fn(FrequencyGrid::new(2e9, 1e9, 4).unwrap(), |_| Complex64::new(0.0, 0.0)).unwrap();
        assert!(matches!(switch_variability(&[flat(0.01), other]), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn transmission_bars() {
        let z = s21_uncertainty(0.9, 0.0, 0.0).unwrap();
        assert_eq!((z.upper_db, z.lower_db), (0.0, 0.0));
        let b = s21_uncertainty(10f64.powf(-0.99 / 20.0), 0.0046, 0.0).unwrap();
        assert_eq!((b.upper_db * 100.0).round() / 100.0, 0.04);
        assert_eq!((b.lower_db * 100.0).round() / 100.0, 0.04);
        assert!((s21_uncertainty(0.5, 0.0, 0.01).unwrap().relative - 0.02).abs() < 1e-15);
        assert!(s21_uncertainty(0.0, 0.0, 0.01).is_err());
    }
}
