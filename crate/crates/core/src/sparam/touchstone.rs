//! Touchstone v1 (`.s1p` / `.s2p`) reader and writer.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use super::{ComplexTrace, FrequencyGrid, TwoPortTrace};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PortCount {
    One,
    Two,
}

impl PortCount {
    fn columns(self) -> usize {
        match self {
            PortCount::One => 3,
            PortCount::Two => 9,
        }
    }
}

/// Encoding of each complex value in the data records.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    /// Real / imaginary.
    RI,
    /// Linear magnitude / angle in degrees.
    MA,
    /// dB magnitude / angle in degrees.
    DB,
}

impl DataFormat {
    fn decode(self, a: f64, b: f64) -> Complex64 {
        match self {
            DataFormat::RI => Complex64::new(a, b),
            DataFormat::MA => Complex64::from_polar(a, b.to_radians()),
            DataFormat::DB => Complex64::from_polar(10f64.powf(a / 20.0), b.to_radians()),
        }
    }

    fn encode(self, v: Complex64) -> (f64, f64) {
        match self {
            DataFormat::RI => (v.re, v.im),
            DataFormat::MA => (v.norm(), v.arg().to_degrees()),
            DataFormat::DB => (20.0 * v.norm().log10(), v.arg().to_degrees()),
        }
    }

    fn keyword(self) -> &'static str {
        match self {
            DataFormat::RI => "RI",
            DataFormat::MA => "MA",
            DataFormat::DB => "DB",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NetworkData {
    OnePort(Vec<Complex64>),
    /// Record order of Touchstone v1: S11, S21, S12, S22.
    TwoPort {
        s11: Vec<Complex64>,
        s21: Vec<Complex64>,
        s12: Vec<Complex64>,
        s22: Vec<Complex64>,
    },
}

impl NetworkData {
    fn len(&self) -> usize {
        match self {
            NetworkData::OnePort(v) => v.len(),
            NetworkData::TwoPort { s11, .. } => s11.len(),
        }
    }
}

/// Parsed Touchstone content. Frequencies are in Hz and values are linear
/// complex regardless of the source format. The grid may be non-uniform;
/// [`Touchstone::grid`] is `None` in that case.
#[derive(Debug, Clone, PartialEq)]
pub struct Touchstone {
    pub frequencies_hz: Vec<f64>,
    /// Recorded for completeness; calculations stay in reflection-coefficient space.
    pub reference_ohms: f64,
    pub data: NetworkData,
}

impl Touchstone {
    pub fn from_trace(trace: &ComplexTrace) -> Self {
        Self {
            frequencies_hz: trace.grid().points().collect(),
            reference_ohms: 50.0,
            data: NetworkData::OnePort(trace.values().to_vec()),
        }
    }

    pub fn from_two_port(trace: &TwoPortTrace) -> Self {
        Self {
            frequencies_hz: trace.grid().points().collect(),
            reference_ohms: 50.0,
            data: NetworkData::TwoPort {
                s11: trace.s11.clone(),
                s21: trace.s21.clone(),
                s12: trace.s12.clone(),
                s22: trace.s22.clone(),
            },
        }
    }

    pub fn ports(&self) -> PortCount {
        match self.data {
            NetworkData::OnePort(_) => PortCount::One,
            NetworkData::TwoPort { .. } => PortCount::Two,
        }
    }

    /// Uniform grid of the records, or `None` if fewer than two records or
    /// the spacing is non-uniform.
    pub fn grid(&self) -> Option<FrequencyGrid> {
        FrequencyGrid::infer(&self.frequencies_hz)
    }

    pub fn is_uniform(&self) -> bool {
        self.grid().is_some()
    }

    pub fn one_port(&self) -> Result<ComplexTrace> {
        let grid = self.require_grid()?;
        match &self.data {
            NetworkData::OnePort(v) => ComplexTrace::new(grid, v.clone()),
            NetworkData::TwoPort { .. } => Err(Error::invalid("expected one-port data, found two-port")),
        }
    }

    pub fn two_port(&self) -> Result<TwoPortTrace> {
        let grid = self.require_grid()?;
        match &self.data {
            NetworkData::TwoPort { s11, s21, s12, s22 } => {
                TwoPortTrace::new(grid, s11.clone(), s21.clone(), s12.clone(), s22.clone())
            }
            NetworkData::OnePort(_) => Err(Error::invalid("expected two-port data, found one-port")),
        }
    }

    fn require_grid(&self) -> Result<FrequencyGrid> {
        self.grid().ok_or_else(|| Error::invalid("Touchstone frequencies do not form a uniform grid"))
    }

    /// Render as Touchstone v1 text, frequencies in Hz.
    pub fn to_text(&self, format: DataFormat) -> Result<String> {
        if self.frequencies_hz.is_empty() || self.data.len() == 0 {
            return Err(Error::invalid("cannot write an empty trace"));
        }
        if self.frequencies_hz.len() != self.data.len() {
            return Err(Error::invalid("frequency and data lengths differ"));
        }
        let mut out = String::new();
        let _ = writeln!(out, "! drivecal {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(out, "# HZ S {} R {}", format.keyword(), self.reference_ohms);
        let pair = |out: &mut String, v: Complex64| {
            let (a, b) = format.encode(v);
            let _ = write!(out, " {a:e} {b:e}");
        };
        for (k, f) in self.frequencies_hz.iter().enumerate() {
            let _ = write!(out, "{f:e}");
            match &self.data {
                NetworkData::OnePort(v) => pair(&mut out, v[k]),
                NetworkData::TwoPort { s11, s21, s12, s22 } => {
                    for s in [s11, s21, s12, s22] {
                        pair(&mut out, s[k]);
                    }
                }
            }
            out.push('\n');
        }
        Ok(out)
    }
}

struct OptionLine {
    scale: f64,
    format: DataFormat,
    reference_ohms: f64,
}

fn parse_option_line(line: &str, lineno: usize) -> Result<OptionLine> {
    let mut opt = OptionLine { scale: 1e9, format: DataFormat::MA, reference_ohms: 50.0 };
    let mut tokens = line.trim_start_matches('#').split_whitespace();
    while let Some(tok) = tokens.next() {
        match tok.to_ascii_uppercase().as_str() {
            "HZ" => opt.scale = 1.0,
            "KHZ" => opt.scale = 1e3,
            "MHZ" => opt.scale = 1e6,
            "GHZ" => opt.scale = 1e9,
            "S" => {}
            "Y" | "Z" | "H" | "G" => return Err(Error::parse(lineno, format!("unsupported parameter type `{tok}`"))),
            "RI" => opt.format = DataFormat::RI,
            "MA" => opt.format = DataFormat::MA,
            "DB" => opt.format = DataFormat::DB,
            "R" => {
                let r = tokens.next().ok_or_else(|| Error::parse(lineno, "option line: `R` without a value"))?;
                opt.reference_ohms = r
                    .parse()
                    .map_err(|_| Error::parse(lineno, format!("option line: bad reference impedance `{r}`")))?;
            }
            other => return Err(Error::parse(lineno, format!("malformed option line: unknown token `{other}`"))),
        }
    }
    Ok(opt)
}

/// Parse Touchstone v1 text. Errors carry the 1-based line number.
pub fn parse_touchstone(text: &str, expected_ports: PortCount) -> Result<Touchstone> {
    let mut option: Option<OptionLine> = None;
    let mut freqs: Vec<f64> = Vec::new();
    let ncol = expected_ports.columns();
    let mut cols: Vec<Vec<Complex64>> = vec![Vec::new(); (ncol - 1) / 2];

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('!').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            if option.is_some() {
                return Err(Error::parse(lineno, "duplicate option line"));
            }
            option = Some(parse_option_line(line, lineno)?);
            continue;
        }
        let opt = option.get_or_insert(OptionLine { scale: 1e9, format: DataFormat::MA, reference_ohms: 50.0 });
        let mut nums = Vec::with_capacity(ncol);
        for tok in line.split_whitespace() {
            let v: f64 = tok.parse().map_err(|_| Error::parse(lineno, format!("non-numeric token `{tok}`")))?;
            nums.push(v);
        }
        if nums.len() != ncol {
            return Err(Error::parse(
                lineno,
                format!("expected {ncol} columns for {expected_ports:?}-port data, found {}", nums.len()),
            ));
        }
        let f = nums[0] * opt.scale;
        if let Some(&prev) = freqs.last() {
            if f <= prev {
                return Err(Error::parse(lineno, format!("frequency {f} Hz not above previous {prev} Hz")));
            }
        }
        freqs.push(f);
        for (c, pair) in nums[1..].chunks_exact(2).enumerate() {
            cols[c].push(opt.format.decode(pair[0], pair[1]));
        }
    }

    if freqs.is_empty() {
        return Err(Error::parse(text.lines().count().max(1), "no data records"));
    }
    let reference_ohms = option.map(|o| o.reference_ohms).unwrap_or(50.0);
    let data = match expected_ports {
        PortCount::One => NetworkData::OnePort(cols.pop().unwrap_or_default()),
        PortCount::Two => {
            let mut it = cols.into_iter();
            NetworkData::TwoPort {
                s11: it.next().unwrap_or_default(),
                s21: it.next().unwrap_or_default(),
                s12: it.next().unwrap_or_default(),
                s22: it.next().unwrap_or_default(),
            }
        }
    };
    Ok(Touchstone { frequencies_hz: freqs, reference_ohms, data })
}

/// Render a one-port trace as Touchstone v1 text.
pub fn write_touchstone(trace: &ComplexTrace, format: DataFormat) -> Result<String> {
    Touchstone::from_trace(trace).to_text(format)
}

/// Read a Touchstone file; the port count follows the `.s1p` / `.s2p` extension.
pub fn read_touchstone(path: impl AsRef<Path>) -> Result<Touchstone> {
    let path = path.as_ref();
    let ports = match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("s2p") => PortCount::Two,
        _ => PortCount::One,
    };
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_touchstone(&text, ports).map_err(|e| match e {
        Error::Parse { line, message } => Error::Parse { line, message: format!("{}: {message}", path.display()) },
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn one(text: &str) -> Touchstone {
        parse_touchstone(text, PortCount::One).unwrap()
    }

    #[test]
    fn magnitude_angle_in_ghz() {
        let ts = one("! cable\n# GHz S MA R 50\n5.0 0.019 90\n");
        assert_eq!(ts.frequencies_hz, vec![5e9]);
        let NetworkData::OnePort(v) = &ts.data else { panic!() };
        let expected = Complex64::from_polar(0.019, FRAC_PI_2);
        assert!((v[0] - expected).norm() < 1e-15);
    }

    #[test]
    fn real_imag_in_hz() {
        let ts = one("# Hz S RI R 50\n1e9 1 0\n");
        assert_eq!(ts.frequencies_hz, vec![1e9]);
        let NetworkData::OnePort(v) = &ts.data else { panic!() };
        assert_eq!(v[0], Complex64::new(1.0, 0.0));
        assert!(!ts.is_uniform());
    }

    #[test]
    fn db_angle_in_mhz() {
        let ts = one("# MHz S DB R 50\n100 -20 0\n");
        assert_eq!(ts.frequencies_hz, vec![100e6]);
        let NetworkData::OnePort(v) = &ts.data else { panic!() };
        assert!((v[0] - Complex64::new(0.1, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn single_record_roundtrips_in_every_format() {
        for text in ["# GHz S MA R 50\n5.0 0.019 90\n", "# Hz S RI R 50\n1e9 1 0\n", "# MHz S DB R 50\n100 -20 0\n"] {
            let ts = one(text);
            for fmt in [DataFormat::RI, DataFormat::MA, DataFormat::DB] {
                let back = one(&ts.to_text(fmt).unwrap());
                assert_eq!(back.frequencies_hz, ts.frequencies_hz);
                let (NetworkData::OnePort(a), NetworkData::OnePort(b)) = (&ts.data, &back.data) else { panic!() };
                assert!((a[0] - b[0]).norm() <= 1e-12 * a[0].norm());
            }
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad_opt = parse_touchstone("# GHz S XX R 50\n1 0 0\n", PortCount::One).unwrap_err();
        assert!(matches!(bad_opt, Error::Parse { line: 1, .. }), "{bad_opt}");

        let cols = parse_touchstone("# GHz S RI R 50\n1 0 0\n2 0 0 0\n", PortCount::One).unwrap_err();
        assert!(matches!(cols, Error::Parse { line: 3, .. }), "{cols}");

        let order = parse_touchstone("# GHz S RI R 50\n1 0 0\n! note\n1 0 0\n", PortCount::One).unwrap_err();
        assert!(matches!(order, Error::Parse { line: 4, .. }), "{order}");

        let token = parse_touchstone("# GHz S RI R 50\n1 0 abc\n", PortCount::One).unwrap_err();
        assert!(matches!(token, Error::Parse { line: 2, .. }), "{token}");

        let two = parse_touchstone("# GHz S RI R 50\n1 0 0\n", PortCount::Two).unwrap_err();
        assert!(matches!(two, Error::Parse { line: 2, .. }), "{two}");
    }

    #[test]
    fn two_port_record_order() {
        let ts =
            parse_touchstone("# GHz S RI R 50\n1 0.1 0 0.9 0 0.8 0 0.2 0\n2 0.1 0 0.9 0 0.8 0 0.2 0\n", PortCount::Two)
                .unwrap();
        let tp = ts.two_port().unwrap();
        assert_eq!(tp.s21[0], Complex64::new(0.9, 0.0));
        assert_eq!(tp.s12[1], Complex64::new(0.8, 0.0));
        assert_eq!(tp.s22[0], Complex64::new(0.2, 0.0));
        assert!(ts.one_port().is_err());
    }

    #[test]
    fn empty_trace_is_rejected_on_write() {
        let ts = Touchstone { frequencies_hz: vec![], reference_ohms: 50.0, data: NetworkData::OnePort(vec![]) };
        assert!(ts.to_text(DataFormat::RI).is_err());
    }

    #[test]
    fn large_grid_writes_every_record() {
        let grid = FrequencyGrid::from_span(10e6, 26.5e9, 10001).unwrap();
        let trace = ComplexTrace::from_fn(grid, |f| Complex64::from_polar(0.02, -f * 1e-9)).unwrap();
        let text = write_touchstone(&trace, DataFormat::MA).unwrap();
        let records = text.lines().filter(|l| !l.starts_with('!') && !l.starts_with('#')).count();
        assert_eq!(records, 10001);
        let back = parse_touchstone(&text, PortCount::One).unwrap().one_port().unwrap();
        assert!(back.grid().same_as(trace.grid()));
    }
}
