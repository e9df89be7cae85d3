use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::WfdbError;

const DEFAULT_FS: f64 = 250.0;
const DEFAULT_GAIN: f64 = 200.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SignalSpec {
    pub file_name: String,
    pub format: u16,
    /// ADC units per physical unit.
    pub gain: f64,
    pub baseline: i32,
    pub units: Option<String>,
    pub adc_resolution: Option<u32>,
    pub adc_zero: i32,
    pub initial_value: Option<i32>,
    pub checksum: Option<i32>,
    pub description: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Header {
    pub record_name: String,
    pub sampling_rate: f64,
    /// Samples per signal, when the header states it.
    pub num_samples: Option<u64>,
    pub signals: Vec<SignalSpec>,
}

fn err(line: usize, reason: impl Into<String>) -> WfdbError {
    WfdbError::Parse {
        line,
        reason: reason.into(),
    }
}

/// Parses a `.hea` file. Comment lines (`#`) and blank lines are skipped;
/// line numbers in errors are 1-based and count every line.
pub fn parse_header(text: &str) -> Result<Header, WfdbError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (line_no, record_line) = lines.next().ok_or_else(|| err(1, "empty header"))?;
    let mut fields = record_line.split_whitespace();
    let name = fields
        .next()
        .ok_or_else(|| err(line_no, "missing record name"))?;
    if name.contains('/') {
        return Err(err(line_no, "multi-segment records are not supported"));
    }
    let nsig: usize = fields
        .next()
        .ok_or_else(|| err(line_no, "missing signal count"))?
        .parse()
        .map_err(|_| err(line_no, "signal count is not an integer"))?;
    if nsig == 0 {
        return Err(err(line_no, "record declares zero signals"));
    }
    let sampling_rate = match fields.next() {
        None => DEFAULT_FS,
        Some(tok) => {
            // "360", "360/1", "360(0)"
            let end = tok.find(['/', '(']).unwrap_or(tok.len());
            let fs: f64 = tok[..end]
                .parse()
                .map_err(|_| err(line_no, "sampling frequency is not a number"))?;
            if fs.is_nan() || fs <= 0.0 {
                return Err(err(line_no, "sampling frequency must be positive"));
            }
            fs
        }
    };
    let num_samples = fields
        .next()
        .map(|t| {
            t.parse::<u64>()
                .map_err(|_| err(line_no, "sample count is not an integer"))
        })
        .transpose()?;

    let mut signals = Vec::with_capacity(nsig);
    for index in 0..nsig {
        let (line_no, line) = lines.next().ok_or_else(|| {
            err(
                line_no,
                alloc::format!("expected {nsig} signal lines, found {index}"),
            )
        })?;
        signals.push(parse_signal_line(line_no, line, index)?);
    }

    Ok(Header {
        record_name: name.to_string(),
        sampling_rate,
        num_samples,
        signals,
    })
}

fn parse_signal_line(line_no: usize, line: &str, index: usize) -> Result<SignalSpec, WfdbError> {
    let mut fields = line.split_whitespace();
    let file_name = fields
        .next()
        .ok_or_else(|| err(line_no, "missing file name"))?
        .to_string();
    let fmt_tok = fields
        .next()
        .ok_or_else(|| err(line_no, "missing format"))?;
    let digits = fmt_tok
        .find(|c: char| !c.is_ascii_digit())
        .unwrap_or(fmt_tok.len());
    let format: u16 = fmt_tok[..digits]
        .parse()
        .map_err(|_| err(line_no, "format is not an integer"))?;
    if format != 212 {
        return Err(WfdbError::UnsupportedFormat {
            signal: index,
            format,
        });
    }

    let mut gain = DEFAULT_GAIN;
    let mut baseline = None;
    let mut units = None;
    if let Some(tok) = fields.next() {
        let (gain_part, rest) = match tok.find(['(', '/']) {
            Some(p) => tok.split_at(p),
            None => (tok, ""),
        };
        let g: f64 = gain_part
            .parse()
            .map_err(|_| err(line_no, "gain is not a number"))?;
        if g != 0.0 {
            gain = g;
        }
        let mut rest = rest;
        if let Some(inner) = rest.strip_prefix('(') {
            let close = inner
                .find(')')
                .ok_or_else(|| err(line_no, "unclosed baseline"))?;
            baseline = Some(
                inner[..close]
                    .parse::<i32>()
                    .map_err(|_| err(line_no, "baseline is not an integer"))?,
            );
            rest = &inner[close + 1..];
        }
        if let Some(u) = rest.strip_prefix('/') {
            units = Some(u.to_string());
        }
    }

    let mut int_field = |what: &str| -> Result<Option<i64>, WfdbError> {
        fields
            .next()
            .map(|t| {
                t.parse::<i64>()
                    .map_err(|_| err(line_no, alloc::format!("{what} is not an integer")))
            })
            .transpose()
    };
    let adc_resolution = int_field("ADC resolution")?.map(|v| v as u32);
    let adc_zero = int_field("ADC zero")?.unwrap_or(0) as i32;
    let initial_value = int_field("initial value")?.map(|v| v as i32);
    let checksum = int_field("checksum")?.map(|v| v as i32);
    let _block_size = int_field("block size")?;
    let rest: Vec<&str> = fields.collect();
    let description = (!rest.is_empty()).then(|| rest.join(" "));

    Ok(SignalSpec {
        file_name,
        format,
        gain,
        baseline: baseline.unwrap_or(adc_zero),
        units,
        adc_resolution,
        adc_zero,
        initial_value,
        checksum,
        description,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MITDB_100: &str = "100 2 360 650000\n\
100.dat 212 200 11 1024 995 -22131 0 MLII\n\
100.dat 212 200 11 1024 1011 20052 0 V5\n\
# 69 M 1085 1629 x1\n";

    #[test]
    fn parses_two_channel_header() {
        let h = parse_header(MITDB_100).unwrap();
        assert_eq!(h.record_name, "100");
        assert_eq!(h.sampling_rate, 360.0);
        assert_eq!(h.num_samples, Some(650_000));
        assert_eq!(h.signals.len(), 2);
        assert_eq!(h.signals[0].gain, 200.0);
        assert_eq!(h.signals[0].adc_zero, 1024);
        assert_eq!(h.signals[0].baseline, 1024);
        assert_eq!(h.signals[0].initial_value, Some(995));
        assert_eq!(h.signals[1].description.as_deref(), Some("V5"));
    }

    #[test]
    fn gain_with_baseline_and_units() {
        let h = parse_header("r 1 250\nr.dat 212 100(-5)/mV 12 0\n").unwrap();
        assert_eq!(h.signals[0].gain, 100.0);
        assert_eq!(h.signals[0].baseline, -5);
        assert_eq!(h.signals[0].units.as_deref(), Some("mV"));
        assert_eq!(h.num_samples, None);
    }

    #[test]
    fn zero_signals_rejected() {
        assert!(matches!(
            parse_header("r 0 360 100\n"),
            Err(WfdbError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn non_212_rejected() {
        assert_eq!(
            parse_header("r 1 360 100\nr.dat 16 200\n"),
            Err(WfdbError::UnsupportedFormat {
                signal: 0,
                format: 16
            })
        );
    }

    #[test]
    fn malformed_line_reports_number() {
        match parse_header("# c\nr 1 360 100\nr.dat 212 abc\n") {
            Err(WfdbError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_header("r 2 360\nr.dat 212\n"),
            Err(WfdbError::Parse { .. })
        ));
    }
}
