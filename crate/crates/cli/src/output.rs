//! Numeric formatting and the provenance header shared by every artifact.

use std::fs::File;
use std::io::{self, BufWriter, Write};

use crate::config::RunConfig;

pub const TOOL: &str = concat!("optosqueeze ", env!("CARGO_PKG_VERSION"));

/// 17 significant digits, enough to round-trip any f64.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn open(path: Option<&str>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// `#`-prefixed header: tool, command, conventions and the resolved config.
pub fn provenance(out: &mut dyn Write, command: &str, cfg: &RunConfig, extra: &[(&str, String)]) -> io::Result<()> {
    writeln!(out, "# tool: {TOOL}")?;
    writeln!(out, "# command: {command}")?;
    writeln!(out, "# convention: {}", cfg.convention.name())?;
    writeln!(out, "# units: SI, angular frequencies in rad/s")?;
    for (k, v) in extra {
        writeln!(out, "# {k}: {v}")?;
    }
    for (k, v) in &cfg.resolved {
        writeln!(out, "# config {k} = {v}")?;
    }
    Ok(())
}

/// `key = value` report lines.
pub struct Report<'a> {
    out: &'a mut dyn Write,
}

impl<'a> Report<'a> {
    pub fn new(out: &'a mut dyn Write) -> Self {
        Report { out }
    }

    pub fn num(&mut self, key: &str, value: f64) -> io::Result<()> {
        writeln!(self.out, "{key} = {}", num(value))
    }

    pub fn text(&mut self, key: &str, value: impl std::fmt::Display) -> io::Result<()> {
        writeln!(self.out, "{key} = {value}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, 6.345_e-25, -2.5e17, f64::MIN_POSITIVE] {
            let s = num(x);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-').replace('.', "");
            assert_eq!(mantissa.len(), 17, "{s}");
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }
}
