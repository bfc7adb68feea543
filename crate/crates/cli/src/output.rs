use std::fs;
use std::io::{self, Write};

use serde::Serialize;

use crate::{Destination, Failure, Format};

/// `x` with 12 significant digits, positional notation for moderate
/// magnitudes, trailing zeros removed.
pub fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp) as usize;
        let fixed = format!("{x:.decimals$}");
        if fixed.contains('.') {
            fixed.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            fixed
        }
    } else {
        let (mantissa, exponent) = sci.split_once('e').unwrap();
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{exponent}")
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(sig12).unwrap_or_default()
}

/// Assembles CSV in memory so the output is written in one piece.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header).expect("in-memory write");
        Self { writer }
    }

    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).expect("in-memory write");
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.writer.into_inner().expect("in-memory flush")
    }
}

pub fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("serializable");
    bytes.push(b'\n');
    bytes
}

pub fn emit(dest: &Destination, bytes: &[u8]) -> Result<(), Failure> {
    let written = match &dest.out {
        Some(path) => fs::write(path, bytes).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => io::stdout().lock().write_all(bytes).map_err(|e| e.to_string()),
    };
    written.map_err(Failure::Usage)
}

pub fn format_or(dest: &Destination, fallback: Format) -> Format {
    dest.format.unwrap_or(fallback)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(sig12(0.0), "0");
        assert_eq!(sig12(0.5), "0.5");
        assert_eq!(sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(sig12(17.0), "17");
        assert_eq!(sig12(2.0 / 3.0 * 100.0), "66.6666666667");
        assert_eq!(sig12(9.99999999999999), "10");
        assert_eq!(sig12(-1.25e-9), "-1.25e-9");
        assert_eq!(sig12(123456.0), "123456");
        assert_eq!(sig12(1e15), "1e15");
    }
}
