//! Deterministic JSON output: every float is written with 17 significant
//! digits in scientific notation, so identical inputs give identical bytes
//! and every value round-trips exactly.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};

use crate::error::Result;

#[derive(Debug, Clone, Copy, Default)]
pub struct FixedPrecision;

impl Formatter for FixedPrecision {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

pub fn to_vec<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let mut ser = Serializer::with_formatter(&mut out, FixedPrecision);
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(out)
}

pub fn to_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    Ok(String::from_utf8(to_vec(value)?).expect("serde_json writes UTF-8"))
}
