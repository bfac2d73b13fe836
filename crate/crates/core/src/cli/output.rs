//! JSON emission with every float written to 17 significant digits.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use sha2::{Digest, Sha256};

struct ExactFloats<'a>(PrettyFormatter<'a>);

macro_rules! forward {
    ($($name:ident),* $(,)?) => {
        $(
            fn $name<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
                self.0.$name(w)
            }
        )*
    };
}

impl Formatter for ExactFloats<'_> {
    forward!(begin_array, end_array, begin_object, end_object, end_object_value);

    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
}

/// Pretty-printed JSON, floats as `{:.16e}`, trailing newline.
pub fn to_json_bytes<T: Serialize>(value: &T) -> serde_json::Result<Vec<u8>> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, ExactFloats(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(buf)
}

/// Hex SHA-256 of the canonical JSON form of `value`.
pub fn sha256_hex<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let bytes = to_json_bytes(value)?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_round_trip_exactly() {
        let values = [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, std::f64::consts::PI];
        let bytes = to_json_bytes(&json!({ "v": values })).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        assert!(text.contains("1.0000000000000001e-1"), "{text}");
        let back: serde_json::Value = serde_json::from_str(&text).unwrap();
        for (i, v) in values.iter().enumerate() {
            assert_eq!(back["v"][i].as_f64().unwrap(), *v);
        }
    }

    #[test]
    fn integers_stay_integers() {
        let text = String::from_utf8(to_json_bytes(&json!({ "n": 42u64 })).unwrap()).unwrap();
        assert!(text.contains("\"n\": 42"));
    }

    #[test]
    fn non_finite_becomes_null() {
        let text = String::from_utf8(to_json_bytes(&vec![f64::NAN]).unwrap()).unwrap();
        assert!(text.contains("null"));
    }
}
