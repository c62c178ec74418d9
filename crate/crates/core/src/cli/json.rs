//! JSON output with floats fixed at 17 significant digits and a schema tag
//! on every document.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Pretty printer that writes every finite float as `d.dddddddddddddddde±x`.
pub struct FixedFormatter(PrettyFormatter<'static>);

impl Default for FixedFormatter {
    fn default() -> Self {
        FixedFormatter(PrettyFormatter::new())
    }
}

impl Formatter for FixedFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{}", fmt_f64(v))
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// 17 significant digits in scientific notation; whole numbers keep a
/// fractional part so they read back as floats.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// `payload` as an object with `"schema": 1` and `"kind"` added.
pub fn document<T: Serialize>(kind: &str, payload: &T) -> Result<Value> {
    let mut v = serde_json::to_value(payload)?;
    let obj = match v {
        Value::Object(ref mut m) => m,
        _ => {
            v = serde_json::json!({ "value": v });
            v.as_object_mut().expect("object")
        }
    };
    obj.insert("schema".into(), SCHEMA_VERSION.into());
    obj.insert("kind".into(), kind.into());
    Ok(v)
}

pub fn to_string(v: &Value) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFormatter::default());
    v.serialize(&mut ser)?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_f64(-2.5e-300), "-2.5000000000000000e-300");
        for v in [0.1, std::f64::consts::PI, 1e-310, 6.02e23] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn documents_are_tagged_and_valid() {
        let d = document("test", &serde_json::json!({"x": 0.5, "n": 3, "inf": f64::INFINITY})).unwrap();
        let s = to_string(&d).unwrap();
        assert!(s.contains("\"x\": 5.0000000000000000e-1"));
        assert!(s.contains("\"n\": 3"));
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["schema"], 1);
        assert_eq!(back["kind"], "test");
        assert!(back["inf"].is_null());
        assert_eq!(back["x"].as_f64(), Some(0.5));
    }
}
