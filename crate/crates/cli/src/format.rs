use anyhow::{bail, Result};
use serde_json::{Map, Number, Value};

/// Round to `digits` significant digits, then print the shortest string
/// that reads back to the rounded value.
pub fn number(x: f64, digits: usize) -> String {
    format!("{:?}", round(x, digits))
}

pub fn round(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", digits - 1, x).parse().unwrap_or(x)
}

pub fn check_precision(digits: usize) -> Result<()> {
    if !(1..=17).contains(&digits) {
        bail!("--precision must be between 1 and 17, got {digits}");
    }
    Ok(())
}

/// Round every float in a JSON tree. Object keys come out sorted.
pub fn round_json(v: Value, digits: usize) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => n
            .as_f64()
            .and_then(|x| Number::from_f64(round(x, digits)))
            .map_or(Value::Null, Value::Number),
        Value::Array(items) => {
            Value::Array(items.into_iter().map(|x| round_json(x, digits)).collect())
        }
        Value::Object(map) => Value::Object(
            map.into_iter()
                .map(|(k, x)| (k, round_json(x, digits)))
                .collect::<Map<_, _>>(),
        ),
        other => other,
    }
}

pub fn json_text(v: Value, digits: usize) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&round_json(v, digits))?;
    s.push('\n');
    Ok(s)
}

/// CSV with a one-line header and `\n` line endings.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Csv { text }
    }

    pub fn row<I: IntoIterator<Item = String>>(&mut self, fields: I) {
        let fields: Vec<String> = fields.into_iter().collect();
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}
