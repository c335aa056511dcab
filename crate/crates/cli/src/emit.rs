//! Bit-stable report emission: CSV (header row, comma-separated, LF, UTF-8)
//! and JSON with every float rendered at 12 significant digits,
//! round-half-even. Numbers are formatted once through `report::fmt_f64`,
//! so identical configs produce identical bytes.

use smoothsqf::report::fmt_f64;

/// A JSON value whose numbers are pre-rendered strings.
#[derive(Debug, Clone)]
pub enum Json {
    Null,
    Bool(bool),
    Num(String),
    Str(String),
    Arr(Vec<Json>),
    Obj(Vec<(String, Json)>),
}

impl Json {
    pub fn u64(v: u64) -> Json {
        Json::Num(v.to_string())
    }

    pub fn i64(v: i64) -> Json {
        Json::Num(v.to_string())
    }

    pub fn f64(v: f64) -> Json {
        if v.is_finite() {
            Json::Num(fmt_f64(v))
        } else {
            // JSON has no literal for these
            Json::Str(fmt_f64(v))
        }
    }

    pub fn str(v: impl Into<String>) -> Json {
        Json::Str(v.into())
    }

    pub fn opt_u64(v: Option<u64>) -> Json {
        v.map(Json::u64).unwrap_or(Json::Null)
    }

    pub fn opt_f64(v: Option<f64>) -> Json {
        v.map(Json::f64).unwrap_or(Json::Null)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out);
        out
    }

    fn write(&self, out: &mut String) {
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::Num(n) => out.push_str(n),
            Json::Str(s) => {
                out.push('"');
                for c in s.chars() {
                    match c {
                        '"' => out.push_str("\\\""),
                        '\\' => out.push_str("\\\\"),
                        '\n' => out.push_str("\\n"),
                        '\r' => out.push_str("\\r"),
                        '\t' => out.push_str("\\t"),
                        c if (c as u32) < 0x20 => {
                            out.push_str(&format!("\\u{:04x}", c as u32));
                        }
                        c => out.push(c),
                    }
                }
                out.push('"');
            }
            Json::Arr(items) => {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    item.write(out);
                }
                out.push(']');
            }
            Json::Obj(fields) => {
                out.push('{');
                for (i, (k, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    Json::Str(k.clone()).write(out);
                    out.push(':');
                    v.write(out);
                }
                out.push('}');
            }
        }
    }
}

/// Top-level report object `{config, results, suite_version}` with a
/// trailing newline.
pub fn json_report(config: Json, results: Json) -> String {
    let mut doc = Json::Obj(vec![
        ("config".into(), config),
        ("results".into(), results),
        (
            "suite_version".into(),
            Json::str(env!("CARGO_PKG_VERSION")),
        ),
    ])
    .render();
    doc.push('\n');
    doc
}

/// CSV table: header plus rows, LF line endings. Fields are written as
/// given; callers format numbers with `fmt_f64`/`to_string` beforehand.
pub struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new(header: &[&str]) -> Csv {
        Csv {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, fields: Vec<String>) {
        assert_eq!(fields.len(), self.header.len(), "csv row width");
        self.rows.push(fields);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

/// `key=value` pairs packed into one CSV-safe field.
pub fn pack_params(params: &[(String, f64)]) -> String {
    params
        .iter()
        .map(|(k, v)| format!("{k}={}", fmt_f64(*v)))
        .collect::<Vec<_>>()
        .join(";")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_escaping_and_shape() {
        let j = Json::Obj(vec![
            ("a".into(), Json::u64(3)),
            ("b".into(), Json::str("x\"y\n")),
            ("c".into(), Json::Arr(vec![Json::Null, Json::Bool(true)])),
            ("d".into(), Json::f64(0.1)),
        ]);
        assert_eq!(
            j.render(),
            r#"{"a":3,"b":"x\"y\n","c":[null,true],"d":0.1}"#
        );
    }

    #[test]
    fn csv_shape() {
        let mut c = Csv::new(&["x", "y"]);
        c.row(vec!["1".into(), "2".into()]);
        assert_eq!(c.render(), "x,y\n1,2\n");
    }

    #[test]
    fn params_pack() {
        let p = vec![("p".to_string(), 101.0), ("L".to_string(), 3.5)];
        assert_eq!(pack_params(&p), "p=101;L=3.5");
    }
}
