use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Debug, Serialize)]
pub struct MapInfo {
    pub spec: String,
    pub d_in: usize,
    pub d_out: usize,
}

#[derive(Debug, Serialize)]
pub struct Meta {
    pub version: &'static str,
    pub seed: u64,
    pub tol: f64,
    pub elapsed_s: f64,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub map: Option<MapInfo>,
    pub params: Map<String, Value>,
    pub results: Vec<Value>,
    pub verdicts: Map<String, Value>,
    pub meta: Meta,
}

impl RunReport {
    pub fn new(command: &str, seed: u64, tol: f64) -> Self {
        Self {
            command: command.to_string(),
            map: None,
            params: Map::new(),
            results: Vec::new(),
            verdicts: Map::new(),
            meta: Meta {
                version: env!("CARGO_PKG_VERSION"),
                seed,
                tol,
                elapsed_s: 0.0,
            },
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) {
        self.params.insert(key.into(), to_value(value));
    }

    pub fn verdict(&mut self, key: &str, value: impl Serialize) {
        self.verdicts.insert(key.into(), to_value(value));
    }

    pub fn result(&mut self, value: impl Serialize) {
        self.results.push(to_value(value));
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report values are finite JSON")
    }

    pub fn to_table(&self) -> String {
        let mut out = self.command.clone();
        if let Some(m) = &self.map {
            out += &format!("  map {} ({} -> {})", m.spec, m.d_in, m.d_out);
        }
        out.push('\n');
        for (k, v) in &self.params {
            out += &format!("  {k} = {}\n", plain(v));
        }
        if let Some(rows) = table_rows(&self.results) {
            out += &rows;
        }
        for (k, v) in &self.verdicts {
            out += &format!("{k}: {}\n", plain(v));
        }
        out
    }
}

fn to_value(value: impl Serialize) -> Value {
    serde_json::to_value(value).expect("serializable report field")
}

/// `x` with 12 significant digits.
pub fn sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        format!("{x:.*}", (11 - exp).max(0) as usize)
    } else {
        format!("{x:.11e}")
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() => sig12(n.as_f64().unwrap_or(f64::NAN)),
        Value::String(s) => s.clone(),
        Value::Null => "none".into(),
        Value::Array(items) => items.iter().map(plain).collect::<Vec<_>>().join(", "),
        other => other.to_string(),
    }
}

/// Rows of objects become an aligned table keyed by the first row's fields;
/// nested objects are flattened with dotted keys.
fn table_rows(results: &[Value]) -> Option<String> {
    let flat: Vec<Vec<(String, String)>> = results
        .iter()
        .map(|r| {
            let mut cells = Vec::new();
            flatten("", r, &mut cells);
            cells
        })
        .collect();
    let header: Vec<String> = flat.first()?.iter().map(|(k, _)| k.clone()).collect();
    let mut widths: Vec<usize> = header.iter().map(String::len).collect();
    let rows: Vec<Vec<String>> = flat
        .iter()
        .map(|cells| {
            header
                .iter()
                .map(|h| {
                    cells
                        .iter()
                        .find(|(k, _)| k == h)
                        .map(|(_, v)| v.clone())
                        .unwrap_or_default()
                })
                .collect()
        })
        .collect();
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: &[String]| -> String {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect();
        parts.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(&header);
    for row in &rows {
        out += &line(row);
    }
    Some(out)
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, inner) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, inner, out);
            }
        }
        other => out.push((prefix.to_string(), plain(other))),
    }
}
