use serde_json::{Map, Value};

/// Result of one invocation, in both renderings.
pub struct Outcome {
    /// Subcommand path, e.g. `"analytic otto"`.
    pub command: &'static str,
    pub inputs: Vec<(&'static str, Value)>,
    pub outputs: Value,
    pub seed: Option<u64>,
    pub table: Table,
}

/// CSV view: a fixed header and one or more rows.
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    /// One-row table whose columns are the given fields.
    pub fn single(fields: &[(&'static str, Value)]) -> Self {
        Table {
            header: fields.iter().map(|f| f.0).collect(),
            rows: vec![fields.iter().map(|f| f.1.clone()).collect()],
        }
    }
}

pub fn object(fields: &[(&'static str, Value)]) -> Value {
    Value::Object(
        fields
            .iter()
            .map(|(k, v)| ((*k).to_owned(), v.clone()))
            .collect(),
    )
}

impl Outcome {
    pub fn to_json(&self) -> String {
        let mut inputs = Map::new();
        inputs.insert("command".into(), Value::from(self.command));
        for (k, v) in &self.inputs {
            inputs.insert((*k).into(), v.clone());
        }
        let mut doc = Map::new();
        doc.insert("inputs".into(), Value::Object(inputs));
        doc.insert("outputs".into(), self.outputs.clone());
        doc.insert("version".into(), Value::from(env!("CARGO_PKG_VERSION")));
        if let Some(seed) = self.seed {
            doc.insert("seed".into(), Value::from(seed));
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("serializable");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.table.header)?;
        for row in &self.table.rows {
            w.write_record(row.iter().map(cell))?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| csv::Error::from(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("utf-8 cells"))
    }
}

/// Numbers keep their shortest round-trip form; arrays become
/// space-separated lists; null is an empty cell.
fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(cell).collect::<Vec<_>>().join(" "),
        other => other.to_string(),
    }
}
