//! Trace files.
//!
//! Sequential format: one trace per line, activities separated by commas,
//! surrounding whitespace trimmed. Lines starting with `#` are comments and an
//! empty line is the empty trace.
//!
//! Partial-order format, detected by a leading `{`:
//! `{"traces":[{"events":[{"id":"e1","activity":"A"}],"order":[["e1","e2"]]}]}`.
//! `order` lists precedence pairs by event id and may be omitted.

use serde::{Deserialize, Serialize};

use crate::trace::{Trace, TraceError, TraceEvent};

#[derive(Debug, thiserror::Error)]
pub enum TraceFileError {
    #[error("line {line}: empty activity name")]
    EmptyActivity { line: usize },
    #[error("invalid JSON trace file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("trace {index}: {source}")]
    Trace { index: usize, source: TraceError },
}

#[derive(Serialize, Deserialize)]
struct JsonFile {
    traces: Vec<JsonTrace>,
}

#[derive(Serialize, Deserialize)]
struct JsonTrace {
    events: Vec<JsonEvent>,
    #[serde(default)]
    order: Vec<(String, String)>,
}

#[derive(Serialize, Deserialize)]
struct JsonEvent {
    id: String,
    activity: String,
}

pub fn parse_traces(text: &str) -> Result<Vec<Trace>, TraceFileError> {
    if text.trim_start().starts_with('{') {
        let file: JsonFile = serde_json::from_str(text)?;
        return file
            .traces
            .into_iter()
            .enumerate()
            .map(|(index, t)| {
                let events = t
                    .events
                    .into_iter()
                    .map(|e| TraceEvent {
                        id: e.id,
                        activity: e.activity,
                    })
                    .collect();
                Trace::partial_order(events, &t.order).map_err(|source| TraceFileError::Trace { index, source })
            })
            .collect();
    }
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.starts_with('#') {
            continue;
        }
        if line.is_empty() {
            out.push(Trace::sequence::<&str>(&[]));
            continue;
        }
        let acts: Vec<&str> = line.split(',').map(str::trim).collect();
        if acts.iter().any(|a| a.is_empty()) {
            return Err(TraceFileError::EmptyActivity { line: i + 1 });
        }
        out.push(Trace::sequence(&acts));
    }
    Ok(out)
}

fn fits_line_format(t: &Trace) -> bool {
    t.is_sequential()
        && t.events().iter().all(|e| {
            let a = &e.activity;
            !a.contains([',', '\n', '\r']) && a.trim() == a && !a.starts_with('#')
        })
}

/// Writes the line format when every trace fits it, JSON otherwise.
pub fn write_traces(traces: &[Trace]) -> String {
    if traces.iter().all(fits_line_format) {
        let mut s = String::new();
        for t in traces {
            s.push_str(&t.activities().join(","));
            s.push('\n');
        }
        return s;
    }
    let file = JsonFile {
        traces: traces
            .iter()
            .map(|t| JsonTrace {
                events: t
                    .events()
                    .iter()
                    .map(|e| JsonEvent {
                        id: e.id.clone(),
                        activity: e.activity.clone(),
                    })
                    .collect(),
                order: t
                    .edges()
                    .iter()
                    .map(|&(x, y)| (t.events()[x].id.clone(), t.events()[y].id.clone()))
                    .collect(),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("trace file serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_format() {
        let ts = parse_traces("# header\nA, B ,C\n\nD\n").unwrap();
        assert_eq!(ts.len(), 3);
        assert_eq!(ts[0].activities(), ["A", "B", "C"]);
        assert!(ts[1].is_empty());
        assert_eq!(ts[2].activities(), ["D"]);
        assert_eq!(parse_traces(&write_traces(&ts)).unwrap(), ts);
    }

    #[test]
    fn empty_activity_is_rejected() {
        assert!(matches!(
            parse_traces("A\nA,,B\n"),
            Err(TraceFileError::EmptyActivity { line: 2 })
        ));
    }

    #[test]
    fn json_partial_order() {
        let text = r#"{"traces":[{"events":[{"id":"s","activity":"S"},{"id":"a","activity":"A"},
            {"id":"b","activity":"B"},{"id":"c","activity":"C"}],
            "order":[["s","a"],["s","b"],["a","c"],["b","c"],["s","c"]]}]}"#;
        let ts = parse_traces(text).unwrap();
        assert_eq!(ts.len(), 1);
        assert!(!ts[0].is_sequential());
        assert_eq!(ts[0].edges().len(), 4);
        let written = write_traces(&ts);
        assert!(written.starts_with('{'));
        assert_eq!(parse_traces(&written).unwrap(), ts);
    }

    #[test]
    fn odd_activity_names_fall_back_to_json() {
        let ts = vec![Trace::sequence(&["a,b", "#c"])];
        let written = write_traces(&ts);
        assert!(written.starts_with('{'));
        let back = parse_traces(&written).unwrap();
        assert_eq!(back[0].activities(), ["a,b", "#c"]);
    }

    #[test]
    fn json_errors() {
        assert!(matches!(parse_traces("{\"traces\": 3}"), Err(TraceFileError::Json(_))));
        let cyclic = r#"{"traces":[{"events":[{"id":"x","activity":"A"},{"id":"y","activity":"B"}],"order":[["x","y"],["y","x"]]}]}"#;
        assert!(matches!(
            parse_traces(cyclic),
            Err(TraceFileError::Trace { index: 0, source: TraceError::CyclicOrder })
        ));
    }
}
