//! Benchmark result rows.

use std::io::Write;

use crate::metrics::RunMetrics;

pub const HEADER: [&str; 12] = [
    "variant",
    "model_id",
    "trace_id",
    "placement",
    "spt",
    "trace_len",
    "cost_num",
    "cost_den",
    "elapsed_s",
    "queued",
    "visited",
    "timed_out",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultRow {
    pub model_id: String,
    pub trace_id: String,
    pub placement: String,
    pub metrics: RunMetrics,
}

impl ResultRow {
    /// Cost as a reduced fraction; both fields empty when no alignment was found.
    pub fn fields(&self) -> [String; 12] {
        let m = &self.metrics;
        let (num, den) = match m.cost {
            Some(c) => (c.numer().to_string(), c.denom().to_string()),
            None => (String::new(), String::new()),
        };
        [
            m.variant.as_str().to_string(),
            self.model_id.clone(),
            self.trace_id.clone(),
            self.placement.clone(),
            m.spt.to_string(),
            m.trace_length.to_string(),
            num,
            den,
            format!("{:.6}", m.elapsed.as_secs_f64()),
            m.queued.to_string(),
            m.visited.to_string(),
            u8::from(m.timed_out).to_string(),
        ]
    }
}

pub fn write_rows<W: Write>(out: W, rows: &[ResultRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record(r.fields())?;
    }
    w.flush()?;
    Ok(())
}

pub fn rows_to_string(rows: &[ResultRow]) -> String {
    let mut buf = Vec::new();
    write_rows(&mut buf, rows).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::Cost;
    use crate::metrics::Variant;
    use std::time::Duration;

    #[test]
    fn row_layout() {
        let mut m = RunMetrics::new(Variant::FoldH, 5, 40);
        m.cost = Some(Cost::new(20002, 10000));
        m.elapsed = Duration::from_millis(1500);
        m.queued = 7;
        m.visited = 3;
        let mut t = m.clone();
        t.variant = Variant::Dijkstra;
        t.cost = None;
        t.timed_out = true;
        let rows = [
            ResultRow { model_id: "C_b2_d1_s0".into(), trace_id: "0".into(), placement: "middle".into(), metrics: m },
            ResultRow { model_id: "C_b2_d1_s0".into(), trace_id: "0".into(), placement: "middle".into(), metrics: t },
        ];
        let text = rows_to_string(&rows);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], HEADER.join(","));
        assert_eq!(lines[1], "foldh,C_b2_d1_s0,0,middle,40,5,10001,5000,1.500000,7,3,0");
        assert_eq!(lines[2], "dijkstra,C_b2_d1_s0,0,middle,40,5,,,1.500000,7,3,1");
    }
}
