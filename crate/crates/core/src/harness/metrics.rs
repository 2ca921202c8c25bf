use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::ppo::UpdateStats;

pub const METRICS_HEADER: &str =
    "global_step,episodic_return,episodic_length,sps,policy_loss,value_loss,entropy,approx_kl,clipfrac";

/// One CSV row. Episode columns are empty on update-only rows and vice versa.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub global_step: u64,
    pub episodic_return: Option<f64>,
    pub episodic_length: Option<u64>,
    pub sps: f64,
    pub policy_loss: Option<f64>,
    pub value_loss: Option<f64>,
    pub entropy: Option<f64>,
    pub approx_kl: Option<f64>,
    pub clipfrac: Option<f64>,
}

/// Training metrics, one row per global step that finished an episode or an
/// update. Rows with the same step are merged. When backed by a file, every
/// row is written as soon as no later event can merge into it.
pub struct MetricsLog {
    rows: Vec<MetricsRow>,
    writer: Option<csv::Writer<File>>,
    written: usize,
}

impl std::fmt::Debug for MetricsLog {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MetricsLog").field("rows", &self.rows.len()).finish()
    }
}

impl Default for MetricsLog {
    fn default() -> Self {
        MetricsLog::in_memory()
    }
}

impl MetricsLog {
    pub fn in_memory() -> Self {
        MetricsLog { rows: Vec::new(), writer: None, written: 0 }
    }

    pub fn to_file(path: &Path) -> Result<Self, HarnessError> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(HarnessError::io(parent))?;
        }
        let file = File::create(path).map_err(HarnessError::io(path))?;
        let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(file);
        writer.write_record(METRICS_HEADER.split(','))?;
        writer.flush().map_err(HarnessError::io(path))?;
        Ok(MetricsLog { rows: Vec::new(), writer: Some(writer), written: 0 })
    }

    pub fn rows(&self) -> &[MetricsRow] {
        &self.rows
    }

    fn row_at(&mut self, global_step: u64, sps: f64) -> Result<&mut MetricsRow, HarnessError> {
        match self.rows.last() {
            Some(last) if last.global_step == global_step => {}
            Some(last) if last.global_step > global_step => {
                return Err(HarnessError::Config(format!(
                    "metrics step {global_step} precedes logged step {}",
                    last.global_step
                )))
            }
            _ => {
                self.flush_settled()?;
                self.rows.push(MetricsRow { global_step, ..Default::default() });
            }
        }
        let row = self.rows.last_mut().expect("pushed above");
        row.sps = sps;
        Ok(row)
    }

    pub fn record_episode(&mut self, global_step: u64, ret: f64, length: u64, sps: f64) -> Result<(), HarnessError> {
        let row = self.row_at(global_step, sps)?;
        row.episodic_return = Some(ret);
        row.episodic_length = Some(length);
        Ok(())
    }

    pub fn record_update(&mut self, global_step: u64, stats: &UpdateStats, sps: f64) -> Result<(), HarnessError> {
        let row = self.row_at(global_step, sps)?;
        row.policy_loss = Some(stats.policy_loss);
        row.value_loss = Some(stats.value_loss);
        row.entropy = Some(stats.entropy);
        row.approx_kl = Some(stats.approx_kl);
        row.clipfrac = Some(stats.clipfrac);
        Ok(())
    }

    fn write_rows(&mut self, upto: usize) -> Result<(), HarnessError> {
        if let Some(w) = self.writer.as_mut() {
            for row in &self.rows[self.written..upto] {
                w.serialize(row)?;
            }
            w.flush().map_err(|e| HarnessError::Csv(e.into()))?;
        }
        self.written = upto;
        Ok(())
    }

    fn flush_settled(&mut self) -> Result<(), HarnessError> {
        self.write_rows(self.rows.len())
    }

    /// Writes every buffered row. Also used to flush a partial log on error.
    pub fn finish(&mut self) -> Result<(), HarnessError> {
        self.write_rows(self.rows.len())
    }

    /// Episodic returns in step order.
    pub fn episodic_returns(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.episodic_return).collect()
    }

    pub fn update_count(&self) -> usize {
        self.rows.iter().filter(|r| r.policy_loss.is_some()).count()
    }

    pub fn to_csv_string(&self) -> Result<String, HarnessError> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record(METRICS_HEADER.split(','))?;
        for row in &self.rows {
            w.serialize(row)?;
        }
        let bytes = w.into_inner().map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn read_csv(path: &Path) -> Result<Vec<MetricsRow>, HarnessError> {
        let mut r = csv::Reader::from_path(path)?;
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if header.join(",") != METRICS_HEADER {
            return Err(HarnessError::Config(format!("unexpected metrics header {header:?}")));
        }
        Ok(r.deserialize().collect::<Result<Vec<MetricsRow>, _>>()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_merge_on_equal_step_and_header_is_fixed() {
        let mut log = MetricsLog::in_memory();
        log.record_episode(100, -10.0, 100, 50.0).unwrap();
        log.record_episode(128, 3.0, 28, 51.0).unwrap();
        log.record_update(128, &UpdateStats { policy_loss: 0.5, ..Default::default() }, 52.0).unwrap();
        assert_eq!(log.rows().len(), 2);
        assert_eq!(log.rows()[1].episodic_return, Some(3.0));
        assert_eq!(log.rows()[1].policy_loss, Some(0.5));
        assert!(log.record_episode(10, 0.0, 1, 1.0).is_err());
        let csv = log.to_csv_string().unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(METRICS_HEADER));
        assert_eq!(lines.next(), Some("100,-10.0,100,50.0,,,,,"));
    }

    #[test]
    fn file_log_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let mut log = MetricsLog::to_file(&path).unwrap();
        log.record_episode(5, 1.0, 5, 2.0).unwrap();
        log.record_update(7, &UpdateStats::default(), 3.0).unwrap();
        log.finish().unwrap();
        let rows = MetricsLog::read_csv(&path).unwrap();
        assert_eq!(rows, log.rows());
    }
}
