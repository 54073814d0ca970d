use std::io::Write;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::json;

use holder_reg::config::RunConfig;
use holder_reg::error::Result;
use holder_reg::report::{to_json, to_value, write_atomic};

/// Where and how a command's results are written.
pub struct Output {
    dir: PathBuf,
    config: RunConfig,
    seed: Option<u64>,
}

impl Output {
    pub fn new(dir: PathBuf, config: &RunConfig, seed: Option<u64>) -> Self {
        Output {
            dir,
            config: config.clone(),
            seed,
        }
    }

    /// Writes `<stem>.json`, the optional `<stem>.csv` and
    /// `<stem>.metadata.json`, then echoes the report on stdout. Run
    /// metadata stays out of the report so reports are reproducible byte for
    /// byte.
    pub fn write<T: Serialize + ?Sized>(&self, stem: &str, report: &T, csv: Option<&str>) -> Result<()> {
        let body = to_json(report)?;
        write_atomic(&self.dir.join(format!("{stem}.json")), body.as_bytes())?;
        if let Some(csv) = csv {
            write_atomic(&self.dir.join(format!("{stem}.csv")), csv.as_bytes())?;
        }
        let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let meta = json!({
            "command": std::env::args().skip(1).collect::<Vec<_>>(),
            "version": env!("CARGO_PKG_VERSION"),
            "unix_time": stamp,
            "seed": self.seed,
            "config": to_value(&self.config)?,
        });
        write_atomic(&self.dir.join(format!("{stem}.metadata.json")), to_json(&meta)?.as_bytes())?;
        // a closed pipe downstream is not an error of the run
        let _ = std::io::stdout().lock().write_all(body.as_bytes());
        Ok(())
    }
}
