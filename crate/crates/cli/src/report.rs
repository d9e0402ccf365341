//! Run-report JSON shared by every command: config echo, seed, versions.

use serde::Serialize;
use std::path::Path;

#[derive(Serialize)]
pub struct RunReport<C: Serialize, P: Serialize> {
    pub command: String,
    pub crate_version: String,
    pub checkpoint_format_version: u32,
    pub seed: Option<u64>,
    pub config: C,
    pub payload: P,
}

pub fn write_report<C: Serialize, P: Serialize>(
    path: &Path,
    command: &str,
    seed: Option<u64>,
    config: C,
    payload: P,
) -> std::io::Result<()> {
    let report = RunReport {
        command: command.to_string(),
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
        checkpoint_format_version: molforge::model::checkpoint::VERSION,
        seed,
        config,
        payload,
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    std::fs::write(path, json + "\n")
}

/// Merge an optional JSON config file under explicit flag values: any field
/// the flags left unset falls back to the file, then to the default.
pub fn merge_config<T: serde::de::DeserializeOwned + Serialize>(
    file: Option<&Path>,
    defaults: T,
    apply_flags: impl FnOnce(T) -> T,
) -> Result<T, crate::exit::CliError> {
    let base = match file {
        None => defaults,
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| crate::exit::CliError::data(format!("{}: {e}", path.display())))?;
            // overlay file fields onto the defaults
            let mut value = serde_json::to_value(&defaults).expect("defaults serialize");
            let overlay: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| crate::exit::CliError::data(format!("{}: {e}", path.display())))?;
            merge_values(&mut value, overlay);
            serde_json::from_value(value)
                .map_err(|e| crate::exit::CliError::data(format!("{}: {e}", path.display())))?
        }
    };
    Ok(apply_flags(base))
}

fn merge_values(base: &mut serde_json::Value, overlay: serde_json::Value) {
    match (base, overlay) {
        (serde_json::Value::Object(b), serde_json::Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge_values(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}
