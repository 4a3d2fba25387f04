use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::{CliError, Result};

/// Locale-independent float with 17 significant digits.
pub(crate) fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub(crate) fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub(crate) fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<PathBuf> {
    let file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))?;
    Ok(path.to_path_buf())
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<PathBuf> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))?;
    Ok(path.to_path_buf())
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<PathBuf> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))?;
    Ok(path.to_path_buf())
}

pub(crate) const SYNTHETIC_PLOT: &str = r#"# Cumulative loss against time, log scale. Usage: python plot_synthetic.py
import csv
import collections
import matplotlib.pyplot as plt

series = collections.defaultdict(lambda: ([], []))
with open("synthetic.csv") as f:
    for row in csv.DictReader(f):
        ts, ls = series[row["algorithm"]]
        ts.append(int(row["t"]))
        ls.append(float(row["cumulative_loss"]))

for name, (ts, ls) in series.items():
    plt.plot(ts, ls, label=name)
plt.yscale("log")
plt.xlabel("t")
plt.ylabel("cumulative loss")
plt.legend()
plt.savefig("synthetic.png", dpi=150)
"#;

pub(crate) const SWEEP_PLOT: &str = r#"# Average cumulative loss against beta. Usage: python plot_sweep.py
import csv
import collections
import matplotlib.pyplot as plt

series = collections.defaultdict(lambda: ([], [], []))
with open("sweep_summary.csv") as f:
    for row in csv.DictReader(f):
        bs, ms, ss = series[row["algorithm"]]
        bs.append(float(row["beta"]))
        ms.append(float(row["mean"]))
        ss.append(float(row["std"]))

for name, (bs, ms, ss) in series.items():
    plt.errorbar(bs, ms, yerr=ss, label=name, capsize=2)
plt.xscale("log", base=2)
plt.yscale("log")
plt.xlabel("beta")
plt.ylabel("average cumulative loss")
plt.legend()
plt.savefig("sweep.png", dpi=150)
"#;
