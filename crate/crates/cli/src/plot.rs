//! Self-contained matplotlib scripts written next to CSV output.

use std::path::{Path, PathBuf};

/// `dir/name.csv` → `dir/name_plot.py`.
pub fn script_path(csv: &Path) -> PathBuf {
    let stem = csv.file_stem().and_then(|s| s.to_str()).unwrap_or("output");
    csv.with_file_name(format!("{stem}_plot.py"))
}

fn csv_name(csv: &Path) -> String {
    csv.file_name()
        .and_then(|s| s.to_str())
        .unwrap_or("output.csv")
        .replace('\\', "\\\\")
        .replace('"', "\\\"")
}

const PRELUDE: &str = r#"import csv
import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))
"#;

pub fn trajectory_script(csv: &Path) -> String {
    format!(
        r#"{PRELUDE}CSV = os.path.join(HERE, "{name}")

with open(CSV, newline="") as fh:
    rows = list(csv.DictReader(fh))

fig, ax = plt.subplots(figsize=(8, 4))
for direction, colour in (("+x", "tab:blue"), ("-x", "tab:red")):
    pts = [(float(r["t"]), float(r["x"])) for r in rows if r["direction"] == direction]
    if pts:
        ax.plot(*zip(*pts), ".", ms=3, color=colour, label=direction)
ax.set_xlabel("t")
ax.set_ylabel("x")
ax.legend()
ax.set_title("trajectory")
out = sys.argv[1] if len(sys.argv) > 1 else os.path.splitext(CSV)[0] + ".png"
fig.savefig(out, dpi=150, bbox_inches="tight")
print(out)
"#,
        name = csv_name(csv)
    )
}

pub fn ensemble_script(csv: &Path) -> String {
    format!(
        r#"{PRELUDE}CSV = os.path.join(HERE, "{name}")

with open(CSV, newline="") as fh:
    rows = list(csv.DictReader(fh))

eps = [float(r["epsilon"]) for r in rows]
mean = [float(r["mean_e1"]) for r in rows]
band = [3.0 * float(r["stderr_e1"]) for r in rows]
orig = [float(r["copenhagen_e1_original"]) for r in rows]
errata = [float(r["copenhagen_e1_errata"]) for r in rows]

fig, ax = plt.subplots(figsize=(7, 4))
ax.errorbar(eps, mean, yerr=band, fmt="o", capsize=4, label="trajectory <E1> (3 stderr)")
ax.plot(eps, orig, "s--", label="Copenhagen E1 (original)")
ax.plot(eps, errata, "^:", label="Copenhagen E1 (errata)")
ax.axhline(0.0, color="grey", lw=0.8)
ax.set_xlabel("epsilon")
ax.set_ylabel("E1")
ax.legend()
out = sys.argv[1] if len(sys.argv) > 1 else os.path.splitext(CSV)[0] + ".png"
fig.savefig(out, dpi=150, bbox_inches="tight")
print(out)
"#,
        name = csv_name(csv)
    )
}
