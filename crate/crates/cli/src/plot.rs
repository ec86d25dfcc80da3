//! Companion matplotlib scripts. Nothing is rendered in-process.

use std::path::{Path, PathBuf};

use crate::commands::TableKind;

/// `figure.csv` → `figure.py`.
pub fn script_path(csv: &Path) -> PathBuf {
    csv.with_extension("py")
}

const PRELUDE: &str = r##"import csv
import os
import sys

import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
path = sys.argv[1] if len(sys.argv) > 1 else os.path.join(here, CSV_NAME)
with open(path) as f:
    rows = [r for r in csv.DictReader(line for line in f if not line.startswith("#"))]
"##;

const DIFF_CURVE: &str = r#"
by_c = {}
for r in rows:
    by_c.setdefault(float(r["c"]), []).append((float(r["sigma"]), float(r["diff"])))
for c, pts in sorted(by_c.items()):
    pts.sort()
    plt.plot([p[0] for p in pts], [p[1] for p in pts], label=f"c = {c:g}")
plt.axhline(0.0, color="gray", linewidth=0.5)
plt.xscale("log")
plt.xlabel("sigma")
plt.ylabel("risk_S - risk_L")
plt.legend()
"#;

const HEATMAP: &str = r#"
cs = sorted({float(r["c"]) for r in rows})
sigmas = sorted({float(r["sigma"]) for r in rows})
grid = [[float("nan")] * len(cs) for _ in sigmas]
for r in rows:
    grid[sigmas.index(float(r["sigma"]))][cs.index(float(r["c"]))] = float(r["diff"])
mesh = plt.pcolormesh(cs, sigmas, grid, shading="nearest", cmap="RdBu_r")
plt.colorbar(mesh, label="risk_S - risk_L")
plt.yscale("log")
plt.xlabel("c")
plt.ylabel("sigma")
"#;

const ENVELOPE: &str = r#"
x = [float(r["x"]) for r in rows]
for key in ("risk_v1", "risk_v2", "risk_vx"):
    plt.plot(x, [float(r[key]) for r in rows], label=key)
plt.plot(x, [float(r["envelope"]) for r in rows], "k--", label="envelope")
plt.xlabel("x")
plt.ylabel("limiting risk")
plt.legend()
"#;

pub fn script(kind: TableKind, csv: &Path) -> String {
    let name = csv.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let body = match kind {
        TableKind::DiffCurve => DIFF_CURVE,
        TableKind::Heatmap => HEATMAP,
        TableKind::Envelope => ENVELOPE,
    };
    let stem = Path::new(&name).with_extension("png");
    format!(
        "CSV_NAME = {name:?}\n{PRELUDE}{body}plt.tight_layout()\nplt.savefig(os.path.join(here, {:?}))\n",
        stem.to_string_lossy()
    )
}
