"""Rebuild tests/golden from a full pipeline run over the bundled fixtures."""

from __future__ import annotations

import shutil
import sys
import tempfile
from pathlib import Path

from chronograph.pipeline import PipelineConfig, run_pipeline

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "tests" / "fixtures"
GOLDEN = ROOT / "tests" / "golden"


def build(out_dir: Path) -> Path:
    config = PipelineConfig.load(FIXTURES / "pipeline.json", {"out_dir": str(out_dir)})
    result = run_pipeline(config)
    if result.exit_code:
        raise SystemExit(f"pipeline failed: {result.error}")
    return out_dir


def artifacts(out_dir: Path) -> list[Path]:
    return sorted(
        p.relative_to(out_dir)
        for p in out_dir.rglob("*")
        if p.is_file() and p.name != "manifest.json" and not p.name.startswith(".")
    )


def main() -> int:
    with tempfile.TemporaryDirectory() as tmp:
        out = build(Path(tmp) / "out")
        if GOLDEN.exists():
            shutil.rmtree(GOLDEN)
        for rel in artifacts(out):
            (GOLDEN / rel).parent.mkdir(parents=True, exist_ok=True)
            shutil.copy(out / rel, GOLDEN / rel)
    print(f"wrote {sum(1 for p in GOLDEN.rglob('*') if p.is_file())} golden files", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
