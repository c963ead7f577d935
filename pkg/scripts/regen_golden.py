"""Rewrite tests/golden/*.json from the current CLI output.

Run after an intentional change to a report, then review the diff.
"""
import io
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

from cli_corpus import GOLDEN  # noqa: E402

from halfplane_iso.cli.main import run  # noqa: E402


def main():
    out_dir = ROOT / "tests" / "golden"
    out_dir.mkdir(exist_ok=True)
    for name, argv in sorted(GOLDEN.items()):
        buf = io.StringIO()
        code = run(["--deterministic"] + argv, stdout=buf, stderr=io.StringIO())
        (out_dir / f"{name}.json").write_text(buf.getvalue())
        print(f"{name:28s} exit {code}")


if __name__ == "__main__":
    main()
