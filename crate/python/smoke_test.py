"""Builds the extension module and exercises it from Python.

Run from anywhere: python3 python/smoke_test.py
"""

import json
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "crates" / "core" / "tests" / "fixtures"


def build_module(dest: Path) -> None:
    subprocess.run(
        ["cargo", "build", "--release", "-p", "pupflow-py", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )
    built = ROOT / "target" / "release" / "libpupflow_py.so"
    shutil.copy(built, dest / "pupflow_py.so")


def main() -> int:
    with tempfile.TemporaryDirectory() as tmp:
        build_module(Path(tmp))
        sys.path.insert(0, tmp)
        import pupflow_py as pf

        findings = pf.scan_source(
            "$db_password = ''\nmysql::db { 'app': password => $db_password }\n",
            "inline.pp",
        )
        assert len(findings) == 1, findings
        f = findings[0]
        assert f.category == "EmptyPassword"
        assert (f.sink_resource_type, f.sink_attribute) == ("mysql::db", "password")
        assert json.loads(f.to_json())["line"] == 1
        assert pf.scan_source("$db_password = ''\n", "inline.pp") == []
        assert len(pf.scan_source("$db_password = ''\n", "inline.pp", mode="pattern")) == 1

        assert pf.evaluate_predicate("isHTTP", "http://example.org")
        assert not pf.evaluate_predicate("isHTTP", "https://example.org")
        assert abs(pf.impacted_resource_pct(2945, 65599) - 4.49) <= 0.005
        assert pf.categorize_resource("mysql::db", "gerrit") == "DataStorage"
        try:
            pf.impacted_resource_pct(1, 0)
        except ValueError:
            pass
        else:
            raise AssertionError("zero total accepted")

        corpus = FIXTURES / "corpus"
        taint = pf.scan([str(corpus)], ground_truth=str(corpus / "truth.csv"))
        pattern = pf.scan([str(corpus)], mode="pattern", ground_truth=str(corpus / "truth.csv"))
        assert taint.manifests_scanned == 20
        assert taint.evaluation[1] == pattern.evaluation[1] == 1.0
        assert taint.evaluation[0] > pattern.evaluation[0]
        report = json.loads(taint.to_json())
        assert len(report["findings"]) == len(taint) == len(taint.findings)
        assert "runs" in json.loads(taint.render("sarif"))

        one = pf.scan([str(FIXTURES)], jobs=1).to_json()
        eight = pf.scan([str(FIXTURES)], jobs=8).to_json()
        assert one == eight

    print("python smoke test passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
