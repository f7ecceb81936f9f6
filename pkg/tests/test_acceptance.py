"""End-to-end verification battery.

Each check in fiocalc.acceptance bundles one family of guarantees (symplectic
algebra, phase reduction, metaplectic identities, Weyl calculus, phase-space
analysis, kernel characterization) with its pinned tolerances.  This file runs
every check at full size plus the determinism contract for the CLI suite.
"""

import filecmp
import os

import pytest

from fiocalc import acceptance, cli


@pytest.mark.parametrize("check", acceptance.ALL_CHECKS,
                         ids=lambda c: c.__name__)
def test_acceptance_check(check):
    result = check(seed=0, quick=False)
    assert result.status == "pass", result.details


def _tree_files(root):
    found = []
    for base, _dirs, names in os.walk(root):
        for name in names:
            full = os.path.join(base, name)
            found.append(os.path.relpath(full, root))
    return sorted(found)


def test_suite_runs_are_byte_identical(tmp_path):
    first = tmp_path / "run1"
    second = tmp_path / "run2"
    for out in (first, second):
        code = cli.main(["suite", "--quick", "--seed", "3", "--out", str(out)])
        assert code == 0
    files1 = _tree_files(first)
    assert files1 == _tree_files(second)
    assert "summary.json" in files1 and "manifest.json" in files1
    for rel in files1:
        same = filecmp.cmp(str(first / rel), str(second / rel), shallow=False)
        assert same, f"{rel} differs between identical runs"
