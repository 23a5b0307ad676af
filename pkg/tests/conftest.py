from __future__ import annotations

import pytest

from probeable.problems import ProblemBank, bundled_bank_path
from probeable.sandbox import SandboxExecutor


@pytest.fixture(scope="session")
def bank() -> ProblemBank:
    return ProblemBank.load(bundled_bank_path())


@pytest.fixture(scope="session")
def executor() -> SandboxExecutor:
    return SandboxExecutor(max_concurrent=4)
