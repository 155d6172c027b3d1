import pytest

from pinnmg import data_path
from pinnmg.hybrid import HybridConfig, solve_hybrid
from pinnmg.problems import get_problem
from pinnmg.sampling import make_training_set

ACCEPTANCE_LINES: dict[int, str] = {}

# shipped-checkpoint hybrid solve shared by the hybrid tests and the acceptance suite
HYBRID_SETUP = dict(coarse=64, fine=512, ftol=1e-4, delta=1e-6, precision=32)
HYBRID_SET = ("sobol", (100, 100), 2000)


@pytest.fixture(scope="session")
def hybrid_run():
    ckpt = data_path("pretrain.ckpt")
    if not ckpt.exists():
        pytest.skip("shipped checkpoint missing; run scripts/make_pretrain_checkpoint.py")
    problem = get_problem("foursines")
    cfg = HybridConfig(checkpoint=str(ckpt), **HYBRID_SETUP)
    return solve_hybrid(problem, cfg, make_training_set(problem, *HYBRID_SET))


@pytest.fixture
def acceptance_line(capsys):
    def emit(number: int, title: str, passed: bool, detail: str):
        line = f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {title}: {detail}"
        ACCEPTANCE_LINES[number] = line
        with capsys.disabled():
            print("\n" + line)
    return emit


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
