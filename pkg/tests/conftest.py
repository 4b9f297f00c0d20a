import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from wasserstein_retrieval import retrieval, transport  # noqa: E402
from wasserstein_retrieval.corpus import build_corpus  # noqa: E402
from wasserstein_retrieval.datasets import make_bilingual_corpus, translation_triplet  # noqa: E402

EXACT_FEASIBILITY = 1e-9
SINKHORN_FEASIBILITY = 1e-6

# Every solver call made anywhere in the suite is recorded so marginal
# feasibility can be enforced globally.
_infeasible = []


def _recording(fn, bound, name):
    def wrapper(*args, **kwargs):
        res = fn(*args, **kwargs)
        cfg = args[3] if len(args) > 3 else kwargs.get("cfg")
        checked = name == "exact" or res.converged or (cfg is None or cfg.round_plan)
        if checked and not res.marginal_violation < bound:
            _infeasible.append((name, res.marginal_violation))
        return res

    wrapper.__wrapped__ = fn
    return wrapper


_exact = _recording(transport.solve_exact, EXACT_FEASIBILITY, "exact")
_sinkhorn = _recording(transport.solve_sinkhorn, SINKHORN_FEASIBILITY, "sinkhorn")
for module in (transport, retrieval):
    module.solve_exact = _exact
    module.solve_sinkhorn = _sinkhorn
import wasserstein_retrieval  # noqa: E402

wasserstein_retrieval.solve_exact = _exact
wasserstein_retrieval.solve_sinkhorn = _sinkhorn


@pytest.fixture(autouse=True)
def _feasibility_guard():
    start = len(_infeasible)
    yield
    bad = _infeasible[start:]
    assert not bad, f"solver outputs violated marginal feasibility: {bad[:5]}"


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def triplet():
    return translation_triplet()


@pytest.fixture(scope="session")
def bilingual():
    return make_bilingual_corpus(n_pairs=20, seed=7)


@pytest.fixture(scope="session")
def bilingual_corpora(bilingual):
    return build_corpus(bilingual.queries), build_corpus(bilingual.targets)


@pytest.fixture(scope="session")
def plural_bilingual():
    return make_bilingual_corpus(n_pairs=20, plural_rate=0.3, seed=11)
