import numpy as np
import pytest

from causecommit import embedding, features, learn, synthetic
from causecommit.textproc import Annotator


@pytest.fixture(scope="session")
def toy_table():
    return embedding.load_toy_embeddings()


@pytest.fixture(scope="session")
def eco_profile(toy_table):
    return embedding.build_cause_profile("eco", embedding.CAUSE_KEYWORDS["eco"], toy_table)


@pytest.fixture(scope="session")
def annotator():
    return Annotator()


@pytest.fixture(scope="session")
def tiny_table():
    return embedding.EmbeddingTable.from_dict({
        "a": [1.0, 0.0], "b": [0.0, 1.0], "c": [1.0, 1.0],
        "d": [2.0, 0.5], "e": [-1.0, 0.2], "f": [0.3, -1.0],
    })


@pytest.fixture(scope="session")
def demo_models(toy_table, eco_profile, annotator):
    """Support and commitment models trained on the seeded demo set."""
    msgs, labels = synthetic.demo_training_set(30, seed=11)
    corpus = [annotator.annotate(m) for m in msgs]
    config = features.PRESETS["best-combination"]
    support = learn.fit_stage(corpus, labels, "support", config, 0.1, toy_table, eco_profile)
    commit = learn.fit_stage(corpus, labels, "commitment", config, 0.1, toy_table, eco_profile)
    return support, commit


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
