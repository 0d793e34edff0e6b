import pytest

from repodedup import pipeline
from repodedup.config import load_config

from .corpus import build_dumbbell_corpus, build_e2e_corpus


@pytest.fixture(scope="session")
def e2e_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("e2e")
    return build_e2e_corpus(root)


@pytest.fixture(scope="session")
def e2e_run(e2e_corpus):
    """Finished pipeline run over the 50-project corpus, suffix rule on."""
    config = load_config(e2e_corpus["config"])
    pipeline.run(config)
    return config


@pytest.fixture(scope="session")
def e2e_run_no_rule(e2e_corpus):
    config = load_config(e2e_corpus["config_no_rule"])
    pipeline.run(config)
    return config


@pytest.fixture(scope="session")
def dumbbell_run(tmp_path_factory):
    """Finished run over the dumbbell + diamond corpus."""
    config = load_config(build_dumbbell_corpus(tmp_path_factory.mktemp("dumbbell")))
    pipeline.run(config)
    return config
