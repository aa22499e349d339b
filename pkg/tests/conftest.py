import numpy as np
import pytest

from sketchdex import engine, synthetic

GLYPH_CORPUS_SIZE = 200
SMALL_CORPUS_SIZE = 16

CORPUS_CONFIG = engine.IndexConfig(holdout_fraction=0.5, seed=7)
SMALL_CONFIG = engine.IndexConfig(m=8, k=32, holdout_fraction=1.0, seed=3)


@pytest.fixture(scope="session")
def glyph_corpus(tmp_path_factory):
    """(inputs, ground truths, root dir) for the 200-page glyph corpus."""
    root = tmp_path_factory.mktemp("corpus200")
    inputs, gts = synthetic.write_glyph_corpus(root, GLYPH_CORPUS_SIZE)
    return inputs, gts, root


@pytest.fixture(scope="session")
def glyph_index(glyph_corpus):
    inputs, _, _ = glyph_corpus
    return engine.build_index(inputs, CORPUS_CONFIG)


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus16")
    inputs, gts = synthetic.write_glyph_corpus(root, SMALL_CORPUS_SIZE)
    return inputs, gts, root


@pytest.fixture(scope="session")
def small_index(small_corpus):
    inputs, _, _ = small_corpus
    return engine.build_index(inputs, SMALL_CONFIG)


@pytest.fixture(scope="session")
def margin_pages():
    """Ten multi-frame pages with constructed margin oracles."""
    return [synthetic.make_margin_page(i) for i in range(10)]


@pytest.fixture()
def rng():
    return np.random.default_rng(4242)
