import pathlib

import pytest

from fomip import load_model, parse_model

from oracles import random_model_text

ROOT = pathlib.Path(__file__).resolve().parent.parent
MODELS = ROOT / "models"
CORPUS = sorted(p.name for p in MODELS.glob("*.fomip"))


def corpus_model(name):
    return load_model(MODELS / name)


def random_model(seed):
    return parse_model(random_model_text(seed), f"<random {seed}>")


@pytest.fixture
def protein():
    return corpus_model("protein.fomip")
