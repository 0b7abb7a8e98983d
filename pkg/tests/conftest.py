import os

import pytest

import boardlang

GAMES_DIR = os.path.join(os.path.dirname(__file__), "..", "games")

CORPUS = [
    "tic_tac_toe", "connect_four", "hex", "reversi", "gomoku", "pente",
    "yavalath", "dai_hasami_shogi", "wolf_and_sheep", "english_draughts",
    "gridworld",
]


def game_path(name):
    return os.path.join(GAMES_DIR, f"{name}.ldx")


def game_text(name):
    with open(game_path(name), "r", encoding="utf-8") as f:
        return f.read()


_compiled_cache = {}


def compiled(name):
    if name not in _compiled_cache:
        _compiled_cache[name] = boardlang.load_game(game_text(name))
    return _compiled_cache[name]


@pytest.fixture(scope="session")
def corpus_names():
    return list(CORPUS)


@pytest.fixture(scope="session")
def ttt():
    return compiled("tic_tac_toe")


@pytest.fixture(scope="session")
def connect_four():
    return compiled("connect_four")


@pytest.fixture(scope="session")
def reversi():
    return compiled("reversi")


@pytest.fixture(scope="session")
def hex_game():
    return compiled("hex")


@pytest.fixture(scope="session")
def draughts():
    return compiled("english_draughts")


@pytest.fixture(scope="session")
def gomoku():
    return compiled("gomoku")


@pytest.fixture(scope="session")
def pente():
    return compiled("pente")


@pytest.fixture(scope="session")
def yavalath():
    return compiled("yavalath")


@pytest.fixture(scope="session")
def dhs():
    return compiled("dai_hasami_shogi")


@pytest.fixture(scope="session")
def gridworld():
    return compiled("gridworld")


@pytest.fixture(scope="session")
def wolf_and_sheep():
    return compiled("wolf_and_sheep")
