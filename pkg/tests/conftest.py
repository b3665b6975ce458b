"""Shared fixtures: the bundled database, splits, and a tiny test database."""

from __future__ import annotations

import importlib.resources

import pytest

from atgkit import graph, kernel

#: minimal propositional database used by fast unit tests; `id` carries a
#: Z-tagged compressed proof, `idi` an uncompressed one.
TINY_MM = """
$( tiny propositional database $)
$c |- wff ( ) -> -. $.
$v ph ps ch $.
wph $f wff ph $.
wps $f wff ps $.
wch $f wff ch $.
wn $a wff -. ph $.
wi $a wff ( ph -> ps ) $.
ax-1 $a |- ( ph -> ( ps -> ph ) ) $.
ax-2 $a |- ( ( ph -> ( ps -> ch ) ) -> ( ( ph -> ps ) -> ( ph -> ch ) ) ) $.
ax-3 $a |- ( ( -. ph -> -. ps ) -> ( ps -> ph ) ) $.
${
  min $e |- ph $.
  maj $e |- ( ph -> ps ) $.
  ax-mp $a |- ps $.
$}
${
  a1i.1 $e |- ph $.
  a1i $p |- ( ps -> ph ) $= ( wi ax-1 ax-mp ) ABADCABEF $.
$}
id $p |- ( ph -> ph ) $= ( wi ax-1 ax-2 ax-mp ) AAABZBZFAACAFABBGFBAFCAFADEE $.
idi $p |- ( ps -> ( ph -> ph ) ) $= wph wph wi wps wph id a1i $.
"""


@pytest.fixture(scope="session")
def prop_source() -> str:
    return (importlib.resources.files("atgkit") / "data"
            / "prop.mm").read_text()


@pytest.fixture(scope="session")
def db(prop_source) -> kernel.Database:
    return kernel.parse_database(prop_source)


@pytest.fixture(scope="session")
def tiny_db() -> kernel.Database:
    return kernel.parse_database(TINY_MM)


@pytest.fixture(scope="session")
def split_of(db):
    """Seed-keyed cache of splits of the bundled database."""
    cache: dict = {}

    def get(seed: int, preset: str = "wb") -> graph.Split:
        key = (preset, seed)
        if key not in cache:
            cache[key] = graph.make_split(db, preset, seed=seed)
        return cache[key]

    return get
