from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corramp.errors import FormatError
from corramp.rng import SplitMix64
from corramp.vecio import dumps_binary, dumps_text, loads_binary, loads_text, read_vectors, write_vectors


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 20), st.integers(0, 70), st.integers(0, 2**32))
def test_round_trips(n, d, seed):
    V = SplitMix64(seed).sign_rows(n, d)
    assert np.array_equal(loads_text(dumps_text(V)).reshape(n, d), V)
    assert np.array_equal(loads_binary(dumps_binary(V)).reshape(n, d), V)


def test_text_layout():
    assert dumps_text(np.array([[1, -1, 1]])) == "pm1 3 1\n+-+\n"
    assert loads_text("pm1 2 1\n+−\n").tolist() == [[1, -1]]


def test_binary_layout():
    data = dumps_binary(np.array([[1, -1, -1, -1, -1, -1, -1, -1, 1, 1]]))
    assert data[:4] == b"PM1\x00"
    assert int.from_bytes(data[4:12], "little") == 10
    assert int.from_bytes(data[12:20], "little") == 1
    assert data[20:] == bytes([0b00000001, 0b00000011])


def test_file_round_trip(tmp_path):
    V = SplitMix64(1).sign_rows(9, 77)
    write_vectors(tmp_path / "a.txt", V)
    write_vectors(tmp_path / "a.bin", read_vectors(tmp_path / "a.txt"), binary=True)
    write_vectors(tmp_path / "b.txt", read_vectors(tmp_path / "a.bin"))
    assert (tmp_path / "a.txt").read_bytes() == (tmp_path / "b.txt").read_bytes()


@pytest.mark.parametrize(
    "text,where",
    [
        ("", "line 1"),
        ("pm2 3 1\n+++\n", "line 1"),
        ("pm1 3 2\n+++\n", "line 3"),
        ("pm1 3 1\n++\n", "line 2"),
        ("pm1 3 2\n+++\n+x+\n", "line 3, column 2"),
    ],
)
def test_text_errors(text, where):
    with pytest.raises(FormatError, match=where):
        loads_text(text)


def test_binary_errors():
    good = dumps_binary(np.array([[1, 1, -1]]))
    with pytest.raises(FormatError, match="offset 0"):
        loads_binary(b"XXXX" + good[4:])
    with pytest.raises(FormatError, match="offset"):
        loads_binary(good[:-1])
    with pytest.raises(FormatError, match="pad bits"):
        loads_binary(good[:-1] + bytes([good[-1] | 0x80]))
