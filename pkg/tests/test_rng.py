import numpy as np
import pytest
from scipy import stats

from tailscope.rng import replicate_generator, thread_count


def test_streams_are_reproducible_and_distinct():
    a = replicate_generator(42, 3).random(1000)
    b = replicate_generator(42, 3).random(1000)
    assert a.tobytes() == b.tobytes()
    assert replicate_generator(42, 4).random(1000).tobytes() != a.tobytes()
    assert replicate_generator(43, 3).random(1000).tobytes() != a.tobytes()


def test_stream_order_does_not_matter():
    forward = [replicate_generator(7, r).random() for r in range(50)]
    backward = [replicate_generator(7, r).random() for r in reversed(range(50))][::-1]
    assert forward == backward


def test_large_and_negative_seeds():
    replicate_generator(-1, 0).random()
    replicate_generator(2**80, 2**70).random()
    with pytest.raises(ValueError):
        replicate_generator(0, -1)


def test_streams_look_uniform():
    first = np.array([replicate_generator(2025, r).random() for r in range(2000)])
    assert stats.kstest(first, "uniform").pvalue > 1e-3
    assert stats.kstest(replicate_generator(2025, 0).random(20_000), "uniform").pvalue > 1e-3


def test_thread_count(monkeypatch):
    monkeypatch.setenv("TAILSCOPE_THREADS", "3")
    assert thread_count() == 3
    monkeypatch.setenv("TAILSCOPE_THREADS", "0")
    assert thread_count() == 1
    monkeypatch.setenv("TAILSCOPE_THREADS", "many")
    assert thread_count() == 1
    monkeypatch.delenv("TAILSCOPE_THREADS")
    assert thread_count() >= 1
