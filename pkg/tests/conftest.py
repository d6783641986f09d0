import numpy as np
import pytest

from wvamp import FiniteObservable, SystemState


def random_state(rng, dim):
    return SystemState.normalized(rng.normal(size=dim) + 1j * rng.normal(size=dim))


def random_unitary(rng, dim):
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_onb(rng, dim):
    u = random_unitary(rng, dim)
    return [SystemState(u[:, k]) for k in range(dim)]


def rotated_observable(rng, eigenvalues):
    """Random non-diagonal observable with the given spectrum."""
    dim = len(eigenvalues)
    u = random_unitary(rng, dim)
    projectors = tuple(
        np.outer(u[:, k], u[:, k].conj()) for k in range(dim)
    )
    return FiniteObservable(np.array(eigenvalues, dtype=float), projectors)


def random_two_point_selection(rng, min_overlap=1e-3):
    """Random (pre, post, obs) with a two-point spectrum and decent overlap."""
    while True:
        lam = np.sort(rng.uniform(-2.0, 2.0, size=2))
        if lam[1] - lam[0] < 0.2:
            continue
        pre = random_state(rng, 2)
        post = random_state(rng, 2)
        obs = rotated_observable(rng, lam)
        overlap = complex(np.vdot(post.amplitudes, pre.amplitudes))
        if abs(overlap) > min_overlap:
            return pre, post, obs


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
