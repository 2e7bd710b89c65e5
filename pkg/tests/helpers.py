"""Shared test data: the scalar LQR instance and a corpus of dissipative systems."""

import math

import numpy as np

from dissipativity import QuadraticStorage, StateSpaceSystem, SupplyRate
from dissipativity.trajectories import InputSignal

K_LQR = math.sqrt(2.0) - 1.0


def scalar_lqr():
    return StateSpaceSystem([[-1.0]], [[1.0]], [[1.0]], [[0.0]]), SupplyRate([[1.0]], [[0.0]], [[1.0]])


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_hermitian(rng, n):
    X = crandn(rng, n, n)
    return 0.5 * (X + X.conj().T)


def random_psd(rng, n, rank):
    G = crandn(rng, rank, n)
    return G.conj().T @ G


def dissipative_instance(rng, n, m, p, q):
    """System, supply and storage whose KYP matrix equals ``[K L]^* [K L]`` by construction.

    P is Hermitian with eigenvalues of both signs bounded away from zero; A and
    B are solved from the two upper KYP blocks and R from the lower one.
    """
    U, _ = np.linalg.qr(crandn(rng, n, n))
    eig = rng.uniform(0.5, 2.0, n) * rng.choice([-1.0, 1.0], n)
    P = (U * eig) @ U.conj().T
    scale = 0.6 / math.sqrt(n + m)
    K = scale * crandn(rng, q, n)
    L = scale * crandn(rng, q, m)
    C = 0.5 * crandn(rng, p, n)
    D = 0.5 * crandn(rng, p, m)
    Q = random_hermitian(rng, p) * 0.5
    S = 0.3 * crandn(rng, p, m)
    Om = 0.5 * crandn(rng, n, n)
    Om = 0.5 * (Om - Om.conj().T)
    Pinv = np.linalg.inv(P)
    A = Pinv @ (0.5 * (K.conj().T @ K - C.conj().T @ Q @ C) + Om)
    B = Pinv @ (K.conj().T @ L - C.conj().T @ Q @ D - C.conj().T @ S)
    R = L.conj().T @ L - D.conj().T @ Q @ D - D.conj().T @ S - S.conj().T @ D
    R = 0.5 * (R + R.conj().T)
    return (StateSpaceSystem(A, B, C, D), SupplyRate(Q, S, R), QuadraticStorage(P),
            np.hstack([K, L]))


def random_lq(rng, n, m, p):
    """Random LQ instance with a positive definite supply block."""
    A = crandn(rng, n, n)
    B = crandn(rng, n, m)
    C = crandn(rng, p, n)
    D = crandn(rng, p, m)
    G = crandn(rng, p + m, p + m)
    W = G.conj().T @ G + 0.2 * np.eye(p + m)
    return StateSpaceSystem(A, B, C, D), SupplyRate(W[:p, :p], W[:p, p:], W[p:, p:])


def corpus(count=24, seed=20240611):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(1, 7))
        m = int(rng.integers(1, 4))
        p = int(rng.integers(1, 4))
        q = int(rng.integers(1, n + m + 1))
        out.append(dissipative_instance(rng, n, m, p, q))
    return out


class SumOfSines(InputSignal):
    """``sum_k a_k sin(w_k t + phi_k)``: a smooth input with vector amplitudes."""

    def __init__(self, amplitudes, frequencies, phases):
        self.amplitudes = np.asarray(amplitudes, dtype=complex)
        self.frequencies = np.asarray(frequencies, dtype=float)
        self.phases = np.asarray(phases, dtype=float)
        self.m = self.amplitudes.shape[1]

    def __call__(self, t, x):
        return np.sin(self.frequencies * t + self.phases) @ self.amplitudes


def smooth_input(rng, m, terms=3):
    return SumOfSines(0.5 * crandn(rng, terms, m), rng.uniform(0.5, 4.0, terms),
                      rng.uniform(0, 2 * np.pi, terms))
