"""Matrix exponential by scaling and squaring with a diagonal Pade kernel."""
from __future__ import annotations

import math

import numpy as np

PADE_ORDER = 8
# ||A||_1 bound after scaling; the [8/8] truncation error is far below
# double precision there.
THETA = 0.5


def _pade_coefficients(q: int):
    # c_k = (2q-k)! q! / ((2q)! k! (q-k)!)
    return [
        math.factorial(2 * q - k) * math.factorial(q)
        / (math.factorial(2 * q) * math.factorial(k) * math.factorial(q - k))
        for k in range(q + 1)
    ]


_C = _pade_coefficients(PADE_ORDER)


def expm(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    norm = np.linalg.norm(A, 1)
    s = 0 if norm <= THETA else int(math.ceil(math.log2(norm / THETA)))
    X = A / (2.0 ** s)
    ident = np.eye(n, dtype=complex)
    U = np.zeros_like(X)  # odd part
    V = np.zeros_like(X)  # even part
    P = ident
    for k, c in enumerate(_C):
        if k:
            P = P @ X
        if k % 2:
            U += c * P
        else:
            V += c * P
    R = np.linalg.solve(V - U, V + U)
    for _ in range(s):
        R = R @ R
    return R
