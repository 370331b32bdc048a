"""Dense second-quantised reference for the truncated operator on tiny grids.

Builds a*_m as explicit matrices on all occupation states with n <= 3
photons, forms (ell - P_f + sqrt(a) A)^2 + sqrt(a) sigma.B + H_f there and
projects onto n <= 2. Shares nothing with pflab.fock except the mode data.
"""
from itertools import combinations_with_replacement

import numpy as np

PAULI = [np.array([[0, 1], [1, 0]], complex), np.array([[0, -1j], [1j, 0]]), np.array([[1, 0], [0, -1]], complex)]


def occupation_states(M, nmax):
    states = []
    for n in range(nmax + 1):
        states.extend(combinations_with_replacement(range(M), n))
    return states


def creation_matrices(M, nmax):
    states = occupation_states(M, nmax)
    index = {s: i for i, s in enumerate(states)}
    N = len(states)
    cre = [np.zeros((N, N)) for _ in range(M)]
    for s in states:
        if len(s) == nmax:
            continue
        for m in range(M):
            t = tuple(sorted(s + (m,)))
            cre[m][index[t], index[s]] = np.sqrt(t.count(m))
    return states, cre


def dense_operator(grid, alpha, ell=(0.0, 0.0, 0.0)):
    M = grid.size
    states, cre = creation_matrices(M, 3)
    N = len(states)
    ann = [c.T for c in cre]
    ell = np.asarray(ell, float)
    eye = np.eye(N)
    s_eye = np.eye(2)
    num = [cre[m] @ ann[m] for m in range(M)]
    hf = sum(grid.omega[m] * num[m] for m in range(M))
    T = np.kron(s_eye, hf).astype(complex)
    for i in range(3):
        pf = sum(grid.k[m, i] * num[m] for m in range(M))
        A = sum(grid.g[m, i] * (ann[m] + cre[m]) for m in range(M))
        V = ell[i] * eye - pf + np.sqrt(alpha) * A
        T += np.kron(s_eye, V @ V)
        h = -1j * grid.b[:, i]
        B = sum(np.conj(h[m]) * ann[m] + h[m] * cre[m] for m in range(M))
        T += np.sqrt(alpha) * np.kron(PAULI[i], B)
    keep = [i for i, s in enumerate(states) if len(s) <= 2]
    sel = np.concatenate([keep, [N + i for i in keep]])
    return T[np.ix_(sel, sel)], [states[i] for i in keep]


def to_flat_permutation(M, kept_states, diagonal_pairs=True):
    """Index into the dense (spin-major, occupation) ordering for each flat pflab index."""
    index = {s: i for i, s in enumerate(kept_states)}
    n = len(kept_states)
    perm = [index[()], n + index[()]]
    for s in range(2):
        perm += [s * n + index[(m,)] for m in range(M)]
    pi, pj = np.triu_indices(M, k=0 if diagonal_pairs else 1)
    for s in range(2):
        perm += [s * n + index[(int(a), int(b))] for a, b in zip(pi, pj)]
    return np.array(perm)
