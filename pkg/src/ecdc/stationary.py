"""Stationary distribution of the generator, by two independent routes.

``stationary_direct`` solves the balance equations with one of them
replaced by normalization; it is the library default.  ``stationary_rg``
runs the UL-type RG-factorization over the level blocks (censor the top
level, fold its effect into the remaining blocks, repeat) and recovers the
distribution by the forward recursion over the R-blocks.  The two must
agree to solver precision, which the test suite leans on heavily.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError
from .generator import GeneratorMatrix
from .model import StateSpace


def _solve(A: np.ndarray, b: np.ndarray, what: str) -> np.ndarray:
    try:
        x = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"{what}: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise NumericalError(f"{what}: non-finite solution")
    return x


@dataclass(frozen=True)
class RGFactorization:
    """Censored-block factorization Q = (I - R_U) U_D (I - G_L).

    ``U[k]`` is the generator of the chain censored to levels <= k,
    restricted to level k.  ``R[(i, j)]`` and ``G[(i, j)]`` are the upper
    and lower coupling blocks.
    """

    space: StateSpace
    U: tuple
    R: dict
    G: dict

    def reconstruct(self) -> np.ndarray:
        """Multiply the three factors back into a dense matrix."""
        n = self.space.size
        levels = self.space.n_levels
        RU = np.zeros((n, n))
        GL = np.zeros((n, n))
        UD = np.zeros((n, n))
        for k in range(levels):
            sl = self.space.level_slice(k)
            UD[sl, sl] = self.U[k]
        for (i, j), block in self.R.items():
            RU[self.space.level_slice(i), self.space.level_slice(j)] = block
        for (i, j), block in self.G.items():
            GL[self.space.level_slice(i), self.space.level_slice(j)] = block
        eye = np.eye(n)
        return (eye - RU) @ UD @ (eye - GL)


def rg_factorize(gen: GeneratorMatrix) -> RGFactorization:
    """Censor levels from the top down, collecting U, R and G blocks.

    Fails with the offending level index if a censored diagonal block is
    singular (a symptom of a mis-assembled chain).
    """
    space = gen.space
    levels = space.n_levels
    cens = {
        (i, j): gen.Q[space.level_slice(i), space.level_slice(j)].copy()
        for i in range(levels)
        for j in range(levels)
    }
    U: list = [None] * levels
    R: dict = {}
    G: dict = {}
    for n in range(levels - 1, 0, -1):
        U[n] = cens[(n, n)]
        try:
            neg_U_inv = np.linalg.inv(-U[n])
        except np.linalg.LinAlgError as exc:
            raise NumericalError(
                f"censored block at level {n} is singular: {exc}"
            ) from exc
        for i in range(n):
            R[(i, n)] = cens[(i, n)] @ neg_U_inv
        for j in range(n):
            G[(n, j)] = neg_U_inv @ cens[(n, j)]
        for i in range(n):
            for j in range(n):
                cens[(i, j)] = cens[(i, j)] + R[(i, n)] @ cens[(n, j)]
    U[0] = cens[(0, 0)]
    return RGFactorization(space, tuple(U), R, G)


def stationary_rg(gen: GeneratorMatrix, fact: RGFactorization | None = None) -> np.ndarray:
    """Stationary vector via the RG route.

    The level-0 censored chain supplies the seed vector; the distribution
    of every higher level follows from the forward recursion
    ``pi_k = sum_{i<k} pi_i R[i, k]`` and a final normalization.
    """
    if fact is None:
        fact = rg_factorize(gen)
    space = fact.space
    U0 = fact.U[0]
    d0 = U0.shape[0]
    A = U0.T.copy()
    A[-1, :] = 1.0
    b = np.zeros(d0)
    b[-1] = 1.0
    x0 = _solve(A, b, "level-0 censored chain")
    pieces = [x0]
    for k in range(1, space.n_levels):
        pik = np.zeros(space.level_dim(k))
        for i in range(k):
            block = fact.R.get((i, k))
            if block is not None:
                pik = pik + pieces[i] @ block
        pieces.append(pik)
    pi = np.concatenate(pieces)
    pi = np.where(np.abs(pi) < 1e-15, 0.0, pi)
    if pi.min() < -1e-9:
        raise NumericalError(f"RG stationary vector has negative mass {pi.min()}")
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def stationary_direct(gen: GeneratorMatrix) -> np.ndarray:
    """Stationary vector from the balance equations.

    One balance equation is redundant (columns of a conservative generator
    sum to zero), so the last one is replaced by normalization; the system
    is then square and nonsingular whenever the chain has a single
    recurrent class.
    """
    Q = gen.Q
    n = Q.shape[0]
    A = Q.T.copy()
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    pi = _solve(A, b, "stationary solve")
    pi = np.where(np.abs(pi) < 1e-15, 0.0, pi)
    if pi.min() < -1e-9:
        raise NumericalError(f"stationary vector has negative mass {pi.min()}")
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def stationary_residual(gen: GeneratorMatrix, pi: np.ndarray) -> float:
    """Max norm of pi Q (zero for an exact stationary vector)."""
    return float(np.abs(pi @ gen.Q).max())
