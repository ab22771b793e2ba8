"""Direct solution of the constrained saddle-point system with a single
Lagrange multiplier enforcing the zero-mean pressure constraint."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import ConstrainedSystem

_DENSE_CUTOFF = 2000


class SolverError(Exception):
    """Factorization failure (singular or numerically rank-deficient)."""


@dataclass(frozen=True)
class Solution:
    velocity: np.ndarray       # full-length, boundary values included
    pressure: np.ndarray
    residual: float            # relative residual of the augmented system
    pressure_mean: float


def solve_saddle(cs: ConstrainedSystem) -> Solution:
    nf = cs.free.size
    if nf == 0:
        raise SolverError("no free velocity dofs")
    np_ = cs.n_pressure
    mean_col = sp.csr_matrix(
        (cs.mean, (np.arange(np_), np.zeros(np_, dtype=int))),
        shape=(np_, 1),
    )
    K = sp.bmat(
        [
            [cs.A_ff, cs.B_f.T, None],
            [cs.B_f, -cs.M, mean_col],
            [None, mean_col.T, None],
        ],
        format="csr",
    )
    rhs = np.concatenate([cs.rhs_u, cs.rhs_p, [0.0]])

    n = K.shape[0]
    try:
        if n < _DENSE_CUTOFF:
            x = np.linalg.solve(K.toarray(), rhs)
        else:
            with warnings.catch_warnings():
                warnings.simplefilter("error", spla.MatrixRankWarning)
                x = spla.spsolve(K.tocsc(), rhs, use_umfpack=False)
    except (np.linalg.LinAlgError, spla.MatrixRankWarning,
            RuntimeError) as exc:
        raise SolverError("saddle-point factorization failed: %s" % exc)
    if not np.all(np.isfinite(x)):
        raise SolverError("saddle-point solve produced non-finite values")

    res = float(
        np.linalg.norm(K @ x - rhs) / max(np.linalg.norm(rhs), 1e-300)
    )
    velocity = cs.boundary_values.copy()
    velocity[cs.free] = x[:nf]
    pressure = x[nf:nf + np_]
    return Solution(
        velocity=velocity,
        pressure=pressure,
        residual=res,
        pressure_mean=float(cs.mean @ pressure),
    )
