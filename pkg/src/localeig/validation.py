"""Input coercion shared by the estimators."""

import numpy as np
import scipy.sparse
from sklearn.utils.validation import check_array

from .exceptions import InputError
from .graph import Graph, SquareMatrix, build_adjacency, to_mode


def check_graph_matrix(X, matrix="adjacency", node_ids=None) -> SquareMatrix:
    """Coerce a Graph, SquareMatrix, dense array or sparse matrix to a SquareMatrix.

    Anything that is not already a SquareMatrix is read as an adjacency
    matrix and then converted to ``matrix`` mode.
    """
    if isinstance(X, Graph):
        adj = build_adjacency(X)
    elif isinstance(X, SquareMatrix):
        if X.mode == matrix.replace("-", "_"):
            return X
        adj = X
    else:
        if scipy.sparse.issparse(X):
            X = X.toarray()
        try:
            arr = check_array(X, dtype=np.float64, ensure_all_finite=True,
                              ensure_min_samples=1, ensure_min_features=1)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        adj = SquareMatrix(arr, "adjacency", node_ids)
    return to_mode(adj, matrix)


def check_vector(x) -> np.ndarray:
    try:
        return check_array(np.asarray(getattr(x, "values", x), dtype=float), ensure_2d=False,
                           ensure_all_finite=True).ravel()
    except ValueError as exc:
        raise InputError(str(exc)) from exc
