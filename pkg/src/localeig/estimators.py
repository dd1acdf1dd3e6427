"""scikit-learn style wrappers around the functional API."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import compare, spectral
from .exceptions import InputError
from .validation import check_graph_matrix, check_vector


class LocalEigenvectorCentrality(BaseEstimator):
    """Eigengap-guided local eigenvector centrality.

    ``fit`` decomposes the graph matrix, selects ``k`` (automatically or as
    given) and stores the centrality. ``transform`` applies the fitted ``k``
    to another graph, e.g. a perturbed copy of the training graph.

    Parameters
    ----------
    k : "auto" or int
    matrix : {"adjacency", "laplacian", "normalized_laplacian"}
    tol_zero, tol_imag : float
        Snapping tolerances forwarded to :func:`localeig.spectral.decompose`.
    n_components : int, optional
        Leading eigenpairs to compute iteratively instead of a full decomposition.

    Attributes
    ----------
    spectrum_ : Spectrum
    eigengaps_ : EigengapAnalysis or None
    k_ : int
        Number of V columns used, after any conjugate-pair extension.
    centrality_ : CentralityVector
    warnings_ : tuple of str
    """

    def __init__(self, k="auto", matrix="adjacency", tol_zero=spectral.TOL_ZERO,
                 tol_imag=spectral.TOL_IMAG, n_components=None):
        self.k = k
        self.matrix = matrix
        self.tol_zero = tol_zero
        self.tol_imag = tol_imag
        self.n_components = n_components

    def _analyze(self, X, k):
        m = check_graph_matrix(X, self.matrix)
        return spectral.analyze(m, k, self.tol_zero, self.tol_imag, self.n_components)

    def fit(self, X, y=None):
        result = self._analyze(X, self.k)
        self.spectrum_ = result.spectrum
        self.eigengaps_ = result.eigengaps
        self.v_ = result.v
        self.k_ = result.v.k
        self.centrality_ = result.centrality
        self.warnings_ = result.centrality.warnings
        self.n_nodes_ = result.spectrum.n
        return self

    def transform(self, X):
        check_is_fitted(self, "k_")
        return np.asarray(self._analyze(X, self.k_).centrality.values)

    def fit_transform(self, X, y=None):
        return np.asarray(self.fit(X).centrality_.values)


class EigenvectorCentrality(BaseEstimator):
    """Principal-eigenvector centrality of an adjacency matrix."""

    def __init__(self, n_components=None):
        self.n_components = n_components

    def fit(self, X, y=None):
        self.centrality_ = spectral.eigenvector_centrality(check_graph_matrix(X), self.n_components)
        return self

    def fit_transform(self, X, y=None):
        return np.asarray(self.fit(X).centrality_.values)


class PageRank(BaseEstimator):
    def __init__(self, damping=compare.DEFAULT_DAMPING, tol=1e-12, max_iter=1000):
        self.damping = damping
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y=None):
        self.centrality_ = compare.pagerank(check_graph_matrix(X), self.damping, self.tol, self.max_iter)
        return self

    def fit_transform(self, X, y=None):
        return np.asarray(self.fit(X).centrality_.values)


class HadamardPowerRescaler(TransformerMixin, BaseEstimator):
    """Element-wise power rescaling normalised to unit sum.

    With ``p=None`` the power is fitted on a grid by minimising the
    MAD-normalised distance to the reference vector passed as ``y``.
    """

    def __init__(self, p=None, grid=None, mad="center_scale"):
        self.p = p
        self.grid = grid
        self.mad = mad

    def fit(self, X, y=None):
        x = check_vector(X)
        if self.p is not None:
            self.p_ = float(self.p)
            self.distance_ = None if y is None else compare.distance(
                compare.rescale(x, self.p_), check_vector(y), self.mad)
        else:
            if y is None:
                raise InputError("fitting the power needs a reference vector y")
            self.p_, self.distance_ = compare.fit_power(x, check_vector(y), self.grid, self.mad)
        return self

    def transform(self, X):
        check_is_fitted(self, "p_")
        return compare.rescale(check_vector(X), self.p_)
